#include "editgauge/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace editgauge::nn {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Var make_param(std::string name, std::size_t rows, std::size_t cols) {
  auto t = std::make_shared<Tensor>();
  t->rows = rows;
  t->cols = cols;
  t->val.assign(rows * cols, 0.0);
  t->grad.assign(rows * cols, 0.0);
  t->requires_grad = true;
  t->name = std::move(name);
  return t;
}

Var make_const(std::vector<double> v) {
  auto t = std::make_shared<Tensor>();
  t->rows = v.size();
  t->cols = 1;
  t->val = std::move(v);
  t->grad.assign(t->val.size(), 0.0);
  t->requires_grad = false;
  return t;
}

Var Graph::node(std::size_t rows, std::size_t cols) {
  auto t = std::make_shared<Tensor>();
  t->rows = rows;
  t->cols = cols;
  t->val.assign(rows * cols, 0.0);
  t->grad.assign(rows * cols, 0.0);
  t->requires_grad = true;
  tape_.push_back(t);
  return t;
}

Var Graph::constant(std::vector<double> v) {
  Var t = node(v.size(), 1);
  t->val = std::move(v);
  t->requires_grad = false;
  return t;
}

Var Graph::zeros(std::size_t n) { return constant(std::vector<double>(n, 0.0)); }

Var Graph::affine(const Var& w, const Var& x, const Var& b) {
  check(w->cols == x->rows && x->cols == 1, "affine: W cols != x rows");
  check(b->rows == w->rows && b->cols == 1, "affine: b rows != W rows");
  Var y = node(w->rows, 1);
  const std::size_t m = w->rows, n = w->cols;
  for (std::size_t i = 0; i < m; ++i) {
    double acc = b->val[i];
    const double* wrow = w->val.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += wrow[j] * x->val[j];
    y->val[i] = acc;
  }
  y->backward = [y, w, x, b, m, n]() {
    for (std::size_t i = 0; i < m; ++i) {
      const double g = y->grad[i];
      if (g == 0.0) continue;
      double* wgrow = w->grad.data() + i * n;
      const double* wrow = w->val.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        wgrow[j] += g * x->val[j];
        x->grad[j] += g * wrow[j];
      }
      b->grad[i] += g;
    }
  };
  return y;
}

Var Graph::matvec(const Var& w, const Var& x) {
  check(w->cols == x->rows && x->cols == 1, "matvec: W cols != x rows");
  Var y = node(w->rows, 1);
  const std::size_t m = w->rows, n = w->cols;
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* wrow = w->val.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += wrow[j] * x->val[j];
    y->val[i] = acc;
  }
  y->backward = [y, w, x, m, n]() {
    for (std::size_t i = 0; i < m; ++i) {
      const double g = y->grad[i];
      if (g == 0.0) continue;
      double* wgrow = w->grad.data() + i * n;
      const double* wrow = w->val.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        wgrow[j] += g * x->val[j];
        x->grad[j] += g * wrow[j];
      }
    }
  };
  return y;
}

Var Graph::add(const Var& a, const Var& b) {
  check(a->size() == b->size(), "add: size mismatch");
  Var y = node(a->rows, a->cols);
  for (std::size_t i = 0; i < y->size(); ++i) y->val[i] = a->val[i] + b->val[i];
  y->backward = [y, a, b]() {
    for (std::size_t i = 0; i < y->val.size(); ++i) {
      a->grad[i] += y->grad[i];
      b->grad[i] += y->grad[i];
    }
  };
  return y;
}

Var Graph::hadamard(const Var& a, const Var& b) {
  check(a->size() == b->size(), "hadamard: size mismatch");
  Var y = node(a->rows, a->cols);
  for (std::size_t i = 0; i < y->size(); ++i) y->val[i] = a->val[i] * b->val[i];
  y->backward = [y, a, b]() {
    for (std::size_t i = 0; i < y->val.size(); ++i) {
      a->grad[i] += y->grad[i] * b->val[i];
      b->grad[i] += y->grad[i] * a->val[i];
    }
  };
  return y;
}

Var Graph::scale(const Var& a, double c) {
  Var y = node(a->rows, a->cols);
  for (std::size_t i = 0; i < y->size(); ++i) y->val[i] = c * a->val[i];
  y->backward = [y, a, c]() {
    for (std::size_t i = 0; i < y->val.size(); ++i) a->grad[i] += c * y->grad[i];
  };
  return y;
}

Var Graph::add_scaled(const Var& a, double ca, const Var& b, double cb) {
  check(a->size() == b->size(), "add_scaled: size mismatch");
  Var y = node(a->rows, a->cols);
  for (std::size_t i = 0; i < y->size(); ++i)
    y->val[i] = ca * a->val[i] + cb * b->val[i];
  y->backward = [y, a, b, ca, cb]() {
    for (std::size_t i = 0; i < y->val.size(); ++i) {
      a->grad[i] += ca * y->grad[i];
      b->grad[i] += cb * y->grad[i];
    }
  };
  return y;
}

Var Graph::sigmoid(const Var& a) {
  Var y = node(a->rows, a->cols);
  for (std::size_t i = 0; i < y->size(); ++i)
    y->val[i] = 1.0 / (1.0 + std::exp(-a->val[i]));
  y->backward = [y, a]() {
    for (std::size_t i = 0; i < y->val.size(); ++i) {
      const double s = y->val[i];
      a->grad[i] += y->grad[i] * s * (1.0 - s);
    }
  };
  return y;
}

Var Graph::tanh_(const Var& a) {
  Var y = node(a->rows, a->cols);
  for (std::size_t i = 0; i < y->size(); ++i) y->val[i] = std::tanh(a->val[i]);
  y->backward = [y, a]() {
    for (std::size_t i = 0; i < y->val.size(); ++i) {
      const double t = y->val[i];
      a->grad[i] += y->grad[i] * (1.0 - t * t);
    }
  };
  return y;
}

Var Graph::concat(const Var& a, const Var& b) {
  check(a->cols == 1 && b->cols == 1, "concat: vectors only");
  Var y = node(a->rows + b->rows, 1);
  std::copy(a->val.begin(), a->val.end(), y->val.begin());
  std::copy(b->val.begin(), b->val.end(), y->val.begin() + static_cast<long>(a->rows));
  y->backward = [y, a, b]() {
    for (std::size_t i = 0; i < a->val.size(); ++i) a->grad[i] += y->grad[i];
    for (std::size_t i = 0; i < b->val.size(); ++i)
      b->grad[i] += y->grad[a->val.size() + i];
  };
  return y;
}

Var Graph::slice(const Var& a, std::size_t start, std::size_t len) {
  check(a->cols == 1 && start + len <= a->rows, "slice: out of range");
  Var y = node(len, 1);
  std::copy(a->val.begin() + static_cast<long>(start),
            a->val.begin() + static_cast<long>(start + len), y->val.begin());
  y->backward = [y, a, start]() {
    for (std::size_t i = 0; i < y->val.size(); ++i)
      a->grad[start + i] += y->grad[i];
  };
  return y;
}

Var Graph::row(const Var& matrix, std::size_t r) {
  check(r < matrix->rows, "row: index out of range");
  Var y = node(matrix->cols, 1);
  const double* src = matrix->val.data() + r * matrix->cols;
  std::copy(src, src + matrix->cols, y->val.begin());
  y->backward = [y, matrix, r]() {
    double* dst = matrix->grad.data() + r * matrix->cols;
    for (std::size_t i = 0; i < y->val.size(); ++i) dst[i] += y->grad[i];
  };
  return y;
}

Var Graph::dot(const Var& a, const Var& b) {
  check(a->size() == b->size(), "dot: size mismatch");
  Var y = node(1, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < a->size(); ++i) acc += a->val[i] * b->val[i];
  y->val[0] = acc;
  y->backward = [y, a, b]() {
    const double g = y->grad[0];
    for (std::size_t i = 0; i < a->val.size(); ++i) {
      a->grad[i] += g * b->val[i];
      b->grad[i] += g * a->val[i];
    }
  };
  return y;
}

Var Graph::softmax(const Var& a) {
  Var y = node(a->rows, a->cols);
  const double mx = *std::max_element(a->val.begin(), a->val.end());
  double z = 0.0;
  for (std::size_t i = 0; i < a->size(); ++i) z += std::exp(a->val[i] - mx);
  for (std::size_t i = 0; i < a->size(); ++i)
    y->val[i] = std::exp(a->val[i] - mx) / z;
  y->backward = [y, a]() {
    double gy = 0.0;
    for (std::size_t i = 0; i < y->val.size(); ++i)
      gy += y->grad[i] * y->val[i];
    for (std::size_t i = 0; i < y->val.size(); ++i)
      a->grad[i] += y->val[i] * (y->grad[i] - gy);
  };
  return y;
}

Var Graph::log_softmax(const Var& a) {
  Var y = node(a->rows, a->cols);
  const double mx = *std::max_element(a->val.begin(), a->val.end());
  double z = 0.0;
  for (std::size_t i = 0; i < a->size(); ++i) z += std::exp(a->val[i] - mx);
  const double logz = mx + std::log(z);
  for (std::size_t i = 0; i < a->size(); ++i) y->val[i] = a->val[i] - logz;
  y->backward = [y, a]() {
    double gsum = 0.0;
    for (double g : y->grad) gsum += g;
    for (std::size_t i = 0; i < y->val.size(); ++i)
      a->grad[i] += y->grad[i] - std::exp(y->val[i]) * gsum;
  };
  return y;
}

Var Graph::sum(const Var& a) {
  Var y = node(1, 1);
  double acc = 0.0;
  for (double v : a->val) acc += v;
  y->val[0] = acc;
  y->backward = [y, a]() {
    for (std::size_t i = 0; i < a->val.size(); ++i) a->grad[i] += y->grad[0];
  };
  return y;
}

Var Graph::nll(const Var& logp, std::size_t index) {
  check(index < logp->size(), "nll: class index out of range");
  Var y = node(1, 1);
  y->val[0] = -logp->val[index];
  y->backward = [y, logp, index]() { logp->grad[index] -= y->grad[0]; };
  return y;
}

Var Graph::kl_div(const Var& logp, const std::vector<double>& target) {
  check(target.size() == logp->size(), "kl_div: length mismatch");
  Var y = node(1, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] > 0.0)
      acc += target[i] * (std::log(target[i]) - logp->val[i]);
  }
  y->val[0] = acc;
  y->backward = [y, logp, target]() {
    const double g = y->grad[0];
    for (std::size_t i = 0; i < target.size(); ++i)
      if (target[i] > 0.0) logp->grad[i] -= g * target[i];
  };
  return y;
}

Var Graph::gather_scalars(const std::vector<Var>& scalars) {
  Var y = node(scalars.size(), 1);
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    check(scalars[i]->size() == 1, "gather_scalars: non-scalar input");
    y->val[i] = scalars[i]->val[0];
  }
  auto parents = scalars;
  y->backward = [y, parents]() {
    for (std::size_t i = 0; i < parents.size(); ++i)
      parents[i]->grad[0] += y->grad[i];
  };
  return y;
}

Var Graph::weighted_sum(const Var& weights, const std::vector<Var>& states) {
  check(weights->size() == states.size(), "weighted_sum: T mismatch");
  check(!states.empty(), "weighted_sum: empty states");
  const std::size_t d = states[0]->size();
  Var y = node(d, 1);
  for (std::size_t t = 0; t < states.size(); ++t) {
    check(states[t]->size() == d, "weighted_sum: ragged states");
    for (std::size_t j = 0; j < d; ++j)
      y->val[j] += weights->val[t] * states[t]->val[j];
  }
  auto parents = states;
  y->backward = [y, weights, parents, d]() {
    for (std::size_t t = 0; t < parents.size(); ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        acc += y->grad[j] * parents[t]->val[j];
        parents[t]->grad[j] += weights->val[t] * y->grad[j];
      }
      weights->grad[t] += acc;
    }
  };
  return y;
}

Var Graph::max_over_time(const std::vector<Var>& states) {
  check(!states.empty(), "max_over_time: T = 0");
  const std::size_t d = states[0]->size();
  Var y = node(d, 1);
  std::vector<std::size_t> arg(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    double best = states[0]->val[j];
    for (std::size_t t = 1; t < states.size(); ++t) {
      check(states[t]->size() == d, "max_over_time: ragged states");
      if (states[t]->val[j] > best) {  // first occurrence wins ties
        best = states[t]->val[j];
        arg[j] = t;
      }
    }
    y->val[j] = best;
  }
  auto parents = states;
  y->backward = [y, parents, arg]() {
    for (std::size_t j = 0; j < y->val.size(); ++j)
      parents[arg[j]]->grad[j] += y->grad[j];
  };
  return y;
}

Var Graph::mean_over_time(const std::vector<Var>& states) {
  check(!states.empty(), "mean_over_time: T = 0");
  const std::size_t d = states[0]->size();
  const double inv = 1.0 / static_cast<double>(states.size());
  Var y = node(d, 1);
  for (const auto& s : states) {
    check(s->size() == d, "mean_over_time: ragged states");
    for (std::size_t j = 0; j < d; ++j) y->val[j] += inv * s->val[j];
  }
  auto parents = states;
  y->backward = [y, parents, inv]() {
    for (const auto& s : parents)
      for (std::size_t j = 0; j < y->val.size(); ++j)
        s->grad[j] += inv * y->grad[j];
  };
  return y;
}

void Graph::backward(const Var& loss) {
  if (loss->size() != 1)
    throw std::invalid_argument("backward: loss must be scalar");
  loss->grad[0] = 1.0;
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it)
    if ((*it)->backward) (*it)->backward();
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace editgauge::nn
