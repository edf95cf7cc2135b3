#include "editgauge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "editgauge/errors.hpp"

namespace editgauge::nn {

Var ParamStore::add(const std::string& name, std::size_t rows,
                    std::size_t cols) {
  if (index_.count(name))
    throw std::invalid_argument("duplicate parameter: " + name);
  Var p = make_param(name, rows, cols);
  index_[name] = params_.size();
  params_.push_back(p);
  return p;
}

Var ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::invalid_argument("unknown parameter: " + name);
  return params_[it->second];
}

bool ParamStore::has(const std::string& name) const {
  return index_.count(name) != 0;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

double ParamStore::grad_norm() const {
  double acc = 0.0;
  for (const auto& p : params_)
    for (double g : p->grad) acc += g * g;
  return std::sqrt(acc);
}

void ParamStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm <= max_norm || norm == 0.0) return;
  const double s = max_norm / norm;
  for (auto& p : params_)
    for (double& g : p->grad) g *= s;
}

void init_uniform(const Var& w, Rng& rng, double a) {
  for (double& v : w->val) v = rng.symmetric(a);
}

void init_fanin(const Var& w, Rng& rng) {
  init_uniform(w, rng, 1.0 / std::sqrt(static_cast<double>(w->cols)));
}

LstmParams make_lstm(ParamStore& store, const std::string& prefix,
                     std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w = store.add(prefix + ".w", 4 * hidden_dim, input_dim + hidden_dim);
  p.b = store.add(prefix + ".b", 4 * hidden_dim, 1);
  init_fanin(p.w, rng);
  return p;
}

LstmState lstm_zero_state(Graph& g, std::size_t hidden_dim) {
  return {g.zeros(hidden_dim), g.zeros(hidden_dim)};
}

LstmState lstm_cell(Graph& g, const LstmParams& p, const Var& x,
                    const LstmState& prev) {
  if (x->size() != p.input_dim)
    throw std::invalid_argument("lstm_cell: input dimension mismatch");
  if (prev.h->size() != p.hidden_dim || prev.c->size() != p.hidden_dim)
    throw std::invalid_argument("lstm_cell: state dimension mismatch");
  const std::size_t h = p.hidden_dim;
  Var z = g.affine(p.w, g.concat(x, prev.h), p.b);
  Var i = g.sigmoid(g.slice(z, 0, h));
  Var f = g.sigmoid(g.slice(z, h, h));
  Var o = g.sigmoid(g.slice(z, 2 * h, h));
  Var gg = g.tanh_(g.slice(z, 3 * h, h));
  Var c = g.add(g.hadamard(f, prev.c), g.hadamard(i, gg));
  Var hh = g.hadamard(o, g.tanh_(c));
  return {hh, c};
}

std::vector<Var> run_bilstm(Graph& g, const LstmParams& fw,
                            const LstmParams& bw,
                            const std::vector<Var>& inputs) {
  const std::size_t T = inputs.size();
  std::vector<Var> fwd(T), rev(T);
  LstmState s = lstm_zero_state(g, fw.hidden_dim);
  for (std::size_t t = 0; t < T; ++t) {
    s = lstm_cell(g, fw, inputs[t], s);
    fwd[t] = s.h;
  }
  s = lstm_zero_state(g, bw.hidden_dim);
  for (std::size_t t = T; t-- > 0;) {
    s = lstm_cell(g, bw, inputs[t], s);
    rev[t] = s.h;
  }
  std::vector<Var> states(T);
  for (std::size_t t = 0; t < T; ++t) states[t] = g.concat(fwd[t], rev[t]);
  return states;
}

double kl_div_loss(const std::vector<double>& pred_logprobs,
                   const std::vector<double>& target_probs) {
  if (pred_logprobs.size() != target_probs.size())
    throw std::invalid_argument("kl_div_loss: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < target_probs.size(); ++i)
    if (target_probs[i] > 0.0)
      acc += target_probs[i] * (std::log(target_probs[i]) - pred_logprobs[i]);
  return acc;
}

double cross_entropy_loss(const std::vector<double>& pred_logprobs,
                          std::size_t gold_class) {
  if (gold_class >= pred_logprobs.size())
    throw std::invalid_argument("cross_entropy_loss: class index out of range");
  return -pred_logprobs[gold_class];
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(const std::vector<Var>& params) {
  for (const auto& p : params)
    if (!all_finite(p->grad))
      throw NumericError("non-finite gradient in parameter '" + p->name + "'");

  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto& p : params) {
    auto& [m, v] = state_[p.get()];
    if (m.empty()) {
      m.assign(p->size(), 0.0);
      v.assign(p->size(), 0.0);
    }
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = p->grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p->val[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
    if (!all_finite(p->val))
      throw NumericError("non-finite value in parameter '" + p->name +
                         "' after update");
  }
}

double grad_check(const std::function<Var(Graph&)>& f,
                  const std::vector<Var>& params, double eps,
                  std::size_t max_coords_per_param, std::uint64_t seed) {
  for (const auto& p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0);

  std::vector<std::vector<double>> analytic;
  {
    Graph g;
    Var loss = f(g);
    g.backward(loss);
    for (const auto& p : params) analytic.push_back(p->grad);
  }

  auto value = [&]() {
    Graph g;
    return f(g)->val[0];
  };

  Rng rng(seed);
  double max_rel = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Var& p = params[pi];
    std::vector<std::size_t> coords;
    if (p->size() <= max_coords_per_param) {
      for (std::size_t i = 0; i < p->size(); ++i) coords.push_back(i);
    } else {
      for (std::size_t k = 0; k < max_coords_per_param; ++k)
        coords.push_back(static_cast<std::size_t>(rng.below(p->size())));
    }
    for (std::size_t i : coords) {
      const double orig = p->val[i];
      p->val[i] = orig + eps;
      const double fp = value();
      p->val[i] = orig - eps;
      const double fm = value();
      p->val[i] = orig;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[pi][i];
      if (std::abs(a) < 1e-12 && std::abs(numeric) < 1e-12) continue;
      // Central differences in double precision carry ~|f|*ulp/eps of
      // roundoff, so gradients under the floor are compared absolutely.
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace editgauge::nn
