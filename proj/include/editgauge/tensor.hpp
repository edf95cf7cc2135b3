#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace editgauge::nn {

// One dense value in the computation graph. Vectors are (rows, 1); matrices
// are row-major (rows, cols). grad is allocated alongside val whenever
// requires_grad is set.
struct Tensor {
  std::vector<double> val;
  std::vector<double> grad;
  std::size_t rows = 0;
  std::size_t cols = 1;
  bool requires_grad = false;
  std::string name;  // set for parameters, used in diagnostics

  std::function<void()> backward;  // empty for leaves

  std::size_t size() const { return rows * cols; }
  double& at(std::size_t r, std::size_t c) { return val[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return val[r * cols + c]; }
};

using Var = std::shared_ptr<Tensor>;

Var make_param(std::string name, std::size_t rows, std::size_t cols);
Var make_const(std::vector<double> v);

// Tape of intermediate nodes in creation order; creation order is a
// topological order, so backward() is a single reverse sweep.
class Graph {
 public:
  Var constant(std::vector<double> v);
  Var zeros(std::size_t n);

  Var affine(const Var& w, const Var& x, const Var& b);  // w:(m,n) x:(n) b:(m)
  Var matvec(const Var& w, const Var& x);
  Var add(const Var& a, const Var& b);
  Var hadamard(const Var& a, const Var& b);
  Var scale(const Var& a, double c);
  Var add_scaled(const Var& a, double ca, const Var& b, double cb);
  Var sigmoid(const Var& a);
  Var tanh_(const Var& a);
  Var concat(const Var& a, const Var& b);
  Var slice(const Var& a, std::size_t start, std::size_t len);
  Var row(const Var& matrix, std::size_t r);  // embedding lookup
  Var dot(const Var& a, const Var& b);
  Var softmax(const Var& a);
  Var log_softmax(const Var& a);
  Var sum(const Var& a);

  // -logp[index]
  Var nll(const Var& logp, std::size_t index);
  // sum_i t_i (log t_i - logp_i), 0 log 0 := 0
  Var kl_div(const Var& logp, const std::vector<double>& target);

  Var gather_scalars(const std::vector<Var>& scalars);
  Var weighted_sum(const Var& weights, const std::vector<Var>& states);
  // Per-dimension max over time, subgradient to the first argmax.
  Var max_over_time(const std::vector<Var>& states);
  Var mean_over_time(const std::vector<Var>& states);

  // Seeds d(loss)=1 and sweeps the tape backwards. loss must be scalar.
  void backward(const Var& loss);

  std::size_t size() const { return tape_.size(); }

 private:
  Var node(std::size_t rows, std::size_t cols);
  std::vector<Var> tape_;
};

bool all_finite(const std::vector<double>& v);

}  // namespace editgauge::nn
