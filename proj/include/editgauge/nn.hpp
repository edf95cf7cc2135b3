#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "editgauge/rng.hpp"
#include "editgauge/tensor.hpp"

namespace editgauge::nn {

// Named, ordered parameter registry. Iteration order is creation order so
// optimizer steps and serialization are deterministic.
class ParamStore {
 public:
  Var add(const std::string& name, std::size_t rows, std::size_t cols);
  Var get(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<Var>& all() const { return params_; }

  void zero_grad();
  double grad_norm() const;
  // Scales all gradients so the global L2 norm is at most max_norm.
  void clip_grad_norm(double max_norm);

 private:
  std::vector<Var> params_;
  std::map<std::string, std::size_t> index_;
};

// uniform(-a, a) with a = 1/sqrt(fan_in); fan_in is the column count.
void init_fanin(const Var& w, Rng& rng);
void init_uniform(const Var& w, Rng& rng, double a);

struct LstmParams {
  Var w;  // (4h, in+h), gate order i, f, o, g
  Var b;  // (4h)
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

LstmParams make_lstm(ParamStore& store, const std::string& prefix,
                     std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_zero_state(Graph& g, std::size_t hidden_dim);
LstmState lstm_cell(Graph& g, const LstmParams& p, const Var& x,
                    const LstmState& prev);

// Forward and backward passes concatenated per position: T states of size
// 2*hidden.
std::vector<Var> run_bilstm(Graph& g, const LstmParams& fw,
                            const LstmParams& bw,
                            const std::vector<Var>& inputs);

// Standalone loss helpers (no graph) for evaluation paths.
double kl_div_loss(const std::vector<double>& pred_logprobs,
                   const std::vector<double>& target_probs);
double cross_entropy_loss(const std::vector<double>& pred_logprobs,
                          std::size_t gold_class);

class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  // One update over the given parameters; gradients must be finite
  // (NumericError names the offending parameter otherwise).
  void step(const std::vector<Var>& params);
  std::int64_t step_count() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::map<const Tensor*, std::pair<std::vector<double>, std::vector<double>>>
      state_;
};

// Central finite differences on a sampled coordinate subset of each
// parameter; returns the max relative error against the analytic gradient.
// Relative error is 0 when both sides are below 1e-12.
double grad_check(const std::function<Var(Graph&)>& f,
                  const std::vector<Var>& params, double eps = 1e-5,
                  std::size_t max_coords_per_param = 24,
                  std::uint64_t seed = 12345);

}  // namespace editgauge::nn
