#include <cmath>

#include "doctest.h"
#include "editgauge/nn.hpp"
#include "editgauge/rng.hpp"
#include "editgauge/tensor.hpp"

using namespace editgauge;
using namespace editgauge::nn;

namespace {

Var randomized(const std::string& name, std::size_t rows, std::size_t cols,
               Rng& rng, double a = 0.8) {
  Var p = make_param(name, rows, cols);
  init_uniform(p, rng, a);
  return p;
}

}  // namespace

TEST_CASE("affine forward matches a hand computation") {
  Graph g;
  Var w = make_param("w", 2, 3);
  w->val = {1, 2, 3, 4, 5, 6};
  Var b = make_param("b", 2, 1);
  b->val = {0.5, -0.5};
  Var x = g.constant({1, 0, -1});
  Var y = g.affine(w, x, b);
  CHECK(y->val[0] == doctest::Approx(1 - 3 + 0.5));
  CHECK(y->val[1] == doctest::Approx(4 - 6 - 0.5));
}

TEST_CASE("elementwise op gradients at 1e-6") {
  Rng rng(3);
  Var w = randomized("w", 4, 3, rng);
  Var b = randomized("b", 4, 1, rng);
  Var v = randomized("v", 4, 1, rng);

  // linear layer + squared-ish loss: sum(hadamard(y, y))
  auto f = [&](Graph& g) {
    Var y = g.affine(w, g.constant({0.3, -0.2, 0.9}), b);
    return g.sum(g.hadamard(y, y));
  };
  CHECK(grad_check(f, {w, b}, 1e-5, 64) < 1e-6);

  auto f2 = [&](Graph& g) {
    Var y = g.add_scaled(g.sigmoid(v), 0.7, g.tanh_(v), 0.3);
    return g.dot(y, y);
  };
  CHECK(grad_check(f2, {v}, 1e-5, 64) < 1e-4);
}

TEST_CASE("embedding row gradient at 1e-6") {
  Rng rng(4);
  Var e = randomized("e", 5, 3, rng);
  auto f = [&](Graph& g) {
    Var r0 = g.row(e, 0);
    Var r3 = g.row(e, 3);
    return g.dot(r0, r3);
  };
  CHECK(grad_check(f, {e}, 1e-5, 64) < 1e-6);
}

TEST_CASE("concat and slice gradients") {
  Rng rng(5);
  Var a = randomized("a", 3, 1, rng);
  Var b = randomized("b", 2, 1, rng);
  auto f = [&](Graph& g) {
    Var c = g.concat(a, b);
    Var s = g.slice(c, 1, 3);
    return g.dot(s, s);
  };
  CHECK(grad_check(f, {a, b}, 1e-5, 64) < 1e-6);
}

TEST_CASE("softmax outputs a distribution and is grad-correct") {
  Rng rng(6);
  Var x = randomized("x", 5, 1, rng, 2.0);
  {
    Graph g;
    Var y = g.softmax(x);
    double sum = 0;
    for (double v : y->val) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  Var t = randomized("t", 5, 1, rng);
  auto f = [&](Graph& g) { return g.dot(g.softmax(x), t); };
  CHECK(grad_check(f, {x}, 1e-5, 64) < 1e-4);
}

TEST_CASE("log_softmax is translation invariant") {
  Graph g;
  Var x = g.constant({0.1, -2.0, 3.0, 0.7});
  Var y1 = g.log_softmax(x);
  Var shifted = g.constant({0.1 + 5.0, -2.0 + 5.0, 3.0 + 5.0, 0.7 + 5.0});
  Var y2 = g.log_softmax(shifted);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(y1->val[i] == doctest::Approx(y2->val[i]).epsilon(1e-9));
  double sum = 0;
  for (double v : y1->val) sum += std::exp(v);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("log_softmax + nll gradient") {
  Rng rng(7);
  Var x = randomized("x", 6, 1, rng, 2.0);
  auto f = [&](Graph& g) { return g.nll(g.log_softmax(x), 2); };
  CHECK(grad_check(f, {x}, 1e-5, 64) < 1e-4);
}

TEST_CASE("kl_div gradient and value") {
  Rng rng(8);
  Var x = randomized("x", 6, 1, rng, 1.5);
  const std::vector<double> target = {0.1, 0.2, 0.0, 0.3, 0.25, 0.15};
  auto f = [&](Graph& g) { return g.kl_div(g.log_softmax(x), target); };
  CHECK(grad_check(f, {x}, 1e-5, 64) < 1e-4);
}

TEST_CASE("weighted_sum and gather gradients") {
  Rng rng(9);
  Var s1 = randomized("s1", 4, 1, rng);
  Var s2 = randomized("s2", 4, 1, rng);
  Var s3 = randomized("s3", 4, 1, rng);
  Var q = randomized("q", 4, 1, rng);
  auto f = [&](Graph& g) {
    std::vector<Var> states = {s1, s2, s3};
    std::vector<Var> scores;
    for (const auto& s : states) scores.push_back(g.dot(s, q));
    Var w = g.softmax(g.gather_scalars(scores));
    Var ctx = g.weighted_sum(w, states);
    return g.dot(ctx, ctx);
  };
  CHECK(grad_check(f, {s1, s2, s3, q}, 1e-5, 64) < 1e-4);
}

TEST_CASE("max_over_time picks per-dimension maxima") {
  Graph g;
  Var r1 = g.constant({1, 5});
  Var r2 = g.constant({3, 2});
  Var m = g.max_over_time({r1, r2});
  CHECK(m->val[0] == 3);
  CHECK(m->val[1] == 5);

  Var same = g.max_over_time({r1, r1});
  CHECK(same->val[0] == 1);
  CHECK(same->val[1] == 5);
}

TEST_CASE("max_over_time routes gradient to the first argmax on ties") {
  Graph g;
  Var a = make_param("a", 2, 1);
  a->val = {2.0, 2.0};
  Var b = make_param("b", 2, 1);
  b->val = {2.0, 1.0};
  Var m = g.max_over_time({g.add(a, g.zeros(2)), g.add(b, g.zeros(2))});
  Var loss = g.sum(m);
  g.backward(loss);
  CHECK(a->grad[0] == 1.0);  // tie at dim 0: first occurrence wins
  CHECK(b->grad[0] == 0.0);
  CHECK(a->grad[1] == 1.0);
  CHECK(b->grad[1] == 0.0);
}

TEST_CASE("max/mean pooling gradients (tie-free)") {
  Rng rng(10);
  Var s1 = randomized("s1", 5, 1, rng);
  Var s2 = randomized("s2", 5, 1, rng);
  Var s3 = randomized("s3", 5, 1, rng);
  auto fmax = [&](Graph& g) {
    return g.sum(g.max_over_time({s1, s2, s3}));
  };
  CHECK(grad_check(fmax, {s1, s2, s3}, 1e-5, 64) < 1e-4);
  auto fmean = [&](Graph& g) {
    return g.dot(g.mean_over_time({s1, s2, s3}), s1);
  };
  CHECK(grad_check(fmean, {s1, s2, s3}, 1e-5, 64) < 1e-4);
}

TEST_CASE("max_over_time rejects an empty sequence") {
  Graph g;
  CHECK_THROWS(g.max_over_time({}));
}

TEST_CASE("dimension mismatches are rejected") {
  Graph g;
  Var w = make_param("w", 2, 3);
  CHECK_THROWS(g.affine(w, g.zeros(2), g.zeros(2)));
  CHECK_THROWS(g.add(g.zeros(2), g.zeros(3)));
  CHECK_THROWS(g.nll(g.zeros(3), 5));
  CHECK_THROWS(g.kl_div(g.zeros(3), {0.5, 0.5}));
}

TEST_CASE("grad_check returns 0 for a constant function") {
  Var p = make_param("p", 3, 1);
  auto f = [&](Graph& g) { return g.constant({1.0}); };
  CHECK(grad_check(f, {p}) == 0.0);
}
