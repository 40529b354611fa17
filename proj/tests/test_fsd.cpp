// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstring>
#include <limits>

#include "doctest.h"
#include "fracprop/error.hpp"
#include "fracprop/fsd.hpp"
#include "support.hpp"

using namespace fracprop;
using namespace fracprop::test;

namespace {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

FsdConfig tight(double gamma, double lambda) {
  FsdConfig cfg;
  cfg.gamma = gamma;
  cfg.lambda = lambda;
  cfg.iterations = 500;
  cfg.convergence_tol = 1e-12;
  return cfg;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Mask row_mask(Index n, Index f, const std::vector<Index>& missing_rows) {
  Mask m(n, f);
  for (Index i : missing_rows) {
    for (Index l = 0; l < f; ++l) m.set(i, l, false);
  }
  return m;
}

}  // namespace

TEST_CASE("fully observed input comes back bit for bit") {
  Rng rng(1);
  const Graph g = random_connected_graph(20, 0.1, rng);
  const FeatureMatrix x = FeatureMatrix::Random(20, 3);
  FsdConfig cfg;
  cfg.gamma = 1.4;
  cfg.lambda = 0.3;
  const FeatureMatrix out = fsd_impute(g, sym_normalize(g), x, Mask(20, 3), cfg);
  CHECK(out == x);
}

TEST_CASE("path with a missing middle node") {
  const Graph g = path_graph(3);
  FeatureMatrix x(3, 1);
  x << 1.0, 123.0, 0.0;
  FsdConfig cfg;
  const FeatureMatrix out = fsd_impute(g, sym_normalize(g), x, row_mask(3, 1, {1}), cfg);
  CHECK(out(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out(0, 0) == 1.0);
  CHECK(out(2, 0) == 0.0);
}

TEST_CASE("star with a missing centre takes the neighbour average") {
  const Graph g = star_graph(4);
  FeatureMatrix x(5, 1);
  x << 0.0, 1.0, 2.0, 3.0, 4.0;
  const FeatureMatrix out = fsd_impute(g, sym_normalize(g), x, row_mask(5, 1, {0}), FsdConfig{});
  CHECK(out(0, 0) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("layer_iterate converges to the dense fixed point") {
  Rng rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    const Index n = 5 + static_cast<Index>(rng.below(46));
    const Graph g = random_connected_graph(n, 0.08, rng);
    const auto adj = sym_normalize(g);
    const auto view = SubgraphView::full(g);
    ChannelState state;
    state.values.resize(n);
    state.previous.resize(n);
    state.observed.resize(n);
    std::vector<bool> observed(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      observed[i] = state.observed[i] = rng.bernoulli(0.3) || i == 0;
      state.values[i] = rng.normal();
      state.previous[i] = rng.normal();
    }
    for (double gamma : {0.6, 1.0, 1.4, 2.8}) {
      for (double lambda : {0.0, 0.2}) {
        const FracOperator op = build_fractional(view, adj, gamma);
        const LayerResult r = layer_iterate(view, op, state, tight(gamma, lambda));
        const Eigen::MatrixXd w = op.weights();
        const VectorXd want = dense_fixed_point(w, state.values, observed, state.previous, lambda);
        CHECK((r.values - want).cwiseAbs().maxCoeff() <= 1e-6);
        for (Index i = 0; i < n; ++i) {
          if (observed[i]) CHECK(bit_equal(r.values[i], state.values[i]));
        }
      }
    }
  }
}

TEST_CASE("K = 1 applies exactly one update") {
  const Graph g = path_graph(4);
  const auto adj = sym_normalize(g);
  const auto view = SubgraphView::full(g);
  const FracOperator op = build_fractional(view, adj, 1.0);
  ChannelState state;
  state.values = (VectorXd(4) << 1.0, 5.0, 7.0, 2.0).finished();
  state.previous = (VectorXd(4) << 0.0, 1.0, 1.0, 0.0).finished();
  state.observed = (BoolArray(4) << true, false, false, true).finished();
  FsdConfig cfg;
  cfg.lambda = 0.5;
  cfg.iterations = 1;
  const LayerResult r = layer_iterate(view, op, state, cfg);
  CHECK(r.iterations == 1);
  // Interior nodes of a path weigh both neighbours equally (degrees 1, 2, 2, 1).
  const double w01 = 1.0 / std::sqrt(2.0) / (1.0 / std::sqrt(2.0) + 0.5);
  CHECK(r.values[1] == doctest::Approx(w01 * 1.0 + (1 - w01) * 7.0 + 0.5));
  CHECK(r.values[2] == doctest::Approx((1 - w01) * 5.0 + w01 * 2.0 + 0.5));
  CHECK(r.values[0] == 1.0);
  CHECK(r.values[3] == 2.0);
}

TEST_CASE("lambda = 0 on a view is plain masked diffusion") {
  Rng rng(3);
  const Graph g = random_connected_graph(25, 0.1, rng);
  const auto adj = sym_normalize(g);
  const auto view = SubgraphView::full(g);
  const FracOperator op = build_fractional(view, adj, 1.2);
  ChannelState state;
  state.values = VectorXd::Random(25);
  state.previous = VectorXd::Random(25);
  state.observed = BoolArray::Constant(25, false);
  state.observed.head(5).setConstant(true);
  FsdConfig cfg;
  cfg.iterations = 7;
  cfg.convergence_tol = 1e-300;
  const LayerResult r = layer_iterate(view, op, state, cfg);
  VectorXd x = state.values;
  for (int t = 0; t < 7; ++t) {
    const VectorXd next = apply(op, x);
    x = state.observed.select(state.values, next);
  }
  CHECK((r.values - x).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("components without observed nodes are skipped") {
  // Two components in the view; only the first has an observed node.
  const Graph g = make_graph(5, {{0, 1}, {3, 4}});
  const SubgraphView view(g, {0, 1, 3, 4});
  const auto adj = sym_normalize(make_graph(5, {{0, 1}, {3, 4}, {2, 0}}));
  const FracOperator op = build_fractional(view, adj, 1.0);
  ChannelState state;
  state.values = (VectorXd(4) << 3.0, 0.0, 9.0, 9.0).finished();
  state.previous = VectorXd::Zero(4);
  state.observed = (BoolArray(4) << true, false, false, false).finished();
  const LayerResult r = layer_iterate(view, op, state, FsdConfig{});
  CHECK(r.skipped_components == 1);
  CHECK(r.values[1] == doctest::Approx(3.0));
  CHECK(r.values[2] == 9.0);
  CHECK(r.values[3] == 9.0);
}

TEST_CASE("full FSD with lambda = 0 reaches the FP fixed point") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 6 + static_cast<Index>(rng.below(45));
    const Graph g = random_connected_graph(n, 0.06, rng);
    const auto adj = sym_normalize(g);
    const FeatureMatrix x = FeatureMatrix::Random(n, 3);
    const Mask mask = generate_uniform_mask(n, 3, 0.6, static_cast<std::uint64_t>(trial));
    FsdConfig cfg = tight(1.0, 0.0);
    cfg.iterations = 20000;
    const FeatureMatrix fsd = fsd_impute(g, adj, x, mask, cfg);
    const FeatureMatrix fp = fp_baseline(g, adj, x, mask, 20000, 1e-13);
    for (Index l = 0; l < 3; ++l) {
      if ((mask.bits().col(l) == 0).all()) continue;
      CHECK((fsd.col(l) - fp.col(l)).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("observed entries stay bit-identical and masked input is never read") {
  Rng rng(5);
  const Graph g = random_connected_graph(60, 0.05, rng);
  FeatureMatrix x = FeatureMatrix::Random(60, 4);
  const Mask mask = generate_uniform_mask(60, 4, 0.8, 9);
  FeatureMatrix poisoned = x;
  for (Index i = 0; i < 60; ++i) {
    for (Index l = 0; l < 4; ++l) {
      if (!mask.observed(i, l)) poisoned(i, l) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  FsdConfig cfg;
  cfg.gamma = 1.6;
  cfg.lambda = 0.2;
  const FeatureMatrix a = fsd_impute(g, sym_normalize(g), x, mask, cfg);
  const FeatureMatrix b = fsd_impute(g, sym_normalize(g), poisoned, mask, cfg);
  CHECK(a.cwiseEqual(b).all());
  for (Index i = 0; i < 60; ++i) {
    for (Index l = 0; l < 4; ++l) {
      if (mask.observed(i, l)) CHECK(bit_equal(a(i, l), x(i, l)));
    }
  }
}

TEST_CASE("NaN in an observed entry is a numeric error") {
  const Graph g = path_graph(3);
  FeatureMatrix x = FeatureMatrix::Ones(3, 1);
  x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fsd_impute(g, sym_normalize(g), x, row_mask(3, 1, {1}), FsdConfig{}),
                  NumericError);
  CHECK_THROWS_AS(fp_baseline(g, sym_normalize(g), x, row_mask(3, 1, {1})), NumericError);
}

TEST_CASE("empty channels and unreachable nodes") {
  const Graph g = make_graph(5, {{0, 1}, {1, 2}, {3, 4}});
  FeatureMatrix x = FeatureMatrix::Constant(5, 2, 2.0);
  Mask mask(5, 2);
  for (Index i = 0; i < 5; ++i) mask.set(i, 1, false);
  for (Index i : {1, 2, 3, 4}) mask.set(i, 0, false);
  FsdReport report;
  const FeatureMatrix out = fsd_impute(g, sym_normalize(g), x, mask, FsdConfig{}, &report);
  CHECK(out.col(1).isZero());
  CHECK(report.empty_channels == std::vector<Index>{1});
  CHECK(report.channels[1].no_observed);
  CHECK(report.channels[0].unreachable == 2);
  CHECK(out(1, 0) == doctest::Approx(2.0));
  CHECK(out(2, 0) == doctest::Approx(2.0));
  CHECK(out(3, 0) == 0.0);
  CHECK(out(4, 0) == 0.0);
}

TEST_CASE("max_layers leaves far nodes uncovered") {
  const Graph g = path_graph(6);
  FeatureMatrix x = FeatureMatrix::Constant(6, 1, 1.0);
  const Mask mask = row_mask(6, 1, {1, 2, 3, 4, 5});
  FsdConfig cfg;
  cfg.max_layers = 2;
  ChannelDiagnostics diag;
  const BoolArray observed = mask.bits().col(0) != 0;
  const VectorXd out = fsd_impute_channel(g, sym_normalize(g), x.col(0), observed, cfg, &diag);
  CHECK(diag.layers == 3);
  CHECK(diag.uncovered == 3);
  CHECK(out[2] == doctest::Approx(1.0));
  CHECK(out[3] == 0.0);
}

TEST_CASE("coverage of nonzero values grows with the layer") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = random_connected_graph(40, 0.03, rng);
    VectorXd x = VectorXd::Zero(40);
    BoolArray observed = BoolArray::Constant(40, false);
    for (Index i = 0; i < 40; ++i) {
      if (rng.bernoulli(0.1)) {
        observed[i] = true;
        x[i] = 0.5 + rng.uniform();
      }
    }
    if (!observed.any()) continue;
    std::vector<VectorXd> trace;
    FsdConfig cfg;
    cfg.lambda = 0.2;
    fsd_impute_channel(g, sym_normalize(g), x, observed, cfg, nullptr, &trace);
    Index previous = 0;
    for (const VectorXd& layer : trace) {
      const Index nonzero = (layer.array() != 0.0).count();
      CHECK(nonzero >= previous);
      previous = nonzero;
    }
    CHECK(previous == 40);
  }
}

TEST_CASE("thread count does not change the result") {
  Rng rng(77);
  const Graph g = random_connected_graph(80, 0.04, rng);
  const FeatureMatrix x = FeatureMatrix::Random(80, 12);
  for (const Mask& mask : {generate_uniform_mask(80, 12, 0.7, 3),
                           generate_structural_mask(80, 12, 0.7, 3)}) {
    FsdConfig one;
    one.gamma = 1.3;
    one.lambda = 0.1;
    FsdConfig many = one;
    many.threads = 4;
    FsdReport report;
    const FeatureMatrix a = fsd_impute(g, sym_normalize(g), x, mask, one);
    const FeatureMatrix b = fsd_impute(g, sym_normalize(g), x, mask, many, &report);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
    CHECK(report.channels.size() == 12);
  }
}

TEST_CASE("structural masks share one layer schedule") {
  Rng rng(2);
  const Graph g = random_connected_graph(30, 0.1, rng);
  FsdReport report;
  fsd_impute(g, sym_normalize(g), FeatureMatrix::Random(30, 6),
             generate_structural_mask(30, 6, 0.5, 1), FsdConfig{}, &report);
  CHECK(report.observed_set_groups == 1);
}

TEST_CASE("config validation") {
  FsdConfig cfg;
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FsdConfig{};
  cfg.lambda = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FsdConfig{};
  cfg.convergence_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FsdConfig{};
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("fp_baseline examples") {
  Rng rng(6);
  const Graph g = random_connected_graph(20, 0.1, rng);
  const auto adj = sym_normalize(g);
  const FeatureMatrix x = FeatureMatrix::Random(20, 2);
  CHECK(fp_baseline(g, adj, x, Mask(20, 2)) == x);

  FeatureMatrix single = FeatureMatrix::Zero(20, 1);
  single(4, 0) = 3.25;
  Mask one(20, 1, false);
  one.set(4, 0, true);
  IterationStats stats;
  const FeatureMatrix out = fp_baseline(g, adj, single, one, 5000, 1e-13, &stats);
  CHECK((out.array() - 3.25).abs().maxCoeff() <= 1e-9);
  CHECK(stats.iterations < 5000);
}
