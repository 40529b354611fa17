// SPDX-License-Identifier: Apache-2.0
#include "fracprop/fsd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "fracprop/error.hpp"
#include "parallel.hpp"

namespace fracprop {

void FsdConfig::validate() const {
  check_gamma(gamma);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (iterations < 1) throw ConfigError("iterations (K) must be >= 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
  if (max_layers && *max_layers < 0) throw ConfigError("max_layers must be >= 0");
}

LayerResult layer_iterate(const SubgraphView& view, const FracOperator& op,
                          const ChannelState& state, const FsdConfig& cfg) {
  const Index size = view.size();
  if (op.size() != size || state.values.size() != size ||
      state.previous.size() != size || state.observed.size() != size) {
    throw ShapeError("layer_iterate: state does not match the view");
  }
  const SparseRowMatrix& w = op.weights();
  const Index* outer = w.outerIndexPtr();
  const Index* inner = w.innerIndexPtr();
  const double* weight = w.valuePtr();

  LayerResult result;
  result.values = state.values;
  VectorXd& x = result.values;
  std::vector<double> next;
  std::vector<Index> missing;

  for (const auto& component : view.components()) {
    missing.clear();
    bool anchored = false;
    for (Index r : component) {
      if (state.observed[r]) anchored = true;
      else missing.push_back(r);
    }
    if (!anchored) {
      ++result.skipped_components;
      continue;
    }
    if (missing.empty()) continue;

    next.resize(missing.size());
    Index t = 0;
    double delta = 0.0;
    while (t < cfg.iterations) {
      ++t;
      delta = 0.0;
      for (std::size_t k = 0; k < missing.size(); ++k) {
        const Index r = missing[k];
        double s = 0.0;
        for (Index e = outer[r]; e < outer[r + 1]; ++e) s += weight[e] * x[inner[e]];
        next[k] = s + cfg.lambda * state.previous[r];
        delta = std::max(delta, std::abs(next[k] - x[r]));
      }
      for (std::size_t k = 0; k < missing.size(); ++k) x[missing[k]] = next[k];
      if (delta < cfg.convergence_tol) break;
    }
    result.iterations = std::max(result.iterations, t);
    result.residual = std::max(result.residual, delta);
  }
  return result;
}

namespace {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct LayerPlan {
  SubgraphView view;
  std::optional<FracOperator> op;  // unset when every member is observed
};

// Layer views and operators for one observed set; shared by every channel
// that has exactly this set.
struct LayerSchedule {
  std::vector<LayerPlan> layers;
  Index unreachable = 0;
  Index uncovered = 0;
};

LayerSchedule plan_layers(const Graph& g, const NormalizedAdjacency& adj,
                          const BoolArray& observed, const FsdConfig& cfg) {
  const Index n = g.num_nodes();
  std::vector<Index> seeds;
  for (Index v = 0; v < n; ++v) {
    if (observed[v]) seeds.push_back(v);
  }
  LayerSchedule schedule;
  const auto dist = bfs_distance_to_set(g, seeds);

  Index eccentricity = 0;
  for (Index d : dist) {
    if (d == kUnreachable) ++schedule.unreachable;
    else eccentricity = std::max(eccentricity, d);
  }
  const Index last = cfg.max_layers ? std::min(*cfg.max_layers, eccentricity) : eccentricity;

  std::vector<std::vector<Index>> by_distance(static_cast<std::size_t>(last) + 1);
  for (Index v = 0; v < n; ++v) {
    if (dist[v] == kUnreachable) continue;
    if (dist[v] > last) ++schedule.uncovered;
    else by_distance[dist[v]].push_back(v);
  }

  std::vector<Index> members;
  for (Index m = 0; m <= last; ++m) {
    members.insert(members.end(), by_distance[m].begin(), by_distance[m].end());
    SubgraphView view(g, members);
    std::optional<FracOperator> op;
    if (m > 0) op.emplace(build_fractional(view, adj, cfg.gamma, cfg.degrees));
    schedule.layers.push_back(LayerPlan{std::move(view), std::move(op)});
  }
  return schedule;
}

VectorXd run_channel(const LayerSchedule& schedule, Index channel,
                     const Eigen::Ref<const VectorXd>& x, const BoolArray& observed,
                     const FsdConfig& cfg, ChannelDiagnostics* diagnostics,
                     std::vector<VectorXd>* layer_trace) {
  const Index n = x.size();
  VectorXd full = VectorXd::Zero(n);
  for (Index v = 0; v < n; ++v) {
    if (observed[v]) full[v] = x[v];
  }

  ChannelDiagnostics diag;
  diag.channel = channel;
  diag.unreachable = schedule.unreachable;
  diag.uncovered = schedule.uncovered;

  for (std::size_t m = 0; m < schedule.layers.size(); ++m) {
    const LayerPlan& layer = schedule.layers[m];
    ++diag.layers;
    if (layer.op) {
      const SubgraphView& view = layer.view;
      ChannelState state;
      state.channel = channel;
      state.layer = static_cast<Index>(m);
      state.values.resize(view.size());
      state.observed.resize(view.size());
      for (Index i = 0; i < view.size(); ++i) {
        state.values[i] = full[view.global(i)];
        state.observed[i] = observed[view.global(i)];
      }
      // `full` holds the previous layer's result and zero for new members,
      // which is both the warm start and the retention input.
      state.previous = state.values;

      LayerResult result = layer_iterate(view, *layer.op, state, cfg);
      for (Index i = 0; i < view.size(); ++i) {
        if (!state.observed[i]) full[view.global(i)] = result.values[i];
      }
      diag.iterations += result.iterations;
      diag.residual = result.residual;
    }
    if (layer_trace) layer_trace->push_back(full);
  }
  if (diagnostics) *diagnostics = diag;
  return full;
}

void require_observed_finite(const FeatureMatrix& x, const Mask& mask) {
  for (Index l = 0; l < x.cols(); ++l) {
    for (Index i = 0; i < x.rows(); ++i) {
      if (mask.observed(i, l) && !std::isfinite(x(i, l))) {
        throw NumericError("observed feature (" + std::to_string(i) + ", " +
                           std::to_string(l) + ") is not finite");
      }
    }
  }
}

}  // namespace

VectorXd fsd_impute_channel(const Graph& g, const NormalizedAdjacency& adj,
                            const Eigen::Ref<const VectorXd>& x, const BoolArray& observed,
                            const FsdConfig& cfg, ChannelDiagnostics* diagnostics,
                            std::vector<VectorXd>* layer_trace) {
  cfg.validate();
  if (x.size() != g.num_nodes() || observed.size() != g.num_nodes()) {
    throw ShapeError("fsd_impute_channel: vector length does not match the graph");
  }
  if (!observed.any()) {
    if (diagnostics) {
      *diagnostics = ChannelDiagnostics{};
      diagnostics->no_observed = true;
      diagnostics->unreachable = g.num_nodes();
    }
    return VectorXd::Zero(g.num_nodes());
  }
  const LayerSchedule schedule = plan_layers(g, adj, observed, cfg);
  return run_channel(schedule, 0, x, observed, cfg, diagnostics, layer_trace);
}

FeatureMatrix fsd_impute(const Graph& g, const NormalizedAdjacency& adj,
                         const FeatureMatrix& x, const Mask& mask,
                         const FsdConfig& cfg, FsdReport* report) {
  cfg.validate();
  if (x.rows() != g.num_nodes() || mask.rows() != x.rows() || mask.cols() != x.cols()) {
    throw ShapeError("fsd_impute: features, mask and graph disagree in shape");
  }
  require_observed_finite(x, mask);

  const Index n = x.rows();
  const Index channels = x.cols();
  FeatureMatrix out = FeatureMatrix::Zero(n, channels);
  std::vector<ChannelDiagnostics> diagnostics(static_cast<std::size_t>(channels));

  // Group channels by observed set so each set is planned once.
  std::map<std::vector<std::uint8_t>, std::vector<Index>> groups_by_set;
  std::vector<Index> empty_channels;
  for (Index l = 0; l < channels; ++l) {
    std::vector<std::uint8_t> key(mask.bits().col(l).data(), mask.bits().col(l).data() + n);
    if (std::find(key.begin(), key.end(), 1) == key.end()) {
      empty_channels.push_back(l);
      diagnostics[l].channel = l;
      diagnostics[l].no_observed = true;
      diagnostics[l].unreachable = n;
      continue;
    }
    groups_by_set[std::move(key)].push_back(l);
  }
  std::vector<std::vector<Index>> groups;
  for (auto& [key, members] : groups_by_set) groups.push_back(std::move(members));
  std::sort(groups.begin(), groups.end());

  auto run_group_channel = [&](const LayerSchedule& schedule, const BoolArray& observed,
                               Index l) {
    out.col(l) = run_channel(schedule, l, x.col(l), observed, cfg, &diagnostics[l], nullptr);
  };
  auto observed_of = [&](Index l) -> BoolArray { return mask.bits().col(l) != 0; };

  if (groups.size() == 1) {
    const auto& members = groups.front();
    const BoolArray observed = observed_of(members.front());
    const LayerSchedule schedule = plan_layers(g, adj, observed, cfg);
    detail::parallel_for(static_cast<Index>(members.size()), cfg.threads,
                         [&](Index k) { run_group_channel(schedule, observed, members[k]); });
  } else {
    detail::parallel_for(static_cast<Index>(groups.size()), cfg.threads, [&](Index k) {
      const auto& members = groups[k];
      const BoolArray observed = observed_of(members.front());
      const LayerSchedule schedule = plan_layers(g, adj, observed, cfg);
      for (Index l : members) run_group_channel(schedule, observed, l);
    });
  }

  if (report) {
    report->channels = std::move(diagnostics);
    report->empty_channels = std::move(empty_channels);
    report->observed_set_groups = static_cast<Index>(groups.size());
  }
  return out;
}

FeatureMatrix fp_baseline(const Graph& g, const NormalizedAdjacency& adj,
                          const FeatureMatrix& x, const Mask& mask, Index iterations,
                          double convergence_tol, IterationStats* stats) {
  if (iterations < 1) throw ConfigError("iterations (K) must be >= 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
  if (x.rows() != g.num_nodes() || mask.rows() != x.rows() || mask.cols() != x.cols()) {
    throw ShapeError("fp_baseline: features, mask and graph disagree in shape");
  }
  require_observed_finite(x, mask);

  const FracOperator op = build_fractional(SubgraphView::full(g), adj, 1.0);
  const auto observed = (mask.bits() != 0);
  const FeatureMatrix x0 = observed.select(x.array(), 0.0).matrix();

  FeatureMatrix cur = x0;
  FeatureMatrix next(x.rows(), x.cols());
  IterationStats local;
  for (Index t = 1; t <= iterations; ++t) {
    next.noalias() = op.weights() * cur;
    next = observed.select(x0.array(), next.array()).matrix();
    local.iterations = t;
    local.residual = (next - cur).cwiseAbs().maxCoeff();
    cur.swap(next);
    if (local.residual < convergence_tol) break;
  }
  if (stats) *stats = local;
  return cur;
}

}  // namespace fracprop
