#include "gridssa/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>

#include "gridssa/case_format.hpp"
#include "gridssa/errors.hpp"
#include "gridssa/grid_graph.hpp"

namespace gridssa {

std::uint64_t draw_seed(std::uint64_t base, int draw) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull *
                               (static_cast<std::uint64_t>(draw) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Dataset generate_dataset(const GridCase& c, const GenerateConfig& cfg,
                         GenerateStats* stats_out) {
  if (cfg.n_points < 1) throw ValidationError("n_points must be >= 1");
  const auto violations = validate_case(c);
  if (!violations.empty())
    throw ValidationError("case is invalid: " + violations.front().message);

  {
    const OperatingPoint base = solve_power_flow(c, cfg.pf);
    if (!base.converged)
      throw NumericalError("base case power flow did not converge");
  }

  const GridGraph graph = build_graph(c);
  std::vector<int> contingencies(c.branches.size());
  std::iota(contingencies.begin(), contingencies.end(), 0);

  Dataset d;
  d.case_hash = fnv1a64(serialize_case(c));
  d.n_buses = static_cast<int>(c.buses.size());
  d.n_branches = static_cast<int>(c.branches.size());
  d.k_gen = cfg.k;
  d.nodes_gen = select_aggregation_nodes(graph, cfg.n_agg_nodes);
  d.threshold = cfg.threshold;
  d.seed = cfg.seed;

  GenerateStats stats;
  const long cap = static_cast<long>(cfg.draw_cap_factor) * cfg.n_points;
  while (stats.kept < cfg.n_points) {
    if (stats.draws >= cap)
      throw NumericalError(
          "draw cap exhausted: " + std::to_string(stats.draws) + " draws, " +
          std::to_string(stats.kept) + " kept, " +
          std::to_string(stats.discarded_non_converged) + " non-converged, " +
          std::to_string(stats.discarded_limit_violation) +
          " limit-violating");
    const int draw = stats.draws++;
    auto [scaled, profile] =
        scale_profile(c, cfg.scale_lo, cfg.scale_hi, draw_seed(cfg.seed, draw));
    const OperatingPoint op = solve_power_flow(scaled, cfg.pf);
    if (!op.converged) {
      ++stats.discarded_non_converged;
      continue;
    }
    if (!check_limits(scaled, op).empty()) {
      ++stats.discarded_limit_violation;
      continue;
    }
    const SecurityLabel label =
        label_operating_point(scaled, op, contingencies, cfg.threshold,
                              cfg.ss);

    LabeledSample sample;
    sample.signals = signals_from_point(op);
    sample.line_p = op.line_p;
    sample.line_q = op.line_q;
    sample.label = label.secure ? 1 : 0;
    sample.min_zeta = label.min_zeta;
    sample.per_contingency.resize(d.n_branches);
    for (const auto& [branch, zeta] : label.per_contingency)
      sample.per_contingency[branch] = zeta;
    d.samples.push_back(std::move(sample));
    ++stats.kept;
    ++(label.secure ? stats.secure : stats.insecure);
  }
  if (stats_out) *stats_out = stats;
  return d;
}

namespace {

constexpr char kBundleMagic[] = "GRIDSSA MODELBUNDLE v1\n";

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size())
    throw FormatError("model bundle truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string serialize_bundle(const ModelBundle& b) {
  std::string out(kBundleMagic);
  put<std::uint64_t>(out, b.case_hash);
  put<double>(out, b.decision_threshold);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(b.agg_nodes.size()));
  for (int v : b.agg_nodes) put<std::int32_t>(out, v);
  const std::string inner = persist_model(b.params);
  put<std::uint64_t>(out, inner.size());
  out += inner;
  return out;
}

ModelBundle parse_bundle(const std::string& bytes) {
  const std::size_t magic_len = sizeof(kBundleMagic) - 1;
  if (bytes.size() < magic_len ||
      bytes.compare(0, magic_len, kBundleMagic) != 0)
    throw FormatError("not a model bundle or unsupported version");
  std::size_t pos = magic_len;
  ModelBundle b;
  b.case_hash = take<std::uint64_t>(bytes, pos);
  b.decision_threshold = take<double>(bytes, pos);
  const std::uint32_t n = take<std::uint32_t>(bytes, pos);
  b.agg_nodes.resize(n);
  for (auto& v : b.agg_nodes) v = take<std::int32_t>(bytes, pos);
  const std::uint64_t inner_size = take<std::uint64_t>(bytes, pos);
  if (pos + inner_size != bytes.size())
    throw FormatError("model bundle payload size mismatch");
  b.params = restore_model(bytes.substr(pos, inner_size));
  return b;
}

namespace {

std::vector<int> resolve_nodes(const GridGraph& graph,
                               const TrainRunConfig& cfg) {
  if (!cfg.nodes.empty()) {
    for (int v : cfg.nodes)
      if (v < 0 || v >= graph.n)
        throw ValidationError("aggregation node " + std::to_string(v) +
                              " out of range");
    return cfg.nodes;
  }
  return select_aggregation_nodes(graph, cfg.n_agg_nodes);
}

ModelSpec spec_for(const TrainRunConfig& cfg, int n_nodes) {
  ModelSpec spec;
  spec.conv_filters = cfg.conv_filters;
  spec.conv_kernel = cfg.conv_kernel;
  spec.fc_sizes = cfg.fc_sizes;
  spec.rows = cfg.k + 2;
  spec.features = kSignalColumns;
  spec.n_nodes = n_nodes;
  return spec;
}

std::vector<int> indices_for(const std::string& which,
                             const SplitIndices& split, int count) {
  if (which == "train") return split.train;
  if (which == "val") return split.val;
  if (which == "test") return split.test;
  if (which == "all") {
    std::vector<int> all(count);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  throw ValidationError("unknown split '" + which + "'");
}

Metrics metrics_on(const ModelBundle& bundle, const FeatureDataset& feats,
                   const std::vector<int>& idx) {
  std::vector<int> preds, labels;
  preds.reserve(idx.size());
  for (int i : idx) {
    const double p = predict(bundle.params, feats.samples[i].z);
    preds.push_back(p >= bundle.decision_threshold ? 1 : 0);
    labels.push_back(feats.samples[i].label);
  }
  return compute_metrics(preds, labels);
}

}  // namespace

TrainRunResult run_training(const GridCase& c, const Dataset& d,
                            const TrainRunConfig& cfg) {
  const GridGraph graph = build_graph(c);
  const std::vector<int> nodes = resolve_nodes(graph, cfg);
  const FeatureDataset feats = featurize(d, graph, c, nodes, cfg.k);
  const ModelSpec spec = spec_for(cfg, static_cast<int>(nodes.size()));

  const TrainResult tr = train(feats, spec, cfg.train);

  TrainRunResult out;
  out.bundle.params = tr.params;
  out.bundle.agg_nodes = nodes;
  out.bundle.case_hash = d.case_hash;
  out.bundle.decision_threshold = cfg.train.decision_threshold;
  out.history = tr.history;
  out.best_epoch = tr.best_epoch;
  out.nodes_used = nodes;
  out.test_metrics = metrics_on(out.bundle, feats, tr.split.test);
  return out;
}

Metrics evaluate_model(const GridCase& c, const Dataset& d,
                       const ModelBundle& bundle, const TrainConfig& cfg,
                       const std::string& which,
                       const std::set<int>* observed) {
  const GridGraph graph = build_graph(c);
  const FeatureDataset feats = featurize(
      d, graph, c, bundle.agg_nodes, bundle.params.spec.k_len(), observed);
  const SplitIndices split = split_dataset(
      static_cast<int>(d.samples.size()), cfg.split, cfg.seed);
  return metrics_on(bundle, feats,
                    indices_for(which, split,
                                static_cast<int>(d.samples.size())));
}

std::vector<KSweepRow> k_sweep(const GridCase& c, const Dataset& d,
                               const TrainRunConfig& base,
                               const std::vector<int>& k_values,
                               int repeats) {
  if (k_values.empty()) throw ValidationError("k_sweep needs k values");
  if (repeats < 1) throw ValidationError("repeats must be >= 1");

  std::vector<KSweepRow> rows;
  for (int k : k_values) {
    TrainRunConfig cfg = base;
    cfg.k = k;
    std::vector<double> accs;
    long param_count = 0;
    for (int rep = 0; rep < repeats; ++rep) {
      cfg.train.seed = base.train.seed + static_cast<std::uint64_t>(rep);
      const TrainRunResult r = run_training(c, d, cfg);
      param_count = r.bundle.params.parameter_count();
      accs.push_back(r.test_metrics.accuracy.value_or(0.0));
    }
    KSweepRow row;
    row.k = k;
    row.param_count = param_count;
    row.mean_acc = std::accumulate(accs.begin(), accs.end(), 0.0) /
                   static_cast<double>(accs.size());
    if (repeats >= 2) {
      double ss = 0.0;
      for (double a : accs) ss += (a - row.mean_acc) * (a - row.mean_acc);
      row.std_acc = std::sqrt(ss / static_cast<double>(repeats - 1));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<MissingDataRow> missing_data_experiment(
    const GridCase& c, const Dataset& d, const ModelBundle& bundle,
    double placement_budget, const std::vector<double>& fractions,
    const TrainConfig& eval_cfg) {
  const GridGraph graph = build_graph(c);
  const std::set<int> placed = pmu_placement(graph, placement_budget);
  const auto closeness = closeness_centrality(graph);

  // lowest-centrality-first ordering over the unplaced buses
  std::vector<int> order;
  for (int v = 0; v < graph.n; ++v)
    if (!placed.count(v)) order.push_back(v);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (closeness[a] != closeness[b]) return closeness[a] < closeness[b];
    if (graph.degree(a) != graph.degree(b))
      return graph.degree(a) < graph.degree(b);
    return a < b;
  });

  std::vector<MissingDataRow> rows;
  for (double f : fractions) {
    if (f < 0.0 || f >= 1.0)
      throw ValidationError("missing fractions must lie in [0, 1)");
    const int want = static_cast<int>(std::lround(f * graph.n));
    const int take = std::min<int>(want, static_cast<int>(order.size()));
    std::set<int> observed;
    for (int v = 0; v < graph.n; ++v) observed.insert(v);
    for (int i = 0; i < take; ++i) observed.erase(order[i]);

    MissingDataRow row;
    row.fraction = f;
    row.unobserved_count = take;
    row.metrics = evaluate_model(c, d, bundle, eval_cfg, "test", &observed);
    rows.push_back(row);
  }
  return rows;
}

BenchReport benchmark_inference(const GridCase& c, const Dataset& d,
                                const ModelBundle& bundle, int batch,
                                int repeats) {
  if (batch < 1 || repeats < 1)
    throw ValidationError("bench needs batch >= 1 and repeats >= 1");
  if (d.samples.empty()) throw ValidationError("bench needs samples");
  const GridGraph graph = build_graph(c);
  const int k_len = bundle.params.spec.k_len();

  using Clock = std::chrono::steady_clock;
  auto ms = [](Clock::duration d) {
    return std::chrono::duration<double, std::milli>(d).count();
  };

  std::vector<double> totals;
  double feat_ms = 0.0, fwd_ms = 0.0;
  long fwd_count = 0;
  const int warmup = 3;
  double sink = 0.0;
  for (int rep = 0; rep < warmup + repeats; ++rep) {
    const auto t0 = Clock::now();
    std::vector<Eigen::MatrixXd> feats;
    feats.reserve(batch);
    for (int i = 0; i < batch; ++i) {
      const LabeledSample& s =
          d.samples[(rep * batch + i) % d.samples.size()];
      feats.push_back(build_features(graph, c, s.signals, s.line_p, s.line_q,
                                     bundle.agg_nodes, k_len)
                          .z);
    }
    const auto t1 = Clock::now();
    for (const auto& z : feats) sink += predict(bundle.params, z);
    const auto t2 = Clock::now();
    if (rep >= warmup) {
      totals.push_back(ms(t2 - t0));
      feat_ms += ms(t1 - t0);
      fwd_ms += ms(t2 - t1);
      fwd_count += batch;
    }
  }
  (void)sink;

  std::sort(totals.begin(), totals.end());
  BenchReport rep;
  rep.batch = batch;
  rep.repeats = repeats;
  rep.median_ms = totals[(totals.size() - 1) / 2];
  const std::size_t p95_idx = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(totals.size()))) - 1;
  rep.p95_ms = totals[std::min(p95_idx, totals.size() - 1)];
  rep.feature_ms_per_sample = feat_ms / static_cast<double>(fwd_count);
  rep.forward_ms_per_sample = fwd_ms / static_cast<double>(fwd_count);
  return rep;
}

std::vector<Verdict> assess_points(const GridCase& c, const Dataset& points,
                                   const ModelBundle& bundle, bool exact) {
  const GridGraph graph = build_graph(c);
  const FeatureDataset feats = featurize(points, graph, c, bundle.agg_nodes,
                                         bundle.params.spec.k_len());
  std::vector<Verdict> out;
  out.reserve(points.samples.size());
  for (std::size_t i = 0; i < points.samples.size(); ++i) {
    Verdict v;
    v.probability = predict(bundle.params, feats.samples[i].z);
    v.secure = v.probability >= bundle.decision_threshold;
    if (exact) v.exact_secure = points.samples[i].label != 0;
    out.push_back(v);
  }
  return out;
}

std::vector<Verdict> assess_fresh(const GridCase& c,
                                  const ModelBundle& bundle,
                                  const GenerateConfig& cfg, int n_points,
                                  bool exact) {
  const GridGraph graph = build_graph(c);
  const int k_len = bundle.params.spec.k_len();
  std::vector<int> contingencies(c.branches.size());
  std::iota(contingencies.begin(), contingencies.end(), 0);

  std::vector<Verdict> out;
  int draws = 0;
  const long cap = static_cast<long>(cfg.draw_cap_factor) *
                   std::max(1, n_points);
  while (static_cast<int>(out.size()) < n_points) {
    if (draws >= cap)
      throw NumericalError("draw cap exhausted while assessing");
    auto [scaled, profile] = scale_profile(
        c, cfg.scale_lo, cfg.scale_hi, draw_seed(cfg.seed, draws++));
    const OperatingPoint op = solve_power_flow(scaled, cfg.pf);
    if (!op.converged) continue;
    if (!check_limits(scaled, op).empty()) continue;

    const AggFeatures feats =
        build_features(graph, c, signals_from_point(op), op.line_p,
                       op.line_q, bundle.agg_nodes, k_len);
    Verdict v;
    v.probability = predict(bundle.params, feats.z);
    v.secure = v.probability >= bundle.decision_threshold;
    if (exact) {
      const SecurityLabel label = label_operating_point(
          scaled, op, contingencies, cfg.threshold, cfg.ss);
      v.exact_secure = label.secure;
    }
    out.push_back(v);
  }
  return out;
}

void check_compatibility(const ModelBundle& bundle, const GridCase& c,
                         std::uint64_t case_hash,
                         const std::optional<int>& k,
                         const std::vector<int>& nodes) {
  if (bundle.case_hash != 0 && case_hash != 0 &&
      bundle.case_hash != case_hash)
    throw ValidationError(
        "model was trained on a different case (hash mismatch)");
  if (k && *k != bundle.params.spec.k_len())
    throw ValidationError("aggregation length mismatch: model uses K=" +
                          std::to_string(bundle.params.spec.k_len()) +
                          ", requested K=" + std::to_string(*k));
  if (!nodes.empty() && nodes != bundle.agg_nodes)
    throw ValidationError("aggregation nodes differ from training");
  const int n = static_cast<int>(c.buses.size());
  for (int v : bundle.agg_nodes)
    if (v < 0 || v >= n)
      throw ValidationError("model aggregation node " + std::to_string(v) +
                            " is outside this case");
}

}  // namespace gridssa
