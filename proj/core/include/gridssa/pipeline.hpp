#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridssa/dataset.hpp"
#include "gridssa/grid_case.hpp"
#include "gridssa/metrics.hpp"
#include "gridssa/model.hpp"
#include "gridssa/small_signal.hpp"
#include "gridssa/trainer.hpp"

namespace gridssa {

struct GenerateConfig {
  int n_points = 200;
  double scale_lo = 0.7;
  double scale_hi = 1.5;
  double threshold = 0.03;
  std::uint64_t seed = 1;
  int draw_cap_factor = 10;  // give up after draw_cap_factor * n_points draws
  int k = 3;                 // provenance recorded in the dataset header
  int n_agg_nodes = 1;
  PowerFlowOptions pf;
  SmallSignalOptions ss;
};

struct GenerateStats {
  int draws = 0;
  int kept = 0;
  int discarded_non_converged = 0;
  int discarded_limit_violation = 0;
  int secure = 0;
  int insecure = 0;
};

/// Draws scaled profiles, solves them, discards non-converged or
/// limit-violating points, labels the rest over the full branch contingency
/// set, and stores raw signals + flows + labels. Deterministic per seed.
Dataset generate_dataset(const GridCase& c, const GenerateConfig& cfg,
                         GenerateStats* stats = nullptr);

/// A trained model plus everything needed to check compatibility at
/// assessment time.
struct ModelBundle {
  ModelParams params;
  std::vector<int> agg_nodes;
  std::uint64_t case_hash = 0;
  double decision_threshold = 0.5;
};

std::string serialize_bundle(const ModelBundle& b);
ModelBundle parse_bundle(const std::string& bytes);

struct TrainRunConfig {
  int conv_filters = 2;
  int conv_kernel = 3;
  std::array<int, 3> fc_sizes = {4, 5, 1};
  int k = 3;
  int n_agg_nodes = 1;
  std::vector<int> nodes;  // explicit aggregation nodes; empty = auto-select
  TrainConfig train;
};

struct TrainRunResult {
  ModelBundle bundle;
  std::vector<EpochStats> history;
  int best_epoch = 0;
  Metrics test_metrics;
  std::vector<int> nodes_used;
};

/// Featurize + train + evaluate on the held-out test split.
TrainRunResult run_training(const GridCase& c, const Dataset& d,
                            const TrainRunConfig& cfg);

/// Metrics of a trained bundle on one split of the dataset
/// ("train", "val", "test" or "all"), with optional masking of unobserved
/// nodes applied before featurization.
Metrics evaluate_model(const GridCase& c, const Dataset& d,
                       const ModelBundle& bundle, const TrainConfig& cfg,
                       const std::string& which,
                       const std::set<int>* observed = nullptr);

struct KSweepRow {
  int k = 0;
  long param_count = 0;
  double mean_acc = 0.0;
  std::optional<double> std_acc;
};

/// Re-featurizes the dataset at each K and trains `repeats` models with
/// seeds base.seed + r; reports mean +/- sample std of test accuracy.
std::vector<KSweepRow> k_sweep(const GridCase& c, const Dataset& d,
                               const TrainRunConfig& base,
                               const std::vector<int>& k_values, int repeats);

struct MissingDataRow {
  double fraction = 0.0;
  int unobserved_count = 0;
  Metrics metrics;
};

/// Masks the round(f*N) lowest-centrality buses outside the PMU placement
/// and re-evaluates the trained model on the test split per fraction.
std::vector<MissingDataRow> missing_data_experiment(
    const GridCase& c, const Dataset& d, const ModelBundle& bundle,
    double placement_budget, const std::vector<double>& fractions,
    const TrainConfig& eval_cfg);

struct BenchReport {
  int batch = 0;
  int repeats = 0;
  double median_ms = 0.0;   // full batch: features + forward
  double p95_ms = 0.0;
  double feature_ms_per_sample = 0.0;
  double forward_ms_per_sample = 0.0;
};

/// Median/p95 wall-clock per-batch latency over `repeats` timed runs after
/// 3 warm-ups, with feature extraction and network forward reported apart.
BenchReport benchmark_inference(const GridCase& c, const Dataset& d,
                                const ModelBundle& bundle, int batch,
                                int repeats);

struct Verdict {
  double probability = 0.0;
  bool secure = false;
  std::optional<bool> exact_secure;
};

/// Classifies every sample in `points` with the trained bundle. When
/// `exact` is set the stored exact label rides along for agreement checks.
std::vector<Verdict> assess_points(const GridCase& c, const Dataset& points,
                                   const ModelBundle& bundle, bool exact);

/// Solves `n_points` fresh scaled operating points, classifies them, and
/// (when `exact`) runs the full contingency labeling alongside.
std::vector<Verdict> assess_fresh(const GridCase& c,
                                  const ModelBundle& bundle,
                                  const GenerateConfig& cfg, int n_points,
                                  bool exact);

/// Throws ValidationError unless the bundle matches the case topology and
/// the requested aggregation setup.
void check_compatibility(const ModelBundle& bundle, const GridCase& c,
                         std::uint64_t case_hash,
                         const std::optional<int>& k,
                         const std::vector<int>& nodes);

/// Per-draw RNG stream for a dataset: decorrelated, deterministic.
std::uint64_t draw_seed(std::uint64_t base, int draw);

}  // namespace gridssa
