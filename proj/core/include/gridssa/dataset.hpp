#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gridssa/features.hpp"
#include "gridssa/grid_case.hpp"
#include "gridssa/trainer.hpp"

namespace gridssa {

/// One labeled operating point, stored as raw per-bus signals and per-line
/// flows (not pre-aggregated features) so a single dataset supports K
/// sweeps and masking experiments; features are recomputed on load.
struct LabeledSample {
  Eigen::MatrixXd signals;  // N x 3: v_mag, p_net, q_net
  Eigen::VectorXd line_p;   // per branch, sending end
  Eigen::VectorXd line_q;
  int label = 0;            // 1 = secure
  double min_zeta = 0.0;
  Eigen::VectorXd per_contingency;  // min damping per branch; NaN = islanding
};

struct Dataset {
  std::uint64_t case_hash = 0;
  int n_buses = 0;
  int n_branches = 0;
  int k_gen = 3;               // provenance: K at generation time
  std::vector<int> nodes_gen;  // provenance: aggregation nodes
  double threshold = 0.03;
  std::uint64_t seed = 0;
  std::vector<LabeledSample> samples;
};

/// Versioned text round-trip (magic header line, %.17g numbers).
std::string serialize_dataset(const Dataset& d);
Dataset parse_dataset(const std::string& text);

/// Featurizes every sample at the given aggregation nodes and length.
/// `observed`, when non-null, masks signals and line flows first.
FeatureDataset featurize(const Dataset& d, const GridGraph& g,
                         const GridCase& c, const std::vector<int>& nodes,
                         int k_len, const std::set<int>* observed = nullptr);

}  // namespace gridssa
