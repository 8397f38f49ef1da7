#pragma once

#include <Eigen/Core>
#include <set>
#include <vector>

#include "gridssa/grid_case.hpp"
#include "gridssa/grid_graph.hpp"
#include "gridssa/power_flow.hpp"

namespace gridssa {

/// Per-bus input signals, one row per node: columns (v_mag, p_net, q_net).
using GraphSignals = Eigen::MatrixXd;

constexpr int kSignalColumns = 3;

GraphSignals signals_from_point(const OperatingPoint& op);

/// Aggregation sequence at one node: row k holds [S^k x]_node for
/// k = 0..K-1, one column per signal. Computed by repeated sparse shift
/// application, never by dense matrix powers.
Eigen::MatrixXd aggregate(const GridGraph& g, const GraphSignals& x,
                          int node, int k_len);

/// Appends the two line-flow rows: row K = [sum, mean, max] of sending-end
/// active flow over branches incident to the node, row K+1 the same for
/// reactive flow. Empty incident sets yield zero rows.
Eigen::MatrixXd append_line_flow_rows(const Eigen::MatrixXd& agg,
                                      const GridCase& c,
                                      const Eigen::VectorXd& line_p,
                                      const Eigen::VectorXd& line_q,
                                      int node);

/// Stacked (K+2) x F x n_nodes feature tensor for the classifier, stored as
/// a (K+2) x (F * n_nodes) matrix with node-major column blocks.
struct AggFeatures {
  Eigen::MatrixXd z;
  int k_len = 0;
  std::vector<int> nodes;
};

AggFeatures build_features(const GridGraph& g, const GridCase& c,
                           const GraphSignals& x,
                           const Eigen::VectorXd& line_p,
                           const Eigen::VectorXd& line_q,
                           const std::vector<int>& nodes, int k_len);

struct CentralityScores {
  std::vector<double> closeness;    // 1 / sum of hop distances
  std::vector<double> eigenvector;  // max-normalized to 1
};

/// closeness[i] = 1 / sum_j hops(i, j); requires a connected graph.
std::vector<double> closeness_centrality(const GridGraph& g);

/// Dominant adjacency eigenvector by power iteration from the all-ones
/// vector, max-normalized. Throws NumericalError after max_iter without
/// reaching ||S c - rho c|| <= tol ||c||.
std::vector<double> eigenvector_centrality(const GridGraph& g,
                                           double tol = 1e-10,
                                           int max_iter = 10000);

/// Exact edge betweenness (Brandes), keyed in GridGraph edge order.
std::vector<double> edge_betweenness(const GridGraph& g);

/// Girvan-Newman splitting: repeatedly removes the edge of maximal
/// betweenness (recomputed after each removal, ties to the smallest edge)
/// until the graph has `target` connected components. Returns per-node
/// community ids, 0-based, in order of first appearance.
std::vector<int> detect_communities(const GridGraph& g, int target);

/// One aggregation node per community: the member of maximal closeness,
/// ties broken by higher degree then lower index. n_nodes = 1 skips
/// community detection and picks the global maximizer.
std::vector<int> select_aggregation_nodes(const GridGraph& g, int n_nodes);

/// Top ceil(budget * N) nodes by closeness (ties: degree, then index).
std::set<int> pmu_placement(const GridGraph& g, double budget);

/// Replaces rows outside `observed` with zeros.
GraphSignals mask_unobserved(const GraphSignals& x,
                             const std::set<int>& observed);

/// Zeroes flows of branches whose endpoints are both unobserved.
void mask_line_flows(const GridCase& c, const std::set<int>& observed,
                     Eigen::VectorXd& line_p, Eigen::VectorXd& line_q);

}  // namespace gridssa
