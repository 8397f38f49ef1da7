#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "gridssa/grid_case.hpp"

namespace gridssa {

/// Undirected bus graph. Node order equals bus order in the case; parallel
/// branches collapse to a single edge, so the shift operator stays 0/1.
struct GridGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;    // i < j, unique, sorted
  std::vector<std::vector<int>> adjacency;   // sorted neighbor lists

  int degree(int v) const { return static_cast<int>(adjacency[v].size()); }

  /// Dense symmetric 0/1 adjacency; the graph shift operator.
  Eigen::MatrixXd shift() const;
};

GridGraph build_graph(const GridCase& c);

/// Builds a graph directly from an edge list (test helper and internal use).
GridGraph graph_from_edges(int n, std::vector<std::pair<int, int>> edges);

/// BFS hop distances from source; unreachable nodes get -1.
std::vector<int> hop_distances(const GridGraph& g, int source);

bool is_connected(const GridGraph& g);

/// Connectivity of the bus graph when one branch is removed. Parallel
/// branches keep the edge alive, so only the surviving branch set counts.
bool connected_without_branch(const GridCase& c, int branch_index);

}  // namespace gridssa
