#include "gridssa/grid_graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "gridssa/errors.hpp"

namespace gridssa {

Eigen::MatrixXd GridGraph::shift() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j] : edges) {
    s(i, j) = 1.0;
    s(j, i) = 1.0;
  }
  return s;
}

GridGraph graph_from_edges(int n, std::vector<std::pair<int, int>> edges) {
  for (auto& [i, j] : edges)
    if (i > j) std::swap(i, j);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  GridGraph g;
  g.n = n;
  g.edges = std::move(edges);
  g.adjacency.assign(n, {});
  for (auto [i, j] : g.edges) {
    g.adjacency[i].push_back(j);
    g.adjacency[j].push_back(i);
  }
  for (auto& a : g.adjacency) std::sort(a.begin(), a.end());
  return g;
}

GridGraph build_graph(const GridCase& c) {
  const auto index = bus_index_map(c);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(c.branches.size());
  for (const Branch& br : c.branches)
    edges.emplace_back(index.at(br.from_bus), index.at(br.to_bus));
  return graph_from_edges(static_cast<int>(c.buses.size()),
                          std::move(edges));
}

std::vector<int> hop_distances(const GridGraph& g, int source) {
  std::vector<int> dist(g.n, -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : g.adjacency[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  return dist;
}

bool is_connected(const GridGraph& g) {
  if (g.n == 0) return true;
  const auto dist = hop_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(),
                      [](int d) { return d < 0; });
}

bool connected_without_branch(const GridCase& c, int branch_index) {
  const auto index = bus_index_map(c);
  std::vector<std::pair<int, int>> edges;
  for (int b = 0; b < static_cast<int>(c.branches.size()); ++b) {
    if (b == branch_index) continue;
    edges.emplace_back(index.at(c.branches[b].from_bus),
                       index.at(c.branches[b].to_bus));
  }
  return is_connected(
      graph_from_edges(static_cast<int>(c.buses.size()), std::move(edges)));
}

}  // namespace gridssa
