#include "gridssa/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "gridssa/errors.hpp"

namespace gridssa {

GraphSignals signals_from_point(const OperatingPoint& op) {
  GraphSignals x(op.v_mag.size(), kSignalColumns);
  x.col(0) = op.v_mag;
  x.col(1) = op.p_net;
  x.col(2) = op.q_net;
  return x;
}

Eigen::MatrixXd aggregate(const GridGraph& g, const GraphSignals& x,
                          int node, int k_len) {
  if (k_len < 1) throw ValidationError("aggregation length must be >= 1");
  if (node < 0 || node >= g.n)
    throw ValidationError("aggregation node out of range");
  if (x.rows() != g.n)
    throw ValidationError("signal rows must match graph node count");

  const int f = static_cast<int>(x.cols());
  Eigen::MatrixXd out(k_len, f);
  Eigen::MatrixXd cur = x;
  Eigen::MatrixXd next(g.n, f);
  out.row(0) = cur.row(node);
  for (int k = 1; k < k_len; ++k) {
    for (int i = 0; i < g.n; ++i) {
      next.row(i).setZero();
      for (int j : g.adjacency[i]) next.row(i) += cur.row(j);
    }
    cur.swap(next);
    out.row(k) = cur.row(node);
  }
  return out;
}

Eigen::MatrixXd append_line_flow_rows(const Eigen::MatrixXd& agg,
                                      const GridCase& c,
                                      const Eigen::VectorXd& line_p,
                                      const Eigen::VectorXd& line_q,
                                      int node) {
  const auto index = bus_index_map(c);
  double sum_p = 0.0, max_p = 0.0, sum_q = 0.0, max_q = 0.0;
  int count = 0;
  for (int b = 0; b < static_cast<int>(c.branches.size()); ++b) {
    const int f = index.at(c.branches[b].from_bus);
    const int t = index.at(c.branches[b].to_bus);
    if (f != node && t != node) continue;
    if (count == 0) {
      max_p = line_p[b];
      max_q = line_q[b];
    } else {
      max_p = std::max(max_p, line_p[b]);
      max_q = std::max(max_q, line_q[b]);
    }
    sum_p += line_p[b];
    sum_q += line_q[b];
    ++count;
  }

  Eigen::MatrixXd out(agg.rows() + 2, agg.cols());
  out.topRows(agg.rows()) = agg;
  out.row(agg.rows()).setZero();
  out.row(agg.rows() + 1).setZero();
  if (count > 0) {
    out(agg.rows(), 0) = sum_p;
    out(agg.rows(), 1) = sum_p / count;
    out(agg.rows(), 2) = max_p;
    out(agg.rows() + 1, 0) = sum_q;
    out(agg.rows() + 1, 1) = sum_q / count;
    out(agg.rows() + 1, 2) = max_q;
  }
  return out;
}

AggFeatures build_features(const GridGraph& g, const GridCase& c,
                           const GraphSignals& x,
                           const Eigen::VectorXd& line_p,
                           const Eigen::VectorXd& line_q,
                           const std::vector<int>& nodes, int k_len) {
  AggFeatures feats;
  feats.k_len = k_len;
  feats.nodes = nodes;
  feats.z.resize(k_len + 2, kSignalColumns * nodes.size());
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    const Eigen::MatrixXd block = append_line_flow_rows(
        aggregate(g, x, nodes[m], k_len), c, line_p, line_q, nodes[m]);
    feats.z.middleCols(kSignalColumns * m, kSignalColumns) = block;
  }
  return feats;
}

std::vector<double> closeness_centrality(const GridGraph& g) {
  if (!is_connected(g))
    throw ValidationError("closeness centrality needs a connected graph");
  std::vector<double> scores(g.n, 0.0);
  for (int i = 0; i < g.n; ++i) {
    const auto dist = hop_distances(g, i);
    const long total = std::accumulate(dist.begin(), dist.end(), 0L);
    scores[i] = total > 0 ? 1.0 / static_cast<double>(total)
                          : 0.0;  // single-node graph
  }
  return scores;
}

std::vector<double> eigenvector_centrality(const GridGraph& g, double tol,
                                           int max_iter) {
  if (!is_connected(g))
    throw ValidationError("eigenvector centrality needs a connected graph");
  if (g.n == 1) return {1.0};
  Eigen::VectorXd c = Eigen::VectorXd::Ones(g.n);
  c.normalize();
  Eigen::VectorXd sc(g.n);
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < g.n; ++i) {
      double acc = 0.0;
      for (int j : g.adjacency[i]) acc += c[j];
      sc[i] = acc;
    }
    const double rho = c.dot(sc);  // Rayleigh quotient, ||c|| = 1
    if ((sc - rho * c).norm() <= tol * c.norm() && rho > 0.0) {
      std::vector<double> out(g.n);
      const double top = c.maxCoeff();
      for (int i = 0; i < g.n; ++i) out[i] = c[i] / top;
      return out;
    }
    // Shifted iteration (S + I): same eigenvectors, but the Perron value
    // strictly dominates even on bipartite graphs.
    sc += c;
    c = sc / sc.norm();
  }
  throw NumericalError("eigenvector centrality power iteration stalled");
}

namespace {

// Brandes' accumulation specialized to edge scores on unweighted graphs.
std::vector<double> brandes_edge_betweenness(
    int n, const std::vector<std::vector<int>>& adjacency,
    const std::vector<std::vector<int>>& edge_id) {
  std::size_t m = 0;
  for (const auto& ids : edge_id)
    for (int id : ids) m = std::max(m, static_cast<std::size_t>(id) + 1);
  std::vector<double> score(m, 0.0);

  for (int s = 0; s < n; ++s) {
    std::vector<int> order;
    std::vector<std::vector<int>> preds(n);
    std::vector<double> sigma(n, 0.0);
    std::vector<int> dist(n, -1);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      order.push_back(u);
      for (std::size_t a = 0; a < adjacency[u].size(); ++a) {
        const int v = adjacency[u][a];
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
        if (dist[v] == dist[u] + 1) {
          sigma[v] += sigma[u];
          preds[v].push_back(u);
        }
      }
    }
    std::vector<double> delta(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int w = *it;
      for (int v : preds[w]) {
        const double share = sigma[v] / sigma[w] * (1.0 + delta[w]);
        // locate edge id of (v, w)
        const auto& nbrs = adjacency[v];
        const auto pos =
            std::lower_bound(nbrs.begin(), nbrs.end(), w) - nbrs.begin();
        score[edge_id[v][pos]] += share;
        delta[v] += share;
      }
    }
  }
  // Each unordered pair was counted from both endpoints.
  for (double& v : score) v /= 2.0;
  return score;
}

}  // namespace

std::vector<double> edge_betweenness(const GridGraph& g) {
  std::vector<std::vector<int>> edge_id(g.n);
  for (int i = 0; i < g.n; ++i)
    edge_id[i].resize(g.adjacency[i].size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto [a, b] = g.edges[e];
    const auto pa = std::lower_bound(g.adjacency[a].begin(),
                                     g.adjacency[a].end(), b) -
                    g.adjacency[a].begin();
    const auto pb = std::lower_bound(g.adjacency[b].begin(),
                                     g.adjacency[b].end(), a) -
                    g.adjacency[b].begin();
    edge_id[a][pa] = static_cast<int>(e);
    edge_id[b][pb] = static_cast<int>(e);
  }
  return brandes_edge_betweenness(g.n, g.adjacency, edge_id);
}

namespace {

std::vector<int> component_labels(int n,
                                  const std::vector<std::vector<int>>& adj,
                                  int* count_out) {
  std::vector<int> comp(n, -1);
  int count = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = count;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (comp[v] < 0) {
          comp[v] = count;
          q.push(v);
        }
    }
    ++count;
  }
  if (count_out) *count_out = count;
  return comp;
}

}  // namespace

std::vector<int> detect_communities(const GridGraph& g, int target) {
  if (target < 1 || target > g.n)
    throw ValidationError("community target out of range");

  std::vector<std::pair<int, int>> edges = g.edges;
  while (true) {
    GridGraph work = graph_from_edges(g.n, edges);
    int count = 0;
    auto comp = component_labels(g.n, work.adjacency, &count);
    if (count >= target) return comp;
    if (work.edges.empty())
      throw NumericalError("ran out of edges before reaching target");

    const auto scores = edge_betweenness(work);
    std::size_t best = 0;
    for (std::size_t e = 1; e < scores.size(); ++e)
      if (scores[e] > scores[best]) best = e;  // ties keep smallest edge
    edges = work.edges;
    edges.erase(edges.begin() + best);
  }
}

namespace {

// closeness desc, then degree desc, then index asc
int pick_best(const std::vector<int>& members,
              const std::vector<double>& closeness, const GridGraph& g) {
  int best = members.front();
  for (int v : members) {
    if (closeness[v] > closeness[best] ||
        (closeness[v] == closeness[best] &&
         (g.degree(v) > g.degree(best) ||
          (g.degree(v) == g.degree(best) && v < best))))
      best = v;
  }
  return best;
}

}  // namespace

std::vector<int> select_aggregation_nodes(const GridGraph& g, int n_nodes) {
  if (n_nodes < 1 || n_nodes > g.n)
    throw ValidationError("aggregation node count out of range");
  const auto closeness = closeness_centrality(g);

  if (n_nodes == 1) {
    std::vector<int> all(g.n);
    std::iota(all.begin(), all.end(), 0);
    return {pick_best(all, closeness, g)};
  }

  const auto comp = detect_communities(g, n_nodes);
  const int count = *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<std::vector<int>> members(count);
  for (int v = 0; v < g.n; ++v) members[comp[v]].push_back(v);

  std::vector<int> chosen;
  for (const auto& m : members)
    chosen.push_back(pick_best(m, closeness, g));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::set<int> pmu_placement(const GridGraph& g, double budget) {
  if (!(budget > 0.0) || budget > 1.0)
    throw ValidationError("placement budget must be in (0, 1]");
  const auto closeness = closeness_centrality(g);
  std::vector<int> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (closeness[a] != closeness[b]) return closeness[a] > closeness[b];
    if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
    return a < b;
  });
  const int take = static_cast<int>(
      std::ceil(budget * static_cast<double>(g.n)));
  return {order.begin(), order.begin() + std::min(take, g.n)};
}

GraphSignals mask_unobserved(const GraphSignals& x,
                             const std::set<int>& observed) {
  GraphSignals out = x;
  for (int i = 0; i < out.rows(); ++i)
    if (!observed.count(i)) out.row(i).setZero();
  return out;
}

void mask_line_flows(const GridCase& c, const std::set<int>& observed,
                     Eigen::VectorXd& line_p, Eigen::VectorXd& line_q) {
  const auto index = bus_index_map(c);
  for (int b = 0; b < static_cast<int>(c.branches.size()); ++b) {
    const int f = index.at(c.branches[b].from_bus);
    const int t = index.at(c.branches[b].to_bus);
    if (!observed.count(f) && !observed.count(t)) {
      line_p[b] = 0.0;
      line_q[b] = 0.0;
    }
  }
}

}  // namespace gridssa
