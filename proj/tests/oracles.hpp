// Test-only oracles, kept independent of the library code paths they check.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <queue>
#include <string>
#include <vector>

#include "gridssa/case_format.hpp"
#include "gridssa/grid_case.hpp"
#include "gridssa/grid_graph.hpp"
#include "gridssa/model.hpp"

namespace oracles {

inline std::string fixture_path(const std::string& name) {
  return std::string(GRIDSSA_FIXTURE_DIR) + "/" + name;
}

inline gridssa::GridCase load_fixture(const std::string& name) {
  return gridssa::parse_case(gridssa::read_file(fixture_path(name)));
}

// ---------------------------------------------------------------------------
// Gauss-Seidel power flow on complex voltages. Builds its own admittance
// matrix straight from the branch list so nothing is shared with the
// Newton-Raphson path under test.
struct GaussSeidelResult {
  Eigen::VectorXcd v;
  bool converged = false;
  int iterations = 0;
};

inline GaussSeidelResult gauss_seidel_power_flow(const gridssa::GridCase& c,
                                                 double tol = 1e-10,
                                                 int max_iter = 200000) {
  using Complex = std::complex<double>;
  const int n = static_cast<int>(c.buses.size());
  const auto index = gridssa::bus_index_map(c);

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const gridssa::Branch& br : c.branches) {
    const int f = index.at(br.from_bus);
    const int t = index.at(br.to_bus);
    const Complex ys = 1.0 / Complex(br.r, br.x);
    const Complex half_b(0.0, br.b_shunt / 2.0);
    y(f, f) += ys + half_b;
    y(t, t) += ys + half_b;
    y(f, t) -= ys;
    y(t, f) -= ys;
  }

  Eigen::VectorXd p_spec = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd q_spec = Eigen::VectorXd::Zero(n);
  for (const gridssa::Generator& g : c.generators)
    p_spec[index.at(g.bus)] += g.p_gen;
  for (int i = 0; i < n; ++i) {
    p_spec[i] -= c.buses[i].p_load;
    q_spec[i] -= c.buses[i].q_load;
  }

  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = Complex(c.buses[i].v_setpoint.value_or(1.0), 0.0);

  GaussSeidelResult result;
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      const gridssa::Bus& bus = c.buses[i];
      if (bus.kind == gridssa::BusKind::Slack) continue;
      double q = q_spec[i];
      if (bus.kind == gridssa::BusKind::PV) {
        Complex yv(0.0, 0.0);
        for (int j = 0; j < n; ++j) yv += y(i, j) * v[j];
        q = (v[i] * std::conj(yv)).imag();
      }
      Complex acc(0.0, 0.0);
      for (int j = 0; j < n; ++j)
        if (j != i) acc += y(i, j) * v[j];
      Complex vn = (Complex(p_spec[i], -q) / std::conj(v[i]) - acc) / y(i, i);
      if (bus.kind == gridssa::BusKind::PV)
        vn *= *bus.v_setpoint / std::abs(vn);
      v[i] = vn;
    }

    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const gridssa::Bus& bus = c.buses[i];
      if (bus.kind == gridssa::BusKind::Slack) continue;
      Complex s(0.0, 0.0);
      for (int j = 0; j < n; ++j) s += y(i, j) * v[j];
      s = v[i] * std::conj(s);
      worst = std::max(worst, std::abs(p_spec[i] - s.real()));
      if (bus.kind == gridssa::BusKind::PQ)
        worst = std::max(worst, std::abs(q_spec[i] - s.imag()));
    }
    result.iterations = it + 1;
    if (worst < tol) {
      result.converged = true;
      break;
    }
  }
  result.v = v;
  return result;
}

// Two-bus feasibility through the power-circle discriminant: with r = 0 a
// PQ load (P, Q) behind reactance x from a unit-voltage source is solvable
// iff (V1^2 - 2 Q x)^2 - 4 x^2 (P^2 + Q^2) >= 0.
inline bool two_bus_has_real_solution(double v1, double x, double p_load,
                                      double q_load) {
  const double a = v1 * v1 - 2.0 * q_load * x;
  return a * a - 4.0 * x * x * (p_load * p_load + q_load * q_load) >= 0.0;
}

// ---------------------------------------------------------------------------
// Dense brute-force aggregation: literal matrix powers of the shift.
inline Eigen::MatrixXd dense_aggregate(const Eigen::MatrixXd& shift,
                                       const Eigen::MatrixXd& x, int node,
                                       int k_len) {
  Eigen::MatrixXd out(k_len, x.cols());
  Eigen::MatrixXd power =
      Eigen::MatrixXd::Identity(shift.rows(), shift.cols());
  for (int k = 0; k < k_len; ++k) {
    if (k > 0) power = shift * power;
    out.row(k) = (power * x).row(node);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pair-centric edge betweenness: for every source/target pair, an edge
// (u, v) with dist_s(u) + 1 + dist_t(v) == dist_s(t) lies on
// sigma_s(u) * sigma_t(v) of the sigma_s(t) shortest paths.
inline std::vector<double> brute_edge_betweenness(const gridssa::GridGraph& g) {
  const int n = g.n;
  auto bfs = [&](int s, std::vector<double>& sigma, std::vector<int>& dist) {
    sigma.assign(n, 0.0);
    dist.assign(n, -1);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : g.adjacency[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
        if (dist[v] == dist[u] + 1) sigma[v] += sigma[u];
      }
    }
  };

  std::vector<std::vector<double>> sigma(n);
  std::vector<std::vector<int>> dist(n);
  for (int s = 0; s < n; ++s) bfs(s, sigma[s], dist[s]);

  std::vector<double> score(g.edges.size(), 0.0);
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      if (dist[s][t] < 0 || sigma[s][t] == 0.0) continue;
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto [a, b] = g.edges[e];
        double through = 0.0;
        if (dist[s][a] + 1 + dist[t][b] == dist[s][t])
          through += sigma[s][a] * sigma[t][b];
        if (dist[s][b] + 1 + dist[t][a] == dist[s][t])
          through += sigma[s][b] * sigma[t][a];
        score[e] += through / sigma[s][t];
      }
    }
  }
  return score;
}

// ---------------------------------------------------------------------------
// Central finite-difference gradient of the batch loss.
inline std::vector<double> fd_gradients(
    const gridssa::ModelParams& params,
    const std::vector<const Eigen::MatrixXd*>& batch,
    const std::vector<int>& labels, double h = 1e-5) {
  gridssa::ModelParams work = params;
  std::vector<double> grad(params.theta.size());
  for (std::size_t j = 0; j < params.theta.size(); ++j) {
    const double keep = work.theta[j];
    work.theta[j] = keep + h;
    const double up = gridssa::batch_loss(work, batch, labels);
    work.theta[j] = keep - h;
    const double down = gridssa::batch_loss(work, batch, labels);
    work.theta[j] = keep;
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Perceptron separability oracle on raw 2-d points (margin learning on an
// augmented bias coordinate); returns true when a separating plane exists.
inline bool perceptron_separable(const std::vector<Eigen::Vector2d>& pts,
                                 const std::vector<int>& labels,
                                 int max_epochs = 10000) {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    bool clean = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Eigen::Vector3d x(pts[i].x(), pts[i].y(), 1.0);
      const double y = labels[i] ? 1.0 : -1.0;
      if (y * w.dot(x) <= 0.0) {
        w += y * x;
        clean = false;
      }
    }
    if (clean) return true;
  }
  return false;
}

}  // namespace oracles
