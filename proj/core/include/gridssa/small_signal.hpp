#pragma once

#include <Eigen/Core>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gridssa/grid_case.hpp"
#include "gridssa/power_flow.hpp"

namespace gridssa {

/// Linearized classical-machine model, states [delta_1..delta_g,
/// omega_1..omega_g] (rotor angles in radians, speed deviations per-unit):
///
///   A = [ 0        omega_s*I ]
///       [ -M^-1 L  -M^-1 D   ]
///
/// with M = diag(2 H / omega_s), D = diag(damping_d) and L the Jacobian of
/// machine electrical power w.r.t. rotor angles at the operating point.
struct StateMatrix {
  Eigen::MatrixXd a;  // 2g x 2g
  int machines = 0;
};

struct Mode {
  double sigma;  // 1/s
  double omega;  // rad/s
  double zeta;   // dimensionless
};

struct SecurityLabel {
  bool secure = false;
  // Worst damping over all analyzed contingencies and oscillatory modes.
  double min_zeta = std::numeric_limits<double>::quiet_NaN();
  // (branch index, min mode damping); NaN for islanding contingencies,
  // +inf when a contingency leaves no oscillatory mode.
  std::vector<std::pair<int, double>> per_contingency;
  std::optional<std::string> discarded;
};

struct SmallSignalOptions {
  double omega_s = 2.0 * 3.14159265358979323846 * 60.0;  // rad/s
  double omega_floor = 1e-6;  // excludes the rigid-body mode from screening
  bool resolve_power_flow = false;  // re-solve the post-outage power flow
  PowerFlowOptions pf;
};

/// Builds the 2g x 2g state matrix for the (optionally line-outaged)
/// network at the given converged operating point. Loads become constant
/// admittances, machines sit behind xd' at internal nodes, and the network
/// is Kron-reduced to those nodes. A slack bus without a generator is kept
/// as a fixed-voltage source (infinite bus) instead of being eliminated.
/// Throws IslandingError when the outage disconnects the bus graph.
StateMatrix build_state_matrix(const GridCase& c, const OperatingPoint& op,
                               std::optional<int> outage = std::nullopt,
                               const SmallSignalOptions& opt = {});

/// All eigenvalues of a real square matrix (Hessenberg + shifted QR via the
/// dense solver). Complex values come in exact conjugate pairs. Throws
/// NumericalError if the QR iteration fails to converge; never returns a
/// partial spectrum.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a);

/// zeta = -sigma / sqrt(sigma^2 + omega^2); rejects the origin.
double damping_ratio(double sigma, double omega);

/// Oscillatory modes (|omega| > omega_floor) with their damping ratios.
std::vector<Mode> oscillatory_modes(
    const std::vector<std::complex<double>>& eigs, double omega_floor);

/// Minimum damping ratio over oscillatory modes; +inf when there are none.
double min_damping(const std::vector<std::complex<double>>& eigs,
                   double omega_floor);

/// N-1 security label: every contingency's post-outage minimum oscillatory
/// damping must reach the threshold (inclusive). Islanding contingencies
/// mark the point insecure with the reason recorded. Results are ordered by
/// branch index regardless of evaluation order.
SecurityLabel label_operating_point(const GridCase& c,
                                    const OperatingPoint& op,
                                    const std::vector<int>& contingencies,
                                    double threshold,
                                    const SmallSignalOptions& opt = {});

}  // namespace gridssa
