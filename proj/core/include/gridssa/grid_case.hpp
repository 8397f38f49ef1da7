#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridssa {

enum class BusKind { Slack, PV, PQ };

std::string to_string(BusKind k);

struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double p_load = 0.0;  // per-unit
  double q_load = 0.0;  // per-unit
  std::optional<double> v_setpoint;  // per-unit, SLACK/PV only
  double v_min = 0.9;
  double v_max = 1.1;
};

struct Generator {
  int bus = 0;
  double p_gen = 0.0;  // scheduled active power, per-unit
  double p_min = 0.0;
  double p_max = 0.0;
  double inertia_h = 0.0;  // seconds
  double damping_d = 0.0;  // pu torque / pu speed
  double xd_prime = 0.0;   // transient reactance, per-unit
};

struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double b_shunt = 0.0;  // total line charging, per-unit
  double rating = 0.0;   // apparent-power limit, per-unit; 0 = unlimited
};

/// Static grid description. All powers and impedances are per-unit on
/// base_mva.
struct GridCase {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Branch> branches;
};

/// One failed invariant: which field broke which rule.
struct Violation {
  std::string field;
  std::string rule;
  std::string message;
};

/// Checks every GridCase invariant; an empty result means the case is valid.
/// Violations are data, not errors: callers decide what to do with them.
std::vector<Violation> validate_case(const GridCase& c);

/// Maps external bus ids to dense 0-based indices in file order.
std::unordered_map<int, int> bus_index_map(const GridCase& c);

/// Index of the slack bus; requires a validated case.
int slack_index(const GridCase& c);

/// FNV-1a over raw bytes, used to tie datasets/models to their source case.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace gridssa
