#include "gridssa/grid_case.hpp"

#include <cstdint>
#include <unordered_set>

#include "gridssa/errors.hpp"

namespace gridssa {

std::string to_string(BusKind k) {
  switch (k) {
    case BusKind::Slack: return "SLACK";
    case BusKind::PV: return "PV";
    case BusKind::PQ: return "PQ";
  }
  return "?";
}

std::unordered_map<int, int> bus_index_map(const GridCase& c) {
  std::unordered_map<int, int> m;
  m.reserve(c.buses.size());
  for (int i = 0; i < static_cast<int>(c.buses.size()); ++i)
    m.emplace(c.buses[i].id, i);
  return m;
}

int slack_index(const GridCase& c) {
  for (int i = 0; i < static_cast<int>(c.buses.size()); ++i)
    if (c.buses[i].kind == BusKind::Slack) return i;
  throw ValidationError("case has no slack bus");
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<Violation> validate_case(const GridCase& c) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string rule, std::string msg) {
    out.push_back({std::move(field), std::move(rule), std::move(msg)});
  };

  if (!(c.base_mva > 0.0))
    add("base_mva", "base_mva > 0", "base power must be positive");

  int slack_count = 0;
  std::unordered_set<int> ids;
  for (const Bus& b : c.buses) {
    if (b.kind == BusKind::Slack) ++slack_count;
    if (!ids.insert(b.id).second)
      add("bus.id", "bus ids are unique",
          "duplicate bus id " + std::to_string(b.id));
    if (!(b.v_min < b.v_max))
      add("bus.v_min", "v_min < v_max",
          "bus " + std::to_string(b.id) + " has v_min >= v_max");
    if (b.v_setpoint) {
      if (*b.v_setpoint < b.v_min || *b.v_setpoint > b.v_max)
        add("bus.v_setpoint", "v_setpoint within [v_min, v_max]",
            "bus " + std::to_string(b.id) + " setpoint outside limits");
    } else if (b.kind != BusKind::PQ) {
      add("bus.v_setpoint", "v_setpoint required for SLACK/PV",
          "bus " + std::to_string(b.id) + " lacks a voltage setpoint");
    }
  }
  if (slack_count != 1)
    add("bus.kind", "exactly one bus has type SLACK",
        "found " + std::to_string(slack_count) + " slack buses");

  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const Generator& g = c.generators[i];
    const std::string tag = "generator[" + std::to_string(i) + "]";
    if (!ids.count(g.bus))
      add(tag + ".bus", "generator references an existing bus",
          tag + " points at unknown bus " + std::to_string(g.bus));
    if (!(g.inertia_h > 0.0))
      add(tag + ".inertia_h", "inertia_h > 0", tag + " has non-positive H");
    if (!(g.xd_prime > 0.0))
      add(tag + ".xd_prime", "xd_prime > 0", tag + " has non-positive xd'");
    if (!(g.p_min <= g.p_gen && g.p_gen <= g.p_max))
      add(tag + ".p_gen", "p_min <= p_gen <= p_max",
          tag + " dispatch outside limits");
  }

  for (std::size_t i = 0; i < c.branches.size(); ++i) {
    const Branch& br = c.branches[i];
    const std::string tag = "branch[" + std::to_string(i) + "]";
    if (!ids.count(br.from_bus))
      add(tag + ".from_bus", "branch references an existing bus",
          tag + " points at unknown bus " + std::to_string(br.from_bus));
    if (!ids.count(br.to_bus))
      add(tag + ".to_bus", "branch references an existing bus",
          tag + " points at unknown bus " + std::to_string(br.to_bus));
    if (br.from_bus == br.to_bus)
      add(tag, "from_bus != to_bus", tag + " is a self-loop");
    if (br.x == 0.0)
      add(tag + ".x", "x != 0", tag + " has zero reactance");
  }

  return out;
}

}  // namespace gridssa
