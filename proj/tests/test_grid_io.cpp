#include <cmath>
#include <cstring>

#include "doctest.h"
#include "gridssa/case_format.hpp"
#include "gridssa/errors.hpp"
#include "gridssa/grid_case.hpp"
#include "gridssa/grid_graph.hpp"
#include "gridssa/rng.hpp"
#include "oracles.hpp"

using namespace gridssa;

namespace {

const char* kMinimalTwoBus = R"(BASE_MVA
100
BUS
1 SLACK 0 0 1 0.9 1.1
2 PQ 0.2 0.1 - 0.9 1.1
GEN
GEN_DYNAMICS
BRANCH
1 2 0.01 0.1 0 0
)";

GridCase random_case(Rng& rng) {
  GridCase c;
  c.base_mva = 100.0;
  const int n = 2 + static_cast<int>(rng.below(6));
  for (int i = 0; i < n; ++i) {
    Bus b;
    b.id = i + 1;
    b.kind = i == 0 ? BusKind::Slack
                    : (rng.uniform() < 0.3 ? BusKind::PV : BusKind::PQ);
    b.p_load = rng.uniform(0.0, 1.0);
    b.q_load = rng.uniform(-0.2, 0.4);
    b.v_min = 0.9;
    b.v_max = 1.1;
    if (b.kind != BusKind::PQ) b.v_setpoint = rng.uniform(0.95, 1.05);
    c.buses.push_back(b);
  }
  for (int i = 1; i < n; ++i) {  // spanning tree plus extras
    Branch br;
    br.from_bus = 1 + static_cast<int>(rng.below(i));
    br.to_bus = i + 1;
    br.r = rng.uniform(0.0, 0.02);
    br.x = rng.uniform(0.05, 0.3);
    br.b_shunt = rng.uniform(0.0, 0.05);
    br.rating = 0.0;
    c.branches.push_back(br);
  }
  Generator g;
  g.bus = 1;
  g.p_gen = rng.uniform(0.0, 1.0);
  g.p_min = 0.0;
  g.p_max = 2.0;
  g.inertia_h = rng.uniform(2.0, 6.0);
  g.damping_d = rng.uniform(0.5, 3.0);
  g.xd_prime = rng.uniform(0.1, 0.4);
  c.generators.push_back(g);
  return c;
}

}  // namespace

TEST_CASE("parse minimal two-bus case") {
  const GridCase c = parse_case(kMinimalTwoBus);
  CHECK(c.buses.size() == 2);
  CHECK(c.branches.size() == 1);
  CHECK(c.base_mva == 100.0);
  CHECK(c.buses[0].kind == BusKind::Slack);
  CHECK(c.buses[1].kind == BusKind::PQ);
  CHECK(!c.buses[1].v_setpoint.has_value());
  CHECK(c.buses[0].v_setpoint.value() == 1.0);
}

TEST_CASE("parse rejects an unknown bus reference") {
  std::string text = kMinimalTwoBus;
  const auto pos = text.find("1 2 0.01");
  text.replace(pos, 3, "1 99");
  CHECK_THROWS_WITH_AS(parse_case(text),
                       doctest::Contains("99"), ValidationError);
}

TEST_CASE("parse rejects unknown sections") {
  std::string text = kMinimalTwoBus;
  text += "SHUNTS\n1 0.3\n";
  CHECK_THROWS_AS(parse_case(text), ParseError);
}

TEST_CASE("parse reports line and column for bad numbers") {
  const char* text = R"(BASE_MVA
abc
BUS
1 SLACK 0 0 1 0.9 1.1
GEN
GEN_DYNAMICS
BRANCH
)";
  try {
    parse_case(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 1);
  }
}

TEST_CASE("missing generator dynamics is a parse error") {
  const char* text = R"(BASE_MVA
100
BUS
1 SLACK 0 0 1 0.9 1.1
2 PQ 0 0 - 0.9 1.1
GEN
1 0.5 0 1
GEN_DYNAMICS
BRANCH
1 2 0 0.1 0 0
)";
  CHECK_THROWS_AS(parse_case(text), ParseError);
}

TEST_CASE("two slack buses rejected at parse time") {
  std::string text = kMinimalTwoBus;
  const auto pos = text.find("2 PQ");
  std::string t2(text);
  t2.replace(pos, 4, "2 SLACK");
  // SLACK needs a setpoint; give it one to isolate the slack-count rule
  const auto dash = t2.find('-');
  t2.replace(dash, 1, "1");
  CHECK_THROWS_WITH_AS(parse_case(t2), doctest::Contains("slack"),
                       ValidationError);
}

TEST_CASE("validate_case reports zero reactance and slack count") {
  GridCase c = parse_case(kMinimalTwoBus);
  CHECK(validate_case(c).empty());

  GridCase bad = c;
  bad.branches[0].x = 0.0;
  auto violations = validate_case(bad);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].rule == "x != 0");

  GridCase no_slack = c;
  no_slack.buses[0].kind = BusKind::PV;
  violations = validate_case(no_slack);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].rule == "exactly one bus has type SLACK");
}

TEST_CASE("round-trip: serialize then parse reproduces the case exactly") {
  auto equal_cases = [](const GridCase& a, const GridCase& b) {
    if (a.buses.size() != b.buses.size()) return false;
    if (a.branches.size() != b.branches.size()) return false;
    if (a.generators.size() != b.generators.size()) return false;
    if (a.base_mva != b.base_mva) return false;
    for (std::size_t i = 0; i < a.buses.size(); ++i) {
      const Bus &x = a.buses[i], &y = b.buses[i];
      if (x.id != y.id || x.kind != y.kind || x.p_load != y.p_load ||
          x.q_load != y.q_load || x.v_min != y.v_min || x.v_max != y.v_max ||
          x.v_setpoint != y.v_setpoint)
        return false;
    }
    for (std::size_t i = 0; i < a.generators.size(); ++i) {
      const Generator &x = a.generators[i], &y = b.generators[i];
      if (x.bus != y.bus || x.p_gen != y.p_gen || x.p_min != y.p_min ||
          x.p_max != y.p_max || x.inertia_h != y.inertia_h ||
          x.damping_d != y.damping_d || x.xd_prime != y.xd_prime)
        return false;
    }
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
      const Branch &x = a.branches[i], &y = b.branches[i];
      if (x.from_bus != y.from_bus || x.to_bus != y.to_bus || x.r != y.r ||
          x.x != y.x || x.b_shunt != y.b_shunt || x.rating != y.rating)
        return false;
    }
    return true;
  };

  SUBCASE("two-bus") {
    const GridCase c = parse_case(kMinimalTwoBus);
    CHECK(equal_cases(c, parse_case(serialize_case(c))));
  }
  SUBCASE("awkward binary value survives") {
    GridCase c = parse_case(kMinimalTwoBus);
    c.buses[1].p_load = 0.1 + std::ldexp(1.0, -52);
    const GridCase back = parse_case(serialize_case(c));
    CHECK(std::memcmp(&back.buses[1].p_load, &c.buses[1].p_load,
                      sizeof(double)) == 0);
  }
  SUBCASE("random cases round-trip and parsing is deterministic") {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
      const GridCase c = random_case(rng);
      const std::string text = serialize_case(c);
      CHECK(equal_cases(c, parse_case(text)));
      CHECK(serialize_case(parse_case(text)) == text);
    }
  }
}

TEST_CASE("build_graph shapes") {
  SUBCASE("triangle gives the complete 3-node shift") {
    GridCase c = parse_case(kMinimalTwoBus);
    c.buses.push_back({3, BusKind::PQ, 0, 0, std::nullopt, 0.9, 1.1});
    c.branches.push_back({2, 3, 0.01, 0.1, 0, 0});
    c.branches.push_back({1, 3, 0.01, 0.1, 0, 0});
    const GridGraph g = build_graph(c);
    const Eigen::MatrixXd s = g.shift();
    CHECK(s.rows() == 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(s(i, j) == (i == j ? 0.0 : 1.0));
  }
  SUBCASE("path graph keeps non-adjacent entries zero") {
    GridCase c = parse_case(kMinimalTwoBus);
    c.buses.push_back({3, BusKind::PQ, 0, 0, std::nullopt, 0.9, 1.1});
    c.branches.push_back({2, 3, 0.01, 0.1, 0, 0});
    const Eigen::MatrixXd s = build_graph(c).shift();
    CHECK(s(0, 2) == 0.0);
    CHECK(s(0, 1) == 1.0);
  }
  SUBCASE("parallel branches collapse to one edge") {
    GridCase c = parse_case(kMinimalTwoBus);
    c.branches.push_back({1, 2, 0.02, 0.2, 0, 0});
    const GridGraph g = build_graph(c);
    CHECK(g.edges.size() == 1);
    CHECK(g.shift()(0, 1) == 1.0);
    CHECK(c.branches.size() == 2);  // both stay as contingencies
  }
}

TEST_CASE("graph symmetry holds for random cases") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const GridCase c = random_case(rng);
    const Eigen::MatrixXd s = build_graph(c).shift();
    CHECK(s.isApprox(s.transpose()));
    CHECK(s.diagonal().isZero());
  }
}

TEST_CASE("bundled 68-bus fixture matches its advertised size") {
  const GridCase c = oracles::load_fixture("ieee68.case");
  CHECK(c.buses.size() == 68);
  CHECK(c.branches.size() == 86);
  CHECK(c.generators.size() == 16);
  CHECK(validate_case(c).empty());
  CHECK(is_connected(build_graph(c)));
}

TEST_CASE("bundled 140-bus fixture matches its advertised size") {
  const GridCase c = oracles::load_fixture("npcc140.case");
  CHECK(c.buses.size() == 140);
  CHECK(c.branches.size() == 233);
  CHECK(c.generators.size() == 48);
  CHECK(validate_case(c).empty());
  CHECK(is_connected(build_graph(c)));
}
