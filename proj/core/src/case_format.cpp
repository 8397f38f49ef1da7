#include "gridssa/case_format.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "gridssa/errors.hpp"

namespace gridssa {
namespace {

struct Token {
  std::string text;
  int line;
  int column;
};

// Splits into comment-stripped, tokenized lines; blank lines dropped.
std::vector<std::vector<Token>> tokenize(std::string_view text) {
  std::vector<std::vector<Token>> lines;
  int line_no = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      if (std::isspace(static_cast<unsigned char>(line[i]))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < line.size() &&
             !std::isspace(static_cast<unsigned char>(line[j])))
        ++j;
      toks.push_back({std::string(line.substr(i, j - i)), line_no,
                      static_cast<int>(i) + 1});
      i = j;
    }
    if (!toks.empty()) lines.push_back(std::move(toks));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
    ++line_no;
  }
  return lines;
}

double parse_double(const Token& t) {
  const char* begin = t.text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + t.text.size())
    throw ParseError("expected a number, got '" + t.text + "'", t.line,
                     t.column);
  return v;
}

int parse_int(const Token& t) {
  const char* begin = t.text.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end != begin + t.text.size())
    throw ParseError("expected an integer, got '" + t.text + "'", t.line,
                     t.column);
  return static_cast<int>(v);
}

BusKind parse_kind(const Token& t) {
  if (t.text == "SLACK") return BusKind::Slack;
  if (t.text == "PV") return BusKind::PV;
  if (t.text == "PQ") return BusKind::PQ;
  throw ParseError("unknown bus kind '" + t.text + "'", t.line, t.column);
}

void expect_columns(const std::vector<Token>& row, std::size_t n,
                    const char* section) {
  if (row.size() != n)
    throw ParseError(std::string(section) + " row needs " +
                         std::to_string(n) + " columns, got " +
                         std::to_string(row.size()),
                     row.front().line, row.front().column);
}

bool is_section_header(const std::string& s) {
  return s == "BASE_MVA" || s == "BUS" || s == "GEN" || s == "GEN_DYNAMICS" ||
         s == "BRANCH";
}

// A lone all-caps identifier is someone trying to open a section.
bool looks_like_header(const std::string& s) {
  if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0])))
    return false;
  for (char ch : s)
    if (!std::isupper(static_cast<unsigned char>(ch)) && ch != '_' &&
        !std::isdigit(static_cast<unsigned char>(ch)))
      return false;
  return true;
}

struct DynRow {
  int bus;
  double inertia_h, damping_d, xd_prime;
  int line;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

GridCase parse_case(std::string_view text) {
  const auto lines = tokenize(text);
  GridCase c;
  c.base_mva = 0.0;
  std::vector<DynRow> dynamics;
  std::unordered_set<std::string> seen;
  std::string section;
  bool have_base = false;

  for (const auto& row : lines) {
    const Token& head = row.front();
    if (row.size() == 1 && is_section_header(head.text)) {
      if (!seen.insert(head.text).second)
        throw ParseError("duplicate section " + head.text, head.line,
                         head.column);
      section = head.text;
      continue;
    }
    if (row.size() == 1 && looks_like_header(head.text))
      throw ParseError("unknown section " + head.text, head.line,
                       head.column);
    if (section.empty())
      throw ParseError("data before any section header", head.line,
                       head.column);

    if (section == "BASE_MVA") {
      expect_columns(row, 1, "BASE_MVA");
      if (have_base)
        throw ParseError("BASE_MVA given twice", head.line, head.column);
      c.base_mva = parse_double(row[0]);
      have_base = true;
    } else if (section == "BUS") {
      expect_columns(row, 7, "BUS");
      Bus b;
      b.id = parse_int(row[0]);
      b.kind = parse_kind(row[1]);
      b.p_load = parse_double(row[2]);
      b.q_load = parse_double(row[3]);
      if (row[4].text != "-") b.v_setpoint = parse_double(row[4]);
      b.v_min = parse_double(row[5]);
      b.v_max = parse_double(row[6]);
      c.buses.push_back(b);
    } else if (section == "GEN") {
      expect_columns(row, 4, "GEN");
      Generator g;
      g.bus = parse_int(row[0]);
      g.p_gen = parse_double(row[1]);
      g.p_min = parse_double(row[2]);
      g.p_max = parse_double(row[3]);
      c.generators.push_back(g);
    } else if (section == "GEN_DYNAMICS") {
      expect_columns(row, 4, "GEN_DYNAMICS");
      dynamics.push_back({parse_int(row[0]), parse_double(row[1]),
                          parse_double(row[2]), parse_double(row[3]),
                          head.line});
    } else if (section == "BRANCH") {
      expect_columns(row, 6, "BRANCH");
      Branch br;
      br.from_bus = parse_int(row[0]);
      br.to_bus = parse_int(row[1]);
      br.r = parse_double(row[2]);
      br.x = parse_double(row[3]);
      br.b_shunt = parse_double(row[4]);
      br.rating = parse_double(row[5]);
      c.branches.push_back(br);
    }
  }

  if (!have_base) throw ParseError("missing BASE_MVA section", 1, 1);
  if (c.buses.empty()) throw ParseError("missing BUS section", 1, 1);

  // Dynamics pair up with GEN rows positionally; defaulting is forbidden.
  if (dynamics.size() != c.generators.size())
    throw ParseError("GEN_DYNAMICS has " + std::to_string(dynamics.size()) +
                         " rows for " + std::to_string(c.generators.size()) +
                         " generators",
                     1, 1);
  for (std::size_t i = 0; i < dynamics.size(); ++i) {
    if (dynamics[i].bus != c.generators[i].bus)
      throw ParseError("GEN_DYNAMICS row " + std::to_string(i + 1) +
                           " names bus " + std::to_string(dynamics[i].bus) +
                           " but GEN row " + std::to_string(i + 1) +
                           " names bus " +
                           std::to_string(c.generators[i].bus),
                       dynamics[i].line, 1);
    c.generators[i].inertia_h = dynamics[i].inertia_h;
    c.generators[i].damping_d = dynamics[i].damping_d;
    c.generators[i].xd_prime = dynamics[i].xd_prime;
  }

  const auto violations = validate_case(c);
  if (!violations.empty()) {
    std::string msg = "case violates invariants:";
    for (const auto& v : violations) msg += "\n  " + v.message;
    throw ValidationError(msg);
  }
  return c;
}

std::string serialize_case(const GridCase& c) {
  std::ostringstream out;
  out << "BASE_MVA\n" << format_double(c.base_mva) << "\n";
  out << "BUS\n# id kind p_load q_load v_setpoint v_min v_max\n";
  for (const Bus& b : c.buses) {
    out << b.id << ' ' << to_string(b.kind) << ' ' << format_double(b.p_load)
        << ' ' << format_double(b.q_load) << ' '
        << (b.v_setpoint ? format_double(*b.v_setpoint) : std::string("-"))
        << ' ' << format_double(b.v_min) << ' ' << format_double(b.v_max)
        << "\n";
  }
  out << "GEN\n# bus p_gen p_min p_max\n";
  for (const Generator& g : c.generators)
    out << g.bus << ' ' << format_double(g.p_gen) << ' '
        << format_double(g.p_min) << ' ' << format_double(g.p_max) << "\n";
  out << "GEN_DYNAMICS\n# bus inertia_h damping_d xd_prime\n";
  for (const Generator& g : c.generators)
    out << g.bus << ' ' << format_double(g.inertia_h) << ' '
        << format_double(g.damping_d) << ' ' << format_double(g.xd_prime)
        << "\n";
  out << "BRANCH\n# from to r x b_shunt rating\n";
  for (const Branch& br : c.branches)
    out << br.from_bus << ' ' << br.to_bus << ' ' << format_double(br.r)
        << ' ' << format_double(br.x) << ' ' << format_double(br.b_shunt)
        << ' ' << format_double(br.rating) << "\n";
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("short write to " + path);
}

}  // namespace gridssa
