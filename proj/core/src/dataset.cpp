#include "gridssa/dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "gridssa/errors.hpp"

namespace gridssa {
namespace {

constexpr char kMagic[] = "GRIDSSA DATASET v1";

void put_num(std::ostringstream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

struct Reader {
  std::istringstream in;
  int line_no = 0;
  std::string line;

  explicit Reader(const std::string& text) : in(text) {}

  std::istringstream next_line() {
    if (!std::getline(in, line))
      throw FormatError("dataset truncated at line " +
                        std::to_string(line_no + 1));
    ++line_no;
    return std::istringstream(line);
  }
};

template <class T>
T expect_field(std::istringstream& ls, const std::string& key, int line) {
  std::string k;
  T v{};
  if (!(ls >> k >> v) || k != key)
    throw FormatError("dataset line " + std::to_string(line) +
                      ": expected '" + key + " <value>'");
  return v;
}

// istream extraction rejects "nan"/"inf"; strtod accepts them.
double next_double(std::istringstream& ls, const std::string& what) {
  std::string tok;
  if (!(ls >> tok)) throw FormatError("dataset truncated in " + what);
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + tok.size())
    throw FormatError("dataset has a bad number '" + tok + "' in " + what);
  return v;
}

}  // namespace

std::string serialize_dataset(const Dataset& d) {
  std::ostringstream out;
  out << kMagic << "\n";
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(d.case_hash));
  out << "case_hash " << hex << "\n";
  out << "n_buses " << d.n_buses << "\n";
  out << "n_branches " << d.n_branches << "\n";
  out << "k " << d.k_gen << "\n";
  out << "nodes";
  for (int v : d.nodes_gen) out << ' ' << v;
  out << "\n";
  out << "threshold ";
  put_num(out, d.threshold);
  out << "\nseed " << d.seed << "\n";
  out << "samples " << d.samples.size() << "\n";

  for (const LabeledSample& s : d.samples) {
    out << s.label << ' ';
    put_num(out, s.min_zeta);
    for (int i = 0; i < s.signals.rows(); ++i)
      for (int j = 0; j < 3; ++j) {
        out << ' ';
        put_num(out, s.signals(i, j));
      }
    for (int b = 0; b < s.line_p.size(); ++b) {
      out << ' ';
      put_num(out, s.line_p[b]);
    }
    for (int b = 0; b < s.line_q.size(); ++b) {
      out << ' ';
      put_num(out, s.line_q[b]);
    }
    for (int b = 0; b < s.per_contingency.size(); ++b) {
      out << ' ';
      put_num(out, s.per_contingency[b]);
    }
    out << "\n";
  }
  return out.str();
}

Dataset parse_dataset(const std::string& text) {
  Reader r(text);
  {
    auto ls = r.next_line();
    if (r.line != kMagic)
      throw FormatError("not a dataset file or unsupported version");
  }
  Dataset d;
  {
    auto ls = r.next_line();
    std::string key, hex;
    if (!(ls >> key >> hex) || key != "case_hash")
      throw FormatError("dataset line 2: expected case_hash");
    try {
      d.case_hash = std::stoull(hex, nullptr, 16);
    } catch (const std::exception&) {
      throw FormatError("dataset line 2: bad case hash '" + hex + "'");
    }
  }
  {
    auto ls = r.next_line();
    d.n_buses = expect_field<int>(ls, "n_buses", r.line_no);
  }
  {
    auto ls = r.next_line();
    d.n_branches = expect_field<int>(ls, "n_branches", r.line_no);
  }
  {
    auto ls = r.next_line();
    d.k_gen = expect_field<int>(ls, "k", r.line_no);
  }
  {
    auto ls = r.next_line();
    std::string key;
    ls >> key;
    if (key != "nodes")
      throw FormatError("dataset line " + std::to_string(r.line_no) +
                        ": expected nodes");
    int v;
    while (ls >> v) d.nodes_gen.push_back(v);
  }
  {
    auto ls = r.next_line();
    d.threshold = expect_field<double>(ls, "threshold", r.line_no);
  }
  {
    auto ls = r.next_line();
    d.seed = expect_field<std::uint64_t>(ls, "seed", r.line_no);
  }
  std::size_t count = 0;
  {
    auto ls = r.next_line();
    count = expect_field<std::size_t>(ls, "samples", r.line_no);
  }

  d.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto ls = r.next_line();
    const std::string tag = "sample " + std::to_string(i);
    LabeledSample s;
    if (!(ls >> s.label)) throw FormatError("dataset " + tag + " malformed");
    s.min_zeta = next_double(ls, tag + " min_zeta");
    s.signals.resize(d.n_buses, 3);
    for (int row = 0; row < d.n_buses; ++row)
      for (int col = 0; col < 3; ++col)
        s.signals(row, col) = next_double(ls, tag + " signals");
    s.line_p.resize(d.n_branches);
    s.line_q.resize(d.n_branches);
    for (int b = 0; b < d.n_branches; ++b)
      s.line_p[b] = next_double(ls, tag + " line_p");
    for (int b = 0; b < d.n_branches; ++b)
      s.line_q[b] = next_double(ls, tag + " line_q");
    s.per_contingency.resize(d.n_branches);
    for (int b = 0; b < d.n_branches; ++b)
      s.per_contingency[b] = next_double(ls, tag + " contingency damping");
    std::string extra;
    if (ls >> extra)
      throw FormatError("dataset " + tag + " has trailing values");
    d.samples.push_back(std::move(s));
  }
  return d;
}

FeatureDataset featurize(const Dataset& d, const GridGraph& g,
                         const GridCase& c, const std::vector<int>& nodes,
                         int k_len, const std::set<int>* observed) {
  FeatureDataset out;
  out.provenance = d.case_hash ^ d.seed;
  out.samples.reserve(d.samples.size());
  for (const LabeledSample& s : d.samples) {
    Eigen::MatrixXd signals = s.signals;
    Eigen::VectorXd lp = s.line_p;
    Eigen::VectorXd lq = s.line_q;
    if (observed) {
      signals = mask_unobserved(signals, *observed);
      mask_line_flows(c, *observed, lp, lq);
    }
    TrainSample t;
    t.z = build_features(g, c, signals, lp, lq, nodes, k_len).z;
    t.label = s.label;
    out.samples.push_back(std::move(t));
  }
  return out;
}

}  // namespace gridssa
