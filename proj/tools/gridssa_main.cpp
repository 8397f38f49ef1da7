// Command-line front end: data generation, training, evaluation and the
// experiment sweeps, all behind deterministic seeds and versioned files.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gridssa/case_format.hpp"
#include "gridssa/errors.hpp"
#include "gridssa/features.hpp"
#include "gridssa/grid_graph.hpp"
#include "gridssa/pipeline.hpp"
#include "gridssa/reports.hpp"

namespace fs = std::filesystem;
using namespace gridssa;

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stoi(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stod(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

void write_report(const fs::path& dir, const std::string& name,
                  const Table& t) {
  fs::create_directories(dir);
  write_file((dir / (name + ".csv")).string(), to_csv(t));
  write_file((dir / (name + ".json")).string(), to_json(t));
}

GridCase load_case(const std::string& path) {
  return parse_case(read_file(path));
}

struct CommonArgs {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

struct TrainArgs {
  std::string case_path, dataset_path;
  int k = 3;
  int agg_nodes = 1;
  std::string nodes;             // explicit comma list, empty = auto
  std::string spec = "2,4,5,1";  // conv_filters, fc1, fc2, fc3
  int kernel = 3;
  double lr = 1e-4;
  int batch = 128;
  int epochs = 2500;
  std::string split = "0.75,0.15,0.10";
  bool no_standardize = false;
  double decision_threshold = 0.5;
};

TrainRunConfig make_train_config(const TrainArgs& a, std::uint64_t seed) {
  TrainRunConfig cfg;
  const auto spec = parse_int_list(a.spec);
  if (spec.size() != 4)
    throw ValidationError("--spec wants four comma-separated sizes");
  cfg.conv_filters = spec[0];
  cfg.fc_sizes = {spec[1], spec[2], spec[3]};
  cfg.conv_kernel = a.kernel;
  cfg.k = a.k;
  cfg.n_agg_nodes = a.agg_nodes;
  if (!a.nodes.empty()) cfg.nodes = parse_int_list(a.nodes);
  cfg.train.lr = a.lr;
  cfg.train.batch_size = a.batch;
  cfg.train.epochs = a.epochs;
  cfg.train.seed = seed;
  const auto split = parse_double_list(a.split);
  if (split.size() != 3)
    throw ValidationError("--split wants three comma-separated fractions");
  cfg.train.split = {split[0], split[1], split[2]};
  cfg.train.standardize = !a.no_standardize;
  cfg.train.decision_threshold = a.decision_threshold;
  return cfg;
}

std::string metrics_cells(const Metrics& m, Table& t,
                          std::vector<std::string> prefix) {
  prefix.push_back(fmt_g17(m.accuracy.value_or(-1)));
  prefix.push_back(m.recall ? fmt_g17(*m.recall) : "-");
  prefix.push_back(m.specificity ? fmt_g17(*m.specificity) : "-");
  prefix.push_back(std::to_string(m.tp));
  prefix.push_back(std::to_string(m.tn));
  prefix.push_back(std::to_string(m.fp));
  prefix.push_back(std::to_string(m.fn));
  t.add_row(prefix);
  return {};
}

int run(int argc, char** argv) {
  CLI::App app{"power-grid small-signal security toolkit"};
  app.fallthrough();
  app.set_config("--config", "", "key=value config mirroring every flag");

  CommonArgs common;
  app.add_option("--seed", common.seed, "global RNG seed")
      ->capture_default_str();
  app.add_option("--out", common.out_dir, "output directory")
      ->capture_default_str();

  // ---- generate ----
  auto* gen = app.add_subcommand(
      "generate", "sample operating points and label them via N-1 analysis");
  struct {
    std::string case_path;
    int points = 200;
    double lo = 0.7, hi = 1.5;
    double threshold = 0.03;
    int k = 3, agg_nodes = 1;
    int cap_factor = 10;
  } g;
  gen->add_option("--case", g.case_path, "case file")->required();
  gen->add_option("--points", g.points, "kept samples wanted")
      ->capture_default_str();
  gen->add_option("--scale-lo", g.lo, "low scaling factor")
      ->capture_default_str();
  gen->add_option("--scale-hi", g.hi, "high scaling factor")
      ->capture_default_str();
  gen->add_option("--threshold", g.threshold, "damping-ratio threshold")
      ->capture_default_str();
  gen->add_option("--k", g.k, "aggregation length (provenance)")
      ->capture_default_str();
  gen->add_option("--agg-nodes", g.agg_nodes,
                  "aggregation node count (provenance)")
      ->capture_default_str();
  gen->add_option("--cap-factor", g.cap_factor, "draw cap multiplier")
      ->capture_default_str();

  // ---- train ----
  auto* tr = app.add_subcommand("train", "train the classifier");
  TrainArgs t;
  tr->add_option("--case", t.case_path, "case file")->required();
  tr->add_option("--dataset", t.dataset_path, "dataset file")->required();
  tr->add_option("--k", t.k, "aggregation length")->capture_default_str();
  tr->add_option("--agg-nodes", t.agg_nodes, "aggregation node count")
      ->capture_default_str();
  tr->add_option("--nodes", t.nodes, "explicit aggregation nodes (comma)");
  tr->add_option("--spec", t.spec, "conv_filters,fc1,fc2,fc3")
      ->capture_default_str();
  tr->add_option("--kernel", t.kernel, "conv kernel width")
      ->capture_default_str();
  tr->add_option("--lr", t.lr, "learning rate")->capture_default_str();
  tr->add_option("--batch", t.batch, "batch size")->capture_default_str();
  tr->add_option("--epochs", t.epochs, "training epochs")
      ->capture_default_str();
  tr->add_option("--split", t.split, "train,val,test fractions")
      ->capture_default_str();
  tr->add_flag("--no-standardize", t.no_standardize,
               "disable frozen input standardization");
  tr->add_option("--decision-threshold", t.decision_threshold,
                 "sigmoid decision threshold")
      ->capture_default_str();

  // ---- evaluate ----
  auto* ev = app.add_subcommand("evaluate", "metrics of a trained model");
  struct {
    std::string case_path, dataset_path, model_path;
    std::string on = "test";
    std::string split = "0.75,0.15,0.10";
  } e;
  ev->add_option("--case", e.case_path, "case file")->required();
  ev->add_option("--dataset", e.dataset_path, "dataset file")->required();
  ev->add_option("--model", e.model_path, "model file")->required();
  ev->add_option("--on", e.on, "split: train|val|test|all")
      ->capture_default_str();
  ev->add_option("--split", e.split, "train,val,test fractions")
      ->capture_default_str();

  // ---- assess ----
  auto* as = app.add_subcommand("assess", "classify operating points");
  struct {
    std::string case_path, model_path, points_path;
    int solve = 0;
    bool exact = false;
    double threshold = 0.03;
    double lo = 0.7, hi = 1.5;
    std::optional<int> k;
    std::string nodes;
  } a;
  as->add_option("--case", a.case_path, "case file")->required();
  as->add_option("--model", a.model_path, "model file")->required();
  as->add_option("--points", a.points_path,
                 "dataset file of stored operating points");
  as->add_option("--solve", a.solve, "solve N fresh scaled points instead");
  as->add_flag("--exact", a.exact, "also run the exact contingency labeling");
  as->add_option("--threshold", a.threshold, "damping threshold for --exact")
      ->capture_default_str();
  as->add_option("--scale-lo", a.lo, "scaling low (with --solve)")
      ->capture_default_str();
  as->add_option("--scale-hi", a.hi, "scaling high (with --solve)")
      ->capture_default_str();
  as->add_option("--k", a.k, "expected aggregation length (checked)");
  as->add_option("--nodes", a.nodes, "expected aggregation nodes (checked)");

  // ---- sweep-k ----
  auto* sk = app.add_subcommand("sweep-k", "accuracy across aggregation lengths");
  struct {
    std::string case_path, dataset_path;
    std::string k_list = "1,2,3,4,5";
    int repeats = 4;
  } s;
  TrainArgs st;  // shared training flags
  sk->add_option("--case", s.case_path, "case file")->required();
  sk->add_option("--dataset", s.dataset_path, "dataset file")->required();
  sk->add_option("--k-list", s.k_list, "comma list of K values")
      ->capture_default_str();
  sk->add_option("--repeats", s.repeats, "training repeats per K")
      ->capture_default_str();
  sk->add_option("--spec", st.spec, "conv_filters,fc1,fc2,fc3")
      ->capture_default_str();
  sk->add_option("--kernel", st.kernel, "conv kernel width")
      ->capture_default_str();
  sk->add_option("--agg-nodes", st.agg_nodes, "aggregation node count")
      ->capture_default_str();
  sk->add_option("--nodes", st.nodes, "explicit aggregation nodes");
  sk->add_option("--lr", st.lr, "learning rate")->capture_default_str();
  sk->add_option("--batch", st.batch, "batch size")->capture_default_str();
  sk->add_option("--epochs", st.epochs, "training epochs")
      ->capture_default_str();
  sk->add_option("--split", st.split, "split fractions")
      ->capture_default_str();

  // ---- missing-data ----
  auto* md = app.add_subcommand("missing-data",
                                "robustness to unobserved buses");
  struct {
    std::string case_path, dataset_path, model_path;
    double budget = 0.3;
    std::string fractions = "0,0.1,0.2";
    std::string split = "0.75,0.15,0.10";
  } m;
  md->add_option("--case", m.case_path, "case file")->required();
  md->add_option("--dataset", m.dataset_path, "dataset file")->required();
  md->add_option("--model", m.model_path, "model file")->required();
  md->add_option("--budget", m.budget, "PMU placement budget")
      ->capture_default_str();
  md->add_option("--fractions", m.fractions, "missing fractions (comma)")
      ->capture_default_str();
  md->add_option("--split", m.split, "split fractions")
      ->capture_default_str();

  // ---- placement ----
  auto* pl = app.add_subcommand("placement", "centrality-based PMU placement");
  struct {
    std::string case_path;
    double budget = 0.3;
  } p;
  pl->add_option("--case", p.case_path, "case file")->required();
  pl->add_option("--budget", p.budget, "fraction of buses")
      ->capture_default_str();

  // ---- bench ----
  auto* bn = app.add_subcommand("bench", "inference latency");
  struct {
    std::string case_path, dataset_path, model_path;
    int batch = 1;
    int repeats = 50;
  } b;
  bn->add_option("--case", b.case_path, "case file")->required();
  bn->add_option("--dataset", b.dataset_path, "dataset file")->required();
  bn->add_option("--model", b.model_path, "model file")->required();
  bn->add_option("--batch", b.batch, "batch size")->capture_default_str();
  bn->add_option("--repeats", b.repeats, "timed repeats")
      ->capture_default_str();

  app.require_subcommand(1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);  // prints help, exits 0
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 1;  // usage error
  }
  const fs::path out_dir(common.out_dir);

  if (*gen) {
    const GridCase c = load_case(g.case_path);
    GenerateConfig cfg;
    cfg.n_points = g.points;
    cfg.scale_lo = g.lo;
    cfg.scale_hi = g.hi;
    cfg.threshold = g.threshold;
    cfg.seed = common.seed;
    cfg.k = g.k;
    cfg.n_agg_nodes = g.agg_nodes;
    cfg.draw_cap_factor = g.cap_factor;
    GenerateStats stats;
    const Dataset d = generate_dataset(c, cfg, &stats);
    fs::create_directories(out_dir);
    write_file((out_dir / "dataset.txt").string(), serialize_dataset(d));

    Table rpt;
    rpt.title = "dataset generation";
    rpt.columns = {"points",  "draws",  "non_converged", "limit_violating",
                   "secure",  "insecure", "secure_fraction", "threshold",
                   "scale_lo", "scale_hi", "seed"};
    rpt.add_row({std::to_string(stats.kept), std::to_string(stats.draws),
                 std::to_string(stats.discarded_non_converged),
                 std::to_string(stats.discarded_limit_violation),
                 std::to_string(stats.secure), std::to_string(stats.insecure),
                 fmt_g17(static_cast<double>(stats.secure) /
                         std::max(1, stats.kept)),
                 fmt_g17(cfg.threshold), fmt_g17(cfg.scale_lo),
                 fmt_g17(cfg.scale_hi), std::to_string(cfg.seed)});
    write_report(out_dir, "generate_report", rpt);
    std::cout << render_text(rpt);
    return 0;
  }

  if (*tr) {
    const GridCase c = load_case(t.case_path);
    const Dataset d = parse_dataset(read_file(t.dataset_path));
    const TrainRunConfig cfg = make_train_config(t, common.seed);
    const TrainRunResult r = run_training(c, d, cfg);

    fs::create_directories(out_dir);
    write_file((out_dir / "model.bin").string(), serialize_bundle(r.bundle));

    Table hist;
    hist.title = "training history";
    hist.columns = {"epoch", "train_loss", "train_acc", "val_loss",
                    "val_acc"};
    for (const EpochStats& ep : r.history)
      hist.add_row({std::to_string(ep.epoch), fmt_g17(ep.train_loss),
                    fmt_g17(ep.train_acc), fmt_g17(ep.val_loss),
                    fmt_g17(ep.val_acc)});
    write_file((out_dir / "history.csv").string(), to_csv(hist));

    Table rpt;
    rpt.title = "training summary";
    rpt.columns = {"parameters", "best_epoch", "nodes", "k",
                   "test_accuracy", "test_recall", "test_specificity",
                   "tp", "tn", "fp", "fn"};
    std::string nodes_str;
    for (std::size_t i = 0; i < r.nodes_used.size(); ++i)
      nodes_str += (i ? "|" : "") + std::to_string(r.nodes_used[i]);
    metrics_cells(r.test_metrics, rpt,
                  {std::to_string(r.bundle.params.parameter_count()),
                   std::to_string(r.best_epoch), nodes_str,
                   std::to_string(cfg.k)});
    write_report(out_dir, "train_report", rpt);
    std::cout << render_text(rpt);
    return 0;
  }

  if (*ev) {
    const GridCase c = load_case(e.case_path);
    const Dataset d = parse_dataset(read_file(e.dataset_path));
    const ModelBundle bundle = parse_bundle(read_file(e.model_path));
    check_compatibility(bundle, c, d.case_hash, std::nullopt, {});
    TrainConfig cfg;
    cfg.seed = common.seed;
    const auto split = parse_double_list(e.split);
    if (split.size() != 3)
      throw ValidationError("--split wants three fractions");
    cfg.split = {split[0], split[1], split[2]};
    const Metrics metrics = evaluate_model(c, d, bundle, cfg, e.on);

    Table rpt;
    rpt.title = "evaluation (" + e.on + ")";
    rpt.columns = {"split", "accuracy", "recall", "specificity",
                   "tp", "tn", "fp", "fn"};
    metrics_cells(metrics, rpt, {e.on});
    write_report(out_dir, "evaluate_report", rpt);
    std::cout << render_text(rpt);
    return 0;
  }

  if (*as) {
    const GridCase c = load_case(a.case_path);
    const std::string case_text = serialize_case(c);
    const ModelBundle bundle = parse_bundle(read_file(a.model_path));
    check_compatibility(bundle, c, fnv1a64(case_text), a.k,
                        a.nodes.empty() ? std::vector<int>{}
                                        : parse_int_list(a.nodes));

    std::vector<Verdict> verdicts;
    if (!a.points_path.empty()) {
      const Dataset pts = parse_dataset(read_file(a.points_path));
      check_compatibility(bundle, c, pts.case_hash, std::nullopt, {});
      verdicts = assess_points(c, pts, bundle, a.exact);
    } else if (a.solve > 0) {
      GenerateConfig cfg;
      cfg.scale_lo = a.lo;
      cfg.scale_hi = a.hi;
      cfg.threshold = a.threshold;
      cfg.seed = common.seed;
      verdicts = assess_fresh(c, bundle, cfg, a.solve, a.exact);
    } else {
      throw ValidationError("assess needs --points or --solve N");
    }

    Table rpt;
    rpt.title = "assessment";
    rpt.columns = {"point", "probability", "verdict", "exact", "agree"};
    int agreements = 0, with_exact = 0;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
      const Verdict& v = verdicts[i];
      std::string exact = "-", agree = "-";
      if (v.exact_secure) {
        exact = *v.exact_secure ? "secure" : "insecure";
        agree = v.secure == *v.exact_secure ? "yes" : "no";
        ++with_exact;
        agreements += v.secure == *v.exact_secure;
      }
      rpt.add_row({std::to_string(i), fmt_g17(v.probability),
                   v.secure ? "secure" : "insecure", exact, agree});
    }
    write_report(out_dir, "assess_report", rpt);
    std::cout << render_text(rpt);
    if (with_exact > 0)
      std::cout << "exact agreement: " << agreements << "/" << with_exact
                << "\n";
    return 0;
  }

  if (*sk) {
    const GridCase c = load_case(s.case_path);
    const Dataset d = parse_dataset(read_file(s.dataset_path));
    TrainRunConfig base = make_train_config(st, common.seed);
    const std::vector<int> ks = parse_int_list(s.k_list);
    const auto rows = k_sweep(c, d, base, ks, s.repeats);

    Table rpt;
    rpt.title = "aggregation-length sweep";
    rpt.columns = {"k", "parameters", "mean_test_accuracy",
                   "std_test_accuracy"};
    for (const KSweepRow& r : rows)
      rpt.add_row({std::to_string(r.k), std::to_string(r.param_count),
                   fmt_g17(r.mean_acc),
                   r.std_acc ? fmt_g17(*r.std_acc) : "-"});
    write_report(out_dir, "sweep_k", rpt);
    std::cout << render_text(rpt);
    return 0;
  }

  if (*md) {
    const GridCase c = load_case(m.case_path);
    const Dataset d = parse_dataset(read_file(m.dataset_path));
    const ModelBundle bundle = parse_bundle(read_file(m.model_path));
    check_compatibility(bundle, c, d.case_hash, std::nullopt, {});
    TrainConfig cfg;
    cfg.seed = common.seed;
    const auto split = parse_double_list(m.split);
    if (split.size() != 3)
      throw ValidationError("--split wants three fractions");
    cfg.split = {split[0], split[1], split[2]};
    const auto rows = missing_data_experiment(
        c, d, bundle, m.budget, parse_double_list(m.fractions), cfg);

    Table rpt;
    rpt.title = "missing-data robustness";
    rpt.columns = {"fraction", "unobserved", "accuracy", "recall",
                   "specificity", "tp", "tn", "fp", "fn"};
    for (const MissingDataRow& r : rows)
      metrics_cells(r.metrics, rpt,
                    {fmt_g17(r.fraction), std::to_string(r.unobserved_count)});
    write_report(out_dir, "missing_data", rpt);
    std::cout << render_text(rpt);
    return 0;
  }

  if (*pl) {
    const GridCase c = load_case(p.case_path);
    const GridGraph graph = build_graph(c);
    const auto placed = pmu_placement(graph, p.budget);
    const auto closeness = closeness_centrality(graph);

    Table rpt;
    rpt.title = "PMU placement (budget " + fmt_fixed(p.budget, 2) + ")";
    rpt.columns = {"node", "bus_id", "closeness", "degree"};
    for (int v : placed)
      rpt.add_row({std::to_string(v), std::to_string(c.buses[v].id),
                   fmt_g17(closeness[v]), std::to_string(graph.degree(v))});
    write_report(out_dir, "placement", rpt);
    std::cout << render_text(rpt);
    return 0;
  }

  if (*bn) {
    const GridCase c = load_case(b.case_path);
    const Dataset d = parse_dataset(read_file(b.dataset_path));
    const ModelBundle bundle = parse_bundle(read_file(b.model_path));
    check_compatibility(bundle, c, d.case_hash, std::nullopt, {});
    const BenchReport rep =
        benchmark_inference(c, d, bundle, b.batch, b.repeats);

    Table rpt;
    rpt.title = "inference latency";
    rpt.columns = {"batch", "repeats", "median_ms", "p95_ms",
                   "feature_ms_per_sample", "forward_ms_per_sample"};
    rpt.add_row({std::to_string(rep.batch), std::to_string(rep.repeats),
                 fmt_g17(rep.median_ms), fmt_g17(rep.p95_ms),
                 fmt_g17(rep.feature_ms_per_sample),
                 fmt_g17(rep.forward_ms_per_sample)});
    write_report(out_dir, "bench", rpt);
    std::cout << render_text(rpt);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const IslandingError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const DisconnectedNetworkError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
