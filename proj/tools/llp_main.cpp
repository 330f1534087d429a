// Command-line front end: dataset generation, training, the estimator
// variance lab, the exact-enumeration check suite, loss tracking, and the
// bag-size accuracy sweep. Every output embeds its resolved configuration
// and seed so a run can be reproduced byte-for-byte.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "llp/data.hpp"
#include "llp/harness.hpp"
#include "llp/model.hpp"
#include "llp/tables.hpp"
#include "llp/trainers.hpp"

namespace {

using namespace llp;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* flag) {
  std::vector<int> out;
  for (const std::string& item : split_list(s)) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": bad integer '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

std::vector<EstimatorKind> parse_kind_list(const std::string& s) {
  std::vector<EstimatorKind> out;
  for (const std::string& item : split_list(s)) {
    const auto k = parse_estimator_kind(item);
    if (!k) throw UsageError("--kinds: unknown estimator kind '" + item + "'");
    out.push_back(*k);
  }
  if (out.empty()) throw UsageError("--kinds: empty list");
  return out;
}

std::vector<TrainMethod> parse_method_list(const std::string& s) {
  std::vector<TrainMethod> out;
  for (const std::string& item : split_list(s)) {
    const auto m = parse_train_method(item);
    if (!m) throw UsageError("--methods: unknown method '" + item + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw UsageError("--methods: empty list");
  return out;
}

double parse_radius(const std::string& s) {
  if (s == "unbounded") return kInfinity;
  try {
    std::size_t pos = 0;
    const double r = std::stod(s, &pos);
    if (pos != s.size() || !(r > 0.0)) throw std::invalid_argument(s);
    return r;
  } catch (const std::exception&) {
    throw UsageError("--radius: expected a positive number or 'unbounded'");
  }
}

LabelColumn parse_label_column(const std::string& s) {
  try {
    std::size_t pos = 0;
    const int idx = std::stoi(s, &pos);
    if (pos == s.size()) return idx;
  } catch (const std::exception&) {
  }
  return s;
}

// ---------------------------------------------------------------------------
// Dataset source flags shared by train/track/sweep/gen.

struct DatasetFlags {
  std::string csv;
  std::string label_column = "-1";  // negative index counts from the end
  bool header = true;
  std::string gen;
  long n = 10000;
  int d = 2;
  double separation = 3.3;
  double positive_rate = 0.5;
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f) {
  cmd->add_option("--csv", f.csv, "load the dataset from a CSV file");
  cmd->add_option("--label-column", f.label_column,
                  "label column: header name or 0-based index; negative "
                  "counts from the end (default: last column)");
  cmd->add_option("--header", f.header, "CSV file has a header row")->capture_default_str();
  cmd->add_option("--gen", f.gen, "synthetic dataset: blobs | uniform_threshold")
      ->check(CLI::IsMember({"blobs", "uniform_threshold"}));
  cmd->add_option("--n", f.n, "generated dataset size")->capture_default_str();
  cmd->add_option("--d", f.d, "generated feature dimension (blobs)")->capture_default_str();
  cmd->add_option("--separation", f.separation,
                  "distance between blob centers")->capture_default_str();
  cmd->add_option("--positive-rate", f.positive_rate,
                  "positive-class rate (blobs)")->capture_default_str();
}

Dataset load_dataset(const DatasetFlags& f, std::uint64_t seed,
                     std::uint64_t salt) {
  const bool has_csv = !f.csv.empty();
  const bool has_gen = !f.gen.empty();
  if (has_csv == has_gen) {
    throw UsageError("exactly one dataset source required: --csv or --gen");
  }
  if (has_csv) {
    return load_csv(f.csv, parse_label_column(f.label_column), f.header);
  }
  Rng rng(mix_seed(seed, salt));
  if (f.gen == "blobs") {
    return gen_gaussian_blobs(f.n, f.d, f.separation, f.positive_rate, rng);
  }
  return gen_uniform_threshold(f.n, rng);
}

void emit_dataset_config(const DatasetFlags& f, ConfigMap& config) {
  if (!f.csv.empty()) {
    config["csv"] = f.csv;
    config["label-column"] = f.label_column;
    config["header"] = f.header ? "true" : "false";
  } else {
    config["gen"] = f.gen;
    config["n"] = std::to_string(f.n);
    if (f.gen == "blobs") {
      config["d"] = std::to_string(f.d);
      config["separation"] = to_string_shortest(f.separation);
      config["positive-rate"] = to_string_shortest(f.positive_rate);
    }
  }
}

// Population positive rate for --prior true.
double true_prior_of(const DatasetFlags& f, const Dataset& ds) {
  if (f.gen == "blobs") return f.positive_rate;
  if (f.gen == "uniform_threshold") return 0.5;
  return ds.label_mean();  // CSV: the file's own label frequency
}

// ---------------------------------------------------------------------------
// Output writing.

void write_table(const std::string& path, const std::string& format,
                 const Table& table, const ConfigMap& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  if (format == "json") {
    out << table_to_json(table, config).dump(2) << "\n";
  } else {
    write_csv(out, table, config);
  }
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

// ---------------------------------------------------------------------------
// variance

struct VarianceOpts {
  std::string ks = "2,4,8,16,32,64,128,256,512,1024";
  long bags_per_point = 100000;
  std::string kinds = "surrogate_one,surrogate_avg,soft_one,soft_avg";
  double prior_p = 0.5;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

int cmd_variance(const VarianceOpts& o) {
  const auto ks = parse_int_list(o.ks, "--ks");
  const auto kinds = parse_kind_list(o.kinds);
  const VarianceTable result = variance_sweep(
      uniform_threshold_sampler(), o.prior_p, ks, o.bags_per_point, kinds, o.seed);

  Table table;
  table.columns = {"k", "kind", "mean", "variance", "second_moment", "samples"};
  for (const VarianceRow& r : result.rows) {
    table.rows.push_back({std::to_string(r.k), estimator_kind_name(r.kind),
                          to_string_shortest(r.mean),
                          to_string_shortest(r.variance),
                          to_string_shortest(r.second_moment),
                          r.n_samples ? std::to_string(*r.n_samples) : "exact"});
  }
  ConfigMap config{{"command", "variance"},
                   {"ks", o.ks},
                   {"bags-per-point", std::to_string(o.bags_per_point)},
                   {"kinds", o.kinds},
                   {"prior-p", to_string_shortest(o.prior_p)},
                   {"seed", std::to_string(o.seed)},
                   {"format", o.format}};
  write_table(o.out, o.format, table, config);
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  DatasetFlags data;
  int k = 32;
  std::string method = "soft_erm";
  int epochs = 40;
  double lr = 1e-2;
  std::string optimizer = "adam";
  int batch_bags = 4;
  bool rebag = false;
  std::string prior = "estimated";
  double step_scale = 1.0;
  std::string radius = "10";
  std::uint64_t seed = 1;
  std::string out;
  std::string model_out;
};

int cmd_train(const TrainOpts& o) {
  const Dataset ds = load_dataset(o.data, o.seed, 0xda7a);
  const auto method = parse_train_method(o.method);
  if (!method) throw UsageError("--method: unknown method '" + o.method + "'");
  if (o.k < 1) throw UsageError("--k must be >= 1");

  std::optional<ClassPrior> prior;
  if (o.prior == "true") {
    prior = ClassPrior::binary(true_prior_of(o.data, ds));
  }

  ErmConfig erm;
  erm.epochs = o.epochs;
  erm.batch_bags = o.batch_bags;
  erm.optimizer =
      o.optimizer == "adam" ? OptimizerKind::Adam : OptimizerKind::PlainSgd;
  erm.learning_rate = o.lr;
  erm.rebag_each_epoch = o.rebag;
  erm.seed = o.seed;

  TrainReport report;
  switch (*method) {
    case TrainMethod::EventLevel:
      report = train_event_level(ds, erm);
      break;
    case TrainMethod::SoftErm:
      report = erm_minibatch(ds, o.k, erm, prior);
      break;
    case TrainMethod::SoftSgd:
    case TrainMethod::SurrogateSgd: {
      Rng bag_rng(mix_seed(o.seed, 0xba6));
      const BagCollection bags = partition_into_bags(ds, o.k, true, bag_rng);
      SgdConfig cfg;
      cfg.mode = *method == TrainMethod::SoftSgd ? SgdMode::Soft
                                                 : SgdMode::Surrogate;
      cfg.step_scale = o.step_scale;
      cfg.projection_radius = parse_radius(o.radius);
      cfg.init = LinearModel::zeros(ds.dim());
      cfg.seed = o.seed;
      report = sgd_pick_one(
          bags, cfg, prior ? *prior : estimate_prior(bags.infos()), o.epochs);
      break;
    }
  }

  const EvalMetrics train_metrics = evaluate(report.final_model, ds);

  ConfigMap config{{"command", "train"},
                   {"k", std::to_string(o.k)},
                   {"method", o.method},
                   {"epochs", std::to_string(o.epochs)},
                   {"lr", to_string_shortest(o.lr)},
                   {"optimizer", o.optimizer},
                   {"batch-bags", std::to_string(o.batch_bags)},
                   {"rebag", o.rebag ? "true" : "false"},
                   {"prior", o.prior},
                   {"step-scale", to_string_shortest(o.step_scale)},
                   {"radius", o.radius},
                   {"seed", std::to_string(o.seed)}};
  emit_dataset_config(o.data, config);

  nlohmann::json j;
  j["config"] = config;
  j["report"] = report_to_json(report);
  j["train_accuracy"] = train_metrics.accuracy;
  j["train_mean_loss"] = train_metrics.mean_loss;
  write_json_file(o.out, j);

  const std::string model_path =
      o.model_out.empty() ? o.out + ".model.json" : o.model_out;
  write_json_file(model_path, model_to_json(report.final_model));
  return 0;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleOpts {
  int kmax = 5;
  int distributions = 10;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

// Two equiprobable atoms; g picks out the positive label on one of them.
FiniteDistribution two_atom_distribution() {
  FiniteDistribution D;
  D.num_classes = 2;
  D.atoms.push_back({Vector::Constant(1, 1.0), 1, 0.5});
  D.atoms.push_back({Vector::Constant(1, 0.0), 0, 0.5});
  return D;
}

TabulatedFunction two_atom_indicator() {
  TabulatedFunction g;
  g.values = {{Vector::Zero(1), Vector::Constant(1, 1.0)},
              {Vector::Zero(1), Vector::Zero(1)}};
  return g;
}

FiniteDistribution random_distribution(Rng& rng, int num_classes) {
  FiniteDistribution D;
  D.num_classes = num_classes;
  const int atoms = 2 + static_cast<int>(rng.uniform_index(3));  // 2..4
  Vector probs(atoms);
  for (int a = 0; a < atoms; ++a) probs[a] = rng.uniform(0.05, 1.0);
  probs /= probs.sum();
  for (int a = 0; a < atoms; ++a) {
    const int label = static_cast<int>(
        rng.uniform_index(static_cast<std::size_t>(num_classes)));
    D.atoms.push_back({Vector::Constant(1, rng.uniform()), label, probs[a]});
  }
  return D;
}

TabulatedFunction random_tabulated(Rng& rng, const FiniteDistribution& D,
                                   Index dim) {
  TabulatedFunction g;
  for (std::size_t a = 0; a < D.atoms.size(); ++a) {
    std::vector<Vector> per_class;
    for (int c = 0; c < D.num_classes; ++c) {
      Vector v(dim);
      for (Index i = 0; i < dim; ++i) v[i] = rng.uniform(-5.0, 5.0);
      per_class.push_back(std::move(v));
    }
    g.values.push_back(std::move(per_class));
  }
  return g;
}

int cmd_oracle(const OracleOpts& o) {
  if (o.kmax < 1) throw UsageError("--kmax must be >= 1");
  if (o.distributions < 0) throw UsageError("--distributions must be >= 0");

  Table table;
  table.columns = {"distribution", "k", "check", "lhs", "rhs", "slack", "pass"};
  bool all_required_pass = true;

  auto add_row = [&](const std::string& dist, int k, const std::string& check,
                     double lhs, double rhs, bool pass, bool required) {
    table.rows.push_back({dist, std::to_string(k), check,
                          to_string_shortest(lhs), to_string_shortest(rhs),
                          to_string_shortest(rhs - lhs), pass ? "PASS" : "FAIL"});
    if (required && !pass) all_required_pass = false;
  };

  auto run_case = [&](const std::string& name, const FiniteDistribution& D,
                      const TabulatedFunction& g) {
    const Vector truth = distribution_mean(D, g);
    const bool binary = D.num_classes == 2;
    for (int k = 1; k <= o.kmax; ++k) {
      for (EstimatorKind kind : all_estimator_kinds()) {
        const bool soft = kind == EstimatorKind::SoftOne ||
                          kind == EstimatorKind::SoftAvg;
        if (!binary && !soft) continue;
        const OracleResult res = oracle_expectations(D, g, k, kind);
        const double dev = (res.mean - truth).cwiseAbs().maxCoeff();
        add_row(name, k, "unbiased_" + estimator_kind_name(kind), dev, 1e-10,
                dev <= 1e-10, true);
      }
    }
    if (binary) {
      const MomentBoundReport bounds = moment_bound_suite(D, g, o.kmax);
      for (const MomentBoundCheck& r : bounds.rows) {
        add_row(name, r.k, r.check, r.lhs, r.rhs, r.pass, r.required);
      }
    }
  };

  run_case("two_atom", two_atom_distribution(), two_atom_indicator());
  Rng rng(o.seed);
  for (int i = 0; i < o.distributions; ++i) {
    const FiniteDistribution D = random_distribution(rng, 2);
    const TabulatedFunction g =
        random_tabulated(rng, D, 1 + static_cast<Index>(rng.uniform_index(3)));
    run_case("random_" + std::to_string(i), D, g);
  }
  {
    const FiniteDistribution D = random_distribution(rng, 3);
    const TabulatedFunction g = random_tabulated(rng, D, 2);
    run_case("multiclass_c3", D, g);
  }

  ConfigMap config{{"command", "oracle"},
                   {"kmax", std::to_string(o.kmax)},
                   {"distributions", std::to_string(o.distributions)},
                   {"seed", std::to_string(o.seed)},
                   {"format", o.format}};
  write_table(o.out, o.format, table, config);
  if (!all_required_pass) {
    throw std::runtime_error("oracle: required checks failed (see " + o.out + ")");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// track

struct TrackOpts {
  DatasetFlags data;
  int k = 32;
  int epochs = 200;
  int replicas = 30;
  double lr = 1e-2;
  std::string optimizer = "adam";
  int batch_bags = 4;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

int cmd_track(const TrackOpts& o) {
  const Dataset ds = load_dataset(o.data, o.seed, 0xda7a);
  ErmConfig cfg;
  cfg.batch_bags = o.batch_bags;
  cfg.optimizer =
      o.optimizer == "adam" ? OptimizerKind::Adam : OptimizerKind::PlainSgd;
  cfg.learning_rate = o.lr;
  const TrackTable result =
      loss_tracking(ds, o.k, o.epochs, cfg, o.replicas, o.seed);

  Table table;
  table.columns = {"epoch", "true_loss_mean", "true_loss_std",
                   "estimated_loss_mean", "estimated_loss_std"};
  for (const TrackRow& r : result.rows) {
    table.rows.push_back({std::to_string(r.epoch), to_string_shortest(r.true_mean),
                          to_string_shortest(r.true_std),
                          to_string_shortest(r.estimated_mean),
                          to_string_shortest(r.estimated_std)});
  }
  ConfigMap config{{"command", "track"},
                   {"k", std::to_string(o.k)},
                   {"epochs", std::to_string(o.epochs)},
                   {"replicas", std::to_string(o.replicas)},
                   {"lr", to_string_shortest(o.lr)},
                   {"optimizer", o.optimizer},
                   {"batch-bags", std::to_string(o.batch_bags)},
                   {"seed", std::to_string(o.seed)},
                   {"format", o.format}};
  emit_dataset_config(o.data, config);
  write_table(o.out, o.format, table, config);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
  DatasetFlags data;
  std::string test_csv;
  long test_n = 5000;
  std::string ks = "2,4,8,16,32,64,128,256,512,1024";
  std::string methods = "event,soft_erm,soft_sgd,surrogate_sgd";
  int replicas = 30;
  int epochs = 40;
  double lr = 1e-2;
  std::string optimizer = "adam";
  int batch_bags = 4;
  double step_scale = 1.0;
  std::string radius = "10";
  std::string prior = "estimated";
  double init_scale = 0.1;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

int cmd_sweep(const SweepOpts& o) {
  const Dataset train = load_dataset(o.data, o.seed, 0xda7a);
  Dataset test = [&] {
    if (!o.data.csv.empty()) {
      if (o.test_csv.empty()) {
        throw UsageError("--test-csv is required with --csv");
      }
      return load_csv(o.test_csv, parse_label_column(o.data.label_column),
                      o.data.header);
    }
    DatasetFlags test_flags = o.data;
    test_flags.n = o.test_n;
    return load_dataset(test_flags, o.seed, 0x7e57);
  }();

  SweepOptions opt;
  opt.epochs = o.epochs;
  opt.replicas = o.replicas;
  opt.learning_rate = o.lr;
  opt.optimizer =
      o.optimizer == "adam" ? OptimizerKind::Adam : OptimizerKind::PlainSgd;
  opt.batch_bags = o.batch_bags;
  opt.step_scale = o.step_scale;
  opt.projection_radius = parse_radius(o.radius);
  opt.use_estimated_prior = o.prior == "estimated";
  opt.true_prior_p = true_prior_of(o.data, train);
  opt.init_scale = o.init_scale;

  const SweepTable result =
      accuracy_sweep(train, test, parse_int_list(o.ks, "--ks"),
                     parse_method_list(o.methods), opt, o.seed);

  Table table;
  table.columns = {"k", "method", "mean_accuracy", "std_accuracy"};
  for (const SweepRow& r : result.rows) {
    table.rows.push_back({std::to_string(r.k), train_method_name(r.method),
                          to_string_shortest(r.mean_accuracy),
                          to_string_shortest(r.std_accuracy)});
  }
  ConfigMap config{{"command", "sweep"},
                   {"ks", o.ks},
                   {"methods", o.methods},
                   {"replicas", std::to_string(o.replicas)},
                   {"epochs", std::to_string(o.epochs)},
                   {"lr", to_string_shortest(o.lr)},
                   {"optimizer", o.optimizer},
                   {"batch-bags", std::to_string(o.batch_bags)},
                   {"step-scale", to_string_shortest(o.step_scale)},
                   {"radius", o.radius},
                   {"prior", o.prior},
                   {"init-scale", to_string_shortest(o.init_scale)},
                   {"seed", std::to_string(o.seed)},
                   {"format", o.format}};
  emit_dataset_config(o.data, config);
  if (!o.data.csv.empty()) {
    config["test-csv"] = o.test_csv;
  } else {
    config["test-n"] = std::to_string(o.test_n);
  }
  write_table(o.out, o.format, table, config);
  return 0;
}

// ---------------------------------------------------------------------------
// gen

struct GenOpts {
  DatasetFlags data;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen(const GenOpts& o) {
  if (o.data.gen.empty()) throw UsageError("gen: --gen is required");
  const Dataset ds = load_dataset(o.data, o.seed, 0xda7a);
  save_csv(o.out, ds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning from label proportions: debiased estimators, "
               "trainers, and experiment harness"};
  app.require_subcommand(1);

  VarianceOpts vo;
  CLI::App* variance = app.add_subcommand(
      "variance", "Monte Carlo variance of the four debiased estimators");
  variance->add_option("--ks", vo.ks, "comma-separated bag sizes")->capture_default_str();
  variance->add_option("--bags-per-point", vo.bags_per_point,
                       "Monte Carlo bags per (k, kind) cell")->capture_default_str();
  variance->add_option("--kinds", vo.kinds, "estimator kinds")->capture_default_str();
  variance->add_option("--prior-p", vo.prior_p,
                       "positive rate used by the correction")->capture_default_str();
  variance->add_option("--seed", vo.seed, "rng seed")->capture_default_str();
  variance->add_option("--out", vo.out, "output path")->required();
  variance->add_option("--format", vo.format, "csv | json")->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));

  TrainOpts to;
  CLI::App* train = app.add_subcommand("train", "train a single model");
  add_dataset_flags(train, to.data);
  train->add_option("--k", to.k, "bag size")->capture_default_str();
  train->add_option("--method", to.method,
                    "event | soft_erm | soft_sgd | surrogate_sgd")->capture_default_str()
      ->check(CLI::IsMember({"event", "soft_erm", "soft_sgd", "surrogate_sgd"}));
  train->add_option("--epochs", to.epochs, "training rounds (SGD: passes)")->capture_default_str();
  train->add_option("--lr", to.lr, "ERM learning rate")->capture_default_str();
  train->add_option("--optimizer", to.optimizer, "adam | sgd")->capture_default_str()
      ->check(CLI::IsMember({"adam", "sgd"}));
  train->add_option("--batch-bags", to.batch_bags, "bags per minibatch")->capture_default_str();
  train->add_option("--rebag", to.rebag, "rebuild bags every epoch")->capture_default_str();
  train->add_option("--prior", to.prior, "estimated | true")->capture_default_str()
      ->check(CLI::IsMember({"estimated", "true"}));
  train->add_option("--step-scale", to.step_scale, "SGD step constant c")->capture_default_str();
  train->add_option("--radius", to.radius,
                    "SGD projection radius or 'unbounded'")->capture_default_str();
  train->add_option("--seed", to.seed, "rng seed")->capture_default_str();
  train->add_option("--out", to.out, "report JSON path")->required();
  train->add_option("--model-out", to.model_out,
                    "model JSON path (default: <out>.model.json)");

  OracleOpts oo;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "exact enumeration checks: unbiasedness and moment bounds");
  oracle->add_option("--kmax", oo.kmax, "largest bag size")->capture_default_str();
  oracle->add_option("--distributions", oo.distributions,
                     "number of random finite distributions")->capture_default_str();
  oracle->add_option("--seed", oo.seed, "rng seed")->capture_default_str();
  oracle->add_option("--out", oo.out, "output path")->required();
  oracle->add_option("--format", oo.format, "csv | json")->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));

  TrackOpts ko;
  CLI::App* track = app.add_subcommand(
      "track", "per-epoch true training loss vs bag-level estimate");
  add_dataset_flags(track, ko.data);
  track->add_option("--k", ko.k, "bag size")->capture_default_str();
  track->add_option("--epochs", ko.epochs, "training epochs")->capture_default_str();
  track->add_option("--replicas", ko.replicas, "independent runs")->capture_default_str();
  track->add_option("--lr", ko.lr, "learning rate")->capture_default_str();
  track->add_option("--optimizer", ko.optimizer, "adam | sgd")->capture_default_str()
      ->check(CLI::IsMember({"adam", "sgd"}));
  track->add_option("--batch-bags", ko.batch_bags, "bags per minibatch")->capture_default_str();
  track->add_option("--seed", ko.seed, "rng seed")->capture_default_str();
  track->add_option("--out", ko.out, "output path")->required();
  track->add_option("--format", ko.format, "csv | json")->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));

  SweepOpts so;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "best test accuracy per (bag size, method) grid cell");
  add_dataset_flags(sweep, so.data);
  sweep->add_option("--test-csv", so.test_csv, "test set CSV (with --csv)");
  sweep->add_option("--test-n", so.test_n, "generated test set size")->capture_default_str();
  sweep->add_option("--ks", so.ks, "comma-separated bag sizes")->capture_default_str();
  sweep->add_option("--methods", so.methods, "comma-separated methods")->capture_default_str();
  sweep->add_option("--replicas", so.replicas, "replicas per cell")->capture_default_str();
  sweep->add_option("--epochs", so.epochs, "training rounds per replica")->capture_default_str();
  sweep->add_option("--lr", so.lr, "ERM learning rate")->capture_default_str();
  sweep->add_option("--optimizer", so.optimizer, "adam | sgd")->capture_default_str()
      ->check(CLI::IsMember({"adam", "sgd"}));
  sweep->add_option("--batch-bags", so.batch_bags, "bags per minibatch")->capture_default_str();
  sweep->add_option("--step-scale", so.step_scale, "SGD step constant c")->capture_default_str();
  sweep->add_option("--radius", so.radius,
                    "SGD projection radius or 'unbounded'")->capture_default_str();
  sweep->add_option("--prior", so.prior, "estimated | true")->capture_default_str()
      ->check(CLI::IsMember({"estimated", "true"}));
  sweep->add_option("--init-scale", so.init_scale,
                    "stddev of the random weight init")->capture_default_str();
  sweep->add_option("--seed", so.seed, "rng seed")->capture_default_str();
  sweep->add_option("--out", so.out, "output path")->required();
  sweep->add_option("--format", so.format, "csv | json")->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));

  GenOpts go;
  CLI::App* gen = app.add_subcommand("gen", "write a synthetic dataset as CSV");
  add_dataset_flags(gen, go.data);
  gen->add_option("--seed", go.seed, "rng seed")->capture_default_str();
  gen->add_option("--out", go.out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n"
              << "run '" << (argc > 0 ? argv[0] : "llp")
              << " --help' for usage\n";
    return 2;
  }

  try {
    if (app.got_subcommand(variance)) return cmd_variance(vo);
    if (app.got_subcommand(train)) return cmd_train(to);
    if (app.got_subcommand(oracle)) return cmd_oracle(oo);
    if (app.got_subcommand(track)) return cmd_track(ko);
    if (app.got_subcommand(sweep)) return cmd_sweep(so);
    if (app.got_subcommand(gen)) return cmd_gen(go);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
