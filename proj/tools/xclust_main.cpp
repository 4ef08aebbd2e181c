// xclust: generate benchmark instances, build threshold-tree clusterings,
// evaluate them against reference costs, and compare methods side by side.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xclust/core.hpp"
#include "xclust/instances.hpp"
#include "xclust/io.hpp"
#include "xclust/kmeans.hpp"
#include "xclust/kmedians.hpp"
#include "xclust/two_means.hpp"

namespace {

using nlohmann::json;
using namespace xclust;

// Flag combinations the parser cannot express; mapped to exit code 1.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count();
}

// Timing and build counters never go into result files; they are written to
// the --stats file when given and to stderr otherwise.
class StatsSink {
 public:
  explicit StatsSink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::out | std::ios::trunc);
      if (!file_) throw input_error("cannot open stats file: " + path);
    }
  }
  void line(const std::string& s) {
    if (file_.is_open()) {
      file_ << s << '\n';
    } else {
      std::cerr << s << '\n';
    }
  }

 private:
  std::ofstream file_;
};

enum class Method {
  MedianRandom,
  MedianSimplified,
  MeanSweep,
  MeanRandom,
  Imm,
  TwoMeansExact,
};

const std::map<std::string, Method> kMethodNames = {
    {"median-random", Method::MedianRandom},
    {"median-simplified", Method::MedianSimplified},
    {"mean-sweep", Method::MeanSweep},
    {"mean-random", Method::MeanRandom},
    {"imm", Method::Imm},
    {"2means-exact", Method::TwoMeansExact},
};

Method method_from_name(const std::string& name) {
  auto it = kMethodNames.find(name);
  if (it == kMethodNames.end()) {
    throw usage_error("unknown method: " + name);
  }
  return it->second;
}

std::string method_name(Method m) {
  for (const auto& [name, method] : kMethodNames) {
    if (method == m) return name;
  }
  return "?";
}

// Which --objective values each method serves.
void check_method_objective(Method m, const std::string& objective) {
  const bool medians = objective == "kmedians";
  const bool means = objective == "kmeans";
  const bool two = objective == "2means";
  bool ok = false;
  switch (m) {
    case Method::MedianRandom:
    case Method::MedianSimplified:
      ok = medians;
      break;
    case Method::MeanSweep:
    case Method::MeanRandom:
    case Method::Imm:
      ok = means || two;
      break;
    case Method::TwoMeansExact:
      ok = two;
      break;
  }
  if (!ok) {
    throw usage_error("method " + method_name(m) +
                      " does not serve objective " + objective);
  }
}

bool method_reads_points(Method m) {
  switch (m) {
    case Method::MeanSweep:
    case Method::Imm:
    case Method::TwoMeansExact:
      return true;
    default:
      return false;
  }
}

Objective parse_objective(const std::string& name, bool allow_kcenter) {
  if (name == "kcenter" && !allow_kcenter) {
    throw usage_error("objective kcenter is only available in eval");
  }
  try {
    return objective_from_name(name);
  } catch (const input_error& e) {
    throw usage_error(e.what());
  }
}

struct BuildOutcome {
  ThresholdTree tree;
  KMediansBuildStats median_stats;
  bool has_median_stats = false;
};

BuildOutcome build_tree(Method method, const Dataset& data,
                        const CenterSet& centers, uint64_t seed,
                        std::optional<double> domain_bound, bool refit) {
  BuildOutcome out;
  switch (method) {
    case Method::MedianRandom:
      out.tree = build_fast(centers, seed, &out.median_stats);
      out.has_median_stats = true;
      break;
    case Method::MedianSimplified: {
      const double bound =
          domain_bound ? *domain_bound : default_domain_bound(centers);
      out.tree = build_simplified(centers, bound, seed, &out.median_stats);
      out.has_median_stats = true;
      break;
    }
    case Method::MeanSweep:
      out.tree = build_kmeans_tree(data, centers, KMeansMethod::Sweep, seed);
      break;
    case Method::MeanRandom:
      out.tree = build_kmeans_tree(data, centers, KMeansMethod::Random, seed);
      break;
    case Method::Imm:
      out.tree = build_kmeans_tree(data, centers, KMeansMethod::Imm, seed);
      break;
    case Method::TwoMeansExact: {
      const auto model = refit ? TwoMeansCostModel::RefitCentroids
                               : TwoMeansCostModel::FixedCenters;
      out.tree = exact_2means_tree(data, centers, model).tree;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
  std::string instance;
  int k = 0;
  int d = -1;
  int n = -1;
  double spread = 1.0;
  uint64_t seed = 0;
  std::string out_points = "points.csv";
  std::string out_centers = "centers.csv";
  std::string out_meta = "meta.json";
  bool d_set = false;
  bool n_set = false;
  bool spread_set = false;
};

void run_gen(const GenOptions& opt) {
  InstanceBundle bundle;
  if (opt.instance == "kmedians-lb") {
    if (opt.d_set || opt.n_set || opt.spread_set) {
      throw usage_error("kmedians-lb derives --d and --n from --k");
    }
    bundle = gen_kmedians_lb(opt.k, opt.seed);
  } else if (opt.instance == "kmeans-lb") {
    if (opt.n_set || opt.spread_set) {
      throw usage_error("kmeans-lb accepts only --k, --d, and --seed");
    }
    const int d = opt.d_set ? opt.d : kmeans_lb_default_dim(opt.k);
    bundle = gen_kmeans_lb(opt.k, d, opt.seed);
  } else if (opt.instance == "imm-adversarial") {
    if (opt.d_set || opt.n_set || opt.spread_set) {
      throw usage_error("imm-adversarial derives everything from --k");
    }
    bundle = gen_imm_adversarial(opt.k);
  } else if (opt.instance == "blobs") {
    if (!opt.d_set || !opt.n_set) {
      throw usage_error("blobs requires --d and --n");
    }
    bundle = gen_blobs(opt.k, opt.d, opt.n, opt.spread, opt.seed);
  } else {
    throw usage_error("unknown instance type: " + opt.instance);
  }

  write_points_csv(opt.out_points, bundle.data);
  write_points_csv(opt.out_centers, bundle.centers);

  json meta;
  meta["generator"] = bundle.generator;
  meta["k"] = bundle.k;
  meta["d"] = bundle.d;
  meta["n"] = bundle.data.size();
  meta["seed"] = bundle.seed;
  json planted = json::object();
  for (const auto& [objective, cost] : bundle.planted_cost) {
    planted[objective_name(objective)] = cost;
  }
  meta["planted_cost"] = planted;
  if (bundle.generator == "kmedians-lb") {
    meta["min_differing_coords"] = bundle.min_differing_coords;
  }
  if (bundle.generator == "kmeans-lb") {
    meta["min_center_distance"] = bundle.min_center_distance;
    meta["separation_constant"] = bundle.separation_constant;
  }
  std::ofstream out(opt.out_meta);
  if (!out) throw input_error("cannot open output file: " + opt.out_meta);
  out << meta.dump(2) << '\n';

  std::cout << "generated " << bundle.generator << " k=" << bundle.k
            << " d=" << bundle.d << " n=" << bundle.data.size() << '\n';
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterOptions {
  std::string objective;
  std::string method;
  std::string points_path;
  std::string centers_path;
  int fit_k = 0;
  uint64_t seed = 0;
  double domain_bound = 0.0;
  bool domain_bound_set = false;
  bool refit = false;
  std::string out_tree = "tree.json";
  std::string out_centers = "fitted_centers.csv";
  std::string stats_path;
};

void run_cluster(const ClusterOptions& opt) {
  const Method method = method_from_name(opt.method);
  check_method_objective(method, opt.objective);
  const Objective objective = parse_objective(opt.objective, false);

  if (opt.fit_k < 0) throw usage_error("--fit-k must be positive");
  if (opt.centers_path.empty() == (opt.fit_k == 0)) {
    throw usage_error("pass exactly one of --centers and --fit-k");
  }
  if (opt.domain_bound_set && method != Method::MedianSimplified) {
    throw usage_error("--domain-bound only applies to median-simplified");
  }
  if (opt.refit && method != Method::TwoMeansExact) {
    throw usage_error("--refit only applies to 2means-exact");
  }
  if (opt.objective == "2means" && opt.fit_k != 0 && opt.fit_k != 2) {
    throw usage_error("--fit-k must be 2 under the 2means objective");
  }

  const bool need_points = method_reads_points(method) || opt.fit_k != 0;
  if (need_points && opt.points_path.empty()) {
    throw usage_error("--points is required for method " + opt.method +
                      (opt.fit_k != 0 ? " with --fit-k" : ""));
  }

  // Methods that split on centers alone never open the points file.
  Dataset data;
  if (need_points) data = read_points_csv(opt.points_path);

  CenterSet centers;
  if (opt.fit_k != 0) {
    centers = solve_reference(data, opt.fit_k, objective, opt.seed);
    write_points_csv(opt.out_centers, centers);
  } else {
    centers = read_points_csv(opt.centers_path);
  }

  StatsSink stats(opt.stats_path);
  const auto start = std::chrono::steady_clock::now();
  BuildOutcome built = build_tree(
      method, data, centers, opt.seed,
      opt.domain_bound_set ? std::optional<double>(opt.domain_bound)
                           : std::nullopt,
      opt.refit);
  const double ms = elapsed_ms(start);

  write_tree_json(opt.out_tree, built.tree);

  std::ostringstream line;
  line << "splits=" << built.tree.splits.size();
  if (built.has_median_stats) {
    line << " moved_total=" << built.median_stats.moved_total
         << " samples_drawn=" << built.median_stats.samples_drawn;
  }
  line << " wall_ms=" << format_double(ms);
  stats.line(line.str());

  std::cout << "wrote " << opt.out_tree << " (k=" << built.tree.k
            << ", height=" << built.tree.height() << ")\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string tree_path;
  std::string points_path;
  std::string centers_path;
  std::string objective;
  std::string reference = "fixed-centers";
  std::string reference_file;
  std::string out_report = "report.json";
};

// Cost of the tree-induced partition when every leaf is re-centered
// optimally for the objective.
double refit_reference_cost(const ThresholdTree& tree, const Dataset& data,
                            const CenterSet& centers, Objective objective) {
  std::vector<std::vector<std::size_t>> groups(centers.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    groups[static_cast<std::size_t>(tree.assign(data[i]))].push_back(i);
  }
  const std::size_t d = data.dim();
  double total = 0.0;
  std::vector<double> column;
  for (const auto& group : groups) {
    if (group.empty()) continue;
    std::vector<double> center(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
      if (objective == Objective::KMediansL1) {
        column.clear();
        for (std::size_t i : group) column.push_back(data.at(i, r));
        std::sort(column.begin(), column.end());
        const std::size_t m = column.size();
        center[r] = (m % 2 == 1) ? column[m / 2]
                                 : 0.5 * (column[m / 2 - 1] + column[m / 2]);
      } else {
        double sum = 0.0;
        for (std::size_t i : group) sum += data.at(i, r);
        center[r] = sum / static_cast<double>(group.size());
      }
    }
    for (std::size_t i : group) {
      total += objective_distance(objective, data[i], center);
    }
  }
  return total;
}

double reference_from_file(const std::string& path,
                           const std::string& objective) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open reference file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw input_error(std::string("bad reference file: ") + e.what());
  }
  if (j.contains("reference_cost") && j["reference_cost"].is_number()) {
    return j["reference_cost"].get<double>();
  }
  if (j.contains("planted_cost") && j["planted_cost"].is_object() &&
      j["planted_cost"].contains(objective)) {
    return j["planted_cost"][objective].get<double>();
  }
  throw input_error("reference file has neither reference_cost nor "
                    "planted_cost." +
                    objective);
}

void run_eval(const EvalOptions& opt) {
  if (opt.reference != "fixed-centers" && opt.reference != "refit" &&
      opt.reference != "file") {
    throw usage_error("--reference must be fixed-centers, refit, or file");
  }
  if ((opt.reference == "file") != !opt.reference_file.empty()) {
    throw usage_error("--reference-file goes with --reference file");
  }
  const Objective objective = parse_objective(opt.objective, true);
  if (opt.reference == "refit" && objective == Objective::KCenterL2) {
    throw usage_error("--reference refit is not defined for kcenter");
  }

  const ThresholdTree tree = read_tree_json(opt.tree_path);
  const Dataset data = read_points_csv(opt.points_path);
  const CenterSet centers = read_points_csv(opt.centers_path);
  validate_with_centers(tree, centers);
  XCLUST_INPUT_CHECK(data.dim() == centers.dim(),
                     "points and centers disagree on dimension");

  CostReport report = tree_cost(tree, data, centers, objective);
  double reference = 0.0;
  if (opt.reference == "fixed-centers") {
    reference = nearest_center_cost(data, centers, objective).total_cost;
  } else if (opt.reference == "refit") {
    reference = refit_reference_cost(tree, data, centers, objective);
  } else {
    reference = reference_from_file(opt.reference_file, opt.objective);
  }
  report.set_reference(reference);

  json out;
  out["objective"] = opt.objective;
  out["n"] = data.size();
  out["k"] = tree.k;
  out["d"] = tree.dim;
  out["height"] = tree.height();
  out["tree_cost"] = report.total_cost;
  out["reference"] = opt.reference;
  out["reference_cost"] = reference;
  if (report.ratio && std::isfinite(*report.ratio)) {
    out["ratio"] = *report.ratio;
  }
  if (!tree.splits.empty()) {
    json splits = json::array();
    for (const auto& s : tree.splits) {
      json rec;
      rec["node"] = s.node;
      rec["dim"] = s.dim;
      rec["threshold"] = s.threshold;
      rec["left_centers"] = s.left_centers;
      rec["right_centers"] = s.right_centers;
      rec["balance"] = s.balance();
      if (s.mistakes >= 0) rec["mistakes"] = s.mistakes;
      if (s.box_sq > 0) rec["box_sq"] = s.box_sq;
      if (s.event_prob >= 0) rec["event_prob"] = s.event_prob;
      splits.push_back(rec);
    }
    out["splits"] = splits;
  }

  std::ofstream file(opt.out_report);
  if (!file) throw input_error("cannot open output file: " + opt.out_report);
  file << out.dump(2) << '\n';

  std::cout << "tree_cost=" << format_double(report.total_cost)
            << " reference_cost=" << format_double(reference);
  if (report.ratio && std::isfinite(*report.ratio)) {
    std::cout << " ratio=" << format_double(*report.ratio);
  }
  std::cout << '\n';
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
  std::string objective;
  std::string methods;
  std::string points_path;
  std::string centers_path;
  int fit_k = 0;
  int trials = 10;
  uint64_t seed = 0;
  std::string out_csv = "compare.csv";
  std::string stats_path;
};

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

void run_compare(const CompareOptions& opt) {
  const std::vector<std::string> names = split_csv_list(opt.methods);
  if (names.empty()) throw usage_error("--methods lists no methods");
  std::vector<Method> methods;
  for (const auto& name : names) {
    const Method m = method_from_name(name);
    check_method_objective(m, opt.objective);
    methods.push_back(m);
  }
  if (opt.trials < 1) throw usage_error("--trials must be positive");
  if (opt.fit_k < 0) throw usage_error("--fit-k must be positive");
  if (opt.centers_path.empty() == (opt.fit_k == 0)) {
    throw usage_error("pass exactly one of --centers and --fit-k");
  }
  const Objective objective = parse_objective(opt.objective, false);

  const Dataset data = read_points_csv(opt.points_path);
  CenterSet centers;
  if (opt.fit_k != 0) {
    centers = solve_reference(data, opt.fit_k, objective, opt.seed);
  } else {
    centers = read_points_csv(opt.centers_path);
  }
  XCLUST_INPUT_CHECK(data.dim() == centers.dim(),
                     "points and centers disagree on dimension");

  const double reference =
      nearest_center_cost(data, centers, objective).total_cost;

  StatsSink stats(opt.stats_path);
  std::ofstream csv(opt.out_csv);
  if (!csv) throw input_error("cannot open output file: " + opt.out_csv);
  csv << "method,trial,seed,cost,ratio,height\n";

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const Method method = methods[mi];
    std::vector<double> costs, ratios, heights;
    for (int trial = 0; trial < opt.trials; ++trial) {
      const uint64_t trial_seed = opt.seed + static_cast<uint64_t>(trial);
      const auto start = std::chrono::steady_clock::now();
      BuildOutcome built = build_tree(method, data, centers, trial_seed,
                                      std::nullopt, false);
      const double ms = elapsed_ms(start);
      const CostReport rep = tree_cost(built.tree, data, centers, objective);
      const double ratio =
          (reference == 0.0)
              ? (rep.total_cost == 0.0
                     ? 1.0
                     : std::numeric_limits<double>::infinity())
              : rep.total_cost / reference;
      costs.push_back(rep.total_cost);
      ratios.push_back(ratio);
      heights.push_back(static_cast<double>(built.tree.height()));
      csv << names[mi] << ',' << trial << ',' << trial_seed << ','
          << format_double(rep.total_cost) << ',' << format_double(ratio)
          << ',' << built.tree.height() << '\n';
      stats.line("method=" + names[mi] + " trial=" + std::to_string(trial) +
                 " wall_ms=" + format_double(ms));
    }
    const auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    const auto stddev = [&](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      const double m = mean(v);
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    csv << names[mi] << ",mean,," << format_double(mean(costs)) << ','
        << format_double(mean(ratios)) << ',' << format_double(mean(heights))
        << '\n';
    csv << names[mi] << ",stddev,," << format_double(stddev(costs)) << ','
        << format_double(stddev(ratios)) << ','
        << format_double(stddev(heights)) << '\n';
  }
  std::cout << "wrote " << opt.out_csv << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"explainable clustering with threshold trees"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen", "generate a benchmark instance");
  gen_cmd->add_option("--instance", gen.instance,
                      "kmedians-lb | kmeans-lb | imm-adversarial | blobs")
      ->required();
  gen_cmd->add_option("--k", gen.k, "number of centers")->required();
  auto* gen_d = gen_cmd->add_option("--d", gen.d, "dimension");
  auto* gen_n = gen_cmd->add_option("--n", gen.n, "number of points");
  auto* gen_spread =
      gen_cmd->add_option("--spread", gen.spread, "blob noise stddev");
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--out-points", gen.out_points, "points CSV path");
  gen_cmd->add_option("--out-centers", gen.out_centers, "centers CSV path");
  gen_cmd->add_option("--out-meta", gen.out_meta, "metadata JSON path");

  ClusterOptions cluster;
  CLI::App* cluster_cmd =
      app.add_subcommand("cluster", "build a threshold tree");
  cluster_cmd->add_option("--objective", cluster.objective,
                          "kmedians | kmeans | 2means")
      ->required();
  cluster_cmd->add_option("--method", cluster.method,
                          "median-random | median-simplified | mean-sweep | "
                          "mean-random | imm | 2means-exact")
      ->required();
  cluster_cmd->add_option("--points", cluster.points_path, "points CSV");
  cluster_cmd->add_option("--centers", cluster.centers_path, "centers CSV");
  cluster_cmd->add_option("--fit-k", cluster.fit_k,
                          "fit this many reference centers first");
  cluster_cmd->add_option("--seed", cluster.seed, "random seed");
  auto* bound_opt = cluster_cmd->add_option(
      "--domain-bound", cluster.domain_bound,
      "half-width of the sampling box (median-simplified)");
  cluster_cmd->add_flag("--refit", cluster.refit,
                        "optimize the 2means split for refitted centroids");
  cluster_cmd->add_option("--out-tree", cluster.out_tree, "tree JSON path");
  cluster_cmd->add_option("--out-centers", cluster.out_centers,
                          "fitted centers CSV path (with --fit-k)");
  cluster_cmd->add_option("--stats", cluster.stats_path,
                          "write timing/counter lines here instead of stderr");

  EvalOptions eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a tree against a reference");
  eval_cmd->add_option("--tree", eval.tree_path, "tree JSON")->required();
  eval_cmd->add_option("--points", eval.points_path, "points CSV")->required();
  eval_cmd->add_option("--centers", eval.centers_path, "centers CSV")
      ->required();
  eval_cmd->add_option("--objective", eval.objective,
                       "kmedians | kmeans | 2means | kcenter")
      ->required();
  eval_cmd->add_option("--reference", eval.reference,
                       "fixed-centers | refit | file");
  eval_cmd->add_option("--reference-file", eval.reference_file,
                       "JSON with reference_cost or planted_cost");
  eval_cmd->add_option("--out-report", eval.out_report, "report JSON path");

  CompareOptions compare;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run several methods on one instance");
  compare_cmd->add_option("--objective", compare.objective,
                          "kmedians | kmeans | 2means")
      ->required();
  compare_cmd->add_option("--methods", compare.methods,
                          "comma-separated method list")
      ->required();
  compare_cmd->add_option("--points", compare.points_path, "points CSV")
      ->required();
  compare_cmd->add_option("--centers", compare.centers_path, "centers CSV");
  compare_cmd->add_option("--fit-k", compare.fit_k,
                          "fit this many reference centers first");
  compare_cmd->add_option("--trials", compare.trials, "trials per method");
  compare_cmd->add_option("--seed", compare.seed,
                          "base seed; trial t runs with seed+t");
  compare_cmd->add_option("--out-csv", compare.out_csv, "results CSV path");
  compare_cmd->add_option("--stats", compare.stats_path,
                          "write timing lines here instead of stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  gen.d_set = gen_d->count() > 0;
  gen.n_set = gen_n->count() > 0;
  gen.spread_set = gen_spread->count() > 0;
  cluster.domain_bound_set = bound_opt->count() > 0;

  try {
    if (gen_cmd->parsed()) run_gen(gen);
    if (cluster_cmd->parsed()) run_cluster(cluster);
    if (eval_cmd->parsed()) run_eval(eval);
    if (compare_cmd->parsed()) run_compare(compare);
    return 0;
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const internal_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
