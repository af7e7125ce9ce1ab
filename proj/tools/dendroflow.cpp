#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "dendroflow/chains.hpp"
#include "dendroflow/experiments.hpp"
#include "dendroflow/horton.hpp"
#include "dendroflow/level_set.hpp"
#include "dendroflow/pruning_dynamics.hpp"

namespace fs = std::filesystem;
using namespace dendroflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("DENDROFLOW_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

Series load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return parse_series_csv(in);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path.string());
  out << content;
}

KernelSpec kernel_from_flags(const std::string& kind, double sigma, double h, double lambda,
                             double p, double lambda_u, double lambda_d) {
  if (kind == "gaussian") return GaussianKernel{sigma};
  if (kind == "uniform") return UniformKernel{h};
  if (kind == "laplace") return LaplaceKernel{lambda};
  if (kind == "ehmc") return ExponentialMixtureKernel{EhmcParams{p, lambda_u, lambda_d}};
  if (kind == "rademacher") return RademacherKernel{};
  throw CLI::ValidationError("--kind", "unknown process kind '" + kind + "'");
}

std::string horton_stats_json(const HortonStats& hs, const TokunagaMatrix& tm) {
  std::ostringstream os;
  os << "{\n  \"omega\": " << hs.omega << ",\n";
  auto vec = [&](const std::string& name, auto begin_r, auto value_of, bool integer) {
    os << "  \"" << name << "\": [";
    for (int r = begin_r; r <= hs.omega; ++r) {
      if (r > begin_r) os << ", ";
      if (integer)
        os << value_of(r);
      else
        os << format_double(value_of(r));
    }
    os << "],\n";
  };
  vec("N_r", 1, [&](int r) { return hs.branch_counts[static_cast<std::size_t>(r)]; }, true);
  vec("M_r", 1, [&](int r) { return hs.magnitudes[static_cast<std::size_t>(r)]; }, false);
  os << "  \"eta_r\": [";
  for (int r = 1; r < hs.omega; ++r) {
    if (r > 1) os << ", ";
    os << format_double(hs.eta[static_cast<std::size_t>(r)]);
  }
  os << "],\n";
  os << "  \"N_ij\": {";
  bool first = true;
  for (int i = 1; i <= tm.omega; ++i)
    for (int j = i + 1; j <= tm.omega; ++j) {
      if (tm.n_side(i, j) == 0) continue;
      if (!first) os << ", ";
      first = false;
      os << "\"" << i << "," << j << "\": " << tm.n_side(i, j);
    }
  os << "},\n";
  os << "  \"T_ij\": {";
  first = true;
  for (int i = 1; i <= tm.omega; ++i)
    for (int j = i + 1; j <= tm.omega; ++j) {
      if (tm.branches_used[static_cast<std::size_t>(j)] == 0) continue;
      if (!first) os << ", ";
      first = false;
      os << "\"" << i << "," << j << "\": " << format_double(tm.t(i, j));
    }
  os << "},\n";
  os << "  \"R_B\": " << (hs.r_b ? format_double(*hs.r_b) : "null") << ",\n";
  os << "  \"R_M\": " << (hs.r_m ? format_double(*hs.r_m) : "null") << ",\n";
  os << "  \"alpha\": " << (hs.alpha ? format_double(*hs.alpha) : "null") << "\n}\n";
  return os.str();
}

std::string horton_stats_csv(const HortonStats& hs, const TokunagaMatrix& tm) {
  std::ostringstream os;
  os << "key,order_i,order_j,value\n";
  for (int r = 1; r <= hs.omega; ++r) {
    os << "N_r," << r << ",," << hs.branch_counts[static_cast<std::size_t>(r)] << "\n";
    os << "M_r," << r << ",," << format_double(hs.magnitudes[static_cast<std::size_t>(r)]) << "\n";
    if (r < hs.omega)
      os << "eta_r," << r << ",," << format_double(hs.eta[static_cast<std::size_t>(r)]) << "\n";
  }
  for (int i = 1; i <= tm.omega; ++i)
    for (int j = i + 1; j <= tm.omega; ++j) {
      if (tm.n_side(i, j) == 0 && tm.branches_used[static_cast<std::size_t>(j)] == 0) continue;
      os << "N_ij," << i << ',' << j << ',' << tm.n_side(i, j) << "\n";
      if (tm.branches_used[static_cast<std::size_t>(j)] > 0)
        os << "T_ij," << i << ',' << j << ',' << format_double(tm.t(i, j)) << "\n";
    }
  if (hs.r_b) os << "R_B,,," << format_double(*hs.r_b) << "\n";
  if (hs.r_m) os << "R_M,,," << format_double(*hs.r_m) << "\n";
  if (hs.alpha) os << "alpha,,," << format_double(*hs.alpha) << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dendroflow: level-set trees of time series, Horton-Strahler/Tokunaga statistics,"
               " and self-similarity experiments"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int threads_flag = 0;
  std::string format = "csv";
  std::string out_dir = ".";
  app.add_option("--seed", seed, "master seed for all randomness")->capture_default_str();
  app.add_option("--threads", threads_flag,
                 "worker threads (default: DENDROFLOW_THREADS env or 1); results do not depend on it");
  app.add_option("--format", format, "output format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  // simulate ------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "generate a process sample path as CSV");
  std::string sim_kind = "gaussian";
  double sim_sigma = 1.0, sim_h = 1.0, sim_lambda = 1.0;
  double sim_p = 0.5, sim_lu = 1.0, sim_ld = 1.0, sim_hurst = 0.5;
  std::size_t sim_n = 1000;
  std::string sim_out_file;
  sim->add_option("--kind", sim_kind, "gaussian|uniform|laplace|ehmc|rademacher|fbm")
      ->capture_default_str();
  sim->add_option("--n", sim_n, "series length")->capture_default_str();
  sim->add_option("--sigma", sim_sigma, "gaussian sigma")->capture_default_str();
  sim->add_option("--half-width", sim_h, "uniform half-width")->capture_default_str();
  sim->add_option("--lambda", sim_lambda, "laplace rate")->capture_default_str();
  sim->add_option("--p", sim_p, "ehmc up probability")->capture_default_str();
  sim->add_option("--lambda-u", sim_lu, "ehmc up rate")->capture_default_str();
  sim->add_option("--lambda-d", sim_ld, "ehmc down rate")->capture_default_str();
  sim->add_option("--hurst", sim_hurst, "fbm Hurst index")->capture_default_str();
  sim->add_option("--out-file", sim_out_file, "write CSV here instead of stdout");

  // analyze -------------------------------------------------------------
  auto* an = app.add_subcommand("analyze", "level-set tree and Horton/Tokunaga statistics of a CSV series");
  std::string an_input;
  int an_prune = 0;
  bool an_all_branches = false;
  an->add_option("input", an_input, "CSV series file")->required();
  an->add_option("--prune", an_prune, "apply this many series prunings first")
      ->capture_default_str();
  an->add_flag("--all-branches", an_all_branches,
               "use every branch in Tokunaga ratios (default: complete branches only)");

  // prune ---------------------------------------------------------------
  auto* pr = app.add_subcommand("prune", "emit the series of internal local minima");
  std::string pr_input;
  int pr_k = 1;
  pr->add_option("input", pr_input, "CSV series file")->required();
  pr->add_option("--k", pr_k, "number of prunings")->capture_default_str();

  // dynamics ------------------------------------------------------------
  auto* dyn = app.add_subcommand("dynamics", "iterate the exponential-chain pruning parameter maps");
  double dyn_p = 0.5, dyn_lu = 1.0, dyn_ld = 1.0;
  int dyn_steps = 8;
  dyn->add_option("--p", dyn_p, "up probability")->capture_default_str();
  dyn->add_option("--lambda-u", dyn_lu, "up rate")->capture_default_str();
  dyn->add_option("--lambda-d", dyn_ld, "down rate")->capture_default_str();
  dyn->add_option("--steps", dyn_steps, "iterations")->capture_default_str();

  // experiment ----------------------------------------------------------
  auto* ex = app.add_subcommand("experiment", "run a configured experiment");
  auto* ex_run = ex->add_subcommand("run", "run an experiment from a config file");
  std::string ex_config;
  ex_run->add_option("config", ex_config, "experiment config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out_dir);
    int threads = resolve_threads(threads_flag);

    if (*sim) {
      Series s;
      if (sim_kind == "fbm") {
        s = gen_fbm(sim_hurst, sim_n, seed);
      } else {
        s = gen_chain(kernel_from_flags(sim_kind, sim_sigma, sim_h, sim_lambda, sim_p, sim_lu, sim_ld),
                      sim_n, seed);
      }
      std::ostringstream os;
      write_series_csv(os, s);
      if (sim_out_file.empty())
        std::cout << os.str();
      else
        write_file(fs::path(out_dir) / sim_out_file, os.str());
      return kExitOk;
    }

    if (*an) {
      Series s = load_series(an_input);
      for (int k = 0; k < an_prune; ++k) s = prune_series(s);
      if (s.size() == 0) throw std::runtime_error("pruned series is empty");
      IndexedTree it = level_set_tree_indexed(s);
      OrderedTree ot = assign_orders(std::move(it.tree));
      BranchSet bs = branch_decomposition(ot);
      mark_completeness(bs, ot, it.source, iterated_minima_positions(s));
      TokunagaMatrix tm = tokunaga_matrix(ot, bs, !an_all_branches);
      HortonStats hs = horton_stats(bs);

      write_file(fs::path(out_dir) / "tree.txt", serialize_tree(ot.tree));
      if (format == "json") {
        write_file(fs::path(out_dir) / "stats.json", horton_stats_json(hs, tm));
      } else {
        write_file(fs::path(out_dir) / "stats.csv", horton_stats_csv(hs, tm));
      }
      std::cout << "omega " << hs.omega << ", leaves " << ot.tree.leaf_count() << ", nodes "
                << ot.tree.size() << "\n";
      return kExitOk;
    }

    if (*pr) {
      Series s = load_series(pr_input);
      for (int k = 0; k < pr_k; ++k) s = prune_series(s);
      std::ostringstream os;
      write_series_csv(os, s);
      std::cout << os.str();
      return kExitOk;
    }

    if (*dyn) {
      auto rows = iterate_dynamics(EhmcParams{dyn_p, dyn_lu, dyn_ld}, dyn_steps);
      std::cout << "m,p,lambda_u,lambda_d,A,gamma,p2,p_min\n";
      for (const auto& r : rows)
        std::cout << r.m << ',' << format_double(r.p) << ',' << format_double(r.lambda_u) << ','
                  << format_double(r.lambda_d) << ',' << format_double(r.big_a) << ','
                  << format_double(r.gamma) << ',' << format_double(r.p2) << ','
                  << format_double(r.p_min) << "\n";
      return kExitOk;
    }

    if (*ex) {
      std::ifstream in(ex_config);
      if (!in) throw std::runtime_error("cannot open config: " + ex_config);
      ExperimentConfig cfg = parse_config(in);
      cfg.threads = threads;
      if (app.count("--seed") > 0) cfg.master_seed = seed;
      ExperimentReport rep = run_experiment(cfg);
      write_file(fs::path(out_dir) / "report.json", rep.to_json());
      write_file(fs::path(out_dir) / "report.csv", rep.to_csv());
      for (const auto& c : rep.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " = " << format_double(c.value)
                  << (c.lower_bound_only
                          ? " (>= " + format_double(c.target) + ")"
                          : " (" + format_double(c.target) + " +- " + format_double(c.tol) + ")")
                  << "\n";
      if (rep.partial) std::cout << "note: partial report\n";
      return rep.passed() ? kExitOk : kExitCheckFailed;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}
