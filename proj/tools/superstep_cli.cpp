// superstep: run single diffusion experiments or whole parameter studies and emit CSV.
//
//   superstep run --problem dg --method rkl --nu 10 --rtol 1e-2,1e-4
//   superstep study eigsafety --problem dg --out eigsafety.csv
//   superstep run --config sweep.ini --method ssp4
//
// Config files hold key=value lines using the long flag names; flags on the
// command line win over the file.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "superstep/bench.hpp"
#include "superstep/domeig.hpp"

namespace {

using superstep::ExperimentConfig;

struct RawOptions {
  std::string problem = "dg";
  std::string method = "rkl";
  double nu = 1.0;
  std::size_t nv = 120;
  std::size_t nx = 20;
  std::vector<double> rtol{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double atol = 1e-11;
  std::string norm = "cell";
  std::string eig_mode = "power";
  std::string refresh = "once";
  double q_lambda = 1.1;
  double tau = 0.1;
  double tf = 1.0;
  std::vector<double> fixed_h;
  std::uint64_t seed = 20250101;
  std::string out;
  std::string cache_dir = ".superstep-cache";
  double penalty = 0.52;
  std::string step_log;
  double h0 = 0.0;
};

ExperimentConfig to_config(const RawOptions& o) {
  ExperimentConfig c;
  c.problem = o.problem;
  c.method = superstep::parse_method(o.method);
  c.nu = o.nu;
  c.n_v = o.nv;
  c.n_x = o.nx;
  c.rtols = o.rtol;
  c.atol = o.atol;
  c.norm = superstep::parse_norm_kind(o.norm);
  c.eig_mode = superstep::parse_eig_mode(o.eig_mode);
  c.refresh = superstep::parse_refresh_policy(o.refresh);
  c.q_lambda = o.q_lambda;
  c.tau = o.tau;
  c.t_f = o.tf;
  c.fixed_h = o.fixed_h;
  c.seed = o.seed;
  c.out = o.out;
  c.cache_dir = o.cache_dir;
  c.dg_penalty = o.penalty;
  c.step_log = o.step_log;
  c.h0 = o.h0;
  return c;
}

void emit(const ExperimentConfig& cfg, const std::vector<superstep::CsvRow>& rows) {
  if (cfg.out.empty()) {
    superstep::write_csv(std::cout, rows);
    return;
  }
  std::ofstream os(cfg.out);
  if (!os) throw std::runtime_error("cannot open " + cfg.out.string());
  superstep::write_csv(os, rows);
  std::cerr << "wrote " << rows.size() << " rows to " << cfg.out.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive super-time-stepping benchmarks for stiff diffusion"};
  app.set_config("--config", "", "key=value file with default flag values");
  app.require_subcommand(1);

  RawOptions o;
  app.add_option("--problem", o.problem, "fd or dg")->check(CLI::IsMember({"fd", "dg"}));
  app.add_option("--method", o.method, "rkc rkl ssp2 ssp3 ssp4 dirk2 dirk3")
      ->check(CLI::IsMember({"rkc", "rkl", "ssp2", "ssp3", "ssp4", "dirk2", "dirk3"}));
  app.add_option("--nu", o.nu, "diffusion scale");
  app.add_option("--nv", o.nv, "cells or grid points along v");
  app.add_option("--nx", o.nx, "cells or grid points along x");
  app.add_option("--rtol", o.rtol, "relative tolerances")->delimiter(',');
  app.add_option("--atol", o.atol, "absolute tolerance");
  app.add_option("--norm", o.norm, "component or cell")->check(CLI::IsMember({"component", "cell", "cellwise"}));
  app.add_option("--eig-mode", o.eig_mode, "user or power")->check(CLI::IsMember({"user", "power"}));
  app.add_option("--refresh", o.refresh, "once, periodic or on-failure")
      ->check(CLI::IsMember({"once", "periodic", "on-failure"}));
  app.add_option("--q-lambda", o.q_lambda, "eigensafety factor");
  app.add_option("--tau", o.tau, "power-iteration tolerance");
  app.add_option("--tf", o.tf, "final time");
  app.add_option("--fixed-h", o.fixed_h, "fixed step sizes (replaces the rtol sweep)")->delimiter(',');
  app.add_option("--seed", o.seed, "power-iteration seed");
  app.add_option("--out", o.out, "CSV output file (default stdout)");
  app.add_option("--cache-dir", o.cache_dir, "reference solution cache directory ('' disables)");
  app.add_option("--penalty", o.penalty, "DG interior-penalty constant");
  app.add_option("--h0", o.h0, "first adaptive step (0 estimates it from the initial state)");
  app.add_option("--step-log", o.step_log, "append one line per step attempt to this file");

  auto* run = app.add_subcommand("run", "run one experiment over its rtol or fixed-h list");
  run->fallthrough();
  std::string study_name;
  auto* study = app.add_subcommand("study", "run a named parameter study");
  study->fallthrough();
  study->add_option("name", study_name, "efficiency, stability, eigsafety, normcompare or eigmode")
      ->required()
      ->check(CLI::IsMember(superstep::study_names()));

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = to_config(o);
    cfg.validate();
    if (cfg.eig_mode == superstep::EigMode::Power) {
      if (auto w = superstep::eigsafety_warning(superstep::EigSafety{cfg.q_lambda}, cfg.tau)) {
        std::cerr << "warning: " << *w << '\n';
      }
    }
    if (*run) {
      emit(cfg, superstep::run_experiment(cfg));
    } else {
      emit(cfg, superstep::run_study(study_name, cfg));
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
