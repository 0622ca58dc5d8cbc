#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "superstep/problem.hpp"
#include "superstep/timeloop.hpp"

namespace superstep {

struct ExperimentConfig {
  std::string problem = "dg";  // fd | dg
  Method method = Method::RKL;
  double nu = 1.0;
  std::size_t n_v = 120;
  std::size_t n_x = 20;
  std::vector<double> rtols{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double atol = 1e-11;
  NormKind norm = NormKind::Cellwise;
  EigMode eig_mode = EigMode::Power;
  RefreshPolicy refresh = RefreshPolicy::Once;
  double q_lambda = 1.1;
  double tau = 0.1;
  double t_f = 1.0;
  std::vector<double> fixed_h;  // non-empty: fixed-step sweep instead of rtols
  std::uint64_t seed = 20250101;
  std::filesystem::path out;        // empty: stdout
  std::filesystem::path cache_dir;  // empty: references are not cached
  std::filesystem::path step_log;   // non-empty: per-attempt records appended here
  double dg_penalty = 0.52;
  double h0 = 0.0;  // adaptive runs; 0: start-up estimate

  void validate() const;
};

std::unique_ptr<Problem> make_problem(const ExperimentConfig& cfg);

enum class ReferenceProvenance { DenseExponential, TightRkl };
std::string_view to_string(ReferenceProvenance p);

struct ReferenceSolution {
  std::vector<double> times;
  std::vector<StateVector> snapshots;
  ReferenceProvenance provenance = ReferenceProvenance::DenseExponential;
  std::uint64_t fingerprint = 0;
};

/// Hash of everything the exact solution depends on (problem, nu, grid, t_f, DG penalty).
std::uint64_t reference_fingerprint(const ExperimentConfig& cfg);
/// Hash of the full configuration, solver settings included.
std::uint64_t config_fingerprint(const ExperimentConfig& cfg);

inline constexpr std::size_t kDenseBlockLimit = 4096;

/// exp(t A) u0 per decoupled block via a symmetric eigendecomposition of one block.
/// Returns nullopt when the block is too large or the blocks are not identical.
std::optional<ReferenceSolution> dense_reference(const Problem& problem, const std::vector<double>& times);
/// RKL at rtol = 1e-12 with the cell-wise norm.
ReferenceSolution tight_reference(const Problem& problem, const std::vector<double>& times, double t_f);
/// Dense path when available, otherwise the tight run; consults cfg.cache_dir.
ReferenceSolution compute_reference(const ExperimentConfig& cfg);

void save_reference(const std::filesystem::path& file, const ReferenceSolution& ref, const GridLayout& layout);
/// nullopt when the file is missing, malformed, or belongs to another configuration.
std::optional<ReferenceSolution> load_reference(const std::filesystem::path& file, const GridLayout& layout,
                                                std::uint64_t fingerprint);

struct ErrorMetrics {
  double linf20 = 0.0;  // max over times of ||u - ref||_inf / ||ref||_inf
  double maxmax = 0.0;  // max over times of ||u - ref||_inf
};
ErrorMetrics error_metrics(const std::vector<StateVector>& samples, const std::vector<StateVector>& ref);

struct CsvRow {
  std::string study;
  ExperimentConfig cfg;
  bool fixed = false;
  double rtol_or_h = 0.0;
  ErrorMetrics error;
  RunStats stats;
  RunStatus status = RunStatus::Completed;
};

std::vector<CsvRow> run_experiment(const ExperimentConfig& cfg, const ReferenceSolution* reference = nullptr);

void write_csv_header(std::ostream& os);
void write_csv(std::ostream& os, const std::vector<CsvRow>& rows, bool header = true);

std::vector<std::string> study_names();
/// Expands `base` into the named sweep and runs it.
std::vector<CsvRow> run_study(std::string_view name, const ExperimentConfig& base);

}  // namespace superstep
