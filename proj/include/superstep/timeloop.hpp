#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "superstep/dirk.hpp"
#include "superstep/domeig.hpp"
#include "superstep/problem.hpp"
#include "superstep/ssp.hpp"
#include "superstep/state.hpp"
#include "superstep/sts.hpp"

namespace superstep {

enum class Method { RKC, RKL, SSP2, SSP3, SSP4, DIRK2, DIRK3 };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
bool is_sts(Method method);
bool is_dirk(Method method);
/// Convergence order of the propagated solution.
int method_order(Method method);
/// Order p entering the controller exponent 1 / (p + 1).
int controller_order(Method method);

enum class EigMode { User, Power };
enum class RefreshPolicy { Once, Periodic, OnFailure };

std::string_view to_string(EigMode mode);
EigMode parse_eig_mode(std::string_view name);
std::string_view to_string(RefreshPolicy policy);
RefreshPolicy parse_refresh_policy(std::string_view name);

struct EigenPolicy {
  EigMode mode = EigMode::Power;
  RefreshPolicy refresh = RefreshPolicy::Once;
  int period = 25;  // accepted steps between estimates for Periodic / OnFailure
  EigSafety safety;
  PowerIterConfig power;
  int max_stages = kDefaultMaxStages;
};

struct ControllerConfig {
  double safety = 0.9;
  double growth_first = 20.0;
  double growth = 1.5;
  double shrink = 0.1;
  int order = 0;    // 0: controller_order(method)
  double h0 = 0.0;           // 0: 1e-4 * t_f, or the start-up estimate below
  bool estimate_h0 = false;  // with h0 = 0, use initial_step_estimate
  double h_min = 1e-14;
  int max_consecutive_rejections = 10;

  void validate() const;
};

struct RunStats {
  long attempted = 0;
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  long stages_total = 0;
  long domeig_calls = 0;
  long domeig_iters = 0;
  long newton_iters = 0;
  long cg_iters = 0;
  double lambda_eff = 0.0;  // last value used
  double wall_seconds = 0.0;

  [[nodiscard]] double failure_rate() const noexcept {
    return attempted == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(attempted);
  }
};

struct StepRecord {
  double t = 0.0;
  double h = 0.0;
  double error_norm = 0.0;
  bool accepted = false;
  int stages = 0;
  double lambda_eff = 0.0;
};

enum class RunStatus { Completed, BlewUp, StepTooSmall, TooManyRejections, NonFinite, StageLimit, SolverFailure };
std::string_view to_string(RunStatus status);

struct RunResult {
  RunStatus status = RunStatus::Completed;
  std::string message;
  std::vector<StateVector> samples;
  RunStats stats;
  std::vector<StepRecord> log;
  [[nodiscard]] bool ok() const noexcept { return status == RunStatus::Completed; }
  [[nodiscard]] bool blew_up() const noexcept { return status == RunStatus::BlewUp; }
};

struct AdaptiveOptions {
  Method method = Method::RKL;
  ToleranceSpec tol;
  NormKind norm = NormKind::Cellwise;
  EigenPolicy eig;
  ControllerConfig controller;
  NewtonConfig newton;
  double t_f = 1.0;
  std::vector<double> sample_times;
  bool record_log = false;
};

struct FixedOptions {
  Method method = Method::RKL;
  double h = 1e-3;
  double t_f = 1.0;
  std::vector<double> sample_times;
  /// STS eigenvalue source and Newton weights; norm/tol only shape the difference quotient.
  EigenPolicy eig;
  ToleranceSpec tol;
  NormKind norm = NormKind::Cellwise;
  NewtonConfig newton;
  double blowup_factor = kBlowUpFactor;
  bool record_log = false;
};

/// Supplies lambda_eff to the STS drivers according to the refresh policy.
class EigenMonitor {
 public:
  EigenMonitor(const Problem& problem, EigenPolicy policy, ToleranceSpec tol, NormKind norm);

  /// Called before each attempt; re-estimates when the policy asks for it.
  double lambda_eff(double t, const StateVector& f, RunStats& stats);
  void on_accept();
  void on_reject();
  [[nodiscard]] const std::optional<DomEigEstimate>& last_estimate() const noexcept { return last_; }

 private:
  const Problem& problem_;
  EigenPolicy policy_;
  ToleranceSpec tol_;
  NormKind norm_;
  NullspaceProjector nullspace_;
  std::optional<double> current_;
  std::optional<DomEigEstimate> last_;
  int accepted_since_ = 0;
  bool stale_ = true;
};

RunResult advance_adaptive(const Problem& problem, const AdaptiveOptions& options);
RunResult advance_fixed(const Problem& problem, const FixedOptions& options);

/// Start-up step from a difference estimate of the second derivative,
/// h = 0.5 sqrt(2 / ||f''||), iterated until it settles, within [100 u |t|, 0.1 |t_out - t0|].
double initial_step_estimate(const RhsFunction& rhs, double t0, const StateVector& f0, double t_out,
                             const ToleranceSpec& tol, NormKind norm, long* rhs_evals = nullptr);

/// t_k = k * t_f / count, k = 1..count.
std::vector<double> sample_times(double t_f, int count = 20);

/// One line per attempt: t h E accepted stages lambda_eff.
void write_step_log(std::ostream& os, const std::vector<StepRecord>& log);

}  // namespace superstep
