#include "superstep/timeloop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace superstep {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::RKC: return "rkc";
    case Method::RKL: return "rkl";
    case Method::SSP2: return "ssp2";
    case Method::SSP3: return "ssp3";
    case Method::SSP4: return "ssp4";
    case Method::DIRK2: return "dirk2";
    case Method::DIRK3: return "dirk3";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::RKC, Method::RKL, Method::SSP2, Method::SSP3, Method::SSP4, Method::DIRK2, Method::DIRK3}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

bool is_sts(Method m) { return m == Method::RKC || m == Method::RKL; }
bool is_dirk(Method m) { return m == Method::DIRK2 || m == Method::DIRK3; }

int method_order(Method m) {
  switch (m) {
    case Method::SSP3:
    case Method::DIRK3: return 3;
    case Method::SSP4: return 4;
    default: return 2;
  }
}

int controller_order(Method m) {
  if (is_sts(m)) return 2;
  return method_order(m) - 1;
}

std::string_view to_string(EigMode mode) { return mode == EigMode::User ? "user" : "power"; }

EigMode parse_eig_mode(std::string_view name) {
  if (name == "user") return EigMode::User;
  if (name == "power") return EigMode::Power;
  throw std::invalid_argument("unknown eigenvalue mode '" + std::string(name) + "'");
}

std::string_view to_string(RefreshPolicy p) {
  switch (p) {
    case RefreshPolicy::Once: return "once";
    case RefreshPolicy::Periodic: return "periodic";
    case RefreshPolicy::OnFailure: return "on-failure";
  }
  return "?";
}

RefreshPolicy parse_refresh_policy(std::string_view name) {
  if (name == "once") return RefreshPolicy::Once;
  if (name == "periodic") return RefreshPolicy::Periodic;
  if (name == "on-failure" || name == "on_failure") return RefreshPolicy::OnFailure;
  throw std::invalid_argument("unknown refresh policy '" + std::string(name) + "'");
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "ok";
    case RunStatus::BlewUp: return "blew_up";
    case RunStatus::StepTooSmall: return "step_too_small";
    case RunStatus::TooManyRejections: return "too_many_rejections";
    case RunStatus::NonFinite: return "non_finite";
    case RunStatus::StageLimit: return "stage_limit";
    case RunStatus::SolverFailure: return "solver_failure";
  }
  return "?";
}

void ControllerConfig::validate() const {
  if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("controller safety must lie in (0, 1]");
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("controller shrink must lie in (0, 1)");
  if (!(growth > 1.0 && growth_first > 1.0)) throw std::invalid_argument("controller growth must exceed 1");
  if (h0 < 0.0 || !(h_min > 0.0)) throw std::invalid_argument("invalid initial or minimum step");
  if (max_consecutive_rejections < 1) throw std::invalid_argument("rejection cap must be positive");
}

double initial_step_estimate(const RhsFunction& rhs, double t0, const StateVector& f0, double t_out,
                             const ToleranceSpec& tol, NormKind norm, long* rhs_evals) {
  const double span = std::fabs(t_out - t0);
  if (!(span > 0.0)) throw std::invalid_argument("initial_step_estimate: empty interval");
  long evals = 0;
  StateVector g0(f0.layout());
  rhs(t0, f0.values(), g0.values());
  ++evals;

  const double lb = 100.0 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(t0), std::fabs(t_out));
  double ub = 0.1 * span;
  double ub_inv = 0.0;
  for (std::size_t i = 0; i < f0.size(); ++i) {
    const double scale = 0.1 * std::fabs(f0[i]) + tol.atol;
    if (scale > 0.0) ub_inv = std::max(ub_inv, std::fabs(g0[i]) / scale);
  }
  if (ub_inv * ub > 1.0) ub = 1.0 / ub_inv;

  double hg = std::sqrt(lb * ub);
  double h_new = hg;
  if (ub >= lb) {
    StateVector y1(f0.layout());
    StateVector g1(f0.layout());
    StateVector ydd(f0.layout());
    for (int count = 1;; ++count) {
      lincomb(y1.values(), 1.0, f0.values(), hg, g0.values());
      rhs(t0 + hg, y1.values(), g1.values());
      ++evals;
      lincomb(ydd.values(), 1.0 / hg, g1.values(), -1.0 / hg, g0.values());
      const double ydd_norm = wrms(norm, ydd, f0, tol);
      if (!std::isfinite(ydd_norm)) {
        h_new = hg * 0.2;
      } else {
        h_new = ydd_norm * ub * ub > 2.0 ? std::sqrt(2.0 / ydd_norm) : std::sqrt(hg * ub);
      }
      if (count >= 4) break;
      const double ratio = h_new / hg;
      if (ratio > 0.5 && ratio < 2.0) break;
      if (count >= 2 && ratio > 2.0) {
        h_new = hg;
        break;
      }
      hg = h_new;
    }
    h_new *= 0.5;
  }
  if (rhs_evals != nullptr) *rhs_evals += evals;
  return std::clamp(h_new, lb, ub);
}

std::vector<double> sample_times(double t_f, int count) {
  if (!(t_f > 0.0) || count < 1) throw std::invalid_argument("sample_times: need t_f > 0 and count >= 1");
  std::vector<double> ts(count);
  for (int k = 1; k <= count; ++k) ts[k - 1] = k == count ? t_f : t_f * k / count;
  return ts;
}

void write_step_log(std::ostream& os, const std::vector<StepRecord>& log) {
  os << "# t h E accepted stages lambda_eff\n";
  const auto flags = os.flags();
  os.precision(17);
  for (const StepRecord& r : log) {
    os << r.t << ' ' << r.h << ' ' << r.error_norm << ' ' << (r.accepted ? 1 : 0) << ' ' << r.stages << ' '
       << r.lambda_eff << '\n';
  }
  os.flags(flags);
}

EigenMonitor::EigenMonitor(const Problem& problem, EigenPolicy policy, ToleranceSpec tol, NormKind norm)
    : problem_(problem), policy_(std::move(policy)), tol_(tol), norm_(norm) {
  policy_.safety.validate();
  if (policy_.period < 1) throw std::invalid_argument("refresh period must be positive");
  if (policy_.mode == EigMode::Power) nullspace_ = NullspaceProjector(problem_.nullspace());
}

double EigenMonitor::lambda_eff(double t, const StateVector& f, RunStats& stats) {
  if (policy_.mode == EigMode::User) {
    if (!current_) current_ = policy_.safety.q_lambda * problem_.lambda_user();
    return *current_;
  }
  bool refresh = stale_ || !current_;
  if (policy_.refresh != RefreshPolicy::Once && accepted_since_ >= policy_.period) refresh = true;
  if (refresh) {
    PowerIterConfig cfg = policy_.power;
    cfg.norm = norm_;
    DomEigEstimate est = power_iterate(problem_.rhs_function(), t, f, cfg, tol_, nullspace_);
    ++stats.domeig_calls;
    stats.domeig_iters += est.iters;
    stats.rhs_evals += est.rhs_evals;
    current_ = effective_lambda(est, policy_.safety);
    last_ = est;
    accepted_since_ = 0;
    stale_ = false;
  }
  return *current_;
}

void EigenMonitor::on_accept() { ++accepted_since_; }

void EigenMonitor::on_reject() {
  if (policy_.refresh == RefreshPolicy::OnFailure) stale_ = true;
}

namespace {

class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual bool attempt(double t, const StateVector& f, double h, int stages, RunStats& stats, std::string& why) = 0;
  [[nodiscard]] virtual const StateVector& solution() const = 0;
  [[nodiscard]] virtual const StateVector& error() const = 0;
  [[nodiscard]] virtual int fixed_stages() const { return 0; }
};

class StsKernel final : public Kernel {
 public:
  StsKernel(const Problem& p, StsFamily family)
      : rhs_(p.rhs_function()), family_(family), stepper_(p.layout()), err_(p.layout()) {}

  bool attempt(double t, const StateVector& f, double h, int stages, RunStats& stats, std::string& why) override {
    auto it = cache_.find(stages);
    if (it == cache_.end()) {
      if (cache_.size() > 64) cache_.clear();
      it = cache_.emplace(stages, sts_coefficients(family_, stages)).first;
    }
    const bool ok = stepper_.step(rhs_, t, f, h, it->second);
    stats.rhs_evals += stepper_.rhs_evals();
    stats.stages_total += stages;
    hermite_error(f, stepper_.f_next(), stepper_.g_n(), stepper_.g_next(), h, err_);
    if (!ok) why = "non-finite stage";
    return ok && err_.all_finite();
  }
  const StateVector& solution() const override { return stepper_.f_next(); }
  const StateVector& error() const override { return err_; }

 private:
  RhsFunction rhs_;
  StsFamily family_;
  StsStepper stepper_;
  StateVector err_;
  std::map<int, StsCoefficients> cache_;
};

class SspKernel final : public Kernel {
 public:
  SspKernel(const Problem& p, int order) : rhs_(p.rhs_function()), scheme_(ssp_scheme(order)), stepper_(p.layout()) {}

  bool attempt(double t, const StateVector& f, double h, int, RunStats& stats, std::string& why) override {
    const bool ok = stepper_.step(rhs_, t, f, h, scheme_);
    stats.rhs_evals += stepper_.rhs_evals();
    stats.stages_total += scheme_.s;
    if (!ok) why = "non-finite stage";
    return ok;
  }
  const StateVector& solution() const override { return stepper_.f_next(); }
  const StateVector& error() const override { return stepper_.error(); }
  int fixed_stages() const override { return scheme_.s; }

 private:
  RhsFunction rhs_;
  ShuOsherScheme scheme_;
  SspStepper stepper_;
};

class DirkKernel final : public Kernel {
 public:
  DirkKernel(const Problem& p, int order, NewtonConfig newton, ToleranceSpec tol)
      : rhs_(p.rhs_function()), stepper_(p.layout(), dirk_tableau(order)), newton_(newton), tol_(tol) {
    auto diag = p.jacobian_diagonal();
    if (!diag) throw std::invalid_argument("DIRK methods need a problem that provides its Jacobian diagonal");
    diag_.assign(diag->raw().begin(), diag->raw().end());
  }

  bool attempt(double t, const StateVector& f, double h, int, RunStats& stats, std::string& why) override {
    const DirkStepResult r = stepper_.step(rhs_, t, f, h, newton_, tol_, diag_);
    stats.rhs_evals += r.rhs_evals;
    stats.newton_iters += r.newton_iters;
    stats.cg_iters += r.cg_iters;
    stats.stages_total += stepper_.tableau().s;
    if (!r.ok) why = r.failure;
    return r.ok;
  }
  const StateVector& solution() const override { return stepper_.f_next(); }
  const StateVector& error() const override { return stepper_.error(); }
  int fixed_stages() const override { return stepper_.tableau().s; }

 private:
  RhsFunction rhs_;
  DirkStepper stepper_;
  NewtonConfig newton_;
  ToleranceSpec tol_;
  std::vector<double> diag_;
};

std::unique_ptr<Kernel> make_kernel(const Problem& p, Method m, const NewtonConfig& newton, const ToleranceSpec& tol) {
  switch (m) {
    case Method::RKC: return std::make_unique<StsKernel>(p, StsFamily::RKC2);
    case Method::RKL: return std::make_unique<StsKernel>(p, StsFamily::RKL2);
    case Method::SSP2: return std::make_unique<SspKernel>(p, 2);
    case Method::SSP3: return std::make_unique<SspKernel>(p, 3);
    case Method::SSP4: return std::make_unique<SspKernel>(p, 4);
    case Method::DIRK2: return std::make_unique<DirkKernel>(p, 2, newton, tol);
    case Method::DIRK3: return std::make_unique<DirkKernel>(p, 3, newton, tol);
  }
  throw std::invalid_argument("unknown method");
}

StsFamily family_of(Method m) { return m == Method::RKC ? StsFamily::RKC2 : StsFamily::RKL2; }

void check_samples(const std::vector<double>& ts, double t_f) {
  if (!(t_f > 0.0)) throw std::invalid_argument("final time must be positive");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < 0.0 || ts[i] > t_f) throw std::invalid_argument("sample time outside [0, t_f]");
    if (i > 0 && ts[i] < ts[i - 1]) throw std::invalid_argument("sample times must be sorted");
  }
}

// Records every sample time reached by t.
void collect_samples(const std::vector<double>& ts, std::size_t& next, double t, double eps, const StateVector& f,
                     std::vector<StateVector>& out) {
  while (next < ts.size() && ts[next] <= t + eps) {
    out.push_back(f);
    ++next;
  }
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

RunResult advance_adaptive(const Problem& problem, const AdaptiveOptions& opt) {
  opt.tol.validate();
  opt.controller.validate();
  check_samples(opt.sample_times, opt.t_f);
  const ControllerConfig& ctrl = opt.controller;

  RunResult res;
  const auto start = std::chrono::steady_clock::now();
  auto kernel = make_kernel(problem, opt.method, opt.newton, opt.tol);
  std::optional<EigenMonitor> monitor;
  if (is_sts(opt.method)) monitor.emplace(problem, opt.eig, opt.tol, opt.norm);

  const int p = ctrl.order > 0 ? ctrl.order : controller_order(opt.method);
  const double expo = -1.0 / (p + 1.0);
  const double eps_t = 1e-12 * std::max(1.0, opt.t_f);

  StateVector f = problem.initial_condition();
  double t = 0.0;
  double h = ctrl.h0 > 0.0 ? ctrl.h0 : 1e-4 * opt.t_f;
  if (ctrl.h0 == 0.0 && ctrl.estimate_h0) {
    const double t_out = opt.sample_times.empty() ? opt.t_f : opt.sample_times.front();
    h = initial_step_estimate(problem.rhs_function(), t, f, t_out, opt.tol, opt.norm, &res.stats.rhs_evals);
  }
  std::size_t next_sample = 0;
  collect_samples(opt.sample_times, next_sample, t, eps_t, f, res.samples);

  bool first = true;
  int consecutive = 0;
  bool last_nonfinite = false;
  try {
    while (opt.t_f - t > eps_t) {
      double target = opt.t_f;
      if (next_sample < opt.sample_times.size()) target = std::min(target, opt.sample_times[next_sample]);
      double h_try = h;
      bool landing = false;
      if (t + h_try >= target - eps_t) {
        h_try = target - t;
        landing = true;
      }

      int stages = kernel->fixed_stages();
      double lam = 0.0;
      if (monitor) {
        const StsFamily fam = family_of(opt.method);
        lam = monitor->lambda_eff(t, f, res.stats);
        res.stats.lambda_eff = lam;
        const double h_cap = max_stable_step(lam, fam, opt.eig.max_stages);
        if (h_try > h_cap) {
          h_try = h_cap;
          landing = false;
        }
        stages = stage_count(h_try, lam, fam, opt.eig.max_stages);
      }

      ++res.stats.attempted;
      std::string why;
      const bool ok = kernel->attempt(t, f, h_try, stages, res.stats, why);
      double e = std::numeric_limits<double>::infinity();
      if (ok) {
        e = wrms(opt.norm, kernel->error(), f, opt.tol);
        if (!std::isfinite(e)) e = std::numeric_limits<double>::infinity();
      }
      last_nonfinite = !ok;
      const bool accept = e <= 1.0;
      if (opt.record_log) res.log.push_back({t, h_try, e, accept, stages, lam});

      if (accept) {
        ++res.stats.accepted;
        consecutive = 0;
        t = landing ? target : t + h_try;
        f = kernel->solution();
        collect_samples(opt.sample_times, next_sample, t, eps_t, f, res.samples);
        const double grow = first ? ctrl.growth_first : ctrl.growth;
        first = false;
        const double factor = e == 0.0 ? grow : std::clamp(ctrl.safety * std::pow(e, expo), ctrl.shrink, grow);
        double h_new = h_try * factor;
        if (h_try < h) h_new = std::max(h_new, h);
        h = h_new;
        if (monitor) monitor->on_accept();
      } else {
        ++res.stats.rejected;
        if (++consecutive > ctrl.max_consecutive_rejections) {
          res.status = last_nonfinite ? RunStatus::NonFinite : RunStatus::TooManyRejections;
          res.message = last_nonfinite ? why : "too many consecutive step rejections";
          break;
        }
        const double factor = std::isfinite(e) ? std::max(ctrl.shrink, ctrl.safety * std::pow(e, expo)) : ctrl.shrink;
        h = h_try * factor;
        if (monitor) monitor->on_reject();
      }
      if (h < ctrl.h_min) {
        res.status = RunStatus::StepTooSmall;
        std::ostringstream msg;
        msg << "step size " << h << " fell below " << ctrl.h_min << " at t = " << t;
        res.message = msg.str();
        break;
      }
    }
  } catch (const DomEigError& ex) {
    res.status = RunStatus::SolverFailure;
    res.message = ex.what();
  } catch (const StageCountError& ex) {
    res.status = RunStatus::StageLimit;
    res.message = ex.what();
  }
  res.stats.wall_seconds = elapsed(start);
  return res;
}

RunResult advance_fixed(const Problem& problem, const FixedOptions& opt) {
  if (!(opt.h > 0.0)) throw std::invalid_argument("fixed step size must be positive");
  check_samples(opt.sample_times, opt.t_f);

  RunResult res;
  const auto start = std::chrono::steady_clock::now();
  auto kernel = make_kernel(problem, opt.method, opt.newton, opt.tol);
  std::optional<EigenMonitor> monitor;
  if (is_sts(opt.method)) monitor.emplace(problem, opt.eig, opt.tol, opt.norm);
  const double eps_t = 1e-12 * std::max(1.0, opt.t_f);

  StateVector f = problem.initial_condition();
  double init_max = max_abs(f.values());
  if (!(init_max > 0.0)) init_max = 1.0;
  double t = 0.0;
  std::size_t next_sample = 0;
  collect_samples(opt.sample_times, next_sample, t, eps_t, f, res.samples);

  try {
    while (opt.t_f - t > eps_t) {
      double target = opt.t_f;
      if (next_sample < opt.sample_times.size()) target = std::min(target, opt.sample_times[next_sample]);
      double h_try = opt.h;
      bool landing = false;
      if (t + h_try >= target - eps_t) {
        h_try = target - t;
        landing = true;
      }
      int stages = kernel->fixed_stages();
      double lam = 0.0;
      if (monitor) {
        lam = monitor->lambda_eff(t, f, res.stats);
        res.stats.lambda_eff = lam;
        stages = stage_count(h_try, lam, family_of(opt.method), opt.eig.max_stages);
      }
      ++res.stats.attempted;
      std::string why;
      const bool ok = kernel->attempt(t, f, h_try, stages, res.stats, why);
      if (opt.record_log) res.log.push_back({t, h_try, 0.0, ok, stages, lam});
      if (!ok || blew_up(kernel->solution(), init_max, opt.blowup_factor)) {
        res.status = RunStatus::BlewUp;
        res.message = ok ? "solution exceeded the blow-up threshold" : why;
        break;
      }
      ++res.stats.accepted;
      t = landing ? target : t + h_try;
      f = kernel->solution();
      if (monitor) monitor->on_accept();
      collect_samples(opt.sample_times, next_sample, t, eps_t, f, res.samples);
    }
  } catch (const DomEigError& ex) {
    res.status = RunStatus::SolverFailure;
    res.message = ex.what();
  } catch (const StageCountError& ex) {
    res.status = RunStatus::StageLimit;
    res.message = ex.what();
  }
  res.stats.wall_seconds = elapsed(start);
  return res;
}

}  // namespace superstep
