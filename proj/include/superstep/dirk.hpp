#pragma once

#include <functional>
#include <span>
#include <string>

#include "superstep/problem.hpp"
#include "superstep/state.hpp"
#include "superstep/tableau.hpp"

namespace superstep {

/// Order 2: implicit part of ARK2 (gamma = 1 - 1/sqrt2). Order 3: ESDIRK3(2)5L[2]SA.
ButcherTableau dirk_tableau(int order);

struct NewtonConfig {
  /// Converged when the WRMS norm of the stage residual is at most this.
  double tolerance = 0.1;
  int max_newton_iters = 5;
  int max_cg_iters = 200;
  /// CG relative tolerance = cg_factor * tolerance.
  double cg_factor = 0.1;
  NormKind norm = NormKind::Component;

  void validate() const;
};

enum class CgStatus { Converged, MaxIters, Indefinite };

struct CgResult {
  CgStatus status = CgStatus::Converged;
  int iters = 0;
  double relative_residual = 0.0;
};

using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

/// Jacobi-preconditioned CG for SPD A; `precond_diag` empty means no preconditioning.
/// Starts from x = 0 and stops at ||r||_2 <= tol * ||b||_2.
CgResult cg_solve(const LinearOperator& apply_a, std::span<const double> b, std::span<const double> precond_diag,
                  double tol, int max_iters, std::span<double> x);

struct DirkStepResult {
  bool ok = true;
  std::string failure;
  int newton_iters = 0;
  int cg_iters = 0;
  int rhs_evals = 0;
};

/// Stage workspace for one DIRK integration.
class DirkStepper {
 public:
  DirkStepper(const GridLayout& layout, const ButcherTableau& tableau);

  /// `jac_diag` is the Jacobian diagonal for the Jacobi preconditioner (may be empty).
  /// Newton weights come from f_n and `tol`.
  DirkStepResult step(const RhsFunction& rhs, double t_n, const StateVector& f_n, double h,
                      const NewtonConfig& newton, const ToleranceSpec& tol, std::span<const double> jac_diag);

  [[nodiscard]] const StateVector& f_next() const noexcept { return f_next_; }
  [[nodiscard]] const StateVector& error() const noexcept { return err_; }
  [[nodiscard]] const ButcherTableau& tableau() const noexcept { return tab_; }

 private:
  ButcherTableau tab_;
  std::vector<StateVector> stage_g_;
  StateVector z_, known_, residual_, delta_, work_, f_next_, err_;
  std::vector<double> precond_;
};

}  // namespace superstep
