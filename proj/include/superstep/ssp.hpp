#pragma once

#include <string>
#include <vector>

#include "superstep/problem.hpp"
#include "superstep/state.hpp"
#include "superstep/tableau.hpp"

namespace superstep {

enum class SspKind { SSP22, SSP43, SSP104 };

/// Shu-Osher form: u^(0) = f_n and, for i = 1..s,
///   u^(i) = sum_{j<i} alpha[i][j] u^(j) + h beta[i][j] G(t_n + c_j h, u^(j)),
/// with f_{n+1} = u^(s). Stage derivatives are F_j = G(u^(j)), j = 0..s-1.
struct ShuOsherScheme {
  SspKind kind = SspKind::SSP22;
  std::string name;
  int s = 0;
  std::vector<std::vector<double>> alpha;  // (s+1) x s, row 0 unused
  std::vector<std::vector<double>> beta;
  std::vector<double> c;
  std::vector<double> b;
  std::vector<double> b_embed;
  int order = 0;
  int embed_order = 0;
};

/// SSP(2,2), SSP(4,3) or SSP(10,4) for order 2, 3 or 4.
ShuOsherScheme ssp_scheme(int order);
ShuOsherScheme ssp_scheme(SspKind kind);

/// Butcher form derived from alpha and beta, carrying the scheme's embedding.
ButcherTableau to_butcher(const ShuOsherScheme& scheme);

/// min over beta_ij > 0 of alpha_ij / beta_ij.
double ssp_coefficient(const ShuOsherScheme& scheme);

/// Low-storage stepper. Registers: two Shu-Osher registers, the running error
/// accumulator h * sum (b_i - b~_i) F_i, and the right-hand side output.
class SspStepper {
 public:
  explicit SspStepper(const GridLayout& layout);

  /// Returns false if a stage became non-finite.
  bool step(const RhsFunction& rhs, double t_n, const StateVector& f_n, double h, const ShuOsherScheme& scheme);

  [[nodiscard]] const StateVector& f_next() const noexcept { return q1_; }
  /// f_{n+1} - f~_{n+1}.
  [[nodiscard]] const StateVector& error() const noexcept { return err_; }
  [[nodiscard]] int rhs_evals() const noexcept { return rhs_evals_; }

 private:
  void stage(const RhsFunction& rhs, double t, const StateVector& u, double h, double err_weight);

  StateVector q1_;
  StateVector q2_;
  StateVector err_;
  StateVector g_;
  int rhs_evals_ = 0;
};

/// Reference implementation storing every stage; used to cross-check the kernels.
void ssp_step_reference(const RhsFunction& rhs, double t_n, const StateVector& f_n, double h,
                        const ShuOsherScheme& scheme, StateVector& f_next, StateVector& error);

inline constexpr double kBlowUpFactor = 1e10;

/// True when u is non-finite or max|u| exceeds factor * initial_max.
bool blew_up(const StateVector& u, double initial_max, double factor = kBlowUpFactor);

}  // namespace superstep
