#pragma once

#include <stdexcept>
#include <string_view>
#include <vector>

#include "superstep/problem.hpp"
#include "superstep/state.hpp"

namespace superstep {

enum class StsFamily { RKC2, RKL2 };

std::string_view to_string(StsFamily family);

/// Three-term recursion coefficients for one stage count, indexed by stage j = 0..s.
///   z_1 = z_0 + h * mu_tilde[1] * G(z_0)
///   z_j = mu[j] z_{j-1} + nu[j] z_{j-2} + (1 - mu[j] - nu[j]) z_0
///         + h * mu_tilde[j] * G(t_n + c[j-1] h, z_{j-1}) + h * gamma_tilde[j] * G(z_0)
struct StsCoefficients {
  StsFamily family = StsFamily::RKL2;
  int s = 0;
  std::vector<double> mu;
  std::vector<double> nu;
  std::vector<double> mu_tilde;
  std::vector<double> gamma_tilde;
  std::vector<double> c;  // stage abscissae, c[0] = 0, c[s] = 1
  double stability_bound = 0.0;
};

class StageCountError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

StsCoefficients rkl2_coefficients(int s);
/// Damped Chebyshev construction with damping `eps`.
StsCoefficients rkc2_coefficients(int s, double eps = 2.0 / 13.0);
StsCoefficients sts_coefficients(StsFamily family, int s);

/// Length of the real stability interval [-beta(s), 0].
/// RKL2: (s^2 + s - 2) / 2.  RKC2: (1 + w0) / w1, roughly 0.653 (s^2 - 1).
double stability_interval(StsFamily family, int s);

/// R_s(z) from the scalar recursion on f' = lambda f, z = h lambda.
double stability_function(const StsCoefficients& coeffs, double z);

inline constexpr int kDefaultMaxStages = 10000;

/// Smallest s >= 2 with stability_interval(family, s) >= h * lambda_eff.
int stage_count(double h, double lambda_eff, StsFamily family, int max_stages = kDefaultMaxStages);

/// Largest step the family supports with at most `max_stages` stages.
double max_stable_step(double lambda_eff, StsFamily family, int max_stages = kDefaultMaxStages);

/// Register set for one STS step: z_{j-1}, z_{j-2}, the cached G(z_0), and a scratch
/// register that ends up holding G(t_{n+1}, f_{n+1}).
class StsStepper {
 public:
  explicit StsStepper(const GridLayout& layout);

  /// Advances f_n by h. Returns false if a stage became non-finite.
  /// Performs exactly s + 1 right-hand side evaluations.
  bool step(const RhsFunction& rhs, double t_n, const StateVector& f_n, double h, const StsCoefficients& coeffs);

  [[nodiscard]] const StateVector& f_next() const noexcept { return *zm1_; }
  [[nodiscard]] const StateVector& g_n() const noexcept { return g0_; }
  [[nodiscard]] const StateVector& g_next() const noexcept { return scratch_; }
  [[nodiscard]] int rhs_evals() const noexcept { return rhs_evals_; }

 private:
  StateVector a_;
  StateVector b_;
  StateVector g0_;
  StateVector scratch_;
  StateVector* zm1_ = &a_;
  StateVector* zm2_ = &b_;
  int rhs_evals_ = 0;
};

/// eps = (12 (f_n - f_next) + 6 h (g_n + g_next)) / 15, written into `out`.
void hermite_error(const StateVector& f_n, const StateVector& f_next, const StateVector& g_n,
                   const StateVector& g_next, double h, StateVector& out);
StateVector hermite_error(const StateVector& f_n, const StateVector& f_next, const StateVector& g_n,
                          const StateVector& g_next, double h);

}  // namespace superstep
