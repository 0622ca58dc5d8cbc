#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "superstep/problem.hpp"
#include "superstep/state.hpp"

namespace superstep {

/// Raised when the dominant-eigenvalue estimate cannot be produced or is unusable.
class DomEigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PowerIterConfig {
  double tau = 0.1;
  int max_iters = 100;
  /// Normalized matvecs applied before the monitored Rayleigh-quotient loop.
  int warmup_iters = 25;
  std::uint64_t seed = 20250101;
  NormKind norm = NormKind::Cellwise;
  /// Early stop once ||Jv - lambda v||_2 <= residual_tol * |lambda| * ||v||_2.
  double residual_tol = 1e-6;
  /// Start vector; empty means seeded uniform random in [-1, 1].
  std::vector<double> initial_vector;

  void validate() const;
};

struct DomEigEstimate {
  double lambda_approx = 0.0;  // signed
  int iters = 0;               // monitored Rayleigh-quotient iterations
  int warmup_iters = 0;
  int rhs_evals = 0;
  bool converged = false;
  bool reseeded = false;
};

struct EigSafety {
  double q_lambda = 1.1;
  /// Largest positive dominant eigenvalue tolerated as round-off.
  double positive_tol = 1e-8;

  void validate() const;
};

/// (G(t, f + sigma v) - G(t, f)) / sigma with sigma = 1 / ||v||_WRMS, weights from f.
/// `g_f` may supply a cached G(t, f); otherwise it is evaluated here.
StateVector matvec_dq(const RhsFunction& rhs, double t, const StateVector& f, const StateVector& v,
                      const ToleranceSpec& tol, NormKind norm, const StateVector* g_f = nullptr);

/// Removes the components along an orthonormal set, stored by support.
class NullspaceProjector {
 public:
  NullspaceProjector() = default;
  explicit NullspaceProjector(std::span<const StateVector> basis);
  /// One classical Gram-Schmidt sweep when supports are disjoint, two otherwise.
  void apply(std::span<double> v) const;
  [[nodiscard]] bool empty() const noexcept { return vectors_.empty(); }

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> vectors_;
  bool disjoint_ = true;
};

/// Power iteration on the difference-quotient Jacobian at (t, f). The start vector is
/// orthogonalized against `nullspace` (an orthonormal set), as is every iterate.
DomEigEstimate power_iterate(const RhsFunction& rhs, double t, const StateVector& f, const PowerIterConfig& cfg,
                             const ToleranceSpec& tol, std::span<const StateVector> nullspace = {});
DomEigEstimate power_iterate(const RhsFunction& rhs, double t, const StateVector& f, const PowerIterConfig& cfg,
                             const ToleranceSpec& tol, const NullspaceProjector& nullspace);

/// Convenience overload taking the linearization state and nullspace from a problem.
DomEigEstimate power_iterate(const Problem& problem, double t, const StateVector& f, const PowerIterConfig& cfg,
                             const ToleranceSpec& tol);

/// q_lambda * |lambda_approx|.
double effective_lambda(const DomEigEstimate& est, const EigSafety& safety);

/// Message when q_lambda does not exceed 1 / (1 - tau).
std::optional<std::string> eigsafety_warning(const EigSafety& safety, double tau);

}  // namespace superstep
