#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "superstep/state.hpp"

namespace superstep {

/// Right-hand side of the semi-discrete IVP f' = G(t, f), written into `du`.
using RhsFunction = std::function<void(double t, std::span<const double> u, std::span<double> du)>;

/// Groups of dof indices on which the operator acts as identical, decoupled blocks.
/// Every block lists its dofs in the same relative order.
struct BlockStructure {
  std::vector<std::vector<std::size_t>> blocks;
};

/// A semi-discrete diffusion problem with the hooks the integrators and the
/// benchmark harness need.
class Problem {
 public:
  virtual ~Problem() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual const GridLayout& layout() const = 0;

  virtual void rhs(double t, std::span<const double> u, std::span<double> du) const = 0;
  [[nodiscard]] StateVector rhs(double t, const StateVector& u) const;
  [[nodiscard]] RhsFunction rhs_function() const;

  [[nodiscard]] virtual StateVector initial_condition() const = 0;

  /// Analytic bound on the magnitude of the dominant Jacobian eigenvalue.
  [[nodiscard]] virtual double lambda_user() const = 0;

  /// Jacobian diagonal, when the discretization provides it (Jacobi preconditioning).
  [[nodiscard]] virtual std::optional<StateVector> jacobian_diagonal() const { return std::nullopt; }

  /// Orthonormal basis of the known operator nullspace (may be empty).
  [[nodiscard]] virtual std::vector<StateVector> nullspace() const { return {}; }

  /// Default: one block holding every dof.
  [[nodiscard]] virtual BlockStructure blocks() const;

  /// Conserved total mass of a state.
  [[nodiscard]] virtual double mass(const StateVector& u) const;
};

/// D(v) = nu * (1 + modulation * sin(v)); the benchmark uses modulation = 0.99.
double benchmark_diffusivity(double v, double nu, double modulation = 0.99);

/// f0(v) = (1 + 0.3 sin(2v)) / sqrt(5.5 pi) * exp(-v^2 / 5.5).
double benchmark_initial_profile(double v);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int points);

}  // namespace superstep
