#pragma once

#include <Eigen/Dense>

#include "superstep/problem.hpp"

namespace superstep {

/// Second-order centered finite differences for d/dv (D(v) d/dv f) on a periodic
/// n_v x n_x node grid, v_i = -pi + i*dv. The operator is in flux form with D
/// evaluated at the face midpoints v_{i+1/2}, so it is conservative and symmetric.
/// x-lines are uncoupled replicas of the same 1-D operator.
class FdProblem final : public Problem {
 public:
  FdProblem(double nu, std::size_t n_v, std::size_t n_x, double modulation = 0.99);

  [[nodiscard]] std::string name() const override { return "fd"; }
  [[nodiscard]] const GridLayout& layout() const override { return layout_; }

  void rhs(double t, std::span<const double> u, std::span<double> du) const override;
  using Problem::rhs;

  [[nodiscard]] StateVector initial_condition() const override;
  [[nodiscard]] double lambda_user() const override;
  [[nodiscard]] std::optional<StateVector> jacobian_diagonal() const override;
  [[nodiscard]] std::vector<StateVector> nullspace() const override;
  [[nodiscard]] BlockStructure blocks() const override;
  [[nodiscard]] double mass(const StateVector& u) const override;

  [[nodiscard]] double nu() const noexcept { return nu_; }
  [[nodiscard]] double node(std::size_t i) const;
  /// face_d[i] = D(v_{i+1/2}); face n_v wraps onto face 0.
  [[nodiscard]] std::span<const double> face_diffusivity() const noexcept { return face_d_; }

 private:
  GridLayout layout_;
  double nu_;
  double modulation_;
  std::vector<double> face_d_;
};

/// Dense N x N matrix of the FD operator, assembled from the stencil. Test oracle;
/// throws std::length_error above `max_dofs`.
Eigen::MatrixXd assemble_matrix_fd(const FdProblem& problem, std::size_t max_dofs = 4096);

}  // namespace superstep
