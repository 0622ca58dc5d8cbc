#pragma once

#include <Eigen/Dense>

#include "superstep/problem.hpp"

namespace superstep {

/// Piecewise-linear DG (symmetric interior penalty) for d/dv (D(v) d/dv f) on an
/// n_v x n_x periodic cell mesh. Cell c = k*n_v + i holds four modal dofs
///   0: 1,  1: sqrt3*xi_v,  2: sqrt3*xi_x,  3: 3*xi_v*xi_x     (xi in [-1, 1])
/// which are orthonormal under the cell mean, so dof 0 is the cell average.
/// Dofs (0,1) and (2,3) form two x-mode families acted on by the same 1-D operator.
class DgProblem final : public Problem {
 public:
  struct Options {
    /// tau_f = penalty * (p+1)^2 * D(v_f) / dv. Coercive above 0.25.
    double penalty = 0.52;
    int quad_order = 8;      // projection and cell averages
    int stiffness_quad = 2;  // volume integral of D
    double modulation = 0.99;
  };

  DgProblem(double nu, std::size_t n_v, std::size_t n_x);
  DgProblem(double nu, std::size_t n_v, std::size_t n_x, Options options);

  [[nodiscard]] std::string name() const override { return "dg"; }
  [[nodiscard]] const GridLayout& layout() const override { return layout_; }

  void rhs(double t, std::span<const double> u, std::span<double> du) const override;
  using Problem::rhs;

  [[nodiscard]] StateVector initial_condition() const override;
  [[nodiscard]] double lambda_user() const override;
  [[nodiscard]] std::vector<StateVector> nullspace() const override;
  [[nodiscard]] BlockStructure blocks() const override;
  [[nodiscard]] double mass(const StateVector& u) const override;

  [[nodiscard]] double nu() const noexcept { return nu_; }
  [[nodiscard]] const Options& options() const noexcept { return options_; }
  [[nodiscard]] double face_position(std::size_t face) const;  // right face of cell `face`
  [[nodiscard]] double cell_left(std::size_t i) const;
  [[nodiscard]] double diffusivity(double v) const;
  [[nodiscard]] double cell_average_diffusivity(std::size_t i) const;

  /// Point value of the DG solution at v (periodic wrap) on x-line `k`, with xi_x in [-1, 1].
  [[nodiscard]] double point_value(const StateVector& u, double v, std::size_t k, double xi_x = 0.0) const;

 private:
  GridLayout layout_;
  double nu_;
  Options options_;
  std::vector<double> face_d_;     // D at the right face of each v-cell
  std::vector<double> face_tau_;   // penalty at the same face
  std::vector<double> volume_;     // 12/dv^3 * integral of D over the cell
};

/// Dense N x N DG operator assembled from the SIPG bilinear form, face by face and
/// cell by cell with explicit trace and derivative tables. Independent of rhs().
Eigen::MatrixXd assemble_matrix_dg(const DgProblem& problem, std::size_t max_dofs = 4096);

}  // namespace superstep
