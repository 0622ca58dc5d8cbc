#include "superstep/problem_fd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace superstep {

FdProblem::FdProblem(double nu, std::size_t n_v, std::size_t n_x, double modulation)
    : layout_(GridLayout::finite_difference(n_v, n_x)), nu_(nu), modulation_(modulation) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(std::fabs(modulation) < 1.0)) throw std::invalid_argument("modulation must lie in (-1, 1)");
  face_d_.resize(n_v);
  for (std::size_t i = 0; i < n_v; ++i) {
    face_d_[i] = benchmark_diffusivity(node(i) + 0.5 * layout_.dv, nu_, modulation_);
  }
}

double FdProblem::node(std::size_t i) const {
  return -std::numbers::pi + static_cast<double>(i) * layout_.dv;
}

void FdProblem::rhs(double, std::span<const double> u, std::span<double> du) const {
  const std::size_t nv = layout_.n_v;
  if (u.size() != layout_.size() || du.size() != layout_.size()) {
    throw std::invalid_argument("fd rhs: layout mismatch");
  }
  const double inv_dv2 = 1.0 / (layout_.dv * layout_.dv);
  for (std::size_t k = 0; k < layout_.n_x; ++k) {
    const double* line = u.data() + k * nv;
    double* out = du.data() + k * nv;
    if (nv == 1) {
      out[0] = 0.0;
      continue;
    }
    // flux through face i (between nodes i and i+1)
    double flux_left = face_d_[nv - 1] * (line[0] - line[nv - 1]);
    for (std::size_t i = 0; i < nv; ++i) {
      const std::size_t ip = i + 1 == nv ? 0 : i + 1;
      const double flux_right = face_d_[i] * (line[ip] - line[i]);
      out[i] = (flux_right - flux_left) * inv_dv2;
      flux_left = flux_right;
    }
  }
}

StateVector FdProblem::initial_condition() const {
  StateVector u(layout_);
  for (std::size_t k = 0; k < layout_.n_x; ++k) {
    for (std::size_t i = 0; i < layout_.n_v; ++i) {
      u[k * layout_.n_v + i] = benchmark_initial_profile(node(i));
    }
  }
  return u;
}

double FdProblem::lambda_user() const {
  const double dmax = *std::max_element(face_d_.begin(), face_d_.end());
  return 4.0 * dmax / (layout_.dv * layout_.dv);
}

std::optional<StateVector> FdProblem::jacobian_diagonal() const {
  const std::size_t nv = layout_.n_v;
  StateVector diag(layout_);
  const double inv_dv2 = 1.0 / (layout_.dv * layout_.dv);
  for (std::size_t k = 0; k < layout_.n_x; ++k) {
    for (std::size_t i = 0; i < nv; ++i) {
      const double left = face_d_[i == 0 ? nv - 1 : i - 1];
      diag[k * nv + i] = nv == 1 ? 0.0 : -(face_d_[i] + left) * inv_dv2;
    }
  }
  return diag;
}

std::vector<StateVector> FdProblem::nullspace() const {
  std::vector<StateVector> basis;
  const double c = 1.0 / std::sqrt(static_cast<double>(layout_.n_v));
  for (std::size_t k = 0; k < layout_.n_x; ++k) {
    StateVector e(layout_);
    for (std::size_t i = 0; i < layout_.n_v; ++i) e[k * layout_.n_v + i] = c;
    basis.push_back(std::move(e));
  }
  return basis;
}

BlockStructure FdProblem::blocks() const {
  BlockStructure b;
  for (std::size_t k = 0; k < layout_.n_x; ++k) {
    std::vector<std::size_t> idx(layout_.n_v);
    for (std::size_t i = 0; i < layout_.n_v; ++i) idx[i] = k * layout_.n_v + i;
    b.blocks.push_back(std::move(idx));
  }
  return b;
}

double FdProblem::mass(const StateVector& u) const {
  return accurate_sum(u.values()) * layout_.dv * layout_.dx;
}

Eigen::MatrixXd assemble_matrix_fd(const FdProblem& problem, std::size_t max_dofs) {
  const GridLayout& layout = problem.layout();
  const std::size_t n = layout.size();
  if (n > max_dofs) {
    throw std::length_error("assemble_matrix_fd: " + std::to_string(n) + " dofs exceeds guard " +
                            std::to_string(max_dofs));
  }
  const std::size_t nv = layout.n_v;
  const auto d = problem.face_diffusivity();
  const double s = 1.0 / (layout.dv * layout.dv);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (nv == 1) return a;
  for (std::size_t k = 0; k < layout.n_x; ++k) {
    const auto off = static_cast<Eigen::Index>(k * nv);
    // each face couples its two nodes with weight D_face / dv^2
    for (std::size_t f = 0; f < nv; ++f) {
      const auto i = off + static_cast<Eigen::Index>(f);
      const auto j = off + static_cast<Eigen::Index>((f + 1) % nv);
      a(i, i) -= d[f] * s;
      a(j, j) -= d[f] * s;
      a(i, j) += d[f] * s;
      a(j, i) += d[f] * s;
    }
  }
  return a;
}

}  // namespace superstep
