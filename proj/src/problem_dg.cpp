#include "superstep/problem_dg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace superstep {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

double integrate_over(double a, double b, const GaussRule& rule, auto&& fn) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) s += rule.weights[q] * fn(mid + half * rule.nodes[q]);
  return s * half;
}

}  // namespace

DgProblem::DgProblem(double nu, std::size_t n_v, std::size_t n_x) : DgProblem(nu, n_v, n_x, Options{}) {}

DgProblem::DgProblem(double nu, std::size_t n_v, std::size_t n_x, Options options)
    : layout_(GridLayout::discontinuous_galerkin(n_v, n_x)), nu_(nu), options_(options) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(options_.penalty > 0.0)) throw std::invalid_argument("penalty must be positive");
  if (options_.quad_order < 1 || options_.stiffness_quad < 1) {
    throw std::invalid_argument("quadrature orders must be at least 1");
  }
  if (!(std::fabs(options_.modulation) < 1.0)) throw std::invalid_argument("modulation must lie in (-1, 1)");

  const double dv = layout_.dv;
  const GaussRule stiff = gauss_legendre(options_.stiffness_quad);
  face_d_.resize(n_v);
  face_tau_.resize(n_v);
  volume_.resize(n_v);
  for (std::size_t i = 0; i < n_v; ++i) {
    face_d_[i] = diffusivity(face_position(i));
    face_tau_[i] = options_.penalty * 4.0 * face_d_[i] / dv;
    const double int_d = integrate_over(cell_left(i), cell_left(i) + dv, stiff, [this](double v) { return diffusivity(v); });
    volume_[i] = 12.0 / (dv * dv * dv) * int_d;
  }
}

double DgProblem::cell_left(std::size_t i) const {
  return -std::numbers::pi + static_cast<double>(i) * layout_.dv;
}

double DgProblem::face_position(std::size_t face) const { return cell_left(face + 1); }

double DgProblem::diffusivity(double v) const { return benchmark_diffusivity(v, nu_, options_.modulation); }

double DgProblem::cell_average_diffusivity(std::size_t i) const {
  const GaussRule rule = gauss_legendre(options_.quad_order);
  return integrate_over(cell_left(i), cell_left(i) + layout_.dv, rule, [this](double v) { return diffusivity(v); }) /
         layout_.dv;
}

void DgProblem::rhs(double, std::span<const double> u, std::span<double> du) const {
  if (u.size() != layout_.size() || du.size() != layout_.size()) {
    throw std::invalid_argument("dg rhs: layout mismatch");
  }
  const std::size_t nv = layout_.n_v;
  const double inv_dv = 1.0 / layout_.dv;
  const double grad_scale = kSqrt3 * inv_dv;

  for (std::size_t k = 0; k < layout_.n_x; ++k) {
    const std::size_t base = k * nv;
    for (std::size_t i = 0; i < nv; ++i) {
      const std::size_t c = (base + i) * 4;
      du[c] = 0.0;
      du[c + 1] = -volume_[i] * u[c + 1];
      du[c + 2] = 0.0;
      du[c + 3] = -volume_[i] * u[c + 3];
    }
    for (std::size_t f = 0; f < nv; ++f) {
      const std::size_t l = (base + f) * 4;
      const std::size_t r = (base + (f + 1 == nv ? 0 : f + 1)) * 4;
      const double d = face_d_[f];
      const double tau = face_tau_[f];
      for (std::size_t o = 0; o < 4; o += 2) {
        const double ul0 = u[l + o], ul1 = u[l + o + 1];
        const double ur0 = u[r + o], ur1 = u[r + o + 1];
        const double jump = ul0 + kSqrt3 * ul1 - ur0 + kSqrt3 * ur1;
        const double avg_flux = d * grad_scale * (ul1 + ur1);
        const double f0 = -avg_flux + tau * jump;
        const double f1 = -kSqrt3 * avg_flux - d * grad_scale * jump + kSqrt3 * tau * jump;
        du[l + o] -= f0 * inv_dv;
        du[r + o] += f0 * inv_dv;
        du[l + o + 1] -= f1 * inv_dv;
        du[r + o + 1] -= f1 * inv_dv;
      }
    }
  }
}

StateVector DgProblem::initial_condition() const {
  StateVector u(layout_);
  const GaussRule rule = gauss_legendre(options_.quad_order);
  const double dv = layout_.dv;
  for (std::size_t i = 0; i < layout_.n_v; ++i) {
    const double a = cell_left(i);
    const double mid = a + 0.5 * dv;
    const double avg = integrate_over(a, a + dv, rule, [](double v) { return benchmark_initial_profile(v); }) / dv;
    const double slope = integrate_over(a, a + dv, rule, [&](double v) {
                           return benchmark_initial_profile(v) * kSqrt3 * 2.0 * (v - mid) / dv;
                         }) /
                         dv;
    for (std::size_t k = 0; k < layout_.n_x; ++k) {
      const std::size_t c = (k * layout_.n_v + i) * 4;
      u[c] = avg;
      u[c + 1] = slope;
    }
  }
  return u;
}

double DgProblem::lambda_user() const {
  double dmax = 0.0;
  for (std::size_t i = 0; i < layout_.n_v; ++i) dmax = std::max(dmax, cell_average_diffusivity(i));
  const double g = 4.0 / layout_.dv;
  return dmax * g * g;
}

std::vector<StateVector> DgProblem::nullspace() const {
  std::vector<StateVector> basis;
  const double c = 1.0 / std::sqrt(static_cast<double>(layout_.n_v));
  for (std::size_t k = 0; k < layout_.n_x; ++k) {
    for (std::size_t o = 0; o < 4; o += 2) {
      StateVector e(layout_);
      for (std::size_t i = 0; i < layout_.n_v; ++i) e[(k * layout_.n_v + i) * 4 + o] = c;
      basis.push_back(std::move(e));
    }
  }
  return basis;
}

BlockStructure DgProblem::blocks() const {
  BlockStructure b;
  for (std::size_t k = 0; k < layout_.n_x; ++k) {
    for (std::size_t o = 0; o < 4; o += 2) {
      std::vector<std::size_t> idx;
      idx.reserve(2 * layout_.n_v);
      for (std::size_t i = 0; i < layout_.n_v; ++i) {
        idx.push_back((k * layout_.n_v + i) * 4 + o);
        idx.push_back((k * layout_.n_v + i) * 4 + o + 1);
      }
      b.blocks.push_back(std::move(idx));
    }
  }
  return b;
}

double DgProblem::mass(const StateVector& u) const {
  std::vector<double> avg(layout_.cells());
  for (std::size_t c = 0; c < avg.size(); ++c) avg[c] = u[c * 4];
  return accurate_sum(avg) * layout_.dv * layout_.dx;
}

double DgProblem::point_value(const StateVector& u, double v, std::size_t k, double xi_x) const {
  if (k >= layout_.n_x) throw std::out_of_range("x-line index out of range");
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(v + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  auto i = static_cast<std::size_t>(w / layout_.dv);
  if (i >= layout_.n_v) i = layout_.n_v - 1;
  const double xi = 2.0 * (w - static_cast<double>(i) * layout_.dv) / layout_.dv - 1.0;
  const std::size_t c = (k * layout_.n_v + i) * 4;
  return u[c] + kSqrt3 * xi * u[c + 1] + kSqrt3 * xi_x * u[c + 2] + 3.0 * xi * xi_x * u[c + 3];
}

Eigen::MatrixXd assemble_matrix_dg(const DgProblem& problem, std::size_t max_dofs) {
  const GridLayout& layout = problem.layout();
  const std::size_t n = layout.size();
  if (n > max_dofs) {
    throw std::length_error("assemble_matrix_dg: " + std::to_string(n) + " dofs exceeds guard " +
                            std::to_string(max_dofs));
  }
  const std::size_t nv = layout.n_v;
  const double dv = layout.dv;

  // 1-D modes on a cell: trace at the left/right end and (constant) derivative.
  const std::array<double, 2> trace_left{1.0, -kSqrt3};
  const std::array<double, 2> trace_right{1.0, kSqrt3};
  const std::array<double, 2> deriv{0.0, 2.0 * kSqrt3 / dv};

  // Bilinear form a(phi_trial, phi_test) on one 2*nv block; rhs = -a / |cell| (mass = dv * I).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * nv), static_cast<Eigen::Index>(2 * nv));
  const GaussRule stiff = gauss_legendre(problem.options().stiffness_quad);
  for (std::size_t i = 0; i < nv; ++i) {
    const double lo = problem.cell_left(i);
    double int_d = 0.0;
    for (std::size_t q = 0; q < stiff.nodes.size(); ++q) {
      int_d += stiff.weights[q] * problem.diffusivity(lo + 0.5 * dv * (stiff.nodes[q] + 1.0));
    }
    int_d *= 0.5 * dv;
    for (int p = 0; p < 2; ++p) {
      for (int m = 0; m < 2; ++m) a(2 * i + p, 2 * i + m) += int_d * deriv[p] * deriv[m];
    }
  }
  for (std::size_t f = 0; f < nv; ++f) {
    const std::size_t cl = f;
    const std::size_t cr = (f + 1) % nv;
    const double d = problem.diffusivity(problem.face_position(f));
    const double tau = problem.options().penalty * 4.0 * d / dv;
    struct Side {
      std::size_t cell;
      double sign;  // +1 for the left cell's trace, -1 for the right one's in the jump
      const std::array<double, 2>* trace;
    };
    const std::array<Side, 2> sides{Side{cl, 1.0, &trace_right}, Side{cr, -1.0, &trace_left}};
    for (const Side& ts : sides) {
      for (int p = 0; p < 2; ++p) {
        const double test_jump = ts.sign * (*ts.trace)[p];
        const double test_avg_grad = 0.5 * deriv[p];
        for (const Side& us : sides) {
          for (int m = 0; m < 2; ++m) {
            const double trial_jump = us.sign * (*us.trace)[m];
            const double trial_avg_grad = 0.5 * deriv[m];
            const double value = -d * trial_avg_grad * test_jump - d * test_avg_grad * trial_jump +
                                 tau * trial_jump * test_jump;
            a(2 * ts.cell + p, 2 * us.cell + m) += value;
          }
        }
      }
    }
  }
  const Eigen::MatrixXd block = -a / dv;

  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < layout.n_x; ++k) {
    for (std::size_t o = 0; o < 4; o += 2) {
      for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t j = 0; j < nv; ++j) {
          for (int p = 0; p < 2; ++p) {
            for (int m = 0; m < 2; ++m) {
              const auto row = static_cast<Eigen::Index>((k * nv + i) * 4 + o + p);
              const auto col = static_cast<Eigen::Index>((k * nv + j) * 4 + o + m);
              full(row, col) += block(2 * i + p, 2 * j + m);
            }
          }
        }
      }
    }
  }
  return full;
}

}  // namespace superstep
