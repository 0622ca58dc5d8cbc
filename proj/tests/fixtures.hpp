#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "superstep/problem.hpp"
#include "superstep/state.hpp"

namespace fixtures {

using superstep::GridLayout;
using superstep::StateVector;

/// Linear ODE f' = A f on a flat layout.
class MatrixProblem final : public superstep::Problem {
 public:
  explicit MatrixProblem(Eigen::MatrixXd a, std::vector<double> u0 = {})
      : a_(std::move(a)), layout_(GridLayout::flat(static_cast<std::size_t>(a_.rows()))), u0_(std::move(u0)) {
    if (u0_.empty()) u0_.assign(layout_.size(), 1.0);
  }

  [[nodiscard]] std::string name() const override { return "matrix"; }
  [[nodiscard]] const GridLayout& layout() const override { return layout_; }
  void rhs(double, std::span<const double> u, std::span<double> du) const override {
    Eigen::Map<const Eigen::VectorXd> x(u.data(), static_cast<Eigen::Index>(u.size()));
    Eigen::Map<Eigen::VectorXd> y(du.data(), static_cast<Eigen::Index>(du.size()));
    y = a_ * x;
  }
  using Problem::rhs;
  [[nodiscard]] StateVector initial_condition() const override { return StateVector(layout_, u0_); }
  [[nodiscard]] double lambda_user() const override { return a_.cwiseAbs().rowwise().sum().maxCoeff(); }
  [[nodiscard]] std::optional<StateVector> jacobian_diagonal() const override {
    StateVector d(layout_);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    return d;
  }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const { return a_; }

 private:
  Eigen::MatrixXd a_;
  GridLayout layout_;
  std::vector<double> u0_;
};

/// f' = 0.
class ZeroProblem final : public superstep::Problem {
 public:
  explicit ZeroProblem(StateVector u0) : u0_(std::move(u0)) {}
  [[nodiscard]] std::string name() const override { return "zero"; }
  [[nodiscard]] const GridLayout& layout() const override { return u0_.layout(); }
  void rhs(double, std::span<const double>, std::span<double> du) const override {
    std::fill(du.begin(), du.end(), 0.0);
  }
  using Problem::rhs;
  [[nodiscard]] StateVector initial_condition() const override { return u0_; }
  [[nodiscard]] double lambda_user() const override { return 0.0; }
  [[nodiscard]] std::optional<StateVector> jacobian_diagonal() const override { return StateVector(u0_.layout()); }

 private:
  StateVector u0_;
};

/// Symmetric matrix with prescribed eigenvalues, rotated by a seeded orthogonal matrix.
inline Eigen::MatrixXd symmetric_with_spectrum(const std::vector<double>& eigenvalues, unsigned seed) {
  const auto n = static_cast<Eigen::Index>(eigenvalues.size());
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = dist(gen);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = eigenvalues[static_cast<std::size_t>(i)];
  Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

inline StateVector random_state(const GridLayout& layout, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  StateVector v(layout);
  for (double& x : v.values()) x = dist(gen);
  return v;
}

inline Eigen::VectorXd to_eigen(const StateVector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.raw().data(), static_cast<Eigen::Index>(v.size()));
}

inline double max_rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

/// Least-squares slope of log(err) against log(h).
inline double observed_order(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fixtures
