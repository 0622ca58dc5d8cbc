#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace superstep {

enum class LayoutKind { FD, DG };

/// Discretization descriptor on the periodic square [-pi, pi] x [-pi, pi].
///
/// Cells are numbered c = k * n_v + i with the v index i running fastest, so every
/// x-line is a contiguous run of cells. Degrees of freedom are stored cell-major:
/// dof = c * n_b + basis. The cell partition used by the cell-wise norm is derived
/// from this ordering alone.
struct GridLayout {
  LayoutKind kind = LayoutKind::FD;
  std::size_t n_v = 1;
  std::size_t n_x = 1;
  std::size_t n_b = 1;
  double dv = 0.0;
  double dx = 0.0;

  static GridLayout finite_difference(std::size_t n_v, std::size_t n_x);
  static GridLayout discontinuous_galerkin(std::size_t n_v, std::size_t n_x);
  /// Single-line FD layout with n dofs, for ODE fixtures that have no grid.
  static GridLayout flat(std::size_t n);

  [[nodiscard]] std::size_t size() const noexcept { return n_v * n_x * n_b; }
  [[nodiscard]] std::size_t cells() const noexcept { return n_v * n_x; }

  bool operator==(const GridLayout&) const = default;
};

/// Flat array of solution degrees of freedom tagged with its layout.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(const GridLayout& layout, double fill = 0.0);
  StateVector(const GridLayout& layout, std::vector<double> values);

  [[nodiscard]] const GridLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] const std::vector<double>& raw() const noexcept { return values_; }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  void fill(double value);
  [[nodiscard]] bool all_finite() const noexcept;

 private:
  GridLayout layout_{};
  std::vector<double> values_;
};

struct ToleranceSpec {
  double rtol = 1e-4;
  double atol = 1e-11;

  /// Throws std::invalid_argument unless rtol > 0 and atol >= 0.
  void validate() const;
};

enum class NormKind { Component, Cellwise };

std::string_view to_string(NormKind kind);
NormKind parse_norm_kind(std::string_view name);

/// Component-wise weighted RMS norm, weights rtol*|ref_i| + atol.
double wrms_component(const StateVector& err, const StateVector& ref, const ToleranceSpec& tol);

/// Cell-wise weighted RMS norm: each cell's dofs are grouped into an RMS before weighting.
double wrms_cellwise(const StateVector& err, const StateVector& ref, const ToleranceSpec& tol);

double wrms(NormKind kind, const StateVector& err, const StateVector& ref, const ToleranceSpec& tol);

/// RMS of the n_b dofs stored in one cell.
double cell_norm(const StateVector& u, std::size_t cell);

void require_same_layout(const StateVector& a, const StateVector& b, std::string_view where);

// Vector kernels shared by the integrators.

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// out = a * x + b * y
void lincomb(std::span<double> out, double a, std::span<const double> x, double b,
             std::span<const double> y);
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double max_abs(std::span<const double> x);
/// Compensated (Neumaier) sum accumulated in long double.
double accurate_sum(std::span<const double> x);

}  // namespace superstep
