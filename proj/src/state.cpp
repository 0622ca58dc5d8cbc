#include "superstep/state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace superstep {

namespace {

// Neumaier summation in long double.
class CompensatedSum {
 public:
  void add(long double x) noexcept {
    const long double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] long double value() const noexcept { return sum_ + comp_; }

 private:
  long double sum_ = 0.0L;
  long double comp_ = 0.0L;
};

// Blocked pairwise summation in long double: terms are summed serially in blocks,
// block sums are merged like a binary counter.
class PairwiseSum {
 public:
  void add(long double x) noexcept {
    block_ += x;
    if (++count_ == kBlock) flush();
  }
  [[nodiscard]] long double value() noexcept {
    long double s = block_;
    for (int k = 0; k < depth_; ++k) s += levels_[k];
    return s;
  }

 private:
  static constexpr int kBlock = 64;
  void flush() noexcept {
    long double carry = block_;
    int k = 0;
    for (std::uint64_t m = merged_; m & 1u; m >>= 1, ++k) {
      carry += levels_[k];
      levels_[k] = 0.0L;
    }
    levels_[k] = carry;
    if (k + 1 > depth_) depth_ = k + 1;
    ++merged_;
    block_ = 0.0L;
    count_ = 0;
  }
  long double block_ = 0.0L;
  long double levels_[64] = {};
  std::uint64_t merged_ = 0;
  int count_ = 0;
  int depth_ = 0;
};

}  // namespace

GridLayout GridLayout::finite_difference(std::size_t n_v, std::size_t n_x) {
  if (n_v == 0 || n_x == 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  return GridLayout{LayoutKind::FD, n_v, n_x, 1, 2.0 * std::numbers::pi / static_cast<double>(n_v),
                    2.0 * std::numbers::pi / static_cast<double>(n_x)};
}

GridLayout GridLayout::discontinuous_galerkin(std::size_t n_v, std::size_t n_x) {
  if (n_v == 0 || n_x == 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  return GridLayout{LayoutKind::DG, n_v, n_x, 4, 2.0 * std::numbers::pi / static_cast<double>(n_v),
                    2.0 * std::numbers::pi / static_cast<double>(n_x)};
}

GridLayout GridLayout::flat(std::size_t n) { return finite_difference(n, 1); }

StateVector::StateVector(const GridLayout& layout, double fill)
    : layout_(layout), values_(layout.size(), fill) {}

StateVector::StateVector(const GridLayout& layout, std::vector<double> values)
    : layout_(layout), values_(std::move(values)) {
  if (values_.size() != layout_.size()) {
    throw std::invalid_argument("state length " + std::to_string(values_.size()) +
                                " does not match layout size " + std::to_string(layout_.size()));
  }
}

void StateVector::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool StateVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

void ToleranceSpec::validate() const {
  if (!(rtol > 0.0)) throw std::invalid_argument("rtol must be positive");
  if (!(atol >= 0.0)) throw std::invalid_argument("atol must be non-negative");
}

std::string_view to_string(NormKind kind) {
  return kind == NormKind::Component ? "component" : "cell";
}

NormKind parse_norm_kind(std::string_view name) {
  if (name == "component") return NormKind::Component;
  if (name == "cell" || name == "cellwise") return NormKind::Cellwise;
  throw std::invalid_argument("unknown norm '" + std::string(name) + "'");
}

void require_same_layout(const StateVector& a, const StateVector& b, std::string_view where) {
  if (!(a.layout() == b.layout()) || a.size() != b.size()) {
    throw std::invalid_argument(std::string(where) + ": mismatched state layouts");
  }
}

double wrms_component(const StateVector& err, const StateVector& ref, const ToleranceSpec& tol) {
  require_same_layout(err, ref, "wrms_component");
  const std::size_t n = err.size();
  if (n == 0) return 0.0;
  PairwiseSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = err[i] / (tol.rtol * std::fabs(ref[i]) + tol.atol);
    acc.add(r * r);
  }
  return static_cast<double>(std::sqrt(acc.value() / static_cast<long double>(n)));
}

double wrms_cellwise(const StateVector& err, const StateVector& ref, const ToleranceSpec& tol) {
  require_same_layout(err, ref, "wrms_cellwise");
  const GridLayout& layout = err.layout();
  const std::size_t nc = layout.cells();
  const std::size_t nb = layout.n_b;
  if (nc == 0) return 0.0;
  const double inv_nb = 1.0 / static_cast<double>(nb);
  const double* e = err.values().data();
  const double* r = ref.values().data();
  PairwiseSum acc;
  for (std::size_t c = 0; c < nc; ++c, e += nb, r += nb) {
    double e2 = 0.0;
    double r2 = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      e2 += e[j] * e[j];
      r2 += r[j] * r[j];
    }
    const double w = tol.rtol * std::sqrt(r2 * inv_nb) + tol.atol;
    acc.add(e2 * inv_nb / (w * w));
  }
  return static_cast<double>(std::sqrt(acc.value() / static_cast<long double>(nc)));
}

double wrms(NormKind kind, const StateVector& err, const StateVector& ref, const ToleranceSpec& tol) {
  return kind == NormKind::Component ? wrms_component(err, ref, tol) : wrms_cellwise(err, ref, tol);
}

double cell_norm(const StateVector& u, std::size_t cell) {
  const GridLayout& layout = u.layout();
  if (cell >= layout.cells()) {
    throw std::out_of_range("cell index " + std::to_string(cell) + " out of range");
  }
  long double s = 0.0L;
  for (std::size_t j = 0; j < layout.n_b; ++j) {
    const long double x = u[cell * layout.n_b + j];
    s += x * x;
  }
  return static_cast<double>(std::sqrt(s / layout.n_b));
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void lincomb(std::span<double> out, double a, std::span<const double> x, double b,
             std::span<const double> y) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * y[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * y[i];
  return static_cast<double>(s);
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) {
    const double a = std::fabs(v);
    if (std::isnan(a)) return a;
    m = std::max(m, a);
  }
  return m;
}

double accurate_sum(std::span<const double> x) {
  CompensatedSum acc;
  for (double v : x) acc.add(v);
  return static_cast<double>(acc.value());
}

}  // namespace superstep
