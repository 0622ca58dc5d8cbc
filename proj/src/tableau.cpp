#include "superstep/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace superstep {

namespace {

using Vec = std::vector<double>;

Vec mat_vec(const std::vector<Vec>& a, const Vec& x) {
  Vec y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  }
  return y;
}

Vec hadamard(const Vec& x, const Vec& y) {
  Vec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] * y[i];
  return z;
}

double weigh(const Vec& w, const Vec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

}  // namespace

bool ButcherTableau::stiffly_accurate(double tol) const {
  for (int j = 0; j < s; ++j) {
    if (std::fabs(a[s - 1][j] - b[j]) > tol) return false;
  }
  return true;
}

std::vector<double> order_condition_residuals(const ButcherTableau& tab, const std::vector<double>& w, int p) {
  if (static_cast<int>(w.size()) != tab.s) throw std::invalid_argument("weight vector length must equal stage count");
  const Vec ones(tab.s, 1.0);
  const Vec& c = tab.c;
  const Vec c2 = hadamard(c, c);
  const Vec ac = mat_vec(tab.a, c);
  switch (p) {
    case 1:
      return {weigh(w, ones) - 1.0};
    case 2:
      return {weigh(w, c) - 0.5};
    case 3:
      return {weigh(w, c2) - 1.0 / 3.0, weigh(w, ac) - 1.0 / 6.0};
    case 4:
      return {weigh(w, hadamard(c2, c)) - 0.25, weigh(w, hadamard(c, ac)) - 0.125,
              weigh(w, mat_vec(tab.a, c2)) - 1.0 / 12.0, weigh(w, mat_vec(tab.a, ac)) - 1.0 / 24.0};
    default:
      throw std::invalid_argument("order conditions are tabulated for orders 1 to 4");
  }
}

int satisfied_order(const ButcherTableau& tab, const std::vector<double>& w, double tol) {
  int p = 0;
  for (int q = 1; q <= 4; ++q) {
    const Vec r = order_condition_residuals(tab, w, q);
    if (std::any_of(r.begin(), r.end(), [tol](double x) { return std::fabs(x) > tol; })) break;
    p = q;
  }
  return p;
}

double row_sum_defect(const ButcherTableau& tab) {
  double worst = 0.0;
  for (int i = 0; i < tab.s; ++i) {
    double sum = 0.0;
    for (int j = 0; j < tab.s; ++j) sum += tab.a[i][j];
    worst = std::max(worst, std::fabs(sum - tab.c[i]));
  }
  return worst;
}

}  // namespace superstep
