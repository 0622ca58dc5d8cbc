#pragma once

#include <string>
#include <vector>

namespace superstep {

/// Runge-Kutta coefficients in Butcher form. `a` is s x s, lower triangular.
struct ButcherTableau {
  std::string name;
  int s = 0;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<double> b_embed;
  std::vector<double> c;
  int order = 0;
  int embed_order = 0;

  [[nodiscard]] double diag(int i) const { return a[i][i]; }
  [[nodiscard]] bool stiffly_accurate(double tol = 1e-14) const;
};

/// Residuals (computed minus exact) of the order conditions belonging to exactly
/// order `p` (1 <= p <= 4) for the weights `w` on the tableau's A and c.
std::vector<double> order_condition_residuals(const ButcherTableau& tab, const std::vector<double>& w, int p);

/// Largest p <= 4 such that every condition of orders 1..p holds within tol.
int satisfied_order(const ButcherTableau& tab, const std::vector<double>& w, double tol = 1e-12);

/// max_i |sum_j a_ij - c_i|.
double row_sum_defect(const ButcherTableau& tab);

}  // namespace superstep
