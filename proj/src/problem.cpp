#include "superstep/problem.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace superstep {

StateVector Problem::rhs(double t, const StateVector& u) const {
  if (!(u.layout() == layout())) throw std::invalid_argument(name() + ": layout mismatch");
  StateVector du(layout());
  rhs(t, u.values(), du.values());
  return du;
}

RhsFunction Problem::rhs_function() const {
  return [this](double t, std::span<const double> u, std::span<double> du) { rhs(t, u, du); };
}

BlockStructure Problem::blocks() const {
  BlockStructure b;
  b.blocks.emplace_back(layout().size());
  std::iota(b.blocks.front().begin(), b.blocks.front().end(), std::size_t{0});
  return b;
}

double Problem::mass(const StateVector& u) const { return accurate_sum(u.values()); }

double benchmark_diffusivity(double v, double nu, double modulation) {
  return nu * (1.0 + modulation * std::sin(v));
}

double benchmark_initial_profile(double v) {
  return (1.0 + 0.3 * std::sin(2.0 * v)) / std::sqrt(5.5 * std::numbers::pi) * std::exp(-v * v / 5.5);
}

GaussRule gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("quadrature needs at least one point");
  GaussRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const int n = points;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace superstep
