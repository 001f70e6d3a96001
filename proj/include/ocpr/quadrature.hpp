#pragma once

#include <cstddef>
#include <vector>

namespace ocpr {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Nodes and weights of the n-point Gauss-Legendre rule (Newton iteration on
// P_n). Rules are cached per order; the returned reference stays valid.
const GaussLegendreRule& gauss_legendre(std::size_t n);

// Log-spaced grid from lo to hi inclusive with the given points per decade.
std::vector<double> log_grid(double lo, double hi, double points_per_decade);

}  // namespace ocpr
