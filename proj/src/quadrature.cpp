#include "ocpr/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace ocpr {

namespace {

GaussLegendreRule compute_rule(std::size_t n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi initial guess for the i-th root (descending order).
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: order must be positive");
  static std::mutex mutex;
  static std::map<std::size_t, GaussLegendreRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

std::vector<double> log_grid(double lo, double hi, double points_per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || !(points_per_decade > 0.0)) {
    throw std::invalid_argument("log_grid: need 0 < lo < hi and positive density");
  }
  const double decades = std::log10(hi / lo);
  const auto intervals = static_cast<std::size_t>(std::ceil(decades * points_per_decade - 1e-9));
  std::vector<double> grid(intervals + 1);
  const double llo = std::log10(lo);
  for (std::size_t k = 0; k <= intervals; ++k) {
    grid[k] = std::pow(10.0, llo + decades * static_cast<double>(k) / static_cast<double>(intervals));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace ocpr
