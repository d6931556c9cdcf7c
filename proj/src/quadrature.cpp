#include "rcuage/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "rcuage/core.hpp"

namespace rcuage::quad {

namespace {

GaussRule build_rule(unsigned n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const unsigned half = (n + 1) / 2;
  for (unsigned i = 0; i < half; ++i) {
    // Tricomi's initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (unsigned j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    rule.nodes[n / 2] = 0.0;
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(unsigned n) {
  if (n < 1) {
    throw DomainError("gauss_legendre: n must be >= 1");
  }
  static std::mutex mutex;
  static std::map<unsigned, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    slot = std::make_unique<GaussRule>(build_rule(n));
  }
  return *slot;
}

double composite(const Integrand& f, std::span<const double> breaks, unsigned n) {
  const GaussRule& rule = gauss_legendre(n);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double panel = 0.0;
    for (unsigned i = 0; i < n; ++i) {
      panel += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    total += half * panel;
  }
  return total;
}

double uniform_panels(const Integrand& f, double a, double b, unsigned panels, unsigned n) {
  if (panels < 1) {
    throw DomainError("uniform_panels: need at least one panel");
  }
  std::vector<double> breaks(panels + 1);
  for (unsigned i = 0; i <= panels; ++i) {
    breaks[i] = a + (b - a) * static_cast<double>(i) / panels;
  }
  breaks.back() = b;
  return composite(f, breaks, n);
}

std::vector<double> graded_breaks(unsigned graded, unsigned uniform) {
  if (uniform < 1) {
    throw DomainError("graded_breaks: need at least one uniform panel");
  }
  std::vector<double> breaks;
  breaks.reserve(graded + uniform + 2);
  breaks.push_back(0.0);
  for (unsigned g = graded; g >= 1; --g) {
    breaks.push_back(std::ldexp(1.0, -static_cast<int>(g)));
  }
  if (graded == 0) {
    for (unsigned i = 1; i <= uniform; ++i) {
      breaks.push_back(static_cast<double>(i) / uniform);
    }
    return breaks;
  }
  for (unsigned i = 1; i <= uniform; ++i) {
    breaks.push_back(0.5 + 0.5 * static_cast<double>(i) / uniform);
  }
  return breaks;
}

}  // namespace rcuage::quad
