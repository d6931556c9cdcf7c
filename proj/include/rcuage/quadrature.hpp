#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rcuage::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n). Rules are cached
/// per n, so repeated calls are cheap and thread-safe.
const GaussRule& gauss_legendre(unsigned n);

using Integrand = std::function<double(double)>;

/// Integrates f over each [breaks[i], breaks[i+1]] with an n-point rule and
/// sums the panels.
double composite(const Integrand& f, std::span<const double> breaks, unsigned n = 16);

/// Integrates f on [a, b] with `panels` equal panels of an n-point rule.
double uniform_panels(const Integrand& f, double a, double b, unsigned panels,
                      unsigned n = 16);

/// Breakpoints on [0, 1]: `graded` panels refined geometrically (ratio 1/2)
/// towards 0, followed by `uniform` equal panels covering [1/2, 1]. Used for
/// integrands with an algebraic endpoint singularity at 0.
std::vector<double> graded_breaks(unsigned graded, unsigned uniform);

}  // namespace rcuage::quad
