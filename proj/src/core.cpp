#include "rcuage/core.hpp"

#include <cmath>
#include <sstream>

namespace rcuage {

void SeriesControl::check() const {
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw DomainError("SeriesControl: tol must be positive and finite");
  }
  if (max_k < 1 || max_j < 1) {
    throw DomainError("SeriesControl: max_k and max_j must be >= 1");
  }
  if (quad_points < 16) {
    throw DomainError("SeriesControl: quad_points must be >= 16");
  }
}

DerivedParams validate(const ModelParams& params) {
  const auto& [alpha, lambda, mu] = params;
  if (!std::isfinite(alpha) || !std::isfinite(lambda) || !std::isfinite(mu)) {
    throw DomainError("model rates must be finite: " + to_string(params));
  }
  if (!(alpha > 0.0)) {
    throw DomainError("alpha must be positive: " + to_string(params));
  }
  if (!(mu > 0.0)) {
    throw DomainError("mu must be positive: " + to_string(params));
  }
  if (lambda < 0.0) {
    throw DomainError("lambda must be non-negative: " + to_string(params));
  }
  return DerivedParams{alpha / (alpha + mu), lambda / mu};
}

double b_k(const ModelParams& params, std::int64_t k) {
  if (k < 1) {
    throw DomainError("b_k: k must be >= 1");
  }
  const DerivedParams d = validate(params);
  // pow keeps b_{k+1} = q b_k to rounding without accumulating k products.
  return d.rho * std::pow(d.q, static_cast<double>(k));
}

std::string to_string(const ModelParams& params) {
  std::ostringstream os;
  os << "(alpha=" << params.alpha << ", lambda=" << params.lambda
     << ", mu=" << params.mu << ")";
  return os.str();
}

}  // namespace rcuage
