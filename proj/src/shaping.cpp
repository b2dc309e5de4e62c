#include "longctl/shaping.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace longctl {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_finite(double x, const char* where) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(where) + ": non-finite input");
  }
}

}  // namespace

ValueSlope shape_g(double x) {
  require_finite(x, "shape_g");
  const double s = 0.5 * kPi * x;
  return {(2.0 / kPi) * std::atan(s), 1.0 / (1.0 + s * s)};
}

ValueSlope shape_p(double x, PShape shape) {
  require_finite(x, "shape_p");
  if (shape.order < 1) {
    throw std::invalid_argument("shape_p: order must be >= 1");
  }
  const double n = static_cast<double>(shape.order);
  const double k = 2.0 * n - 1.0;
  if (std::abs(x) > 1e8) {
    // Asymptotic branch: x^(2n) overflows long before this threshold matters.
    // p(x) ~ (2n-1)*x^(1-2n), p'(x) ~ -(2n-1)^2*x^(-2n).
    return {k * std::pow(x, 1.0 - 2.0 * n),
            -k * k * std::pow(std::abs(x), -2.0 * n)};
  }
  const double x2n = std::pow(x, 2.0 * n);
  const double den = 1.0 + x2n / k;
  return {x / den, (1.0 - x2n) / (den * den)};
}

ValueSlope shape_q(double x, QShape shape) {
  require_finite(x, "shape_q");
  if (!(shape.b > 0.0) || !(shape.c > 0.0)) {
    throw std::invalid_argument("shape_q: b and c must be positive");
  }
  const ValueSlope g = shape_g(x / shape.c);
  // 2*b*x*g(x/c) >= 0 for all x (both factors share sign), so the radicand
  // never drops below c^2.
  const double root = std::sqrt(2.0 * shape.b * x * g.value + shape.c * shape.c);
  const double value = g.value * root;
  const double slope = (g.slope / shape.c) * root +
                       g.value * shape.b * (g.value + x * g.slope / shape.c) / root;
  return {value, slope};
}

}  // namespace longctl
