#pragma once

namespace longctl {

// Value of a scalar shaping function together with its analytic derivative
// at the same argument. The derivative is always computed in closed form.
struct ValueSlope {
  double value;
  double slope;
};

// Order parameter of the integrator shaping function p. n >= 1.
struct PShape {
  int order = 2;
};

// Parameters of the approach shaping function q: asymptote parameter b > 0
// and slackness c > 0 (q(x) -> sqrt(2*b*x) as x -> +inf).
struct QShape {
  double b;
  double c;
};

// Smooth saturation wrapper g(x) = (2/pi)*atan((pi/2)*x).
// Odd, bounded in [-1, 1], g'(0) = 1, g' even and strictly decreasing on x >= 0.
ValueSlope shape_g(double x);

// Large-error suppression p(x) = x / (1 + x^(2n)/(2n-1)).
// Odd, p'(0) = 1, peaks at x = 1 with p(1) = (2n-1)/(2n), decays to 0.
ValueSlope shape_p(double x, PShape shape);

// Comfortable-approach profile q(x; b) = g(x/c)*sqrt(2*b*x*g(x/c) + c^2).
// Odd, strictly increasing, q'(0) = 1, asymptotic to sqrt(2*b*x).
ValueSlope shape_q(double x, QShape shape);

}  // namespace longctl
