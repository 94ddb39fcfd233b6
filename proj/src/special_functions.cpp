#include "aoicache/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "aoicache/errors.hpp"

namespace aoicache {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 500;

void check_domain(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    std::ostringstream msg;
    msg << "exp_integral_e1 requires finite x > 0, got " << x;
    throw DomainError(msg.str());
  }
}

// E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
double e1_series(double x) {
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k <= kMaxIterations; ++k) {
    term *= -x / k;
    const double contribution = term / k;
    sum += contribution;
    if (std::abs(contribution) < kEps * std::abs(sum)) break;
  }
  return -std::numbers::egamma - std::log(x) - sum;
}

// e^x E1(x) via the modified Lentz evaluation of
// 1/(x+1-) 1/(x+3-) 4/(x+5-) ...
double e1_scaled_continued_fraction(double x) {
  constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw NumericalError("exp_integral_e1: continued fraction did not converge");
}

}  // namespace

double exp_integral_e1(double x) {
  check_domain(x);
  if (x <= 1.0) return e1_series(x);
  return e1_scaled_continued_fraction(x) * std::exp(-x);
}

double exp_integral_e1_scaled(double x) {
  check_domain(x);
  if (x <= 1.0) return std::exp(x) * e1_series(x);
  return e1_scaled_continued_fraction(x);
}

}  // namespace aoicache
