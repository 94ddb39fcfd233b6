#pragma once

namespace aoicache {

// Exponential integral E1(x) = \int_x^inf e^{-t}/t dt for x > 0.
// Power series for x <= 1, modified Lentz continued fraction above.
// Throws DomainError for x <= 0 or NaN.
double exp_integral_e1(double x);

// e^x * E1(x). Finite for all x > 0, including where E1 itself underflows.
double exp_integral_e1_scaled(double x);

}  // namespace aoicache
