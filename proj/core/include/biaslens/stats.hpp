#pragma once

#include <span>

namespace biaslens {

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator); 0 for a single value.
double sample_std(std::span<const double> values);

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability of Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  bool degenerate = false;  // both sample variances were zero
};

/// Welch's unpaired t-test with Welch-Satterthwaite degrees of freedom.
/// Zero-variance samples with equal means give (t=0, p=1); with different
/// means, p=0 with the degenerate flag set.
WelchResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b);

}  // namespace biaslens
