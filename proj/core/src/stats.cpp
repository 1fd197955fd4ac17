#include "biaslens/stats.hpp"

#include <cmath>
#include <limits>

#include "biaslens/error.hpp"

namespace biaslens {

double mean(std::span<const double> values) {
  if (values.empty()) fail(Errc::invalid_argument, "mean of empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.empty()) fail(Errc::invalid_argument, "stddev of empty sample");
  if (values.size() == 1) return 0.0;
  const double m = mean(values);
  double sq = 0.0;
  for (double v : values) {
    const double d = v - m;
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

namespace {

// Continued fraction for the incomplete beta function (Lentz's algorithm).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) fail(Errc::invalid_argument, "incomplete beta requires a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) fail(Errc::invalid_argument, "degrees of freedom must be > 0");
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(0.5 * df, 0.5, x);
}

WelchResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b) {
  if (sample_a.size() < 2 || sample_b.size() < 2) {
    fail(Errc::invalid_argument, "each sample needs at least two values");
  }
  for (double v : sample_a) {
    if (!std::isfinite(v)) fail(Errc::invalid_argument, "non-finite value in sample");
  }
  for (double v : sample_b) {
    if (!std::isfinite(v)) fail(Errc::invalid_argument, "non-finite value in sample");
  }

  const double na = static_cast<double>(sample_a.size());
  const double nb = static_cast<double>(sample_b.size());
  const double ma = mean(sample_a);
  const double mb = mean(sample_b);
  const double sa = sample_std(sample_a);
  const double sb = sample_std(sample_b);
  const double va = sa * sa / na;
  const double vb = sb * sb / nb;

  WelchResult r;
  if (va + vb == 0.0) {
    r.degenerate = true;
    if (ma == mb) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    r.df = na + nb - 2.0;
    return r;
  }

  r.t = (ma - mb) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

}  // namespace biaslens
