#pragma once

// Test-only Monte-Carlo oracle for Beta moments. Samples Beta(a,b) as
// Ga/(Ga+Gb) from two gamma draws, a route independent of the closed forms
// under test. Standard errors come from the sample itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testutil {

struct BetaMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
};

inline BetaMoments sample_beta_moments(double alpha, double beta,
                                       std::size_t n, uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::gamma_distribution<double> gamma_a(alpha, 1.0);
  std::gamma_distribution<double> gamma_b(beta, 1.0);
  std::vector<double> draws(n);
  long double sum = 0.0L;
  for (double& x : draws) {
    const double a = gamma_a(engine);
    const double b = gamma_b(engine);
    x = a / (a + b);
    sum += x;
  }
  BetaMoments out;
  out.mean = static_cast<double>(sum / static_cast<long double>(n));
  long double m2 = 0.0L, m4 = 0.0L;
  for (double x : draws) {
    const long double d = x - out.mean;
    const long double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  out.variance = static_cast<double>(m2 / static_cast<long double>(n - 1));
  const double m4c = static_cast<double>(m4 / static_cast<long double>(n));
  out.mean_se = std::sqrt(out.variance / static_cast<double>(n));
  out.variance_se = std::sqrt(
      std::max(0.0, m4c - out.variance * out.variance) / static_cast<double>(n));
  return out;
}

}  // namespace testutil
