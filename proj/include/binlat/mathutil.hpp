#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

namespace binlat {

template <class T>
inline T norm_pdf(T x) {
  return std::exp(T(-0.5) * x * x) / std::sqrt(T(2) * std::numbers::pi_v<T>);
}

// Standard normal CDF through erfc; absolute error is at libm level (well under 1e-15).
template <class T>
inline T norm_cdf(T x) {
  return T(0.5) * std::erfc(-x / std::numbers::sqrt2_v<T>);
}

// Wichura's AS241 (PPND16) inverse normal CDF, ~1e-16 relative accuracy.
double norm_ppf(double p);

// log C(n,k) via lgamma; exact to ~1e-15 relative for the n used here.
inline double log_binom_coef(long long n, long long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// FNV-1a, used to fingerprint canonical config text in artifact manifests.
std::uint64_t fnv1a64(const std::string& bytes);

std::string hex64(std::uint64_t v);

}  // namespace binlat
