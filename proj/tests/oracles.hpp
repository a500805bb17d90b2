#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's evaluators: eigenstates come from the explicit Hermite sum in
// long double, gradients from central differences.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pilotwave/wavefunction.hpp"

namespace oracle {

using LComplex = std::complex<long double>;

inline long double factorial(int n) {
  long double f = 1.0L;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// H_n(x) = n! sum_k (-1)^k (2x)^(n-2k) / (k! (n-2k)!).
inline long double hermite_sum(int n, long double x) {
  long double sum = 0.0L;
  for (int k = 0; 2 * k <= n; ++k) {
    const long double term = std::pow(2.0L * x, n - 2 * k) / (factorial(k) * factorial(n - 2 * k));
    sum += (k % 2 == 0 ? term : -term);
  }
  return factorial(n) * sum;
}

/// pi^(-1/4) (2^m m!)^(-1/2) H_m(q) exp(-q^2/2), evaluated directly.
inline long double eigenstate(int m, long double q) {
  const long double pi = std::numbers::pi_v<long double>;
  return std::pow(pi, -0.25L) / std::sqrt(std::pow(2.0L, m) * factorial(m)) * hermite_sum(m, q) *
         std::exp(-q * q / 2.0L);
}

/// Direct evaluation of N sum eps exp(i(theta - E t)) phi_m(q1) phi_n(q2).
inline LComplex psi(const pilotwave::WaveFunctionSpec& spec, long double q1, long double q2, long double t) {
  long double norm2 = 0.0L;
  for (const auto& term : spec.terms()) norm2 += static_cast<long double>(term.amplitude) * term.amplitude;
  LComplex sum = 0.0L;
  for (const auto& term : spec.terms()) {
    const long double angle = static_cast<long double>(term.phase) - term.mode.energy() * t;
    sum += static_cast<long double>(term.amplitude) * LComplex(std::cos(angle), std::sin(angle)) *
           eigenstate(term.mode.m, q1) * eigenstate(term.mode.n, q2);
  }
  return sum / std::sqrt(norm2);
}

/// Central differences of the library's psi with step h.
inline std::pair<pilotwave::Complex, pilotwave::Complex> fd_gradient(const pilotwave::WaveFunctionSpec& spec,
                                                                     double q1, double q2, double t,
                                                                     double h = 1e-5) {
  const auto d1 = (pilotwave::psi(spec, q1 + h, q2, t) - pilotwave::psi(spec, q1 - h, q2, t)) / (2.0 * h);
  const auto d2 = (pilotwave::psi(spec, q1, q2 + h, t) - pilotwave::psi(spec, q1, q2 - h, t)) / (2.0 * h);
  return {d1, d2};
}

/// Central differences of the long-double oracle psi.
inline std::pair<LComplex, LComplex> oracle_gradient(const pilotwave::WaveFunctionSpec& spec, long double q1,
                                                     long double q2, long double t, long double h = 1e-6L) {
  const auto d1 = (psi(spec, q1 + h, q2, t) - psi(spec, q1 - h, q2, t)) / (2.0L * h);
  const auto d2 = (psi(spec, q1, q2 + h, t) - psi(spec, q1, q2 - h, t)) / (2.0L * h);
  return {d1, d2};
}

/// Im(d psi / psi) from the oracle gradient.
inline std::pair<long double, long double> velocity(const pilotwave::WaveFunctionSpec& spec, long double q1,
                                                    long double q2, long double t) {
  const auto p = psi(spec, q1, q2, t);
  const auto [d1, d2] = oracle_gradient(spec, q1, q2, t);
  return {(d1 / p).imag(), (d2 / p).imag()};
}

}  // namespace oracle
