#pragma once

// Modified Bessel function I_nu, the inverse-square-potential heat kernel
// G(t,r,tau) = (sqrt(r tau)/2t) exp(-(r^2+tau^2)/4t) I_nu(r tau / 2t) with
// nu = (d-2)/2, and trace-inequality diagnostics (Golden-Thompson and
// Lieb-Thirring style ratios) against a computed spectrum.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "anhgibbs/support.hpp"
#include "anhgibbs/trapspec.hpp"

namespace anhgibbs {

// crossover between the power series and the large-x asymptotic branch
inline constexpr double kBesselCrossover = 30.0;

namespace detail {

// power series sum_k (x/2)^{2k+nu} / (k! Gamma(nu+k+1)), x < crossover
inline double bessel_i_series(double nu, double x) {
  double half = 0.5 * x;
  double term = std::pow(half, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  for (int k = 0; k < 500; ++k) {
    term *= half * half / ((k + 1.0) * (nu + k + 1.0));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

// correction series of the large-x expansion e^x/sqrt(2 pi x) * S(nu, x),
// S = sum_k (-1)^k a_k(nu)/x^k with a_k = prod_{j<k}(4nu^2-(2j+1)^2)/(k! 8^k)
inline double bessel_i_asymptotic_correction(double nu, double x) {
  double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0, prev = std::abs(term);
  for (int k = 1; k < 60; ++k) {
    double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    if (std::abs(term) > prev) break;  // asymptotic series: stop at smallest term
    prev = std::abs(term);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace detail

// log I_nu(x); safe for all x (returns -inf at x=0 for nu>0)
inline double log_bessel_i(double nu, double x) {
  if (nu < 0.0 || x < 0.0) throw std::invalid_argument("log_bessel_i: nu, x >= 0 required");
  if (x == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (x < kBesselCrossover) return std::log(detail::bessel_i_series(nu, x));
  return x - 0.5 * std::log(2.0 * kPi * x) +
         std::log(detail::bessel_i_asymptotic_correction(nu, x));
}

inline double bessel_i(double nu, double x) {
  if (nu < 0.0 || x < 0.0) throw std::invalid_argument("bessel_i: nu, x >= 0 required");
  if (x < kBesselCrossover) return detail::bessel_i_series(nu, x);
  return std::exp(log_bessel_i(nu, x));  // overflows to +inf above x ~ 709; use log form there
}

// ---------------------------------------------------------------------------

struct HeatKernelQuery {
  double t = 0.0, r = 0.0, tau = 0.0;
  int d = 2;
  void validate() const {
    if (!(t > 0.0) || !(r > 0.0) || !(tau > 0.0) || d < 2 || !std::isfinite(t) ||
        !std::isfinite(r) || !std::isfinite(tau))
      throw std::invalid_argument("HeatKernelQuery: need finite t, r, tau > 0 and d >= 2");
  }
  double nu() const { return 0.5 * (d - 2); }
};

inline double log_heat_kernel(const HeatKernelQuery& q) {
  q.validate();
  double z = q.r * q.tau / (2.0 * q.t);
  return 0.5 * std::log(q.r * q.tau) - std::log(2.0 * q.t) -
         (q.r * q.r + q.tau * q.tau) / (4.0 * q.t) + log_bessel_i(q.nu(), z);
}

inline double heat_kernel(const HeatKernelQuery& q) { return std::exp(log_heat_kernel(q)); }

// ---------------------------------------------------------------------------
// Golden-Thompson: Tr[e^{-t L1}] <= C t^{-1/2} Integral e^{-t V(r)} dr.
// The r-integral is Gamma(1+1/s) t^{-1/s} on the half line (doubled for d=1).

struct GoldenThompsonReport {
  std::vector<double> t_grid;
  std::vector<double> ratio;            // Tr / (t^{-1/2} Integral e^{-tV})
  std::vector<bool> truncation_ok;      // e^{-t lambda_top^2} < 1e-12
  double max_ratio = 0.0;
};

inline double classical_potential_integral(int d, double s, double t) {
  double half_line = std::tgamma(1.0 + 1.0 / s) * std::pow(t, -1.0 / s);
  return d == 1 ? 2.0 * half_line : half_line;
}

inline GoldenThompsonReport golden_thompson_check(const SpectralDecomposition& spec,
                                                  const std::vector<double>& t_grid) {
  GoldenThompsonReport rep;
  rep.t_grid = t_grid;
  double top = spec.lambda_sq.back();
  for (double t : t_grid) {
    double tr = 0.0;
    for (double lsq : spec.lambda_sq) tr += std::exp(-t * lsq);
    double denom = std::pow(t, -0.5) * classical_potential_integral(spec.config.d, spec.config.s, t);
    rep.ratio.push_back(tr / denom);
    rep.truncation_ok.push_back(std::exp(-t * top) < 1e-12);
    rep.max_ratio = std::max(rep.max_ratio, tr / denom);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Lieb-Thirring: Tr[L^{-alpha}] / Integral_0^inf (r^s + lambda_0^2)^{1/2-alpha} dr,
// finite iff alpha > 1/2 + 1/s.

struct LiebThirringReport {
  double trace = 0.0;       // truncated sum + Euler-Maclaurin remainder
  double tail = 0.0;        // the remainder part
  double denominator = 0.0;
  double ratio = 0.0;
};

// fit lambda_n^2 ~ A n^q over the upper half of the spectrum
inline LineFit eigenvalue_growth_fit(const SpectralDecomposition& spec) {
  std::size_t n = spec.lambda_sq.size();
  std::vector<double> xs, ys;
  for (std::size_t k = n / 2; k < n; ++k) {
    xs.push_back(static_cast<double>(k + 1));
    ys.push_back(spec.lambda_sq[k]);
  }
  return fit_loglog(xs, ys);
}

// sum_{n > N} lambda_n^{-2 alpha} estimated beyond the computed spectrum:
// integral_{N+1/2}^inf (A u^q)^{-alpha} du with (A, q) from the growth fit
inline double spectral_tail_estimate(const SpectralDecomposition& spec, double alpha,
                                     std::size_t N) {
  LineFit f = eigenvalue_growth_fit(spec);
  double A = std::exp(f.intercept), q = f.slope;
  if (q * alpha <= 1.0)
    throw std::invalid_argument("spectral_tail_estimate: divergent tail (q*alpha <= 1)");
  double u0 = static_cast<double>(N) + 0.5;
  return std::pow(A, -alpha) * std::pow(u0, 1.0 - q * alpha) / (q * alpha - 1.0);
}

inline LiebThirringReport lieb_thirring_check(const SpectralDecomposition& spec, double alpha) {
  double crit = 0.5 + 1.0 / spec.config.s;
  if (std::abs(alpha - crit) < 1e-12)
    throw std::invalid_argument(
        "lieb_thirring_check: critical exponent, trace diverges logarithmically");
  if (alpha < crit)
    throw std::invalid_argument("lieb_thirring_check: requires alpha > 1/2 + 1/s (divergent regime)");
  LiebThirringReport rep;
  for (double lsq : spec.lambda_sq) rep.trace += std::pow(lsq, -alpha);
  rep.tail = spectral_tail_estimate(spec, alpha, spec.lambda_sq.size());
  rep.trace += rep.tail;
  double l0 = spec.lambda_sq.front();
  double s = spec.config.s;
  rep.denominator = integrate_to_infinity(
      [s, l0, alpha](double r) { return std::pow(std::pow(r, s) + l0, 0.5 - alpha); }, 0.0, 1e-12);
  rep.ratio = rep.trace / rep.denominator;
  return rep;
}

}  // namespace anhgibbs
