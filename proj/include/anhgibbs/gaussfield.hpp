#pragma once

// Gaussian free field sampled in the trap eigenbasis: u_N = sum_{n<=N} g_n e_n / lambda_n
// with independent complex Gaussians, E|g_n|^2 = 2 (so sigma_N carries a factor 2;
// note half the literature uses unit variance). Wick-ordered mass, L^p / negative
// Sobolev functionals, and the deterministic Cauchy-rate diagnostics.

#include <complex>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "anhgibbs/support.hpp"
#include "anhgibbs/trapspec.hpp"

namespace anhgibbs {

struct FieldSample {
  const SpectralDecomposition* spec = nullptr;
  int N = 0;                              // modes 0..N
  std::vector<std::complex<double>> g;    // N+1 coefficients, E|g_n|^2 = 2
  std::vector<std::complex<double>> u;    // field on the grid (physical coordinates)
};

// coefficients only; substream = (seed, index) so samples are order-independent
inline std::vector<std::complex<double>> sample_coefficients(int count, std::uint64_t seed,
                                                             std::uint64_t index) {
  GaussianStream gs(seed, index);
  std::vector<std::complex<double>> g(count);
  for (auto& z : g) z = gs.next_complex();
  return g;
}

inline FieldSample sample_field(const SpectralDecomposition& spec, int N, std::uint64_t seed,
                                std::uint64_t index, bool with_field = true) {
  if (N + 1 > static_cast<int>(spec.lambda_sq.size()))
    throw std::invalid_argument("sample_field: N + 1 > n_eigs");
  FieldSample fs;
  fs.spec = &spec;
  fs.N = N;
  fs.g = sample_coefficients(N + 1, seed, index);
  if (!with_field) return fs;
  if (spec.eigfun.size() < static_cast<std::size_t>(N + 1))
    throw std::invalid_argument("sample_field: eigenfunctions not stored (values-only spectrum)");
  std::size_t m = spec.grid.size();
  fs.u.assign(m, {0.0, 0.0});
  for (int n = 0; n <= N; ++n) {
    std::complex<double> c = fs.g[n] / std::sqrt(spec.lambda_sq[n]);
    const double* gn = spec.eigfun[n].data();
    for (std::size_t i = 0; i < m; ++i) fs.u[i] += c * gn[i];
  }
  if (spec.config.d >= 2) {
    double A = sphere_area(spec.config.d);
    for (std::size_t i = 0; i < m; ++i)
      fs.u[i] /= std::sqrt(A * std::pow(spec.grid[i], spec.config.d - 1.0));
  }
  return fs;
}

// sigma_N(r) = E|u_N(r)|^2 = 2 sum_{n<=N} e_n(r)^2 / lambda_n^2, at a grid node
inline double sigma_N_at(const SpectralDecomposition& spec, int N, std::size_t i) {
  double s = 0.0;
  for (int n = 0; n <= N; ++n) {
    double g = spec.eigfun[n][i];
    s += g * g / spec.lambda_sq[n];
  }
  s *= 2.0;
  if (spec.config.d >= 2)
    s /= sphere_area(spec.config.d) * std::pow(spec.grid[i], spec.config.d - 1.0);
  return s;
}

inline double sigma_N(const SpectralDecomposition& spec, int N, double r) {
  auto it = std::lower_bound(spec.grid.begin(), spec.grid.end(), r);
  std::size_t i = it - spec.grid.begin();
  if (i == spec.grid.size() || (i > 0 && r - spec.grid[i - 1] < spec.grid[i] - r)) --i;
  return sigma_N_at(spec, N, i);
}

// E integral |u_N|^2 = 2 sum_{n<=N} lambda_n^{-2}
inline double sigma_mass(const SpectralDecomposition& spec, int N) {
  if (N + 1 > static_cast<int>(spec.lambda_sq.size()))
    throw std::invalid_argument("sigma_mass: N + 1 > n_eigs");
  double s = 0.0;
  for (int n = 0; n <= N; ++n) s += 1.0 / spec.lambda_sq[n];
  return 2.0 * s;
}

struct WickMass {
  double value = 0.0;
};

inline WickMass wick_mass(const FieldSample& fs) {
  double v = 0.0;
  for (int n = 0; n <= fs.N; ++n)
    v += (std::norm(fs.g[n]) - 2.0) / fs.spec->lambda_sq[n];
  return {v};
}

// Var of the Wick mass: E[(|g|^2 - 2)^2] = 4 per mode
inline double wick_variance(const SpectralDecomposition& spec, int N) {
  double v = 0.0;
  for (int n = 0; n <= N; ++n) v += 4.0 / (spec.lambda_sq[n] * spec.lambda_sq[n]);
  return v;
}

inline double lp_norm(const FieldSample& fs, double p) {
  const auto& spec = *fs.spec;
  auto w = radial_weights(spec);
  double acc = 0.0;
  for (std::size_t i = 0; i < fs.u.size(); ++i)
    acc += std::pow(std::abs(fs.u[i]), p) * w[i];
  return std::pow(acc, 1.0 / p);
}

// ||u_N||_{H^{-delta}}^2 = sum lambda_n^{-2 delta} |u_n|^2 = sum lambda_n^{-2(1+delta)} |g_n|^2
inline double sobolev_norm_sq(const FieldSample& fs, double delta) {
  const auto& spec = *fs.spec;
  double acc = 0.0;
  for (int n = 0; n <= fs.N; ++n)
    acc += std::pow(spec.lambda_sq[n], -(1.0 + delta)) * std::norm(fs.g[n]);
  return acc;
}

inline void check_lp_moment_window(const TrapConfig& c, double p) {
  double lo = std::max(2.0, 4.0 / c.s);
  if (!(p > lo))
    throw std::invalid_argument("moment_report: requires p > max{2, 4/s} = " +
                                std::to_string(lo));
  if (c.d >= 3 && !(p < 2.0 * c.d / (c.d - 2.0)))
    throw std::invalid_argument("moment_report: requires p < 2d/(d-2) for d >= 3");
}

inline void check_sobolev_window(const TrapConfig& c, double delta) {
  if (!(delta > -0.5 + 1.0 / c.s))
    throw std::invalid_argument("moment_report: requires delta > -1/2 + 1/s");
}

struct MomentReport {
  int N = 0;
  double p = 0.0, q = 0.0, delta = 0.0;
  MeanStderr lp_q;        // E ||u_N||_{L^p}^q
  MeanStderr sob_q;       // E ||u_N||_{H^{-delta}}^q
  MeanStderr wick_sq;     // E M_N^2
  MeanStderr wick_abs_p;  // E |M_N|^p
};

inline MomentReport moment_report(const SpectralDecomposition& spec, int N, double p, double q,
                                  double delta, int n_samples, std::uint64_t seed) {
  check_lp_moment_window(spec.config, p);
  check_sobolev_window(spec.config, delta);
  MomentReport rep;
  rep.N = N;
  rep.p = p;
  rep.q = q;
  rep.delta = delta;
  std::vector<double> lp(n_samples), sob(n_samples), wsq(n_samples), wp(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    FieldSample fs = sample_field(spec, N, seed, k);
    lp[k] = std::pow(lp_norm(fs, p), q);
    sob[k] = std::pow(sobolev_norm_sq(fs, delta), 0.5 * q);
    double m = wick_mass(fs).value;
    wsq[k] = m * m;
    wp[k] = std::pow(std::abs(m), p);
  }
  rep.lp_q = mean_stderr(lp);
  rep.sob_q = mean_stderr(sob);
  rep.wick_sq = mean_stderr(wsq);
  rep.wick_abs_p = mean_stderr(wp);
  return rep;
}

// fitted exponent in lambda_N of the L^2(omega) Cauchy increment
// sqrt(E ||u_{2N} - u_N||_{H^{-delta}}^2); expected -(1/2 + delta - 1/s)
inline double sobolev_cauchy_exponent(const SpectralDecomposition& spec, double delta,
                                      const std::vector<int>& Ns) {
  check_sobolev_window(spec.config, delta);
  std::vector<double> lams, incs;
  for (int N : Ns) {
    if (2 * N >= static_cast<int>(spec.lambda_sq.size()))
      throw std::invalid_argument("sobolev_cauchy_exponent: 2N > n_eigs");
    double s = 0.0;
    for (int n = N + 1; n <= 2 * N; ++n)
      s += 2.0 * std::pow(spec.lambda_sq[n], -(1.0 + delta));
    lams.push_back(std::sqrt(spec.lambda_sq[N]));
    incs.push_back(std::sqrt(s));
  }
  return fit_loglog(lams, incs).slope;
}

// fitted exponent in lambda_N of sqrt(Var of the tail Wick mass over (N, 2N]);
// expected -3/2 + 1/s
inline double wick_cauchy_exponent(const SpectralDecomposition& spec,
                                   const std::vector<int>& Ns) {
  std::vector<double> lams, incs;
  for (int N : Ns) {
    if (2 * N >= static_cast<int>(spec.lambda_sq.size()))
      throw std::invalid_argument("wick_cauchy_exponent: 2N > n_eigs");
    double s = 0.0;
    for (int n = N + 1; n <= 2 * N; ++n)
      s += 4.0 / (spec.lambda_sq[n] * spec.lambda_sq[n]);
    lams.push_back(std::sqrt(spec.lambda_sq[N]));
    incs.push_back(std::sqrt(s));
  }
  return fit_loglog(lams, incs).slope;
}

struct TailSignProb {
  double p_plus = 0.0, p_minus = 0.0;
  double stderr_ = 0.0;
};

// empirical sign probabilities of the tail Wick mass sum_{N < n < n_eigs}
inline TailSignProb wick_tail_sign_prob(const SpectralDecomposition& spec, int N, int n_samples,
                                        std::uint64_t seed) {
  int top = static_cast<int>(spec.lambda_sq.size());
  if (N + 1 >= top)
    throw std::invalid_argument("wick_tail_sign_prob: empty tail (N + 1 >= n_eigs)");
  long plus = 0, minus = 0;
  for (int k = 0; k < n_samples; ++k) {
    GaussianStream gs(seed, k);
    double y = 0.0;
    for (int n = N + 1; n < top; ++n)
      y += (std::norm(gs.next_complex()) - 2.0) / spec.lambda_sq[n];
    (y > 0.0 ? plus : minus) += 1;
  }
  TailSignProb r;
  r.p_plus = double(plus) / n_samples;
  r.p_minus = double(minus) / n_samples;
  r.stderr_ = std::sqrt(r.p_plus * r.p_minus / n_samples);
  return r;
}

}  // namespace anhgibbs
