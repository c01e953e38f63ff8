#pragma once

// Eigenvalue counting and Weyl-law fits, truncated/tail Schatten traces with
// regime classification, the Green-function diagonal and its L^p norms, the
// origin-decay check, and functional-inequality sanity checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "anhgibbs/besselheat.hpp"
#include "anhgibbs/support.hpp"
#include "anhgibbs/trapspec.hpp"

namespace anhgibbs {

// ---------------------------------------------------------------------------
// Counting and Weyl law

inline int counting_function(const SpectralDecomposition& spec, double Lambda) {
  double ceiling = std::min(spec.lambda_sq.back(), spec.validity_ceiling());
  if (Lambda > ceiling)
    throw std::invalid_argument("counting_function: Lambda above validity ceiling");
  return static_cast<int>(std::upper_bound(spec.lambda_sq.begin(), spec.lambda_sq.end(), Lambda) -
                          spec.lambda_sq.begin());
}

struct WeylFit {
  double exponent = 0.0;
  double prefactor = 0.0;  // exp(intercept) of the log-log fit
  double c_min = 0.0, c_max = 0.0;  // two-sided constants of N * Lambda^{-1/2-1/s}
  double r2 = 0.0;
};

inline WeylFit weyl_fit(const SpectralDecomposition& spec, double Lambda_lo, double Lambda_hi,
                        int n_points = 24) {
  if (Lambda_hi / Lambda_lo < std::pow(10.0, 1.5))
    throw std::invalid_argument("weyl_fit: range must span >= 1.5 decades");
  std::vector<double> L, N;
  for (int i = 0; i < n_points; ++i) {
    double lam = Lambda_lo * std::pow(Lambda_hi / Lambda_lo, i / double(n_points - 1));
    int cnt = counting_function(spec, lam);
    if (cnt == 0) continue;
    L.push_back(lam);
    N.push_back(cnt);
  }
  LineFit f = fit_loglog(L, N);
  WeylFit wf;
  wf.exponent = f.slope;
  wf.prefactor = std::exp(f.intercept);
  wf.r2 = f.r2;
  double theory = 0.5 + 1.0 / spec.config.s;
  wf.c_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < L.size(); ++i) {
    double c = N[i] * std::pow(L[i], -theory);
    wf.c_min = std::min(wf.c_min, c);
    wf.c_max = std::max(wf.c_max, c);
  }
  return wf;
}

inline int spectral_window_count(const SpectralDecomposition& spec, double Lambda, double k0) {
  return counting_function(spec, k0 * Lambda) - counting_function(spec, Lambda);
}

// ---------------------------------------------------------------------------
// Truncated and tail Schatten traces

enum class TraceRegime { convergent, log_critical, polynomial };

inline const char* trace_regime_name(TraceRegime r) {
  switch (r) {
    case TraceRegime::convergent: return "convergent";
    case TraceRegime::log_critical: return "log-critical";
    default: return "polynomial";
  }
}

struct TraceRegimeReport {
  double p = 0.0;
  TraceRegime regime = TraceRegime::convergent;
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();  // polynomial regime only
  double predicted_exponent = 0.0;  // -2p + 1 + 2/s
  double fit_r2 = 0.0;
};

inline TraceRegime classify_trace_regime(double p, double s) {
  double crit = 0.5 + 1.0 / s;
  if (std::abs(p - crit) <= 1e-12) return TraceRegime::log_critical;
  return p > crit ? TraceRegime::convergent : TraceRegime::polynomial;
}

inline double partial_trace(const SpectralDecomposition& spec, double p, int N) {
  double sum = 0.0;
  for (int n = 0; n < N; ++n) sum += std::pow(spec.lambda_sq[n], -p);
  return sum;
}

struct TruncatedTrace {
  double value = 0.0;
  TraceRegimeReport report;
};

inline TruncatedTrace truncated_trace(const SpectralDecomposition& spec, double p, int N) {
  if (N > static_cast<int>(spec.lambda_sq.size()))
    throw std::invalid_argument("truncated_trace: N > n_eigs");
  TruncatedTrace tt;
  tt.value = partial_trace(spec, p, N);
  tt.report.p = p;
  tt.report.regime = classify_trace_regime(p, spec.config.s);
  tt.report.predicted_exponent = -2.0 * p + 1.0 + 2.0 / spec.config.s;
  if (tt.report.regime == TraceRegime::polynomial && N >= 64) {
    // exponent from doubling differences S(2m) - S(m) ~ lambda_m^{pred}:
    // differencing removes the constant offset from low modes
    std::vector<double> lams, diffs;
    for (int m = N / 2; m >= 8; m /= 2) {
      double diff = partial_trace(spec, p, 2 * m) - partial_trace(spec, p, m);
      if (diff <= 0.0) break;
      lams.push_back(std::sqrt(spec.lambda_sq[m - 1]));
      diffs.push_back(diff);
    }
    if (lams.size() >= 3) {
      LineFit f = fit_loglog(lams, diffs);
      tt.report.fitted_exponent = f.slope;
      tt.report.fit_r2 = f.r2;
    }
  } else if (tt.report.regime == TraceRegime::log_critical && N >= 64) {
    // quadratic fit of S(m) against log(lambda_m); R^2 certifies (log)^2 growth
    std::vector<double> xs, ys;
    for (int m = 8; m <= N; m = m * 3 / 2) {
      xs.push_back(std::log(std::sqrt(spec.lambda_sq[m - 1])));
      ys.push_back(partial_trace(spec, p, m));
    }
    tt.report.fit_r2 = fit_quadratic_r2(xs, ys);
  }
  return tt;
}

// sum over n > N (0-based count N) with analytic remainder past the computed spectrum
inline double tail_trace(const SpectralDecomposition& spec, double p, int N) {
  if (classify_trace_regime(p, spec.config.s) != TraceRegime::convergent)
    throw std::invalid_argument("tail_trace: requires p > 1/2 + 1/s (convergent regime)");
  double sum = 0.0;
  for (std::size_t n = N; n < spec.lambda_sq.size(); ++n)
    sum += std::pow(spec.lambda_sq[n], -p);
  sum += spectral_tail_estimate(spec, p, spec.lambda_sq.size());
  return sum;
}

// fitted exponent of lambda_N versus N (expected s/(2+s))
inline double lambda_growth(const SpectralDecomposition& spec) {
  return 0.5 * eigenvalue_growth_fit(spec).slope;
}

// ---------------------------------------------------------------------------
// Green-function diagonal G(r,r) = sum_n e_n(r)^2 / lambda_n^2.
//
// The eigen-sum over the first N modes is completed by the exact remainder
// sum_{n>N} g_n(i)^2/lambda_n^2 = (T^{-1})_{ii}/h - sum_{n<=N}, with the
// resolvent diagonal from two continued-fraction sweeps instead of the high
// modes themselves, so the completed diagonal is independent of N.

namespace detail {
// diagonal of T^{-1} for the assembled tridiagonal, O(n):
// (T^{-1})_{ii} = 1 / (f_i + b_i - a_i) with forward/backward LDL^T pivots
inline std::vector<double> fd_resolvent_diagonal(const TrapConfig& cfg) {
  TridiagonalOperator op = assemble_operator(cfg);
  std::size_t n = op.diag.size();
  std::vector<double> fwd(n), bwd(n);
  fwd[0] = op.diag[0];
  for (std::size_t i = 1; i < n; ++i)
    fwd[i] = op.diag[i] - op.offdiag[i - 1] * op.offdiag[i - 1] / fwd[i - 1];
  bwd[n - 1] = op.diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    bwd[i] = op.diag[i] - op.offdiag[i] * op.offdiag[i] / bwd[i + 1];
  std::vector<double> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[i] = 1.0 / (fwd[i] + bwd[i] - op.diag[i]);
  return inv;
}
}  // namespace detail

// diagonal of the half-line resolvent kernel of L1 at every grid node;
// kernel value = matrix inverse / h (grid delta carries a 1/h)
inline std::vector<double> green_diagonal_g_all(const SpectralDecomposition& spec, int N,
                                                bool with_tail = true) {
  if (with_tail) {
    auto inv = detail::fd_resolvent_diagonal(spec.config);
    for (auto& v : inv) v /= spec.h;
    return inv;
  }
  std::vector<double> out(spec.grid.size(), 0.0);
  for (int n = 0; n < N; ++n) {
    double inv_lam = 1.0 / spec.lambda_sq[n];
    const auto& g = spec.eigfun[n];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i] * g[i] * inv_lam;
  }
  return out;
}

// diagonal in the half-line g-coordinates (the resolvent kernel of L1)
inline double green_diagonal_g(const SpectralDecomposition& spec, std::size_t i, int N,
                               bool with_tail = true) {
  if (with_tail) return detail::fd_resolvent_diagonal(spec.config)[i] / spec.h;
  double sum = 0.0;
  for (int n = 0; n < N; ++n) {
    double g = spec.eigfun[n][i];
    sum += g * g / spec.lambda_sq[n];
  }
  return sum;
}

// diagonal in physical coordinates: sum_n e_n(r)^2 / lambda_n^2
inline double green_diagonal(const SpectralDecomposition& spec, std::size_t i, int N,
                             bool with_tail = true) {
  double gg = green_diagonal_g(spec, i, N, with_tail);
  if (spec.config.d == 1) return gg;
  double r = spec.grid[i];
  return gg / (sphere_area(spec.config.d) * std::pow(r, spec.config.d - 1.0));
}

inline void check_green_lp_window(const TrapConfig& c, double p) {
  double lo = std::max(1.0, 2.0 / c.s);
  double hi = c.d <= 2 ? std::numeric_limits<double>::infinity() : c.d / (c.d - 2.0);
  if (!(p > lo))
    throw std::invalid_argument("green_lp_norm: requires p > max{1, 2/s} = " + std::to_string(lo));
  if (!(p < hi))
    throw std::invalid_argument("green_lp_norm: requires p < d/(d-2) = " + std::to_string(hi));
}

inline double green_lp_norm(const SpectralDecomposition& spec, double p, int N = 0,
                            bool with_tail = true) {
  check_green_lp_window(spec.config, p);
  if (N == 0) N = static_cast<int>(spec.lambda_sq.size());
  auto gg = green_diagonal_g_all(spec, N, with_tail);
  auto w = radial_weights(spec);
  const auto& c = spec.config;
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    double g = c.d == 1 ? gg[i]
                        : gg[i] / (sphere_area(c.d) * std::pow(spec.grid[i], c.d - 1.0));
    acc += std::pow(g, p) * w[i];
  }
  return std::pow(acc, 1.0 / p);
}

inline double green_sup(const SpectralDecomposition& spec, int N = 0, bool with_tail = true) {
  if (N == 0) N = static_cast<int>(spec.lambda_sq.size());
  auto gg = green_diagonal_g_all(spec, N, with_tail);
  const auto& c = spec.config;
  double sup = 0.0;
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    double g = c.d == 1 ? gg[i]
                        : gg[i] / (sphere_area(c.d) * std::pow(spec.grid[i], c.d - 1.0));
    sup = std::max(sup, g);
  }
  return sup;
}

// sup over r in (0,1] of r^{-beta} L1^{-1}(r,r) -- the half-line kernel, which
// vanishes linearly at the origin, so the sup is finite for 0 < beta < 1
inline double origin_decay_check(const SpectralDecomposition& spec, double beta, int N = 0,
                                 bool with_tail = true) {
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::invalid_argument("origin_decay_check: requires 0 < beta < 1");
  if (spec.config.d < 2) throw std::invalid_argument("origin_decay_check: d >= 2 required");
  if (N == 0) N = static_cast<int>(spec.lambda_sq.size());
  auto gg = green_diagonal_g_all(spec, N, with_tail);
  double sup = 0.0;
  for (std::size_t i = 0; i < spec.grid.size() && spec.grid[i] <= 1.0; ++i)
    sup = std::max(sup, std::pow(spec.grid[i], -beta) * gg[i]);
  return sup;
}

// ---------------------------------------------------------------------------
// Functional inequalities on grid functions (uniform spacing h)

// Hardy slack on (0, inf): int f'^2 - int f^2/(4 r^2); >= 0 for compactly
// supported f. Forward differences; f given on nodes r_i = (i+1) h with the
// Dirichlet value f(0) = 0 supplying the first interval.
inline double hardy_slack(const std::vector<double>& f, double h) {
  if (f.empty()) return 0.0;
  double kinetic = f[0] * f[0] / h, hardy = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    double df = (f[i + 1] - f[i]) / h;
    kinetic += df * df * h;
    double r = (i + 1) * h;
    hardy += f[i] * f[i] / (4.0 * r * r) * h;
  }
  return kinetic - hardy;
}

// d=1 GNS slack: C ||u'||^{(p-2)/2} ||u||^{(p+2)/2} - ||u||_p^p; >= 0 when C
// is (an upper bound for) the sharp constant.
inline double gns_slack_1d(const std::vector<double>& u, double h, double p, double C) {
  double l2 = 0.0, lp = 0.0, grad2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    l2 += u[i] * u[i] * h;
    lp += std::pow(std::abs(u[i]), p) * h;
    if (i + 1 < u.size()) {
      double du = (u[i + 1] - u[i]) / h;
      grad2 += du * du * h;
    }
  }
  return C * std::pow(grad2, 0.25 * (p - 2.0)) * std::pow(l2, 0.25 * (p + 2.0)) - lp;
}

}  // namespace anhgibbs
