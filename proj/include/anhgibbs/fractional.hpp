#pragma once

// Fractional operator H_a = (-Delta)^a + |x|^s in d = 1 on a periodic box
// [-R, R), realized as a dense symmetric matrix by discrete Fourier
// conjugation: H = F^{-1} diag(|xi|^{2a}) F + diag(|x|^s). Box artifacts are
// controlled by the validity ceiling lambda^2 <= min(R^s/4, (pi n/(2R))^{2a}/4).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <lapacke.h>

#include "anhgibbs/specdiag.hpp"

namespace anhgibbs {

struct FracConfig {
  double alpha = 1.0;  // fractional order
  double s = 2.0;
  double R = 20.0;  // box half-width
  int n_grid = 1024;
  int n_eigs = 100;

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("FracConfig: alpha > 0 required");
    if (!(s > 0.0)) throw std::invalid_argument("FracConfig: s > 0 required");
    if (!(R > 0.0)) throw std::invalid_argument("FracConfig: R > 0 required");
    if (n_grid < 16 || (n_grid & (n_grid - 1)) != 0)
      throw std::invalid_argument("FracConfig: n_grid must be a power of two >= 16");
    if (n_grid > 4096)
      throw std::invalid_argument("FracConfig: n_grid > 4096 (dense eigensolve memory guard)");
    if (n_eigs < 1 || n_eigs >= n_grid)
      throw std::invalid_argument("FracConfig: 1 <= n_eigs < n_grid required");
  }

  // box modes are trustworthy only well below both the potential wall and the
  // lattice Nyquist frequency
  double kinetic_ceiling() const {
    return std::pow(kPi * n_grid / (2.0 * R), 2.0 * alpha) / 4.0;
  }
  double validity_ceiling() const {
    return std::min(std::pow(R, s) / 4.0, kinetic_ceiling());
  }
};

struct FracOperator {
  FracConfig config;
  std::vector<double> grid;    // x_i = -R + i h
  double h = 0.0;
  std::vector<double> matrix;  // row-major n x n, symmetric
};

inline FracOperator assemble_fractional(const FracConfig& cfg, bool include_potential = true) {
  cfg.validate();
  int n = cfg.n_grid;
  FracOperator op;
  op.config = cfg;
  op.h = 2.0 * cfg.R / n;
  op.grid.resize(n);
  for (int i = 0; i < n; ++i) op.grid[i] = -cfg.R + i * op.h;

  // circulant kinetic kernel t_m = (1/n) sum_k |xi_k|^{2a} cos(2 pi k m / n),
  // xi_k = (pi/R) ktil with ktil the signed lattice frequency
  std::vector<double> power(n);
  for (int k = 0; k < n; ++k) {
    int ktil = k <= n / 2 ? k : k - n;
    double xi = kPi * std::abs(ktil) / cfg.R;
    power[k] = ktil == 0 ? 0.0 : std::pow(xi, 2.0 * cfg.alpha);
  }
  std::vector<double> kern(n, 0.0);
  double base = 2.0 * kPi / n;
  for (int m = 0; m < n; ++m) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += power[k] * std::cos(base * k * m);
    kern[m] = sum / n;
  }

  op.matrix.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      op.matrix[static_cast<std::size_t>(i) * n + j] = kern[(i - j + n) % n];
    if (include_potential)
      op.matrix[static_cast<std::size_t>(i) * n + i] += std::pow(std::abs(op.grid[i]), cfg.s);
  }
  // the cosine kernel is even, so this is exact symmetrization of round-off
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      std::size_t a = static_cast<std::size_t>(i) * n + j;
      std::size_t b = static_cast<std::size_t>(j) * n + i;
      double avg = 0.5 * (op.matrix[a] + op.matrix[b]);
      op.matrix[a] = avg;
      op.matrix[b] = avg;
    }
  return op;
}

inline double symmetry_defect(const FracOperator& op) {
  int n = op.config.n_grid;
  double mx = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      mx = std::max(mx, std::abs(op.matrix[static_cast<std::size_t>(i) * n + j] -
                                 op.matrix[static_cast<std::size_t>(j) * n + i]));
  return mx;
}

struct FracDecomposition {
  FracConfig config;
  std::vector<double> grid;
  double h = 0.0;
  std::vector<double> lambda_sq;       // first n_eigs
  std::vector<double> lambda_sq_full;  // all n_grid box modes, ascending
  std::vector<std::vector<double>> eigfun;  // first n_eigs, L^2(dx)-orthonormal
  bool truncation_safe = true;

  double validity_ceiling() const { return config.validity_ceiling(); }
  // number of box modes under the validity ceiling
  int n_valid() const {
    return static_cast<int>(std::upper_bound(lambda_sq_full.begin(), lambda_sq_full.end(),
                                             validity_ceiling()) -
                            lambda_sq_full.begin());
  }
};

inline FracDecomposition eigensolve_fractional(const FracOperator& op, bool values_only) {
  int n = op.config.n_grid;
  std::vector<double> a(op.matrix);
  std::vector<double> w(n);
  lapack_int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, values_only ? 'N' : 'V', 'U', n,
                                   a.data(), n, w.data());
  if (info != 0) throw std::runtime_error("eigensolve_fractional: LAPACKE_dsyevd failed");

  FracDecomposition dec;
  dec.config = op.config;
  dec.grid = op.grid;
  dec.h = op.h;
  dec.lambda_sq_full = w;
  dec.lambda_sq.assign(w.begin(), w.begin() + op.config.n_eigs);
  if (!values_only) {
    dec.eigfun.resize(op.config.n_eigs);
    double inv_sqrt_h = 1.0 / std::sqrt(op.h);
    for (int k = 0; k < op.config.n_eigs; ++k) {
      auto& g = dec.eigfun[k];
      g.resize(n);
      double mx = 0.0;
      for (int i = 0; i < n; ++i)
        mx = std::max(mx, std::abs(a[static_cast<std::size_t>(i) * n + k]));
      double sgn = 1.0;
      for (int i = 0; i < n; ++i) {
        double v = a[static_cast<std::size_t>(i) * n + k];
        if (std::abs(v) > 1e-12 * mx) {
          sgn = v > 0 ? 1.0 : -1.0;
          break;
        }
      }
      for (int i = 0; i < n; ++i) g[i] = sgn * a[static_cast<std::size_t>(i) * n + k] * inv_sqrt_h;
    }
  }
  dec.truncation_safe = dec.lambda_sq.back() <= dec.validity_ceiling();
  return dec;
}

inline FracDecomposition solve_fractional(const FracConfig& cfg, bool values_only = false) {
  return eigensolve_fractional(assemble_fractional(cfg), values_only);
}

// ---------------------------------------------------------------------------
// Weyl exponent: N(H_a, Lambda) ~ Lambda^{1/(2a) + 1/s} in d = 1.

struct FracWeylFit {
  double exponent = 0.0;
  double predicted = 0.0;
  double r2 = 0.0;
  double Lambda_lo = 0.0, Lambda_hi = 0.0;
  double decades = 0.0;
};

inline FracWeylFit frac_weyl_check(const FracDecomposition& dec) {
  const auto& w = dec.lambda_sq_full;
  int nv = dec.n_valid();
  if (nv < 16) throw std::invalid_argument("frac_weyl_check: too few valid modes");
  double lo = w[5];
  double hi = w[nv - 1];
  FracWeylFit fit;
  fit.predicted = 1.0 / (2.0 * dec.config.alpha) + 1.0 / dec.config.s;
  fit.Lambda_lo = lo;
  fit.Lambda_hi = hi;
  fit.decades = std::log10(hi / lo);
  if (fit.decades < 1.5)
    throw std::invalid_argument("frac_weyl_check: < 1.5 decades of valid spectrum");
  std::vector<double> Ls, Ns;
  int pts = 24;
  for (int i = 0; i <= pts; ++i) {
    double L = lo * std::pow(hi / lo, static_cast<double>(i) / pts);
    auto cnt = std::upper_bound(w.begin(), w.end(), L) - w.begin();
    Ls.push_back(L);
    Ns.push_back(static_cast<double>(cnt));
  }
  LineFit f = fit_loglog(Ls, Ns);
  fit.exponent = f.slope;
  fit.r2 = f.r2;
  return fit;
}

// ---------------------------------------------------------------------------
// Truncated Schatten traces: sum_{n <= N} lambda_n^{-2 gamma} with the regime
// threshold gamma* = 1/(2a) + 1/s; below threshold the truncated sum grows
// like lambda_N^{-2 gamma + 1/a + 2/s}.

struct FracTraceReport {
  double gamma = 0.0;
  double gamma_star = 0.0;
  TraceRegime regime = TraceRegime::convergent;
  double value = 0.0;            // sum over modes under the validity ceiling
  int n_used = 0;
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  double predicted_exponent = 0.0;
  double fit_r2 = 0.0;
  double doubling_change = 0.0;  // |S(N) - S(N/2)| / S(N)
};

namespace detail {
inline double frac_partial_trace(const std::vector<double>& lam_sq, double gamma, int N) {
  double sum = 0.0;
  for (int n = 0; n < N; ++n) sum += std::pow(lam_sq[n], -gamma);
  return sum;
}
}  // namespace detail

inline FracTraceReport frac_trace_check(const FracDecomposition& dec, double gamma) {
  FracTraceReport rep;
  rep.gamma = gamma;
  rep.gamma_star = 1.0 / (2.0 * dec.config.alpha) + 1.0 / dec.config.s;
  rep.predicted_exponent = -2.0 * gamma + 1.0 / dec.config.alpha + 2.0 / dec.config.s;
  if (std::abs(gamma - rep.gamma_star) <= 1e-12)
    rep.regime = TraceRegime::log_critical;
  else
    rep.regime = gamma > rep.gamma_star ? TraceRegime::convergent : TraceRegime::polynomial;

  const auto& w = dec.lambda_sq_full;
  int N = dec.n_valid();
  if (N < 16) throw std::invalid_argument("frac_trace_check: too few valid modes");
  rep.n_used = N;
  rep.value = detail::frac_partial_trace(w, gamma, N);
  rep.doubling_change =
      std::abs(rep.value - detail::frac_partial_trace(w, gamma, N / 2)) / rep.value;

  if (rep.regime == TraceRegime::polynomial && N >= 64) {
    // doubling differences S(2m) - S(m) ~ lambda_m^{pred} remove the constant
    // low-mode offset
    std::vector<double> lams, diffs;
    for (int m = N / 2; m >= 8; m /= 2) {
      double diff = detail::frac_partial_trace(w, gamma, 2 * m) -
                    detail::frac_partial_trace(w, gamma, m);
      if (diff <= 0.0) break;
      lams.push_back(std::sqrt(w[m - 1]));
      diffs.push_back(diff);
    }
    if (lams.size() >= 3) {
      LineFit f = fit_loglog(lams, diffs);
      rep.fitted_exponent = f.slope;
      rep.fit_r2 = f.r2;
    }
  } else if (rep.regime == TraceRegime::log_critical && N >= 64) {
    std::vector<double> xs, ys;
    for (int m = 8; m <= N; m = m * 3 / 2) {
      xs.push_back(std::log(std::sqrt(w[m - 1])));
      ys.push_back(detail::frac_partial_trace(w, gamma, m));
    }
    rep.fit_r2 = fit_quadratic_r2(xs, ys);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Golden-Thompson analogue: Tr e^{-t H_a} <= C_a t^{-1/(2a)} int e^{-t|x|^s} dx
// with C_a = G(t,0) scaling constant = Gamma(1 + 1/(2a)) / pi in d = 1.

struct FracGtRow {
  double t = 0.0;
  double trace = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
};

inline std::vector<FracGtRow> frac_golden_thompson(const FracDecomposition& dec,
                                                   const std::vector<double>& t_list) {
  double Ca = std::tgamma(1.0 + 1.0 / (2.0 * dec.config.alpha)) / kPi;
  std::vector<FracGtRow> rows;
  for (double t : t_list) {
    if (!(t > 0.0)) throw std::invalid_argument("frac_golden_thompson: t > 0 required");
    FracGtRow r;
    r.t = t;
    for (double lam2 : dec.lambda_sq_full) r.trace += std::exp(-t * lam2);
    double s = dec.config.s;
    double integral =
        2.0 * integrate([t, s](double x) { return std::exp(-t * std::pow(x, s)); }, 0.0,
                        dec.config.R);
    r.bound = Ca * std::pow(t, -1.0 / (2.0 * dec.config.alpha)) * integral;
    r.ratio = r.trace / r.bound;
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Green diagonal G(x) = sum_n e_n(x)^2 / lambda_n^2 and its L^p norm; the
// admissibility window in d = 1 is p > max{1, 2a/(s(2a-1))}, valid for a > 1/2.

struct FracGreenReport {
  double p = 0.0;
  double norm = 0.0;
  double sup = 0.0;
  double window_edge = 0.0;
  bool admissible = false;
  double doubling_change = 0.0;  // relative norm change N/2 -> N
};

inline FracGreenReport frac_green_lp(const FracDecomposition& dec, double p) {
  double a = dec.config.alpha;
  if (!(a > 0.5))
    throw std::invalid_argument("frac_green_lp: requires alpha > d/2 (d = 1)");
  if (!(p >= 1.0)) throw std::invalid_argument("frac_green_lp: p >= 1 required");
  if (dec.eigfun.empty())
    throw std::invalid_argument("frac_green_lp: eigenfunctions required");
  FracGreenReport rep;
  rep.p = p;
  rep.window_edge = std::max(1.0, 2.0 * a / (dec.config.s * (2.0 * a - 1.0)));
  rep.admissible = p > rep.window_edge;

  int N = static_cast<int>(dec.eigfun.size());
  std::size_t npts = dec.grid.size();
  auto lp_of = [&](int modes) {
    std::vector<double> G(npts, 0.0);
    for (int n = 0; n < modes; ++n) {
      double inv = 1.0 / dec.lambda_sq[n];
      for (std::size_t i = 0; i < npts; ++i) G[i] += dec.eigfun[n][i] * dec.eigfun[n][i] * inv;
    }
    double sum = 0.0, mx = 0.0;
    for (double g : G) {
      sum += std::pow(g, p);
      mx = std::max(mx, g);
    }
    return std::pair<double, double>(std::pow(sum * dec.h, 1.0 / p), mx);
  };
  auto [norm_full, sup_full] = lp_of(N);
  auto [norm_half, sup_half] = lp_of(N / 2);
  (void)sup_half;
  rep.norm = norm_full;
  rep.sup = sup_full;
  rep.doubling_change = std::abs(norm_full - norm_half) / norm_full;
  return rep;
}

}  // namespace anhgibbs
