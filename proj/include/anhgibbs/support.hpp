#pragma once

// Small shared numerics: deterministic RNG streams, pairwise summation,
// MC statistics, least-squares fits, adaptive quadrature, thread pool.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace anhgibbs {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// ---------------------------------------------------------------------------
// Counter-based RNG. Each (seed, stream) pair yields an independent,
// order-independent substream, so MC samples are reproducible under any
// worker count.

struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t s) : state(s) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in (0,1), never exactly 0
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 s(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  s.next();
  return s.next();
}

// Gaussian stream via Box-Muller; self-contained so results are
// bit-identical across platforms and standard libraries.
struct GaussianStream {
  SplitMix64 rng;
  bool has_spare = false;
  double spare = 0.0;
  GaussianStream(std::uint64_t seed, std::uint64_t stream)
      : rng(mix_seed(seed, stream)) {}
  double next() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u = rng.uniform(), v = rng.uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    spare = r * std::sin(2.0 * kPi * v);
    has_spare = true;
    return r * std::cos(2.0 * kPi * v);
  }
  // complex Gaussian with E|g|^2 = 2 (unit-variance real and imaginary parts)
  std::complex<double> next_complex() {
    double re = next();
    double im = next();
    return {re, im};
  }
};

// ---------------------------------------------------------------------------
// Deterministic pairwise summation: result independent of how samples were
// produced (serially or across workers) as long as the vector order is fixed.

inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  std::size_t h = x.size() / 2;
  return pairwise_sum(x.subspan(0, h)) + pairwise_sum(x.subspan(h));
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline MeanStderr mean_stderr(std::span<const double> x) {
  MeanStderr r;
  r.n = x.size();
  if (r.n == 0) return r;
  r.mean = pairwise_sum(x) / static_cast<double>(r.n);
  if (r.n < 2) return r;
  std::vector<double> sq(r.n);
  for (std::size_t i = 0; i < r.n; ++i) {
    double d = x[i] - r.mean;
    sq[i] = d * d;
  }
  double var = pairwise_sum(sq) / static_cast<double>(r.n - 1);
  r.stderr_ = std::sqrt(var / static_cast<double>(r.n));
  return r;
}

// ---------------------------------------------------------------------------
// Least squares line fit y = a + b x; returns (intercept, slope, R^2).

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 points");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  LineFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

// log-log power-law fit y ~ C x^b over positive data
inline LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

// Quadratic fit y = a + b x + c x^2, returning R^2 (used for the
// log-critical trace branch).
inline double fit_quadratic_r2(std::span<const double> x, std::span<const double> y) {
  std::size_t n = x.size();
  if (n < 4) throw std::invalid_argument("fit_quadratic_r2: need >= 4 points");
  // normal equations for the 3x3 system
  double m[3][4] = {};
  for (std::size_t i = 0; i < n; ++i) {
    double b[3] = {1.0, x[i], x[i] * x[i]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += b[r] * b[c];
      m[r][3] += b[r] * y[i];
    }
  }
  for (int col = 0; col < 3; ++col) {  // Gaussian elimination, partial pivot
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    for (int c = 0; c < 4; ++c) std::swap(m[col][c], m[piv][c]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  double coef[3];
  for (int r = 0; r < 3; ++r) coef[r] = m[r][3] / m[r][r];
  double ymean = 0;
  for (std::size_t i = 0; i < n; ++i) ymean += y[i];
  ymean /= static_cast<double>(n);
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = coef[0] + coef[1] * x[i] + coef[2] * x[i] * x[i];
    ss_res += (y[i] - fit) * (y[i] - fit);
    ss_tot += (y[i] - ymean) * (y[i] - ymean);
  }
  return ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature.

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}
inline double adapt(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, m, fa, flm, fm);
  double right = simpson(f, m, b, fm, frm, fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adapt(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40) {
  if (a == b) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adapt(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// semi-infinite integral of a decaying integrand: march in doubling panels
inline double integrate_to_infinity(const std::function<double(double)>& f, double a,
                                    double tol = 1e-10) {
  double total = 0.0, width = 1.0, lo = a;
  for (int k = 0; k < 80; ++k) {
    double piece = integrate(f, lo, lo + width, tol);
    total += piece;
    if (std::abs(piece) < tol * (1.0 + std::abs(total)) && k > 3) break;
    lo += width;
    width *= 2.0;
  }
  return total;
}

// ---------------------------------------------------------------------------
// parallel_for: static block split across hardware threads. Bodies must write
// to disjoint slots; combined with pairwise_sum this keeps results
// independent of the worker count.

inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                         unsigned workers = 0) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (workers == 1 || n < 2 * workers) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& t : pool) t.join();
}

inline double sphere_area(int d) {
  // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace anhgibbs
