#pragma once

// Half-line radial operator L1 = -d^2/dr^2 + (d-1)(d-3)/(4r^2) + r^s with
// Dirichlet boundary at 0 (d >= 2), and the full-line operator -d^2/dx^2 +
// |x|^s for d = 1. Second-order central differences on a uniform grid give a
// symmetric tridiagonal matrix; eigenpairs come from LAPACK.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <lapacke.h>

#include "anhgibbs/support.hpp"

namespace anhgibbs {

struct TrapConfig {
  int d = 1;
  double s = 2.0;
  double r_max = 0.0;  // 0 -> choose adaptively from n_eigs
  int n_grid = 8192;
  int n_eigs = 128;

  void validate() const {
    if (d < 1) throw std::invalid_argument("TrapConfig: d >= 1 required");
    if (!(s > 0.0)) throw std::invalid_argument("TrapConfig: s > 0 required");
    if (n_grid < 16) throw std::invalid_argument("TrapConfig: n_grid >= 16 required");
    if (n_eigs < 1 || n_eigs >= n_grid)
      throw std::invalid_argument("TrapConfig: 1 <= n_eigs < n_grid required");
    if (r_max < 0.0 || !std::isfinite(r_max))
      throw std::invalid_argument("TrapConfig: r_max must be finite and >= 0");
  }
};

// Weyl-law guess for the top eigenvalue, used to size the box so that
// lambda_top^2 <= r_max^s / 4 holds with some margin.
inline double estimate_top_eigenvalue(int d, double s, int n_eigs) {
  // N(Lambda) ~ (w/pi) Lambda^{1/2+1/s} B(1/s,3/2)/s, w = 2 on the full line
  // (d=1) and 1 on the half line.
  double w = d == 1 ? 2.0 : 1.0;
  double B = std::tgamma(1.0 / s) * std::tgamma(1.5) / std::tgamma(1.0 / s + 1.5);
  double coef = w / kPi * B / s;
  return std::pow((n_eigs + 2.0) / coef, 1.0 / (0.5 + 1.0 / s));
}

inline TrapConfig with_adaptive_box(TrapConfig cfg) {
  if (cfg.r_max == 0.0) {
    double top = estimate_top_eigenvalue(cfg.d, cfg.s, cfg.n_eigs);
    cfg.r_max = std::pow(4.0 * 1.25 * top, 1.0 / cfg.s);
  }
  return cfg;
}

struct TridiagonalOperator {
  TrapConfig config;
  std::vector<double> grid;  // interior nodes; Dirichlet rows at both ends
  std::vector<double> diag;
  std::vector<double> offdiag;  // size n-1, constant -1/h^2
  double h = 0.0;
};

inline TridiagonalOperator assemble_operator(TrapConfig cfg) {
  cfg = with_adaptive_box(cfg);
  cfg.validate();
  int n = cfg.n_grid;
  TridiagonalOperator op;
  op.config = cfg;
  op.grid.resize(n);
  op.diag.resize(n);
  op.offdiag.assign(n - 1, 0.0);
  double lo, hi;
  if (cfg.d == 1) {
    lo = -cfg.r_max;
    hi = cfg.r_max;
  } else {
    lo = 0.0;
    hi = cfg.r_max;
  }
  op.h = (hi - lo) / (n + 1);
  double inv_h2 = 1.0 / (op.h * op.h);
  double isq = cfg.d >= 2 ? (cfg.d - 1.0) * (cfg.d - 3.0) / 4.0 : 0.0;
  for (int i = 0; i < n; ++i) {
    double r = lo + (i + 1) * op.h;
    op.grid[i] = r;
    double V = std::pow(std::abs(r), cfg.s);
    if (cfg.d >= 2) V += isq / (r * r);
    if (!std::isfinite(V)) throw std::runtime_error("assemble_operator: non-finite potential");
    op.diag[i] = 2.0 * inv_h2 + V;
  }
  for (int i = 0; i + 1 < n; ++i) op.offdiag[i] = -inv_h2;
  return op;
}

// Sturm-sequence count of eigenvalues < threshold (exact for the matrix).
inline int sturm_count(const TridiagonalOperator& op, double threshold) {
  int count = 0;
  double q = op.diag[0] - threshold;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < op.diag.size(); ++i) {
    double off2 = op.offdiag[i - 1] * op.offdiag[i - 1];
    q = (op.diag[i] - threshold) - off2 / (q == 0.0 ? 1e-300 : q);
    if (q < 0) ++count;
  }
  return count;
}

struct SpectralDecomposition {
  TrapConfig config;
  std::vector<double> grid;
  double h = 0.0;
  std::vector<double> lambda_sq;          // ascending
  std::vector<std::vector<double>> eigfun;  // g_n(r), L^2(dr)-orthonormal
  bool truncation_safe = true;             // lambda_top^2 <= r_max^s / 4

  double validity_ceiling() const { return std::pow(config.r_max, config.s) / 4.0; }
};

inline SpectralDecomposition eigensolve(const TridiagonalOperator& op, int n_eigs) {
  int n = static_cast<int>(op.diag.size());
  if (n_eigs > n - 1) throw std::invalid_argument("eigensolve: n_eigs > matrix size - 1");
  std::vector<double> d(op.diag), e(op.offdiag);
  std::vector<double> w(n), z(static_cast<std::size_t>(n) * n_eigs);
  std::vector<lapack_int> isuppz(2 * std::max(1, n_eigs));
  lapack_int m = 0;
  lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(),
                                   0.0, 0.0, 1, n_eigs, 0.0, &m, w.data(), z.data(), n,
                                   isuppz.data());
  if (info != 0 || m < n_eigs) throw std::runtime_error("eigensolve: LAPACKE_dstevr failed");

  SpectralDecomposition spec;
  spec.config = op.config;
  spec.grid = op.grid;
  spec.h = op.h;
  spec.lambda_sq.assign(w.begin(), w.begin() + n_eigs);
  spec.eigfun.resize(n_eigs);
  double inv_sqrt_h = 1.0 / std::sqrt(op.h);
  for (int k = 0; k < n_eigs; ++k) {
    auto& g = spec.eigfun[k];
    g.resize(n);
    const double* col = z.data() + static_cast<std::size_t>(k) * n;
    double mx = 0.0;
    for (int i = 0; i < n; ++i) mx = std::max(mx, std::abs(col[i]));
    double sgn = 1.0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(col[i]) > 1e-12 * mx) {  // g'(0+) > 0 convention
        sgn = col[i] > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < n; ++i) g[i] = sgn * col[i] * inv_sqrt_h;
  }
  spec.truncation_safe = spec.lambda_sq.back() <= spec.validity_ceiling();
  return spec;
}

inline SpectralDecomposition solve_trap(const TrapConfig& cfg) {
  TridiagonalOperator op = assemble_operator(cfg);
  return eigensolve(op, cfg.n_eigs);
}

// Eigenvalues only (empty eigfun), via the fast Pal-Walker-Kahan QL variant;
// sufficient for counting, Weyl fits, and trace diagnostics.
inline SpectralDecomposition solve_trap_values(const TrapConfig& cfg) {
  TridiagonalOperator op = assemble_operator(cfg);
  int n = static_cast<int>(op.diag.size());
  std::vector<double> d(op.diag), e(op.offdiag);
  lapack_int info = LAPACKE_dsterf(n, d.data(), e.data());
  if (info != 0) throw std::runtime_error("solve_trap_values: LAPACKE_dsterf failed");
  SpectralDecomposition spec;
  spec.config = op.config;
  spec.grid = op.grid;
  spec.h = op.h;
  spec.lambda_sq.assign(d.begin(), d.begin() + op.config.n_eigs);
  spec.truncation_safe = spec.lambda_sq.back() <= spec.validity_ceiling();
  return spec;
}

// e_n(r) = |S^{d-1}|^{-1/2} r^{-(d-1)/2} g_n(r); unit L^2(R^d) norm.
inline std::vector<double> to_radial_eigenfunction(const SpectralDecomposition& spec, int n) {
  if (spec.config.d < 2)
    throw std::invalid_argument("to_radial_eigenfunction: d >= 2 required (identity for d=1)");
  double c = 1.0 / std::sqrt(sphere_area(spec.config.d));
  std::vector<double> e(spec.grid.size());
  double expo = -(spec.config.d - 1.0) / 2.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = c * std::pow(spec.grid[i], expo) * spec.eigfun[n][i];
  return e;
}

// Quadrature weight of node i for integrals over R^d of radial functions:
// |S^{d-1}| r^{d-1} h (plain h for d = 1).
inline std::vector<double> radial_weights(const SpectralDecomposition& spec) {
  std::vector<double> w(spec.grid.size());
  if (spec.config.d == 1) {
    std::fill(w.begin(), w.end(), spec.h);
  } else {
    double A = sphere_area(spec.config.d);
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = A * std::pow(spec.grid[i], spec.config.d - 1.0) * spec.h;
  }
  return w;
}

inline double apply_residual(const TridiagonalOperator& op, const std::vector<double>& g,
                             double lambda_sq) {
  int n = static_cast<int>(g.size());
  double norm2 = 0.0, res2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = op.diag[i] * g[i];
    if (i > 0) v += op.offdiag[i - 1] * g[i - 1];
    if (i + 1 < n) v += op.offdiag[i] * g[i + 1];
    double r = v - lambda_sq * g[i];
    res2 += r * r;
    norm2 += g[i] * g[i];
  }
  return std::sqrt(res2 / norm2) / lambda_sq;
}

inline double residual_check(const SpectralDecomposition& spec) {
  TridiagonalOperator op = assemble_operator(spec.config);
  double worst = 0.0;
  for (std::size_t k = 0; k < spec.eigfun.size(); ++k)
    worst = std::max(worst, apply_residual(op, spec.eigfun[k], spec.lambda_sq[k]));
  return worst;
}

// ---------------------------------------------------------------------------
// Binary cache: little-endian float64 payload with a config header.

inline std::uint64_t config_key(const TrapConfig& c) {
  SplitMix64 h(0x5be1a7a5c0ffee00ULL);
  auto mix = [&h](std::uint64_t v) {
    h.state ^= v;
    h.next();
  };
  mix(static_cast<std::uint64_t>(c.d));
  std::uint64_t bits;
  static_assert(sizeof(double) == 8);
  std::memcpy(&bits, &c.s, 8);
  mix(bits);
  std::memcpy(&bits, &c.r_max, 8);
  mix(bits);
  mix(static_cast<std::uint64_t>(c.n_grid));
  mix(static_cast<std::uint64_t>(c.n_eigs));
  return h.next();
}

inline void save_decomposition(const SpectralDecomposition& spec, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("save_decomposition: cannot open " + path);
  auto wr_i64 = [f](std::int64_t v) { std::fwrite(&v, 8, 1, f); };
  auto wr_f64 = [f](double v) { std::fwrite(&v, 8, 1, f); };
  wr_i64(0x414e484742535043LL);  // magic
  wr_i64(spec.config.d);
  wr_f64(spec.config.s);
  wr_f64(spec.config.r_max);
  wr_i64(spec.config.n_grid);
  wr_i64(spec.config.n_eigs);
  wr_f64(spec.h);
  wr_i64(spec.truncation_safe ? 1 : 0);
  wr_i64(static_cast<std::int64_t>(spec.eigfun.size()));
  std::fwrite(spec.grid.data(), 8, spec.grid.size(), f);
  std::fwrite(spec.lambda_sq.data(), 8, spec.lambda_sq.size(), f);
  for (const auto& g : spec.eigfun) std::fwrite(g.data(), 8, g.size(), f);
  std::fclose(f);
}

inline bool load_decomposition(const std::string& path, SpectralDecomposition& spec) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return false;
  auto rd_i64 = [f]() {
    std::int64_t v = 0;
    if (std::fread(&v, 8, 1, f) != 1) throw std::runtime_error("cache: short read");
    return v;
  };
  auto rd_f64 = [f]() {
    double v = 0;
    if (std::fread(&v, 8, 1, f) != 1) throw std::runtime_error("cache: short read");
    return v;
  };
  try {
    if (rd_i64() != 0x414e484742535043LL) {
      std::fclose(f);
      return false;
    }
    spec.config.d = static_cast<int>(rd_i64());
    spec.config.s = rd_f64();
    spec.config.r_max = rd_f64();
    spec.config.n_grid = static_cast<int>(rd_i64());
    spec.config.n_eigs = static_cast<int>(rd_i64());
    spec.h = rd_f64();
    spec.truncation_safe = rd_i64() != 0;
    std::int64_t n_funs = rd_i64();
    spec.grid.resize(spec.config.n_grid);
    spec.lambda_sq.resize(spec.config.n_eigs);
    if (std::fread(spec.grid.data(), 8, spec.grid.size(), f) != spec.grid.size())
      throw std::runtime_error("cache: short read");
    if (std::fread(spec.lambda_sq.data(), 8, spec.lambda_sq.size(), f) != spec.lambda_sq.size())
      throw std::runtime_error("cache: short read");
    spec.eigfun.assign(n_funs, std::vector<double>(spec.config.n_grid));
    for (auto& g : spec.eigfun)
      if (std::fread(g.data(), 8, g.size(), f) != g.size())
        throw std::runtime_error("cache: short read");
  } catch (const std::exception&) {
    std::fclose(f);
    return false;
  }
  std::fclose(f);
  return true;
}

}  // namespace anhgibbs
