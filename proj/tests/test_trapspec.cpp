#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "anhgibbs/harness.hpp"
#include "anhgibbs/trapspec.hpp"

using namespace anhgibbs;

TEST_CASE("assemble: stencil and potential entries") {
  SUBCASE("d=3, s=2: inverse-square coefficient vanishes") {
    TrapConfig c{3, 2.0, 20.0, 64, 8};
    auto op = assemble_operator(c);
    double inv_h2 = 1.0 / (op.h * op.h);
    for (int i = 0; i < 64; ++i) {
      double r = op.grid[i];
      CHECK(op.diag[i] == doctest::Approx(2.0 * inv_h2 + r * r).epsilon(1e-14));
    }
  }
  SUBCASE("d=2: inverse-square coefficient is -1/4 at every node") {
    TrapConfig c{2, 2.0, 20.0, 64, 8};
    auto op = assemble_operator(c);
    double inv_h2 = 1.0 / (op.h * op.h);
    for (int i = 0; i < 64; ++i) {
      double r = op.grid[i];
      double isq = op.diag[i] - 2.0 * inv_h2 - r * r;
      CHECK(isq == doctest::Approx(-0.25 / (r * r)).epsilon(1e-12));
    }
  }
  SUBCASE("d=1, s=4: symmetric tridiagonal with off-diagonals -1/h^2") {
    TrapConfig c{1, 4.0, 10.0, 16, 4};
    auto op = assemble_operator(c);
    CHECK(op.diag.size() == 16);
    CHECK(op.offdiag.size() == 15);
    double inv_h2 = 1.0 / (op.h * op.h);
    for (double v : op.offdiag) CHECK(v == doctest::Approx(-inv_h2).epsilon(1e-15));
    // full-line grid is symmetric about 0
    CHECK(op.grid.front() == doctest::Approx(-op.grid.back()).epsilon(1e-14));
  }
  SUBCASE("rejections") {
    CHECK_THROWS(assemble_operator(TrapConfig{1, -1.0, 10.0, 64, 8}));
    CHECK_THROWS(assemble_operator(TrapConfig{1, 0.0, 10.0, 64, 8}));
    CHECK_THROWS(assemble_operator(TrapConfig{1, 2.0, 10.0, 8, 4}));
    CHECK_THROWS(assemble_operator(TrapConfig{1, 2.0, 10.0, 64, 64}));
  }
}

TEST_CASE("eigensolve: harmonic spectra against analytic oracles") {
  SUBCASE("d=1, s=2: lambda_n^2 = 2n+1 within 1e-4 relative for n <= 100") {
    auto spec = get_spectrum(TrapConfig{1, 2.0, 30.0, 24576, 101});
    for (int n = 0; n <= 100; ++n) {
      double exact = 2.0 * n + 1.0;
      CHECK(std::abs(spec->lambda_sq[n] - exact) / exact < 1e-4);
    }
    CHECK(spec->truncation_safe);
  }
  SUBCASE("d=3, s=2: odd Hermite levels 4n+3 within 1e-4 relative") {
    auto spec = get_spectrum(TrapConfig{3, 2.0, 0.0, 24576, 101});
    for (int n = 0; n <= 100; ++n) {
      double exact = 4.0 * n + 3.0;
      CHECK(std::abs(spec->lambda_sq[n] - exact) / exact < 1e-4);
    }
    CHECK(spec->truncation_safe);
  }
}

TEST_CASE("eigensolve: orthonormality, sign convention, monotone spectrum") {
  auto spec = get_spectrum(TrapConfig{1, 1.5, 0.0, 4096, 64});
  SUBCASE("<g_m, g_n> = delta_mn within 1e-8 under grid quadrature") {
    for (int a : {0, 1, 5, 20, 63})
      for (int b : {0, 1, 5, 20, 63}) {
        double ip = 0.0;
        for (std::size_t i = 0; i < spec->grid.size(); ++i)
          ip += spec->eigfun[a][i] * spec->eigfun[b][i];
        ip *= spec->h;
        CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) <= 1e-8);
      }
  }
  SUBCASE("lambda_0^2 > 0 and strictly increasing spectrum") {
    CHECK(spec->lambda_sq[0] > 0.0);
    for (std::size_t n = 1; n < spec->lambda_sq.size(); ++n)
      CHECK(spec->lambda_sq[n] > spec->lambda_sq[n - 1] + 1e-10);
  }
  SUBCASE("sign convention: first non-negligible value positive") {
    for (const auto& g : spec->eigfun) {
      double mx = 0.0;
      for (double v : g) mx = std::max(mx, std::abs(v));
      for (double v : g) {
        if (std::abs(v) > 1e-12 * mx) {
          CHECK(v > 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("to_radial_eigenfunction") {
  auto spec = get_spectrum(TrapConfig{3, 2.0, 0.0, 8192, 32});
  auto w = radial_weights(*spec);
  SUBCASE("unit L^2(R^d) norm within 1e-6 for all computed n") {
    for (int n = 0; n < 32; ++n) {
      auto e = to_radial_eigenfunction(*spec, n);
      double m = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) m += e[i] * e[i] * w[i];
      CHECK(m == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("d=3 ground mode is the 3D Gaussian: e_0(r) proportional to exp(-r^2/2)") {
    auto e0 = to_radial_eigenfunction(*spec, 0);
    std::size_t i_ref = spec->grid.size() / 8;  // well inside the bulk
    double ratio_ref = e0[i_ref] / std::exp(-0.5 * spec->grid[i_ref] * spec->grid[i_ref]);
    for (std::size_t i = i_ref / 4; i < 2 * i_ref; i += i_ref / 8) {
      double ratio = e0[i] / std::exp(-0.5 * spec->grid[i] * spec->grid[i]);
      CHECK(ratio == doctest::Approx(ratio_ref).epsilon(1e-4));
    }
  }
  SUBCASE("d=2 formula instantiation") {
    auto s2 = get_spectrum(TrapConfig{2, 2.0, 0.0, 2048, 8});
    auto e = to_radial_eigenfunction(*s2, 3);
    for (std::size_t i = 100; i < e.size(); i += 300) {
      double expect = std::pow(2.0 * kPi, -0.5) * std::pow(s2->grid[i], -0.5) * s2->eigfun[3][i];
      CHECK(e[i] == doctest::Approx(expect).epsilon(1e-13));
    }
  }
  SUBCASE("d=1 rejected") {
    auto s1 = get_spectrum(TrapConfig{1, 2.0, 0.0, 2048, 4});
    CHECK_THROWS(to_radial_eigenfunction(*s1, 0));
  }
}

TEST_CASE("residual_check") {
  SUBCASE("computed eigenpairs: residual at round-off") {
    auto spec = get_spectrum(TrapConfig{1, 2.0, 0.0, 2048, 32});
    CHECK(residual_check(*spec) < 1e-10);
  }
  SUBCASE("d=1 s=2 defaults: residual <= 1e-8 for n <= 100") {
    auto spec = get_spectrum(TrapConfig{1, 2.0, 30.0, 24576, 101});
    CHECK(residual_check(*spec) <= 1e-8);
  }
  SUBCASE("halving h reduces analytic-spectrum error by about 4x") {
    auto coarse = get_spectrum(TrapConfig{1, 2.0, 30.0, 4096, 51});
    auto fine = get_spectrum(TrapConfig{1, 2.0, 30.0, 8192, 51});
    double ec = std::abs(coarse->lambda_sq[50] - 101.0);
    double ef = std::abs(fine->lambda_sq[50] - 101.0);
    double ratio = ec / ef;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
  }
}

TEST_CASE("Hardy positivity in d=2: quadratic form positive on random test functions") {
  TrapConfig c{2, 2.0, 20.0, 2048, 4};
  auto op = assemble_operator(c);
  GaussianStream gs(7, 0);
  SplitMix64 u(11);
  int n = static_cast<int>(op.diag.size());
  for (int trial = 0; trial < 200; ++trial) {
    // random smooth compactly supported bump: Gaussian envelope times noise mix
    int lo = 1 + static_cast<int>(u.uniform() * (n / 2));
    int width = 16 + static_cast<int>(u.uniform() * (n / 4));
    int hi = std::min(n - 2, lo + width);
    std::vector<double> g(n, 0.0);
    double a1 = gs.next(), a2 = gs.next(), a3 = gs.next();
    for (int i = lo; i <= hi; ++i) {
      double t = (i - lo) / double(hi - lo);  // in [0,1]
      double env = t * (1.0 - t);             // vanishes at support ends
      g[i] = env * (a1 + a2 * std::sin(3.0 * kPi * t) + a3 * std::cos(5.0 * kPi * t));
    }
    double q = 0.0, nrm = 0.0;
    for (int i = 0; i < n; ++i) {
      double v = op.diag[i] * g[i];
      if (i > 0) v += op.offdiag[i - 1] * g[i - 1];
      if (i + 1 < n) v += op.offdiag[i] * g[i + 1];
      q += g[i] * v;
      nrm += g[i] * g[i];
    }
    if (nrm == 0.0) continue;
    CHECK(q > 0.0);
  }
}

TEST_CASE("scaling law: N(L, Lambda) matches the semiclassically rescaled count") {
  // d=1, s=2, Lambda = lambda_500^2; hbar = Lambda^{-1/2-1/s}
  TrapConfig c{1, 2.0, 75.0, 32768, 501};
  auto op = assemble_operator(c);
  // 501st eigenvalue by Sturm bisection (count < x reaches 501)
  double lo = 0.0, hi = std::pow(c.r_max, c.s);
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (sturm_count(op, mid) >= 501)
      hi = mid;
    else
      lo = mid;
  }
  double Lambda = 0.5 * (lo + hi);
  CHECK(Lambda == doctest::Approx(1001.0).epsilon(2e-3));
  int n_direct = sturm_count(op, Lambda * (1.0 + 1e-12));
  CHECK(n_direct == 501);

  // rescaled operator -hbar^2 d^2/dy^2 + |y|^s on [-1.7, 1.7], count eigs <= 1;
  // equivalently -d^2/dy^2 + |y|^s/hbar^2 with threshold 1/hbar^2
  double hbar = std::pow(Lambda, -0.5 - 1.0 / c.s);
  TrapConfig rc{1, 2.0, 1.7, 32768, 4};
  auto rop = assemble_operator(rc);
  double inv_h2 = 1.0 / (rop.h * rop.h);
  for (std::size_t i = 0; i < rop.diag.size(); ++i) {
    double V = std::pow(std::abs(rop.grid[i]), c.s);
    rop.diag[i] = 2.0 * inv_h2 + V / (hbar * hbar);
  }
  int n_rescaled = sturm_count(rop, 1.0 / (hbar * hbar) * (1.0 + 1e-12));
  CHECK(std::abs(n_direct - n_rescaled) <= 2);
}

TEST_CASE("binary cache round-trip") {
  auto spec = solve_trap(TrapConfig{2, 1.5, 12.0, 256, 8});
  auto path = std::filesystem::temp_directory_path() / "anhgibbs-test-cache.spec";
  save_decomposition(spec, path.string());
  SpectralDecomposition back;
  REQUIRE(load_decomposition(path.string(), back));
  CHECK(back.config.d == 2);
  CHECK(back.config.s == 1.5);
  CHECK(back.h == spec.h);
  CHECK(back.truncation_safe == spec.truncation_safe);
  for (int n = 0; n < 8; ++n) {
    CHECK(back.lambda_sq[n] == spec.lambda_sq[n]);
    for (int i = 0; i < 256; ++i) CHECK(back.eigfun[n][i] == spec.eigfun[n][i]);
  }
  std::filesystem::remove(path);
}
