// Acceptance suite: one pass/fail line per criterion. Each criterion bundles
// the oracle comparisons, exponent fits, and Monte Carlo property checks for
// one slice of the library; diagnostics are printed only on failure.

#include <lapacke.h>

#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "anhgibbs/besselheat.hpp"
#include "anhgibbs/fractional.hpp"
#include "anhgibbs/gaussfield.hpp"
#include "anhgibbs/gibbsmc.hpp"
#include "anhgibbs/harness.hpp"
#include "anhgibbs/semiclassical.hpp"
#include "anhgibbs/specdiag.hpp"
#include "anhgibbs/variational.hpp"

using namespace anhgibbs;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream notes;
  bool req(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes << "      failed: " << what << "\n";
    }
    return cond;
  }
  bool within(double v, double target, double rel, const std::string& what) {
    bool c = std::isfinite(v) && std::abs(v - target) <= rel * std::abs(target);
    if (!c) {
      ok = false;
      notes << "      failed: " << what << " (got " << v << ", want " << target << " +-"
            << rel * 100.0 << "%)\n";
    }
    return c;
  }
};

// tridiagonal resolvent diagonal by an independent LAPACK solve
std::vector<double> resolvent_diagonal(const TridiagonalOperator& op,
                                       const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  int n = static_cast<int>(op.diag.size());
  for (std::size_t i : idx) {
    std::vector<double> d(op.diag), e(op.offdiag);
    std::vector<double> rhs(n, 0.0);
    rhs[i] = 1.0 / op.h;
    if (LAPACKE_dptsv(LAPACK_COL_MAJOR, n, 1, d.data(), e.data(), rhs.data(), n) != 0)
      throw std::runtime_error("resolvent solve failed");
    out.push_back(rhs[i]);
  }
  return out;
}

// -----------------------------------------------------------------------------

bool c01_exact_spectra(Check& c) {
  for (auto [cfg, gap, off] : {std::tuple{TrapConfig{1, 2.0, 30.0, 24576, 101}, 2.0, 1.0},
                               std::tuple{TrapConfig{3, 2.0, 0.0, 24576, 101}, 4.0, 3.0}}) {
    WallTimer tm;
    auto spec = get_spectrum(cfg, true);
    double worst = 0.0;
    for (int n = 0; n <= 100; ++n) {
      double exact = gap * n + off;
      worst = std::max(worst, std::abs(spec->lambda_sq[n] - exact) / exact);
    }
    c.req(worst <= 1e-4, "harmonic oracle d=" + std::to_string(cfg.d) +
                             " worst rel err " + std::to_string(worst));
    c.req(tm.seconds() <= 10.0, "eigensolve exceeded 10 s");
  }
  return c.ok;
}

bool c02_weyl(Check& c) {
  for (auto cfg : {TrapConfig{1, 2.0, 0.0, 16384, 512}, TrapConfig{1, 4.0, 0.0, 16384, 512},
                   TrapConfig{2, 1.5, 0.0, 16384, 400}, TrapConfig{3, 3.0, 0.0, 16384, 400}}) {
    auto spec = get_spectrum(cfg, true);
    double hi = std::min(spec->validity_ceiling(), spec->lambda_sq.back());
    auto wf = weyl_fit(*spec, hi * std::pow(10.0, -1.7), hi);
    double want = 0.5 + 1.0 / cfg.s;
    c.within(wf.exponent, want, 0.05,
             "Weyl exponent d=" + std::to_string(cfg.d) + " s=" + std::to_string(cfg.s));
  }
  auto s12 = get_spectrum(TrapConfig{1, 2.0, 0.0, 16384, 512}, true);
  c.within(weyl_fit(*s12, 20.0, 900.0).prefactor, 0.5, 0.05, "d=1 s=2 Weyl prefactor");
  return c.ok;
}

bool c03_trace_regimes(Check& c) {
  auto s12 = get_spectrum(TrapConfig{1, 2.0, 0.0, 16384, 512}, true);
  // convergent branch: N-doubling change below 1e-6 for p = 4 > 1/2 + 1/s
  double a4 = truncated_trace(*s12, 4.0, 256).value;
  double b4 = truncated_trace(*s12, 4.0, 512).value;
  c.req(truncated_trace(*s12, 4.0, 512).report.regime == TraceRegime::convergent,
        "p=4 classified convergent");
  c.req(std::abs(b4 - a4) < 1e-6 * a4, "convergent doubling change < 1e-6");
  // log-critical branch at p = 1/2 + 1/s = 1
  auto tt = truncated_trace(*s12, 1.0, 512);
  c.req(tt.report.regime == TraceRegime::log_critical, "p=1 classified log-critical");
  c.req(tt.report.fit_r2 > 0.99, "(log lambda_N)^2 fit R^2 > 0.99");
  // polynomial branch: p = 1, s = 1.5 grows like lambda_N^{1/3}
  auto s15 = get_spectrum(TrapConfig{1, 1.5, 0.0, 16384, 1024}, true);
  auto tp = truncated_trace(*s15, 1.0, 1024);
  c.req(tp.report.regime == TraceRegime::polynomial, "p=1 s=1.5 classified polynomial");
  c.within(tp.report.fitted_exponent, 1.0 / 3.0, 0.10, "polynomial growth exponent");
  // tail decay exponent -2p + 1 + 2/s = -2 at p = 2, s = 2
  std::vector<double> lams, tails;
  for (int N : {64, 128, 256}) {
    lams.push_back(std::sqrt(s12->lambda_sq[N]));
    tails.push_back(tail_trace(*s12, 2.0, N));
  }
  c.within(fit_loglog(lams, tails).slope, -2.0, 0.10, "tail trace exponent");
  return c.ok;
}

bool c04_heat_kernel(Check& c) {
  // d = 3 method-of-images closed form
  double worst = 0.0;
  for (double t : {0.05, 0.4, 2.0})
    for (double r : {0.3, 0.9, 2.0, 4.5, 7.0})
      for (double tau : {0.2, 0.8, 1.7, 3.5, 6.0}) {
        double g = heat_kernel({t, r, tau, 3});
        double images = std::pow(4.0 * kPi * t, -0.5) *
                        (std::exp(-(r - tau) * (r - tau) / (4.0 * t)) -
                         std::exp(-(r + tau) * (r + tau) / (4.0 * t)));
        worst = std::max(worst, std::abs(g - images) / images);
      }
  c.req(worst <= 1e-10, "images identity rel err " + std::to_string(worst));
  // semigroup property
  for (int d : {2, 3})
    for (auto [t, sfrac, r, tau] : std::vector<std::array<double, 4>>{
             {0.3, 0.5, 1.0, 2.0}, {0.8, 0.25, 0.5, 0.7}, {0.2, 0.6, 3.0, 1.5}}) {
      double t1 = t * sfrac, t2 = t * (1.0 - sfrac);
      double conv = integrate_to_infinity(
          [&, d = d](double sigma) {
            if (sigma <= 0.0) return 0.0;
            return heat_kernel({t1, r, sigma, d}) * heat_kernel({t2, sigma, tau, d});
          },
          0.0, 1e-10);
      double direct = heat_kernel({t, r, tau, d});
      c.req(std::abs(conv - direct) <= 1e-6 * direct,
            "semigroup property d=" + std::to_string(d));
    }
  // Golden-Thompson ratio bounded over t in [0.05, 5] for three (d, s) pairs
  std::vector<double> tg;
  for (double t = 0.05; t <= 5.0; t *= 1.35) tg.push_back(t);
  for (auto cfg : {TrapConfig{3, 2.0, 0.0, 8192, 160}, TrapConfig{2, 1.5, 0.0, 16384, 400},
                   TrapConfig{1, 2.0, 0.0, 16384, 512}}) {
    auto spec = get_spectrum(cfg, true);
    auto rep = golden_thompson_check(*spec, tg);
    bool bounded = true;
    for (std::size_t i = 0; i < tg.size(); ++i)
      bounded = bounded && rep.truncation_ok[i] && rep.ratio[i] > 0.0 && rep.ratio[i] < 3.0;
    c.req(bounded, "Golden-Thompson ratio bounded, d=" + std::to_string(cfg.d) +
                       " s=" + std::to_string(cfg.s));
  }
  return c.ok;
}

bool c05_green(Check& c) {
  // eigen-sum vs independent linear-solve oracle at 10 interior radii
  TrapConfig cfg{1, 2.0, 12.0, 1024, 1023};
  auto op = assemble_operator(cfg);
  auto spec = solve_trap(cfg);
  std::vector<std::size_t> idx;
  for (int k = 1; k <= 10; ++k) idx.push_back(k * 1024 / 11);
  auto oracle = resolvent_diagonal(op, idx);
  double worst = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    double g = green_diagonal_g(spec, idx[j], 1023, false);
    worst = std::max(worst, std::abs(g - oracle[j]) / std::abs(oracle[j]));
  }
  c.req(worst <= 1e-4, "resolvent oracle worst rel err " + std::to_string(worst));
  // L^p window behavior, d = 3, s = 2: window (2/s, d/(d-2)) = (1, 3)
  auto d3 = get_spectrum(TrapConfig{3, 2.0, 0.0, 8192, 256}, true);
  for (double p : {1.5, 2.0, 2.5}) {
    double v = green_lp_norm(*d3, p, 256);
    double vh = green_lp_norm(*d3, p, 128);
    c.req(std::isfinite(v) && v > 0.0 && std::abs(v - vh) / v < 0.02,
          "L^p norm finite/stable at p=" + std::to_string(p));
  }
  bool rejected = false;
  try {
    green_lp_norm(*d3, 1.0);  // p = 2/s exactly
  } catch (const std::exception&) {
    rejected = true;
  }
  c.req(rejected, "rejection at p = 2/s");
  // origin decay sup finite for beta in {0.5, 0.9}
  for (double beta : {0.5, 0.9}) {
    double v = origin_decay_check(*d3, beta);
    c.req(std::isfinite(v) && v > 0.0, "origin decay sup finite, beta=" + std::to_string(beta));
  }
  return c.ok;
}

bool c06_gaussfield(Check& c) {
  // sigma_N mass growth exponent 2/s - 1 = 1/3 at s = 1.5; the constant-order
  // correction decays slowly, so the fit needs a deep spectrum
  auto s15 = get_spectrum(TrapConfig{1, 1.5, 0.0, 131072, 6500}, true);
  std::vector<double> lams, diffs;
  for (int N : {256, 512, 1024, 2048, 3200}) {
    lams.push_back(std::sqrt(s15->lambda_sq[N]));
    diffs.push_back(sigma_mass(*s15, 2 * N) - sigma_mass(*s15, N));
  }
  c.within(fit_loglog(lams, diffs).slope, 1.0 / 3.0, 0.10, "sigma_N mass growth exponent");
  // Wick mass: mean 0 and variance 4 sum lambda_n^{-4} within 3 stderr at 1e5
  auto s12 = get_spectrum(TrapConfig{1, 2.0, 0.0, 2048, 64}, true);
  const int N = 63, n_samples = 100000;
  std::vector<double> m(n_samples), m2(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    FieldSample fs;
    fs.spec = s12.get();
    fs.N = N;
    fs.g = sample_coefficients(N + 1, 5, k);
    m[k] = wick_mass(fs).value;
    m2[k] = m[k] * m[k];
  }
  auto mm = mean_stderr(m);
  auto vv = mean_stderr(m2);
  c.req(std::abs(mm.mean) < 3.0 * mm.stderr_, "Wick mass mean 0 within 3 stderr");
  c.req(std::abs(vv.mean - wick_variance(*s12, N)) < 3.0 * vv.stderr_,
        "Wick mass variance within 3 stderr");
  // Cauchy rate of the Wick-mass increments: -3/2 + 1/s within 15%
  auto s15d1 = get_spectrum(TrapConfig{1, 1.5, 0.0, 8192, 1024}, true);
  double ce = wick_cauchy_exponent(*s15d1, {64, 128, 256, 500});
  c.within(ce, -1.5 + 2.0 / 3.0, 0.15, "Wick Cauchy rate exponent");
  return c.ok;
}

bool c07_partition(Check& c) {
  const int S = 100000;
  auto spec = get_spectrum(TrapConfig{1, 1.5, 0.0, 4096, 300});
  // subcritical p = 4 < p_crit = 5: bounded, consecutive N within 3 stderr
  {
    GibbsParams par{1, 1.5, 4.0, 1.0, 1.0, 64, S};
    auto rep = divergence_scan(*spec, par, {64, 128, 256}, 99);
    c.req(rep.verdict == "bounded", "subcritical p=4 verdict bounded");
    for (const auto& pt : rep.points)
      c.req(!pt.est.heavy_tail_flag && pt.est.rel_stderr < 0.1 &&
                pt.est.max_single_sample_share < 0.1,
            "subcritical estimator healthy (no heavy tail, resolved mean)");
    // boundedness beyond noise: the log-growth per doubling does not increase
    // (3-stderr band on the paired relative increments)
    double g1 = std::log(rep.points[1].est.mean / rep.points[0].est.mean);
    double g2 = std::log(rep.points[2].est.mean / rep.points[1].est.mean);
    double se = 3.0 * (rep.points[0].est.rel_stderr + 2.0 * rep.points[1].est.rel_stderr +
                       rep.points[2].est.rel_stderr);
    c.req(g2 <= g1 + se, "subcritical log-growth per doubling non-increasing within 3 stderr");
  }
  // supercritical p = 6: monotone log-growth with heavy-tail onset
  {
    GibbsParams par{1, 1.5, 6.0, 1.0, 1.0, 64, S};
    auto rep = divergence_scan(*spec, par, {64, 128, 256}, 99);
    c.req(rep.verdict == "divergent", "supercritical p=6 verdict divergent");
    c.req(rep.growth_per_doubling > 0.0, "supercritical log-growth per doubling");
    c.req(rep.points.back().est.heavy_tail_flag, "supercritical heavy-tail onset");
  }
  // superharmonic analogue s = 4, p = 8 > p_crit = 6. The raw estimate is
  // carried by a single extreme sample (share ~ 1), so its sign of growth is
  // seed noise; the meaningful per-doubling growth statistic is the paired
  // per-sample log-weight increase under common random numbers.
  {
    auto spec4 = get_spectrum(TrapConfig{1, 4.0, 0.0, 4096, 300});
    GibbsParams par{1, 4.0, 8.0, 20.0, 4.0, 64, S};
    std::vector<std::vector<double>> lws;
    for (int N : {32, 64, 128, 256}) {
      par.N = N;
      lws.push_back(partition_log_weights(*spec4, par, 99));
      auto est = summarize_partition(lws.back());
      c.req(est.heavy_tail_flag, "superharmonic heavy-tail onset at N=" + std::to_string(N));
    }
    for (std::size_t i = 0; i + 1 < lws.size(); ++i) {
      std::vector<double> diffs;
      for (std::size_t k = 0; k < lws[i].size(); ++k)
        if (std::isfinite(lws[i][k]) && std::isfinite(lws[i + 1][k]))
          diffs.push_back(lws[i + 1][k] - lws[i][k]);
      auto ms = mean_stderr(diffs);
      c.req(diffs.size() >= 100 && ms.mean > 3.0 * ms.stderr_,
            "superharmonic paired log-weight growth beyond 3 stderr per doubling");
    }
  }
  // critical p = 5: coupling decides
  {
    auto probe = critical_alpha_probe(*spec, 1, 1.5, 1.0, {1e-3, 1e3}, {64, 128, 256}, S, 99);
    c.req(probe.verdicts.size() == 2 && probe.verdicts[0].verdict == "bounded",
          "critical p=5 bounded at alpha=1e-3");
    c.req(probe.verdicts.size() == 2 && probe.verdicts[1].verdict == "divergent",
          "critical p=5 divergent at alpha=1e3");
  }
  return c.ok;
}

bool c08_drift(Check& c) {
  double cc = 100.0;
  // subharmonic closed-form sweep over >= 4 lambda_M doublings
  {
    auto spec = get_spectrum(TrapConfig{1, 1.5, 0.0, 131072, 6500}, true);
    std::vector<int> Ms;
    double target = std::sqrt(spec->lambda_sq[8]);
    while (target <= std::sqrt(spec->lambda_sq.back())) {
      int best = -1;
      for (std::size_t n = 0; n < spec->lambda_sq.size(); ++n)
        if (std::sqrt(spec->lambda_sq[n]) <= target) best = static_cast<int>(n);
      Ms.push_back(best);
      target *= 2.0;
    }
    c.req(Ms.size() >= 5, "at least 4 lambda_M doublings available");
    std::vector<double> lam, nrz0, combo, nrz6;
    int N = static_cast<int>(spec->lambda_sq.size()) - 1;
    for (int M : Ms) {
      auto st = ou_statistics(*spec, M, N, cc);
      lam.push_back(st.lambda_M);
      nrz0.push_back(st.e_z2);
      combo.push_back(st.combo);
      nrz6.push_back(st.drift_energy);
    }
    c.within(growth_exponent(lam, nrz0), 1.0 / 3.0, 0.10, "E||Z_M||^2 exponent 2/s-1");
    c.within(growth_exponent(lam, combo), 1.0 / 3.0, 0.10, "mass-combination exponent 2/s-1");
    c.within(fit_loglog(lam, nrz6).slope, 4.0 / 3.0, 0.10, "drift energy exponent 2/s");
  }
  // superharmonic L^2 error exponent 2/s - 1 = -1/2 at s = 4
  {
    auto spec = get_spectrum(TrapConfig{1, 4.0, 0.0, 65536, 3000}, true);
    double tail = 2.0 * tail_trace(*spec, 1.0, static_cast<int>(spec->lambda_sq.size()));
    std::vector<double> lam, l21, de;
    for (int M : {16, 64, 256, 1024, 2800}) {
      lam.push_back(std::sqrt(spec->lambda_sq[M]));
      l21.push_back(ou_e_y_minus_z(*spec, M, cc, tail));
      de.push_back(ou_statistics(*spec, M, M, cc).drift_energy);
    }
    c.within(fit_loglog(lam, l21).slope, -0.5, 0.10, "E||Y(1)-Z_M||^2 exponent 2/s-1");
    // drift entropy (D term of the soliton experiment) ~ lambda_M^{2/s}
    c.within(growth_exponent(lam, de), 0.5, 0.10, "D-term exponent 2/s");
  }
  // Monte Carlo endpoint statistics agree with the closed forms within 3 stderr
  {
    auto spec = get_spectrum(TrapConfig{1, 1.5, 0.0, 32768, 700});
    int M = 24;
    double lamM = std::sqrt(spec->lambda_sq[M]);
    auto coef = profile_coefficients(*spec, lamM);
    int N = std::max(M, capture_truncation(*spec, coef, 0.9));
    auto st = ou_statistics(*spec, M, N, cc, &coef);
    int S = 600, J = 512;
    std::vector<double> ez(S), cb(S), wk(S), ov(S), de(S);
    for (int k = 0; k < S; ++k) {
      auto ep = detail::run_ou_endpoint(*spec, M, N, cc, J, 5, k);
      double e = 0.0, co = 0.0, w = 0.0;
      std::complex<double> fy{0.0, 0.0}, fz{0.0, 0.0};
      for (int n = 0; n <= N; ++n) {
        std::complex<double> z = n <= M ? ep.Y1[n] - ep.X1[n] : std::complex<double>{0.0, 0.0};
        std::complex<double> u = n <= M ? ep.X1[n] : ep.Y1[n];
        e += std::norm(z);
        co += 2.0 * (ep.Y1[n] * std::conj(z)).real() - std::norm(z);
        double mv = n <= M ? ou_x_variance(*spec, n, M, cc) : 2.0 / spec->lambda_sq[n];
        w += std::norm(u) - mv;
        fy += coef[n] * ep.Y1[n];
        fz += coef[n] * z;
      }
      ez[k] = e;
      cb[k] = co;
      wk[k] = w * w;
      ov[k] = std::norm(fy) + std::norm(fz);
      double dd = 0.0;
      for (int n = 0; n <= M; ++n) dd += lamM * ep.x_int[n];
      de[k] = dd;
    }
    auto within3 = [&c](const std::vector<double>& v, double cf, const std::string& what) {
      auto m = mean_stderr(v);
      c.req(std::abs(m.mean - cf) <= 3.0 * m.stderr_, what + " within 3 stderr");
    };
    within3(ez, st.e_z2, "MC E||Z_M||^2");
    within3(cb, st.combo, "MC mass combination");
    within3(wk, st.wick_var, "MC Wick variance");
    within3(ov, st.overlap, "MC profile overlap");
    within3(de, st.drift_energy, "MC drift energy");
  }
  // subharmonic trial drift: cutoff kept, objective strictly decreasing, unbounded
  {
    auto spec = get_spectrum(TrapConfig{1, 1.5, 0.0, 32768, 700});
    auto rows = divergence_experiment_sub(*spec, 6.0, 2e4, 1.0, {8, 16, 32, 64, 128}, cc,
                                          256, 300, 11);
    for (const auto& r : rows) c.req(r.cutoff_prob >= 0.5, "cutoff probability >= 1/2");
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      c.req(rows[i + 1].total.mean < rows[i].total.mean, "objective strictly decreasing");
    c.req(rows.back().total.mean < 0.0 &&
              rows.back().total.mean < 10.0 * rows.front().total.mean,
          "objective unbounded below across the sweep");
  }
  // superharmonic soliton drift: A and D exponents, total -> -infinity
  {
    auto spec = get_spectrum(TrapConfig{1, 4.0, 0.0, 16384, 300});
    auto q18 = ground_state(1, 8.0);
    std::vector<double> rhos = {0.25, 0.125, 0.0625, 0.03125};
    auto rows =
        divergence_experiment_super(*spec, q18, 8.0, 8.0, 4.0, 1.0, rhos, cc, 256, 200, 13);
    std::vector<double> negA;
    for (const auto& r : rows) {
      c.req(r.A < 0.0, "Hamiltonian term negative");
      negA.push_back(-r.A);
    }
    // A = H(W_rho) ~ -rho^{-dp/2+d} = -rho^{-3} at d = 1, p = 8
    c.within(fit_loglog(rhos, negA).slope, -3.0, 0.10, "A-term exponent -dp/2+d");
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      c.req(rows[i + 1].total < rows[i].total, "super objective strictly decreasing");
    c.req(rows.back().total < 0.0, "super objective negative at the finest rho");
  }
  return c.ok;
}

bool c09_profiles(Check& c) {
  // normalized blow-up profiles and the fM growth exponent dp/2 - d = 2
  std::vector<double> Ms = {4.0, 8.0, 16.0, 32.0}, lp;
  for (double M : Ms) {
    auto rep = blowup_profile_fM(M, 6.0);
    c.req(std::abs(rep.l2_mass - 1.0) <= 1e-6, "||f_M||_2 = 1 to 1e-6");
    lp.push_back(rep.lp_p);
  }
  c.within(fit_loglog(Ms, lp).slope, 2.0, 0.10, "||f_M||_p^p growth exponent");
  // ground state mass and the sharp interpolation constant
  auto q16 = ground_state(1, 6.0);
  c.within(q16.mass, std::sqrt(3.0) * kPi / 2.0, 1e-3, "d=1 p=6 ground-state mass");
  c.within(gns_constant(q16), 4.0 / (kPi * kPi), 1e-3, "interpolation constant at Q");
  // W_rho Hamiltonian and trap-energy exponents
  std::vector<double> rhos = {0.5, 0.25, 0.125, 0.0625}, negH, trap;
  for (double rho : rhos) {
    auto w = blowup_profile_Wrho(q16, rho, 1.0, 2.0, 1.5);
    c.req(w.mass_deficit <= 1e-6, "||W_rho||^2 preserved");
    c.req(w.hamiltonian < 0.0, "H(W_rho) < 0");
    negH.push_back(-w.hamiltonian);
    trap.push_back(w.trap_energy);
  }
  c.within(fit_loglog(rhos, negH).slope, -2.0, 0.05, "H(W_rho) exponent -dp/2+d");
  c.within(fit_loglog(rhos, trap).slope, 1.5, 0.05, "trap-energy exponent s");
  return c.ok;
}

bool c10_semiclassical(Check& c) {
  c.within(phase_space_volume({2.0, 0.0, 1.0}), kPi, 1e-8, "phase-space volume at s=2, K=0");
  c.within(classical_energy({2.0, 0.0, 1.0}), -0.25, 1e-8, "classical energy -1/4");
  // Husimi identities on the low-rank surrogate
  auto spec6 = get_spectrum(TrapConfig{1, 2.0, 0.0, 512, 6});
  auto r1 = husimi_identity_check(*spec6, {1.0}, 0.5);
  c.within(r1.husimi_trace, 1.0, 1e-3, "rank-1 Husimi trace identity");
  c.req(r1.m_min >= 0.0 && r1.m_max <= 1.0, "rank-1 symbol bounds 0 <= m <= 1");
  auto r5 = husimi_identity_check(*spec6, {1.0, 0.8, 0.6, 0.4, 0.2}, 0.5);
  c.within(r5.husimi_trace, 3.0, 1e-3, "rank-5 Husimi trace identity");
  c.req(r5.m_min >= 0.0 && r5.m_max <= 1.0, "rank-5 symbol bounds 0 <= m <= 1");
  // hbar N(Lambda) -> 1/2 for d = 1, s = 2
  auto spec = get_spectrum(TrapConfig{1, 2.0, 0.0, 24576, 600}, true);
  std::vector<double> Ls;
  for (int n : {64, 128, 256, 512}) Ls.push_back(spec->lambda_sq[n] + 1e-9);
  for (const auto& row : hbar_trace_compare(*spec, Ls))
    c.within(row.hbar_count, 0.5, 0.03, "hbar-count constant 1/2");
  return c.ok;
}

bool c11_fractional(Check& c) {
  // alpha = 1 cross-module agreement with the finite-difference solver
  auto decA = solve_fractional({1.0, 2.0, 25.0, 1024, 70});
  auto trap = get_spectrum(TrapConfig{1, 2.0, 0.0, 24576, 600}, true);
  double worst = 0.0;
  for (int n = 0; n <= 50; ++n)
    worst = std::max(worst,
                     std::abs(decA.lambda_sq[n] - trap->lambda_sq[n]) / trap->lambda_sq[n]);
  c.req(worst <= 1e-3, "alpha=1 cross-module spectra, worst rel err " + std::to_string(worst));
  // Weyl exponent 1/(2 alpha) + 1/s on three (alpha, s) pairs
  auto dW1 = solve_fractional({1.0, 2.0, 60.0, 2048, 100}, true);
  c.within(frac_weyl_check(dW1).exponent, 1.0, 0.07, "fractional Weyl (1, 2)");
  auto dW2 = solve_fractional({2.0, 2.0, 60.0, 2048, 100}, true);
  c.within(frac_weyl_check(dW2).exponent, 0.75, 0.07, "fractional Weyl (2, 2)");
  auto dW3 = solve_fractional({0.75, 4.0, 8.0, 2048, 100}, true);
  c.within(frac_weyl_check(dW3).exponent, 2.0 / 3.0 + 0.25, 0.07, "fractional Weyl (0.75, 4)");
  // trace threshold gamma* = 1 on the (1, 2) cell: all three branches
  auto rp = frac_trace_check(dW1, 0.6);
  c.req(rp.regime == TraceRegime::polynomial, "gamma < gamma* classified polynomial");
  c.within(rp.fitted_exponent, 0.8, 0.10, "polynomial trace exponent");
  auto rl = frac_trace_check(dW1, 1.0);
  c.req(rl.regime == TraceRegime::log_critical && rl.fit_r2 > 0.99,
        "gamma = gamma* log-critical with R^2 > 0.99");
  auto rc = frac_trace_check(dW1, 2.0);
  c.req(rc.regime == TraceRegime::convergent && rc.doubling_change < 1e-3,
        "gamma > gamma* convergent with stable doublings");
  // Green diagonal window verdicts from the admissibility formula
  for (double p : {1.5, 2.0, 4.0}) {
    auto g = frac_green_lp(decA, p);
    c.req(g.admissible && std::isfinite(g.norm) && g.doubling_change <= 0.08,
          "alpha=1 s=2 Green admissible/finite at p=" + std::to_string(p));
  }
  auto decB = solve_fractional({0.6, 1.5, 20.0, 1024, 40});
  auto g3 = frac_green_lp(decB, 3.0);
  c.req(std::abs(g3.window_edge - 4.0) <= 1e-9 && !g3.admissible,
        "alpha=0.6 s=1.5 window edge 4, p=3 inadmissible");
  auto g45 = frac_green_lp(decB, 4.5);
  c.req(g45.admissible && std::isfinite(g45.norm), "p=4.5 admissible and finite");
  return c.ok;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    bool (*fn)(Check&);
  };
  const Entry entries[] = {
      {1, "exact harmonic spectra", c01_exact_spectra},
      {2, "Weyl counting exponents and prefactor", c02_weyl},
      {3, "truncated-trace regimes and tail decay", c03_trace_regimes},
      {4, "heat kernel identities and Golden-Thompson", c04_heat_kernel},
      {5, "Green diagonal oracle and L^p window", c05_green},
      {6, "Gaussian field covariance, Wick mass, Cauchy rate", c06_gaussfield},
      {7, "partition-function dichotomy", c07_partition},
      {8, "OU/drift scalings and divergence experiments", c08_drift},
      {9, "blow-up profiles and ground state", c09_profiles},
      {10, "semiclassical phase-space checks", c10_semiclassical},
      {11, "fractional operator diagnostics", c11_fractional},
  };
  int failures = 0;
  for (const auto& e : entries) {
    Check c;
    WallTimer tm;
    bool ok = false;
    std::string err;
    try {
      ok = e.fn(c);
    } catch (const std::exception& ex) {
      ok = false;
      err = ex.what();
    }
    std::printf("[%2d] %-52s %s  (%6.1f s)\n", e.id, e.name, ok ? "PASS" : "FAIL",
                tm.seconds());
    if (!ok) {
      ++failures;
      std::fputs(c.notes.str().c_str(), stdout);
      if (!err.empty()) std::printf("      exception: %s\n", err.c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%d/11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
