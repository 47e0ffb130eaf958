#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kslab/comparison.hpp"
#include "kslab/errors.hpp"
#include "kslab/mass_pde.hpp"
#include "kslab/radial.hpp"

using namespace kslab;

namespace {

MassProfile gaussian_mass(const ModelParams& p, const RadialGrid& g, double A) {
  const auto u = tabulate_density(g, [&](double r) { return A * std::exp(-r * r); });
  return mass_from_density(p, u);
}

double sup_scaled(const MassProfile& m, double power) {
  double s = 0.0;
  for (std::size_t i = 1; i < m.size(); ++i) s = std::max(s, std::pow(m.grid()[i], power) * m[i]);
  return s;
}

SampledFunction sampled(const std::vector<double>& x, auto&& f) {
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = f(x[i]);
  return SampledFunction(x, v);
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

}  // namespace

TEST(Barrier, Invariants) {
  const ModelParams p(3);
  EXPECT_NO_THROW(Barrier(p, 1.0, 0.5, 2.0));
  EXPECT_THROW(Barrier(p, 0.0, 0.5, 2.0), DomainError);
  EXPECT_THROW(Barrier(p, 1.0, 0.5, 1.5), DomainError);
  EXPECT_THROW(Barrier(p, 1.0, 0.5, 3.0), DomainError);
  EXPECT_THROW(Barrier(p, 1.0, 0.75, 2.0), DomainError);
  EXPECT_THROW(Barrier(p, 1.0, 0.0, 2.0), DomainError);
  const Barrier b(p, 1.0, 0.5, 2.0);
  EXPECT_GT(b.crossover_radius(), 0.0);
  EXPECT_TRUE(std::isfinite(b.crossover_radius()));
}

TEST(Barrier, Values) {
  const ModelParams p(3);
  const Barrier b(p, 1.0, 0.5, 2.0);
  EXPECT_EQ(barrier_value(b, 0.0), 0.0);
  EXPECT_NEAR(barrier_value(b, 4.0), 8.0, 1e-12);
  EXPECT_THROW(barrier_value(b, -1.0), DomainError);

  // K r^{3/2} = sigma r at r_* = (sigma / K)^2.
  const double rs = b.crossover_radius();
  EXPECT_NEAR(rs, std::pow(p.sigma(), 2.0), 1e-9 * rs);
  EXPECT_NEAR(barrier_value(b, rs), std::pow(rs, 1.5), 1e-9 * std::pow(rs, 1.5));
  EXPECT_NEAR(barrier_value(b, rs), p.sigma() * rs, 1e-9 * p.sigma() * rs);
}

TEST(Barrier, ContinuousNondecreasingSingleSwitch) {
  for (int d : {3, 4, 7}) {
    const ModelParams p(d);
    const double pp = 0.7 * d;
    const Barrier b(p, 2.5, 0.5 * d / (2.0 * pp), pp);
    const double rs = b.crossover_radius();
    int switches = 0;
    bool power_branch = true;
    double prev = 0.0;
    for (int k = 1; k <= 4000; ++k) {
      const double r = rs * std::pow(10.0, -4.0 + 8.0 * k / 4000.0);
      const double v = barrier_value(b, r);
      EXPECT_GE(v, prev);
      const bool now = b.K() * std::pow(r, d - d / pp) <= 2.0 * b.eps() * p.sigma() * std::pow(r, d - 2.0);
      if (now != power_branch) {
        ++switches;
        EXPECT_NEAR(r / rs, 1.0, 0.01);
      }
      power_branch = now;
      prev = v;
    }
    EXPECT_EQ(switches, 1) << d;
    EXPECT_NEAR(barrier_value(b, rs * (1 + 1e-9)), barrier_value(b, rs * (1 - 1e-9)), 1e-6 * barrier_value(b, rs));
  }
}

TEST(BarrierCheck, PassAndViolation) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(200, 10.0);
  const Barrier b(p, 1.0, 0.5, 2.0);
  const auto under = tabulate_mass(g, [&](double r) { return 0.5 * barrier_value(b, r); });
  EXPECT_FALSE(barrier_check(under, b));

  const auto mc = tabulate_mass(g, [&](double r) { return chandrasekhar_mass(p, r); });
  const Barrier b9(p, 1e3, 0.9, 1.6);
  const auto v = barrier_check(mc, b9);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->index, 1u);
  EXPECT_DOUBLE_EQ(v->r, g[1]);
  EXPECT_GE(v->mass, v->barrier);
}

TEST(BarrierCheck, RunsStartedUnderBarrierStayUnder) {
  for (int d : {3, 4, 5}) {
    const ModelParams p(d);
    for (double A : {0.5, 3.0}) {
      for (double eps_shift : {0.25, 0.6}) {
        SolverConfig cfg;
        cfg.grid.intervals = 512;
        cfg.grid.r_max = 20.0;
        cfg.cadence_steps = 10;
        const auto g = cfg.grid.build();
        const auto m0 = gaussian_mass(p, g, A);
        const double c0 = radial_concentration(p, m0) / (2.0 * p.sigma());
        ASSERT_LT(c0, 1.0);
        const double eps = c0 + (1.0 - c0) * eps_shift;
        const double pp = d / (1.0 + eps);
        const double K = 1.1 * sup_scaled(m0, d / pp - d);
        const Barrier b(p, K, eps, pp);
        ASSERT_FALSE(barrier_check(m0, b));
        const auto res = evolve(p, m0, cfg, 2.0);
        ASSERT_EQ(res.outcome.kind, OutcomeKind::ReachedHorizon);
        ASSERT_GT(res.trajectory.size(), 10u);
        for (const auto& m : res.trajectory) {
          const auto v = barrier_check(m, b);
          EXPECT_FALSE(v) << "d=" << d << " A=" << A << " t=" << m.time() << " r=" << v->r;
        }
      }
    }
  }
}

TEST(HalfLineHeat, ZeroDatum) {
  const auto zero = [](double) { return 0.0; };
  EXPECT_EQ(half_line_heat(zero, 1.0, 0.3).value, 0.0);
  const auto z = sampled(linspace(0.0, 5.0, 50), zero);
  EXPECT_EQ(half_line_heat(z, 1.0, 0.3).value, 0.0);
  EXPECT_THROW(half_line_heat(zero, 1.0, 0.0), DomainError);
  EXPECT_THROW(half_line_heat(z, -1.0, 1.0), DomainError);
}

TEST(HalfLineHeat, LinearDatumIsCaloric) {
  const auto id = [](double x) { return x; };
  for (double t : {0.01, 0.5, 3.0, 40.0}) {
    for (double r : {0.1, 1.0, 7.5, 30.0}) {
      const auto h = half_line_heat(id, r, t);
      EXPECT_NEAR(h.value, r, 1e-8) << r << " " << t;
      EXPECT_LT(h.error, 1e-8);
    }
  }
  // Sampled ramp, far from its flat end.
  const auto ramp = sampled(linspace(0.0, 400.0, 4001), id);
  for (double t : {0.5, 10.0}) {
    for (double r : {0.5, 5.0, 50.0}) EXPECT_NEAR(half_line_heat(ramp, r, t).value, r, 1e-8) << r << " " << t;
  }
}

TEST(HalfLineHeat, ClosedFormMatchesQuadrature) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(400, 20.0);
  const auto m0 = comparison_majorant(p, g, 3.0, 2.0, 50.0);
  const auto f = [&](double x) { return m0(x); };
  for (double t : {0.01, 0.3, 2.0, 25.0}) {
    for (double r : {0.05, 0.7, 3.0, 12.0, 19.9, 35.0}) {
      const auto closed = half_line_heat(m0, r, t);
      const auto quad = half_line_heat(f, r, t, m0.nodes());
      EXPECT_NEAR(closed.value, quad.value, 1e-9 * 50.0 + quad.error) << r << " " << t;
    }
  }
}

TEST(HalfLineHeat, ConstantDatumGivesErf) {
  const auto one = sampled(std::vector<double>{0.0, 1.0}, [](double) { return 2.0; });
  for (double t : {0.1, 1.0}) {
    for (double r : {0.2, 1.0, 4.0}) EXPECT_NEAR(half_line_heat(one, r, t).value, 2.0 * std::erf(r / std::sqrt(4.0 * t)), 1e-14);
  }
}

TEST(HalfLineHeat, NonnegativeVanishingAtOriginAndOrderPreserving) {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto x = linspace(0.0, 10.0, 81);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(x.size()), b(x.size());
    double ca = 0.0, cb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ca += unif(rng);
      cb += unif(rng);
      a[i] = ca;
      b[i] = ca + cb;
    }
    const SampledFunction fa(x, a), fb(x, b);
    for (double t : {0.05, 1.0, 10.0}) {
      EXPECT_EQ(half_line_heat(fa, 0.0, t).value, 0.0);
      for (double r : {0.1, 1.3, 4.0, 9.5, 15.0}) {
        const auto ha = half_line_heat(fa, r, t);
        const auto hb = half_line_heat(fb, r, t);
        EXPECT_GE(ha.value, -ha.error);
        EXPECT_LE(ha.value, hb.value + ha.error + hb.error) << trial << " " << r << " " << t;
      }
    }
  }
}

TEST(HalfLineHeat, MajorantConcentrationDecays) {
  const int d = 3;
  const ModelParams p(d);
  const double pp = 2.0, K = 2.0, M0 = 30.0;
  const auto g = RadialGrid::uniform(3000, 300.0);
  const auto m0 = comparison_majorant(p, g, K, pp, M0);
  const double R1 = 0.5, R2 = 40.0;
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {10.0, 40.0, 160.0, 640.0}) {
    double inner = 0.0, all = 0.0;
    for (double r = 0.01; r < 200.0; r *= 1.02) {
      const double z = std::pow(r, 2.0 - d) * half_line_heat(m0, r, t).value;
      all = std::max(all, z);
      if (r > R2) EXPECT_LE(z, M0 * std::pow(R2, 2.0 - d) * (1 + 1e-9));
      if (r >= R1 && r <= R2) inner = std::max(inner, z);
    }
    EXPECT_LE(inner, M0 * std::pow(R1, 2.0 - d) * 2.0 * R2 / std::sqrt(4.0 * std::numbers::pi * t)) << t;
    EXPECT_LT(all, prev) << t;
    prev = all;
  }
  EXPECT_LT(prev, 0.25 * radial_concentration(p, tabulate_mass(g, [&](double r) { return m0(r); })));
}

TEST(ComparisonCheck, ZeroSolution) {
  const ModelParams p(3);
  SolverConfig cfg;
  cfg.grid.intervals = 64;
  cfg.grid.r_max = 8.0;
  const auto g = cfg.grid.build();
  const auto res = evolve(p, MassProfile(g, std::vector<double>(g.size(), 0.0)), cfg, 0.5);
  const auto rep = comparison_check(res, comparison_majorant(p, g, 1.0, 2.0, 1.0));
  EXPECT_TRUE(rep.passed());
  EXPECT_GT(rep.checked, 0u);
}

TEST(ComparisonCheck, GlobalRunUnderMajorantAndShiftedViolation) {
  const int d = 3;
  const ModelParams p(d);
  SolverConfig cfg;
  cfg.grid.intervals = 1024;
  cfg.grid.r_max = 60.0;
  cfg.dt_max = 0.05;
  cfg.cadence_steps = 10;
  const auto g = cfg.grid.build();
  // eps * 2(d-2) / (r^2 + 1) capped to finite mass by a Gaussian tail.
  const auto u0 = tabulate_density(g, [&](double r) { return 0.6 * 2.0 * (d - 2) / (r * r + 1.0) * std::exp(-r * r / 50.0); });
  const auto m0 = mass_from_density(p, u0);
  const auto res = evolve(p, m0, cfg, 5.0);
  ASSERT_EQ(res.outcome.kind, OutcomeKind::ReachedHorizon);
  const double pp = 0.75 * d;
  const double K = sup_scaled(m0, d / pp - d);
  const auto major = comparison_majorant(p, g, K, pp, m0.total());
  for (std::size_t i = 0; i < g.size(); ++i) ASSERT_LE(m0[i], major(g[i]) * (1 + 1e-12));
  const auto rep = comparison_check(res, major, 1e-6);
  EXPECT_TRUE(rep.passed()) << rep.violations << " worst " << rep.worst_excess;
  EXPECT_GT(rep.checked, 10000u);

  const auto shrunk = comparison_majorant(p, g, 0.8 * K, pp, 0.8 * m0.total());
  const auto bad = comparison_check(res, shrunk, 1e-6);
  EXPECT_FALSE(bad.passed());
  ASSERT_TRUE(bad.first_violation);
  EXPECT_GT(bad.first_violation->mass, bad.first_violation->majorant);
}

TEST(DecaySlope, ExactPowerLaw) {
  std::vector<double> t, v;
  for (int k = 1; k <= 50; ++k) {
    t.push_back(k * 0.7);
    v.push_back(3.0 / (k * 0.7));
  }
  EXPECT_NEAR(decay_slope(t, v, 0.0, 100.0), -1.0, 1e-12);
  EXPECT_NEAR(decay_slope(t, v, 10.0, 20.0), -1.0, 1e-12);
  v[3] = 0.0;
  EXPECT_THROW(decay_slope(t, v, 0.0, 100.0), DomainError);
  EXPECT_THROW(decay_slope(t, v, 100.0, 200.0), DomainError);
}

TEST(DecaySlope, GlobalRunL2AndConcentration) {
  // d = 3, q = 2: slope -d/2 (1 - 1/q) = -0.75. Short horizon; the long run is in the acceptance suite.
  const ModelParams p(3);
  SolverConfig cfg;
  cfg.grid.intervals = 1024;
  cfg.grid.r_max = 60.0;
  cfg.dt_max = 0.05;
  cfg.cadence_steps = 0;
  cfg.sample_interval = 0.5;
  const auto g = cfg.grid.build();
  const auto res = evolve(p, gaussian_mass(p, g, 1.0), cfg, 30.0);
  ASSERT_EQ(res.outcome.kind, OutcomeKind::ReachedHorizon);
  std::vector<double> t, l2, z;
  for (const auto& s : res.diagnostics) {
    t.push_back(s.t);
    l2.push_back(s.lq.at(0));
    z.push_back(s.concentration);
  }
  EXPECT_NEAR(decay_slope(t, l2, 15.0, 30.0), -0.75, 0.075);
  EXPECT_LT(decay_slope(t, z, 15.0, 30.0), 0.0);
}
