#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kslab/blowup_criteria.hpp"
#include "kslab/errors.hpp"
#include "kslab/radial.hpp"

using namespace kslab;
using std::numbers::pi;

namespace {

// t e^{t Delta} u_C (0) = sigma (d-2) Gamma((d-2)/2) / (4 pi^{d/2}).
double chandrasekhar_theat(int d) {
  return sphere_measure(d) * (d - 2) * std::tgamma(0.5 * (d - 2)) / (4.0 * std::pow(pi, 0.5 * d));
}

MassProfile chandrasekhar(const ModelParams& p, const RadialGrid& g, double scale = 1.0) {
  return tabulate_mass(g, [&](double r) { return scale * chandrasekhar_mass(p, r); });
}

}  // namespace

TEST(BumpFunction, Values) {
  EXPECT_EQ(bump_function(0.0, 2.0), 1.0);
  EXPECT_EQ(bump_function(1.0, 2.0), 0.0);
  EXPECT_EQ(bump_function(3.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(bump_function(0.5, 2.0), 0.5625);
  EXPECT_DOUBLE_EQ(bump_function(0.5, 1.0), std::pow(0.75, 1.5));
  EXPECT_THROW(bump_function(0.5, 0.0), DomainError);
  EXPECT_THROW(bump_function(0.5, 2.5), DomainError);
}

TEST(BumpMoment, ZeroAndChandrasekhar) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(4000, 10.0);
  EXPECT_EQ(bump_moment(MassProfile(g, std::vector<double>(g.size(), 0.0)), 2.0), 0.0);
  const auto m = chandrasekhar(p, g);
  for (double R : {0.5, 2.0, 10.0}) {
    const double exact = 64.0 * pi * R / 15.0;
    EXPECT_NEAR(bump_moment(m, R), exact, 1e-6 * exact) << R;
    EXPECT_LE(bump_moment(m, R), m.at(R));
  }
  EXPECT_THROW(bump_moment(m, 0.0), DomainError);
  EXPECT_THROW(bump_moment(m, 11.0), DomainError);
}

TEST(BumpMoment, BoundedByEnclosedMass) {
  const ModelParams p(4);
  const auto g = RadialGrid::uniform(500, 6.0);
  const auto m = mass_from_density(p, tabulate_density(g, [](double r) { return std::exp(-r) * (1 + std::sin(3 * r) * 0.5); }));
  for (double R = 0.1; R <= 6.0; R += 0.37) EXPECT_LE(bump_moment(m, R), m.at(R) * (1 + 1e-14));
}

TEST(HeatAtOrigin, ChandrasekharIsOneOverT) {
  for (int d = 3; d <= 9; ++d) {
    EXPECT_NEAR(chandrasekhar_theat(d), 1.0, 1e-14) << d;
    const ModelParams p(d);
    const auto g = RadialGrid::uniform(20000, 40.0);
    const auto m = chandrasekhar(p, g);
    for (double t : {0.1, 1.0, 10.0}) {
      const auto h = heat_at_origin(p, m, t);
      EXPECT_NEAR(t * h.value, chandrasekhar_theat(d), 1e-6) << d << " t=" << t;
      EXPECT_LT(t * h.truncation, 1e-6);
    }
  }
}

TEST(HeatAtOrigin, ZeroAndDomain) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(64, 4.0);
  const MassProfile zero(g, std::vector<double>(g.size(), 0.0));
  EXPECT_EQ(heat_at_origin(p, zero, 1.0).value, 0.0);
  EXPECT_THROW(heat_at_origin(p, zero, 0.0), DomainError);
}

TEST(HeatAtOrigin, GaussianConvolution) {
  // e^{t Delta} (A e^{-|x|^2}) (0) = A (1 + 4t)^{-d/2}.
  for (int d : {3, 4, 7}) {
    const ModelParams p(d);
    const double A = 2.5;
    const auto g = RadialGrid::uniform(4000, 12.0);
    // Cumulative Simpson with 16 panels per interval.
    std::vector<double> mv(g.size(), 0.0);
    auto f = [&](double s) { return p.sigma() * A * std::exp(-s * s) * std::pow(s, d - 1); };
    for (std::size_t i = 1; i < g.size(); ++i) {
      const double a0 = g[i - 1], h = (g[i] - a0) / 16.0;
      double acc = f(a0) + f(g[i]);
      for (int k = 1; k < 16; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a0 + k * h);
      mv[i] = mv[i - 1] + acc * h / 3.0;
    }
    const MassProfile m(g, mv);
    for (double t : {0.01, 0.2, 1.0, 5.0}) {
      const double exact = A * std::pow(1.0 + 4.0 * t, -0.5 * d);
      EXPECT_NEAR(heat_at_origin(p, m, t).value, exact, 1e-5 * exact) << d << " t=" << t;
    }
  }
}

TEST(CriteriaReport, ChandrasekharNoFlags) {
  for (int d : {3, 5}) {
    const ModelParams p(d);
    const auto g = RadialGrid::uniform(20000, 40.0);
    const auto rep = criteria_report(p, chandrasekhar(p, g));
    EXPECT_NEAR(rep.sup_t_heat, 1.0, 1e-6) << d;
    EXPECT_NEAR(rep.concentration, 2.0 * p.sigma(), 1e-12 * p.sigma());
    EXPECT_FALSE(rep.exceeds_2);
    EXPECT_FALSE(rep.exceeds_4sigma);
    EXPECT_FALSE(rep.exceeds_upper_bracket);
    EXPECT_FALSE(rep.local_exceeds_upper_bracket);
    EXPECT_EQ(rep.ladder.size(), 40u);
    EXPECT_NEAR(rep.ladder.front().t, 1e-4 * 1600.0, 1e-9);
    EXPECT_NEAR(rep.ladder.back().t, 1e2 * 1600.0, 1e-6);
    for (const auto& s : rep.ladder) {
      EXPECT_GE(s.t_heat, 0.0);
      EXPECT_GE(s.truncation, 0.0);
    }
  }
}

TEST(CriteriaReport, ChandrasekharFlatLadder) {
  const int d = 3;
  const ModelParams p(d);
  const auto g = RadialGrid::uniform(20000, 40.0);
  const auto m = chandrasekhar(p, g);
  for (double t = 0.05; t <= 5.0; t *= 1.26) EXPECT_NEAR(t * heat_at_origin(p, m, t).value, 1.0, 1e-6) << t;
}

TEST(CriteriaReport, ExplicitBlowupConcentrationApproachesFourSigma) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(4000, 400.0);
  const auto rep = criteria_report(p, tabulate_mass(g, [&](double r) { return explicit_blowup_mass(p, 1.0, r, 0.0); }));
  EXPECT_LT(rep.concentration, 4.0 * p.sigma());
  EXPECT_GT(rep.concentration, 0.99 * 4.0 * p.sigma());
  EXPECT_TRUE(rep.sup_at_boundary);
  EXPECT_FALSE(rep.exceeds_4sigma);
  EXPECT_FALSE(rep.exceeds_upper_bracket);
}

TEST(CriteriaReport, TenChandrasekharSetsAllFlags) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(20000, 40.0);
  const auto rep = criteria_report(p, chandrasekhar(p, g, 10.0));
  EXPECT_TRUE(rep.exceeds_2);
  EXPECT_TRUE(rep.exceeds_4sigma);
  EXPECT_TRUE(rep.exceeds_upper_bracket);
  EXPECT_TRUE(rep.local_exceeds_upper_bracket);
}

TEST(CriteriaReport, LinearScaling) {
  const ModelParams p(3);
  const auto g = RadialGrid::uniform(1000, 10.0);
  auto M = [&](double r) { return p.sigma() * (std::sqrt(pi) / 4.0 * std::erf(r) - 0.5 * r * std::exp(-r * r)); };
  CriteriaOptions o;
  BoxSampling box;
  box.half_width = 3.0;
  box.cells_per_dim = 21;
  o.offcenter = box;
  const auto a = criteria_report(p, tabulate_mass(g, M), o);
  for (double lambda : {0.5, 4.0}) {
    const auto b = criteria_report(p, tabulate_mass(g, [&](double r) { return lambda * M(r); }), o);
    EXPECT_NEAR(b.sup_t_heat, lambda * a.sup_t_heat, 1e-13 * b.sup_t_heat);
    EXPECT_NEAR(b.concentration, lambda * a.concentration, 1e-13 * b.concentration);
    ASSERT_EQ(a.moments.size(), b.moments.size());
    for (std::size_t k = 0; k < a.moments.size(); ++k) {
      EXPECT_NEAR(b.moments[k].w, lambda * a.moments[k].w, 1e-13 * b.moments[k].w + 1e-300);
    }
    ASSERT_TRUE(b.offcenter);
    EXPECT_NEAR(*b.offcenter, lambda * *a.offcenter, 1e-12 * *b.offcenter);
  }
}

TEST(CriteriaReport, TruncatedSupercriticalSetsLocalFlag) {
  // c u_C 1_{r<1} with c above the bracket 2 sqrt(pi d).
  const int d = 3;
  const ModelParams p(d);
  const double c = 1.5 * 2.0 * std::sqrt(pi * d);
  const auto g = RadialGrid::uniform(2000, 10.0);
  const auto m = tabulate_mass(g, [&](double r) { return c * chandrasekhar_mass(p, std::min(r, 1.0)); });
  const auto rep = criteria_report(p, m);
  EXPECT_TRUE(rep.local_exceeds_upper_bracket);
  EXPECT_TRUE(rep.exceeds_upper_bracket);
  EXPECT_FALSE(rep.sup_at_boundary);
  const auto sub = criteria_report(p, tabulate_mass(g, [&](double r) { return 0.5 * c * chandrasekhar_mass(p, std::min(r, 1.0)); }));
  EXPECT_FALSE(sub.local_exceeds_upper_bracket);
}
