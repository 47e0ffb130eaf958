#include <gtest/gtest.h>

#include <cmath>

#include "kslab/errors.hpp"
#include "kslab/phase_plane.hpp"
#include "kslab/radial.hpp"

using namespace kslab;

namespace {

SeparatrixOptions long_run(double tau_max = 60.0) {
  SeparatrixOptions o;
  o.tau_max = tau_max;
  return o;
}

}  // namespace

TEST(VectorField, Examples) {
  for (int d = 3; d <= 12; ++d) {
    const auto o = vector_field(d, 0.0, 0.0);
    EXPECT_EQ(o[0], 0.0);
    EXPECT_EQ(o[1], 0.0);
    const auto s = vector_field(d, 2.0 * (d - 2), 2.0);
    EXPECT_EQ(s[0], 0.0);
    EXPECT_EQ(s[1], 0.0);
  }
  const auto v = vector_field(3, 2.0, 0.0);
  EXPECT_EQ(v[0], 4.0);
  EXPECT_EQ(v[1], 2.0);
}

TEST(Lyapunov, Examples) {
  for (int d = 3; d <= 9; ++d) {
    const double c = 2.0 * (d - 2);
    EXPECT_NEAR(lyapunov(d, c, 2.0), 0.0, 1e-15);
    EXPECT_NEAR(lyapunov(d, c, 0.0), 2.0, 1e-15);
    EXPECT_NEAR(lyapunov(d, 2.0 * c, 2.0), c * (1.0 - std::log(2.0)), 1e-12 * c);
    // Near the minimum the series branch must match the direct formula.
    const double X = c * (1.0 + 3e-3);
    EXPECT_NEAR(lyapunov(d, X, 2.0), X - c - c * std::log(X / c), 1e-15);
  }
  EXPECT_THROW(lyapunov(3, 0.0, 1.0), DomainError);
  EXPECT_THROW(lyapunov(3, -1.0, 1.0), DomainError);
}

TEST(Lyapunov, NumericRateMatchesDissipation) {
  for (int d = 3; d <= 12; ++d) {
    const double floor = d - 2.0;
    for (double X : {0.3, 1.0, 2.0 * (d - 2), 5.0 * d}) {
      for (double Z : {0.1, 1.0, 2.0, 2.001, 3.5}) {
        const double exact = -(d - 2.0) * (Z - 2.0) * (Z - 2.0);
        const double num = lyapunov_rate_numeric(d, X, Z);
        EXPECT_LE(std::abs(num - exact), 1e-6 * std::max(std::abs(exact), floor)) << d << " " << X << " " << Z;
      }
    }
  }
}

TEST(Eigenvalues, Examples) {
  auto [a, b] = linearization_eigenvalues(3, FixedPoint::Interior);
  EXPECT_NEAR(a.real(), -0.5, 1e-15);
  EXPECT_NEAR(std::abs(a.imag()), std::sqrt(7.0) / 2.0, 1e-15);
  EXPECT_NEAR(b.imag(), -a.imag(), 1e-15);

  auto [c, e] = linearization_eigenvalues(10, FixedPoint::Interior);
  EXPECT_EQ(c, std::complex<double>(-4.0, 0.0));
  EXPECT_EQ(e, std::complex<double>(-4.0, 0.0));

  auto [f, g] = linearization_eigenvalues(11, FixedPoint::Interior);
  EXPECT_NEAR(std::max(f.real(), g.real()), -3.0, 1e-14);
  EXPECT_NEAR(std::min(f.real(), g.real()), -6.0, 1e-14);
  EXPECT_EQ(f.imag(), 0.0);

  auto [o1, o2] = linearization_eigenvalues(5, FixedPoint::Origin);
  EXPECT_EQ(o1, std::complex<double>(2.0, 0.0));
  EXPECT_EQ(o2, std::complex<double>(-3.0, 0.0));
  EXPECT_THROW(linearization_eigenvalues(2, FixedPoint::Interior), DomainError);
}

TEST(Eigenvalues, RootsOfCharacteristicPolynomialAndDichotomy) {
  for (int d = 3; d <= 40; ++d) {
    const auto [a, b] = linearization_eigenvalues(d, FixedPoint::Interior);
    for (auto l : {a, b}) EXPECT_LT(std::abs(l * l + double(d - 2) * l + 2.0 * (d - 2)), 1e-10 * d) << d;
    const bool complex = a.imag() != 0.0;
    EXPECT_EQ(complex, d <= 9) << d;
    EXPECT_EQ(interior_discriminant_sign(d), d < 10 ? -1 : (d == 10 ? 0 : 1)) << d;
  }
}

TEST(Separatrix, ConvergesToInteriorPointInQuadrant) {
  const auto traj = integrate_separatrix(3, long_run());
  EXPECT_TRUE(traj.converged);
  EXPECT_LT(traj.terminal_distance, 1e-6);
  EXPECT_NEAR(traj.points.back().X, 2.0, 1e-6);
  EXPECT_NEAR(traj.points.back().Z, 2.0, 1e-6);
  for (std::size_t k = 1; k < traj.points.size(); ++k) {
    EXPECT_GT(traj.points[k].tau, traj.points[k - 1].tau);
    EXPECT_GT(traj.points[k].X, 0.0);
    EXPECT_GT(traj.points[k].Z, 0.0);
  }
}

TEST(Separatrix, LyapunovNonincreasing) {
  for (int d : {3, 6, 9, 12}) {
    const auto traj = integrate_separatrix(d, long_run());
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& p : traj.points) {
      const double L = lyapunov(d, p.X, p.Z);
      EXPECT_LE(L, prev + 1e-12) << d << " tau=" << p.tau;
      prev = L;
    }
  }
}

TEST(Separatrix, LaunchSlopeAndDeltaConvergence) {
  for (int d : {3, 5, 8}) {
    SeparatrixOptions o = long_run(5.0);
    o.stop_radius = 0.0;
    std::vector<PhasePoint> at;
    for (double delta : {1e-6, 1e-8, 1e-10}) {
      o.delta = delta;
      const auto traj = integrate_separatrix(d, o);
      EXPECT_NEAR(traj.points.front().Z / traj.points.front().X, 1.0 / d, 1e-14);
      // Early on the trajectory still follows the eigenvector.
      const auto early = traj.at(traj.tau_begin() + 1.0);
      EXPECT_NEAR(early.Z / early.X, 1.0 / d, 100.0 * delta) << d;
      at.push_back(traj.at(1.0));
    }
    const double d1 = std::abs(at[0].Z - at[1].Z), d2 = std::abs(at[1].Z - at[2].Z);
    EXPECT_LT(d2, 1e-6);
    EXPECT_LE(d2, d1 + 1e-9);
  }
}

TEST(CountCrossings, ConstantAndSeparatrices) {
  PhaseTrajectory flat;
  flat.dim = 3;
  for (int k = 0; k < 10; ++k) flat.points.push_back({double(k), 1.0, 1.0});
  EXPECT_EQ(count_crossings(flat, 2.0), 0u);

  // The spiral contracts by e^{-(d-2) pi / sqrt((d-2)(10-d))} per half turn; for d = 9 the third
  // crossing lies inside the default 1e-9 stop ball, so resolve down to 1e-11.
  SeparatrixOptions o = long_run();
  o.rel_tol = 1e-13;
  o.stop_radius = 1e-11;
  for (int d = 3; d <= 9; ++d) EXPECT_GE(count_crossings(integrate_separatrix(d, o), 2.0), 3u) << d;
  for (int d : {12, 14}) EXPECT_LE(count_crossings(integrate_separatrix(d, o), 2.0), 1u) << d;
  EXPECT_GE(count_crossings(integrate_separatrix(3, long_run()), 2.0), 17u);
}

TEST(StationaryProfile, FarFieldBoundAndDomain) {
  for (int d : {3, 4, 6}) {
    const ModelParams p(d);
    const double R = 1e4;
    SeparatrixOptions o = long_run(std::log(R) + 1.0);
    o.stop_radius = 0.0;
    const auto traj = integrate_separatrix(d, o);
    const auto g = RadialGrid::log_spaced(2000, 1e-3, R);
    const auto m = stationary_mass_profile(p, traj, g);
    EXPECT_EQ(m[0], 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
      EXPECT_LE(m[i], 2.0 * (d - 1) * 2.0 * p.sigma() * std::pow(g[i], d - 2)) << d;
    }
    // r^{2-d} M -> 2 sigma with an oscillating envelope ~ r^{-(d-2)/2}: compare decades.
    std::vector<double> dev(5, 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
      const int decade = static_cast<int>(std::floor(std::log10(g[i])));
      if (decade < 0 || decade > 3) continue;
      dev[decade] = std::max(dev[decade], std::abs(std::pow(g[i], 2 - d) * m[i] / (2.0 * p.sigma()) - 1.0));
    }
    for (int k = 1; k <= 3; ++k) EXPECT_LT(dev[k], dev[k - 1]) << d << " decade " << k;
    EXPECT_LT(dev[3], 0.05) << d;
    // Near the origin M ~ sigma u(0) r^d / d with u(0) = central_density = 1.
    EXPECT_NEAR(m[1] * d / (p.sigma() * std::pow(g[1], d)), 1.0, 1e-3) << d;
  }
  const ModelParams p(3);
  const auto short_traj = integrate_separatrix(3, long_run(1.0));
  EXPECT_THROW(stationary_mass_profile(p, short_traj, RadialGrid::uniform(32, 100.0)), DomainError);
  EXPECT_THROW(stationary_mass_profile(ModelParams(4), short_traj, RadialGrid::uniform(32, 1.0)), DomainError);
}

TEST(Separatrix, RejectsBadOptions) {
  SeparatrixOptions o;
  o.delta = 0.0;
  EXPECT_THROW(integrate_separatrix(3, o), DomainError);
  EXPECT_THROW(integrate_separatrix(2), DomainError);
  o = SeparatrixOptions{};
  o.tau_max = -50.0;
  EXPECT_THROW(integrate_separatrix(3, o), DomainError);
}
