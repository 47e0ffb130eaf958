#pragma once

// Dormand-Prince 5(4) integrator with the standard fourth-order continuous
// extension. Fixed-size states; the caller observes every accepted step and
// may stop the integration early.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "kslab/errors.hpp"

namespace kslab::ode {

template <std::size_t N>
using State = std::array<double, N>;

/// Interpolant over one accepted step [t0, t0 + h].
template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State<N>, 5> coeff{};

  double t1() const { return t0 + h; }

  State<N> operator()(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = coeff[0][i] +
             s * (coeff[1][i] + s1 * (coeff[2][i] + s * (coeff[3][i] + s1 * coeff[4][i])));
    }
    return y;
  }
};

template <std::size_t N>
struct Step {
  double t = 0.0;
  State<N> y{};
  State<N> dydt{};
  DenseSegment<N> dense;
};

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  ///< 0 picks a step from the local scale
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Integrates y' = f(t, y) from t0 to t_end. `observe(const Step<N>&)` runs after each
/// accepted step; returning false stops the integration. Returns the final step.
template <std::size_t N, class F, class Observer>
Step<N> integrate(F&& f, double t0, const State<N>& y0, double t_end, const Options& opt,
                  Observer&& observe, Stats* stats = nullptr) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  Stats local;
  Stats& st = stats ? *stats : local;
  const double direction = t_end >= t0 ? 1.0 : -1.0;

  Step<N> cur;
  cur.t = t0;
  cur.y = y0;
  cur.dydt = f(t0, y0);
  ++st.evaluations;

  double h = opt.initial_step;
  if (h <= 0.0) {
    double ny = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.abs_tol + opt.rel_tol * std::abs(y0[i]);
      ny = std::max(ny, std::abs(y0[i]) / sc);
      nf = std::max(nf, std::abs(cur.dydt[i]) / sc);
    }
    h = (ny < 1e-5 || nf < 1e-5) ? 1e-6 : 0.01 * ny / nf;
  }
  h = std::min({h, opt.max_step, std::abs(t_end - t0)});

  State<N> k2, k3, k4, k5, k6, k7, ytmp, ynew;
  while (direction * (t_end - cur.t) > 0.0) {
    if (st.accepted + st.rejected >= opt.max_steps) {
      throw NumericalFailure("ode::integrate: step budget exhausted");
    }
    const bool last = h >= std::abs(t_end - cur.t);
    if (last) h = std::abs(t_end - cur.t);
    const double hs = direction * h;
    const auto& y = cur.y;
    const auto& k1 = cur.dydt;

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    k2 = f(cur.t + c2 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(cur.t + c3 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(cur.t + c4 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(cur.t + c5 * hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double t_new = last ? t_end : cur.t + hs;
    k6 = f(cur.t + hs, ytmp);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = f(t_new, ynew);
    st.evaluations += 6;

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
      finite = finite && std::isfinite(ynew[i]);
    }
    err = finite ? std::sqrt(err / N) : std::numeric_limits<double>::infinity();

    if (err <= 1.0) {
      Step<N> next;
      next.t = t_new;
      next.y = ynew;
      next.dydt = k7;
      next.dense.t0 = cur.t;
      next.dense.h = hs;
      for (std::size_t i = 0; i < N; ++i) {
        const double dy = ynew[i] - y[i];
        const double bspl = hs * k1[i] - dy;
        next.dense.coeff[0][i] = y[i];
        next.dense.coeff[1][i] = dy;
        next.dense.coeff[2][i] = bspl;
        next.dense.coeff[3][i] = dy - hs * k7[i] - bspl;
        next.dense.coeff[4][i] =
            hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      cur = next;
      ++st.accepted;
      if (!observe(static_cast<const Step<N>&>(cur))) return cur;
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::min(h * fac, opt.max_step);
    } else {
      ++st.rejected;
      h *= finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.25;
      if (h < 1e-14 * std::max(1.0, std::abs(cur.t))) {
        throw NumericalFailure("ode::integrate: step size underflow");
      }
    }
  }
  return cur;
}

}  // namespace kslab::ode
