#pragma once

// Brute-force Morrey norm on a d-dimensional box. This is a test oracle for
// the centered (radial) quantities in radial.hpp, usable only on small boxes.

#include <cstddef>
#include <limits>
#include <vector>

#include "kslab/radial.hpp"

namespace kslab {

struct BoxSampling {
  double half_width = 2.0;       ///< box is [-half_width, half_width]^d
  int cells_per_dim = 41;        ///< forced odd so the origin is a cell center
  int center_stride = 4;         ///< candidate ball centers every `center_stride` cells
  int center_reach = 2;          ///< centers at offsets k * stride, |k| <= reach, per axis
  std::vector<double> radii;     ///< radii to test; empty means a default ladder
  std::size_t max_work = 400'000'000;  ///< cells x centers x log(radii) cap
};

inline constexpr double kInfiniteExponent = std::numeric_limits<double>::infinity();

/// sup over sampled centers x and radii R of R^{d(1/p-1)} \int_{|y-x|<R} |u(y)| dy, with
/// the radial density sampled at box cell centers (midpoint rule). p = inf gives the
/// sampled sup norm. Throws ValidationError when the sampling exceeds `max_work`.
double morrey_norm_offcenter(const ModelParams& params, const DensityProfile& density, double p,
                             const BoxSampling& sampling = {});

}  // namespace kslab
