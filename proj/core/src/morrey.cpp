#include "kslab/morrey.hpp"

#include <algorithm>
#include <cmath>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

std::vector<double> default_radii(double half_width) {
  std::vector<double> radii;
  for (int k = 1; k <= 32; ++k) radii.push_back(half_width * k / 32.0);
  return radii;
}

// Iterates all multi-indices in [0, n)^d.
template <class F>
void for_each_index(int d, int n, F&& f) {
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    f(idx);
    int k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == n) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == d) return;
  }
}

}  // namespace

double morrey_norm_offcenter(const ModelParams& params, const DensityProfile& density, double p,
                             const BoxSampling& sampling) {
  if (!(p >= 1.0)) throw DomainError("morrey_norm_offcenter: p must be >= 1");
  const int d = params.dim();
  const int n = sampling.cells_per_dim | 1;
  const double h = 2.0 * sampling.half_width / n;
  const double cell_volume = std::pow(h, d);

  auto coord = [&](int j) { return (j - (n - 1) / 2) * h; };

  // Cell-center samples.
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
  double sup_abs = 0.0;
  for_each_index(d, n, [&](const std::vector<int>& idx) {
    std::vector<double> x(idx.size());
    double rr = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      x[k] = coord(idx[k]);
      rr += x[k] * x[k];
    }
    const double u = std::abs(density.at(std::sqrt(rr)));
    sup_abs = std::max(sup_abs, u);
    if (u > 0.0) {
      points.push_back(std::move(x));
      weights.push_back(u * cell_volume);
    }
  });
  if (std::isinf(p)) return sup_abs;

  std::vector<double> radii = sampling.radii.empty() ? default_radii(sampling.half_width) : sampling.radii;
  std::sort(radii.begin(), radii.end());

  const int reach = sampling.center_reach;
  const std::size_t centers = static_cast<std::size_t>(std::pow(2 * reach + 1, d));
  const double work = static_cast<double>(std::pow(static_cast<double>(n), d)) * centers *
                      std::max(1.0, std::log2(static_cast<double>(radii.size()) + 1.0));
  if (work > static_cast<double>(sampling.max_work)) {
    throw ValidationError("morrey_norm_offcenter: box sampling too large for brute force");
  }

  const double expo = d * (1.0 / p - 1.0);
  double best = 0.0;
  std::vector<double> bins(radii.size());
  for_each_index(d, 2 * reach + 1, [&](const std::vector<int>& cidx) {
    std::vector<double> c(cidx.size());
    for (std::size_t k = 0; k < cidx.size(); ++k) c[k] = (cidx[k] - reach) * sampling.center_stride * h;
    std::fill(bins.begin(), bins.end(), 0.0);
    for (std::size_t j = 0; j < points.size(); ++j) {
      double rr = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        const double dx = points[j][k] - c[k];
        rr += dx * dx;
      }
      const double dist = std::sqrt(rr);
      auto it = std::upper_bound(radii.begin(), radii.end(), dist);
      if (it != radii.end()) bins[static_cast<std::size_t>(it - radii.begin())] += weights[j];
    }
    double mass = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      mass += bins[k];
      best = std::max(best, std::pow(radii[k], expo) * mass);
    }
  });
  return best;
}

}  // namespace kslab
