#include "beamfactory/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "beamfactory/errors.hpp"

namespace beamfactory {

ShadowingField::ShadowingField(const Params& params) : p_(params) {
  if (!(p_.spacing > 0.0)) throw InvalidArgument("shadowing lattice spacing must be > 0");
  if (p_.nx < 2 || p_.ny < 2) throw InvalidArgument("shadowing lattice needs at least 2x2 nodes");
  if (!(p_.sigma >= 0.0)) throw InvalidArgument("shadowing sigma must be >= 0");
  if (!(p_.decorrelation_distance > 0.0)) {
    throw InvalidArgument("shadowing decorrelation distance must be > 0");
  }

  values_.assign(p_.nx * p_.ny, 0.0);
  std::mt19937_64 rng(p_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : values_) v = normal(rng);

  const double rho = std::exp(-p_.spacing / p_.decorrelation_distance);
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (std::size_t j = 0; j < p_.ny; ++j) {
    for (std::size_t i = 1; i < p_.nx; ++i) {
      auto& v = values_[j * p_.nx + i];
      v = rho * values_[j * p_.nx + i - 1] + innovation * v;
    }
  }
  for (std::size_t i = 0; i < p_.nx; ++i) {
    for (std::size_t j = 1; j < p_.ny; ++j) {
      auto& v = values_[j * p_.nx + i];
      v = rho * values_[(j - 1) * p_.nx + i] + innovation * v;
    }
  }
}

ShadowingField ShadowingField::covering(const Rect& r, double sigma, double decorrelation_distance,
                                        std::uint64_t seed, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("shadowing lattice spacing must be > 0");
  Params p;
  p.origin = {r.x_min, r.y_min};
  p.spacing = spacing;
  p.nx = static_cast<std::size_t>(std::ceil(r.width() / spacing - 1e-9)) + 1;
  p.ny = static_cast<std::size_t>(std::ceil(r.height() / spacing - 1e-9)) + 1;
  p.nx = std::max<std::size_t>(p.nx, 2);
  p.ny = std::max<std::size_t>(p.ny, 2);
  p.sigma = sigma;
  p.decorrelation_distance = decorrelation_distance;
  p.seed = seed;
  return ShadowingField(p);
}

Rect ShadowingField::extent() const {
  return {p_.origin.x, p_.origin.y, p_.origin.x + static_cast<double>(p_.nx - 1) * p_.spacing,
          p_.origin.y + static_cast<double>(p_.ny - 1) * p_.spacing};
}

double ShadowingField::sample_unit(Point2 p) const {
  if (!extent().contains(p)) {
    throw OutOfGridError(
        fmt::format("point ({:.3f}, {:.3f}) is outside the shadowing field", p.x, p.y));
  }
  const double fx = (p.x - p_.origin.x) / p_.spacing;
  const double fy = (p.y - p_.origin.y) / p_.spacing;
  const auto i0 = std::min(static_cast<std::size_t>(fx), p_.nx - 2);
  const auto j0 = std::min(static_cast<std::size_t>(fy), p_.ny - 2);
  const double tx = fx - static_cast<double>(i0);
  const double ty = fy - static_cast<double>(j0);
  const double bottom = (1.0 - tx) * node(i0, j0) + tx * node(i0 + 1, j0);
  const double top = (1.0 - tx) * node(i0, j0 + 1) + tx * node(i0 + 1, j0 + 1);
  return (1.0 - ty) * bottom + ty * top;
}

}  // namespace beamfactory
