#pragma once

#include <cstdint>
#include <vector>

#include "beamfactory/geometry.hpp"

namespace beamfactory {

// Spatially correlated zero-mean Gaussian field on a regular node lattice.
//
// Nodes are filled by a separable first-order autoregression along x and then
// along y, which yields exact unit marginal variance and correlation
// exp(-|dx|/D) * exp(-|dy|/D) between nodes. Off-node values are bilinear
// interpolations of the four surrounding nodes.
class ShadowingField {
 public:
  struct Params {
    Point2 origin;
    double spacing = 0.5;  // node pitch, m
    std::size_t nx = 2;    // node counts
    std::size_t ny = 2;
    double sigma = 0.0;                   // dB
    double decorrelation_distance = 10.0;  // m
    std::uint64_t seed = 0;
  };

  explicit ShadowingField(const Params& params);

  // Smallest lattice anchored at r's lower-left corner that covers r.
  static ShadowingField covering(const Rect& r, double sigma, double decorrelation_distance,
                                 std::uint64_t seed, double spacing = 0.5);

  double sigma() const { return p_.sigma; }
  double decorrelation_distance() const { return p_.decorrelation_distance; }
  std::uint64_t seed() const { return p_.seed; }
  double spacing() const { return p_.spacing; }
  Rect extent() const;

  // Unit-variance realization at p. Throws OutOfGridError outside extent().
  double sample_unit(Point2 p) const;
  // sigma * sample_unit(p), in dB.
  double sample(Point2 p) const { return p_.sigma == 0.0 ? 0.0 : p_.sigma * sample_unit(p); }

 private:
  double node(std::size_t i, std::size_t j) const { return values_[j * p_.nx + i]; }

  Params p_;
  std::vector<double> values_;  // unit variance, row-major (j * nx + i)
};

}  // namespace beamfactory
