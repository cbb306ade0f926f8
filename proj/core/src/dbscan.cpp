#include "beamfactory/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>

#include "beamfactory/errors.hpp"

namespace beamfactory {

std::size_t DbscanResult::core_count() const {
  return static_cast<std::size_t>(std::count(core.begin(), core.end(), true));
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

class HashGrid {
 public:
  HashGrid(std::span<const FeaturePoint> pts, double eps) : pts_(pts), eps_(eps) {
    for (std::size_t k = 0; k < pts.size(); ++k) cells_[key(pts[k])].push_back(k);
  }

  void neighbors(std::size_t k, std::vector<std::size_t>& out) const {
    out.clear();
    const CellKey c = key(pts_[k]);
    const double eps2 = eps_ * eps_;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second) {
            if (dist2(pts_[k], pts_[j]) <= eps2) out.push_back(j);
          }
        }
      }
    }
  }

 private:
  CellKey key(const FeaturePoint& p) const {
    return {static_cast<std::int64_t>(std::floor(p[0] / eps_)),
            static_cast<std::int64_t>(std::floor(p[1] / eps_)),
            static_cast<std::int64_t>(std::floor(p[2] / eps_))};
  }
  static double dist2(const FeaturePoint& a, const FeaturePoint& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
  }

  std::span<const FeaturePoint> pts_;
  double eps_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells_;
};

}  // namespace

DbscanResult dbscan(std::span<const FeaturePoint> points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw InvalidArgument("DBSCAN eps must be > 0");
  if (min_pts < 1) throw InvalidArgument("DBSCAN min_pts must be >= 1");

  const std::size_t n = points.size();
  DbscanResult r;
  r.labels.assign(n, DbscanResult::kNoise);
  r.core.assign(n, false);
  if (n == 0) return r;

  HashGrid grid(points, eps);
  std::vector<std::size_t> nb;
  for (std::size_t k = 0; k < n; ++k) {
    grid.neighbors(k, nb);
    r.core[k] = nb.size() >= min_pts;
  }

  std::vector<bool> assigned(n, false);
  std::deque<std::size_t> frontier;
  for (std::size_t k = 0; k < n; ++k) {
    if (!r.core[k] || assigned[k]) continue;
    const int cluster = r.n_clusters++;
    assigned[k] = true;
    r.labels[k] = cluster;
    frontier.push_back(k);
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      grid.neighbors(p, nb);
      for (std::size_t q : nb) {
        if (assigned[q]) continue;
        assigned[q] = true;
        r.labels[q] = cluster;
        if (r.core[q]) frontier.push_back(q);
      }
    }
  }
  return r;
}

}  // namespace beamfactory
