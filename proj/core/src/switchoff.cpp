#include "beamfactory/switchoff.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "beamfactory/dbscan.hpp"
#include "beamfactory/errors.hpp"

namespace beamfactory {

// --- BeamMask -------------------------------------------------------------------

BeamMask::BeamMask(std::size_t size, std::uint64_t bits) : size_(size), bits_(bits) {
  if (size > kMaxBeams) throw InvalidArgument(fmt::format("mask size {} exceeds {}", size, kMaxBeams));
  if (size < kMaxBeams && (bits >> size) != 0) throw InvalidArgument("mask bits beyond its size");
}

BeamMask BeamMask::all_on(std::size_t size) {
  return BeamMask(size, size == kMaxBeams ? ~std::uint64_t{0} : (std::uint64_t{1} << size) - 1);
}

BeamMask BeamMask::parse(std::string_view bits) {
  BeamMask m(bits.size());
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] == '1') {
      m.set(k);
    } else if (bits[k] != '0') {
      throw InvalidArgument(fmt::format("malformed mask '{}'", bits));
    }
  }
  return m;
}

void BeamMask::set(std::size_t k, bool on) {
  if (k >= size_) throw InvalidArgument("mask bit out of range");
  if (on) {
    bits_ |= std::uint64_t{1} << k;
  } else {
    bits_ &= ~(std::uint64_t{1} << k);
  }
}

std::size_t BeamMask::popcount() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<std::size_t> BeamMask::enabled() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < size_; ++k) {
    if (test(k)) out.push_back(k);
  }
  return out;
}

std::string BeamMask::to_string() const {
  std::string s(size_, '0');
  for (std::size_t k = 0; k < size_; ++k) {
    if (test(k)) s[k] = '1';
  }
  return s;
}

bool lexicographically_less(const BeamMask& a, const BeamMask& b) {
  const std::uint64_t diff = a.bits_ ^ b.bits_;
  if (diff == 0) return a.size_ < b.size_;
  const auto first = static_cast<std::size_t>(std::countr_zero(diff));
  return !a.test(first);
}

// --- Problem --------------------------------------------------------------------

std::vector<double> SwitchOffProblem::cell_mean_strongest(
    const std::vector<std::size_t>& enabled) const {
  const std::size_t nb = bursts_.size();
  std::vector<double> best(nb, floor_);
  for (std::size_t k : enabled) {
    const double* col = &burst_rsrp_[k * nb];
    for (std::size_t b = 0; b < nb; ++b) best[b] = best[b] < col[b] ? col[b] : best[b];
  }
  std::vector<double> out(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    double sum = 0.0;
    for (std::size_t b = cell_offset_[c]; b < cell_offset_[c + 1]; ++b) sum += best[b];
    out[c] = sum / static_cast<double>(cell_offset_[c + 1] - cell_offset_[c]);
  }
  return out;
}

SwitchOffProblem SwitchOffProblem::with_xi(std::size_t xi) const {
  if (xi < 1) throw InvalidArgument("cardinality bound xi must be >= 1");
  SwitchOffProblem p = *this;
  p.xi_ = xi;
  return p;
}

void SwitchOffProblem::write_table_csv(std::ostream& out) const {
  out << "cell_i,cell_j,beam,mean_rsrp_dbm,rsrp_max_dbm\n";
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const GridIndex g = grid_.unflat(cells_[c]);
    for (std::size_t b = 0; b < beams_.size(); ++b) {
      const auto m = beam_mean(c, b);
      if (!m) continue;
      out << fmt::format("{},{},{},{:.4f},{:.4f}\n", g.i, g.j, beamfactory::to_string(beams_[b]), *m,
                         rsrp_max_[c]);
    }
  }
}

SwitchOffProblem build_problem(const MeasurementTrace& trace, const GridSpec& grid, std::size_t xi,
                               double floor_dbm) {
  if (xi < 1) throw InvalidArgument("cardinality bound xi must be >= 1");
  if (trace.empty()) throw InvalidArgument("cannot build a switch-off problem from an empty trace");

  SwitchOffProblem p;
  p.grid_ = grid;
  p.config_ = trace.config;
  p.xi_ = xi;
  p.floor_ = floor_dbm;
  const BeamGridConfig table = make_config(trace.config);
  for (const auto& b : table.beams) p.beams_.push_back(b.id);
  const std::size_t nb = p.beams_.size();

  struct Tagged {
    std::size_t flat;
    std::size_t sample;
  };
  std::vector<Tagged> tagged;
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const auto& s = trace.samples[k];
    if (s.beams.empty()) continue;
    const auto g = grid.try_index_of(s.position);
    if (!g) continue;
    tagged.push_back({grid.flat(*g), k});
  }
  if (tagged.empty()) throw InvalidArgument("trace populates no grid cell");
  std::stable_sort(tagged.begin(), tagged.end(),
                   [](const Tagged& a, const Tagged& b) { return a.flat < b.flat; });

  std::vector<double> beam_sum;
  std::vector<std::size_t> beam_count;
  p.burst_rsrp_.assign(tagged.size() * nb, floor_dbm);
  for (std::size_t t = 0; t < tagged.size(); ++t) {
    if (t == 0 || tagged[t].flat != tagged[t - 1].flat) {
      p.cells_.push_back(tagged[t].flat);
      p.cell_offset_.push_back(t);
      beam_sum.resize(p.cells_.size() * nb, 0.0);
      beam_count.resize(p.cells_.size() * nb, 0);
    }
    const std::size_t cell = p.cells_.size() - 1;
    const auto& s = trace.samples[tagged[t].sample];
    for (const auto& e : s.beams) {
      const auto b = table.index_of(e.id);
      if (!b) throw InvalidArgument(fmt::format("trace beam {} outside configuration", to_string(e.id)));
      p.burst_rsrp_[*b * tagged.size() + t] = e.rsrp_dbm;
      beam_sum[cell * nb + *b] += e.rsrp_dbm;
      ++beam_count[cell * nb + *b];
    }
    const std::size_t best = *strongest_entry(s);
    p.bursts_.push_back({s.position, cell, *table.index_of(s.beams[best].id), s.beams[best].rsrp_dbm});
  }
  p.cell_offset_.push_back(tagged.size());

  p.beam_mean_.resize(p.cells_.size() * nb);
  for (std::size_t k = 0; k < p.beam_mean_.size(); ++k) {
    if (beam_count[k] > 0) p.beam_mean_[k] = beam_sum[k] / static_cast<double>(beam_count[k]);
  }
  std::vector<std::size_t> all(nb);
  std::iota(all.begin(), all.end(), std::size_t{0});
  p.rsrp_max_ = p.cell_mean_strongest(all);
  return p;
}

double objective(const SwitchOffProblem& problem, const BeamMask& mask) {
  if (mask.size() != problem.n_beams()) {
    throw InvalidArgument(fmt::format("mask has {} bits, problem has {} beams", mask.size(),
                                      problem.n_beams()));
  }
  const auto enabled = mask.enabled();
  if (enabled.empty()) throw InvalidArgument("mask enables no beam");
  const auto means = problem.cell_mean_strongest(enabled);
  double total = 0.0;
  for (std::size_t c = 0; c < problem.n_cells(); ++c) total += problem.rsrp_max()[c] - means[c];
  return total / static_cast<double>(problem.n_cells());
}

// --- Exhaustive -----------------------------------------------------------------

std::uint64_t feasible_mask_count(std::size_t n, std::size_t xi) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(n, 0)
  for (std::size_t k = 1; k <= std::min(n, xi); ++k) {
    binom = binom * (n - k + 1) / k;
    total += binom;
    if (total > std::numeric_limits<std::uint64_t>::max() / 4) break;
  }
  return total;
}

namespace {

void keep_better(SolverResult& best, const BeamMask& mask, double value) {
  if (best.evaluations == 0 || value < best.objective ||
      (value == best.objective && lexicographically_less(mask, best.mask))) {
    best.mask = mask;
    best.objective = value;
  }
}

}  // namespace

SolverResult solve_exhaustive(const SwitchOffProblem& problem, std::uint64_t guard) {
  const std::size_t n = problem.n_beams();
  const std::size_t xi = std::min(problem.xi(), n);
  if (xi == n) {
    SolverResult r;
    r.solver = "exhaustive";
    r.mask = BeamMask::all_on(n);
    r.objective = objective(problem, r.mask);
    r.evaluations = 1;
    return r;
  }
  const std::uint64_t count = feasible_mask_count(n, xi);
  if (count > guard) {
    throw SearchTooLarge(fmt::format(
        "exhaustive search needs {} evaluations (guard {}); use the genetic solver", count, guard));
  }
  SolverResult best;
  best.solver = "exhaustive";
  std::vector<std::size_t> idx;
  for (std::size_t k = 1; k <= xi; ++k) {
    idx.resize(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
      BeamMask m(n);
      for (std::size_t b : idx) m.set(b);
      const double v = objective(problem, m);
      keep_better(best, m, v);
      ++best.evaluations;
      // next k-combination in lexicographic index order
      std::size_t pos = k;
      while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t q = pos; q < k; ++q) idx[q] = idx[q - 1] + 1;
    }
  }
  return best;
}

// --- Genetic algorithm ----------------------------------------------------------

void GaParams::validate() const {
  if (pop_size < 2) throw InvalidArgument("GA population must hold at least 2 individuals");
  if (generations < 1) throw InvalidArgument("GA needs at least one generation");
  if (tournament_k < 1) throw InvalidArgument("GA tournament size must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw InvalidArgument("GA crossover rate outside [0, 1]");
  }
  if (mutation_rate && !(*mutation_rate >= 0.0 && *mutation_rate <= 1.0)) {
    throw InvalidArgument("GA mutation rate outside [0, 1]");
  }
}

namespace {

class GaRun {
 public:
  GaRun(const SwitchOffProblem& problem, const GaParams& params, std::uint64_t seed)
      : problem_(problem),
        params_(params),
        n_(problem.n_beams()),
        xi_(std::min(problem.xi(), problem.n_beams())),
        mutation_(params.mutation_rate.value_or(1.0 / static_cast<double>(problem.n_beams()))),
        rng_(seed) {}

  SolverResult run() {
    // Bound admits every beam: all-on is optimal.
    if (xi_ == n_) {
      SolverResult r;
      r.mask = BeamMask::all_on(n_);
      r.objective = eval(r.mask);
      r.evaluations = cache_.size();
      return r;
    }
    std::vector<BeamMask> pop;
    pop.reserve(params_.pop_size);
    for (std::size_t k = 0; k < params_.pop_size; ++k) pop.push_back(random_feasible());

    SolverResult best;
    std::vector<double> fitness(pop.size());
    for (std::size_t gen = 0; gen < params_.generations; ++gen) {
      std::size_t elite = 0;
      for (std::size_t k = 0; k < pop.size(); ++k) {
        fitness[k] = eval(pop[k]);
        if (fitness[k] < fitness[elite]) elite = k;
      }
      if (gen == 0 || fitness[elite] < best.objective) {
        best.mask = pop[elite];
        best.objective = fitness[elite];
      }

      std::vector<BeamMask> next;
      next.reserve(pop.size());
      next.push_back(pop[elite]);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      while (next.size() < pop.size()) {
        const BeamMask& a = pop[tournament(fitness)];
        const BeamMask& b = pop[tournament(fitness)];
        BeamMask child = a;
        if (unit(rng_) < params_.crossover_rate) {
          for (std::size_t bit = 0; bit < n_; ++bit) {
            child.set(bit, unit(rng_) < 0.5 ? a.test(bit) : b.test(bit));
          }
        }
        for (std::size_t bit = 0; bit < n_; ++bit) {
          if (unit(rng_) < mutation_) child.set(bit, !child.test(bit));
        }
        next.push_back(repair(child));
      }
      pop = std::move(next);
    }
    best.evaluations = cache_.size();
    return best;
  }

 private:
  double eval(const BeamMask& m) {
    const auto it = cache_.find(m.bits());
    if (it != cache_.end()) return it->second;
    const double v = objective(problem_, m);
    cache_.emplace(m.bits(), v);
    return v;
  }

  BeamMask random_feasible() {
    std::uniform_int_distribution<std::size_t> count(1, xi_);
    const std::size_t k = count(rng_);
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    BeamMask m(n_);
    for (std::size_t q = 0; q < k; ++q) {
      std::uniform_int_distribution<std::size_t> pick(q, n_ - 1);
      std::swap(order[q], order[pick(rng_)]);
      m.set(order[q]);
    }
    return m;
  }

  std::size_t tournament(const std::vector<double>& fitness) {
    std::uniform_int_distribution<std::size_t> pick(0, fitness.size() - 1);
    std::size_t winner = pick(rng_);
    for (std::size_t k = 1; k < params_.tournament_k; ++k) {
      const std::size_t c = pick(rng_);
      if (fitness[c] < fitness[winner] || (fitness[c] == fitness[winner] && c < winner)) winner = c;
    }
    return winner;
  }

  // Drops the beam whose removal costs least until popcount <= xi.
  BeamMask repair(BeamMask m) {
    if (m.popcount() == 0) {
      std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
      m.set(pick(rng_));
    }
    while (m.popcount() > xi_) {
      std::optional<BeamMask> best;
      double best_value = 0.0;
      for (std::size_t bit : m.enabled()) {
        BeamMask candidate = m;
        candidate.set(bit, false);
        const double v = eval(candidate);
        if (!best || v < best_value) {
          best = candidate;
          best_value = v;
        }
      }
      m = *best;
    }
    return m;
  }

  const SwitchOffProblem& problem_;
  const GaParams& params_;
  std::size_t n_;
  std::size_t xi_;
  double mutation_;
  std::mt19937_64 rng_;
  std::unordered_map<std::uint64_t, double> cache_;
};

}  // namespace

SolverResult solve_ga(const SwitchOffProblem& problem, const GaParams& params, std::uint64_t seed) {
  params.validate();
  SolverResult r = GaRun(problem, params, seed).run();
  r.solver = "ga";
  r.seed = seed;
  return r;
}

// --- DBSCAN selection -----------------------------------------------------------

SolverResult solve_dbscan(const SwitchOffProblem& problem, const DbscanSelectParams& params) {
  if (!(params.eps > 0.0)) throw InvalidArgument("DBSCAN eps must be > 0");
  if (params.min_pts < 1) throw InvalidArgument("DBSCAN min_pts must be >= 1");
  if (!(params.rsrp_weight >= 0.0)) throw InvalidArgument("DBSCAN rsrp weight must be >= 0");

  const std::size_t nb = problem.n_beams();
  std::vector<std::vector<FeaturePoint>> groups(nb);
  for (const auto& b : problem.bursts()) {
    groups[b.strongest].push_back({b.position.x, b.position.y, params.rsrp_weight * b.rsrp});
  }
  std::vector<std::size_t> core(nb, 0);
  std::vector<std::size_t> raw(nb, 0);
  for (std::size_t b = 0; b < nb; ++b) {
    auto& g = groups[b];
    std::sort(g.begin(), g.end());
    raw[b] = g.size();
    core[b] = dbscan(g, params.eps, params.min_pts).core_count();
  }

  SolverResult r;
  r.solver = "dbscan";
  r.fallback = std::all_of(core.begin(), core.end(), [](std::size_t c) { return c == 0; });
  std::vector<std::size_t> order(nb);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (core[a] != core[b]) return core[a] > core[b];
    return raw[a] > raw[b];
  });
  r.mask = BeamMask(nb);
  for (std::size_t k = 0; k < std::min(problem.xi(), nb); ++k) r.mask.set(order[k]);
  r.objective = objective(problem, r.mask);
  r.evaluations = 1;
  return r;
}

}  // namespace beamfactory
