#include "mrp/operator_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrp/parallel.hpp"

namespace mrp {

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

StateTaggedMeasure::StateTaggedMeasure(int k, std::vector<Particle> particles) : k_(k), particles_(std::move(particles)) {
  if (k < 1) throw Error(Errc::invalid_argument, "state count must be positive");
  for (const auto& p : particles_)
    if (p.state < 0 || p.state >= k) throw Error(Errc::symbol_out_of_range, "particle state out of range");
}

StateTaggedMeasure StateTaggedMeasure::dirac(int k, Symbol state, Point x) {
  return StateTaggedMeasure(k, {Particle{state, std::move(x), 1.0}});
}

std::vector<double> StateTaggedMeasure::masses() const {
  std::vector<std::vector<double>> per(static_cast<std::size_t>(k_));
  for (const auto& p : particles_) per[static_cast<std::size_t>(p.state)].push_back(p.weight);
  std::vector<double> out;
  out.reserve(per.size());
  for (const auto& w : per) out.push_back(compensated_sum(w));
  return out;
}

double StateTaggedMeasure::total_mass() const {
  std::vector<double> w;
  w.reserve(particles_.size());
  for (const auto& p : particles_) w.push_back(p.weight);
  return compensated_sum(w);
}

void StateTaggedMeasure::validate(const IntervalBox& ambient) const {
  for (const auto& p : particles_) {
    if (!(p.weight > 0.0)) throw Error(Errc::invalid_argument, "particle weights must be positive");
    if (!ambient.contains(p.x)) throw Error(Errc::outside_domain, "particle outside the ambient box");
  }
  if (std::abs(total_mass() - 1.0) > kAlgebraTolerance)
    throw Error(Errc::invalid_argument, "total weight differs from one by more than 1e-12");
}

std::vector<Particle> StateTaggedMeasure::sorted() const {
  auto out = particles_;
  std::sort(out.begin(), out.end(), [](const Particle& a, const Particle& b) {
    if (a.state != b.state) return a.state < b.state;
    if (a.x != b.x) return a.x < b.x;
    return a.weight < b.weight;
  });
  return out;
}

StateTaggedMeasure apply_operator(const StateTaggedMeasure& mu, const MapSystem& sys) {
  if (mu.k() != sys.k()) throw Error(Errc::invalid_argument, "measure and system have different state counts");
  const auto& p = sys.shift().forward;
  std::vector<Particle> out;
  out.reserve(mu.size() * static_cast<std::size_t>(sys.k()));
  for (const auto& part : mu.particles())
    for (Symbol j = 0; j < sys.k(); ++j) {
      const double pij = p(part.state, j);
      if (pij > 0.0) out.push_back({j, sys.map(j)(part.x), part.weight * pij});
    }
  return StateTaggedMeasure(mu.k(), std::move(out));
}

StateTaggedMeasure resample(const StateTaggedMeasure& mu, std::size_t target_count, std::uint64_t seed) {
  const auto k = static_cast<std::size_t>(mu.k());
  if (target_count < k) throw Error(Errc::invalid_argument, "target count must be at least the number of states");
  std::vector<std::vector<const Particle*>> strata(k);
  for (const auto& p : mu.particles()) strata[static_cast<std::size_t>(p.state)].push_back(&p);
  const auto masses = mu.masses();
  const double total = compensated_sum(masses);

  // Largest-remainder allocation.
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (strata[j].empty()) continue;
    const double share = static_cast<double>(target_count) * masses[j] / total;
    counts[j] = static_cast<std::size_t>(std::floor(share));
    assigned += counts[j];
    remainders.emplace_back(share - std::floor(share), j);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < target_count && r < remainders.size(); ++r, ++assigned)
    ++counts[remainders[r].second];
  for (std::size_t j = 0; j < k; ++j) {
    if (strata[j].empty() || counts[j] > 0) continue;
    const auto donor = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    --counts[donor];
    counts[j] = 1;
  }

  auto rng = make_rng(seed);
  std::vector<Particle> out;
  out.reserve(target_count);
  for (std::size_t j = 0; j < k; ++j) {
    if (strata[j].empty()) continue;
    const auto& stratum = strata[j];
    const double mass = masses[j];
    const auto n = counts[j];
    const double u0 = uniform01(rng);
    std::size_t ptr = 0;
    double cumulative = stratum[0]->weight / mass;
    for (std::size_t r = 0; r < n; ++r) {
      const double t = (u0 + static_cast<double>(r)) / static_cast<double>(n);
      while (t >= cumulative && ptr + 1 < stratum.size()) cumulative += stratum[++ptr]->weight / mass;
      out.push_back({static_cast<Symbol>(j), stratum[ptr]->x, mass / static_cast<double>(n)});
    }
  }
  return StateTaggedMeasure(mu.k(), std::move(out));
}

double TargetEstimate::max_diameter() const {
  return diameters.empty() ? 0.0 : *std::max_element(diameters.begin(), diameters.end());
}

TargetEstimate estimate_target(const MapSystem& sys, const TargetOptions& options) {
  const auto& shift = sys.shift();
  if (!shift.primitive())
    throw Error(Errc::not_primitive, "transition matrix is " + std::string(to_string(shift.classification)));
  if (options.samples == 0) throw Error(Errc::invalid_argument, "target estimation needs at least one sample");
  const Point anchor = options.anchor ? *options.anchor : sys.ambient().center();
  if (!sys.ambient().contains(anchor)) throw Error(Errc::outside_domain, "anchor outside the ambient box");

  std::vector<Particle> particles(options.samples);
  std::vector<double> diameters(options.samples);
  const double weight = 1.0 / static_cast<double>(options.samples);
  parallel_for(options.samples, options.threads, [&](std::size_t i) {
    auto rng = make_rng(options.seed, i);
    if (options.depth == 0) {
      particles[i] = {sample_index(rng, shift.stationary), anchor, weight};
      diameters[i] = sys.ambient().l1_diameter();
      return;
    }
    const auto w = sample_word(shift, options.depth, Direction::inverse, std::nullopt, rng);
    particles[i] = {w.front(), reverse_composition(sys, w, anchor), weight};
    diameters[i] = reverse_enclosure(sys, w).l1_diameter();
  });
  return {StateTaggedMeasure(sys.k(), std::move(particles)), std::move(diameters)};
}

double wasserstein1(std::span<const double> xs, std::span<const double> wx, std::span<const double> ys,
                    std::span<const double> wy) {
  const double mx = compensated_sum(wx);
  const double my = compensated_sum(wy);
  std::vector<std::pair<double, double>> events;
  events.reserve(xs.size() + ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) events.emplace_back(xs[i], wx[i] / mx);
  for (std::size_t i = 0; i < ys.size(); ++i) events.emplace_back(ys[i], -wy[i] / my);
  std::sort(events.begin(), events.end());
  double diff = 0.0;  // F - G
  double area = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    diff += events[i].second;
    if (i + 1 < events.size()) area += std::abs(diff) * (events[i + 1].first - events[i].first);
  }
  return area;
}

double weak_star_distance(const StateTaggedMeasure& mu, const StateTaggedMeasure& nu) {
  if (mu.k() != nu.k()) throw Error(Errc::invalid_argument, "measures have different state counts");
  const auto k = static_cast<std::size_t>(mu.k());
  const auto mm = mu.masses();
  const auto nm = nu.masses();
  std::size_t dim = 0;
  for (const auto* m : {&mu, &nu})
    if (m->size() > 0) dim = m->particles().front().x.size();

  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    total += std::abs(mm[j] - nm[j]);
    const double shared = std::min(mm[j], nm[j]);
    if (!(shared > 0.0)) continue;
    double transport = 0.0;
    for (std::size_t s = 0; s < dim; ++s) {
      std::vector<double> xs, wx, ys, wy;
      for (const auto& p : mu.particles())
        if (static_cast<std::size_t>(p.state) == j) {
          xs.push_back(p.x[s]);
          wx.push_back(p.weight);
        }
      for (const auto& p : nu.particles())
        if (static_cast<std::size_t>(p.state) == j) {
          ys.push_back(p.x[s]);
          wy.push_back(p.weight);
        }
      transport += wasserstein1(xs, wx, ys, wy);
    }
    total += shared * transport;
  }
  return total;
}

std::vector<StabilityRow> stability_experiment(const MapSystem& sys, std::span<const StateTaggedMeasure> initials,
                                               const StateTaggedMeasure& target, const StabilityOptions& options) {
  const auto& shift = sys.shift();
  if (!shift.primitive())
    throw Error(Errc::not_primitive, "transition matrix is " + std::string(to_string(shift.classification)));
  std::vector<StabilityRow> rows;
  auto record = [&](std::size_t step, std::size_t id, const StateTaggedMeasure& mu, const std::vector<double>& expected) {
    StabilityRow row;
    row.step = step;
    row.initial_id = id;
    row.masses = mu.masses();
    for (std::size_t i = 0; i < row.masses.size(); ++i) {
      row.mass_gap = std::max(row.mass_gap, std::abs(row.masses[i] - shift.stationary[i]));
      row.mass_error = std::max(row.mass_error, std::abs(row.masses[i] - expected[i]));
    }
    row.distance = weak_star_distance(mu, target);
    rows.push_back(std::move(row));
  };
  for (std::size_t id = 0; id < initials.size(); ++id) {
    auto mu = initials[id];
    mu.validate(sys.ambient());
    auto expected = mu.masses();
    record(0, id, mu, expected);
    for (std::size_t n = 1; n <= options.steps; ++n) {
      mu = apply_operator(mu, sys);
      mu = resample(mu, options.particles, options.seed + id * (options.steps + 1) + n);
      expected = propagate_masses(shift.forward, expected, 1);
      record(n, id, mu, expected);
    }
  }
  return rows;
}

std::vector<StateTaggedMeasure> default_initial_measures(const MapSystem& sys) {
  const int k = sys.k();
  std::vector<StateTaggedMeasure> out;
  out.push_back(StateTaggedMeasure::dirac(k, 0, sys.ambient().lo()));
  out.push_back(StateTaggedMeasure::dirac(k, k - 1, sys.ambient().hi()));
  const auto cloud = PointCloud::sample_box(sys.ambient(), 64);
  std::vector<Particle> spread;
  const double w = 1.0 / static_cast<double>(cloud.size() * static_cast<std::size_t>(k));
  for (Symbol j = 0; j < k; ++j)
    for (std::size_t i = 0; i < cloud.size(); ++i) spread.push_back({j, cloud.point(i), w});
  out.emplace_back(k, std::move(spread));
  return out;
}

}  // namespace mrp
