#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mrp/map_system.hpp"

namespace mrp {

struct Particle {
  Symbol state = 0;
  Point x;
  double weight = 0.0;
};

/// Weighted particles on {1..k} x M; section j is the sub-measure carried
/// by particles in state j.
class StateTaggedMeasure {
 public:
  StateTaggedMeasure() = default;
  StateTaggedMeasure(int k, std::vector<Particle> particles);
  static StateTaggedMeasure dirac(int k, Symbol state, Point x);

  int k() const noexcept { return k_; }
  std::size_t size() const noexcept { return particles_.size(); }
  const std::vector<Particle>& particles() const noexcept { return particles_; }

  /// Per-state masses mu_j(M), compensated sums.
  std::vector<double> masses() const;
  double total_mass() const;

  /// Throws InvalidArgument unless total weight is 1 within 1e-12 and
  /// weights are positive; OutsideDomain for a point outside `ambient`.
  void validate(const IntervalBox& ambient) const;

  /// Particles ordered by (state, point, weight) for serialization.
  std::vector<Particle> sorted() const;

 private:
  int k_ = 0;
  std::vector<Particle> particles_;
};

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

/// (T mu)_j = sum_i p_ij f_j* mu_i: each particle (i, x, w) spawns
/// (j, f_j(x), w p_ij) for every j with p_ij > 0.
StateTaggedMeasure apply_operator(const StateTaggedMeasure& mu, const MapSystem& sys);

/// Systematic resampling inside each state: counts are allocated in
/// proportion to state mass (largest remainder, at least one per nonempty
/// state) and each copy of state j carries mass_j / n_j.
StateTaggedMeasure resample(const StateTaggedMeasure& mu, std::size_t target_count, std::uint64_t seed);

struct TargetOptions {
  std::size_t samples = 100000;
  std::size_t depth = 64;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Defaults to the centre of the ambient box.
  std::optional<Point> anchor;
};

struct TargetEstimate {
  StateTaggedMeasure measure;
  /// Chained-enclosure l1 diameter of f_{w0} o ... o f_{w(depth-1)}(M) per sample.
  std::vector<double> diameters;
  double max_diameter() const;
};

/// Particles (w0, f_{w0} o ... o f_{w(depth-1)}(anchor), 1/samples) for
/// words w drawn from P^-. Throws NotPrimitive.
TargetEstimate estimate_target(const MapSystem& sys, const TargetOptions& options);

/// Exact 1-D W1 = integral |F - G| between two weighted point sets.
double wasserstein1(std::span<const double> xs, std::span<const double> wx, std::span<const double> ys,
                    std::span<const double> wy);

/// sum_j |mu_j(M) - nu_j(M)| + min(mu_j(M), nu_j(M)) sum_s W1 of the
/// normalized coordinate marginals.
double weak_star_distance(const StateTaggedMeasure& mu, const StateTaggedMeasure& nu);

struct StabilityRow {
  std::size_t step = 0;
  std::size_t initial_id = 0;
  double distance = 0.0;
  /// max_i |mass_i - p_i|.
  double mass_gap = 0.0;
  /// max_i |mass_i - (p_hat P^n)_i| against the initial masses pushed by P.
  double mass_error = 0.0;
  std::vector<double> masses;
};

struct StabilityOptions {
  std::size_t steps = 30;
  std::size_t particles = 100000;
  std::uint64_t seed = 0;
};

/// Iterates apply_operator + resample from every initial measure and records
/// the distance to `target` at each step. Throws NotPrimitive.
std::vector<StabilityRow> stability_experiment(const MapSystem& sys, std::span<const StateTaggedMeasure> initials,
                                               const StateTaggedMeasure& target, const StabilityOptions& options);

/// Three contrasting starting measures: a point mass at the low corner in
/// the first state, a point mass at the high corner in the last state, and
/// a uniform grid of the box spread evenly over the states.
std::vector<StateTaggedMeasure> default_initial_measures(const MapSystem& sys);

}  // namespace mrp
