#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrp/map_system.hpp"
#include "mrp/operator_lab.hpp"

namespace mrp {

/// diam f^n_w(M) bracketed from above by the chained enclosure and from
/// below by a tracked point cloud.
struct DecayCurve {
  std::vector<std::size_t> n;
  std::vector<double> upper;
  std::vector<double> lower;
};

DecayCurve image_diameter_curve(const MapSystem& sys, const Word& omega, std::size_t n_max,
                                std::size_t cloud_size = 256);

struct DecayFit {
  double c = 0.0;
  double q = 0.0;
  /// Leading entries used by the fit.
  std::size_t points = 0;
};

inline constexpr double kFitFloor = 1e-14;

/// Least squares of log(values[n]) against n over the leading run of
/// entries above 1e-14; q = exp(slope), C = exp(intercept). Throws
/// DegenerateCurve with fewer than 3 usable points.
DecayFit fit_decay_rate(std::span<const double> values);

struct SyncOptions {
  std::size_t trials = 100;
  std::size_t n_max = 30;
  std::uint64_t seed = 0;
  std::size_t cloud_size = 256;
  unsigned threads = 1;
};

struct SyncTrial {
  std::size_t trial = 0;
  Word omega;
  DecayCurve curve;
  std::optional<DecayFit> fit;
};

struct SyncSummary {
  std::vector<SyncTrial> trials;
  double max_q = 0.0;
  double fraction_contracting = 0.0;
};

/// Words drawn from P, one decay curve and fit per trial. Throws NoRowPositiveState.
SyncSummary sync_experiment(const MapSystem& sys, const SyncOptions& options);

struct ContractionTrial {
  std::size_t trial = 0;
  /// lengths[s][n] = Lebesgue length of pi_s of the chained enclosure of f^n_w(M).
  std::vector<std::vector<double>> lengths;
  std::vector<std::optional<DecayFit>> fits;
};

/// Lebesgue measure of each coordinate projection along words drawn from P.
std::vector<ContractionTrial> measure_contraction_experiment(const MapSystem& sys, const SyncOptions& options);

struct WeakHyperbolicityResult {
  std::size_t trials = 0;
  std::size_t below_tol = 0;
  double max_diameter = 0.0;
  double fraction() const { return trials ? static_cast<double>(below_tol) / static_cast<double>(trials) : 0.0; }
};

struct WeakHyperbolicityOptions {
  std::size_t trials = 10000;
  std::size_t depth = 40;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Fraction of words xi_0..xi_depth drawn from P^- whose chained enclosure
/// of f_{xi0} o ... o f_{xi_depth}(M) has l1 diameter below tol.
WeakHyperbolicityResult weak_hyperbolicity_experiment(const MapSystem& sys, const WeakHyperbolicityOptions& options);

struct CodingPoint {
  Point point;
  /// l1 diameter of the chained enclosure containing every extension's image,
  /// plus a rounding allowance of 8 n eps times the box scale.
  double bound = 0.0;
};

/// f_{w0} o ... o f_{w(n-1)}(anchor) with the enclosure diameter as error
/// bound. The anchor defaults to the box centre.
CodingPoint coding_point(const MapSystem& sys, const Word& omega, std::optional<Point> anchor = std::nullopt);

/// Coding point of the periodic sequence (period)^infinity: the fixed point
/// of f_{period0} o ... o f_{period(p-1)}, solved in exact arithmetic.
/// Affine systems only; throws InvalidArgument otherwise or when the fixed
/// point is not unique.
Point periodic_coding_point(const MapSystem& sys, const Word& period);

struct Observable {
  enum class Kind { coordinate, square, product, constant };
  Kind kind = Kind::coordinate;
  std::size_t s = 0, t = 0;
  double value = 0.0;

  double operator()(const Point& x) const;
  /// "coord:S", "square:S", "product:S,T" (1-based) or "const:C".
  static Observable parse(const std::string& text);
  std::string to_string() const;
};

struct ErgodicOptions {
  std::size_t steps = 1000000;
  std::size_t batches = 100;
  std::uint64_t seed = 0;
  /// Reference estimate of the integral against pi_* P^-.
  TargetOptions target;
};

struct ErgodicResult {
  double time_average = 0.0;
  /// Batch-means standard error of the time average.
  double std_error = 0.0;
  double reference = 0.0;
  double reference_error = 0.0;
};

/// Birkhoff average of phi along f^i_w(x), i < steps, for one w drawn from
/// P (the same w for a given seed), against the integral of phi under the
/// estimated stationary law. Throws NotPrimitive.
ErgodicResult ergodic_average(const MapSystem& sys, const Point& x, const Observable& phi,
                              const ErgodicOptions& options);

/// Time average and batch-means error only.
std::pair<double, double> birkhoff_average(const MapSystem& sys, const Point& x, const Observable& phi,
                                           std::size_t steps, std::size_t batches, std::uint64_t seed);

/// Weighted mean of phi over a particle measure and its standard error.
std::pair<double, double> measure_mean(const StateTaggedMeasure& mu, const Observable& phi);

}  // namespace mrp
