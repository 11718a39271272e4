#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mrp/markov_shift.hpp"

namespace mrp {

template <class T>
using BasicPoint = std::vector<T>;
using Point = BasicPoint<double>;

/// Closed interval. `width` is propagated alongside the endpoints by the
/// image routines: once an interval is far narrower than its position,
/// hi - lo is dominated by rounding while the propagated width keeps full
/// relative precision. In exact arithmetic width == hi - lo.
template <class T>
struct BasicInterval {
  T lo{}, hi{}, width{};

  static BasicInterval from_endpoints(const T& lo, const T& hi) { return {lo, hi, T(hi - lo)}; }
  bool contains(const T& x) const { return lo <= x && x <= hi; }
  /// Closed intervals intersect.
  bool meets(const BasicInterval& other) const { return !(hi < other.lo || other.hi < lo); }
  /// Strict order: sup of this < inf of other.
  bool before(const BasicInterval& other) const { return hi < other.lo; }
};

/// Product of closed intervals with the l1 metric.
template <class T>
class BasicBox {
 public:
  BasicBox() = default;
  explicit BasicBox(std::vector<BasicInterval<T>> coords) : coords_(std::move(coords)) {
    for (std::size_t s = 0; s < coords_.size(); ++s)
      if (coords_[s].hi < coords_[s].lo)
        throw Error(Errc::invalid_argument, "box coordinate " + std::to_string(s + 1) + " has lo > hi");
  }
  BasicBox(const std::vector<T>& lo, const std::vector<T>& hi) {
    if (lo.size() != hi.size() || lo.empty())
      throw Error(Errc::invalid_argument, "box lo/hi must be nonempty vectors of equal length");
    for (std::size_t s = 0; s < lo.size(); ++s) {
      if (hi[s] < lo[s]) throw Error(Errc::invalid_argument, "box coordinate " + std::to_string(s + 1) + " has lo > hi");
      coords_.push_back(BasicInterval<T>::from_endpoints(lo[s], hi[s]));
    }
  }

  std::size_t dim() const noexcept { return coords_.size(); }
  const BasicInterval<T>& operator[](std::size_t s) const { return coords_[s]; }
  const std::vector<BasicInterval<T>>& coords() const noexcept { return coords_; }

  T l1_diameter() const {
    T total = 0;
    for (const auto& c : coords_) total += c.width;
    return total;
  }
  bool contains(const BasicPoint<T>& x) const {
    if (x.size() != coords_.size()) return false;
    for (std::size_t s = 0; s < x.size(); ++s)
      if (!coords_[s].contains(x[s])) return false;
    return true;
  }
  bool contains(const BasicBox& inner) const {
    if (inner.dim() != dim()) return false;
    for (std::size_t s = 0; s < dim(); ++s)
      if (inner[s].lo < coords_[s].lo || coords_[s].hi < inner[s].hi) return false;
    return true;
  }
  BasicPoint<T> center() const {
    BasicPoint<T> c;
    for (const auto& r : coords_) c.push_back(T((r.lo + r.hi) / 2));
    return c;
  }
  BasicPoint<T> lo() const {
    BasicPoint<T> out;
    for (const auto& r : coords_) out.push_back(r.lo);
    return out;
  }
  BasicPoint<T> hi() const {
    BasicPoint<T> out;
    for (const auto& r : coords_) out.push_back(r.hi);
    return out;
  }

 private:
  std::vector<BasicInterval<T>> coords_;
};

using Interval = BasicInterval<double>;
using IntervalBox = BasicBox<double>;
using ExactBox = BasicBox<Rational>;

enum class Sign : signed char { minus = -1, zero = 0, plus = 1 };
char to_char(Sign s);
Sign sign_from_char(char c);

template <class T>
struct AffineMap {
  SquareMatrix<T> matrix;
  std::vector<T> offset;
};

/// x -> (a x + b) / (c x + d) on a 1-D box.
template <class T>
struct MoebiusMap {
  T a, b, c, d;
};

/// A self-map of the ambient box: affine in any dimension or 1-D Moebius.
template <class T>
class BasicMap {
 public:
  using Kind = std::variant<AffineMap<T>, MoebiusMap<T>>;
  using SignTable = std::vector<std::vector<Sign>>;

  static BasicMap affine(SquareMatrix<T> matrix, std::vector<T> offset);
  static BasicMap moebius(T a, T b, T c, T d);

  std::size_t dim() const;
  const Kind& kind() const noexcept { return kind_; }
  bool is_affine() const noexcept { return std::holds_alternative<AffineMap<T>>(kind_); }

  /// Entry (i, j) is the monotonicity sign of coordinate function i in
  /// variable j; zero means no dependence.
  SignTable sign_table() const;
  bool injective() const;

  const std::optional<SignTable>& declared_types() const noexcept { return declared_; }
  void set_declared_types(SignTable table);

  /// Pointwise evaluation, no domain check.
  BasicPoint<T> operator()(const BasicPoint<T>& x) const;
  /// f(x + dx) - f(x), computed from dx directly so that small
  /// displacements keep their relative precision.
  BasicPoint<T> displacement(const BasicPoint<T>& x, const BasicPoint<T>& dx) const;

 private:
  explicit BasicMap(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
  std::optional<SignTable> declared_;
};

using MapSpec = BasicMap<double>;
using ExactMap = BasicMap<Rational>;

MapSpec to_double(const ExactMap& map);

/// Exact coordinate ranges of f(B): for affine maps each coordinate range is
/// b_s + sum_j [min, max](A_sj [lo_j, hi_j]); Moebius maps are monotone on
/// intervals avoiding the pole, so the image lies between endpoint images.
/// Throws DenominatorVanishes when c x + d has a zero in B.
template <class T>
BasicBox<T> box_image(const BasicMap<T>& f, const BasicBox<T>& box);

/// Chained enclosure of f_{w(n-1)} o ... o f_{w0}(start): w0 applied first.
template <class T>
BasicBox<T> forward_enclosure(std::span<const BasicMap<T>> maps, const BasicBox<T>& start, const Word& w);
/// Chained enclosure of f_{w0} o ... o f_{w(n-1)}(start): w(n-1) applied first.
template <class T>
BasicBox<T> reverse_enclosure(std::span<const BasicMap<T>> maps, const BasicBox<T>& start, const Word& w);

/// Ambient box, k maps and the driving Markov shift. Built from exact
/// coefficients; the double view is derived from them. Self-mapping and
/// Moebius pole placement are checked exactly at construction.
class MapSystem {
 public:
  static MapSystem create(ExactBox ambient, std::vector<ExactMap> maps, SquareMatrix<Rational> transition);

  int k() const noexcept { return static_cast<int>(maps_.size()); }
  std::size_t dim() const noexcept { return ambient_.dim(); }
  const IntervalBox& ambient() const noexcept { return ambient_; }
  const ExactBox& exact_ambient() const noexcept { return exact_ambient_; }
  const std::vector<MapSpec>& maps() const noexcept { return maps_; }
  const std::vector<ExactMap>& exact_maps() const noexcept { return exact_maps_; }
  const MapSpec& map(Symbol i) const { return maps_.at(static_cast<std::size_t>(i)); }
  const MarkovShift& shift() const noexcept { return shift_; }

  bool has_exact_shift() const noexcept { return exact_shift_.has_value(); }
  /// Throws ExactModeUnavailable when the rational rows do not sum to one.
  const ExactMarkovShift& exact_shift() const;

 private:
  ExactBox exact_ambient_;
  IntervalBox ambient_;
  std::vector<ExactMap> exact_maps_;
  std::vector<MapSpec> maps_;
  MarkovShift shift_;
  std::optional<ExactMarkovShift> exact_shift_;
};

/// Throws OutsideDomain if x is not in the domain box.
Point evaluate_map(const MapSpec& f, const IntervalBox& domain, const Point& x);

/// f_{w(n-1)} o ... o f_{w0}(x); the empty word returns x.
Point forward_orbit(const MapSystem& sys, const Word& w, const Point& x);
/// f_{w0} o ... o f_{w(n-1)}(x).
Point reverse_composition(const MapSystem& sys, const Word& w, const Point& x);

IntervalBox forward_enclosure(const MapSystem& sys, const Word& w);
IntervalBox reverse_enclosure(const MapSystem& sys, const Word& w);
ExactBox exact_forward_enclosure(const MapSystem& sys, const Word& w);
ExactBox exact_reverse_enclosure(const MapSystem& sys, const Word& w);

/// Finite sample of a set, stored as an anchor point plus displacements so
/// pairwise distances stay accurate far below the anchor's rounding unit.
class PointCloud {
 public:
  /// All 2^m corners of the box followed by a Halton fill of the interior,
  /// `size` points in total (at least the corner count).
  static PointCloud sample_box(const IntervalBox& box, std::size_t size);

  std::size_t size() const noexcept { return offsets_.size(); }
  Point point(std::size_t i) const;
  void apply(const MapSpec& f);
  /// Maximum pairwise l1 distance.
  double l1_diameter() const;
  /// [min, max] of coordinate s over the cloud, with the width taken from
  /// displacements.
  Interval projection(std::size_t s) const;

 private:
  Point anchor_;
  std::vector<Point> offsets_;
};

struct MonotoneType {
  std::vector<Sign> t;
  /// Required sign pattern: entry (i, j) is t_j when t_i = t_1 and -t_j
  /// otherwise.
  std::vector<std::vector<Sign>> required;
  /// Observed sign table of every map.
  std::vector<std::vector<std::vector<Sign>>> tables;

  std::string to_string() const;
};

/// The first class S(t) (t enumerated with + before -) containing every map,
/// admitting sign 0 as a wildcard. A coordinate function independent of
/// every variable disqualifies the system.
std::optional<MonotoneType> classify_monotone_type(const MapSystem& sys);

/// (x, y) in A(t): x_s < y_s where t_s = + and x_s > y_s where t_s = -.
bool in_order_cone(std::span<const Sign> t, const Point& x, const Point& y);

}  // namespace mrp
