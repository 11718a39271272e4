#include "mrp/map_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrp {

namespace {

double magnitude(double v) { return std::abs(v); }
Rational magnitude(const Rational& v) { return abs(v); }

template <class T>
Sign sign_of(const T& v) {
  if (v > 0) return Sign::plus;
  if (v < 0) return Sign::minus;
  return Sign::zero;
}

Sign negate(Sign s) { return static_cast<Sign>(-static_cast<signed char>(s)); }

}  // namespace

char to_char(Sign s) {
  switch (s) {
    case Sign::plus: return '+';
    case Sign::minus: return '-';
    case Sign::zero: return '0';
  }
  return '0';
}

Sign sign_from_char(char c) {
  switch (c) {
    case '+': return Sign::plus;
    case '-': return Sign::minus;
    case '0': return Sign::zero;
    default: throw Error(Errc::invalid_argument, std::string("bad sign '") + c + "', expected +, - or 0");
  }
}

// ---------------------------------------------------------------- maps

template <class T>
BasicMap<T> BasicMap<T>::affine(SquareMatrix<T> matrix, std::vector<T> offset) {
  if (matrix.size() == 0 || matrix.size() != offset.size())
    throw Error(Errc::invalid_argument, "affine map needs an m x m matrix and an m-vector offset");
  return BasicMap(AffineMap<T>{std::move(matrix), std::move(offset)});
}

template <class T>
BasicMap<T> BasicMap<T>::moebius(T a, T b, T c, T d) {
  if (a * d - b * c == 0) throw Error(Errc::invalid_argument, "moebius map with ad - bc = 0 is constant");
  return BasicMap(MoebiusMap<T>{std::move(a), std::move(b), std::move(c), std::move(d)});
}

template <class T>
std::size_t BasicMap<T>::dim() const {
  if (const auto* aff = std::get_if<AffineMap<T>>(&kind_)) return aff->matrix.size();
  return 1;
}

template <class T>
typename BasicMap<T>::SignTable BasicMap<T>::sign_table() const {
  if (const auto* aff = std::get_if<AffineMap<T>>(&kind_)) {
    const auto m = aff->matrix.size();
    SignTable table(m, std::vector<Sign>(m));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) table[i][j] = sign_of(aff->matrix(i, j));
    return table;
  }
  const auto& mb = std::get<MoebiusMap<T>>(kind_);
  return SignTable{{sign_of(T(mb.a * mb.d - mb.b * mb.c))}};
}

template <class T>
bool BasicMap<T>::injective() const {
  if (const auto* aff = std::get_if<AffineMap<T>>(&kind_)) {
    // Nonsingular iff elimination finds a full set of pivots.
    SquareMatrix<T> a = aff->matrix;
    const auto n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t pivot = col;
      for (std::size_t r = col; r < n; ++r)
        if (magnitude(a(r, col)) > magnitude(a(pivot, col))) pivot = r;
      if (a(pivot, col) == 0) return false;
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      for (std::size_t r = col + 1; r < n; ++r) {
        T factor = a(r, col) / a(col, col);
        for (std::size_t j = col; j < n; ++j) a(r, j) -= factor * a(col, j);
      }
    }
    return true;
  }
  return true;
}

template <class T>
void BasicMap<T>::set_declared_types(SignTable table) {
  const auto observed = sign_table();
  if (table != observed)
    throw Error(Errc::invalid_argument, "declared_types do not match the signs of the map coefficients");
  declared_ = std::move(table);
}

template <class T>
BasicPoint<T> BasicMap<T>::operator()(const BasicPoint<T>& x) const {
  if (const auto* aff = std::get_if<AffineMap<T>>(&kind_)) {
    const auto m = aff->matrix.size();
    BasicPoint<T> y(m);
    for (std::size_t i = 0; i < m; ++i) {
      T acc = aff->offset[i];
      for (std::size_t j = 0; j < m; ++j) acc += aff->matrix(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  }
  const auto& mb = std::get<MoebiusMap<T>>(kind_);
  return {T((mb.a * x[0] + mb.b) / (mb.c * x[0] + mb.d))};
}

template <class T>
BasicPoint<T> BasicMap<T>::displacement(const BasicPoint<T>& x, const BasicPoint<T>& dx) const {
  if (const auto* aff = std::get_if<AffineMap<T>>(&kind_)) {
    const auto m = aff->matrix.size();
    BasicPoint<T> dy(m);
    for (std::size_t i = 0; i < m; ++i) {
      T acc = 0;
      for (std::size_t j = 0; j < m; ++j) acc += aff->matrix(i, j) * dx[j];
      dy[i] = acc;
    }
    return dy;
  }
  // f(x+h) - f(x) = (ad - bc) h / ((cx + d)(c(x+h) + d))
  const auto& mb = std::get<MoebiusMap<T>>(kind_);
  const T det = mb.a * mb.d - mb.b * mb.c;
  const T d0 = mb.c * x[0] + mb.d;
  const T d1 = mb.c * (x[0] + dx[0]) + mb.d;
  return {T(det * dx[0] / (d0 * d1))};
}

template class BasicMap<double>;
template class BasicMap<Rational>;

MapSpec to_double(const ExactMap& map) {
  MapSpec out = [&] {
    if (const auto* aff = std::get_if<AffineMap<Rational>>(&map.kind())) {
      const auto m = aff->matrix.size();
      SquareMatrix<double> a(m);
      std::vector<double> b(m);
      for (std::size_t i = 0; i < m; ++i) {
        b[i] = aff->offset[i].get_d();
        for (std::size_t j = 0; j < m; ++j) a(i, j) = aff->matrix(i, j).get_d();
      }
      return MapSpec::affine(std::move(a), std::move(b));
    }
    const auto& mb = std::get<MoebiusMap<Rational>>(map.kind());
    return MapSpec::moebius(mb.a.get_d(), mb.b.get_d(), mb.c.get_d(), mb.d.get_d());
  }();
  if (map.declared_types()) out.set_declared_types(*map.declared_types());
  return out;
}

// ---------------------------------------------------------------- images

template <class T>
BasicBox<T> box_image(const BasicMap<T>& f, const BasicBox<T>& box) {
  if (f.dim() != box.dim()) throw Error(Errc::invalid_argument, "map and box dimensions differ");
  std::vector<BasicInterval<T>> out;
  if (const auto* aff = std::get_if<AffineMap<T>>(&f.kind())) {
    const auto m = box.dim();
    out.reserve(m);
    for (std::size_t s = 0; s < m; ++s) {
      T lo = aff->offset[s];
      T hi = aff->offset[s];
      T width = 0;
      for (std::size_t j = 0; j < m; ++j) {
        const T& a = aff->matrix(s, j);
        if (a == 0) continue;
        T at_lo = a * box[j].lo;
        T at_hi = a * box[j].hi;
        if (a > 0) {
          lo += at_lo;
          hi += at_hi;
        } else {
          lo += at_hi;
          hi += at_lo;
        }
        width += magnitude(a) * box[j].width;
      }
      out.push_back({lo, hi, width});
    }
    return BasicBox<T>(std::move(out));
  }
  const auto& mb = std::get<MoebiusMap<T>>(f.kind());
  const auto& in = box[0];
  const T den_lo = mb.c * in.lo + mb.d;
  const T den_hi = mb.c * in.hi + mb.d;
  if (!(den_lo * den_hi > 0)) throw Error(Errc::denominator_vanishes, "moebius pole inside the box");
  const T y_lo = (mb.a * in.lo + mb.b) / den_lo;
  const T y_hi = (mb.a * in.hi + mb.b) / den_hi;
  const T det = mb.a * mb.d - mb.b * mb.c;
  T width = magnitude(det) * in.width / magnitude(T(den_lo * den_hi));
  if (y_lo <= y_hi)
    out.push_back({y_lo, y_hi, width});
  else
    out.push_back({y_hi, y_lo, width});
  return BasicBox<T>(std::move(out));
}

template <class T>
BasicBox<T> forward_enclosure(std::span<const BasicMap<T>> maps, const BasicBox<T>& start, const Word& w) {
  BasicBox<T> box = start;
  for (Symbol s : w) box = box_image(maps[static_cast<std::size_t>(s)], box);
  return box;
}

template <class T>
BasicBox<T> reverse_enclosure(std::span<const BasicMap<T>> maps, const BasicBox<T>& start, const Word& w) {
  BasicBox<T> box = start;
  for (auto it = w.symbols().rbegin(); it != w.symbols().rend(); ++it)
    box = box_image(maps[static_cast<std::size_t>(*it)], box);
  return box;
}

template BasicBox<double> box_image(const BasicMap<double>&, const BasicBox<double>&);
template BasicBox<Rational> box_image(const BasicMap<Rational>&, const BasicBox<Rational>&);
template BasicBox<double> forward_enclosure(std::span<const BasicMap<double>>, const BasicBox<double>&, const Word&);
template BasicBox<Rational> forward_enclosure(std::span<const BasicMap<Rational>>, const BasicBox<Rational>&,
                                              const Word&);
template BasicBox<double> reverse_enclosure(std::span<const BasicMap<double>>, const BasicBox<double>&, const Word&);
template BasicBox<Rational> reverse_enclosure(std::span<const BasicMap<Rational>>, const BasicBox<Rational>&,
                                              const Word&);

// ---------------------------------------------------------------- system

MapSystem MapSystem::create(ExactBox ambient, std::vector<ExactMap> maps, SquareMatrix<Rational> transition) {
  if (maps.empty()) throw Error(Errc::invalid_argument, "a map system needs at least one map");
  if (transition.size() != maps.size())
    throw Error(Errc::invalid_argument, "transition matrix is " + std::to_string(transition.size()) + "x" +
                                            std::to_string(transition.size()) + " but there are " +
                                            std::to_string(maps.size()) + " maps");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].dim() != ambient.dim())
      throw Error(Errc::invalid_argument, "map " + std::to_string(i + 1) + " has the wrong dimension");
    const auto image = box_image(maps[i], ambient);
    if (!ambient.contains(image))
      throw Error(Errc::not_self_map, "map " + std::to_string(i + 1) + " does not send the ambient box into itself");
  }

  MapSystem sys;
  const auto k = transition.size();
  SquareMatrix<double> approx(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) approx(i, j) = transition(i, j).get_d();

  bool exact_rows = true;
  for (std::size_t i = 0; i < k && exact_rows; ++i) {
    Rational sum = 0;
    for (const auto& v : transition.row(i)) sum += v;
    exact_rows = sum == 1;
  }
  if (exact_rows) {
    sys.exact_shift_ = ExactMarkovShift::build(ExactTransitionMatrix(std::move(transition)));
    sys.shift_ = to_double(*sys.exact_shift_);
  } else {
    sys.shift_ = MarkovShift::build(TransitionMatrix(std::move(approx)));
  }

  for (const auto& m : maps) sys.maps_.push_back(to_double(m));
  std::vector<Interval> coords;
  for (const auto& r : ambient.coords()) coords.push_back(Interval::from_endpoints(r.lo.get_d(), r.hi.get_d()));
  sys.ambient_ = IntervalBox(std::move(coords));
  sys.exact_ambient_ = std::move(ambient);
  sys.exact_maps_ = std::move(maps);
  return sys;
}

const ExactMarkovShift& MapSystem::exact_shift() const {
  if (!exact_shift_)
    throw Error(Errc::exact_mode_unavailable, "transition rows do not sum to exactly one in rational arithmetic");
  return *exact_shift_;
}

Point evaluate_map(const MapSpec& f, const IntervalBox& domain, const Point& x) {
  if (!domain.contains(x)) throw Error(Errc::outside_domain, "point outside the ambient box");
  return f(x);
}

Point forward_orbit(const MapSystem& sys, const Word& w, const Point& x) {
  if (!sys.ambient().contains(x)) throw Error(Errc::outside_domain, "point outside the ambient box");
  w.check_alphabet(sys.k());
  Point y = x;
  for (Symbol s : w) y = sys.map(s)(y);
  return y;
}

Point reverse_composition(const MapSystem& sys, const Word& w, const Point& x) {
  if (!sys.ambient().contains(x)) throw Error(Errc::outside_domain, "point outside the ambient box");
  w.check_alphabet(sys.k());
  Point y = x;
  for (auto it = w.symbols().rbegin(); it != w.symbols().rend(); ++it) y = sys.map(*it)(y);
  return y;
}

IntervalBox forward_enclosure(const MapSystem& sys, const Word& w) {
  w.check_alphabet(sys.k());
  return forward_enclosure(std::span<const MapSpec>(sys.maps()), sys.ambient(), w);
}

IntervalBox reverse_enclosure(const MapSystem& sys, const Word& w) {
  w.check_alphabet(sys.k());
  return reverse_enclosure(std::span<const MapSpec>(sys.maps()), sys.ambient(), w);
}

ExactBox exact_forward_enclosure(const MapSystem& sys, const Word& w) {
  w.check_alphabet(sys.k());
  return forward_enclosure(std::span<const ExactMap>(sys.exact_maps()), sys.exact_ambient(), w);
}

ExactBox exact_reverse_enclosure(const MapSystem& sys, const Word& w) {
  w.check_alphabet(sys.k());
  return reverse_enclosure(std::span<const ExactMap>(sys.exact_maps()), sys.exact_ambient(), w);
}

// ---------------------------------------------------------------- point clouds

namespace {

double radical_inverse(std::size_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

PointCloud PointCloud::sample_box(const IntervalBox& box, std::size_t size) {
  const auto m = box.dim();
  if (m > 16) throw Error(Errc::invalid_argument, "point clouds support at most 16 dimensions");
  PointCloud cloud;
  cloud.anchor_ = box.lo();
  const std::size_t corners = std::size_t{1} << m;
  for (std::size_t c = 0; c < corners; ++c) {
    Point off(m);
    for (std::size_t s = 0; s < m; ++s) off[s] = (c >> s) & 1u ? box[s].width : 0.0;
    cloud.offsets_.push_back(std::move(off));
  }
  for (std::size_t i = 1; cloud.offsets_.size() < size; ++i) {
    Point off(m);
    for (std::size_t s = 0; s < m; ++s) off[s] = radical_inverse(i, kPrimes[s]) * box[s].width;
    cloud.offsets_.push_back(std::move(off));
  }
  return cloud;
}

Point PointCloud::point(std::size_t i) const {
  Point p = anchor_;
  for (std::size_t s = 0; s < p.size(); ++s) p[s] += offsets_[i][s];
  return p;
}

void PointCloud::apply(const MapSpec& f) {
  for (auto& off : offsets_) off = f.displacement(anchor_, off);
  anchor_ = f(anchor_);
}

double PointCloud::l1_diameter() const {
  // max_{i,j} sum_s |x_is - x_js| = max over sign vectors of the spread of
  // the signed coordinate sum.
  const auto m = anchor_.size();
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); mask += 2) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& off : offsets_) {
      double v = 0.0;
      for (std::size_t s = 0; s < m; ++s) v += (mask >> s) & 1u ? -off[s] : off[s];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    best = std::max(best, hi - lo);
  }
  return best;
}

Interval PointCloud::projection(std::size_t s) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& off : offsets_) {
    lo = std::min(lo, off[s]);
    hi = std::max(hi, off[s]);
  }
  return {anchor_[s] + lo, anchor_[s] + hi, hi - lo};
}

// ---------------------------------------------------------------- monotone classes

std::string MonotoneType::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ',';
    out += to_char(t[i]);
  }
  return out + ")";
}

std::optional<MonotoneType> classify_monotone_type(const MapSystem& sys) {
  const auto m = sys.dim();
  MonotoneType result;
  for (const auto& f : sys.exact_maps()) {
    auto table = f.sign_table();
    for (const auto& row : table)
      if (std::all_of(row.begin(), row.end(), [](Sign s) { return s == Sign::zero; })) return std::nullopt;
    result.tables.push_back(std::move(table));
  }
  if (m > 20) return std::nullopt;
  for (std::size_t bits = 0; bits < (std::size_t{1} << m); ++bits) {
    std::vector<Sign> t(m);
    for (std::size_t j = 0; j < m; ++j) t[j] = (bits >> (m - 1 - j)) & 1u ? Sign::minus : Sign::plus;
    std::vector<std::vector<Sign>> required(m, std::vector<Sign>(m));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) required[i][j] = t[i] == t[0] ? t[j] : negate(t[j]);
    const bool fits = std::all_of(result.tables.begin(), result.tables.end(), [&](const auto& table) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (table[i][j] != Sign::zero && table[i][j] != required[i][j]) return false;
      return true;
    });
    if (fits) {
      result.t = std::move(t);
      result.required = std::move(required);
      return result;
    }
  }
  return std::nullopt;
}

bool in_order_cone(std::span<const Sign> t, const Point& x, const Point& y) {
  for (std::size_t s = 0; s < t.size(); ++s) {
    if (t[s] == Sign::plus && !(x[s] < y[s])) return false;
    if (t[s] == Sign::minus && !(x[s] > y[s])) return false;
  }
  return true;
}

}  // namespace mrp
