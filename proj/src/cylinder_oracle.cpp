#include "mrp/cylinder_oracle.hpp"

#include <algorithm>
#include <unordered_set>

#include "mrp/parallel.hpp"

namespace mrp {

namespace {

// Probabilities compared in double carry rounding from long products.
constexpr double kDoubleSlack = 1e-12;

bool leq(double a, double b) { return a <= b + kDoubleSlack; }
bool leq(const Rational& a, const Rational& b) { return a <= b; }

// Closed-interval membership. Double endpoints that should equal x exactly
// may round to either side; widening keeps the enumerated set a superset.
bool covers(const Interval& r, double x) { return r.lo - kDoubleSlack <= x && x <= r.hi + kDoubleSlack; }
bool covers(const BasicInterval<Rational>& r, const Rational& x) { return r.contains(x); }

std::uint64_t power_within(std::uint64_t base, std::size_t exp, const char* what) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > kEnumerationBudget / std::max<std::uint64_t>(base, 1))
      throw Error(Errc::budget_exceeded, std::string(what) + ": k^n exceeds the 2^24 word budget");
    out *= base;
  }
  if (out > kEnumerationBudget)
    throw Error(Errc::budget_exceeded, std::string(what) + ": k^n exceeds the 2^24 word budget");
  return out;
}

template <class T>
struct Leaf {
  std::uint64_t code;
  T measure;
  BasicInterval<T> projection;
};

// Visits every length-n word of positive inverse measure with its measure and
// the s-projection of f_{w0} o ... o f_{w(n-1)}(M). The innermost symbol is
// chosen first so each node costs one box image.
template <class T, class Visit>
void enumerate_cylinders(const OracleSystem<T>& sys, std::size_t n, std::size_t s, Visit&& visit) {
  const int k = sys.k();
  const auto& q = sys.shift.inverse;
  std::vector<Symbol> w(n);
  if (n == 0) {
    visit(w, T(1), sys.ambient[s]);
    return;
  }
  auto rec = [&](auto&& self, std::size_t j, const BasicBox<T>& box, const T& tail) -> void {
    if (j == 0) {
      const T measure = sys.shift.stationary[static_cast<std::size_t>(w[0])] * tail;
      if (measure > 0) visit(w, measure, box[s]);
      return;
    }
    for (Symbol a = 0; a < k; ++a) {
      if (!(q(a, w[j]) > 0)) continue;
      w[j - 1] = a;
      self(self, j - 1, box_image(sys.maps[static_cast<std::size_t>(a)], box), T(tail * q(a, w[j])));
    }
  };
  for (Symbol a = 0; a < k; ++a) {
    w[n - 1] = a;
    rec(rec, n - 1, box_image(sys.maps[static_cast<std::size_t>(a)], sys.ambient), T(1));
  }
}

std::uint64_t encode(std::span<const Symbol> w, int k) {
  std::uint64_t code = 0;
  for (Symbol s : w) code = code * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(s);
  return code;
}

Word decode(std::uint64_t code, std::size_t n, int k) {
  std::vector<Symbol> w(n);
  for (std::size_t i = n; i-- > 0;) {
    w[i] = static_cast<Symbol>(code % static_cast<std::uint64_t>(k));
    code /= static_cast<std::uint64_t>(k);
  }
  return Word(std::move(w));
}

template <class T>
T inverse_measure(const BasicMarkovShift<T>& shift, const Word& w) {
  return cylinder_measure(shift, w, Direction::inverse);
}

template <class T>
BasicMarkovShift<T> pick_shift(const MapSystem& sys);

template <>
BasicMarkovShift<double> pick_shift(const MapSystem& sys) {
  return sys.shift();
}

template <>
BasicMarkovShift<Rational> pick_shift(const MapSystem& sys) {
  return sys.exact_shift();
}

}  // namespace

OracleSystem<double> make_oracle_system(const MapSystem& sys) {
  return {sys.maps(), sys.ambient(), pick_shift<double>(sys)};
}

OracleSystem<Rational> make_exact_oracle_system(const MapSystem& sys) {
  return {sys.exact_maps(), sys.exact_ambient(), pick_shift<Rational>(sys)};
}

template <class T>
T measure_S(const OracleSystem<T>& sys, const T& x, std::size_t s, std::size_t n) {
  if (s >= sys.dim()) throw Error(Errc::invalid_argument, "coordinate out of range");
  if (!sys.ambient[s].contains(x)) throw Error(Errc::outside_domain, "x is not in the projection of M");
  power_within(static_cast<std::uint64_t>(sys.k()), n, "measure_S");
  T total = 0;
  enumerate_cylinders(sys, n, s, [&](const std::vector<Symbol>&, const T& measure, const BasicInterval<T>& proj) {
    if (covers(proj, x)) total += measure;
  });
  return total;
}

template <class T>
T measure_sigma(const BasicMarkovShift<T>& shift, const Word& w, std::size_t ell) {
  const auto n = w.size();
  if (n == 0) throw Error(Errc::length_mismatch, "the avoided block must be nonempty");
  const int k = shift.size();
  w.check_alphabet(k);
  const auto& q = shift.inverse;

  // Every block other than w with its internal transition product.
  struct Block {
    Symbol first, last;
    T inner;
  };
  std::vector<Block> blocks;
  const auto count = power_within(static_cast<std::uint64_t>(k), n, "measure_sigma");
  for (std::uint64_t code = 0; code < count; ++code) {
    const auto b = decode(code, n, k);
    if (b == w) continue;
    T inner = 1;
    for (std::size_t i = 0; i + 1 < n && inner > 0; ++i) inner *= q(b[i], b[i + 1]);
    if (inner > 0) blocks.push_back({b.front(), b.back(), inner});
  }

  // mass[j]: measure of the admissible block sequences so far ending in j.
  std::vector<T> mass(static_cast<std::size_t>(k), T(0));
  if (ell == 0) return T(1);
  for (const auto& b : blocks) mass[static_cast<std::size_t>(b.last)] += shift.stationary[static_cast<std::size_t>(b.first)] * b.inner;
  for (std::size_t level = 1; level < ell; ++level) {
    std::vector<T> next(static_cast<std::size_t>(k), T(0));
    for (const auto& b : blocks)
      for (int last = 0; last < k; ++last) {
        const T& m = mass[static_cast<std::size_t>(last)];
        if (m > 0 && q(last, b.first) > 0) next[static_cast<std::size_t>(b.last)] += m * q(last, b.first) * b.inner;
      }
    mass = std::move(next);
  }
  T total = 0;
  for (const auto& m : mass) total += m;
  return total;
}

Word substitute_F(const Word& c, const Word& w, const Word& w_prime) {
  const auto n = w.size();
  if (n == 0 || w_prime.size() != n)
    throw Error(Errc::length_mismatch, "W and W' must be nonempty words of equal length");
  if (c.size() % n != 0)
    throw Error(Errc::length_mismatch, "word length " + std::to_string(c.size()) + " is not a multiple of " +
                                           std::to_string(n));
  std::vector<Symbol> out;
  out.reserve(c.size());
  for (std::size_t pos = 0; pos < c.size(); pos += n) {
    const auto block = c.slice(pos, n);
    const auto& use = block == w ? w_prime : block;
    out.insert(out.end(), use.begin(), use.end());
  }
  return Word(std::move(out));
}

template <class T>
std::vector<T> x_grid(const BasicBox<T>& ambient, std::size_t s, std::size_t points) {
  if (s >= ambient.dim()) throw Error(Errc::invalid_argument, "coordinate out of range");
  const auto& r = ambient[s];
  if (points < 2) return {r.lo};
  std::vector<T> grid;
  grid.reserve(points);
  const T steps = T(static_cast<long>(points - 1));
  for (std::size_t i = 0; i + 1 < points; ++i) grid.push_back(T(r.lo + T(static_cast<long>(i)) * (r.hi - r.lo) / steps));
  grid.push_back(r.hi);
  return grid;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::holds_relaxed: return "holds (upper-bound relaxation)";
    case Verdict::fails: return "fails";
  }
  return "?";
}

template <class T>
Verdict OracleRow<T>::verdict() const {
  if (!ok()) return Verdict::fails;
  return exact_enclosure ? Verdict::holds : Verdict::holds_relaxed;
}

template <class T>
bool OracleReport<T>::all_hold() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.ok(); }) &&
         std::all_of(geometric.begin(), geometric.end(), [](const auto& g) { return g.holds; });
}

template <class T>
T geometric_rho(const BasicMarkovShift<T>& shift, const Word& w) {
  const auto& q = shift.inverse;
  T inner = 1;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) inner *= q(w[i], w[i + 1]);
  T best = q(0, w.front());
  for (int j = 1; j < shift.size(); ++j)
    if (q(j, w.front()) < best) best = q(j, w.front());
  return T(best * inner);
}

template <class T>
OracleReport<T> verify_bounds(const OracleSystem<T>& sys, const NormalizedPair& pair, const std::vector<T>& grid,
                              std::size_t s, const OracleOptions& options) {
  const int k = sys.k();
  if (pair.xi.size() != pair.eta.size() || pair.xi.empty())
    throw Error(Errc::length_mismatch, "normalized words must be nonempty and of equal length");
  pair.xi.check_alphabet(k);
  pair.eta.check_alphabet(k);
  if (s >= sys.dim()) throw Error(Errc::invalid_argument, "coordinate out of range");
  if (pair.xi.front() != pair.eta.front())
    throw Error(Errc::hypothesis_violated, "normalized words must share their first symbol");

  OracleReport<T> report;
  report.s = s;
  report.w = pair.xi;
  report.w_prime = pair.eta;
  report.measure_w = inverse_measure(sys.shift, pair.xi);
  report.measure_w_prime = inverse_measure(sys.shift, pair.eta);
  if (report.measure_w_prime < report.measure_w) {
    std::swap(report.w, report.w_prime);
    std::swap(report.measure_w, report.measure_w_prime);
    report.swapped = true;
  }
  if (!(report.measure_w > 0)) throw Error(Errc::hypothesis_violated, "P^-(W) = 0");
  {
    const auto mw = reverse_enclosure(std::span<const BasicMap<T>>(sys.maps), sys.ambient, report.w);
    const auto mp = reverse_enclosure(std::span<const BasicMap<T>>(sys.maps), sys.ambient, report.w_prime);
    for (std::size_t c = 0; c < sys.dim(); ++c)
      if (mw[c].meets(mp[c]))
        throw Error(Errc::hypothesis_violated, "reverse images of " + report.w.to_string() + " and " +
                                                   report.w_prime.to_string() + " meet in coordinate " +
                                                   std::to_string(c + 1));
  }

  const auto n_block = report.w.size();
  const bool exact = sys.dim() == 1;
  for (std::size_t ell = 1; ell <= options.ell_max; ++ell) {
    const auto n = ell * n_block;
    const auto words = power_within(static_cast<std::uint64_t>(k), n, "verify_bounds");
    std::vector<Leaf<T>> leaves;
    enumerate_cylinders(sys, n, s, [&](const std::vector<Symbol>& w, const T& measure, const BasicInterval<T>& proj) {
      leaves.push_back({encode(w, k), measure, proj});
    });
    const T rhs = measure_sigma(sys.shift, report.w, ell);

    std::vector<OracleRow<T>> rows(grid.size());
    parallel_for(grid.size(), options.threads, [&](std::size_t g) {
      auto& row = rows[g];
      row.ell = ell;
      row.x = grid[g];
      row.rhs = rhs;
      row.words = words;
      row.exact_enclosure = exact;
      row.injective = true;
      row.measure_monotone = true;
      T lhs = 0;
      std::unordered_set<std::uint64_t> images;
      for (const auto& leaf : leaves) {
        if (!covers(leaf.projection, row.x)) continue;
        ++row.members;
        lhs += leaf.measure;
        const auto image = substitute_F(decode(leaf.code, n, k), report.w, report.w_prime);
        if (!images.insert(encode(image.symbols(), k)).second) row.injective = false;
        if (!leq(leaf.measure, inverse_measure(sys.shift, image))) row.measure_monotone = false;
      }
      row.lhs = lhs;
      row.bound_holds = leq(row.lhs, row.rhs);
    });
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }

  report.rho = geometric_rho(sys.shift, report.w);
  report.rho0 = report.rho < report.measure_w ? report.rho : report.measure_w;
  T bound = 1;
  for (std::size_t ell = 1; ell <= options.geometric_ell_max; ++ell) {
    bound *= T(1 - report.rho0);
    GeometricRow<T> g;
    g.ell = ell;
    g.sigma = measure_sigma(sys.shift, report.w, ell);
    g.bound = bound;
    g.holds = leq(g.sigma, g.bound);
    report.geometric.push_back(std::move(g));
  }
  return report;
}

#define MRP_INSTANTIATE(T)                                                                                        \
  template T measure_S(const OracleSystem<T>&, const T&, std::size_t, std::size_t);                             \
  template T measure_sigma(const BasicMarkovShift<T>&, const Word&, std::size_t);                               \
  template std::vector<T> x_grid(const BasicBox<T>&, std::size_t, std::size_t);                                 \
  template struct OracleRow<T>;                                                                                 \
  template struct OracleReport<T>;                                                                              \
  template T geometric_rho(const BasicMarkovShift<T>&, const Word&);                                            \
  template OracleReport<T> verify_bounds(const OracleSystem<T>&, const NormalizedPair&, const std::vector<T>&, \
                                         std::size_t, const OracleOptions&);

MRP_INSTANTIATE(double)
MRP_INSTANTIATE(Rational)

#undef MRP_INSTANTIATE

}  // namespace mrp
