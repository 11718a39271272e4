#include "mrp/markov_shift.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace mrp {

// ---------------------------------------------------------------- Word

Word Word::from_one_based(std::span<const int> symbols) {
  std::vector<Symbol> out;
  out.reserve(symbols.size());
  for (int s : symbols) {
    if (s < 1) throw Error(Errc::symbol_out_of_range, "symbols are 1-based, got " + std::to_string(s));
    out.push_back(s - 1);
  }
  return Word(std::move(out));
}

Word Word::parse(std::string_view text) {
  std::vector<int> symbols;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto token = text.substr(0, comma);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      throw Error(Errc::invalid_argument, "bad word symbol '" + std::string(token) + "'");
    symbols.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return from_one_based(symbols);
}

Word Word::reversed() const { return Word(std::vector<Symbol>(symbols_.rbegin(), symbols_.rend())); }

Word Word::slice(std::size_t pos, std::size_t count) const {
  return Word(std::vector<Symbol>(symbols_.begin() + static_cast<std::ptrdiff_t>(pos),
                                  symbols_.begin() + static_cast<std::ptrdiff_t>(pos + count)));
}

Word operator+(const Word& a, const Word& b) {
  std::vector<Symbol> out(a.symbols_);
  out.insert(out.end(), b.symbols_.begin(), b.symbols_.end());
  return Word(std::move(out));
}

std::string Word::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(symbols_[i] + 1);
  }
  return out;
}

std::vector<int> Word::to_one_based() const {
  std::vector<int> out;
  for (Symbol s : symbols_) out.push_back(s + 1);
  return out;
}

void Word::check_alphabet(int k) const {
  for (Symbol s : symbols_)
    if (s < 0 || s >= k)
      throw Error(Errc::symbol_out_of_range,
                  "symbol " + std::to_string(s + 1) + " outside alphabet 1.." + std::to_string(k));
}

// ---------------------------------------------------------------- matrices

namespace {

bool row_sums_to_one(std::span<const double> row) {
  double sum = 0.0;
  for (double v : row) sum += v;
  return std::abs(sum - 1.0) <= kAlgebraTolerance;
}

bool row_sums_to_one(std::span<const Rational> row) {
  Rational sum = 0;
  for (const auto& v : row) sum += v;
  return sum == 1;
}

std::string describe(double v) { return format_double(v); }
std::string describe(const Rational& v) { return to_string(v); }

}  // namespace

template <class T>
BasicTransitionMatrix<T>::BasicTransitionMatrix(SquareMatrix<T> entries) : entries_(std::move(entries)) {
  const auto k = entries_.size();
  if (k == 0) throw Error(Errc::not_stochastic, "transition matrix must have at least one state");
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const T& v = entries_(i, j);
      if (v < 0 || v > 1)
        throw Error(Errc::not_stochastic, "row " + std::to_string(i + 1) + " entry " + std::to_string(j + 1) + " = " +
                                              describe(v) + " outside [0,1]");
    }
    if (!row_sums_to_one(entries_.row(i)))
      throw Error(Errc::not_stochastic, "row " + std::to_string(i + 1) + " does not sum to 1");
  }
}

template <class T>
Pattern BasicTransitionMatrix<T>::pattern() const {
  const auto k = entries_.size();
  Pattern out(k, std::vector<bool>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) out[i][j] = entries_(i, j) > 0;
  return out;
}

std::string_view to_string(MatrixClass c) {
  switch (c) {
    case MatrixClass::primitive: return "primitive";
    case MatrixClass::irreducible_not_primitive: return "irreducible-not-primitive";
    case MatrixClass::reducible: return "reducible";
  }
  return "reducible";
}

namespace {

std::vector<bool> reachable(const Pattern& g, std::size_t from, bool transpose) {
  const auto k = g.size();
  std::vector<bool> seen(k, false);
  std::vector<std::size_t> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < k; ++v) {
      const bool edge = transpose ? g[v][u] : g[u][v];
      if (edge && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

Pattern boolean_product(const Pattern& a, const Pattern& b) {
  const auto k = a.size();
  Pattern out(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t l = 0; l < k; ++l)
      if (a[i][l])
        for (std::size_t j = 0; j < k; ++j)
          if (b[l][j]) out[i][j] = true;
  return out;
}

}  // namespace

bool is_irreducible(const Pattern& pattern) {
  if (pattern.empty()) return false;
  const auto fwd = reachable(pattern, 0, false);
  const auto bwd = reachable(pattern, 0, true);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

MatrixClass classify_pattern(const Pattern& pattern) {
  if (!is_irreducible(pattern)) return MatrixClass::reducible;
  const auto k = pattern.size();
  const std::size_t bound = (k - 1) * (k - 1) + 1;
  Pattern power = pattern;
  std::size_t exponent = 1;
  while (exponent < bound) {
    power = boolean_product(power, power);
    exponent *= 2;
  }
  for (const auto& row : power)
    for (bool b : row)
      if (!b) return MatrixClass::irreducible_not_primitive;
  return MatrixClass::primitive;
}

// ---------------------------------------------------------------- stationary vector

namespace {

double magnitude(double v) { return std::abs(v); }
Rational magnitude(const Rational& v) { return abs(v); }

// Solves A x = b in place; A is square and assumed nonsingular.
template <class T>
std::vector<T> gauss_solve(SquareMatrix<T> a, std::vector<T> b) {
  const auto n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    T best = magnitude(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      T cand = magnitude(a(r, col));
      if (cand > best) {
        best = cand;
        pivot = r;
      }
    }
    if (best == 0) throw Error(Errc::not_irreducible, "singular balance system");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a(r, col) == 0) continue;
      T factor = a(r, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(r, j) -= factor * a(col, j);
      b[r] -= factor * b[col];
    }
  }
  std::vector<T> x(n);
  for (std::size_t i = n; i-- > 0;) {
    T acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
    x[i] = acc / a(i, i);
  }
  return x;
}

}  // namespace

template <class T>
std::vector<T> stationary_vector(const BasicTransitionMatrix<T>& p) {
  if (!is_irreducible(p.pattern()))
    throw Error(Errc::not_irreducible, "positive-entry graph is not strongly connected");
  const auto k = static_cast<std::size_t>(p.size());
  // Column i of (P^T - I) x = 0, last equation replaced by sum x = 1.
  SquareMatrix<T> a(k);
  std::vector<T> rhs(k, T(0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) a(i, j) = p(static_cast<int>(j), static_cast<int>(i)) - (i == j ? T(1) : T(0));
  for (std::size_t j = 0; j < k; ++j) a(k - 1, j) = T(1);
  rhs[k - 1] = T(1);
  auto x = gauss_solve(a, rhs);
  T total = 0;
  for (auto& v : x) {
    if (v < 0) v = 0;
    total += v;
  }
  for (auto& v : x) v /= total;
  return x;
}

template <class T>
BasicTransitionMatrix<T> inverse_transition(const BasicTransitionMatrix<T>& p, std::span<const T> stationary) {
  const int k = p.size();
  if (static_cast<int>(stationary.size()) != k)
    throw Error(Errc::invalid_argument, "stationary vector length does not match matrix");
  for (int i = 0; i < k; ++i)
    if (!(stationary[i] > 0))
      throw Error(Errc::zero_stationary_entry, "stationary entry " + std::to_string(i + 1) + " is zero");
  SquareMatrix<T> q(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) q(i, j) = stationary[j] / stationary[i] * p(j, i);
  if constexpr (std::is_same_v<T, double>) {
    // Rows of Q sum to one only up to the stationary residual; renormalise
    // so the result satisfies the same stochasticity contract as P.
    for (int i = 0; i < k; ++i) {
      double sum = 0.0;
      for (int j = 0; j < k; ++j) sum += q(i, j);
      for (int j = 0; j < k; ++j) q(i, j) = std::min(1.0, q(i, j) / sum);
    }
  }
  return BasicTransitionMatrix<T>(std::move(q));
}

template <class T>
BasicMarkovShift<T> BasicMarkovShift<T>::build(BasicTransitionMatrix<T> p) {
  BasicMarkovShift shift;
  shift.classification = classify_matrix(p);
  shift.stationary = stationary_vector(p);
  shift.inverse = inverse_transition(p, std::span<const T>(shift.stationary));
  shift.forward = std::move(p);
  return shift;
}

template <class T>
T cylinder_measure(const BasicMarkovShift<T>& shift, const Word& w, Direction which) {
  if (w.empty()) return T(1);
  w.check_alphabet(shift.size());
  const auto& m = which == Direction::forward ? shift.forward : shift.inverse;
  T value = shift.stationary[w[0]];
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (!(m(w[i], w[i + 1]) > 0)) return T(0);
    value *= m(w[i], w[i + 1]);
  }
  return value;
}

template class BasicTransitionMatrix<double>;
template class BasicTransitionMatrix<Rational>;
template struct BasicMarkovShift<double>;
template struct BasicMarkovShift<Rational>;
template std::vector<double> stationary_vector(const BasicTransitionMatrix<double>&);
template std::vector<Rational> stationary_vector(const BasicTransitionMatrix<Rational>&);
template BasicTransitionMatrix<double> inverse_transition(const BasicTransitionMatrix<double>&,
                                                          std::span<const double>);
template BasicTransitionMatrix<Rational> inverse_transition(const BasicTransitionMatrix<Rational>&,
                                                            std::span<const Rational>);
template double cylinder_measure(const BasicMarkovShift<double>&, const Word&, Direction);
template Rational cylinder_measure(const BasicMarkovShift<Rational>&, const Word&, Direction);

// ---------------------------------------------------------------- dynamics

std::vector<double> propagate_masses(const TransitionMatrix& p, std::span<const double> masses, int steps) {
  const int k = p.size();
  std::vector<double> current(masses.begin(), masses.end());
  for (int n = 0; n < steps; ++n) {
    std::vector<double> next(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) next[j] += current[i] * p(i, j);
    current = std::move(next);
  }
  return current;
}

Word sample_word(const MarkovShift& shift, std::size_t length, Direction which, std::optional<Symbol> start,
                 Rng& rng) {
  Word w;
  if (length == 0) return w;
  const auto& m = which == Direction::forward ? shift.forward : shift.inverse;
  Symbol s = start ? *start : sample_index(rng, shift.stationary);
  if (s < 0 || s >= shift.size()) throw Error(Errc::symbol_out_of_range, "start state out of range");
  w.push_back(s);
  for (std::size_t i = 1; i < length; ++i) {
    s = sample_index(rng, m.row(s));
    w.push_back(s);
  }
  return w;
}

Word sample_word(const MarkovShift& shift, std::size_t length, Direction which, std::optional<Symbol> start,
                 std::uint64_t seed) {
  auto rng = make_rng(seed);
  return sample_word(shift, length, which, start, rng);
}

MarkovShift to_double(const ExactMarkovShift& exact) {
  const auto k = static_cast<std::size_t>(exact.size());
  auto convert = [k](const ExactTransitionMatrix& m) {
    SquareMatrix<double> out(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) out(i, j) = m(static_cast<int>(i), static_cast<int>(j)).get_d();
    return TransitionMatrix(std::move(out));
  };
  MarkovShift shift;
  shift.forward = convert(exact.forward);
  shift.inverse = convert(exact.inverse);
  for (const auto& v : exact.stationary) shift.stationary.push_back(v.get_d());
  shift.classification = exact.classification;
  return shift;
}

}  // namespace mrp
