#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrp/error.hpp"
#include "mrp/random.hpp"
#include "mrp/rational.hpp"

namespace mrp {

/// Symbols are stored 0-based; text forms (config files, reports) are 1-based.
using Symbol = int;

/// Finite symbol sequence, the index of a cylinder [w0 ... w(n-1)].
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}
  Word(std::initializer_list<Symbol> symbols) : symbols_(symbols) {}

  /// Builds a word from 1-based symbols, e.g. {1, 2, 1}.
  static Word from_one_based(std::span<const int> symbols);
  static Word from_one_based(std::initializer_list<int> symbols) {
    return from_one_based(std::span<const int>(symbols.begin(), symbols.size()));
  }
  /// Parses "1,2,1". The empty string is the empty word.
  static Word parse(std::string_view text);

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  Symbol front() const { return symbols_.front(); }
  Symbol back() const { return symbols_.back(); }
  const std::vector<Symbol>& symbols() const noexcept { return symbols_; }
  auto begin() const { return symbols_.begin(); }
  auto end() const { return symbols_.end(); }

  void push_back(Symbol s) { symbols_.push_back(s); }
  void pop_back() { symbols_.pop_back(); }

  Word reversed() const;
  Word slice(std::size_t pos, std::size_t count) const;
  friend Word operator+(const Word& a, const Word& b);

  /// Comma-separated 1-based text.
  std::string to_string() const;
  std::vector<int> to_one_based() const;

  /// Throws SymbolOutOfRange unless every symbol lies in [0, k).
  void check_alphabet(int k) const;

  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Symbol> symbols_;
};

/// Dense row-major k x k matrix.
template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, const T& fill = T(0)) : n_(n), data_(n * n, fill) {}
  static SquareMatrix from_rows(const std::vector<std::vector<T>>& rows);
  static SquareMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

template <class T>
SquareMatrix<T> SquareMatrix<T>::from_rows(const std::vector<std::vector<T>>& rows) {
  SquareMatrix out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size())
      throw Error(Errc::invalid_argument, "row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                                              " entries, expected " + std::to_string(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

template <class T>
SquareMatrix<T> SquareMatrix<T>::identity(std::size_t n) {
  SquareMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = T(1);
  return out;
}

/// Boolean pattern of positive entries.
using Pattern = std::vector<std::vector<bool>>;

inline constexpr double kAlgebraTolerance = 1e-12;

/// Row-stochastic matrix. Double entries must lie in [0,1] with row sums
/// within 1e-12 of one; rational entries must sum to exactly one.
template <class T>
class BasicTransitionMatrix {
 public:
  BasicTransitionMatrix() = default;
  explicit BasicTransitionMatrix(SquareMatrix<T> entries);
  static BasicTransitionMatrix from_rows(const std::vector<std::vector<T>>& rows) {
    return BasicTransitionMatrix(SquareMatrix<T>::from_rows(rows));
  }

  int size() const noexcept { return static_cast<int>(entries_.size()); }
  const T& operator()(int i, int j) const { return entries_(i, j); }
  std::span<const T> row(int i) const { return entries_.row(i); }
  const SquareMatrix<T>& entries() const noexcept { return entries_; }
  bool positive(int i, int j) const { return entries_(i, j) > 0; }
  Pattern pattern() const;

 private:
  SquareMatrix<T> entries_;
};

using TransitionMatrix = BasicTransitionMatrix<double>;
using ExactTransitionMatrix = BasicTransitionMatrix<Rational>;

enum class MatrixClass { primitive, irreducible_not_primitive, reducible };
std::string_view to_string(MatrixClass c);

/// Strong connectivity of the positive-entry graph.
bool is_irreducible(const Pattern& pattern);
/// Primitive iff irreducible and the pattern power at Wielandt's bound
/// (k-1)^2+1 is entrywise positive; powers are formed by Boolean squaring.
MatrixClass classify_pattern(const Pattern& pattern);

template <class T>
MatrixClass classify_matrix(const BasicTransitionMatrix<T>& p) {
  return classify_pattern(p.pattern());
}

/// Solves pP = p, sum p = 1 by Gaussian elimination with the last balance
/// equation replaced by the normalisation. Throws NotIrreducible.
template <class T>
std::vector<T> stationary_vector(const BasicTransitionMatrix<T>& p);

/// q_ij = (p_j / p_i) p_ji. Throws ZeroStationaryEntry if some p_i = 0.
template <class T>
BasicTransitionMatrix<T> inverse_transition(const BasicTransitionMatrix<T>& p, std::span<const T> stationary);

/// Transition matrix, stationary vector, inverse matrix and class of an
/// irreducible chain. Immutable once built.
template <class T>
struct BasicMarkovShift {
  BasicTransitionMatrix<T> forward;
  std::vector<T> stationary;
  BasicTransitionMatrix<T> inverse;
  MatrixClass classification = MatrixClass::reducible;

  static BasicMarkovShift build(BasicTransitionMatrix<T> p);
  int size() const noexcept { return forward.size(); }
  bool primitive() const noexcept { return classification == MatrixClass::primitive; }
};

using MarkovShift = BasicMarkovShift<double>;
using ExactMarkovShift = BasicMarkovShift<Rational>;

enum class Direction { forward, inverse };

/// P([w]) = p_{w0} p_{w0 w1} ... using P, or the same product with Q for the
/// inverse measure. The empty word has measure one; inadmissible words zero.
template <class T>
T cylinder_measure(const BasicMarkovShift<T>& shift, const Word& w, Direction which);

template <class T>
bool admissible(const BasicTransitionMatrix<T>& p, const Word& w) {
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (!(p(w[i], w[i + 1]) > 0)) return false;
  return true;
}

/// Index of the first state u with p_uj > 0 for all j.
template <class T>
std::optional<Symbol> row_positive_state(const BasicTransitionMatrix<T>& p) {
  for (int u = 0; u < p.size(); ++u) {
    bool all = true;
    for (int j = 0; j < p.size() && all; ++j) all = p(u, j) > 0;
    if (all) return u;
  }
  return std::nullopt;
}

/// Row vector times matrix power: masses P^steps.
std::vector<double> propagate_masses(const TransitionMatrix& p, std::span<const double> masses, int steps);

/// Draws a word of the given length. The first symbol comes from the
/// stationary vector unless `start` is set; transitions follow P or Q.
Word sample_word(const MarkovShift& shift, std::size_t length, Direction which, std::optional<Symbol> start,
                 Rng& rng);
Word sample_word(const MarkovShift& shift, std::size_t length, Direction which, std::optional<Symbol> start,
                 std::uint64_t seed);

/// Double-precision shift from an exact one.
MarkovShift to_double(const ExactMarkovShift& exact);

}  // namespace mrp
