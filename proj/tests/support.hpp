#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mrp/map_system.hpp"
#include "mrp/markov_shift.hpp"

namespace mrp::test {

inline Rational q(const char* text) { return parse_rational(text); }

inline SquareMatrix<Rational> rat_rows(const std::vector<std::vector<const char*>>& rows) {
  SquareMatrix<Rational> m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = q(rows[i][j]);
  return m;
}

inline ExactMap affine1(const char* a, const char* b) {
  SquareMatrix<Rational> m(1);
  m(0, 0) = q(a);
  return ExactMap::affine(m, {q(b)});
}

inline ExactBox unit_box(std::size_t m) { return ExactBox(std::vector<Rational>(m, 0), std::vector<Rational>(m, 1)); }

inline MapSystem cantor(const std::vector<std::vector<const char*>>& p = {{"1/2", "1/2"}, {"1/2", "1/2"}}) {
  return MapSystem::create(unit_box(1), {affine1("1/3", "0"), affine1("1/3", "2/3")}, rat_rows(p));
}

inline MapSystem cantor_markov() { return cantor({{"9/10", "1/10"}, {"1/5", "4/5"}}); }

inline MapSystem halves() {
  return MapSystem::create(unit_box(1), {affine1("1/2", "0"), affine1("1/2", "1/2")},
                           rat_rows({{"1/2", "1/2"}, {"1/2", "1/2"}}));
}

inline MapSystem moebius_pair() {
  return MapSystem::create(unit_box(1),
                           {ExactMap::moebius(1, 0, 1, 2), ExactMap::moebius(2, 1, 1, 2)},
                           rat_rows({{"3/5", "2/5"}, {"2/5", "3/5"}}));
}

inline MapSystem diagonal_2d() {
  auto diag = [](const char* b) {
    SquareMatrix<Rational> a(2);
    a(0, 0) = q("1/3");
    a(1, 1) = q("1/3");
    return ExactMap::affine(a, {q(b), q(b)});
  };
  return MapSystem::create(unit_box(2), {diag("0"), diag("2/3")}, rat_rows({{"1/2", "1/2"}, {"3/10", "7/10"}}));
}

inline MapSystem identity_pair() {
  return MapSystem::create(unit_box(1), {affine1("1", "0"), affine1("1", "0")},
                           rat_rows({{"1/2", "1/2"}, {"1/2", "1/2"}}));
}

/// Random irreducible row-stochastic matrix: a random cycle through all
/// states plus random extra edges, with random positive weights.
inline TransitionMatrix random_irreducible(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::bernoulli_distribution extra(0.4);
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  SquareMatrix<double> m(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    m(static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]),
      static_cast<std::size_t>(perm[static_cast<std::size_t>((i + 1) % k)])) = u(rng);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (m(i, j) == 0 && extra(rng)) m(i, j) = u(rng);
  for (int i = 0; i < k; ++i) {
    double sum = 0;
    for (int j = 0; j < k; ++j) sum += m(i, j);
    for (int j = 0; j < k; ++j) m(i, j) /= sum;
  }
  return TransitionMatrix(m);
}

/// Power iteration on the lazy chain (P + I) / 2, which shares the
/// stationary vector of P and converges for periodic P as well.
inline std::vector<double> power_iteration(const TransitionMatrix& p, int iterations = 20000) {
  const int k = p.size();
  std::vector<double> v(static_cast<std::size_t>(k), 1.0 / k);
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        next[static_cast<std::size_t>(j)] += 0.5 * v[static_cast<std::size_t>(i)] * (p(i, j) + (i == j ? 1.0 : 0.0));
    v = next;
  }
  return v;
}

/// Calls f on every word of the given length over k symbols.
inline void for_each_word(int k, std::size_t length, const std::function<void(const Word&)>& f) {
  std::vector<Symbol> w(length, 0);
  while (true) {
    f(Word(w));
    std::size_t i = length;
    while (i > 0 && w[i - 1] == k - 1) w[--i] = 0;
    if (i == 0) return;
    ++w[i - 1];
  }
}

/// Plain product formula for a cylinder measure.
template <class T>
T product_measure(const std::vector<T>& p, const BasicTransitionMatrix<T>& m, const Word& w) {
  if (w.empty()) return T(1);
  T acc = p[static_cast<std::size_t>(w[0])];
  for (std::size_t i = 0; i + 1 < w.size(); ++i) acc *= m(w[i], w[i + 1]);
  return acc;
}

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace mrp::test
