#include "doctest.h"
#include "mrp/cylinder_oracle.hpp"
#include "mrp/splitting.hpp"
#include "support.hpp"

using namespace mrp;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::invalid_argument;
}

/// Direct enumeration: every word, its exact reverse enclosure, its Q-measure.
Rational brute_S(const MapSystem& sys, const Rational& x, std::size_t s, std::size_t n) {
  const auto& shift = sys.exact_shift();
  Rational total = 0;
  mrp::test::for_each_word(sys.k(), n, [&](const Word& w) {
    const auto box = n == 0 ? sys.exact_ambient() : exact_reverse_enclosure(sys, w);
    if (box[s].contains(x)) total += mrp::test::product_measure(shift.stationary, shift.inverse, w);
  });
  return total;
}

Rational brute_sigma(const ExactMarkovShift& shift, const Word& w, std::size_t ell) {
  const auto n = w.size();
  Rational total = 0;
  mrp::test::for_each_word(shift.size(), ell * n, [&](const Word& c) {
    for (std::size_t b = 0; b < ell; ++b)
      if (c.slice(b * n, n) == w) return;
    total += mrp::test::product_measure(shift.stationary, shift.inverse, c);
  });
  return total;
}

}  // namespace

TEST_CASE("measure_S examples") {
  const auto sys = make_exact_oracle_system(mrp::test::cantor());
  CHECK(measure_S(sys, Rational(1, 3), 0, 0) == 1);
  CHECK(measure_S(sys, Rational(1, 2), 0, 1) == 0);
  CHECK(measure_S(sys, Rational(0), 0, 5) == Rational(1, 32));
  CHECK(code_of([&] { measure_S(sys, Rational(2), 0, 1); }) == Errc::outside_domain);
  CHECK(code_of([&] { measure_S(sys, Rational(0), 0, 25); }) == Errc::budget_exceeded);
  const auto d = make_oracle_system(mrp::test::cantor());
  CHECK(measure_S(d, 0.0, 0, 5) == 1.0 / 32);
}

TEST_CASE("measure_sigma examples") {
  const auto shift = mrp::test::cantor().exact_shift();
  CHECK(measure_sigma(shift, Word{0}, 3) == Rational(1, 8));
  CHECK(measure_sigma(shift, Word{0, 1}, 0) == 1);
  // Q of this chain forbids 2 -> 2, so W = (2,2) has measure zero.
  const auto one_way = mrp::test::cantor({{"1/2", "1/2"}, {"1", "0"}}).exact_shift();
  CHECK(cylinder_measure(one_way, Word{1, 1}, Direction::inverse) == 0);
  for (std::size_t ell = 0; ell <= 5; ++ell) CHECK(measure_sigma(one_way, Word{1, 1}, ell) == 1);
  CHECK(code_of([&] { measure_sigma(shift, Word{}, 2); }) == Errc::length_mismatch);
  // Long horizons are cheap: the recursion is linear in ell.
  Rational seven_eighths = 1;
  for (int i = 0; i < 40; ++i) seven_eighths *= Rational(7, 8);
  CHECK(measure_sigma(shift, Word{0, 0, 1}, 40) == seven_eighths);
}

TEST_CASE("substitute_F examples") {
  CHECK(substitute_F(Word{0, 0, 1, 0}, Word{0, 0}, Word{0, 1}) == Word{0, 1, 1, 0});
  CHECK(substitute_F(Word{1, 1, 1, 0}, Word{0, 0}, Word{0, 1}) == Word{1, 1, 1, 0});
  CHECK(substitute_F(Word{0, 0, 0, 0}, Word{0, 0}, Word{0, 1}) == Word{0, 1, 0, 1});
  // Only aligned blocks are replaced.
  CHECK(substitute_F(Word{1, 0, 0, 1}, Word{0, 0}, Word{0, 1}) == Word{1, 0, 0, 1});
  CHECK(code_of([] { substitute_F(Word{0, 0, 0}, Word{0, 0}, Word{0, 1}); }) == Errc::length_mismatch);
  CHECK(code_of([] { substitute_F(Word{0, 0}, Word{0, 0}, Word{0}); }) == Errc::length_mismatch);
}

TEST_CASE("x grid") {
  const auto g = x_grid(ExactBox(std::vector<Rational>{0}, std::vector<Rational>{1}), 0, 33);
  REQUIRE(g.size() == 33);
  CHECK(g.front() == 0);
  CHECK(g.back() == 1);
  CHECK(g[1] == Rational(1, 32));
}

TEST_CASE("verify_bounds on i.i.d. Cantor: sigma equals (3/4)^ell") {
  const auto sys = mrp::test::cantor();
  const auto pair = normalize_witness(sys, *search_witness(sys, 2));
  const auto os = make_exact_oracle_system(sys);
  OracleOptions opt;
  opt.ell_max = 4;
  const auto report = verify_bounds(os, pair, x_grid(os.ambient, 0, 9), 0, opt);
  CHECK(report.w == Word{0, 0});
  CHECK(report.measure_w == Rational(1, 4));
  CHECK(report.all_hold());
  Rational pow = 1;
  for (const auto& g : report.geometric) {
    pow *= Rational(3, 4);
    CHECK(g.sigma == pow);
    CHECK(g.holds);
  }
  for (const auto& row : report.rows) {
    CHECK(row.verdict() == Verdict::holds);
    CHECK(row.lhs >= 0);
    CHECK(row.lhs <= 1);
    CHECK(row.words == (std::uint64_t{1} << (2 * row.ell)));
  }
}

TEST_CASE("verify_bounds hypothesis checks") {
  const auto sys = mrp::test::cantor({{"1/2", "1/2"}, {"1", "0"}});
  const auto os = make_exact_oracle_system(sys);
  const auto grid = x_grid(os.ambient, 0, 5);
  CHECK(code_of([&] { verify_bounds(os, NormalizedPair{Word{1, 1}, Word{1, 0}}, grid, 0); }) ==
        Errc::hypothesis_violated);
  CHECK(code_of([&] { verify_bounds(os, NormalizedPair{Word{0, 1}, Word{0, 1}}, grid, 0); }) ==
        Errc::hypothesis_violated);
  CHECK(code_of([&] { verify_bounds(os, NormalizedPair{Word{0, 1}, Word{1, 1}}, grid, 0); }) ==
        Errc::hypothesis_violated);
}

TEST_CASE("property: measure_S against brute force, monotone in n") {
  for (const auto& sys : {mrp::test::cantor(), mrp::test::cantor_markov(), mrp::test::moebius_pair()}) {
    const auto os = make_exact_oracle_system(sys);
    for (const auto& x : x_grid(os.ambient, 0, 17)) {
      Rational prev = 2;
      for (std::size_t n = 0; n <= 7; ++n) {
        const auto v = measure_S(os, x, 0, n);
        CHECK(v == brute_S(sys, x, 0, n));
        CHECK(v <= prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("property: measure_sigma against brute force, monotone in ell") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    const int k = 2 + trial % 2;
    std::vector<std::vector<Rational>> rows(static_cast<std::size_t>(k));
    for (auto& row : rows) {
      Rational left = 1;
      for (int j = 0; j + 1 < k; ++j) {
        const Rational v = left * Rational(static_cast<long>(rng() % 5) + 1, 7);
        row.push_back(v);
        left -= v;
      }
      row.push_back(left);
    }
    const auto shift = ExactMarkovShift::build(ExactTransitionMatrix::from_rows(rows));
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
    Word w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(static_cast<Symbol>(rng() % static_cast<unsigned>(k)));
    Rational prev = 2;
    for (std::size_t ell = 0; ell * n <= (k == 2 ? 10u : 6u); ++ell) {
      const auto v = measure_sigma(shift, w, ell);
      CHECK(v == brute_sigma(shift, w, ell));
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("geometric rho matches its formula") {
  const auto shift = mrp::test::cantor_markov().exact_shift();
  const Word w{1, 0};
  Rational expect = -1;
  for (int j = 0; j < 2; ++j) {
    const Rational v = shift.inverse(j, w[0]) * shift.inverse(w[0], w[1]);
    if (expect < 0 || v < expect) expect = v;
  }
  CHECK(geometric_rho(shift, w) == expect);
}

TEST_CASE("property: rational and double verdicts agree on shipped systems") {
  for (const auto& sys : {mrp::test::cantor(), mrp::test::cantor_markov(), mrp::test::moebius_pair()}) {
    const auto pair = normalize_witness(sys, *search_witness(sys, 3));
    OracleOptions opt;
    opt.ell_max = 4;
    opt.geometric_ell_max = 8;
    const auto ex = make_exact_oracle_system(sys);
    const auto db = make_oracle_system(sys);
    const auto re = verify_bounds(ex, pair, x_grid(ex.ambient, 0, 17), 0, opt);
    const auto rd = verify_bounds(db, pair, x_grid(db.ambient, 0, 17), 0, opt);
    REQUIRE(re.rows.size() == rd.rows.size());
    CHECK(re.all_hold());
    for (std::size_t i = 0; i < re.rows.size(); ++i) {
      CHECK(re.rows[i].verdict() == rd.rows[i].verdict());
      CHECK(mrp::test::near(re.rows[i].lhs.get_d(), rd.rows[i].lhs, 1e-12));
      CHECK(mrp::test::near(re.rows[i].rhs.get_d(), rd.rows[i].rhs, 1e-12));
    }
  }
}

TEST_CASE("relaxed verdict in two dimensions") {
  const auto sys = mrp::test::diagonal_2d();
  const auto pair = normalize_witness(sys, *search_witness(sys, 3), NormalizeMode::primitive, TailPolicy::match_last);
  OracleOptions opt;
  opt.ell_max = 3;
  opt.geometric_ell_max = 4;
  const auto os = make_exact_oracle_system(sys);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto r = verify_bounds(os, pair, x_grid(os.ambient, s, 5), s, opt);
    CHECK(r.all_hold());
    for (const auto& row : r.rows) CHECK(row.verdict() == Verdict::holds_relaxed);
  }
}
