#include <limits>

#include "doctest.h"
#include "mrp/sync_lab.hpp"
#include "support.hpp"

using namespace mrp;
using mrp::test::near;

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

Word random_word(std::size_t n, int k, std::mt19937_64& rng) {
  Word w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(static_cast<Symbol>(rng() % static_cast<unsigned>(k)));
  return w;
}

/// Geometric mean of the per-step ratios of exact image lengths.
double ratio_oracle(const MapSystem& sys, const Word& w, std::size_t n_max) {
  double log_sum = 0;
  Rational prev = sys.exact_ambient().l1_diameter();
  for (std::size_t n = 1; n <= n_max; ++n) {
    const Rational cur = exact_forward_enclosure(sys, w.slice(0, n)).l1_diameter();
    log_sum += std::log(Rational(cur / prev).get_d());
    prev = cur;
  }
  return std::exp(log_sum / static_cast<double>(n_max));
}

}  // namespace

TEST_CASE("image diameter curves") {
  std::mt19937_64 rng(1);
  const auto cantor = mrp::test::cantor();
  const auto curve = image_diameter_curve(cantor, random_word(30, 2, rng), 30);
  REQUIRE(curve.n.size() == 31);
  for (std::size_t n = 0; n <= 30; ++n) {
    const double expect = std::pow(3.0, -static_cast<double>(n));
    CHECK(near(curve.upper[n] / expect, 1.0, 1e-12));
    CHECK(near(curve.lower[n] / expect, 1.0, 1e-12));
  }
  const auto flat = image_diameter_curve(mrp::test::identity_pair(), random_word(10, 2, rng), 10);
  for (std::size_t n = 0; n <= 10; ++n) {
    CHECK(flat.upper[n] == 1.0);
    CHECK(flat.lower[n] == 1.0);
  }
  const auto d2 = image_diameter_curve(mrp::test::diagonal_2d(), random_word(20, 2, rng), 20);
  for (std::size_t n = 0; n <= 20; ++n) CHECK(near(d2.upper[n] / (2 * std::pow(3.0, -static_cast<double>(n))), 1.0, 1e-12));
}

TEST_CASE("property: lower never exceeds upper") {
  std::mt19937_64 rng(2);
  for (const auto& sys : {mrp::test::moebius_pair(), mrp::test::diagonal_2d(), mrp::test::cantor_markov()}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto c = image_diameter_curve(sys, random_word(25, 2, rng), 25, 64);
      for (std::size_t n = 0; n < c.n.size(); ++n) {
        CHECK(c.lower[n] <= c.upper[n] * (1 + 1e-12));
        if (n > 0) CHECK(c.upper[n] <= c.upper[n - 1] * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("fit_decay_rate examples") {
  std::vector<double> geo;
  for (int n = 0; n <= 25; ++n) geo.push_back(std::pow(3.0, -n));
  const auto fit = fit_decay_rate(geo);
  CHECK(near(fit.q, 1.0 / 3, 1e-12));
  CHECK(near(fit.c, 1.0, 1e-9));
  CHECK(fit.points == 26);
  // 3^-30 sits below the 1e-14 floor.
  geo.clear();
  for (int n = 0; n <= 30; ++n) geo.push_back(std::pow(3.0, -n));
  CHECK(fit_decay_rate(geo).points == 30);

  std::vector<double> flat(10, 0.7);
  const auto f2 = fit_decay_rate(flat);
  CHECK(near(f2.q, 1.0, 1e-15));
  CHECK(near(f2.c, 0.7, 1e-15));

  // Entries below the floor end the usable run.
  std::vector<double> cut{1.0, 0.1, 0.01, 1e-20, 1e-30};
  CHECK(fit_decay_rate(cut).points == 3);
  std::vector<double> two{1.0, 0.5};
  CHECK(code_of([&] { fit_decay_rate(two); }) == Errc::degenerate_curve);
  std::vector<double> early{1.0, 0.0, 0.5, 0.25};
  CHECK(code_of([&] { fit_decay_rate(early); }) == Errc::degenerate_curve);
}

TEST_CASE("sync experiment") {
  SyncOptions opt;
  opt.trials = 100;
  opt.n_max = 30;
  opt.seed = 4;
  opt.cloud_size = 16;
  const auto s = sync_experiment(mrp::test::cantor(), opt);
  REQUIRE(s.trials.size() == 100);
  for (const auto& t : s.trials) {
    REQUIRE(t.fit.has_value());
    CHECK(near(t.fit->q, 1.0 / 3, 1e-9));
  }
  CHECK(s.fraction_contracting == 1.0);

  const auto again = sync_experiment(mrp::test::cantor(), opt);
  for (std::size_t i = 0; i < 100; ++i) CHECK(again.trials[i].omega == s.trials[i].omega);
  opt.threads = 4;
  const auto threaded = sync_experiment(mrp::test::cantor(), opt);
  for (std::size_t i = 0; i < 100; ++i) CHECK(threaded.trials[i].omega == s.trials[i].omega);

  CHECK(code_of([&] { sync_experiment(mrp::test::cantor({{"0", "1"}, {"1", "0"}}), opt); }) ==
        Errc::no_row_positive_state);
}

TEST_CASE("Moebius rates against the per-step ratio oracle") {
  SyncOptions opt;
  opt.trials = 30;
  opt.n_max = 30;
  opt.seed = 6;
  opt.cloud_size = 16;
  const auto sys = mrp::test::moebius_pair();
  const auto s = sync_experiment(sys, opt);
  for (const auto& t : s.trials) {
    REQUIRE(t.fit.has_value());
    CHECK(t.fit->q < 1.0);
    CHECK(std::abs(t.fit->q - ratio_oracle(sys, t.omega, opt.n_max)) < 0.02);
  }
}

TEST_CASE("contraction of Lebesgue lengths") {
  SyncOptions opt;
  opt.trials = 5;
  opt.n_max = 30;
  opt.seed = 8;
  const auto trials = measure_contraction_experiment(mrp::test::cantor(), opt);
  for (const auto& t : trials) {
    REQUIRE(t.lengths.size() == 1);
    CHECK(t.lengths[0][0] == 1.0);
    for (std::size_t n = 0; n <= 30; ++n)
      CHECK(near(t.lengths[0][n], std::pow(3.0, -static_cast<double>(n)), 1e-12));
  }
  // Diagonal maps: each projection decays at the synchronization rate.
  const auto d2 = mrp::test::diagonal_2d();
  opt.cloud_size = 16;
  const auto sync = sync_experiment(d2, opt);
  const auto contr = measure_contraction_experiment(d2, opt);
  for (std::size_t i = 0; i < contr.size(); ++i)
    for (std::size_t s = 0; s < 2; ++s) CHECK(near(contr[i].fits[s]->q, sync.trials[i].fit->q, 1e-9));
}

TEST_CASE("spectral bound on affine systems") {
  SyncOptions opt;
  opt.trials = 20;
  opt.n_max = 25;
  opt.seed = 10;
  opt.cloud_size = 16;
  for (const auto& sys : {mrp::test::cantor(), mrp::test::diagonal_2d(), mrp::test::cantor_markov()}) {
    const auto s = sync_experiment(sys, opt);
    CHECK(s.max_q <= 1.0 / 3 + 1e-6);
  }
}

TEST_CASE("weak hyperbolicity") {
  WeakHyperbolicityOptions opt;
  opt.trials = 2000;
  opt.depth = 40;
  opt.tol = 1e-9;
  for (const auto& sys : {mrp::test::cantor(), mrp::test::moebius_pair(), mrp::test::diagonal_2d()})
    CHECK(weak_hyperbolicity_experiment(sys, opt).fraction() == 1.0);
  CHECK(weak_hyperbolicity_experiment(mrp::test::identity_pair(), opt).fraction() == 0.0);
  opt.tol = std::numeric_limits<double>::infinity();
  CHECK(weak_hyperbolicity_experiment(mrp::test::identity_pair(), opt).fraction() == 1.0);
}

TEST_CASE("coding points") {
  const auto sys = mrp::test::cantor();
  Word ones, twos, alt;
  for (int i = 0; i < 40; ++i) {
    ones.push_back(0);
    twos.push_back(1);
    alt.push_back(i % 2);
  }
  auto c = coding_point(sys, ones);
  CHECK(c.point[0] < 1e-18);
  CHECK(c.bound >= std::pow(3.0, -40));
  CHECK(c.bound < 1e-12);
  CHECK(near(coding_point(sys, twos).point[0], 1.0, 1e-15));
  CHECK(near(coding_point(sys, alt).point[0], 0.25, 1e-15));

  CHECK(periodic_coding_point(sys, Word{0})[0] == 0.0);
  CHECK(periodic_coding_point(sys, Word{1})[0] == 1.0);
  CHECK(periodic_coding_point(sys, Word{0, 1})[0] == 0.25);
  CHECK(code_of([&] { periodic_coding_point(mrp::test::moebius_pair(), Word{0}); }) == Errc::invalid_argument);
  CHECK(code_of([&] { periodic_coding_point(mrp::test::identity_pair(), Word{0}); }) == Errc::invalid_argument);
  CHECK(code_of([&] { coding_point(sys, Word{}); }) == Errc::invalid_argument);
}

TEST_CASE("property: coding points are anchor independent and invariant") {
  std::mt19937_64 rng(12);
  for (const auto& sys : {mrp::test::cantor_markov(), mrp::test::moebius_pair(), mrp::test::diagonal_2d()}) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto omega = sample_word(sys.shift(), 41, Direction::inverse, std::nullopt, rng);
      const auto a = coding_point(sys, omega);
      const auto b = coding_point(sys, omega, sys.ambient().lo());
      double gap = 0;
      for (std::size_t s = 0; s < sys.dim(); ++s) gap += std::abs(a.point[s] - b.point[s]);
      CHECK(gap <= a.bound);
      const auto tail = coding_point(sys, omega.slice(1, 40), sys.ambient().hi());
      const auto image = sys.map(omega.front())(tail.point);
      double residual = 0;
      for (std::size_t s = 0; s < sys.dim(); ++s) residual += std::abs(image[s] - a.point[s]);
      CHECK(residual <= a.bound + tail.bound);
    }
  }
}

TEST_CASE("observables") {
  CHECK(Observable::parse("coord:2")({0.1, 0.4}) == 0.4);
  CHECK(Observable::parse("square:1")({0.5}) == 0.25);
  CHECK(Observable::parse("product:1,2")({0.5, 0.4}) == 0.2);
  CHECK(Observable::parse("const:3.5")({0.1}) == 3.5);
  CHECK(Observable::parse("product:1,2").to_string() == "product:1,2");
  CHECK(code_of([] { Observable::parse("cube:1"); }) == Errc::invalid_argument);
  CHECK(code_of([] { Observable::parse("coord:0"); }) == Errc::invalid_argument);
}

TEST_CASE("Birkhoff averages") {
  const auto sys = mrp::test::cantor();
  const auto [c, cse] = birkhoff_average(sys, {0.3}, Observable::parse("const:0.75"), 10000, 100, 1);
  CHECK(c == 0.75);
  CHECK(cse == 0.0);

  const auto phi = Observable::parse("coord:1");
  const auto [a, ase] = birkhoff_average(sys, {0.0}, phi, 200000, 100, 3);
  const auto [b, bse] = birkhoff_average(sys, {1.0}, phi, 200000, 100, 3);
  CHECK(std::abs(a - 0.5) <= 3 * ase);
  CHECK(std::abs(a - b) <= 3 * std::hypot(ase, bse));

  // Second moment of the Cantor measure is 3/8.
  const auto [m2, m2se] = birkhoff_average(sys, {0.5}, Observable::parse("square:1"), 200000, 100, 5);
  CHECK(std::abs(m2 - 0.375) <= 3 * m2se);

  ErgodicOptions eo;
  eo.steps = 100000;
  eo.seed = 9;
  eo.target.samples = 5000;
  const auto r = ergodic_average(sys, {0.2}, phi, eo);
  CHECK(std::abs(r.time_average - r.reference) <= 3 * std::hypot(r.std_error, r.reference_error));

  const StateTaggedMeasure mu(2, {{0, {0.2}, 0.5}, {1, {0.6}, 0.5}});
  const auto [mean, se] = measure_mean(mu, phi);
  CHECK(near(mean, 0.4, 1e-15));
  CHECK(se > 0);
}
