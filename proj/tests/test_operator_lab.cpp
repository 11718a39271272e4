#include "doctest.h"
#include "mrp/operator_lab.hpp"
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

MapSystem single_contraction() {
  return MapSystem::create(mrp::test::unit_box(1), {mrp::test::affine1("1/2", "1/4")}, SquareMatrix<Rational>(1, 1));
}

/// Equal-size, equal-weight samples: W1 is the mean gap between order statistics.
double order_statistics_w1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total / static_cast<double>(a.size());
}

std::vector<std::size_t> state_counts(const StateTaggedMeasure& mu) {
  std::vector<std::size_t> out(static_cast<std::size_t>(mu.k()), 0);
  for (const auto& p : mu.particles()) ++out[static_cast<std::size_t>(p.state)];
  return out;
}

}  // namespace

TEST_CASE("measure validation") {
  const auto box = mrp::test::cantor().ambient();
  CHECK_NOTHROW(StateTaggedMeasure::dirac(2, 1, {0.5}).validate(box));
  CHECK(code_of([&] { StateTaggedMeasure(2, {{0, {0.5}, 0.7}}).validate(box); }) == Errc::invalid_argument);
  CHECK(code_of([&] { StateTaggedMeasure(2, {{0, {1.5}, 1.0}}).validate(box); }) == Errc::outside_domain);
  CHECK(code_of([&] { StateTaggedMeasure(2, {{0, {0.5}, -1.0}, {1, {0.5}, 2.0}}).validate(box); }) ==
        Errc::invalid_argument);
}

TEST_CASE("compensated sums") {
  std::vector<double> v{1.0, 1e100, 1.0, -1e100};
  CHECK(compensated_sum(v) == 2.0);
}

TEST_CASE("apply_operator examples") {
  const auto single = single_contraction();
  const auto out = apply_operator(StateTaggedMeasure::dirac(1, 0, {0.6}), single);
  REQUIRE(out.size() == 1);
  CHECK(near(out.particles()[0].x[0], 0.55, 1e-16));
  CHECK(out.particles()[0].weight == 1.0);

  const auto markov = mrp::test::cantor_markov();
  const auto one = apply_operator(StateTaggedMeasure::dirac(2, 0, {0.5}), markov);
  CHECK(near(one.masses()[0], 0.9, 1e-15));
  CHECK(near(one.masses()[1], 0.1, 1e-15));
  const auto two = apply_operator(one, markov);
  CHECK(near(two.masses()[0], 0.83, 1e-15));
  CHECK(near(two.masses()[1], 0.17, 1e-15));

  const auto iid = mrp::test::cantor();
  const StateTaggedMeasure half(2, {{0, {0.2}, 0.5}, {1, {0.7}, 0.5}});
  const auto stays = apply_operator(half, iid);
  CHECK(near(stays.masses()[0], 0.5, 1e-16));
  CHECK(near(stays.masses()[1], 0.5, 1e-16));
  CHECK(stays.size() == 4);
}

TEST_CASE("resample examples") {
  const StateTaggedMeasure flat(1, {{0, {0.1}, 0.25}, {0, {0.2}, 0.25}, {0, {0.3}, 0.25}, {0, {0.4}, 0.25}});
  const auto same = resample(flat, 4, 1);
  std::vector<double> xs;
  for (const auto& p : same.particles()) xs.push_back(p.x[0]);
  std::sort(xs.begin(), xs.end());
  CHECK(xs == std::vector<double>{0.1, 0.2, 0.3, 0.4});

  const StateTaggedMeasure pair(1, {{0, {0.1}, 0.75}, {0, {0.9}, 0.25}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = resample(pair, 4, seed);
    std::size_t low = 0;
    for (const auto& p : r.particles()) low += p.x[0] == 0.1;
    CHECK(r.size() == 4);
    CHECK(low == 3);
  }
  CHECK(resample(pair, 4, 5).sorted().size() == 4);
}

TEST_CASE("property: resampling preserves per-state masses") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 4);
    std::vector<Particle> ps;
    const std::size_t count = 1 + rng() % 200;
    double total = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const double w = 1e-3 + uniform01(rng);
      ps.push_back({static_cast<Symbol>(rng() % static_cast<unsigned>(k)), {uniform01(rng)}, w});
      total += w;
    }
    for (auto& p : ps) p.weight /= total;
    const StateTaggedMeasure mu(k, ps);
    const std::size_t target = static_cast<std::size_t>(k) + rng() % 300;
    const auto r = resample(mu, target, rng());
    const auto before = mu.masses();
    const auto after = r.masses();
    for (int j = 0; j < k; ++j) CHECK(near(before[static_cast<std::size_t>(j)], after[static_cast<std::size_t>(j)], 1e-12));
    CHECK(near(r.total_mass(), 1.0, 1e-12));
    // Every nonempty state keeps at least one particle; counts track the target.
    const auto counts = state_counts(r);
    for (int j = 0; j < k; ++j)
      if (before[static_cast<std::size_t>(j)] > 0) CHECK(counts[static_cast<std::size_t>(j)] >= 1);
    CHECK(r.size() >= std::min(target, mu.size()) - 0);
    // Same seed, same output.
    const auto again = resample(mu, target, 99);
    const auto again2 = resample(mu, target, 99);
    CHECK(again.sorted().size() == again2.sorted().size());
    for (std::size_t i = 0; i < again.size(); ++i) CHECK(again.particles()[i].x == again2.particles()[i].x);
  }
}

TEST_CASE("wasserstein1 against order statistics") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<double> a(n), b(n), w(n, 1.0 / static_cast<double>(n));
    for (auto& v : a) v = uniform01(rng);
    for (auto& v : b) v = 0.3 + uniform01(rng);
    CHECK(near(wasserstein1(a, w, b, w), order_statistics_w1(a, b), 1e-12));
    CHECK(near(wasserstein1(a, w, b, w), wasserstein1(b, w, a, w), 1e-15));
  }
  std::vector<double> x{0.0}, y{0.25, 0.75}, wx{1.0}, wy{0.5, 0.5};
  CHECK(near(wasserstein1(x, wx, y, wy), 0.5, 1e-16));
}

TEST_CASE("weak_star_distance examples") {
  const auto mu = StateTaggedMeasure(2, {{0, {0.2}, 0.3}, {1, {0.6}, 0.7}});
  CHECK(weak_star_distance(mu, mu) == 0.0);
  CHECK(near(weak_star_distance(StateTaggedMeasure::dirac(2, 0, {0.2}), StateTaggedMeasure::dirac(2, 0, {0.9})), 0.7,
             1e-15));
  CHECK(weak_star_distance(StateTaggedMeasure::dirac(2, 0, {0.4}), StateTaggedMeasure::dirac(2, 1, {0.4})) == 2.0);
  const auto nu = StateTaggedMeasure(2, {{0, {0.5}, 0.5}, {1, {0.1}, 0.5}});
  CHECK(near(weak_star_distance(mu, nu), weak_star_distance(nu, mu), 1e-15));
  // Two-dimensional marginals add up.
  CHECK(near(weak_star_distance(StateTaggedMeasure::dirac(1, 0, {0.1, 0.2}), StateTaggedMeasure::dirac(1, 0, {0.4, 0.0})),
             0.5, 1e-15));
}

TEST_CASE("estimate_target examples") {
  const auto sys = mrp::test::cantor();
  TargetOptions opt;
  opt.samples = 20000;
  opt.seed = 17;
  const auto t = estimate_target(sys, opt);
  CHECK(t.measure.size() == opt.samples);
  CHECK(near(t.measure.total_mass(), 1.0, 1e-12));
  double mean = 0;
  for (const auto& p : t.measure.particles()) mean += p.weight * p.x[0];
  CHECK(std::abs(mean - 0.5) <= 3 * std::sqrt(0.125 / static_cast<double>(opt.samples)));
  CHECK(t.max_diameter() <= std::pow(3.0, -64) * 1.0001);

  TargetOptions shallow = opt;
  shallow.depth = 0;
  shallow.samples = 50;
  const auto at_anchor = estimate_target(sys, shallow);
  for (const auto& p : at_anchor.measure.particles()) CHECK(p.x[0] == 0.5);

  TargetOptions deep;
  deep.samples = 10;
  deep.depth = 60;
  const auto fixed = estimate_target(single_contraction(), deep);
  for (const auto& p : fixed.measure.particles()) CHECK(near(p.x[0], 0.5, 1e-15));

  CHECK(code_of([] { estimate_target(mrp::test::cantor({{"0", "1"}, {"1", "0"}}), TargetOptions{}); }) ==
        Errc::not_primitive);

  // Anchor independence within the Monte Carlo floor.
  TargetOptions other = opt;
  other.anchor = Point{0.0};
  CHECK(weak_star_distance(t.measure, estimate_target(sys, other).measure) <= 1e-12);

  // Per-state masses follow the stationary vector.
  const auto markov = estimate_target(mrp::test::cantor_markov(), opt);
  CHECK(std::abs(markov.measure.masses()[0] - 2.0 / 3) <= 4 * std::sqrt(2.0 / 9 / opt.samples));

  // Threads do not change the estimate.
  TargetOptions par = opt;
  par.threads = 3;
  const auto tp = estimate_target(sys, par);
  CHECK(weak_star_distance(t.measure, tp.measure) == 0.0);
}

TEST_CASE("stability experiment mass identity and trend") {
  const auto sys = mrp::test::cantor_markov();
  TargetOptions to;
  to.samples = 5000;
  to.seed = 2;
  const auto target = estimate_target(sys, to);
  const auto initials = default_initial_measures(sys);
  REQUIRE(initials.size() == 3);
  for (std::uint64_t seed : {1u, 2u}) {
    StabilityOptions so;
    so.steps = 12;
    so.particles = 4000;
    so.seed = seed;
    const auto rows = stability_experiment(sys, initials, target.measure, so);
    CHECK(rows.size() == 3 * 13);
    for (const auto& row : rows) {
      CHECK(row.mass_error <= 1e-12);
      const auto expected = propagate_masses(sys.shift().forward, initials[row.initial_id].masses(),
                                             static_cast<int>(row.step));
      for (std::size_t j = 0; j < expected.size(); ++j) CHECK(near(row.masses[j], expected[j], 1e-12));
    }
    // Distances fall from the starting point to the Monte Carlo floor.
    for (std::size_t id = 0; id < 3; ++id) {
      const auto& first = rows[id * 13];
      const auto& last = rows[id * 13 + 12];
      CHECK(last.distance < first.distance);
      CHECK(last.distance < 0.1);
    }
  }
  // Starting at the target stays near it.
  StabilityOptions so;
  so.steps = 5;
  so.particles = 5000;
  const std::vector<StateTaggedMeasure> start{target.measure};
  for (const auto& row : stability_experiment(sys, start, target.measure, so)) CHECK(row.distance < 0.05);
}
