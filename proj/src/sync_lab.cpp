#include "mrp/sync_lab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "mrp/parallel.hpp"

namespace mrp {

DecayCurve image_diameter_curve(const MapSystem& sys, const Word& omega, std::size_t n_max, std::size_t cloud_size) {
  if (omega.size() < n_max) throw Error(Errc::invalid_argument, "word shorter than the horizon");
  omega.check_alphabet(sys.k());
  DecayCurve curve;
  auto box = sys.ambient();
  auto cloud = PointCloud::sample_box(box, cloud_size);
  for (std::size_t n = 0;; ++n) {
    curve.n.push_back(n);
    curve.upper.push_back(box.l1_diameter());
    curve.lower.push_back(cloud.l1_diameter());
    if (n == n_max) break;
    const auto& f = sys.map(omega[n]);
    box = box_image(f, box);
    cloud.apply(f);
  }
  return curve;
}

DecayFit fit_decay_rate(std::span<const double> values) {
  std::size_t used = 0;
  while (used < values.size() && std::isfinite(values[used]) && values[used] > kFitFloor) ++used;
  if (used < 3) throw Error(Errc::degenerate_curve, "fewer than 3 entries above 1e-14");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < used; ++i) {
    sx += static_cast<double>(i);
    sy += std::log(values[i]);
  }
  const double mx = sx / static_cast<double>(used);
  const double my = sy / static_cast<double>(used);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < used; ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(values[i]) - my);
  }
  const double slope = sxy / sxx;
  return {std::exp(my - slope * mx), std::exp(slope), used};
}

namespace {

void require_row_positive(const MapSystem& sys) {
  if (!row_positive_state(sys.shift().forward))
    throw Error(Errc::no_row_positive_state, "no state u with p_uj > 0 for every j");
}

std::optional<DecayFit> try_fit(std::span<const double> values) {
  try {
    return fit_decay_rate(values);
  } catch (const Error& e) {
    if (e.code() != Errc::degenerate_curve) throw;
    return std::nullopt;
  }
}

}  // namespace

SyncSummary sync_experiment(const MapSystem& sys, const SyncOptions& options) {
  require_row_positive(sys);
  SyncSummary summary;
  summary.trials.resize(options.trials);
  parallel_for(options.trials, options.threads, [&](std::size_t i) {
    auto rng = make_rng(options.seed, i);
    auto& t = summary.trials[i];
    t.trial = i;
    t.omega = sample_word(sys.shift(), options.n_max, Direction::forward, std::nullopt, rng);
    t.curve = image_diameter_curve(sys, t.omega, options.n_max, options.cloud_size);
    t.fit = try_fit(t.curve.upper);
  });
  std::size_t contracting = 0;
  for (const auto& t : summary.trials) {
    if (!t.fit) continue;
    summary.max_q = std::max(summary.max_q, t.fit->q);
    if (t.fit->q < 1.0) ++contracting;
  }
  if (options.trials > 0)
    summary.fraction_contracting = static_cast<double>(contracting) / static_cast<double>(options.trials);
  return summary;
}

std::vector<ContractionTrial> measure_contraction_experiment(const MapSystem& sys, const SyncOptions& options) {
  require_row_positive(sys);
  std::vector<ContractionTrial> out(options.trials);
  parallel_for(options.trials, options.threads, [&](std::size_t i) {
    auto rng = make_rng(options.seed, i);
    const auto omega = sample_word(sys.shift(), options.n_max, Direction::forward, std::nullopt, rng);
    auto& t = out[i];
    t.trial = i;
    t.lengths.assign(sys.dim(), {});
    auto box = sys.ambient();
    for (std::size_t n = 0;; ++n) {
      for (std::size_t s = 0; s < sys.dim(); ++s) t.lengths[s].push_back(box[s].width);
      if (n == options.n_max) break;
      box = box_image(sys.map(omega[n]), box);
    }
    for (const auto& l : t.lengths) t.fits.push_back(try_fit(l));
  });
  return out;
}

WeakHyperbolicityResult weak_hyperbolicity_experiment(const MapSystem& sys, const WeakHyperbolicityOptions& options) {
  std::vector<double> diameters(options.trials);
  parallel_for(options.trials, options.threads, [&](std::size_t i) {
    auto rng = make_rng(options.seed, i);
    const auto xi = sample_word(sys.shift(), options.depth + 1, Direction::inverse, std::nullopt, rng);
    diameters[i] = reverse_enclosure(sys, xi).l1_diameter();
  });
  WeakHyperbolicityResult result;
  result.trials = options.trials;
  for (double d : diameters) {
    if (d < options.tol) ++result.below_tol;
    result.max_diameter = std::max(result.max_diameter, d);
  }
  return result;
}

CodingPoint coding_point(const MapSystem& sys, const Word& omega, std::optional<Point> anchor) {
  if (omega.empty()) throw Error(Errc::invalid_argument, "coding point needs a nonempty word");
  const Point a = anchor ? *anchor : sys.ambient().center();
  // Allowance for rounding in the n map evaluations, a few ulps of the box scale per step.
  double scale = 0.0;
  for (std::size_t s = 0; s < sys.dim(); ++s)
    scale += std::max(std::abs(sys.ambient()[s].lo), std::abs(sys.ambient()[s].hi));
  const double rounding = 8.0 * static_cast<double>(omega.size()) * std::numeric_limits<double>::epsilon() * scale;
  return {reverse_composition(sys, omega, a), reverse_enclosure(sys, omega).l1_diameter() + rounding};
}

Point periodic_coding_point(const MapSystem& sys, const Word& period) {
  if (period.empty()) throw Error(Errc::invalid_argument, "period must be nonempty");
  period.check_alphabet(sys.k());
  const auto m = sys.dim();
  // Composite x -> A x + b of f_{p0} o ... o f_{p(last)}.
  auto a = SquareMatrix<Rational>::identity(m);
  std::vector<Rational> b(m, Rational(0));
  for (auto it = period.symbols().rbegin(); it != period.symbols().rend(); ++it) {
    const auto* f = std::get_if<AffineMap<Rational>>(&sys.exact_maps()[static_cast<std::size_t>(*it)].kind());
    if (!f) throw Error(Errc::invalid_argument, "exact periodic points need affine maps");
    SquareMatrix<Rational> na(m);
    std::vector<Rational> nb(f->offset);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        nb[i] += f->matrix(i, j) * b[j];
        for (std::size_t l = 0; l < m; ++l) na(i, j) += f->matrix(i, l) * a(l, j);
      }
    a = std::move(na);
    b = std::move(nb);
  }
  // Solve (I - A) x = b.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) = (i == j ? Rational(1) : Rational(0)) - a(i, j);
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    while (pivot < m && a(pivot, col) == 0) ++pivot;
    if (pivot == m) throw Error(Errc::invalid_argument, "periodic composition has no unique fixed point");
    for (std::size_t j = 0; j < m; ++j) std::swap(a(col, j), a(pivot, j));
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || a(r, col) == 0) continue;
      const Rational factor = a(r, col) / a(col, col);
      for (std::size_t j = col; j < m; ++j) a(r, j) -= factor * a(col, j);
      b[r] -= factor * b[col];
    }
  }
  Point x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = Rational(b[i] / a(i, i)).get_d();
  return x;
}

double Observable::operator()(const Point& x) const {
  switch (kind) {
    case Kind::coordinate: return x[s];
    case Kind::square: return x[s] * x[s];
    case Kind::product: return x[s] * x[t];
    case Kind::constant: return value;
  }
  return 0.0;
}

namespace {

std::size_t parse_index(std::string_view text) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v == 0)
    throw Error(Errc::invalid_argument, "bad coordinate index '" + std::string(text) + "'");
  return v - 1;
}

}  // namespace

Observable Observable::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(Errc::invalid_argument, "observable '" + text + "' lacks ':'");
  const auto name = text.substr(0, colon);
  const std::string_view arg(text.data() + colon + 1, text.size() - colon - 1);
  Observable o;
  if (name == "coord") {
    o.kind = Kind::coordinate;
    o.s = parse_index(arg);
  } else if (name == "square") {
    o.kind = Kind::square;
    o.s = parse_index(arg);
  } else if (name == "product") {
    const auto comma = arg.find(',');
    if (comma == std::string_view::npos) throw Error(Errc::invalid_argument, "product needs two indices");
    o.kind = Kind::product;
    o.s = parse_index(arg.substr(0, comma));
    o.t = parse_index(arg.substr(comma + 1));
  } else if (name == "const") {
    o.kind = Kind::constant;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), o.value);
    if (ec != std::errc() || ptr != arg.data() + arg.size())
      throw Error(Errc::invalid_argument, "bad constant '" + std::string(arg) + "'");
  } else {
    throw Error(Errc::invalid_argument, "unknown observable '" + name + "'");
  }
  return o;
}

std::string Observable::to_string() const {
  switch (kind) {
    case Kind::coordinate: return "coord:" + std::to_string(s + 1);
    case Kind::square: return "square:" + std::to_string(s + 1);
    case Kind::product: return "product:" + std::to_string(s + 1) + "," + std::to_string(t + 1);
    case Kind::constant: return "const:" + format_double(value);
  }
  return "?";
}

std::pair<double, double> birkhoff_average(const MapSystem& sys, const Point& x, const Observable& phi,
                                           std::size_t steps, std::size_t batches, std::uint64_t seed) {
  if (steps == 0) throw Error(Errc::invalid_argument, "Birkhoff average needs at least one step");
  if (!sys.ambient().contains(x)) throw Error(Errc::outside_domain, "starting point outside the ambient box");
  batches = std::clamp<std::size_t>(batches, 1, steps);
  const auto& shift = sys.shift();
  auto rng = make_rng(seed);
  Symbol state = sample_index(rng, shift.stationary);
  Point y = x;
  const std::size_t batch_len = steps / batches;
  std::vector<double> values;
  values.reserve(batch_len + batches);
  std::vector<double> batch_means;
  std::vector<double> batch_sums;
  for (std::size_t i = 0; i < steps; ++i) {
    values.push_back(phi(y));
    const bool last_batch = batch_means.size() + 1 == batches;
    if ((!last_batch && values.size() == batch_len) || i + 1 == steps) {
      const double sum = compensated_sum(values);
      batch_sums.push_back(sum);
      batch_means.push_back(sum / static_cast<double>(values.size()));
      values.clear();
    }
    if (i + 1 == steps) break;
    y = sys.map(state)(y);
    state = sample_index(rng, shift.forward.row(state));
  }
  const double mean = compensated_sum(batch_sums) / static_cast<double>(steps);
  double se = 0.0;
  if (batch_means.size() > 1) {
    double var = 0.0;
    for (double b : batch_means) var += (b - mean) * (b - mean);
    var /= static_cast<double>(batch_means.size() - 1);
    se = std::sqrt(var / static_cast<double>(batch_means.size()));
  }
  return {mean, se};
}

std::pair<double, double> measure_mean(const StateTaggedMeasure& mu, const Observable& phi) {
  std::vector<double> wv, wv2, w;
  for (const auto& p : mu.particles()) {
    const double v = phi(p.x);
    w.push_back(p.weight);
    wv.push_back(p.weight * v);
    wv2.push_back(p.weight * v * v);
  }
  const double total = compensated_sum(w);
  const double mean = compensated_sum(wv) / total;
  const double var = std::max(0.0, compensated_sum(wv2) / total - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(std::max<std::size_t>(mu.size(), 1)))};
}

ErgodicResult ergodic_average(const MapSystem& sys, const Point& x, const Observable& phi,
                              const ErgodicOptions& options) {
  ErgodicResult r;
  std::tie(r.time_average, r.std_error) =
      birkhoff_average(sys, x, phi, options.steps, options.batches, options.seed);
  const auto target = estimate_target(sys, options.target);
  std::tie(r.reference, r.reference_error) = measure_mean(target.measure, phi);
  return r;
}

}  // namespace mrp
