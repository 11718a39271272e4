#include "mrp/splitting.hpp"

#include <algorithm>

#include "mrp/parallel.hpp"

namespace mrp {

std::string_view to_string(Certification c) {
  switch (c) {
    case Certification::theorem_d: return "theorem_d";
    case Certification::injective_1d: return "injective_1d";
  }
  return "?";
}

namespace {

constexpr std::uint64_t kHorizonBudget = std::uint64_t{1} << 24;

struct Criteria {
  std::optional<MonotoneType> type;
  bool injective_1d = false;
};

Criteria criteria_for(const MapSystem& sys) {
  Criteria c;
  c.type = classify_monotone_type(sys);
  c.injective_1d = sys.dim() == 1 && std::all_of(sys.exact_maps().begin(), sys.exact_maps().end(),
                                                 [](const ExactMap& f) { return f.injective(); });
  if (!c.type && !c.injective_1d)
    throw Error(Errc::not_monotone_system, "the maps share no monotone class S(t1..tm)");
  return c;
}

bool ordered(const std::vector<Sign>& t, const ExactBox& lower, const ExactBox& upper) {
  for (std::size_t s = 0; s < t.size(); ++s) {
    const bool ok = t[s] == Sign::plus ? lower[s].before(upper[s]) : upper[s].before(lower[s]);
    if (!ok) return false;
  }
  return true;
}

bool disjoint(const ExactBox& a, const ExactBox& b) {
  for (std::size_t s = 0; s < a.dim(); ++s)
    if (a[s].meets(b[s])) return false;
  return true;
}

std::optional<SplitWitness> certify(const Criteria& c, const Word& a, const Word& b, const ExactBox& m1,
                                    const ExactBox& m2) {
  if (c.type) {
    if (ordered(c.type->t, m1, m2)) return SplitWitness{a, b, m1, m2, Certification::theorem_d, false};
    if (ordered(c.type->t, m2, m1)) return SplitWitness{a, b, m1, m2, Certification::theorem_d, true};
  }
  if (c.injective_1d && disjoint(m1, m2)) return SplitWitness{a, b, m1, m2, Certification::injective_1d, false};
  return std::nullopt;
}

void check_words(const MapSystem& sys, const Word& a, const Word& b) {
  if (a.empty() || b.empty()) throw Error(Errc::invalid_argument, "witness words must be nonempty");
  a.check_alphabet(sys.k());
  b.check_alphabet(sys.k());
  if (a.back() != b.back())
    throw Error(Errc::last_symbol_mismatch, "words " + a.to_string() + " and " + b.to_string() + " end differently");
  for (const Word* w : {&a, &b})
    if (!admissible(sys.shift().forward, *w))
      throw Error(Errc::inadmissible_word, "word " + w->to_string() + " is not admissible for P");
}

std::uint64_t checked_power(std::uint64_t base, std::size_t exp, std::uint64_t cap) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > cap / std::max<std::uint64_t>(base, 1)) return cap + 1;
    out *= base;
  }
  return out;
}

struct HorizonWalk {
  const MapSystem& sys;
  std::size_t n_max;
  std::vector<HorizonLevel> levels;
  std::optional<HorizonViolation> violation;
  Word omega;

  HorizonWalk(const MapSystem& s, std::size_t n) : sys(s), n_max(n), levels(n + 1) {
    for (std::size_t i = 0; i <= n; ++i) levels[i].n = i;
  }

  // False once a violation has been recorded.
  bool check(const PointCloud& ca, const PointCloud& cb, const ExactBox& ba, const ExactBox& bb) {
    auto& level = levels[omega.size()];
    ++level.checked;
    for (std::size_t s = 0; s < sys.dim(); ++s) {
      const auto ha = ca.projection(s);
      const auto hb = cb.projection(s);
      if (ha.meets(hb)) {
        violation = HorizonViolation{omega, s, ha, hb};
        return false;
      }
    }
    if (disjoint(ba, bb)) ++level.certified;
    return true;
  }

  bool descend(const PointCloud& ca, const PointCloud& cb, const ExactBox& ba, const ExactBox& bb) {
    if (!check(ca, cb, ba, bb)) return false;
    if (omega.size() == n_max) return true;
    for (Symbol j = 0; j < sys.k(); ++j)
      if (!step(j, ca, cb, ba, bb)) return false;
    return true;
  }

  bool step(Symbol j, PointCloud ca, PointCloud cb, const ExactBox& ba, const ExactBox& bb) {
    const auto& f = sys.exact_maps()[static_cast<std::size_t>(j)];
    ca.apply(sys.map(j));
    cb.apply(sys.map(j));
    omega.push_back(j);
    const bool ok = descend(ca, cb, box_image(f, ba), box_image(f, bb));
    omega.pop_back();
    return ok;
  }
};

void merge_levels(std::vector<HorizonLevel>& into, const std::vector<HorizonLevel>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) {
    into[i].checked += from[i].checked;
    into[i].certified += from[i].certified;
  }
}

}  // namespace

std::optional<SplitWitness> check_theorem_d(const MapSystem& sys, const Word& word_a, const Word& word_b) {
  const auto c = criteria_for(sys);
  check_words(sys, word_a, word_b);
  return certify(c, word_a, word_b, exact_forward_enclosure(sys, word_a), exact_forward_enclosure(sys, word_b));
}

bool HorizonReport::certified() const {
  if (violation) return false;
  return std::all_of(levels.begin(), levels.end(), [](const HorizonLevel& l) { return l.certified == l.checked; });
}

std::string HorizonReport::status() const {
  if (violation) return "violated";
  return certified() ? "certified" : "not falsified";
}

HorizonReport verify_split_horizon(const MapSystem& sys, const Word& word_a, const Word& word_b, std::size_t n_max,
                                   const HorizonOptions& options) {
  check_words(sys, word_a, word_b);
  auto cloud_a = PointCloud::sample_box(sys.ambient(), options.cloud_size);
  auto cloud_b = cloud_a;
  for (Symbol s : word_a) cloud_a.apply(sys.map(s));
  for (Symbol s : word_b) cloud_b.apply(sys.map(s));
  const auto box_a = exact_forward_enclosure(sys, word_a);
  const auto box_b = exact_forward_enclosure(sys, word_b);

  HorizonReport report;
  report.n_max = n_max;
  report.exhaustive = options.omega_samples == 0;
  report.levels.resize(n_max + 1);
  for (std::size_t i = 0; i <= n_max; ++i) report.levels[i].n = i;

  if (report.exhaustive) {
    if (checked_power(static_cast<std::uint64_t>(sys.k()), n_max, kHorizonBudget) > kHorizonBudget)
      throw Error(Errc::budget_exceeded, "k^n_max exceeds 2^24 prefixes");
    HorizonWalk root(sys, n_max);
    if (!root.check(cloud_a, cloud_b, box_a, box_b) || n_max == 0) {
      report.levels = root.levels;
      report.violation = root.violation;
      return report;
    }
    merge_levels(report.levels, root.levels);
    std::vector<std::optional<HorizonWalk>> walks(static_cast<std::size_t>(sys.k()));
    parallel_for(walks.size(), options.threads, [&](std::size_t j) {
      HorizonWalk walk(sys, n_max);
      walk.step(static_cast<Symbol>(j), cloud_a, cloud_b, box_a, box_b);
      walks[j].emplace(std::move(walk));
    });
    for (const auto& w : walks) {
      merge_levels(report.levels, w->levels);
      if (!report.violation && w->violation) report.violation = w->violation;
    }
    return report;
  }

  std::vector<std::optional<HorizonWalk>> walks(options.omega_samples);
  parallel_for(walks.size(), options.threads, [&](std::size_t i) {
    auto rng = make_rng(options.seed, i);
    HorizonWalk walk(sys, n_max);
    auto ca = cloud_a;
    auto cb = cloud_b;
    auto ba = box_a;
    auto bb = box_b;
    for (std::size_t n = 0;; ++n) {
      if (!walk.check(ca, cb, ba, bb) || n == n_max) break;
      const auto j = static_cast<Symbol>(rng() % static_cast<std::uint64_t>(sys.k()));
      const auto& f = sys.exact_maps()[static_cast<std::size_t>(j)];
      ca.apply(sys.map(j));
      cb.apply(sys.map(j));
      ba = box_image(f, ba);
      bb = box_image(f, bb);
      walk.omega.push_back(j);
    }
    walks[i].emplace(std::move(walk));
  });
  for (const auto& w : walks) {
    merge_levels(report.levels, w->levels);
    if (!report.violation && w->violation) report.violation = w->violation;
  }
  return report;
}

std::optional<SplitWitness> search_witness(const MapSystem& sys, std::size_t max_len) {
  const auto c = criteria_for(sys);
  const auto& p = sys.shift().forward;
  // Admissible words of each length in lexicographic order, with their images.
  std::vector<std::vector<std::pair<Word, ExactBox>>> words(max_len + 1);
  if (max_len >= 1)
    for (Symbol j = 0; j < sys.k(); ++j) words[1].emplace_back(Word{j}, exact_forward_enclosure(sys, Word{j}));
  for (std::size_t len = 2; len <= max_len; ++len)
    for (const auto& [w, box] : words[len - 1])
      for (Symbol j = 0; j < sys.k(); ++j) {
        if (!p.positive(w.back(), j)) continue;
        Word next = w;
        next.push_back(j);
        words[len].emplace_back(std::move(next), box_image(sys.exact_maps()[static_cast<std::size_t>(j)], box));
      }
  for (std::size_t total = 2; total <= 2 * max_len; ++total) {
    for (std::size_t la = 1; la < total; ++la) {
      const auto lb = total - la;
      if (la > max_len || lb > max_len) continue;
      for (const auto& [a, box_a] : words[la])
        for (const auto& [b, box_b] : words[lb]) {
          if (a == b || a.back() != b.back()) continue;
          if (auto w = certify(c, a, b, box_a, box_b)) return w;
        }
    }
  }
  return std::nullopt;
}

namespace {

// Shortest Q-path from `from` to `to`, both endpoints included.
std::optional<Word> shortest_path(const TransitionMatrix& q, Symbol from, Symbol to) {
  const int k = q.size();
  std::vector<int> parent(static_cast<std::size_t>(k), -2);
  std::vector<Symbol> queue{from};
  parent[static_cast<std::size_t>(from)] = -1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Symbol i = queue[head];
    if (i == to) break;
    for (Symbol j = 0; j < k; ++j)
      if (q.positive(i, j) && parent[static_cast<std::size_t>(j)] == -2) {
        parent[static_cast<std::size_t>(j)] = i;
        queue.push_back(j);
      }
  }
  if (parent[static_cast<std::size_t>(to)] == -2) return std::nullopt;
  std::vector<Symbol> path;
  for (Symbol s = to; s != -1; s = parent[static_cast<std::size_t>(s)]) path.push_back(s);
  std::reverse(path.begin(), path.end());
  return Word(std::move(path));
}

using StateSet = std::vector<bool>;

// Layer t holds the states reachable from `start` in exactly t steps.
std::vector<StateSet> reach_layers(const TransitionMatrix& q, Symbol start, std::size_t steps) {
  const auto k = static_cast<std::size_t>(q.size());
  std::vector<StateSet> layers(1, StateSet(k, false));
  layers[0][static_cast<std::size_t>(start)] = true;
  for (std::size_t t = 0; t < steps; ++t) {
    StateSet next(k, false);
    for (std::size_t i = 0; i < k; ++i)
      if (layers.back()[i])
        for (std::size_t j = 0; j < k; ++j)
          if (q.positive(static_cast<int>(i), static_cast<int>(j))) next[j] = true;
    layers.push_back(std::move(next));
  }
  return layers;
}

// Appends a Q-path of exactly layers.size()-1 steps ending at `end`.
void extend_to(const TransitionMatrix& q, const std::vector<StateSet>& layers, Symbol end, Word& w) {
  std::vector<Symbol> tail{end};
  for (std::size_t t = layers.size() - 1; t > 1; --t) {
    const Symbol cur = tail.back();
    for (Symbol y = 0; y < q.size(); ++y)
      if (layers[t - 1][static_cast<std::size_t>(y)] && q.positive(y, cur)) {
        tail.push_back(y);
        break;
      }
  }
  if (layers.size() > 1)
    for (auto it = tail.rbegin(); it != tail.rend(); ++it) w.push_back(*it);
}

}  // namespace

NormalizedPair normalize_witness(const MapSystem& sys, const SplitWitness& witness, NormalizeMode mode,
                                 TailPolicy tail) {
  const auto& shift = sys.shift();
  const auto& q = shift.inverse;
  const int k = sys.k();
  check_words(sys, witness.word_a, witness.word_b);
  if (mode == NormalizeMode::primitive && !shift.primitive())
    throw Error(Errc::not_primitive, "transition matrix is " + std::string(to_string(shift.classification)));

  Word xi = witness.word_a.reversed();
  Word eta = witness.word_b.reversed();
  if (mode == NormalizeMode::row_positive) {
    const auto u = row_positive_state(shift.forward);
    if (!u) throw Error(Errc::no_row_positive_state, "no state u with p_uj > 0 for every j");
    auto path = shortest_path(q, *u, xi.front());
    if (!path) throw Error(Errc::hypothesis_violated, "no Q-path from the row-positive state");
    const auto prefix = path->slice(0, path->size() - 1);
    xi = prefix + xi;
    eta = prefix + eta;
  }

  const auto base = std::max(xi.size(), eta.size());
  auto first_in = [k](const StateSet& set) {
    Symbol z = 0;
    while (z < k && !set[static_cast<std::size_t>(z)]) ++z;
    return z;
  };
  if (tail == TailPolicy::free) {
    // Every state has a successor, so each layer is nonempty.
    const auto lx = reach_layers(q, xi.back(), base - xi.size());
    const auto le = reach_layers(q, eta.back(), base - eta.size());
    extend_to(q, lx, first_in(lx.back()), xi);
    extend_to(q, le, first_in(le.back()), eta);
  } else {
    const auto cap = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
    bool done = false;
    for (std::size_t len = base; len <= base + cap && !done; ++len) {
      const auto lx = reach_layers(q, xi.back(), len - xi.size());
      const auto le = reach_layers(q, eta.back(), len - eta.size());
      StateSet both(static_cast<std::size_t>(k));
      for (std::size_t z = 0; z < both.size(); ++z) both[z] = lx.back()[z] && le.back()[z];
      const Symbol z = first_in(both);
      if (z == k) continue;
      extend_to(q, lx, z, xi);
      extend_to(q, le, z, eta);
      done = true;
    }
    if (!done) throw Error(Errc::hypothesis_violated, "no connector within k^2 steps matches the last symbols");
  }

  const auto m1 = exact_reverse_enclosure(sys, xi);
  const auto m2 = exact_reverse_enclosure(sys, eta);
  if (!disjoint(m1, m2))
    throw Error(Errc::hypothesis_violated, "reverse images of " + xi.to_string() + " and " + eta.to_string() +
                                               " are not projection-wise disjoint");
  return {std::move(xi), std::move(eta)};
}

}  // namespace mrp
