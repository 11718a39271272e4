#include "mrp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace mrp {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(Errc::config_invalid, path + ": " + what);
}

// Object view that rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) invalid(path_, "expected an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& require(const std::string& key) {
    const auto* v = find(key);
    if (!v) invalid(path_, "missing key '" + key + "'");
    return *v;
  }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  std::size_t size(const std::string& key, std::size_t fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned()) invalid(at(key), "expected a nonnegative integer");
    return v->get<std::size_t>();
  }
  bool flag(const std::string& key, bool fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) invalid(at(key), "expected true or false");
    return v->get<bool>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) invalid(at(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) invalid(path_, "unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Rational number(const json& v, const std::string& path) {
  try {
    if (v.is_number_integer()) return Rational(v.dump());
    if (v.is_number_float()) return rational_from_double(v.get<double>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const Error& e) {
    invalid(path, e.what());
  }
  invalid(path, "expected a number or a rational string such as \"1/3\"");
}

double real(const json& v, const std::string& path) {
  if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
  return number(v, path).get_d();
}

std::vector<Rational> vector_of(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) invalid(path, "expected a nonempty array");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

SquareMatrix<Rational> matrix_of(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) invalid(path, "expected a nonempty array of rows");
  std::vector<std::vector<Rational>> rows;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto row_path = path + "[" + std::to_string(i) + "]";
    rows.push_back(vector_of(v[i], row_path));
    if (rows.back().size() != v.size())
      invalid(row_path, "row " + std::to_string(i + 1) + " has " + std::to_string(rows.back().size()) +
                            " entries, expected " + std::to_string(v.size()));
  }
  return SquareMatrix<Rational>::from_rows(rows);
}

Word word_of(const json& v, const std::string& path) {
  try {
    if (v.is_string()) return Word::parse(v.get<std::string>());
    if (v.is_array()) {
      std::vector<int> symbols;
      for (const auto& s : v) {
        if (!s.is_number_integer()) invalid(path, "word symbols must be integers");
        symbols.push_back(s.get<int>());
      }
      return Word::from_one_based(symbols);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::config_invalid) throw;
    invalid(path, e.what());
  }
  invalid(path, "expected a word such as \"1,2,1\" or [1,2,1]");
}

ExactMap::SignTable sign_table_of(const json& v, const std::string& path) {
  if (!v.is_array()) invalid(path, "expected an array of sign rows");
  ExactMap::SignTable table;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& row = v[i];
    std::vector<Sign> out;
    const auto row_path = path + "[" + std::to_string(i) + "]";
    try {
      if (row.is_string()) {
        for (char c : row.get<std::string>()) out.push_back(sign_from_char(c));
      } else if (row.is_array()) {
        for (const auto& c : row) {
          if (!c.is_string() || c.get<std::string>().size() != 1) invalid(row_path, "signs are \"+\", \"-\" or \"0\"");
          out.push_back(sign_from_char(c.get<std::string>()[0]));
        }
      } else {
        invalid(row_path, "expected a sign row");
      }
    } catch (const Error& e) {
      if (e.code() == Errc::config_invalid) throw;
      invalid(row_path, e.what());
    }
    table.push_back(std::move(out));
  }
  return table;
}

ExactMap map_of(const json& v, const std::string& path) {
  Fields f(v, path);
  const auto& kind = f.require("kind");
  ExactMap map = [&] {
    if (kind == "affine") {
      auto a = matrix_of(f.require("matrix"), f.at("matrix"));
      auto b = vector_of(f.require("offset"), f.at("offset"));
      if (b.size() != a.size()) invalid(f.at("offset"), "offset length must match the matrix size");
      return ExactMap::affine(std::move(a), std::move(b));
    }
    if (kind == "moebius") {
      auto get = [&](const char* key) { return number(f.require(key), f.at(key)); };
      try {
        return ExactMap::moebius(get("a"), get("b"), get("c"), get("d"));
      } catch (const Error& e) {
        if (e.code() == Errc::config_invalid) throw;
        invalid(path, e.what());
      }
    }
    invalid(f.at("kind"), "expected \"affine\" or \"moebius\"");
  }();
  if (const auto* d = f.find("declared_types")) {
    try {
      map.set_declared_types(sign_table_of(*d, f.at("declared_types")));
    } catch (const Error& e) {
      if (e.code() == Errc::config_invalid) throw;
      invalid(f.at("declared_types"), e.what());
    }
  }
  f.finish();
  return map;
}

std::vector<std::size_t> coordinates_of(const json& v, const std::string& path) {
  if (!v.is_array()) invalid(path, "expected an array of 1-based coordinates");
  std::vector<std::size_t> out;
  for (const auto& c : v) {
    if (!c.is_number_unsigned() || c.get<std::size_t>() == 0) invalid(path, "coordinates are 1-based integers");
    out.push_back(c.get<std::size_t>() - 1);
  }
  return out;
}

json word_json(const Word& w) { return w.to_string(); }

}  // namespace

MapSystem parse_system(const json& system) {
  Fields f(system, "system");
  Fields amb(f.require("ambient"), "system.ambient");
  auto lo = vector_of(amb.require("lo"), amb.at("lo"));
  auto hi = vector_of(amb.require("hi"), amb.at("hi"));
  amb.finish();
  if (lo.size() != hi.size()) invalid("system.ambient", "lo and hi must have equal length");
  ExactBox box = [&] {
    try {
      return ExactBox(lo, hi);
    } catch (const Error& e) {
      invalid("system.ambient", e.what());
    }
  }();
  const auto& maps_json = f.require("maps");
  if (!maps_json.is_array() || maps_json.empty()) invalid("system.maps", "expected a nonempty array of maps");
  std::vector<ExactMap> maps;
  for (std::size_t i = 0; i < maps_json.size(); ++i)
    maps.push_back(map_of(maps_json[i], "system.maps[" + std::to_string(i) + "]"));
  auto transition = matrix_of(f.require("transition"), "system.transition");
  f.finish();
  return MapSystem::create(std::move(box), std::move(maps), std::move(transition));
}

ExperimentConfig parse_config(const json& doc) {
  Fields top(doc, "config");
  ExperimentConfig cfg;
  cfg.name = top.text("name", "experiment");
  if (const auto* s = top.find("seed")) {
    if (!s->is_number_unsigned()) invalid("config.seed", "expected a nonnegative integer");
    cfg.seed = s->get<std::uint64_t>();
  }
  cfg.output_dir = top.text("output_dir", "out");
  cfg.system_json = top.require("system");
  cfg.system = parse_system(cfg.system_json);
  const int k = cfg.system.k();
  const auto dim = cfg.system.dim();

  const json empty = json::object();
  const auto* ex = top.find("experiments");
  Fields blocks(ex ? *ex : empty, "experiments");
  auto block = [&](const char* key) { return blocks.find(key); };

  if (const auto* b = block("split")) {
    Fields f(*b, "experiments.split");
    if (const auto* w = f.find("word_a")) cfg.split.word_a = word_of(*w, f.at("word_a"));
    if (const auto* w = f.find("word_b")) cfg.split.word_b = word_of(*w, f.at("word_b"));
    if (cfg.split.word_a.has_value() != cfg.split.word_b.has_value())
      invalid("experiments.split", "word_a and word_b must be given together");
    for (const auto* w : {&cfg.split.word_a, &cfg.split.word_b})
      if (*w) {
        if ((*w)->empty()) invalid("experiments.split", "witness words must be nonempty");
        try {
          (*w)->check_alphabet(k);
        } catch (const Error& e) {
          invalid("experiments.split", e.what());
        }
      }
    cfg.split.search_max_len = f.size("search_max_len", cfg.split.search_max_len);
    cfg.split.horizon = f.size("horizon", cfg.split.horizon);
    cfg.split.omega_samples = f.size("omega_samples", cfg.split.omega_samples);
    cfg.split.cloud_size = f.size("cloud_size", cfg.split.cloud_size);
    f.finish();
  }
  if (const auto* b = block("oracle")) {
    Fields f(*b, "experiments.oracle");
    auto& o = cfg.oracle;
    o.ell_max = f.size("ell_max", o.ell_max);
    o.geometric_ell_max = f.size("geometric_ell_max", o.geometric_ell_max);
    o.grid_points = f.size("grid_points", o.grid_points);
    if (const auto* c = f.find("coordinates")) o.coordinates = coordinates_of(*c, f.at("coordinates"));
    for (auto c : o.coordinates)
      if (c >= dim) invalid(f.at("coordinates"), "coordinate " + std::to_string(c + 1) + " exceeds the dimension");
    const auto mode = f.text("mode", "primitive");
    if (mode == "primitive")
      o.mode = NormalizeMode::primitive;
    else if (mode == "row_positive")
      o.mode = NormalizeMode::row_positive;
    else
      invalid(f.at("mode"), "expected \"primitive\" or \"row_positive\"");
    const auto tail = f.text("tail", "free");
    if (tail == "free")
      o.tail = TailPolicy::free;
    else if (tail == "match_last")
      o.tail = TailPolicy::match_last;
    else
      invalid(f.at("tail"), "expected \"free\" or \"match_last\"");
    o.exact = f.flag("exact", o.exact);
    f.finish();
  }
  if (const auto* b = block("operator")) {
    Fields f(*b, "experiments.operator");
    auto& o = cfg.op;
    o.steps = f.size("steps", o.steps);
    o.particles = f.size("particles", o.particles);
    o.target_samples = f.size("target_samples", o.target_samples);
    o.depth = f.size("depth", o.depth);
    if (o.particles < static_cast<std::size_t>(k)) invalid(f.at("particles"), "must be at least the state count");
    if (o.target_samples == 0) invalid(f.at("target_samples"), "must be positive");
    f.finish();
  }
  if (const auto* b = block("sync")) {
    Fields f(*b, "experiments.sync");
    cfg.sync.trials = f.size("trials", cfg.sync.trials);
    cfg.sync.n_max = f.size("n_max", cfg.sync.n_max);
    cfg.sync.cloud_size = f.size("cloud_size", cfg.sync.cloud_size);
    f.finish();
  }
  if (const auto* b = block("contract")) {
    Fields f(*b, "experiments.contract");
    cfg.contract.trials = f.size("trials", cfg.contract.trials);
    cfg.contract.n_max = f.size("n_max", cfg.contract.n_max);
    f.finish();
  }
  if (const auto* b = block("weak_hyp")) {
    Fields f(*b, "experiments.weak_hyp");
    cfg.weak_hyp.trials = f.size("trials", cfg.weak_hyp.trials);
    cfg.weak_hyp.depth = f.size("depth", cfg.weak_hyp.depth);
    if (const auto* t = f.find("tol")) cfg.weak_hyp.tol = real(*t, f.at("tol"));
    f.finish();
  }
  if (const auto* b = block("coding")) {
    Fields f(*b, "experiments.coding");
    if (const auto* p = f.find("periods")) {
      if (!p->is_array()) invalid(f.at("periods"), "expected an array of words");
      for (std::size_t i = 0; i < p->size(); ++i) {
        const auto path = f.at("periods") + "[" + std::to_string(i) + "]";
        auto w = word_of((*p)[i], path);
        if (w.empty()) invalid(path, "periods must be nonempty");
        try {
          w.check_alphabet(k);
        } catch (const Error& e) {
          invalid(path, e.what());
        }
        cfg.coding.periods.push_back(std::move(w));
      }
    }
    cfg.coding.depth = f.size("depth", cfg.coding.depth);
    cfg.coding.samples = f.size("samples", cfg.coding.samples);
    if (cfg.coding.depth == 0) invalid(f.at("depth"), "must be positive");
    f.finish();
  }
  if (cfg.coding.periods.empty())
    for (Symbol j = 0; j < k; ++j) cfg.coding.periods.push_back(Word{j});
  if (const auto* b = block("ergodic")) {
    Fields f(*b, "experiments.ergodic");
    auto& e = cfg.ergodic;
    try {
      e.observable = Observable::parse(f.text("observable", "coord:1"));
    } catch (const Error& err) {
      invalid(f.at("observable"), err.what());
    }
    if (e.observable.s >= dim || e.observable.t >= dim)
      invalid(f.at("observable"), "coordinate exceeds the dimension");
    e.steps = f.size("steps", e.steps);
    e.batches = f.size("batches", e.batches);
    if (e.steps == 0 || e.batches == 0) invalid("experiments.ergodic", "steps and batches must be positive");
    if (const auto* s = f.find("starts")) {
      if (!s->is_array()) invalid(f.at("starts"), "expected an array of points");
      for (std::size_t i = 0; i < s->size(); ++i) {
        const auto path = f.at("starts") + "[" + std::to_string(i) + "]";
        Point x;
        for (const auto& r : vector_of((*s)[i], path)) x.push_back(r.get_d());
        if (!cfg.system.ambient().contains(x)) invalid(path, "point outside the ambient box");
        e.starts.push_back(std::move(x));
      }
    }
    e.target_samples = f.size("target_samples", e.target_samples);
    e.depth = f.size("depth", e.depth);
    if (e.target_samples == 0) invalid(f.at("target_samples"), "must be positive");
    f.finish();
  }
  if (cfg.ergodic.starts.empty()) {
    cfg.ergodic.starts.push_back(cfg.system.ambient().lo());
    cfg.ergodic.starts.push_back(cfg.system.ambient().hi());
  }
  blocks.finish();
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_invalid, "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::config_invalid, path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json ExperimentConfig::resolved() const {
  json j;
  j["name"] = name;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["system"] = system_json;
  auto& e = j["experiments"];
  e["split"] = {{"search_max_len", split.search_max_len},
                {"horizon", split.horizon},
                {"omega_samples", split.omega_samples},
                {"cloud_size", split.cloud_size}};
  if (split.word_a) {
    e["split"]["word_a"] = word_json(*split.word_a);
    e["split"]["word_b"] = word_json(*split.word_b);
  }
  json coords = json::array();
  for (auto c : oracle.coordinates) coords.push_back(c + 1);
  e["oracle"] = {{"ell_max", oracle.ell_max},
                 {"geometric_ell_max", oracle.geometric_ell_max},
                 {"grid_points", oracle.grid_points},
                 {"coordinates", coords},
                 {"mode", oracle.mode == NormalizeMode::primitive ? "primitive" : "row_positive"},
                 {"tail", oracle.tail == TailPolicy::free ? "free" : "match_last"},
                 {"exact", oracle.exact}};
  e["operator"] = {{"steps", op.steps},
                   {"particles", op.particles},
                   {"target_samples", op.target_samples},
                   {"depth", op.depth}};
  e["sync"] = {{"trials", sync.trials}, {"n_max", sync.n_max}, {"cloud_size", sync.cloud_size}};
  e["contract"] = {{"trials", contract.trials}, {"n_max", contract.n_max}};
  e["weak_hyp"] = {{"trials", weak_hyp.trials},
                   {"depth", weak_hyp.depth},
                   {"tol", std::isinf(weak_hyp.tol) ? json("inf") : json(weak_hyp.tol)}};
  json periods = json::array();
  for (const auto& w : coding.periods) periods.push_back(word_json(w));
  e["coding"] = {{"periods", periods}, {"depth", coding.depth}, {"samples", coding.samples}};
  json starts = json::array();
  for (const auto& x : ergodic.starts) starts.push_back(x);
  e["ergodic"] = {{"observable", ergodic.observable.to_string()},
                  {"steps", ergodic.steps},
                  {"batches", ergodic.batches},
                  {"starts", starts},
                  {"target_samples", ergodic.target_samples},
                  {"depth", ergodic.depth}};
  return j;
}

}  // namespace mrp
