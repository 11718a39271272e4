// Command-line driver: loads an experiment file, runs one subcommand (or all
// of them) and writes CSV tables plus summary.json into the output directory.

#include <cmath>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "mrp/config.hpp"
#include "mrp/cylinder_oracle.hpp"
#include "mrp/operator_lab.hpp"
#include "mrp/report.hpp"
#include "mrp/splitting.hpp"
#include "mrp/sync_lab.hpp"

namespace {

using namespace mrp;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

const std::vector<std::string> kCommands{"stationary", "split-check", "split-search", "oracle", "operator", "sync",
                                         "contract",   "weak-hyp",    "coding",       "ergodic", "all"};

json point_json(const Point& x) { return json(x); }

class Runner {
 public:
  Runner(ExperimentConfig cfg, std::filesystem::path out, unsigned threads, bool exact)
      : cfg_(std::move(cfg)), sys_(cfg_.system), out_(std::move(out)), threads_(threads), exact_(exact) {}

  void run(const std::string& command) {
    static const std::map<std::string, void (Runner::*)(json&)> table{
        {"stationary", &Runner::stationary}, {"split-check", &Runner::split_check},
        {"split-search", &Runner::split_search}, {"oracle", &Runner::oracle},
        {"operator", &Runner::op},           {"sync", &Runner::sync},
        {"contract", &Runner::contract},     {"weak-hyp", &Runner::weak_hyp},
        {"coding", &Runner::coding},         {"ergodic", &Runner::ergodic}};
    if (command == "all") {
      for (const auto& c : kCommands)
        if (c != "all") guarded(c, table.at(c));
    } else {
      guarded(command, table.at(command));
    }
  }

  json summary(const std::string& command) const {
    auto resolved = cfg_.resolved();
    resolved["output_dir"] = out_.string();
    json j;
    j["version"] = kVersion;
    j["subcommand"] = command;
    j["seed"] = cfg_.seed;
    j["exact"] = exact_;
    j["config"] = std::move(resolved);
    j["results"] = results_;
    j["verification_failed"] = failed_;
    return j;
  }

  bool failed() const { return failed_; }

 private:
  void guarded(const std::string& name, void (Runner::*step)(json&)) {
    json& slot = results_[name];
    try {
      (this->*step)(slot);
    } catch (const Error& e) {
      if (e.code() == Errc::config_invalid) throw;
      slot["error"] = e.what();
      fail(name, e.what());
    }
  }

  void fail(const std::string& name, const std::string& why) {
    failed_ = true;
    std::cerr << name << ": " << why << '\n';
  }

  void write(const std::string& file, const std::string& content) { write_atomic(out_ / file, content); }

  const std::optional<SplitWitness>& witness() {
    if (!witness_ready_) {
      if (cfg_.split.word_a)
        witness_ = check_theorem_d(sys_, *cfg_.split.word_a, *cfg_.split.word_b);
      else
        witness_ = search_witness(sys_, cfg_.split.search_max_len);
      witness_ready_ = true;
    }
    return witness_;
  }

  static json witness_json(const SplitWitness& w) {
    return {{"word_a", w.word_a.to_string()},
            {"word_b", w.word_b.to_string()},
            {"m1", box_json(w.m1)},
            {"m2", box_json(w.m2)},
            {"certified_by", std::string(to_string(w.certified_by))},
            {"swapped", w.swapped}};
  }

  void stationary(json& r) {
    const auto& shift = sys_.shift();
    const int k = shift.size();
    std::vector<std::string> header{"state", "p"};
    for (int j = 0; j < k; ++j) header.push_back("q" + std::to_string(j + 1));
    Csv csv(header);
    double residual = 0.0;
    for (int j = 0; j < k; ++j) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += shift.stationary[static_cast<std::size_t>(i)] * shift.forward(i, j);
      residual = std::max(residual, std::abs(acc - shift.stationary[static_cast<std::size_t>(j)]));
    }
    for (int i = 0; i < k; ++i) {
      std::vector<std::string> cells{std::to_string(i + 1), cell(shift.stationary[static_cast<std::size_t>(i)])};
      for (int j = 0; j < k; ++j) cells.push_back(cell(shift.inverse(i, j)));
      csv.row(std::move(cells));
    }
    write("stationary.csv", csv.str());
    r["stationary"] = shift.stationary;
    r["classification"] = std::string(to_string(shift.classification));
    r["residual"] = residual;
    if (sys_.has_exact_shift()) {
      json exact = json::array();
      for (const auto& v : sys_.exact_shift().stationary) exact.push_back(to_string(v));
      r["stationary_exact"] = exact;
    }
    const auto type = classify_monotone_type(sys_);
    r["monotone_type"] = type ? json(type->to_string()) : json(nullptr);
    if (residual > kAlgebraTolerance) fail("stationary", "residual above 1e-12");
  }

  void split_check(json& r) {
    const auto& w = witness();
    r["witness"] = w ? witness_json(*w) : json(nullptr);
    if (!cfg_.split.word_a && !w) {
      fail("split-check", "no words configured and none found by search");
      return;
    }
    const auto a = cfg_.split.word_a ? *cfg_.split.word_a : w->word_a;
    const auto b = cfg_.split.word_b ? *cfg_.split.word_b : w->word_b;
    HorizonOptions ho;
    ho.omega_samples = cfg_.split.omega_samples;
    ho.seed = cfg_.seed;
    ho.cloud_size = cfg_.split.cloud_size;
    ho.threads = threads_;
    const auto h = verify_split_horizon(sys_, a, b, cfg_.split.horizon, ho);
    Csv csv({"n", "checked", "certified"});
    for (const auto& l : h.levels) csv.row({cell(l.n), cell(std::size_t(l.checked)), cell(std::size_t(l.certified))});
    write("split_horizon.csv", csv.str());
    r["horizon"] = {{"n_max", h.n_max}, {"exhaustive", h.exhaustive}, {"status", h.status()}};
    if (h.violation)
      r["horizon"]["violation"] = {{"omega", h.violation->omega.to_string()},
                                   {"coordinate", h.violation->coordinate + 1}};
    if (!w) fail("split-check", "order separation not satisfied");
    if (h.violation) fail("split-check", "splitting falsified at omega = " + h.violation->omega.to_string());
  }

  void split_search(json& r) {
    const auto w = search_witness(sys_, cfg_.split.search_max_len);
    r["max_len"] = cfg_.split.search_max_len;
    r["witness"] = w ? witness_json(*w) : json(nullptr);
    if (!w) fail("split-search", "no certified witness up to the length bound");
  }

  template <class T>
  void oracle_in(const OracleSystem<T>& os, const NormalizedPair& pair, json& r) {
    OracleOptions oo;
    oo.ell_max = cfg_.oracle.ell_max;
    oo.geometric_ell_max = cfg_.oracle.geometric_ell_max;
    oo.threads = threads_;
    auto coords = cfg_.oracle.coordinates;
    if (coords.empty())
      for (std::size_t s = 0; s < sys_.dim(); ++s) coords.push_back(s);
    Csv rows({"ell", "x", "lhs", "rhs", "verdict", "coordinate", "members", "injective", "measure_monotone"});
    Csv geo({"ell", "sigma", "bound", "holds"});
    std::size_t total = 0, failing = 0, relaxed = 0;
    json reports = json::array();
    for (auto s : coords) {
      const auto report = verify_bounds(os, pair, x_grid(os.ambient, s, cfg_.oracle.grid_points), s, oo);
      for (const auto& row : report.rows) {
        ++total;
        if (row.verdict() == Verdict::fails) ++failing;
        if (row.verdict() == Verdict::holds_relaxed) ++relaxed;
        rows.row({cell(row.ell), cell(row.x), cell(row.lhs), cell(row.rhs), std::string(to_string(row.verdict())),
                  cell(s + 1), cell(std::size_t(row.members)), cell(row.injective), cell(row.measure_monotone)});
      }
      for (const auto& g : report.geometric) {
        if (!g.holds) ++failing;
        if (s == coords.front()) geo.row({cell(g.ell), cell(g.sigma), cell(g.bound), cell(g.holds)});
      }
      reports.push_back({{"coordinate", s + 1},
                         {"w", report.w.to_string()},
                         {"w_prime", report.w_prime.to_string()},
                         {"swapped", report.swapped},
                         {"measure_w", cell(report.measure_w)},
                         {"rho", cell(report.rho)},
                         {"rho0", cell(report.rho0)},
                         {"all_hold", report.all_hold()}});
    }
    write("oracle.csv", rows.str());
    write("oracle_geometric.csv", geo.str());
    r["reports"] = reports;
    r["rows"] = total;
    r["failing"] = failing;
    r["relaxed"] = relaxed;
    r["verdict"] = failing ? "fails" : (relaxed ? "holds (upper-bound relaxation)" : "holds");
    std::cout << "oracle: " << total << " rows, " << failing << " failing -> " << r["verdict"].get<std::string>()
              << '\n';
    if (failing) fail("oracle", "some verdicts fail");
  }

  void oracle(json& r) {
    const auto& w = witness();
    if (!w) {
      fail("oracle", "no certified split witness");
      r["witness"] = nullptr;
      return;
    }
    const auto pair = normalize_witness(sys_, *w, cfg_.oracle.mode, cfg_.oracle.tail);
    r["witness"] = witness_json(*w);
    r["xi"] = pair.xi.to_string();
    r["eta"] = pair.eta.to_string();
    r["n"] = pair.length();
    const bool exact = exact_ || cfg_.oracle.exact;
    r["mode"] = exact ? "rational" : "double";
    if (exact)
      oracle_in(make_exact_oracle_system(sys_), pair, r);
    else
      oracle_in(make_oracle_system(sys_), pair, r);
  }

  void op(json& r) {
    TargetOptions to;
    to.samples = cfg_.op.target_samples;
    to.depth = cfg_.op.depth;
    to.seed = cfg_.seed;
    to.threads = threads_;
    const auto target = estimate_target(sys_, to);
    to.seed = cfg_.seed + cfg_.op.target_samples;
    const auto second = estimate_target(sys_, to);
    const auto initials = default_initial_measures(sys_);
    StabilityOptions so;
    so.steps = cfg_.op.steps;
    so.particles = cfg_.op.particles;
    so.seed = cfg_.seed;
    const auto rows = stability_experiment(sys_, initials, target.measure, so);
    Csv csv({"step", "initial_id", "distance", "mass_gap", "mass_error"});
    double max_error = 0.0;
    json final_distance = json::array();
    for (const auto& row : rows) {
      csv.row({cell(row.step), cell(row.initial_id + 1), cell(row.distance), cell(row.mass_gap), cell(row.mass_error)});
      max_error = std::max(max_error, row.mass_error);
      if (row.step == so.steps) final_distance.push_back(row.distance);
    }
    write("operator.csv", csv.str());
    write("target_measure.csv", measure_table(target.measure));
    r["final_distance"] = final_distance;
    r["target_agreement"] = weak_star_distance(target.measure, second.measure);
    r["max_mass_error"] = max_error;
    r["target_max_diameter"] = target.max_diameter();
    if (max_error > kAlgebraTolerance) fail("operator", "mass vector departs from p P^n by more than 1e-12");
  }

  SyncOptions sync_options(std::size_t trials, std::size_t n_max, std::size_t cloud) const {
    SyncOptions so;
    so.trials = trials;
    so.n_max = n_max;
    so.cloud_size = cloud;
    so.seed = cfg_.seed;
    so.threads = threads_;
    return so;
  }

  void sync(json& r) {
    const auto summary = sync_experiment(sys_, sync_options(cfg_.sync.trials, cfg_.sync.n_max, cfg_.sync.cloud_size));
    Csv curves({"trial", "n", "upper", "lower"});
    Csv fits({"trial", "q_hat", "C_hat"});
    bool bracketed = true;
    for (const auto& t : summary.trials) {
      for (std::size_t i = 0; i < t.curve.n.size(); ++i) {
        curves.row({cell(t.trial + 1), cell(t.curve.n[i]), cell(t.curve.upper[i]), cell(t.curve.lower[i])});
        if (t.curve.lower[i] > t.curve.upper[i] * (1 + 1e-12)) bracketed = false;
      }
      if (t.fit)
        fits.row({cell(t.trial + 1), cell(t.fit->q), cell(t.fit->c)});
      else
        fits.row({cell(t.trial + 1), "nan", "nan"});
    }
    write("sync_curves.csv", curves.str());
    write("sync_fits.csv", fits.str());
    r["max_q_hat"] = summary.max_q;
    r["fraction_contracting"] = summary.fraction_contracting;
    r["bracketed"] = bracketed;
    if (!bracketed) fail("sync", "sampled lower bound exceeds the enclosure");
  }

  void contract(json& r) {
    const auto trials =
        measure_contraction_experiment(sys_, sync_options(cfg_.contract.trials, cfg_.contract.n_max, 0));
    Csv lengths({"trial", "s", "n", "length"});
    Csv fits({"trial", "s", "q_hat", "C_hat"});
    double max_q = 0.0;
    for (const auto& t : trials)
      for (std::size_t s = 0; s < t.lengths.size(); ++s) {
        for (std::size_t n = 0; n < t.lengths[s].size(); ++n)
          lengths.row({cell(t.trial + 1), cell(s + 1), cell(n), cell(t.lengths[s][n])});
        if (t.fits[s]) {
          fits.row({cell(t.trial + 1), cell(s + 1), cell(t.fits[s]->q), cell(t.fits[s]->c)});
          max_q = std::max(max_q, t.fits[s]->q);
        } else {
          fits.row({cell(t.trial + 1), cell(s + 1), "nan", "nan"});
        }
      }
    write("contract.csv", lengths.str());
    write("contract_fits.csv", fits.str());
    r["max_q_hat"] = max_q;
  }

  void weak_hyp(json& r) {
    WeakHyperbolicityOptions wo;
    wo.trials = cfg_.weak_hyp.trials;
    wo.depth = cfg_.weak_hyp.depth;
    wo.tol = cfg_.weak_hyp.tol;
    wo.seed = cfg_.seed;
    wo.threads = threads_;
    const auto res = weak_hyperbolicity_experiment(sys_, wo);
    r["trials"] = res.trials;
    r["below_tol"] = res.below_tol;
    r["fraction"] = res.fraction();
    r["max_diameter"] = res.max_diameter;
  }

  void coding(json& r) {
    const auto m = sys_.dim();
    std::vector<std::string> header{"period", "method"};
    for (std::size_t s = 0; s < m; ++s) header.push_back("x" + std::to_string(s + 1));
    header.push_back("bound");
    Csv csv(header);
    json points = json::array();
    for (const auto& period : cfg_.coding.periods) {
      Word w;
      while (w.size() < cfg_.coding.depth) w.push_back(period[w.size() % period.size()]);
      const auto cp = coding_point(sys_, w);
      std::vector<std::string> cells{period.to_string(), "depth " + std::to_string(cfg_.coding.depth)};
      for (double v : cp.point) cells.push_back(cell(v));
      cells.push_back(cell(cp.bound));
      csv.row(std::move(cells));
      json entry{{"period", period.to_string()}, {"point", point_json(cp.point)}, {"bound", cp.bound}};
      const bool affine = std::all_of(sys_.exact_maps().begin(), sys_.exact_maps().end(),
                                      [](const ExactMap& f) { return f.is_affine(); });
      std::optional<Point> exact;
      if (affine) {
        try {
          exact = periodic_coding_point(sys_, period);
        } catch (const Error& e) {
          if (e.code() != Errc::invalid_argument) throw;
          entry["fixed_point"] = nullptr;
        }
      }
      if (exact) {
        std::vector<std::string> row{period.to_string(), "fixed point"};
        for (double v : *exact) row.push_back(cell(v));
        row.push_back(cell(0.0));
        csv.row(std::move(row));
        entry["fixed_point"] = point_json(*exact);
      }
      points.push_back(std::move(entry));
    }
    write("coding.csv", csv.str());
    r["points"] = points;

    std::size_t violations = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < cfg_.coding.samples; ++i) {
      const auto omega =
          sample_word(sys_.shift(), cfg_.coding.depth + 1, Direction::inverse, std::nullopt, cfg_.seed + i);
      const auto full = coding_point(sys_, omega);
      const auto tail = coding_point(sys_, omega.slice(1, omega.size() - 1));
      const auto image = sys_.map(omega.front())(tail.point);
      double residual = 0.0;
      for (std::size_t s = 0; s < m; ++s) residual += std::abs(image[s] - full.point[s]);
      const double allowed = full.bound + tail.bound;
      worst = std::max(worst, residual);
      if (residual > allowed + 1e-12) ++violations;
    }
    r["invariance"] = {{"samples", cfg_.coding.samples}, {"max_residual", worst}, {"violations", violations}};
    if (violations) fail("coding", "invariance residual above the reported bounds");
  }

  void ergodic(json& r) {
    const auto& e = cfg_.ergodic;
    TargetOptions to;
    to.samples = e.target_samples;
    to.depth = e.depth;
    to.seed = cfg_.seed;
    to.threads = threads_;
    const auto target = estimate_target(sys_, to);
    const auto [reference, reference_error] = measure_mean(target.measure, e.observable);
    std::vector<std::string> header{"start_id"};
    for (std::size_t s = 0; s < sys_.dim(); ++s) header.push_back("x" + std::to_string(s + 1));
    header.insert(header.end(), {"average", "std_error"});
    Csv csv(header);
    json starts = json::array();
    for (std::size_t i = 0; i < e.starts.size(); ++i) {
      const auto [avg, se] = birkhoff_average(sys_, e.starts[i], e.observable, e.steps, e.batches, cfg_.seed);
      std::vector<std::string> cells{cell(i + 1)};
      for (double v : e.starts[i]) cells.push_back(cell(v));
      cells.push_back(cell(avg));
      cells.push_back(cell(se));
      csv.row(std::move(cells));
      const double sigma = std::hypot(se, reference_error);
      starts.push_back({{"start", point_json(e.starts[i])},
                        {"average", avg},
                        {"std_error", se},
                        {"within_3_sigma", std::abs(avg - reference) <= 3 * sigma}});
    }
    write("ergodic.csv", csv.str());
    r["observable"] = e.observable.to_string();
    r["reference"] = reference;
    r["reference_error"] = reference_error;
    r["starts"] = starts;
  }

  ExperimentConfig cfg_;
  const MapSystem& sys_;
  std::filesystem::path out_;
  unsigned threads_;
  bool exact_;
  json results_ = json::object();
  bool failed_ = false;
  bool witness_ready_ = false;
  std::optional<SplitWitness> witness_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markovian random products of maps: splitting, oracle and synchronization laboratory"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned threads = 1;
  bool exact = false;
  app.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(kCommands));
  app.add_option("--config", config_path, "Experiment file (JSON)")->required();
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out, "Override the output directory");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--exact", exact, "Run the cylinder oracle in rational arithmetic");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  std::optional<ExperimentConfig> cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (seed) cfg->seed = *seed;
  const std::filesystem::path out_dir = out ? *out : cfg->output_dir;

  try {
    Runner runner(std::move(*cfg), out_dir, threads, exact);
    runner.run(command);
    write_atomic(out_dir / "summary.json", runner.summary(command).dump(2) + "\n");
    std::cout << command << ": " << (runner.failed() ? "verification failed" : "ok") << " (" << out_dir.string()
              << ")\n";
    return runner.failed() ? kExitFailed : kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::config_invalid ? kExitConfig : kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}
