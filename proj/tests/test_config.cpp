#include <filesystem>

#include "doctest.h"
#include "mrp/config.hpp"
#include "support.hpp"

using namespace mrp;
using nlohmann::json;

namespace {

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("no error thrown");
  return Error(Errc::invalid_argument, "");
}

json cantor_doc() {
  return json::parse(R"({
    "seed": 3,
    "system": {
      "ambient": {"lo": [0], "hi": [1]},
      "maps": [
        {"kind": "affine", "matrix": [["1/3"]], "offset": [0]},
        {"kind": "affine", "matrix": [[0.3333333333333333]], "offset": ["2/3"]}
      ],
      "transition": [["1/2", "1/2"], [0.5, 0.5]]
    }
  })");
}

}  // namespace

TEST_CASE("shipped configs load") {
  const std::filesystem::path dir = MRP_CONFIG_DIR;
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const auto cfg = load_config(entry.path());
    CHECK(cfg.system.k() >= 1);
    // Resolved configs parse back to themselves.
    const auto resolved = cfg.resolved();
    CHECK(parse_config(resolved).resolved() == resolved);
  }
  CHECK(count == 5);
  const auto cantor = load_config(dir / "cantor_iid.json");
  REQUIRE(cantor.split.word_a.has_value());
  CHECK(*cantor.split.word_a == Word{0, 0});
  CHECK(*cantor.split.word_b == Word{1, 0});
  CHECK(cantor.coding.periods.size() == 3);
  CHECK(cantor.ergodic.starts.size() == 2);
}

TEST_CASE("rational strings and floats") {
  const auto cfg = parse_config(cantor_doc());
  CHECK(cfg.seed == 3);
  CHECK(cfg.system.exact_shift().forward(1, 0) == Rational(1, 2));
  CHECK(box_image(cfg.system.exact_maps()[1], cfg.system.exact_ambient())[0].lo == Rational(2, 3));
  CHECK(cfg.oracle.ell_max == 6);
  CHECK(cfg.coding.periods == std::vector<Word>{Word{0}, Word{1}});
}

TEST_CASE("words as strings or arrays") {
  auto doc = cantor_doc();
  doc["experiments"]["split"] = {{"word_a", "1,1"}, {"word_b", json::array({2, 1})}};
  const auto cfg = parse_config(doc);
  CHECK(*cfg.split.word_a == Word{0, 0});
  CHECK(*cfg.split.word_b == Word{1, 0});

  doc["experiments"]["split"] = {{"word_a", "1,3"}, {"word_b", "2,1"}};
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::config_invalid);
  doc["experiments"]["split"] = {{"word_a", "1,1"}};
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::config_invalid);
}

TEST_CASE("unknown keys are rejected with their path") {
  auto doc = cantor_doc();
  doc["sytem"] = 1;
  auto e = error_of([&] { parse_config(doc); });
  CHECK(e.code() == Errc::config_invalid);
  CHECK(std::string(e.what()).find("sytem") != std::string::npos);

  doc = cantor_doc();
  doc["experiments"]["sync"] = {{"trails", 5}};
  e = error_of([&] { parse_config(doc); });
  CHECK(e.code() == Errc::config_invalid);
  CHECK(std::string(e.what()).find("experiments.sync") != std::string::npos);

  doc = cantor_doc();
  doc["system"]["maps"][0]["slope"] = 1;
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::config_invalid);
}

TEST_CASE("invalid systems keep their module error") {
  auto doc = cantor_doc();
  doc["system"]["transition"][1] = json::array({"1/2", "1/3"});
  const auto e = error_of([&] { parse_config(doc); });
  CHECK(e.code() == Errc::not_stochastic);
  CHECK(std::string(e.what()).find("row 2") != std::string::npos);

  doc = cantor_doc();
  doc["system"]["maps"][1]["offset"] = json::array({"3/4"});
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::not_self_map);

  doc = cantor_doc();
  doc["system"]["transition"][0] = json::array({"1/2"});
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::config_invalid);
}

TEST_CASE("field validation") {
  auto doc = cantor_doc();
  doc["experiments"]["oracle"] = {{"tail", "loose"}};
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::config_invalid);
  doc["experiments"]["oracle"] = {{"ell_max", -1}};
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::config_invalid);
  doc["experiments"]["oracle"] = {{"coordinates", {2}}};
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::config_invalid);
  doc["experiments"].erase("oracle");
  doc["experiments"]["ergodic"] = {{"observable", "coord:2"}};
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::config_invalid);
  doc["experiments"]["ergodic"] = {{"starts", {{2}}}};
  CHECK(error_of([&] { parse_config(doc); }).code() == Errc::config_invalid);
  doc["experiments"]["ergodic"] = json::object();
  doc["experiments"]["weak_hyp"] = {{"tol", "inf"}};
  CHECK(std::isinf(parse_config(doc).weak_hyp.tol));
  CHECK(error_of([] { load_config("/nonexistent/config.json"); }).code() == Errc::config_invalid);
}
