#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrp/map_system.hpp"
#include "mrp/operator_lab.hpp"

namespace mrp {

inline constexpr const char* kVersion = "mrp-lab 1.0.0";

/// Comma-separated table with a header row. Numbers go through `cell`, so
/// output never depends on the locale.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  Csv& row(std::vector<std::string> cells);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(const Rational& v);
std::string cell(std::size_t v);
std::string cell(bool v);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// One row per particle: state (1-based), coordinates, weight; sorted.
std::string measure_table(const StateTaggedMeasure& mu);

nlohmann::json box_json(const IntervalBox& box);
nlohmann::json box_json(const ExactBox& box);

}  // namespace mrp
