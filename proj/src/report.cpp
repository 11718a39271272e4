#include "mrp/report.hpp"

#include <fstream>

namespace mrp {

Csv::Csv(std::vector<std::string> header) : header_(std::move(header)) {}

Csv& Csv::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw Error(Errc::invalid_argument, "CSV row width differs from header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string Csv::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out += cells[i];
        continue;
      }
      out += '"';
      for (char c : cells[i]) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string cell(double v) { return format_double(v); }
std::string cell(const Rational& v) { return to_string(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::invalid_argument, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(Errc::invalid_argument, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string measure_table(const StateTaggedMeasure& mu) {
  const auto particles = mu.sorted();
  const std::size_t dim = particles.empty() ? 0 : particles.front().x.size();
  std::vector<std::string> header{"state"};
  for (std::size_t s = 0; s < dim; ++s) header.push_back("x" + std::to_string(s + 1));
  header.push_back("weight");
  Csv csv(std::move(header));
  for (const auto& p : particles) {
    std::vector<std::string> cells{std::to_string(p.state + 1)};
    for (double v : p.x) cells.push_back(cell(v));
    cells.push_back(cell(p.weight));
    csv.row(std::move(cells));
  }
  return csv.str();
}

nlohmann::json box_json(const IntervalBox& box) {
  nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
  for (const auto& r : box.coords()) {
    lo.push_back(r.lo);
    hi.push_back(r.hi);
  }
  return {{"lo", lo}, {"hi", hi}};
}

nlohmann::json box_json(const ExactBox& box) {
  nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
  for (const auto& r : box.coords()) {
    lo.push_back(to_string(r.lo));
    hi.push_back(to_string(r.hi));
  }
  return {{"lo", lo}, {"hi", hi}};
}

}  // namespace mrp
