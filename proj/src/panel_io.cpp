#include "sdidml/panel_io.hpp"

#include "sdidml/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace sdidml {

namespace {

constexpr std::array<std::string_view, 4> kRequired = {"unit", "time", "outcome", "treatment"};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

template <class T>
std::optional<T> parse_number(const std::string& text, std::size_t row, std::string_view field) {
  const std::string s = trim(text);
  if (s.empty() || s == "NA") return std::nullopt;
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // from_chars rejects "inf"/"nan"; treat those as non-finite rather than malformed
    if constexpr (std::is_floating_point_v<T>) {
      if (s == "inf" || s == "-inf" || s == "nan" || s == "Inf" || s == "-Inf" || s == "NaN")
        throw Error(ErrorCode::NonFiniteValue, "row " + std::to_string(row) + ", field '" + std::string(field) + "'");
    }
    throw Error(ErrorCode::InvalidValue,
                "row " + std::to_string(row) + ", field '" + std::string(field) + "': cannot parse '" + s + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

PanelDataset read_panel_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MissingField, "empty input: no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  for (std::size_t j = 0; j < kRequired.size(); ++j) {
    if (j >= header.size() || header[j] != kRequired[j]) {
      const bool present = std::find(header.begin(), header.end(), kRequired[j]) != header.end();
      throw Error(ErrorCode::MissingField, "column '" + std::string(kRequired[j]) + "' " +
                                               (present ? "must be column " + std::to_string(j + 1) : "is missing"));
    }
  }
  std::vector<std::string> covariate_names(header.begin() + kRequired.size(), header.end());

  std::vector<RawRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    auto cell = [&](std::size_t j) -> const std::string* { return j < fields.size() ? &fields[j] : nullptr; };
    RawRecord r;
    if (const auto* s = cell(0); s && !trim(*s).empty()) r.unit = trim(*s);
    if (const auto* s = cell(1)) r.time = parse_number<int>(*s, row, "time");
    if (const auto* s = cell(2)) r.outcome = parse_number<double>(*s, row, "outcome");
    if (const auto* s = cell(3)) r.treatment = parse_number<double>(*s, row, "treatment");
    for (std::size_t j = 0; j < covariate_names.size(); ++j) {
      const auto* s = cell(kRequired.size() + j);
      r.covariates.push_back(s ? parse_number<double>(*s, row, covariate_names[j]) : std::nullopt);
    }
    records.push_back(std::move(r));
    ++row;
  }
  return build_panel(records, std::move(covariate_names));
}

PanelDataset read_panel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifacts, "cannot open '" + path.string() + "'");
  return read_panel_csv(in);
}

void write_panel_csv(const PanelDataset& panel, std::ostream& out) {
  out << "unit,time,outcome,treatment";
  for (const auto& name : panel.covariate_names()) out << ',' << name;
  out << '\n';
  for (const auto& obs : panel.observations()) {
    out << obs.unit << ',' << obs.time << ',' << format_double(obs.outcome) << ',' << obs.treatment;
    for (double x : obs.covariates) out << ',' << format_double(x);
    out << '\n';
  }
}

void write_panel_csv(const PanelDataset& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path.string() + "'");
  write_panel_csv(panel, out);
}

}  // namespace sdidml
