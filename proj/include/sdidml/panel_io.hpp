#pragma once

#include "sdidml/panel.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace sdidml {

/// Panel CSV: header `unit,time,outcome,treatment,<covariates...>`.
PanelDataset read_panel_csv(std::istream& in);
PanelDataset read_panel_csv(const std::filesystem::path& path);

/// Writes the same layout; doubles use the shortest round-trip form.
void write_panel_csv(const PanelDataset& panel, std::ostream& out);
void write_panel_csv(const PanelDataset& panel, const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace sdidml
