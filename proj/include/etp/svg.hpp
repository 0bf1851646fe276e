#pragma once

// Presentation-only plots of the scenario CSV tables.

#include <string>

namespace etp::svg {

// Two-column tables become bar charts and three-column tables (x, y, value)
// become heatmaps. Returns an empty string for tables it does not plot.
std::string render_csv(const std::string& file_name, const std::string& csv);

}  // namespace etp::svg
