#pragma once

#include "churn/eval.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace churn::plot {

/// Cell edge length of the heatmap in pixels.
inline constexpr int kCellPixels = 14;

/// Resample window (rows) against lag (columns), colored by mean accuracy of
/// `family`. Failed cells are grey. Width and height grow with the grid.
std::string heatmap_svg(const GridResult& result, Family family);

/// Mean accuracy with a one-stddev band along one grid axis.
std::string cut_svg(const std::vector<CutPoint>& points, std::string_view title, std::string_view x_label);

/// Overlaid active and inactive histograms on log-spaced bins, with dashed
/// median markers.
std::string histogram_svg(const PopulationStats& stats);

/// Escapes &, <, >, " and ' for XML text and attributes.
std::string xml_escape(std::string_view text);

}  // namespace churn::plot
