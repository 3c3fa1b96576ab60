#include "churn/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace churn::plot {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string accuracy_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Rgb {
  double r, g, b;
};

// Viridis sampled at five stops.
constexpr std::array<Rgb, 5> kRamp{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};

std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0) * (kRamp.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(t), kRamp.size() - 2);
  const double f = t - static_cast<double>(i);
  const auto mix = [&](double a, double b) { return static_cast<int>(std::lround(a + (b - a) * f)); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(kRamp[i].r, kRamp[i + 1].r), mix(kRamp[i].g, kRamp[i + 1].g),
                mix(kRamp[i].b, kRamp[i + 1].b));
  return buf;
}

void open_svg(std::ostringstream& out, int width, int height) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"10\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
}

void text(std::ostringstream& out, double x, double y, std::string_view s, std::string_view anchor = "middle",
          std::string_view extra = "") {
  out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor << '"';
  if (!extra.empty()) out << ' ' << extra;
  out << '>' << xml_escape(s) << "</text>\n";
}

std::vector<int> distinct(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string heatmap_svg(const GridResult& result, Family family) {
  std::vector<int> rs, ls;
  for (const auto& c : result.cells)
    if (c.family == family) {
      rs.push_back(c.resample);
      ls.push_back(c.lag);
    }
  const auto rows = distinct(std::move(rs)), cols = distinct(std::move(ls));
  double lo = 1.0, hi = 0.0;
  for (const auto& c : result.cells)
    if (c.family == family && c.ok()) {
      lo = std::min(lo, c.mean);
      hi = std::max(hi, c.mean);
    }
  if (lo > hi) lo = hi = 0.0;

  constexpr int left = 60, top = 40, right = 110, bottom = 50;
  const int width = left + static_cast<int>(cols.size()) * kCellPixels + right;
  const int height = top + std::max<int>(static_cast<int>(rows.size()) * kCellPixels, 100) + bottom;
  std::ostringstream out;
  open_svg(out, width, height);
  text(out, width / 2.0, 20, "Mean accuracy, " + std::string(to_string(family)), "middle", "font-size=\"13\"");

  const auto col_of = [&](int lag) { return std::lower_bound(cols.begin(), cols.end(), lag) - cols.begin(); };
  const auto row_of = [&](int r) { return std::lower_bound(rows.begin(), rows.end(), r) - rows.begin(); };
  out << "<g id=\"cells\">\n";
  for (const auto& c : result.cells) {
    if (c.family != family) continue;
    const double x = left + static_cast<double>(col_of(c.lag)) * kCellPixels;
    const double y = top + static_cast<double>(row_of(c.resample)) * kCellPixels;
    const std::string fill = c.ok() ? ramp_color(hi > lo ? (c.mean - lo) / (hi - lo) : 0.5) : "#bdbdbd";
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << kCellPixels << "\" height=\""
        << kCellPixels << "\" fill=\"" << fill << "\"><title>resample " << c.resample << ", lag " << c.lag << ": "
        << (c.ok() ? accuracy_text(c.mean) : "failed: " + xml_escape(*c.error)) << "</title></rect>\n";
  }
  out << "</g>\n";

  const int label_every = std::max(1, 28 / kCellPixels);
  for (std::size_t j = 0; j < cols.size(); j += label_every)
    text(out, left + (j + 0.5) * kCellPixels, top + rows.size() * kCellPixels + 12.0, std::to_string(cols[j]));
  for (std::size_t i = 0; i < rows.size(); ++i)
    text(out, left - 4.0, top + (i + 0.75) * kCellPixels, std::to_string(rows[i]), "end");
  text(out, left + cols.size() * kCellPixels / 2.0, height - 12.0, "lag (days)");
  text(out, 14, top + rows.size() * kCellPixels / 2.0, "resample (days)", "middle",
       "transform=\"rotate(-90 14 " + num(top + rows.size() * kCellPixels / 2.0) + ")\"");

  const double bar_x = left + cols.size() * kCellPixels + 20.0;
  constexpr int steps = 20, bar_h = 100;
  for (int s = 0; s < steps; ++s)
    out << "<rect x=\"" << num(bar_x) << "\" y=\"" << num(top + bar_h - (s + 1) * (bar_h / double(steps)))
        << "\" width=\"12\" height=\"" << num(bar_h / double(steps)) << "\" fill=\""
        << ramp_color((s + 0.5) / steps) << "\"/>\n";
  text(out, bar_x + 16, top + 8.0, accuracy_text(hi), "start");
  text(out, bar_x + 16, top + bar_h, accuracy_text(lo), "start");
  out << "</svg>\n";
  return out.str();
}

std::string cut_svg(const std::vector<CutPoint>& points, std::string_view title, std::string_view x_label) {
  constexpr int width = 640, height = 360, left = 60, right = 20, top = 40, bottom = 50;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  std::ostringstream out;
  open_svg(out, width, height);
  text(out, width / 2.0, 20, title, "middle", "font-size=\"13\"");
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  if (points.empty()) {
    text(out, width / 2.0, height / 2.0, "no successful cells");
    out << "</svg>\n";
    return out.str();
  }

  double x_lo = points.front().axis, x_hi = points.back().axis;
  double y_lo = 1.0, y_hi = 0.0;
  for (const auto& p : points) {
    y_lo = std::min(y_lo, p.mean - p.stddev);
    y_hi = std::max(y_hi, p.mean + p.stddev);
  }
  y_lo = std::max(0.0, y_lo - 0.02);
  y_hi = std::min(1.0, y_hi + 0.02);
  if (!(y_hi > y_lo)) y_hi = y_lo + 0.1;
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  const auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  const auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" points=\"";
  for (const auto& p : points) out << num(px(p.axis)) << ',' << num(py(std::min(1.0, p.mean + p.stddev))) << ' ';
  for (auto it = points.rbegin(); it != points.rend(); ++it)
    out << num(px(it->axis)) << ',' << num(py(std::max(0.0, it->mean - it->stddev))) << ' ';
  out << "\"/>\n<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
  for (const auto& p : points) out << num(px(p.axis)) << ',' << num(py(p.mean)) << ' ';
  out << "\"/>\n";
  for (const auto& p : points)
    out << "<circle cx=\"" << num(px(p.axis)) << "\" cy=\"" << num(py(p.mean)) << "\" r=\"3\" fill=\"#08519c\"><title>"
        << p.axis << ": " << accuracy_text(p.mean) << "</title></circle>\n";

  for (int t = 0; t <= 4; ++t) {
    const double y = y_lo + (y_hi - y_lo) * t / 4.0;
    text(out, left - 6.0, py(y) + 3.0, accuracy_text(y), "end");
    const double x = x_lo + (x_hi - x_lo) * t / 4.0;
    text(out, px(x), top + plot_h + 14.0, num(x), "middle");
  }
  text(out, left + plot_w / 2.0, height - 12.0, x_label);
  text(out, 14, top + plot_h / 2.0, "accuracy", "middle", "transform=\"rotate(-90 14 " + num(top + plot_h / 2.0) + ")\"");
  out << "</svg>\n";
  return out.str();
}

std::string histogram_svg(const PopulationStats& stats) {
  constexpr int width = 640, height = 360, left = 60, right = 20, top = 40, bottom = 50;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  std::ostringstream out;
  open_svg(out, width, height);
  text(out, width / 2.0, 20, "Nonzero daily downloads", "middle", "font-size=\"13\"");
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  const auto bins = stats.active_histogram.size();
  if (bins == 0 || stats.bin_edges.size() != bins + 1) {
    out << "</svg>\n";
    return out.str();
  }
  double peak = 0.0;
  for (std::size_t k = 0; k < bins; ++k) peak = std::max({peak, stats.active_histogram[k], stats.inactive_histogram[k]});
  if (!(peak > 0.0)) peak = 1.0;
  const double log_lo = std::log(stats.bin_edges.front()), log_hi = std::log(stats.bin_edges.back());
  const auto px = [&](double v) { return left + (std::log(v) - log_lo) / (log_hi - log_lo) * plot_w; };
  const auto py = [&](double m) { return top + (1.0 - m / peak) * plot_h; };

  const auto bars = [&](const std::vector<double>& h, std::string_view id, std::string_view color) {
    out << "<g id=\"" << id << "\" fill=\"" << color << "\" fill-opacity=\"0.5\">\n";
    for (std::size_t k = 0; k < bins; ++k) {
      const double x0 = px(stats.bin_edges[k]), x1 = px(stats.bin_edges[k + 1]);
      out << "<rect x=\"" << num(x0) << "\" y=\"" << num(py(h[k])) << "\" width=\"" << num(x1 - x0) << "\" height=\""
          << num(top + plot_h - py(h[k])) << "\"/>\n";
    }
    out << "</g>\n";
  };
  bars(stats.active_histogram, "active", "#2171b5");
  bars(stats.inactive_histogram, "inactive", "#cb181d");

  const auto marker = [&](double median, std::string_view id, std::string_view color) {
    const double x = std::clamp(px(median), double(left), left + plot_w);
    out << "<line id=\"" << id << "\" x1=\"" << num(x) << "\" x2=\"" << num(x) << "\" y1=\"" << top << "\" y2=\""
        << num(top + plot_h) << "\" stroke=\"" << color << "\" stroke-width=\"2\" stroke-dasharray=\"5,3\"/>\n";
  };
  marker(stats.active_median, "active-median", "#08306b");
  marker(stats.inactive_median, "inactive-median", "#67000d");

  for (int t = 0; t <= 4; ++t) {
    const double v = std::exp(log_lo + (log_hi - log_lo) * t / 4.0);
    text(out, px(v), top + plot_h + 14.0, num(v));
  }
  text(out, left + plot_w / 2.0, height - 12.0, "downloads per day (log scale)");
  text(out, left + plot_w - 4.0, top + 14.0, "active (median " + num(stats.active_median) + ")", "end",
       "fill=\"#2171b5\"");
  text(out, left + plot_w - 4.0, top + 28.0, "inactive (median " + num(stats.inactive_median) + ")", "end",
       "fill=\"#cb181d\"");
  text(out, left + plot_w - 4.0, top + 42.0, "overlap " + accuracy_text(stats.overlap_coefficient), "end");
  out << "</svg>\n";
  return out.str();
}

}  // namespace churn::plot
