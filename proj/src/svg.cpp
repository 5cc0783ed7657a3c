#include "gpq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace gpq::svg {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

std::string tick_label(double v) {
  if (v == 0.0) return "0";
  const double a = std::abs(v);
  if (a >= 1e4 || a < 1e-3) return fmt::format("{:.2e}", v);
  return fmt::format("{:.4g}", v);
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

// Perceptually ordered dark-to-bright ramp.
std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  static const double stops[][3] = {{0.050, 0.030, 0.530}, {0.490, 0.010, 0.660}, {0.800, 0.280, 0.470},
                                     {0.970, 0.590, 0.250}, {0.940, 0.980, 0.130}};
  const double s = t * 4.0;
  const int i = std::min(3, static_cast<int>(s));
  const double f = s - i;
  auto c = [&](int k) { return static_cast<int>(std::lround(255.0 * ((1 - f) * stops[i][k] + f * stops[i + 1][k]))); };
  return fmt::format("#{:02x}{:02x}{:02x}", c(0), c(1), c(2));
}

}  // namespace

std::string render(const LineChart& chart, int width, int height) {
  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  Range xr, yr;
  for (const auto& s : chart.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  for (const auto& r : chart.references) yr.add(r.y);
  xr.finish();
  yr.finish();
  auto X = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto Y = [&](double v) { return top + (yr.hi - v) / (yr.hi - yr.lo) * ph; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "style=\"font-family:sans-serif;font-size:12px\">\n",
      width, height, width, height);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" style=\"fill:#ffffff\"/>\n", width, height);
  out += fmt::format("<text x=\"{}\" y=\"22\" style=\"font-size:14px;text-anchor:middle\">{}</text>\n",
                     num(left + pw / 2), escape(chart.title));
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" style=\"fill:none;stroke:#333333\"/>\n",
                     num(left), num(top), num(pw), num(ph));
  for (int k = 0; k <= 4; ++k) {
    const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" style=\"stroke:#333333\"/>"
                       "<text x=\"{0}\" y=\"{3}\" style=\"text-anchor:middle\">{4}</text>\n",
                       num(X(xv)), num(top + ph), num(top + ph + 5), num(top + ph + 20), tick_label(xv));
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" style=\"stroke:#333333\"/>"
                       "<text x=\"{3}\" y=\"{4}\" style=\"text-anchor:end\">{5}</text>\n",
                       num(left - 5), num(Y(yv)), num(left), num(left - 8), num(Y(yv) + 4), tick_label(yv));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" style=\"text-anchor:middle\">{}</text>\n", num(left + pw / 2),
                     num(height - 15.0), escape(chart.x_label));
  out += fmt::format("<text x=\"18\" y=\"{0}\" transform=\"rotate(-90 18 {0})\" style=\"text-anchor:middle\">{1}</text>\n",
                     num(top + ph / 2), escape(chart.y_label));

  double legend_y = top + 10;
  for (const auto& r : chart.references) {
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" style=\"stroke:{3};stroke-dasharray:6 4\"/>\n",
                       num(left), num(Y(r.y)), num(left + pw), r.color);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" style=\"stroke:{3};stroke-dasharray:6 4\"/>"
                       "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
                       num(left + pw + 10), num(legend_y), num(left + pw + 30), r.color, num(left + pw + 35),
                       num(legend_y + 4), escape(r.label));
    legend_y += 18;
  }
  for (const auto& s : chart.series) {
    std::string pts;
    const std::size_t m = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts += fmt::format("{},{} ", num(X(s.x[i])), num(Y(s.y[i])));
    }
    out += fmt::format("<polyline points=\"{}\" style=\"fill:none;stroke:{};stroke-width:2\"/>\n", pts, s.color);
    if (s.markers)
      for (std::size_t i = 0; i < m; ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3.5\" style=\"fill:{}\"/>\n", num(X(s.x[i])),
                             num(Y(s.y[i])), s.color);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" style=\"stroke:{3};stroke-width:2\"/>"
                       "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
                       num(left + pw + 10), num(legend_y), num(left + pw + 30), s.color, num(left + pw + 35),
                       num(legend_y + 4), escape(s.label));
    legend_y += 18;
  }
  out += "</svg>\n";
  return out;
}

std::string heatmap(const Field2D& f, const std::string& title, const std::vector<Marker>& path,
                    bool log_scale, std::size_t max_cells, int size) {
  const Grid2D& g = f.grid;
  const std::size_t stride = std::max<std::size_t>(1, (g.n + max_cells - 1) / max_cells);
  const std::size_t cells = (g.n + stride - 1) / stride;
  const double margin = 40;
  const double cell = (size - 2 * margin) / static_cast<double>(cells);

  auto transform = [&](double v) { return log_scale ? std::log10(1.0 + std::max(v, 0.0)) : v; };
  Range r;
  for (std::size_t i = 0; i < g.n; i += stride)
    for (std::size_t j = 0; j < g.n; j += stride) r.add(transform(f.at(i, j)));
  const double lo = std::isfinite(r.lo) ? r.lo : 0.0;
  const double hi = (std::isfinite(r.hi) && r.hi > lo) ? r.hi : lo + 1.0;

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\" "
      "style=\"font-family:sans-serif;font-size:12px\" shape-rendering=\"crispEdges\">\n",
      size);
  out += fmt::format("<text x=\"{}\" y=\"24\" style=\"font-size:14px;text-anchor:middle\">{}</text>\n",
                     num(size / 2.0), escape(title));
  // first index is x (left to right), second is y (bottom to top)
  for (std::size_t a = 0; a < cells; ++a) {
    for (std::size_t b = 0; b < cells; ++b) {
      const double v = transform(f.at(a * stride, b * stride));
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" style=\"fill:{}\"/>\n",
                         num(margin + a * cell), num(size - margin - (b + 1) * cell), num(cell + 0.05),
                         num(cell + 0.05), ramp((v - lo) / (hi - lo)));
    }
  }
  auto px = [&](double x) { return margin + (x + g.L) / (2.0 * g.L) * (size - 2 * margin); };
  auto py = [&](double y) { return size - margin - (y + g.L) / (2.0 * g.L) * (size - 2 * margin); };
  if (!path.empty()) {
    std::string pts;
    for (const auto& m : path) pts += fmt::format("{},{} ", num(px(m.x)), num(py(m.y)));
    out += fmt::format("<polyline points=\"{}\" style=\"fill:none;stroke:#ffffff;stroke-width:1.5\"/>\n", pts);
    for (const auto& m : path)
      out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" style=\"fill:{};stroke:#000000\"/>\n", num(px(m.x)),
                         num(py(m.y)), m.color);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" style=\"text-anchor:middle\">x in [{}, {}]</text>\n", num(size / 2.0),
                     num(size - 12.0), tick_label(-g.L), tick_label(g.L));
  out += fmt::format("<text x=\"{}\" y=\"{}\" style=\"text-anchor:end\">{} {} .. {}</text>\n", num(size - margin),
                     num(margin - 6.0), log_scale ? "log10(1+v)" : "v", tick_label(lo), tick_label(hi));
  out += "</svg>\n";
  return out;
}

}  // namespace gpq::svg
