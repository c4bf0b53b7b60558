#include "dtr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "dtr/csv.hpp"

namespace dtr {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 52.0;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo < hi)) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::string fmt(double v) {
  // Tick labels: short fixed formatting is easier to read than full precision.
  const double rounded = std::round(v * 1e4) / 1e4;
  std::string s = format_double(rounded);
  return s;
}

}  // namespace

void LinePlot::write(const std::filesystem::path& path) const {
  Range xr;
  Range yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.include(v);
    for (double v : s.y) yr.include(v);
  }
  for (const auto& b : bands) {
    for (double v : b.x) xr.include(v);
    for (double v : b.lower) yr.include(v);
    for (double v : b.upper) yr.include(v);
  }
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) {
    throw std::runtime_error("LinePlot: nothing to draw");
  }
  xr.pad();
  yr.pad();

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto sx = [&](double v) {
    return kMarginLeft + (v - xr.lo) / (xr.hi - xr.lo) * plot_w;
  };
  const auto sy = [&](double v) {
    return kMarginTop + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h;
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\">\n";
  for (const auto& [key, value] : comments) {
    out << "<!-- " << key << ": " << value << " -->\n";
  }
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes with 5 ticks per side.
  out << "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<line x1=\"" << sx(xr.lo) << "\" y1=\"" << sy(yr.lo) << "\" x2=\""
      << sx(xr.hi) << "\" y2=\"" << sy(yr.lo) << "\"/>\n";
  out << "<line x1=\"" << sx(xr.lo) << "\" y1=\"" << sy(yr.lo) << "\" x2=\""
      << sx(xr.lo) << "\" y2=\"" << sy(yr.hi) << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    out << "<line x1=\"" << sx(fx) << "\" y1=\"" << sy(yr.lo) << "\" x2=\"" << sx(fx)
        << "\" y2=\"" << sy(yr.lo) + 4 << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << sx(fx) << "\" y=\"" << sy(yr.lo) + 18
        << "\" text-anchor=\"middle\">" << fmt(fx) << "</text>\n";
    out << "<line x1=\"" << sx(xr.lo) - 4 << "\" y1=\"" << sy(fy) << "\" x2=\""
        << sx(xr.lo) << "\" y2=\"" << sy(fy) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << sx(xr.lo) - 8 << "\" y=\"" << sy(fy) + 4
        << "\" text-anchor=\"end\">" << fmt(fy) << "</text>\n";
  }
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";
  out << "<text x=\"" << kMarginLeft + plot_w / 2
      << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << title
      << "</text>\n";
  out << "</g>\n";

  for (const auto& band : bands) {
    out << "<polygon fill=\"" << band.color << "\" fill-opacity=\"0.18\" points=\"";
    for (std::size_t i = 0; i < band.x.size(); ++i) {
      out << sx(band.x[i]) << "," << sy(band.upper[i]) << " ";
    }
    for (std::size_t i = band.x.size(); i-- > 0;) {
      out << sx(band.x[i]) << "," << sy(band.lower[i]) << " ";
    }
    out << "\"/>\n";
  }

  double legend_y = kMarginTop + 8;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      const double lx = kWidth - kMarginRight - 150;
      out << "<line x1=\"" << lx << "\" y1=\"" << legend_y << "\" x2=\"" << lx + 22
          << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
          << "\" stroke-width=\"1.8\"/>\n";
      out << "<text x=\"" << lx + 28 << "\" y=\"" << legend_y + 4
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">" << s.label
          << "</text>\n";
      legend_y += 16;
    }
  }
  out << "</svg>\n";
}

}  // namespace dtr
