// Minimal deterministic SVG plotting: fixed canvas, fixed palette, fixed
// number formatting, so identical data yields identical bytes.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "obstacle/errors.hpp"

namespace obstacle::detail {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> pts;
  bool dashed = false;
  bool markers = false;
};

class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel, bool logx, bool logy)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)),
        logx_(logx), logy_(logy) {}

  void add(Series s) { series_.push_back(std::move(s)); }

  /// Horizontal reference line drawn across the x-range.
  void hline(double y, const std::string& name, const std::string& color) {
    hlines_.push_back({y, name, color});
  }

  void write(const std::string& path) const {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto scan = [&](double x, double y) {
      const double tx = tx_(x), ty = ty_(y);
      if (!std::isfinite(tx) || !std::isfinite(ty)) return;
      xmin = std::min(xmin, tx); xmax = std::max(xmax, tx);
      ymin = std::min(ymin, ty); ymax = std::max(ymax, ty);
    };
    for (const auto& s : series_)
      for (const auto& [x, y] : s.pts) scan(x, y);
    for (const auto& h : hlines_) scan(logx_ ? std::pow(10.0, xmin) : xmin, h.y);
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
    const double padx = 0.04 * (xmax - xmin), pady = 0.06 * (ymax - ymin);
    xmin -= padx; xmax += padx; ymin -= pady; ymax += pady;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-family=\"monospace\" font-size=\"15\">" << title_ << "</text>\n";

    auto px = [&](double tx) { return ML + (tx - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double ty) { return H - MB - (ty - ymin) / (ymax - ymin) * (H - MT - MB); };

    // frame
    os << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << (W - ML - MR)
       << "\" height=\"" << (H - MT - MB)
       << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // ticks
    for (double t : ticks(xmin, xmax, logx_)) {
      const double X = px(t);
      os << "<line x1=\"" << fmt(X) << "\" y1=\"" << (H - MB) << "\" x2=\"" << fmt(X)
         << "\" y2=\"" << (H - MB + 5) << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << fmt(X) << "\" y=\"" << (H - MB + 18)
         << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
         << tick_label(t, logx_) << "</text>\n";
    }
    for (double t : ticks(ymin, ymax, logy_)) {
      const double Y = py(t);
      os << "<line x1=\"" << (ML - 5) << "\" y1=\"" << fmt(Y) << "\" x2=\"" << ML
         << "\" y2=\"" << fmt(Y) << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << (ML - 8) << "\" y=\"" << fmt(Y + 4)
         << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
         << tick_label(t, logy_) << "</text>\n";
    }
    os << "<text x=\"" << (ML + (W - ML - MR) / 2) << "\" y=\"" << (H - 8)
       << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">" << xlabel_
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << (MT + (H - MT - MB) / 2)
       << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
          "transform=\"rotate(-90 16 " << (MT + (H - MT - MB) / 2) << ")\">" << ylabel_
       << "</text>\n";

    for (const auto& h : hlines_) {
      const double Y = py(ty_(h.y));
      os << "<line x1=\"" << ML << "\" y1=\"" << fmt(Y) << "\" x2=\"" << (W - MR)
         << "\" y2=\"" << fmt(Y) << "\" stroke=\"" << h.color
         << "\" stroke-dasharray=\"6 3\" stroke-width=\"1.2\"/>\n";
    }

    for (const auto& s : series_) {
      std::ostringstream pts;
      bool open = false;
      std::ostringstream marks;
      for (const auto& [x, y] : s.pts) {
        const double tx = tx_(x), ty = ty_(y);
        if (!std::isfinite(tx) || !std::isfinite(ty)) continue;
        pts << (open ? " " : "") << fmt(px(tx)) << "," << fmt(py(ty));
        open = true;
        if (s.markers)
          marks << "<circle cx=\"" << fmt(px(tx)) << "\" cy=\"" << fmt(py(ty))
                << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
      if (!open) continue;
      os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << s.color
         << "\" stroke-width=\"1.5\"";
      if (s.dashed) os << " stroke-dasharray=\"4 3\"";
      os << "/>\n" << marks.str();
    }

    // legend, top-right inside the frame
    int row = 0;
    auto legend_entry = [&](const std::string& name, const std::string& color, bool dashed) {
      const double y = MT + 16 + 16 * row++;
      os << "<line x1=\"" << (W - MR - 150) << "\" y1=\"" << fmt(y - 4) << "\" x2=\""
         << (W - MR - 120) << "\" y2=\"" << fmt(y - 4) << "\" stroke=\"" << color
         << "\" stroke-width=\"2\"" << (dashed ? " stroke-dasharray=\"4 3\"" : "") << "/>\n";
      os << "<text x=\"" << (W - MR - 114) << "\" y=\"" << fmt(y)
         << "\" font-family=\"monospace\" font-size=\"11\">" << name << "</text>\n";
    };
    for (const auto& s : series_)
      if (!s.name.empty()) legend_entry(s.name, s.color, s.dashed);
    for (const auto& h : hlines_)
      if (!h.name.empty()) legend_entry(h.name, h.color, true);

    os << "</svg>\n";
    std::ofstream f(path);
    if (!f) throw IOFailure("cannot open " + path + " for writing");
    f << os.str();
    if (!f) throw IOFailure("write failed for " + path);
  }

 private:
  struct HLine {
    double y;
    std::string name, color;
  };

  double tx_(double x) const { return logx_ ? std::log10(x) : x; }
  double ty_(double y) const { return logy_ ? std::log10(std::max(y, 1e-300)) : y; }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  static std::string tick_label(double t, bool log) {
    char buf[32];
    if (log)
      std::snprintf(buf, sizeof buf, "1e%d", int(std::lround(t)));
    else
      std::snprintf(buf, sizeof buf, "%.3g", t == 0.0 ? 0.0 : t);
    return buf;
  }

  static std::vector<double> ticks(double lo, double hi, bool log) {
    std::vector<double> out;
    if (log) {
      for (int d = int(std::ceil(lo - 1e-9)); d <= int(std::floor(hi + 1e-9)); ++d)
        out.push_back(double(d));
      return out;
    }
    const double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
    if (span / step > 10.0) step *= 2.0;
    if (span / step > 10.0) step *= 2.5;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step)
      out.push_back(t == 0.0 ? 0.0 : t);
    return out;
  }

  static constexpr int W = 840, H = 520, ML = 78, MR = 24, MT = 40, MB = 52;
  std::string title_, xlabel_, ylabel_;
  bool logx_, logy_;
  std::vector<Series> series_;
  std::vector<HLine> hlines_;
};

}  // namespace obstacle::detail
