#pragma once

#include <ostream>
#include <string>

#include "json.hpp"
#include "lpeval/metrics.hpp"
#include "lpeval/text.hpp"

namespace lpeval {

inline constexpr const char* kTiePolicy = "tie-groups-atomic";

inline void write_curve_csv(std::ostream& out, const ThresholdCurve& c) {
  out << "x,y\n";
  for (const auto& p : c.points)
    out << text::format_double(p.x) << ',' << text::format_double(p.y) << '\n';
}

inline nlohmann::ordered_json curve_summary(const ThresholdCurve& c) {
  return {{"space", to_string(c.space)},
          {"area", c.area},
          {"n_pos", c.positives},
          {"n_neg", c.negatives},
          {"tie_policy", kTiePolicy}};
}

/// Single-curve SVG on a fixed 800x600 viewbox with unit axes.
inline void write_curve_svg(std::ostream& out, const ThresholdCurve& c,
                            const std::string& title = "") {
  constexpr double left = 80, right = 760, top = 40, bottom = 540;
  auto px = [&](double x) { return left + x * (right - left); };
  auto py = [&](double y) { return bottom - y * (bottom - top); };
  const bool roc = c.space == CurveSpace::roc;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" "
         "height=\"600\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << left << "\" y2=\"" << top
      << "\"/>\n";
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    out << "<line x1=\"" << px(t) << "\" y1=\"" << bottom << "\" x2=\"" << px(t) << "\" y2=\""
        << bottom + 6 << "\"/>\n";
    out << "<line x1=\"" << left - 6 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\""
        << py(t) << "\"/>\n";
  }
  out << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int i = 0; i <= 10; i += 2) {
    const double t = i / 10.0;
    out << "<text x=\"" << px(t) << "\" y=\"" << bottom + 22 << "\" text-anchor=\"middle\">"
        << t << "</text>\n";
    out << "<text x=\"" << left - 10 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << t
        << "</text>\n";
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"580\" text-anchor=\"middle\">"
      << (roc ? "false positive rate" : "recall") << "</text>\n";
  out << "<text x=\"20\" y=\"" << (top + bottom) / 2 << "\" transform=\"rotate(-90 20 "
      << (top + bottom) / 2 << ")\" text-anchor=\"middle\">"
      << (roc ? "true positive rate" : "precision") << "</text>\n";
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"25\" text-anchor=\"middle\">" << title
      << (title.empty() ? "" : " ") << "(area " << text::format_double(c.area) << ")</text>\n";
  out << "</g>\n<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const auto& p : c.points) out << px(p.x) << ',' << py(p.y) << ' ';
  out << "\"/>\n</svg>\n";
}

}  // namespace lpeval
