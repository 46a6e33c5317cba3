// Copyright 2026 The whisqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "whisqa/commands.hpp"
#include "whisqa/objectives.hpp"

namespace whisqa::cli {

namespace {

std::string xml_escape(const std::string& s) {
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

// Diverging blue-white-red for values in [-1, 1].
std::string diverging_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const auto mix = [](double a, double b, double t) { return static_cast<int>(std::lround(a + (b - a) * t)); };
  int r, g, b;
  if (v >= 0) {
    r = mix(255, 178, v);
    g = mix(255, 24, v);
    b = mix(255, 43, v);
  } else {
    r = mix(255, 33, -v);
    g = mix(255, 102, -v);
    b = mix(255, 172, -v);
  }
  std::ostringstream os;
  os << "rgb(" << r << ',' << g << ',' << b << ')';
  return os.str();
}

}  // namespace

std::string distribution_svg(const std::vector<DistributionRow>& rows) {
  constexpr double label_w = 140, plot_w = 500, row_h = 60, top = 30, pad = 10;
  const double width = label_w + plot_w + 2 * pad;
  const double height = top + row_h * static_cast<double>(rows.size()) + 30;
  const auto x_of = [&](double q) { return label_w + (q - 0.2) / 0.8 * plot_w; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"" << label_w << "\" y=\"18\">Normalized MOS label distribution</text>\n";

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const double y0 = top + row_h * static_cast<double>(i);
    const double mid = y0 + row_h / 2;
    const std::size_t peak = std::max<std::size_t>(1, *std::max_element(row.histogram.begin(), row.histogram.end()));
    os << "<text x=\"" << pad << "\" y=\"" << mid + 4 << "\">" << xml_escape(row.tag) << " (" << row.count
       << ")</text>\n";
    const double bin_w = plot_w / static_cast<double>(kHistogramBins);
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      const double h = (row_h - 12) * static_cast<double>(row.histogram[b]) / static_cast<double>(peak);
      if (h <= 0) continue;
      os << "<rect x=\"" << label_w + bin_w * static_cast<double>(b) << "\" y=\"" << mid - h / 2 << "\" width=\""
         << bin_w - 1 << "\" height=\"" << h << "\" fill=\"#7aa6c2\"/>\n";
    }
    os << "<line x1=\"" << x_of(row.min) << "\" x2=\"" << x_of(row.max) << "\" y1=\"" << mid << "\" y2=\"" << mid
       << "\" stroke=\"#333\"/>\n";
    os << "<circle cx=\"" << x_of(row.mean) << "\" cy=\"" << mid << "\" r=\"3\" fill=\"#c0392b\"/>\n";
  }

  const double axis_y = top + row_h * static_cast<double>(rows.size()) + 5;
  os << "<line x1=\"" << label_w << "\" x2=\"" << label_w + plot_w << "\" y1=\"" << axis_y << "\" y2=\"" << axis_y
     << "\" stroke=\"#000\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double q = 0.2 + 0.2 * k;
    os << "<text x=\"" << x_of(q) - 8 << "\" y=\"" << axis_y + 15 << "\">" << format_number(q) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string correlation_svg(const CorrelationMatrix& m) {
  constexpr double cell = 56, label_w = 110, top = 110;
  const double k = static_cast<double>(m.names.size());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << label_w + cell * k + 10 << "\" height=\""
     << top + cell * k + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t j = 0; j < m.names.size(); ++j) {
    const double x = label_w + cell * static_cast<double>(j) + cell / 2;
    os << "<text transform=\"translate(" << x << ',' << top - 6 << ") rotate(-45)\">" << xml_escape(m.names[j])
       << "</text>\n";
  }
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    const double y = top + cell * static_cast<double>(i);
    os << "<text x=\"4\" y=\"" << y + cell / 2 + 4 << "\">" << xml_escape(m.names[i]) << "</text>\n";
    for (std::size_t j = 0; j < m.names.size(); ++j) {
      const double x = label_w + cell * static_cast<double>(j);
      const double v = m.at(i, j);
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
         << diverging_color(v) << "\" stroke=\"#fff\"/>\n";
      std::ostringstream val;
      val.setf(std::ios::fixed);
      val.precision(2);
      val << v;
      os << "<text x=\"" << x + cell / 2 - 12 << "\" y=\"" << y + cell / 2 + 4 << "\">" << val.str() << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace whisqa::cli
