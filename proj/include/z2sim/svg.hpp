#ifndef Z2SIM_SVG_HPP
#define Z2SIM_SVG_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace z2sim {

struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Minimal line chart; enough to eyeball the sweep outputs.  All quantitative
// checks go through the CSV files, never through plots.
inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<SvgSeries>& series) {
    const double width = 820, height = 560;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    const auto py = [&](double y) {
        return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
    };
    static const char* colors[] = {"#c0392b", "#27ae60", "#2980b9", "#8e44ad",
                                   "#d35400", "#16a085", "#2c3e50", "#7f8c8d"};

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << " " << height << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
    f << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
      << height - mb << "' stroke='black'/>\n";
    f << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
      << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double x = xmin + (xmax - xmin) * i / 4.0;
        const double y = ymin + (ymax - ymin) * i / 4.0;
        f << "<text x='" << px(x) << "' y='" << height - mb + 18
          << "' text-anchor='middle' font-size='11'>" << x << "</text>\n";
        f << "<text x='" << ml - 8 << "' y='" << py(y) + 4
          << "' text-anchor='end' font-size='11'>" << y << "</text>\n";
    }
    int ci = 0;
    double legend_y = mt + 6;
    for (const auto& s : series) {
        const char* color = colors[ci % 8];
        f << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (const auto& [x, y] : s.points) f << px(x) << "," << py(y) << " ";
        f << "'/>\n";
        f << "<text x='" << width - mr - 150 << "' y='" << legend_y << "' font-size='12' fill='"
          << color << "'>" << s.name << "</text>\n";
        legend_y += 16;
        ++ci;
    }
    f << "</svg>\n";
}

}  // namespace z2sim

#endif
