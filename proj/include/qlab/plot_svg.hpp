// Static SVG renderings of per-node quantities: a line plot for 1D fields
// and a cell heat map for 2D fields (3D fields are sliced at z ~ 0).
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlab/grid_domain.hpp"
#include "qlab/tensor_core.hpp"

namespace qlab {
namespace detail {

// compact viridis-like ramp
inline std::string heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    static const double stops[5][3] = {{68, 1, 84},
                                       {59, 82, 139},
                                       {33, 145, 140},
                                       {94, 201, 98},
                                       {253, 231, 37}};
    const double x = t * 4;
    const int i = std::min(3, static_cast<int>(x));
    const double f = x - i;
    std::ostringstream os;
    os << "rgb(" << static_cast<int>(stops[i][0] + f * (stops[i + 1][0] - stops[i][0])) << ','
       << static_cast<int>(stops[i][1] + f * (stops[i + 1][1] - stops[i][1])) << ','
       << static_cast<int>(stops[i][2] + f * (stops[i + 1][2] - stops[i][2])) << ')';
    return os.str();
}

}  // namespace detail

inline void plot_line_svg(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::string& ylabel, const std::string& path) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("plot_line_svg: need matching xs/ys with >= 2 points");
    const int W = 800, H = 500, ML = 70, MR = 20, MT = 20, MB = 50;
    double xmin = xs.front(), xmax = xs.front(), ymin = ys.front(), ymax = ys.front();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xmin = std::min(xmin, xs[i]);
        xmax = std::max(xmax, xs[i]);
        ymin = std::min(ymin, ys[i]);
        ymax = std::max(ymax, ys[i]);
    }
    if (ymax - ymin < 1e-300) { ymax += 1; ymin -= 1; }
    if (xmax - xmin < 1e-300) xmax += 1;
    auto X = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto Y = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    out << "<line x1='" << ML << "' y1='" << H - MB << "' x2='" << W - MR << "' y2='"
        << H - MB << "' stroke='black'/>\n";
    out << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='" << H - MB
        << "' stroke='black'/>\n";
    out << "<polyline fill='none' stroke='#2166ac' stroke-width='2' points='";
    for (std::size_t i = 0; i < xs.size(); ++i) out << X(xs[i]) << ',' << Y(ys[i]) << ' ';
    out << "'/>\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", ymin);
    out << "<text x='5' y='" << H - MB << "' font-size='13'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", ymax);
    out << "<text x='5' y='" << MT + 10 << "' font-size='13'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", xmin);
    out << "<text x='" << ML << "' y='" << H - MB + 20 << "' font-size='13'>" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", xmax);
    out << "<text x='" << W - MR - 40 << "' y='" << H - MB + 20 << "' font-size='13'>" << buf
        << "</text>\n";
    out << "<text x='15' y='" << (MT + H - MB) / 2 << "' font-size='14' transform='rotate(-90 15 "
        << (MT + H - MB) / 2 << ")'>" << ylabel << "</text>\n";
    out << "</svg>\n";
}

// 2D heat map over lattice cells; `pick` selects the plotted nodes (for 3D
// slices) and `value` supplies the plotted quantity.
inline void plot_heatmap_svg(const Grid& g, const std::vector<double>& value,
                             const std::vector<std::uint8_t>& pick, const std::string& label,
                             const std::string& path) {
    double vmin = 0, vmax = 0;
    bool first = true;
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
        if (!pick[nd]) continue;
        if (first) { vmin = vmax = value[nd]; first = false; }
        vmin = std::min(vmin, value[nd]);
        vmax = std::max(vmax, value[nd]);
    }
    if (first) throw std::invalid_argument("plot_heatmap_svg: empty selection");
    if (vmax - vmin < 1e-300) vmax = vmin + 1;

    const int W = 760, H = 800;
    const double span_x = (g.extent[0] - 1) * g.h, span_y = std::max(1, g.extent[1] - 1) * g.h;
    const double cellpx = std::min((W - 40.0) / (span_x / g.h + 1), (H - 80.0) / (span_y / g.h + 1));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
        if (!pick[nd]) continue;
        const auto ijk = g.lattice_coords(static_cast<std::int32_t>(nd));
        const double t = (value[nd] - vmin) / (vmax - vmin);
        out << "<rect x='" << 20 + ijk[0] * cellpx << "' y='"
            << 20 + (g.extent[1] - 1 - ijk[1]) * cellpx << "' width='" << cellpx + 0.5
            << "' height='" << cellpx + 0.5 << "' fill='" << detail::heat_color(t) << "'/>\n";
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s: min %.6g, max %.6g", label.c_str(), vmin, vmax);
    out << "<text x='20' y='" << H - 30 << "' font-size='15'>" << buf << "</text>\n";
    out << "</svg>\n";
}

}  // namespace qlab
