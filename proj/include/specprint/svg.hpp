#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "specprint/common.hpp"
#include "specprint/fft.hpp"
#include "specprint/profiles.hpp"
#include "specprint/serialize.hpp"

namespace specprint {

// Deterministic SVG emission: pure functions of the plotted data, no
// timestamps, fixed number formatting. The heatmap ramp is the 256-step
// monotone grayscale ramp level -> rgb(level, level, level), so renders
// are comparable across runs and implementations.

namespace detail {

inline std::string svg_num(double v) { return format_double_short(v, 6); }

inline std::string gray_css(int level) {
    level = std::clamp(level, 0, 255);
    return "rgb(" + std::to_string(level) + "," + std::to_string(level) + "," +
           std::to_string(level) + ")";
}

struct SvgDoc {
    std::ostringstream body;
    double width = 0;
    double height = 0;

    SvgDoc(double w, double h) : width(w), height(h) {
        body << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_num(w)
             << "\" height=\"" << svg_num(h) << "\" viewBox=\"0 0 " << svg_num(w) << " "
             << svg_num(h) << "\">\n";
        body << "<rect x=\"0\" y=\"0\" width=\"" << svg_num(w) << "\" height=\"" << svg_num(h)
             << "\" fill=\"white\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double sw = 1.0) {
        body << "<line x1=\"" << svg_num(x1) << "\" y1=\"" << svg_num(y1) << "\" x2=\""
             << svg_num(x2) << "\" y2=\"" << svg_num(y2) << "\" stroke=\"" << stroke
             << "\" stroke-width=\"" << svg_num(sw) << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double sw = 1.5) {
        if (pts.empty()) return;
        body << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << svg_num(sw)
             << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) body << ' ';
            body << svg_num(pts[i].first) << ',' << svg_num(pts[i].second);
        }
        body << "\"/>\n";
    }

    void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                 double sw = 1.5) {
        if (pts.empty()) return;
        body << "<polygon fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << svg_num(sw)
             << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) body << ' ';
            body << svg_num(pts[i].first) << ',' << svg_num(pts[i].second);
        }
        body << "\"/>\n";
    }

    void circle(double cx, double cy, double radius, const std::string& stroke, double sw = 1.5) {
        body << "<circle cx=\"" << svg_num(cx) << "\" cy=\"" << svg_num(cy) << "\" r=\""
             << svg_num(radius) << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
             << svg_num(sw) << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 12) {
        body << "<text x=\"" << svg_num(x) << "\" y=\"" << svg_num(y)
             << "\" font-family=\"monospace\" font-size=\"" << size << "\">" << s << "</text>\n";
    }

    std::string finish() {
        body << "</svg>\n";
        return body.str();
    }
};

// Rect-per-cell raster with run-length merging along rows.
inline void heatmap_cells(SvgDoc& doc, const std::vector<int>& levels, int width, int height,
                          double x0, double y0, double cell) {
    for (int r = 0; r < height; ++r) {
        int c = 0;
        while (c < width) {
            const int level = levels[static_cast<std::size_t>(r) * width + c];
            int run = 1;
            while (c + run < width &&
                   levels[static_cast<std::size_t>(r) * width + c + run] == level)
                ++run;
            doc.body << "<rect x=\"" << svg_num(x0 + c * cell) << "\" y=\"" << svg_num(y0 + r * cell)
                     << "\" width=\"" << svg_num(run * cell) << "\" height=\"" << svg_num(cell)
                     << "\" fill=\"" << gray_css(level) << "\"/>\n";
            c += run;
        }
    }
}

} // namespace detail

enum class HeatmapScale { log10, linear_signed };

// Grid heatmap. log10 mode maps [max*1e-6, max] logarithmically onto the
// gray ramp (spectral display); linear_signed maps [-maxabs, +maxabs]
// (autocorrelation display). The grid is drawn as given -- fftshift
// beforehand for a DC-centered view.
inline std::string svg_heatmap(const RealGrid& grid, HeatmapScale scale,
                               const std::string& title = "") {
    const double cell = std::max(1.0, 512.0 / std::max(grid.width, grid.height));
    const double margin = 24.0;
    detail::SvgDoc doc(grid.width * cell + 2 * margin, grid.height * cell + 2 * margin + 16);

    std::vector<int> levels(grid.size(), 0);
    if (scale == HeatmapScale::log10) {
        double maxv = 0.0;
        for (double v : grid.values) maxv = std::max(maxv, v);
        const double hi = maxv > 0.0 ? std::log10(maxv) : 0.0;
        const double lo = hi - 6.0; // fixed six-decade window
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double v = grid.values[i];
            const double lv = v > 0.0 ? std::log10(v) : lo;
            const double t = (std::clamp(lv, lo, hi) - lo) / (hi - lo);
            levels[i] = static_cast<int>(std::lround(t * 255.0));
        }
    } else {
        double maxabs = 0.0;
        for (double v : grid.values) maxabs = std::max(maxabs, std::abs(v));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = maxabs > 0.0 ? (grid.values[i] / maxabs + 1.0) / 2.0 : 0.5;
            levels[i] = static_cast<int>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
        }
    }
    detail::heatmap_cells(doc, levels, grid.width, grid.height, margin, margin + 16, cell);
    if (!title.empty()) doc.text(margin, margin + 2, title);
    return doc.finish();
}

// Radial profile on log-log axes with the fitted power law and, when
// alpha_reference > 0, a dashed reference line of slope -alpha_reference.
inline std::string svg_radial_loglog(const RadialProfile& profile, const PowerLawFit* fit,
                                     double alpha_reference, const std::string& title = "") {
    const double W = 560, H = 420, m = 50;
    detail::SvgDoc doc(W, H);
    std::vector<std::pair<double, double>> data; // (log10 rho, log10 mean)
    for (std::size_t b = 0; b < profile.stats.centers.size(); ++b) {
        const double mu = profile.stats.mean[b];
        if (std::isnan(mu) || !(mu > 0.0)) continue;
        data.push_back({std::log10(profile.stats.centers[b]), std::log10(mu)});
    }
    if (data.empty()) return doc.finish();
    double xmin = data.front().first, xmax = data.front().first;
    double ymin = data.front().second, ymax = data.front().second;
    for (auto& p : data) {
        xmin = std::min(xmin, p.first);
        xmax = std::max(xmax, p.first);
        ymin = std::min(ymin, p.second);
        ymax = std::max(ymax, p.second);
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    auto X = [&](double lx) { return m + (lx - xmin) / (xmax - xmin) * (W - 2 * m); };
    auto Y = [&](double ly) { return H - m - (ly - ymin) / (ymax - ymin) * (H - 2 * m); };

    doc.line(m, H - m, W - m, H - m, "black");
    doc.line(m, m, m, H - m, "black");
    std::vector<std::pair<double, double>> pts;
    for (auto& p : data) pts.push_back({X(p.first), Y(p.second)});
    doc.polyline(pts, "black");

    const double ln10 = 2.302585092994046;
    if (fit) {
        // fitted line in natural-log domain: y = intercept + slope * ln(rho)
        const double slope = profile.mode == SpectralMode::power ? -fit->alpha : -fit->alpha / 2.0;
        auto fit_y = [&](double lx) { return (fit->intercept + slope * (lx * ln10)) / ln10; };
        doc.polyline({{X(xmin), Y(fit_y(xmin))}, {X(xmax), Y(fit_y(xmax))}}, "red", 1.0);
    }
    if (alpha_reference > 0.0) {
        const double slope = profile.mode == SpectralMode::power ? -alpha_reference
                                                                 : -alpha_reference / 2.0;
        const double y0 = data.back().second - slope * data.back().first;
        doc.line(X(xmin), Y(slope * xmin + y0), X(xmax), Y(slope * xmax + y0), "gray", 1.0);
    }
    if (!title.empty()) doc.text(m, m - 8, title);
    doc.text(W - m - 60, H - m + 28, "log10 rho");
    return doc.finish();
}

inline std::string svg_angular_lines(const AngularProfile& profile, const std::string& title = "") {
    const double W = 560, H = 360, m = 50;
    detail::SvgDoc doc(W, H);
    double ymax = 0.0;
    for (double v : profile.stats.mean)
        if (!std::isnan(v)) ymax = std::max(ymax, v);
    if (ymax <= 0.0) ymax = 1.0;
    auto X = [&](std::size_t b) {
        return m + static_cast<double>(b) / (profile.stats.centers.size() - 1) * (W - 2 * m);
    };
    auto Y = [&](double v) { return H - m - v / ymax * (H - 2 * m); };
    doc.line(m, H - m, W - m, H - m, "black");
    doc.line(m, m, m, H - m, "black");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t b = 0; b < profile.stats.centers.size(); ++b)
        if (!std::isnan(profile.stats.mean[b])) pts.push_back({X(b), Y(profile.stats.mean[b])});
    doc.polyline(pts, "black");
    if (!title.empty()) doc.text(m, m - 8, title);
    doc.text(W - m - 90, H - m + 28, "theta 0..pi");
    return doc.finish();
}

// Polar view of a Fisher profile. The reference corpus is the green unit
// circle; the subject curve is drawn at radius 1 + F(theta) (clipped at
// zero), mirrored to [pi, 2pi) since orientations are pi-periodic.
inline std::string svg_fisher_polar(const FisherProfile& fisher, const std::string& title = "") {
    const double W = 480, H = 480;
    const double cx = W / 2, cy = H / 2;
    const double unit = 90.0;
    detail::SvgDoc doc(W, H);
    doc.circle(cx, cy, unit, "green");
    std::vector<std::pair<double, double>> pts;
    const std::size_t n = fisher.centers.size();
    for (std::size_t i = 0; i < 2 * n; ++i) {
        const std::size_t b = i % n;
        if (!fisher.defined[b]) continue;
        const double theta = fisher.centers[b] + (i >= n ? 3.14159265358979323846 : 0.0);
        const double radius = std::max(0.0, 1.0 + fisher.values[b]) * unit;
        pts.push_back({cx + radius * std::cos(theta), cy - radius * std::sin(theta)});
    }
    doc.polygon(pts, "black");
    if (!title.empty()) doc.text(12, 18, title);
    return doc.finish();
}

inline void save_text_file(const std::string& path, const std::string& text) {
    write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

} // namespace specprint
