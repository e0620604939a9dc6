#pragma once

// Minimal static SVG line plots and 2-d histogram heatmaps.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace l1rls::io {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    int width = 720;
    int height = 480;
};

namespace svg_detail {

inline std::string fmt(double v, int prec = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

// Tick positions at 1, 2 or 5 times a power of ten.
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return ticks;
}

}  // namespace svg_detail

inline std::string render_svg(const LinePlot& plot) {
    using namespace svg_detail;
    const double left = 70, right = 170, top = 40, bottom = 55;
    const double pw = plot.width - left - right;
    const double ph = plot.height - top - bottom;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : plot.series)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.y[k])) continue;
            xmin = std::min(xmin, s.x[k]);
            xmax = std::max(xmax, s.x[k]);
            ymin = std::min(ymin, s.y[k]);
            ymax = std::max(ymax, s.y[k]);
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    if (xmax <= xmin) xmax = xmin + 1;

    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\"" << plot.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title)
      << "</text>\n";

    for (double t : nice_ticks(xmin, xmax)) {
        o << "<line x1=\"" << fmt(px(t), 6) << "\" y1=\"" << top << "\" x2=\"" << fmt(px(t), 6) << "\" y2=\""
          << top + ph << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << fmt(px(t), 6) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << fmt(t)
          << "</text>\n";
    }
    for (double t : nice_ticks(ymin, ymax)) {
        o << "<line x1=\"" << left << "\" y1=\"" << fmt(py(t), 6) << "\" x2=\"" << left + pw << "\" y2=\""
          << fmt(py(t), 6) << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(t) + 4, 6) << "\" text-anchor=\"end\">" << fmt(t)
          << "</text>\n";
    }
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << plot.height - 14 << "\" text-anchor=\"middle\">"
      << escape(plot.x_label) << "</text>\n";
    o << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(plot.y_label) << "</text>\n";

    for (const auto& s : plot.series) {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.3\"";
        if (s.dashed) o << " stroke-dasharray=\"6,4\"";
        o << " points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k)
            if (std::isfinite(s.y[k])) o << fmt(px(s.x[k]), 6) << ',' << fmt(py(s.y[k]), 6) << ' ';
        o << "\"/>\n";
    }

    double ly = top + 10;
    for (const auto& s : plot.series) {
        if (s.label.empty()) continue;
        const double lx = left + pw + 12;
        o << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly << "\" stroke=\""
          << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        o << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
        ly += 18;
    }
    o << "</svg>\n";
    return o.str();
}

struct Histogram2d {
    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
    int bins = 0;
    Eigen::MatrixXi counts;  ///< bins x bins, row = x bin, col = y bin
};

inline Histogram2d histogram2d(const Eigen::MatrixXd& samples, int bins = 30) {
    Histogram2d h;
    h.bins = bins;
    h.counts = Eigen::MatrixXi::Zero(bins, bins);
    if (samples.rows() == 0) return h;
    h.x_min = samples.col(0).minCoeff();
    h.x_max = samples.col(0).maxCoeff();
    h.y_min = samples.col(1).minCoeff();
    h.y_max = samples.col(1).maxCoeff();
    const double wx = std::max(h.x_max - h.x_min, 1e-300) / bins;
    const double wy = std::max(h.y_max - h.y_min, 1e-300) / bins;
    for (Eigen::Index r = 0; r < samples.rows(); ++r) {
        const int bx = std::clamp(static_cast<int>((samples(r, 0) - h.x_min) / wx), 0, bins - 1);
        const int by = std::clamp(static_cast<int>((samples(r, 1) - h.y_min) / wy), 0, bins - 1);
        ++h.counts(bx, by);
    }
    return h;
}

inline std::string render_heatmap(const Histogram2d& h, const std::string& title, const std::string& x_label,
                                  const std::string& y_label) {
    using namespace svg_detail;
    const int size = 420, left = 60, top = 40;
    const double cell = static_cast<double>(size) / std::max(h.bins, 1);
    const int peak = std::max(1, h.counts.size() ? h.counts.maxCoeff() : 1);
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + left + 30 << "\" height=\"" << size + top + 50
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << left + size / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    for (int bx = 0; bx < h.bins; ++bx)
        for (int by = 0; by < h.bins; ++by) {
            const int c = h.counts(bx, by);
            if (c == 0) continue;
            const int shade = 255 - static_cast<int>(std::lround(230.0 * c / peak));
            o << "<rect x=\"" << fmt(left + bx * cell, 6) << "\" y=\"" << fmt(top + (h.bins - 1 - by) * cell, 6)
              << "\" width=\"" << fmt(cell, 6) << "\" height=\"" << fmt(cell, 6) << "\" fill=\"rgb(" << shade << ","
              << shade << ",255)\"/>\n";
        }
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << size << "\" height=\"" << size
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left << "\" y=\"" << top + size + 16 << "\">" << fmt(h.x_min) << "</text>\n";
    o << "<text x=\"" << left + size << "\" y=\"" << top + size + 16 << "\" text-anchor=\"end\">" << fmt(h.x_max)
      << "</text>\n";
    o << "<text x=\"" << left + size / 2 << "\" y=\"" << top + size + 36 << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
    o << "<text x=\"" << left - 4 << "\" y=\"" << top + size << "\" text-anchor=\"end\">" << fmt(h.y_min)
      << "</text>\n";
    o << "<text x=\"" << left - 4 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << fmt(h.y_max)
      << "</text>\n";
    o << "<text transform=\"translate(14," << top + size / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(y_label) << "</text>\n</svg>\n";
    return o.str();
}

}  // namespace l1rls::io
