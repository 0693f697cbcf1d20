#include "tsvd/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tsvd/error.hpp"

namespace tsvd {

namespace {

constexpr double width = 640.0;
constexpr double height = 400.0;
constexpr double left = 60.0;
constexpr double right = 20.0;
constexpr double top = 40.0;
constexpr double bottom = 70.0;

std::string escape(const std::string& text)
{
    std::string out;
    for (char ch : text) {
        switch (ch) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += ch;
        }
    }
    return out;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

BoxGlyph make_glyph(const std::string& procedure, const std::string& norm,
                    const std::vector<double>& values)
{
    BoxGlyph g;
    g.procedure = procedure;
    g.norm = norm;
    g.count = values.size();
    g.stats = quartiles(values);
    const double iqr = g.stats.q3 - g.stats.q1;
    const double lo_fence = g.stats.q1 - 1.5 * iqr;
    const double hi_fence = g.stats.q3 + 1.5 * iqr;
    g.whisker_low = g.stats.q1;
    g.whisker_high = g.stats.q3;
    for (double v : values) {
        if (!std::isfinite(v)) {
            continue;
        }
        if (v >= lo_fence && v < g.whisker_low) {
            g.whisker_low = v;
        }
        if (v <= hi_fence && v > g.whisker_high) {
            g.whisker_high = v;
        }
    }
    return g;
}

}  // namespace

std::vector<BoxGlyph> box_glyphs(const std::vector<ReplicationRecord>& records)
{
    std::vector<Procedure> order;
    for (const auto& r : records) {
        if (std::find(order.begin(), order.end(), r.procedure) == order.end()) {
            order.push_back(r.procedure);
        }
    }
    std::vector<BoxGlyph> glyphs;
    for (Procedure p : order) {
        std::vector<double> strong;
        std::vector<double> weak;
        for (const auto& r : records) {
            if (r.procedure == p) {
                strong.push_back(r.eff_strong);
                weak.push_back(r.eff_weak);
            }
        }
        glyphs.push_back(make_glyph(to_string(p), "strong", strong));
        glyphs.push_back(make_glyph(to_string(p), "weak", weak));
    }
    return glyphs;
}

std::string render_box_plot(const std::vector<BoxGlyph>& glyphs, const std::string& title,
                            const std::string& metadata)
{
    if (glyphs.empty()) {
        throw InvalidArgument("render_box_plot: nothing to plot");
    }
    double y_max = 1.2;
    for (const auto& g : glyphs) {
        for (double v : {g.whisker_high, g.stats.q3}) {
            if (std::isfinite(v)) {
                y_max = std::max(y_max, v);
            }
        }
    }
    y_max = std::ceil(y_max * 5.0) / 5.0;
    const double plot_h = height - top - bottom;
    const double plot_w = width - left - right;
    auto y_of = [&](double v) {
        const double c = std::isfinite(v) ? std::clamp(v, 0.0, y_max) : y_max;
        return top + plot_h * (1.0 - c / y_max);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    if (!metadata.empty()) {
        svg << "<metadata>" << escape(metadata) << "</metadata>\n";
    }
    svg << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(title) << "</text>\n";

    // axis, ticks and the reference line at efficiency 1
    svg << "<g class=\"axis\" stroke=\"black\">\n";
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
        << "\" y2=\"" << num(top + plot_h) << "\"/>\n";
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
        << num(left + plot_w) << "\" y2=\"" << num(top + plot_h) << "\"/>\n";
    svg << "</g>\n";
    for (int k = 0; k * 0.2 <= y_max + 1e-9; ++k) {
        const double v = k * 0.2;
        svg << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(y_of(v)) << "\" x2=\""
            << num(left) << "\" y2=\"" << num(y_of(v)) << "\" stroke=\"black\"/>\n";
        char label[16];
        std::snprintf(label, sizeof label, "%.1f", v);
        svg << "<text x=\"" << num(left - 7) << "\" y=\"" << num(y_of(v) + 4)
            << "\" text-anchor=\"end\">" << label << "</text>\n";
    }
    svg << "<line class=\"reference\" x1=\"" << num(left) << "\" y1=\"" << num(y_of(1.0))
        << "\" x2=\"" << num(left + plot_w) << "\" y2=\"" << num(y_of(1.0))
        << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    svg << "<text transform=\"translate(16 " << num(top + plot_h / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">relative efficiency</text>\n";

    const double slot = plot_w / static_cast<double>(glyphs.size());
    const double box_w = std::min(40.0, slot * 0.5);
    for (std::size_t i = 0; i < glyphs.size(); ++i) {
        const BoxGlyph& g = glyphs[i];
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        const char* fill = g.norm == "strong" ? "#9ecae1" : "#fdae6b";
        svg << "<g class=\"box\" data-procedure=\"" << escape(g.procedure) << "\" data-norm=\""
            << g.norm << "\" data-q1=\"" << format_double(g.stats.q1) << "\" data-median=\""
            << format_double(g.stats.median) << "\" data-q3=\"" << format_double(g.stats.q3)
            << "\" data-count=\"" << g.count << "\">\n";
        svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y_of(g.whisker_low)) << "\" x2=\""
            << num(cx) << "\" y2=\"" << num(y_of(g.stats.q1)) << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y_of(g.stats.q3)) << "\" x2=\""
            << num(cx) << "\" y2=\"" << num(y_of(g.whisker_high)) << "\" stroke=\"black\"/>\n";
        for (double w : {g.whisker_low, g.whisker_high}) {
            svg << "<line x1=\"" << num(cx - box_w / 4) << "\" y1=\"" << num(y_of(w))
                << "\" x2=\"" << num(cx + box_w / 4) << "\" y2=\"" << num(y_of(w))
                << "\" stroke=\"black\"/>\n";
        }
        svg << "<rect x=\"" << num(cx - box_w / 2) << "\" y=\"" << num(y_of(g.stats.q3))
            << "\" width=\"" << num(box_w) << "\" height=\""
            << num(y_of(g.stats.q1) - y_of(g.stats.q3)) << "\" fill=\"" << fill
            << "\" stroke=\"black\"/>\n";
        svg << "<line class=\"median\" x1=\"" << num(cx - box_w / 2) << "\" y1=\""
            << num(y_of(g.stats.median)) << "\" x2=\"" << num(cx + box_w / 2) << "\" y2=\""
            << num(y_of(g.stats.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(cx) << "\" y=\"" << num(top + plot_h + 16)
            << "\" text-anchor=\"middle\">" << escape(g.norm) << "</text>\n";
        svg << "<text x=\"" << num(cx) << "\" y=\"" << num(top + plot_h + 30)
            << "\" text-anchor=\"middle\" font-size=\"9\">" << escape(g.procedure) << "</text>\n";
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace tsvd
