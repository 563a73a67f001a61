#include "strobe/svg.hpp"

#include <algorithm>
#include <cmath>

#include "strobe/csv.hpp"
#include "strobe/errors.hpp"

namespace strobe::svg {

namespace {

constexpr int kPanelW = 380;
constexpr int kPanelH = 280;
constexpr int kMarginL = 52;
constexpr int kMarginR = 14;
constexpr int kMarginT = 30;
constexpr int kMarginB = 40;
constexpr int kPerRow = 3;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string px(double v) {
    return csv::format_double(std::round(v * 100.0) / 100.0);
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    void expand(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (hi <= lo) hi = lo + 1.0;
        const double margin = 0.05 * (hi - lo);
        lo -= margin;
        hi += margin;
    }
    double at(double v) const { return (v - lo) / (hi - lo); }
};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

void render_panel(std::string& out, const Panel& panel, int ox, int oy) {
    Range rx;
    Range ry;
    bool any = false;
    for (const auto& s : panel.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!any) {
                rx = Range{s.x[i], s.x[i]};
                ry = Range{s.y[i], s.y[i]};
                any = true;
            } else {
                rx.expand(s.x[i]);
                ry.expand(s.y[i]);
            }
        }
    if (!any) {
        rx = Range{0.0, 1.0};
        ry = Range{0.0, 1.0};
    }
    ry.expand(0.0);  // keep the zero line in bar/probability plots
    rx.pad();
    ry.pad();

    const double plot_x = ox + kMarginL;
    const double plot_y = oy + kMarginT;
    const double plot_w = kPanelW - kMarginL - kMarginR;
    const double plot_h = kPanelH - kMarginT - kMarginB;
    auto map_x = [&](double v) { return plot_x + rx.at(v) * plot_w; };
    auto map_y = [&](double v) { return plot_y + (1.0 - ry.at(v)) * plot_h; };

    out += "<rect x=\"" + px(plot_x) + "\" y=\"" + px(plot_y) + "\" width=\"" + px(plot_w) +
           "\" height=\"" + px(plot_h) + "\" fill=\"#ffffff\" stroke=\"#444444\"/>\n";
    out += "<text x=\"" + px(ox + kPanelW / 2.0) + "\" y=\"" + px(oy + 18) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"monospace\">" +
           escape(panel.title) + "</text>\n";
    out += "<text x=\"" + px(plot_x + plot_w / 2.0) + "\" y=\"" + px(oy + kPanelH - 8) +
           "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"monospace\">" +
           escape(panel.x_label) + "</text>\n";
    out += "<text x=\"" + px(ox + 14) + "\" y=\"" + px(plot_y + plot_h / 2.0) +
           "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"monospace\" transform=\"rotate(-90 " +
           px(ox + 14) + " " + px(plot_y + plot_h / 2.0) + ")\">" + escape(panel.y_label) +
           "</text>\n";

    // Corner tick labels.
    out += "<text x=\"" + px(plot_x) + "\" y=\"" + px(plot_y + plot_h + 14) +
           "\" font-size=\"10\" font-family=\"monospace\">" + csv::format_double(rx.lo) +
           "</text>\n";
    out += "<text x=\"" + px(plot_x + plot_w) + "\" y=\"" + px(plot_y + plot_h + 14) +
           "\" text-anchor=\"end\" font-size=\"10\" font-family=\"monospace\">" +
           csv::format_double(rx.hi) + "</text>\n";
    out += "<text x=\"" + px(plot_x - 4) + "\" y=\"" + px(plot_y + plot_h) +
           "\" text-anchor=\"end\" font-size=\"10\" font-family=\"monospace\">" +
           csv::format_double(ry.lo) + "</text>\n";
    out += "<text x=\"" + px(plot_x - 4) + "\" y=\"" + px(plot_y + 10) +
           "\" text-anchor=\"end\" font-size=\"10\" font-family=\"monospace\">" +
           csv::format_double(ry.hi) + "</text>\n";

    for (std::size_t si = 0; si < panel.series.size(); ++si) {
        const auto& s = panel.series[si];
        const char* color = kPalette[si % kPaletteSize];
        if (s.bars) {
            double bar_w = plot_w / std::max<std::size_t>(s.x.size(), 1) * 0.8;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                const double top = map_y(std::max(s.y[i], 0.0));
                const double bottom = map_y(std::min(s.y[i], 0.0));
                out += "<rect x=\"" + px(map_x(s.x[i]) - bar_w / 2.0) + "\" y=\"" + px(top) +
                       "\" width=\"" + px(bar_w) + "\" height=\"" + px(bottom - top) +
                       "\" fill=\"" + color + "\" fill-opacity=\"0.55\"/>\n";
            }
        } else {
            std::string points;
            auto flush = [&]() {
                if (!points.empty()) {
                    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
                    points.clear();
                }
            };
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                    flush();
                    continue;
                }
                if (!points.empty()) points += ' ';
                points += px(map_x(s.x[i])) + "," + px(map_y(s.y[i]));
            }
            flush();
        }
        // Legend entry.
        const double ly = plot_y + 14.0 + 14.0 * static_cast<double>(si);
        out += "<rect x=\"" + px(plot_x + plot_w - 104) + "\" y=\"" + px(ly - 8) +
               "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
        out += "<text x=\"" + px(plot_x + plot_w - 90) + "\" y=\"" + px(ly) +
               "\" font-size=\"10\" font-family=\"monospace\">" + escape(s.label) + "</text>\n";
    }
}

}  // namespace

std::string render(const std::vector<Panel>& panels) {
    require(!panels.empty(), Errc::invalid_argument, "nothing to plot");
    const int n = static_cast<int>(panels.size());
    const int cols = std::min(n, kPerRow);
    const int rows = (n + kPerRow - 1) / kPerRow;
    const int width = cols * kPanelW;
    const int height = rows * kPanelH;

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n";
    for (int i = 0; i < n; ++i)
        render_panel(out, panels[static_cast<std::size_t>(i)], (i % kPerRow) * kPanelW,
                     (i / kPerRow) * kPanelH);
    out += "</svg>\n";
    return out;
}

}  // namespace strobe::svg
