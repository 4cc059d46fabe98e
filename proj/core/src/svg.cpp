#include "hpfts/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "hpfts/errors.hpp"

namespace hpfts {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 18.0;
constexpr double kMarginTop = 38.0;
constexpr double kMarginBottom = 48.0;

const char* kRamp[12] = {
    "#440154", "#46246e", "#404387", "#365c8d", "#2c728e", "#24878e",
    "#1f9d89", "#26ad81", "#3fbc73", "#69cd5b", "#a0da39", "#dfe318",
};

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

struct Domain {
    double lo = 0.0;
    double hi = 1.0;
    bool seen = false;

    void add(double v) {
        if (!std::isfinite(v)) return;
        if (!seen) {
            lo = hi = v;
            seen = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    void finish(double pad_frac) {
        if (!seen) { lo = 0.0; hi = 1.0; return; }
        if (hi == lo) {
            double pad = std::max(1.0, std::abs(lo) * 0.05);
            lo -= pad;
            hi += pad;
            return;
        }
        double pad = (hi - lo) * pad_frac;
        lo -= pad;
        hi += pad;
    }
};

// rounds a raw step to a 1/2/5 ladder value
double nice_step(double span, int target_ticks) {
    double raw = span / target_ticks;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double frac = raw / mag;
    double nice = frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0;
    return nice * mag;
}

std::vector<double> ticks_for(double lo, double hi, int target) {
    std::vector<double> out;
    double step = nice_step(hi - lo, target);
    double t = std::ceil(lo / step) * step;
    // snap values like -0 or 2.0000000000000004 back onto the grid
    for (; t <= hi + step * 1e-9; t += step) {
        double snapped = std::round(t / step) * step;
        if (snapped == 0.0) snapped = 0.0;  // normalizes -0
        out.push_back(snapped);
    }
    return out;
}

class Mapper {
public:
    Mapper(const Domain& x, const Domain& y) : x_(x), y_(y) {}

    double px(double x) const {
        return kMarginLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        return kHeight - kMarginBottom -
               (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kMarginTop - kMarginBottom);
    }

private:
    Domain x_;
    Domain y_;
};

void emit_polyline(std::ostream& out, const Mapper& m, const std::vector<double>& xs,
                   const std::vector<double>& ys, const char* color, double width) {
    std::string d;
    bool open = false;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            open = false;  // break the path across gaps
            continue;
        }
        d += open ? " L " : (d.empty() ? "M " : " M ");
        d += fixed2(m.px(xs[i]));
        d += ',';
        d += fixed2(m.py(ys[i]));
        open = true;
    }
    if (d.empty()) return;
    out << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
        << fixed2(width) << "\"/>\n";
}

void emit_band(std::ostream& out, const Mapper& m, const ChartBand& band) {
    std::string d;
    bool any = false;
    for (std::size_t i = 0; i < band.x.size() && i < band.hi.size(); ++i) {
        if (!std::isfinite(band.x[i]) || !std::isfinite(band.hi[i])) continue;
        d += any ? " L " : "M ";
        d += fixed2(m.px(band.x[i]));
        d += ',';
        d += fixed2(m.py(band.hi[i]));
        any = true;
    }
    if (!any) return;
    for (std::size_t j = band.x.size(); j-- > 0;) {
        if (j >= band.lo.size()) continue;
        if (!std::isfinite(band.x[j]) || !std::isfinite(band.lo[j])) continue;
        d += " L ";
        d += fixed2(m.px(band.x[j]));
        d += ',';
        d += fixed2(m.py(band.lo[j]));
    }
    d += " Z";
    out << "<path d=\"" << d << "\" fill=\"" << ramp_color(band.color_index)
        << "\" fill-opacity=\"0.22\" stroke=\"none\"/>\n";
}

}  // namespace

const char* ramp_color(int index) {
    int i = index % 12;
    if (i < 0) i += 12;
    return kRamp[i];
}

int ramp_index(int i, int n) {
    if (n <= 1 || i <= 0) return 0;
    if (i >= n - 1) return 11;
    return static_cast<int>(std::lround(static_cast<double>(i) * 11.0 / (n - 1)));
}

void write_svg_chart(std::ostream& out, const Chart& chart) {
    Domain dx, dy;
    for (const auto& s : chart.series) {
        for (double v : s.x) dx.add(v);
        for (double v : s.y) dy.add(v);
    }
    for (const auto& b : chart.bands) {
        for (double v : b.x) dx.add(v);
        for (double v : b.lo) dy.add(v);
        for (double v : b.hi) dy.add(v);
    }
    dx.finish(0.0);
    dy.finish(0.04);
    Mapper m(dx, dy);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"540\" "
           "viewBox=\"0 0 960 540\">\n";
    out << "<rect width=\"960\" height=\"540\" fill=\"#ffffff\"/>\n";

    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y0 = kMarginTop, y1 = kHeight - kMarginBottom;

    // grid + ticks
    out << "<g font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
    for (double t : ticks_for(dx.lo, dx.hi, 6)) {
        double px = m.px(t);
        out << "<line x1=\"" << fixed2(px) << "\" y1=\"" << fixed2(y0) << "\" x2=\"" << fixed2(px)
            << "\" y2=\"" << fixed2(y1) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fixed2(px) << "\" y=\"" << fixed2(y1 + 16)
            << "\" text-anchor=\"middle\">" << tick_text(t) << "</text>\n";
    }
    for (double t : ticks_for(dy.lo, dy.hi, 5)) {
        double py = m.py(t);
        out << "<line x1=\"" << fixed2(x0) << "\" y1=\"" << fixed2(py) << "\" x2=\"" << fixed2(x1)
            << "\" y2=\"" << fixed2(py) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fixed2(x0 - 6) << "\" y=\"" << fixed2(py + 4)
            << "\" text-anchor=\"end\">" << tick_text(t) << "</text>\n";
    }
    out << "</g>\n";

    for (const auto& band : chart.bands) emit_band(out, m, band);
    for (const auto& s : chart.series)
        emit_polyline(out, m, s.x, s.y, ramp_color(s.color_index), s.stroke_width);

    // frame on top of the data
    out << "<rect x=\"" << fixed2(x0) << "\" y=\"" << fixed2(y0) << "\" width=\""
        << fixed2(x1 - x0) << "\" height=\"" << fixed2(y1 - y0)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    out << "<g font-family=\"Helvetica, Arial, sans-serif\" fill=\"#111111\">\n";
    if (!chart.title.empty())
        out << "<text x=\"480\" y=\"22\" font-size=\"16\" text-anchor=\"middle\">"
            << escape(chart.title) << "</text>\n";
    if (!chart.x_label.empty())
        out << "<text x=\"" << fixed2((x0 + x1) / 2) << "\" y=\"" << fixed2(kHeight - 12)
            << "\" font-size=\"13\" text-anchor=\"middle\">" << escape(chart.x_label)
            << "</text>\n";
    if (!chart.y_label.empty())
        out << "<text x=\"16\" y=\"" << fixed2((y0 + y1) / 2)
            << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << fixed2((y0 + y1) / 2) << ")\">" << escape(chart.y_label) << "</text>\n";
    out << "</g>\n";

    // legend for the labeled series only
    std::vector<const ChartSeries*> labeled;
    for (const auto& s : chart.series)
        if (!s.label.empty()) labeled.push_back(&s);
    if (!labeled.empty() && labeled.size() <= 8) {
        double lx = x1 - 150, ly = y0 + 10;
        out << "<g font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
        for (const auto* s : labeled) {
            out << "<line x1=\"" << fixed2(lx) << "\" y1=\"" << fixed2(ly) << "\" x2=\""
                << fixed2(lx + 22) << "\" y2=\"" << fixed2(ly) << "\" stroke=\""
                << ramp_color(s->color_index) << "\" stroke-width=\"2.5\"/>\n";
            out << "<text x=\"" << fixed2(lx + 28) << "\" y=\"" << fixed2(ly + 4) << "\">"
                << escape(s->label) << "</text>\n";
            ly += 18;
        }
        out << "</g>\n";
    }

    out << "</svg>\n";
}

void save_svg_chart(const std::string& path, const Chart& chart) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file '" + path + "'");
    write_svg_chart(out, chart);
}

}  // namespace hpfts
