#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hpfts {

// Minimal self-contained SVG line charts for diagnostic output. Fixed
// 960x540 canvas, colors drawn from a fixed 12-step ramp so a stack of
// curves reads chronologically (early = dark violet, late = yellow).

struct ChartSeries {
    std::string label;  // empty = no legend entry
    std::vector<double> x;
    std::vector<double> y;
    int color_index = 0;
    double stroke_width = 1.5;
};

// filled region between lo and hi, drawn under the series
struct ChartBand {
    std::vector<double> x;
    std::vector<double> lo;
    std::vector<double> hi;
    int color_index = 0;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ChartBand> bands;
    std::vector<ChartSeries> series;
};

// 12-entry ramp; indexes wrap
const char* ramp_color(int index);

// maps position i of n onto the full ramp span, for chronological coloring
int ramp_index(int i, int n);

void write_svg_chart(std::ostream& out, const Chart& chart);
void save_svg_chart(const std::string& path, const Chart& chart);

}  // namespace hpfts
