#pragma once

#include <string>
#include <vector>

namespace strobe::svg {

// Minimal static plot output. Rendering is a pure function of the inputs so
// repeated runs produce byte-identical files.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool bars = false;  // bar chart instead of polyline
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

std::string render(const std::vector<Panel>& panels);

}  // namespace strobe::svg
