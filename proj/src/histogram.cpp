#include "fasteit/histogram.hpp"

#include "fasteit/errors.hpp"

#include <cmath>
#include <string>

namespace fasteit {

std::vector<double> TemporalHistogram::bin_centers() const
{
    std::vector<double> c(size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = bin_center(i);
    return c;
}

TemporalHistogram TemporalHistogram::uniform(double t0, double width, std::vector<double> counts)
{
    TemporalHistogram h;
    h.bin_edges.resize(counts.size() + 1);
    for (std::size_t i = 0; i < h.bin_edges.size(); ++i) h.bin_edges[i] = t0 + width * static_cast<double>(i);
    h.counts = std::move(counts);
    return h;
}

void TemporalHistogram::validate() const
{
    if (counts.empty()) throw ArgumentError("histogram has no bins");
    if (bin_edges.size() != counts.size() + 1) throw ArgumentError("histogram needs one more edge than bins");
    const double width = bin_width();
    if (!(width > 0.0)) throw ArgumentError("histogram bin edges must increase");
    for (std::size_t i = 1; i + 1 < bin_edges.size(); ++i) {
        const double w = bin_edges[i + 1] - bin_edges[i];
        if (std::abs(w - width) > 1e-9 * width)
            throw ArgumentError("histogram bins are not uniform at bin " + std::to_string(i));
    }
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (!(counts[i] >= 0.0)) throw ArgumentError("histogram count is negative at bin " + std::to_string(i));
}

}  // namespace fasteit
