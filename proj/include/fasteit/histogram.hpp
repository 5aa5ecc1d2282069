#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace fasteit {

// Photon arrival-time histogram. bin_edges has counts.size() + 1 entries, in seconds.
struct TemporalHistogram {
    std::vector<double> bin_edges;
    std::vector<double> counts;
    std::optional<double> background_rate;   // counts/s of wall-clock integration
    std::optional<double> integration_time;  // s
    std::optional<double> repetition_rate;   // Hz; excitation laser repetition

    std::size_t size() const { return counts.size(); }
    double bin_width() const { return bin_edges.size() > 1 ? bin_edges[1] - bin_edges[0] : 0.0; }
    double bin_center(std::size_t i) const { return 0.5 * (bin_edges[i] + bin_edges[i + 1]); }
    std::vector<double> bin_centers() const;

    // Uniform bins starting at t0, one per count.
    static TemporalHistogram uniform(double t0, double width, std::vector<double> counts);

    // Throws ArgumentError on non-uniform bins (beyond 1e-9 relative) or negative counts.
    void validate() const;
};

}  // namespace fasteit
