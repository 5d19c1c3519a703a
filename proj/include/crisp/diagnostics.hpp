#ifndef CRISP_DIAGNOSTICS_HPP
#define CRISP_DIAGNOSTICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "crisp/embed.hpp"
#include "crisp/weights.hpp"

namespace crisp {

struct DistancePair {
    double min = 0.0;   // min cosine distance to the specialist set
    double mean = 0.0;  // mean cosine distance to the specialist set
};

// Exact brute-force cosine distances (1 - dot on unit-norm vectors).
DistancePair specialist_distance(const float* embedding, std::uint32_t dim,
                                 const EmbeddingSet& specialist);

struct DistanceReport {
    std::vector<std::uint64_t> ids;
    std::vector<DistancePair> values;

    struct Bin {
        double lo = 0.0;
        double hi = 0.0;
        std::uint64_t count = 0;   // windows whose min distance falls in [lo, hi)
        double mean_min = 0.0;
        double mean_mean = 0.0;
    };
    std::vector<Bin> bins;  // even edges over [0, 2]
};

DistanceReport distance_report(const EmbeddingSet& windows, const EmbeddingSet& specialist,
                               std::size_t num_bins);

// TSV: per-window section then binned summary, both with header rows.
void write_distance_report(const DistanceReport& report, const std::string& path);

struct ClusterSummaryRow {
    std::uint64_t rank = 0;  // 1-based after sorting by weight desc, ties by path
    std::uint64_t path = 0;
    std::uint64_t generalist_count = 0;
    double specialist_prob = 0.0;
    double generalist_prob = 0.0;
    double weight = 0.0;
    bool dropped = false;  // specialist mass with no generalist support
};

// Joins assignments, histograms and weights over the union of supports,
// sorted by weight descending.
std::vector<ClusterSummaryRow> cluster_summary(const AssignmentTable& generalist_table,
                                               const Histogram& specialist,
                                               const Histogram& generalist,
                                               const ImportanceWeights& weights);

void write_cluster_summary(const std::vector<ClusterSummaryRow>& rows, const std::string& path);

}  // namespace crisp

#endif  // CRISP_DIAGNOSTICS_HPP
