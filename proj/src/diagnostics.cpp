#include "crisp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "crisp/error.hpp"

namespace crisp {

DistancePair specialist_distance(const float* embedding, std::uint32_t dim,
                                 const EmbeddingSet& specialist) {
    if (specialist.size() == 0) throw DataError("specialist embedding set is empty");
    if (specialist.dim() != dim) {
        throw DataError("embedding dim " + std::to_string(dim) +
                        " does not match specialist dim " + std::to_string(specialist.dim()));
    }
    DistancePair out;
    out.min = 2.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < specialist.size(); ++i) {
        const float* s = specialist.vec(i);
        double dot = 0.0;
        for (std::uint32_t d = 0; d < dim; ++d) dot += double(embedding[d]) * double(s[d]);
        const double dist = 1.0 - dot;
        sum += dist;
        if (dist < out.min) out.min = dist;
    }
    out.mean = sum / static_cast<double>(specialist.size());
    return out;
}

DistanceReport distance_report(const EmbeddingSet& windows, const EmbeddingSet& specialist,
                               std::size_t num_bins) {
    if (num_bins == 0) throw UsageError("distance report needs at least one bin");
    DistanceReport report;
    report.ids = windows.ids();
    report.values.resize(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        report.values[i] = specialist_distance(windows.vec(i), windows.dim(), specialist);
    }

    // Cosine distance of unit vectors lives in [0, 2]; fixed edges keep bins
    // comparable across runs.
    report.bins.resize(num_bins);
    const double width = 2.0 / static_cast<double>(num_bins);
    for (std::size_t b = 0; b < num_bins; ++b) {
        report.bins[b].lo = width * static_cast<double>(b);
        report.bins[b].hi = width * static_cast<double>(b + 1);
    }
    for (const auto& v : report.values) {
        std::size_t b = static_cast<std::size_t>(v.min / width);
        if (b >= num_bins) b = num_bins - 1;
        auto& bin = report.bins[b];
        ++bin.count;
        bin.mean_min += v.min;
        bin.mean_mean += v.mean;
    }
    for (auto& bin : report.bins) {
        if (bin.count > 0) {
            bin.mean_min /= static_cast<double>(bin.count);
            bin.mean_mean /= static_cast<double>(bin.count);
        }
    }
    return report;
}

void write_distance_report(const DistanceReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.precision(9);
    out << "window_id\tmin_distance\tmean_distance\n";
    for (std::size_t i = 0; i < report.ids.size(); ++i) {
        out << report.ids[i] << "\t" << report.values[i].min << "\t" << report.values[i].mean
            << "\n";
    }
    out << "\nbin_lo\tbin_hi\tcount\tmean_min\tmean_mean\n";
    for (const auto& bin : report.bins) {
        out << bin.lo << "\t" << bin.hi << "\t" << bin.count << "\t";
        if (bin.count > 0) {
            out << bin.mean_min << "\t" << bin.mean_mean << "\n";
        } else {
            out << "nan\tnan\n";
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<ClusterSummaryRow> cluster_summary(const AssignmentTable& generalist_table,
                                               const Histogram& specialist,
                                               const Histogram& generalist,
                                               const ImportanceWeights& weights) {
    if (specialist.level != generalist.level || specialist.level != weights.level ||
        generalist_table.level != specialist.level) {
        throw DataError("cluster summary inputs disagree on level");
    }

    std::set<std::uint64_t> support;
    for (const auto& [p, _] : specialist.probs) support.insert(p);
    for (const auto& [p, _] : generalist.probs) support.insert(p);

    std::vector<ClusterSummaryRow> rows;
    rows.reserve(support.size());
    for (std::uint64_t p : support) {
        ClusterSummaryRow row;
        row.path = p;
        auto cit = generalist_table.counts.find(p);
        row.generalist_count = cit == generalist_table.counts.end() ? 0 : cit->second;
        auto sit = specialist.probs.find(p);
        row.specialist_prob = sit == specialist.probs.end() ? 0.0 : sit->second;
        auto git = generalist.probs.find(p);
        row.generalist_prob = git == generalist.probs.end() ? 0.0 : git->second;
        auto wit = weights.weights.find(p);
        if (wit != weights.weights.end()) {
            row.weight = wit->second;
        } else {
            row.weight = 0.0;
            row.dropped = row.specialist_prob > 0.0;
        }
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.path < b.path;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
    return rows;
}

void write_cluster_summary(const std::vector<ClusterSummaryRow>& rows,
                           const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.precision(9);
    out << "rank\tpath\tgeneralist_count\tspecialist_prob\tgeneralist_prob\tweight\tnote\n";
    for (const auto& r : rows) {
        out << r.rank << "\t" << r.path << "\t" << r.generalist_count << "\t"
            << r.specialist_prob << "\t" << r.generalist_prob << "\t" << r.weight << "\t"
            << (r.dropped ? "dropped" : "") << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace crisp
