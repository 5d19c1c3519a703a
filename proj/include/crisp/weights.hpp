#ifndef CRISP_WEIGHTS_HPP
#define CRISP_WEIGHTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crisp/cluster.hpp"

namespace crisp {

// Sparse per-cluster distribution P(c|D). Zero-count clusters are omitted
// from the support. Mixtures carry probabilities only (total == 0, counts
// empty).
struct Histogram {
    std::uint32_t level = 0;
    std::uint64_t total = 0;
    std::map<std::uint64_t, double> probs;
    std::map<std::uint64_t, std::uint64_t> counts;

    bool counted() const { return total > 0; }
};

Histogram histogram(const AssignmentTable& table);

// w(c) = P(c|specialist) / P(c|generalist), defined on the generalist
// support. Specialist mass on clusters without generalist examples is
// accumulated into dropped_specialist_mass and excluded.
struct ImportanceWeights {
    std::uint32_t level = 0;
    std::map<std::uint64_t, double> weights;
    double dropped_specialist_mass = 0.0;
};

struct WeightOptions {
    // Add-one smoothing of the generalist histogram over the union support
    // (epsilon = 1/total per cluster), so no specialist mass is dropped.
    bool epsilon_smoothing = false;
};

ImportanceWeights importance_weights(const Histogram& specialist, const Histogram& generalist,
                                     const WeightOptions& opts = {});

// Convex combination of histograms; mix_weights must lie on the simplex
// within 1e-9. The result has no count semantics.
Histogram mix_histograms(const std::vector<Histogram>& histograms,
                         const std::vector<double>& mix_weights);

// Text artifacts, one "path value [count]" record per line; diffable.
void write_histogram(const Histogram& h, const std::string& path);
Histogram read_histogram(const std::string& path);

void write_weights(const ImportanceWeights& w, const std::string& path);
ImportanceWeights read_weights(const std::string& path);

}  // namespace crisp

#endif  // CRISP_WEIGHTS_HPP
