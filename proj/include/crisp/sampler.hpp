#ifndef CRISP_SAMPLER_HPP
#define CRISP_SAMPLER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crisp/corpus.hpp"
#include "crisp/rng.hpp"
#include "crisp/weights.hpp"

namespace crisp {

// Generalist windows grouped by cluster. Member lists are sorted by window
// id so the sampled stream is reproducible.
struct ClusterIndex {
    std::uint32_t level = 0;
    std::uint64_t total = 0;
    std::map<std::uint64_t, std::vector<std::uint64_t>> members;
};

ClusterIndex build_index(const AssignmentTable& table);

// Walker/Vose alias table for O(1) categorical draws; exactly one bounded
// integer and one uniform double per sample.
class AliasTable {
public:
    AliasTable() = default;
    explicit AliasTable(const std::vector<double>& probs);

    std::size_t size() const { return threshold_.size(); }
    std::size_t sample(Rng& rng) const;

private:
    std::vector<double> threshold_;
    std::vector<std::uint32_t> alias_;
};

// Resampled-stream generator: draw a cluster from the target histogram, then
// a member uniformly with replacement. The stream is a pure function of
// (seed, target, index); batch boundaries do not affect it. Holds a
// reference into the index, which must outlive the sampler.
class Sampler {
public:
    Sampler(const ClusterIndex& index, const Histogram& target, std::uint64_t seed,
            bool log_occurrences = true);

    std::vector<std::uint64_t> sample_batch(std::size_t batch_size);

    std::uint64_t draws_emitted() const { return draws_emitted_; }
    std::uint64_t seed() const { return seed_; }
    // Target mass on clusters without generalist members, renormalized away.
    double dropped_target_mass() const { return dropped_target_mass_; }

    // (window_id, times sampled), sorted by window id.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> occurrences() const;

private:
    const ClusterIndex* index_;
    std::vector<const std::vector<std::uint64_t>*> cluster_members_;
    AliasTable alias_;
    Rng rng_;
    std::uint64_t seed_;
    std::uint64_t draws_emitted_ = 0;
    double dropped_target_mass_ = 0.0;
    bool log_occurrences_;
    std::map<std::uint64_t, std::uint64_t> occurrence_log_;
};

// Two-phase continued-pretraining schedule: the first generic_steps() batches
// come from the base distribution, the rest from the crisp distribution.
struct Schedule {
    std::uint64_t total_steps = 0;
    std::uint64_t crisp_steps = 0;
    double crisp_fraction = 0.0;
    Histogram base;
    Histogram crisp;

    std::uint64_t generic_steps() const { return total_steps - crisp_steps; }

    // crisp_steps = round(fraction * total_steps).
    static Schedule from_fraction(std::uint64_t total_steps, double fraction, Histogram base,
                                  Histogram crisp);
    static Schedule from_steps(std::uint64_t total_steps, std::uint64_t crisp_steps,
                               Histogram base, Histogram crisp);
};

class ScheduledSampler {
public:
    ScheduledSampler(const ClusterIndex& index, const Schedule& schedule, std::uint64_t seed,
                     bool log_occurrences = true);

    // Batch for one training step; throws DataError when step >= total_steps.
    std::vector<std::uint64_t> sample_step(std::uint64_t step, std::size_t batch_size);

    bool uses_crisp(std::uint64_t step) const;
    const Sampler& base_sampler() const { return base_; }
    const Sampler& crisp_sampler() const { return crisp_; }

private:
    Schedule schedule_;
    Sampler base_;
    Sampler crisp_;
};

struct RepetitionStats {
    std::uint64_t draws = 0;
    std::uint64_t distinct = 0;
    double mean = 0.0;
    std::uint64_t max = 0;
    std::vector<std::pair<double, std::uint64_t>> quantile_values;  // (q, occurrences)
};

// Statistics over windows sampled at least once. Quantile q is the value at
// the ceil(q*n)-th order statistic (clamped to the minimum for q = 0).
RepetitionStats repetition_stats(const std::vector<std::uint64_t>& occurrence_counts,
                                 const std::vector<double>& quantiles);

// Draws `count` ids from the sampler, materializes them as WND1 records
// (repetitions written repeatedly), and writes a textual manifest of
// (window_id, occurrences). Fatal when an id cannot be resolved.
void export_stream(Sampler& sampler, std::uint64_t count, const WindowStore& store,
                   const std::string& stream_path, const std::string& manifest_path);

// Sample manifests: first line "SMF1", then "window_id occurrences" lines
// sorted by window id.
void write_sample_manifest(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& occ,
                           const std::string& path);
std::vector<std::pair<std::uint64_t, std::uint64_t>> read_sample_manifest(
    const std::string& path);

}  // namespace crisp

#endif  // CRISP_SAMPLER_HPP
