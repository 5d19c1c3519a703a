#include "crisp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "crisp/error.hpp"

namespace crisp {

ClusterIndex build_index(const AssignmentTable& table) {
    if (table.entries.empty()) throw DataError("cannot index an empty assignment table");
    ClusterIndex index;
    index.level = table.level;
    index.total = table.entries.size();
    // entries are sorted by window id, so member lists come out sorted
    for (const auto& [id, path] : table.entries) index.members[path].push_back(id);
    return index;
}

AliasTable::AliasTable(const std::vector<double>& probs) {
    const std::size_t n = probs.size();
    if (n == 0) throw UsageError("alias table needs a non-empty distribution");
    threshold_.assign(n, 0.0);
    alias_.assign(n, 0);

    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = probs[i] * static_cast<double>(n);

    std::vector<std::uint32_t> small, large;
    for (std::size_t i = n; i-- > 0;) {
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const std::uint32_t s = small.back();
        const std::uint32_t l = large.back();
        small.pop_back();
        threshold_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (std::uint32_t i : large) threshold_[i] = 1.0;
    for (std::uint32_t i : small) threshold_[i] = 1.0;  // fp remainder
}

std::size_t AliasTable::sample(Rng& rng) const {
    const std::size_t slot = static_cast<std::size_t>(rng.below(threshold_.size()));
    const double coin = rng.uniform();
    return coin < threshold_[slot] ? slot : alias_[slot];
}

Sampler::Sampler(const ClusterIndex& index, const Histogram& target, std::uint64_t seed,
                 bool log_occurrences)
    : index_(&index), rng_(seed), seed_(seed), log_occurrences_(log_occurrences) {
    if (target.level != index.level) {
        throw DataError("target histogram level " + std::to_string(target.level) +
                        " does not match index level " + std::to_string(index.level));
    }

    // Renormalize the target over clusters that actually have members.
    std::vector<double> probs;
    double kept = 0.0;
    for (const auto& [path, prob] : target.probs) {
        auto it = index.members.find(path);
        if (it == index.members.end() || it->second.empty()) {
            dropped_target_mass_ += prob;
            continue;
        }
        cluster_members_.push_back(&it->second);
        probs.push_back(prob);
        kept += prob;
    }
    if (cluster_members_.empty() || kept <= 0.0) {
        throw DataError("target has no support among indexed clusters");
    }
    for (double& p : probs) p /= kept;
    alias_ = AliasTable(probs);
}

std::vector<std::uint64_t> Sampler::sample_batch(std::size_t batch_size) {
    std::vector<std::uint64_t> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t cluster = alias_.sample(rng_);
        const auto& members = *cluster_members_[cluster];
        const std::uint64_t id = members[rng_.below(members.size())];
        out.push_back(id);
        if (log_occurrences_) ++occurrence_log_[id];
    }
    draws_emitted_ += batch_size;
    return out;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> Sampler::occurrences() const {
    return {occurrence_log_.begin(), occurrence_log_.end()};
}

Schedule Schedule::from_fraction(std::uint64_t total_steps, double fraction, Histogram base,
                                 Histogram crisp) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw UsageError("crisp fraction must be in [0, 1]");
    }
    Schedule s;
    s.total_steps = total_steps;
    s.crisp_fraction = fraction;
    s.crisp_steps =
        static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(total_steps)));
    s.base = std::move(base);
    s.crisp = std::move(crisp);
    return s;
}

Schedule Schedule::from_steps(std::uint64_t total_steps, std::uint64_t crisp_steps,
                              Histogram base, Histogram crisp) {
    if (crisp_steps > total_steps) {
        throw UsageError("crisp steps cannot exceed total steps");
    }
    Schedule s;
    s.total_steps = total_steps;
    s.crisp_steps = crisp_steps;
    s.crisp_fraction =
        total_steps == 0 ? 0.0
                         : static_cast<double>(crisp_steps) / static_cast<double>(total_steps);
    s.base = std::move(base);
    s.crisp = std::move(crisp);
    return s;
}

ScheduledSampler::ScheduledSampler(const ClusterIndex& index, const Schedule& schedule,
                                   std::uint64_t seed, bool log_occurrences)
    : schedule_(schedule),
      base_(index, schedule.base, seed, log_occurrences),
      crisp_(index, schedule.crisp, seed, log_occurrences) {}

bool ScheduledSampler::uses_crisp(std::uint64_t step) const {
    return step >= schedule_.generic_steps();
}

std::vector<std::uint64_t> ScheduledSampler::sample_step(std::uint64_t step,
                                                         std::size_t batch_size) {
    if (step >= schedule_.total_steps) {
        throw DataError("schedule step " + std::to_string(step) + " out of range (total " +
                        std::to_string(schedule_.total_steps) + ")");
    }
    return uses_crisp(step) ? crisp_.sample_batch(batch_size) : base_.sample_batch(batch_size);
}

RepetitionStats repetition_stats(const std::vector<std::uint64_t>& occurrence_counts,
                                 const std::vector<double>& quantiles) {
    if (occurrence_counts.empty()) {
        throw DataError("repetition stats need a non-empty occurrence log");
    }
    RepetitionStats stats;
    std::vector<std::uint64_t> sorted = occurrence_counts;
    std::sort(sorted.begin(), sorted.end());

    stats.distinct = sorted.size();
    for (std::uint64_t c : sorted) stats.draws += c;
    stats.mean = static_cast<double>(stats.draws) / static_cast<double>(stats.distinct);
    stats.max = sorted.back();
    for (double q : quantiles) {
        if (q < 0.0 || q > 1.0) throw UsageError("quantile must be in [0, 1]");
        std::size_t k = static_cast<std::size_t>(
            std::ceil(q * static_cast<double>(sorted.size())));
        if (k == 0) k = 1;
        if (k > sorted.size()) k = sorted.size();
        stats.quantile_values.emplace_back(q, sorted[k - 1]);
    }
    return stats;
}

void export_stream(Sampler& sampler, std::uint64_t count, const WindowStore& store,
                   const std::string& stream_path, const std::string& manifest_path) {
    WindowWriter writer(stream_path);
    std::map<std::uint64_t, std::uint64_t> occ;
    constexpr std::size_t kChunk = 8192;
    std::uint64_t remaining = count;
    while (remaining > 0) {
        const std::size_t batch = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, remaining));
        for (std::uint64_t id : sampler.sample_batch(batch)) {
            const DocumentWindow* w = store.find(id);
            if (w == nullptr) {
                throw DataError("sampled window id " + std::to_string(id) +
                                " is not present in the window shards");
            }
            writer.append(*w);
            ++occ[id];
        }
        remaining -= batch;
    }
    writer.close();
    write_sample_manifest({occ.begin(), occ.end()}, manifest_path);
}

void write_sample_manifest(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& occ,
                           const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "SMF1\n";
    for (const auto& [id, count] : occ) out << id << " " << count << "\n";
    if (!out) throw DataError("write failed: " + path);
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> read_sample_manifest(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string tag;
    if (!(in >> tag) || tag != "SMF1") {
        throw DataError(path + ": bad magic, expected 'SMF1' (not a sample manifest)");
    }
    std::vector<std::pair<std::uint64_t, std::uint64_t>> occ;
    std::uint64_t id, count;
    while (in >> id >> count) occ.emplace_back(id, count);
    return occ;
}

}  // namespace crisp
