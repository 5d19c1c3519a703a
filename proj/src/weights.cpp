#include "crisp/weights.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crisp/error.hpp"

namespace crisp {

namespace {

constexpr double kSimplexTolerance = 1e-9;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Histogram histogram(const AssignmentTable& table) {
    if (table.entries.empty()) {
        throw DataError("cannot estimate a cluster histogram from zero examples");
    }
    Histogram h;
    h.level = table.level;
    h.total = table.entries.size();
    const double total = static_cast<double>(h.total);
    for (const auto& [path, count] : table.counts) {
        if (count == 0) continue;
        h.counts[path] = count;
        h.probs[path] = static_cast<double>(count) / total;
    }
    return h;
}

ImportanceWeights importance_weights(const Histogram& specialist, const Histogram& generalist,
                                     const WeightOptions& opts) {
    if (specialist.level != generalist.level) {
        throw DataError("histogram level mismatch: specialist level " +
                        std::to_string(specialist.level) + " vs generalist level " +
                        std::to_string(generalist.level));
    }

    ImportanceWeights w;
    w.level = specialist.level;

    std::map<std::uint64_t, double> gen_probs;
    if (opts.epsilon_smoothing) {
        if (!generalist.counted()) {
            throw DataError("epsilon smoothing requires a counted generalist histogram");
        }
        // Union support, one pseudo-count per cluster.
        std::map<std::uint64_t, std::uint64_t> smoothed;
        for (const auto& [path, count] : generalist.counts) smoothed[path] = count + 1;
        for (const auto& [path, prob] : specialist.probs) smoothed.emplace(path, 1);
        const double denom =
            static_cast<double>(generalist.total) + static_cast<double>(smoothed.size());
        for (const auto& [path, count] : smoothed)
            gen_probs[path] = static_cast<double>(count) / denom;
    } else {
        gen_probs = generalist.probs;
    }

    for (const auto& [path, g] : gen_probs) {
        auto it = specialist.probs.find(path);
        w.weights[path] = it == specialist.probs.end() ? 0.0 : it->second / g;
    }
    for (const auto& [path, s] : specialist.probs) {
        if (!gen_probs.count(path)) w.dropped_specialist_mass += s;
    }
    return w;
}

Histogram mix_histograms(const std::vector<Histogram>& histograms,
                         const std::vector<double>& mix_weights) {
    if (histograms.empty()) throw UsageError("mix needs at least one histogram");
    if (histograms.size() != mix_weights.size()) {
        throw UsageError("mix needs one weight per histogram");
    }
    double sum = 0.0;
    for (double v : mix_weights) {
        if (v < 0.0) throw DataError("mix weights must be non-negative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
        throw DataError("mix weights must sum to 1 (got " + format_double(sum) + ")");
    }

    Histogram out;
    out.level = histograms[0].level;
    out.total = 0;  // a mixture has no count semantics
    for (std::size_t i = 0; i < histograms.size(); ++i) {
        if (histograms[i].level != out.level) {
            throw DataError("mix level mismatch: histogram " + std::to_string(i) + " is level " +
                            std::to_string(histograms[i].level) + ", expected " +
                            std::to_string(out.level));
        }
        for (const auto& [path, prob] : histograms[i].probs) {
            out.probs[path] += mix_weights[i] * prob;
        }
    }
    return out;
}

void write_histogram(const Histogram& h, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "HIST1\n";
    out << "level " << h.level << "\n";
    out << "total " << h.total << "\n";
    out << "entries " << h.probs.size() << "\n";
    for (const auto& [p, prob] : h.probs) {
        out << p << " " << format_double(prob);
        if (h.counted()) out << " " << h.counts.at(p);
        out << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

Histogram read_histogram(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string tag;
    if (!(in >> tag) || tag != "HIST1") {
        throw DataError(path + ": bad magic, expected 'HIST1' (not a histogram artifact)");
    }
    Histogram h;
    std::string key;
    std::uint64_t entries = 0;
    if (!(in >> key >> h.level) || key != "level") throw DataError(path + ": bad level line");
    if (!(in >> key >> h.total) || key != "total") throw DataError(path + ": bad total line");
    if (!(in >> key >> entries) || key != "entries") throw DataError(path + ": bad entries line");
    for (std::uint64_t i = 0; i < entries; ++i) {
        std::uint64_t p;
        double prob;
        if (!(in >> p >> prob)) throw DataError(path + ": truncated entry " + std::to_string(i));
        h.probs[p] = prob;
        if (h.total > 0) {
            std::uint64_t count;
            if (!(in >> count)) throw DataError(path + ": truncated count " + std::to_string(i));
            h.counts[p] = count;
        }
    }
    return h;
}

void write_weights(const ImportanceWeights& w, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "WGT1\n";
    out << "level " << w.level << "\n";
    out << "dropped_mass " << format_double(w.dropped_specialist_mass) << "\n";
    out << "entries " << w.weights.size() << "\n";
    for (const auto& [p, value] : w.weights) {
        out << p << " " << format_double(value) << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

ImportanceWeights read_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string tag;
    if (!(in >> tag) || tag != "WGT1") {
        throw DataError(path + ": bad magic, expected 'WGT1' (not a weights artifact)");
    }
    ImportanceWeights w;
    std::string key;
    std::uint64_t entries = 0;
    if (!(in >> key >> w.level) || key != "level") throw DataError(path + ": bad level line");
    if (!(in >> key >> w.dropped_specialist_mass) || key != "dropped_mass")
        throw DataError(path + ": bad dropped_mass line");
    if (!(in >> key >> entries) || key != "entries") throw DataError(path + ": bad entries line");
    for (std::uint64_t i = 0; i < entries; ++i) {
        std::uint64_t p;
        double value;
        if (!(in >> p >> value)) throw DataError(path + ": truncated entry " + std::to_string(i));
        w.weights[p] = value;
    }
    return w;
}

}  // namespace crisp
