// Acceptance suite: one self-contained check per criterion, one PASS/FAIL
// line each. Exits nonzero when any criterion fails. The first argument is
// the path to the crisp CLI binary (needed by the end-to-end criteria).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "crisp/classifier.hpp"
#include "crisp/cluster.hpp"
#include "crisp/corpus.hpp"
#include "crisp/embed.hpp"
#include "crisp/manifest.hpp"
#include "crisp/rng.hpp"
#include "crisp/sampler.hpp"
#include "crisp/weights.hpp"
#include "stat_util.hpp"

using namespace crisp;

namespace {

std::string g_cli;

struct Check {
    std::string name;
    std::function<bool(std::string&)> run;
};

// ---------------------------------------------------------------------------
// helpers

EmbeddingSet adversarial_blob_set(std::size_t total, std::uint32_t dim, double heavy_fraction,
                                  std::uint64_t seed) {
    EmbeddingSet set(dim);
    Rng rng(seed);
    std::vector<float> buf(dim);
    const std::size_t heavy = static_cast<std::size_t>(heavy_fraction * double(total));
    for (std::size_t i = 0; i < total; ++i) {
        if (i < heavy) {
            // tight blob around e0
            buf[0] = 1.0f;
            for (std::uint32_t d = 1; d < dim; ++d)
                buf[d] = static_cast<float>(0.02 * rng.gaussian());
        } else {
            for (std::uint32_t d = 0; d < dim; ++d)
                buf[d] = static_cast<float>(rng.gaussian());
        }
        set.add(i, buf.data());
    }
    set.normalize();
    return set;
}

Histogram random_target(std::uint64_t clusters, std::uint64_t seed, std::uint32_t level = 1) {
    Rng rng(seed);
    Histogram h;
    h.level = level;
    double total = 0.0;
    std::vector<double> raw(clusters);
    for (auto& p : raw) {
        p = 0.05 + rng.uniform();
        total += p;
    }
    for (std::uint64_t c = 0; c < clusters; ++c) h.probs[c] = raw[c] / total;
    return h;
}

ClusterIndex uniform_members_index(std::uint64_t clusters, std::uint64_t members_each,
                                   std::uint32_t level = 1) {
    AssignmentTable t;
    t.level = level;
    std::uint64_t id = 0;
    for (std::uint64_t c = 0; c < clusters; ++c) {
        for (std::uint64_t m = 0; m < members_each; ++m) {
            t.entries.emplace_back(id++, c);
            ++t.counts[c];
        }
    }
    return build_index(t);
}

int run_cli(const std::string& args, const std::string& log) {
    const std::string cmd = g_cli + " " + args + " >> " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return status;
}

void write_two_domain_corpus(const std::string& path, std::size_t docs,
                             double minority_fraction, std::uint64_t seed,
                             std::vector<bool>* minority_flags) {
    Rng rng(seed);
    std::ofstream f(path);
    for (std::size_t i = 0; i < docs; ++i) {
        const bool minority = rng.uniform() < minority_fraction;
        if (minority_flags) minority_flags->push_back(minority);
        f << R"({"text": ")";
        const std::size_t len = 64 + rng.below(30);
        for (std::size_t j = 0; j < len; ++j) {
            // vocabulary-disjoint domains
            f << (minority ? "beta" : "alpha") << rng.below(400) << " ";
        }
        f << R"("})" << "\n";
    }
}

double minority_mass(const std::string& manifest_path, const std::vector<bool>& flags) {
    auto occ = read_sample_manifest(manifest_path);
    std::uint64_t minority = 0, total = 0;
    for (const auto& [wid, n] : occ) {
        const std::uint64_t doc = window_doc_id(wid);
        total += n;
        if (flags.at(doc)) minority += n;
    }
    return total == 0 ? 0.0 : double(minority) / double(total);
}

// ---------------------------------------------------------------------------
// criteria

bool criterion_tree_constants(std::string& detail) {
    const std::uint64_t expected[4] = {64, 4096, 262144, 16777216};
    for (std::uint32_t level = 1; level <= 4; ++level) {
        if (ClusterTree::level_size(64, level) != expected[level - 1]) {
            detail = "level " + std::to_string(level) + " size mismatch";
            return false;
        }
    }
    // a materialized depth-2 tree matches the same arithmetic
    ClusterTree small(64, 2, 8, 0);
    if (small.level_data(1).size() != 64 * 8 || small.level_data(2).size() != 4096 * 8) {
        detail = "materialized level sizes disagree";
        return false;
    }
    detail = "levels 64/4096/262144/16777216";
    return true;
}

TreeTrainResult train_adversarial(std::uint64_t seed) {
    EmbeddingSet set = adversarial_blob_set(16000, 16, 0.9, 1234);
    TreeConfig cfg;
    cfg.arity = 64;
    cfg.depth = 1;
    cfg.steps = 20;
    cfg.samples_per_step = 6400;
    cfg.balancing_limit = 0.022;
    cfg.seed = seed;
    return train_tree(set, cfg);
}

bool criterion_balancing(std::string& detail) {
    auto result = train_adversarial(7);
    if (result.stats.steps.size() != 20) {
        detail = "expected 20 recorded steps, saw " + std::to_string(result.stats.steps.size());
        return false;
    }
    double worst = 0.0;
    for (const auto& s : result.stats.steps) {
        const double fraction = double(s.max_cluster_count) / double(s.batch_size);
        worst = std::max(worst, fraction);
        if (fraction > 0.022) {
            detail = "step " + std::to_string(s.step) + " fraction " + std::to_string(fraction);
            return false;
        }
    }
    std::ostringstream os;
    os << "max cluster fraction " << worst << " <= 0.022 across 20 EM+balance steps";
    detail = os.str();
    return true;
}

bool criterion_weight_identity(std::string& detail) {
    Rng rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint64_t clusters = 2 + rng.below(4095);
        auto make_hist = [&](std::uint64_t total_draws) {
            AssignmentTable t;
            t.level = 3;
            std::uint64_t id = 0;
            const int support = 1 + static_cast<int>(rng.below(32));
            for (int s = 0; s < support; ++s) {
                const std::uint64_t path = rng.below(clusters);
                const std::uint64_t count = 1 + rng.below(total_draws);
                for (std::uint64_t i = 0; i < count; ++i) t.entries.emplace_back(id++, path);
                t.counts[path] += count;
            }
            return histogram(t);
        };
        const auto h_s = make_hist(50);
        const auto h_g = make_hist(200);
        const auto w = importance_weights(h_s, h_g);
        for (const auto& [path, weight] : w.weights) {
            const auto it = h_s.probs.find(path);
            const double s = it == h_s.probs.end() ? 0.0 : it->second;
            worst = std::max(worst, std::abs(h_g.probs.at(path) * weight - s));
        }
    }
    std::ostringstream os;
    os << "max |h_g*w - h_s| = " << worst;
    detail = os.str();
    return worst <= 1e-12;
}

bool criterion_sampler_marginal(std::string& detail) {
    const auto index = uniform_members_index(64, 20);
    double worst_tv = 0.0;
    for (std::uint64_t seed : {11ull, 22ull, 33ull, 44ull, 55ull}) {
        const auto target = random_target(64, 1000 + seed);
        Sampler sampler(index, target, seed, /*log_occurrences=*/false);
        std::vector<std::uint64_t> counts(64, 0);
        constexpr std::size_t kBatch = 65536;
        std::uint64_t remaining = 1000000;
        while (remaining > 0) {
            const std::size_t batch = static_cast<std::size_t>(
                std::min<std::uint64_t>(kBatch, remaining));
            for (std::uint64_t id : sampler.sample_batch(batch)) ++counts[id / 20];
            remaining -= batch;
        }
        std::vector<double> empirical(64), expected(64);
        for (std::uint64_t c = 0; c < 64; ++c) {
            empirical[c] = double(counts[c]) / 1e6;
            expected[c] = target.probs.at(c);
        }
        const double tv = statutil::total_variation(empirical, expected);
        worst_tv = std::max(worst_tv, tv);
        if (tv > 0.01) {
            detail = "seed " + std::to_string(seed) + " TV " + std::to_string(tv);
            return false;
        }
    }
    std::ostringstream os;
    os << "worst TV over 5 seeds = " << worst_tv << " <= 0.01";
    detail = os.str();
    return true;
}

bool criterion_within_cluster_uniformity(std::string& detail) {
    const std::uint64_t clusters = 16, members = 32;
    const auto index = uniform_members_index(clusters, members);
    double worst_p = 1.0;
    for (std::uint64_t seed : {11ull, 22ull, 33ull, 44ull, 55ull}) {
        const auto target = random_target(clusters, 2000 + seed);
        Sampler sampler(index, target, seed, /*log_occurrences=*/false);
        std::vector<std::uint64_t> counts(clusters * members, 0);
        std::uint64_t remaining = 1000000;
        while (remaining > 0) {
            const std::size_t batch = static_cast<std::size_t>(
                std::min<std::uint64_t>(65536, remaining));
            for (std::uint64_t id : sampler.sample_batch(batch)) ++counts[id];
            remaining -= batch;
        }
        for (std::uint64_t c = 0; c < clusters; ++c) {
            std::uint64_t cluster_total = 0;
            for (std::uint64_t m = 0; m < members; ++m) cluster_total += counts[c * members + m];
            const double expected = double(cluster_total) / double(members);
            double chi2 = 0.0;
            for (std::uint64_t m = 0; m < members; ++m) {
                const double diff = double(counts[c * members + m]) - expected;
                chi2 += diff * diff / expected;
            }
            const double p = statutil::chi2_survival(chi2, double(members - 1));
            worst_p = std::min(worst_p, p);
            if (p <= 0.001) {
                detail = "seed " + std::to_string(seed) + " cluster " + std::to_string(c) +
                         " p " + std::to_string(p);
                return false;
            }
        }
    }
    std::ostringstream os;
    os << "min chi-square p over 5 seeds x 16 clusters = " << worst_p << " > 0.001";
    detail = os.str();
    return true;
}

bool criterion_lsi_oracle(std::string& detail) {
    // 200x500 synthetic tf-idf matrix with 16 planted topics
    Rng rng(21);
    const std::uint32_t vocab = 500, topics = 16;
    std::vector<std::vector<double>> topic_rows(topics, std::vector<double>(vocab, 0.0));
    for (auto& t : topic_rows)
        for (std::uint32_t j = 0; j < vocab; ++j)
            if (rng.below(8) == 0) t[j] = rng.uniform();
    std::vector<TfIdfVector> rows(200);
    for (auto& r : rows) {
        const auto& t = topic_rows[rng.below(topics)];
        std::vector<double> dense(vocab, 0.0);
        const double strength = 1.0 + rng.uniform();
        double norm = 0.0;
        for (std::uint32_t j = 0; j < vocab; ++j) {
            double v = strength * t[j];
            if (rng.below(32) == 0) v += 0.02 * rng.uniform();
            dense[j] = v;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (std::uint32_t j = 0; j < vocab; ++j)
            if (dense[j] > 0.0) r.entries.push_back({j, static_cast<float>(dense[j] / norm)});
    }

    LsiFitOptions opts;
    opts.dim = 16;
    opts.seed = 5;
    const auto proj = lsi_fit(rows, vocab, opts);

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(200, vocab);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& e : rows[i].entries) a(static_cast<Eigen::Index>(i), e.index) = e.value;
    Eigen::JacobiSVD<Eigen::MatrixXd> exact(a, Eigen::ComputeThinV);

    double worst_rel = 0.0, worst_angle = 0.0;
    for (int k = 0; k < 16; ++k) {
        const double rel = std::abs(double(proj.singular_values[std::size_t(k)]) -
                                    exact.singularValues()(k)) /
                           exact.singularValues()(k);
        worst_rel = std::max(worst_rel, rel);
    }
    Eigen::MatrixXd v1(vocab, 16), v2(vocab, 16);
    for (int k = 0; k < 16; ++k)
        for (std::uint32_t j = 0; j < vocab; ++j) {
            v1(j, k) = proj.row(static_cast<std::uint32_t>(k))[j];
            v2(j, k) = exact.matrixV()(j, k);
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> overlap(v1.transpose() * v2);
    for (int k = 0; k < 16; ++k) {
        const double c = std::min(1.0, overlap.singularValues()(k));
        worst_angle = std::max(worst_angle, std::acos(c));
    }
    std::ostringstream os;
    os << "max sv rel err " << worst_rel << ", max principal angle " << worst_angle << " rad";
    detail = os.str();
    return worst_rel < 1e-3 && worst_angle < 1e-3;
}

bool criterion_classifier_threshold(std::string& detail) {
    Rng rng(31);
    std::vector<double> scores(100000);
    for (auto& s : scores) s = rng.uniform();

    const auto t = threshold_from_quantile(scores, 0.975);
    if (std::abs(t.accepted_fraction - 0.025) > 0.002) {
        detail = "accepted fraction " + std::to_string(t.accepted_fraction);
        return false;
    }

    // nesting across the full quantile grid
    ScoreSet set;
    set.ids.resize(scores.size());
    set.scores.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        set.ids[i] = i;
        set.scores[i] = static_cast<float>(scores[i]);
    }
    std::vector<double> as_double(set.scores.begin(), set.scores.end());
    const double grid[] = {0.5,   0.6,  0.7,    0.75, 0.8,   0.9,   0.95,
                           0.975, 0.98, 0.9875, 0.99, 0.995, 0.9975};
    std::set<std::uint64_t> previous;
    bool first = true;
    for (double q : grid) {
        auto selected = filter(set, threshold_from_quantile(as_double, q));
        std::set<std::uint64_t> current(selected.begin(), selected.end());
        if (!first) {
            for (std::uint64_t id : current) {
                if (!previous.count(id)) {
                    detail = "nesting violated at q " + std::to_string(q);
                    return false;
                }
            }
            if (current.size() > previous.size()) {
                detail = "selection grew at q " + std::to_string(q);
                return false;
            }
        }
        previous = std::move(current);
        first = false;
    }
    std::ostringstream os;
    os << "accepted " << t.accepted_fraction << " at q=0.975; nesting holds over 13 quantiles";
    detail = os.str();
    return true;
}

// Shared by criteria 8 and 10: runs the full pipeline through the CLI and
// returns the minority fraction of the crisp and base streams plus artifact
// hashes.
struct PipelineOutcome {
    bool ok = false;
    std::string fail_reason;
    double crisp_minority = 0.0;
    double base_minority = 0.0;
    std::vector<std::string> artifact_hashes;
};

PipelineOutcome run_pipeline(const std::string& dir, const std::vector<bool>& minority_flags) {
    PipelineOutcome out;
    const std::string log = dir + "/pipeline.log";
    auto file = [&](const std::string& name) { return dir + "/" + name; };
    auto stage = [&](const std::string& args) {
        if (run_cli(args, log) != 0) {
            out.fail_reason = "stage failed: " + args.substr(0, 40) + "...";
            return false;
        }
        return true;
    };

    const std::string w = " --workdir " + dir;
    if (!stage("ingest" + w + " --input " + file("gen.jsonl") + " --output " +
               file("gen.wnd") + " --window-size 64 --min-window-tokens 16"))
        return out;
    if (!stage("ingest" + w + " --input " + file("spec.jsonl") + " --output " +
               file("spec.wnd") + " --tag specialist --task minority --window-size 64 "
               "--min-window-tokens 16"))
        return out;
    if (!stage("embed-lsi" + w + " --fit-windows " + file("gen.wnd") + " --save-model " +
               file("model") + " --dim 32 --seed 5 --transform " + file("gen.wnd") + "=" +
               file("gen.emb") + " --transform " + file("spec.wnd") + "=" + file("spec.emb")))
        return out;
    if (!stage("cluster-train" + w + " --embeddings " + file("gen.emb") + " --output " +
               file("tree.bin") + " --arity 8 --depth 2 --steps 20 --samples-per-step 6400 "
               "--limit 0.1875 --seed 5 --trace " + file("trace.txt")))
        return out;
    if (!stage("assign" + w + " --tree " + file("tree.bin") + " --embeddings " +
               file("gen.emb") + " --level 2 --output " + file("gen.asg")))
        return out;
    if (!stage("assign" + w + " --tree " + file("tree.bin") + " --embeddings " +
               file("spec.emb") + " --level 2 --output " + file("spec.asg")))
        return out;
    if (!stage("histogram" + w + " --assignments " + file("gen.asg") + " --output " +
               file("gen.hist")))
        return out;
    if (!stage("histogram" + w + " --assignments " + file("spec.asg") + " --output " +
               file("spec.hist")))
        return out;
    if (!stage("weights" + w + " --specialist " + file("spec.hist") + " --generalist " +
               file("gen.hist") + " --output " + file("w.wgt")))
        return out;
    if (!stage("sample" + w + " --target " + file("spec.hist") + " --index-assignments " +
               file("gen.asg") + " --windows " + file("gen.wnd") +
               " --count 20000 --seed 11 --output " + file("crisp.wnd") + " --manifest " +
               file("crisp.manifest")))
        return out;
    if (!stage("sample" + w + " --target " + file("gen.hist") + " --index-assignments " +
               file("gen.asg") + " --windows " + file("gen.wnd") +
               " --count 20000 --seed 12 --output " + file("base.wnd") + " --manifest " +
               file("base.manifest")))
        return out;

    out.crisp_minority = minority_mass(file("crisp.manifest"), minority_flags);
    out.base_minority = minority_mass(file("base.manifest"), minority_flags);
    for (const char* name : {"gen.wnd", "spec.wnd", "gen.emb", "spec.emb", "tree.bin",
                             "gen.asg", "spec.asg", "gen.hist", "spec.hist", "w.wgt",
                             "crisp.wnd", "crisp.manifest"}) {
        out.artifact_hashes.push_back(hash_file(file(name)));
    }
    out.ok = true;
    return out;
}

std::vector<bool> g_minority_flags;
PipelineOutcome g_first_pipeline;

bool criterion_end_to_end(std::string& detail) {
    statutil::ScratchDir dir("crisp-acceptance-e2e");
    g_minority_flags.clear();
    write_two_domain_corpus(dir.file("gen.jsonl"), 20000, 0.1, 71, &g_minority_flags);
    write_two_domain_corpus(dir.file("spec.jsonl"), 200, 1.0, 72, nullptr);

    g_first_pipeline = run_pipeline(dir.path, g_minority_flags);
    if (!g_first_pipeline.ok) {
        detail = g_first_pipeline.fail_reason;
        return false;
    }
    std::ostringstream os;
    os << "crisp stream minority fraction " << g_first_pipeline.crisp_minority
       << " (>= 0.80), base " << g_first_pipeline.base_minority << " (~0.10)";
    detail = os.str();
    return g_first_pipeline.crisp_minority >= 0.80 && g_first_pipeline.base_minority <= 0.20;
}

bool criterion_multitask_and_schedule(std::string& detail) {
    Histogram a, b, c;
    a.level = b.level = c.level = 2;
    a.probs[10] = 1.0;
    b.probs[20] = 1.0;
    c.probs[30] = 1.0;
    const double third = 1.0 / 3.0;
    const auto mixed = mix_histograms({a, b, c}, {third, third, third});
    if (mixed.probs.size() != 3) {
        detail = "mixture support size " + std::to_string(mixed.probs.size());
        return false;
    }
    double sum = 0.0;
    for (const auto& [path, prob] : mixed.probs) {
        if (std::abs(prob - third) > 1e-15) {
            detail = "mixture probability off by " + std::to_string(std::abs(prob - third));
            return false;
        }
        sum += prob;
    }
    if (std::abs(sum - 1.0) > 1e-15) {
        detail = "mixture mass " + std::to_string(sum);
        return false;
    }

    // scheduler: 1,024 total steps, 928 generic, switch after step 927
    const auto index = uniform_members_index(2, 2, 2);
    Histogram base, crisp;
    base.level = crisp.level = 2;
    base.probs[0] = 1.0;
    crisp.probs[1] = 1.0;
    const auto schedule = Schedule::from_steps(1024, 96, base, crisp);
    if (schedule.generic_steps() != 928) {
        detail = "generic steps " + std::to_string(schedule.generic_steps());
        return false;
    }
    ScheduledSampler sampler(index, schedule, 3);
    if (sampler.uses_crisp(927) || !sampler.uses_crisp(928)) {
        detail = "switch step wrong";
        return false;
    }
    for (std::uint64_t id : sampler.sample_step(927, 32)) {
        if (id >= 2) {
            detail = "step 927 drew from the crisp distribution";
            return false;
        }
    }
    for (std::uint64_t id : sampler.sample_step(928, 32)) {
        if (id < 2) {
            detail = "step 928 drew from the base distribution";
            return false;
        }
    }
    // the fraction rule lands on the same phase boundary
    const auto by_fraction = Schedule::from_fraction(1024, 96.0 / 1024.0, base, crisp);
    if (by_fraction.crisp_steps != 96) {
        detail = "fraction rounding gave " + std::to_string(by_fraction.crisp_steps);
        return false;
    }
    detail = "uniform 3-way mixture exact; phase switch after step 927";
    return true;
}

bool criterion_determinism(std::string& detail) {
    // criterion 2 rerun: bit-identical tree artifact
    statutil::ScratchDir dir("crisp-acceptance-det");
    {
        auto r1 = train_adversarial(7);
        auto r2 = train_adversarial(7);
        write_tree(r1.tree, dir.file("t1.tree"));
        write_tree(r2.tree, dir.file("t2.tree"));
        if (hash_file(dir.file("t1.tree")) != hash_file(dir.file("t2.tree"))) {
            detail = "tree training is not bit-deterministic";
            return false;
        }
    }

    // criterion 4 rerun: identical draw streams
    {
        const auto index = uniform_members_index(64, 20);
        const auto target = random_target(64, 1011);
        Sampler s1(index, target, 11, false);
        Sampler s2(index, target, 11, false);
        const auto ids1 = s1.sample_batch(1000000);
        const auto ids2 = s2.sample_batch(1000000);
        if (hash_bytes(ids1.data(), ids1.size() * 8) != hash_bytes(ids2.data(), ids2.size() * 8)) {
            detail = "sampler stream is not bit-deterministic";
            return false;
        }
    }

    // criterion 8 rerun: identical artifact hashes in a fresh directory
    if (!g_first_pipeline.ok) {
        detail = "end-to-end pipeline did not run";
        return false;
    }
    statutil::ScratchDir dir2("crisp-acceptance-e2e-rerun");
    write_two_domain_corpus(dir2.file("gen.jsonl"), 20000, 0.1, 71, nullptr);
    write_two_domain_corpus(dir2.file("spec.jsonl"), 200, 1.0, 72, nullptr);
    const auto rerun = run_pipeline(dir2.path, g_minority_flags);
    if (!rerun.ok) {
        detail = rerun.fail_reason;
        return false;
    }
    if (rerun.artifact_hashes != g_first_pipeline.artifact_hashes) {
        detail = "pipeline artifact hashes differ between identical runs";
        return false;
    }
    detail = "tree, sampler stream, and all 12 pipeline artifacts bit-identical";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        g_cli = argv[1];
    } else {
        std::cerr << "usage: acceptance <path-to-crisp-cli>\n";
        return 2;
    }

    std::vector<Check> checks = {
        {"1 tree structure constants 64/4096/262144/16777216", criterion_tree_constants},
        {"2 balancing invariant on adversarial batches", criterion_balancing},
        {"3 importance-weight identity h_g*w = h_s", criterion_weight_identity},
        {"4 sampler marginal within TV 0.01 of target", criterion_sampler_marginal},
        {"5 within-cluster uniformity (chi-square)", criterion_within_cluster_uniformity},
        {"6 randomized SVD matches the exact oracle", criterion_lsi_oracle},
        {"7 classifier threshold acceptance and nesting", criterion_classifier_threshold},
        {"8 end-to-end two-domain separation", criterion_end_to_end},
        {"9 multitask mixing and schedule switch", criterion_multitask_and_schedule},
        {"10 determinism of criteria 2, 4 and 8", criterion_determinism},
    };

    int failures = 0;
    for (auto& check : checks) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = check.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  criterion %-55s [%6.2fs]  %s\n", ok ? "PASS" : "FAIL",
                    check.name.c_str(), secs, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, checks.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", checks.size());
    return 0;
}
