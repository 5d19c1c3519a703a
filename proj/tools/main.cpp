// crisp: resample a generalist corpus to match a specialist one.
//
// Pipeline stages are separate subcommands; every stage validates its input
// artifacts, writes its outputs, and appends an entry to the work
// directory's manifest so runs stay reproducible and resumable.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "crisp/classifier.hpp"
#include "crisp/cluster.hpp"
#include "crisp/corpus.hpp"
#include "crisp/diagnostics.hpp"
#include "crisp/embed.hpp"
#include "crisp/error.hpp"
#include "crisp/manifest.hpp"
#include "crisp/rng.hpp"
#include "crisp/sampler.hpp"
#include "crisp/weights.hpp"

namespace {

using namespace crisp;

// One pipeline stage: exclusive lock on the work directory, input hash
// verification against the manifest, and one appended entry on success.
class Stage {
public:
    Stage(std::string command, std::string workdir)
        : command_(std::move(command)),
          workdir_(ensure_dir(std::move(workdir))),
          lock_(workdir_),
          manifest_(workdir_),
          start_(std::chrono::steady_clock::now()) {}

    template <typename T>
    void config(const std::string& key, const T& value) {
        std::ostringstream os;
        os << value;
        config_.emplace_back(key, os.str());
    }

    std::string input(const std::string& path) {
        manifest_.verify_input(path);
        inputs_.push_back(path);
        return path;
    }

    std::string output(const std::string& path) {
        outputs_.push_back(path);
        return path;
    }

    void finish() {
        RunManifest::Entry e;
        e.command = command_;
        e.config = config_;
        std::string canonical;
        for (const auto& [k, v] : config_) canonical += k + "=" + v + "\n";
        e.config_hash = hash_bytes(canonical.data(), canonical.size());
        for (const auto& p : inputs_) e.inputs.emplace_back(p, hash_file(p));
        for (const auto& p : outputs_) e.outputs.emplace_back(p, hash_file(p));
        e.wall_ms = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start_)
                .count());
        manifest_.append(std::move(e));
    }

private:
    static std::string ensure_dir(std::string dir) {
        std::filesystem::create_directories(dir);
        return dir;
    }

    std::string command_;
    std::string workdir_;
    DirLock lock_;
    RunManifest manifest_;
    std::vector<std::pair<std::string, std::string>> config_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
};

std::string env_name(std::string flag) {
    for (auto& c : flag) c = (c == '-') ? '_' : static_cast<char>(std::toupper(c));
    return "CRISP_" + flag;
}

CLI::Option* opt_env(CLI::Option* opt, const std::string& name) {
    return opt->envname(env_name(name));
}

// --transform in=out style pair flags.
std::pair<std::string, std::string> split_pair(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        throw UsageError("expected IN=OUT, got '" + spec + "'");
    }
    return {spec.substr(0, eq), spec.substr(eq + 1)};
}

void write_selected_ids(const std::vector<std::uint64_t>& ids, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "SEL1\n";
    for (auto id : ids) out << id << "\n";
    if (!out) throw DataError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
    std::string workdir = ".";
    std::string input;
    std::string output;
    std::string tag = "generalist";
    std::string task;
    std::uint32_t window_size = 1024;
    std::uint32_t min_window_tokens = 32;
    std::uint32_t vocab_size = 32768;
};

int cmd_ingest(const IngestArgs& args) {
    Stage stage("ingest", args.workdir);
    stage.config("input", args.input);
    stage.config("output", args.output);
    stage.config("tag", args.tag);
    stage.config("task", args.task);
    stage.config("window_size", args.window_size);
    stage.config("min_window_tokens", args.min_window_tokens);
    stage.config("vocab_size", args.vocab_size);

    SourceTag tag = args.tag == "specialist" ? SourceTag::specialist(args.task)
                                             : SourceTag::generalist();
    stage.input(args.input);

    HashTokenizer tokenizer(args.vocab_size);
    const WindowOptions wopts{args.window_size, args.min_window_tokens};
    const std::string tmp = args.output + ".tmp";
    std::uint64_t window_count = 0;
    IngestStats stats;
    {
        WindowWriter writer(tmp);
        stats = ingest(args.input, tag, [&](SourceDocument&& doc) {
            for (const auto& w : window(doc, tokenizer, wopts)) writer.append(w);
        });
        window_count = writer.written();
        writer.close();
    }
    std::filesystem::rename(tmp, args.output);
    stage.output(args.output);

    for (const auto& msg : stats.ledger) std::cerr << "ingest: " << msg << "\n";
    std::cout << "ingest: " << stats.documents << " documents, " << window_count
              << " windows, " << stats.malformed << " malformed lines\n";
    stage.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// embed-lsi / embed-import

struct EmbedLsiArgs {
    std::string workdir = ".";
    std::string fit_windows;
    std::string save_model;
    std::string load_model;
    std::vector<std::string> transforms;
    std::uint32_t dim = 256;
    std::uint32_t vocab_size = 32768;
    std::size_t sample_rows = 131072;
    std::uint64_t seed = 0;
};

int cmd_embed_lsi(const EmbedLsiArgs& args) {
    if (args.fit_windows.empty() == args.load_model.empty()) {
        throw UsageError("embed-lsi needs exactly one of --fit-windows or --load-model");
    }
    Stage stage("embed-lsi", args.workdir);
    stage.config("fit_windows", args.fit_windows);
    stage.config("load_model", args.load_model);
    stage.config("save_model", args.save_model);
    stage.config("dim", args.dim);
    stage.config("vocab_size", args.vocab_size);
    stage.config("sample_rows", args.sample_rows);
    stage.config("seed", args.seed);
    for (std::size_t i = 0; i < args.transforms.size(); ++i) {
        stage.config("transform" + std::to_string(i), args.transforms[i]);
    }

    TfIdfModel tfidf;
    LsiProjection proj;
    if (!args.fit_windows.empty()) {
        stage.input(args.fit_windows);
        auto fit_ws = read_windows(args.fit_windows);
        tfidf = tfidf_fit(fit_ws, args.vocab_size);
        std::vector<TfIdfVector> rows;
        rows.reserve(fit_ws.size());
        for (const auto& w : fit_ws) rows.push_back(tfidf_transform(w, tfidf));
        LsiFitOptions fopts;
        fopts.dim = args.dim;
        fopts.max_rows = args.sample_rows;
        fopts.seed = args.seed;
        proj = lsi_fit(rows, args.vocab_size, fopts);
        if (!args.save_model.empty()) {
            write_tfidf(tfidf, args.save_model + ".tfidf");
            write_lsi(proj, args.save_model + ".lsi");
            stage.output(args.save_model + ".tfidf");
            stage.output(args.save_model + ".lsi");
        }
    } else {
        tfidf = read_tfidf(stage.input(args.load_model + ".tfidf"));
        proj = read_lsi(stage.input(args.load_model + ".lsi"));
    }

    for (const auto& spec : args.transforms) {
        const auto [in, out] = split_pair(spec);
        stage.input(in);
        auto ws = read_windows(in);
        EmbeddingSet set(proj.dim);
        std::uint64_t degenerate = 0;
        for (const auto& w : ws) {
            auto emb = lsi_transform(tfidf_transform(w, tfidf), proj);
            degenerate += emb.degenerate ? 1 : 0;
            set.add(w.window_id, emb.values.data());
        }
        set.normalize();
        write_embeddings(set, out);
        stage.output(out);
        std::cout << "embed-lsi: " << set.size() << " vectors (dim " << proj.dim << ", "
                  << degenerate << " degenerate) -> " << out << "\n";
    }
    stage.finish();
    return 0;
}

struct EmbedImportArgs {
    std::string workdir = ".";
    std::string input;
    std::string output;
};

int cmd_embed_import(const EmbedImportArgs& args) {
    Stage stage("embed-import", args.workdir);
    stage.config("input", args.input);
    stage.config("output", args.output);
    stage.input(args.input);
    auto set = import_embeddings(args.input);
    write_embeddings(set, args.output);
    stage.output(args.output);
    std::cout << "embed-import: " << set.size() << " vectors, dim " << set.dim() << "\n";
    stage.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// cluster-train / assign

struct ClusterTrainArgs {
    std::string workdir = ".";
    std::string embeddings;
    std::string output;
    std::string trace;
    TreeConfig cfg;
};

int cmd_cluster_train(const ClusterTrainArgs& args) {
    Stage stage("cluster-train", args.workdir);
    stage.config("embeddings", args.embeddings);
    stage.config("output", args.output);
    stage.config("trace", args.trace);
    stage.config("arity", args.cfg.arity);
    stage.config("depth", args.cfg.depth);
    stage.config("steps", args.cfg.steps);
    stage.config("samples_per_step", args.cfg.samples_per_step);
    stage.config("balancing_limit", args.cfg.balancing_limit);
    stage.config("seed", args.cfg.seed);

    stage.input(args.embeddings);
    auto set = import_embeddings(args.embeddings);
    auto result = train_tree(set, args.cfg);
    write_tree(result.tree, args.output);
    stage.output(args.output);

    for (const auto& w : result.stats.warnings) std::cerr << "cluster-train: " << w << "\n";
    if (!args.trace.empty()) {
        std::ofstream out(args.trace, std::ios::trunc);
        out << "level node step batch_size max_cluster_count\n";
        for (const auto& s : result.stats.steps) {
            out << s.level << " " << s.node << " " << s.step << " " << s.batch_size << " "
                << s.max_cluster_count << "\n";
        }
        if (!out) throw DataError("write failed: " + args.trace);
        stage.output(args.trace);
    }
    std::cout << "cluster-train: arity " << args.cfg.arity << ", depth " << args.cfg.depth
              << ", leaves " << result.tree.level_size(args.cfg.depth) << "\n";
    stage.finish();
    return 0;
}

struct AssignArgs {
    std::string workdir = ".";
    std::string tree;
    std::string embeddings;
    std::string output;
    std::uint32_t level = 3;
};

int cmd_assign(const AssignArgs& args) {
    Stage stage("assign", args.workdir);
    stage.config("tree", args.tree);
    stage.config("embeddings", args.embeddings);
    stage.config("output", args.output);
    stage.config("level", args.level);

    auto tree = read_tree(stage.input(args.tree));
    auto set = import_embeddings(stage.input(args.embeddings));
    auto table = assign_all(tree, set, args.level);
    write_assignments(table, args.output);
    stage.output(args.output);
    std::cout << "assign: " << table.entries.size() << " windows over "
              << table.counts.size() << " occupied clusters at level " << args.level << "\n";
    stage.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// histogram / weights / mix

struct HistogramArgs {
    std::string workdir = ".";
    std::string assignments;
    std::string output;
};

int cmd_histogram(const HistogramArgs& args) {
    Stage stage("histogram", args.workdir);
    stage.config("assignments", args.assignments);
    stage.config("output", args.output);
    auto table = read_assignments(stage.input(args.assignments));
    auto h = histogram(table);
    write_histogram(h, args.output);
    stage.output(args.output);
    std::cout << "histogram: level " << h.level << ", " << h.probs.size()
              << " occupied clusters, total " << h.total << "\n";
    stage.finish();
    return 0;
}

struct WeightsArgs {
    std::string workdir = ".";
    std::string specialist;
    std::string generalist;
    std::string output;
    bool epsilon_smoothing = false;
};

int cmd_weights(const WeightsArgs& args) {
    Stage stage("weights", args.workdir);
    stage.config("specialist", args.specialist);
    stage.config("generalist", args.generalist);
    stage.config("output", args.output);
    stage.config("epsilon_smoothing", args.epsilon_smoothing);

    auto h_s = read_histogram(stage.input(args.specialist));
    auto h_g = read_histogram(stage.input(args.generalist));
    WeightOptions opts;
    opts.epsilon_smoothing = args.epsilon_smoothing;
    auto w = importance_weights(h_s, h_g, opts);
    write_weights(w, args.output);
    stage.output(args.output);
    if (w.dropped_specialist_mass > 1e-3) {
        std::cerr << "weights: warning: dropped specialist mass "
                  << w.dropped_specialist_mass
                  << " (specialist clusters without generalist support)\n";
    }
    std::cout << "weights: " << w.weights.size() << " clusters, dropped mass "
              << w.dropped_specialist_mass << "\n";
    stage.finish();
    return 0;
}

struct MixArgs {
    std::string workdir = ".";
    std::vector<std::string> inputs;
    std::vector<double> mix_weights;
    bool equal = false;
    std::string output;
};

int cmd_mix(const MixArgs& args) {
    Stage stage("mix", args.workdir);
    for (std::size_t i = 0; i < args.inputs.size(); ++i) {
        stage.config("input" + std::to_string(i), args.inputs[i]);
    }
    stage.config("equal", args.equal);
    stage.config("output", args.output);

    std::vector<double> mix_weights = args.mix_weights;
    if (args.equal) {
        if (!mix_weights.empty()) throw UsageError("--equal excludes explicit --weight");
        mix_weights.assign(args.inputs.size(), 1.0 / double(args.inputs.size()));
    }
    for (std::size_t i = 0; i < mix_weights.size(); ++i) {
        stage.config("weight" + std::to_string(i), mix_weights[i]);
    }
    std::vector<Histogram> hists;
    for (const auto& p : args.inputs) hists.push_back(read_histogram(stage.input(p)));
    auto mixed = mix_histograms(hists, mix_weights);
    write_histogram(mixed, args.output);
    stage.output(args.output);
    std::cout << "mix: " << hists.size() << " histograms -> " << mixed.probs.size()
              << " clusters\n";
    stage.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// sample / schedule

struct SampleArgs {
    std::string workdir = ".";
    std::string target;
    std::string index_assignments;
    std::vector<std::string> windows;
    std::string output;
    std::string manifest;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
};

int cmd_sample(const SampleArgs& args) {
    Stage stage("sample", args.workdir);
    stage.config("target", args.target);
    stage.config("index_assignments", args.index_assignments);
    stage.config("count", args.count);
    stage.config("seed", args.seed);
    stage.config("output", args.output);
    stage.config("manifest", args.manifest);

    auto target = read_histogram(stage.input(args.target));
    auto table = read_assignments(stage.input(args.index_assignments));
    auto index = build_index(table);
    Sampler sampler(index, target, args.seed);
    if (sampler.dropped_target_mass() > 1e-3) {
        std::cerr << "sample: warning: target mass " << sampler.dropped_target_mass()
                  << " renormalized away (clusters without generalist members)\n";
    }

    WindowStore store;
    for (const auto& shard : args.windows) store.load_shard(stage.input(shard));
    export_stream(sampler, args.count, store, args.output, args.manifest);
    stage.output(args.output);
    stage.output(args.manifest);
    std::cout << "sample: " << args.count << " draws, "
              << sampler.occurrences().size() << " distinct windows\n";
    stage.finish();
    return 0;
}

struct ScheduleArgs {
    std::string workdir = ".";
    std::string base;
    std::string crisp;
    std::string index_assignments;
    std::vector<std::string> windows;
    std::string output;
    std::string manifest;
    std::uint64_t total_steps = 1024;
    double crisp_fraction = -1.0;
    std::int64_t crisp_steps = -1;
    std::uint64_t batch_size = 64;
    std::uint64_t seed = 0;
};

int cmd_schedule(const ScheduleArgs& args) {
    if ((args.crisp_fraction < 0.0) == (args.crisp_steps < 0)) {
        throw UsageError("schedule needs exactly one of --crisp-fraction or --crisp-steps");
    }
    Stage stage("schedule", args.workdir);
    stage.config("base", args.base);
    stage.config("crisp", args.crisp);
    stage.config("index_assignments", args.index_assignments);
    stage.config("total_steps", args.total_steps);
    stage.config("crisp_fraction", args.crisp_fraction);
    stage.config("crisp_steps", args.crisp_steps);
    stage.config("batch_size", args.batch_size);
    stage.config("seed", args.seed);
    stage.config("output", args.output);
    stage.config("manifest", args.manifest);

    auto base = read_histogram(stage.input(args.base));
    auto crisp = read_histogram(stage.input(args.crisp));
    auto table = read_assignments(stage.input(args.index_assignments));
    auto index = build_index(table);

    const Schedule schedule =
        args.crisp_fraction >= 0.0
            ? Schedule::from_fraction(args.total_steps, args.crisp_fraction, base, crisp)
            : Schedule::from_steps(args.total_steps,
                                   static_cast<std::uint64_t>(args.crisp_steps), base, crisp);
    ScheduledSampler sampler(index, schedule, args.seed);

    WindowStore store;
    for (const auto& shard : args.windows) store.load_shard(stage.input(shard));

    WindowWriter writer(args.output);
    std::map<std::uint64_t, std::uint64_t> occ;
    for (std::uint64_t step = 0; step < schedule.total_steps; ++step) {
        for (std::uint64_t id : sampler.sample_step(step, args.batch_size)) {
            const DocumentWindow* w = store.find(id);
            if (w == nullptr) {
                throw DataError("sampled window id " + std::to_string(id) +
                                " is not present in the window shards");
            }
            writer.append(*w);
            ++occ[id];
        }
    }
    writer.close();
    write_sample_manifest({occ.begin(), occ.end()}, args.manifest);
    stage.output(args.output);
    stage.output(args.manifest);
    std::cout << "schedule: " << schedule.generic_steps() << " generic + "
              << schedule.crisp_steps << " crisp steps, batch " << args.batch_size << "\n";
    stage.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// classify / filter

struct ClassifyArgs {
    std::string workdir = ".";
    std::string positive;
    std::string negative;
    std::string output;
    std::vector<std::string> score_pairs;
    double l2 = 0.0;
    std::uint64_t max_iterations = 10000;
    std::uint64_t negatives_factor = 100;
    std::uint64_t negatives_cap = 1000000;
    std::uint64_t seed = 0;
};

int cmd_classify(const ClassifyArgs& args) {
    Stage stage("classify", args.workdir);
    stage.config("positive", args.positive);
    stage.config("negative", args.negative);
    stage.config("output", args.output);
    stage.config("l2", args.l2);
    stage.config("max_iterations", args.max_iterations);
    stage.config("negatives_factor", args.negatives_factor);
    stage.config("negatives_cap", args.negatives_cap);
    stage.config("seed", args.seed);
    for (std::size_t i = 0; i < args.score_pairs.size(); ++i) {
        stage.config("score" + std::to_string(i), args.score_pairs[i]);
    }

    auto pos = import_embeddings(stage.input(args.positive));
    auto neg = import_embeddings(stage.input(args.negative));

    // Uniform negative subsample: factor x positives, capped.
    const std::uint64_t limit =
        std::min<std::uint64_t>(args.negatives_factor * pos.size(), args.negatives_cap);
    if (neg.size() > limit) {
        Rng rng(derive_seed(args.seed, {0x4e45ull}));
        std::vector<std::size_t> chosen;
        std::vector<bool> used(neg.size(), false);
        for (std::size_t i = neg.size() - limit; i < neg.size(); ++i) {
            std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
            if (used[j]) j = i;
            used[j] = true;
            chosen.push_back(j);
        }
        std::sort(chosen.begin(), chosen.end());
        EmbeddingSet sub(neg.dim());
        for (std::size_t i : chosen) sub.add(neg.ids()[i], neg.vec(i));
        sub.normalize();
        neg = std::move(sub);
        std::cout << "classify: negatives subsampled to " << neg.size() << "\n";
    }

    LogRegOptions opts;
    opts.l2_strength = args.l2;
    opts.max_iterations = args.max_iterations;
    opts.seed = args.seed;
    auto model = train_logreg(pos, neg, opts);
    write_logreg(model, args.output);
    stage.output(args.output);
    std::cout << "classify: " << model.train_meta.iterations << " iterations, loss "
              << model.train_meta.final_loss << "\n";

    for (const auto& spec : args.score_pairs) {
        const auto [in, out] = split_pair(spec);
        auto set = import_embeddings(stage.input(in));
        write_scores(score_all(model, set), out);
        stage.output(out);
    }
    stage.finish();
    return 0;
}

struct FilterArgs {
    std::string workdir = ".";
    std::string scores;
    std::string output;
    double quantile = 0.975;
    bool report_grid = false;
};

// Default threshold-quantile sweep reported by --report-grid.
constexpr double kQuantileGrid[] = {0.5,   0.6,  0.7,    0.75, 0.8,   0.9,   0.95,
                                    0.975, 0.98, 0.9875, 0.99, 0.995, 0.9975};

int cmd_filter(const FilterArgs& args) {
    Stage stage("filter", args.workdir);
    stage.config("scores", args.scores);
    stage.config("output", args.output);
    stage.config("quantile", args.quantile);
    stage.config("report_grid", args.report_grid);

    auto scores = read_scores(stage.input(args.scores));
    std::vector<double> values(scores.scores.begin(), scores.scores.end());
    auto threshold = threshold_from_quantile(values, args.quantile);
    auto selected = filter(scores, threshold);
    write_selected_ids(selected, args.output);
    stage.output(args.output);
    std::cout << "filter: quantile " << args.quantile << ", cut " << threshold.score_cut
              << ", accepted " << selected.size() << " of " << scores.ids.size() << " ("
              << threshold.accepted_fraction << ")\n";
    if (args.report_grid) {
        for (double q : kQuantileGrid) {
            const auto t = threshold_from_quantile(values, q);
            std::cout << "filter: grid q=" << q << " cut=" << t.score_cut
                      << " accepted_fraction=" << t.accepted_fraction << "\n";
        }
    }
    stage.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// stats / report

struct StatsArgs {
    std::string workdir = ".";
    std::string manifest;
    std::string output;
    std::vector<double> quantiles = {0.5, 0.9, 0.99};
};

int cmd_stats(const StatsArgs& args) {
    Stage stage("stats", args.workdir);
    stage.config("manifest", args.manifest);
    stage.config("output", args.output);
    for (std::size_t i = 0; i < args.quantiles.size(); ++i) {
        stage.config("quantile" + std::to_string(i), args.quantiles[i]);
    }

    auto occ = read_sample_manifest(stage.input(args.manifest));
    std::vector<std::uint64_t> counts;
    counts.reserve(occ.size());
    for (const auto& [id, n] : occ) counts.push_back(n);
    auto stats = repetition_stats(counts, args.quantiles);

    std::ostringstream report;
    report << "draws " << stats.draws << "\n";
    report << "distinct " << stats.distinct << "\n";
    report << "mean " << stats.mean << "\n";
    report << "max " << stats.max << "\n";
    for (const auto& [q, v] : stats.quantile_values) report << "q" << q << " " << v << "\n";
    std::cout << report.str();
    if (!args.output.empty()) {
        std::ofstream out(args.output, std::ios::trunc);
        out << report.str();
        if (!out) throw DataError("write failed: " + args.output);
        stage.output(args.output);
    }
    stage.finish();
    return 0;
}

struct ReportArgs {
    std::string workdir = ".";
    // distance mode
    std::string embeddings;
    std::string specialist;
    std::size_t bins = 20;
    // cluster mode
    std::string generalist_assignments;
    std::string specialist_hist;
    std::string generalist_hist;
    std::string weights_file;
    std::string output;
};

int cmd_report(const ReportArgs& args) {
    const bool distance_mode = !args.embeddings.empty();
    const bool cluster_mode = !args.generalist_assignments.empty();
    if (distance_mode == cluster_mode) {
        throw UsageError("report needs either --embeddings/--specialist or the "
                         "--generalist-assignments group");
    }
    if (distance_mode && args.specialist.empty()) {
        throw UsageError("report --embeddings also needs --specialist");
    }
    if (cluster_mode && (args.specialist_hist.empty() || args.generalist_hist.empty() ||
                         args.weights_file.empty())) {
        throw UsageError("report --generalist-assignments also needs --specialist-hist, "
                         "--generalist-hist and --weights");
    }
    Stage stage("report", args.workdir);
    stage.config("output", args.output);

    if (distance_mode) {
        stage.config("embeddings", args.embeddings);
        stage.config("specialist", args.specialist);
        stage.config("bins", args.bins);
        auto windows = import_embeddings(stage.input(args.embeddings));
        auto spec = import_embeddings(stage.input(args.specialist));
        auto report = distance_report(windows, spec, args.bins);
        write_distance_report(report, args.output);
        stage.output(args.output);
        std::cout << "report: distances for " << windows.size() << " windows against "
                  << spec.size() << " specialist vectors\n";
    } else {
        stage.config("generalist_assignments", args.generalist_assignments);
        stage.config("specialist_hist", args.specialist_hist);
        stage.config("generalist_hist", args.generalist_hist);
        stage.config("weights", args.weights_file);
        auto table = read_assignments(stage.input(args.generalist_assignments));
        auto h_s = read_histogram(stage.input(args.specialist_hist));
        auto h_g = read_histogram(stage.input(args.generalist_hist));
        auto w = read_weights(stage.input(args.weights_file));
        auto rows = cluster_summary(table, h_s, h_g, w);
        write_cluster_summary(rows, args.output);
        stage.output(args.output);
        std::cout << "report: " << rows.size() << " cluster rows\n";
    }
    stage.finish();
    return 0;
}

void add_workdir(CLI::App* cmd, std::string& workdir) {
    opt_env(cmd->add_option("--workdir", workdir, "artifact directory (manifest + lock)"),
            "workdir");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clustered importance sampling data-selection toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key-value configuration file");

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand(
        "ingest", "tokenize a JSONL corpus into fixed-size token windows");
    add_workdir(ingest_cmd, ingest_args.workdir);
    opt_env(ingest_cmd->add_option("--input", ingest_args.input)->required(), "input");
    opt_env(ingest_cmd->add_option("--output", ingest_args.output)->required(), "output");
    ingest_cmd->add_option("--tag", ingest_args.tag)
        ->check(CLI::IsMember({"generalist", "specialist"}));
    ingest_cmd->add_option("--task", ingest_args.task);
    opt_env(ingest_cmd->add_option("--window-size", ingest_args.window_size), "window-size");
    ingest_cmd->add_option("--min-window-tokens", ingest_args.min_window_tokens);
    opt_env(ingest_cmd->add_option("--vocab-size", ingest_args.vocab_size), "vocab-size");

    EmbedLsiArgs lsi_args;
    auto* lsi_cmd = app.add_subcommand(
        "embed-lsi", "fit tf-idf + truncated SVD and embed window files");
    add_workdir(lsi_cmd, lsi_args.workdir);
    lsi_cmd->add_option("--fit-windows", lsi_args.fit_windows);
    lsi_cmd->add_option("--save-model", lsi_args.save_model);
    lsi_cmd->add_option("--load-model", lsi_args.load_model);
    lsi_cmd->add_option("--transform", lsi_args.transforms, "IN.wnd=OUT.emb (repeatable)");
    opt_env(lsi_cmd->add_option("--dim", lsi_args.dim), "lsi-dim");
    opt_env(lsi_cmd->add_option("--vocab-size", lsi_args.vocab_size), "vocab-size");
    lsi_cmd->add_option("--sample-rows", lsi_args.sample_rows);
    opt_env(lsi_cmd->add_option("--seed", lsi_args.seed), "seed");

    EmbedImportArgs import_args;
    auto* import_cmd = app.add_subcommand(
        "embed-import", "validate and re-normalize an external embedding file");
    add_workdir(import_cmd, import_args.workdir);
    import_cmd->add_option("--input", import_args.input)->required();
    import_cmd->add_option("--output", import_args.output)->required();

    ClusterTrainArgs tree_args;
    auto* tree_cmd = app.add_subcommand(
        "cluster-train", "train the hierarchical balanced k-means tree");
    add_workdir(tree_cmd, tree_args.workdir);
    tree_cmd->add_option("--embeddings", tree_args.embeddings)->required();
    tree_cmd->add_option("--output", tree_args.output)->required();
    tree_cmd->add_option("--trace", tree_args.trace);
    opt_env(tree_cmd->add_option("--arity", tree_args.cfg.arity), "arity");
    opt_env(tree_cmd->add_option("--depth", tree_args.cfg.depth), "depth");
    opt_env(tree_cmd->add_option("--steps", tree_args.cfg.steps), "steps");
    opt_env(tree_cmd->add_option("--samples-per-step", tree_args.cfg.samples_per_step),
            "samples-per-step");
    opt_env(tree_cmd->add_option("--limit", tree_args.cfg.balancing_limit), "limit");
    opt_env(tree_cmd->add_option("--seed", tree_args.cfg.seed), "seed");

    AssignArgs assign_args;
    auto* assign_cmd = app.add_subcommand(
        "assign", "assign embedded windows to tree clusters at a level");
    add_workdir(assign_cmd, assign_args.workdir);
    assign_cmd->add_option("--tree", assign_args.tree)->required();
    assign_cmd->add_option("--embeddings", assign_args.embeddings)->required();
    assign_cmd->add_option("--output", assign_args.output)->required();
    opt_env(assign_cmd->add_option("--level", assign_args.level), "level");

    HistogramArgs hist_args;
    auto* hist_cmd = app.add_subcommand(
        "histogram", "estimate the cluster histogram of an assignment table");
    add_workdir(hist_cmd, hist_args.workdir);
    hist_cmd->add_option("--assignments", hist_args.assignments)->required();
    hist_cmd->add_option("--output", hist_args.output)->required();

    WeightsArgs weights_args;
    auto* weights_cmd = app.add_subcommand(
        "weights", "importance weights specialist/generalist per cluster");
    add_workdir(weights_cmd, weights_args.workdir);
    weights_cmd->add_option("--specialist", weights_args.specialist)->required();
    weights_cmd->add_option("--generalist", weights_args.generalist)->required();
    weights_cmd->add_option("--output", weights_args.output)->required();
    weights_cmd->add_flag("--epsilon-smoothing", weights_args.epsilon_smoothing);

    MixArgs mix_args;
    auto* mix_cmd = app.add_subcommand("mix", "convex combination of histograms");
    add_workdir(mix_cmd, mix_args.workdir);
    mix_cmd->add_option("--input", mix_args.inputs, "histogram file (repeatable)")->required();
    mix_cmd->add_option("--weight", mix_args.mix_weights, "mixture weight per input");
    mix_cmd->add_flag("--equal", mix_args.equal, "uniform mixture weights");
    mix_cmd->add_option("--output", mix_args.output)->required();

    SampleArgs sample_args;
    auto* sample_cmd = app.add_subcommand(
        "sample", "emit the resampled stream for a target histogram");
    add_workdir(sample_cmd, sample_args.workdir);
    sample_cmd->add_option("--target", sample_args.target)->required();
    sample_cmd->add_option("--index-assignments", sample_args.index_assignments)->required();
    sample_cmd->add_option("--windows", sample_args.windows, "window shard (repeatable)")
        ->required();
    sample_cmd->add_option("--output", sample_args.output)->required();
    sample_cmd->add_option("--manifest", sample_args.manifest)->required();
    opt_env(sample_cmd->add_option("--count", sample_args.count)->required(), "count");
    opt_env(sample_cmd->add_option("--seed", sample_args.seed), "seed");

    ScheduleArgs schedule_args;
    auto* schedule_cmd = app.add_subcommand(
        "schedule", "two-phase continued-pretraining stream (generic then crisp)");
    add_workdir(schedule_cmd, schedule_args.workdir);
    schedule_cmd->add_option("--base", schedule_args.base)->required();
    schedule_cmd->add_option("--crisp", schedule_args.crisp)->required();
    schedule_cmd->add_option("--index-assignments", schedule_args.index_assignments)
        ->required();
    schedule_cmd->add_option("--windows", schedule_args.windows)->required();
    schedule_cmd->add_option("--output", schedule_args.output)->required();
    schedule_cmd->add_option("--manifest", schedule_args.manifest)->required();
    schedule_cmd->add_option("--total-steps", schedule_args.total_steps);
    schedule_cmd->add_option("--crisp-fraction", schedule_args.crisp_fraction);
    schedule_cmd->add_option("--crisp-steps", schedule_args.crisp_steps);
    schedule_cmd->add_option("--batch-size", schedule_args.batch_size);
    opt_env(schedule_cmd->add_option("--seed", schedule_args.seed), "seed");

    ClassifyArgs classify_args;
    auto* classify_cmd = app.add_subcommand(
        "classify", "train the logistic-regression selection baseline");
    add_workdir(classify_cmd, classify_args.workdir);
    classify_cmd->add_option("--positive", classify_args.positive)->required();
    classify_cmd->add_option("--negative", classify_args.negative)->required();
    classify_cmd->add_option("--output", classify_args.output)->required();
    classify_cmd->add_option("--score", classify_args.score_pairs,
                             "IN.emb=OUT.scores (repeatable)");
    opt_env(classify_cmd->add_option("--l2", classify_args.l2), "l2");
    classify_cmd->add_option("--max-iterations", classify_args.max_iterations);
    classify_cmd->add_option("--negatives-factor", classify_args.negatives_factor);
    classify_cmd->add_option("--negatives-cap", classify_args.negatives_cap);
    opt_env(classify_cmd->add_option("--seed", classify_args.seed), "seed");

    FilterArgs filter_args;
    auto* filter_cmd = app.add_subcommand(
        "filter", "select windows whose score exceeds a quantile threshold");
    add_workdir(filter_cmd, filter_args.workdir);
    filter_cmd->add_option("--scores", filter_args.scores)->required();
    filter_cmd->add_option("--output", filter_args.output)->required();
    opt_env(filter_cmd->add_option("--quantile", filter_args.quantile), "quantile");
    filter_cmd->add_flag("--report-grid", filter_args.report_grid,
                         "print acceptance rates over the default quantile grid");

    StatsArgs stats_args;
    auto* stats_cmd = app.add_subcommand(
        "stats", "repetition statistics of a sample manifest");
    add_workdir(stats_cmd, stats_args.workdir);
    stats_cmd->add_option("--manifest", stats_args.manifest)->required();
    stats_cmd->add_option("--output", stats_args.output);
    stats_cmd->add_option("--quantiles", stats_args.quantiles)->delimiter(',');

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand(
        "report", "distance-to-specialist or per-cluster weight reports");
    add_workdir(report_cmd, report_args.workdir);
    report_cmd->add_option("--embeddings", report_args.embeddings);
    report_cmd->add_option("--specialist", report_args.specialist);
    report_cmd->add_option("--bins", report_args.bins);
    report_cmd->add_option("--generalist-assignments", report_args.generalist_assignments);
    report_cmd->add_option("--specialist-hist", report_args.specialist_hist);
    report_cmd->add_option("--generalist-hist", report_args.generalist_hist);
    report_cmd->add_option("--weights", report_args.weights_file);
    report_cmd->add_option("--output", report_args.output)->required();

    try {
        app.parse(argc, argv);
        if (ingest_cmd->parsed()) return cmd_ingest(ingest_args);
        if (lsi_cmd->parsed()) return cmd_embed_lsi(lsi_args);
        if (import_cmd->parsed()) return cmd_embed_import(import_args);
        if (tree_cmd->parsed()) return cmd_cluster_train(tree_args);
        if (assign_cmd->parsed()) return cmd_assign(assign_args);
        if (hist_cmd->parsed()) return cmd_histogram(hist_args);
        if (weights_cmd->parsed()) return cmd_weights(weights_args);
        if (mix_cmd->parsed()) return cmd_mix(mix_args);
        if (sample_cmd->parsed()) return cmd_sample(sample_args);
        if (schedule_cmd->parsed()) return cmd_schedule(schedule_args);
        if (classify_cmd->parsed()) return cmd_classify(classify_args);
        if (filter_cmd->parsed()) return cmd_filter(filter_args);
        if (stats_cmd->parsed()) return cmd_stats(stats_args);
        if (report_cmd->parsed()) return cmd_report(report_args);
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "crisp: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "crisp: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "crisp: internal error: " << e.what() << "\n";
        return 3;
    }
}
