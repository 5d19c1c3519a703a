#include "crisp/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "crisp/binio.hpp"
#include "crisp/error.hpp"

namespace crisp {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

struct Problem {
    const EmbeddingSet* pos;
    const EmbeddingSet* neg;
    std::uint32_t dim;
    double alpha_pos;  // per-example weight, class-balanced
    double alpha_neg;
    double l2;

    // Objective and gradient at (w, b).
    double eval(const std::vector<double>& w, double b, std::vector<double>* grad_w,
                double* grad_b) const {
        double loss = 0.0;
        if (grad_w) {
            std::fill(grad_w->begin(), grad_w->end(), 0.0);
            *grad_b = 0.0;
        }
        for (int cls = 0; cls < 2; ++cls) {
            const EmbeddingSet& set = cls == 0 ? *pos : *neg;
            const double alpha = cls == 0 ? alpha_pos : alpha_neg;
            const double target = cls == 0 ? 1.0 : 0.0;
            for (std::size_t i = 0; i < set.size(); ++i) {
                const float* x = set.vec(i);
                double z = b;
                for (std::uint32_t d = 0; d < dim; ++d) z += w[d] * double(x[d]);
                // logistic loss: softplus(-z) for the positive class, softplus(z) otherwise
                loss += alpha * softplus(target > 0.5 ? -z : z);
                if (grad_w) {
                    const double g = alpha * (sigmoid(z) - target);
                    for (std::uint32_t d = 0; d < dim; ++d) (*grad_w)[d] += g * double(x[d]);
                    *grad_b += g;
                }
            }
        }
        double reg = 0.0;
        for (std::uint32_t d = 0; d < dim; ++d) reg += w[d] * w[d];
        loss += 0.5 * l2 * reg;
        if (grad_w) {
            for (std::uint32_t d = 0; d < dim; ++d) (*grad_w)[d] += l2 * w[d];
        }
        return loss;
    }
};

void check_finite(const EmbeddingSet& set, const char* which) {
    for (std::size_t i = 0; i < set.size(); ++i) {
        const float* x = set.vec(i);
        for (std::uint32_t d = 0; d < set.dim(); ++d) {
            if (!std::isfinite(x[d])) {
                throw DataError(std::string("non-finite value in ") + which +
                                " embeddings at window " + std::to_string(set.ids()[i]));
            }
        }
    }
}

}  // namespace

LogRegModel train_logreg(const EmbeddingSet& positives, const EmbeddingSet& negatives,
                         const LogRegOptions& opts) {
    if (positives.size() == 0 || negatives.size() == 0) {
        throw DataError("logistic regression needs non-empty positive and negative sets");
    }
    if (positives.dim() != negatives.dim()) {
        throw DataError("positive/negative embedding dims differ: " +
                        std::to_string(positives.dim()) + " vs " +
                        std::to_string(negatives.dim()));
    }
    if (opts.l2_strength < 0.0) throw UsageError("l2 strength must be non-negative");
    check_finite(positives, "positive");
    check_finite(negatives, "negative");

    const std::uint32_t dim = positives.dim();
    Problem prob{&positives,
                 &negatives,
                 dim,
                 0.5 / static_cast<double>(positives.size()),
                 0.5 / static_cast<double>(negatives.size()),
                 opts.l2_strength};

    LogRegModel model;
    model.weights.assign(dim, 0.0);
    model.bias = 0.0;
    model.l2_strength = opts.l2_strength;
    model.train_meta.seed = opts.seed;

    std::vector<double> grad(dim), trial(dim);
    double grad_b = 0.0;
    double loss = prob.eval(model.weights, model.bias, &grad, &grad_b);
    model.train_meta.loss_trace.push_back(loss);

    constexpr double kArmijo = 1e-4;
    std::uint64_t iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        double grad_norm_sq = grad_b * grad_b;
        for (double g : grad) grad_norm_sq += g * g;
        model.train_meta.gradient_norm = std::sqrt(grad_norm_sq);
        if (model.train_meta.gradient_norm < opts.gradient_tolerance) break;

        // Backtracking line search along -grad.
        double step = 1.0;
        double new_loss = loss;
        double trial_b = model.bias;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::uint32_t d = 0; d < dim; ++d)
                trial[d] = model.weights[d] - step * grad[d];
            trial_b = model.bias - step * grad_b;
            new_loss = prob.eval(trial, trial_b, nullptr, nullptr);
            if (new_loss <= loss - kArmijo * step * grad_norm_sq) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // step size underflow: at numerical optimum

        model.weights.swap(trial);
        model.bias = trial_b;
        loss = new_loss;
        model.train_meta.loss_trace.push_back(loss);
        loss = prob.eval(model.weights, model.bias, &grad, &grad_b);
    }
    model.train_meta.iterations = iter;
    model.train_meta.final_loss = loss;
    return model;
}

double score(const LogRegModel& model, const float* embedding, std::uint32_t dim) {
    if (dim != model.dim()) {
        throw DataError("embedding dim " + std::to_string(dim) + " does not match model dim " +
                        std::to_string(model.dim()));
    }
    double z = model.bias;
    for (std::uint32_t d = 0; d < dim; ++d) z += model.weights[d] * double(embedding[d]);
    return sigmoid(z);
}

ScoreSet score_all(const LogRegModel& model, const EmbeddingSet& set) {
    ScoreSet out;
    out.ids = set.ids();
    out.scores.resize(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        out.scores[i] = static_cast<float>(score(model, set.vec(i), set.dim()));
    }
    return out;
}

SelectionThreshold threshold_from_quantile(std::vector<double> scores, double quantile) {
    if (scores.empty()) throw DataError("threshold estimation needs a non-empty score sample");
    if (quantile < 0.0 || quantile >= 1.0) throw UsageError("quantile must be in [0, 1)");

    std::sort(scores.begin(), scores.end());
    SelectionThreshold t;
    t.quantile = quantile;
    const std::size_t n = scores.size();
    const std::size_t k =
        static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n)));
    if (k == 0) {
        t.score_cut = -std::numeric_limits<double>::infinity();
        t.accepted_fraction = 1.0;
        return t;
    }
    t.score_cut = scores[k - 1];
    const auto above = scores.end() - std::upper_bound(scores.begin(), scores.end(), t.score_cut);
    t.accepted_fraction = static_cast<double>(above) / static_cast<double>(n);
    return t;
}

std::vector<std::uint64_t> filter(const ScoreSet& scores, const SelectionThreshold& threshold) {
    std::vector<std::uint64_t> selected;
    for (std::size_t i = 0; i < scores.ids.size(); ++i) {
        if (double(scores.scores[i]) > threshold.score_cut) selected.push_back(scores.ids[i]);
    }
    return selected;
}

void write_logreg(const LogRegModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "LOGR1\n";
    out << "dim " << model.dim() << "\n";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", model.l2_strength);
    out << "l2 " << buf << "\n";
    out << "iterations " << model.train_meta.iterations << "\n";
    out << "data\n";
    std::vector<float> vals(model.weights.begin(), model.weights.end());
    vals.push_back(static_cast<float>(model.bias));
    out.write(reinterpret_cast<const char*>(vals.data()),
              static_cast<std::streamsize>(vals.size() * 4));
    if (!out) throw DataError("write failed: " + path);
}

LogRegModel read_logreg(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "LOGR1") {
        throw DataError(path + ": bad magic, expected 'LOGR1' (not a classifier model)");
    }
    LogRegModel model;
    std::uint32_t dim = 0;
    while (std::getline(in, line)) {
        if (line == "data") break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dim") ls >> dim;
        else if (key == "l2") ls >> model.l2_strength;
        else if (key == "iterations") ls >> model.train_meta.iterations;
        else throw DataError(path + ": unknown header field '" + key + "'");
        if (!ls) throw DataError(path + ": bad header line '" + line + "'");
    }
    if (dim == 0) throw DataError(path + ": missing dim header");
    std::vector<float> vals(std::size_t(dim) + 1);
    in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * 4));
    if (static_cast<std::size_t>(in.gcount()) != vals.size() * 4) {
        throw DataError(path + ": truncated weight block");
    }
    model.weights.assign(vals.begin(), vals.end() - 1);
    model.bias = vals.back();
    return model;
}

void write_scores(const ScoreSet& scores, const std::string& path) {
    BinaryWriter out(path);
    out.magic("SCR1");
    out.u64(scores.ids.size());
    for (std::size_t i = 0; i < scores.ids.size(); ++i) {
        out.u64(scores.ids[i]);
        out.f32(scores.scores[i]);
    }
    out.close();
}

ScoreSet read_scores(const std::string& path) {
    BinaryReader in(path);
    in.expect_magic("SCR1");
    const std::uint64_t count = in.u64();
    ScoreSet out;
    out.ids.reserve(std::min<std::uint64_t>(count, 1u << 24));
    out.scores.reserve(std::min<std::uint64_t>(count, 1u << 24));
    for (std::uint64_t i = 0; i < count; ++i) {
        out.ids.push_back(in.u64());
        out.scores.push_back(in.f32());
    }
    if (!in.at_eof()) {
        throw DataError(path + ": trailing bytes at offset " + std::to_string(in.offset()));
    }
    return out;
}

}  // namespace crisp
