#ifndef CRISP_CLASSIFIER_HPP
#define CRISP_CLASSIFIER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "crisp/embed.hpp"

namespace crisp {

struct LogRegModel {
    std::vector<double> weights;  // embedding dim
    double bias = 0.0;
    double l2_strength = 0.0;

    struct TrainMeta {
        std::uint64_t iterations = 0;
        double final_loss = 0.0;
        double gradient_norm = 0.0;
        std::uint64_t seed = 0;
        std::vector<double> loss_trace;  // objective after each accepted step
    } train_meta;

    std::uint32_t dim() const { return static_cast<std::uint32_t>(weights.size()); }
};

struct LogRegOptions {
    double l2_strength = 0.0;
    std::uint64_t max_iterations = 10000;
    double gradient_tolerance = 1e-6;
    std::uint64_t seed = 0;
};

// Full-batch gradient descent with backtracking line search on the
// class-balanced logistic loss plus (l2/2)*||w||^2 (bias unregularized).
// Deterministic; starts from zero weights.
LogRegModel train_logreg(const EmbeddingSet& positives, const EmbeddingSet& negatives,
                         const LogRegOptions& opts = {});

// sigmoid(w.x + b), in (0, 1).
double score(const LogRegModel& model, const float* embedding, std::uint32_t dim);

struct ScoreSet {
    std::vector<std::uint64_t> ids;
    std::vector<float> scores;
};

ScoreSet score_all(const LogRegModel& model, const EmbeddingSet& set);

struct SelectionThreshold {
    double quantile = 0.0;
    double score_cut = 0.0;        // q-quantile of the generalist scores
    double accepted_fraction = 0.0;  // fraction strictly above the cut
};

// score_cut is the ceil(q*n)-th order statistic of the sample; q = 0 accepts
// everything.
SelectionThreshold threshold_from_quantile(std::vector<double> scores, double quantile);

// Selected ids (strict score > cut), input order preserved.
std::vector<std::uint64_t> filter(const ScoreSet& scores, const SelectionThreshold& threshold);

// Model files: textual header, then f32 weights and bias.
void write_logreg(const LogRegModel& model, const std::string& path);
LogRegModel read_logreg(const std::string& path);

// Score files: magic "SCR1", u64 count, then (u64 window_id, f32 score).
void write_scores(const ScoreSet& scores, const std::string& path);
ScoreSet read_scores(const std::string& path);

}  // namespace crisp

#endif  // CRISP_CLASSIFIER_HPP
