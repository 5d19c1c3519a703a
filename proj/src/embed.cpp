#include "crisp/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "crisp/binio.hpp"
#include "crisp/error.hpp"
#include "crisp/rng.hpp"

namespace crisp {

TfIdfBuilder::TfIdfBuilder(std::uint32_t vocab_size) {
    model_.vocab_size = vocab_size;
    model_.document_frequency.assign(vocab_size, 0);
    last_seen_.assign(vocab_size, 0);
}

void TfIdfBuilder::add(const DocumentWindow& w) {
    ++model_.num_documents;
    const std::uint64_t mark = model_.num_documents;
    for (std::uint32_t t : w.tokens) {
        if (t >= model_.vocab_size) continue;
        if (last_seen_[t] != mark) {
            last_seen_[t] = mark;
            ++model_.document_frequency[t];
        }
    }
}

TfIdfModel TfIdfBuilder::finish() {
    if (model_.num_documents < 2) {
        throw DataError("tf-idf fit needs at least 2 windows, got " +
                        std::to_string(model_.num_documents));
    }
    return std::move(model_);
}

TfIdfModel tfidf_fit(const std::vector<DocumentWindow>& windows, std::uint32_t vocab_size) {
    TfIdfBuilder builder(vocab_size);
    for (const auto& w : windows) builder.add(w);
    return builder.finish();
}

TfIdfVector tfidf_transform(const DocumentWindow& w, const TfIdfModel& model) {
    // Term frequencies of in-vocab tokens.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> tf;
    {
        std::vector<std::uint32_t> sorted;
        sorted.reserve(w.tokens.size());
        for (std::uint32_t t : w.tokens)
            if (t < model.vocab_size) sorted.push_back(t);
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            tf.emplace_back(sorted[i], static_cast<std::uint32_t>(j - i));
            i = j;
        }
    }

    TfIdfVector out;
    if (tf.empty()) {
        out.degenerate = true;
        return out;
    }

    const double n = static_cast<double>(model.num_documents);
    double norm_sq = 0.0;
    out.entries.reserve(tf.size());
    for (auto [token, count] : tf) {
        const double df = static_cast<double>(model.document_frequency[token]);
        const double value =
            (1.0 + std::log(static_cast<double>(count))) * (std::log((n + 1.0) / (df + 1.0)) + 1.0);
        norm_sq += value * value;
        out.entries.push_back({token, static_cast<float>(value)});
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& e : out.entries) e.value = static_cast<float>(e.value * inv);
    return out;
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

// Y = A * M where A is the sparse row matrix (n x vocab) and M is vocab x r.
MatrixXd sparse_times_dense(const std::vector<TfIdfVector>& rows,
                            const std::vector<std::size_t>& row_ids, const MatrixXd& m) {
    MatrixXd y = MatrixXd::Zero(static_cast<Index>(row_ids.size()), m.cols());
    for (std::size_t i = 0; i < row_ids.size(); ++i) {
        for (const auto& e : rows[row_ids[i]].entries) {
            y.row(static_cast<Index>(i)) += double(e.value) * m.row(e.index);
        }
    }
    return y;
}

// Z = A^T * Q, (vocab x r).
MatrixXd sparse_transpose_times_dense(const std::vector<TfIdfVector>& rows,
                                      const std::vector<std::size_t>& row_ids,
                                      std::uint32_t vocab_size, const MatrixXd& q) {
    MatrixXd z = MatrixXd::Zero(vocab_size, q.cols());
    for (std::size_t i = 0; i < row_ids.size(); ++i) {
        for (const auto& e : rows[row_ids[i]].entries) {
            z.row(e.index) += double(e.value) * q.row(static_cast<Index>(i));
        }
    }
    return z;
}

MatrixXd thin_q(const MatrixXd& m) {
    Eigen::HouseholderQR<MatrixXd> qr(m);
    MatrixXd q = MatrixXd::Identity(m.rows(), m.cols());
    q.applyOnTheLeft(qr.householderQ());
    return q;
}

}  // namespace

LsiProjection lsi_fit(const std::vector<TfIdfVector>& rows, std::uint32_t vocab_size,
                      const LsiFitOptions& opts) {
    if (opts.dim == 0) throw UsageError("lsi dim must be positive");
    if (opts.dim > rows.size() || opts.dim > vocab_size) {
        throw DataError("lsi dim " + std::to_string(opts.dim) + " exceeds min(rows=" +
                        std::to_string(rows.size()) + ", vocab=" + std::to_string(vocab_size) +
                        ")");
    }

    // Uniform row subsample (Floyd) when the matrix is larger than the fit budget.
    std::vector<std::size_t> row_ids;
    if (rows.size() > opts.max_rows) {
        Rng rng(derive_seed(opts.seed, {0x5ull}));
        std::vector<std::size_t> chosen;
        chosen.reserve(opts.max_rows);
        std::vector<bool> used(rows.size(), false);
        for (std::size_t i = rows.size() - opts.max_rows; i < rows.size(); ++i) {
            std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
            if (used[j]) j = i;
            used[j] = true;
            chosen.push_back(j);
        }
        std::sort(chosen.begin(), chosen.end());
        row_ids = std::move(chosen);
    } else {
        row_ids.resize(rows.size());
        std::iota(row_ids.begin(), row_ids.end(), std::size_t(0));
    }

    const std::size_t n = row_ids.size();
    const Index r = static_cast<Index>(
        std::min<std::size_t>(std::size_t(opts.dim) + opts.oversample, std::min<std::size_t>(n, vocab_size)));

    // Range finder: Q spans an approximation of the column space of A.
    MatrixXd omega(vocab_size, r);
    {
        Rng rng(derive_seed(opts.seed, {0x17ull}));
        for (Index i = 0; i < omega.rows(); ++i)
            for (Index j = 0; j < r; ++j) omega(i, j) = rng.gaussian();
    }
    MatrixXd q = thin_q(sparse_times_dense(rows, row_ids, omega));
    for (std::uint32_t it = 0; it < opts.power_iterations; ++it) {
        MatrixXd z = thin_q(sparse_transpose_times_dense(rows, row_ids, vocab_size, q));
        q = thin_q(sparse_times_dense(rows, row_ids, z));
    }

    // Project: B = Q^T A (r x vocab), then exact SVD of the small factor.
    MatrixXd b = sparse_transpose_times_dense(rows, row_ids, vocab_size, q).transpose();
    Eigen::BDCSVD<MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();

    std::uint32_t achievable = 0;
    const double tol = std::max(1e-12, 1e-10 * (sv.size() > 0 ? sv(0) : 0.0));
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++achievable;
    if (achievable < opts.dim) {
        throw DataError("lsi dim " + std::to_string(opts.dim) +
                        " exceeds achievable rank " + std::to_string(achievable));
    }

    LsiProjection proj;
    proj.dim = opts.dim;
    proj.vocab_size = vocab_size;
    proj.singular_values.resize(opts.dim);
    proj.basis.assign(std::size_t(opts.dim) * vocab_size, 0.0f);
    const MatrixXd& v = svd.matrixV();  // vocab x r
    for (std::uint32_t k = 0; k < opts.dim; ++k) {
        proj.singular_values[k] = static_cast<float>(sv(static_cast<Index>(k)));
        // Canonical sign: largest-|.| component positive (ties: lowest index).
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < v.rows(); ++i) {
            const double a = std::abs(v(i, static_cast<Index>(k)));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        const double sign = v(arg, static_cast<Index>(k)) < 0.0 ? -1.0 : 1.0;
        float* row = proj.basis.data() + std::size_t(k) * vocab_size;
        for (Index i = 0; i < v.rows(); ++i)
            row[i] = static_cast<float>(sign * v(i, static_cast<Index>(k)));
    }
    return proj;
}

LsiEmbedding lsi_transform(const TfIdfVector& v, const LsiProjection& proj) {
    for (const auto& e : v.entries) {
        if (e.index >= proj.vocab_size) {
            throw DataError("tf-idf index " + std::to_string(e.index) +
                            " out of range for vocab " + std::to_string(proj.vocab_size));
        }
    }
    LsiEmbedding out;
    out.values.assign(proj.dim, 0.0f);

    std::vector<double> acc(proj.dim, 0.0);
    for (const auto& e : v.entries) {
        for (std::uint32_t k = 0; k < proj.dim; ++k) {
            acc[k] += double(e.value) * double(proj.row(k)[e.index]);
        }
    }
    double norm_sq = 0.0;
    for (double a : acc) norm_sq += a * a;
    if (v.entries.empty() || norm_sq < 1e-24) {
        out.degenerate = true;
        out.values[0] = 1.0f;  // zero-replacement: unit vector along the first basis row
        return out;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (std::uint32_t k = 0; k < proj.dim; ++k)
        out.values[k] = static_cast<float>(acc[k] * inv);
    return out;
}

std::optional<std::size_t> EmbeddingSet::find(std::uint64_t window_id) const {
    auto it = index_.find(window_id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingSet::add(std::uint64_t window_id, const float* values) {
    if (dim_ == 0) throw UsageError("EmbeddingSet dim not set");
    if (!index_.emplace(window_id, ids_.size()).second) {
        throw DataError("duplicate window id in embedding set: " + std::to_string(window_id));
    }
    ids_.push_back(window_id);
    data_.insert(data_.end(), values, values + dim_);
    normalized_ = false;
}

void EmbeddingSet::normalize() {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        float* row = data_.data() + i * dim_;
        double norm_sq = 0.0;
        for (std::uint32_t k = 0; k < dim_; ++k) {
            const double x = row[k];
            if (!std::isfinite(x)) {
                throw DataError("non-finite embedding for window " + std::to_string(ids_[i]));
            }
            norm_sq += x * x;
        }
        if (norm_sq <= 0.0) {
            throw DataError("zero-norm embedding for window " + std::to_string(ids_[i]));
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::uint32_t k = 0; k < dim_; ++k)
            row[k] = static_cast<float>(row[k] * inv);
    }
    normalized_ = true;
}

void write_embeddings(const EmbeddingSet& set, const std::string& path) {
    BinaryWriter out(path);
    out.magic("EMB1");
    out.u32(set.dim());
    out.u64(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        out.u64(set.ids()[i]);
        out.f32_array(set.vec(i), set.dim());
    }
    out.close();
}

EmbeddingSet import_embeddings(const std::string& path) {
    BinaryReader in(path);
    in.expect_magic("EMB1");
    const std::uint32_t dim = in.u32();
    const std::uint64_t count = in.u64();
    if (dim == 0) throw DataError(path + ": zero embedding dim");
    if (dim > (1u << 20)) {
        throw DataError(path + ": implausible embedding dim " + std::to_string(dim));
    }

    EmbeddingSet set(dim);
    std::vector<float> buf(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t id = in.u64();
        const std::uint64_t record_offset = in.offset();
        in.f32_array(buf.data(), dim);
        for (std::uint32_t k = 0; k < dim; ++k) {
            if (!std::isfinite(buf[k])) {
                throw DataError(path + ": non-finite float at byte offset " +
                                std::to_string(record_offset + std::uint64_t(k) * 4));
            }
        }
        set.add(id, buf.data());
    }
    if (!in.at_eof()) {
        throw DataError(path + ": trailing bytes after " + std::to_string(count) +
                        " records at byte offset " + std::to_string(in.offset()));
    }
    set.normalize();
    return set;
}

void write_lsi(const LsiProjection& proj, const std::string& path) {
    BinaryWriter out(path);
    out.magic("LSI1");
    out.u32(proj.dim);
    out.u32(proj.vocab_size);
    out.f32_array(proj.singular_values.data(), proj.singular_values.size());
    out.f32_array(proj.basis.data(), proj.basis.size());
    out.close();
}

LsiProjection read_lsi(const std::string& path) {
    BinaryReader in(path);
    in.expect_magic("LSI1");
    LsiProjection proj;
    proj.dim = in.u32();
    proj.vocab_size = in.u32();
    proj.singular_values.resize(proj.dim);
    in.f32_array(proj.singular_values.data(), proj.dim);
    proj.basis.resize(std::size_t(proj.dim) * proj.vocab_size);
    in.f32_array(proj.basis.data(), proj.basis.size());
    return proj;
}

void write_tfidf(const TfIdfModel& model, const std::string& path) {
    BinaryWriter out(path);
    out.magic("TFI1");
    out.u32(model.vocab_size);
    out.u64(model.num_documents);
    for (std::uint64_t df : model.document_frequency) out.u64(df);
    out.close();
}

TfIdfModel read_tfidf(const std::string& path) {
    BinaryReader in(path);
    in.expect_magic("TFI1");
    TfIdfModel model;
    model.vocab_size = in.u32();
    model.num_documents = in.u64();
    model.document_frequency.resize(model.vocab_size);
    for (auto& df : model.document_frequency) df = in.u64();
    return model;
}

}  // namespace crisp
