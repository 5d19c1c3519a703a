#ifndef CRISP_EMBED_HPP
#define CRISP_EMBED_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "crisp/corpus.hpp"

namespace crisp {

struct TfIdfModel {
    std::uint32_t vocab_size = 0;
    std::uint64_t num_documents = 0;
    std::vector<std::uint64_t> document_frequency;  // size vocab_size
};

// Streaming document-frequency counter; one add() per window.
class TfIdfBuilder {
public:
    explicit TfIdfBuilder(std::uint32_t vocab_size);

    void add(const DocumentWindow& w);
    // Throws DataError when fewer than 2 windows were added.
    TfIdfModel finish();

private:
    TfIdfModel model_;
    std::vector<std::uint64_t> last_seen_;  // per-token marker, avoids a set per window
};

TfIdfModel tfidf_fit(const std::vector<DocumentWindow>& windows, std::uint32_t vocab_size);

struct SparseEntry {
    std::uint32_t index;
    float value;
};

// L2-normalized log-tf / smoothed-idf vector. Entries sorted by index.
// degenerate marks windows with no in-vocab tokens (zero vector).
struct TfIdfVector {
    std::vector<SparseEntry> entries;
    bool degenerate = false;
};

TfIdfVector tfidf_transform(const DocumentWindow& w, const TfIdfModel& model);

struct LsiProjection {
    std::uint32_t dim = 0;
    std::uint32_t vocab_size = 0;
    std::vector<float> singular_values;  // non-increasing, length dim
    std::vector<float> basis;            // row-major dim x vocab_size, orthonormal rows

    const float* row(std::uint32_t k) const { return basis.data() + std::size_t(k) * vocab_size; }
};

struct LsiFitOptions {
    std::uint32_t dim = 256;
    std::uint32_t oversample = 10;
    std::uint32_t power_iterations = 2;
    // Fit on a uniform subsample when more rows than this are supplied.
    std::size_t max_rows = 131072;
    std::uint64_t seed = 0;
};

// Randomized truncated SVD of the row matrix (rows = windows, columns =
// vocab). Deterministic given the seed. Throws DataError when the requested
// dim exceeds the achievable rank, naming the rank.
LsiProjection lsi_fit(const std::vector<TfIdfVector>& rows, std::uint32_t vocab_size,
                      const LsiFitOptions& opts = {});

struct LsiEmbedding {
    std::vector<float> values;  // unit norm, length dim
    bool degenerate = false;
};

// Projects then L2-normalizes. Zero input maps to the unit vector along the
// first component and is flagged degenerate.
LsiEmbedding lsi_transform(const TfIdfVector& v, const LsiProjection& proj);

// Dense unit-norm vectors keyed by window id, insertion-ordered.
class EmbeddingSet {
public:
    EmbeddingSet() = default;
    explicit EmbeddingSet(std::uint32_t dim) : dim_(dim) {}

    std::uint32_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    bool normalized() const { return normalized_; }

    const std::vector<std::uint64_t>& ids() const { return ids_; }
    const float* vec(std::size_t i) const { return data_.data() + i * dim_; }

    std::optional<std::size_t> find(std::uint64_t window_id) const;

    void add(std::uint64_t window_id, const float* values);

    // Scales every vector to unit Euclidean norm. Throws DataError on a
    // zero-norm or non-finite vector, naming the window id.
    void normalize();

private:
    std::uint32_t dim_ = 0;
    bool normalized_ = false;
    std::vector<std::uint64_t> ids_;
    std::vector<float> data_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

// EMB1 files: magic "EMB1", u32 dim, u64 count, then per record u64 window_id
// + dim x f32.
void write_embeddings(const EmbeddingSet& set, const std::string& path);

// Reads an EMB1 file and re-normalizes every vector. Fatal (with byte offset)
// on magic mismatch, truncation, or non-finite floats.
EmbeddingSet import_embeddings(const std::string& path);

// LSI projection files: magic "LSI1", u32 dim, u32 vocab_size, f32 singular
// values, then basis rows f32.
void write_lsi(const LsiProjection& proj, const std::string& path);
LsiProjection read_lsi(const std::string& path);

// Companion artifact so a fitted tf-idf model can be reused across runs:
// magic "TFI1", u32 vocab_size, u64 num_documents, u64 df per token.
void write_tfidf(const TfIdfModel& model, const std::string& path);
TfIdfModel read_tfidf(const std::string& path);

}  // namespace crisp

#endif  // CRISP_EMBED_HPP
