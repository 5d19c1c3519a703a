#ifndef CRISP_CORPUS_HPP
#define CRISP_CORPUS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace crisp {

struct SourceTag {
    enum class Kind { generalist, specialist };
    Kind kind = Kind::generalist;
    std::string task;  // task name, set for specialist sources

    static SourceTag generalist() { return {Kind::generalist, {}}; }
    static SourceTag specialist(std::string task_name) {
        return {Kind::specialist, std::move(task_name)};
    }
};

struct SourceDocument {
    std::uint64_t doc_id = 0;
    SourceTag tag;
    std::string text;
};

// A fixed-length non-overlapping token slice of one document; the atomic
// selection unit for everything downstream.
struct DocumentWindow {
    std::uint64_t window_id = 0;
    std::uint64_t doc_id = 0;
    std::uint32_t ordinal = 0;
    std::vector<std::uint32_t> tokens;
};

// window_id packs (doc_id, ordinal): low 20 bits ordinal, rest doc id. Ids are
// stable across runs because both components are.
inline constexpr int kWindowOrdinalBits = 20;
inline constexpr std::uint64_t kMaxDocId = (1ull << (64 - kWindowOrdinalBits)) - 1;
inline constexpr std::uint32_t kMaxOrdinal = (1u << kWindowOrdinalBits) - 1;

constexpr std::uint64_t make_window_id(std::uint64_t doc_id, std::uint32_t ordinal) {
    return (doc_id << kWindowOrdinalBits) | ordinal;
}
constexpr std::uint64_t window_doc_id(std::uint64_t window_id) {
    return window_id >> kWindowOrdinalBits;
}
constexpr std::uint32_t window_ordinal(std::uint64_t window_id) {
    return static_cast<std::uint32_t>(window_id & kMaxOrdinal);
}

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<std::uint32_t> tokenize(std::string_view text) const = 0;
    virtual std::uint32_t vocab_size() const = 0;
};

// Deterministic whitespace + punctuation splitter. Alphanumeric runs (with
// '_' and any non-ASCII bytes) form word tokens, every other printable
// character is a single-character token. ASCII letters are lowercased before
// hashing; ids are FNV-1a hashes folded into the vocab.
class HashTokenizer : public Tokenizer {
public:
    explicit HashTokenizer(std::uint32_t vocab_size = 32768) : vocab_size_(vocab_size) {}

    std::vector<std::uint32_t> tokenize(std::string_view text) const override;
    std::uint32_t vocab_size() const override { return vocab_size_; }

private:
    std::uint32_t vocab_size_;
};

struct IngestOptions {
    // Fail the whole ingest when more than this fraction of lines is bad.
    double max_malformed_fraction = 0.01;
    // Keep at most this many per-line ledger messages (the count is exact).
    std::size_t max_ledger_messages = 1000;
};

struct IngestStats {
    std::uint64_t lines = 0;
    std::uint64_t documents = 0;
    std::uint64_t malformed = 0;
    std::vector<std::string> ledger;  // "line N: reason", capped
};

// Reads newline-delimited JSON records {"id"?: unsigned, "text": string} and
// feeds one SourceDocument per valid line to the sink. Lines that fail to
// parse, lack text, have whitespace-only text, or repeat an id are recorded
// in the ledger and skipped. Throws DataError when the file is unreadable or
// the malformed fraction exceeds the limit.
IngestStats ingest(const std::string& path, const SourceTag& tag,
                   const std::function<void(SourceDocument&&)>& sink,
                   const IngestOptions& opts = {});

struct WindowOptions {
    std::uint32_t window_size = 1024;
    std::uint32_t min_window_tokens = 32;
};

// Splits a token sequence into consecutive disjoint windows. The trailing
// slice is kept iff it has at least min_window_tokens tokens.
std::vector<DocumentWindow> segment_tokens(std::uint64_t doc_id,
                                           const std::vector<std::uint32_t>& tokens,
                                           const WindowOptions& opts = {});

std::vector<DocumentWindow> window(const SourceDocument& doc, const Tokenizer& tokenizer,
                                   const WindowOptions& opts = {});

// WND1 shard files: magic "WND1", then per record window_id (u64), doc_id
// (u64), ordinal (u32), token_count (u32), token ids (u32 x token_count).
class WindowWriter {
public:
    explicit WindowWriter(const std::string& path);
    ~WindowWriter();

    void append(const DocumentWindow& w);
    std::uint64_t written() const { return written_; }
    void close();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint64_t written_ = 0;
};

std::vector<DocumentWindow> read_windows(const std::string& path);

// Windows from one or more shards with id lookup, for stream export.
class WindowStore {
public:
    void load_shard(const std::string& path);

    std::size_t size() const { return windows_.size(); }
    const std::vector<DocumentWindow>& windows() const { return windows_; }

    // nullptr when the id is unknown.
    const DocumentWindow* find(std::uint64_t window_id) const;

private:
    std::vector<DocumentWindow> windows_;
    std::unordered_map<std::uint64_t, std::size_t> by_id_;
};

}  // namespace crisp

#endif  // CRISP_CORPUS_HPP
