#include "crisp/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "crisp/binio.hpp"
#include "crisp/error.hpp"

namespace crisp {

namespace {

bool is_ws(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           c == '_' || c >= 0x80;
}

std::uint64_t fnv1a_lower(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

bool whitespace_only(std::string_view s) {
    for (unsigned char c : s)
        if (!is_ws(c)) return false;
    return true;
}

}  // namespace

std::vector<std::uint32_t> HashTokenizer::tokenize(std::string_view text) const {
    std::vector<std::uint32_t> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_ws(c)) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (is_word_byte(c)) {
            while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        } else {
            ++i;  // punctuation: one char, one token
        }
        const std::uint64_t h = fnv1a_lower(text.substr(start, i - start));
        out.push_back(static_cast<std::uint32_t>(h % vocab_size_));
    }
    return out;
}

IngestStats ingest(const std::string& path, const SourceTag& tag,
                   const std::function<void(SourceDocument&&)>& sink,
                   const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);

    IngestStats stats;
    std::unordered_set<std::uint64_t> seen_ids;
    std::uint64_t next_id = 0;
    std::string line;

    auto record_bad = [&](const std::string& reason) {
        ++stats.malformed;
        if (stats.ledger.size() < opts.max_ledger_messages) {
            stats.ledger.push_back("line " + std::to_string(stats.lines) + ": " + reason);
        }
    };

    while (std::getline(in, line)) {
        ++stats.lines;
        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            record_bad("not a JSON object");
            continue;
        }
        if (!rec.contains("text") || !rec["text"].is_string()) {
            record_bad("missing text field");
            continue;
        }
        std::string text = rec["text"].get<std::string>();
        if (whitespace_only(text)) {
            record_bad("empty text");
            continue;
        }
        std::uint64_t doc_id;
        if (rec.contains("id")) {
            if (!rec["id"].is_number_unsigned()) {
                record_bad("id is not an unsigned integer");
                continue;
            }
            doc_id = rec["id"].get<std::uint64_t>();
        } else {
            doc_id = next_id;
        }
        if (doc_id > kMaxDocId) {
            record_bad("id exceeds " + std::to_string(kMaxDocId));
            continue;
        }
        if (!seen_ids.insert(doc_id).second) {
            record_bad("duplicate id " + std::to_string(doc_id));
            continue;
        }
        ++next_id;
        ++stats.documents;
        sink(SourceDocument{doc_id, tag, std::move(text)});
    }
    if (in.bad()) throw DataError("read error on corpus file: " + path);

    if (stats.lines > 0 &&
        static_cast<double>(stats.malformed) >
            opts.max_malformed_fraction * static_cast<double>(stats.lines)) {
        throw DataError(path + ": " + std::to_string(stats.malformed) + " of " +
                        std::to_string(stats.lines) + " lines malformed (limit " +
                        std::to_string(opts.max_malformed_fraction * 100.0) + "%)");
    }
    return stats;
}

std::vector<DocumentWindow> segment_tokens(std::uint64_t doc_id,
                                           const std::vector<std::uint32_t>& tokens,
                                           const WindowOptions& opts) {
    if (opts.window_size < opts.min_window_tokens) {
        throw UsageError("window_size must be at least min_window_tokens");
    }
    std::vector<DocumentWindow> out;
    const std::size_t n = tokens.size();
    std::uint32_t ordinal = 0;
    for (std::size_t begin = 0; begin < n; begin += opts.window_size) {
        const std::size_t len = std::min<std::size_t>(opts.window_size, n - begin);
        if (len < opts.min_window_tokens) break;  // drop short trailing slice
        if (ordinal > kMaxOrdinal) {
            throw DataError("document " + std::to_string(doc_id) + " exceeds " +
                            std::to_string(kMaxOrdinal + 1ull) + " windows");
        }
        DocumentWindow w;
        w.doc_id = doc_id;
        w.ordinal = ordinal;
        w.window_id = make_window_id(doc_id, ordinal);
        w.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                        tokens.begin() + static_cast<std::ptrdiff_t>(begin + len));
        out.push_back(std::move(w));
        ++ordinal;
    }
    return out;
}

std::vector<DocumentWindow> window(const SourceDocument& doc, const Tokenizer& tokenizer,
                                   const WindowOptions& opts) {
    return segment_tokens(doc.doc_id, tokenizer.tokenize(doc.text), opts);
}

struct WindowWriter::Impl {
    explicit Impl(const std::string& path) : writer(path) {}
    BinaryWriter writer;
};

WindowWriter::WindowWriter(const std::string& path) : impl_(new Impl(path)) {
    impl_->writer.magic("WND1");
}

WindowWriter::~WindowWriter() = default;

void WindowWriter::append(const DocumentWindow& w) {
    auto& out = impl_->writer;
    out.u64(w.window_id);
    out.u64(w.doc_id);
    out.u32(w.ordinal);
    out.u32(static_cast<std::uint32_t>(w.tokens.size()));
    for (std::uint32_t t : w.tokens) out.u32(t);
    ++written_;
}

void WindowWriter::close() { impl_->writer.close(); }

std::vector<DocumentWindow> read_windows(const std::string& path) {
    BinaryReader in(path);
    in.expect_magic("WND1");
    std::vector<DocumentWindow> out;
    while (!in.at_eof()) {
        DocumentWindow w;
        w.window_id = in.u64();
        w.doc_id = in.u64();
        w.ordinal = in.u32();
        const std::uint32_t count = in.u32();
        if (count > (1u << 24)) {
            throw DataError(path + ": implausible token count " + std::to_string(count) +
                            " at byte offset " + std::to_string(in.offset()));
        }
        w.tokens.resize(count);
        for (std::uint32_t i = 0; i < count; ++i) w.tokens[i] = in.u32();
        out.push_back(std::move(w));
    }
    return out;
}

void WindowStore::load_shard(const std::string& path) {
    auto ws = read_windows(path);
    windows_.reserve(windows_.size() + ws.size());
    for (auto& w : ws) {
        by_id_.emplace(w.window_id, windows_.size());
        windows_.push_back(std::move(w));
    }
}

const DocumentWindow* WindowStore::find(std::uint64_t window_id) const {
    auto it = by_id_.find(window_id);
    return it == by_id_.end() ? nullptr : &windows_[it->second];
}

}  // namespace crisp
