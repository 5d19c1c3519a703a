#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include "crisp/corpus.hpp"
#include "crisp/error.hpp"
#include "crisp/rng.hpp"
#include "stat_util.hpp"

using namespace crisp;

namespace {

std::vector<SourceDocument> ingest_all(const std::string& path, IngestStats* stats_out = nullptr,
                                       const IngestOptions& opts = {}) {
    std::vector<SourceDocument> docs;
    auto stats = ingest(path, SourceTag::generalist(),
                        [&](SourceDocument&& d) { docs.push_back(std::move(d)); }, opts);
    if (stats_out) *stats_out = stats;
    return docs;
}

// Independent segment counter: splits on whitespace, then counts alnum runs
// and punctuation chars inside each chunk. Used as the tokenizer oracle.
std::size_t oracle_segment_count(const std::string& text) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t end = i;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        // inside the chunk: maximal word runs + single punctuation marks
        bool in_word = false;
        for (std::size_t j = i; j < end; ++j) {
            const auto c = static_cast<unsigned char>(text[j]);
            const bool word = std::isalnum(c) || c == '_' || c >= 0x80;
            if (word && !in_word) ++count;
            if (!word) ++count;
            in_word = word;
        }
        i = end;
    }
    return count;
}

}  // namespace

TEST_CASE("tokenizer basic behavior") {
    HashTokenizer tok;
    CHECK(tok.tokenize("").empty());
    CHECK(tok.tokenize("   \t\n ").empty());

    auto ids = tok.tokenize("a a a");
    REQUIRE(ids.size() == 3);
    CHECK(ids[0] == ids[1]);
    CHECK(ids[1] == ids[2]);

    // deterministic across calls
    CHECK(tok.tokenize("The quick brown fox.") == tok.tokenize("The quick brown fox."));

    // case folding and punctuation splitting
    CHECK(tok.tokenize("Hello") == tok.tokenize("hello"));
    CHECK(tok.tokenize("end.").size() == 2);
    CHECK(tok.tokenize("a,b").size() == 3);

    for (std::uint32_t id : tok.tokenize("mixed 42 w0rds, punct!")) CHECK(id < tok.vocab_size());
}

TEST_CASE("tokenizer matches the independent segment counter") {
    // A paragraph built from a fixed word list with punctuation sprinkled in.
    Rng rng(17);
    const char* words[] = {"data",  "model", "selection", "training", "corpus",
                           "token", "text",  "window",    "sample",   "domain"};
    std::string paragraph;
    for (int i = 0; i < 1000; ++i) {
        paragraph += words[rng.below(10)];
        if (rng.below(5) == 0) paragraph += ",";
        if (rng.below(11) == 0) paragraph += ".";
        paragraph += (rng.below(13) == 0) ? "\n" : " ";
    }
    HashTokenizer tok;
    CHECK(tok.tokenize(paragraph).size() == oracle_segment_count(paragraph));
}

TEST_CASE("window id packing") {
    const std::uint64_t id = make_window_id(123456, 789);
    CHECK(window_doc_id(id) == 123456);
    CHECK(window_ordinal(id) == 789);
}

TEST_CASE("window segmentation rules") {
    std::vector<std::uint32_t> tokens(2048, 7);
    auto ws = segment_tokens(1, tokens, {1024, 32});
    REQUIRE(ws.size() == 2);
    CHECK(ws[0].tokens.size() == 1024);
    CHECK(ws[1].tokens.size() == 1024);
    CHECK(ws[0].ordinal == 0);
    CHECK(ws[1].ordinal == 1);
    CHECK(ws[0].window_id != ws[1].window_id);

    // 1,040 tokens: the 16-token tail is below the 32-token minimum
    tokens.resize(1040);
    ws = segment_tokens(1, tokens, {1024, 32});
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].tokens.size() == 1024);

    // short documents yield nothing
    tokens.resize(31);
    CHECK(segment_tokens(1, tokens, {1024, 32}).empty());

    // exact minimum trailing slice is kept
    tokens.assign(1024 + 32, 3);
    CHECK(segment_tokens(1, tokens, {1024, 32}).size() == 2);

    CHECK_THROWS_AS(segment_tokens(1, tokens, {16, 32}), UsageError);
}

TEST_CASE("window count matches the brute-force oracle over random lengths") {
    Rng rng(99);
    const WindowOptions opts{1024, 32};
    std::uint64_t produced = 0, expected = 0;
    for (int d = 0; d < 500; ++d) {
        const std::size_t len = 1 + rng.below(5000);
        std::vector<std::uint32_t> tokens(len);
        for (auto& t : tokens) t = static_cast<std::uint32_t>(rng.below(32768));
        const auto ws = segment_tokens(static_cast<std::uint64_t>(d), tokens, opts);
        produced += ws.size();
        // oracle: full slices plus one kept tail
        const std::size_t full = len / opts.window_size;
        const std::size_t rem = len % opts.window_size;
        expected += full + (rem >= opts.min_window_tokens ? 1 : 0);

        // partition property: concatenation reproduces a prefix of the tokens
        std::vector<std::uint32_t> concat;
        for (std::size_t k = 0; k < ws.size(); ++k) {
            CHECK(ws[k].ordinal == k);
            CHECK(ws[k].doc_id == static_cast<std::uint64_t>(d));
            concat.insert(concat.end(), ws[k].tokens.begin(), ws[k].tokens.end());
        }
        CHECK(concat.size() <= len);
        CHECK(std::equal(concat.begin(), concat.end(), tokens.begin()));
        CHECK(len - concat.size() <= std::max<std::size_t>(opts.window_size - 1,
                                                           opts.min_window_tokens - 1));
    }
    CHECK(produced == expected);
}

TEST_CASE("ingest assigns sequential ids and honors explicit ones") {
    statutil::ScratchDir dir("crisp-corpus");
    {
        std::ofstream f(dir.file("a.jsonl"));
        f << R"({"text": "alpha beta"})" << "\n";
        f << R"({"text": "gamma delta"})" << "\n";
        f << R"({"text": "epsilon zeta"})" << "\n";
    }
    auto docs = ingest_all(dir.file("a.jsonl"));
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].doc_id == 0);
    CHECK(docs[1].doc_id == 1);
    CHECK(docs[2].doc_id == 2);

    {
        std::ofstream f(dir.file("b.jsonl"));
        f << R"({"id": 42, "text": "alpha"})" << "\n";
        f << R"({"id": 42, "text": "dup"})" << "\n";
        f << R"({"id": 7, "text": "beta"})" << "\n";
    }
    IngestStats stats;
    docs = ingest_all(dir.file("b.jsonl"), &stats, {1.0, 100});
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == 42);
    CHECK(docs[1].doc_id == 7);
    CHECK(stats.malformed == 1);
    REQUIRE(stats.ledger.size() == 1);
    CHECK(stats.ledger[0].find("duplicate") != std::string::npos);
}

TEST_CASE("ingest skips empty text with a ledger entry") {
    statutil::ScratchDir dir("crisp-corpus");
    {
        std::ofstream f(dir.file("c.jsonl"));
        f << R"({"text": "   "})" << "\n";
        f << R"({"text": "kept"})" << "\n";
    }
    IngestStats stats;
    auto docs = ingest_all(dir.file("c.jsonl"), &stats, {1.0, 100});
    CHECK(docs.size() == 1);
    CHECK(stats.malformed == 1);
    REQUIRE(stats.ledger.size() == 1);
    CHECK(stats.ledger[0].find("empty text") != std::string::npos);
}

TEST_CASE("ingest of a 10k-line file with 37 corrupted lines") {
    statutil::ScratchDir dir("crisp-corpus");
    // Corrupt line numbers derived from a fixed stride so the count is known.
    std::set<std::size_t> corrupt;
    for (std::size_t i = 0; corrupt.size() < 37; i += 269) corrupt.insert(i % 10000);
    REQUIRE(corrupt.size() == 37);
    {
        std::ofstream f(dir.file("big.jsonl"));
        for (std::size_t i = 0; i < 10000; ++i) {
            if (corrupt.count(i)) {
                f << "{broken json line " << i << "\n";
            } else {
                f << R"({"text": "document body )" << i << R"("})" << "\n";
            }
        }
    }
    // independent validator: count lines that contain the valid text pattern
    std::size_t oracle_valid = 0;
    {
        std::ifstream f(dir.file("big.jsonl"));
        std::string line;
        while (std::getline(f, line)) {
            if (line.rfind("{\"text\"", 0) == 0) ++oracle_valid;
        }
    }
    CHECK(oracle_valid == 9963);

    IngestStats stats;
    auto docs = ingest_all(dir.file("big.jsonl"), &stats);
    CHECK(docs.size() == 9963);
    CHECK(stats.documents == 9963);
    CHECK(stats.malformed == 37);
    CHECK(stats.lines == 10000);
}

TEST_CASE("ingest fails when too many lines are malformed") {
    statutil::ScratchDir dir("crisp-corpus");
    {
        std::ofstream f(dir.file("bad.jsonl"));
        for (int i = 0; i < 50; ++i) f << R"({"text": "ok"; "id":)" << i << "\n";  // broken
        for (int i = 0; i < 50; ++i) f << R"({"text": "ok )" << i << R"("})" << "\n";
    }
    CHECK_THROWS_AS(ingest_all(dir.file("bad.jsonl")), DataError);
    CHECK_THROWS_AS(ingest_all(dir.file("missing.jsonl")), DataError);
}

TEST_CASE("ingest+window ids are stable across runs") {
    statutil::ScratchDir dir("crisp-corpus");
    {
        std::ofstream f(dir.file("s.jsonl"));
        Rng rng(5);
        for (int i = 0; i < 50; ++i) {
            f << R"({"text": ")";
            const std::size_t len = 20 + rng.below(300);
            for (std::size_t j = 0; j < len; ++j) f << "w" << rng.below(100) << " ";
            f << R"("})" << "\n";
        }
    }
    HashTokenizer tok;
    auto run = [&] {
        std::vector<std::uint64_t> ids;
        ingest(dir.file("s.jsonl"), SourceTag::generalist(), [&](SourceDocument&& d) {
            for (const auto& w : window(d, tok, {64, 8})) ids.push_back(w.window_id);
        });
        return ids;
    };
    const auto first = run();
    CHECK(!first.empty());
    CHECK(first == run());
}

TEST_CASE("WND1 round trip and error reporting") {
    statutil::ScratchDir dir("crisp-corpus");
    std::vector<DocumentWindow> ws;
    Rng rng(3);
    for (std::uint64_t d = 0; d < 20; ++d) {
        DocumentWindow w;
        w.doc_id = d;
        w.ordinal = static_cast<std::uint32_t>(d % 3);
        w.window_id = make_window_id(d, w.ordinal);
        w.tokens.resize(1 + rng.below(100));
        for (auto& t : w.tokens) t = static_cast<std::uint32_t>(rng.below(32768));
        ws.push_back(std::move(w));
    }
    const std::string path = dir.file("w.wnd");
    {
        WindowWriter writer(path);
        for (const auto& w : ws) writer.append(w);
        writer.close();
        CHECK(writer.written() == ws.size());
    }
    auto back = read_windows(path);
    REQUIRE(back.size() == ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) {
        CHECK(back[i].window_id == ws[i].window_id);
        CHECK(back[i].doc_id == ws[i].doc_id);
        CHECK(back[i].ordinal == ws[i].ordinal);
        CHECK(back[i].tokens == ws[i].tokens);
    }

    WindowStore store;
    store.load_shard(path);
    CHECK(store.size() == ws.size());
    CHECK(store.find(ws[7].window_id) != nullptr);
    CHECK(store.find(ws[7].window_id)->tokens == ws[7].tokens);
    CHECK(store.find(0xdeadbeefull << 20) == nullptr);

    // magic mismatch
    {
        std::ofstream f(dir.file("bad.wnd"), std::ios::binary);
        f << "NOPE1234";
    }
    CHECK_THROWS_WITH_AS(read_windows(dir.file("bad.wnd")),
                         doctest::Contains("bad magic"), DataError);

    // truncated record
    {
        std::ifstream in(path, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        bytes.resize(bytes.size() - 3);
        std::ofstream f(dir.file("trunc.wnd"), std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_WITH_AS(read_windows(dir.file("trunc.wnd")),
                         doctest::Contains("truncated"), DataError);
}
