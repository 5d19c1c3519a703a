#include "crisp/manifest.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "crisp/error.hpp"

namespace crisp {

namespace {

std::uint64_t fnv1a(const unsigned char* data, std::size_t size, std::uint64_t h) {
    for (std::size_t i = 0; i < size; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

using nlohmann::json;

json pairs_to_json(const std::vector<std::pair<std::string, std::string>>& pairs) {
    json obj = json::object();
    for (const auto& [k, v] : pairs) obj[k] = v;
    return obj;
}

std::vector<std::pair<std::string, std::string>> json_to_pairs(const json& obj) {
    std::vector<std::pair<std::string, std::string>> out;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        out.emplace_back(it.key(), it.value().get<std::string>());
    }
    return out;
}

}  // namespace

std::string hash_bytes(const void* data, std::size_t size) {
    return to_hex(fnv1a(static_cast<const unsigned char*>(data), size, 0xcbf29ce484222325ull));
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot hash missing file: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a(reinterpret_cast<const unsigned char*>(buf),
                  static_cast<std::size_t>(in.gcount()), h);
    }
    return to_hex(h);
}

RunManifest::RunManifest(const std::string& dir) : dir_(dir) {
    std::ifstream in(manifest_path());
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            throw DataError(manifest_path() + ": corrupt entry at line " +
                            std::to_string(line_no));
        }
        Entry e;
        e.command = rec.value("command", "");
        e.config_hash = rec.value("config_hash", "");
        if (rec.contains("config")) e.config = json_to_pairs(rec["config"]);
        if (rec.contains("inputs")) e.inputs = json_to_pairs(rec["inputs"]);
        if (rec.contains("outputs")) e.outputs = json_to_pairs(rec["outputs"]);
        e.wall_ms = rec.value("wall_ms", std::uint64_t(0));
        for (const auto& [path, hash] : e.outputs) latest_output_hash_[path] = hash;
        entries_.push_back(std::move(e));
    }
}

std::string RunManifest::manifest_path() const { return dir_ + "/manifest.jsonl"; }

void RunManifest::verify_input(const std::string& path) const {
    auto it = latest_output_hash_.find(path);
    if (it == latest_output_hash_.end()) return;  // not produced by a recorded stage
    const std::string current = hash_file(path);
    if (current != it->second) {
        throw DataError(path + ": content hash " + current +
                        " does not match the manifest record " + it->second +
                        "; the artifact is stale: re-run the stage that produced it, or " +
                        "remove manifest.jsonl to start a fresh pipeline");
    }
}

void RunManifest::append(Entry entry) {
    json rec;
    rec["command"] = entry.command;
    rec["config_hash"] = entry.config_hash;
    rec["config"] = pairs_to_json(entry.config);
    rec["inputs"] = pairs_to_json(entry.inputs);
    rec["outputs"] = pairs_to_json(entry.outputs);
    rec["wall_ms"] = entry.wall_ms;
    std::ofstream out(manifest_path(), std::ios::app);
    if (!out) throw DataError("cannot append to " + manifest_path());
    out << rec.dump() << "\n";
    if (!out) throw DataError("write failed: " + manifest_path());
    for (const auto& [path, hash] : entry.outputs) latest_output_hash_[path] = hash;
    entries_.push_back(std::move(entry));
}

DirLock::DirLock(const std::string& dir) : path_(dir + "/.crisp.lock") {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
        throw DataError("artifact directory is locked by another run (" + path_ +
                        " exists); remove the lock file if that run is dead");
    }
    std::fclose(f);
    held_ = true;
}

DirLock::~DirLock() {
    if (held_) std::remove(path_.c_str());
}

}  // namespace crisp
