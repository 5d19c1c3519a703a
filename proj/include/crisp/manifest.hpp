#ifndef CRISP_MANIFEST_HPP
#define CRISP_MANIFEST_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace crisp {

// FNV-1a over the file bytes, as a 16-hex-digit string.
std::string hash_file(const std::string& path);
std::string hash_bytes(const void* data, std::size_t size);

// Append-only record of pipeline stages in one artifact directory. Each
// command appends an entry with its resolved configuration and the hashes of
// everything it read and wrote, making runs auditable and resumable.
class RunManifest {
public:
    struct Entry {
        std::string command;
        std::string config_hash;
        std::vector<std::pair<std::string, std::string>> config;   // resolved key/value
        std::vector<std::pair<std::string, std::string>> inputs;   // path -> hash
        std::vector<std::pair<std::string, std::string>> outputs;  // path -> hash
        std::uint64_t wall_ms = 0;
    };

    // Loads <dir>/manifest.jsonl when present.
    explicit RunManifest(const std::string& dir);

    const std::vector<Entry>& entries() const { return entries_; }

    // Fatal (with a remediation hint) when the file was recorded as a stage
    // output and its content hash has drifted since.
    void verify_input(const std::string& path) const;

    void append(Entry entry);

private:
    std::string manifest_path() const;

    std::string dir_;
    std::vector<Entry> entries_;
    std::map<std::string, std::string> latest_output_hash_;
};

// Exclusive artifact-directory lock (<dir>/.crisp.lock), released on
// destruction. Refuses to start when another process holds the lock.
class DirLock {
public:
    explicit DirLock(const std::string& dir);
    ~DirLock();

    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    std::string path_;
    bool held_ = false;
};

}  // namespace crisp

#endif  // CRISP_MANIFEST_HPP
