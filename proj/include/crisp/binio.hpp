#ifndef CRISP_BINIO_HPP
#define CRISP_BINIO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "crisp/error.hpp"

namespace crisp {

// Little-endian binary file I/O. All artifact formats are little-endian on
// disk; readers report the byte offset of the first bad byte on failure.

class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw DataError("cannot open for writing: " + path);
    }

    void magic(const char tag[5]) { raw(tag, 4); }

    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        raw(b, 4);
    }

    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        raw(b, 8);
    }

    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }

    void f32_array(const float* data, std::size_t n) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(data, n * 4);
        } else {
            for (std::size_t i = 0; i < n; ++i) f32(data[i]);
        }
    }

    void close() {
        out_.close();
        if (!out_) throw DataError("write failed: " + path_);
    }

private:
    void raw(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!out_) throw DataError("write failed: " + path_);
    }

    std::string path_;
    std::ofstream out_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::string& path)
        : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw DataError("cannot open: " + path);
    }

    const std::string& path() const { return path_; }
    std::uint64_t offset() const { return offset_; }

    // Reads 4 bytes and compares against the expected format tag.
    void expect_magic(const char* tag) {
        char got[5] = {0, 0, 0, 0, 0};
        raw(got, 4, "magic");
        if (std::memcmp(got, tag, 4) != 0) {
            throw DataError(path_ + ": bad magic, expected '" + tag + "' (not a " +
                            tag + " artifact)");
        }
    }

    std::uint32_t u32() {
        unsigned char b[4];
        raw(b, 4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        unsigned char b[8];
        raw(b, 8, "u64");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }

    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    void f32_array(float* out, std::size_t n) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(out, n * 4, "f32 array");
        } else {
            for (std::size_t i = 0; i < n; ++i) out[i] = f32();
        }
    }

    // True when the stream is exactly at end of file.
    bool at_eof() {
        if (in_.peek() == std::char_traits<char>::eof()) return true;
        return false;
    }

private:
    void raw(void* dst, std::size_t n, const char* what) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw DataError(path_ + ": truncated " + what + " at byte offset " +
                            std::to_string(offset_));
        }
        offset_ += n;
    }

    std::string path_;
    std::ifstream in_;
    std::uint64_t offset_ = 0;
};

}  // namespace crisp

#endif  // CRISP_BINIO_HPP
