#pragma once

// Little-endian binary readers/writers shared by the on-disk formats. Values
// are assembled byte by byte so files are identical across platforms.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "xmodal/errors.hpp"

namespace xmodal::detail {

class BinWriter {
public:
    explicit BinWriter(const std::filesystem::path& path)
        : out_(path, std::ios::binary | std::ios::trunc), path_(path.string()) {
        if (!out_) {
            throw IoError("cannot open for writing: " + path_);
        }
    }

    void bytes(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    }

    void u8(uint8_t v) { bytes(&v, 1); }

    void u16(uint16_t v) {
        uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
        bytes(b, 2);
    }

    void u32(uint32_t v) {
        uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
        bytes(b, 4);
    }

    void u64(uint64_t v) {
        uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
        bytes(b, 8);
    }

    void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }

    void f32_array(const float* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) f32(data[i]);
    }

    /// u16 byte length followed by the raw bytes; throws if it does not fit.
    void str16(const std::string& s) {
        if (s.size() > 0xffff) {
            throw FormatError("string too long for 16-bit length field");
        }
        u16(static_cast<uint16_t>(s.size()));
        bytes(s.data(), s.size());
    }

    void finish() {
        out_.flush();
        if (!out_) {
            throw IoError("write failed: " + path_);
        }
    }

private:
    std::ofstream out_;
    std::string path_;
};

class BinReader {
public:
    explicit BinReader(const std::filesystem::path& path)
        : in_(path, std::ios::binary), path_(path.string()) {
        if (!in_) {
            throw IoError("cannot open for reading: " + path_);
        }
    }

    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw FormatError("unexpected end of file: " + path_);
        }
    }

    uint8_t u8() {
        uint8_t v;
        bytes(&v, 1);
        return v;
    }

    uint16_t u16() {
        uint8_t b[2];
        bytes(b, 2);
        return static_cast<uint16_t>(b[0] | (b[1] << 8));
    }

    uint32_t u32() {
        uint8_t b[4];
        bytes(b, 4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
        return v;
    }

    uint64_t u64() {
        uint8_t b[8];
        bytes(b, 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    void f32_array(float* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) data[i] = f32();
    }

    std::string str16() {
        const uint16_t len = u16();
        std::string s(len, '\0');
        if (len > 0) bytes(s.data(), len);
        return s;
    }

    void expect_magic(const char magic[4], const char* what) {
        char got[4];
        bytes(got, 4);
        if (std::memcmp(got, magic, 4) != 0) {
            throw FormatError(std::string("not a ") + what + " file: " + path_);
        }
    }

    /// True once every byte has been consumed.
    bool at_end() {
        return in_.peek() == std::char_traits<char>::eof();
    }

    void expect_end(const char* what) {
        if (!at_end()) {
            throw FormatError(std::string("trailing bytes after ") + what + ": " + path_);
        }
    }

    const std::string& path() const { return path_; }

private:
    std::ifstream in_;
    std::string path_;
};

}  // namespace xmodal::detail
