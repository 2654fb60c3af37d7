#pragma once

// Little-endian byte streams shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "voxrefine/error.hpp"

namespace voxrefine::binio {

class Writer {
public:
    void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) { put(v); }
    void u64(std::uint64_t v) { put(v); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
    void raw(const std::uint8_t* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    /// Throws IoError on failure.
    void save(const std::filesystem::path& path) const;

private:
    template <typename U>
    void put(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    Reader(std::vector<std::uint8_t> bytes, std::string name) : bytes_(std::move(bytes)), name_(std::move(name)) {}

    /// Throws IoError if the file cannot be read.
    static Reader open(const std::filesystem::path& path);

    void expect_magic(std::string_view m);
    std::uint8_t u8() { need(1); return bytes_[pos_++]; }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    void raw(std::uint8_t* out, std::size_t n) {
        need(n);
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }

    bool at_end() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    const std::string& name() const { return name_; }

    /// Throws FormatError when trailing bytes remain.
    void expect_end() const;

    [[noreturn]] void fail(const std::string& what) const { throw FormatError(name_, what); }

private:
    void need(std::size_t n) const {
        if (remaining() < n) fail("truncated (needed " + std::to_string(n) + " more bytes at offset " + std::to_string(pos_) + ")");
    }

    template <typename U>
    U get() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }

    std::vector<std::uint8_t> bytes_;
    std::string name_;
    std::size_t pos_ = 0;
};

}  // namespace voxrefine::binio
