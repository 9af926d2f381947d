#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace axrx {

/// Failure to decode one of the toolkit's binary file formats.
class FormatError : public std::runtime_error {
public:
    enum class Kind { kBadMagic, kTruncated, kVersionMismatch, kInvalidContent, kIo };

    FormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// Little-endian encoder into an in-memory buffer.
class ByteWriter {
public:
    void magic(std::string_view tag);
    void u8(std::uint8_t v);
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    void str(std::string_view s);  // u16 length prefix, raw bytes

    const std::vector<std::uint8_t>& bytes() const { return buf_; }

private:
    template <typename T>
    void put(T v);
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(std::vector<std::uint8_t> bytes, std::string what);

    void expect_magic(std::string_view tag);
    void expect_version(std::uint16_t supported);
    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    std::string str();

    bool at_end() const { return pos_ == buf_.size(); }
    void expect_end() const;

private:
    template <typename T>
    T get();
    void need(std::size_t n) const;

    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace axrx
