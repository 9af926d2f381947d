#include "axrx/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace axrx {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void ByteWriter::put(T v) {
    std::array<std::uint8_t, sizeof(T)> raw{};
    std::memcpy(raw.data(), &v, sizeof(T));
    buf_.insert(buf_.end(), raw.begin(), raw.end());
}

void ByteWriter::magic(std::string_view tag) { buf_.insert(buf_.end(), tag.begin(), tag.end()); }
void ByteWriter::u8(std::uint8_t v) { put(v); }
void ByteWriter::u16(std::uint16_t v) { put(v); }
void ByteWriter::u32(std::uint32_t v) { put(v); }
void ByteWriter::u64(std::uint64_t v) { put(v); }
void ByteWriter::f32(float v) { put(v); }
void ByteWriter::f64(double v) { put(v); }

void ByteWriter::str(std::string_view s) {
    if (s.size() > 0xFFFF) throw std::invalid_argument("string too long for u16 length prefix");
    u16(static_cast<std::uint16_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
}

ByteReader::ByteReader(std::vector<std::uint8_t> bytes, std::string what)
    : buf_(std::move(bytes)), what_(std::move(what)) {}

void ByteReader::need(std::size_t n) const {
    if (buf_.size() - pos_ < n)
        throw FormatError(FormatError::Kind::kTruncated,
                          what_ + ": truncated at byte " + std::to_string(pos_) + " (needed " + std::to_string(n) +
                              " more, " + std::to_string(buf_.size() - pos_) + " available)");
}

template <typename T>
T ByteReader::get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
}

void ByteReader::expect_magic(std::string_view tag) {
    if (buf_.size() - pos_ < tag.size()) {
        if (buf_.empty()) throw FormatError(FormatError::Kind::kTruncated, what_ + ": truncated (empty file)");
        if (std::memcmp(buf_.data() + pos_, tag.data(), buf_.size() - pos_) != 0)
            throw FormatError(FormatError::Kind::kBadMagic, what_ + ": bad magic, expected \"" + std::string(tag) + "\"");
        need(tag.size());
    }
    if (std::memcmp(buf_.data() + pos_, tag.data(), tag.size()) != 0)
        throw FormatError(FormatError::Kind::kBadMagic, what_ + ": bad magic, expected \"" + std::string(tag) + "\"");
    pos_ += tag.size();
}

void ByteReader::expect_version(std::uint16_t supported) {
    const auto v = u16();
    if (v != supported)
        throw FormatError(FormatError::Kind::kVersionMismatch,
                          what_ + ": version mismatch, file has " + std::to_string(v) + ", reader supports " +
                              std::to_string(supported));
}

std::uint8_t ByteReader::u8() { return get<std::uint8_t>(); }
std::uint16_t ByteReader::u16() { return get<std::uint16_t>(); }
std::uint32_t ByteReader::u32() { return get<std::uint32_t>(); }
std::uint64_t ByteReader::u64() { return get<std::uint64_t>(); }
float ByteReader::f32() { return get<float>(); }
double ByteReader::f64() { return get<double>(); }

std::string ByteReader::str() {
    const auto n = u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
}

void ByteReader::expect_end() const {
    if (!at_end())
        throw FormatError(FormatError::Kind::kInvalidContent,
                          what_ + ": " + std::to_string(buf_.size() - pos_) + " trailing bytes");
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw FormatError(FormatError::Kind::kIo, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace axrx
