#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "aad/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace aad {

// Thin little-endian binary writer over a stream.
class BinWriter {
public:
    explicit BinWriter(std::ostream& os) : os_(os) {}

    void bytes(const void* p, std::size_t n) {
        os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!os_) throw IoError("write failed");
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u16(std::uint16_t v) { bytes(&v, 2); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f32(float v) { bytes(&v, 4); }
    void f64(double v) { bytes(&v, 8); }
    void magic(const char m[4]) { bytes(m, 4); }

private:
    std::ostream& os_;
};

// Little-endian reader that tracks the byte offset for error reporting.
class BinReader {
public:
    explicit BinReader(std::istream& is, std::string what) : is_(is), what_(std::move(what)) {}

    std::size_t offset() const { return offset_; }

    void bytes(void* p, std::size_t n) {
        is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n)
            throw FormatError(what_ + ": truncated, expected " + std::to_string(n) +
                              " bytes at byte offset " + std::to_string(offset_) + ", got " +
                              std::to_string(is_.gcount()));
        offset_ += n;
    }
    std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
    std::uint16_t u16() { std::uint16_t v; bytes(&v, 2); return v; }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
    float f32() { float v; bytes(&v, 4); return v; }
    double f64() { double v; bytes(&v, 8); return v; }

    void expect_magic(const char m[4]) {
        char got[4];
        bytes(got, 4);
        if (std::memcmp(got, m, 4) != 0)
            throw FormatError(what_ + ": bad magic at byte offset 0, expected \"" +
                              std::string(m, 4) + "\"");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError(what_ + ": " + msg + " at byte offset " + std::to_string(offset_));
    }

    // every format is self-delimiting; trailing bytes mean a corrupt header
    void expect_eof() {
        if (is_.peek() != std::char_traits<char>::eof())
            throw FormatError(what_ + ": trailing bytes after byte offset " +
                              std::to_string(offset_));
    }

private:
    std::istream& is_;
    std::string what_;
    std::size_t offset_ = 0;
};

// Tagged array section: id (u16), rank (u8), dims (u32 each), f64 payload.
void write_tagged_array(BinWriter& w, std::uint16_t id, const std::vector<std::uint32_t>& dims,
                        const double* data, std::size_t n);

struct TaggedArray {
    std::uint16_t id = 0;
    std::vector<std::uint32_t> dims;
    std::vector<double> data;
};
TaggedArray read_tagged_array(BinReader& r);

}  // namespace aad
