#pragma once
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "sdacs/errors.hpp"
#include "sdacs/numeric.hpp"

namespace sdacs::detail {

// Explicit little-endian encoding keeps the on-disk formats bit-exact across
// platforms regardless of host byte order.

inline void write_u32le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {
        static_cast<unsigned char>(v & 0xff),
        static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff),
        static_cast<unsigned char>((v >> 24) & 0xff),
    };
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64le(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f64le(std::ostream& os, double v) {
    write_u64le(os, std::bit_cast<std::uint64_t>(v));
}

inline void write_u8(std::ostream& os, std::uint8_t v) {
    os.write(reinterpret_cast<const char*>(&v), 1);
}

inline void read_exact(std::istream& is, void* dst, std::size_t len, const char* what) {
    is.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(is.gcount()) != len)
        throw TruncatedFileError(std::string("truncated file while reading ") + what);
}

inline std::uint32_t read_u32le(std::istream& is, const char* what) {
    unsigned char b[4];
    read_exact(is, b, 4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t read_u64le(std::istream& is, const char* what) {
    unsigned char b[8];
    read_exact(is, b, 8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double read_f64le(std::istream& is, const char* what) {
    return std::bit_cast<double>(read_u64le(is, what));
}

inline std::uint8_t read_u8(std::istream& is, const char* what) {
    std::uint8_t v = 0;
    read_exact(is, &v, 1, what);
    return v;
}

inline void write_doubles(std::ostream& os, const double* p, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) write_f64le(os, p[i]);
}

inline void read_doubles(std::istream& is, double* p, std::size_t count, const char* what) {
    // Bulk read, then byte-swap if the host is big-endian.
    read_exact(is, p, count * sizeof(double), what);
    if constexpr (std::endian::native != std::endian::little) {
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t v = std::bit_cast<std::uint64_t>(p[i]);
            std::uint64_t r = 0;
            for (int b = 0; b < 8; ++b) r = (r << 8) | ((v >> (8 * b)) & 0xff);
            p[i] = std::bit_cast<double>(r);
        }
    }
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
    write_doubles(os, m.data.data(), m.data.size());
}

inline void write_vector(std::ostream& os, const Vector& v) {
    write_doubles(os, v.data(), v.size());
}

inline Matrix read_matrix(std::istream& is, std::size_t rows, std::size_t cols, const char* what) {
    Matrix m(rows, cols);
    read_doubles(is, m.data.data(), m.data.size(), what);
    if (!all_finite(m)) throw FormatError(std::string("non-finite values in ") + what);
    return m;
}

inline Vector read_vector(std::istream& is, std::size_t dim, const char* what) {
    Vector v(dim);
    read_doubles(is, v.data(), dim, what);
    if (!all_finite(v)) throw FormatError(std::string("non-finite values in ") + what);
    return v;
}

inline void expect_eof(std::istream& is, const char* what) {
    char c;
    is.read(&c, 1);
    if (!is.eof()) throw FormatError(std::string("trailing bytes after ") + what);
}

}  // namespace sdacs::detail
