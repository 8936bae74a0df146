#pragma once
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdacs/errors.hpp"
#include "sdacs/numeric.hpp"

namespace sdacs {

// Grayscale image with pixel intensities in [0, 1], row-major.
struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(std::size_t h, std::size_t w) : height(h), width(w), pixels(h * w, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
    double at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
};

// Flattened patches plus their source coordinates. Patches are row-major
// within the patch; origins are (row, col) of the top-left corner.
struct PatchBatch {
    std::size_t patch_size = 0;
    std::size_t stride = 0;
    std::vector<Vector> patches;
    std::vector<std::pair<std::size_t, std::size_t>> origins;
};

namespace detail {

inline void skip_pgm_ws(const std::string& buf, std::size_t& pos) {
    while (pos < buf.size()) {
        const char c = buf[pos];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else if (c == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
}

inline std::size_t parse_pgm_uint(const std::string& buf, std::size_t& pos, const char* what) {
    skip_pgm_ws(buf, pos);
    if (pos >= buf.size() || buf[pos] < '0' || buf[pos] > '9')
        throw FormatError(std::string("malformed PGM header: expected ") + what);
    std::size_t v = 0;
    while (pos < buf.size() && buf[pos] >= '0' && buf[pos] <= '9') {
        v = v * 10 + static_cast<std::size_t>(buf[pos] - '0');
        if (v > 0xffffffffu) throw FormatError(std::string("PGM header field too large: ") + what);
        ++pos;
    }
    return v;
}

}  // namespace detail

// Binary PGM (P5) reader. maxval up to 65535 (two-byte big-endian samples
// above 255, per the PNM convention); pixels are mapped to [0, 1] by dividing
// by maxval.
inline GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

    if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5')
        throw BadMagicError("unsupported image magic (want binary PGM \"P5\"): " + path.string());
    std::size_t pos = 2;
    const std::size_t width = detail::parse_pgm_uint(buf, pos, "width");
    const std::size_t height = detail::parse_pgm_uint(buf, pos, "height");
    const std::size_t maxval = detail::parse_pgm_uint(buf, pos, "maxval");
    if (width == 0 || height == 0) throw FormatError("PGM dimensions must be positive");
    if (maxval == 0 || maxval > 65535) throw FormatError("PGM maxval must be in [1, 65535]");
    if (pos >= buf.size() || !(buf[pos] == ' ' || buf[pos] == '\t' || buf[pos] == '\r' ||
                               buf[pos] == '\n'))
        throw FormatError("PGM header must end with a single whitespace byte");
    ++pos;

    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    const std::size_t need = height * width * bytes_per;
    if (buf.size() - pos < need) throw TruncatedFileError("PGM pixel data truncated");
    if (buf.size() - pos > need) throw FormatError("trailing bytes after PGM pixel data");

    GrayImage img(height, width);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data()) + pos;
    const double inv = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < height * width; ++i) {
        std::size_t sample;
        if (bytes_per == 1) {
            sample = p[i];
        } else {
            sample = (static_cast<std::size_t>(p[2 * i]) << 8) | p[2 * i + 1];
        }
        if (sample > maxval) throw FormatError("PGM sample exceeds maxval");
        img.pixels[i] = static_cast<double>(sample) * inv;
    }
    return img;
}

// Binary PGM (P5) writer, maxval 255; pixel byte = round(value * 255)
// clamped to [0, 255].
inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    if (img.height == 0 || img.width == 0 || img.pixels.size() != img.height * img.width)
        throw std::invalid_argument("save_pgm: malformed image");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> bytes(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const long v = std::lround(img.pixels[i] * 255.0);
        bytes[i] = static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
    }
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed: " + path.string());
}

// size x size region centered in img; centering offsets are floored.
inline GrayImage central_crop(const GrayImage& img, std::size_t size) {
    if (size == 0 || img.height < size || img.width < size)
        throw std::invalid_argument("central_crop: image smaller than crop size");
    const std::size_t r0 = (img.height - size) / 2;
    const std::size_t c0 = (img.width - size) / 2;
    GrayImage out(size, size);
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) out.at(r, c) = img.at(r0 + r, c0 + c);
    return out;
}

// Patches at origins (i*stride, j*stride) for every placement fully inside
// the image. stride == patch_size tiles without overlap (training); smaller
// strides overlap (testing).
inline PatchBatch extract_patches(const GrayImage& img, std::size_t patch_size,
                                  std::size_t stride) {
    if (patch_size == 0 || patch_size > img.height || patch_size > img.width)
        throw std::invalid_argument("extract_patches: patch_size must fit inside the image");
    if (stride < 1 || stride > patch_size)
        throw std::invalid_argument("extract_patches: need 1 <= stride <= patch_size");
    PatchBatch batch;
    batch.patch_size = patch_size;
    batch.stride = stride;
    for (std::size_t r0 = 0; r0 + patch_size <= img.height; r0 += stride) {
        for (std::size_t c0 = 0; c0 + patch_size <= img.width; c0 += stride) {
            Vector patch(patch_size * patch_size);
            for (std::size_t r = 0; r < patch_size; ++r)
                for (std::size_t c = 0; c < patch_size; ++c)
                    patch[r * patch_size + c] = img.at(r0 + r, c0 + c);
            batch.patches.push_back(std::move(patch));
            batch.origins.emplace_back(r0, c0);
        }
    }
    return batch;
}

// Each pixel becomes the arithmetic mean of every patch value covering it.
// A pixel covered by no patch signals bad stride geometry and is an error.
inline GrayImage reassemble(const PatchBatch& batch, std::size_t height, std::size_t width) {
    if (batch.patches.size() != batch.origins.size())
        throw std::invalid_argument("reassemble: patches/origins length mismatch");
    const std::size_t p = batch.patch_size;
    std::vector<double> sum(height * width, 0.0);
    std::vector<std::uint32_t> count(height * width, 0);
    for (std::size_t k = 0; k < batch.patches.size(); ++k) {
        const auto [r0, c0] = batch.origins[k];
        const Vector& patch = batch.patches[k];
        if (patch.size() != p * p)
            throw std::invalid_argument("reassemble: patch has wrong dimension");
        if (r0 + p > height || c0 + p > width)
            throw std::invalid_argument("reassemble: patch exceeds image bounds");
        for (std::size_t r = 0; r < p; ++r) {
            const std::size_t base = (r0 + r) * width + c0;
            for (std::size_t c = 0; c < p; ++c) {
                sum[base + c] += patch[r * p + c];
                count[base + c] += 1;
            }
        }
    }
    GrayImage out(height, width);
    for (std::size_t i = 0; i < sum.size(); ++i) {
        if (count[i] == 0) throw std::invalid_argument("reassemble: uncovered pixel");
        out.pixels[i] = sum[i] / static_cast<double>(count[i]);
    }
    return out;
}

// Patch rows stacked into a count x patch_size^2 matrix.
inline Matrix patches_matrix(const PatchBatch& batch) {
    const std::size_t d = batch.patch_size * batch.patch_size;
    Matrix m(batch.patches.size(), d);
    for (std::size_t i = 0; i < batch.patches.size(); ++i) {
        const Vector& v = batch.patches[i];
        if (v.size() != d) throw std::invalid_argument("patches_matrix: inconsistent patch dims");
        for (std::size_t j = 0; j < d; ++j) m(i, j) = v[j];
    }
    return m;
}

}  // namespace sdacs
