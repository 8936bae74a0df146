#pragma once
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "sdacs/errors.hpp"
#include "sdacs/io_detail.hpp"
#include "sdacs/numeric.hpp"

namespace sdacs {

// Patch dataset ("SDAP") layout, version 1:
//   magic "SDAP" | version u32 | patch_size u32 | count u32
//   | count x patch_size^2 row-major 64-bit little-endian floats
// Decouples slow image parsing from training loops.

inline constexpr char kDatasetMagic[4] = {'S', 'D', 'A', 'P'};
inline constexpr std::uint32_t kDatasetFormatVersion = 1;

struct PatchDataset {
    std::size_t patch_size = 0;
    Matrix patches;  // count x patch_size^2, one flattened patch per row
};

inline void save_dataset(const PatchDataset& ds, const std::filesystem::path& path) {
    if (ds.patch_size == 0 || ds.patches.cols != ds.patch_size * ds.patch_size)
        throw std::invalid_argument("save_dataset: patches must be count x patch_size^2");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write(kDatasetMagic, 4);
    detail::write_u32le(os, kDatasetFormatVersion);
    detail::write_u32le(os, static_cast<std::uint32_t>(ds.patch_size));
    detail::write_u32le(os, static_cast<std::uint32_t>(ds.patches.rows));
    detail::write_matrix(os, ds.patches);
    if (!os) throw IoError("write failed: " + path.string());
}

inline PatchDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    char magic[4];
    detail::read_exact(is, magic, 4, "magic");
    if (std::memcmp(magic, kDatasetMagic, 4) != 0)
        throw BadMagicError("not a patch dataset file (bad magic)");
    const std::uint32_t version = detail::read_u32le(is, "version");
    if (version != kDatasetFormatVersion)
        throw BadVersionError("unsupported dataset format version " + std::to_string(version));
    PatchDataset ds;
    ds.patch_size = detail::read_u32le(is, "patch_size");
    const std::size_t count = detail::read_u32le(is, "count");
    if (ds.patch_size == 0) throw BadDimensionError("dataset patch_size must be >= 1");
    if (count == 0) throw BadDimensionError("dataset contains no patches");
    ds.patches = detail::read_matrix(is, count, ds.patch_size * ds.patch_size, "patches");
    detail::expect_eof(is, "dataset payload");
    return ds;
}

}  // namespace sdacs
