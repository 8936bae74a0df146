#pragma once
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdacs/errors.hpp"
#include "sdacs/version.hpp"

namespace sdacs {

// FNV-1a 64-bit content digest; enough to pin run inputs in the manifest.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t file_fnv1a64(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (is) {
        is.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(is.gcount()), h);
    }
    return h;
}

namespace detail {

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace detail

// Run manifest: config echo, toolkit version, input digests, timestamp.
// Callers write it before producing any other output.
inline void write_manifest(const std::filesystem::path& path, const std::string& command,
                           const nlohmann::json& config,
                           const std::vector<std::filesystem::path>& inputs) {
    nlohmann::json j;
    j["toolkit_version"] = kToolkitVersion;
    j["command"] = command;
    j["config"] = config;
    j["created_utc"] = detail::utc_timestamp();
    j["inputs"] = nlohmann::json::array();
    for (const auto& in : inputs) {
        j["inputs"].push_back({{"path", in.string()}, {"fnv1a64", detail::hex64(file_fnv1a64(in))}});
    }
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << j.dump(2) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace sdacs
