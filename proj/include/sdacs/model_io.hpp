#pragma once
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>

#include "sdacs/errors.hpp"
#include "sdacs/io_detail.hpp"
#include "sdacs/measurement.hpp"
#include "sdacs/model.hpp"

namespace sdacs {

// Model file ("SDAM") layout, version 1:
//   magic "SDAM" | version u32 | arch u32 (1 = L-SDA, 2 = NL-SDA)
//   | activation u32 (0 = sigmoid, 1 = identity; must be 0 for arch 1)
//   | n u32 | m u32
//   | weight matrices and bias vectors in declared order,
//     row-major 64-bit little-endian floats
//   | operator flag u8 | if 1: op m u32, op n u32, op seed u64, entries
// All integers little-endian. Version 1 also pins the Prng algorithm
// (xoshiro256++/splitmix64, Box-Muller normals) that regenerates the operator
// from its seed.

inline constexpr char kModelMagic[4] = {'S', 'D', 'A', 'M'};
inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr std::uint32_t kArchLinear = 1;
inline constexpr std::uint32_t kArchNonlinear = 2;

using SdaModel = std::variant<LinearSda, NonlinearSda>;

struct LoadedModel {
    SdaModel model;
    std::optional<LinearOperator> op;
};

namespace detail {

inline void write_operator(std::ostream& os, const std::optional<LinearOperator>& op) {
    if (!op) {
        write_u8(os, 0);
        return;
    }
    write_u8(os, 1);
    write_u32le(os, static_cast<std::uint32_t>(op->m));
    write_u32le(os, static_cast<std::uint32_t>(op->n));
    write_u64le(os, op->seed);
    write_matrix(os, op->phi);
}

inline std::optional<LinearOperator> read_operator(std::istream& is, std::size_t model_n,
                                                   std::size_t model_m) {
    const std::uint8_t flag = read_u8(is, "operator flag");
    if (flag == 0) return std::nullopt;
    if (flag != 1) throw FormatError("operator flag must be 0 or 1");
    LinearOperator op;
    op.m = read_u32le(is, "operator m");
    op.n = read_u32le(is, "operator n");
    op.seed = read_u64le(is, "operator seed");
    if (op.m < 1 || op.m > op.n) throw BadDimensionError("operator dims: need 1 <= m <= n");
    if (op.m != model_m || op.n != model_n)
        throw BadDimensionError("embedded operator dims do not match the model");
    op.phi = read_matrix(is, op.m, op.n, "operator entries");
    return op;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    return os;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    return is;
}

}  // namespace detail

inline void save_model(const LinearSda& model, const std::optional<LinearOperator>& op,
                       const std::filesystem::path& path) {
    validate_shapes(model);
    auto os = detail::open_out(path);
    os.write(kModelMagic, 4);
    detail::write_u32le(os, kModelFormatVersion);
    detail::write_u32le(os, kArchLinear);
    detail::write_u32le(os, 0);  // L-SDA has no measurement activation
    detail::write_u32le(os, static_cast<std::uint32_t>(model.n));
    detail::write_u32le(os, static_cast<std::uint32_t>(model.m));
    detail::write_matrix(os, model.w1);
    detail::write_vector(os, model.b1);
    detail::write_matrix(os, model.w2);
    detail::write_vector(os, model.b2);
    detail::write_matrix(os, model.w3);
    detail::write_vector(os, model.b3);
    detail::write_operator(os, op);
    if (!os) throw IoError("write failed: " + path.string());
}

inline void save_model(const NonlinearSda& model, const std::optional<LinearOperator>& op,
                       const std::filesystem::path& path) {
    validate_shapes(model);
    auto os = detail::open_out(path);
    os.write(kModelMagic, 4);
    detail::write_u32le(os, kModelFormatVersion);
    detail::write_u32le(os, kArchNonlinear);
    detail::write_u32le(os, static_cast<std::uint32_t>(model.measurement_activation));
    detail::write_u32le(os, static_cast<std::uint32_t>(model.n));
    detail::write_u32le(os, static_cast<std::uint32_t>(model.m));
    detail::write_matrix(os, model.w1);
    detail::write_vector(os, model.b1);
    detail::write_matrix(os, model.w2);
    detail::write_vector(os, model.b2);
    detail::write_matrix(os, model.w3);
    detail::write_vector(os, model.b3);
    detail::write_matrix(os, model.w4);
    detail::write_vector(os, model.b4);
    detail::write_operator(os, op);
    if (!os) throw IoError("write failed: " + path.string());
}

inline void save_model(const SdaModel& model, const std::optional<LinearOperator>& op,
                       const std::filesystem::path& path) {
    if (const auto* l = std::get_if<LinearSda>(&model))
        save_model(*l, op, path);
    else
        save_model(std::get<NonlinearSda>(model), op, path);
}

inline LoadedModel load_model(const std::filesystem::path& path) {
    auto is = detail::open_in(path);
    char magic[4];
    detail::read_exact(is, magic, 4, "magic");
    if (std::memcmp(magic, kModelMagic, 4) != 0)
        throw BadMagicError("not a model file (bad magic)");
    const std::uint32_t version = detail::read_u32le(is, "version");
    if (version != kModelFormatVersion)
        throw BadVersionError("unsupported model format version " + std::to_string(version));
    const std::uint32_t arch = detail::read_u32le(is, "architecture tag");
    if (arch != kArchLinear && arch != kArchNonlinear)
        throw BadArchTagError("unknown architecture tag " + std::to_string(arch));
    const std::uint32_t act = detail::read_u32le(is, "activation");
    const std::size_t n = detail::read_u32le(is, "n");
    const std::size_t m = detail::read_u32le(is, "m");
    if (m < 1 || n <= m) throw BadDimensionError("model dims: need N > M >= 1");

    LoadedModel out{LinearSda{}, std::nullopt};
    if (arch == kArchLinear) {
        if (act != 0) throw FormatError("L-SDA file must have activation field 0");
        LinearSda model;
        model.n = n;
        model.m = m;
        model.w1 = detail::read_matrix(is, n, m, "w1");
        model.b1 = detail::read_vector(is, n, "b1");
        model.w2 = detail::read_matrix(is, m, n, "w2");
        model.b2 = detail::read_vector(is, m, "b2");
        model.w3 = detail::read_matrix(is, n, m, "w3");
        model.b3 = detail::read_vector(is, n, "b3");
        out.model = std::move(model);
    } else {
        if (act > 1) throw FormatError("unknown measurement activation " + std::to_string(act));
        NonlinearSda model;
        model.n = n;
        model.m = m;
        model.measurement_activation = static_cast<MeasurementActivation>(act);
        model.w1 = detail::read_matrix(is, m, n, "w1");
        model.b1 = detail::read_vector(is, m, "b1");
        model.w2 = detail::read_matrix(is, n, m, "w2");
        model.b2 = detail::read_vector(is, n, "b2");
        model.w3 = detail::read_matrix(is, m, n, "w3");
        model.b3 = detail::read_vector(is, m, "b3");
        model.w4 = detail::read_matrix(is, n, m, "w4");
        model.b4 = detail::read_vector(is, n, "b4");
        out.model = std::move(model);
    }
    out.op = detail::read_operator(is, n, m);
    detail::expect_eof(is, "model payload");
    return out;
}

}  // namespace sdacs
