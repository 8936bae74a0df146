#pragma once
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sdacs/image.hpp"
#include "sdacs/ista.hpp"
#include "sdacs/measurement.hpp"
#include "sdacs/model.hpp"
#include "sdacs/parallel.hpp"

namespace sdacs {

// Patch edge length for a model of ambient dimension n.
inline std::size_t patch_size_for(std::size_t n) {
    const auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (s * s != n)
        throw std::invalid_argument("model dimension n is not a square patch size");
    return s;
}

inline std::vector<Vector> measure_patches(const LinearOperator& op,
                                           const std::vector<Vector>& patches) {
    std::vector<Vector> ys(patches.size());
    for (std::size_t i = 0; i < patches.size(); ++i) ys[i] = measure(op, patches[i]);
    return ys;
}

// Patch recoveries are independent; parallel runs fill disjoint slots and the
// later reassembly order is fixed, so output is identical for any thread
// count. Benchmarks pass threads = 1 so per-patch times stay comparable.
inline std::vector<Vector> recover_patches_l(const LinearSda& model,
                                             const std::vector<Vector>& ys,
                                             std::size_t threads = 1) {
    std::vector<Vector> out(ys.size());
    parallel::parallel_for(ys.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out[i] = forward_l(model, ys[i]);
    });
    return out;
}

inline std::vector<Vector> recover_patches_nl(const NonlinearSda& model,
                                              const std::vector<Vector>& xs,
                                              std::size_t threads = 1) {
    std::vector<Vector> out(xs.size());
    parallel::parallel_for(xs.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out[i] = forward_nl(model, xs[i]).xhat;
    });
    return out;
}

inline std::vector<Vector> recover_patches_ista(const LinearOperator& op, const HaarBasis& basis,
                                                const IstaConfig& cfg,
                                                const std::vector<Vector>& ys,
                                                std::size_t threads = 1) {
    // The auto step depends only on the operator; hoist it out of the loop.
    IstaConfig fixed = cfg;
    if (fixed.step == 0.0) fixed.step = 1.0 / (1.05 * estimate_max_eigenvalue(op));
    std::vector<Vector> out(ys.size());
    parallel::parallel_for(ys.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) out[i] = ista_recover(ys[i], op, basis, fixed).xhat;
    });
    return out;
}

namespace detail {

inline GrayImage reassemble_recovered(const PatchBatch& geometry, std::vector<Vector> recovered,
                                      std::size_t height, std::size_t width) {
    PatchBatch out;
    out.patch_size = geometry.patch_size;
    out.stride = geometry.stride;
    out.origins = geometry.origins;
    out.patches = std::move(recovered);
    return reassemble(out, height, width);
}

}  // namespace detail

// Overlap-averaged full-image recovery: sense each overlapping patch with the
// fixed operator, push the measurements through the network, average.
inline GrayImage recover_image_l(const LinearSda& model, const LinearOperator& op,
                                 const GrayImage& img, std::size_t stride,
                                 std::size_t threads = 1) {
    if (op.n != model.n || op.m != model.m)
        throw std::invalid_argument("recover_image_l: operator does not match model dims");
    const std::size_t p = patch_size_for(model.n);
    const PatchBatch batch = extract_patches(img, p, stride);
    const auto ys = measure_patches(op, batch.patches);
    auto recovered = recover_patches_l(model, ys, threads);
    return detail::reassemble_recovered(batch, std::move(recovered), img.height, img.width);
}

inline GrayImage recover_image_nl(const NonlinearSda& model, const GrayImage& img,
                                  std::size_t stride, std::size_t threads = 1) {
    const std::size_t p = patch_size_for(model.n);
    const PatchBatch batch = extract_patches(img, p, stride);
    auto recovered = recover_patches_nl(model, batch.patches, threads);
    return detail::reassemble_recovered(batch, std::move(recovered), img.height, img.width);
}

inline GrayImage recover_image_ista(const LinearOperator& op, const HaarBasis& basis,
                                    const IstaConfig& cfg, const GrayImage& img,
                                    std::size_t stride, std::size_t threads = 1) {
    const std::size_t p = basis.size;
    if (op.n != p * p) throw std::invalid_argument("recover_image_ista: operator/basis mismatch");
    const PatchBatch batch = extract_patches(img, p, stride);
    const auto ys = measure_patches(op, batch.patches);
    auto recovered = recover_patches_ista(op, basis, cfg, ys, threads);
    return detail::reassemble_recovered(batch, std::move(recovered), img.height, img.width);
}

}  // namespace sdacs
