#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sdacs/haar.hpp"
#include "sdacs/image.hpp"
#include "sdacs/numeric.hpp"
#include "sdacs/prng.hpp"

namespace sdacs {

// Exactly k-sparse signal in the Haar domain whose pixel representation stays
// inside [0, 1]: the support always contains the DC coefficient (anchored at
// mean 0.5) plus k-1 random detail coefficients with amplitudes +-U[0.5, 1.5],
// scaled so the detail part peaks at 0.45.
struct SparseSignal {
    Vector x;       // pixel domain, dim size^2, values in [0.05, 0.95]
    Vector coeffs;  // Haar domain, exactly k nonzeros
};

inline SparseSignal sparse_haar_signal(const HaarBasis& basis, std::size_t k, Prng& rng) {
    const std::size_t n = basis.size * basis.size;
    if (k < 1 || k > n) throw std::invalid_argument("sparse_haar_signal: need 1 <= k <= n");

    Vector details(n, 0.0);
    if (k > 1) {
        std::vector<std::size_t> support;
        support.reserve(k - 1);
        while (support.size() < k - 1) {
            const std::size_t idx = 1 + static_cast<std::size_t>(rng.next_u64() % (n - 1));
            if (std::find(support.begin(), support.end(), idx) == support.end())
                support.push_back(idx);
        }
        for (std::size_t idx : support) {
            const double mag = 0.5 + rng.next_uniform();
            details[idx] = rng.next_uniform() < 0.5 ? -mag : mag;
        }
        const Vector xd = haar_inverse(details, basis);
        double peak = 0.0;
        for (double v : xd) peak = std::max(peak, std::abs(v));
        const double beta = peak > 0.0 ? 0.45 / peak : 0.0;
        for (auto& v : details) v *= beta;
    }

    SparseSignal sig;
    sig.coeffs = std::move(details);
    sig.coeffs[0] = 0.5 * static_cast<double>(basis.size);  // DC: constant 0.5
    sig.x = haar_inverse(sig.coeffs, basis);
    return sig;
}

// Synthetic grayscale image with the ingredients of natural scenes: a random
// linear ramp, Gaussian bumps, soft-edged rectangles, and windowed oriented
// gratings, affinely normalized into [0.05, 0.95]. Edges and texture keep the
// patch set from collapsing onto a low-dimensional manifold.
inline GrayImage synthetic_image(std::size_t size, Prng& rng) {
    GrayImage img(size, size);
    const double fsize = static_cast<double>(size);
    const double gx = rng.next_uniform() - 0.5;
    const double gy = rng.next_uniform() - 0.5;

    const std::size_t bumps = 3 + static_cast<std::size_t>(rng.next_u64() % 5);
    std::vector<double> bx(bumps), by(bumps), bamp(bumps), binv(bumps);
    for (std::size_t b = 0; b < bumps; ++b) {
        bx[b] = rng.next_uniform() * fsize;
        by[b] = rng.next_uniform() * fsize;
        bamp[b] = (rng.next_uniform() - 0.5) * 1.2;
        const double sigma = (0.05 + 0.20 * rng.next_uniform()) * fsize;
        binv[b] = 1.0 / (2.0 * sigma * sigma);
    }

    // Soft-edged rectangles: product of sigmoid edge profiles.
    const std::size_t rects = 1 + static_cast<std::size_t>(rng.next_u64() % 3);
    std::vector<double> r0(rects), r1(rects), c0(rects), c1(rects), ramp(rects), redge(rects);
    for (std::size_t k = 0; k < rects; ++k) {
        const double h = (0.1 + 0.4 * rng.next_uniform()) * fsize;
        const double w = (0.1 + 0.4 * rng.next_uniform()) * fsize;
        r0[k] = rng.next_uniform() * (fsize - h);
        r1[k] = r0[k] + h;
        c0[k] = rng.next_uniform() * (fsize - w);
        c1[k] = c0[k] + w;
        ramp[k] = (rng.next_uniform() - 0.5) * 1.4;
        redge[k] = 0.8 + 2.0 * rng.next_uniform();  // edge softness in pixels
    }

    // Gaussian-windowed oriented gratings (local texture). Enough of them at
    // mixed frequencies that the patch set does not collapse onto a
    // low-dimensional manifold.
    const std::size_t waves = 6 + static_cast<std::size_t>(rng.next_u64() % 7);
    std::vector<double> wx(waves), wy(waves), wfx(waves), wfy(waves), wamp(waves), wph(waves),
        winv(waves);
    for (std::size_t k = 0; k < waves; ++k) {
        wx[k] = rng.next_uniform() * fsize;
        wy[k] = rng.next_uniform() * fsize;
        const double freq = (3.0 + 21.0 * rng.next_uniform()) * 2.0 * 3.14159265358979 / fsize;
        const double theta = rng.next_uniform() * 3.14159265358979;
        wfx[k] = freq * std::cos(theta);
        wfy[k] = freq * std::sin(theta);
        wamp[k] = (0.10 + 0.25 * rng.next_uniform()) * (rng.next_uniform() < 0.5 ? -1.0 : 1.0);
        wph[k] = rng.next_uniform() * 2.0 * 3.14159265358979;
        const double sigma = (0.06 + 0.20 * rng.next_uniform()) * fsize;
        winv[k] = 1.0 / (2.0 * sigma * sigma);
    }

    double lo = 1e300, hi = -1e300;
    for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t c = 0; c < size; ++c) {
            const double fr = static_cast<double>(r);
            const double fc = static_cast<double>(c);
            double v = gx * fc / fsize + gy * fr / fsize;
            for (std::size_t b = 0; b < bumps; ++b) {
                const double dr = fr - by[b];
                const double dc = fc - bx[b];
                v += bamp[b] * std::exp(-(dr * dr + dc * dc) * binv[b]);
            }
            for (std::size_t k = 0; k < rects; ++k) {
                const double e = redge[k];
                const double inside = sigmoid((fr - r0[k]) / e) * sigmoid((r1[k] - fr) / e) *
                                      sigmoid((fc - c0[k]) / e) * sigmoid((c1[k] - fc) / e);
                v += ramp[k] * inside;
            }
            for (std::size_t k = 0; k < waves; ++k) {
                const double dr = fr - wy[k];
                const double dc = fc - wx[k];
                v += wamp[k] * std::exp(-(dr * dr + dc * dc) * winv[k]) *
                     std::cos(wfx[k] * dc + wfy[k] * dr + wph[k]);
            }
            img.at(r, c) = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (auto& v : img.pixels) v = 0.05 + 0.9 * (v - lo) / span;
    return img;
}

// count x patch_size^2 matrix of non-overlapping patches cut from synthetic
// images (one flattened patch per row).
inline Matrix synthetic_patches(std::size_t count, std::size_t patch_size, Prng& rng,
                                std::size_t image_size = 256) {
    Matrix out(count, patch_size * patch_size);
    std::size_t filled = 0;
    while (filled < count) {
        const GrayImage img = synthetic_image(image_size, rng);
        const PatchBatch batch = extract_patches(img, patch_size, patch_size);
        for (const Vector& patch : batch.patches) {
            if (filled == count) break;
            for (std::size_t j = 0; j < patch.size(); ++j) out(filled, j) = patch[j];
            ++filled;
        }
    }
    return out;
}

}  // namespace sdacs
