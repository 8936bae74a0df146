#pragma once
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sdacs/numeric.hpp"

namespace sdacs {

// Orthonormal 2-D Haar transform on size x size patches flattened row-major.
// Each level runs the 1-D pair step (a,b) -> ((a+b)/sqrt2, (a-b)/sqrt2) over
// rows then columns of the current approximation block.
struct HaarBasis {
    std::size_t size = 0;    // power of two, >= 2
    std::size_t levels = 0;  // 1 .. log2(size)
};

inline std::size_t haar_max_levels(std::size_t size) {
    std::size_t lev = 0;
    while (size > 1) {
        size >>= 1;
        ++lev;
    }
    return lev;
}

inline HaarBasis make_haar_basis(std::size_t size, std::size_t levels) {
    if (size < 2 || (size & (size - 1)) != 0)
        throw std::invalid_argument("HaarBasis: size must be a power of two >= 2");
    if (levels < 1 || levels > haar_max_levels(size))
        throw std::invalid_argument("HaarBasis: levels must be in [1, log2(size)]");
    return {size, levels};
}

// Full-depth basis for n = size^2 coefficients.
inline HaarBasis full_haar_basis(std::size_t size) {
    return make_haar_basis(size, haar_max_levels(size));
}

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// One analysis step over len entries at the given stride.
inline void haar_step_fwd(double* v, std::size_t len, std::size_t stride,
                          std::vector<double>& scratch) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
        const double a = v[(2 * i) * stride];
        const double b = v[(2 * i + 1) * stride];
        scratch[i] = (a + b) * kInvSqrt2;
        scratch[half + i] = (a - b) * kInvSqrt2;
    }
    for (std::size_t i = 0; i < len; ++i) v[i * stride] = scratch[i];
}

// One synthesis step (exact inverse of haar_step_fwd).
inline void haar_step_inv(double* v, std::size_t len, std::size_t stride,
                          std::vector<double>& scratch) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
        const double lo = v[i * stride];
        const double hi = v[(half + i) * stride];
        scratch[2 * i] = (lo + hi) * kInvSqrt2;
        scratch[2 * i + 1] = (lo - hi) * kInvSqrt2;
    }
    for (std::size_t i = 0; i < len; ++i) v[i * stride] = scratch[i];
}

}  // namespace detail

// Analysis: patch values -> wavelet coefficients (Psi^T x).
inline Vector haar_forward(const Vector& x, const HaarBasis& basis) {
    const std::size_t s = basis.size;
    if (x.size() != s * s) throw std::invalid_argument("haar_forward: x must have dim size^2");
    Vector out = x;
    std::vector<double> scratch(s);
    for (std::size_t lev = 0; lev < basis.levels; ++lev) {
        const std::size_t t = s >> lev;
        for (std::size_t r = 0; r < t; ++r)
            detail::haar_step_fwd(out.data() + r * s, t, 1, scratch);
        for (std::size_t c = 0; c < t; ++c)
            detail::haar_step_fwd(out.data() + c, t, s, scratch);
    }
    return out;
}

// Synthesis: wavelet coefficients -> patch values (Psi s).
inline Vector haar_inverse(const Vector& coeffs, const HaarBasis& basis) {
    const std::size_t s = basis.size;
    if (coeffs.size() != s * s)
        throw std::invalid_argument("haar_inverse: coeffs must have dim size^2");
    Vector out = coeffs;
    std::vector<double> scratch(s);
    for (std::size_t lev = basis.levels; lev-- > 0;) {
        const std::size_t t = s >> lev;
        for (std::size_t c = 0; c < t; ++c)
            detail::haar_step_inv(out.data() + c, t, s, scratch);
        for (std::size_t r = 0; r < t; ++r)
            detail::haar_step_inv(out.data() + r * s, t, 1, scratch);
    }
    return out;
}

}  // namespace sdacs
