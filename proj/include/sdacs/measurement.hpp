#pragma once
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "sdacs/numeric.hpp"
#include "sdacs/prng.hpp"

namespace sdacs {

// Under-sampling ratio delta = M/N in (0, 1].
struct UndersamplingRatio {
    double value;

    explicit UndersamplingRatio(double d) : value(d) {
        if (!(d > 0.0) || d > 1.0)
            throw std::invalid_argument("UndersamplingRatio: delta must be in (0, 1]");
    }
};

// Fixed Gaussian sensing matrix Phi (m x n). Entries are i.i.d. N(0, 1/m) so
// E||Phi x||^2 == ||x||^2 and measurements of [0,1] patches stay in a range
// the sigmoid first layer does not saturate on. Regenerating from
// (m, n, seed) reproduces the entries bit-exactly.
struct LinearOperator {
    std::size_t m = 0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    Matrix phi;

    double delta() const { return static_cast<double>(m) / static_cast<double>(n); }
};

inline LinearOperator sample_phi(std::size_t m, std::size_t n, std::uint64_t seed) {
    if (m < 1 || m > n)
        throw std::invalid_argument("sample_phi: need 1 <= m <= n");
    LinearOperator op;
    op.m = m;
    op.n = n;
    op.seed = seed;
    op.phi = Matrix(m, n);
    Prng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (auto& v : op.phi.data) v = scale * rng.next_normal();
    return op;
}

// y = Phi x.
inline Vector measure(const LinearOperator& op, const Vector& x) {
    if (x.size() != op.n) throw std::invalid_argument("measure: x must have dim n");
    Vector y(op.m);
    for (std::size_t i = 0; i < op.m; ++i) {
        const double* r = op.phi.row(i);
        double acc = 0.0;
        for (std::size_t k = 0; k < op.n; ++k) acc += r[k] * x[k];
        y[i] = acc;
    }
    return y;
}

// Phi^T v, used by the ISTA gradient step.
inline Vector measure_adjoint(const LinearOperator& op, const Vector& v) {
    if (v.size() != op.m) throw std::invalid_argument("measure_adjoint: v must have dim m");
    Vector out(op.n, 0.0);
    for (std::size_t i = 0; i < op.m; ++i) {
        const double* r = op.phi.row(i);
        const double vi = v[i];
        for (std::size_t j = 0; j < op.n; ++j) out[j] += vi * r[j];
    }
    return out;
}

// Batch of measurements, one sample per row of x (l x n) -> (l x m).
// Accumulation order per element matches measure(), so rows equal the
// per-sample results bit-for-bit.
inline Matrix measure_rows(const LinearOperator& op, const Matrix& x) {
    if (x.cols != op.n) throw std::invalid_argument("measure_rows: samples must have dim n");
    return gemm_abt(x, op.phi);
}

}  // namespace sdacs
