#pragma once
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sdacs/parallel.hpp"
#include "sdacs/prng.hpp"

namespace sdacs {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Row-major order is also the
// serialization convention for every weight in the model file format.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    bool empty() const { return data.empty(); }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow for large |x|.
inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const Matrix& m) { return all_finite(m.data); }

// Neumaier-compensated accumulator. Loss values feed central-difference
// gradient comparisons at the 1e-6 level, which plain summation over ~1e6
// terms cannot reliably support.
class KahanSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Uniform init on [-B, B] with B = 4*sqrt(6 / (fan_in + fan_out)).
// Shape is fan_out x fan_in; entries are filled row-major from rng.
inline Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Prng& rng) {
    if (fan_in < 1 || fan_out < 1)
        throw std::invalid_argument("glorot_uniform: fan_in and fan_out must be >= 1");
    const double bound = 4.0 * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (auto& v : w.data) v = bound * (2.0 * rng.next_uniform() - 1.0);
    return w;
}

// I.i.d. zero-mean normal samples with standard deviation std.
inline Vector gaussian_noise(std::size_t dim, double std, Prng& rng) {
    if (std < 0.0) throw std::invalid_argument("gaussian_noise: std must be >= 0");
    Vector out(dim, 0.0);
    if (std == 0.0) return out;
    for (auto& v : out) v = std * rng.next_normal();
    return out;
}

// y = W x + b. The accumulator starts at b[i] and adds terms in ascending
// column order; the batched kernels below use the same ordering so single and
// batched forward passes agree bit-for-bit.
inline Vector affine(const Matrix& w, const Vector& x, const Vector& b) {
    if (w.cols != x.size() || w.rows != b.size())
        throw std::invalid_argument("affine: dimension mismatch");
    Vector y(w.rows);
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* wr = w.row(i);
        double acc = b[i];
        for (std::size_t k = 0; k < w.cols; ++k) acc += wr[k] * x[k];
        y[i] = acc;
    }
    return y;
}

namespace detail {

// Work below this many multiply-adds stays serial; splitting never changes
// any element's accumulation order, only who computes it.
inline constexpr std::size_t kParallelGrain = 1u << 20;

inline std::size_t gemm_workers(std::size_t work, std::size_t rows) {
    if (work < kParallelGrain) return 1;
    return std::min(parallel::thread_count(), rows);
}

}  // namespace detail

// C = A * B with C(i,j) accumulated over k ascending.
inline Matrix gemm_ab(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("gemm_ab: dimension mismatch");
    Matrix c(a.rows, b.cols);
    const std::size_t workers = detail::gemm_workers(a.rows * a.cols * b.cols, a.rows);
    parallel::parallel_for(a.rows, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double* cr = c.row(i);
            const double* ar = a.row(i);
            for (std::size_t k = 0; k < a.cols; ++k) {
                const double aik = ar[k];
                const double* br = b.row(k);
                for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
            }
        }
    });
    return c;
}

// C = A * B + bias broadcast over columns; C(i,j) starts at bias[i] and
// accumulates over k ascending, matching affine().
inline Matrix gemm_ab_bias(const Matrix& a, const Matrix& b, const Vector& bias) {
    if (a.cols != b.rows || a.rows != bias.size())
        throw std::invalid_argument("gemm_ab_bias: dimension mismatch");
    Matrix c(a.rows, b.cols);
    const std::size_t workers = detail::gemm_workers(a.rows * a.cols * b.cols, a.rows);
    parallel::parallel_for(a.rows, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double* cr = c.row(i);
            const double bi = bias[i];
            for (std::size_t j = 0; j < b.cols; ++j) cr[j] = bi;
            const double* ar = a.row(i);
            for (std::size_t k = 0; k < a.cols; ++k) {
                const double aik = ar[k];
                const double* br = b.row(k);
                for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
            }
        }
    });
    return c;
}

// C = scale * (A * B^T); C(i,j) is a dot product over the shared trailing
// index in ascending order, scaled after the sum.
inline Matrix gemm_abt(const Matrix& a, const Matrix& b, double scale = 1.0) {
    if (a.cols != b.cols) throw std::invalid_argument("gemm_abt: dimension mismatch");
    Matrix c(a.rows, b.rows);
    const std::size_t workers = detail::gemm_workers(a.rows * a.cols * b.rows, a.rows);
    parallel::parallel_for(a.rows, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double* ar = a.row(i);
            double* cr = c.row(i);
            for (std::size_t j = 0; j < b.rows; ++j) {
                const double* br = b.row(j);
                double acc = 0.0;
                for (std::size_t k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
                cr[j] = acc * scale;
            }
        }
    });
    return c;
}

// C = A^T * B; C(i,j) accumulated over k (rows of A and B) ascending.
inline Matrix gemm_atb(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw std::invalid_argument("gemm_atb: dimension mismatch");
    Matrix c(a.cols, b.cols);
    const std::size_t workers = detail::gemm_workers(a.rows * a.cols * b.cols, a.cols);
    parallel::parallel_for(a.cols, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double* cr = c.row(i);
            for (std::size_t k = 0; k < a.rows; ++k) {
                const double aki = a(k, i);
                const double* br = b.row(k);
                for (std::size_t j = 0; j < b.cols; ++j) cr[j] += aki * br[j];
            }
        }
    });
    return c;
}

// Row means: out[i] = (1/cols) * sum_j m(i,j), j ascending.
inline Vector row_mean(const Matrix& m) {
    if (m.cols == 0) throw std::invalid_argument("row_mean: empty matrix");
    Vector out(m.rows);
    const double inv = 1.0 / static_cast<double>(m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += r[j];
        out[i] = acc * inv;
    }
    return out;
}

inline void axpy(Matrix& y, const Matrix& x, double alpha) {
    if (y.rows != x.rows || y.cols != x.cols)
        throw std::invalid_argument("axpy: shape mismatch");
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += alpha * x.data[i];
}

inline void axpy(Vector& y, const Vector& x, double alpha) {
    if (y.size() != x.size()) throw std::invalid_argument("axpy: size mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

}  // namespace sdacs
