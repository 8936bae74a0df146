#pragma once
#include <cstdint>
#include <stdexcept>

#include "sdacs/numeric.hpp"

namespace sdacs {

// Activation of the learned measurement layer (NL-SDA first layer). All other
// layers are sigmoid.
enum class MeasurementActivation : std::uint32_t {
    Sigmoid = 0,
    Identity = 1,
};

// Recovery network for fixed linear measurements:
//   xhat = T(W3 T(W2 T(W1 y + b1) + b2) + b3),  T = sigmoid.
// Layer widths alternate N, M, N so each layer costs O(MN), like one
// iteration of a first-order recovery solver.
struct LinearSda {
    std::size_t n = 0;
    std::size_t m = 0;
    Matrix w1;  // n x m
    Vector b1;  // n
    Matrix w2;  // m x n
    Vector b2;  // m
    Matrix w3;  // n x m
    Vector b3;  // n
};

// Recovery network whose first layer is the learned measurement
//   y = F(W1 x + b1), F sigmoid or identity,
// followed by the same sigmoid stack as LinearSda.
struct NonlinearSda {
    std::size_t n = 0;
    std::size_t m = 0;
    MeasurementActivation measurement_activation = MeasurementActivation::Sigmoid;
    Matrix w1;  // m x n
    Vector b1;  // m
    Matrix w2;  // n x m
    Vector b2;  // n
    Matrix w3;  // m x n
    Vector b3;  // m
    Matrix w4;  // n x m
    Vector b4;  // n
};

// One denoising-autoencoder layer as kept after pre-training: encoder weights
// and bias plus the reconstruction bias (the untied decoder weights are
// discarded by the caller).
struct DaeLayer {
    Matrix w;        // hidden x input
    Vector b_hidden; // hidden
    Vector c_recon;  // input
};

inline void validate_shapes(const LinearSda& m) {
    const bool ok = m.n > m.m && m.m >= 1 &&
                    m.w1.rows == m.n && m.w1.cols == m.m && m.b1.size() == m.n &&
                    m.w2.rows == m.m && m.w2.cols == m.n && m.b2.size() == m.m &&
                    m.w3.rows == m.n && m.w3.cols == m.m && m.b3.size() == m.n;
    if (!ok) throw std::invalid_argument("LinearSda: inconsistent shapes (need N > M >= 1)");
}

inline void validate_shapes(const NonlinearSda& m) {
    const bool ok = m.n > m.m && m.m >= 1 &&
                    m.w1.rows == m.m && m.w1.cols == m.n && m.b1.size() == m.m &&
                    m.w2.rows == m.n && m.w2.cols == m.m && m.b2.size() == m.n &&
                    m.w3.rows == m.m && m.w3.cols == m.n && m.b3.size() == m.m &&
                    m.w4.rows == m.n && m.w4.cols == m.m && m.b4.size() == m.n;
    if (!ok) throw std::invalid_argument("NonlinearSda: inconsistent shapes (need N > M >= 1)");
}

// Glorot-initialized skeletons; biases start at zero. Draw order: w1, w2, w3
// (w4), row-major within each matrix.
inline LinearSda init_l(std::size_t n, std::size_t m, Prng& rng) {
    if (!(n > m && m >= 1)) throw std::invalid_argument("init_l: need N > M >= 1");
    LinearSda s;
    s.n = n;
    s.m = m;
    s.w1 = glorot_uniform(m, n, rng);
    s.b1 = Vector(n, 0.0);
    s.w2 = glorot_uniform(n, m, rng);
    s.b2 = Vector(m, 0.0);
    s.w3 = glorot_uniform(m, n, rng);
    s.b3 = Vector(n, 0.0);
    return s;
}

inline NonlinearSda init_nl(std::size_t n, std::size_t m, MeasurementActivation act, Prng& rng) {
    if (!(n > m && m >= 1)) throw std::invalid_argument("init_nl: need N > M >= 1");
    NonlinearSda s;
    s.n = n;
    s.m = m;
    s.measurement_activation = act;
    s.w1 = glorot_uniform(n, m, rng);
    s.b1 = Vector(m, 0.0);
    s.w2 = glorot_uniform(m, n, rng);
    s.b2 = Vector(n, 0.0);
    s.w3 = glorot_uniform(n, m, rng);
    s.b3 = Vector(m, 0.0);
    s.w4 = glorot_uniform(m, n, rng);
    s.b4 = Vector(n, 0.0);
    return s;
}

inline void sigmoid_inplace(Vector& v) {
    for (auto& x : v) x = sigmoid(x);
}

inline void sigmoid_inplace(Matrix& m) {
    for (auto& x : m.data) x = sigmoid(x);
}

inline void activate_inplace(Vector& v, MeasurementActivation act) {
    if (act == MeasurementActivation::Sigmoid) sigmoid_inplace(v);
}

inline void activate_inplace(Matrix& m, MeasurementActivation act) {
    if (act == MeasurementActivation::Sigmoid) sigmoid_inplace(m);
}

// xhat = T(W3 T(W2 T(W1 y + b1) + b2) + b3).
inline Vector forward_l(const LinearSda& model, const Vector& y) {
    if (y.size() != model.m) throw std::invalid_argument("forward_l: y must have dim m");
    Vector a1 = affine(model.w1, y, model.b1);
    sigmoid_inplace(a1);
    Vector a2 = affine(model.w2, a1, model.b2);
    sigmoid_inplace(a2);
    Vector a3 = affine(model.w3, a2, model.b3);
    sigmoid_inplace(a3);
    return a3;
}

struct NlRecovery {
    Vector y;     // learned measurements, dim m
    Vector xhat;  // reconstruction, dim n
};

inline NlRecovery forward_nl(const NonlinearSda& model, const Vector& x) {
    if (x.size() != model.n) throw std::invalid_argument("forward_nl: x must have dim n");
    Vector a1 = affine(model.w1, x, model.b1);
    activate_inplace(a1, model.measurement_activation);
    Vector a2 = affine(model.w2, a1, model.b2);
    sigmoid_inplace(a2);
    Vector a3 = affine(model.w3, a2, model.b3);
    sigmoid_inplace(a3);
    Vector a4 = affine(model.w4, a3, model.b4);
    sigmoid_inplace(a4);
    return {std::move(a1), std::move(a4)};
}

// Batched forward passes keep every layer activation for backprop. Batches
// are column-per-sample; each column equals the single-vector pass
// bit-for-bit.
struct LActivations {
    Matrix a1, a2, a3;  // a3 = xhat (n x B)
};

inline LActivations forward_l_batch(const LinearSda& model, const Matrix& y) {
    if (y.rows != model.m) throw std::invalid_argument("forward_l_batch: need m x B input");
    LActivations f;
    f.a1 = gemm_ab_bias(model.w1, y, model.b1);
    sigmoid_inplace(f.a1);
    f.a2 = gemm_ab_bias(model.w2, f.a1, model.b2);
    sigmoid_inplace(f.a2);
    f.a3 = gemm_ab_bias(model.w3, f.a2, model.b3);
    sigmoid_inplace(f.a3);
    return f;
}

struct NlActivations {
    Matrix a1, a2, a3, a4;  // a1 = y (m x B), a4 = xhat (n x B)
};

inline NlActivations forward_nl_batch(const NonlinearSda& model, const Matrix& x) {
    if (x.rows != model.n) throw std::invalid_argument("forward_nl_batch: need n x B input");
    NlActivations f;
    f.a1 = gemm_ab_bias(model.w1, x, model.b1);
    activate_inplace(f.a1, model.measurement_activation);
    f.a2 = gemm_ab_bias(model.w2, f.a1, model.b2);
    sigmoid_inplace(f.a2);
    f.a3 = gemm_ab_bias(model.w3, f.a2, model.b3);
    sigmoid_inplace(f.a3);
    f.a4 = gemm_ab_bias(model.w4, f.a3, model.b4);
    sigmoid_inplace(f.a4);
    return f;
}

// Energy of a denoising autoencoder with sigmoidal hidden units:
//   E(x) = sum_j softplus(w_j . x + b_j) - 1/2 ||x - c||^2
// (additive constant fixed to zero; only differences and orderings are used).
inline double dae_energy(const DaeLayer& layer, const Vector& x) {
    if (layer.w.cols != x.size() || layer.w.rows != layer.b_hidden.size() ||
        layer.w.cols != layer.c_recon.size())
        throw std::invalid_argument("dae_energy: dimension mismatch");
    KahanSum e;
    for (std::size_t j = 0; j < layer.w.rows; ++j) {
        const double* wr = layer.w.row(j);
        double z = layer.b_hidden[j];
        for (std::size_t k = 0; k < x.size(); ++k) z += wr[k] * x[k];
        e.add(softplus(z));
    }
    double q = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - layer.c_recon[k];
        q += d * d;
    }
    e.add(-0.5 * q);
    return e.value();
}

// Gaussian-Bernoulli RBM energy:
//   E = sum_i (v_i - b_i)^2 / (2 sigma_i^2)
//     - sum_i sum_j W_ij h_j v_i / sigma_i
//     - sum_j c_j h_j
// with real visible units v and binary hidden units h.
inline double grbm_energy(const Matrix& w, const Vector& b_vis, const Vector& c_hid,
                          const Vector& sigma, const Vector& v, const Vector& h) {
    if (w.rows != v.size() || w.cols != h.size() || b_vis.size() != v.size() ||
        sigma.size() != v.size() || c_hid.size() != h.size())
        throw std::invalid_argument("grbm_energy: dimension mismatch");
    for (double hj : h)
        if (hj != 0.0 && hj != 1.0)
            throw std::invalid_argument("grbm_energy: h entries must be 0 or 1");
    for (double s : sigma)
        if (!(s > 0.0)) throw std::invalid_argument("grbm_energy: sigma entries must be > 0");

    KahanSum e;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - b_vis[i];
        e.add(d * d / (2.0 * sigma[i] * sigma[i]));
        const double* wr = w.row(i);
        double wh = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) wh += wr[j] * h[j];
        e.add(-wh * v[i] / sigma[i]);
    }
    for (std::size_t j = 0; j < h.size(); ++j) e.add(-c_hid[j] * h[j]);
    return e.value();
}

}  // namespace sdacs
