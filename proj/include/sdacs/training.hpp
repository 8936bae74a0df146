#pragma once
#include <algorithm>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdacs/measurement.hpp"
#include "sdacs/model.hpp"
#include "sdacs/numeric.hpp"
#include "sdacs/prng.hpp"

namespace sdacs {

// Plain mini-batch SGD settings. Pre-training and fine-tuning carry their own
// fixed learning rates (defaults 0.1 / 0.01); corruption applies only during
// pre-training and is re-drawn at every presentation.
struct TrainConfig {
    double pretrain_learning_rate = 0.1;
    double finetune_learning_rate = 0.01;
    std::size_t batch_size = 32;
    std::size_t pretrain_epochs = 15;
    std::size_t finetune_epochs = 200;
    double corruption_std = 0.2;
    std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& cfg) {
    if (!(cfg.pretrain_learning_rate > 0.0) || !(cfg.finetune_learning_rate > 0.0))
        throw std::invalid_argument("TrainConfig: learning rates must be > 0");
    if (cfg.batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (cfg.corruption_std < 0.0)
        throw std::invalid_argument("TrainConfig: corruption_std must be >= 0");
}

// Row-per-sample storage: measurements (l x m, absent for NL-SDA sets) and
// targets (l x n with entries in [0, 1]).
struct TrainingSet {
    Matrix measurements;
    Matrix targets;

    std::size_t size() const { return targets.rows; }
};

namespace detail {

inline void check_unit_range(const Matrix& targets) {
    for (double v : targets.data)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("TrainingSet: target entries must lie in [0, 1]");
}

}  // namespace detail

// L-SDA training pairs: y^(i) = Phi x^(i) computed up front.
inline TrainingSet make_training_set(const Matrix& patches, const LinearOperator& op) {
    if (patches.rows == 0) throw std::invalid_argument("make_training_set: empty patch set");
    if (patches.cols != op.n)
        throw std::invalid_argument("make_training_set: patch dim must equal operator n");
    detail::check_unit_range(patches);
    return {measure_rows(op, patches), patches};
}

// NL-SDA training set: targets only (the network sees x itself).
inline TrainingSet make_training_set(const Matrix& patches) {
    if (patches.rows == 0) throw std::invalid_argument("make_training_set: empty patch set");
    detail::check_unit_range(patches);
    return {Matrix{}, patches};
}

namespace detail {

// dim x B column-per-sample batch gathered from row-per-sample storage.
inline Matrix rows_to_columns(const Matrix& rows, const std::vector<std::size_t>& order,
                              std::size_t lo, std::size_t hi) {
    Matrix out(rows.cols, hi - lo);
    for (std::size_t s = lo; s < hi; ++s) {
        const double* src = rows.row(order[s]);
        const std::size_t col = s - lo;
        for (std::size_t d = 0; d < rows.cols; ++d) out(d, col) = src[d];
    }
    return out;
}

inline std::vector<std::size_t> identity_order(std::size_t l) {
    std::vector<std::size_t> order(l);
    for (std::size_t i = 0; i < l; ++i) order[i] = i;
    return order;
}

// Fisher-Yates with the training Prng; deterministic given the seed.
inline void shuffle_order(std::vector<std::size_t>& order, Prng& rng) {
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(order[i - 1], order[j]);
    }
}

// Additive Gaussian corruption, drawn column-by-column (sample order) then
// component order.
inline void corrupt_inplace(Matrix& x, double std, Prng& rng) {
    if (std == 0.0) return;
    for (std::size_t s = 0; s < x.cols; ++s)
        for (std::size_t d = 0; d < x.rows; ++d) x(d, s) += std * rng.next_normal();
}

// Output-layer delta of the batch-mean squared-error loss (before the 1/B
// factor, which is applied in the weight-gradient products / bias means):
// 2 (a - x) .* a .* (1 - a).
inline Matrix output_delta(const Matrix& a, const Matrix& x) {
    Matrix d(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double ai = a.data[i];
        d.data[i] = 2.0 * (ai - x.data[i]) * ai * (1.0 - ai);
    }
    return d;
}

inline Matrix output_delta(const Matrix& a, const Matrix& x, MeasurementActivation act) {
    if (act == MeasurementActivation::Sigmoid) return output_delta(a, x);
    Matrix d(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i)
        d.data[i] = 2.0 * (a.data[i] - x.data[i]);
    return d;
}

// delta = back .* a .* (1 - a) for sigmoid layers, in place.
inline void mul_sigmoid_prime(Matrix& back, const Matrix& a) {
    for (std::size_t i = 0; i < back.data.size(); ++i) {
        const double ai = a.data[i];
        back.data[i] *= ai * (1.0 - ai);
    }
}

inline void mul_activation_prime(Matrix& back, const Matrix& a, MeasurementActivation act) {
    if (act == MeasurementActivation::Sigmoid) mul_sigmoid_prime(back, a);
    // identity: derivative is 1
}

inline double mean_squared_residual(const Matrix& a, const Matrix& x, KahanSum& acc) {
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - x.data[i];
        acc.add(d * d);
    }
    return 0.0;
}

inline constexpr std::size_t kEvalChunk = 256;

}  // namespace detail

// ---------------------------------------------------------------------------
// Losses: batch-mean of per-sample squared l2 reconstruction errors.
// ---------------------------------------------------------------------------

// Loss of one column batch (used by the gradient checker; identical formula
// to loss_l, different chunking).
inline double loss_batch_l(const LinearSda& model, const Matrix& y, const Matrix& x) {
    if (y.cols != x.cols || y.cols == 0) throw std::invalid_argument("loss_batch_l: empty batch");
    const LActivations f = forward_l_batch(model, y);
    KahanSum acc;
    detail::mean_squared_residual(f.a3, x, acc);
    return acc.value() / static_cast<double>(y.cols);
}

inline double loss_batch_nl(const NonlinearSda& model, const Matrix& x) {
    if (x.cols == 0) throw std::invalid_argument("loss_batch_nl: empty batch");
    const NlActivations f = forward_nl_batch(model, x);
    KahanSum acc;
    detail::mean_squared_residual(f.a4, x, acc);
    return acc.value() / static_cast<double>(x.cols);
}

inline double loss_l(const LinearSda& model, const TrainingSet& set) {
    const std::size_t l = set.size();
    if (l == 0) throw std::invalid_argument("loss_l: empty training set");
    if (set.measurements.rows != l || set.measurements.cols != model.m ||
        set.targets.cols != model.n)
        throw std::invalid_argument("loss_l: set does not match model dims");
    const auto order = detail::identity_order(l);
    KahanSum acc;
    for (std::size_t lo = 0; lo < l; lo += detail::kEvalChunk) {
        const std::size_t hi = std::min(l, lo + detail::kEvalChunk);
        const Matrix y = detail::rows_to_columns(set.measurements, order, lo, hi);
        const Matrix x = detail::rows_to_columns(set.targets, order, lo, hi);
        const LActivations f = forward_l_batch(model, y);
        detail::mean_squared_residual(f.a3, x, acc);
    }
    return acc.value() / static_cast<double>(l);
}

inline double loss_nl(const NonlinearSda& model, const TrainingSet& set) {
    const std::size_t l = set.size();
    if (l == 0) throw std::invalid_argument("loss_nl: empty training set");
    if (set.targets.cols != model.n)
        throw std::invalid_argument("loss_nl: set does not match model dims");
    const auto order = detail::identity_order(l);
    KahanSum acc;
    for (std::size_t lo = 0; lo < l; lo += detail::kEvalChunk) {
        const std::size_t hi = std::min(l, lo + detail::kEvalChunk);
        const Matrix x = detail::rows_to_columns(set.targets, order, lo, hi);
        const NlActivations f = forward_nl_batch(model, x);
        detail::mean_squared_residual(f.a4, x, acc);
    }
    return acc.value() / static_cast<double>(l);
}

// ---------------------------------------------------------------------------
// Exact backpropagation gradients of the batch-mean MSE.
// ---------------------------------------------------------------------------

struct LinearSdaGrads {
    Matrix w1, w2, w3;
    Vector b1, b2, b3;
};

struct NonlinearSdaGrads {
    Matrix w1, w2, w3, w4;
    Vector b1, b2, b3, b4;
};

inline LinearSdaGrads grad_l(const LinearSda& model, const Matrix& y, const Matrix& x) {
    if (y.cols != x.cols || y.cols == 0) throw std::invalid_argument("grad_l: empty batch");
    if (x.rows != model.n) throw std::invalid_argument("grad_l: target dim mismatch");
    const LActivations f = forward_l_batch(model, y);
    const double inv_b = 1.0 / static_cast<double>(y.cols);

    LinearSdaGrads g;
    Matrix d3 = detail::output_delta(f.a3, x);
    g.w3 = gemm_abt(d3, f.a2, inv_b);
    g.b3 = row_mean(d3);

    Matrix d2 = gemm_atb(model.w3, d3);
    detail::mul_sigmoid_prime(d2, f.a2);
    g.w2 = gemm_abt(d2, f.a1, inv_b);
    g.b2 = row_mean(d2);

    Matrix d1 = gemm_atb(model.w2, d2);
    detail::mul_sigmoid_prime(d1, f.a1);
    g.w1 = gemm_abt(d1, y, inv_b);
    g.b1 = row_mean(d1);
    return g;
}

inline NonlinearSdaGrads grad_nl(const NonlinearSda& model, const Matrix& x) {
    if (x.cols == 0) throw std::invalid_argument("grad_nl: empty batch");
    if (x.rows != model.n) throw std::invalid_argument("grad_nl: input dim mismatch");
    const NlActivations f = forward_nl_batch(model, x);
    const double inv_b = 1.0 / static_cast<double>(x.cols);

    NonlinearSdaGrads g;
    Matrix d4 = detail::output_delta(f.a4, x);
    g.w4 = gemm_abt(d4, f.a3, inv_b);
    g.b4 = row_mean(d4);

    Matrix d3 = gemm_atb(model.w4, d4);
    detail::mul_sigmoid_prime(d3, f.a3);
    g.w3 = gemm_abt(d3, f.a2, inv_b);
    g.b3 = row_mean(d3);

    Matrix d2 = gemm_atb(model.w3, d3);
    detail::mul_sigmoid_prime(d2, f.a2);
    g.w2 = gemm_abt(d2, f.a1, inv_b);
    g.b2 = row_mean(d2);

    Matrix d1 = gemm_atb(model.w2, d2);
    detail::mul_activation_prime(d1, f.a1, model.measurement_activation);
    g.w1 = gemm_abt(d1, x, inv_b);
    g.b1 = row_mean(d1);
    return g;
}

inline void sgd_step(LinearSda& model, const LinearSdaGrads& g, double lr) {
    axpy(model.w1, g.w1, -lr);
    axpy(model.b1, g.b1, -lr);
    axpy(model.w2, g.w2, -lr);
    axpy(model.b2, g.b2, -lr);
    axpy(model.w3, g.w3, -lr);
    axpy(model.b3, g.b3, -lr);
}

inline void sgd_step(NonlinearSda& model, const NonlinearSdaGrads& g, double lr) {
    axpy(model.w1, g.w1, -lr);
    axpy(model.b1, g.b1, -lr);
    axpy(model.w2, g.w2, -lr);
    axpy(model.b2, g.b2, -lr);
    axpy(model.w3, g.w3, -lr);
    axpy(model.b3, g.b3, -lr);
    axpy(model.w4, g.w4, -lr);
    axpy(model.b4, g.b4, -lr);
}

// ---------------------------------------------------------------------------
// Denoising-autoencoder pre-training.
// ---------------------------------------------------------------------------

// Full DAE while training: untied encoder/decoder. Only the encoder (plus the
// reconstruction bias, kept for the energy diagnostic) survives into the
// stack. The decoder activation follows the input range: sigmoid for inputs
// in [0,1] (patches, sigmoid codes), identity for unbounded inputs such as
// linear measurements, matching the Gaussian-visible energy form.
struct Dae {
    Matrix w;         // hidden x input
    Vector b_hidden;  // hidden
    Matrix w_dec;     // input x hidden
    Vector c_recon;   // input
    MeasurementActivation act = MeasurementActivation::Sigmoid;
    MeasurementActivation dec_act = MeasurementActivation::Sigmoid;
};

struct DaeActivations {
    Matrix h;  // hidden x B
    Matrix r;  // input x B (reconstruction)
};

inline DaeActivations dae_forward_batch(const Dae& dae, const Matrix& x) {
    DaeActivations f;
    f.h = gemm_ab_bias(dae.w, x, dae.b_hidden);
    activate_inplace(f.h, dae.act);
    f.r = gemm_ab_bias(dae.w_dec, f.h, dae.c_recon);
    activate_inplace(f.r, dae.dec_act);
    return f;
}

// Mean clean-input reconstruction loss over a row-per-sample input matrix.
inline double dae_loss(const Dae& dae, const Matrix& inputs) {
    const std::size_t l = inputs.rows;
    if (l == 0) throw std::invalid_argument("dae_loss: empty input set");
    const auto order = detail::identity_order(l);
    KahanSum acc;
    for (std::size_t lo = 0; lo < l; lo += detail::kEvalChunk) {
        const std::size_t hi = std::min(l, lo + detail::kEvalChunk);
        const Matrix x = detail::rows_to_columns(inputs, order, lo, hi);
        const DaeActivations f = dae_forward_batch(dae, x);
        detail::mean_squared_residual(f.r, x, acc);
    }
    return acc.value() / static_cast<double>(l);
}

namespace detail {

// SGD on the denoising objective: reconstruct the clean input from its
// corrupted copy. Returns the clean-input loss trace; entry 0 is the loss
// before any update.
inline std::vector<double> train_dae(Dae& dae, const Matrix& inputs, std::size_t epochs,
                                     const TrainConfig& cfg, Prng& rng) {
    const std::size_t l = inputs.rows;
    if (l == 0) throw std::invalid_argument("train_dae: empty input set");
    std::vector<double> trace;
    trace.reserve(epochs + 1);
    trace.push_back(dae_loss(dae, inputs));
    auto order = identity_order(l);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        shuffle_order(order, rng);
        for (std::size_t lo = 0; lo < l; lo += cfg.batch_size) {
            const std::size_t hi = std::min(l, lo + cfg.batch_size);
            const Matrix clean = rows_to_columns(inputs, order, lo, hi);
            Matrix noisy = clean;
            corrupt_inplace(noisy, cfg.corruption_std, rng);
            const DaeActivations f = dae_forward_batch(dae, noisy);
            const double inv_b = 1.0 / static_cast<double>(hi - lo);

            Matrix d2 = output_delta(f.r, clean, dae.dec_act);
            const Matrix gw_dec = gemm_abt(d2, f.h, inv_b);
            const Vector gc = row_mean(d2);
            Matrix d1 = gemm_atb(dae.w_dec, d2);
            mul_activation_prime(d1, f.h, dae.act);
            const Matrix gw = gemm_abt(d1, noisy, inv_b);
            const Vector gb = row_mean(d1);

            axpy(dae.w, gw, -cfg.pretrain_learning_rate);
            axpy(dae.b_hidden, gb, -cfg.pretrain_learning_rate);
            axpy(dae.w_dec, gw_dec, -cfg.pretrain_learning_rate);
            axpy(dae.c_recon, gc, -cfg.pretrain_learning_rate);
        }
        trace.push_back(dae_loss(dae, inputs));
    }
    return trace;
}

// Clean codes of a row-per-sample input matrix under an encoder.
inline Matrix encode_rows(const Matrix& w, const Vector& b, MeasurementActivation act,
                          const Matrix& inputs) {
    const std::size_t l = inputs.rows;
    Matrix out(l, w.rows);
    const auto order = identity_order(l);
    for (std::size_t lo = 0; lo < l; lo += kEvalChunk) {
        const std::size_t hi = std::min(l, lo + kEvalChunk);
        const Matrix x = rows_to_columns(inputs, order, lo, hi);
        Matrix h = gemm_ab_bias(w, x, b);
        activate_inplace(h, act);
        for (std::size_t s = lo; s < hi; ++s) {
            const std::size_t col = s - lo;
            for (std::size_t d = 0; d < h.rows; ++d) out(s, d) = h(d, col);
        }
    }
    return out;
}

}  // namespace detail

// A freshly pre-trained layer: the encoder that joins the stack, plus the
// untied decoder so callers can evaluate reconstruction before discarding it.
struct TrainedDae {
    DaeLayer layer;
    Matrix decoder_w;                // input x hidden
    std::vector<double> loss_trace;  // clean reconstruction loss per epoch
    MeasurementActivation act = MeasurementActivation::Sigmoid;
    MeasurementActivation dec_act = MeasurementActivation::Sigmoid;
};

// Full encoder-decoder pass of a pre-trained layer.
inline Vector dae_reconstruct(const TrainedDae& dae, const Vector& x) {
    Vector h = affine(dae.layer.w, x, dae.layer.b_hidden);
    activate_inplace(h, dae.act);
    Vector r = affine(dae.decoder_w, h, dae.layer.c_recon);
    activate_inplace(r, dae.dec_act);
    return r;
}

// Stand-alone DAE pre-training on a row-per-sample input set. Fresh Glorot
// encoder/decoder, zero biases; zero epochs returns the initialization.
inline TrainedDae pretrain_layer(const Matrix& inputs, std::size_t hidden_dim,
                                 const TrainConfig& cfg, Prng& rng,
                                 MeasurementActivation act = MeasurementActivation::Sigmoid,
                                 MeasurementActivation dec_act = MeasurementActivation::Sigmoid) {
    validate(cfg);
    if (inputs.rows == 0) throw std::invalid_argument("pretrain_layer: empty input set");
    if (hidden_dim < 1) throw std::invalid_argument("pretrain_layer: hidden_dim must be >= 1");
    Dae dae;
    dae.w = glorot_uniform(inputs.cols, hidden_dim, rng);
    dae.b_hidden = Vector(hidden_dim, 0.0);
    dae.w_dec = glorot_uniform(hidden_dim, inputs.cols, rng);
    dae.c_recon = Vector(inputs.cols, 0.0);
    dae.act = act;
    dae.dec_act = dec_act;
    TrainedDae out;
    out.act = act;
    out.dec_act = dec_act;
    out.loss_trace = detail::train_dae(dae, inputs, cfg.pretrain_epochs, cfg, rng);
    out.layer = DaeLayer{std::move(dae.w), std::move(dae.b_hidden), std::move(dae.c_recon)};
    out.decoder_w = std::move(dae.w_dec);
    return out;
}

// Called once per layer, in stacking order, before that layer's DAE trains.
using PretrainObserver =
    std::function<void(std::size_t layer_index, std::size_t input_dim, std::size_t hidden_dim)>;

struct PretrainTraces {
    std::vector<std::vector<double>> layers;
};

namespace detail {

// One stacked layer: the DAE starts from the model's current encoder weights
// (so zero pre-training epochs is a no-op on the model), trains, writes the
// encoder back, and returns the clean codes for the next layer.
inline std::vector<double> pretrain_stack_layer(Matrix& w, Vector& b, MeasurementActivation act,
                                                MeasurementActivation dec_act, Matrix& current,
                                                const TrainConfig& cfg, Prng& rng) {
    Dae dae;
    dae.w = std::move(w);
    dae.b_hidden = std::move(b);
    dae.w_dec = glorot_uniform(dae.w.rows, dae.w.cols, rng);
    dae.c_recon = Vector(dae.w.cols, 0.0);
    dae.act = act;
    dae.dec_act = dec_act;
    auto trace = train_dae(dae, current, cfg.pretrain_epochs, cfg, rng);
    w = std::move(dae.w);
    b = std::move(dae.b_hidden);
    current = encode_rows(w, b, act, current);
    return trace;
}

}  // namespace detail

// Layerwise pre-training of the L-SDA stack. Layer k trains as a DAE on the
// clean codes propagated through layers 1..k-1 (layer 1 on the measurements);
// only the encoders are kept.
inline PretrainTraces pretrain_l(LinearSda& model, const TrainingSet& set, const TrainConfig& cfg,
                                 Prng& rng, const PretrainObserver& observer = {}) {
    validate(cfg);
    validate_shapes(model);
    if (set.size() == 0) throw std::invalid_argument("pretrain_l: empty training set");
    if (set.measurements.rows != set.size() || set.measurements.cols != model.m)
        throw std::invalid_argument("pretrain_l: set measurements do not match model");
    constexpr auto kSig = MeasurementActivation::Sigmoid;
    constexpr auto kLin = MeasurementActivation::Identity;
    PretrainTraces traces;
    Matrix current = set.measurements;
    // Layer 1 reconstructs raw measurements (unbounded), so its decoder is
    // linear; later layers reconstruct sigmoid codes.
    if (observer) observer(1, model.m, model.n);
    traces.layers.push_back(
        detail::pretrain_stack_layer(model.w1, model.b1, kSig, kLin, current, cfg, rng));
    if (observer) observer(2, model.n, model.m);
    traces.layers.push_back(
        detail::pretrain_stack_layer(model.w2, model.b2, kSig, kSig, current, cfg, rng));
    if (observer) observer(3, model.m, model.n);
    traces.layers.push_back(
        detail::pretrain_stack_layer(model.w3, model.b3, kSig, kSig, current, cfg, rng));
    return traces;
}

// Same for the NL-SDA; the learned measurement layer is the first DAE and
// encodes with its configured activation.
inline PretrainTraces pretrain_nl(NonlinearSda& model, const TrainingSet& set,
                                  const TrainConfig& cfg, Prng& rng,
                                  const PretrainObserver& observer = {}) {
    validate(cfg);
    validate_shapes(model);
    if (set.size() == 0) throw std::invalid_argument("pretrain_nl: empty training set");
    if (set.targets.cols != model.n)
        throw std::invalid_argument("pretrain_nl: set targets do not match model");
    constexpr auto kSig = MeasurementActivation::Sigmoid;
    PretrainTraces traces;
    Matrix current = set.targets;
    // Layer 2 reconstructs the learned measurements, which are unbounded when
    // the measurement activation is identity.
    const auto dec2 = model.measurement_activation == MeasurementActivation::Identity
                          ? MeasurementActivation::Identity
                          : kSig;
    if (observer) observer(1, model.n, model.m);
    traces.layers.push_back(detail::pretrain_stack_layer(
        model.w1, model.b1, model.measurement_activation, kSig, current, cfg, rng));
    if (observer) observer(2, model.m, model.n);
    traces.layers.push_back(
        detail::pretrain_stack_layer(model.w2, model.b2, kSig, dec2, current, cfg, rng));
    if (observer) observer(3, model.n, model.m);
    traces.layers.push_back(
        detail::pretrain_stack_layer(model.w3, model.b3, kSig, kSig, current, cfg, rng));
    if (observer) observer(4, model.m, model.n);
    traces.layers.push_back(
        detail::pretrain_stack_layer(model.w4, model.b4, kSig, kSig, current, cfg, rng));
    return traces;
}

// ---------------------------------------------------------------------------
// Supervised fine-tuning (mini-batch SGD on clean inputs).
// ---------------------------------------------------------------------------

// Returns the full-set loss trace; entry 0 is the loss before any update,
// entry k the loss after epoch k.
inline std::vector<double> finetune_l(LinearSda& model, const TrainingSet& set,
                                      const TrainConfig& cfg, Prng& rng) {
    validate(cfg);
    validate_shapes(model);
    const std::size_t l = set.size();
    if (l == 0) throw std::invalid_argument("finetune_l: empty training set");
    std::vector<double> trace;
    trace.reserve(cfg.finetune_epochs + 1);
    trace.push_back(loss_l(model, set));
    auto order = detail::identity_order(l);
    for (std::size_t epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
        detail::shuffle_order(order, rng);
        for (std::size_t lo = 0; lo < l; lo += cfg.batch_size) {
            const std::size_t hi = std::min(l, lo + cfg.batch_size);
            const Matrix y = detail::rows_to_columns(set.measurements, order, lo, hi);
            const Matrix x = detail::rows_to_columns(set.targets, order, lo, hi);
            sgd_step(model, grad_l(model, y, x), cfg.finetune_learning_rate);
        }
        trace.push_back(loss_l(model, set));
    }
    return trace;
}

inline std::vector<double> finetune_nl(NonlinearSda& model, const TrainingSet& set,
                                       const TrainConfig& cfg, Prng& rng) {
    validate(cfg);
    validate_shapes(model);
    const std::size_t l = set.size();
    if (l == 0) throw std::invalid_argument("finetune_nl: empty training set");
    std::vector<double> trace;
    trace.reserve(cfg.finetune_epochs + 1);
    trace.push_back(loss_nl(model, set));
    auto order = detail::identity_order(l);
    for (std::size_t epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
        detail::shuffle_order(order, rng);
        for (std::size_t lo = 0; lo < l; lo += cfg.batch_size) {
            const std::size_t hi = std::min(l, lo + cfg.batch_size);
            const Matrix x = detail::rows_to_columns(set.targets, order, lo, hi);
            sgd_step(model, grad_nl(model, x), cfg.finetune_learning_rate);
        }
        trace.push_back(loss_nl(model, set));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Gradient verification against central finite differences.
// ---------------------------------------------------------------------------

namespace detail {

struct ParamView {
    double* value;
    const double* grad;
    std::size_t count;
};

// Max relative error between supplied analytic gradients and central finite
// differences of loss_fn, over a deterministic sample of at least 100
// parameters (all of them when fewer exist). Within each parameter group the
// sample takes the largest analytic magnitudes: every layer is covered, and
// near-zero gradients — which central differences cannot resolve above the
// rounding floor — are left out when larger ones exist.
template <typename LossFn>
double fd_gradient_error(const std::vector<ParamView>& params, const LossFn& loss_fn,
                         double step) {
    if (!(step > 0.0)) throw std::invalid_argument("gradient check: step must be > 0");
    const std::size_t per_group = (128 + params.size() - 1) / params.size();
    double worst = 0.0;
    std::vector<std::size_t> idx;
    for (const auto& p : params) {
        idx.resize(p.count);
        for (std::size_t i = 0; i < p.count; ++i) idx[i] = i;
        const std::size_t take = std::min(per_group, p.count);
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                          [&](std::size_t a, std::size_t b) {
                              const double ga = std::abs(p.grad[a]);
                              const double gb = std::abs(p.grad[b]);
                              return ga != gb ? ga > gb : a < b;
                          });
        for (std::size_t j = 0; j < take; ++j) {
            double* slot = p.value + idx[j];
            const double analytic = p.grad[idx[j]];
            const double orig = *slot;
            *slot = orig + step;
            const double lp = loss_fn();
            *slot = orig - step;
            const double lm = loss_fn();
            *slot = orig;
            const double numeric = (lp - lm) / (2.0 * step);
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
            worst = std::max(worst, std::abs(analytic - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace detail

// Compare caller-supplied gradients against finite differences (lets tests
// inject deliberately wrong gradients).
inline double gradient_error_l(LinearSda model, const Matrix& y, const Matrix& x,
                               const LinearSdaGrads& g, double step) {
    const std::vector<detail::ParamView> params{
        {model.w1.data.data(), g.w1.data.data(), model.w1.data.size()},
        {model.b1.data(), g.b1.data(), model.b1.size()},
        {model.w2.data.data(), g.w2.data.data(), model.w2.data.size()},
        {model.b2.data(), g.b2.data(), model.b2.size()},
        {model.w3.data.data(), g.w3.data.data(), model.w3.data.size()},
        {model.b3.data(), g.b3.data(), model.b3.size()},
    };
    return detail::fd_gradient_error(params, [&] { return loss_batch_l(model, y, x); }, step);
}

inline double gradient_error_nl(NonlinearSda model, const Matrix& x, const NonlinearSdaGrads& g,
                                double step) {
    const std::vector<detail::ParamView> params{
        {model.w1.data.data(), g.w1.data.data(), model.w1.data.size()},
        {model.b1.data(), g.b1.data(), model.b1.size()},
        {model.w2.data.data(), g.w2.data.data(), model.w2.data.size()},
        {model.b2.data(), g.b2.data(), model.b2.size()},
        {model.w3.data.data(), g.w3.data.data(), model.w3.data.size()},
        {model.b3.data(), g.b3.data(), model.b3.size()},
        {model.w4.data.data(), g.w4.data.data(), model.w4.data.size()},
        {model.b4.data(), g.b4.data(), model.b4.size()},
    };
    return detail::fd_gradient_error(params, [&] { return loss_batch_nl(model, x); }, step);
}

inline double gradient_check_l(const LinearSda& model, const Matrix& y, const Matrix& x,
                               double step = 1e-5) {
    return gradient_error_l(model, y, x, grad_l(model, y, x), step);
}

inline double gradient_check_nl(const NonlinearSda& model, const Matrix& x, double step = 1e-5) {
    return gradient_error_nl(model, x, grad_nl(model, x), step);
}

// ---------------------------------------------------------------------------
// Whole training pipelines (init -> pre-train -> fine-tune).
// ---------------------------------------------------------------------------

struct TrainResultL {
    LinearSda model;
    PretrainTraces pretrain;
    std::vector<double> finetune;
};

struct TrainResultNl {
    NonlinearSda model;
    PretrainTraces pretrain;
    std::vector<double> finetune;
};

inline TrainResultL train_l(const Matrix& patches, const LinearOperator& op,
                            const TrainConfig& cfg) {
    validate(cfg);
    Prng rng(cfg.seed);
    TrainResultL out;
    out.model = init_l(op.n, op.m, rng);
    const TrainingSet set = make_training_set(patches, op);
    out.pretrain = pretrain_l(out.model, set, cfg, rng);
    out.finetune = finetune_l(out.model, set, cfg, rng);
    return out;
}

inline TrainResultNl train_nl(const Matrix& patches, std::size_t m, MeasurementActivation act,
                              const TrainConfig& cfg) {
    validate(cfg);
    if (patches.cols <= m) throw std::invalid_argument("train_nl: need patch dim n > m");
    Prng rng(cfg.seed);
    TrainResultNl out;
    out.model = init_nl(patches.cols, m, act, rng);
    const TrainingSet set = make_training_set(patches);
    out.pretrain = pretrain_nl(out.model, set, cfg, rng);
    out.finetune = finetune_nl(out.model, set, cfg, rng);
    return out;
}

// Loss trace rows: epoch,phase,loss with phase pretrain-k or finetune.
// Epoch 0 is the loss before any update in that phase.
inline void write_trace_csv(std::ostream& os, const PretrainTraces& pre,
                            const std::vector<double>& finetune) {
    os << "epoch,phase,loss\n";
    os.precision(17);
    for (std::size_t k = 0; k < pre.layers.size(); ++k)
        for (std::size_t e = 0; e < pre.layers[k].size(); ++e)
            os << e << ",pretrain-" << (k + 1) << ',' << pre.layers[k][e] << '\n';
    for (std::size_t e = 0; e < finetune.size(); ++e)
        os << e << ",finetune," << finetune[e] << '\n';
}

}  // namespace sdacs
