#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sdacs/haar.hpp"
#include "sdacs/measurement.hpp"
#include "sdacs/numeric.hpp"

namespace sdacs {

// ISTA solver settings for min_s 1/2 ||y - Phi Psi s||^2 + lambda ||s||_1.
// step == 0 selects the automatic step 1/L, with L the largest eigenvalue of
// Phi^T Phi estimated by power iteration (30 iterations, fixed seed). The
// estimate is inflated by 5% so the step never exceeds 1/L and the objective
// stays non-increasing.
struct IstaConfig {
    double lambda = 1e-3;
    std::size_t max_iters = 500;
    double step = 0.0;  // 0 = auto
};

inline double soft_threshold(double v, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("soft_threshold: lambda must be >= 0");
    const double mag = std::abs(v) - lambda;
    if (mag <= 0.0) return 0.0;
    return v < 0.0 ? -mag : mag;
}

// Largest eigenvalue of Phi^T Phi by power iteration.
inline double estimate_max_eigenvalue(const LinearOperator& op, std::size_t iters = 30) {
    Prng rng(0x9e3779b97f4a7c15ULL);
    Vector v(op.n);
    for (auto& x : v) x = rng.next_normal();
    double lambda = 1.0;
    for (std::size_t it = 0; it < iters; ++it) {
        Vector w = measure_adjoint(op, measure(op, v));
        lambda = norm2(w);
        if (lambda == 0.0) return 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / lambda;
    }
    return lambda;
}

struct IstaResult {
    Vector xhat;                    // Psi s_final, clamped to [0, 1]
    std::vector<double> objective;  // objective at s_0 .. s_T (length iters + 1)
    double step_used = 0.0;
};

// Proximal gradient iteration
//   s_{t+1} = soft_threshold(s_t + step * Psi^T Phi^T (y - Phi Psi s_t), step * lambda)
// started from s_0 = 0. Non-convergence is not an error; with step <= 1/L the
// objective is non-increasing, so the last iterate is the best one.
inline IstaResult ista_recover(const Vector& y, const LinearOperator& op, const HaarBasis& basis,
                               const IstaConfig& cfg) {
    if (y.size() != op.m) throw std::invalid_argument("ista_recover: y must have dim m");
    if (op.n != basis.size * basis.size)
        throw std::invalid_argument("ista_recover: operator n must equal basis size^2");
    if (!(cfg.lambda > 0.0)) throw std::invalid_argument("ista_recover: lambda must be > 0");
    if (cfg.step < 0.0) throw std::invalid_argument("ista_recover: step must be >= 0");

    double step = cfg.step;
    if (step == 0.0) {
        const double lmax = estimate_max_eigenvalue(op);
        if (lmax <= 0.0) throw std::invalid_argument("ista_recover: degenerate operator");
        step = 1.0 / (1.05 * lmax);
    }

    const std::size_t n = op.n;
    Vector s(n, 0.0);
    IstaResult res;
    res.step_used = step;
    res.objective.reserve(cfg.max_iters + 1);

    const auto objective = [&](const Vector& coeffs, const Vector& residual) {
        KahanSum obj;
        for (double r : residual) obj.add(0.5 * r * r);
        for (double c : coeffs) obj.add(cfg.lambda * std::abs(c));
        return obj.value();
    };

    Vector x = haar_inverse(s, basis);
    for (std::size_t t = 0; t < cfg.max_iters; ++t) {
        Vector residual = y;
        const Vector yx = measure(op, x);
        for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= yx[i];
        res.objective.push_back(objective(s, residual));

        const Vector grad = haar_forward(measure_adjoint(op, residual), basis);
        const double thresh = step * cfg.lambda;
        for (std::size_t j = 0; j < n; ++j)
            s[j] = soft_threshold(s[j] + step * grad[j], thresh);
        x = haar_inverse(s, basis);
    }
    {
        Vector residual = y;
        const Vector yx = measure(op, x);
        for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= yx[i];
        res.objective.push_back(objective(s, residual));
    }

    res.xhat = std::move(x);
    for (auto& v : res.xhat) v = std::clamp(v, 0.0, 1.0);
    return res;
}

}  // namespace sdacs
