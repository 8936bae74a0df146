#pragma once
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdacs/image.hpp"
#include "sdacs/numeric.hpp"

namespace sdacs {

// Relative l2 error ||est - ref|| / ||ref||. An all-zero reference has no
// defined ratio and is rejected.
inline double relative_error(const Vector& reference, const Vector& estimate) {
    if (reference.size() != estimate.size())
        throw std::invalid_argument("relative_error: dimension mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = estimate[i] - reference[i];
        num += d * d;
        den += reference[i] * reference[i];
    }
    if (den == 0.0) throw std::invalid_argument("relative_error: all-zero reference");
    return std::sqrt(num / den);
}

// PSNR in dB with peak 1.0 (normalized pixels): 10 log10(1 / MSE).
// Identical images are reported as +infinity, the distinguished sentinel
// ("inf" in report rows), not as a finite number.
inline double psnr(const GrayImage& reference, const GrayImage& estimate) {
    if (reference.height != estimate.height || reference.width != estimate.width)
        throw std::invalid_argument("psnr: dimension mismatch");
    KahanSum se;
    for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
        const double d = estimate.pixels[i] - reference.pixels[i];
        se.add(d * d);
    }
    const double mse = se.value() / static_cast<double>(reference.pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

// Success indicator: relative l2 error at or below threshold (0.01 default).
inline bool success(const Vector& reference, const Vector& estimate, double threshold = 0.01) {
    return relative_error(reference, estimate) <= threshold;
}

// Empirical success probability P_delta = (1/s) sum_j success_j for each
// under-sampling ratio, using the given per-delta recovery function.
using RecoverFn = std::function<Vector(double delta, const Vector& signal)>;

inline std::vector<std::pair<double, double>> success_curve(
    const RecoverFn& recover, const std::vector<Vector>& signals,
    const std::vector<double>& deltas, double threshold = 0.01) {
    if (signals.empty()) throw std::invalid_argument("success_curve: empty signal set");
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (deltas[i] < deltas[i - 1])
            throw std::invalid_argument("success_curve: deltas must be sorted ascending");
    std::vector<std::pair<double, double>> curve;
    curve.reserve(deltas.size());
    for (double delta : deltas) {
        std::size_t wins = 0;
        for (const Vector& x : signals)
            if (success(x, recover(delta, x), threshold)) ++wins;
        curve.emplace_back(delta, static_cast<double>(wins) / static_cast<double>(signals.size()));
    }
    return curve;
}

// Median wall-clock seconds over `repetitions` timed runs; one untimed
// warm-up run first.
inline double time_recovery(const std::function<void()>& run, std::size_t repetitions) {
    if (repetitions < 3) throw std::invalid_argument("time_recovery: need repetitions >= 3");
    run();  // warm-up, excluded
    std::vector<double> t(repetitions);
    for (auto& ti : t) {
        const auto t0 = std::chrono::steady_clock::now();
        run();
        const auto t1 = std::chrono::steady_clock::now();
        ti = std::chrono::duration<double>(t1 - t0).count();
    }
    std::sort(t.begin(), t.end());
    const std::size_t mid = repetitions / 2;
    if (repetitions % 2 == 1) return t[mid];
    return 0.5 * (t[mid - 1] + t[mid]);
}

// One evaluation result. success is derived from rel_error and the threshold
// actually used, and psnr/rel_error always come from the same image pair.
struct RecoveryReport {
    std::string method;
    double delta = 0.0;
    double psnr_db = 0.0;
    double rel_error = 0.0;
    bool success = false;
    double recover_seconds = 0.0;
};

inline RecoveryReport make_report(std::string method, double delta, const GrayImage& reference,
                                  const GrayImage& estimate, double threshold,
                                  double recover_seconds) {
    RecoveryReport r;
    r.method = std::move(method);
    r.delta = delta;
    r.psnr_db = psnr(reference, estimate);
    r.rel_error = relative_error(reference.pixels, estimate.pixels);
    r.success = r.rel_error <= threshold;
    r.recover_seconds = recover_seconds;
    return r;
}

inline constexpr const char* kReportHeader = "method,delta,psnr_db,rel_error,success,recover_seconds";
inline constexpr const char* kCurveHeader = "delta,p_success";

inline std::string format_report_row(const RecoveryReport& r) {
    std::ostringstream os;
    os.precision(12);
    os << r.method << ',' << r.delta << ',';
    if (std::isinf(r.psnr_db))
        os << "inf";
    else
        os << r.psnr_db;
    os << ',' << r.rel_error << ',' << (r.success ? 1 : 0) << ',' << r.recover_seconds;
    return os.str();
}

inline std::string format_curve_row(double delta, double p_success) {
    std::ostringstream os;
    os.precision(12);
    os << delta << ',' << p_success;
    return os.str();
}

}  // namespace sdacs
