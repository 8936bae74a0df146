// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Runs everything at desk scale with fixed seeds.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sdacs/sdacs.hpp"

using namespace sdacs;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string id;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

std::vector<Criterion> g_results;

void record(const std::string& id, bool pass, const std::string& details, double seconds) {
    g_results.push_back({id, pass, details, seconds});
    std::printf("%s  %-3s %s  (%.1f s)\n", pass ? "PASS" : "FAIL", id.c_str(), details.c_str(),
                seconds);
    std::fflush(stdout);
}

void run_criterion(const std::string& id, const std::function<std::pair<bool, std::string>()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string details;
    try {
        const auto [p, d] = fn();
        pass = p;
        details = d;
    } catch (const std::exception& e) {
        pass = false;
        details = std::string("exception: ") + e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    record(id, pass, details, std::chrono::duration<double>(t1 - t0).count());
}

Matrix uniform_columns(std::size_t dim, std::size_t cols, Prng& rng) {
    Matrix m(dim, cols);
    for (auto& v : m.data) v = rng.next_uniform();
    return m;
}

// ---------------------------------------------------------------------------
// C1: gradient correctness across sizes and architectures.
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion1() {
    double worst = 0.0;
    for (const std::size_t n : {std::size_t{16}, std::size_t{64}, std::size_t{1024}}) {
        const auto m = static_cast<std::size_t>(std::ceil(0.25 * static_cast<double>(n)));
        Prng rng(4000 + n);
        Matrix x = uniform_columns(n, 3, rng);

        const LinearSda lmodel = init_l(n, m, rng);
        const LinearOperator op = sample_phi(m, n, 4100 + n);
        Matrix y(m, x.cols);
        for (std::size_t c = 0; c < x.cols; ++c) {
            Vector xi(n);
            for (std::size_t d = 0; d < n; ++d) xi[d] = x(d, c);
            const Vector yi = measure(op, xi);
            for (std::size_t d = 0; d < m; ++d) y(d, c) = yi[d];
        }
        worst = std::max(worst, gradient_check_l(lmodel, y, x, 1e-5));

        for (const auto act : {MeasurementActivation::Sigmoid, MeasurementActivation::Identity}) {
            const NonlinearSda nmodel = init_nl(n, m, act, rng);
            worst = std::max(worst, gradient_check_nl(nmodel, x, 1e-5));
        }
    }
    std::ostringstream os;
    os << "gradient correctness: max rel error " << worst << " (threshold 1e-6)";
    return {worst <= 1e-6, os.str()};
}

// ---------------------------------------------------------------------------
// C2: Haar isometry on 100 random 32x32 patches.
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion2() {
    const HaarBasis basis = full_haar_basis(32);
    Prng rng(4200);
    double worst_rt = 0.0, worst_parseval = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Vector x(1024);
        for (auto& v : x) v = rng.next_uniform();
        const Vector s = haar_forward(x, basis);
        const Vector back = haar_inverse(s, basis);
        for (std::size_t i = 0; i < x.size(); ++i)
            worst_rt = std::max(worst_rt, std::abs(back[i] - x[i]));
        worst_parseval = std::max(worst_parseval, std::abs(norm2(s) - norm2(x)));
    }
    std::ostringstream os;
    os << "Haar isometry: round-trip " << worst_rt << ", Parseval " << worst_parseval
       << " (threshold 1e-10)";
    return {worst_rt <= 1e-10 && worst_parseval <= 1e-10, os.str()};
}

// ---------------------------------------------------------------------------
// C3: ISTA oracle at the pinned parameters (lambda = 1e-4, 500 iterations).
// ---------------------------------------------------------------------------

struct IstaOracleOutcome {
    std::size_t hits = 0;
    std::size_t monotone = 0;
    std::size_t total = 0;
};

IstaOracleOutcome ista_oracle(double lambda, std::size_t iters) {
    const HaarBasis basis = full_haar_basis(8);
    Prng rng(4300);
    IstaOracleOutcome out;
    out.total = 50;
    IstaConfig cfg;
    cfg.lambda = lambda;
    cfg.max_iters = iters;
    for (std::size_t trial = 0; trial < out.total; ++trial) {
        const SparseSignal sig = sparse_haar_signal(basis, 5, rng);
        const LinearOperator op = sample_phi(48, 64, 4400 + trial);
        const IstaResult res = ista_recover(measure(op, sig.x), op, basis, cfg);
        if (relative_error(sig.x, res.xhat) <= 1e-2) ++out.hits;
        bool mono = true;
        for (std::size_t t = 1; t < res.objective.size(); ++t)
            if (res.objective[t] > res.objective[t - 1] + 1e-12) mono = false;
        if (mono) ++out.monotone;
    }
    return out;
}

std::pair<bool, std::string> criterion3() {
    const IstaOracleOutcome pinned = ista_oracle(1e-4, 500);
    const bool pass = pinned.hits * 10 >= pinned.total * 9 && pinned.monotone == pinned.total;
    std::ostringstream os;
    os << "ISTA oracle (lambda 1e-4, 500 iters): " << pinned.hits << "/" << pinned.total
       << " within 1e-2 (need >= 45), objective non-increasing " << pinned.monotone << "/"
       << pinned.total;
    if (!pass && pinned.monotone == pinned.total) {
        // Solver-correctness diagnostic, not part of the criterion: the same
        // instances at a lambda matched to the unit signal scale.
        const IstaOracleOutcome diag = ista_oracle(1e-2, 500);
        os << " | diagnostic (non-criterion) lambda 1e-2: " << diag.hits << "/" << diag.total
           << " within 1e-2 — solver converges; the pinned lambda/iteration pairing cannot"
              " (soft-threshold shrinkage budget step*lambda*iters ~ 0.01 per coefficient)";
    }
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// C4: extract(stride 16) -> reassemble is exact on 10 random 256x256 images.
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion4() {
    Prng rng(4500);
    for (int trial = 0; trial < 10; ++trial) {
        GrayImage img(256, 256);
        for (auto& v : img.pixels) v = rng.next_uniform();
        const PatchBatch batch = extract_patches(img, 32, 16);
        const GrayImage back = reassemble(batch, 256, 256);
        if (back.pixels != img.pixels)
            return {false, "patch pipeline identity: round trip differs on image " +
                               std::to_string(trial)};
    }
    return {true, "patch pipeline identity: 10/10 images bit-equal after the round trip"};
}

// ---------------------------------------------------------------------------
// C5: pre-training benefit after 50 fine-tuning epochs, 4 of 5 seeds.
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion5() {
    TrainConfig proto;
    proto.pretrain_learning_rate = 0.003;
    proto.pretrain_epochs = 3;
    proto.finetune_learning_rate = 0.003;
    proto.finetune_epochs = 50;
    proto.corruption_std = 0.2;

    int wins = 0;
    std::ostringstream detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Prng data_rng(9000 + seed);
        const Matrix patches = synthetic_patches(2000, 32, data_rng, 256);
        const LinearOperator op = sample_phi(256, 1024, 100 + seed);
        const TrainingSet set = make_training_set(patches, op);
        TrainConfig cfg = proto;
        cfg.seed = seed;

        Prng rng(cfg.seed);
        LinearSda raw = init_l(1024, 256, rng);
        LinearSda pre = raw;
        Prng rng_pre = rng;
        pretrain_l(pre, set, cfg, rng_pre);
        const auto tr_pre = finetune_l(pre, set, cfg, rng_pre);
        Prng rng_raw = rng;
        const auto tr_raw = finetune_l(raw, set, cfg, rng_raw);
        const bool win = tr_pre.back() < tr_raw.back();
        wins += win;
        detail << (win ? " +" : " -") << "seed" << seed << "(" << tr_pre.back() << " vs "
               << tr_raw.back() << ")";
    }
    std::ostringstream os;
    os << "pre-training benefit at 50 epochs: " << wins << "/5 seeds (need >= 4):" << detail.str();
    return {wins >= 4, os.str()};
}

// ---------------------------------------------------------------------------
// C6: NL-SDA beats L-SDA in mean held-out PSNR at equal budgets.
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion6() {
    Prng data_rng(4600);
    const Matrix train = synthetic_patches(2048, 32, data_rng, 256);
    const Matrix held = synthetic_patches(512, 32, data_rng, 256);

    TrainConfig cfg;
    cfg.pretrain_learning_rate = 0.003;
    cfg.pretrain_epochs = 3;
    cfg.finetune_learning_rate = 0.01;
    cfg.finetune_epochs = 60;
    cfg.seed = 11;

    const LinearOperator op = sample_phi(256, 1024, 4700);
    const TrainResultL lres = train_l(train, op, cfg);
    const TrainResultNl nres = train_nl(train, 256, MeasurementActivation::Sigmoid, cfg);

    const auto patch_image = [](const Vector& v) {
        GrayImage img(32, 32);
        img.pixels = v;
        return img;
    };
    double l_sum = 0.0, nl_sum = 0.0;
    for (std::size_t i = 0; i < held.rows; ++i) {
        Vector x(held.row(i), held.row(i) + held.cols);
        const Vector l_hat = forward_l(lres.model, measure(op, x));
        const Vector nl_hat = forward_nl(nres.model, x).xhat;
        l_sum += psnr(patch_image(x), patch_image(l_hat));
        nl_sum += psnr(patch_image(x), patch_image(nl_hat));
    }
    const double l_mean = l_sum / static_cast<double>(held.rows);
    const double nl_mean = nl_sum / static_cast<double>(held.rows);
    std::ostringstream os;
    os << "NL > L direction: mean held-out PSNR nl-sda " << nl_mean << " dB vs l-sda " << l_mean
       << " dB over " << held.rows << " patches";
    return {nl_mean > l_mean, os.str()};
}

// ---------------------------------------------------------------------------
// C7: feed-forward recovery at least 10x faster than 100-iteration ISTA.
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion7() {
    Prng rng(4800);
    const LinearSda model = init_l(1024, 256, rng);  // timing does not need training
    const LinearOperator op = sample_phi(256, 1024, 4900);
    Prng img_rng(5000);
    const GrayImage img = synthetic_image(256, img_rng);
    const PatchBatch batch = extract_patches(img, 32, 16);
    const auto ys = measure_patches(op, batch.patches);

    const double sda_seconds =
        time_recovery([&] { recover_patches_l(model, ys, 1); }, 3);

    const HaarBasis basis = full_haar_basis(32);
    IstaConfig cfg;
    cfg.lambda = 1e-3;
    cfg.max_iters = 100;
    cfg.step = 1.0 / (1.05 * estimate_max_eigenvalue(op));
    const double ista_seconds =
        time_recovery([&] { recover_patches_ista(op, basis, cfg, ys, 1); }, 3);

    const double ratio = ista_seconds / sda_seconds;
    std::ostringstream os;
    os << "speed gap: ista " << ista_seconds << " s vs feed-forward " << sda_seconds << " s ("
       << ratio << "x, need >= 10x) on " << ys.size() << " patches";
    return {ratio >= 10.0, os.str()};
}

// ---------------------------------------------------------------------------
// C8: ISTA success curve is monotone and reaches 0.9 at delta = 0.9.
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion8() {
    const std::size_t s = 100;
    const HaarBasis basis = full_haar_basis(16);  // n = 256
    const std::size_t n = 256;
    const std::size_t k = 13;  // K/n ~ 0.05
    Prng rng(5100);
    std::vector<Vector> signals;
    signals.reserve(s);
    for (std::size_t i = 0; i < s; ++i) signals.push_back(sparse_haar_signal(basis, k, rng).x);

    const std::vector<double> deltas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    IstaConfig cfg;
    cfg.lambda = 1e-2;
    cfg.max_iters = 500;

    std::vector<double> curve;
    std::ostringstream points;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const auto m = static_cast<std::size_t>(std::llround(deltas[i] * n));
        const LinearOperator op = sample_phi(m, n, 5200 + i);
        const auto point = success_curve(
            [&](double, const Vector& x) {
                return ista_recover(measure(op, x), op, basis, cfg).xhat;
            },
            signals, {deltas[i]});
        curve.push_back(point[0].second);
        points << " " << deltas[i] << ":" << point[0].second;
    }
    const double slack = 2.0 / std::sqrt(static_cast<double>(s));
    bool monotone = true;
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i] < curve[i - 1] - slack) monotone = false;
    const bool tail = curve.back() >= 0.9;
    std::ostringstream os;
    os << "success curve (s=" << s << ", K/n=" << static_cast<double>(k) / n
       << "): P:" << points.str() << " | monotone within " << slack << ": "
       << (monotone ? "yes" : "NO") << ", P(0.9) >= 0.9: " << (tail ? "yes" : "NO");
    return {monotone && tail, os.str()};
}

// ---------------------------------------------------------------------------
// C9: DAE energy and reconstruction ordering, patches vs uniform vectors.
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion9() {
    Prng data_rng(5300);
    const Matrix train = synthetic_patches(1500, 32, data_rng, 256);
    const Matrix held = synthetic_patches(200, 32, data_rng, 256);

    TrainConfig cfg;
    cfg.pretrain_learning_rate = 0.01;
    cfg.pretrain_epochs = 10;
    Prng rng(5400);
    const TrainedDae dae = pretrain_layer(train, 256, cfg, rng);

    Prng urng(5500);
    Matrix uniforms(200, 1024);
    for (auto& v : uniforms.data) v = urng.next_uniform();

    const auto mean_energy_and_err = [&](const Matrix& rows) {
        double energy = 0.0, err = 0.0;
        for (std::size_t i = 0; i < rows.rows; ++i) {
            Vector x(rows.row(i), rows.row(i) + rows.cols);
            energy += dae_energy(dae.layer, x);
            const Vector rec = dae_reconstruct(dae, x);
            double se = 0.0;
            for (std::size_t d = 0; d < x.size(); ++d) se += (rec[d] - x[d]) * (rec[d] - x[d]);
            err += se;
        }
        return std::pair<double, double>{energy / static_cast<double>(rows.rows),
                                         err / static_cast<double>(rows.rows)};
    };
    const auto [patch_energy, patch_err] = mean_energy_and_err(held);
    const auto [rand_energy, rand_err] = mean_energy_and_err(uniforms);

    std::ostringstream os;
    os << "energy ordering: mean dae_energy patches " << patch_energy << " vs uniform "
       << rand_energy << " (reported, not gated); reconstruction error patches " << patch_err
       << " vs uniform " << rand_err << " (gated: patches strictly lower)";
    return {patch_err < rand_err, os.str()};
}

// ---------------------------------------------------------------------------
// C10: byte-identical model files from identical train runs.
// ---------------------------------------------------------------------------

std::string file_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::pair<bool, std::string> criterion10() {
    Prng data_rng(5600);
    const Matrix patches = synthetic_patches(400, 16, data_rng, 128);
    const LinearOperator op = sample_phi(64, 256, 5700);
    TrainConfig cfg;
    cfg.pretrain_epochs = 2;
    cfg.finetune_epochs = 3;
    cfg.seed = 99;

    const fs::path dir = fs::temp_directory_path() / "sdacs_acceptance";
    fs::create_directories(dir);
    const auto run_once = [&](const fs::path& out) {
        const TrainResultL res = train_l(patches, op, cfg);
        save_model(res.model, op, out);
    };
    run_once(dir / "det_a.sdam");
    run_once(dir / "det_b.sdam");
    const bool same = file_bytes(dir / "det_a.sdam") == file_bytes(dir / "det_b.sdam");
    return {same, std::string("determinism: two identical train runs produce ") +
                      (same ? "byte-identical" : "DIFFERENT") + " model files"};
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    run_criterion("C1", criterion1);
    run_criterion("C2", criterion2);
    run_criterion("C3", criterion3);
    run_criterion("C4", criterion4);
    run_criterion("C5", criterion5);
    run_criterion("C6", criterion6);
    run_criterion("C7", criterion7);
    run_criterion("C8", criterion8);
    run_criterion("C9", criterion9);
    run_criterion("C10", criterion10);

    std::size_t passed = 0;
    for (const auto& r : g_results) passed += r.pass;
    std::printf("%zu/%zu criteria passed\n", passed, g_results.size());
    return passed == g_results.size() ? 0 : 1;
}
