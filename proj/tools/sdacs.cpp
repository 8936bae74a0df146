// Command-line front end: dataset preparation, training, recovery,
// evaluation, phase curves, benchmarks, and gradient checking.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdacs/sdacs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Operator seed derivation keeps the Phi stream distinct from the stream
// that initializes the weights.
constexpr std::uint64_t kPhiSeedSalt = 0x9e3779b97f4a7c15ULL;

std::size_t resolve_threads(std::size_t flag) {
    return flag == 0 ? sdacs::parallel::thread_count() : flag;
}

std::vector<fs::path> list_pgms(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw sdacs::IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw sdacs::IoError("no .pgm files in " + dir.string());
    return files;
}

std::ofstream open_text(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw sdacs::IoError("cannot open for writing: " + path.string());
    return os;
}

double time_once(const std::function<void()>& run) {
    const auto t0 = std::chrono::steady_clock::now();
    run();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

struct PrepareArgs {
    std::string data_dir;
    std::string out_file;
    std::size_t patch_size = 32;
    std::size_t crop = 256;
    std::size_t stride = 0;  // 0 -> patch_size (non-overlapping)
};

int run_prepare(const PrepareArgs& a) {
    const auto files = list_pgms(a.data_dir);
    const std::size_t stride = a.stride == 0 ? a.patch_size : a.stride;

    sdacs::write_manifest(fs::path(a.out_file).string() + ".manifest.json", "prepare",
                          json{{"data", a.data_dir},
                               {"out", a.out_file},
                               {"patch_size", a.patch_size},
                               {"crop", a.crop},
                               {"stride", stride}},
                          files);

    sdacs::PatchDataset ds;
    ds.patch_size = a.patch_size;
    std::vector<sdacs::Vector> all;
    for (const auto& file : files) {
        sdacs::GrayImage img = sdacs::load_pgm(file);
        if (a.crop > 0) img = sdacs::central_crop(img, a.crop);
        const sdacs::PatchBatch batch = sdacs::extract_patches(img, a.patch_size, stride);
        all.insert(all.end(), batch.patches.begin(), batch.patches.end());
    }
    ds.patches = sdacs::Matrix(all.size(), a.patch_size * a.patch_size);
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = 0; j < all[i].size(); ++j) ds.patches(i, j) = all[i][j];
    sdacs::save_dataset(ds, a.out_file);
    std::cout << "wrote " << ds.patches.rows << " patches (" << a.patch_size << "x"
              << a.patch_size << ") to " << a.out_file << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string arch;
    double delta = 0.25;
    std::string data_file;
    std::string out_dir;
    std::string activation = "sigmoid";
    sdacs::TrainConfig cfg;
};

int run_train(const TrainArgs& a) {
    const sdacs::PatchDataset ds = sdacs::load_dataset(a.data_file);
    const std::size_t n = ds.patch_size * ds.patch_size;
    const auto m = static_cast<std::size_t>(std::llround(a.delta * static_cast<double>(n)));
    if (m < 1 || m >= n)
        throw std::invalid_argument("--delta " + std::to_string(a.delta) +
                                    " gives M = " + std::to_string(m) +
                                    ", outside 1 <= M < N = " + std::to_string(n));

    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    sdacs::write_manifest(out / "manifest.json", "train",
                          json{{"arch", a.arch},
                               {"delta", a.delta},
                               {"data", a.data_file},
                               {"out", a.out_dir},
                               {"activation", a.activation},
                               {"m", m},
                               {"n", n},
                               {"seed", a.cfg.seed},
                               {"pretrain_epochs", a.cfg.pretrain_epochs},
                               {"finetune_epochs", a.cfg.finetune_epochs},
                               {"batch_size", a.cfg.batch_size},
                               {"pretrain_lr", a.cfg.pretrain_learning_rate},
                               {"finetune_lr", a.cfg.finetune_learning_rate},
                               {"corruption_std", a.cfg.corruption_std}},
                          {a.data_file});

    sdacs::PretrainTraces pre;
    std::vector<double> ft;
    if (a.arch == "l-sda") {
        const sdacs::LinearOperator op = sdacs::sample_phi(m, n, a.cfg.seed ^ kPhiSeedSalt);
        sdacs::TrainResultL res = sdacs::train_l(ds.patches, op, a.cfg);
        sdacs::save_model(res.model, op, out / "model.sdam");
        pre = std::move(res.pretrain);
        ft = std::move(res.finetune);
    } else {
        const auto act = a.activation == "identity" ? sdacs::MeasurementActivation::Identity
                                                    : sdacs::MeasurementActivation::Sigmoid;
        sdacs::TrainResultNl res = sdacs::train_nl(ds.patches, m, act, a.cfg);
        sdacs::save_model(res.model, std::nullopt, out / "model.sdam");
        pre = std::move(res.pretrain);
        ft = std::move(res.finetune);
    }
    auto trace = open_text(out / "trace.csv");
    sdacs::write_trace_csv(trace, pre, ft);
    std::cout << "trained " << a.arch << " (n=" << n << ", m=" << m
              << "), final loss " << ft.back() << "\n"
              << "model: " << (out / "model.sdam").string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// recover / eval
// ---------------------------------------------------------------------------

struct RecoverArgs {
    std::string model_file;
    std::string input;  // file for recover, directory for eval
    std::string out_dir;
    std::string method = "sda";
    std::size_t stride = 16;
    std::size_t crop = 0;
    double lambda = 1e-3;
    std::size_t iters = 500;
    double threshold = 0.01;
    std::size_t threads = 0;
    bool save_recon = false;
};

struct RecoverOutcome {
    sdacs::GrayImage recon;
    double seconds = 0.0;  // patch-recovery stage only
    std::string method;
    double delta = 0.0;
};

RecoverOutcome recover_one(const sdacs::LoadedModel& loaded, const RecoverArgs& a,
                           const sdacs::GrayImage& img) {
    const std::size_t threads = resolve_threads(a.threads);
    RecoverOutcome out;
    if (a.method == "ista") {
        if (!loaded.op)
            throw std::invalid_argument(
                "--method ista needs a model file with an embedded operator");
        const sdacs::LinearOperator& op = *loaded.op;
        const sdacs::HaarBasis basis = sdacs::full_haar_basis(sdacs::patch_size_for(op.n));
        sdacs::IstaConfig cfg;
        cfg.lambda = a.lambda;
        cfg.max_iters = a.iters;
        cfg.step = 1.0 / (1.05 * sdacs::estimate_max_eigenvalue(op));
        const sdacs::PatchBatch batch = sdacs::extract_patches(img, basis.size, a.stride);
        const auto ys = sdacs::measure_patches(op, batch.patches);
        std::vector<sdacs::Vector> recovered;
        out.seconds = time_once(
            [&] { recovered = sdacs::recover_patches_ista(op, basis, cfg, ys, threads); });
        sdacs::PatchBatch rec = batch;
        rec.patches = std::move(recovered);
        out.recon = sdacs::reassemble(rec, img.height, img.width);
        out.method = "ista";
        out.delta = op.delta();
        return out;
    }
    if (const auto* l = std::get_if<sdacs::LinearSda>(&loaded.model)) {
        if (!loaded.op)
            throw std::invalid_argument("L-SDA recovery needs the embedded measurement operator");
        const sdacs::LinearOperator& op = *loaded.op;
        const sdacs::PatchBatch batch =
            sdacs::extract_patches(img, sdacs::patch_size_for(l->n), a.stride);
        const auto ys = sdacs::measure_patches(op, batch.patches);
        std::vector<sdacs::Vector> recovered;
        out.seconds = time_once([&] { recovered = sdacs::recover_patches_l(*l, ys, threads); });
        sdacs::PatchBatch rec = batch;
        rec.patches = std::move(recovered);
        out.recon = sdacs::reassemble(rec, img.height, img.width);
        out.method = "l-sda";
        out.delta = static_cast<double>(l->m) / static_cast<double>(l->n);
        return out;
    }
    const auto& nl = std::get<sdacs::NonlinearSda>(loaded.model);
    const sdacs::PatchBatch batch =
        sdacs::extract_patches(img, sdacs::patch_size_for(nl.n), a.stride);
    std::vector<sdacs::Vector> recovered;
    out.seconds =
        time_once([&] { recovered = sdacs::recover_patches_nl(nl, batch.patches, threads); });
    sdacs::PatchBatch rec = batch;
    rec.patches = std::move(recovered);
    out.recon = sdacs::reassemble(rec, img.height, img.width);
    out.method = "nl-sda";
    out.delta = static_cast<double>(nl.m) / static_cast<double>(nl.n);
    return out;
}

json recover_config_json(const RecoverArgs& a, const char* input_key) {
    return json{{"model", a.model_file}, {input_key, a.input},       {"out", a.out_dir},
                {"method", a.method},    {"stride", a.stride},       {"crop", a.crop},
                {"lambda", a.lambda},    {"iters", a.iters},         {"threshold", a.threshold},
                {"threads", a.threads},  {"save_recon", a.save_recon}};
}

int run_recover(const RecoverArgs& a) {
    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    sdacs::write_manifest(out / "manifest.json", "recover", recover_config_json(a, "input"),
                          {a.model_file, a.input});

    const sdacs::LoadedModel loaded = sdacs::load_model(a.model_file);
    sdacs::GrayImage img = sdacs::load_pgm(a.input);
    if (a.crop > 0) img = sdacs::central_crop(img, a.crop);
    const RecoverOutcome res = recover_one(loaded, a, img);

    const fs::path recon_path = out / (fs::path(a.input).stem().string() + "_recon.pgm");
    sdacs::save_pgm(res.recon, recon_path);
    const sdacs::RecoveryReport report =
        sdacs::make_report(res.method, res.delta, img, res.recon, a.threshold, res.seconds);
    auto csv = open_text(out / "report.csv");
    csv << sdacs::kReportHeader << '\n' << sdacs::format_report_row(report) << '\n';
    std::cout << sdacs::kReportHeader << '\n'
              << sdacs::format_report_row(report) << '\n'
              << "reconstruction: " << recon_path.string() << "\n";
    return kExitOk;
}

int run_eval(const RecoverArgs& a) {
    const auto files = list_pgms(a.input);
    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    std::vector<fs::path> inputs{fs::path(a.model_file)};
    inputs.insert(inputs.end(), files.begin(), files.end());
    sdacs::write_manifest(out / "manifest.json", "eval", recover_config_json(a, "data"), inputs);

    const sdacs::LoadedModel loaded = sdacs::load_model(a.model_file);
    auto csv = open_text(out / "report.csv");
    csv << sdacs::kReportHeader << '\n';
    for (const auto& file : files) {
        sdacs::GrayImage img = sdacs::load_pgm(file);
        if (a.crop > 0) img = sdacs::central_crop(img, a.crop);
        const RecoverOutcome res = recover_one(loaded, a, img);
        if (a.save_recon) sdacs::save_pgm(res.recon, out / (file.stem().string() + "_recon.pgm"));
        const sdacs::RecoveryReport report =
            sdacs::make_report(res.method, res.delta, img, res.recon, a.threshold, res.seconds);
        csv << sdacs::format_report_row(report) << '\n';
        std::cout << file.filename().string() << ": " << sdacs::format_report_row(report) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// phase-curve
// ---------------------------------------------------------------------------

struct CurveArgs {
    std::string out_dir;
    std::string deltas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    std::size_t signals = 100;
    std::size_t size = 16;
    std::size_t sparsity = 13;
    double lambda = 1e-3;
    std::size_t iters = 500;
    double threshold = 0.01;
    std::uint64_t seed = 1;
};

std::vector<double> parse_deltas(const std::string& text) {
    std::vector<double> deltas;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const double d = std::stod(tok);
        if (!(d > 0.0) || d > 1.0)
            throw CLI::ValidationError("--deltas", "each delta must be in (0, 1]");
        deltas.push_back(d);
    }
    if (deltas.empty()) throw CLI::ValidationError("--deltas", "no values given");
    if (!std::is_sorted(deltas.begin(), deltas.end()))
        throw CLI::ValidationError("--deltas", "values must be ascending");
    return deltas;
}

int run_phase_curve(const CurveArgs& a) {
    const std::vector<double> deltas = parse_deltas(a.deltas);
    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    sdacs::write_manifest(out / "manifest.json", "phase-curve",
                          json{{"out", a.out_dir},
                               {"deltas", a.deltas},
                               {"signals", a.signals},
                               {"size", a.size},
                               {"sparsity", a.sparsity},
                               {"lambda", a.lambda},
                               {"iters", a.iters},
                               {"threshold", a.threshold},
                               {"seed", a.seed}},
                          {});

    const sdacs::HaarBasis basis = sdacs::full_haar_basis(a.size);
    const std::size_t n = a.size * a.size;
    sdacs::Prng rng(a.seed);
    std::vector<sdacs::Vector> signals;
    signals.reserve(a.signals);
    for (std::size_t i = 0; i < a.signals; ++i)
        signals.push_back(sdacs::sparse_haar_signal(basis, a.sparsity, rng).x);

    sdacs::IstaConfig cfg;
    cfg.lambda = a.lambda;
    cfg.max_iters = a.iters;
    std::vector<sdacs::LinearOperator> ops;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const auto m = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(deltas[i] * static_cast<double>(n))));
        ops.push_back(sdacs::sample_phi(std::min(m, n), n, a.seed + 1000 + i));
    }

    auto csv = open_text(out / "curve.csv");
    csv << sdacs::kCurveHeader << '\n';
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const sdacs::LinearOperator& op = ops[i];
        const auto recover = [&](double, const sdacs::Vector& x) {
            return sdacs::ista_recover(sdacs::measure(op, x), op, basis, cfg).xhat;
        };
        const auto point = sdacs::success_curve(recover, signals, {deltas[i]}, a.threshold);
        csv << sdacs::format_curve_row(point[0].first, point[0].second) << '\n';
        std::cout << sdacs::format_curve_row(point[0].first, point[0].second) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string model_file;
    std::string input;
    std::string out_dir;
    std::size_t stride = 16;
    std::size_t crop = 0;
    std::size_t ista_iters = 100;
    double lambda = 1e-3;
    std::size_t reps = 5;
    double threshold = 0.01;
    bool parallel = false;
};

int run_bench(const BenchArgs& a) {
    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    sdacs::write_manifest(out / "manifest.json", "bench",
                          json{{"model", a.model_file},
                               {"input", a.input},
                               {"out", a.out_dir},
                               {"stride", a.stride},
                               {"crop", a.crop},
                               {"ista_iters", a.ista_iters},
                               {"lambda", a.lambda},
                               {"reps", a.reps},
                               {"parallel", a.parallel}},
                          {a.model_file, a.input});

    const sdacs::LoadedModel loaded = sdacs::load_model(a.model_file);
    if (!loaded.op)
        throw std::invalid_argument("bench needs a model file with an embedded operator");
    const sdacs::LinearOperator& op = *loaded.op;
    sdacs::GrayImage img = sdacs::load_pgm(a.input);
    if (a.crop > 0) img = sdacs::central_crop(img, a.crop);

    // Single-threaded by default so per-patch times are comparable.
    const std::size_t threads = a.parallel ? sdacs::parallel::thread_count() : 1;
    const std::size_t patch = sdacs::patch_size_for(op.n);
    const sdacs::PatchBatch batch = sdacs::extract_patches(img, patch, a.stride);
    const auto ys = sdacs::measure_patches(op, batch.patches);

    auto csv = open_text(out / "bench.csv");
    csv << sdacs::kReportHeader << '\n';

    const auto report_method = [&](const std::string& name,
                                   const std::function<std::vector<sdacs::Vector>()>& solve) {
        std::vector<sdacs::Vector> recovered;
        const double median = sdacs::time_recovery([&] { recovered = solve(); }, a.reps);
        sdacs::PatchBatch rec = batch;
        rec.patches = std::move(recovered);
        const sdacs::GrayImage recon = sdacs::reassemble(rec, img.height, img.width);
        const sdacs::RecoveryReport report =
            sdacs::make_report(name, op.delta(), img, recon, a.threshold, median);
        csv << sdacs::format_report_row(report) << '\n';
        std::cout << sdacs::format_report_row(report) << '\n';
        return median;
    };

    double sda_seconds = 0.0;
    if (const auto* l = std::get_if<sdacs::LinearSda>(&loaded.model)) {
        sda_seconds =
            report_method("l-sda", [&] { return sdacs::recover_patches_l(*l, ys, threads); });
    } else {
        const auto& nl = std::get<sdacs::NonlinearSda>(loaded.model);
        sda_seconds = report_method(
            "nl-sda", [&] { return sdacs::recover_patches_nl(nl, batch.patches, threads); });
    }

    const sdacs::HaarBasis basis = sdacs::full_haar_basis(patch);
    sdacs::IstaConfig cfg;
    cfg.lambda = a.lambda;
    cfg.max_iters = a.ista_iters;
    cfg.step = 1.0 / (1.05 * sdacs::estimate_max_eigenvalue(op));
    const double ista_seconds = report_method(
        "ista", [&] { return sdacs::recover_patches_ista(op, basis, cfg, ys, threads); });

    std::cout << "speedup (ista / sda): " << ista_seconds / sda_seconds << "x\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// grad-check
// ---------------------------------------------------------------------------

struct GradCheckArgs {
    std::string arch = "l-sda";
    std::string activation = "sigmoid";
    std::size_t n = 64;
    double delta = 0.25;
    std::size_t batch = 4;
    double step = 1e-5;
    std::uint64_t seed = 1;
};

int run_grad_check(const GradCheckArgs& a) {
    const auto m = static_cast<std::size_t>(std::llround(a.delta * static_cast<double>(a.n)));
    if (m < 1 || m >= a.n) throw std::invalid_argument("--delta gives M outside 1 <= M < N");
    sdacs::Prng rng(a.seed);
    sdacs::Matrix x(a.n, a.batch);
    for (auto& v : x.data) v = rng.next_uniform();

    double err = 0.0;
    if (a.arch == "l-sda") {
        const sdacs::LinearSda model = sdacs::init_l(a.n, m, rng);
        const sdacs::LinearOperator op = sdacs::sample_phi(m, a.n, a.seed ^ kPhiSeedSalt);
        sdacs::Matrix y(m, a.batch);
        for (std::size_t c = 0; c < a.batch; ++c) {
            sdacs::Vector xi(a.n);
            for (std::size_t d = 0; d < a.n; ++d) xi[d] = x(d, c);
            const sdacs::Vector yi = sdacs::measure(op, xi);
            for (std::size_t d = 0; d < m; ++d) y(d, c) = yi[d];
        }
        err = sdacs::gradient_check_l(model, y, x, a.step);
    } else {
        const auto act = a.activation == "identity" ? sdacs::MeasurementActivation::Identity
                                                    : sdacs::MeasurementActivation::Sigmoid;
        const sdacs::NonlinearSda model = sdacs::init_nl(a.n, m, act, rng);
        err = sdacs::gradient_check_nl(model, x, a.step);
    }
    std::cout << "max relative gradient error: " << err << "\n";
    if (err > 1e-6) {
        std::cerr << "gradient check FAILED threshold 1e-6\n";
        return kExitNumeric;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressive image sensing and recovery with stacked denoising autoencoders"};
    app.require_subcommand(1);
    app.set_version_flag("--version", sdacs::kToolkitVersion);

    PrepareArgs prep;
    auto* prepare = app.add_subcommand("prepare", "Crop and patch PGM images into a dataset file");
    prepare->add_option("--data", prep.data_dir, "Directory of .pgm images")->required();
    prepare->add_option("--out", prep.out_file, "Output dataset file (SDAP)")->required();
    prepare->add_option("--patch-size", prep.patch_size)->check(CLI::PositiveNumber);
    prepare->add_option("--crop", prep.crop, "Central crop size (0 = none)");
    prepare->add_option("--stride", prep.stride, "Patch stride (0 = patch size)");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Pre-train and fine-tune a recovery network");
    train_cmd->add_option("--arch", train.arch)->required()
        ->check(CLI::IsMember({"l-sda", "nl-sda"}));
    train_cmd->add_option("--delta", train.delta, "Under-sampling ratio M/N")->required()
        ->check(CLI::Range(1e-9, 1.0));
    train_cmd->add_option("--data", train.data_file, "Patch dataset (SDAP)")->required();
    train_cmd->add_option("--out", train.out_dir)->required();
    train_cmd->add_option("--seed", train.cfg.seed);
    train_cmd->add_option("--pretrain-epochs", train.cfg.pretrain_epochs);
    train_cmd->add_option("--finetune-epochs", train.cfg.finetune_epochs);
    train_cmd->add_option("--batch", train.cfg.batch_size)->check(CLI::PositiveNumber);
    train_cmd->add_option("--pretrain-lr", train.cfg.pretrain_learning_rate)
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--finetune-lr", train.cfg.finetune_learning_rate)
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--corruption", train.cfg.corruption_std)->check(CLI::Range(0.0, 1e9));
    train_cmd->add_option("--activation", train.activation, "NL-SDA measurement activation")
        ->check(CLI::IsMember({"sigmoid", "identity"}));

    RecoverArgs rec;
    auto* recover_cmd = app.add_subcommand("recover", "Recover one PGM image through a model");
    recover_cmd->add_option("--model", rec.model_file)->required();
    recover_cmd->add_option("--input", rec.input, "Input .pgm image")->required();
    recover_cmd->add_option("--out", rec.out_dir)->required();
    recover_cmd->add_option("--method", rec.method)->check(CLI::IsMember({"sda", "ista"}));
    recover_cmd->add_option("--stride", rec.stride)->check(CLI::PositiveNumber);
    recover_cmd->add_option("--crop", rec.crop);
    recover_cmd->add_option("--lambda", rec.lambda)->check(CLI::PositiveNumber);
    recover_cmd->add_option("--iters", rec.iters)->check(CLI::PositiveNumber);
    recover_cmd->add_option("--threshold", rec.threshold)->check(CLI::PositiveNumber);
    recover_cmd->add_option("--threads", rec.threads, "0 = SDACS_THREADS or hardware");

    RecoverArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Batch recovery metrics over a directory");
    eval_cmd->add_option("--model", ev.model_file)->required();
    eval_cmd->add_option("--data", ev.input, "Directory of .pgm images")->required();
    eval_cmd->add_option("--out", ev.out_dir)->required();
    eval_cmd->add_option("--method", ev.method)->check(CLI::IsMember({"sda", "ista"}));
    eval_cmd->add_option("--stride", ev.stride)->check(CLI::PositiveNumber);
    eval_cmd->add_option("--crop", ev.crop);
    eval_cmd->add_option("--lambda", ev.lambda)->check(CLI::PositiveNumber);
    eval_cmd->add_option("--iters", ev.iters)->check(CLI::PositiveNumber);
    eval_cmd->add_option("--threshold", ev.threshold)->check(CLI::PositiveNumber);
    eval_cmd->add_option("--threads", ev.threads);
    eval_cmd->add_flag("--save-recon", ev.save_recon, "Also write reconstructed images");

    CurveArgs curve;
    auto* curve_cmd =
        app.add_subcommand("phase-curve", "ISTA success probability across under-sampling ratios");
    curve_cmd->add_option("--out", curve.out_dir)->required();
    curve_cmd->add_option("--deltas", curve.deltas, "Comma-separated ascending ratios");
    curve_cmd->add_option("--signals", curve.signals)->check(CLI::PositiveNumber);
    curve_cmd->add_option("--size", curve.size, "Patch edge (power of two)");
    curve_cmd->add_option("--sparsity", curve.sparsity)->check(CLI::PositiveNumber);
    curve_cmd->add_option("--lambda", curve.lambda)->check(CLI::PositiveNumber);
    curve_cmd->add_option("--iters", curve.iters)->check(CLI::PositiveNumber);
    curve_cmd->add_option("--threshold", curve.threshold)->check(CLI::PositiveNumber);
    curve_cmd->add_option("--seed", curve.seed);

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Median recovery-time comparison on one image");
    bench_cmd->add_option("--model", bench.model_file)->required();
    bench_cmd->add_option("--input", bench.input)->required();
    bench_cmd->add_option("--out", bench.out_dir)->required();
    bench_cmd->add_option("--stride", bench.stride)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--crop", bench.crop);
    bench_cmd->add_option("--ista-iters", bench.ista_iters)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--lambda", bench.lambda)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--reps", bench.reps)->check(CLI::Range(3, 1000000));
    bench_cmd->add_option("--threshold", bench.threshold)->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--parallel", bench.parallel,
                        "Patch-parallel timing (reported separately)");

    GradCheckArgs gc;
    auto* gc_cmd = app.add_subcommand("grad-check", "Verify gradients against finite differences");
    gc_cmd->add_option("--arch", gc.arch)->check(CLI::IsMember({"l-sda", "nl-sda"}));
    gc_cmd->add_option("--activation", gc.activation)
        ->check(CLI::IsMember({"sigmoid", "identity"}));
    gc_cmd->add_option("--n", gc.n)->check(CLI::PositiveNumber);
    gc_cmd->add_option("--delta", gc.delta)->check(CLI::Range(1e-9, 1.0));
    gc_cmd->add_option("--batch", gc.batch)->check(CLI::PositiveNumber);
    gc_cmd->add_option("--step", gc.step)->check(CLI::PositiveNumber);
    gc_cmd->add_option("--seed", gc.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*prepare) return run_prepare(prep);
        if (*train_cmd) return run_train(train);
        if (*recover_cmd) return run_recover(rec);
        if (*eval_cmd) return run_eval(ev);
        if (*curve_cmd) return run_phase_curve(curve);
        if (*bench_cmd) return run_bench(bench);
        if (*gc_cmd) return run_grad_check(gc);
    } catch (const sdacs::IoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
