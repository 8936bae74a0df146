#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sdacs/training.hpp"

using namespace sdacs;

namespace {

Matrix random_patches(std::size_t count, std::size_t dim, std::uint64_t seed) {
    Matrix m(count, dim);
    Prng rng(seed);
    for (auto& v : m.data) v = rng.next_uniform();
    return m;
}

Matrix random_columns(std::size_t dim, std::size_t cols, std::uint64_t seed, double lo = 0.0,
                      double hi = 1.0) {
    Matrix m(dim, cols);
    Prng rng(seed);
    for (auto& v : m.data) v = lo + (hi - lo) * rng.next_uniform();
    return m;
}

}  // namespace

TEST_CASE("TrainConfig validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    TrainConfig bad = cfg;
    bad.finetune_learning_rate = 0.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = cfg;
    bad.batch_size = 0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = cfg;
    bad.corruption_std = -0.2;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("make_training_set validates and measures") {
    const Matrix patches = random_patches(6, 16, 1);
    const LinearOperator op = sample_phi(4, 16, 2);
    const TrainingSet set = make_training_set(patches, op);
    CHECK(set.size() == 6);
    CHECK(set.measurements.rows == 6);
    CHECK(set.measurements.cols == 4);

    CHECK_THROWS_AS(make_training_set(Matrix(0, 16), op), std::invalid_argument);
    Matrix bad = patches;
    bad(0, 0) = 1.5;
    CHECK_THROWS_AS(make_training_set(bad, op), std::invalid_argument);
    CHECK_THROWS_AS(make_training_set(random_patches(3, 9, 3), op), std::invalid_argument);
}

TEST_CASE("loss_l closed-form values") {
    SECTION("zero-parameter model against 0.5 targets is exactly zero") {
        LinearSda s;
        s.n = 2;
        s.m = 1;
        s.w1 = Matrix(2, 1);
        s.b1 = Vector(2, 0.0);
        s.w2 = Matrix(1, 2);
        s.b2 = Vector(1, 0.0);
        s.w3 = Matrix(2, 1);
        s.b3 = Vector(2, 0.0);
        TrainingSet set;
        set.measurements = Matrix(1, 1);
        set.targets = Matrix(1, 2);
        set.targets(0, 0) = 0.5;
        set.targets(0, 1) = 0.5;
        CHECK(loss_l(s, set) == 0.0);

        SECTION("target (1, 0) gives 0.5") {
            set.targets(0, 0) = 1.0;
            set.targets(0, 1) = 0.0;
            CHECK_THAT(loss_l(s, set), Catch::Matchers::WithinAbs(0.5, 1e-15));
        }
    }
    SECTION("empty set rejected") {
        Prng rng(4);
        const LinearSda s = init_l(4, 2, rng);
        TrainingSet set;
        set.measurements = Matrix(0, 2);
        set.targets = Matrix(0, 4);
        CHECK_THROWS_AS(loss_l(s, set), std::invalid_argument);
    }
}

TEST_CASE("loss_nl closed-form values") {
    NonlinearSda s;
    s.n = 2;
    s.m = 1;
    s.w1 = Matrix(1, 2);
    s.b1 = Vector(1, 0.0);
    s.w2 = Matrix(2, 1);
    s.b2 = Vector(2, 0.0);
    s.w3 = Matrix(1, 2);
    s.b3 = Vector(1, 0.0);
    s.w4 = Matrix(2, 1);
    s.b4 = Vector(2, 0.0);
    TrainingSet set;
    set.targets = Matrix(1, 2);
    set.targets(0, 0) = 0.5;
    set.targets(0, 1) = 0.5;
    CHECK(loss_nl(s, set) == 0.0);
    set.targets(0, 0) = 1.0;
    set.targets(0, 1) = 0.0;
    CHECK_THAT(loss_nl(s, set), Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("losses are permutation-invariant over the set") {
    Prng rng(5);
    const LinearSda s = init_l(12, 3, rng);
    const Matrix patches = random_patches(9, 12, 6);
    const LinearOperator op = sample_phi(3, 12, 7);
    const TrainingSet set = make_training_set(patches, op);

    TrainingSet perm = set;
    const std::size_t l = set.size();
    for (std::size_t i = 0; i < l; ++i) {
        const std::size_t j = l - 1 - i;
        for (std::size_t d = 0; d < set.targets.cols; ++d) perm.targets(i, d) = set.targets(j, d);
        for (std::size_t d = 0; d < set.measurements.cols; ++d)
            perm.measurements(i, d) = set.measurements(j, d);
    }
    CHECK_THAT(loss_l(s, perm), Catch::Matchers::WithinRel(loss_l(s, set), 1e-12));
}

TEST_CASE("gradients vanish at an exact fit") {
    // With zero parameters every output is 0.5; targets of 0.5 make the MSE
    // minimum, so every gradient must be exactly zero.
    LinearSda s;
    s.n = 3;
    s.m = 1;
    s.w1 = Matrix(3, 1);
    s.b1 = Vector(3, 0.0);
    s.w2 = Matrix(1, 3);
    s.b2 = Vector(1, 0.0);
    s.w3 = Matrix(3, 1);
    s.b3 = Vector(3, 0.0);
    const Matrix y = random_columns(1, 4, 8, -1.0, 1.0);
    Matrix targets(3, 4);
    for (auto& v : targets.data) v = 0.5;
    const LinearSdaGrads g = grad_l(s, y, targets);
    for (double v : g.w1.data) CHECK(v == 0.0);
    for (double v : g.w2.data) CHECK(v == 0.0);
    for (double v : g.w3.data) CHECK(v == 0.0);
    for (double v : g.b1) CHECK(v == 0.0);
    for (double v : g.b2) CHECK(v == 0.0);
    for (double v : g.b3) CHECK(v == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    SECTION("L-SDA over several shapes") {
        for (const auto [n, m] : {std::pair<std::size_t, std::size_t>{16, 4},
                                  std::pair<std::size_t, std::size_t>{24, 6},
                                  std::pair<std::size_t, std::size_t>{64, 16}}) {
            Prng rng(100 + n);
            const LinearSda s = init_l(n, m, rng);
            const Matrix x = random_columns(n, 3, 200 + n);
            const LinearOperator op = sample_phi(m, n, 300 + n);
            Matrix y(m, 3);
            for (std::size_t c = 0; c < 3; ++c) {
                Vector xi(n);
                for (std::size_t d = 0; d < n; ++d) xi[d] = x(d, c);
                const Vector yi = measure(op, xi);
                for (std::size_t d = 0; d < m; ++d) y(d, c) = yi[d];
            }
            CHECK(gradient_check_l(s, y, x, 1e-5) <= 1e-6);
        }
    }
    SECTION("NL-SDA with both measurement activations") {
        for (const auto act : {MeasurementActivation::Sigmoid, MeasurementActivation::Identity}) {
            Prng rng(400 + static_cast<int>(act));
            const NonlinearSda s = init_nl(20, 5, act, rng);
            const Matrix x = random_columns(20, 3, 500 + static_cast<int>(act));
            CHECK(gradient_check_nl(s, x, 1e-5) <= 1e-6);
        }
    }
}

TEST_CASE("gradient_error detects deliberately scaled gradients") {
    Prng rng(9);
    const LinearSda s = init_l(10, 3, rng);
    const Matrix x = random_columns(10, 2, 10);
    const Matrix y = random_columns(3, 2, 11, -1.0, 1.0);
    LinearSdaGrads g = grad_l(s, y, x);
    for (auto* m : {&g.w1, &g.w2, &g.w3})
        for (auto& v : m->data) v *= 2.0;
    for (auto* b : {&g.b1, &g.b2, &g.b3})
        for (auto& v : *b) v *= 2.0;
    const double err = gradient_error_l(s, y, x, g, 1e-5);
    CHECK_THAT(err, Catch::Matchers::WithinAbs(0.5, 1e-3));
}

TEST_CASE("gradient of a batch is the mean of per-sample gradients") {
    Prng rng(12);
    const LinearSda s = init_l(8, 2, rng);
    const Matrix x = random_columns(8, 2, 13);
    const Matrix y = random_columns(2, 2, 14, -1.0, 1.0);

    Matrix x0(8, 1), x1(8, 1), y0(2, 1), y1(2, 1);
    for (std::size_t d = 0; d < 8; ++d) {
        x0(d, 0) = x(d, 0);
        x1(d, 0) = x(d, 1);
    }
    for (std::size_t d = 0; d < 2; ++d) {
        y0(d, 0) = y(d, 0);
        y1(d, 0) = y(d, 1);
    }
    const LinearSdaGrads g = grad_l(s, y, x);
    const LinearSdaGrads g0 = grad_l(s, y0, x0);
    const LinearSdaGrads g1 = grad_l(s, y1, x1);
    for (std::size_t i = 0; i < g.w1.data.size(); ++i)
        CHECK_THAT(g.w1.data[i],
                   Catch::Matchers::WithinAbs(0.5 * (g0.w1.data[i] + g1.w1.data[i]), 1e-12));
    for (std::size_t i = 0; i < g.b3.size(); ++i)
        CHECK_THAT(g.b3[i], Catch::Matchers::WithinAbs(0.5 * (g0.b3[i] + g1.b3[i]), 1e-12));
}

TEST_CASE("one small SGD step decreases the batch loss in at least 95% of trials") {
    int decreases = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        Prng rng(1000 + t);
        LinearSda s = init_l(12, 3, rng);
        const Matrix x = random_columns(12, 4, 2000 + t);
        const Matrix y = random_columns(3, 4, 3000 + t, -1.0, 1.0);
        const double before = loss_batch_l(s, y, x);
        sgd_step(s, grad_l(s, y, x), 1e-3);
        const double after = loss_batch_l(s, y, x);
        if (after < before) ++decreases;
    }
    CHECK(decreases >= 95);
}

TEST_CASE("finetune_l with a vanishing learning rate leaves parameters unchanged") {
    Prng rng(15);
    LinearSda s = init_l(9, 2, rng);
    const LinearSda before = s;
    const Matrix patches = random_patches(12, 9, 16);
    const LinearOperator op = sample_phi(2, 9, 17);
    const TrainingSet set = make_training_set(patches, op);
    TrainConfig cfg;
    cfg.finetune_learning_rate = 1e-30;
    cfg.finetune_epochs = 3;
    cfg.batch_size = 4;
    Prng train_rng(18);
    finetune_l(s, set, cfg, train_rng);
    for (std::size_t i = 0; i < s.w1.data.size(); ++i)
        CHECK_THAT(s.w1.data[i], Catch::Matchers::WithinAbs(before.w1.data[i], 1e-18));
    for (std::size_t i = 0; i < s.b3.size(); ++i)
        CHECK_THAT(s.b3[i], Catch::Matchers::WithinAbs(before.b3[i], 1e-18));
}

TEST_CASE("finetune_l halves the loss on a tiny problem") {
    // n = 16, m = 8, 50 samples, 500 epochs.
    const Matrix patches = random_patches(50, 16, 19);
    const LinearOperator op = sample_phi(8, 16, 20);
    TrainConfig cfg;
    cfg.finetune_epochs = 500;
    cfg.batch_size = 10;
    cfg.seed = 21;
    Prng rng(cfg.seed);
    LinearSda s = init_l(16, 8, rng);
    const TrainingSet set = make_training_set(patches, op);
    const auto trace = finetune_l(s, set, cfg, rng);
    REQUIRE(trace.size() == 501);
    CHECK(trace.back() < 0.5 * trace.front());
}

TEST_CASE("identical config and seed give identical loss traces") {
    const Matrix patches = random_patches(20, 9, 22);
    const LinearOperator op = sample_phi(3, 9, 23);
    TrainConfig cfg;
    cfg.finetune_epochs = 5;
    cfg.batch_size = 8;
    const TrainingSet set = make_training_set(patches, op);

    const auto run = [&] {
        Prng rng(77);
        LinearSda s = init_l(9, 3, rng);
        return finetune_l(s, set, cfg, rng);
    };
    CHECK(run() == run());
}

TEST_CASE("finetune_nl reduces loss and is deterministic") {
    const Matrix patches = random_patches(40, 16, 24);
    TrainConfig cfg;
    cfg.finetune_epochs = 200;
    cfg.batch_size = 8;
    const TrainingSet set = make_training_set(patches);

    const auto run = [&] {
        Prng rng(88);
        NonlinearSda s = init_nl(16, 4, MeasurementActivation::Sigmoid, rng);
        return finetune_nl(s, set, cfg, rng);
    };
    const auto trace = run();
    CHECK(trace.back() < trace.front());
    CHECK(run() == trace);
}
