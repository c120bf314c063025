#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "phaserw/prior_fewshot.hpp"
#include "phaserw/synth.hpp"
#include "test_support.hpp"

using namespace phaserw;
using namespace phaserw::testing;

namespace {

LabeledVideo video_of(std::vector<std::vector<double>> rows, std::vector<Phase> labels, int S) {
    return {validate_feature_sequence(rows), LabelSequence(std::move(labels), S)};
}

// Gauss-Jordan inverse and determinant of a small dense matrix.
std::pair<std::vector<std::vector<double>>, double> naive_inverse(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        }
        if (p != k) {
            std::swap(a[p], a[k]);
            std::swap(inv[p], inv[k]);
            det = -det;
        }
        const double piv = a[k][k];
        det *= piv;
        for (std::size_t j = 0; j < n; ++j) {
            a[k][j] /= piv;
            inv[k][j] /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const double f = a[i][k];
            for (std::size_t j = 0; j < n; ++j) {
                a[i][j] -= f * a[k][j];
                inv[i][j] -= f * inv[k][j];
            }
        }
    }
    return {inv, det};
}

double naive_density(const PhaseGaussian& p, std::span<const double> f) {
    const std::size_t n = f.size();
    std::vector<std::vector<double>> cov(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cov[i][j] = p.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + (i == j ? p.epsilon : 0.0);
        }
    }
    const auto [inv, det] = naive_inverse(cov);
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            q += (f[i] - p.mean[static_cast<Eigen::Index>(i)]) * inv[i][j] * (f[j] - p.mean[static_cast<Eigen::Index>(j)]);
        }
    }
    return std::exp(-0.5 * q) / std::sqrt(std::pow(2.0 * std::numbers::pi, static_cast<double>(n)) * det);
}

FewShotModel model_with_histogram(const GaussianPhaseModel& g, Matrix bins, double alpha) {
    return FewShotModel{g, TemporalHistogram(std::move(bins)), alpha, {}};
}

}  // namespace

TEST_CASE("unbiased mean and covariance of a square cluster") {
    // The unit square corners, shifted off the origin (zero rows are invalid).
    const std::vector<LabeledVideo> data{video_of({{1, 1}, {3, 1}, {1, 3}, {3, 3}}, {0, 0, 0, 0}, 1)};
    const auto model = fit_gaussians(data, 1);
    const auto& p = model.phase(0);
    CHECK(p.count == 4);
    CHECK(p.mean[0] == doctest::Approx(2.0));
    CHECK(p.mean[1] == doctest::Approx(2.0));
    CHECK(p.covariance(0, 0) == doctest::Approx(4.0 / 3.0));
    CHECK(p.covariance(1, 1) == doctest::Approx(4.0 / 3.0));
    CHECK(std::abs(p.covariance(0, 1)) <= 1e-15);
    CHECK(p.epsilon == doctest::Approx(1e-3 * 4.0 / 3.0));
}

TEST_CASE("degenerate cluster needs absolute shrinkage") {
    const std::vector<LabeledVideo> data{video_of({{2, 5}, {2, 5}, {2, 5}}, {0, 0, 0}, 1)};
    try {
        fit_gaussians(data, 1);
        FAIL("expected NonPSDAfterShrinkage");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonPSDAfterShrinkage);
    }
    const auto model = fit_gaussians(data, 1, Shrinkage{1e-3, 1e-2});
    CHECK(model.phase(0).mean[0] == 2.0);
    CHECK(model.phase(0).mean[1] == 5.0);
    CHECK(model.phase(0).covariance.norm() == 0.0);
    CHECK(std::isfinite(model.log_density(0, std::vector<double>{2, 5})));
}

TEST_CASE("too few samples for a phase") {
    const std::vector<LabeledVideo> data{video_of({{1, 1}, {2, 1}, {3, 1}}, {0, 0, 1}, 3)};
    try {
        fit_gaussians(data, 2);
        FAIL("expected InsufficientSamples");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientSamples);
    }
    CHECK_THROWS_AS(fit_gaussians(std::span<const LabeledVideo>{}, 2), Error);
}

TEST_CASE("gaussian fit recovers generator parameters") {
    synth::SynthConfig cfg;
    cfg.num_phases = 2;
    cfg.dim = 8;
    cfg.t_min = cfg.t_max = 1000;
    cfg.duration_sigma = 0.0;
    cfg.noise = 0.5;
    cfg.separation = 4.0;
    cfg.seed = 42;
    const std::vector<LabeledVideo> data{synth::generate_video(cfg, 0)};
    const auto model = fit_gaussians(data, 2);
    const Matrix truth = synth::phase_means(cfg);
    for (int s = 0; s < 2; ++s) {
        const auto& p = model.phase(s);
        CHECK(p.count == 500);
        for (std::size_t m = 0; m < 8; ++m) {
            CHECK(std::abs(p.mean[static_cast<Eigen::Index>(m)] - truth(static_cast<std::size_t>(s), m)) <= 0.1);
        }
        const Eigen::MatrixXd err = p.covariance - 0.25 * Eigen::MatrixXd::Identity(8, 8);
        CHECK(err.norm() <= 0.15);
    }
}

TEST_CASE("density at the mean of a standard gaussian") {
    for (Eigen::Index M : {1, 3, 8}) {
        PhaseGaussian p{Eigen::VectorXd::Constant(M, 0.5), Eigen::MatrixXd::Identity(M, M), 0.0, 10};
        const GaussianPhaseModel g({p});
        std::vector<std::vector<double>> rows(2, std::vector<double>(static_cast<std::size_t>(M), 0.5));
        const auto u = spatial_prior(g, validate_feature_sequence(rows), false);
        CHECK(u(0, 0) == doctest::Approx(std::pow(2 * std::numbers::pi, -0.5 * static_cast<double>(M))).epsilon(1e-14));
    }
}

TEST_CASE("single phase normalizes to ones") {
    std::mt19937_64 rng(1);
    const std::vector<LabeledVideo> data{{random_features(rng, 30, 3), LabelSequence(std::vector<Phase>(30, 0), 1)}};
    const auto g = fit_gaussians(data, 1);
    const auto u = spatial_prior(g, random_features(rng, 10, 3), true);
    for (double v : u.row(0)) CHECK(v == 1.0);
}

TEST_CASE("densities agree with a direct-formula oracle") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<PhaseGaussian> phases;
    for (int s = 0; s < 3; ++s) {
        Eigen::MatrixXd A(4, 4);
        for (Eigen::Index i = 0; i < 16; ++i) A.data()[i] = n(rng);
        PhaseGaussian p;
        p.mean = Eigen::VectorXd::NullaryExpr(4, [&] { return n(rng); });
        p.covariance = A * A.transpose() / 4.0;
        p.epsilon = 0.05;
        p.count = 20;
        phases.push_back(p);
    }
    const GaussianPhaseModel g(phases);
    const auto f = random_features(rng, 25, 4);
    const auto u = spatial_prior(g, f, false);
    const auto normalized = spatial_prior(g, f, true);
    for (std::size_t t = 0; t < 25; ++t) {
        double col = 0.0;
        for (int s = 0; s < 3; ++s) {
            const double oracle = naive_density(phases[static_cast<std::size_t>(s)], f.frame(t));
            CHECK(std::abs(u(static_cast<std::size_t>(s), t) - oracle) <= 1e-9 * oracle);
            CHECK(u(static_cast<std::size_t>(s), t) > 0.0);
            col += normalized(static_cast<std::size_t>(s), t);
        }
        CHECK(std::abs(col - 1.0) <= 1e-12);
    }
}

TEST_CASE("log density stays finite far from the mean") {
    PhaseGaussian p{Eigen::VectorXd::Zero(16), 0.01 * Eigen::MatrixXd::Identity(16, 16), 0.0, 100};
    const GaussianPhaseModel g({p});
    std::vector<double> far(16, 0.0);
    far[3] = 100.0 * 0.1;  // 100 sigma
    CHECK(std::isfinite(g.log_density(0, far)));
    for (auto& v : far) v = 100.0 * 0.1;
    CHECK(std::isfinite(g.log_density(0, far)));
    // Normalized priors stay finite where raw densities underflow.
    const std::vector<std::vector<double>> rows{far, far};
    const auto u = spatial_prior(g, validate_feature_sequence(rows), true);
    for (double v : u.row(0)) CHECK(v == 1.0);
}

TEST_CASE("histogram of a single video with T == N_x") {
    const std::vector<LabelSequence> seqs{LabelSequence({0, 0, 1, 1}, 2)};
    const auto h = fit_histogram(seqs, 2);
    REQUIRE(h.n_x() == 4);
    CHECK(h.bins() == Matrix(4, 2, std::vector<double>{1, 0, 1, 0, 0, 1, 0, 1}));
}

TEST_CASE("histogram of two videos with different lengths") {
    // Worked by hand: N_x = 4; video A (T=6) bins frames as 0,0,1,2,2,3 and
    // video B (T=4) maps frame t to bin t. Summed counts per bin are
    // {0:3}, {0:1,1:1}, {1:3}, {2:2}.
    const std::vector<LabelSequence> seqs{LabelSequence({0, 0, 0, 1, 1, 2}, 3), LabelSequence({0, 1, 1, 2}, 3)};
    const auto h = fit_histogram(seqs, 3);
    REQUIRE(h.n_x() == 4);
    CHECK(h.bins() == Matrix(4, 3, std::vector<double>{1, 0, 0, 0.5, 0.5, 0, 0, 1, 0, 0, 0, 1}));
}

TEST_CASE("histogram rows are normalized and independent of video order") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<LabelSequence> seqs;
        for (int v = 0; v < 5; ++v) seqs.push_back(random_labels(rng, 20 + rng() % 80, 4));
        const auto h = fit_histogram(seqs, 4);
        for (std::size_t i = 0; i < h.n_x(); ++i) {
            double sum = 0.0;
            for (double x : h.bins().row(i)) sum += x;
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
        std::shuffle(seqs.begin(), seqs.end(), rng);
        CHECK(fit_histogram(seqs, 4).bins() == h.bins());
    }
    CHECK_THROWS_AS(fit_histogram(std::span<const LabelSequence>{}, 2), Error);
}

TEST_CASE("temporal prior thresholds") {
    // One-hot histogram: phase 1 in the first half, phase 0 in the second.
    const TemporalHistogram onehot(Matrix(4, 2, std::vector<double>{0, 1, 0, 1, 1, 0, 1, 0}));
    for (double alpha : {0.1, 0.5, 0.9}) {
        const auto v = temporal_prior(onehot, 8, alpha);
        for (std::size_t t = 0; t < 8; ++t) {
            CHECK(v(1, t) == (t < 4 ? 1.0 : 0.0));
            CHECK(v(0, t) == (t < 4 ? 0.0 : 1.0));
        }
    }
    const TemporalHistogram uniform(Matrix(5, 3, 1.0 / 3.0));
    const auto all_on = temporal_prior(uniform, 11, 0.6);
    for (double x : all_on.values()) CHECK(x == 1.0);
    CHECK_THROWS_AS(temporal_prior(uniform, 11, 1.0), Error);
}

TEST_CASE("temporal prior is binary and every phase keeps its peak bin") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<LabelSequence> seqs;
        for (int v = 0; v < 4; ++v) seqs.push_back(random_labels(rng, 30 + rng() % 50, 3, 0.05));
        const auto h = fit_histogram(seqs, 3);
        const std::size_t T = h.n_x() + rng() % 100;
        const auto v = temporal_prior(h, T, 0.5);
        for (double x : v.values()) CHECK((x == 0.0 || x == 1.0));
        for (int s = 0; s < 3; ++s) {
            bool observed = false;
            for (std::size_t i = 0; i < h.n_x(); ++i) observed = observed || h(i, s) > 0.0;
            if (!observed) continue;
            double on = 0.0;
            for (double x : v.row(static_cast<std::size_t>(s))) on += x;
            CHECK(on >= 1.0);
        }
    }
}

TEST_CASE("temporal bands of ordered phases are contiguous") {
    synth::SynthConfig cfg;
    // Equal lengths and modest duration spread: every phase starts in all
    // videos before it ends in any, so the bands cannot split.
    cfg.t_min = cfg.t_max = 500;
    cfg.duration_sigma = 0.1;
    const auto data = synth::generate_dataset(cfg);
    std::vector<LabelSequence> labels;
    for (const auto& v : data) labels.push_back(v.labels);
    const auto h = fit_histogram(labels, 7);
    const auto v = temporal_prior(h, 500, 0.5);
    for (std::size_t s = 0; s < 7; ++s) {
        std::size_t runs = 0;
        for (std::size_t t = 0; t < 500; ++t) {
            if (v(s, t) == 1.0 && (t == 0 || v(s, t - 1) == 0.0)) ++runs;
        }
        CHECK(runs == 1);
    }
}

TEST_CASE("few-shot prior is the product of its parts") {
    std::mt19937_64 rng(7);
    std::vector<LabeledVideo> data;
    for (int v = 0; v < 2; ++v) data.push_back({random_features(rng, 40, 3), random_labels(rng, 40, 3)});
    const auto g = fit_gaussians(data, 3);
    const auto f = random_features(rng, 12, 3);

    const auto all_on = model_with_histogram(g, Matrix(6, 3, 1.0 / 3.0), 0.5);
    CHECK(fewshot_prior(all_on, f).matrix() == spatial_prior(g, f, true));
    CHECK(fewshot_prior(all_on, f, false).matrix() == spatial_prior(g, f, false));

    // Phase 2 never appears in the histogram.
    Matrix bins(6, 3, 0.5);
    for (std::size_t i = 0; i < 6; ++i) bins(i, 2) = 0.0;
    const auto z = fewshot_prior(model_with_histogram(g, bins, 0.5), f);
    for (double x : z.row(2)) CHECK(x == 0.0);
}

TEST_CASE("fitted synthetic prior covers every test frame") {
    synth::SynthConfig cfg;
    cfg.t_min = 500;
    cfg.t_max = 700;
    const auto train = synth::generate_dataset(cfg);
    const auto test = synth::generate_video(cfg, 100);
    const auto model = fit_fewshot(train, 7, 0.5);
    const auto z = fewshot_prior(model, test.features);
    for (std::size_t t = 0; t < z.frames(); ++t) {
        double col = 0.0;
        for (std::size_t s = 0; s < 7; ++s) col += z(s, t);
        CHECK(col > 0.0);
    }
}
