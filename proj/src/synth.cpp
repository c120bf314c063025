#include "phaserw/synth.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace phaserw::synth {

void SynthConfig::validate() const {
    const auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (num_phases < 2) fail("num_phases must be at least 2");
    if (dim < 2) fail("dim must be at least 2");
    if (dim + 1 < static_cast<std::size_t>(num_phases)) fail("dim must be at least num_phases - 1");
    if (t_min < static_cast<std::size_t>(num_phases)) fail("t_min must be at least num_phases");
    if (t_max < t_min) fail("t_max must be at least t_min");
    if (!(separation >= 0.0) || !std::isfinite(separation)) fail("separation must be nonnegative");
    if (!(duration_sigma >= 0.0) || !std::isfinite(duration_sigma)) fail("duration_sigma must be nonnegative");
    if (!(noise > 0.0) || !std::isfinite(noise)) fail("noise must be positive");
}

Matrix phase_means(const SynthConfig& cfg) {
    cfg.validate();
    const auto S = static_cast<Eigen::Index>(cfg.num_phases);
    const auto M = static_cast<Eigen::Index>(cfg.dim);

    // Helmert basis of the sum-zero subspace of R^S.
    Eigen::MatrixXd helmert = Eigen::MatrixXd::Zero(S, S - 1);
    for (Eigen::Index k = 1; k < S; ++k) {
        const double norm = std::sqrt(static_cast<double>(k * (k + 1)));
        helmert.col(k - 1).head(k).setConstant(1.0 / norm);
        helmert(k, k - 1) = -static_cast<double>(k) / norm;
    }
    // e_s - 1/S has pairwise distance sqrt(2).
    Eigen::MatrixXd vertices = Eigen::MatrixXd::Identity(S, S);
    vertices.array() -= 1.0 / static_cast<double>(S);
    vertices *= cfg.separation * cfg.noise / std::sqrt(2.0);
    const Eigen::MatrixXd coords = vertices * helmert;  // S x (S-1)

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd gauss(M, S - 1);
    for (Eigen::Index j = 0; j < S - 1; ++j) {
        for (Eigen::Index i = 0; i < M; ++i) gauss(i, j) = normal(rng);
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    const Eigen::MatrixXd frame = qr.householderQ() * Eigen::MatrixXd::Identity(M, S - 1);
    const Eigen::MatrixXd means = coords * frame.transpose();  // S x M

    Matrix out(static_cast<std::size_t>(S), static_cast<std::size_t>(M));
    for (Eigen::Index s = 0; s < S; ++s) {
        for (Eigen::Index m = 0; m < M; ++m) {
            out(static_cast<std::size_t>(s), static_cast<std::size_t>(m)) = means(s, m);
        }
    }
    return out;
}

namespace {

std::vector<std::size_t> phase_durations(const SynthConfig& cfg, std::size_t frames, std::mt19937_64& rng) {
    const auto S = static_cast<std::size_t>(cfg.num_phases);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> share(S);
    for (auto& w : share) w = std::exp(cfg.duration_sigma * std::clamp(normal(rng), -2.0, 2.0));
    const double total = std::accumulate(share.begin(), share.end(), 0.0);

    // One frame per phase, the rest split by largest remainder.
    const std::size_t spare = frames - S;
    std::vector<std::size_t> durations(S, 1);
    std::vector<double> remainder(S);
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < S; ++s) {
        const double exact = share[s] / total * static_cast<double>(spare);
        const auto whole = static_cast<std::size_t>(std::floor(exact));
        durations[s] += whole;
        assigned += whole;
        remainder[s] = exact - static_cast<double>(whole);
    }
    std::vector<std::size_t> order(S);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < spare; ++i, ++assigned) ++durations[order[i % S]];
    return durations;
}

}  // namespace

LabeledVideo generate_video(const SynthConfig& cfg, std::uint64_t video_seed) {
    const Matrix means = phase_means(cfg);
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(video_seed), static_cast<std::uint32_t>(video_seed >> 32),
                      0x5eedu};
    std::mt19937_64 rng(seq);

    std::uniform_int_distribution<std::size_t> length(cfg.t_min, cfg.t_max);
    const std::size_t T = length(rng);
    const auto durations = phase_durations(cfg, T, rng);

    std::vector<Phase> labels;
    labels.reserve(T);
    for (std::size_t s = 0; s < durations.size(); ++s) labels.insert(labels.end(), durations[s], static_cast<Phase>(s));

    std::normal_distribution<double> normal(0.0, cfg.noise);
    Matrix features(T, cfg.dim);
    for (std::size_t t = 0; t < T; ++t) {
        const auto mean = means.row(static_cast<std::size_t>(labels[t]));
        auto row = features.row(t);
        for (std::size_t m = 0; m < cfg.dim; ++m) row[m] = mean[m] + normal(rng);
    }
    return {validate_feature_sequence(std::move(features)), LabelSequence(std::move(labels), cfg.num_phases)};
}

std::vector<LabeledVideo> generate_dataset(const SynthConfig& cfg, std::uint64_t first_video) {
    std::vector<LabeledVideo> out;
    out.reserve(cfg.num_videos);
    for (std::size_t i = 0; i < cfg.num_videos; ++i) out.push_back(generate_video(cfg, first_video + i));
    return out;
}

std::string video_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "video_%03zu", index);
    return buf;
}

Matrix dense_laplacian(std::span<const double> weights) {
    const std::size_t T = weights.size() + 1;
    Matrix L(T, T, 0.0);
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t j = 0; j < T; ++j) {
            if (j == i + 1) L(i, j) = -weights[i];
            if (i == j + 1) L(i, j) = -weights[j];
        }
        double degree = 0.0;
        if (i > 0) degree += weights[i - 1];
        if (i + 1 < T) degree += weights[i];
        L(i, i) = degree;
    }
    return L;
}

std::vector<double> dense_solve_oracle(const Matrix& laplacian, double gamma, std::span<const double> z) {
    const std::size_t n = laplacian.rows();
    if (laplacian.cols() != n || z.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "oracle system is not square or rhs length differs");
    }
    Matrix a = laplacian;
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) += gamma;
        b[i] = gamma * z[i];
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
        }
        if (pivot != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pivot, j));
            std::swap(b[k], b[pivot]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double factor = a(i, k) / a(k, k);
            if (factor == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= factor * a(k, j);
            b[i] -= factor * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double acc = b[k];
        for (std::size_t j = k + 1; j < n; ++j) acc -= a(k, j) * x[j];
        x[k] = acc / a(k, k);
    }
    return x;
}

double f1_bruteforce_oracle(std::span<const Phase> pred, std::span<const Phase> gt, double overlap) {
    const std::size_t T = pred.size();
    if (gt.size() != T) throw Error(ErrorCode::LengthMismatch, "oracle inputs differ in length");

    // Run id of every frame.
    const auto run_ids = [T](std::span<const Phase> seq) {
        std::vector<std::size_t> id(T);
        for (std::size_t t = 1; t < T; ++t) id[t] = id[t - 1] + (seq[t] != seq[t - 1] ? 1 : 0);
        return id;
    };
    const auto pid = run_ids(pred);
    const auto gid = run_ids(gt);
    const std::size_t np = T ? pid.back() + 1 : 0;
    const std::size_t ng = T ? gid.back() + 1 : 0;

    std::vector<Phase> p_phase(np), g_phase(ng);
    for (std::size_t t = 0; t < T; ++t) {
        p_phase[pid[t]] = pred[t];
        g_phase[gid[t]] = gt[t];
    }

    // IoU table by counting frames: intersection = frames in both runs,
    // union = frames in either run.
    Matrix table(np, ng, 0.0);
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = 0; j < ng; ++j) {
            std::size_t inter = 0, uni = 0;
            for (std::size_t t = 0; t < T; ++t) {
                const bool in_p = pid[t] == i;
                const bool in_g = gid[t] == j;
                inter += (in_p && in_g) ? 1 : 0;
                uni += (in_p || in_g) ? 1 : 0;
            }
            table(i, j) = static_cast<double>(inter) / static_cast<double>(uni);
        }
    }

    std::vector<bool> taken(ng, false);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < np; ++i) {
        double best = -1.0;
        std::size_t arg = ng;
        for (std::size_t j = 0; j < ng; ++j) {
            if (taken[j] || g_phase[j] != p_phase[i]) continue;
            if (table(i, j) > best) {
                best = table(i, j);
                arg = j;
            }
        }
        if (arg < ng && best >= overlap) {
            taken[arg] = true;
            ++tp;
        }
    }
    if (np == 0 && ng == 0) return 100.0;
    const double precision = np ? static_cast<double>(tp) / static_cast<double>(np) : 0.0;
    const double recall = ng ? static_cast<double>(tp) / static_cast<double>(ng) : 0.0;
    return precision + recall > 0.0 ? 200.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace phaserw::synth
