#include "phaserw/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace phaserw {

ShiftedTridiagonalFactor::ShiftedTridiagonalFactor(const TridiagonalMatrix& laplacian, double shift)
    : off_(laplacian.off) {
    const std::size_t n = laplacian.size();
    if (n == 0 || laplacian.off.size() + 1 != n) {
        throw Error(ErrorCode::DimensionMismatch, "malformed tridiagonal matrix");
    }
    if (!(shift > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");

    pivots_.resize(n);
    upper_.resize(n - 1);
    pivots_[0] = laplacian.diag[0] + shift;
    for (std::size_t i = 1; i < n; ++i) {
        upper_[i - 1] = off_[i - 1] / pivots_[i - 1];
        pivots_[i] = laplacian.diag[i] + shift - off_[i - 1] * upper_[i - 1];
    }
}

void ShiftedTridiagonalFactor::solve(std::span<const double> rhs, std::span<double> out) const {
    const std::size_t n = pivots_.size();
    if (rhs.size() != n || out.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "right-hand side length does not match system");
    }
    // Forward elimination, then back substitution.
    out[0] = rhs[0];
    for (std::size_t i = 1; i < n; ++i) out[i] = rhs[i] - upper_[i - 1] * out[i - 1];
    out[n - 1] /= pivots_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) out[i] = (out[i] - off_[i] * out[i + 1]) / pivots_[i];
}

namespace {

void check_prior_row(std::span<const double> z) {
    for (std::size_t t = 0; t < z.size(); ++t) {
        if (!std::isfinite(z[t]) || z[t] < 0.0) {
            throw Error(ErrorCode::InvalidArgument,
                        "prior entry " + std::to_string(t) + " must be finite and nonnegative");
        }
    }
}

void solve_scaled(const ShiftedTridiagonalFactor& factor, double gamma,
                  std::span<const double> z, std::span<double> out) {
    for (std::size_t t = 0; t < z.size(); ++t) out[t] = gamma * z[t];
    factor.solve(out, out);
}

}  // namespace

std::vector<double> solve_phase(const TridiagonalMatrix& laplacian, double gamma,
                                std::span<const double> prior_row) {
    check_prior_row(prior_row);
    const ShiftedTridiagonalFactor factor(laplacian, gamma);
    std::vector<double> x(prior_row.size());
    solve_scaled(factor, gamma, prior_row, x);
    return x;
}

ProbabilityMatrix solve_all_phases(const TridiagonalMatrix& laplacian, double gamma,
                                   const PriorMatrix& priors, unsigned threads) {
    if (priors.frames() != laplacian.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "prior has " + std::to_string(priors.frames()) + " frames, graph has " +
                        std::to_string(laplacian.size()));
    }
    const ShiftedTridiagonalFactor factor(laplacian, gamma);
    const std::size_t S = priors.num_phases();
    Matrix x(S, priors.frames());

    const auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t s = first; s < S; s += stride) {
            solve_scaled(factor, gamma, priors.row(s), x.row(s));
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, S);
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work, k, workers);
    }
    return ProbabilityMatrix(std::move(x));
}

ProbabilityMatrix apply_correction(const ProbabilityMatrix& probs) {
    if (probs.corrected()) {
        throw Error(ErrorCode::AlreadyCorrected, "correction was already applied");
    }
    const std::size_t S = probs.num_phases();
    const std::size_t T = probs.frames();
    std::vector<double> colsum(T, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        const auto row = probs.raw().row(s);
        for (std::size_t t = 0; t < T; ++t) colsum[t] += row[t];
    }
    for (std::size_t t = 0; t < T; ++t) colsum[t] = (1.0 - colsum[t]) / static_cast<double>(S);
    return ProbabilityMatrix(probs.raw(), std::move(colsum));
}

LabelSequence decode(const ProbabilityMatrix& probs) {
    // The per-frame offset of a corrected matrix is shared by all phases, so
    // the ordering is taken from the raw solution.
    const Matrix& x = probs.raw();
    const std::size_t S = x.rows();
    const std::size_t T = x.cols();
    std::vector<Phase> labels(T, 0);
    std::vector<double> best(x.row(0).begin(), x.row(0).end());
    for (std::size_t s = 1; s < S; ++s) {
        const auto row = x.row(s);
        for (std::size_t t = 0; t < T; ++t) {
            if (row[t] > best[t]) {
                best[t] = row[t];
                labels[t] = static_cast<Phase>(s);
            }
        }
    }
    return LabelSequence(std::move(labels), static_cast<int>(S));
}

double random_walk_energy(const TridiagonalMatrix& laplacian, double gamma,
                          std::span<const double> x, std::span<const double> z) {
    if (x.size() != laplacian.size() || z.size() != laplacian.size()) {
        throw Error(ErrorCode::DimensionMismatch, "energy operands differ in length");
    }
    double smooth = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) smooth += laplacian.diag[i] * x[i] * x[i];
    for (std::size_t i = 0; i < laplacian.off.size(); ++i) {
        smooth += 2.0 * laplacian.off[i] * x[i] * x[i + 1];
    }
    double fit = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) fit += (x[t] - z[t]) * (x[t] - z[t]);
    return smooth + gamma * fit;
}

Segmentation segment_video(const FeatureSequence& features, const PriorMatrix& priors,
                           const SegmentOptions& options) {
    if (priors.frames() != features.frames()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "prior has " + std::to_string(priors.frames()) + " frames, video has " +
                        std::to_string(features.frames()));
    }
    const auto weights = edge_weights(features, options.beta, options.convention);
    const auto laplacian = build_laplacian(weights);
    auto probs = apply_correction(solve_all_phases(laplacian, options.gamma, priors, options.threads));
    auto labels = decode(probs);
    return {std::move(probs), std::move(labels)};
}

}  // namespace phaserw
