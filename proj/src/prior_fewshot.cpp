#include "phaserw/prior_fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace phaserw {

GaussianPhaseModel::GaussianPhaseModel(std::vector<PhaseGaussian> phases)
    : phases_(std::move(phases)) {
    if (phases_.empty()) throw Error(ErrorCode::EmptyDataset, "model has no phases");
    const auto M = phases_.front().mean.size();
    if (M < 1) throw Error(ErrorCode::DimensionMismatch, "feature dimension must be at least 1");

    factors_.reserve(phases_.size());
    log_norm_.reserve(phases_.size());
    for (std::size_t s = 0; s < phases_.size(); ++s) {
        const auto& p = phases_[s];
        if (p.mean.size() != M || p.covariance.rows() != M || p.covariance.cols() != M) {
            throw Error(ErrorCode::DimensionMismatch, "phase " + std::to_string(s) + " has inconsistent dimensions");
        }
        if (p.count < 2) {
            throw Error(ErrorCode::InsufficientSamples,
                        "phase " + std::to_string(s) + " has " + std::to_string(p.count) + " samples");
        }
        if (!(p.epsilon >= 0.0) || !std::isfinite(p.epsilon)) {
            throw Error(ErrorCode::InvalidArgument, "phase " + std::to_string(s) + " has invalid shrinkage");
        }
        Eigen::MatrixXd shrunk = p.covariance;
        shrunk.diagonal().array() += p.epsilon;
        Eigen::LLT<Eigen::MatrixXd> llt(shrunk);
        const bool positive = llt.info() == Eigen::Success &&
                              (llt.matrixLLT().diagonal().array() > 0.0).all() &&
                              llt.matrixLLT().diagonal().allFinite();
        if (!positive) {
            throw Error(ErrorCode::NonPSDAfterShrinkage,
                        "phase " + std::to_string(s) + ": covariance + " + std::to_string(p.epsilon) +
                            " I is not positive definite");
        }
        const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        log_norm_.push_back(-0.5 * (static_cast<double>(M) * std::log(2.0 * std::numbers::pi) + log_det));
        factors_.push_back(std::move(llt));
    }
}

double GaussianPhaseModel::log_density(int s, std::span<const double> f) const {
    const auto idx = static_cast<std::size_t>(s);
    const auto& p = phases_[idx];
    if (f.size() != static_cast<std::size_t>(p.mean.size())) {
        throw Error(ErrorCode::DimensionMismatch,
                    "feature has dimension " + std::to_string(f.size()) + ", model expects " +
                        std::to_string(p.mean.size()));
    }
    Eigen::VectorXd diff = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size())) - p.mean;
    factors_[idx].matrixL().solveInPlace(diff);
    return log_norm_[idx] - 0.5 * diff.squaredNorm();
}

GaussianPhaseModel fit_gaussians(std::span<const LabeledVideo> dataset, int num_phases,
                                 const Shrinkage& shrinkage) {
    if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "no training videos");
    if (num_phases < 1) throw Error(ErrorCode::InvalidArgument, "num_phases must be at least 1");
    if (!(shrinkage.relative >= 0.0) || !(shrinkage.absolute >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "shrinkage must be nonnegative");
    }
    const std::size_t M = dataset.front().features.dim();
    const auto S = static_cast<std::size_t>(num_phases);

    for (std::size_t n = 0; n < dataset.size(); ++n) {
        const auto& v = dataset[n];
        if (v.features.dim() != M) {
            throw Error(ErrorCode::DimensionMismatch, "video " + std::to_string(n) + " feature dimension differs");
        }
        if (v.labels.size() != v.features.frames()) {
            throw Error(ErrorCode::LengthMismatch, "video " + std::to_string(n) + " has " +
                                                       std::to_string(v.features.frames()) + " frames but " +
                                                       std::to_string(v.labels.size()) + " labels");
        }
        if (v.labels.num_phases() > num_phases) {
            for (std::size_t t = 0; t < v.labels.size(); ++t) {
                if (v.labels[t] >= num_phases) {
                    throw Error(ErrorCode::InvalidArgument,
                                "video " + std::to_string(n) + " frame " + std::to_string(t) + " has label " +
                                    std::to_string(v.labels[t]) + " >= " + std::to_string(num_phases));
                }
            }
        }
    }

    const auto Mi = static_cast<Eigen::Index>(M);
    std::vector<PhaseGaussian> phases(S);
    for (auto& p : phases) {
        p.mean = Eigen::VectorXd::Zero(Mi);
        p.covariance = Eigen::MatrixXd::Zero(Mi, Mi);
    }
    for (const auto& v : dataset) {
        for (std::size_t t = 0; t < v.labels.size(); ++t) {
            auto& p = phases[static_cast<std::size_t>(v.labels[t])];
            p.mean += Eigen::Map<const Eigen::VectorXd>(v.features.frame(t).data(), Mi);
            ++p.count;
        }
    }
    for (std::size_t s = 0; s < S; ++s) {
        if (phases[s].count < 2) {
            throw Error(ErrorCode::InsufficientSamples,
                        "phase " + std::to_string(s) + " has " + std::to_string(phases[s].count) +
                            " training frames, need at least 2");
        }
        phases[s].mean /= static_cast<double>(phases[s].count);
    }
    // Second pass around the mean.
    for (const auto& v : dataset) {
        for (std::size_t t = 0; t < v.labels.size(); ++t) {
            auto& p = phases[static_cast<std::size_t>(v.labels[t])];
            const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(v.features.frame(t).data(), Mi) - p.mean;
            p.covariance.selfadjointView<Eigen::Lower>().rankUpdate(d);
        }
    }
    for (auto& p : phases) {
        p.covariance = p.covariance.selfadjointView<Eigen::Lower>();
        p.covariance /= static_cast<double>(p.count - 1);
        p.epsilon = shrinkage.relative * p.covariance.trace() / static_cast<double>(M) + shrinkage.absolute;
    }
    return GaussianPhaseModel(std::move(phases));
}

TemporalHistogram::TemporalHistogram(Matrix bins) : bins_(std::move(bins)) {
    if (bins_.rows() < 1 || bins_.cols() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "histogram must be nonempty");
    }
    for (std::size_t i = 0; i < bins_.rows(); ++i) {
        double sum = 0.0;
        for (double v : bins_.row(i)) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw Error(ErrorCode::InvalidArgument, "histogram bin " + std::to_string(i) + " has invalid entry");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw Error(ErrorCode::InvalidArgument,
                        "histogram bin " + std::to_string(i) + " sums to " + std::to_string(sum));
        }
    }
}

std::size_t time_bin(std::size_t t, std::size_t frames, std::size_t n_x) {
    // t * n_x stays far below 2^64 for any realistic video.
    return std::min(t * n_x / frames, n_x - 1);
}

TemporalHistogram fit_histogram(std::span<const LabelSequence> label_sequences, int num_phases) {
    if (label_sequences.empty()) throw Error(ErrorCode::EmptyDataset, "no label sequences");
    if (num_phases < 1) throw Error(ErrorCode::InvalidArgument, "num_phases must be at least 1");
    std::size_t n_x = label_sequences.front().size();
    for (const auto& seq : label_sequences) n_x = std::min(n_x, seq.size());

    const auto S = static_cast<std::size_t>(num_phases);
    // Integer counts summed in doubles are exact, so the result does not
    // depend on video order.
    Matrix counts(n_x, S, 0.0);
    for (const auto& seq : label_sequences) {
        for (std::size_t t = 0; t < seq.size(); ++t) {
            if (seq[t] >= num_phases) {
                throw Error(ErrorCode::InvalidArgument,
                            "label " + std::to_string(seq[t]) + " >= " + std::to_string(num_phases));
            }
            counts(time_bin(t, seq.size(), n_x), static_cast<std::size_t>(seq[t])) += 1.0;
        }
    }
    const double n = static_cast<double>(label_sequences.size());
    for (std::size_t i = 0; i < n_x; ++i) {
        auto row = counts.row(i);
        double sum = 0.0;
        for (auto& v : row) {
            v /= n;
            sum += v;
        }
        for (auto& v : row) v /= sum;
    }
    return TemporalHistogram(std::move(counts));
}

void FewShotModel::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    if (gaussians.num_phases() != histogram.num_phases()) {
        throw Error(ErrorCode::DimensionMismatch, "spatial and temporal priors disagree on the phase count");
    }
}

FewShotModel fit_fewshot(std::span<const LabeledVideo> dataset, int num_phases, double alpha,
                         const Shrinkage& shrinkage) {
    std::vector<LabelSequence> labels;
    labels.reserve(dataset.size());
    for (const auto& v : dataset) labels.push_back(v.labels);
    FewShotModel model{fit_gaussians(dataset, num_phases, shrinkage), fit_histogram(labels, num_phases), alpha,
                       shrinkage};
    model.validate();
    return model;
}

Matrix log_spatial_prior(const GaussianPhaseModel& model, const FeatureSequence& features) {
    if (features.dim() != model.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "feature dimension " + std::to_string(features.dim()) +
                                                      " does not match model dimension " +
                                                      std::to_string(model.dim()));
    }
    const auto S = static_cast<std::size_t>(model.num_phases());
    Matrix out(S, features.frames());
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t t = 0; t < features.frames(); ++t) {
            out(s, t) = model.log_density(static_cast<int>(s), features.frame(t));
        }
    }
    return out;
}

Matrix spatial_prior(const GaussianPhaseModel& model, const FeatureSequence& features,
                     bool normalize_per_frame) {
    Matrix u = log_spatial_prior(model, features);
    const std::size_t S = u.rows();
    const std::size_t T = u.cols();
    if (!normalize_per_frame) {
        for (std::size_t s = 0; s < S; ++s) {
            for (auto& v : u.row(s)) v = std::exp(v);
        }
        return u;
    }
    for (std::size_t t = 0; t < T; ++t) {
        double peak = u(0, t);
        for (std::size_t s = 1; s < S; ++s) peak = std::max(peak, u(s, t));
        double sum = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            u(s, t) = std::exp(u(s, t) - peak);
            sum += u(s, t);
        }
        for (std::size_t s = 0; s < S; ++s) u(s, t) /= sum;
    }
    return u;
}

Matrix temporal_prior(const TemporalHistogram& hist, std::size_t frames, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    if (frames < 1) throw Error(ErrorCode::TooShort, "video has no frames");
    const int S = hist.num_phases();
    Matrix v(static_cast<std::size_t>(S), frames, 0.0);
    for (int s = 0; s < S; ++s) {
        double peak = 0.0;
        for (std::size_t i = 0; i < hist.n_x(); ++i) peak = std::max(peak, hist(i, s));
        const double threshold = alpha * peak;
        for (std::size_t t = 0; t < frames; ++t) {
            const double h = hist(time_bin(t, frames, hist.n_x()), s);
            // A phase never seen in training (peak 0) stays masked out.
            v(static_cast<std::size_t>(s), t) = (h >= threshold && h > 0.0) ? 1.0 : 0.0;
        }
    }
    return v;
}

PriorMatrix fewshot_prior(const FewShotModel& model, const FeatureSequence& features,
                          bool normalize_per_frame) {
    model.validate();
    Matrix z = spatial_prior(model.gaussians, features, normalize_per_frame);
    const Matrix v = temporal_prior(model.histogram, features.frames(), model.alpha);
    for (std::size_t s = 0; s < z.rows(); ++s) {
        for (std::size_t t = 0; t < z.cols(); ++t) z(s, t) *= v(s, t);
    }
    return PriorMatrix(std::move(z));
}

}  // namespace phaserw
