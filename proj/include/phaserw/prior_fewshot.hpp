#pragma once
// Few-shot supervision: priors fitted on a small set of fully labeled videos.
//
// The spatial part models each phase's features as a multivariate Gaussian;
// the temporal part is a per-time-bin phase histogram thresholded into a
// binary mask. The prior is their elementwise product.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "phaserw/core.hpp"

namespace phaserw {

struct LabeledVideo {
    FeatureSequence features;
    LabelSequence labels;
};

struct PhaseGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // unbiased sample covariance, before shrinkage
    double epsilon = 0.0;        // covariance + epsilon * I is what gets factorized
    std::size_t count = 0;
};

/// Shrinkage added to each phase covariance:
///   epsilon_s = relative * trace(cov_s) / M + absolute
struct Shrinkage {
    double relative = 1e-3;
    double absolute = 0.0;
};

class GaussianPhaseModel {
public:
    /// Factorizes every shrunk covariance. Throws NonPSDAfterShrinkage(s),
    /// InsufficientSamples(s) when count < 2, DimensionMismatch.
    explicit GaussianPhaseModel(std::vector<PhaseGaussian> phases);

    int num_phases() const noexcept { return static_cast<int>(phases_.size()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(phases_.front().mean.size()); }
    const PhaseGaussian& phase(int s) const { return phases_[static_cast<std::size_t>(s)]; }
    const std::vector<PhaseGaussian>& phases() const noexcept { return phases_; }

    /// log N(f; mean_s, cov_s + epsilon_s I)
    double log_density(int s, std::span<const double> f) const;

private:
    std::vector<PhaseGaussian> phases_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
    std::vector<double> log_norm_;  // -(M log 2pi + log det) / 2
};

/// Throws InsufficientSamples(s) when phase s has fewer than 2 frames.
GaussianPhaseModel fit_gaussians(std::span<const LabeledVideo> dataset, int num_phases,
                                 const Shrinkage& shrinkage = {});

/// N_x x S matrix; every time-bin row sums to one.
class TemporalHistogram {
public:
    explicit TemporalHistogram(Matrix bins);

    std::size_t n_x() const noexcept { return bins_.rows(); }
    int num_phases() const noexcept { return static_cast<int>(bins_.cols()); }
    double operator()(std::size_t bin, int s) const { return bins_(bin, static_cast<std::size_t>(s)); }
    const Matrix& bins() const noexcept { return bins_; }

private:
    Matrix bins_;
};

/// Time bin of frame t in a video of length T: floor(t * n_x / T), clamped.
std::size_t time_bin(std::size_t t, std::size_t frames, std::size_t n_x);

/// N_x is the shortest video length. Throws EmptyDataset.
TemporalHistogram fit_histogram(std::span<const LabelSequence> label_sequences, int num_phases);

struct FewShotModel {
    GaussianPhaseModel gaussians;
    TemporalHistogram histogram;
    double alpha = 0.5;
    Shrinkage shrinkage;

    /// Throws InvalidArgument on alpha outside (0, 1) or mismatched phase counts.
    void validate() const;
};

FewShotModel fit_fewshot(std::span<const LabeledVideo> dataset, int num_phases, double alpha,
                         const Shrinkage& shrinkage = {});

/// S x T log densities.
Matrix log_spatial_prior(const GaussianPhaseModel& model, const FeatureSequence& features);

/// S x T densities. With normalize_per_frame each column is divided by its
/// sum (computed in log space, so it stays finite when raw densities underflow).
Matrix spatial_prior(const GaussianPhaseModel& model, const FeatureSequence& features,
                     bool normalize_per_frame = true);

/// S x T binary mask: 1 iff H(bin(t), s) >= alpha * max_i H(i, s).
Matrix temporal_prior(const TemporalHistogram& hist, std::size_t frames, double alpha);

/// Elementwise product of the spatial and temporal priors.
PriorMatrix fewshot_prior(const FewShotModel& model, const FeatureSequence& features,
                          bool normalize_per_frame = true);

}  // namespace phaserw
