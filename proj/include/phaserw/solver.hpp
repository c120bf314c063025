#pragma once
// Regularized random-walk solve on the chain graph.
//
// For every phase s the prior row z^s is smoothed along the chain by solving
//     (L + gamma I) x^s = gamma z^s
// which is the minimizer of x^T L x + gamma ||x - z||^2. The system matrix is
// symmetric, strictly diagonally dominant and tridiagonal, so one LDL^T
// factorization (Thomas elimination) serves all phases in O(T) each.

#include <vector>

#include "phaserw/core.hpp"
#include "phaserw/graph.hpp"

namespace phaserw {

/// Factorization of L + shift * I for a tridiagonal Laplacian L.
class ShiftedTridiagonalFactor {
public:
    ShiftedTridiagonalFactor(const TridiagonalMatrix& laplacian, double shift);

    std::size_t size() const noexcept { return pivots_.size(); }
    /// Solves (L + shift I) x = rhs into out; rhs and out may alias.
    void solve(std::span<const double> rhs, std::span<double> out) const;

private:
    std::vector<double> pivots_;  // eliminated diagonal
    std::vector<double> upper_;   // off[i] / pivots_[i]
    std::vector<double> off_;
};

/// Returns x with (L + gamma I) x = gamma z.
std::vector<double> solve_phase(const TridiagonalMatrix& laplacian, double gamma,
                                std::span<const double> prior_row);

/// Row s of the result solves phase s. Rows are independent; `threads` > 1
/// splits them across worker threads with identical results.
ProbabilityMatrix solve_all_phases(const TridiagonalMatrix& laplacian, double gamma,
                                   const PriorMatrix& priors, unsigned threads = 1);

/// Adds mu_t = (1 - sum_s x_t^s) / S to every entry of frame t.
/// Throws AlreadyCorrected.
ProbabilityMatrix apply_correction(const ProbabilityMatrix& probs);

/// Per-frame argmax over phases, ties to the smallest phase id.
LabelSequence decode(const ProbabilityMatrix& probs);

/// x^T L x + gamma ||x - z||^2
double random_walk_energy(const TridiagonalMatrix& laplacian, double gamma,
                          std::span<const double> x, std::span<const double> z);

struct SegmentOptions {
    double beta = 5.0;
    double gamma = 1e-3;
    WeightConvention convention = WeightConvention::Cosine;
    unsigned threads = 1;
};

struct Segmentation {
    ProbabilityMatrix probabilities;  // corrected
    LabelSequence labels;
};

/// Edge weights, Laplacian, per-phase solves, correction and decoding.
Segmentation segment_video(const FeatureSequence& features, const PriorMatrix& priors,
                           const SegmentOptions& options);

}  // namespace phaserw
