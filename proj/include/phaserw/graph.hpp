#pragma once
// Chain graph over consecutive frames and its tridiagonal Laplacian.

#include <string_view>
#include <vector>

#include "phaserw/core.hpp"

namespace phaserw {

/// How cosine similarity c between neighbouring frames becomes an edge weight.
///   Cosine: w = exp(-beta * c)
///   Distance:     w = exp(-beta * (1 - c))
/// Cosine gives similar frames the smaller weight; Distance gives them
/// the larger one.
enum class WeightConvention { Cosine, Distance };

WeightConvention parse_weight_convention(std::string_view name);
std::string_view to_string(WeightConvention convention) noexcept;

/// Symmetric tridiagonal matrix; off[i] couples rows i and i+1.
struct TridiagonalMatrix {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const noexcept { return diag.size(); }
    /// y = A x
    std::vector<double> multiply(std::span<const double> x) const;
};

struct ChainGraph {
    std::vector<double> edge_weights;  // w_{i,i+1}, length T-1
    std::vector<double> degrees;       // length T

    std::size_t frames() const noexcept { return degrees.size(); }

    /// Throws NonPositiveWeight for any weight that is not finite and > 0.
    static ChainGraph from_weights(std::vector<double> weights);
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// One weight per consecutive frame pair. Output lies in (0, e^beta].
std::vector<double> edge_weights(const FeatureSequence& features, double beta,
                                 WeightConvention convention = WeightConvention::Cosine);

/// diag = degrees, off = -weights. Throws NonPositiveWeight(i).
TridiagonalMatrix build_laplacian(std::span<const double> weights);
TridiagonalMatrix build_laplacian(const ChainGraph& graph);

}  // namespace phaserw
