#include "phaserw/graph.hpp"

#include <cmath>
#include <string>

namespace phaserw {

WeightConvention parse_weight_convention(std::string_view name) {
    if (name == "cosine") return WeightConvention::Cosine;
    if (name == "distance") return WeightConvention::Distance;
    throw Error(ErrorCode::InvalidArgument, "unknown weight convention '" + std::string(name) + "'");
}

std::string_view to_string(WeightConvention convention) noexcept {
    return convention == WeightConvention::Distance ? "distance" : "cosine";
}

std::vector<double> TridiagonalMatrix::multiply(std::span<const double> x) const {
    const std::size_t n = diag.size();
    if (x.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "vector length does not match matrix size");
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = diag[i] * x[i];
        if (i > 0) acc += off[i - 1] * x[i - 1];
        if (i + 1 < n) acc += off[i] * x[i + 1];
        y[i] = acc;
    }
    return y;
}

namespace {

void check_weights(std::span<const double> weights) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            throw Error(ErrorCode::NonPositiveWeight,
                        "edge " + std::to_string(i) + " has weight " + std::to_string(weights[i]));
        }
    }
}

}  // namespace

ChainGraph ChainGraph::from_weights(std::vector<double> weights) {
    check_weights(weights);
    ChainGraph g;
    g.degrees.assign(weights.size() + 1, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        g.degrees[i] += weights[i];
        g.degrees[i + 1] += weights[i];
    }
    g.edge_weights = std::move(weights);
    return g;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m) {
        dot += a[m] * b[m];
        na += a[m] * a[m];
        nb += b[m] * b[m];
    }
    // Norms are nonzero: FeatureSequence rejects zero rows.
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> edge_weights(const FeatureSequence& features, double beta,
                                 WeightConvention convention) {
    if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
    const std::size_t T = features.frames();
    std::vector<double> w(T - 1);
    for (std::size_t i = 0; i + 1 < T; ++i) {
        const double c = cosine_similarity(features.frame(i), features.frame(i + 1));
        w[i] = convention == WeightConvention::Distance ? std::exp(-beta * (1.0 - c))
                                                        : std::exp(-beta * c);
    }
    return w;
}

TridiagonalMatrix build_laplacian(std::span<const double> weights) {
    check_weights(weights);
    TridiagonalMatrix L;
    L.diag.assign(weights.size() + 1, 0.0);
    L.off.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        L.diag[i] += weights[i];
        L.diag[i + 1] += weights[i];
        L.off[i] = -weights[i];
    }
    return L;
}

TridiagonalMatrix build_laplacian(const ChainGraph& graph) {
    TridiagonalMatrix L;
    L.diag = graph.degrees;
    L.off.resize(graph.edge_weights.size());
    for (std::size_t i = 0; i < graph.edge_weights.size(); ++i) L.off[i] = -graph.edge_weights[i];
    return L;
}

}  // namespace phaserw
