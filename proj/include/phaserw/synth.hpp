#pragma once
// Synthetic piecewise-stationary videos and brute-force verification oracles.

#include <cstdint>
#include <string>
#include <vector>

#include "phaserw/core.hpp"
#include "phaserw/prior_fewshot.hpp"

namespace phaserw::synth {

struct SynthConfig {
    int num_phases = 7;
    std::size_t dim = 16;
    std::size_t num_videos = 10;
    std::size_t t_min = 1900;
    std::size_t t_max = 2100;
    double separation = 6.0;      // distance between phase means, in units of noise
    double duration_sigma = 0.3;  // log-normal spread of relative phase durations
    double noise = 1.0;           // per-coordinate standard deviation
    std::uint64_t seed = 0;

    /// Throws InvalidArgument.
    void validate() const;
};

/// Phase means: vertices of a regular simplex centred at the origin with
/// pairwise distance separation * noise, rotated by a random orthonormal
/// frame drawn from cfg.seed. Row s is the mean of phase s.
Matrix phase_means(const SynthConfig& cfg);

/// Phases 0..S-1 in order, each once, with clipped log-normal durations.
/// Pure function of (cfg, video_seed).
LabeledVideo generate_video(const SynthConfig& cfg, std::uint64_t video_seed);

/// Videos 0..num_videos-1, video i generated with video_seed = first_video + i.
std::vector<LabeledVideo> generate_dataset(const SynthConfig& cfg, std::uint64_t first_video = 0);

std::string video_id(std::size_t index);

/// Dense Laplacian assembled entry by entry from the edge weights.
Matrix dense_laplacian(std::span<const double> weights);

/// Solves (A + gamma I) x = gamma z by dense LU with partial pivoting.
std::vector<double> dense_solve_oracle(const Matrix& laplacian, double gamma, std::span<const double> z);

/// Segmental F1 by exhaustive pair enumeration: the full IoU table between
/// every predicted and ground-truth run is counted frame by frame, then the
/// matching rule is replayed over it.
double f1_bruteforce_oracle(std::span<const Phase> pred, std::span<const Phase> gt, double overlap);

}  // namespace phaserw::synth
