#pragma once
// Sparse-timestamp supervision: a handful of labeled frames per phase become
// a binary indicator prior.

#include <cstdint>
#include <vector>

#include "phaserw/core.hpp"

namespace phaserw {

/// z(s, t) = 1 iff frame t is annotated with phase s.
/// Throws FrameOutOfRange or DimensionMismatch (num_phases differs).
PriorMatrix timestamp_prior(const TimestampSet& timestamps, std::size_t frames, int num_phases);

struct TimestampSample {
    TimestampSet timestamps;
    std::vector<Phase> skipped_phases;  // phases with no frame in the video
};

/// Draws min(k, n_s) frames per phase uniformly without replacement.
/// Entries are ordered by frame. Deterministic in (labels, k, seed).
TimestampSample sample_timestamps(const LabelSequence& labels, std::size_t k, std::uint64_t seed);

}  // namespace phaserw
