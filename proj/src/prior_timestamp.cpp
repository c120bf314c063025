#include "phaserw/prior_timestamp.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace phaserw {

PriorMatrix timestamp_prior(const TimestampSet& timestamps, std::size_t frames, int num_phases) {
    if (timestamps.num_phases() != num_phases) {
        throw Error(ErrorCode::DimensionMismatch,
                    "timestamps declare " + std::to_string(timestamps.num_phases()) +
                        " phases, expected " + std::to_string(num_phases));
    }
    if (frames == 0) throw Error(ErrorCode::TooShort, "video has no frames");
    Matrix z(static_cast<std::size_t>(num_phases), frames, 0.0);
    for (const auto& e : timestamps.entries()) {
        if (e.frame >= frames) {
            throw Error(ErrorCode::FrameOutOfRange,
                        "timestamp frame " + std::to_string(e.frame) + " >= " + std::to_string(frames));
        }
        z(static_cast<std::size_t>(e.phase), e.frame) = 1.0;
    }
    return PriorMatrix(std::move(z));
}

TimestampSample sample_timestamps(const LabelSequence& labels, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    const int S = labels.num_phases();
    std::vector<std::vector<std::size_t>> frames_of(static_cast<std::size_t>(S));
    for (std::size_t t = 0; t < labels.size(); ++t) {
        frames_of[static_cast<std::size_t>(labels[t])].push_back(t);
    }

    std::mt19937_64 rng(seed);
    std::vector<Timestamp> entries;
    std::vector<Phase> skipped;
    for (int s = 0; s < S; ++s) {
        auto& pool = frames_of[static_cast<std::size_t>(s)];
        if (pool.empty()) {
            skipped.push_back(s);
            continue;
        }
        // Partial Fisher-Yates; std::sample's draw order is implementation-defined.
        const std::size_t take = std::min(k, pool.size());
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
            entries.push_back({pool[i], s});
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const Timestamp& a, const Timestamp& b) { return a.frame < b.frame; });
    return {TimestampSet(std::move(entries), S), std::move(skipped)};
}

}  // namespace phaserw
