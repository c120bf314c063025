#pragma once
// Frame-wise accuracy and segmental F1 for temporal phase segmentations.

#include <span>
#include <string>
#include <vector>

#include "phaserw/core.hpp"

namespace phaserw {

/// Maximal constant run [start, end).
struct Segment {
    Phase phase;
    std::size_t start;
    std::size_t end;
    friend bool operator==(const Segment&, const Segment&) = default;
};

std::vector<Segment> segments_of(const LabelSequence& labels);

/// Fraction of frames where pred == gt. Throws LengthMismatch.
double frame_accuracy(const LabelSequence& pred, const LabelSequence& gt);

/// Segmental F1 on a 0-100 scale at IoU threshold `overlap` in (0, 1].
///
/// Predicted segments are visited in temporal order. Each one is compared by
/// IoU with the still-unmatched ground-truth segments of the same phase; if
/// the best IoU reaches the threshold the pair is a true positive and the
/// ground-truth segment is consumed, otherwise the prediction is a false
/// positive. Leftover ground-truth segments are false negatives.
double segmental_f1(const LabelSequence& pred, const LabelSequence& gt, double overlap);

struct VideoScores {
    std::string id;
    double accuracy = 0.0;
    std::vector<double> f1;  // parallel to EvalReport::thresholds
};

struct EvalReport {
    std::vector<double> thresholds;  // overlap fractions, ascending
    double accuracy = 0.0;           // unweighted mean over videos, in [0, 1]
    std::vector<double> f1;          // unweighted mean over videos, in [0, 100]
    std::vector<VideoScores> per_video;

    double f1_at(double overlap) const;
};

/// Per-video metrics and their unweighted means. Thresholds are sorted; the
/// F1 curve of every video is checked to be non-increasing in the threshold.
/// Throws EmptyEvaluation, LengthMismatch, InvalidArgument.
EvalReport evaluate(std::span<const LabelSequence> preds, std::span<const LabelSequence> gts,
                    std::vector<double> thresholds, std::span<const std::string> ids = {});

/// "10" for 0.10, "25" for 0.25, "12.5" for 0.125.
std::string threshold_key(double overlap);

}  // namespace phaserw
