#include "phaserw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace phaserw {

std::vector<Segment> segments_of(const LabelSequence& labels) {
    std::vector<Segment> out;
    std::size_t start = 0;
    for (std::size_t t = 1; t <= labels.size(); ++t) {
        if (t == labels.size() || labels[t] != labels[start]) {
            out.push_back({labels[start], start, t});
            start = t;
        }
    }
    return out;
}

namespace {

void require_same_length(const LabelSequence& pred, const LabelSequence& gt) {
    if (pred.size() != gt.size()) {
        throw Error(ErrorCode::LengthMismatch, "prediction has " + std::to_string(pred.size()) +
                                                   " frames, ground truth has " + std::to_string(gt.size()));
    }
}

void require_threshold(double overlap) {
    if (!(overlap > 0.0 && overlap <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "overlap threshold must lie in (0, 1]");
    }
}

double iou(const Segment& a, const Segment& b) {
    const std::size_t lo = std::max(a.start, b.start);
    const std::size_t hi = std::min(a.end, b.end);
    const double inter = hi > lo ? static_cast<double>(hi - lo) : 0.0;
    const double uni = static_cast<double>(std::max(a.end, b.end) - std::min(a.start, b.start));
    // Disjoint segments: the span overestimates the union but inter is 0.
    return inter / uni;
}

}  // namespace

double frame_accuracy(const LabelSequence& pred, const LabelSequence& gt) {
    require_same_length(pred, gt);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) hits += pred[t] == gt[t] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(gt.size());
}

double segmental_f1(const LabelSequence& pred, const LabelSequence& gt, double overlap) {
    require_same_length(pred, gt);
    require_threshold(overlap);
    const auto p_segs = segments_of(pred);
    const auto g_segs = segments_of(gt);
    std::vector<bool> used(g_segs.size(), false);

    std::size_t tp = 0;
    for (const auto& p : p_segs) {
        double best = -1.0;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < g_segs.size(); ++j) {
            if (used[j] || g_segs[j].phase != p.phase) continue;
            const double v = iou(p, g_segs[j]);
            if (v > best) {
                best = v;
                best_j = j;
            }
        }
        if (best >= overlap) {
            used[best_j] = true;
            ++tp;
        }
    }
    const double fp = static_cast<double>(p_segs.size() - tp);
    const double fn = static_cast<double>(g_segs.size() - tp);
    const double precision = tp / (tp + fp);
    const double recall = tp / (tp + fn);
    if (precision + recall == 0.0) return 0.0;
    return 200.0 * precision * recall / (precision + recall);
}

double EvalReport::f1_at(double overlap) const {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] == overlap) return f1[i];
    }
    throw Error(ErrorCode::InvalidArgument, "threshold " + threshold_key(overlap) + " was not evaluated");
}

EvalReport evaluate(std::span<const LabelSequence> preds, std::span<const LabelSequence> gts,
                    std::vector<double> thresholds, std::span<const std::string> ids) {
    if (preds.empty()) throw Error(ErrorCode::EmptyEvaluation, "no videos to evaluate");
    if (preds.size() != gts.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions for " +
                                                   std::to_string(gts.size()) + " ground-truth videos");
    }
    if (!ids.empty() && ids.size() != preds.size()) {
        throw Error(ErrorCode::LengthMismatch, "video id list does not match the number of videos");
    }
    if (thresholds.empty()) throw Error(ErrorCode::InvalidArgument, "no overlap thresholds");
    for (double tau : thresholds) require_threshold(tau);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    EvalReport report;
    report.thresholds = thresholds;
    report.f1.assign(thresholds.size(), 0.0);
    for (std::size_t v = 0; v < preds.size(); ++v) {
        VideoScores scores;
        scores.id = ids.empty() ? std::to_string(v) : ids[v];
        scores.accuracy = frame_accuracy(preds[v], gts[v]);
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
            scores.f1.push_back(segmental_f1(preds[v], gts[v], thresholds[k]));
            if (k > 0 && scores.f1[k] > scores.f1[k - 1]) {
                throw std::logic_error("segmental F1 increased with the overlap threshold for video " + scores.id);
            }
        }
        report.accuracy += scores.accuracy;
        for (std::size_t k = 0; k < thresholds.size(); ++k) report.f1[k] += scores.f1[k];
        report.per_video.push_back(std::move(scores));
    }
    const double n = static_cast<double>(preds.size());
    report.accuracy /= n;
    for (auto& f : report.f1) f /= n;
    return report;
}

std::string threshold_key(double overlap) {
    std::ostringstream os;
    os << std::round(overlap * 1e6) / 1e4;
    return os.str();
}

}  // namespace phaserw
