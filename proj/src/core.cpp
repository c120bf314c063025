#include "phaserw/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace phaserw {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
        case ErrorCode::ZeroRow: return "ZeroRow";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
        case ErrorCode::AlreadyCorrected: return "AlreadyCorrected";
        case ErrorCode::FrameOutOfRange: return "FrameOutOfRange";
        case ErrorCode::DuplicateFrame: return "DuplicateFrame";
        case ErrorCode::EmptyPhase: return "EmptyPhase";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::NonPSDAfterShrinkage: return "NonPSDAfterShrinkage";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::VersionUnsupported: return "VersionUnsupported";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::MissingHeader: return "MissingHeader";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix storage holds " + std::to_string(data_.size()) + " values, expected " +
                        std::to_string(rows * cols));
    }
}

FeatureSequence validate_feature_sequence(Matrix raw) {
    if (raw.rows() < 2) {
        throw Error(ErrorCode::TooShort,
                    "feature sequence needs at least 2 frames, got " + std::to_string(raw.rows()));
    }
    if (raw.cols() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "feature dimension must be at least 1");
    }
    for (std::size_t t = 0; t < raw.rows(); ++t) {
        bool all_zero = true;
        const auto row = raw.row(t);
        for (std::size_t m = 0; m < row.size(); ++m) {
            if (!std::isfinite(row[m])) {
                throw Error(ErrorCode::NonFiniteEntry,
                            "frame " + std::to_string(t) + ", component " + std::to_string(m));
            }
            all_zero = all_zero && row[m] == 0.0;
        }
        if (all_zero) {
            throw Error(ErrorCode::ZeroRow, "frame " + std::to_string(t) + " is the zero vector");
        }
    }
    return FeatureSequence(std::move(raw));
}

FeatureSequence validate_feature_sequence(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * cols);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        if (rows[t].size() != cols) {
            throw Error(ErrorCode::DimensionMismatch,
                        "row " + std::to_string(t) + " has " + std::to_string(rows[t].size()) +
                            " entries, expected " + std::to_string(cols));
        }
        flat.insert(flat.end(), rows[t].begin(), rows[t].end());
    }
    return validate_feature_sequence(Matrix(rows.size(), cols, std::move(flat)));
}

LabelSequence::LabelSequence(std::vector<Phase> labels, int num_phases)
    : labels_(std::move(labels)), num_phases_(num_phases) {
    if (num_phases_ < 1) {
        throw Error(ErrorCode::InvalidArgument, "num_phases must be at least 1");
    }
    if (labels_.empty()) {
        throw Error(ErrorCode::TooShort, "label sequence is empty");
    }
    for (std::size_t t = 0; t < labels_.size(); ++t) {
        if (labels_[t] < 0 || labels_[t] >= num_phases_) {
            throw Error(ErrorCode::InvalidArgument,
                        "label " + std::to_string(labels_[t]) + " at frame " + std::to_string(t) +
                            " outside [0, " + std::to_string(num_phases_) + ")");
        }
    }
}

TimestampSet::TimestampSet(std::vector<Timestamp> entries, int num_phases)
    : entries_(std::move(entries)), num_phases_(num_phases) {
    if (num_phases_ < 1) {
        throw Error(ErrorCode::InvalidArgument, "num_phases must be at least 1");
    }
    std::unordered_set<std::size_t> seen;
    for (const auto& e : entries_) {
        if (e.phase < 0 || e.phase >= num_phases_) {
            throw Error(ErrorCode::InvalidArgument,
                        "timestamp phase " + std::to_string(e.phase) + " outside [0, " +
                            std::to_string(num_phases_) + ")");
        }
        if (!seen.insert(e.frame).second) {
            throw Error(ErrorCode::DuplicateFrame, "frame " + std::to_string(e.frame));
        }
    }
}

std::vector<Phase> TimestampSet::missing_phases() const {
    std::vector<bool> present(static_cast<std::size_t>(num_phases_), false);
    for (const auto& e : entries_) present[static_cast<std::size_t>(e.phase)] = true;
    std::vector<Phase> missing;
    for (int s = 0; s < num_phases_; ++s) {
        if (!present[static_cast<std::size_t>(s)]) missing.push_back(s);
    }
    return missing;
}

PriorMatrix::PriorMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "prior matrix must be nonempty");
    }
    for (std::size_t s = 0; s < values_.rows(); ++s) {
        for (std::size_t t = 0; t < values_.cols(); ++t) {
            const double v = values_(s, t);
            if (!std::isfinite(v) || v < 0.0) {
                throw Error(ErrorCode::InvalidArgument,
                            "prior entry (" + std::to_string(s) + ", " + std::to_string(t) +
                                ") must be finite and nonnegative");
            }
        }
    }
}

ProbabilityMatrix::ProbabilityMatrix(Matrix raw) : raw_(std::move(raw)) {
    if (raw_.rows() < 1 || raw_.cols() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "probability matrix must be nonempty");
    }
    if (!std::all_of(raw_.values().begin(), raw_.values().end(),
                     [](double v) { return std::isfinite(v); })) {
        throw Error(ErrorCode::NonFiniteEntry, "probability matrix has a non-finite entry");
    }
}

Matrix ProbabilityMatrix::materialize() const {
    Matrix out(num_phases(), frames());
    for (std::size_t s = 0; s < num_phases(); ++s) {
        for (std::size_t t = 0; t < frames(); ++t) out(s, t) = (*this)(s, t);
    }
    return out;
}

void Hyperparameters::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw Error(ErrorCode::InvalidArgument, "beta must be positive");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    }
}

}  // namespace phaserw
