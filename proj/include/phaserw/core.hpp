#pragma once
// Domain types shared by every stage of the phase segmentation pipeline.
//
// All arithmetic is double precision. Types validate their invariants on
// construction and are immutable afterwards.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phaserw {

using Phase = int;

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    NonFiniteEntry,
    ZeroRow,
    TooShort,
    NonPositiveWeight,
    AlreadyCorrected,
    FrameOutOfRange,
    DuplicateFrame,
    EmptyPhase,
    InsufficientSamples,
    NonPSDAfterShrinkage,
    EmptyDataset,
    LengthMismatch,
    EmptyEvaluation,
    BadMagic,
    TruncatedFile,
    VersionUnsupported,
    MalformedRow,
    MissingHeader,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }
    /// what() without the leading error code.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& values() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// T x M per-frame feature vectors of one video. Every row is finite and
/// nonzero, and T >= 2.
class FeatureSequence {
public:
    std::size_t frames() const noexcept { return data_.rows(); }
    std::size_t dim() const noexcept { return data_.cols(); }
    std::span<const double> frame(std::size_t t) const { return data_.row(t); }
    const Matrix& matrix() const noexcept { return data_; }

    friend FeatureSequence validate_feature_sequence(Matrix raw);
    friend bool operator==(const FeatureSequence&, const FeatureSequence&) = default;

private:
    explicit FeatureSequence(Matrix data) : data_(std::move(data)) {}
    Matrix data_;
};

/// Throws NonFiniteEntry, ZeroRow or TooShort.
FeatureSequence validate_feature_sequence(Matrix raw);
/// Same, from nested rows; ragged input throws DimensionMismatch.
FeatureSequence validate_feature_sequence(const std::vector<std::vector<double>>& rows);

/// Per-frame phase ids, each in [0, num_phases).
class LabelSequence {
public:
    LabelSequence(std::vector<Phase> labels, int num_phases);

    std::size_t size() const noexcept { return labels_.size(); }
    int num_phases() const noexcept { return num_phases_; }
    Phase operator[](std::size_t t) const { return labels_[t]; }
    const std::vector<Phase>& labels() const noexcept { return labels_; }

    friend bool operator==(const LabelSequence&, const LabelSequence&) = default;

private:
    std::vector<Phase> labels_;
    int num_phases_;
};

struct Timestamp {
    std::size_t frame;
    Phase phase;
    friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

/// Sparse frame annotations. Frames are unique and phases lie in
/// [0, num_phases). Frame bounds are checked against a video later, when the
/// prior is built.
class TimestampSet {
public:
    TimestampSet(std::vector<Timestamp> entries, int num_phases);

    const std::vector<Timestamp>& entries() const noexcept { return entries_; }
    int num_phases() const noexcept { return num_phases_; }

    /// Phases with no timestamp, in increasing order.
    std::vector<Phase> missing_phases() const;

    friend bool operator==(const TimestampSet&, const TimestampSet&) = default;

private:
    std::vector<Timestamp> entries_;
    int num_phases_;
};

/// S x T nonnegative prior values z.
class PriorMatrix {
public:
    explicit PriorMatrix(Matrix values);

    std::size_t num_phases() const noexcept { return values_.rows(); }
    std::size_t frames() const noexcept { return values_.cols(); }
    std::span<const double> row(std::size_t s) const { return values_.row(s); }
    double operator()(std::size_t s, std::size_t t) const { return values_(s, t); }
    const Matrix& matrix() const noexcept { return values_; }

private:
    Matrix values_;
};

/// S x T solved values x. A corrected matrix carries one additive offset per
/// frame so that every column sums to one; the raw solution is kept
/// alongside, which lets decoding compare the uncorrected values and keeps
/// the per-frame argmax bit-exact.
class ProbabilityMatrix {
public:
    explicit ProbabilityMatrix(Matrix raw);

    std::size_t num_phases() const noexcept { return raw_.rows(); }
    std::size_t frames() const noexcept { return raw_.cols(); }
    bool corrected() const noexcept { return !offsets_.empty(); }

    /// Entry (s, t), including the frame offset when corrected.
    double operator()(std::size_t s, std::size_t t) const {
        return offsets_.empty() ? raw_(s, t) : raw_(s, t) + offsets_[t];
    }

    const Matrix& raw() const noexcept { return raw_; }
    const std::vector<double>& offsets() const noexcept { return offsets_; }

    /// Dense S x T copy of the (possibly corrected) values.
    Matrix materialize() const;

    friend ProbabilityMatrix apply_correction(const ProbabilityMatrix& probs);

private:
    ProbabilityMatrix(Matrix raw, std::vector<double> offsets)
        : raw_(std::move(raw)), offsets_(std::move(offsets)) {}

    Matrix raw_;
    std::vector<double> offsets_;
};

struct Hyperparameters {
    double beta = 5.0;
    double gamma = 1e-3;
    double alpha = 0.5;

    /// Throws InvalidArgument unless beta > 0, gamma > 0 and 0 < alpha < 1.
    void validate() const;
};

}  // namespace phaserw
