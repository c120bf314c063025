#pragma once
// File formats.
//
// Features (binary, little-endian):
//   bytes 0-3   magic "PHFT"
//   bytes 4-7   u32 version (1)
//   bytes 8-11  u32 T
//   bytes 12-15 u32 M
//   then T*M f32 values, row-major
// Labels / predictions: CSV with header "frame,phase" (predictions may append
//   one probability column per phase, "p0".."p{S-1}").
// Timestamps: JSON {"num_phases": S, "entries": [[t, s], ...]}.
// Few-shot model and evaluation report: JSON, see write_model / write_report.
//
// Dataset directories pair <id>.features with <id>.labels.csv by stem.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phaserw/core.hpp"
#include "phaserw/metrics.hpp"
#include "phaserw/prior_fewshot.hpp"

namespace phaserw::io {

namespace fs = std::filesystem;

inline constexpr char kFeatureMagic[4] = {'P', 'H', 'F', 'T'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

std::string encode_features(const FeatureSequence& features);
FeatureSequence decode_features(const std::string& bytes);

FeatureSequence read_features(const fs::path& path);
void write_features(const FeatureSequence& features, const fs::path& path);

/// num_phases defaults to 1 + the largest label in the file.
LabelSequence read_labels(const fs::path& path, std::optional<int> num_phases = std::nullopt);
void write_labels(const LabelSequence& labels, const fs::path& path);

/// Frame labels plus, when `probabilities` is given, one column per phase.
void write_predictions(const LabelSequence& labels, const ProbabilityMatrix* probabilities, const fs::path& path);

TimestampSet read_timestamps(const fs::path& path);
void write_timestamps(const TimestampSet& timestamps, const fs::path& path);

std::string model_to_json(const FewShotModel& model);
FewShotModel model_from_json(const std::string& text);
FewShotModel read_model(const fs::path& path);
void write_model(const FewShotModel& model, const fs::path& path);

std::string report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const fs::path& path);

struct DatasetEntry {
    std::string id;
    fs::path features;
    fs::path labels;
};

/// Paired entries sorted by id. A feature file without labels (or the
/// reverse) throws InvalidArgument naming the file.
std::vector<DatasetEntry> list_dataset(const fs::path& root);

struct Dataset {
    std::vector<std::string> ids;
    std::vector<LabeledVideo> videos;
    int num_phases = 0;
};

/// Loads every pair. num_phases defaults to 1 + the largest label seen.
/// Errors carry the offending file name. Throws EmptyDataset.
Dataset load_dataset(const fs::path& root, std::optional<int> num_phases = std::nullopt);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& contents);

}  // namespace phaserw::io
