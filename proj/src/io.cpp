#include "phaserw/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace phaserw::io {

using nlohmann::json;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + static_cast<std::size_t>(i)])) << (8 * i);
    }
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    s = trim(s);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

Error with_file(const Error& e, const fs::path& path) {
    return Error(e.code(), path.string() + ": " + e.message());
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::string encode_features(const FeatureSequence& features) {
    const std::size_t T = features.frames();
    const std::size_t M = features.dim();
    std::string out;
    out.reserve(kFeatureHeaderBytes + 4 * T * M);
    out.append(kFeatureMagic, 4);
    put_u32(out, kFeatureVersion);
    put_u32(out, static_cast<std::uint32_t>(T));
    put_u32(out, static_cast<std::uint32_t>(M));
    for (double v : features.matrix().values()) {
        const auto f = static_cast<float>(v);
        if (!std::isfinite(f)) {
            throw Error(ErrorCode::NonFiniteEntry, "feature value " + format_double(v) + " overflows f32");
        }
        put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
    return out;
}

FeatureSequence decode_features(const std::string& bytes) {
    if (bytes.size() < kFeatureHeaderBytes) {
        if (bytes.size() >= 4 && std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
            throw Error(ErrorCode::BadMagic, "not a feature file");
        }
        throw Error(ErrorCode::TruncatedFile, "header needs 16 bytes, file has " + std::to_string(bytes.size()));
    }
    if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) throw Error(ErrorCode::BadMagic, "not a feature file");
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kFeatureVersion) {
        throw Error(ErrorCode::VersionUnsupported, "feature file version " + std::to_string(version));
    }
    const std::uint64_t T = get_u32(bytes, 8);
    const std::uint64_t M = get_u32(bytes, 12);
    const std::uint64_t expected = kFeatureHeaderBytes + 4 * T * M;
    if (bytes.size() < expected) {
        throw Error(ErrorCode::TruncatedFile, "header declares " + std::to_string(T) + "x" + std::to_string(M) +
                                                  " values (" + std::to_string(expected) + " bytes), file has " +
                                                  std::to_string(bytes.size()));
    }
    if (bytes.size() > expected) {
        throw Error(ErrorCode::InvalidArgument, std::to_string(bytes.size() - expected) + " trailing bytes");
    }
    std::vector<double> values(T * M);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, kFeatureHeaderBytes + 4 * i)));
    }
    return validate_feature_sequence(Matrix(T, M, std::move(values)));
}

FeatureSequence read_features(const fs::path& path) {
    try {
        return decode_features(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        throw with_file(e, path);
    }
}

void write_features(const FeatureSequence& features, const fs::path& path) {
    write_file(path, encode_features(features));
}

LabelSequence read_labels(const fs::path& path, std::optional<int> num_phases) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || trim(line).substr(0, 11) != "frame,phase" ||
        (trim(line).size() > 11 && trim(line)[11] != ',')) {
        throw Error(ErrorCode::MissingHeader, path.string() + ": expected header 'frame,phase'");
    }
    std::vector<Phase> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = trim(line);
        if (row.empty()) continue;
        const auto c1 = row.find(',');
        const auto c2 = row.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
        std::size_t frame = 0;
        Phase phase = 0;
        if (c1 == std::string_view::npos || !parse_int(row.substr(0, c1), frame) ||
            !parse_int(row.substr(c1 + 1, c2 == std::string_view::npos ? std::string_view::npos : c2 - c1 - 1),
                       phase) ||
            phase < 0) {
            throw Error(ErrorCode::MalformedRow, path.string() + ":" + std::to_string(lineno));
        }
        if (frame != labels.size()) {
            throw Error(ErrorCode::MalformedRow, path.string() + ":" + std::to_string(lineno) + ": expected frame " +
                                                     std::to_string(labels.size()));
        }
        labels.push_back(phase);
    }
    if (labels.empty()) throw Error(ErrorCode::TooShort, path.string() + ": no label rows");
    const int inferred = *std::max_element(labels.begin(), labels.end()) + 1;
    try {
        return LabelSequence(std::move(labels), num_phases.value_or(inferred));
    } catch (const Error& e) {
        throw with_file(e, path);
    }
}

void write_labels(const LabelSequence& labels, const fs::path& path) {
    write_predictions(labels, nullptr, path);
}

void write_predictions(const LabelSequence& labels, const ProbabilityMatrix* probabilities, const fs::path& path) {
    if (probabilities && probabilities->frames() != labels.size()) {
        throw Error(ErrorCode::LengthMismatch, "probabilities and labels differ in length");
    }
    std::string out = "frame,phase";
    if (probabilities) {
        for (std::size_t s = 0; s < probabilities->num_phases(); ++s) out += ",p" + std::to_string(s);
    }
    out += '\n';
    for (std::size_t t = 0; t < labels.size(); ++t) {
        out += std::to_string(t);
        out += ',';
        out += std::to_string(labels[t]);
        if (probabilities) {
            for (std::size_t s = 0; s < probabilities->num_phases(); ++s) {
                out += ',';
                out += format_double((*probabilities)(s, t));
            }
        }
        out += '\n';
    }
    write_file(path, out);
}

TimestampSet read_timestamps(const fs::path& path) {
    try {
        const json doc = json::parse(read_file(path));
        std::vector<Timestamp> entries;
        for (const auto& e : doc.at("entries")) {
            if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::MalformedRow, "entry must be [frame, phase]");
            entries.push_back({e.at(0).get<std::size_t>(), e.at(1).get<Phase>()});
        }
        return TimestampSet(std::move(entries), doc.at("num_phases").get<int>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRow, path.string() + ": " + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        throw with_file(e, path);
    }
}

void write_timestamps(const TimestampSet& timestamps, const fs::path& path) {
    json doc;
    doc["num_phases"] = timestamps.num_phases();
    doc["entries"] = json::array();
    for (const auto& e : timestamps.entries()) doc["entries"].push_back({e.frame, e.phase});
    write_file(path, doc.dump() + "\n");
}

std::string model_to_json(const FewShotModel& model) {
    const auto& g = model.gaussians;
    json doc;
    doc["num_phases"] = g.num_phases();
    doc["dim"] = g.dim();
    doc["alpha"] = model.alpha;
    doc["epsilon"] = model.shrinkage.absolute;
    doc["relative_shrinkage"] = model.shrinkage.relative;
    doc["phases"] = json::array();
    for (const auto& p : g.phases()) {
        json phase;
        phase["count"] = p.count;
        phase["epsilon"] = p.epsilon;
        phase["mean"] = std::vector<double>(p.mean.data(), p.mean.data() + p.mean.size());
        json cov = json::array();
        for (Eigen::Index i = 0; i < p.covariance.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(p.covariance.cols()));
            for (Eigen::Index j = 0; j < p.covariance.cols(); ++j) row[static_cast<std::size_t>(j)] = p.covariance(i, j);
            cov.push_back(row);
        }
        phase["cov"] = std::move(cov);
        doc["phases"].push_back(std::move(phase));
    }
    json bins = json::array();
    for (std::size_t i = 0; i < model.histogram.n_x(); ++i) {
        const auto row = model.histogram.bins().row(i);
        bins.push_back(std::vector<double>(row.begin(), row.end()));
    }
    doc["histogram"] = {{"n_x", model.histogram.n_x()}, {"bins", std::move(bins)}};
    return doc.dump(1) + "\n";
}

FewShotModel model_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        const int S = doc.at("num_phases").get<int>();
        const auto M = doc.at("dim").get<std::size_t>();
        const auto& phases_doc = doc.at("phases");
        if (S < 1 || phases_doc.size() != static_cast<std::size_t>(S)) {
            throw Error(ErrorCode::DimensionMismatch, "phase list does not match num_phases");
        }
        const auto Mi = static_cast<Eigen::Index>(M);
        std::vector<PhaseGaussian> phases;
        for (const auto& pd : phases_doc) {
            PhaseGaussian p;
            p.count = pd.at("count").get<std::size_t>();
            p.epsilon = pd.at("epsilon").get<double>();
            const auto mean = pd.at("mean").get<std::vector<double>>();
            const auto cov = pd.at("cov").get<std::vector<std::vector<double>>>();
            if (mean.size() != M || cov.size() != M) throw Error(ErrorCode::DimensionMismatch, "phase dimension");
            p.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), Mi);
            p.covariance.resize(Mi, Mi);
            for (std::size_t i = 0; i < M; ++i) {
                if (cov[i].size() != M) throw Error(ErrorCode::DimensionMismatch, "covariance row length");
                for (std::size_t j = 0; j < M; ++j) {
                    p.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cov[i][j];
                }
            }
            phases.push_back(std::move(p));
        }
        const auto& hist = doc.at("histogram");
        const auto n_x = hist.at("n_x").get<std::size_t>();
        const auto rows = hist.at("bins").get<std::vector<std::vector<double>>>();
        if (rows.size() != n_x || n_x == 0) throw Error(ErrorCode::DimensionMismatch, "histogram bin count");
        std::vector<double> flat;
        for (const auto& r : rows) {
            if (r.size() != static_cast<std::size_t>(S)) throw Error(ErrorCode::DimensionMismatch, "histogram row");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        FewShotModel model{GaussianPhaseModel(std::move(phases)),
                           TemporalHistogram(Matrix(n_x, static_cast<std::size_t>(S), std::move(flat))),
                           doc.at("alpha").get<double>(),
                           Shrinkage{doc.value("relative_shrinkage", 1e-3), doc.at("epsilon").get<double>()}};
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRow, std::string("model JSON: ") + e.what());
    }
}

FewShotModel read_model(const fs::path& path) {
    try {
        return model_from_json(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        throw with_file(e, path);
    }
}

void write_model(const FewShotModel& model, const fs::path& path) { write_file(path, model_to_json(model)); }

std::string report_to_json(const EvalReport& report) {
    const auto f1_object = [&](const std::vector<double>& values) {
        json obj = json::object();
        for (std::size_t k = 0; k < report.thresholds.size(); ++k) obj[threshold_key(report.thresholds[k])] = values[k];
        return obj;
    };
    json doc;
    doc["accuracy"] = report.accuracy;
    doc["f1"] = f1_object(report.f1);
    doc["per_video"] = json::array();
    for (const auto& v : report.per_video) {
        doc["per_video"].push_back({{"id", v.id}, {"accuracy", v.accuracy}, {"f1", f1_object(v.f1)}});
    }
    return doc.dump(1) + "\n";
}

void write_report(const EvalReport& report, const fs::path& path) { write_file(path, report_to_json(report)); }

std::vector<DatasetEntry> list_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error(ErrorCode::Io, root.string() + " is not a directory");
    constexpr std::string_view kFeatures = ".features";
    constexpr std::string_view kLabels = ".labels.csv";
    std::map<std::string, DatasetEntry> pairs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        const auto ends_with = [&](std::string_view suffix) {
            return name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
        };
        if (ends_with(kFeatures)) {
            auto& e = pairs[name.substr(0, name.size() - kFeatures.size())];
            e.features = entry.path();
        } else if (ends_with(kLabels)) {
            auto& e = pairs[name.substr(0, name.size() - kLabels.size())];
            e.labels = entry.path();
        }
    }
    std::vector<DatasetEntry> out;
    for (auto& [id, e] : pairs) {
        if (e.features.empty()) throw Error(ErrorCode::InvalidArgument, e.labels.string() + " has no feature file");
        if (e.labels.empty()) throw Error(ErrorCode::InvalidArgument, e.features.string() + " has no label file");
        e.id = id;
        out.push_back(std::move(e));
    }
    return out;
}

Dataset load_dataset(const fs::path& root, std::optional<int> num_phases) {
    const auto entries = list_dataset(root);
    if (entries.empty()) throw Error(ErrorCode::EmptyDataset, root.string() + " has no feature/label pairs");
    std::vector<FeatureSequence> features;
    std::vector<LabelSequence> labels;
    int inferred = 1;
    for (const auto& e : entries) {
        features.push_back(read_features(e.features));
        labels.push_back(read_labels(e.labels, num_phases));
        if (labels.back().size() != features.back().frames()) {
            throw Error(ErrorCode::LengthMismatch, e.labels.string() + " has " + std::to_string(labels.back().size()) +
                                                       " rows but " + e.features.string() + " has " +
                                                       std::to_string(features.back().frames()) + " frames");
        }
        inferred = std::max(inferred, labels.back().num_phases());
    }
    Dataset ds;
    ds.num_phases = num_phases.value_or(inferred);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        ds.ids.push_back(entries[i].id);
        ds.videos.push_back({std::move(features[i]), LabelSequence(labels[i].labels(), ds.num_phases)});
    }
    return ds;
}

}  // namespace phaserw::io
