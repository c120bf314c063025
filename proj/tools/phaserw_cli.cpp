// phaserw: weakly supervised phase segmentation from the command line.
//
//   phaserw fit DATASET --out model.json
//   phaserw segment --features v.features --timestamps v.timestamps.json --out v.pred.csv
//   phaserw segment --input-dir DIR --model model.json --out-dir PRED
//   phaserw segment --grid VALDIR --mode timestamps --k 1
//   phaserw eval --pred-dir PRED --gt-dir DIR --overlap 10,25,50 --out report.json
//   phaserw synth --out DIR --seed 3 --timestamps-k 1
//   phaserw plot --pred v.pred.csv --gt v.labels.csv --out ribbon.svg
//
// Exit codes: 0 success, 2 data error, 64 usage error.
// PHASERW_THREADS sets the worker count for segmentation.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "phaserw/core.hpp"
#include "phaserw/graph.hpp"
#include "phaserw/io.hpp"
#include "phaserw/metrics.hpp"
#include "phaserw/prior_fewshot.hpp"
#include "phaserw/prior_timestamp.hpp"
#include "phaserw/solver.hpp"
#include "phaserw/synth.hpp"

namespace fs = std::filesystem;
using namespace phaserw;

namespace {

constexpr int kExitData = 2;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

unsigned thread_count() {
    const char* env = std::getenv("PHASERW_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024) throw UsageError("PHASERW_THREADS must be an integer in [1, 1024]");
    return static_cast<unsigned>(n);
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    fs::path dataset;
    fs::path out = "model.json";
    double alpha = 0.5;
    double epsilon = 0.0;
    double relative = 1e-3;
    int num_phases = 0;
};

int cmd_fit(const FitArgs& a) {
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    if (!(a.epsilon >= 0.0) || !(a.relative >= 0.0)) throw UsageError("shrinkage must be nonnegative");

    const auto ds = io::load_dataset(a.dataset, a.num_phases > 0 ? std::optional<int>(a.num_phases) : std::nullopt);
    const auto model = fit_fewshot(ds.videos, ds.num_phases, a.alpha, {a.relative, a.epsilon});
    io::write_model(model, a.out);

    std::cout << "fitted " << ds.num_phases << " phases on " << ds.videos.size() << " videos (N_x = "
              << model.histogram.n_x() << ")\n";
    for (const auto& p : model.gaussians.phases()) {
        std::cout << "  phase " << (&p - model.gaussians.phases().data()) << ": " << p.count << " frames\n";
    }
    std::cout << "wrote " << a.out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- segment

struct SegmentArgs {
    fs::path features;
    fs::path input_dir;
    fs::path out;
    fs::path out_dir;
    fs::path timestamps;
    fs::path model;
    fs::path grid;
    std::string mode;
    std::string convention = "cosine";
    double beta = 5.0;
    double gamma = 1e-3;
    std::optional<double> alpha;
    std::size_t k = 1;
    std::uint64_t seed = 0;
    bool probs = false;
};

enum class Mode { Timestamps, Fewshot };

Mode resolve_mode(const SegmentArgs& a) {
    const bool has_ts = !a.timestamps.empty();
    const bool has_model = !a.model.empty();
    if (has_ts && has_model) throw UsageError("--timestamps and --model are mutually exclusive");
    if (a.mode.empty()) {
        if (has_model) return Mode::Fewshot;
        if (has_ts || !a.input_dir.empty() || !a.grid.empty()) return Mode::Timestamps;
        throw UsageError("give --mode, --timestamps or --model");
    }
    if (a.mode == "timestamps") {
        if (has_model) throw UsageError("--mode timestamps does not take --model");
        return Mode::Timestamps;
    }
    if (a.mode == "fewshot") {
        if (has_ts) throw UsageError("--mode fewshot does not take --timestamps");
        if (!has_model) throw UsageError("--mode fewshot needs --model");
        return Mode::Fewshot;
    }
    throw UsageError("--mode must be 'timestamps' or 'fewshot'");
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first failure in
// index order is rethrown, so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < std::min<std::size_t>(threads, n); ++w) pool.emplace_back(work);
        work();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

PriorMatrix prior_for(Mode mode, const FeatureSequence& f, const TimestampSet* ts, const FewShotModel* model) {
    if (mode == Mode::Timestamps) return timestamp_prior(*ts, f.frames(), ts->num_phases());
    return fewshot_prior(*model, f);
}

int run_grid(const SegmentArgs& a, Mode mode, WeightConvention convention, unsigned threads) {
    if (a.k == 0) throw UsageError("--k must be positive");
    const auto ds = io::load_dataset(a.grid);
    std::optional<FewShotModel> model;
    if (mode == Mode::Fewshot) model = io::read_model(a.model);

    std::vector<TimestampSet> stamps;
    if (mode == Mode::Timestamps) {
        for (std::size_t i = 0; i < ds.videos.size(); ++i) {
            stamps.push_back(sample_timestamps(ds.videos[i].labels, a.k, a.seed + i).timestamps);
        }
    }

    const std::vector<double> betas{1.0, 2.0, 5.0, 10.0};
    const std::vector<double> gammas{1e-4, 1e-3, 1e-2};
    std::vector<double> alphas{0.4, 0.5, 0.6};
    if (mode == Mode::Timestamps) alphas = {0.5};

    struct Row {
        double beta, gamma, alpha, accuracy, f1_10;
    };
    std::vector<Row> rows;
    for (double alpha : alphas) {
        std::vector<PriorMatrix> priors;
        if (model) model->alpha = alpha;
        for (std::size_t i = 0; i < ds.videos.size(); ++i) {
            priors.push_back(prior_for(mode, ds.videos[i].features, stamps.empty() ? nullptr : &stamps[i],
                                       model ? &*model : nullptr));
        }
        for (double beta : betas) {
            for (double gamma : gammas) {
                std::vector<LabelSequence> preds(ds.videos.size(), LabelSequence({0}, 1));
                parallel_for(ds.videos.size(), threads, [&](std::size_t i) {
                    preds[i] = segment_video(ds.videos[i].features, priors[i], {beta, gamma, convention, 1}).labels;
                });
                std::vector<LabelSequence> gts;
                for (const auto& v : ds.videos) gts.push_back(v.labels);
                const auto report = evaluate(preds, gts, {0.1});
                rows.push_back({beta, gamma, alpha, report.accuracy, report.f1[0]});
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].accuracy > rows[best].accuracy) best = r;
    }
    nlohmann::json doc;
    doc["mode"] = mode == Mode::Timestamps ? "timestamps" : "fewshot";
    doc["weight_convention"] = std::string(to_string(convention));
    doc["results"] = nlohmann::json::array();
    std::cout << "beta    gamma   alpha  accuracy  F1@10\n";
    for (const auto& r : rows) {
        std::cout << fmt("%-7g ", r.beta) << fmt("%-7g ", r.gamma) << fmt("%-6g ", r.alpha)
                  << fmt("%-9.4f ", r.accuracy) << fmt("%.2f\n", r.f1_10);
        doc["results"].push_back(
            {{"beta", r.beta}, {"gamma", r.gamma}, {"alpha", r.alpha}, {"accuracy", r.accuracy}, {"f1_10", r.f1_10}});
    }
    const auto& b = rows[best];
    doc["best"] = {{"beta", b.beta}, {"gamma", b.gamma}, {"alpha", b.alpha}, {"accuracy", b.accuracy}};
    std::cout << "best: beta=" << b.beta << " gamma=" << b.gamma;
    if (mode == Mode::Fewshot) std::cout << " alpha=" << b.alpha;
    std::cout << fmt(" accuracy=%.4f\n", b.accuracy);
    if (!a.out.empty()) io::write_file(a.out, doc.dump(1) + "\n");
    return 0;
}

int cmd_segment(const SegmentArgs& a) {
    const Mode mode = resolve_mode(a);
    WeightConvention convention;
    try {
        convention = parse_weight_convention(a.convention);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    if (!(a.beta > 0.0)) throw UsageError("--beta must be positive");
    if (!(a.gamma > 0.0)) throw UsageError("--gamma must be positive");
    if (a.alpha && !(*a.alpha > 0.0 && *a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    const unsigned threads = thread_count();

    if (!a.grid.empty()) {
        if (!a.features.empty() || !a.input_dir.empty()) throw UsageError("--grid does not take --features/--input-dir");
        return run_grid(a, mode, convention, threads);
    }

    std::optional<FewShotModel> model;
    if (mode == Mode::Fewshot) {
        model = io::read_model(a.model);
        if (a.alpha) model->alpha = *a.alpha;
    }
    const SegmentOptions options{a.beta, a.gamma, convention, 1};

    if (!a.features.empty()) {
        if (!a.input_dir.empty()) throw UsageError("--features and --input-dir are mutually exclusive");
        if (a.out.empty()) throw UsageError("--out is required with --features");
        if (mode == Mode::Timestamps && a.timestamps.empty()) throw UsageError("timestamps mode needs --timestamps");
        const auto f = io::read_features(a.features);
        std::optional<TimestampSet> ts;
        if (mode == Mode::Timestamps) ts = io::read_timestamps(a.timestamps);
        auto opts = options;
        opts.threads = threads;
        const auto seg = segment_video(f, prior_for(mode, f, ts ? &*ts : nullptr, model ? &*model : nullptr), opts);
        io::write_predictions(seg.labels, a.probs ? &seg.probabilities : nullptr, a.out);
        return 0;
    }

    if (a.input_dir.empty()) throw UsageError("give --features, --input-dir or --grid");
    if (a.out_dir.empty()) throw UsageError("--out-dir is required with --input-dir");
    if (!a.timestamps.empty()) throw UsageError("batch timestamps mode reads <id>.timestamps.json from --input-dir");
    if (!fs::is_directory(a.input_dir)) throw Error(ErrorCode::Io, a.input_dir.string() + " is not a directory");

    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(a.input_dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && entry.path().extension() == ".features") {
            ids.push_back(name.substr(0, name.size() - 9));
        }
    }
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) throw Error(ErrorCode::EmptyDataset, a.input_dir.string() + " has no .features files");
    fs::create_directories(a.out_dir);

    parallel_for(ids.size(), threads, [&](std::size_t i) {
        const auto f = io::read_features(a.input_dir / (ids[i] + ".features"));
        std::optional<TimestampSet> ts;
        if (mode == Mode::Timestamps) ts = io::read_timestamps(a.input_dir / (ids[i] + ".timestamps.json"));
        const auto seg = segment_video(f, prior_for(mode, f, ts ? &*ts : nullptr, model ? &*model : nullptr), options);
        io::write_predictions(seg.labels, a.probs ? &seg.probabilities : nullptr, a.out_dir / (ids[i] + ".pred.csv"));
    });
    std::cout << "segmented " << ids.size() << " videos into " << a.out_dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::vector<fs::path> preds;
    std::vector<fs::path> gts;
    fs::path pred_dir;
    fs::path gt_dir;
    std::vector<double> overlap{10, 25, 50};
    fs::path out;
};

int cmd_eval(const EvalArgs& a) {
    std::vector<fs::path> pred_files = a.preds, gt_files = a.gts;
    std::vector<std::string> ids;
    if (!a.pred_dir.empty() || !a.gt_dir.empty()) {
        if (a.pred_dir.empty() || a.gt_dir.empty()) throw UsageError("--pred-dir and --gt-dir go together");
        if (!pred_files.empty() || !gt_files.empty()) throw UsageError("use either files or directories");
        if (!fs::is_directory(a.pred_dir)) throw Error(ErrorCode::Io, a.pred_dir.string() + " is not a directory");
        constexpr std::string_view suffix = ".pred.csv";
        for (const auto& entry : fs::directory_iterator(a.pred_dir)) {
            const auto name = entry.path().filename().string();
            if (name.size() > suffix.size() && name.ends_with(suffix)) ids.push_back(name.substr(0, name.size() - 9));
        }
        std::sort(ids.begin(), ids.end());
        for (const auto& id : ids) {
            pred_files.push_back(a.pred_dir / (id + ".pred.csv"));
            gt_files.push_back(a.gt_dir / (id + ".labels.csv"));
            if (!fs::exists(gt_files.back())) {
                throw Error(ErrorCode::Io, gt_files.back().string() + " not found for " + pred_files.back().string());
            }
        }
    } else {
        if (pred_files.size() != gt_files.size()) throw UsageError("--pred and --gt must be given the same number of times");
        for (const auto& p : pred_files) ids.push_back(p.filename().string());
    }
    if (pred_files.empty()) throw Error(ErrorCode::EmptyEvaluation, "nothing to evaluate");

    std::vector<double> thresholds;
    for (double pct : a.overlap) {
        if (!(pct > 0.0 && pct <= 100.0)) throw UsageError("--overlap values are percentages in (0, 100]");
        thresholds.push_back(pct / 100.0);
    }

    std::vector<LabelSequence> preds, gts;
    int S = 1;
    for (std::size_t i = 0; i < pred_files.size(); ++i) {
        preds.push_back(io::read_labels(pred_files[i]));
        gts.push_back(io::read_labels(gt_files[i]));
        S = std::max({S, preds.back().num_phases(), gts.back().num_phases()});
        if (preds.back().size() != gts.back().size()) {
            throw Error(ErrorCode::LengthMismatch, pred_files[i].string() + " has " +
                                                       std::to_string(preds.back().size()) + " frames but " +
                                                       gt_files[i].string() + " has " +
                                                       std::to_string(gts.back().size()));
        }
    }
    for (auto& p : preds) p = LabelSequence(p.labels(), S);
    for (auto& g : gts) g = LabelSequence(g.labels(), S);

    const auto report = evaluate(preds, gts, thresholds, ids);
    std::cout << "videos   " << preds.size() << "\n" << fmt("accuracy %.4f\n", report.accuracy);
    for (std::size_t k = 0; k < report.thresholds.size(); ++k) {
        std::cout << "F1@" << threshold_key(report.thresholds[k]) << fmt("    %.2f\n", report.f1[k]);
    }
    if (!a.out.empty()) io::write_report(report, a.out);
    return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    fs::path config;
    fs::path out;
    synth::SynthConfig cfg;
    std::size_t first_video = 0;
    std::size_t timestamps_k = 0;
};

void load_synth_config(const fs::path& path, synth::SynthConfig& cfg) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(io::read_file(path));
        const auto get = [&](const char* key, auto& field) {
            if (doc.contains(key)) doc.at(key).get_to(field);
        };
        get("num_phases", cfg.num_phases);
        get("dim", cfg.dim);
        get("num_videos", cfg.num_videos);
        get("t_min", cfg.t_min);
        get("t_max", cfg.t_max);
        get("separation", cfg.separation);
        get("duration_sigma", cfg.duration_sigma);
        get("noise", cfg.noise);
        get("seed", cfg.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRow, path.string() + ": " + e.what());
    }
}

int cmd_synth(SynthArgs a, const CLI::App& sub) {
    if (!a.config.empty()) {
        // Flags given explicitly override the file.
        const auto flags = a.cfg;
        load_synth_config(a.config, a.cfg);
        if (sub.count("--num-phases")) a.cfg.num_phases = flags.num_phases;
        if (sub.count("--dim")) a.cfg.dim = flags.dim;
        if (sub.count("--videos")) a.cfg.num_videos = flags.num_videos;
        if (sub.count("--t-min")) a.cfg.t_min = flags.t_min;
        if (sub.count("--t-max")) a.cfg.t_max = flags.t_max;
        if (sub.count("--separation")) a.cfg.separation = flags.separation;
        if (sub.count("--duration-sigma")) a.cfg.duration_sigma = flags.duration_sigma;
        if (sub.count("--noise")) a.cfg.noise = flags.noise;
        if (sub.count("--seed")) a.cfg.seed = flags.seed;
    }
    try {
        a.cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    fs::create_directories(a.out);
    const auto videos = synth::generate_dataset(a.cfg, a.first_video);
    for (std::size_t i = 0; i < videos.size(); ++i) {
        const auto id = synth::video_id(a.first_video + i);
        io::write_features(videos[i].features, a.out / (id + ".features"));
        io::write_labels(videos[i].labels, a.out / (id + ".labels.csv"));
        if (a.timestamps_k > 0) {
            const auto sample = sample_timestamps(videos[i].labels, a.timestamps_k, a.cfg.seed * 1000003 + a.first_video + i);
            io::write_timestamps(sample.timestamps, a.out / (id + ".timestamps.json"));
        }
    }
    std::cout << "wrote " << videos.size() << " videos to " << a.out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- plot

struct PlotArgs {
    fs::path pred;
    fs::path gt;
    fs::path out;
};

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

int cmd_plot(const PlotArgs& a) {
    const auto ext = a.out.extension().string();
    if (ext != ".svg" && ext != ".csv") throw UsageError("--out must end in .svg or .csv");
    const auto pred = io::read_labels(a.pred);
    const auto gt = io::read_labels(a.gt);
    if (pred.size() != gt.size()) {
        throw Error(ErrorCode::LengthMismatch, a.pred.string() + " and " + a.gt.string() + " differ in length");
    }
    const std::size_t T = gt.size();
    const std::pair<const char*, const LabelSequence*> rows[] = {{"gt", &gt}, {"pred", &pred}};

    std::ostringstream out;
    if (ext == ".csv") {
        out << "row,frame,phase\n";
        for (const auto& [name, seq] : rows) {
            for (std::size_t t = 0; t < T; ++t) out << name << ',' << t << ',' << (*seq)[t] << '\n';
        }
    } else {
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"100\" viewBox=\"0 0 " << T
            << " 2\" preserveAspectRatio=\"none\" shape-rendering=\"crispEdges\">\n";
        for (std::size_t r = 0; r < 2; ++r) {
            out << "<g class=\"" << rows[r].first << "\">\n";
            for (std::size_t t = 0; t < T; ++t) {
                const auto phase = static_cast<std::size_t>((*rows[r].second)[t]);
                out << "<rect x=\"" << t << "\" y=\"" << r << "\" width=\"1\" height=\"1\" fill=\""
                    << kPalette[phase % std::size(kPalette)] << "\"/>\n";
            }
            out << "</g>\n";
        }
        out << "</svg>\n";
    }
    io::write_file(a.out, out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weakly supervised phase segmentation with random walks on a frame chain"};
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit few-shot priors on a labeled dataset directory");
    fit_cmd->add_option("dataset", fit.dataset, "Directory of <id>.features / <id>.labels.csv pairs")->required();
    fit_cmd->add_option("--out,-o", fit.out, "Model JSON to write")->capture_default_str();
    fit_cmd->add_option("--alpha", fit.alpha, "Temporal mask threshold in (0, 1)")->capture_default_str();
    fit_cmd->add_option("--epsilon", fit.epsilon, "Absolute covariance shrinkage")->capture_default_str();
    fit_cmd->add_option("--relative-shrinkage", fit.relative, "Shrinkage as a fraction of mean variance")
        ->capture_default_str();
    fit_cmd->add_option("--num-phases", fit.num_phases, "Phase count (default: inferred from labels)");

    SegmentArgs seg;
    auto* seg_cmd = app.add_subcommand("segment", "Segment videos from timestamps or a few-shot model");
    seg_cmd->add_option("--features", seg.features, "Feature file of one video");
    seg_cmd->add_option("--input-dir", seg.input_dir, "Directory of <id>.features (and <id>.timestamps.json)");
    seg_cmd->add_option("--mode", seg.mode, "timestamps or fewshot");
    auto* ts_opt = seg_cmd->add_option("--timestamps", seg.timestamps, "Timestamp JSON");
    auto* model_opt = seg_cmd->add_option("--model", seg.model, "Model JSON from 'fit'");
    ts_opt->excludes(model_opt);
    seg_cmd->add_option("--beta", seg.beta, "Edge weight scale")->capture_default_str();
    seg_cmd->add_option("--gamma", seg.gamma, "Prior strength")->capture_default_str();
    seg_cmd->add_option("--alpha", seg.alpha, "Override the model's temporal mask threshold");
    seg_cmd->add_option("--weight-convention", seg.convention, "cosine or distance")->capture_default_str();
    seg_cmd->add_option("--out,-o", seg.out, "Prediction CSV (single video) or grid JSON");
    seg_cmd->add_option("--out-dir", seg.out_dir, "Prediction directory (batch)");
    seg_cmd->add_flag("--probs", seg.probs, "Append per-phase probabilities");
    seg_cmd->add_option("--grid", seg.grid, "Validation directory; sweep beta, gamma, alpha and report the best");
    seg_cmd->add_option("--k", seg.k, "Timestamps per phase sampled for --grid")->capture_default_str();
    seg_cmd->add_option("--seed", seg.seed, "Timestamp sampling seed for --grid")->capture_default_str();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Frame accuracy and segmental F1");
    eval_cmd->add_option("--pred", ev.preds, "Prediction CSV (repeatable)");
    eval_cmd->add_option("--gt", ev.gts, "Ground-truth CSV (repeatable, same order as --pred)");
    eval_cmd->add_option("--pred-dir", ev.pred_dir, "Directory of <id>.pred.csv");
    eval_cmd->add_option("--gt-dir", ev.gt_dir, "Directory of <id>.labels.csv");
    eval_cmd->add_option("--overlap", ev.overlap, "IoU thresholds in percent")->delimiter(',')->capture_default_str();
    eval_cmd->add_option("--out,-o", ev.out, "Report JSON");

    SynthArgs sy;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
    synth_cmd->add_option("--out,-o", sy.out, "Output directory")->required();
    synth_cmd->add_option("--config", sy.config, "JSON with any of the fields below");
    synth_cmd->add_option("--num-phases", sy.cfg.num_phases)->capture_default_str();
    synth_cmd->add_option("--dim", sy.cfg.dim)->capture_default_str();
    synth_cmd->add_option("--videos", sy.cfg.num_videos)->capture_default_str();
    synth_cmd->add_option("--t-min", sy.cfg.t_min)->capture_default_str();
    synth_cmd->add_option("--t-max", sy.cfg.t_max)->capture_default_str();
    synth_cmd->add_option("--separation", sy.cfg.separation, "Mean separation in noise units")->capture_default_str();
    synth_cmd->add_option("--duration-sigma", sy.cfg.duration_sigma)->capture_default_str();
    synth_cmd->add_option("--noise", sy.cfg.noise)->capture_default_str();
    synth_cmd->add_option("--seed", sy.cfg.seed)->capture_default_str();
    synth_cmd->add_option("--first-video", sy.first_video, "Index of the first video")->capture_default_str();
    synth_cmd->add_option("--timestamps-k", sy.timestamps_k, "Also write K sampled timestamps per phase");

    PlotArgs pl;
    auto* plot_cmd = app.add_subcommand("plot", "Two-row phase ribbon, ground truth above prediction");
    plot_cmd->add_option("--pred", pl.pred)->required();
    plot_cmd->add_option("--gt", pl.gt)->required();
    plot_cmd->add_option("--out,-o", pl.out, "ribbon.svg or ribbon.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : kExitUsage;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit);
        if (*seg_cmd) return cmd_segment(seg);
        if (*eval_cmd) return cmd_eval(ev);
        if (*synth_cmd) return cmd_synth(sy, *synth_cmd);
        if (*plot_cmd) return cmd_plot(pl);
    } catch (const UsageError& e) {
        std::cerr << "phaserw: usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "phaserw: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "phaserw: io: " << e.what() << "\n";
        return kExitData;
    } catch (const std::logic_error& e) {
        std::cerr << "phaserw: internal error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
