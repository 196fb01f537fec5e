#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "specprint/common.hpp"
#include "specprint/corpus.hpp"
#include "specprint/detect.hpp"
#include "specprint/profiles.hpp"
#include "specprint/serialize.hpp"
#include "specprint/svg.hpp"
#include "specprint/synth.hpp"

namespace specprint {

inline constexpr int kReportSchemaVersion = 1;

enum class ProfileSource { raw, residual };

inline std::string to_string(ProfileSource s) {
    return s == ProfileSource::raw ? "raw" : "residual";
}

inline ProfileSource profile_source_from_string(const std::string& s) {
    if (s == "raw") return ProfileSource::raw;
    if (s == "residual") return ProfileSource::residual;
    throw contract_error("profile source must be 'raw' or 'residual'");
}

struct DetectorConfig {
    double upsampling_threshold = 2.0;
    int peak_neighborhood = 5;
    double peak_min_prominence = 8.0;
    std::vector<int> candidates = {2, 4, 8, 16};
};

// Fully resolved run configuration; echoed verbatim into the report for
// provenance. Thread count must never change any output bit.
struct RunConfig {
    std::string input;
    std::string reference; // compare only
    std::string output;
    std::string spec_file; // synth only

    int crop = 256;
    DenoiserSpec denoiser;                                 // gaussian strength 1 default
    bool summary_from_residual = true;                     // summary grids use noise residuals
    ProfileSource profile_source = ProfileSource::raw;     // profiles default to raw pixels
    ChannelMode channels = ChannelMode::luminance;
    bool remove_mean = true;
    std::size_t max_images = 1000;
    std::size_t min_usable = 1;
    int threads = 0;
    DetectorConfig detector;
    bool plots = true;
    double reference_alpha = 2.0; // slope guide drawn on the radial plot
    int synth_maxval = 65535;
};

inline json to_json(const RunConfig& cfg, const std::string& subcommand) {
    json j;
    j["subcommand"] = subcommand;
    j["input"] = cfg.input;
    j["reference"] = cfg.reference;
    j["output"] = cfg.output;
    j["spec_file"] = cfg.spec_file;
    j["crop"] = cfg.crop;
    j["denoiser"] = {{"kind", to_string(cfg.denoiser.kind)},
                     {"strength", cfg.denoiser.strength},
                     {"window", cfg.denoiser.window}};
    j["summary_from_residual"] = cfg.summary_from_residual;
    j["profile_source"] = to_string(cfg.profile_source);
    j["channels"] = to_string(cfg.channels);
    j["remove_mean"] = cfg.remove_mean;
    j["max_images"] = cfg.max_images;
    j["min_usable"] = cfg.min_usable;
    j["threads"] = cfg.threads;
    j["detector"] = {{"upsampling_threshold", cfg.detector.upsampling_threshold},
                     {"peak_neighborhood", cfg.detector.peak_neighborhood},
                     {"peak_min_prominence", cfg.detector.peak_min_prominence},
                     {"candidates", cfg.detector.candidates}};
    j["plots"] = cfg.plots;
    j["reference_alpha"] = cfg.reference_alpha;
    j["synth_maxval"] = cfg.synth_maxval;
    return j;
}

struct Report {
    int schema_version = kReportSchemaVersion;
    json config;
    SpectralSummary summary;
    ProfileSet profiles;
    std::optional<FisherProfile> fisher;
    PeakReport peak_report;
    GridScore grid_score;
    std::optional<PowerLawFit> power_law;
    std::string power_law_error;
    std::vector<FileError> errors;
    double elapsed_seconds = 0.0;
    int threads_used = 0;
};

// ---------------------------------------------------------------------------
// Report <-> JSON. NaN serializes as null, so undefined variances and
// Fisher bins survive the round trip explicitly.
// ---------------------------------------------------------------------------

namespace detail {

inline json nanable(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

inline double from_nanable(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline json profile_stats_to_json(const ProfileStats& s) {
    json j;
    j["centers"] = s.centers;
    j["mean"] = json::array();
    j["variance"] = json::array();
    for (double v : s.mean) j["mean"].push_back(nanable(v));
    for (double v : s.variance) j["variance"].push_back(nanable(v));
    j["population"] = s.population;
    j["image_count"] = s.image_count;
    return j;
}

inline ProfileStats profile_stats_from_json(const json& j) {
    ProfileStats s;
    s.centers = j.at("centers").get<std::vector<double>>();
    for (const auto& v : j.at("mean")) s.mean.push_back(from_nanable(v));
    for (const auto& v : j.at("variance")) s.variance.push_back(from_nanable(v));
    s.population = j.at("population").get<std::vector<std::size_t>>();
    s.image_count = j.at("image_count").get<std::size_t>();
    return s;
}

} // namespace detail

inline json report_to_json(const Report& report) {
    json j;
    j["schema_version"] = report.schema_version;
    j["config"] = report.config;

    j["summary"] = {{"width", report.summary.avg_power.width},
                    {"height", report.summary.avg_power.height},
                    {"norm_constant", report.summary.norm_constant},
                    {"image_count", report.summary.image_count},
                    {"residual", report.summary.residual_desc},
                    {"grids",
                     {{"avg_power", "summary_power.f64"},
                      {"avg_autocorr", "summary_autocorr.f64"}}}};

    j["radial_magnitude"] = detail::profile_stats_to_json(report.profiles.radial_magnitude.stats);
    j["radial_power"] = detail::profile_stats_to_json(report.profiles.radial_power.stats);
    j["angular"] = detail::profile_stats_to_json(report.profiles.angular.stats);

    if (report.fisher) {
        json f;
        f["centers"] = report.fisher->centers;
        f["values"] = json::array();
        for (std::size_t b = 0; b < report.fisher->values.size(); ++b)
            f["values"].push_back(report.fisher->defined[b] ? json(report.fisher->values[b])
                                                            : json(nullptr));
        f["subject"] = report.fisher->subject_id;
        f["reference"] = report.fisher->reference_id;
        j["fisher"] = f;
    } else {
        j["fisher"] = nullptr;
    }

    json peaks = json::array();
    for (const auto& p : report.peak_report.peaks)
        peaks.push_back({{"f_u", p.f_u},
                         {"f_v", p.f_v},
                         {"k", p.k},
                         {"l", p.l},
                         {"value", p.value},
                         {"prominence", p.prominence}});
    json scores = json::object();
    for (const auto& [factor, score] : report.peak_report.candidate_scores)
        scores[std::to_string(factor)] = score;
    j["peak_report"] = {{"peaks", peaks},
                        {"candidate_scores", scores},
                        {"inferred_factor", report.peak_report.inferred_factor
                                                 ? json(*report.peak_report.inferred_factor)
                                                 : json(nullptr)},
                        {"threshold", report.peak_report.threshold},
                        {"neighborhood", report.peak_report.neighborhood},
                        {"min_prominence", report.peak_report.min_prominence}};

    j["grid_score"] = {{"score", report.grid_score.score},
                       {"period", report.grid_score.period},
                       {"horizontal", report.grid_score.horizontal},
                       {"vertical", report.grid_score.vertical}};

    if (report.power_law) {
        j["power_law_fit"] = {{"alpha", report.power_law->alpha},
                              {"intercept", report.power_law->intercept},
                              {"rmse", report.power_law->rmse},
                              {"mode", "power"},
                              {"rho_min", 0.2},
                              {"rho_max", 0.5}};
    } else {
        j["power_law_fit"] = {{"error", report.power_law_error}};
    }

    json errs = json::array();
    for (const auto& e : report.errors)
        errs.push_back({{"index", e.index}, {"path", e.path}, {"message", e.message}});
    j["file_errors"] = errs;

    // Everything above is a pure function of config and corpus content;
    // wall-clock facts live only in this block.
    j["timing"] = {{"elapsed_seconds", report.elapsed_seconds},
                   {"threads_used", report.threads_used}};
    return j;
}

// ---------------------------------------------------------------------------
// Runs.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> list_corpus_files(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw contract_error("input is not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm")
            paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw contract_error("no .pgm/.ppm/.pnm files in " + dir);
    return paths;
}

inline CorpusOptions summary_options(const RunConfig& cfg) {
    CorpusOptions opt;
    opt.crop_size = cfg.crop;
    if (cfg.summary_from_residual) opt.residual = cfg.denoiser;
    opt.remove_mean = cfg.remove_mean;
    opt.channels = cfg.channels;
    opt.max_images = cfg.max_images;
    opt.min_usable = cfg.min_usable;
    opt.threads = cfg.threads;
    return opt;
}

inline CorpusOptions profile_options(const RunConfig& cfg) {
    CorpusOptions opt = summary_options(cfg);
    opt.residual.reset();
    if (cfg.profile_source == ProfileSource::residual) opt.residual = cfg.denoiser;
    return opt;
}

inline void render_plots(const Report& report, const std::string& out_dir,
                         double reference_alpha) {
    save_text_file(out_dir + "/power_spectrum.svg",
                   svg_heatmap(fftshift(report.summary.avg_power), HeatmapScale::log10,
                               "avg power spectrum (log10, DC centered)"));
    int crop = std::min(report.summary.avg_autocorr.width, report.summary.avg_autocorr.height);
    if (crop % 2 == 0) --crop;
    crop = std::min(65, crop);
    save_text_file(out_dir + "/autocorr.svg",
                   svg_heatmap(autocorr_crop(report.summary, crop), HeatmapScale::linear_signed,
                               "avg autocorrelation (central crop)"));
    save_text_file(out_dir + "/radial.svg",
                   svg_radial_loglog(report.profiles.radial_power,
                                     report.power_law ? &*report.power_law : nullptr,
                                     reference_alpha, "radial spectrum (power)"));
    save_text_file(out_dir + "/angular.svg",
                   svg_angular_lines(report.profiles.angular, "angular spectrum"));
    if (report.fisher)
        save_text_file(out_dir + "/fisher.svg", svg_fisher_polar(*report.fisher, "fisher profile"));
}

inline void write_report_files(const Report& report, const RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output);
    const std::string text = report_to_json(report).dump(2) + "\n";
    write_file_bytes(cfg.output + "/report.json", std::vector<std::uint8_t>(text.begin(), text.end()));
    save_summary(cfg.output, report.summary);
    write_profile_csv(cfg.output + "/radial_magnitude.csv", report.profiles.radial_magnitude.stats);
    write_profile_csv(cfg.output + "/radial_power.csv", report.profiles.radial_power.stats);
    write_profile_csv(cfg.output + "/angular.csv", report.profiles.angular.stats);
    if (cfg.plots) render_plots(report, cfg.output, cfg.reference_alpha);
}

} // namespace detail

// Full single-corpus analysis: summary grids, profiles, detectors, power
// law fit, report and plots under cfg.output.
inline Report analyze_run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    Report report;
    report.config = to_json(cfg, "analyze");

    const std::vector<std::string> paths = detail::list_corpus_files(cfg.input);
    CorpusItems items = make_file_items(paths, cfg.channels);

    report.summary = corpus_summary(items.count(), items.provider, detail::summary_options(cfg),
                                    &report.errors);
    relabel_errors(report.errors, items.names);

    std::vector<FileError> profile_errors;
    report.profiles =
        corpus_profiles(items.count(), items.provider, detail::profile_options(cfg), &profile_errors);
    relabel_errors(profile_errors, items.names);
    for (auto& e : profile_errors) {
        e.message = "profiles: " + e.message;
        report.errors.push_back(std::move(e));
    }

    report.peak_report =
        infer_upsampling(report.summary, cfg.detector.candidates, cfg.detector.upsampling_threshold,
                         cfg.detector.peak_neighborhood, cfg.detector.peak_min_prominence);
    report.grid_score = jpeg_grid_score(report.summary);
    try {
        report.power_law = fit_power_law(report.profiles.radial_power, 0.2, 0.5);
    } catch (const std::exception& e) {
        report.power_law_error = e.what();
    }

    report.threads_used = resolve_threads(cfg.threads);
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.output.empty()) detail::write_report_files(report, cfg);
    return report;
}

// Analysis of the subject corpus plus the Fisher profile of its angular
// spectrum against the reference corpus.
inline Report compare_run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig subject_cfg = cfg;
    subject_cfg.output.clear(); // files written once, below
    Report report = analyze_run(subject_cfg);
    report.config = to_json(cfg, "compare");

    const std::vector<std::string> ref_paths = detail::list_corpus_files(cfg.reference);
    CorpusItems ref_items = make_file_items(ref_paths, cfg.channels);
    std::vector<FileError> ref_errors;
    AngularProfile reference = corpus_angular(ref_items.count(), ref_items.provider,
                                              detail::profile_options(cfg), &ref_errors);

    FisherProfile fisher = fisher_profile(report.profiles.angular, reference);
    fisher.subject_id = cfg.input;
    fisher.reference_id = cfg.reference;
    report.fisher = std::move(fisher);

    report.threads_used = resolve_threads(cfg.threads);
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.output.empty()) detail::write_report_files(report, cfg);
    return report;
}

// Deterministic fixture corpus: PGM files plus a manifest echoing the
// spec. Rerunning with the same spec reproduces every byte.
inline void synth_run(const FixtureSpec& spec, const std::string& out_dir, int maxval = 65535,
                      int threads = 0) {
    spec.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    parallel_for(static_cast<std::size_t>(spec.count), threads, [&](std::size_t i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%05zu.pgm", i);
        save_pnm(out_dir + "/" + name, make_fixture_image(spec, i), maxval);
    });
    json manifest = to_json(spec);
    manifest["maxval"] = maxval;
    const std::string text = manifest.dump(2) + "\n";
    write_file_bytes(out_dir + "/manifest.json", std::vector<std::uint8_t>(text.begin(), text.end()));
}

// Re-render plots from an existing report directory (report.json plus the
// summary sidecars).
inline void render_run(const std::string& report_dir) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(report_dir + "/report.json");
    json j;
    try {
        j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw format_error(std::string("invalid report.json: ") + e.what(), 0);
    }
    Report report;
    report.summary = load_summary(report_dir);
    report.profiles.radial_magnitude.mode = SpectralMode::magnitude;
    report.profiles.radial_magnitude.stats =
        detail::profile_stats_from_json(j.at("radial_magnitude"));
    report.profiles.radial_power.mode = SpectralMode::power;
    report.profiles.radial_power.stats = detail::profile_stats_from_json(j.at("radial_power"));
    report.profiles.angular.stats = detail::profile_stats_from_json(j.at("angular"));
    if (j.contains("fisher") && !j.at("fisher").is_null()) {
        FisherProfile f;
        f.centers = j.at("fisher").at("centers").get<std::vector<double>>();
        for (const auto& v : j.at("fisher").at("values")) {
            f.values.push_back(detail::from_nanable(v));
            f.defined.push_back(!v.is_null());
        }
        f.subject_id = j.at("fisher").value("subject", "");
        f.reference_id = j.at("fisher").value("reference", "");
        report.fisher = std::move(f);
    }
    if (j.contains("power_law_fit") && j.at("power_law_fit").contains("alpha")) {
        PowerLawFit fit;
        fit.alpha = j.at("power_law_fit").at("alpha").get<double>();
        fit.intercept = j.at("power_law_fit").at("intercept").get<double>();
        fit.rmse = j.at("power_law_fit").at("rmse").get<double>();
        report.power_law = fit;
    }
    const double ref_alpha = j.at("config").value("reference_alpha", 2.0);
    detail::render_plots(report, report_dir, ref_alpha);
}

} // namespace specprint
