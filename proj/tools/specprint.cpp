// Command-line front end: corpus analysis, two-corpus comparison, fixture
// synthesis, and plot re-rendering.
//
// Exit codes: 0 success, 1 internal error, 2 invalid input or config.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "specprint/specprint.hpp"

namespace {

using specprint::RunConfig;
using json = nlohmann::json;

void apply_config_file(RunConfig& cfg, const std::string& path) {
    const auto bytes = specprint::read_file_bytes(path);
    json j;
    try {
        j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw specprint::contract_error(std::string("invalid config file: ") + e.what());
    }
    cfg.input = j.value("input", cfg.input);
    cfg.reference = j.value("reference", cfg.reference);
    cfg.output = j.value("output", cfg.output);
    cfg.crop = j.value("crop", cfg.crop);
    if (j.contains("denoiser")) {
        const auto& d = j.at("denoiser");
        if (d.contains("kind"))
            cfg.denoiser.kind = specprint::denoiser_kind_from_string(d.at("kind").get<std::string>());
        cfg.denoiser.strength = d.value("strength", cfg.denoiser.strength);
        cfg.denoiser.window = d.value("window", cfg.denoiser.window);
    }
    cfg.summary_from_residual = j.value("summary_from_residual", cfg.summary_from_residual);
    if (j.contains("profile_source"))
        cfg.profile_source =
            specprint::profile_source_from_string(j.at("profile_source").get<std::string>());
    if (j.contains("channels"))
        cfg.channels = j.at("channels").get<std::string>() == "per-channel"
                           ? specprint::ChannelMode::per_channel
                           : specprint::ChannelMode::luminance;
    cfg.remove_mean = j.value("remove_mean", cfg.remove_mean);
    cfg.max_images = j.value("max_images", cfg.max_images);
    cfg.min_usable = j.value("min_usable", cfg.min_usable);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("detector")) {
        const auto& d = j.at("detector");
        cfg.detector.upsampling_threshold =
            d.value("upsampling_threshold", cfg.detector.upsampling_threshold);
        cfg.detector.peak_neighborhood = d.value("peak_neighborhood", cfg.detector.peak_neighborhood);
        cfg.detector.peak_min_prominence =
            d.value("peak_min_prominence", cfg.detector.peak_min_prominence);
        if (d.contains("candidates"))
            cfg.detector.candidates = d.at("candidates").get<std::vector<int>>();
    }
    cfg.plots = j.value("plots", cfg.plots);
    cfg.reference_alpha = j.value("reference_alpha", cfg.reference_alpha);
    cfg.synth_maxval = j.value("synth_maxval", cfg.synth_maxval);
}

// Raw flag values; only those the user actually passed override the
// config file.
struct Flags {
    std::string config, input, reference, output, spec;
    int crop = 0;
    std::string denoiser, profiles_on;
    double strength = 0.0;
    int window = 0;
    std::size_t max_images = 0;
    int threads = 0;
    bool no_plots = false;
    double upsampling_threshold = 0.0;
    double min_prominence = 0.0;
    int maxval = 0;
};

void add_common_options(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config file (flags override it)");
    sub->add_option("--input", f.input, "corpus directory (.pgm/.ppm/.pnm)");
    sub->add_option("--output", f.output, "output directory");
    sub->add_option("--crop", f.crop, "central crop size (default 256)");
    sub->add_option("--denoiser", f.denoiser, "gaussian|median|bilateral-lite");
    sub->add_option("--strength", f.strength, "denoiser strength (sigma)");
    sub->add_option("--window", f.window, "median window (odd)");
    sub->add_option("--profiles-on", f.profiles_on, "profile source: raw|residual");
    sub->add_option("--max-images", f.max_images, "cap on corpus size (default 1000)");
    sub->add_option("--threads", f.threads, "worker threads (0 = hardware)");
    sub->add_flag("--no-plots", f.no_plots, "skip SVG emission");
    sub->add_option("--upsampling-threshold", f.upsampling_threshold,
                    "lattice score needed to infer a factor");
    sub->add_option("--min-prominence", f.min_prominence, "peak prominence ratio");
}

void merge_flags(RunConfig& cfg, const CLI::App* sub, const Flags& f) {
    if (sub->count("--input")) cfg.input = f.input;
    if (sub->count("--output")) cfg.output = f.output;
    if (sub->count("--crop")) cfg.crop = f.crop;
    if (sub->count("--denoiser"))
        cfg.denoiser.kind = specprint::denoiser_kind_from_string(f.denoiser);
    if (sub->count("--strength")) cfg.denoiser.strength = f.strength;
    if (sub->count("--window")) cfg.denoiser.window = f.window;
    if (sub->count("--profiles-on"))
        cfg.profile_source = specprint::profile_source_from_string(f.profiles_on);
    if (sub->count("--max-images")) cfg.max_images = f.max_images;
    if (sub->count("--threads")) cfg.threads = f.threads;
    if (f.no_plots) cfg.plots = false;
    if (sub->count("--upsampling-threshold"))
        cfg.detector.upsampling_threshold = f.upsampling_threshold;
    if (sub->count("--min-prominence")) cfg.detector.peak_min_prominence = f.min_prominence;
}

int run(int argc, char** argv) {
    CLI::App app{"corpus-scale spectral forensics toolkit"};
    app.require_subcommand(1);
    Flags f;

    CLI::App* analyze = app.add_subcommand("analyze", "summarize one corpus");
    add_common_options(analyze, f);

    CLI::App* compare = app.add_subcommand("compare", "subject corpus vs reference corpus");
    add_common_options(compare, f);
    compare->add_option("--reference", f.reference, "reference corpus directory");

    CLI::App* synth = app.add_subcommand("synth", "generate a fixture corpus");
    synth->add_option("--config", f.config, "JSON config file (flags override it)");
    synth->add_option("--spec", f.spec, "fixture spec JSON")->required();
    synth->add_option("--output", f.output, "corpus directory to create");
    synth->add_option("--threads", f.threads, "worker threads");
    synth->add_option("--maxval", f.maxval, "PGM maxval (default 65535)");

    CLI::App* rerender = app.add_subcommand("report", "re-render plots from report.json");
    rerender->add_option("--input", f.input, "directory holding report.json")->required();

    CLI11_PARSE(app, argc, argv);

    RunConfig cfg;
    if (!f.config.empty()) apply_config_file(cfg, f.config);

    if (analyze->parsed()) {
        merge_flags(cfg, analyze, f);
        if (cfg.input.empty()) throw specprint::contract_error("--input is required");
        if (cfg.output.empty()) throw specprint::contract_error("--output is required");
        specprint::Report report = specprint::analyze_run(cfg);
        std::printf("analyzed %zu images -> %s\n", report.summary.image_count, cfg.output.c_str());
        std::printf("inferred upsampling factor: %s\n",
                    report.peak_report.inferred_factor
                        ? std::to_string(*report.peak_report.inferred_factor).c_str()
                        : "none");
        std::printf("jpeg grid score: %s\n",
                    specprint::format_double_short(report.grid_score.score).c_str());
        return 0;
    }
    if (compare->parsed()) {
        merge_flags(cfg, compare, f);
        if (compare->count("--reference")) cfg.reference = f.reference;
        if (cfg.input.empty()) throw specprint::contract_error("--input is required");
        if (cfg.reference.empty()) throw specprint::contract_error("--reference is required");
        if (cfg.output.empty()) throw specprint::contract_error("--output is required");
        specprint::Report report = specprint::compare_run(cfg);
        std::printf("compared %s vs %s -> %s\n", cfg.input.c_str(), cfg.reference.c_str(),
                    cfg.output.c_str());
        std::size_t defined = 0;
        for (bool d : report.fisher->defined) defined += d ? 1 : 0;
        std::printf("fisher profile: %zu of %zu bins defined\n", defined,
                    report.fisher->defined.size());
        return 0;
    }
    if (synth->parsed()) {
        if (synth->count("--output")) cfg.output = f.output;
        if (synth->count("--threads")) cfg.threads = f.threads;
        if (synth->count("--maxval")) cfg.synth_maxval = f.maxval;
        if (cfg.output.empty()) throw specprint::contract_error("--output is required");
        const auto bytes = specprint::read_file_bytes(f.spec);
        specprint::FixtureSpec spec;
        try {
            spec = specprint::fixture_spec_from_json(json::parse(bytes.begin(), bytes.end()));
        } catch (const json::exception& e) {
            throw specprint::contract_error(std::string("invalid fixture spec: ") + e.what());
        }
        specprint::synth_run(spec, cfg.output, cfg.synth_maxval, cfg.threads);
        std::printf("synthesized %d images -> %s\n", spec.count, cfg.output.c_str());
        return 0;
    }
    if (rerender->parsed()) {
        specprint::render_run(f.input);
        std::printf("re-rendered plots in %s\n", f.input.c_str());
        return 0;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const specprint::contract_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const specprint::format_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const specprint::geometry_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const specprint::io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}
