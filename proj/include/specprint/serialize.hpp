#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specprint/common.hpp"
#include "specprint/corpus.hpp"
#include "specprint/fft.hpp"
#include "specprint/profiles.hpp"
#include "specprint/synth.hpp"

namespace specprint {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Raw grid sidecars: row-major little-endian IEEE-754 doubles.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_f64_le(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
}

inline double get_f64_le(const std::uint8_t* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

} // namespace detail

inline void write_grid_f64(const std::string& path, const RealGrid& grid) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(grid.size() * 8);
    for (double v : grid.values) detail::put_f64_le(bytes, v);
    write_file_bytes(path, bytes);
}

inline RealGrid read_grid_f64(const std::string& path, int width, int height) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    const std::size_t expected = static_cast<std::size_t>(width) * height * 8;
    if (bytes.size() != expected)
        throw format_error("grid file " + path + " has " + std::to_string(bytes.size()) +
                               " bytes, expected " + std::to_string(expected),
                           bytes.size());
    RealGrid grid(width, height);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid.values[i] = detail::get_f64_le(bytes.data() + i * 8);
    return grid;
}

// ---------------------------------------------------------------------------
// Text formatting. All numeric text goes through these helpers so output
// is locale-independent and identical across runs.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_double_short(double v, int digits = 6) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

inline void write_grid_csv(const std::string& path, const RealGrid& grid) {
    std::ostringstream os;
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            if (c) os << ',';
            os << format_double(grid.at(r, c));
        }
        os << '\n';
    }
    const std::string s = os.str();
    write_file_bytes(path, std::vector<std::uint8_t>(s.begin(), s.end()));
}

// One row per bin: center, mean, variance, population.
inline void write_profile_csv(const std::string& path, const ProfileStats& stats) {
    std::ostringstream os;
    os << "center,mean,variance,population\n";
    for (std::size_t b = 0; b < stats.centers.size(); ++b) {
        os << format_double(stats.centers[b]) << ',' << format_double(stats.mean[b]) << ','
           << format_double(stats.variance[b]) << ',' << stats.population[b] << '\n';
    }
    const std::string s = os.str();
    write_file_bytes(path, std::vector<std::uint8_t>(s.begin(), s.end()));
}

// ---------------------------------------------------------------------------
// Spectral summary persistence: JSON envelope plus two f64 sidecars and
// CSV exports for interchange.
// ---------------------------------------------------------------------------

struct SummaryFiles {
    std::string json_path;
    std::string power_f64;
    std::string autocorr_f64;
};

inline SummaryFiles summary_file_names(const std::string& dir, const std::string& stem = "summary") {
    return {dir + "/" + stem + ".json", dir + "/" + stem + "_power.f64",
            dir + "/" + stem + "_autocorr.f64"};
}

inline void save_summary(const std::string& dir, const SpectralSummary& summary,
                         const std::string& stem = "summary", bool with_csv = true) {
    const SummaryFiles files = summary_file_names(dir, stem);
    json env;
    env["width"] = summary.avg_power.width;
    env["height"] = summary.avg_power.height;
    env["norm_constant"] = summary.norm_constant;
    env["image_count"] = summary.image_count;
    env["config"] = {{"crop_size", summary.crop_size},
                     {"residual", summary.residual_desc},
                     {"remove_mean", summary.remove_mean},
                     {"channels", summary.channel_mode}};
    env["grids"] = {{"avg_power", stem + "_power.f64"}, {"avg_autocorr", stem + "_autocorr.f64"}};
    const std::string text = env.dump(2) + "\n";
    write_file_bytes(files.json_path, std::vector<std::uint8_t>(text.begin(), text.end()));
    write_grid_f64(files.power_f64, summary.avg_power);
    write_grid_f64(files.autocorr_f64, summary.avg_autocorr);
    if (with_csv) {
        write_grid_csv(dir + "/" + stem + "_power.csv", summary.avg_power);
        write_grid_csv(dir + "/" + stem + "_autocorr.csv", summary.avg_autocorr);
    }
}

inline SpectralSummary load_summary(const std::string& dir, const std::string& stem = "summary") {
    const SummaryFiles files = summary_file_names(dir, stem);
    const std::vector<std::uint8_t> bytes = read_file_bytes(files.json_path);
    const json env = json::parse(bytes.begin(), bytes.end());
    SpectralSummary out;
    const int w = env.at("width").get<int>();
    const int h = env.at("height").get<int>();
    out.avg_power = read_grid_f64(dir + "/" + env.at("grids").at("avg_power").get<std::string>(), w, h);
    out.avg_autocorr =
        read_grid_f64(dir + "/" + env.at("grids").at("avg_autocorr").get<std::string>(), w, h);
    out.norm_constant = env.at("norm_constant").get<double>();
    out.image_count = env.at("image_count").get<std::size_t>();
    const auto& cfg = env.at("config");
    out.crop_size = cfg.at("crop_size").get<int>();
    out.residual_desc = cfg.at("residual").get<std::string>();
    out.remove_mean = cfg.at("remove_mean").get<bool>();
    out.channel_mode = cfg.at("channels").get<std::string>();
    return out;
}

// ---------------------------------------------------------------------------
// FixtureSpec JSON (synth input files and corpus manifests).
// ---------------------------------------------------------------------------

inline json to_json(const PostOp& op) {
    json j;
    j["kind"] = to_string(op.kind);
    switch (op.kind) {
        case PostOpKind::blur: j["sigma"] = op.value; break;
        case PostOpKind::sharpen: j["amount"] = op.value; break;
        case PostOpKind::resize: j["scale"] = op.value; break;
        case PostOpKind::jpeg: j["quality"] = static_cast<int>(op.value); break;
    }
    return j;
}

inline PostOp post_op_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "blur") return PostOp::blur(j.at("sigma").get<double>());
    if (kind == "sharpen") return PostOp::sharpen(j.at("amount").get<double>());
    if (kind == "resize") return PostOp::resize(j.at("scale").get<double>());
    if (kind == "jpeg") return PostOp::jpeg(j.at("quality").get<int>());
    throw contract_error("unknown post op kind '" + kind + "'");
}

inline json to_json(const FixtureSpec& spec) {
    json j;
    j["size"] = spec.size;
    j["count"] = spec.count;
    j["alpha"] = spec.alpha;
    j["master_seed"] = spec.master_seed;
    if (spec.artifact) {
        j["artifact"] = {{"period", spec.artifact->period},
                         {"amplitude", spec.artifact->amplitude},
                         {"pattern_seed", spec.artifact->pattern_seed}};
    } else {
        j["artifact"] = nullptr;
    }
    j["chain"] = json::array();
    for (const auto& op : spec.chain) j["chain"].push_back(to_json(op));
    j["rng"] = "xoshiro256++ / splitmix64; image seed = mix64(master ^ mix64(index))";
    return j;
}

inline FixtureSpec fixture_spec_from_json(const json& j) {
    FixtureSpec spec;
    try {
        spec.size = j.at("size").get<int>();
        spec.count = j.at("count").get<int>();
        spec.alpha = j.value("alpha", 0.0);
        spec.master_seed = j.value("master_seed", std::uint64_t{0});
        if (j.contains("artifact") && !j.at("artifact").is_null()) {
            const auto& a = j.at("artifact");
            ArtifactSpec art;
            art.period = a.at("period").get<int>();
            art.amplitude = a.at("amplitude").get<double>();
            art.pattern_seed = a.value("pattern_seed", std::uint64_t{1});
            spec.artifact = art;
        }
        if (j.contains("chain"))
            for (const auto& opj : j.at("chain")) spec.chain.push_back(post_op_from_json(opj));
    } catch (const json::exception& e) {
        throw contract_error(std::string("invalid fixture spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

} // namespace specprint
