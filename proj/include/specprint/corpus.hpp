#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specprint/common.hpp"
#include "specprint/denoise.hpp"
#include "specprint/fft.hpp"
#include "specprint/image.hpp"
#include "specprint/parallel.hpp"
#include "specprint/pnm.hpp"

namespace specprint {

enum class ChannelMode { luminance, per_channel };

inline std::string to_string(ChannelMode m) {
    return m == ChannelMode::luminance ? "luminance" : "per-channel";
}

struct CorpusOptions {
    int crop_size = 256;
    std::optional<DenoiserSpec> residual;  // nullopt: raw pixels feed the summary
    bool remove_mean = true;               // subtract the image mean before autocorrelation
    ChannelMode channels = ChannelMode::luminance;
    std::size_t max_images = 1000;
    std::size_t min_usable = 1;
    int threads = 0;                        // 0: hardware concurrency

    // Images are summed in fixed blocks of this many items, and the block
    // partials are combined in a fixed pairwise tree. The value changes
    // rounding, so it is part of the reproducibility contract; it must not
    // be derived from the thread count.
    std::size_t reduce_block = 16;
};

// Corpus-averaged second-order statistics. avg_power is the mean |DFT|^2
// grid and avg_autocorr its exact transform pair; both are divided by
// norm_constant (the mean bin of the averaged power spectrum), so
// mean(avg_power) == 1 after construction.
struct SpectralSummary {
    RealGrid avg_power;
    RealGrid avg_autocorr;
    double norm_constant = 0.0;
    std::size_t image_count = 0;

    // config echo
    int crop_size = 0;
    std::string residual_desc = "none";
    bool remove_mean = true;
    std::string channel_mode = "luminance";
};

struct FileError {
    std::size_t index = 0; // corpus item index
    std::string path;      // file path or synthetic item name
    std::string message;
};

// Yields the i-th corpus image, already reduced to a single channel and
// croppable to the target size. Throwing marks the item unusable.
using ImageProvider = std::function<ImageF(std::size_t)>;

namespace detail {

struct SummaryPartial {
    RealGrid power;
    RealGrid autocorr;
    std::size_t count = 0;

    void init(int w, int h) {
        power = RealGrid(w, h, 0.0);
        autocorr = RealGrid(w, h, 0.0);
    }
    bool empty() const { return power.values.empty(); }
};

inline void combine_partials(SummaryPartial& into, const SummaryPartial& from) {
    if (from.empty()) return;
    if (into.empty()) {
        into = from;
        return;
    }
    for (std::size_t i = 0; i < into.power.size(); ++i) into.power.values[i] += from.power.values[i];
    for (std::size_t i = 0; i < into.autocorr.size(); ++i)
        into.autocorr.values[i] += from.autocorr.values[i];
    into.count += from.count;
}

// Per-image kernel: one forward transform for the power spectrum and one
// inverse for the autocorrelation, sharing the |X|^2 grid so the two
// outputs stay an exact transform pair.
inline void accumulate_image(const ImageF& prepared, bool remove_mean, SummaryPartial& acc) {
    ImageF x = prepared;
    if (remove_mean) {
        const double m = image_mean(x);
        for (double& v : x.samples) v -= m;
    }
    ComplexGrid spec = dft2(x);
    for (auto& v : spec.values) v = cplx(std::norm(v), 0.0);
    ComplexGrid back = idft2(spec);
    if (acc.empty()) acc.init(prepared.width, prepared.height);
    const double inv_mn = 1.0 / static_cast<double>(prepared.size());
    for (std::size_t i = 0; i < acc.power.size(); ++i) {
        acc.power.values[i] += spec.values[i].real();
        acc.autocorr.values[i] += back.values[i].real() * inv_mn;
    }
    acc.count += 1;
}

inline ImageF prepare_image(const ImageF& raw, const CorpusOptions& opt) {
    ImageF img = center_crop(raw, opt.crop_size);
    if (opt.residual) return extract_residual(img, *opt.residual).residual;
    return img;
}

} // namespace detail

// Average the per-image power spectra and autocorrelations of a corpus
// (Wiener-Khinchin pair), then normalize both grids to the average power
// per pixel. Failed items are collected in `errors` and skipped; the call
// throws only when fewer than min_usable images survive.
inline SpectralSummary corpus_summary(std::size_t count, const ImageProvider& provider,
                                      const CorpusOptions& opt,
                                      std::vector<FileError>* errors = nullptr) {
    if (count == 0) throw contract_error("corpus is empty");
    const std::size_t n = std::min(count, opt.max_images);
    const std::size_t block = std::max<std::size_t>(1, opt.reduce_block);
    const std::size_t num_blocks = (n + block - 1) / block;

    std::vector<detail::SummaryPartial> partials(num_blocks);
    std::vector<FileError> local_errors;
    std::mutex error_mutex;

    parallel_for(num_blocks, opt.threads, [&](std::size_t b) {
        const std::size_t lo = b * block;
        const std::size_t hi = std::min(n, lo + block);
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                ImageF prepared = detail::prepare_image(provider(i), opt);
                detail::accumulate_image(prepared, opt.remove_mean, partials[b]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                local_errors.push_back({i, "item " + std::to_string(i), e.what()});
            }
        }
    });

    tree_reduce_in_place(partials, [](detail::SummaryPartial& a, const detail::SummaryPartial& b) {
        detail::combine_partials(a, b);
    });
    detail::SummaryPartial& total = partials.front();
    std::sort(local_errors.begin(), local_errors.end(),
              [](const FileError& a, const FileError& b) { return a.index < b.index; });
    if (errors) *errors = std::move(local_errors);
    if (total.count < std::max<std::size_t>(1, opt.min_usable))
        throw contract_error("only " + std::to_string(total.count) +
                             " usable images, need " + std::to_string(opt.min_usable));

    SpectralSummary out;
    const double inv_count = 1.0 / static_cast<double>(total.count);
    out.avg_power = std::move(total.power);
    out.avg_autocorr = std::move(total.autocorr);
    for (double& v : out.avg_power.values) v *= inv_count;
    for (double& v : out.avg_autocorr.values) v *= inv_count;

    double mean_power = 0.0;
    for (double v : out.avg_power.values) mean_power += v;
    mean_power /= static_cast<double>(out.avg_power.size());
    out.norm_constant = mean_power;
    if (mean_power > 0.0) {
        const double inv = 1.0 / mean_power;
        for (double& v : out.avg_power.values) v *= inv;
        for (double& v : out.avg_autocorr.values) v *= inv;
    }

    out.image_count = total.count;
    out.crop_size = opt.crop_size;
    out.residual_desc = opt.residual
                            ? to_string(opt.residual->kind) + "(" + std::to_string(opt.residual->strength) + ")"
                            : "none";
    out.remove_mean = opt.remove_mean;
    out.channel_mode = to_string(opt.channels);
    return out;
}

inline SpectralSummary corpus_summary(const std::vector<ImageF>& images, const CorpusOptions& opt) {
    return corpus_summary(images.size(), [&](std::size_t i) { return images[i]; }, opt);
}

// One single-channel corpus item per file in luminance mode; one item per
// channel plane in per-channel mode (grayscale files repeat their plane,
// so the two modes agree on grayscale corpora).
struct CorpusItems {
    std::vector<std::string> names;
    ImageProvider provider;
    std::size_t count() const { return names.size(); }
};

inline CorpusItems make_file_items(const std::vector<std::string>& paths, ChannelMode mode) {
    CorpusItems items;
    const int fan_out = mode == ChannelMode::luminance ? 1 : 3;
    for (const auto& path : paths)
        for (int ch = 0; ch < fan_out; ++ch)
            items.names.push_back(fan_out == 1 ? path : path + "#" + std::to_string(ch));
    auto paths_copy = paths;
    items.provider = [paths_copy, mode, fan_out](std::size_t i) {
        const std::string& path = paths_copy[i / static_cast<std::size_t>(fan_out)];
        if (mode == ChannelMode::luminance) return load_luminance(path);
        ParsedImage parsed = load_pnm(path);
        if (std::holds_alternative<ImageF>(parsed)) return std::get<ImageF>(std::move(parsed));
        return extract_channel(std::get<ImageRGB>(parsed), static_cast<int>(i % 3));
    };
    return items;
}

inline void relabel_errors(std::vector<FileError>& errors, const std::vector<std::string>& names) {
    for (auto& e : errors)
        if (e.index < names.size()) e.path = names[e.index];
}

inline SpectralSummary corpus_summary_from_paths(const std::vector<std::string>& paths,
                                                 const CorpusOptions& opt,
                                                 std::vector<FileError>* errors = nullptr) {
    CorpusItems items = make_file_items(paths, opt.channels);
    SpectralSummary summary = corpus_summary(items.count(), items.provider, opt, errors);
    if (errors) relabel_errors(*errors, items.names);
    return summary;
}

// Central odd-sized crop of the autocorrelation with zero lag at the
// center bin: lags -s..+s on both axes, s = (size-1)/2.
inline RealGrid autocorr_crop(const SpectralSummary& summary, int size) {
    if (size < 1 || size % 2 == 0) throw contract_error("autocorr crop size must be odd and >= 1");
    const RealGrid& R = summary.avg_autocorr;
    if (size > R.width || size > R.height)
        throw geometry_error("autocorr crop exceeds grid size");
    RealGrid shifted = fftshift(R);
    const int cr = R.height / 2;
    const int cc = R.width / 2;
    const int half = size / 2;
    RealGrid out(size, size);
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
            out.at(r, c) = shifted.at(cr - half + r, cc - half + c);
    return out;
}

} // namespace specprint
