#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "specprint/common.hpp"
#include "specprint/image.hpp"

namespace specprint {

enum class DenoiserKind { gaussian, median, bilateral_lite };

inline std::string to_string(DenoiserKind k) {
    switch (k) {
        case DenoiserKind::gaussian: return "gaussian";
        case DenoiserKind::median: return "median";
        case DenoiserKind::bilateral_lite: return "bilateral-lite";
    }
    return "?";
}

inline DenoiserKind denoiser_kind_from_string(const std::string& s) {
    if (s == "gaussian") return DenoiserKind::gaussian;
    if (s == "median") return DenoiserKind::median;
    if (s == "bilateral-lite" || s == "bilateral_lite") return DenoiserKind::bilateral_lite;
    throw contract_error("unknown denoiser kind '" + s + "'");
}

struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::gaussian;
    double strength = 1.0; // sigma-equivalent, > 0
    int window = 3;        // odd, >= 3; used by the median filter

    void validate() const {
        if (strength <= 0.0) throw contract_error("denoiser strength must be > 0");
        if (window < 3 || window % 2 == 0) throw contract_error("denoiser window must be odd and >= 3");
    }
};

namespace detail {

// Mirror (reflect-101 style without repeating the edge sample twice:
// -1 -> 1, n -> n-2) keeps boundary statistics close to the interior.
inline int mirror_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

inline ImageF convolve_separable(const ImageF& img, const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    ImageF tmp(img.width, img.height);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[static_cast<std::size_t>(t + radius)] *
                       img.at(r, mirror_index(c + t, img.width));
            tmp.at(r, c) = acc;
        }
    }
    ImageF out(img.width, img.height);
    for (int c = 0; c < img.width; ++c) {
        for (int r = 0; r < img.height; ++r) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[static_cast<std::size_t>(t + radius)] *
                       tmp.at(mirror_index(r + t, img.height), c);
            out.at(r, c) = acc;
        }
    }
    return out;
}

} // namespace detail

inline ImageF gaussian_blur(const ImageF& img, double sigma) {
    if (sigma <= 0.0) throw contract_error("blur sigma must be > 0");
    return detail::convolve_separable(img, detail::gaussian_kernel(sigma));
}

inline ImageF median_filter(const ImageF& img, int window) {
    if (window < 3 || window % 2 == 0) throw contract_error("median window must be odd and >= 3");
    const int radius = window / 2;
    ImageF out(img.width, img.height);
    std::vector<double> buf(static_cast<std::size_t>(window) * window);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            std::size_t n = 0;
            for (int dr = -radius; dr <= radius; ++dr)
                for (int dc = -radius; dc <= radius; ++dc)
                    buf[n++] = img.at(detail::mirror_index(r + dr, img.height),
                                      detail::mirror_index(c + dc, img.width));
            auto mid = buf.begin() + static_cast<std::ptrdiff_t>(n / 2);
            std::nth_element(buf.begin(), mid, buf.begin() + static_cast<std::ptrdiff_t>(n));
            out.at(r, c) = *mid;
        }
    }
    return out;
}

// Simplified bilateral filter: gaussian spatial weights of std `strength`
// combined with a gaussian range weight of fixed std 0.1 in sample units.
inline ImageF bilateral_lite(const ImageF& img, double strength) {
    if (strength <= 0.0) throw contract_error("bilateral strength must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * strength));
    const double range_sigma = 0.1;
    const double inv_2ss = 0.5 / (strength * strength);
    const double inv_2rr = 0.5 / (range_sigma * range_sigma);
    ImageF out(img.width, img.height);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const double center = img.at(r, c);
            double acc = 0.0, wsum = 0.0;
            for (int dr = -radius; dr <= radius; ++dr) {
                for (int dc = -radius; dc <= radius; ++dc) {
                    const double v = img.at(detail::mirror_index(r + dr, img.height),
                                            detail::mirror_index(c + dc, img.width));
                    const double dv = v - center;
                    const double w = std::exp(-(dr * dr + dc * dc) * inv_2ss - dv * dv * inv_2rr);
                    acc += w * v;
                    wsum += w;
                }
            }
            out.at(r, c) = acc / wsum;
        }
    }
    return out;
}

inline ImageF denoise(const ImageF& img, const DenoiserSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case DenoiserKind::gaussian: return gaussian_blur(img, spec.strength);
        case DenoiserKind::median: return median_filter(img, spec.window);
        case DenoiserKind::bilateral_lite: return bilateral_lite(img, spec.strength);
    }
    throw contract_error("unhandled denoiser kind");
}

struct ResidualResult {
    ImageF residual;
    double mean = 0.0;
};

// High-frequency residual r = x - denoise(x). The subtraction defines the
// residual, so x reconstructs bitwise as denoise(x) + r.
inline ResidualResult extract_residual(const ImageF& img, const DenoiserSpec& spec) {
    ImageF den = denoise(img, spec);
    ResidualResult out{ImageF(img.width, img.height), 0.0};
    for (std::size_t i = 0; i < img.size(); ++i)
        out.residual.samples[i] = img.samples[i] - den.samples[i];
    out.mean = image_mean(out.residual);
    return out;
}

} // namespace specprint
