#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "specprint/common.hpp"

namespace specprint {

// Single-channel raster, row-major, nominal value range [0,1].
struct ImageF {
    int width = 0;
    int height = 0;
    std::vector<double> samples; // size width*height

    ImageF() = default;
    ImageF(int w, int h, double fill = 0.0)
        : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw geometry_error("image dimensions must be >= 1");
    }

    double& at(int row, int col) { return samples[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return samples[static_cast<std::size_t>(row) * width + col]; }
    std::size_t size() const { return samples.size(); }
};

// Three-plane color raster (R, G, B), each plane row-major in [0,1].
struct ImageRGB {
    int width = 0;
    int height = 0;
    std::vector<double> r, g, b;

    ImageRGB() = default;
    ImageRGB(int w, int h)
        : width(w), height(h),
          r(static_cast<std::size_t>(w) * h, 0.0),
          g(static_cast<std::size_t>(w) * h, 0.0),
          b(static_cast<std::size_t>(w) * h, 0.0) {
        if (w < 1 || h < 1) throw geometry_error("image dimensions must be >= 1");
    }

    std::size_t size() const { return r.size(); }
};

inline double image_mean(const ImageF& img) {
    double s = 0.0;
    for (double v : img.samples) s += v;
    return s / static_cast<double>(img.size());
}

// Population standard deviation (divisor n).
inline double image_std(const ImageF& img) {
    const double m = image_mean(img);
    double s = 0.0;
    for (double v : img.samples) {
        const double d = v - m;
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(img.size()));
}

// ITU-R BT.601 luma weights; the weights sum to 1 so the output is a
// pixelwise convex combination of the channels.
inline ImageF to_luminance(const ImageRGB& img) {
    ImageF out(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i)
        out.samples[i] = 0.299 * img.r[i] + 0.587 * img.g[i] + 0.114 * img.b[i];
    return out;
}

// Centered square crop; ties broken toward the top-left:
// offset = floor((dim - size)/2).
inline ImageF center_crop(const ImageF& img, int size) {
    if (size < 1) throw geometry_error("crop size must be >= 1");
    if (size > img.width || size > img.height)
        throw geometry_error("crop size " + std::to_string(size) + " exceeds image " +
                             std::to_string(img.width) + "x" + std::to_string(img.height));
    const int row0 = (img.height - size) / 2;
    const int col0 = (img.width - size) / 2;
    ImageF out(size, size);
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
            out.at(r, c) = img.at(row0 + r, col0 + c);
    return out;
}

inline ImageF extract_channel(const ImageRGB& img, int channel) {
    ImageF out(img.width, img.height);
    const std::vector<double>& plane = channel == 0 ? img.r : channel == 1 ? img.g : img.b;
    out.samples = plane;
    return out;
}

} // namespace specprint
