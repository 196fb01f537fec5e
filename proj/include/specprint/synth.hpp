#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specprint/common.hpp"
#include "specprint/denoise.hpp"
#include "specprint/fft.hpp"
#include "specprint/image.hpp"
#include "specprint/rng.hpp"

namespace specprint {

// ---------------------------------------------------------------------------
// Post-processing operations (blur, sharpen, resize round trip, JPEG-style
// quantization), applied to fixture corpora to model what images go
// through after leaving a generator.
// ---------------------------------------------------------------------------

enum class PostOpKind { blur, sharpen, resize, jpeg };

struct PostOp {
    PostOpKind kind = PostOpKind::blur;
    double value = 1.0; // sigma | amount | scale | quality

    static PostOp blur(double sigma) { return {PostOpKind::blur, sigma}; }
    static PostOp sharpen(double amount) { return {PostOpKind::sharpen, amount}; }
    static PostOp resize(double scale) { return {PostOpKind::resize, scale}; }
    static PostOp jpeg(int quality) { return {PostOpKind::jpeg, static_cast<double>(quality)}; }

    void validate() const {
        switch (kind) {
            case PostOpKind::blur:
                if (value <= 0.0) throw contract_error("blur sigma must be > 0");
                break;
            case PostOpKind::sharpen:
                if (value < 0.0) throw contract_error("sharpen amount must be >= 0");
                break;
            case PostOpKind::resize:
                if (value <= 0.0 || value > 4.0) throw contract_error("resize scale must be in (0,4]");
                break;
            case PostOpKind::jpeg:
                if (value < 1.0 || value > 100.0) throw contract_error("jpeg quality must be in [1,100]");
                break;
        }
    }
};

inline std::string to_string(PostOpKind k) {
    switch (k) {
        case PostOpKind::blur: return "blur";
        case PostOpKind::sharpen: return "sharpen";
        case PostOpKind::resize: return "resize";
        case PostOpKind::jpeg: return "jpeg";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// JPEG quantization footprint. Luminance-only: 8x8 orthonormal DCT-II,
// quantization with the standard luminance table scaled by the IJG rule,
// dequantization, inverse transform. No chroma, no entropy coding --
// only the quantization trace matters here.
// ---------------------------------------------------------------------------

// Standard luminance quantization table (natural row-major order).
inline const std::array<int, 64>& jpeg_base_luminance_table() {
    static const std::array<int, 64> table = {
        16, 11, 10, 16, 24,  40,  51,  61,
        12, 12, 14, 19, 26,  58,  60,  55,
        14, 13, 16, 24, 40,  57,  69,  56,
        14, 17, 22, 29, 51,  87,  80,  62,
        18, 22, 37, 56, 68,  109, 103, 77,
        24, 35, 55, 64, 81,  104, 113, 92,
        49, 64, 78, 87, 103, 121, 120, 101,
        72, 92, 95, 98, 112, 100, 103, 99};
    return table;
}

// IJG quality scaling: scale = 5000/Q below 50, else 200 - 2Q;
// q'[i] = clamp(floor((q[i]*scale + 50)/100), 1, 255).
inline std::array<int, 64> jpeg_quant_table(int quality) {
    if (quality < 1 || quality > 100) throw contract_error("jpeg quality must be in [1,100]");
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<int, 64> out{};
    const auto& base = jpeg_base_luminance_table();
    for (int i = 0; i < 64; ++i) {
        int q = (base[static_cast<std::size_t>(i)] * scale + 50) / 100;
        if (q < 1) q = 1;
        if (q > 255) q = 255;
        out[static_cast<std::size_t>(i)] = q;
    }
    return out;
}

namespace detail {

// Orthonormal 8-point DCT-II basis, D[u][m] = a(u) cos((2m+1) u pi / 16).
inline const std::array<std::array<double, 8>, 8>& dct8_basis() {
    static const auto basis = [] {
        std::array<std::array<double, 8>, 8> d{};
        const double pi = 3.14159265358979323846;
        for (int u = 0; u < 8; ++u) {
            const double a = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int m = 0; m < 8; ++m)
                d[static_cast<std::size_t>(u)][static_cast<std::size_t>(m)] =
                    a * std::cos((2 * m + 1) * u * pi / 16.0);
        }
        return d;
    }();
    return basis;
}

inline void dct8x8(const double in[8][8], double out[8][8], bool inverse) {
    const auto& d = dct8_basis();
    double tmp[8][8];
    // rows
    for (int r = 0; r < 8; ++r) {
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int m = 0; m < 8; ++m)
                acc += (inverse ? d[static_cast<std::size_t>(m)][static_cast<std::size_t>(u)]
                                : d[static_cast<std::size_t>(u)][static_cast<std::size_t>(m)]) *
                       in[r][m];
            tmp[r][u] = acc;
        }
    }
    // columns
    for (int c = 0; c < 8; ++c) {
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int m = 0; m < 8; ++m)
                acc += (inverse ? d[static_cast<std::size_t>(m)][static_cast<std::size_t>(u)]
                                : d[static_cast<std::size_t>(u)][static_cast<std::size_t>(m)]) *
                       tmp[m][c];
            out[u][c] = acc;
        }
    }
}

inline ImageF pad_reflect_to_multiple(const ImageF& img, int multiple) {
    const int w = (img.width + multiple - 1) / multiple * multiple;
    const int h = (img.height + multiple - 1) / multiple * multiple;
    if (w == img.width && h == img.height) return img;
    ImageF out(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            out.at(r, c) = img.at(mirror_index(r, img.height), mirror_index(c, img.width));
    return out;
}

} // namespace detail

// JPEG-style requantization of the pixel grid. Coefficient quantization
// truncates toward zero (dead-zone quantizer), so a reconstructed block
// never gains AC energy. Dimensions that are not multiples of 8 are
// reflect-padded and cropped back.
inline ImageF jpeg_simulate(const ImageF& img, int quality) {
    const std::array<int, 64> qt = jpeg_quant_table(quality);
    ImageF padded = detail::pad_reflect_to_multiple(img, 8);
    ImageF recon(padded.width, padded.height);
    double block[8][8], coef[8][8], back[8][8];
    for (int br = 0; br < padded.height; br += 8) {
        for (int bc = 0; bc < padded.width; bc += 8) {
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c)
                    block[r][c] = padded.at(br + r, bc + c) * 255.0 - 128.0;
            detail::dct8x8(block, coef, false);
            for (int r = 0; r < 8; ++r) {
                for (int c = 0; c < 8; ++c) {
                    const double q = static_cast<double>(qt[static_cast<std::size_t>(r * 8 + c)]);
                    coef[r][c] = std::trunc(coef[r][c] / q) * q;
                }
            }
            detail::dct8x8(coef, back, true);
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c) {
                    double v = (back[r][c] + 128.0) / 255.0;
                    recon.at(br + r, bc + c) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                }
        }
    }
    if (recon.width == img.width && recon.height == img.height) return recon;
    ImageF out(img.width, img.height);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) out.at(r, c) = recon.at(r, c);
    return out;
}

// ---------------------------------------------------------------------------
// Bilinear resize (pixel centers at (i+0.5)/n, edges clamped).
// ---------------------------------------------------------------------------

inline ImageF resize_bilinear(const ImageF& img, int new_width, int new_height) {
    if (new_width < 1 || new_height < 1) throw geometry_error("resize target must be >= 1");
    ImageF out(new_width, new_height);
    const double sx = static_cast<double>(img.width) / new_width;
    const double sy = static_cast<double>(img.height) / new_height;
    for (int r = 0; r < new_height; ++r) {
        const double fy = (r + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        const double wy = fy - y0;
        int y1 = y0 + 1;
        y0 = std::clamp(y0, 0, img.height - 1);
        y1 = std::clamp(y1, 0, img.height - 1);
        for (int c = 0; c < new_width; ++c) {
            const double fx = (c + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            const double wx = fx - x0;
            int x1 = x0 + 1;
            x0 = std::clamp(x0, 0, img.width - 1);
            x1 = std::clamp(x1, 0, img.width - 1);
            const double top = img.at(y0, x0) * (1.0 - wx) + img.at(y0, x1) * wx;
            const double bot = img.at(y1, x0) * (1.0 - wx) + img.at(y1, x1) * wx;
            out.at(r, c) = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

inline ImageF clamp01(ImageF img) {
    for (double& v : img.samples) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return img;
}

inline ImageF post_process(const ImageF& img, const PostOp& op) {
    op.validate();
    switch (op.kind) {
        case PostOpKind::blur:
            return gaussian_blur(img, op.value);
        case PostOpKind::sharpen: {
            // unsharp mask at sigma 1
            ImageF low = gaussian_blur(img, 1.0);
            ImageF out(img.width, img.height);
            for (std::size_t i = 0; i < img.size(); ++i)
                out.samples[i] = img.samples[i] + op.value * (img.samples[i] - low.samples[i]);
            return clamp01(std::move(out));
        }
        case PostOpKind::resize: {
            // scale down/up and return to the original geometry, modeling a
            // re-upload at changed resolution
            const int w = std::max(1, static_cast<int>(std::lround(img.width * op.value)));
            const int h = std::max(1, static_cast<int>(std::lround(img.height * op.value)));
            ImageF scaled = resize_bilinear(img, w, h);
            return resize_bilinear(scaled, img.width, img.height);
        }
        case PostOpKind::jpeg:
            return jpeg_simulate(img, static_cast<int>(op.value));
    }
    throw contract_error("unhandled post op");
}

// ---------------------------------------------------------------------------
// Random field synthesis.
// ---------------------------------------------------------------------------

// Random field whose power spectrum follows radius^(-alpha): a full grid
// of iid standard-normal complex draws is Hermitian-symmetrized, shaped by
// radius^(-alpha/2) with DC forced to zero, and inverse transformed. The
// spatial result is standardized to mean 0.5, std 0.1 and clamped to
// [0,1]. alpha = 0 yields white noise. Fully determined by (size, alpha,
// seed).
inline ImageF gen_powerlaw_field(int size, double alpha, std::uint64_t seed) {
    if (size < 1) throw geometry_error("field size must be >= 1");
    if (alpha < 0.0) throw contract_error("alpha must be >= 0");
    Rng rng(seed);
    ComplexGrid spec(size, size);
    for (auto& v : spec.values) {
        const double re = rng.normal();
        const double im = rng.normal();
        v = cplx(re, im);
    }
    // Hermitian symmetrization: X <- (X + conj(X(-k,-l))) / 2 keeps the
    // inverse transform real and E|X|^2 uniform across bins.
    ComplexGrid sym(size, size);
    for (int k = 0; k < size; ++k) {
        for (int l = 0; l < size; ++l) {
            const int mk = (size - k) % size;
            const int ml = (size - l) % size;
            sym.at(k, l) = 0.5 * (spec.at(k, l) + std::conj(spec.at(mk, ml)));
        }
    }
    for (int k = 0; k < size; ++k) {
        for (int l = 0; l < size; ++l) {
            if (k == 0 && l == 0) {
                sym.at(k, l) = cplx(0.0, 0.0);
                continue;
            }
            const double f_v = detail::folded_frequency(k, size);
            const double f_u = detail::folded_frequency(l, size);
            const double radius = std::hypot(f_u, f_v);
            sym.at(k, l) *= std::pow(radius, -alpha / 2.0);
        }
    }
    ComplexGrid field = idft2(sym);
    ImageF out(size, size);
    for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] = field.values[i].real();
    const double m = image_mean(out);
    const double sd = image_std(out);
    const double gain = sd > 0.0 ? 0.1 / sd : 0.0;
    for (double& v : out.samples) {
        v = 0.5 + gain * (v - m);
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return out;
}

// Zero-mean N x N tile drawn from the pattern seed and scaled so its peak
// magnitude equals `amplitude`. Every image sharing the pattern seed gets
// the identical tile -- the model-wide fingerprint this toolkit hunts.
inline ImageF make_periodic_tile(int period, double amplitude, std::uint64_t pattern_seed) {
    if (period < 1) throw geometry_error("period must be >= 1");
    ImageF tile(period, period);
    Rng rng(pattern_seed);
    for (double& v : tile.samples) v = rng.normal();
    const double m = image_mean(tile);
    for (double& v : tile.samples) v -= m;
    double peak = 0.0;
    for (double v : tile.samples) peak = std::max(peak, std::abs(v));
    const double gain = peak > 0.0 ? amplitude / peak : 0.0;
    for (double& v : tile.samples) v *= gain;
    return tile;
}

inline ImageF inject_periodic(const ImageF& img, int period, double amplitude,
                              std::uint64_t pattern_seed) {
    if (period < 1 || img.width % period != 0 || img.height % period != 0)
        throw geometry_error("period " + std::to_string(period) + " must divide image size " +
                             std::to_string(img.width) + "x" + std::to_string(img.height));
    if (amplitude == 0.0) return img;
    const ImageF tile = make_periodic_tile(period, amplitude, pattern_seed);
    ImageF out = img;
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c)
            out.at(r, c) += tile.at(r % period, c % period);
    return out;
}

// ---------------------------------------------------------------------------
// Declarative fixture corpora.
// ---------------------------------------------------------------------------

struct ArtifactSpec {
    int period = 4;
    double amplitude = 0.05;
    std::uint64_t pattern_seed = 1;
};

struct FixtureSpec {
    int size = 256;
    int count = 100;
    double alpha = 0.0;
    std::uint64_t master_seed = 0;
    std::optional<ArtifactSpec> artifact;
    std::vector<PostOp> chain;

    void validate() const {
        if (size < 32) throw contract_error("fixture size must be >= 32");
        if (count < 1) throw contract_error("fixture count must be >= 1");
        if (alpha < 0.0) throw contract_error("fixture alpha must be >= 0");
        if (artifact) {
            if (artifact->period < 1 || size % artifact->period != 0)
                throw contract_error("artifact period must divide fixture size");
            if (artifact->amplitude < 0.0) throw contract_error("artifact amplitude must be >= 0");
        }
        for (const auto& op : chain) op.validate();
    }
};

// Pure function of (spec, index): base field from the per-image seed,
// optional fingerprint injection, then the post-processing chain in order.
inline ImageF make_fixture_image(const FixtureSpec& spec, std::size_t index) {
    ImageF img = gen_powerlaw_field(spec.size, spec.alpha, derive_seed(spec.master_seed, index));
    if (spec.artifact)
        img = inject_periodic(img, spec.artifact->period, spec.artifact->amplitude,
                              spec.artifact->pattern_seed);
    for (const auto& op : spec.chain) img = post_process(img, op);
    return img;
}

inline std::vector<ImageF> make_fixture_corpus(const FixtureSpec& spec) {
    spec.validate();
    std::vector<ImageF> out;
    out.reserve(static_cast<std::size_t>(spec.count));
    for (int i = 0; i < spec.count; ++i)
        out.push_back(make_fixture_image(spec, static_cast<std::size_t>(i)));
    return out;
}

} // namespace specprint
