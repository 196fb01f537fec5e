#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "specprint/common.hpp"
#include "specprint/image.hpp"

namespace specprint {

using cplx = std::complex<double>;

// Row-major complex grid; height rows (vertical frequency index k),
// width columns (horizontal frequency index l).
struct ComplexGrid {
    int width = 0;
    int height = 0;
    std::vector<cplx> values;

    ComplexGrid() = default;
    ComplexGrid(int w, int h)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h) {
        if (w < 1 || h < 1) throw geometry_error("grid dimensions must be >= 1");
    }

    cplx& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
    cplx at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
    std::size_t size() const { return values.size(); }
};

struct RealGrid {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    RealGrid() = default;
    RealGrid(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw geometry_error("grid dimensions must be >= 1");
    }

    double& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
    std::size_t size() const { return values.size(); }
};

namespace detail {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Folded frequency in cycles/pixel: index k of an n-point transform
// mapped into [-0.5, 0.5).
inline double folded_frequency(int k, int n) {
    const double f = static_cast<double>(k) / static_cast<double>(n);
    return f >= 0.5 ? f - 1.0 : f;
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 Cooley-Tukey, in place, n a power of two.
// Twiddles and the bit-reversal permutation are precomputed per size.
class Pow2Fft {
public:
    explicit Pow2Fft(std::size_t n) : n_(n) {
        rev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            rev_[i] = r;
        }
        tw_.resize(n / 2);
        for (std::size_t i = 0; i < n / 2; ++i) {
            const double a = -kTwoPi * static_cast<double>(i) / static_cast<double>(n);
            tw_[i] = cplx(std::cos(a), std::sin(a));
        }
    }

    void forward(cplx* x) const {
        const std::size_t n = n_;
        for (std::size_t i = 0; i < n; ++i)
            if (i < rev_[i]) std::swap(x[i], x[rev_[i]]);
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n / len;
            for (std::size_t start = 0; start < n; start += len) {
                std::size_t tw_idx = 0;
                for (std::size_t j = 0; j < half; ++j) {
                    const cplx t = x[start + j + half] * tw_[tw_idx];
                    x[start + j + half] = x[start + j] - t;
                    x[start + j] += t;
                    tw_idx += step;
                }
            }
        }
    }

    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    std::vector<std::size_t> rev_;
    std::vector<cplx> tw_;
};

} // namespace detail

// One-dimensional DFT plan for arbitrary n >= 1. Powers of two run the
// radix-2 kernel directly; other sizes go through Bluestein's chirp-z
// reformulation on top of a padded power-of-two transform. Plans hold
// only immutable tables, so a constructed plan is safe to share across
// threads; scratch space is per call.
class Fft1d {
public:
    explicit Fft1d(std::size_t n) : n_(n) {
        if (n == 0) throw geometry_error("transform size must be >= 1");
        if (detail::is_pow2(n)) {
            pow2_ = std::make_unique<detail::Pow2Fft>(n);
            return;
        }
        m_ = detail::next_pow2(2 * n - 1);
        pow2_ = std::make_unique<detail::Pow2Fft>(m_);
        chirp_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            // k^2 mod 2n keeps the chirp angle within one turn
            const std::size_t q = (k * k) % (2 * n);
            const double a = -detail::kTwoPi * 0.5 * static_cast<double>(q) / static_cast<double>(n);
            chirp_[k] = cplx(std::cos(a), std::sin(a));
        }
        bspec_.assign(m_, cplx(0.0, 0.0));
        bspec_[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n; ++k)
            bspec_[k] = bspec_[m_ - k] = std::conj(chirp_[k]);
        pow2_->forward(bspec_.data());
    }

    // Unnormalized forward transform, in place.
    void forward(cplx* x) const {
        if (n_ == 1) return;
        if (detail::is_pow2(n_)) {
            pow2_->forward(x);
            return;
        }
        std::vector<cplx> a(m_, cplx(0.0, 0.0));
        for (std::size_t k = 0; k < n_; ++k) a[k] = x[k] * chirp_[k];
        pow2_->forward(a.data());
        for (std::size_t k = 0; k < m_; ++k) a[k] *= bspec_[k];
        // inverse pow-2 transform via conjugation
        for (auto& v : a) v = std::conj(v);
        pow2_->forward(a.data());
        const double inv_m = 1.0 / static_cast<double>(m_);
        for (std::size_t k = 0; k < n_; ++k)
            x[k] = std::conj(a[k]) * inv_m * chirp_[k];
    }

    // Inverse transform with the 1/n factor.
    void inverse(cplx* x) const {
        for (std::size_t k = 0; k < n_; ++k) x[k] = std::conj(x[k]);
        forward(x);
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < n_; ++k) x[k] = std::conj(x[k]) * inv_n;
    }

    std::size_t size() const { return n_; }

private:
    std::size_t n_ = 0;
    std::size_t m_ = 0; // Bluestein padded length
    std::unique_ptr<detail::Pow2Fft> pow2_;
    std::vector<cplx> chirp_;
    std::vector<cplx> bspec_; // transformed conjugate chirp
};

namespace detail {

inline void transpose(const ComplexGrid& in, ComplexGrid& out) {
    for (int r = 0; r < in.height; ++r)
        for (int c = 0; c < in.width; ++c)
            out.at(c, r) = in.at(r, c);
}

// Row-column 2-D transform. `rows` must be a plan of length grid.width,
// `cols` of length grid.height.
inline void fft2_inplace(ComplexGrid& grid, const Fft1d& rows, const Fft1d& cols, bool inv) {
    for (int r = 0; r < grid.height; ++r) {
        cplx* row = grid.values.data() + static_cast<std::size_t>(r) * grid.width;
        inv ? rows.inverse(row) : rows.forward(row);
    }
    ComplexGrid t(grid.height, grid.width);
    transpose(grid, t);
    for (int r = 0; r < t.height; ++r) {
        cplx* row = t.values.data() + static_cast<std::size_t>(r) * t.width;
        inv ? cols.inverse(row) : cols.forward(row);
    }
    transpose(t, grid);
}

} // namespace detail

// Unnormalized forward 2-D DFT of a real image:
//   X(k,l) = sum_m sum_n x(m,n) exp(-j 2 pi (k m / M + l n / N))
// with M = height (index k) and N = width (index l).
inline ComplexGrid dft2(const ImageF& img) {
    ComplexGrid grid(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i) grid.values[i] = cplx(img.samples[i], 0.0);
    const Fft1d rows(static_cast<std::size_t>(img.width));
    const Fft1d cols(static_cast<std::size_t>(img.height));
    detail::fft2_inplace(grid, rows, cols, false);
    return grid;
}

inline ComplexGrid dft2(const ComplexGrid& in) {
    ComplexGrid grid = in;
    const Fft1d rows(static_cast<std::size_t>(in.width));
    const Fft1d cols(static_cast<std::size_t>(in.height));
    detail::fft2_inplace(grid, rows, cols, false);
    return grid;
}

// Inverse 2-D DFT carrying the 1/(M N) normalization.
inline ComplexGrid idft2(const ComplexGrid& in) {
    ComplexGrid grid = in;
    const Fft1d rows(static_cast<std::size_t>(in.width));
    const Fft1d cols(static_cast<std::size_t>(in.height));
    detail::fft2_inplace(grid, rows, cols, true);
    return grid;
}

inline RealGrid power_spectrum(const ComplexGrid& grid) {
    RealGrid out(grid.width, grid.height);
    for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = std::norm(grid.values[i]);
    return out;
}

namespace detail {

template <typename Grid>
Grid fftshift_impl(const Grid& in) {
    Grid out(in.width, in.height);
    const int dr = in.height / 2;
    const int dc = in.width / 2;
    for (int r = 0; r < in.height; ++r)
        for (int c = 0; c < in.width; ++c)
            out.at((r + dr) % in.height, (c + dc) % in.width) = in.at(r, c);
    return out;
}

} // namespace detail

// Move bin (0,0) to (floor(M/2), floor(N/2)) -- DC-at-center display order.
inline RealGrid fftshift(const RealGrid& in) { return detail::fftshift_impl(in); }
inline ComplexGrid fftshift(const ComplexGrid& in) { return detail::fftshift_impl(in); }

// Circular autocorrelation through the spectral identity:
//   R = IDFT(|DFT(x')|^2) / (M N),  x' = x - mean(x) when remove_mean.
// R(0,0) then equals the mean squared value of x'. The periodic boundary
// makes R and the power spectrum an exact transform pair.
inline RealGrid autocorr(const ImageF& img, bool remove_mean = true) {
    ImageF x = img;
    if (remove_mean) {
        const double m = image_mean(x);
        for (double& v : x.samples) v -= m;
    }
    ComplexGrid spec = dft2(x);
    for (auto& v : spec.values) v = cplx(std::norm(v), 0.0);
    ComplexGrid back = idft2(spec);
    RealGrid out(img.width, img.height);
    const double inv = 1.0 / static_cast<double>(img.size());
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = back.values[i].real() * inv;
    return out;
}

} // namespace specprint
