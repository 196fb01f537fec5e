#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "specprint/common.hpp"
#include "specprint/corpus.hpp"
#include "specprint/fft.hpp"

namespace specprint {

struct SpectralPeak {
    double f_u = 0.0;        // horizontal frequency, [-0.5, 0.5)
    double f_v = 0.0;        // vertical frequency, [-0.5, 0.5)
    int k = 0, l = 0;        // grid bin (row, col) in unshifted order
    double value = 0.0;      // normalized spectrum value at the bin
    double prominence = 0.0; // value / neighborhood median
};

struct PeakReport {
    std::vector<SpectralPeak> peaks;
    std::map<int, double> candidate_scores; // upsampling factor -> lattice score
    std::optional<int> inferred_factor;
    double threshold = 0.0;
    int neighborhood = 0;
    double min_prominence = 0.0;
};

struct GridScore {
    double score = 0.0; // mean of the axis scores; ~0 without grid bias
    int period = 8;
    double horizontal = 0.0;
    double vertical = 0.0;
};

// ---------------------------------------------------------------------------
// Spectral peak detection.
// ---------------------------------------------------------------------------

// A bin is a peak when it is the strict maximum of its (odd, circular)
// neighborhood and exceeds min_prominence times the neighborhood median
// (median taken without the center). DC and its immediate neighbors are
// excluded. Ratios to the median make the result invariant to positive
// rescaling of the spectrum.
inline std::vector<SpectralPeak> detect_peaks(const SpectralSummary& summary,
                                              int neighborhood = 5,
                                              double min_prominence = 8.0) {
    if (neighborhood < 3 || neighborhood % 2 == 0)
        throw contract_error("neighborhood must be odd and >= 3");
    const RealGrid& S = summary.avg_power;
    const int M = S.height, N = S.width;
    const int half = neighborhood / 2;
    std::vector<SpectralPeak> peaks;
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(neighborhood) * neighborhood - 1);
    for (int k = 0; k < M; ++k) {
        for (int l = 0; l < N; ++l) {
            // skip DC and its 8-neighborhood
            const bool near_dc_row = k <= 1 || k >= M - 1;
            const bool near_dc_col = l <= 1 || l >= N - 1;
            if (near_dc_row && near_dc_col) continue;
            const double center = S.at(k, l);
            bool strict_max = true;
            window.clear();
            for (int dk = -half; dk <= half && strict_max; ++dk) {
                for (int dl = -half; dl <= half; ++dl) {
                    if (dk == 0 && dl == 0) continue;
                    const double v = S.at(((k + dk) % M + M) % M, ((l + dl) % N + N) % N);
                    if (v >= center) {
                        strict_max = false;
                        break;
                    }
                    window.push_back(v);
                }
            }
            if (!strict_max) continue;
            auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
            std::nth_element(window.begin(), mid, window.end());
            const double med = *mid;
            if (!(med > 0.0) || center < min_prominence * med) continue;
            SpectralPeak p;
            p.k = k;
            p.l = l;
            p.f_u = detail::folded_frequency(l, N);
            p.f_v = detail::folded_frequency(k, M);
            p.value = center;
            p.prominence = center / med;
            peaks.push_back(p);
        }
    }
    std::sort(peaks.begin(), peaks.end(), [](const SpectralPeak& a, const SpectralPeak& b) {
        if (a.prominence != b.prominence) return a.prominence > b.prominence;
        return a.k != b.k ? a.k < b.k : a.l < b.l;
    });
    return peaks;
}

namespace detail {

// Bins within one bin of the lattice {(a/N, b/N), (a,b) != (0,0)},
// restricted to lattice points that are NOT on any coarser candidate's
// lattice (a and b both even would fall on the N/2 lattice). DC's
// immediate neighborhood is excluded.
inline std::vector<std::size_t> exclusive_lattice_bins(int factor, int M, int N,
                                                       bool exclude_coarser) {
    std::vector<char> marked(static_cast<std::size_t>(M) * N, 0);
    for (int a = 0; a < factor; ++a) {
        for (int b = 0; b < factor; ++b) {
            if (a == 0 && b == 0) continue;
            if (exclude_coarser && a % 2 == 0 && b % 2 == 0) continue;
            const int k = static_cast<int>(std::lround(static_cast<double>(a) * M / factor)) % M;
            const int l = static_cast<int>(std::lround(static_cast<double>(b) * N / factor)) % N;
            for (int dk = -1; dk <= 1; ++dk) {
                for (int dl = -1; dl <= 1; ++dl) {
                    const int kk = ((k + dk) % M + M) % M;
                    const int ll = ((l + dl) % N + N) % N;
                    const bool near_dc = (kk <= 1 || kk >= M - 1) && (ll <= 1 || ll >= N - 1);
                    if (near_dc) continue;
                    marked[static_cast<std::size_t>(kk) * N + ll] = 1;
                }
            }
        }
    }
    std::vector<std::size_t> bins;
    for (std::size_t i = 0; i < marked.size(); ++i)
        if (marked[i]) bins.push_back(i);
    return bins;
}

inline double grid_median(const RealGrid& g) {
    std::vector<double> v = g.values;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

} // namespace detail

// Score the candidate upsampling factors {2,4,8,16} on the normalized
// power spectrum. Candidate lattices nest (multiples of 1/4 are also
// multiples of 1/8), so each candidate is scored only on the lattice
// points exclusive to it; the inferred factor is the finest candidate
// whose exclusive lattice clears the threshold. With nested lattices a
// plain argmax would flip between a factor and its divisors, since an
// injected period-N pattern excites every coarser sub-lattice too.
inline PeakReport infer_upsampling(const SpectralSummary& summary,
                                   const std::vector<int>& candidates = {2, 4, 8, 16},
                                   double threshold = 2.0, int neighborhood = 5,
                                   double min_prominence = 8.0) {
    const RealGrid& S = summary.avg_power;
    PeakReport report;
    report.threshold = threshold;
    report.neighborhood = neighborhood;
    report.min_prominence = min_prominence;
    report.peaks = detect_peaks(summary, neighborhood, min_prominence);

    const double med = detail::grid_median(S);
    std::vector<int> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    for (int factor : sorted) {
        if (factor < 2) throw contract_error("upsampling candidates must be >= 2");
        const bool has_coarser = factor != sorted.front();
        const auto bins = detail::exclusive_lattice_bins(factor, S.height, S.width, has_coarser);
        if (bins.empty() || !(med > 0.0)) {
            report.candidate_scores[factor] = 0.0;
            continue;
        }
        double acc = 0.0;
        for (std::size_t i : bins) acc += S.values[i];
        report.candidate_scores[factor] = acc / static_cast<double>(bins.size()) / med;
    }
    for (int factor : sorted) {
        const double score = report.candidate_scores[factor];
        if (score >= threshold) report.inferred_factor = factor; // finest one wins
    }
    return report;
}

// ---------------------------------------------------------------------------
// JPEG 8x8 grid bias, scored in the autocorrelation domain where the
// lag-8 signature is clean (the spectral 1/8 lattice would collide with
// upsampling lattices).
// ---------------------------------------------------------------------------

inline GridScore jpeg_grid_score(const SpectralSummary& summary) {
    const RealGrid& R = summary.avg_autocorr;
    if (R.width < 33 || R.height < 33)
        throw contract_error("jpeg grid score needs >= 33x33 autocorrelation lags");
    static const int on_lags[] = {8, 16, 24, 32};
    static const int control_lags[] = {3, 5, 11, 13, 19, 21, 27, 29};

    auto axis_score = [&](bool horizontal) {
        auto lag_value = [&](int lag) {
            return std::abs(horizontal ? R.at(0, lag) : R.at(lag, 0));
        };
        double on = 0.0;
        for (int lag : on_lags) on += lag_value(lag);
        on /= 4.0;
        double control = 0.0;
        for (int lag : control_lags) control += lag_value(lag);
        control /= 8.0;
        // spread of all off-lattice lags in [1,32]
        std::vector<double> off;
        for (int lag = 1; lag <= 32; ++lag)
            if (lag % 8 != 0) off.push_back(lag_value(lag));
        double m = 0.0;
        for (double v : off) m += v;
        m /= static_cast<double>(off.size());
        double ss = 0.0;
        for (double v : off) ss += (v - m) * (v - m);
        const double sd = std::sqrt(ss / static_cast<double>(off.size()));
        if (!(sd > 0.0)) return 0.0;
        return (on - control) / sd;
    };

    GridScore out;
    out.horizontal = axis_score(true);
    out.vertical = axis_score(false);
    out.score = 0.5 * (out.horizontal + out.vertical);
    return out;
}

} // namespace specprint
