#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <limits>
#include <string>
#include <vector>

#include "specprint/common.hpp"
#include "specprint/corpus.hpp"
#include "specprint/fft.hpp"
#include "specprint/image.hpp"
#include "specprint/parallel.hpp"

namespace specprint {

inline constexpr int kRadialBins = 128;
inline constexpr int kAngularBins = 16;
inline constexpr double kAngularHighpass = 0.1;

enum class SpectralMode { magnitude, power };

inline std::string to_string(SpectralMode m) {
    return m == SpectralMode::magnitude ? "magnitude" : "power";
}

inline SpectralMode spectral_mode_from_string(const std::string& s) {
    if (s == "magnitude") return SpectralMode::magnitude;
    if (s == "power") return SpectralMode::power;
    throw contract_error("unknown spectral mode '" + s + "'");
}

// Radial bin centers: rho = (i+1) * 0.5/128, i = 0..127, i.e. (0, 0.5].
inline double radial_bin_center(int i) {
    return (static_cast<double>(i) + 1.0) * (0.5 / kRadialBins);
}

// Angular bin centers: theta = j * pi/16, j = 0..15, on [0, pi).
inline double angular_bin_center(int j) {
    return static_cast<double>(j) * (3.14159265358979323846 / kAngularBins);
}

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

// Nearest radial bin for a frequency radius; -1 when outside the profile
// range (DC, or beyond the last bin's half-step reach into the corners).
inline int radial_bin_of(double radius) {
    const double step = 0.5 / kRadialBins;
    const int bin = static_cast<int>(std::lround(radius / step)) - 1;
    if (bin < 0 || bin >= kRadialBins) return -1;
    return bin;
}

// Nearest angular bin with wraparound on [0, pi).
inline int angular_bin_of(double f_u, double f_v) {
    double theta = std::atan2(f_v, f_u);
    if (theta < 0.0) theta += kPi; // fold the double cone
    if (theta >= kPi) theta -= kPi;
    const double step = kPi / kAngularBins;
    int bin = static_cast<int>(std::lround(theta / step));
    if (bin >= kAngularBins) bin = 0;
    return bin;
}

inline ImageF std_normalized(const ImageF& img) {
    const double sd = image_std(img);
    if (!(sd > 0.0)) throw degenerate_input_error("zero-variance image");
    ImageF out = img;
    const double inv = 1.0 / sd;
    for (double& v : out.samples) v *= inv;
    return out;
}

} // namespace detail

// Static bin membership for one grid geometry: which spectral bins feed
// which profile bin, shared by every image of a uniform corpus.
struct ProfileGeometry {
    int width = 0;
    int height = 0;
    std::vector<int> radial_bin;   // per spectral bin; -1 = not retained
    std::vector<int> angular_bin;  // per spectral bin; -1 = below highpass or DC
    std::vector<std::size_t> radial_population;
    std::vector<std::size_t> angular_population;

    ProfileGeometry(int w, int h)
        : width(w), height(h),
          radial_bin(static_cast<std::size_t>(w) * h, -1),
          angular_bin(static_cast<std::size_t>(w) * h, -1),
          radial_population(kRadialBins, 0),
          angular_population(kAngularBins, 0) {
        for (int k = 0; k < h; ++k) {
            for (int l = 0; l < w; ++l) {
                const std::size_t idx = static_cast<std::size_t>(k) * w + l;
                if (k == 0 && l == 0) continue; // DC carries the mean, never binned
                const double f_v = detail::folded_frequency(k, h); // vertical
                const double f_u = detail::folded_frequency(l, w); // horizontal
                const double radius = std::hypot(f_u, f_v);
                const int rb = detail::radial_bin_of(radius);
                if (rb >= 0) {
                    radial_bin[idx] = rb;
                    ++radial_population[static_cast<std::size_t>(rb)];
                }
                if (radius > kAngularHighpass) {
                    const int ab = detail::angular_bin_of(f_u, f_v);
                    angular_bin[idx] = ab;
                    ++angular_population[static_cast<std::size_t>(ab)];
                }
            }
        }
    }
};

// Per-image radial spectral density: the image is divided by its own
// standard deviation, transformed, and |X| (or |X|^2) is averaged over the
// annulus of each bin. Empty bins are NaN.
inline std::vector<double> radial_profile(const ImageF& img, SpectralMode mode,
                                          const ProfileGeometry& geo) {
    if (geo.width != img.width || geo.height != img.height)
        throw geometry_error("profile geometry does not match image");
    ComplexGrid spec = dft2(detail::std_normalized(img));
    std::vector<double> sums(kRadialBins, 0.0);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const int b = geo.radial_bin[i];
        if (b < 0) continue;
        const double p = std::norm(spec.values[i]);
        sums[static_cast<std::size_t>(b)] += mode == SpectralMode::power ? p : std::sqrt(p);
    }
    std::vector<double> out(kRadialBins, std::numeric_limits<double>::quiet_NaN());
    for (int b = 0; b < kRadialBins; ++b)
        if (geo.radial_population[static_cast<std::size_t>(b)] > 0)
            out[static_cast<std::size_t>(b)] =
                sums[static_cast<std::size_t>(b)] /
                static_cast<double>(geo.radial_population[static_cast<std::size_t>(b)]);
    return out;
}

inline std::vector<double> radial_profile(const ImageF& img, SpectralMode mode) {
    return radial_profile(img, mode, ProfileGeometry(img.width, img.height));
}

// Per-image angular spectral density over 16 orientation cones on [0, pi);
// frequencies with radius <= 0.1 are excluded before binning, and |X| of
// the std-normalized image is averaged per cone.
inline std::vector<double> angular_profile(const ImageF& img, const ProfileGeometry& geo) {
    if (geo.width != img.width || geo.height != img.height)
        throw geometry_error("profile geometry does not match image");
    ComplexGrid spec = dft2(detail::std_normalized(img));
    std::vector<double> sums(kAngularBins, 0.0);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const int b = geo.angular_bin[i];
        if (b < 0) continue;
        sums[static_cast<std::size_t>(b)] += std::abs(spec.values[i]);
    }
    std::vector<double> out(kAngularBins, std::numeric_limits<double>::quiet_NaN());
    for (int b = 0; b < kAngularBins; ++b)
        if (geo.angular_population[static_cast<std::size_t>(b)] > 0)
            out[static_cast<std::size_t>(b)] =
                sums[static_cast<std::size_t>(b)] /
                static_cast<double>(geo.angular_population[static_cast<std::size_t>(b)]);
    return out;
}

inline std::vector<double> angular_profile(const ImageF& img) {
    return angular_profile(img, ProfileGeometry(img.width, img.height));
}

// Corpus moments of a profile: per-bin mean and unbiased sample variance
// across images. Variance is NaN (undefined) below two images.
struct ProfileStats {
    std::vector<double> centers;
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<std::size_t> population; // spectral bins feeding each profile bin
    std::size_t image_count = 0;
};

struct RadialProfile {
    ProfileStats stats;
    SpectralMode mode = SpectralMode::magnitude;
};

struct AngularProfile {
    ProfileStats stats;
    double highpass_cutoff = kAngularHighpass;
};

namespace detail {

// Mean/variance over per-image profile vectors. Sequential over image
// index, so the result does not depend on how the per-image vectors were
// produced (thread count included).
inline ProfileStats profile_moments(const std::vector<std::vector<double>>& rows,
                                    const std::vector<double>& centers,
                                    const std::vector<std::size_t>& population) {
    const std::size_t bins = centers.size();
    ProfileStats out;
    out.centers = centers;
    out.population = population;
    out.mean.assign(bins, std::numeric_limits<double>::quiet_NaN());
    out.variance.assign(bins, std::numeric_limits<double>::quiet_NaN());
    out.image_count = rows.size();
    if (rows.empty()) return out;
    for (std::size_t b = 0; b < bins; ++b) {
        if (population[b] == 0) continue;
        double m = 0.0;
        for (const auto& row : rows) m += row[b];
        m /= static_cast<double>(rows.size());
        out.mean[b] = m;
        if (rows.size() >= 2) {
            double ss = 0.0;
            for (const auto& row : rows) {
                const double d = row[b] - m;
                ss += d * d;
            }
            out.variance[b] = ss / static_cast<double>(rows.size() - 1);
        }
    }
    return out;
}

inline std::vector<double> all_radial_centers() {
    std::vector<double> c(kRadialBins);
    for (int i = 0; i < kRadialBins; ++i) c[static_cast<std::size_t>(i)] = radial_bin_center(i);
    return c;
}

inline std::vector<double> all_angular_centers() {
    std::vector<double> c(kAngularBins);
    for (int j = 0; j < kAngularBins; ++j) c[static_cast<std::size_t>(j)] = angular_bin_center(j);
    return c;
}

} // namespace detail

// Per-image profiles mapped in parallel (slot per image), moments taken
// sequentially afterwards. Failed images are skipped and reported.
inline RadialProfile corpus_radial(std::size_t count, const ImageProvider& provider,
                                   const CorpusOptions& opt, SpectralMode mode,
                                   std::vector<FileError>* errors = nullptr) {
    if (count == 0) throw contract_error("corpus is empty");
    const std::size_t n = std::min(count, opt.max_images);
    std::vector<std::vector<double>> rows(n);
    std::vector<FileError> local_errors;
    std::mutex error_mutex;
    ProfileGeometry geo(opt.crop_size, opt.crop_size);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        try {
            ImageF img = detail::prepare_image(provider(i), opt);
            rows[i] = radial_profile(img, mode, geo);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            local_errors.push_back({i, "item " + std::to_string(i), e.what()});
        }
    });
    std::vector<std::vector<double>> usable;
    usable.reserve(n);
    for (auto& row : rows)
        if (!row.empty()) usable.push_back(std::move(row));
    std::sort(local_errors.begin(), local_errors.end(),
              [](const FileError& a, const FileError& b) { return a.index < b.index; });
    if (errors) *errors = std::move(local_errors);
    if (usable.size() < std::max<std::size_t>(1, opt.min_usable))
        throw contract_error("only " + std::to_string(usable.size()) + " usable images");
    RadialProfile out;
    out.mode = mode;
    out.stats = detail::profile_moments(usable, detail::all_radial_centers(), geo.radial_population);
    return out;
}

inline AngularProfile corpus_angular(std::size_t count, const ImageProvider& provider,
                                     const CorpusOptions& opt,
                                     std::vector<FileError>* errors = nullptr) {
    if (count == 0) throw contract_error("corpus is empty");
    const std::size_t n = std::min(count, opt.max_images);
    std::vector<std::vector<double>> rows(n);
    std::vector<FileError> local_errors;
    std::mutex error_mutex;
    ProfileGeometry geo(opt.crop_size, opt.crop_size);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        try {
            ImageF img = detail::prepare_image(provider(i), opt);
            rows[i] = angular_profile(img, geo);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            local_errors.push_back({i, "item " + std::to_string(i), e.what()});
        }
    });
    std::vector<std::vector<double>> usable;
    usable.reserve(n);
    for (auto& row : rows)
        if (!row.empty()) usable.push_back(std::move(row));
    std::sort(local_errors.begin(), local_errors.end(),
              [](const FileError& a, const FileError& b) { return a.index < b.index; });
    if (errors) *errors = std::move(local_errors);
    if (usable.size() < std::max<std::size_t>(1, opt.min_usable))
        throw contract_error("only " + std::to_string(usable.size()) + " usable images");
    AngularProfile out;
    out.stats = detail::profile_moments(usable, detail::all_angular_centers(), geo.angular_population);
    return out;
}

inline RadialProfile corpus_radial(const std::vector<ImageF>& images, const CorpusOptions& opt,
                                   SpectralMode mode) {
    return corpus_radial(images.size(), [&](std::size_t i) { return images[i]; }, opt, mode);
}

// Radial (both modes) and angular profiles from a single transform per
// image -- what the analyze pipeline runs.
struct ProfileSet {
    RadialProfile radial_magnitude;
    RadialProfile radial_power;
    AngularProfile angular;
};

inline ProfileSet corpus_profiles(std::size_t count, const ImageProvider& provider,
                                  const CorpusOptions& opt,
                                  std::vector<FileError>* errors = nullptr) {
    if (count == 0) throw contract_error("corpus is empty");
    const std::size_t n = std::min(count, opt.max_images);
    struct Row {
        std::vector<double> mag, pow, ang;
    };
    std::vector<Row> rows(n);
    std::vector<FileError> local_errors;
    std::mutex error_mutex;
    ProfileGeometry geo(opt.crop_size, opt.crop_size);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        try {
            ImageF img = detail::prepare_image(provider(i), opt);
            ComplexGrid spec = dft2(detail::std_normalized(img));
            std::vector<double> mag_sum(kRadialBins, 0.0), pow_sum(kRadialBins, 0.0),
                ang_sum(kAngularBins, 0.0);
            for (std::size_t s = 0; s < spec.size(); ++s) {
                const double p = std::norm(spec.values[s]);
                const double a = std::sqrt(p);
                const int rb = geo.radial_bin[s];
                if (rb >= 0) {
                    mag_sum[static_cast<std::size_t>(rb)] += a;
                    pow_sum[static_cast<std::size_t>(rb)] += p;
                }
                const int ab = geo.angular_bin[s];
                if (ab >= 0) ang_sum[static_cast<std::size_t>(ab)] += a;
            }
            Row row;
            row.mag.assign(kRadialBins, std::numeric_limits<double>::quiet_NaN());
            row.pow.assign(kRadialBins, std::numeric_limits<double>::quiet_NaN());
            row.ang.assign(kAngularBins, std::numeric_limits<double>::quiet_NaN());
            for (int b = 0; b < kRadialBins; ++b) {
                const auto pop = geo.radial_population[static_cast<std::size_t>(b)];
                if (pop == 0) continue;
                row.mag[static_cast<std::size_t>(b)] = mag_sum[static_cast<std::size_t>(b)] / pop;
                row.pow[static_cast<std::size_t>(b)] = pow_sum[static_cast<std::size_t>(b)] / pop;
            }
            for (int b = 0; b < kAngularBins; ++b) {
                const auto pop = geo.angular_population[static_cast<std::size_t>(b)];
                if (pop == 0) continue;
                row.ang[static_cast<std::size_t>(b)] = ang_sum[static_cast<std::size_t>(b)] / pop;
            }
            rows[i] = std::move(row);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            local_errors.push_back({i, "item " + std::to_string(i), e.what()});
        }
    });
    std::vector<std::vector<double>> mags, pows, angs;
    for (auto& row : rows) {
        if (row.mag.empty()) continue;
        mags.push_back(std::move(row.mag));
        pows.push_back(std::move(row.pow));
        angs.push_back(std::move(row.ang));
    }
    std::sort(local_errors.begin(), local_errors.end(),
              [](const FileError& a, const FileError& b) { return a.index < b.index; });
    if (errors) *errors = std::move(local_errors);
    if (mags.size() < std::max<std::size_t>(1, opt.min_usable))
        throw contract_error("only " + std::to_string(mags.size()) + " usable images");
    ProfileSet out;
    out.radial_magnitude.mode = SpectralMode::magnitude;
    out.radial_magnitude.stats =
        detail::profile_moments(mags, detail::all_radial_centers(), geo.radial_population);
    out.radial_power.mode = SpectralMode::power;
    out.radial_power.stats =
        detail::profile_moments(pows, detail::all_radial_centers(), geo.radial_population);
    out.angular.stats =
        detail::profile_moments(angs, detail::all_angular_centers(), geo.angular_population);
    return out;
}

inline AngularProfile corpus_angular(const std::vector<ImageF>& images, const CorpusOptions& opt) {
    return corpus_angular(images.size(), [&](std::size_t i) { return images[i]; }, opt);
}

// Signed per-orientation separation between a subject corpus and a
// reference corpus: F(theta) = (mu_s - mu_0) / sqrt(var_s + var_0).
// Bins with zero combined variance are flagged undefined, not fabricated.
struct FisherProfile {
    std::vector<double> centers;
    std::vector<double> values;  // NaN where undefined
    std::vector<bool> defined;
    std::string subject_id;
    std::string reference_id;
};

inline FisherProfile fisher_profile(const AngularProfile& subject, const AngularProfile& reference) {
    const auto& s = subject.stats;
    const auto& r = reference.stats;
    if (s.centers.size() != r.centers.size())
        throw contract_error("fisher profile requires matching bin structure");
    if (s.image_count < 2 || r.image_count < 2)
        throw contract_error("fisher profile requires >= 2 images per corpus");
    FisherProfile out;
    out.centers = s.centers;
    out.values.assign(s.centers.size(), std::numeric_limits<double>::quiet_NaN());
    out.defined.assign(s.centers.size(), false);
    for (std::size_t b = 0; b < s.centers.size(); ++b) {
        const double pooled = s.variance[b] + r.variance[b];
        if (!(pooled > 0.0) || std::isnan(s.mean[b]) || std::isnan(r.mean[b])) continue;
        out.values[b] = (s.mean[b] - r.mean[b]) / std::sqrt(pooled);
        out.defined[b] = true;
    }
    return out;
}

struct PowerLawFit {
    double alpha = 0.0;     // always the power-spectrum exponent
    double intercept = 0.0; // log-domain intercept of the fitted line
    double rmse = 0.0;      // log-domain residual RMS
};

// Ordinary least squares of log mean vs log rho over bins whose centers
// lie in [rho_min, rho_max]. In magnitude mode the slope is doubled so
// alpha always refers to the power-spectrum decay exponent.
inline PowerLawFit fit_power_law(const RadialProfile& profile, double rho_min = 0.2,
                                 double rho_max = 0.5) {
    const auto& s = profile.stats;
    std::vector<double> xs, ys;
    for (std::size_t b = 0; b < s.centers.size(); ++b) {
        const double rho = s.centers[b];
        if (rho < rho_min || rho > rho_max) continue;
        if (s.population[b] == 0 || std::isnan(s.mean[b])) continue;
        if (!(s.mean[b] > 0.0))
            throw contract_error("nonpositive mean in radial bin " + std::to_string(b) +
                                 " (rho=" + std::to_string(rho) + ")");
        xs.push_back(std::log(rho));
        ys.push_back(std::log(s.mean[b]));
    }
    if (xs.size() < 8)
        throw contract_error("need >= 8 non-empty bins in [" + std::to_string(rho_min) + "," +
                             std::to_string(rho_max) + "], have " + std::to_string(xs.size()));
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (slope * xs[i] + intercept);
        ss += r * r;
    }
    PowerLawFit fit;
    fit.alpha = profile.mode == SpectralMode::power ? -slope : -2.0 * slope;
    fit.intercept = intercept;
    fit.rmse = std::sqrt(ss / n);
    return fit;
}

} // namespace specprint
