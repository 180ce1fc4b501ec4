#pragma once

// Sampled Gaussian derivative kernels and separable correlation with
// replicated borders.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <type_traits>
#include <vector>

#include "vesselenh/error.hpp"
#include "vesselenh/image.hpp"

namespace vesselenh {

using PlaneD = Image<double>;

/// Correlation taps over offsets -radius..radius: out(x) = sum_t in(x + t) * taps[t + radius].
struct Kernel {
    int radius = 0;
    std::vector<double> taps;

    double at(int t) const noexcept { return taps[static_cast<std::size_t>(t + radius)]; }
};

inline int kernel_radius(double sigma) { return static_cast<int>(std::ceil(4.0 * sigma)); }

namespace detail {

template <typename F>
Kernel sample_kernel(double sigma, F f) {
    detail::require(sigma > 0.0 && std::isfinite(sigma), "sigma must be > 0");
    Kernel k;
    k.radius = kernel_radius(sigma);
    k.taps.resize(static_cast<std::size_t>(2 * k.radius + 1));
    for (int t = -k.radius; t <= k.radius; ++t) {
        const double g = std::exp(-0.5 * t * t / (sigma * sigma)) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
        k.taps[static_cast<std::size_t>(t + k.radius)] = f(static_cast<double>(t), g);
    }
    return k;
}

}  // namespace detail

/// G_sigma, normalized to unit sum.
inline Kernel gaussian_kernel(double sigma) {
    auto k = detail::sample_kernel(sigma, [](double, double g) { return g; });
    double sum = 0.0;
    for (double v : k.taps) sum += v;
    for (double& v : k.taps) v /= sum;
    return k;
}

/// d/dx of G_sigma * I, as correlation taps t / sigma^2 * G(t). Rescaled so
/// that a unit ramp yields exactly 1.
inline Kernel gaussian_d1_kernel(double sigma) {
    auto k = detail::sample_kernel(sigma, [sigma](double t, double g) { return t / (sigma * sigma) * g; });
    double moment = 0.0;
    for (int t = -k.radius; t <= k.radius; ++t) moment += t * k.at(t);
    for (double& v : k.taps) v /= moment;
    return k;
}

/// d^2/dx^2 of G_sigma * I. Made zero-sum (constants map to 0) and rescaled
/// so that x^2 yields exactly 2.
inline Kernel gaussian_d2_kernel(double sigma) {
    const double s2 = sigma * sigma;
    auto k = detail::sample_kernel(sigma, [s2](double t, double g) { return (t * t / s2 - 1.0) / s2 * g; });
    double mean = 0.0;
    for (double v : k.taps) mean += v;
    mean /= static_cast<double>(k.taps.size());
    for (double& v : k.taps) v -= mean;
    double moment = 0.0;
    for (int t = -k.radius; t <= k.radius; ++t) moment += static_cast<double>(t) * t * k.at(t);
    for (double& v : k.taps) v *= 2.0 / moment;
    return k;
}

/// Correlates every row with `k` (filtering along x).
inline PlaneD correlate_rows(const PlaneD& in, const Kernel& k) {
    const int w = in.width();
    PlaneD out(w, in.height(), 1);
    std::vector<double> padded(static_cast<std::size_t>(w + 2 * k.radius));
    for (int y = 0; y < in.height(); ++y) {
        const auto src = in.row(y);
        for (int i = 0; i < static_cast<int>(padded.size()); ++i)
            padded[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(std::clamp(i - k.radius, 0, w - 1))];
        auto dst = out.row(y);
        for (int x = 0; x < w; ++x) {
            const double* p = padded.data() + x;
            double acc = 0.0;
            for (std::size_t t = 0; t < k.taps.size(); ++t) acc += p[t] * k.taps[t];
            dst[static_cast<std::size_t>(x)] = acc;
        }
    }
    return out;
}

/// Correlates every column with `k` (filtering along y).
inline PlaneD correlate_cols(const PlaneD& in, const Kernel& k) {
    const int h = in.height();
    PlaneD out(in.width(), h, 1);
    for (int y = 0; y < h; ++y) {
        auto dst = out.row(y);
        for (int t = -k.radius; t <= k.radius; ++t) {
            const double c = k.at(t);
            const auto src = in.row(std::clamp(y + t, 0, h - 1));
            for (std::size_t x = 0; x < dst.size(); ++x) dst[x] += c * src[x];
        }
    }
    return out;
}

/// Single-channel plane in double precision. U8 samples are normalized to
/// [0, 1]; real-valued samples are taken as-is.
template <typename T>
PlaneD to_plane(const Image<T>& img) {
    detail::require(img.channels() == 1, "expected a 1-channel image");
    std::vector<double> data(img.sample_count());
    std::transform(img.samples().begin(), img.samples().end(), data.begin(), [](T v) {
        if constexpr (std::is_same_v<T, std::uint8_t>)
            return static_cast<double>(v) / 255.0;
        else
            return static_cast<double>(v);
    });
    return PlaneD(img.width(), img.height(), 1, std::move(data));
}

/// G_sigma * I, separable.
template <typename T>
PlaneD gaussian_smooth(const Image<T>& img, double sigma) {
    const auto g = gaussian_kernel(sigma);
    return correlate_cols(correlate_rows(to_plane(img), g), g);
}

}  // namespace vesselenh
