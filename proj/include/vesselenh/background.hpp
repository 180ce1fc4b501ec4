#pragma once

#include <array>
#include <cstdint>

#include "vesselenh/error.hpp"
#include "vesselenh/grayscale.hpp"
#include "vesselenh/image.hpp"

namespace vesselenh {

/// Brightness thresholding: pixels darker than the threshold become 0.
/// Brightness is the gray value itself, or rounded BT.601 luma for RGB.
struct BackgroundConfig {
    enum class Mode { Fixed, Otsu };
    Mode mode = Mode::Fixed;
    int threshold = 10;

    void validate() const {
        detail::require(mode == Mode::Otsu || (threshold >= 0 && threshold <= 255),
                        "background threshold must be in [0, 255]");
    }

    friend bool operator==(const BackgroundConfig&, const BackgroundConfig&) = default;
};

inline ImageU8 brightness(const ImageU8& img) {
    return img.channels() == 1 ? img : rgb_to_luma(img);
}

inline std::array<std::uint64_t, 256> histogram(const ImageU8& gray) {
    std::array<std::uint64_t, 256> h{};
    for (auto v : gray.samples()) ++h[v];
    return h;
}

/// Otsu's threshold t in [1, 255] for the split {v < t} / {v >= t},
/// maximizing the between-class variance. The smallest maximizer wins.
/// Returns 0 (nothing removed) for single-valued histograms.
inline int otsu_threshold(const std::array<std::uint64_t, 256>& hist) {
    double total = 0.0, total_sum = 0.0;
    for (int v = 0; v < 256; ++v) {
        total += static_cast<double>(hist[v]);
        total_sum += static_cast<double>(hist[v]) * v;
    }
    int best_t = 0;
    double best = 0.0;
    double n0 = 0.0, sum0 = 0.0;
    for (int t = 1; t < 256; ++t) {
        n0 += static_cast<double>(hist[t - 1]);
        sum0 += static_cast<double>(hist[t - 1]) * (t - 1);
        const double n1 = total - n0;
        if (n0 == 0.0 || n1 == 0.0) continue;
        const double diff = sum0 / n0 - (total_sum - sum0) / n1;
        const double between = n0 * n1 * diff * diff;
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

inline int resolve_threshold(const ImageU8& img, const BackgroundConfig& cfg) {
    cfg.validate();
    return cfg.mode == BackgroundConfig::Mode::Otsu ? otsu_threshold(histogram(brightness(img))) : cfg.threshold;
}

inline ImageU8 remove_background(const ImageU8& img, const BackgroundConfig& cfg = {}) {
    const int threshold = resolve_threshold(img, cfg);
    const ImageU8 lum = brightness(img);
    ImageU8 out = img;
    const int c = img.channels();
    auto dst = out.samples();
    const auto b = lum.samples();
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < threshold)
            for (int k = 0; k < c; ++k) dst[i * c + k] = 0;
    }
    return out;
}

}  // namespace vesselenh
