#pragma once

#include <array>
#include <cstdint>

#include "vesselenh/error.hpp"
#include "vesselenh/image.hpp"

namespace vesselenh {

struct MedianConfig {
    // Odd window side length; borders replicate the edge pixels.
    int window = 5;

    void validate() const {
        detail::require(window >= 1 && window % 2 == 1, "median window must be odd and >= 1");
    }

    friend bool operator==(const MedianConfig&, const MedianConfig&) = default;
};

/// k x k median with replicated borders. Each row keeps a 256-bin histogram
/// of its window and the current median with the count of samples below it;
/// sliding one column moves k samples in, k out, and walks the median a few
/// bins at most.
inline ImageU8 median_filter(const ImageU8& img, const MedianConfig& cfg = {}) {
    cfg.validate();
    detail::require(img.channels() == 1, "median_filter requires a 1-channel image");
    const int k = cfg.window;
    if (k == 1) return img;

    const int r = k / 2;
    const int w = img.width();
    const int h = img.height();
    const int rank = (k * k) / 2;  // zero-based index of the middle sample
    ImageU8 out(w, h, 1);

    std::array<int, 256> hist{};
    for (int y = 0; y < h; ++y) {
        hist.fill(0);
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) ++hist[img.clamped(dx, y + dy)];

        int med = 0;
        int below = 0;
        while (below + hist[med] <= rank) below += hist[med++];
        out(0, y) = static_cast<std::uint8_t>(med);

        for (int x = 1; x < w; ++x) {
            const int leaving = x - r - 1;
            const int entering = x + r;
            for (int dy = -r; dy <= r; ++dy) {
                const int v_out = img.clamped(leaving, y + dy);
                const int v_in = img.clamped(entering, y + dy);
                --hist[v_out];
                if (v_out < med) --below;
                ++hist[v_in];
                if (v_in < med) ++below;
            }
            while (below > rank) below -= hist[--med];
            while (below + hist[med] <= rank) below += hist[med++];
            out(x, y) = static_cast<std::uint8_t>(med);
        }
    }
    return out;
}

}  // namespace vesselenh
