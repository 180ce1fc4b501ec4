#pragma once

// Deterministic test imagery: a forearm-like phantom with dark curved
// vessels on a bright, vignetted skin patch surrounded by near-black
// background. The generator uses its own integer RNG so output is identical
// across standard libraries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "vesselenh/image.hpp"
#include "vesselenh/y4m.hpp"

namespace vesselenh::synthetic {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n).
    std::uint32_t below(std::uint32_t n) noexcept { return static_cast<std::uint32_t>(next() % n); }

    // Uniform in [0, 1).
    double unit() noexcept { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

private:
    std::uint64_t state_;
};

/// Random image with uniformly distributed samples.
inline ImageU8 noise_image(int width, int height, int channels, std::uint64_t seed) {
    SplitMix64 rng(seed);
    ImageU8 img(width, height, channels);
    for (auto& v : img.samples()) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

/// `frame` shifts the vessel pattern slowly so consecutive frames differ.
inline ImageU8 vein_phantom(int width, int height, int frame = 0, std::uint64_t seed = 1, int channels = 3) {
    SplitMix64 rng(seed * 1000003ull + static_cast<std::uint64_t>(frame));
    ImageU8 img(width, height, channels);
    const double cx = 0.5 * width, cy = 0.5 * height;
    const double ax = 0.46 * width, ay = 0.40 * height;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double drift = 0.07 * frame;

    struct Vessel {
        double base, amp, period, phase, radius, depth;
    };
    const Vessel vessels[] = {
        {0.30, 0.06, 0.90, 0.3, 0.012, 0.55},
        {0.52, 0.09, 0.65, 1.7, 0.018, 0.65},
        {0.70, 0.05, 1.20, 4.1, 0.009, 0.45},
    };

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double ex = (x - cx) / ax, ey = (y - cy) / ay;
            const double r2 = ex * ex + ey * ey;
            double skin = r2 < 1.0 ? 0.35 + 0.65 * std::sqrt(1.0 - r2) : 0.02;
            if (r2 < 1.0) {
                const double u = static_cast<double>(x) / width;
                for (const auto& v : vessels) {
                    const double centre = (v.base + v.amp * std::sin(two_pi * u / v.period + v.phase + drift)) * height;
                    const double d = (y - centre) / (v.radius * height + 1.0);
                    skin *= 1.0 - v.depth * std::exp(-0.5 * d * d);
                }
                // A branch running diagonally.
                const double t = (x - 0.2 * width) * 0.8 - (y - 0.1 * height) * 0.6;
                const double d = t / (0.010 * width + 1.0);
                skin *= 1.0 - 0.4 * std::exp(-0.5 * d * d);
            }
            const double noise = (rng.unit() - 0.5) * 10.0;
            if (channels == 1) {
                img(x, y) = static_cast<std::uint8_t>(std::clamp(std::round(skin * 235.0 + noise), 0.0, 255.0));
            } else {
                img(x, y, 0) = static_cast<std::uint8_t>(std::clamp(std::round(skin * 245.0 + noise), 0.0, 255.0));
                img(x, y, 1) = static_cast<std::uint8_t>(std::clamp(std::round(skin * 190.0 + noise), 0.0, 255.0));
                img(x, y, 2) = static_cast<std::uint8_t>(std::clamp(std::round(skin * 165.0 + noise), 0.0, 255.0));
            }
        }
    }
    return img;
}

inline VideoStream phantom_stream(int width, int height, int frames, std::uint64_t seed = 1) {
    VideoStream s(width, height, FrameRate{30, 1});
    s.reserve(static_cast<std::size_t>(frames));
    for (int f = 0; f < frames; ++f) s.push_back(vein_phantom(width, height, f, seed));
    return s;
}

}  // namespace vesselenh::synthetic
