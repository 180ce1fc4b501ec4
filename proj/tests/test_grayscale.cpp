#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle/reference.hpp"
#include "test_support.hpp"
#include "vesselenh/grayscale.hpp"

using namespace vesselenh;

TEST(Grayscale, KnownPixels) {
    EXPECT_EQ(rgb_to_gray_pixel(0, 0, 0), 0);
    EXPECT_EQ(rgb_to_gray_pixel(255, 255, 255), 64);  // I1 = 63.75
    EXPECT_EQ(rgb_to_gray_pixel(0, 255, 0), 0);       // I1 < 0, clamped
    EXPECT_EQ(rgb_to_gray_pixel(255, 0, 0), 42);      // I1 = 42.34
}

TEST(Grayscale, IntermediatesOfKnownPixels) {
    const auto red = gray_intermediates(255, 0, 0);
    EXPECT_NEAR(red.Y, 76.245, 1e-9);
    EXPECT_NEAR(red.UV, 84.37389, 1e-5);
    EXPECT_NEAR(red.I1, 42.3434725, 1e-9);

    const auto green = gray_intermediates(0, 255, 0);
    EXPECT_NEAR(green.UV, -191.3, 0.05);
    EXPECT_NEAR(green.I1, -26.57, 0.01);

    const auto white = gray_intermediates(255, 255, 255);
    EXPECT_NEAR(white.R4, 85.0, 1e-9);
    EXPECT_NEAR(white.UV, 0.0, 1e-9);
    EXPECT_NEAR(white.I1, 63.75, 1e-9);
}

TEST(Grayscale, IntermediateIdentities) {
    std::mt19937 rng(9);
    for (int i = 0; i < 1000; ++i) {
        const auto r = static_cast<std::uint8_t>(rng()), g = static_cast<std::uint8_t>(rng()),
                   b = static_cast<std::uint8_t>(rng());
        const auto t = gray_intermediates(r, g, b);
        EXPECT_DOUBLE_EQ(t.UV, t.U + t.V);
        EXPECT_DOUBLE_EQ(t.R4, (t.R1 + t.R2 + t.R3) / 3.0);
        EXPECT_DOUBLE_EQ(t.I1, (t.R4 + t.G4 + t.B4 + t.UV) / 4.0);
        // The exact path and the double path agree to rounding noise.
        const auto ex = gray_exact(r, g, b);
        EXPECT_NEAR(static_cast<double>(ex.numerator) / static_cast<double>(ex.denominator), t.I1, 1e-9);
    }
}

TEST(Grayscale, AchromaticIsQuarterForEveryLevel) {
    for (int v = 0; v < 256; ++v) {
        const auto u = static_cast<std::uint8_t>(v);
        // round(v / 4), half away from zero
        EXPECT_EQ(rgb_to_gray_pixel(u, u, u), (v + 2) / 4) << "v=" << v;
    }
}

TEST(Grayscale, AchromaticIsMonotone) {
    for (int v = 1; v < 256; ++v) {
        const auto a = static_cast<std::uint8_t>(v - 1), b = static_cast<std::uint8_t>(v);
        EXPECT_LE(rgb_to_gray_pixel(a, a, a), rgb_to_gray_pixel(b, b, b));
    }
}

TEST(Grayscale, MatchesLiteralEvaluationOnCubeCornersAndRandom) {
    for (int r : {0, 255})
        for (int g : {0, 255})
            for (int b : {0, 255})
                EXPECT_EQ(rgb_to_gray_pixel(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                            static_cast<std::uint8_t>(b)),
                          oracle::gray_direct(r, g, b));
    std::mt19937 rng(10);
    for (int i = 0; i < 2000; ++i) {
        const int r = rng() & 0xFF, g = rng() & 0xFF, b = rng() & 0xFF;
        ASSERT_EQ(rgb_to_gray_pixel(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                    static_cast<std::uint8_t>(b)),
                  oracle::gray_direct(r, g, b));
    }
}

TEST(Grayscale, Eq6VerbatimVariant) {
    GrayscaleOptions verbatim;
    verbatim.eq6_verbatim = true;
    // With G = B the two readings coincide.
    EXPECT_EQ(rgb_to_gray_pixel(10, 90, 90, verbatim), rgb_to_gray_pixel(10, 90, 90));
    // Pure blue: the verbatim form drops B2 and B3.
    EXPECT_LT(rgb_to_gray_pixel(0, 0, 255, verbatim), rgb_to_gray_pixel(0, 0, 255));
    std::mt19937 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const int r = rng() & 0xFF, g = rng() & 0xFF, b = rng() & 0xFF;
        ASSERT_EQ(rgb_to_gray_pixel(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                    static_cast<std::uint8_t>(b), verbatim),
                  oracle::gray_direct(r, g, b, true));
    }
}

TEST(Grayscale, RescaleRestoresAchromaticRange) {
    GrayscaleOptions rescale;
    rescale.rescale = true;
    for (int v = 0; v < 256; ++v) {
        const auto u = static_cast<std::uint8_t>(v);
        EXPECT_EQ(rgb_to_gray_pixel(u, u, u, rescale), v);
    }
}

TEST(Grayscale, ImageIsPointwise) {
    std::mt19937 rng(12);
    const auto img = testing_support::random_image(13, 11, 3, rng);
    const auto gray = rgb_to_gray(img);
    ASSERT_EQ(gray.channels(), 1);
    ASSERT_EQ(gray.width(), 13);
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 13; ++x) EXPECT_EQ(gray(x, y), rgb_to_gray_pixel(img(x, y, 0), img(x, y, 1), img(x, y, 2)));
}

TEST(Grayscale, BlackImage) {
    const ImageU8 black(2, 2, 3);
    EXPECT_EQ(rgb_to_gray(black), ImageU8(2, 2, 1));
}

TEST(Grayscale, RejectsSingleChannel) {
    EXPECT_THROW(rgb_to_gray(ImageU8(2, 2, 1)), ContractViolation);
}
