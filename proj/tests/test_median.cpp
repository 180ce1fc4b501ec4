#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracle/reference.hpp"
#include "test_support.hpp"
#include "vesselenh/median.hpp"
#include "vesselenh/synthetic.hpp"

using namespace vesselenh;

TEST(Median, WindowOneIsIdentity) {
    std::mt19937 rng(31);
    const auto img = testing_support::random_image(17, 9, 1, rng);
    EXPECT_EQ(median_filter(img, {1}), img);
}

TEST(Median, ConstantImage) {
    const ImageU8 img(12, 7, 1, 99);
    EXPECT_EQ(median_filter(img, {5}), img);
}

TEST(Median, ThreeByThreeExample) {
    ImageU8 img(3, 3, 1);
    std::uint8_t v = 1;
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) img(x, y) = v++;
    EXPECT_EQ(median_filter(img, {3})(1, 1), 5);
}

TEST(Median, RemovesIsolatedSpike) {
    ImageU8 img(9, 9, 1, 20);
    img(4, 4) = 255;
    EXPECT_EQ(median_filter(img, {3}), ImageU8(9, 9, 1, 20));
}

TEST(Median, MatchesNaiveReference) {
    std::mt19937 rng(32);
    for (int k : {3, 5, 7, 9}) {
        for (auto [w, h] : {std::pair{1, 1}, std::pair{2, 5}, std::pair{23, 17}, std::pair{40, 3}}) {
            const auto img = testing_support::random_image(w, h, 1, rng);
            ASSERT_EQ(median_filter(img, {k}), oracle::median_naive(img, k)) << k << " " << w << "x" << h;
        }
        const auto phantom = synthetic::vein_phantom(64, 48, 1, 3, 1);
        ASSERT_EQ(median_filter(phantom, {k}), oracle::median_naive(phantom, k)) << k;
    }
}

TEST(Median, OutputIsAWindowSampleBetweenMinAndMax) {
    std::mt19937 rng(33);
    const auto img = testing_support::random_image(31, 29, 1, rng);
    const int k = 5, r = 2;
    const auto out = median_filter(img, {k});
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            int lo = 255, hi = 0;
            bool found = false;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int v = img.clamped(x + dx, y + dy);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                    found = found || v == out(x, y);
                }
            EXPECT_TRUE(found);
            EXPECT_GE(out(x, y), lo);
            EXPECT_LE(out(x, y), hi);
        }
}

TEST(Median, TranslationEquivariantAwayFromBorders) {
    std::mt19937 rng(34);
    const auto img = testing_support::random_image(40, 40, 1, rng);
    ImageU8 shifted(40, 40, 1);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) shifted(x, y) = img.clamped(x - 3, y - 2);
    const auto a = median_filter(img, {5});
    const auto b = median_filter(shifted, {5});
    for (int y = 8; y < 32; ++y)
        for (int x = 8; x < 32; ++x) EXPECT_EQ(b(x, y), a(x - 3, y - 2));
}

TEST(Median, RejectsBadInput) {
    EXPECT_THROW(median_filter(ImageU8(4, 4, 1), {4}), ContractViolation);
    EXPECT_THROW(median_filter(ImageU8(4, 4, 1), {0}), ContractViolation);
    EXPECT_THROW(median_filter(ImageU8(4, 4, 1), {-3}), ContractViolation);
    EXPECT_THROW(median_filter(ImageU8(4, 4, 3), {3}), ContractViolation);
}
