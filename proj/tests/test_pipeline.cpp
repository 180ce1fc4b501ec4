#include <gtest/gtest.h>

#include <atomic>
#include <random>

#include "oracle/reference.hpp"
#include "test_support.hpp"
#include "vesselenh/pipeline_json.hpp"
#include "vesselenh/synthetic.hpp"

using namespace vesselenh;

TEST(Canonical, ShapeAndGridOrder) {
    const auto spec = canonical_pipeline();
    ASSERT_EQ(spec.stages.size(), 7u);
    const StageKind expected[] = {StageKind::Roi,    StageKind::BackgroundRemoval, StageKind::Grayscale,
                                  StageKind::Median, StageKind::Clahe,             StageKind::Clahe,
                                  StageKind::Clahe};
    for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(stage_kind(spec.stages[i]), expected[i]) << i;
    const int grids[] = {4, 10, 16};
    for (int k = 0; k < 3; ++k) {
        const auto& cfg = std::get<ClaheStage>(spec.stages[4 + k]).cfg;
        EXPECT_EQ(cfg.grid_cols, grids[k]);
        EXPECT_EQ(cfg.grid_rows, grids[k]);
    }
    for (const auto& s : spec.stages) EXPECT_NE(stage_kind(s), StageKind::Frangi);
}

TEST(PipelineJson, CanonicalRoundTrips) {
    const auto spec = canonical_pipeline();
    const auto text = spec_to_json(spec).dump();
    EXPECT_EQ(parse_spec(text), spec);
    EXPECT_EQ(spec_to_json(parse_spec(text)).dump(), text);
}

TEST(PipelineJson, EveryStageKindRoundTrips) {
    PipelineSpec spec;
    spec.name = "all";
    spec.parallelism = 3;
    spec.queue_depth = 5;
    FrangiConfig fc;
    fc.scales = {1, 2.5};
    fc.c = 0.3;
    fc.dark_vessels = false;
    spec.stages = {RoiStage{Roi{1, 2, 30, 20}},
                   BackgroundStage{{BackgroundConfig::Mode::Otsu, 10}},
                   GrayscaleStage{{true, true}},
                   MedianStage{{7}},
                   ClaheStage{{3, 5, 1.5, 64}},
                   FrangiStage{fc},
                   InvertStage{}};
    EXPECT_EQ(parse_spec(spec_to_json(spec).dump()), spec);
}

TEST(PipelineJson, ParsesDocumentedForm) {
    const auto spec = parse_spec(R"({"stages":[{"kind":"clahe","grid":"4x4","clip_limit":2.0}],
                                     "parallelism":1,"queue_depth":8})");
    ASSERT_EQ(spec.stages.size(), 1u);
    EXPECT_EQ(std::get<ClaheStage>(spec.stages[0]).cfg, (ClaheConfig{4, 4, 2.0, 256}));
}

TEST(PipelineJson, Rejections) {
    EXPECT_THROW(parse_spec("{\"stages\": []}"), ContractViolation);
    EXPECT_THROW(parse_spec("{}"), ContractViolation);
    EXPECT_THROW(parse_spec("{\"stages\": [{\"kind\": \"sharpen\"}]}"), ContractViolation);
    EXPECT_THROW(parse_spec("{\"stages\": [{\"kind\": \"median\", \"median_window\": 4}]}"), ContractViolation);
    EXPECT_THROW(parse_spec("{\"stages\": [{\"kind\": \"clahe\", \"grid\": \"4by4\"}]}"), ContractViolation);
    EXPECT_THROW(parse_spec("{\"stages\": [{\"kind\": \"background\", \"threshold\": \"mean\"}]}"),
                 ContractViolation);
    EXPECT_THROW(parse_spec("{\"stages\": [{\"kind\": \"frangi\", \"c\": \"big\"}]}"), ContractViolation);
    EXPECT_THROW(parse_spec("{\"stages\": [{\"kind\": \"invert\"}], \"parallelism\": 0}"), ContractViolation);
    EXPECT_THROW(parse_spec("{\"stages\": [{\"kind\": \"invert\"}],"), FormatError);
}

TEST(PipelineValidate, RejectsEmptyAndMismatch) {
    EXPECT_THROW(validate(PipelineSpec{}), ContractViolation);
    PipelineSpec spec;
    spec.stages = {MedianStage{}};
    EXPECT_NO_THROW(validate(spec, 32, 32, 1));
    EXPECT_THROW(validate(spec, 32, 32, 3), ContractViolation);
    spec.stages = {GrayscaleStage{}, ClaheStage{{16, 16, 2.0, 256}}};
    EXPECT_NO_THROW(validate(spec, 32, 32, 3));
    EXPECT_THROW(validate(spec, 8, 32, 3), ContractViolation);
    spec.stages = {RoiStage{Roi{10, 10, 30, 30}}};
    EXPECT_THROW(validate(spec, 32, 32, 3), ContractViolation);
}

TEST(PipelineValidate, MismatchIsCaughtBeforeAnyFrame) {
    VideoStream frames(16, 16, {});
    frames.push_back(ImageU8(16, 16, 3));
    PipelineSpec spec;
    spec.stages = {MedianStage{}};
    int admitted = 0;
    RunOptions opts;
    opts.on_admit = [&](std::size_t) { ++admitted; };
    EXPECT_THROW(run_pipeline(spec, frames, opts), ContractViolation);
    EXPECT_EQ(admitted, 0);
}

TEST(Background, Examples) {
    EXPECT_EQ(remove_background(ImageU8(5, 4, 3, 200)), ImageU8(5, 4, 3, 200));
    EXPECT_EQ(remove_background(ImageU8(5, 4, 1, 9)), ImageU8(5, 4, 1));
    BackgroundConfig t50{BackgroundConfig::Mode::Fixed, 50};
    ImageU8 img(2, 1, 3);
    img(0, 0, 0) = 40, img(0, 0, 1) = 60, img(0, 0, 2) = 50;  // luma 52.9 -> kept
    img(1, 0, 0) = 200, img(1, 0, 1) = 10, img(1, 0, 2) = 10;  // luma 66.8 -> kept
    EXPECT_EQ(remove_background(img, t50), img);
    img(1, 0, 0) = 100;  // luma 36.9 -> dropped in all channels
    const auto out = remove_background(img, t50);
    EXPECT_EQ(out(1, 0, 0), 0);
    EXPECT_EQ(out(1, 0, 1), 0);
    EXPECT_EQ(out(0, 0, 1), 60);
}

TEST(Background, OtsuOnBimodalImage) {
    ImageU8 img(20, 10, 1);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 20; ++x) img(x, y) = x < 10 ? 40 : 200;
    const BackgroundConfig otsu{BackgroundConfig::Mode::Otsu, 0};
    const int t = resolve_threshold(img, otsu);
    EXPECT_GT(t, 40);
    EXPECT_LT(t, 200);
    const auto out = remove_background(img, otsu);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 20; ++x) EXPECT_EQ(out(x, y), x < 10 ? 0 : 200);
}

TEST(Background, OtsuMatchesBruteForce) {
    std::mt19937 rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        std::array<std::uint64_t, 256> hist{};
        const int modes = 1 + trial % 4;
        for (int m = 0; m < modes; ++m) {
            std::normal_distribution<double> d(rng() % 256, 2 + rng() % 30);
            for (int i = 0; i < 500; ++i) ++hist[static_cast<std::size_t>(std::clamp<long>(std::lround(d(rng)), 0, 255))];
        }
        int best_t = 0;
        double best = 0;
        for (int t = 1; t < 256; ++t) {
            const double v = oracle::between_class_variance(hist, t);
            if (v > best * (1 + 1e-12)) {
                best = v;
                best_t = t;
            }
        }
        const int got = otsu_threshold(hist);
        // Equal-variance candidates are allowed to differ only within a flat run.
        EXPECT_NEAR(oracle::between_class_variance(hist, got), best, 1e-9 * best) << trial;
        EXPECT_LE(got, best_t) << trial;
    }
}

TEST(Background, OtsuSingleValued) {
    std::array<std::uint64_t, 256> hist{};
    hist[77] = 100;
    EXPECT_EQ(otsu_threshold(hist), 0);
}

TEST(Stages, InvertAndGrayPassThrough) {
    std::mt19937 rng(52);
    const auto img = testing_support::random_image(9, 7, 1, rng);
    EXPECT_EQ(invert(invert(img)), img);
    EXPECT_EQ(apply_stage(GrayscaleStage{}, img), img);
    EXPECT_EQ(apply_stage(RoiStage{}, img), img);
    EXPECT_EQ(apply_stage(RoiStage{Roi{2, 1, 3, 4}}, img), extract_roi(img, Roi{2, 1, 3, 4}));
}

TEST(Pipeline, SingleFrameMatchesHandChain) {
    const auto frame = synthetic::vein_phantom(160, 120, 0, 9, 3);
    VideoStream in(160, 120, {});
    in.push_back(frame);
    const auto run = run_pipeline(canonical_pipeline(), in);
    ASSERT_EQ(run.output.size(), 1u);

    ImageU8 img = remove_background(frame, BackgroundConfig{BackgroundConfig::Mode::Fixed, 10});
    img = rgb_to_gray(img);
    img = oracle::median_naive(img, 5);
    img = oracle::NaiveClahe{4, 4, 256, 2.0}.apply(img);
    img = oracle::NaiveClahe{10, 10, 256, 2.0}.apply(img);
    img = oracle::NaiveClahe{16, 16, 256, 2.0}.apply(img);
    EXPECT_EQ(run.output[0], img);
}

TEST(Pipeline, RoiStageCropsFirst) {
    const auto frame = synthetic::vein_phantom(64, 48, 0, 2, 3);
    auto spec = canonical_pipeline();
    spec.stages[0] = RoiStage{Roi{8, 4, 48, 40}};
    VideoStream in(64, 48, {});
    in.push_back(frame);
    const auto run = run_pipeline(spec, in);
    EXPECT_EQ(run.output.width(), 48);
    EXPECT_EQ(run.output.height(), 40);
    auto full = canonical_pipeline();
    EXPECT_EQ(run.output[0], run_stages(full, extract_roi(frame, Roi{8, 4, 48, 40})));
}

TEST(Pipeline, ParallelMatchesSerialOnHundredFrames) {
    const auto frames = synthetic::phantom_stream(96, 72, 100, 4);
    auto spec = canonical_pipeline();
    const auto serial = run_pipeline(spec, frames);
    spec.parallelism = 4;
    spec.queue_depth = 6;
    const auto parallel = run_pipeline(spec, frames);
    ASSERT_EQ(serial.output.size(), 100u);
    ASSERT_EQ(parallel.output.size(), 100u);
    for (std::size_t i = 0; i < 100; ++i) {
        ASSERT_EQ(parallel.output[i], serial.output[i]) << i;
        EXPECT_EQ(parallel.stats[i].index, i);
    }
}

TEST(Pipeline, ComposesPerFrame) {
    const auto frames = synthetic::phantom_stream(48, 40, 5, 8);
    PipelineSpec spec;
    spec.stages = {GrayscaleStage{}, InvertStage{}, MedianStage{{3}}};
    spec.parallelism = 2;
    const auto run = run_pipeline(spec, frames);
    for (std::size_t i = 0; i < frames.size(); ++i) EXPECT_EQ(run.output[i], run_stages(spec, frames[i]));
}

TEST(Pipeline, QueueDepthBoundsFramesInFlight) {
    const auto frames = synthetic::phantom_stream(64, 48, 40, 3);
    for (int depth : {1, 2, 5}) {
        auto spec = canonical_pipeline();
        spec.parallelism = 4;
        spec.queue_depth = depth;
        std::size_t worst = 0;
        RunOptions opts;
        opts.on_admit = [&](std::size_t in_flight) { worst = std::max(worst, in_flight); };
        const auto run = run_pipeline(spec, frames, opts);
        EXPECT_LE(worst, static_cast<std::size_t>(depth));
        EXPECT_LE(run.peak_in_flight, static_cast<std::size_t>(depth));
        EXPECT_EQ(run.peak_in_flight, worst);
    }
}

TEST(Pipeline, StatsInvariants) {
    const auto frames = synthetic::phantom_stream(64, 48, 12, 5);
    for (int jobs : {1, 3}) {
        auto spec = canonical_pipeline();
        spec.parallelism = jobs;
        const auto run = run_pipeline(spec, frames);
        ASSERT_EQ(run.stats.size(), 12u);
        for (std::size_t i = 0; i < 12; ++i) {
            const auto& s = run.stats[i];
            EXPECT_EQ(s.index, i);
            EXPECT_EQ(s.stages.size(), 7u);
            for (const auto& t : s.stages) EXPECT_GE(t.micros, 0.0);
            EXPECT_LE(s.busy_us(), s.latency_us + 1e-6);
            EXPECT_GT(s.throughput_fps, 0.0);
        }
        const auto j = stats_to_json(run.stats[3]);
        EXPECT_EQ(j["frame"], 3);
        EXPECT_EQ(j["stages"].size(), 7u);
        EXPECT_EQ(j["stages"][4]["kind"], "clahe");
    }
}

TEST(Pipeline, EmptyStream) {
    const VideoStream empty(32, 24, {});
    const auto run = run_pipeline(canonical_pipeline(), empty);
    EXPECT_TRUE(run.output.empty());
    EXPECT_TRUE(run.stats.empty());
}
