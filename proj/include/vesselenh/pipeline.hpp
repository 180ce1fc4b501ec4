#pragma once

// Stage composition and ordered frame execution.
//
// Frames are independent: each one runs through every stage on a single
// worker. A bounded admission window (queue_depth) limits frames in flight,
// and a reorder buffer releases results strictly in input order, so output is
// identical for any worker count.

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "vesselenh/background.hpp"
#include "vesselenh/clahe.hpp"
#include "vesselenh/error.hpp"
#include "vesselenh/frangi.hpp"
#include "vesselenh/grayscale.hpp"
#include "vesselenh/image.hpp"
#include "vesselenh/median.hpp"
#include "vesselenh/y4m.hpp"

namespace vesselenh {

enum class StageKind { Roi, BackgroundRemoval, Grayscale, Median, Clahe, Frangi, Invert };

// Empty rect means the full frame.
struct RoiStage {
    std::optional<Roi> rect;
    friend bool operator==(const RoiStage&, const RoiStage&) = default;
};
struct BackgroundStage {
    BackgroundConfig cfg;
    friend bool operator==(const BackgroundStage&, const BackgroundStage&) = default;
};
// On an already single-channel frame this stage passes the frame through.
struct GrayscaleStage {
    GrayscaleOptions opts;
    friend bool operator==(const GrayscaleStage&, const GrayscaleStage&) = default;
};
struct MedianStage {
    MedianConfig cfg;
    friend bool operator==(const MedianStage&, const MedianStage&) = default;
};
struct ClaheStage {
    ClaheConfig cfg;
    friend bool operator==(const ClaheStage&, const ClaheStage&) = default;
};
struct FrangiStage {
    FrangiConfig cfg;
    friend bool operator==(const FrangiStage&, const FrangiStage&) = default;
};
struct InvertStage {
    friend bool operator==(const InvertStage&, const InvertStage&) = default;
};

using Stage = std::variant<RoiStage, BackgroundStage, GrayscaleStage, MedianStage, ClaheStage, FrangiStage, InvertStage>;

inline StageKind stage_kind(const Stage& s) noexcept { return static_cast<StageKind>(s.index()); }

inline const char* stage_name(StageKind k) noexcept {
    switch (k) {
        case StageKind::Roi: return "roi";
        case StageKind::BackgroundRemoval: return "background";
        case StageKind::Grayscale: return "grayscale";
        case StageKind::Median: return "median";
        case StageKind::Clahe: return "clahe";
        case StageKind::Frangi: return "frangi";
        case StageKind::Invert: return "invert";
    }
    return "?";
}

inline ImageU8 invert(const ImageU8& img) {
    ImageU8 out = img;
    for (auto& v : out.samples()) v = static_cast<std::uint8_t>(255 - v);
    return out;
}

inline ImageU8 apply_stage(const Stage& stage, const ImageU8& img) {
    return std::visit(
        [&](const auto& s) -> ImageU8 {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, RoiStage>) {
                return s.rect ? extract_roi(img, *s.rect) : img;
            } else if constexpr (std::is_same_v<S, BackgroundStage>) {
                return remove_background(img, s.cfg);
            } else if constexpr (std::is_same_v<S, GrayscaleStage>) {
                return img.channels() == 1 ? img : rgb_to_gray(img, s.opts);
            } else if constexpr (std::is_same_v<S, MedianStage>) {
                return median_filter(img, s.cfg);
            } else if constexpr (std::is_same_v<S, ClaheStage>) {
                return apply_clahe(img, s.cfg);
            } else if constexpr (std::is_same_v<S, FrangiStage>) {
                return vesselness_to_u8(frangi_multiscale(img, s.cfg));
            } else {
                return invert(img);
            }
        },
        stage);
}

struct PipelineSpec {
    std::string name = "custom";
    std::vector<Stage> stages;
    int parallelism = 1;
    int queue_depth = 8;

    friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

/// Frame -> background removal -> gray -> median -> CLAHE on 4x4, 10x10 and
/// 16x16 grids. Vesselness is deliberately absent: it is far too slow for
/// live video.
inline PipelineSpec canonical_pipeline() {
    PipelineSpec spec;
    spec.name = "canonical";
    spec.stages = {
        RoiStage{},
        BackgroundStage{},
        GrayscaleStage{},
        MedianStage{MedianConfig{5}},
        ClaheStage{ClaheConfig{4, 4, 2.0, 256}},
        ClaheStage{ClaheConfig{10, 10, 2.0, 256}},
        ClaheStage{ClaheConfig{16, 16, 2.0, 256}},
    };
    return spec;
}

/// Checks that do not depend on the input: non-empty stage list, valid
/// stage parameters, positive worker count and queue depth.
inline void validate(const PipelineSpec& spec) {
    detail::require(!spec.stages.empty(), "pipeline has no stages");
    detail::require(spec.parallelism >= 1, "pipeline parallelism must be >= 1");
    detail::require(spec.queue_depth >= 1, "pipeline queue_depth must be >= 1");
    for (const auto& stage : spec.stages) {
        std::visit(
            [](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, BackgroundStage> || std::is_same_v<S, MedianStage> ||
                              std::is_same_v<S, ClaheStage> || std::is_same_v<S, FrangiStage>)
                    s.cfg.validate();
                else if constexpr (std::is_same_v<S, RoiStage>)
                    detail::require(!s.rect || (s.rect->w >= 1 && s.rect->h >= 1 && s.rect->x0 >= 0 && s.rect->y0 >= 0),
                                    "roi stage rectangle is invalid");
            },
            stage);
    }
}

/// Full validation against the input geometry: frame size through ROI
/// stages, and single-channel input for median, CLAHE and vesselness.
inline void validate(const PipelineSpec& spec, int width, int height, int channels) {
    validate(spec);
    for (std::size_t i = 0; i < spec.stages.size(); ++i) {
        const auto& stage = spec.stages[i];
        const std::string where = "stage " + std::to_string(i) + " (" + stage_name(stage_kind(stage)) + "): ";
        switch (stage_kind(stage)) {
            case StageKind::Roi: {
                const auto& rect = std::get<RoiStage>(stage).rect;
                if (rect) {
                    detail::require(roi_fits(*rect, width, height), where + "roi exceeds the frame");
                    width = rect->w;
                    height = rect->h;
                }
                break;
            }
            case StageKind::Grayscale:
                channels = 1;
                break;
            case StageKind::Median:
            case StageKind::Frangi:
                detail::require(channels == 1, where + "needs 1-channel input; add a grayscale stage first");
                break;
            case StageKind::Clahe: {
                detail::require(channels == 1, where + "needs 1-channel input; add a grayscale stage first");
                const auto& cfg = std::get<ClaheStage>(stage).cfg;
                detail::require(width >= cfg.grid_cols && height >= cfg.grid_rows, where + "frame is smaller than the grid");
                break;
            }
            case StageKind::BackgroundRemoval:
            case StageKind::Invert:
                break;
        }
    }
}

/// Folds the stages over one frame.
inline ImageU8 run_stages(const PipelineSpec& spec, const ImageU8& frame) {
    ImageU8 img = frame;
    for (const auto& stage : spec.stages) img = apply_stage(stage, img);
    return img;
}

struct StageTiming {
    StageKind kind;
    double micros;
};

struct FrameStats {
    std::size_t index = 0;
    std::vector<StageTiming> stages;
    // Admission to in-order release, so it includes queueing.
    double latency_us = 0.0;
    // Over the last (up to) 30 released frames.
    double throughput_fps = 0.0;

    double busy_us() const noexcept {
        double t = 0.0;
        for (const auto& s : stages) t += s.micros;
        return t;
    }
};

struct RunOptions {
    // Called under the scheduler lock each time a frame is admitted, with
    // the number of frames now in flight.
    std::function<void(std::size_t)> on_admit;
};

struct PipelineRun {
    VideoStream output;
    std::vector<FrameStats> stats;
    std::size_t peak_in_flight = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double micros(Clock::duration d) {
    return std::chrono::duration<double, std::micro>(d).count();
}

struct FrameResult {
    ImageU8 image;
    std::vector<StageTiming> timings;
};

inline FrameResult process_frame(const PipelineSpec& spec, const ImageU8& frame) {
    FrameResult r;
    r.timings.reserve(spec.stages.size());
    ImageU8 img = frame;
    for (const auto& stage : spec.stages) {
        const auto t0 = Clock::now();
        img = apply_stage(stage, img);
        r.timings.push_back({stage_kind(stage), micros(Clock::now() - t0)});
    }
    r.image = std::move(img);
    return r;
}

class ThroughputWindow {
public:
    explicit ThroughputWindow(Clock::time_point start) : start_(start) {}

    double push(Clock::time_point t) {
        times_.push_back(t);
        if (times_.size() > kWindow) times_.pop_front();
        const auto from = times_.size() < kWindow ? start_ : times_.front();
        const std::size_t frames = times_.size() < kWindow ? times_.size() : times_.size() - 1;
        const double secs = std::chrono::duration<double>(t - from).count();
        return secs > 0.0 ? static_cast<double>(frames) / secs : 0.0;
    }

private:
    static constexpr std::size_t kWindow = 30;
    Clock::time_point start_;
    std::deque<Clock::time_point> times_;
};

}  // namespace detail

/// Runs every frame through the stages. Output order always equals input
/// order; with parallelism 1 everything happens on the calling thread.
inline PipelineRun run_pipeline(const PipelineSpec& spec, const VideoStream& input, const RunOptions& options = {}) {
    PipelineRun run;
    if (input.empty()) {
        validate(spec);
        if (input.width() > 0) run.output = VideoStream(input.width(), input.height(), input.frame_rate());
        return run;
    }
    validate(spec, input.width(), input.height(), input[0].channels());

    const std::size_t n = input.size();
    run.stats.reserve(n);
    std::vector<ImageU8> outputs;
    outputs.reserve(n);

    const auto start = detail::Clock::now();
    detail::ThroughputWindow window(start);
    auto release = [&](std::size_t i, detail::FrameResult&& r, detail::Clock::time_point admitted) {
        const auto now = detail::Clock::now();
        FrameStats s;
        s.index = i;
        s.stages = std::move(r.timings);
        s.latency_us = detail::micros(now - admitted);
        s.throughput_fps = window.push(now);
        run.stats.push_back(std::move(s));
        outputs.push_back(std::move(r.image));
    };

    if (spec.parallelism == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto admitted = detail::Clock::now();
            run.peak_in_flight = std::max<std::size_t>(run.peak_in_flight, 1);
            if (options.on_admit) options.on_admit(1);
            release(i, detail::process_frame(spec, input[i]), admitted);
        }
    } else {
        std::mutex mu;
        std::condition_variable work_cv;
        std::condition_variable done_cv;
        std::deque<std::size_t> work;
        std::vector<std::optional<detail::FrameResult>> reorder(n);
        std::vector<detail::Clock::time_point> admitted(n);
        std::exception_ptr failure;
        bool stop = false;

        auto worker = [&] {
            while (true) {
                std::size_t i;
                {
                    std::unique_lock lock(mu);
                    work_cv.wait(lock, [&] { return stop || !work.empty(); });
                    if (stop) return;
                    i = work.front();
                    work.pop_front();
                }
                try {
                    auto result = detail::process_frame(spec, input[i]);
                    std::lock_guard lock(mu);
                    reorder[i] = std::move(result);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!failure) failure = std::current_exception();
                    stop = true;
                    work_cv.notify_all();
                }
                done_cv.notify_one();
            }
        };

        std::vector<std::jthread> workers;
        auto shutdown = [&] {
            {
                std::lock_guard lock(mu);
                stop = true;
            }
            work_cv.notify_all();
            workers.clear();
        };
        struct Joiner {
            decltype(shutdown)& fn;
            ~Joiner() { fn(); }
        } joiner{shutdown};

        const auto depth = static_cast<std::size_t>(spec.queue_depth);
        workers.reserve(static_cast<std::size_t>(spec.parallelism));
        for (int w = 0; w < spec.parallelism; ++w) workers.emplace_back(worker);

        std::size_t next_admit = 0;
        for (std::size_t next_emit = 0; next_emit < n; ++next_emit) {
            detail::FrameResult result;
            {
                std::unique_lock lock(mu);
                while (next_admit < n && next_admit - next_emit < depth) {
                    admitted[next_admit] = detail::Clock::now();
                    work.push_back(next_admit++);
                    const std::size_t in_flight = next_admit - next_emit;
                    run.peak_in_flight = std::max(run.peak_in_flight, in_flight);
                    if (options.on_admit) options.on_admit(in_flight);
                    work_cv.notify_one();
                }
                done_cv.wait(lock, [&] { return failure || reorder[next_emit].has_value(); });
                if (failure) std::rethrow_exception(failure);
                result = std::move(*reorder[next_emit]);
                reorder[next_emit].reset();
            }
            release(next_emit, std::move(result), admitted[next_emit]);
        }
    }

    run.output = VideoStream(outputs.front().width(), outputs.front().height(), input.frame_rate());
    run.output.reserve(n);
    for (auto& img : outputs) run.output.push_back(std::move(img));
    return run;
}

}  // namespace vesselenh
