#pragma once

// Command-line front end. dispatch() is the whole program minus main(), so
// tests can drive it in-process.
//
// Parameter precedence: built-in defaults < --config JSON < explicit flags.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vesselenh/synthetic.hpp"
#include "vesselenh/vesselenh.hpp"

namespace vesselenh::cli {

struct Settings {
    GrayscaleOptions gray;
    BackgroundConfig background;
    MedianConfig median;
    ClaheConfig clahe;
    FrangiConfig frangi;
    int jobs = 1;
    int queue_depth = 8;
    // Set when the config file carries a full "stages" array.
    std::optional<PipelineSpec> pipeline;
};

inline void apply_config(Settings& s, const json& j) {
    if (!j.is_object()) throw ContractViolation("config file must hold a JSON object");
    s.gray.eq6_verbatim = detail::value_or(j, "eq6_verbatim", s.gray.eq6_verbatim);
    s.gray.rescale = detail::value_or(j, "gray_rescale", s.gray.rescale);
    if (j.contains("threshold")) s.background = background_from_json(j["threshold"]);
    s.median.window = detail::value_or(j, "median_window", s.median.window);
    if (j.contains("grid")) {
        const auto [c, r] = parse_grid(detail::value_or<std::string>(j, "grid", ""));
        s.clahe.grid_cols = c;
        s.clahe.grid_rows = r;
    }
    s.clahe.clip_limit = detail::value_or(j, "clip_limit", s.clahe.clip_limit);
    s.clahe.n_bins = detail::value_or(j, "bins", s.clahe.n_bins);
    s.frangi.scales = detail::value_or(j, "scales", s.frangi.scales);
    s.frangi.beta = detail::value_or(j, "beta", s.frangi.beta);
    if (j.contains("c")) s.frangi.c = c_from_json(j["c"]);
    s.frangi.dark_vessels = detail::value_or(j, "dark_vessels", s.frangi.dark_vessels);
    s.jobs = detail::value_or(j, "jobs", s.jobs);
    s.queue_depth = detail::value_or(j, "queue_depth", s.queue_depth);
    if (j.contains("stages")) s.pipeline = spec_from_json(j);
}

/// The canonical recipe with the user's gray/background/median/CLAHE
/// parameters substituted. CLAHE grids stay at 4x4, 10x10 and 16x16.
inline PipelineSpec canonical_with(const Settings& s) {
    PipelineSpec spec = canonical_pipeline();
    for (auto& stage : spec.stages) {
        if (auto* g = std::get_if<GrayscaleStage>(&stage)) g->opts = s.gray;
        if (auto* b = std::get_if<BackgroundStage>(&stage)) b->cfg = s.background;
        if (auto* m = std::get_if<MedianStage>(&stage)) m->cfg = s.median;
        if (auto* c = std::get_if<ClaheStage>(&stage)) {
            c->cfg.clip_limit = s.clahe.clip_limit;
            c->cfg.n_bins = s.clahe.n_bins;
        }
    }
    spec.parallelism = s.jobs;
    spec.queue_depth = s.queue_depth;
    return spec;
}

inline std::uint64_t fnv1a(const VideoStream& stream) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& f : stream) {
        for (auto b : f.samples()) {
            h ^= b;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

namespace internal {

// Raw flag values; each is applied only if the flag was given.
struct Flags {
    std::string config;
    std::string grid;
    double clip_limit = 0.0;
    int bins = 0;
    int median_window = 0;
    std::vector<double> scales;
    double beta = 0.0;
    std::string c;
    bool dark_vessels = true;
    int threshold = 0;
    bool otsu = false;
    int jobs = 1;
    int queue_depth = 8;
    bool gray_rescale = false;
    bool eq6_verbatim = false;
    std::string stats_out;

    struct Opts {
        CLI::Option *config = nullptr, *grid = nullptr, *clip = nullptr, *bins = nullptr, *window = nullptr,
                    *scales = nullptr, *beta = nullptr, *c = nullptr, *dark = nullptr, *threshold = nullptr,
                    *otsu = nullptr, *jobs = nullptr, *depth = nullptr, *rescale = nullptr, *eq6 = nullptr;
    };
};

enum Group : unsigned {
    kGray = 1u << 0,
    kClahe = 1u << 1,
    kMedian = 1u << 2,
    kFrangi = 1u << 3,
    kBackground = 1u << 4,
    kRun = 1u << 5,
};

inline Flags::Opts add_flags(CLI::App* app, Flags& f, unsigned groups) {
    Flags::Opts o;
    o.config = app->add_option("--config", f.config, "JSON file with parameter defaults")->check(CLI::ExistingFile);
    if (groups & kGray) {
        o.rescale = app->add_flag("--gray-rescale", f.gray_rescale, "scale gray output by 4 before clamping");
        o.eq6 = app->add_flag("--eq6-verbatim", f.eq6_verbatim, "use G in the B2/B3 blue terms");
    }
    if (groups & kClahe) {
        o.grid = app->add_option("--grid", f.grid, "CLAHE tile grid, e.g. 8x8");
        o.clip = app->add_option("--clip-limit", f.clip_limit, "CLAHE clip limit (multiple of mean bin height)");
        o.bins = app->add_option("--bins", f.bins, "CLAHE histogram bins");
    }
    if (groups & kMedian) o.window = app->add_option("--median-window", f.median_window, "odd median window size");
    if (groups & kFrangi) {
        o.scales = app->add_option("--scales", f.scales, "comma-separated sigma list")->delimiter(',');
        o.beta = app->add_option("--beta", f.beta, "blob sensitivity");
        o.c = app->add_option("--c", f.c, "background sensitivity or 'auto'");
        o.dark = app->add_flag("--dark-vessels,!--bright-vessels", f.dark_vessels, "vessel polarity");
    }
    if (groups & kBackground) {
        o.threshold = app->add_option("--threshold", f.threshold, "background threshold (0-255)");
        o.otsu = app->add_flag("--otsu", f.otsu, "choose the background threshold with Otsu's method");
        o.threshold->excludes(o.otsu);
    }
    if (groups & kRun) {
        o.jobs = app->add_option("--jobs", f.jobs, "worker threads");
        o.depth = app->add_option("--queue-depth", f.queue_depth, "max frames in flight");
        app->add_option("--stats-out", f.stats_out, "write per-frame stats as JSON lines");
    }
    return o;
}

inline bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

inline Settings resolve(const Flags& f, const Flags::Opts& o) {
    Settings s;
    if (given(o.config)) {
        std::ifstream in(f.config);
        std::stringstream buf;
        buf << in.rdbuf();
        json j;
        try {
            j = json::parse(buf.str());
        } catch (const json::parse_error& e) {
            throw FormatError(std::string("invalid config JSON: ") + e.what(), e.byte);
        }
        apply_config(s, j);
    }
    if (given(o.rescale)) s.gray.rescale = f.gray_rescale;
    if (given(o.eq6)) s.gray.eq6_verbatim = f.eq6_verbatim;
    if (given(o.grid)) std::tie(s.clahe.grid_cols, s.clahe.grid_rows) = parse_grid(f.grid);
    if (given(o.clip)) s.clahe.clip_limit = f.clip_limit;
    if (given(o.bins)) s.clahe.n_bins = f.bins;
    if (given(o.window)) s.median.window = f.median_window;
    if (given(o.scales)) s.frangi.scales = f.scales;
    if (given(o.beta)) s.frangi.beta = f.beta;
    if (given(o.c)) s.frangi.c = f.c == "auto" ? std::nullopt : std::optional<double>(std::stod(f.c));
    if (given(o.dark)) s.frangi.dark_vessels = f.dark_vessels;
    if (given(o.threshold)) s.background = BackgroundConfig{BackgroundConfig::Mode::Fixed, f.threshold};
    if (given(o.otsu) && f.otsu) s.background.mode = BackgroundConfig::Mode::Otsu;
    if (given(o.jobs)) s.jobs = f.jobs;
    if (given(o.depth)) s.queue_depth = f.queue_depth;

    s.clahe.validate();
    s.median.validate();
    s.frangi.validate();
    s.background.validate();
    detail::require(s.jobs >= 1, "--jobs must be >= 1");
    detail::require(s.queue_depth >= 1, "--queue-depth must be >= 1");
    return s;
}

inline PipelineSpec video_spec(const Settings& s) {
    PipelineSpec spec = s.pipeline ? *s.pipeline : canonical_with(s);
    spec.parallelism = s.jobs;
    spec.queue_depth = s.queue_depth;
    return spec;
}

inline void write_stats(const std::string& path, const std::vector<FrameStats>& stats) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const auto& s : stats) out << stats_to_json(s).dump() << '\n';
}

}  // namespace internal

/// Runs one command. Returns 0 on success, 2 on usage errors and 1 when
/// processing fails.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Vessel enhancement for near-infrared imagery", "vesselenh"};
    app.require_subcommand(1);

    internal::Flags flags;
    std::string input, output;
    std::string synthetic;
    int synthetic_frames = 100;

    auto* gray = app.add_subcommand("gray", "RGB PPM -> gray PGM");
    auto* clahe = app.add_subcommand("clahe", "contrast-limited adaptive histogram equalization");
    auto* median = app.add_subcommand("median", "median filter");
    auto* frangi = app.add_subcommand("frangi", "multiscale vesselness, written as U8");
    auto* enhance = app.add_subcommand("enhance", "canonical enhancement pipeline on one image");
    auto* video = app.add_subcommand("video", "run a pipeline over a Y4M stream");
    auto* bench = app.add_subcommand("bench", "time a pipeline over a Y4M stream");

    using namespace internal;
    const unsigned canon = kGray | kBackground | kMedian | kClahe;
    std::vector<std::pair<CLI::App*, Flags::Opts>> subs;
    subs.emplace_back(gray, add_flags(gray, flags, kGray));
    subs.emplace_back(clahe, add_flags(clahe, flags, kClahe));
    subs.emplace_back(median, add_flags(median, flags, kMedian));
    subs.emplace_back(frangi, add_flags(frangi, flags, kFrangi));
    subs.emplace_back(enhance, add_flags(enhance, flags, canon));
    subs.emplace_back(video, add_flags(video, flags, canon | kRun));
    subs.emplace_back(bench, add_flags(bench, flags, canon | kRun));

    for (auto* sub : {gray, clahe, median, frangi, enhance, video}) {
        sub->add_option("input", input, "input file")->required();
        sub->add_option("output", output, "output file")->required();
    }
    bench->add_option("input", input, "input Y4M file");
    bench->add_option("--out", output, "also write the processed stream here");
    auto* synth_opt = bench->add_option("--synthetic", synthetic, "generate a WxH phantom stream instead of reading");
    bench->add_option("--frames", synthetic_frames, "frames to generate with --synthetic")->check(CLI::PositiveNumber);

    std::vector<std::string> argv(args.rbegin(), args.rend());
    Settings settings;
    try {
        app.parse(argv);
        if (bench->parsed() && input.empty() && synth_opt->count() == 0)
            throw CLI::ValidationError("bench", "needs an input file or --synthetic WxH");
        for (const auto& [sub, opts] : subs)
            if (sub->parsed()) settings = resolve(flags, opts);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
        return 2;
    } catch (const std::exception& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (gray->parsed()) {
            write_image(rgb_to_gray(read_image(input), settings.gray), output);
        } else if (clahe->parsed()) {
            write_image(apply_clahe(read_image(input), settings.clahe), output);
        } else if (median->parsed()) {
            write_image(median_filter(read_image(input), settings.median), output);
        } else if (frangi->parsed()) {
            write_image(vesselness_to_u8(frangi_multiscale(read_image(input), settings.frangi)), output);
        } else if (enhance->parsed()) {
            auto spec = canonical_with(settings);
            const auto img = read_image(input);
            validate(spec, img.width(), img.height(), img.channels());
            write_image(run_stages(spec, img), output);
        } else {
            const bool benchmarking = bench->parsed();
            VideoStream stream;
            if (benchmarking && !synthetic.empty()) {
                const auto [w, h] = parse_grid(synthetic);
                stream = synthetic::phantom_stream(w, h, synthetic_frames);
            } else {
                stream = read_y4m_frames(input);
            }
            const auto spec = video_spec(settings);
            const auto t0 = std::chrono::steady_clock::now();
            const auto run = run_pipeline(spec, stream);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!output.empty()) write_y4m(run.output, output);
            if (!flags.stats_out.empty()) write_stats(flags.stats_out, run.stats);

            if (benchmarking) {
                const double fps = secs > 0.0 ? static_cast<double>(run.stats.size()) / secs : 0.0;
                json stage_means = json::object();
                double latency = 0.0;
                for (const auto& st : run.stats) {
                    latency += st.latency_us;
                    for (std::size_t k = 0; k < st.stages.size(); ++k) {
                        const std::string key = std::to_string(k) + ":" + stage_name(st.stages[k].kind);
                        stage_means[key] = stage_means.value(key, 0.0) + st.stages[k].micros;
                    }
                }
                const double n = std::max<double>(1.0, static_cast<double>(run.stats.size()));
                for (auto& [key, v] : stage_means.items()) v = v.get<double>() / n;
                const json summary = {{"pipeline", spec.name},
                                      {"frames", run.stats.size()},
                                      {"width", stream.width()},
                                      {"height", stream.height()},
                                      {"jobs", spec.parallelism},
                                      {"queue_depth", spec.queue_depth},
                                      {"seconds", secs},
                                      {"fps", fps},
                                      {"mean_latency_us", latency / n},
                                      {"mean_stage_us", stage_means},
                                      {"peak_in_flight", run.peak_in_flight},
                                      {"checksum", hex64(fnv1a(run.output))}};
                out << summary.dump() << "\n";
                char line[64];
                std::snprintf(line, sizeof line, "fps: %.2f\n", fps);
                out << line;
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace vesselenh::cli
