#pragma once

// JSON form of PipelineSpec and FrameStats:
//
//   {"name": "canonical", "parallelism": 1, "queue_depth": 8,
//    "stages": [{"kind": "roi"},
//               {"kind": "background", "threshold": 10},        // or "otsu"
//               {"kind": "grayscale", "eq6_verbatim": false, "gray_rescale": false},
//               {"kind": "median", "median_window": 5},
//               {"kind": "clahe", "grid": "4x4", "clip_limit": 2.0, "bins": 256},
//               {"kind": "frangi", "scales": [1, 2, 3], "alpha": 0.5, "beta": 0.5,
//                "c": "auto", "dark_vessels": true},
//               {"kind": "invert"}]}
//
// Missing keys fall back to defaults.

#include <string>

#include "json.hpp"
#include "vesselenh/error.hpp"
#include "vesselenh/pipeline.hpp"

namespace vesselenh {

using nlohmann::json;

namespace detail {

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ContractViolation(std::string("bad value for '") + key + "'");
    }
}

}  // namespace detail

inline json background_threshold_to_json(const BackgroundConfig& cfg) {
    return cfg.mode == BackgroundConfig::Mode::Otsu ? json("otsu") : json(cfg.threshold);
}

inline BackgroundConfig background_from_json(const json& value) {
    BackgroundConfig cfg;
    if (value.is_string()) {
        if (value.get<std::string>() != "otsu") throw ContractViolation("threshold must be an integer or \"otsu\"");
        cfg.mode = BackgroundConfig::Mode::Otsu;
    } else if (value.is_number_integer()) {
        cfg.threshold = value.get<int>();
    } else {
        throw ContractViolation("threshold must be an integer or \"otsu\"");
    }
    return cfg;
}

inline json c_to_json(const std::optional<double>& c) { return c ? json(*c) : json("auto"); }

inline std::optional<double> c_from_json(const json& value) {
    if (value.is_string()) {
        if (value.get<std::string>() != "auto") throw ContractViolation("c must be a number or \"auto\"");
        return std::nullopt;
    }
    if (!value.is_number()) throw ContractViolation("c must be a number or \"auto\"");
    return value.get<double>();
}

inline json stage_to_json(const Stage& stage) {
    json j;
    j["kind"] = stage_name(stage_kind(stage));
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, RoiStage>) {
                if (s.rect) {
                    j["x"] = s.rect->x0;
                    j["y"] = s.rect->y0;
                    j["w"] = s.rect->w;
                    j["h"] = s.rect->h;
                }
            } else if constexpr (std::is_same_v<S, BackgroundStage>) {
                j["threshold"] = background_threshold_to_json(s.cfg);
            } else if constexpr (std::is_same_v<S, GrayscaleStage>) {
                j["eq6_verbatim"] = s.opts.eq6_verbatim;
                j["gray_rescale"] = s.opts.rescale;
            } else if constexpr (std::is_same_v<S, MedianStage>) {
                j["median_window"] = s.cfg.window;
            } else if constexpr (std::is_same_v<S, ClaheStage>) {
                j["grid"] = format_grid(s.cfg.grid_cols, s.cfg.grid_rows);
                j["clip_limit"] = s.cfg.clip_limit;
                j["bins"] = s.cfg.n_bins;
            } else if constexpr (std::is_same_v<S, FrangiStage>) {
                j["scales"] = s.cfg.scales;
                j["alpha"] = s.cfg.alpha;
                j["beta"] = s.cfg.beta;
                j["c"] = c_to_json(s.cfg.c);
                j["dark_vessels"] = s.cfg.dark_vessels;
            }
        },
        stage);
    return j;
}

inline Stage stage_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ContractViolation("each stage needs a string \"kind\"");
    const auto kind = j["kind"].get<std::string>();
    if (kind == "roi") {
        RoiStage s;
        if (j.contains("x") || j.contains("y") || j.contains("w") || j.contains("h")) {
            s.rect = Roi{detail::value_or(j, "x", 0), detail::value_or(j, "y", 0), detail::value_or(j, "w", 0),
                         detail::value_or(j, "h", 0)};
        }
        return s;
    }
    if (kind == "background") {
        BackgroundStage s;
        if (j.contains("threshold")) s.cfg = background_from_json(j["threshold"]);
        return s;
    }
    if (kind == "grayscale") {
        GrayscaleStage s;
        s.opts.eq6_verbatim = detail::value_or(j, "eq6_verbatim", false);
        s.opts.rescale = detail::value_or(j, "gray_rescale", false);
        return s;
    }
    if (kind == "median") {
        MedianStage s;
        s.cfg.window = detail::value_or(j, "median_window", s.cfg.window);
        return s;
    }
    if (kind == "clahe") {
        ClaheStage s;
        if (j.contains("grid")) {
            const auto [cols, rows] = parse_grid(detail::value_or<std::string>(j, "grid", ""));
            s.cfg.grid_cols = cols;
            s.cfg.grid_rows = rows;
        }
        s.cfg.clip_limit = detail::value_or(j, "clip_limit", s.cfg.clip_limit);
        s.cfg.n_bins = detail::value_or(j, "bins", s.cfg.n_bins);
        return s;
    }
    if (kind == "frangi") {
        FrangiStage s;
        s.cfg.scales = detail::value_or(j, "scales", s.cfg.scales);
        s.cfg.alpha = detail::value_or(j, "alpha", s.cfg.alpha);
        s.cfg.beta = detail::value_or(j, "beta", s.cfg.beta);
        if (j.contains("c")) s.cfg.c = c_from_json(j["c"]);
        s.cfg.dark_vessels = detail::value_or(j, "dark_vessels", s.cfg.dark_vessels);
        return s;
    }
    if (kind == "invert") return InvertStage{};
    throw ContractViolation("unknown stage kind '" + kind + "'");
}

inline json spec_to_json(const PipelineSpec& spec) {
    json stages = json::array();
    for (const auto& s : spec.stages) stages.push_back(stage_to_json(s));
    return {{"name", spec.name}, {"stages", stages}, {"parallelism", spec.parallelism},
            {"queue_depth", spec.queue_depth}};
}

inline PipelineSpec spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("stages") || !j["stages"].is_array())
        throw ContractViolation("pipeline spec needs a \"stages\" array");
    PipelineSpec spec;
    spec.name = detail::value_or<std::string>(j, "name", spec.name);
    for (const auto& s : j["stages"]) spec.stages.push_back(stage_from_json(s));
    spec.parallelism = detail::value_or(j, "parallelism", spec.parallelism);
    spec.queue_depth = detail::value_or(j, "queue_depth", spec.queue_depth);
    validate(spec);
    return spec;
}

inline PipelineSpec parse_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("invalid pipeline JSON: ") + e.what(), e.byte);
    }
    return spec_from_json(j);
}

inline json stats_to_json(const FrameStats& s) {
    json stages = json::array();
    for (const auto& t : s.stages) stages.push_back({{"kind", stage_name(t.kind)}, {"us", t.micros}});
    return {{"frame", s.index}, {"stages", stages}, {"latency_us", s.latency_us}, {"fps", s.throughput_fps}};
}

}  // namespace vesselenh
