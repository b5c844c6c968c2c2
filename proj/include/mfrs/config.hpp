#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "mfrs/detector.hpp"
#include "mfrs/framing.hpp"
#include "mfrs/matching.hpp"

namespace mfrs {

/// Runtime settings. Precedence: environment > config file > defaults.
///
/// File format (JSON, every key optional, unknown keys rejected):
///   {"data_dir": "...", "bind": "127.0.0.1", "port": 8080, "token": "...",
///    "association_window_s": 120, "sync": true, "detector_model": "path",
///    "framing": {"min_size_ratio", "max_center_offset", "min_sharpness"},
///    "detector": {"window", "stride", "pyramid_scale", "score_threshold",
///                 "nms_iou", "min_face", "refine"},
///    "match": {"tolerance"}}
///
/// Environment: MFRS_DATA_DIR, MFRS_BIND, MFRS_PORT, MFRS_TOKEN,
/// MFRS_ASSOCIATION_WINDOW_S, MFRS_TOLERANCE, MFRS_DETECTOR_MODEL.
struct Config {
    std::filesystem::path data_dir = "mfrs-data";
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::optional<std::string> token;  ///< absent: API open
    std::chrono::microseconds association_window = std::chrono::seconds(120);
    bool sync = true;
    std::optional<std::filesystem::path> detector_model;
    FramingPolicy framing;
    DetectorConfig detector;
    MatchConfig match;

    /// Throws InvalidConfig.
    void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Parses a config document on top of `base`. Throws InvalidConfig.
Config parse_config(const std::string& text, Config base = {});

/// Defaults, then the file (if given), then environment overrides; validated.
Config load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

}  // namespace mfrs
