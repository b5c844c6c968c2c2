#include "mfrs/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mfrs/error.hpp"

namespace mfrs {

namespace {

using Json = nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { fail(ErrorCode::InvalidConfig, "config: " + msg); }

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) bad("unknown key '" + where + key + "'");
    }
}

template <typename T>
void take(const Json& obj, const char* key, T& out, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const Json::exception&) {
        bad("'" + where + key + "' has the wrong type");
    }
}

double parse_number(const std::string& name, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        bad("environment " + name + "='" + text + "' is not a number");
    }
}

std::chrono::microseconds seconds_to_us(double s) {
    if (!std::isfinite(s)) bad("association_window_s must be finite");
    return std::chrono::microseconds(std::llround(s * 1e6));
}

}  // namespace

void Config::validate() const {
    if (data_dir.empty()) bad("data_dir must not be empty");
    if (port < 0 || port > 65535) bad("port out of range");
    if (association_window <= std::chrono::microseconds::zero()) bad("association_window_s must be positive");
    if (!(framing.min_size_ratio >= 0.0 && framing.min_size_ratio <= 1.0)) bad("framing.min_size_ratio outside [0,1]");
    if (!(framing.max_center_offset >= 0.0 && framing.max_center_offset <= 1.0)) {
        bad("framing.max_center_offset outside [0,1]");
    }
    if (!(framing.min_sharpness >= 0.0)) bad("framing.min_sharpness must be >= 0");
    detector.validate();
    match.validate();
}

std::optional<std::string> process_env(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
}

Config parse_config(const std::string& text, Config c) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) bad("top level must be an object");
    reject_unknown(doc,
                   {"data_dir", "bind", "port", "token", "association_window_s", "sync", "detector_model", "framing",
                    "detector", "match"},
                   "");

    std::string s;
    if (doc.contains("data_dir")) {
        take(doc, "data_dir", s, "");
        c.data_dir = s;
    }
    take(doc, "bind", c.bind, "");
    take(doc, "port", c.port, "");
    if (doc.contains("token")) {
        if (doc["token"].is_null()) {
            c.token.reset();
        } else {
            take(doc, "token", s, "");
            c.token = s;
        }
    }
    if (doc.contains("association_window_s")) {
        double w = 0;
        take(doc, "association_window_s", w, "");
        c.association_window = seconds_to_us(w);
    }
    take(doc, "sync", c.sync, "");
    if (doc.contains("detector_model")) {
        take(doc, "detector_model", s, "");
        c.detector_model = s;
    }
    if (auto it = doc.find("framing"); it != doc.end()) {
        if (!it->is_object()) bad("'framing' must be an object");
        reject_unknown(*it, {"min_size_ratio", "max_center_offset", "min_sharpness"}, "framing.");
        take(*it, "min_size_ratio", c.framing.min_size_ratio, "framing.");
        take(*it, "max_center_offset", c.framing.max_center_offset, "framing.");
        take(*it, "min_sharpness", c.framing.min_sharpness, "framing.");
    }
    if (auto it = doc.find("detector"); it != doc.end()) {
        if (!it->is_object()) bad("'detector' must be an object");
        reject_unknown(*it, {"window", "stride", "pyramid_scale", "score_threshold", "nms_iou", "min_face", "refine"},
                       "detector.");
        take(*it, "window", c.detector.window, "detector.");
        take(*it, "stride", c.detector.stride, "detector.");
        take(*it, "pyramid_scale", c.detector.pyramid_scale, "detector.");
        take(*it, "score_threshold", c.detector.score_threshold, "detector.");
        take(*it, "nms_iou", c.detector.nms_iou, "detector.");
        take(*it, "min_face", c.detector.min_face, "detector.");
        take(*it, "refine", c.detector.refine, "detector.");
    }
    if (auto it = doc.find("match"); it != doc.end()) {
        if (!it->is_object()) bad("'match' must be an object");
        reject_unknown(*it, {"tolerance"}, "match.");
        take(*it, "tolerance", c.match.tolerance, "match.");
    }
    return c;
}

Config load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    Config c;
    if (file) {
        std::ifstream in(*file, std::ios::binary);
        if (!in) bad("cannot read " + file->string());
        std::ostringstream ss;
        ss << in.rdbuf();
        c = parse_config(ss.str(), c);
    }
    if (auto v = env("MFRS_DATA_DIR"); v && !v->empty()) c.data_dir = *v;
    if (auto v = env("MFRS_BIND"); v && !v->empty()) c.bind = *v;
    if (auto v = env("MFRS_PORT"); v && !v->empty()) {
        const double p = parse_number("MFRS_PORT", *v);
        if (p != std::floor(p) || p < 0 || p > 65535) bad("MFRS_PORT must be an integer in [0, 65535]");
        c.port = static_cast<int>(p);
    }
    if (auto v = env("MFRS_TOKEN")) {
        if (v->empty()) c.token.reset();
        else c.token = *v;
    }
    if (auto v = env("MFRS_ASSOCIATION_WINDOW_S"); v && !v->empty()) {
        c.association_window = seconds_to_us(parse_number("MFRS_ASSOCIATION_WINDOW_S", *v));
    }
    if (auto v = env("MFRS_TOLERANCE"); v && !v->empty()) c.match.tolerance = parse_number("MFRS_TOLERANCE", *v);
    if (auto v = env("MFRS_DETECTOR_MODEL"); v && !v->empty()) c.detector_model = *v;
    try {
        c.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw;
        fail(ErrorCode::InvalidConfig, e.what());
    }
    return c;
}

}  // namespace mfrs
