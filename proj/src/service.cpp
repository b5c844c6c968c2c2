#include "mfrs/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "mfrs/audio.hpp"
#include "mfrs/encoder.hpp"
#include "mfrs/error.hpp"
#include "mfrs/framing.hpp"
#include "mfrs/image_io.hpp"
#include "mfrs/json_codec.hpp"
#include "mfrs/retrieval.hpp"

namespace mfrs {

namespace {

constexpr const char* kGlobalSession = "global";

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

/// Thrown inside handlers; converted to an error response by handle().
struct ApiFailure {
    ApiErrorCode code;
    std::string message;
    Json details;
};

[[noreturn]] void api_fail(ApiErrorCode code, std::string message, Json details = nullptr) {
    throw ApiFailure{code, std::move(message), std::move(details)};
}

ApiResponse json_response(int status, const Json& body) {
    ApiResponse r;
    r.status = status;
    r.body = body.dump();
    return r;
}

ApiResponse error_response(ApiErrorCode code, const std::string& message, const Json& details = nullptr) {
    Json err{{"code", std::string(to_string(code))}, {"message", message}};
    if (!details.is_null()) err["details"] = details;
    return json_response(http_status(code), Json{{"error", err}});
}

ApiErrorCode api_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return ApiErrorCode::NotFound;
        case ErrorCode::ValidationError:
        case ErrorCode::InvalidInput:
        case ErrorCode::InvalidEncoding:
        case ErrorCode::InvalidRegion:
        case ErrorCode::EmptyAudio: return ApiErrorCode::Validation;
        case ErrorCode::DecodeError: return ApiErrorCode::UndecodableImage;
        case ErrorCode::WavUnsupported: return ApiErrorCode::UnsupportedAudio;
        case ErrorCode::WavMalformed: return ApiErrorCode::MalformedAudio;
        case ErrorCode::CorruptSnapshot:
        case ErrorCode::UnsupportedVersion: return ApiErrorCode::BadRequest;
        default: return ApiErrorCode::Internal;
    }
}

std::optional<std::int64_t> parse_id(std::string_view s) {
    std::int64_t v = 0;
    if (s.empty() || s.front() == '+' || s.front() == '-') return std::nullopt;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v <= 0) return std::nullopt;
    return v;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '/') {
            if (!cur.empty()) parts.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) parts.push_back(std::move(cur));
    return parts;
}

Json parse_body_object(const ApiRequest& req) {
    Json body;
    try {
        body = Json::parse(req.body);
    } catch (const Json::parse_error&) {
        api_fail(ApiErrorCode::BadRequest, "request body is not valid JSON");
    }
    if (!body.is_object()) api_fail(ApiErrorCode::BadRequest, "request body must be a JSON object");
    return body;
}

std::optional<std::string> optional_string(const Json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) api_fail(ApiErrorCode::Validation, std::string("'") + key + "' must be a string");
    return it->get<std::string>();
}

bool query_flag(const ApiRequest& req, const std::string& key) {
    auto it = req.query.find(key);
    if (it == req.query.end()) return false;
    const std::string v = lower(it->second);
    if (v == "true" || v == "1" || v.empty()) return true;
    if (v == "false" || v == "0") return false;
    api_fail(ApiErrorCode::BadRequest, "query parameter '" + key + "' must be true or false");
}

std::span<const std::uint8_t> body_bytes(const ApiRequest& req) {
    return {reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()};
}

bool constant_time_equal(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    unsigned char diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
    return diff == 0;
}

std::uint64_t parse_cursor(const std::string& text) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || p != text.data() + text.size()) {
        api_fail(ApiErrorCode::BadRequest, "event cursor must be a non-negative integer");
    }
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(ApiErrorCode code) {
    switch (code) {
        case ApiErrorCode::Validation: return "validation";
        case ApiErrorCode::BadRequest: return "bad_request";
        case ApiErrorCode::UndecodableImage: return "undecodable_image";
        case ApiErrorCode::UnsupportedAudio: return "unsupported_audio";
        case ApiErrorCode::MalformedAudio: return "malformed_audio";
        case ApiErrorCode::Unauthorized: return "unauthorized";
        case ApiErrorCode::NotFound: return "not_found";
        case ApiErrorCode::MethodNotAllowed: return "method_not_allowed";
        case ApiErrorCode::FramingFailed: return "framing_failed";
        case ApiErrorCode::Internal: return "internal";
    }
    return "internal";
}

int http_status(ApiErrorCode code) {
    switch (code) {
        case ApiErrorCode::Validation:
        case ApiErrorCode::BadRequest:
        case ApiErrorCode::UndecodableImage:
        case ApiErrorCode::UnsupportedAudio:
        case ApiErrorCode::MalformedAudio: return 400;
        case ApiErrorCode::Unauthorized: return 401;
        case ApiErrorCode::NotFound: return 404;
        case ApiErrorCode::MethodNotAllowed: return 405;
        case ApiErrorCode::FramingFailed: return 422;
        case ApiErrorCode::Internal: return 500;
    }
    return 500;
}

std::optional<std::string> ApiRequest::header(const std::string& name) const {
    const std::string want = lower(name);
    for (const auto& [k, v] : headers) {
        if (lower(k) == want) return v;
    }
    return std::nullopt;
}

// -- events -------------------------------------------------------------------

std::uint64_t EventHub::publish(nlohmann::json outcome) {
    std::uint64_t id;
    {
        std::lock_guard lock(mutex_);
        id = next_id_++;
        events_.push_back({id, std::move(outcome)});
        while (events_.size() > capacity_) events_.pop_front();
    }
    cv_.notify_all();
    return id;
}

std::vector<RecognitionEvent> EventHub::since(std::uint64_t after) const {
    std::lock_guard lock(mutex_);
    std::vector<RecognitionEvent> out;
    for (const auto& e : events_) {
        if (e.event_id > after) out.push_back(e);
    }
    return out;
}

std::vector<RecognitionEvent> EventHub::wait(std::uint64_t after, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return closed_ || (next_id_ - 1) > after; });
    std::vector<RecognitionEvent> out;
    for (const auto& e : events_) {
        if (e.event_id > after) out.push_back(e);
    }
    return out;
}

std::uint64_t EventHub::last_id() const {
    std::lock_guard lock(mutex_);
    return next_id_ - 1;
}

void EventHub::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool EventHub::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

// -- service ------------------------------------------------------------------

Service::Service(Config config, std::shared_ptr<Store> store, DetectorModel model, std::shared_ptr<const Clock> clock)
    : config_(std::move(config)), store_(std::move(store)), model_(std::move(model)), clock_(std::move(clock)) {
    if (!clock_) clock_ = std::make_shared<SystemClock>();
    config_.validate();
    if (model_.weights.size() != config_.detector.descriptor_length()) {
        fail(ErrorCode::InvalidConfig, "detector model length does not match detector config");
    }
}

CaptureContext Service::session(const std::string& id) const {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it != sessions_.end()) return it->second;
    CaptureContext ctx;
    ctx.association_window = config_.association_window;
    return ctx;
}

std::string Service::session_key(const ApiRequest& req) const {
    auto h = req.header(kSessionHeader);
    if (!h || h->empty()) return kGlobalSession;
    return *h;
}

bool Service::authorized(const ApiRequest& req) const {
    if (!config_.token) return true;
    if (auto h = req.header("Authorization")) {
        const std::string prefix = "Bearer ";
        if (h->size() > prefix.size() && lower(h->substr(0, prefix.size())) == lower(prefix) &&
            constant_time_equal(h->substr(prefix.size()), *config_.token)) {
            return true;
        }
    }
    // EventSource cannot send headers.
    if (auto it = req.query.find("access_token"); it != req.query.end()) {
        return constant_time_equal(it->second, *config_.token);
    }
    return false;
}

ApiResponse Service::handle(const ApiRequest& req) {
    try {
        return dispatch(req);
    } catch (const ApiFailure& f) {
        return error_response(f.code, f.message, f.details);
    } catch (const Error& e) {
        return error_response(api_code_for(e.code()), e.what());
    } catch (const std::exception& e) {
        return error_response(ApiErrorCode::Internal, e.what());
    }
}

ApiResponse Service::dispatch(const ApiRequest& req) {
    const auto parts = split_path(req.path);
    const std::string& m = req.method;
    if (parts.empty() || parts[0] != "api") api_fail(ApiErrorCode::NotFound, "no such endpoint: " + req.path);

    const bool open_route = parts.size() == 2 && (parts[1] == "config" || parts[1] == "health") && m == "GET";
    if (!open_route && !authorized(req)) api_fail(ApiErrorCode::Unauthorized, "missing or invalid bearer token");

    auto not_allowed = [&]() -> ApiResponse {
        api_fail(ApiErrorCode::MethodNotAllowed, m + " not supported on " + req.path);
    };
    auto id_at = [&](std::size_t i) -> std::int64_t {
        auto id = parse_id(parts[i]);
        if (!id) api_fail(ApiErrorCode::NotFound, "'" + parts[i] + "' is not a valid id");
        return *id;
    };

    const std::size_t n = parts.size();
    if (n == 2 && parts[1] == "health") return m == "GET" ? json_response(200, Json{{"status", "ok"}}) : not_allowed();
    if (n == 2 && parts[1] == "config") return m == "GET" ? get_config() : not_allowed();
    if (n == 2 && parts[1] == "recognize") return m == "POST" ? recognize(req) : not_allowed();
    if (n == 2 && parts[1] == "events") return m == "GET" ? event_backlog(req) : not_allowed();

    if (n >= 2 && parts[1] == "persons") {
        if (n == 2) {
            if (m == "GET") return list_persons();
            if (m == "POST") return create_person(req);
            return not_allowed();
        }
        const PersonId id = id_at(2);
        if (n == 3) {
            if (m == "GET") return get_person(id);
            if (m == "PATCH") return patch_person(id, req);
            if (m == "DELETE") return delete_person(id);
            return not_allowed();
        }
        if (n == 4 && parts[3] == "profile") return m == "GET" ? get_profile(id) : not_allowed();
        if (n == 4 && parts[3] == "images") return m == "POST" ? enroll_image(id, req) : not_allowed();
        if (n == 4 && parts[3] == "encodings") return m == "GET" ? list_person_encodings(id) : not_allowed();
    }
    if (n == 4 && parts[1] == "encodings" && parts[3] == "image") {
        return m == "GET" ? encoding_image(id_at(2)) : not_allowed();
    }
    if (n >= 2 && parts[1] == "memos") {
        if (n == 2) {
            if (m == "GET") return list_memos(req);
            if (m == "POST") return add_memo(req);
            return not_allowed();
        }
        const MemoId id = id_at(2);
        if (n == 3) {
            if (m == "GET") return get_memo(id);
            if (m == "PATCH") return patch_memo(id, req);
            if (m == "DELETE") return delete_memo(id);
            return not_allowed();
        }
        if (n == 4 && parts[3] == "audio") return m == "GET" ? memo_audio(id) : not_allowed();
    }
    api_fail(ApiErrorCode::NotFound, "no such endpoint: " + req.path);
}

ApiResponse Service::get_config() const {
    const auto& d = config_.detector;
    Json body{
        {"association_window_s", std::chrono::duration<double>(config_.association_window).count()},
        {"framing",
         {{"min_size_ratio", config_.framing.min_size_ratio},
          {"max_center_offset", config_.framing.max_center_offset},
          {"min_sharpness", config_.framing.min_sharpness}}},
        {"match", {{"tolerance", config_.match.tolerance}}},
        {"detector",
         {{"window", d.window},
          {"stride", d.stride},
          {"pyramid_scale", d.pyramid_scale},
          {"score_threshold", d.score_threshold},
          {"nms_iou", d.nms_iou},
          {"min_face", d.min_face},
          {"refine", d.refine}}},
        {"session_header", kSessionHeader},
        {"auth_required", config_.token.has_value()},
    };
    return json_response(200, body);
}

ApiResponse Service::create_person(const ApiRequest& req) {
    const Json body = parse_body_object(req);
    auto name = optional_string(body, "name");
    if (!name) api_fail(ApiErrorCode::Validation, "'name' is required");
    const auto relationship = optional_string(body, "relationship").value_or("");
    const auto notes = optional_string(body, "notes").value_or("");
    const PersonRecord p = store_->create_person(*name, relationship, notes);
    ApiResponse r = json_response(201, Json(p));
    r.headers["Location"] = "/api/persons/" + std::to_string(p.person_id);
    return r;
}

ApiResponse Service::list_persons() const { return json_response(200, Json(store_->list_persons())); }

ApiResponse Service::get_person(PersonId id) const { return json_response(200, Json(store_->get_person(id))); }

ApiResponse Service::patch_person(PersonId id, const ApiRequest& req) {
    const Json body = parse_body_object(req);
    for (const auto& [key, value] : body.items()) {
        if (key != "name" && key != "relationship" && key != "notes") {
            api_fail(ApiErrorCode::Validation, "unknown field '" + key + "'");
        }
    }
    PersonUpdate upd;
    upd.name = optional_string(body, "name");
    upd.relationship = optional_string(body, "relationship");
    upd.notes = optional_string(body, "notes");
    return json_response(200, Json(store_->update_person(id, upd)));
}

ApiResponse Service::delete_person(PersonId id) {
    store_->delete_person(id);
    ApiResponse r;
    r.status = 204;
    r.content_type.clear();
    return r;
}

ApiResponse Service::get_profile(PersonId id) const { return json_response(200, Json(retrieve_profile(*store_, id))); }

ApiResponse Service::list_person_encodings(PersonId id) const {
    store_->get_person(id);
    return json_response(200, Json(store_->encodings_for(id)));
}

ApiResponse Service::enroll_image(PersonId id, const ApiRequest& req) {
    const bool override_framing = query_flag(req, "override_framing");
    store_->get_person(id);
    const Image image = load_image(body_bytes(req));
    const auto faces = detect_faces(image, model_, config_.detector);
    const FramingReport report = framing_from_detections(image, faces, config_.framing);
    const bool structural = report.has(FramingFailure::NoFace) || report.has(FramingFailure::MultipleFaces);
    if (!report.pass && (structural || !override_framing)) {
        api_fail(ApiErrorCode::FramingFailed, structural && override_framing
                                                  ? "framing override cannot waive NoFace or MultipleFaces"
                                                  : "capture failed the framing check",
                 Json(report));
    }
    FaceEncoding encoding;
    try {
        encoding = encode_face(image, *report.face, config_.detector);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateFace) throw;
        api_fail(ApiErrorCode::FramingFailed, e.what(), Json(report));
    }
    const Timestamp now = clock_->now();
    const EncodingRecord rec = store_->add_encoding(id, encoding, Bytes(req.body.begin(), req.body.end()));
    {
        std::lock_guard lock(sessions_mutex_);
        auto [it, inserted] = sessions_.try_emplace(session_key(req));
        if (inserted) it->second.association_window = config_.association_window;
        it->second.last_enrollment = Enrollment{id, now};
    }
    ApiResponse r = json_response(
        201, Json{{"encoding_id", rec.encoding_id}, {"person_id", id}, {"framing", Json(report)}});
    r.headers["Location"] = "/api/encodings/" + std::to_string(rec.encoding_id) + "/image";
    return r;
}

ApiResponse Service::encoding_image(EncodingId id) const {
    const Bytes bytes = store_->source_image(id);
    ApiResponse r;
    r.body.assign(bytes.begin(), bytes.end());
    r.content_type = "application/octet-stream";
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G') {
        r.content_type = "image/png";
    } else if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
        r.content_type = "image/x-portable-anymap";
    }
    return r;
}

ApiResponse Service::recognize(const ApiRequest& req) {
    const Image image = load_image(body_bytes(req));
    const RecognitionOutcome outcome =
        recognize_and_retrieve(*store_, image, model_, config_.detector, config_.match, clock_->now());
    Json body(outcome);
    const std::uint64_t event_id = events_.publish(body);
    ApiResponse r = json_response(200, body);
    r.headers["X-MFRS-Event-Id"] = std::to_string(event_id);
    return r;
}

ApiResponse Service::add_memo(const ApiRequest& req) {
    std::optional<PersonId> person;
    if (auto it = req.query.find("person_id"); it != req.query.end() && !it->second.empty()) {
        person = parse_id(it->second);
        if (!person) api_fail(ApiErrorCode::BadRequest, "person_id must be a positive integer");
    }
    std::string label;
    if (auto it = req.query.find("label"); it != req.query.end()) label = it->second;

    const AudioClip raw = read_wav(body_bytes(req));
    if (raw.samples.empty()) api_fail(ApiErrorCode::Validation, "memo audio contains no samples");
    VoiceMemo memo;
    memo.person_id = person;
    memo.clip = noise_gate(raw);
    memo.created_at = clock_->now();
    memo.label = label;
    if (!person) {
        memo = associate_memo(std::move(memo), session(session_key(req)), memo.created_at);
        // The enrolled person may have been deleted since.
        if (memo.person_id && !store_->find_person(*memo.person_id)) memo.person_id.reset();
    }
    const MemoId id = store_->add_memo(memo);
    ApiResponse r = json_response(201, Json(memo_info(store_->get_memo(id))));
    r.headers["Location"] = "/api/memos/" + std::to_string(id);
    return r;
}

ApiResponse Service::list_memos(const ApiRequest& req) const {
    const bool unlinked = query_flag(req, "unlinked");
    auto it = req.query.find("person_id");
    if (unlinked && it != req.query.end()) api_fail(ApiErrorCode::BadRequest, "use either person_id or unlinked");
    if (unlinked) return json_response(200, Json(store_->unlinked_memos()));
    if (it != req.query.end()) {
        auto id = parse_id(it->second);
        if (!id) api_fail(ApiErrorCode::BadRequest, "person_id must be a positive integer");
        store_->get_person(*id);
        return json_response(200, Json(store_->memos_for(*id)));
    }
    return json_response(200, Json(store_->all_memos()));
}

ApiResponse Service::get_memo(MemoId id) const { return json_response(200, Json(memo_info(store_->get_memo(id)))); }

ApiResponse Service::patch_memo(MemoId id, const ApiRequest& req) {
    const Json body = parse_body_object(req);
    for (const auto& [key, value] : body.items()) {
        if (key != "person_id") api_fail(ApiErrorCode::Validation, "unknown field '" + key + "'");
    }
    auto it = body.find("person_id");
    if (it == body.end()) api_fail(ApiErrorCode::Validation, "'person_id' is required (null unlinks)");
    std::optional<PersonId> person;
    if (!it->is_null()) {
        if (!it->is_number_integer()) api_fail(ApiErrorCode::Validation, "'person_id' must be an integer or null");
        person = it->get<PersonId>();
    }
    return json_response(200, Json(store_->link_memo(id, person)));
}

ApiResponse Service::delete_memo(MemoId id) {
    store_->delete_memo(id);
    ApiResponse r;
    r.status = 204;
    r.content_type.clear();
    return r;
}

ApiResponse Service::memo_audio(MemoId id) const {
    const Bytes wav = write_wav(store_->get_memo(id).clip);
    ApiResponse r;
    r.content_type = "audio/wav";
    r.body.assign(wav.begin(), wav.end());
    return r;
}

std::string Service::sse_frames(const std::vector<RecognitionEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        const Json data{{"event_id", e.event_id}, {"outcome", e.outcome}};
        out += "id: " + std::to_string(e.event_id) + "\nevent: recognition\ndata: " + data.dump() + "\n\n";
    }
    return out;
}

namespace {
std::uint64_t resume_cursor(const ApiRequest& req) {
    if (auto h = req.header("Last-Event-ID")) return parse_cursor(*h);
    if (auto it = req.query.find("last_event_id"); it != req.query.end()) return parse_cursor(it->second);
    return 0;
}
}  // namespace

ApiResponse Service::event_backlog(const ApiRequest& req) const {
    ApiResponse r;
    r.content_type = "text/event-stream";
    r.body = sse_frames(events_.since(resume_cursor(req)));
    return r;
}

// -- httplib binding ----------------------------------------------------------

namespace {

ApiRequest from_httplib(const httplib::Request& req) {
    ApiRequest out;
    out.method = req.method;
    out.path = req.path;
    for (const auto& [k, v] : req.params) out.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) out.headers.emplace(k, v);
    out.body = req.body;
    return out;
}

void to_httplib(const ApiResponse& in, httplib::Response& res) {
    res.status = in.status;
    for (const auto& [k, v] : in.headers) res.set_header(k, v);
    if (!in.content_type.empty()) res.set_content(in.body, in.content_type);
}

}  // namespace

void Service::bind(httplib::Server& server) {
    server.Get("/api/events", [this](const httplib::Request& hreq, httplib::Response& res) {
        const ApiRequest req = from_httplib(hreq);
        std::uint64_t cursor = 0;
        try {
            if (!authorized(req)) api_fail(ApiErrorCode::Unauthorized, "missing or invalid bearer token");
            cursor = resume_cursor(req);
        } catch (const ApiFailure& f) {
            to_httplib(error_response(f.code, f.message), res);
            return;
        }
        res.set_header("Cache-Control", "no-cache");
        auto state = std::make_shared<std::uint64_t>(cursor);
        res.set_chunked_content_provider("text/event-stream", [this, state](std::size_t, httplib::DataSink& sink) {
            if (events_.closed()) {
                sink.done();
                return true;
            }
            const auto batch = events_.wait(*state, std::chrono::milliseconds(500));
            if (batch.empty()) {
                // Comment line doubles as a liveness probe for dropped clients.
                static const std::string keepalive = ": keepalive\n\n";
                return sink.write(keepalive.data(), keepalive.size());
            }
            const std::string frames = sse_frames(batch);
            if (!sink.write(frames.data(), frames.size())) return false;
            *state = batch.back().event_id;
            return true;
        });
    });
    auto generic = [this](const httplib::Request& hreq, httplib::Response& res) {
        to_httplib(handle(from_httplib(hreq)), res);
    };
    server.Get(".*", generic);
    server.Post(".*", generic);
    server.Patch(".*", generic);
    server.Put(".*", generic);
    server.Delete(".*", generic);
}

HttpServer::HttpServer(Service& service, std::string bind, int port)
    : service_(service), bind_(std::move(bind)), port_(port), server_(std::make_unique<httplib::Server>()) {
    // httplib's default adds SO_REUSEPORT, which would let two servers share a port.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    service_.bind(*server_);
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start() {
    if (port_ == 0) {
        port_ = server_->bind_to_any_port(bind_);
        if (port_ < 0) fail(ErrorCode::IoError, "cannot bind " + bind_);
    } else if (!server_->bind_to_port(bind_, port_)) {
        fail(ErrorCode::IoError, "cannot bind " + bind_ + ":" + std::to_string(port_));
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void HttpServer::stop() {
    service_.events().close();
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace mfrs
