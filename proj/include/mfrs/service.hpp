#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mfrs/clock.hpp"
#include "mfrs/config.hpp"
#include "mfrs/detector.hpp"
#include "mfrs/memo.hpp"
#include "mfrs/store.hpp"

namespace httplib {
class Server;
}

namespace mfrs {

/// Closed set of API error codes.
enum class ApiErrorCode {
    Validation,         ///< 400
    BadRequest,         ///< 400
    UndecodableImage,   ///< 400
    UnsupportedAudio,   ///< 400
    MalformedAudio,     ///< 400
    Unauthorized,       ///< 401
    NotFound,           ///< 404
    MethodNotAllowed,   ///< 405
    FramingFailed,      ///< 422
    Internal            ///< 500
};

std::string_view to_string(ApiErrorCode code);
int http_status(ApiErrorCode code);

/// Transport-neutral request. Header names are matched case-insensitively.
struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;
    std::string body;

    std::optional<std::string> header(const std::string& name) const;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;

    nlohmann::json json() const { return nlohmann::json::parse(body); }
};

struct RecognitionEvent {
    std::uint64_t event_id = 0;
    nlohmann::json outcome;
};

/// Append-only in-memory event log with blocking readers. Each subscriber
/// keeps its own cursor (the last event_id it saw).
class EventHub {
public:
    explicit EventHub(std::size_t capacity = 1024) : capacity_(capacity) {}

    std::uint64_t publish(nlohmann::json outcome);
    /// Retained events with event_id > after, oldest first.
    std::vector<RecognitionEvent> since(std::uint64_t after) const;
    /// Like since(), but waits up to `timeout` when nothing is pending.
    std::vector<RecognitionEvent> wait(std::uint64_t after, std::chrono::milliseconds timeout) const;
    std::uint64_t last_id() const;
    void close();
    bool closed() const;

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    mutable std::condition_variable cv_;
    std::deque<RecognitionEvent> events_;
    std::uint64_t next_id_ = 1;
    bool closed_ = false;
};

inline constexpr const char* kSessionHeader = "X-MFRS-Session";

/// HTTP/JSON facade over the engine. handle() is the complete API; the
/// httplib binding only adapts transport and streams /api/events.
class Service {
public:
    Service(Config config, std::shared_ptr<Store> store, DetectorModel model,
            std::shared_ptr<const Clock> clock = nullptr);

    ApiResponse handle(const ApiRequest& request);

    EventHub& events() { return events_; }
    Store& store() { return *store_; }
    const Config& config() const { return config_; }

    /// Capture context of a session ("global" when no header is sent).
    CaptureContext session(const std::string& id) const;

    /// SSE frames for every event after `after`.
    static std::string sse_frames(const std::vector<RecognitionEvent>& events);

    /// Registers all routes on `server`.
    void bind(httplib::Server& server);

private:
    struct Route;

    ApiResponse dispatch(const ApiRequest& req);
    bool authorized(const ApiRequest& req) const;
    std::string session_key(const ApiRequest& req) const;

    ApiResponse get_config() const;
    ApiResponse create_person(const ApiRequest& req);
    ApiResponse list_persons() const;
    ApiResponse get_person(PersonId id) const;
    ApiResponse patch_person(PersonId id, const ApiRequest& req);
    ApiResponse delete_person(PersonId id);
    ApiResponse get_profile(PersonId id) const;
    ApiResponse list_person_encodings(PersonId id) const;
    ApiResponse enroll_image(PersonId id, const ApiRequest& req);
    ApiResponse encoding_image(EncodingId id) const;
    ApiResponse recognize(const ApiRequest& req);
    ApiResponse add_memo(const ApiRequest& req);
    ApiResponse list_memos(const ApiRequest& req) const;
    ApiResponse get_memo(MemoId id) const;
    ApiResponse patch_memo(MemoId id, const ApiRequest& req);
    ApiResponse delete_memo(MemoId id);
    ApiResponse memo_audio(MemoId id) const;
    ApiResponse event_backlog(const ApiRequest& req) const;

    Config config_;
    std::shared_ptr<Store> store_;
    DetectorModel model_;
    std::shared_ptr<const Clock> clock_;
    EventHub events_;
    mutable std::mutex sessions_mutex_;
    std::map<std::string, CaptureContext> sessions_;
};

/// httplib server on its own thread. Port 0 picks a free port.
class HttpServer {
public:
    HttpServer(Service& service, std::string bind, int port);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Throws IoError when the address cannot be bound.
    void start();
    void stop();
    int port() const { return port_; }

private:
    Service& service_;
    std::string bind_;
    int port_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

}  // namespace mfrs
