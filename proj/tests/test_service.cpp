#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <set>
#include <thread>

#include "facade.hpp"
#include "mfrs/audio.hpp"
#include "mfrs/error.hpp"
#include "mfrs/image_io.hpp"
#include "mfrs/json_codec.hpp"
#include "mfrs/random.hpp"
#include "mfrs/service.hpp"
#include "schema_check.hpp"
#include "support.hpp"

using namespace mfrs;
using nlohmann::json;

namespace {

std::string as_body(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

std::string png_of(const Image& img) { return as_body(encode_png(img)); }

std::string wav_of(std::size_t n, std::int16_t amplitude = 6000) {
    AudioClip c;
    for (std::size_t i = 0; i < n; ++i) c.samples.push_back(static_cast<std::int16_t>(i % 40 < 20 ? amplitude : -amplitude));
    return as_body(write_wav(c));
}

/// In-process service with a manual clock; every response is checked
/// against the published schema.
struct Api {
    std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(from_micros(1'700'000'000'000'000));
    std::shared_ptr<Store> store = std::make_shared<Store>(StoreOptions{{}, false, clock, 0});
    Service svc;

    explicit Api(Config cfg = {}) : svc(std::move(cfg), store, test::shared_model(), clock) {}

    ApiResponse call(const std::string& method, const std::string& path, std::string body = {},
                     std::map<std::string, std::string> query = {}, std::map<std::string, std::string> headers = {}) {
        ApiRequest req{method, path, std::move(query), std::move(headers), std::move(body)};
        ApiResponse res = svc.handle(req);
        CHECK_MESSAGE(test::api_schema().check_response(method, path, res).empty(),
                      test::api_schema().check_response(method, path, res));
        return res;
    }

    PersonId person(const std::string& name) {
        const ApiResponse r = call("POST", "/api/persons", json{{"name", name}}.dump());
        REQUIRE(r.status == 201);
        return r.json()["person_id"].get<PersonId>();
    }

    ApiResponse enroll(PersonId id, const Image& img, std::map<std::string, std::string> headers = {}) {
        return call("POST", "/api/persons/" + std::to_string(id) + "/images", png_of(img), {}, std::move(headers));
    }
};

std::string error_code(const ApiResponse& r) { return r.json()["error"]["code"].get<std::string>(); }

}  // namespace

TEST_SUITE("persons endpoint") {
    TEST_CASE("create returns 201 with the new id and a Location header") {
        Api api;
        const ApiResponse r = api.call("POST", "/api/persons", R"({"name":"Ana","relationship":"daughter","notes":"x"})");
        CHECK(r.status == 201);
        const json j = r.json();
        CHECK(j["person_id"] == 1);
        CHECK(j["relationship"] == "daughter");
        CHECK(r.headers.at("Location") == "/api/persons/1");
        CHECK(api.call("POST", "/api/persons", R"({"name":"Ben"})").json()["person_id"] == 2);
    }

    TEST_CASE("create validation") {
        Api api;
        ApiResponse r = api.call("POST", "/api/persons", R"({"name":""})");
        CHECK(r.status == 400);
        CHECK(error_code(r) == "validation");
        CHECK(error_code(api.call("POST", "/api/persons", R"({"relationship":"x"})")) == "validation");
        CHECK(error_code(api.call("POST", "/api/persons", R"({"name":5})")) == "validation");
        r = api.call("POST", "/api/persons", "{not json");
        CHECK(r.status == 400);
        CHECK(error_code(r) == "bad_request");
        CHECK(error_code(api.call("POST", "/api/persons", "[1]")) == "bad_request");
        CHECK(api.store->person_count() == 0);
    }

    TEST_CASE("get, list, patch, delete") {
        Api api;
        const PersonId a = api.person("Ana");
        api.person("Ben");
        CHECK(api.call("GET", "/api/persons").json().size() == 2);
        CHECK(api.call("GET", "/api/persons/" + std::to_string(a)).json()["name"] == "Ana");

        api.clock->advance(std::chrono::seconds(5));
        ApiResponse r = api.call("PATCH", "/api/persons/1", R"({"notes":"likes tea"})");
        CHECK(r.status == 200);
        CHECK(r.json()["notes"] == "likes tea");
        CHECK(r.json()["name"] == "Ana");
        CHECK(r.json()["updated_at"] != r.json()["created_at"]);
        CHECK(error_code(api.call("PATCH", "/api/persons/1", R"({"age":3})")) == "validation");
        CHECK(error_code(api.call("PATCH", "/api/persons/1", R"({"name":""})")) == "validation");

        r = api.call("DELETE", "/api/persons/1");
        CHECK(r.status == 204);
        CHECK(r.body.empty());
        CHECK(api.call("GET", "/api/persons/1").status == 404);
        CHECK(api.call("DELETE", "/api/persons/1").status == 404);
        CHECK(api.call("PATCH", "/api/persons/1", R"({"notes":"x"})").status == 404);
    }

    TEST_CASE("routing errors") {
        Api api;
        CHECK(api.call("GET", "/api/persons/abc").status == 404);
        CHECK(api.call("GET", "/api/persons/0").status == 404);
        CHECK(api.call("GET", "/api/persons/-1").status == 404);
        CHECK(api.call("GET", "/api/nothing").status == 404);
        CHECK(api.call("GET", "/elsewhere").status == 404);
        const ApiResponse r = api.call("PUT", "/api/persons");
        CHECK(r.status == 405);
        CHECK(error_code(r) == "method_not_allowed");
        CHECK(api.call("GET", "/api/recognize").status == 405);
    }
}

TEST_SUITE("images endpoint") {
    TEST_CASE("passing glyph is enrolled with its source image") {
        Api api;
        const PersonId id = api.person("Ana");
        const Image img = test::face(31, 0).image;
        const ApiResponse r = api.enroll(id, img);
        REQUIRE(r.status == 201);
        const json j = r.json();
        CHECK(j["framing"]["pass"] == true);
        CHECK(j["encoding_id"] == 1);
        CHECK(r.headers.at("Location") == "/api/encodings/1/image");
        CHECK(api.store->encoding_count(id) == 1);

        const ApiResponse image = api.call("GET", "/api/encodings/1/image");
        CHECK(image.status == 200);
        CHECK(image.content_type == "image/png");
        CHECK(image.body == png_of(img));

        const json encs = api.call("GET", "/api/persons/1/encodings").json();
        REQUIRE(encs.size() == 1);
        CHECK(encs[0]["encoding"].size() == 128);
    }

    TEST_CASE("blank image is 422 NoFace with or without override") {
        Api api;
        const PersonId id = api.person("Ana");
        const std::string body = png_of(test::blank(256, 256));
        const std::string path = "/api/persons/" + std::to_string(id) + "/images";
        for (const char* flag : {"false", "true"}) {
            const ApiResponse r = api.call("POST", path, body, {{"override_framing", flag}});
            CHECK(r.status == 422);
            CHECK(error_code(r) == "framing_failed");
            CHECK(r.json()["error"]["details"]["failures"] == json::array({"NoFace"}));
        }
        CHECK(api.store->encoding_count(id) == 0);
    }

    TEST_CASE("override waives quality failures") {
        Api api;
        const PersonId id = api.person("Ana");
        GlyphParams p;
        p.seed = 77;
        p.identity_seed = 904;
        p.face_fraction = 0.3;
        p.center_x = 0.25;
        const std::string body = png_of(generate_face_glyph(p).image);
        const std::string path = "/api/persons/" + std::to_string(id) + "/images";
        ApiResponse r = api.call("POST", path, body);
        REQUIRE(r.status == 422);
        CHECK(r.json()["error"]["details"]["failures"] == json::array({"OffCenter"}));
        r = api.call("POST", path, body, {{"override_framing", "true"}});
        CHECK(r.status == 201);
        CHECK(r.json()["framing"]["pass"] == false);
        CHECK(error_code(api.call("POST", path, body, {{"override_framing", "maybe"}})) == "bad_request");
    }

    TEST_CASE("image errors") {
        Api api;
        CHECK(api.enroll(9, test::face(31, 0).image).status == 404);
        const PersonId id = api.person("Ana");
        const ApiResponse r = api.call("POST", "/api/persons/" + std::to_string(id) + "/images", "hello");
        CHECK(r.status == 400);
        CHECK(error_code(r) == "undecodable_image");
        CHECK(api.call("GET", "/api/encodings/3/image").status == 404);
    }
}

TEST_SUITE("recognize endpoint") {
    TEST_CASE("text payload is 400") {
        Api api;
        const ApiResponse r = api.call("POST", "/api/recognize", "plain text");
        CHECK(r.status == 400);
        CHECK(error_code(r) == "undecodable_image");
        CHECK(api.svc.events().last_id() == 0);
    }

    TEST_CASE("blank image has no faces") {
        Api api;
        const ApiResponse r = api.call("POST", "/api/recognize", png_of(test::blank(256, 256)));
        CHECK(r.status == 200);
        CHECK(r.json()["faces"] == json::array());
        CHECK(r.headers.at("X-MFRS-Event-Id") == "1");
    }

    TEST_CASE("enrolled identity variant is matched and the outcome becomes an event") {
        Api api;
        const PersonId id = api.person("Ana");
        for (std::uint64_t v = 0; v < 3; ++v) REQUIRE(api.enroll(id, test::face(501, v).image).status == 201);
        const ApiResponse r = api.call("POST", "/api/recognize", png_of(test::face(501, 7).image));
        REQUIRE(r.status == 200);
        const json j = r.json();
        REQUIRE(j["faces"].size() == 1);
        CHECK(j["faces"][0]["match"]["person_id"] == id);
        CHECK(j["faces"][0]["profile"]["person"]["name"] == "Ana");
        const auto events = api.svc.events().since(0);
        REQUIRE(events.size() == 1);
        CHECK(events[0].outcome == j);
    }
}

TEST_SUITE("memos endpoint") {
    TEST_CASE("memo 30 s after an enrollment is linked to that person") {
        Api api;
        const PersonId id = api.person("Ana");
        REQUIRE(api.enroll(id, test::face(31, 0).image).status == 201);
        api.clock->advance(std::chrono::seconds(30));
        const ApiResponse r = api.call("POST", "/api/memos", wav_of(16000), {{"label", "first visit"}});
        REQUIRE(r.status == 201);
        CHECK(r.json()["person_id"] == id);
        CHECK(r.json()["label"] == "first visit");
        CHECK(r.json()["duration_s"] == doctest::Approx(1.0));
        CHECK(r.headers.at("Location") == "/api/memos/1");
    }

    TEST_CASE("association is per session") {
        Api api;
        const PersonId id = api.person("Ana");
        REQUIRE(api.enroll(id, test::face(31, 0).image, {{kSessionHeader, "tablet"}}).status == 201);
        api.clock->advance(std::chrono::seconds(10));
        CHECK(api.call("POST", "/api/memos", wav_of(800), {}, {{"x-mfrs-session", "tablet"}}).json()["person_id"] == id);
        CHECK(api.call("POST", "/api/memos", wav_of(800), {}, {{kSessionHeader, "phone"}}).json()["person_id"].is_null());
        CHECK(api.call("POST", "/api/memos", wav_of(800)).json()["person_id"].is_null());
    }

    TEST_CASE("memo after the window, or after the person was deleted, stays unlinked") {
        Api api;
        const PersonId a = api.person("Ana");
        REQUIRE(api.enroll(a, test::face(31, 0).image).status == 201);
        api.clock->advance(std::chrono::seconds(121));
        CHECK(api.call("POST", "/api/memos", wav_of(800)).json()["person_id"].is_null());

        const PersonId b = api.person("Ben");
        REQUIRE(api.enroll(b, test::face(32, 0).image).status == 201);
        REQUIRE(api.call("DELETE", "/api/persons/" + std::to_string(b)).status == 204);
        const ApiResponse r = api.call("POST", "/api/memos", wav_of(800));
        CHECK(r.status == 201);
        CHECK(r.json()["person_id"].is_null());
        CHECK(api.call("GET", "/api/memos", "", {{"unlinked", "true"}}).json().size() == 2);
    }

    TEST_CASE("audio and id errors") {
        Api api;
        ApiResponse r = api.call("POST", "/api/memos", as_body(test::golden_bytes("stereo.wav")));
        CHECK(r.status == 400);
        CHECK(error_code(r) == "unsupported_audio");
        r = api.call("POST", "/api/memos", wav_of(100).substr(0, 20));
        CHECK(error_code(r) == "malformed_audio");
        r = api.call("POST", "/api/memos", wav_of(0));
        CHECK(error_code(r) == "validation");
        r = api.call("POST", "/api/memos", wav_of(800), {{"person_id", "42"}});
        CHECK(r.status == 404);
        CHECK(error_code(api.call("POST", "/api/memos", wav_of(800), {{"person_id", "x"}})) == "bad_request");
        CHECK(api.store->all_memos().empty());
    }

    TEST_CASE("listing, linking, profile order, audio bytes, deletion") {
        Api api;
        const PersonId a = api.person("Ana");
        std::vector<std::string> uploads;
        for (int i = 0; i < 3; ++i) {
            api.clock->advance(std::chrono::seconds(1));
            uploads.push_back(wav_of(800 + 100 * static_cast<std::size_t>(i), static_cast<std::int16_t>(2000 * (i + 1))));
            REQUIRE(api.call("POST", "/api/memos", uploads.back(), {{"person_id", std::to_string(a)}}).status == 201);
        }
        const json profile = api.call("GET", "/api/persons/1/profile").json();
        REQUIRE(profile["memos"].size() == 3);
        CHECK(profile["memos"][0]["memo_id"] == 3);
        CHECK(profile["memos"][2]["memo_id"] == 1);
        CHECK(profile["presentation_text"] == "Ana");

        const ApiResponse audio = api.call("GET", "/api/memos/2/audio");
        CHECK(audio.status == 200);
        CHECK(audio.content_type == "audio/wav");
        CHECK(audio.body == as_body(write_wav(api.store->get_memo(2).clip)));
        CHECK(read_wav(std::span(reinterpret_cast<const std::uint8_t*>(audio.body.data()), audio.body.size())) ==
              api.store->get_memo(2).clip);

        CHECK(api.call("PATCH", "/api/memos/2", R"({"person_id":null})").json()["person_id"].is_null());
        CHECK(api.call("GET", "/api/memos", "", {{"unlinked", "1"}}).json().size() == 1);
        CHECK(api.call("GET", "/api/memos", "", {{"person_id", "1"}}).json().size() == 2);
        CHECK(api.call("GET", "/api/memos", "", {{"person_id", "1"}, {"unlinked", "true"}}).status == 400);
        CHECK(api.call("GET", "/api/memos", "", {{"person_id", "8"}}).status == 404);
        CHECK(api.call("PATCH", "/api/memos/2", R"({"person_id":1})").json()["person_id"] == 1);
        CHECK(api.call("PATCH", "/api/memos/2", R"({"person_id":7})").status == 404);
        CHECK(error_code(api.call("PATCH", "/api/memos/2", R"({})")) == "validation");
        CHECK(error_code(api.call("PATCH", "/api/memos/2", R"({"person_id":"1"})")) == "validation");

        CHECK(api.call("DELETE", "/api/memos/2").status == 204);
        CHECK(api.call("GET", "/api/memos/2").status == 404);
        CHECK(api.call("GET", "/api/memos/2/audio").status == 404);
        CHECK(api.call("GET", "/api/memos").json().size() == 2);
    }
}

TEST_SUITE("auth and config") {
    TEST_CASE("bearer token guards everything except config and health") {
        Config cfg;
        cfg.token = "s3cret";
        Api api(cfg);
        CHECK(api.call("GET", "/api/persons").status == 401);
        CHECK(error_code(api.call("GET", "/api/persons")) == "unauthorized");
        CHECK(api.call("GET", "/api/persons", "", {}, {{"Authorization", "Bearer wrong"}}).status == 401);
        CHECK(api.call("GET", "/api/persons", "", {}, {{"Authorization", "Bearer s3cret"}}).status == 200);
        CHECK(api.call("GET", "/api/persons", "", {}, {{"authorization", "bearer s3cret"}}).status == 200);
        CHECK(api.call("GET", "/api/persons", "", {}, {{"Authorization", "s3cret"}}).status == 401);
        CHECK(api.call("GET", "/api/events", "", {{"access_token", "s3cret"}}).status == 200);
        CHECK(api.call("POST", "/api/persons", R"({"name":"A"})").status == 401);
        CHECK(api.store->person_count() == 0);
        CHECK(api.call("GET", "/api/config").status == 200);
        CHECK(api.call("GET", "/api/health").status == 200);
        CHECK(api.call("GET", "/api/config").json()["auth_required"] == true);
    }

    TEST_CASE("config endpoint reports the effective settings") {
        Config cfg;
        cfg.association_window = std::chrono::seconds(45);
        cfg.match.tolerance = 0.5;
        cfg.framing.min_sharpness = 80.0;
        Api api(cfg);
        const json j = api.call("GET", "/api/config").json();
        CHECK(j["association_window_s"] == 45.0);
        CHECK(j["match"]["tolerance"] == 0.5);
        CHECK(j["framing"]["min_sharpness"] == 80.0);
        CHECK(j["framing"]["min_size_ratio"] == 0.2);
        CHECK(j["detector"]["window"] == 64);
        CHECK(j["session_header"] == kSessionHeader);
        CHECK(j["auth_required"] == false);
        CHECK(api.call("POST", "/api/config").status == 405);
    }

    TEST_CASE("configured window governs association") {
        Config cfg;
        cfg.association_window = std::chrono::seconds(10);
        Api api(cfg);
        const PersonId id = api.person("Ana");
        REQUIRE(api.enroll(id, test::face(31, 0).image).status == 201);
        api.clock->advance(std::chrono::seconds(11));
        CHECK(api.call("POST", "/api/memos", wav_of(800)).json()["person_id"].is_null());
    }

    TEST_CASE("service rejects a model that does not fit the detector config") {
        auto clock = std::make_shared<ManualClock>();
        auto store = std::make_shared<Store>(StoreOptions{{}, false, clock, 0});
        DetectorModel bad;
        bad.weights.assign(3, 0.0);
        CHECK_THROWS_AS(Service(Config{}, store, bad, clock), Error);
    }
}

TEST_SUITE("events") {
    TEST_CASE("backlog resumes after the last seen id") {
        Api api;
        for (int i = 0; i < 3; ++i) api.call("POST", "/api/recognize", png_of(test::blank(64, 64)));
        ApiResponse r = api.call("GET", "/api/events", "", {}, {{"Last-Event-ID", "1"}});
        CHECK(r.content_type == "text/event-stream");
        CHECK(r.body.find("id: 1\n") == std::string::npos);
        CHECK(r.body.find("id: 2\n") != std::string::npos);
        CHECK(r.body.find("id: 3\n") != std::string::npos);
        r = api.call("GET", "/api/events", "", {{"last_event_id", "3"}});
        CHECK(r.body.empty());
        CHECK(api.call("GET", "/api/events", "", {{"last_event_id", "x"}}).status == 400);
    }

    TEST_CASE("sse frame format") {
        const std::string s = Service::sse_frames({{7, json{{"faces", json::array()}}}});
        CHECK(s == "id: 7\nevent: recognition\ndata: {\"event_id\":7,\"outcome\":{\"faces\":[]}}\n\n");
    }

    TEST_CASE("hub ids increase and capacity drops the oldest") {
        EventHub hub(4);
        for (int i = 0; i < 6; ++i) CHECK(hub.publish(json(i)) == static_cast<std::uint64_t>(i + 1));
        const auto all = hub.since(0);
        REQUIRE(all.size() == 4);
        CHECK(all.front().event_id == 3);
        CHECK(all.back().event_id == 6);
        CHECK(hub.wait(6, std::chrono::milliseconds(10)).empty());
    }

    TEST_CASE("each subscriber sees every event exactly once from its resume point") {
        // Property over random publish/reconnect interleavings.
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            SplitMix64 rng(seed);
            EventHub hub;
            struct Sub {
                std::uint64_t cursor = 0;
                std::uint64_t start = 0;
                std::vector<std::uint64_t> seen;
            };
            std::vector<Sub> subs(3);
            for (auto& s : subs) s.start = s.cursor = static_cast<std::uint64_t>(rng.range(0, 2));
            std::uint64_t published = 0;
            for (int step = 0; step < 60; ++step) {
                const auto r = rng.range(0, 3);
                if (r < 2) {
                    hub.publish(json(step));
                    ++published;
                } else {
                    Sub& s = subs[static_cast<std::size_t>(rng.range(0, 2))];
                    for (const auto& e : hub.since(s.cursor)) {
                        s.seen.push_back(e.event_id);
                        s.cursor = e.event_id;
                    }
                }
            }
            for (auto& s : subs) {
                for (const auto& e : hub.since(s.cursor)) s.seen.push_back(e.event_id);
                std::vector<std::uint64_t> want;
                for (std::uint64_t id = s.start + 1; id <= published; ++id) want.push_back(id);
                CHECK(s.seen == want);
            }
        }
    }
}

TEST_SUITE("http transport") {
    TEST_CASE("real server: CRUD over HTTP and SSE resume without duplicates") {
        Api api;
        HttpServer server(api.svc, "127.0.0.1", 0);
        server.start();
        REQUIRE(server.port() > 0);
        httplib::Client client("127.0.0.1", server.port());
        client.set_read_timeout(5, 0);

        auto res = client.Get("/api/persons");
        REQUIRE(res);
        CHECK(res->status == 200);
        CHECK(res->body == "[]");
        res = client.Post("/api/persons", R"({"name":"Ana"})", "application/json");
        REQUIRE(res);
        CHECK(res->status == 201);
        CHECK(res->get_header_value("Location") == "/api/persons/1");
        res = client.Get("/api/config");
        REQUIRE(res);
        CHECK(json::parse(res->body)["match"]["tolerance"] == 0.6);
        res = client.Delete("/api/persons/9");
        REQUIRE(res);
        CHECK(res->status == 404);

        const std::string blank = png_of(test::blank(64, 64));
        for (int i = 0; i < 3; ++i) REQUIRE(client.Post("/api/recognize", blank, "image/png")->status == 200);

        // Reads the stream until `want` events arrived; returns their ids.
        auto stream = [&](std::uint64_t last_seen, std::size_t want, const std::function<void()>& once_open) {
            httplib::Client c("127.0.0.1", server.port());
            c.set_read_timeout(5, 0);
            std::vector<std::uint64_t> ids;
            std::string buffer;
            bool opened = false;
            httplib::Headers h{{"Last-Event-ID", std::to_string(last_seen)}};
            c.Get("/api/events", h, [&](const char* data, std::size_t len) {
                if (!opened) {
                    opened = true;
                    if (once_open) once_open();
                }
                buffer.append(data, len);
                std::size_t pos;
                while ((pos = buffer.find("\n\n")) != std::string::npos) {
                    const std::string frame = buffer.substr(0, pos);
                    buffer.erase(0, pos + 2);
                    if (frame.rfind("id: ", 0) == 0) ids.push_back(std::stoull(frame.substr(4)));
                }
                return ids.size() < want;
            });
            return ids;
        };

        CHECK(stream(0, 3, nullptr) == std::vector<std::uint64_t>{1, 2, 3});
        // Reconnect after event 2; a recognition published while connected arrives once.
        std::thread publisher;
        const auto resumed = stream(2, 2, [&] {
            publisher = std::thread([&] { api.svc.handle({"POST", "/api/recognize", {}, {}, blank}); });
        });
        publisher.join();
        CHECK(resumed == std::vector<std::uint64_t>{3, 4});
        server.stop();
    }

    TEST_CASE("binding an occupied port fails with IoError") {
        Api api;
        HttpServer first(api.svc, "127.0.0.1", 0);
        first.start();
        Api other;
        HttpServer second(other.svc, "127.0.0.1", first.port());
        try {
            second.start();
            FAIL("expected IoError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IoError);
        }
    }
}

TEST_SUITE("schema") {
    TEST_CASE("validator rejects malformed bodies") {
        const auto& s = test::api_schema();
        const json person = {{"person_id", 1}, {"name", "A"}, {"relationship", ""}, {"notes", ""},
                             {"created_at", "2023-11-14T22:13:20Z"}, {"updated_at", "2023-11-14T22:13:20.500000Z"}};
        const json ref = {{"$ref", "#/definitions/Person"}};
        CHECK(s.check(person, ref).empty());
        json bad = person;
        bad["extra"] = 1;
        CHECK_FALSE(s.check(bad, ref).empty());
        bad = person;
        bad.erase("name");
        CHECK_FALSE(s.check(bad, ref).empty());
        bad = person;
        bad["person_id"] = 0;
        CHECK_FALSE(s.check(bad, ref).empty());
        bad = person;
        bad["created_at"] = "yesterday";
        CHECK_FALSE(s.check(bad, ref).empty());
        CHECK_FALSE(s.check(json{{"error", {{"code", "teapot"}, {"message", "x"}}}}, {{"$ref", "#/definitions/Error"}}).empty());
        ApiResponse r;
        r.status = 200;
        r.body = "[]";
        CHECK_FALSE(s.check_response("GET", "/api/unknown", r).empty());
    }
}

TEST_SUITE("facade equivalence") {
    TEST_CASE("randomized API sequences equal direct engine calls") {
        std::size_t rejected = 0;
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            const test::FacadeRun run = test::run_api_facade(seed, 40);
            CHECK_MESSAGE(run.ok, run.failure);
            rejected += run.rejected;
        }
        CHECK(rejected > 0);
    }
}
