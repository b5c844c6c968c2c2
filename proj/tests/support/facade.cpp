#include "facade.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "mfrs/audio.hpp"
#include "mfrs/bytes.hpp"
#include "mfrs/cli.hpp"
#include "mfrs/encoder.hpp"
#include "mfrs/error.hpp"
#include "mfrs/framing.hpp"
#include "mfrs/image_io.hpp"
#include "mfrs/json_codec.hpp"
#include "mfrs/random.hpp"
#include "mfrs/retrieval.hpp"
#include "mfrs/service.hpp"
#include "schema_check.hpp"
#include "support.hpp"

namespace mfrs::test {

namespace {

enum class Outcome { Ok, NotFound, Validation, Framing, Decode, Audio };

const char* name_of(Outcome o) {
    switch (o) {
        case Outcome::Ok: return "ok";
        case Outcome::NotFound: return "not_found";
        case Outcome::Validation: return "validation";
        case Outcome::Framing: return "framing";
        case Outcome::Decode: return "decode";
        case Outcome::Audio: return "audio";
    }
    return "?";
}

Outcome outcome_of(const Error& e) {
    switch (e.code()) {
        case ErrorCode::NotFound: return Outcome::NotFound;
        case ErrorCode::DecodeError: return Outcome::Decode;
        case ErrorCode::WavMalformed:
        case ErrorCode::WavUnsupported: return Outcome::Audio;
        case ErrorCode::DegenerateFace: return Outcome::Framing;
        default: return Outcome::Validation;
    }
}

int api_status(Outcome o, int ok_status) {
    switch (o) {
        case Outcome::Ok: return ok_status;
        case Outcome::NotFound: return 404;
        case Outcome::Framing: return 422;
        default: return 400;
    }
}

int cli_exit(Outcome o) {
    switch (o) {
        case Outcome::Ok: return kExitOk;
        case Outcome::Decode:
        case Outcome::Audio: return kExitIo;
        default: return kExitDomain;
    }
}

/// Inputs shared by every run: three passing faces, a face-free backdrop, an
/// off-centre face (waivable), a non-image; two valid clips, a stereo and a
/// truncated WAV. Files are written once for the CLI.
struct Pool {
    std::vector<Bytes> images;
    std::vector<Bytes> wavs;
    TempDir dir;
    std::vector<std::string> image_files;
    std::vector<std::string> wav_files;

    static constexpr int kFaces = 3;
    static constexpr int kBlank = 3;
    static constexpr int kOffCenter = 4;
    static constexpr int kGarbage = 5;

    Pool() {
        for (int i = 0; i < kFaces; ++i) {
            const Glyph g = face(901 + static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(i), 192);
            images.push_back(i == 1 ? encode_png(g.image) : encode_pnm(g.image));
        }
        images.push_back(encode_pnm(generate_background(11, 192, 192)));
        GlyphParams p;
        p.seed = 77;
        p.identity_seed = 904;
        p.face_fraction = 0.3;
        p.center_x = 0.25;
        images.push_back(encode_pnm(generate_face_glyph(p).image));
        const std::string junk = "definitely not an image";
        images.emplace_back(junk.begin(), junk.end());

        SplitMix64 rng(5);
        AudioClip tone;
        for (int i = 0; i < 16000; ++i) {
            const double s = (i > 4000 && i < 12000 ? 8000.0 : 0.0) * std::sin(2 * 3.14159265358979 * 440 * i / 16000.0);
            tone.samples.push_back(static_cast<std::int16_t>(std::lround(s + rng.uniform(-60, 60))));
        }
        AudioClip noise;
        for (int i = 0; i < 800; ++i) noise.samples.push_back(static_cast<std::int16_t>(rng.range(-300, 300)));
        wavs.push_back(write_wav(tone));
        wavs.push_back(write_wav(noise));
        wavs.push_back(golden_bytes("stereo.wav"));
        Bytes truncated = wavs[0];
        truncated.resize(30);
        wavs.push_back(truncated);

        for (std::size_t i = 0; i < images.size(); ++i) {
            image_files.push_back((dir / ("img" + std::to_string(i) + (i == 1 ? ".png" : ".pgm"))).string());
            write_file_bytes(image_files.back(), images[i]);
        }
        for (std::size_t i = 0; i < wavs.size(); ++i) {
            wav_files.push_back((dir / ("clip" + std::to_string(i) + ".wav")).string());
            write_file_bytes(wav_files.back(), wavs[i]);
        }
    }
};

const Pool& pool() {
    static const Pool p;
    return p;
}

/// Engine-side enrollment preparation: decode, detect, framing, encode.
/// Deterministic, so memoised per pool image.
struct Prepared {
    Outcome decode = Outcome::Ok;
    FramingReport report;
    std::optional<FaceEncoding> encoding;
};

const Prepared& prepare(int image, const Config& cfg) {
    static std::mutex mu;
    static std::map<int, Prepared> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(image); it != cache.end()) return it->second;
    Prepared p;
    try {
        const Image img = load_image(pool().images[static_cast<std::size_t>(image)]);
        const auto faces = detect_faces(img, shared_model(), cfg.detector);
        p.report = framing_from_detections(img, faces, cfg.framing);
        if (p.report.face) {
            try {
                p.encoding = encode_face(img, *p.report.face, cfg.detector);
            } catch (const Error&) {
            }
        }
    } catch (const Error& e) {
        p.decode = outcome_of(e);
    }
    return cache.emplace(image, std::move(p)).first->second;
}

Outcome enrollment_outcome(const Prepared& p, bool override_framing) {
    if (p.decode != Outcome::Ok) return p.decode;
    const bool structural = p.report.has(FramingFailure::NoFace) || p.report.has(FramingFailure::MultipleFaces);
    if (!p.report.pass && (structural || !override_framing)) return Outcome::Framing;
    if (!p.encoding) return Outcome::Framing;
    return Outcome::Ok;
}

int pick_image(SplitMix64& rng) {
    const auto r = rng.range(0, 9);
    if (r < 6) return static_cast<int>(r % Pool::kFaces);
    if (r < 7) return Pool::kBlank;
    if (r < 9) return Pool::kOffCenter;
    return Pool::kGarbage;
}

int pick_wav(SplitMix64& rng) {
    const auto r = rng.range(0, 11);
    if (r < 6) return 0;
    if (r < 10) return 1;
    return static_cast<int>(r - 8);
}

PersonId pick_person(SplitMix64& rng, const Store& s) {
    const auto persons = s.list_persons();
    if (persons.empty() || rng.range(0, 7) == 0) return s.contents().next_person + rng.range(0, 2);
    return persons[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(persons.size()) - 1))].person_id;
}

MemoId pick_memo(SplitMix64& rng, const Store& s) {
    const auto memos = s.all_memos();
    if (memos.empty() || rng.range(0, 7) == 0) return s.contents().next_memo + rng.range(0, 2);
    return memos[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(memos.size()) - 1))].memo_id;
}

std::string name_for(SplitMix64& rng) {
    static const char* names[] = {"Ana", "Ben", "Cy", "Dee", "Eli", "Fay"};
    return names[rng.range(0, 5)] + std::to_string(rng.range(0, 99));
}

/// Runs `f` against the direct store and classifies any engine error.
template <class F>
Outcome engine(F&& f) {
    try {
        f();
        return Outcome::Ok;
    } catch (const Error& e) {
        return outcome_of(e);
    }
}

/// Memo as the engine would store it before association.
std::optional<VoiceMemo> gated_memo(int wav, Timestamp now, const std::string& label, Outcome& out) {
    try {
        VoiceMemo m;
        m.clip = noise_gate(read_wav(pool().wavs[static_cast<std::size_t>(wav)]));
        m.created_at = now;
        m.label = label;
        return m;
    } catch (const Error& e) {
        out = outcome_of(e);
        return std::nullopt;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

FacadeRun run_api_facade(std::uint64_t seed, std::size_t n_ops) {
    FacadeRun run;
    auto clock = std::make_shared<ManualClock>(from_micros(1'700'000'000'000'000));
    Config cfg;
    auto api_store = std::make_shared<Store>(StoreOptions{{}, false, clock, 0});
    Service svc(cfg, api_store, shared_model(), clock);
    Store direct(StoreOptions{{}, false, clock, 0});
    std::map<std::string, CaptureContext> sessions;
    SplitMix64 rng(seed);

    for (std::size_t i = 0; i < n_ops && run.ok; ++i) {
        clock->advance(std::chrono::seconds(rng.range(0, 90)));
        const Timestamp now = clock->now();
        ApiRequest req;
        Outcome expected = Outcome::Ok;
        int ok_status = 200;
        std::optional<nlohmann::json> expected_body;
        const std::string session = std::array<const char*, 3>{"", "s1", "s2"}[rng.range(0, 2)];
        if (!session.empty()) req.headers[kSessionHeader] = session;
        const std::string sess_key = session.empty() ? "global" : session;
        auto& ctx = sessions.try_emplace(sess_key, CaptureContext{std::nullopt, cfg.association_window}).first->second;

        const auto kind = rng.range(0, 99);
        if (kind < 15) {
            const std::string name = rng.range(0, 7) == 0 ? "" : name_for(rng);
            req.method = "POST";
            req.path = "/api/persons";
            req.body = nlohmann::json{{"name", name}, {"relationship", "friend"}, {"notes", "n"}}.dump();
            ok_status = 201;
            expected = engine([&] { expected_body = direct.create_person(name, "friend", "n"); });
        } else if (kind < 23) {
            const PersonId id = pick_person(rng, direct);
            PersonUpdate u;
            nlohmann::json body = nlohmann::json::object();
            if (rng.range(0, 1)) body["name"] = *(u.name = rng.range(0, 5) == 0 ? "" : name_for(rng));
            if (rng.range(0, 1)) body["notes"] = *(u.notes = "note " + std::to_string(i));
            if (rng.range(0, 1)) body["relationship"] = *(u.relationship = "neighbour");
            req.method = "PATCH";
            req.path = "/api/persons/" + std::to_string(id);
            req.body = body.dump();
            expected = engine([&] { expected_body = direct.update_person(id, u); });
        } else if (kind < 28) {
            const PersonId id = pick_person(rng, direct);
            req.method = "DELETE";
            req.path = "/api/persons/" + std::to_string(id);
            ok_status = 204;
            expected = engine([&] { direct.delete_person(id); });
        } else if (kind < 50) {
            const PersonId id = pick_person(rng, direct);
            const int image = pick_image(rng);
            const bool override_framing = rng.range(0, 1) == 1;
            req.method = "POST";
            req.path = "/api/persons/" + std::to_string(id) + "/images";
            if (override_framing) req.query["override_framing"] = "true";
            const Bytes& bytes = pool().images[static_cast<std::size_t>(image)];
            req.body.assign(bytes.begin(), bytes.end());
            ok_status = 201;
            if (!direct.find_person(id)) {
                expected = Outcome::NotFound;
            } else {
                const Prepared& p = prepare(image, cfg);
                expected = enrollment_outcome(p, override_framing);
                if (expected == Outcome::Ok) {
                    const EncodingRecord rec = direct.add_encoding(id, *p.encoding, bytes);
                    ctx.last_enrollment = Enrollment{id, now};
                    expected_body = nlohmann::json{
                        {"encoding_id", rec.encoding_id}, {"person_id", id}, {"framing", nlohmann::json(p.report)}};
                }
            }
        } else if (kind < 70) {
            const int wav = pick_wav(rng);
            std::optional<PersonId> explicit_person;
            if (rng.range(0, 2) == 0) explicit_person = pick_person(rng, direct);
            const std::string label = rng.range(0, 1) ? "visit" : "";
            req.method = "POST";
            req.path = "/api/memos";
            if (explicit_person) req.query["person_id"] = std::to_string(*explicit_person);
            if (!label.empty()) req.query["label"] = label;
            const Bytes& bytes = pool().wavs[static_cast<std::size_t>(wav)];
            req.body.assign(bytes.begin(), bytes.end());
            ok_status = 201;
            if (auto m = gated_memo(wav, now, label, expected)) {
                m->person_id = explicit_person;
                if (!explicit_person) {
                    *m = associate_memo(std::move(*m), ctx, now);
                    if (m->person_id && !direct.find_person(*m->person_id)) m->person_id.reset();
                }
                expected = engine([&] { expected_body = memo_info(direct.get_memo(direct.add_memo(*m))); });
            }
        } else if (kind < 80) {
            const MemoId id = pick_memo(rng, direct);
            std::optional<PersonId> who;
            if (rng.range(0, 3) > 0) who = pick_person(rng, direct);
            req.method = "PATCH";
            req.path = "/api/memos/" + std::to_string(id);
            req.body = nlohmann::json{{"person_id", who ? nlohmann::json(*who) : nlohmann::json(nullptr)}}.dump();
            expected = engine([&] { expected_body = direct.link_memo(id, who); });
        } else if (kind < 88) {
            const MemoId id = pick_memo(rng, direct);
            req.method = "DELETE";
            req.path = "/api/memos/" + std::to_string(id);
            ok_status = 204;
            expected = engine([&] { direct.delete_memo(id); });
        } else if (kind < 94) {
            const int image = rng.range(0, 4) == 0 ? Pool::kGarbage : static_cast<int>(rng.range(0, Pool::kBlank));
            req.method = "POST";
            req.path = "/api/recognize";
            const Bytes& bytes = pool().images[static_cast<std::size_t>(image)];
            req.body.assign(bytes.begin(), bytes.end());
            expected = engine([&] {
                const Image img = load_image(bytes);
                expected_body = recognize_and_retrieve(direct, img, shared_model(), cfg.detector, cfg.match, now);
            });
        } else {
            const PersonId id = pick_person(rng, direct);
            req.method = "GET";
            req.path = "/api/persons/" + std::to_string(id) + "/profile";
            expected = engine([&] { expected_body = retrieve_profile(direct, id); });
        }

        const ApiResponse res = svc.handle(req);
        ++run.ops;
        const std::string where = "seed " + std::to_string(seed) + " op " + std::to_string(i) + " " + req.method +
                                  " " + req.path + ": ";
        if (res.status != api_status(expected, ok_status)) {
            run.ok = false;
            run.failure = where + "status " + std::to_string(res.status) + ", engine says " + name_of(expected) +
                          " (" + res.body + ")";
            break;
        }
        if (expected != Outcome::Ok) ++run.rejected;
        if (auto e = api_schema().check_response(req.method, req.path, res); !e.empty()) {
            run.ok = false;
            run.failure = where + "schema: " + e;
            break;
        }
        if (expected_body && res.json() != *expected_body) {
            run.ok = false;
            run.failure = where + "body " + res.body + " != " + expected_body->dump();
            break;
        }
        if (!(api_store->contents() == direct.contents())) {
            run.ok = false;
            run.failure = where + "store contents diverged";
        }
    }
    return run;
}

// ---------------------------------------------------------------------------

FacadeRun run_cli_facade(std::uint64_t seed, std::size_t n_ops) {
    FacadeRun run;
    TempDir dir;
    const std::string data = (dir / "data").string();
    const std::string cfg_file = (dir / "mfrs.json").string();
    {
        const std::string text = R"({"sync": false, "association_window_s": 120})";
        write_file_bytes(cfg_file, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    Config cfg;
    auto clock = std::make_shared<ManualClock>(from_micros(1'700'000'000'000'000));
    Store direct(StoreOptions{{}, false, clock, 0});
    SplitMix64 rng(seed);
    const std::string snapshot = (dir / "backup.snap").string();

    for (std::size_t i = 0; i < n_ops && run.ok; ++i) {
        clock->advance(std::chrono::seconds(rng.range(0, 90)));
        const Timestamp now = clock->now();
        std::vector<std::string> args;
        Outcome expected = Outcome::Ok;
        std::optional<nlohmann::json> expected_out;

        const auto kind = rng.range(0, 99);
        if (kind < 35) {
            const int image = pick_image(rng);
            const bool override_framing = rng.range(0, 1) == 1;
            const bool existing = rng.range(0, 2) == 0;
            args = {"enroll", "--image", pool().image_files[static_cast<std::size_t>(image)]};
            if (override_framing) args.push_back("--override-framing");
            const Prepared& p = prepare(image, cfg);
            expected = enrollment_outcome(p, override_framing);
            const Bytes& bytes = pool().images[static_cast<std::size_t>(image)];
            if (existing) {
                const PersonId id = pick_person(rng, direct);
                args.insert(args.end(), {"--person", std::to_string(id)});
                if (expected == Outcome::Ok) {
                    expected = engine([&] {
                        const EncodingRecord rec = direct.add_encoding(id, *p.encoding, bytes);
                        expected_out = nlohmann::json{{"person_id", id}, {"encoding_id", rec.encoding_id}};
                    });
                }
            } else {
                const std::string name = rng.range(0, 9) == 0 ? " " : name_for(rng);
                args.insert(args.end(), {"--name", name, "--relationship", "cousin"});
                if (expected == Outcome::Ok) {
                    expected = engine([&] {
                        Transaction tx;
                        const PersonRef ref = tx.create_person(name, "cousin", "");
                        tx.add_encoding(ref, *p.encoding, bytes);
                        const TxResult r = direct.apply_transaction(tx);
                        expected_out = nlohmann::json{{"person_id", r.persons[0]}, {"encoding_id", r.encodings[0]}};
                    });
                }
            }
        } else if (kind < 45) {
            const PersonId id = pick_person(rng, direct);
            PersonUpdate u;
            args = {"person", "update", "--id", std::to_string(id)};
            if (rng.range(0, 1)) {
                u.name = rng.range(0, 5) == 0 ? "" : name_for(rng);
                args.insert(args.end(), {"--name", *u.name});
            }
            if (rng.range(0, 1)) {
                u.notes = "note " + std::to_string(i);
                args.insert(args.end(), {"--notes", *u.notes});
            }
            expected = engine([&] { expected_out = direct.update_person(id, u); });
        } else if (kind < 50) {
            const PersonId id = pick_person(rng, direct);
            args = {"person", "delete", "--id", std::to_string(id)};
            expected = engine([&] { direct.delete_person(id); });
        } else if (kind < 72) {
            const int wav = pick_wav(rng);
            std::optional<PersonId> explicit_person;
            if (rng.range(0, 2) == 0) explicit_person = pick_person(rng, direct);
            const std::string label = rng.range(0, 1) ? "call" : "";
            args = {"memo", "add", "--file", pool().wav_files[static_cast<std::size_t>(wav)]};
            if (explicit_person) args.insert(args.end(), {"--person", std::to_string(*explicit_person)});
            if (!label.empty()) args.insert(args.end(), {"--label", label});
            if (auto m = gated_memo(wav, now, label, expected)) {
                m->person_id = explicit_person;
                if (!explicit_person) {
                    // The command line has no session; its context is the newest stored enrollment.
                    CaptureContext ctx{std::nullopt, cfg.association_window};
                    const auto encs = direct.encoding_records();
                    if (!encs.empty()) ctx.last_enrollment = Enrollment{encs.back().person_id, encs.back().created_at};
                    *m = associate_memo(std::move(*m), ctx, now);
                }
                expected = engine([&] { expected_out = memo_info(direct.get_memo(direct.add_memo(*m))); });
            }
        } else if (kind < 84) {
            const MemoId id = pick_memo(rng, direct);
            std::optional<PersonId> who;
            args = {"memo", "link", "--id", std::to_string(id)};
            if (rng.range(0, 3) > 0) {
                who = pick_person(rng, direct);
                args.insert(args.end(), {"--person", std::to_string(*who)});
            } else {
                args.push_back("--unlink");
            }
            expected = engine([&] { expected_out = direct.link_memo(id, who); });
        } else if (kind < 92) {
            const MemoId id = pick_memo(rng, direct);
            args = {"memo", "delete", "--id", std::to_string(id)};
            expected = engine([&] { direct.delete_memo(id); });
        } else {
            // Backup roundtrip: export, then import the same snapshot.
            std::ostringstream out, err;
            CliEnv env;
            env.out = &out;
            env.err = &err;
            env.clock = clock;
            env.getenv = [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
            const int rc = run_cli({"--config", cfg_file, "--data-dir", data, "export", "--out", snapshot}, env);
            if (rc != kExitOk) {
                run.ok = false;
                run.failure = "seed " + std::to_string(seed) + " op " + std::to_string(i) + ": export failed " + err.str();
                break;
            }
            args = {"import", "--in", snapshot};
            direct.import_snapshot(direct.export_snapshot());
        }

        std::vector<std::string> full{"--config", cfg_file, "--data-dir", data};
        full.insert(full.end(), args.begin(), args.end());
        std::ostringstream out, err;
        CliEnv env;
        env.out = &out;
        env.err = &err;
        env.clock = clock;
        env.getenv = [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
        const int rc = run_cli(full, env);
        ++run.ops;
        std::string where = "seed " + std::to_string(seed) + " op " + std::to_string(i) + " mfrs";
        for (const auto& a : args) where += " " + a;
        where += ": ";
        if (rc != cli_exit(expected)) {
            run.ok = false;
            run.failure = where + "exit " + std::to_string(rc) + ", engine says " + name_of(expected) + " / " + err.str();
            break;
        }
        if (expected != Outcome::Ok) ++run.rejected;
        if (expected_out) {
            nlohmann::json printed;
            try {
                printed = nlohmann::json::parse(out.str());
            } catch (const nlohmann::json::parse_error&) {
                run.ok = false;
                run.failure = where + "stdout is not JSON: " + out.str();
                break;
            }
            for (const auto& [k, v] : expected_out->items()) {
                if (printed[k] != v) {
                    run.ok = false;
                    run.failure = where + "printed " + k + "=" + printed[k].dump() + ", engine " + v.dump();
                }
            }
        }
        const Store reopened(StoreOptions{data, false, clock, 0});
        if (!(reopened.contents() == direct.contents())) {
            run.ok = false;
            run.failure = where + "store contents diverged";
        }
    }
    return run;
}

}  // namespace mfrs::test
