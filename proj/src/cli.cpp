#include "mfrs/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "mfrs/audio.hpp"
#include "mfrs/bytes.hpp"
#include "mfrs/detector.hpp"
#include "mfrs/encoder.hpp"
#include "mfrs/eval.hpp"
#include "mfrs/framing.hpp"
#include "mfrs/glyph.hpp"
#include "mfrs/image_io.hpp"
#include "mfrs/json_codec.hpp"
#include "mfrs/memo.hpp"
#include "mfrs/retrieval.hpp"
#include "mfrs/service.hpp"
#include "mfrs/store.hpp"
#include "mfrs/training.hpp"

namespace mfrs {

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidParams: return kExitUsage;
        case ErrorCode::IoError:
        case ErrorCode::DecodeError:
        case ErrorCode::WavMalformed:
        case ErrorCode::WavUnsupported:
        case ErrorCode::CorruptSnapshot:
        case ErrorCode::UnsupportedVersion:
        case ErrorCode::CorruptModel:
        case ErrorCode::ParseError:
        case ErrorCode::MissingImage: return kExitIo;
        default: return kExitDomain;
    }
}

namespace {

namespace fs = std::filesystem;

/// Usage error raised after parsing (e.g. conflicting flags).
struct UsageError {
    std::string message;
};

struct Context {
    CliEnv& env;
    Config config;
    std::shared_ptr<const Clock> clock;

    std::ostream& out() { return *env.out; }

    std::shared_ptr<Store> open_store() {
        StoreOptions o;
        o.dir = config.data_dir;
        o.sync = config.sync;
        o.clock = clock;
        return std::make_shared<Store>(o);
    }

    DetectorModel model() {
        if (config.detector_model) return load_model_file(config.detector_model->string());
        return default_detector_model(config.detector);
    }

    void print(const Json& j) { out() << j.dump(2) << '\n'; }
};

Bytes read_input(const std::string& path) { return read_file_bytes(path); }

/// Newest enrollment in the store stands in for the service's session context.
CaptureContext store_capture_context(const Store& store, const Config& config) {
    CaptureContext ctx;
    ctx.association_window = config.association_window;
    const auto encs = store.encoding_records();
    if (!encs.empty()) {
        const auto& newest = *std::max_element(encs.begin(), encs.end(), [](const auto& a, const auto& b) {
            return a.encoding_id < b.encoding_id;
        });
        ctx.last_enrollment = Enrollment{newest.person_id, newest.created_at};
    }
    return ctx;
}

std::string describe_box(const BoundingBox& b) {
    std::ostringstream s;
    s << "[top " << b.top << ", left " << b.left << ", bottom " << b.bottom << ", right " << b.right << "]";
    return s.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliEnv& env) {
    CLI::App app{"mfrs: face enrollment, recognition, voice memos and evaluation"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string config_path, data_dir;
    app.add_option("--config", config_path, "JSON config file (default: $MFRS_CONFIG)");
    app.add_option("--data-dir", data_dir, "Store directory (overrides config and $MFRS_DATA_DIR)");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::optional<int> serve_port;
    std::string serve_bind;
    serve->add_option("--port", serve_port, "Listen port (0 = any free port)");
    serve->add_option("--bind", serve_bind, "Listen address");

    // enroll
    auto* enroll = app.add_subcommand("enroll", "Create a person from a photo, or add a photo to a person");
    std::string e_name, e_rel, e_notes, e_image;
    std::optional<PersonId> e_person;
    bool e_override = false;
    auto* e_name_opt = enroll->add_option("--name", e_name, "Name of the new person");
    enroll->add_option("--relationship", e_rel, "Relationship to the user");
    enroll->add_option("--notes", e_notes, "Free-form notes");
    auto* e_person_opt = enroll->add_option("--person", e_person, "Add the photo to this existing person");
    enroll->add_option("--image", e_image, "Photo (PGM/PPM/PNG)")->required();
    enroll->add_flag("--override-framing", e_override, "Accept size/centering/sharpness failures");
    e_name_opt->excludes(e_person_opt);

    // recognize
    auto* recog = app.add_subcommand("recognize", "Detect and identify faces in a photo");
    std::string r_image;
    bool r_json = false;
    recog->add_option("--image", r_image, "Photo (PGM/PPM/PNG)")->required();
    recog->add_flag("--json", r_json, "Print the full outcome as JSON");

    // person
    auto* person = app.add_subcommand("person", "Inspect and edit people");
    person->require_subcommand(1);
    auto* p_list = person->add_subcommand("list", "List people");
    auto* p_show = person->add_subcommand("show", "Show one person's profile");
    auto* p_update = person->add_subcommand("update", "Change fields of a person");
    auto* p_delete = person->add_subcommand("delete", "Delete a person with their encodings and memos");
    PersonId p_id = 0;
    std::optional<std::string> p_name, p_rel, p_notes;
    for (auto* sc : {p_show, p_update, p_delete}) sc->add_option("--id", p_id, "Person id")->required();
    p_update->add_option("--name", p_name);
    p_update->add_option("--relationship", p_rel);
    p_update->add_option("--notes", p_notes);

    // memo
    auto* memo = app.add_subcommand("memo", "Voice memos");
    memo->require_subcommand(1);
    auto* m_add = memo->add_subcommand("add", "Store a WAV memo (16 kHz mono 16-bit)");
    auto* m_list = memo->add_subcommand("list", "List memos, newest first");
    auto* m_play = memo->add_subcommand("play", "Write a memo's audio to a WAV file");
    auto* m_link = memo->add_subcommand("link", "Link a memo to a person, or unlink it");
    auto* m_delete = memo->add_subcommand("delete", "Delete a memo");
    std::string m_file, m_label, m_out;
    std::optional<PersonId> m_person;
    MemoId m_id = 0;
    bool m_unlinked = false, m_unlink = false;
    m_add->add_option("--file", m_file, "WAV file")->required();
    m_add->add_option("--person", m_person, "Link explicitly instead of by recent enrollment");
    m_add->add_option("--label", m_label, "Short tag");
    auto* ml_person = m_list->add_option("--person", m_person, "Only this person's memos");
    auto* ml_unlinked = m_list->add_flag("--unlinked", m_unlinked, "Only memos linked to nobody");
    ml_person->excludes(ml_unlinked);
    for (auto* sc : {m_play, m_link, m_delete}) sc->add_option("--id", m_id, "Memo id")->required();
    m_play->add_option("--out", m_out, "Destination WAV path")->required();
    auto* mk_person = m_link->add_option("--person", m_person, "Person to link to");
    auto* mk_unlink = m_link->add_flag("--unlink", m_unlink, "Remove the link");
    mk_person->excludes(mk_unlink);

    // backup
    auto* exp = app.add_subcommand("export", "Write a snapshot of the whole store");
    std::string x_out, x_in;
    exp->add_option("--out", x_out, "Snapshot path")->required();
    auto* imp = app.add_subcommand("import", "Replace the store content with a snapshot");
    imp->add_option("--in", x_in, "Snapshot path")->required();

    // eval / bench
    auto* eval = app.add_subcommand("eval", "Recognition evaluation");
    eval->require_subcommand(1);
    auto* e_pairs = eval->add_subcommand("pairs", "Pair verification over an image directory");
    std::string v_pairs, v_images, v_roc;
    e_pairs->add_option("--pairs", v_pairs, "Pair list: 'refA refB same|diff' per line")->required();
    e_pairs->add_option("--images", v_images, "Image root directory")->required();
    e_pairs->add_option("--roc", v_roc, "Also write the ROC as CSV here");
    auto* bench = app.add_subcommand("bench", "Store stress timing");
    bench->require_subcommand(1);
    auto* b_db = bench->add_subcommand("db", "Insert/get/update latency percentiles");
    std::size_t b_n = 1000;
    bool b_samples = false;
    std::uint64_t b_seed = 1;
    b_db->add_option("--n", b_n, "Number of persons")->check(CLI::PositiveNumber);
    b_db->add_flag("--samples", b_samples, "Include raw latency samples");
    b_db->add_option("--seed", b_seed, "Random seed for the access pattern");

    // tooling
    auto* train = app.add_subcommand("train-detector", "Fit a detector on synthetic glyph windows");
    std::string t_out;
    std::size_t t_pos = 200, t_neg = 600;
    std::uint64_t t_seed = 0x7E57DE7EC7ull;
    train->add_option("--out", t_out, "Model file")->required();
    train->add_option("--positives", t_pos);
    train->add_option("--negatives", t_neg);
    train->add_option("--seed", t_seed);
    auto* glyph = app.add_subcommand("glyph", "Render a synthetic face image");
    std::string g_out;
    GlyphParams g;
    bool g_blank = false;
    glyph->add_option("--out", g_out, "Output .png/.pgm")->required();
    glyph->add_option("--identity", g.identity_seed, "Identity seed");
    glyph->add_option("--seed", g.seed, "Jitter/background seed");
    glyph->add_option("--canvas", g.canvas, "Canvas side in pixels");
    glyph->add_option("--face-fraction", g.face_fraction, "Face side / canvas side");
    glyph->add_flag("--blank", g_blank, "Background only, no face");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, *env.out, *env.err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        Context ctx{env, {}, env.clock ? env.clock : std::make_shared<SystemClock>()};
        std::optional<fs::path> cfg_file;
        if (!config_path.empty()) cfg_file = config_path;
        else if (auto v = env.getenv("MFRS_CONFIG"); v && !v->empty()) cfg_file = *v;
        ctx.config = load_config(cfg_file, env.getenv);
        if (!data_dir.empty()) ctx.config.data_dir = data_dir;

        if (*serve) {
            if (serve_port) ctx.config.port = *serve_port;
            if (!serve_bind.empty()) ctx.config.bind = serve_bind;
            ctx.config.validate();
            auto store = ctx.open_store();
            Service service(ctx.config, store, ctx.model(), ctx.clock);
            HttpServer server(service, ctx.config.bind, ctx.config.port);
            server.start();
            ctx.print(Json{{"listening", "http://" + ctx.config.bind + ":" + std::to_string(server.port())},
                           {"data_dir", ctx.config.data_dir.string()}});
            ctx.out().flush();
            if (env.on_serving) env.on_serving(server.port());
            while (!env.should_stop()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            server.stop();
            return kExitOk;
        }

        if (*enroll) {
            if (!e_person && e_name.empty()) throw UsageError{"enroll: --name (new person) or --person (existing) is required"};
            const Bytes bytes = read_input(e_image);
            const Image image = load_image(bytes);
            const DetectorModel model = ctx.model();
            const auto faces = detect_faces(image, model, ctx.config.detector);
            const FramingReport report = framing_from_detections(image, faces, ctx.config.framing);
            const bool structural = report.has(FramingFailure::NoFace) || report.has(FramingFailure::MultipleFaces);
            if (!report.pass && (structural || !e_override)) {
                ctx.print(Json{{"error", "framing_failed"}, {"framing", report}});
                *env.err << "enroll: framing check failed";
                for (auto f : report.failures) *env.err << ' ' << to_string(f);
                *env.err << '\n';
                return kExitDomain;
            }
            const FaceEncoding enc = encode_face(image, *report.face, ctx.config.detector);
            auto store = ctx.open_store();
            Transaction tx;
            PersonRef ref = e_person ? PersonRef(*e_person) : tx.create_person(e_name, e_rel, e_notes);
            tx.add_encoding(ref, enc, bytes);
            const TxResult res = store->apply_transaction(tx);
            const PersonId pid = e_person ? *e_person : res.persons.at(0);
            ctx.print(Json{{"person_id", pid}, {"encoding_id", res.encodings.at(0)}, {"framing", report}});
            return kExitOk;
        }

        if (*recog) {
            const Image image = load_image_file(r_image);
            auto store = ctx.open_store();
            const RecognitionOutcome outcome = recognize_and_retrieve(*store, image, ctx.model(), ctx.config.detector,
                                                                      ctx.config.match, ctx.clock->now());
            if (r_json) {
                ctx.print(Json(outcome));
                return kExitOk;
            }
            if (outcome.faces.empty()) {
                ctx.out() << "no faces detected\n";
                return kExitOk;
            }
            std::size_t i = 0;
            for (const auto& f : outcome.faces) {
                ctx.out() << "face " << ++i << " at " << describe_box(f.box) << ": ";
                if (f.profile) {
                    std::string text = f.profile->presentation_text;
                    std::replace(text.begin(), text.end(), '\n', ' ');
                    ctx.out() << text << " (person " << f.match->person_id << ", distance " << f.match->distance
                              << ", " << f.profile->memos.size() << " memo(s))\n";
                } else {
                    ctx.out() << "unknown person\n";
                }
            }
            return kExitOk;
        }

        if (*person) {
            auto store = ctx.open_store();
            if (*p_list) ctx.print(Json(store->list_persons()));
            else if (*p_show) ctx.print(Json(retrieve_profile(*store, p_id)));
            else if (*p_update) ctx.print(Json(store->update_person(p_id, PersonUpdate{p_name, p_rel, p_notes})));
            else if (*p_delete) {
                store->delete_person(p_id);
                ctx.print(Json{{"deleted", p_id}});
            }
            return kExitOk;
        }

        if (*memo) {
            if (*m_add) {
                const AudioClip raw = read_wav(read_input(m_file));
                VoiceMemo vm;
                vm.person_id = m_person;
                vm.clip = noise_gate(raw);
                vm.label = m_label;
                auto store = ctx.open_store();
                vm.created_at = ctx.clock->now();
                if (!vm.person_id) vm = associate_memo(std::move(vm), store_capture_context(*store, ctx.config), vm.created_at);
                const MemoId id = store->add_memo(vm);
                ctx.print(Json(memo_info(store->get_memo(id))));
            } else if (*m_list) {
                auto store = ctx.open_store();
                if (m_unlinked) ctx.print(Json(store->unlinked_memos()));
                else if (m_person) {
                    store->get_person(*m_person);
                    ctx.print(Json(store->memos_for(*m_person)));
                }
                else ctx.print(Json(store->all_memos()));
            } else if (*m_play) {
                auto store = ctx.open_store();
                const Bytes wav = write_wav(store->get_memo(m_id).clip);
                write_file_bytes(m_out, wav);
                ctx.print(Json{{"memo_id", m_id}, {"out", m_out}, {"bytes", wav.size()}});
            } else if (*m_link) {
                if (!m_person && !m_unlink) throw UsageError{"memo link: --person or --unlink is required"};
                auto store = ctx.open_store();
                ctx.print(Json(store->link_memo(m_id, m_unlink ? std::nullopt : m_person)));
            } else if (*m_delete) {
                auto store = ctx.open_store();
                store->delete_memo(m_id);
                ctx.print(Json{{"deleted", m_id}});
            }
            return kExitOk;
        }

        if (*exp) {
            auto store = ctx.open_store();
            const Bytes snap = store->export_snapshot();
            write_file_bytes(x_out, snap);
            ctx.print(Json{{"out", x_out},
                           {"bytes", snap.size()},
                           {"persons", store->person_count()},
                           {"encodings", store->encoding_records().size()},
                           {"memos", store->all_memos().size()}});
            return kExitOk;
        }
        if (*imp) {
            const Bytes snap = read_input(x_in);
            decode_snapshot(snap);  // validate before touching the store
            auto store = ctx.open_store();
            store->import_snapshot(snap);
            ctx.print(Json{{"in", x_in},
                           {"persons", store->person_count()},
                           {"encodings", store->encoding_records().size()},
                           {"memos", store->all_memos().size()}});
            return kExitOk;
        }

        if (*eval) {
            std::ifstream in(v_pairs, std::ios::binary);
            if (!in) fail(ErrorCode::IoError, "cannot read " + v_pairs);
            std::ostringstream text;
            text << in.rdbuf();
            const PairList pairs = parse_pairs(text.str(), v_images);
            const VerificationReport report = eval_pairs(pairs, ctx.model(), ctx.config.detector, ctx.config.match);
            if (!v_roc.empty()) {
                const std::string csv = roc_csv(report);
                write_file_bytes(v_roc, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
            }
            ctx.print(to_json(report));
            return kExitOk;
        }

        if (*bench) {
            std::random_device rd;
            const fs::path dir = fs::temp_directory_path() /
                                 ("mfrs-bench-" + std::to_string(rd()) + "-" + std::to_string(rd()));
            DbBenchReport report;
            {
                StoreOptions o;
                o.dir = dir;
                o.sync = ctx.config.sync;
                o.clock = ctx.clock;
                Store store(o);
                report = bench_db(b_n, store, b_seed);
            }
            std::error_code ec;
            fs::remove_all(dir, ec);
            Json j = to_json(report, b_samples);
            j["store"] = {{"journal", true}, {"sync", ctx.config.sync}};
            ctx.print(j);
            return kExitOk;
        }

        if (*train) {
            const TrainingWindows w = glyph_training_windows(t_pos, t_neg, t_seed);
            const DetectorModel model = fit_detector(w.positives, w.negatives, ctx.config.detector);
            save_model_file(model, t_out);
            ctx.print(Json{{"out", t_out}, {"weights", model.weights.size()}, {"bias", model.bias}});
            return kExitOk;
        }

        if (*glyph) {
            Image image;
            Json box = nullptr;
            if (g_blank) {
                if (g.canvas < 16) fail(ErrorCode::InvalidParams, "canvas too small");
                image = generate_background(g.seed, g.canvas, g.canvas);
            } else {
                const Glyph gl = generate_face_glyph(g);
                image = gl.image;
                box = Json(gl.box);
            }
            std::string ext = fs::path(g_out).extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
            const Bytes bytes = ext == ".png" ? encode_png(image) : encode_pnm(image);
            write_file_bytes(g_out, bytes);
            ctx.print(Json{{"out", g_out}, {"width", image.width}, {"height", image.height}, {"box", box}});
            return kExitOk;
        }
        return kExitUsage;
    } catch (const UsageError& u) {
        *env.err << "usage error: " << u.message << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        *env.err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        *env.err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

}  // namespace mfrs
