#include "mfrs/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "mfrs/encoder.hpp"
#include "mfrs/error.hpp"
#include "mfrs/image_io.hpp"
#include "mfrs/random.hpp"
#include "mfrs/stats.hpp"

namespace mfrs {

PairList parse_pairs(const std::string& text, const std::filesystem::path& image_root) {
    PairList list;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        const std::string where = "pairs line " + std::to_string(lineno);
        if (tok.size() != 3) {
            fail(ErrorCode::ParseError, where + ": expected 'refA refB same|diff', got " + std::to_string(tok.size()) +
                                            " fields");
        }
        PairEntry e;
        e.line = lineno;
        if (tok[2] == "same") e.same = true;
        else if (tok[2] == "diff") e.same = false;
        else fail(ErrorCode::ParseError, where + ": label '" + tok[2] + "' is neither 'same' nor 'diff'");
        e.a = image_root / tok[0];
        e.b = image_root / tok[1];
        for (const auto& p : {e.a, e.b}) {
            std::error_code ec;
            if (!std::filesystem::is_regular_file(p, ec)) {
                fail(ErrorCode::MissingImage, where + ": image not found: " + p.string());
            }
        }
        list.entries.push_back(std::move(e));
    }
    if (list.entries.empty()) fail(ErrorCode::ParseError, "no pairs");
    return list;
}

double verification_accuracy(std::span<const PairOutcome> outcomes, double threshold) {
    std::size_t correct = 0, n = 0;
    for (const auto& o : outcomes) {
        if (!o.distance) continue;
        ++n;
        const bool accept = *o.distance <= threshold;
        if (accept == o.same) ++correct;
    }
    return n == 0 ? 0.0 : static_cast<double>(correct) / n;
}

VerificationReport summarize_verification(std::span<const PairOutcome> outcomes, double tolerance) {
    VerificationReport r;
    r.n_pairs = outcomes.size();
    r.threshold = tolerance;

    std::vector<std::pair<double, bool>> scored;  // (distance, same)
    double sum_same = 0.0, sum_diff = 0.0;
    for (const auto& o : outcomes) {
        if (!o.distance) {
            ++r.n_skipped;
            continue;
        }
        scored.emplace_back(*o.distance, o.same);
        if (o.same) {
            ++r.n_same;
            sum_same += *o.distance;
        } else {
            ++r.n_diff;
            sum_diff += *o.distance;
        }
    }
    if (scored.empty()) fail(ErrorCode::EvalError, "all " + std::to_string(r.n_pairs) + " pairs were skipped");
    const auto n = static_cast<double>(scored.size());
    r.mean_same_distance = r.n_same ? sum_same / r.n_same : 0.0;
    r.mean_diff_distance = r.n_diff ? sum_diff / r.n_diff : 0.0;
    r.accuracy = verification_accuracy(outcomes, tolerance);

    std::sort(scored.begin(), scored.end());
    std::size_t tp = 0, fp = 0;
    r.best_accuracy = -1.0;
    for (std::size_t i = 0; i < scored.size();) {
        const double t = scored[i].first;
        for (; i < scored.size() && scored[i].first == t; ++i) (scored[i].second ? tp : fp)++;
        RocPoint p;
        p.threshold = t;
        p.tpr = r.n_same ? static_cast<double>(tp) / r.n_same : 0.0;
        p.fpr = r.n_diff ? static_cast<double>(fp) / r.n_diff : 0.0;
        r.roc.push_back(p);
        const double acc = static_cast<double>(tp + (r.n_diff - fp)) / n;
        if (acc > r.best_accuracy) {
            r.best_accuracy = acc;
            r.best_threshold = t;
        }
    }
    return r;
}

std::vector<PairOutcome> pair_distances(const PairList& pairs, const DetectorModel& model,
                                        const DetectorConfig& detector_config) {
    std::map<std::filesystem::path, std::optional<FaceEncoding>> cache;
    auto encoding_of = [&](const std::filesystem::path& p) -> const std::optional<FaceEncoding>& {
        auto it = cache.find(p);
        if (it != cache.end()) return it->second;
        std::optional<FaceEncoding> enc;
        try {
            const Image img = load_image_file(p.string());
            const auto dets = detect(img, model, detector_config);
            if (!dets.empty()) enc = encode_face(img, dets.front().box, detector_config);
        } catch (const Error& e) {
            // Undecodable images and degenerate crops count as skipped pairs.
            if (e.code() != ErrorCode::DecodeError && e.code() != ErrorCode::DegenerateFace) throw;
        }
        return cache.emplace(p, std::move(enc)).first->second;
    };

    std::vector<PairOutcome> out;
    out.reserve(pairs.entries.size());
    for (const auto& e : pairs.entries) {
        PairOutcome o;
        o.same = e.same;
        const auto& a = encoding_of(e.a);
        const auto& b = encoding_of(e.b);
        if (a && b) o.distance = face_distance(*a, *b);
        out.push_back(o);
    }
    return out;
}

VerificationReport eval_pairs(const PairList& pairs, const DetectorModel& model, const DetectorConfig& detector_config,
                              const MatchConfig& match_config) {
    match_config.validate();
    const auto outcomes = pair_distances(pairs, model, detector_config);
    return summarize_verification(outcomes, match_config.tolerance);
}

std::string roc_csv(const VerificationReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "threshold,tpr,fpr\n";
    for (const auto& p : report.roc) out << p.threshold << ',' << p.tpr << ',' << p.fpr << '\n';
    return out.str();
}

nlohmann::json to_json(const VerificationReport& r) {
    nlohmann::json roc = nlohmann::json::array();
    for (const auto& p : r.roc) roc.push_back({{"threshold", p.threshold}, {"tpr", p.tpr}, {"fpr", p.fpr}});
    return {{"n_pairs", r.n_pairs},
            {"n_skipped", r.n_skipped},
            {"n_same", r.n_same},
            {"n_diff", r.n_diff},
            {"threshold", r.threshold},
            {"accuracy", r.accuracy},
            {"best_threshold", r.best_threshold},
            {"best_accuracy", r.best_accuracy},
            {"mean_same_distance", r.mean_same_distance},
            {"mean_diff_distance", r.mean_diff_distance},
            {"roc", roc}};
}

LatencyStats latency_stats(std::vector<double> samples_us) {
    LatencyStats s;
    s.samples_us = std::move(samples_us);
    if (s.samples_us.empty()) return s;
    std::vector<double> sorted = s.samples_us;
    std::sort(sorted.begin(), sorted.end());
    s.p50 = nearest_rank<double>(sorted, 50);
    s.p95 = nearest_rank<double>(sorted, 95);
    s.p99 = nearest_rank<double>(sorted, 99);
    return s;
}

DbBenchReport bench_db(std::size_t n, Store& store, std::uint64_t seed) {
    if (n == 0) fail(ErrorCode::InvalidParams, "bench_db: n must be >= 1");
    using clock = std::chrono::steady_clock;
    auto micros = [](clock::duration d) { return std::chrono::duration<double, std::micro>(d).count(); };

    SplitMix64 rng(seed);
    const auto wall_start = clock::now();
    std::vector<PersonId> ids;
    ids.reserve(n);
    std::vector<double> insert_us, get_us, update_us;
    insert_us.reserve(n);
    get_us.reserve(n);
    update_us.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, kEncodingSize> v{};
        double ss = 0.0;
        for (double& x : v) {
            x = rng.uniform(-1.0, 1.0);
            ss += x * x;
        }
        for (double& x : v) x /= std::sqrt(ss);
        Transaction tx;
        const PersonRef p = tx.create_person("bench-" + std::to_string(i), "bench", "");
        tx.add_encoding(p, FaceEncoding(v));
        const auto t0 = clock::now();
        const TxResult res = store.apply_transaction(tx);
        insert_us.push_back(micros(clock::now() - t0));
        ids.push_back(res.persons.at(0));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const PersonId id = ids[rng.range(0, static_cast<std::int64_t>(n) - 1)];
        const auto t0 = clock::now();
        const PersonRecord rec = store.get_person(id);
        get_us.push_back(micros(clock::now() - t0));
        if (rec.person_id != id) fail(ErrorCode::EvalError, "bench_db: get returned the wrong person");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const PersonId id = ids[rng.range(0, static_cast<std::int64_t>(n) - 1)];
        PersonUpdate upd;
        upd.notes = "update " + std::to_string(i);
        const auto t0 = clock::now();
        store.update_person(id, upd);
        update_us.push_back(micros(clock::now() - t0));
    }

    DbBenchReport r;
    r.n = n;
    r.insert = latency_stats(std::move(insert_us));
    r.get = latency_stats(std::move(get_us));
    r.update = latency_stats(std::move(update_us));
    r.total_seconds = std::chrono::duration<double>(clock::now() - wall_start).count();
    return r;
}

nlohmann::json to_json(const DbBenchReport& r, bool include_samples) {
    auto stats = [&](const LatencyStats& s) {
        nlohmann::json j{{"count", s.samples_us.size()}, {"p50_us", s.p50}, {"p95_us", s.p95}, {"p99_us", s.p99}};
        if (include_samples) j["samples_us"] = s.samples_us;
        return j;
    };
    return {{"n", r.n},
            {"insert", stats(r.insert)},
            {"get", stats(r.get)},
            {"update", stats(r.update)},
            {"total_seconds", r.total_seconds}};
}

}  // namespace mfrs
