#include "crash_harness.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <vector>

#include "mfrs/bytes.hpp"
#include "ref_store.hpp"
#include "support.hpp"

namespace mfrs::test {

namespace {

/// Number of complete records in a prefix of length `k`.
std::size_t records_within(const std::vector<std::size_t>& ends, std::size_t k) {
    return static_cast<std::size_t>(std::upper_bound(ends.begin(), ends.end(), k) - ends.begin());
}

}  // namespace

CrashRun run_crash_sequence(std::uint64_t seed, std::size_t n_tx, std::size_t reopen_samples) {
    CrashRun run;
    auto bad = [&](std::string why) {
        if (run.ok) run.failure = "seed " + std::to_string(seed) + ": " + std::move(why);
        run.ok = false;
    };

    TempDir dir;
    auto clock = std::make_shared<ManualClock>(from_micros(1'700'000'000'000'000));
    StoreOptions opts;
    opts.dir = dir.path();
    opts.sync = false;
    opts.clock = clock;
    opts.checkpoint_bytes = 0;

    RefStore model;
    TxGenerator gen(seed);
    std::vector<StoreData> states{model.data()};
    std::vector<std::size_t> ends;  // journal size after each commit
    const auto journal_path = dir.path() / Store::kJournalFile;
    {
        Store store(opts);
        for (std::size_t i = 0; i < n_tx && run.ok; ++i) {
            clock->advance(std::chrono::milliseconds(gen.rng().range(0, 2000)));
            const Transaction tx = gen.next(model);
            ++run.transactions;
            TxResult expected_ids;
            const auto expected = model.apply(tx, clock->now(), &expected_ids);
            std::optional<ErrorCode> actual;
            TxResult ids;
            try {
                ids = store.apply_transaction(tx);
            } catch (const Error& e) {
                actual = e.code();
            }
            if (expected != actual) {
                bad("tx " + std::to_string(i) + ": model says " +
                    (expected ? std::string(to_string(*expected)) : "commit") + ", store says " +
                    (actual ? std::string(to_string(*actual)) : "commit"));
                break;
            }
            if (!actual) {
                if (ids.persons != expected_ids.persons || ids.encodings != expected_ids.encodings ||
                    ids.memos != expected_ids.memos) {
                    bad("tx " + std::to_string(i) + ": assigned ids differ");
                }
                ++run.commits;
                states.push_back(model.data());
                ends.push_back(std::filesystem::file_size(journal_path));
            }
            const StoreData now = store.contents();
            if (!(now == model.data())) bad("tx " + std::to_string(i) + ": store content differs from model");
            if (auto v = integrity_violation(now); !v.empty()) bad("tx " + std::to_string(i) + ": " + v);
        }
    }
    if (!run.ok) return run;

    const Bytes journal = read_file_bytes(journal_path.string());
    run.journal_bytes = journal.size();
    if (!ends.empty() && ends.back() != journal.size()) bad("journal size does not match the last commit");

    for (std::size_t k = 0; k <= journal.size() && run.ok; ++k) {
        const std::size_t n = records_within(ends, k);
        Recovery rec;
        try {
            rec = recover(std::span(journal).first(k));
        } catch (const Error& e) {
            bad("prefix " + std::to_string(k) + ": recovery threw " + e.what());
            break;
        }
        ++run.offsets_checked;
        if (rec.sequence != n) bad("prefix " + std::to_string(k) + ": sequence " + std::to_string(rec.sequence));
        if (!(rec.data == states[n])) bad("prefix " + std::to_string(k) + ": not the committed-prefix state");
        if (auto v = integrity_violation(rec.data); !v.empty()) bad("prefix " + std::to_string(k) + ": " + v);
        const std::size_t valid = n == 0 ? 0 : ends[n - 1];
        if (rec.valid_journal_bytes != valid) bad("prefix " + std::to_string(k) + ": wrong valid length");
        if (rec.torn_tail != (k != valid)) bad("prefix " + std::to_string(k) + ": torn flag wrong");
    }

    // Single corrupted byte: recovery keeps exactly the records before it.
    for (int t = 0; t < 4 && run.ok && !journal.empty(); ++t) {
        const auto at = static_cast<std::size_t>(gen.rng().range(0, static_cast<std::int64_t>(journal.size()) - 1));
        Bytes damaged = journal;
        damaged[at] ^= static_cast<std::uint8_t>(1u << gen.rng().range(0, 7));
        const std::size_t n = records_within(ends, at);
        const Recovery rec = recover(damaged);
        if (!(rec.data == states[n])) bad("flip at " + std::to_string(at) + ": not the committed-prefix state");
    }

    // A few prefixes through the real open path, which also truncates the tail.
    for (std::size_t s = 0; s < reopen_samples && run.ok; ++s) {
        const auto k = static_cast<std::size_t>(gen.rng().range(0, static_cast<std::int64_t>(journal.size())));
        const std::size_t n = records_within(ends, k);
        TempDir crash_dir;
        write_file_bytes((crash_dir.path() / Store::kJournalFile).string(), std::span(journal).first(k));
        StoreOptions o = opts;
        o.dir = crash_dir.path();
        try {
            Store reopened(o);
            if (!(reopened.contents() == states[n])) bad("reopen at " + std::to_string(k) + ": state differs");
            if (reopened.sequence() != n) bad("reopen at " + std::to_string(k) + ": sequence differs");
            reopened.create_person("after-crash");
        } catch (const Error& e) {
            bad("reopen at " + std::to_string(k) + ": " + e.what());
        }
        const std::size_t valid = n == 0 ? 0 : ends[n - 1];
        const auto size_after = std::filesystem::file_size(crash_dir.path() / Store::kJournalFile);
        if (size_after <= valid) bad("reopen at " + std::to_string(k) + ": post-crash write not journaled");
        StoreOptions o2 = o;
        Store again(o2);
        if (again.person_count() != states[n].persons.size() + 1) bad("reopen twice: lost the post-crash write");
    }
    return run;
}

}  // namespace mfrs::test
