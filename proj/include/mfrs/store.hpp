#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mfrs/clock.hpp"
#include "mfrs/encoder.hpp"
#include "mfrs/matching.hpp"
#include "mfrs/memo.hpp"

namespace mfrs {

using EncodingId = std::int64_t;
using Bytes = std::vector<std::uint8_t>;

struct PersonRecord {
    PersonId person_id = 0;
    std::string name;
    std::string relationship;
    std::string notes;
    Timestamp created_at{};
    Timestamp updated_at{};

    bool operator==(const PersonRecord&) const = default;
};

struct PersonUpdate {
    std::optional<std::string> name;
    std::optional<std::string> relationship;
    std::optional<std::string> notes;
};

struct EncodingRecord {
    EncodingId encoding_id = 0;
    PersonId person_id = 0;
    FaceEncoding encoding;
    bool has_source_image = false;
    Timestamp created_at{};

    bool operator==(const EncodingRecord&) const = default;
};

/// Either an existing person id or the k-th CreatePerson of the same
/// transaction (0-based), so one transaction can create a person and attach
/// data to them.
struct PersonRef {
    PersonId value = 0;
    bool pending = false;

    PersonRef() = default;
    PersonRef(PersonId id) : value(id) {}  // NOLINT(google-explicit-constructor)
    static PersonRef created(std::size_t k) {
        PersonRef r;
        r.value = static_cast<PersonId>(k);
        r.pending = true;
        return r;
    }
};

namespace mutation {
struct CreatePerson {
    std::string name, relationship, notes;
};
struct UpdatePerson {
    PersonRef person;
    PersonUpdate fields;
};
struct DeletePerson {
    PersonRef person;
};
struct AddEncoding {
    PersonRef person;
    FaceEncoding encoding;
    std::optional<Bytes> source_image;
};
struct DeleteEncoding {
    EncodingId encoding_id = 0;
};
struct AddMemo {
    std::optional<PersonRef> person;
    AudioClip clip;
    std::string label;
    std::optional<Timestamp> created_at;  ///< defaults to the store clock
};
struct LinkMemo {
    MemoId memo_id = 0;
    std::optional<PersonRef> person;  ///< nullopt unlinks
};
struct DeleteMemo {
    MemoId memo_id = 0;
};
}  // namespace mutation

using Mutation = std::variant<mutation::CreatePerson, mutation::UpdatePerson, mutation::DeletePerson,
                              mutation::AddEncoding, mutation::DeleteEncoding, mutation::AddMemo,
                              mutation::LinkMemo, mutation::DeleteMemo>;

struct Transaction {
    std::vector<Mutation> mutations;

    PersonRef create_person(std::string name, std::string relationship = {}, std::string notes = {});
    Transaction& update_person(PersonRef p, PersonUpdate fields);
    Transaction& delete_person(PersonRef p);
    Transaction& add_encoding(PersonRef p, const FaceEncoding& e, std::optional<Bytes> image = {});
    Transaction& delete_encoding(EncodingId id);
    Transaction& add_memo(std::optional<PersonRef> p, AudioClip clip, std::string label = {},
                          std::optional<Timestamp> created_at = {});
    Transaction& link_memo(MemoId id, std::optional<PersonRef> p);
    Transaction& delete_memo(MemoId id);

private:
    std::size_t creates_ = 0;
};

/// Ids assigned by one committed transaction, in mutation order.
struct TxResult {
    std::vector<PersonId> persons;
    std::vector<EncodingId> encodings;
    std::vector<MemoId> memos;
};

/// Complete logical content of a store. Value type; used for snapshots,
/// recovery, and equality checks in tests.
struct StoreData {
    std::map<PersonId, PersonRecord> persons;
    std::map<EncodingId, EncodingRecord> encodings;
    std::map<EncodingId, Bytes> images;
    std::map<MemoId, VoiceMemo> memos;
    /// Secondary indexes on person_id, derived from the tables above.
    std::map<PersonId, std::set<EncodingId>> encodings_by_person;
    std::map<PersonId, std::set<MemoId>> memos_by_person;
    PersonId next_person = 1;
    EncodingId next_encoding = 1;
    MemoId next_memo = 1;

    bool operator==(const StoreData&) const = default;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {
struct JournalRecord;
}

/// "MFRSSNAP", u32 version, body, u32 CRC-32 of body. Tables in id order, so
/// equal data gives identical bytes.
Bytes encode_snapshot(const StoreData& data);
/// Throws CorruptSnapshot / UnsupportedVersion.
StoreData decode_snapshot(std::span<const std::uint8_t> bytes);

struct Recovery {
    StoreData data;
    std::uint64_t sequence = 0;       ///< last applied transaction
    std::size_t valid_journal_bytes = 0;
    std::size_t records_applied = 0;
    bool torn_tail = false;
};

/// Rebuilds state from an optional checkpoint file image plus journal bytes.
/// Replay stops at the first record that is incomplete, fails its CRC, or is
/// out of sequence.
Recovery recover(std::span<const std::uint8_t> journal, std::span<const std::uint8_t> checkpoint = {});

struct StoreOptions {
    /// Empty path: purely in-memory, nothing persisted.
    std::filesystem::path dir;
    bool sync = true;
    std::shared_ptr<const Clock> clock;  ///< defaults to SystemClock
    /// Checkpoint automatically once the journal exceeds this size (0 = never).
    std::uint64_t checkpoint_bytes = 64ull << 20;
};

/// Embedded transactional store: in-memory tables, CRC-framed write-ahead
/// journal, checkpoint snapshot. Single writer, many readers; readers see
/// only committed state.
class Store {
public:
    explicit Store(StoreOptions options = {});
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    PersonRecord create_person(const std::string& name, const std::string& relationship = {},
                               const std::string& notes = {});
    PersonRecord update_person(PersonId id, const PersonUpdate& fields);
    void delete_person(PersonId id);
    PersonRecord get_person(PersonId id) const;
    std::optional<PersonRecord> find_person(PersonId id) const;
    std::vector<PersonRecord> list_persons() const;
    std::size_t person_count() const;

    EncodingRecord add_encoding(PersonId person, const FaceEncoding& encoding, std::optional<Bytes> image = {});
    void delete_encoding(EncodingId id);
    EncodingRecord get_encoding(EncodingId id) const;
    Bytes source_image(EncodingId id) const;
    /// Every (person, encoding) pair in insertion order.
    std::vector<std::pair<PersonId, FaceEncoding>> all_encodings() const;
    std::vector<EncodingRecord> encoding_records() const;
    std::vector<EncodingRecord> encodings_for(PersonId id) const;
    std::size_t encoding_count(PersonId id) const;

    /// memo_id of the input is ignored; created_at is kept as given.
    MemoId add_memo(const VoiceMemo& memo);
    VoiceMemo get_memo(MemoId id) const;
    MemoInfo link_memo(MemoId id, std::optional<PersonId> person);
    void delete_memo(MemoId id);
    /// Newest first: created_at descending, then memo_id descending.
    std::vector<MemoInfo> memos_for(PersonId id) const;
    std::vector<MemoInfo> unlinked_memos() const;
    std::vector<MemoInfo> all_memos() const;

    /// All-or-nothing. Throws the first failing mutation's error.
    TxResult apply_transaction(const Transaction& tx);

    Bytes export_snapshot() const;
    /// Replaces all content with the snapshot. Id counters never move backwards.
    void import_snapshot(std::span<const std::uint8_t> bytes);

    /// Writes the checkpoint file and truncates the journal.
    void checkpoint();

    StoreData contents() const;
    std::uint64_t sequence() const;
    const StoreOptions& options() const { return options_; }
    Timestamp now() const { return clock_->now(); }

    static constexpr const char* kJournalFile = "journal.log";
    static constexpr const char* kCheckpointFile = "checkpoint.bin";

private:
    void commit(detail::JournalRecord record);
    void append_journal(const Bytes& framed);
    void checkpoint_locked();
    template <typename F>
    auto read(F&& f) const {
        std::shared_lock lock(state_mutex_);
        return f(data_);
    }

    StoreOptions options_;
    std::shared_ptr<const Clock> clock_;
    mutable std::shared_mutex state_mutex_;
    std::mutex writer_mutex_;
    StoreData data_;
    std::uint64_t sequence_ = 0;
    int journal_fd_ = -1;
    std::uint64_t journal_size_ = 0;
    bool poisoned_ = false;
};

}  // namespace mfrs
