#include "mfrs/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "mfrs/bytes.hpp"
#include "mfrs/error.hpp"

namespace mfrs {

// ---------------------------------------------------------------------------
// Physical journal records

namespace op {
struct PutPerson {
    PersonRecord person;
};
struct DeletePerson {
    PersonId id;
};
struct PutEncoding {
    EncodingRecord record;
    std::optional<Bytes> image;
};
struct DeleteEncoding {
    EncodingId id;
};
struct PutMemo {
    VoiceMemo memo;
};
struct LinkMemo {
    MemoId id;
    std::optional<PersonId> person;
};
struct DeleteMemo {
    MemoId id;
};
struct Restore {
    StoreData data;
};
}  // namespace op

using PhysicalOp = std::variant<op::PutPerson, op::DeletePerson, op::PutEncoding, op::DeleteEncoding, op::PutMemo,
                                op::LinkMemo, op::DeleteMemo, op::Restore>;

namespace detail {
struct JournalRecord {
    std::uint64_t seq = 0;
    PersonId next_person = 1;
    EncodingId next_encoding = 1;
    MemoId next_memo = 1;
    std::vector<PhysicalOp> ops;
};
}  // namespace detail

namespace {

using detail::JournalRecord;

constexpr std::string_view kSnapshotMagic = "MFRSSNAP";
constexpr std::string_view kCheckpointMagic = "MFRSCKPT";

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
        crc = crc32(crc, bytes.data() + off, n);
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

// -- field codecs -----------------------------------------------------------

void put_time(ByteWriter& w, Timestamp t) { w.i64(to_micros(t)); }
Timestamp get_time(ByteReader& r) { return from_micros(r.i64()); }

std::string get_str(ByteReader& r) {
    const std::uint32_t n = r.u32();
    const auto s = r.raw(n);
    return std::string(reinterpret_cast<const char*>(s.data()), s.size());
}

Bytes get_blob(ByteReader& r) {
    const std::uint32_t n = r.u32();
    const auto s = r.raw(n);
    return Bytes(s.begin(), s.end());
}

void put_person(ByteWriter& w, const PersonRecord& p) {
    w.i64(p.person_id);
    w.str(p.name);
    w.str(p.relationship);
    w.str(p.notes);
    put_time(w, p.created_at);
    put_time(w, p.updated_at);
}

PersonRecord get_person(ByteReader& r) {
    PersonRecord p;
    p.person_id = r.i64();
    p.name = get_str(r);
    p.relationship = get_str(r);
    p.notes = get_str(r);
    p.created_at = get_time(r);
    p.updated_at = get_time(r);
    return p;
}

void put_encoding(ByteWriter& w, const EncodingRecord& e, const Bytes* image) {
    w.i64(e.encoding_id);
    w.i64(e.person_id);
    for (double v : e.encoding.values()) w.f64(v);
    put_time(w, e.created_at);
    w.u8(image ? 1 : 0);
    if (image) w.blob(*image);
}

std::pair<EncodingRecord, std::optional<Bytes>> get_encoding(ByteReader& r) {
    EncodingRecord e;
    e.encoding_id = r.i64();
    e.person_id = r.i64();
    std::array<double, kEncodingSize> v{};
    for (double& x : v) x = r.f64();
    e.encoding = FaceEncoding(v);
    e.created_at = get_time(r);
    std::optional<Bytes> image;
    if (r.u8()) image = get_blob(r);
    e.has_source_image = image.has_value();
    return {std::move(e), std::move(image)};
}

void put_memo(ByteWriter& w, const VoiceMemo& m) {
    w.i64(m.memo_id);
    w.u8(m.person_id ? 1 : 0);
    w.i64(m.person_id.value_or(0));
    put_time(w, m.created_at);
    w.str(m.label);
    w.blob(write_wav(m.clip));
}

VoiceMemo get_memo(ByteReader& r) {
    VoiceMemo m;
    m.memo_id = r.i64();
    const bool linked = r.u8() != 0;
    const PersonId pid = r.i64();
    if (linked) m.person_id = pid;
    m.created_at = get_time(r);
    m.label = get_str(r);
    const Bytes wav = get_blob(r);
    if (!r.ok()) return m;
    m.clip = read_wav(wav);
    return m;
}

// -- index maintenance ------------------------------------------------------

void index_encoding(StoreData& d, const EncodingRecord& e) { d.encodings_by_person[e.person_id].insert(e.encoding_id); }

void unindex(std::map<PersonId, std::set<std::int64_t>>& index, PersonId person, std::int64_t id) {
    auto it = index.find(person);
    if (it == index.end()) return;
    it->second.erase(id);
    if (it->second.empty()) index.erase(it);
}

void rebuild_indexes(StoreData& d) {
    d.encodings_by_person.clear();
    d.memos_by_person.clear();
    for (const auto& [id, e] : d.encodings) index_encoding(d, e);
    for (const auto& [id, m] : d.memos) {
        if (m.person_id) d.memos_by_person[*m.person_id].insert(id);
    }
}

void apply_op(StoreData& d, const PhysicalOp& any) {
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, op::PutPerson>) {
                d.persons[o.person.person_id] = o.person;
            } else if constexpr (std::is_same_v<T, op::DeletePerson>) {
                if (auto it = d.encodings_by_person.find(o.id); it != d.encodings_by_person.end()) {
                    for (EncodingId e : it->second) {
                        d.encodings.erase(e);
                        d.images.erase(e);
                    }
                    d.encodings_by_person.erase(it);
                }
                if (auto it = d.memos_by_person.find(o.id); it != d.memos_by_person.end()) {
                    for (MemoId m : it->second) d.memos.erase(m);
                    d.memos_by_person.erase(it);
                }
                d.persons.erase(o.id);
            } else if constexpr (std::is_same_v<T, op::PutEncoding>) {
                d.encodings[o.record.encoding_id] = o.record;
                if (o.image) d.images[o.record.encoding_id] = *o.image;
                index_encoding(d, o.record);
            } else if constexpr (std::is_same_v<T, op::DeleteEncoding>) {
                auto it = d.encodings.find(o.id);
                if (it == d.encodings.end()) return;
                unindex(d.encodings_by_person, it->second.person_id, o.id);
                d.images.erase(o.id);
                d.encodings.erase(it);
            } else if constexpr (std::is_same_v<T, op::PutMemo>) {
                d.memos[o.memo.memo_id] = o.memo;
                if (o.memo.person_id) d.memos_by_person[*o.memo.person_id].insert(o.memo.memo_id);
            } else if constexpr (std::is_same_v<T, op::LinkMemo>) {
                auto it = d.memos.find(o.id);
                if (it == d.memos.end()) return;
                if (it->second.person_id) unindex(d.memos_by_person, *it->second.person_id, o.id);
                it->second.person_id = o.person;
                if (o.person) d.memos_by_person[*o.person].insert(o.id);
            } else if constexpr (std::is_same_v<T, op::DeleteMemo>) {
                auto it = d.memos.find(o.id);
                if (it == d.memos.end()) return;
                if (it->second.person_id) unindex(d.memos_by_person, *it->second.person_id, o.id);
                d.memos.erase(it);
            } else if constexpr (std::is_same_v<T, op::Restore>) {
                const PersonId np = std::max(d.next_person, o.data.next_person);
                const EncodingId ne = std::max(d.next_encoding, o.data.next_encoding);
                const MemoId nm = std::max(d.next_memo, o.data.next_memo);
                d = o.data;
                d.next_person = np;
                d.next_encoding = ne;
                d.next_memo = nm;
            }
        },
        any);
}

void apply_record(StoreData& d, const JournalRecord& rec) {
    for (const auto& o : rec.ops) apply_op(d, o);
    d.next_person = std::max(d.next_person, rec.next_person);
    d.next_encoding = std::max(d.next_encoding, rec.next_encoding);
    d.next_memo = std::max(d.next_memo, rec.next_memo);
}

// -- snapshot body ----------------------------------------------------------

void put_snapshot_body(ByteWriter& w, const StoreData& d) {
    w.i64(d.next_person);
    w.i64(d.next_encoding);
    w.i64(d.next_memo);
    w.u32(static_cast<std::uint32_t>(d.persons.size()));
    for (const auto& [id, p] : d.persons) put_person(w, p);
    w.u32(static_cast<std::uint32_t>(d.encodings.size()));
    for (const auto& [id, e] : d.encodings) {
        auto img = d.images.find(id);
        put_encoding(w, e, img == d.images.end() ? nullptr : &img->second);
    }
    w.u32(static_cast<std::uint32_t>(d.memos.size()));
    for (const auto& [id, m] : d.memos) put_memo(w, m);
}

StoreData get_snapshot_body(ByteReader& r) {
    StoreData d;
    d.next_person = r.i64();
    d.next_encoding = r.i64();
    d.next_memo = r.i64();
    const std::uint32_t np = r.u32();
    for (std::uint32_t i = 0; i < np && r.ok(); ++i) {
        PersonRecord p = get_person(r);
        d.persons[p.person_id] = std::move(p);
    }
    const std::uint32_t ne = r.u32();
    for (std::uint32_t i = 0; i < ne && r.ok(); ++i) {
        auto [e, img] = get_encoding(r);
        if (img) d.images[e.encoding_id] = std::move(*img);
        d.encodings[e.encoding_id] = std::move(e);
    }
    const std::uint32_t nm = r.u32();
    for (std::uint32_t i = 0; i < nm && r.ok(); ++i) {
        VoiceMemo m = get_memo(r);
        d.memos[m.memo_id] = std::move(m);
    }
    rebuild_indexes(d);
    return d;
}

// -- journal record codec ---------------------------------------------------

enum class OpTag : std::uint8_t {
    PutPerson = 1,
    DeletePerson,
    PutEncoding,
    DeleteEncoding,
    PutMemo,
    LinkMemo,
    DeleteMemo,
    Restore
};

Bytes encode_record(const JournalRecord& rec) {
    ByteWriter w;
    w.u64(rec.seq);
    w.i64(rec.next_person);
    w.i64(rec.next_encoding);
    w.i64(rec.next_memo);
    w.u32(static_cast<std::uint32_t>(rec.ops.size()));
    for (const auto& any : rec.ops) {
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, op::PutPerson>) {
                    w.u8(static_cast<std::uint8_t>(OpTag::PutPerson));
                    put_person(w, o.person);
                } else if constexpr (std::is_same_v<T, op::DeletePerson>) {
                    w.u8(static_cast<std::uint8_t>(OpTag::DeletePerson));
                    w.i64(o.id);
                } else if constexpr (std::is_same_v<T, op::PutEncoding>) {
                    w.u8(static_cast<std::uint8_t>(OpTag::PutEncoding));
                    put_encoding(w, o.record, o.image ? &*o.image : nullptr);
                } else if constexpr (std::is_same_v<T, op::DeleteEncoding>) {
                    w.u8(static_cast<std::uint8_t>(OpTag::DeleteEncoding));
                    w.i64(o.id);
                } else if constexpr (std::is_same_v<T, op::PutMemo>) {
                    w.u8(static_cast<std::uint8_t>(OpTag::PutMemo));
                    put_memo(w, o.memo);
                } else if constexpr (std::is_same_v<T, op::LinkMemo>) {
                    w.u8(static_cast<std::uint8_t>(OpTag::LinkMemo));
                    w.i64(o.id);
                    w.u8(o.person ? 1 : 0);
                    w.i64(o.person.value_or(0));
                } else if constexpr (std::is_same_v<T, op::DeleteMemo>) {
                    w.u8(static_cast<std::uint8_t>(OpTag::DeleteMemo));
                    w.i64(o.id);
                } else if constexpr (std::is_same_v<T, op::Restore>) {
                    w.u8(static_cast<std::uint8_t>(OpTag::Restore));
                    put_snapshot_body(w, o.data);
                }
            },
            any);
    }
    return w.take();
}

std::optional<JournalRecord> decode_record(std::span<const std::uint8_t> payload) {
    try {
        ByteReader r(payload);
        JournalRecord rec;
        rec.seq = r.u64();
        rec.next_person = r.i64();
        rec.next_encoding = r.i64();
        rec.next_memo = r.i64();
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n && r.ok(); ++i) {
            switch (static_cast<OpTag>(r.u8())) {
                case OpTag::PutPerson: rec.ops.emplace_back(op::PutPerson{get_person(r)}); break;
                case OpTag::DeletePerson: rec.ops.emplace_back(op::DeletePerson{r.i64()}); break;
                case OpTag::PutEncoding: {
                    auto [e, img] = get_encoding(r);
                    rec.ops.emplace_back(op::PutEncoding{std::move(e), std::move(img)});
                    break;
                }
                case OpTag::DeleteEncoding: rec.ops.emplace_back(op::DeleteEncoding{r.i64()}); break;
                case OpTag::PutMemo: rec.ops.emplace_back(op::PutMemo{get_memo(r)}); break;
                case OpTag::LinkMemo: {
                    const MemoId id = r.i64();
                    const bool linked = r.u8() != 0;
                    const PersonId pid = r.i64();
                    rec.ops.emplace_back(op::LinkMemo{id, linked ? std::optional<PersonId>(pid) : std::nullopt});
                    break;
                }
                case OpTag::DeleteMemo: rec.ops.emplace_back(op::DeleteMemo{r.i64()}); break;
                case OpTag::Restore: rec.ops.emplace_back(op::Restore{get_snapshot_body(r)}); break;
                default: return std::nullopt;
            }
        }
        if (!r.ok() || r.remaining() != 0) return std::nullopt;
        return rec;
    } catch (const Error&) {
        return std::nullopt;
    }
}

/// [u32 payload length][u32 CRC-32 of payload][payload]
Bytes frame_record(const Bytes& payload) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.u32(crc32_of(payload));
    w.raw(payload);
    return w.take();
}

Bytes encode_checkpoint(std::uint64_t seq, const StoreData& d) {
    ByteWriter w;
    w.raw(kCheckpointMagic);
    w.u64(seq);
    w.blob(encode_snapshot(d));
    const std::uint32_t crc = crc32_of(w.bytes());
    w.u32(crc);
    return w.take();
}

std::pair<std::uint64_t, StoreData> decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kCheckpointMagic.size() + 8 + 4 + 4 ||
        std::memcmp(bytes.data(), kCheckpointMagic.data(), kCheckpointMagic.size()) != 0) {
        fail(ErrorCode::CorruptSnapshot, "checkpoint: bad header");
    }
    const auto body = bytes.first(bytes.size() - 4);
    ByteReader tail(bytes.last(4));
    if (crc32_of(body) != tail.u32()) fail(ErrorCode::CorruptSnapshot, "checkpoint: CRC mismatch");
    ByteReader r(body);
    r.raw(kCheckpointMagic.size());
    const std::uint64_t seq = r.u64();
    const Bytes snap = get_blob(r);
    if (!r.ok() || r.remaining() != 0) fail(ErrorCode::CorruptSnapshot, "checkpoint: truncated");
    return {seq, decode_snapshot(snap)};
}

// -- file helpers -----------------------------------------------------------

[[noreturn]] void io_fail(const std::string& what) {
    fail(ErrorCode::IoError, what + ": " + std::strerror(errno));
}

void write_all(int fd, std::span<const std::uint8_t> bytes, const std::string& what) {
    std::size_t off = 0;
    while (off < bytes.size()) {
        const ssize_t n = ::write(fd, bytes.data() + off, bytes.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            io_fail(what);
        }
        off += static_cast<std::size_t>(n);
    }
}

void fsync_dir(const std::filesystem::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

Bytes read_if_exists(const std::filesystem::path& p) {
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return {};
    return read_file_bytes(p.string());
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

bool finite_encoding(const FaceEncoding& e) {
    return std::all_of(e.values().begin(), e.values().end(), [](double v) { return std::isfinite(v); });
}

std::vector<MemoInfo> newest_first(const StoreData& d, const std::set<MemoId>* ids, bool unlinked_only) {
    std::vector<MemoInfo> out;
    if (ids) {
        for (MemoId id : *ids) out.push_back(memo_info(d.memos.at(id)));
    } else {
        for (const auto& [id, m] : d.memos) {
            if (!unlinked_only || !m.person_id) out.push_back(memo_info(m));
        }
    }
    std::sort(out.begin(), out.end(), [](const MemoInfo& a, const MemoInfo& b) {
        if (a.created_at != b.created_at) return a.created_at > b.created_at;
        return a.memo_id > b.memo_id;
    });
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Snapshot + recovery

Bytes encode_snapshot(const StoreData& data) {
    ByteWriter body;
    put_snapshot_body(body, data);
    ByteWriter w;
    w.raw(kSnapshotMagic);
    w.u32(kSnapshotVersion);
    w.raw(body.bytes());
    w.u32(crc32_of(body.bytes()));
    return w.take();
}

StoreData decode_snapshot(std::span<const std::uint8_t> bytes) {
    constexpr std::size_t header = kSnapshotMagic.size() + 4;
    if (bytes.size() < header + 4 ||
        std::memcmp(bytes.data(), kSnapshotMagic.data(), kSnapshotMagic.size()) != 0) {
        fail(ErrorCode::CorruptSnapshot, "snapshot: missing MFRSSNAP header");
    }
    ByteReader hr(bytes.subspan(kSnapshotMagic.size(), 4));
    const std::uint32_t version = hr.u32();
    if (version != kSnapshotVersion) {
        fail(ErrorCode::UnsupportedVersion, "snapshot: version " + std::to_string(version) + " (supported: " +
                                                std::to_string(kSnapshotVersion) + ")");
    }
    const auto body = bytes.subspan(header, bytes.size() - header - 4);
    ByteReader tail(bytes.last(4));
    if (crc32_of(body) != tail.u32()) fail(ErrorCode::CorruptSnapshot, "snapshot: checksum mismatch");
    ByteReader r(body);
    StoreData d;
    try {
        d = get_snapshot_body(r);
    } catch (const Error& e) {
        fail(ErrorCode::CorruptSnapshot, std::string("snapshot: ") + e.what());
    }
    if (!r.ok() || r.remaining() != 0) fail(ErrorCode::CorruptSnapshot, "snapshot: body length mismatch");
    return d;
}

Recovery recover(std::span<const std::uint8_t> journal, std::span<const std::uint8_t> checkpoint) {
    Recovery out;
    if (!checkpoint.empty()) {
        auto [seq, data] = decode_checkpoint(checkpoint);
        out.sequence = seq;
        out.data = std::move(data);
    }
    std::size_t off = 0;
    while (off < journal.size()) {
        if (journal.size() - off < 8) break;
        ByteReader hdr(journal.subspan(off, 8));
        const std::uint32_t len = hdr.u32();
        const std::uint32_t crc = hdr.u32();
        if (journal.size() - off - 8 < len) break;
        const auto payload = journal.subspan(off + 8, len);
        if (crc32_of(payload) != crc) break;
        auto rec = decode_record(payload);
        if (!rec) break;
        if (rec->seq > out.sequence) {
            if (rec->seq != out.sequence + 1) break;
            apply_record(out.data, *rec);
            out.sequence = rec->seq;
            ++out.records_applied;
        }
        off += 8 + len;
    }
    out.valid_journal_bytes = off;
    out.torn_tail = off != journal.size();
    return out;
}

// ---------------------------------------------------------------------------
// Transaction builder

PersonRef Transaction::create_person(std::string name, std::string relationship, std::string notes) {
    mutations.emplace_back(mutation::CreatePerson{std::move(name), std::move(relationship), std::move(notes)});
    return PersonRef::created(creates_++);
}
Transaction& Transaction::update_person(PersonRef p, PersonUpdate fields) {
    mutations.emplace_back(mutation::UpdatePerson{p, std::move(fields)});
    return *this;
}
Transaction& Transaction::delete_person(PersonRef p) {
    mutations.emplace_back(mutation::DeletePerson{p});
    return *this;
}
Transaction& Transaction::add_encoding(PersonRef p, const FaceEncoding& e, std::optional<Bytes> image) {
    mutations.emplace_back(mutation::AddEncoding{p, e, std::move(image)});
    return *this;
}
Transaction& Transaction::delete_encoding(EncodingId id) {
    mutations.emplace_back(mutation::DeleteEncoding{id});
    return *this;
}
Transaction& Transaction::add_memo(std::optional<PersonRef> p, AudioClip clip, std::string label,
                                   std::optional<Timestamp> created_at) {
    mutations.emplace_back(mutation::AddMemo{p, std::move(clip), std::move(label), created_at});
    return *this;
}
Transaction& Transaction::link_memo(MemoId id, std::optional<PersonRef> p) {
    mutations.emplace_back(mutation::LinkMemo{id, p});
    return *this;
}
Transaction& Transaction::delete_memo(MemoId id) {
    mutations.emplace_back(mutation::DeleteMemo{id});
    return *this;
}

// ---------------------------------------------------------------------------
// Store

Store::Store(StoreOptions options) : options_(std::move(options)) {
    clock_ = options_.clock ? options_.clock : std::make_shared<SystemClock>();
    if (options_.dir.empty()) return;

    std::error_code ec;
    std::filesystem::create_directories(options_.dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create data directory " + options_.dir.string() + ": " + ec.message());

    const auto journal_path = options_.dir / kJournalFile;
    journal_fd_ = ::open(journal_path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (journal_fd_ < 0) io_fail("open " + journal_path.string());
    if (::flock(journal_fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(journal_fd_);
        journal_fd_ = -1;
        fail(ErrorCode::IoError, "data directory " + options_.dir.string() + " is in use by another process");
    }

    try {
        const Bytes ckpt = read_if_exists(options_.dir / kCheckpointFile);
        const Bytes journal = read_file_bytes(journal_path.string());
        Recovery rec = recover(journal, ckpt);
        if (rec.torn_tail) {
            if (::ftruncate(journal_fd_, static_cast<off_t>(rec.valid_journal_bytes)) != 0) io_fail("truncate journal");
            if (options_.sync) ::fsync(journal_fd_);
        }
        data_ = std::move(rec.data);
        sequence_ = rec.sequence;
        journal_size_ = rec.valid_journal_bytes;
    } catch (...) {
        ::close(journal_fd_);
        journal_fd_ = -1;
        throw;
    }
}

Store::~Store() {
    if (journal_fd_ >= 0) ::close(journal_fd_);
}

void Store::append_journal(const Bytes& framed) {
    if (journal_fd_ < 0) return;
    if (poisoned_) fail(ErrorCode::IoError, "journal unusable after an earlier write failure");
    try {
        write_all(journal_fd_, framed, "journal write");
        if (options_.sync && ::fsync(journal_fd_) != 0) io_fail("journal fsync");
    } catch (...) {
        if (::ftruncate(journal_fd_, static_cast<off_t>(journal_size_)) != 0) poisoned_ = true;
        throw;
    }
    journal_size_ += framed.size();
}

void Store::commit(JournalRecord record) {
    // Caller holds writer_mutex_.
    record.seq = sequence_ + 1;
    append_journal(frame_record(encode_record(record)));
    {
        std::unique_lock lock(state_mutex_);
        apply_record(data_, record);
        sequence_ = record.seq;
    }
    if (journal_fd_ >= 0 && options_.checkpoint_bytes > 0 && journal_size_ > options_.checkpoint_bytes) {
        checkpoint_locked();
    }
}

void Store::checkpoint_locked() {
    if (journal_fd_ < 0) return;
    Bytes image;
    {
        std::shared_lock lock(state_mutex_);
        image = encode_checkpoint(sequence_, data_);
    }
    const auto final_path = options_.dir / kCheckpointFile;
    const auto tmp_path = options_.dir / (std::string(kCheckpointFile) + ".tmp");
    const int fd = ::open(tmp_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) io_fail("open " + tmp_path.string());
    try {
        write_all(fd, image, "checkpoint write");
        if (::fsync(fd) != 0) io_fail("checkpoint fsync");
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    std::error_code ec;
    std::filesystem::rename(tmp_path, final_path, ec);
    if (ec) fail(ErrorCode::IoError, "checkpoint rename: " + ec.message());
    fsync_dir(options_.dir);
    // Records up to sequence_ are now redundant; recovery skips them anyway,
    // so a crash before this truncate is harmless.
    if (::ftruncate(journal_fd_, 0) != 0) io_fail("journal truncate");
    if (options_.sync) ::fsync(journal_fd_);
    journal_size_ = 0;
}

void Store::checkpoint() {
    std::lock_guard w(writer_mutex_);
    checkpoint_locked();
}

TxResult Store::apply_transaction(const Transaction& tx) {
    std::lock_guard writer(writer_mutex_);
    // Only this thread mutates data_, so reading it here without the shared
    // lock is race-free.
    const StoreData& d = data_;
    const Timestamp now = clock_->now();

    JournalRecord rec;
    rec.next_person = d.next_person;
    rec.next_encoding = d.next_encoding;
    rec.next_memo = d.next_memo;
    TxResult result;

    // Overlay of this transaction's effects on top of d.
    std::map<PersonId, PersonRecord> persons;  // created or updated in tx
    std::set<PersonId> deleted_persons;
    std::map<EncodingId, PersonId> new_encodings;
    std::set<EncodingId> deleted_encodings;
    std::map<MemoId, std::optional<PersonId>> memo_owner;  // created or relinked in tx
    std::set<MemoId> deleted_memos;

    std::size_t index = 0;
    auto error = [&](ErrorCode code, const std::string& msg) -> Error {
        if (tx.mutations.size() == 1) return Error(code, msg);
        return Error(code, "mutation " + std::to_string(index) + ": " + msg);
    };
    auto person_live = [&](PersonId id) {
        if (deleted_persons.count(id)) return false;
        return persons.count(id) > 0 || d.persons.count(id) > 0;
    };
    auto resolve = [&](const PersonRef& ref) -> PersonId {
        PersonId id = ref.value;
        if (ref.pending) {
            if (ref.value < 0 || static_cast<std::size_t>(ref.value) >= result.persons.size()) {
                throw error(ErrorCode::ValidationError,
                            "reference to created person #" + std::to_string(ref.value) + " precedes its creation");
            }
            id = result.persons[static_cast<std::size_t>(ref.value)];
        }
        if (!person_live(id)) throw error(ErrorCode::NotFound, "person " + std::to_string(id) + " not found");
        return id;
    };
    auto current_person = [&](PersonId id) -> PersonRecord {
        if (auto it = persons.find(id); it != persons.end()) return it->second;
        return d.persons.at(id);
    };
    auto encoding_owner = [&](EncodingId id) -> std::optional<PersonId> {
        if (deleted_encodings.count(id)) return std::nullopt;
        std::optional<PersonId> owner;
        if (auto it = new_encodings.find(id); it != new_encodings.end()) owner = it->second;
        else if (auto jt = d.encodings.find(id); jt != d.encodings.end()) owner = jt->second.person_id;
        if (owner && deleted_persons.count(*owner)) return std::nullopt;
        return owner;
    };
    // nullopt: memo absent; otherwise the memo's current link.
    auto memo_state = [&](MemoId id) -> std::optional<std::optional<PersonId>> {
        if (deleted_memos.count(id)) return std::nullopt;
        if (auto it = memo_owner.find(id); it != memo_owner.end()) return it->second;
        if (auto jt = d.memos.find(id); jt != d.memos.end()) return jt->second.person_id;
        return std::nullopt;
    };

    for (const Mutation& m : tx.mutations) {
        std::visit(
            [&](const auto& mu) {
                using T = std::decay_t<decltype(mu)>;
                if constexpr (std::is_same_v<T, mutation::CreatePerson>) {
                    if (blank(mu.name)) throw error(ErrorCode::ValidationError, "person name must not be empty");
                    PersonRecord p{rec.next_person++, mu.name, mu.relationship, mu.notes, now, now};
                    persons[p.person_id] = p;
                    result.persons.push_back(p.person_id);
                    rec.ops.emplace_back(op::PutPerson{std::move(p)});
                } else if constexpr (std::is_same_v<T, mutation::UpdatePerson>) {
                    const PersonId id = resolve(mu.person);
                    if (mu.fields.name && blank(*mu.fields.name)) {
                        throw error(ErrorCode::ValidationError, "person name must not be empty");
                    }
                    PersonRecord p = current_person(id);
                    if (mu.fields.name) p.name = *mu.fields.name;
                    if (mu.fields.relationship) p.relationship = *mu.fields.relationship;
                    if (mu.fields.notes) p.notes = *mu.fields.notes;
                    p.updated_at = std::max(now, p.created_at);
                    persons[id] = p;
                    rec.ops.emplace_back(op::PutPerson{std::move(p)});
                } else if constexpr (std::is_same_v<T, mutation::DeletePerson>) {
                    const PersonId id = resolve(mu.person);
                    deleted_persons.insert(id);
                    persons.erase(id);
                    for (auto& [mid, owner] : memo_owner) {
                        if (owner == id) deleted_memos.insert(mid);
                    }
                    if (auto it = d.memos_by_person.find(id); it != d.memos_by_person.end()) {
                        for (MemoId mid : it->second) {
                            if (!memo_owner.count(mid)) deleted_memos.insert(mid);
                        }
                    }
                    rec.ops.emplace_back(op::DeletePerson{id});
                } else if constexpr (std::is_same_v<T, mutation::AddEncoding>) {
                    const PersonId id = resolve(mu.person);
                    if (!finite_encoding(mu.encoding)) {
                        throw error(ErrorCode::ValidationError, "encoding contains non-finite values");
                    }
                    EncodingRecord e{rec.next_encoding++, id, mu.encoding, mu.source_image.has_value(), now};
                    new_encodings[e.encoding_id] = id;
                    result.encodings.push_back(e.encoding_id);
                    rec.ops.emplace_back(op::PutEncoding{std::move(e), mu.source_image});
                } else if constexpr (std::is_same_v<T, mutation::DeleteEncoding>) {
                    if (!encoding_owner(mu.encoding_id)) {
                        throw error(ErrorCode::NotFound, "encoding " + std::to_string(mu.encoding_id) + " not found");
                    }
                    deleted_encodings.insert(mu.encoding_id);
                    rec.ops.emplace_back(op::DeleteEncoding{mu.encoding_id});
                } else if constexpr (std::is_same_v<T, mutation::AddMemo>) {
                    std::optional<PersonId> owner;
                    if (mu.person) owner = resolve(*mu.person);
                    if (mu.clip.sample_rate != kMemoSampleRate) {
                        throw error(ErrorCode::ValidationError,
                                    "memo sample rate " + std::to_string(mu.clip.sample_rate) + " (need 16000)");
                    }
                    if (mu.clip.samples.empty()) throw error(ErrorCode::ValidationError, "memo audio is empty");
                    VoiceMemo memo{rec.next_memo++, owner, mu.clip, mu.created_at.value_or(now), mu.label};
                    memo_owner[memo.memo_id] = owner;
                    result.memos.push_back(memo.memo_id);
                    rec.ops.emplace_back(op::PutMemo{std::move(memo)});
                } else if constexpr (std::is_same_v<T, mutation::LinkMemo>) {
                    if (!memo_state(mu.memo_id)) {
                        throw error(ErrorCode::NotFound, "memo " + std::to_string(mu.memo_id) + " not found");
                    }
                    std::optional<PersonId> owner;
                    if (mu.person) owner = resolve(*mu.person);
                    memo_owner[mu.memo_id] = owner;
                    rec.ops.emplace_back(op::LinkMemo{mu.memo_id, owner});
                } else if constexpr (std::is_same_v<T, mutation::DeleteMemo>) {
                    if (!memo_state(mu.memo_id)) {
                        throw error(ErrorCode::NotFound, "memo " + std::to_string(mu.memo_id) + " not found");
                    }
                    deleted_memos.insert(mu.memo_id);
                    memo_owner.erase(mu.memo_id);
                    rec.ops.emplace_back(op::DeleteMemo{mu.memo_id});
                }
            },
            m);
        ++index;
    }

    if (rec.ops.empty()) return result;
    commit(std::move(rec));
    return result;
}

// -- convenience wrappers ---------------------------------------------------

PersonRecord Store::create_person(const std::string& name, const std::string& relationship, const std::string& notes) {
    Transaction tx;
    tx.create_person(name, relationship, notes);
    return get_person(apply_transaction(tx).persons.at(0));
}

PersonRecord Store::update_person(PersonId id, const PersonUpdate& fields) {
    Transaction tx;
    tx.update_person(id, fields);
    apply_transaction(tx);
    return get_person(id);
}

void Store::delete_person(PersonId id) {
    Transaction tx;
    tx.delete_person(id);
    apply_transaction(tx);
}

PersonRecord Store::get_person(PersonId id) const {
    auto p = find_person(id);
    if (!p) fail(ErrorCode::NotFound, "person " + std::to_string(id) + " not found");
    return *p;
}

std::optional<PersonRecord> Store::find_person(PersonId id) const {
    return read([&](const StoreData& d) -> std::optional<PersonRecord> {
        auto it = d.persons.find(id);
        if (it == d.persons.end()) return std::nullopt;
        return it->second;
    });
}

std::vector<PersonRecord> Store::list_persons() const {
    return read([](const StoreData& d) {
        std::vector<PersonRecord> out;
        out.reserve(d.persons.size());
        for (const auto& [id, p] : d.persons) out.push_back(p);
        return out;
    });
}

std::size_t Store::person_count() const {
    return read([](const StoreData& d) { return d.persons.size(); });
}

EncodingRecord Store::add_encoding(PersonId person, const FaceEncoding& encoding, std::optional<Bytes> image) {
    Transaction tx;
    tx.add_encoding(person, encoding, std::move(image));
    return get_encoding(apply_transaction(tx).encodings.at(0));
}

void Store::delete_encoding(EncodingId id) {
    Transaction tx;
    tx.delete_encoding(id);
    apply_transaction(tx);
}

EncodingRecord Store::get_encoding(EncodingId id) const {
    return read([&](const StoreData& d) {
        auto it = d.encodings.find(id);
        if (it == d.encodings.end()) fail(ErrorCode::NotFound, "encoding " + std::to_string(id) + " not found");
        return it->second;
    });
}

Bytes Store::source_image(EncodingId id) const {
    return read([&](const StoreData& d) {
        auto it = d.images.find(id);
        if (it == d.images.end()) {
            fail(ErrorCode::NotFound, "no source image stored for encoding " + std::to_string(id));
        }
        return it->second;
    });
}

std::vector<std::pair<PersonId, FaceEncoding>> Store::all_encodings() const {
    return read([](const StoreData& d) {
        std::vector<std::pair<PersonId, FaceEncoding>> out;
        out.reserve(d.encodings.size());
        for (const auto& [id, e] : d.encodings) out.emplace_back(e.person_id, e.encoding);
        return out;
    });
}

std::vector<EncodingRecord> Store::encoding_records() const {
    return read([](const StoreData& d) {
        std::vector<EncodingRecord> out;
        out.reserve(d.encodings.size());
        for (const auto& [id, e] : d.encodings) out.push_back(e);
        return out;
    });
}

std::vector<EncodingRecord> Store::encodings_for(PersonId id) const {
    return read([&](const StoreData& d) {
        std::vector<EncodingRecord> out;
        if (auto it = d.encodings_by_person.find(id); it != d.encodings_by_person.end()) {
            for (EncodingId e : it->second) out.push_back(d.encodings.at(e));
        }
        return out;
    });
}

std::size_t Store::encoding_count(PersonId id) const {
    return read([&](const StoreData& d) -> std::size_t {
        auto it = d.encodings_by_person.find(id);
        return it == d.encodings_by_person.end() ? 0 : it->second.size();
    });
}

MemoId Store::add_memo(const VoiceMemo& memo) {
    Transaction tx;
    std::optional<PersonRef> ref;
    if (memo.person_id) ref = PersonRef(*memo.person_id);
    tx.add_memo(ref, memo.clip, memo.label, memo.created_at);
    return apply_transaction(tx).memos.at(0);
}

VoiceMemo Store::get_memo(MemoId id) const {
    return read([&](const StoreData& d) {
        auto it = d.memos.find(id);
        if (it == d.memos.end()) fail(ErrorCode::NotFound, "memo " + std::to_string(id) + " not found");
        return it->second;
    });
}

MemoInfo Store::link_memo(MemoId id, std::optional<PersonId> person) {
    Transaction tx;
    std::optional<PersonRef> ref;
    if (person) ref = PersonRef(*person);
    tx.link_memo(id, ref);
    apply_transaction(tx);
    return memo_info(get_memo(id));
}

void Store::delete_memo(MemoId id) {
    Transaction tx;
    tx.delete_memo(id);
    apply_transaction(tx);
}

std::vector<MemoInfo> Store::memos_for(PersonId id) const {
    return read([&](const StoreData& d) {
        auto it = d.memos_by_person.find(id);
        static const std::set<MemoId> none;
        return newest_first(d, it == d.memos_by_person.end() ? &none : &it->second, false);
    });
}

std::vector<MemoInfo> Store::unlinked_memos() const {
    return read([](const StoreData& d) { return newest_first(d, nullptr, true); });
}

std::vector<MemoInfo> Store::all_memos() const {
    return read([](const StoreData& d) { return newest_first(d, nullptr, false); });
}

Bytes Store::export_snapshot() const {
    return read([](const StoreData& d) { return encode_snapshot(d); });
}

void Store::import_snapshot(std::span<const std::uint8_t> bytes) {
    StoreData incoming = decode_snapshot(bytes);
    std::lock_guard writer(writer_mutex_);
    JournalRecord rec;
    rec.next_person = std::max(data_.next_person, incoming.next_person);
    rec.next_encoding = std::max(data_.next_encoding, incoming.next_encoding);
    rec.next_memo = std::max(data_.next_memo, incoming.next_memo);
    rec.ops.emplace_back(op::Restore{std::move(incoming)});
    commit(std::move(rec));
}

StoreData Store::contents() const {
    return read([](const StoreData& d) { return d; });
}

std::uint64_t Store::sequence() const {
    std::shared_lock lock(state_mutex_);
    return sequence_;
}

}  // namespace mfrs
