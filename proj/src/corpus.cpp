#include "kidcorpus/corpus.hpp"

#include "kidcorpus/error.hpp"
#include "kidcorpus/fsutil.hpp"
#include "kidcorpus/g2p.hpp"
#include "sqlite_util.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

namespace kidcorpus {

namespace fs = std::filesystem;
using sql::Statement;
using sql::Transaction;

namespace {

constexpr const char* kSchema = R"SQL(
CREATE TABLE meta(key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE speakers(
  speaker_id TEXT PRIMARY KEY,
  speaker_tag TEXT NOT NULL UNIQUE,
  full_name TEXT NOT NULL,
  sex TEXT NOT NULL CHECK (sex IN ('boy','girl')),
  date_of_birth TEXT NOT NULL,
  enrollment_date TEXT NOT NULL,
  address TEXT NOT NULL,
  children_in_family INTEGER NOT NULL CHECK (children_in_family >= 1),
  birth_order INTEGER NOT NULL CHECK (birth_order >= 1 AND birth_order <= children_in_family),
  attends_kindergarten INTEGER NOT NULL,
  kindergarten_name TEXT,
  extra_courses TEXT NOT NULL,
  development_notes TEXT NOT NULL,
  diseases TEXT NOT NULL,
  age_override INTEGER NOT NULL
);
CREATE TABLE media(
  asset_id TEXT PRIMARY KEY,
  kind TEXT NOT NULL CHECK (kind IN ('image','sound')),
  content_type TEXT NOT NULL,
  bytes_ref TEXT NOT NULL,
  display_name TEXT NOT NULL
);
CREATE TABLE words(
  word_id TEXT PRIMARY KEY,
  orthography TEXT NOT NULL,
  ipa TEXT NOT NULL,
  ipa_override INTEGER NOT NULL,
  image_ref TEXT REFERENCES media(asset_id) ON DELETE RESTRICT,
  sound_ref TEXT REFERENCES media(asset_id) ON DELETE RESTRICT,
  seq INTEGER NOT NULL
);
CREATE TABLE collections(
  label TEXT PRIMARY KEY,
  theme TEXT NOT NULL,
  status TEXT NOT NULL CHECK (status IN ('draft','published'))
);
CREATE TABLE collection_entries(
  label TEXT NOT NULL REFERENCES collections(label) ON DELETE RESTRICT,
  word_order INTEGER NOT NULL CHECK (word_order >= 1),
  word_id TEXT NOT NULL REFERENCES words(word_id) ON DELETE RESTRICT,
  PRIMARY KEY (label, word_order)
);
CREATE TABLE lexicon(
  orthography TEXT PRIMARY KEY,
  frequency_rank INTEGER NOT NULL UNIQUE,
  ipa TEXT NOT NULL
);
CREATE TABLE sessions(
  session_id TEXT PRIMARY KEY,
  speaker_id TEXT NOT NULL REFERENCES speakers(speaker_id) ON DELETE RESTRICT,
  collection_label TEXT NOT NULL REFERENCES collections(label) ON DELETE RESTRICT,
  local_day TEXT NOT NULL,
  started_at_ms INTEGER NOT NULL,
  UNIQUE (speaker_id, local_day)
);
CREATE TABLE records(
  record_id TEXT PRIMARY KEY,
  speaker_id TEXT NOT NULL REFERENCES speakers(speaker_id) ON DELETE RESTRICT,
  collection_label TEXT NOT NULL,
  word_order INTEGER NOT NULL,
  filename TEXT NOT NULL UNIQUE,
  place_of_recording TEXT NOT NULL,
  equipment TEXT NOT NULL,
  emotional_state TEXT NOT NULL,
  session_id TEXT NOT NULL REFERENCES sessions(session_id) ON DELETE RESTRICT,
  recorded_on TEXT NOT NULL,
  sample_rate INTEGER NOT NULL,
  channels INTEGER NOT NULL,
  bit_depth INTEGER NOT NULL,
  duration_seconds REAL NOT NULL,
  processing_stage TEXT NOT NULL,
  UNIQUE (session_id, word_order),
  FOREIGN KEY (collection_label, word_order)
    REFERENCES collection_entries(label, word_order) ON DELETE RESTRICT
);
)SQL";

constexpr const char* kSpeakerColumns =
    "speaker_id, speaker_tag, full_name, sex, date_of_birth, enrollment_date, address, "
    "children_in_family, birth_order, attends_kindergarten, kindergarten_name, extra_courses, "
    "development_notes, diseases, age_override";

constexpr const char* kRecordColumns =
    "record_id, speaker_id, collection_label, word_order, filename, place_of_recording, "
    "equipment, emotional_state, session_id, recorded_on, sample_rate, channels, bit_depth, "
    "duration_seconds, processing_stage";

std::string join_courses(const std::set<ExtraCourse>& courses) {
    std::string out;
    for (auto c : courses) {
        if (!out.empty()) out += ',';
        out += to_string(c);
    }
    return out;
}

std::set<ExtraCourse> split_courses(const std::string& text) {
    std::set<ExtraCourse> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(extra_course_from_string(item));
    }
    return out;
}

Speaker read_speaker(const Statement& s) {
    Speaker sp;
    sp.speaker_id = s.text(0);
    sp.speaker_tag = s.text(1);
    sp.full_name = s.text(2);
    sp.sex = sex_from_string(s.text(3));
    sp.date_of_birth = parse_date(s.text(4));
    sp.enrollment_date = parse_date(s.text(5));
    sp.address = s.text(6);
    sp.children_in_family = s.integer(7);
    sp.birth_order = s.integer(8);
    sp.attends_kindergarten = s.integer(9) != 0;
    sp.kindergarten_name = s.opt_text(10);
    sp.extra_courses = split_courses(s.text(11));
    sp.development_notes = s.text(12);
    sp.diseases = s.text(13);
    sp.age_override = s.integer(14) != 0;
    return sp;
}

MediaAsset read_media(const Statement& s) {
    return {s.text(0), media_kind_from_string(s.text(1)), s.text(2), s.text(3), s.text(4)};
}

Word read_word(const Statement& s) {
    return {s.text(0), s.text(1), s.text(2), s.integer(3) != 0, s.opt_text(4), s.opt_text(5)};
}

RecordingRecord read_record(const Statement& s) {
    RecordingRecord r;
    r.record_id = s.text(0);
    r.speaker_id = s.text(1);
    r.collection_label = s.text(2).at(0);
    r.word_order = s.integer(3);
    r.filename = s.text(4);
    r.place_of_recording = s.text(5);
    r.equipment = s.text(6);
    r.emotional_state = emotional_state_from_string(s.text(7));
    r.session_id = s.text(8);
    r.recorded_on = parse_date(s.text(9));
    r.audio_facts = {s.integer(10), s.integer(11), s.integer(12), s.real(13)};
    r.processing_stage = processing_stage_from_string(s.text(14));
    return r;
}

SessionRow read_session(const Statement& s) {
    return {s.text(0), s.text(1), s.text(2).at(0), parse_date(s.text(3)), s.int64(4)};
}

bool is_constraint(int rc) { return (rc & 0xFF) == SQLITE_CONSTRAINT; }

std::string label_str(char label) { return std::string(1, label); }

std::string sniff_image_type(std::string_view b) {
    auto starts = [&](std::string_view magic) { return b.substr(0, magic.size()) == magic; };
    if (starts("\x89PNG\r\n\x1a\n")) return "image/png";
    if (starts("\xFF\xD8\xFF")) return "image/jpeg";
    if (starts("GIF87a") || starts("GIF89a")) return "image/gif";
    if (starts("BM") && b.size() > 14) return "image/bmp";
    if (starts("RIFF") && b.size() >= 12 && b.substr(8, 4) == "WEBP") return "image/webp";
    return {};
}

void check_speaker(const Speaker& s) {
    if (!is_valid_speaker_tag(s.speaker_tag)) {
        throw Error(Errc::invalid_speaker,
                    "speaker tag must be one or more ASCII letters: '" + s.speaker_tag + "'",
                    {{"field", "speaker_tag"}});
    }
    if (s.full_name.empty()) {
        throw Error(Errc::invalid_speaker, "full name is required", {{"field", "full_name"}});
    }
    if (!s.date_of_birth.ok() || !s.enrollment_date.ok()) {
        throw Error(Errc::invalid_speaker, "dates must be valid calendar dates");
    }
    if (s.children_in_family < 1 || s.birth_order < 1 || s.birth_order > s.children_in_family) {
        throw Error(Errc::invalid_birth_order,
                    "birth order " + std::to_string(s.birth_order) + " with " +
                        std::to_string(s.children_in_family) + " children in family",
                    {{"birth_order", s.birth_order}, {"children_in_family", s.children_in_family}});
    }
    if (!s.attends_kindergarten && s.kindergarten_name && !s.kindergarten_name->empty()) {
        throw Error(Errc::invalid_speaker, "kindergarten name given but attends_kindergarten is false",
                    {{"field", "kindergarten_name"}});
    }
    const int age = full_years_between(s.date_of_birth, s.enrollment_date);
    if (age < 0) throw Error(Errc::invalid_speaker, "enrollment precedes date of birth");
    if (!s.age_override && (age < kMinEnrollmentAge || age > kMaxEnrollmentAge)) {
        throw Error(Errc::age_out_of_range,
                    "age at enrollment is " + std::to_string(age) + " years; expected 4..6",
                    {{"age_years", age}});
    }
}

}  // namespace

struct Corpus::Db {
    sqlite3* handle = nullptr;
    ~Db() {
        if (handle) sqlite3_close_v2(handle);
    }
};

Corpus::Corpus(CorpusPaths paths)
    : paths_(std::move(paths)), db_(std::make_unique<Db>()),
      mutex_(std::make_unique<std::shared_mutex>()) {}

Corpus::Corpus(Corpus&&) noexcept = default;
Corpus& Corpus::operator=(Corpus&&) noexcept = default;
Corpus::~Corpus() = default;

bool Corpus::init(const fs::path& root) {
    CorpusPaths p{root};
    if (fs::exists(p.db())) return false;
    fs::create_directories(p.media_dir());
    fs::create_directories(p.raw_dir());
    fs::create_directories(p.clean_dir());
    fs::create_directories(p.sessions_dir());

    sqlite3* db = nullptr;
    if (sqlite3_open_v2(p.db().c_str(), &db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) !=
        SQLITE_OK) {
        std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
        sqlite3_close_v2(db);
        throw Error(Errc::io_error, "cannot create " + p.db().string() + ": " + msg);
    }
    try {
        sql::exec(db, "PRAGMA foreign_keys = ON");
        sql::Transaction tx(db);
        sql::exec(db, kSchema);
        Statement(db, "INSERT INTO meta(key, value) VALUES ('schema_version', ?1)")
            .bind(1, std::to_string(kSchemaVersion))
            .step();
        tx.commit();
        sql::exec(db, ("PRAGMA user_version = " + std::to_string(kSchemaVersion)).c_str());
    } catch (...) {
        sqlite3_close_v2(db);
        throw;
    }
    sqlite3_close_v2(db);
    return true;
}

Corpus Corpus::open(const fs::path& root) {
    if (!fs::is_directory(root)) {
        throw Error(Errc::corpus_not_found, "corpus root " + root.string() + " does not exist");
    }
    Corpus c{CorpusPaths{root}};
    if (!fs::exists(c.paths_.db())) {
        throw Error(Errc::corpus_not_initialized,
                    root.string() + " has no corpus.db; run init first");
    }
    if (sqlite3_open_v2(c.paths_.db().c_str(), &c.db_->handle,
                        SQLITE_OPEN_READWRITE | SQLITE_OPEN_FULLMUTEX, nullptr) != SQLITE_OK) {
        throw Error(Errc::io_error, "cannot open " + c.paths_.db().string());
    }
    sqlite3_busy_timeout(c.db_->handle, 5000);
    sql::exec(c.db_->handle, "PRAGMA foreign_keys = ON");
    sql::exec(c.db_->handle, "PRAGMA synchronous = FULL");
    for (const auto& dir : {c.paths_.media_dir(), c.paths_.raw_dir(), c.paths_.clean_dir(),
                            c.paths_.sessions_dir()}) {
        fs::create_directories(dir);
    }
    return c;
}

int Corpus::schema_version() const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle, "SELECT value FROM meta WHERE key = 'schema_version'");
    return s.step() ? std::stoi(s.text(0)) : 0;
}

// ---------------------------------------------------------------- speakers

Speaker Corpus::create_speaker(Speaker draft) {
    check_speaker(draft);
    std::unique_lock lock(*mutex_);
    draft.speaker_id = random_id("spk_");
    Statement s(db_->handle,
                std::string("INSERT INTO speakers(") + kSpeakerColumns +
                    ") VALUES (?1,?2,?3,?4,?5,?6,?7,?8,?9,?10,?11,?12,?13,?14,?15)");
    s.bind(1, draft.speaker_id)
        .bind(2, draft.speaker_tag)
        .bind(3, draft.full_name)
        .bind(4, to_string(draft.sex))
        .bind(5, format_date(draft.date_of_birth))
        .bind(6, format_date(draft.enrollment_date))
        .bind(7, draft.address)
        .bind(8, draft.children_in_family)
        .bind(9, draft.birth_order)
        .bind(10, draft.attends_kindergarten)
        .bind(11, draft.kindergarten_name)
        .bind(12, join_courses(draft.extra_courses))
        .bind(13, draft.development_notes)
        .bind(14, draft.diseases)
        .bind(15, draft.age_override);
    const int rc = s.try_step();
    if (rc == SQLITE_CONSTRAINT_UNIQUE) {
        throw Error(Errc::duplicate_tag, "speaker tag '" + draft.speaker_tag + "' is taken",
                    {{"speaker_tag", draft.speaker_tag}});
    }
    if (rc != SQLITE_DONE) sql::fail(db_->handle, "insert speaker");
    return draft;
}

Speaker Corpus::get_speaker(const std::string& id) const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                std::string("SELECT ") + kSpeakerColumns + " FROM speakers WHERE speaker_id = ?1");
    s.bind(1, id);
    if (!s.step()) throw Error(Errc::speaker_not_found, "no speaker " + id, {{"speaker_id", id}});
    return read_speaker(s);
}

std::optional<Speaker> Corpus::find_speaker_by_tag(const std::string& tag) const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                std::string("SELECT ") + kSpeakerColumns + " FROM speakers WHERE speaker_tag = ?1");
    s.bind(1, tag);
    if (!s.step()) return std::nullopt;
    return read_speaker(s);
}

std::vector<Speaker> Corpus::list_speakers() const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                std::string("SELECT ") + kSpeakerColumns + " FROM speakers ORDER BY speaker_tag");
    std::vector<Speaker> out;
    while (s.step()) out.push_back(read_speaker(s));
    return out;
}

void Corpus::delete_speaker(const std::string& id) {
    std::unique_lock lock(*mutex_);
    Statement s(db_->handle, "DELETE FROM speakers WHERE speaker_id = ?1");
    s.bind(1, id);
    const int rc = s.try_step();
    if (is_constraint(rc)) {
        throw Error(Errc::entity_referenced, "speaker " + id + " has sessions or records");
    }
    if (rc != SQLITE_DONE) sql::fail(db_->handle, "delete speaker");
    if (sqlite3_changes(db_->handle) == 0) {
        throw Error(Errc::speaker_not_found, "no speaker " + id, {{"speaker_id", id}});
    }
}

// ------------------------------------------------------------------- media

MediaAsset Corpus::add_media(MediaKind kind, std::string_view bytes, std::string display_name,
                             std::string content_type) {
    if (kind == MediaKind::image) {
        const std::string sniffed = sniff_image_type(bytes);
        if (sniffed.empty()) throw Error(Errc::invalid_media, "image asset is not a raster image");
        content_type = sniffed;
    } else {
        try {
            (void)parse_wav(bytes);
        } catch (const Error& e) {
            throw Error(Errc::invalid_media, std::string("sound asset is not an accepted WAV: ") + e.what(),
                        {{"cause", std::string(e.code_name())}});
        }
        content_type = "audio/wav";
    }
    MediaAsset asset;
    asset.asset_id = sha256_hex(bytes);
    asset.kind = kind;
    asset.content_type = std::move(content_type);
    asset.bytes_ref = "media/" + asset.asset_id;
    asset.display_name = std::move(display_name);

    std::unique_lock lock(*mutex_);
    {
        Statement existing(db_->handle,
                           "SELECT asset_id, kind, content_type, bytes_ref, display_name FROM media "
                           "WHERE asset_id = ?1");
        existing.bind(1, asset.asset_id);
        if (existing.step()) return read_media(existing);  // content-addressed: same bytes, same asset
    }
    const fs::path file = paths_.root / asset.bytes_ref;
    write_file_durable(file, bytes);
    Statement s(db_->handle,
                "INSERT INTO media(asset_id, kind, content_type, bytes_ref, display_name) "
                "VALUES (?1,?2,?3,?4,?5)");
    s.bind(1, asset.asset_id)
        .bind(2, to_string(asset.kind))
        .bind(3, asset.content_type)
        .bind(4, asset.bytes_ref)
        .bind(5, asset.display_name);
    if (s.try_step() != SQLITE_DONE) {
        fs::remove(file);
        sql::fail(db_->handle, "insert media");
    }
    return asset;
}

MediaAsset Corpus::get_media(const std::string& id) const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                "SELECT asset_id, kind, content_type, bytes_ref, display_name FROM media "
                "WHERE asset_id = ?1");
    s.bind(1, id);
    if (!s.step()) throw Error(Errc::media_not_found, "no media asset " + id, {{"asset_id", id}});
    return read_media(s);
}

std::vector<MediaAsset> Corpus::list_media() const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                "SELECT asset_id, kind, content_type, bytes_ref, display_name FROM media "
                "ORDER BY asset_id");
    std::vector<MediaAsset> out;
    while (s.step()) out.push_back(read_media(s));
    return out;
}

void Corpus::delete_media(const std::string& id) {
    std::unique_lock lock(*mutex_);
    Statement s(db_->handle, "DELETE FROM media WHERE asset_id = ?1");
    s.bind(1, id);
    const int rc = s.try_step();
    if (is_constraint(rc)) throw Error(Errc::entity_referenced, "media " + id + " is used by a word");
    if (rc != SQLITE_DONE) sql::fail(db_->handle, "delete media");
    if (sqlite3_changes(db_->handle) == 0) {
        throw Error(Errc::media_not_found, "no media asset " + id, {{"asset_id", id}});
    }
    fs::remove(paths_.media_dir() / id);
}

// ------------------------------------------------------------------- words

Word Corpus::add_word(const std::string& orthography, std::optional<std::string> image_ref,
                      std::optional<std::string> sound_ref) {
    Word w;
    w.orthography = orthography;
    w.ipa = transcribe(orthography);  // validates
    w.image_ref = std::move(image_ref);
    w.sound_ref = std::move(sound_ref);
    if (w.image_ref && get_media(*w.image_ref).kind != MediaKind::image) {
        throw Error(Errc::invalid_media, "image_ref does not name an image asset");
    }
    if (w.sound_ref && get_media(*w.sound_ref).kind != MediaKind::sound) {
        throw Error(Errc::invalid_media, "sound_ref does not name a sound asset");
    }

    std::unique_lock lock(*mutex_);
    w.word_id = random_id("wrd_");
    Statement s(db_->handle,
                "INSERT INTO words(word_id, orthography, ipa, ipa_override, image_ref, sound_ref, seq) "
                "VALUES (?1,?2,?3,0,?4,?5,(SELECT COALESCE(MAX(seq),0)+1 FROM words))");
    s.bind(1, w.word_id).bind(2, w.orthography).bind(3, w.ipa).bind(4, w.image_ref).bind(5, w.sound_ref);
    if (s.try_step() != SQLITE_DONE) sql::fail(db_->handle, "insert word");
    return w;
}

Word Corpus::override_ipa(const std::string& word_id, const std::string& ipa) {
    {
        std::unique_lock lock(*mutex_);
        Statement s(db_->handle, "UPDATE words SET ipa = ?2, ipa_override = 1 WHERE word_id = ?1");
        s.bind(1, word_id).bind(2, ipa);
        s.step();
        if (sqlite3_changes(db_->handle) == 0) {
            throw Error(Errc::word_not_found, "no word " + word_id, {{"word_id", word_id}});
        }
    }
    return get_word(word_id);
}

Word Corpus::get_word(const std::string& id) const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                "SELECT word_id, orthography, ipa, ipa_override, image_ref, sound_ref FROM words "
                "WHERE word_id = ?1");
    s.bind(1, id);
    if (!s.step()) throw Error(Errc::word_not_found, "no word " + id, {{"word_id", id}});
    return read_word(s);
}

std::optional<Word> Corpus::find_word_by_orthography(const std::string& orthography) const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                "SELECT word_id, orthography, ipa, ipa_override, image_ref, sound_ref FROM words "
                "WHERE orthography = ?1 ORDER BY seq LIMIT 1");
    s.bind(1, orthography);
    if (!s.step()) return std::nullopt;
    return read_word(s);
}

std::vector<Word> Corpus::list_words() const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                "SELECT word_id, orthography, ipa, ipa_override, image_ref, sound_ref FROM words "
                "ORDER BY seq");
    std::vector<Word> out;
    while (s.step()) out.push_back(read_word(s));
    return out;
}

void Corpus::delete_word(const std::string& id) {
    std::unique_lock lock(*mutex_);
    Statement s(db_->handle, "DELETE FROM words WHERE word_id = ?1");
    s.bind(1, id);
    const int rc = s.try_step();
    if (is_constraint(rc)) throw Error(Errc::entity_referenced, "word " + id + " is in a collection");
    if (rc != SQLITE_DONE) sql::fail(db_->handle, "delete word");
    if (sqlite3_changes(db_->handle) == 0) {
        throw Error(Errc::word_not_found, "no word " + id, {{"word_id", id}});
    }
}

// ------------------------------------------------------------- collections

namespace {

WordCollection load_collection(sqlite3* db, char label) {
    Statement c(db, "SELECT label, theme, status FROM collections WHERE label = ?1");
    c.bind(1, label_str(label));
    if (!c.step()) {
        throw Error(Errc::collection_not_found, "no collection " + label_str(label),
                    {{"label", label_str(label)}});
    }
    WordCollection wc;
    wc.label = label;
    wc.theme = c.text(1);
    wc.status = c.text(2) == "published" ? CollectionStatus::published : CollectionStatus::draft;
    Statement e(db,
                "SELECT word_order, word_id FROM collection_entries WHERE label = ?1 "
                "ORDER BY word_order");
    e.bind(1, label_str(label));
    while (e.step()) wc.entries.push_back({e.integer(0), e.text(1)});
    return wc;
}

void require_word(sqlite3* db, const std::string& word_id) {
    Statement s(db, "SELECT 1 FROM words WHERE word_id = ?1");
    s.bind(1, word_id);
    if (!s.step()) throw Error(Errc::word_not_found, "no word " + word_id, {{"word_id", word_id}});
}

void insert_entry(sqlite3* db, char label, int order, const std::string& word_id) {
    Statement s(db, "INSERT INTO collection_entries(label, word_order, word_id) VALUES (?1,?2,?3)");
    s.bind(1, label_str(label)).bind(2, order).bind(3, word_id);
    s.step();
}

}  // namespace

WordCollection Corpus::create_collection(char label, std::string theme,
                                         const std::vector<std::string>& word_ids) {
    if (!is_valid_collection_label(label)) {
        throw Error(Errc::invalid_collection, "collection label must be one uppercase letter A-Z");
    }
    std::unique_lock lock(*mutex_);
    Transaction tx(db_->handle);
    for (const auto& id : word_ids) require_word(db_->handle, id);
    Statement s(db_->handle, "INSERT INTO collections(label, theme, status) VALUES (?1, ?2, 'draft')");
    s.bind(1, label_str(label)).bind(2, theme);
    const int rc = s.try_step();
    if (rc == SQLITE_CONSTRAINT_PRIMARYKEY || rc == SQLITE_CONSTRAINT_UNIQUE) {
        throw Error(Errc::duplicate_label, "collection " + label_str(label) + " already exists",
                    {{"label", label_str(label)}});
    }
    if (rc != SQLITE_DONE) sql::fail(db_->handle, "insert collection");
    for (std::size_t i = 0; i < word_ids.size(); ++i) {
        insert_entry(db_->handle, label, static_cast<int>(i + 1), word_ids[i]);
    }
    tx.commit();
    return load_collection(db_->handle, label);
}

WordCollection Corpus::append_to_collection(char label, const std::string& word_id) {
    std::unique_lock lock(*mutex_);
    Transaction tx(db_->handle);
    auto wc = load_collection(db_->handle, label);
    if (wc.status == CollectionStatus::published) {
        throw Error(Errc::collection_published, "collection " + label_str(label) + " is published");
    }
    require_word(db_->handle, word_id);
    insert_entry(db_->handle, label, static_cast<int>(wc.entries.size() + 1), word_id);
    tx.commit();
    return load_collection(db_->handle, label);
}

WordCollection Corpus::publish_collection(char label) {
    std::unique_lock lock(*mutex_);
    Transaction tx(db_->handle);
    auto wc = load_collection(db_->handle, label);
    if (wc.status == CollectionStatus::published) {
        throw Error(Errc::collection_published, "collection " + label_str(label) + " is published");
    }
    const auto n = static_cast<int>(wc.entries.size());
    if (n < kMinPublishedWords || n > kMaxPublishedWords) {
        throw Error(Errc::size_out_of_range,
                    "collection " + label_str(label) + " has " + std::to_string(n) +
                        " words; publishing requires 10..15",
                    {{"size", n}, {"min", kMinPublishedWords}, {"max", kMaxPublishedWords}});
    }
    Statement s(db_->handle, "UPDATE collections SET status = 'published' WHERE label = ?1");
    s.bind(1, label_str(label)).step();
    tx.commit();
    wc.status = CollectionStatus::published;
    return wc;
}

WordCollection Corpus::get_collection(char label) const {
    std::shared_lock lock(*mutex_);
    return load_collection(db_->handle, label);
}

std::vector<WordCollection> Corpus::list_collections() const {
    std::shared_lock lock(*mutex_);
    std::vector<char> labels;
    {
        Statement s(db_->handle, "SELECT label FROM collections ORDER BY label");
        while (s.step()) labels.push_back(s.text(0).at(0));
    }
    std::vector<WordCollection> out;
    for (char l : labels) out.push_back(load_collection(db_->handle, l));
    return out;
}

void Corpus::delete_collection(char label) {
    std::unique_lock lock(*mutex_);
    Transaction tx(db_->handle);
    (void)load_collection(db_->handle, label);
    for (const char* q : {"DELETE FROM collection_entries WHERE label = ?1",
                          "DELETE FROM collections WHERE label = ?1"}) {
        Statement s(db_->handle, q);
        s.bind(1, label_str(label));
        const int rc = s.try_step();
        if (is_constraint(rc)) {
            throw Error(Errc::entity_referenced,
                        "collection " + label_str(label) + " has sessions or records");
        }
        if (rc != SQLITE_DONE) sql::fail(db_->handle, "delete collection");
    }
    tx.commit();
}

// ----------------------------------------------------------------- lexicon

std::size_t Corpus::import_lexicon(const std::vector<LexiconEntry>& entries,
                                   const std::vector<int>& lines) {
    std::unique_lock lock(*mutex_);
    Transaction tx(db_->handle);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const int line = i < lines.size() ? lines[i] : static_cast<int>(i + 1);
        {
            Statement dup(db_->handle, "SELECT 1 FROM lexicon WHERE orthography = ?1");
            dup.bind(1, e.orthography);
            if (dup.step()) {
                throw Error(Errc::duplicate_orthography,
                            "line " + std::to_string(line) + ": '" + e.orthography +
                                "' is already in the lexicon",
                            {{"line", line}, {"word", e.orthography}});
            }
        }
        Statement s(db_->handle,
                    "INSERT INTO lexicon(orthography, frequency_rank, ipa) VALUES (?1, ?2, ?3)");
        s.bind(1, e.orthography).bind(2, e.frequency_rank).bind(3, e.ipa);
        const int rc = s.try_step();
        if (is_constraint(rc)) {
            throw Error(Errc::malformed_csv,
                        "line " + std::to_string(line) + ": frequency_rank " +
                            std::to_string(e.frequency_rank) + " is already in the lexicon",
                        {{"line", line}});
        }
        if (rc != SQLITE_DONE) sql::fail(db_->handle, "insert lexicon entry");
    }
    tx.commit();
    return entries.size();
}

std::vector<LexiconEntry> Corpus::lexicon() const {
    std::vector<std::pair<std::string, int>> rows;
    {
        std::shared_lock lock(*mutex_);
        Statement s(db_->handle, "SELECT orthography, frequency_rank FROM lexicon ORDER BY frequency_rank");
        while (s.step()) rows.emplace_back(s.text(0), s.integer(1));
    }
    std::vector<LexiconEntry> out;
    out.reserve(rows.size());
    for (auto& [orth, rank] : rows) out.push_back(make_lexicon_entry(orth, rank));
    return out;
}

// ---------------------------------------------------------------- sessions

void Corpus::insert_session(const SessionRow& row) {
    std::unique_lock lock(*mutex_);
    Statement s(db_->handle,
                "INSERT INTO sessions(session_id, speaker_id, collection_label, local_day, "
                "started_at_ms) VALUES (?1,?2,?3,?4,?5)");
    s.bind(1, row.session_id)
        .bind(2, row.speaker_id)
        .bind(3, label_str(row.collection_label))
        .bind(4, format_date(row.local_day))
        .bind(5, row.started_at_ms);
    const int rc = s.try_step();
    if (rc == SQLITE_CONSTRAINT_UNIQUE) {
        throw Error(Errc::daily_session_exists,
                    "speaker already has a session on " + format_date(row.local_day),
                    {{"speaker_id", row.speaker_id}, {"day", format_date(row.local_day)}});
    }
    if (rc == SQLITE_CONSTRAINT_FOREIGNKEY) {
        throw Error(Errc::speaker_not_found, "session references unknown speaker or collection");
    }
    if (rc != SQLITE_DONE) sql::fail(db_->handle, "insert session");
}

std::optional<SessionRow> Corpus::find_session(const std::string& id) const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                "SELECT session_id, speaker_id, collection_label, local_day, started_at_ms "
                "FROM sessions WHERE session_id = ?1");
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_session(s);
}

std::vector<SessionRow> Corpus::list_sessions() const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                "SELECT session_id, speaker_id, collection_label, local_day, started_at_ms "
                "FROM sessions ORDER BY started_at_ms, session_id");
    std::vector<SessionRow> out;
    while (s.step()) out.push_back(read_session(s));
    return out;
}

// ----------------------------------------------------------------- records

RecordingRecord Corpus::register_record(const RecordDraft& draft, std::string_view raw_bytes,
                                        const AudioClip& cleaned) {
    if (!cleaned.is_canonical()) {
        throw Error(Errc::non_conforming_audio,
                    "cleaned audio must be 16000 Hz mono 16-bit; got " +
                        std::to_string(cleaned.sample_rate) + " Hz, " +
                        std::to_string(cleaned.channels) + " ch, " +
                        std::to_string(cleaned.bit_depth) + " bit",
                    {{"sample_rate", cleaned.sample_rate},
                     {"channels", cleaned.channels},
                     {"bit_depth", cleaned.bit_depth}});
    }
    if (cleaned.samples.empty()) throw Error(Errc::non_conforming_audio, "cleaned audio is empty");

    std::unique_lock lock(*mutex_);
    sqlite3* db = db_->handle;

    Speaker speaker;
    {
        Statement s(db, std::string("SELECT ") + kSpeakerColumns +
                            " FROM speakers WHERE speaker_id = ?1");
        s.bind(1, draft.speaker_id);
        if (!s.step()) {
            throw Error(Errc::speaker_not_found, "no speaker " + draft.speaker_id);
        }
        speaker = read_speaker(s);
    }
    const auto collection = load_collection(db, draft.collection_label);
    const bool has_entry =
        std::any_of(collection.entries.begin(), collection.entries.end(),
                    [&](const CollectionEntry& e) { return e.word_order == draft.word_order; });
    if (!has_entry) {
        throw Error(Errc::invalid_collection,
                    "collection " + label_str(draft.collection_label) + " has no word " +
                        std::to_string(draft.word_order));
    }

    RecordingRecord r;
    r.record_id = random_id("rec_");
    r.speaker_id = speaker.speaker_id;
    r.collection_label = draft.collection_label;
    r.word_order = draft.word_order;
    r.filename = encode_filename({speaker.sex, speaker.speaker_tag, speaker.age_at(draft.recorded_on),
                                  draft.collection_label, draft.word_order});
    r.place_of_recording = draft.context.place_of_recording;
    r.equipment = draft.context.equipment;
    r.emotional_state = draft.context.emotional_state;
    r.session_id = draft.session_id;
    r.recorded_on = draft.recorded_on;
    r.audio_facts = cleaned.facts();
    r.processing_stage = ProcessingStage::cleaned;

    {
        Statement dup(db, "SELECT record_id FROM records WHERE filename = ?1 OR "
                          "(session_id = ?2 AND word_order = ?3)");
        dup.bind(1, r.filename).bind(2, r.session_id).bind(3, r.word_order);
        if (dup.step()) {
            throw Error(Errc::duplicate_record,
                        "a record named " + r.filename + " (or for this session and word) exists",
                        {{"filename", r.filename}, {"record_id", dup.text(0)}});
        }
    }

    const fs::path raw_path = paths_.raw_dir() / r.filename;
    const fs::path clean_path = paths_.clean_dir() / r.filename;
    auto remove_files = [&] {
        std::error_code ec;
        fs::remove(raw_path, ec);
        fs::remove(clean_path, ec);
    };
    try {
        write_file_durable(raw_path, raw_bytes);
        write_file_durable(clean_path, write_wav_string(cleaned));

        Transaction tx(db);
        Statement s(db, std::string("INSERT INTO records(") + kRecordColumns +
                            ") VALUES (?1,?2,?3,?4,?5,?6,?7,?8,?9,?10,?11,?12,?13,?14,?15)");
        s.bind(1, r.record_id)
            .bind(2, r.speaker_id)
            .bind(3, label_str(r.collection_label))
            .bind(4, r.word_order)
            .bind(5, r.filename)
            .bind(6, r.place_of_recording)
            .bind(7, r.equipment)
            .bind(8, to_string(r.emotional_state))
            .bind(9, r.session_id)
            .bind(10, format_date(r.recorded_on))
            .bind(11, r.audio_facts.sample_rate)
            .bind(12, r.audio_facts.channels)
            .bind(13, r.audio_facts.bit_depth)
            .bind(14, r.audio_facts.duration_seconds)
            .bind(15, to_string(r.processing_stage));
        const int rc = s.try_step();
        if (rc == SQLITE_CONSTRAINT_FOREIGNKEY) {
            throw Error(Errc::session_not_found, "record references an unknown session");
        }
        if (rc != SQLITE_DONE) sql::fail(db, "insert record");
        tx.commit();
    } catch (...) {
        remove_files();
        throw;
    }
    return r;
}

RecordingRecord Corpus::get_record(const std::string& id) const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                std::string("SELECT ") + kRecordColumns + " FROM records WHERE record_id = ?1");
    s.bind(1, id);
    if (!s.step()) throw Error(Errc::record_not_found, "no record " + id, {{"record_id", id}});
    return read_record(s);
}

std::vector<RecordingRecord> Corpus::list_records() const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle,
                std::string("SELECT ") + kRecordColumns + " FROM records ORDER BY filename");
    std::vector<RecordingRecord> out;
    while (s.step()) out.push_back(read_record(s));
    return out;
}

std::size_t Corpus::record_count() const {
    std::shared_lock lock(*mutex_);
    Statement s(db_->handle, "SELECT COUNT(*) FROM records");
    s.step();
    return static_cast<std::size_t>(s.int64(0));
}

RecordingRecord Corpus::replace_clean_audio(const std::string& record_id, const AudioClip& cleaned) {
    if (!cleaned.is_canonical()) {
        throw Error(Errc::non_conforming_audio, "cleaned audio must be 16000 Hz mono 16-bit");
    }
    auto r = get_record(record_id);
    std::unique_lock lock(*mutex_);
    write_file_durable(paths_.clean_dir() / r.filename, write_wav_string(cleaned));
    r.audio_facts = cleaned.facts();
    r.processing_stage = ProcessingStage::cleaned;
    Statement s(db_->handle,
                "UPDATE records SET sample_rate = ?2, channels = ?3, bit_depth = ?4, "
                "duration_seconds = ?5, processing_stage = ?6 WHERE record_id = ?1");
    s.bind(1, r.record_id)
        .bind(2, r.audio_facts.sample_rate)
        .bind(3, r.audio_facts.channels)
        .bind(4, r.audio_facts.bit_depth)
        .bind(5, r.audio_facts.duration_seconds)
        .bind(6, to_string(r.processing_stage));
    s.step();
    return r;
}

std::string Corpus::expected_filename(const RecordingRecord& r) const {
    const Speaker sp = get_speaker(r.speaker_id);
    return encode_filename(
        {sp.sex, sp.speaker_tag, sp.age_at(r.recorded_on), r.collection_label, r.word_order});
}

}  // namespace kidcorpus
