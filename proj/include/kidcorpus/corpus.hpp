#pragma once

#include "kidcorpus/audio.hpp"
#include "kidcorpus/coverage.hpp"
#include "kidcorpus/model.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

struct sqlite3;

namespace kidcorpus {

inline constexpr int kSchemaVersion = 1;

/// <root>/corpus.db, <root>/media/<asset_id>, <root>/audio/{raw,clean}/<filename>,
/// <root>/sessions/<session_id>.log
struct CorpusPaths {
    std::filesystem::path root;

    std::filesystem::path db() const { return root / "corpus.db"; }
    std::filesystem::path media_dir() const { return root / "media"; }
    std::filesystem::path raw_dir() const { return root / "audio" / "raw"; }
    std::filesystem::path clean_dir() const { return root / "audio" / "clean"; }
    std::filesystem::path sessions_dir() const { return root / "sessions"; }
};

struct RecordDraft {
    std::string session_id;
    std::string speaker_id;
    char collection_label = 'A';
    int word_order = 0;
    Date recorded_on{};
    RecordingContext context;
};

/// Row of the sessions table; the event log carries the full history.
struct SessionRow {
    std::string session_id;
    std::string speaker_id;
    char collection_label = 'A';
    Date local_day{};
    std::int64_t started_at_ms = 0;
};

/// Persistent corpus: an embedded SQLite store plus the media and audio trees.
///
/// Mutations are serialized through one writer lock; reads share it and only
/// observe committed state. All returned entities are value snapshots.
class Corpus {
public:
    /// Creates the directory layout and an empty store. Returns false when
    /// the root already holds a corpus.
    static bool init(const std::filesystem::path& root);

    /// Throws corpus_not_found when the root is missing and
    /// corpus_not_initialized when it has no store.
    static Corpus open(const std::filesystem::path& root);

    Corpus(Corpus&&) noexcept;
    Corpus& operator=(Corpus&&) noexcept;
    ~Corpus();

    const CorpusPaths& paths() const noexcept { return paths_; }
    int schema_version() const;

    // speakers
    Speaker create_speaker(Speaker draft);
    Speaker get_speaker(const std::string& speaker_id) const;
    std::optional<Speaker> find_speaker_by_tag(const std::string& tag) const;
    std::vector<Speaker> list_speakers() const;
    void delete_speaker(const std::string& speaker_id);

    // media
    MediaAsset add_media(MediaKind kind, std::string_view bytes, std::string display_name,
                         std::string content_type = {});
    MediaAsset get_media(const std::string& asset_id) const;
    std::vector<MediaAsset> list_media() const;
    void delete_media(const std::string& asset_id);

    // words
    Word add_word(const std::string& orthography, std::optional<std::string> image_ref = {},
                  std::optional<std::string> sound_ref = {});
    Word override_ipa(const std::string& word_id, const std::string& ipa);
    Word get_word(const std::string& word_id) const;
    std::optional<Word> find_word_by_orthography(const std::string& orthography) const;
    std::vector<Word> list_words() const;
    void delete_word(const std::string& word_id);

    // collections
    WordCollection create_collection(char label, std::string theme,
                                     const std::vector<std::string>& word_ids);
    WordCollection append_to_collection(char label, const std::string& word_id);
    WordCollection publish_collection(char label);
    WordCollection get_collection(char label) const;
    std::vector<WordCollection> list_collections() const;
    void delete_collection(char label);

    // lexicon
    /// All-or-nothing; an orthography already in the store fails with
    /// duplicate_orthography carrying the entry's 1-based position as "line"
    /// unless `lines` supplies source line numbers.
    std::size_t import_lexicon(const std::vector<LexiconEntry>& entries,
                               const std::vector<int>& lines = {});
    std::vector<LexiconEntry> lexicon() const;

    // sessions
    /// Inserts the row; a second session for the same speaker and day fails
    /// with daily_session_exists.
    void insert_session(const SessionRow& row);
    std::optional<SessionRow> find_session(const std::string& session_id) const;
    std::vector<SessionRow> list_sessions() const;

    // records
    /// Computes the filename, writes raw bytes and the cleaned WAV, then
    /// commits the row; the files are removed again if the commit fails.
    RecordingRecord register_record(const RecordDraft& draft, std::string_view raw_bytes,
                                    const AudioClip& cleaned);
    RecordingRecord get_record(const std::string& record_id) const;
    std::vector<RecordingRecord> list_records() const;
    std::size_t record_count() const;
    /// Rewrites the cleaned file of an existing record and its audio facts.
    RecordingRecord replace_clean_audio(const std::string& record_id, const AudioClip& cleaned);

    /// encode_filename over the record's resolved speaker/collection fields.
    std::string expected_filename(const RecordingRecord& record) const;

private:
    explicit Corpus(CorpusPaths paths);

    struct Db;
    CorpusPaths paths_;
    std::unique_ptr<Db> db_;
    std::unique_ptr<std::shared_mutex> mutex_;
};

}  // namespace kidcorpus
