#include "kidcorpus/lexicon.hpp"

#include "kidcorpus/error.hpp"
#include "kidcorpus/fsutil.hpp"
#include "kidcorpus/naming.hpp"

namespace kidcorpus {

std::size_t import_lexicon_csv(Corpus& corpus, std::string_view csv_text) {
    std::vector<int> lines;
    const auto entries = parse_lexicon_csv(csv_text, RuleTable::builtin(), &lines);
    return corpus.import_lexicon(entries, lines);
}

BuiltCollection build_collection(Corpus& corpus, char label, const std::string& theme, int k) {
    if (!is_valid_collection_label(label)) {
        throw Error(Errc::invalid_collection, std::string("bad collection label '") + label + "'");
    }
    const auto lexicon = corpus.lexicon();
    if (lexicon.empty()) throw Error(Errc::empty_lexicon, "the lexicon is empty; import one first");
    for (const auto& c : corpus.list_collections()) {
        if (c.label == label) {
            throw Error(Errc::duplicate_label, std::string("collection ") + label + " already exists",
                        {{"label", std::string(1, label)}});
        }
    }

    const auto chosen = select_words(lexicon, k, bulgarian_inventory());
    std::vector<std::string> word_ids;
    std::vector<std::string> orthographies;
    for (const auto& entry : chosen) {
        auto existing = corpus.find_word_by_orthography(entry.orthography);
        word_ids.push_back(existing ? existing->word_id : corpus.add_word(entry.orthography).word_id);
        orthographies.push_back(entry.orthography);
    }

    BuiltCollection out;
    out.collection = corpus.create_collection(label, theme, word_ids);
    const auto n = static_cast<int>(word_ids.size());
    if (n >= kMinPublishedWords && n <= kMaxPublishedWords) {
        out.collection = corpus.publish_collection(label);
        out.published = true;
    }
    out.report = coverage(orthographies, bulgarian_inventory());
    return out;
}

ReprocessResult reprocess_audio(Corpus& corpus, const CleanupConfig& config) {
    ReprocessResult out;
    for (const auto& r : corpus.list_records()) {
        try {
            const auto raw = read_file(corpus.paths().raw_dir() / r.filename);
            const auto cleaned = cleanup_pipeline(resample_to_16k(parse_wav(raw)), config);
            corpus.replace_clean_audio(r.record_id, cleaned.clip);
            ++out.processed;
        } catch (const Error& e) {
            out.failures.emplace_back(r.filename, std::string(e.code_name()) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace kidcorpus
