#include "kidcorpus/validate.hpp"

#include "kidcorpus/error.hpp"
#include "kidcorpus/fsutil.hpp"
#include "kidcorpus/g2p.hpp"
#include "kidcorpus/naming.hpp"

#include <algorithm>
#include <set>

namespace kidcorpus {

namespace fs = std::filesystem;

namespace {

void check_files(const Corpus& corpus, const RecordingRecord& r, std::vector<Finding>& out) {
    const fs::path clean = corpus.paths().clean_dir() / r.filename;
    const fs::path raw = corpus.paths().raw_dir() / r.filename;
    if (!fs::exists(raw)) {
        out.push_back({"filename mismatch", r.filename, "raw file audio/raw/" + r.filename + " is missing"});
    }
    if (!fs::exists(clean)) {
        out.push_back({"filename mismatch", r.filename,
                       "clean file audio/clean/" + r.filename + " is missing"});
        return;
    }
    AudioClip clip;
    try {
        clip = parse_wav(read_file(clean));
    } catch (const Error& e) {
        out.push_back({"wav non-conforming", r.filename,
                       std::string(e.code_name()) + ": " + e.what()});
        return;
    }
    const AudioFacts facts = clip.facts();
    if (r.processing_stage == ProcessingStage::cleaned && !facts.is_canonical()) {
        out.push_back({"wav non-conforming", r.filename,
                       "clean file is " + std::to_string(facts.sample_rate) + " Hz, " +
                           std::to_string(facts.channels) + " ch, " +
                           std::to_string(facts.bit_depth) + " bit"});
    }
    if (!(facts == r.audio_facts)) {
        out.push_back({"audio facts mismatch", r.filename,
                       "stored facts differ from the file on disk"});
    }
}

void check_references(const Corpus& corpus, const RecordingRecord& r, std::vector<Finding>& out) {
    try {
        corpus.get_speaker(r.speaker_id);
    } catch (const Error&) {
        out.push_back({"referential integrity", r.filename, "speaker " + r.speaker_id + " is missing"});
        return;
    }
    try {
        const auto coll = corpus.get_collection(r.collection_label);
        const bool has_entry = std::any_of(coll.entries.begin(), coll.entries.end(),
                                           [&](const auto& e) { return e.word_order == r.word_order; });
        if (!has_entry) {
            out.push_back({"referential integrity", r.filename,
                           std::string("collection ") + r.collection_label + " has no word " +
                               std::to_string(r.word_order)});
            return;
        }
    } catch (const Error&) {
        out.push_back({"referential integrity", r.filename,
                       std::string("collection ") + r.collection_label + " is missing"});
        return;
    }
    try {
        const std::string expected = corpus.expected_filename(r);
        if (expected != r.filename) {
            out.push_back({"filename mismatch", r.filename, "fields encode to " + expected});
        }
    } catch (const Error& e) {
        out.push_back({"filename mismatch", r.filename, e.what()});
    }
}

void check_orphans(const fs::path& dir, const std::string& prefix, const std::set<std::string>& known,
                   std::vector<Finding>& out) {
    if (!fs::is_directory(dir)) return;
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (!known.count(name)) names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
        std::string message = "no record owns this file";
        try {
            decode_filename(name);
        } catch (const Error&) {
            message = "not a corpus filename";
        }
        out.push_back({"orphan file", prefix + name, message});
    }
}

}  // namespace

std::vector<Finding> validate_corpus(const Corpus& corpus) {
    std::vector<Finding> out;
    std::set<std::string> known;
    for (const auto& r : corpus.list_records()) {
        known.insert(r.filename);
        check_references(corpus, r, out);
        check_files(corpus, r, out);
    }
    check_orphans(corpus.paths().clean_dir(), "audio/clean/", known, out);
    check_orphans(corpus.paths().raw_dir(), "audio/raw/", known, out);

    for (const auto& w : corpus.list_words()) {
        if (w.ipa_override) continue;
        std::string expected;
        try {
            expected = transcribe(w.orthography);
        } catch (const Error& e) {
            out.push_back({"ipa drift", w.word_id, std::string("orthography no longer transcribes: ") + e.what()});
            continue;
        }
        if (expected != w.ipa) {
            out.push_back({"ipa drift", w.word_id,
                           "'" + w.orthography + "' stored as /" + w.ipa + "/, rules give /" +
                               expected + "/"});
        }
    }
    return out;
}

nlohmann::json to_json(const Finding& f) {
    return {{"kind", f.kind}, {"subject", f.subject}, {"message", f.message}};
}

std::string format_finding(const Finding& f) {
    return f.kind + "\t" + f.subject + "\t" + f.message;
}

}  // namespace kidcorpus
