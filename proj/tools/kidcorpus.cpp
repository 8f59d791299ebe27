// kidcorpus: batch administration of a corpus root.
//
// Exit codes: 0 ok, 1 validation findings (or a collection left as draft),
// 2 usage error, 3 I/O or corpus error.

#include "kidcorpus/corpus.hpp"
#include "kidcorpus/error.hpp"
#include "kidcorpus/fsutil.hpp"
#include "kidcorpus/g2p.hpp"
#include "kidcorpus/json_io.hpp"
#include "kidcorpus/lexicon.hpp"
#include "kidcorpus/manifest.hpp"
#include "kidcorpus/stats.hpp"
#include "kidcorpus/validate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

namespace kc = kidcorpus;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { ok = 0, findings = 1, usage = 2, failure = 3 };

struct Globals {
    std::string corpus;
    bool json = false;
    bool include_pii = false;
};

int exit_for(const kc::Error& e) {
    switch (e.code()) {
        case kc::Errc::bad_request:
        case kc::Errc::invalid_fields:
        case kc::Errc::non_cyrillic_input:
        case kc::Errc::empty_orthography:
            return usage;
        default:
            return failure;
    }
}

void report_error(const Globals& g, const kc::Error& e) {
    if (g.json) {
        json body = {{"code", std::string(e.code_name())}, {"message", e.what()}};
        if (!e.details().is_null()) body["details"] = e.details();
        std::cerr << body.dump() << "\n";
    } else {
        std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
    }
}

fs::path root_of(const Globals& g) {
    if (g.corpus.empty()) {
        throw kc::Error(kc::Errc::bad_request, "no corpus root: pass --corpus or set CORPUS_ROOT");
    }
    return g.corpus;
}

/// Opens the corpus for a mutating command; fails while another process
/// (the service, usually) holds the lock.
struct Writable {
    kc::Corpus corpus;
    kc::CorpusLock lock;
    explicit Writable(const fs::path& root) : corpus(kc::Corpus::open(root)), lock(root) {}
};

void print_coverage(const kc::CoverageReport& r) {
    std::cout << "coverage " << r.covered.size() << "/" << (r.covered.size() + r.missing.size())
              << " (" << r.fraction << ")\n";
    for (const auto& [word, added] : r.per_word_contribution) {
        std::cout << "  " << word << " +";
        for (const auto& p : added) std::cout << " " << p;
        std::cout << "\n";
    }
    if (!r.missing.empty()) {
        std::cout << "missing:";
        for (const auto& p : r.missing) std::cout << " " << p;
        std::cout << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Children's speech corpus administration"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--corpus", g.corpus, "Corpus root directory")->envname("CORPUS_ROOT");
    app.add_flag("--json", g.json, "Machine-readable output");
    app.add_flag("--include-pii", g.include_pii, "Include full_name and address in exports");

    auto* init = app.add_subcommand("init", "Create an empty corpus");

    std::string csv_path;
    auto* import = app.add_subcommand("import-lexicon", "Import an orthography,frequency_rank CSV");
    import->add_option("csv", csv_path)->required();

    kc::Speaker sp;
    std::string sex_text, dob_text, enrolled_text, kindergarten;
    std::vector<std::string> courses;
    auto* add_speaker = app.add_subcommand("add-speaker", "Enroll a child");
    add_speaker->add_option("--tag", sp.speaker_tag)->required();
    add_speaker->add_option("--name", sp.full_name)->required();
    add_speaker->add_option("--sex", sex_text)->required()->check(CLI::IsMember({"boy", "girl"}));
    add_speaker->add_option("--born", dob_text, "YYYY-MM-DD")->required();
    add_speaker->add_option("--enrolled", enrolled_text, "YYYY-MM-DD")->required();
    add_speaker->add_option("--address", sp.address);
    add_speaker->add_option("--children", sp.children_in_family)->default_val(1);
    add_speaker->add_option("--birth-order", sp.birth_order)->default_val(1);
    add_speaker->add_option("--kindergarten", kindergarten);
    add_speaker->add_option("--course", courses, "speech_therapy, singing, music_lessons, other");
    add_speaker->add_option("--notes", sp.development_notes);
    add_speaker->add_option("--diseases", sp.diseases);
    add_speaker->add_flag("--age-override", sp.age_override);

    std::string orthography, image_ref, sound_ref, ipa_override;
    auto* add_word = app.add_subcommand("add-word", "Add a word with its automatic transcription");
    add_word->add_option("orthography", orthography)->required();
    add_word->add_option("--image", image_ref, "media asset id");
    add_word->add_option("--sound", sound_ref, "media asset id");
    add_word->add_option("--ipa", ipa_override, "manual transcription (sets the override flag)");

    std::string label_text, theme;
    int k = kc::kDefaultCollectionSize;
    auto* build = app.add_subcommand("build-collection", "Select words for phoneme coverage");
    build->add_option("--label", label_text)->required();
    build->add_option("--theme", theme)->required();
    build->add_option("-k", k, "maximum number of words")->default_val(kc::kDefaultCollectionSize)
        ->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "Re-check every record and word");

    std::vector<std::string> words;
    std::string rules_path;
    auto* transcribe = app.add_subcommand("transcribe", "Print IPA for words");
    transcribe->add_option("words", words)->required();
    transcribe->add_option("--rules", rules_path, "rule table file (default: built in)");

    auto* stats = app.add_subcommand("stats", "Coverage and speaker statistics");

    std::string format = "csv", output;
    auto* exp = app.add_subcommand("export-manifest", "Write the record manifest");
    exp->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    exp->add_option("-o,--output", output, "file (default: stdout)");

    auto* process = app.add_subcommand("process-audio", "Re-run cleanup over raw files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (init->parsed()) {
            const fs::path root = root_of(g);
            if (fs::exists(root) && kc::CorpusLock::holder(root) != 0) {
                throw kc::Error(kc::Errc::corpus_locked, "corpus is locked by another process");
            }
            const bool created = kc::Corpus::init(root);
            if (g.json) {
                std::cout << json{{"root", root.string()}, {"created", created}}.dump() << "\n";
            } else {
                std::cout << (created ? "initialized " : "already initialized ") << root.string() << "\n";
            }
            return ok;
        }

        if (transcribe->parsed()) {
            const kc::RuleTable table =
                rules_path.empty() ? kc::RuleTable::builtin() : kc::RuleTable::load(rules_path);
            json out = json::array();
            for (const auto& w : words) {
                const std::string ipa = table.transcribe(w);
                if (g.json) {
                    out.push_back({{"orthography", w}, {"ipa", ipa}});
                } else {
                    std::cout << w << "\t" << ipa << "\n";
                }
            }
            if (g.json) std::cout << out.dump() << "\n";
            return ok;
        }

        const fs::path root = root_of(g);

        if (import->parsed()) {
            Writable w(root);
            const auto n = kc::import_lexicon_csv(w.corpus, kc::read_file(csv_path));
            if (g.json) {
                std::cout << json{{"imported", n}}.dump() << "\n";
            } else {
                std::cout << n << " imported\n";
            }
            return ok;
        }

        if (add_speaker->parsed()) {
            Writable w(root);
            sp.sex = kc::sex_from_string(sex_text);
            sp.date_of_birth = kc::parse_date(dob_text);
            sp.enrollment_date = kc::parse_date(enrolled_text);
            if (!kindergarten.empty()) {
                sp.attends_kindergarten = true;
                sp.kindergarten_name = kindergarten;
            }
            for (const auto& c : courses) sp.extra_courses.insert(kc::extra_course_from_string(c));
            const kc::Speaker created = w.corpus.create_speaker(sp);
            if (g.json) {
                std::cout << kc::to_json(created, g.include_pii).dump() << "\n";
            } else {
                std::cout << created.speaker_id << "\t" << created.speaker_tag << "\n";
            }
            return ok;
        }

        if (add_word->parsed()) {
            Writable w(root);
            auto opt = [](const std::string& s) {
                return s.empty() ? std::nullopt : std::optional<std::string>(s);
            };
            kc::Word word = w.corpus.add_word(orthography, opt(image_ref), opt(sound_ref));
            if (!ipa_override.empty()) word = w.corpus.override_ipa(word.word_id, ipa_override);
            if (g.json) {
                std::cout << kc::to_json(word).dump() << "\n";
            } else {
                std::cout << word.word_id << "\t" << word.orthography << "\t" << word.ipa << "\n";
            }
            return ok;
        }

        if (build->parsed()) {
            if (label_text.size() != 1) {
                throw kc::Error(kc::Errc::bad_request, "--label must be one uppercase letter");
            }
            Writable w(root);
            const auto built = kc::build_collection(w.corpus, label_text[0], theme, k);
            const auto n = built.collection.entries.size();
            if (g.json) {
                json out = kc::to_json(built.collection);
                out["coverage"] = kc::to_json(built.report);
                std::cout << out.dump() << "\n";
            } else {
                std::cout << "collection " << built.collection.label << " (" << n << " words, "
                          << kc::to_string(built.collection.status) << ")\n";
                print_coverage(built.report);
            }
            if (!built.published) {
                std::cerr << "warning: selection has " << n << " words; publishing needs "
                          << kc::kMinPublishedWords << ".." << kc::kMaxPublishedWords
                          << ", saved as draft\n";
                return findings;
            }
            return ok;
        }

        if (process->parsed()) {
            Writable w(root);
            const auto r = kc::reprocess_audio(w.corpus);
            if (g.json) {
                json fails = json::array();
                for (const auto& [name, msg] : r.failures) fails.push_back({{"filename", name}, {"message", msg}});
                std::cout << json{{"processed", r.processed}, {"failures", fails}}.dump() << "\n";
            } else {
                std::cout << r.processed << " processed\n";
                for (const auto& [name, msg] : r.failures) std::cout << "failed\t" << name << "\t" << msg << "\n";
            }
            return r.failures.empty() ? ok : failure;
        }

        const kc::Corpus corpus = kc::Corpus::open(root);

        if (validate->parsed()) {
            const auto found = kc::validate_corpus(corpus);
            if (g.json) {
                json out = json::array();
                for (const auto& f : found) out.push_back(kc::to_json(f));
                std::cout << json{{"findings", out}, {"count", found.size()}}.dump() << "\n";
            } else {
                for (const auto& f : found) std::cout << kc::format_finding(f) << "\n";
                std::cout << found.size() << " findings\n";
            }
            return found.empty() ? ok : findings;
        }

        if (stats->parsed()) {
            const auto st = kc::corpus_stats(corpus);
            if (g.json) {
                std::cout << kc::to_json(st).dump() << "\n";
            } else {
                std::cout << "speakers " << st.speaker_count << "\nrecords " << st.record_count << "\n";
                for (const auto& c : st.collections) {
                    std::cout << "collection " << c.label << " " << kc::to_string(c.status) << " words "
                              << c.word_count << " records " << c.record_count << " coverage "
                              << c.coverage.fraction << "\n";
                }
                std::cout << "whole-corpus coverage " << st.whole.fraction << "\n";
                for (const auto& [tag, n] : st.records_per_speaker) std::cout << "speaker " << tag << " " << n << "\n";
            }
            return ok;
        }

        if (exp->parsed()) {
            const std::string text = format == "json" ? kc::export_manifest_json(corpus, g.include_pii)
                                                      : kc::export_manifest_csv(corpus, g.include_pii);
            if (output.empty()) {
                std::cout << text;
            } else {
                kc::write_file_durable(output, text);
            }
            return ok;
        }
    } catch (const kc::Error& e) {
        report_error(g, e);
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return usage;
}
