#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace kidcorpus {

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary file, fsync and rename; the file is either absent
/// or complete after a crash.
void write_file_durable(const std::filesystem::path& path, std::string_view bytes);
void write_file_durable(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Appends one line (a trailing '\n' is added) and fsyncs.
void append_line_durable(const std::filesystem::path& path, std::string_view line);

std::string sha256_hex(std::string_view bytes);

/// prefix + 16 random hex digits
std::string random_id(std::string_view prefix);

/// Advisory corpus lock: <root>/corpus.lock holding the owner's PID. A lock
/// whose PID is no longer alive is taken over.
class CorpusLock {
public:
    explicit CorpusLock(const std::filesystem::path& root);  // throws corpus_locked
    ~CorpusLock();
    CorpusLock(const CorpusLock&) = delete;
    CorpusLock& operator=(const CorpusLock&) = delete;

    /// PID of a live holder, or 0.
    static int holder(const std::filesystem::path& root);

private:
    std::filesystem::path path_;
};

}  // namespace kidcorpus
