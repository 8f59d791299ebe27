#include "kidcorpus/fsutil.hpp"

#include "kidcorpus/error.hpp"

#include <openssl/evp.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

namespace kidcorpus {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_fail(const std::string& what, const fs::path& p) {
    throw Error(Errc::io_error, what + " " + p.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const char* data, std::size_t size, const fs::path& p) {
    while (size > 0) {
        const ssize_t n = ::write(fd, data, size);
        if (n < 0) {
            if (errno == EINTR) continue;
            io_fail("write", p);
        }
        data += n;
        size -= static_cast<std::size_t>(n);
    }
}

void fsync_dir(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

bool pid_alive(int pid) { return pid > 0 && (::kill(pid, 0) == 0 || errno == EPERM); }

int read_pid(const fs::path& p) {
    std::ifstream in(p);
    int pid = 0;
    in >> pid;
    return pid;
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_durable(const fs::path& path, std::string_view bytes) {
    const fs::path tmp = path.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) io_fail("open", tmp);
    try {
        write_all(fd, bytes.data(), bytes.size(), tmp);
        if (::fsync(fd) != 0) io_fail("fsync", tmp);
    } catch (...) {
        ::close(fd);
        ::unlink(tmp.c_str());
        throw;
    }
    ::close(fd);
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        ::unlink(tmp.c_str());
        io_fail("rename", path);
    }
    fsync_dir(path.parent_path());
}

void write_file_durable(const fs::path& path, std::span<const std::uint8_t> bytes) {
    write_file_durable(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void append_line_durable(const fs::path& path, std::string_view line) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) io_fail("open", path);
    std::string buf(line);
    buf += '\n';
    try {
        write_all(fd, buf.data(), buf.size(), path);
        if (::fsync(fd) != 0) io_fail("fsync", path);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::io_error, "sha-256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string random_id(std::string_view prefix) {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    static constexpr char hex[] = "0123456789abcdef";
    std::uint64_t v = rng();
    std::string out(prefix);
    for (int i = 0; i < 16; ++i) {
        out += hex[v & 0xF];
        v >>= 4;
    }
    return out;
}

CorpusLock::CorpusLock(const fs::path& root) : path_(root / "corpus.lock") {
    for (int attempt = 0; attempt < 2; ++attempt) {
        const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
        if (fd >= 0) {
            const std::string pid = std::to_string(::getpid()) + "\n";
            write_all(fd, pid.data(), pid.size(), path_);
            ::fsync(fd);
            ::close(fd);
            return;
        }
        if (errno != EEXIST) io_fail("create lock", path_);
        const int owner = read_pid(path_);
        if (pid_alive(owner)) {
            throw Error(Errc::corpus_locked,
                        "corpus is locked by process " + std::to_string(owner), {{"pid", owner}});
        }
        ::unlink(path_.c_str());  // stale
    }
    throw Error(Errc::corpus_locked, "could not acquire corpus lock");
}

CorpusLock::~CorpusLock() {
    if (read_pid(path_) == ::getpid()) ::unlink(path_.c_str());
}

int CorpusLock::holder(const fs::path& root) {
    const fs::path p = root / "corpus.lock";
    if (!fs::exists(p)) return 0;
    const int pid = read_pid(p);
    return pid_alive(pid) ? pid : 0;
}

}  // namespace kidcorpus
