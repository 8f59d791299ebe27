#pragma once

#include "kidcorpus/corpus.hpp"
#include "kidcorpus/error.hpp"
#include "kidcorpus/fsutil.hpp"
#include "kidcorpus/session.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace kidcorpus {

inline constexpr std::size_t kDefaultMaxUpload = 20u * 1024u * 1024u;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::string timezone = "UTC";
    std::size_t max_upload_bytes = kDefaultMaxUpload;
    std::filesystem::path static_dir;  // served at / when set
    SessionConfig session;
};

/// HTTP status for a module error.
int http_status(Errc code) noexcept;

/// JSON API over one corpus root. Holds the corpus lock for its lifetime.
class Service {
public:
    Service(const std::filesystem::path& root, ServiceConfig config,
            std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>());
    ~Service();

    /// Binds the listening socket; throws port_in_use. Returns the bound port.
    int bind();
    /// Serves until stop(). bind() is called first if needed.
    void run();
    void stop();
    int port() const noexcept { return port_; }

    Corpus& corpus() noexcept { return corpus_; }
    SessionEngine& engine() noexcept { return *engine_; }

private:
    void install_routes();

    Corpus corpus_;  // opened first so a missing root reports corpus_not_found
    CorpusLock lock_;
    ServiceConfig config_;
    std::unique_ptr<SessionEngine> engine_;
    std::unique_ptr<httplib::Server> server_;
    int port_ = 0;
    bool bound_ = false;
};

}  // namespace kidcorpus
