// kidcorpus-serve: HTTP API over a corpus root.

#include "kidcorpus/service.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>
#include <pthread.h>
#include <thread>

namespace kc = kidcorpus;

int main(int argc, char** argv) {
    CLI::App app{"Children's speech corpus service"};
    std::string root;
    kc::ServiceConfig cfg;
    double max_upload_mb = static_cast<double>(kc::kDefaultMaxUpload) / (1024 * 1024);
    app.add_option("--corpus", root)->envname("CORPUS_ROOT")->required();
    app.add_option("--host", cfg.host)->default_val(cfg.host);
    app.add_option("--port", cfg.port)->default_val(cfg.port);
    app.add_option("--timezone", cfg.timezone, "UTC, local, +HH:MM or an IANA name")->default_val(cfg.timezone);
    app.add_option("--max-upload-mb", max_upload_mb)->default_val(max_upload_mb);
    app.add_option("--static-dir", cfg.static_dir, "serve a built UI from here");
    app.add_option("--budget-seconds", cfg.session.budget_seconds)->default_val(cfg.session.budget_seconds);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    cfg.max_upload_bytes = static_cast<std::size_t>(max_upload_mb * 1024 * 1024);

    // SIGINT/SIGTERM go to a waiter thread so shutdown runs outside signal context
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    try {
        kc::Service service(root, cfg);
        const int port = service.bind();
        std::cerr << "listening on http://" << cfg.host << ":" << port << "\n";
        std::atomic<bool> signalled{false};
        std::thread waiter([&] {
            int sig = 0;
            sigwait(&signals, &sig);
            signalled = true;
            std::cerr << "shutting down\n";
            service.stop();
        });
        service.run();
        if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
    } catch (const kc::Error& e) {
        std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
        return e.code() == kc::Errc::port_in_use ? 4 : 3;
    }
    return 0;
}
