#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ttharness/config.hpp"

namespace ttharness {

/// HTTP front end over a run store: persona ingest, pseudo runs, live sessions with an
/// NDJSON frame stream, questionnaires, judgments and reports.
class Service {
public:
    explicit Service(HarnessConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds to `port` (0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void run();
    /// bind() plus run() on a background thread.
    int start(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ttharness
