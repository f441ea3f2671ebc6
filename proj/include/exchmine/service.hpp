#pragma once

#include <memory>
#include <string>

#include "exchmine/session.hpp"

namespace exchmine {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8765;           // 0 = pick a free port
    std::string session_path;  // mutations persist here
    std::string static_dir;    // optional UI files served from /
};

// Local HTTP API over one session. Single-writer: while a test job runs (or
// another mutation is in flight) every mutating request answers 409; reads
// reflect the last committed state. Mutations are persisted to the session
// file before the response returns.
//
//   GET  /api/session             session summary
//   POST /api/test                {model, seed?, samples?, w?} -> {job}
//   GET  /api/job/{id}            {status, progress} or {status, report}
//   POST /api/constraints         {add: [[labels]...], remove: [[labels]...]}
//   POST /api/iterate             {strategy: "smallest-p"} or
//                                 {strategy: "manual", itemset: [labels]}
class Service {
public:
    Service(SessionState session, ServiceOptions options);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Starts listening on a background thread; returns the bound port.
    int start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace exchmine
