#include "exchmine/service.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace exchmine {

using ordered_json = nlohmann::ordered_json;

namespace {

struct Job {
    int id = 0;
    std::atomic<bool> done{false};
    std::atomic<int> completed{0};
    int total = 1;
    SignificanceReport report;
    std::string error;
};

ordered_json session_summary(const SessionState& s) {
    ordered_json j;
    j["dataset"] = {{"path", s.dataset_path},
                    {"rows", s.dataset.rows()},
                    {"cols", s.dataset.cols()},
                    {"hash", s.dataset_hash}};
    ordered_json mined = ordered_json::array();
    for (size_t i = 0; i < s.mined.size(); ++i) {
        ordered_json items = ordered_json::array();
        for (int c : s.mined[i]) items.push_back(s.dataset.col_name(c));
        mined.push_back({{"items", items}, {"freq", s.mined.targets()[i]}});
    }
    j["mined"] = mined;
    ordered_json constraints = ordered_json::array();
    for (size_t i = 0; i < s.constraints.size(); ++i) {
        ordered_json items = ordered_json::array();
        for (int c : s.constraints[i]) items.push_back(s.dataset.col_name(c));
        constraints.push_back({{"items", items}, {"target", s.constraints.targets()[i]}});
    }
    j["constraints"] = constraints;
    ordered_json history = ordered_json::array();
    for (const auto& rec : s.history) {
        ordered_json r;
        r["iteration"] = rec.iteration;
        r["model"] = rec.model_kind;
        r["seed"] = rec.seed;
        r["significant_count"] = rec.significant_count;
        if (rec.chosen_constraint) {
            ordered_json items = ordered_json::array();
            for (int c : *rec.chosen_constraint) items.push_back(s.dataset.col_name(c));
            r["chosen"] = items;
        } else {
            r["chosen"] = nullptr;
        }
        history.push_back(std::move(r));
    }
    j["history"] = history;
    j["config"] = {{"samples", s.config.chain.samples},
                   {"seed", s.config.chain.seed},
                   {"alpha", s.config.alpha},
                   {"w", s.config.w},
                   {"fdr", s.config.adjust}};
    return j;
}

ordered_json report_json(const SignificanceReport& report) {
    std::ostringstream os;
    write_report_json(os, report);
    return ordered_json::parse(os.str());
}

Itemset itemset_from_labels(const ordered_json& labels, const BinaryDataset& d) {
    std::vector<int> items;
    for (const auto& label : labels) {
        const int c = d.find_col(label.get<std::string>());
        if (c < 0) throw UsageError("unknown itemset label '" + label.get<std::string>() + "'");
        items.push_back(c);
    }
    return make_itemset(std::move(items), d.cols());
}

}  // namespace

struct Service::Impl {
    SessionState session;
    ServiceOptions options;
    httplib::Server server;
    std::thread listener;
    std::thread job_thread;

    std::mutex mutex;  // guards session + jobs map mutations
    std::atomic<bool> busy{false};
    int next_job_id = 1;
    std::map<int, std::shared_ptr<Job>> jobs;

    void persist() {
        if (!options.session_path.empty())
            save_session_file(options.session_path, session);
    }

    void reap_job_thread() {
        if (job_thread.joinable()) job_thread.join();
    }

    void setup_routes();
};

void Service::Impl::setup_routes() {
    auto json_response = [](httplib::Response& res, int status, const ordered_json& body) {
        res.status = status;
        res.set_content(body.dump(2) + "\n", "application/json");
    };
    auto error_response = [json_response](httplib::Response& res, int status,
                                          const std::string& message) {
        json_response(res, status, ordered_json{{"error", message}});
    };

    server.Get("/api/session", [this, json_response](const httplib::Request&,
                                                     httplib::Response& res) {
        std::lock_guard<std::mutex> lock(mutex);
        json_response(res, 200, session_summary(session));
    });

    server.Post("/api/test", [this, json_response, error_response](
                                 const httplib::Request& req, httplib::Response& res) {
        ordered_json body;
        try {
            body = ordered_json::parse(req.body.empty() ? "{}" : req.body);
        } catch (const ordered_json::exception&) {
            return error_response(res, 400, "malformed JSON body");
        }
        bool expected = false;
        if (!busy.compare_exchange_strong(expected, true))
            return error_response(res, 409, "a job is already running");

        std::shared_ptr<Job> job;
        NullModel model;
        ChainConfig cfg;
        double alpha = 0.0;
        bool adjust = true;
        BinaryDataset dataset;
        std::vector<TestStatistic> stats;
        try {
            std::lock_guard<std::mutex> lock(mutex);
            const std::string kind = body.value("model", "margins");
            if (kind == "margins") {
                model = NullModel::margins();
            } else if (kind == "cluster-margins") {
                if (!session.clustering) {
                    busy = false;
                    return error_response(res, 400, "session has no clustering attached");
                }
                model = NullModel::cluster_margins(*session.clustering);
            } else if (kind == "itemset-soft") {
                const double w = body.value("w", session.config.w);
                model = NullModel::itemset_margins_soft(session.constraints, w);
            } else {
                busy = false;
                return error_response(res, 400, "unknown model '" + kind + "'");
            }
            cfg = session.config.chain;
            cfg.samples = body.value("samples", session.config.chain.samples);
            cfg.seed = body.value("seed", session.config.chain.seed);
            if (cfg.samples < 1) {
                busy = false;
                return error_response(res, 400, "samples must be >= 1");
            }
            alpha = session.config.alpha;
            adjust = session.config.adjust;
            dataset = session.dataset;
            stats = support_statistics(session.mined);
            job = std::make_shared<Job>();
            job->id = next_job_id++;
            job->total = cfg.samples;
            jobs[job->id] = job;
        } catch (const Error& e) {
            busy = false;
            return error_response(res, 400, e.what());
        }

        reap_job_thread();
        job_thread = std::thread([this, job, model = std::move(model), cfg, alpha, adjust,
                                  dataset = std::move(dataset), stats = std::move(stats)]() {
            try {
                SignificanceReport report = test_patterns(
                    dataset, stats, model, cfg, alpha, adjust,
                    [&](int done, int) { job->completed = done; });
                job->report = std::move(report);
            } catch (const std::exception& e) {
                job->error = e.what();
            }
            job->done = true;
            busy = false;
        });
        json_response(res, 200, ordered_json{{"job", job->id}});
    });

    server.Get(R"(/api/job/(\d+))", [this, json_response, error_response](
                                        const httplib::Request& req, httplib::Response& res) {
        std::shared_ptr<Job> job;
        {
            std::lock_guard<std::mutex> lock(mutex);
            int id = -1;
            try {
                id = std::stoi(req.matches[1]);
            } catch (const std::exception&) {
                return error_response(res, 404, "unknown job");
            }
            auto it = jobs.find(id);
            if (it == jobs.end()) return error_response(res, 404, "unknown job");
            job = it->second;
        }
        ordered_json j;
        if (!job->done) {
            j["status"] = "running";
            j["progress"] =
                static_cast<double>(job->completed.load()) / static_cast<double>(job->total);
        } else if (!job->error.empty()) {
            j["status"] = "failed";
            j["error"] = job->error;
        } else {
            j["status"] = "done";
            j["progress"] = 1.0;
            j["report"] = report_json(job->report);
        }
        json_response(res, 200, j);
    });

    server.Post("/api/constraints", [this, json_response, error_response](
                                        const httplib::Request& req, httplib::Response& res) {
        ordered_json body;
        try {
            body = ordered_json::parse(req.body);
        } catch (const ordered_json::exception&) {
            return error_response(res, 400, "malformed JSON body");
        }
        bool expected = false;
        if (!busy.compare_exchange_strong(expected, true))
            return error_response(res, 409, "a job is already running");
        std::lock_guard<std::mutex> lock(mutex);
        try {
            if (body.contains("add"))
                for (const auto& labels : body["add"])
                    add_constraint(session, itemset_from_labels(labels, session.dataset));
            if (body.contains("remove")) {
                for (const auto& labels : body["remove"]) {
                    const Itemset x = itemset_from_labels(labels, session.dataset);
                    if (!remove_constraint(session, x)) {
                        busy = false;
                        return error_response(res, 404, "itemset is not a constraint");
                    }
                }
            }
            persist();
        } catch (const Error& e) {
            busy = false;
            return error_response(res, 400, e.what());
        } catch (const ordered_json::exception& e) {
            busy = false;
            return error_response(res, 400, std::string("malformed body: ") + e.what());
        }
        busy = false;
        json_response(res, 200,
                      ordered_json{{"constraints", session_summary(session)["constraints"]}});
    });

    server.Post("/api/iterate", [this, json_response, error_response](
                                    const httplib::Request& req, httplib::Response& res) {
        ordered_json body;
        try {
            body = ordered_json::parse(req.body.empty() ? "{}" : req.body);
        } catch (const ordered_json::exception&) {
            return error_response(res, 400, "malformed JSON body");
        }
        bool expected = false;
        if (!busy.compare_exchange_strong(expected, true))
            return error_response(res, 409, "a job is already running");
        std::lock_guard<std::mutex> lock(mutex);
        try {
            const std::string strategy = body.value("strategy", "smallest-p");
            if (strategy == "smallest-p") {
                iterate_smallest_p(session);
            } else if (strategy == "manual") {
                if (!body.contains("itemset")) {
                    busy = false;
                    return error_response(res, 400, "manual strategy needs an itemset");
                }
                const Itemset x = itemset_from_labels(body["itemset"], session.dataset);
                // Record the test under the current model, then constrain the
                // chosen itemset.
                const int iteration = static_cast<int>(session.history.size());
                const NullModel model = session_model(session);
                ChainConfig cfg = session.config.chain;
                cfg.seed = derive_seed(session.config.chain.seed,
                                       seed_tag::session_iteration,
                                       static_cast<uint64_t>(iteration));
                IterationRecord rec;
                rec.iteration = iteration;
                rec.model_kind = model.kind_name();
                rec.seed = cfg.seed;
                rec.report =
                    test_patterns(session.dataset, support_statistics(session.mined), model,
                                  cfg, session.config.alpha, session.config.adjust);
                rec.significant_count = rec.report.significant_count();
                rec.chosen_constraint = x;
                add_constraint(session, x);
                session.history.push_back(std::move(rec));
            } else {
                busy = false;
                return error_response(res, 400, "unknown strategy '" + strategy + "'");
            }
            persist();
        } catch (const SessionComplete& e) {
            busy = false;
            return error_response(res, 409, e.what());
        } catch (const Error& e) {
            busy = false;
            return error_response(res, 400, e.what());
        }
        busy = false;
        const auto& rec = session.history.back();
        ordered_json r;
        r["iteration"] = rec.iteration;
        r["model"] = rec.model_kind;
        r["seed"] = rec.seed;
        r["significant_count"] = rec.significant_count;
        if (rec.chosen_constraint) {
            ordered_json items = ordered_json::array();
            for (int c : *rec.chosen_constraint)
                items.push_back(session.dataset.col_name(c));
            r["chosen"] = items;
        }
        r["report"] = report_json(rec.report);
        json_response(res, 200, r);
    });

    if (!options.static_dir.empty()) server.set_mount_point("/", options.static_dir);
}

Service::Service(SessionState session, ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
    impl_->session = std::move(session);
    impl_->options = std::move(options);
    impl_->setup_routes();
}

Service::~Service() { stop(); }

int Service::start() {
    int port = impl_->options.port;
    if (port == 0) {
        port = impl_->server.bind_to_any_port(impl_->options.host);
        if (port < 0) throw Error("cannot bind HTTP server");
        impl_->listener = std::thread([this]() { impl_->server.listen_after_bind(); });
    } else {
        if (!impl_->server.bind_to_port(impl_->options.host, port))
            throw Error("cannot bind HTTP server to port " + std::to_string(port));
        impl_->listener = std::thread([this]() { impl_->server.listen_after_bind(); });
    }
    impl_->server.wait_until_ready();
    return port;
}

void Service::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->listener.joinable()) impl_->listener.join();
    impl_->reap_job_thread();
}

}  // namespace exchmine
