#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "exchmine/clustering.hpp"
#include "exchmine/dataset_io.hpp"
#include "exchmine/service.hpp"
#include "exchmine/session.hpp"
#include "exchmine/significance.hpp"

namespace ex = exchmine;

namespace {

constexpr const char* kVersion = "exchmine 1.0.0";

uint64_t resolve_seed(const std::optional<uint64_t>& flag) {
    if (flag) return *flag;
    std::random_device rd;
    const uint64_t seed = (static_cast<uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed: " << seed << "\n";
    return seed;
}

std::optional<int64_t> parse_swaps(const std::string& text) {
    if (text == "auto") return std::nullopt;
    try {
        size_t used = 0;
        const int64_t v = std::stoll(text, &used);
        if (used != text.size() || v < 0) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ex::UsageError("--swaps must be 'auto' or a non-negative integer");
    }
}

struct MineArgs {
    std::string input, format = "dense", out;
    int64_t min_support = 1;
    int max_size = 3;
};

int run_mine(const MineArgs& args) {
    const auto d = ex::load_dataset_file(args.input, ex::parse_dataset_format(args.format));
    const auto family = ex::mine_frequent(d, args.min_support, args.max_size);
    ex::save_itemset_family_file(args.out, family, d);
    std::cerr << "mined " << family.size() << " itemsets\n";
    return 0;
}

struct TestArgs {
    std::string input, format = "dense";
    std::string model = "margins";
    std::string itemsets, constraints, clustering;
    double w = 4.0;
    int samples = 1000;
    std::string swaps = "auto";
    std::optional<uint64_t> seed;
    double alpha = 0.05;
    bool fdr = true;
    std::string tail;
    std::string stat = "support";
    int clusters = 2;
    int restarts = 10;
    int64_t min_support = 3;
    int max_size = 3;
    std::string report;
};

int run_test(const TestArgs& args) {
    if (args.samples < 1) throw ex::UsageError("--samples must be >= 1");
    const auto d = ex::load_dataset_file(args.input, ex::parse_dataset_format(args.format));

    ex::NullModel model;
    if (args.model == "margins") {
        model = ex::NullModel::margins();
    } else if (args.model == "cluster-margins") {
        if (args.clustering.empty())
            throw ex::UsageError("--model cluster-margins needs --clustering");
        model = ex::NullModel::cluster_margins(ex::load_clustering_file(args.clustering, d));
    } else if (args.model == "itemset-soft") {
        if (args.constraints.empty())
            throw ex::UsageError("--model itemset-soft needs --constraints");
        auto family = ex::load_itemset_family_file(args.constraints, d);
        if (!family.has_targets()) family = family.with_targets_from(d);
        model = ex::NullModel::itemset_margins_soft(std::move(family), args.w);
    } else {
        throw ex::UsageError("unknown model '" + args.model + "'");
    }

    std::vector<ex::TestStatistic> stats;
    if (args.stat == "support") {
        if (args.itemsets.empty()) throw ex::UsageError("--stat support needs --itemsets");
        const auto patterns = ex::load_itemset_family_file(args.itemsets, d);
        stats = ex::support_statistics(patterns);
    } else if (args.stat == "clustering-error") {
        stats.push_back(ex::TestStatistic::clustering_error_stat(args.clusters, args.restarts));
    } else if (args.stat == "count") {
        stats.push_back(ex::TestStatistic::frequent_count(args.min_support, args.max_size));
    } else {
        throw ex::UsageError("unknown statistic '" + args.stat + "'");
    }
    if (!args.tail.empty()) {
        const ex::Tail tail = ex::parse_tail(args.tail);
        for (auto& s : stats) s.tail = tail;
    }

    ex::ChainConfig cfg;
    cfg.swap_attempts = parse_swaps(args.swaps);
    const bool auto_swaps = !cfg.swap_attempts.has_value();
    cfg.seed = resolve_seed(args.seed);
    cfg.samples = args.samples;
    if (auto_swaps) {
        bool capped = false;
        cfg = ex::resolve_chain_config(d, model, cfg, &capped);
        std::cerr << "swap attempts: " << *cfg.swap_attempts << "\n";
        if (capped)
            std::cerr << "warning: swap-count search hit the cap of 2^20 x ones; "
                         "the chain may not have settled\n";
    }

    const auto report = ex::test_patterns(d, stats, model, cfg, args.alpha, args.fdr);

    ex::write_report_tsv(std::cout, report);
    if (!args.report.empty()) {
        std::ofstream out(args.report, std::ios::binary);
        if (!out) throw ex::UsageError("cannot write report file '" + args.report + "'");
        ex::write_report_json(out, report);
    }
    return 0;
}

struct IterateArgs {
    std::string input, format = "dense";
    std::string itemsets;
    std::string clustering;
    int iterations = 10;
    double w = 4.0;
    int samples = 1000;
    std::string swaps = "auto";
    std::optional<uint64_t> seed;
    double alpha = 0.05;
    bool fdr = true;
    std::string session_path;
};

int run_iterate(const IterateArgs& args) {
    if (args.samples < 1) throw ex::UsageError("--samples must be >= 1");
    ex::SessionState state;
    if (!args.session_path.empty() && std::filesystem::exists(args.session_path)) {
        state = ex::load_session_file(args.session_path);
        std::cerr << "resumed session with " << state.history.size() << " records\n";
    } else {
        if (args.input.empty() || args.itemsets.empty())
            throw ex::UsageError("a new session needs --input and --itemsets");
        ex::SessionConfig config;
        config.chain.swap_attempts = parse_swaps(args.swaps);
        config.chain.seed = resolve_seed(args.seed);
        config.chain.samples = args.samples;
        config.alpha = args.alpha;
        config.w = args.w;
        config.adjust = args.fdr;
        const auto format = ex::parse_dataset_format(args.format);
        const auto dataset = ex::load_dataset_file(args.input, format);
        const auto mined = ex::load_itemset_family_file(args.itemsets, dataset);
        state = ex::make_session(args.input, format, mined, config);
        if (!args.clustering.empty())
            state.clustering = ex::load_clustering_file(args.clustering, state.dataset);
        if (!args.session_path.empty()) {
            // The stored dataset path is resolved against the session file's
            // directory on load; rebase it so the session works from any CWD.
            namespace fs = std::filesystem;
            const auto session_dir = fs::absolute(args.session_path).parent_path();
            const auto dataset_abs = fs::absolute(args.input);
            std::error_code ec;
            const auto rel = fs::proximate(dataset_abs, session_dir, ec);
            state.dataset_path = (ec || rel.empty()) ? dataset_abs.string() : rel.string();
        }
    }

    // A fresh session starts with the plain-margins record; each requested
    // iteration then runs under the soft model over the accumulated set.
    int to_run = args.iterations + (state.history.empty() ? 1 : 0);
    for (int i = 0; i < to_run; ++i) {
        try {
            const auto& rec = ex::iterate_smallest_p(state);
            std::cout << "iteration " << rec.iteration << " (" << rec.model_kind
                      << "): significant = " << rec.significant_count;
            if (rec.chosen_constraint)
                std::cout << ", constrained "
                          << ex::itemset_label(*rec.chosen_constraint, state.dataset);
            std::cout << "\n";
        } catch (const ex::SessionComplete&) {
            std::cerr << "session complete: every mined itemset is constrained\n";
            break;
        }
        if (!args.session_path.empty()) ex::save_session_file(args.session_path, state);
    }
    return 0;
}

struct SplitArgs {
    std::string input, format = "dense";
    std::optional<uint64_t> seed;
    std::string out_mine, out_test;
};

int run_split(const SplitArgs& args) {
    const auto format = ex::parse_dataset_format(args.format);
    const auto d = ex::load_dataset_file(args.input, format);
    const uint64_t seed = resolve_seed(args.seed);
    const auto [mine_half, test_half] = ex::holdout_split(d, seed);
    ex::save_dataset_file(args.out_mine, mine_half, format);
    ex::save_dataset_file(args.out_test, test_half, format);
    std::cerr << "split " << d.rows() << " rows into " << mine_half.rows() << " + "
              << test_half.rows() << "\n";
    return 0;
}

struct ClusterArgs {
    std::string input, format = "dense";
    int clusters = 2;
    int restarts = 10;
    std::optional<uint64_t> seed;
    std::string out;
};

int run_cluster(const ClusterArgs& args) {
    const auto d = ex::load_dataset_file(args.input, ex::parse_dataset_format(args.format));
    ex::KmeansOptions opt;
    opt.restarts = args.restarts;
    opt.seed = resolve_seed(args.seed);
    const auto clustering = ex::kmeans(d, args.clusters, opt);
    ex::save_clustering_file(args.out, clustering, d);
    std::cerr << "clustering error: " << ex::clustering_error(d, clustering) << "\n";
    return 0;
}

struct ContingencyArgs {
    std::string report_a, report_b, out;
};

int run_contingency(const ContingencyArgs& args) {
    const auto a = ex::load_report_json_file(args.report_a);
    const auto b = ex::load_report_json_file(args.report_b);
    const auto table = ex::contingency(a, b);
    if (!args.out.empty()) {
        std::ofstream out(args.out, std::ios::binary);
        if (!out) throw ex::UsageError("cannot write '" + args.out + "'");
        ex::write_contingency(out, table, a.model.kind, b.model.kind);
    } else {
        ex::write_contingency(std::cout, table, a.model.kind, b.model.kind);
    }
    return 0;
}

struct ServeArgs {
    std::string session_path;
    std::string host = "127.0.0.1";
    int port = 8765;
    std::string static_dir;
};

int run_serve(const ServeArgs& args) {
    ex::SessionState state = ex::load_session_file(args.session_path);
    ex::ServiceOptions options;
    options.host = args.host;
    options.port = args.port;
    options.session_path = args.session_path;
    options.static_dir = args.static_dir;
    ex::Service service(std::move(state), options);
    const int port = service.start();
    std::cerr << "serving on http://" << args.host << ":" << port << "\n";
    // Foreground until interrupted.
    static std::atomic<bool> interrupted{false};
    std::signal(SIGINT, [](int) { interrupted = true; });
    std::signal(SIGTERM, [](int) { interrupted = true; });
    while (!interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"significance testing for binary datasets via constrained randomization"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    MineArgs mine_args;
    auto* mine = app.add_subcommand("mine", "mine frequent itemsets");
    mine->add_option("--input", mine_args.input, "dataset file")->required();
    mine->add_option("--format", mine_args.format, "dense|transactions");
    mine->add_option("--min-support", mine_args.min_support, "minimum frequency")->required();
    mine->add_option("--max-size", mine_args.max_size, "largest itemset size");
    mine->add_option("--out", mine_args.out, "itemset family output file")->required();

    TestArgs test_args;
    auto* test = app.add_subcommand("test", "empirical p-values under a null model");
    test->add_option("--input", test_args.input, "dataset file")->required();
    test->add_option("--format", test_args.format, "dense|transactions");
    test->add_option("--model", test_args.model, "margins|cluster-margins|itemset-soft");
    test->add_option("--itemsets", test_args.itemsets, "patterns to test (support stat)");
    test->add_option("--constraints", test_args.constraints,
                     "constraint family for itemset-soft");
    test->add_option("--clustering", test_args.clustering,
                     "clustering file for cluster-margins");
    test->add_option("--w", test_args.w, "soft constraint weight");
    test->add_option("--samples", test_args.samples, "number of randomized datasets");
    test->add_option("--swaps", test_args.swaps, "swap attempts per chain, or 'auto'");
    test->add_option("--seed", test_args.seed, "random seed");
    test->add_option("--alpha", test_args.alpha, "significance level");
    test->add_flag("--fdr,!--no-fdr", test_args.fdr, "Benjamini-Hochberg adjustment");
    test->add_option("--tail", test_args.tail, "greater|less|two-sided");
    test->add_option("--stat", test_args.stat, "support|clustering-error|count");
    test->add_option("--clusters", test_args.clusters, "k for clustering-error");
    test->add_option("--restarts", test_args.restarts, "k-means restarts");
    test->add_option("--min-support", test_args.min_support, "threshold for count stat");
    test->add_option("--max-size", test_args.max_size, "size cap for count stat");
    test->add_option("--report", test_args.report, "JSON report output path");

    IterateArgs iterate_args;
    auto* iterate = app.add_subcommand("iterate", "iterative constraint discovery");
    iterate->add_option("--input", iterate_args.input, "dataset file");
    iterate->add_option("--format", iterate_args.format, "dense|transactions");
    iterate->add_option("--itemsets", iterate_args.itemsets, "mined itemset family file");
    iterate->add_option("--clustering", iterate_args.clustering,
                        "clustering file to attach to the session");
    iterate->add_option("--iterations", iterate_args.iterations, "iterations to run");
    iterate->add_option("--w", iterate_args.w, "soft constraint weight");
    iterate->add_option("--samples", iterate_args.samples, "number of randomized datasets");
    iterate->add_option("--swaps", iterate_args.swaps, "swap attempts per chain, or 'auto'");
    iterate->add_option("--seed", iterate_args.seed, "random seed");
    iterate->add_option("--alpha", iterate_args.alpha, "significance level");
    iterate->add_flag("--fdr,!--no-fdr", iterate_args.fdr, "Benjamini-Hochberg adjustment");
    iterate->add_option("--session", iterate_args.session_path, "session file to write/extend");

    SplitArgs split_args;
    auto* split = app.add_subcommand("split", "random row holdout split");
    split->add_option("--input", split_args.input, "dataset file")->required();
    split->add_option("--format", split_args.format, "dense|transactions");
    split->add_option("--seed", split_args.seed, "random seed");
    split->add_option("--out-mine", split_args.out_mine, "mining half output")->required();
    split->add_option("--out-test", split_args.out_test, "testing half output")->required();

    ClusterArgs cluster_args;
    auto* cluster = app.add_subcommand("cluster", "k-means rows to a clustering file");
    cluster->add_option("--input", cluster_args.input, "dataset file")->required();
    cluster->add_option("--format", cluster_args.format, "dense|transactions");
    cluster->add_option("--clusters", cluster_args.clusters, "number of clusters")->required();
    cluster->add_option("--restarts", cluster_args.restarts, "independent runs");
    cluster->add_option("--seed", cluster_args.seed, "random seed");
    cluster->add_option("--out", cluster_args.out, "clustering output file")->required();

    ContingencyArgs contingency_args;
    auto* cont = app.add_subcommand("contingency", "2x2 significance table of two reports");
    cont->add_option("--report-a", contingency_args.report_a, "first JSON report")->required();
    cont->add_option("--report-b", contingency_args.report_b, "second JSON report")->required();
    cont->add_option("--out", contingency_args.out, "output file (default stdout)");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "HTTP API over a session");
    serve->add_option("--session", serve_args.session_path, "session file")->required();
    serve->add_option("--port", serve_args.port, "listen port (0 = any)");
    serve->add_option("--host", serve_args.host, "bind address");
    serve->add_option("--static", serve_args.static_dir, "directory of UI files");

    try {
        app.parse(argc, argv);
        if (mine->parsed()) return run_mine(mine_args);
        if (test->parsed()) return run_test(test_args);
        if (iterate->parsed()) return run_iterate(iterate_args);
        if (split->parsed()) return run_split(split_args);
        if (cluster->parsed()) return run_cluster(cluster_args);
        if (cont->parsed()) return run_contingency(contingency_args);
        if (serve->parsed()) return run_serve(serve_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ex::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ex::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ex::ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ex::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
