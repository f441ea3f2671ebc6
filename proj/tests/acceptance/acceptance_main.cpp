// Acceptance suite: each criterion prints one [PASS]/[FAIL] line (plus
// detail lines) and the process exits with the number of failed criteria.
//
//   acceptance_tests <criterion>|all [--regen]
//
// --regen rewrites the golden files under EXCHMINE_GOLDEN from the current
// implementation; committed goldens pin the seeded pipeline outputs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "exchmine/clustering.hpp"
#include "exchmine/dataset_io.hpp"
#include "exchmine/service.hpp"
#include "exchmine/session.hpp"
#include "exchmine/significance.hpp"
#include "exchmine/synthetic.hpp"

using namespace exchmine;
namespace fs = std::filesystem;

namespace {

bool g_regen = false;
int g_checks_failed = 0;

std::string env_or(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return v ? v : fallback;
}
std::string data_dir() { return env_or("EXCHMINE_DATA", "data"); }
std::string golden_dir() { return env_or("EXCHMINE_GOLDEN", "tests/golden"); }
std::string cli_path() { return env_or("EXCHMINE_CLI", "build/exchmine"); }

void check(bool ok, const std::string& what) {
    if (!ok) {
        ++g_checks_failed;
        std::printf("    failed: %s\n", what.c_str());
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BinaryDataset example_dataset() {
    return load_dataset_file(data_dir() + "/example.csv", DatasetFormat::DenseCsv);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "";
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Compares `content` against the named golden file, or rewrites it in
// --regen mode.
void check_golden(const std::string& name, const std::string& content) {
    const std::string path = golden_dir() + "/" + name;
    if (g_regen) {
        fs::create_directories(golden_dir());
        std::ofstream out(path, std::ios::binary);
        out << content;
        std::printf("    regenerated %s\n", name.c_str());
        return;
    }
    const std::string expected = slurp(path);
    if (expected.empty()) {
        check(false, "golden file " + name + " missing (run --regen)");
        return;
    }
    if (expected != content) {
        check(false, "output differs from golden " + name);
        std::printf("    expected:\n%s    got:\n%s", expected.c_str(), content.c_str());
    }
}

double find_raw_p(const SignificanceReport& report, const std::string& pattern) {
    for (const auto& p : report.patterns)
        if (p.pattern == pattern) return p.raw_p;
    return -1.0;
}

bool find_significant(const SignificanceReport& report, const std::string& pattern) {
    for (const auto& p : report.patterns)
        if (p.pattern == pattern) return p.significant;
    return false;
}

// ---------------------------------------------------------------------------
// Frozen chain lengths for the bundled example, chosen once per model with
// the documented reference seeds via choose_swap_count and pinned in a golden
// file. The toy criteria reuse them across their ten sampling seeds.

constexpr uint64_t kMarginsConvergenceSeed = 5;
constexpr uint64_t kSoftConvergenceSeed = 5;
constexpr uint64_t kClusterConvergenceSeed = 12;

const RowClustering& example_clustering() {
    static const RowClustering c({0, 0, 0, 0, 1, 1, 1, 1, 1});
    return c;
}

ItemsetFamily ab_bh_constraints(const BinaryDataset& d) {
    return ItemsetFamily(std::vector<Itemset>{{0, 1}, {1, 7}}).with_targets_from(d);
}

struct FrozenK {
    int64_t margins = 0;
    int64_t soft = 0;
    int64_t cluster = 0;
};

FrozenK resolve_example_swap_counts(const BinaryDataset& d) {
    FrozenK k;
    k.margins = choose_swap_count(d, NullModel::margins(), kMarginsConvergenceSeed);
    k.soft = choose_swap_count(
        d, NullModel::itemset_margins_soft(ab_bh_constraints(d), 4.0),
        kSoftConvergenceSeed);
    k.cluster = choose_swap_count(d, NullModel::cluster_margins(example_clustering()),
                                  kClusterConvergenceSeed);
    return k;
}

FrozenK frozen_example_swap_counts() {
    const auto d = example_dataset();
    const FrozenK k = resolve_example_swap_counts(d);
    std::ostringstream os;
    os << "margins seed=" << kMarginsConvergenceSeed << " K=" << k.margins << "\n"
       << "itemset-soft(AB,BH,w=4) seed=" << kSoftConvergenceSeed << " K=" << k.soft
       << "\n"
       << "cluster-margins seed=" << kClusterConvergenceSeed << " K=" << k.cluster
       << "\n";
    check_golden("convergence_example.txt", os.str());
    return k;
}

// ---------------------------------------------------------------------------

int criterion_toy_margins() {
    std::printf("  example-under-margins: six known itemsets significant, p close to\n"
                "  (0.044, 0.041, 0.023, 0.004, 0.015, 0.003), 10 seeds\n");
    const auto d = example_dataset();
    const auto mined = mine_frequent(d, 3, 8);
    check(mined.size() == 23, "expected 23 frequent itemsets");
    const FrozenK frozen = frozen_example_swap_counts();

    const std::vector<std::string> six = {"A B", "B H", "A B C",
                                          "A B H", "B C H", "A B C H"};
    const std::vector<double> paper_p = {0.044, 0.041, 0.023, 0.004, 0.015, 0.003};

    int exact_classification = 0;
    int within_tolerance = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        const auto t0 = std::chrono::steady_clock::now();
        ChainConfig cfg;
        cfg.swap_attempts = frozen.margins;
        cfg.seed = seed;
        cfg.samples = 999;
        const auto report = test_patterns(d, support_statistics(mined),
                                          NullModel::margins(), cfg, 0.05, false);
        const double elapsed = seconds_since(t0);
        check(elapsed < 10.0, "seed " + std::to_string(seed) + " took " +
                                  std::to_string(elapsed) + " s (>= 10)");

        std::set<std::string> significant;
        for (const auto& p : report.patterns)
            if (p.significant) significant.insert(p.pattern);
        const std::set<std::string> expected(six.begin(), six.end());
        const bool exact = significant == expected;
        bool tolerant = true;
        std::printf("    seed %2llu:", static_cast<unsigned long long>(seed));
        for (size_t i = 0; i < six.size(); ++i) {
            const double p = find_raw_p(report, six[i]);
            std::printf(" %.3f", p);
            tolerant = tolerant && std::abs(p - paper_p[i]) <= 0.03;
        }
        std::printf("  exact=%s tol=%s\n", exact ? "yes" : "no", tolerant ? "yes" : "no");
        exact_classification += exact;
        within_tolerance += tolerant;
    }
    std::printf("    exact classification in %d/10 seeds, tolerance in %d/10\n",
                exact_classification, within_tolerance);
    check(within_tolerance >= 9, "p-value tolerance met in fewer than 9 of 10 seeds");
    check(exact_classification >= 9,
          "exact significance classification in fewer than 9 of 10 seeds (the null "
          "exceedance probabilities of AB and BH are ~0.045, one Monte-Carlo sigma "
          "from alpha at k=999)");
    return g_checks_failed;
}

int criterion_toy_soft() {
    std::printf("  example-under-soft-constraints {AB,BH}, w=4: the four larger\n"
                "  itemsets lose significance, p close to (0.229, 0.683, 0.222, 0.170)\n");
    const auto d = example_dataset();
    const auto mined = mine_frequent(d, 3, 8);
    const FrozenK frozen = frozen_example_swap_counts();
    const auto model = NullModel::itemset_margins_soft(ab_bh_constraints(d), 4.0);

    const std::vector<std::string> four = {"A B C", "A B H", "B C H", "A B C H"};
    const std::vector<double> paper_p = {0.229, 0.683, 0.222, 0.170};

    int none_significant = 0;
    int within_tolerance = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        ChainConfig cfg;
        cfg.swap_attempts = frozen.soft;
        cfg.seed = seed;
        cfg.samples = 999;
        const auto report =
            test_patterns(d, support_statistics(mined), model, cfg, 0.05, false);
        bool none = true;
        bool tolerant = true;
        std::printf("    seed %2llu:", static_cast<unsigned long long>(seed));
        for (size_t i = 0; i < four.size(); ++i) {
            const double p = find_raw_p(report, four[i]);
            std::printf(" %.3f", p);
            none = none && !find_significant(report, four[i]);
            tolerant = tolerant && std::abs(p - paper_p[i]) <= 0.05;
        }
        std::printf("  none_sig=%s tol=%s\n", none ? "yes" : "no",
                    tolerant ? "yes" : "no");
        none_significant += none;
        within_tolerance += tolerant;
    }
    std::printf("    none-significant in %d/10 seeds, tolerance in %d/10\n",
                none_significant, within_tolerance);
    check(none_significant >= 9, "larger itemsets stayed significant too often");
    check(within_tolerance >= 9, "p-value tolerance met in fewer than 9 of 10 seeds");
    return g_checks_failed;
}

int criterion_toy_clustering() {
    std::printf("  clustering-error significance: ~0.011 under margins (significant),\n"
                "  ~0.096 under soft {AB,BH} (not significant)\n");
    const auto d = example_dataset();
    const FrozenK frozen = frozen_example_swap_counts();
    const std::vector<TestStatistic> stat = {TestStatistic::clustering_error_stat(2, 10)};
    const auto soft = NullModel::itemset_margins_soft(ab_bh_constraints(d), 4.0);

    int margins_correct = 0;
    int soft_correct = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        ChainConfig cfg;
        cfg.seed = seed;
        cfg.samples = 999;
        cfg.swap_attempts = frozen.margins;
        const auto rm = test_patterns(d, stat, NullModel::margins(), cfg, 0.05, false);
        cfg.swap_attempts = frozen.soft;
        const auto rs = test_patterns(d, stat, soft, cfg, 0.05, false);
        const double pm = rm.patterns[0].raw_p;
        const double ps = rs.patterns[0].raw_p;
        const bool m_ok = rm.patterns[0].significant && std::abs(pm - 0.011) <= 0.03;
        const bool s_ok = !rs.patterns[0].significant && std::abs(ps - 0.096) <= 0.05;
        std::printf("    seed %2llu: margins=%.3f%s soft=%.3f%s\n",
                    static_cast<unsigned long long>(seed), pm, m_ok ? "" : " !",
                    ps, s_ok ? "" : " !");
        margins_correct += m_ok;
        soft_correct += s_ok;
    }
    std::printf("    margins correct in %d/10, soft correct in %d/10\n", margins_correct,
                soft_correct);
    check(margins_correct >= 9, "clustering significance under margins unstable");
    check(soft_correct >= 9, "clustering insignificance under soft model unstable");
    return g_checks_failed;
}

int criterion_toy_reverse() {
    std::printf("  reverse test: preserving the 2-clustering leaves all six itemsets\n"
                "  insignificant\n");
    const auto d = example_dataset();
    const FrozenK frozen = frozen_example_swap_counts();
    const auto model = NullModel::cluster_margins(example_clustering());
    const ItemsetFamily six(std::vector<Itemset>{
        {0, 1}, {1, 7}, {0, 1, 2}, {0, 1, 7}, {1, 2, 7}, {0, 1, 2, 7}});

    int none_significant = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        ChainConfig cfg;
        cfg.swap_attempts = frozen.cluster;
        cfg.seed = seed;
        cfg.samples = 999;
        const auto report =
            test_patterns(d, support_statistics(six), model, cfg, 0.05, false);
        bool none = true;
        std::printf("    seed %2llu:", static_cast<unsigned long long>(seed));
        for (const auto& p : report.patterns) {
            std::printf(" %.3f", p.raw_p);
            none = none && !p.significant;
        }
        std::printf("  none_sig=%s\n", none ? "yes" : "no");
        none_significant += none;
    }
    check(none_significant >= 9, "itemsets became significant under cluster-margins");
    return g_checks_failed;
}

int criterion_uniformity() {
    std::printf("  uniformity over enumerable margin classes, 1e5 exchangeable samples\n");
    struct ClassSpec {
        std::vector<std::string> rows;
        const char* name;
    };
    const std::vector<ClassSpec> classes = {
        {{"1100", "0011", "1000", "0010"}, "4x4 margins (2,2,1,1)"},
        {{"1000", "0100", "0010", "0001"}, "4x4 permutation class"},
        {{"1100", "0110", "0011", "1001"}, "4x4 margins (2,2,2,2)"},
    };
    for (const auto& spec : classes) {
        const auto t0 = std::chrono::steady_clock::now();
        BinaryDataset base(4, 4);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                if (spec.rows[r][c] == '1') base.set(r, c, true);
        const auto members = enumerate_margin_class(base);
        check(members.size() <= 200, "class unexpectedly large");

        std::map<std::string, int> counts;
        ChainConfig cfg;
        cfg.swap_attempts = 200;
        cfg.seed = 424242;
        cfg.samples = 100000;
        for (const auto& s : sample(base, NullModel::margins(), cfg)) {
            std::string key;
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) key += s.get(r, c) ? '1' : '0';
            ++counts[key];
        }
        double tv = 0.0;
        const double uniform = 1.0 / static_cast<double>(members.size());
        for (const auto& member : members) {
            std::string key;
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) key += member.get(r, c) ? '1' : '0';
            const auto it = counts.find(key);
            const double freq =
                it == counts.end() ? 0.0 : static_cast<double>(it->second) / cfg.samples;
            tv += std::abs(freq - uniform);
        }
        tv /= 2.0;
        const double elapsed = seconds_since(t0);
        std::printf("    %s: %zu members, TV=%.4f (%.1f s)\n", spec.name, members.size(),
                    tv, elapsed);
        check(tv < 0.05, std::string(spec.name) + ": TV >= 0.05");
        check(elapsed < 60.0, std::string(spec.name) + ": slower than 60 s");
    }
    return g_checks_failed;
}

int criterion_invariants() {
    std::printf("  kernel invariants on random 50x50 data\n");
    const auto d0 = synthetic_noise(50, 50, 0.3, 11);

    {  // margins preserved on every step of all three kernels
        struct KernelCase {
            const char* name;
            NullModel model;
        };
        KmeansOptions opt;
        opt.seed = 1;
        const auto clustering = kmeans(d0, 5, opt);
        auto family = mine_frequent(d0, 8, 2);
        check(family.size() >= 5, "mined family unexpectedly small");
        std::vector<KernelCase> kernels;
        kernels.push_back({"margins", NullModel::margins()});
        kernels.push_back({"cluster-margins", NullModel::cluster_margins(clustering)});
        kernels.push_back({"itemset-soft", NullModel::itemset_margins_soft(family, 1.0)});
        for (auto& kernel : kernels) {
            const auto t0 = std::chrono::steady_clock::now();
            SwapChain chain(d0, kernel.model);
            Rng rng(99);
            const auto rows = d0.row_margins();
            const auto cols = d0.col_margins();
            bool margins_ok = true;
            for (int64_t i = 0; i < 1000000; ++i) {
                chain.step(rng);
                margins_ok = margins_ok && chain.dataset().row_margins() == rows &&
                             chain.dataset().col_margins() == cols;
            }
            check(margins_ok, std::string(kernel.name) + ": margins drifted");
            check(chain.dataset().check_consistency(),
                  std::string(kernel.name) + ": ones index inconsistent");
            std::printf("    %s: margins intact over 1e6 steps (%.1f s)\n", kernel.name,
                        seconds_since(t0));
        }
    }

    {  // clustering error constant along cluster-margin chains
        KmeansOptions opt;
        opt.seed = 2;
        const auto clustering = kmeans(d0, 5, opt);
        const double error0 = clustering_error(d0, clustering);
        auto d = d0;
        ClusterOnesIndex index(d, clustering);
        Rng rng(123);
        double max_drift = 0.0;
        for (int i = 0; i < 100000; ++i) {
            cluster_step(d, index, rng);
            const double error = clustering_error(d, clustering);
            max_drift = std::max(max_drift, std::abs(error - error0) / error0);
        }
        std::printf("    clustering error relative drift over 1e5 steps: %.2e\n",
                    max_drift);
        check(max_drift < 1e-9, "clustering error drifted");
    }

    {  // incremental difference equals recomputation
        auto family = mine_frequent(d0, 8, 2);
        const ItemsetIndex index(family, d0.cols());
        auto d = d0;
        std::vector<int64_t> freqs;
        for (size_t i = 0; i < family.size(); ++i) freqs.push_back(frequency(d, family[i]));
        std::vector<std::pair<int, int64_t>> touched;
        int64_t h = itemset_difference(family, d);
        Rng rng(7);
        int applied = 0;
        bool all_equal = true;
        while (applied < 10000) {
            const auto n_ones = static_cast<uint64_t>(d.ones_count());
            const auto pos_a = d.one_position(rng.below(n_ones));
            const auto pos_b = d.one_position(rng.below(n_ones));
            const Swap sw{d.position_row(pos_a), d.position_row(pos_b),
                          d.position_col(pos_a), d.position_col(pos_b)};
            if (!d.swap_applicable(sw)) continue;
            h += incremental_difference_delta(d, family, index, sw, freqs, touched);
            d.apply_swap(sw);
            for (const auto& [i, f] : touched) freqs[i] = f;
            all_equal = all_equal && h == itemset_difference(family, d);
            ++applied;
        }
        std::printf("    incremental difference matched recomputation over 1e4 swaps\n");
        check(all_equal, "incremental family difference diverged");
    }
    return g_checks_failed;
}

int criterion_calibration() {
    std::printf("  p-value calibration: Kolmogorov-Smirnov against Uniform(0,1) over\n"
                "  200 null replications, level 0.01\n");
    const auto d0 = example_dataset();
    const FrozenK frozen = frozen_example_swap_counts();

    // A continuous statistic avoids the tie-conservatism of discrete counts:
    // a fixed weighted cell sum with deterministic pseudo-random weights.
    auto weighted = TestStatistic::custom(
        "weighted-cell-sum",
        [](const BinaryDataset& d, uint64_t) {
            double sum = 0.0;
            for (int64_t i = 0; i < d.ones_count(); ++i) {
                const auto pos = d.one_position(static_cast<size_t>(i));
                uint64_t h = 0x9E3779B97F4A7C15ull * (pos + 1);
                sum += static_cast<double>(splitmix64_next(h)) * 0x1.0p-64;
            }
            return sum;
        },
        Tail::Greater);

    const int replications = 200;
    std::vector<double> pvalues;
    pvalues.reserve(replications);
    for (int rep = 0; rep < replications; ++rep) {
        // Null-drawn dataset: one exchangeable sample from the fixed seed
        // dataset.
        ChainConfig draw;
        draw.swap_attempts = frozen.margins;
        draw.seed = derive_seed(31337, 1, rep);
        draw.samples = 1;
        const auto null_data = sample(d0, NullModel::margins(), draw)[0];

        ChainConfig cfg;
        cfg.swap_attempts = frozen.margins;
        cfg.seed = derive_seed(31337, 2, rep);
        cfg.samples = 99;
        const auto report =
            test_patterns(null_data, {weighted}, NullModel::margins(), cfg, 0.05, false);
        pvalues.push_back(report.patterns[0].raw_p);
    }
    std::sort(pvalues.begin(), pvalues.end());
    double ks = 0.0;
    for (size_t i = 0; i < pvalues.size(); ++i) {
        const double n = static_cast<double>(pvalues.size());
        ks = std::max(ks, std::abs((i + 1.0) / n - pvalues[i]));
        ks = std::max(ks, std::abs(pvalues[i] - i / n));
    }
    // Stephens' finite-sample critical value at alpha = 0.01.
    const double n = static_cast<double>(pvalues.size());
    const double critical = 1.6276 / (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
    std::printf("    KS statistic %.4f vs critical %.4f\n", ks, critical);
    check(ks < critical, "p-values deviate from Uniform(0,1)");
    return g_checks_failed;
}

int run_command(const std::string& command, std::string* output = nullptr) {
    const std::string line = command + " 2>&1";
    FILE* pipe = popen(line.c_str(), "r");
    if (!pipe) return -1;
    char buffer[4096];
    std::string text;
    size_t got;
    while ((got = fread(buffer, 1, sizeof buffer, pipe)) > 0) text.append(buffer, got);
    if (output) *output = text;
    const int status = pclose(pipe);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("exchmine-accept-" + std::to_string(::getpid()) + "-" +
                std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int criterion_determinism() {
    std::printf("  byte-identical reports for repeated seeded runs; exact session replay\n");
    TempDir tmp;
    const std::string example = data_dir() + "/example.csv";
    const std::string itemsets = (tmp.path / "itemsets.txt").string();
    check(run_command(cli_path() + " mine --input " + example +
                      " --min-support 3 --max-size 8 --out " + itemsets) == 0,
          "mine failed");

    {  // CLI test twice -> identical stdout and identical JSON report
        const std::string report_a = (tmp.path / "a.json").string();
        const std::string report_b = (tmp.path / "b.json").string();
        const std::string base = cli_path() + " test --input " + example + " --itemsets " +
                                 itemsets +
                                 " --samples 999 --swaps 1056 --seed 7 --no-fdr --report ";
        std::string out_a, out_b;
        check(run_command(base + report_a, &out_a) == 0, "test run A failed");
        check(run_command(base + report_b, &out_b) == 0, "test run B failed");
        check(out_a == out_b, "stdout differs between identical seeded runs");
        check(!slurp(report_a).empty() && slurp(report_a) == slurp(report_b),
              "JSON reports differ between identical seeded runs");
        std::printf("    repeated `test --seed 7`: identical bytes\n");
    }

    {  // CLI iterate twice -> identical session files
        const std::string session_a = (tmp.path / "sa.json").string();
        const std::string session_b = (tmp.path / "sb.json").string();
        const std::string base = cli_path() + " iterate --input " + example +
                                 " --itemsets " + itemsets +
                                 " --iterations 2 --samples 199 --swaps 1056 --seed 9 "
                                 "--no-fdr --session ";
        check(run_command(base + session_a) == 0, "iterate run A failed");
        check(run_command(base + session_b) == 0, "iterate run B failed");
        check(!slurp(session_a).empty() && slurp(session_a) == slurp(session_b),
              "session files differ between identical seeded runs");
        std::printf("    repeated `iterate --seed 9`: identical session files\n");

        // Replay every stored record from its seed.
        const auto state = load_session_file(session_a);
        check(state.history.size() == 3, "expected 3 history records");
        bool replays = true;
        for (size_t i = 0; i < state.history.size(); ++i) {
            const auto replayed = replay_iteration(state, i);
            replays = replays && report_fingerprint(replayed) ==
                                     report_fingerprint(state.history[i].report);
        }
        check(replays, "session replay diverged from stored reports");
        std::printf("    replayed %zu records bit-identically\n", state.history.size());
    }

    {  // split and cluster write byte-identical outputs for the same seed
        const std::string mine_a = (tmp.path / "ma.csv").string();
        const std::string mine_b = (tmp.path / "mb.csv").string();
        const std::string rest_a = (tmp.path / "ra.csv").string();
        const std::string rest_b = (tmp.path / "rb.csv").string();
        check(run_command(cli_path() + " split --input " + example +
                          " --seed 4 --out-mine " + mine_a + " --out-test " + rest_a) == 0,
              "split run A failed");
        check(run_command(cli_path() + " split --input " + example +
                          " --seed 4 --out-mine " + mine_b + " --out-test " + rest_b) == 0,
              "split run B failed");
        check(slurp(mine_a) == slurp(mine_b) && slurp(rest_a) == slurp(rest_b),
              "split halves differ between identical seeded runs");

        const std::string clus_a = (tmp.path / "ca.tsv").string();
        const std::string clus_b = (tmp.path / "cb.tsv").string();
        check(run_command(cli_path() + " cluster --input " + example +
                          " --clusters 2 --seed 6 --out " + clus_a) == 0,
              "cluster run A failed");
        check(run_command(cli_path() + " cluster --input " + example +
                          " --clusters 2 --seed 6 --out " + clus_b) == 0,
              "cluster run B failed");
        check(slurp(clus_a) == slurp(clus_b),
              "clustering files differ between identical seeded runs");
        std::printf("    repeated `split` and `cluster`: identical bytes\n");
    }
    return g_checks_failed;
}

int criterion_workflows() {
    std::printf("  end-to-end workflows; large-corpus tables are NOT reproduced here\n"
                "  (the original multi-thousand-row corpora are not redistributable);\n"
                "  the pipelines run on the bundled example and a seeded synthetic\n"
                "  planted-structure dataset with golden outputs\n");
    const auto d = example_dataset();
    const FrozenK frozen = frozen_example_swap_counts();

    {  // Holdout split workflow on the bundled example.
        const auto [mine_half, test_half] = holdout_split(d, 2024);
        std::ostringstream os;
        auto render_rows = [&os](const char* title, const BinaryDataset& half) {
            os << title << ":";
            for (int r = 0; r < half.rows(); ++r) {
                os << ' ';
                for (int c = 0; c < half.cols(); ++c) os << (half.get(r, c) ? '1' : '0');
            }
            os << '\n';
        };
        render_rows("mine half", mine_half);
        render_rows("test half", test_half);
        const auto mined = mine_frequent(mine_half, 2, 3);
        os << "mined on half: " << mined.size() << " itemsets\n";
        ChainConfig cfg;
        cfg.swap_attempts = frozen.margins;
        cfg.seed = 11;
        cfg.samples = 499;
        const auto report = test_patterns(test_half, support_statistics(mined),
                                          NullModel::margins(), cfg, 0.05, true);
        os << "significant on held-out half: " << report.significant_count() << "\n";
        check_golden("workflow_holdout.txt", os.str());
        std::printf("    holdout split -> mine -> test: ok\n");
    }

    {  // Constraint selection workflows on the bundled example.
        const auto mined = mine_frequent(d, 3, 8);
        ChainConfig cfg;
        cfg.swap_attempts = frozen.margins;
        cfg.seed = 21;
        cfg.samples = 999;
        const auto margins_report = test_patterns(d, support_statistics(mined),
                                                  NullModel::margins(), cfg, 0.05, false);
        bool truncated = false;
        const auto top40 = select_top_significant(margins_report, mined, d, 40, &truncated);
        check(truncated, "top-40 on 23 patterns should report truncation");

        ChainConfig ccfg = cfg;
        ccfg.swap_attempts = frozen.cluster;
        const auto cluster_report =
            test_patterns(d, support_statistics(mined),
                          NullModel::cluster_margins(example_clustering()), ccfg, 0.05,
                          false);
        const auto movers = select_by_p_delta(margins_report, cluster_report, mined, d, 5);

        std::ostringstream os;
        os << "top significant (capped at family size):\n";
        for (size_t i = 0; i < top40.size(); ++i)
            os << "  " << itemset_label(top40[i], d) << " : " << top40.targets()[i] << "\n";
        os << "largest p increase margins -> cluster-margins:\n";
        for (size_t i = 0; i < movers.size(); ++i)
            os << "  " << itemset_label(movers[i], d) << "\n";
        const auto table = contingency(margins_report, cluster_report);
        os << "contingency margins x cluster-margins: nn=" << table.nn
           << " ns=" << table.ns << " sn=" << table.sn << " ss=" << table.ss << "\n";
        check_golden("workflow_selection.txt", os.str());
        check(table.total() == 23, "contingency total mismatch");
        std::printf("    top-n and p-delta constraint selection: ok\n");
    }

    {  // Ten-iteration loop on the bundled example.
        SessionConfig config;
        config.chain.swap_attempts = frozen.soft;
        config.chain.seed = 4;
        config.chain.samples = 199;
        config.adjust = false;
        auto state = make_session(data_dir() + "/example.csv", DatasetFormat::DenseCsv,
                                  mine_frequent(d, 3, 8), config);
        std::ostringstream os;
        for (int i = 0; i < 11; ++i) {
            const auto& rec = iterate_smallest_p(state);
            os << "iteration " << rec.iteration << " model=" << rec.model_kind
               << " significant=" << rec.significant_count << " chosen="
               << itemset_label(*rec.chosen_constraint, state.dataset) << "\n";
        }
        check(state.history.size() == 11, "expected 11 records (initial + 10)");
        check_golden("workflow_iterate_example.txt", os.str());
        std::printf("    10-iteration loop on the example: ok\n");
    }

    {  // The documented walkthrough: adding {AB, BH} cannot raise the count.
        const auto mined = mine_frequent(d, 3, 8);
        ChainConfig cfg;
        cfg.seed = 8;
        cfg.samples = 999;
        cfg.swap_attempts = frozen.margins;
        const auto r0 = test_patterns(d, support_statistics(mined), NullModel::margins(),
                                      cfg, 0.05, false);
        ItemsetFamily one = ItemsetFamily::empty_with_targets();
        one.add({0, 1}, frequency(d, {0, 1}));
        cfg.swap_attempts = frozen.soft;
        const auto r1 = test_patterns(d, support_statistics(mined),
                                      NullModel::itemset_margins_soft(one, 4.0), cfg,
                                      0.05, false);
        const auto r2 = test_patterns(d, support_statistics(mined),
                                      NullModel::itemset_margins_soft(
                                          ab_bh_constraints(d), 4.0),
                                      cfg, 0.05, false);
        std::printf("    significant counts as {AB, BH} constraints accumulate: "
                    "%d -> %d -> %d\n",
                    r0.significant_count(), r1.significant_count(),
                    r2.significant_count());
        check(r1.significant_count() <= r0.significant_count(),
              "adding AB raised the significant count");
        check(r2.significant_count() <= r1.significant_count(),
              "adding BH raised the significant count");
    }

    {  // Synthetic planted-structure pipeline.
        const auto synth = synthetic_planted(200, 50, 77);
        check(synth.rows() == 200 && synth.cols() == 50, "synthetic shape");
        const auto [mine_half, test_half] = holdout_split(synth, 5);
        const auto mined = mine_frequent(mine_half, 12, 2);
        check(mined.size() >= 40, "synthetic mining found too few patterns");

        ChainConfig cfg;
        cfg.swap_attempts = 8192;
        cfg.seed = 6;
        cfg.samples = 199;
        const auto margins_report = test_patterns(test_half, support_statistics(mined),
                                                  NullModel::margins(), cfg, 0.05, true);
        const auto top = select_top_significant(margins_report, mined, test_half, 40);
        const auto soft_report = test_patterns(
            test_half, support_statistics(mined),
            NullModel::itemset_margins_soft(top, 4.0), cfg, 0.05, true);
        const auto table = contingency(margins_report, soft_report);

        KmeansOptions opt;
        opt.seed = 3;
        const auto clustering = kmeans(test_half, 2, opt);
        const auto cluster_report =
            test_patterns(test_half, support_statistics(mined),
                          NullModel::cluster_margins(clustering), cfg, 0.05, true);
        const auto cluster_table = contingency(margins_report, cluster_report);

        const auto movers =
            select_by_p_delta(margins_report, cluster_report, mined, test_half, 10);

        std::ostringstream os;
        os << "mined " << mined.size() << " size-2 patterns on the mining half\n";
        os << "margins significant: " << margins_report.significant_count() << "\n";
        os << "soft(top-40) significant: " << soft_report.significant_count() << "\n";
        os << "margins x soft: nn=" << table.nn << " ns=" << table.ns
           << " sn=" << table.sn << " ss=" << table.ss << "\n";
        os << "margins x cluster: nn=" << cluster_table.nn << " ns=" << cluster_table.ns
           << " sn=" << cluster_table.sn << " ss=" << cluster_table.ss << "\n";
        os << "largest p increase margins -> cluster-margins:\n";
        for (size_t i = 0; i < movers.size(); ++i)
            os << "  " << itemset_label(movers[i], test_half) << "\n";

        // Ten iterations of constraint discovery over the testing half.
        TempDir session_dir;
        const auto test_path = (session_dir.path / "synthetic_test.csv").string();
        save_dataset_file(test_path, test_half, DatasetFormat::DenseCsv);
        SessionConfig config;
        config.chain.swap_attempts = 8192;
        config.chain.seed = 13;
        config.chain.samples = 199;
        auto state = make_session(test_path, DatasetFormat::DenseCsv, mined, config);
        os << "iterative significant counts:";
        for (int i = 0; i < 11; ++i) {
            const auto& rec = iterate_smallest_p(state);
            os << ' ' << rec.significant_count;
        }
        os << '\n';
        check(state.history.size() == 11, "expected 11 synthetic session records");
        check_golden("workflow_synthetic.txt", os.str());
        check(margins_report.significant_count() > 0,
              "no planted structure detected under margins");
        check(soft_report.significant_count() < margins_report.significant_count(),
              "top-40 constraints did not reduce significance");
        std::printf("    synthetic 200x50 pipeline (split, top-40, p-delta, iterate, "
                    "contingency): ok\n");
    }

    {  // Margins-chain throughput.
        auto synth = synthetic_planted(200, 50, 77);
        Rng rng(1);
        const int64_t attempts = 10000000;
        const auto t0 = std::chrono::steady_clock::now();
        for (int64_t i = 0; i < attempts; ++i) margins_step(synth, rng);
        const double elapsed = seconds_since(t0);
        const double rate = static_cast<double>(attempts) / elapsed;
        std::printf("    margins throughput: %.2e swap attempts/s\n", rate);
        check(rate >= 1e6, "margins chain slower than 1e6 attempts/s");
    }
    return g_checks_failed;
}

struct Criterion {
    const char* name;
    const char* title;
    std::function<int()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {"toy_margins", "example significance under margins", criterion_toy_margins},
        {"toy_soft", "example significance under soft itemset constraints",
         criterion_toy_soft},
        {"toy_clustering", "clustering significance under both models",
         criterion_toy_clustering},
        {"toy_reverse", "itemset insignificance under cluster-margins",
         criterion_toy_reverse},
        {"uniformity", "chain uniformity against the enumeration oracle",
         criterion_uniformity},
        {"invariants", "kernel invariant suite", criterion_invariants},
        {"calibration", "null p-value calibration", criterion_calibration},
        {"determinism", "seeded determinism and replay", criterion_determinism},
        {"workflows", "end-to-end workflows, goldens, and throughput",
         criterion_workflows},
    };
    return list;
}

int run_criterion(const Criterion& criterion) {
    g_checks_failed = 0;
    std::printf("== %s: %s\n", criterion.name, criterion.title);
    int failed = 0;
    try {
        failed = criterion.run();
    } catch (const std::exception& e) {
        std::printf("    exception: %s\n", e.what());
        failed = g_checks_failed + 1;
    }
    std::printf("[%s] %s\n", failed == 0 ? "PASS" : "FAIL", criterion.name);
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::string which = "all";
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--regen")
            g_regen = true;
        else
            which = arg;
    }
    int failures = 0;
    bool matched = false;
    for (const auto& criterion : criteria()) {
        if (which != "all" && which != criterion.name) continue;
        matched = true;
        failures += run_criterion(criterion);
    }
    if (!matched) {
        std::fprintf(stderr, "unknown criterion '%s'\n", which.c_str());
        return 64;
    }
    return failures;
}
