#include "exchmine/significance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace exchmine {

using ordered_json = nlohmann::ordered_json;

std::string tail_name(Tail t) {
    switch (t) {
        case Tail::Greater: return "greater";
        case Tail::Less: return "less";
        case Tail::TwoSided: return "two-sided";
    }
    return "?";
}

Tail parse_tail(const std::string& name) {
    if (name == "greater") return Tail::Greater;
    if (name == "less") return Tail::Less;
    if (name == "two-sided") return Tail::TwoSided;
    throw UsageError("unknown tail '" + name + "'");
}

TestStatistic TestStatistic::itemset_support(Itemset x) {
    TestStatistic s;
    s.kind = Kind::ItemsetSupport;
    s.tail = Tail::Greater;
    s.itemset = std::move(x);
    return s;
}

TestStatistic TestStatistic::clustering_error_stat(int k, int restarts) {
    TestStatistic s;
    s.kind = Kind::ClusteringError;
    s.tail = Tail::Less;
    s.clusters = k;
    s.restarts = restarts;
    return s;
}

TestStatistic TestStatistic::frequent_count(int64_t min_support, int max_size) {
    TestStatistic s;
    s.kind = Kind::NumFrequentItemsets;
    s.tail = Tail::Greater;
    s.min_support = min_support;
    s.max_size = max_size;
    return s;
}

TestStatistic TestStatistic::custom(
    std::string name, std::function<double(const BinaryDataset&, uint64_t)> fn,
    Tail tail) {
    TestStatistic s;
    s.kind = Kind::Custom;
    s.tail = tail;
    s.custom_name = std::move(name);
    s.evaluator = std::move(fn);
    return s;
}

std::string TestStatistic::display_name(const BinaryDataset& d) const {
    switch (kind) {
        case Kind::ItemsetSupport: return itemset_label(itemset, d);
        case Kind::ClusteringError:
            return "clustering-error(k=" + std::to_string(clusters) +
                   ",restarts=" + std::to_string(restarts) + ")";
        case Kind::NumFrequentItemsets:
            return "frequent-count(min=" + std::to_string(min_support) +
                   ",max=" + std::to_string(max_size) + ")";
        case Kind::Custom: return custom_name;
    }
    return "?";
}

double TestStatistic::evaluate(const BinaryDataset& d, uint64_t seed) const {
    switch (kind) {
        case Kind::ItemsetSupport:
            return static_cast<double>(frequency(d, itemset));
        case Kind::ClusteringError: {
            KmeansOptions opt;
            opt.restarts = restarts;
            opt.seed = seed;
            return clustering_error(d, kmeans(d, clusters, opt));
        }
        case Kind::NumFrequentItemsets:
            return static_cast<double>(mine_frequent(d, min_support, max_size).size());
        case Kind::Custom: return evaluator(d, seed);
    }
    throw UsageError("unset statistic");
}

double empirical_p(double original, const std::vector<double>& randomized, Tail tail) {
    if (randomized.empty()) throw UsageError("empirical p-value needs samples");
    const double k = static_cast<double>(randomized.size());
    auto one_sided = [&](bool greater) {
        int64_t count = 0;
        for (double v : randomized)
            count += greater ? (v >= original) : (v <= original);
        return (static_cast<double>(count) + 1.0) / (k + 1.0);
    };
    switch (tail) {
        case Tail::Greater: return one_sided(true);
        case Tail::Less: return one_sided(false);
        case Tail::TwoSided:
            return std::min(1.0, 2.0 * std::min(one_sided(true), one_sided(false)));
    }
    throw UsageError("unknown tail");
}

std::pair<std::vector<double>, std::vector<bool>> bh_adjust(
    const std::vector<double>& raw_ps, double alpha) {
    const size_t m = raw_ps.size();
    for (double p : raw_ps)
        if (!(p > 0.0) || p > 1.0)
            throw ValueError("p-value outside (0, 1]");
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return raw_ps[a] < raw_ps[b]; });
    std::vector<double> adjusted(m);
    double running = 1.0;
    for (size_t rank = m; rank-- > 0;) {
        const size_t i = order[rank];
        running = std::min(running, raw_ps[i] * static_cast<double>(m) /
                                        static_cast<double>(rank + 1));
        adjusted[i] = running;
    }
    std::vector<bool> significant(m);
    for (size_t i = 0; i < m; ++i) significant[i] = adjusted[i] <= alpha;
    return {std::move(adjusted), std::move(significant)};
}

int SignificanceReport::significant_count() const {
    int n = 0;
    for (const auto& p : patterns) n += p.significant;
    return n;
}

std::vector<TestStatistic> support_statistics(const ItemsetFamily& family) {
    std::vector<TestStatistic> stats;
    stats.reserve(family.size());
    for (const auto& x : family.itemsets())
        stats.push_back(TestStatistic::itemset_support(x));
    return stats;
}

SignificanceReport test_patterns(const BinaryDataset& d,
                                 const std::vector<TestStatistic>& stats,
                                 const NullModel& model, const ChainConfig& cfg,
                                 double alpha, bool adjust, const ProgressFn& progress) {
    const ChainConfig resolved = resolve_chain_config(d, model, cfg);
    const std::vector<BinaryDataset> samples = sample(d, model, resolved, progress);

    SignificanceReport report;
    report.model.kind = model.kind_name();
    if (model.kind == NullModel::Kind::ItemsetMarginsSoft) {
        report.model.w = model.soft_weight;
        for (const auto& x : model.constraints.itemsets()) {
            std::vector<std::string> labels;
            labels.reserve(x.size());
            for (int c : x) labels.push_back(d.col_name(c));
            report.model.constraint_labels.push_back(std::move(labels));
        }
    }
    if (model.kind == NullModel::Kind::ClusterMargins)
        report.model.clustering_k = model.clustering.k();
    report.samples = resolved.samples;
    report.swap_attempts = *resolved.swap_attempts;
    report.seed = resolved.seed;
    report.alpha = alpha;
    report.adjusted = adjust;
    report.dataset_rows = d.rows();
    report.dataset_cols = d.cols();

    std::vector<double> randomized(samples.size());
    std::vector<double> raw_ps;
    raw_ps.reserve(stats.size());
    for (size_t si = 0; si < stats.size(); ++si) {
        const uint64_t stat_seed =
            derive_seed(resolved.seed, seed_tag::statistic, static_cast<uint64_t>(si));
        const double original = stats[si].evaluate(d, derive_seed(stat_seed, 0));
        for (size_t i = 0; i < samples.size(); ++i)
            randomized[i] = stats[si].evaluate(samples[i], derive_seed(stat_seed, i + 1));
        PatternResult result;
        result.pattern = stats[si].display_name(d);
        result.value = original;
        result.raw_p = empirical_p(original, randomized, stats[si].tail);
        raw_ps.push_back(result.raw_p);
        report.patterns.push_back(std::move(result));
    }
    if (adjust) {
        auto [adjusted, significant] = bh_adjust(raw_ps, alpha);
        for (size_t i = 0; i < report.patterns.size(); ++i) {
            report.patterns[i].adjusted_p = adjusted[i];
            report.patterns[i].significant = significant[i];
        }
    } else {
        for (auto& p : report.patterns) {
            p.adjusted_p = p.raw_p;
            p.significant = p.raw_p <= alpha;
        }
    }
    return report;
}

ContingencyTable contingency(const SignificanceReport& a, const SignificanceReport& b) {
    if (a.patterns.size() != b.patterns.size())
        throw UsageError("reports cover different pattern sets");
    ContingencyTable t;
    for (size_t i = 0; i < a.patterns.size(); ++i) {
        if (a.patterns[i].pattern != b.patterns[i].pattern)
            throw UsageError("reports cover different pattern sets");
        const bool sa = a.patterns[i].significant;
        const bool sb = b.patterns[i].significant;
        if (sa && sb)
            ++t.ss;
        else if (sa)
            ++t.sn;
        else if (sb)
            ++t.ns;
        else
            ++t.nn;
    }
    return t;
}

void write_contingency(std::ostream& out, const ContingencyTable& t,
                       const std::string& name_a, const std::string& name_b) {
    out << "\t" << name_b << ":N\t" << name_b << ":S\n";
    out << name_a << ":N\t" << t.nn << '\t' << t.ns << '\n';
    out << name_a << ":S\t" << t.sn << '\t' << t.ss << '\n';
}

std::pair<BinaryDataset, BinaryDataset> holdout_split(const BinaryDataset& d,
                                                      uint64_t seed) {
    const int m = d.rows();
    if (m < 2) throw UsageError("holdout split needs at least 2 rows");
    std::vector<int> rows(m);
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(derive_seed(seed, seed_tag::holdout));
    for (int i = m - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.below(static_cast<uint64_t>(i) + 1));
        std::swap(rows[i], rows[j]);
    }
    const int mine_size = (m + 1) / 2;
    std::vector<int> mine_rows(rows.begin(), rows.begin() + mine_size);
    std::vector<int> test_rows(rows.begin() + mine_size, rows.end());
    std::sort(mine_rows.begin(), mine_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {d.select_rows(mine_rows), d.select_rows(test_rows)};
}

namespace {

ordered_json report_to_json(const SignificanceReport& report) {
    ordered_json j;
    j["schema"] = "exchmine-report/1";
    j["dataset"] = {{"rows", report.dataset_rows}, {"cols", report.dataset_cols}};
    ordered_json model;
    model["kind"] = report.model.kind;
    if (report.model.kind == "itemset-soft") {
        model["w"] = report.model.w;
        model["constraints"] = report.model.constraint_labels;
    }
    if (report.model.kind == "cluster-margins") model["k"] = report.model.clustering_k;
    j["model"] = model;
    j["samples"] = report.samples;
    j["swap_attempts"] = report.swap_attempts;
    j["seed"] = report.seed;
    j["alpha"] = report.alpha;
    j["fdr_adjusted"] = report.adjusted;
    ordered_json patterns = ordered_json::array();
    for (const auto& p : report.patterns) {
        patterns.push_back({{"pattern", p.pattern},
                            {"value", p.value},
                            {"raw_p", p.raw_p},
                            {"adjusted_p", p.adjusted_p},
                            {"significant", p.significant}});
    }
    j["patterns"] = patterns;
    return j;
}

SignificanceReport report_from_json(const ordered_json& j) {
    if (!j.contains("schema") || j["schema"] != "exchmine-report/1")
        throw ParseError("not an exchmine report file");
    SignificanceReport report;
    report.dataset_rows = j["dataset"]["rows"].get<int>();
    report.dataset_cols = j["dataset"]["cols"].get<int>();
    report.model.kind = j["model"]["kind"].get<std::string>();
    if (j["model"].contains("w")) report.model.w = j["model"]["w"].get<double>();
    if (j["model"].contains("constraints"))
        report.model.constraint_labels =
            j["model"]["constraints"].get<std::vector<std::vector<std::string>>>();
    if (j["model"].contains("k")) report.model.clustering_k = j["model"]["k"].get<int>();
    report.samples = j["samples"].get<int>();
    report.swap_attempts = j["swap_attempts"].get<int64_t>();
    report.seed = j["seed"].get<uint64_t>();
    report.alpha = j["alpha"].get<double>();
    report.adjusted = j["fdr_adjusted"].get<bool>();
    for (const auto& p : j["patterns"]) {
        PatternResult r;
        r.pattern = p["pattern"].get<std::string>();
        r.value = p["value"].get<double>();
        r.raw_p = p["raw_p"].get<double>();
        r.adjusted_p = p["adjusted_p"].get<double>();
        r.significant = p["significant"].get<bool>();
        report.patterns.push_back(std::move(r));
    }
    return report;
}

std::string format_value(double v) {
    // Integral statistic values print without a decimal point.
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::ostringstream os;
        os << static_cast<int64_t>(v);
        return os.str();
    }
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

void write_report_tsv(std::ostream& out, const SignificanceReport& report) {
    out << "pattern\tvalue\traw_p\tadjusted_p\tsignificant\n";
    for (const auto& p : report.patterns) {
        out << p.pattern << '\t' << format_value(p.value) << '\t'
            << format_value(p.raw_p) << '\t' << format_value(p.adjusted_p) << '\t'
            << (p.significant ? "yes" : "no") << '\n';
    }
}

void write_report_json(std::ostream& out, const SignificanceReport& report) {
    out << report_to_json(report).dump(2) << '\n';
}

SignificanceReport load_report_json(std::istream& in) {
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        throw ParseError(std::string("bad report JSON: ") + e.what());
    }
    return report_from_json(j);
}

SignificanceReport load_report_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open report file '" + path + "'");
    return load_report_json(in);
}

}  // namespace exchmine
