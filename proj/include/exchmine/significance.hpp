#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "exchmine/clustering.hpp"
#include "exchmine/dataset.hpp"
#include "exchmine/itemsets.hpp"
#include "exchmine/nullmodel.hpp"

namespace exchmine {

enum class Tail { Greater, Less, TwoSided };

std::string tail_name(Tail t);
Tail parse_tail(const std::string& name);

// A structural measure: one number per dataset whose extremity is tested.
struct TestStatistic {
    enum class Kind { ItemsetSupport, ClusteringError, NumFrequentItemsets, Custom };

    Kind kind = Kind::Custom;
    Tail tail = Tail::Greater;
    Itemset itemset;                    // ItemsetSupport
    int clusters = 0;                   // ClusteringError
    int restarts = 10;
    int64_t min_support = 0;            // NumFrequentItemsets
    int max_size = 0;
    std::string custom_name;
    std::function<double(const BinaryDataset&, uint64_t)> evaluator;  // Custom

    // Higher support is more extreme.
    static TestStatistic itemset_support(Itemset x);
    // Lower error is more extreme; each evaluation re-runs k-means.
    static TestStatistic clustering_error_stat(int k, int restarts = 10);
    static TestStatistic frequent_count(int64_t min_support, int max_size);
    static TestStatistic custom(std::string name,
                                std::function<double(const BinaryDataset&, uint64_t)> fn,
                                Tail tail);

    std::string display_name(const BinaryDataset& d) const;
    // `seed` feeds statistic-internal randomness (k-means restarts).
    double evaluate(const BinaryDataset& d, uint64_t seed) const;
};

// (count of randomized values at least as extreme + 1) / (k + 1). Never 0,
// never above 1. Two-sided doubles the smaller one-sided value, clipped at 1.
double empirical_p(double original, const std::vector<double>& randomized, Tail tail);

// Benjamini-Hochberg step-up adjustment; input order preserved. Significant
// means adjusted <= alpha.
std::pair<std::vector<double>, std::vector<bool>> bh_adjust(
    const std::vector<double>& raw_ps, double alpha);

struct PatternResult {
    std::string pattern;
    double value = 0.0;  // statistic on the original dataset
    double raw_p = 1.0;
    double adjusted_p = 1.0;
    bool significant = false;
};

struct ModelProvenance {
    std::string kind;
    double w = 0.0;
    // Constraint itemsets as column-label lists, in family order.
    std::vector<std::vector<std::string>> constraint_labels;
    int clustering_k = 0;
};

struct SignificanceReport {
    std::vector<PatternResult> patterns;
    ModelProvenance model;
    int samples = 0;          // k
    int64_t swap_attempts = 0;  // K actually used
    uint64_t seed = 0;
    double alpha = 0.05;
    bool adjusted = true;
    int dataset_rows = 0;
    int dataset_cols = 0;

    int significant_count() const;
};

// Draws one shared sample set under the model, evaluates every statistic on
// the original and each sample, and assembles per-pattern empirical p-values
// with optional BH adjustment across exactly the supplied statistics.
SignificanceReport test_patterns(const BinaryDataset& d,
                                 const std::vector<TestStatistic>& stats,
                                 const NullModel& model, const ChainConfig& cfg,
                                 double alpha, bool adjust,
                                 const ProgressFn& progress = {});

// Convenience: one ItemsetSupport statistic per family member.
std::vector<TestStatistic> support_statistics(const ItemsetFamily& family);

// Pattern counts by (significant in a?, significant in b?).
struct ContingencyTable {
    int64_t nn = 0;  // neither
    int64_t ns = 0;  // only in b
    int64_t sn = 0;  // only in a
    int64_t ss = 0;  // both
    int64_t total() const { return nn + ns + sn + ss; }
};

// Requires both reports to cover the same patterns in the same order.
ContingencyTable contingency(const SignificanceReport& a, const SignificanceReport& b);
void write_contingency(std::ostream& out, const ContingencyTable& t,
                       const std::string& name_a, const std::string& name_b);

// Random row split into a ceil(m/2) mining half and a floor(m/2) testing
// half; columns identical, rows keep their original relative order.
std::pair<BinaryDataset, BinaryDataset> holdout_split(const BinaryDataset& d,
                                                      uint64_t seed);

// TSV: pattern, value, raw_p, adjusted_p, significant. JSON embeds the full
// provenance. Both are byte-stable for identical reports.
void write_report_tsv(std::ostream& out, const SignificanceReport& report);
void write_report_json(std::ostream& out, const SignificanceReport& report);
SignificanceReport load_report_json(std::istream& in);
SignificanceReport load_report_json_file(const std::string& path);

}  // namespace exchmine
