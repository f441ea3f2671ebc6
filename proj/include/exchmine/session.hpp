#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exchmine/dataset.hpp"
#include "exchmine/dataset_io.hpp"
#include "exchmine/significance.hpp"

namespace exchmine {

// Raised by iterate_smallest_p once every mined itemset is constrained.
struct SessionComplete : Error {
    using Error::Error;
};

struct SessionConfig {
    ChainConfig chain;
    double alpha = 0.05;
    double w = 4.0;
    bool adjust = true;
};

struct IterationRecord {
    int iteration = 0;
    std::string model_kind;
    uint64_t seed = 0;  // reproduces this record's report
    SignificanceReport report;
    std::optional<Itemset> chosen_constraint;
    int significant_count = 0;
};

// The iterative loop's state: the dataset under test, the mined patterns,
// the constraints accepted so far (margins stay implicit: every model here
// preserves them), and the append-only history.
struct SessionState {
    BinaryDataset dataset;
    std::string dataset_path;
    std::string dataset_format = "dense";
    std::string dataset_hash;
    ItemsetFamily mined;        // targets = frequencies in `dataset`
    ItemsetFamily constraints;  // targets = frequencies in `dataset`
    std::optional<RowClustering> clustering;
    SessionConfig config;
    std::vector<IterationRecord> history;
};

// FNV-1a over the file bytes, "fnv1a64:<16 hex digits>".
std::string content_hash_file(const std::string& path);

SessionState make_session(const std::string& dataset_path, DatasetFormat format,
                          ItemsetFamily mined_itemsets, SessionConfig config);

// The model the next iteration will sample from: Margins while no constraint
// is accepted, afterwards ItemsetMarginsSoft over the accumulated set.
NullModel session_model(const SessionState& state);

// Runs one iteration: tests every mined itemset under the current model,
// appends the record, and adds the not-yet-constrained itemset with the
// smallest raw p (ties: smaller, then lexicographically first) to the
// constraints with its frequency in the original dataset as target. Throws
// SessionComplete when no candidate remains.
const IterationRecord& iterate_smallest_p(SessionState& state);

// Recomputes the report of history[index] from its stored seed and the
// constraints that were active then; bit-identical to the stored one.
SignificanceReport replay_iteration(const SessionState& state, size_t index);

// The n patterns with the smallest raw p (ties as in iterate_smallest_p),
// as a family targeted on `d`. n beyond the report size returns everything
// (sets *truncated when provided).
ItemsetFamily select_top_significant(const SignificanceReport& report,
                                     const ItemsetFamily& patterns,
                                     const BinaryDataset& d, size_t n,
                                     bool* truncated = nullptr);

// The n patterns with the largest raw_p(b) - raw_p(a).
ItemsetFamily select_by_p_delta(const SignificanceReport& report_a,
                                const SignificanceReport& report_b,
                                const ItemsetFamily& patterns, const BinaryDataset& d,
                                size_t n);

void add_constraint(SessionState& state, const Itemset& x);
bool remove_constraint(SessionState& state, const Itemset& x);

// Versioned JSON. The dataset travels by reference (path + content hash);
// loading re-reads it relative to the session file and verifies the hash.
void save_session(std::ostream& out, const SessionState& state);
void save_session_file(const std::string& path, const SessionState& state);
SessionState load_session(std::istream& in, const std::string& base_dir);
SessionState load_session_file(const std::string& path);

std::string report_fingerprint(const SignificanceReport& report);

}  // namespace exchmine
