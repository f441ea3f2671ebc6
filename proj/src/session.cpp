#include "exchmine/session.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace exchmine {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string content_hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open file '" + path + "' for hashing");
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    char hex[17];
    snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + hex;
}

SessionState make_session(const std::string& dataset_path, DatasetFormat format,
                          ItemsetFamily mined_itemsets, SessionConfig config) {
    SessionState state;
    state.dataset = load_dataset_file(dataset_path, format);
    state.dataset_path = dataset_path;
    state.dataset_format = format == DatasetFormat::DenseCsv ? "dense" : "transactions";
    state.dataset_hash = content_hash_file(dataset_path);
    state.mined = mined_itemsets.with_targets_from(state.dataset);
    state.constraints = ItemsetFamily::empty_with_targets();
    state.config = std::move(config);
    return state;
}

NullModel session_model(const SessionState& state) {
    if (state.constraints.empty()) return NullModel::margins();
    return NullModel::itemset_margins_soft(state.constraints, state.config.w);
}

namespace {

// Order for constraint selection: smaller raw p, then smaller itemset, then
// lexicographic items.
bool selection_before(double p_a, const Itemset& a, double p_b, const Itemset& b) {
    if (p_a != p_b) return p_a < p_b;
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

}  // namespace

const IterationRecord& iterate_smallest_p(SessionState& state) {
    bool any_candidate = false;
    for (const auto& x : state.mined.itemsets())
        if (!state.constraints.contains(x)) any_candidate = true;
    if (!any_candidate) throw SessionComplete("all mined itemsets are constrained");

    const int iteration = static_cast<int>(state.history.size());
    const NullModel model = session_model(state);

    ChainConfig cfg = state.config.chain;
    cfg.seed = derive_seed(state.config.chain.seed, seed_tag::session_iteration,
                           static_cast<uint64_t>(iteration));

    IterationRecord record;
    record.iteration = iteration;
    record.model_kind = model.kind_name();
    record.seed = cfg.seed;
    record.report = test_patterns(state.dataset, support_statistics(state.mined), model,
                                  cfg, state.config.alpha, state.config.adjust);
    record.significant_count = record.report.significant_count();

    const Itemset* best = nullptr;
    double best_p = 2.0;
    for (size_t i = 0; i < state.mined.size(); ++i) {
        const Itemset& x = state.mined[i];
        if (state.constraints.contains(x)) continue;
        const double p = record.report.patterns[i].raw_p;
        if (!best || selection_before(p, x, best_p, *best)) {
            best = &x;
            best_p = p;
        }
    }
    record.chosen_constraint = *best;
    state.constraints.add(*best, frequency(state.dataset, *best));
    state.history.push_back(std::move(record));
    return state.history.back();
}

SignificanceReport replay_iteration(const SessionState& state, size_t index) {
    if (index >= state.history.size()) throw UsageError("no such iteration");
    const IterationRecord& record = state.history[index];
    // The record's own provenance names the constraints that were active;
    // targets are reconstructible because they always equal the original
    // dataset's frequencies.
    NullModel model;
    if (record.model_kind == "margins") {
        model = NullModel::margins();
    } else if (record.model_kind == "itemset-soft") {
        ItemsetFamily active = ItemsetFamily::empty_with_targets();
        for (const auto& labels : record.report.model.constraint_labels) {
            std::vector<int> items;
            for (const auto& label : labels) {
                const int c = state.dataset.find_col(label);
                if (c < 0)
                    throw UsageError("recorded constraint references unknown column '" +
                                     label + "'");
                items.push_back(c);
            }
            const Itemset x = make_itemset(std::move(items), state.dataset.cols());
            active.add(x, frequency(state.dataset, x));
        }
        model = NullModel::itemset_margins_soft(std::move(active),
                                                record.report.model.w);
    } else {
        throw UsageError("cannot replay a '" + record.model_kind + "' record");
    }
    ChainConfig cfg = state.config.chain;
    cfg.seed = record.seed;
    return test_patterns(state.dataset, support_statistics(state.mined), model, cfg,
                         state.config.alpha, state.config.adjust);
}

namespace {

std::vector<size_t> rank_by(const SignificanceReport& report,
                            const ItemsetFamily& patterns,
                            const std::vector<double>& keys) {
    if (report.patterns.size() != patterns.size())
        throw UsageError("report does not match the pattern family");
    std::vector<size_t> order(patterns.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return selection_before(keys[a], patterns[a], keys[b], patterns[b]);
    });
    return order;
}

}  // namespace

ItemsetFamily select_top_significant(const SignificanceReport& report,
                                     const ItemsetFamily& patterns,
                                     const BinaryDataset& d, size_t n, bool* truncated) {
    if (report.patterns.empty()) throw UsageError("empty report");
    std::vector<double> keys;
    keys.reserve(report.patterns.size());
    for (const auto& p : report.patterns) keys.push_back(p.raw_p);
    const auto order = rank_by(report, patterns, keys);
    if (truncated) *truncated = n > order.size();
    const size_t take = std::min(n, order.size());
    ItemsetFamily out = ItemsetFamily::empty_with_targets();
    for (size_t i = 0; i < take; ++i)
        out.add(patterns[order[i]], frequency(d, patterns[order[i]]));
    return out;
}

ItemsetFamily select_by_p_delta(const SignificanceReport& report_a,
                                const SignificanceReport& report_b,
                                const ItemsetFamily& patterns, const BinaryDataset& d,
                                size_t n) {
    if (report_a.patterns.size() != report_b.patterns.size())
        throw UsageError("reports cover different pattern sets");
    std::vector<double> keys;
    keys.reserve(report_a.patterns.size());
    for (size_t i = 0; i < report_a.patterns.size(); ++i) {
        if (report_a.patterns[i].pattern != report_b.patterns[i].pattern)
            throw UsageError("reports cover different pattern sets");
        // Negated: rank_by sorts ascending, we want the largest increase.
        keys.push_back(report_a.patterns[i].raw_p - report_b.patterns[i].raw_p);
    }
    const auto order = rank_by(report_a, patterns, keys);
    const size_t take = std::min(n, order.size());
    ItemsetFamily out = ItemsetFamily::empty_with_targets();
    for (size_t i = 0; i < take; ++i)
        out.add(patterns[order[i]], frequency(d, patterns[order[i]]));
    return out;
}

void add_constraint(SessionState& state, const Itemset& x) {
    state.constraints.add(x, frequency(state.dataset, x));
}

bool remove_constraint(SessionState& state, const Itemset& x) {
    if (!state.constraints.contains(x)) return false;
    ItemsetFamily rebuilt = ItemsetFamily::empty_with_targets();
    for (size_t i = 0; i < state.constraints.size(); ++i)
        if (state.constraints[i] != x)
            rebuilt.add(state.constraints[i], state.constraints.targets()[i]);
    state.constraints = std::move(rebuilt);
    return true;
}

namespace {

ordered_json family_to_json(const ItemsetFamily& family, const BinaryDataset& d,
                            const char* freq_key) {
    ordered_json arr = ordered_json::array();
    for (size_t i = 0; i < family.size(); ++i) {
        ordered_json entry;
        ordered_json items = ordered_json::array();
        for (int c : family[i]) items.push_back(d.col_name(c));
        entry["items"] = items;
        if (family.has_targets()) entry[freq_key] = family.targets()[i];
        arr.push_back(entry);
    }
    return arr;
}

ItemsetFamily family_from_json(const ordered_json& arr, const BinaryDataset& d,
                               const char* freq_key) {
    ItemsetFamily out = ItemsetFamily::empty_with_targets();
    for (const auto& entry : arr) {
        std::vector<int> items;
        for (const auto& label : entry["items"]) {
            const int c = d.find_col(label.get<std::string>());
            if (c < 0)
                throw ParseError("session references unknown column '" +
                                 label.get<std::string>() + "'");
            items.push_back(c);
        }
        out.add(make_itemset(std::move(items), d.cols()), entry[freq_key].get<int64_t>());
    }
    return out;
}

ordered_json report_json_for_session(const SignificanceReport& report) {
    std::ostringstream os;
    write_report_json(os, report);
    return ordered_json::parse(os.str());
}

}  // namespace

std::string report_fingerprint(const SignificanceReport& report) {
    std::ostringstream os;
    write_report_json(os, report);
    return os.str();
}

void save_session(std::ostream& out, const SessionState& state) {
    ordered_json j;
    j["schema"] = "exchmine-session/1";
    j["dataset"] = {{"path", state.dataset_path},
                    {"format", state.dataset_format},
                    {"hash", state.dataset_hash},
                    {"rows", state.dataset.rows()},
                    {"cols", state.dataset.cols()}};
    j["config"] = {{"samples", state.config.chain.samples},
                   {"swap_attempts", state.config.chain.swap_attempts
                                         ? ordered_json(*state.config.chain.swap_attempts)
                                         : ordered_json(nullptr)},
                   {"seed", state.config.chain.seed},
                   {"alpha", state.config.alpha},
                   {"w", state.config.w},
                   {"fdr", state.config.adjust}};
    j["clustering"] =
        state.clustering ? ordered_json(state.clustering->assignment()) : ordered_json(nullptr);
    j["mined"] = family_to_json(state.mined, state.dataset, "freq");
    j["constraints"] = family_to_json(state.constraints, state.dataset, "target");
    ordered_json history = ordered_json::array();
    for (const auto& rec : state.history) {
        ordered_json r;
        r["iteration"] = rec.iteration;
        r["model"] = rec.model_kind;
        r["seed"] = rec.seed;
        if (rec.chosen_constraint) {
            ordered_json items = ordered_json::array();
            for (int c : *rec.chosen_constraint) items.push_back(state.dataset.col_name(c));
            r["chosen"] = items;
        } else {
            r["chosen"] = nullptr;
        }
        r["significant_count"] = rec.significant_count;
        r["report"] = report_json_for_session(rec.report);
        history.push_back(std::move(r));
    }
    j["history"] = history;
    out << j.dump(2) << '\n';
}

void save_session_file(const std::string& path, const SessionState& state) {
    // Write-to-temp and atomic rename; a crash mid-write never corrupts an
    // existing session file.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("cannot write session file '" + path + "'");
        save_session(out, state);
        out.flush();
        if (!out) throw UsageError("failed writing session file '" + path + "'");
    }
    fs::rename(tmp, path);
}

SessionState load_session(std::istream& in, const std::string& base_dir) {
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        throw ParseError(std::string("corrupt session file: ") + e.what());
    }
    if (!j.contains("schema"))
        throw ParseError("corrupt session file: missing schema tag");
    if (j["schema"] != "exchmine-session/1")
        throw ParseError("unsupported session schema '" +
                         j["schema"].get<std::string>() + "', expected exchmine-session/1");

    SessionState state;
    state.dataset_path = j["dataset"]["path"].get<std::string>();
    state.dataset_format = j["dataset"]["format"].get<std::string>();
    state.dataset_hash = j["dataset"]["hash"].get<std::string>();
    fs::path dataset_path(state.dataset_path);
    if (dataset_path.is_relative() && !base_dir.empty())
        dataset_path = fs::path(base_dir) / dataset_path;
    const std::string resolved = dataset_path.string();
    const std::string actual_hash = content_hash_file(resolved);
    if (actual_hash != state.dataset_hash)
        throw UsageError("dataset '" + resolved + "' does not match the session hash (" +
                         actual_hash + " vs " + state.dataset_hash + ")");
    state.dataset = load_dataset_file(resolved, parse_dataset_format(state.dataset_format));

    const auto& cfg = j["config"];
    state.config.chain.samples = cfg["samples"].get<int>();
    if (!cfg["swap_attempts"].is_null())
        state.config.chain.swap_attempts = cfg["swap_attempts"].get<int64_t>();
    state.config.chain.seed = cfg["seed"].get<uint64_t>();
    state.config.alpha = cfg["alpha"].get<double>();
    state.config.w = cfg["w"].get<double>();
    state.config.adjust = cfg["fdr"].get<bool>();

    if (!j["clustering"].is_null())
        state.clustering = RowClustering(j["clustering"].get<std::vector<int>>());

    state.mined = family_from_json(j["mined"], state.dataset, "freq");
    state.constraints = family_from_json(j["constraints"], state.dataset, "target");

    for (const auto& r : j["history"]) {
        IterationRecord rec;
        rec.iteration = r["iteration"].get<int>();
        rec.model_kind = r["model"].get<std::string>();
        rec.seed = r["seed"].get<uint64_t>();
        if (!r["chosen"].is_null()) {
            std::vector<int> items;
            for (const auto& label : r["chosen"]) {
                const int c = state.dataset.find_col(label.get<std::string>());
                if (c < 0)
                    throw ParseError("session references unknown column '" +
                                     label.get<std::string>() + "'");
                items.push_back(c);
            }
            rec.chosen_constraint = make_itemset(std::move(items), state.dataset.cols());
        }
        rec.significant_count = r["significant_count"].get<int>();
        std::istringstream rs(r["report"].dump());
        rec.report = load_report_json(rs);
        if (rec.significant_count != rec.report.significant_count())
            throw ParseError("corrupt session file: significant_count disagrees with "
                             "the stored report");
        state.history.push_back(std::move(rec));
    }
    return state;
}

SessionState load_session_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open session file '" + path + "'");
    return load_session(in, fs::path(path).parent_path().string());
}

}  // namespace exchmine
