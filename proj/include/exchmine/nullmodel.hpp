#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "exchmine/clustering.hpp"
#include "exchmine/dataset.hpp"
#include "exchmine/itemsets.hpp"
#include "exchmine/rng.hpp"

namespace exchmine {

// Which statistics of the original dataset the sampler preserves. All three
// kinds preserve row and column margins; ClusterMargins additionally fixes
// per-cluster row/column sums (hence centroids and the clustering error);
// ItemsetMarginsSoft concentrates on small family-frequency differences with
// energy scale w.
struct NullModel {
    enum class Kind { Margins, ClusterMargins, ItemsetMarginsSoft };

    Kind kind = Kind::Margins;
    RowClustering clustering;   // ClusterMargins only
    ItemsetFamily constraints;  // ItemsetMarginsSoft only; targets required
    double soft_weight = 4.0;   // w > 0

    static NullModel margins();
    static NullModel cluster_margins(RowClustering clustering);
    static NullModel itemset_margins_soft(ItemsetFamily constraints, double w);

    std::string kind_name() const;
};

struct ChainConfig {
    // Swap attempts per chain segment (K); nullopt = resolve automatically
    // with choose_swap_count.
    std::optional<int64_t> swap_attempts;
    uint64_t seed = 0;
    int samples = 1000;  // k
};

enum class StepResult { Applied, Rejected, SelfLoop };

// One attempt of the margin-preserving kernel: draw two 1-cells uniformly
// with replacement; if they sit in distinct rows and columns and the opposite
// corners are 0, swap, else self-loop.
StepResult margins_step(BinaryDataset& d, Rng& rng);

// Per-cluster index of 1-cell positions; within-cluster swaps keep every
// 1-cell in its cluster, so the structure is update-in-place like the global
// ones index.
class ClusterOnesIndex {
public:
    ClusterOnesIndex(const BinaryDataset& d, const RowClustering& clustering);
    int n_clusters() const { return static_cast<int>(cells_.size()); }
    const std::vector<uint32_t>& cells(int cluster) const { return cells_[cluster]; }
    void on_swap(const BinaryDataset& d, const Swap& sw, int cluster);

private:
    std::vector<std::vector<uint32_t>> cells_;
    std::vector<uint32_t> slot_;  // position -> index within its cluster list
};

// One attempt of the cluster-margin kernel: draw a cluster uniformly, then
// two 1-cells uniformly from that cluster's rows.
StepResult cluster_step(BinaryDataset& d, ClusterOnesIndex& index, Rng& rng);

// State of the soft itemset kernel: current family frequencies plus the
// read-only inverted index.
struct ItemsetChainState {
    ItemsetChainState(const BinaryDataset& d, const ItemsetFamily& family);
    std::vector<int64_t> freqs;
    std::vector<std::pair<int, int64_t>> touched;  // scratch
};

// One Metropolis attempt: propose like margins_step, accept an applicable
// swap with probability min(1, exp(-w * delta_h)).
StepResult itemset_step(BinaryDataset& d, const ItemsetFamily& family,
                        const ItemsetIndex& index, ItemsetChainState& state, double w,
                        Rng& rng);

// A running chain over its own copy of the dataset, dispatching on the model
// kind. Constraint-derived state (cluster index, family frequencies) is built
// once at construction.
class SwapChain {
public:
    SwapChain(BinaryDataset dataset, const NullModel& model);
    StepResult step(Rng& rng);
    void run(int64_t attempts, Rng& rng);
    const BinaryDataset& dataset() const { return dataset_; }
    BinaryDataset take_dataset() { return std::move(dataset_); }
    int64_t current_difference(const ItemsetFamily& family) const;

private:
    BinaryDataset dataset_;
    const NullModel* model_;
    std::unique_ptr<ClusterOnesIndex> cluster_index_;
    std::unique_ptr<ItemsetIndex> itemset_index_;
    std::unique_ptr<ItemsetChainState> itemset_state_;
};

using ProgressFn = std::function<void(int completed, int total)>;

// Backward-forward exchangeable sampling: run the kernel K steps from `d` to
// reach a fresh start, then k independent K-step chains from there (the
// kernels are time-reversible, so the backward run reuses the forward
// kernel). The multiset {d, samples...} is exchangeable under the model.
// Forward chains run in parallel; results are in chain order and depend only
// on (dataset, model, cfg). cfg.swap_attempts must be resolved.
std::vector<BinaryDataset> sample(const BinaryDataset& d, const NullModel& model,
                                  const ChainConfig& cfg,
                                  const ProgressFn& progress = {});

// Doubling heuristic for the swap-attempt count: start K at the number of
// ones, randomize 5 times with K attempts per stage, and stop once the mean
// Frobenius distance to the original changes by less than 1% between stages.
// Hard cap at 2^20 * ones (sets *capped when provided).
int64_t choose_swap_count(const BinaryDataset& d, const NullModel& model, uint64_t seed,
                          bool* capped = nullptr);

// cfg with swap_attempts made concrete (auto resolved via choose_swap_count).
ChainConfig resolve_chain_config(const BinaryDataset& d, const NullModel& model,
                                 const ChainConfig& cfg, bool* capped = nullptr);

// Every 0/1 matrix with d's exact row and column margins, by row-wise
// backtracking; test oracle, guarded to m*n <= 20 cells.
std::vector<BinaryDataset> enumerate_margin_class(const BinaryDataset& d);

}  // namespace exchmine
