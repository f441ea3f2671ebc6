#include "exchmine/nullmodel.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace exchmine {

NullModel NullModel::margins() { return NullModel{}; }

NullModel NullModel::cluster_margins(RowClustering clustering) {
    NullModel m;
    m.kind = Kind::ClusterMargins;
    m.clustering = std::move(clustering);
    return m;
}

NullModel NullModel::itemset_margins_soft(ItemsetFamily constraints, double w) {
    if (!constraints.has_targets())
        throw UsageError("soft itemset model needs target frequencies");
    if (!(w > 0.0)) throw UsageError("soft itemset model needs w > 0");
    NullModel m;
    m.kind = Kind::ItemsetMarginsSoft;
    m.constraints = std::move(constraints);
    m.soft_weight = w;
    return m;
}

std::string NullModel::kind_name() const {
    switch (kind) {
        case Kind::Margins: return "margins";
        case Kind::ClusterMargins: return "cluster-margins";
        case Kind::ItemsetMarginsSoft: return "itemset-soft";
    }
    return "?";
}

StepResult margins_step(BinaryDataset& d, Rng& rng) {
    const uint64_t n_ones = static_cast<uint64_t>(d.ones_count());
    if (n_ones < 2) return StepResult::SelfLoop;
    const uint32_t pos_a = d.one_position(rng.below(n_ones));
    const uint32_t pos_b = d.one_position(rng.below(n_ones));
    Swap sw{d.position_row(pos_a), d.position_row(pos_b), d.position_col(pos_a),
            d.position_col(pos_b)};
    if (sw.row1 == sw.row2 || sw.col1 == sw.col2 || d.get(sw.row1, sw.col2) ||
        d.get(sw.row2, sw.col1))
        return StepResult::SelfLoop;
    d.apply_swap(sw);
    return StepResult::Applied;
}

ClusterOnesIndex::ClusterOnesIndex(const BinaryDataset& d, const RowClustering& clustering)
    : cells_(clustering.k()),
      slot_(static_cast<size_t>(d.rows()) * std::max(d.cols(), 1), 0) {
    if (clustering.n_rows() != d.rows())
        throw UsageError("clustering does not cover the dataset rows");
    for (int64_t i = 0; i < d.ones_count(); ++i) {
        const uint32_t pos = d.one_position(static_cast<size_t>(i));
        const int cluster = clustering.cluster_of(d.position_row(pos));
        slot_[pos] = static_cast<uint32_t>(cells_[cluster].size());
        cells_[cluster].push_back(pos);
    }
}

void ClusterOnesIndex::on_swap(const BinaryDataset& d, const Swap& sw, int cluster) {
    auto& list = cells_[cluster];
    const uint32_t cols = static_cast<uint32_t>(d.cols());
    const uint32_t from_a = static_cast<uint32_t>(sw.row1) * cols + sw.col1;
    const uint32_t to_a = static_cast<uint32_t>(sw.row1) * cols + sw.col2;
    const uint32_t from_b = static_cast<uint32_t>(sw.row2) * cols + sw.col2;
    const uint32_t to_b = static_cast<uint32_t>(sw.row2) * cols + sw.col1;
    uint32_t s = slot_[from_a];
    list[s] = to_a;
    slot_[to_a] = s;
    s = slot_[from_b];
    list[s] = to_b;
    slot_[to_b] = s;
}

StepResult cluster_step(BinaryDataset& d, ClusterOnesIndex& index, Rng& rng) {
    if (index.n_clusters() == 0) return StepResult::SelfLoop;
    const int cluster = static_cast<int>(rng.below(index.n_clusters()));
    const auto& cells = index.cells(cluster);
    if (cells.size() < 2) return StepResult::SelfLoop;
    const uint32_t pos_a = cells[rng.below(cells.size())];
    const uint32_t pos_b = cells[rng.below(cells.size())];
    Swap sw{d.position_row(pos_a), d.position_row(pos_b), d.position_col(pos_a),
            d.position_col(pos_b)};
    if (sw.row1 == sw.row2 || sw.col1 == sw.col2 || d.get(sw.row1, sw.col2) ||
        d.get(sw.row2, sw.col1))
        return StepResult::SelfLoop;
    d.apply_swap(sw);
    index.on_swap(d, sw, cluster);
    return StepResult::Applied;
}

ItemsetChainState::ItemsetChainState(const BinaryDataset& d, const ItemsetFamily& family) {
    freqs.reserve(family.size());
    for (size_t i = 0; i < family.size(); ++i) freqs.push_back(frequency(d, family[i]));
}

StepResult itemset_step(BinaryDataset& d, const ItemsetFamily& family,
                        const ItemsetIndex& index, ItemsetChainState& state, double w,
                        Rng& rng) {
    const uint64_t n_ones = static_cast<uint64_t>(d.ones_count());
    if (n_ones < 2) return StepResult::SelfLoop;
    const uint32_t pos_a = d.one_position(rng.below(n_ones));
    const uint32_t pos_b = d.one_position(rng.below(n_ones));
    Swap sw{d.position_row(pos_a), d.position_row(pos_b), d.position_col(pos_a),
            d.position_col(pos_b)};
    if (sw.row1 == sw.row2 || sw.col1 == sw.col2 || d.get(sw.row1, sw.col2) ||
        d.get(sw.row2, sw.col1))
        return StepResult::SelfLoop;
    const int64_t delta =
        incremental_difference_delta(d, family, index, sw, state.freqs, state.touched);
    // One accept draw per applicable proposal; thresholds >= 1 always pass.
    const double threshold = std::exp(-w * static_cast<double>(delta));
    if (!(rng.uniform01() < threshold)) return StepResult::Rejected;
    d.apply_swap(sw);
    for (const auto& [i, f] : state.touched) state.freqs[i] = f;
#ifndef NDEBUG
    for (size_t i = 0; i < family.size(); ++i)
        assert(state.freqs[i] == frequency(d, family[i]));
#endif
    return StepResult::Applied;
}

SwapChain::SwapChain(BinaryDataset dataset, const NullModel& model)
    : dataset_(std::move(dataset)), model_(&model) {
    switch (model.kind) {
        case NullModel::Kind::Margins: break;
        case NullModel::Kind::ClusterMargins:
            cluster_index_ = std::make_unique<ClusterOnesIndex>(dataset_, model.clustering);
            break;
        case NullModel::Kind::ItemsetMarginsSoft:
            itemset_index_ = std::make_unique<ItemsetIndex>(model.constraints, dataset_.cols());
            itemset_state_ = std::make_unique<ItemsetChainState>(dataset_, model.constraints);
            break;
    }
}

StepResult SwapChain::step(Rng& rng) {
    switch (model_->kind) {
        case NullModel::Kind::Margins: return margins_step(dataset_, rng);
        case NullModel::Kind::ClusterMargins:
            return cluster_step(dataset_, *cluster_index_, rng);
        case NullModel::Kind::ItemsetMarginsSoft:
            return itemset_step(dataset_, model_->constraints, *itemset_index_,
                                *itemset_state_, model_->soft_weight, rng);
    }
    return StepResult::SelfLoop;
}

void SwapChain::run(int64_t attempts, Rng& rng) {
    if (dataset_.ones_count() < 2) return;
    for (int64_t i = 0; i < attempts; ++i) step(rng);
}

int64_t SwapChain::current_difference(const ItemsetFamily& family) const {
    return itemset_difference(family, dataset_);
}

namespace {

int worker_count(int jobs) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("EXCHMINE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, cap);
    }
    return std::min(hw, jobs);
}

}  // namespace

std::vector<BinaryDataset> sample(const BinaryDataset& d, const NullModel& model,
                                  const ChainConfig& cfg, const ProgressFn& progress) {
    if (cfg.samples < 1) throw UsageError("sample count must be >= 1");
    if (!cfg.swap_attempts)
        throw UsageError("swap attempts not resolved; call resolve_chain_config first");
    const int64_t attempts = *cfg.swap_attempts;
    if (attempts < 0) throw UsageError("swap attempts must be >= 0");

    // Backward phase (same kernel; the chains are time-reversible).
    SwapChain backward(d, model);
    {
        Rng rng(derive_seed(cfg.seed, seed_tag::backward_chain));
        backward.run(attempts, rng);
    }
    const BinaryDataset start = backward.take_dataset();

    std::vector<BinaryDataset> out(cfg.samples);
    std::atomic<int> next_chain{0};
    std::atomic<int> completed{0};
    std::mutex progress_mutex;
    int last_reported = 0;
    auto work = [&]() {
        for (;;) {
            const int i = next_chain.fetch_add(1);
            if (i >= cfg.samples) return;
            SwapChain chain(start, model);
            Rng rng(derive_seed(cfg.seed, seed_tag::forward_chain, static_cast<uint64_t>(i)));
            chain.run(attempts, rng);
            out[i] = chain.take_dataset();
            const int done = completed.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                if (done > last_reported) {
                    last_reported = done;
                    progress(done, cfg.samples);
                }
            }
        }
    };
    const int workers = worker_count(cfg.samples);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return out;
}

int64_t choose_swap_count(const BinaryDataset& d, const NullModel& model, uint64_t seed,
                          bool* capped) {
    if (capped) *capped = false;
    const int64_t ones = d.ones_count();
    if (ones == 0) return 0;  // no swaps are possible at all
    const int64_t cap = ones << 20;

    auto mean_distance = [&](int64_t attempts, int stage) {
        double total = 0.0;
        for (int i = 0; i < 5; ++i) {
            SwapChain chain(d, model);
            Rng rng(derive_seed(derive_seed(seed, seed_tag::convergence, stage), i));
            chain.run(attempts, rng);
            total += static_cast<double>(frobenius_sq_distance(d, chain.dataset()));
        }
        return total / 5.0;
    };

    int64_t k = ones;
    int stage = 0;
    double prev = mean_distance(k, stage++);
    for (;;) {
        if (k >= cap || k * 2 < k) {
            if (capped) *capped = true;
            return cap;
        }
        k *= 2;
        const double cur = mean_distance(k, stage++);
        if (std::abs(cur - prev) / std::max(prev, 1e-12) < 0.01) return k;
        prev = cur;
    }
}

ChainConfig resolve_chain_config(const BinaryDataset& d, const NullModel& model,
                                 const ChainConfig& cfg, bool* capped) {
    ChainConfig out = cfg;
    if (!out.swap_attempts)
        out.swap_attempts = choose_swap_count(d, model, cfg.seed, capped);
    return out;
}

namespace {

void enumerate_rows(BinaryDataset& work, const std::vector<int>& row_margins,
                    std::vector<int>& col_remaining, int row,
                    std::vector<BinaryDataset>& out) {
    const int m = work.rows();
    const int n = work.cols();
    if (row == m) {
        for (int c = 0; c < n; ++c)
            if (col_remaining[c] != 0) return;
        out.push_back(work);
        return;
    }
    const int need = row_margins[row];
    // Backtracking over column combinations for this row.
    auto rec = [&](auto&& self, int start, int left) -> void {
        if (left == 0) {
            enumerate_rows(work, row_margins, col_remaining, row + 1, out);
            return;
        }
        for (int c = start; c <= n - left; ++c) {
            if (col_remaining[c] == 0) continue;
            --col_remaining[c];
            work.set(row, c, true);
            self(self, c + 1, left - 1);
            work.set(row, c, false);
            ++col_remaining[c];
        }
    };
    rec(rec, 0, need);
}

}  // namespace

std::vector<BinaryDataset> enumerate_margin_class(const BinaryDataset& d) {
    const int64_t cells = static_cast<int64_t>(d.rows()) * d.cols();
    if (cells > 20) throw UsageError("margin class enumeration is limited to 20 cells");
    BinaryDataset work(d.rows(), d.cols());
    std::vector<int> col_remaining = d.col_margins();
    std::vector<BinaryDataset> out;
    enumerate_rows(work, d.row_margins(), col_remaining, 0, out);
    return out;
}

}  // namespace exchmine
