#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exchmine/dataset.hpp"

namespace exchmine {

// Strictly increasing column indices; may be empty.
using Itemset = std::vector<int>;

// Canonical form: sorted, duplicates rejected.
Itemset make_itemset(std::vector<int> items, int n_cols);

std::string itemset_label(const Itemset& x, const BinaryDataset& d);

// Ordered collection of distinct itemsets, optionally with target frequencies
// (the frequencies in a reference dataset a sampler should preserve).
class ItemsetFamily {
public:
    ItemsetFamily() = default;
    // Deduplicates, keeping first occurrence. Target lists must align 1:1.
    explicit ItemsetFamily(std::vector<Itemset> itemsets,
                           std::optional<std::vector<int64_t>> target_freqs = {});
    // Empty family that accepts targeted adds.
    static ItemsetFamily empty_with_targets();

    size_t size() const { return itemsets_.size(); }
    bool empty() const { return itemsets_.empty(); }
    const std::vector<Itemset>& itemsets() const { return itemsets_; }
    const Itemset& operator[](size_t i) const { return itemsets_[i]; }
    bool has_targets() const { return targets_.has_value(); }
    const std::vector<int64_t>& targets() const;
    bool contains(const Itemset& x) const;

    void add(const Itemset& x, std::optional<int64_t> target = {});

    // Copy with targets set to the frequencies in `d`.
    ItemsetFamily with_targets_from(const BinaryDataset& d) const;

private:
    std::vector<Itemset> itemsets_;
    std::optional<std::vector<int64_t>> targets_;
};

// Number of rows covering X (all columns of X set); the empty itemset is
// covered by every row. Throws UsageError on out-of-range columns.
int64_t frequency(const BinaryDataset& d, const Itemset& x);

// Column-major bitmaps of a dataset; frequency queries become word-wise ANDs.
class ColumnBits {
public:
    explicit ColumnBits(const BinaryDataset& d);
    int64_t frequency(const Itemset& x) const;
    int rows() const { return rows_; }

private:
    int rows_ = 0;
    int words_ = 0;
    std::vector<uint64_t> bits_;  // column-major
    mutable std::vector<uint64_t> scratch_;
};

// All itemsets of size in [1, max_size] with frequency >= min_support,
// sorted by (size, lexicographic items), with frequencies as targets.
// Levelwise candidate generation with subset pruning.
ItemsetFamily mine_frequent(const BinaryDataset& d, int64_t min_support, int max_size);

// Sum over the family of |target - fr(d_hat; X)|. Requires targets.
int64_t itemset_difference(const ItemsetFamily& family, const BinaryDataset& d_hat);

// Column -> indices of family itemsets containing it; built once per chain
// configuration and read-only afterwards.
class ItemsetIndex {
public:
    ItemsetIndex(const ItemsetFamily& family, int n_cols);
    const std::vector<int>& itemsets_on(int col) const { return by_col_[col]; }
    int n_cols() const { return static_cast<int>(by_col_.size()); }

private:
    std::vector<std::vector<int>> by_col_;
};

// Change in the family difference if `sw` were applied to `d`, plus the
// per-itemset frequency updates, computed by testing coverage of the two
// touched rows only. `current_freqs` must equal fr(d; X) for every X.
// `touched` receives (itemset index, new frequency) pairs.
int64_t incremental_difference_delta(const BinaryDataset& d, const ItemsetFamily& family,
                                     const ItemsetIndex& index, const Swap& sw,
                                     const std::vector<int64_t>& current_freqs,
                                     std::vector<std::pair<int, int64_t>>& touched);

// Itemset-family file: one itemset per line of whitespace-separated column
// labels with an optional trailing `: <target>`; `#` starts a comment line.
ItemsetFamily load_itemset_family(std::istream& in, const BinaryDataset& d);
ItemsetFamily load_itemset_family_file(const std::string& path, const BinaryDataset& d);
void save_itemset_family(std::ostream& out, const ItemsetFamily& family,
                         const BinaryDataset& d);
void save_itemset_family_file(const std::string& path, const ItemsetFamily& family,
                              const BinaryDataset& d);

}  // namespace exchmine
