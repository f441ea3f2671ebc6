#include "exchmine/itemsets.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace exchmine {

Itemset make_itemset(std::vector<int> items, int n_cols) {
    std::sort(items.begin(), items.end());
    for (size_t i = 0; i < items.size(); ++i) {
        if (items[i] < 0 || items[i] >= n_cols)
            throw UsageError("itemset column index out of range");
        if (i > 0 && items[i] == items[i - 1])
            throw ValueError("duplicate column in itemset");
    }
    return items;
}

std::string itemset_label(const Itemset& x, const BinaryDataset& d) {
    std::string out;
    for (size_t i = 0; i < x.size(); ++i) {
        if (i) out += ' ';
        out += d.col_name(x[i]);
    }
    return out;
}

ItemsetFamily::ItemsetFamily(std::vector<Itemset> itemsets,
                             std::optional<std::vector<int64_t>> target_freqs) {
    if (target_freqs && target_freqs->size() != itemsets.size())
        throw UsageError("target frequencies do not align with itemsets");
    if (target_freqs) targets_.emplace();
    for (size_t i = 0; i < itemsets.size(); ++i)
        add(itemsets[i], target_freqs ? std::optional<int64_t>((*target_freqs)[i])
                                      : std::nullopt);
}

ItemsetFamily ItemsetFamily::empty_with_targets() {
    ItemsetFamily f;
    f.targets_.emplace();
    return f;
}

const std::vector<int64_t>& ItemsetFamily::targets() const {
    if (!targets_) throw UsageError("itemset family has no target frequencies");
    return *targets_;
}

bool ItemsetFamily::contains(const Itemset& x) const {
    return std::find(itemsets_.begin(), itemsets_.end(), x) != itemsets_.end();
}

void ItemsetFamily::add(const Itemset& x, std::optional<int64_t> target) {
    if (targets_.has_value() != target.has_value())
        throw UsageError("cannot mix itemsets with and without targets");
    if (contains(x)) return;
    itemsets_.push_back(x);
    if (target) targets_->push_back(*target);
}

ItemsetFamily ItemsetFamily::with_targets_from(const BinaryDataset& d) const {
    std::vector<int64_t> t;
    t.reserve(itemsets_.size());
    for (const auto& x : itemsets_) t.push_back(frequency(d, x));
    return ItemsetFamily(itemsets_, std::move(t));
}

int64_t frequency(const BinaryDataset& d, const Itemset& x) {
    for (int c : x)
        if (c < 0 || c >= d.cols()) throw UsageError("itemset column index out of range");
    if (x.empty()) return d.rows();
    int64_t count = 0;
    for (int r = 0; r < d.rows(); ++r) {
        bool covered = true;
        for (int c : x) {
            if (!d.get(r, c)) {
                covered = false;
                break;
            }
        }
        count += covered;
    }
    return count;
}

ColumnBits::ColumnBits(const BinaryDataset& d)
    : rows_(d.rows()),
      words_((d.rows() + 63) / 64),
      bits_(static_cast<size_t>(d.cols()) * ((d.rows() + 63) / 64), 0),
      scratch_((d.rows() + 63) / 64) {
    for (int64_t i = 0; i < d.ones_count(); ++i) {
        const uint32_t pos = d.one_position(static_cast<size_t>(i));
        const int r = d.position_row(pos);
        const int c = d.position_col(pos);
        bits_[static_cast<size_t>(c) * words_ + (r >> 6)] |= uint64_t{1} << (r & 63);
    }
}

int64_t ColumnBits::frequency(const Itemset& x) const {
    if (x.empty()) return rows_;
    const uint64_t* first = &bits_[static_cast<size_t>(x[0]) * words_];
    if (x.size() == 1) {
        int64_t n = 0;
        for (int w = 0; w < words_; ++w) n += std::popcount(first[w]);
        return n;
    }
    std::copy(first, first + words_, scratch_.begin());
    for (size_t i = 1; i < x.size(); ++i) {
        const uint64_t* col = &bits_[static_cast<size_t>(x[i]) * words_];
        for (int w = 0; w < words_; ++w) scratch_[w] &= col[w];
    }
    int64_t n = 0;
    for (int w = 0; w < words_; ++w) n += std::popcount(scratch_[w]);
    return n;
}

ItemsetFamily mine_frequent(const BinaryDataset& d, int64_t min_support, int max_size) {
    if (min_support < 1) throw UsageError("min_support must be >= 1");
    if (max_size < 1) throw UsageError("max_size must be >= 1");
    const ColumnBits cols(d);

    std::vector<Itemset> result;
    std::vector<int64_t> freqs;
    std::vector<Itemset> level;
    for (int c = 0; c < d.cols(); ++c) {
        const int64_t f = cols.frequency({c});
        if (f >= min_support) {
            level.push_back({c});
            result.push_back({c});
            freqs.push_back(f);
        }
    }

    auto is_frequent = [&](const std::vector<Itemset>& prev, const Itemset& cand) {
        // All (size-1)-subsets must be in the previous level.
        Itemset sub(cand.size() - 1);
        for (size_t skip = 0; skip < cand.size(); ++skip) {
            size_t j = 0;
            for (size_t i = 0; i < cand.size(); ++i)
                if (i != skip) sub[j++] = cand[i];
            if (!std::binary_search(prev.begin(), prev.end(), sub)) return false;
        }
        return true;
    };

    for (int size = 2; size <= max_size && level.size() >= 2; ++size) {
        std::vector<Itemset> next;
        // Join step: pairs sharing the first size-2 items.
        for (size_t i = 0; i < level.size(); ++i) {
            for (size_t j = i + 1; j < level.size(); ++j) {
                if (!std::equal(level[i].begin(), level[i].end() - 1, level[j].begin(),
                                level[j].end() - 1))
                    break;  // level is sorted, prefixes diverge from here on
                Itemset cand = level[i];
                cand.push_back(level[j].back());
                if (!is_frequent(level, cand)) continue;
                const int64_t f = cols.frequency(cand);
                if (f >= min_support) {
                    next.push_back(std::move(cand));
                    freqs.push_back(f);
                }
            }
        }
        for (const auto& x : next) result.push_back(x);
        level = std::move(next);
    }
    return ItemsetFamily(std::move(result), std::move(freqs));
}

int64_t itemset_difference(const ItemsetFamily& family, const BinaryDataset& d_hat) {
    const auto& targets = family.targets();
    int64_t h = 0;
    for (size_t i = 0; i < family.size(); ++i)
        h += std::llabs(targets[i] - frequency(d_hat, family[i]));
    return h;
}

ItemsetIndex::ItemsetIndex(const ItemsetFamily& family, int n_cols) : by_col_(n_cols) {
    for (size_t i = 0; i < family.size(); ++i)
        for (int c : family[i]) by_col_[c].push_back(static_cast<int>(i));
}

namespace {

// Coverage of row `row` by X, with the four cells of `sw` taken at their
// post-swap values when `after` is set.
bool covers_row(const BinaryDataset& d, int row, const Itemset& x, const Swap& sw,
                bool after) {
    for (int c : x) {
        bool v = d.get(row, c);
        if (after && (row == sw.row1 || row == sw.row2) && (c == sw.col1 || c == sw.col2))
            v = !v;
        if (!v) return false;
    }
    return true;
}

}  // namespace

int64_t incremental_difference_delta(const BinaryDataset& d, const ItemsetFamily& family,
                                     const ItemsetIndex& index, const Swap& sw,
                                     const std::vector<int64_t>& current_freqs,
                                     std::vector<std::pair<int, int64_t>>& touched) {
    const auto& targets = family.targets();
    touched.clear();
    int64_t delta = 0;
    auto consider = [&](int i) {
        int64_t df = 0;
        for (int row : {sw.row1, sw.row2}) {
            const bool before = covers_row(d, row, family[i], sw, false);
            const bool after = covers_row(d, row, family[i], sw, true);
            df += static_cast<int>(after) - static_cast<int>(before);
        }
        if (df == 0) return;
        const int64_t next = current_freqs[i] + df;
        delta += std::llabs(targets[i] - next) - std::llabs(targets[i] - current_freqs[i]);
        touched.emplace_back(i, next);
    };
    const auto& on_col1 = index.itemsets_on(sw.col1);
    const auto& on_col2 = index.itemsets_on(sw.col2);
    for (int i : on_col1) consider(i);
    for (int i : on_col2) {
        // Itemsets holding both columns were already handled via col1.
        if (std::binary_search(family[i].begin(), family[i].end(), sw.col1)) continue;
        consider(i);
    }
    return delta;
}

ItemsetFamily load_itemset_family(std::istream& in, const BinaryDataset& d) {
    std::vector<Itemset> itemsets;
    std::vector<int64_t> targets;
    bool any_target = false;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
        std::istringstream ss(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ss >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;

        std::optional<int64_t> target;
        if (tokens.size() >= 2 && tokens[tokens.size() - 2] == ":") {
            try {
                size_t used = 0;
                target = std::stoll(tokens.back(), &used);
                if (used != tokens.back().size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(lineno) +
                                 ": bad target frequency '" + tokens.back() + "'");
            }
            tokens.resize(tokens.size() - 2);
        }
        std::vector<int> items;
        for (const auto& label : tokens) {
            const int c = d.find_col(label);
            if (c < 0)
                throw ParseError("line " + std::to_string(lineno) + ": unknown column '" +
                                 label + "'");
            items.push_back(c);
        }
        Itemset x;
        try {
            x = make_itemset(std::move(items), d.cols());
        } catch (const ValueError&) {
            throw ValueError("line " + std::to_string(lineno) +
                             ": duplicate column in itemset");
        }
        itemsets.push_back(std::move(x));
        if (target) {
            any_target = true;
            targets.push_back(*target);
        } else if (any_target) {
            throw ParseError("line " + std::to_string(lineno) +
                             ": mixed lines with and without targets");
        }
    }
    if (any_target && targets.size() != itemsets.size())
        throw ParseError("mixed lines with and without targets");
    if (any_target) return ItemsetFamily(std::move(itemsets), std::move(targets));
    return ItemsetFamily(std::move(itemsets));
}

ItemsetFamily load_itemset_family_file(const std::string& path, const BinaryDataset& d) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open itemset file '" + path + "'");
    return load_itemset_family(in, d);
}

void save_itemset_family(std::ostream& out, const ItemsetFamily& family,
                         const BinaryDataset& d) {
    for (size_t i = 0; i < family.size(); ++i) {
        out << itemset_label(family[i], d);
        if (family.has_targets()) out << " : " << family.targets()[i];
        out << '\n';
    }
}

void save_itemset_family_file(const std::string& path, const ItemsetFamily& family,
                              const BinaryDataset& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write itemset file '" + path + "'");
    save_itemset_family(out, family, d);
}

}  // namespace exchmine
