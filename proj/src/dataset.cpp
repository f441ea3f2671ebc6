#include "exchmine/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

namespace exchmine {

BinaryDataset::BinaryDataset(int n_rows, int n_cols)
    : rows_(n_rows),
      cols_(n_cols),
      words_per_row_((n_cols + 63) / 64),
      bits_(static_cast<size_t>(n_rows) * ((n_cols + 63) / 64), 0),
      slot_(static_cast<size_t>(n_rows) * n_cols, kNoSlot),
      row_margins_(n_rows, 0),
      col_margins_(n_cols, 0) {
    if (n_rows < 0 || n_cols < 0) throw UsageError("negative dataset dimension");
}

void BinaryDataset::set(int row, int col, bool value) {
    if (get(row, col) == value) return;
    flip_bit(row, col);
    const uint32_t pos = pos_of(row, col);
    if (value) {
        slot_[pos] = static_cast<uint32_t>(ones_.size());
        ones_.push_back(pos);
        ++row_margins_[row];
        ++col_margins_[col];
    } else {
        const uint32_t s = slot_[pos];
        const uint32_t last = ones_.back();
        ones_[s] = last;
        slot_[last] = s;
        ones_.pop_back();
        slot_[pos] = kNoSlot;
        --row_margins_[row];
        --col_margins_[col];
    }
}

bool BinaryDataset::swap_applicable(const Swap& sw) const {
    return sw.row1 != sw.row2 && sw.col1 != sw.col2 &&
           get(sw.row1, sw.col1) && get(sw.row2, sw.col2) &&
           !get(sw.row1, sw.col2) && !get(sw.row2, sw.col1);
}

void BinaryDataset::apply_swap(const Swap& sw) {
    if (!swap_applicable(sw)) throw UsageError("swap not applicable");
    flip_bit(sw.row1, sw.col1);
    flip_bit(sw.row1, sw.col2);
    flip_bit(sw.row2, sw.col1);
    flip_bit(sw.row2, sw.col2);
    // Each moved 1 stays in its row: (r1,c1)->(r1,c2) and (r2,c2)->(r2,c1).
    const uint32_t from_a = pos_of(sw.row1, sw.col1);
    const uint32_t to_a = pos_of(sw.row1, sw.col2);
    const uint32_t from_b = pos_of(sw.row2, sw.col2);
    const uint32_t to_b = pos_of(sw.row2, sw.col1);
    const uint32_t slot_a = slot_[from_a];
    ones_[slot_a] = to_a;
    slot_[to_a] = slot_a;
    slot_[from_a] = kNoSlot;
    const uint32_t slot_b = slot_[from_b];
    ones_[slot_b] = to_b;
    slot_[to_b] = slot_b;
    slot_[from_b] = kNoSlot;
    assert(check_margins_spot(sw));
}

bool BinaryDataset::check_margins_spot(const Swap& sw) const {
    auto row_sum = [&](int r) {
        int s = 0;
        for (int c = 0; c < cols_; ++c) s += get(r, c);
        return s;
    };
    auto col_sum = [&](int c) {
        int s = 0;
        for (int r = 0; r < rows_; ++r) s += get(r, c);
        return s;
    };
    return row_sum(sw.row1) == row_margins_[sw.row1] &&
           row_sum(sw.row2) == row_margins_[sw.row2] &&
           col_sum(sw.col1) == col_margins_[sw.col1] &&
           col_sum(sw.col2) == col_margins_[sw.col2];
}

void BinaryDataset::set_row_labels(std::vector<std::string> labels) {
    if (!labels.empty() && static_cast<int>(labels.size()) != rows_)
        throw UsageError("row label count does not match row count");
    row_labels_ = std::move(labels);
}

void BinaryDataset::set_col_labels(std::vector<std::string> labels) {
    if (!labels.empty() && static_cast<int>(labels.size()) != cols_)
        throw UsageError("column label count does not match column count");
    col_labels_ = std::move(labels);
}

std::string BinaryDataset::row_name(int row) const {
    if (!row_labels_.empty()) return row_labels_[row];
    return std::to_string(row);
}

std::string BinaryDataset::col_name(int col) const {
    if (!col_labels_.empty()) return col_labels_[col];
    return std::to_string(col);
}

int BinaryDataset::find_col(const std::string& name) const {
    if (!col_labels_.empty()) {
        for (int c = 0; c < cols_; ++c)
            if (col_labels_[c] == name) return c;
        return -1;
    }
    try {
        size_t used = 0;
        const int c = std::stoi(name, &used);
        if (used != name.size() || c < 0 || c >= cols_) return -1;
        return c;
    } catch (const std::exception&) {
        return -1;
    }
}

bool BinaryDataset::same_cells(const BinaryDataset& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && bits_ == other.bits_;
}

BinaryDataset BinaryDataset::select_rows(const std::vector<int>& row_indexes) const {
    BinaryDataset out(static_cast<int>(row_indexes.size()), cols_);
    for (size_t i = 0; i < row_indexes.size(); ++i) {
        const int src = row_indexes[i];
        if (src < 0 || src >= rows_) throw UsageError("row index out of range");
        for (int c = 0; c < cols_; ++c)
            if (get(src, c)) out.set(static_cast<int>(i), c, true);
    }
    if (!row_labels_.empty()) {
        std::vector<std::string> labels;
        labels.reserve(row_indexes.size());
        for (int src : row_indexes) labels.push_back(row_labels_[src]);
        out.set_row_labels(std::move(labels));
    }
    out.set_col_labels(col_labels_);
    return out;
}

bool BinaryDataset::check_consistency() const {
    std::vector<int> rm(rows_, 0), cm(cols_, 0);
    size_t n_ones = 0;
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            if (!get(r, c)) {
                if (slot_[pos_of(r, c)] != kNoSlot) return false;
                continue;
            }
            ++rm[r];
            ++cm[c];
            ++n_ones;
            const uint32_t s = slot_[pos_of(r, c)];
            if (s == kNoSlot || s >= ones_.size()) return false;
            if (ones_[s] != pos_of(r, c)) return false;
        }
    }
    return rm == row_margins_ && cm == col_margins_ && n_ones == ones_.size();
}

int64_t frobenius_sq_distance(const BinaryDataset& a, const BinaryDataset& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("frobenius distance needs equal dimensions");
    int64_t diff = 0;
    for (size_t w = 0; w < a.bits_.size(); ++w)
        diff += std::popcount(a.bits_[w] ^ b.bits_[w]);
    return diff;
}

}  // namespace exchmine
