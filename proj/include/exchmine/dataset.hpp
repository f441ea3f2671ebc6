#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exchmine/errors.hpp"

namespace exchmine {

// A checkerboard exchange: cells (row1,col1) and (row2,col2) hold 1,
// (row1,col2) and (row2,col1) hold 0, and the four are flipped. Preserves all
// row and column sums. Applying the same swap with col1/col2 exchanged undoes
// it.
struct Swap {
    int row1 = 0;
    int row2 = 0;
    int col1 = 0;
    int col2 = 0;
};

// Dense 0/1 matrix with cached margins and a flat index of the 1-cells.
//
// The index supports O(1) uniform choice of a 1-cell and O(1) replacement
// when a swap moves it, so a chain step costs four bit flips and four array
// writes and never allocates. Labels are optional; all computation is on
// indices, labels only matter at the I/O edges.
class BinaryDataset {
public:
    BinaryDataset() = default;
    BinaryDataset(int n_rows, int n_cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int64_t ones_count() const { return static_cast<int64_t>(ones_.size()); }

    bool get(int row, int col) const {
        return (bits_[static_cast<size_t>(row) * words_per_row_ + (col >> 6)] >>
                (col & 63)) & 1u;
    }

    // Construction-time mutation; keeps margins and the ones index coherent.
    void set(int row, int col, bool value);

    const std::vector<int>& row_margins() const { return row_margins_; }
    const std::vector<int>& col_margins() const { return col_margins_; }

    // position = row * cols + col of the i-th 1-cell (internal ordering is
    // unspecified but deterministic).
    uint32_t one_position(size_t i) const { return ones_[i]; }
    int position_row(uint32_t pos) const { return static_cast<int>(pos) / cols_; }
    int position_col(uint32_t pos) const { return static_cast<int>(pos) % cols_; }

    bool swap_applicable(const Swap& sw) const;
    // Flips the four cells of an applicable swap. Throws UsageError otherwise.
    void apply_swap(const Swap& sw);

    // Optional labels; empty vector means unlabeled.
    const std::vector<std::string>& row_labels() const { return row_labels_; }
    const std::vector<std::string>& col_labels() const { return col_labels_; }
    void set_row_labels(std::vector<std::string> labels);
    void set_col_labels(std::vector<std::string> labels);
    // Label if present, else the decimal index.
    std::string row_name(int row) const;
    std::string col_name(int col) const;
    // Resolves a column label (or decimal index when unlabeled); -1 if unknown.
    int find_col(const std::string& name) const;

    bool same_cells(const BinaryDataset& other) const;

    // Extracts the given rows (in the given order) with identical columns.
    BinaryDataset select_rows(const std::vector<int>& row_indexes) const;

    // Recomputes margins and the ones index from the bits and checks them
    // against the cached state; test support.
    bool check_consistency() const;

private:
    friend int64_t frobenius_sq_distance(const BinaryDataset&, const BinaryDataset&);

    static constexpr uint32_t kNoSlot = 0xFFFFFFFFu;

    // Debug spot check: cached margins of the rows/cols a swap touched still
    // match the bits.
    bool check_margins_spot(const Swap& sw) const;

    void flip_bit(int row, int col) {
        bits_[static_cast<size_t>(row) * words_per_row_ + (col >> 6)] ^=
            (uint64_t{1} << (col & 63));
    }
    uint32_t pos_of(int row, int col) const {
        return static_cast<uint32_t>(row) * static_cast<uint32_t>(cols_) +
               static_cast<uint32_t>(col);
    }

    int rows_ = 0;
    int cols_ = 0;
    int words_per_row_ = 0;
    std::vector<uint64_t> bits_;
    std::vector<uint32_t> ones_;   // positions of 1-cells
    std::vector<uint32_t> slot_;   // position -> index into ones_, kNoSlot if 0
    std::vector<int> row_margins_;
    std::vector<int> col_margins_;
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
};

// Number of cells where the two matrices differ (squared Frobenius norm of
// the difference for 0/1 data). Throws ShapeError on dimension mismatch.
int64_t frobenius_sq_distance(const BinaryDataset& a, const BinaryDataset& b);

}  // namespace exchmine
