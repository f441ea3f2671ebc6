#include "exchmine/synthetic.hpp"

#include "exchmine/rng.hpp"

namespace exchmine {

BinaryDataset synthetic_planted(int rows, int cols, uint64_t seed) {
    Rng rng(derive_seed(seed, seed_tag::synthetic));
    BinaryDataset d(rows, cols);
    const int row_split = rows / 2;
    const int block_cols = cols / 5;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            double p = 0.08;
            if (r < row_split && c < block_cols) p = 0.45;
            if (r >= row_split && c >= block_cols && c < 2 * block_cols) p = 0.45;
            if (rng.uniform01() < p) d.set(r, c, true);
        }
    }
    // Planted itemset: three columns outside the blocks co-occur on a random
    // 15% of the rows.
    const int a = 2 * block_cols;
    const int b = a + 1;
    const int c3 = a + 2;
    if (c3 < cols) {
        for (int r = 0; r < rows; ++r) {
            if (rng.uniform01() < 0.15) {
                d.set(r, a, true);
                d.set(r, b, true);
                d.set(r, c3, true);
            }
        }
    }
    return d;
}

BinaryDataset synthetic_noise(int rows, int cols, double density, uint64_t seed) {
    Rng rng(derive_seed(seed, seed_tag::synthetic, 1));
    BinaryDataset d(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (rng.uniform01() < density) d.set(r, c, true);
    return d;
}

}  // namespace exchmine
