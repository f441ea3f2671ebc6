#pragma once

#include <cstdint>

#include "exchmine/dataset.hpp"

namespace exchmine {

// Seeded dataset with planted structure: background noise, two dense
// row-block/column-block regions (a clusterable split), and a planted
// itemset whose columns co-occur on extra rows.
BinaryDataset synthetic_planted(int rows, int cols, uint64_t seed);

// Seeded noise-only dataset with i.i.d. cells at the given density.
BinaryDataset synthetic_noise(int rows, int cols, double density, uint64_t seed);

}  // namespace exchmine
