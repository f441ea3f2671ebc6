#pragma once

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "exchmine/dataset.hpp"
#include "exchmine/dataset_io.hpp"
#include "exchmine/rng.hpp"

namespace testsupport {

inline std::string env_or(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return v ? v : fallback;
}

inline std::string data_dir() { return env_or("EXCHMINE_DATA", "data"); }
inline std::string golden_dir() { return env_or("EXCHMINE_GOLDEN", "tests/golden"); }
inline std::string cli_path() { return env_or("EXCHMINE_CLI", "build/exchmine"); }

// The bundled 9x8 example dataset (columns A..H).
inline exchmine::BinaryDataset example_dataset() {
    return exchmine::load_dataset_file(data_dir() + "/example.csv",
                                       exchmine::DatasetFormat::DenseCsv);
}

// Rows as strings of 0/1 characters.
inline exchmine::BinaryDataset matrix_of(const std::vector<std::string>& rows) {
    const int m = static_cast<int>(rows.size());
    const int n = m == 0 ? 0 : static_cast<int>(rows[0].size());
    exchmine::BinaryDataset d(m, n);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c)
            if (rows[r][c] == '1') d.set(r, c, true);
    return d;
}

// Random dataset with i.i.d. cells.
inline exchmine::BinaryDataset random_dataset(int rows, int cols, double density,
                                              uint64_t seed) {
    exchmine::Rng rng(seed);
    exchmine::BinaryDataset d(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (rng.uniform01() < density) d.set(r, c, true);
    return d;
}

inline std::string render(const exchmine::BinaryDataset& d) {
    std::ostringstream os;
    for (int r = 0; r < d.rows(); ++r) {
        for (int c = 0; c < d.cols(); ++c) os << (d.get(r, c) ? '1' : '0');
        os << '\n';
    }
    return os.str();
}

}  // namespace testsupport
