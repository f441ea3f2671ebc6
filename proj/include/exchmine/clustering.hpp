#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "exchmine/dataset.hpp"

namespace exchmine {

// Partition of the row indices. Cluster ids are dense in [0, k) and every
// cluster is nonempty; construction compresses gaps (empty ids are removed
// and k shrinks, preserving the relative order of the remaining ids).
class RowClustering {
public:
    RowClustering() = default;
    explicit RowClustering(std::vector<int> assignment);

    int k() const { return k_; }
    int n_rows() const { return static_cast<int>(assignment_.size()); }
    int cluster_of(int row) const { return assignment_[row]; }
    const std::vector<int>& assignment() const { return assignment_; }
    const std::vector<std::vector<int>>& members() const { return members_; }

private:
    std::vector<int> assignment_;
    std::vector<std::vector<int>> members_;
    int k_ = 0;
};

// Sum over rows of the squared L2 distance to the centroid (per-cluster
// column means) of the row's cluster. Fixed summation order: clusters by id,
// then member rows ascending, then columns ascending.
double clustering_error(const BinaryDataset& d, const RowClustering& c);

struct KmeansOptions {
    int restarts = 10;
    int max_iterations = 100;
    uint64_t seed = 0;
    // When set, receives the per-iteration error trace of each restart.
    std::vector<std::vector<double>>* traces = nullptr;
};

// Lloyd iterations from k distinct random rows, best of `restarts` runs by
// clustering_error. Ties in the assignment step break toward the lowest
// cluster id; an emptied cluster is reseeded at the row farthest from its
// centroid. Deterministic given the seed.
RowClustering kmeans(const BinaryDataset& d, int k, const KmeansOptions& options);

// Clustering file: one `row_label<TAB>cluster_id` line per row.
RowClustering load_clustering(std::istream& in, const BinaryDataset& d);
RowClustering load_clustering_file(const std::string& path, const BinaryDataset& d);
void save_clustering(std::ostream& out, const RowClustering& c, const BinaryDataset& d);
void save_clustering_file(const std::string& path, const RowClustering& c,
                          const BinaryDataset& d);

}  // namespace exchmine
