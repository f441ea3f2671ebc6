#include "exchmine/clustering.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "exchmine/rng.hpp"

namespace exchmine {

RowClustering::RowClustering(std::vector<int> assignment) {
    // Compress ids to [0, k), keeping ascending id order.
    std::map<int, int> remap;
    for (int id : assignment) {
        if (id < 0) throw UsageError("negative cluster id");
        remap.emplace(id, 0);
    }
    int next = 0;
    for (auto& [id, dense] : remap) dense = next++;
    k_ = next;
    assignment_.reserve(assignment.size());
    members_.resize(k_);
    for (size_t r = 0; r < assignment.size(); ++r) {
        const int dense = remap[assignment[r]];
        assignment_.push_back(dense);
        members_[dense].push_back(static_cast<int>(r));
    }
}

double clustering_error(const BinaryDataset& d, const RowClustering& c) {
    if (c.n_rows() != d.rows())
        throw UsageError("clustering does not cover the dataset rows");
    const int n = d.cols();
    double total = 0.0;
    std::vector<double> centroid(n);
    for (int cl = 0; cl < c.k(); ++cl) {
        const auto& rows = c.members()[cl];
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (int r : rows)
            for (int col = 0; col < n; ++col) centroid[col] += d.get(r, col);
        const double inv = 1.0 / static_cast<double>(rows.size());
        for (int col = 0; col < n; ++col) centroid[col] *= inv;
        for (int r : rows) {
            for (int col = 0; col < n; ++col) {
                const double diff = static_cast<double>(d.get(r, col)) - centroid[col];
                total += diff * diff;
            }
        }
    }
    return total;
}

namespace {

double row_centroid_dist2(const BinaryDataset& d, int row,
                          const std::vector<double>& centroid, int cols) {
    double dist = 0.0;
    for (int c = 0; c < cols; ++c) {
        const double diff = static_cast<double>(d.get(row, c)) - centroid[c];
        dist += diff * diff;
    }
    return dist;
}

struct LloydRun {
    std::vector<int> assignment;
    double error = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
};

LloydRun lloyd_once(const BinaryDataset& d, int k, int max_iterations, Rng& rng) {
    const int m = d.rows();
    const int n = d.cols();

    // k distinct rows as initial centroids (partial Fisher-Yates).
    std::vector<int> pool(m);
    for (int i = 0; i < m; ++i) pool[i] = i;
    std::vector<std::vector<double>> centroids(k, std::vector<double>(n));
    for (int i = 0; i < k; ++i) {
        const size_t j = i + rng.below(static_cast<uint64_t>(m - i));
        std::swap(pool[i], pool[j]);
        for (int c = 0; c < n; ++c)
            centroids[i][c] = static_cast<double>(d.get(pool[i], c));
    }

    LloydRun run;
    run.assignment.assign(m, 0);
    std::vector<int> counts(k);
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = (iter == 0);
        for (int r = 0; r < m; ++r) {
            int best = 0;
            double best_dist = row_centroid_dist2(d, r, centroids[0], n);
            for (int cl = 1; cl < k; ++cl) {
                const double dist = row_centroid_dist2(d, r, centroids[cl], n);
                if (dist < best_dist) {  // ties keep the lowest id
                    best_dist = dist;
                    best = cl;
                }
            }
            if (run.assignment[r] != best) changed = true;
            run.assignment[r] = best;
        }
        run.trace.push_back(clustering_error(d, RowClustering(run.assignment)));
        if (!changed) break;

        std::fill(counts.begin(), counts.end(), 0);
        for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
        for (int r = 0; r < m; ++r) {
            ++counts[run.assignment[r]];
            for (int c = 0; c < n; ++c)
                centroids[run.assignment[r]][c] += d.get(r, c);
        }
        for (int cl = 0; cl < k; ++cl) {
            if (counts[cl] == 0) continue;
            const double inv = 1.0 / counts[cl];
            for (int c = 0; c < n; ++c) centroids[cl][c] *= inv;
        }
        // Reseed emptied clusters at the row currently farthest from its
        // centroid, one by one.
        for (int cl = 0; cl < k; ++cl) {
            if (counts[cl] != 0) continue;
            int far_row = -1;
            double far_dist = -1.0;
            for (int r = 0; r < m; ++r) {
                if (counts[run.assignment[r]] <= 1) continue;
                const double dist =
                    row_centroid_dist2(d, r, centroids[run.assignment[r]], n);
                if (dist > far_dist) {
                    far_dist = dist;
                    far_row = r;
                }
            }
            if (far_row < 0) break;  // nothing movable
            --counts[run.assignment[far_row]];
            run.assignment[far_row] = cl;
            counts[cl] = 1;
            for (int c = 0; c < n; ++c)
                centroids[cl][c] = static_cast<double>(d.get(far_row, c));
        }
    }
    run.error = clustering_error(d, RowClustering(run.assignment));
    return run;
}

}  // namespace

RowClustering kmeans(const BinaryDataset& d, int k, const KmeansOptions& options) {
    if (k < 1) throw UsageError("k must be >= 1");
    if (k > d.rows()) throw UsageError("k exceeds the number of rows");
    if (options.restarts < 1) throw UsageError("restarts must be >= 1");

    LloydRun best;
    for (int restart = 0; restart < options.restarts; ++restart) {
        Rng rng(derive_seed(options.seed, seed_tag::kmeans_restart, restart));
        LloydRun run = lloyd_once(d, k, options.max_iterations, rng);
        if (options.traces) options.traces->push_back(run.trace);
        if (run.error < best.error) best = std::move(run);
    }
    return RowClustering(best.assignment);
}

RowClustering load_clustering(std::istream& in, const BinaryDataset& d) {
    std::map<std::string, int> row_of;
    for (int r = 0; r < d.rows(); ++r) {
        if (!row_of.emplace(d.row_name(r), r).second)
            throw UsageError("dataset has duplicate row names; clustering file is ambiguous");
    }
    std::vector<int> assignment(d.rows(), -1);
    std::string raw;
    int lineno = 0;
    int seen = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (raw.empty() || raw[0] == '#') continue;
        const auto tab = raw.find('\t');
        if (tab == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) + ": expected <row>\\t<cluster>");
        const std::string label = raw.substr(0, tab);
        const std::string id_str = raw.substr(tab + 1);
        auto it = row_of.find(label);
        if (it == row_of.end())
            throw ParseError("line " + std::to_string(lineno) + ": unknown row '" + label + "'");
        if (assignment[it->second] != -1)
            throw ParseError("line " + std::to_string(lineno) + ": duplicate row '" + label + "'");
        try {
            size_t used = 0;
            const int id = std::stoi(id_str, &used);
            if (used != id_str.size() || id < 0) throw std::invalid_argument("");
            assignment[it->second] = id;
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(lineno) + ": bad cluster id '" +
                             id_str + "'");
        }
        ++seen;
    }
    if (seen != d.rows())
        throw ParseError("clustering file covers " + std::to_string(seen) + " of " +
                         std::to_string(d.rows()) + " rows");
    return RowClustering(std::move(assignment));
}

RowClustering load_clustering_file(const std::string& path, const BinaryDataset& d) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open clustering file '" + path + "'");
    return load_clustering(in, d);
}

void save_clustering(std::ostream& out, const RowClustering& c, const BinaryDataset& d) {
    for (int r = 0; r < d.rows(); ++r)
        out << d.row_name(r) << '\t' << c.cluster_of(r) << '\n';
}

void save_clustering_file(const std::string& path, const RowClustering& c,
                          const BinaryDataset& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write clustering file '" + path + "'");
    save_clustering(out, c, d);
}

}  // namespace exchmine
