#include "exchmine/dataset_io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace exchmine {
namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

bool is_cell_token(const std::string& t) { return t == "0" || t == "1"; }

BinaryDataset load_dense_csv(std::istream& in) {
    std::vector<std::vector<std::string>> lines;
    std::vector<int> line_numbers;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string t = trim(raw);
        if (t.empty()) continue;
        lines.push_back(split_csv(t));
        line_numbers.push_back(lineno);
    }
    if (lines.empty()) return BinaryDataset(0, 0);

    // First pass decides the layout for the whole file. A row-label column
    // exists when any line after the first starts with a non-0/1 token; the
    // first line is a header when its non-first tokens are non-0/1, or when
    // it holds any non-0/1 token and no row-label column explains it.
    bool line1_first_noncell = !lines[0].empty() && !is_cell_token(lines[0][0]);
    bool line1_rest_noncell = false;
    for (size_t t = 1; t < lines[0].size(); ++t)
        if (!is_cell_token(lines[0][t])) line1_rest_noncell = true;
    bool later_label = false;
    for (size_t i = 1; i < lines.size(); ++i)
        if (!lines[i].empty() && !is_cell_token(lines[i][0])) later_label = true;
    const bool has_header =
        later_label ? line1_rest_noncell : (line1_first_noncell || line1_rest_noncell);
    const size_t first_data = has_header ? 1 : 0;
    if (has_header && lines.size() == 1) {
        // Header-only file: zero rows, labeled columns.
        BinaryDataset d(0, static_cast<int>(lines[0].size()));
        d.set_col_labels(lines[0]);
        return d;
    }
    bool has_row_labels = false;
    for (size_t i = first_data; i < lines.size(); ++i)
        if (!lines[i].empty() && !is_cell_token(lines[i][0])) has_row_labels = true;

    const size_t label_off = has_row_labels ? 1 : 0;
    if (lines[first_data].size() < label_off)
        throw ParseError("line " + std::to_string(line_numbers[first_data]) +
                         ": empty row");
    const size_t n_cols = lines[first_data].size() - label_off;
    const size_t n_rows = lines.size() - first_data;

    BinaryDataset d(static_cast<int>(n_rows), static_cast<int>(n_cols));
    std::vector<std::string> row_labels;
    for (size_t i = first_data; i < lines.size(); ++i) {
        const auto& toks = lines[i];
        if (toks.size() != n_cols + label_off)
            throw ParseError("line " + std::to_string(line_numbers[i]) +
                             ": expected " + std::to_string(n_cols + label_off) +
                             " fields, got " + std::to_string(toks.size()));
        if (has_row_labels) row_labels.push_back(toks[0]);
        for (size_t c = 0; c < n_cols; ++c) {
            const std::string& tok = toks[c + label_off];
            if (!is_cell_token(tok))
                throw ValueError("line " + std::to_string(line_numbers[i]) +
                                 ": cell value must be 0 or 1, got '" + tok + "'");
            if (tok == "1")
                d.set(static_cast<int>(i - first_data), static_cast<int>(c), true);
        }
    }
    if (has_header) {
        auto header = lines[0];
        // A corner cell over the row-label column is allowed and dropped.
        if (has_row_labels && header.size() == n_cols + 1)
            header.erase(header.begin());
        if (header.size() != n_cols)
            throw ParseError("line " + std::to_string(line_numbers[0]) +
                             ": header has " + std::to_string(header.size()) +
                             " labels for " + std::to_string(n_cols) + " columns");
        d.set_col_labels(std::move(header));
    }
    if (has_row_labels) d.set_row_labels(std::move(row_labels));
    return d;
}

BinaryDataset load_transactions(std::istream& in) {
    std::vector<std::string> col_labels;
    std::unordered_map<std::string, int> col_of;
    bool fixed_columns = false;
    std::vector<std::vector<int>> rows;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.rfind("#items:", 0) == 0) {
            if (fixed_columns || !rows.empty())
                throw ParseError("line " + std::to_string(lineno) +
                                 ": #items: directive must come first");
            for (const auto& label : split_ws(line.substr(7))) {
                if (col_of.count(label))
                    throw ValueError("line " + std::to_string(lineno) +
                                     ": duplicate item '" + label + "' in #items:");
                col_of[label] = static_cast<int>(col_labels.size());
                col_labels.push_back(label);
            }
            fixed_columns = true;
            continue;
        }
        if (line[0] == '#') continue;
        std::vector<int> row;
        std::unordered_set<int> seen;
        for (const auto& label : split_ws(line)) {
            auto it = col_of.find(label);
            int c;
            if (it == col_of.end()) {
                if (fixed_columns)
                    throw ParseError("line " + std::to_string(lineno) +
                                     ": unknown item '" + label + "'");
                c = static_cast<int>(col_labels.size());
                col_of[label] = c;
                col_labels.push_back(label);
            } else {
                c = it->second;
            }
            if (!seen.insert(c).second)
                throw ValueError("line " + std::to_string(lineno) +
                                 ": duplicate item '" + label + "' in transaction");
            row.push_back(c);
        }
        rows.push_back(std::move(row));
    }
    BinaryDataset d(static_cast<int>(rows.size()), static_cast<int>(col_labels.size()));
    for (size_t r = 0; r < rows.size(); ++r)
        for (int c : rows[r]) d.set(static_cast<int>(r), c, true);
    d.set_col_labels(std::move(col_labels));
    return d;
}

void save_dense_csv(std::ostream& out, const BinaryDataset& d) {
    const bool row_labels = !d.row_labels().empty();
    if (!d.col_labels().empty()) {
        bool first = true;
        if (row_labels) {
            out << "row";
            first = false;
        }
        for (const auto& label : d.col_labels()) {
            if (!first) out << ',';
            out << label;
            first = false;
        }
        out << '\n';
    }
    for (int r = 0; r < d.rows(); ++r) {
        bool first = true;
        if (row_labels) {
            out << d.row_labels()[r];
            first = false;
        }
        for (int c = 0; c < d.cols(); ++c) {
            if (!first) out << ',';
            out << (d.get(r, c) ? '1' : '0');
            first = false;
        }
        out << '\n';
    }
}

void save_transactions(std::ostream& out, const BinaryDataset& d) {
    out << "#items:";
    for (int c = 0; c < d.cols(); ++c) out << ' ' << d.col_name(c);
    out << '\n';
    for (int r = 0; r < d.rows(); ++r) {
        bool first = true;
        for (int c = 0; c < d.cols(); ++c) {
            if (!d.get(r, c)) continue;
            if (!first) out << ' ';
            out << d.col_name(c);
            first = false;
        }
        out << '\n';
    }
}

}  // namespace

DatasetFormat parse_dataset_format(const std::string& name) {
    if (name == "dense" || name == "dense-csv" || name == "csv")
        return DatasetFormat::DenseCsv;
    if (name == "transactions" || name == "tx") return DatasetFormat::Transactions;
    throw UsageError("unknown dataset format '" + name + "'");
}

BinaryDataset load_dataset(std::istream& in, DatasetFormat format) {
    return format == DatasetFormat::DenseCsv ? load_dense_csv(in)
                                             : load_transactions(in);
}

BinaryDataset load_dataset_file(const std::string& path, DatasetFormat format) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open dataset file '" + path + "'");
    return load_dataset(in, format);
}

void save_dataset(std::ostream& out, const BinaryDataset& d, DatasetFormat format) {
    if (format == DatasetFormat::DenseCsv)
        save_dense_csv(out, d);
    else
        save_transactions(out, d);
}

void save_dataset_file(const std::string& path, const BinaryDataset& d,
                       DatasetFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write dataset file '" + path + "'");
    save_dataset(out, d, format);
}

}  // namespace exchmine
