#pragma once

#include <iosfwd>
#include <string>

#include "exchmine/dataset.hpp"

namespace exchmine {

enum class DatasetFormat { DenseCsv, Transactions };

DatasetFormat parse_dataset_format(const std::string& name);

// Dense CSV: optional header row of column labels, then comma-separated 0/1
// cells; an optional first column of row labels is detected by any non-0/1
// first token. Transactions: one transaction per line of whitespace-separated
// item labels; a leading `#items: A B C` directive fixes the column order,
// otherwise columns appear in first-appearance order.
BinaryDataset load_dataset(std::istream& in, DatasetFormat format);
BinaryDataset load_dataset_file(const std::string& path, DatasetFormat format);

// Writers are deterministic: identical datasets serialize to identical bytes.
void save_dataset(std::ostream& out, const BinaryDataset& d, DatasetFormat format);
void save_dataset_file(const std::string& path, const BinaryDataset& d,
                       DatasetFormat format);

}  // namespace exchmine
