// Copyright 2026 The cafactor Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CAFACTOR_MATRIX_H_
#define CAFACTOR_MATRIX_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cafactor/corpus.h"

namespace cafactor {

using Count = std::uint64_t;

// One stored non-zero cell of a row.
struct Cell {
  std::size_t col;
  Count count;

  friend bool operator==(const Cell&, const Cell&) = default;
};

// Sparse rows x columns table of non-negative counts. Rows keep their cells
// sorted by column; zero cells are never stored. Tables are values: every
// transformation returns a new table.
class ContingencyTable {
 public:
  ContingencyTable() = default;
  ContingencyTable(std::vector<std::string> row_labels,
                   std::vector<std::string> col_labels);

  // Builds from a dense row-major matrix; zero entries are skipped.
  static ContingencyTable FromDense(std::vector<std::string> row_labels,
                                    std::vector<std::string> col_labels,
                                    const std::vector<std::vector<Count>>& dense);
  // Same, with generated labels r1.. and c1..
  static ContingencyTable FromDense(const std::vector<std::vector<Count>>& dense);

  std::size_t rows() const { return row_labels_.size(); }
  std::size_t cols() const { return col_labels_.size(); }
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }
  std::span<const Cell> row(std::size_t i) const { return cells_[i]; }
  Count grand_total() const { return grand_total_; }

  Count at(std::size_t i, std::size_t j) const;
  // Adds `count` to cell (i, j).
  void Add(std::size_t i, std::size_t j, Count count);

  std::vector<Count> RowTotals() const;
  std::vector<Count> ColTotals() const;
  std::vector<std::size_t> ZeroRows() const;
  std::vector<std::size_t> ZeroCols() const;
  std::size_t NonZeros() const;

  std::optional<std::size_t> FindRow(std::string_view label) const;
  std::optional<std::size_t> FindCol(std::string_view label) const;

  std::vector<std::vector<Count>> ToDense() const;

  // Keeps the listed rows in the given order.
  ContingencyTable SelectRows(std::span<const std::size_t> rows) const;
  // Keeps the listed columns in the given order.
  ContingencyTable SelectCols(std::span<const std::size_t> cols) const;

  friend bool operator==(const ContingencyTable&,
                         const ContingencyTable&) = default;

 private:
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
  std::vector<std::vector<Cell>> cells_;
  Count grand_total_ = 0;
  std::unordered_map<std::string, std::size_t> row_index_;
  std::unordered_map<std::string, std::size_t> col_index_;
};

struct RowGroup {
  std::string label;
  std::vector<std::size_t> members;
};

struct RowGrouping {
  std::vector<RowGroup> groups;

  // Consecutive blocks of `group_size` rows: rows 0..size-1 form group 1 etc.
  // Requires group_size to divide `rows`.
  static RowGrouping Consecutive(std::size_t rows, std::size_t group_size);
};

struct BuildResult {
  ContingencyTable table;
  // Ids of records holding no vocabulary term; they are not in `table`.
  std::vector<std::string> empty_records;
};

// Cell (i, j) = occurrences of vocabulary term j in record i. Records with no
// vocabulary term are left out and reported.
BuildResult BuildTable(const RecordSet& records, const Vocabulary& vocab,
                       int threads = 1);
BuildResult BuildTable(std::span<const TokenStream> streams,
                       const Vocabulary& vocab);

// Row g of the result is the sum of the member rows of group g.
ContingencyTable AggregateRows(const ContingencyTable& table,
                               const RowGrouping& grouping);

// Rows permuted by non-decreasing score, stable for ties.
ContingencyTable OrderRowsByScores(const ContingencyTable& table,
                                   std::span<const double> scores);

ContingencyTable Transpose(const ContingencyTable& table);

// Serialized form:
//   #rows <n> #cols <m> #total <N>
//   #row<TAB>label        (n lines, row order)
//   #col<TAB>label        (m lines, column order)
//   row_label<TAB>col_label<TAB>count   (one line per non-zero)
void WriteTableTsv(const ContingencyTable& table, std::ostream& out);
ContingencyTable ReadTableTsv(std::istream& in);

// groups.tsv: group_label<TAB>row_label per line; groups appear in order of
// first mention.
RowGrouping ReadGroupsTsv(std::istream& in, const ContingencyTable& table);

}  // namespace cafactor

#endif  // CAFACTOR_MATRIX_H_
