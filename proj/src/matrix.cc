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

#include "cafactor/matrix.h"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "cafactor/errors.h"

namespace cafactor {

namespace {

std::unordered_map<std::string, std::size_t> IndexLabels(
    const std::vector<std::string>& labels, const char* what) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!index.emplace(labels[i], i).second) {
      throw DataError(std::string("duplicate ") + what + " label '" +
                      labels[i] + "'");
    }
  }
  return index;
}

std::optional<std::size_t> FindLabel(
    const std::unordered_map<std::string, std::size_t>& index,
    std::string_view label) {
  const auto it = index.find(std::string(label));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    parts.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return parts;
}

}  // namespace

ContingencyTable::ContingencyTable(std::vector<std::string> row_labels,
                                   std::vector<std::string> col_labels)
    : row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)),
      cells_(row_labels_.size()),
      row_index_(IndexLabels(row_labels_, "row")),
      col_index_(IndexLabels(col_labels_, "column")) {}

ContingencyTable ContingencyTable::FromDense(
    std::vector<std::string> row_labels, std::vector<std::string> col_labels,
    const std::vector<std::vector<Count>>& dense) {
  ContingencyTable t(std::move(row_labels), std::move(col_labels));
  if (dense.size() != t.rows()) throw DataError("row count mismatch");
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i].size() != t.cols()) throw DataError("ragged dense matrix");
    for (std::size_t j = 0; j < dense[i].size(); ++j) {
      if (dense[i][j] != 0) t.Add(i, j, dense[i][j]);
    }
  }
  return t;
}

ContingencyTable ContingencyTable::FromDense(
    const std::vector<std::vector<Count>>& dense) {
  const std::size_t n = dense.size();
  const std::size_t m = n == 0 ? 0 : dense[0].size();
  std::vector<std::string> rl(n), cl(m);
  for (std::size_t i = 0; i < n; ++i) rl[i] = "r" + std::to_string(i + 1);
  for (std::size_t j = 0; j < m; ++j) cl[j] = "c" + std::to_string(j + 1);
  return FromDense(std::move(rl), std::move(cl), dense);
}

Count ContingencyTable::at(std::size_t i, std::size_t j) const {
  const auto& r = cells_.at(i);
  const auto it = std::lower_bound(
      r.begin(), r.end(), j, [](const Cell& c, std::size_t col) { return c.col < col; });
  return (it != r.end() && it->col == j) ? it->count : 0;
}

void ContingencyTable::Add(std::size_t i, std::size_t j, Count count) {
  if (i >= rows() || j >= cols()) throw BoundsError("cell index out of range");
  if (count == 0) return;
  auto& r = cells_[i];
  const auto it = std::lower_bound(
      r.begin(), r.end(), j, [](const Cell& c, std::size_t col) { return c.col < col; });
  if (it != r.end() && it->col == j) {
    it->count += count;
  } else {
    r.insert(it, Cell{j, count});
  }
  grand_total_ += count;
}

std::vector<Count> ContingencyTable::RowTotals() const {
  std::vector<Count> totals(rows(), 0);
  for (std::size_t i = 0; i < rows(); ++i) {
    for (const Cell& c : cells_[i]) totals[i] += c.count;
  }
  return totals;
}

std::vector<Count> ContingencyTable::ColTotals() const {
  std::vector<Count> totals(cols(), 0);
  for (const auto& r : cells_) {
    for (const Cell& c : r) totals[c.col] += c.count;
  }
  return totals;
}

std::vector<std::size_t> ContingencyTable::ZeroRows() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows(); ++i) {
    if (cells_[i].empty()) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> ContingencyTable::ZeroCols() const {
  const auto totals = ColTotals();
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < totals.size(); ++j) {
    if (totals[j] == 0) out.push_back(j);
  }
  return out;
}

std::size_t ContingencyTable::NonZeros() const {
  std::size_t n = 0;
  for (const auto& r : cells_) n += r.size();
  return n;
}

std::optional<std::size_t> ContingencyTable::FindRow(
    std::string_view label) const {
  return FindLabel(row_index_, label);
}

std::optional<std::size_t> ContingencyTable::FindCol(
    std::string_view label) const {
  return FindLabel(col_index_, label);
}

std::vector<std::vector<Count>> ContingencyTable::ToDense() const {
  std::vector<std::vector<Count>> dense(rows(), std::vector<Count>(cols(), 0));
  for (std::size_t i = 0; i < rows(); ++i) {
    for (const Cell& c : cells_[i]) dense[i][c.col] = c.count;
  }
  return dense;
}

ContingencyTable ContingencyTable::SelectRows(
    std::span<const std::size_t> rows) const {
  std::vector<std::string> labels;
  labels.reserve(rows.size());
  for (const std::size_t i : rows) labels.push_back(row_labels_.at(i));
  ContingencyTable out(std::move(labels), col_labels_);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.cells_[k] = cells_[rows[k]];
    for (const Cell& c : out.cells_[k]) out.grand_total_ += c.count;
  }
  return out;
}

ContingencyTable ContingencyTable::SelectCols(
    std::span<const std::size_t> cols) const {
  std::vector<std::string> labels;
  std::vector<std::optional<std::size_t>> remap(this->cols());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    labels.push_back(col_labels_.at(cols[k]));
    remap[cols[k]] = k;
  }
  ContingencyTable out(row_labels_, std::move(labels));
  for (std::size_t i = 0; i < rows(); ++i) {
    for (const Cell& c : cells_[i]) {
      if (remap[c.col]) out.Add(i, *remap[c.col], c.count);
    }
  }
  return out;
}

RowGrouping RowGrouping::Consecutive(std::size_t rows, std::size_t group_size) {
  if (group_size == 0 || rows == 0 || rows % group_size != 0) {
    throw BoundsError(std::to_string(rows) + " rows cannot be split into groups of " +
                      std::to_string(group_size));
  }
  RowGrouping g;
  for (std::size_t start = 0; start < rows; start += group_size) {
    RowGroup group;
    group.label = "g" + std::to_string(start / group_size + 1);
    group.members.resize(group_size);
    std::iota(group.members.begin(), group.members.end(), start);
    g.groups.push_back(std::move(group));
  }
  return g;
}

BuildResult BuildTable(std::span<const TokenStream> streams,
                       const Vocabulary& vocab) {
  if (streams.empty()) throw DataError("empty record set");
  if (vocab.empty()) throw DataError("empty vocabulary");

  std::vector<std::string> cols;
  cols.reserve(vocab.size());
  for (const auto& e : vocab.entries()) cols.push_back(e.term);

  std::vector<std::vector<Cell>> per_record(streams.size());
  for (std::size_t i = 0; i < streams.size(); ++i) {
    std::unordered_map<std::size_t, Count> counts;
    for (const auto& tok : streams[i].tokens) {
      if (const auto j = vocab.Find(tok)) ++counts[*j];
    }
    auto& cells = per_record[i];
    for (const auto& [j, c] : counts) cells.push_back({j, c});
    std::sort(cells.begin(), cells.end(),
              [](const Cell& a, const Cell& b) { return a.col < b.col; });
  }

  BuildResult result;
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (per_record[i].empty()) {
      result.empty_records.push_back(streams[i].record_id);
    } else {
      rows.push_back(streams[i].record_id);
    }
  }
  result.table = ContingencyTable(std::move(rows), std::move(cols));
  std::size_t r = 0;
  for (const auto& cells : per_record) {
    if (cells.empty()) continue;
    for (const Cell& c : cells) result.table.Add(r, c.col, c.count);
    ++r;
  }
  return result;
}

BuildResult BuildTable(const RecordSet& records, const Vocabulary& vocab,
                       int threads) {
  if (records.empty()) throw DataError("empty record set");
  const auto streams = TokenizeRecords(records, threads);
  return BuildTable(std::span<const TokenStream>(streams), vocab);
}

ContingencyTable AggregateRows(const ContingencyTable& table,
                               const RowGrouping& grouping) {
  std::vector<bool> used(table.rows(), false);
  std::vector<std::string> labels;
  for (const auto& g : grouping.groups) {
    if (g.members.empty()) throw DataError("group '" + g.label + "' is empty");
    for (const std::size_t i : g.members) {
      if (i >= table.rows()) {
        throw BoundsError("group '" + g.label + "' has invalid row " +
                          std::to_string(i));
      }
      if (used[i]) {
        throw DataError("row '" + table.row_labels()[i] +
                        "' belongs to more than one group");
      }
      used[i] = true;
    }
    labels.push_back(g.label);
  }
  ContingencyTable out(std::move(labels), table.col_labels());
  for (std::size_t g = 0; g < grouping.groups.size(); ++g) {
    for (const std::size_t i : grouping.groups[g].members) {
      for (const Cell& c : table.row(i)) out.Add(g, c.col, c.count);
    }
  }
  return out;
}

ContingencyTable OrderRowsByScores(const ContingencyTable& table,
                                   std::span<const double> scores) {
  if (scores.size() != table.rows()) {
    throw DataError("score count " + std::to_string(scores.size()) +
                    " does not match row count " + std::to_string(table.rows()));
  }
  std::vector<std::size_t> order(table.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  return table.SelectRows(order);
}

ContingencyTable Transpose(const ContingencyTable& table) {
  ContingencyTable out(table.col_labels(), table.row_labels());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (const Cell& c : table.row(i)) out.Add(c.col, i, c.count);
  }
  return out;
}

void WriteTableTsv(const ContingencyTable& table, std::ostream& out) {
  out << "#rows " << table.rows() << " #cols " << table.cols() << " #total "
      << table.grand_total() << '\n';
  for (const auto& l : table.row_labels()) out << "#row\t" << l << '\n';
  for (const auto& l : table.col_labels()) out << "#col\t" << l << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (const Cell& c : table.row(i)) {
      out << table.row_labels()[i] << '\t' << table.col_labels()[c.col] << '\t'
          << c.count << '\n';
    }
  }
}

ContingencyTable ReadTableTsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty table file");
  std::size_t n = 0, m = 0;
  Count total = 0;
  {
    std::istringstream header(line);
    std::string k1, k2, k3;
    if (!(header >> k1 >> n >> k2 >> m >> k3 >> total) || k1 != "#rows" ||
        k2 != "#cols" || k3 != "#total") {
      throw DataError("bad table header: '" + line + "'");
    }
  }

  std::vector<std::string> rows, cols;
  std::unordered_map<std::string, std::size_t> row_index, col_index;
  struct Entry {
    std::size_t i, j;
    Count c;
  };
  std::vector<Entry> entries;
  auto intern = [](std::vector<std::string>& labels,
                   std::unordered_map<std::string, std::size_t>& index,
                   std::string_view label) {
    const auto [it, inserted] = index.emplace(std::string(label), labels.size());
    if (inserted) labels.emplace_back(label);
    return it->second;
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = SplitTabs(line);
    if (parts[0] == "#row" && parts.size() == 2) {
      if (row_index.contains(std::string(parts[1]))) {
        throw DataError("duplicate row label '" + std::string(parts[1]) + "'");
      }
      intern(rows, row_index, parts[1]);
      continue;
    }
    if (parts[0] == "#col" && parts.size() == 2) {
      if (col_index.contains(std::string(parts[1]))) {
        throw DataError("duplicate column label '" + std::string(parts[1]) + "'");
      }
      intern(cols, col_index, parts[1]);
      continue;
    }
    if (line.starts_with('#')) continue;
    if (parts.size() != 3) {
      throw DataError("table line " + std::to_string(line_no) +
                      ": expected row<TAB>col<TAB>count");
    }
    Count c = 0;
    const auto [p, ec] =
        std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), c);
    if (ec != std::errc() || p != parts[2].data() + parts[2].size()) {
      throw DataError("table line " + std::to_string(line_no) +
                      ": count must be a non-negative integer");
    }
    entries.push_back(
        {intern(rows, row_index, parts[0]), intern(cols, col_index, parts[1]), c});
  }
  if (rows.size() != n || cols.size() != m) {
    throw DataError("table header declares " + std::to_string(n) + "x" +
                    std::to_string(m) + " but body has " +
                    std::to_string(rows.size()) + "x" + std::to_string(cols.size()));
  }
  ContingencyTable t(std::move(rows), std::move(cols));
  for (const auto& e : entries) t.Add(e.i, e.j, e.c);
  if (t.grand_total() != total) {
    throw DataError("table header total " + std::to_string(total) +
                    " does not match cell sum " + std::to_string(t.grand_total()));
  }
  return t;
}

RowGrouping ReadGroupsTsv(std::istream& in, const ContingencyTable& table) {
  RowGrouping grouping;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.starts_with('#')) continue;
    const auto parts = SplitTabs(line);
    if (parts.size() != 2) {
      throw DataError("groups line " + std::to_string(line_no) +
                      ": expected group<TAB>row_label");
    }
    const auto row = table.FindRow(parts[1]);
    if (!row) {
      throw DataError("groups line " + std::to_string(line_no) +
                      ": unknown row '" + std::string(parts[1]) + "'");
    }
    const auto [it, inserted] =
        index.emplace(std::string(parts[0]), grouping.groups.size());
    if (inserted) grouping.groups.push_back({std::string(parts[0]), {}});
    grouping.groups[it->second].members.push_back(*row);
  }
  if (grouping.groups.empty()) throw DataError("groups file is empty");
  return grouping;
}

}  // namespace cafactor
