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

#include "cafactor/ca.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "cafactor/errors.h"

namespace cafactor {

namespace {

struct ActiveTable {
  std::vector<std::size_t> rows;  // indices into the source table
  std::vector<std::size_t> cols;
  std::vector<std::ptrdiff_t> col_pos;  // source column -> active position, -1
  std::vector<Count> row_totals;        // per active row
  std::vector<Count> col_totals;        // per active column
  Count total = 0;
};

ActiveTable SelectActive(const ContingencyTable& table) {
  ActiveTable a;
  const auto rt = table.RowTotals();
  const auto ct = table.ColTotals();
  a.col_pos.assign(table.cols(), -1);
  for (std::size_t i = 0; i < rt.size(); ++i) {
    if (rt[i] > 0) {
      a.rows.push_back(i);
      a.row_totals.push_back(rt[i]);
    }
  }
  for (std::size_t j = 0; j < ct.size(); ++j) {
    if (ct[j] > 0) {
      a.col_pos[j] = static_cast<std::ptrdiff_t>(a.cols.size());
      a.cols.push_back(j);
      a.col_totals.push_back(ct[j]);
    }
  }
  a.total = table.grand_total();
  return a;
}

// Dense standardized residual matrix over the active rows and columns.
Eigen::MatrixXd StandardizedResiduals(const ContingencyTable& table,
                                      const ActiveTable& a,
                                      const Eigen::VectorXd& r,
                                      const Eigen::VectorXd& c) {
  const auto n = static_cast<Eigen::Index>(a.rows.size());
  const auto m = static_cast<Eigen::Index>(a.cols.size());
  const double total = static_cast<double>(a.total);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const Cell& cell : table.row(a.rows[i])) {
      f(i, a.col_pos[cell.col]) = static_cast<double>(cell.count) / total;
    }
  }
  const Eigen::VectorXd rs = r.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd cs = c.cwiseSqrt().cwiseInverse();
  return rs.asDiagonal() * (f - r * c.transpose()) * cs.asDiagonal();
}

void WriteU64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t ReadU64(std::istream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw DataError("truncated model file");
  }
  return v;
}

void WriteString(std::ostream& out, const std::string& s) {
  WriteU64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string ReadString(std::istream& in) {
  const std::uint64_t n = ReadU64(in);
  if (n > (1ull << 32)) throw DataError("corrupt model file: string length");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw DataError("truncated model file");
  }
  return s;
}

void WriteStrings(std::ostream& out, const std::vector<std::string>& v) {
  WriteU64(out, v.size());
  for (const auto& s : v) WriteString(out, s);
}

std::vector<std::string> ReadStrings(std::istream& in) {
  const std::uint64_t n = ReadU64(in);
  if (n > (1ull << 32)) throw DataError("corrupt model file: label count");
  std::vector<std::string> v;
  v.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) v.push_back(ReadString(in));
  return v;
}

void WriteMatrix(std::ostream& out, const Eigen::MatrixXd& m) {
  WriteU64(out, static_cast<std::uint64_t>(m.rows()));
  WriteU64(out, static_cast<std::uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Eigen::MatrixXd ReadMatrix(std::istream& in) {
  const std::uint64_t rows = ReadU64(in);
  const std::uint64_t cols = ReadU64(in);
  if (rows > (1ull << 32) || cols > (1ull << 32)) {
    throw DataError("corrupt model file: matrix shape");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  if (!in.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)))) {
    throw DataError("truncated model file");
  }
  return m;
}

constexpr char kModelMagic[4] = {'C', 'A', 'F', 'M'};
constexpr std::uint64_t kModelVersion = 1;

}  // namespace

std::optional<std::size_t> CorrespondenceModel::FindRow(
    std::string_view label) const {
  const auto it = row_index_.find(std::string(label));
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> CorrespondenceModel::FindCol(
    std::string_view label) const {
  const auto it = col_index_.find(std::string(label));
  if (it == col_index_.end()) return std::nullopt;
  return it->second;
}

void CorrespondenceModel::IndexLabels() {
  row_index_.clear();
  col_index_.clear();
  for (std::size_t i = 0; i < row_labels.size(); ++i) row_index_[row_labels[i]] = i;
  for (std::size_t j = 0; j < col_labels.size(); ++j) col_index_[col_labels[j]] = j;
}

CorrespondenceModel Fit(const ContingencyTable& table,
                        const FitOptions& options) {
  const ActiveTable a = SelectActive(table);
  if (a.rows.size() < 2 || a.cols.size() < 2) {
    throw DegenerateError("correspondence analysis needs at least 2 non-zero "
                          "rows and 2 non-zero columns, got " +
                          std::to_string(a.rows.size()) + "x" +
                          std::to_string(a.cols.size()));
  }

  CorrespondenceModel model;
  model.grand_total = a.total;
  for (const std::size_t i : a.rows) model.row_labels.push_back(table.row_labels()[i]);
  for (const std::size_t j : a.cols) model.col_labels.push_back(table.col_labels()[j]);
  for (const std::size_t i : table.ZeroRows()) {
    model.dropped_rows.push_back(table.row_labels()[i]);
  }
  for (const std::size_t j : table.ZeroCols()) {
    model.dropped_cols.push_back(table.col_labels()[j]);
  }

  const auto n = static_cast<Eigen::Index>(a.rows.size());
  const auto m = static_cast<Eigen::Index>(a.cols.size());
  const double total = static_cast<double>(a.total);
  Eigen::VectorXd r(n), c(m);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = static_cast<double>(a.row_totals[i]) / total;
  for (Eigen::Index j = 0; j < m; ++j) c(j) = static_cast<double>(a.col_totals[j]) / total;
  model.row_masses = r;
  model.col_masses = c;

  const Eigen::MatrixXd s = StandardizedResiduals(table, a, r, c);
  model.total_inertia = s.squaredNorm();
  model.row_dist2 = s.rowwise().squaredNorm().cwiseQuotient(r);
  model.col_dist2 = s.colwise().squaredNorm().transpose().cwiseQuotient(c);

  // Eigen-reduction on the smaller side.
  const bool rows_side = n <= m;
  const Eigen::MatrixXd gram =
      rows_side ? Eigen::MatrixXd(s * s.transpose()) : Eigen::MatrixXd(s.transpose() * s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw DegenerateError("eigen-decomposition did not converge");
  }
  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::Index dim = values.size();
  const double top = std::max(values(dim - 1), 0.0);
  Eigen::Index rank = 0;
  while (rank < dim) {
    const double v = values(dim - 1 - rank);
    if (v < options.absolute_cutoff || v < options.relative_cutoff * top) break;
    ++rank;
  }
  rank = std::min<Eigen::Index>(rank, std::min(n, m) - 1);

  model.eigenvalues.resize(rank);
  Eigen::MatrixXd vectors(dim, rank);
  for (Eigen::Index k = 0; k < rank; ++k) {
    model.eigenvalues(k) = values(dim - 1 - k);
    vectors.col(k) = solver.eigenvectors().col(dim - 1 - k);
  }
  const Eigen::VectorXd root = model.eigenvalues.cwiseSqrt();
  const Eigen::VectorXd r_isqrt = r.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd c_isqrt = c.cwiseSqrt().cwiseInverse();
  if (rows_side) {
    model.row_coords = r_isqrt.asDiagonal() * vectors * root.asDiagonal();
    model.col_coords = c_isqrt.asDiagonal() * (s.transpose() * vectors);
  } else {
    model.col_coords = c_isqrt.asDiagonal() * vectors * root.asDiagonal();
    model.row_coords = r_isqrt.asDiagonal() * (s * vectors);
  }

  // Sign convention: the largest-magnitude column coordinate is positive.
  for (Eigen::Index k = 0; k < rank; ++k) {
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < m; ++j) {
      if (std::abs(model.col_coords(j, k)) > std::abs(model.col_coords(arg, k))) {
        arg = j;
      }
    }
    if (model.col_coords(arg, k) < 0) {
      model.col_coords.col(k) *= -1.0;
      model.row_coords.col(k) *= -1.0;
    }
  }
  model.IndexLabels();
  return model;
}

double TotalInertia(const ContingencyTable& table) {
  const auto rt = table.RowTotals();
  const auto ct = table.ColTotals();
  const double total = static_cast<double>(table.grand_total());
  if (total == 0) return 0.0;
  // Direct sum over every active cell, zero cells included.
  double sum = 0.0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (rt[i] == 0) continue;
    const double fi = static_cast<double>(rt[i]) / total;
    std::size_t next = 0;
    const auto row = table.row(i);
    for (std::size_t j = 0; j < table.cols(); ++j) {
      if (ct[j] == 0) continue;
      const double fj = static_cast<double>(ct[j]) / total;
      double fij = 0.0;
      while (next < row.size() && row[next].col < j) ++next;
      if (next < row.size() && row[next].col == j) {
        fij = static_cast<double>(row[next].count) / total;
      }
      const double d = fij - fi * fj;
      sum += d * d / (fi * fj);
    }
  }
  return sum;
}

SupplementaryProjection ProjectSupplementaryRows(const CorrespondenceModel& model,
                                                 const ContingencyTable& sup) {
  const auto rank = static_cast<Eigen::Index>(model.rank());
  std::vector<std::ptrdiff_t> col_map(sup.cols(), -1);
  for (std::size_t j = 0; j < sup.cols(); ++j) {
    const std::string& label = sup.col_labels()[j];
    if (const auto pos = model.FindCol(label)) {
      col_map[j] = static_cast<std::ptrdiff_t>(*pos);
    } else if (std::find(model.dropped_cols.begin(), model.dropped_cols.end(),
                         label) == model.dropped_cols.end()) {
      throw AlignmentError("supplementary column '" + label +
                           "' is not a column of the model");
    }
  }
  const auto totals = sup.ColTotals();
  for (std::size_t j = 0; j < sup.cols(); ++j) {
    if (col_map[j] < 0 && totals[j] > 0) {
      throw AlignmentError("supplementary counts in column '" +
                           sup.col_labels()[j] + "', which has zero mass in the model");
    }
  }

  SupplementaryProjection out;
  std::vector<Eigen::VectorXd> rows;
  Eigen::VectorXd inv_root = model.eigenvalues.cwiseSqrt().cwiseInverse();
  for (std::size_t i = 0; i < sup.rows(); ++i) {
    Count row_total = 0;
    for (const Cell& cell : sup.row(i)) row_total += cell.count;
    if (row_total == 0) {
      out.errors.push_back({sup.row_labels()[i], "zero total"});
      continue;
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(rank);
    for (const Cell& cell : sup.row(i)) {
      const double profile = static_cast<double>(cell.count) / static_cast<double>(row_total);
      acc += profile * model.col_coords.row(col_map[cell.col]).transpose();
    }
    rows.push_back(acc.cwiseProduct(inv_root));
    out.labels.push_back(sup.row_labels()[i]);
  }
  out.coords.resize(static_cast<Eigen::Index>(rows.size()), rank);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.coords.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return out;
}

SupplementaryProjection ProjectSupplementaryCols(const CorrespondenceModel& model,
                                                 const ContingencyTable& sup) {
  CorrespondenceModel dual;
  dual.row_labels = model.col_labels;
  dual.col_labels = model.row_labels;
  dual.dropped_rows = model.dropped_cols;
  dual.dropped_cols = model.dropped_rows;
  dual.eigenvalues = model.eigenvalues;
  dual.row_coords = model.col_coords;
  dual.col_coords = model.row_coords;
  dual.IndexLabels();
  return ProjectSupplementaryRows(dual, Transpose(sup));
}

std::vector<EigenReportRow> EigenReport(const CorrespondenceModel& model) {
  std::vector<EigenReportRow> report;
  const double sum = model.eigenvalues.sum();
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < model.eigenvalues.size(); ++k) {
    const double pct = 100.0 * model.eigenvalues(k) / sum;
    cumulative += pct;
    report.push_back({static_cast<std::size_t>(k + 1), model.eigenvalues(k),
                      pct, cumulative});
  }
  if (!report.empty()) report.back().cumulative_percent = 100.0;
  return report;
}

Contributions ComputeContributions(const CorrespondenceModel& model) {
  Contributions out;
  const Eigen::VectorXd inv_lambda = model.eigenvalues.cwiseInverse();
  auto fill = [&](const Eigen::MatrixXd& coords, const Eigen::VectorXd& masses,
                  const Eigen::VectorXd& dist2, Eigen::MatrixXd& ctr,
                  Eigen::MatrixXd& cos2, std::vector<std::size_t>& argmax) {
    const Eigen::MatrixXd sq = coords.cwiseAbs2();
    ctr = masses.asDiagonal() * sq * inv_lambda.asDiagonal();
    cos2.resize(sq.rows(), sq.cols());
    for (Eigen::Index i = 0; i < sq.rows(); ++i) {
      cos2.row(i) = dist2(i) > 0 ? Eigen::RowVectorXd(sq.row(i) / dist2(i))
                                 : Eigen::RowVectorXd::Zero(sq.cols());
    }
    argmax.assign(static_cast<std::size_t>(sq.cols()), 0);
    for (Eigen::Index k = 0; k < sq.cols(); ++k) {
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < ctr.rows(); ++i) {
        if (ctr(i, k) > ctr(best, k)) best = i;
      }
      argmax[static_cast<std::size_t>(k)] = static_cast<std::size_t>(best);
    }
  };
  fill(model.row_coords, model.row_masses, model.row_dist2, out.row_ctr,
       out.row_cos2, out.row_argmax);
  fill(model.col_coords, model.col_masses, model.col_dist2, out.col_ctr,
       out.col_cos2, out.col_argmax);
  return out;
}

void WriteModel(const CorrespondenceModel& model, std::ostream& out) {
  out.write(kModelMagic, sizeof(kModelMagic));
  WriteU64(out, kModelVersion);
  WriteStrings(out, model.row_labels);
  WriteStrings(out, model.col_labels);
  WriteStrings(out, model.dropped_rows);
  WriteStrings(out, model.dropped_cols);
  WriteU64(out, model.grand_total);
  std::uint64_t bits;
  std::memcpy(&bits, &model.total_inertia, sizeof(bits));
  WriteU64(out, bits);
  WriteMatrix(out, model.row_masses);
  WriteMatrix(out, model.col_masses);
  WriteMatrix(out, model.eigenvalues);
  WriteMatrix(out, model.row_coords);
  WriteMatrix(out, model.col_coords);
  WriteMatrix(out, model.row_dist2);
  WriteMatrix(out, model.col_dist2);
  if (!out) throw DataError("failed to write model");
}

CorrespondenceModel ReadModel(std::istream& in) {
  char magic[4];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw DataError("not a model file");
  }
  if (ReadU64(in) != kModelVersion) throw DataError("unsupported model version");
  CorrespondenceModel model;
  model.row_labels = ReadStrings(in);
  model.col_labels = ReadStrings(in);
  model.dropped_rows = ReadStrings(in);
  model.dropped_cols = ReadStrings(in);
  model.grand_total = ReadU64(in);
  const std::uint64_t bits = ReadU64(in);
  std::memcpy(&model.total_inertia, &bits, sizeof(bits));
  model.row_masses = ReadMatrix(in);
  model.col_masses = ReadMatrix(in);
  model.eigenvalues = ReadMatrix(in);
  model.row_coords = ReadMatrix(in);
  model.col_coords = ReadMatrix(in);
  model.row_dist2 = ReadMatrix(in);
  model.col_dist2 = ReadMatrix(in);
  const auto n = static_cast<Eigen::Index>(model.row_labels.size());
  const auto m = static_cast<Eigen::Index>(model.col_labels.size());
  const Eigen::Index r = model.eigenvalues.size();
  if (model.row_masses.size() != n || model.col_masses.size() != m ||
      model.row_coords.rows() != n || model.row_coords.cols() != r ||
      model.col_coords.rows() != m || model.col_coords.cols() != r ||
      model.row_dist2.size() != n || model.col_dist2.size() != m) {
    throw DataError("corrupt model file: inconsistent shapes");
  }
  model.IndexLabels();
  return model;
}

void WriteCoordsTsv(const std::vector<std::string>& labels,
                    const Eigen::MatrixXd& coords, std::ostream& out) {
  out << "label";
  for (Eigen::Index k = 0; k < coords.cols(); ++k) out << "\tF" << (k + 1);
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels[i];
    for (Eigen::Index k = 0; k < coords.cols(); ++k) {
      const auto res = std::to_chars(buf, buf + sizeof(buf),
                                     coords(static_cast<Eigen::Index>(i), k));
      out << '\t' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace cafactor
