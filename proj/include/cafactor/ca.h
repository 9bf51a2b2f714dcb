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

// Correspondence analysis of a contingency table.
//
// With f_ij = n_ij / N and marginal masses f_i, f_j, the fit works on the
// standardized residuals
//
//   s_ij = (f_ij - f_i f_j) / sqrt(f_i f_j)
//
// and diagonalizes whichever of S S^T or S^T S is smaller. The non-zero
// eigenvalues are the factor inertias; their sum is the total inertia
// (chi-squared / N). Row and column principal coordinates are linked by the
// transition formulas
//
//   F(i,k) = 1/sqrt(l_k) * sum_j (f_ij / f_i) G(j,k)
//   G(j,k) = 1/sqrt(l_k) * sum_i (f_ij / f_j) F(i,k)
//
// which are also how supplementary rows and columns are placed.

#ifndef CAFACTOR_CA_H_
#define CAFACTOR_CA_H_

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cafactor/matrix.h"

namespace cafactor {

struct FitOptions {
  // Factors with eigenvalue below relative_cutoff * l_1 are numerically null.
  double relative_cutoff = 1e-12;
  // Eigenvalues are bounded by 1; anything below this is rounding noise.
  double absolute_cutoff = 1e-13;
};

// A fitted analysis. Only rows and columns with non-zero mass are active;
// zero-mass labels are listed in dropped_rows / dropped_cols.
class CorrespondenceModel {
 public:
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::string> dropped_rows;
  std::vector<std::string> dropped_cols;
  Count grand_total = 0;

  Eigen::VectorXd row_masses;  // f_i, sums to 1
  Eigen::VectorXd col_masses;  // f_j, sums to 1
  Eigen::VectorXd eigenvalues;  // non-increasing, length rank()
  Eigen::MatrixXd row_coords;   // n x rank, principal coordinates
  Eigen::MatrixXd col_coords;   // m x rank
  // Squared chi-squared distance of each profile from the centroid.
  Eigen::VectorXd row_dist2;
  Eigen::VectorXd col_dist2;
  double total_inertia = 0.0;

  std::size_t rank() const { return static_cast<std::size_t>(eigenvalues.size()); }
  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }

  std::optional<std::size_t> FindRow(std::string_view label) const;
  std::optional<std::size_t> FindCol(std::string_view label) const;

  // Rebuilds the label lookup tables; called by Fit and ReadModel.
  void IndexLabels();

 private:
  std::unordered_map<std::string, std::size_t> row_index_;
  std::unordered_map<std::string, std::size_t> col_index_;
};

// Throws DegenerateError unless the table has at least two non-zero rows
// and two non-zero columns. A table with no structure beyond independence
// fits with rank 0 and total inertia 0.
CorrespondenceModel Fit(const ContingencyTable& table,
                        const FitOptions& options = {});

// Total inertia straight from the definition, sum (f_ij - f_i f_j)^2/(f_i f_j),
// skipping zero-mass rows and columns.
double TotalInertia(const ContingencyTable& table);

struct SupplementaryError {
  std::string label;
  std::string message;
};

struct SupplementaryProjection {
  std::vector<std::string> labels;  // projected elements, input order
  Eigen::MatrixXd coords;           // labels.size() x rank
  std::vector<SupplementaryError> errors;
};

// Projects the rows of `sup` into the row space of `model`. Columns of
// `sup` are matched to the model by label; an unknown label, or counts in a
// column the model dropped, raise AlignmentError. Rows with zero total
// become error entries.
SupplementaryProjection ProjectSupplementaryRows(const CorrespondenceModel& model,
                                                 const ContingencyTable& sup);

// Dual of ProjectSupplementaryRows: `sup` holds the new columns as its
// columns, with rows matched to the model's row labels.
SupplementaryProjection ProjectSupplementaryCols(const CorrespondenceModel& model,
                                                 const ContingencyTable& sup);

struct EigenReportRow {
  std::size_t factor;  // 1-based
  double eigenvalue;
  double percent;
  double cumulative_percent;
};

std::vector<EigenReportRow> EigenReport(const CorrespondenceModel& model);

// Absolute contributions CTR = f * coord^2 / l_k and squared correlations
// COS2 = coord^2 / dist2 for every element and factor.
struct Contributions {
  Eigen::MatrixXd row_ctr;
  Eigen::MatrixXd row_cos2;
  Eigen::MatrixXd col_ctr;
  Eigen::MatrixXd col_cos2;
  // Per factor, the element with the largest CTR (lowest index on ties).
  std::vector<std::size_t> row_argmax;
  std::vector<std::size_t> col_argmax;
};

Contributions ComputeContributions(const CorrespondenceModel& model);

// Binary model file. Little-endian host layout, magic "CAFM", version 1.
void WriteModel(const CorrespondenceModel& model, std::ostream& out);
CorrespondenceModel ReadModel(std::istream& in);

// label<TAB>F1<TAB>F2... with a header line.
void WriteCoordsTsv(const std::vector<std::string>& labels,
                    const Eigen::MatrixXd& coords, std::ostream& out);

}  // namespace cafactor

#endif  // CAFACTOR_CA_H_
