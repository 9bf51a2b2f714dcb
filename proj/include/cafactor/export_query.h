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

// Search-index XML export of factor-annotated documents, and bounding-box
// queries over factor-plane coordinates.
//
// Output layout (UTF-8, byte-deterministic):
//
//   <add>
//   <doc>
//   <field name="id">mm000001102.txt</field>
//   <field name="xcoord">-0.7341409</field>
//   <field name="ycoord">-0.09961348</field>
//   <field name="name">&quot;21&quot; Club Rice Pudding</field>
//   <field name="recipe">...</field>
//   </doc>
//   </add>
//
// An empty export is the single line "<add></add>".

#ifndef CAFACTOR_EXPORT_QUERY_H_
#define CAFACTOR_EXPORT_QUERY_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cafactor/ca.h"
#include "cafactor/corpus.h"

namespace cafactor {

struct FactorRecord {
  std::string id;
  std::string name;
  double xcoord = 0.0;  // factor 1
  double ycoord = 0.0;  // factor 2
  std::string body;

  friend bool operator==(const FactorRecord&, const FactorRecord&) = default;
};

// Shortest fixed-notation decimal that reads back as the same double.
std::string FormatCoordinate(double v);

// Escapes & < > " and control characters other than tab and newline.
std::string EscapeXml(std::string_view text);

// Writes the whole document. Duplicate or empty ids and non-finite
// coordinates are rejected before anything is written. Returns the number of
// documents.
std::size_t ExportXml(std::span<const FactorRecord> records, std::ostream& out);

// Reads a document produced by ExportXml.
std::vector<FactorRecord> ParseXml(std::string_view xml);

// One FactorRecord per fitted row that has a matching record, in record
// order. The name is the first non-blank line of the text, trimmed.
std::vector<FactorRecord> MakeFactorRecords(const CorrespondenceModel& model,
                                            const RecordSet& records);

struct BoundingBox {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  // Throws BoundsError unless min <= max on both axes.
  static BoundingBox Make(double x_min, double x_max, double y_min, double y_max);
  // "XMIN,XMAX,YMIN,YMAX"
  static BoundingBox Parse(std::string_view spec);

  bool Contains(double x, double y) const {
    return x_min <= x && x <= x_max && y_min <= y && y <= y_max;
  }
};

// Ids of records inside the box (bounds inclusive), sorted by id.
std::vector<std::string> BboxQuery(std::span<const FactorRecord> records,
                                   const BoundingBox& box);

BoundingBox CenterBox(double x, double y, double half_width, double half_height);

// Box around the factor-plane position of column `label` of the model.
BoundingBox CenterBox(const CorrespondenceModel& model, std::string_view label,
                      double half_width, double half_height);

}  // namespace cafactor

#endif  // CAFACTOR_EXPORT_QUERY_H_
