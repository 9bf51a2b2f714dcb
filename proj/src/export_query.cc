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

#include "cafactor/export_query.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "cafactor/errors.h"

namespace cafactor {

namespace {

constexpr std::string_view kFieldNames[] = {"id", "xcoord", "ycoord", "name",
                                            "recipe"};

void AppendUtf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string UnescapeXml(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    const std::size_t semi = text.find(';', i);
    if (semi == std::string_view::npos) throw DataError("unterminated XML entity");
    const std::string_view ent = text.substr(i + 1, semi - i - 1);
    if (ent == "amp") {
      out.push_back('&');
    } else if (ent == "lt") {
      out.push_back('<');
    } else if (ent == "gt") {
      out.push_back('>');
    } else if (ent == "quot") {
      out.push_back('"');
    } else if (ent == "apos") {
      out.push_back('\'');
    } else if (ent.starts_with('#')) {
      std::uint32_t cp = 0;
      const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      const std::string_view digits = ent.substr(hex ? 2 : 1);
      const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                           cp, hex ? 16 : 10);
      if (ec != std::errc() || p != digits.data() + digits.size() || cp > 0x10FFFF) {
        throw DataError("bad character reference &" + std::string(ent) + ";");
      }
      AppendUtf8(out, cp);
    } else {
      throw DataError("unknown XML entity &" + std::string(ent) + ";");
    }
    i = semi;
  }
  return out;
}

double ParseCoordinate(std::string_view text) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw DataError("bad coordinate '" + std::string(text) + "'");
  }
  return v;
}

double ParseNumber(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  return ParseCoordinate(text);
}

// Minimal cursor over the fixed export schema.
class XmlReader {
 public:
  explicit XmlReader(std::string_view xml) : xml_(xml) {}

  void SkipSpace() {
    while (pos_ < xml_.size() &&
           (xml_[pos_] == ' ' || xml_[pos_] == '\n' || xml_[pos_] == '\r' ||
            xml_[pos_] == '\t')) {
      ++pos_;
    }
  }
  bool Consume(std::string_view token) {
    SkipSpace();
    if (xml_.substr(pos_).starts_with(token)) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  void Expect(std::string_view token) {
    if (!Consume(token)) {
      throw DataError("malformed XML near byte " + std::to_string(pos_) +
                      ": expected '" + std::string(token) + "'");
    }
  }
  // Raw text up to the next '<'.
  std::string_view TextUntilTag() {
    const std::size_t end = xml_.find('<', pos_);
    if (end == std::string_view::npos) throw DataError("unterminated XML element");
    const std::string_view t = xml_.substr(pos_, end - pos_);
    pos_ = end;
    return t;
  }
  bool AtEnd() {
    SkipSpace();
    return pos_ >= xml_.size();
  }

 private:
  std::string_view xml_;
  std::size_t pos_ = 0;
};

void CheckExportable(std::span<const FactorRecord> records) {
  std::unordered_set<std::string_view> ids;
  for (const auto& r : records) {
    if (r.id.empty()) throw DataError("record with empty id");
    if (!ids.insert(r.id).second) throw DataError("duplicate id '" + r.id + "'");
    if (!std::isfinite(r.xcoord) || !std::isfinite(r.ycoord)) {
      throw DataError("non-finite coordinate for '" + r.id + "'");
    }
  }
}

std::string FirstLine(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos) {
      const auto last = line.find_last_not_of(" \t\r");
      return std::string(line.substr(first, last - first + 1));
    }
    pos = end + 1;
  }
  return {};
}

}  // namespace

std::string FormatCoordinate(double v) {
  char buf[512];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  if (r.ec != std::errc()) throw DataError("coordinate out of range");
  return std::string(buf, r.ptr);
}

std::string EscapeXml(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        if ((c < 0x20 && ch != '\n' && ch != '\t') || c == 0x7F) {
          out += "&#" + std::to_string(c) + ";";
        } else {
          out.push_back(ch);
        }
    }
  }
  return out;
}

std::size_t ExportXml(std::span<const FactorRecord> records, std::ostream& out) {
  CheckExportable(records);
  if (records.empty()) {
    out << "<add></add>\n";
    return 0;
  }
  std::string buf = "<add>\n";
  for (const auto& r : records) {
    const std::string values[] = {EscapeXml(r.id), FormatCoordinate(r.xcoord),
                                  FormatCoordinate(r.ycoord), EscapeXml(r.name),
                                  EscapeXml(r.body)};
    buf += "<doc>\n";
    for (std::size_t f = 0; f < 5; ++f) {
      buf += "<field name=\"";
      buf += kFieldNames[f];
      buf += "\">";
      buf += values[f];
      buf += "</field>\n";
    }
    buf += "</doc>\n";
  }
  buf += "</add>\n";
  out << buf;
  if (!out) throw DataError("failed to write XML");
  return records.size();
}

std::vector<FactorRecord> ParseXml(std::string_view xml) {
  XmlReader reader(xml);
  std::vector<FactorRecord> records;
  reader.Expect("<add>");
  while (!reader.Consume("</add>")) {
    reader.Expect("<doc>");
    FactorRecord r;
    for (const std::string_view name : kFieldNames) {
      reader.Expect("<field name=\"" + std::string(name) + "\">");
      const std::string value = UnescapeXml(reader.TextUntilTag());
      reader.Expect("</field>");
      if (name == "id") {
        r.id = value;
      } else if (name == "xcoord") {
        r.xcoord = ParseCoordinate(value);
      } else if (name == "ycoord") {
        r.ycoord = ParseCoordinate(value);
      } else if (name == "name") {
        r.name = value;
      } else {
        r.body = value;
      }
    }
    reader.Expect("</doc>");
    records.push_back(std::move(r));
  }
  if (!reader.AtEnd()) throw DataError("trailing content after </add>");
  return records;
}

std::vector<FactorRecord> MakeFactorRecords(const CorrespondenceModel& model,
                                            const RecordSet& records) {
  std::vector<FactorRecord> out;
  for (const auto& rec : records.records) {
    const auto i = model.FindRow(rec.id);
    if (!i) continue;
    FactorRecord fr;
    fr.id = rec.id;
    fr.name = FirstLine(rec.text);
    const auto row = static_cast<Eigen::Index>(*i);
    if (model.rank() >= 1) fr.xcoord = model.row_coords(row, 0);
    if (model.rank() >= 2) fr.ycoord = model.row_coords(row, 1);
    fr.body = rec.text;
    out.push_back(std::move(fr));
  }
  return out;
}

BoundingBox BoundingBox::Make(double x_min, double x_max, double y_min,
                              double y_max) {
  if (!(x_min <= x_max) || !(y_min <= y_max)) {
    throw BoundsError("bounding box needs min <= max on both axes");
  }
  return {x_min, x_max, y_min, y_max};
}

BoundingBox BoundingBox::Parse(std::string_view spec) {
  double v[4];
  std::size_t start = 0;
  for (int k = 0; k < 4; ++k) {
    const std::size_t comma = spec.find(',', start);
    if ((k < 3) == (comma == std::string_view::npos)) {
      throw BoundsError("box must be XMIN,XMAX,YMIN,YMAX");
    }
    const std::size_t end = k < 3 ? comma : spec.size();
    try {
      v[k] = ParseNumber(spec.substr(start, end - start));
    } catch (const DataError&) {
      throw BoundsError("box must be XMIN,XMAX,YMIN,YMAX");
    }
    start = end + 1;
  }
  return Make(v[0], v[1], v[2], v[3]);
}

std::vector<std::string> BboxQuery(std::span<const FactorRecord> records,
                                   const BoundingBox& box) {
  std::vector<std::string> ids;
  for (const auto& r : records) {
    if (box.Contains(r.xcoord, r.ycoord)) ids.push_back(r.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

BoundingBox CenterBox(double x, double y, double half_width, double half_height) {
  if (half_width < 0 || half_height < 0) {
    throw BoundsError("half extents must be non-negative");
  }
  return BoundingBox::Make(x - half_width, x + half_width, y - half_height,
                           y + half_height);
}

BoundingBox CenterBox(const CorrespondenceModel& model, std::string_view label,
                      double half_width, double half_height) {
  const auto j = model.FindCol(label);
  if (!j) throw DataError("unknown column label '" + std::string(label) + "'");
  const auto row = static_cast<Eigen::Index>(*j);
  const double x = model.rank() >= 1 ? model.col_coords(row, 0) : 0.0;
  const double y = model.rank() >= 2 ? model.col_coords(row, 1) : 0.0;
  return CenterBox(x, y, half_width, half_height);
}

}  // namespace cafactor
