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

#include "cafactor/corpus.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <thread>
#include <unordered_set>

#include "cafactor/errors.h"
#include "json.hpp"

namespace cafactor {

namespace {

bool IsAsciiLetter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool IsAsciiDigit(unsigned char c) { return c >= '0' && c <= '9'; }

std::string FormatId(std::string_view prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", n);
  return std::string(prefix) + buf;
}

// Length of the UTF-8 sequence starting at `s[i]`, or 0 if invalid.
std::size_t Utf8SequenceLength(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t len;
  std::uint32_t min_cp;
  if (b0 < 0x80) return 1;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    min_cp = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    min_cp = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    min_cp = 0x10000;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  std::uint32_t cp = b0 & (0x7F >> len);
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

void CheckUniqueIds(const std::vector<Record>& records) {
  std::unordered_set<std::string_view> seen;
  for (const auto& r : records) {
    if (r.id.empty()) throw DataError("record with empty id");
    if (!seen.insert(r.id).second) {
      throw DataError("duplicate record id '" + r.id + "'");
    }
  }
}

}  // namespace

Encoding ParseEncoding(std::string_view name) {
  if (name == "latin1" || name == "latin-1" || name == "iso-8859-1") {
    return Encoding::kLatin1;
  }
  if (name == "utf8" || name == "utf-8") return Encoding::kUtf8;
  throw BoundsError("unknown encoding '" + std::string(name) + "'");
}

std::string DecodeText(std::string_view bytes, Encoding encoding) {
  if (encoding == Encoding::kUtf8) {
    for (std::size_t i = 0; i < bytes.size();) {
      const std::size_t len = Utf8SequenceLength(bytes, i);
      if (len == 0) throw DecodeError("invalid UTF-8 sequence", i);
      i += len;
    }
    return std::string(bytes);
  }
  std::string out;
  out.reserve(bytes.size());
  for (const char ch : bytes) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80) {
      out.push_back(ch);
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::string EncodeText(std::string_view utf8, Encoding encoding) {
  if (encoding == Encoding::kUtf8) return std::string(utf8);
  std::string out;
  out.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size();) {
    const auto c = static_cast<unsigned char>(utf8[i]);
    if (c < 0x80) {
      out.push_back(utf8[i]);
      ++i;
      continue;
    }
    const std::size_t len = Utf8SequenceLength(utf8, i);
    if (len != 2 || c > 0xC3) {
      throw DataError("text at offset " + std::to_string(i) +
                      " is not representable in Latin-1");
    }
    const auto c1 = static_cast<unsigned char>(utf8[i + 1]);
    out.push_back(static_cast<char>(((c & 0x03) << 6) | (c1 & 0x3F)));
    i += 2;
  }
  return out;
}

void RecordSet::Append(const RecordSet& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  delimiters.insert(delimiters.end(), other.delimiters.begin(),
                    other.delimiters.end());
  CheckUniqueIds(records);
}

DelimiterRule DelimiterRule::Literal(std::string marker) {
  if (marker.empty()) throw BoundsError("delimiter marker must be non-empty");
  DelimiterRule rule;
  rule.marker_ = std::move(marker);
  return rule;
}

DelimiterRule DelimiterRule::LineCount(std::size_t lines) {
  if (lines == 0) throw BoundsError("line count must be positive");
  DelimiterRule rule;
  rule.line_count_ = lines;
  return rule;
}

DelimiterRule DelimiterRule::Parse(std::string_view spec) {
  constexpr std::string_view kCount = "count:";
  if (spec.starts_with(kCount)) {
    const std::string_view digits = spec.substr(kCount.size());
    std::size_t n = 0;
    const auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw BoundsError("bad delimiter spec '" + std::string(spec) + "'");
    }
    return LineCount(n);
  }
  return Literal(std::string(spec));
}

RecordSet SplitRecords(std::string_view raw, const DelimiterRule& rule,
                       Encoding encoding, std::string_view id_prefix,
                       std::string_view source) {
  if (raw.empty()) throw DataError("empty input: no records");
  const std::string text = DecodeText(raw, encoding);

  RecordSet out;
  std::string current;
  std::size_t lines_in_current = 0;
  auto flush = [&](std::string delimiter) {
    out.records.push_back(
        {FormatId(id_prefix, out.records.size() + 1), std::move(current),
         std::string(source)});
    out.delimiters.push_back(std::move(delimiter));
    current.clear();
    lines_in_current = 0;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    end = (end == std::string::npos) ? text.size() : end + 1;
    const std::string_view line(text.data() + pos, end - pos);
    pos = end;

    if (rule.is_literal()) {
      std::string_view content = line;
      if (content.ends_with('\n')) content.remove_suffix(1);
      if (content.ends_with('\r')) content.remove_suffix(1);
      if (content == rule.marker()) {
        flush(std::string(line));
        continue;
      }
      current.append(line);
    } else {
      current.append(line);
      if (++lines_in_current == rule.line_count() && pos < text.size()) {
        flush("");
      }
    }
  }
  // Whatever follows the last delimiter is a record too, even if empty, so
  // that joining reproduces a trailing marker.
  if (!current.empty() || out.records.empty() || rule.is_literal()) {
    flush("");
  }
  return out;
}

std::string JoinRecords(const RecordSet& records, Encoding encoding) {
  std::string utf8;
  for (std::size_t i = 0; i < records.records.size(); ++i) {
    utf8 += records.records[i].text;
    if (i < records.delimiters.size()) utf8 += records.delimiters[i];
  }
  return EncodeText(utf8, encoding);
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  bool tainted = false;
  auto finish = [&] {
    if (!current.empty() && !tainted) tokens.push_back(std::move(current));
    current.clear();
    tainted = false;
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsAsciiLetter(c)) {
      current.push_back(static_cast<char>(c | 0x20));
    } else if (IsAsciiDigit(c) || c >= 0x80) {
      // Part of the run, but disqualifies it.
      current.push_back(ch);
      tainted = true;
    } else {
      finish();
    }
  }
  finish();
  return tokens;
}

std::vector<TokenStream> TokenizeRecords(const RecordSet& records,
                                         int threads) {
  const std::size_t n = records.size();
  std::vector<TokenStream> out(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i].record_id = records.records[i].id;
      out[i].tokens = Tokenize(records.records[i].text);
    }
  };
  const std::size_t t =
      std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(n, 1));
  if (t == 1) {
    work(0, n);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t block = (n + t - 1) / t;
  for (std::size_t b = 0; b < n; b += block) {
    pool.emplace_back(work, b, std::min(n, b + block));
  }
  return out;
}

Vocabulary Vocabulary::FromCounts(
    const std::unordered_map<std::string, std::uint64_t>& counts) {
  std::vector<VocabEntry> entries;
  entries.reserve(counts.size());
  for (const auto& [term, freq] : counts) {
    if (freq > 0) entries.push_back({term, freq, 0});
  }
  if (entries.empty()) throw DataError("empty vocabulary");
  std::sort(entries.begin(), entries.end(),
            [](const VocabEntry& a, const VocabEntry& b) {
              if (a.frequency != b.frequency) return a.frequency > b.frequency;
              return a.term < b.term;
            });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
  return FromEntries(std::move(entries));
}

Vocabulary Vocabulary::FromEntries(std::vector<VocabEntry> entries) {
  Vocabulary v;
  v.entries_ = std::move(entries);
  for (std::size_t i = 0; i < v.entries_.size(); ++i) {
    const VocabEntry& e = v.entries_[i];
    if (e.frequency == 0) throw DataError("zero frequency for '" + e.term + "'");
    if (e.rank != i + 1) throw DataError("ranks must run 1..n in order");
    if (i > 0 && v.entries_[i - 1].frequency < e.frequency) {
      throw DataError("frequencies must be non-increasing in rank");
    }
    if (!v.index_.emplace(e.term, i).second) {
      throw DataError("duplicate term '" + e.term + "'");
    }
  }
  return v;
}

std::optional<std::size_t> Vocabulary::Find(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::TotalFrequency() const {
  std::uint64_t total = 0;
  for (const auto& e : entries_) total += e.frequency;
  return total;
}

Vocabulary BuildVocabulary(std::span<const TokenStream> streams) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& s : streams) {
    for (const auto& t : s.tokens) ++counts[t];
  }
  if (counts.empty()) throw DataError("empty vocabulary: no tokens in input");
  return Vocabulary::FromCounts(counts);
}

Vocabulary TopTerms(const Vocabulary& vocab, std::size_t k) {
  if (k < 1 || k > vocab.size()) {
    throw BoundsError("top-k " + std::to_string(k) + " outside [1, " +
                      std::to_string(vocab.size()) + "]");
  }
  std::vector<VocabEntry> entries(vocab.entries().begin(),
                                  vocab.entries().begin() + k);
  return Vocabulary::FromEntries(std::move(entries));
}

Vocabulary FilterByLength(const Vocabulary& vocab, std::size_t min_length) {
  std::vector<VocabEntry> entries;
  for (const auto& e : vocab.entries()) {
    if (e.term.size() >= min_length) {
      entries.push_back(e);
      entries.back().rank = entries.size();
    }
  }
  if (entries.empty()) throw DataError("no terms survive the length filter");
  return Vocabulary::FromEntries(std::move(entries));
}

void WriteRecordsJsonl(const RecordSet& records, std::ostream& out) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records.records[i];
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["text"] = r.text;
    if (!r.source.empty()) j["source"] = r.source;
    if (i < records.delimiters.size() && !records.delimiters[i].empty()) {
      j["delimiter"] = records.delimiters[i];
    }
    out << j.dump() << '\n';
  }
}

RecordSet ReadRecordsJsonl(std::istream& in) {
  RecordSet out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      out.records.push_back({j.at("id").get<std::string>(),
                             j.at("text").get<std::string>(),
                             j.value("source", std::string())});
      out.delimiters.push_back(j.value("delimiter", std::string()));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("records line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  if (out.empty()) throw DataError("records file holds no records");
  CheckUniqueIds(out.records);
  return out;
}

void WriteVocabularyTsv(const Vocabulary& vocab, std::ostream& out) {
  for (const auto& e : vocab.entries()) {
    out << e.term << '\t' << e.frequency << '\t' << e.rank << '\n';
  }
}

Vocabulary ReadVocabularyTsv(std::istream& in) {
  std::vector<VocabEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 =
        t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw DataError("vocab line " + std::to_string(line_no) +
                      ": expected term<TAB>frequency<TAB>rank");
    }
    VocabEntry e;
    e.term = line.substr(0, t1);
    const auto parse = [&](std::size_t b, std::size_t end, auto& v) {
      const auto [p, ec] = std::from_chars(line.data() + b, line.data() + end, v);
      if (ec != std::errc() || p != line.data() + end) {
        throw DataError("vocab line " + std::to_string(line_no) +
                        ": bad number");
      }
    };
    parse(t1 + 1, t2, e.frequency);
    parse(t2 + 1, line.size(), e.rank);
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw DataError("empty vocabulary file");
  return Vocabulary::FromEntries(std::move(entries));
}

}  // namespace cafactor
