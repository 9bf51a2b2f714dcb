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

// Record splitting, term extraction and ranked vocabularies.
//
// Text is held internally as UTF-8. Raw input is decoded from a declared
// encoding (Latin-1 by default, which accepts every byte) and re-encoded on
// the way out, so a split followed by a join reproduces the input bytes.

#ifndef CAFACTOR_CORPUS_H_
#define CAFACTOR_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cafactor {

enum class Encoding { kLatin1, kUtf8 };

Encoding ParseEncoding(std::string_view name);

// Decodes `bytes` into UTF-8. Latin-1 never fails; UTF-8 input is validated
// and a DecodeError names the offset of the first bad byte.
std::string DecodeText(std::string_view bytes, Encoding encoding);

// Inverse of DecodeText. Code points above U+00FF cannot be written as
// Latin-1 and raise a DataError.
std::string EncodeText(std::string_view utf8, Encoding encoding);

struct Record {
  std::string id;
  std::string text;    // UTF-8
  std::string source;  // optional collection tag, e.g. the input file name
};

// Records in ingestion order. `delimiters[i]` holds the exact separator text
// that followed records[i] in the input (empty for the last record and for
// line-count splitting), which is what makes JoinRecords exact.
struct RecordSet {
  std::vector<Record> records;
  std::vector<std::string> delimiters;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  // Appends all records of `other`; ids must stay unique.
  void Append(const RecordSet& other);
};

// How raw text is cut into records: either at every line equal to a literal
// marker, or every `line_count` lines.
class DelimiterRule {
 public:
  static DelimiterRule Literal(std::string marker);
  static DelimiterRule LineCount(std::size_t lines);
  // Accepts "count:N" or any other string as a literal marker line.
  static DelimiterRule Parse(std::string_view spec);

  bool is_literal() const { return line_count_ == 0; }
  const std::string& marker() const { return marker_; }
  std::size_t line_count() const { return line_count_; }

 private:
  std::string marker_;
  std::size_t line_count_ = 0;
};

// Splits `raw` into records. Ids are `<id_prefix><n>` with n 1-based and
// zero-padded to six digits.
RecordSet SplitRecords(std::string_view raw, const DelimiterRule& rule,
                       Encoding encoding = Encoding::kLatin1,
                       std::string_view id_prefix = "rec-",
                       std::string_view source = "");

// Reconstructs the original byte stream from a split RecordSet.
std::string JoinRecords(const RecordSet& records,
                        Encoding encoding = Encoding::kLatin1);

struct TokenStream {
  std::string record_id;
  std::vector<std::string> tokens;
};

// Extracts terms: maximal runs of non-separator characters, where ASCII
// whitespace, punctuation and control characters separate. Runs are
// lowercased; runs holding a digit or any non-ASCII character are dropped.
std::vector<std::string> Tokenize(std::string_view text);

// Tokenizes every record. With threads > 1 records are processed in
// contiguous blocks; output order always follows the record order.
std::vector<TokenStream> TokenizeRecords(const RecordSet& records,
                                         int threads = 1);

struct VocabEntry {
  std::string term;
  std::uint64_t frequency = 0;
  std::size_t rank = 0;  // 1-based

  friend bool operator==(const VocabEntry&, const VocabEntry&) = default;
};

// Terms ranked by non-increasing frequency, ties broken by ascending byte
// order of the term.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Ranks `counts`. Throws DataError when empty.
  static Vocabulary FromCounts(
      const std::unordered_map<std::string, std::uint64_t>& counts);
  // Takes already-ranked entries and checks the invariants.
  static Vocabulary FromEntries(std::vector<VocabEntry> entries);

  const std::vector<VocabEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const VocabEntry& operator[](std::size_t i) const { return entries_[i]; }

  // Index of `term` in entries(), if present.
  std::optional<std::size_t> Find(std::string_view term) const;
  std::uint64_t TotalFrequency() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

Vocabulary BuildVocabulary(std::span<const TokenStream> streams);

// The k most frequent entries, re-ranked 1..k. Requires 1 <= k <= size.
Vocabulary TopTerms(const Vocabulary& vocab, std::size_t k);

// Keeps terms with at least `min_length` characters, re-ranked.
Vocabulary FilterByLength(const Vocabulary& vocab, std::size_t min_length);

// records.jsonl: one {"id","text","source"} object per line.
void WriteRecordsJsonl(const RecordSet& records, std::ostream& out);
RecordSet ReadRecordsJsonl(std::istream& in);

// vocab.tsv: term<TAB>frequency<TAB>rank, sorted by rank.
void WriteVocabularyTsv(const Vocabulary& vocab, std::ostream& out);
Vocabulary ReadVocabularyTsv(std::istream& in);

}  // namespace cafactor

#endif  // CAFACTOR_CORPUS_H_
