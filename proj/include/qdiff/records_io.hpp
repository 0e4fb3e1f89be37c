#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qdiff/corpus.hpp"
#include "qdiff/metrics.hpp"

namespace qdiff {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view corpus_format = "qdiff-corpus";
inline constexpr std::string_view scored_format = "qdiff-scored";
inline constexpr int corpus_format_version = 1;
inline constexpr int scored_format_version = 1;

// Stage files are JSON Lines: one header object, then one object per record.
// The header carries at least "format", "version" and "source".

Json to_json(const QuestionRecord& r);
QuestionRecord question_from_json(const Json& j, Source source);
Json to_json(const ScoredRecord& r);
ScoredRecord scored_from_json(const Json& j, Source source);

void write_corpus(std::ostream& out, const Json& header, std::span<const QuestionRecord> records);
void write_scored(std::ostream& out, const Json& header, std::span<const ScoredRecord> records);

struct CorpusFile {
  Json header;
  Source source = Source::crossword;
  std::vector<QuestionRecord> records;
};

struct ScoredFile {
  Json header;
  Source source = Source::crossword;
  std::vector<ScoredRecord> records;
};

// Throw FormatError on malformed lines (with line number) or a header of the
// wrong format or version.
CorpusFile read_corpus(std::istream& in);
ScoredFile read_scored(std::istream& in);

// Serialized as null when absent.
Json optional_json(const std::optional<double>& v);

}  // namespace qdiff
