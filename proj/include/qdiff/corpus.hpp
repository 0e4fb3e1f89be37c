#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qdiff/embedding.hpp"
#include "qdiff/lexicon.hpp"

namespace qdiff {

enum class Source { crossword, jeopardy };
enum class JeopardyRound { single, double_jeopardy };

std::string_view to_string(Source s);
// Throws ArgumentError on unknown names.
Source source_from_string(std::string_view name);

struct RawClue {
  Source source = Source::crossword;
  std::size_t row = 0;  // 0-based data row in the input file
  std::string clue_text;
  std::string answer_text;
  std::optional<std::chrono::year_month_day> date;  // crossword
  std::optional<int> dollar_value;                   // jeopardy
  std::optional<JeopardyRound> round;                // jeopardy
  std::string category;                              // jeopardy, informational
};

struct ParseReport {
  std::size_t rows = 0;
  std::map<std::string, std::size_t> skipped;  // reason -> count

  std::size_t skipped_total() const;
};

struct ParsedClues {
  std::vector<RawClue> clues;
  ParseReport report;
};

// Delimited text (comma, or tab when the header contains one) with a header
// naming date, clue and answer columns (any order, case-insensitive).
// Throws SchemaError if a column is missing.
ParsedClues parse_crossword_file(std::istream& in);

// JSON array or JSON Lines of objects with question, answer, value, round
// and category. value may be a number or a string such as "$1,200"; round
// accepts "Jeopardy!"/"single" and "Double Jeopardy!"/"double".
ParsedClues parse_jeopardy_file(std::istream& in);

// ---- tokenization ------------------------------------------------------

using Stoplist = std::unordered_set<std::string>;
using PosMap = std::unordered_map<std::string, std::string>;

const Stoplist& default_stoplist();
// One word per line; '#' starts a comment.
Stoplist load_stoplist(std::istream& in);
// "token<TAB>tag" per line. Universal (NOUN/VERB/ADJ) or Penn (NN*/VB*/JJ*).
PosMap load_pos_annotations(std::istream& in);
bool is_content_tag(std::string_view tag);

// Lower-cased alphabetic tokens; apostrophes and hyphens survive only between
// two letters. Bytes >= 0x80 count as letters so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view text);

struct Tokens {
  std::vector<std::string> raw;
  std::vector<std::string> content;
};

Tokens tokenize_and_filter(std::string_view text, const Stoplist& stoplist, const PosMap* pos_filter = nullptr);

// ---- labels ------------------------------------------------------------

// Mon..Sat -> 1..6, Sun -> 5.
int label_crossword_difficulty(std::chrono::weekday day);
// 200,400,600,800,1000,1200,1600,2000 -> 1..8; anything else is unmappable.
std::optional<int> label_jeopardy_difficulty(int dollar_value);
bool classify_pun(std::string_view clue_text);

int max_difficulty(Source s);

// ---- corpus ------------------------------------------------------------

// Applied in declaration order; each excluded record counts once.
enum class ExclusionReason {
  non_word_clue,
  abbreviation,
  multiword_answer,
  oov_answer,
  empty_after_filter,
  no_valid_clue_tokens,
  unmappable_difficulty,
};
inline constexpr std::size_t exclusion_reason_count = 7;
std::string_view to_string(ExclusionReason r);

struct ExclusionReport {
  std::array<std::size_t, exclusion_reason_count> counts{};

  std::size_t& operator[](ExclusionReason r) { return counts[static_cast<std::size_t>(r)]; }
  std::size_t operator[](ExclusionReason r) const { return counts[static_cast<std::size_t>(r)]; }
  std::size_t total() const;
  ExclusionReport& operator+=(const ExclusionReport& other);
};

struct QuestionRecord {
  std::size_t id = 0;  // input row
  Source source = Source::crossword;
  std::string clue;
  std::vector<std::string> raw_tokens;
  std::vector<std::string> content_tokens;  // each resolves in the embedding space
  std::string answer;                       // resolves in the embedding space
  int difficulty = 0;
  bool is_pun = false;
};

struct CorpusConfig {
  Stoplist stoplist = default_stoplist();
  std::optional<PosMap> pos_tags;
  std::vector<std::string> abbreviation_markers{"abbr"};
  int threads = 0;  // 0 = OpenMP default
};

struct BuiltCorpus {
  std::vector<QuestionRecord> records;
  ExclusionReport report;
};

// Embedding lookup with case fallback: lower-case, then Capitalized.
std::optional<std::string> resolve_token(const EmbeddingSpace& space, std::string_view token);

// Every spelling build_corpus may look up for these clues (tokens and
// answers, lower-case and Capitalized); a filter for load_embeddings.
std::unordered_set<std::string> lookup_vocabulary(std::span<const RawClue> raws);

BuiltCorpus build_corpus(std::span<const RawClue> raws, const EmbeddingSpace& space, const FrequencyTable& table,
                         const CorpusConfig& config);

}  // namespace qdiff
