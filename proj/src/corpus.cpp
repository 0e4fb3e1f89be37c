#include "qdiff/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <variant>

#include <omp.h>

#include "json.hpp"
#include "qdiff/error.hpp"
#include "qdiff/text.hpp"

namespace qdiff {

std::string_view to_string(Source s) { return s == Source::crossword ? "crossword" : "jeopardy"; }

Source source_from_string(std::string_view name) {
  if (name == "crossword") return Source::crossword;
  if (name == "jeopardy") return Source::jeopardy;
  throw ArgumentError("unknown source '" + std::string(name) + "'");
}

std::size_t ParseReport::skipped_total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : skipped) n += c;
  return n;
}

namespace {

std::optional<std::chrono::year_month_day> parse_iso_date(std::string_view s) {
  s = trim(s);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto num = [](std::string_view f, auto& out) {
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), out);
    return ec == std::errc() && p == f.data() + f.size();
  };
  if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d)) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

void skip(ParseReport& report, const char* reason) { ++report.skipped[reason]; }

}  // namespace

ParsedClues parse_crossword_file(std::istream& in) {
  if (!in) throw IoError("crossword stream is not readable");
  ParsedClues out;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("crossword file has no header row");
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  const auto header = split_delimited(line, delim);
  auto column = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (ascii_lower(trim(header[i])) == name) return i;
    }
    throw SchemaError("crossword header is missing the '" + std::string(name) + "' column");
  };
  const std::size_t date_col = column("date");
  const std::size_t clue_col = column("clue");
  const std::size_t answer_col = column("answer");
  const std::size_t needed = std::max({date_col, clue_col, answer_col}) + 1;

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::size_t this_row = row++;
    ++out.report.rows;
    auto fields = split_delimited(line, delim);
    if (fields.size() < needed) {
      skip(out.report, "malformed_row");
      continue;
    }
    auto date = parse_iso_date(fields[date_col]);
    if (!date) {
      skip(out.report, "bad_date");
      continue;
    }
    const auto answer = trim(fields[answer_col]);
    if (answer.empty()) {
      skip(out.report, "blank_answer");
      continue;
    }
    RawClue clue;
    clue.source = Source::crossword;
    clue.row = this_row;
    clue.clue_text = std::string(trim(fields[clue_col]));
    clue.answer_text = ascii_lower(answer);
    clue.date = date;
    out.clues.push_back(std::move(clue));
  }
  if (in.bad()) throw IoError("read error in crossword file");
  return out;
}

namespace {

std::optional<int> parse_dollar_value(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d != static_cast<int>(d)) return std::nullopt;
    return static_cast<int>(d);
  }
  if (!v.is_string()) return std::nullopt;
  std::string digits;
  for (char c : v.get<std::string>()) {
    if (c == '$' || c == ',' || c == ' ') continue;
    digits.push_back(c);
  }
  int value = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || p != digits.data() + digits.size() || digits.empty()) return std::nullopt;
  return value;
}

std::optional<JeopardyRound> parse_round(std::string_view s) {
  const std::string r = ascii_lower(trim(s));
  if (r == "jeopardy!" || r == "jeopardy" || r == "single") return JeopardyRound::single;
  if (r == "double jeopardy!" || r == "double jeopardy" || r == "double") return JeopardyRound::double_jeopardy;
  return std::nullopt;
}

std::string string_field(const nlohmann::json& obj, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    auto it = obj.find(n);
    if (it != obj.end() && it->is_string()) return it->get<std::string>();
  }
  return {};
}

void parse_jeopardy_object(const nlohmann::json& obj, std::size_t row, ParsedClues& out) {
  ++out.report.rows;
  if (!obj.is_object()) {
    skip(out.report, "malformed_record");
    return;
  }
  auto value_it = obj.find("value");
  if (value_it == obj.end() || value_it->is_null()) {
    skip(out.report, "missing_value");
    return;
  }
  auto value = parse_dollar_value(*value_it);
  if (!value || *value <= 0) {
    skip(out.report, "bad_value");
    return;
  }
  auto round_it = obj.find("round");
  if (round_it == obj.end() || !round_it->is_string()) {
    skip(out.report, "missing_round");
    return;
  }
  auto round = parse_round(round_it->get<std::string>());
  if (!round) {
    skip(out.report, "unsupported_round");
    return;
  }
  const std::string answer = std::string(trim(strip_tags(string_field(obj, {"answer"}))));
  if (answer.empty()) {
    skip(out.report, "blank_answer");
    return;
  }
  RawClue clue;
  clue.source = Source::jeopardy;
  clue.row = row;
  clue.clue_text = std::string(trim(strip_tags(string_field(obj, {"question", "clue"}))));
  clue.answer_text = ascii_lower(answer);
  clue.dollar_value = value;
  clue.round = round;
  clue.category = string_field(obj, {"category"});
  out.clues.push_back(std::move(clue));
}

}  // namespace

ParsedClues parse_jeopardy_file(std::istream& in) {
  if (!in) throw IoError("jeopardy stream is not readable");
  std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("read error in jeopardy file");
  ParsedClues out;
  const auto body = trim(content);
  if (!body.empty() && body.front() == '[') {
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("jeopardy JSON array: ") + e.what());
    }
    std::size_t row = 0;
    for (const auto& obj : arr) parse_jeopardy_object(obj, row++, out);
    return out;
  }
  std::istringstream lines{std::string(body)};
  std::string line;
  std::size_t row = 0;
  while (std::getline(lines, line)) {
    if (trim(line).empty()) continue;
    const std::size_t this_row = row++;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      ++out.report.rows;
      skip(out.report, "malformed_record");
      continue;
    }
    parse_jeopardy_object(obj, this_row, out);
  }
  return out;
}

// ---- tokenization ------------------------------------------------------

const Stoplist& default_stoplist() {
  static const Stoplist list = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as", "at",
      "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could",
      "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further", "had", "has",
      "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if",
      "in", "into", "is", "it", "it's", "its", "itself", "just", "me", "more", "most", "my", "myself", "no",
      "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves",
      "out", "over", "own", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their",
      "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those", "through", "to",
      "too", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which", "while",
      "who", "whom", "why", "will", "with", "would", "yet", "you", "your", "yours", "yourself",
      "yourselves", "s", "t", "don't", "also", "like", "one"};
  return list;
}

Stoplist load_stoplist(std::istream& in) {
  if (!in) throw IoError("stoplist stream is not readable");
  Stoplist out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto w = trim(line);
    if (!w.empty()) out.insert(ascii_lower(w));
  }
  return out;
}

PosMap load_pos_annotations(std::istream& in) {
  if (!in) throw IoError("POS annotation stream is not readable");
  PosMap out;
  std::string line;
  while (std::getline(in, line)) {
    const auto fields = split_delimited(line, '\t');
    if (fields.size() < 2) continue;
    const auto token = trim(fields[0]);
    if (token.empty()) continue;
    out.insert_or_assign(ascii_lower(token), std::string(trim(fields[1])));
  }
  return out;
}

bool is_content_tag(std::string_view tag) {
  if (tag == "NOUN" || tag == "VERB" || tag == "ADJ" || tag == "PROPN") return true;
  return tag.starts_with("NN") || tag.starts_with("VB") || tag.starts_with("JJ");
}

namespace {
bool is_letter(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80; }
}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    bool keep = is_letter(c);
    if (!keep && (c == '\'' || c == '-') && !cur.empty() && i + 1 < text.size()) {
      keep = is_letter(static_cast<unsigned char>(text[i + 1]));
    }
    if (keep) {
      cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Tokens tokenize_and_filter(std::string_view text, const Stoplist& stoplist, const PosMap* pos_filter) {
  Tokens out;
  out.raw = tokenize(text);
  for (const auto& t : out.raw) {
    if (stoplist.contains(t)) continue;
    if (pos_filter) {
      auto it = pos_filter->find(t);
      if (it == pos_filter->end() || !is_content_tag(it->second)) continue;
    }
    out.content.push_back(t);
  }
  return out;
}

// ---- labels ------------------------------------------------------------

int label_crossword_difficulty(std::chrono::weekday day) {
  const unsigned iso = day.iso_encoding();  // Mon = 1 .. Sun = 7
  return iso == 7 ? 5 : static_cast<int>(iso);
}

std::optional<int> label_jeopardy_difficulty(int dollar_value) {
  static constexpr std::array<int, 8> values{200, 400, 600, 800, 1000, 1200, 1600, 2000};
  auto it = std::find(values.begin(), values.end(), dollar_value);
  if (it == values.end()) return std::nullopt;
  return static_cast<int>(it - values.begin()) + 1;
}

bool classify_pun(std::string_view clue_text) {
  const auto t = trim(clue_text);
  return !t.empty() && t.back() == '?';
}

int max_difficulty(Source s) { return s == Source::crossword ? 6 : 8; }

// ---- corpus ------------------------------------------------------------

std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::non_word_clue: return "non_word_clue";
    case ExclusionReason::abbreviation: return "abbreviation";
    case ExclusionReason::multiword_answer: return "multiword_answer";
    case ExclusionReason::oov_answer: return "oov_answer";
    case ExclusionReason::empty_after_filter: return "empty_after_filter";
    case ExclusionReason::no_valid_clue_tokens: return "no_valid_clue_tokens";
    case ExclusionReason::unmappable_difficulty: return "unmappable_difficulty";
  }
  return "unknown";
}

std::size_t ExclusionReport::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

ExclusionReport& ExclusionReport::operator+=(const ExclusionReport& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

std::optional<std::string> resolve_token(const EmbeddingSpace& space, std::string_view token) {
  std::string lower = ascii_lower(token);
  if (space.contains(lower)) return lower;
  std::string cap = capitalized(token);
  if (space.contains(cap)) return cap;
  return std::nullopt;
}

namespace {

bool is_alnum(unsigned char c) { return is_letter(c) || (c >= '0' && c <= '9'); }

std::string_view strip_answer_punctuation(std::string_view s) {
  s = trim(s);
  while (!s.empty() && !is_alnum(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && !is_alnum(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

using Outcome = std::variant<QuestionRecord, ExclusionReason>;

void add_spellings(std::unordered_set<std::string>& out, std::string_view word) {
  out.insert(ascii_lower(word));
  out.insert(capitalized(word));
}

Outcome process(const RawClue& raw, const EmbeddingSpace& space, const CorpusConfig& config) {
  const PosMap* pos = config.pos_tags ? &*config.pos_tags : nullptr;
  Tokens tokens = tokenize_and_filter(raw.clue_text, config.stoplist, pos);
  if (tokens.raw.empty()) return ExclusionReason::non_word_clue;

  if (raw.source == Source::crossword) {
    for (const auto& marker : config.abbreviation_markers) {
      if (icontains(raw.clue_text, marker)) return ExclusionReason::abbreviation;
    }
  }

  const auto answer_text = strip_answer_punctuation(raw.answer_text);
  if (std::any_of(answer_text.begin(), answer_text.end(), [](char c) { return c == ' ' || c == '\t'; })) {
    return ExclusionReason::multiword_answer;
  }
  auto answer = answer_text.empty() ? std::nullopt : resolve_token(space, answer_text);
  if (!answer) return ExclusionReason::oov_answer;

  if (tokens.content.empty()) return ExclusionReason::empty_after_filter;

  std::vector<std::string> content;
  content.reserve(tokens.content.size());
  for (const auto& t : tokens.content) {
    if (auto r = resolve_token(space, t)) content.push_back(std::move(*r));
  }
  if (content.empty()) return ExclusionReason::no_valid_clue_tokens;

  int difficulty = 0;
  if (raw.source == Source::crossword) {
    if (!raw.date) return ExclusionReason::unmappable_difficulty;
    difficulty = label_crossword_difficulty(std::chrono::weekday{std::chrono::sys_days{*raw.date}});
  } else {
    auto label = raw.dollar_value ? label_jeopardy_difficulty(*raw.dollar_value) : std::nullopt;
    if (!label) return ExclusionReason::unmappable_difficulty;
    difficulty = *label;
  }

  QuestionRecord rec;
  rec.id = raw.row;
  rec.source = raw.source;
  rec.clue = raw.clue_text;
  rec.raw_tokens = std::move(tokens.raw);
  rec.content_tokens = std::move(content);
  rec.answer = std::move(*answer);
  rec.difficulty = difficulty;
  rec.is_pun = raw.source == Source::crossword && classify_pun(raw.clue_text);
  return rec;
}

}  // namespace

BuiltCorpus build_corpus(std::span<const RawClue> raws, const EmbeddingSpace& space,
                         [[maybe_unused]] const FrequencyTable& table, const CorpusConfig& config) {
  std::vector<Outcome> outcomes(raws.size(), ExclusionReason::non_word_clue);
  const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(raws.size());
#pragma omp parallel for schedule(dynamic, 256) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) outcomes[static_cast<std::size_t>(i)] = process(raws[static_cast<std::size_t>(i)], space, config);

  BuiltCorpus out;
  for (auto& o : outcomes) {
    if (auto* rec = std::get_if<QuestionRecord>(&o)) {
      out.records.push_back(std::move(*rec));
    } else {
      ++out.report[std::get<ExclusionReason>(o)];
    }
  }
  return out;
}

std::unordered_set<std::string> lookup_vocabulary(std::span<const RawClue> raws) {
  std::unordered_set<std::string> out;
  for (const auto& raw : raws) {
    for (const auto& t : tokenize(raw.clue_text)) add_spellings(out, t);
    const auto answer = strip_answer_punctuation(raw.answer_text);
    if (!answer.empty()) add_spellings(out, answer);
  }
  return out;
}

}  // namespace qdiff
