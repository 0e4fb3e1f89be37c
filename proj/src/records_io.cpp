#include "qdiff/records_io.hpp"

#include <istream>
#include <ostream>

#include "qdiff/error.hpp"

namespace qdiff {

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

namespace {

std::optional<double> optional_double(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

void write_lines(std::ostream& out, const Json& header, const std::vector<Json>& lines) {
  out << header.dump() << '\n';
  for (const auto& l : lines) out << l.dump() << '\n';
  if (!out) throw IoError("write failed");
}

template <typename Record, typename Parse>
std::vector<Record> read_lines(std::istream& in, std::string_view format, int version, Json& header, Source& source,
                               Parse parse) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError("empty " + std::string(format) + " file");
  ++line_no;
  try {
    header = Json::parse(line);
  } catch (const Json::exception& e) {
    throw FormatError("line 1: bad header: " + std::string(e.what()));
  }
  if (!header.is_object() || header.value("format", std::string()) != format) {
    throw FormatError("not a " + std::string(format) + " file");
  }
  if (header.value("version", -1) != version) {
    throw FormatError(std::string(format) + ": unsupported version " + header.value("version", Json()).dump());
  }
  try {
    source = source_from_string(header.at("source").get<std::string>());
  } catch (const std::exception& e) {
    throw FormatError("line 1: bad source: " + std::string(e.what()));
  }
  std::vector<Record> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(parse(Json::parse(line), source));
    } catch (const Json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("read failed");
  return out;
}

}  // namespace

Json to_json(const QuestionRecord& r) {
  Json j;
  j["id"] = r.id;
  j["clue"] = r.clue;
  j["raw_tokens"] = r.raw_tokens;
  j["content_tokens"] = r.content_tokens;
  j["answer"] = r.answer;
  j["difficulty"] = r.difficulty;
  j["pun"] = r.is_pun;
  return j;
}

QuestionRecord question_from_json(const Json& j, Source source) {
  QuestionRecord r;
  r.id = j.at("id").get<std::size_t>();
  r.source = source;
  r.clue = j.at("clue").get<std::string>();
  r.raw_tokens = j.at("raw_tokens").get<std::vector<std::string>>();
  r.content_tokens = j.at("content_tokens").get<std::vector<std::string>>();
  r.answer = j.at("answer").get<std::string>();
  r.difficulty = j.at("difficulty").get<int>();
  r.is_pun = j.at("pun").get<bool>();
  return r;
}

Json to_json(const ScoredRecord& r) {
  Json j;
  j["id"] = r.id;
  j["difficulty"] = r.difficulty;
  j["pun"] = r.is_pun;
  j["answer"] = r.answer;
  j["answer_fpm"] = optional_json(r.answer_fpm);
  Json op;
  op["synergistic"] = optional_json(r.opacity.synergistic_deg);
  op["independent"] = r.opacity.independent_deg;
  op["keyword"] = r.opacity.keyword_deg;
  j["opacity"] = op;
  const auto& f = r.features;
  Json fj;
  fj["obscurity"] = optional_json(f.obscurity);
  fj["opacity"] = optional_json(f.opacity);
  fj["answer_density"] = optional_json(f.answer_density);
  fj["q_length"] = f.q_length;
  fj["content_length"] = f.content_length;
  fj["min_q_word_freq"] = optional_json(f.min_q_word_freq);
  fj["conjunction_freq"] = f.conjunction_freq;
  j["features"] = fj;
  j["density_neighbor"] = r.density_neighbor ? Json(*r.density_neighbor) : Json(nullptr);
  j["flags"] = flag_names(r.flags);
  return j;
}

ScoredRecord scored_from_json(const Json& j, Source source) {
  ScoredRecord r;
  r.id = j.at("id").get<std::size_t>();
  r.source = source;
  r.difficulty = j.at("difficulty").get<int>();
  r.is_pun = j.at("pun").get<bool>();
  r.answer = j.at("answer").get<std::string>();
  r.answer_fpm = optional_double(j, "answer_fpm");
  const auto& op = j.at("opacity");
  r.opacity.synergistic_deg = optional_double(op, "synergistic");
  r.opacity.independent_deg = op.at("independent").get<double>();
  r.opacity.keyword_deg = op.at("keyword").get<double>();
  const auto& fj = j.at("features");
  auto& f = r.features;
  f.obscurity = optional_double(fj, "obscurity");
  f.opacity = optional_double(fj, "opacity");
  f.answer_density = optional_double(fj, "answer_density");
  f.q_length = fj.at("q_length").get<int>();
  f.content_length = fj.at("content_length").get<int>();
  f.min_q_word_freq = optional_double(fj, "min_q_word_freq");
  f.conjunction_freq = fj.at("conjunction_freq").get<double>();
  f.difficulty = r.difficulty;
  if (const auto it = j.find("density_neighbor"); it != j.end() && !it->is_null()) {
    r.density_neighbor = it->get<std::string>();
  }
  for (const auto& name : j.at("flags")) r.flags |= flag_from_name(name.get<std::string>());
  return r;
}

void write_corpus(std::ostream& out, const Json& header, std::span<const QuestionRecord> records) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_lines(out, header, lines);
}

void write_scored(std::ostream& out, const Json& header, std::span<const ScoredRecord> records) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_lines(out, header, lines);
}

CorpusFile read_corpus(std::istream& in) {
  CorpusFile f;
  f.records = read_lines<QuestionRecord>(in, corpus_format, corpus_format_version, f.header, f.source,
                                         question_from_json);
  return f;
}

ScoredFile read_scored(std::istream& in) {
  ScoredFile f;
  f.records = read_lines<ScoredRecord>(in, scored_format, scored_format_version, f.header, f.source,
                                       scored_from_json);
  return f;
}

}  // namespace qdiff
