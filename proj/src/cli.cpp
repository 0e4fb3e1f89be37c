#include "qdiff/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "qdiff/digest.hpp"
#include "qdiff/error.hpp"
#include "qdiff/kde.hpp"
#include "qdiff/lexicon.hpp"
#include "qdiff/records_io.hpp"
#include "qdiff/stats.hpp"
#include "qdiff/text.hpp"

#ifndef QDIFF_VERSION
#define QDIFF_VERSION "0.0.0"
#endif

namespace qdiff {

namespace fs = std::filesystem;

std::string_view tool_version() { return QDIFF_VERSION; }

EmbeddingFormat resolve_format(EmbeddingFormatChoice choice, const fs::path& path) {
  switch (choice) {
    case EmbeddingFormatChoice::binary: return EmbeddingFormat::binary;
    case EmbeddingFormatChoice::text: return EmbeddingFormat::text;
    case EmbeddingFormatChoice::automatic: break;
  }
  return path.extension() == ".bin" ? EmbeddingFormat::binary : EmbeddingFormat::text;
}

AnalysisReport analysis_report_from_string(std::string_view name) {
  if (name == "groups") return AnalysisReport::groups;
  if (name == "null") return AnalysisReport::null;
  if (name == "bins") return AnalysisReport::bins;
  if (name == "kde") return AnalysisReport::kde;
  if (name == "medians") return AnalysisReport::medians;
  throw ArgumentError("unknown report: " + std::string(name));
}

std::string_view to_string(AnalysisReport r) {
  switch (r) {
    case AnalysisReport::groups: return "groups";
    case AnalysisReport::null: return "null";
    case AnalysisReport::bins: return "bins";
    case AnalysisReport::kde: return "kde";
    case AnalysisReport::medians: return "medians";
  }
  return "unknown";
}

namespace {

void require_file(const fs::path& path, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw IoError(what + " not found: " + path.string());
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Json input_ref(const fs::path& path, const std::string& digest) {
  Json j;
  j["file"] = path.filename().string();
  j["digest"] = digest;
  return j;
}

Json tool_json() {
  Json j;
  j["name"] = "qdiff";
  j["version"] = std::string(tool_version());
  return j;
}

std::string_view to_string(IndependentAggregation a) {
  return a == IndependentAggregation::mean_cosine ? "mean_cosine" : "mean_angle";
}

std::string_view to_string(OverlapMeasure m) {
  return m == OverlapMeasure::shorter_word ? "shorter_word" : "longer_word";
}

LoadedEmbeddings load_embedding_file(const fs::path& path, EmbeddingFormatChoice choice,
                                     const std::unordered_set<std::string>* filter) {
  auto in = open_in(path);
  try {
    return load_embeddings(in, resolve_format(choice, path), filter);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string header_digest(const Json& header, const char* input) {
  const auto inputs = header.find("inputs");
  if (inputs == header.end() || !inputs->contains(input)) {
    throw FormatError(std::string("stage header lacks the ") + input + " digest");
  }
  return (*inputs)[input].at("digest").get<std::string>();
}

void check_digest(const std::string& expected, const std::string& actual, const fs::path& path,
                  const std::string& what) {
  if (expected != actual) {
    throw DataError(what + " digest mismatch for " + path.string() + ": expected " + expected + ", got " + actual);
  }
}

Json sorted_strings(const std::unordered_set<std::string>& words) {
  std::vector<std::string> v(words.begin(), words.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

// ---- ingest --------------------------------------------------------------

void cmd_ingest(const IngestConfig& config, std::ostream& log) {
  require_file(config.input, "clue file");
  require_file(config.embeddings, "embeddings");
  require_file(config.frequencies, "frequency list");
  if (config.stoplist) require_file(*config.stoplist, "stoplist");
  if (config.pos_tags) require_file(*config.pos_tags, "POS annotation file");

  const std::string input_digest = digest_file(config.input);
  ParsedClues parsed;
  {
    auto in = open_in(config.input);
    parsed = config.source == Source::crossword ? parse_crossword_file(in) : parse_jeopardy_file(in);
  }
  const auto vocab = lookup_vocabulary(parsed.clues);
  auto emb = load_embedding_file(config.embeddings, config.embeddings_format, &vocab);
  const std::string freq_digest = digest_file(config.frequencies);
  LoadedFrequencies freqs;
  {
    auto in = open_in(config.frequencies);
    freqs = load_frequencies(in, config.frequencies.filename().string());
  }

  CorpusConfig cc;
  cc.abbreviation_markers = config.abbreviation_markers;
  cc.threads = config.threads;
  Json inputs;
  inputs["clues"] = input_ref(config.input, input_digest);
  inputs["embeddings"] = input_ref(config.embeddings, emb.space.source_digest());
  inputs["frequencies"] = input_ref(config.frequencies, freq_digest);
  if (config.stoplist) {
    auto in = open_in(*config.stoplist);
    cc.stoplist = load_stoplist(in);
    inputs["stoplist"] = input_ref(*config.stoplist, digest_file(*config.stoplist));
  }
  if (config.pos_tags) {
    auto in = open_in(*config.pos_tags);
    cc.pos_tags = load_pos_annotations(in);
    inputs["pos_tags"] = input_ref(*config.pos_tags, digest_file(*config.pos_tags));
  }

  const auto built = build_corpus(parsed.clues, emb.space, freqs.table, cc);
  const std::size_t accounted = parsed.report.skipped_total() + built.report.total() + built.records.size();
  if (accounted != parsed.report.rows) {
    throw DataError("ingest accounting does not reconcile: " + std::to_string(accounted) + " of " +
                    std::to_string(parsed.report.rows) + " rows");
  }

  Json cfg;
  cfg["stoplist"] = config.stoplist ? "file" : "default";
  cfg["pos_filter"] = config.pos_tags.has_value();
  cfg["abbreviation_markers"] = config.abbreviation_markers;

  Json header;
  header["format"] = std::string(corpus_format);
  header["version"] = corpus_format_version;
  header["source"] = std::string(to_string(config.source));
  header["tool"] = tool_json();
  header["inputs"] = inputs;
  header["config"] = cfg;
  {
    auto out = open_out(config.out);
    write_corpus(out, header, built.records);
  }

  Json report;
  report["tool"] = tool_json();
  report["command"] = "ingest";
  report["source"] = std::string(to_string(config.source));
  report["inputs"] = inputs;
  report["config"] = cfg;
  Json parse;
  parse["rows"] = parsed.report.rows;
  parse["skipped"] = parsed.report.skipped;
  parse["skipped_total"] = parsed.report.skipped_total();
  report["parse"] = parse;
  Json excl;
  for (std::size_t i = 0; i < exclusion_reason_count; ++i) {
    excl[std::string(to_string(static_cast<ExclusionReason>(i)))] = built.report.counts[i];
  }
  excl["total"] = built.report.total();
  report["exclusions"] = excl;
  report["kept"] = built.records.size();
  report["reconciles"] = true;
  report["embeddings"] = Json::parse(emb.report.to_json());
  Json fr;
  fr["loaded"] = freqs.report.loaded;
  fr["skipped_malformed"] = freqs.report.skipped_malformed;
  fr["skipped_nonpositive"] = freqs.report.skipped_nonpositive;
  fr["duplicates"] = freqs.report.duplicates;
  report["frequencies"] = fr;
  write_json(config.report.value_or(fs::path(config.out.string() + ".report.json")), report);

  log << "ingest: kept " << built.records.size() << " of " << parsed.report.rows << " rows\n";
}

// ---- score ---------------------------------------------------------------

void cmd_score(const ScoreRunConfig& config, std::ostream& log) {
  require_file(config.corpus, "corpus");
  require_file(config.embeddings, "embeddings");
  require_file(config.frequencies, "frequency list");
  if (config.conjunctions) require_file(*config.conjunctions, "conjunction list");

  const std::string corpus_digest = digest_file(config.corpus);
  CorpusFile corpus;
  {
    auto in = open_in(config.corpus);
    corpus = read_corpus(in);
  }
  const std::string freq_digest = digest_file(config.frequencies);
  check_digest(header_digest(corpus.header, "frequencies"), freq_digest, config.frequencies, "frequency list");
  LoadedFrequencies freqs;
  {
    auto in = open_in(config.frequencies);
    freqs = load_frequencies(in, config.frequencies.filename().string());
  }

  ScoreConfig sc = config.score;
  Json inputs;
  inputs["corpus"] = input_ref(config.corpus, corpus_digest);
  if (config.conjunctions) {
    auto in = open_in(*config.conjunctions);
    sc.conjunctions = load_stoplist(in);
  }
  const auto filter = score_vocab_filter(corpus.records, freqs.table, sc);
  auto emb = load_embedding_file(config.embeddings, config.embeddings_format, filter ? &*filter : nullptr);
  check_digest(header_digest(corpus.header, "embeddings"), emb.space.source_digest(), config.embeddings,
               "embeddings");
  inputs["embeddings"] = input_ref(config.embeddings, emb.space.source_digest());
  inputs["frequencies"] = input_ref(config.frequencies, freq_digest);
  if (config.conjunctions) inputs["conjunctions"] = input_ref(*config.conjunctions, digest_file(*config.conjunctions));

  const auto scored = score_corpus(corpus.records, emb.space, freqs.table, sc);

  Json cfg;
  cfg["density_vocab"] = std::string(to_string(sc.density_vocab));
  cfg["top_n"] = sc.top_n;
  cfg["overlap_threshold"] = sc.density.overlap_threshold;
  cfg["overlap_measure"] = std::string(to_string(sc.density.measure));
  cfg["independent_aggregation"] = std::string(to_string(sc.aggregation));
  cfg["conjunctions"] = sorted_strings(sc.conjunctions);

  std::map<std::string, std::size_t> flag_counts;
  for (const auto& r : scored) {
    for (const auto& name : flag_names(r.flags)) ++flag_counts[name];
  }
  Json summary;
  summary["records"] = scored.size();
  summary["flags"] = flag_counts;

  Json header;
  header["format"] = std::string(scored_format);
  header["version"] = scored_format_version;
  header["source"] = std::string(to_string(corpus.source));
  header["tool"] = tool_json();
  header["inputs"] = inputs;
  header["config"] = cfg;
  header["summary"] = summary;
  auto out = open_out(config.out);
  write_scored(out, header, scored);
  log << "score: " << scored.size() << " records\n";
}

// ---- analyze -------------------------------------------------------------

namespace {

Json stats_json(const ModelStats& s) {
  Json j;
  j["n"] = s.n;
  j["mean"] = s.n ? Json(s.mean) : Json(nullptr);
  j["se"] = s.n ? Json(s.se) : Json(nullptr);
  return j;
}

Json group_json(const GroupSummary& g) {
  Json j;
  j["key"] = g.key();
  if (g.difficulty) j["difficulty"] = *g.difficulty;
  if (g.is_pun) j["pun"] = *g.is_pun;
  if (g.frequency_bin) j["frequency_bin"] = *g.frequency_bin;
  j["n"] = g.n;
  j["synergistic"] = stats_json(g.synergistic);
  j["independent"] = stats_json(g.independent);
  j["keyword"] = stats_json(g.keyword);
  j["synergy_gap"] = g.synergistic.n && g.independent.n ? Json(g.synergy_gap()) : Json(nullptr);
  j["median_fpm"] = optional_json(g.median_fpm);
  return j;
}

Json groups_json(const GroupReport& r, Json& warnings) {
  Json arr = Json::array();
  for (const auto& g : r.groups) arr.push_back(group_json(g));
  for (const auto& w : r.warnings) warnings.push_back(w);
  return arr;
}

Json ttest_json(const TTestResult& t) {
  Json j;
  j["t"] = std::isfinite(t.t) ? Json(t.t) : Json(t.t > 0 ? "inf" : "-inf");
  j["df"] = t.df;
  j["p"] = t.p;
  j["n_a"] = t.n_a;
  j["n_b"] = t.n_b;
  return j;
}

// Welch test, or null plus a warning when a side has fewer than two values.
Json safe_ttest(std::span<const double> a, std::span<const double> b, const std::string& label, Json& warnings) {
  if (a.size() < 2 || b.size() < 2) {
    warnings.push_back("t-test skipped (fewer than two values): " + label);
    return nullptr;
  }
  return ttest_json(t_test(a, b));
}

constexpr OpacityModel all_models[] = {OpacityModel::synergistic, OpacityModel::independent, OpacityModel::keyword};

std::pair<int, int> difficulty_range(std::span<const ScoredRecord> records) {
  int lo = records.front().difficulty;
  int hi = lo;
  for (const auto& r : records) {
    lo = std::min(lo, r.difficulty);
    hi = std::max(hi, r.difficulty);
  }
  return {lo, hi};
}

Json grid_json(const KdeGrid& g) {
  auto axis = [](const GridAxis& a, const char* label) {
    Json j;
    j["label"] = label;
    j["min"] = a.min;
    j["max"] = a.max;
    j["points"] = a.points;
    return j;
  };
  Json j;
  j["x"] = axis(g.x, "opacity_deg");
  j["y"] = axis(g.y, "log10_fpm");
  j["bandwidth"] = {g.bandwidth_x, g.bandwidth_y};
  j["n"] = g.n;
  j["mass"] = g.mass();
  const auto [mx, my] = g.mode();
  j["mode"] = {g.x.at(mx), g.y.at(my)};
  Json rows = Json::array();
  for (std::size_t iy = 0; iy < g.y.points; ++iy) {
    Json row = Json::array();
    for (std::size_t ix = 0; ix < g.x.points; ++ix) row.push_back(g.at(ix, iy));
    rows.push_back(std::move(row));
  }
  j["density"] = std::move(rows);
  return j;
}

std::vector<Point2> kde_points(std::span<const ScoredRecord> records, std::optional<int> difficulty) {
  std::vector<Point2> pts;
  for (const auto& r : records) {
    if (difficulty && r.difficulty != *difficulty) continue;
    if (r.opacity.synergistic_deg && r.answer_fpm) pts.push_back({*r.opacity.synergistic_deg, std::log10(*r.answer_fpm)});
  }
  return pts;
}

void analyze_groups(const AnalyzeConfig& config, std::span<const ScoredRecord> records, Json& report, Json& warnings) {
  const auto all = summarize(records, {}, config.seed, config.bootstrap, config.threads);
  report["overall"] = group_json(all);
  report["by_difficulty"] =
      groups_json(group_means(records, Grouping::difficulty, config.seed, config.bootstrap, config.threads), warnings);
  report["by_pun"] =
      groups_json(group_means(records, Grouping::pun_flag, config.seed, config.bootstrap, config.threads), warnings);

  const auto syn = model_angles(records, OpacityModel::synergistic);
  const auto ind = model_angles(records, OpacityModel::independent);
  Json tests;
  tests["synergistic_vs_independent"] = safe_ttest(syn, ind, "synergistic vs independent", warnings);
  const auto [lo, hi] = difficulty_range(records);
  Json puns;
  Json extremes;
  for (OpacityModel m : all_models) {
    const std::string name(to_string(m));
    const auto pun = model_angles(records, m, [](const ScoredRecord& r) { return r.is_pun; });
    const auto plain = model_angles(records, m, [](const ScoredRecord& r) { return !r.is_pun; });
    puns[name] = safe_ttest(pun, plain, "puns vs non-puns, " + name, warnings);
    const auto easy = model_angles(records, m, [lo = lo](const ScoredRecord& r) { return r.difficulty == lo; });
    const auto hard = model_angles(records, m, [hi = hi](const ScoredRecord& r) { return r.difficulty == hi; });
    extremes[name] = safe_ttest(easy, hard, "easiest vs hardest, " + name, warnings);
  }
  tests["pun_vs_non_pun"] = puns;
  tests["easiest_vs_hardest"] = extremes;
  tests["easiest"] = lo;
  tests["hardest"] = hi;
  report["tests"] = tests;
}

void analyze_null(const AnalyzeConfig& config, const ScoredFile& scored, Json& report, Json& inputs, Json& warnings) {
  if (!config.corpus || !config.embeddings) {
    throw ArgumentError("the null report needs --corpus and --embeddings");
  }
  require_file(*config.corpus, "corpus");
  require_file(*config.embeddings, "embeddings");
  const std::string corpus_digest = digest_file(*config.corpus);
  check_digest(header_digest(scored.header, "corpus"), corpus_digest, *config.corpus, "corpus");
  CorpusFile corpus;
  {
    auto in = open_in(*config.corpus);
    corpus = read_corpus(in);
  }
  std::unordered_set<std::string> vocab;
  for (const auto& r : corpus.records) {
    vocab.insert(r.answer);
    vocab.insert(r.content_tokens.begin(), r.content_tokens.end());
  }
  auto emb = load_embedding_file(*config.embeddings, config.embeddings_format, &vocab);
  check_digest(header_digest(scored.header, "embeddings"), emb.space.source_digest(), *config.embeddings,
               "embeddings");
  inputs["corpus"] = input_ref(*config.corpus, corpus_digest);
  inputs["embeddings"] = input_ref(*config.embeddings, emb.space.source_digest());

  Json models;
  for (OpacityModel m : all_models) {
    const auto null = null_model_mean(corpus.records, emb.space, m, config.seed, config.repetitions,
                                      config.aggregation, config.threads);
    const auto data = model_angles(scored.records, m);
    Json j;
    j["data_mean"] = data.empty() ? Json(nullptr) : Json(mean(data));
    j["data_n"] = data.size();
    j["null_mean"] = null.mean;
    j["null_spread"] = null.spread;
    j["repetition_means"] = null.repetition_means;
    j["null_n"] = null.pooled_angles.size();
    j["data_vs_null"] = safe_ttest(data, null.pooled_angles, "data vs null, " + std::string(to_string(m)), warnings);
    models[std::string(to_string(m))] = j;
  }
  report["models"] = models;
}

void analyze_bins(const AnalyzeConfig& config, std::span<const ScoredRecord> records, Json& report, Json& warnings) {
  const auto cuts = frequency_quartiles(records);
  report["log10_fpm_quartiles"] = cuts;
  report["groups"] = groups_json(
      group_means(records, Grouping::frequency_bin_by_difficulty, config.seed, config.bootstrap, config.threads),
      warnings);
}

void analyze_kde(const AnalyzeConfig& config, std::span<const ScoredRecord> records, Json& report, Json& warnings) {
  GridSpec spec;
  spec.nx = config.grid;
  spec.ny = config.grid;
  const auto all_points = kde_points(records, std::nullopt);
  const auto all = kde_2d(all_points, spec, config.threads);
  report["all"] = grid_json(all);
  spec.x_range = std::pair{all.x.min, all.x.max};
  spec.y_range = std::pair{all.y.min, all.y.max};
  std::set<int> levels;
  for (const auto& r : records) levels.insert(r.difficulty);
  Json by_level = Json::array();
  for (int d : levels) {
    const auto pts = kde_points(records, d);
    try {
      Json g = grid_json(kde_2d(pts, spec, config.threads));
      g["difficulty"] = d;
      by_level.push_back(std::move(g));
    } catch (const ArgumentError& e) {
      warnings.push_back("kde skipped for difficulty " + std::to_string(d) + ": " + e.what());
    }
  }
  report["by_difficulty"] = by_level;

  std::vector<double> opacity;
  std::vector<double> obscurity;
  for (const auto& r : records) {
    if (r.opacity.synergistic_deg && r.features.obscurity) {
      opacity.push_back(*r.opacity.synergistic_deg);
      obscurity.push_back(*r.features.obscurity);
    }
  }
  try {
    const auto c = pearson_r(opacity, obscurity);
    Json j;
    j["r"] = c.r;
    j["p"] = c.p;
    j["n"] = c.n;
    report["opacity_obscurity_correlation"] = j;
  } catch (const ArgumentError& e) {
    report["opacity_obscurity_correlation"] = nullptr;
    warnings.push_back(std::string("correlation skipped: ") + e.what());
  }
}

void analyze_medians(std::span<const ScoredRecord> records, Json& report, Json& warnings) {
  std::set<int> levels;
  for (const auto& r : records) levels.insert(r.difficulty);
  Json rows = Json::array();
  for (int d : levels) {
    auto select = [d](const ScoredRecord& r) { return r.difficulty == d; };
    Json j;
    j["difficulty"] = d;
    std::size_t n = 0;
    for (const auto& r : records) n += (select(r) && r.answer_fpm) ? 1 : 0;
    j["n"] = n;
    j["median_fpm"] = n ? Json(median_frequency(records, select)) : Json(nullptr);
    rows.push_back(j);
  }
  report["by_difficulty"] = rows;
  std::size_t with_fpm = 0;
  for (const auto& r : records) with_fpm += r.answer_fpm ? 1 : 0;
  report["overall_median_fpm"] = with_fpm ? Json(median_frequency(records, {})) : Json(nullptr);

  const auto [lo, hi] = difficulty_range(records);
  auto obscurities = [&records](int d) {
    std::vector<double> v;
    for (const auto& r : records) {
      if (r.difficulty == d && r.features.obscurity) v.push_back(*r.features.obscurity);
    }
    return v;
  };
  Json test;
  test["easiest"] = lo;
  test["hardest"] = hi;
  test["statistic"] = "welch t-test on obscurity (-log10 fpm)";
  test["result"] = safe_ttest(obscurities(lo), obscurities(hi), "easiest vs hardest obscurity", warnings);
  report["easiest_vs_hardest"] = test;
}

}  // namespace

void cmd_analyze(const AnalyzeConfig& config, std::ostream& log) {
  require_file(config.scored, "scored file");
  if (config.bootstrap < 1) throw ArgumentError("--bootstrap must be at least 1");
  if (config.repetitions < 1) throw ArgumentError("--repetitions must be at least 1");
  const std::string scored_digest = digest_file(config.scored);
  ScoredFile scored;
  {
    auto in = open_in(config.scored);
    scored = read_scored(in);
  }
  if (scored.records.empty()) throw DataError("scored file has no records: " + config.scored.string());

  Json inputs;
  inputs["scored"] = input_ref(config.scored, scored_digest);
  Json cfg;
  cfg["bootstrap"] = config.bootstrap;
  if (config.report == AnalysisReport::null) {
    cfg["repetitions"] = config.repetitions;
    cfg["independent_aggregation"] = std::string(to_string(config.aggregation));
  }
  if (config.report == AnalysisReport::kde) cfg["grid"] = config.grid;

  Json body;
  Json warnings = Json::array();
  switch (config.report) {
    case AnalysisReport::groups: analyze_groups(config, scored.records, body, warnings); break;
    case AnalysisReport::null: analyze_null(config, scored, body, inputs, warnings); break;
    case AnalysisReport::bins: analyze_bins(config, scored.records, body, warnings); break;
    case AnalysisReport::kde: analyze_kde(config, scored.records, body, warnings); break;
    case AnalysisReport::medians: analyze_medians(scored.records, body, warnings); break;
  }

  Json report;
  report["tool"] = tool_json();
  report["command"] = "analyze";
  report["report"] = std::string(to_string(config.report));
  report["source"] = std::string(to_string(scored.source));
  report["seed"] = config.seed;
  report["inputs"] = inputs;
  report["config"] = cfg;
  for (auto& [k, v] : body.items()) report[k] = v;
  report["warnings"] = warnings;
  write_json(config.out, report);
  log << "analyze: " << to_string(config.report) << " report for " << scored.records.size() << " records\n";
}

// ---- regress -------------------------------------------------------------

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  const std::string s = buf;
  return s == "-0.000" ? "0.000" : s;
}

std::string table_csv(const std::vector<RegressionFit>& fits) {
  std::ostringstream out;
  out << "term";
  for (const auto& f : fits) out << ',' << f.model;
  out << '\n';
  std::vector<std::string> terms;
  for (const auto& c : fits.back().coefficients) terms.push_back(c.name);
  terms.emplace_back("intercept");
  for (const auto& term : terms) {
    out << term;
    for (const auto& f : fits) {
      out << ',';
      const Coefficient* c = term == "intercept" ? &f.intercept : nullptr;
      for (const auto& cc : f.coefficients) {
        if (cc.name == term) c = &cc;
      }
      if (c) out << fixed3(c->estimate) << stars(c->p) << " (" << fixed3(c->se) << ')';
    }
    out << '\n';
  }
  out << "N";
  for (const auto& f : fits) out << ',' << f.n;
  out << "\nR2";
  for (const auto& f : fits) out << ',' << fixed3(f.r2);
  out << "\nAIC";
  for (const auto& f : fits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", f.aic);
    out << ',' << buf;
  }
  out << '\n';
  return out.str();
}

Json coefficient_json(const Coefficient& c) {
  Json j;
  j["name"] = c.name;
  j["estimate"] = c.estimate;
  j["se"] = c.se;
  j["t"] = std::isfinite(c.t) ? Json(c.t) : Json(c.t > 0 ? "inf" : "-inf");
  j["p"] = c.p;
  j["stars"] = stars(c.p);
  return j;
}

}  // namespace

void cmd_regress(const RegressConfig& config, std::ostream& log) {
  require_file(config.scored, "scored file");
  const std::string scored_digest = digest_file(config.scored);
  ScoredFile scored;
  {
    auto in = open_in(config.scored);
    scored = read_scored(in);
  }
  if (scored.source != config.dataset) {
    throw DataError("scored file holds " + std::string(to_string(scored.source)) + " records, not " +
                    std::string(to_string(config.dataset)));
  }
  std::vector<FeatureVector> rows;
  rows.reserve(scored.records.size());
  for (const auto& r : scored.records) rows.push_back(r.features);
  const auto fits = run_model_suite(rows, config.rows);

  Json models = Json::array();
  for (const auto& f : fits) {
    Json j;
    j["model"] = f.model;
    j["n"] = f.n;
    j["dropped"] = f.dropped;
    j["r2"] = f.r2;
    j["aic"] = f.aic;
    j["rss"] = f.rss;
    j["intercept"] = coefficient_json(f.intercept);
    Json coefs = Json::array();
    for (const auto& c : f.coefficients) coefs.push_back(coefficient_json(c));
    j["coefficients"] = coefs;
    models.push_back(j);
  }
  Json inputs;
  inputs["scored"] = input_ref(config.scored, scored_digest);
  Json cfg;
  cfg["dataset"] = std::string(to_string(config.dataset));
  cfg["rows"] = config.rows == RowPolicy::per_model ? "per_model" : "common";
  cfg["response"] = "difficulty, standardized";
  cfg["aic"] = "n*(ln(2*pi*rss/n)+1)+2*(k+2)";

  Json report;
  report["tool"] = tool_json();
  report["command"] = "regress";
  report["inputs"] = inputs;
  report["config"] = cfg;
  report["models"] = models;
  write_json(config.out, report);
  if (config.csv) {
    auto out = open_out(*config.csv);
    out << table_csv(fits);
    if (!out) throw IoError("write failed: " + config.csv->string());
  }
  log << "regress: " << fits.size() << " models\n";
}

// ---- argument parsing ----------------------------------------------------

namespace {

// Enum flags are parsed as strings and mapped after parsing.
template <typename E>
struct EnumOption {
  const std::map<std::string, E>* values;
  std::string text;
  E* target;
};

template <typename E>
CLI::Option* add_enum(CLI::App* app, const std::string& name, EnumOption<E>& opt, const std::string& help) {
  std::vector<std::string> names;
  for (const auto& [k, v] : *opt.values) names.push_back(k);
  return app->add_option(name, opt.text, help)->check(CLI::IsMember(names));
}

template <typename E>
void apply(const EnumOption<E>& opt) {
  if (!opt.text.empty()) *opt.target = opt.values->at(opt.text);
}

const std::map<std::string, EmbeddingFormatChoice> format_choices = {
    {"auto", EmbeddingFormatChoice::automatic},
    {"binary", EmbeddingFormatChoice::binary},
    {"text", EmbeddingFormatChoice::text}};
const std::map<std::string, Source> source_choices = {{"crossword", Source::crossword}, {"jeopardy", Source::jeopardy}};
const std::map<std::string, IndependentAggregation> aggregation_choices = {
    {"mean-cosine", IndependentAggregation::mean_cosine}, {"mean-angle", IndependentAggregation::mean_angle}};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Question difficulty from semantic opacity and word obscurity", "qdiff"};
  app.set_version_flag("--version", "qdiff " + std::string(tool_version()) + " (corpus format " +
                                        std::to_string(corpus_format_version) + ", scored format " +
                                        std::to_string(scored_format_version) + ")");
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); outputs do not depend on it")
      ->check(CLI::NonNegativeNumber);
  app.require_subcommand(1);
  app.fallthrough();

  IngestConfig ic;
  auto* ingest = app.add_subcommand("ingest", "Parse a clue file and build the filtered corpus");
  EnumOption ingest_source{&source_choices, {}, &ic.source};
  add_enum(ingest, "--source", ingest_source, "crossword or jeopardy")->required();
  ingest->add_option("--input", ic.input, "Clue file (crossword CSV/TSV, Jeopardy JSON/JSONL)")->required();
  ingest->add_option("--embeddings", ic.embeddings, "Word vectors")->required();
  EnumOption ingest_format{&format_choices, {}, &ic.embeddings_format};
  add_enum(ingest, "--embeddings-format", ingest_format, "auto, binary or text");
  ingest->add_option("--frequencies", ic.frequencies, "word<TAB>per-million list")->required();
  ingest->add_option("--stoplist", ic.stoplist, "Stopword file (default: built-in list)");
  ingest->add_option("--pos-annotations,--pos", ic.pos_tags, "token<TAB>tag annotations; keeps content-word tags only");
  ingest->add_option("--abbrev-markers", ic.abbreviation_markers, "Clue substrings marking abbreviations")
      ->delimiter(',');
  ingest->add_option("--out", ic.out, "Corpus output (JSON Lines)")->required();
  ingest->add_option("--report", ic.report, "Exclusion report (default: <out>.report.json)");

  ScoreRunConfig sc;
  std::string density_vocab = "top100k";
  std::string overlap = "shorter";
  auto* score = app.add_subcommand("score", "Compute opacity, density and question features");
  score->add_option("--corpus", sc.corpus, "Corpus from ingest")->required();
  score->add_option("--embeddings", sc.embeddings, "Word vectors used by ingest")->required();
  EnumOption score_format{&format_choices, {}, &sc.embeddings_format};
  add_enum(score, "--embeddings-format", score_format, "auto, binary or text");
  score->add_option("--frequencies", sc.frequencies, "Frequency list used by ingest")->required();
  score->add_option("--density-vocab", density_vocab, "corpus, top100k or full")
      ->check(CLI::IsMember({"corpus", "top100k", "full"}));
  score->add_option("--top-n", sc.score.top_n, "Lexicon words in the top100k universe");
  score->add_option("--overlap-threshold", sc.score.density.overlap_threshold, "Letter overlap marking a stem")
      ->check(CLI::Range(0.0, 1.0));
  score->add_option("--overlap-measure", overlap, "shorter or longer word denominator")
      ->check(CLI::IsMember({"shorter", "longer"}));
  EnumOption score_aggregation{&aggregation_choices, {}, &sc.score.aggregation};
  add_enum(score, "--independent", score_aggregation, "mean-cosine or mean-angle");
  score->add_option("--conjunctions", sc.conjunctions, "Conjunction list, one per line");
  score->add_option("--out", sc.out, "Scored output (JSON Lines)")->required();

  AnalyzeConfig ac;
  std::string report = "groups";
  auto* analyze = app.add_subcommand("analyze", "Group means, null model, bins, KDE and medians");
  analyze->add_option("--scored", ac.scored, "Scored file")->required();
  analyze->add_option("--report", report, "groups, null, bins, kde or medians")
      ->required()
      ->check(CLI::IsMember({"groups", "null", "bins", "kde", "medians"}));
  analyze->add_option("--seed", ac.seed, "Master seed");
  analyze->add_option("--bootstrap", ac.bootstrap, "Bootstrap repetitions")->check(CLI::PositiveNumber);
  analyze->add_option("--repetitions", ac.repetitions, "Null-model permutations")->check(CLI::PositiveNumber);
  EnumOption analyze_aggregation{&aggregation_choices, {}, &ac.aggregation};
  add_enum(analyze, "--independent", analyze_aggregation, "mean-cosine or mean-angle");
  analyze->add_option("--corpus", ac.corpus, "Corpus behind the scored file (null report)");
  analyze->add_option("--embeddings", ac.embeddings, "Word vectors behind the scored file (null report)");
  EnumOption analyze_format{&format_choices, {}, &ac.embeddings_format};
  add_enum(analyze, "--embeddings-format", analyze_format, "auto, binary or text");
  analyze->add_option("--grid", ac.grid, "KDE grid points per axis")->check(CLI::Range(2, 2000));
  analyze->add_option("--out", ac.out, "Report output (JSON)")->required();

  RegressConfig rc;
  std::string rows = "per-model";
  auto* regress = app.add_subcommand("regress", "Fit regression models I-IV");
  regress->add_option("--scored", rc.scored, "Scored file")->required();
  EnumOption regress_dataset{&source_choices, {}, &rc.dataset};
  add_enum(regress, "--dataset", regress_dataset, "crossword or jeopardy")->required();
  regress->add_option("--rows", rows, "per-model or common row set")->check(CLI::IsMember({"per-model", "common"}));
  regress->add_option("--out", rc.out, "Report output (JSON)")->required();
  regress->add_option("--csv", rc.csv, "Also write a coefficient table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  if (*analyze && report == "null" && (!ac.corpus || !ac.embeddings)) {
    err << "error: --report null needs --corpus and --embeddings\n";
    return 2;
  }

  try {
    if (*ingest) {
      apply(ingest_source);
      apply(ingest_format);
      ic.threads = threads;
      cmd_ingest(ic, err);
    } else if (*score) {
      apply(score_format);
      apply(score_aggregation);
      sc.score.density_vocab = density_vocab_from_string(density_vocab);
      sc.score.density.measure = overlap == "shorter" ? OverlapMeasure::shorter_word : OverlapMeasure::longer_word;
      sc.score.threads = threads;
      cmd_score(sc, err);
    } else if (*analyze) {
      apply(analyze_aggregation);
      apply(analyze_format);
      ac.report = analysis_report_from_string(report);
      ac.threads = threads;
      cmd_analyze(ac, err);
    } else if (*regress) {
      apply(regress_dataset);
      rc.rows = rows == "common" ? RowPolicy::common : RowPolicy::per_model;
      cmd_regress(rc, err);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace qdiff
