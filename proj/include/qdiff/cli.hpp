#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdiff/analysis.hpp"
#include "qdiff/corpus.hpp"
#include "qdiff/embedding.hpp"
#include "qdiff/metrics.hpp"
#include "qdiff/regress.hpp"

namespace qdiff {

std::string_view tool_version();

inline constexpr std::uint64_t default_seed = 1729;

enum class EmbeddingFormatChoice { automatic, binary, text };

// ".bin" selects binary for automatic.
EmbeddingFormat resolve_format(EmbeddingFormatChoice choice, const std::filesystem::path& path);

struct IngestConfig {
  Source source = Source::crossword;
  std::filesystem::path input;
  std::filesystem::path embeddings;
  EmbeddingFormatChoice embeddings_format = EmbeddingFormatChoice::automatic;
  std::filesystem::path frequencies;
  std::optional<std::filesystem::path> stoplist;
  std::optional<std::filesystem::path> pos_tags;
  std::vector<std::string> abbreviation_markers{"abbr"};
  std::filesystem::path out;
  std::optional<std::filesystem::path> report;  // default: <out>.report.json
  int threads = 0;
};

struct ScoreRunConfig {
  std::filesystem::path corpus;
  std::filesystem::path embeddings;
  EmbeddingFormatChoice embeddings_format = EmbeddingFormatChoice::automatic;
  std::filesystem::path frequencies;
  std::optional<std::filesystem::path> conjunctions;
  ScoreConfig score;
  std::filesystem::path out;
};

enum class AnalysisReport { groups, null, bins, kde, medians };
AnalysisReport analysis_report_from_string(std::string_view name);
std::string_view to_string(AnalysisReport r);

struct AnalyzeConfig {
  std::filesystem::path scored;
  AnalysisReport report = AnalysisReport::groups;
  std::uint64_t seed = default_seed;
  std::size_t bootstrap = 1000;
  std::size_t repetitions = 10;  // null model
  IndependentAggregation aggregation = IndependentAggregation::mean_cosine;
  // null report only: the corpus the scored file came from, and its vectors
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> embeddings;
  EmbeddingFormatChoice embeddings_format = EmbeddingFormatChoice::automatic;
  std::size_t grid = 100;  // kde points per axis
  std::filesystem::path out;
  int threads = 0;
};

struct RegressConfig {
  std::filesystem::path scored;
  Source dataset = Source::crossword;
  RowPolicy rows = RowPolicy::per_model;
  std::filesystem::path out;
  std::optional<std::filesystem::path> csv;  // Table-4-shaped text
};

// Each throws the library's error types; paths are checked up front and a
// missing one raises IoError naming it.
void cmd_ingest(const IngestConfig& config, std::ostream& log);
void cmd_score(const ScoreRunConfig& config, std::ostream& log);
void cmd_analyze(const AnalyzeConfig& config, std::ostream& log);
void cmd_regress(const RegressConfig& config, std::ostream& log);

// Parses argv and dispatches. Exit codes: 0 success, 2 usage, 3 data
// (format/schema/inconsistent inputs), 4 i/o.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qdiff
