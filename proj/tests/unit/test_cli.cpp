#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "qdiff/cli.hpp"
#include "qdiff/records_io.hpp"

using namespace qdiff;
namespace fs = std::filesystem;

namespace {

const fs::path fixtures = QDIFF_FIXTURE_DIR;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "qdiff");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qdiff_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string str(const fs::path& p) { return p.string(); }

// ingest -> score -> analyze (groups, null) -> regress, for the crossword fixture.
std::map<std::string, std::string> pipeline(const fs::path& dir, int threads) {
  const std::string t = std::to_string(threads);
  const auto emb = str(fixtures / "embeddings.bin");
  const auto freq = str(fixtures / "frequencies.tsv");
  REQUIRE(run({"--threads", t, "ingest", "--source", "crossword", "--input", str(fixtures / "crossword.csv"),
               "--embeddings", emb, "--frequencies", freq, "--out", str(dir / "corpus.jsonl")})
              .code == 0);
  REQUIRE(run({"--threads", t, "score", "--corpus", str(dir / "corpus.jsonl"), "--embeddings", emb, "--frequencies",
               freq, "--out", str(dir / "scored.jsonl")})
              .code == 0);
  REQUIRE(run({"--threads", t, "analyze", "--scored", str(dir / "scored.jsonl"), "--report", "groups", "--bootstrap",
               "200", "--out", str(dir / "groups.json")})
              .code == 0);
  REQUIRE(run({"--threads", t, "analyze", "--scored", str(dir / "scored.jsonl"), "--report", "null", "--corpus",
               str(dir / "corpus.jsonl"), "--embeddings", emb, "--repetitions", "4", "--out", str(dir / "null.json")})
              .code == 0);
  REQUIRE(run({"regress", "--scored", str(dir / "scored.jsonl"), "--dataset", "crossword", "--out",
               str(dir / "regress.json"), "--csv", str(dir / "regress.csv")})
              .code == 0);
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("version and usage errors") {
  auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(std::string(tool_version())) != std::string::npos);
  CHECK(v.out.find("corpus format 1") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"ingest", "--source", "crossword"}).code == 2);
  CHECK(run({"ingest", "--source", "sudoku", "--input", "x", "--embeddings", "y", "--frequencies", "z", "--out", "o"})
            .code == 2);
  CHECK(run({"analyze", "--scored", "x", "--report", "null", "--out", "o"}).code == 2);
  CHECK(run({"ingest", "--help"}).code == 0);
}

TEST_CASE("missing paths exit 4 and name the path") {
  const auto dir = scratch("missing");
  const auto r = run({"ingest", "--source", "crossword", "--input", str(fixtures / "crossword.csv"), "--embeddings",
                      "/no/such/vectors.bin", "--frequencies", str(fixtures / "frequencies.tsv"), "--out",
                      str(dir / "c.jsonl")});
  CHECK(r.code == 4);
  CHECK(r.err.find("/no/such/vectors.bin") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "c.jsonl"));
  CHECK(run({"analyze", "--scored", "/no/such/scored.jsonl", "--report", "groups", "--out", str(dir / "g.json")}).code ==
        4);
}

TEST_CASE("ingest report reconciles with the input rows") {
  const auto dir = scratch("ingest");
  const auto r = run({"ingest", "--source", "crossword", "--input", str(fixtures / "crossword.csv"), "--embeddings",
                      str(fixtures / "embeddings.bin"), "--frequencies", str(fixtures / "frequencies.tsv"), "--out",
                      str(dir / "corpus.jsonl")});
  REQUIRE(r.code == 0);
  const auto report = Json::parse(slurp(dir / "corpus.jsonl.report.json"));
  const std::size_t rows = report["parse"]["rows"];
  const std::size_t skipped = report["parse"]["skipped_total"];
  const std::size_t excluded = report["exclusions"]["total"];
  const std::size_t kept = report["kept"];
  CHECK(rows == skipped + excluded + kept);
  CHECK(kept > 0);
  CHECK(report["inputs"]["embeddings"]["digest"].get<std::string>().size() == 16);

  std::ifstream in(dir / "corpus.jsonl");
  const auto corpus = read_corpus(in);
  CHECK(corpus.records.size() == kept);
  CHECK(corpus.header["inputs"]["frequencies"]["digest"] == report["inputs"]["frequencies"]["digest"]);
}

TEST_CASE("jeopardy ingest through text embeddings") {
  const auto dir = scratch("jeopardy");
  const auto r = run({"ingest", "--source", "jeopardy", "--input", str(fixtures / "jeopardy.json"), "--embeddings",
                      str(fixtures / "embeddings.txt"), "--frequencies", str(fixtures / "frequencies.tsv"), "--out",
                      str(dir / "corpus.jsonl")});
  REQUIRE(r.code == 0);
  const auto report = Json::parse(slurp(dir / "corpus.jsonl.report.json"));
  CHECK(report["exclusions"]["unmappable_difficulty"].get<int>() >= 1);
  CHECK(report["source"] == "jeopardy");
  CHECK(run({"score", "--corpus", str(dir / "corpus.jsonl"), "--embeddings", str(fixtures / "embeddings.txt"),
             "--frequencies", str(fixtures / "frequencies.tsv"), "--out", str(dir / "scored.jsonl")})
            .code == 0);
  CHECK(run({"regress", "--scored", str(dir / "scored.jsonl"), "--dataset", "jeopardy", "--out",
             str(dir / "r.json")})
            .code == 0);
  // dataset label must match the scored file
  CHECK(run({"regress", "--scored", str(dir / "scored.jsonl"), "--dataset", "crossword", "--out",
             str(dir / "r2.json")})
            .code == 3);
}

TEST_CASE("pipeline is byte-identical across reruns and thread counts") {
  const auto a = pipeline(scratch("run_a"), 1);
  const auto b = pipeline(scratch("run_b"), 1);
  const auto c = pipeline(scratch("run_c"), 4);
  REQUIRE(a.size() == 7);
  for (const auto& [name, bytes] : a) {
    CHECK_MESSAGE(b.at(name) == bytes, name);
    CHECK_MESSAGE(c.at(name) == bytes, name);
  }
}

TEST_CASE("pipeline outputs: flags, groups, regression table") {
  const auto dir = scratch("outputs");
  const auto files = pipeline(dir, 0);

  std::ifstream in(dir / "scored.jsonl");
  const auto scored = read_scored(in);
  bool found = false;
  for (const auto& r : scored.records) {
    if (r.answer != "locomotive") continue;
    found = true;
    CHECK((r.flags & flags::missing_answer_frequency) != 0);
    CHECK((r.flags & flags::missing_question_frequency) != 0);
  }
  CHECK(found);

  const auto groups = Json::parse(files.at("groups.json"));
  std::set<int> levels;
  for (const auto& r : scored.records) levels.insert(r.difficulty);
  const auto& rows = groups["by_difficulty"];
  REQUIRE(rows.size() == levels.size());
  std::set<int> seen;
  for (const auto& row : rows) seen.insert(row["difficulty"].get<int>());
  CHECK(seen == levels);
  CHECK(groups["seed"] == default_seed);
  CHECK(groups["inputs"]["scored"].contains("digest"));

  const auto null = Json::parse(files.at("null.json"));
  CHECK(null["models"]["synergistic"]["null_mean"].get<double>() >
        null["models"]["synergistic"]["data_mean"].get<double>());

  std::istringstream csv(files.at("regress.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  REQUIRE(lines.size() == 11);  // header, six terms, intercept, N, R2, AIC
  CHECK(lines[0] == "term,I,II,III,IV");
  CHECK(lines[1].rfind("obscurity,", 0) == 0);
  CHECK(lines[8].rfind("N,", 0) == 0);
  CHECK(lines[10].rfind("AIC,", 0) == 0);
}

TEST_CASE("identical seeds give identical null reports; other seeds differ") {
  const auto dir = scratch("null");
  pipeline(dir, 1);
  auto null_run = [&](const std::string& seed, const std::string& out) {
    return run({"analyze", "--scored", str(dir / "scored.jsonl"), "--report", "null", "--corpus",
                str(dir / "corpus.jsonl"), "--embeddings", str(fixtures / "embeddings.bin"), "--seed", seed,
                "--repetitions", "3", "--out", str(dir / out)})
        .code;
  };
  REQUIRE(null_run("5", "n1.json") == 0);
  REQUIRE(null_run("5", "n2.json") == 0);
  REQUIRE(null_run("6", "n3.json") == 0);
  CHECK(slurp(dir / "n1.json") == slurp(dir / "n2.json"));
  CHECK(slurp(dir / "n1.json") != slurp(dir / "n3.json"));
}

TEST_CASE("mismatched stage inputs are data errors") {
  const auto dir = scratch("mismatch");
  pipeline(dir, 1);
  fs::copy_file(fixtures / "frequencies.tsv", dir / "other_freq.tsv");
  {
    std::ofstream extra(dir / "other_freq.tsv", std::ios::app);
    extra << "zzzextra\t1.5\n";
  }
  const auto r = run({"score", "--corpus", str(dir / "corpus.jsonl"), "--embeddings", str(fixtures / "embeddings.bin"),
                      "--frequencies", str(dir / "other_freq.tsv"), "--out", str(dir / "s2.jsonl")});
  CHECK(r.code == 3);
  CHECK(r.err.find("digest") != std::string::npos);

  // the text vectors are a different file from the ones ingest used
  CHECK(run({"analyze", "--scored", str(dir / "scored.jsonl"), "--report", "null", "--corpus",
             str(dir / "corpus.jsonl"), "--embeddings", str(fixtures / "embeddings.txt"), "--out",
             str(dir / "n.json")})
            .code == 3);

  // a corpus file fed where a scored file belongs
  CHECK(run({"analyze", "--scored", str(dir / "corpus.jsonl"), "--report", "groups", "--out", str(dir / "g.json")})
            .code == 3);
}

TEST_CASE("other analyze reports run on the fixture") {
  const auto dir = scratch("reports");
  pipeline(dir, 1);
  for (const char* rep : {"bins", "kde", "medians"}) {
    const auto r = run({"analyze", "--scored", str(dir / "scored.jsonl"), "--report", rep, "--grid", "20",
                        "--bootstrap", "50", "--out", str(dir / (std::string(rep) + ".json"))});
    CHECK_MESSAGE(r.code == 0, rep);
  }
  const auto kde = Json::parse(slurp(dir / "kde.json"));
  CHECK(std::fabs(kde["all"]["mass"].get<double>() - 1.0) < 0.01);
  CHECK(kde["all"]["density"].size() == 20);
  const auto medians = Json::parse(slurp(dir / "medians.json"));
  CHECK(medians["overall_median_fpm"].get<double>() > 0.0);
}
