// Regenerates tests/fixtures: a clustered word-vector space (text and binary),
// a frequency list, crossword and Jeopardy clue files, POS tags, a stoplist.
// Output depends only on the seed below.
//
//   make_fixtures <output-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdiff/corpus.hpp"
#include "qdiff/embedding.hpp"
#include "qdiff/text.hpp"

namespace fs = std::filesystem;
using namespace qdiff;

namespace {

constexpr std::size_t dim = 24;
constexpr int pseudo_clusters = 34;
constexpr int words_per_cluster = 28;
constexpr std::size_t lexicon_size = 5000;

// Portable draws: only the raw mt19937_64 stream is standardized.
struct Rng {
  std::mt19937_64 eng{20240611};
  double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  bool chance(double p) { return uniform() < p; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
};

struct Word {
  std::string text;
  int cluster = -1;
  double log_fpm = 0.0;
  bool in_lexicon = true;
  std::string tag = "NOUN";
};

struct World {
  std::vector<std::vector<double>> centers;
  std::vector<Word> words;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> members;  // pseudo clusters only
};

const std::vector<std::string> stop_fillers = {"the", "of", "a", "in", "with", "for", "to", "on", "at", "by"};
const std::vector<std::string> conjunctions = {"and", "or", "but"};

std::string pseudo_word(Rng& rng) {
  static const std::string cons = "bdfgklmnprstvz";
  static const std::string vowels = "aeiou";
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t i = 0; i < syllables; ++i) {
    w += cons[rng.below(cons.size())];
    w += vowels[rng.below(vowels.size())];
  }
  if (rng.chance(0.3)) w += cons[rng.below(cons.size())];
  return w;
}

void add_word(World& w, const std::string& text, int cluster, double log_fpm, const std::string& tag = "NOUN",
              bool in_lexicon = true) {
  w.index.emplace(text, w.words.size());
  w.words.push_back({text, cluster, log_fpm, in_lexicon, tag});
}

World make_world(Rng& rng) {
  World w;
  const int named_groups = 7;
  for (int c = 0; c < named_groups + pseudo_clusters; ++c) {
    std::vector<double> center(dim);
    for (auto& x : center) x = rng.normal();
    w.centers.push_back(center);
  }
  // Hand-written groups so the familiar example pairs behave sensibly.
  add_word(w, "game", 0, 2.2);
  add_word(w, "bat", 0, 1.1);
  add_word(w, "ball", 0, 1.9);
  add_word(w, "baseball", 0, std::log10(33.4));
  add_word(w, "sport", 0, 1.6);
  add_word(w, "glove", 0, 0.9);
  add_word(w, "iron", 1, std::log10(40.0));
  add_word(w, "horse", 1, std::log10(60.0));
  add_word(w, "train", 1, 1.7);
  add_word(w, "rail", 1, 1.0);
  add_word(w, "steam", 1, 1.0, "NOUN", false);
  add_word(w, "locomotive", 1, 0.1, "NOUN", false);
  add_word(w, "carrier", 2, 1.2);
  add_word(w, "puppy", 2, 0.8);
  add_word(w, "kennel", 2, -0.2);
  add_word(w, "dog", 2, 1.8);
  add_word(w, "leash", 2, -0.4);
  add_word(w, "watery", 3, -0.5, "ADJ");
  add_word(w, "wisdom", 3, 0.9);
  add_word(w, "hydrology", 3, -1.3);
  add_word(w, "water", 3, 2.3);
  add_word(w, "river", 3, 1.6);
  add_word(w, "make", 4, 2.9, "VERB");
  add_word(w, "good", 4, 2.8, "ADJ");
  add_word(w, "impression", 4, 1.1);
  add_word(w, "etch", 4, -1.0, "VERB");
  add_word(w, "etched", 4, -0.8, "VERB");
  add_word(w, "etching", 4, -0.9);
  add_word(w, "engrave", 4, -1.1, "VERB");
  add_word(w, "glass", 4, 1.5);
  add_word(w, "acid", 4, 1.0);
  add_word(w, "Paris", 5, 2.0, "PROPN");
  add_word(w, "France", 5, 1.9, "PROPN");
  add_word(w, "capital", 5, 1.7);
  add_word(w, "city", 5, 2.2);
  add_word(w, "highest", 6, 1.3, "ADJ");
  add_word(w, "point", 6, 2.1);
  add_word(w, "summit", 6, 1.0);
  add_word(w, "apex", 6, -0.6);
  add_word(w, "zenith", 6, -0.9);

  std::set<std::string> taken(default_stoplist().begin(), default_stoplist().end());
  for (const auto& word : w.words) taken.insert(ascii_lower(word.text));
  static const std::vector<std::string> tags = {"NOUN", "NOUN", "NOUN", "VERB", "ADJ", "ADJ", "ADV"};
  for (int c = 0; c < pseudo_clusters; ++c) {
    std::vector<std::size_t> members;
    for (int i = 0; i < words_per_cluster; ++i) {
      std::string text;
      do {
        text = pseudo_word(rng);
      } while (!taken.insert(text).second);
      members.push_back(w.words.size());
      add_word(w, text, named_groups + c, -1.5 + 4.5 * rng.uniform(), rng.pick(tags), !rng.chance(0.06));
    }
    w.members.push_back(members);
  }
  return w;
}

EmbeddingSpace make_space(const World& w, Rng& rng) {
  EmbeddingSpaceBuilder b(dim);
  std::vector<float> zenith;
  for (const auto& word : w.words) {
    std::vector<float> v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = static_cast<float>(w.centers[static_cast<std::size_t>(word.cluster)][i] + 0.7 * rng.normal());
    }
    // apex and zenith share one vector, so apex has a neighbour at distance 0
    if (word.text == "apex") zenith = v;
    if (word.text == "zenith") v = zenith;
    b.add(word.text, v);
  }
  // stopwords live in the space too, as in large news-trained vocabularies
  for (const auto& s : stop_fillers) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    b.add(s, v);
  }
  return std::move(b).build();
}

std::string clue_text(std::vector<std::string> words, bool pun) {
  std::string s;
  for (const auto& t : words) {
    if (!s.empty()) s += ' ';
    s += t;
  }
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  if (pun) s += '?';
  return s;
}

// Answer from a pseudo cluster; harder levels lean toward rarer words.
std::size_t pick_answer(const World& w, Rng& rng, const std::vector<std::size_t>& members, double hardness) {
  std::size_t best = rng.pick(members);
  for (int k = 0; k < 2; ++k) {
    const std::size_t other = rng.pick(members);
    const bool rarer = w.words[other].log_fpm < w.words[best].log_fpm;
    if (rarer == (hardness > 0.5) && rng.chance(0.3)) best = other;
  }
  return best;
}

std::vector<std::string> clue_words(const World& w, Rng& rng, std::size_t answer, std::size_t content,
                                    double p_same, std::size_t fillers) {
  const auto& own = w.members[static_cast<std::size_t>(w.words[answer].cluster - 7)];
  std::vector<std::string> out;
  for (std::size_t i = 0; i < content; ++i) {
    std::size_t pick = answer;
    while (pick == answer) {
      const auto& group = rng.chance(p_same) ? own : rng.pick(w.members);
      pick = rng.pick(group);
    }
    out.push_back(w.words[pick].text);
    if (i + 1 < content && rng.chance(0.25)) out.push_back(rng.pick(conjunctions));
  }
  for (std::size_t i = 0; i < fillers; ++i) {
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(rng.below(out.size() + 1)), rng.pick(stop_fillers));
  }
  return out;
}

std::string upper(std::string s) {
  for (auto& c : s) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string iso(std::chrono::year_month_day d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

void write_crossword(const fs::path& path, const World& w, Rng& rng) {
  using namespace std::chrono;
  std::ofstream out(path, std::ios::binary);
  out << "date,clue,answer\n";
  const sys_days first{year{1994} / January / 3};  // a Monday
  for (int row = 0; row < 720; ++row) {
    const int week = static_cast<int>(rng.below(400));
    const int dow = static_cast<int>(rng.below(7));  // 0 = Monday
    const year_month_day date{first + days{7 * week + dow}};
    const int level = label_crossword_difficulty(weekday{sys_days{date}});
    const double hardness = (level - 1) / 5.0;
    const bool pun = rng.chance(0.12);
    const auto& members = rng.pick(w.members);
    const std::size_t answer = pick_answer(w, rng, members, hardness);
    const std::size_t content = 1 + rng.below(3);
    const double p_same = 0.9 - 0.45 * hardness - (pun ? 0.35 : 0.0);
    auto words = clue_words(w, rng, answer, content, std::max(p_same, 0.05), rng.below(2));
    if (rng.chance(0.04)) words.push_back("qorblat");  // not in the space or the lexicon
    out << iso(date) << ',' << csv_field(clue_text(words, pun)) << ',' << upper(w.words[answer].text) << '\n';
  }
  // familiar pairs, then one row per exclusion and skip path
  out << "1994-01-03,Game with bat and ball,BASEBALL\n"
         "1994-01-04,Iron horse,TRAIN\n"
         "1994-01-05,Carrier for your puppy,KENNEL\n"
         "1994-01-06,Watery wisdom,HYDROLOGY\n"
         "1994-01-07,Make a good impression?,ETCH\n"
         "1994-01-08,Engrave glass with acid,ETCH\n"
         "1994-01-09,Capital of France,PARIS\n"
         "1994-01-10,Highest point,APEX\n"
         "1994-01-11,\"Bat, ball and glove\",BASEBALL\n"
         "1994-01-12,Zorbly gleep steam,LOCOMOTIVE\n"
         "1994-01-13,9:59,TIME\n"
         "1994-01-14,!,WOW\n"
         "1994-01-15,?,WHAT\n"
         "1994-01-16,Baseball stat: Abbr.,RBI\n"
         "1994-01-17,Frozen treat,ICE CREAM\n"
         "1994-01-18,Mystery word,ZZYZX\n"
         "1994-01-19,The one and only,TRAIN\n"
         "1994-01-20,Blorf quazzle,HORSE\n"
         "1994-13-45,Iron horse,TRAIN\n"
         "1994-01-21,Iron horse,\n"
         "oops\n";
}

void write_jeopardy(const fs::path& path, const World& w, Rng& rng) {
  static const std::vector<int> single = {200, 400, 600, 800, 1000};
  static const std::vector<int> doubled = {400, 800, 1200, 1600, 2000};
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  auto record = [](const std::string& q, const std::string& a, nlohmann::ordered_json value, const char* round) {
    nlohmann::ordered_json j;
    j["category"] = "GENERAL";
    j["question"] = q;
    j["value"] = value;
    j["answer"] = a;
    if (round) j["round"] = round;
    return j;
  };
  for (int row = 0; row < 360; ++row) {
    const bool dbl = rng.chance(0.5);
    const int value = rng.pick(dbl ? doubled : single);
    const int level = *label_jeopardy_difficulty(value);
    const double hardness = (level - 1) / 7.0;
    const auto& members = rng.pick(w.members);
    const std::size_t answer = pick_answer(w, rng, members, hardness);
    const std::size_t content = 2 + rng.below(4);
    auto words = clue_words(w, rng, answer, content, 0.85 - 0.5 * hardness, 2 + rng.below(3));
    std::string q = "'" + clue_text(words, false) + "'";
    if (rng.chance(0.1)) q = "'<a href=\"http://example.org/\">" + clue_text(words, false) + "</a>'";
    arr.push_back(record(q, w.words[answer].text, "$" + std::to_string(value), dbl ? "Double Jeopardy!" : "Jeopardy!"));
  }
  arr.push_back(record("'An iron horse that runs on rails'", "Train", "$200", "Jeopardy!"));
  arr.push_back(record("'The capital city of France'", "Paris", 2000, "Double Jeopardy!"));
  arr.push_back(record("'A wager on the river'", "water", "$5,000", "Double Jeopardy!"));
  arr.push_back(record("'A legacy river of water'", "glass", "$300", "Jeopardy!"));
  arr.push_back(record("'Final question'", "glass", nullptr, "Final Jeopardy!"));
  arr.push_back(record("'Tiebreak question'", "glass", "$200", "Tiebreaker"));
  arr.push_back(record("'No round given'", "glass", "$200", nullptr));
  arr.push_back(record("'No answer given'", "", "$400", "Jeopardy!"));
  arr.push_back(record("'Bad value'", "glass", "lots", "Jeopardy!"));
  std::ofstream out(path, std::ios::binary);
  out << arr.dump(1) << '\n';
}

void write_lexicon(const fs::path& path, const World& w, Rng& rng) {
  std::map<std::string, double> fpm;
  const std::map<std::string, double> stops = {{"the", 60000}, {"of", 31000}, {"a", 25000}, {"in", 21000},
                                               {"with", 7000},  {"for", 9000},  {"to", 26000}, {"on", 7500},
                                               {"at", 5200},    {"by", 5100},   {"and", 28000}, {"or", 4200},
                                               {"but", 4300},   {"your", 2100}, {"one", 3300},  {"only", 1900}};
  fpm.insert(stops.begin(), stops.end());
  for (const auto& word : w.words) {
    if (word.in_lexicon) fpm[word.text] = std::pow(10.0, word.log_fpm);
  }
  fpm["baseball"] = 33.4;
  std::set<std::string> taken;
  for (const auto& word : w.words) taken.insert(ascii_lower(word.text));
  while (fpm.size() < lexicon_size) {
    std::string text = pseudo_word(rng) + pseudo_word(rng);
    if (taken.insert(text).second) fpm[text] = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
  }
  std::ofstream out(path, std::ios::binary);
  char buf[64];
  for (const auto& [word, f] : fpm) {
    std::snprintf(buf, sizeof buf, "%.6g", f);
    out << word << '\t' << buf << '\n';
  }
}

void write_pos(const fs::path& path, const World& w) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& word : w.words) out << ascii_lower(word.text) << '\t' << word.tag << '\n';
  for (const auto& s : stop_fillers) out << s << "\tADP\n";
  for (const auto& s : conjunctions) out << s << "\tCCONJ\n";
}

void write_stoplist(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << "# small stoplist for the --stoplist path\n";
  for (const char* s : {"the", "of", "a", "an", "in", "with", "for", "to", "on", "at", "by", "and", "or", "but",
                        "your", "one", "only", "this", "that", "is"}) {
    out << s << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);
  Rng rng;
  const World world = make_world(rng);
  const EmbeddingSpace space = make_space(world, rng);
  {
    std::ofstream out(dir / "embeddings.txt", std::ios::binary);
    save_embeddings(space, out, EmbeddingFormat::text);
  }
  {
    std::ofstream out(dir / "embeddings.bin", std::ios::binary);
    save_embeddings(space, out, EmbeddingFormat::binary);
  }
  write_lexicon(dir / "frequencies.tsv", world, rng);
  write_crossword(dir / "crossword.csv", world, rng);
  write_jeopardy(dir / "jeopardy.json", world, rng);
  write_pos(dir / "pos.tsv", world);
  write_stoplist(dir / "stoplist.txt");
  std::cout << "wrote fixtures to " << dir.string() << " (" << space.size() << " vectors)\n";
  return 0;
}
