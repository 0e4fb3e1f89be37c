#include "qdiff/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>

#include "qdiff/error.hpp"
#include "qdiff/text.hpp"

namespace qdiff {

FrequencyTable::FrequencyTable(std::unordered_map<std::string, double> per_million, std::string source)
    : entries_(std::move(per_million)), source_(std::move(source)) {
  for (const auto& [word, f] : entries_) {
    if (!(f > 0.0) || !std::isfinite(f)) throw ArgumentError("non-positive frequency for '" + word + "'");
  }
}

std::optional<double> FrequencyTable::per_million(const std::string& word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> FrequencyTable::per_million_folded(const std::string& word) const {
  if (auto f = per_million(word)) return f;
  std::string lower = ascii_lower(word);
  if (lower == word) return std::nullopt;
  return per_million(lower);
}

std::vector<std::string> FrequencyTable::most_frequent(std::size_t n) const {
  std::vector<std::pair<double, const std::string*>> items;
  items.reserve(entries_.size());
  for (const auto& [w, f] : entries_) items.emplace_back(f, &w);
  auto before = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  };
  n = std::min(n, items.size());
  std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n), items.end(), before);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(*items[i].second);
  return out;
}

LoadedFrequencies load_frequencies(std::istream& in, std::string source_label) {
  if (!in) throw IoError("frequency stream is not readable");
  std::unordered_map<std::string, double> entries;
  FrequencyLoadReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || line.find('\t', tab + 1) != std::string::npos) {
      ++report.skipped_malformed;
      continue;
    }
    std::string_view num(line.data() + tab + 1, line.size() - tab - 1);
    double f = 0.0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), f);
    if (ec != std::errc() || p != num.data() + num.size() || num.empty() || !std::isfinite(f)) {
      ++report.skipped_malformed;
      continue;
    }
    if (!(f > 0.0)) {
      ++report.skipped_nonpositive;
      continue;
    }
    auto [it, inserted] = entries.insert_or_assign(line.substr(0, tab), f);
    if (!inserted) ++report.duplicates;
  }
  if (in.bad()) throw IoError("read error while loading frequencies");
  report.loaded = entries.size();
  return {FrequencyTable(std::move(entries), std::move(source_label)), report};
}

double obscurity_from_fpm(double per_million) {
  if (!(per_million > 0.0) || !std::isfinite(per_million)) throw ArgumentError("obscurity needs a positive frequency");
  return -std::log10(per_million);
}

std::optional<double> obscurity(const FrequencyTable& table, const std::string& word) {
  auto f = table.per_million(word);
  if (!f) return std::nullopt;
  return obscurity_from_fpm(*f);
}

}  // namespace qdiff
