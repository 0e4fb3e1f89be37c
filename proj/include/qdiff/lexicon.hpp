#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qdiff {

/// Word frequencies in occurrences per million words. All stored values are
/// strictly positive; a miss is reported as nullopt, never as zero.
class FrequencyTable {
 public:
  FrequencyTable() = default;
  // Throws ArgumentError if any frequency is not strictly positive and finite.
  FrequencyTable(std::unordered_map<std::string, double> per_million, std::string source);

  std::optional<double> per_million(const std::string& word) const;
  // Exact match first, then the ASCII-lowercased form.
  std::optional<double> per_million_folded(const std::string& word) const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::string& source() const noexcept { return source_; }

  // Most frequent words, ties broken lexicographically.
  std::vector<std::string> most_frequent(std::size_t n) const;

  const std::unordered_map<std::string, double>& entries() const noexcept { return entries_; }

 private:
  std::unordered_map<std::string, double> entries_;
  std::string source_;
};

struct FrequencyLoadReport {
  std::size_t loaded = 0;
  std::size_t skipped_malformed = 0;
  std::size_t skipped_nonpositive = 0;
  std::size_t duplicates = 0;  // later occurrence wins

  std::size_t skipped() const noexcept { return skipped_malformed + skipped_nonpositive; }
};

struct LoadedFrequencies {
  FrequencyTable table;
  FrequencyLoadReport report;
};

// "word<TAB>per_million" per line. Throws IoError on an unreadable stream.
LoadedFrequencies load_frequencies(std::istream& in, std::string source_label);

// -log10(fpm); higher is rarer.
double obscurity_from_fpm(double per_million);
std::optional<double> obscurity(const FrequencyTable& table, const std::string& word);

}  // namespace qdiff
