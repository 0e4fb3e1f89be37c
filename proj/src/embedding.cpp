#include "qdiff/embedding.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "json.hpp"

#include "qdiff/digest.hpp"

namespace qdiff {

std::optional<std::size_t> EmbeddingSpace::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingSpace::vector(const std::string& word) const {
  auto idx = find(word);
  if (!idx) throw ArgumentError("word not in embedding space: " + word);
  return vector(*idx);
}

EmbeddingSpaceBuilder::EmbeddingSpaceBuilder(std::size_t dimension) {
  if (dimension == 0) throw ArgumentError("embedding dimension must be positive");
  space_.dimension_ = dimension;
}

void EmbeddingSpaceBuilder::reserve(std::size_t entries) {
  space_.words_.reserve(entries);
  space_.values_.reserve(entries * space_.dimension_);
  space_.squared_norms_.reserve(entries);
  space_.index_.reserve(entries);
}

EmbeddingSpaceBuilder::AddResult EmbeddingSpaceBuilder::add(std::string word, std::span<const float> values) {
  if (values.size() != space_.dimension_) {
    throw ArgumentError("vector for '" + word + "' has " + std::to_string(values.size()) +
                        " components, expected " + std::to_string(space_.dimension_));
  }
  const double sq = dot(values, values);
  if (!(sq > 0.0)) return AddResult::zero_norm;
  if (space_.index_.contains(word)) return AddResult::duplicate;
  space_.index_.emplace(word, space_.words_.size());
  space_.words_.push_back(std::move(word));
  space_.values_.insert(space_.values_.end(), values.begin(), values.end());
  space_.squared_norms_.push_back(sq);
  return AddResult::added;
}

EmbeddingSpace EmbeddingSpaceBuilder::build(std::string source_digest) && {
  space_.digest_ = std::move(source_digest);
  return std::move(space_);
}

std::string EmbeddingLoadReport::to_json() const {
  nlohmann::ordered_json j;
  j["declared"] = declared;
  j["loaded"] = loaded;
  j["skipped_zero_norm"] = skipped_zero_norm;
  j["skipped_duplicate"] = skipped_duplicate;
  j["filtered_out"] = filtered_out;
  return j.dump();
}

namespace {

// Buffered reader over an istream that tracks the absolute byte offset and
// digests every byte it hands out.
class ByteReader {
 public:
  explicit ByteReader(std::istream& in) : in_(in) {}

  int peek() {
    if (pos_ == len_ && !refill()) return -1;
    return static_cast<unsigned char>(buf_[pos_]);
  }
  int get() {
    int c = peek();
    if (c >= 0) {
      ++pos_;
      ++offset_;
    }
    return c;
  }
  // Reads exactly n bytes; returns false on short read.
  bool read(char* out, std::size_t n) {
    while (n > 0) {
      if (pos_ == len_ && !refill()) return false;
      const std::size_t take = std::min(n, len_ - pos_);
      std::memcpy(out, buf_.data() + pos_, take);
      pos_ += take;
      offset_ += take;
      out += take;
      n -= take;
    }
    return true;
  }
  bool getline(std::string& line) {
    line.clear();
    int c;
    bool any = false;
    while ((c = get()) >= 0) {
      any = true;
      if (c == '\n') return true;
      line.push_back(static_cast<char>(c));
    }
    return any;
  }
  std::uint64_t offset() const { return offset_; }
  // Digest of the whole stream; drains anything not yet consumed.
  std::string finish_digest() {
    while (refill()) {
    }
    return digest_.hex();
  }

 private:
  bool refill() {
    if (pos_ < len_) return true;
    if (!in_) return false;
    in_.read(buf_.data(), buf_.size());
    len_ = static_cast<std::size_t>(in_.gcount());
    pos_ = 0;
    if (in_.bad()) throw IoError("read error while loading embeddings");
    digest_.update(buf_.data(), len_);
    return len_ > 0;
  }

  std::istream& in_;
  std::array<char, 1 << 16> buf_{};
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  std::uint64_t offset_ = 0;
  Digest digest_;
};

std::string at_offset(const std::string& what, std::uint64_t offset) {
  return what + " at byte offset " + std::to_string(offset);
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && !s.empty();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

float read_le_float(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
  }
  return std::bit_cast<float>(bits);
}

void write_le_float(std::ostream& out, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
  }
  char bytes[4];
  std::memcpy(bytes, &bits, 4);
  out.write(bytes, 4);
}

void tally(EmbeddingLoadReport& report, EmbeddingSpaceBuilder::AddResult r) {
  switch (r) {
    case EmbeddingSpaceBuilder::AddResult::added: ++report.loaded; break;
    case EmbeddingSpaceBuilder::AddResult::zero_norm: ++report.skipped_zero_norm; break;
    case EmbeddingSpaceBuilder::AddResult::duplicate: ++report.skipped_duplicate; break;
    case EmbeddingSpaceBuilder::AddResult::filtered: ++report.filtered_out; break;
  }
}

LoadedEmbeddings load_binary(ByteReader& reader, const std::unordered_set<std::string>* filter) {
  std::string header;
  if (!reader.getline(header)) throw FormatError("malformed header: empty stream");
  const auto fields = split_ws(header);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (fields.size() != 2 || !parse_size(fields[0], count) || !parse_size(fields[1], dim) || dim == 0) {
    throw FormatError("malformed header: expected \"<vocab_count> <dim>\"");
  }

  EmbeddingLoadReport report;
  report.declared = count;
  EmbeddingSpaceBuilder builder(dim);
  builder.reserve(filter ? std::min(count, filter->size()) : count);
  std::vector<char> raw(dim * 4);
  std::vector<float> values(dim);
  std::string token;

  for (std::size_t e = 0; e < count; ++e) {
    while (reader.peek() == '\n') reader.get();
    const std::uint64_t entry_offset = reader.offset();
    token.clear();
    int c;
    while ((c = reader.get()) >= 0 && c != ' ') token.push_back(static_cast<char>(c));
    if (c < 0) throw FormatError(at_offset("truncated entry " + std::to_string(e) + " (token)", entry_offset));
    if (token.empty()) throw FormatError(at_offset("empty token in entry " + std::to_string(e), entry_offset));
    const std::uint64_t vec_offset = reader.offset();
    if (!reader.read(raw.data(), raw.size())) {
      throw FormatError(at_offset("dimension mismatch: vector for '" + token + "' shorter than " +
                                      std::to_string(dim) + " floats",
                                  vec_offset));
    }
    if (filter && !filter->contains(token)) {
      ++report.filtered_out;
      continue;
    }
    for (std::size_t i = 0; i < dim; ++i) values[i] = read_le_float(raw.data() + 4 * i);
    tally(report, builder.add(std::move(token), values));
  }
  while (reader.peek() == '\n') reader.get();
  if (reader.peek() >= 0) {
    throw FormatError(at_offset("dimension mismatch: trailing bytes after " + std::to_string(count) + " entries",
                                reader.offset()));
  }
  std::string digest = reader.finish_digest();
  return {std::move(builder).build(std::move(digest)), report};
}

LoadedEmbeddings load_text(ByteReader& reader, const std::unordered_set<std::string>* filter) {
  EmbeddingLoadReport report;
  std::optional<EmbeddingSpaceBuilder> builder;
  std::size_t dim = 0;
  std::string line;
  std::vector<float> values;
  bool first = true;

  while (true) {
    const std::uint64_t line_offset = reader.offset();
    if (!reader.getline(line)) break;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      std::size_t count = 0;
      std::size_t hdim = 0;
      if (fields.size() == 2 && parse_size(fields[0], count) && parse_size(fields[1], hdim)) {
        if (hdim == 0) throw FormatError("malformed header: zero dimension");
        dim = hdim;
        report.declared = count;
        continue;
      }
    }
    if (dim == 0) {
      if (fields.size() < 2) throw FormatError(at_offset("entry without components", line_offset));
      dim = fields.size() - 1;
    }
    if (fields.size() != dim + 1) {
      throw FormatError(at_offset("dimension mismatch: '" + std::string(fields[0]) + "' has " +
                                      std::to_string(fields.size() - 1) + " components, expected " +
                                      std::to_string(dim),
                                  line_offset));
    }
    if (!builder) builder.emplace(dim);
    std::string token(fields[0]);
    if (filter && !filter->contains(token)) {
      ++report.filtered_out;
      continue;
    }
    values.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto f = fields[i + 1];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), values[i]);
      if (ec != std::errc() || p != f.data() + f.size()) {
        throw FormatError(at_offset("non-numeric component '" + std::string(f) + "' for '" + token + "'",
                                    line_offset));
      }
    }
    tally(report, builder->add(std::move(token), values));
  }
  if (!builder) {
    if (dim == 0) throw FormatError("malformed header: no entries and no header");
    builder.emplace(dim);
  }
  std::string digest = reader.finish_digest();
  return {std::move(*builder).build(std::move(digest)), report};
}

}  // namespace

LoadedEmbeddings load_embeddings(std::istream& in, EmbeddingFormat format,
                                 const std::unordered_set<std::string>* vocab_filter) {
  if (!in) throw IoError("embedding stream is not readable");
  ByteReader reader(in);
  return format == EmbeddingFormat::binary ? load_binary(reader, vocab_filter) : load_text(reader, vocab_filter);
}

void save_embeddings(const EmbeddingSpace& space, std::ostream& out, EmbeddingFormat format) {
  const std::size_t dim = space.dimension();
  if (format == EmbeddingFormat::binary) {
    out << space.size() << ' ' << dim << '\n';
    for (std::size_t i = 0; i < space.size(); ++i) {
      out << space.word(i) << ' ';
      for (float v : space.vector(i)) write_le_float(out, v);
      out << '\n';
    }
  } else {
    out << space.size() << ' ' << dim << '\n';
    std::array<char, 32> buf;
    for (std::size_t i = 0; i < space.size(); ++i) {
      out << space.word(i);
      for (float v : space.vector(i)) {
        auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
        out << ' ' << std::string_view(buf.data(), static_cast<std::size_t>(p - buf.data()));
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing embeddings");
}

VectorSum vector_sum(std::span<const std::span<const float>> vectors) {
  if (vectors.empty()) throw ArgumentError("vector_sum: empty list");
  const std::size_t dim = vectors.front().size();
  VectorSum sum;
  sum.values.assign(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != dim) throw ArgumentError("vector_sum: dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i) sum.values[i] += static_cast<double>(v[i]);
  }
  sum.zero_norm = std::all_of(sum.values.begin(), sum.values.end(), [](double x) { return x == 0.0; });
  return sum;
}

}  // namespace qdiff
