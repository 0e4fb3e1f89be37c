#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qdiff {

std::string ascii_lower(std::string_view s);
std::string_view trim(std::string_view s);
// First byte upper-cased, remaining ASCII letters lower-cased.
std::string capitalized(std::string_view s);
bool icontains(std::string_view haystack, std::string_view needle);

// Splits one RFC 4180 record (quoted fields, doubled quotes). Embedded
// newlines are not supported; the caller passes a single line.
std::vector<std::string> split_delimited(std::string_view line, char delimiter);

// Removes <...> markup.
std::string strip_tags(std::string_view s);

}  // namespace qdiff
