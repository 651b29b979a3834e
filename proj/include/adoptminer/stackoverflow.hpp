#pragma once

// Stack Overflow posts-dump ingestion and library popularity correlation.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace adoptminer {

struct SoPost {
  std::int64_t id = 0;
  std::vector<std::string> code_blocks;
};

struct DumpStats {
  std::size_t rows = 0;
  std::size_t yielded = 0;
  std::size_t filtered = 0;
  std::size_t malformed = 0;
};

/// Decodes XML/HTML character references (&lt; &#10; &#x3C; ...). Unknown
/// named entities are kept verbatim.
std::string unescape_entities(std::string_view s);

/// Streams Python-tagged questions (PostTypeId 1) from a posts dump. Code
/// blocks are the unescaped `<code>` contents of each Body. Malformed rows are
/// counted and skipped.
void parse_posts_dump(std::istream& in, const std::function<void(SoPost&&)>& sink, DumpStats* stats = nullptr);
std::vector<SoPost> parse_posts_dump(std::istream& in, DumpStats* stats = nullptr);

/// Tags such as "<python><pandas>" or "|python|pandas|".
std::vector<std::string> parse_tags(std::string_view tags);
bool is_python_tag(std::string_view tag);

enum class LibraryClass { Standard, PyPi, Other };
std::string_view to_string(LibraryClass c);

struct LibraryLists {
  std::set<std::string, std::less<>> standard;
  std::set<std::string, std::less<>> pypi;

  /// Newline-delimited name files; blank lines and '#' comments are ignored.
  static LibraryLists load(const std::filesystem::path& standard_file, const std::filesystem::path& pypi_file);
  /// Standard-library membership wins over PyPi.
  LibraryClass classify(std::string_view library) const;
};

struct SoLibraryCount {
  std::string library;
  std::uint64_t post_count = 0;
  LibraryClass library_class = LibraryClass::Other;

  friend bool operator==(const SoLibraryCount&, const SoLibraryCount&) = default;
};

/// Distinct posts importing each top-level library, ordered by count
/// descending then name.
std::vector<SoLibraryCount> count_libraries(std::span<const SoPost> posts, const LibraryLists& lists);

struct Regression {
  std::string label;
  std::size_t points = 0;
  bool skipped = false;
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  double p_value = 1;
};

inline constexpr std::size_t kMinRegressionPoints = 3;

/// Ordinary least squares of y on x with a two-sided t-test on the slope.
Regression least_squares(std::span<const double> x, std::span<const double> y);

/// Per-class fit of log10(GitHub users) on log10(Stack Overflow posts) over
/// libraries present in both inputs with positive counts.
std::vector<Regression> correlate_usage(std::span<const SoLibraryCount> so_counts,
                                        const std::map<std::string, std::uint64_t>& gh_users);

std::vector<SoLibraryCount> read_so_counts_csv(const std::filesystem::path& path);

}  // namespace adoptminer
