#pragma once

// Library mining over Python diff lines: import extraction, per-file alias
// scoping, and direct-use detection.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adoptminer/history.hpp"

namespace adoptminer {

enum class BindingKind { ModuleAlias, ImportedSymbol };

struct BoundName {
  std::string token;
  BindingKind kind = BindingKind::ModuleAlias;

  friend bool operator==(const BoundName&, const BoundName&) = default;
};

/// Token bound by `from L import *`; it never resolves in lookups.
inline constexpr std::string_view kStarToken = "*";

struct ImportStatement {
  std::string raw_module_path;
  std::string top_level;
  std::vector<BoundName> bound_names;

  friend bool operator==(const ImportStatement&, const ImportStatement&) = default;
};

/// Every module imported by one physical line (`import a, b as c` yields two).
/// Empty for non-import lines and relative imports.
std::vector<ImportStatement> extract_imports(std::string_view line);

/// First statement of extract_imports, if any.
std::optional<ImportStatement> extract_import(std::string_view line);

/// Alias bindings of one source file. A (token, library) binding is active
/// while at least one import line providing it is present.
class FileAliases {
 public:
  struct Interval {
    std::uint64_t activated = 0;
    std::optional<std::uint64_t> deactivated;
  };

  void bind(std::string_view token, BindingKind kind, std::string_view library, std::uint64_t ordinal);
  void unbind(std::string_view token, std::string_view library, std::uint64_t ordinal);

  /// Library the token currently denotes; the latest activation wins.
  const std::string* resolve(std::string_view token) const;
  /// Library the token denoted at `ordinal` (bindings removed at `ordinal` are gone).
  std::optional<std::string> resolve_at(std::string_view token, std::uint64_t ordinal) const;
  bool library_active(std::string_view library) const;
  std::optional<BindingKind> kind_of(std::string_view token) const;

 private:
  struct Binding {
    std::string library;
    BindingKind kind = BindingKind::ModuleAlias;
    int live = 0;
    std::uint64_t order = 0;
    std::vector<Interval> history;
  };
  const Binding* active(std::string_view token) const;

  std::map<std::string, std::vector<Binding>, std::less<>> by_token_;
  std::map<std::string, int, std::less<>> live_per_library_;
  std::uint64_t activations_ = 0;
};

/// Per-repository alias scopes keyed by file path, plus the ordinal cursor
/// that enforces in-order mining.
class AliasTable {
 public:
  FileAliases& file(std::string_view path);
  const FileAliases* find(std::string_view path) const;

  std::optional<std::uint64_t> last_ordinal() const { return last_ordinal_; }
  void advance(std::uint64_t ordinal);

 private:
  std::map<std::string, FileAliases, std::less<>> files_;
  std::optional<std::uint64_t> last_ordinal_;
};

/// Top-level libraries a non-import line uses directly: an active bound token
/// (or an imported library's own name) immediately followed by `.` or `(`,
/// outside string literals and comments. Sorted, unique.
std::vector<std::string> classify_line(std::string_view line, const FileAliases& aliases);

struct LibraryEvent {
  std::string repo_id;
  std::uint64_t ordinal = 0;
  /// Canonical author key.
  std::string author;
  std::string library;
  std::int64_t added_loc = 0;
  std::int64_t deleted_loc = 0;
  bool import_added = false;
  bool import_removed = false;

  std::int64_t net() const { return added_loc - deleted_loc; }
  friend bool operator==(const LibraryEvent&, const LibraryEvent&) = default;
};

struct MineOptions {
  bool include_merge_diffs = false;
  /// When false, import lines set the import flags but add no LOC.
  bool count_import_lines = true;
};

bool is_python_path(std::string_view path);

/// Mines one linearized commit. Deleted lines are classified against the
/// aliases in force before the commit, added lines against those after it.
/// Events are ordered by library. Throws SequencingError if the commit's
/// ordinal does not follow the previous one mined through `table`.
std::vector<LibraryEvent> mine_commit(const CommitRecord& commit, AliasTable& table,
                                      const MineOptions& options = {});

/// Mines an already linearized repository history.
std::vector<LibraryEvent> mine_repository(const std::vector<CommitRecord>& commits,
                                          const MineOptions& options = {});

}  // namespace adoptminer
