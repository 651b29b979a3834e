#pragma once

// Raw patch-log ingestion and commit-graph linearization.
//
// The Raw Log Format is what
//
//   git log --all --no-renames -p --format='%x01COMMIT%x01%H%x01%P%x01%an%x01%ae%x01%at%x01'
//
// prints: one sentinel header per commit followed by unified diff text.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adoptminer {

struct AuthorId {
  std::string name;
  std::string email;
  /// Lowercased email, or lowercased name when the email is empty.
  std::string canonical_key;

  static AuthorId make(std::string name, std::string email);

  friend bool operator==(const AuthorId& a, const AuthorId& b) {
    return a.canonical_key == b.canonical_key;
  }
};

struct FileDiff {
  std::string path;
  std::vector<std::string> added_lines;
  std::vector<std::string> deleted_lines;

  friend bool operator==(const FileDiff&, const FileDiff&) = default;
};

struct CommitRecord {
  std::string repo_id;
  std::string hash;
  std::vector<std::string> parent_hashes;
  AuthorId author;
  std::int64_t author_ts = 0;
  bool is_merge = false;
  std::vector<FileDiff> diffs;
  std::optional<std::uint64_t> ordinal;
};

/// Field-wise equality, including the author's display name and email.
bool same_record(const CommitRecord& a, const CommitRecord& b);

struct ParseWarning {
  std::size_t offset = 0;
  std::string commit;
  std::string path;
  std::string message;
};

struct ParsedLog {
  std::vector<CommitRecord> commits;
  std::vector<ParseWarning> warnings;
};

/// Parses a Raw Log Format stream. Binary and combined (merge) diffs are
/// skipped; a malformed hunk drops that file's diff and records a warning.
/// Throws StreamError on a truncated header and DuplicateCommitError when a
/// hash repeats.
ParsedLog parse_git_stream(std::string_view repo_id, std::istream& in);
ParsedLog parse_git_log(std::string_view repo_id, std::string_view text);

/// Emits records in Raw Log Format, one zero-context hunk per file.
void write_git_stream(std::ostream& out, std::span<const CommitRecord> commits);
std::string format_git_log(std::span<const CommitRecord> commits);

std::string format_commit_header(const CommitRecord& commit);

bool is_full_hash(std::string_view s);

/// Topologically orders commits (parents first), breaking ties by
/// (author_ts, hash), and assigns dense ordinals from 0. Parents missing from
/// the input are treated as external roots. Throws CycleError.
std::vector<CommitRecord> linearize(std::vector<CommitRecord> commits);

}  // namespace adoptminer
