#pragma once

// Sharded JSON Lines store of mined library events and commit indexes.
//
//   <dir>/store.json        manifest: shards, per-repo shard assignment and byte ranges
//   <dir>/events-<k>.jsonl  one LibraryEvent per line
//   <dir>/commits-<k>.jsonl one CommitIndexEntry per line

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adoptminer/imports.hpp"

namespace adoptminer {

inline constexpr int kStoreFormatVersion = 1;
inline constexpr std::size_t kDefaultShardCap = 5'000'000;

struct CommitIndexEntry {
  std::string repo_id;
  std::uint64_t ordinal = 0;
  std::string hash;
  std::string author;
  std::int64_t author_ts = 0;
  bool is_merge = false;

  friend bool operator==(const CommitIndexEntry&, const CommitIndexEntry&) = default;
};

std::vector<CommitIndexEntry> commit_index(std::span<const CommitRecord> linearized);

struct EventShard {
  std::uint32_t shard_id = 0;
  std::vector<LibraryEvent> events;
  std::vector<CommitIndexEntry> commits;
};

std::string serialize_event(const LibraryEvent& e);
LibraryEvent parse_event(std::string_view json_line);
std::string serialize_commit(const CommitIndexEntry& c);
CommitIndexEntry parse_commit(std::string_view json_line);

std::string serialize_events(std::span<const LibraryEvent> events);
std::vector<LibraryEvent> parse_events(std::string_view jsonl);
std::string serialize_commits(std::span<const CommitIndexEntry> commits);
std::vector<CommitIndexEntry> parse_commits(std::string_view jsonl);

struct ScanFilter {
  std::optional<std::string> repo;
  std::optional<std::string> library;

  static ScanFilter all() { return {}; }
  static ScanFilter by_repo(std::string r) { return {std::move(r), std::nullopt}; }
  static ScanFilter by_library(std::string l) { return {std::nullopt, std::move(l)}; }
};

struct Quarantine {
  std::uint32_t shard_id = 0;
  std::string file;
  /// Byte offset where the committed prefix ends.
  std::uint64_t offset = 0;
  std::string reason;
};

class EventStore {
 public:
  struct RepoEntry {
    std::string repo_id;
    std::uint32_t shard = 0;
    std::uint64_t event_offset = 0;
    std::uint64_t event_bytes = 0;
    std::uint64_t event_count = 0;
    std::uint64_t commit_offset = 0;
    std::uint64_t commit_bytes = 0;
    std::uint64_t commit_count = 0;
  };
  struct ShardEntry {
    std::uint32_t id = 0;
    std::uint64_t event_records = 0;
    std::uint64_t event_bytes = 0;
    std::uint64_t commit_records = 0;
    std::uint64_t commit_bytes = 0;
    bool quarantined = false;
  };

  /// Creates an empty store; fails if one already exists at `dir`.
  static EventStore create(const std::filesystem::path& dir, std::size_t shard_cap = kDefaultShardCap);
  /// Opens an existing store, quarantining shards whose files disagree with
  /// the manifest. Throws FormatVersionError on a version mismatch.
  static EventStore open(const std::filesystem::path& dir);
  static bool exists(const std::filesystem::path& dir);

  /// Durably appends one repository. Without an explicit shard the current
  /// shard is used until it would exceed the record cap. Throws
  /// DuplicateRepoError.
  void append_repo(std::string_view repo_id, std::span<const LibraryEvent> events,
                   std::span<const CommitIndexEntry> commits,
                   std::optional<std::uint32_t> shard = std::nullopt);

  /// Calls `fn` for matching events: repos in manifest order, ordinals ascending.
  void for_each_event(const ScanFilter& filter, const std::function<void(const LibraryEvent&)>& fn) const;
  std::vector<LibraryEvent> scan(const ScanFilter& filter = {}) const;
  std::vector<LibraryEvent> events_of(std::string_view repo_id) const;
  std::vector<CommitIndexEntry> commits_of(std::string_view repo_id) const;

  EventShard read_shard(std::uint32_t shard_id) const;

  const std::vector<RepoEntry>& repos() const { return repos_; }
  const std::vector<ShardEntry>& shards() const { return shards_; }
  const std::vector<Quarantine>& quarantined() const { return quarantined_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::size_t shard_cap() const { return shard_cap_; }

  std::filesystem::path events_file(std::uint32_t shard) const;
  std::filesystem::path commits_file(std::uint32_t shard) const;

 private:
  EventStore() = default;
  void save_manifest() const;
  const RepoEntry& entry(std::string_view repo_id) const;
  std::string read_range(const std::filesystem::path& file, std::uint32_t shard, std::uint64_t offset,
                         std::uint64_t bytes) const;

  std::filesystem::path dir_;
  std::size_t shard_cap_ = kDefaultShardCap;
  std::vector<ShardEntry> shards_;
  std::vector<RepoEntry> repos_;
  std::vector<Quarantine> quarantined_;
};

}  // namespace adoptminer
