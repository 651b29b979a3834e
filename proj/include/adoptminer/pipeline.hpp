#pragma once

// End-to-end orchestration: corpus ingest into an event store, and the
// analysis passes that turn a store into CSV artifacts.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adoptminer/adoption.hpp"
#include "adoptminer/event_store.hpp"
#include "adoptminer/fights.hpp"
#include "adoptminer/history.hpp"
#include "adoptminer/imports.hpp"
#include "adoptminer/stackoverflow.hpp"

namespace adoptminer {

struct RunConfig {
  std::filesystem::path manifest;  // corpus manifest (JSON Lines)
  std::filesystem::path store;
  std::filesystem::path out;
  std::filesystem::path so_posts;
  std::filesystem::path standard_libs;
  std::filesystem::path pypi_names;
  std::filesystem::path so_counts;  // previously written so_counts.csv
  std::vector<Epsilon> epsilons = default_epsilons();
  std::size_t horizon = kDefaultHorizon;
  Comparator comparator = Comparator::RemovalAtLeastOneMinusEps;
  IndexMode index_mode = IndexMode::AllCommits;
  bool include_merge_diffs = false;
  bool count_import_lines = true;
  std::size_t workers = 1;
  std::size_t shard_cap = kDefaultShardCap;

  MineOptions mine_options() const;
  nlohmann::json to_json() const;
};

std::size_t default_workers();

struct ManifestEntry {
  std::string repo_id;
  std::filesystem::path path;  // resolved against the manifest's directory
};

std::vector<ManifestEntry> read_corpus_manifest(const std::filesystem::path& manifest);

struct RepoIngest {
  std::string repo_id;
  std::vector<CommitIndexEntry> commits;
  std::vector<LibraryEvent> events;
  std::vector<ParseWarning> warnings;
};

/// parse + linearize + mine for one repository's Raw Log Format text.
RepoIngest ingest_log(std::string_view repo_id, std::string_view text, const MineOptions& options);

struct IngestSummary {
  std::size_t repos = 0;
  std::size_t commits = 0;
  std::size_t events = 0;
  std::size_t warnings = 0;
};

/// Mines every manifest repository on `config.workers` threads and appends
/// them to the store (created if absent) in manifest order.
IngestSummary ingest_corpus(const RunConfig& config, std::ostream* log = nullptr);

struct RepoData {
  std::string repo_id;
  std::vector<CommitIndexEntry> commits;
  std::vector<LibraryEvent> events;
  std::vector<AdoptionEvent> adoptions;
  std::size_t team_size = 0;
};

struct CorpusView {
  std::vector<RepoData> repos;
};

CorpusView load_corpus(const EventStore& store);

/// Output file name -> content.
using Artifacts = std::map<std::string, std::string>;

Artifacts adoption_artifacts(const CorpusView& corpus, const RunConfig& config);
Artifacts growth_artifacts(const CorpusView& corpus, const RunConfig& config,
                           const std::optional<std::vector<SoLibraryCount>>& so_counts);
Artifacts fight_artifacts(const CorpusView& corpus, const RunConfig& config);
/// so_counts.csv and so_correlation.csv; `corpus` supplies GitHub user counts.
Artifacts so_artifacts(const std::optional<std::vector<SoLibraryCount>>& so_counts, const CorpusView* corpus);
std::string summary_text(const CorpusView& corpus, const RunConfig& config);

/// SO counts from config.so_counts, else from config.so_posts, else none.
std::optional<std::vector<SoLibraryCount>> load_so_counts(const RunConfig& config, DumpStats* stats = nullptr);

/// Distinct authors with at least one event per library.
std::map<std::string, std::uint64_t> github_users(const CorpusView& corpus);

void write_artifacts(const Artifacts& files, const std::filesystem::path& dir);

}  // namespace adoptminer
