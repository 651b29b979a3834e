#pragma once

// Seeded synthetic corpora in Raw Log Format with a complete ground-truth
// manifest. Every generated source line carries the set of libraries it
// references by construction, so the manifest never depends on the miner.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adoptminer/fights.hpp"

namespace adoptminer {

struct FightPlant {
  Epsilon epsilon;
  /// Net LOC per round; even rounds belong to the adopter, odd ones to the rival.
  std::vector<std::int64_t> rounds;
};

struct CorpusSpec {
  std::uint64_t seed = 1;
  std::size_t repo_count = 10;

  // Commits per repo: P(c) ~ (c + commit_shift)^-commit_alpha on [min_commits, max_commits].
  std::size_t min_commits = 1;
  std::size_t max_commits = 600;
  double commit_alpha = 1.5;
  double commit_shift = 25;

  // Roster size: P(k) ~ k^-team_alpha on [min_team, max_team].
  std::size_t min_team = 1;
  std::size_t max_team = 14;
  double team_alpha = 1.6;

  /// Distinct authors shared across repositories; 0 picks 3 per repo.
  std::size_t author_pool = 0;
  /// Library names to draw from; empty selects the built-in pool.
  std::vector<std::string> libraries;

  std::vector<FightPlant> fight_plants;
  /// Probability that a repository with at least two authors hosts a plant.
  double plant_rate = 0.25;

  double branch_rate = 0.04;
  double merge_rate = 0.25;
  double revert_rate = 0.03;
  double skew_rate = 0.03;
  double tie_rate = 0.03;

  /// Thresholds the manifest lists fights for.
  std::vector<Epsilon> epsilons = default_epsilons();
  std::int64_t start_ts = 1'400'000'000;

  /// Throws SpecError for infeasible settings (e.g. a plant with S_0 <= 0).
  void validate() const;
  nlohmann::json to_json() const;
  static CorpusSpec from_json(const nlohmann::json& j);
};

struct TruthLibraryDelta {
  std::int64_t added = 0;
  std::int64_t deleted = 0;
  bool import_added = false;
  bool import_removed = false;

  friend bool operator==(const TruthLibraryDelta&, const TruthLibraryDelta&) = default;
};

struct TruthCommit {
  std::string hash;
  std::vector<std::string> parents;
  std::uint64_t ordinal = 0;
  std::string author;  // canonical key
  std::int64_t ts = 0;
  bool merge = false;
  std::map<std::string, TruthLibraryDelta> libraries;
};

struct TruthAdoption {
  std::string library;
  std::uint64_t ordinal = 0;
  std::string adopter;
  std::int64_t initial_loc = 0;
};

struct TruthFight {
  Epsilon epsilon;
  std::string library;
  std::string adopter;
  std::string deleter;
  std::string winner;
  std::uint64_t trigger_ordinal = 0;
  std::size_t rounds = 0;
};

struct TruthPlant {
  std::string library;
  std::string adopter;
  std::string rival;
  Epsilon epsilon;
  std::vector<std::int64_t> rounds;
  std::uint64_t first_ordinal = 0;
};

struct TruthRepo {
  std::string repo_id;
  std::string log_file;
  std::vector<TruthCommit> commits;  // in ordinal order
  std::vector<std::string> team;     // sorted canonical keys
  std::vector<TruthAdoption> adoptions;
  std::vector<TruthFight> fights;
  std::vector<TruthPlant> plants;
  /// Library-referencing line count per library after each commit, recounted
  /// from full-file snapshots.
  std::vector<std::map<std::string, std::int64_t>> snapshot_loc;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<TruthRepo> repos;
  std::map<std::string, std::int64_t> first_commit_ts;
  std::map<std::int64_t, std::size_t> commits_per_repo;
  std::map<std::int64_t, std::size_t> adoptions_per_repo;
  std::map<std::int64_t, std::size_t> team_size;
  /// Adoption count at each commit index, over all repositories.
  std::map<std::uint64_t, std::size_t> adoptions_at_index;

  std::size_t total_commits() const;
  std::size_t total_adoptions() const;

  nlohmann::json to_json() const;
  static GroundTruth from_json(const nlohmann::json& j);
};

struct RepoLog {
  std::string repo_id;
  std::string text;
};

struct SyntheticCorpus {
  std::vector<RepoLog> logs;
  GroundTruth truth;
};

SyntheticCorpus generate_corpus(const CorpusSpec& spec);

/// Writes repos/<id>.log, manifest.jsonl, truth.json and spec.json under `dir`.
void write_corpus(const SyntheticCorpus& corpus, const CorpusSpec& spec, const std::filesystem::path& dir);

/// Fight list the manifest records for one repository, derived commit by
/// commit from the truth deltas (independent of round construction).
std::vector<TruthFight> derive_truth_fights(const TruthRepo& repo, const std::vector<TruthAdoption>& adoptions,
                                            Epsilon epsilon);

const std::vector<std::string>& builtin_library_pool();

}  // namespace adoptminer
