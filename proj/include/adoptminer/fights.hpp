#pragma once

// Two-person code fights over a newly adopted library.
//
// Rounds are maximal runs of library-touching commits by one author. The
// first author after the adopter is the rival; a fight is triggered by the
// first rival round that cuts the running LOC total below the threshold, and
// lasts until a third author touches the library or history ends.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adoptminer/adoption.hpp"

namespace adoptminer {

/// Threshold expressed exactly in basis points (0.10 == 1000).
class Epsilon {
 public:
  constexpr Epsilon() = default;
  static Epsilon from_basis_points(int bp);
  /// Parses a decimal such as "0.1" or "0.25"; at most four fractional digits.
  static Epsilon parse(std::string_view text);

  int basis_points() const { return bp_; }
  double value() const { return bp_ / 10000.0; }
  /// Two-decimal rendering used in reports ("0.10").
  std::string label() const;

  friend auto operator<=>(const Epsilon&, const Epsilon&) = default;

 private:
  constexpr explicit Epsilon(int bp) : bp_(bp) {}
  int bp_ = 1000;
};

std::vector<Epsilon> default_epsilons();
std::vector<Epsilon> parse_epsilon_list(std::string_view csv);

enum class Comparator {
  /// Fight when the rival leaves at most eps of the previous total.
  RemovalAtLeastOneMinusEps,
  /// Fight when the rival removes at least eps of the previous total.
  ReductionAtLeastEps,
};

std::string_view to_string(Comparator c);
Comparator parse_comparator(std::string_view text);

struct FightConfig {
  Epsilon epsilon;
  Comparator comparator = Comparator::RemovalAtLeastOneMinusEps;
};

/// Threshold test for a round taking the running total from `previous` to
/// `current`. Requires previous > 0.
bool crosses_threshold(std::int64_t previous, std::int64_t current, const FightConfig& config);

struct Round {
  std::size_t index = 0;
  std::string author;
  std::vector<std::uint64_t> ordinals;
  std::int64_t net = 0;
  std::int64_t running = 0;

  friend bool operator==(const Round&, const Round&) = default;
};

/// Collapses the library's nonzero-net commits from the adoption onward into
/// rounds. The adopting commit contributes S_0.
std::vector<Round> build_rounds(const AdoptionEvent& adoption, std::span<const LibraryEvent> library_events);

struct Fight {
  AdoptionEvent adoption;
  std::string adopter;
  std::string deleter;
  FightConfig config;
  std::vector<Round> rounds;
  std::string winner;
  std::size_t trigger_round = 0;
};

std::optional<Fight> detect_fight(const AdoptionEvent& adoption, std::span<const Round> rounds,
                                  const FightConfig& config);

struct ExperienceRecord {
  std::string author;
  std::int64_t first_commit_ts = 0;
};

/// Corpus-wide first commit time per author, sorted by author.
std::vector<ExperienceRecord> experience_table(std::span<const CommitIndexEntry> commits);
std::vector<ExperienceRecord> experience_table(const EventStore& store);

/// Per-repository facts the fight report normalizes by.
struct RepoFacts {
  std::string repo_id;
  std::uint64_t commit_count = 0;
  std::size_t team_size = 0;
};

struct TeamFightRow {
  std::string bucket;
  Epsilon epsilon;
  std::size_t fights = 0;
  std::uint64_t commits = 0;
  double probability = 0;
};

struct ExperienceGapRow {
  Epsilon epsilon;
  std::size_t group = 0;
  std::int64_t gap_min = 0;
  std::int64_t gap_max = 0;
  std::size_t fights = 0;
  /// Fights whose participants have different first-commit times.
  std::size_t decided = 0;
  std::size_t experienced_wins = 0;
  std::optional<double> fraction;
};

struct LibraryFightRow {
  Epsilon epsilon;
  std::string library;
  std::size_t fights = 0;
  std::size_t adoptions = 0;
  double per_1000_adoptions = 0;
};

struct RoundLocRow {
  Epsilon epsilon;
  std::size_t round = 0;  // 1-based; odd rounds belong to the adopter
  std::string role;
  std::size_t fights = 0;
  double mean_net = 0;
};

struct FightSummaryRow {
  Epsilon epsilon;
  std::size_t adoptions = 0;
  std::size_t fights = 0;
  std::size_t fight_back = 0;
  std::size_t deleter_wins = 0;
};

struct FightReport {
  std::vector<TeamFightRow> by_team;
  std::vector<ExperienceGapRow> by_experience_gap;
  std::vector<LibraryFightRow> by_library;
  std::vector<RoundLocRow> round_loc;
  std::vector<FightSummaryRow> summary;
};

inline constexpr std::size_t kExperienceGroups = 5;

/// Aggregates fights detected for each epsilon. Throws
/// MissingParticipantError when a fighter has no experience record.
FightReport fight_stats(const std::map<Epsilon, std::vector<Fight>>& fights,
                        std::span<const AdoptionEvent> adoptions, std::span<const RepoFacts> repos,
                        std::span<const ExperienceRecord> experience);

}  // namespace adoptminer
