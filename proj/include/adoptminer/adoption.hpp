#pragma once

// Adoption detection, post-adoption activity and growth series, and the
// corpus-level distributions built on them.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adoptminer/event_store.hpp"
#include "adoptminer/imports.hpp"

namespace adoptminer {

inline constexpr std::size_t kDefaultHorizon = 100;

struct AdoptionEvent {
  std::string repo_id;
  std::string library;
  std::uint64_t ordinal = 0;
  std::string adopter;
  /// LOC referencing the library added by the adopting commit (S_0).
  std::int64_t initial_loc = 0;

  friend bool operator==(const AdoptionEvent&, const AdoptionEvent&) = default;
};

/// First sighting of each library in one repository's ordinal-ordered events.
/// A library whose first event adds nothing is never adopted. Ordered by
/// (ordinal, library).
std::vector<AdoptionEvent> detect_adoptions(std::span<const LibraryEvent> repo_events);

enum class IndexMode {
  AllCommits,      // x counts every repository commit after the adoption
  LibraryCommits,  // x counts only commits that touch the library
};

struct ActivityPoint {
  std::int64_t added = 0;
  std::int64_t deleted = 0;
  std::int64_t net = 0;

  friend bool operator==(const ActivityPoint&, const ActivityPoint&) = default;
};

struct ActivitySeries {
  AdoptionEvent adoption;
  std::vector<ActivityPoint> points;  // x = 0 is the adopting commit
  /// True when the history ended before the horizon.
  bool history_ended = false;
};

/// `library_events` are the repo's events for the adopted library, in
/// ordinal order; `commit_count` is the repo's total number of commits.
ActivitySeries activity_series(const AdoptionEvent& adoption, std::span<const LibraryEvent> library_events,
                               std::uint64_t commit_count, std::size_t horizon = kDefaultHorizon,
                               IndexMode mode = IndexMode::AllCommits);

enum class Termination { HorizonReached, UsageExtinguished, HistoryEnded };

std::string_view to_string(Termination t);

struct GrowthSeries {
  AdoptionEvent adoption;
  std::vector<double> values;  // y_0 = 1
  Termination termination = Termination::HistoryEnded;
};

/// Growth from a net-LOC sequence whose first element is S_0. Each step
/// rescales the previous value by the ratio of new to old running total; the
/// series stops before a running total would reach zero or below.
/// Throws InvalidAdoptionError when S_0 <= 0.
GrowthSeries growth_from_net(std::span<const std::int64_t> net, std::size_t horizon = kDefaultHorizon,
                             bool history_ended = true);

GrowthSeries growth_series(const ActivitySeries& activity, std::size_t horizon = kDefaultHorizon);

GrowthSeries growth_series(const AdoptionEvent& adoption, std::span<const LibraryEvent> library_events,
                           std::uint64_t commit_count, std::size_t horizon = kDefaultHorizon,
                           IndexMode mode = IndexMode::AllCommits);

/// Nearest-rank percentile (p in 1..100) of an ascending sample.
double nearest_rank(std::span<const double> sorted, int percent);

struct QuartilePoint {
  std::size_t x = 0;
  std::size_t alive = 0;
  /// Series of the group extinguished at or before x.
  std::size_t extinguished = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
};

struct GroupCurve {
  std::string group;
  std::size_t series = 0;
  std::vector<QuartilePoint> points;

  bool empty() const { return series == 0; }
};

std::string team_bucket(std::size_t team_size);
std::string so_bucket(std::uint64_t post_count);
const std::vector<std::string>& team_buckets();
const std::vector<std::string>& so_buckets();

/// Quartile curves per group over series still alive at each x. Groups are
/// emitted in `groups` order, including empty ones.
std::vector<GroupCurve> aggregate_growth(std::span<const GrowthSeries> series,
                                         const std::vector<std::string>& groups,
                                         const std::function<std::string(const GrowthSeries&)>& group_of);

struct TeamProfile {
  std::string repo_id;
  std::size_t team_size = 0;
};

TeamProfile team_profile(std::string_view repo_id, std::span<const CommitIndexEntry> commits);

struct Histogram {
  std::map<std::int64_t, std::size_t> counts;
  std::size_t total = 0;

  void add(std::int64_t value);
  /// Fraction of observations >= v.
  double ccdf(std::int64_t v) const;
  /// Nearest-rank median; 0 when empty.
  std::int64_t median() const;
};

struct CommitIndexAdoptions {
  std::size_t commit_index = 0;
  std::size_t repos = 0;  // repos having a commit at this index
  std::size_t adoptions = 0;
  double mean = 0;
  double median = 0;
};

struct AdoptionStats {
  std::size_t adoptions = 0;
  double mean_initial_loc = 0;
  double median_initial_loc = 0;
  std::size_t post_adoption_commits = 0;
  double mean_inserted_after = 0;
  double mean_deleted_after = 0;
};

/// Everything the corpus distributions need about one repository.
struct RepoSummary {
  std::string repo_id;
  std::uint64_t commit_count = 0;
  std::size_t team_size = 0;
  std::vector<AdoptionEvent> adoptions;
  /// Events touching an adopted library strictly after its adoption and
  /// within the horizon (feeds the post-adoption LOC statistics).
  std::vector<ActivityPoint> post_adoption;
};

struct DistributionSummary {
  std::size_t repos = 0;
  std::uint64_t commits = 0;
  std::size_t adoptions = 0;
  Histogram commits_per_repo;
  Histogram adoptions_per_repo;
  Histogram team_size;
  std::vector<CommitIndexAdoptions> per_commit;  // x = 0..horizon
  AdoptionStats stats;
};

DistributionSummary corpus_distributions(std::span<const RepoSummary> repos, std::size_t horizon = kDefaultHorizon);

/// Loads one repository from the store and builds its summary.
RepoSummary summarize_repo(const EventStore& store, std::string_view repo_id, std::size_t horizon = kDefaultHorizon);

DistributionSummary corpus_distributions(const EventStore& store, std::size_t horizon = kDefaultHorizon);

}  // namespace adoptminer
