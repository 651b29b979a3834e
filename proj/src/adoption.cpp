#include "adoptminer/adoption.hpp"

#include <algorithm>
#include <set>

#include "adoptminer/errors.hpp"

namespace adoptminer {

std::vector<AdoptionEvent> detect_adoptions(std::span<const LibraryEvent> repo_events) {
  std::set<std::string> seen;
  std::vector<AdoptionEvent> out;
  for (const auto& e : repo_events) {
    if (!seen.insert(e.library).second) continue;
    if (e.added_loc <= 0) continue;
    out.push_back(AdoptionEvent{e.repo_id, e.library, e.ordinal, e.author, e.added_loc});
  }
  std::stable_sort(out.begin(), out.end(), [](const AdoptionEvent& a, const AdoptionEvent& b) {
    return a.ordinal != b.ordinal ? a.ordinal < b.ordinal : a.library < b.library;
  });
  return out;
}

ActivitySeries activity_series(const AdoptionEvent& adoption, std::span<const LibraryEvent> library_events,
                               std::uint64_t commit_count, std::size_t horizon, IndexMode mode) {
  ActivitySeries s;
  s.adoption = adoption;
  const std::uint64_t t = adoption.ordinal;
  if (mode == IndexMode::AllCommits) {
    const std::uint64_t after = commit_count > t ? commit_count - 1 - t : 0;
    const std::size_t last = static_cast<std::size_t>(std::min<std::uint64_t>(after, horizon));
    s.points.assign(last + 1, ActivityPoint{});
    s.history_ended = after < horizon;
    for (const auto& e : library_events) {
      if (e.library != adoption.library || e.ordinal < t || e.ordinal - t > last) continue;
      auto& p = s.points[e.ordinal - t];
      p.added += e.added_loc;
      p.deleted += e.deleted_loc;
      p.net = p.added - p.deleted;
    }
    return s;
  }
  for (const auto& e : library_events) {
    if (e.library != adoption.library || e.ordinal < t) continue;
    if (s.points.size() == horizon + 1) return s;
    s.points.push_back(ActivityPoint{e.added_loc, e.deleted_loc, e.net()});
  }
  s.history_ended = true;
  return s;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::HorizonReached: return "horizon-reached";
    case Termination::UsageExtinguished: return "usage-extinguished";
    case Termination::HistoryEnded: return "history-ended";
  }
  return "unknown";
}

GrowthSeries growth_from_net(std::span<const std::int64_t> net, std::size_t horizon, bool history_ended) {
  if (net.empty() || net.front() <= 0) {
    throw InvalidAdoptionError("adoption must introduce at least one line (S_0 >= 1)");
  }
  GrowthSeries g;
  g.values.push_back(1.0);
  std::int64_t running = net.front();
  const std::size_t steps = std::min(net.size() - 1, horizon);
  for (std::size_t x = 1; x <= steps; ++x) {
    const std::int64_t next = running + net[x];
    if (next <= 0) {
      g.termination = Termination::UsageExtinguished;
      return g;
    }
    g.values.push_back(g.values.back() * static_cast<double>(next) / static_cast<double>(running));
    running = next;
  }
  g.termination = (net.size() - 1 >= horizon || !history_ended) ? Termination::HorizonReached
                                                                 : Termination::HistoryEnded;
  return g;
}

GrowthSeries growth_series(const ActivitySeries& activity, std::size_t horizon) {
  std::vector<std::int64_t> net;
  net.reserve(activity.points.size());
  net.push_back(activity.adoption.initial_loc);
  for (std::size_t x = 1; x < activity.points.size(); ++x) net.push_back(activity.points[x].net);
  auto g = growth_from_net(net, horizon, activity.history_ended);
  g.adoption = activity.adoption;
  return g;
}

GrowthSeries growth_series(const AdoptionEvent& adoption, std::span<const LibraryEvent> library_events,
                           std::uint64_t commit_count, std::size_t horizon, IndexMode mode) {
  if (adoption.initial_loc <= 0) {
    throw InvalidAdoptionError("adoption of " + adoption.library + " in " + adoption.repo_id + " has S_0 <= 0");
  }
  return growth_series(activity_series(adoption, library_events, commit_count, horizon, mode), horizon);
}

double nearest_rank(std::span<const double> sorted, int percent) {
  if (sorted.empty()) return 0;
  const std::size_t n = sorted.size();
  std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

std::string team_bucket(std::size_t team_size) {
  if (team_size <= 1) return "1";
  if (team_size == 2) return "2";
  if (team_size == 3) return "3";
  if (team_size <= 9) return "4-9";
  return "10+";
}

std::string so_bucket(std::uint64_t post_count) {
  if (post_count == 0) return "0";
  if (post_count <= 100) return "1-100";
  if (post_count <= 1000) return "101-1000";
  return ">1000";
}

const std::vector<std::string>& team_buckets() {
  static const std::vector<std::string> buckets{"1", "2", "3", "4-9", "10+"};
  return buckets;
}

const std::vector<std::string>& so_buckets() {
  static const std::vector<std::string> buckets{"0", "1-100", "101-1000", ">1000"};
  return buckets;
}

std::vector<GroupCurve> aggregate_growth(std::span<const GrowthSeries> series,
                                         const std::vector<std::string>& groups,
                                         const std::function<std::string(const GrowthSeries&)>& group_of) {
  std::map<std::string, std::vector<const GrowthSeries*>> members;
  for (const auto& s : series) members[group_of(s)].push_back(&s);

  std::vector<GroupCurve> out;
  for (const auto& name : groups) {
    GroupCurve curve;
    curve.group = name;
    const auto it = members.find(name);
    if (it == members.end()) {
      out.push_back(std::move(curve));
      continue;
    }
    const auto& group = it->second;
    curve.series = group.size();
    std::size_t longest = 0;
    for (const auto* s : group) longest = std::max(longest, s->values.size());
    std::vector<double> column;
    for (std::size_t x = 0; x < longest; ++x) {
      column.clear();
      std::size_t extinguished = 0;
      for (const auto* s : group) {
        if (s->values.size() > x) {
          column.push_back(s->values[x]);
        } else if (s->termination == Termination::UsageExtinguished) {
          ++extinguished;
        }
      }
      std::sort(column.begin(), column.end());
      curve.points.push_back(QuartilePoint{x, column.size(), extinguished, nearest_rank(column, 25),
                                           nearest_rank(column, 50), nearest_rank(column, 75)});
    }
    out.push_back(std::move(curve));
  }
  return out;
}

TeamProfile team_profile(std::string_view repo_id, std::span<const CommitIndexEntry> commits) {
  std::set<std::string> authors;
  for (const auto& c : commits) authors.insert(c.author);
  return TeamProfile{std::string(repo_id), authors.size()};
}

void Histogram::add(std::int64_t value) {
  ++counts[value];
  ++total;
}

double Histogram::ccdf(std::int64_t v) const {
  if (total == 0) return 0;
  std::size_t at_least = 0;
  for (auto it = counts.lower_bound(v); it != counts.end(); ++it) at_least += it->second;
  return static_cast<double>(at_least) / static_cast<double>(total);
}

std::int64_t Histogram::median() const {
  if (total == 0) return 0;
  const std::size_t rank = std::max<std::size_t>(1, (total + 1) / 2);
  std::size_t seen = 0;
  for (const auto& [v, c] : counts) {
    seen += c;
    if (seen >= rank) return v;
  }
  return counts.rbegin()->first;
}

DistributionSummary corpus_distributions(std::span<const RepoSummary> repos, std::size_t horizon) {
  DistributionSummary d;
  d.repos = repos.size();
  std::vector<double> initial;
  std::int64_t inserted = 0, deleted = 0;
  for (const auto& r : repos) {
    d.commits += r.commit_count;
    d.adoptions += r.adoptions.size();
    d.commits_per_repo.add(static_cast<std::int64_t>(r.commit_count));
    d.adoptions_per_repo.add(static_cast<std::int64_t>(r.adoptions.size()));
    d.team_size.add(static_cast<std::int64_t>(r.team_size));
    for (const auto& a : r.adoptions) initial.push_back(static_cast<double>(a.initial_loc));
    for (const auto& p : r.post_adoption) {
      inserted += p.added;
      deleted += p.deleted;
      ++d.stats.post_adoption_commits;
    }
  }

  std::vector<double> at_index;
  for (std::size_t x = 0; x <= horizon; ++x) {
    CommitIndexAdoptions row;
    row.commit_index = x;
    at_index.clear();
    for (const auto& r : repos) {
      if (r.commit_count <= x) continue;
      const auto n = std::count_if(r.adoptions.begin(), r.adoptions.end(),
                                   [&](const AdoptionEvent& a) { return a.ordinal == x; });
      at_index.push_back(static_cast<double>(n));
      row.adoptions += static_cast<std::size_t>(n);
    }
    row.repos = at_index.size();
    if (row.repos > 0) {
      row.mean = static_cast<double>(row.adoptions) / static_cast<double>(row.repos);
      std::sort(at_index.begin(), at_index.end());
      row.median = nearest_rank(at_index, 50);
    }
    d.per_commit.push_back(row);
  }

  d.stats.adoptions = initial.size();
  if (!initial.empty()) {
    double sum = 0;
    for (double v : initial) sum += v;
    d.stats.mean_initial_loc = sum / static_cast<double>(initial.size());
    std::sort(initial.begin(), initial.end());
    d.stats.median_initial_loc = nearest_rank(initial, 50);
  }
  if (d.stats.post_adoption_commits > 0) {
    const auto n = static_cast<double>(d.stats.post_adoption_commits);
    d.stats.mean_inserted_after = static_cast<double>(inserted) / n;
    d.stats.mean_deleted_after = static_cast<double>(deleted) / n;
  }
  return d;
}

RepoSummary summarize_repo(const EventStore& store, std::string_view repo_id, std::size_t horizon) {
  RepoSummary r;
  r.repo_id = std::string(repo_id);
  const auto commits = store.commits_of(repo_id);
  r.commit_count = commits.size();
  r.team_size = team_profile(repo_id, commits).team_size;
  const auto events = store.events_of(repo_id);
  r.adoptions = detect_adoptions(events);
  std::map<std::string, std::uint64_t> adopted_at;
  for (const auto& a : r.adoptions) adopted_at.emplace(a.library, a.ordinal);
  for (const auto& e : events) {
    const auto it = adopted_at.find(e.library);
    if (it == adopted_at.end() || e.ordinal <= it->second || e.ordinal - it->second > horizon) continue;
    r.post_adoption.push_back(ActivityPoint{e.added_loc, e.deleted_loc, e.net()});
  }
  return r;
}

DistributionSummary corpus_distributions(const EventStore& store, std::size_t horizon) {
  std::vector<RepoSummary> repos;
  repos.reserve(store.repos().size());
  for (const auto& r : store.repos()) repos.push_back(summarize_repo(store, r.repo_id, horizon));
  return corpus_distributions(repos, horizon);
}

}  // namespace adoptminer
