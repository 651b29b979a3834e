#include "adoptminer/fights.hpp"

#include <algorithm>
#include <charconv>

#include "adoptminer/errors.hpp"
#include "adoptminer/text.hpp"

namespace adoptminer {

Epsilon Epsilon::from_basis_points(int bp) {
  if (bp <= 0 || bp >= 10000) throw UsageError("epsilon must lie strictly between 0 and 1");
  return Epsilon(bp);
}

Epsilon Epsilon::parse(std::string_view text) {
  const std::string_view s = trim(text);
  const auto dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  const auto digits = [](std::string_view d) {
    return std::all_of(d.begin(), d.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (s.empty() || !digits(whole) || !digits(frac) || frac.size() > 4 || (whole.empty() && frac.empty()) ||
      (!whole.empty() && whole != "0" && whole.find_first_not_of('0') != std::string_view::npos)) {
    throw UsageError("invalid epsilon '" + std::string(text) + "'");
  }
  int bp = 0;
  for (std::size_t k = 0; k < 4; ++k) bp = bp * 10 + (k < frac.size() ? frac[k] - '0' : 0);
  return from_basis_points(bp);
}

std::string Epsilon::label() const {
  std::string out = "0.";
  const int hundredths = bp_ / 100;
  out += static_cast<char>('0' + hundredths / 10);
  out += static_cast<char>('0' + hundredths % 10);
  int rest = bp_ % 100;
  if (rest) {
    out += static_cast<char>('0' + rest / 10);
    if (rest % 10) out += static_cast<char>('0' + rest % 10);
  }
  return out;
}

std::vector<Epsilon> default_epsilons() {
  return {Epsilon::from_basis_points(1000), Epsilon::from_basis_points(2000), Epsilon::from_basis_points(3000),
          Epsilon::from_basis_points(4000), Epsilon::from_basis_points(5000)};
}

std::vector<Epsilon> parse_epsilon_list(std::string_view csv) {
  std::vector<Epsilon> out;
  for (auto part : split(csv, ',')) {
    if (trim(part).empty()) continue;
    out.push_back(Epsilon::parse(part));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw UsageError("empty epsilon list");
  return out;
}

std::string_view to_string(Comparator c) {
  return c == Comparator::RemovalAtLeastOneMinusEps ? "removal" : "reduction";
}

Comparator parse_comparator(std::string_view text) {
  if (text == "removal") return Comparator::RemovalAtLeastOneMinusEps;
  if (text == "reduction") return Comparator::ReductionAtLeastEps;
  throw UsageError("comparator must be 'removal' or 'reduction'");
}

bool crosses_threshold(std::int64_t previous, std::int64_t current, const FightConfig& config) {
  if (previous <= 0) return false;
  const __int128 lhs = static_cast<__int128>(current) * 10000;
  const int bp = config.epsilon.basis_points();
  const int kept = config.comparator == Comparator::RemovalAtLeastOneMinusEps ? bp : 10000 - bp;
  return lhs <= static_cast<__int128>(previous) * kept;
}

std::vector<Round> build_rounds(const AdoptionEvent& adoption, std::span<const LibraryEvent> library_events) {
  std::vector<Round> rounds;
  rounds.push_back(Round{0, adoption.adopter, {adoption.ordinal}, adoption.initial_loc, adoption.initial_loc});
  std::int64_t running = adoption.initial_loc;
  for (const auto& e : library_events) {
    if (e.library != adoption.library || e.ordinal <= adoption.ordinal) continue;
    const std::int64_t net = e.net();
    if (net == 0) continue;
    running += net;
    if (rounds.back().author != e.author) {
      rounds.push_back(Round{rounds.size(), e.author, {}, 0, 0});
    }
    Round& r = rounds.back();
    r.ordinals.push_back(e.ordinal);
    r.net += net;
    r.running = running;
  }
  return rounds;
}

std::optional<Fight> detect_fight(const AdoptionEvent& adoption, std::span<const Round> rounds,
                                  const FightConfig& config) {
  if (rounds.size() < 2) return std::nullopt;
  const std::string& adopter = rounds[0].author;
  const std::string& rival = rounds[1].author;
  std::optional<std::size_t> trigger;
  for (std::size_t r = 1; r < rounds.size(); ++r) {
    const auto& author = rounds[r].author;
    if (author != adopter && author != rival) break;
    if (author == rival && crosses_threshold(rounds[r - 1].running, rounds[r].running, config)) {
      trigger = r;
      break;
    }
  }
  if (!trigger) return std::nullopt;

  std::size_t end = *trigger;
  while (end + 1 < rounds.size() && (rounds[end + 1].author == adopter || rounds[end + 1].author == rival)) ++end;

  Fight f;
  f.adoption = adoption;
  f.adopter = adopter;
  f.deleter = rival;
  f.config = config;
  f.rounds.assign(rounds.begin(), rounds.begin() + static_cast<std::ptrdiff_t>(end + 1));
  f.winner = f.rounds.back().author;
  f.trigger_round = *trigger;
  return f;
}

std::vector<ExperienceRecord> experience_table(std::span<const CommitIndexEntry> commits) {
  std::map<std::string, std::int64_t> first;
  for (const auto& c : commits) {
    const auto [it, inserted] = first.emplace(c.author, c.author_ts);
    if (!inserted) it->second = std::min(it->second, c.author_ts);
  }
  std::vector<ExperienceRecord> out;
  out.reserve(first.size());
  for (const auto& [author, ts] : first) out.push_back(ExperienceRecord{author, ts});
  return out;
}

std::vector<ExperienceRecord> experience_table(const EventStore& store) {
  std::vector<CommitIndexEntry> all;
  for (const auto& r : store.repos()) {
    auto commits = store.commits_of(r.repo_id);
    all.insert(all.end(), std::make_move_iterator(commits.begin()), std::make_move_iterator(commits.end()));
  }
  return experience_table(all);
}

FightReport fight_stats(const std::map<Epsilon, std::vector<Fight>>& fights,
                        std::span<const AdoptionEvent> adoptions, std::span<const RepoFacts> repos,
                        std::span<const ExperienceRecord> experience) {
  std::map<std::string, std::int64_t, std::less<>> first_ts;
  for (const auto& e : experience) first_ts.emplace(e.author, e.first_commit_ts);
  const auto experience_of = [&](const std::string& author) {
    const auto it = first_ts.find(author);
    if (it == first_ts.end()) throw MissingParticipantError(author);
    return it->second;
  };

  std::map<std::string, const RepoFacts*, std::less<>> repo_by_id;
  std::map<std::string, std::uint64_t> commits_by_bucket;
  for (const auto& r : repos) {
    repo_by_id.emplace(r.repo_id, &r);
    commits_by_bucket[team_bucket(r.team_size)] += r.commit_count;
  }
  std::map<std::string, std::size_t> adoptions_by_library;
  for (const auto& a : adoptions) ++adoptions_by_library[a.library];

  FightReport report;
  for (const auto& [eps, list] : fights) {
    // (a) fights per commit by team size
    std::map<std::string, std::size_t> by_bucket;
    for (const auto& f : list) {
      const auto it = repo_by_id.find(f.adoption.repo_id);
      const std::size_t team = it == repo_by_id.end() ? 0 : it->second->team_size;
      ++by_bucket[team_bucket(team)];
    }
    for (const auto& bucket : team_buckets()) {
      TeamFightRow row{bucket, eps, by_bucket[bucket], commits_by_bucket[bucket], 0};
      if (row.commits > 0) row.probability = static_cast<double>(row.fights) / static_cast<double>(row.commits);
      report.by_team.push_back(row);
    }

    // (b) winner experience by gap quintile
    struct Gap {
      std::int64_t gap;
      const Fight* fight;
      std::int64_t u_ts, v_ts;
    };
    std::vector<Gap> gaps;
    for (const auto& f : list) {
      const auto u = experience_of(f.adopter);
      const auto v = experience_of(f.deleter);
      gaps.push_back(Gap{u > v ? u - v : v - u, &f, u, v});
    }
    std::sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) {
      if (a.gap != b.gap) return a.gap < b.gap;
      if (a.fight->adoption.repo_id != b.fight->adoption.repo_id) return a.fight->adoption.repo_id < b.fight->adoption.repo_id;
      return a.fight->adoption.library < b.fight->adoption.library;
    });
    const std::size_t n = gaps.size();
    for (std::size_t g = 0; g < kExperienceGroups; ++g) {
      ExperienceGapRow row;
      row.epsilon = eps;
      row.group = g + 1;
      const std::size_t lo = g * n / kExperienceGroups, hi = (g + 1) * n / kExperienceGroups;
      for (std::size_t k = lo; k < hi; ++k) {
        const auto& item = gaps[k];
        if (k == lo) row.gap_min = item.gap;
        row.gap_max = item.gap;
        ++row.fights;
        if (item.u_ts == item.v_ts) continue;
        ++row.decided;
        const std::string& senior = item.u_ts < item.v_ts ? item.fight->adopter : item.fight->deleter;
        if (item.fight->winner == senior) ++row.experienced_wins;
      }
      if (row.decided > 0) row.fraction = static_cast<double>(row.experienced_wins) / static_cast<double>(row.decided);
      report.by_experience_gap.push_back(row);
    }

    // (c) most-fought libraries
    std::map<std::string, std::size_t> by_library;
    for (const auto& f : list) ++by_library[f.adoption.library];
    std::vector<LibraryFightRow> libs;
    for (const auto& [lib, count] : by_library) {
      const std::size_t adopted = adoptions_by_library[lib];
      libs.push_back(LibraryFightRow{eps, lib, count, adopted,
                                     adopted ? 1000.0 * static_cast<double>(count) / static_cast<double>(adopted) : 0});
    }
    std::sort(libs.begin(), libs.end(), [](const LibraryFightRow& a, const LibraryFightRow& b) {
      if (a.per_1000_adoptions != b.per_1000_adoptions) return a.per_1000_adoptions > b.per_1000_adoptions;
      return a.library < b.library;
    });
    report.by_library.insert(report.by_library.end(), libs.begin(), libs.end());

    // (d) per-round LOC and fight-back
    std::size_t longest = 0;
    for (const auto& f : list) longest = std::max(longest, f.rounds.size());
    for (std::size_t r = 0; r < longest; ++r) {
      RoundLocRow row{eps, r + 1, r % 2 == 0 ? "adopter" : "deleter", 0, 0};
      std::int64_t total = 0;
      for (const auto& f : list) {
        if (f.rounds.size() <= r) continue;
        ++row.fights;
        total += f.rounds[r].net;
      }
      row.mean_net = static_cast<double>(total) / static_cast<double>(row.fights);
      report.round_loc.push_back(row);
    }
    FightSummaryRow summary{eps, adoptions.size(), list.size(), 0, 0};
    for (const auto& f : list) {
      if (f.rounds.size() > f.trigger_round + 1) ++summary.fight_back;
      if (f.winner == f.deleter) ++summary.deleter_wins;
    }
    report.summary.push_back(summary);
  }
  return report;
}

}  // namespace adoptminer
