#include "adoptminer/pipeline.hpp"

#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "adoptminer/csv.hpp"
#include "adoptminer/errors.hpp"
#include "adoptminer/text.hpp"

namespace adoptminer {

using nlohmann::json;
using nlohmann::ordered_json;

MineOptions RunConfig::mine_options() const {
  MineOptions o;
  o.include_merge_diffs = include_merge_diffs;
  o.count_import_lines = count_import_lines;
  return o;
}

json RunConfig::to_json() const {
  ordered_json j;
  j["manifest"] = manifest.string();
  j["store"] = store.string();
  j["out"] = out.string();
  j["so_posts"] = so_posts.string();
  j["standard_libs"] = standard_libs.string();
  j["pypi_names"] = pypi_names.string();
  j["so_counts"] = so_counts.string();
  std::vector<std::string> eps;
  for (const auto& e : epsilons) eps.push_back(e.label());
  j["epsilons"] = eps;
  j["horizon"] = horizon;
  j["team_buckets"] = team_buckets();
  j["so_buckets"] = so_buckets();
  j["comparator"] = std::string(to_string(comparator));
  j["index_mode"] = index_mode == IndexMode::AllCommits ? "all-commits" : "library-commits";
  j["include_merge_diffs"] = include_merge_diffs;
  j["count_import_lines"] = count_import_lines;
  j["workers"] = workers;
  j["shard_cap"] = shard_cap;
  return json::parse(j.dump());
}

std::size_t default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

std::vector<ManifestEntry> read_corpus_manifest(const std::filesystem::path& manifest) {
  if (!std::filesystem::exists(manifest)) throw UsageError("corpus manifest not found: " + manifest.string());
  const std::string text = read_file(manifest);
  const auto base = manifest.parent_path();
  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.repo_id = j.at("repo_id").get<std::string>();
      const std::filesystem::path p = j.at("path").get<std::string>();
      e.path = p.is_absolute() ? p : base / p;
      if (!seen.insert(e.repo_id).second) throw UsageError("duplicate repo_id in manifest: " + e.repo_id);
      if (!std::filesystem::is_regular_file(e.path)) {
        throw UsageError("log for " + e.repo_id + " not found: " + e.path.string());
      }
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw UsageError("corpus manifest line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

RepoIngest ingest_log(std::string_view repo_id, std::string_view text, const MineOptions& options) {
  ParsedLog parsed = parse_git_log(repo_id, text);
  const auto ordered = linearize(std::move(parsed.commits));
  RepoIngest r;
  r.repo_id = std::string(repo_id);
  r.events = mine_repository(ordered, options);
  r.commits = commit_index(ordered);
  r.warnings = std::move(parsed.warnings);
  return r;
}

IngestSummary ingest_corpus(const RunConfig& config, std::ostream* log) {
  const auto entries = read_corpus_manifest(config.manifest);
  for (const auto& e : entries) {
    if (!std::filesystem::exists(e.path)) throw UsageError("log file not found: " + e.path.string());
  }
  EventStore store = EventStore::exists(config.store) ? EventStore::open(config.store)
                                                      : EventStore::create(config.store, config.shard_cap);
  for (const auto& e : entries) {
    for (const auto& r : store.repos()) {
      if (r.repo_id == e.repo_id) throw DuplicateRepoError(e.repo_id);
    }
  }

  const MineOptions options = config.mine_options();
  std::vector<std::optional<RepoIngest>> results(entries.size());
  std::vector<std::exception_ptr> errors(entries.size());
  std::mutex mu;
  std::condition_variable ready;
  std::size_t next = 0;

  const auto work = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard lock(mu);
        if (next >= entries.size()) return;
        k = next++;
      }
      std::optional<RepoIngest> r;
      std::exception_ptr err;
      try {
        r = ingest_log(entries[k].repo_id, read_file(entries[k].path), options);
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard lock(mu);
        results[k] = std::move(r);
        errors[k] = err;
      }
      ready.notify_all();
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(config.workers, entries.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work);

  IngestSummary summary;
  std::exception_ptr failure;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    std::optional<RepoIngest> r;
    {
      std::unique_lock lock(mu);
      ready.wait(lock, [&] { return results[k].has_value() || errors[k]; });
      if (errors[k]) {
        failure = errors[k];
        // stop handing out work; let running jobs finish
        next = entries.size();
        break;
      }
      r = std::move(results[k]);
      results[k].reset();
    }
    store.append_repo(r->repo_id, r->events, r->commits);
    ++summary.repos;
    summary.commits += r->commits.size();
    summary.events += r->events.size();
    summary.warnings += r->warnings.size();
    if (log) {
      for (const auto& w : r->warnings) {
        *log << "warning: " << r->repo_id << " " << w.commit << " " << w.path << ": " << w.message << "\n";
      }
    }
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  write_file_atomic(config.store / "run_config.json", config.to_json().dump(2) + "\n");
  return summary;
}

CorpusView load_corpus(const EventStore& store) {
  CorpusView c;
  c.repos.reserve(store.repos().size());
  for (const auto& entry : store.repos()) {
    RepoData r;
    r.repo_id = entry.repo_id;
    r.commits = store.commits_of(entry.repo_id);
    r.events = store.events_of(entry.repo_id);
    r.adoptions = detect_adoptions(r.events);
    r.team_size = team_profile(entry.repo_id, r.commits).team_size;
    c.repos.push_back(std::move(r));
  }
  return c;
}

namespace {

std::string fixed(double v) { return format_decimal(v); }

std::string histogram_csv(const Histogram& h) {
  CsvWriter w({"value", "count", "ccdf"});
  for (const auto& [v, n] : h.counts) {
    w.cell(v).cell(static_cast<std::uint64_t>(n)).cell(h.ccdf(v));
    w.end_row();
  }
  return w.str();
}

std::vector<RepoSummary> summaries(const CorpusView& corpus, std::size_t horizon) {
  std::vector<RepoSummary> out;
  for (const auto& r : corpus.repos) {
    RepoSummary s;
    s.repo_id = r.repo_id;
    s.commit_count = r.commits.size();
    s.team_size = r.team_size;
    s.adoptions = r.adoptions;
    std::map<std::string, std::uint64_t> adopted_at;
    for (const auto& a : r.adoptions) adopted_at.emplace(a.library, a.ordinal);
    for (const auto& e : r.events) {
      const auto it = adopted_at.find(e.library);
      if (it == adopted_at.end() || e.ordinal <= it->second || e.ordinal - it->second > horizon) continue;
      s.post_adoption.push_back(ActivityPoint{e.added_loc, e.deleted_loc, e.net()});
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Events of one library in one repo, ordinal order.
std::map<std::string, std::vector<LibraryEvent>> by_library(const std::vector<LibraryEvent>& events) {
  std::map<std::string, std::vector<LibraryEvent>> m;
  for (const auto& e : events) m[e.library].push_back(e);
  return m;
}

std::string growth_csv(const std::vector<GroupCurve>& curves, bool no_data) {
  CsvWriter w({"group", "x", "alive", "extinguished_frac", "q1", "median", "q3", "status"});
  for (const auto& c : curves) {
    if (no_data || c.empty()) {
      w.cell(c.group).empty().empty().empty().empty().empty().empty().cell(no_data ? "no-so-data" : "empty");
      w.end_row();
      continue;
    }
    for (const auto& p : c.points) {
      w.cell(c.group)
          .cell(static_cast<std::uint64_t>(p.x))
          .cell(static_cast<std::uint64_t>(p.alive))
          .cell(static_cast<double>(p.extinguished) / static_cast<double>(c.series));
      if (p.alive == 0) {
        w.empty().empty().empty().cell("none-alive");
      } else {
        w.cell(p.q1).cell(p.median).cell(p.q3).cell("ok");
      }
      w.end_row();
    }
  }
  return w.str();
}

}  // namespace

Artifacts adoption_artifacts(const CorpusView& corpus, const RunConfig& config) {
  Artifacts files;
  const auto d = corpus_distributions(summaries(corpus, config.horizon), config.horizon);
  files["dist_commits.csv"] = histogram_csv(d.commits_per_repo);
  files["dist_adoptions.csv"] = histogram_csv(d.adoptions_per_repo);
  files["dist_teamsize.csv"] = histogram_csv(d.team_size);

  CsvWriter per({"commit_index", "repos", "adoptions", "mean", "median"});
  for (const auto& row : d.per_commit) {
    if (row.repos == 0) continue;
    per.cell(static_cast<std::uint64_t>(row.commit_index))
        .cell(static_cast<std::uint64_t>(row.repos))
        .cell(static_cast<std::uint64_t>(row.adoptions))
        .cell(row.mean)
        .cell(row.median);
    per.end_row();
  }
  files["adoptions_per_commit.csv"] = per.str();

  CsvWriter stats({"metric", "value"});
  stats.cell("adoptions").cell(static_cast<std::uint64_t>(d.stats.adoptions)).end_row();
  stats.cell("mean_initial_loc").cell(d.stats.mean_initial_loc).end_row();
  stats.cell("median_initial_loc").cell(d.stats.median_initial_loc).end_row();
  stats.cell("post_adoption_commits").cell(static_cast<std::uint64_t>(d.stats.post_adoption_commits)).end_row();
  stats.cell("mean_inserted_after").cell(d.stats.mean_inserted_after).end_row();
  stats.cell("mean_deleted_after").cell(d.stats.mean_deleted_after).end_row();
  files["adoption_stats.csv"] = stats.str();

  CsvWriter adoptions({"repo", "library", "ordinal", "adopter", "initial_loc"});
  CsvWriter repos({"repo", "commits", "team_size", "adoptions"});
  for (const auto& r : corpus.repos) {
    for (const auto& a : r.adoptions) {
      adoptions.cell(a.repo_id).cell(a.library).cell(a.ordinal).cell(a.adopter).cell(a.initial_loc);
      adoptions.end_row();
    }
    repos.cell(r.repo_id)
        .cell(static_cast<std::uint64_t>(r.commits.size()))
        .cell(static_cast<std::uint64_t>(r.team_size))
        .cell(static_cast<std::uint64_t>(r.adoptions.size()));
    repos.end_row();
  }
  files["adoptions.csv"] = adoptions.str();
  files["repos.csv"] = repos.str();
  return files;
}

Artifacts growth_artifacts(const CorpusView& corpus, const RunConfig& config,
                           const std::optional<std::vector<SoLibraryCount>>& so_counts) {
  std::vector<GrowthSeries> series;
  std::map<std::string, std::size_t> team_of;
  struct Sum {
    std::size_t n = 0;
    std::int64_t added = 0, deleted = 0, net = 0;
  };
  std::vector<Sum> activity(config.horizon + 1);

  for (const auto& r : corpus.repos) {
    team_of[r.repo_id] = r.team_size;
    const auto libs = by_library(r.events);
    for (const auto& a : r.adoptions) {
      const auto& evs = libs.at(a.library);
      const auto act = activity_series(a, evs, r.commits.size(), config.horizon, config.index_mode);
      for (std::size_t x = 0; x < act.points.size(); ++x) {
        auto& s = activity[x];
        ++s.n;
        s.added += act.points[x].added;
        s.deleted += act.points[x].deleted;
        s.net += act.points[x].net;
      }
      series.push_back(growth_series(act, config.horizon));
    }
  }

  Artifacts files;
  CsvWriter act({"x", "series", "mean_added", "mean_deleted", "mean_net"});
  for (std::size_t x = 0; x < activity.size(); ++x) {
    const auto& s = activity[x];
    if (s.n == 0) continue;
    const auto n = static_cast<double>(s.n);
    act.cell(static_cast<std::uint64_t>(x))
        .cell(static_cast<std::uint64_t>(s.n))
        .cell(static_cast<double>(s.added) / n)
        .cell(static_cast<double>(s.deleted) / n)
        .cell(static_cast<double>(s.net) / n);
    act.end_row();
  }
  files["activity_after_adoption.csv"] = act.str();

  const auto by_team = aggregate_growth(series, team_buckets(),
                                        [&](const GrowthSeries& g) { return team_bucket(team_of.at(g.adoption.repo_id)); });
  files["growth_by_teamsize.csv"] = growth_csv(by_team, false);

  std::map<std::string, std::uint64_t> posts;
  if (so_counts) {
    for (const auto& c : *so_counts) posts[c.library] = c.post_count;
  }
  const auto by_so = aggregate_growth(series, so_buckets(), [&](const GrowthSeries& g) {
    const auto it = posts.find(g.adoption.library);
    return so_bucket(it == posts.end() ? 0 : it->second);
  });
  files["growth_by_so.csv"] = growth_csv(by_so, !so_counts.has_value());
  return files;
}

Artifacts fight_artifacts(const CorpusView& corpus, const RunConfig& config) {
  std::vector<CommitIndexEntry> all_commits;
  std::vector<AdoptionEvent> adoptions;
  std::vector<RepoFacts> facts;
  std::map<Epsilon, std::vector<Fight>> fights;
  for (const auto& e : config.epsilons) fights[e];

  for (const auto& r : corpus.repos) {
    all_commits.insert(all_commits.end(), r.commits.begin(), r.commits.end());
    adoptions.insert(adoptions.end(), r.adoptions.begin(), r.adoptions.end());
    facts.push_back(RepoFacts{r.repo_id, r.commits.size(), r.team_size});
    const auto libs = by_library(r.events);
    for (const auto& a : r.adoptions) {
      const auto rounds = build_rounds(a, libs.at(a.library));
      for (const auto& e : config.epsilons) {
        if (auto f = detect_fight(a, rounds, FightConfig{e, config.comparator})) fights[e].push_back(std::move(*f));
      }
    }
  }
  const auto experience = experience_table(all_commits);
  const FightReport report = fight_stats(fights, adoptions, facts, experience);

  Artifacts files;
  CsvWriter team({"team_bucket", "epsilon", "fights", "commits", "probability"});
  for (const auto& row : report.by_team) {
    team.cell(row.bucket).cell(row.epsilon.label()).cell(static_cast<std::uint64_t>(row.fights)).cell(row.commits);
    team.cell(row.probability);
    team.end_row();
  }
  files["fight_prob_by_teamsize.csv"] = team.str();

  CsvWriter gap({"epsilon", "group", "gap_min_s", "gap_max_s", "fights", "decided", "experienced_wins",
                 "experienced_win_frac"});
  for (const auto& row : report.by_experience_gap) {
    gap.cell(row.epsilon.label())
        .cell(static_cast<std::uint64_t>(row.group))
        .cell(row.gap_min)
        .cell(row.gap_max)
        .cell(static_cast<std::uint64_t>(row.fights))
        .cell(static_cast<std::uint64_t>(row.decided))
        .cell(static_cast<std::uint64_t>(row.experienced_wins));
    if (row.fraction) gap.cell(*row.fraction);
    else gap.empty();
    gap.end_row();
  }
  files["fight_winners_by_expgap.csv"] = gap.str();

  CsvWriter libs({"epsilon", "library", "fights", "adoptions", "fights_per_1000_adoptions"});
  for (const auto& row : report.by_library) {
    libs.cell(row.epsilon.label())
        .cell(row.library)
        .cell(static_cast<std::uint64_t>(row.fights))
        .cell(static_cast<std::uint64_t>(row.adoptions))
        .cell(row.per_1000_adoptions);
    libs.end_row();
  }
  files["fought_libraries.csv"] = libs.str();

  CsvWriter rounds({"epsilon", "round", "role", "fights", "mean_net"});
  for (const auto& row : report.round_loc) {
    rounds.cell(row.epsilon.label())
        .cell(static_cast<std::uint64_t>(row.round))
        .cell(row.role)
        .cell(static_cast<std::uint64_t>(row.fights))
        .cell(row.mean_net);
    rounds.end_row();
  }
  files["fight_rounds_loc.csv"] = rounds.str();

  CsvWriter summary({"epsilon", "adoptions", "fights", "fight_back", "deleter_wins"});
  for (const auto& row : report.summary) {
    summary.cell(row.epsilon.label())
        .cell(static_cast<std::uint64_t>(row.adoptions))
        .cell(static_cast<std::uint64_t>(row.fights))
        .cell(static_cast<std::uint64_t>(row.fight_back))
        .cell(static_cast<std::uint64_t>(row.deleter_wins));
    summary.end_row();
  }
  files["fight_summary.csv"] = summary.str();

  CsvWriter list({"epsilon", "repo", "library", "adoption_ordinal", "adopter", "deleter", "winner",
                  "trigger_ordinal", "rounds"});
  for (const auto& [eps, fs] : fights) {
    for (const auto& f : fs) {
      list.cell(eps.label())
          .cell(f.adoption.repo_id)
          .cell(f.adoption.library)
          .cell(f.adoption.ordinal)
          .cell(f.adopter)
          .cell(f.deleter)
          .cell(f.winner)
          .cell(f.rounds[f.trigger_round].ordinals.front())
          .cell(static_cast<std::uint64_t>(f.rounds.size()));
      list.end_row();
    }
  }
  files["fights.csv"] = list.str();
  return files;
}

std::map<std::string, std::uint64_t> github_users(const CorpusView& corpus) {
  std::map<std::string, std::set<std::string>> users;
  for (const auto& r : corpus.repos) {
    for (const auto& e : r.events) users[e.library].insert(e.author);
  }
  std::map<std::string, std::uint64_t> out;
  for (const auto& [lib, s] : users) out[lib] = s.size();
  return out;
}

std::optional<std::vector<SoLibraryCount>> load_so_counts(const RunConfig& config, DumpStats* stats) {
  if (!config.so_counts.empty()) {
    if (!std::filesystem::exists(config.so_counts)) throw UsageError("so counts file not found: " + config.so_counts.string());
    return read_so_counts_csv(config.so_counts);
  }
  if (config.so_posts.empty()) return std::nullopt;
  for (const auto& p : {config.so_posts, config.standard_libs, config.pypi_names}) {
    if (p.empty() || !std::filesystem::exists(p)) {
      throw UsageError("stack overflow input not found: " + (p.empty() ? std::string("(unset)") : p.string()));
    }
  }
  const auto lists = LibraryLists::load(config.standard_libs, config.pypi_names);
  std::ifstream in(config.so_posts, std::ios::binary);
  const auto posts = parse_posts_dump(in, stats);
  return count_libraries(posts, lists);
}

Artifacts so_artifacts(const std::optional<std::vector<SoLibraryCount>>& so_counts, const CorpusView* corpus) {
  Artifacts files;
  CsvWriter counts({"library", "posts", "class"});
  if (so_counts) {
    for (const auto& c : *so_counts) {
      counts.cell(c.library).cell(c.post_count).cell(to_string(c.library_class));
      counts.end_row();
    }
  }
  files["so_counts.csv"] = counts.str();

  CsvWriter corr({"class", "points", "status", "slope", "intercept", "r_squared", "p_value"});
  if (!so_counts || !corpus) {
    corr.cell("all").cell(std::uint64_t{0}).cell(so_counts ? "no-corpus" : "no-so-data");
    corr.empty().empty().empty().empty();
    corr.end_row();
  } else {
    for (const auto& reg : correlate_usage(*so_counts, github_users(*corpus))) {
      corr.cell(reg.label).cell(static_cast<std::uint64_t>(reg.points));
      if (reg.skipped) {
        corr.cell("skipped").empty().empty().empty().empty();
      } else {
        corr.cell("ok").cell(reg.slope).cell(reg.intercept).cell(reg.r_squared).cell(reg.p_value);
      }
      corr.end_row();
    }
  }
  files["so_correlation.csv"] = corr.str();
  return files;
}

std::string summary_text(const CorpusView& corpus, const RunConfig& config) {
  const auto d = corpus_distributions(summaries(corpus, config.horizon), config.horizon);
  std::string s;
  const auto line = [&](const std::string& key, const std::string& value) { s += key + ": " + value + "\n"; };
  line("repos", std::to_string(d.repos));
  line("commits", std::to_string(d.commits));
  line("adoptions", std::to_string(d.adoptions));
  std::set<std::string> authors;
  for (const auto& r : corpus.repos) {
    for (const auto& c : r.commits) authors.insert(c.author);
  }
  line("authors", std::to_string(authors.size()));
  line("median commits per repo", std::to_string(d.commits_per_repo.median()));
  line("median adoptions per repo", std::to_string(d.adoptions_per_repo.median()));
  line("median team size", std::to_string(d.team_size.median()));
  if (!d.per_commit.empty() && d.per_commit[0].repos > 0) {
    line("mean adoptions at first commit", fixed(d.per_commit[0].mean));
  }
  line("mean initial loc", fixed(d.stats.mean_initial_loc));
  line("median initial loc", fixed(d.stats.median_initial_loc));
  line("mean inserted after adoption", fixed(d.stats.mean_inserted_after));
  line("mean deleted after adoption", fixed(d.stats.mean_deleted_after));
  if (d.repos > 0) {
    const std::int64_t median = d.commits_per_repo.median();
    std::size_t at_most = 0;
    for (const auto& [v, n] : d.commits_per_repo.counts) {
      if (v <= median) at_most += n;
    }
    s += format_decimal(100.0 * static_cast<double>(at_most) / static_cast<double>(d.repos)) +
         "% of projects have <= " + std::to_string(median) + " commits\n";
  }
  for (const auto& e : config.epsilons) {
    std::size_t fights = 0;
    for (const auto& r : corpus.repos) {
      std::map<std::string, std::vector<LibraryEvent>> libs;
      for (const auto& ev : r.events) libs[ev.library].push_back(ev);
      for (const auto& a : r.adoptions) {
        if (detect_fight(a, build_rounds(a, libs[a.library]), FightConfig{e, config.comparator})) ++fights;
      }
    }
    line("fights at epsilon " + e.label(), std::to_string(fights));
  }
  return s;
}

void write_artifacts(const Artifacts& files, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files) write_file_atomic(dir / name, content);
}

}  // namespace adoptminer
