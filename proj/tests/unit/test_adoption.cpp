#include <doctest.h>

#include <cmath>

#include "adoptminer/adoption.hpp"
#include "adoptminer/errors.hpp"
#include "adoptminer/pipeline.hpp"
#include "adoptminer/text.hpp"
#include "gen.hpp"
#include "oracles.hpp"

using namespace adoptminer;

namespace {

LibraryEvent ev(std::uint64_t ord, const char* lib, std::int64_t add, std::int64_t del, const char* who = "u") {
  return LibraryEvent{"p", ord, who, lib, add, del, false, false};
}

}  // namespace

TEST_CASE("worked growth example") {
  const std::vector<std::int64_t> net = {2, 1, 4, -1};
  const auto g = growth_from_net(net);
  CHECK(g.values == std::vector<double>{1.0, 1.5, 3.5, 3.0});
  CHECK(g.termination == Termination::HistoryEnded);
}

TEST_CASE("growth stops before the total reaches zero") {
  const std::vector<std::int64_t> net = {3, -1, -2, 5};
  const auto g = growth_from_net(net);
  CHECK(g.values.size() == 2);
  CHECK(g.termination == Termination::UsageExtinguished);
  CHECK_THROWS_AS(growth_from_net(std::vector<std::int64_t>{0, 1}), InvalidAdoptionError);
  CHECK_THROWS_AS(growth_from_net(std::vector<std::int64_t>{}), InvalidAdoptionError);
}

TEST_CASE("growth respects the horizon") {
  std::vector<std::int64_t> net(20, 1);
  const auto g = growth_from_net(net, 5);
  CHECK(g.values.size() == 6);
  CHECK(g.termination == Termination::HorizonReached);
  CHECK(g.values.back() == 6.0);
}

TEST_CASE("property: recurrence equals S_x / S_0") {
  testgen::SplitMix rng(21);
  for (int s = 0; s < 500; ++s) {
    std::vector<std::int64_t> net = {rng.between(1, 30)};
    for (std::size_t k = rng.below(120); k > 0; --k) net.push_back(rng.between(-15, 20));
    const std::size_t horizon = 1 + rng.below(100);
    const auto g = growth_from_net(net, horizon);
    const auto want = oracle::growth(net, horizon);
    REQUIRE(g.values.size() == want.size());
    for (std::size_t x = 0; x < want.size(); ++x) {
      CHECK(std::abs(g.values[x] - want[x]) <= 1e-9 * std::abs(want[x]));
    }
  }
}

TEST_CASE("adoption is the first sighting with added LOC") {
  const std::vector<LibraryEvent> events = {ev(0, "numpy", 3, 0), ev(1, "math", 0, 1), ev(2, "math", 4, 0),
                                            ev(2, "json", 1, 0, "v"), ev(5, "numpy", 2, 0)};
  const auto a = detect_adoptions(events);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == AdoptionEvent{"p", "numpy", 0, "u", 3});
  CHECK(a[1] == AdoptionEvent{"p", "json", 2, "v", 1});
}

TEST_CASE("activity series in both index modes") {
  const AdoptionEvent a{"p", "numpy", 2, "u", 4};
  const std::vector<LibraryEvent> events = {ev(2, "numpy", 4, 0), ev(5, "numpy", 2, 1), ev(9, "numpy", 0, 3)};
  const auto all = activity_series(a, events, 10, 100, IndexMode::AllCommits);
  REQUIRE(all.points.size() == 8);
  CHECK(all.history_ended);
  CHECK(all.points[3] == ActivityPoint{2, 1, 1});
  CHECK(all.points[7] == ActivityPoint{0, 3, -3});
  CHECK(all.points[1] == ActivityPoint{});
  const auto lib = activity_series(a, events, 10, 100, IndexMode::LibraryCommits);
  REQUIRE(lib.points.size() == 3);
  CHECK(lib.points[1].net == 1);

  const auto g = growth_series(a, events, 10, 100, IndexMode::AllCommits);
  CHECK(g.values.size() == 8);
  CHECK(g.values[3] == 1.25);
  CHECK(g.values[7] == 0.5);
  const auto short_h = growth_series(a, events, 10, 3, IndexMode::AllCommits);
  CHECK(short_h.values.size() == 4);
  CHECK(short_h.termination == Termination::HorizonReached);
}

TEST_CASE("nearest-rank percentiles match a sort-and-index oracle") {
  testgen::SplitMix rng(22);
  for (int s = 0; s < 300; ++s) {
    std::vector<double> xs;
    for (std::size_t k = 1 + rng.below(40); k > 0; --k) xs.push_back(static_cast<double>(rng.between(-50, 50)) / 4);
    auto sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    for (int p : {1, 25, 50, 75, 100}) CHECK(nearest_rank(sorted, p) == oracle::percentile(xs, p));
  }
}

TEST_CASE("quartile curves count only live series and track extinction") {
  GrowthSeries a, b, c;
  a.values = {1, 2, 3};
  a.termination = Termination::HistoryEnded;
  b.values = {1, 0.5};
  b.termination = Termination::UsageExtinguished;
  c.values = {1, 4, 5};
  c.termination = Termination::HorizonReached;
  a.adoption.repo_id = "x";
  b.adoption.repo_id = "x";
  c.adoption.repo_id = "y";
  const std::vector<GrowthSeries> all = {a, b, c};
  const auto curves = aggregate_growth(all, {"x", "y", "z"}, [](const GrowthSeries& s) { return s.adoption.repo_id; });
  REQUIRE(curves.size() == 3);
  CHECK(curves[0].series == 2);
  REQUIRE(curves[0].points.size() == 3);
  CHECK(curves[0].points[1].alive == 2);
  CHECK(curves[0].points[1].q1 == 0.5);
  CHECK(curves[0].points[1].q3 == 2);
  CHECK(curves[0].points[2].alive == 1);
  CHECK(curves[0].points[2].extinguished == 1);
  CHECK(curves[2].empty());
}

TEST_CASE("histogram median and ccdf") {
  Histogram h;
  for (int v : {1, 1, 2, 5, 9}) h.add(v);
  CHECK(h.median() == 2);
  CHECK(h.ccdf(1) == 1.0);
  CHECK(h.ccdf(2) == 0.6);
  CHECK(h.ccdf(10) == 0.0);
  CHECK(Histogram{}.median() == 0);
}

TEST_CASE("buckets") {
  CHECK(team_bucket(1) == "1");
  CHECK(team_bucket(5) == "4-9");
  CHECK(team_bucket(10) == "10+");
  CHECK(so_bucket(0) == "0");
  CHECK(so_bucket(100) == "1-100");
  CHECK(so_bucket(1001) == ">1000");
}

TEST_CASE("corpus distributions") {
  RepoSummary r1{"a", 3, 2, {{"a", "numpy", 0, "u", 4}, {"a", "json", 2, "v", 2}}, {{1, 0, 1}, {0, 3, -3}}};
  RepoSummary r2{"b", 1, 1, {{"b", "numpy", 0, "w", 6}}, {}};
  const std::vector<RepoSummary> repos = {r1, r2};
  const auto d = corpus_distributions(repos, 5);
  CHECK(d.repos == 2);
  CHECK(d.commits == 4);
  CHECK(d.adoptions == 3);
  CHECK(d.commits_per_repo.counts == std::map<std::int64_t, std::size_t>{{1, 1}, {3, 1}});
  REQUIRE(d.per_commit.size() == 6);
  CHECK(d.per_commit[0].repos == 2);
  CHECK(d.per_commit[0].adoptions == 2);
  CHECK(d.per_commit[2].repos == 1);
  CHECK(d.per_commit[2].adoptions == 1);
  CHECK(d.per_commit[4].repos == 0);
  CHECK(d.stats.mean_initial_loc == 4.0);
  CHECK(d.stats.median_initial_loc == 4.0);
  CHECK(d.stats.mean_inserted_after == 0.5);
  CHECK(d.stats.mean_deleted_after == 1.5);
}

TEST_CASE("team size counts distinct authors") {
  std::vector<CommitIndexEntry> cs = {{"p", 0, "h0", "a", 1, false}, {"p", 1, "h1", "b", 2, false},
                                      {"p", 2, "h2", "a", 3, false}};
  CHECK(team_profile("p", cs).team_size == 2);
}

TEST_CASE("the swap commit as commit 0 adopts numpy with S_0 = 4") {
  const auto r = ingest_log("p", read_file(std::filesystem::path(ADOPTMINER_FIXTURES) / "math_to_numpy_commit.log"), {});
  const auto a = detect_adoptions(r.events);
  REQUIRE(a.size() == 1);
  CHECK(a[0].library == "numpy");
  CHECK(a[0].ordinal == 0);
  CHECK(a[0].initial_loc == 4);
}

TEST_CASE("a library seen at ordinals 3 and 7 is adopted once, at 3") {
  const std::vector<LibraryEvent> events = {ev(3, "yaml", 2, 0), ev(7, "yaml", 1, 0)};
  const auto a = detect_adoptions(events);
  REQUIRE(a.size() == 1);
  CHECK(a[0].ordinal == 3);
}

TEST_CASE("a lone adoption has growth [1]") {
  CHECK(growth_from_net(std::vector<std::int64_t>{5}).values == std::vector<double>{1.0});
}

TEST_CASE("quartile worked examples") {
  std::vector<GrowthSeries> flat(3), spread(3);
  for (auto& s : flat) s.values = {1, 1, 1};
  spread[0].values = {1, 2};
  spread[1].values = {1, 4};
  spread[2].values = {1, 6};
  const auto one = [](const GrowthSeries&) { return std::string("g"); };
  for (const auto& p : aggregate_growth(flat, {"g"}, one)[0].points) CHECK(p.median == 1);
  const auto c = aggregate_growth(spread, {"g"}, one)[0];
  CHECK(c.points[1].median == 4);
  CHECK(c.points[1].q1 == 2);
  CHECK(c.points[1].q3 == 6);
}

TEST_CASE("property: grouped medians equal a sort-based oracle") {
  testgen::SplitMix rng(23);
  std::vector<GrowthSeries> series;
  for (int s = 0; s < 200; ++s) {
    std::vector<std::int64_t> net = {rng.between(1, 10)};
    for (std::size_t k = rng.below(30); k > 0; --k) net.push_back(rng.between(-6, 8));
    auto g = growth_from_net(net);
    g.adoption.repo_id = team_bucket(1 + rng.below(12));
    series.push_back(g);
  }
  const auto curves = aggregate_growth(series, team_buckets(), [](const GrowthSeries& s) { return s.adoption.repo_id; });
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      std::vector<double> col;
      for (const auto& s : series) {
        if (s.adoption.repo_id == c.group && s.values.size() > p.x) col.push_back(s.values[p.x]);
      }
      REQUIRE(col.size() == p.alive);
      CHECK(p.median == oracle::percentile(col, 50));
      CHECK(p.q1 == oracle::percentile(col, 25));
      CHECK(p.q3 == oracle::percentile(col, 75));
    }
  }
}

TEST_CASE("commit histogram for repos of 1, 1 and 10 commits") {
  const std::vector<RepoSummary> repos = {{"a", 1, 1, {}, {}}, {"b", 1, 1, {}, {}}, {"c", 10, 1, {}, {}}};
  const auto d = corpus_distributions(repos);
  CHECK(d.commits_per_repo.median() == 1);
  CHECK(d.commits_per_repo.ccdf(10) == doctest::Approx(1.0 / 3));
}
