#include "adoptminer/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>

#include "adoptminer/errors.hpp"
#include "adoptminer/pipeline.hpp"
#include "adoptminer/synth.hpp"
#include "adoptminer/text.hpp"

namespace adoptminer {

namespace {

struct Flags {
  RunConfig config;
  std::string epsilons;
  std::string comparator = "removal";
  bool touching_only = false;
  bool no_import_lines = false;
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repos;
};

std::size_t workers_from_env(std::size_t fallback) {
  const char* v = std::getenv("ADOPTMINER_WORKERS");
  if (!v || !*v) return fallback;
  std::size_t n = 0;
  const std::string_view s(v);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc{} || end != s.data() + s.size() || n == 0) {
    throw UsageError("ADOPTMINER_WORKERS must be a positive integer");
  }
  return n;
}

void finish_config(Flags& f) {
  if (!f.epsilons.empty()) f.config.epsilons = parse_epsilon_list(f.epsilons);
  f.config.comparator = parse_comparator(f.comparator);
  f.config.index_mode = f.touching_only ? IndexMode::LibraryCommits : IndexMode::AllCommits;
  f.config.count_import_lines = !f.no_import_lines;
  f.config.workers = workers_from_env(f.config.workers);
  if (f.config.workers == 0) throw UsageError("--workers must be positive");
  if (f.config.shard_cap == 0) throw UsageError("--shard-cap must be positive");
}

EventStore open_store(const RunConfig& c) {
  if (c.store.empty()) throw UsageError("--store is required");
  if (!EventStore::exists(c.store)) throw UsageError("no event store at " + c.store.string());
  return EventStore::open(c.store);
}

void require_out(const RunConfig& c) {
  if (c.out.empty()) throw UsageError("--out is required");
}

void emit(const Artifacts& files, const RunConfig& c) {
  Artifacts all = files;
  all["run_config.json"] = c.to_json().dump(2) + "\n";
  write_artifacts(all, c.out);
}

int run_synth(Flags& f, std::ostream& out) {
  require_out(f.config);
  CorpusSpec spec;
  if (!f.spec.empty()) {
    if (!std::filesystem::exists(f.spec)) throw UsageError("spec file not found: " + f.spec);
    try {
      spec = CorpusSpec::from_json(nlohmann::json::parse(read_file(f.spec)));
    } catch (const nlohmann::json::exception& e) {
      throw SpecError(std::string("spec is not valid JSON: ") + e.what());
    }
  }
  if (f.seed) spec.seed = *f.seed;
  if (f.repos) spec.repo_count = *f.repos;
  const auto corpus = generate_corpus(spec);
  write_corpus(corpus, spec, f.config.out);
  out << "synth: " << corpus.truth.repos.size() << " repos, " << corpus.truth.total_commits() << " commits, "
      << corpus.truth.total_adoptions() << " adoptions -> " << f.config.out.string() << "\n";
  return kExitOk;
}

int run_ingest(Flags& f, std::ostream& out, std::ostream& err) {
  if (f.config.manifest.empty()) throw UsageError("--manifest is required");
  if (f.config.store.empty()) throw UsageError("--store is required");
  const auto s = ingest_corpus(f.config, &err);
  out << "ingest: " << s.repos << " repos, " << s.commits << " commits, " << s.events << " events, " << s.warnings
      << " warnings\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Library adoption and code-fight mining for Python repositories", "adoptminer"};
  app.require_subcommand(1);
  Flags f;
  f.config.workers = default_workers();

  const auto store_opt = [&](CLI::App* sub) { sub->add_option("--store", f.config.store, "event store directory"); };
  const auto out_opt = [&](CLI::App* sub) { sub->add_option("--out", f.config.out, "output directory"); };
  const auto horizon_opt = [&](CLI::App* sub) {
    sub->add_option("--horizon", f.config.horizon, "commits tracked after each adoption")->capture_default_str();
  };
  const auto growth_opts = [&](CLI::App* sub) {
    sub->add_flag("--touching-only", f.touching_only, "index x by library-touching commits only");
  };
  const auto so_opts = [&](CLI::App* sub) {
    sub->add_option("--so-posts", f.config.so_posts, "Stack Overflow posts dump (XML)");
    sub->add_option("--standard-libs", f.config.standard_libs, "standard library names, one per line");
    sub->add_option("--pypi-names", f.config.pypi_names, "PyPI package names, one per line");
  };
  const auto so_counts_opt = [&](CLI::App* sub) {
    sub->add_option("--so-counts", f.config.so_counts, "so_counts.csv from a previous 'so' run");
  };
  const auto fight_opts = [&](CLI::App* sub) {
    sub->add_option("--epsilon", f.epsilons, "comma-separated thresholds (default 0.1,0.2,0.3,0.4,0.5)");
    sub->add_option("--comparator", f.comparator, "removal (default) or reduction");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with ground truth");
  out_opt(synth);
  synth->add_option("--spec", f.spec, "corpus spec JSON");
  synth->add_option("--seed", f.seed, "override the spec seed");
  synth->add_option("--repos", f.repos, "override the repository count");

  auto* ingest = app.add_subcommand("ingest", "parse, linearize and mine logs into an event store");
  ingest->add_option("--manifest", f.config.manifest, "corpus manifest (JSON Lines of repo_id, path)");
  store_opt(ingest);
  ingest->add_option("--workers", f.config.workers, "mining threads (ADOPTMINER_WORKERS overrides)");
  ingest->add_option("--shard-cap", f.config.shard_cap, "event records per shard")->capture_default_str();
  ingest->add_flag("--include-merge-diffs", f.config.include_merge_diffs, "mine merge commit diffs too");
  ingest->add_flag("--no-import-lines", f.no_import_lines, "do not count import lines as library LOC");

  auto* adopt = app.add_subcommand("adopt", "adoptions and corpus distributions");
  store_opt(adopt);
  out_opt(adopt);
  horizon_opt(adopt);

  auto* growth = app.add_subcommand("growth", "post-adoption activity and growth curves");
  store_opt(growth);
  out_opt(growth);
  horizon_opt(growth);
  growth_opts(growth);
  so_opts(growth);
  so_counts_opt(growth);

  auto* fights = app.add_subcommand("fights", "code fight detection and statistics");
  store_opt(fights);
  out_opt(fights);
  fight_opts(fights);

  auto* so = app.add_subcommand("so", "Stack Overflow library counts and usage correlation");
  so_opts(so);
  store_opt(so);
  out_opt(so);

  auto* report = app.add_subcommand("report", "every CSV plus summary.txt");
  store_opt(report);
  out_opt(report);
  horizon_opt(report);
  growth_opts(report);
  fight_opts(report);
  so_opts(report);
  so_counts_opt(report);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "adoptminer: " << e.what() << "\n";
      return kExitUsage;
    }
    finish_config(f);
    RunConfig& c = f.config;

    if (synth->parsed()) return run_synth(f, out);
    if (ingest->parsed()) return run_ingest(f, out, err);

    if (so->parsed()) {
      require_out(c);
      if (c.so_posts.empty()) throw UsageError("--so-posts is required");
      DumpStats stats;
      const auto counts = load_so_counts(c, &stats);
      std::optional<CorpusView> corpus;
      if (!c.store.empty()) corpus = load_corpus(open_store(c));
      emit(so_artifacts(counts, corpus ? &*corpus : nullptr), c);
      out << "so: " << stats.rows << " rows, " << stats.yielded << " python questions, " << stats.malformed
          << " malformed, " << counts->size() << " libraries\n";
      return kExitOk;
    }

    const EventStore store = open_store(c);
    require_out(c);
    const CorpusView corpus = load_corpus(store);
    if (adopt->parsed()) {
      emit(adoption_artifacts(corpus, c), c);
    } else if (growth->parsed()) {
      emit(growth_artifacts(corpus, c, load_so_counts(c)), c);
    } else if (fights->parsed()) {
      emit(fight_artifacts(corpus, c), c);
    } else if (report->parsed()) {
      const auto counts = load_so_counts(c);
      Artifacts all = adoption_artifacts(corpus, c);
      all.merge(growth_artifacts(corpus, c, counts));
      all.merge(fight_artifacts(corpus, c));
      all.merge(so_artifacts(counts, &corpus));
      all["summary.txt"] = summary_text(corpus, c);
      emit(all, c);
    }
    out << "wrote " << c.out.string() << "\n";
    return kExitOk;
  } catch (const UsageError& e) {
    err << "adoptminer: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatVersionError& e) {
    err << "adoptminer: " << e.what() << "\n";
    return kExitVersion;
  } catch (const std::exception& e) {
    err << "adoptminer: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace adoptminer
