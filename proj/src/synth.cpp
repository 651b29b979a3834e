#include "adoptminer/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "adoptminer/errors.hpp"
#include "adoptminer/imports.hpp"
#include "adoptminer/text.hpp"

namespace adoptminer {

using nlohmann::json;

namespace {

// mt19937_64 is fully specified by the standard; the distributions are not,
// so sampling is done by hand to keep corpora identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  std::uint64_t next() { return g_(); }
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do v = g_(); while (v >= limit);
    return v % n;
  }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double unit() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

 private:
  std::mt19937_64 g_;
};

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string hex(Rng& rng, std::size_t n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(n, '0');
  for (auto& c : s) c = digits[rng.below(16)];
  return s;
}

std::string ascii_lower(std::string s) {
  for (auto& c : s) if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

std::string ascii_upper(std::string s) {
  for (auto& c : s) if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return s;
}

// Discrete power law on [lo, hi]: P(v) ~ (v + shift)^-alpha.
class PowerLaw {
 public:
  PowerLaw(std::size_t lo, std::size_t hi, double alpha, double shift) : lo_(lo) {
    double acc = 0;
    for (std::size_t v = lo; v <= hi; ++v) {
      acc += std::pow(static_cast<double>(v) + shift, -alpha);
      cdf_.push_back(acc);
    }
    for (auto& c : cdf_) c /= acc;
  }
  std::size_t sample(Rng& rng) const {
    const double u = rng.unit();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return lo_ + static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                                   static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  }

 private:
  std::size_t lo_;
  std::vector<double> cdf_;
};

struct LibInfo {
  std::string name;
  std::string alias;  // may be empty
  std::vector<std::string> symbols;
  std::vector<std::string> submodules;
};

const std::vector<LibInfo>& builtin_libs() {
  static const std::vector<LibInfo> libs = [] {
    std::vector<LibInfo> v = {
        {"numpy", "np", {"linspace", "digitize", "zeros", "arange"}, {"random", "linalg"}},
        {"pandas", "pd", {"read_csv", "DataFrame", "concat"}, {"io", "plotting"}},
        {"os", "", {"getcwd", "listdir", "makedirs"}, {"path"}},
        {"sys", "", {"getsizeof", "setrecursionlimit"}, {}},
        {"json", "", {"loads", "dumps"}, {"decoder"}},
        {"re", "", {"findall", "fullmatch"}, {}},
        {"math", "", {"sqrt", "floor", "ceil"}, {}},
        {"time", "", {"sleep", "monotonic"}, {}},
        {"datetime", "dt", {"timedelta", "timezone"}, {}},
        {"collections", "colls", {"Counter", "OrderedDict", "defaultdict"}, {"abc"}},
        {"itertools", "itt", {"chain", "islice"}, {}},
        {"functools", "ft", {"partial", "reduce"}, {}},
        {"subprocess", "subp", {"check_output", "Popen"}, {}},
        {"logging", "log", {"getLogger", "basicConfig"}, {"handlers"}},
        {"random", "", {"randint", "shuffle"}, {}},
        {"pdb", "", {"set_trace"}, {}},
        {"pprint", "", {"pformat"}, {}},
        {"telnetlib", "", {"Telnet"}, {}},
        {"syslog", "", {"openlog"}, {}},
        {"glob", "", {"iglob"}, {}},
        {"poplib", "", {"POP3"}, {}},
        {"imp", "", {"load_source"}, {}},
        {"requests", "rq", {"Session"}, {"adapters"}},
        {"flask", "", {"Flask", "jsonify"}, {"views"}},
        {"django", "dj", {"setup"}, {"db", "conf"}},
        {"scipy", "sp", {"integrate", "optimize"}, {"stats", "signal"}},
        {"matplotlib", "mpl", {"rcParams"}, {"pyplot"}},
        {"sklearn", "skl", {"clone"}, {"svm", "metrics"}},
        {"torch", "th", {"tensor", "no_grad"}, {"nn"}},
        {"yaml", "yml", {"safe_load", "safe_dump"}, {}},
        {"click", "", {"command", "option"}, {}},
        {"tqdm", "", {"trange"}, {"auto"}},
        {"boto3", "", {"client", "resource"}, {"session"}},
        {"sqlalchemy", "sa", {"create_engine", "select"}, {"orm"}},
        {"pytest", "", {"fixture", "raises"}, {"mark"}},
        {"setuptools", "", {"find_packages", "setup_tool"}, {}},
        {"argparse", "", {"ArgumentParser"}, {}},
        {"csv", "", {"DictReader", "writer"}, {}},
        {"pickle", "", {"dump_obj", "load_obj"}, {}},
        {"socket", "", {"create_connection", "gethostname"}, {}},
    };
    return v;
  }();
  return libs;
}

const std::vector<std::string>& shared_aliases() {
  static const std::vector<std::string> v = {"mod", "ext", "lib"};
  return v;
}

// Identifiers plain code may use; never bound by any generated import.
const std::vector<std::string>& reserved_names() {
  static const std::vector<std::string> v = {
      "df",     "obj",  "result", "x",     "y",      "value", "out",   "total", "data",  "items", "counter",
      "helpers", "msg", "k",      "print", "len",    "range", "method", "col",  "min",   "max",   "None",
      "self",   "str",  "int",    "isinstance", "pass", "return", "def", "class", "for", "in", "if", "is"};
  return v;
}

const std::vector<std::string>& plain_vars() {
  static const std::vector<std::string> v = {"x", "y", "result", "value", "out", "total", "data"};
  return v;
}

LibInfo info_for(const std::string& name) {
  for (const auto& l : builtin_libs()) {
    if (l.name == name) return l;
  }
  return LibInfo{name, "", {name + "_open", name + "_apply"}, {"core", "util"}};
}

std::string sub_alias(const LibInfo& lib, const std::string& sub) {
  return (lib.alias.empty() ? lib.name : lib.alias) + "_" + sub;
}

// --- content model -------------------------------------------------------

struct Bind {
  std::string token;
  int lib;
};

struct Dep {
  std::string token;  // empty for the library's own name
  int lib;
};

struct Line {
  std::string text;
  std::vector<int> libs;  // sorted, unique
  std::vector<Bind> binds;
  std::vector<Dep> deps;
  bool import = false;
};

using BindCounts = std::map<std::pair<std::string, int>, int>;

BindCounts bind_counts(const std::vector<Line>& lines) {
  BindCounts c;
  for (const auto& l : lines) {
    for (const auto& b : l.binds) ++c[{b.token, b.lib}];
  }
  return c;
}

bool lib_live(const BindCounts& c, int lib) {
  for (const auto& [key, n] : c) {
    if (key.second == lib && n > 0) return true;
  }
  return false;
}

bool deps_hold(const Line& l, const BindCounts& c) {
  for (const auto& d : l.deps) {
    if (d.token.empty()) {
      if (!lib_live(c, d.lib)) return false;
    } else {
      const auto it = c.find({d.token, d.lib});
      if (it == c.end() || it->second <= 0) return false;
    }
  }
  return true;
}

// Token currently bound to a different library?
bool token_conflicts(const BindCounts& c, const std::string& token, int lib) {
  for (const auto& [key, n] : c) {
    if (key.first == token && key.second != lib && n > 0) return true;
  }
  return false;
}

struct FileEdit {
  std::string path;
  bool before_exists = false;
  bool after_exists = false;
  bool binary = false;
  bool no_newline = false;
  std::vector<std::pair<char, Line>> ops;  // ' ', '-', '+'
  std::string index_before = "0000000";
  std::string index_after = "0000000";
};

FileEdit inverted(const FileEdit& e) {
  FileEdit r = e;
  std::swap(r.before_exists, r.after_exists);
  std::swap(r.index_before, r.index_after);
  for (auto& [kind, line] : r.ops) {
    if (kind == '+') kind = '-';
    else if (kind == '-') kind = '+';
  }
  return r;
}

std::string range_of(std::size_t start, std::size_t count) {
  if (count == 1) return std::to_string(start);
  return std::to_string(start) + "," + std::to_string(count);
}

void emit_hunks(std::string& out, const FileEdit& e) {
  constexpr std::size_t ctx = 3;
  const auto& ops = e.ops;
  std::vector<std::size_t> changes;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (ops[k].first != ' ') changes.push_back(k);
  }
  // old/new line numbers (1-based) of each op position
  std::vector<std::size_t> old_no(ops.size() + 1), new_no(ops.size() + 1);
  std::size_t o = 1, n = 1;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    old_no[k] = o;
    new_no[k] = n;
    if (ops[k].first != '+') ++o;
    if (ops[k].first != '-') ++n;
  }
  std::size_t c = 0;
  while (c < changes.size()) {
    std::size_t last = c;
    while (last + 1 < changes.size() && changes[last + 1] - changes[last] <= 2 * ctx + 1) ++last;
    const std::size_t begin = changes[c] >= ctx ? changes[c] - ctx : 0;
    const std::size_t end = std::min(ops.size(), changes[last] + ctx + 1);
    std::size_t old_count = 0, new_count = 0;
    for (std::size_t k = begin; k < end; ++k) {
      if (ops[k].first != '+') ++old_count;
      if (ops[k].first != '-') ++new_count;
    }
    const std::size_t old_start = old_count ? old_no[begin] : old_no[begin] - 1;
    const std::size_t new_start = new_count ? new_no[begin] : new_no[begin] - 1;
    out += "@@ -" + range_of(old_start, old_count) + " +" + range_of(new_start, new_count) + " @@\n";
    for (std::size_t k = begin; k < end; ++k) {
      out += ops[k].first;
      out += ops[k].second.text;
      out += '\n';
    }
    if (e.no_newline && end == ops.size()) out += "\\ No newline at end of file\n";
    c = last + 1;
  }
}

std::string emit_file(const FileEdit& e) {
  const std::string& p = e.path;
  std::string out = "diff --git a/" + p + " b/" + p + "\n";
  if (!e.before_exists) out += "new file mode 100644\n";
  if (!e.after_exists) out += "deleted file mode 100644\n";
  out += "index " + e.index_before + ".." + e.index_after;
  out += e.before_exists && e.after_exists ? " 100644\n" : "\n";
  const std::string a = e.before_exists ? "a/" + p : "/dev/null";
  const std::string b = e.after_exists ? "b/" + p : "/dev/null";
  if (e.binary) {
    out += "Binary files " + a + " and " + b + " differ\n";
    return out;
  }
  out += "--- " + a + "\n+++ " + b + "\n";
  emit_hunks(out, e);
  return out;
}

// --- authors ---------------------------------------------------------------

struct Author {
  std::string name;
  std::string email;  // empty for a few
  std::string key;
};

std::vector<Author> make_authors(std::size_t count, Rng& rng) {
  static const std::vector<std::string> given = {"Ada",   "Grace", "Linus", "Guido",  "Barbara", "Ken",
                                                 "Dennis", "Margaret", "Alan", "Edsger", "Frances", "José",
                                                 "Radia", "Bjarne", "Katherine", "Niklaus", "Leslie", "Sophie"};
  static const std::vector<std::string> family = {"Moreno", "Okafor", "Lindqvist", "Tanaka", "Novak", "Haddad",
                                                  "Ferreira", "Kowalski", "Nguyen", "Brennan", "Núñez", "Ivanova",
                                                  "Schmidt", "Osei", "Larsen", "Rossi"};
  std::vector<Author> out;
  std::set<std::string> keys;
  for (std::size_t i = 0; i < count; ++i) {
    Author a;
    a.name = given[i % given.size()] + " " + family[(i / given.size()) % family.size()];
    if (i >= given.size() * family.size()) a.name += " " + std::to_string(i / (given.size() * family.size()) + 1);
    if (rng.chance(0.04)) {
      a.key = ascii_lower(a.name);
    } else {
      std::string local = ascii_lower(given[i % given.size()]);
      local.erase(std::remove_if(local.begin(), local.end(), [](char c) { return static_cast<unsigned char>(c) >= 0x80; }),
                  local.end());
      a.email = local + "." + std::to_string(i) + "@example.org";
      a.key = a.email;
    }
    if (!keys.insert(a.key).second) throw SpecError("author key collision: " + a.key);
    out.push_back(std::move(a));
  }
  return out;
}

// --- per-repository generation -------------------------------------------

enum class Kind { Edit, Docs, Binary, Stub, Revert, Merge, Plant };

struct GenCommit {
  std::string hash;
  std::vector<std::string> parents;
  int author = 0;
  std::string shown_name;
  std::string shown_email;
  std::int64_t ts = 0;
  Kind kind = Kind::Edit;
  bool skewed = false;
  std::vector<FileEdit> edits;
  std::string diff;  // emitted text
};

struct PlantPart {
  std::int64_t net = 0;
  bool adopter = true;
  std::size_t round = 0;
};

class RepoGen {
 public:
  RepoGen(const CorpusSpec& spec, const std::vector<LibInfo>& libs, const std::vector<Author>& authors,
          std::size_t index, const PowerLaw& commits_law, const PowerLaw& team_law)
      : spec_(spec), libs_(libs), authors_(authors), rng_(mix(spec.seed ^ mix(index + 1))) {
    repo_.repo_id = "repo-" + pad(index + 1);
    repo_.log_file = "repos/" + repo_.repo_id + ".log";
    commit_count_ = commits_law.sample(rng_);
    std::size_t team = std::min({team_law.sample(rng_), authors_.size(), commit_count_});
    team = std::max<std::size_t>(team, 1);
    std::set<int> chosen;
    while (chosen.size() < team) chosen.insert(static_cast<int>(rng_.below(authors_.size())));
    roster_.assign(chosen.begin(), chosen.end());
    for (std::size_t k = roster_.size(); k > 1; --k) std::swap(roster_[k - 1], roster_[rng_.below(k)]);

    std::vector<int> all(libs_.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    for (std::size_t k = all.size(); k > 1; --k) std::swap(all[k - 1], all[rng_.below(k)]);

    if (!spec_.fight_plants.empty() && roster_.size() >= 2 && rng_.chance(spec_.plant_rate) && !all.empty()) {
      plan_plant(all.back());
      if (plant_lib_ >= 0) all.pop_back();
    }
    const std::size_t palette = std::min<std::size_t>(all.size(), static_cast<std::size_t>(rng_.range(3, 12)));
    palette_.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(palette));
    clock_ = spec_.start_ts + rng_.range(0, 2 * 365 * 86400);
  }

  TruthRepo run(std::string& log_text);

 private:
  static std::string pad(std::size_t n) {
    std::string s = std::to_string(n);
    return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
  }

  void plan_plant(int lib);
  int pick_author();
  void stamp(GenCommit& c, int author);
  std::string fresh_hash(const std::string* must_exceed);

  Line import_line(int lib, BindCounts& live, bool allow_multi);
  Line use_line(const BindCounts& live);
  Line plain_line();
  Line distractor_line();

  FileEdit edit_python(const std::string& path, bool creating, bool first_commit);
  FileEdit delete_file(const std::string& path);
  FileEdit edit_text(const std::string& path, bool python_like);
  FileEdit edit_binary();
  std::vector<FileEdit> plant_edits(const PlantPart& part);

  void apply(const FileEdit& e);
  TruthCommit truth_of(const GenCommit& c, std::uint64_t ordinal) const;
  std::map<std::string, std::int64_t> snapshot() const;

  const CorpusSpec& spec_;
  const std::vector<LibInfo>& libs_;
  const std::vector<Author>& authors_;
  Rng rng_;
  TruthRepo repo_;
  std::size_t commit_count_ = 0;
  std::vector<int> roster_;
  std::vector<int> palette_;
  std::int64_t clock_ = 0;
  std::set<std::string> hashes_;

  std::map<std::string, std::vector<Line>> files_;  // existing files only
  std::set<std::string> python_files_;               // mined .py files, excluding the plant file
  std::size_t next_module_ = 0;
  bool logo_exists_ = false;

  int plant_lib_ = -1;
  std::vector<PlantPart> plant_parts_;
  std::size_t plant_start_ = 0;
  int plant_adopter_ = -1;
  int plant_rival_ = -1;
  const FightPlant* plant_ = nullptr;
  std::string plant_token_;
};

const std::string kPlantPath = "pkg/contested.py";

void RepoGen::plan_plant(int lib) {
  const FightPlant& fp = spec_.fight_plants[rng_.below(spec_.fight_plants.size())];
  std::vector<PlantPart> parts;
  for (std::size_t r = 0; r < fp.rounds.size(); ++r) {
    const std::int64_t n = fp.rounds[r];
    const bool adopter = r % 2 == 0;
    if ((n >= 2 || n <= -2) && rng_.chance(0.3)) {
      const std::int64_t a = n / 2;
      parts.push_back({a, adopter, r});
      parts.push_back({n - a, adopter, r});
    } else {
      parts.push_back({n, adopter, r});
    }
  }
  if (parts.size() > commit_count_) return;
  plant_ = &fp;
  plant_lib_ = lib;
  plant_parts_ = std::move(parts);
  plant_start_ = static_cast<std::size_t>(rng_.below(commit_count_ - plant_parts_.size() + 1));
  const std::size_t a = rng_.below(roster_.size());
  std::size_t b = rng_.below(roster_.size() - 1);
  if (b >= a) ++b;
  plant_adopter_ = roster_[a];
  plant_rival_ = roster_[b];
  const LibInfo& info = libs_[static_cast<std::size_t>(lib)];
  plant_token_ = info.alias.empty() || rng_.chance(0.5) ? info.name : info.alias;
}

int RepoGen::pick_author() {
  // earlier roster members commit more often
  const std::size_t n = roster_.size();
  const std::size_t k = std::min(rng_.below(n), rng_.below(n));
  return roster_[k];
}

std::string RepoGen::fresh_hash(const std::string* must_exceed) {
  for (;;) {
    std::string h = hex(rng_, 40);
    if (must_exceed && h <= *must_exceed) continue;
    if (hashes_.insert(h).second) return h;
  }
}

void RepoGen::stamp(GenCommit& c, int author) {
  c.author = author;
  const Author& a = authors_[static_cast<std::size_t>(author)];
  c.shown_name = a.name;
  c.shown_email = a.email;
  if (a.email.empty()) {
    if (rng_.chance(0.2)) c.shown_name = ascii_upper(a.name);
  } else {
    const double r = rng_.unit();
    if (r < 0.1) c.shown_name = ascii_upper(a.name);
    else if (r < 0.2) c.shown_name = a.name.substr(0, a.name.find(' '));
    if (rng_.chance(0.15)) c.shown_email = ascii_upper(a.email.substr(0, 1)) + a.email.substr(1);
    else if (rng_.chance(0.05)) c.shown_email = ascii_upper(a.email);
  }
}

std::string pick_attr(Rng& rng, const LibInfo& lib) {
  static const std::vector<std::string> generic = {"core", "load", "run", "build"};
  if (!lib.symbols.empty() && rng.chance(0.6)) return rng.pick(lib.symbols);
  return rng.pick(generic);
}

Line RepoGen::import_line(int lib, BindCounts& live, bool allow_multi) {
  const LibInfo& L = libs_[static_cast<std::size_t>(lib)];
  for (int attempt = 0; attempt < 8; ++attempt) {
    Line line;
    line.import = true;
    std::string text;
    std::vector<Bind> binds;
    std::set<int> tagged = {lib};
    const int form = static_cast<int>(rng_.below(allow_multi ? 11 : 10));
    const std::string sub = L.submodules.empty() ? std::string() : rng_.pick(L.submodules);
    const auto alias_for = [&]() -> std::string {
      if (!L.alias.empty() && !rng_.chance(0.35)) return L.alias;
      return rng_.pick(shared_aliases());
    };
    switch (form) {
      case 0:
        text = "import " + L.name;
        binds.push_back({L.name, lib});
        break;
      case 1: {
        const std::string a = alias_for();
        text = "import " + L.name + " as " + a;
        binds.push_back({a, lib});
        break;
      }
      case 2:
        if (sub.empty()) continue;
        text = "import " + L.name + "." + sub;
        binds.push_back({L.name, lib});
        break;
      case 3: {
        if (sub.empty()) continue;
        const std::string a = sub_alias(L, sub);
        text = "import " + L.name + "." + sub + " as " + a;
        binds.push_back({a, lib});
        break;
      }
      case 4: {
        const std::string s1 = rng_.pick(L.symbols);
        text = "from " + L.name + " import " + s1;
        binds.push_back({s1, lib});
        if (L.symbols.size() > 1 && rng_.chance(0.4)) {
          std::string s2 = rng_.pick(L.symbols);
          if (s2 != s1) {
            text += ", " + s2;
            binds.push_back({s2, lib});
          }
        }
        break;
      }
      case 5: {
        const std::string a = rng_.pick(shared_aliases());
        text = "from " + L.name + " import " + rng_.pick(L.symbols) + " as " + a;
        binds.push_back({a, lib});
        break;
      }
      case 6: {
        if (sub.empty()) continue;
        const std::string s1 = rng_.pick(L.symbols);
        text = "from " + L.name + "." + sub + " import " + s1;
        binds.push_back({s1, lib});
        break;
      }
      case 7:
        text = "from " + L.name + " import *";
        break;
      case 8: {
        if (L.symbols.size() < 2) continue;
        const std::string s1 = L.symbols[0], s2 = L.symbols[1];
        text = "from " + L.name + " import (" + s1 + ", " + s2 + ")";
        binds.push_back({s1, lib});
        binds.push_back({s2, lib});
        break;
      }
      case 9: {
        if (sub.empty()) continue;
        const std::string a = sub_alias(L, sub);
        text = "from " + L.name + " import " + sub + " as " + a;
        binds.push_back({a, lib});
        break;
      }
      case 10: {
        const int other = rng_.pick(palette_);
        if (other == lib) continue;
        const LibInfo& O = libs_[static_cast<std::size_t>(other)];
        text = "import " + L.name + ", " + O.name;
        binds.push_back({L.name, lib});
        binds.push_back({O.name, other});
        tagged.insert(other);
        break;
      }
    }
    bool ok = true;
    for (const auto& b : binds) {
      if (token_conflicts(live, b.token, b.lib)) ok = false;
    }
    if (!ok) continue;
    if (rng_.chance(0.1)) text = "    " + text;
    if (rng_.chance(0.1)) text += "  # noqa: F401";
    line.text = text;
    line.binds = binds;
    line.libs.assign(tagged.begin(), tagged.end());
    for (const auto& b : binds) ++live[{b.token, b.lib}];
    return line;
  }
  // the library's own name is never bound to anything else
  Line line;
  line.import = true;
  line.text = "import " + L.name;
  line.binds = {{L.name, lib}};
  line.libs = {lib};
  ++live[{L.name, lib}];
  return line;
}

struct Usable {
  std::string token;
  int lib;
  bool module;  // takes attribute access
  bool own;
};

std::vector<Usable> usable_tokens(const BindCounts& live, const std::vector<LibInfo>& libs) {
  std::vector<Usable> out;
  std::set<int> active;
  for (const auto& [key, n] : live) {
    if (n <= 0) continue;
    active.insert(key.second);
    const LibInfo& L = libs[static_cast<std::size_t>(key.second)];
    const bool symbol = std::find(L.symbols.begin(), L.symbols.end(), key.first) != L.symbols.end();
    out.push_back({key.first, key.second, !symbol, false});
  }
  for (int lib : active) out.push_back({libs[static_cast<std::size_t>(lib)].name, lib, true, true});
  return out;
}

std::string indent(Rng& rng) {
  const double r = rng.unit();
  if (r < 0.5) return "";
  if (r < 0.9) return "    ";
  if (r < 0.97) return "        ";
  return "\t";
}

std::string pick_arg(Rng& rng) {
  static const std::vector<std::string> args = {"x", "df", "1", "items", "'text'", "data, 2", "", "k + 1"};
  return rng.pick(args);
}

Line RepoGen::use_line(const BindCounts& live) {
  const auto tokens = usable_tokens(live, libs_);
  if (tokens.empty()) return plain_line();
  const Usable& u = rng_.pick(tokens);
  const LibInfo& L = libs_[static_cast<std::size_t>(u.lib)];
  Line line;
  std::set<int> tagged = {u.lib};
  line.deps.push_back({u.own ? std::string() : u.token, u.lib});
  const std::string i = indent(rng_);
  const std::string v = rng_.pick(plain_vars());
  std::string text;
  if (u.module) {
    const std::string a = pick_attr(rng_, L);
    switch (rng_.below(7)) {
      case 0: text = i + v + " = " + u.token + "." + a + "(" + pick_arg(rng_) + ")"; break;
      case 1: text = i + u.token + "." + a + "(" + pick_arg(rng_) + ")"; break;
      case 2: text = i + v + " = " + u.token + "." + a; break;
      case 3: text = i + "return " + u.token + "." + a + "(" + pick_arg(rng_) + ")"; break;
      case 4: text = i + "bins = " + u.token + "." + a + "(df.col.min(), df.col.max(), 10)"; break;
      case 5: text = i + v + " = " + u.token + "." + a + "('" + u.token + ".fake(')"; break;
      default: {
        const Usable& w = rng_.pick(tokens);
        const LibInfo& W = libs_[static_cast<std::size_t>(w.lib)];
        const std::string inner = w.module ? w.token + "." + pick_attr(rng_, W) + "(x)" : w.token + "(x)";
        text = i + v + " = " + u.token + "." + a + "(" + inner + ")";
        tagged.insert(w.lib);
        line.deps.push_back({w.own ? std::string() : w.token, w.lib});
      }
    }
  } else {
    switch (rng_.below(4)) {
      case 0: text = i + v + " = " + u.token + "(" + pick_arg(rng_) + ")"; break;
      case 1: text = i + u.token + "(" + pick_arg(rng_) + ")"; break;
      case 2: text = i + v + " = " + u.token + ".__name__"; break;
      default: text = i + v + " = [" + u.token + "(k) for k in items]"; break;
    }
  }
  if (rng_.chance(0.08)) text += "  # was " + u.token + ".old()";
  line.text = text;
  line.libs.assign(tagged.begin(), tagged.end());
  return line;
}

Line RepoGen::plain_line() {
  static const std::vector<std::string> fixed = {
      "",           "--counter",  "++counter",       "pass",          "return result",
      "from . import helpers",   "print(len(items))", "for k in range(10):", "if x is None:",
      "result = obj.method(x)", "\"\"\"Docstring line.\"\"\"", "msg = 'café ✓'", "total = min(x, y) + max(x, y)",
      "    value = str(k)",     "out = isinstance(obj, int)", "self.data = data"};
  Line l;
  const double r = rng_.unit();
  if (r < 0.15) {
    l.text = "def helper_" + std::to_string(rng_.below(1000)) + "(x):";
  } else if (r < 0.2) {
    l.text = "class Widget" + std::to_string(rng_.below(1000)) + ":";
  } else if (r < 0.45) {
    l.text = indent(rng_) + rng_.pick(plain_vars()) + " = " + rng_.pick(plain_vars()) + " + " +
             std::to_string(rng_.below(100));
  } else {
    l.text = rng_.pick(fixed);
  }
  return l;
}

Line RepoGen::distractor_line() {
  // Mentions library tokens only where they are not direct uses.
  std::vector<std::string> pool;
  for (int lib : palette_) {
    const LibInfo& L = libs_[static_cast<std::size_t>(lib)];
    pool.push_back(L.name);
    if (!L.alias.empty()) pool.push_back(L.alias);
    for (const auto& s : L.symbols) pool.push_back(s);
  }
  for (const auto& a : shared_aliases()) pool.push_back(a);
  const std::string t = rng_.pick(pool);
  const std::string i = indent(rng_);
  const std::string v = rng_.pick(plain_vars());
  Line l;
  switch (rng_.below(8)) {
    case 0: l.text = i + "print('" + t + ".zeros(')"; break;
    case 1: l.text = i + "# " + t + ".zeros(3)"; break;
    case 2: l.text = i + v + " = obj." + t + "(2)"; break;
    case 3: l.text = i + v + " = " + t; break;
    case 4: l.text = i + v + " = '''" + t + ".run()'''"; break;
    case 5: l.text = i + v + " = " + t + "_cache(1)"; break;
    case 6: l.text = i + v + " = \"" + t + "(\" + 'x'"; break;
    default: l.text = i + v + " = " + t + " (2)"; break;
  }
  return l;
}

// Builds an op list from a file's lines, the indices to delete, and the
// lines to insert (imports go to the top block, the rest anywhere below).
FileEdit assemble(const std::string& path, const std::vector<Line>& before, const std::set<std::size_t>& drop,
                  std::vector<Line> new_imports, std::vector<Line> new_body, Rng& rng) {
  FileEdit e;
  e.path = path;
  std::vector<std::pair<char, Line>> kept;  // survivors interleaved with deletions
  std::size_t import_end = 0;               // position in `kept` after the last surviving import
  for (std::size_t k = 0; k < before.size(); ++k) {
    kept.emplace_back(drop.count(k) ? '-' : ' ', before[k]);
    if (!drop.count(k) && before[k].import) import_end = kept.size();
  }
  std::vector<std::pair<char, Line>> ops(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(import_end));
  for (auto& l : new_imports) ops.emplace_back('+', std::move(l));
  std::vector<std::pair<char, Line>> tail(kept.begin() + static_cast<std::ptrdiff_t>(import_end), kept.end());
  for (auto& l : new_body) {
    const std::size_t at = rng.below(tail.size() + 1);
    tail.insert(tail.begin() + static_cast<std::ptrdiff_t>(at), {'+', std::move(l)});
  }
  ops.insert(ops.end(), tail.begin(), tail.end());
  e.ops = std::move(ops);
  return e;
}

FileEdit RepoGen::edit_python(const std::string& path, bool creating, bool first_commit) {
  const std::vector<Line> before = creating ? std::vector<Line>{} : files_.at(path);
  std::set<std::size_t> drop;
  std::vector<std::size_t> imports, others;
  for (std::size_t k = 0; k < before.size(); ++k) (before[k].import ? imports : others).push_back(k);
  if (!imports.empty() && rng_.chance(0.22)) drop.insert(rng_.pick(imports));
  const std::size_t nd = others.empty() ? 0 : rng_.below(std::min<std::size_t>(4, others.size() + 1));
  for (std::size_t k = 0; k < nd; ++k) drop.insert(rng_.pick(others));

  // cascade: drop lines whose bindings disappear
  std::vector<Line> survivors;
  for (std::size_t k = 0; k < before.size(); ++k) {
    if (!drop.count(k)) survivors.push_back(before[k]);
  }
  for (bool changed = true; changed;) {
    changed = false;
    const BindCounts live = bind_counts(survivors);
    for (std::size_t k = 0; k < before.size(); ++k) {
      if (drop.count(k)) continue;
      if (!deps_hold(before[k], live)) {
        drop.insert(k);
        changed = true;
      }
    }
    if (changed) {
      survivors.clear();
      for (std::size_t k = 0; k < before.size(); ++k) {
        if (!drop.count(k)) survivors.push_back(before[k]);
      }
    }
  }

  BindCounts live = bind_counts(survivors);
  std::vector<Line> new_imports, body;
  std::size_t n_imports = 0;
  if (!palette_.empty()) {
    if (creating) n_imports = first_commit ? static_cast<std::size_t>(rng_.range(1, 3)) : rng_.below(3);
    else if (rng_.chance(0.3)) n_imports = 1;
  }
  for (std::size_t k = 0; k < n_imports; ++k) new_imports.push_back(import_line(rng_.pick(palette_), live, true));
  const std::size_t uses = rng_.below(6);
  for (std::size_t k = 0; k < uses; ++k) body.push_back(use_line(live));
  const std::size_t plains = rng_.below(4);
  for (std::size_t k = 0; k < plains; ++k) body.push_back(plain_line());
  if (rng_.chance(0.25)) body.push_back(distractor_line());
  if (drop.empty() && new_imports.empty() && body.empty()) body.push_back(plain_line());

  FileEdit e = assemble(path, before, drop, std::move(new_imports), std::move(body), rng_);
  e.before_exists = !creating;
  e.after_exists = true;
  e.index_before = creating ? "0000000" : hex(rng_, 7);
  e.index_after = hex(rng_, 7);
  return e;
}

FileEdit RepoGen::delete_file(const std::string& path) {
  FileEdit e;
  e.path = path;
  e.before_exists = true;
  e.after_exists = false;
  for (const auto& l : files_.at(path)) e.ops.emplace_back('-', l);
  e.index_before = hex(rng_, 7);
  return e;
}

FileEdit RepoGen::edit_text(const std::string& path, bool python_like) {
  static const std::vector<std::string> prose = {"# Project", "Usage: run the tool", "import numpy as np",
                                                 "np.zeros(3)", "from pandas import *", "See docs/ for details.",
                                                 "--verbose enables logging", "++ experimental"};
  const bool creating = !files_.count(path);
  const std::vector<Line> before = creating ? std::vector<Line>{} : files_.at(path);
  std::set<std::size_t> drop;
  if (!before.empty() && rng_.chance(0.5)) drop.insert(rng_.below(before.size()));
  std::vector<Line> body;
  const std::size_t n = 1 + rng_.below(3);
  for (std::size_t k = 0; k < n; ++k) {
    Line l;
    if (python_like) {
      // imports and uses that would count in a .py file
      const LibInfo& L = libs_[static_cast<std::size_t>(rng_.below(libs_.size()))];
      l.text = rng_.chance(0.5) ? "import " + L.name : L.name + "." + pick_attr(rng_, L) + "(x)";
    } else {
      l.text = rng_.pick(prose);
    }
    body.push_back(l);
  }
  FileEdit e = assemble(path, before, drop, {}, std::move(body), rng_);
  e.before_exists = !creating;
  e.after_exists = true;
  e.no_newline = !python_like;
  e.index_before = creating ? "0000000" : hex(rng_, 7);
  e.index_after = hex(rng_, 7);
  return e;
}

FileEdit RepoGen::edit_binary() {
  FileEdit e;
  e.path = "assets/logo.png";
  e.binary = true;
  e.before_exists = logo_exists_;
  e.after_exists = true;
  e.index_before = logo_exists_ ? hex(rng_, 7) : "0000000";
  e.index_after = hex(rng_, 7);
  return e;
}

std::vector<FileEdit> RepoGen::plant_edits(const PlantPart& part) {
  const bool exists = files_.count(kPlantPath) > 0;
  const std::vector<Line> before = exists ? files_.at(kPlantPath) : std::vector<Line>{};
  bool has_import = false;
  std::size_t uses = 0;
  for (const auto& l : before) {
    if (l.import) has_import = true;
    else if (!l.libs.empty()) ++uses;
  }
  const LibInfo& L = libs_[static_cast<std::size_t>(plant_lib_)];
  const auto use = [&]() {
    Line l;
    l.text = "    " + rng_.pick(plain_vars()) + " = " + plant_token_ + "." + pick_attr(rng_, L) + "(" +
             pick_arg(rng_) + ")";
    l.libs = {plant_lib_};
    l.deps.push_back({plant_token_ == L.name ? std::string() : plant_token_, plant_lib_});
    return l;
  };
  std::set<std::size_t> drop;
  std::vector<Line> imports, body;
  if (part.net > 0) {
    std::int64_t n = part.net;
    if (!has_import) {
      Line imp;
      imp.import = true;
      imp.text = plant_token_ == L.name ? "import " + L.name : "import " + L.name + " as " + plant_token_;
      imp.libs = {plant_lib_};
      imp.binds.push_back({plant_token_, plant_lib_});
      imports.push_back(imp);
      --n;
    }
    for (std::int64_t k = 0; k < n; ++k) body.push_back(use());
    if (!exists) {
      Line doc;
      doc.text = "\"\"\"Contested helpers.\"\"\"";
      body.insert(body.begin(), doc);
    }
  } else {
    const std::int64_t total = static_cast<std::int64_t>(uses) + (has_import ? 1 : 0);
    const bool wipe = total + part.net == 0;
    std::int64_t to_drop = wipe ? static_cast<std::int64_t>(uses) : -part.net;
    std::vector<std::size_t> use_idx;
    for (std::size_t k = 0; k < before.size(); ++k) {
      if (!before[k].import && !before[k].libs.empty()) use_idx.push_back(k);
      if (wipe && before[k].import) drop.insert(k);
    }
    for (std::size_t k = use_idx.size(); k > 1; --k) std::swap(use_idx[k - 1], use_idx[rng_.below(k)]);
    for (std::int64_t k = 0; k < to_drop; ++k) drop.insert(use_idx[static_cast<std::size_t>(k)]);
  }
  // keep the docstring first: new body lines go after it
  FileEdit e = assemble(kPlantPath, before, drop, std::move(imports), {}, rng_);
  for (auto& l : body) e.ops.emplace_back('+', std::move(l));
  e.before_exists = exists;
  e.after_exists = true;
  e.index_before = exists ? hex(rng_, 7) : "0000000";
  e.index_after = hex(rng_, 7);
  return {e};
}

void RepoGen::apply(const FileEdit& e) {
  if (e.binary) {
    logo_exists_ = e.after_exists;
    return;
  }
  if (!e.after_exists) {
    files_.erase(e.path);
    python_files_.erase(e.path);
    return;
  }
  std::vector<Line> after;
  for (const auto& [kind, line] : e.ops) {
    if (kind != '-') after.push_back(line);
  }
  files_[e.path] = std::move(after);
  if (is_python_path(e.path) && e.path != kPlantPath) python_files_.insert(e.path);
}

TruthCommit RepoGen::truth_of(const GenCommit& c, std::uint64_t ordinal) const {
  TruthCommit t;
  t.hash = c.hash;
  t.parents = c.parents;
  t.ordinal = ordinal;
  t.author = authors_[static_cast<std::size_t>(c.author)].key;
  t.ts = c.ts;
  t.merge = c.kind == Kind::Merge;
  if (t.merge) return t;
  for (const auto& e : c.edits) {
    if (e.binary || !is_python_path(e.path)) continue;
    for (const auto& [kind, line] : e.ops) {
      if (kind == ' ') continue;
      for (int lib : line.libs) {
        auto& d = t.libraries[libs_[static_cast<std::size_t>(lib)].name];
        if (kind == '+') {
          ++d.added;
          d.import_added = d.import_added || line.import;
        } else {
          ++d.deleted;
          d.import_removed = d.import_removed || line.import;
        }
      }
    }
  }
  return t;
}

std::map<std::string, std::int64_t> RepoGen::snapshot() const {
  std::map<std::string, std::int64_t> out;
  for (const auto& [path, lines] : files_) {
    if (!is_python_path(path)) continue;
    for (const auto& l : lines) {
      for (int lib : l.libs) ++out[libs_[static_cast<std::size_t>(lib)].name];
    }
  }
  return out;
}

TruthRepo RepoGen::run(std::string& log_text) {
  std::vector<GenCommit> commits;
  std::string main_head, side_head;
  bool side_open = false;
  std::vector<std::size_t> side_commits;
  bool prev_skewed = false;

  for (std::size_t i = 0; i < commit_count_; ++i) {
    GenCommit c;
    const bool in_plant = plant_lib_ >= 0 && i >= plant_start_ && i < plant_start_ + plant_parts_.size();
    bool to_side = false;

    if (in_plant) {
      c.kind = Kind::Plant;
    } else if (i > 0 && side_open && !side_commits.empty() && rng_.chance(spec_.merge_rate)) {
      c.kind = Kind::Merge;
    } else if (i > 0 && rng_.chance(spec_.revert_rate) &&
               (commits.back().kind == Kind::Edit || commits.back().kind == Kind::Revert ||
                commits.back().kind == Kind::Docs || commits.back().kind == Kind::Binary)) {
      c.kind = Kind::Revert;
    } else if (i == 0) {
      c.kind = Kind::Edit;
    } else {
      const double r = rng_.unit();
      c.kind = r < 0.85 ? Kind::Edit : r < 0.93 ? Kind::Docs : r < 0.97 ? Kind::Binary : Kind::Stub;
    }

    if (c.kind != Kind::Plant && c.kind != Kind::Merge && i >= 2) {
      if (!side_open && rng_.chance(spec_.branch_rate)) {
        side_open = true;
        side_head = main_head;
        side_commits.clear();
        to_side = true;
      } else if (side_open) {
        to_side = rng_.chance(0.5);
      }
    }

    // parents
    if (c.kind == Kind::Merge) {
      c.parents = {main_head, side_head};
    } else if (i > 0) {
      c.parents = {to_side ? side_head : main_head};
    }

    // content
    switch (c.kind) {
      case Kind::Plant: {
        const PlantPart& part = plant_parts_[i - plant_start_];
        c.edits = plant_edits(part);
        stamp(c, part.adopter ? plant_adopter_ : plant_rival_);
        break;
      }
      case Kind::Merge: {
        for (std::size_t k : side_commits) c.diff += commits[k].diff;
        stamp(c, pick_author());
        break;
      }
      case Kind::Revert: {
        const auto& prev = commits.back().edits;
        for (auto it = prev.rbegin(); it != prev.rend(); ++it) c.edits.push_back(inverted(*it));
        stamp(c, pick_author());
        break;
      }
      case Kind::Edit: {
        const bool first = i == 0 || python_files_.empty();
        std::vector<std::string> existing(python_files_.begin(), python_files_.end());
        if (existing.empty() || (existing.size() < 6 && rng_.chance(0.15))) {
          const std::string path = rng_.chance(0.8) ? "pkg/module_" + std::to_string(next_module_++) + ".py"
                                                    : "scripts/tool_" + std::to_string(next_module_++) + ".py";
          c.edits.push_back(edit_python(path, true, first));
        } else if (existing.size() >= 2 && rng_.chance(0.03)) {
          c.edits.push_back(delete_file(rng_.pick(existing)));
        } else {
          const std::string a = rng_.pick(existing);
          c.edits.push_back(edit_python(a, false, false));
          const std::string b = rng_.pick(existing);
          if (b != a && rng_.chance(0.3)) c.edits.push_back(edit_python(b, false, false));
          if (rng_.chance(0.05)) c.edits.push_back(edit_text("README.md", false));
        }
        stamp(c, pick_author());
        break;
      }
      case Kind::Docs:
        c.edits.push_back(edit_text(rng_.chance(0.7) ? "README.md" : "docs/notes.txt", false));
        stamp(c, pick_author());
        break;
      case Kind::Stub:
        c.edits.push_back(edit_text("stubs/api.pyi", true));
        stamp(c, pick_author());
        break;
      case Kind::Binary:
        c.edits.push_back(edit_binary());
        stamp(c, pick_author());
        break;
    }
    for (const auto& e : c.edits) apply(e);
    if (c.kind != Kind::Merge) {
      for (const auto& e : c.edits) c.diff += emit_file(e);
    }

    // Timestamps rise with creation order except for ties (equal to the
    // previous commit, larger hash) and skews (older than the parent they
    // follow directly), so linearization reproduces creation order.
    const bool follows_prev = i > 0 && c.parents.size() == 1 && c.parents[0] == commits.back().hash;
    if (i > 0 && !prev_skewed && rng_.chance(spec_.tie_rate)) {
      c.ts = commits.back().ts;
      c.hash = fresh_hash(&commits.back().hash);
      prev_skewed = false;
    } else if (follows_prev && rng_.chance(spec_.skew_rate)) {
      c.ts = clock_ - rng_.range(86400, 30 * 86400);
      c.skewed = true;
      c.hash = fresh_hash(nullptr);
      prev_skewed = true;
    } else {
      clock_ += rng_.range(600, 3 * 86400);
      c.ts = clock_;
      c.hash = fresh_hash(nullptr);
      prev_skewed = false;
    }

    if (c.kind == Kind::Merge) {
      main_head = c.hash;
      side_open = false;
      side_commits.clear();
    } else if (to_side) {
      side_head = c.hash;
      side_commits.push_back(commits.size());
    } else {
      main_head = c.hash;
    }
    repo_.commits.push_back(truth_of(c, i));
    repo_.snapshot_loc.push_back(snapshot());
    // only the newest commit's edits are needed (for reverts)
    if (!commits.empty()) commits.back().edits.clear();
    commits.push_back(std::move(c));
  }

  if (plant_lib_ >= 0) {
    TruthPlant p;
    p.library = libs_[static_cast<std::size_t>(plant_lib_)].name;
    p.adopter = authors_[static_cast<std::size_t>(plant_adopter_)].key;
    p.rival = authors_[static_cast<std::size_t>(plant_rival_)].key;
    p.epsilon = plant_->epsilon;
    p.rounds = plant_->rounds;
    p.first_ordinal = plant_start_;
    repo_.plants.push_back(p);
  }

  // git prints newest first
  std::string text;
  for (auto it = commits.rbegin(); it != commits.rend(); ++it) {
    const GenCommit& c = *it;
    std::string parents;
    for (const auto& p : c.parents) parents += (parents.empty() ? "" : " ") + p;
    text += "\x01" "COMMIT\x01" + c.hash + "\x01" + parents + "\x01" + c.shown_name + "\x01" + c.shown_email + "\x01" +
            std::to_string(c.ts) + "\x01\n";
    if (!c.diff.empty()) text += "\n" + c.diff;
  }
  log_text = std::move(text);
  return std::move(repo_);
}

}  // namespace

// --- truth derivation ------------------------------------------------------

std::vector<TruthFight> derive_truth_fights(const TruthRepo& repo, const std::vector<TruthAdoption>& adoptions,
                                            Epsilon epsilon) {
  const FightConfig cfg{epsilon, Comparator::RemovalAtLeastOneMinusEps};
  std::vector<TruthFight> out;
  for (const auto& a : adoptions) {
    // one (author, net, first ordinal) entry per maximal same-author run
    struct Run {
      std::string author;
      std::int64_t net;
      std::uint64_t first;
    };
    std::vector<Run> runs = {{a.adopter, a.initial_loc, a.ordinal}};
    for (const auto& c : repo.commits) {
      if (c.ordinal <= a.ordinal) continue;
      const auto it = c.libraries.find(a.library);
      if (it == c.libraries.end()) continue;
      const std::int64_t net = it->second.added - it->second.deleted;
      if (net == 0) continue;
      if (runs.back().author == c.author) runs.back().net += net;
      else runs.push_back({c.author, net, c.ordinal});
    }
    if (runs.size() < 2) continue;
    const std::string& u = runs[0].author;
    const std::string& v = runs[1].author;
    std::int64_t total = 0;
    std::optional<std::size_t> trigger;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (runs[r].author != u && runs[r].author != v) break;
      const std::int64_t prev = total;
      total += runs[r].net;
      if (r > 0 && runs[r].author == v && crosses_threshold(prev, total, cfg)) {
        trigger = r;
        break;
      }
    }
    if (!trigger) continue;
    std::size_t last = *trigger;
    while (last + 1 < runs.size() && (runs[last + 1].author == u || runs[last + 1].author == v)) ++last;
    out.push_back(TruthFight{epsilon, a.library, u, v, runs[last].author, runs[*trigger].first, last + 1});
  }
  return out;
}

namespace {

std::vector<TruthAdoption> derive_adoptions(const TruthRepo& repo) {
  std::set<std::string> seen;
  std::vector<TruthAdoption> out;
  for (const auto& c : repo.commits) {
    for (const auto& [lib, d] : c.libraries) {
      if (!seen.insert(lib).second) continue;
      if (d.added > 0) out.push_back({lib, c.ordinal, c.author, d.added});
    }
  }
  return out;
}

void finish_truth(GroundTruth& truth, const CorpusSpec& spec) {
  truth.commits_per_repo.clear();
  truth.adoptions_per_repo.clear();
  truth.team_size.clear();
  truth.adoptions_at_index.clear();
  truth.first_commit_ts.clear();
  for (auto& repo : truth.repos) {
    repo.adoptions = derive_adoptions(repo);
    std::set<std::string> team;
    for (const auto& c : repo.commits) {
      team.insert(c.author);
      const auto [it, inserted] = truth.first_commit_ts.emplace(c.author, c.ts);
      if (!inserted) it->second = std::min(it->second, c.ts);
    }
    repo.team.assign(team.begin(), team.end());
    repo.fights.clear();
    for (const auto& eps : spec.epsilons) {
      auto f = derive_truth_fights(repo, repo.adoptions, eps);
      repo.fights.insert(repo.fights.end(), f.begin(), f.end());
    }
    ++truth.commits_per_repo[static_cast<std::int64_t>(repo.commits.size())];
    ++truth.adoptions_per_repo[static_cast<std::int64_t>(repo.adoptions.size())];
    ++truth.team_size[static_cast<std::int64_t>(repo.team.size())];
    for (const auto& a : repo.adoptions) ++truth.adoptions_at_index[a.ordinal];
  }
}

}  // namespace

// --- spec ------------------------------------------------------------------

void CorpusSpec::validate() const {
  if (repo_count == 0) throw SpecError("repo_count must be positive");
  if (min_commits == 0 || min_commits > max_commits) throw SpecError("commit range must satisfy 1 <= min <= max");
  if (min_team == 0 || min_team > max_team) throw SpecError("team range must satisfy 1 <= min <= max");
  if (commit_alpha < 0 || team_alpha < 0 || commit_shift < 0) throw SpecError("distribution parameters must be >= 0");
  for (double p : {plant_rate, branch_rate, merge_rate, revert_rate, skew_rate, tie_rate}) {
    if (!(p >= 0 && p <= 1)) throw SpecError("rates must lie in [0, 1]");
  }
  if (epsilons.empty()) throw SpecError("epsilon list must not be empty");

  std::set<std::string> names;
  for (const auto& l : libraries) {
    if (!is_identifier(l)) throw SpecError("library name is not an identifier: " + l);
    if (!names.insert(l).second) throw SpecError("duplicate library: " + l);
  }
  // every token the generator can bind must be unambiguous
  std::map<std::string, std::string> owner;
  const auto claim = [&](const std::string& token, const std::string& who) {
    const auto [it, inserted] = owner.emplace(token, who);
    if (!inserted && it->second != who) throw SpecError("token '" + token + "' is claimed by " + it->second + " and " + who);
  };
  for (const auto& r : reserved_names()) claim(r, "<reserved>");
  for (const auto& a : shared_aliases()) claim(a, "<shared>");
  const auto& pool = libraries.empty() ? builtin_library_pool() : libraries;
  for (const auto& name : pool) {
    const LibInfo L = info_for(name);
    claim(L.name, L.name);
    if (!L.alias.empty()) claim(L.alias, L.name);
    for (const auto& s : L.symbols) claim(s, L.name);
    for (const auto& s : L.submodules) claim(sub_alias(L, s), L.name);
  }

  for (const auto& fp : fight_plants) {
    if (fp.rounds.size() < 2) throw SpecError("a fight plant needs at least two rounds");
    if (fp.rounds[0] <= 0) throw SpecError("a fight plant must open with S_0 > 0");
    std::int64_t total = 0;
    bool triggered = false;
    const FightConfig cfg{fp.epsilon, Comparator::RemovalAtLeastOneMinusEps};
    for (std::size_t r = 0; r < fp.rounds.size(); ++r) {
      if (fp.rounds[r] == 0) throw SpecError("fight plant rounds must be nonzero");
      const std::int64_t prev = total;
      total += fp.rounds[r];
      if (total < 0) throw SpecError("fight plant drives the LOC total below zero");
      if (prev == 0 && r > 0 && fp.rounds[r] < 0) throw SpecError("fight plant deletes from an empty total");
      if (r % 2 == 1 && !triggered && crosses_threshold(prev, total, cfg)) triggered = true;
    }
    if (!triggered) throw SpecError("fight plant never crosses the threshold at epsilon " + fp.epsilon.label());
  }
}

json CorpusSpec::to_json() const {
  json j = json::object();
  j["seed"] = seed;
  j["repo_count"] = repo_count;
  j["min_commits"] = min_commits;
  j["max_commits"] = max_commits;
  j["commit_alpha"] = commit_alpha;
  j["commit_shift"] = commit_shift;
  j["min_team"] = min_team;
  j["max_team"] = max_team;
  j["team_alpha"] = team_alpha;
  j["author_pool"] = author_pool;
  j["libraries"] = libraries;
  json plants = json::array();
  for (const auto& fp : fight_plants) plants.push_back({{"epsilon", fp.epsilon.label()}, {"rounds", fp.rounds}});
  j["fight_plants"] = plants;
  j["plant_rate"] = plant_rate;
  j["branch_rate"] = branch_rate;
  j["merge_rate"] = merge_rate;
  j["revert_rate"] = revert_rate;
  j["skew_rate"] = skew_rate;
  j["tie_rate"] = tie_rate;
  json eps = json::array();
  for (const auto& e : epsilons) eps.push_back(e.label());
  j["epsilons"] = eps;
  j["start_ts"] = start_ts;
  return j;
}

CorpusSpec CorpusSpec::from_json(const json& j) {
  CorpusSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    s.repo_count = j.value("repo_count", s.repo_count);
    s.min_commits = j.value("min_commits", s.min_commits);
    s.max_commits = j.value("max_commits", s.max_commits);
    s.commit_alpha = j.value("commit_alpha", s.commit_alpha);
    s.commit_shift = j.value("commit_shift", s.commit_shift);
    s.min_team = j.value("min_team", s.min_team);
    s.max_team = j.value("max_team", s.max_team);
    s.team_alpha = j.value("team_alpha", s.team_alpha);
    s.author_pool = j.value("author_pool", s.author_pool);
    s.libraries = j.value("libraries", s.libraries);
    if (j.contains("fight_plants")) {
      for (const auto& p : j.at("fight_plants")) {
        FightPlant fp;
        const auto& e = p.at("epsilon");
        fp.epsilon = e.is_string() ? Epsilon::parse(e.get<std::string>())
                                   : Epsilon::from_basis_points(static_cast<int>(std::lround(e.get<double>() * 10000)));
        fp.rounds = p.at("rounds").get<std::vector<std::int64_t>>();
        s.fight_plants.push_back(fp);
      }
    }
    s.plant_rate = j.value("plant_rate", s.plant_rate);
    s.branch_rate = j.value("branch_rate", s.branch_rate);
    s.merge_rate = j.value("merge_rate", s.merge_rate);
    s.revert_rate = j.value("revert_rate", s.revert_rate);
    s.skew_rate = j.value("skew_rate", s.skew_rate);
    s.tie_rate = j.value("tie_rate", s.tie_rate);
    if (j.contains("epsilons")) {
      s.epsilons.clear();
      for (const auto& e : j.at("epsilons")) s.epsilons.push_back(Epsilon::parse(e.get<std::string>()));
    }
    s.start_ts = j.value("start_ts", s.start_ts);
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed corpus spec: ") + e.what());
  } catch (const UsageError& e) {
    throw SpecError(e.what());
  }
  return s;
}

const std::vector<std::string>& builtin_library_pool() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& l : builtin_libs()) v.push_back(l.name);
    return v;
  }();
  return names;
}

// --- corpus ----------------------------------------------------------------

SyntheticCorpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  std::vector<LibInfo> libs;
  for (const auto& name : spec.libraries.empty() ? builtin_library_pool() : spec.libraries) libs.push_back(info_for(name));

  Rng people(mix(spec.seed));
  const std::size_t pool = spec.author_pool ? spec.author_pool : std::max<std::size_t>(3 * spec.repo_count, spec.max_team);
  const auto authors = make_authors(pool, people);
  const PowerLaw commits_law(spec.min_commits, spec.max_commits, spec.commit_alpha, spec.commit_shift);
  const PowerLaw team_law(spec.min_team, spec.max_team, spec.team_alpha, 0);

  SyntheticCorpus corpus;
  corpus.truth.seed = spec.seed;
  for (std::size_t r = 0; r < spec.repo_count; ++r) {
    RepoGen gen(spec, libs, authors, r, commits_law, team_law);
    RepoLog log;
    TruthRepo repo = gen.run(log.text);
    log.repo_id = repo.repo_id;
    corpus.logs.push_back(std::move(log));
    corpus.truth.repos.push_back(std::move(repo));
  }
  finish_truth(corpus.truth, spec);
  return corpus;
}

std::size_t GroundTruth::total_commits() const {
  std::size_t n = 0;
  for (const auto& r : repos) n += r.commits.size();
  return n;
}

std::size_t GroundTruth::total_adoptions() const {
  std::size_t n = 0;
  for (const auto& r : repos) n += r.adoptions.size();
  return n;
}

namespace {

template <class K>
json histogram_json(const std::map<K, std::size_t>& m) {
  json out = json::array();
  for (const auto& [k, v] : m) out.push_back(json::array({k, v}));
  return out;
}

template <class K>
std::map<K, std::size_t> histogram_from(const json& j) {
  std::map<K, std::size_t> m;
  for (const auto& kv : j) m[kv.at(0).get<K>()] = kv.at(1).get<std::size_t>();
  return m;
}

}  // namespace

json GroundTruth::to_json() const {
  json j = json::object();
  j["format"] = "adoptminer-truth";
  j["format_version"] = 1;
  j["seed"] = seed;
  json rs = json::array();
  for (const auto& r : repos) {
    json jr = json::object();
    jr["repo_id"] = r.repo_id;
    jr["log_file"] = r.log_file;
    jr["team"] = r.team;
    json cs = json::array();
    for (const auto& c : r.commits) {
      json libs = json::object();
      for (const auto& [lib, d] : c.libraries) {
        libs[lib] = json::array({d.added, d.deleted, d.import_added ? 1 : 0, d.import_removed ? 1 : 0});
      }
      cs.push_back({{"hash", c.hash},
                    {"parents", c.parents},
                    {"ordinal", c.ordinal},
                    {"author", c.author},
                    {"ts", c.ts},
                    {"merge", c.merge},
                    {"libraries", libs}});
    }
    jr["commits"] = cs;
    json as = json::array();
    for (const auto& a : r.adoptions) {
      as.push_back({{"library", a.library}, {"ordinal", a.ordinal}, {"adopter", a.adopter}, {"initial_loc", a.initial_loc}});
    }
    jr["adoptions"] = as;
    json fs = json::array();
    for (const auto& f : r.fights) {
      fs.push_back({{"epsilon", f.epsilon.label()},
                    {"library", f.library},
                    {"adopter", f.adopter},
                    {"deleter", f.deleter},
                    {"winner", f.winner},
                    {"trigger_ordinal", f.trigger_ordinal},
                    {"rounds", f.rounds}});
    }
    jr["fights"] = fs;
    json ps = json::array();
    for (const auto& p : r.plants) {
      ps.push_back({{"library", p.library},
                    {"adopter", p.adopter},
                    {"rival", p.rival},
                    {"epsilon", p.epsilon.label()},
                    {"rounds", p.rounds},
                    {"first_ordinal", p.first_ordinal}});
    }
    jr["plants"] = ps;
    rs.push_back(std::move(jr));
  }
  j["repos"] = rs;
  j["first_commit_ts"] = first_commit_ts;
  j["commits_per_repo"] = histogram_json(commits_per_repo);
  j["adoptions_per_repo"] = histogram_json(adoptions_per_repo);
  j["team_size"] = histogram_json(team_size);
  j["adoptions_at_index"] = histogram_json(adoptions_at_index);
  return j;
}

GroundTruth GroundTruth::from_json(const json& j) {
  GroundTruth t;
  try {
    if (j.value("format", std::string()) != "adoptminer-truth") throw SpecError("not a truth manifest");
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jr : j.at("repos")) {
      TruthRepo r;
      r.repo_id = jr.at("repo_id").get<std::string>();
      r.log_file = jr.at("log_file").get<std::string>();
      r.team = jr.at("team").get<std::vector<std::string>>();
      for (const auto& jc : jr.at("commits")) {
        TruthCommit c;
        c.hash = jc.at("hash").get<std::string>();
        c.parents = jc.at("parents").get<std::vector<std::string>>();
        c.ordinal = jc.at("ordinal").get<std::uint64_t>();
        c.author = jc.at("author").get<std::string>();
        c.ts = jc.at("ts").get<std::int64_t>();
        c.merge = jc.at("merge").get<bool>();
        for (const auto& [lib, d] : jc.at("libraries").items()) {
          c.libraries[lib] = TruthLibraryDelta{d.at(0).get<std::int64_t>(), d.at(1).get<std::int64_t>(),
                                               d.at(2).get<int>() != 0, d.at(3).get<int>() != 0};
        }
        r.commits.push_back(std::move(c));
      }
      for (const auto& ja : jr.at("adoptions")) {
        r.adoptions.push_back({ja.at("library").get<std::string>(), ja.at("ordinal").get<std::uint64_t>(),
                               ja.at("adopter").get<std::string>(), ja.at("initial_loc").get<std::int64_t>()});
      }
      for (const auto& jf : jr.at("fights")) {
        r.fights.push_back({Epsilon::parse(jf.at("epsilon").get<std::string>()), jf.at("library").get<std::string>(),
                            jf.at("adopter").get<std::string>(), jf.at("deleter").get<std::string>(),
                            jf.at("winner").get<std::string>(), jf.at("trigger_ordinal").get<std::uint64_t>(),
                            jf.at("rounds").get<std::size_t>()});
      }
      for (const auto& jp : jr.at("plants")) {
        r.plants.push_back({jp.at("library").get<std::string>(), jp.at("adopter").get<std::string>(),
                            jp.at("rival").get<std::string>(), Epsilon::parse(jp.at("epsilon").get<std::string>()),
                            jp.at("rounds").get<std::vector<std::int64_t>>(), jp.at("first_ordinal").get<std::uint64_t>()});
      }
      t.repos.push_back(std::move(r));
    }
    t.first_commit_ts = j.at("first_commit_ts").get<std::map<std::string, std::int64_t>>();
    t.commits_per_repo = histogram_from<std::int64_t>(j.at("commits_per_repo"));
    t.adoptions_per_repo = histogram_from<std::int64_t>(j.at("adoptions_per_repo"));
    t.team_size = histogram_from<std::int64_t>(j.at("team_size"));
    t.adoptions_at_index = histogram_from<std::uint64_t>(j.at("adoptions_at_index"));
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed truth manifest: ") + e.what());
  }
  return t;
}

void write_corpus(const SyntheticCorpus& corpus, const CorpusSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "repos");
  std::string manifest;
  for (const auto& log : corpus.logs) {
    const std::string rel = "repos/" + log.repo_id + ".log";
    write_file_atomic(dir / rel, log.text);
    json line = json::object();
    line["repo_id"] = log.repo_id;
    line["path"] = rel;
    manifest += line.dump() + "\n";
  }
  write_file_atomic(dir / "manifest.jsonl", manifest);
  write_file_atomic(dir / "truth.json", corpus.truth.to_json().dump() + "\n");
  write_file_atomic(dir / "spec.json", spec.to_json().dump(2) + "\n");
}

}  // namespace adoptminer
