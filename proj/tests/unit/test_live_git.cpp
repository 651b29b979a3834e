// Validates the Raw Log Format parser against output of the installed git.
// Exits 77 (skipped) when git is unavailable.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "adoptminer/history.hpp"
#include "adoptminer/imports.hpp"
#include "adoptminer/text.hpp"

namespace fs = std::filesystem;
using namespace adoptminer;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (!ok) {
    std::cerr << "FAILED: " << what << "\n";
    ++failures;
  }
}

bool sh(const fs::path& dir, const std::string& cmd) {
  const std::string env =
      "export GIT_AUTHOR_NAME='Ada Moreno' GIT_AUTHOR_EMAIL=ada@example.org GIT_COMMITTER_NAME='Ada Moreno' "
      "GIT_COMMITTER_EMAIL=ada@example.org GIT_CONFIG_NOSYSTEM=1 HOME='" + dir.string() + "'; ";
  return std::system(("cd '" + dir.string() + "' && " + env + "{ " + cmd + "; } > /dev/null 2>&1").c_str()) == 0;
}

std::string date(int t) { return "GIT_AUTHOR_DATE='" + std::to_string(t) + " +0000' GIT_COMMITTER_DATE='" + std::to_string(t) + " +0000' "; }

}  // namespace

int main() {
  if (std::system("git --version > /dev/null 2>&1") != 0) {
    std::cout << "git not found, skipping\n";
    return 77;
  }
  const fs::path dir = fs::temp_directory_path() / ("adoptminer-live-git-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);

  bool ok = sh(dir, "git init -q . && git checkout -q -b main");
  write_file_atomic(dir / "a.py", "import numpy as np\nimport math\nx = np.zeros(3)\ny = math.sqrt(2)\n");
  ok = ok && sh(dir, "git add a.py && " + date(1500000000) + "git commit -q -m one");
  ok = ok && sh(dir, "git checkout -q -b side");
  write_file_atomic(dir / "b.py", "import pandas as pd\ndf = pd.DataFrame()\n");
  {
    std::string png = "\x89PNG\r\n\x1a\n";
    png += std::string("\0\0\0\rIHDR", 8);
    write_file_atomic(dir / "logo.png", png);
  }
  ok = ok && sh(dir, "git add b.py logo.png && " + date(1500000100) + "GIT_AUTHOR_EMAIL=Grace@Example.org git commit -q -m side");
  ok = ok && sh(dir, "git checkout -q main");
  write_file_atomic(dir / "a.py", "import numpy as np\nx = np.zeros(3)\nz = np.ones(2)\n");
  ok = ok && sh(dir, date(1500000200) + "git commit -q -am two");
  ok = ok && sh(dir, date(1500000300) + "git merge -q --no-edit side");
  ok = ok && sh(dir, "git log --all --no-renames -p --format='%x01COMMIT%x01%H%x01%P%x01%an%x01%ae%x01%at%x01' > log.txt");
  ok = ok && sh(dir, "git rev-list --all --parents > parents.txt");
  if (!ok) {
    std::cerr << "could not build the scratch repository\n";
    fs::remove_all(dir);
    return 1;
  }

  const auto parsed = parse_git_log("live", read_file(dir / "log.txt"));
  check(parsed.warnings.empty(), "no parse warnings");
  check(parsed.commits.size() == 4, "four commits");

  std::map<std::string, std::vector<std::string>> parents;
  std::istringstream rl(read_file(dir / "parents.txt"));
  for (std::string line; std::getline(rl, line);) {
    const auto parts = split(line, ' ');
    std::vector<std::string> ps;
    for (std::size_t k = 1; k < parts.size(); ++k) ps.emplace_back(parts[k]);
    parents[std::string(parts[0])] = ps;
  }
  std::size_t merges = 0;
  std::set<std::string> keys;
  for (const auto& c : parsed.commits) {
    check(parents.count(c.hash) == 1, "hash known to git: " + c.hash);
    check(parents[c.hash] == c.parent_hashes, "parents of " + c.hash);
    merges += c.is_merge;
    keys.insert(c.author.canonical_key);
    for (const auto& d : c.diffs) check(d.path != "logo.png", "binary diff skipped");
  }
  check(merges == 1, "one merge");
  check(keys == std::set<std::string>{"ada@example.org", "grace@example.org"}, "author keys");

  const auto order = linearize(parsed.commits);
  check(!order.empty() && order.back().is_merge, "merge linearized last");
  std::map<std::string, std::int64_t> net;
  for (const auto& e : mine_repository(order)) net[e.library] += e.net();
  check(net["numpy"] == 3, "numpy LOC");
  check(net["pandas"] == 2, "pandas LOC");
  check(net["math"] == 0, "math LOC");

  const auto w1 = format_git_log(parsed.commits);
  check(format_git_log(parse_git_log("live", w1).commits) == w1, "write -> read -> write");

  fs::remove_all(dir);
  if (failures) return 1;
  std::cout << "live git: ok\n";
  return 0;
}
