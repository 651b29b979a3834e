#include <doctest.h>

#include "adoptminer/errors.hpp"
#include "adoptminer/history.hpp"
#include "adoptminer/imports.hpp"
#include "adoptminer/text.hpp"

using namespace adoptminer;

namespace {

const std::filesystem::path kFixtures = ADOPTMINER_FIXTURES;

FileAliases aliases_from(std::initializer_list<const char*> lines) {
  FileAliases a;
  for (const char* line : lines) {
    for (const auto& st : extract_imports(line)) {
      for (const auto& b : st.bound_names) a.bind(b.token, b.kind, st.top_level, 0);
    }
  }
  return a;
}

CommitRecord commit(std::uint64_t ordinal, std::vector<FileDiff> diffs, const char* who = "a@x") {
  return CommitRecord{"r", std::string(40, static_cast<char>('a' + ordinal)), {}, AuthorId::make("dev", who),
                      static_cast<std::int64_t>(ordinal), false, std::move(diffs), ordinal};
}

const LibraryEvent* find(const std::vector<LibraryEvent>& ev, const std::string& lib) {
  for (const auto& e : ev) {
    if (e.library == lib) return &e;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("import forms") {
  auto s = extract_imports("import numpy as np, os.path, json");
  REQUIRE(s.size() == 3);
  CHECK(s[0].top_level == "numpy");
  CHECK(s[0].bound_names == std::vector<BoundName>{{"np", BindingKind::ModuleAlias}});
  CHECK(s[1].top_level == "os");
  CHECK(s[1].raw_module_path == "os.path");
  CHECK(s[2].top_level == "json");

  s = extract_imports("from scipy.stats import norm, t as student");
  REQUIRE(s.size() == 1);
  CHECK(s[0].top_level == "scipy");
  CHECK(s[0].bound_names.size() == 2);
  CHECK(s[0].bound_names[1].token == "student");
  CHECK(s[0].bound_names[1].kind == BindingKind::ImportedSymbol);

  s = extract_imports("from pandas import (DataFrame,");
  REQUIRE(s.size() == 1);
  CHECK(s[0].top_level == "pandas");

  CHECK(extract_imports("from . import sibling").empty());
  CHECK(extract_imports("from .pkg import x").empty());
  CHECK(extract_imports("important = 1").empty());
  CHECK(extract_imports("x = importlib").empty());
  s = extract_imports("from numpy import random as rnd");
  REQUIRE(s.size() == 1);
  CHECK(s[0].top_level == "numpy");
  CHECK(s[0].bound_names == std::vector<BoundName>{{"rnd", BindingKind::ImportedSymbol}});
  CHECK(extract_imports("# import numpy").empty());
  CHECK(extract_imports("x = 'import numpy'").empty());
  CHECK(extract_import("    import numpy")->top_level == "numpy");
  CHECK(extract_import("import pdb; pdb.set_trace()")->top_level == "pdb");
  CHECK(extract_import("import numpy  # fast arrays")->top_level == "numpy");
}

TEST_CASE("direct use requires '.' or '(' right after the token") {
  const auto a = aliases_from({"import numpy as np", "from os import path", "import json"});
  CHECK(classify_line("x = np.zeros(3)", a) == std::vector<std::string>{"numpy"});
  CHECK(classify_line("p = path.join(a, b)", a) == std::vector<std::string>{"os"});
  CHECK(classify_line("json.dumps(np.eye(2))", a) == std::vector<std::string>{"json", "numpy"});
  CHECK(classify_line("y = np", a).empty());
  CHECK(classify_line("y = np [0]", a).empty());
  CHECK(classify_line("numpy.zeros(2)", a) == std::vector<std::string>{"numpy"});  // own name of an imported library
  CHECK(classify_line("pandas.read_csv(f)", a).empty());
  CHECK(classify_line("npx.zeros(2)", a).empty());
  CHECK(classify_line("obj.np.zeros(2)", a).empty());
}

TEST_CASE("uses through another object are indirect") {
  const auto a = aliases_from({"import numpy as np", "import pandas as pd"});
  CHECK(classify_line("bins = np.linspace(df.a.min(), df.a.max(), 10)", a) == std::vector<std::string>{"numpy"});
  CHECK(classify_line("groups = df.groupby(np.digitize(df.a, bins))", a) == std::vector<std::string>{"numpy"});
  CHECK(classify_line("print('np.linspace(')", a).empty());
}

TEST_CASE("string literals and comments are not uses") {
  const auto a = aliases_from({"import numpy as np"});
  CHECK(classify_line("print(\"np.zeros\")", a).empty());
  CHECK(classify_line("s = 'it\\'s np.x' # np.y()", a).empty());
  CHECK(classify_line("f = f'{np.pi}'", a).empty());
  CHECK(classify_line("x = 'a' + np.pi", a) == std::vector<std::string>{"numpy"});
}

TEST_CASE("alias scope: latest binding wins and unbinding restores") {
  FileAliases a;
  a.bind("mod", BindingKind::ModuleAlias, "numpy", 0);
  a.bind("mod", BindingKind::ModuleAlias, "pandas", 3);
  CHECK(*a.resolve("mod") == "pandas");
  a.unbind("mod", "pandas", 5);
  CHECK(*a.resolve("mod") == "numpy");
  CHECK(a.resolve_at("mod", 4) == std::optional<std::string>("pandas"));
  CHECK(a.resolve_at("mod", 2) == std::optional<std::string>("numpy"));
  CHECK(a.library_active("numpy"));
  CHECK_FALSE(a.library_active("pandas"));
}

TEST_CASE("a binding survives while any import line provides it") {
  FileAliases a;
  a.bind("np", BindingKind::ModuleAlias, "numpy", 0);
  a.bind("np", BindingKind::ModuleAlias, "numpy", 1);
  a.unbind("np", "numpy", 2);
  CHECK(a.resolve("np") != nullptr);
  a.unbind("np", "numpy", 3);
  CHECK(a.resolve("np") == nullptr);
}

TEST_CASE("math to numpy commit mined from real git output") {
  const auto parsed = parse_git_log("r", read_file(kFixtures / "math_to_numpy_commit.log"));
  const auto events = mine_repository(linearize(parsed.commits));
  REQUIRE(events.size() == 2);
  const auto* np = find(events, "numpy");
  const auto* math = find(events, "math");
  REQUIRE(np);
  REQUIRE(math);
  CHECK(np->added_loc == 4);
  CHECK(np->deleted_loc == 0);
  CHECK(np->import_added);
  CHECK_FALSE(np->import_removed);
  CHECK(math->added_loc == 0);
  CHECK(math->deleted_loc == 1);
  CHECK(math->import_removed);
  CHECK(np->author == "ada@example.org");
}

TEST_CASE("import lines can be excluded from LOC") {
  const auto c = commit(0, {{"m.py", {"import numpy as np", "np.zeros(1)"}, {}}});
  AliasTable t;
  MineOptions opts;
  opts.count_import_lines = false;
  const auto ev = mine_commit(c, t, opts);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].added_loc == 1);
  CHECK(ev[0].import_added);
}

TEST_CASE("non-Python files are ignored") {
  CHECK(is_python_path("a/b.py"));
  CHECK_FALSE(is_python_path("README.md"));
  CHECK_FALSE(is_python_path("stubs/api.pyi"));
  const auto c = commit(0, {{"notes.txt", {"import numpy as np", "np.zeros(1)"}, {}}});
  AliasTable t;
  CHECK(mine_commit(c, t).empty());
}

TEST_CASE("aliases are scoped per file") {
  AliasTable t;
  const auto c0 = commit(0, {{"a.py", {"import numpy as np"}, {}}});
  const auto c1 = commit(1, {{"b.py", {"np.zeros(1)"}, {}}});
  mine_commit(c0, t);
  CHECK(mine_commit(c1, t).empty());
}

TEST_CASE("deleting an import and its uses in one commit counts the old binding") {
  AliasTable t;
  mine_commit(commit(0, {{"a.py", {"from numpy import zeros", "x = zeros(3)", "y = zeros(4)"}, {}}}), t);
  const auto ev = mine_commit(commit(1, {{"a.py", {}, {"from numpy import zeros", "x = zeros(3)"}}}), t);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].deleted_loc == 2);
  CHECK(ev[0].import_removed);
  // the binding is gone now
  const auto later = mine_commit(commit(2, {{"a.py", {"z = zeros(5)"}, {}}}), t);
  CHECK(later.empty());
}

TEST_CASE("a line using two libraries counts for both") {
  AliasTable t;
  const auto ev = mine_commit(commit(0, {{"a.py", {"import numpy as np", "import json", "json.dumps(np.eye(2))"}, {}}}), t);
  REQUIRE(ev.size() == 2);
  CHECK(find(ev, "json")->added_loc == 2);
  CHECK(find(ev, "numpy")->added_loc == 2);
}

TEST_CASE("mining out of order is rejected") {
  AliasTable t;
  mine_commit(commit(3, {}), t);
  CHECK_THROWS_AS(mine_commit(commit(3, {}), t), SequencingError);
  CHECK_THROWS_AS(mine_commit(commit(1, {}), t), SequencingError);
}

TEST_CASE("merge diffs are skipped unless requested") {
  auto c = commit(0, {{"a.py", {"import os"}, {}}});
  c.is_merge = true;
  c.parent_hashes = {std::string(40, 'x'), std::string(40, 'y')};
  AliasTable t1, t2;
  CHECK(mine_commit(c, t1).empty());
  MineOptions opts;
  opts.include_merge_diffs = true;
  CHECK(mine_commit(c, t2, opts).size() == 1);
}
