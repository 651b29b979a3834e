#include "adoptminer/imports.hpp"

#include <algorithm>
#include <set>

#include "adoptminer/errors.hpp"
#include "adoptminer/text.hpp"

namespace adoptminer {

namespace {

// Consumes `keyword` plus at least one whitespace character.
bool take_keyword(std::string_view& s, std::string_view keyword) {
  if (s.substr(0, keyword.size()) != keyword || s.size() == keyword.size()) return false;
  const char next = s[keyword.size()];
  if (next != ' ' && next != '\t') return false;
  s = trim(s.substr(keyword.size()));
  return true;
}

bool is_dotted_path(std::string_view s) {
  for (auto seg : split(s, '.')) {
    if (!is_identifier(seg)) return false;
  }
  return true;
}

std::string top_of(std::string_view dotted) {
  return std::string(dotted.substr(0, dotted.find('.')));
}

// "name" or "name as alias" -> (name, alias-or-empty)
std::optional<std::pair<std::string_view, std::string_view>> split_as(std::string_view item) {
  item = trim(item);
  const auto ws = item.find_first_of(" \t");
  if (ws == std::string_view::npos) return std::pair{item, std::string_view{}};
  const std::string_view name = item.substr(0, ws);
  std::string_view rest = trim(item.substr(ws));
  if (!take_keyword(rest, "as")) return std::nullopt;
  if (!is_identifier(rest)) return std::nullopt;
  return std::pair{name, rest};
}

std::string_view strip_statement_tail(std::string_view s) {
  const auto cut = s.find_first_of("#;");
  if (cut != std::string_view::npos) s = s.substr(0, cut);
  s = trim(s);
  while (!s.empty() && s.back() == '\\') s = trim(s.substr(0, s.size() - 1));
  return s;
}

}  // namespace

std::vector<ImportStatement> extract_imports(std::string_view line) {
  std::string_view s = strip_statement_tail(line);
  std::vector<ImportStatement> out;

  if (take_keyword(s, "import")) {
    for (auto item : split(s, ',')) {
      const auto parts = split_as(item);
      if (!parts || !is_dotted_path(parts->first)) return {};
      ImportStatement st;
      st.raw_module_path = std::string(parts->first);
      st.top_level = top_of(parts->first);
      const std::string token = parts->second.empty() ? st.top_level : std::string(parts->second);
      st.bound_names.push_back({token, BindingKind::ModuleAlias});
      out.push_back(std::move(st));
    }
    return out;
  }

  if (take_keyword(s, "from")) {
    const auto ws = s.find_first_of(" \t");
    if (ws == std::string_view::npos) return {};
    const std::string_view module = s.substr(0, ws);
    if (!is_dotted_path(module)) return {};  // includes relative imports
    std::string_view names = trim(s.substr(ws));
    if (!take_keyword(names, "import")) return {};
    if (!names.empty() && names.front() == '(') names = trim(names.substr(1));
    if (!names.empty() && names.back() == ')') names = trim(names.substr(0, names.size() - 1));

    ImportStatement st;
    st.raw_module_path = std::string(module);
    st.top_level = top_of(module);
    if (names == "*") {
      st.bound_names.push_back({std::string(kStarToken), BindingKind::ImportedSymbol});
    } else {
      const auto items = split(names, ',');
      for (std::size_t k = 0; k < items.size(); ++k) {
        if (trim(items[k]).empty() && k + 1 == items.size() && k > 0) break;  // trailing comma
        const auto parts = split_as(items[k]);
        if (!parts || !is_identifier(parts->first)) return {};
        const auto token = parts->second.empty() ? parts->first : parts->second;
        st.bound_names.push_back({std::string(token), BindingKind::ImportedSymbol});
      }
    }
    if (st.bound_names.empty()) return {};
    out.push_back(std::move(st));
  }
  return out;
}

std::optional<ImportStatement> extract_import(std::string_view line) {
  auto all = extract_imports(line);
  if (all.empty()) return std::nullopt;
  return std::move(all.front());
}

void FileAliases::bind(std::string_view token, BindingKind kind, std::string_view library,
                       std::uint64_t ordinal) {
  if (token == kStarToken) return;
  auto it = by_token_.find(token);
  if (it == by_token_.end()) it = by_token_.emplace(std::string(token), std::vector<Binding>{}).first;
  auto& bindings = it->second;
  auto b = std::find_if(bindings.begin(), bindings.end(), [&](const Binding& x) { return x.library == library; });
  if (b == bindings.end()) {
    bindings.push_back(Binding{std::string(library), kind, 0, 0, {}});
    b = std::prev(bindings.end());
  }
  if (b->live++ == 0) {
    b->kind = kind;
    b->order = ++activations_;
    b->history.push_back(Interval{ordinal, std::nullopt});
    auto lib = live_per_library_.find(library);
    if (lib == live_per_library_.end()) lib = live_per_library_.emplace(std::string(library), 0).first;
    ++lib->second;
  }
}

void FileAliases::unbind(std::string_view token, std::string_view library, std::uint64_t ordinal) {
  const auto it = by_token_.find(token);
  if (it == by_token_.end()) return;
  for (auto& b : it->second) {
    if (b.library != library || b.live == 0) continue;
    if (--b.live == 0) {
      b.history.back().deactivated = ordinal;
      const auto lib = live_per_library_.find(library);
      if (--lib->second == 0) live_per_library_.erase(lib);
    }
    return;
  }
}

const FileAliases::Binding* FileAliases::active(std::string_view token) const {
  const auto it = by_token_.find(token);
  if (it == by_token_.end()) return nullptr;
  const Binding* best = nullptr;
  for (const auto& b : it->second) {
    if (b.live > 0 && (!best || b.order > best->order)) best = &b;
  }
  return best;
}

const std::string* FileAliases::resolve(std::string_view token) const {
  const Binding* b = active(token);
  return b ? &b->library : nullptr;
}

std::optional<BindingKind> FileAliases::kind_of(std::string_view token) const {
  const Binding* b = active(token);
  if (!b) return std::nullopt;
  return b->kind;
}

std::optional<std::string> FileAliases::resolve_at(std::string_view token, std::uint64_t ordinal) const {
  const auto it = by_token_.find(token);
  if (it == by_token_.end()) return std::nullopt;
  std::optional<std::string> found;
  std::uint64_t latest = 0;
  for (const auto& b : it->second) {
    for (const auto& iv : b.history) {
      const bool visible = iv.activated <= ordinal && (!iv.deactivated || *iv.deactivated > ordinal);
      if (visible && (!found || iv.activated >= latest)) {
        found = b.library;
        latest = iv.activated;
      }
    }
  }
  return found;
}

bool FileAliases::library_active(std::string_view library) const {
  return live_per_library_.find(library) != live_per_library_.end();
}

FileAliases& AliasTable::file(std::string_view path) {
  auto it = files_.find(path);
  if (it == files_.end()) it = files_.emplace(std::string(path), FileAliases{}).first;
  return it->second;
}

const FileAliases* AliasTable::find(std::string_view path) const {
  const auto it = files_.find(path);
  return it == files_.end() ? nullptr : &it->second;
}

void AliasTable::advance(std::uint64_t ordinal) {
  if (last_ordinal_ && ordinal <= *last_ordinal_) {
    throw SequencingError("commit ordinal " + std::to_string(ordinal) + " does not follow " +
                          std::to_string(*last_ordinal_));
  }
  last_ordinal_ = ordinal;
}

std::vector<std::string> classify_line(std::string_view line, const FileAliases& aliases) {
  std::set<std::string> libs;
  const std::size_t n = line.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = line[i];
    if (c == '#') break;
    if (c == '"' || c == '\'') {
      const std::string triple(3, c);
      if (line.substr(i, 3) == triple) {
        const auto close = line.find(triple, i + 3);
        if (close == std::string_view::npos) break;
        i = close + 3;
        continue;
      }
      std::size_t j = i + 1;
      while (j < n && line[j] != c) j += line[j] == '\\' ? 2 : 1;
      if (j >= n) break;
      i = j + 1;
      continue;
    }
    if (c >= '0' && c <= '9') {
      while (i < n && is_identifier_char(line[i])) ++i;
      continue;
    }
    if (is_identifier_start(c)) {
      std::size_t j = i;
      while (j < n && is_identifier_char(line[j])) ++j;
      const bool standalone = i == 0 || line[i - 1] != '.';
      const bool used = j < n && (line[j] == '.' || line[j] == '(');
      if (standalone && used) {
        const std::string_view token = line.substr(i, j - i);
        if (const std::string* lib = aliases.resolve(token)) {
          libs.insert(*lib);
        } else if (aliases.library_active(token)) {
          libs.emplace(token);
        }
      }
      i = j;
      continue;
    }
    ++i;
  }
  return {libs.begin(), libs.end()};
}

bool is_python_path(std::string_view path) {
  return path.size() >= 3 && path.substr(path.size() - 3) == ".py";
}

namespace {

struct Tally {
  std::int64_t added = 0;
  std::int64_t deleted = 0;
  bool import_added = false;
  bool import_removed = false;
};

std::vector<std::string> import_libraries(const std::vector<ImportStatement>& imports) {
  std::set<std::string> libs;
  for (const auto& st : imports) libs.insert(st.top_level);
  return {libs.begin(), libs.end()};
}

}  // namespace

std::vector<LibraryEvent> mine_commit(const CommitRecord& commit, AliasTable& table,
                                      const MineOptions& options) {
  if (!commit.ordinal) throw SequencingError("commit " + commit.hash + " has no ordinal; linearize first");
  const std::uint64_t ordinal = *commit.ordinal;
  table.advance(ordinal);
  if (commit.is_merge && !options.include_merge_diffs) return {};

  const std::int64_t import_weight = options.count_import_lines ? 1 : 0;
  std::map<std::string, Tally> tallies;

  for (const auto& diff : commit.diffs) {
    if (!is_python_path(diff.path)) continue;
    FileAliases& aliases = table.file(diff.path);

    std::vector<ImportStatement> removed;
    for (const auto& line : diff.deleted_lines) {
      auto imports = extract_imports(line);
      if (!imports.empty()) {
        for (const auto& lib : import_libraries(imports)) {
          auto& t = tallies[lib];
          t.deleted += import_weight;
          t.import_removed = true;
        }
        removed.insert(removed.end(), imports.begin(), imports.end());
        continue;
      }
      for (const auto& lib : classify_line(line, aliases)) ++tallies[lib].deleted;
    }

    std::vector<std::vector<ImportStatement>> added_imports;
    added_imports.reserve(diff.added_lines.size());
    for (const auto& line : diff.added_lines) added_imports.push_back(extract_imports(line));

    for (const auto& st : removed) {
      for (const auto& b : st.bound_names) aliases.unbind(b.token, st.top_level, ordinal);
    }
    for (const auto& imports : added_imports) {
      for (const auto& st : imports) {
        for (const auto& b : st.bound_names) aliases.bind(b.token, b.kind, st.top_level, ordinal);
      }
    }

    for (std::size_t k = 0; k < diff.added_lines.size(); ++k) {
      if (!added_imports[k].empty()) {
        for (const auto& lib : import_libraries(added_imports[k])) {
          auto& t = tallies[lib];
          t.added += import_weight;
          t.import_added = true;
        }
        continue;
      }
      for (const auto& lib : classify_line(diff.added_lines[k], aliases)) ++tallies[lib].added;
    }
  }

  std::vector<LibraryEvent> events;
  for (auto& [lib, t] : tallies) {
    if (t.added + t.deleted < 1) continue;
    events.push_back(LibraryEvent{commit.repo_id, ordinal, commit.author.canonical_key, lib, t.added,
                                  t.deleted, t.import_added, t.import_removed});
  }
  return events;
}

std::vector<LibraryEvent> mine_repository(const std::vector<CommitRecord>& commits,
                                          const MineOptions& options) {
  AliasTable table;
  std::vector<LibraryEvent> events;
  for (const auto& c : commits) {
    auto mined = mine_commit(c, table, options);
    events.insert(events.end(), std::make_move_iterator(mined.begin()), std::make_move_iterator(mined.end()));
  }
  return events;
}

}  // namespace adoptminer
