#include "adoptminer/history.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <iterator>
#include <map>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "adoptminer/errors.hpp"
#include "adoptminer/text.hpp"

namespace adoptminer {

namespace {

constexpr std::string_view kSentinel = "\x01" "COMMIT" "\x01";

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// "a/foo.py" -> "foo.py"; handles git's C-style quoting of unusual names.
std::string strip_prefix(std::string_view p) {
  std::string path;
  if (!p.empty() && p.front() == '"' && p.size() >= 2 && p.back() == '"') {
    p = p.substr(1, p.size() - 2);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == '\\' && i + 1 < p.size()) {
        const char e = p[++i];
        switch (e) {
          case 'n': path += '\n'; break;
          case 't': path += '\t'; break;
          case '"': path += '"'; break;
          case '\\': path += '\\'; break;
          default:
            if (e >= '0' && e <= '7' && i + 2 < p.size()) {
              path += static_cast<char>((e - '0') * 64 + (p[i + 1] - '0') * 8 + (p[i + 2] - '0'));
              i += 2;
            } else {
              path += e;
            }
        }
      } else {
        path += p[i];
      }
    }
  } else {
    // Tab-terminated timestamps follow names in some producers.
    const auto tab = p.find('\t');
    if (tab != std::string_view::npos) p = p.substr(0, tab);
    path = std::string(p);
  }
  if (starts_with(path, "a/") || starts_with(path, "b/")) path.erase(0, 2);
  return path;
}

struct HunkHeader {
  std::int64_t old_count = 0;
  std::int64_t new_count = 0;
};

std::optional<std::int64_t> parse_range_count(std::string_view range) {
  const auto comma = range.find(',');
  if (comma == std::string_view::npos) {
    if (!parse_int(range)) return std::nullopt;
    return 1;
  }
  if (!parse_int(range.substr(0, comma))) return std::nullopt;
  return parse_int(range.substr(comma + 1));
}

std::optional<HunkHeader> parse_hunk_header(std::string_view line) {
  // @@ -a[,b] +c[,d] @@[ section]
  if (!starts_with(line, "@@ -")) return std::nullopt;
  const auto close = line.find(" @@", 3);
  if (close == std::string_view::npos) return std::nullopt;
  const std::string_view body = line.substr(4, close - 4);
  const auto space = body.find(' ');
  if (space == std::string_view::npos || body.size() <= space + 1 || body[space + 1] != '+') {
    return std::nullopt;
  }
  const auto old_count = parse_range_count(body.substr(0, space));
  const auto new_count = parse_range_count(body.substr(space + 2));
  if (!old_count || !new_count || *old_count < 0 || *new_count < 0) return std::nullopt;
  return HunkHeader{*old_count, *new_count};
}

class LogParser {
 public:
  explicit LogParser(std::string_view repo_id) : repo_id_(repo_id) {}

  void feed_line(std::size_t offset, std::string_view raw) {
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (starts_with(raw, kSentinel)) {
      finish_commit();
      start_commit(offset, raw);
      return;
    }
    if (!commit_) {
      if (!trim(raw).empty()) throw StreamError(offset, "diff text before first commit header");
      return;
    }
    if (file_ && hunk_open()) {
      if (consume_hunk_line(offset, raw)) return;
    }
    header_line(offset, raw);
  }

  ParsedLog finish(std::size_t offset) {
    offset_ = offset;
    finish_commit();
    return std::move(result_);
  }

 private:
  struct FileState {
    FileDiff diff;
    std::string old_path;
    bool skip = false;
    bool aborted = false;
    bool saw_hunk = false;
    std::int64_t old_left = 0;
    std::int64_t new_left = 0;
  };

  bool hunk_open() const { return file_->old_left > 0 || file_->new_left > 0; }

  void start_commit(std::size_t offset, std::string_view line) {
    const auto fields = split(line, '\x01');
    // "", "COMMIT", hash, parents, name, email, ts, ""
    if (fields.size() != 8 || !fields[0].empty() || fields[1] != "COMMIT" || !fields[7].empty()) {
      throw StreamError(offset, "truncated or malformed commit header");
    }
    if (!is_full_hash(fields[2])) throw StreamError(offset, "invalid commit hash");
    const auto ts = parse_int(fields[6]);
    if (!ts) throw StreamError(offset, "invalid author timestamp");

    CommitRecord c;
    c.repo_id = repo_id_;
    c.hash = std::string(fields[2]);
    for (auto parent : split(fields[3], ' ')) {
      if (parent.empty()) continue;
      if (!is_full_hash(parent)) throw StreamError(offset, "invalid parent hash");
      c.parent_hashes.emplace_back(parent);
    }
    c.is_merge = c.parent_hashes.size() >= 2;
    c.author = AuthorId::make(std::string(fields[4]), std::string(fields[5]));
    c.author_ts = *ts;
    if (!seen_.insert(c.hash).second) throw DuplicateCommitError(c.hash);
    commit_ = std::move(c);
  }

  void finish_commit() {
    if (!commit_) return;
    finish_file();
    result_.commits.push_back(std::move(*commit_));
    commit_.reset();
  }

  void start_file(std::string path, bool skip) {
    finish_file();
    file_ = FileState{};
    file_->diff.path = std::move(path);
    file_->skip = skip;
  }

  void finish_file() {
    if (!file_) return;
    if (!file_->skip && !file_->aborted && hunk_open()) {
      warn(offset_, "hunk truncated before its declared line counts");
      file_->aborted = true;
    }
    if (!file_->skip && !file_->aborted && !file_->diff.path.empty() &&
        (!file_->diff.added_lines.empty() || !file_->diff.deleted_lines.empty())) {
      commit_->diffs.push_back(std::move(file_->diff));
    }
    file_.reset();
  }

  void warn(std::size_t offset, std::string message) {
    result_.warnings.push_back(ParseWarning{offset, commit_ ? commit_->hash : std::string{},
                                            file_ ? file_->diff.path : std::string{},
                                            std::move(message)});
  }

  void abort_file(std::size_t offset, std::string message) {
    if (!file_->aborted && !file_->skip) warn(offset, std::move(message));
    file_->aborted = true;
    file_->old_left = file_->new_left = 0;
  }

  // Returns false when the line does not belong to the open hunk.
  bool consume_hunk_line(std::size_t offset, std::string_view line) {
    FileState& f = *file_;
    const char marker = line.empty() ? ' ' : line.front();
    const std::string_view body = line.empty() ? line : line.substr(1);
    switch (marker) {
      case ' ':
        if (f.old_left <= 0 || f.new_left <= 0) break;
        --f.old_left;
        --f.new_left;
        return true;
      case '-':
        if (f.old_left <= 0) break;
        --f.old_left;
        if (!f.skip && !f.aborted) f.diff.deleted_lines.push_back(sanitize_utf8(body));
        return true;
      case '+':
        if (f.new_left <= 0) break;
        --f.new_left;
        if (!f.skip && !f.aborted) f.diff.added_lines.push_back(sanitize_utf8(body));
        return true;
      case '\\':
        return true;
      default:
        break;
    }
    abort_file(offset, "line does not match hunk counts");
    return false;
  }

  void header_line(std::size_t offset, std::string_view line) {
    if (starts_with(line, "diff --git ")) {
      std::string_view rest = line.substr(11);
      const auto b = rest.rfind(" b/");
      std::string path = b == std::string_view::npos ? strip_prefix(rest) : strip_prefix(rest.substr(b + 1));
      start_file(std::move(path), false);
      return;
    }
    if (starts_with(line, "diff --cc ") || starts_with(line, "diff --combined ")) {
      start_file(strip_prefix(line.substr(line.find(' ', 5) + 1)), true);
      return;
    }
    if (line.empty() || starts_with(line, "\\")) return;
    if (!file_) return;  // stray text between files (e.g. commit bodies)
    FileState& f = *file_;
    if (f.aborted) return;
    if (starts_with(line, "--- ") && !f.saw_hunk) {
      const auto p = line.substr(4);
      f.old_path = p == "/dev/null" ? std::string{} : strip_prefix(p);
      return;
    }
    if (starts_with(line, "+++ ") && !f.saw_hunk) {
      const auto p = line.substr(4);
      if (p == "/dev/null") {
        if (!f.old_path.empty()) f.diff.path = f.old_path;
      } else {
        f.diff.path = strip_prefix(p);
      }
      return;
    }
    if (starts_with(line, "Binary files ") || starts_with(line, "GIT binary patch")) {
      f.skip = true;
      return;
    }
    if (starts_with(line, "@@")) {
      const auto hunk = parse_hunk_header(line);
      if (!hunk) {
        abort_file(offset, "malformed hunk header");
        return;
      }
      f.saw_hunk = true;
      f.old_left = hunk->old_count;
      f.new_left = hunk->new_count;
      return;
    }
    if (f.saw_hunk && !f.skip) {
      if (line.front() == '+' || line.front() == '-' || line.front() == ' ') {
        abort_file(offset, "diff line outside any hunk");
      }
      return;
    }
    // index, mode, similarity, rename and copy headers carry nothing we use.
  }

  std::string repo_id_;
  ParsedLog result_;
  std::optional<CommitRecord> commit_;
  std::optional<FileState> file_;
  std::unordered_set<std::string> seen_;
  std::size_t offset_ = 0;
};

}  // namespace

AuthorId AuthorId::make(std::string name, std::string email) {
  AuthorId id;
  id.canonical_key = !trim(email).empty() ? to_lower(trim(email)) : to_lower(trim(name));
  if (id.canonical_key.empty()) id.canonical_key = "<unknown>";
  id.name = std::move(name);
  id.email = std::move(email);
  return id;
}

bool same_record(const CommitRecord& a, const CommitRecord& b) {
  return a.repo_id == b.repo_id && a.hash == b.hash && a.parent_hashes == b.parent_hashes &&
         a.author.name == b.author.name && a.author.email == b.author.email &&
         a.author == b.author && a.author_ts == b.author_ts && a.is_merge == b.is_merge &&
         a.diffs == b.diffs && a.ordinal == b.ordinal;
}

bool is_full_hash(std::string_view s) {
  return s.size() == 40 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

ParsedLog parse_git_log(std::string_view repo_id, std::string_view text) {
  LogParser parser(repo_id);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    parser.feed_line(pos, text.substr(pos, end - pos));
    pos = end + 1;
  }
  return parser.finish(text.size());
}

ParsedLog parse_git_stream(std::string_view repo_id, std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_git_log(repo_id, text);
}

std::string format_commit_header(const CommitRecord& c) {
  std::string out(kSentinel);
  out += c.hash;
  out += '\x01';
  for (std::size_t i = 0; i < c.parent_hashes.size(); ++i) {
    if (i) out += ' ';
    out += c.parent_hashes[i];
  }
  out += '\x01';
  out += c.author.name;
  out += '\x01';
  out += c.author.email;
  out += '\x01';
  out += std::to_string(c.author_ts);
  out += '\x01';
  return out;
}

void write_git_stream(std::ostream& out, std::span<const CommitRecord> commits) {
  out << format_git_log(commits);
}

std::string format_git_log(std::span<const CommitRecord> commits) {
  std::string out;
  for (const auto& c : commits) {
    out += format_commit_header(c);
    out += "\n\n";
    for (const auto& d : c.diffs) {
      const auto dels = d.deleted_lines.size();
      const auto adds = d.added_lines.size();
      out += "diff --git a/" + d.path + " b/" + d.path + "\n";
      out += "--- a/" + d.path + "\n+++ b/" + d.path + "\n";
      out += "@@ -" + std::string(dels ? "1," : "0,") + std::to_string(dels) + " +" +
             (adds ? "1," : "0,") + std::to_string(adds) + " @@\n";
      for (const auto& l : d.deleted_lines) out += "-" + l + "\n";
      for (const auto& l : d.added_lines) out += "+" + l + "\n";
    }
  }
  return out;
}

std::vector<CommitRecord> linearize(std::vector<CommitRecord> commits) {
  const std::size_t n = commits.size();
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(n);
  for (std::size_t i = 0; i < n; ++i) index.emplace(commits[i].hash, i);

  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::vector<std::size_t>> in_corpus_parents(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> parents;
    for (const auto& p : commits[i].parent_hashes) {
      const auto it = index.find(p);
      if (it != index.end()) parents.push_back(it->second);
    }
    std::sort(parents.begin(), parents.end());
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    pending[i] = parents.size();
    for (auto p : parents) children[p].push_back(i);
    in_corpus_parents[i] = std::move(parents);
  }

  const auto later = [&](std::size_t a, std::size_t b) {
    if (commits[a].author_ts != commits[b].author_ts) return commits[a].author_ts > commits[b].author_ts;
    return commits[a].hash > commits[b].hash;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(i);
  }

  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t c = ready.top();
    ready.pop();
    order.push_back(c);
    for (auto child : children[c]) {
      if (--pending[child] == 0) ready.push(child);
    }
  }

  if (order.size() != n) {
    // Every unplaced commit has an unplaced parent; walking parents must revisit.
    std::size_t cur = 0;
    while (pending[cur] == 0) ++cur;
    std::vector<bool> visited(n, false);
    while (!visited[cur]) {
      visited[cur] = true;
      for (auto p : in_corpus_parents[cur]) {
        if (pending[p] > 0) {
          cur = p;
          break;
        }
      }
    }
    throw CycleError(commits[cur].hash);
  }

  std::vector<CommitRecord> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(std::move(commits[order[k]]));
    out.back().ordinal = k;
  }
  return out;
}

}  // namespace adoptminer
