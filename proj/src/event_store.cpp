#include "adoptminer/event_store.hpp"

#include <fstream>
#include <json.hpp>

#include "adoptminer/errors.hpp"
#include "adoptminer/text.hpp"

namespace adoptminer {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kManifest = "store.json";

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    if (nl > pos) out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

void append_bytes(const fs::path& file, std::string_view bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::app);
  if (!out) throw StoreError("cannot append to " + file.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw StoreError("write failed for " + file.string());
}

}  // namespace

std::vector<CommitIndexEntry> commit_index(std::span<const CommitRecord> linearized) {
  std::vector<CommitIndexEntry> out;
  out.reserve(linearized.size());
  for (const auto& c : linearized) {
    out.push_back(CommitIndexEntry{c.repo_id, c.ordinal.value_or(0), c.hash, c.author.canonical_key,
                                   c.author_ts, c.is_merge});
  }
  return out;
}

std::string serialize_event(const LibraryEvent& e) {
  ordered_json j;
  j["repo"] = e.repo_id;
  j["ord"] = e.ordinal;
  j["author"] = e.author;
  j["lib"] = e.library;
  j["add"] = e.added_loc;
  j["del"] = e.deleted_loc;
  j["imp_add"] = e.import_added;
  j["imp_rm"] = e.import_removed;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

LibraryEvent parse_event(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    return LibraryEvent{j.at("repo").get<std::string>(), j.at("ord").get<std::uint64_t>(),
                        j.at("author").get<std::string>(), j.at("lib").get<std::string>(),
                        j.at("add").get<std::int64_t>(), j.at("del").get<std::int64_t>(),
                        j.at("imp_add").get<bool>(), j.at("imp_rm").get<bool>()};
  } catch (const nlohmann::json::exception& ex) {
    throw StoreError(std::string("malformed event record: ") + ex.what());
  }
}

std::string serialize_commit(const CommitIndexEntry& c) {
  ordered_json j;
  j["repo"] = c.repo_id;
  j["ord"] = c.ordinal;
  j["hash"] = c.hash;
  j["author"] = c.author;
  j["ts"] = c.author_ts;
  j["merge"] = c.is_merge;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

CommitIndexEntry parse_commit(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    return CommitIndexEntry{j.at("repo").get<std::string>(), j.at("ord").get<std::uint64_t>(),
                            j.at("hash").get<std::string>(), j.at("author").get<std::string>(),
                            j.at("ts").get<std::int64_t>(), j.at("merge").get<bool>()};
  } catch (const nlohmann::json::exception& ex) {
    throw StoreError(std::string("malformed commit record: ") + ex.what());
  }
}

std::string serialize_events(std::span<const LibraryEvent> events) {
  std::string out;
  for (const auto& e : events) {
    out += serialize_event(e);
    out += '\n';
  }
  return out;
}

std::vector<LibraryEvent> parse_events(std::string_view jsonl) {
  std::vector<LibraryEvent> out;
  for (auto line : lines_of(jsonl)) out.push_back(parse_event(line));
  return out;
}

std::string serialize_commits(std::span<const CommitIndexEntry> commits) {
  std::string out;
  for (const auto& c : commits) {
    out += serialize_commit(c);
    out += '\n';
  }
  return out;
}

std::vector<CommitIndexEntry> parse_commits(std::string_view jsonl) {
  std::vector<CommitIndexEntry> out;
  for (auto line : lines_of(jsonl)) out.push_back(parse_commit(line));
  return out;
}

bool EventStore::exists(const fs::path& dir) { return fs::exists(dir / kManifest); }

EventStore EventStore::create(const fs::path& dir, std::size_t shard_cap) {
  if (exists(dir)) throw StoreError("store already exists at " + dir.string());
  if (shard_cap == 0) throw StoreError("shard cap must be positive");
  fs::create_directories(dir);
  EventStore store;
  store.dir_ = dir;
  store.shard_cap_ = shard_cap;
  store.save_manifest();
  return store;
}

EventStore EventStore::open(const fs::path& dir) {
  if (!exists(dir)) throw StoreError("no store at " + dir.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / kManifest));
  } catch (const nlohmann::json::exception& ex) {
    throw StoreError(std::string("unreadable store manifest: ") + ex.what());
  }
  if (j.value("format", std::string{}) != "adoptminer-store") {
    throw FormatVersionError("not an adoptminer store: " + dir.string());
  }
  const int version = j.value("format_version", -1);
  if (version != kStoreFormatVersion) {
    throw FormatVersionError("store format version " + std::to_string(version) + " (expected " +
                             std::to_string(kStoreFormatVersion) + ")");
  }

  EventStore store;
  store.dir_ = dir;
  try {
    store.shard_cap_ = j.at("shard_cap").get<std::size_t>();
    for (const auto& s : j.at("shards")) {
      store.shards_.push_back(ShardEntry{s.at("id").get<std::uint32_t>(), s.at("event_records").get<std::uint64_t>(),
                                         s.at("event_bytes").get<std::uint64_t>(),
                                         s.at("commit_records").get<std::uint64_t>(),
                                         s.at("commit_bytes").get<std::uint64_t>(), false});
    }
    for (const auto& r : j.at("repos")) {
      store.repos_.push_back(RepoEntry{r.at("repo").get<std::string>(), r.at("shard").get<std::uint32_t>(),
                                       r.at("event_offset").get<std::uint64_t>(),
                                       r.at("event_bytes").get<std::uint64_t>(),
                                       r.at("event_count").get<std::uint64_t>(),
                                       r.at("commit_offset").get<std::uint64_t>(),
                                       r.at("commit_bytes").get<std::uint64_t>(),
                                       r.at("commit_count").get<std::uint64_t>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw StoreError(std::string("malformed store manifest: ") + ex.what());
  }

  // Bytes past the committed length are an interrupted append: move them
  // aside. A file shorter than committed cannot be read safely.
  for (auto& shard : store.shards_) {
    const std::pair<fs::path, std::uint64_t> files[] = {{store.events_file(shard.id), shard.event_bytes},
                                                        {store.commits_file(shard.id), shard.commit_bytes}};
    for (const auto& [file, committed] : files) {
      if (!fs::exists(file)) continue;
      const auto actual = fs::file_size(file);
      if (actual > committed) {
        const std::string content = read_file(file);
        fs::path aside = file;
        aside += ".quarantine";
        {
          std::ofstream out(aside, std::ios::binary | std::ios::trunc);
          out.write(content.data() + committed, static_cast<std::streamsize>(actual - committed));
        }
        fs::resize_file(file, committed);
        store.quarantined_.push_back(Quarantine{shard.id, file.filename().string(), committed,
                                                "uncommitted tail moved to " + aside.filename().string()});
      } else if (actual < committed) {
        shard.quarantined = true;
        store.quarantined_.push_back(
            Quarantine{shard.id, file.filename().string(), actual, "file shorter than committed length"});
      }
    }
  }
  return store;
}

fs::path EventStore::events_file(std::uint32_t shard) const {
  return dir_ / ("events-" + std::to_string(shard) + ".jsonl");
}

fs::path EventStore::commits_file(std::uint32_t shard) const {
  return dir_ / ("commits-" + std::to_string(shard) + ".jsonl");
}

void EventStore::save_manifest() const {
  ordered_json j;
  j["format"] = "adoptminer-store";
  j["format_version"] = kStoreFormatVersion;
  j["shard_cap"] = shard_cap_;
  j["shards"] = ordered_json::array();
  for (const auto& s : shards_) {
    ordered_json o;
    o["id"] = s.id;
    o["events"] = events_file(s.id).filename().string();
    o["commits"] = commits_file(s.id).filename().string();
    o["event_records"] = s.event_records;
    o["event_bytes"] = s.event_bytes;
    o["commit_records"] = s.commit_records;
    o["commit_bytes"] = s.commit_bytes;
    j["shards"].push_back(std::move(o));
  }
  j["repos"] = ordered_json::array();
  for (const auto& r : repos_) {
    ordered_json o;
    o["repo"] = r.repo_id;
    o["shard"] = r.shard;
    o["event_offset"] = r.event_offset;
    o["event_bytes"] = r.event_bytes;
    o["event_count"] = r.event_count;
    o["commit_offset"] = r.commit_offset;
    o["commit_bytes"] = r.commit_bytes;
    o["commit_count"] = r.commit_count;
    j["repos"].push_back(std::move(o));
  }
  write_file_atomic(dir_ / kManifest, j.dump(1) + "\n");
}

void EventStore::append_repo(std::string_view repo_id, std::span<const LibraryEvent> events,
                             std::span<const CommitIndexEntry> commits, std::optional<std::uint32_t> shard) {
  for (const auto& r : repos_) {
    if (r.repo_id == repo_id) throw DuplicateRepoError(std::string(repo_id));
  }
  for (std::size_t k = 1; k < events.size(); ++k) {
    if (events[k].ordinal < events[k - 1].ordinal) {
      throw StoreError("events of " + std::string(repo_id) + " are not in ordinal order");
    }
  }

  std::uint32_t target = 0;
  if (shard) {
    if (*shard > shards_.size()) throw StoreError("shard ids must be allocated densely");
    target = *shard;
  } else if (shards_.empty()) {
    target = 0;
  } else {
    const auto& last = shards_.back();
    const bool fits = last.event_records == 0 || last.event_records + events.size() <= shard_cap_;
    target = fits ? last.id : static_cast<std::uint32_t>(shards_.size());
  }
  if (target == shards_.size()) shards_.push_back(ShardEntry{target, 0, 0, 0, 0, false});
  ShardEntry& s = shards_[target];
  if (s.quarantined) throw StoreError("shard " + std::to_string(target) + " is quarantined");

  const std::string event_bytes = serialize_events(events);
  const std::string commit_bytes = serialize_commits(commits);
  append_bytes(events_file(target), event_bytes);
  append_bytes(commits_file(target), commit_bytes);

  repos_.push_back(RepoEntry{std::string(repo_id), target, s.event_bytes, event_bytes.size(), events.size(),
                             s.commit_bytes, commit_bytes.size(), commits.size()});
  s.event_records += events.size();
  s.event_bytes += event_bytes.size();
  s.commit_records += commits.size();
  s.commit_bytes += commit_bytes.size();
  save_manifest();
}

const EventStore::RepoEntry& EventStore::entry(std::string_view repo_id) const {
  for (const auto& r : repos_) {
    if (r.repo_id == repo_id) return r;
  }
  throw StoreError("repository not in store: " + std::string(repo_id));
}

std::string EventStore::read_range(const fs::path& file, std::uint32_t shard, std::uint64_t offset,
                                   std::uint64_t bytes) const {
  if (shards_.at(shard).quarantined) throw StoreError("shard " + std::to_string(shard) + " is quarantined");
  if (bytes == 0) return {};
  std::ifstream in(file, std::ios::binary);
  if (!in) throw StoreError("missing shard file " + file.filename().string() + " (shard " + std::to_string(shard) + ")");
  in.seekg(static_cast<std::streamoff>(offset));
  std::string buf(bytes, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::uint64_t>(in.gcount()) != bytes) {
    throw StoreError("short read in shard " + std::to_string(shard) + " at offset " + std::to_string(offset));
  }
  return buf;
}

std::vector<LibraryEvent> EventStore::events_of(std::string_view repo_id) const {
  const auto& r = entry(repo_id);
  return parse_events(read_range(events_file(r.shard), r.shard, r.event_offset, r.event_bytes));
}

std::vector<CommitIndexEntry> EventStore::commits_of(std::string_view repo_id) const {
  const auto& r = entry(repo_id);
  return parse_commits(read_range(commits_file(r.shard), r.shard, r.commit_offset, r.commit_bytes));
}

void EventStore::for_each_event(const ScanFilter& filter, const std::function<void(const LibraryEvent&)>& fn) const {
  for (const auto& r : repos_) {
    if (filter.repo && *filter.repo != r.repo_id) continue;
    for (const auto& e : events_of(r.repo_id)) {
      if (filter.library && *filter.library != e.library) continue;
      fn(e);
    }
  }
}

std::vector<LibraryEvent> EventStore::scan(const ScanFilter& filter) const {
  std::vector<LibraryEvent> out;
  for_each_event(filter, [&](const LibraryEvent& e) { out.push_back(e); });
  return out;
}

EventShard EventStore::read_shard(std::uint32_t shard_id) const {
  if (shard_id >= shards_.size()) throw StoreError("no shard " + std::to_string(shard_id));
  const auto& s = shards_[shard_id];
  EventShard out;
  out.shard_id = shard_id;
  out.events = parse_events(read_range(events_file(shard_id), shard_id, 0, s.event_bytes));
  out.commits = parse_commits(read_range(commits_file(shard_id), shard_id, 0, s.commit_bytes));
  return out;
}

}  // namespace adoptminer
