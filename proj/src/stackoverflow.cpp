#include "adoptminer/stackoverflow.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <charconv>
#include <cmath>
#include <istream>

#include "adoptminer/csv.hpp"
#include "adoptminer/errors.hpp"
#include "adoptminer/imports.hpp"
#include "adoptminer/text.hpp"

namespace adoptminer {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

enum class RowStatus { Complete, Incomplete, Malformed };

struct RowScan {
  RowStatus status = RowStatus::Incomplete;
  std::size_t end = 0;
  std::map<std::string, std::string, std::less<>> attributes;
};

// Scans `<row a="..." .../>` starting at `pos` (which points at '<').
RowScan scan_row(std::string_view buf, std::size_t pos) {
  RowScan scan;
  std::size_t i = pos + 4;
  const auto fail = [&](std::size_t at) {
    scan.status = RowStatus::Malformed;
    scan.end = std::max(at, pos + 1);
    return scan;
  };
  while (true) {
    while (i < buf.size() && (buf[i] == ' ' || buf[i] == '\t' || buf[i] == '\n' || buf[i] == '\r')) ++i;
    if (i >= buf.size()) return scan;
    if (buf[i] == '/') {
      if (i + 1 >= buf.size()) return scan;
      if (buf[i + 1] != '>') return fail(i + 1);
      scan.status = RowStatus::Complete;
      scan.end = i + 2;
      return scan;
    }
    if (buf[i] == '>') {
      const auto close = buf.find("</row>", i);
      if (close == std::string_view::npos) return scan;
      scan.status = RowStatus::Complete;
      scan.end = close + 6;
      return scan;
    }
    const std::size_t name_start = i;
    while (i < buf.size() && (is_identifier_char(buf[i]) || buf[i] == ':' || buf[i] == '-')) ++i;
    if (i >= buf.size()) return scan;
    if (i == name_start || buf[i] != '=') return fail(i);
    const std::string name(buf.substr(name_start, i - name_start));
    ++i;
    if (i >= buf.size()) return scan;
    const char quote = buf[i];
    if (quote != '"' && quote != '\'') return fail(i);
    const auto close = buf.find(quote, i + 1);
    if (close == std::string_view::npos) {
      // An unescaped '<' means the value ran into the next element.
      if (buf.find('<', i + 1) != std::string_view::npos) return fail(buf.find('<', i + 1));
      return scan;
    }
    const std::string_view raw = buf.substr(i + 1, close - i - 1);
    if (raw.find('<') != std::string_view::npos) return fail(i + 1 + raw.find('<'));
    scan.attributes[name] = unescape_entities(raw);
    i = close + 1;
  }
}

std::optional<std::int64_t> to_int(std::string_view s) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> code_blocks(std::string_view html) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = html.find("<code", pos);
    if (open == std::string_view::npos) break;
    const auto gt = html.find('>', open);
    if (gt == std::string_view::npos) break;
    const char after = html[open + 5];
    if (after != '>' && after != ' ') {
      pos = open + 5;
      continue;
    }
    const auto close = html.find("</code>", gt);
    if (close == std::string_view::npos) break;
    out.push_back(unescape_entities(html.substr(gt + 1, close - gt - 1)));
    pos = close + 7;
  }
  return out;
}

void handle_row(const RowScan& row, const std::function<void(SoPost&&)>& sink, DumpStats& stats) {
  const auto& a = row.attributes;
  const auto id = a.find("Id");
  const auto type = a.find("PostTypeId");
  if (id == a.end() || type == a.end()) {
    ++stats.malformed;
    return;
  }
  const auto post_id = to_int(id->second);
  const auto post_type = to_int(type->second);
  if (!post_id || !post_type) {
    ++stats.malformed;
    return;
  }
  const auto tags = a.find("Tags");
  const bool python = tags != a.end() && std::ranges::any_of(parse_tags(tags->second), [](const std::string& t) {
                        return is_python_tag(t);
                      });
  if (*post_type != 1 || !python) {
    ++stats.filtered;
    return;
  }
  const auto body = a.find("Body");
  if (body == a.end()) {
    ++stats.malformed;
    return;
  }
  ++stats.yielded;
  sink(SoPost{*post_id, code_blocks(body->second)});
}

}  // namespace

std::string unescape_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += s[i++];
      continue;
    }
    const std::string_view ent = s.substr(i + 1, semi - i - 1);
    bool ok = true;
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (ent.size() > 1 && ent[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = ent[1] == 'x' || ent[1] == 'X';
      const std::string_view digits = ent.substr(hex ? 2 : 1);
      const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      ok = !digits.empty() && res.ec == std::errc{} && res.ptr == digits.data() + digits.size() && cp <= 0x10FFFF;
      if (ok) append_utf8(out, cp);
    } else {
      ok = false;
    }
    if (!ok) {
      out += s[i++];
      continue;
    }
    i = semi + 1;
  }
  return out;
}

std::vector<std::string> parse_tags(std::string_view tags) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : tags) {
    if (c == '<' || c == '>' || c == '|' || c == ' ') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_python_tag(std::string_view tag) {
  return tag == "python" || tag.substr(0, 7) == "python-";
}

void parse_posts_dump(std::istream& in, const std::function<void(SoPost&&)>& sink, DumpStats* stats) {
  DumpStats local;
  DumpStats& st = stats ? *stats : local;
  std::string buf;
  std::string line;
  std::size_t cursor = 0;
  while (std::getline(in, line)) {
    buf += line;
    buf += '\n';
    while (true) {
      std::size_t pos = buf.find("<row", cursor);
      while (pos != std::string::npos && pos + 4 < buf.size()) {
        const char next = buf[pos + 4];
        if (next == ' ' || next == '\t' || next == '\n' || next == '/' || next == '>') break;
        pos = buf.find("<row", pos + 4);
      }
      if (pos == std::string::npos) {
        buf.clear();
        cursor = 0;
        break;
      }
      const RowScan row = scan_row(buf, pos);
      if (row.status == RowStatus::Incomplete) {
        buf.erase(0, pos);
        cursor = 0;
        break;
      }
      ++st.rows;
      if (row.status == RowStatus::Malformed) {
        ++st.malformed;
      } else {
        handle_row(row, sink, st);
      }
      cursor = row.end;
    }
  }
  if (buf.find("<row", cursor) != std::string::npos) {
    ++st.rows;
    ++st.malformed;
  }
}

std::vector<SoPost> parse_posts_dump(std::istream& in, DumpStats* stats) {
  std::vector<SoPost> out;
  parse_posts_dump(in, [&](SoPost&& p) { out.push_back(std::move(p)); }, stats);
  return out;
}

std::string_view to_string(LibraryClass c) {
  switch (c) {
    case LibraryClass::Standard: return "standard";
    case LibraryClass::PyPi: return "pypi";
    case LibraryClass::Other: return "other";
  }
  return "other";
}

LibraryLists LibraryLists::load(const std::filesystem::path& standard_file, const std::filesystem::path& pypi_file) {
  const auto names = [](const std::filesystem::path& p) {
    std::set<std::string, std::less<>> out;
    const std::string text = read_file(p);
    for (auto line : split(text, '\n')) {
      const auto hash = line.find('#');
      if (hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (!line.empty()) out.emplace(line);
    }
    return out;
  };
  return LibraryLists{names(standard_file), names(pypi_file)};
}

LibraryClass LibraryLists::classify(std::string_view library) const {
  if (standard.contains(library)) return LibraryClass::Standard;
  if (pypi.contains(library)) return LibraryClass::PyPi;
  return LibraryClass::Other;
}

std::vector<SoLibraryCount> count_libraries(std::span<const SoPost> posts, const LibraryLists& lists) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& post : posts) {
    std::set<std::string> libs;
    for (const auto& block : post.code_blocks) {
      for (auto line : split(block, '\n')) {
        std::string_view l = trim(line);
        if (l.substr(0, 4) == ">>> " || l.substr(0, 4) == "... ") l = l.substr(4);
        for (const auto& st : extract_imports(l)) libs.insert(st.top_level);
      }
    }
    for (const auto& lib : libs) ++counts[lib];
  }
  std::vector<SoLibraryCount> out;
  for (const auto& [lib, n] : counts) out.push_back(SoLibraryCount{lib, n, lists.classify(lib)});
  std::stable_sort(out.begin(), out.end(), [](const SoLibraryCount& a, const SoLibraryCount& b) {
    return a.post_count > b.post_count;
  });
  return out;
}

Regression least_squares(std::span<const double> x, std::span<const double> y) {
  Regression r;
  r.points = std::min(x.size(), y.size());
  if (r.points < kMinRegressionPoints) {
    r.skipped = true;
    return r;
  }
  const double n = static_cast<double>(r.points);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < r.points; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < r.points; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) {
    r.skipped = true;
    return r;
  }
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.r_squared = syy == 0 ? 0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  const double df = n - 2;
  const double sse = std::max(0.0, syy - r.slope * sxy);
  const double se = std::sqrt(sse / df / sxx);
  if (se == 0 || !std::isfinite(se)) {
    r.p_value = r.slope == 0 ? 1 : 0;
  } else {
    const boost::math::students_t dist(df);
    r.p_value = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.slope / se)));
  }
  return r;
}

std::vector<Regression> correlate_usage(std::span<const SoLibraryCount> so_counts,
                                        const std::map<std::string, std::uint64_t>& gh_users) {
  std::vector<Regression> out;
  for (auto cls : {LibraryClass::Standard, LibraryClass::PyPi, LibraryClass::Other}) {
    std::vector<double> x, y;
    for (const auto& c : so_counts) {
      if (c.library_class != cls || c.post_count < 1) continue;
      const auto it = gh_users.find(c.library);
      if (it == gh_users.end() || it->second < 1) continue;
      x.push_back(std::log10(static_cast<double>(c.post_count)));
      y.push_back(std::log10(static_cast<double>(it->second)));
    }
    Regression r = least_squares(x, y);
    r.label = std::string(to_string(cls));
    r.points = x.size();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SoLibraryCount> read_so_counts_csv(const std::filesystem::path& path) {
  const auto table = parse_csv(read_file(path));
  std::vector<SoLibraryCount> out;
  if (table.empty()) return out;
  for (std::size_t k = 1; k < table.size(); ++k) {
    const auto& row = table[k];
    if (row.size() < 3) throw Error("malformed so_counts row " + std::to_string(k) + " in " + path.string());
    SoLibraryCount c;
    c.library = row[0];
    const auto n = to_int(row[1]);
    if (!n || *n < 0) throw Error("invalid post count in " + path.string());
    c.post_count = static_cast<std::uint64_t>(*n);
    c.library_class = row[2] == "standard" ? LibraryClass::Standard
                      : row[2] == "pypi"   ? LibraryClass::PyPi
                                           : LibraryClass::Other;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace adoptminer
