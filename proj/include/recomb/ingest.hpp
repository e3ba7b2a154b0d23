// Copyright 2026 The Recomb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// arXiv metadata snapshot ingestion and keyword screening.
//
// The snapshot is the monthly JSON-lines metadata export: one object per
// line with `id`, `title`, `abstract`, space-separated `categories`, and a
// `versions` array whose first entry carries the submission date.

#ifndef RECOMB_INGEST_HPP_
#define RECOMB_INGEST_HPP_

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "recomb/core.hpp"
#include "recomb/io.hpp"

namespace recomb {

struct CorpusFilter {
  std::set<std::string> allowed_categories;  // compared case-insensitively
  std::optional<Date> date_min;
  std::optional<Date> date_max;

  void check() const {
    if (date_min && date_max && *date_max < *date_min)
      throw std::invalid_argument("CorpusFilter: date_min after date_max");
  }

  bool admits(const AbstractDoc& d) const {
    if (date_min && d.published < *date_min) return false;
    if (date_max && *date_max < d.published) return false;
    for (const auto& c : d.arxiv_categories)
      for (const auto& a : allowed_categories)
        if (to_lower(c) == to_lower(a)) return true;
    return false;
  }
};

// The AI categories used throughout the KB build.
inline CorpusFilter default_ai_filter() {
  CorpusFilter f;
  f.allowed_categories = {"cs.AI", "cs.CL", "cs.CV", "cs.CY", "cs.HC",
                          "cs.IR", "cs.LG", "cs.RO", "cs.SI"};
  return f;
}

namespace detail {

inline std::string collapse_ws(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

// "Mon, 2 Apr 2007 19:18:42 GMT" -> 2007-04-02
inline std::optional<Date> parse_rfc822_date(std::string_view s) {
  static constexpr std::array<std::string_view, 12> kMonths = {
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  std::istringstream in{std::string(s)};
  std::string tok;
  std::vector<std::string> toks;
  while (in >> tok) toks.push_back(tok);
  size_t i = 0;
  if (!toks.empty() && toks[0].back() == ',') i = 1;
  if (toks.size() < i + 3) return std::nullopt;
  Date d;
  try {
    d.day = std::stoi(toks[i]);
    d.year = std::stoi(toks[i + 2]);
  } catch (...) {
    return std::nullopt;
  }
  std::string mon = to_lower(toks[i + 1]).substr(0, 3);
  d.month = 0;
  for (size_t m = 0; m < kMonths.size(); ++m)
    if (mon == kMonths[m]) d.month = static_cast<int>(m) + 1;
  if (d.month == 0 || !d.valid()) return std::nullopt;
  return d;
}

}  // namespace detail

// Converts one snapshot row to a document; nullopt when required fields are
// missing or malformed.
inline std::optional<AbstractDoc> doc_from_snapshot_row(const Json& j) {
  if (!j.is_object()) return std::nullopt;
  if (!j.contains("id") || !j["id"].is_string()) return std::nullopt;
  if (!j.contains("abstract") || !j["abstract"].is_string()) return std::nullopt;
  AbstractDoc d;
  d.paper_id = trim(j["id"].get<std::string>());
  d.title = detail::collapse_ws(j.value("title", ""));
  d.abstract = detail::collapse_ws(j["abstract"].get<std::string>());
  if (d.paper_id.empty() || d.abstract.empty()) return std::nullopt;
  if (j.contains("categories")) {
    const auto& c = j["categories"];
    if (c.is_string()) {
      std::istringstream in(c.get<std::string>());
      std::string tok;
      while (in >> tok) d.arxiv_categories.push_back(tok);
    } else if (c.is_array()) {
      for (const auto& t : c) d.arxiv_categories.push_back(t.get<std::string>());
    }
  }
  std::optional<Date> date;
  if (j.contains("versions") && j["versions"].is_array() && !j["versions"].empty()) {
    const auto& v0 = j["versions"][0];
    if (v0.is_object() && v0.contains("created") && v0["created"].is_string())
      date = detail::parse_rfc822_date(v0["created"].get<std::string>());
  }
  if (!date && j.contains("published") && j["published"].is_string())
    date = Date::parse(j["published"].get<std::string>());
  if (!date && j.contains("update_date") && j["update_date"].is_string())
    date = Date::parse(j["update_date"].get<std::string>());
  if (!date) return std::nullopt;
  d.published = *date;
  return d;
}

struct LoadStats {
  size_t lines = 0;
  size_t kept = 0;
  size_t filtered_out = 0;
  size_t skipped_malformed = 0;
};

// Streams admitted documents to `sink`. Malformed lines are counted, not
// fatal; an unreadable file throws IoError.
inline LoadStats load_snapshot(const fs::path& path, const CorpusFilter& filter,
                               const std::function<void(AbstractDoc&&)>& sink) {
  filter.check();
  LoadStats stats;
  auto js = for_each_jsonl(
      path,
      [&](const Json& j, size_t) {
        auto doc = doc_from_snapshot_row(j);
        if (!doc) return false;
        if (filter.admits(*doc)) {
          ++stats.kept;
          sink(std::move(*doc));
        } else {
          ++stats.filtered_out;
        }
        return true;
      },
      /*skip_malformed=*/true);
  stats.lines = js.lines;
  stats.skipped_malformed = js.malformed;
  return stats;
}

inline std::vector<AbstractDoc> load_snapshot(const fs::path& path, const CorpusFilter& filter,
                                              LoadStats* stats_out = nullptr) {
  std::vector<AbstractDoc> docs;
  auto stats = load_snapshot(path, filter, [&](AbstractDoc&& d) { docs.push_back(std::move(d)); });
  if (stats_out) *stats_out = stats;
  return docs;
}

// Counts per (lowercased) category and per publication year.
inline Json corpus_summary(const std::vector<AbstractDoc>& docs, const LoadStats& stats) {
  std::map<std::string, size_t> per_cat;
  std::map<std::string, size_t> per_year;
  for (const auto& d : docs) {
    for (const auto& c : d.arxiv_categories) ++per_cat[to_lower(c)];
    ++per_year[std::to_string(d.published.year)];
  }
  return Json{{"documents", docs.size()},
              {"lines", stats.lines},
              {"filtered_out", stats.filtered_out},
              {"skipped_malformed", stats.skipped_malformed},
              {"per_category", per_cat},
              {"per_year", per_year}};
}

// ---------------------------------------------------------------------------
// Keyword screening (annotation-candidate selection only; large-scale mining
// runs over the unscreened corpus).

// The recombination keyword table, row-major, duplicates removed.
inline const std::vector<std::string>& recombination_keywords() {
  static const std::vector<std::string> kKeywords = [] {
    static constexpr const char* kTable[] = {
        "combines", "analogies", "aggregate", "intermingle", "unify", "blending",
        "combined", "equivalence", "aggregation", "intermingling", "unification", "blends",
        "combine", "equivalent", "align", "join", "weave", "blend",
        "combination", "reduction", "alignment", "joining", "weaving", "blends",
        "combinations", "reframing", "amalgamate", "juxtapose", "hybrid", "merge",
        "combining", "reframe", "amalgamation", "juxtaposition", "merge", "merges",
        "mixing", "reformulating", "assemble", "link", "merges", "unites",
        "mixture", "casting", "assembling", "linkage", "merging", "analogy",
        "mix", "cast", "associate", "meld", "merged", "analogize",
        "mixed", "casts", "association", "melding", "conflation", "analogies",
        "integrates", "viewing", "bond", "mesh", "couple", "equivalence",
        "integrating", "viewed", "bonding", "meshing", "unite", "equivalent",
        "integrate", "view", "bridge", "perceive", "unites", "correlate",
        "integrated", "inspire", "bridging", "perception", "interplay", "correlation",
        "connection", "inspired", "coalesce", "relate", "interconnect", "envision",
        "synergy", "inspiration", "coalescence", "relation", "harmonize", "envisioning",
        "fusion", "inspires", "compose", "splice", "harmony", "harmonize",
        "fuses", "inspiring", "composition", "splicing", "incorporate", "harmony",
        "unify", "interconnect", "incorporation", "synthesis", "reduction", "synthesis",
        "aggregate", "align", "inspiring", "inspire", "couple", "conjunction",
        "aggregation", "reframing", "inspiration", "fuse", "unite", "conjoin",
        "alignment", "reframe", "inspires", "synthesis",
    };
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const char* k : kTable)
      if (seen.insert(k).second) out.emplace_back(k);
    return out;
  }();
  return kKeywords;
}

struct ScreenOptions {
  bool include_title = true;
};

// Case-insensitive whole-word matches over title + abstract, ordered by first
// occurrence. Words are maximal runs of [A-Za-z0-9_], so "combination" never
// matches "combine".
inline std::vector<std::string> screen_keywords(const AbstractDoc& doc,
                                                const std::vector<std::string>& keywords,
                                                const ScreenOptions& opts = {}) {
  if (keywords.empty()) throw std::invalid_argument("screen_keywords: empty keyword list");
  std::unordered_map<std::string, size_t> wanted;  // lowercased keyword -> list index
  for (size_t i = 0; i < keywords.size(); ++i) wanted.emplace(to_lower(keywords[i]), i);

  std::string text = opts.include_title ? doc.title + "\n" + doc.abstract : doc.abstract;
  std::vector<std::pair<size_t, size_t>> hits;  // (position, keyword index)
  std::set<size_t> found;
  auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  size_t i = 0;
  while (i < text.size()) {
    if (!is_word(text[i])) {
      ++i;
      continue;
    }
    size_t start = i;
    while (i < text.size() && is_word(text[i])) ++i;
    auto it = wanted.find(to_lower(std::string_view(text).substr(start, i - start)));
    if (it != wanted.end() && found.insert(it->second).second) hits.emplace_back(start, it->second);
  }
  std::vector<std::string> out;
  out.reserve(hits.size());
  for (const auto& [pos, idx] : hits) out.push_back(keywords[idx]);
  return out;
}

}  // namespace recomb

#endif  // RECOMB_INGEST_HPP_
