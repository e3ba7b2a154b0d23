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

// Recombination schema shared by every pipeline stage: abstracts, role-tagged
// entity spans, blend/inspiration records, and their canonical forms.

#ifndef RECOMB_CORE_HPP_
#define RECOMB_CORE_HPP_

#include <algorithm>
#include <cctype>
#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace recomb {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Text helpers

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Collapses whitespace runs to one space, trims, lowercases.
inline std::string normalize_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calendar date

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  bool valid() const {
    std::chrono::year_month_day ymd{std::chrono::year{year},
                                    std::chrono::month{static_cast<unsigned>(month)},
                                    std::chrono::day{static_cast<unsigned>(day)}};
    return ymd.ok();
  }

  std::string iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
  }

  // Accepts "YYYY-MM-DD", "YYYY-MM" and "YYYY"; missing parts pad to the
  // first of the month/year.
  static std::optional<Date> parse(std::string_view s) {
    std::string t = trim(s);
    auto digits = [&](size_t pos, size_t n) -> std::optional<int> {
      if (pos + n > t.size()) return std::nullopt;
      int v = 0;
      for (size_t i = pos; i < pos + n; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return std::nullopt;
        v = v * 10 + (t[i] - '0');
      }
      return v;
    };
    Date d;
    auto y = digits(0, 4);
    if (!y) return std::nullopt;
    d.year = *y;
    if (t.size() == 4) return d.valid() ? std::optional<Date>(d) : std::nullopt;
    if (t.size() < 7 || t[4] != '-') return std::nullopt;
    auto m = digits(5, 2);
    if (!m) return std::nullopt;
    d.month = *m;
    if (t.size() == 7) return d.valid() ? std::optional<Date>(d) : std::nullopt;
    if (t.size() != 10 || t[7] != '-') return std::nullopt;
    auto dd = digits(8, 2);
    if (!dd) return std::nullopt;
    d.day = *dd;
    return d.valid() ? std::optional<Date>(d) : std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Enumerations

enum class Role { kCombinationElement, kInspirationSource, kInspirationTarget };
enum class RelationType { kBlend, kInspiration };
enum class GoldLabel { kBlend, kInspiration, kNotPresent };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::kCombinationElement: return "combination-element";
    case Role::kInspirationSource: return "inspiration-source";
    case Role::kInspirationTarget: return "inspiration-target";
  }
  return "";
}

inline std::string_view to_string(RelationType t) {
  return t == RelationType::kBlend ? "blend" : "inspiration";
}

inline std::string_view to_string(GoldLabel l) {
  switch (l) {
    case GoldLabel::kBlend: return "blend";
    case GoldLabel::kInspiration: return "inspiration";
    case GoldLabel::kNotPresent: return "not-present";
  }
  return "";
}

inline std::optional<Role> parse_role(std::string_view s) {
  if (s == "combination-element") return Role::kCombinationElement;
  if (s == "inspiration-source") return Role::kInspirationSource;
  if (s == "inspiration-target") return Role::kInspirationTarget;
  return std::nullopt;
}

inline std::optional<RelationType> parse_relation_type(std::string_view s) {
  if (s == "blend") return RelationType::kBlend;
  if (s == "inspiration") return RelationType::kInspiration;
  return std::nullopt;
}

inline std::optional<GoldLabel> parse_gold_label(std::string_view s) {
  if (s == "blend") return GoldLabel::kBlend;
  if (s == "inspiration") return GoldLabel::kInspiration;
  if (s == "not-present") return GoldLabel::kNotPresent;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Domain types

struct AbstractDoc {
  std::string paper_id;
  std::string title;
  std::string abstract;
  std::vector<std::string> arxiv_categories;
  Date published;
  std::vector<std::string> matched_keywords;

  bool operator==(const AbstractDoc&) const = default;
};

struct EntitySpan {
  std::string text;
  Role role = Role::kCombinationElement;
  std::optional<std::string> refined_text;

  bool operator==(const EntitySpan&) const = default;
};

struct Provenance {
  std::string model;
  std::string prompt_digest;
  std::string timestamp;

  bool operator==(const Provenance&) const = default;
};

struct RecombinationRecord {
  std::string paper_id;
  RelationType relation_type = RelationType::kBlend;
  std::vector<EntitySpan> entities;
  Provenance provenance;

  bool operator==(const RecombinationRecord&) const = default;

  // Inspiration accessors; only meaningful on valid inspiration records.
  const EntitySpan& source() const {
    for (const auto& e : entities)
      if (e.role == Role::kInspirationSource) return e;
    throw std::logic_error("record has no inspiration-source");
  }
  const EntitySpan& target() const {
    for (const auto& e : entities)
      if (e.role == Role::kInspirationTarget) return e;
    throw std::logic_error("record has no inspiration-target");
  }
};

struct GoldAnnotation {
  std::string paper_id;
  std::string annotator_id;
  GoldLabel label = GoldLabel::kNotPresent;
  std::vector<EntitySpan> entities;

  bool operator==(const GoldAnnotation&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

struct SchemaViolation {
  std::string rule;    // blend-arity, blend-roles, inspiration-roles, ...
  std::string detail;
};

// Checks the relation shape only (roles, arity, nonempty spans); paper_id is
// not required so that freshly parsed replies can be checked.
inline std::optional<SchemaViolation> validate_shape(const RecombinationRecord& r) {
  for (const auto& e : r.entities) {
    if (trim(e.text).empty()) return SchemaViolation{"entity-text", "empty entity text"};
    if (e.refined_text && trim(*e.refined_text).empty())
      return SchemaViolation{"refined-text", "refined_text present but empty"};
  }
  if (r.relation_type == RelationType::kBlend) {
    if (r.entities.size() < 2)
      return SchemaViolation{"blend-arity", "blend needs at least two elements"};
    for (const auto& e : r.entities)
      if (e.role != Role::kCombinationElement)
        return SchemaViolation{"blend-roles", "blend entity with role " + std::string(to_string(e.role))};
    return std::nullopt;
  }
  int sources = 0, targets = 0, other = 0;
  for (const auto& e : r.entities) {
    if (e.role == Role::kInspirationSource) ++sources;
    else if (e.role == Role::kInspirationTarget) ++targets;
    else ++other;
  }
  if (sources != 1 || targets != 1 || other != 0)
    return SchemaViolation{"inspiration-roles",
                           "inspiration needs exactly one source and one target (got " +
                               std::to_string(sources) + " source, " + std::to_string(targets) +
                               " target, " + std::to_string(other) + " other)"};
  return std::nullopt;
}

// Returns nullopt when every record invariant holds, otherwise the first
// failed rule.
inline std::optional<SchemaViolation> validate_record(const RecombinationRecord& r) {
  if (trim(r.paper_id).empty()) return SchemaViolation{"paper-id", "empty paper_id"};
  return validate_shape(r);
}

// Sorted, normalized element texts of a blend. Blends are symmetric, so two
// blends over the same element multiset share a key.
inline std::vector<std::string> canonical_blend_key(const RecombinationRecord& r) {
  if (r.relation_type != RelationType::kBlend)
    throw std::invalid_argument("canonical_blend_key: not a blend record");
  std::vector<std::string> key;
  key.reserve(r.entities.size());
  for (const auto& e : r.entities) key.push_back(normalize_text(e.text));
  std::sort(key.begin(), key.end());
  return key;
}

// ---------------------------------------------------------------------------
// JSON serialization. Field names are part of the on-disk contract.

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Json to_json(const EntitySpan& e) {
  Json j{{"text", e.text}, {"role", to_string(e.role)}};
  if (e.refined_text) j["refined_text"] = *e.refined_text;
  return j;
}

inline EntitySpan entity_from_json(const Json& j) {
  EntitySpan e;
  e.text = j.at("text").get<std::string>();
  auto role = parse_role(j.at("role").get<std::string>());
  if (!role) throw FormatError("unknown role: " + j.at("role").get<std::string>());
  e.role = *role;
  if (j.contains("refined_text") && !j["refined_text"].is_null())
    e.refined_text = j["refined_text"].get<std::string>();
  return e;
}

inline Json to_json(const RecombinationRecord& r) {
  Json ents = Json::array();
  for (const auto& e : r.entities) ents.push_back(to_json(e));
  return Json{{"paper_id", r.paper_id},
              {"relation_type", to_string(r.relation_type)},
              {"entities", ents},
              {"provenance",
               {{"model", r.provenance.model},
                {"prompt_digest", r.provenance.prompt_digest},
                {"timestamp", r.provenance.timestamp}}}};
}

inline RecombinationRecord record_from_json(const Json& j) {
  RecombinationRecord r;
  r.paper_id = j.at("paper_id").get<std::string>();
  auto t = parse_relation_type(j.at("relation_type").get<std::string>());
  if (!t) throw FormatError("unknown relation_type");
  r.relation_type = *t;
  for (const auto& e : j.at("entities")) r.entities.push_back(entity_from_json(e));
  if (j.contains("provenance")) {
    const auto& p = j["provenance"];
    r.provenance.model = p.value("model", "");
    r.provenance.prompt_digest = p.value("prompt_digest", "");
    r.provenance.timestamp = p.value("timestamp", "");
  }
  return r;
}

inline Json to_json(const AbstractDoc& d) {
  return Json{{"paper_id", d.paper_id},
              {"title", d.title},
              {"abstract", d.abstract},
              {"arxiv_categories", d.arxiv_categories},
              {"published", d.published.iso()},
              {"matched_keywords", d.matched_keywords}};
}

inline AbstractDoc doc_from_json(const Json& j) {
  AbstractDoc d;
  d.paper_id = j.at("paper_id").get<std::string>();
  d.title = j.value("title", "");
  d.abstract = j.at("abstract").get<std::string>();
  d.arxiv_categories = j.value("arxiv_categories", std::vector<std::string>{});
  auto date = Date::parse(j.at("published").get<std::string>());
  if (!date) throw FormatError("invalid published date for " + d.paper_id);
  d.published = *date;
  d.matched_keywords = j.value("matched_keywords", std::vector<std::string>{});
  if (d.paper_id.empty()) throw FormatError("empty paper_id");
  if (trim(d.abstract).empty()) throw FormatError("empty abstract for " + d.paper_id);
  return d;
}

inline Json to_json(const GoldAnnotation& a) {
  Json ents = Json::array();
  for (const auto& e : a.entities) ents.push_back(to_json(e));
  return Json{{"paper_id", a.paper_id},
              {"annotator_id", a.annotator_id},
              {"label", to_string(a.label)},
              {"entities", ents}};
}

inline GoldAnnotation annotation_from_json(const Json& j) {
  GoldAnnotation a;
  a.paper_id = j.at("paper_id").get<std::string>();
  a.annotator_id = j.value("annotator_id", "");
  auto l = parse_gold_label(j.at("label").get<std::string>());
  if (!l) throw FormatError("unknown label");
  a.label = *l;
  for (const auto& e : j.value("entities", Json::array())) a.entities.push_back(entity_from_json(e));
  if ((a.label == GoldLabel::kNotPresent) != a.entities.empty())
    throw FormatError("annotation " + a.paper_id + ": not-present iff no entities");
  return a;
}

}  // namespace recomb

#endif  // RECOMB_CORE_HPP_
