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

// Salient-recombination extraction: prompt construction, reply parsing and
// validation, entity refinement, and binarization for the KB.

#ifndef RECOMB_EXTRACT_HPP_
#define RECOMB_EXTRACT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recomb/core.hpp"
#include "recomb/gateway.hpp"
#include "recomb/prompts.hpp"

namespace recomb {

struct ExtractionOutcome {
  enum class Kind { kPresent, kNotPresent, kParseFailure };

  Kind kind = Kind::kNotPresent;
  std::optional<RecombinationRecord> record;  // set iff kPresent
  std::string reason;                         // set iff kParseFailure

  static ExtractionOutcome present(RecombinationRecord r) { return {Kind::kPresent, std::move(r), {}}; }
  static ExtractionOutcome not_present() { return {Kind::kNotPresent, std::nullopt, {}}; }
  static ExtractionOutcome parse_failure(std::string why) { return {Kind::kParseFailure, std::nullopt, std::move(why)}; }

  bool is_present() const { return kind == Kind::kPresent; }
};

inline std::string_view to_string(ExtractionOutcome::Kind k) {
  switch (k) {
    case ExtractionOutcome::Kind::kPresent: return "present";
    case ExtractionOutcome::Kind::kNotPresent: return "not-present";
    case ExtractionOutcome::Kind::kParseFailure: return "parse-failure";
  }
  return "";
}

// Locates the first balanced `{...}` that parses as JSON, honouring string
// literals and escapes.
inline std::optional<Json> first_json_object(std::string_view raw) {
  for (size_t start = raw.find('{'); start != std::string_view::npos; start = raw.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (size_t i = start; i < raw.size(); ++i) {
      char c = raw[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        Json j = Json::parse(raw.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
        break;
      }
    }
  }
  return std::nullopt;
}

namespace detail {

// Accepts either a string or an array of strings.
inline std::optional<std::vector<std::string>> string_list(const Json& obj, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  const Json& v = obj[key];
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(trim(v.get<std::string>()));
  } else if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_string()) return std::nullopt;
      out.push_back(trim(x.get<std::string>()));
    }
  } else {
    return std::nullopt;
  }
  return out;
}

}  // namespace detail

// Parses an extraction reply. Surrounding prose is tolerated; only the first
// JSON object is read. "combination" maps to a blend. Every failure is a
// parse-failure value rather than an exception.
inline ExtractionOutcome parse_output(std::string_view raw) {
  auto obj = first_json_object(raw);
  if (!obj) return ExtractionOutcome::parse_failure("unparseable");
  if (!obj->contains("recombination_type") || !(*obj)["recombination_type"].is_string())
    return ExtractionOutcome::parse_failure("schema: missing recombination_type");
  std::string type = to_lower(trim((*obj)["recombination_type"].get<std::string>()));

  RecombinationRecord rec;
  if (type == "none") return ExtractionOutcome::not_present();
  if (type == "combination") {
    rec.relation_type = RelationType::kBlend;
    auto elems = detail::string_list(*obj, "combination-element");
    if (!elems) return ExtractionOutcome::parse_failure("schema: combination-element");
    for (auto& e : *elems) rec.entities.push_back({std::move(e), Role::kCombinationElement, std::nullopt});
  } else if (type == "inspiration") {
    rec.relation_type = RelationType::kInspiration;
    auto src = detail::string_list(*obj, "inspiration-source");
    auto tgt = detail::string_list(*obj, "inspiration-target");
    if (!src || !tgt) return ExtractionOutcome::parse_failure("schema: inspiration-source/target");
    for (auto& e : *src) rec.entities.push_back({std::move(e), Role::kInspirationSource, std::nullopt});
    for (auto& e : *tgt) rec.entities.push_back({std::move(e), Role::kInspirationTarget, std::nullopt});
  } else {
    return ExtractionOutcome::parse_failure("schema: unknown recombination_type '" + type + "'");
  }
  if (auto v = validate_shape(rec)) return ExtractionOutcome::parse_failure("schema: " + v->rule);
  return ExtractionOutcome::present(std::move(rec));
}

inline std::string extraction_prompt(const AbstractDoc& doc) {
  return prompts::fill(prompts::kExtraction, {{"ABSTRACT", doc.abstract}});
}

// fill template -> generate -> parse. At most one relation per abstract.
inline ExtractionOutcome extract_salient(const AbstractDoc& doc, Gateway& gw, const std::string& model) {
  std::string prompt = extraction_prompt(doc);
  GenResponse res = gw.generate(GenRequest{model, prompt, 1024, 0.0});
  ExtractionOutcome out = parse_output(res.text);
  if (!out.is_present()) return out;
  out.record->paper_id = doc.paper_id;
  out.record->provenance = Provenance{model, sha256_hex(prompt), res.created};
  if (auto v = validate_record(*out.record)) return ExtractionOutcome::parse_failure("schema: " + v->rule);
  return out;
}

inline Json to_json(const ExtractionOutcome& o, const std::string& paper_id) {
  Json j{{"paper_id", paper_id}, {"kind", to_string(o.kind)}};
  if (o.record) j["record"] = to_json(*o.record);
  if (!o.reason.empty()) j["reason"] = o.reason;
  return j;
}

// ---------------------------------------------------------------------------
// Post-processing

inline Json recombination_json(const RecombinationRecord& r) {
  if (r.relation_type == RelationType::kBlend) {
    Json elems = Json::array();
    for (const auto& e : r.entities) elems.push_back(e.text);
    return Json{{"recombination_type", "combination"}, {"combination-element", elems}};
  }
  return Json{{"recombination_type", "inspiration"},
              {"inspiration-source", r.source().text},
              {"inspiration-target", r.target().text}};
}

inline std::string postprocess_prompt(const RecombinationRecord& r, const AbstractDoc& doc) {
  auto tmpl = r.relation_type == RelationType::kBlend ? prompts::kPostprocessCombination
                                                      : prompts::kPostprocessInspiration;
  return prompts::fill(tmpl, {{"ABSTRACT", doc.abstract}, {"RECOMBINATION", recombination_json(r).dump(2)}});
}

// Returns a copy of `record` with refined_text set on every entity. Original
// spans are never modified. An unusable reply leaves the record unchanged.
inline RecombinationRecord postprocess_record(const RecombinationRecord& record, const AbstractDoc& doc,
                                              Gateway& gw, const std::string& model) {
  if (auto v = validate_record(record)) throw std::invalid_argument("postprocess_record: invalid record: " + v->rule);
  std::string reply = gw.generate(GenRequest{model, postprocess_prompt(record, doc), 1024, 0.0}).text;
  auto obj = first_json_object(reply);
  if (!obj) return record;

  std::vector<std::string> refined;
  if (record.relation_type == RelationType::kBlend) {
    auto elems = detail::string_list(*obj, "combination-element");
    if (!elems || elems->size() != record.entities.size()) return record;
    refined = *elems;
  } else {
    auto src = detail::string_list(*obj, "inspiration-source");
    auto tgt = detail::string_list(*obj, "inspiration-target");
    if (!src || !tgt || src->size() != 1 || tgt->size() != 1) return record;
    for (const auto& e : record.entities)
      refined.push_back(e.role == Role::kInspirationSource ? src->front() : tgt->front());
  }
  for (const auto& s : refined)
    if (s.empty()) return record;
  RecombinationRecord out = record;
  for (size_t i = 0; i < out.entities.size(); ++i) out.entities[i].refined_text = refined[i];
  return out;
}

// ---------------------------------------------------------------------------
// Binarization

struct BinarizedRecord {
  std::string parent_id;  // one salient relation per abstract, so the paper id
  size_t pair_index = 0;
  RecombinationRecord record;
};

// Inspirations pass through; an n-element blend expands to all C(n,2)
// unordered pairs (i < j, lexicographic by index).
inline std::vector<BinarizedRecord> binarize(const RecombinationRecord& r) {
  if (auto v = validate_record(r)) throw std::invalid_argument("binarize: invalid record: " + v->rule);
  std::vector<BinarizedRecord> out;
  if (r.relation_type == RelationType::kInspiration) {
    RecombinationRecord copy = r;
    // source first, target second
    copy.entities = {r.source(), r.target()};
    out.push_back({r.paper_id, 0, std::move(copy)});
    return out;
  }
  size_t k = 0;
  for (size_t i = 0; i < r.entities.size(); ++i)
    for (size_t j = i + 1; j < r.entities.size(); ++j) {
      RecombinationRecord pair = r;
      pair.entities = {r.entities[i], r.entities[j]};
      out.push_back({r.paper_id, k++, std::move(pair)});
    }
  return out;
}

}  // namespace recomb

#endif  // RECOMB_EXTRACT_HPP_
