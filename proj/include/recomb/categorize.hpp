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

// Scientific-domain labels for entities: an arXiv category when one fits,
// else a branch from the non-arXiv catalog, else Other.

#ifndef RECOMB_CATEGORIZE_HPP_
#define RECOMB_CATEGORIZE_HPP_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recomb/core.hpp"
#include "recomb/extract.hpp"
#include "recomb/gateway.hpp"
#include "recomb/prompts.hpp"

namespace recomb {

inline constexpr std::string_view kCatalogVersion = "1.0";

// Non-arXiv scientific branches.
inline const std::vector<std::string>& branch_catalog() {
  static const std::vector<std::string> kBranches = {
      "Agricultural Science", "Anatomy", "Animal Science",
      "Anthropology", "Archaeology", "Behavioral Science",
      "Biochemistry", "Bioinformatics", "Bioclimatology",
      "Biomedical Engineering", "Biophysics", "Biotechnology",
      "Botany", "Cardiology", "Chemical Engineering",
      "Civil Engineering", "Clinical Psychology", "Cognitive Science",
      "Criminology", "Cryosphere Science", "Cytology",
      "Demography", "Dentistry", "Dermatology",
      "Developmental Biology", "Ecology", "Ecotoxicology",
      "Economics", "Educational Psychology", "Electrical Engineering",
      "Emergency Medicine", "Endocrinology", "Energy Science",
      "Engineering Science", "Entomology", "Environmental Engineering",
      "Environmental Science", "Epidemiology", "Ethology",
      "Food Science", "Forestry", "Gastroenterology",
      "Genetics", "Genomics", "Geography",
      "Geology", "Geophysics", "Glaciology",
      "Health Informatics", "Histopathology", "Hydrodynamics",
      "Hydrogeology", "Hydrology", "Immunogenetics",
      "Immunology", "Industrial/Organizational Psychology", "Landscape Architecture",
      "Linguistics", "Marine Biology", "Materials Science",
      "Mechanical Engineering", "Medical Microbiology", "Meteorology",
      "Microbiology", "Mineralogy", "Molecular Biology",
      "Mycology", "Nanotechnology", "Neurology",
      "Neuroscience", "Nuclear Engineering", "Nutritional Science",
      "Obstetrics", "Oceanography", "Oncology",
      "Ophthalmology", "Ornithology", "Orthopedics",
      "Otology", "Paleoclimatology", "Paleontology",
      "Pathobiology", "Pathology", "Pediatric Medicine",
      "Pedagogy", "Petrology", "Pharmacogenomics",
      "Pharmacology", "Philosophy", "Physiology",
      "Political Science", "Proteomics", "Psychiatry",
      "Psychology", "Psychopathology", "Public Health",
      "Pulmonology", "Radiology", "Rheumatology",
      "Seismology", "Social Psychology", "Sociology",
      "Surgery", "Systems Biology", "Thermodynamics",
      "Toxicology", "Urban Planning", "Urology",
      "Veterinary Science", "Virology", "Volcanology",
      "Wildlife Biology", "Zoology",
  };
  return kBranches;
}

// Group -> member branches.
inline const std::vector<std::pair<std::string, std::vector<std::string>>>& branch_groups() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> kGroups = {
      {"Geosciences",
       {"Geology", "Geophysics", "Petrology", "Mineralogy", "Hydrology", "Hydrogeology", "Seismology", "Volcanology",
        "Cryosphere Science", "Glaciology", "Geography"}},
      {"Environmental Sciences", {"Environmental Science", "Environmental Engineering", "Ecology", "Ecotoxicology"}},
      {"Biomedical Sciences",
       {"Biochemistry", "Immunology", "Immunogenetics", "Neuroscience", "Oncology", "Pathology", "Pathobiology",
        "Pharmacology", "Toxicology"}},
      {"Health and Medicine",
       {"Cardiology", "Neurology", "Urology", "Gastroenterology", "Obstetrics", "Pediatric Medicine", "Rheumatology",
        "Dermatology", "Ophthalmology", "Otology", "Pulmonology", "Emergency Medicine", "Surgery", "Radiology",
        "Orthopedics", "Psychiatry", "Dentistry", "Public Health", "Epidemiology", "Health Informatics",
        "Clinical Psychology", "Psychopathology"}},
      {"Zoology",
       {"Zoology", "Entomology", "Ornithology", "Wildlife Biology", "Animal Science", "Veterinary Science",
        "Ethology"}},
      {"Agriculture", {"Agricultural Science", "Forestry"}},
      {"Food Sciences", {"Nutritional Science", "Food Science"}},
      {"Psychology",
       {"Educational Psychology", "Social Psychology", "Psychology", "Industrial/Organizational Psychology"}},
      {"Microbiology", {"Microbiology", "Medical Microbiology"}},
      {"Humanities", {"Linguistics", "Philosophy", "Pedagogy"}},
      {"Social Sciences", {"Sociology", "Anthropology", "Political Science", "Demography"}},
  };
  return kGroups;
}

// arXiv category code -> name.
inline const std::vector<std::pair<std::string, std::string>>& arxiv_taxonomy() {
  static const std::vector<std::pair<std::string, std::string>> kCodes = {
      {"cs.AI", "Artificial Intelligence"},
      {"cs.AR", "Hardware Architecture"},
      {"cs.CC", "Computational Complexity"},
      {"cs.CE", "Computational Engineering, Finance, and Science"},
      {"cs.CG", "Computational Geometry"},
      {"cs.CL", "Computation and Language"},
      {"cs.CR", "Cryptography and Security"},
      {"cs.CV", "Computer Vision and Pattern Recognition"},
      {"cs.CY", "Computers and Society"},
      {"cs.DB", "Databases"},
      {"cs.DC", "Distributed, Parallel, and Cluster Computing"},
      {"cs.DL", "Digital Libraries"},
      {"cs.DM", "Discrete Mathematics"},
      {"cs.DS", "Data Structures and Algorithms"},
      {"cs.ET", "Emerging Technologies"},
      {"cs.FL", "Formal Languages and Automata Theory"},
      {"cs.GL", "General Literature"},
      {"cs.GR", "Graphics"},
      {"cs.GT", "Computer Science and Game Theory"},
      {"cs.HC", "Human-Computer Interaction"},
      {"cs.IR", "Information Retrieval"},
      {"cs.IT", "Information Theory"},
      {"cs.LG", "Machine Learning"},
      {"cs.LO", "Logic in Computer Science"},
      {"cs.MA", "Multiagent Systems"},
      {"cs.MM", "Multimedia"},
      {"cs.MS", "Mathematical Software"},
      {"cs.NA", "Numerical Analysis"},
      {"cs.NE", "Neural and Evolutionary Computing"},
      {"cs.NI", "Networking and Internet Architecture"},
      {"cs.OH", "Other Computer Science"},
      {"cs.OS", "Operating Systems"},
      {"cs.PF", "Performance"},
      {"cs.PL", "Programming Languages"},
      {"cs.RO", "Robotics"},
      {"cs.SC", "Symbolic Computation"},
      {"cs.SD", "Sound"},
      {"cs.SE", "Software Engineering"},
      {"cs.SI", "Social and Information Networks"},
      {"cs.SY", "Systems and Control"},
      {"econ.EM", "Econometrics"},
      {"econ.GN", "General Economics"},
      {"econ.TH", "Theoretical Economics"},
      {"eess.AS", "Audio and Speech Processing"},
      {"eess.IV", "Image and Video Processing"},
      {"eess.SP", "Signal Processing"},
      {"eess.SY", "Systems and Control"},
      {"math.AC", "Commutative Algebra"},
      {"math.AG", "Algebraic Geometry"},
      {"math.AP", "Analysis of PDEs"},
      {"math.AT", "Algebraic Topology"},
      {"math.CA", "Classical Analysis and ODEs"},
      {"math.CO", "Combinatorics"},
      {"math.CT", "Category Theory"},
      {"math.CV", "Complex Variables"},
      {"math.DG", "Differential Geometry"},
      {"math.DS", "Dynamical Systems"},
      {"math.FA", "Functional Analysis"},
      {"math.GM", "General Mathematics"},
      {"math.GN", "General Topology"},
      {"math.GR", "Group Theory"},
      {"math.GT", "Geometric Topology"},
      {"math.HO", "History and Overview"},
      {"math.IT", "Information Theory"},
      {"math.KT", "K-Theory and Homology"},
      {"math.LO", "Logic"},
      {"math.MG", "Metric Geometry"},
      {"math.MP", "Mathematical Physics"},
      {"math.NA", "Numerical Analysis"},
      {"math.NT", "Number Theory"},
      {"math.OA", "Operator Algebras"},
      {"math.OC", "Optimization and Control"},
      {"math.PR", "Probability"},
      {"math.QA", "Quantum Algebra"},
      {"math.RA", "Rings and Algebras"},
      {"math.RT", "Representation Theory"},
      {"math.SG", "Symplectic Geometry"},
      {"math.SP", "Spectral Theory"},
      {"math.ST", "Statistics Theory"},
      {"astro-ph.CO", "Cosmology and Nongalactic Astrophysics"},
      {"astro-ph.EP", "Earth and Planetary Astrophysics"},
      {"astro-ph.GA", "Astrophysics of Galaxies"},
      {"astro-ph.HE", "High Energy Astrophysical Phenomena"},
      {"astro-ph.IM", "Instrumentation and Methods for Astrophysics"},
      {"astro-ph.SR", "Solar and Stellar Astrophysics"},
      {"cond-mat.dis-nn", "Disordered Systems and Neural Networks"},
      {"cond-mat.mes-hall", "Mesoscale and Nanoscale Physics"},
      {"cond-mat.mtrl-sci", "Materials Science"},
      {"cond-mat.other", "Other Condensed Matter"},
      {"cond-mat.quant-gas", "Quantum Gases"},
      {"cond-mat.soft", "Soft Condensed Matter"},
      {"cond-mat.stat-mech", "Statistical Mechanics"},
      {"cond-mat.str-el", "Strongly Correlated Electrons"},
      {"cond-mat.supr-con", "Superconductivity"},
      {"gr-qc", "General Relativity and Quantum Cosmology"},
      {"hep-ex", "High Energy Physics - Experiment"},
      {"hep-lat", "High Energy Physics - Lattice"},
      {"hep-ph", "High Energy Physics - Phenomenology"},
      {"hep-th", "High Energy Physics - Theory"},
      {"math-ph", "Mathematical Physics"},
      {"nlin.AO", "Adaptation and Self-Organizing Systems"},
      {"nlin.CD", "Chaotic Dynamics"},
      {"nlin.CG", "Cellular Automata and Lattice Gases"},
      {"nlin.PS", "Pattern Formation and Solitons"},
      {"nlin.SI", "Exactly Solvable and Integrable Systems"},
      {"nucl-ex", "Nuclear Experiment"},
      {"nucl-th", "Nuclear Theory"},
      {"physics.acc-ph", "Accelerator Physics"},
      {"physics.ao-ph", "Atmospheric and Oceanic Physics"},
      {"physics.app-ph", "Applied Physics"},
      {"physics.atm-clus", "Atomic and Molecular Clusters"},
      {"physics.atom-ph", "Atomic Physics"},
      {"physics.bio-ph", "Biological Physics"},
      {"physics.chem-ph", "Chemical Physics"},
      {"physics.class-ph", "Classical Physics"},
      {"physics.comp-ph", "Computational Physics"},
      {"physics.data-an", "Data Analysis, Statistics and Probability"},
      {"physics.ed-ph", "Physics Education"},
      {"physics.flu-dyn", "Fluid Dynamics"},
      {"physics.gen-ph", "General Physics"},
      {"physics.geo-ph", "Geophysics"},
      {"physics.hist-ph", "History and Philosophy of Physics"},
      {"physics.ins-det", "Instrumentation and Detectors"},
      {"physics.med-ph", "Medical Physics"},
      {"physics.optics", "Optics"},
      {"physics.plasm-ph", "Plasma Physics"},
      {"physics.pop-ph", "Popular Physics"},
      {"physics.soc-ph", "Physics and Society"},
      {"physics.space-ph", "Space Physics"},
      {"q-bio.BM", "Biomolecules"},
      {"q-bio.CB", "Cell Behavior"},
      {"q-bio.GN", "Genomics"},
      {"q-bio.MN", "Molecular Networks"},
      {"q-bio.NC", "Neurons and Cognition"},
      {"q-bio.OT", "Other Quantitative Biology"},
      {"q-bio.PE", "Populations and Evolution"},
      {"q-bio.QM", "Quantitative Methods"},
      {"q-bio.SC", "Subcellular Processes"},
      {"q-bio.TO", "Tissues and Organs"},
      {"q-fin.CP", "Computational Finance"},
      {"q-fin.EC", "Economics"},
      {"q-fin.GN", "General Finance"},
      {"q-fin.MF", "Mathematical Finance"},
      {"q-fin.PM", "Portfolio Management"},
      {"q-fin.PR", "Pricing of Securities"},
      {"q-fin.RM", "Risk Management"},
      {"q-fin.ST", "Statistical Finance"},
      {"q-fin.TR", "Trading and Market Microstructure"},
      {"quant-ph", "Quantum Physics"},
      {"stat.AP", "Applications"},
      {"stat.CO", "Computation"},
      {"stat.ME", "Methodology"},
      {"stat.ML", "Machine Learning"},
      {"stat.OT", "Other Statistics"},
      {"stat.TH", "Statistics Theory"},
  };
  return kCodes;
}

// Lowercased code if known, else nullopt. Accepts "cs.RO" or "cs.RO (Robotics)".
inline std::optional<std::string> known_arxiv_code(std::string_view s) {
  std::string t = to_lower(trim(s));
  if (auto sp = t.find_first_of(" \t("); sp != std::string::npos) t = t.substr(0, sp);
  for (const auto& [code, name] : arxiv_taxonomy())
    if (to_lower(code) == t) return t;
  return std::nullopt;
}

// Catalog spelling of a branch, matched case-insensitively.
inline std::optional<std::string> known_branch(std::string_view s) {
  std::string t = to_lower(normalize_text(s));
  for (const auto& b : branch_catalog())
    if (to_lower(b) == t) return b;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Labels

enum class DomainKind { kArxiv, kBranch, kOther };

inline std::string_view to_string(DomainKind k) {
  switch (k) {
    case DomainKind::kArxiv: return "arxiv";
    case DomainKind::kBranch: return "branch";
    case DomainKind::kOther: return "other";
  }
  return "";
}

inline constexpr std::string_view kOtherDomain = "Other";

struct DomainLabel {
  DomainKind kind = DomainKind::kOther;
  std::string value;    // lowercased arXiv code, catalog branch name, or empty
  std::string grouped;  // group name, the code itself, or "Other"

  bool operator==(const DomainLabel&) const = default;
  bool is_other() const { return kind == DomainKind::kOther; }
};

// Branch -> group; ungrouped branches and arXiv codes map to themselves.
inline std::string group_of(const DomainLabel& l) {
  switch (l.kind) {
    case DomainKind::kArxiv: return l.value;
    case DomainKind::kOther: return std::string(kOtherDomain);
    case DomainKind::kBranch:
      for (const auto& [group, members] : branch_groups())
        for (const auto& m : members)
          if (to_lower(m) == to_lower(l.value)) return group;
      return l.value;
  }
  return l.value;
}

inline DomainLabel group_domain(DomainLabel l) {
  l.grouped = group_of(l);
  return l;
}

inline DomainLabel other_label() { return DomainLabel{DomainKind::kOther, "", std::string(kOtherDomain)}; }

inline DomainLabel arxiv_label(std::string_view code) {
  auto c = known_arxiv_code(code);
  if (!c) throw std::invalid_argument("unknown arXiv category: " + std::string(code));
  return group_domain(DomainLabel{DomainKind::kArxiv, *c, ""});
}

inline DomainLabel branch_label(std::string_view branch) {
  auto b = known_branch(branch);
  if (!b) return other_label();
  return group_domain(DomainLabel{DomainKind::kBranch, *b, ""});
}

// Key used in analytics: lowercased grouped domain ("cs.ro", "zoology").
inline std::string domain_key(const DomainLabel& l) { return to_lower(l.grouped); }

// arXiv wins; then a catalog branch; else Other.
inline DomainLabel label_from_fields(const Json& obj) {
  if (!obj.is_object()) return other_label();
  if (obj.contains("arxiv_category") && obj["arxiv_category"].is_string())
    if (auto c = known_arxiv_code(obj["arxiv_category"].get<std::string>())) return arxiv_label(*c);
  if (obj.contains("branch") && obj["branch"].is_string()) return branch_label(obj["branch"].get<std::string>());
  return other_label();
}

inline Json to_json(const DomainLabel& l) {
  return Json{{"kind", to_string(l.kind)}, {"value", l.value}, {"grouped", l.grouped}};
}

inline DomainLabel domain_from_json(const Json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "arxiv") return arxiv_label(j.at("value").get<std::string>());
  if (kind == "branch") {
    auto l = branch_label(j.at("value").get<std::string>());
    if (l.is_other()) throw FormatError("unknown branch: " + j.at("value").get<std::string>());
    return l;
  }
  if (kind == "other") return other_label();
  throw FormatError("unknown domain kind: " + kind);
}

// ---------------------------------------------------------------------------
// Assignment

inline std::string arxiv_prompt_list() {
  std::string out;
  for (const auto& [code, name] : arxiv_taxonomy()) out += code + ": " + name + "\n";
  return out;
}

inline std::string branch_prompt_list() {
  std::string out;
  for (const auto& b : branch_catalog()) out += b + "\n";
  return out;
}

inline std::string domain_prompt(const RecombinationRecord& r, const std::string& abstract) {
  if (r.relation_type == RelationType::kBlend) {
    std::string elems;
    for (const auto& e : r.entities) elems += "- " + e.text + "\n";
    return prompts::fill(prompts::kBlendDomain, {{"ABSTRACT", abstract},
                                                 {"ELEMENTS", elems},
                                                 {"ARXIV", arxiv_prompt_list()},
                                                 {"BRANCHES", branch_prompt_list()}});
  }
  return prompts::fill(prompts::kInspirationDomain, {{"ABSTRACT", abstract},
                                                     {"INSPIRATION_SOURCE", r.source().text},
                                                     {"INSPIRATION_TARGET", r.target().text},
                                                     {"ARXIV", arxiv_prompt_list()},
                                                     {"BRANCHES", branch_prompt_list()}});
}

// Parses a domain reply into one label per entity of `r` (entity order).
inline std::vector<DomainLabel> parse_domain_reply(const RecombinationRecord& r, std::string_view reply) {
  std::vector<DomainLabel> out(r.entities.size(), other_label());
  auto obj = first_json_object(reply);
  if (!obj) return out;
  if (r.relation_type == RelationType::kInspiration) {
    for (size_t i = 0; i < r.entities.size(); ++i) {
      const char* key = r.entities[i].role == Role::kInspirationSource ? "inspiration-source" : "inspiration-target";
      if (obj->contains(key)) out[i] = label_from_fields((*obj)[key]);
    }
    return out;
  }
  if (!obj->contains("elements") || !(*obj)["elements"].is_array()) return out;
  const Json& elems = (*obj)["elements"];
  // Prefer matching by entity text; fall back to position.
  std::vector<char> used(elems.size(), 0);
  for (size_t i = 0; i < r.entities.size(); ++i) {
    std::optional<size_t> hit;
    for (size_t k = 0; k < elems.size() && !hit; ++k)
      if (!used[k] && elems[k].is_object() && elems[k].contains("entity") && elems[k]["entity"].is_string() &&
          normalize_text(elems[k]["entity"].get<std::string>()) == normalize_text(r.entities[i].text))
        hit = k;
    if (!hit && i < elems.size() && !used[i]) hit = i;
    if (!hit) continue;
    used[*hit] = 1;
    out[i] = label_from_fields(elems[*hit]);
  }
  return out;
}

inline std::vector<DomainLabel> assign_domains(const RecombinationRecord& r, const std::string& abstract, Gateway& gw,
                                               const std::string& model) {
  if (auto v = validate_record(r)) throw std::invalid_argument("assign_domains: invalid record: " + v->rule);
  std::string reply = gw.generate_text(model, domain_prompt(r, abstract));
  return parse_domain_reply(r, reply);
}

// Majority vote over member-entity labels; ties go to the label seen on the
// most recent paper (then the smaller value, for determinism).
inline DomainLabel vote_node_label(const std::vector<std::pair<DomainLabel, Date>>& votes) {
  if (votes.empty()) return other_label();
  struct Tally {
    size_t count = 0;
    Date latest{0, 1, 1};
    DomainLabel label;
  };
  std::map<std::pair<int, std::string>, Tally> tally;
  for (const auto& [l, d] : votes) {
    auto& t = tally[{static_cast<int>(l.kind), l.value}];
    ++t.count;
    t.label = l;
    if (t.latest < d) t.latest = d;
  }
  const Tally* best = nullptr;
  for (const auto& [k, t] : tally)
    if (!best || t.count > best->count || (t.count == best->count && best->latest < t.latest)) best = &t;
  return best->label;
}

}  // namespace recomb

#endif  // RECOMB_CATEGORIZE_HPP_
