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

// Entity normalization: short-form cleanup and agglomerative clustering of
// entity embeddings into concept nodes.

#ifndef RECOMB_NORMALIZE_HPP_
#define RECOMB_NORMALIZE_HPP_

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "recomb/core.hpp"
#include "recomb/gateway.hpp"

namespace recomb {

class NormalizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Abbreviations

namespace detail {

inline bool is_stopword(std::string_view w) {
  static const std::set<std::string, std::less<>> kStop = {"a",  "an", "and", "as",  "at", "by",  "for", "from",
                                                           "in", "of", "on",  "or",  "the", "to", "via", "with"};
  return kStop.count(to_lower(w)) > 0;
}

// Letters of a short form, lowercased; nullopt if it does not look like one
// (must start with a letter, contain an uppercase letter, <= 10 chars).
inline std::optional<std::string> short_form_letters(std::string_view sf) {
  if (sf.empty() || sf.size() > 10 || !std::isalpha(static_cast<unsigned char>(sf[0]))) return std::nullopt;
  bool upper = false;
  std::string out;
  for (char c : sf) {
    auto u = static_cast<unsigned char>(c);
    if (std::isupper(u)) upper = true;
    if (std::isalpha(u)) out.push_back(static_cast<char>(std::tolower(u)));
    else if (!std::isdigit(u) && c != '-') return std::nullopt;
  }
  if (!upper || out.size() < 2) return std::nullopt;
  return out;
}

// Splits on whitespace and hyphens; keeps only alphanumeric word bodies.
inline std::vector<std::string> initial_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '-' || c == '/') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline char initial_of(const std::string& w) {
  for (char c : w)
    if (std::isalnum(static_cast<unsigned char>(c))) return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return '\0';
}

// True when words[from..] spell `letters` by initials, where stopwords may be
// skipped and the first word must contribute.
inline bool initials_spell(const std::vector<std::string>& words, size_t from, const std::string& letters) {
  size_t n = words.size() - from;
  // ok[i][k]: words[from+i..] spell letters[k..]
  std::vector<std::vector<char>> ok(n + 1, std::vector<char>(letters.size() + 1, 0));
  ok[n][letters.size()] = 1;
  for (size_t i = n; i-- > 0;) {
    const auto& w = words[from + i];
    for (size_t k = 0; k <= letters.size(); ++k) {
      bool v = false;
      if (k < letters.size() && initial_of(w) == letters[k]) v = ok[i + 1][k + 1];
      if (!v && is_stopword(w) && i > 0) v = ok[i + 1][k];
      ok[i][k] = v;
    }
  }
  return ok[0][0];
}

// Longest suffix of `words` whose initials spell `letters`; returns its start.
inline std::optional<size_t> long_form_start(const std::vector<std::string>& words, const std::string& letters) {
  size_t limit = std::min(words.size(), 2 * letters.size() + 2);
  std::optional<size_t> best;
  for (size_t len = 1; len <= limit; ++len) {
    size_t from = words.size() - len;
    if (initials_spell(words, from, letters)) best = from;
  }
  return best;
}

// As above for a raw short form; a plural "s" ("LLMs") may be left out.
inline std::optional<size_t> long_form_start_for(const std::vector<std::string>& words, std::string_view sf) {
  auto letters = short_form_letters(sf);
  if (!letters) return std::nullopt;
  if (auto s = long_form_start(words, *letters)) return s;
  if (sf.size() > 2 && sf.back() == 's' && std::isupper(static_cast<unsigned char>(sf[sf.size() - 2])))
    return long_form_start(words, letters->substr(0, letters->size() - 1));
  return std::nullopt;
}

}  // namespace detail

// "Long Form (SF)" definitions found in `text`: SF -> long form. The long
// form is re-read from the original text so hyphens survive.
inline std::map<std::string, std::string> abbreviation_definitions(std::string_view text) {
  std::map<std::string, std::string> defs;
  for (size_t open = text.find('('); open != std::string_view::npos; open = text.find('(', open + 1)) {
    size_t close = text.find(')', open);
    if (close == std::string_view::npos) break;
    std::string sf = trim(text.substr(open + 1, close - open - 1));
    if (!detail::short_form_letters(sf)) continue;
    // Preceding clause: back to the last sentence/clause punctuation.
    size_t begin = text.find_last_of(".,;:()[]", open == 0 ? 0 : open - 1);
    begin = (begin == std::string_view::npos || begin >= open) ? 0 : begin + 1;
    std::string_view before = text.substr(begin, open - begin);
    auto words = detail::initial_words(before);
    if (words.empty()) continue;
    auto start = detail::long_form_start_for(words, sf);
    if (!start) continue;
    // Locate the long form's first word in `before` to keep original spelling.
    size_t skip = 0;
    std::string long_form;
    {
      std::vector<size_t> word_pos;
      bool in_word = false;
      for (size_t i = 0; i < before.size(); ++i) {
        char c = before[i];
        bool sep = std::isspace(static_cast<unsigned char>(c)) || c == '-' || c == '/';
        if (!sep && !in_word) word_pos.push_back(i);
        in_word = !sep;
      }
      skip = word_pos.at(*start);
      long_form = trim(before.substr(skip));
    }
    if (!long_form.empty() && !defs.count(sf)) defs[sf] = long_form;
  }
  return defs;
}

// Step 1: drops a trailing "(SF)" when SF abbreviates the preceding words.
// Step 2: replaces whole-token short forms defined in `abstract`.
inline std::string expand_abbreviations(std::string_view entity_text, std::string_view abstract) {
  std::string text = trim(entity_text);
  if (!text.empty() && text.back() == ')') {
    size_t open = text.rfind('(');
    if (open != std::string::npos && open > 0) {
      std::string sf = trim(std::string_view(text).substr(open + 1, text.size() - open - 2));
      std::string head = trim(std::string_view(text).substr(0, open));
      if (!head.empty() && detail::long_form_start_for(detail::initial_words(head), sf))
        text = head;
    }
  }
  auto defs = abbreviation_definitions(abstract);
  if (defs.empty()) return text;
  std::string out;
  size_t i = 0;
  auto is_tok = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; };
  while (i < text.size()) {
    if (!is_tok(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    size_t start = i;
    while (i < text.size() && is_tok(text[i])) ++i;
    std::string tok = text.substr(start, i - start);
    auto it = defs.find(tok);
    out += it == defs.end() ? tok : it->second;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Clustering

struct Cluster {
  size_t id = 0;
  std::string canonical;
  std::map<std::string, size_t> members;  // surface form -> frequency

  bool operator==(const Cluster&) const = default;
};

struct ClusterAssignment {
  std::vector<size_t> entity_cluster;  // input index -> cluster id
  std::vector<Cluster> clusters;       // indexed by id

  bool operator==(const ClusterAssignment&) const = default;
};

// Most frequent form; ties -> shortest; then lexicographic.
inline std::string canonical_name(const std::map<std::string, size_t>& members) {
  if (members.empty()) throw std::invalid_argument("canonical_name: empty cluster");
  const std::pair<const std::string, size_t>* best = nullptr;
  for (const auto& m : members) {
    if (!best || m.second > best->second ||
        (m.second == best->second && m.first.size() < best->first.size()))
      best = &m;  // map order already gives lexicographic among full ties
  }
  return best->first;
}

inline double cosine_distance(const Vector& a, const Vector& b) {
  double dot = 0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return 1.0 - dot;
}

// Average-linkage agglomerative clustering over unit vectors. Returns a
// cluster index per item; clusters are numbered by their smallest item.
// Merging continues while the closest pair of clusters has average distance
// <= threshold; ties go to the lexicographically smallest cluster-id pair.
inline std::vector<size_t> average_linkage(const std::vector<Vector>& vecs, double threshold) {
  size_t n = vecs.size();
  // Clusters merge only if some cross pair is within threshold (the average
  // is at least the minimum), so linkage runs per connected component.
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<size_t(size_t)> find = [&](size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (cosine_distance(vecs[i], vecs[j]) <= threshold) {
        size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::map<size_t, std::vector<size_t>> components;
  for (size_t i = 0; i < n; ++i) components[find(i)].push_back(i);

  std::vector<size_t> label(n);
  for (const auto& [root, items] : components) {
    size_t m = items.size();
    std::vector<std::vector<double>> d(m, std::vector<double>(m, 0));
    for (size_t a = 0; a < m; ++a)
      for (size_t b = a + 1; b < m; ++b) d[a][b] = d[b][a] = cosine_distance(vecs[items[a]], vecs[items[b]]);
    std::vector<size_t> size(m, 1);
    std::vector<char> alive(m, 1);
    std::vector<size_t> owner(m);
    std::iota(owner.begin(), owner.end(), 0);
    // Slot a holds the cluster whose smallest item is items[a].
    while (true) {
      double best = 0;
      size_t ba = m, bb = m;
      for (size_t a = 0; a < m; ++a) {
        if (!alive[a]) continue;
        for (size_t b = a + 1; b < m; ++b) {
          if (!alive[b]) continue;
          if (ba == m || d[a][b] < best) {
            best = d[a][b];
            ba = a;
            bb = b;
          }
        }
      }
      if (ba == m || best > threshold) break;
      for (size_t k = 0; k < m; ++k) {
        if (!alive[k] || k == ba || k == bb) continue;
        double v = (static_cast<double>(size[ba]) * d[k][ba] + static_cast<double>(size[bb]) * d[k][bb]) /
                   static_cast<double>(size[ba] + size[bb]);
        d[k][ba] = d[ba][k] = v;
      }
      size[ba] += size[bb];
      alive[bb] = 0;
      for (auto& o : owner)
        if (o == bb) o = ba;
    }
    for (size_t a = 0; a < m; ++a) label[items[a]] = items[owner[a]];
  }
  // Dense renumbering by smallest member.
  std::map<size_t, size_t> dense;
  for (size_t i = 0; i < n; ++i)
    if (!dense.count(label[i])) dense.emplace(label[i], dense.size());
  for (auto& l : label) l = dense[l];
  return label;
}

struct ClusterOptions {
  std::string model = "all-mpnet-base-v2";
  double threshold = 0.05;
  size_t batch_size = 256;
};

// Clusters the distinct texts (sorted, so the partition does not depend on
// input order), then maps every input position to its cluster.
inline ClusterAssignment cluster_entities(const std::vector<std::string>& texts, Gateway& gw,
                                          const ClusterOptions& opts = {}) {
  if (texts.empty()) throw std::invalid_argument("cluster_entities: no texts");
  if (opts.threshold < 0 || opts.threshold > 2) throw std::invalid_argument("cluster_entities: threshold out of [0,2]");
  std::map<std::string, size_t> freq;
  for (const auto& t : texts) ++freq[t];
  std::vector<std::string> unique;
  for (const auto& [t, n] : freq) unique.push_back(t);

  std::vector<Vector> vecs;
  vecs.reserve(unique.size());
  size_t bs = std::max<size_t>(1, opts.batch_size);
  for (size_t start = 0, batch = 0; start < unique.size(); start += bs, ++batch) {
    std::vector<std::string> chunk(unique.begin() + static_cast<long>(start),
                                   unique.begin() + static_cast<long>(std::min(unique.size(), start + bs)));
    try {
      for (auto& v : gw.embed(EmbedRequest{opts.model, chunk, true})) vecs.push_back(std::move(v));
    } catch (const std::exception& e) {
      throw NormalizeError("embedding batch " + std::to_string(batch) + " failed: " + e.what());
    }
  }

  auto label = average_linkage(vecs, opts.threshold);
  ClusterAssignment out;
  size_t n_clusters = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  out.clusters.resize(n_clusters);
  std::map<std::string, size_t> cluster_of;
  for (size_t i = 0; i < unique.size(); ++i) {
    auto& c = out.clusters[label[i]];
    c.id = label[i];
    c.members[unique[i]] = freq[unique[i]];
    cluster_of[unique[i]] = label[i];
  }
  for (auto& c : out.clusters) c.canonical = canonical_name(c.members);
  for (const auto& t : texts) out.entity_cluster.push_back(cluster_of.at(t));
  return out;
}

// Set of sets over input positions; equal for equal partitions.
inline std::set<std::set<size_t>> partition_of(const std::vector<size_t>& labels) {
  std::map<size_t, std::set<size_t>> groups;
  for (size_t i = 0; i < labels.size(); ++i) groups[labels[i]].insert(i);
  std::set<std::set<size_t>> out;
  for (auto& [k, g] : groups) out.insert(std::move(g));
  return out;
}

}  // namespace recomb

#endif  // RECOMB_NORMALIZE_HPP_
