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

// Prompt templates. Placeholders are `{NAME}`; fill() substitutes them in a
// single pass over the template, so substituted text is never re-scanned.
// Bump kPromptSetVersion whenever any template text changes: cached replies
// are keyed on the filled prompt, and manifests record this version.

#ifndef RECOMB_PROMPTS_HPP_
#define RECOMB_PROMPTS_HPP_

#include <map>
#include <string>
#include <string_view>

namespace recomb::prompts {

inline constexpr std::string_view kPromptSetVersion = "1.0";

inline constexpr std::string_view kExtraction = R"(You are an expert in scientific information extraction.

Read the abstract below and decide whether the authors explicitly describe a recombination of ideas:
- a combination (blend): two or more concepts such as methods, models, theories or data sources are fused into a new approach;
- an inspiration: knowledge or insight from a source concept is transferred to a target problem, task or method (for example through an analogy, a metaphor, or an abstraction).

If several recombinations are described, extract only the single most salient one. Entities must be spans copied from the abstract that name scientific concepts.

Answer with one JSON object and nothing else, using exactly one of these forms:
{"recombination_type": "combination", "combination-element": ["<span>", "<span>"]}
{"recombination_type": "inspiration", "inspiration-source": ["<span>"], "inspiration-target": ["<span>"]}
{"recombination_type": "none"}

Abstract:
{ABSTRACT}
)";

inline constexpr std::string_view kSpanSimilarity = R"(You compare two text spans extracted from the same scientific abstract.
Both spans were extracted with the role "{ENTITY_TYPE}".

Abstract:
{TEXT}

Span 1: {SPAN1}
Span 2: {SPAN2}

In the context of this abstract, do the two spans refer to the same or a semantically equivalent scientific concept? Differences in span boundaries, articles or minor wording do not matter.
Answer with a single word: yes or no.
)";

inline constexpr std::string_view kRecordJudge = R"(You audit an automatically extracted idea recombination.

Abstract:
{ABSTRACT}

Extracted relation type: {EXTRACTED_RELATION}
Entity 1: {ENTITY1}
Entity 2: {ENTITY2}

The extraction is correct only if both hold:
1. each entity names a meaningful, informative scientific concept (not a fragment such as "real" or "neural");
2. the relation between the entities is a central recombination that the abstract explicitly describes.

Answer with a single word: yes (correct) or no (incorrect).
)";

inline constexpr std::string_view kBlendDomain = R"(You assign scientific domains to concepts extracted from an abstract.

Abstract:
{ABSTRACT}

The authors combine the following elements:
{ELEMENTS}

For each element, choose the arXiv category that best describes its domain from this list:
{ARXIV}

If no arXiv category fits, choose a branch from this list instead:
{BRANCHES}

If neither fits, use null for both fields.
Answer with one JSON object and nothing else:
{"elements": [{"entity": "<element>", "arxiv_category": "<code or null>", "branch": "<branch or null>"}]}
List the elements in the order given above.
)";

inline constexpr std::string_view kInspirationDomain = R"(You assign scientific domains to concepts extracted from an abstract.

Abstract:
{ABSTRACT}

The authors take inspiration from:
{INSPIRATION_SOURCE}
and apply it to:
{INSPIRATION_TARGET}

For each of the two concepts, choose the arXiv category that best describes its domain from this list:
{ARXIV}

If no arXiv category fits, choose a branch from this list instead:
{BRANCHES}

If neither fits, use null for both fields.
Answer with one JSON object and nothing else:
{"inspiration-source": {"arxiv_category": "<code or null>", "branch": "<branch or null>"}, "inspiration-target": {"arxiv_category": "<code or null>", "branch": "<branch or null>"}}
)";

inline constexpr std::string_view kContextExtraction = R"(Below is a scientific abstract and a one-sentence summary of the approach its authors take.

Abstract:
{ABSTRACT}

Approach: {METHODOLOGY_STATEMENT}

Write two or three sentences, based only on the abstract, that describe the background and motivation that led the authors to this approach: the problem setting and the shortcomings of prior work. Do not describe the approach itself and do not name any of the concepts it combines or draws on.
Output only the sentences.
)";

inline constexpr std::string_view kLeakDetection = R"(A research question is posed together with a hidden answer.

Question:
{QUERY}

Hidden answer: {ANSWER}

Does the question text reveal the answer or strongly imply it, for example by naming it, paraphrasing it, or describing it so specifically that it can be read off?
Answer with a single word: yes (the answer leaks) or no.
)";

inline constexpr std::string_view kRerank = R"(You rank candidate ideas for a research question.

Question:
{QUERY}

Below are {NUM} candidates, each marked with an identifier in brackets.
{CANDIDATES}

Rank all {NUM} candidates from most to least helpful as an answer to the question: the best answer is the concept that the question's setting could most plausibly combine with or draw inspiration from.
Output only the ranking using identifiers, for example: [2] > [1] > [3]. Do not explain.
)";

inline constexpr std::string_view kPostprocessCombination = R"(You review entity spans extracted from a scientific abstract.

Abstract:
{ABSTRACT}

Extracted recombination (a combination of elements):
{RECOMBINATION}

Review each element string. If an element is uninformative, truncated or ambiguous out of context, rewrite it as a short, self-contained phrase grounded in the abstract. Leave informative elements unchanged. Keep the same number of elements in the same order.
Answer with one JSON object and nothing else:
{"combination-element": ["<element>", "<element>"]}
)";

inline constexpr std::string_view kPostprocessInspiration = R"(You review entity spans extracted from a scientific abstract.

Abstract:
{ABSTRACT}

Extracted recombination (an inspiration from a source to a target):
{RECOMBINATION}

Review the source and target strings. If one is uninformative, truncated or ambiguous out of context, rewrite it as a short, self-contained phrase grounded in the abstract. Leave informative strings unchanged.
Answer with one JSON object and nothing else:
{"inspiration-source": "<source>", "inspiration-target": "<target>"}
)";

inline std::string fill(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(tmpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

}  // namespace recomb::prompts

#endif  // RECOMB_PROMPTS_HPP_
