#!/usr/bin/env python3
# Copyright 2026 The Recomb Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the end-to-end fixture: a 53-line snapshot (50 admissible
abstracts), a fully scripted mock backend and one-hot concept embeddings.

Every entity belongs to a concept; all surface forms of a concept share one
one-hot vector, so clustering yields exactly one node per concept.
"""

import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DIM = 64

EXTRACT = "You are an expert in scientific information extraction."
DOMAIN = "You assign scientific domains to concepts extracted from an abstract."
CONTEXT = "Below is a scientific abstract and a one-sentence summary"
LEAK = "A research question is posed together with a hidden answer."
RERANK = "You rank candidate ideas for a research question."
POSTPROCESS = "You review entity spans extracted from a scientific abstract."

# concept -> (domain fields, vector index)
A = lambda code: {"arxiv_category": code, "branch": None}
B = lambda branch: {"arxiv_category": None, "branch": branch}
OTHER = {"arxiv_category": None, "branch": None}

CONCEPTS = {
    "dl": A("cs.LG"), "arch": B("Archaeology"), "gwt": B("Cognitive Science"), "ctr": A("cs.IR"),
    "herding": B("Zoology"), "frontier": A("cs.RO"), "pathologists": B("Pathology"), "histo": A("cs.CV"),
    "cot": A("cs.CL"), "rag": A("cs.CL"), "llm": A("cs.CL"), "kg": A("cs.AI"), "qa": A("cs.CL"),
    "ant": B("Entomology"), "swarm": A("cs.RO"), "bird": B("Ornithology"), "drone": A("cs.RO"),
    "hippo": B("Neuroscience"), "continual": A("cs.LG"), "child": B("Psychology"), "curriculum": A("cs.LG"),
    "immune": B("Immunology"), "anomaly": A("cs.CR"), "transformers": A("cs.LG"), "gnn": A("cs.LG"),
    "mol": B("Biochemistry"), "thermo": B("Thermodynamics"), "diffusion": A("cs.CV"), "vlm": A("cs.CV"),
    "game": B("Economics"), "attr": A("cs.LG"), "dopamine": B("Neuroscience"), "rl": A("cs.LG"),
    "commonsense": A("cs.CV"), "meme": A("cs.CL"), "socratic": B("Pedagogy"), "tutoring": A("cs.HC"),
    "origami": OTHER, "gripper": A("cs.RO"), "fish": B("Marine Biology"), "underwater": A("cs.RO"),
    "crowd": B("Sociology"), "trajectory": A("cs.CV"), "auction": B("Economics"), "adslot": A("cs.GT"),
    "attention": A("cs.LG"), "protein": B("Biochemistry"), "cortex": B("Neuroscience"), "cnn": A("cs.CV"),
    "epidemic": B("Epidemiology"), "misinfo": A("cs.SI"), "grammar": B("Linguistics"), "tokenization": A("cs.CL"),
    "music": OTHER, "melody": A("cs.SD"), "warehouse": A("cs.RO"), "objrec": A("cs.CV"),
    "retention": A("cs.CL"), "rumor": A("cs.SI"), "speech": A("eess.AS"),
}
INDEX = {k: i for i, k in enumerate(CONCEPTS)}
assert len(INDEX) <= DIM

# (id, created, categories, kind, [(span, concept, normalized, domain override)], abstract)
# kind: "blend" | "insp" (first entity source, second target)
POSITIVE = [
    ("2303.00001", "Mon, 6 Mar 2023 10:00:00 GMT", "cs.CV", "blend",
     [("advanced deep learning techniques", "dl"), ("archaeological knowledge", "arch")],
     "Current archaeology depends on trained experts to carry out bronze dating. This process is slow and "
     "subjective. To address this, we propose to integrate advanced deep learning techniques and archaeological "
     "knowledge into a single dating model."),
    ("2305.00002", "Tue, 9 May 2023 10:00:00 GMT", "cs.IR", "insp",
     [("the Global Workspace Theory in conscious processing", "gwt"),
      ("learning effective feature embeddings for CTR prediction", "ctr",
       "learning effective feature embeddings for Click-Through Rate prediction")],
     "Click-Through Rate (CTR) prediction is a pivotal task in product and content recommendation, where learning "
     "effective feature embeddings is of great significance. Inspired by the Global Workspace Theory in conscious "
     "processing, we propose a CTR model that enables Dynamic Embedding Learning with Truncated Conscious attention."),
    ("2402.00003", "Mon, 5 Feb 2024 10:00:00 GMT", "cs.RO", "insp",
     [("the shepherding behavior of herding dogs", "herding"), ("Frontier exploration", "frontier")],
     "Efficient exploration of large-scale environments remains a critical challenge in robotics. The presented "
     "bio-inspired framework heuristically models frontier exploration similar to the shepherding behavior of "
     "herding dogs. This is achieved by modeling frontiers as a sheep swarm reacting to robots modeled as "
     "shepherding dogs."),
    ("2403.00004", "Mon, 4 Mar 2024 10:00:00 GMT", "cs.CV", "insp",
     [("the multi-granular diagnostic approach of pathologists", "pathologists"),
      ("Histopathological image classification", "histo")],
     "Histopathological image classification constitutes a pivotal task in computer-aided diagnostics. Inspired "
     "by the multi-granular diagnostic approach of pathologists, we perform feature extraction on cell structures "
     "at coarse, medium, and fine granularity."),
    ("2301.00005", "Wed, 11 Jan 2023 10:00:00 GMT", "cs.CL", "blend",
     [("Chain of Thought (CoT)", "cot", "Chain of Thought"), ("retrieval-augmented generation", "rag")],
     "Multi-hop reasoning over long documents remains brittle. We couple Chain of Thought (CoT) prompting with "
     "retrieval-augmented generation so that each reasoning step can fetch supporting passages."),
    ("2206.00006", "Wed, 8 Jun 2022 10:00:00 GMT", "cs.CL", "blend",
     [("large language models", "llm"), ("knowledge graphs", "kg")],
     "Factual errors limit the use of generated text in enterprise settings. We ground large language models in "
     "knowledge graphs by constraining decoding to entities reachable from the query."),
    ("2405.00007", "Wed, 8 May 2024 10:00:00 GMT", "cs.CL", "blend",
     [("Large Language Models", "llm"), ("open-domain question answering", "qa")],
     "Answering questions about niche topics requires broad coverage. We revisit Large Language Models as "
     "readers for open-domain question answering with a compact passage index."),
    ("2406.00008", "Mon, 10 Jun 2024 10:00:00 GMT", "cs.CL", "blend",
     [("LLMs", "llm", "large language models"), ("chain of thought", "cot")],
     "Arithmetic word problems still trip up small models. We study how large language models (LLMs) benefit "
     "when LLMs are combined with chain of thought supervision distilled from a teacher."),
    ("2104.00009", "Thu, 8 Apr 2021 10:00:00 GMT", "cs.RO", "insp",
     [("ant colony foraging", "ant"), ("multi-robot coordination", "swarm")],
     "Scaling fleets of inexpensive robots raises communication costs. Drawing on ant colony foraging, we design "
     "a pheromone-like signalling scheme for multi-robot coordination without a central planner."),
    ("2209.00010", "Thu, 8 Sep 2022 10:00:00 GMT", "cs.RO", "insp",
     [("bird flocking dynamics", "bird"), ("drone formation control", "drone")],
     "Keeping tight formations in gusty wind is difficult for small aircraft. Motivated by bird flocking "
     "dynamics, we derive local alignment rules for drone formation control."),
    ("2011.00011", "Mon, 9 Nov 2020 10:00:00 GMT", "cs.LG", "insp",
     [("hippocampal memory replay", "hippo"), ("continual learning", "continual")],
     "Neural networks forget earlier tasks when trained on new ones. Inspired by hippocampal memory replay, we "
     "interleave generated samples of past tasks during continual learning."),
    ("2107.00012", "Thu, 8 Jul 2021 10:00:00 GMT", "cs.CL", "insp",
     [("how children acquire language", "child"), ("curriculum learning", "curriculum")],
     "Training order matters for data-efficient language modelling. Borrowing from how children acquire "
     "language, we schedule examples by lexical difficulty in a form of curriculum learning."),
    ("1908.00013", "Thu, 8 Aug 2019 10:00:00 GMT", "cs.CR cs.LG", "insp",
     [("the adaptive immune system", "immune"), ("network intrusion detection", "anomaly")],
     "Signature-based defences miss novel attacks. Following the adaptive immune system, we grow a population of "
     "detectors that learns self and non-self traffic for network intrusion detection."),
    ("2202.00014", "Tue, 8 Feb 2022 10:00:00 GMT", "cs.LG", "blend",
     [("transformer architectures", "transformers"), ("graph neural networks", "gnn"),
      ("molecular property prediction", "mol")],
     "Screening candidate drugs requires accurate and fast predictors. We unify transformer architectures and "
     "graph neural networks for molecular property prediction on large compound libraries."),
    ("2101.00015", "Fri, 8 Jan 2021 10:00:00 GMT", "cs.CV", "insp",
     [("non-equilibrium thermodynamics", "thermo"), ("diffusion models", "diffusion")],
     "Likelihood-based generators struggle with sample quality. Taking a cue from non-equilibrium "
     "thermodynamics, we train diffusion models that reverse a gradual noising process."),
    ("2212.00016", "Thu, 8 Dec 2022 10:00:00 GMT", "cs.CV", "blend",
     [("Diffusion Models", "diffusion"), ("vision-language models", "vlm")],
     "Editing images from instructions needs both fidelity and understanding. We pair Diffusion Models with "
     "vision-language models that score each edit against the instruction."),
    ("2005.00017", "Fri, 8 May 2020 10:00:00 GMT", "cs.LG", "insp",
     [("cooperative game theory", "game"), ("feature attribution", "attr")],
     "Explaining individual predictions remains contested. Building on cooperative game theory, we define "
     "axioms for feature attribution and an efficient estimator."),
    ("1903.00018", "Fri, 8 Mar 2019 10:00:00 GMT", "cs.AI", "insp",
     [("dopamine reward prediction errors", "dopamine"), ("reinforcement learning", "rl")],
     "Sparse rewards slow down exploration in long tasks. Modelled on dopamine reward prediction errors, we add a "
     "phasic bonus signal to reinforcement learning agents."),
    ("2401.00019", "Mon, 8 Jan 2024 10:00:00 GMT", "cs.CL", "blend",
     [("Knowledge Graphs", "kg"), ("open-domain question answering", "qa")],
     "Complex questions often need multi-relation evidence. We integrate Knowledge Graphs into open-domain "
     "question answering through a learned path retriever."),
    ("2407.00020", "Mon, 8 Jul 2024 10:00:00 GMT", "cs.CL", "insp",
     [("visual commonsense reasoning", "commonsense"), ("harmful meme detection", "meme")],
     "Memes convey hateful messages through image and text interplay. We transfer ideas from visual commonsense "
     "reasoning to harmful meme detection by generating rationales about depicted situations."),
    ("2309.00021", "Fri, 8 Sep 2023 10:00:00 GMT", "cs.HC", "insp",
     [("the Socratic method of teaching", "socratic"), ("intelligent tutoring dialogue", "tutoring")],
     "Students disengage when systems simply reveal answers. Adopting the Socratic method of teaching, we design "
     "intelligent tutoring dialogue that asks guiding questions."),
    ("2404.00022", "Mon, 8 Apr 2024 10:00:00 GMT", "cs.RO", "insp",
     [("origami folding patterns", "origami"), ("soft robotic grippers", "gripper")],
     "Grasping fragile produce demands compliant hands. Inspired by origami folding patterns, we fabricate soft "
     "robotic grippers that close with a single tendon."),
    ("2306.00023", "Thu, 8 Jun 2023 10:00:00 GMT", "cs.RO", "insp",
     [("fluid dynamics of fish schools", "fish"), ("underwater robot locomotion", "underwater")],
     "Energy budgets limit autonomous submersibles. Exploiting the fluid dynamics of fish schools, we plan "
     "relative positions that reduce drag for underwater robot locomotion."),
    ("2408.00024", "Thu, 8 Aug 2024 10:00:00 GMT", "cs.CV", "insp",
     [("crowd evacuation behavior", "crowd"), ("pedestrian trajectory prediction", "trajectory")],
     "Forecasting where people walk is critical for autonomous driving. Informed by crowd evacuation behavior, "
     "we add panic-aware interaction terms to pedestrian trajectory prediction."),
    ("2002.00025", "Sat, 8 Feb 2020 10:00:00 GMT", "cs.GT cs.AI", "insp",
     [("auction mechanisms", "auction"), ("ad slot allocation", "adslot")],
     "Advertisers misreport values when allocation is opaque. Drawing on auction mechanisms, we formulate "
     "truthful ad slot allocation with budget constraints."),
    ("2311.00026", "Wed, 8 Nov 2023 10:00:00 GMT", "cs.LG", "blend",
     [("attention mechanisms", "attention"), ("protein folding", "protein")],
     "Predicting three-dimensional structure from sequence is a long-standing problem. We apply attention "
     "mechanisms to protein folding with pairwise residue features."),
    ("1810.00027", "Mon, 8 Oct 2018 10:00:00 GMT", "cs.CV", "insp",
     [("the primate visual cortex", "cortex"), ("convolutional neural networks", "cnn")],
     "Object recognition models are fragile under distortions. Modelled after the primate visual cortex, we "
     "constrain early layers of convolutional neural networks with Gabor filter banks."),
    ("2103.00028", "Mon, 8 Mar 2021 10:00:00 GMT", "cs.SI", "insp",
     [("epidemic spreading models", "epidemic"), ("misinformation propagation on social networks", "misinfo")],
     "False stories spread faster than corrections. Adapting epidemic spreading models, we estimate reproduction "
     "numbers for misinformation propagation on social networks."),
    ("2207.00029", "Fri, 8 Jul 2022 10:00:00 GMT", "cs.CL", "insp",
     [("construction grammar", "grammar"), ("subword tokenization", "tokenization")],
     "Vocabulary choices shape what language models can learn. Guided by construction grammar, we merge "
     "frequent form-meaning pairings during subword tokenization."),
    ("2409.00030", "Sun, 8 Sep 2024 10:00:00 GMT", "cs.SD cs.LG", "insp",
     [("music counterpoint rules", "music"), ("melody generation", "melody")],
     "Generated tunes often lack long-range structure. Encoding music counterpoint rules as soft constraints, "
     "we improve melody generation with a constrained sampler."),
    ("2302.00031", "Wed, 8 Feb 2023 10:00:00 GMT", "cs.CL", "blend",
     [("LLMs", "llm", "large language models"), ("large language models", "llm")],
     "Self-evaluation is cheap but unreliable. We let large language models (LLMs) critique drafts produced by "
     "other large language models and combine their judgements."),
    ("2410.00032", "Tue, 8 Oct 2024 10:00:00 GMT", "cs.LG", "blend",
     [("reinforcement learning", "rl"), ("large language models", "llm")],
     "Aligning assistants with user preferences is costly. We combine reinforcement learning from pairwise "
     "feedback with large language models fine-tuned on synthetic comparisons."),
    ("2411.00033", "Fri, 8 Nov 2024 10:00:00 GMT", "cs.RO", "insp",
     [("ant colony foraging", "ant"), ("warehouse robot routing", "warehouse")],
     "Congestion in fulfilment centres delays orders. Borrowing from ant colony foraging, we route robots with "
     "evaporating trail costs for warehouse robot routing."),
    ("2204.00034", "Fri, 8 Apr 2022 10:00:00 GMT", "cs.CV", "blend",
     [("convolutional neural networks", "cnn"), ("attention mechanisms", "attention")],
     "Local features miss global context in dense prediction. We fuse convolutional neural networks with "
     "attention mechanisms in a hybrid encoder."),
    ("2501.00035", "Wed, 8 Jan 2025 10:00:00 GMT", "cs.CV", "insp",
     [("the primate visual cortex", "cortex"), ("robust object recognition", "objrec")],
     "Adversarial perturbations fool standard classifiers. Following the primate visual cortex, we add divisive "
     "normalisation stages for robust object recognition."),
    ("2412.00036", "Sun, 8 Dec 2024 10:00:00 GMT", "cs.LG", "insp",
     [("hippocampal memory replay", "hippo"), ("LLM knowledge retention", "retention")],
     "Fine-tuned assistants forget facts learned in pretraining. Drawing on hippocampal memory replay, we "
     "rehearse consolidated snippets to improve LLM knowledge retention."),
    ("2308.00037", "Tue, 8 Aug 2023 10:00:00 GMT", "cs.AI", "blend",
     [("knowledge graphs", "kg"), ("reinforcement learning", "rl"), ("graph neural networks", "gnn")],
     "Multi-hop reasoning over incomplete facts needs both structure and search. We combine knowledge graphs, "
     "reinforcement learning and graph neural networks into a path-finding agent."),
    ("2110.00038", "Fri, 8 Oct 2021 10:00:00 GMT", "cs.CY", "insp",
     [("epidemic spreading models", "epidemic"), ("rumor detection", "rumor")],
     "Early warnings for viral hoaxes are rare. Using epidemic spreading models as a prior, we flag cascades for "
     "rumor detection within the first hour."),
    ("2502.00039", "Sat, 8 Feb 2025 10:00:00 GMT", "cs.RO", "insp",
     [("bird flocking dynamics", "bird"), ("multi-robot coordination", "swarm")],
     "Decentralised teams must agree on headings quickly. Taking bird flocking dynamics as a template, we derive "
     "consensus laws for multi-robot coordination."),
    # tokenization is labelled cs.CL in 2207.00029 and cs.LG here; the vote tie
    # goes to the later paper, so the node ends up in cs.lg.
    ("2403.00040", "Fri, 8 Mar 2024 10:00:00 GMT", "cs.CL", "blend",
     [("speech recognition", "speech"), ("subword tokenization", "tokenization", None, A("cs.LG"))],
     "Low-resource languages lack acoustic data. We join speech recognition with subword tokenization learned "
     "from text-only corpora."),
]

PARSE_FAILURE = ("2310.00041", "Sun, 8 Oct 2023 10:00:00 GMT", "cs.LG",
                 "Benchmarks saturate quickly in modern machine learning. We release a new suite of tasks with "
                 "held-out evaluation servers.")

NONE = [
    ("2001.00042", "Wed, 8 Jan 2020 10:00:00 GMT", "cs.LG",
     "Sharpness of minima has been linked to generalisation. We measure sharpness across optimisers and batch sizes."),
    ("2102.00043", "Mon, 8 Feb 2021 10:00:00 GMT", "cs.CV",
     "Annotating segmentation masks is expensive. We present a dataset of street scenes with coarse polygons."),
    ("2203.00044", "Tue, 8 Mar 2022 10:00:00 GMT", "cs.CL",
     "Tokenizer vocabularies differ across languages. We report statistics of vocabulary overlap for fifty languages."),
    ("2304.00045", "Sat, 8 Apr 2023 10:00:00 GMT", "cs.RO",
     "Calibration of wheel odometry drifts over time. We propose a least-squares calibration routine for rovers."),
    ("2405.00046", "Wed, 8 May 2024 10:00:00 GMT", "cs.AI",
     "Planning benchmarks rarely report variance. We rerun twelve planners with fifty seeds each."),
    ("2106.00047", "Tue, 8 Jun 2021 10:00:00 GMT", "cs.IR",
     "Click logs contain position bias. We estimate propensities with randomised swaps on a news portal."),
    ("2207.00048", "Fri, 8 Jul 2022 10:00:00 GMT", "cs.HC",
     "Screen reader users navigate charts slowly. We interview twenty users about their strategies."),
    ("2408.00049", "Thu, 8 Aug 2024 10:00:00 GMT", "cs.SI",
     "Follower graphs evolve quickly. We release monthly snapshots of a microblogging network."),
    ("2309.00050", "Fri, 8 Sep 2023 10:00:00 GMT", "cs.CY",
     "Public sector algorithms need audits. We compile a registry of deployed scoring systems."),
]

# Rejected by ingest: off-topic category, missing abstract, malformed line.
OFF_TOPIC = {"id": "2101.09999", "title": "Ramsey numbers", "categories": "math.CO",
             "abstract": "We bound small Ramsey numbers.", "versions": [{"created": "Mon, 4 Jan 2021 10:00:00 GMT"}]}
NO_ABSTRACT = {"id": "2101.09998", "title": "Untitled", "categories": "cs.LG",
               "versions": [{"created": "Mon, 4 Jan 2021 10:00:00 GMT"}]}

# Leak verdicts: only this answer is flagged.
LEAKY_ANSWER = "how children acquire language"


def marker(abstract):
    return abstract.split(". ")[0]


def entity(e):
    text, concept = e[0], e[1]
    norm = e[2] if len(e) > 2 and e[2] else text
    dom = e[3] if len(e) > 3 else CONCEPTS[concept]
    return text, concept, norm, dom


def row(pid, created, cats, abstract, title=None):
    return {"id": pid, "title": title or ("Paper " + pid), "categories": cats, "abstract": abstract,
            "versions": [{"created": created}]}


def main():
    corpus, script, vectors = [], [], {}
    for pid, created, cats, kind, ents, abstract in POSITIVE:
        corpus.append(row(pid, created, cats, abstract))
        es = [entity(e) for e in ents]
        m = marker(abstract)
        if kind == "blend":
            extraction = {"recombination_type": "combination", "combination-element": [e[0] for e in es]}
            domains = {"elements": [dict(entity=e[0], **e[3]) for e in es]}
            refined = {"combination-element": [e[0] for e in es]}
            context = "Prior approaches treat the components of this problem in isolation."
        else:
            extraction = {"recombination_type": "inspiration", "inspiration-source": [es[0][0]],
                          "inspiration-target": [es[1][0]]}
            domains = {"inspiration-source": es[0][3], "inspiration-target": es[1][3]}
            refined = {"inspiration-source": es[0][0], "inspiration-target": es[1][0]}
            context = "Existing methods for this problem are hand-tuned and fail to generalise."
        script.append({"contains": [EXTRACT, m], "reply": json.dumps(extraction)})
        script.append({"contains": [DOMAIN, m], "reply": json.dumps(domains)})
        script.append({"contains": [POSTPROCESS, m], "reply": json.dumps(refined)})
        script.append({"contains": [CONTEXT, m], "reply": context + " (" + pid + ")"})
        for text, concept, norm, _ in es:
            v = [0.0] * DIM
            v[INDEX[concept]] = 1.0
            if vectors.get(norm, v) != v:
                raise SystemExit("conflicting vectors for " + norm)
            vectors[norm] = v
    pid, created, cats, abstract = PARSE_FAILURE
    corpus.append(row(pid, created, cats, abstract))
    script.append({"contains": [EXTRACT, marker(abstract)], "reply": "Sorry, I cannot answer that."})
    for pid, created, cats, abstract in NONE:
        corpus.append(row(pid, created, cats, abstract))
        script.append({"contains": [EXTRACT, marker(abstract)], "reply": '{"recombination_type": "none"}'})
    script.append({"contains": [LEAK, "Hidden answer: " + LEAKY_ANSWER], "reply": "Yes"})
    script.append({"contains": [LEAK], "reply": "No"})
    script.append({"contains": [RERANK], "reply": "[2] > [1]"})

    markers = [marker(r["abstract"]) for r in corpus]
    for i, m in enumerate(markers):
        for j, r in enumerate(corpus):
            if i != j and m in r["abstract"]:
                raise SystemExit("marker collision: " + m)

    lines = [json.dumps(r) for r in corpus[:25]]
    lines.append(json.dumps(OFF_TOPIC))
    lines.append('{"id": "2101.09997", "abstract": ')
    lines.append(json.dumps(NO_ABSTRACT))
    lines += [json.dumps(r) for r in corpus[25:]]
    with open(os.path.join(HERE, "snapshot.jsonl"), "w") as f:
        f.write("\n".join(lines) + "\n")
    with open(os.path.join(HERE, "mock_script.jsonl"), "w") as f:
        for s in script:
            f.write(json.dumps(s) + "\n")
    with open(os.path.join(HERE, "mock_embeddings.jsonl"), "w") as f:
        for text in sorted(vectors):
            f.write(json.dumps({"text": text, "vector": vectors[text]}) + "\n")


if __name__ == "__main__":
    main()
