import io
import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from aceminer.lexicon import load_lexicon
from aceminer.ontology import parse_ontology
from aceminer.terminology import TermEntry, Terminology

BINARY_TREE_XML = b"""<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
         xmlns:owl="http://www.w3.org/2002/07/owl#">
  <owl:Class rdf:about="http://x.org/t#n1"><rdfs:label>Root</rdfs:label></owl:Class>
  <owl:Class rdf:about="http://x.org/t#n2"><rdfs:label>Left</rdfs:label>
    <rdfs:subClassOf rdf:resource="http://x.org/t#n1"/></owl:Class>
  <owl:Class rdf:about="http://x.org/t#n3"><rdfs:label>Right</rdfs:label>
    <rdfs:subClassOf rdf:resource="http://x.org/t#n1"/></owl:Class>
  <owl:Class rdf:about="http://x.org/t#n4"><rdfs:label>LeftLeft</rdfs:label>
    <rdfs:subClassOf rdf:resource="http://x.org/t#n2"/></owl:Class>
  <owl:Class rdf:about="http://x.org/t#n5"><rdfs:label>LeftRight</rdfs:label>
    <rdfs:subClassOf rdf:resource="http://x.org/t#n2"/></owl:Class>
  <owl:Class rdf:about="http://x.org/t#n6"><rdfs:label>RightLeft</rdfs:label>
    <rdfs:subClassOf rdf:resource="http://x.org/t#n3"/></owl:Class>
  <owl:Class rdf:about="http://x.org/t#n7"><rdfs:label>RightRight</rdfs:label>
    <rdfs:subClassOf rdf:resource="http://x.org/t#n3"/></owl:Class>
</rdf:RDF>
"""

MINI_LEXICON_TSV = """# test lexicon
C0000101\tChild Abuse\tP\tFinding
C0000101\tabuse of child\tS\tFinding
C0000102\tchild neglect\tP\tFinding
C0000201\thousehold composition\tP\tSocial Context
C0000202\tHousehold Composition\tS\tSocial Context
C0000301\tanxiety\tP\tFinding
"""


@pytest.fixture
def binary_tree_graph():
    return parse_ontology(io.BytesIO(BINARY_TREE_XML))


@pytest.fixture
def mini_lexicon():
    return load_lexicon(io.StringIO(MINI_LEXICON_TSV))


@pytest.fixture
def small_terminology():
    return Terminology(
        name="test",
        entries=[
            TermEntry(
                cui="C0000301",
                preferred_label="anxiety",
                source="project",
                status="accepted",
            ),
            TermEntry(
                cui="C0000102",
                preferred_label="child neglect",
                synonyms=["neglect of a child"],
                source="aceso",
                status="accepted",
            ),
        ],
    )


def random_terminology(rng: random.Random, vocab, max_terms=50, max_len=4) -> Terminology:
    """Random accepted entries over a shared vocabulary, so patterns collide,
    nest, and prefix each other."""
    n = rng.randint(1, max_terms)
    entries = []
    for i in range(n):
        tokens = rng.choices(vocab, k=rng.randint(1, max_len))
        synonyms = []
        if rng.random() < 0.4:
            synonyms.append(" ".join(rng.choices(vocab, k=rng.randint(1, max_len))))
        entries.append(
            TermEntry(
                cui=f"C{i + 1:07d}",
                preferred_label=" ".join(tokens),
                synonyms=synonyms,
                status="accepted",
            )
        )
    return Terminology(name=f"random-{rng.random():.6f}", entries=entries)


def random_document_text(rng: random.Random, vocab, max_chars=2000) -> str:
    """Random text over the same vocabulary with varied separators and
    casing, so token boundaries and case folding actually get exercised."""
    separators = [" ", " ", " ", "  ", "-", ", ", ".\n", "", "; "]
    parts = []
    size = 0
    while size < max_chars:
        word = rng.choice(vocab)
        if rng.random() < 0.3:
            word = word.upper() if rng.random() < 0.5 else word.capitalize()
        sep = rng.choice(separators)
        parts.append(word + sep)
        size += len(word) + len(sep)
        if rng.random() < 0.002:
            break
    return "".join(parts)[:max_chars]


ORACLE_VOCAB = [
    "ab", "cd", "efg", "hi", "jkl", "mn", "op2", "qr", "st", "uv",
    "w", "xyz", "child", "abuse", "neglect",
]
