import io
import os
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aceminer.errors import OntologyParseError, SubclassCycleError, UnknownClassError
from aceminer.fixtures import generate_pipeline_fixture
from aceminer.ontology import (
    class_context,
    extract_leaf_nodes,
    iri_fragment,
    parse_ontology,
    stats,
)

SINGLE_CLASS_XML = b"""<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
         xmlns:owl="http://www.w3.org/2002/07/owl#">
  <owl:Class rdf:about="http://x.org/t#only">
    <rdfs:label>Only One</rdfs:label>
  </owl:Class>
</rdf:RDF>
"""


def test_single_class_document():
    graph = parse_ontology(io.BytesIO(SINGLE_CLASS_XML))
    assert graph.class_count == 1
    assert graph.object_property_count == 0
    assert graph.data_property_count == 0
    cls = graph.classes["http://x.org/t#only"]
    assert cls.label == "Only One"


def test_truncated_xml_reports_position():
    broken = SINGLE_CLASS_XML[: len(SINGLE_CLASS_XML) // 2]
    with pytest.raises(OntologyParseError) as exc_info:
        parse_ontology(io.BytesIO(broken))
    assert exc_info.value.line is not None


def test_not_xml_at_all():
    with pytest.raises(OntologyParseError):
        parse_ontology(io.BytesIO(b"this is not xml"))


def test_binary_tree_leaves(binary_tree_graph):
    leaves = extract_leaf_nodes(binary_tree_graph)
    assert [leaf.label for leaf in leaves] == [
        "LeftLeft", "LeftRight", "RightLeft", "RightRight",
    ]


def test_single_class_is_its_own_leaf():
    graph = parse_ontology(io.BytesIO(SINGLE_CLASS_XML))
    leaves = extract_leaf_nodes(graph)
    assert len(leaves) == 1
    assert leaves[0].iri == "http://x.org/t#only"


def test_leaf_partition_disjoint(binary_tree_graph):
    graph = binary_tree_graph
    leaves = {leaf.iri for leaf in extract_leaf_nodes(graph)}
    referenced = set()
    for cls in graph.classes.values():
        referenced.update(p for p in cls.parent_iris if p in graph.classes)
    assert leaves | referenced == set(graph.classes)
    assert not leaves & referenced


def test_class_context_deepest_left(binary_tree_graph):
    assert class_context(binary_tree_graph, "http://x.org/t#n4") == [
        "Root", "Left", "LeftLeft",
    ]


def test_class_context_root(binary_tree_graph):
    assert class_context(binary_tree_graph, "http://x.org/t#n1") == ["Root"]


def test_class_context_unknown_iri(binary_tree_graph):
    with pytest.raises(UnknownClassError):
        class_context(binary_tree_graph, "http://x.org/t#nope")


def test_class_context_prefers_smallest_parent_iri():
    xml = b"""<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
         xmlns:owl="http://www.w3.org/2002/07/owl#">
  <owl:Class rdf:about="http://x.org/t#a"><rdfs:label>A</rdfs:label></owl:Class>
  <owl:Class rdf:about="http://x.org/t#b"><rdfs:label>B</rdfs:label></owl:Class>
  <owl:Class rdf:about="http://x.org/t#kid"><rdfs:label>Kid</rdfs:label>
    <rdfs:subClassOf rdf:resource="http://x.org/t#b"/>
    <rdfs:subClassOf rdf:resource="http://x.org/t#a"/>
  </owl:Class>
</rdf:RDF>
"""
    graph = parse_ontology(io.BytesIO(xml))
    assert class_context(graph, "http://x.org/t#kid") == ["A", "Kid"]


def test_cycle_is_rejected():
    xml = b"""<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
         xmlns:owl="http://www.w3.org/2002/07/owl#">
  <owl:Class rdf:about="http://x.org/t#a">
    <rdfs:subClassOf rdf:resource="http://x.org/t#b"/></owl:Class>
  <owl:Class rdf:about="http://x.org/t#b">
    <rdfs:subClassOf rdf:resource="http://x.org/t#a"/></owl:Class>
</rdf:RDF>
"""
    with pytest.raises(SubclassCycleError) as exc_info:
        parse_ontology(io.BytesIO(xml))
    assert exc_info.value.member_iri in ("http://x.org/t#a", "http://x.org/t#b")


def test_dangling_parents_recorded_not_fatal():
    xml = b"""<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
         xmlns:owl="http://www.w3.org/2002/07/owl#">
  <owl:Class rdf:about="http://x.org/t#a">
    <rdfs:subClassOf rdf:resource="http://elsewhere.org/imported#thing"/>
  </owl:Class>
</rdf:RDF>
"""
    graph = parse_ontology(io.BytesIO(xml))
    assert graph.dangling_parent_iris == {"http://elsewhere.org/imported#thing"}
    # the dangling parent is not a class, so `a` is still the only leaf
    assert [leaf.iri for leaf in extract_leaf_nodes(graph)] == ["http://x.org/t#a"]


def test_multiple_inheritance_disqualifies_every_parent():
    xml = b"""<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
         xmlns:owl="http://www.w3.org/2002/07/owl#">
  <owl:Class rdf:about="http://x.org/t#p1"/>
  <owl:Class rdf:about="http://x.org/t#p2"/>
  <owl:Class rdf:about="http://x.org/t#kid">
    <rdfs:subClassOf rdf:resource="http://x.org/t#p1"/>
    <rdfs:subClassOf rdf:resource="http://x.org/t#p2"/>
  </owl:Class>
</rdf:RDF>
"""
    graph = parse_ontology(io.BytesIO(xml))
    assert [leaf.iri for leaf in extract_leaf_nodes(graph)] == ["http://x.org/t#kid"]


def test_label_falls_back_to_iri_fragment():
    xml = b"""<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:owl="http://www.w3.org/2002/07/owl#">
  <owl:Class rdf:about="http://x.org/t#UnlabeledThing"/>
</rdf:RDF>
"""
    graph = parse_ontology(io.BytesIO(xml))
    cls = graph.classes["http://x.org/t#UnlabeledThing"]
    assert cls.label is None
    assert cls.display_label == "UnlabeledThing"
    assert iri_fragment("http://x.org/path/Deep") == "Deep"


def test_annotations_are_kept():
    xml = b"""<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
         xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
         xmlns:owl="http://www.w3.org/2002/07/owl#"
         xmlns:x="http://x.org/ann#">
  <owl:Class rdf:about="http://x.org/t#a">
    <x:sctid>12345678</x:sctid>
  </owl:Class>
</rdf:RDF>
"""
    graph = parse_ontology(io.BytesIO(xml))
    assert graph.classes["http://x.org/t#a"].annotations == {
        "http://x.org/ann#sctid": "12345678"
    }


def test_parse_is_idempotent():
    fixture = generate_pipeline_fixture(seed=3, classes=40, leaves=25, mapped=10,
                                        accepted=5, project_terms=3,
                                        object_properties=7, data_properties=2)
    g1 = parse_ontology(io.BytesIO(fixture.ontology_xml))
    g2 = parse_ontology(io.BytesIO(fixture.ontology_xml))
    assert g1.classes.keys() == g2.classes.keys()
    for iri in g1.classes:
        assert g1.classes[iri].parent_iris == g2.classes[iri].parent_iris
        assert g1.classes[iri].label == g2.classes[iri].label
    assert stats(g1) == stats(g2)


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=25, deadline=None)
def test_parse_count_property(seed):
    """Generated ontologies with known counts parse back to exactly those."""
    rng = random.Random(seed)
    leaves = rng.randint(3, 40)
    internals = rng.randint(max(1, (leaves + 1) // 2), leaves)
    props = rng.randint(0, 12)
    dprops = rng.randint(0, 4)
    fixture = generate_pipeline_fixture(
        seed=seed, classes=leaves + internals, leaves=leaves,
        mapped=min(3, leaves), accepted=1, project_terms=1,
        object_properties=props, data_properties=dprops,
    )
    graph = parse_ontology(io.BytesIO(fixture.ontology_xml))
    got = stats(graph)
    assert got["classes"] == leaves + internals
    assert got["object_properties"] == props
    assert got["data_properties"] == dprops
    assert got["leaves"] == leaves
    # partition property on the same graph
    leaf_set = {leaf.iri for leaf in extract_leaf_nodes(graph)}
    referenced = set()
    for cls in graph.classes.values():
        referenced.update(p for p in cls.parent_iris if p in graph.classes)
    assert leaf_set | referenced == set(graph.classes)
    assert not leaf_set & referenced


ACESO_ENV = "ACESO_OWL"


def aceso_path():
    path = os.environ.get(ACESO_ENV)
    if path and os.path.exists(path):
        return path
    bundled = os.path.join(os.path.dirname(__file__), "data", "aceso.owl")
    return bundled if os.path.exists(bundled) else None


@pytest.mark.skipif(aceso_path() is None, reason="ACESO download not available (data-gated)")
def test_aceso_reference_counts():
    with open(aceso_path(), "rb") as f:
        graph = parse_ontology(f)
    got = stats(graph)
    assert got == {
        "classes": 297,
        "object_properties": 93,
        "data_properties": 3,
        "leaves": 140,
    }
