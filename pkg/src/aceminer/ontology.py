"""OWL/RDF-XML class hierarchy parsing, statistics, and leaf extraction.

Only the RDF/XML serialization is consumed (the format BioPortal ships).
The parser reads class declarations, subclass axioms, object/data property
declarations, and label/annotation assertions; every other OWL construct is
skipped without error.
"""

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import BinaryIO
from urllib.parse import urljoin

from .errors import OntologyParseError, SubclassCycleError, UnknownClassError

logger = logging.getLogger(__name__)

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XML_NS = "http://www.w3.org/XML/1998/namespace"

_RDF_ABOUT = f"{{{RDF_NS}}}about"
_RDF_ID = f"{{{RDF_NS}}}ID"
_RDF_RESOURCE = f"{{{RDF_NS}}}resource"
_RDF_TYPE = f"{{{RDF_NS}}}type"
_RDF_DESCRIPTION = f"{{{RDF_NS}}}Description"
_XML_BASE = f"{{{XML_NS}}}base"
_OWL_CLASS = f"{{{OWL_NS}}}Class"
_OWL_OBJECT_PROPERTY = f"{{{OWL_NS}}}ObjectProperty"
_OWL_DATA_PROPERTY = f"{{{OWL_NS}}}DatatypeProperty"
_RDFS_SUBCLASS_OF = f"{{{RDFS_NS}}}subClassOf"
_RDFS_LABEL = f"{{{RDFS_NS}}}label"


@dataclass
class OntologyClass:
    """One named class of the ontology."""

    iri: str
    label: str | None = None
    parent_iris: set[str] = field(default_factory=set)
    annotations: dict[str, str] = field(default_factory=dict)

    @property
    def display_label(self) -> str:
        """The asserted label, falling back to the IRI fragment."""
        if self.label:
            return self.label
        return iri_fragment(self.iri)


@dataclass
class OntologyGraph:
    """Parsed class hierarchy plus property counts."""

    classes: dict[str, OntologyClass]
    object_property_count: int
    data_property_count: int
    dangling_parent_iris: set[str] = field(default_factory=set)

    @property
    def class_count(self) -> int:
        return len(self.classes)


def iri_fragment(iri: str) -> str:
    """Substring after the last '#' or '/', the conventional short name."""
    for sep in ("#", "/"):
        if sep in iri:
            tail = iri.rsplit(sep, 1)[1]
            if tail:
                return tail
    return iri


def _resolve(base: str, attrs: dict[str, str]) -> str | None:
    """Subject IRI from rdf:about / rdf:ID, resolved against xml:base."""
    about = attrs.get(_RDF_ABOUT)
    if about is not None:
        if ":" in about.split("/")[0].split("#")[0]:
            return about  # already absolute
        return urljoin(base, about) if base else about
    node_id = attrs.get(_RDF_ID)
    if node_id is not None:
        return f"{base}#{node_id}" if base else f"#{node_id}"
    return None


def _tag_to_iri(tag: str) -> str:
    """ElementTree '{ns}local' tag to a plain predicate IRI string."""
    if tag.startswith("{"):
        ns, local = tag[1:].split("}", 1)
        return ns + local
    return tag


class _Collector:
    """Accumulates declarations while walking the element tree."""

    def __init__(self, base: str):
        self.base = base
        self.classes: dict[str, OntologyClass] = {}
        self.object_properties: set[str] = set()
        self.data_properties: set[str] = set()

    def get_class(self, iri: str) -> OntologyClass:
        cls = self.classes.get(iri)
        if cls is None:
            cls = OntologyClass(iri=iri)
            self.classes[iri] = cls
        return cls

    def walk(self, elem: ET.Element, base: str) -> None:
        base = elem.get(_XML_BASE, base)
        for child in elem:
            self.visit(child, base)

    def visit(self, elem: ET.Element, base: str) -> None:
        base = elem.get(_XML_BASE, base)
        tag = elem.tag
        if tag == _OWL_CLASS:
            self._visit_class(elem, base)
            return
        if tag == _OWL_OBJECT_PROPERTY:
            iri = _resolve(base, elem.attrib)
            if iri:
                self.object_properties.add(iri)
            self.walk(elem, base)
            return
        if tag == _OWL_DATA_PROPERTY:
            iri = _resolve(base, elem.attrib)
            if iri:
                self.data_properties.add(iri)
            self.walk(elem, base)
            return
        if tag == _RDF_DESCRIPTION:
            self._visit_description(elem, base)
            return
        # Unknown construct: recurse, nested declarations still count.
        self.walk(elem, base)

    def _typed_as(self, elem: ET.Element) -> set[str]:
        types = set()
        for child in elem:
            if child.tag == _RDF_TYPE:
                res = child.get(_RDF_RESOURCE)
                if res:
                    types.add(res)
        return types

    def _visit_description(self, elem: ET.Element, base: str) -> None:
        types = self._typed_as(elem)
        if OWL_NS + "Class" in types:
            self._visit_class(elem, base)
            return
        iri = _resolve(base, elem.attrib)
        if iri:
            if OWL_NS + "ObjectProperty" in types:
                self.object_properties.add(iri)
            if OWL_NS + "DatatypeProperty" in types:
                self.data_properties.add(iri)
        self.walk(elem, base)

    def _visit_class(self, elem: ET.Element, base: str) -> None:
        iri = _resolve(base, elem.attrib)
        if iri is None:
            # Anonymous class expression (restriction operand etc.): the
            # declaration is skipped, nested named constructs still count.
            self.walk(elem, base)
            return
        cls = self.get_class(iri)
        for child in elem:
            base_c = child.get(_XML_BASE, base)
            if child.tag == _RDFS_SUBCLASS_OF:
                parent = self._parent_iri(child, base_c)
                if parent and parent != iri:
                    cls.parent_iris.add(parent)
                elif parent == iri:
                    raise SubclassCycleError(iri)
            elif child.tag == _RDFS_LABEL:
                text = (child.text or "").strip()
                if text and cls.label is None:
                    cls.label = text
            elif child.tag == _RDF_TYPE:
                continue
            elif len(child) == 0 and child.get(_RDF_RESOURCE) is None:
                text = (child.text or "").strip()
                if text:
                    cls.annotations.setdefault(_tag_to_iri(child.tag), text)
            else:
                # Nested class expressions under equivalentClass etc.
                self.walk(child, base_c)

    def _parent_iri(self, sub_elem: ET.Element, base: str) -> str | None:
        res = sub_elem.get(_RDF_RESOURCE)
        if res is not None:
            if ":" in res.split("/")[0].split("#")[0]:
                return res
            return urljoin(base, res) if base else res
        for child in sub_elem:
            if child.tag in (_OWL_CLASS, _RDF_DESCRIPTION):
                iri = _resolve(base, child.attrib)
                if iri is not None:
                    # A named class nested here is also a declaration.
                    self._visit_class(child, base)
                    return iri
            # owl:Restriction and other anonymous superclasses are skipped.
            self.walk(child, base)
        return None


def parse_ontology(source: BinaryIO | str) -> OntologyGraph:
    """Parse an OWL/RDF-XML document into an :class:`OntologyGraph`.

    ``source`` is a binary stream or a file path. Raises
    :class:`OntologyParseError` for malformed XML (with line/column) and
    :class:`SubclassCycleError` when the asserted hierarchy is cyclic.
    """
    try:
        tree = ET.parse(source)
    except ET.ParseError as exc:
        line, column = exc.position if exc.position else (None, None)
        raise OntologyParseError(f"malformed XML: {exc.msg}", line, column) from exc
    root = tree.getroot()
    base = root.get(_XML_BASE, "")
    collector = _Collector(base)
    if root.tag == f"{{{RDF_NS}}}RDF":
        collector.walk(root, base)
    else:
        collector.visit(root, base)

    classes = collector.classes
    dangling: set[str] = set()
    for cls in classes.values():
        for parent in cls.parent_iris:
            if parent not in classes:
                dangling.add(parent)
    if dangling:
        logger.warning(
            "%d parent IRI(s) referenced but not declared locally; "
            "they do not take part in leaf extraction", len(dangling),
        )

    _check_acyclic(classes)
    return OntologyGraph(
        classes=classes,
        object_property_count=len(collector.object_properties),
        data_property_count=len(collector.data_properties),
        dangling_parent_iris=dangling,
    )


def _check_acyclic(classes: dict[str, OntologyClass]) -> None:
    """Reject subclass cycles among locally defined classes."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = dict.fromkeys(classes, WHITE)
    for start in classes:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(classes[start].parent_iris))]
        color[start] = GRAY
        while stack:
            node, parents = stack[-1]
            advanced = False
            for parent in parents:
                if parent not in classes:
                    continue
                c = color[parent]
                if c == GRAY:
                    raise SubclassCycleError(parent)
                if c == WHITE:
                    color[parent] = GRAY
                    stack.append((parent, iter(classes[parent].parent_iris)))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()


def extract_leaf_nodes(graph: OntologyGraph) -> list[OntologyClass]:
    """Classes that appear in no other class's parent set, sorted by IRI."""
    referenced = set()
    for cls in graph.classes.values():
        referenced.update(cls.parent_iris)
    return [graph.classes[iri] for iri in sorted(graph.classes) if iri not in referenced]


def class_context(graph: OntologyGraph, iri: str) -> list[str]:
    """Root-to-class chain of display labels.

    At each step the lexicographically smallest defined parent IRI is
    followed, so the path is deterministic under multiple inheritance.
    """
    if iri not in graph.classes:
        raise UnknownClassError(f"class {iri!r} is not defined in the graph")
    path = []
    current: str | None = iri
    while current is not None:
        cls = graph.classes[current]
        path.append(cls.display_label)
        defined_parents = sorted(p for p in cls.parent_iris if p in graph.classes)
        current = defined_parents[0] if defined_parents else None
    path.reverse()
    return path


def stats(graph: OntologyGraph) -> dict[str, int]:
    """The four headline metrics reported by the CLI."""
    return {
        "classes": graph.class_count,
        "object_properties": graph.object_property_count,
        "data_properties": graph.data_property_count,
        "leaves": len(extract_leaf_nodes(graph)),
    }
