"""Parametric digital twin: a typed directed graph over a small Brick-style
vocabulary, binding sensing points in the building hierarchy to series ids.

The class list is a working reconstruction around the four predicates the
toolkit needs; it is closed and versioned, and unknown names are rejected
at parse time.
"""

import json
from dataclasses import dataclass, field

from .errors import (
    CycleDetectedError,
    DuplicateBindingError,
    DuplicateIdError,
    InvalidClassError,
    NotASensorError,
    ParseError,
    PredicateClassMismatchError,
    SchemaVersionMismatchError,
    UnknownEntityError,
)
from .series import UNITS

SCHEMA_VERSION = 1

LOCATION_CLASSES = frozenset({"Building", "Floor", "Room"})

SENSOR_CLASSES = frozenset(
    {
        "TemperatureSensor",
        "HumiditySensor",
        "CO2Sensor",
        "ParticulateSensor",
        "NoiseSensor",
        "LightSensor",
        "GroundwaterLevelSensor",
        "OutdoorWeatherStation",
    }
)

ENTITY_CLASSES = LOCATION_CLASSES | SENSOR_CLASSES | {"HeatingSystem"}

PREDICATES = ("hasPart", "isPointOf", "feeds", "hasLocation")

# subject class group -> allowed object class group, per predicate
_PREDICATE_RULES = {
    "hasPart": (
        frozenset({"Building", "Floor"}),
        frozenset({"Floor", "Room"}),
    ),
    "isPointOf": (SENSOR_CLASSES, LOCATION_CLASSES | {"HeatingSystem"}),
    "feeds": (frozenset({"HeatingSystem"}), LOCATION_CLASSES),
    "hasLocation": (
        SENSOR_CLASSES | {"HeatingSystem"},
        LOCATION_CLASSES,
    ),
}

_SCALAR_TYPES = (str, int, float, bool)


@dataclass
class Entity:
    id: str
    entity_class: str
    label: str = ""
    attributes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Relationship:
    subject: str
    predicate: str
    object: str


@dataclass(frozen=True)
class SeriesBinding:
    point_id: str
    series_id: str
    unit: str


def predicate_allows(predicate, subject_class, object_class):
    if predicate not in _PREDICATE_RULES:
        return False
    subjects, objects = _PREDICATE_RULES[predicate]
    return subject_class in subjects and object_class in objects


class TwinGraph:
    """Mutation requires exclusive access; queries never see partial updates."""

    def __init__(self):
        self.entities = {}
        self.relations = []
        self.bindings = []
        self._rel_seen = set()
        self._binding_seen = set()

    # --- mutation -------------------------------------------------------

    def add_entity(self, entity):
        if entity.entity_class not in ENTITY_CLASSES:
            raise InvalidClassError(f"unknown entity class {entity.entity_class!r}")
        if not entity.id:
            raise InvalidClassError("entity id must be non-empty")
        if entity.id in self.entities:
            raise DuplicateIdError(f"entity {entity.id!r} already present")
        for key, value in entity.attributes.items():
            if not isinstance(value, _SCALAR_TYPES):
                raise InvalidClassError(
                    f"attribute {key!r} of {entity.id!r} must be a flat scalar"
                )
        self.entities[entity.id] = entity
        return entity.id

    def add_relation(self, rel):
        for end in (rel.subject, rel.object):
            if end not in self.entities:
                raise UnknownEntityError(f"unknown entity {end!r}")
        sub_class = self.entities[rel.subject].entity_class
        obj_class = self.entities[rel.object].entity_class
        if not predicate_allows(rel.predicate, sub_class, obj_class):
            raise PredicateClassMismatchError(
                f"{rel.predicate}({sub_class} -> {obj_class}) is not allowed"
            )
        if rel.predicate == "hasPart" and self._would_cycle(rel.subject, rel.object):
            raise CycleDetectedError(
                f"hasPart({rel.subject} -> {rel.object}) would close a cycle"
            )
        key = (rel.subject, rel.predicate, rel.object)
        if key not in self._rel_seen:
            self._rel_seen.add(key)
            self.relations.append(rel)

    def _would_cycle(self, subject, obj):
        if subject == obj:
            return True
        # walk hasPart edges from obj; a path back to subject closes a cycle
        stack = [obj]
        seen = set()
        while stack:
            node = stack.pop()
            if node == subject:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(
                r.object
                for r in self.relations
                if r.predicate == "hasPart" and r.subject == node
            )
        return False

    def bind_series(self, binding):
        if binding.point_id not in self.entities:
            raise UnknownEntityError(f"unknown entity {binding.point_id!r}")
        if self.entities[binding.point_id].entity_class not in SENSOR_CLASSES:
            raise NotASensorError(
                f"{binding.point_id!r} is not a sensor and cannot carry a series"
            )
        if binding.unit not in UNITS:
            raise InvalidClassError(f"unknown unit {binding.unit!r}")
        key = (binding.point_id, binding.series_id)
        if key in self._binding_seen:
            raise DuplicateBindingError(
                f"{binding.point_id!r} is already bound to {binding.series_id!r}"
            )
        self._binding_seen.add(key)
        self.bindings.append(binding)

    # --- queries --------------------------------------------------------

    def descendants(self, location):
        """The location plus everything reachable over hasPart edges."""
        if location not in self.entities:
            raise UnknownEntityError(f"unknown entity {location!r}")
        out = {location}
        stack = [location]
        while stack:
            node = stack.pop()
            for rel in self.relations:
                if rel.predicate == "hasPart" and rel.subject == node:
                    if rel.object not in out:
                        out.add(rel.object)
                        stack.append(rel.object)
        return out

    def query_points(self, location, class_filter=None):
        """Sensors attached (isPointOf) to the location or its descendants."""
        if class_filter is not None and class_filter not in ENTITY_CLASSES:
            raise InvalidClassError(f"unknown entity class {class_filter!r}")
        scope = self.descendants(location)
        hits = {
            rel.subject
            for rel in self.relations
            if rel.predicate == "isPointOf" and rel.object in scope
        }
        points = [self.entities[h] for h in sorted(hits)]
        if class_filter is not None:
            points = [p for p in points if p.entity_class == class_filter]
        return points

    def bindings_for(self, point_id):
        if point_id not in self.entities:
            raise UnknownEntityError(f"unknown entity {point_id!r}")
        return [b for b in self.bindings if b.point_id == point_id]


# --- serialization ------------------------------------------------------


def serialize_graph(graph):
    """Canonical JSON document: entities and relations sorted for stable
    round-trips."""
    return {
        "twin_schema": SCHEMA_VERSION,
        "entities": [
            {
                "id": e.id,
                "class": e.entity_class,
                "label": e.label,
                "attributes": dict(sorted(e.attributes.items())),
            }
            for e in sorted(graph.entities.values(), key=lambda e: e.id)
        ],
        "relations": [
            {"subject": r.subject, "predicate": r.predicate, "object": r.object}
            for r in sorted(
                graph.relations, key=lambda r: (r.subject, r.predicate, r.object)
            )
        ],
        "bindings": [
            {"point": b.point_id, "series": b.series_id, "unit": b.unit}
            for b in sorted(graph.bindings, key=lambda b: (b.point_id, b.series_id))
        ],
    }


def dumps_graph(graph):
    return json.dumps(serialize_graph(graph), ensure_ascii=False, indent=2)


def load_graph(document):
    """Parse a twin document (dict or JSON text) back into a TwinGraph."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, position=exc.pos) from exc
    if not isinstance(document, dict):
        raise ParseError("twin document must be a JSON object")
    version = document.get("twin_schema")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"twin_schema {version!r} unsupported (expected {SCHEMA_VERSION})"
        )
    graph = TwinGraph()
    try:
        for e in document["entities"]:
            graph.add_entity(
                Entity(
                    id=e["id"],
                    entity_class=e["class"],
                    label=e.get("label", ""),
                    attributes=dict(e.get("attributes", {})),
                )
            )
        for r in document["relations"]:
            graph.add_relation(
                Relationship(r["subject"], r["predicate"], r["object"])
            )
        for b in document["bindings"]:
            graph.bind_series(SeriesBinding(b["point"], b["series"], b["unit"]))
    except KeyError as exc:
        raise ParseError(f"twin document lacks field {exc}") from exc
    except TypeError as exc:
        raise ParseError(f"twin document is malformed: {exc}") from exc
    return graph


def graphs_equal(a, b):
    return serialize_graph(a) == serialize_graph(b)
