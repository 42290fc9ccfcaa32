"""Context-aware knowledge graph layouts."""

import json

from ._core import ContextKGError, radial_radius
from . import _core

__all__ = ["ContextKGError", "Engine", "Graph", "Service", "radial_radius"]


class Graph:
    def __init__(self, native):
        self._native = native

    @classmethod
    def from_dict(cls, document):
        return cls(_core.Graph.from_json(json.dumps(document)))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls(_core.Graph.from_json(f.read()))

    @property
    def node_count(self):
        return self._native.node_count()

    @property
    def edge_count(self):
        return self._native.edge_count()

    def to_dict(self):
        return json.loads(self._native.to_json())


class Engine:
    def __init__(self, graph, config=None):
        self._native = _core.Engine(graph._native, json.dumps(config or {}))

    def extract(self, question):
        return json.loads(self._native.extract(question))

    def query(self, question, diversity=None, budget=None, seed=0):
        return json.loads(self._native.query(question, diversity, budget, seed))

    def run(self, preference, budget, seed=0):
        return json.loads(self._native.run(json.dumps(preference), budget, seed))

    def insights(self, question, budget=None, seed=0):
        return json.loads(self._native.insights(question, budget, seed))

    def ontology_view(self):
        return json.loads(self._native.ontology_view())


class Service:
    """In-process request handler, the same routes as the HTTP server."""

    def __init__(self, data_dir, graphs_dir):
        self._native = _core.Service(str(data_dir), str(graphs_dir))

    def handle(self, method, path, body=None):
        status, text = self._native.handle(method, path, "" if body is None else json.dumps(body))
        return status, json.loads(text)
