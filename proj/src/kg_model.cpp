#include "contextkg/kg_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "contextkg/error.hpp"
#include "strings.hpp"

namespace ckg {

using nlohmann::json;

std::string_view to_string(AttributeKind kind) {
  return kind == AttributeKind::Numeric ? "numeric" : "text";
}

AttributeValue AttributeValue::numeric(double v, std::string unit) {
  AttributeValue a;
  a.kind = AttributeKind::Numeric;
  a.number = v;
  a.unit = std::move(unit);
  return a;
}

AttributeValue AttributeValue::of_text(std::string v) {
  AttributeValue a;
  a.kind = AttributeKind::Text;
  a.text = std::move(v);
  return a;
}

std::string AttributeValue::canonical() const {
  return kind == AttributeKind::Numeric ? text::format_number(number) : text;
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw GraphError(GraphError::Kind::Malformed, "malformed graph document: " + what);
}

const std::string& require_string(const json& obj, const char* field, const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
    malformed(where + " needs a non-empty string '" + field + "'");
  }
  return it->get_ref<const std::string&>();
}

// An attribute value as written in the document, before its kind is settled.
struct RawValue {
  bool json_number = false;
  double number = 0.0;
  std::string text;
  std::string unit;
};

RawValue read_raw(const json& v, const std::string& where) {
  RawValue raw;
  if (v.is_number()) {
    raw.json_number = true;
    raw.number = v.get<double>();
  } else if (v.is_string()) {
    raw.text = v.get<std::string>();
  } else if (v.is_boolean()) {
    raw.text = v.get<bool>() ? "true" : "false";
  } else if (v.is_object() && v.contains("value") && v["value"].is_number()) {
    raw.json_number = true;
    raw.number = v["value"].get<double>();
    if (const auto u = v.find("unit"); u != v.end()) {
      if (!u->is_string()) malformed(where + " unit must be a string");
      raw.unit = u->get<std::string>();
    }
  } else {
    malformed(where + " has an unsupported attribute value");
  }
  return raw;
}

json write_value(const AttributeValue& v) {
  if (v.kind == AttributeKind::Text) return v.text;
  if (!v.unit.empty()) return json{{"value", v.number}, {"unit", v.unit}};
  return v.number;
}

std::optional<AttributeKind> parse_kind(const json& v) {
  if (!v.is_string()) return std::nullopt;
  const auto s = text::to_lower(v.get<std::string>());
  if (s == "numeric" || s == "number") return AttributeKind::Numeric;
  if (s == "text" || s == "string") return AttributeKind::Text;
  return std::nullopt;
}

}  // namespace

KnowledgeGraph KnowledgeGraph::from_json(const json& doc, const LoadOptions& options) {
  if (!doc.is_object()) malformed("top level must be an object");
  const auto nodes_it = doc.find("nodes");
  const auto edges_it = doc.find("edges");
  if (nodes_it == doc.end() || !nodes_it->is_array()) malformed("'nodes' must be an array");
  if (edges_it == doc.end() || !edges_it->is_array()) malformed("'edges' must be an array");

  KnowledgeGraph kg;
  std::map<AttributeKey, AttributeKind> declared;
  if (const auto meta = doc.find("meta"); meta != doc.end()) {
    if (!meta->is_object()) malformed("'meta' must be an object");
    if (const auto n = meta->find("name"); n != meta->end()) {
      if (!n->is_string()) malformed("meta.name must be a string");
      kg.name_ = n->get<std::string>();
    }
    if (const auto kinds = meta->find("attribute_kinds"); kinds != meta->end()) {
      if (!kinds->is_object()) malformed("meta.attribute_kinds must be an object");
      for (const auto& [key, value] : kinds->items()) {
        const auto dot = key.find('.');
        const auto kind = parse_kind(value);
        if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() || !kind) {
          malformed("meta.attribute_kinds entry '" + key + "' must be \"Type.attribute\": numeric|text");
        }
        declared[{key.substr(0, dot), key.substr(dot + 1)}] = *kind;
      }
    }
    if (const auto aliases = meta->find("aliases"); aliases != meta->end()) {
      if (!aliases->is_object()) malformed("meta.aliases must be an object");
      for (const auto& [key, list] : aliases->items()) {
        if (!list.is_array()) malformed("meta.aliases['" + key + "'] must be an array");
        auto& out = kg.aliases_[key];
        for (const auto& a : list) {
          if (!a.is_string()) malformed("meta.aliases['" + key + "'] entries must be strings");
          out.push_back(a.get<std::string>());
        }
      }
    }
  }

  // Nodes: gather raw attribute values grouped by (type, attribute) so kinds
  // can be settled over the whole column.
  std::map<AttributeKey, std::vector<std::pair<std::size_t, RawValue>>> columns;
  kg.nodes_.reserve(nodes_it->size());
  for (std::size_t i = 0; i < nodes_it->size(); ++i) {
    const json& jn = (*nodes_it)[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!jn.is_object()) malformed(where + " must be an object");
    Node node;
    node.id = require_string(jn, "id", where);
    node.type = require_string(jn, "type", where);
    node.label = require_string(jn, "label", where);
    if (const auto attrs = jn.find("attributes"); attrs != jn.end() && !attrs->is_null()) {
      if (!attrs->is_object()) malformed(where + ".attributes must be an object");
      for (const auto& [name, value] : attrs->items()) {
        columns[{node.type, name}].emplace_back(kg.nodes_.size(),
                                                read_raw(value, where + "." + name));
      }
    }
    kg.nodes_.push_back(std::move(node));
  }

  for (auto& [key, column] : columns) {
    const std::string key_name = key.first + "." + key.second;
    AttributeKind kind;
    if (const auto d = declared.find(key); d != declared.end()) {
      kind = d->second;
    } else {
      bool any_json_number = false;
      bool any_non_numeric_text = false;
      for (const auto& [_, raw] : column) {
        if (raw.json_number) {
          any_json_number = true;
        } else if (!text::parse_number(raw.text)) {
          any_non_numeric_text = true;
        }
      }
      if (any_json_number && any_non_numeric_text) {
        throw GraphError(GraphError::Kind::MixedAttributeKinds,
                         "attribute '" + key_name + "' mixes numeric and text values");
      }
      kind = any_non_numeric_text ? AttributeKind::Text : AttributeKind::Numeric;
    }
    for (auto& [node_idx, raw] : column) {
      AttributeValue value;
      if (kind == AttributeKind::Numeric) {
        double v = raw.number;
        if (!raw.json_number) {
          const auto parsed = text::parse_number(raw.text);
          if (!parsed) {
            throw GraphError(GraphError::Kind::MixedAttributeKinds,
                             "attribute '" + key_name + "' is numeric but node '" +
                                 kg.nodes_[node_idx].id + "' has text value '" + raw.text + "'");
          }
          v = *parsed;
        }
        value = AttributeValue::numeric(v, raw.unit);
      } else {
        value = AttributeValue::of_text(raw.json_number ? text::format_number(raw.number) : raw.text);
      }
      kg.nodes_[node_idx].attributes.emplace(key.second, std::move(value));
    }
    kg.attribute_index_[key] = kind;
  }
  // Declared kinds for attributes no node carries are still part of the schema.
  for (const auto& [key, kind] : declared) kg.attribute_index_.emplace(key, kind);

  std::sort(kg.nodes_.begin(), kg.nodes_.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < kg.nodes_.size(); ++i) {
    if (!kg.node_ids_.emplace(kg.nodes_[i].id, i).second) {
      throw GraphError(GraphError::Kind::DuplicateId, "duplicate node id '" + kg.nodes_[i].id + "'");
    }
  }

  kg.edges_.reserve(edges_it->size());
  for (std::size_t i = 0; i < edges_it->size(); ++i) {
    const json& je = (*edges_it)[i];
    const std::string where = "edges[" + std::to_string(i) + "]";
    if (!je.is_object()) malformed(where + " must be an object");
    Edge edge;
    edge.id = require_string(je, "id", where);
    edge.source = require_string(je, "source", where);
    edge.target = require_string(je, "target", where);
    edge.relation = require_string(je, "relation", where);
    for (const std::string* endpoint : {&edge.source, &edge.target}) {
      if (!kg.node_ids_.contains(*endpoint)) {
        throw GraphError(GraphError::Kind::DanglingEndpoint,
                         "edge '" + edge.id + "' references missing node id '" + *endpoint + "'");
      }
    }
    if (edge.source == edge.target && !options.allow_self_loops) {
      throw GraphError(GraphError::Kind::SelfLoop,
                       "edge '" + edge.id + "' is a self-loop on '" + edge.source + "'");
    }
    if (const auto attrs = je.find("attributes"); attrs != je.end() && !attrs->is_null()) {
      if (!attrs->is_object()) malformed(where + ".attributes must be an object");
      for (const auto& [name, value] : attrs->items()) {
        RawValue raw = read_raw(value, where + "." + name);
        edge.attributes.emplace(name, raw.json_number ? AttributeValue::numeric(raw.number, raw.unit)
                                                      : AttributeValue::of_text(raw.text));
      }
    }
    kg.edges_.push_back(std::move(edge));
  }
  std::sort(kg.edges_.begin(), kg.edges_.end(),
            [](const Edge& a, const Edge& b) { return a.id < b.id; });
  kg.incidence_.assign(kg.nodes_.size(), {});
  for (std::size_t i = 0; i < kg.edges_.size(); ++i) {
    if (!kg.edge_ids_.emplace(kg.edges_[i].id, i).second) {
      throw GraphError(GraphError::Kind::DuplicateId, "duplicate edge id '" + kg.edges_[i].id + "'");
    }
    const auto s = kg.node_ids_.at(kg.edges_[i].source);
    const auto t = kg.node_ids_.at(kg.edges_[i].target);
    kg.incidence_[s].push_back(i);
    if (t != s) kg.incidence_[t].push_back(i);
  }
  return kg;
}

json KnowledgeGraph::to_json() const {
  json kinds = json::object();
  for (const auto& [key, kind] : attribute_index_) {
    kinds[key.first + "." + key.second] = std::string(ckg::to_string(kind));
  }
  json meta = {{"name", name_}, {"attribute_kinds", kinds}};
  if (!aliases_.empty()) meta["aliases"] = aliases_;

  json nodes = json::array();
  for (const auto& n : nodes_) {
    json attrs = json::object();
    for (const auto& [k, v] : n.attributes) attrs[k] = write_value(v);
    nodes.push_back({{"id", n.id}, {"type", n.type}, {"label", n.label}, {"attributes", attrs}});
  }
  json edges = json::array();
  for (const auto& e : edges_) {
    json attrs = json::object();
    for (const auto& [k, v] : e.attributes) attrs[k] = write_value(v);
    edges.push_back({{"id", e.id},
                     {"source", e.source},
                     {"target", e.target},
                     {"relation", e.relation},
                     {"attributes", attrs}});
  }
  return {{"meta", meta}, {"nodes", nodes}, {"edges", edges}};
}

std::optional<std::size_t> KnowledgeGraph::node_index(std::string_view id) const {
  const auto it = node_ids_.find(std::string(id));
  if (it == node_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> KnowledgeGraph::edge_index(std::string_view id) const {
  const auto it = edge_ids_.find(std::string(id));
  if (it == edge_ids_.end()) return std::nullopt;
  return it->second;
}

const Node* KnowledgeGraph::find_node(std::string_view id) const {
  const auto idx = node_index(id);
  return idx ? &nodes_[*idx] : nullptr;
}

const Edge* KnowledgeGraph::find_edge(std::string_view id) const {
  const auto idx = edge_index(id);
  return idx ? &edges_[*idx] : nullptr;
}

std::optional<AttributeKind> KnowledgeGraph::attribute_kind(std::string_view type,
                                                            std::string_view attribute) const {
  const auto it = attribute_index_.find({std::string(type), std::string(attribute)});
  if (it == attribute_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t KnowledgeGraph::count_of_type(std::string_view type) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.type == type; }));
}

KnowledgeGraph load_graph(std::string_view document_text, const LoadOptions& options) {
  json doc;
  try {
    doc = json::parse(document_text);
  } catch (const json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  return KnowledgeGraph::from_json(doc, options);
}

KnowledgeGraph load_graph_file(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) malformed("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_graph(ss.str(), options);
}

std::string serialize_graph(const KnowledgeGraph& kg) { return kg.to_json().dump(); }

// ---------------------------------------------------------------------------
// Ontology

bool Ontology::has_type(std::string_view type) const {
  return std::binary_search(types.begin(), types.end(), type, std::less<>{});
}

bool Ontology::has_relation(std::string_view relation) const {
  return std::any_of(relations.begin(), relations.end(),
                     [&](const Relation& r) { return r.name == relation; });
}

bool Ontology::adjacent(std::string_view a, std::string_view b) const {
  if (a == b) return false;
  return std::any_of(relations.begin(), relations.end(), [&](const Relation& r) {
    return (r.source_type == a && r.target_type == b) || (r.source_type == b && r.target_type == a);
  });
}

const AttributeSchema* Ontology::attribute(std::string_view type, std::string_view name) const {
  const auto it = attributes.find(std::string(type));
  if (it == attributes.end()) return nullptr;
  for (const auto& a : it->second) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::vector<std::string> Ontology::neighbors(std::string_view type) const {
  std::set<std::string> out;
  for (const auto& r : relations) {
    if (r.source_type == type && r.target_type != type) out.insert(r.target_type);
    if (r.target_type == type && r.source_type != type) out.insert(r.source_type);
  }
  return {out.begin(), out.end()};
}

json Ontology::to_json() const {
  json rels = json::array();
  for (const auto& r : relations) {
    rels.push_back({{"source", r.source_type}, {"target", r.target_type}, {"relation", r.name}});
  }
  json attrs = json::object();
  for (const auto& [type, list] : attributes) {
    json a = json::array();
    for (const auto& s : list) {
      a.push_back({{"name", s.name}, {"kind", std::string(to_string(s.kind))}, {"aliases", s.aliases}});
    }
    attrs[type] = a;
  }
  return {{"types", types},
          {"relations", rels},
          {"attributes", attrs},
          {"type_aliases", type_aliases},
          {"edge_attributes", edge_attribute_values},
          {"connected", connected}};
}

Ontology make_ontology(std::vector<std::string> types, std::vector<Relation> relations) {
  Ontology o;
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  std::sort(relations.begin(), relations.end());
  relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
  o.types = std::move(types);
  o.relations = std::move(relations);
  if (!o.types.empty()) {
    std::set<std::string> seen{o.types.front()};
    std::deque<std::string> queue{o.types.front()};
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      for (const auto& n : o.neighbors(cur)) {
        if (seen.insert(n).second) queue.push_back(n);
      }
    }
    o.connected = seen.size() == o.types.size();
  }
  return o;
}

Ontology derive_ontology(const KnowledgeGraph& kg) {
  std::vector<std::string> types;
  for (const auto& n : kg.nodes()) types.push_back(n.type);
  std::vector<Relation> relations;
  for (const auto& e : kg.edges()) {
    relations.push_back({kg.find_node(e.source)->type, kg.find_node(e.target)->type, e.relation});
  }
  Ontology o = make_ontology(std::move(types), std::move(relations));

  for (const auto& [key, kind] : kg.attribute_index()) {
    if (!o.has_type(key.first)) continue;
    AttributeSchema schema{key.second, kind, {}};
    if (const auto a = kg.aliases().find(key.first + "." + key.second); a != kg.aliases().end()) {
      schema.aliases = a->second;
    }
    o.attributes[key.first].push_back(std::move(schema));
  }
  for (const auto& [key, list] : kg.aliases()) {
    if (key.find('.') == std::string::npos && o.has_type(key)) o.type_aliases[key] = list;
  }

  constexpr std::size_t kMaxDistinctValues = 20;
  std::map<std::string, std::map<std::string, std::set<std::string>>> values;
  std::set<std::pair<std::string, std::string>> high_cardinality;
  for (const auto& e : kg.edges()) {
    auto& per_relation = values[e.relation];
    for (const auto& [name, v] : e.attributes) {
      auto& set = per_relation[name];
      if (v.kind == AttributeKind::Text && !high_cardinality.contains({e.relation, name})) {
        set.insert(v.text);
        if (set.size() > kMaxDistinctValues) {
          high_cardinality.insert({e.relation, name});
          set.clear();
        }
      }
    }
  }
  for (auto& [relation, attrs] : values) {
    auto& out = o.edge_attribute_values[relation];
    for (auto& [name, set] : attrs) out[name] = {set.begin(), set.end()};
  }
  return o;
}

// ---------------------------------------------------------------------------
// Distances

DistanceMatrix::DistanceMatrix(std::vector<std::string> order, std::vector<double> values)
    : order_(std::move(order)), d_(std::move(values)) {}

std::optional<std::size_t> DistanceMatrix::index_of(std::string_view type) const {
  const auto it = std::find(order_.begin(), order_.end(), type);
  if (it == order_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - order_.begin());
}

double DistanceMatrix::at(std::string_view a, std::string_view b) const {
  const auto i = index_of(a);
  const auto j = index_of(b);
  if (!i || !j) throw NotFoundError("unknown type in distance lookup");
  return at(*i, *j);
}

DistanceMatrix distance_matrix(const Ontology& ontology) {
  const auto& order = ontology.types;
  const std::size_t n = order.size();
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(order[i], i);
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& r : ontology.relations) {
    const auto s = index.find(r.source_type);
    const auto t = index.find(r.target_type);
    if (s == index.end() || t == index.end() || s->second == t->second) continue;
    adj[s->second].push_back(t->second);
    adj[t->second].push_back(s->second);
  }

  constexpr int kUnreached = -1;
  std::vector<int> hops(n * n, kUnreached);
  int max_finite = 0;
  for (std::size_t src = 0; src < n; ++src) {
    hops[src * n + src] = 0;
    std::deque<std::size_t> queue{src};
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      for (const auto v : adj[u]) {
        if (hops[src * n + v] == kUnreached) {
          hops[src * n + v] = hops[src * n + u] + 1;
          max_finite = std::max(max_finite, hops[src * n + v]);
          queue.push_back(v);
        }
      }
    }
  }
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    d[i] = hops[i] == kUnreached ? static_cast<double>(max_finite + 1) : static_cast<double>(hops[i]);
  }
  return DistanceMatrix(order, std::move(d));
}

// ---------------------------------------------------------------------------
// Retrieval

bool value_matches(const AttributeValue& value, std::string_view wanted) {
  const auto w = text::trim(wanted);
  if (value.kind == AttributeKind::Numeric) {
    std::string digits;
    for (char c : w) {
      if (c != ',') digits.push_back(c);
    }
    const auto parsed = text::parse_number(digits);
    if (!parsed) return false;
    return std::abs(*parsed - value.number) <= 1e-9 * std::max(1.0, std::abs(value.number));
  }
  return text::iequals(text::trim(value.text), w);
}

InterestSubgraph query_instances(const KnowledgeGraph& kg, const UserPreference& pref) {
  InterestSubgraph out;
  out.interest_type = pref.interest_type;
  const std::set<std::string, std::less<>> wanted(pref.connected_types.begin(),
                                                  pref.connected_types.end());
  std::set<std::string> connected;
  std::set<std::string> edges;
  const auto nodes = kg.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& node = nodes[i];
    if (node.type != pref.interest_type) continue;
    out.interest.push_back(node.id);
    if (const auto a = node.attributes.find(pref.attribute);
        a != node.attributes.end() && value_matches(a->second, pref.attribute_value)) {
      out.answers.insert(node.id);
    }
    auto& linked = out.links[node.id];
    for (const auto e : kg.incident_edges(i)) {
      const Edge& edge = kg.edges()[e];
      const std::string& other = edge.source == node.id ? edge.target : edge.source;
      const Node* on = kg.find_node(other);
      if (on->type == pref.interest_type || !wanted.contains(on->type)) continue;
      connected.insert(other);
      edges.insert(edge.id);
      linked.push_back(other);
    }
    std::sort(linked.begin(), linked.end());
    linked.erase(std::unique(linked.begin(), linked.end()), linked.end());
  }
  if (out.interest.empty()) {
    throw QueryError("interest type '" + pref.interest_type + "' has no instances in the graph");
  }
  out.connected.assign(connected.begin(), connected.end());
  out.edges.assign(edges.begin(), edges.end());
  return out;
}

}  // namespace ckg
