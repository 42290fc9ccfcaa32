#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "contextkg/user_preference.hpp"

namespace ckg {

enum class AttributeKind { Numeric, Text };

std::string_view to_string(AttributeKind kind);

struct AttributeValue {
  AttributeKind kind = AttributeKind::Text;
  double number = 0.0;
  std::string text;  // original text for Text values; empty for Numeric
  std::string unit;  // optional unit tag for Numeric values

  static AttributeValue numeric(double v, std::string unit = {});
  static AttributeValue of_text(std::string v);

  /// Stable textual form: shortest round-trip decimal for numbers, raw text otherwise.
  std::string canonical() const;

  friend bool operator==(const AttributeValue&, const AttributeValue&) = default;
};

using Attributes = std::map<std::string, AttributeValue, std::less<>>;

struct Node {
  std::string id;
  std::string type;
  std::string label;
  Attributes attributes;
};

struct Edge {
  std::string id;
  std::string source;
  std::string target;
  std::string relation;
  Attributes attributes;
};

struct LoadOptions {
  bool allow_self_loops = false;
};

/// Immutable, validated instance graph. Nodes and edges are kept sorted by id.
class KnowledgeGraph {
 public:
  using AttributeKey = std::pair<std::string, std::string>;  // (node type, attribute)

  KnowledgeGraph() = default;

  /// Validates and indexes a graph document (see README, "Graph document").
  static KnowledgeGraph from_json(const nlohmann::json& document, const LoadOptions& options = {});

  /// Canonical document: nodes and edges sorted by id, all attribute kinds declared.
  nlohmann::json to_json() const;

  const std::string& name() const noexcept { return name_; }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::optional<std::size_t> node_index(std::string_view id) const;
  std::optional<std::size_t> edge_index(std::string_view id) const;
  const Node* find_node(std::string_view id) const;
  const Edge* find_edge(std::string_view id) const;

  /// Indices into edges() of every edge touching the node, ascending edge id.
  std::span<const std::size_t> incident_edges(std::size_t node) const { return incidence_[node]; }

  std::optional<AttributeKind> attribute_kind(std::string_view type, std::string_view attribute) const;
  const std::map<AttributeKey, AttributeKind>& attribute_index() const noexcept { return attribute_index_; }

  /// Phrases users may write for a type ("Paper") or attribute ("Paper.year").
  const std::map<std::string, std::vector<std::string>>& aliases() const noexcept { return aliases_; }

  std::size_t count_of_type(std::string_view type) const;

 private:
  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::size_t> node_ids_;
  std::unordered_map<std::string, std::size_t> edge_ids_;
  std::vector<std::vector<std::size_t>> incidence_;
  std::map<AttributeKey, AttributeKind> attribute_index_;
  std::map<std::string, std::vector<std::string>> aliases_;
};

KnowledgeGraph load_graph(std::string_view document_text, const LoadOptions& options = {});
KnowledgeGraph load_graph_file(const std::filesystem::path& path, const LoadOptions& options = {});
std::string serialize_graph(const KnowledgeGraph& kg);

struct Relation {
  std::string source_type;
  std::string target_type;
  std::string name;

  friend auto operator<=>(const Relation&, const Relation&) = default;
};

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::Text;
  std::vector<std::string> aliases;
};

/// Schema graph: node types are vertices, relations are edges.
struct Ontology {
  std::vector<std::string> types;      // lexicographic
  std::vector<Relation> relations;     // lexicographic
  std::map<std::string, std::vector<AttributeSchema>> attributes;  // per type, by name
  std::map<std::string, std::vector<std::string>> type_aliases;
  /// relation -> edge attribute -> distinct text values (only low-cardinality text attributes)
  std::map<std::string, std::map<std::string, std::vector<std::string>>> edge_attribute_values;
  bool connected = true;

  bool empty() const noexcept { return types.empty(); }
  bool has_type(std::string_view type) const;
  bool has_relation(std::string_view relation) const;
  /// True when some relation joins the two (distinct) types in either direction.
  bool adjacent(std::string_view a, std::string_view b) const;
  const AttributeSchema* attribute(std::string_view type, std::string_view name) const;
  std::vector<std::string> neighbors(std::string_view type) const;

  nlohmann::json to_json() const;
};

/// Sorts and de-duplicates types and relations and records connectivity.
Ontology make_ontology(std::vector<std::string> types, std::vector<Relation> relations);

Ontology derive_ontology(const KnowledgeGraph& kg);

class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::vector<std::string> order, std::vector<double> values);

  std::size_t size() const noexcept { return order_.size(); }
  const std::vector<std::string>& order() const noexcept { return order_; }
  double at(std::size_t i, std::size_t j) const { return d_[i * order_.size() + j]; }
  double at(std::string_view a, std::string_view b) const;
  std::optional<std::size_t> index_of(std::string_view type) const;

 private:
  std::vector<std::string> order_;
  std::vector<double> d_;
};

/// Undirected hop distances on the type graph. Pairs in different components
/// get (largest finite distance + 1).
DistanceMatrix distance_matrix(const Ontology& ontology);

struct InterestSubgraph {
  std::string interest_type;
  std::vector<std::string> interest;   // ids, ascending
  std::vector<std::string> connected;  // ids, ascending
  std::vector<std::string> edges;      // interest<->connected edge ids, ascending
  std::set<std::string> answers;       // interest ids whose attribute matches the preferred value

  /// Interest id -> connected ids it links to (ascending).
  std::map<std::string, std::vector<std::string>> links;
};

/// True when a node attribute value equals a canonicalized preference value.
bool value_matches(const AttributeValue& value, std::string_view wanted);

InterestSubgraph query_instances(const KnowledgeGraph& kg, const UserPreference& pref);

}  // namespace ckg
