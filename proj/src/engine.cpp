#include "contextkg/engine.hpp"

#include <set>

#include "contextkg/error.hpp"
#include "contextkg/preference.hpp"

namespace ckg {

using nlohmann::json;

namespace {

const json* lookup(const json& j, const std::string& dotted) {
  if (const auto it = j.find(dotted); it != j.end()) return &*it;
  const json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object()) return nullptr;
    const auto it = cur->find(part);
    if (it == cur->end()) return nullptr;
    cur = &*it;
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

}  // namespace

EngineConfig EngineConfig::from_json(const json& j) {
  EngineConfig c;
  if (!j.is_object()) return c;
  if (auto v = lookup(j, "offline")) c.offline = v->get<bool>();
  if (auto v = lookup(j, "clustering.eps")) c.dbscan.eps = v->get<double>();
  if (auto v = lookup(j, "clustering.min_pts")) c.dbscan.min_pts = v->get<int>();
  if (auto v = lookup(j, "clustering.kmax")) c.text.k_max = v->get<int>();
  if (auto v = lookup(j, "clustering.seed")) c.text.kmeans.seed = v->get<std::uint64_t>();
  if (auto v = lookup(j, "sampling.budget")) c.budget = v->get<int>();
  if (auto v = lookup(j, "sampling.sigma_default")) c.sigma_default = v->get<double>();
  if (auto v = lookup(j, "layout.spacing")) c.layout.spacing = v->get<double>();
  if (auto v = lookup(j, "layout.node_radius")) c.layout.node_radius = v->get<double>();
  if (auto v = lookup(j, "layout.auto_spacing")) c.layout.auto_spacing = v->get<bool>();
  return c;
}

json QueryOutcome::answer_subgraph(const KnowledgeGraph& kg) const {
  json nodes = json::array();
  json edges = json::array();
  std::set<std::string> included;
  for (const auto& id : layout.answers) included.insert(id);
  for (const auto& e : layout.edges) {
    if (layout.answers.contains(e.source) || layout.answers.contains(e.target)) {
      edges.push_back({{"id", e.id}, {"source", e.source}, {"target", e.target}, {"relation", e.relation}});
      included.insert(e.source);
      included.insert(e.target);
    }
  }
  for (const auto& id : included) {
    const Node* n = kg.find_node(id);
    nodes.push_back({{"id", id}, {"label", n ? n->label : id}, {"type", n ? n->type : ""},
                     {"answer", layout.answers.contains(id)}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

std::vector<std::string> QueryOutcome::warnings() const {
  std::vector<std::string> out;
  if (sample.truncated) {
    out.push_back("budget " + std::to_string(sample.plan.budget) + " is smaller than the " +
                  std::to_string(sample.answers.size()) + " answer nodes; only the first " +
                  std::to_string(sample.ids.size()) + " are shown");
  }
  if (subgraph.answers.empty()) out.push_back("no node matches the preferred attribute value");
  return out;
}

Engine::Engine(std::shared_ptr<const KnowledgeGraph> kg, EngineConfig config,
               std::shared_ptr<LanguageModelClient> client, std::shared_ptr<const EmbeddingProvider> embedder)
    : kg_(std::move(kg)), config_(std::move(config)), client_(std::move(client)), embedder_(std::move(embedder)) {
  if (!kg_) throw Error("engine needs a graph");
  ontology_ = derive_ontology(*kg_);
  if (!embedder_) embedder_ = std::make_shared<HashedTermEmbedder>();
}

UserPreference Engine::extract(const std::string& question) const {
  if (uses_model()) return extract_preferences(question, ontology_, *client_);
  return extract_preferences_offline(question, ontology_);
}

ContextDirective Engine::classify(const std::string& description, const UserPreference& pref) const {
  if (uses_model()) return classify_context(description, pref, ontology_, *client_);
  return classify_context_offline(description, pref, ontology_);
}

QueryOutcome Engine::run(const UserPreference& pref, int budget, std::uint64_t seed, std::string question) const {
  QueryOutcome out;
  out.question = std::move(question);
  out.preference = normalize_preference(pref, ontology_);
  out.subgraph = query_instances(*kg_, out.preference);
  out.clusters = cluster_interest_nodes(*kg_, out.subgraph.interest, out.preference.attribute, *embedder_,
                                        config_.dbscan, config_.text);
  out.clusters = label_clusters(std::move(out.clusters), uses_model() ? client_.get() : nullptr);

  std::map<std::string, std::size_t> degree;
  for (const auto& [id, linked] : out.subgraph.links) degree[id] = linked.size();
  out.sample = sample_interest_nodes(out.clusters, out.preference, degree, budget, out.preference.diversity, seed);
  out.layout = compute_layout(*kg_, ontology_, out.subgraph, out.clusters, out.sample, config_.layout, seed);
  return out;
}

QueryOutcome Engine::query(const std::string& question, std::optional<double> diversity, std::optional<int> budget,
                           std::uint64_t seed) const {
  UserPreference pref = extract(question);
  pref.diversity = diversity.value_or(config_.sigma_default);
  return run(pref, budget.value_or(config_.budget), seed, question);
}

InsightReport Engine::insights(const QueryOutcome& outcome) const {
  const FeatureSummary features = encode_features(outcome.layout, *kg_);
  InsightReport report =
      generate_insights(features, outcome.preference, ontology_, uses_model() ? client_.get() : nullptr,
                        outcome.question);
  return validate_insights(std::move(report), *kg_, &outcome.layout);
}

json Engine::ontology_view() const {
  json out = ontology_.to_json();
  if (ontology_.empty()) return out;
  const DistanceMatrix dm = distance_matrix(ontology_);
  const auto positions = arrange_ontology(dm, config_.layout.spacing);
  json types = json::array();
  for (const auto& [t, p] : positions) {
    types.push_back({{"type", t}, {"x", std::round(p.x * 1e6) / 1e6}, {"y", std::round(p.y * 1e6) / 1e6},
                     {"count", kg_->count_of_type(t)}});
  }
  json distances = json::array();
  for (std::size_t i = 0; i < dm.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < dm.size(); ++j) row.push_back(dm.at(i, j));
    distances.push_back(row);
  }
  out["layout"] = types;
  out["order"] = dm.order();
  out["distances"] = distances;
  out["stress"] = normalized_stress(dm, positions);
  return out;
}

}  // namespace ckg
