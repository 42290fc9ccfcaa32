#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contextkg/clustering.hpp"
#include "contextkg/context_ops.hpp"
#include "contextkg/insights.hpp"
#include "contextkg/kg_model.hpp"
#include "contextkg/layout.hpp"
#include "contextkg/llm_client.hpp"
#include "contextkg/sampling.hpp"
#include "contextkg/user_preference.hpp"

namespace ckg {

struct EngineConfig {
  bool offline = true;  // deterministic extractors and fallbacks, no model calls
  DbscanOptions dbscan;
  TextClusterOptions text;
  int budget = 300;
  double sigma_default = 0.5;
  LayoutOptions layout;

  /// Accepts the dotted keys clustering.eps, clustering.min_pts,
  /// clustering.kmax, clustering.seed, sampling.budget, sampling.sigma_default,
  /// layout.spacing, layout.node_radius (nested objects work too).
  static EngineConfig from_json(const nlohmann::json& j);
};

struct QueryOutcome {
  std::string question;
  UserPreference preference;
  InterestSubgraph subgraph;
  ClusterSet clusters;
  SampleResult sample;
  ContextLayout layout;

  /// Displayed answer nodes, their displayed edges and the far endpoints.
  nlohmann::json answer_subgraph(const KnowledgeGraph& kg) const;
  std::vector<std::string> warnings() const;
};

/// One graph plus the configured collaborators. Stateless per call; safe to
/// share between threads.
class Engine {
 public:
  explicit Engine(std::shared_ptr<const KnowledgeGraph> kg, EngineConfig config = {},
                  std::shared_ptr<LanguageModelClient> client = nullptr,
                  std::shared_ptr<const EmbeddingProvider> embedder = nullptr);

  const KnowledgeGraph& graph() const { return *kg_; }
  const Ontology& ontology() const { return ontology_; }
  const EngineConfig& config() const { return config_; }
  bool uses_model() const { return !config_.offline && client_ != nullptr; }

  UserPreference extract(const std::string& question) const;
  ContextDirective classify(const std::string& description, const UserPreference& pref) const;

  /// Retrieve, cluster, sample and lay out for an already extracted preference.
  QueryOutcome run(const UserPreference& pref, int budget, std::uint64_t seed, std::string question = {}) const;

  QueryOutcome query(const std::string& question, std::optional<double> diversity, std::optional<int> budget,
                     std::uint64_t seed) const;

  InsightReport insights(const QueryOutcome& outcome) const;

  /// Type positions from the ontology arrangement plus distances and stress.
  nlohmann::json ontology_view() const;

 private:
  std::shared_ptr<const KnowledgeGraph> kg_;
  Ontology ontology_;
  EngineConfig config_;
  std::shared_ptr<LanguageModelClient> client_;
  std::shared_ptr<const EmbeddingProvider> embedder_;
};

}  // namespace ckg
