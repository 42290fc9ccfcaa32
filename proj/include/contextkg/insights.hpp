#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contextkg/kg_model.hpp"
#include "contextkg/layout.hpp"
#include "contextkg/llm_client.hpp"
#include "contextkg/user_preference.hpp"

namespace ckg {

struct DegreeStats {
  std::size_t min = 0;
  double median = 0.0;
  std::size_t max = 0;
};

struct NodeFact {
  std::string id;
  std::string label;
  std::string type;
  std::size_t degree = 0;
};

struct BridgeFact {
  std::string id;
  std::string label;
  std::string type;
  std::vector<int> clusters;  // ascending
  std::size_t degree = 0;
};

struct FeatureSummary {
  std::string interest_type;
  std::map<int, std::size_t> cluster_sizes;
  std::map<int, std::string> cluster_labels;
  std::map<std::string, DegreeStats> degree_stats;  // per node type
  std::vector<NodeFact> hubs;                       // top 5 by displayed degree, ties by id
  std::vector<BridgeFact> bridges;                  // most clusters first, then degree, then id
  std::vector<int> outlier_clusters;                // size <= max(1, 0.25 * median size)

  nlohmann::json to_json() const;
};

/// Degrees are counted on the displayed subgraph.
FeatureSummary encode_features(const ContextLayout& layout, const KnowledgeGraph& kg);

struct InsightBullet {
  std::string text;
  std::vector<std::string> refs;  // node ids or "cluster:<id>"

  friend bool operator==(const InsightBullet&, const InsightBullet&) = default;
};

struct InsightReport {
  std::vector<InsightBullet> bullets;
  bool fallback_used = false;
  std::vector<std::string> validation_log;

  nlohmann::json to_json() const;
  friend bool operator==(const InsightReport&, const InsightReport&) = default;
};

/// One bullet per feature family (sizes, hubs, bridges, degrees, outliers).
/// Node labels appear in double quotes.
InsightReport fallback_insights(const FeatureSummary& features);

/// Prompts `client` (task "generate_insights", key `question`) and falls back
/// to the deterministic renderer when the client is absent, fails, or answers
/// with no usable bullets.
InsightReport generate_insights(const FeatureSummary& features, const UserPreference& pref, const Ontology& ontology,
                                LanguageModelClient* client, const std::string& question);

/// Quoted names must equal a node label (case-insensitive); unknown names are
/// cut from the text and logged. With a layout, refs must name displayed
/// nodes or shown clusters; without one, graph nodes.
InsightReport validate_insights(InsightReport report, const KnowledgeGraph& kg, const ContextLayout* layout = nullptr);

}  // namespace ckg
