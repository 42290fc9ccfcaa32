#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "contextkg/kg_model.hpp"
#include "contextkg/llm_client.hpp"

namespace ckg {

enum class ClusterKind { Numeric, Text };

std::string_view to_string(ClusterKind kind);

struct Cluster {
  int id = 0;
  std::vector<std::string> members;  // ascending id
  std::string label;
  std::vector<double> centroid;      // 1-D mean for numeric clusters, embedding centroid for text

  // Attribute data parallel to `members`; only the one matching the set kind is filled.
  std::vector<double> values;
  std::vector<std::string> texts;
};

/// Clusters partition the clustered nodes and are stored in display order;
/// `id` equals the position in `clusters`.
struct ClusterSet {
  std::vector<Cluster> clusters;
  std::string attribute;
  ClusterKind kind = ClusterKind::Numeric;

  std::size_t node_count() const;
  std::optional<int> cluster_of(std::string_view node_id) const;
  nlohmann::json to_json() const;
};

struct DbscanOptions {
  double eps = 0.05;  // on min-max normalized values
  int min_pts = 2;    // neighbourhood size including the point itself
};

/// DBSCAN on min-max normalized values. Noise points become singleton
/// clusters; clusters are ordered by ascending mean (ties: smallest member id).
ClusterSet cluster_numeric(std::vector<std::pair<std::string, double>> values, const DbscanOptions& options = {});

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  /// Must be deterministic and safe to call concurrently.
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const = 0;
};

/// Offline default: L2-normalized hashed term frequencies (FNV-1a buckets).
class HashedTermEmbedder final : public EmbeddingProvider {
 public:
  explicit HashedTermEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}
  std::size_t dimension() const override { return dimension_; }
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override;

 private:
  std::size_t dimension_;
};

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centroids;
  double wcss = 0.0;
  int iterations = 0;
};

struct KMeansOptions {
  std::uint64_t seed = 42;
  int max_iterations = 100;
  double tolerance = 1e-4;  // relative inertia change
  int restarts = 4;         // best WCSS wins
};

/// Lloyd iterations from k-means++ seeding. Empty clusters keep their previous centroid.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, const KMeansOptions& options = {});

double wcss(const std::vector<std::vector<double>>& points, const std::vector<int>& assignment);

/// Index of the elbow in a WCSS curve where wcss[i] belongs to k = i + 1:
/// the k maximizing wcss(k-1) - 2 wcss(k) + wcss(k+1), ties toward smaller k.
/// Curves shorter than three entries return 1.
int elbow_k(const std::vector<double>& wcss_by_k);

/// Evaluates k = 1..min(k_max, n-1) (plus one extra point so the last
/// candidate has a right neighbour; WCSS(n) = 0) and returns the elbow.
int select_k_wcss(const std::vector<std::vector<double>>& points, int k_max, const KMeansOptions& options = {});

struct TextClusterOptions {
  int k_max = 8;
  KMeansOptions kmeans;
};

/// K-means over embeddings with k from the WCSS elbow. Identical embeddings
/// collapse to one cluster; two distinct texts give two clusters. Clusters are
/// ordered by greedy nearest-neighbour seriation of their centroids.
ClusterSet cluster_text(std::vector<std::pair<std::string, std::string>> texts, const EmbeddingProvider& embedder,
                        const TextClusterOptions& options = {});

/// Numeric: mean at the attribute's observed precision. Text: a topic of at
/// most four words from `client`, else the three most frequent non-stopword
/// terms joined by "/" (ties alphabetical).
ClusterSet label_clusters(ClusterSet set, LanguageModelClient* client = nullptr);

/// Groups the interest nodes of `subgraph` by `attribute`. Nodes lacking the
/// attribute form a trailing "n/a" cluster.
ClusterSet cluster_interest_nodes(const KnowledgeGraph& kg, const std::vector<std::string>& interest,
                                  const std::string& attribute, const EmbeddingProvider& embedder,
                                  const DbscanOptions& dbscan = {}, const TextClusterOptions& text = {});

}  // namespace ckg
