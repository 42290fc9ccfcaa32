#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contextkg/clustering.hpp"
#include "contextkg/user_preference.hpp"

namespace ckg {

struct SamplePlan {
  int budget = 300;
  double sigma = 0.5;
  int preferred_cluster = 0;
  std::map<int, int> quotas;  // cluster id -> nodes taken, answer nodes included
  std::uint64_t seed = 0;
};

struct SampleResult {
  std::vector<std::string> ids;  // answer nodes first, then per-cluster picks in cluster order
  std::vector<std::string> answers;
  SamplePlan plan;
  bool truncated = false;  // budget smaller than the answer count

  nlohmann::json to_json() const;
};

/// w_c = (1 - sigma) * 0.5^rank(c) + sigma * |c| / sum |c|, where rank is the
/// distance in cluster order from the preferred cluster.
std::vector<double> cluster_weights(const std::vector<std::size_t>& sizes, std::size_t preferred, double sigma);

/// Largest-remainder apportionment of `total` seats by `weights`, never
/// exceeding `caps`; seats freed by capped entries are re-apportioned among
/// the rest. Remainder ties go to the lower index.
std::vector<int> largest_remainder(const std::vector<double>& weights, int total, const std::vector<int>& caps);

/// Cluster holding the most answer nodes; without answers, the numeric cluster
/// whose mean is nearest the preferred value, else cluster 0.
int preferred_cluster(const ClusterSet& set, const UserPreference& pref);

/// `degree` maps node id -> degree in the interest subgraph (missing ids count 0).
/// Within a cluster nodes are taken by descending degree, then ascending id.
SampleResult sample_interest_nodes(const ClusterSet& set, const UserPreference& pref,
                                   const std::map<std::string, std::size_t>& degree, int budget, double sigma,
                                   std::uint64_t seed);

}  // namespace ckg
