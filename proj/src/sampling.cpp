#include "contextkg/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "contextkg/error.hpp"
#include "contextkg/kg_model.hpp"
#include "strings.hpp"

namespace ckg {

using nlohmann::json;

json SampleResult::to_json() const {
  json quotas = json::object();
  for (const auto& [c, q] : plan.quotas) quotas[std::to_string(c)] = q;
  return {{"budget", plan.budget},     {"sigma", plan.sigma},       {"preferred_cluster", plan.preferred_cluster},
          {"quotas", quotas},          {"seed", plan.seed},         {"sampled", ids.size()},
          {"answers", answers.size()}, {"truncated", truncated}};
}

std::vector<double> cluster_weights(const std::vector<std::size_t>& sizes, std::size_t preferred, double sigma) {
  const double total = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
  std::vector<double> w(sizes.size());
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const auto rank = static_cast<double>(c > preferred ? c - preferred : preferred - c);
    const double share = total > 0.0 ? static_cast<double>(sizes[c]) / total : 0.0;
    w[c] = (1.0 - sigma) * std::pow(0.5, rank) + sigma * share;
  }
  return w;
}

std::vector<int> largest_remainder(const std::vector<double>& weights, int total, const std::vector<int>& caps) {
  const std::size_t n = weights.size();
  std::vector<int> seats(n, 0);
  std::vector<bool> active(n, false);
  long capacity = 0;
  for (std::size_t i = 0; i < n; ++i) {
    active[i] = caps[i] > 0;
    capacity += std::max(0, caps[i]);
  }
  int remaining = static_cast<int>(std::min<long>(std::max(0, total), capacity));
  while (remaining > 0) {
    double W = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i]) {
        W += std::max(0.0, weights[i]);
        ++count;
      }
    }
    if (count == 0) break;
    std::vector<double> exact(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      exact[i] = W > 0.0 ? remaining * std::max(0.0, weights[i]) / W : static_cast<double>(remaining) / count;
    }
    bool capped = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && exact[i] > caps[i] + 1e-9) {
        seats[i] = caps[i];
        remaining -= caps[i];
        active[i] = false;
        capped = true;
      }
    }
    if (capped) continue;
    std::vector<std::size_t> order;
    int assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const int base = static_cast<int>(std::floor(exact[i] + 1e-9));
      seats[i] = std::min(base, caps[i]);
      assigned += seats[i];
      order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return (exact[a] - seats[a]) > (exact[b] - seats[b]) + 1e-12;
    });
    int left = remaining - assigned;
    for (std::size_t j = 0; left > 0; j = (j + 1) % order.size()) {
      if (seats[order[j]] < caps[order[j]]) {
        ++seats[order[j]];
        --left;
      }
    }
    break;
  }
  return seats;
}

namespace {

bool member_matches(const Cluster& c, std::size_t i, const std::string& wanted) {
  if (i < c.values.size()) return value_matches(AttributeValue::numeric(c.values[i]), wanted);
  if (i < c.texts.size()) return value_matches(AttributeValue::of_text(c.texts[i]), wanted);
  return false;
}

}  // namespace

int preferred_cluster(const ClusterSet& set, const UserPreference& pref) {
  int best = -1;
  std::size_t best_count = 0;
  for (const auto& c : set.clusters) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < c.members.size(); ++i) count += member_matches(c, i, pref.attribute_value);
    if (count > best_count) {
      best_count = count;
      best = c.id;
    }
  }
  if (best >= 0) return best;
  if (set.kind == ClusterKind::Numeric) {
    if (const auto v = text::parse_number(pref.attribute_value)) {
      double best_d = 0.0;
      for (const auto& c : set.clusters) {
        if (c.centroid.empty()) continue;
        const double d = std::abs(c.centroid[0] - *v);
        if (best < 0 || d < best_d) {
          best_d = d;
          best = c.id;
        }
      }
    }
  }
  return std::max(best, 0);
}

SampleResult sample_interest_nodes(const ClusterSet& set, const UserPreference& pref,
                                   const std::map<std::string, std::size_t>& degree, int budget, double sigma,
                                   std::uint64_t seed) {
  if (budget < 1) throw Error("sampling budget must be at least 1");
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw Error("diversity must lie in [0, 1]");
  if (set.clusters.empty()) throw Error("cannot sample from an empty cluster set");

  auto deg = [&](const std::string& id) {
    const auto it = degree.find(id);
    return it == degree.end() ? std::size_t{0} : it->second;
  };
  auto by_degree = [&](const std::string& a, const std::string& b) {
    const auto da = deg(a), db = deg(b);
    return da != db ? da > db : a < b;
  };

  SampleResult out;
  out.plan.budget = budget;
  out.plan.sigma = sigma;
  out.plan.seed = seed;
  out.plan.preferred_cluster = preferred_cluster(set, pref);

  const std::size_t k = set.clusters.size();
  std::vector<std::vector<std::string>> answers(k), others(k);
  std::vector<std::size_t> sizes(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& cluster = set.clusters[c];
    sizes[c] = cluster.members.size();
    for (std::size_t i = 0; i < cluster.members.size(); ++i) {
      (member_matches(cluster, i, pref.attribute_value) ? answers[c] : others[c]).push_back(cluster.members[i]);
    }
    std::sort(others[c].begin(), others[c].end(), by_degree);
  }
  for (const auto& a : answers) out.answers.insert(out.answers.end(), a.begin(), a.end());
  std::sort(out.answers.begin(), out.answers.end(), by_degree);

  if (static_cast<std::size_t>(budget) < out.answers.size()) {
    out.truncated = true;
    out.ids.assign(out.answers.begin(), out.answers.begin() + budget);
    for (const auto& id : out.ids) ++out.plan.quotas[*set.cluster_of(id)];
    return out;
  }

  out.ids = out.answers;
  const int remaining = budget - static_cast<int>(out.answers.size());
  std::vector<int> caps(k);
  for (std::size_t c = 0; c < k; ++c) caps[c] = static_cast<int>(others[c].size());
  const auto extra = largest_remainder(
      cluster_weights(sizes, static_cast<std::size_t>(out.plan.preferred_cluster), sigma), remaining, caps);
  for (std::size_t c = 0; c < k; ++c) {
    const int quota = static_cast<int>(answers[c].size()) + extra[c];
    if (quota > 0) out.plan.quotas[set.clusters[c].id] = quota;
    out.ids.insert(out.ids.end(), others[c].begin(), others[c].begin() + extra[c]);
  }
  return out;
}

}  // namespace ckg
