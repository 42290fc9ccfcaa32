#pragma once

// Fixture loading, synthetic graph generators and independent oracles shared
// by the unit and acceptance tests. Nothing here calls into the library's
// algorithms; the oracles are deliberately naive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contextkg/geometry.hpp"
#include "contextkg/kg_model.hpp"

namespace testing {

using nlohmann::json;

inline std::filesystem::path fixture_dir() { return CONTEXTKG_FIXTURE_DIR; }

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  return json::parse(in);
}

inline json fixture(const std::string& name) { return read_json(fixture_dir() / name); }

inline ckg::KnowledgeGraph load_fixture(const std::string& name) {
  return ckg::KnowledgeGraph::from_json(fixture(name + ".json"));
}

/// Star-shaped schema: T0 is the interest type, T1..Tk hang off it. T0 nodes
/// carry a numeric "score" and a text "tag"; every other node links to 1-3 T0 nodes.
inline json star_graph_document(std::uint64_t seed, int interest_nodes, int other_types, int nodes_per_type) {
  std::mt19937_64 rng(seed);
  json nodes = json::array(), edges = json::array();
  const char* tags[] = {"alpha", "beta", "gamma", "delta"};
  for (int i = 0; i < interest_nodes; ++i) {
    const int score = static_cast<int>(rng() % 6) * 10 + static_cast<int>(rng() % 3);
    nodes.push_back({{"id", "t0:" + std::to_string(1000 + i)},
                     {"type", "T0"},
                     {"label", "Item " + std::to_string(i)},
                     {"attributes", {{"score", score}, {"tag", tags[rng() % 4]}}}});
  }
  int e = 0;
  for (int t = 1; t <= other_types; ++t) {
    for (int i = 0; i < nodes_per_type; ++i) {
      const std::string id = "t" + std::to_string(t) + ":" + std::to_string(1000 + i);
      nodes.push_back({{"id", id}, {"type", "T" + std::to_string(t)}, {"label", "Thing " + std::to_string(t) + "-" + std::to_string(i)},
                       {"attributes", {{"weight", static_cast<int>(rng() % 50)}}}});
      std::set<int> picked;
      const int links = 1 + static_cast<int>(rng() % 3);
      while (static_cast<int>(picked.size()) < std::min(links, interest_nodes)) picked.insert(rng() % interest_nodes);
      for (int k : picked) {
        edges.push_back({{"id", "e" + std::to_string(100000 + e++)},
                         {"source", "t0:" + std::to_string(1000 + k)},
                         {"target", id},
                         {"relation", "rel" + std::to_string(t)},
                         {"attributes", json::object()}});
      }
    }
  }
  return {{"meta", {{"name", "star" + std::to_string(seed)}}}, {"nodes", nodes}, {"edges", edges}};
}

/// Random simple undirected graph on n nodes, one type, edge probability p.
inline json random_graph_document(std::uint64_t seed, int n, double p) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  json nodes = json::array(), edges = json::array();
  for (int i = 0; i < n; ++i) {
    nodes.push_back({{"id", "v" + std::to_string(100 + i)}, {"type", i % 3 == 0 ? "A" : "B"},
                     {"label", "V" + std::to_string(i)}, {"attributes", json::object()}});
  }
  int e = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < p) {
        edges.push_back({{"id", "e" + std::to_string(10000 + e++)}, {"source", "v" + std::to_string(100 + i)},
                         {"target", "v" + std::to_string(100 + j)}, {"relation", "link"},
                         {"attributes", json::object()}});
      }
    }
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

// ---- graph oracles ----

/// Undirected adjacency over node ids with edge ids.
struct Adjacency {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> out;  // node -> (neighbor, edge)
};

inline Adjacency adjacency(const ckg::KnowledgeGraph& kg) {
  Adjacency a;
  for (const auto& n : kg.nodes()) a.out[n.id];
  for (const auto& e : kg.edges()) {
    a.out[e.source].push_back({e.target, e.id});
    a.out[e.target].push_back({e.source, e.id});
  }
  return a;
}

inline std::map<std::string, int> bfs_distances(const Adjacency& a, const std::string& src) {
  std::map<std::string, int> dist{{src, 0}};
  std::deque<std::string> q{src};
  while (!q.empty()) {
    auto u = q.front();
    q.pop_front();
    for (const auto& [v, e] : a.out.at(u)) {
      if (!dist.count(v)) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  return dist;
}

/// Unit-capacity max flow with undirected edges (each edge usable once, either way).
inline int edge_disjoint_max_flow(const ckg::KnowledgeGraph& kg, const std::string& s, const std::string& t) {
  std::map<std::string, int> idx;
  for (const auto& n : kg.nodes()) idx.emplace(n.id, static_cast<int>(idx.size()));
  const int n = static_cast<int>(idx.size());
  std::vector<std::vector<int>> cap(n, std::vector<int>(n, 0));
  for (const auto& e : kg.edges()) {
    cap[idx[e.source]][idx[e.target]] += 1;
    cap[idx[e.target]][idx[e.source]] += 1;
  }
  const int src = idx[s], dst = idx[t];
  int flow = 0;
  while (true) {
    std::vector<int> parent(n, -1);
    parent[src] = src;
    std::deque<int> q{src};
    while (!q.empty() && parent[dst] < 0) {
      int u = q.front();
      q.pop_front();
      for (int v = 0; v < n; ++v) {
        if (parent[v] < 0 && cap[u][v] > 0) {
          parent[v] = u;
          q.push_back(v);
        }
      }
    }
    if (parent[dst] < 0) return flow;
    for (int v = dst; v != src; v = parent[v]) {
      cap[parent[v]][v] -= 1;
      cap[v][parent[v]] += 1;
    }
    ++flow;
  }
}

// ---- geometry oracle ----

/// Ray casting, written independently of the library.
inline bool inside_polygon(ckg::Point p, const std::vector<ckg::Point>& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

// ---- statistics oracles ----

inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return saa == sbb ? 1.0 : 0.0;
  return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(average_ranks(a), average_ranks(b));
}

inline double comb2(double n) { return n * (n - 1) / 2.0; }

inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> nij;
  std::map<int, double> ai, bj;
  for (std::size_t i = 0; i < a.size(); ++i) {
    nij[{a[i], b[i]}] += 1;
    ai[a[i]] += 1;
    bj[b[i]] += 1;
  }
  double index = 0, sa = 0, sb = 0;
  for (auto& [k, v] : nij) index += comb2(v);
  for (auto& [k, v] : ai) sa += comb2(v);
  for (auto& [k, v] : bj) sb += comb2(v);
  const double expected = sa * sb / comb2(static_cast<double>(a.size()));
  const double max_index = (sa + sb) / 2.0;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

inline double normalized_mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> nij;
  std::map<int, double> ai, bj;
  for (std::size_t i = 0; i < a.size(); ++i) {
    nij[{a[i], b[i]}] += 1;
    ai[a[i]] += 1;
    bj[b[i]] += 1;
  }
  double mi = 0, ha = 0, hb = 0;
  for (auto& [k, v] : nij) mi += v / n * std::log(n * v / (ai[k.first] * bj[k.second]));
  for (auto& [k, v] : ai) ha -= v / n * std::log(v / n);
  for (auto& [k, v] : bj) hb -= v / n * std::log(v / n);
  if (ha == 0 && hb == 0) return 1.0;
  return mi / ((ha + hb) / 2.0);  // arithmetic normalization
}

inline double silhouette(const std::vector<ckg::Point>& pts, const std::vector<int>& label) {
  double total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::map<int, std::pair<double, int>> by;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      auto& s = by[label[j]];
      s.first += ckg::distance(pts[i], pts[j]);
      s.second += 1;
    }
    const auto own = by[label[i]];
    if (own.second == 0) continue;  // singleton: s = 0
    const double a = own.first / own.second;
    double b = std::numeric_limits<double>::infinity();
    for (auto& [l, s] : by) {
      if (l != label[i] && s.second > 0) b = std::min(b, s.first / s.second);
    }
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(pts.size());
}

/// Lloyd's algorithm from many random starts; best inertia wins.
inline std::vector<int> oracle_kmeans(const std::vector<ckg::Point>& pts, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int start = 0; start < 20; ++start) {
    std::vector<ckg::Point> c;
    std::vector<std::size_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int i = 0; i < k; ++i) c.push_back(pts[idx[i]]);
    std::vector<int> lab(pts.size(), 0);
    for (int it = 0; it < 100; ++it) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        double bd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
          const double d = ckg::distance(pts[i], c[j]);
          if (d < bd) bd = d, lab[i] = j;
        }
      }
      std::vector<ckg::Point> sum(k);
      std::vector<int> cnt(k, 0);
      for (std::size_t i = 0; i < pts.size(); ++i) sum[lab[i]] += pts[i], cnt[lab[i]]++;
      for (int j = 0; j < k; ++j) {
        if (cnt[j]) c[j] = sum[j] * (1.0 / cnt[j]);
      }
    }
    double inertia = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) inertia += std::pow(ckg::distance(pts[i], c[lab[i]]), 2);
    if (inertia < best_inertia) best_inertia = inertia, best = lab;
  }
  return best;
}

/// Agglomerative clustering with average linkage down to k clusters.
inline std::vector<int> oracle_average_linkage(const std::vector<ckg::Point>& pts, int k) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < pts.size(); ++i) groups.push_back({i});
  auto link = [&](const auto& a, const auto& b) {
    double s = 0;
    for (auto i : a)
      for (auto j : b) s += ckg::distance(pts[i], pts[j]);
    return s / static_cast<double>(a.size() * b.size());
  };
  while (static_cast<int>(groups.size()) > k) {
    std::size_t bi = 0, bj = 1;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < groups.size(); ++i) {
      for (std::size_t j = i + 1; j < groups.size(); ++j) {
        const double d = link(groups[i], groups[j]);
        if (d < bd) bd = d, bi = i, bj = j;
      }
    }
    groups[bi].insert(groups[bi].end(), groups[bj].begin(), groups[bj].end());
    groups.erase(groups.begin() + static_cast<long>(bj));
  }
  std::vector<int> lab(pts.size());
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (auto i : groups[g]) lab[i] = static_cast<int>(g);
  return lab;
}

/// Largest remainder written from scratch: floor of exact quotas, then the
/// biggest fractional parts (lower index on ties). No caps.
inline std::vector<int> oracle_largest_remainder(const std::vector<double>& w, int total) {
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<int> seats(w.size());
  std::vector<std::pair<double, std::size_t>> rem;
  int used = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double q = total * w[i] / sum;
    seats[i] = static_cast<int>(std::floor(q));
    used += seats[i];
    rem.push_back({q - seats[i], i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
  for (int i = 0; i < total - used; ++i) seats[rem[i].second] += 1;
  return seats;
}

inline double entropy(const std::vector<int>& counts) {
  const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
  double h = 0;
  for (int c : counts) {
    if (c > 0) h -= c / n * std::log(c / n);
  }
  return h;
}

}  // namespace testing
