#include "contextkg/context_ops.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

#include "contextkg/error.hpp"
#include "strings.hpp"

namespace ckg {

using nlohmann::json;

json PathResult::to_json() const {
  json list = json::array();
  for (std::size_t i = 0; i < paths.size(); ++i) list.push_back({{"nodes", nodes[i]}, {"edges", paths[i]}});
  return {{"criterion", to_string(criterion)}, {"paths", list}, {"truncated", truncated}};
}

std::map<std::string, std::size_t> displayed_degrees(const ContextLayout& layout) {
  std::map<std::string, std::size_t> deg;
  for (const auto& [id, p] : layout.positions) deg[id] = 0;
  for (const auto& e : layout.edges) {
    ++deg[e.source];
    ++deg[e.target];
  }
  return deg;
}

EmphasisState apply_neighbor_context(const ContextLayout& layout, const ContextDirective& directive,
                                     const KnowledgeGraph& kg) {
  if (directive.kind != ContextKind::Neighbor) throw Error("apply_neighbor_context needs a neighbor directive");
  const std::string target = directive.target_type.value_or(layout.interest_type);
  const NeighborMetric metric = directive.metric.value_or(NeighborMetric{});
  if (metric.kind == NeighborMetric::Kind::Attribute) {
    const auto kind = kg.attribute_kind(target, metric.attribute);
    if (!kind) throw NotFoundError("type '" + target + "' has no attribute '" + metric.attribute + "'");
    if (*kind != AttributeKind::Numeric) {
      throw QueryError("attribute '" + metric.attribute + "' of '" + target + "' is not numeric");
    }
  }
  const auto degrees = displayed_degrees(layout);
  std::map<std::string, double> score;
  for (const auto& [id, type] : layout.node_type) {
    if (type != target) continue;
    double s = 0.0;
    if (metric.kind == NeighborMetric::Kind::Degree) {
      s = static_cast<double>(degrees.at(id));
    } else if (const Node* node = kg.find_node(id)) {
      const auto it = node->attributes.find(metric.attribute);
      if (it != node->attributes.end() && it->second.kind == AttributeKind::Numeric) s = it->second.number;
    }
    score[id] = std::max(0.0, s);
  }
  double s_max = 0.0;
  for (const auto& [id, s] : score) s_max = std::max(s_max, s);
  EmphasisState out = layout.emphasis;
  out.node_sizes.clear();
  for (const auto& [id, s] : score) out.node_sizes[id] = s_max > 0.0 ? 1.0 + 1.5 * s / s_max : 1.0;
  return out;
}

EmphasisState apply_edge_context(const ContextLayout& layout, const ContextDirective& directive,
                                 const KnowledgeGraph& kg) {
  if (directive.kind != ContextKind::Edge || !directive.predicate) {
    throw Error("apply_edge_context needs an edge directive with a predicate");
  }
  const EdgePredicate& pred = *directive.predicate;
  if (pred.relation) {
    const auto edges = kg.edges();
    if (std::none_of(edges.begin(), edges.end(), [&](const Edge& e) { return text::iequals(e.relation, *pred.relation); })) {
      throw NotFoundError("unknown relation '" + *pred.relation + "'");
    }
  }
  if (pred.attribute) {
    const auto edges = kg.edges();
    if (std::none_of(edges.begin(), edges.end(), [&](const Edge& e) { return e.attributes.contains(*pred.attribute); })) {
      throw NotFoundError("unknown edge attribute '" + *pred.attribute + "'");
    }
  }

  EmphasisState out = layout.emphasis;
  out.highlighted_edges.clear();
  out.bundles.clear();
  std::map<std::pair<int, std::string>, std::vector<std::string>> groups;
  for (const auto& d : layout.edges) {
    const Edge* e = kg.find_edge(d.id);
    if (!e) continue;
    if (pred.relation && !text::iequals(e->relation, *pred.relation)) continue;
    if (pred.attribute) {
      const auto it = e->attributes.find(*pred.attribute);
      if (it == e->attributes.end()) continue;
      if (pred.value && !value_matches(it->second, *pred.value)) continue;
    } else if (pred.value) {
      const bool any = std::any_of(e->attributes.begin(), e->attributes.end(),
                                   [&](const auto& kv) { return value_matches(kv.second, *pred.value); });
      if (!any) continue;
    }
    out.highlighted_edges.insert(e->id);
    const auto cs = layout.cluster_of.find(e->source);
    const auto ct = layout.cluster_of.find(e->target);
    if (cs != layout.cluster_of.end() && ct == layout.cluster_of.end()) {
      groups[{cs->second, e->target}].push_back(e->id);
    } else if (ct != layout.cluster_of.end() && cs == layout.cluster_of.end()) {
      groups[{ct->second, e->source}].push_back(e->id);
    }
  }
  for (auto& [key, edges] : groups) {
    if (edges.size() < 2) continue;
    std::sort(edges.begin(), edges.end());
    Bundle b;
    b.id = "c" + std::to_string(key.first) + ":" + key.second;
    b.cluster = key.first;
    b.connected = key.second;
    b.anchor = layout.centroids.count(key.first) ? layout.centroids.at(key.first) : Point{};
    b.edges = std::move(edges);
    out.bundles.push_back(std::move(b));
  }
  return out;
}

namespace {

struct Step {
  std::size_t to;
  std::size_t edge;
};

// Adjacency sorted by (neighbour id, edge id); both are sorted-by-id indices.
std::vector<std::vector<Step>> adjacency(const KnowledgeGraph& kg, const std::string* relation = nullptr) {
  const auto nodes = kg.nodes();
  const auto edges = kg.edges();
  std::vector<std::vector<Step>> adj(nodes.size());
  for (std::size_t ei = 0; ei < edges.size(); ++ei) {
    const Edge& e = edges[ei];
    if (e.source == e.target) continue;
    if (relation && e.relation != *relation) continue;
    const auto s = *kg.node_index(e.source);
    const auto t = *kg.node_index(e.target);
    adj[s].push_back({t, ei});
    adj[t].push_back({s, ei});
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end(),
              [](const Step& a, const Step& b) { return a.to != b.to ? a.to < b.to : a.edge < b.edge; });
  }
  return adj;
}

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

std::vector<std::size_t> bfs(const std::vector<std::vector<Step>>& adj, std::size_t from,
                             const std::vector<bool>* removed = nullptr) {
  std::vector<std::size_t> dist(adj.size(), kUnreached);
  std::deque<std::size_t> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (const auto& s : adj[u]) {
      if (removed && (*removed)[s.edge]) continue;
      if (dist[s.to] == kUnreached) {
        dist[s.to] = dist[u] + 1;
        queue.push_back(s.to);
      }
    }
  }
  return dist;
}

struct RawPath {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> edges;
};

// Shortest paths in lexicographic order, stopping after `limit`.
std::vector<RawPath> shortest_paths(const std::vector<std::vector<Step>>& adj, std::size_t s, std::size_t t,
                                    std::size_t limit, const std::vector<bool>* removed = nullptr) {
  std::vector<RawPath> out;
  const auto ds = bfs(adj, s, removed);
  if (ds[t] == kUnreached) return out;
  const auto dt = bfs(adj, t, removed);
  const std::size_t D = ds[t];
  RawPath current{{s}, {}};
  auto dfs = [&](auto&& self, std::size_t u) -> void {
    if (out.size() >= limit) return;
    if (u == t) {
      out.push_back(current);
      return;
    }
    for (const auto& step : adj[u]) {
      if (removed && (*removed)[step.edge]) continue;
      if (ds[step.to] != ds[u] + 1 || dt[step.to] == kUnreached || ds[step.to] + dt[step.to] != D) continue;
      current.nodes.push_back(step.to);
      current.edges.push_back(step.edge);
      self(self, step.to);
      current.nodes.pop_back();
      current.edges.pop_back();
      if (out.size() >= limit) return;
    }
  };
  dfs(dfs, s);
  return out;
}

bool path_less(const KnowledgeGraph& kg, const RawPath& a, const RawPath& b) {
  if (a.edges.size() != b.edges.size()) return a.edges.size() < b.edges.size();
  // Node and edge indices follow id order, so index comparison is id comparison.
  if (a.nodes != b.nodes) return a.nodes < b.nodes;
  (void)kg;
  return a.edges < b.edges;
}

}  // namespace

PathResult find_paths(const KnowledgeGraph& kg, const std::string& source, const std::string& target,
                      PathCriterion criterion, const PathCaps& caps) {
  const auto si = kg.node_index(source);
  const auto ti = kg.node_index(target);
  if (!si) throw NotFoundError("unknown node '" + source + "'");
  if (!ti) throw NotFoundError("unknown node '" + target + "'");
  if (*si == *ti) throw QueryError("path source and target are the same node '" + source + "'");

  PathResult result;
  result.criterion = criterion;
  std::vector<RawPath> raw;
  const std::size_t limit = caps.max_paths + 1;

  switch (criterion) {
    case PathCriterion::Shortest: {
      raw = shortest_paths(adjacency(kg), *si, *ti, limit);
      break;
    }
    case PathCriterion::Homogeneous: {
      std::set<std::string> relations;
      for (const auto& e : kg.edges()) relations.insert(e.relation);
      struct PerRelation {
        std::vector<std::vector<Step>> adj;
        std::vector<std::size_t> dt;
      };
      std::vector<PerRelation> per;
      for (const auto& r : relations) {
        auto adj = adjacency(kg, &r);
        auto dt = bfs(adj, *ti);
        if (dt[*si] != kUnreached && dt[*si] <= caps.max_depth) per.push_back({std::move(adj), std::move(dt)});
      }
      std::size_t budget = 2'000'000;  // node expansions before the search gives up
      for (std::size_t L = 1; L <= caps.max_depth && raw.size() < limit && budget > 0; ++L) {
        std::vector<RawPath> level;
        for (const auto& rel : per) {
          std::vector<bool> on_path(rel.adj.size(), false);
          RawPath current{{*si}, {}};
          on_path[*si] = true;
          std::size_t found = 0;
          auto dfs = [&](auto&& self, std::size_t u) -> void {
            if (found >= limit || budget == 0) return;
            --budget;
            if (current.edges.size() == L) {
              if (u == *ti) {
                level.push_back(current);
                ++found;
              }
              return;
            }
            if (u == *ti) return;
            for (const auto& step : rel.adj[u]) {
              if (on_path[step.to] || rel.dt[step.to] == kUnreached) continue;
              if (current.edges.size() + 1 + rel.dt[step.to] > L) continue;
              on_path[step.to] = true;
              current.nodes.push_back(step.to);
              current.edges.push_back(step.edge);
              self(self, step.to);
              current.nodes.pop_back();
              current.edges.pop_back();
              on_path[step.to] = false;
              if (found >= limit || budget == 0) return;
            }
          };
          dfs(dfs, *si);
        }
        std::sort(level.begin(), level.end(), [&](const RawPath& a, const RawPath& b) { return path_less(kg, a, b); });
        for (auto& p : level) raw.push_back(std::move(p));
      }
      if (budget == 0) result.truncated = true;
      break;
    }
    case PathCriterion::Disjoint: {
      const auto adj = adjacency(kg);
      std::vector<bool> removed(kg.edges().size(), false);
      while (raw.size() < limit) {
        auto first = shortest_paths(adj, *si, *ti, 1, &removed);
        if (first.empty()) break;
        for (auto e : first.front().edges) removed[e] = true;
        raw.push_back(std::move(first.front()));
      }
      break;
    }
  }

  std::stable_sort(raw.begin(), raw.end(), [&](const RawPath& a, const RawPath& b) { return path_less(kg, a, b); });
  if (raw.size() > caps.max_paths) {
    raw.resize(caps.max_paths);
    result.truncated = true;
  }
  for (const auto& p : raw) {
    std::vector<std::string> nodes, edges;
    for (auto n : p.nodes) nodes.push_back(kg.nodes()[n].id);
    for (auto e : p.edges) edges.push_back(kg.edges()[e].id);
    result.nodes.push_back(std::move(nodes));
    result.paths.push_back(std::move(edges));
  }
  return result;
}

std::string resolve_displayed_node(const ContextLayout& layout, const std::string& reference) {
  const std::string ref(text::trim(reference));
  if (layout.displays(ref)) return ref;
  for (const auto& [id, label] : layout.labels) {
    if (text::iequals(label, ref) || text::iequals(id, ref)) return id;
  }
  throw NotFoundError("node '" + ref + "' is not in the current view");
}

PathResult apply_path_context(ContextLayout& layout, const ContextDirective& directive, const KnowledgeGraph& kg,
                              const PathCaps& caps) {
  if (directive.kind != ContextKind::Path || !directive.path_source || !directive.path_target) {
    throw Error("apply_path_context needs a path directive with source and target");
  }
  const std::string source = resolve_displayed_node(layout, *directive.path_source);
  const std::string target = resolve_displayed_node(layout, *directive.path_target);
  PathResult result = find_paths(kg, source, target, directive.criterion.value_or(PathCriterion::Shortest), caps);
  std::vector<std::string> missing;
  for (const auto& nodes : result.nodes) {
    for (const auto& n : nodes) {
      if (!layout.displays(n)) missing.push_back(n);
    }
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  inject_nodes(layout, kg, missing);
  layout.emphasis.paths.clear();
  for (std::size_t i = 0; i < result.paths.size(); ++i) {
    layout.emphasis.paths.push_back({result.criterion, result.nodes[i], result.paths[i]});
  }
  layout.emphasis.paths_truncated = result.truncated;
  return result;
}

void apply_directive(ContextLayout& layout, const ContextDirective& directive, const KnowledgeGraph& kg) {
  switch (directive.kind) {
    case ContextKind::Neighbor:
      layout.emphasis = apply_neighbor_context(layout, directive, kg);
      break;
    case ContextKind::Edge:
      layout.emphasis = apply_edge_context(layout, directive, kg);
      break;
    case ContextKind::Path:
      apply_path_context(layout, directive, kg);
      break;
  }
}

void expand_bundle(ContextLayout& layout, const std::string& bundle_id) {
  for (auto& b : layout.emphasis.bundles) {
    if (b.id == bundle_id) {
      b.expanded = true;
      return;
    }
  }
  throw NotFoundError("unknown bundle '" + bundle_id + "'");
}

}  // namespace ckg
