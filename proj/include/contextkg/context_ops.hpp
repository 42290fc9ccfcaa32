#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contextkg/kg_model.hpp"
#include "contextkg/layout.hpp"
#include "contextkg/user_preference.hpp"

namespace ckg {

struct PathCaps {
  std::size_t max_paths = 10;
  std::size_t max_depth = 6;  // homogeneous search depth
};

struct PathResult {
  PathCriterion criterion = PathCriterion::Shortest;
  std::vector<std::vector<std::string>> paths;  // edge ids, source to target
  std::vector<std::vector<std::string>> nodes;  // node ids parallel to `paths`
  bool truncated = false;

  nlohmann::json to_json() const;
};

/// scale = 1 + 1.5 * s / s_max over displayed nodes of the target type, where
/// s is displayed degree or a numeric attribute (missing or negative -> 0).
/// Replaces the node-size emphasis; other emphasis is kept.
EmphasisState apply_neighbor_context(const ContextLayout& layout, const ContextDirective& directive,
                                     const KnowledgeGraph& kg);

/// Highlights displayed edges matching the predicate and bundles matches that
/// share (interest cluster, connected node) when there are at least two.
/// Replaces the edge emphasis; bundles start collapsed.
EmphasisState apply_edge_context(const ContextLayout& layout, const ContextDirective& directive,
                                 const KnowledgeGraph& kg);

/// Paths over the full graph, edges traversed in both directions. Results are
/// ordered by length, then node sequence, then edge sequence.
PathResult find_paths(const KnowledgeGraph& kg, const std::string& source, const std::string& target,
                      PathCriterion criterion, const PathCaps& caps = {});

/// Resolves a user-written node reference (id or label, case-insensitive)
/// against the displayed nodes. Throws NotFoundError.
std::string resolve_displayed_node(const ContextLayout& layout, const std::string& reference);

/// Runs the path search, injects path nodes missing from the layout and
/// replaces the path emphasis.
PathResult apply_path_context(ContextLayout& layout, const ContextDirective& directive, const KnowledgeGraph& kg,
                              const PathCaps& caps = {});

/// Dispatches on the directive kind and updates `layout.emphasis` in place.
void apply_directive(ContextLayout& layout, const ContextDirective& directive, const KnowledgeGraph& kg);

/// Marks a bundle expanded. Throws NotFoundError for unknown ids.
void expand_bundle(ContextLayout& layout, const std::string& bundle_id);

/// Degree of every displayed node within the displayed edge set.
std::map<std::string, std::size_t> displayed_degrees(const ContextLayout& layout);

}  // namespace ckg
