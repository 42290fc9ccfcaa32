#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "contextkg/clustering.hpp"
#include "contextkg/geometry.hpp"
#include "contextkg/kg_model.hpp"
#include "contextkg/sampling.hpp"
#include "contextkg/user_preference.hpp"

namespace ckg {

struct TypeRegion {
  std::string type;
  Point center;
  double radius = 0.0;
};

/// Temperatures are expressed as a fraction of the active region's diameter:
/// t0 = 1/8 corresponds to "(2R)^2 / 8" in squared layout units, and the
/// displacement cap of an iteration is t * 2R.
struct AnnealSchedule {
  double t0 = 1.0 / 8.0;
  double decay = 0.94;
  int main_iterations = 100;
  int connected_iterations = 80;
  double connected_t_scale = 1.0 / 5.0;
  int overlap_iterations_max = 10;
};

/// Stress majorization of the type graph with weights 1/(spacing*d)^2,
/// started from a circle in `dm.order()`; centroid at the origin.
std::map<std::string, Point> arrange_ontology(const DistanceMatrix& dm, double spacing);

/// Scale-adjusted normalized stress: min over a of sum w (a*E - d)^2 / sum w d^2, w = 1/d^2.
double normalized_stress(const DistanceMatrix& dm, const std::map<std::string, Point>& positions);

/// Radius min(0.4 * min center distance, base * sqrt(count)), base chosen so
/// the largest count gets the full cap. A single type gets radius `spacing`.
std::vector<TypeRegion> partition_regions(const std::map<std::string, Point>& positions,
                                          const std::map<std::string, std::size_t>& counts, double spacing);

struct ArcPlacement {
  std::map<int, Point> centroids;
  double slot_radius = 0.0;  // disc each cluster's nodes are confined to
};

/// Places clusters in the given order counter-clockwise along a half circle
/// of radius 0.7R. The arc's open side faces `facing` (the nearest connected
/// region); a single cluster sits at the center.
ArcPlacement place_cluster_centroids(const std::vector<int>& cluster_order, const TypeRegion& region,
                                     std::optional<Point> facing);

/// r_min + (c_i / c_max) * (r_max - r_min); c_max = 0 gives r_min.
double radial_radius(double c_i, double c_max, double r_min, double r_max);

struct PassResult {
  std::map<std::string, Point> positions;
  std::vector<double> trace;  // displacement cap of every iteration
};

struct InterestPassInput {
  TypeRegion region;
  ArcPlacement arc;
  std::map<std::string, int> cluster_of;          // every node to lay out
  std::map<std::string, std::size_t> link_count;  // c_i of the radial initialization
  double node_radius = 5.0;
};

PassResult layout_interest_nodes(const InterestPassInput& input, const AnnealSchedule& schedule, std::uint64_t seed);

/// Similarity transform taking disc `from` onto disc `to`.
Point map_between_regions(Point p, const TypeRegion& from, const TypeRegion& to);

struct ConnectedPassInput {
  TypeRegion interest_region;
  TypeRegion region;
  std::map<std::string, std::vector<std::string>> links;  // connected id -> linked interest ids
  const std::map<std::string, Point>* interest_positions = nullptr;
  double node_radius = 5.0;
};

PassResult layout_connected_nodes(const ConnectedPassInput& input, const AnnealSchedule& schedule,
                                  std::uint64_t seed);

struct Disc {
  Point center;
  double radius = 0.0;
};

struct OverlapResult {
  std::map<std::string, Point> positions;
  int iterations = 0;
  double last_max_displacement = 0.0;
};

/// Pairs closer than r_a + r_b + 2 are pushed apart by half the deficit each
/// (Jacobi sweep); coincident centers separate along a seeded direction.
/// Nodes listed in `bounds` are clamped back into their disc after each sweep.
OverlapResult resolve_overlaps(std::map<std::string, Point> positions, const std::map<std::string, double>& radii,
                               const std::map<std::string, Disc>& bounds, int max_iterations, std::uint64_t seed);

/// Convex hull of the centers grown by (max radius + 8); one or two members
/// give a 16-gon disc or capsule.
Polygon cluster_hull(const std::vector<Point>& centers, double max_radius);

std::map<int, Polygon> compute_hulls(const std::map<int, std::vector<std::string>>& members,
                                     const std::map<std::string, Point>& positions,
                                     const std::map<std::string, double>& radii);

struct PieWedge {
  int cluster = 0;
  double fraction = 0.0;

  friend bool operator==(const PieWedge&, const PieWedge&) = default;
};

/// links: connected id -> (interest id, cluster id) per link. Wedges ascend by cluster id.
std::map<std::string, std::vector<PieWedge>> compute_pie_wedges(
    const std::map<std::string, std::vector<std::pair<std::string, int>>>& links);

struct Bundle {
  std::string id;
  int cluster = 0;
  std::string connected;
  Point anchor;
  std::vector<std::string> edges;
  bool expanded = false;

  friend bool operator==(const Bundle&, const Bundle&) = default;
};

struct HighlightedPath {
  PathCriterion criterion = PathCriterion::Shortest;
  std::vector<std::string> nodes;
  std::vector<std::string> edges;

  friend bool operator==(const HighlightedPath&, const HighlightedPath&) = default;
};

struct EmphasisState {
  std::map<std::string, double> node_sizes;  // scale factors in [1, 2.5]
  std::set<std::string> highlighted_edges;
  std::vector<Bundle> bundles;
  std::vector<HighlightedPath> paths;
  bool paths_truncated = false;

  nlohmann::json to_json() const;
  friend bool operator==(const EmphasisState&, const EmphasisState&) = default;
};

struct DisplayEdge {
  std::string id;
  std::string source;
  std::string target;
  std::string relation;
};

struct ContextLayout {
  std::uint64_t seed = 0;
  std::string interest_type;
  std::vector<TypeRegion> regions;
  std::map<std::string, Point> positions;
  std::map<std::string, double> radii;
  std::map<std::string, std::string> node_type;
  std::map<std::string, std::string> labels;
  std::map<std::string, int> cluster_of;  // clustered interest nodes only
  std::map<int, std::string> cluster_labels;
  std::map<int, Point> centroids;
  double slot_radius = 0.0;
  std::map<int, Polygon> hulls;
  std::map<std::string, std::vector<PieWedge>> pies;
  std::set<std::string> answers;
  std::set<std::string> injected;  // added by path context
  std::vector<DisplayEdge> edges;  // ascending id
  EmphasisState emphasis;
  std::vector<double> iteration_trace;

  const TypeRegion* region(std::string_view type) const;
  bool displays(std::string_view node_id) const { return positions.find(std::string(node_id)) != positions.end(); }

  /// Export format; coordinates rounded to 1e-6.
  nlohmann::json to_json() const;
  std::string dump() const { return to_json().dump(); }
};

struct LayoutOptions {
  double spacing = 300.0;      // layout units per ontology hop
  bool auto_spacing = true;    // widen spacing so the busiest region holds its nodes
  double node_radius = 5.0;
  std::size_t connected_cap = 2000;
  AnnealSchedule schedule;
};

/// Full geometry for the sampled interest nodes: regions, arc-placed
/// clusters, both force passes, overlap removal, hulls and pies.
ContextLayout compute_layout(const KnowledgeGraph& kg, const Ontology& ontology, const InterestSubgraph& subgraph,
                             const ClusterSet& clusters, const SampleResult& sample, const LayoutOptions& options,
                             std::uint64_t seed);

/// Adds nodes (e.g. path members outside the sample) inside their type region
/// without moving anything already placed.
void inject_nodes(ContextLayout& layout, const KnowledgeGraph& kg, const std::vector<std::string>& ids);

}  // namespace ckg
