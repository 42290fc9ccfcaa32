#include "contextkg/layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "contextkg/error.hpp"
#include "random.hpp"

namespace ckg {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Dense Gaussian elimination with partial pivoting; the systems here are tiny
// (one row per ontology type).
class LuSolver {
 public:
  explicit LuSolver(std::vector<std::vector<double>> a) : a_(std::move(a)), perm_(a_.size()) {
    const std::size_t n = a_.size();
    std::iota(perm_.begin(), perm_.end(), 0);
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t pivot = c;
      for (std::size_t r = c + 1; r < n; ++r) {
        if (std::abs(a_[r][c]) > std::abs(a_[pivot][c])) pivot = r;
      }
      std::swap(a_[c], a_[pivot]);
      std::swap(perm_[c], perm_[pivot]);
      if (std::abs(a_[c][c]) < 1e-300) throw Error("singular majorization system");
      for (std::size_t r = c + 1; r < n; ++r) {
        a_[r][c] /= a_[c][c];
        for (std::size_t k = c + 1; k < n; ++k) a_[r][k] -= a_[r][c] * a_[c][k];
      }
    }
  }

  std::vector<double> solve(const std::vector<double>& b) const {
    const std::size_t n = a_.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = b[perm_[i]];
      for (std::size_t k = 0; k < i; ++k) y[i] -= a_[i][k] * y[k];
    }
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t k = i + 1; k < n; ++k) y[i] -= a_[i][k] * y[k];
      y[i] /= a_[i][i];
    }
    return y;
  }

 private:
  std::vector<std::vector<double>> a_;
  std::vector<std::size_t> perm_;
};

double raw_stress(const std::vector<Point>& x, const std::vector<std::vector<double>>& delta,
                  const std::vector<std::vector<double>>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double e = distance(x[i], x[j]) - delta[i][j];
      s += w[i][j] * e * e;
    }
  }
  return s;
}

// Deterministic direction for a coincident pair of nodes.
Point pair_direction(std::size_t i, std::size_t j) {
  const double a = 2.0 * kPi * std::fmod(0.6180339887498949 * static_cast<double>(i * 131 + j * 17 + 1), 1.0);
  return {std::cos(a), std::sin(a)};
}

double bound_radius(double disc_radius, double node_radius) {
  return disc_radius > 4.0 * node_radius ? disc_radius - node_radius : 0.75 * disc_radius;
}

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

json point_json(Point p) { return json::array({round6(p.x), round6(p.y)}); }

}  // namespace

std::map<std::string, Point> arrange_ontology(const DistanceMatrix& dm, double spacing) {
  if (!(spacing > 0.0)) throw Error("arrange_ontology: spacing must be positive");
  const std::size_t n = dm.size();
  std::map<std::string, Point> out;
  if (n == 0) return out;
  if (n == 1) {
    out[dm.order()[0]] = {0.0, 0.0};
    return out;
  }
  std::vector<std::vector<double>> delta(n, std::vector<double>(n, 0.0)), w(n, std::vector<double>(n, 0.0));
  double max_d = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      delta[i][j] = spacing * std::max(dm.at(i, j), 1e-9);
      w[i][j] = 1.0 / (delta[i][j] * delta[i][j]);
      max_d = std::max(max_d, dm.at(i, j));
    }
  }
  std::vector<Point> x(n);
  const double r0 = spacing * max_d / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    x[i] = {r0 * std::cos(a), r0 * std::sin(a)};
  }

  // Guttman transform: X <- (V + 11'/n)^-1 B(X) X, valid because B(X) X has zero column sums.
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) {
        v[i][j] = -w[i][j];
        v[i][i] += w[i][j];
      }
    }
  }
  for (auto& row : v) {
    for (double& e : row) e += 1.0 / static_cast<double>(n);
  }
  const LuSolver solver(std::move(v));

  double previous = raw_stress(x, delta, w);
  for (int sweep = 0; sweep < 1000; ++sweep) {
    std::vector<double> bx(n, 0.0), by(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double diag = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d = distance(x[i], x[j]);
        const double b = d > 1e-12 ? -w[i][j] * delta[i][j] / d : 0.0;
        bx[i] += b * x[j].x;
        by[i] += b * x[j].y;
        diag -= b;
      }
      bx[i] += diag * x[i].x;
      by[i] += diag * x[i].y;
    }
    const auto nx = solver.solve(bx);
    const auto ny = solver.solve(by);
    for (std::size_t i = 0; i < n; ++i) x[i] = {nx[i], ny[i]};
    const double current = raw_stress(x, delta, w);
    const double change = (previous - current) / std::max(previous, 1e-300);
    previous = current;
    if (std::abs(change) < 1e-9) break;
  }
  Point centroid;
  for (const auto& p : x) centroid += p * (1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) out[dm.order()[i]] = x[i] - centroid;
  return out;
}

double normalized_stress(const DistanceMatrix& dm, const std::map<std::string, Point>& positions) {
  const std::size_t n = dm.size();
  double num = 0.0, den = 0.0;
  std::vector<std::tuple<double, double, double>> terms;  // (w, E, d)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dm.at(i, j);
      if (d <= 0.0) continue;
      const double e = distance(positions.at(dm.order()[i]), positions.at(dm.order()[j]));
      const double w = 1.0 / (d * d);
      terms.emplace_back(w, e, d);
      num += w * e * d;
      den += w * e * e;
    }
  }
  if (terms.empty()) return 0.0;
  const double alpha = den > 0.0 ? num / den : 0.0;
  double s = 0.0, norm = 0.0;
  for (const auto& [w, e, d] : terms) {
    s += w * (alpha * e - d) * (alpha * e - d);
    norm += w * d * d;
  }
  return s / norm;
}

std::vector<TypeRegion> partition_regions(const std::map<std::string, Point>& positions,
                                          const std::map<std::string, std::size_t>& counts, double spacing) {
  std::vector<TypeRegion> out;
  if (positions.empty()) return out;
  if (positions.size() == 1) {
    out.push_back({positions.begin()->first, positions.begin()->second, spacing});
    return out;
  }
  double min_distance = std::numeric_limits<double>::infinity();
  for (auto a = positions.begin(); a != positions.end(); ++a) {
    for (auto b = std::next(a); b != positions.end(); ++b) {
      min_distance = std::min(min_distance, distance(a->second, b->second));
    }
  }
  if (!(min_distance > 1e-9)) throw Error("partition_regions: two type centers coincide");
  auto count_of = [&](const std::string& t) {
    const auto it = counts.find(t);
    return std::max<std::size_t>(1, it == counts.end() ? 1 : it->second);
  };
  std::size_t max_count = 1;
  for (const auto& [t, p] : positions) max_count = std::max(max_count, count_of(t));
  const double cap = 0.4 * min_distance;
  const double base = cap / std::sqrt(static_cast<double>(max_count));
  for (const auto& [t, p] : positions) {
    out.push_back({t, p, std::min(cap, base * std::sqrt(static_cast<double>(count_of(t))))});
  }
  return out;
}

ArcPlacement place_cluster_centroids(const std::vector<int>& order, const TypeRegion& region,
                                     std::optional<Point> facing) {
  ArcPlacement out;
  const std::size_t n = order.size();
  if (n == 0) return out;
  if (n == 1) {
    out.centroids[order[0]] = region.center;
    out.slot_radius = region.radius;
    return out;
  }
  double phi = 0.0;
  if (facing) {
    const Point d = *facing - region.center;
    if (d.norm() > 1e-12) phi = std::atan2(d.y, d.x);
  }
  // The arc's midpoint points away from the facing region, so its open side faces it.
  const double arc = 0.7 * region.radius;
  const double start = phi + kPi / 2.0;
  const double step = kPi / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = start + step * static_cast<double>(i);
    out.centroids[order[i]] = region.center + Point{arc * std::cos(a), arc * std::sin(a)};
  }
  const double chord = 2.0 * arc * std::sin(step / 2.0);
  out.slot_radius = std::min(chord / 2.0, region.radius - arc);
  return out;
}

double radial_radius(double c_i, double c_max, double r_min, double r_max) {
  if (c_max <= 0.0) return r_min;
  return r_min + (c_i / c_max) * (r_max - r_min);
}

PassResult layout_interest_nodes(const InterestPassInput& input, const AnnealSchedule& schedule, std::uint64_t seed) {
  PassResult out;
  const std::size_t n = input.cluster_of.size();
  if (n == 0) return out;
  const double s = input.arc.slot_radius;
  const double bound = bound_radius(s, input.node_radius);

  std::vector<std::string> ids;
  std::map<int, std::vector<std::size_t>> groups;
  for (const auto& [id, c] : input.cluster_of) {
    if (!input.arc.centroids.contains(c)) throw Error("interest node '" + id + "' has no placed cluster");
    groups[c].push_back(ids.size());
    ids.push_back(id);
  }
  std::vector<Point> pos(n), anchor(n);
  std::vector<double> k(n);
  rng::Stream rand(rng::derive(seed, 1));
  for (const auto& [c, members] : groups) {
    const Point centroid = input.arc.centroids.at(c);
    const double m = static_cast<double>(members.size());
    std::size_t c_max = 0;
    for (auto i : members) {
      const auto it = input.link_count.find(ids[i]);
      c_max = std::max(c_max, it == input.link_count.end() ? 0 : it->second);
    }
    const double rotation = rand.uniform(0.0, 2.0 * kPi);
    for (std::size_t j = 0; j < members.size(); ++j) {
      const auto i = members[j];
      const auto it = input.link_count.find(ids[i]);
      const double c_i = it == input.link_count.end() ? 0.0 : static_cast<double>(it->second);
      const double r = radial_radius(c_i, static_cast<double>(c_max), 0.15 * s, 0.85 * s);
      const double a = rotation + 2.0 * kPi * static_cast<double>(j) / m;
      anchor[i] = centroid;
      k[i] = s / std::sqrt(m);
      pos[i] = clamp_to_disc(centroid + Point{r * std::cos(a), r * std::sin(a)}, centroid, bound);
    }
  }

  const double diameter = 2.0 * input.region.radius;
  double t = schedule.t0;
  std::vector<Point> force(n);
  for (int iter = 0; iter < schedule.main_iterations; ++iter) {
    const double cap = t * diameter;
    out.trace.push_back(cap);
    std::fill(force.begin(), force.end(), Point{});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Point d = pos[i] - pos[j];
        double len = d.norm();
        if (len < 1e-9) {
          d = pair_direction(i, j);
          len = 1e-3;
        } else {
          d *= 1.0 / len;
        }
        force[i] += d * (k[i] * k[i] / len);
        force[j] -= d * (k[j] * k[j] / len);
      }
      const Point pull = anchor[i] - pos[i];
      force[i] += pull * (pull.norm() / k[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double len = force[i].norm();
      if (len > cap) force[i] *= cap / len;
      pos[i] = clamp_to_disc(pos[i] + force[i], anchor[i], bound);
    }
    t *= schedule.decay;
  }
  for (std::size_t i = 0; i < n; ++i) out.positions[ids[i]] = pos[i];
  return out;
}

Point map_between_regions(Point p, const TypeRegion& from, const TypeRegion& to) {
  const double scale = from.radius > 0.0 ? to.radius / from.radius : 1.0;
  return to.center + (p - from.center) * scale;
}

PassResult layout_connected_nodes(const ConnectedPassInput& input, const AnnealSchedule& schedule,
                                  std::uint64_t seed) {
  PassResult out;
  const std::size_t n = input.links.size();
  if (n == 0) return out;
  if (!input.interest_positions) throw Error("layout_connected_nodes: interest positions missing");
  const double R = input.region.radius;
  const double bound = bound_radius(R, input.node_radius);
  const double k = R / std::sqrt(static_cast<double>(n));

  std::vector<std::string> ids;
  std::vector<std::vector<Point>> anchors;
  for (const auto& [id, linked] : input.links) {
    ids.push_back(id);
    auto& a = anchors.emplace_back();
    for (const auto& interest : linked) {
      const auto it = input.interest_positions->find(interest);
      if (it != input.interest_positions->end()) {
        a.push_back(map_between_regions(it->second, input.interest_region, input.region));
      }
    }
  }
  rng::Stream rand(rng::derive(seed, 2));
  std::vector<Point> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point start = input.region.center;
    if (!anchors[i].empty()) {
      start = {};
      for (const auto& a : anchors[i]) start += a * (1.0 / static_cast<double>(anchors[i].size()));
    }
    pos[i] = clamp_to_disc(start + rand.in_disc(2.0), input.region.center, bound);
  }

  const double diameter = 2.0 * R;
  double t = schedule.t0 * schedule.connected_t_scale;
  std::vector<Point> force(n);
  for (int iter = 0; iter < schedule.connected_iterations; ++iter) {
    const double cap = t * diameter;
    out.trace.push_back(cap);
    std::fill(force.begin(), force.end(), Point{});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Point d = pos[i] - pos[j];
        double len = d.norm();
        if (len < 1e-9) {
          d = pair_direction(i, j);
          len = 1e-3;
        } else {
          d *= 1.0 / len;
        }
        const Point f = d * (k * k / len);
        force[i] += f;
        force[j] -= f;
      }
      for (const auto& a : anchors[i]) {
        const Point pull = a - pos[i];
        force[i] += pull * (pull.norm() / k);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double len = force[i].norm();
      if (len > cap) force[i] *= cap / len;
      pos[i] = clamp_to_disc(pos[i] + force[i], input.region.center, bound);
    }
    t *= schedule.decay;
  }
  for (std::size_t i = 0; i < n; ++i) out.positions[ids[i]] = pos[i];
  return out;
}

OverlapResult resolve_overlaps(std::map<std::string, Point> positions, const std::map<std::string, double>& radii,
                               const std::map<std::string, Disc>& bounds, int max_iterations, std::uint64_t seed) {
  OverlapResult out;
  std::vector<std::string> ids;
  std::vector<Point> pos;
  std::vector<double> rad;
  std::vector<const Disc*> disc;
  for (const auto& [id, p] : positions) {
    ids.push_back(id);
    pos.push_back(p);
    const auto r = radii.find(id);
    rad.push_back(r == radii.end() ? 0.0 : r->second);
    const auto b = bounds.find(id);
    disc.push_back(b == bounds.end() ? nullptr : &b->second);
  }
  const std::size_t n = ids.size();
  rng::Stream rand(rng::derive(seed, 3));
  std::vector<Point> shift(n);
  for (int iter = 1; iter <= max_iterations; ++iter) {
    std::fill(shift.begin(), shift.end(), Point{});
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double need = rad[i] + rad[j] + 2.0;
        const Point d = pos[i] - pos[j];
        if (std::abs(d.x) >= need || std::abs(d.y) >= need) continue;
        const double len = d.norm();
        if (len >= need) continue;
        const Point dir = len < 1e-9 ? rand.unit_vector() : d * (1.0 / len);
        const double push = (need - len) / 2.0;
        shift[i] += dir * push;
        shift[j] -= dir * push;
        any = true;
      }
    }
    double max_move = 0.0;
    if (any) {
      for (std::size_t i = 0; i < n; ++i) {
        Point next = pos[i] + shift[i];
        if (disc[i]) next = clamp_to_disc(next, disc[i]->center, disc[i]->radius);
        max_move = std::max(max_move, distance(next, pos[i]));
        pos[i] = next;
      }
    }
    out.iterations = iter;
    out.last_max_displacement = max_move;
    if (max_move < 0.5) break;
  }
  for (std::size_t i = 0; i < n; ++i) out.positions[ids[i]] = pos[i];
  return out;
}

Polygon cluster_hull(const std::vector<Point>& centers, double max_radius) {
  const double grow = max_radius + 8.0;
  const Polygon hull = convex_hull(centers);
  if (hull.empty()) return {};
  if (hull.size() == 1) return regular_polygon(hull[0], grow, 16);
  return offset_convex(hull, grow, kPi / 7.0);
}

std::map<int, Polygon> compute_hulls(const std::map<int, std::vector<std::string>>& members,
                                     const std::map<std::string, Point>& positions,
                                     const std::map<std::string, double>& radii) {
  std::map<int, Polygon> out;
  for (const auto& [c, ids] : members) {
    std::vector<Point> centers;
    double max_r = 0.0;
    for (const auto& id : ids) {
      centers.push_back(positions.at(id));
      if (const auto r = radii.find(id); r != radii.end()) max_r = std::max(max_r, r->second);
    }
    if (!centers.empty()) out[c] = cluster_hull(centers, max_r);
  }
  return out;
}

std::map<std::string, std::vector<PieWedge>> compute_pie_wedges(
    const std::map<std::string, std::vector<std::pair<std::string, int>>>& links) {
  std::map<std::string, std::vector<PieWedge>> out;
  for (const auto& [id, list] : links) {
    if (list.empty()) continue;
    std::map<int, std::size_t> per;
    for (const auto& [interest, cluster] : list) ++per[cluster];
    auto& wedges = out[id];
    for (const auto& [cluster, count] : per) {
      wedges.push_back({cluster, static_cast<double>(count) / static_cast<double>(list.size())});
    }
  }
  return out;
}

json EmphasisState::to_json() const {
  json nodes = json::array();
  for (const auto& [id, scale] : node_sizes) nodes.push_back({{"id", id}, {"scale", round6(scale)}});
  json bundles_json = json::array();
  for (const auto& b : bundles) {
    bundles_json.push_back({{"id", b.id},
                            {"cluster", b.cluster},
                            {"connected", b.connected},
                            {"anchor", point_json(b.anchor)},
                            {"edges", b.edges},
                            {"expanded", b.expanded}});
  }
  json paths_json = json::array();
  for (const auto& p : paths) {
    paths_json.push_back({{"criterion", to_string(p.criterion)}, {"nodes", p.nodes}, {"edges", p.edges}});
  }
  return {{"nodes", nodes},
          {"edges", std::vector<std::string>(highlighted_edges.begin(), highlighted_edges.end())},
          {"bundles", bundles_json},
          {"paths", paths_json},
          {"paths_truncated", paths_truncated}};
}

const TypeRegion* ContextLayout::region(std::string_view type) const {
  for (const auto& r : regions) {
    if (r.type == type) return &r;
  }
  return nullptr;
}

json ContextLayout::to_json() const {
  json out;
  out["seed"] = seed;
  out["interest_type"] = interest_type;
  out["regions"] = json::array();
  for (const auto& r : regions) {
    out["regions"].push_back({{"type", r.type}, {"cx", round6(r.center.x)}, {"cy", round6(r.center.y)}, {"r", round6(r.radius)}});
  }
  std::map<int, std::size_t> sizes;
  for (const auto& [id, c] : cluster_of) ++sizes[c];
  out["clusters"] = json::array();
  for (const auto& [c, label] : cluster_labels) {
    json entry = {{"id", c}, {"label", label}, {"size", sizes.contains(c) ? sizes.at(c) : 0}};
    if (const auto it = centroids.find(c); it != centroids.end()) entry["centroid"] = point_json(it->second);
    out["clusters"].push_back(entry);
  }
  out["slot_radius"] = round6(slot_radius);
  out["nodes"] = json::array();
  for (const auto& [id, p] : positions) {
    json node = {{"id", id},
                 {"type", node_type.contains(id) ? node_type.at(id) : std::string()},
                 {"label", labels.contains(id) ? labels.at(id) : id},
                 {"x", round6(p.x)},
                 {"y", round6(p.y)},
                 {"r", round6(radii.contains(id) ? radii.at(id) : 0.0)}};
    if (const auto c = cluster_of.find(id); c != cluster_of.end()) node["cluster"] = c->second;
    if (const auto pie = pies.find(id); pie != pies.end()) {
      json wedges = json::array();
      for (const auto& w : pie->second) wedges.push_back({{"cluster", w.cluster}, {"frac", round6(w.fraction)}});
      node["pie"] = wedges;
      node["solid"] = pie->second.size() == 1;
    }
    if (answers.contains(id)) node["answer"] = true;
    if (injected.contains(id)) node["injected"] = true;
    out["nodes"].push_back(node);
  }
  out["edges"] = json::array();
  for (const auto& e : edges) {
    out["edges"].push_back({{"id", e.id}, {"source", e.source}, {"target", e.target}, {"relation", e.relation}});
  }
  out["hulls"] = json::array();
  for (const auto& [c, poly] : hulls) {
    json pts = json::array();
    for (const auto& p : poly) pts.push_back(point_json(p));
    out["hulls"].push_back({{"cluster", c}, {"points", pts}});
  }
  out["emphasis"] = emphasis.to_json();
  return out;
}

ContextLayout compute_layout(const KnowledgeGraph& kg, const Ontology& ontology, const InterestSubgraph& subgraph,
                             const ClusterSet& clusters, const SampleResult& sample, const LayoutOptions& options,
                             std::uint64_t seed) {
  ContextLayout L;
  L.seed = seed;
  L.interest_type = subgraph.interest_type;

  // Sampled interest nodes and the connected nodes they reach.
  std::map<std::string, int> cluster_of;
  for (const auto& id : sample.ids) {
    const auto c = clusters.cluster_of(id);
    if (!c) throw Error("sampled node '" + id + "' belongs to no cluster");
    cluster_of[id] = *c;
  }
  std::map<std::string, std::vector<std::string>> reverse;  // connected -> sampled interest
  for (const auto& [id, c] : cluster_of) {
    const auto it = subgraph.links.find(id);
    if (it == subgraph.links.end()) continue;
    for (const auto& x : it->second) reverse[x].push_back(id);
  }
  if (reverse.size() > options.connected_cap) {
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (const auto& [x, list] : reverse) ranked.emplace_back(x, list.size());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::map<std::string, std::vector<std::string>> kept;
    for (std::size_t i = 0; i < options.connected_cap; ++i) kept[ranked[i].first] = std::move(reverse[ranked[i].first]);
    reverse = std::move(kept);
  }

  std::map<std::string, std::size_t> counts;
  counts[subgraph.interest_type] = cluster_of.size();
  std::map<std::string, std::map<std::string, std::vector<std::string>>> by_type;  // type -> connected -> links
  for (auto& [x, list] : reverse) {
    const Node* node = kg.find_node(x);
    if (!node) throw NotFoundError("unknown connected node '" + x + "'");
    ++counts[node->type];
    by_type[node->type][x] = list;
  }
  std::size_t busiest = 1;
  for (const auto& [t, c] : counts) busiest = std::max(busiest, c);

  double spacing = options.spacing;
  if (options.auto_spacing) spacing = std::max(spacing, 8.0 * options.node_radius * std::sqrt(static_cast<double>(busiest)));
  const auto centers = arrange_ontology(distance_matrix(ontology), spacing);
  L.regions = partition_regions(centers, counts, spacing);
  const TypeRegion* interest_region = L.region(subgraph.interest_type);
  if (!interest_region) throw Error("interest type '" + subgraph.interest_type + "' is not in the ontology");

  // The arc opens toward the nearest region that shows connected nodes.
  std::optional<Point> facing;
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& r : L.regions) {
    if (r.type == subgraph.interest_type) continue;
    const bool shown = by_type.contains(r.type);
    const double d = distance(r.center, interest_region->center) + (shown ? 0.0 : 1e12);
    if (d < nearest) {
      nearest = d;
      facing = r.center;
    }
  }

  std::vector<int> order;
  for (const auto& c : clusters.clusters) {
    if (std::any_of(c.members.begin(), c.members.end(), [&](const auto& id) { return cluster_of.contains(id); })) {
      order.push_back(c.id);
    }
  }
  const ArcPlacement arc = place_cluster_centroids(order, *interest_region, facing);
  L.centroids = arc.centroids;
  L.slot_radius = arc.slot_radius;
  for (const auto& c : clusters.clusters) {
    if (arc.centroids.contains(c.id)) L.cluster_labels[c.id] = c.label;
  }

  InterestPassInput interest_input;
  interest_input.region = *interest_region;
  interest_input.arc = arc;
  interest_input.cluster_of = cluster_of;
  interest_input.node_radius = options.node_radius;
  for (const auto& [x, list] : reverse) {
    for (const auto& i : list) ++interest_input.link_count[i];
  }
  auto interest_pass = layout_interest_nodes(interest_input, options.schedule, seed);
  L.iteration_trace = interest_pass.trace;

  std::map<std::string, Point> positions = interest_pass.positions;
  std::map<std::string, Disc> bounds;
  for (const auto& [id, c] : cluster_of) {
    bounds[id] = {arc.centroids.at(c), bound_radius(arc.slot_radius, options.node_radius)};
  }
  std::uint64_t tag = 100;
  for (const auto& [type, links] : by_type) {
    const TypeRegion* region = L.region(type);
    ConnectedPassInput input{*interest_region, *region, links, &interest_pass.positions, options.node_radius};
    auto pass = layout_connected_nodes(input, options.schedule, rng::derive(seed, tag++));
    for (const auto& [id, p] : pass.positions) {
      positions[id] = p;
      bounds[id] = {region->center, bound_radius(region->radius, options.node_radius)};
    }
  }

  for (const auto& [id, p] : positions) L.radii[id] = options.node_radius;

  // Overlap removal per region; regions are disjoint so nodes never interact across them.
  std::map<std::string, std::map<std::string, Point>> per_region;
  for (const auto& [id, p] : positions) {
    const Node* node = kg.find_node(id);
    L.node_type[id] = node->type;
    L.labels[id] = node->label;
    per_region[node->type][id] = p;
  }
  tag = 200;
  for (auto& [type, group] : per_region) {
    auto resolved = resolve_overlaps(std::move(group), L.radii, bounds, options.schedule.overlap_iterations_max,
                                     rng::derive(seed, tag++));
    for (const auto& [id, p] : resolved.positions) L.positions[id] = p;
  }

  L.cluster_of = cluster_of;
  std::map<int, std::vector<std::string>> members;
  for (const auto& [id, c] : cluster_of) members[c].push_back(id);
  L.hulls = compute_hulls(members, L.positions, L.radii);

  std::map<std::string, std::vector<std::pair<std::string, int>>> pie_links;
  for (const auto& [x, list] : reverse) {
    for (const auto& i : list) pie_links[x].emplace_back(i, cluster_of.at(i));
  }
  L.pies = compute_pie_wedges(pie_links);

  for (const auto& id : sample.answers) {
    if (cluster_of.contains(id)) L.answers.insert(id);
  }
  for (const auto& e : subgraph.edges) {
    const Edge* edge = kg.find_edge(e);
    if (edge && L.displays(edge->source) && L.displays(edge->target)) {
      L.edges.push_back({edge->id, edge->source, edge->target, edge->relation});
    }
  }
  return L;
}

void inject_nodes(ContextLayout& layout, const KnowledgeGraph& kg, const std::vector<std::string>& ids) {
  double node_radius = 5.0;
  if (!layout.radii.empty()) node_radius = layout.radii.begin()->second;
  for (const auto& id : ids) {
    if (layout.displays(id)) continue;
    const Node* node = kg.find_node(id);
    if (!node) throw NotFoundError("unknown node '" + id + "'");
    const TypeRegion* region = layout.region(node->type);
    if (!region) throw Error("type '" + node->type + "' has no region");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : id) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    rng::Stream rand(rng::derive(layout.seed, h));
    layout.positions[id] = region->center + rand.in_disc(0.6 * bound_radius(region->radius, node_radius));
    layout.radii[id] = node_radius;
    layout.node_type[id] = node->type;
    layout.labels[id] = node->label;
    layout.injected.insert(id);
  }
}

}  // namespace ckg
