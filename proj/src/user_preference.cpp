#include "contextkg/user_preference.hpp"

#include "contextkg/error.hpp"
#include "strings.hpp"

namespace ckg {

using nlohmann::json;

bool UserPreference::same_intent(const UserPreference& o) const {
  return interest_type == o.interest_type && attribute == o.attribute &&
         attribute_value == o.attribute_value && connected_types == o.connected_types;
}

json UserPreference::to_json() const {
  return {{"interest_type", interest_type},
          {"attribute", attribute},
          {"attribute_value", attribute_value},
          {"connected_types", connected_types},
          {"diversity", diversity}};
}

UserPreference UserPreference::from_json(const json& j) {
  UserPreference p;
  p.interest_type = j.at("interest_type").get<std::string>();
  p.attribute = j.at("attribute").get<std::string>();
  p.attribute_value = j.at("attribute_value").get<std::string>();
  p.connected_types = j.value("connected_types", std::vector<std::string>{});
  p.diversity = j.value("diversity", 0.5);
  return p;
}

std::string_view to_string(ContextKind kind) {
  switch (kind) {
    case ContextKind::Neighbor: return "neighbor";
    case ContextKind::Edge: return "edge";
    case ContextKind::Path: return "path";
  }
  return "neighbor";
}

std::string_view to_string(PathCriterion criterion) {
  switch (criterion) {
    case PathCriterion::Shortest: return "shortest";
    case PathCriterion::Homogeneous: return "homogeneous";
    case PathCriterion::Disjoint: return "disjoint";
  }
  return "shortest";
}

std::optional<ContextKind> parse_context_kind(std::string_view s) {
  const auto l = text::to_lower(text::trim(s));
  if (l == "neighbor" || l == "neighbour") return ContextKind::Neighbor;
  if (l == "edge") return ContextKind::Edge;
  if (l == "path") return ContextKind::Path;
  return std::nullopt;
}

std::optional<PathCriterion> parse_path_criterion(std::string_view s) {
  const auto l = text::to_lower(text::trim(s));
  if (l == "shortest" || l == "shortest paths" || l == "shortest path") return PathCriterion::Shortest;
  if (l == "homogeneous" || l == "homogeneous paths" || l == "homogeneous path") {
    return PathCriterion::Homogeneous;
  }
  if (l == "disjoint" || l == "disjoint paths" || l == "disjoint path") return PathCriterion::Disjoint;
  return std::nullopt;
}

bool ContextDirective::well_formed() const {
  switch (kind) {
    case ContextKind::Neighbor:
      return metric.has_value() &&
             (metric->kind == NeighborMetric::Kind::Degree || !metric->attribute.empty());
    case ContextKind::Edge:
      return predicate.has_value() && (predicate->relation || predicate->attribute) &&
             (!predicate->value || predicate->attribute);
    case ContextKind::Path:
      return path_source && path_target && criterion && !path_source->empty() &&
             !path_target->empty();
  }
  return false;
}

json ContextDirective::to_json() const {
  json j = {{"kind", std::string(ckg::to_string(kind))}, {"description", description}};
  if (metric) {
    j["metric"] = metric->kind == NeighborMetric::Kind::Degree ? std::string("degree") : metric->attribute;
  }
  if (target_type) j["target_type"] = *target_type;
  if (predicate) {
    json p = json::object();
    if (predicate->relation) p["relation"] = *predicate->relation;
    if (predicate->attribute) p["attribute"] = *predicate->attribute;
    if (predicate->value) p["value"] = *predicate->value;
    j["predicate"] = p;
  }
  if (path_source) j["source"] = *path_source;
  if (path_target) j["target"] = *path_target;
  if (criterion) j["criterion"] = std::string(ckg::to_string(*criterion));
  return j;
}

ContextDirective ContextDirective::from_json(const json& j) {
  ContextDirective d;
  const auto kind = parse_context_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error("unknown directive kind");
  d.kind = *kind;
  d.description = j.value("description", std::string());
  if (const auto m = j.find("metric"); m != j.end() && m->is_string()) {
    const auto s = m->get<std::string>();
    d.metric = s == "degree" ? NeighborMetric{NeighborMetric::Kind::Degree, {}}
                             : NeighborMetric{NeighborMetric::Kind::Attribute, s};
  }
  if (const auto t = j.find("target_type"); t != j.end() && t->is_string()) d.target_type = t->get<std::string>();
  if (const auto p = j.find("predicate"); p != j.end() && p->is_object()) {
    EdgePredicate pred;
    if (p->contains("relation")) pred.relation = p->at("relation").get<std::string>();
    if (p->contains("attribute")) pred.attribute = p->at("attribute").get<std::string>();
    if (p->contains("value")) pred.value = p->at("value").get<std::string>();
    d.predicate = pred;
  }
  if (const auto s = j.find("source"); s != j.end() && s->is_string()) d.path_source = s->get<std::string>();
  if (const auto t = j.find("target"); t != j.end() && t->is_string()) d.path_target = t->get<std::string>();
  if (const auto c = j.find("criterion"); c != j.end() && c->is_string()) {
    d.criterion = parse_path_criterion(c->get<std::string>());
  }
  return d;
}

}  // namespace ckg
