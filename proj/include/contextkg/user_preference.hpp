#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ckg {

/// The four intent elements pulled from a question, plus the diversity knob.
struct UserPreference {
  std::string interest_type;
  std::string attribute;
  std::string attribute_value;
  std::vector<std::string> connected_types;
  double diversity = 0.5;

  /// Equality over the four extracted elements; diversity is a UI setting.
  bool same_intent(const UserPreference& other) const;

  nlohmann::json to_json() const;
  static UserPreference from_json(const nlohmann::json& j);
};

enum class ContextKind { Neighbor, Edge, Path };
enum class PathCriterion { Shortest, Homogeneous, Disjoint };

std::string_view to_string(ContextKind kind);
std::string_view to_string(PathCriterion criterion);
std::optional<ContextKind> parse_context_kind(std::string_view s);
std::optional<PathCriterion> parse_path_criterion(std::string_view s);

struct NeighborMetric {
  enum class Kind { Degree, Attribute } kind = Kind::Degree;
  std::string attribute;  // set when kind == Attribute

  friend bool operator==(const NeighborMetric&, const NeighborMetric&) = default;
};

struct EdgePredicate {
  std::optional<std::string> relation;
  std::optional<std::string> attribute;
  std::optional<std::string> value;  // compared against the attribute when both set

  friend bool operator==(const EdgePredicate&, const EdgePredicate&) = default;
};

struct ContextDirective {
  ContextKind kind = ContextKind::Neighbor;
  std::string description;

  std::optional<NeighborMetric> metric;
  std::optional<std::string> target_type;  // neighbor scoring scope; defaults to the interest type

  std::optional<EdgePredicate> predicate;

  std::optional<std::string> path_source;  // node label or id as written by the user
  std::optional<std::string> path_target;
  std::optional<PathCriterion> criterion;

  /// Kind-specific required fields are present.
  bool well_formed() const;

  nlohmann::json to_json() const;
  static ContextDirective from_json(const nlohmann::json& j);

  friend bool operator==(const ContextDirective&, const ContextDirective&) = default;
};

}  // namespace ckg
