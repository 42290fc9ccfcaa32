#pragma once

#include <map>
#include <string>
#include <string_view>

namespace ckg::prompts {

// Template names carry their version, e.g. "extract_preferences.v1".
inline constexpr std::string_view kExtract = "extract_preferences.v1";
inline constexpr std::string_view kClassify = "classify_context.v1";
inline constexpr std::string_view kRepair = "repair.v1";
inline constexpr std::string_view kInsights = "insights.v1";
inline constexpr std::string_view kClusterLabel = "cluster_label.v1";

/// Template text compiled in from prompts/<name>.txt. Throws on unknown names.
std::string_view get(std::string_view name);

/// Replaces every {{key}} with its value; unknown placeholders are left intact.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace ckg::prompts
