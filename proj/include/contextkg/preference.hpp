#pragma once

#include <string>
#include <string_view>

#include "contextkg/kg_model.hpp"
#include "contextkg/llm_client.hpp"
#include "contextkg/user_preference.hpp"

namespace ckg {

/// Plain-text schema summary (types, attributes with kinds, relations) used in prompts.
std::string schema_summary(const Ontology& ontology);

/// Trims, strips wrapping quotes and thousands separators from numeric values
/// ("2,016" -> "2016", "7.50" -> "7.5"); text values keep their case.
std::string canonicalize_value(std::string_view value);

/// Resolves names case-insensitively against the ontology (plural forms and
/// aliases accepted), de-duplicates connected types and drops the interest type
/// from them, then checks existence and adjacency. Throws ExtractionError(Validation).
UserPreference normalize_preference(UserPreference pref, const Ontology& ontology);

/// Live extraction through a language model with one repair round-trip.
UserPreference extract_preferences(std::string_view question, const Ontology& ontology,
                                   LanguageModelClient& client);

/// Deterministic template matcher. Recognized shapes (case-insensitive):
///   <verb> <types> [with|where|whose] <attribute> [is] <value> [, | and] [their <types>...]
///   <verb> <types> <attribute alias> <value> [, | and] [their <types>...]
/// where <verb> is find/show/list/display/get.
UserPreference extract_preferences_offline(std::string_view question, const Ontology& ontology);

/// Live classification with one repair round-trip.
ContextDirective classify_context(std::string_view description, const UserPreference& pref,
                                  const Ontology& ontology, LanguageModelClient& client);

/// Keyword classifier. When a description reads as more than one kind the
/// precedence is Path > Edge > Neighbor.
ContextDirective classify_context_offline(std::string_view description, const UserPreference& pref,
                                          const Ontology& ontology);

}  // namespace ckg
