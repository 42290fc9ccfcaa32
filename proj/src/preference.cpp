#include "contextkg/preference.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include "contextkg/error.hpp"
#include "prompts.hpp"
#include "strings.hpp"

namespace ckg {

using nlohmann::json;

namespace {

constexpr std::string_view kExtractionContract =
    R"({"interest_type": "<type>", "attribute": "<attribute>", "attribute_value": "<value>", "connected_types": ["<type>", ...]})";
constexpr std::string_view kClassificationContract =
    R"({"kind": "neighbor", "metric": "degree" | "<numeric attribute>", "target_type": "<type>"} or {"kind": "edge", "relation": "<relation>", "attribute": "<edge attribute>", "value": "<value>"} or {"kind": "path", "source": "<node name>", "target": "<node name>", "criterion": "shortest" | "homogeneous" | "disjoint"})";

std::string strip_trailing_punctuation(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.back() == '?' || s.back() == '.' || s.back() == '!' || s.back() == ';')) {
    s.remove_suffix(1);
    s = text::trim(s);
  }
  return std::string(s);
}

std::string strip_quotes(std::string_view s) {
  s = text::trim(s);
  auto is_quote = [](char c) { return c == '"' || c == '\'' || c == '`'; };
  while (s.size() >= 2 && is_quote(s.front()) && s.back() == s.front()) {
    s = text::trim(s.substr(1, s.size() - 2));
  }
  // UTF-8 curly quotes.
  const std::string_view open = "\xE2\x80\x9C";
  const std::string_view close = "\xE2\x80\x9D";
  if (s.size() >= 6 && s.substr(0, 3) == open && s.substr(s.size() - 3) == close) {
    s = text::trim(s.substr(3, s.size() - 6));
  }
  return std::string(s);
}

std::string strip_leading_words(std::string s, std::initializer_list<std::string_view> words) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto w : words) {
      if (text::starts_with_icase(s, w) && s.size() > w.size() && s[w.size()] == ' ') {
        s = std::string(text::trim(std::string_view(s).substr(w.size())));
        changed = true;
      }
    }
  }
  return s;
}

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// camelCase / snake_case -> space separated lowercase words.
std::string humanize(std::string_view name) {
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    const char c = name[i];
    if (c == '_' || c == '-') {
      out.push_back(' ');
    } else if (std::isupper(static_cast<unsigned char>(c)) && i > 0 &&
               std::islower(static_cast<unsigned char>(name[i - 1]))) {
      out.push_back(' ');
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

bool phrase_names(std::string_view phrase, std::string_view name) {
  const std::string p = text::to_lower(text::trim(phrase));
  const std::string n = text::to_lower(name);
  const std::string h = humanize(name);
  if (p == n || p == h) return true;
  // "movies" -> "movy" under the -ies rule, so also accept a plain -s plural.
  if (p == n + "s" || p == h + "s") return true;
  return text::singularize(p) == text::singularize(n) || text::singularize(p) == text::singularize(h);
}

std::optional<std::string> match_type_phrase(std::string_view phrase, const Ontology& o) {
  for (const auto& t : o.types) {
    if (phrase_names(phrase, t)) return t;
  }
  for (const auto& [t, aliases] : o.type_aliases) {
    for (const auto& a : aliases) {
      if (phrase_names(phrase, a)) return t;
    }
  }
  return std::nullopt;
}

// Also accepts a trailing head noun: "movie directors" -> Director.
std::optional<std::string> match_type_loose(std::string_view phrase, const Ontology& o) {
  if (auto t = match_type_phrase(phrase, o)) return t;
  const auto w = words_of(phrase);
  if (w.size() > 1) return match_type_phrase(w.back(), o);
  return std::nullopt;
}

std::vector<std::string> attribute_phrases(const AttributeSchema& a) {
  std::vector<std::string> out{text::to_lower(a.name), humanize(a.name)};
  std::string dashed = text::to_lower(a.name);
  std::replace(dashed.begin(), dashed.end(), '_', '-');
  out.push_back(dashed);
  for (const auto& alias : a.aliases) out.push_back(text::to_lower(alias));
  return out;
}

const AttributeSchema* resolve_attribute(const Ontology& o, std::string_view type, std::string_view phrase) {
  const auto it = o.attributes.find(std::string(type));
  if (it == o.attributes.end()) return nullptr;
  const std::string p = text::to_lower(text::trim(phrase));
  for (const auto& a : it->second) {
    for (const auto& candidate : attribute_phrases(a)) {
      if (candidate == p) return &a;
    }
  }
  return nullptr;
}

[[noreturn]] void invalid(const std::string& msg) {
  throw ExtractionError(ExtractionError::Kind::Validation, msg);
}

bool contains_word(std::string_view haystack_lower, std::string_view needle_lower) {
  for (std::size_t pos = haystack_lower.find(needle_lower); pos != std::string_view::npos;
       pos = haystack_lower.find(needle_lower, pos + 1)) {
    const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack_lower[pos - 1]));
    const std::size_t end = pos + needle_lower.size();
    const bool right_ok =
        end >= haystack_lower.size() || !std::isalnum(static_cast<unsigned char>(haystack_lower[end]));
    if (left_ok && right_ok) return true;
  }
  return false;
}

bool contains_any_word(std::string_view lower, std::initializer_list<std::string_view> words) {
  return std::any_of(words.begin(), words.end(), [&](std::string_view w) { return contains_word(lower, w); });
}

}  // namespace

std::string schema_summary(const Ontology& o) {
  std::ostringstream out;
  out << "Types: " << text::join(o.types, ", ") << "\n";
  out << "Attributes:\n";
  for (const auto& t : o.types) {
    out << "  " << t << ":";
    const auto it = o.attributes.find(t);
    if (it == o.attributes.end() || it->second.empty()) {
      out << " (none)\n";
      continue;
    }
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      const auto& a = it->second[i];
      out << (i ? ", " : " ") << a.name << " (" << to_string(a.kind) << ")";
    }
    out << "\n";
  }
  out << "Relations:\n";
  for (const auto& r : o.relations) {
    out << "  " << r.source_type << " -" << r.name << "-> " << r.target_type;
    if (const auto ea = o.edge_attribute_values.find(r.name); ea != o.edge_attribute_values.end()) {
      std::vector<std::string> parts;
      for (const auto& [name, values] : ea->second) {
        parts.push_back(values.empty() ? name : name + " in {" + text::join(values, ", ") + "}");
      }
      if (!parts.empty()) out << " [" << text::join(parts, "; ") << "]";
    }
    out << "\n";
  }
  return out.str();
}

std::string canonicalize_value(std::string_view value) {
  std::string v = strip_quotes(value);
  static const std::regex grouped(R"(^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$)");
  static const std::regex plain(R"(^[+-]?(\d+\.?\d*|\.\d+)$)");
  if (std::regex_match(v, grouped) || std::regex_match(v, plain)) {
    std::string digits;
    for (char c : v) {
      if (c != ',') digits.push_back(c);
    }
    if (const auto n = text::parse_number(digits)) return text::format_number(*n);
  }
  return v;
}

UserPreference normalize_preference(UserPreference pref, const Ontology& o) {
  const auto interest = match_type_phrase(pref.interest_type, o);
  if (!interest) invalid("unknown interest type '" + pref.interest_type + "'");
  pref.interest_type = *interest;

  const AttributeSchema* attr = resolve_attribute(o, pref.interest_type, pref.attribute);
  if (!attr) invalid("type '" + pref.interest_type + "' has no attribute '" + pref.attribute + "'");
  pref.attribute = attr->name;

  pref.attribute_value = canonicalize_value(pref.attribute_value);
  if (pref.attribute_value.empty()) invalid("attribute value is empty");

  std::vector<std::string> connected;
  for (const auto& c : pref.connected_types) {
    const auto t = match_type_loose(c, o);
    if (!t) invalid("unknown connected type '" + c + "'");
    if (*t == pref.interest_type) continue;
    if (std::find(connected.begin(), connected.end(), *t) != connected.end()) continue;
    if (!o.adjacent(pref.interest_type, *t)) {
      invalid("type '" + *t + "' is not related to '" + pref.interest_type + "' in the ontology");
    }
    connected.push_back(*t);
  }
  pref.connected_types = std::move(connected);
  if (!(pref.diversity >= 0.0 && pref.diversity <= 1.0)) invalid("diversity must lie in [0, 1]");
  return pref;
}

// ---------------------------------------------------------------------------
// Offline extraction

UserPreference extract_preferences_offline(std::string_view question, const Ontology& o) {
  using Kind = ExtractionError::Kind;
  const std::string q = strip_trailing_punctuation(question);
  if (q.empty()) throw ExtractionError(Kind::NoTemplateMatch, "question is empty");
  if (o.empty()) throw ExtractionError(Kind::UnknownVocabulary, "ontology is empty");

  static constexpr std::string_view kVerbs[] = {"find", "show", "list", "display", "get"};
  std::string rest;
  for (auto verb : kVerbs) {
    if (text::starts_with_icase(q, verb) && q.size() > verb.size() && q[verb.size()] == ' ') {
      rest = std::string(text::trim(std::string_view(q).substr(verb.size())));
      break;
    }
  }
  if (rest.empty()) {
    throw ExtractionError(Kind::NoTemplateMatch, "question does not match a known template: '" + q + "'");
  }
  rest = strip_leading_words(rest, {"me", "all", "the", "every"});

  // Interest type: the longest leading word run (up to three words) naming a type.
  const auto rest_words = words_of(rest);
  std::optional<std::string> interest;
  std::size_t consumed_words = 0;
  for (std::size_t n = std::min<std::size_t>(3, rest_words.size()); n >= 1; --n) {
    std::vector<std::string> head(rest_words.begin(), rest_words.begin() + static_cast<long>(n));
    std::string phrase = text::join(head, " ");
    while (!phrase.empty() && phrase.back() == ',') phrase.pop_back();
    if (auto t = match_type_phrase(phrase, o)) {
      interest = t;
      consumed_words = n;
      break;
    }
  }
  if (!interest) {
    throw ExtractionError(Kind::UnknownVocabulary,
                          "'" + (rest_words.empty() ? rest : rest_words.front()) + "' is not a type in the ontology");
  }
  std::string tail;
  {
    std::vector<std::string> t(rest_words.begin() + static_cast<long>(consumed_words), rest_words.end());
    tail = text::join(t, " ");
  }
  if (!tail.empty() && tail.front() == ',') tail = std::string(text::trim(std::string_view(tail).substr(1)));

  // Split "<filter> [, | and | with] their <connected list>".
  std::string filter = tail;
  std::string connected_text;
  const std::string tail_lower = text::to_lower(tail);
  for (std::size_t pos = tail_lower.find("their"); pos != std::string::npos; pos = tail_lower.find("their", pos + 1)) {
    const bool left_ok = pos == 0 || tail_lower[pos - 1] == ' ' || tail_lower[pos - 1] == ',';
    const bool right_ok = pos + 5 == tail_lower.size() || tail_lower[pos + 5] == ' ';
    if (!left_ok || !right_ok) continue;
    filter = std::string(text::trim(std::string_view(tail).substr(0, pos)));
    connected_text = std::string(text::trim(std::string_view(tail).substr(pos + 5)));
    for (bool changed = true; changed;) {
      changed = false;
      for (std::string_view suffix : {" and", " with", ",", " along"}) {
        if (filter.size() >= suffix.size() &&
            text::iequals(std::string_view(filter).substr(filter.size() - suffix.size()), suffix)) {
          filter = std::string(text::trim(std::string_view(filter).substr(0, filter.size() - suffix.size())));
          changed = true;
        }
      }
    }
    break;
  }

  if (filter.empty()) {
    throw ExtractionError(Kind::NoTemplateMatch, "question names no attribute filter: '" + q + "'");
  }
  // Longest attribute phrase at the start of the filter; connector words are
  // only stripped when the phrase itself does not start with them.
  const AttributeSchema* attr = nullptr;
  std::size_t attr_len = 0;
  auto match_attribute = [&](const std::string& f) {
    const std::string lower = text::to_lower(f);
    const auto it = o.attributes.find(*interest);
    if (it == o.attributes.end()) return;
    for (const auto& a : it->second) {
      for (const auto& phrase : attribute_phrases(a)) {
        if (phrase.size() <= attr_len || !lower.starts_with(phrase)) continue;
        if (lower.size() > phrase.size()) {
          const char next = lower[phrase.size()];
          if (next != ' ' && next != ':' && next != '=') continue;
        }
        attr = &a;
        attr_len = phrase.size();
      }
    }
  };
  match_attribute(filter);
  while (!attr) {
    const std::string stripped = strip_leading_words(
        filter, {"with", "where", "whose", "having", "that", "have", "has", "which", "in", "of", "from", "for", "by"});
    if (stripped == filter || stripped.empty()) break;
    filter = std::string(text::trim(std::string_view(stripped)));
    match_attribute(filter);
  }
  if (!attr) {
    throw ExtractionError(Kind::UnknownVocabulary,
                          "no attribute of '" + *interest + "' matches '" + filter + "'");
  }
  std::string value(text::trim(std::string_view(filter).substr(attr_len)));
  while (!value.empty() && (value.front() == ':' || value.front() == '=')) {
    value = std::string(text::trim(std::string_view(value).substr(1)));
  }
  value = strip_leading_words(value, {"is", "of", "equals", "equal", "to"});
  value = canonicalize_value(value);
  if (value.empty()) throw ExtractionError(Kind::NoTemplateMatch, "question names no attribute value");

  UserPreference pref;
  pref.interest_type = *interest;
  pref.attribute = attr->name;
  pref.attribute_value = value;
  if (!connected_text.empty()) {
    std::string normalized = connected_text;
    for (std::string_view sep : {", and ", " and ", " as well as ", " plus "}) {
      for (std::size_t pos = text::ifind(normalized, sep); pos != std::string::npos;
           pos = text::ifind(normalized, sep, pos + 1)) {
        normalized.replace(pos, sep.size(), ",");
      }
    }
    for (const auto& raw : text::split(normalized, ',')) {
      std::string item = strip_leading_words(std::string(text::trim(raw)), {"the", "their", "its", "also", "all"});
      if (item.empty()) continue;
      const auto t = match_type_loose(item, o);
      if (!t) throw ExtractionError(Kind::UnknownVocabulary, "'" + item + "' is not a type in the ontology");
      pref.connected_types.push_back(*t);
    }
  }
  try {
    return normalize_preference(std::move(pref), o);
  } catch (const ExtractionError& e) {
    throw ExtractionError(Kind::UnknownVocabulary, e.what());
  }
}

// ---------------------------------------------------------------------------
// Live extraction

namespace {

UserPreference parse_extraction(const std::string& completion, const Ontology& o) {
  const auto obj = parse_completion_object(completion);
  if (!obj) throw ExtractionError(ExtractionError::Kind::Unparseable, "completion is not a JSON object");
  UserPreference pref;
  auto need_string = [&](const char* field) {
    const auto it = obj->find(field);
    if (it == obj->end()) {
      throw ExtractionError(ExtractionError::Kind::Unparseable, std::string("missing field '") + field + "'");
    }
    if (it->is_number()) return text::format_number(it->get<double>());
    if (!it->is_string()) {
      throw ExtractionError(ExtractionError::Kind::Unparseable, std::string("field '") + field + "' must be a string");
    }
    return it->get<std::string>();
  };
  pref.interest_type = need_string("interest_type");
  pref.attribute = need_string("attribute");
  pref.attribute_value = need_string("attribute_value");
  if (const auto c = obj->find("connected_types"); c != obj->end()) {
    if (!c->is_array()) throw ExtractionError(ExtractionError::Kind::Unparseable, "connected_types must be an array");
    for (const auto& t : *c) {
      if (!t.is_string()) throw ExtractionError(ExtractionError::Kind::Unparseable, "connected_types entries must be strings");
      pref.connected_types.push_back(t.get<std::string>());
    }
  }
  return normalize_preference(std::move(pref), o);
}

Prompt extraction_prompt(std::string_view question, const Ontology& o) {
  Prompt p;
  p.task = "extract_preferences";
  p.key = std::string(question);
  p.messages.push_back({"system", prompts::render(prompts::get(prompts::kExtract), {{"schema", schema_summary(o)}})});
  p.messages.push_back({"user", std::string(question)});
  return p;
}

Prompt repair_prompt(const Prompt& original, const std::string& previous, const std::string& error,
                     std::string_view contract) {
  Prompt p = original;
  p.task = "repair:" + original.task;
  p.messages.push_back({"assistant", previous});
  p.messages.push_back({"user", prompts::render(prompts::get(prompts::kRepair), {{"error", error},
                                                                                 {"previous", previous},
                                                                                 {"contract", std::string(contract)}})});
  return p;
}

}  // namespace

UserPreference extract_preferences(std::string_view question, const Ontology& o, LanguageModelClient& client) {
  using Kind = ExtractionError::Kind;
  if (text::trim(question).empty()) throw ExtractionError(Kind::Unparseable, "question is empty");
  if (o.empty()) throw ExtractionError(Kind::Validation, "ontology is empty");

  std::vector<std::string> log;
  auto call = [&](const Prompt& p) {
    try {
      return client.complete(p);
    } catch (const LlmError& e) {
      log.push_back(e.what());
      throw ExtractionError(e.kind() == LlmError::Kind::Timeout ? Kind::Timeout : Kind::Unparseable,
                            std::string("language model call failed: ") + e.what(), log);
    }
  };

  const Prompt first = extraction_prompt(question, o);
  const std::string completion = call(first);
  try {
    return parse_extraction(completion, o);
  } catch (const ExtractionError& e) {
    log.push_back(std::string("attempt 1: ") + e.what());
  }
  const std::string repaired = call(repair_prompt(first, completion, log.back(), kExtractionContract));
  try {
    return parse_extraction(repaired, o);
  } catch (const ExtractionError& e) {
    log.push_back(std::string("attempt 2: ") + e.what());
    throw ExtractionError(e.kind(), "preference extraction failed after repair: " + std::string(e.what()), log);
  }
}

// ---------------------------------------------------------------------------
// Context classification

namespace {

struct PathNames {
  std::string source;
  std::string target;
};

std::string clean_name(std::string s) {
  s = strip_quotes(strip_trailing_punctuation(s));
  return strip_leading_words(s, {"the", "node"});
}

std::optional<PathNames> extract_path_names(const std::string& description) {
  static const std::regex patterns[] = {
      std::regex(R"(\bhow\s+(?:is\s+|are\s+|does\s+|do\s+)?(.+?)\s+(?:is\s+|are\s+)?(?:connected|related|linked)\s+(?:to|with)\s+(.+))",
                 std::regex::icase),
      std::regex(R"(\bpaths?\s+(?:from|between)\s+(.+?)\s+(?:to|and)\s+(.+))", std::regex::icase),
      std::regex(R"(\bconnect(?:s|ion|ions)?\s+(?:between\s+)?(.+?)\s+(?:and|to|with)\s+(.+))", std::regex::icase),
      std::regex(R"(\bfrom\s+(.+?)\s+to\s+(.+))", std::regex::icase),
  };
  const std::string d = strip_trailing_punctuation(description);
  for (const auto& re : patterns) {
    std::smatch m;
    if (std::regex_search(d, m, re)) {
      PathNames names{clean_name(m[1].str()), clean_name(m[2].str())};
      if (!names.source.empty() && !names.target.empty()) return names;
    }
  }
  return std::nullopt;
}

struct EdgeMatch {
  std::optional<std::string> relation;
  std::optional<std::string> attribute;
  std::optional<std::string> value;
};

EdgeMatch find_edge_mentions(const std::string& lower, const Ontology& o) {
  EdgeMatch m;
  std::size_t best_relation = 0;
  for (const auto& r : o.relations) {
    for (const auto& phrase : {text::to_lower(r.name), humanize(r.name)}) {
      if (phrase.size() > best_relation && contains_word(lower, phrase)) {
        m.relation = r.name;
        best_relation = phrase.size();
      }
    }
  }
  std::size_t best_value = 0;
  for (const auto& [relation, attrs] : o.edge_attribute_values) {
    for (const auto& [name, values] : attrs) {
      for (const auto& v : values) {
        const std::string lv = text::to_lower(v);
        std::string spaced = lv;
        std::replace(spaced.begin(), spaced.end(), '-', ' ');
        if (lv.size() <= best_value) continue;
        if (contains_word(lower, lv) || contains_word(lower, spaced)) {
          best_value = lv.size();
          m.attribute = name;
          m.value = v;
          if (!best_relation) m.relation = relation;
        }
      }
    }
  }
  return m;
}

std::optional<std::string> mentioned_type(const std::string& lower, const UserPreference& pref, const Ontology& o) {
  std::vector<std::string> order;
  if (!pref.interest_type.empty()) order.push_back(pref.interest_type);
  order.insert(order.end(), pref.connected_types.begin(), pref.connected_types.end());
  for (const auto& t : o.types) order.push_back(t);
  for (const auto& t : order) {
    const std::string l = text::to_lower(t);
    if (contains_word(lower, l) || contains_word(lower, l + "s") || contains_word(lower, humanize(t))) return t;
    if (const auto a = o.type_aliases.find(t); a != o.type_aliases.end()) {
      for (const auto& alias : a->second) {
        if (contains_word(lower, text::to_lower(alias))) return t;
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> mentioned_numeric_attribute(const std::string& lower, const std::string& type,
                                                       const Ontology& o) {
  const auto it = o.attributes.find(type);
  if (it == o.attributes.end()) return std::nullopt;
  for (const auto& a : it->second) {
    if (a.kind != AttributeKind::Numeric) continue;
    for (const auto& phrase : attribute_phrases(a)) {
      if (contains_word(lower, phrase)) return a.name;
    }
  }
  return std::nullopt;
}

ContextDirective validate_directive(ContextDirective d, const UserPreference& pref, const Ontology& o) {
  using Kind = ClassificationError::Kind;
  if (!d.well_formed()) {
    throw ClassificationError(Kind::Unparseable, "directive is missing fields required for kind '" +
                                                     std::string(to_string(d.kind)) + "'");
  }
  switch (d.kind) {
    case ContextKind::Neighbor: {
      if (!d.target_type) d.target_type = pref.interest_type;
      const auto t = match_type_phrase(*d.target_type, o);
      if (!t) throw ClassificationError(Kind::UnknownEntity, "unknown type '" + *d.target_type + "'");
      d.target_type = *t;
      if (d.metric->kind == NeighborMetric::Kind::Attribute) {
        const AttributeSchema* a = resolve_attribute(o, *t, d.metric->attribute);
        if (!a) throw ClassificationError(Kind::UnknownEntity, "type '" + *t + "' has no attribute '" + d.metric->attribute + "'");
        d.metric->attribute = a->name;
      }
      break;
    }
    case ContextKind::Edge: {
      if (d.predicate->relation) {
        const auto it = std::find_if(o.relations.begin(), o.relations.end(), [&](const Relation& r) {
          return text::iequals(r.name, *d.predicate->relation) || humanize(r.name) == text::to_lower(*d.predicate->relation);
        });
        if (it == o.relations.end()) {
          throw ClassificationError(Kind::UnknownEntity, "unknown relation '" + *d.predicate->relation + "'");
        }
        d.predicate->relation = it->name;
      }
      if (d.predicate->attribute) {
        bool found = false;
        for (const auto& [relation, attrs] : o.edge_attribute_values) {
          if (d.predicate->relation && relation != *d.predicate->relation) continue;
          if (attrs.contains(*d.predicate->attribute)) found = true;
        }
        if (!found) throw ClassificationError(Kind::UnknownEntity, "unknown edge attribute '" + *d.predicate->attribute + "'");
      }
      break;
    }
    case ContextKind::Path:
      break;
  }
  return d;
}

ContextDirective parse_classification(const std::string& completion, std::string_view description,
                                      const UserPreference& pref, const Ontology& o) {
  using Kind = ClassificationError::Kind;
  const auto obj = parse_completion_object(completion);
  if (!obj) throw ClassificationError(Kind::Unparseable, "completion is not a JSON object");
  const auto kind_it = obj->find("kind");
  if (kind_it == obj->end() || !kind_it->is_string()) throw ClassificationError(Kind::Unparseable, "missing 'kind'");
  const auto kind = parse_context_kind(kind_it->get<std::string>());
  if (!kind) throw ClassificationError(Kind::Unclassifiable, "unknown kind '" + kind_it->get<std::string>() + "'");

  auto opt_string = [&](const char* field) -> std::optional<std::string> {
    const auto it = obj->find(field);
    if (it == obj->end() || it->is_null()) return std::nullopt;
    if (it->is_number()) return text::format_number(it->get<double>());
    if (!it->is_string()) throw ClassificationError(Kind::Unparseable, std::string("field '") + field + "' must be a string");
    auto s = std::string(text::trim(it->get<std::string>()));
    if (s.empty()) return std::nullopt;
    return s;
  };

  ContextDirective d;
  d.kind = *kind;
  d.description = std::string(description);
  switch (d.kind) {
    case ContextKind::Neighbor: {
      const auto metric = opt_string("metric").value_or("degree");
      d.metric = text::iequals(metric, "degree") ? NeighborMetric{NeighborMetric::Kind::Degree, {}}
                                                 : NeighborMetric{NeighborMetric::Kind::Attribute, metric};
      d.target_type = opt_string("target_type");
      break;
    }
    case ContextKind::Edge: {
      EdgePredicate p{opt_string("relation"), opt_string("attribute"), opt_string("value")};
      d.predicate = p;
      break;
    }
    case ContextKind::Path: {
      d.path_source = opt_string("source");
      d.path_target = opt_string("target");
      const auto c = opt_string("criterion").value_or("shortest");
      d.criterion = parse_path_criterion(c);
      if (!d.criterion) throw ClassificationError(Kind::Unparseable, "unknown path criterion '" + c + "'");
      break;
    }
  }
  return validate_directive(std::move(d), pref, o);
}

}  // namespace

ContextDirective classify_context_offline(std::string_view description, const UserPreference& pref,
                                          const Ontology& o) {
  using Kind = ClassificationError::Kind;
  const std::string desc(text::trim(description));
  if (desc.empty()) throw ClassificationError(Kind::Unclassifiable, "description is empty");
  const std::string lower = text::to_lower(desc);

  ContextDirective d;
  d.description = desc;

  const bool path_words =
      contains_any_word(lower, {"path", "paths", "route", "routes"}) ||
      std::regex_search(lower, std::regex(R"(\b(connected|related|linked)\s+(to|with)\b)")) ||
      contains_any_word(lower, {"connection between", "connections between"});
  if (path_words) {
    if (auto names = extract_path_names(desc)) {
      d.kind = ContextKind::Path;
      d.path_source = names->source;
      d.path_target = names->target;
      if (contains_any_word(lower, {"disjoint", "independent", "separate"})) {
        d.criterion = PathCriterion::Disjoint;
      } else if (contains_any_word(lower, {"homogeneous", "same relation", "same relationship", "same type",
                                           "single relation", "one relation"})) {
        d.criterion = PathCriterion::Homogeneous;
      } else {
        d.criterion = PathCriterion::Shortest;
      }
      return validate_directive(std::move(d), pref, o);
    }
  }

  const EdgeMatch edge = find_edge_mentions(lower, o);
  const bool edge_words = contains_any_word(lower, {"edge", "edges", "relationship", "relationships", "relation",
                                                    "relations", "contribution", "contributions", "link", "links"});
  if ((edge_words || edge.value) && (edge.relation || edge.attribute)) {
    d.kind = ContextKind::Edge;
    d.predicate = EdgePredicate{edge.relation, edge.attribute, edge.value};
    return validate_directive(std::move(d), pref, o);
  }

  const bool neighbor_words =
      contains_any_word(lower, {"most", "prolific", "important", "influential", "central", "top", "highest",
                                "largest", "biggest", "busiest", "key", "emphasize", "emphasise", "size",
                                "popular", "prominent", "hubs", "hub"});
  if (neighbor_words) {
    d.kind = ContextKind::Neighbor;
    d.target_type = mentioned_type(lower, pref, o).value_or(pref.interest_type);
    if (auto attr = mentioned_numeric_attribute(lower, *d.target_type, o)) {
      d.metric = NeighborMetric{NeighborMetric::Kind::Attribute, *attr};
    } else {
      d.metric = NeighborMetric{NeighborMetric::Kind::Degree, {}};
    }
    return validate_directive(std::move(d), pref, o);
  }
  if (edge_words) {
    throw ClassificationError(Kind::Unclassifiable,
                              "edge description names no known relation or edge attribute value: '" + desc + "'");
  }
  if (path_words) {
    throw ClassificationError(Kind::Unclassifiable, "path description must name a source and a target: '" + desc + "'");
  }
  throw ClassificationError(Kind::Unclassifiable, "cannot classify context description: '" + desc + "'");
}

ContextDirective classify_context(std::string_view description, const UserPreference& pref, const Ontology& o,
                                  LanguageModelClient& client) {
  using Kind = ClassificationError::Kind;
  if (text::trim(description).empty()) throw ClassificationError(Kind::Unclassifiable, "description is empty");
  Prompt first;
  first.task = "classify_context";
  first.key = std::string(text::trim(description));
  first.messages.push_back({"system", prompts::render(prompts::get(prompts::kClassify),
                                                      {{"schema", schema_summary(o)},
                                                       {"preference", pref.to_json().dump()}})});
  first.messages.push_back({"user", first.key});

  auto call = [&](const Prompt& p) {
    try {
      return client.complete(p);
    } catch (const LlmError& e) {
      throw ClassificationError(e.kind() == LlmError::Kind::Timeout ? Kind::Timeout : Kind::Unparseable,
                                std::string("language model call failed: ") + e.what());
    }
  };
  const std::string completion = call(first);
  std::string error;
  try {
    return parse_classification(completion, first.key, pref, o);
  } catch (const ClassificationError& e) {
    error = e.what();
  }
  const std::string repaired = call(repair_prompt(first, completion, error, kClassificationContract));
  try {
    return parse_classification(repaired, first.key, pref, o);
  } catch (const ClassificationError& e) {
    throw ClassificationError(e.kind() == Kind::UnknownEntity ? Kind::UnknownEntity : Kind::Unclassifiable,
                              "context classification failed after repair: " + std::string(e.what()));
  }
}

}  // namespace ckg
