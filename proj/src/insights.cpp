#include "contextkg/insights.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "contextkg/context_ops.hpp"
#include "contextkg/error.hpp"
#include "contextkg/preference.hpp"
#include "prompts.hpp"
#include "strings.hpp"

namespace ckg {

using nlohmann::json;

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

std::string quoted(const std::string& label) { return "\"" + label + "\""; }

std::string cluster_ref(int c) { return "cluster:" + std::to_string(c); }

}  // namespace

json FeatureSummary::to_json() const {
  json clusters = json::array();
  for (const auto& [c, size] : cluster_sizes) {
    clusters.push_back({{"id", cluster_ref(c)}, {"label", cluster_labels.count(c) ? cluster_labels.at(c) : ""},
                        {"size", size}});
  }
  json degrees = json::object();
  for (const auto& [type, s] : degree_stats) {
    degrees[type] = {{"min", s.min}, {"median", s.median}, {"max", s.max}};
  }
  json hubs_json = json::array();
  for (const auto& h : hubs) {
    hubs_json.push_back({{"id", h.id}, {"label", h.label}, {"type", h.type}, {"degree", h.degree}});
  }
  json bridges_json = json::array();
  for (const auto& b : bridges) {
    std::vector<std::string> refs;
    for (int c : b.clusters) refs.push_back(cluster_ref(c));
    bridges_json.push_back(
        {{"id", b.id}, {"label", b.label}, {"type", b.type}, {"clusters", refs}, {"degree", b.degree}});
  }
  std::vector<std::string> outliers;
  for (int c : outlier_clusters) outliers.push_back(cluster_ref(c));
  return {{"interest_type", interest_type}, {"clusters", clusters}, {"degree_stats", degrees},
          {"hubs", hubs_json},              {"bridges", bridges_json}, {"outlier_clusters", outliers}};
}

FeatureSummary encode_features(const ContextLayout& layout, const KnowledgeGraph& kg) {
  FeatureSummary f;
  f.interest_type = layout.interest_type;
  for (const auto& [id, c] : layout.cluster_of) ++f.cluster_sizes[c];
  for (const auto& [c, size] : f.cluster_sizes) {
    f.cluster_labels[c] = layout.cluster_labels.count(c) ? layout.cluster_labels.at(c) : std::to_string(c);
  }

  const auto degrees = displayed_degrees(layout);
  std::map<std::string, std::vector<double>> per_type;
  for (const auto& [id, d] : degrees) {
    const auto t = layout.node_type.find(id);
    per_type[t == layout.node_type.end() ? std::string() : t->second].push_back(static_cast<double>(d));
  }
  for (const auto& [type, v] : per_type) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    f.degree_stats[type] = {static_cast<std::size_t>(*lo), median_of(v), static_cast<std::size_t>(*hi)};
  }

  auto fact = [&](const std::string& id) {
    const Node* n = kg.find_node(id);
    return NodeFact{id, n ? n->label : id, n ? n->type : std::string(), degrees.at(id)};
  };
  std::vector<NodeFact> all;
  for (const auto& [id, d] : degrees) {
    if (d > 0) all.push_back(fact(id));
  }
  std::sort(all.begin(), all.end(), [](const NodeFact& a, const NodeFact& b) {
    return a.degree != b.degree ? a.degree > b.degree : a.id < b.id;
  });
  if (all.size() > 5) all.resize(5);
  f.hubs = std::move(all);

  // Link-cluster sets come from the displayed edges, not the pie cache.
  std::map<std::string, std::set<int>> linked;
  for (const auto& e : layout.edges) {
    const auto cs = layout.cluster_of.find(e.source);
    const auto ct = layout.cluster_of.find(e.target);
    if (cs != layout.cluster_of.end() && ct == layout.cluster_of.end()) linked[e.target].insert(cs->second);
    if (ct != layout.cluster_of.end() && cs == layout.cluster_of.end()) linked[e.source].insert(ct->second);
  }
  for (const auto& [id, set] : linked) {
    if (set.size() < 2) continue;
    const NodeFact n = fact(id);
    f.bridges.push_back({id, n.label, n.type, std::vector<int>(set.begin(), set.end()), n.degree});
  }
  std::sort(f.bridges.begin(), f.bridges.end(), [](const BridgeFact& a, const BridgeFact& b) {
    if (a.clusters.size() != b.clusters.size()) return a.clusters.size() > b.clusters.size();
    if (a.degree != b.degree) return a.degree > b.degree;
    return a.id < b.id;
  });

  std::vector<double> sizes;
  for (const auto& [c, s] : f.cluster_sizes) sizes.push_back(static_cast<double>(s));
  const double threshold = std::max(1.0, 0.25 * median_of(sizes));
  for (const auto& [c, s] : f.cluster_sizes) {
    if (static_cast<double>(s) <= threshold) f.outlier_clusters.push_back(c);
  }
  return f;
}

json InsightReport::to_json() const {
  json list = json::array();
  for (const auto& b : bullets) list.push_back({{"text", b.text}, {"refs", b.refs}});
  return {{"bullets", list}, {"fallback_used", fallback_used}, {"validation_log", validation_log}};
}

InsightReport fallback_insights(const FeatureSummary& f) {
  InsightReport r;
  r.fallback_used = true;
  const std::string interest = f.interest_type.empty() ? "interest" : f.interest_type;

  {
    InsightBullet b;
    std::ostringstream s;
    std::size_t total = 0;
    int largest = -1;
    for (const auto& [c, size] : f.cluster_sizes) {
      total += size;
      if (largest < 0 || size > f.cluster_sizes.at(largest)) largest = c;
      b.refs.push_back(cluster_ref(c));
    }
    s << "The view groups " << total << " " << interest << " nodes into " << f.cluster_sizes.size() << " cluster"
      << (f.cluster_sizes.size() == 1 ? "" : "s");
    if (largest >= 0) {
      s << "; the largest is " << f.cluster_labels.at(largest) << " with " << f.cluster_sizes.at(largest) << " nodes";
    }
    s << ".";
    b.text = s.str();
    r.bullets.push_back(std::move(b));
  }
  {
    InsightBullet b;
    if (f.hubs.empty()) {
      b.text = "No displayed node has any visible link.";
    } else {
      std::vector<std::string> parts;
      for (const auto& h : f.hubs) {
        parts.push_back(quoted(h.label) + " (" + h.type + ", " + std::to_string(h.degree) + " links)");
        b.refs.push_back(h.id);
      }
      b.text = "The most connected nodes are " + text::join(parts, ", ") + ".";
    }
    r.bullets.push_back(std::move(b));
  }
  {
    InsightBullet b;
    if (f.bridges.empty()) {
      b.text = "No connected node links to more than one cluster.";
    } else {
      std::vector<std::string> parts;
      for (std::size_t i = 0; i < f.bridges.size() && i < 3; ++i) {
        const auto& br = f.bridges[i];
        std::vector<std::string> labels;
        for (int c : br.clusters) labels.push_back(f.cluster_labels.count(c) ? f.cluster_labels.at(c) : std::to_string(c));
        parts.push_back(quoted(br.label) + " spans " + std::to_string(br.clusters.size()) + " clusters (" +
                        text::join(labels, ", ") + ")");
        b.refs.push_back(br.id);
      }
      b.text = std::to_string(f.bridges.size()) + " connected node" + (f.bridges.size() == 1 ? "" : "s") +
               " bridge clusters; " + text::join(parts, "; ") + ".";
    }
    r.bullets.push_back(std::move(b));
  }
  {
    InsightBullet b;
    std::vector<std::string> parts;
    for (const auto& [type, s] : f.degree_stats) {
      parts.push_back(type + " degree ranges from " + std::to_string(s.min) + " to " + std::to_string(s.max) +
                      " (median " + text::format_number(s.median) + ")");
    }
    b.text = parts.empty() ? "No degree statistics are available." : text::join(parts, "; ") + ".";
    r.bullets.push_back(std::move(b));
  }
  {
    InsightBullet b;
    if (f.outlier_clusters.empty()) {
      b.text = "No cluster is small enough to count as an outlier.";
    } else {
      std::vector<std::string> labels;
      for (int c : f.outlier_clusters) {
        labels.push_back(f.cluster_labels.count(c) ? f.cluster_labels.at(c) : std::to_string(c));
        b.refs.push_back(cluster_ref(c));
      }
      b.text = "Outlier clusters with very few members: " + text::join(labels, ", ") + ".";
    }
    r.bullets.push_back(std::move(b));
  }
  return r;
}

namespace {

std::optional<std::vector<InsightBullet>> parse_bullets(const std::string& completion) {
  const auto obj = parse_completion_object(completion);
  if (!obj) return std::nullopt;
  const auto it = obj->find("bullets");
  if (it == obj->end() || !it->is_array()) return std::nullopt;
  std::vector<InsightBullet> out;
  for (const auto& b : *it) {
    InsightBullet bullet;
    if (b.is_string()) {
      bullet.text = b.get<std::string>();
    } else if (b.is_object() && b.contains("text") && b["text"].is_string()) {
      bullet.text = b["text"].get<std::string>();
      if (b.contains("refs") && b["refs"].is_array()) {
        for (const auto& ref : b["refs"]) {
          if (ref.is_string()) bullet.refs.push_back(ref.get<std::string>());
        }
      }
    } else {
      continue;
    }
    if (!text::trim(bullet.text).empty()) out.push_back(std::move(bullet));
  }
  if (out.empty()) return std::nullopt;
  return out;
}

}  // namespace

InsightReport generate_insights(const FeatureSummary& features, const UserPreference& pref, const Ontology& ontology,
                                LanguageModelClient* client, const std::string& question) {
  if (!client) return fallback_insights(features);
  Prompt p;
  p.task = "generate_insights";
  p.key = question;
  p.messages.push_back({"system", prompts::render(prompts::get(prompts::kInsights),
                                                  {{"preference", pref.to_json().dump()},
                                                   {"schema", schema_summary(ontology)},
                                                   {"features", features.to_json().dump(2)}})});
  p.messages.push_back({"user", question});
  try {
    if (auto bullets = parse_bullets(client->complete(p))) {
      InsightReport r;
      r.bullets = std::move(*bullets);
      return r;
    }
  } catch (const LlmError&) {
  }
  return fallback_insights(features);
}

InsightReport validate_insights(InsightReport report, const KnowledgeGraph& kg, const ContextLayout* layout) {
  std::set<std::string> labels;
  for (const auto& n : kg.nodes()) labels.insert(text::to_lower(n.label));

  for (auto& b : report.bullets) {
    std::string out;
    std::size_t pos = 0;
    while (pos < b.text.size()) {
      const auto open = b.text.find('"', pos);
      if (open == std::string::npos) break;
      const auto close = b.text.find('"', open + 1);
      if (close == std::string::npos) break;
      const std::string name = b.text.substr(open + 1, close - open - 1);
      out.append(b.text, pos, open - pos);
      if (labels.contains(text::to_lower(text::trim(name)))) {
        out.append(b.text, open, close - open + 1);
      } else {
        report.validation_log.push_back(name);
      }
      pos = close + 1;
    }
    out.append(b.text, std::min(pos, b.text.size()), std::string::npos);
    // Tidy the gaps left by removed names.
    std::string tidy;
    for (char c : out) {
      if (c == ' ' && (tidy.empty() || tidy.back() == ' ')) continue;
      if ((c == ',' || c == '.' || c == ';' || c == ')') && !tidy.empty() && tidy.back() == ' ') tidy.pop_back();
      if (c == ',' && !tidy.empty() && tidy.back() == ',') continue;
      tidy.push_back(c);
    }
    b.text = std::string(text::trim(tidy));

    std::vector<std::string> refs;
    for (const auto& ref : b.refs) {
      bool ok = false;
      if (ref.starts_with("cluster:")) {
        const auto n = text::parse_number(std::string_view(ref).substr(8));
        ok = n && (!layout || layout->cluster_labels.contains(static_cast<int>(*n)));
      } else {
        ok = layout ? layout->displays(ref) : kg.find_node(ref) != nullptr;
      }
      if (ok) {
        refs.push_back(ref);
      } else {
        report.validation_log.push_back(ref);
      }
    }
    b.refs = std::move(refs);
  }
  std::erase_if(report.bullets, [](const InsightBullet& b) { return b.text.empty(); });
  return report;
}

}  // namespace ckg
