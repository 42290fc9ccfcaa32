#include "contextkg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "contextkg/error.hpp"
#include "prompts.hpp"
#include "random.hpp"
#include "strings.hpp"

namespace ckg {

using nlohmann::json;

std::string_view to_string(ClusterKind kind) { return kind == ClusterKind::Numeric ? "numeric" : "text"; }

std::size_t ClusterSet::node_count() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.members.size();
  return n;
}

std::optional<int> ClusterSet::cluster_of(std::string_view node_id) const {
  for (const auto& c : clusters) {
    if (std::binary_search(c.members.begin(), c.members.end(), node_id,
                           [](const auto& a, const auto& b) { return std::string_view(a) < std::string_view(b); })) {
      return c.id;
    }
  }
  return std::nullopt;
}

json ClusterSet::to_json() const {
  json out = {{"attribute", attribute}, {"kind", to_string(kind)}, {"clusters", json::array()}};
  for (const auto& c : clusters) {
    out["clusters"].push_back({{"id", c.id}, {"label", c.label}, {"size", c.members.size()}, {"members", c.members}});
  }
  return out;
}

namespace {

constexpr const char* kMissingLabel = "n/a";

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Sorts members by id and keeps the parallel attribute vectors aligned.
void sort_members(Cluster& c) {
  std::vector<std::size_t> order(c.members.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.members[a] < c.members[b]; });
  Cluster sorted = c;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.members[i] = c.members[order[i]];
    if (!c.values.empty()) sorted.values[i] = c.values[order[i]];
    if (!c.texts.empty()) sorted.texts[i] = c.texts[order[i]];
  }
  c = std::move(sorted);
}

void renumber(ClusterSet& set) {
  for (std::size_t i = 0; i < set.clusters.size(); ++i) set.clusters[i].id = static_cast<int>(i);
}

}  // namespace

ClusterSet cluster_numeric(std::vector<std::pair<std::string, double>> values, const DbscanOptions& options) {
  ClusterSet set;
  set.kind = ClusterKind::Numeric;
  if (values.empty()) return set;
  for (const auto& [id, v] : values) {
    if (!std::isfinite(v)) throw Error("cluster_numeric: value of '" + id + "' is not finite");
  }
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  const std::size_t n = values.size();
  const double lo = values.front().second;
  const double span = values.back().second - lo;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = span > 0.0 ? (values[i].second - lo) / span : 0.0;

  // Sorted 1-D data: each neighbourhood is a contiguous index range.
  const double eps = options.eps + 1e-12;
  std::vector<std::size_t> first(n), last(n);
  for (std::size_t i = 0, a = 0, b = 0; i < n; ++i) {
    while (x[i] - x[a] > eps) ++a;
    if (b < i) b = i;
    while (b + 1 < n && x[b + 1] - x[i] <= eps) ++b;
    first[i] = a;
    last[i] = b;
  }
  auto is_core = [&](std::size_t i) { return static_cast<int>(last[i] - first[i] + 1) >= options.min_pts; };

  constexpr int kUnassigned = -1;
  std::vector<int> label(n, kUnassigned);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnassigned || !is_core(i)) continue;
    const int c = next++;
    std::vector<std::size_t> frontier{i};
    label[i] = c;
    while (!frontier.empty()) {
      const std::size_t p = frontier.back();
      frontier.pop_back();
      if (!is_core(p)) continue;
      for (std::size_t q = first[p]; q <= last[p]; ++q) {
        if (label[q] == kUnassigned) {
          label[q] = c;
          frontier.push_back(q);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kUnassigned) label[i] = next++;  // noise -> singleton
  }

  std::vector<Cluster> clusters(static_cast<std::size_t>(next));
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = clusters[static_cast<std::size_t>(label[i])];
    c.members.push_back(values[i].first);
    c.values.push_back(values[i].second);
  }
  for (auto& c : clusters) {
    sort_members(c);
    c.centroid = {std::accumulate(c.values.begin(), c.values.end(), 0.0) / static_cast<double>(c.values.size())};
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.centroid[0] != b.centroid[0] ? a.centroid[0] < b.centroid[0] : a.members.front() < b.members.front();
  });
  set.clusters = std::move(clusters);
  renumber(set);
  return set;
}

std::vector<std::vector<double>> HashedTermEmbedder::embed(const std::vector<std::string>& texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::vector<double> v(dimension_, 0.0);
    for (const auto& token : text::tokenize(t)) {
      std::uint64_t h = 0xcbf29ce484222325ULL;
      for (unsigned char ch : token) {
        h ^= ch;
        h *= 0x100000001b3ULL;
      }
      v[h % dimension_] += 1.0;
    }
    double norm = 0.0;
    for (double e : v) norm += e * e;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& e : v) e /= norm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

double wcss(const std::vector<std::vector<double>>& points, const std::vector<int>& assignment) {
  std::map<int, std::vector<double>> sums;
  std::map<int, std::size_t> counts;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& s = sums[assignment[i]];
    if (s.empty()) s.assign(points[i].size(), 0.0);
    for (std::size_t d = 0; d < points[i].size(); ++d) s[d] += points[i][d];
    ++counts[assignment[i]];
  }
  for (auto& [c, s] : sums) {
    for (double& e : s) e /= static_cast<double>(counts[c]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += squared_distance(points[i], sums[assignment[i]]);
  return total;
}

namespace {

KMeansResult kmeans_once(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed,
                         const KMeansOptions& options) {
  const std::size_t n = points.size();
  const std::size_t kk = static_cast<std::size_t>(k);
  rng::Stream rand(seed);

  // k-means++ seeding.
  std::vector<std::vector<double>> centroids;
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rand.below(n));
  centroids.push_back(points[first]);
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (centroids.size() < kk) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      double r = rand.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        r -= d2[i];
        if (r < 0.0) break;
      }
    } else {
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    if (pick == n) pick = 0;
    chosen[pick] = true;
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
  }

  KMeansResult res;
  res.assignment.assign(n, -1);
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    res.iterations = iter;
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points[i], centroids[0]);
      for (std::size_t c = 1; c < kk; ++c) {
        const double d = squared_distance(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (res.assignment[i] != best) changed = true;
      res.assignment[i] = best;
      inertia += best_d;
    }
    std::vector<std::vector<double>> sums(kk, std::vector<double>(points[0].size(), 0.0));
    std::vector<std::size_t> counts(kk, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.assignment[i]);
      for (std::size_t d = 0; d < points[i].size(); ++d) sums[c][d] += points[i][d];
      ++counts[c];
    }
    for (std::size_t c = 0; c < kk; ++c) {
      if (!counts[c]) continue;  // empty cluster keeps its centroid
      for (double& e : sums[c]) e /= static_cast<double>(counts[c]);
      centroids[c] = std::move(sums[c]);
    }
    if (!changed) break;
    if (std::isfinite(previous) && previous - inertia <= options.tolerance * previous) break;
    previous = inertia;
  }
  res.centroids = std::move(centroids);
  res.wcss = wcss(points, res.assignment);
  return res;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, const KMeansOptions& options) {
  if (points.empty()) throw Error("kmeans: no points");
  if (k < 1 || static_cast<std::size_t>(k) > points.size()) {
    throw Error("kmeans: k must lie in [1, " + std::to_string(points.size()) + "]");
  }
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    auto res = kmeans_once(points, k, rng::derive(options.seed, static_cast<std::uint64_t>(r)), options);
    if (res.wcss < best.wcss) best = std::move(res);
  }
  return best;
}

int elbow_k(const std::vector<double>& w) {
  if (w.size() < 3) return 1;
  int best_k = 2;
  double best = w[0] - 2.0 * w[1] + w[2];
  for (std::size_t k = 3; k + 1 <= w.size(); ++k) {
    const double d2 = w[k - 2] - 2.0 * w[k - 1] + w[k];
    if (d2 > best + 1e-12 * std::max(1.0, std::abs(best))) {
      best = d2;
      best_k = static_cast<int>(k);
    }
  }
  return best_k;
}

int select_k_wcss(const std::vector<std::vector<double>>& points, int k_max, const KMeansOptions& options) {
  if (points.size() < 3) throw Error("select_k_wcss: at least 3 vectors are required");
  if (k_max < 2) throw Error("select_k_wcss: k_max must be at least 2");
  const int n = static_cast<int>(points.size());
  const int top = std::min(k_max, n - 1);
  std::vector<double> curve;
  for (int k = 1; k <= top + 1; ++k) curve.push_back(k == n ? 0.0 : kmeans(points, k, options).wcss);
  return elbow_k(curve);
}

ClusterSet cluster_text(std::vector<std::pair<std::string, std::string>> texts, const EmbeddingProvider& embedder,
                        const TextClusterOptions& options) {
  ClusterSet set;
  set.kind = ClusterKind::Text;
  if (texts.empty()) return set;
  std::sort(texts.begin(), texts.end());
  std::vector<std::string> raw;
  raw.reserve(texts.size());
  for (const auto& [id, t] : texts) raw.push_back(t);
  const auto X = embedder.embed(raw);
  if (X.size() != texts.size()) throw Error("embedding provider returned a wrong number of vectors");
  const std::size_t n = X.size();

  bool identical = true;
  for (std::size_t i = 1; i < n && identical; ++i) identical = squared_distance(X[i], X[0]) < 1e-18;

  std::vector<int> assignment(n, 0);
  int k = 1;
  if (!identical && n == 2) {
    k = 2;
    assignment = {0, 1};
  } else if (!identical && n >= 3) {
    k = select_k_wcss(X, options.k_max, options.kmeans);
    if (k > 1) assignment = kmeans(X, k, options.kmeans).assignment;
  }

  std::vector<Cluster> clusters(static_cast<std::size_t>(k));
  std::vector<std::vector<std::size_t>> rows(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = clusters[static_cast<std::size_t>(assignment[i])];
    c.members.push_back(texts[i].first);
    c.texts.push_back(texts[i].second);
    rows[static_cast<std::size_t>(assignment[i])].push_back(i);
  }
  std::vector<Cluster> nonempty;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].members.empty()) continue;
    std::vector<double> centroid(X[0].size(), 0.0);
    for (auto i : rows[c]) {
      for (std::size_t d = 0; d < centroid.size(); ++d) centroid[d] += X[i][d];
    }
    for (double& e : centroid) e /= static_cast<double>(rows[c].size());
    clusters[c].centroid = std::move(centroid);
    nonempty.push_back(std::move(clusters[c]));
  }
  // Canonical pre-order (smallest member id) so seriation ties are input-order independent.
  std::sort(nonempty.begin(), nonempty.end(),
            [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });

  // Greedy seriation: start at the centroid farthest from the global mean.
  std::vector<double> mean(nonempty.front().centroid.size(), 0.0);
  for (const auto& c : nonempty) {
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += c.centroid[d] / static_cast<double>(nonempty.size());
  }
  std::vector<bool> used(nonempty.size(), false);
  std::vector<std::size_t> order;
  std::size_t current = 0;
  double far = -1.0;
  for (std::size_t i = 0; i < nonempty.size(); ++i) {
    const double d = squared_distance(nonempty[i].centroid, mean);
    if (d > far + 1e-15) {
      far = d;
      current = i;
    }
  }
  while (true) {
    used[current] = true;
    order.push_back(current);
    std::size_t best = nonempty.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nonempty.size(); ++i) {
      if (used[i]) continue;
      const double d = squared_distance(nonempty[i].centroid, nonempty[current].centroid);
      if (d < best_d - 1e-15) {
        best_d = d;
        best = i;
      }
    }
    if (best == nonempty.size()) break;
    current = best;
  }
  for (auto i : order) {
    sort_members(nonempty[i]);
    set.clusters.push_back(std::move(nonempty[i]));
  }
  renumber(set);
  return set;
}

namespace {

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "a",    "an",   "and",  "are",  "as",    "at",   "be",   "by",   "for",  "from", "in",
      "into", "is",   "it",   "its",  "of",    "on",   "or",   "that", "the",  "their", "this",
      "to",   "via",  "with", "using", "toward", "towards", "we", "our", "new"};
  return words;
}

std::string term_frequency_label(const std::vector<std::string>& texts) {
  std::map<std::string, int> tf;
  for (const auto& t : texts) {
    for (const auto& token : text::tokenize(t)) {
      if (!stopwords().contains(token)) ++tf[token];
    }
  }
  std::vector<std::pair<std::string, int>> ranked(tf.begin(), tf.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> top;
  for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) top.push_back(ranked[i].first);
  if (top.empty()) return texts.empty() ? std::string(kMissingLabel) : std::string(text::trim(texts.front()));
  return text::join(top, "/");
}

std::optional<std::string> client_label(const std::vector<std::string>& texts, LanguageModelClient& client) {
  std::set<std::string> unique(texts.begin(), texts.end());
  const std::string joined = text::join(std::vector<std::string>(unique.begin(), unique.end()), "\n");
  Prompt p;
  p.task = "label_cluster";
  p.key = joined;
  p.messages.push_back({"system", prompts::render(prompts::get(prompts::kClusterLabel), {{"texts", joined}})});
  p.messages.push_back({"user", joined});
  std::string completion;
  try {
    completion = client.complete(p);
  } catch (const LlmError&) {
    return std::nullopt;
  }
  // Models sometimes answer in JSON despite the plain-text contract.
  if (const auto obj = parse_completion_object(completion)) {
    for (const char* key : {"label", "topic"}) {
      if (obj->contains(key) && (*obj)[key].is_string()) completion = (*obj)[key].get<std::string>();
    }
  }
  const auto line_end = completion.find('\n');
  std::string line(text::trim(std::string_view(completion).substr(0, line_end)));
  while (!line.empty() && std::string_view("\"'`.").find(line.back()) != std::string_view::npos) line.pop_back();
  while (!line.empty() && std::string_view("\"'`").find(line.front()) != std::string_view::npos) line.erase(0, 1);
  std::vector<std::string> words;
  for (const auto& w : text::split(line, ' ')) {
    if (!text::trim(w).empty() && words.size() < 4) words.emplace_back(text::trim(w));
  }
  if (words.empty()) return std::nullopt;
  return text::join(words, " ");
}

}  // namespace

ClusterSet label_clusters(ClusterSet set, LanguageModelClient* client) {
  int precision = 0;
  if (set.kind == ClusterKind::Numeric) {
    for (const auto& c : set.clusters) {
      for (double v : c.values) precision = std::max(precision, text::decimal_places(v));
    }
  }
  for (auto& c : set.clusters) {
    if (c.label == kMissingLabel) continue;
    if (set.kind == ClusterKind::Numeric) {
      if (c.values.empty()) continue;
      const double mean = std::accumulate(c.values.begin(), c.values.end(), 0.0) / static_cast<double>(c.values.size());
      const std::string fixed = text::format_fixed(mean, precision);
      c.label = fixed == "-0" ? "0" : fixed;
    } else {
      std::optional<std::string> label;
      if (client) label = client_label(c.texts, *client);
      c.label = label ? *label : term_frequency_label(c.texts);
    }
  }
  return set;
}

ClusterSet cluster_interest_nodes(const KnowledgeGraph& kg, const std::vector<std::string>& interest,
                                  const std::string& attribute, const EmbeddingProvider& embedder,
                                  const DbscanOptions& dbscan, const TextClusterOptions& text_options) {
  std::optional<AttributeKind> kind;
  std::vector<std::string> missing;
  std::vector<std::pair<std::string, double>> numbers;
  std::vector<std::pair<std::string, std::string>> texts;
  for (const auto& id : interest) {
    const Node* node = kg.find_node(id);
    if (!node) throw NotFoundError("unknown interest node '" + id + "'");
    if (!kind) kind = kg.attribute_kind(node->type, attribute);
    const auto it = node->attributes.find(attribute);
    if (it == node->attributes.end()) {
      missing.push_back(id);
    } else if (it->second.kind == AttributeKind::Numeric) {
      numbers.emplace_back(id, it->second.number);
    } else {
      texts.emplace_back(id, it->second.text);
    }
  }
  ClusterSet set = kind == AttributeKind::Numeric ? cluster_numeric(std::move(numbers), dbscan)
                                                  : cluster_text(std::move(texts), embedder, text_options);
  set.attribute = attribute;
  if (!missing.empty()) {
    Cluster na;
    na.members = std::move(missing);
    std::sort(na.members.begin(), na.members.end());
    na.label = kMissingLabel;
    na.id = static_cast<int>(set.clusters.size());
    set.clusters.push_back(std::move(na));
  }
  return set;
}

}  // namespace ckg
