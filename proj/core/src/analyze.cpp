#include "dgmm/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "dgmm/error.hpp"
#include "dgmm/hash.hpp"

namespace dgmm {
namespace {

using Adjacency = std::unordered_map<NodeId, std::vector<NodeId>>;

Adjacency undirected(const WorkingMemory& w) {
  Adjacency adj;
  for (const auto& r : w.relations) {
    adj[r.src].push_back(r.dst);
    adj[r.dst].push_back(r.src);
  }
  return adj;
}

std::set<NodeId> hops(const Adjacency& adj, NodeId v, int k) {
  std::set<NodeId> seen{v};
  std::deque<std::pair<NodeId, int>> queue{{v, 0}};
  while (!queue.empty()) {
    auto [u, d] = queue.front();
    queue.pop_front();
    if (d == k) continue;
    auto it = adj.find(u);
    if (it == adj.end()) continue;
    for (NodeId n : it->second) {
      if (seen.insert(n).second) queue.emplace_back(n, d + 1);
    }
  }
  seen.erase(v);
  return seen;
}

double jaccard_distance(const std::set<NodeId>& a, const std::set<NodeId>& b) {
  std::size_t common = 0;
  for (NodeId x : a) common += b.contains(x);
  std::size_t all = a.size() + b.size() - common;
  if (all == 0) return 0.0;
  return 1.0 - static_cast<double>(common) / static_cast<double>(all);
}

double norm_of_difference(const std::vector<double>& a, const std::vector<double>* b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - (b ? (*b)[i] : 0.0);
    sum += d * d;
  }
  return std::sqrt(sum);
}

void check_params(const EmbeddingParams& p) {
  if (p.dim < 8) {
    throw Error(ErrorKind::invalid_parameters,
                "embedding dimension must be at least 8, got " + std::to_string(p.dim));
  }
  if (p.rounds < 0) {
    throw Error(ErrorKind::invalid_parameters,
                "embedding rounds must be non-negative, got " + std::to_string(p.rounds));
  }
}

void check_hops(int k) {
  if (k < 0) {
    throw Error(ErrorKind::invalid_parameters,
                "hop radius must be non-negative, got " + std::to_string(k));
  }
}

void check_same_cue(const Cue& a, const Cue& b) {
  if (a != b) {
    throw Error(ErrorKind::domain_restriction, "divergence needs recalls under the same cue: [" +
                                                   describe(a) + "] vs [" + describe(b) + "]");
  }
}

bool is_content(const Node& n) {
  return n.type == NodeType::Concept || n.type == NodeType::Element;
}

}  // namespace

const std::vector<double>* EmbeddingSpace::find(NodeId id) const {
  auto it = vectors.find(id);
  return it == vectors.end() ? nullptr : &it->second;
}

std::vector<std::map<NodeId, std::uint64_t>> label_rounds(const WorkingMemory& w,
                                                          const EmbeddingParams& params) {
  check_params(params);
  const Schema& schema = *w.schema;
  std::vector<std::map<NodeId, std::uint64_t>> rounds(1);
  for (const auto& [id, n] : w.nodes) {
    std::uint64_t h = hash_combine(mix64(params.seed), fnv1a(schema.name(n.type)));
    rounds[0][id] = hash_combine(h, fnv1a(n.name));
  }

  // (relation tag, neighbor) per node, both directions.
  std::unordered_map<NodeId, std::vector<std::pair<std::uint64_t, NodeId>>> incident;
  for (const auto& r : w.relations) {
    std::uint64_t tag = fnv1a(schema.name(r.type));
    incident[r.src].emplace_back(tag, r.dst);
    incident[r.dst].emplace_back(tag, r.src);
  }

  for (int round = 1; round <= params.rounds; ++round) {
    const auto& prev = rounds.back();
    std::map<NodeId, std::uint64_t> next;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
    for (const auto& [id, label] : prev) {
      pairs.clear();
      if (auto it = incident.find(id); it != incident.end()) {
        for (const auto& [tag, nb] : it->second) pairs.emplace_back(tag, prev.at(nb));
      }
      std::sort(pairs.begin(), pairs.end());
      std::uint64_t h = hash_combine(label, static_cast<std::uint64_t>(round));
      for (const auto& [tag, nl] : pairs) h = hash_combine(h, hash_combine(tag, nl));
      next[id] = h;
    }
    rounds.push_back(std::move(next));
  }
  return rounds;
}

EmbeddingSpace embed(const WorkingMemory& w, const EmbeddingParams& params) {
  auto rounds = label_rounds(w, params);
  EmbeddingSpace z;
  z.params = params;
  z.cue = w.cue;
  z.source_version = w.version;
  const auto dim = static_cast<std::uint64_t>(params.dim);
  for (const auto& [id, n] : w.nodes) {
    std::vector<double> v(params.dim, 0.0);
    for (std::size_t r = 0; r < rounds.size(); ++r) {
      std::uint64_t h = hash_combine(rounds[r].at(id), r);
      std::uint64_t bucket = mix64(h ^ params.seed) % dim;
      v[bucket] += (mix64(h + 1) >> 63) ? -1.0 : 1.0;
    }
    z.vectors.emplace(id, std::move(v));
  }
  return z;
}

std::set<NodeId> neighborhood(const WorkingMemory& w, NodeId v, int k) {
  check_hops(k);
  if (!w.has_node(v)) return {};
  return hops(undirected(w), v, k);
}

double local_divergence(NodeId v, const WorkingMemory& r1, const WorkingMemory& r2, int k) {
  check_hops(k);
  check_same_cue(r1.cue, r2.cue);
  if (!r1.has_node(v) && !r2.has_node(v)) {
    throw Error(ErrorKind::not_recalled,
                "node " + std::to_string(v.value) + " is in neither recall");
  }
  return jaccard_distance(neighborhood(r1, v, k), neighborhood(r2, v, k));
}

double embedding_divergence(NodeId v, const EmbeddingSpace& z1, const EmbeddingSpace& z2) {
  if (z1.params != z2.params) {
    throw Error(ErrorKind::incomparable, "embedding spaces were built with different parameters");
  }
  check_same_cue(z1.cue, z2.cue);
  const auto* a = z1.find(v);
  const auto* b = z2.find(v);
  if (!a || !b) {
    throw Error(ErrorKind::not_recalled,
                "node " + std::to_string(v.value) + " is missing from an embedding space");
  }
  return norm_of_difference(*a, b);
}

std::string_view to_string(DivergenceOperator op) {
  return op == DivergenceOperator::neighborhood ? "nbr" : "emb";
}

SurpriseReport surprise(const WorkingMemory& r1, const WorkingMemory& r2,
                        const SurpriseOptions& options) {
  if (!(options.theta >= 0.0) || !std::isfinite(options.theta)) {
    throw Error(ErrorKind::invalid_parameters, "theta must be a finite value >= 0");
  }
  check_hops(options.k);
  check_same_cue(r1.cue, r2.cue);

  SurpriseReport report;
  report.cue = r1.cue;
  report.t1 = r1.version;
  report.t2 = r2.version;
  report.options = options;

  std::map<NodeId, const Node*> content;
  for (const auto* w : {&r1, &r2}) {
    for (const auto& [id, n] : w->nodes) {
      if (is_content(n)) content.emplace(id, &n);
    }
  }
  for (const auto& [id, n] : content) report.per_node.push_back({id, n->type, n->name, 0.0});
  // Canonical order keeps the aggregate independent of id allocation.
  std::sort(report.per_node.begin(), report.per_node.end(), [](const auto& a, const auto& b) {
    return std::tie(a.type, a.name, a.id) < std::tie(b.type, b.name, b.id);
  });

  if (options.op == DivergenceOperator::neighborhood) {
    Adjacency a1 = undirected(r1);
    Adjacency a2 = undirected(r2);
    for (auto& row : report.per_node) {
      auto n1 = r1.has_node(row.id) ? hops(a1, row.id, options.k) : std::set<NodeId>{};
      auto n2 = r2.has_node(row.id) ? hops(a2, row.id, options.k) : std::set<NodeId>{};
      row.value = jaccard_distance(n1, n2);
    }
  } else {
    EmbeddingSpace z1 = embed(r1, options.embedding);
    EmbeddingSpace z2 = embed(r2, options.embedding);
    for (auto& row : report.per_node) {
      const auto* v1 = z1.find(row.id);
      const auto* v2 = z2.find(row.id);
      row.value = v1 ? norm_of_difference(*v1, v2) : norm_of_difference(*v2, nullptr);
    }
  }

  double sum = 0.0;
  for (const auto& row : report.per_node) sum += row.value;
  report.aggregate =
      report.per_node.empty() ? 0.0 : sum / static_cast<double>(report.per_node.size());
  report.significant = report.aggregate > options.theta;
  return report;
}

SurpriseReport surprise(const MemoryGraph& graph, const Cue& cue, Version t1, Version t2,
                        const SurpriseOptions& options) {
  if (t1 >= t2) {
    throw Error(ErrorKind::ordering, "surprise needs t1 < t2, got t1=" + std::to_string(t1) +
                                         " t2=" + std::to_string(t2));
  }
  if (options.op == DivergenceOperator::embedding) check_params(options.embedding);
  WorkingMemory r1 = recall(graph, cue, t1);
  WorkingMemory r2 = recall(graph, cue, t2);
  return surprise(r1, r2, options);
}

std::string format_surprise(const Schema& schema, const SurpriseReport& report) {
  std::ostringstream os;
  os << "surprise for cue: " << describe(report.cue) << '\n';
  os << "versions: t1=" << report.t1 << " t2=" << report.t2 << '\n';
  os << "operator: " << to_string(report.options.op);
  if (report.options.op == DivergenceOperator::neighborhood) {
    os << " k=" << report.options.k;
  } else {
    os << " k=" << report.options.embedding.rounds << " dim=" << report.options.embedding.dim
       << " seed=" << report.options.embedding.seed;
  }
  os << '\n';
  os << "theta: " << format_number(report.options.theta) << '\n';
  for (const auto& row : report.per_node) {
    os << "  " << schema.name(row.type) << ' ' << row.name << ' ' << format_number(row.value)
       << '\n';
  }
  os << "aggregate (mean over " << report.per_node.size()
     << " concept/element nodes): " << format_number(report.aggregate) << '\n';
  os << "significant: " << (report.significant ? "yes" : "no") << '\n';
  return os.str();
}

}  // namespace dgmm
