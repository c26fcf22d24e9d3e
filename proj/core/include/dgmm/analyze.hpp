#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dgmm/recall.hpp"

namespace dgmm {

struct EmbeddingParams {
  int rounds = 2;       // k
  int dim = 128;        // d
  std::uint64_t seed = 0;

  friend bool operator==(const EmbeddingParams&, const EmbeddingParams&) = default;
};

// Per-node vectors computed from one working memory. Never persisted.
struct EmbeddingSpace {
  EmbeddingParams params;
  Cue cue;
  Version source_version = 0;
  std::map<NodeId, std::vector<double>> vectors;

  const std::vector<double>* find(NodeId id) const;
};

// Node labels after each refinement round, index 0 being the (type, name)
// seed label. Labels see only nodes and relations inside `w`.
std::vector<std::map<NodeId, std::uint64_t>> label_rounds(const WorkingMemory& w,
                                                          const EmbeddingParams& params);

// Iterated neighborhood label hashing; every round's label of a node goes
// into a signed feature-hashed bucket. Error(invalid_parameters) when
// d < 8 or k < 0.
EmbeddingSpace embed(const WorkingMemory& w, const EmbeddingParams& params = {});

// Nodes within k undirected hops of v inside w, v excluded. Empty when v is
// not in w.
std::set<NodeId> neighborhood(const WorkingMemory& w, NodeId v, int k);

// Jaccard distance of the k-hop neighborhoods of v in r1 and r2, in [0, 1].
// Errors: domain_restriction (different cues), not_recalled (v in neither),
// invalid_parameters (k < 0).
double local_divergence(NodeId v, const WorkingMemory& r1, const WorkingMemory& r2, int k);

// Euclidean distance between v's vectors. Errors: incomparable (different
// parameters), domain_restriction (different cues), not_recalled (v missing
// from either space).
double embedding_divergence(NodeId v, const EmbeddingSpace& z1, const EmbeddingSpace& z2);

enum class DivergenceOperator { neighborhood, embedding };

std::string_view to_string(DivergenceOperator op);

struct SurpriseOptions {
  DivergenceOperator op = DivergenceOperator::neighborhood;
  int k = 2;                  // hop radius for the neighborhood operator
  EmbeddingParams embedding;  // for the embedding operator
  double theta = 0.0;
};

struct NodeDivergence {
  NodeId id;
  NodeType type;
  std::string name;
  double value = 0.0;

  friend bool operator==(const NodeDivergence&, const NodeDivergence&) = default;
};

struct SurpriseReport {
  Cue cue;
  Version t1 = 0;
  Version t2 = 0;
  SurpriseOptions options;
  // Concepts and Elements of either recall, ordered by (type, name, id).
  std::vector<NodeDivergence> per_node;
  double aggregate = 0.0;  // mean of per_node values; 0 when empty
  bool significant = false;
};

// S(q; t1, t2) over the recalls at both versions. A node present in only one
// recall diverges maximally: its neighborhood is compared against the empty
// set, and its vector against the zero vector.
// Errors: ordering (t1 >= t2), out_of_range (t2 beyond the current version),
// invalid_parameters (theta < 0, k < 0), plus recall errors.
SurpriseReport surprise(const MemoryGraph& graph, const Cue& cue, Version t1, Version t2,
                        const SurpriseOptions& options = {});

// The same computation over two already-recalled working memories.
SurpriseReport surprise(const WorkingMemory& r1, const WorkingMemory& r2,
                        const SurpriseOptions& options = {});

std::string format_surprise(const Schema& schema, const SurpriseReport& report);

}  // namespace dgmm
