#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "wordorder/freq.hpp"
#include "wordorder/treebank.hpp"

namespace wordorder {

// Ordering function: token indices of `node` and its dependents, in the
// desired surface order. Must be a permutation of {node} ∪ dependents(node).
using OrderingFn = std::function<std::vector<int>(const DepTree&, int)>;

// Per-relation scalar weights in [-1, 1]. Dependents sort by weight around
// the head (key 0): negative weights precede the head, positive follow.
class ConsistentGrammar {
 public:
  ConsistentGrammar() = default;
  ConsistentGrammar(std::string name, std::map<std::string, double> weights,
                    double default_weight = 0.0);

  const std::string& name() const { return name_; }
  double default_weight() const { return default_weight_; }
  const std::map<std::string, double>& weights() const { return weights_; }
  // Weight for a relation; unseen labels use default_weight and warn once
  // per (grammar, label).
  double weight(const std::string& deprel) const;

  // Ordering of node + dependents: ascending by weight (head key 0, placed
  // before dependents of equal key), ties among dependents by surface order.
  std::vector<int> order(const DepTree& t, int node) const;
  OrderingFn ordering_fn() const;

 private:
  std::string name_;
  std::map<std::string, double> weights_;
  double default_weight_ = 0.0;
};

// The universal dependency relation inventory random grammars draw from.
const std::vector<std::string>& universal_deprel_inventory();

// Depth-first linearization: g orders each node with its dependents and the
// recursion concatenates subtrees in that order. Returns token indices.
// Throws ContractError if g returns a non-permutation.
std::vector<int> linearize(const DepTree& t, const OrderingFn& g);
std::vector<int> linearize(const DepTree& t, const ConsistentGrammar& g);
std::vector<std::string> order_to_forms(const DepTree& t,
                                        const std::vector<int>& order);

// Weights for each label in the universal inventory drawn uniformly from
// [-1, 1], seeded solely by `index`: identical across runs and platforms.
ConsistentGrammar make_random_grammar(int index);

// "deprel<TAB>weight" lines; blank and '#' lines skipped. Duplicate labels
// and unparsable weights are errors; out-of-range weights clamp with a
// warning.
ConsistentGrammar load_grammar(std::istream& in, const std::string& name);
void save_grammar(const ConsistentGrammar& g, std::ostream& out);

// Projective dependency-length-minimal order (token indices). At each head,
// dependents' subtrees alternate sides in increasing size order, smallest
// nearest the head, the link to the parent acting as the largest item on its
// side; subtrees mirror when placed on the right.
std::vector<int> min_dl_local_order(const DepTree& t);

// Sum over non-root tokens of |pos(token) - pos(head)| under `order`.
// Throws ContractError if order is not a permutation of t's tokens.
int total_dependency_length(const DepTree& t, const std::vector<int>& order);

// True iff every subtree occupies a contiguous span under `order`.
bool is_projective(const DepTree& t, const std::vector<int>& order);

struct ConsistencyViolation {
  enum class Kind { Side, SameSideOrder };
  Kind kind;
  std::string relation_a;
  std::string relation_b;  // empty for Side violations
  std::string detail;
};

// Streaming corpus-level consistency check: each relation always on one side
// of its head, and same-side relation pairs never invert relative order.
class ConsistencyChecker {
 public:
  void add(const DepTree& t, const std::vector<int>& order);
  std::vector<ConsistencyViolation> violations() const;

 private:
  // relation -> bitmask of observed sides (1 = left of head, 2 = right)
  std::map<std::string, int> sides_;
  // (side, relA, relB) with relA < relB -> bitmask of observed orientations
  // (1 = relA nearer the head, 2 = relB nearer)
  std::map<std::tuple<int, std::string, std::string>, int> pair_orders_;
};

enum class SortDirection { Descending, Ascending };

// Sort of the words by table frequency (missing words count 0), frequency
// ties by the word itself, so the result depends only on the word multiset;
// a final "." stays final and out of the sort.
std::vector<std::string> sort_freq_transform(
    const std::vector<std::string>& words, const FreqTable& freqs,
    SortDirection direction);

// Reversed word order; a final "." stays final.
std::vector<std::string> reverse_transform(
    const std::vector<std::string>& words);

struct OptimizeResult {
  ConsistentGrammar grammar;
  double mean_dl = 0.0;
  std::vector<double> trace;  // objective after each iteration; non-increasing
};

struct OptimizeOptions {
  int iterations = 400;
  int restarts = 4;
  std::uint64_t seed = 0;
};

// Random-restart coordinate search over per-label weights, minimizing mean
// total dependency length of the linearized sample. Deterministic given the
// options. Throws ConfigError for iterations < 1, DataError for an empty
// sample.
OptimizeResult optimize_min_dl_grammar(const std::vector<DepTree>& sample,
                                       const OptimizeOptions& options);

}  // namespace wordorder
