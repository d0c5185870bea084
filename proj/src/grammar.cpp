#include "wordorder/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "wordorder/errors.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

ConsistentGrammar::ConsistentGrammar(std::string name,
                                     std::map<std::string, double> weights,
                                     double default_weight)
    : name_(std::move(name)),
      weights_(std::move(weights)),
      default_weight_(default_weight) {
  for (auto& [label, w] : weights_) {
    if (w < -1.0 || w > 1.0) {
      warn("grammar " + name_ + ": weight for '" + label + "' (" +
           format_double(w) + ") clamped to [-1, 1]");
      w = std::clamp(w, -1.0, 1.0);
    }
  }
  default_weight_ = std::clamp(default_weight_, -1.0, 1.0);
}

double ConsistentGrammar::weight(const std::string& deprel) const {
  auto it = weights_.find(deprel);
  if (it != weights_.end()) return it->second;
  warn_once("grammar:" + name_ + ":" + deprel,
            "grammar " + name_ + ": no weight for relation '" + deprel +
                "', using default " + format_double(default_weight_));
  return default_weight_;
}

std::vector<int> ConsistentGrammar::order(const DepTree& t, int node) const {
  struct Item {
    double key;
    bool is_head;
    int index;
  };
  std::vector<Item> items;
  items.push_back({0.0, true, node});
  for (const Token& tok : t.tokens)
    if (tok.head == node) items.push_back({weight(tok.deprel), false, tok.index});
  // Total order: weight, then head-before-dependents at equal key, then
  // surface position.
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.is_head != b.is_head) return a.is_head;
    return a.index < b.index;
  });
  std::vector<int> out;
  out.reserve(items.size());
  for (const Item& item : items) out.push_back(item.index);
  return out;
}

OrderingFn ConsistentGrammar::ordering_fn() const {
  return [this](const DepTree& t, int node) { return order(t, node); };
}

const std::vector<std::string>& universal_deprel_inventory() {
  static const std::vector<std::string> kInventory = {
      "acl",       "advcl",      "advmod",  "amod",       "appos",
      "aux",       "case",       "cc",      "ccomp",      "clf",
      "compound",  "conj",       "cop",     "csubj",      "dep",
      "det",       "discourse",  "dislocated", "expl",    "fixed",
      "flat",      "goeswith",   "iobj",    "list",       "mark",
      "nmod",      "nsubj",      "nummod",  "obj",        "obl",
      "orphan",    "parataxis",  "punct",   "reparandum", "root",
      "vocative",  "xcomp"};
  return kInventory;
}

namespace {

void linearize_rec(const DepTree& t,
                   const std::vector<std::vector<int>>& children,
                   const OrderingFn& g, int node, std::vector<int>& out) {
  std::vector<int> ordering = g(t, node);
  // Contract: a permutation of {node} ∪ dependents.
  std::vector<int> expected = children[node];
  expected.push_back(node);
  std::sort(expected.begin(), expected.end());
  std::vector<int> got = ordering;
  std::sort(got.begin(), got.end());
  if (got != expected)
    throw ContractError("ordering function returned a non-permutation at node " +
                        std::to_string(node));
  for (int item : ordering) {
    if (item == node)
      out.push_back(node);
    else
      linearize_rec(t, children, g, item, out);
  }
}

}  // namespace

std::vector<int> linearize(const DepTree& t, const OrderingFn& g) {
  std::vector<int> out;
  if (t.size() == 0) return out;
  const int root = t.root_index();
  if (root == 0) throw ContractError("linearize: tree has no root");
  out.reserve(t.tokens.size());
  linearize_rec(t, t.children(), g, root, out);
  return out;
}

std::vector<int> linearize(const DepTree& t, const ConsistentGrammar& g) {
  return linearize(t, g.ordering_fn());
}

std::vector<std::string> order_to_forms(const DepTree& t,
                                        const std::vector<int>& order) {
  std::vector<std::string> out;
  out.reserve(order.size());
  for (int index : order) out.push_back(t.at(index).form);
  return out;
}

ConsistentGrammar make_random_grammar(int index) {
  // Fixed generator + explicit 53-bit mapping: reproducible across
  // platforms, and shared across languages (seeded by the index alone).
  std::mt19937_64 rng(static_cast<std::uint64_t>(index));
  std::map<std::string, double> weights;
  for (const std::string& label : universal_deprel_inventory())
    weights[label] = 2.0 * unit_double(rng()) - 1.0;
  return ConsistentGrammar("Random" + std::to_string(index), std::move(weights));
}

ConsistentGrammar load_grammar(std::istream& in, const std::string& name) {
  std::map<std::string, double> weights;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv = trim(line);
    if (sv.empty() || sv[0] == '#') continue;
    // "deprel<TAB>weight"; any whitespace run tolerated as separator.
    std::size_t sep = sv.find_first_of("\t ");
    if (sep == std::string_view::npos)
      throw DataError("grammar " + name + " line " + std::to_string(line_no) +
                      ": expected 'deprel<TAB>weight'");
    const std::string label(trim(sv.substr(0, sep)));
    const std::string_view value = trim(sv.substr(sep + 1));
    double w = 0.0;
    if (label.empty() || !parse_double(value, w))
      throw DataError("grammar " + name + " line " + std::to_string(line_no) +
                      ": unparsable weight '" + std::string(value) + "'");
    if (weights.count(label))
      throw DataError("grammar " + name + " line " + std::to_string(line_no) +
                      ": duplicate label '" + label + "'");
    weights[label] = w;  // constructor clamps + warns
  }
  return ConsistentGrammar(name, std::move(weights));
}

void save_grammar(const ConsistentGrammar& g, std::ostream& out) {
  for (const auto& [label, w] : g.weights())
    out << label << '\t' << format_double(w) << '\n';
}

namespace {

// Canonical minimal-DL arrangement of the subtree at `node`, laid out as if
// the parent were immediately to the RIGHT. Children alternate sides in
// increasing size order with the parent link as the largest item: ranks
// k, k-2, ... go left (largest outermost), ranks k-1, k-3, ... go right.
// A child placed right is mirrored so its head faces its parent.
void min_dl_rec(const std::vector<std::vector<int>>& children,
                const std::vector<int>& subtree_size, int node,
                std::vector<int>& out) {
  std::vector<int> kids = children[node];
  std::stable_sort(kids.begin(), kids.end(), [&](int a, int b) {
    return subtree_size[a] < subtree_size[b];
  });
  const int k = static_cast<int>(kids.size());
  std::vector<int> left, right;
  for (int rank = k; rank >= 1; --rank) {
    if ((k - rank) % 2 == 0)
      left.push_back(kids[rank - 1]);  // outermost first: descending rank
    else
      right.push_back(kids[rank - 1]);
  }
  std::reverse(right.begin(), right.end());  // nearest the head first
  for (int child : left) min_dl_rec(children, subtree_size, child, out);
  out.push_back(node);
  for (int child : right) {
    std::vector<int> sub;
    min_dl_rec(children, subtree_size, child, sub);
    std::reverse(sub.begin(), sub.end());
    out.insert(out.end(), sub.begin(), sub.end());
  }
}

}  // namespace

std::vector<int> min_dl_local_order(const DepTree& t) {
  std::vector<int> out;
  if (t.size() == 0) return out;
  const int root = t.root_index();
  if (root == 0) throw ContractError("min_dl_local_order: tree has no root");
  const auto children = t.children();
  std::vector<int> size(t.size() + 1, 1);
  // Sizes bottom-up: children always have larger indices than... not true;
  // iterate by decreasing depth instead.
  std::vector<int> order_by_depth;
  std::vector<int> depth(t.size() + 1, 0);
  for (int i = 1; i <= t.size(); ++i) {
    int d = 0, v = i;
    while (v != 0 && d <= t.size()) {
      v = t.at(v).head;
      ++d;
    }
    depth[i] = d;
    order_by_depth.push_back(i);
  }
  std::sort(order_by_depth.begin(), order_by_depth.end(),
            [&](int a, int b) { return depth[a] > depth[b]; });
  for (int v : order_by_depth)
    for (int c : children[v]) size[v] += size[c];
  out.reserve(t.size());
  min_dl_rec(children, size, root, out);
  return out;
}

int total_dependency_length(const DepTree& t, const std::vector<int>& order) {
  const int n = t.size();
  if (static_cast<int>(order.size()) != n)
    throw ContractError("total_dependency_length: order size mismatch");
  std::vector<int> pos(n + 1, 0);
  std::vector<bool> seen(n + 1, false);
  for (int p = 0; p < n; ++p) {
    const int index = order[p];
    if (index < 1 || index > n || seen[index])
      throw ContractError("total_dependency_length: order is not a permutation");
    seen[index] = true;
    pos[index] = p;
  }
  int total = 0;
  for (const Token& tok : t.tokens)
    if (tok.head != 0) total += std::abs(pos[tok.index] - pos[tok.head]);
  return total;
}

bool is_projective(const DepTree& t, const std::vector<int>& order) {
  const int n = t.size();
  if (static_cast<int>(order.size()) != n)
    throw ContractError("is_projective: order size mismatch");
  std::vector<int> pos(n + 1, 0);
  for (int p = 0; p < n; ++p) pos[order[p]] = p;
  // Subtree positions must form a contiguous span.
  const auto children = t.children();
  std::vector<int> lo(n + 1), hi(n + 1), size(n + 1, 1);
  for (int i = 1; i <= n; ++i) lo[i] = hi[i] = pos[i];
  std::vector<int> depth(n + 1, 0), nodes;
  for (int i = 1; i <= n; ++i) {
    int d = 0, v = i;
    while (v != 0 && d <= n) {
      v = t.at(v).head;
      ++d;
    }
    depth[i] = d;
    nodes.push_back(i);
  }
  std::sort(nodes.begin(), nodes.end(),
            [&](int a, int b) { return depth[a] > depth[b]; });
  for (int v : nodes) {
    for (int c : children[v]) {
      lo[v] = std::min(lo[v], lo[c]);
      hi[v] = std::max(hi[v], hi[c]);
      size[v] += size[c];
    }
    if (hi[v] - lo[v] + 1 != size[v]) return false;
  }
  return true;
}

void ConsistencyChecker::add(const DepTree& t, const std::vector<int>& order) {
  const int n = t.size();
  std::vector<int> pos(n + 1, 0);
  std::vector<bool> seen(n + 1, false);
  if (static_cast<int>(order.size()) != n)
    throw ContractError("check_consistency: order size mismatch");
  for (int p = 0; p < n; ++p) {
    const int index = order[p];
    if (index < 1 || index > n || seen[index])
      throw ContractError("check_consistency: order is not a permutation");
    seen[index] = true;
    pos[index] = p;
  }
  const auto children = t.children();
  for (int h = 1; h <= n; ++h) {
    for (int d : children[h]) {
      const int side = pos[d] < pos[h] ? 1 : 2;
      sides_[t.at(d).deprel] |= side;
    }
    for (std::size_t i = 0; i < children[h].size(); ++i) {
      for (std::size_t j = i + 1; j < children[h].size(); ++j) {
        const int a = children[h][i], b = children[h][j];
        const std::string& ra = t.at(a).deprel;
        const std::string& rb = t.at(b).deprel;
        if (ra == rb) continue;
        const int side_a = pos[a] < pos[h] ? 1 : 2;
        const int side_b = pos[b] < pos[h] ? 1 : 2;
        if (side_a != side_b) continue;
        const int dist_a = std::abs(pos[a] - pos[h]);
        const int dist_b = std::abs(pos[b] - pos[h]);
        const std::string& first = ra < rb ? ra : rb;
        const std::string& second = ra < rb ? rb : ra;
        const bool first_nearer = (ra < rb) == (dist_a < dist_b);
        pair_orders_[{side_a, first, second}] |= first_nearer ? 1 : 2;
      }
    }
  }
}

std::vector<ConsistencyViolation> ConsistencyChecker::violations() const {
  std::vector<ConsistencyViolation> out;
  for (const auto& [relation, mask] : sides_) {
    if (mask == 3)
      out.push_back({ConsistencyViolation::Kind::Side, relation, "",
                     "relation '" + relation + "' appears on both sides of its head"});
  }
  for (const auto& [key, mask] : pair_orders_) {
    if (mask == 3) {
      const auto& [side, ra, rb] = key;
      out.push_back({ConsistencyViolation::Kind::SameSideOrder, ra, rb,
                     "relations '" + ra + "' and '" + rb + "' invert order on the " +
                         (side == 1 ? std::string("left") : std::string("right"))});
    }
  }
  return out;
}

std::vector<std::string> sort_freq_transform(
    const std::vector<std::string>& words, const FreqTable& freqs,
    SortDirection direction) {
  std::vector<std::string> out = words;
  const bool has_terminator = !out.empty() && out.back() == ".";
  auto body_end = has_terminator ? out.end() - 1 : out.end();
  // Frequency ties break on the word itself so the output is a function of
  // the word multiset alone: equal multisets collide onto one string.
  std::sort(out.begin(), body_end,
            [&](const std::string& a, const std::string& b) {
              const std::uint64_t fa = freqs.count(a);
              const std::uint64_t fb = freqs.count(b);
              if (fa != fb)
                return direction == SortDirection::Descending ? fa > fb
                                                              : fa < fb;
              return a < b;
            });
  return out;
}

std::vector<std::string> reverse_transform(
    const std::vector<std::string>& words) {
  std::vector<std::string> out = words;
  const bool has_terminator = !out.empty() && out.back() == ".";
  std::reverse(out.begin(), has_terminator ? out.end() - 1 : out.end());
  return out;
}

namespace {

double mean_sample_dl(const std::vector<DepTree>& sample,
                      const ConsistentGrammar& g) {
  double total = 0.0;
  for (const DepTree& t : sample)
    total += total_dependency_length(t, linearize(t, g));
  return total / static_cast<double>(sample.size());
}

}  // namespace

OptimizeResult optimize_min_dl_grammar(const std::vector<DepTree>& sample,
                                       const OptimizeOptions& options) {
  if (options.iterations < 1)
    throw ConfigError("optimize_min_dl_grammar: iterations must be >= 1");
  if (options.restarts < 1)
    throw ConfigError("optimize_min_dl_grammar: restarts must be >= 1");
  if (sample.empty())
    throw DataError("optimize_min_dl_grammar: empty tree sample");

  std::map<std::string, double> labels;  // observed relations, weight slots
  for (const DepTree& t : sample)
    for (const Token& tok : t.tokens)
      if (tok.head != 0) labels[tok.deprel] = 0.0;
  std::vector<std::string> label_list;
  for (const auto& [label, _] : labels) label_list.push_back(label);
  const int n_labels = static_cast<int>(label_list.size());

  OptimizeResult best;
  bool have_best = false;
  for (int restart = 0; restart < options.restarts; ++restart) {
    std::mt19937_64 rng(splitmix64(options.seed +
                                   0x9e3779b97f4a7c15ull *
                                       static_cast<std::uint64_t>(restart)));
    std::map<std::string, double> weights = labels;
    for (auto& [_, w] : weights) w = 2.0 * unit_double(rng()) - 1.0;
    ConsistentGrammar current("Min-DL-Opt", weights);
    double objective = mean_sample_dl(sample, current);
    std::vector<double> trace;
    trace.reserve(options.iterations);
    for (int iter = 0; iter < options.iterations; ++iter) {
      if (n_labels == 0) {
        trace.push_back(objective);
        continue;
      }
      const std::string& label = label_list[iter % n_labels];
      // Perturbation scale decays so late iterations fine-tune rank order.
      const double progress =
          static_cast<double>(iter) / static_cast<double>(options.iterations);
      const double scale = 1.0 - 0.9 * progress;
      double proposal;
      if (unit_double(rng()) < 0.25) {
        proposal = 2.0 * unit_double(rng()) - 1.0;  // occasional fresh draw
      } else {
        proposal = weights[label] + scale * (2.0 * unit_double(rng()) - 1.0);
        proposal = std::clamp(proposal, -1.0, 1.0);
      }
      const double saved = weights[label];
      weights[label] = proposal;
      ConsistentGrammar candidate("Min-DL-Opt", weights);
      const double candidate_objective = mean_sample_dl(sample, candidate);
      if (candidate_objective <= objective) {
        objective = candidate_objective;
      } else {
        weights[label] = saved;
      }
      trace.push_back(objective);
    }
    if (!have_best || objective < best.mean_dl) {
      best.grammar = ConsistentGrammar("Min-DL-Opt", weights);
      best.mean_dl = objective;
      best.trace = std::move(trace);
      have_best = true;
    }
  }
  return best;
}

}  // namespace wordorder
