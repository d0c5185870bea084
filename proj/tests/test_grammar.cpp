#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wordorder/errors.hpp"
#include "wordorder/grammar.hpp"
#include "wordorder/util.hpp"

using namespace wordorder;

namespace {

// the(det->dog) dog(nsubj->barked) barked(root) loudly(advmod->barked)
DepTree barked_tree() {
  DepTree t;
  t.doc_id = "d0";
  auto add = [&](std::string form, int head, std::string deprel) {
    Token tok;
    tok.index = t.size() + 1;
    tok.form = std::move(form);
    tok.head = head;
    tok.deprel = std::move(deprel);
    t.tokens.push_back(std::move(tok));
  };
  add("the", 2, "det");
  add("dog", 3, "nsubj");
  add("barked", 0, "root");
  add("loudly", 3, "advmod");
  return t;
}

}  // namespace

TEST_CASE("linearize follows consistent weights (hand-traced examples)") {
  DepTree t = barked_tree();
  ConsistentGrammar g1("g1", {{"det", -0.6}, {"nsubj", -0.3}, {"advmod", 0.4}});
  CHECK(order_to_forms(t, linearize(t, g1)) ==
        std::vector<std::string>{"the", "dog", "barked", "loudly"});

  ConsistentGrammar g2("g2", {{"nsubj", 0.3}, {"det", 0.5}, {"advmod", -0.2}});
  CHECK(order_to_forms(t, linearize(t, g2)) ==
        std::vector<std::string>{"loudly", "barked", "dog", "the"});
}

TEST_CASE("linearize on a single token returns that token") {
  DepTree t;
  t.tokens.push_back({1, "word", "", 0, "root"});
  ConsistentGrammar g("g", {});
  CHECK(linearize(t, g) == std::vector<int>{1});
}

TEST_CASE("order places negative weights before the head, positives after") {
  DepTree t = barked_tree();
  ConsistentGrammar g("g", {{"det", -0.6}, {"nsubj", -0.3}, {"advmod", 0.4}});
  CHECK(g.order(t, 3) == std::vector<int>{2, 3, 4});
  CHECK(g.order(t, 2) == std::vector<int>{1, 2});
  CHECK(g.order(t, 1) == std::vector<int>{1});  // leaf
}

TEST_CASE("order breaks equal-weight ties by surface position") {
  DepTree t;
  auto add = [&](std::string form, int head, std::string deprel) {
    t.tokens.push_back({t.size() + 1, std::move(form), "", head,
                        std::move(deprel)});
  };
  add("a", 3, "x");
  add("b", 3, "y");
  add("head", 0, "root");
  ConsistentGrammar g("g", {{"x", -0.5}, {"y", -0.5}});
  CHECK(g.order(t, 3) == std::vector<int>{1, 2, 3});
  // A dependent tied with the head at exactly 0 goes after the head.
  ConsistentGrammar gz("gz", {{"x", 0.0}, {"y", 0.0}});
  CHECK(gz.order(t, 3) == std::vector<int>{3, 1, 2});
}

TEST_CASE("order falls back to default_weight for unseen labels, once") {
  DepTree t = barked_tree();
  std::vector<std::string> warnings;
  set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
  ConsistentGrammar g("fallback-test", {{"det", -0.6}});
  g.order(t, 3);
  g.order(t, 3);
  set_warning_handler(nullptr);
  // nsubj and advmod unseen -> one warning each despite two calls.
  CHECK(warnings.size() == 2);
}

TEST_CASE("linearize rejects non-permutation orderings") {
  DepTree t = barked_tree();
  OrderingFn broken = [](const DepTree&, int node) {
    return std::vector<int>{node};  // drops dependents
  };
  CHECK_THROWS_AS(linearize(t, broken), ContractError);
}

TEST_CASE("linearize output is a projective permutation for random grammars") {
  std::mt19937_64 rng(21);
  const std::vector<std::string> labels = {"nsubj", "obj", "det", "case", "dep"};
  for (int iter = 0; iter < 300; ++iter) {
    const int n = 1 + static_cast<int>(rng() % 7);
    DepTree t = test_oracles::make_random_tree(rng, n, labels);
    ConsistentGrammar g = make_random_grammar(1 + iter % 5);
    auto order = linearize(t, g);
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(n);
    for (int i = 0; i < n; ++i) expected[i] = i + 1;
    CHECK(sorted == expected);
    CHECK(is_projective(t, order));
  }
}

TEST_CASE("make_random_grammar is deterministic and index-sensitive") {
  auto a = make_random_grammar(3);
  auto b = make_random_grammar(3);
  CHECK(a.weights() == b.weights());
  auto c = make_random_grammar(1);
  CHECK(a.weights() != c.weights());
  CHECK(a.weights().size() == universal_deprel_inventory().size());
  for (const auto& [label, w] : a.weights()) {
    CHECK(w >= -1.0);
    CHECK(w <= 1.0);
  }
  CHECK(a.name() == "Random3");
}

TEST_CASE("load_grammar reads tab-separated weight lines") {
  std::istringstream in("nsubj\t−0.4\nobj\t0.3\n\n# comment\n");
  auto g = load_grammar(in, "test");
  CHECK(g.weights().size() == 2);
  CHECK(g.weight("nsubj") == -0.4);
  CHECK(g.weight("obj") == 0.3);
}

TEST_CASE("load_grammar rejects duplicates and junk") {
  std::istringstream dup("obj\t0.1\nobj\t0.2\n");
  CHECK_THROWS_WITH_AS(load_grammar(dup, "t"),
                       doctest::Contains("duplicate label 'obj'"), DataError);
  std::istringstream junk("obj\tnot-a-number\n");
  CHECK_THROWS_AS(load_grammar(junk, "t"), DataError);
}

TEST_CASE("load_grammar clamps out-of-range weights with a warning") {
  std::vector<std::string> warnings;
  set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
  std::istringstream in("obj\t1.7\n");
  auto g = load_grammar(in, "t");
  set_warning_handler(nullptr);
  CHECK(g.weight("obj") == 1.0);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("clamped") != std::string::npos);
}

TEST_CASE("grammar save/load round-trips") {
  auto g = make_random_grammar(2);
  std::ostringstream out;
  save_grammar(g, out);
  std::istringstream in(out.str());
  auto back = load_grammar(in, g.name());
  CHECK(back.weights() == g.weights());
}

TEST_CASE("min_dl_local_order: star tree attains DL 4") {
  DepTree t;
  t.tokens.push_back({1, "d1", "", 2, "a"});
  t.tokens.push_back({2, "v", "", 0, "root"});
  t.tokens.push_back({3, "d2", "", 2, "b"});
  t.tokens.push_back({4, "d3", "", 2, "c"});
  auto order = min_dl_local_order(t);
  CHECK(total_dependency_length(t, order) == 4);
  CHECK(test_oracles::brute_force_min_projective_dl(t) == 4);
}

TEST_CASE("min_dl_local_order: chain attains DL 2") {
  DepTree t;
  t.tokens.push_back({1, "a", "", 0, "root"});
  t.tokens.push_back({2, "b", "", 1, "dep"});
  t.tokens.push_back({3, "c", "", 2, "dep"});
  auto order = min_dl_local_order(t);
  CHECK(total_dependency_length(t, order) == 2);
}

TEST_CASE("min_dl_local_order: single token") {
  DepTree t;
  t.tokens.push_back({1, "x", "", 0, "root"});
  CHECK(min_dl_local_order(t) == std::vector<int>{1});
  CHECK(total_dependency_length(t, {1}) == 0);
}

TEST_CASE("min_dl_local_order: parent anchoring beats naive alternation") {
  // r -> v, v -> {leaf, 3-chain}: naive side alternation yields 8, the true
  // projective minimum is 6.
  DepTree t;
  t.tokens.push_back({1, "r", "", 0, "root"});
  t.tokens.push_back({2, "v", "", 1, "dep"});
  t.tokens.push_back({3, "x", "", 2, "dep"});
  t.tokens.push_back({4, "c1", "", 2, "dep"});
  t.tokens.push_back({5, "c2", "", 4, "dep"});
  t.tokens.push_back({6, "c3", "", 5, "dep"});
  auto order = min_dl_local_order(t);
  CHECK(total_dependency_length(t, order) == 6);
  CHECK(test_oracles::brute_force_min_projective_dl(t) == 6);
}

TEST_CASE("min_dl_local_order matches brute force on random trees") {
  std::mt19937_64 rng(33);
  const std::vector<std::string> labels = {"a", "b", "c"};
  for (int iter = 0; iter < 500; ++iter) {
    const int n = 1 + static_cast<int>(rng() % 7);
    DepTree t = test_oracles::make_random_tree(rng, n, labels);
    auto order = min_dl_local_order(t);
    CHECK(is_projective(t, order));
    CHECK(total_dependency_length(t, order) ==
          test_oracles::brute_force_min_projective_dl(t));
  }
}

TEST_CASE("total_dependency_length counts positional distances") {
  DepTree t;
  t.tokens.push_back({1, "the", "", 2, "det"});
  t.tokens.push_back({2, "dog", "", 3, "nsubj"});
  t.tokens.push_back({3, "barked", "", 0, "root"});
  CHECK(total_dependency_length(t, {1, 2, 3}) == 2);
  CHECK(total_dependency_length(t, {3, 2, 1}) == 2);  // reversal preserves DL
  CHECK_THROWS_AS(total_dependency_length(t, {1, 1, 3}), ContractError);
  CHECK_THROWS_AS(total_dependency_length(t, {1, 2}), ContractError);
}

TEST_CASE("is_projective detects crossing arcs") {
  // 3(root); 1->3, 4->3, 2->4: arc 1-3 and subtree {2,4} cross in surface order.
  DepTree t;
  t.tokens.push_back({1, "a", "", 3, "dep"});
  t.tokens.push_back({2, "b", "", 4, "dep"});
  t.tokens.push_back({3, "c", "", 0, "root"});
  t.tokens.push_back({4, "d", "", 3, "dep"});
  CHECK(!is_projective(t, {1, 2, 3, 4}));
  CHECK(is_projective(t, {1, 3, 2, 4}));
  DepTree two;
  two.tokens.push_back({1, "x", "", 2, "dep"});
  two.tokens.push_back({2, "y", "", 0, "root"});
  CHECK(is_projective(two, {1, 2}));
  CHECK(is_projective(two, {2, 1}));
}

TEST_CASE("check_consistency: grammar output corpora are always clean") {
  std::mt19937_64 rng(5);
  const std::vector<std::string> labels = {"nsubj", "obj", "det", "amod", "cc"};
  for (int g_index = 1; g_index <= 5; ++g_index) {
    ConsistencyChecker checker;
    ConsistentGrammar g = make_random_grammar(g_index);
    for (int iter = 0; iter < 100; ++iter) {
      const int n = 1 + static_cast<int>(rng() % 8);
      DepTree t = test_oracles::make_random_tree(rng, n, labels);
      checker.add(t, linearize(t, g));
    }
    CHECK(checker.violations().empty());
  }
}

TEST_CASE("check_consistency flags a side flip") {
  DepTree a;  // dog barked (nsubj left of head)
  a.tokens.push_back({1, "dog", "", 2, "nsubj"});
  a.tokens.push_back({2, "barked", "", 0, "root"});
  DepTree b;  // barked dog (nsubj right of head)
  b.tokens.push_back({1, "barked", "", 0, "root"});
  b.tokens.push_back({2, "dog", "", 1, "nsubj"});
  ConsistencyChecker checker;
  checker.add(a, {1, 2});
  checker.add(b, {1, 2});
  auto v = checker.violations();
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ConsistencyViolation::Kind::Side);
  CHECK(v[0].relation_a == "nsubj");
}

TEST_CASE("check_consistency flags same-side order inversion") {
  // Both dependents left of the head, nearer/farther swapped across trees.
  DepTree a;
  a.tokens.push_back({1, "x", "", 3, "r1"});
  a.tokens.push_back({2, "y", "", 3, "r2"});
  a.tokens.push_back({3, "h", "", 0, "root"});
  DepTree b;
  b.tokens.push_back({1, "y", "", 3, "r2"});
  b.tokens.push_back({2, "x", "", 3, "r1"});
  b.tokens.push_back({3, "h", "", 0, "root"});
  ConsistencyChecker checker;
  checker.add(a, {1, 2, 3});
  checker.add(b, {1, 2, 3});
  auto v = checker.violations();
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ConsistencyViolation::Kind::SameSideOrder);
}

TEST_CASE("check_consistency: empty corpus is clean") {
  ConsistencyChecker checker;
  CHECK(checker.violations().empty());
}

TEST_CASE("sort_freq_transform orders by table frequency") {
  FreqTable f;
  f.add("the", 100);
  f.add("dog", 5);
  f.add("barked", 2);
  std::vector<std::string> words = {"barked", "the", "dog"};
  CHECK(sort_freq_transform(words, f, SortDirection::Descending) ==
        std::vector<std::string>{"the", "dog", "barked"});
  CHECK(sort_freq_transform(words, f, SortDirection::Ascending) ==
        std::vector<std::string>{"barked", "dog", "the"});
}

TEST_CASE("sort_freq_transform keeps the terminator final") {
  FreqTable f;
  f.add("the", 100);
  f.add("dog", 5);
  std::vector<std::string> words = {"dog", "the", "unseen", "the", "."};
  auto out = sort_freq_transform(words, f, SortDirection::Descending);
  CHECK(out == std::vector<std::string>{"the", "the", "dog", "unseen", "."});
  // Missing words count as frequency 0 and sink to the end (desc).
  auto asc = sort_freq_transform(words, f, SortDirection::Ascending);
  CHECK(asc == std::vector<std::string>{"unseen", "dog", "the", "the", "."});
}

TEST_CASE("sort_freq_transform collapses equal multisets onto one string") {
  FreqTable f;
  f.add("ash", 7);
  f.add("elm", 7);  // tied frequency: the word itself breaks the tie
  f.add("oak", 3);
  std::vector<std::string> a = {"elm", "oak", "ash", "."};
  std::vector<std::string> b = {"ash", "elm", "oak", "."};
  std::vector<std::string> c = {"oak", "ash", "elm", "."};
  for (auto direction : {SortDirection::Descending, SortDirection::Ascending}) {
    auto out = sort_freq_transform(a, f, direction);
    CHECK(sort_freq_transform(b, f, direction) == out);
    CHECK(sort_freq_transform(c, f, direction) == out);
  }
  CHECK(sort_freq_transform(a, f, SortDirection::Descending) ==
        std::vector<std::string>{"ash", "elm", "oak", "."});
}

TEST_CASE("reverse_transform reverses around a final terminator") {
  std::vector<std::string> words = {"i", "like", "dogs", "."};
  CHECK(reverse_transform(words) ==
        std::vector<std::string>{"dogs", "like", "i", "."});
  CHECK(reverse_transform(reverse_transform(words)) == words);
  CHECK(reverse_transform({"one"}) == std::vector<std::string>{"one"});
  CHECK(reverse_transform({}) == std::vector<std::string>{});
}

TEST_CASE("optimize_min_dl_grammar reaches the exhaustive optimum") {
  // Stars over labels {a,b,c} with varying surface orders plus one chain-ish
  // tree; the consistent-grammar search space on 3 labels is enumerable.
  std::vector<DepTree> sample;
  auto star = [&](std::vector<std::string> deprels) {
    DepTree t;
    t.tokens.push_back({1, "h", "", 0, "root"});
    for (auto& r : deprels)
      t.tokens.push_back({t.size() + 1, "w" + std::to_string(t.size() + 1), "",
                          1, std::move(r)});
    sample.push_back(std::move(t));
  };
  star({"a", "b", "c"});
  star({"c", "a", "b"});
  star({"b", "c"});
  star({"a", "a", "b"});

  // Oracle: all assignments of distinct values to the three labels realize
  // every side/rank combination.
  const double values[] = {-3, -2, -1, 1, 2, 3};
  double best = 1e100;
  for (double wa : values)
    for (double wb : values)
      for (double wc : values) {
        if (wa == wb || wb == wc || wa == wc) continue;
        ConsistentGrammar g("enum",
                            {{"a", wa / 3}, {"b", wb / 3}, {"c", wc / 3}});
        double total = 0;
        for (const auto& t : sample)
          total += total_dependency_length(t, linearize(t, g));
        best = std::min(best, total / sample.size());
      }

  OptimizeOptions options;
  options.iterations = 200;
  options.restarts = 3;
  options.seed = 7;
  auto result = optimize_min_dl_grammar(sample, options);
  CHECK(result.mean_dl == doctest::Approx(best).epsilon(1e-12));
  // Objective trace never increases.
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    CHECK(result.trace[i] <= result.trace[i - 1]);
}

TEST_CASE("optimize_min_dl_grammar is deterministic and validates options") {
  std::vector<DepTree> sample;
  DepTree t;
  t.tokens.push_back({1, "a", "", 2, "x"});
  t.tokens.push_back({2, "b", "", 0, "root"});
  sample.push_back(t);
  OptimizeOptions options;
  options.iterations = 10;
  options.seed = 3;
  auto r1 = optimize_min_dl_grammar(sample, options);
  auto r2 = optimize_min_dl_grammar(sample, options);
  CHECK(r1.grammar.weights() == r2.grammar.weights());
  CHECK(r1.mean_dl == r2.mean_dl);

  options.iterations = 0;
  CHECK_THROWS_AS(optimize_min_dl_grammar(sample, options), ConfigError);
  options.iterations = 5;
  CHECK_THROWS_AS(optimize_min_dl_grammar({}, options), DataError);
}

TEST_CASE("frequency tables merge, save, and load") {
  FreqTable a, b;
  a.add_sentence({"the", "dog", "."});
  b.add_sentence({"the", "cat", "runs"});  // no terminator: all words count
  a.merge(b);
  CHECK(a.count("the") == 2);
  CHECK(a.count("dog") == 1);
  CHECK(a.count("runs") == 1);
  CHECK(a.count(".") == 0);
  CHECK(a.total() == 5);
  CHECK(a.distinct() == 4);

  std::ostringstream out;
  a.save(out);
  std::istringstream in(out.str());
  FreqTable back = FreqTable::load(in);
  CHECK(back.count("the") == 2);
  CHECK(back.total() == a.total());
  CHECK(back.distinct() == a.distinct());

  std::istringstream dup("w\t1\nw\t2\n");
  CHECK_THROWS_AS(FreqTable::load(dup), DataError);
  std::istringstream junk("w\tx\n");
  CHECK_THROWS_AS(FreqTable::load(junk), DataError);
}
