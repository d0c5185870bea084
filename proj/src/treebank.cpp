#include "wordorder/treebank.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "wordorder/errors.hpp"
#include "wordorder/util.hpp"

namespace wordorder {

int DepTree::root_index() const {
  for (const Token& tok : tokens)
    if (tok.head == 0) return tok.index;
  return 0;
}

std::vector<std::vector<int>> DepTree::children() const {
  std::vector<std::vector<int>> out(tokens.size() + 1);
  for (const Token& tok : tokens) {
    if (tok.head >= 1 && tok.head <= size() && tok.head != tok.index)
      out[tok.head].push_back(tok.index);
  }
  return out;
}

std::vector<std::string> DepTree::surface_forms() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& tok : tokens) out.push_back(tok.form);
  return out;
}

ValidationReport validate_tree(const DepTree& t) {
  ValidationReport report;
  const int n = t.size();
  for (int i = 0; i < n; ++i) {
    if (t.tokens[i].index != i + 1) {
      report.push_back({TreeProblem::Kind::BadIndexing, t.tokens[i].index,
                        "expected index " + std::to_string(i + 1)});
      // Indices are the basis for everything else.
      return report;
    }
  }
  int roots = 0;
  bool structure_ok = true;
  for (const Token& tok : t.tokens) {
    if (tok.head == tok.index) {
      report.push_back({TreeProblem::Kind::SelfHead, tok.index, ""});
      structure_ok = false;
    } else if (tok.head < 0 || tok.head > n) {
      report.push_back({TreeProblem::Kind::HeadOutOfRange, tok.index,
                        "head " + std::to_string(tok.head)});
      structure_ok = false;
    }
    if (tok.head == 0) {
      ++roots;
      if (tok.deprel != "root")
        report.push_back({TreeProblem::Kind::RootLabel, tok.index, tok.deprel});
    }
    if (tok.deprel.empty())
      report.push_back({TreeProblem::Kind::EmptyDeprel, tok.index, ""});
  }
  if (n > 0 && roots == 0)
    report.push_back({TreeProblem::Kind::NoRoot, 0, ""});
  if (roots > 1)
    report.push_back({TreeProblem::Kind::MultipleRoots, 0,
                      std::to_string(roots) + " roots"});
  if (structure_ok) {
    // Walk up from every node; anything that cannot reach node 0 is in a
    // cycle or hangs off one.
    std::vector<int> state(n + 1, 0);  // 0 unvisited, 1 on path, 2 ok, 3 bad
    for (int start = 1; start <= n; ++start) {
      std::vector<int> path;
      int v = start;
      while (v != 0 && state[v] == 0) {
        state[v] = 1;
        path.push_back(v);
        v = t.at(v).head;
      }
      const bool ok = (v == 0) || state[v] == 2;
      const bool hit_cycle = v != 0 && state[v] == 1;
      for (int u : path) state[u] = ok ? 2 : 3;
      if (hit_cycle)
        report.push_back({TreeProblem::Kind::Cycle, start, ""});
      else if (!ok && state[start] == 3 && (path.empty() || path.front() == start))
        report.push_back({TreeProblem::Kind::Disconnected, start, ""});
    }
  }
  return report;
}

bool has_problem(const ValidationReport& report, TreeProblem::Kind kind) {
  return std::any_of(report.begin(), report.end(),
                     [&](const TreeProblem& p) { return p.kind == kind; });
}

std::string describe(const TreeProblem& p) {
  std::string name;
  switch (p.kind) {
    case TreeProblem::Kind::BadIndexing: name = "bad indexing"; break;
    case TreeProblem::Kind::SelfHead: name = "self-headed token"; break;
    case TreeProblem::Kind::HeadOutOfRange: name = "head out of range"; break;
    case TreeProblem::Kind::NoRoot: name = "no root"; break;
    case TreeProblem::Kind::MultipleRoots: name = "multiple roots"; break;
    case TreeProblem::Kind::RootLabel: name = "non-root deprel on root"; break;
    case TreeProblem::Kind::EmptyDeprel: name = "empty deprel"; break;
    case TreeProblem::Kind::Cycle: name = "cycle"; break;
    case TreeProblem::Kind::Disconnected: name = "disconnected"; break;
  }
  std::string out = name;
  if (p.token > 0) out += " at token " + std::to_string(p.token);
  if (!p.detail.empty()) out += " (" + p.detail + ")";
  return out;
}

const std::set<std::string>& default_promotion_relations() {
  static const std::set<std::string> kRelations = {"case", "cop", "mark", "cc"};
  return kRelations;
}

DepTree promote_function_heads(const DepTree& t,
                               const std::set<std::string>& relations) {
  DepTree out = t;
  const int n = out.size();
  if (n == 0) return out;

  // Depths in the original tree; promotion rewires bottom-up so a promoted
  // word is itself eligible as a head later in the pass.
  std::vector<int> depth(n + 1, -1);
  for (int i = 1; i <= n; ++i) {
    int d = 0;
    int v = i;
    while (v != 0 && d <= n) {
      v = t.at(v).head;
      ++d;
    }
    depth[i] = d;
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return depth[a] > depth[b]; });

  for (int h : order) {
    int candidate = 0;
    for (int d = 1; d <= n; ++d) {
      if (out.at(d).head == h && relations.count(out.at(d).deprel)) {
        candidate = d;
        break;  // leftmost
      }
    }
    if (candidate == 0) continue;
    Token& head = out.at(h);
    Token& dep = out.at(candidate);
    const std::string relation = dep.deprel;
    dep.head = head.head;
    dep.deprel = head.deprel;
    head.head = candidate;
    head.deprel = relation;
  }
  return out;
}

DepTree strip_punct(const DepTree& t) {
  const int n = t.size();
  std::vector<bool> removed(n + 1, false);
  int surviving = 0;
  for (const Token& tok : t.tokens) {
    if (tok.deprel == "punct")
      removed[tok.index] = true;
    else
      ++surviving;
  }
  if (surviving == 0)
    throw DataError("sentence contains only punctuation (doc " + t.doc_id +
                    ", sentence " + std::to_string(t.sent_idx) + ")");
  if (surviving == n) return t;

  // New head = nearest surviving ancestor (0 if the walk ends at the root).
  std::vector<int> new_index(n + 1, 0);
  int next = 0;
  for (int i = 1; i <= n; ++i)
    if (!removed[i]) new_index[i] = ++next;

  DepTree out;
  out.doc_id = t.doc_id;
  out.sent_idx = t.sent_idx;
  out.tokens.reserve(surviving);
  for (int i = 1; i <= n; ++i) {
    if (removed[i]) continue;
    Token tok = t.at(i);
    int h = tok.head;
    int hops = 0;
    while (h != 0 && removed[h] && hops <= n) {
      h = t.at(h).head;
      ++hops;
    }
    tok.index = new_index[i];
    tok.head = h == 0 ? 0 : new_index[h];
    out.tokens.push_back(tok);
  }

  // A removed root can leave several top-level survivors: keep the leftmost
  // as root and hang the rest off it.
  int root = 0;
  for (Token& tok : out.tokens) {
    if (tok.head != 0) continue;
    if (root == 0) {
      root = tok.index;
      tok.deprel = "root";
    } else {
      tok.head = root;
      if (tok.deprel == "root") tok.deprel = "dep";
    }
  }
  return out;
}

namespace {

bool parse_token_line(const std::string& line, Token* tok, std::string* error) {
  std::vector<std::string> cols = split(line, '\t');
  if (cols.size() != 10) {
    *error = "expected 10 tab-separated columns, got " +
             std::to_string(cols.size());
    return false;
  }
  const std::string& id = cols[0];
  if (!id.empty() && id[0] >= '0' && id[0] <= '9' &&
      (id.find('-') != std::string::npos || id.find('.') != std::string::npos)) {
    tok->index = -1;  // range / empty node: caller skips
    return true;
  }
  long long index = 0, head = 0;
  if (!parse_int(id, index) || index < 1) {
    *error = "bad token id '" + id + "'";
    return false;
  }
  if (cols[1].empty() || cols[1] == "_") {
    *error = "empty form";
    return false;
  }
  if (!parse_int(cols[6], head) || head < 0) {
    *error = "bad head '" + cols[6] + "'";
    return false;
  }
  std::string deprel = cols[7];
  if (auto colon = deprel.find(':'); colon != std::string::npos)
    deprel.resize(colon);
  if (deprel.empty() || deprel == "_") {
    *error = "empty deprel";
    return false;
  }
  tok->index = static_cast<int>(index);
  tok->form = cols[1];
  tok->upos = cols[3];
  tok->head = static_cast<int>(head);
  tok->deprel = deprel;
  return true;
}

}  // namespace

ConlluReader::ConlluReader(std::istream& in, ConlluOptions options)
    : in_(in), options_(options) {}

std::optional<DepTree> ConlluReader::next() {
  std::string line;
  for (;;) {
    DepTree tree;
    std::string failure;
    long long failure_line = 0;
    long long first_token_line = 0;
    bool in_sentence = false;
    bool pending_newdoc = false;
    std::string pending_doc_id;

    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) {
        if (in_sentence) break;  // blank line terminates a sentence block
        continue;
      }
      if (line[0] == '#') {
        std::string_view comment = trim(std::string_view(line).substr(1));
        if (comment.rfind("newdoc", 0) == 0) {
          std::string_view rest = trim(comment.substr(6));
          // "# newdoc" or "# newdoc id = X"; anything else is an ordinary
          // comment ("# newdocument_count = 3" must not open a document).
          if (rest.empty()) {
            pending_newdoc = true;
            pending_doc_id.clear();
          } else if (rest.rfind("id", 0) == 0) {
            rest = trim(rest.substr(2));
            if (!rest.empty() && rest[0] == '=') {
              pending_newdoc = true;
              pending_doc_id = std::string(trim(rest.substr(1)));
            }
          }
        }
        continue;
      }
      in_sentence = true;
      if (first_token_line == 0) first_token_line = line_no_;
      Token tok;
      std::string error;
      if (!parse_token_line(line, &tok, &error)) {
        if (failure.empty()) {
          failure = error;
          failure_line = line_no_;
        }
        continue;
      }
      if (tok.index < 0) continue;  // multiword range or empty node
      tree.tokens.push_back(tok);
    }

    if (!in_sentence && tree.tokens.empty() && in_.eof()) return std::nullopt;

    if (pending_newdoc) {
      seen_newdoc_ = true;
      doc_id_ = pending_doc_id.empty() ? "d" + std::to_string(doc_counter_)
                                       : pending_doc_id;
      ++doc_counter_;
      sent_in_doc_ = 0;
      doc_open_ = true;
    } else if (!doc_open_) {
      doc_id_ = "d" + std::to_string(doc_counter_);
      ++doc_counter_;
      sent_in_doc_ = 0;
      doc_open_ = true;
    } else if (!seen_newdoc_ && options_.fallback_doc_sentences > 0 &&
               sent_in_doc_ >= options_.fallback_doc_sentences) {
      used_fallback_ = true;
      doc_id_ = "d" + std::to_string(doc_counter_);
      ++doc_counter_;
      sent_in_doc_ = 0;
    }

    if (failure.empty() && tree.tokens.empty()) {
      failure = "sentence block contains no token lines";
      failure_line = first_token_line;
    }
    if (failure.empty()) {
      for (int i = 0; i < tree.size(); ++i) {
        if (tree.tokens[i].index != i + 1) {
          failure = "non-contiguous token ids (saw " +
                    std::to_string(tree.tokens[i].index) + ", expected " +
                    std::to_string(i + 1) + ")";
          failure_line = first_token_line;
          break;
        }
      }
    }
    if (!failure.empty()) {
      const std::string message =
          "line " + std::to_string(failure_line) + ": " + failure;
      if (options_.strict) throw DataError(message);
      errors_.push_back({failure_line, failure});
      continue;  // sentence dropped; sent_in_doc_ not consumed
    }

    tree.doc_id = doc_id_;
    tree.sent_idx = sent_in_doc_;
    ++sent_in_doc_;
    ++sentences_read_;
    return tree;
  }
}

std::vector<DepTree> parse_conllu(std::istream& in, ConlluOptions options,
                                  std::vector<ConlluRecordError>* errors) {
  ConlluReader reader(in, options);
  std::vector<DepTree> out;
  while (auto tree = reader.next()) out.push_back(std::move(*tree));
  if (errors) *errors = reader.errors();
  return out;
}

std::vector<DepTree> parse_conllu_string(const std::string& text,
                                         ConlluOptions options) {
  std::istringstream in(text);
  return parse_conllu(in, options);
}

void to_conllu(const DepTree& t, std::ostream& out) {
  if (t.sent_idx == 0) out << "# newdoc id = " << t.doc_id << "\n";
  for (const Token& tok : t.tokens) {
    out << tok.index << '\t' << tok.form << "\t_\t"
        << (tok.upos.empty() ? "_" : tok.upos) << "\t_\t_\t" << tok.head
        << '\t' << tok.deprel << "\t_\t_\n";
  }
  out << "\n";
}

}  // namespace wordorder
