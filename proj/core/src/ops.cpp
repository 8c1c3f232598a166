#include "treemorph/ops.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace treemorph {

bool operator==(const OpLogEntry& x, const OpLogEntry& y) {
  return format_op_log_entry(x) == format_op_log_entry(y);
}

namespace {

std::string node_str(NodeId v) { return std::to_string(v); }

// Shared tail: build the post-op tree from the pre-op tree plus an edge
// diff, attach locality certificates, and re-check the tree invariant.
OpResult finish(const LabeledTree& pre, TopologyOp op, std::vector<Edge> removed,
                std::vector<Edge> added) {
  std::sort(removed.begin(), removed.end());
  std::sort(added.begin(), added.end());

  std::set<Edge> edge_set(pre.edges().begin(), pre.edges().end());
  for (const Edge& e : removed) edge_set.erase(e);
  for (const Edge& e : added) edge_set.insert(e);

  OpResult result{
      [&] {
        try {
          return LabeledTree::from_edges(
              pre.node_count(), std::vector<Edge>(edge_set.begin(), edge_set.end()));
        } catch (const Error& err) {
          throw Error(ErrorCode::TreeInvariantBroken,
                      std::string("operation result is not a tree (") +
                          err.what() + ")");
        }
      }(),
      OpLogEntry{std::move(op), std::move(removed), std::move(added), {}}};

  for (const Edge& e : result.log.added) {
    std::vector<NodeId> path = pre.path_between(e.a, e.b);
    if (path.size() > 3) {
      throw Error(ErrorCode::TreeInvariantBroken,
                  "added edge (" + node_str(e.a) + "," + node_str(e.b) +
                      ") spans more than 2 hops");
    }
    result.log.certificates.push_back(std::move(path));
  }
  return result;
}

// SuperLeafization accepts a looser shape than is_super_leaf: the member set
// must be a closed hanging bundle except that the root may still have many
// outside neighbors. Returns root's outside neighbors, sorted.
std::vector<NodeId> check_bundle(const LabeledTree& tree, const SuperLeaf& s) {
  const int n = tree.node_count();
  if (s.root < 1 || s.root > n) {
    throw Error(ErrorCode::NodeOutOfRange, "root " + node_str(s.root));
  }
  std::vector<char> member(static_cast<std::size_t>(n) + 1, 0);
  for (NodeId m : s.members) {
    if (m < 1 || m > n) {
      throw Error(ErrorCode::NodeOutOfRange, "member " + node_str(m));
    }
    member[m] = 1;
  }
  if (!member[s.root]) {
    throw Error(ErrorCode::RootNotMember,
                "root " + node_str(s.root) + " not in member set");
  }
  std::vector<NodeId> outside;
  for (NodeId m : s.members) {
    for (NodeId w : tree.neighbors(m)) {
      if (member[w]) continue;
      if (m != s.root) {
        throw Error(ErrorCode::SubtreeLeaks,
                    "member " + node_str(m) + " has outside neighbor " +
                        node_str(w));
      }
      outside.push_back(w);
    }
  }
  std::sort(outside.begin(), outside.end());
  return outside;
}

}  // namespace

OpResult leafization(const LabeledTree& tree, NodeId j, NodeId k) {
  if (!tree.has_edge(j, k)) {
    throw Error(ErrorCode::NotNeighbors,
                "L(" + node_str(j) + "," + node_str(k) + ")");
  }
  if (tree.degree(j) <= 1) {
    throw Error(ErrorCode::AlreadyLeaf, "node " + node_str(j));
  }
  std::vector<Edge> removed, added;
  for (NodeId p : tree.neighbors(j)) {
    if (p == k) continue;
    removed.push_back(make_edge(j, p));
    added.push_back(make_edge(k, p));
  }
  return finish(tree, Leafization{j, k}, std::move(removed), std::move(added));
}

OpResult leaf_transfer(const LabeledTree& tree, NodeId l, NodeId j, NodeId k) {
  if (tree.degree(l) != 1) {
    throw Error(ErrorCode::NotALeaf, "node " + node_str(l));
  }
  if (!tree.has_edge(l, j)) {
    throw Error(ErrorCode::NotAttachedToJ,
                "leaf " + node_str(l) + " not attached to " + node_str(j));
  }
  if (k == l || !tree.has_edge(j, k)) {
    throw Error(ErrorCode::JKNotNeighbors,
                "(" + node_str(j) + "," + node_str(k) + ")");
  }
  return finish(tree, LeafTransfer{l, j, k}, {make_edge(l, j)}, {make_edge(l, k)});
}

OpResult super_leafization(const LabeledTree& tree, const SuperLeaf& s, NodeId k) {
  std::vector<NodeId> outside = check_bundle(tree, s);
  if (outside.size() <= 1) {
    throw Error(ErrorCode::RootAlreadySuperLeaf,
                "root " + node_str(s.root) + " has " +
                    std::to_string(outside.size()) + " outside neighbor(s)");
  }
  if (!std::binary_search(outside.begin(), outside.end(), k)) {
    if (std::find(s.members.begin(), s.members.end(), k) != s.members.end()) {
      throw Error(ErrorCode::KInsideSubtree, "k=" + node_str(k));
    }
    throw Error(ErrorCode::NotNeighbors,
                "k=" + node_str(k) + " is not an outside neighbor of root " +
                    node_str(s.root));
  }
  std::vector<Edge> removed, added;
  for (NodeId p : outside) {
    if (p == k) continue;
    removed.push_back(make_edge(s.root, p));
    added.push_back(make_edge(k, p));
  }
  return finish(tree, SuperLeafization{s, k}, std::move(removed), std::move(added));
}

OpResult super_leaf_transfer(const LabeledTree& tree, const SuperLeaf& s,
                             NodeId j, NodeId k) {
  if (!is_super_leaf(tree, s)) {
    throw Error(ErrorCode::NotASuperLeaf, "root " + node_str(s.root));
  }
  std::vector<NodeId> outside = check_bundle(tree, s);  // exactly one entry
  if (outside.front() != j) {
    throw Error(ErrorCode::WrongAttachment,
                "super-leaf at " + node_str(s.root) + " attaches to " +
                    node_str(outside.front()) + ", not " + node_str(j));
  }
  if (k == s.root || !tree.has_edge(j, k)) {
    throw Error(ErrorCode::JKNotNeighbors,
                "(" + node_str(j) + "," + node_str(k) + ")");
  }
  if (std::find(s.members.begin(), s.members.end(), k) != s.members.end()) {
    throw Error(ErrorCode::KInsideSubtree, "k=" + node_str(k));
  }
  return finish(tree, SuperLeafTransfer{s, j, k}, {make_edge(s.root, j)},
                {make_edge(s.root, k)});
}

OpResult apply(const LabeledTree& tree, const TopologyOp& op) {
  return std::visit(
      [&](const auto& concrete) -> OpResult {
        using T = std::decay_t<decltype(concrete)>;
        if constexpr (std::is_same_v<T, Leafization>) {
          return leafization(tree, concrete.j, concrete.k);
        } else if constexpr (std::is_same_v<T, LeafTransfer>) {
          return leaf_transfer(tree, concrete.l, concrete.j, concrete.k);
        } else if constexpr (std::is_same_v<T, SuperLeafization>) {
          return super_leafization(tree, concrete.s, concrete.k);
        } else {
          return super_leaf_transfer(tree, concrete.s, concrete.j, concrete.k);
        }
      },
      op);
}

std::vector<NodeId> touched_nodes(const OpLogEntry& entry) {
  std::set<NodeId> nodes;
  for (const Edge& e : entry.removed) {
    nodes.insert(e.a);
    nodes.insert(e.b);
  }
  for (const Edge& e : entry.added) {
    nodes.insert(e.a);
    nodes.insert(e.b);
  }
  return {nodes.begin(), nodes.end()};
}

namespace {

void append_members(std::ostringstream& out, const SuperLeaf& s) {
  out << " members=";
  for (std::size_t i = 0; i < s.members.size(); ++i) {
    if (i) out << ",";
    out << s.members[i];
  }
}

}  // namespace

std::string format_op(const TopologyOp& op) {
  std::ostringstream out;
  std::visit(
      [&](const auto& concrete) {
        using T = std::decay_t<decltype(concrete)>;
        if constexpr (std::is_same_v<T, Leafization>) {
          out << "L " << concrete.j << " " << concrete.k;
        } else if constexpr (std::is_same_v<T, LeafTransfer>) {
          out << "LT " << concrete.l << " " << concrete.j << " " << concrete.k;
        } else if constexpr (std::is_same_v<T, SuperLeafization>) {
          out << "SL " << concrete.s.root << " " << concrete.k;
          append_members(out, concrete.s);
        } else {
          out << "SLT " << concrete.s.root << " " << concrete.j << " "
              << concrete.k;
          append_members(out, concrete.s);
        }
      },
      op);
  return out.str();
}

std::string format_op_log_entry(const OpLogEntry& entry) {
  std::ostringstream out;
  out << format_op(entry.op) << " |";
  for (const Edge& e : entry.removed) out << " -(" << e.a << "," << e.b << ")";
  out << " |";
  for (const Edge& e : entry.added) out << " +(" << e.a << "," << e.b << ")";
  if (!entry.added.empty()) {
    out << " | cert";
    for (std::size_t i = 0; i < entry.added.size(); ++i) {
      out << " " << entry.added[i].a << "-" << entry.added[i].b << ":";
      const auto& path = entry.certificates[i];
      for (std::size_t p = 0; p < path.size(); ++p) {
        if (p) out << ",";
        out << path[p];
      }
    }
  }
  return out.str();
}

namespace {

class TokenReader {
 public:
  explicit TokenReader(std::string_view text) : in_(std::string(text)) {}

  std::string next(const char* what) {
    std::string tok;
    if (!(in_ >> tok)) {
      throw Error(ErrorCode::ParseError, std::string("expected ") + what);
    }
    return tok;
  }

  bool done() {
    std::string tok;
    return !(in_ >> tok);
  }

 private:
  std::istringstream in_;
};

NodeId to_node(const std::string& tok) {
  NodeId v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::ParseError, "bad node id '" + tok + "'");
  }
  return v;
}

std::vector<NodeId> parse_id_list(std::string_view text) {
  std::vector<NodeId> ids;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    ids.push_back(to_node(std::string(text.substr(pos, comma - pos))));
    pos = comma + 1;
  }
  return ids;
}

std::vector<NodeId> parse_members(TokenReader& reader) {
  const std::string tok = reader.next("members=<list>");
  if (tok.rfind("members=", 0) != 0) {
    throw Error(ErrorCode::ParseError, "expected members=<list>, got '" + tok + "'");
  }
  return parse_id_list(std::string_view(tok).substr(8));
}

Edge parse_edge_token(std::string_view tok) {
  // "(u,v)" with optional +/- prefix already stripped
  if (tok.size() < 5 || tok.front() != '(' || tok.back() != ')') {
    throw Error(ErrorCode::ParseError, "bad edge '" + std::string(tok) + "'");
  }
  const std::string_view body = tok.substr(1, tok.size() - 2);
  const std::size_t comma = body.find(',');
  if (comma == std::string_view::npos) {
    throw Error(ErrorCode::ParseError, "bad edge '" + std::string(tok) + "'");
  }
  return make_edge(to_node(std::string(body.substr(0, comma))),
                   to_node(std::string(body.substr(comma + 1))));
}

}  // namespace

TopologyOp parse_op(std::string_view text) {
  TokenReader reader(text);
  const std::string kind = reader.next("op kind");
  TopologyOp op;
  if (kind == "L") {
    const NodeId j = to_node(reader.next("j"));
    const NodeId k = to_node(reader.next("k"));
    op = Leafization{j, k};
  } else if (kind == "LT") {
    const NodeId l = to_node(reader.next("l"));
    const NodeId j = to_node(reader.next("j"));
    const NodeId k = to_node(reader.next("k"));
    op = LeafTransfer{l, j, k};
  } else if (kind == "SL") {
    const NodeId root = to_node(reader.next("root"));
    const NodeId k = to_node(reader.next("k"));
    op = SuperLeafization{SuperLeaf{root, parse_members(reader)}, k};
  } else if (kind == "SLT") {
    const NodeId root = to_node(reader.next("root"));
    const NodeId j = to_node(reader.next("j"));
    const NodeId k = to_node(reader.next("k"));
    op = SuperLeafTransfer{SuperLeaf{root, parse_members(reader)}, j, k};
  } else {
    throw Error(ErrorCode::ParseError, "unknown op kind '" + kind + "'");
  }
  if (!reader.done()) {
    throw Error(ErrorCode::ParseError, "trailing tokens after op");
  }
  return op;
}

OpLogEntry parse_op_log_entry(std::string_view line) {
  // split on '|' into: op, removed, added, optional cert
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t bar = line.find('|', pos);
    if (bar == std::string_view::npos) {
      parts.emplace_back(line.substr(pos));
      break;
    }
    parts.emplace_back(line.substr(pos, bar - pos));
    pos = bar + 1;
  }
  if (parts.size() < 3 || parts.size() > 4) {
    throw Error(ErrorCode::ParseError, "op log line needs 3 or 4 sections");
  }

  OpLogEntry entry;
  entry.op = parse_op(parts[0]);

  {
    std::istringstream in(parts[1]);
    std::string tok;
    while (in >> tok) {
      if (tok.front() != '-') {
        throw Error(ErrorCode::ParseError, "expected -(u,v), got '" + tok + "'");
      }
      entry.removed.push_back(parse_edge_token(std::string_view(tok).substr(1)));
    }
  }
  {
    std::istringstream in(parts[2]);
    std::string tok;
    while (in >> tok) {
      if (tok.front() != '+') {
        throw Error(ErrorCode::ParseError, "expected +(u,v), got '" + tok + "'");
      }
      entry.added.push_back(parse_edge_token(std::string_view(tok).substr(1)));
    }
  }
  if (parts.size() == 4) {
    std::istringstream in(parts[3]);
    std::string tok;
    if (!(in >> tok) || tok != "cert") {
      throw Error(ErrorCode::ParseError, "expected cert section");
    }
    while (in >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos) {
        throw Error(ErrorCode::ParseError, "bad cert '" + tok + "'");
      }
      entry.certificates.push_back(
          parse_id_list(std::string_view(tok).substr(colon + 1)));
    }
    if (entry.certificates.size() != entry.added.size()) {
      throw Error(ErrorCode::ParseError, "cert count does not match added edges");
    }
  } else if (!entry.added.empty()) {
    throw Error(ErrorCode::ParseError, "missing cert section for added edges");
  }
  return entry;
}

}  // namespace treemorph
