#include "treemorph/tree.hpp"

#include <algorithm>
#include <charconv>
#include <queue>
#include <sstream>

namespace treemorph {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidNodeCount: return "InvalidNodeCount";
    case ErrorCode::NodeOutOfRange: return "NodeOutOfRange";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::WrongEdgeCount: return "WrongEdgeCount";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NotAnEdge: return "NotAnEdge";
    case ErrorCode::SymbolOutOfRange: return "SymbolOutOfRange";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::NotNeighbors: return "NotNeighbors";
    case ErrorCode::AlreadyLeaf: return "AlreadyLeaf";
    case ErrorCode::NotALeaf: return "NotALeaf";
    case ErrorCode::NotAttachedToJ: return "NotAttachedToJ";
    case ErrorCode::JKNotNeighbors: return "JKNotNeighbors";
    case ErrorCode::SubtreeLeaks: return "SubtreeLeaks";
    case ErrorCode::KInsideSubtree: return "KInsideSubtree";
    case ErrorCode::RootAlreadySuperLeaf: return "RootAlreadySuperLeaf";
    case ErrorCode::RootNotMember: return "RootNotMember";
    case ErrorCode::NotASuperLeaf: return "NotASuperLeaf";
    case ErrorCode::WrongAttachment: return "WrongAttachment";
    case ErrorCode::TreeInvariantBroken: return "TreeInvariantBroken";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LinkStretch: return "LinkStretch";
    case ErrorCode::ApproachTimeout: return "ApproachTimeout";
    case ErrorCode::ArrangeTimeout: return "ArrangeTimeout";
    case ErrorCode::ParticipantBusy: return "ParticipantBusy";
    case ErrorCode::BadRangeConfig: return "BadRangeConfig";
    case ErrorCode::WorldSampleFailed: return "WorldSampleFailed";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "UnknownError";
}

LabeledTree LabeledTree::from_edges(int n, std::vector<Edge> edges) {
  if (n < 2) {
    throw Error(ErrorCode::InvalidNodeCount,
                "a tree needs at least 2 nodes, got " + std::to_string(n));
  }
  for (Edge& e : edges) {
    if (e.a == e.b) {
      throw Error(ErrorCode::SelfLoop, "edge (" + std::to_string(e.a) + "," +
                                           std::to_string(e.b) + ")");
    }
    if (e.a < 1 || e.a > n || e.b < 1 || e.b > n) {
      throw Error(ErrorCode::NodeOutOfRange,
                  "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                      ") with n=" + std::to_string(n));
    }
    e = make_edge(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw Error(ErrorCode::DuplicateEdge, "edge list contains a repeat");
  }

  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(n) + 1);
  for (const Edge& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }

  // Connected components via BFS from node 1. Checked before the edge-count
  // rule; see the header note.
  std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
  std::queue<NodeId> q;
  q.push(1);
  seen[1] = 1;
  int reached = 1;
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (NodeId w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        q.push(w);
      }
    }
  }
  if (reached != n) {
    throw Error(ErrorCode::Disconnected, std::to_string(n - reached) +
                                             " node(s) unreachable from 1");
  }
  if (static_cast<int>(edges.size()) != n - 1) {
    throw Error(ErrorCode::WrongEdgeCount,
                "expected " + std::to_string(n - 1) + " edges, got " +
                    std::to_string(edges.size()));
  }

  LabeledTree t;
  t.n_ = n;
  t.edges_ = std::move(edges);
  t.adj_ = std::move(adj);
  return t;
}

const std::vector<NodeId>& LabeledTree::neighbors(NodeId v) const {
  if (v < 1 || v > n_) {
    throw Error(ErrorCode::NodeOutOfRange,
                "node " + std::to_string(v) + " with n=" + std::to_string(n_));
  }
  return adj_[v];
}

int LabeledTree::degree(NodeId v) const {
  return static_cast<int>(neighbors(v).size());
}

bool LabeledTree::has_edge(NodeId u, NodeId v) const {
  if (u < 1 || u > n_ || v < 1 || v > n_) return false;
  const auto& nb = adj_[u];
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<NodeId> LabeledTree::path_between(NodeId s, NodeId d) const {
  neighbors(s);  // range checks
  neighbors(d);
  // One traversal from d recording parents; reading parents from s then
  // yields the path in s..d order directly.
  std::vector<NodeId> parent(static_cast<std::size_t>(n_) + 1, 0);
  std::vector<char> seen(static_cast<std::size_t>(n_) + 1, 0);
  std::queue<NodeId> q;
  q.push(d);
  seen[d] = 1;
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    if (v == s) break;
    for (NodeId w : adj_[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        parent[w] = v;
        q.push(w);
      }
    }
  }
  std::vector<NodeId> path;
  for (NodeId v = s; v != d; v = parent[v]) path.push_back(v);
  path.push_back(d);
  return path;
}

SuperLeaf subtree_rooted_at(const LabeledTree& tree, NodeId j, NodeId away_from) {
  if (!tree.has_edge(j, away_from)) {
    throw Error(ErrorCode::NotAnEdge, "(" + std::to_string(j) + "," +
                                          std::to_string(away_from) + ")");
  }
  std::vector<char> seen(static_cast<std::size_t>(tree.node_count()) + 1, 0);
  seen[away_from] = 1;  // blocked direction
  seen[j] = 1;
  std::vector<NodeId> members{j};
  std::queue<NodeId> q;
  q.push(j);
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (NodeId w : tree.neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        members.push_back(w);
        q.push(w);
      }
    }
  }
  std::sort(members.begin(), members.end());
  return SuperLeaf{j, std::move(members)};
}

bool is_super_leaf(const LabeledTree& tree, const SuperLeaf& s) {
  const int n = tree.node_count();
  if (s.root < 1 || s.root > n || s.members.empty()) return false;
  std::vector<char> member(static_cast<std::size_t>(n) + 1, 0);
  for (NodeId m : s.members) {
    if (m < 1 || m > n) return false;
    if (member[m]) return false;  // duplicate
    member[m] = 1;
  }
  if (!member[s.root]) return false;

  // Connectivity of the induced subgraph, starting from root.
  std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
  std::queue<NodeId> q;
  q.push(s.root);
  seen[s.root] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (NodeId w : tree.neighbors(v)) {
      if (member[w] && !seen[w]) {
        seen[w] = 1;
        ++reached;
        q.push(w);
      }
    }
  }
  if (reached != s.members.size()) return false;

  int outside_at_root = 0;
  for (NodeId m : s.members) {
    for (NodeId w : tree.neighbors(m)) {
      if (member[w]) continue;
      if (m != s.root) return false;  // a non-root member leaks outside
      ++outside_at_root;
    }
  }
  return outside_at_root == 1;
}

AdjacencyMatrix AdjacencyMatrix::from_tree(const LabeledTree& tree) {
  AdjacencyMatrix m;
  m.n = tree.node_count();
  m.cells.assign(static_cast<std::size_t>(m.n) * m.n, 0);
  for (const Edge& e : tree.edges()) m.set(e.a - 1, e.b - 1);
  return m;
}

std::string format_tree_text(const LabeledTree& tree) {
  std::ostringstream out;
  out << "n=" << tree.node_count() << "\n";
  for (const Edge& e : tree.edges()) out << e.a << " " << e.b << "\n";
  return out.str();
}

namespace {

int parse_int(std::string_view token, int line_no) {
  int value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                           ": bad integer '" +
                                           std::string(token) + "'");
  }
  return value;
}

}  // namespace

LabeledTree parse_tree_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  int n = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (n < 0) {
      if (line.rfind("n=", 0) != 0) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": expected header n=<N>");
      }
      n = parse_int(std::string_view(line).substr(2), line_no);
      continue;
    }
    std::istringstream ls(line);
    std::string ta, tb, rest;
    if (!(ls >> ta >> tb) || (ls >> rest)) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected 'u v'");
    }
    edges.push_back(Edge{parse_int(ta, line_no), parse_int(tb, line_no)});
  }
  if (n < 0) throw Error(ErrorCode::ParseError, "missing header n=<N>");
  return LabeledTree::from_edges(n, std::move(edges));
}

}  // namespace treemorph
