#include "treemorph/protocol.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace treemorph {

const char* protocol_name(Protocol p) {
  return p == Protocol::kLine ? "line" : "star";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "line") return Protocol::kLine;
  if (name == "star") return Protocol::kStar;
  throw Error(ErrorCode::BadConfig, "unknown protocol '" + std::string(name) + "'");
}

namespace {

std::string role_name(const Role& r) {
  switch (r.kind) {
    case RoleKind::kFree: return "Free";
    case RoleKind::kBusy: return "Busy";
    case RoleKind::kLineEndpoint: return "LineEndpoint";
    case RoleKind::kStarCenterCandidate: return "StarCenterCandidate";
    case RoleKind::kBranchCarried:
      return "BranchCarried from=" + std::to_string(r.carried_from);
  }
  return "?";
}

std::pair<int, NodeId> score_of(int degree, NodeId label) { return {degree, label}; }

std::string format_intent(const OpIntent& intent) {
  std::ostringstream out;
  switch (intent.kind) {
    case OpIntent::Kind::kLeafization:
      out << "L " << intent.j << " " << intent.k;
      break;
    case OpIntent::Kind::kLeafTransfer:
      out << "LT " << intent.moved << " " << intent.j << " " << intent.k;
      break;
    case OpIntent::Kind::kSuperLeafTransfer:
      out << "SLT " << intent.moved << " " << intent.j << " " << intent.k;
      break;
  }
  return out.str();
}

}  // namespace

std::optional<OpIntent> line_rule(const LocalView& view) {
  const int d = view.self_degree();
  if (d <= 2) return std::nullopt;  // locally path-like already

  std::vector<NodeId> leaves, heavy;
  for (NodeId w : view.neighbor_ids) {
    (view.neighbor_degrees.at(w) == 1 ? leaves : heavy).push_back(w);
  }

  if (!leaves.empty()) {
    // Merge: fold a sibling branch onto the lowest adjacent leaf. This is the
    // only move that shrinks the junction potential, so it outranks walks.
    const NodeId k = leaves.front();
    if (leaves.size() >= 2) {
      return OpIntent{OpIntent::Kind::kLeafTransfer, leaves[1], view.self_id, k, 0};
    }
    return OpIntent{OpIntent::Kind::kSuperLeafTransfer, heavy.front(), view.self_id,
                    k, 0};
  }

  // Walk: no adjacent leaf to merge into, so hand one branch onward. A branch
  // that already walked carries the attachment it came from; never sending it
  // back there keeps the hand-off on a simple path, which must run into a
  // leaf. A branch that has not walked yet starts at the lowest neighbor.
  NodeId branch = 0, came_from = 0;
  for (NodeId w : view.neighbor_ids) {
    const Role& role = view.roles.at(w);
    if (role.kind == RoleKind::kBranchCarried) {
      branch = w;
      came_from = role.carried_from;
      break;
    }
  }
  if (branch == 0) branch = view.neighbor_ids.front();
  for (NodeId w : view.neighbor_ids) {
    if (w != branch && w != came_from) {
      return OpIntent{OpIntent::Kind::kSuperLeafTransfer, branch, view.self_id, w, 1};
    }
  }
  return std::nullopt;  // unreachable at degree >= 3
}

std::optional<OpIntent> star_rule(const LocalView& view) {
  const int d = view.self_degree();
  if (d <= 1) return std::nullopt;
  std::pair<int, NodeId> best{-1, 0};
  for (NodeId w : view.neighbor_ids) {
    best = std::max(best, score_of(view.neighbor_degrees.at(w), w));
  }
  if (best < score_of(d, view.self_id)) return std::nullopt;  // local maximum
  return OpIntent{OpIntent::Kind::kLeafization, 0, view.self_id, best.second, 0};
}

ProtocolEngine::ProtocolEngine(LabeledTree initial, Protocol protocol,
                               std::uint64_t seed)
    : tree_(std::move(initial)), protocol_(protocol) {
  (void)seed;  // the shipped rules are deterministic
  const int n = tree_.node_count();
  for (NodeId v = 1; v <= n; ++v) roles_[v] = Role{};
  log_line("tree n=" + std::to_string(n));
  for (const Edge& e : tree_.edges()) {
    log_line("edge " + std::to_string(e.a) + " " + std::to_string(e.b));
  }
}

void ProtocolEngine::log_line(std::string line) { log_.push_back(std::move(line)); }

std::string ProtocolEngine::log_text() const {
  std::string out;
  for (const std::string& line : log_) {
    out += line;
    out += '\n';
  }
  return out;
}

LocalView ProtocolEngine::view_of(NodeId v) const {
  LocalView view;
  view.self_id = v;
  view.neighbor_ids = tree_.neighbors(v);
  view.roles[v] = roles_.at(v);
  for (NodeId w : view.neighbor_ids) {
    view.neighbor_degrees[w] = tree_.degree(w);
    view.two_hop[w] = tree_.neighbors(w);
    view.roles[w] = roles_.at(w);
  }
  return view;
}

RoundOutcome ProtocolEngine::step_round() {
  ++round_;
  const int n = tree_.node_count();
  RoundOutcome outcome;
  outcome.round = round_;
  log_line("round " + std::to_string(round_));

  // Informational roles, refreshed from the round-start tree. A node whose
  // subtree was transferred last round privately remembers the old
  // attachment and advertises it now, over edges that exist by now.
  for (NodeId v = 1; v <= n; ++v) {
    Role r;
    if (protocol_ == Protocol::kLine && tree_.degree(v) == 1) {
      r.kind = RoleKind::kLineEndpoint;
    } else if (protocol_ == Protocol::kLine) {
      auto pending = pending_carried_.find(v);
      if (pending != pending_carried_.end()) {
        r.kind = RoleKind::kBranchCarried;
        r.carried_from = pending->second;
      } else if (roles_.at(v).kind == RoleKind::kBranchCarried) {
        r = roles_.at(v);  // sticky until the branch moves again
      }
    } else if (protocol_ == Protocol::kStar && tree_.degree(v) >= 2) {
      bool local_max = true;
      for (NodeId w : tree_.neighbors(v)) {
        if (score_of(tree_.degree(w), w) > score_of(tree_.degree(v), v)) {
          local_max = false;
          break;
        }
      }
      if (local_max) {
        r.kind = RoleKind::kStarCenterCandidate;
        r.score_degree = tree_.degree(v);
        r.score_label = v;
      }
    }
    if (!(r == roles_.at(v))) {
      roles_[v] = r;
      for (NodeId w : tree_.neighbors(v)) {
        log_line("msg RoleUpdate " + std::to_string(v) + " " + std::to_string(w) +
                 " " + role_name(r));
      }
    }
  }
  pending_carried_.clear();

  for (NodeId v = 1; v <= n; ++v) {
    for (NodeId w : tree_.neighbors(v)) {
      log_line("msg ViewShare " + std::to_string(v) + " " + std::to_string(w));
    }
  }

  struct Proposal {
    OpIntent intent;
    NodeId proposer;
    std::vector<NodeId> participants;
  };
  std::vector<Proposal> proposals;
  for (NodeId v = 1; v <= n; ++v) {
    if (roles_.at(v).kind == RoleKind::kBusy) continue;
    const LocalView view = view_of(v);
    std::optional<OpIntent> intent =
        protocol_ == Protocol::kLine ? line_rule(view) : star_rule(view);
    if (!intent) continue;
    Proposal p{*intent, v, {}};
    if (intent->kind == OpIntent::Kind::kLeafization) {
      p.participants = tree_.neighbors(v);
      p.participants.push_back(v);
    } else {
      p.participants = {intent->moved, intent->j, intent->k};
    }
    std::sort(p.participants.begin(), p.participants.end());
    proposals.push_back(std::move(p));
  }
  outcome.proposals = static_cast<int>(proposals.size());

  for (const Proposal& p : proposals) {
    for (NodeId w : p.participants) {
      if (w == p.proposer) continue;
      log_line("msg OpPropose " + std::to_string(p.proposer) + " " +
               std::to_string(w) + " " + format_intent(p.intent));
    }
  }

  // Accept phase: every participant backs the lowest-keyed proposal it can
  // see; its own counts too. Key order makes merges outrank walks.
  std::map<NodeId, int> chosen;  // participant -> proposal index
  for (int i = 0; i < static_cast<int>(proposals.size()); ++i) {
    const auto key = std::pair(proposals[i].intent.priority, proposals[i].proposer);
    for (NodeId w : proposals[i].participants) {
      auto it = chosen.find(w);
      if (it == chosen.end() ||
          key < std::pair(proposals[it->second].intent.priority,
                          proposals[it->second].proposer)) {
        chosen[w] = i;
      }
    }
  }
  for (int i = 0; i < static_cast<int>(proposals.size()); ++i) {
    const Proposal& p = proposals[i];
    for (NodeId w : p.participants) {
      if (w == p.proposer) continue;
      log_line(std::string("msg ") +
               (chosen.at(w) == i ? "OpAccept" : "OpReject") + " " +
               std::to_string(w) + " " + std::to_string(p.proposer));
    }
  }

  // Commit phase: unanimously accepted proposals apply; their participant
  // sets are pairwise disjoint by the accept rule.
  std::set<Edge> edge_set(tree_.edges().begin(), tree_.edges().end());
  for (int i = 0; i < static_cast<int>(proposals.size()); ++i) {
    const Proposal& p = proposals[i];
    bool unanimous = true;
    for (NodeId w : p.participants) {
      if (chosen.at(w) != i) {
        unanimous = false;
        break;
      }
    }
    if (!unanimous) continue;
    TopologyOp op;
    switch (p.intent.kind) {
      case OpIntent::Kind::kLeafization:
        op = Leafization{p.intent.j, p.intent.k};
        break;
      case OpIntent::Kind::kLeafTransfer:
        op = LeafTransfer{p.intent.moved, p.intent.j, p.intent.k};
        break;
      case OpIntent::Kind::kSuperLeafTransfer:
        op = SuperLeafTransfer{subtree_rooted_at(tree_, p.intent.moved, p.intent.j),
                               p.intent.j, p.intent.k};
        break;
    }
    OpLogEntry entry = treemorph::apply(tree_, op).log;  // certificates on the round-start tree
    if (p.intent.kind == OpIntent::Kind::kSuperLeafTransfer) {
      pending_carried_[p.intent.moved] = p.intent.j;
    }
    for (NodeId w : p.participants) {
      if (w == p.proposer) continue;
      log_line("msg OpCommit " + std::to_string(p.proposer) + " " +
               std::to_string(w));
    }
    log_line("commit " + format_op_log_entry(entry));
    for (const Edge& e : entry.removed) edge_set.erase(e);
    for (const Edge& e : entry.added) edge_set.insert(e);
    outcome.committed.push_back(std::move(entry));
  }

  if (!outcome.committed.empty()) {
    try {
      tree_ = LabeledTree::from_edges(
          n, std::vector<Edge>(edge_set.begin(), edge_set.end()));
    } catch (const Error& err) {
      throw Error(ErrorCode::TreeInvariantBroken,
                  std::string("parallel commits broke the tree (") + err.what() +
                      ")");
    }
  }
  log_line("endround " + std::to_string(round_));
  fixed_point_ = outcome.proposals == 0;
  return outcome;
}

ProtocolRunResult run_to_fixed_point(const LabeledTree& initial, Protocol protocol,
                                     int max_rounds, std::uint64_t seed) {
  ProtocolEngine engine(initial, protocol, seed);
  ProtocolRunResult result;
  while (true) {
    if (engine.rounds_run() >= max_rounds) {
      throw Error(ErrorCode::NoConvergence,
                  std::string(protocol_name(protocol)) + " protocol still active after " +
                      std::to_string(max_rounds) + " rounds");
    }
    RoundOutcome outcome = engine.step_round();
    const bool done = outcome.proposals == 0;
    if (!done) result.per_round.push_back(std::move(outcome));
    if (done) break;
  }
  result.final_tree = engine.tree();
  result.rounds = static_cast<int>(result.per_round.size());
  result.event_log = engine.log_text();
  return result;
}

AuditReport locality_audit(std::string_view event_log_text) {
  AuditReport report;
  std::istringstream in{std::string(event_log_text)};
  std::string line;
  int line_no = 0;

  int n = 0;
  std::vector<Edge> pending_edges;
  bool tree_built = false;
  LabeledTree tree;
  std::vector<Edge> round_removed, round_added;

  auto violation = [&](const std::string& reason) {
    report.violations.push_back({line_no, reason});
  };
  auto ensure_tree = [&]() {
    if (tree_built || n == 0) return;
    tree = LabeledTree::from_edges(n, pending_edges);
    tree_built = true;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;

    if (kind == "tree") {
      std::string rest;
      ls >> rest;
      if (rest.rfind("n=", 0) != 0) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad tree header");
      }
      n = std::atoi(rest.c_str() + 2);
      tree_built = false;
      pending_edges.clear();
    } else if (kind == "edge") {
      int u = 0, v = 0;
      if (!(ls >> u >> v)) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad edge line");
      }
      pending_edges.push_back(make_edge(u, v));
    } else if (kind == "round") {
      ensure_tree();
      round_removed.clear();
      round_added.clear();
    } else if (kind == "msg") {
      ensure_tree();
      std::string msg_kind;
      int from = 0, to = 0;
      if (!(ls >> msg_kind >> from >> to)) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad msg line");
      }
      ++report.messages_checked;
      if (from < 1 || from > n || to < 1 || to > n || !tree.has_edge(from, to)) {
        violation("message " + msg_kind + " " + std::to_string(from) + "->" +
                  std::to_string(to) + " does not cross a current tree edge");
      }
    } else if (kind == "commit") {
      ensure_tree();
      std::string rest;
      std::getline(ls, rest);
      OpLogEntry entry = parse_op_log_entry(rest);
      ++report.commits_checked;
      for (const Edge& e : entry.removed) {
        if (!tree.has_edge(e.a, e.b)) {
          violation("removed edge (" + std::to_string(e.a) + "," +
                    std::to_string(e.b) + ") is not in the current tree");
        }
        round_removed.push_back(e);
      }
      for (std::size_t i = 0; i < entry.added.size(); ++i) {
        const Edge& e = entry.added[i];
        const std::vector<NodeId> path = tree.path_between(e.a, e.b);
        if (path.size() > 3) {
          violation("added edge (" + std::to_string(e.a) + "," +
                    std::to_string(e.b) + ") joins nodes " +
                    std::to_string(path.size() - 1) + " hops apart");
        }
        if (i < entry.certificates.size() && entry.certificates[i] != path) {
          violation("certificate for edge (" + std::to_string(e.a) + "," +
                    std::to_string(e.b) + ") does not match the recomputed path");
        }
        round_added.push_back(e);
      }
    } else if (kind == "endround") {
      ensure_tree();
      if (round_removed.empty() && round_added.empty()) continue;
      std::set<Edge> edge_set(tree.edges().begin(), tree.edges().end());
      for (const Edge& e : round_removed) edge_set.erase(e);
      for (const Edge& e : round_added) edge_set.insert(e);
      try {
        tree = LabeledTree::from_edges(
            n, std::vector<Edge>(edge_set.begin(), edge_set.end()));
      } catch (const Error& err) {
        violation(std::string("round result is not a valid tree (") + err.what() +
                  ")");
        break;  // later rounds cannot be trusted
      }
      round_removed.clear();
      round_added.clear();
    } else {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                             ": unknown event '" + kind + "'");
    }
  }

  report.ok = report.violations.empty();
  return report;
}

}  // namespace treemorph
