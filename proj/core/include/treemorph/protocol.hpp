#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treemorph/ops.hpp"
#include "treemorph/rng.hpp"
#include "treemorph/tree.hpp"

namespace treemorph {

enum class Protocol { kLine, kStar };

const char* protocol_name(Protocol p);
Protocol parse_protocol(std::string_view name);  // "line" | "star"

enum class RoleKind {
  kFree,
  kBusy,
  kLineEndpoint,
  kStarCenterCandidate,
  kBranchCarried,  // subtree root that was just transferred; remembers whence
};

struct Role {
  RoleKind kind = RoleKind::kFree;
  std::uint64_t busy_token = 0;  // kBusy: id of the accepted proposal
  int score_degree = 0;          // kStarCenterCandidate score
  NodeId score_label = 0;
  NodeId carried_from = 0;  // kBranchCarried: the attachment before the move

  friend bool operator==(const Role&, const Role&) = default;
};

// Everything a node's rule may read: its own id, 1-hop ids/degrees/roles, and
// each neighbor's neighbor set. Nothing beyond 2 hops.
struct LocalView {
  NodeId self_id = 0;
  std::vector<NodeId> neighbor_ids;                // sorted
  std::map<NodeId, int> neighbor_degrees;          // keys == neighbor_ids
  std::map<NodeId, std::vector<NodeId>> two_hop;   // neighbor -> its sorted neighbors
  std::map<NodeId, Role> roles;                    // self + neighbors

  int self_degree() const { return static_cast<int>(neighbor_ids.size()); }
};

// A rule's output: an operation described through 1-hop references only. A
// transferred branch is named by its root; the harness materializes the full
// member set at commit time (bookkeeping the robots carry implicitly by
// being attached).
struct OpIntent {
  enum class Kind { kLeafization, kLeafTransfer, kSuperLeafTransfer };
  Kind kind = Kind::kLeafization;
  NodeId moved = 0;   // leaf (LT) or branch root (SLT); unused for L
  NodeId j = 0;       // the node losing an edge; always the proposer
  NodeId k = 0;       // destination neighbor of j
  int priority = 0;   // handshake key: (priority, proposer) lexicographic, lower wins
};

// Line formation: junctions merge a branch onto an adjacent leaf when one
// exists (shrinks the junction monovariant). With no adjacent leaf, the
// junction hands one branch to a neighbor; the branch root's carried role
// remembers where it came from, so the hand-off never reverses and the
// branch drifts along a simple path until a leaf turns up to merge with.
std::optional<OpIntent> line_rule(const LocalView& view);

// Star formation: a non-leaf defers to its best neighbor by (degree, label)
// score, folding itself (and its hanging branches) onto that neighbor.
std::optional<OpIntent> star_rule(const LocalView& view);

struct RoundOutcome {
  int round = 0;
  int proposals = 0;
  std::vector<OpLogEntry> committed;  // disjoint participant sets
};

// Synchronous round engine over a ground-truth tree the nodes never read
// directly; each round: view share, rule evaluation, propose/accept/commit
// handshake, batched application. Every message crosses exactly one tree
// edge of the round-start tree, and the full exchange is logged for audit.
class ProtocolEngine {
 public:
  // Both shipped rules are deterministic; `seed` is kept for randomized rule
  // variants and does not affect the current protocols.
  ProtocolEngine(LabeledTree initial, Protocol protocol, std::uint64_t seed);

  RoundOutcome step_round();

  const LabeledTree& tree() const { return tree_; }
  Protocol protocol() const { return protocol_; }
  int rounds_run() const { return round_; }
  bool at_fixed_point() const { return fixed_point_; }
  std::string log_text() const;

 private:
  LocalView view_of(NodeId v) const;
  void log_line(std::string line);

  LabeledTree tree_;
  Protocol protocol_;
  int round_ = 0;
  bool fixed_point_ = false;
  std::map<NodeId, Role> roles_;
  std::map<NodeId, NodeId> pending_carried_;  // moved root -> old attachment
  std::vector<std::string> log_;
};

struct ProtocolRunResult {
  LabeledTree final_tree;
  int rounds = 0;  // rounds until the zero-proposal fixed point
  std::vector<RoundOutcome> per_round;
  std::string event_log;
};

// Steps until a round commits nothing. Throws NoConvergence at max_rounds.
ProtocolRunResult run_to_fixed_point(const LabeledTree& initial, Protocol protocol,
                                     int max_rounds, std::uint64_t seed);

struct AuditViolation {
  int line_no = 0;
  std::string reason;
};

struct AuditReport {
  bool ok = false;
  int messages_checked = 0;
  int commits_checked = 0;
  std::vector<AuditViolation> violations;
};

// Replays an event log, re-deriving the tree at every round and checking that
// every message crossed one current edge, every added edge joined nodes at
// most 2 hops apart, and every round left a valid tree. Trusts nothing the
// log claims about distances; everything is recomputed.
AuditReport locality_audit(std::string_view event_log_text);

}  // namespace treemorph
