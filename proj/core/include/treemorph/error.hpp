#pragma once

#include <stdexcept>
#include <string>

namespace treemorph {

// Every failure mode the library reports deliberately. Callers that need to
// branch on the cause should switch on the code rather than parse messages.
enum class ErrorCode {
  // tree construction / lookup
  InvalidNodeCount,
  NodeOutOfRange,
  SelfLoop,
  DuplicateEdge,
  WrongEdgeCount,
  Disconnected,
  NotAnEdge,
  // sequence codec
  SymbolOutOfRange,
  CapExceeded,
  // rewiring operations
  NotNeighbors,
  AlreadyLeaf,
  NotALeaf,
  NotAttachedToJ,
  JKNotNeighbors,
  SubtreeLeaks,
  KInsideSubtree,
  RootAlreadySuperLeaf,
  RootNotMember,
  NotASuperLeaf,
  WrongAttachment,
  TreeInvariantBroken,
  // planning
  SizeMismatch,
  // distributed runs
  NoConvergence,
  // kinematic layer
  LinkStretch,
  ApproachTimeout,
  ArrangeTimeout,
  ParticipantBusy,
  BadRangeConfig,
  WorldSampleFailed,
  // text formats
  ParseError,
  // configuration
  BadConfig,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace treemorph
