#pragma once

#include <stdexcept>
#include <string>

namespace rotsync {

/// A matrix required to have full column rank is numerically rank deficient.
class RankDeficientError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The null space of L^T does not have dimension one. Signals a graph that
/// is not quasi-strongly connected, or a numerically degenerate Laplacian.
class NullSpaceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An agent's auxiliary R factor lost invertibility (diagonal collapsed).
/// The agent index is 0-based; -1 means "not attributable to an agent"
/// (e.g. a bare relative_r call).
class SingularRError : public std::runtime_error {
public:
  explicit SingularRError(int agent)
      : std::runtime_error(agent >= 0
                               ? "R factor of agent " +
                                     std::to_string(agent + 1) +
                                     " is numerically singular"
                               : std::string("R factor numerically singular")),
        agent_(agent) {}

  /// Offending agent, 0-based.
  int agent() const { return agent_; }

private:
  int agent_;
};

/// Invalid experiment configuration (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace rotsync
