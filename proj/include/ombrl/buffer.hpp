#pragma once

#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "ombrl/gp_core.hpp"

namespace ombrl {

struct Transition {
  Vector state;
  Vector action;
  Vector next_state;
  int step_index = 0;
};

struct Trajectory {
  int episode_index = 1;
  std::vector<Transition> transitions;
};

/// How stale episodes are dropped from the model's training data.
struct ForgettingPolicy {
  enum class Kind { None, Reset, Window };

  Kind kind = Kind::None;
  int size = 0;  // reset period H or window size w; unused for None

  static constexpr int kUnbounded = std::numeric_limits<int>::max();

  static ForgettingPolicy none() { return {Kind::None, 0}; }
  static ForgettingPolicy reset(int period);
  static ForgettingPolicy window(int episodes);

  /// "none", "reset" or "window".
  std::string name() const;
};

/// n0(n) = H * floor((n - 1) / H) + 1, the first episode after the last reset.
int reset_origin(int n, int period);

/// Number of episodes n - m whose data is visible when planning episode n.
int retained_count(const ForgettingPolicy& policy, int n);

/// Episode store that applies the forgetting rule as trajectories arrive, so
/// that the data visible while planning episode n is D_{m:n-1}.
class EpisodeBuffer {
 public:
  explicit EpisodeBuffer(ForgettingPolicy policy);

  const ForgettingPolicy& policy() const { return policy_; }
  /// Episode index the next pushed trajectory must carry.
  int current_episode() const { return current_episode_; }
  const std::deque<Trajectory>& trajectories() const { return retained_; }
  std::vector<int> retained_episodes() const;
  int buffer_len() const { return static_cast<int>(retained_.size()); }

  void push_trajectory(Trajectory traj);

  Dataset active_dataset() const;

 private:
  ForgettingPolicy policy_;
  std::deque<Trajectory> retained_;
  int current_episode_ = 1;
};

}  // namespace ombrl
