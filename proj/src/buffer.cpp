#include "ombrl/buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace ombrl {

ForgettingPolicy ForgettingPolicy::reset(int period) {
  if (period < 1) throw std::invalid_argument("reset period must be >= 1");
  return {Kind::Reset, period};
}

ForgettingPolicy ForgettingPolicy::window(int episodes) {
  if (episodes < 1) throw std::invalid_argument("window size must be >= 1");
  return {Kind::Window, episodes};
}

std::string ForgettingPolicy::name() const {
  switch (kind) {
    case Kind::Reset:
      return "reset";
    case Kind::Window:
      return "window";
    case Kind::None:
      break;
  }
  return "none";
}

int reset_origin(int n, int period) {
  if (n < 1 || period < 1) throw std::invalid_argument("reset_origin: n and H must be >= 1");
  return period * ((n - 1) / period) + 1;
}

int retained_count(const ForgettingPolicy& policy, int n) {
  switch (policy.kind) {
    case ForgettingPolicy::Kind::Reset:
      return n - reset_origin(n, policy.size);
    case ForgettingPolicy::Kind::Window:
      return std::min(n - 1, policy.size);
    case ForgettingPolicy::Kind::None:
      break;
  }
  return n - 1;
}

EpisodeBuffer::EpisodeBuffer(ForgettingPolicy policy) : policy_(policy) {
  if (policy_.kind != ForgettingPolicy::Kind::None && policy_.size < 1)
    throw std::invalid_argument("forgetting policy size must be >= 1");
}

std::vector<int> EpisodeBuffer::retained_episodes() const {
  std::vector<int> out;
  out.reserve(retained_.size());
  for (const auto& traj : retained_) out.push_back(traj.episode_index);
  return out;
}

void EpisodeBuffer::push_trajectory(Trajectory traj) {
  if (traj.episode_index != current_episode_) {
    throw std::invalid_argument("push_trajectory: expected episode " +
                                std::to_string(current_episode_) + ", got " +
                                std::to_string(traj.episode_index));
  }
  for (std::size_t t = 0; t < traj.transitions.size(); ++t) {
    if (traj.transitions[t].step_index != static_cast<int>(t))
      throw std::invalid_argument("push_trajectory: transitions must be ordered 0..T-1");
  }
  const int pushed = traj.episode_index;
  retained_.push_back(std::move(traj));
  ++current_episode_;

  switch (policy_.kind) {
    case ForgettingPolicy::Kind::Reset:
      // The buffer is emptied right before episode pushed+1 whenever that
      // episode starts a new reset period.
      if (pushed % policy_.size == 0) retained_.clear();
      break;
    case ForgettingPolicy::Kind::Window:
      while (static_cast<int>(retained_.size()) > policy_.size) retained_.pop_front();
      break;
    case ForgettingPolicy::Kind::None:
      break;
  }
}

Dataset EpisodeBuffer::active_dataset() const {
  Eigen::Index count = 0;
  Eigen::Index in_dim = 0;
  Eigen::Index out_dim = 0;
  for (const auto& traj : retained_) {
    count += static_cast<Eigen::Index>(traj.transitions.size());
    if (!traj.transitions.empty()) {
      const auto& tr = traj.transitions.front();
      in_dim = tr.state.size() + tr.action.size();
      out_dim = tr.next_state.size();
    }
  }
  Dataset data(in_dim, out_dim);
  data.inputs.resize(count, in_dim);
  data.targets.resize(count, out_dim);
  data.episode_tags.reserve(static_cast<std::size_t>(count));
  Eigen::Index row = 0;
  for (const auto& traj : retained_) {
    for (const auto& tr : traj.transitions) {
      data.inputs.row(row) << tr.state.transpose(), tr.action.transpose();
      data.targets.row(row) = tr.next_state.transpose();
      data.episode_tags.push_back(traj.episode_index);
      ++row;
    }
  }
  return data;
}

}  // namespace ombrl
