#include <set>

#include "doctest.h"
#include "ombrl/buffer.hpp"
#include "oracles.hpp"

using namespace ombrl;

namespace {

// T transitions whose state encodes (episode, step) so flattening is checkable.
Trajectory make_traj(int episode, int T) {
  Trajectory tr;
  tr.episode_index = episode;
  for (int t = 0; t < T; ++t) {
    Transition x;
    x.state = Vector::Constant(2, episode);
    x.state(1) = t;
    x.action = Vector::Constant(1, 0.5 * t);
    x.next_state = Vector::Constant(2, 100.0 * episode + t);
    x.step_index = t;
    tr.transitions.push_back(x);
  }
  return tr;
}

std::set<int> retained_set(const EpisodeBuffer& b) {
  const auto v = b.retained_episodes();
  return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("reset_origin examples") {
  CHECK(reset_origin(5, 5) == 1);
  CHECK(reset_origin(6, 5) == 6);
  for (int n = 1; n <= 30; ++n) CHECK(reset_origin(n, 1) == n);
  for (int H = 1; H <= 10; ++H)
    for (int n = 1; n <= 50; ++n) {
      CHECK(reset_origin(n, H) <= n);
      CHECK(n - reset_origin(n, H) < H);
    }
}

TEST_CASE("push examples from each policy") {
  EpisodeBuffer none(ForgettingPolicy::none());
  EpisodeBuffer reset(ForgettingPolicy::reset(5));
  EpisodeBuffer window(ForgettingPolicy::window(3));
  for (int n = 1; n <= 7; ++n) {
    if (n <= 5) none.push_trajectory(make_traj(n, 4));
    reset.push_trajectory(make_traj(n, 4));
    window.push_trajectory(make_traj(n, 4));
  }
  CHECK(none.buffer_len() == 5);
  CHECK(retained_set(reset) == std::set<int>{6, 7});
  CHECK(retained_set(window) == std::set<int>{5, 6, 7});
  CHECK(reset.current_episode() == 8);
}

TEST_CASE("out-of-order or malformed trajectories are rejected") {
  EpisodeBuffer b(ForgettingPolicy::none());
  CHECK_THROWS(b.push_trajectory(make_traj(2, 3)));
  b.push_trajectory(make_traj(1, 3));
  CHECK_THROWS(b.push_trajectory(make_traj(1, 3)));
  Trajectory gap = make_traj(2, 3);
  gap.transitions[1].step_index = 2;
  CHECK_THROWS(b.push_trajectory(gap));
  CHECK(b.current_episode() == 2);
  CHECK_THROWS(ForgettingPolicy::reset(0));
  CHECK_THROWS(ForgettingPolicy::window(0));
}

TEST_CASE("active_dataset flattens in episode-then-step order") {
  EpisodeBuffer b(ForgettingPolicy::window(2));
  CHECK(b.active_dataset().empty());
  for (int n = 1; n <= 3; ++n) b.push_trajectory(make_traj(n, 10));
  const Dataset d = b.active_dataset();
  REQUIRE(d.size() == 20);
  CHECK(d.input_dim() == 3);
  CHECK(d.output_dim() == 2);
  for (int i = 0; i < 20; ++i) {
    const int episode = 2 + i / 10;
    const int t = i % 10;
    CHECK(d.episode_tags[static_cast<std::size_t>(i)] == episode);
    CHECK(d.inputs(i, 0) == episode);
    CHECK(d.inputs(i, 1) == t);
    CHECK(d.inputs(i, 2) == 0.5 * t);
    CHECK(d.targets(i, 0) == 100.0 * episode + t);
  }
}

TEST_CASE("retained sets match the closed forms exhaustively") {
  for (int p = 1; p <= 10; ++p) {
    EpisodeBuffer reset(ForgettingPolicy::reset(p));
    EpisodeBuffer window(ForgettingPolicy::window(p));
    EpisodeBuffer none(ForgettingPolicy::none());
    for (int n = 1; n <= 50; ++n) {
      CHECK(retained_set(reset) == oracle::reset_retained(n, p));
      CHECK(retained_set(window) == oracle::window_retained(n, p));
      CHECK(none.buffer_len() == n - 1);
      CHECK(reset.buffer_len() <= p);
      CHECK(window.buffer_len() <= p);
      CHECK(reset.buffer_len() == retained_count(reset.policy(), n));
      CHECK(window.buffer_len() == retained_count(window.policy(), n));
      CHECK(none.buffer_len() == retained_count(none.policy(), n));
      reset.push_trajectory(make_traj(n, 1));
      window.push_trajectory(make_traj(n, 1));
      none.push_trajectory(make_traj(n, 1));
    }
  }
}

TEST_CASE("active_dataset equals a brute-force re-flattening") {
  for (int H = 1; H <= 10; ++H) {
    EpisodeBuffer b(ForgettingPolicy::reset(H));
    for (int n = 1; n <= 50; ++n) {
      const Dataset d = b.active_dataset();
      const auto expected = oracle::reset_retained(n, H);
      REQUIRE(d.size() == static_cast<Eigen::Index>(2 * expected.size()));
      Eigen::Index row = 0;
      for (int e : expected) {
        const Trajectory ref = make_traj(e, 2);
        for (const auto& tr : ref.transitions) {
          CHECK(d.inputs.row(row).head(2).transpose() == tr.state);
          CHECK(d.inputs(row, 2) == tr.action(0));
          CHECK(d.targets.row(row).transpose() == tr.next_state);
          CHECK(d.episode_tags[static_cast<std::size_t>(row)] == e);
          ++row;
        }
      }
      b.push_trajectory(make_traj(n, 2));
    }
  }
}

TEST_CASE("an unbounded window behaves like no forgetting") {
  EpisodeBuffer window(ForgettingPolicy::window(ForgettingPolicy::kUnbounded));
  EpisodeBuffer none(ForgettingPolicy::none());
  for (int n = 1; n <= 40; ++n) {
    CHECK(window.retained_episodes() == none.retained_episodes());
    window.push_trajectory(make_traj(n, 1));
    none.push_trajectory(make_traj(n, 1));
  }
}

TEST_CASE("policy names") {
  CHECK(ForgettingPolicy::none().name() == "none");
  CHECK(ForgettingPolicy::reset(3).name() == "reset");
  CHECK(ForgettingPolicy::window(3).name() == "window");
}
