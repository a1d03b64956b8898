// Copyright 2026 The kinonav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "kinonav/costmap.hpp"
#include "kinonav/lqmt.hpp"
#include "kinonav/primitives.hpp"
#include "kinonav/trajectory.hpp"

namespace kinonav {

struct SearchConfig {
  double rho = 1.0;    // time weight in (|u|^2 + rho) tau
  double rho_c = 1.0;  // soft collision weight
  double tau = 0.5;    // primitive duration, s
  int mu = 2;          // lattice samples per half axis
  KinoLimits limits;
  double prune_pos_res = 0.1;   // m, duplicate-detection position bin
  double prune_vel_res = 0.15;  // m/s, duplicate-detection velocity bin
  double goal_pos_tol = 0.3;    // m
  double goal_vel_tol = 0.2;    // m/s
  int max_expansions = 300000;
  bool try_goal_connection = true;
  bool heuristic_includes_time = true;
};

enum class PlanStatus { Success, NoPath, InvalidStart, InvalidGoal };

inline const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Success: return "success";
    case PlanStatus::NoPath: return "no_path";
    case PlanStatus::InvalidStart: return "invalid_start";
    case PlanStatus::InvalidGoal: return "invalid_goal";
  }
  return "unknown";
}

struct PlanResult {
  PlanStatus status = PlanStatus::NoPath;
  Trajectory trajectory;
  double cost = 0.0;       // realized (|u|^2 + rho) tau sum + rho_c * soft cost
  double soft_cost = 0.0;  // accumulated discretized line integral
  double effort = 0.0;     // integral of |a|^2
  int expansions = 0;
  // Frontier diagnostics for NoPath.
  State best_frontier;
  double best_frontier_f = 0.0;
  std::string message;

  bool ok() const { return status == PlanStatus::Success; }
};

/// Discrete duplicate-detection key: floor-binned position and velocity.
struct PruneKey {
  int64_t px, py, vx, vy;
  bool operator==(const PruneKey&) const = default;
};

inline PruneKey prune_key(const State& s, const SearchConfig& cfg) {
  const auto bin = [](double v, double res) {
    return static_cast<int64_t>(std::floor(v / res));
  };
  return PruneKey{bin(s.p.x(), cfg.prune_pos_res), bin(s.p.y(), cfg.prune_pos_res),
                  bin(s.v.x(), cfg.prune_vel_res), bin(s.v.y(), cfg.prune_vel_res)};
}

struct PruneKeyHash {
  size_t operator()(const PruneKey& k) const {
    uint64_t h = 1469598103934665603ull;
    for (int64_t v : {k.px, k.py, k.vx, k.vy}) {
      h ^= static_cast<uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

namespace detail {

struct SearchNode {
  State state;
  double g = 0.0;        // accumulated (|u|^2 + rho) tau
  double c_accum = 0.0;  // accumulated soft cost
  double h = 0.0;
  double f = 0.0;        // g + rho_c * c_accum + h
  double t_heur = 0.0;   // optimal duration behind h, reused by the goal shot
  int parent = -1;
  MotionPrimitive incoming;  // primitive that produced this node (unused at root)
  bool has_incoming = false;
};

struct QueueEntry {
  double f;
  double h;
  uint64_t seq;
  int node;
};

struct QueueCompare {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.seq > b.seq;
  }
};

// Feasibility of the closed-form cubic tail: per-axis acceleration is affine
// (endpoint check) and per-axis velocity quadratic (endpoints + vertex).
inline bool connection_dynamic_feasible(const BoundaryPair& bp, const OptimalConnection& conn,
                                        const KinoLimits& lim) {
  for (int d = 0; d < 2; ++d) {
    const double a0 = conn.beta[d];
    const double a1 = conn.beta[d] + conn.alpha[d] * conn.T;
    if (std::abs(a0) > lim.u_max || std::abs(a1) > lim.u_max) return false;
    const auto vel = [&](double t) {
      return bp.current.v[d] + conn.beta[d] * t + 0.5 * conn.alpha[d] * t * t;
    };
    double vmax_seg = std::max(std::abs(vel(0.0)), std::abs(vel(conn.T)));
    if (std::abs(conn.alpha[d]) > 1e-12) {
      const double t_star = -conn.beta[d] / conn.alpha[d];
      if (t_star > 0.0 && t_star < conn.T) vmax_seg = std::max(vmax_seg, std::abs(vel(t_star)));
    }
    if (vmax_seg > lim.v_max) return false;
  }
  return true;
}

inline bool connection_collision_free(const BoundaryPair& bp, const OptimalConnection& conn,
                                      const Costmap& cm) {
  const double r = cm.resolution();
  // Per-axis velocity extrema bound the speed along the cubic.
  Vec2 vbound;
  for (int d = 0; d < 2; ++d) {
    const auto vel = [&](double t) {
      return bp.current.v[d] + conn.beta[d] * t + 0.5 * conn.alpha[d] * t * t;
    };
    double m = std::max(std::abs(vel(0.0)), std::abs(vel(conn.T)));
    if (std::abs(conn.alpha[d]) > 1e-12) {
      const double t_star = -conn.beta[d] / conn.alpha[d];
      if (t_star > 0.0 && t_star < conn.T) m = std::max(m, std::abs(vel(t_star)));
    }
    vbound[d] = m;
  }
  const double s = std::max(vbound.norm(), 1e-6);
  const int samples = std::max(1, static_cast<int>(std::ceil(conn.T * s / r)));
  const double margin = 0.5 * conn.T * s / samples;
  for (int i = 0; i <= samples; ++i) {
    const double t = conn.T * i / samples;
    if (cm.lethal_within(conn.position(bp, t), margin)) return false;
  }
  return true;
}

inline double connection_soft_cost(const BoundaryPair& bp, const OptimalConnection& conn,
                                   const Costmap& cm, const KinoLimits& lim) {
  const int ic =
      std::max(2, static_cast<int>(std::ceil(lim.v_max * conn.T / cm.resolution())));
  const double dt = conn.T / (ic - 1);
  double total = 0.0;
  for (int i = 0; i < ic; ++i) {
    const double t = i * dt;
    total += cm.cost_at(conn.position(bp, t)) * conn.velocity(bp, t).norm() * dt;
  }
  return total;
}

}  // namespace detail

/// Front-end search over constant-input motion primitives minimizing
/// f = g + h + rho_c * c_collision. Expansions pop in ascending f with
/// deterministic tie-breaking (lower h, then insertion order); duplicate
/// states are pruned on g + rho_c * c dominance within prune_key bins.
/// Each popped node may also try the closed-form connection to the goal
/// (longer fallback durations make the tail feasible near saturation).
inline PlanResult plan(const State& start, const State& goal, const Costmap& cm,
                       const SearchConfig& cfg) {
  PlanResult result;

  if (cm.is_lethal(start.p) || std::abs(start.v.x()) > cfg.limits.v_max ||
      std::abs(start.v.y()) > cfg.limits.v_max) {
    result.status = PlanStatus::InvalidStart;
    result.message = "start state is lethal or exceeds velocity limits";
    return result;
  }
  if (cm.is_lethal(goal.p)) {
    result.status = PlanStatus::InvalidGoal;
    result.message = "goal position is lethal";
    return result;
  }

  const auto within_goal = [&](const State& s) {
    return (s.p - goal.p).norm() <= cfg.goal_pos_tol && (s.v - goal.v).norm() <= cfg.goal_vel_tol;
  };

  if (within_goal(start) && (start.p - goal.p).norm() < 1e-12 && (start.v - goal.v).norm() < 1e-12) {
    result.status = PlanStatus::Success;
    result.trajectory = Trajectory{};
    return result;
  }

  const std::vector<ControlInput> lattice = control_lattice(cfg.limits.u_max, cfg.mu);

  std::deque<detail::SearchNode> nodes;
  std::priority_queue<detail::QueueEntry, std::vector<detail::QueueEntry>, detail::QueueCompare>
      open;
  std::unordered_map<PruneKey, double, PruneKeyHash> best_value;
  best_value.reserve(1 << 16);
  uint64_t seq = 0;

  // Heuristic and its optimal duration in one solve; the duration is cached
  // on the node so the goal-shot attempt skips the root search.
  const auto heuristic_to_goal = [&](const State& s, double& t_out) {
    const OptimalConnection conn = optimal_duration(BoundaryPair{s, goal}, cfg.rho);
    t_out = conn.T;
    return cfg.heuristic_includes_time ? conn.total_cost : conn.control_cost;
  };

  detail::SearchNode root;
  root.state = start;
  root.h = heuristic_to_goal(start, root.t_heur);
  root.f = root.h;
  nodes.push_back(root);
  open.push({root.f, root.h, seq++, 0});
  best_value[prune_key(start, cfg)] = 0.0;

  result.best_frontier = start;
  result.best_frontier_f = root.f;

  // Attempts the exact goal connection from a node; returns the tail
  // segment plus its cost bookkeeping on success.
  struct ShotTail {
    Segment segment;
    double cost_term;  // control cost + rho T
    double soft;
  };
  const auto try_shot = [&](const State& from, double t_heur) -> std::optional<ShotTail> {
    if (t_heur <= kDegenerateDuration) return std::nullopt;
    const BoundaryPair bp{from, goal};
    for (double mult : {1.0, 1.5, 2.0}) {
      const OptimalConnection conn = connection_for_T(bp, t_heur * mult, cfg.rho);
      if (!detail::connection_dynamic_feasible(bp, conn, cfg.limits)) continue;
      if (!detail::connection_collision_free(bp, conn, cm)) continue;
      const double soft = detail::connection_soft_cost(bp, conn, cm, cfg.limits);
      return ShotTail{Segment::from_connection(from, conn), conn.total_cost, soft};
    }
    return std::nullopt;
  };

  const auto finish = [&](int node_idx, const std::optional<ShotTail>& tail) {
    std::vector<Segment> segments;
    for (int i = node_idx; i >= 0; i = nodes[i].parent) {
      if (nodes[i].has_incoming) segments.push_back(Segment::from_primitive(nodes[i].incoming));
    }
    std::reverse(segments.begin(), segments.end());
    double cost = nodes[node_idx].g + cfg.rho_c * nodes[node_idx].c_accum;
    double soft = nodes[node_idx].c_accum;
    if (tail) {
      segments.push_back(tail->segment);
      cost += tail->cost_term + cfg.rho_c * tail->soft;
      soft += tail->soft;
    }
    result.status = PlanStatus::Success;
    result.trajectory = Trajectory{std::move(segments)};
    result.cost = cost;
    result.soft_cost = soft;
    result.effort = result.trajectory.effort();
  };

  // Best exact-goal candidate found so far (node + cubic tail). A candidate
  // is returned once no open node can beat it: since h ignores soft cost's
  // realization only of the tail, popped f values lower-bound any completion.
  struct Candidate {
    int node = -1;
    ShotTail tail;
    double cost = std::numeric_limits<double>::infinity();
  };
  Candidate best_cand;

  while (!open.empty()) {
    const detail::QueueEntry top = open.top();
    open.pop();
    const detail::SearchNode cur = nodes[top.node];
    // Lazy deletion: skip stale queue entries.
    const auto it = best_value.find(prune_key(cur.state, cfg));
    if (it != best_value.end() && cur.g + cfg.rho_c * cur.c_accum > it->second + 1e-9) continue;

    if (best_cand.node >= 0 && top.f >= best_cand.cost - 1e-12) {
      finish(best_cand.node, best_cand.tail);
      return result;
    }

    if (cfg.try_goal_connection) {
      if (const auto tail = try_shot(cur.state, cur.t_heur)) {
        const double cand_cost = cur.g + cfg.rho_c * cur.c_accum + tail->cost_term +
                                 cfg.rho_c * tail->soft;
        if (cand_cost < best_cand.cost) {
          best_cand = Candidate{top.node, *tail, cand_cost};
        }
      }
    }
    if (within_goal(cur.state)) {
      // Prefer the exact closed-form exit when one exists; the tolerance
      // ball is the fallback.
      if (best_cand.node >= 0) {
        finish(best_cand.node, best_cand.tail);
      } else {
        finish(top.node, std::nullopt);
      }
      return result;
    }

    if (result.expansions >= cfg.max_expansions) {
      if (best_cand.node >= 0) {
        finish(best_cand.node, best_cand.tail);
        return result;
      }
      result.status = PlanStatus::NoPath;
      result.message = "max expansions reached";
      return result;
    }
    ++result.expansions;
    if (cur.f < result.best_frontier_f) {
      result.best_frontier = cur.state;
      result.best_frontier_f = cur.f;
    }

    for (const ControlInput& u : lattice) {
      MotionPrimitive mp{cur.state, u, cfg.tau};
      if (!dynamic_feasible(mp, cfg.limits)) continue;
      if (!collision_free(mp, cm, cfg.limits)) continue;
      const double sc = soft_cost(mp, cm, cfg.limits);

      detail::SearchNode child;
      child.state = propagate(cur.state, u, cfg.tau);
      child.g = cur.g + primitive_cost(u, cfg.tau, cfg.rho);
      child.c_accum = cur.c_accum + sc;
      const double value = child.g + cfg.rho_c * child.c_accum;

      const PruneKey key = prune_key(child.state, cfg);
      const auto found = best_value.find(key);
      if (found != best_value.end() && found->second <= value + 1e-9) continue;
      best_value[key] = value;

      child.h = heuristic_to_goal(child.state, child.t_heur);
      child.f = value + child.h;
      child.parent = top.node;
      child.incoming = mp;
      child.has_incoming = true;
      nodes.push_back(child);
      open.push({child.f, child.h, seq++, static_cast<int>(nodes.size()) - 1});
    }
  }

  if (best_cand.node >= 0) {
    finish(best_cand.node, best_cand.tail);
    return result;
  }
  result.status = PlanStatus::NoPath;
  result.message = "open list exhausted";
  return result;
}

}  // namespace kinonav
