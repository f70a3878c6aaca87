#pragma once

// Slot-level Monte Carlo simulation of the broadcast network: Poisson nodes
// on a square torus, CSMA/CA with carrier sensing and unbounded binary
// exponential backoff, one update per node per frame with the
// received-update replacement rule, and transmitter-side broadcast age.

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "baoi/model_core.hpp"

namespace baoi::sim {

using Rng = std::mt19937_64;

/// When a frame's surviving update enters the transmit queue.
///  kFrameEnd: after the frame's last slot, once replacement is resolved.
///  kImmediate: at the node's generation slot; a later reception in the same
///              frame replaces it in place while it is still queued.
enum class Admission { kFrameEnd, kImmediate };

const char* to_string(Admission admission);
Admission parse_admission(const std::string& text);

struct SimConfig {
  model::NetworkParams params;
  double area_side = 40.0;
  std::int64_t total_frames = 5000;
  /// Negative selects the default: 20% of total_frames, at least 100.
  std::int64_t warmup_frames = -1;
  std::uint64_t seed = 1;
  int replications = 10;
  Admission admission = Admission::kFrameEnd;
  /// Worker threads for replications; 0 uses the hardware concurrency.
  int threads = 0;
  /// Validation hook: let nodes without neighbors generate, contend and be
  /// counted. Off by default since their broadcasts reach nobody.
  bool isolated_nodes_contend = false;

  std::int64_t effective_warmup() const;
  /// Throws DomainError on L < 10 r, warmup >= total, or non-positive counts.
  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Topology {
  double side = 0.0;
  double range = 0.0;
  std::vector<Point> positions;
  std::vector<std::vector<std::int32_t>> adjacency;

  std::size_t size() const { return positions.size(); }
  std::size_t degree(std::size_t node) const { return adjacency[node].size(); }

  /// Builds adjacency for explicit positions (torus distance <= range).
  static Topology from_positions(std::vector<Point> positions, double side, double range);
};

double torus_distance(const Point& a, const Point& b, double side);

/// Draws Poisson(rho L^2) nodes uniformly on the torus. Throws
/// DegenerateTopology when no node is drawn.
Topology generate_topology(const SimConfig& config, Rng& rng);
Topology generate_topology(const SimConfig& config, std::uint64_t seed);

struct Update {
  std::int64_t arrival_slot = 0;  // first slot this node could send it; BAoI origin
  std::int64_t origin_slot = 0;   // generation slot at the source node
  std::int32_t origin_node = -1;
};

struct NodeState {
  int stage = 0;
  std::int64_t timer = 0;
  std::deque<Update> queue;
  /// Own or received update of the current frame not yet admitted
  /// (frame-end admission, or immediate admission before the generation slot).
  std::optional<Update> frame_update;
  bool frame_update_received = false;
  /// Immediate admission: this frame's update sits at the back of `queue`.
  bool frame_update_queued = false;
  bool frame_update_admitted = false;
  std::int64_t generation_offset = 0;
  std::int64_t baoi = 0;
  std::int64_t baoi_accumulator = 0;
  std::int64_t enqueued = 0;
};

struct BroadcastRecord {
  std::int32_t node = 0;
  std::int64_t slot = 0;
  std::int64_t generation_slot = 0;
  std::int64_t baoi = 0;  // slot - generation_slot
};

/// Outcome of the most recent slot.
struct SlotOutcome {
  std::vector<std::int32_t> transmitters;
  std::vector<std::int32_t> successes;
  std::vector<std::int32_t> collisions;
};

/// Post-warmup counters over participating nodes (at least one neighbor).
struct Counters {
  std::int64_t contending_slots = 0;  // node-slots with a queued update
  std::int64_t active_slots = 0;      // contending and not frozen by a busy channel
  std::int64_t attempts = 0;
  std::int64_t collisions = 0;
  std::int64_t age_sum = 0;
  std::int64_t age_samples = 0;
};

/// The simulated world: topology plus per-node MAC, queue, and age state.
/// Not thread-safe; one instance per replication.
class Network {
 public:
  Network(Topology topology, const SimConfig& config, Rng rng);

  /// Advances one slot.
  void step();

  std::int64_t slot() const { return slot_; }
  const Topology& topology() const { return topology_; }
  const NodeState& node(std::size_t i) const { return nodes_[i]; }
  /// Direct state access for tests.
  NodeState& mutable_node(std::size_t i) { return nodes_[i]; }
  const SlotOutcome& last_outcome() const { return outcome_; }
  const Counters& counters() const { return counters_; }

  /// Counters accumulate from this slot on.
  void set_statistics_start(std::int64_t slot) { stats_start_ = slot; }
  void set_trace(std::function<void(const BroadcastRecord&)> sink) { trace_ = std::move(sink); }

  std::int64_t draw_timer(int stage);

 private:
  void start_frame();
  void generate(std::size_t i);
  void receive(std::size_t i, const Update& update);
  void admit(std::size_t i, const Update& update);

  Topology topology_;
  int w_min_;
  int frame_length_;
  Admission admission_;
  Rng rng_;
  std::vector<NodeState> nodes_;
  std::vector<char> participating_;
  std::vector<char> transmitting_;
  std::vector<char> busy_;
  std::int64_t slot_ = 0;
  std::int64_t stats_start_ = 0;
  SlotOutcome outcome_;
  Counters counters_;
  std::function<void(const BroadcastRecord&)> trace_;
};

/// Backoff stage ceiling; contention windows stop doubling beyond it.
inline constexpr int kMaxBackoffStage = 30;

struct ReplicationResult {
  int index = 0;
  std::uint64_t seed = 0;
  std::int64_t node_count = 0;
  std::int64_t counted_nodes = 0;  // nodes with at least one neighbor
  double mean_neighbors = 0.0;     // over all nodes
  double p_tx = 0.0;               // attempts / contending slots
  double p_tx_active = 0.0;        // attempts / active (unfrozen) slots
  double p_cl = 0.0;               // collisions / attempts
  double baoi = 0.0;
  Counters counters;
};

struct Estimate {
  double mean = 0.0;
  double ci_half_width = 0.0;  // 95% Student t; NaN for a single replication
};

Estimate estimate(const std::vector<double>& samples);

struct SimReport {
  std::vector<ReplicationResult> replications;
  Estimate p_tx;
  Estimate p_tx_active;
  Estimate p_cl;
  Estimate baoi;
  Estimate mean_neighbors;
};

struct TraceRecord {
  int replication = 0;
  BroadcastRecord broadcast;
};

/// One replication on seed `seed`.
ReplicationResult run_replication(const SimConfig& config, int index, std::uint64_t seed,
                                  const std::function<void(const BroadcastRecord&)>& trace = {});

/// Replication r uses seed config.seed + r. Deterministic for a given
/// config. With a trace sink the replications run sequentially, in order.
SimReport run(const SimConfig& config,
              const std::function<void(const TraceRecord&)>& trace = {});

}  // namespace baoi::sim
