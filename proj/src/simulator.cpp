#include "baoi/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

#include "baoi/errors.hpp"

namespace baoi::sim {

namespace {

constexpr int kTopologyRetries = 100;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double ratio(std::int64_t num, std::int64_t den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den)
                 : std::numeric_limits<double>::quiet_NaN();
}

// Later-generated updates win; ties go to the later arrival.
bool fresher(const Update& a, const Update& b) {
  if (a.origin_slot != b.origin_slot) return a.origin_slot > b.origin_slot;
  return a.arrival_slot > b.arrival_slot;
}

}  // namespace

const char* to_string(Admission admission) {
  return admission == Admission::kFrameEnd ? "frame_end" : "immediate";
}

Admission parse_admission(const std::string& text) {
  if (text == "frame_end") return Admission::kFrameEnd;
  if (text == "immediate") return Admission::kImmediate;
  throw DomainError("unknown admission mode '" + text + "' (expected frame_end or immediate)");
}

std::int64_t SimConfig::effective_warmup() const {
  if (warmup_frames >= 0) return warmup_frames;
  return std::max<std::int64_t>(100, total_frames / 5);
}

void SimConfig::validate() const {
  if (!(area_side >= 10.0 * params.range())) {
    throw DomainError("area side must be at least 10x the transmit range");
  }
  if (total_frames <= 0) throw DomainError("total frames must be positive");
  if (effective_warmup() >= total_frames) {
    throw DomainError("warmup frames (" + std::to_string(effective_warmup()) +
                      ") must be fewer than total frames (" + std::to_string(total_frames) + ")");
  }
  if (replications <= 0) throw DomainError("replications must be positive");
  if (threads < 0) throw DomainError("thread count must be non-negative");
}

double torus_distance(const Point& a, const Point& b, double side) {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  dx = std::min(dx, side - dx);
  dy = std::min(dy, side - dy);
  return std::hypot(dx, dy);
}

Topology Topology::from_positions(std::vector<Point> positions, double side, double range) {
  Topology t;
  t.side = side;
  t.range = range;
  t.positions = std::move(positions);
  const std::size_t n = t.positions.size();
  t.adjacency.assign(n, {});
  const double r2 = range * range;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double dx = std::abs(t.positions[a].x - t.positions[b].x);
      double dy = std::abs(t.positions[a].y - t.positions[b].y);
      dx = std::min(dx, side - dx);
      dy = std::min(dy, side - dy);
      if (dx * dx + dy * dy <= r2) {
        t.adjacency[a].push_back(static_cast<std::int32_t>(b));
        t.adjacency[b].push_back(static_cast<std::int32_t>(a));
      }
    }
  }
  return t;
}

Topology generate_topology(const SimConfig& config, Rng& rng) {
  const double side = config.area_side;
  const double expected = config.params.density() * side * side;
  std::poisson_distribution<std::int64_t> count_dist(expected);
  const std::int64_t n = count_dist(rng);
  if (n == 0) throw DegenerateTopology("no nodes drawn");
  std::uniform_real_distribution<double> coord(0.0, side);
  std::vector<Point> positions(static_cast<std::size_t>(n));
  for (auto& p : positions) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  return Topology::from_positions(std::move(positions), side, config.params.range());
}

Topology generate_topology(const SimConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  return generate_topology(config, rng);
}

Network::Network(Topology topology, const SimConfig& config, Rng rng)
    : topology_(std::move(topology)),
      w_min_(config.params.w_min()),
      frame_length_(config.params.frame_length()),
      admission_(config.admission),
      rng_(std::move(rng)),
      nodes_(topology_.size()),
      participating_(topology_.size(), 0),
      transmitting_(topology_.size(), 0),
      busy_(topology_.size(), 0) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    participating_[i] = topology_.degree(i) > 0 || config.isolated_nodes_contend;
    nodes_[i].timer = draw_timer(0);
  }
}

std::int64_t Network::draw_timer(int stage) {
  const std::int64_t window = static_cast<std::int64_t>(w_min_) << stage;
  std::uniform_int_distribution<std::int64_t> dist(0, window - 1);
  return dist(rng_);
}

void Network::start_frame() {
  std::uniform_int_distribution<std::int64_t> offset(0, frame_length_ - 1);
  for (auto& node : nodes_) {
    node.generation_offset = offset(rng_);
    node.frame_update.reset();
    node.frame_update_received = false;
    node.frame_update_queued = false;
    node.frame_update_admitted = false;
  }
}

void Network::admit(std::size_t i, const Update& update) {
  NodeState& node = nodes_[i];
  node.queue.push_back(update);
  ++node.enqueued;
  node.frame_update_admitted = true;
}

void Network::generate(std::size_t i) {
  NodeState& node = nodes_[i];
  const Update own{slot_, slot_, static_cast<std::int32_t>(i)};
  if (admission_ == Admission::kFrameEnd) {
    if (!node.frame_update_received) node.frame_update = own;
    return;
  }
  // Immediate: a reception earlier in the frame has already displaced the own update.
  const Update chosen = node.frame_update_received ? *node.frame_update : own;
  node.frame_update.reset();
  admit(i, chosen);
  node.frame_update_queued = true;
}

void Network::receive(std::size_t i, const Update& update) {
  NodeState& node = nodes_[i];
  if (admission_ == Admission::kFrameEnd || !node.frame_update_admitted) {
    if (!node.frame_update_received || fresher(update, *node.frame_update)) {
      node.frame_update = update;
    }
    node.frame_update_received = true;
    return;
  }
  // Immediate admission after the generation slot: replace in place while still queued.
  if (!node.frame_update_queued) return;
  Update& queued = node.queue.back();
  const bool own = queued.origin_node == static_cast<std::int32_t>(i) &&
                   !node.frame_update_received;
  if (own || fresher(update, queued)) queued = update;
  node.frame_update_received = true;
}

void Network::step() {
  const std::int64_t offset = slot_ % frame_length_;
  if (offset == 0) start_frame();
  const std::size_t n = nodes_.size();

  for (std::size_t i = 0; i < n; ++i) {
    if (participating_[i] && nodes_[i].generation_offset == offset) generate(i);
  }

  outcome_.transmitters.clear();
  outcome_.successes.clear();
  outcome_.collisions.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const NodeState& node = nodes_[i];
    transmitting_[i] = participating_[i] && !node.queue.empty() && node.timer == 0;
    if (transmitting_[i]) outcome_.transmitters.push_back(static_cast<std::int32_t>(i));
  }
  std::fill(busy_.begin(), busy_.end(), 0);
  for (const std::int32_t t : outcome_.transmitters) {
    for (const std::int32_t nb : topology_.adjacency[static_cast<std::size_t>(t)]) {
      busy_[static_cast<std::size_t>(nb)] = 1;
    }
  }

  const bool measuring = slot_ >= stats_start_;
  if (measuring) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!participating_[i] || nodes_[i].queue.empty()) continue;
      ++counters_.contending_slots;
      if (transmitting_[i] || !busy_[i]) ++counters_.active_slots;
      if (transmitting_[i]) {
        ++counters_.attempts;
        if (busy_[i]) ++counters_.collisions;
      }
    }
  }

  // Carrier sense: timers of waiting nodes advance only in idle slots.
  for (std::size_t i = 0; i < n; ++i) {
    NodeState& node = nodes_[i];
    if (!transmitting_[i] && !node.queue.empty() && !busy_[i] && node.timer > 0) --node.timer;
  }

  std::vector<std::pair<std::size_t, Update>> deliveries;
  for (const std::int32_t t : outcome_.transmitters) {
    const auto i = static_cast<std::size_t>(t);
    NodeState& node = nodes_[i];
    if (busy_[i]) {
      outcome_.collisions.push_back(t);
      node.stage = std::min(node.stage + 1, kMaxBackoffStage);
      node.timer = draw_timer(node.stage);
      continue;
    }
    outcome_.successes.push_back(t);
    const Update sent = node.queue.front();
    node.queue.pop_front();
    if (node.frame_update_queued && node.queue.empty()) node.frame_update_queued = false;
    node.baoi = slot_ - sent.arrival_slot;
    node.stage = 0;
    node.timer = draw_timer(0);
    if (trace_) trace_(BroadcastRecord{t, slot_, sent.arrival_slot, node.baoi});
    const Update forwarded{slot_ + 1, sent.origin_slot, sent.origin_node};
    for (const std::int32_t nb : topology_.adjacency[i]) {
      deliveries.emplace_back(static_cast<std::size_t>(nb), forwarded);
    }
  }
  for (const auto& [i, update] : deliveries) receive(i, update);

  if (offset == frame_length_ - 1 && admission_ == Admission::kFrameEnd) {
    for (std::size_t i = 0; i < n; ++i) {
      NodeState& node = nodes_[i];
      if (node.frame_update) {
        admit(i, *node.frame_update);
        node.frame_update.reset();
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    NodeState& node = nodes_[i];
    ++node.baoi;
    if (measuring && participating_[i]) {
      node.baoi_accumulator += node.baoi;
      counters_.age_sum += node.baoi;
      ++counters_.age_samples;
    }
  }
  ++slot_;
}

Estimate estimate(const std::vector<double>& samples) {
  Estimate e;
  const auto n = samples.size();
  if (n == 0) {
    e.mean = e.ci_half_width = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  e.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  if (n < 2) {
    e.ci_half_width = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double ss = 0.0;
  for (const double s : samples) ss += (s - e.mean) * (s - e.mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  e.ci_half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
  return e;
}

ReplicationResult run_replication(const SimConfig& config, int index, std::uint64_t seed,
                                  const std::function<void(const BroadcastRecord&)>& trace) {
  config.validate();
  Rng rng(seed);
  std::optional<Topology> topology;
  for (int attempt = 0; attempt < kTopologyRetries && !topology; ++attempt) {
    if (attempt > 0) rng.seed(splitmix64(seed ^ (static_cast<std::uint64_t>(attempt) << 32)));
    try {
      Topology candidate = generate_topology(config, rng);
      const bool any_link = std::any_of(candidate.adjacency.begin(), candidate.adjacency.end(),
                                        [](const auto& adj) { return !adj.empty(); });
      if (any_link || config.isolated_nodes_contend) topology = std::move(candidate);
    } catch (const DegenerateTopology&) {
    }
  }
  if (!topology) {
    throw DegenerateTopology("no usable topology after " + std::to_string(kTopologyRetries) +
                             " draws (seed " + std::to_string(seed) + ")");
  }

  ReplicationResult result;
  result.index = index;
  result.seed = seed;
  result.node_count = static_cast<std::int64_t>(topology->size());
  std::int64_t degree_sum = 0;
  for (std::size_t i = 0; i < topology->size(); ++i) {
    degree_sum += static_cast<std::int64_t>(topology->degree(i));
    if (topology->degree(i) > 0 || config.isolated_nodes_contend) ++result.counted_nodes;
  }
  result.mean_neighbors = ratio(degree_sum, result.node_count);

  Network net(std::move(*topology), config, std::move(rng));
  const std::int64_t t_f = config.params.frame_length();
  net.set_statistics_start(config.effective_warmup() * t_f);
  if (trace) net.set_trace(trace);
  const std::int64_t slots = config.total_frames * t_f;
  for (std::int64_t s = 0; s < slots; ++s) net.step();

  const Counters& c = net.counters();
  result.counters = c;
  result.p_tx = ratio(c.attempts, c.contending_slots);
  result.p_tx_active = ratio(c.attempts, c.active_slots);
  result.p_cl = ratio(c.collisions, c.attempts);
  result.baoi = ratio(c.age_sum, c.age_samples);
  return result;
}

SimReport run(const SimConfig& config, const std::function<void(const TraceRecord&)>& trace) {
  config.validate();
  const int reps = config.replications;
  std::vector<ReplicationResult> results(static_cast<std::size_t>(reps));
  auto seed_of = [&](int r) { return config.seed + static_cast<std::uint64_t>(r); };

  if (trace) {
    for (int r = 0; r < reps; ++r) {
      results[static_cast<std::size_t>(r)] = run_replication(
          config, r, seed_of(r),
          [&trace, r](const BroadcastRecord& b) { trace(TraceRecord{r, b}); });
    }
  } else {
    int workers = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, reps);
    std::vector<std::future<void>> pending;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
      pending.push_back(std::async(std::launch::async, [&] {
        for (int r = next++; r < reps; r = next++) {
          results[static_cast<std::size_t>(r)] = run_replication(config, r, seed_of(r));
        }
      }));
    }
    for (auto& f : pending) f.get();
  }

  SimReport report;
  report.replications = std::move(results);
  std::vector<double> p_tx, p_tx_a, p_cl, baoi, nb;
  for (const auto& r : report.replications) {
    p_tx.push_back(r.p_tx);
    p_tx_a.push_back(r.p_tx_active);
    p_cl.push_back(r.p_cl);
    baoi.push_back(r.baoi);
    nb.push_back(r.mean_neighbors);
  }
  report.p_tx = estimate(p_tx);
  report.p_tx_active = estimate(p_tx_a);
  report.p_cl = estimate(p_cl);
  report.baoi = estimate(baoi);
  report.mean_neighbors = estimate(nb);
  return report;
}

}  // namespace baoi::sim
