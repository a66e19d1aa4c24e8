#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "meghasim/kernel.hpp"
#include "meghasim/time.hpp"

namespace meghasim {

struct WorkerId {
  std::uint32_t gm = 0;      // partition owner
  std::uint32_t lm = 0;
  std::uint32_t worker = 0;  // ordinal within the partition
  friend bool operator==(const WorkerId&, const WorkerId&) = default;
};

// Data-center layout: lm_count clusters, each split into one partition per
// GM, each partition holding workers_per_partition workers. Workers are
// numbered lm-major, then partition, then ordinal.
class Topology {
 public:
  Topology(std::uint32_t gm_count, std::uint32_t lm_count, std::uint32_t workers_per_partition);

  std::uint32_t gm_count() const { return gm_count_; }
  std::uint32_t lm_count() const { return lm_count_; }
  std::uint32_t workers_per_partition() const { return wpp_; }
  std::uint32_t workers_per_lm() const { return gm_count_ * wpp_; }
  std::uint32_t partition_count() const { return gm_count_ * lm_count_; }
  std::uint32_t total_workers() const { return gm_count_ * lm_count_ * wpp_; }

  std::uint32_t index(const WorkerId& id) const {
    return (id.lm * gm_count_ + id.gm) * wpp_ + id.worker;
  }
  WorkerId id(std::uint32_t index) const {
    return WorkerId{(index / wpp_) % gm_count_, index / workers_per_lm(), index % wpp_};
  }
  std::uint32_t lm_of(std::uint32_t index) const { return index / workers_per_lm(); }
  std::uint32_t owner_of(std::uint32_t index) const { return (index / wpp_) % gm_count_; }
  std::uint32_t partition_of(std::uint32_t index) const { return index / wpp_; }
  std::uint32_t first_worker_of_lm(std::uint32_t lm) const { return lm * workers_per_lm(); }

  std::vector<WorkerId> workers() const;
  std::string label(std::uint32_t index) const;

 private:
  std::uint32_t gm_count_;
  std::uint32_t lm_count_;
  std::uint32_t wpp_;
};

Topology build_topology(std::uint32_t gm_count, std::uint32_t lm_count,
                        std::uint32_t workers_per_partition);

// Factorises a target worker count near the default 8 GM x 10 LM shape.
// Any shape within 1% of the target is acceptable; among those the one
// closest to the default shape wins.
Topology resolve_topology(std::uint64_t target_workers);

std::string gm_letters(std::uint32_t gm);
std::string worker_label(const WorkerId& id);
// Parses "<GM letters><LM number>_<ordinal>"; returns nullopt on bad syntax.
std::optional<WorkerId> parse_worker_label(const std::string& label);

// Availability of one LM's cluster, stamped with the virtual time taken.
struct LmSnapshot {
  std::uint32_t lm = 0;
  SimTime time;
  std::vector<std::uint8_t> free;  // indexed by worker offset within the LM
};

enum class LaunchResult { kLaunched, kRejected };

// Authoritative state of one LM's cluster.
class LmState {
 public:
  struct Slot {
    bool busy = false;
    TaskRef task;
    std::uint32_t gm = 0;  // scheduling GM
    bool borrowed = false;
  };

  LmState(const Topology& topo, std::uint32_t lm);

  std::uint32_t lm() const { return lm_; }
  LaunchResult apply_launch(TaskRef task, std::uint32_t worker, std::uint32_t scheduling_gm);
  // Frees a busy worker and returns what ran there. Throws SimulationError
  // when the worker is idle or ran a different task.
  Slot release(std::uint32_t worker, TaskRef task);

  const Slot& slot(std::uint32_t worker) const { return slots_.at(offset(worker)); }
  const std::vector<std::uint32_t>& active() const { return active_; }
  std::uint32_t busy_count() const { return static_cast<std::uint32_t>(active_.size()); }
  LmSnapshot snapshot(SimTime now) const;

 private:
  std::uint32_t offset(std::uint32_t worker) const;

  const Topology* topo_;
  std::uint32_t lm_;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> active_;  // global worker indices
  std::vector<std::uint32_t> active_pos_;
};

// A GM's eventually-consistent view of every worker in the DC. Each GM
// visits partitions and workers in its own seeded order.
class GmGlobalState {
 public:
  GmGlobalState(const Topology& topo, std::uint32_t gm, std::uint64_t seed);

  std::uint32_t gm() const { return gm_; }
  bool is_free(std::uint32_t worker) const;
  std::uint32_t partition_free(std::uint32_t lm, std::uint32_t owner) const {
    return free_count_[lm * topo_->gm_count() + owner];
  }
  std::uint32_t lm_free(std::uint32_t lm) const;
  std::uint64_t total_free() const { return total_free_; }

  // Internal partitions first, then external ones, each scanned from the
  // round-robin cursor. The chosen worker is claimed (marked busy and
  // pending) before returning.
  std::optional<std::uint32_t> select_worker(SimTime now);

  void claim(std::uint32_t worker, SimTime now);
  // Drops one outstanding claim once the LM has answered for this worker.
  void settle(std::uint32_t worker);
  void release(std::uint32_t worker, SimTime now);
  bool pending(std::uint32_t worker) const { return pending_[worker] != 0; }

  // Replaces the LM's flags with the snapshot. Snapshots older than the last
  // one applied for that LM are ignored, as are workers whose local record
  // is pending or at least as new as the snapshot. Returns false if ignored.
  bool apply_update(const LmSnapshot& snap);

  const std::vector<std::uint32_t>& internal_order() const { return internal_; }
  const std::vector<std::uint32_t>& external_order() const { return external_; }
  // Worker visit order (global indices) for a partition.
  std::vector<std::uint32_t> worker_order(std::uint32_t partition) const;

  // Free-count summaries agree with the flags.
  bool consistent() const;

 private:
  std::optional<std::uint32_t> take_from(std::uint32_t partition, SimTime now);
  void set_flag(std::uint32_t worker, bool free);

  const Topology* topo_;
  std::uint32_t gm_;
  // Per partition: visit position -> worker ordinal, and the inverse.
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::vector<std::uint32_t>> position_;
  std::vector<std::vector<std::uint64_t>> bits_;  // free bits by visit position
  std::vector<std::uint32_t> free_count_;
  std::vector<std::uint32_t> worker_cursor_;
  std::vector<std::uint32_t> internal_;
  std::vector<std::uint32_t> external_;
  std::size_t internal_cursor_ = 0;
  std::size_t external_cursor_ = 0;
  std::vector<std::uint16_t> pending_;  // outstanding claims per worker
  std::vector<SimTime> stamp_;
  std::vector<SimTime> last_update_;
  std::uint64_t total_free_ = 0;
};

}  // namespace meghasim
