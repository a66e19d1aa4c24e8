#include "meghasim/cluster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <tuple>

#include "meghasim/random.hpp"

namespace meghasim {

Topology::Topology(std::uint32_t gm_count, std::uint32_t lm_count, std::uint32_t workers_per_partition)
    : gm_count_(gm_count), lm_count_(lm_count), wpp_(workers_per_partition) {
  if (gm_count == 0 || lm_count == 0 || workers_per_partition == 0)
    throw std::invalid_argument("topology counts must all be >= 1");
  if (static_cast<std::uint64_t>(gm_count) * lm_count * workers_per_partition > UINT32_MAX / 2)
    throw std::invalid_argument("topology too large");
}

std::vector<WorkerId> Topology::workers() const {
  std::vector<WorkerId> out;
  out.reserve(total_workers());
  for (std::uint32_t w = 0; w < total_workers(); ++w) out.push_back(id(w));
  return out;
}

std::string Topology::label(std::uint32_t index) const { return worker_label(id(index)); }

Topology build_topology(std::uint32_t gm_count, std::uint32_t lm_count,
                        std::uint32_t workers_per_partition) {
  return Topology(gm_count, lm_count, workers_per_partition);
}

Topology resolve_topology(std::uint64_t target) {
  if (target == 0) throw std::invalid_argument("target worker count must be positive");
  constexpr int kDefaultGm = 8, kDefaultLm = 10;
  constexpr double kTolerance = 0.01;
  using Key = std::tuple<int, double, std::uint32_t, std::uint32_t>;
  std::optional<Key> best_within;
  std::optional<std::tuple<double, int, std::uint32_t, std::uint32_t>> best_any;
  std::uint32_t limit = static_cast<std::uint32_t>(std::min<std::uint64_t>(target, 64));
  for (std::uint32_t gm = 1; gm <= limit; ++gm) {
    for (std::uint32_t lm = 1; lm <= limit; ++lm) {
      double exact = static_cast<double>(target) / (static_cast<double>(gm) * lm);
      auto wpp = static_cast<std::uint64_t>(std::max(1.0, std::round(exact)));
      std::uint64_t total = static_cast<std::uint64_t>(gm) * lm * wpp;
      double err = std::abs(static_cast<double>(total) - static_cast<double>(target)) /
                   static_cast<double>(target);
      int dist = std::abs(static_cast<int>(gm) - kDefaultGm) + std::abs(static_cast<int>(lm) - kDefaultLm);
      if (err <= kTolerance + 1e-12) {
        Key k{dist, err, gm, lm};
        if (!best_within || k < *best_within) best_within = k;
      }
      std::tuple<double, int, std::uint32_t, std::uint32_t> a{err, dist, gm, lm};
      if (!best_any || a < *best_any) best_any = a;
    }
  }
  std::uint32_t gm = 0, lm = 0;
  if (best_within) {
    gm = std::get<2>(*best_within);
    lm = std::get<3>(*best_within);
  } else {
    gm = std::get<2>(*best_any);
    lm = std::get<3>(*best_any);
  }
  double exact = static_cast<double>(target) / (static_cast<double>(gm) * lm);
  auto wpp = static_cast<std::uint32_t>(std::max(1.0, std::round(exact)));
  return Topology(gm, lm, wpp);
}

std::string gm_letters(std::uint32_t gm) {
  // Bijective base 26: 0 -> A, 25 -> Z, 26 -> AA.
  std::string s;
  std::uint64_t n = static_cast<std::uint64_t>(gm) + 1;
  while (n > 0) {
    --n;
    s.insert(s.begin(), static_cast<char>('A' + n % 26));
    n /= 26;
  }
  return s;
}

std::string worker_label(const WorkerId& id) {
  return gm_letters(id.gm) + std::to_string(id.lm + 1) + "_" + std::to_string(id.worker + 1);
}

std::optional<WorkerId> parse_worker_label(const std::string& label) {
  std::size_t i = 0;
  std::uint64_t gm = 0;
  while (i < label.size() && label[i] >= 'A' && label[i] <= 'Z') {
    gm = gm * 26 + static_cast<std::uint64_t>(label[i] - 'A' + 1);
    if (gm > UINT32_MAX) return std::nullopt;
    ++i;
  }
  if (i == 0) return std::nullopt;
  auto read_number = [&](std::uint64_t& out) {
    std::size_t start = i;
    out = 0;
    while (i < label.size() && label[i] >= '0' && label[i] <= '9') {
      out = out * 10 + static_cast<std::uint64_t>(label[i] - '0');
      if (out > UINT32_MAX) return false;
      ++i;
    }
    return i > start;
  };
  std::uint64_t lm = 0, w = 0;
  if (!read_number(lm) || lm == 0) return std::nullopt;
  if (i >= label.size() || label[i] != '_') return std::nullopt;
  ++i;
  if (!read_number(w) || w == 0 || i != label.size()) return std::nullopt;
  return WorkerId{static_cast<std::uint32_t>(gm - 1), static_cast<std::uint32_t>(lm - 1),
                  static_cast<std::uint32_t>(w - 1)};
}

// ---------------------------------------------------------------------------

LmState::LmState(const Topology& topo, std::uint32_t lm)
    : topo_(&topo), lm_(lm), slots_(topo.workers_per_lm()), active_pos_(topo.workers_per_lm(), 0) {
  if (lm >= topo.lm_count()) throw std::invalid_argument("LM index out of range");
}

std::uint32_t LmState::offset(std::uint32_t worker) const {
  if (worker >= topo_->total_workers() || topo_->lm_of(worker) != lm_)
    throw std::logic_error("worker " + std::to_string(worker) + " does not belong to LM " +
                           std::to_string(lm_ + 1));
  return worker - topo_->first_worker_of_lm(lm_);
}

LaunchResult LmState::apply_launch(TaskRef task, std::uint32_t worker, std::uint32_t scheduling_gm) {
  auto off = offset(worker);
  Slot& s = slots_[off];
  if (s.busy) return LaunchResult::kRejected;
  s.busy = true;
  s.task = task;
  s.gm = scheduling_gm;
  s.borrowed = scheduling_gm != topo_->owner_of(worker);
  active_pos_[off] = static_cast<std::uint32_t>(active_.size());
  active_.push_back(worker);
  return LaunchResult::kLaunched;
}

LmState::Slot LmState::release(std::uint32_t worker, TaskRef task) {
  auto off = offset(worker);
  Slot& s = slots_[off];
  if (!s.busy || !(s.task == task))
    throw SimulationError("completion for unknown task on worker " + topo_->label(worker));
  Slot out = s;
  s = Slot{};
  auto pos = active_pos_[off];
  auto last = active_.back();
  active_[pos] = last;
  active_pos_[last - topo_->first_worker_of_lm(lm_)] = pos;
  active_.pop_back();
  return out;
}

LmSnapshot LmState::snapshot(SimTime now) const {
  LmSnapshot snap;
  snap.lm = lm_;
  snap.time = now;
  snap.free.resize(slots_.size());
  for (std::size_t i = 0; i < slots_.size(); ++i) snap.free[i] = slots_[i].busy ? 0 : 1;
  return snap;
}

// ---------------------------------------------------------------------------

GmGlobalState::GmGlobalState(const Topology& topo, std::uint32_t gm, std::uint64_t seed)
    : topo_(&topo), gm_(gm) {
  if (gm >= topo.gm_count()) throw std::invalid_argument("GM index out of range");
  const auto parts = topo.partition_count();
  const auto wpp = topo.workers_per_partition();
  const std::size_t words = (wpp + 63) / 64;
  Rng rng = Rng::derive(seed, 0x676d000000ULL + gm);

  order_.resize(parts);
  position_.resize(parts);
  bits_.assign(parts, std::vector<std::uint64_t>(words, 0));
  free_count_.assign(parts, wpp);
  worker_cursor_.assign(parts, 0);
  for (std::uint32_t p = 0; p < parts; ++p) {
    auto& ord = order_[p];
    ord.resize(wpp);
    for (std::uint32_t k = 0; k < wpp; ++k) ord[k] = k;
    rng.shuffle(ord);
    position_[p].resize(wpp);
    for (std::uint32_t pos = 0; pos < wpp; ++pos) position_[p][ord[pos]] = pos;
    for (std::uint32_t pos = 0; pos < wpp; ++pos) bits_[p][pos / 64] |= (1ULL << (pos % 64));
  }
  for (std::uint32_t lm = 0; lm < topo.lm_count(); ++lm) {
    for (std::uint32_t owner = 0; owner < topo.gm_count(); ++owner) {
      std::uint32_t p = lm * topo.gm_count() + owner;
      (owner == gm ? internal_ : external_).push_back(p);
    }
  }
  rng.shuffle(internal_);
  rng.shuffle(external_);
  pending_.assign(topo.total_workers(), 0);
  stamp_.assign(topo.total_workers(), SimTime::ticks(-1));
  last_update_.assign(topo.lm_count(), SimTime::ticks(-1));
  total_free_ = topo.total_workers();
}

bool GmGlobalState::is_free(std::uint32_t worker) const {
  auto p = topo_->partition_of(worker);
  auto pos = position_[p][worker % topo_->workers_per_partition()];
  return (bits_[p][pos / 64] >> (pos % 64)) & 1ULL;
}

std::uint32_t GmGlobalState::lm_free(std::uint32_t lm) const {
  std::uint32_t s = 0;
  for (std::uint32_t g = 0; g < topo_->gm_count(); ++g) s += partition_free(lm, g);
  return s;
}

void GmGlobalState::set_flag(std::uint32_t worker, bool free) {
  auto p = topo_->partition_of(worker);
  auto pos = position_[p][worker % topo_->workers_per_partition()];
  std::uint64_t mask = 1ULL << (pos % 64);
  std::uint64_t& word = bits_[p][pos / 64];
  bool was = (word & mask) != 0;
  if (was == free) return;
  if (free) {
    word |= mask;
    ++free_count_[p];
    ++total_free_;
  } else {
    word &= ~mask;
    --free_count_[p];
    --total_free_;
  }
}

std::optional<std::uint32_t> GmGlobalState::take_from(std::uint32_t p, SimTime now) {
  const auto wpp = topo_->workers_per_partition();
  const auto& words = bits_[p];
  std::uint32_t start = worker_cursor_[p] % wpp;
  // Scan [start, wpp) then [0, start).
  for (int pass = 0; pass < 2; ++pass) {
    std::uint32_t lo = pass == 0 ? start : 0;
    std::uint32_t hi = pass == 0 ? wpp : start;
    for (std::uint32_t pos = lo; pos < hi;) {
      std::uint64_t w = words[pos / 64] >> (pos % 64);
      if (w == 0) {
        pos = (pos / 64 + 1) * 64;
        continue;
      }
      pos += static_cast<std::uint32_t>(std::countr_zero(w));
      if (pos >= hi) break;
      worker_cursor_[p] = pos + 1;
      std::uint32_t worker = p * wpp + order_[p][pos];
      claim(worker, now);
      return worker;
    }
  }
  return std::nullopt;
}

std::optional<std::uint32_t> GmGlobalState::select_worker(SimTime now) {
  if (total_free_ == 0) return std::nullopt;
  for (auto* list : {&internal_, &external_}) {
    auto& cursor = list == &internal_ ? internal_cursor_ : external_cursor_;
    const auto n = list->size();
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t idx = (cursor + i) % n;
      std::uint32_t p = (*list)[idx];
      if (free_count_[p] == 0) continue;
      cursor = idx;
      return take_from(p, now);
    }
  }
  return std::nullopt;
}

void GmGlobalState::claim(std::uint32_t worker, SimTime now) {
  set_flag(worker, false);
  ++pending_[worker];
  stamp_[worker] = now;
}

void GmGlobalState::settle(std::uint32_t worker) {
  if (pending_[worker] > 0) --pending_[worker];
}

void GmGlobalState::release(std::uint32_t worker, SimTime now) {
  set_flag(worker, true);
  stamp_[worker] = now;
}

bool GmGlobalState::apply_update(const LmSnapshot& snap) {
  if (snap.lm >= topo_->lm_count() || snap.free.size() != topo_->workers_per_lm())
    throw std::invalid_argument("snapshot does not cover exactly one LM cluster");
  if (snap.time < last_update_[snap.lm]) return false;
  last_update_[snap.lm] = snap.time;
  const auto base = topo_->first_worker_of_lm(snap.lm);
  for (std::uint32_t off = 0; off < snap.free.size(); ++off) {
    std::uint32_t w = base + off;
    if (pending_[w] || stamp_[w] >= snap.time) continue;
    set_flag(w, snap.free[off] != 0);
  }
  return true;
}

std::vector<std::uint32_t> GmGlobalState::worker_order(std::uint32_t partition) const {
  std::vector<std::uint32_t> out;
  for (auto k : order_.at(partition)) out.push_back(partition * topo_->workers_per_partition() + k);
  return out;
}

bool GmGlobalState::consistent() const {
  std::uint64_t total = 0;
  for (std::size_t p = 0; p < bits_.size(); ++p) {
    std::uint32_t c = 0;
    for (auto w : bits_[p]) c += static_cast<std::uint32_t>(std::popcount(w));
    if (c != free_count_[p]) return false;
    total += c;
  }
  return total == total_free_;
}

}  // namespace meghasim
