#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace spikenet {

// Indexed min-queue over a fixed set of slots, each holding one time key.
//
// Implemented as a tournament tree: leaves are the slots, every internal
// node holds the winner of its two children. Changing keys replays only the
// matches above the touched leaves, and several changes can share one
// replay of their common ancestors.
//
// Matches are decided by (key, rank). Ranks default to the slot id; callers
// may supply any permutation to impose their own tie order.
class EventQueue {
public:
  using slot_type = std::uint32_t;

  EventQueue() = default;
  explicit EventQueue(std::size_t slots) { reset(slots); }

  void reset(std::size_t slots) {
    std::vector<slot_type> ranks(slots);
    for (std::size_t s = 0; s < slots; ++s) ranks[s] = static_cast<slot_type>(s);
    reset(ranks);
  }

  // All keys start at +infinity.
  void reset(std::span<const slot_type> ranks) {
    slots_ = ranks.size();
    leaves_ = std::bit_ceil(slots_ < 2 ? std::size_t{2} : slots_);
    nodes_.assign(2 * leaves_, Node{});
    for (std::size_t s = 0; s < leaves_; ++s) {
      auto& leaf = nodes_[leaves_ + s];
      leaf.slot = static_cast<slot_type>(s);
      leaf.rank = s < slots_ ? ranks[s] : static_cast<slot_type>(s);
    }
    rebuild();
  }

  // Sets all keys and rebuilds the tree in O(n).
  void assign(std::span<const double> keys) {
    for (std::size_t s = 0; s < keys.size() && s < slots_; ++s) nodes_[leaves_ + s].key = keys[s];
    rebuild();
  }

  std::size_t size() const noexcept { return slots_; }
  double key(slot_type s) const noexcept { return nodes_[leaves_ + s].key; }
  slot_type top() const noexcept { return nodes_[1].slot; }
  double top_key() const noexcept { return nodes_[1].key; }

  void update(slot_type s, double key) noexcept {
    std::size_t i = leaves_ + s;
    nodes_[i].key = key;
    while (i > 1) {
      i >>= 1;
      replay(i);
    }
  }

  // Two-phase update: stage new keys with set_key, then commit the touched
  // slots (in ascending order) to replay their shared ancestors once.
  void set_key(slot_type s, double key) noexcept { nodes_[leaves_ + s].key = key; }

  void commit(std::span<const slot_type> ascending_slots) {
    if (ascending_slots.empty()) return;
    std::size_t m = 0;
    if (level_.size() < ascending_slots.size()) level_.resize(ascending_slots.size());
    for (const auto s : ascending_slots) level_[m++] = leaves_ + s;
    std::size_t* idx = level_.data();
    // Replay level by level while the touched paths are still disjoint.
    while (m > 1 && idx[0] > 1) {
      std::size_t k = 0;
      for (std::size_t a = 0; a < m; ++a) {
        const std::size_t parent = idx[a] >> 1;
        idx[k] = parent;
        k += static_cast<std::size_t>(k == 0 || idx[k - 1] != parent);
      }
      m = k;
      for (std::size_t a = 0; a < m; ++a) replay(idx[a]);
    }
    // Single remaining path up to the root.
    for (std::size_t i = idx[0]; i > 1;) {
      i >>= 1;
      replay(i);
    }
  }

  // Every internal node holds the winner of its children.
  bool valid() const noexcept {
    for (std::size_t i = leaves_ - 1; i >= 1; --i) {
      const auto& w = nodes_[2 * i + right_wins(nodes_[2 * i], nodes_[2 * i + 1])];
      if (w.slot != nodes_[i].slot || w.key != nodes_[i].key) return false;
    }
    return true;
  }

private:
  struct Node {
    double key = std::numeric_limits<double>::infinity();
    slot_type slot = 0;
    slot_type rank = 0;
  };

  // Keys are nonnegative (or +inf), whose IEEE-754 bit patterns order the
  // same way as the values, so the match is decided on integers.
  static std::size_t right_wins(const Node& a, const Node& b) noexcept {
    const auto ka = std::bit_cast<std::uint64_t>(a.key);
    const auto kb = std::bit_cast<std::uint64_t>(b.key);
    return static_cast<std::size_t>((kb < ka) | ((kb == ka) & (b.rank < a.rank)));
  }

  void replay(std::size_t i) noexcept {
    const std::size_t left = 2 * i;
    nodes_[i] = nodes_[left + right_wins(nodes_[left], nodes_[left + 1])];
  }

  void rebuild() noexcept {
    for (std::size_t i = leaves_ - 1; i >= 1; --i)
      nodes_[i] = nodes_[2 * i + right_wins(nodes_[2 * i], nodes_[2 * i + 1])];
  }

  std::size_t slots_ = 0;
  std::size_t leaves_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::size_t> level_;
};

}  // namespace spikenet
