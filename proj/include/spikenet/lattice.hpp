#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spikenet {

class graph_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Finite synaptic graph. neighbors(i) is the postsynaptic set of neuron i,
// sorted ascending; for the lattices built here it is also the presynaptic
// set.
//
// Adjacency is stored CSR-style so the engine walks one contiguous array.
class NetworkGraph {
public:
  NetworkGraph() = default;

  // Validates indices and rejects self-loops and duplicate edges.
  static NetworkGraph from_adjacency(std::vector<std::vector<std::uint32_t>> adj,
                                     std::vector<std::size_t> side_extents = {}) {
    NetworkGraph g;
    const std::size_t n = adj.size();
    if (n == 0) throw graph_error("graph must contain at least one neuron");
    if (n > std::numeric_limits<std::uint32_t>::max())
      throw graph_error("too many neurons");
    g.offsets_.reserve(n + 1);
    g.offsets_.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& row = adj[i];
      std::sort(row.begin(), row.end());
      for (std::size_t k = 0; k < row.size(); ++k) {
        const auto j = row[k];
        if (j >= n)
          throw graph_error("neighbor index " + std::to_string(j) + " out of range");
        if (j == i)
          throw graph_error("self-loop at neuron " + std::to_string(i));
        if (k > 0 && row[k - 1] == j)
            throw graph_error("duplicate edge " + std::to_string(i) + "->" +
                              std::to_string(j));
        g.targets_.push_back(j);
      }
      g.offsets_.push_back(static_cast<std::uint32_t>(g.targets_.size()));
    }
    if (side_extents.empty()) side_extents.push_back(n);
    g.extents_ = std::move(side_extents);
    return g;
  }

  std::size_t neuron_count() const noexcept {
    return offsets_.empty() ? 0 : offsets_.size() - 1;
  }
  std::size_t dimension() const noexcept { return extents_.size(); }
  std::span<const std::size_t> side_extents() const noexcept { return extents_; }

  std::span<const std::uint32_t> neighbors(std::size_t i) const noexcept {
    return {targets_.data() + offsets_[i], targets_.data() + offsets_[i + 1]};
  }

  std::size_t edge_endpoints() const noexcept { return targets_.size(); }

  bool is_symmetric() const {
    for (std::size_t i = 0; i < neuron_count(); ++i)
      for (auto j : neighbors(i)) {
        bool back = false;
        for (auto k : neighbors(j)) back = back || k == i;
        if (!back) return false;
      }
    return true;
  }

  // Row-major: the last axis varies fastest. Coordinates are in {-N..N}.
  std::vector<std::int64_t> coordinates(std::size_t index) const {
    std::vector<std::int64_t> c(extents_.size());
    for (std::size_t a = extents_.size(); a-- > 0;) {
      const auto e = extents_[a];
      c[a] = static_cast<std::int64_t>(index % e) - static_cast<std::int64_t>(e / 2);
      index /= e;
    }
    return c;
  }

private:
  std::vector<std::size_t> extents_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> targets_;
};

enum class Boundary { open, periodic };

// Box lattice with L1 nearest-neighbour synapses. Each extent must be odd so
// the axis is the symmetric range {-N..N}.
inline NetworkGraph build_lattice(std::size_t dimension,
                                  std::span<const std::size_t> side_extents,
                                  Boundary boundary = Boundary::open) {
  if (dimension < 1 || dimension > 3)
    throw graph_error("dimension must be 1, 2 or 3");
  if (side_extents.size() != dimension)
    throw graph_error("expected " + std::to_string(dimension) + " extents, got " +
                      std::to_string(side_extents.size()));
  std::size_t n = 1;
  for (auto e : side_extents) {
    if (e < 1 || e % 2 == 0)
      throw graph_error("lattice extent must be odd and >= 1, got " + std::to_string(e));
    if (boundary == Boundary::periodic && e < 3)
      throw graph_error("periodic boundary needs extents >= 3");
    if (n > std::numeric_limits<std::uint32_t>::max() / e)
      throw graph_error("lattice extent overflow");
    n *= e;
  }

  std::vector<std::size_t> stride(dimension, 1);
  for (std::size_t a = dimension - 1; a-- > 0;) stride[a] = stride[a + 1] * side_extents[a + 1];

  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = adj[i];
    row.reserve(2 * dimension);
    for (std::size_t a = 0; a < dimension; ++a) {
      const auto e = side_extents[a];
      const auto c = (i / stride[a]) % e;
      if (c > 0)
        row.push_back(static_cast<std::uint32_t>(i - stride[a]));
      else if (boundary == Boundary::periodic)
        row.push_back(static_cast<std::uint32_t>(i + (e - 1) * stride[a]));
      if (c + 1 < e)
        row.push_back(static_cast<std::uint32_t>(i + stride[a]));
      else if (boundary == Boundary::periodic)
        row.push_back(static_cast<std::uint32_t>(i - (e - 1) * stride[a]));
    }
  }
  return NetworkGraph::from_adjacency(std::move(adj),
                                      {side_extents.begin(), side_extents.end()});
}

// Open chain of n sites, for 1D size sweeps where n need not be odd.
inline NetworkGraph build_chain(std::size_t n) {
  if (n < 1) throw graph_error("chain needs at least one neuron");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw graph_error("lattice extent overflow");
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    adj[i].push_back(static_cast<std::uint32_t>(i + 1));
    adj[i + 1].push_back(static_cast<std::uint32_t>(i));
  }
  return NetworkGraph::from_adjacency(std::move(adj), {n});
}

inline NetworkGraph build_lattice(std::size_t dimension,
                                  std::initializer_list<std::size_t> side_extents,
                                  Boundary boundary = Boundary::open) {
  return build_lattice(dimension, std::span<const std::size_t>(side_extents.begin(),
                                                               side_extents.size()),
                       boundary);
}

}  // namespace spikenet
