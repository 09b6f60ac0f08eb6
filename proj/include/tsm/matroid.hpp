// Copyright 2026 The tsm Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TSM_MATROID_HPP_
#define TSM_MATROID_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tsm/errors.hpp"
#include "tsm/rational.hpp"

namespace tsm {

// Subsets of a ground set {0..63}.
using Mask = std::uint64_t;

inline constexpr Mask bit(size_t e) { return Mask{1} << e; }
inline constexpr bool has(Mask s, size_t e) { return (s >> e) & 1u; }
inline size_t size_of(Mask s) { return static_cast<size_t>(std::popcount(s)); }
inline constexpr Mask full_mask(size_t n) {
  return n >= 64 ? ~Mask{0} : bit(n) - 1;
}

struct UniformMatroid {
  size_t size = 0;
  size_t rank = 0;
};

struct PartitionMatroid {
  std::vector<size_t> block_of;  // element -> block
  std::vector<size_t> capacity;  // block -> capacity
};

struct GraphicMatroid {
  size_t vertices = 0;
  std::vector<std::pair<size_t, size_t>> edges;  // element -> edge
};

// Independence given as a list of sets; axioms are checked on construction.
class ExplicitMatroid {
 public:
  static constexpr size_t kMaxSize = 20;

  ExplicitMatroid() : size_(0), table_(1, true) {}

  ExplicitMatroid(size_t size, const std::vector<Mask>& independent)
      : size_(size) {
    if (size > kMaxSize) {
      throw CapExceeded("explicit matroid ground set above " +
                        std::to_string(kMaxSize));
    }
    table_.assign(size_t{1} << size, false);
    for (Mask s : independent) {
      if (s & ~full_mask(size)) {
        throw InputError("explicit matroid set outside ground set");
      }
      table_[s] = true;
    }
    validate();
  }

  size_t size() const { return size_; }
  bool independent(Mask s) const { return table_[s]; }

  std::vector<Mask> sets() const {
    std::vector<Mask> out;
    for (Mask s = 0; s < table_.size(); ++s) {
      if (table_[s]) out.push_back(s);
    }
    return out;
  }

 private:
  void validate() const {
    const Mask universe = full_mask(size_);
    if (!table_[0]) throw InputError("explicit matroid: empty set missing");
    for (Mask s = 1; s <= universe; ++s) {
      if (!table_[s]) continue;
      for (Mask rest = s; rest; rest &= rest - 1) {
        if (!table_[s & ~(rest & -rest)]) {
          throw InputError("explicit matroid: not closed under subsets");
        }
      }
    }
    // Max-independent-subset rank; submodular iff the system is a matroid.
    std::vector<unsigned char> rank(table_.size(), 0);
    for (Mask s = 1; s <= universe; ++s) {
      if (table_[s]) {
        rank[s] = static_cast<unsigned char>(size_of(s));
        continue;
      }
      unsigned char best = 0;
      for (Mask rest = s; rest; rest &= rest - 1) {
        best = std::max(best, rank[s & ~(rest & -rest)]);
      }
      rank[s] = best;
    }
    for (Mask a = 0; a <= universe; ++a) {
      for (size_t e = 0; e < size_; ++e) {
        if (has(a, e)) continue;
        for (size_t f = e + 1; f < size_; ++f) {
          if (has(a, f)) continue;
          if (rank[a | bit(e)] + rank[a | bit(f)] <
              rank[a | bit(e) | bit(f)] + rank[a]) {
            throw InputError("explicit matroid: exchange property fails");
          }
        }
      }
    }
  }

  size_t size_;
  std::vector<bool> table_;
};

class Matroid {
 public:
  using Variant =
      std::variant<UniformMatroid, PartitionMatroid, GraphicMatroid,
                   ExplicitMatroid>;

  Matroid() : v_(UniformMatroid{}) {}
  Matroid(UniformMatroid u) : v_(std::move(u)) {}
  Matroid(PartitionMatroid p) : v_(std::move(p)) { check_partition(); }
  Matroid(GraphicMatroid g) : v_(std::move(g)) { check_graphic(); }
  Matroid(ExplicitMatroid e) : v_(std::move(e)) {}

  const Variant& variant() const { return v_; }

  size_t size() const {
    return std::visit(
        [](const auto& m) -> size_t {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, PartitionMatroid>) {
            return m.block_of.size();
          } else if constexpr (std::is_same_v<T, GraphicMatroid>) {
            return m.edges.size();
          } else if constexpr (std::is_same_v<T, ExplicitMatroid>) {
            return m.size();
          } else {
            return m.size;
          }
        },
        v_);
  }

  bool is_independent(Mask s) const {
    if (s & ~full_mask(size())) {
      throw InputError("element outside matroid ground set");
    }
    return std::visit([s](const auto& m) { return independent_in(m, s); }, v_);
  }

  // Size of a largest independent subset of s.
  size_t rank(Mask s) const {
    Mask basis = 0;
    for (Mask rest = s; rest; rest &= rest - 1) {
      Mask e = rest & -rest;
      if (is_independent(basis | e)) basis |= e;
    }
    return size_of(basis);
  }

  std::string describe() const {
    std::ostringstream os;
    std::visit(
        [&os](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, UniformMatroid>) {
            os << "uniform(" << m.rank << ")";
          } else if constexpr (std::is_same_v<T, PartitionMatroid>) {
            os << "partition(" << m.capacity.size() << " blocks)";
          } else if constexpr (std::is_same_v<T, GraphicMatroid>) {
            os << "graphic(" << m.edges.size() << " edges)";
          } else {
            os << "explicit(" << m.size() << ")";
          }
        },
        v_);
    return os.str();
  }

 private:
  static bool independent_in(const UniformMatroid& m, Mask s) {
    return size_of(s) <= m.rank;
  }

  static bool independent_in(const PartitionMatroid& m, Mask s) {
    std::vector<size_t> used(m.capacity.size(), 0);
    for (Mask rest = s; rest; rest &= rest - 1) {
      size_t b = m.block_of[std::countr_zero(rest)];
      if (++used[b] > m.capacity[b]) return false;
    }
    return true;
  }

  static bool independent_in(const GraphicMatroid& m, Mask s) {
    std::vector<size_t> parent(m.vertices);
    std::iota(parent.begin(), parent.end(), size_t{0});
    auto find = [&parent](size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (Mask rest = s; rest; rest &= rest - 1) {
      auto [u, v] = m.edges[std::countr_zero(rest)];
      size_t ru = find(u), rv = find(v);
      if (ru == rv) return false;
      parent[ru] = rv;
    }
    return true;
  }

  static bool independent_in(const ExplicitMatroid& m, Mask s) {
    return m.independent(s);
  }

  void check_partition() const {
    const auto& p = std::get<PartitionMatroid>(v_);
    for (size_t b : p.block_of) {
      if (b >= p.capacity.size()) {
        throw InputError("partition matroid: block index out of range");
      }
    }
  }

  void check_graphic() const {
    const auto& g = std::get<GraphicMatroid>(v_);
    for (auto [u, v] : g.edges) {
      if (u >= g.vertices || v >= g.vertices) {
        throw InputError("graphic matroid: vertex out of range");
      }
    }
  }

  Variant v_;
};

// Contraction by X followed by truncation to rank cap:
// T independent <=> T disjoint from X, X u T independent, |X u T| <= cap.
struct MatroidView {
  const Matroid* base = nullptr;
  Mask contracted = 0;
  size_t cap = 0;

  bool is_independent(Mask t) const {
    if (t & contracted) return false;
    Mask all = t | contracted;
    return size_of(all) <= cap && base->is_independent(all);
  }
};

// Buyer matroid joined with the |S|-uniform seller matroid, truncated to |S|.
// Elements 0..n-1 are buyers, n..n+k-1 sellers.
struct ExtendedMatroid {
  const Matroid* buyers = nullptr;
  size_t sellers = 0;

  size_t buyer_count() const { return buyers->size(); }
  size_t size() const { return buyer_count() + sellers; }
  Mask buyer_part(Mask s) const { return s & full_mask(buyer_count()); }
  Mask seller_part(Mask s) const { return s >> buyer_count(); }
  Mask seller_element(size_t j) const { return bit(buyer_count() + j); }

  bool is_independent(Mask s) const {
    if (s & ~full_mask(size())) {
      throw InputError("element outside extended matroid ground set");
    }
    return size_of(s) <= sellers && buyers->is_independent(buyer_part(s));
  }
};

struct Basis {
  Mask set = 0;
  Rational weight = 0;
};

// Elements sorted by weight descending, then index ascending.
inline std::vector<size_t> greedy_order(const std::vector<Rational>& w) {
  std::vector<size_t> order(w.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&w](size_t a, size_t b) { return w[a] > w[b]; });
  return order;
}

template <typename Independent>
Basis greedy_basis(const std::vector<size_t>& order,
                   const std::vector<Rational>& w, Mask skip,
                   Independent&& independent) {
  Basis out;
  for (size_t e : order) {
    if (has(skip, e)) continue;
    if (independent(out.set | bit(e))) {
      out.set |= bit(e);
      out.weight += w[e];
    }
  }
  return out;
}

inline Basis max_weight_basis(const MatroidView& view,
                              const std::vector<Rational>& weights) {
  if (weights.size() != view.base->size()) {
    throw InputError("weight vector does not match matroid ground set");
  }
  return greedy_basis(greedy_order(weights), weights, view.contracted,
                      [&view](Mask t) { return view.is_independent(t); });
}

// Greedy on the extended matroid contracted by X; X's own weight excluded.
inline Basis extended_max_weight_basis(const ExtendedMatroid& ext,
                                       const std::vector<Rational>& buyer_w,
                                       const std::vector<Rational>& seller_w,
                                       Mask contracted = 0) {
  if (buyer_w.size() != ext.buyer_count() || seller_w.size() != ext.sellers) {
    throw InputError("weight vector does not match extended ground set");
  }
  std::vector<Rational> w(buyer_w);
  w.insert(w.end(), seller_w.begin(), seller_w.end());
  return greedy_basis(greedy_order(w), w, contracted,
                      [&ext, contracted](Mask t) {
                        return ext.is_independent(t | contracted);
                      });
}

}  // namespace tsm

#endif  // TSM_MATROID_HPP_
