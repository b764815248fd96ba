#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mwlab {

/// A dyadic interval [p*2^-k, (p+1)*2^-k) of [0,1), identified by
/// (level k, position p) with 0 <= p < 2^k.
struct DyadicIndex {
  int level = 0;
  std::int64_t pos = 0;

  constexpr auto operator<=>(const DyadicIndex&) const = default;

  double measure() const;  // exactly 2^-level
  double left() const;
  double right() const;

  /// True iff `other` is contained in (or equal to) this interval.
  bool contains(const DyadicIndex& other) const;

  DyadicIndex parent() const;  // pre: level > 0
  DyadicIndex left_child() const;
  DyadicIndex right_child() const;

  std::string str() const;  // "k:p"
  static DyadicIndex parse(std::string_view text);
};

/// The finite dyadic tree over [0,1): all intervals of level 0..depth.
/// The 2^depth level-`depth` intervals are the cells; every field in this
/// library is piecewise constant on them.
class DyadicTree {
 public:
  explicit DyadicTree(int depth);

  int depth() const { return depth_; }
  std::int64_t cell_count() const { return std::int64_t{1} << depth_; }
  std::int64_t node_count() const {
    return (std::int64_t{2} << depth_) - 1;
  }

  bool valid(const DyadicIndex& idx) const;
  void require_valid(const DyadicIndex& idx) const;

  /// Heap-order id of an interval: levels concatenated root first.
  std::int64_t node_id(const DyadicIndex& idx) const;
  DyadicIndex node_at(std::int64_t id) const;

  /// Half-open range [first, last) of level-`depth` cell positions inside idx.
  std::pair<std::int64_t, std::int64_t> cell_range(const DyadicIndex& idx) const;

  /// The two halves of idx at level+1. Throws std::out_of_range when
  /// idx is already a cell (level == depth).
  std::pair<DyadicIndex, DyadicIndex> children(const DyadicIndex& idx) const;

  /// All intervals containing idx, ordered root -> idx (idx included).
  std::vector<DyadicIndex> ancestors(const DyadicIndex& idx) const;

  /// Every J contained in idx with J.level <= max_level, idx included,
  /// in (level, position) order. Count is 2^(max_level - idx.level + 1) - 1.
  std::vector<DyadicIndex> descendants(const DyadicIndex& idx, int max_level) const;

  /// All intervals of the tree in (level, position) order.
  std::vector<DyadicIndex> all_intervals() const;

  DyadicIndex cell(std::int64_t position) const { return {depth_, position}; }
  static DyadicIndex root() { return {0, 0}; }

 private:
  int depth_;
};

}  // namespace mwlab
