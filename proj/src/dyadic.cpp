#include "mwlab/dyadic.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace mwlab {

namespace {
constexpr int kMaxDepth = 24;  // 2^24 cells; beyond this the dense model is hopeless
}

double DyadicIndex::measure() const { return std::ldexp(1.0, -level); }

double DyadicIndex::left() const {
  return static_cast<double>(pos) * measure();
}

double DyadicIndex::right() const {
  return static_cast<double>(pos + 1) * measure();
}

bool DyadicIndex::contains(const DyadicIndex& other) const {
  if (other.level < level) return false;
  return (other.pos >> (other.level - level)) == pos;
}

DyadicIndex DyadicIndex::parent() const {
  if (level == 0) throw std::out_of_range("DyadicIndex::parent: root has no parent");
  return {level - 1, pos >> 1};
}

DyadicIndex DyadicIndex::left_child() const { return {level + 1, 2 * pos}; }
DyadicIndex DyadicIndex::right_child() const { return {level + 1, 2 * pos + 1}; }

std::string DyadicIndex::str() const {
  return std::to_string(level) + ":" + std::to_string(pos);
}

DyadicIndex DyadicIndex::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("DyadicIndex::parse: expected \"k:p\", got \"" +
                                std::string(text) + "\"");
  DyadicIndex idx;
  const char* lv_begin = text.data();
  const char* lv_end = text.data() + colon;
  const char* pos_begin = text.data() + colon + 1;
  const char* pos_end = text.data() + text.size();
  auto r1 = std::from_chars(lv_begin, lv_end, idx.level);
  auto r2 = std::from_chars(pos_begin, pos_end, idx.pos);
  if (r1.ec != std::errc{} || r1.ptr != lv_end || r2.ec != std::errc{} ||
      r2.ptr != pos_end || idx.level < 0 || idx.pos < 0 ||
      idx.level > kMaxDepth || idx.pos >= (std::int64_t{1} << idx.level))
    throw std::invalid_argument("DyadicIndex::parse: invalid index \"" +
                                std::string(text) + "\"");
  return idx;
}

DyadicTree::DyadicTree(int depth) : depth_(depth) {
  if (depth < 0 || depth > kMaxDepth)
    throw std::invalid_argument("DyadicTree: depth must be in [0, " +
                                std::to_string(kMaxDepth) + "]");
}

bool DyadicTree::valid(const DyadicIndex& idx) const {
  return idx.level >= 0 && idx.level <= depth_ && idx.pos >= 0 &&
         idx.pos < (std::int64_t{1} << idx.level);
}

void DyadicTree::require_valid(const DyadicIndex& idx) const {
  if (!valid(idx))
    throw std::invalid_argument("DyadicTree: index " + idx.str() +
                                " not in tree of depth " + std::to_string(depth_));
}

std::int64_t DyadicTree::node_id(const DyadicIndex& idx) const {
  require_valid(idx);
  return (std::int64_t{1} << idx.level) - 1 + idx.pos;
}

DyadicIndex DyadicTree::node_at(std::int64_t id) const {
  if (id < 0 || id >= node_count())
    throw std::out_of_range("DyadicTree::node_at: id out of range");
  int level = 0;
  while ((std::int64_t{2} << level) - 1 <= id) ++level;
  return {level, id - ((std::int64_t{1} << level) - 1)};
}

std::pair<std::int64_t, std::int64_t> DyadicTree::cell_range(
    const DyadicIndex& idx) const {
  require_valid(idx);
  const int shift = depth_ - idx.level;
  return {idx.pos << shift, (idx.pos + 1) << shift};
}

std::pair<DyadicIndex, DyadicIndex> DyadicTree::children(
    const DyadicIndex& idx) const {
  require_valid(idx);
  if (idx.level == depth_)
    throw std::out_of_range("DyadicTree::children: level-overflow at " + idx.str());
  return {idx.left_child(), idx.right_child()};
}

std::vector<DyadicIndex> DyadicTree::ancestors(const DyadicIndex& idx) const {
  require_valid(idx);
  std::vector<DyadicIndex> chain(static_cast<std::size_t>(idx.level) + 1);
  DyadicIndex cur = idx;
  for (int k = idx.level; k >= 0; --k) {
    chain[static_cast<std::size_t>(k)] = cur;
    if (k > 0) cur = cur.parent();
  }
  return chain;
}

std::vector<DyadicIndex> DyadicTree::descendants(const DyadicIndex& idx,
                                                 int max_level) const {
  require_valid(idx);
  if (max_level < idx.level || max_level > depth_)
    throw std::invalid_argument("DyadicTree::descendants: max_level " +
                                std::to_string(max_level) + " not in [" +
                                std::to_string(idx.level) + ", " +
                                std::to_string(depth_) + "]");
  std::vector<DyadicIndex> out;
  out.reserve((std::size_t{2} << (max_level - idx.level)) - 1);
  for (int k = idx.level; k <= max_level; ++k) {
    const std::int64_t first = idx.pos << (k - idx.level);
    const std::int64_t last = (idx.pos + 1) << (k - idx.level);
    for (std::int64_t p = first; p < last; ++p) out.push_back({k, p});
  }
  return out;
}

std::vector<DyadicIndex> DyadicTree::all_intervals() const {
  return descendants(root(), depth_);
}

}  // namespace mwlab
