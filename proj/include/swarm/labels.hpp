#ifndef SWARM_LABELS_HPP
#define SWARM_LABELS_HPP

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace swarm {

/// Chunk sets are n-bit masks; chunk i (1-based) lives in bit i-1.
using Mask = std::uint32_t;

inline constexpr int kMaxChunks = 16;

inline constexpr Mask full_mask(int n) { return (Mask{1} << n) - 1; }
inline constexpr int popcount(Mask m) { return std::popcount(m); }
inline constexpr bool mask_subset(Mask a, Mask b) { return (a & ~b) == 0; }
inline constexpr bool mask_covers(Mask a, Mask b) {
  return mask_subset(a, b) && popcount(b & ~a) == 1;
}
inline constexpr bool mask_relates(Mask a, Mask b) {
  return mask_subset(a, b) || mask_subset(b, a);
}

/// Throws std::out_of_range unless 1 <= n <= kMaxChunks.
void check_chunk_count(int n);

/// A peer's label: the subset of chunks it holds, tagged with the chunk count.
class ChunkLabel {
 public:
  ChunkLabel(int n, Mask bits);

  static ChunkLabel empty(int n) { return ChunkLabel(n, 0); }
  static ChunkLabel full(int n) { return ChunkLabel(n, full_mask(n)); }
  /// Builds a label from 1-based chunk indices.
  static ChunkLabel of(int n, std::initializer_list<int> chunks);
  /// Parses "{1,3}" / "{}" (whitespace tolerated).
  static ChunkLabel parse(int n, std::string_view text);

  int chunk_count() const { return n_; }
  Mask bits() const { return bits_; }
  /// Position of this label in the canonical state-vector ordering.
  std::size_t index() const { return bits_; }
  int size() const { return popcount(bits_); }
  bool contains(int chunk) const;
  bool is_empty() const { return bits_ == 0; }
  bool is_full() const { return bits_ == full_mask(n_); }

  std::string to_string() const;

  friend bool operator==(const ChunkLabel&, const ChunkLabel&) = default;
  friend auto operator<=>(const ChunkLabel& a, const ChunkLabel& b) {
    return a.bits_ <=> b.bits_;
  }

 private:
  int n_;
  Mask bits_;
};

/// Non-strict inclusion. Throws std::domain_error on mismatched chunk counts.
bool is_subset(const ChunkLabel& a, const ChunkLabel& b);
/// a is contained in b and b has exactly one more chunk.
bool covers(const ChunkLabel& a, const ChunkLabel& b);
/// Comparable under inclusion. Two labels can swap iff they do not relate.
bool relates(const ChunkLabel& a, const ChunkLabel& b);

/// All 2^n labels, position m holding mask m.
std::vector<ChunkLabel> enumerate_labels(int n);

std::string label_string(int n, Mask m);

/// Label names in canonical order, used as CSV/JSON keys.
std::vector<std::string> label_names(int n);

/// Binomial coefficient, exact for the small arguments used here.
double binomial(int n, int k);

}  // namespace swarm

#endif  // SWARM_LABELS_HPP
