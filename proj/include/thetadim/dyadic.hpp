#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace thetadim {

// Cubes are addressed by Morton codes: at level n a code holds n groups of d
// bits, most significant group first, and within a group axis 0 is the most
// significant bit. The parent of a code is code >> d and the low d bits are
// the child digit. Codes at one level sort into a depth-first order, so the
// children of every cube are contiguous at the next level.
using MortonCode = std::uint64_t;

inline constexpr int kMaxDim = 6;
inline constexpr int kMortonBits = 63;

using CubeIndex = std::array<std::uint64_t, kMaxDim>;
using Coords = std::array<double, kMaxDim>;
using Point = std::vector<double>;

MortonCode encode_morton(const CubeIndex& index, int dim, int level);
CubeIndex decode_morton(MortonCode code, int dim, int level);

// Half-open cube [index_i 2^-n, (index_i + 1) 2^-n) per axis.
struct DyadicCube {
  int level = 0;
  int dim = 1;
  CubeIndex index{};

  double side() const;
  double diameter() const;  // sqrt(d) * 2^-n
  Coords lower() const;
  Coords center() const;
  MortonCode code() const { return encode_morton(index, dim, level); }
};

double cube_side(int level);
double cube_diameter(int dim, int level);

// Affine map applied to raw coordinates before ingestion: x' = (x - origin) * scale.
struct Normalization {
  std::vector<double> origin;
  double scale = 1.0;
};

// Sparse tree of the occupied dyadic cubes of a compact set, down to a fixed
// maximum depth. Immutable once built.
class DyadicSet {
 public:
  DyadicSet() = default;

  // Builds the tree from occupied leaf codes at `depth`. Duplicates are
  // allowed. An empty leaf list yields the empty set.
  static DyadicSet from_leaves(int dim, int depth, std::vector<MortonCode> leaves);

  int dim() const { return dim_; }
  int depth() const { return depth_; }
  bool empty() const { return levels_.empty() || levels_.front().empty(); }

  std::size_t count(int level) const { return levels_.at(level).size(); }
  std::span<const MortonCode> cubes(int level) const { return levels_.at(level); }
  std::span<const MortonCode> leaves() const { return levels_.at(depth_); }
  std::size_t total_cubes() const;

  // Children of cube i at `level` are cubes [first, last) at level + 1.
  std::uint32_t child_begin(int level, std::size_t i) const { return child_begin_[level][i]; }
  std::uint32_t child_end(int level, std::size_t i) const { return child_begin_[level][i + 1]; }
  std::uint32_t child_count(int level, std::size_t i) const {
    return child_end(level, i) - child_begin(level, i);
  }

  // Position of `code` at `level`, if occupied.
  std::optional<std::size_t> find(int level, MortonCode code) const;
  bool contains(int level, MortonCode code) const { return find(level, code).has_value(); }

  DyadicCube cube(int level, std::size_t i) const;

  // The same set truncated to a coarser depth.
  DyadicSet truncated(int depth) const;

  const std::optional<Normalization>& normalization() const { return normalization_; }
  void set_normalization(Normalization n) { normalization_ = std::move(n); }

 private:
  int dim_ = 1;
  int depth_ = 0;
  std::vector<std::vector<MortonCode>> levels_;
  std::vector<std::vector<std::uint32_t>> child_begin_;
  std::optional<Normalization> normalization_;
};

// Validates (dim, depth) against the Morton code capacity.
void check_grid(int dim, int depth);

// Occupied cubes are those containing at least one point. Coordinates must lie
// in [0, 1).
DyadicSet build_from_points(std::span<const Point> points, int depth);

// Rescales points into [0, 1)^d with a common scale factor so the bounding box
// fits strictly inside the unit cube.
Normalization normalize_points(std::vector<Point>& points);

// Minimum over occupied level-n cubes of the number of occupied children.
int min_branching(const DyadicSet& set, int level);

struct BranchingProfile {
  std::vector<int> min_children;  // per level 0..N-1
  int burn_in = 2;
  double dyadic_dimension = 0.0;
};

// Per-level branching exponent min_n log2 N_n over n in [burn_in, N-1]. The
// burn-in is clamped to N-1 for shallow sets.
BranchingProfile branching_profile(const DyadicSet& set, int burn_in = 2);
double dyadic_dimension(const DyadicSet& set, int burn_in = 2);

// Leaf-list text format: optional '#' comment lines, a header
// `d=<d> depth=<N>`, then one leaf per line as comma-separated integer
// indices, lexicographically sorted.
void write_leaf_file(std::ostream& out, const DyadicSet& set, std::string_view comment = {});
DyadicSet read_leaf_file(std::istream& in);
void save_leaf_file(const std::string& path, const DyadicSet& set, std::string_view comment = {});
DyadicSet load_leaf_file(const std::string& path);

// Writes `comment` as '#'-prefixed lines.
void write_comment_block(std::ostream& out, std::string_view comment);

}  // namespace thetadim
