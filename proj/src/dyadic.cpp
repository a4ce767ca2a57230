#include "thetadim/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "thetadim/errors.hpp"

namespace thetadim {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kDomain: return "DomainError";
    case ErrorCode::kRange: return "RangeError";
    case ErrorCode::kResolution: return "ResolutionError";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kOverLimit: return "OverLimit";
    case ErrorCode::kNonBracketed: return "NonBracketed";
    case ErrorCode::kDegenerateScale: return "DegenerateScale";
    case ErrorCode::kNotImplemented: return "NotImplemented";
    case ErrorCode::kZeroEnergy: return "ZeroEnergy";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kPrecondition: return "PreconditionFailed";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "Unknown";
}

void check_grid(int dim, int depth) {
  if (dim < 1 || dim > kMaxDim) {
    throw ConfigError("ambient dimension must be in [1, " + std::to_string(kMaxDim) +
                      "], got " + std::to_string(dim));
  }
  if (depth < 0) throw ConfigError("depth must be nonnegative");
  if (dim * depth > kMortonBits) {
    throw ConfigError("d * depth = " + std::to_string(dim * depth) +
                      " exceeds the Morton code capacity of " + std::to_string(kMortonBits) +
                      " bits");
  }
}

MortonCode encode_morton(const CubeIndex& index, int dim, int level) {
  MortonCode code = 0;
  for (int b = level - 1; b >= 0; --b) {
    for (int axis = 0; axis < dim; ++axis) {
      code = (code << 1) | ((index[axis] >> b) & 1u);
    }
  }
  return code;
}

CubeIndex decode_morton(MortonCode code, int dim, int level) {
  CubeIndex index{};
  for (int b = 0; b < level; ++b) {
    for (int axis = dim - 1; axis >= 0; --axis) {
      index[axis] |= (code & 1u) << b;
      code >>= 1;
    }
  }
  return index;
}

double cube_side(int level) { return std::ldexp(1.0, -level); }

double cube_diameter(int dim, int level) {
  return std::sqrt(static_cast<double>(dim)) * cube_side(level);
}

double DyadicCube::side() const { return cube_side(level); }
double DyadicCube::diameter() const { return cube_diameter(dim, level); }

Coords DyadicCube::lower() const {
  Coords c{};
  const double h = side();
  for (int i = 0; i < dim; ++i) c[i] = static_cast<double>(index[i]) * h;
  return c;
}

Coords DyadicCube::center() const {
  Coords c{};
  const double h = side();
  for (int i = 0; i < dim; ++i) c[i] = (static_cast<double>(index[i]) + 0.5) * h;
  return c;
}

DyadicSet DyadicSet::from_leaves(int dim, int depth, std::vector<MortonCode> leaves) {
  check_grid(dim, depth);
  std::sort(leaves.begin(), leaves.end());
  leaves.erase(std::unique(leaves.begin(), leaves.end()), leaves.end());
  if (!leaves.empty() && depth * dim < 64 && (leaves.back() >> (depth * dim)) != 0) {
    throw DomainError("leaf code out of range for depth " + std::to_string(depth));
  }

  DyadicSet set;
  set.dim_ = dim;
  set.depth_ = depth;
  set.levels_.resize(depth + 1);
  set.child_begin_.resize(depth);
  set.levels_[depth] = std::move(leaves);
  for (int n = depth - 1; n >= 0; --n) {
    const auto& fine = set.levels_[n + 1];
    auto& coarse = set.levels_[n];
    auto& offsets = set.child_begin_[n];
    coarse.reserve(fine.size() / 2 + 1);
    offsets.reserve(fine.size() / 2 + 2);
    for (std::size_t j = 0; j < fine.size(); ++j) {
      const MortonCode parent = fine[j] >> dim;
      if (coarse.empty() || coarse.back() != parent) {
        coarse.push_back(parent);
        offsets.push_back(static_cast<std::uint32_t>(j));
      }
    }
    offsets.push_back(static_cast<std::uint32_t>(fine.size()));
    coarse.shrink_to_fit();
  }
  return set;
}

std::size_t DyadicSet::total_cubes() const {
  std::size_t total = 0;
  for (const auto& level : levels_) total += level.size();
  return total;
}

std::optional<std::size_t> DyadicSet::find(int level, MortonCode code) const {
  const auto& cubes = levels_.at(level);
  auto it = std::lower_bound(cubes.begin(), cubes.end(), code);
  if (it == cubes.end() || *it != code) return std::nullopt;
  return static_cast<std::size_t>(it - cubes.begin());
}

DyadicCube DyadicSet::cube(int level, std::size_t i) const {
  DyadicCube c;
  c.level = level;
  c.dim = dim_;
  c.index = decode_morton(levels_.at(level).at(i), dim_, level);
  return c;
}

DyadicSet DyadicSet::truncated(int depth) const {
  if (depth < 0 || depth > depth_) throw RangeError("truncation depth out of range");
  std::vector<MortonCode> leaves(levels_.at(depth).begin(), levels_.at(depth).end());
  DyadicSet out = from_leaves(dim_, depth, std::move(leaves));
  out.normalization_ = normalization_;
  return out;
}

DyadicSet build_from_points(std::span<const Point> points, int depth) {
  if (points.empty()) throw EmptySetError("build_from_points: empty point list");
  const int dim = static_cast<int>(points.front().size());
  check_grid(dim, depth);
  const double scale = std::ldexp(1.0, depth);
  const std::uint64_t cells = std::uint64_t{1} << depth;
  std::vector<MortonCode> leaves;
  leaves.reserve(points.size());
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != dim) {
      throw DomainError("build_from_points: mixed point dimensions");
    }
    CubeIndex index{};
    for (int i = 0; i < dim; ++i) {
      if (!(p[i] >= 0.0 && p[i] < 1.0)) {
        std::ostringstream msg;
        msg << "build_from_points: coordinate " << p[i] << " outside [0,1)";
        throw DomainError(msg.str());
      }
      index[i] = std::min<std::uint64_t>(static_cast<std::uint64_t>(p[i] * scale), cells - 1);
    }
    leaves.push_back(encode_morton(index, dim, depth));
  }
  return DyadicSet::from_leaves(dim, depth, std::move(leaves));
}

Normalization normalize_points(std::vector<Point>& points) {
  Normalization norm;
  if (points.empty()) return norm;
  const std::size_t dim = points.front().size();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& p : points) {
    for (std::size_t i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  double extent = 0.0;
  for (std::size_t i = 0; i < dim; ++i) extent = std::max(extent, hi[i] - lo[i]);
  norm.origin = lo;
  // Map the bounding box into [0, 1 - 2^-40] so the far face stays inside.
  norm.scale = extent > 0.0 ? (1.0 - std::ldexp(1.0, -40)) / extent : 1.0;
  for (auto& p : points) {
    for (std::size_t i = 0; i < dim; ++i) p[i] = (p[i] - lo[i]) * norm.scale;
  }
  return norm;
}

int min_branching(const DyadicSet& set, int level) {
  if (set.empty()) throw EmptySetError("min_branching: empty set");
  if (level < 0 || level >= set.depth()) {
    throw RangeError("min_branching: level " + std::to_string(level) + " outside [0, " +
                     std::to_string(set.depth()) + ")");
  }
  std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
  for (std::size_t i = 0; i < set.count(level); ++i) {
    best = std::min(best, set.child_count(level, i));
  }
  return static_cast<int>(best);
}

BranchingProfile branching_profile(const DyadicSet& set, int burn_in) {
  if (set.empty()) throw EmptySetError("dyadic_dimension: empty set");
  if (set.depth() < 1) throw RangeError("dyadic_dimension: depth must be at least 1");
  BranchingProfile profile;
  profile.burn_in = std::clamp(burn_in, 0, set.depth() - 1);
  profile.min_children.reserve(set.depth());
  for (int n = 0; n < set.depth(); ++n) profile.min_children.push_back(min_branching(set, n));
  int worst = std::numeric_limits<int>::max();
  for (int n = profile.burn_in; n < set.depth(); ++n) {
    worst = std::min(worst, profile.min_children[n]);
  }
  profile.dyadic_dimension = std::log2(static_cast<double>(worst));
  return profile;
}

double dyadic_dimension(const DyadicSet& set, int burn_in) {
  return branching_profile(set, burn_in).dyadic_dimension;
}

void write_comment_block(std::ostream& out, std::string_view comment) {
  if (comment.empty()) return;
  std::istringstream lines{std::string(comment)};
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
}

void write_leaf_file(std::ostream& out, const DyadicSet& set, std::string_view comment) {
  write_comment_block(out, comment);
  out << "d=" << set.dim() << " depth=" << set.depth() << '\n';
  if (set.empty()) return;
  const int dim = set.dim();
  std::vector<CubeIndex> rows;
  rows.reserve(set.leaves().size());
  for (MortonCode code : set.leaves()) rows.push_back(decode_morton(code, dim, set.depth()));
  std::sort(rows.begin(), rows.end(), [dim](const CubeIndex& a, const CubeIndex& b) {
    return std::lexicographical_compare(a.begin(), a.begin() + dim, b.begin(), b.begin() + dim);
  });
  std::string line;
  for (const auto& row : rows) {
    line.clear();
    for (int i = 0; i < dim; ++i) {
      if (i) line += ',';
      line += std::to_string(row[i]);
    }
    line += '\n';
    out << line;
  }
}

DyadicSet read_leaf_file(std::istream& in) {
  std::string line;
  int dim = -1;
  int depth = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (std::sscanf(line.c_str(), "d=%d depth=%d", &dim, &depth) != 2) {
      throw IoError("leaf file: expected header 'd=<d> depth=<N>', got '" + line + "'");
    }
    break;
  }
  if (dim < 0) throw IoError("leaf file: missing header");
  check_grid(dim, depth);
  const std::uint64_t cells = std::uint64_t{1} << depth;
  std::vector<MortonCode> leaves;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    CubeIndex index{};
    int axis = 0;
    const char* p = line.c_str();
    while (*p) {
      if (axis >= dim) throw IoError("leaf file: too many indices in '" + line + "'");
      char* end = nullptr;
      const unsigned long long v = std::strtoull(p, &end, 10);
      if (end == p) throw IoError("leaf file: malformed line '" + line + "'");
      if (v >= cells) throw DomainError("leaf file: index out of range in '" + line + "'");
      index[axis++] = v;
      p = end;
      if (*p == ',') ++p;
      else if (*p == '\r') break;
      else if (*p != '\0') throw IoError("leaf file: malformed line '" + line + "'");
    }
    if (axis != dim) throw IoError("leaf file: expected " + std::to_string(dim) + " indices");
    leaves.push_back(encode_morton(index, dim, depth));
  }
  return DyadicSet::from_leaves(dim, depth, std::move(leaves));
}

void save_leaf_file(const std::string& path, const DyadicSet& set, std::string_view comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_leaf_file(out, set, comment);
  if (!out) throw IoError("write failed for '" + path + "'");
}

DyadicSet load_leaf_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_leaf_file(in);
}

}  // namespace thetadim
