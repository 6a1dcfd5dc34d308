#pragma once

#include "psichain/complexity.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace psichain {

inline constexpr std::size_t kMaxCoverDim = 24;
inline constexpr double kMaxCoverPoints = 4e6;

// Lattice of spacing eps/sqrt(dim) inside the (1+eps)-ball, projected onto B_2.
struct BallCover {
  std::size_t dim = 0;
  double eps = 0.0;
  double spacing = 0.0;
  Matrix points;
};
BallCover cover_ball(std::size_t dim, double eps);

// Nearest member of cover_ball(y.size(), eps) for y in B_2; writes the lattice
// index. Error at most eps/2.
std::vector<double> snap_to_ball_cover(std::span<const double> y, double eps, std::vector<std::int64_t>* index = nullptr);

// Members of the box cover of A_l on a fixed support: per-coordinate values
// clip(h k, +-l^{-1/2}), h = eps/sqrt(l).
std::vector<double> box_cover_values(std::size_t ell, double eps);
std::vector<double> snap_to_box_cover(std::span<const double> y, double eps, std::vector<std::int64_t>* index = nullptr);

struct BlockNetParams {
  std::size_t N = 8;
  std::size_t m = 2;
  // Full enumeration limits (configuration, not part of the construction).
  std::size_t enumerate_max_N = 64;
  std::size_t enumerate_max_m = 8;
  double enumerate_max_points = 5e7;

  void validate() const;
  std::size_t levels() const;                   // r0 with m = 2^r0
  std::vector<std::size_t> block_sizes() const;  // 2, 2, 4, ..., m/2
  double eps(std::size_t ell) const { return static_cast<double>(ell) / static_cast<double>(N); }
  double norm_slack() const { return static_cast<double>(m) / static_cast<double>(N); }
};

struct Block {
  std::vector<std::size_t> indices;
  std::vector<std::int64_t> member;  // lattice index of the net member
  std::vector<double> values;
};

struct BlockVector {
  std::vector<Block> blocks;
  Vector assembled;
};

// Disjoint blocks of the prescribed sizes; block 0 in B_2, block r >= 1 in
// A_{2^r}; total norm at most 1 + m/N.
bool satisfies_invariants(const BlockVector& z, const BlockNetParams& p);

struct Approximation {
  BlockVector point;
  double error = 0.0;
};
Approximation approximate_in_block_net(std::span<const double> v, const BlockNetParams& p);

class BlockNet {
 public:
  explicit BlockNet(BlockNetParams p);
  const BlockNetParams& params() const { return p_; }
  // log(#ordered supports) + sum_r log|N_{|I_r|}|.
  double log_cardinality() const;
  // Emits every member with norm <= 1 + m/N; returns the count emitted.
  std::size_t enumerate(const std::function<void(const BlockVector&)>& emit) const;
  // Uniform over supports and block members, rejecting norms above 1 + m/N.
  BlockVector sample(std::uint64_t seed) const;

 private:
  BlockNetParams p_;
  Matrix ball_;                              // block 0 members
  std::vector<std::vector<double>> boxes_;   // per-coordinate values for blocks r >= 1
};

struct LinearizationResult {
  double D_m = 0.0;
  double sup_Bm = 0.0;
  double ratio = 0.0;  // D_m / sup_Bm (0 when both vanish)
  bool holds = false;  // D_m <= 2 sup_Bm
};
LinearizationResult linearization_check(const SampleMatrix& X, const IndexClass& K, const BlockNetParams& p);

}  // namespace psichain
