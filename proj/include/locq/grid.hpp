#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace locq {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense 3D lattice with one ghost layer per side, k contiguous.
/// Site (i, j, k) uses padded coordinates: 0 and n+1 are the halo.
class Field {
 public:
  Field(int n_i, int n_j, int n_k, double c = 1.0 / 6.0);

  int n_i() const { return n_i_; }
  int n_j() const { return n_j_; }
  int n_k() const { return n_k_; }
  double coeff() const { return c_; }

  long stride_i() const { return (n_j_ + 2L) * (n_k_ + 2L); }
  long stride_j() const { return n_k_ + 2L; }

  double& at(int i, int j, int k) { return data_[index(i, j, k)]; }
  double at(int i, int j, int k) const { return data_[index(i, j, k)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }  // padded site count
  long interior_sites() const { return long(n_i_) * n_j_ * n_k_; }

  void fill(double v);
  /// Deterministic uniform [0, 1) fill of the whole array, halo included.
  /// Implemented directly on the generator output so results are identical
  /// across standard libraries.
  void fill_random(std::uint64_t seed);

  bool same_shape(const Field& o) const;
  bool bitwise_equal(const Field& o) const;
  /// Padded coordinates of the first differing site, or {-1,-1,-1}.
  struct Site {
    int i, j, k;
  };
  Site first_mismatch(const Field& o) const;

 private:
  long index(int i, int j, int k) const {
    return (long(i) * (n_j_ + 2) + j) * (n_k_ + 2) + k;
  }

  int n_i_, n_j_, n_k_;
  double c_;
  std::vector<double> data_;
};

/// Block extents in sites per direction; must divide the grid extents.
struct BlockSpec {
  int d_i = 1;
  int d_j = 1;
  int d_k = 1;
};

/// One block of the decomposition. `locality` is the owning LD, stamped by
/// placement; -1 until assigned.
struct Block {
  int ib = 0;
  int jb = 0;
  int kb = 0;
  int locality = -1;
};

enum class SubmitOrder { ijk, kji };
const char* to_string(SubmitOrder o);
SubmitOrder submit_order_from_string(const std::string& s);

/// The full block decomposition of a grid. Immutable after construction.
class BlockSet {
 public:
  BlockSet(int n_i, int n_j, int n_k, BlockSpec spec);
  static BlockSet for_field(const Field& f, BlockSpec spec);

  int blocks_i() const { return n_ib_; }
  int blocks_j() const { return n_jb_; }
  int blocks_k() const { return n_kb_; }
  int count() const { return n_ib_ * n_jb_ * n_kb_; }
  const BlockSpec& spec() const { return spec_; }

  long sites_per_block() const {
    return long(spec_.d_i) * spec_.d_j * spec_.d_k;
  }
  long total_sites() const { return sites_per_block() * count(); }

  /// Row-major ijk linear index; the enumeration order of blocks().
  int index_of(int ib, int jb, int kb) const {
    return (ib * n_jb_ + jb) * n_kb_ + kb;
  }
  int index_of(const Block& b) const { return index_of(b.ib, b.jb, b.kb); }

  const Block& block(int idx) const { return blocks_[idx]; }
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  int n_ib_, n_jb_, n_kb_;
  BlockSpec spec_;
  std::vector<Block> blocks_;
};

/// Blocks of `bs` as a task submission list: ijk nests ib outermost and kb
/// innermost, kji the reverse. Both are permutations of bs.blocks().
std::vector<Block> linearize(const BlockSet& bs, SubmitOrder order);

/// One Jacobi update of every interior site of block `b`: dst gets
/// c * (sum of the six face neighbors of src). Sites outside the block are
/// untouched; src is never written. Dispatches to the active sweep kernel.
void jacobi_sweep_block(const Field& src, Field& dst, const Block& b,
                        const BlockSet& bs);

/// Serial reference sweep over the whole interior, no blocking. This is the
/// oracle every blocked/parallel execution is compared against, bit for bit.
void jacobi_sweep_naive(const Field& src, Field& dst);

/// All blocks of `bs` in ijk order, serially.
void jacobi_sweep_blocked_serial(const Field& src, Field& dst,
                                 const BlockSet& bs);

/// Raw debug dump: int64 n_i, n_j, n_k, double c, then the padded array,
/// little-endian throughout.
void dump_raw(const Field& f, std::ostream& os);

}  // namespace locq
