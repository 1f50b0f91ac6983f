#include "locq/grid.hpp"

#include <cstring>
#include <ostream>

#include "locq/kernels.hpp"

namespace locq {

namespace {

// splitmix64: tiny, well-mixed, and identical everywhere, unlike the
// distribution adapters in <random>.
inline std::uint64_t mix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void write_le_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xff);
  os.write(buf, 8);
}

void write_le_double(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  write_le_u64(os, v);
}

}  // namespace

Field::Field(int n_i, int n_j, int n_k, double c)
    : n_i_(n_i), n_j_(n_j), n_k_(n_k), c_(c) {
  if (n_i < 1 || n_j < 1 || n_k < 1)
    throw GridError("field extents must be >= 1 (got " + std::to_string(n_i) +
                    "x" + std::to_string(n_j) + "x" + std::to_string(n_k) +
                    ")");
  data_.assign(std::size_t(n_i + 2) * (n_j + 2) * (n_k + 2), 0.0);
}

void Field::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Field::fill_random(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (double& v : data_) v = double(mix64(state) >> 11) * 0x1.0p-53;
}

bool Field::same_shape(const Field& o) const {
  return n_i_ == o.n_i_ && n_j_ == o.n_j_ && n_k_ == o.n_k_;
}

bool Field::bitwise_equal(const Field& o) const {
  if (!same_shape(o)) return false;
  return std::memcmp(data_.data(), o.data_.data(),
                     data_.size() * sizeof(double)) == 0;
}

Field::Site Field::first_mismatch(const Field& o) const {
  if (!same_shape(o)) return {0, 0, 0};
  for (int i = 0; i < n_i_ + 2; ++i)
    for (int j = 0; j < n_j_ + 2; ++j)
      for (int k = 0; k < n_k_ + 2; ++k) {
        const long p = index(i, j, k);
        if (std::memcmp(&data_[p], &o.data_[p], sizeof(double)) != 0)
          return {i, j, k};
      }
  return {-1, -1, -1};
}

const char* to_string(SubmitOrder o) {
  return o == SubmitOrder::ijk ? "ijk" : "kji";
}

SubmitOrder submit_order_from_string(const std::string& s) {
  if (s == "ijk") return SubmitOrder::ijk;
  if (s == "kji") return SubmitOrder::kji;
  throw GridError("unknown submit order '" + s + "' (expected ijk or kji)");
}

BlockSet::BlockSet(int n_i, int n_j, int n_k, BlockSpec spec) : spec_(spec) {
  if (spec.d_i < 1 || spec.d_j < 1 || spec.d_k < 1)
    throw GridError("block extents must be >= 1");
  if (n_i % spec.d_i != 0 || n_j % spec.d_j != 0 || n_k % spec.d_k != 0)
    throw GridError("block extents " + std::to_string(spec.d_i) + "x" +
                    std::to_string(spec.d_j) + "x" + std::to_string(spec.d_k) +
                    " do not divide grid " + std::to_string(n_i) + "x" +
                    std::to_string(n_j) + "x" + std::to_string(n_k));
  n_ib_ = n_i / spec.d_i;
  n_jb_ = n_j / spec.d_j;
  n_kb_ = n_k / spec.d_k;
  blocks_.reserve(std::size_t(count()));
  for (int ib = 0; ib < n_ib_; ++ib)
    for (int jb = 0; jb < n_jb_; ++jb)
      for (int kb = 0; kb < n_kb_; ++kb) blocks_.push_back({ib, jb, kb, -1});
}

BlockSet BlockSet::for_field(const Field& f, BlockSpec spec) {
  return BlockSet(f.n_i(), f.n_j(), f.n_k(), spec);
}

std::vector<Block> linearize(const BlockSet& bs, SubmitOrder order) {
  if (order == SubmitOrder::ijk) return bs.blocks();
  std::vector<Block> out;
  out.reserve(std::size_t(bs.count()));
  for (int kb = 0; kb < bs.blocks_k(); ++kb)
    for (int jb = 0; jb < bs.blocks_j(); ++jb)
      for (int ib = 0; ib < bs.blocks_i(); ++ib)
        out.push_back(bs.block(bs.index_of(ib, jb, kb)));
  return out;
}

void jacobi_sweep_block(const Field& src, Field& dst, const Block& b,
                        const BlockSet& bs) {
  const BlockSpec& sp = bs.spec();
  kernels::Region r;
  r.i0 = 1 + long(b.ib) * sp.d_i;
  r.i1 = r.i0 + sp.d_i;
  r.j0 = 1 + long(b.jb) * sp.d_j;
  r.j1 = r.j0 + sp.d_j;
  r.k0 = 1 + long(b.kb) * sp.d_k;
  r.k1 = r.k0 + sp.d_k;
  kernels::active_sweep()(src.data(), dst.data(), src.stride_i(),
                          src.stride_j(), src.coeff(), r);
}

void jacobi_sweep_naive(const Field& src, Field& dst) {
  if (!src.same_shape(dst)) throw GridError("sweep fields differ in shape");
  const double c = src.coeff();
  for (int i = 1; i <= src.n_i(); ++i)
    for (int j = 1; j <= src.n_j(); ++j)
      for (int k = 1; k <= src.n_k(); ++k)
        dst.at(i, j, k) =
            c * (((((src.at(i - 1, j, k) + src.at(i + 1, j, k)) +
                    src.at(i, j - 1, k)) +
                   src.at(i, j + 1, k)) +
                  src.at(i, j, k - 1)) +
                 src.at(i, j, k + 1));
}

void jacobi_sweep_blocked_serial(const Field& src, Field& dst,
                                 const BlockSet& bs) {
  if (!src.same_shape(dst)) throw GridError("sweep fields differ in shape");
  for (const Block& b : bs.blocks()) jacobi_sweep_block(src, dst, b, bs);
}

void dump_raw(const Field& f, std::ostream& os) {
  write_le_u64(os, std::uint64_t(f.n_i()));
  write_le_u64(os, std::uint64_t(f.n_j()));
  write_le_u64(os, std::uint64_t(f.n_k()));
  write_le_double(os, f.coeff());
  for (std::size_t p = 0; p < f.size(); ++p) write_le_double(os, f.data()[p]);
}

}  // namespace locq
