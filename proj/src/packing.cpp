#include "ternavit/packing.hpp"

namespace ternavit {

namespace {

inline bool has_reserved_field(std::uint32_t word) {
  // A field is 0b11 iff both its bits are set; the even-bit mask isolates that.
  return (word & (word >> 1) & 0x55555555u) != 0;
}

}  // namespace

PackedWeightTiles pack_ternary(const TernaryWeightMatrix& t) {
  if (t.rows == 0 || t.cols == 0) fail(ErrorCode::EmptyInput, "pack_ternary: empty matrix");
  if (t.codes.size() != t.size())
    fail(ErrorCode::DimensionMismatch, "pack_ternary: code buffer does not match dims");
  PackedWeightTiles p;
  p.n_out = t.cols;
  p.k_in = t.rows;
  p.beta = t.beta;
  p.words.assign(p.expected_words(), kAllZeroWord);
  const std::size_t slabs = p.k_slabs();
  for (std::size_t k = 0; k < t.rows; ++k) {
    const std::size_t slab = k / kTileK;
    const unsigned shift = 2u * static_cast<unsigned>(k % kTileK);
    const std::int8_t* row = t.codes.data() + k * t.cols;
    for (std::size_t n = 0; n < t.cols; ++n) {
      const std::int8_t code = row[n];
      if (code < -1 || code > 1)
        fail(ErrorCode::InvalidArgument, "pack_ternary: code outside {-1,0,+1}");
      const std::uint32_t field = static_cast<std::uint32_t>(code + 1);
      std::uint32_t& word = p.words[(n / kTileN * slabs + slab) * kTileN + n % kTileN];
      word = (word & ~(3u << shift)) | (field << shift);
    }
  }
  return p;
}

TernaryWeightMatrix unpack_ternary(const PackedWeightTiles& p) {
  if (p.n_out == 0 || p.k_in == 0) fail(ErrorCode::EmptyInput, "unpack_ternary: empty tiles");
  if (p.words.size() != p.expected_words())
    fail(ErrorCode::CorruptData, "unpack_ternary: word count does not match dims");
  for (std::uint32_t w : p.words)
    if (has_reserved_field(w))
      fail(ErrorCode::CorruptData, "unpack_ternary: reserved 2-bit pattern 0b11");
  TernaryWeightMatrix t(p.k_in, p.n_out, p.beta);
  const std::size_t slabs = p.k_slabs();
  for (std::size_t k = 0; k < p.k_in; ++k) {
    const std::size_t slab = k / kTileK;
    const unsigned shift = 2u * static_cast<unsigned>(k % kTileK);
    std::int8_t* row = t.codes.data() + k * p.n_out;
    for (std::size_t n = 0; n < p.n_out; ++n) {
      const std::uint32_t word = p.words[(n / kTileN * slabs + slab) * kTileN + n % kTileN];
      row[n] = static_cast<std::int8_t>((word >> shift) & 3u) - 1;
    }
  }
  return t;
}

std::size_t packed_weight_bytes(std::size_t n_out, std::size_t k_in) {
  if (n_out == 0 || k_in == 0)
    fail(ErrorCode::InvalidArgument, "packed_weight_bytes: dimensions must be positive");
  const std::size_t n_tiles = (n_out + kTileN - 1) / kTileN;
  const std::size_t k_slabs = (k_in + kTileK - 1) / kTileK;
  return 4 * n_tiles * k_slabs * kTileN;
}

void unpack_fragment(const PackedWeightTiles& p, std::size_t n_tile, std::size_t k_slab,
                     std::int8_t* frag) {
  const std::uint32_t* base = p.words.data() + (n_tile * p.k_slabs() + k_slab) * kTileN;
  for (std::size_t n = 0; n < kTileN; ++n) {
    std::uint32_t word = base[n];
    if (has_reserved_field(word))
      fail(ErrorCode::CorruptData, "unpack_fragment: reserved 2-bit pattern 0b11");
    for (std::size_t k = 0; k < kTileK; ++k) {
      frag[k * kTileN + n] = static_cast<std::int8_t>(word & 3u) - 1;
      word >>= 2;
    }
  }
}

}  // namespace ternavit
