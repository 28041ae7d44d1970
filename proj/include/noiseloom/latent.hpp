#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace noiseloom {

inline constexpr int kDefaultBlockSize = 4;
inline constexpr int kDefaultLatentSize = 64;
inline constexpr int kDefaultChannels = 4;

struct BlockCoord {
  int row = 0;
  int col = 0;

  friend bool operator==(const BlockCoord&, const BlockCoord&) = default;
  friend auto operator<=>(const BlockCoord&, const BlockCoord&) = default;
};

// Half-open rectangle in block units: rows [top, bottom), cols [left, right).
struct Region {
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;

  int height() const { return bottom - top; }
  int width() const { return right - left; }
  int area() const { return height() > 0 && width() > 0 ? height() * width() : 0; }
  bool empty() const { return area() == 0; }
  bool contains(BlockCoord c) const {
    return c.row >= top && c.row < bottom && c.col >= left && c.col < right;
  }
  bool overlaps(const Region& o) const {
    return top < o.bottom && o.top < bottom && left < o.right && o.left < right;
  }

  friend bool operator==(const Region&, const Region&) = default;
};

std::string to_string(const Region& r);
std::string to_string(BlockCoord c);

// Dimensions of the block grid of a latent.
struct BlockGrid {
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  bool contains(BlockCoord c) const {
    return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
  }
  bool contains(const Region& r) const {
    return !r.empty() && r.top >= 0 && r.left >= 0 && r.bottom <= rows &&
           r.right <= cols;
  }
  int index(BlockCoord c) const { return c.row * cols + c.col; }
  BlockCoord coord(int index) const { return {index / cols, index % cols}; }

  friend bool operator==(const BlockGrid&, const BlockGrid&) = default;
};

class RegionMask {
 public:
  RegionMask() = default;
  explicit RegionMask(BlockGrid grid);
  static RegionMask from_region(BlockGrid grid, const Region& region);
  // Rounds a pixel rectangle outward to the blocks that cover it.
  static RegionMask from_pixel_rect(BlockGrid grid, int block_size, int top,
                                    int left, int bottom, int right);

  const BlockGrid& grid() const { return grid_; }
  bool test(BlockCoord c) const { return bits_[grid_.index(c)] != 0; }
  void set(BlockCoord c, bool on = true) { bits_[grid_.index(c)] = on; }
  void add(const Region& region);
  int count() const;
  std::vector<BlockCoord> coords() const;

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  BlockGrid grid_;
  std::vector<std::uint8_t> bits_;
};

// H x W x C latent, row-major with channels innermost.
class LatentGrid {
 public:
  LatentGrid() = default;
  LatentGrid(int height, int width, int channels, std::uint64_t seed = 0,
             int block_size = kDefaultBlockSize);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  int block_size() const { return block_size_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t s) { seed_ = s; }
  BlockGrid blocks() const {
    return {height_ / block_size_, width_ / block_size_};
  }

  std::size_t size() const { return values_.size(); }
  std::size_t offset(int y, int x, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  float at(int y, int x, int c) const { return values_[offset(y, x, c)]; }
  float& at(int y, int x, int c) { return values_[offset(y, x, c)]; }

  std::span<float> values() { return values_; }
  std::span<const float> values() const { return values_; }

  bool same_shape(const LatentGrid& o) const {
    return height_ == o.height_ && width_ == o.width_ &&
           channels_ == o.channels_ && block_size_ == o.block_size_;
  }
  // Bitwise equality of shape and values (seed tag ignored).
  bool bitwise_equal(const LatentGrid& o) const;

  friend bool operator==(const LatentGrid&, const LatentGrid&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  int block_size_ = kDefaultBlockSize;
  std::uint64_t seed_ = 0;
  std::vector<float> values_;
};

struct SwapPair {
  BlockCoord in;   // selected block outside the target region
  BlockCoord out;  // region block that gives way

  friend bool operator==(const SwapPair&, const SwapPair&) = default;
};

struct SwapList {
  std::vector<SwapPair> pairs;
  std::uint64_t pairing_seed = 0;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
  friend bool operator==(const SwapList&, const SwapList&) = default;
};

void check_geometry(int height, int width, int channels,
                    int block_size = kDefaultBlockSize);

LatentGrid sample_latent(int height, int width, int channels,
                         std::uint64_t seed,
                         int block_size = kDefaultBlockSize);

// Redraws every pixel of the masked blocks from the stream keyed by
// fresh_seed; the draw at a flat index is the same value sample_latent
// would produce for that index and seed.
LatentGrid resample_region(const LatentGrid& z, const RegionMask& mask,
                           std::uint64_t fresh_seed);

void validate_swaps(BlockGrid grid, const SwapList& swaps);
LatentGrid apply_block_permutation(const LatentGrid& z, const SwapList& swaps);
// In-place variant for per-block arrays (attention rows, labels, ...).
template <typename T>
void permute_blocks(std::span<T> per_block, std::size_t stride,
                    BlockGrid grid, const SwapList& swaps) {
  for (const auto& p : swaps.pairs) {
    const std::size_t a = static_cast<std::size_t>(grid.index(p.in)) * stride;
    const std::size_t b = static_cast<std::size_t>(grid.index(p.out)) * stride;
    for (std::size_t k = 0; k < stride; ++k) std::swap(per_block[a + k], per_block[b + k]);
  }
}

// Binary latent file: "NLAT", u16 version, u16 channels, u32 height,
// u32 width, little-endian f32 values, u64 seed.
inline constexpr std::uint16_t kLatentFileVersion = 1;
void write_latent(std::ostream& out, const LatentGrid& z);
LatentGrid read_latent(std::istream& in);
void save_latent(const std::string& path, const LatentGrid& z);
LatentGrid load_latent(const std::string& path);

}  // namespace noiseloom
