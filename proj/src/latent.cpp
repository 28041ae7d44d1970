#include "noiseloom/latent.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "noiseloom/error.hpp"
#include "noiseloom/rng.hpp"

namespace noiseloom {

std::string to_string(const Region& r) {
  return "[" + std::to_string(r.top) + "," + std::to_string(r.left) + "," +
         std::to_string(r.bottom) + "," + std::to_string(r.right) + "]";
}

std::string to_string(BlockCoord c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

RegionMask::RegionMask(BlockGrid grid)
    : grid_(grid), bits_(static_cast<std::size_t>(grid.size()), 0) {}

RegionMask RegionMask::from_region(BlockGrid grid, const Region& region) {
  RegionMask m(grid);
  m.add(region);
  return m;
}

RegionMask RegionMask::from_pixel_rect(BlockGrid grid, int block_size, int top,
                                       int left, int bottom, int right) {
  if (bottom <= top || right <= left) {
    throw GeometryError("pixel rectangle is empty");
  }
  auto floor_div = [&](int v) { return v / block_size; };
  auto ceil_div = [&](int v) { return (v + block_size - 1) / block_size; };
  return from_region(grid, Region{floor_div(top), floor_div(left),
                                  ceil_div(bottom), ceil_div(right)});
}

void RegionMask::add(const Region& region) {
  if (!grid_.contains(region)) {
    throw GeometryError("region " + to_string(region) +
                        " is empty or outside the " +
                        std::to_string(grid_.rows) + "x" +
                        std::to_string(grid_.cols) + " block grid");
  }
  for (int r = region.top; r < region.bottom; ++r)
    for (int c = region.left; c < region.right; ++c) set({r, c});
}

int RegionMask::count() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<BlockCoord> RegionMask::coords() const {
  std::vector<BlockCoord> out;
  for (int i = 0; i < grid_.size(); ++i)
    if (bits_[i]) out.push_back(grid_.coord(i));
  return out;
}

LatentGrid::LatentGrid(int height, int width, int channels, std::uint64_t seed,
                       int block_size)
    : height_(height),
      width_(width),
      channels_(channels),
      block_size_(block_size),
      seed_(seed) {
  check_geometry(height, width, channels, block_size);
  values_.assign(static_cast<std::size_t>(height) * width * channels, 0.0f);
}

bool LatentGrid::bitwise_equal(const LatentGrid& o) const {
  return same_shape(o) &&
         std::memcmp(values_.data(), o.values_.data(),
                     values_.size() * sizeof(float)) == 0;
}

void check_geometry(int height, int width, int channels, int block_size) {
  if (block_size <= 0) throw GeometryError("block size must be positive");
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw GeometryError("latent dimensions must be positive");
  }
  if (height % block_size != 0 || width % block_size != 0) {
    throw GeometryError("latent " + std::to_string(height) + "x" +
                        std::to_string(width) +
                        " is not a multiple of the block size " +
                        std::to_string(block_size));
  }
}

LatentGrid sample_latent(int height, int width, int channels,
                         std::uint64_t seed, int block_size) {
  LatentGrid z(height, width, channels, seed, block_size);
  const CounterRng rng(seed, StreamTag::latent);
  auto v = z.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<float>(rng.normal(i));
  }
  return z;
}

LatentGrid resample_region(const LatentGrid& z, const RegionMask& mask,
                           std::uint64_t fresh_seed) {
  if (mask.grid() != z.blocks()) {
    throw GeometryError("mask grid does not match the latent block grid");
  }
  if (mask.count() == 0) {
    throw DegenerateInputError("resample mask selects no blocks");
  }
  LatentGrid out = z;
  const CounterRng rng(fresh_seed, StreamTag::latent);
  const int b = z.block_size();
  auto v = out.values();
  for (const BlockCoord bc : mask.coords()) {
    for (int y = bc.row * b; y < (bc.row + 1) * b; ++y) {
      for (int x = bc.col * b; x < (bc.col + 1) * b; ++x) {
        for (int c = 0; c < z.channels(); ++c) {
          const std::size_t i = z.offset(y, x, c);
          v[i] = static_cast<float>(rng.normal(i));
        }
      }
    }
  }
  return out;
}

void validate_swaps(BlockGrid grid, const SwapList& swaps) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(grid.size()), 0);
  auto claim = [&](BlockCoord c) {
    if (!grid.contains(c)) {
      throw GeometryError("swap coordinate " + to_string(c) +
                          " is outside the block grid");
    }
    auto& s = seen[grid.index(c)];
    if (s) {
      throw InvalidPermutationError("block " + to_string(c) +
                                    " appears in more than one swap");
    }
    s = 1;
  };
  for (const auto& p : swaps.pairs) {
    claim(p.in);
    claim(p.out);
  }
}

LatentGrid apply_block_permutation(const LatentGrid& z, const SwapList& swaps) {
  validate_swaps(z.blocks(), swaps);
  LatentGrid out = z;
  const int b = z.block_size();
  const std::size_t run = static_cast<std::size_t>(b) * z.channels();
  auto v = out.values();
  for (const auto& p : swaps.pairs) {
    for (int dy = 0; dy < b; ++dy) {
      float* a = v.data() + z.offset(p.in.row * b + dy, p.in.col * b);
      float* o = v.data() + z.offset(p.out.row * b + dy, p.out.col * b);
      std::swap_ranges(a, a + run, o);
    }
  }
  return out;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "big-endian hosts need a byte swap here");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IngestError("truncated latent file");
  return value;
}

}  // namespace

void write_latent(std::ostream& out, const LatentGrid& z) {
  out.write("NLAT", 4);
  put_le<std::uint16_t>(out, kLatentFileVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(z.channels()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(z.height()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(z.width()));
  const auto v = z.values();
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
  put_le<std::uint64_t>(out, z.seed());
}

LatentGrid read_latent(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || std::memcmp(magic.data(), "NLAT", 4) != 0) {
    throw IngestError("not a latent file (bad magic)");
  }
  const auto version = get_le<std::uint16_t>(in);
  if (version != kLatentFileVersion) {
    throw IngestError("unsupported latent file version " +
                      std::to_string(version));
  }
  const int channels = get_le<std::uint16_t>(in);
  const int height = static_cast<int>(get_le<std::uint32_t>(in));
  const int width = static_cast<int>(get_le<std::uint32_t>(in));
  LatentGrid z(height, width, channels);
  auto v = z.values();
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(float)));
  if (!in) throw IngestError("truncated latent file");
  z.set_seed(get_le<std::uint64_t>(in));
  return z;
}

void save_latent(const std::string& path, const LatentGrid& z) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot open " + path + " for writing");
  write_latent(out, z);
}

LatentGrid load_latent(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path);
  return read_latent(in);
}

}  // namespace noiseloom
