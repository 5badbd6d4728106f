#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "nodemetry/volume.hpp"

namespace nodemetry::nifti {

enum class DataType : std::int16_t {
  kUInt8 = 2,
  kInt16 = 4,
  kInt32 = 8,
  kFloat32 = 16,
};

inline constexpr std::size_t kHeaderSize = 348;
inline constexpr std::size_t kVoxOffset = 352;
inline constexpr std::int64_t kMaxDim = 32767;

/// Header fields carried through a round trip. Stored in the on-disk float
/// precision so write -> read reproduces them exactly.
struct HeaderInfo {
  Index3 dims{1, 1, 1};
  DataType datatype = DataType::kUInt8;
  Eigen::Vector3f spacing = Eigen::Vector3f::Ones();
  Eigen::Matrix<float, 3, 4> affine = Eigen::Matrix<float, 3, 4>::Identity();
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::string description;

  Grid grid() const;
  bool operator==(const HeaderInfo& other) const = default;
};

using VoxelData = std::variant<std::vector<std::uint8_t>, std::vector<std::int16_t>,
                               std::vector<std::int32_t>, std::vector<float>>;

struct Image {
  HeaderInfo header;
  VoxelData voxels;

  /// Header value-equality plus bitwise voxel equality (NaN payloads included).
  bool operator==(const Image& other) const;
};

Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path, bool compress);

/// Parses an in-memory (already decompressed) single-file NIfTI-1 stream.
Image parse_image(std::span<const std::uint8_t> bytes);
/// Encodes the little-endian byte stream written by write_image.
std::vector<std::uint8_t> encode_image(const Image& image);

std::size_t bytes_per_voxel(DataType type);

template <typename Scalar>
constexpr DataType datatype_for();
template <>
constexpr DataType datatype_for<std::uint8_t>() { return DataType::kUInt8; }
template <>
constexpr DataType datatype_for<std::int16_t>() { return DataType::kInt16; }
template <>
constexpr DataType datatype_for<std::int32_t>() { return DataType::kInt32; }
template <>
constexpr DataType datatype_for<float>() { return DataType::kFloat32; }

/// Header for a grid stored as `type` (spacing and affine rounded to float).
HeaderInfo make_header(const Grid& grid, DataType type, std::string description = {});

/// Voxel values as `Scalar` after applying scl_slope/scl_inter when the
/// slope is nonzero. Integral targets reject values that are fractional or
/// out of range.
template <typename Scalar>
Volume<Scalar> to_volume(const Image& image);

template <typename Scalar>
Image to_image(const Volume<Scalar>& volume, std::string description = {}) {
  Image image;
  image.header = make_header(volume.grid(), datatype_for<Scalar>(), std::move(description));
  image.voxels = std::vector<Scalar>(volume.data().begin(), volume.data().end());
  return image;
}

template <typename Scalar>
Volume<Scalar> read_volume(const std::filesystem::path& path) {
  return to_volume<Scalar>(read_image(path));
}

template <typename Scalar>
void write_volume(const Volume<Scalar>& volume, const std::filesystem::path& path, bool compress) {
  write_image(to_image(volume), path, compress);
}

/// Compress when the path ends in ".gz".
bool wants_gzip(const std::filesystem::path& path);

}  // namespace nodemetry::nifti
