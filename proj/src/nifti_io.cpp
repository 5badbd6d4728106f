#include "nodemetry/nifti_io.hpp"

#include <zlib.h>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>

namespace nodemetry::nifti {

namespace {

// Byte offsets in the 348-byte NIfTI-1 header.
namespace field {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t descrip = 148;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern_b = 256;
constexpr std::size_t qoffset_x = 268;
constexpr std::size_t srow_x = 280;
constexpr std::size_t magic = 344;
}  // namespace field

constexpr std::size_t kDescriptionBytes = 80;
constexpr std::int16_t kXformScannerAnat = 1;
constexpr std::uint8_t kUnitsMm = 2;

template <typename T>
T byteswap_value(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<std::uint8_t, sizeof(T)> raw;
  std::memcpy(raw.data(), &value, sizeof(T));
  std::reverse(raw.begin(), raw.end());
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

/// Reads header fields in the byte order the file declares.
class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, bool swap) : bytes_(bytes), swap_(swap) {}

  template <typename T>
  T get(std::size_t offset) const {
    T value;
    std::memcpy(&value, bytes_.data() + offset, sizeof(T));
    return swap_ ? byteswap_value(value) : value;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  bool swap_;
};

/// Writes header fields little-endian regardless of host order.
class HeaderWriter {
 public:
  explicit HeaderWriter(std::span<std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  void put(std::size_t offset, T value) {
    if constexpr (std::endian::native == std::endian::big) value = byteswap_value(value);
    std::memcpy(bytes_.data() + offset, &value, sizeof(T));
  }

 private:
  std::span<std::uint8_t> bytes_;
};

bool host_is_little() { return std::endian::native == std::endian::little; }

DataType checked_datatype(std::int16_t code) {
  switch (code) {
    case 2:
    case 4:
    case 8:
    case 16:
      return static_cast<DataType>(code);
    default:
      throw UnsupportedTypeError("unsupported NIfTI datatype code " + std::to_string(code), code);
  }
}

Eigen::Matrix3d quaternion_rotation(double b, double c, double d) {
  double a = 1.0 - (b * b + c * c + d * d);
  if (a < 1e-7) {
    const double norm = std::sqrt(b * b + c * c + d * d);
    b /= norm;
    c /= norm;
    d /= norm;
    a = 0.0;
  } else {
    a = std::sqrt(a);
  }
  Eigen::Matrix3d r;
  r << a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c),
      2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b),
      2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b;
  return r;
}

struct QForm {
  bool valid = false;
  Eigen::Vector3f quatern = Eigen::Vector3f::Zero();
  Eigen::Vector3f offset = Eigen::Vector3f::Zero();
  float qfac = 1.0f;
};

// Nearest proper rotation of the affine's direction cosines.
QForm qform_from_affine(const Eigen::Matrix<float, 3, 4>& affine) {
  QForm q;
  Eigen::Matrix3d m = affine.leftCols<3>().cast<double>();
  for (int c = 0; c < 3; ++c) {
    const double norm = m.col(c).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) return q;
    m.col(c) /= norm;
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d rotation = svd.matrixU() * svd.matrixV().transpose();
  if (rotation.determinant() < 0.0) {
    rotation.col(2) = -rotation.col(2);
    q.qfac = -1.0f;
  }
  Eigen::Quaterniond quat(rotation);
  if (quat.w() < 0.0) quat.coeffs() = -quat.coeffs();
  q.quatern = Eigen::Vector3f(float(quat.x()), float(quat.y()), float(quat.z()));
  q.offset = affine.col(3);
  q.valid = true;
  return q;
}

std::string read_description(std::span<const std::uint8_t> bytes) {
  const char* begin = reinterpret_cast<const char*>(bytes.data() + field::descrip);
  const std::size_t length = strnlen(begin, kDescriptionBytes);
  return std::string(begin, length);
}

std::span<const std::uint8_t> as_bytes_of(const VoxelData& voxels) {
  return std::visit(
      [](const auto& values) {
        return std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(values.data()),
                                             values.size() * sizeof(values[0]));
      },
      voxels);
}

std::size_t voxel_count_of(const VoxelData& voxels) {
  return std::visit([](const auto& values) { return values.size(); }, voxels);
}

std::array<std::uint8_t, kVoxOffset> encode_header(const Image& image) {
  const HeaderInfo& h = image.header;
  for (int axis = 0; axis < 3; ++axis) {
    if (h.dims[axis] < 1) {
      throw ValidationError("cannot write volume with dimension " + std::to_string(axis) +
                            " = " + std::to_string(h.dims[axis]));
    }
    if (h.dims[axis] > kMaxDim) {
      throw CapacityError("dimension " + std::to_string(axis) + " = " +
                          std::to_string(h.dims[axis]) + " exceeds the NIfTI-1 limit of " +
                          std::to_string(kMaxDim));
    }
  }
  if (h.description.size() > kDescriptionBytes) {
    throw CapacityError("description longer than 80 bytes");
  }
  const std::size_t expected = static_cast<std::size_t>(h.dims[0] * h.dims[1] * h.dims[2]);
  if (voxel_count_of(image.voxels) != expected) {
    throw ValidationError("voxel buffer size does not match header dims");
  }
  const DataType stored = std::visit(
      [](const auto& values) { return datatype_for<typename std::decay_t<decltype(values)>::value_type>(); },
      image.voxels);
  if (stored != h.datatype) throw ValidationError("header datatype does not match voxel buffer");

  std::array<std::uint8_t, kVoxOffset> bytes{};
  HeaderWriter w(bytes);
  w.put<std::int32_t>(field::sizeof_hdr, static_cast<std::int32_t>(kHeaderSize));
  w.put<std::int16_t>(field::dim, 3);
  for (int axis = 0; axis < 3; ++axis) {
    w.put<std::int16_t>(field::dim + 2 * (axis + 1), static_cast<std::int16_t>(h.dims[axis]));
  }
  for (int axis = 4; axis < 8; ++axis) w.put<std::int16_t>(field::dim + 2 * axis, 1);
  w.put<std::int16_t>(field::datatype, static_cast<std::int16_t>(h.datatype));
  w.put<std::int16_t>(field::bitpix, static_cast<std::int16_t>(8 * bytes_per_voxel(h.datatype)));

  const QForm q = qform_from_affine(h.affine);
  w.put<float>(field::pixdim, q.qfac);
  for (int axis = 0; axis < 3; ++axis) w.put<float>(field::pixdim + 4 * (axis + 1), h.spacing[axis]);
  w.put<float>(field::vox_offset, static_cast<float>(kVoxOffset));
  w.put<float>(field::scl_slope, h.scl_slope);
  w.put<float>(field::scl_inter, h.scl_inter);
  w.put<std::uint8_t>(field::xyzt_units, kUnitsMm);
  std::memcpy(bytes.data() + field::descrip, h.description.data(), h.description.size());

  w.put<std::int16_t>(field::qform_code, q.valid ? kXformScannerAnat : 0);
  w.put<std::int16_t>(field::sform_code, kXformScannerAnat);
  for (int i = 0; i < 3; ++i) {
    w.put<float>(field::quatern_b + 4 * i, q.quatern[i]);
    w.put<float>(field::qoffset_x + 4 * i, q.offset[i]);
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) w.put<float>(field::srow_x + 16 * r + 4 * c, h.affine(r, c));
  }
  std::memcpy(bytes.data() + field::magic, "n+1\0", 4);
  return bytes;
}

template <typename T>
void swap_copy(std::span<const std::uint8_t> src, std::vector<std::uint8_t>& dst) {
  const std::size_t count = src.size() / sizeof(T);
  dst.resize(src.size());
  for (std::size_t i = 0; i < count; ++i) {
    T v;
    std::memcpy(&v, src.data() + i * sizeof(T), sizeof(T));
    v = byteswap_value(v);
    std::memcpy(dst.data() + i * sizeof(T), &v, sizeof(T));
  }
}

struct GzCloser {
  void operator()(gzFile_s* f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

}  // namespace

std::size_t bytes_per_voxel(DataType type) {
  switch (type) {
    case DataType::kUInt8:
      return 1;
    case DataType::kInt16:
      return 2;
    case DataType::kInt32:
    case DataType::kFloat32:
      return 4;
  }
  throw UnsupportedTypeError("unsupported NIfTI datatype code " + std::to_string(int(type)), int(type));
}

Grid HeaderInfo::grid() const {
  Grid g;
  g.dims = dims;
  g.spacing = spacing.cast<double>();
  g.affine = affine.cast<double>();
  return g;
}

HeaderInfo make_header(const Grid& grid, DataType type, std::string description) {
  HeaderInfo h;
  h.dims = grid.dims;
  h.datatype = type;
  h.spacing = grid.spacing.cast<float>();
  h.affine = grid.affine.cast<float>();
  h.description = std::move(description);
  return h;
}

bool Image::operator==(const Image& other) const {
  if (!(header == other.header) || voxels.index() != other.voxels.index()) return false;
  const auto a = as_bytes_of(voxels);
  const auto b = as_bytes_of(other.voxels);
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

namespace {

struct ParsedHeader {
  HeaderInfo header;
  bool swap = false;
  std::size_t offset = kVoxOffset;
  std::size_t count = 0;
  std::size_t payload_bytes = 0;
};

ParsedHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) {
    throw FormatError("file too short for a NIfTI-1 header (" + std::to_string(bytes.size()) +
                      " bytes)");
  }
  std::int32_t sizeof_hdr;
  std::memcpy(&sizeof_hdr, bytes.data(), 4);
  bool swap = false;
  if (sizeof_hdr != static_cast<std::int32_t>(kHeaderSize)) {
    if (byteswap_value(sizeof_hdr) != static_cast<std::int32_t>(kHeaderSize)) {
      throw FormatError("not a NIfTI-1 header: sizeof_hdr is " + std::to_string(sizeof_hdr));
    }
    swap = true;
  }
  if (std::memcmp(bytes.data() + field::magic, "n+1\0", 4) != 0) {
    throw FormatError("bad NIfTI-1 magic (expected single-file \"n+1\")");
  }
  const HeaderReader r(bytes, swap);

  HeaderInfo h;
  const std::int16_t ndim = r.get<std::int16_t>(field::dim);
  if (ndim < 1 || ndim > 7) throw FormatError("invalid dim[0] = " + std::to_string(ndim));
  for (int axis = 0; axis < 7; ++axis) {
    const std::int16_t extent = axis < ndim ? r.get<std::int16_t>(field::dim + 2 * (axis + 1)) : 1;
    if (extent < 1) {
      throw FormatError("dimension " + std::to_string(axis) + " is " + std::to_string(extent));
    }
    if (axis < 3) {
      h.dims[axis] = extent;
    } else if (extent != 1) {
      throw FormatError("volumes with more than 3 dimensions are not supported");
    }
  }
  h.datatype = checked_datatype(r.get<std::int16_t>(field::datatype));
  const std::int16_t bitpix = r.get<std::int16_t>(field::bitpix);
  if (bitpix != static_cast<std::int16_t>(8 * bytes_per_voxel(h.datatype))) {
    throw FormatError("bitpix " + std::to_string(bitpix) + " inconsistent with datatype");
  }

  const float qfac_raw = r.get<float>(field::pixdim);
  for (int axis = 0; axis < 3; ++axis) {
    const float pd = r.get<float>(field::pixdim + 4 * (axis + 1));
    if (!(pd > 0.0f) || !std::isfinite(pd)) {
      throw FormatError("non-positive voxel spacing along axis " + std::to_string(axis));
    }
    h.spacing[axis] = pd;
  }
  const float vox_offset = r.get<float>(field::vox_offset);
  if (!(vox_offset >= float(kVoxOffset))) {
    throw FormatError("vox_offset " + std::to_string(vox_offset) + " < 352");
  }
  h.scl_slope = r.get<float>(field::scl_slope);
  h.scl_inter = r.get<float>(field::scl_inter);
  h.description = read_description(bytes);

  const std::int16_t qform_code = r.get<std::int16_t>(field::qform_code);
  const std::int16_t sform_code = r.get<std::int16_t>(field::sform_code);
  if (sform_code > 0) {
    for (int row = 0; row < 3; ++row) {
      for (int c = 0; c < 4; ++c) h.affine(row, c) = r.get<float>(field::srow_x + 16 * row + 4 * c);
    }
  } else if (qform_code > 0) {
    const Eigen::Matrix3d rot = quaternion_rotation(r.get<float>(field::quatern_b),
                                                    r.get<float>(field::quatern_b + 4),
                                                    r.get<float>(field::quatern_b + 8));
    const double qfac = qfac_raw < 0.0f ? -1.0 : 1.0;
    const Eigen::Vector3d scale(h.spacing[0], h.spacing[1], qfac * h.spacing[2]);
    h.affine.leftCols<3>() = (rot * scale.asDiagonal()).cast<float>();
    for (int i = 0; i < 3; ++i) h.affine(i, 3) = r.get<float>(field::qoffset_x + 4 * i);
  } else {
    h.affine.setZero();
    h.affine.diagonal() = h.spacing;
  }

  ParsedHeader parsed;
  parsed.count = static_cast<std::size_t>(h.dims[0] * h.dims[1] * h.dims[2]);
  parsed.payload_bytes = parsed.count * bytes_per_voxel(h.datatype);
  parsed.offset = static_cast<std::size_t>(vox_offset);
  parsed.swap = swap;
  parsed.header = std::move(h);
  return parsed;
}

SizeMismatchError truncated(std::size_t expected, std::size_t actual) {
  return SizeMismatchError("truncated voxel payload: expected " + std::to_string(expected) + " bytes, found " +
                               std::to_string(actual),
                           expected, actual);
}

// Fills `image.voxels` with `count` values of the header's type; `fill`
// writes raw file bytes into the buffer and returns how many it wrote.
template <typename Fill>
void load_payload(Image& image, const ParsedHeader& parsed, Fill&& fill) {
  auto load = [&]<typename T>(std::type_identity<T>) {
    std::vector<T> values(parsed.count);
    const std::size_t got = fill(reinterpret_cast<std::uint8_t*>(values.data()), parsed.payload_bytes);
    if (got < parsed.payload_bytes) throw truncated(parsed.payload_bytes, got);
    if (parsed.swap && sizeof(T) > 1) {
      for (auto& v : values) v = byteswap_value(v);
    }
    image.voxels = std::move(values);
  };
  switch (parsed.header.datatype) {
    case DataType::kUInt8:
      load(std::type_identity<std::uint8_t>{});
      break;
    case DataType::kInt16:
      load(std::type_identity<std::int16_t>{});
      break;
    case DataType::kInt32:
      load(std::type_identity<std::int32_t>{});
      break;
    case DataType::kFloat32:
      load(std::type_identity<float>{});
      break;
  }
  image.header = parsed.header;
}

}  // namespace

Image parse_image(std::span<const std::uint8_t> bytes) {
  const ParsedHeader parsed = parse_header(bytes);
  const std::size_t available = bytes.size() > parsed.offset ? bytes.size() - parsed.offset : 0;
  Image image;
  load_payload(image, parsed, [&](std::uint8_t* dst, std::size_t n) {
    const std::size_t take = std::min(n, available);
    if (take > 0) std::memcpy(dst, bytes.data() + parsed.offset, take);
    return available;
  });
  return image;
}

std::vector<std::uint8_t> encode_image(const Image& image) {
  const auto header = encode_header(image);
  std::span<const std::uint8_t> payload = as_bytes_of(image.voxels);
  std::vector<std::uint8_t> swapped;
  if (!host_is_little() && bytes_per_voxel(image.header.datatype) > 1) {
    if (bytes_per_voxel(image.header.datatype) == 2) {
      swap_copy<std::uint16_t>(payload, swapped);
    } else {
      swap_copy<std::uint32_t>(payload, swapped);
    }
    payload = swapped;
  }
  std::vector<std::uint8_t> bytes(header.size() + payload.size());
  std::copy(header.begin(), header.end(), bytes.begin());
  if (!payload.empty()) std::memcpy(bytes.data() + header.size(), payload.data(), payload.size());
  return bytes;
}

Image read_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError("cannot open " + path.string() + ": no such file");
  }
  // gzread passes uncompressed files through unchanged.
  GzHandle file(gzopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  gzbuffer(file.get(), 1 << 18);
  auto read_into = [&](std::uint8_t* dst, std::size_t n) {
    constexpr std::size_t kChunk = std::size_t{1} << 30;
    std::size_t used = 0;
    while (used < n) {
      const auto want = static_cast<unsigned>(std::min(kChunk, n - used));
      const int got = gzread(file.get(), dst + used, want);
      if (got < 0) {
        int errnum = 0;
        throw FormatError("cannot decode " + path.string() + ": " + gzerror(file.get(), &errnum));
      }
      used += static_cast<std::size_t>(got);
      if (static_cast<unsigned>(got) < want) break;
    }
    return used;
  };
  try {
    std::vector<std::uint8_t> head(kVoxOffset);
    head.resize(read_into(head.data(), head.size()));
    const ParsedHeader parsed = parse_header(head);
    // Extensions between the header and the payload are skipped.
    std::vector<std::uint8_t> skip(parsed.offset - std::min(parsed.offset, head.size()));
    if (read_into(skip.data(), skip.size()) < skip.size()) throw truncated(parsed.payload_bytes, 0);
    Image image;
    load_payload(image, parsed, read_into);
    return image;
  } catch (const SizeMismatchError& e) {
    throw SizeMismatchError(path.string() + ": " + e.what(), e.expected(), e.actual());
  } catch (const UnsupportedTypeError& e) {
    throw UnsupportedTypeError(path.string() + ": " + e.what(), e.code());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_image(const Image& image, const std::filesystem::path& path, bool compress) {
  const auto header = encode_header(image);
  std::span<const std::uint8_t> payload = as_bytes_of(image.voxels);
  std::vector<std::uint8_t> swapped;
  if (!host_is_little() && bytes_per_voxel(image.header.datatype) > 1) {
    if (bytes_per_voxel(image.header.datatype) == 2) {
      swap_copy<std::uint16_t>(payload, swapped);
    } else {
      swap_copy<std::uint32_t>(payload, swapped);
    }
    payload = swapped;
  }

  if (compress) {
    GzHandle file(gzopen(path.c_str(), "wb6"));
    if (!file) throw IoError("cannot write " + path.string());
    gzbuffer(file.get(), 1 << 17);
    auto put = [&](std::span<const std::uint8_t> chunk) {
      constexpr std::size_t kChunk = std::size_t{1} << 26;
      for (std::size_t at = 0; at < chunk.size(); at += kChunk) {
        const auto n = static_cast<unsigned>(std::min(kChunk, chunk.size() - at));
        if (gzwrite(file.get(), chunk.data() + at, n) != static_cast<int>(n)) {
          throw IoError("write failed for " + path.string());
        }
      }
    };
    put(header);
    put(payload);
    if (gzclose(file.release()) != Z_OK) throw IoError("write failed for " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(header.data()), std::streamsize(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(payload.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

bool wants_gzip(const std::filesystem::path& path) { return path.extension() == ".gz"; }

namespace {

template <typename Target>
Target checked_cast(double value) {
  if constexpr (std::is_floating_point_v<Target>) {
    return static_cast<Target>(value);
  } else {
    if (value != std::floor(value) || value < double(std::numeric_limits<Target>::min()) ||
        value > double(std::numeric_limits<Target>::max())) {
      throw ValidationError("voxel value " + std::to_string(value) +
                            " not representable in the requested integer type");
    }
    return static_cast<Target>(value);
  }
}

}  // namespace

template <typename Scalar>
Volume<Scalar> to_volume(const Image& image) {
  const HeaderInfo& h = image.header;
  const bool scaled = h.scl_slope != 0.0f && std::isfinite(h.scl_slope) &&
                      !(h.scl_slope == 1.0f && h.scl_inter == 0.0f);
  const double slope = h.scl_slope;
  const double inter = h.scl_inter;
  std::vector<Scalar> out;
  std::visit(
      [&](const auto& values) {
        using Stored = typename std::decay_t<decltype(values)>::value_type;
        out.resize(values.size());
        if constexpr (std::is_same_v<Stored, Scalar>) {
          if (!scaled) {
            std::copy(values.begin(), values.end(), out.begin());
            return;
          }
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
          const double v = scaled ? double(values[i]) * slope + inter : double(values[i]);
          out[i] = checked_cast<Scalar>(v);
        }
      },
      image.voxels);
  return Volume<Scalar>(h.grid(), std::move(out));
}

template Volume<std::uint8_t> to_volume<std::uint8_t>(const Image&);
template Volume<std::int16_t> to_volume<std::int16_t>(const Image&);
template Volume<std::int32_t> to_volume<std::int32_t>(const Image&);
template Volume<float> to_volume<float>(const Image&);

}  // namespace nodemetry::nifti
