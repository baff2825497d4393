#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "erb/numeric.hpp"

namespace erb {

// count x n matrix of draws, one sample per row, with seed provenance.
struct SampleMatrix {
  Eigen::MatrixXd values;  // count rows, n columns
  std::uint64_t seed = 0;
  std::string provenance;

  int dimension() const { return static_cast<int>(values.cols()); }
  std::int64_t count() const { return static_cast<std::int64_t>(values.rows()); }
};

namespace detail {
inline constexpr char kSampleMagic[4] = {'E', 'R', 'B', 'S'};
}

// Binary layout: 16-byte header (magic "ERBS", u32 n, u64 count), then
// count*n doubles in column-major order, native endianness.
inline void write_binary(const SampleMatrix& m, std::ostream& os) {
  char header[16] = {};
  std::memcpy(header, detail::kSampleMagic, 4);
  const std::uint32_t n = static_cast<std::uint32_t>(m.dimension());
  const std::uint64_t count = static_cast<std::uint64_t>(m.count());
  std::memcpy(header + 4, &n, 4);
  std::memcpy(header + 8, &count, 8);
  os.write(header, sizeof(header));
  os.write(reinterpret_cast<const char*>(m.values.data()),
           static_cast<std::streamsize>(sizeof(double) * n * count));
}

inline SampleMatrix read_binary(std::istream& is) {
  char header[16] = {};
  is.read(header, sizeof(header));
  if (!is || std::memcmp(header, detail::kSampleMagic, 4) != 0) {
    throw InvalidInput("sample matrix: bad magic in binary header");
  }
  std::uint32_t n = 0;
  std::uint64_t count = 0;
  std::memcpy(&n, header + 4, 4);
  std::memcpy(&count, header + 8, 8);
  SampleMatrix m;
  m.values.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));
  is.read(reinterpret_cast<char*>(m.values.data()),
          static_cast<std::streamsize>(sizeof(double) * n * count));
  if (!is) throw InvalidInput("sample matrix: truncated binary payload");
  return m;
}

inline void write_csv(const SampleMatrix& m, std::ostream& os) {
  char buf[32];
  for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m.values(r, c));
      os << buf << (c + 1 == m.values.cols() ? '\n' : ',');
    }
  }
}

}  // namespace erb
