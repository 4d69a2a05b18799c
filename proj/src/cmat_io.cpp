#include "mmv/cmat_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace mmv {

namespace {

constexpr const char* kMagic = "CMAT1";

void put_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string encode_cmat(const ComplexMatrix& m) {
  std::string out = std::string(kMagic) + " " + std::to_string(m.rows()) + " " +
                    std::to_string(m.cols()) + "\n";
  out.reserve(out.size() + 16 * m.size());
  for (double v : m.re_plane()) put_le(out, v);
  for (double v : m.im_plane()) put_le(out, v);
  return out;
}

ComplexMatrix decode_cmat(const std::string& bytes) {
  const auto eol = bytes.find('\n');
  if (eol == std::string::npos) {
    throw LoadError(LoadError::Kind::kMalformedHeader, "cmat: missing header line");
  }
  std::istringstream header(bytes.substr(0, eol));
  std::string magic;
  long long rows = -1, cols = -1;
  header >> magic >> rows >> cols;
  std::string extra;
  if (!header || magic != kMagic || rows < 0 || cols < 0 || (header >> extra)) {
    throw LoadError(LoadError::Kind::kMalformedHeader,
                    "cmat: malformed header '" + bytes.substr(0, eol) + "'");
  }
  if (rows == 0 || cols == 0) {
    throw LoadError(LoadError::Kind::kEmpty, "cmat: empty matrix " + std::to_string(rows) +
                                                 "x" + std::to_string(cols));
  }
  const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  const std::size_t expected = 16 * count;
  const std::size_t found = bytes.size() - eol - 1;
  if (found < expected) {
    throw LoadError(LoadError::Kind::kTruncated,
                    "cmat: truncated payload, expected " + std::to_string(expected) +
                        " bytes, found " + std::to_string(found));
  }
  if (found > expected) {
    throw LoadError(LoadError::Kind::kTrailingBytes,
                    "cmat: " + std::to_string(found - expected) + " trailing bytes");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + eol + 1);
  std::vector<double> re(count), im(count);
  for (std::size_t i = 0; i < count; ++i) re[i] = get_le(p + 8 * i);
  for (std::size_t i = 0; i < count; ++i) im[i] = get_le(p + 8 * (count + i));
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(re[i]) || !std::isfinite(im[i])) {
      throw LoadError(LoadError::Kind::kNonFinite,
                      "cmat: non-finite entry at flat index " + std::to_string(i));
    }
  }
  return ComplexMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                       std::move(re), std::move(im));
}

void export_matrix(const ComplexMatrix& m, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw WriteError("cannot open '" + path.string() + "' for writing");
  const std::string bytes = encode_cmat(m);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw WriteError("write to '" + path.string() + "' failed");
}

ComplexMatrix import_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError(LoadError::Kind::kOpen, "cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_cmat(bytes);
}

std::vector<double> import_real_vector(const std::filesystem::path& path) {
  ComplexMatrix m = import_matrix(path);
  if (m.cols() != 1) {
    throw LoadError(LoadError::Kind::kMalformedHeader,
                    "expected an N x 1 vector in '" + path.string() + "'");
  }
  for (double v : m.im_plane()) {
    if (v != 0.0) {
      throw LoadError(LoadError::Kind::kMalformedHeader,
                      "expected a real vector in '" + path.string() + "'");
    }
  }
  auto re = m.re_plane();
  return {re.begin(), re.end()};
}

void export_real_vector(const std::vector<double>& v, const std::filesystem::path& path) {
  export_matrix(ComplexMatrix(v.size(), 1, v, std::vector<double>(v.size(), 0.0)), path);
}

}  // namespace mmv
