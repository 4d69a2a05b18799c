#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmv/complex_matrix.hpp"

namespace mmv {

// `.cmat` layout: ASCII header line "CMAT1 <rows> <cols>\n", then rows·cols
// little-endian binary64 values for the real plane (row-major) followed by the
// imaginary plane.

class LoadError : public std::runtime_error {
 public:
  enum class Kind { kOpen, kMalformedHeader, kEmpty, kTruncated, kTrailingBytes, kNonFinite };

  LoadError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class WriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode_cmat(const ComplexMatrix& m);
ComplexMatrix decode_cmat(const std::string& bytes);

void export_matrix(const ComplexMatrix& m, const std::filesystem::path& path);
ComplexMatrix import_matrix(const std::filesystem::path& path);

/// Real N×1 vector stored as a `.cmat` with zero imaginary plane (priors ε(n)).
std::vector<double> import_real_vector(const std::filesystem::path& path);
void export_real_vector(const std::vector<double>& v, const std::filesystem::path& path);

}  // namespace mmv
