#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "mlmimo/errors.hpp"

namespace mlmimo {

// Row-major dense storage. Vectors follow the row convention y = z·G.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;
using IntRowVector = Eigen::RowVectorXi;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Relative pivot tolerance below which a matrix is treated as singular.
inline constexpr double kSingularTolerance = 1e-12;

// Returns x with x·A = b (LU with partial pivoting on Aᵀ).
RowVector solve(const Matrix& a, const RowVector& b);

// Inverse via the same LU; throws SingularMatrix.
Matrix inverse(const Matrix& a);

// |det A| computed from the LU pivots.
double abs_determinant(const Matrix& a);

struct QrFactors {
  Matrix q;
  Matrix r;
};

// Householder QR with positive diagonal in R.
QrFactors qr_decompose(const Matrix& a);

// σ_max/σ_min from a cyclic Jacobi eigen-iteration on AᵀA.
double condition_number(const Matrix& a);

// Throws DimensionMismatch / Error when the matrix is not square or has non-finite entries.
void require_square_finite(const Matrix& a, const char* what);

// CSV with header "rows,cols", one row per line, 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// Deterministic pseudo-random stream identified by (seed, stream id).
//
// The engine is std::mt19937_64 seeded through std::seed_seq, both of which have
// sequences fixed by the standard. Uniform and Gaussian variates are derived
// here rather than through <random> distributions, whose outputs vary between
// standard library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [lo, hi], unbiased.
  int uniform_int(int lo, int hi);
  // Standard normal by the Marsaglia polar method.
  double gaussian();

  // Independent child stream; children of equal (seed, stream, child) coincide.
  RngStream derive(std::uint64_t child_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer, used to hash seeds and ids together.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace mlmimo
