#include "mlmimo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace mlmimo {

namespace {

// In-place LU with partial pivoting; returns the permutation and sign.
struct LuFactors {
  Matrix lu;
  std::vector<int> perm;
  int sign = 1;
};

double max_row_norm(const Matrix& a) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) best = std::max(best, a.row(i).norm());
  return best;
}

LuFactors lu_factor(const Matrix& a, double scale) {
  const Eigen::Index n = a.rows();
  LuFactors f{a, std::vector<int>(static_cast<std::size_t>(n)), 1};
  for (Eigen::Index i = 0; i < n; ++i) f.perm[static_cast<std::size_t>(i)] = static_cast<int>(i);
  const double tol = kSingularTolerance * scale;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    for (Eigen::Index i = k + 1; i < n; ++i)
      if (std::abs(f.lu(i, k)) > std::abs(f.lu(piv, k))) piv = i;
    if (!(std::abs(f.lu(piv, k)) > tol))
      throw SingularMatrix("pivot " + std::to_string(std::abs(f.lu(piv, k))) +
                           " below tolerance at column " + std::to_string(k));
    if (piv != k) {
      f.lu.row(k).swap(f.lu.row(piv));
      std::swap(f.perm[static_cast<std::size_t>(k)], f.perm[static_cast<std::size_t>(piv)]);
      f.sign = -f.sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      f.lu(i, k) /= f.lu(k, k);
      const double l = f.lu(i, k);
      for (Eigen::Index j = k + 1; j < n; ++j) f.lu(i, j) -= l * f.lu(k, j);
    }
  }
  return f;
}

// Solves M·x = rhs for column x given LU of M.
Eigen::VectorXd lu_solve(const LuFactors& f, const Eigen::VectorXd& rhs) {
  const Eigen::Index n = f.lu.rows();
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = rhs(f.perm[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < i; ++j) s -= f.lu(i, j) * x(j);
    x(i) = s;
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = x(i);
    for (Eigen::Index j = i + 1; j < n; ++j) s -= f.lu(i, j) * x(j);
    x(i) = s / f.lu(i, i);
  }
  return x;
}

}  // namespace

void require_square_finite(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw DimensionMismatch(std::string(what) + ": expected a non-empty square matrix, got " +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  if (!a.allFinite()) throw Error(std::string(what) + ": matrix has non-finite entries");
}

RowVector solve(const Matrix& a, const RowVector& b) {
  require_square_finite(a, "solve");
  if (b.size() != a.rows()) throw DimensionMismatch("solve: right-hand side length mismatch");
  // x·A = b  <=>  Aᵀ·xᵀ = bᵀ
  const Matrix at = a.transpose();
  const LuFactors f = lu_factor(at, max_row_norm(a));
  return lu_solve(f, b.transpose()).transpose();
}

Matrix inverse(const Matrix& a) {
  require_square_finite(a, "inverse");
  const LuFactors f = lu_factor(a, max_row_norm(a));
  const Eigen::Index n = a.rows();
  Matrix inv(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(j) = 1.0;
    inv.col(j) = lu_solve(f, e);
  }
  return inv;
}

double abs_determinant(const Matrix& a) {
  require_square_finite(a, "abs_determinant");
  const LuFactors f = lu_factor(a, max_row_norm(a));
  double det = 1.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) det *= f.lu(i, i);
  return std::abs(det);
}

QrFactors qr_decompose(const Matrix& a) {
  require_square_finite(a, "qr_decompose");
  const Eigen::Index n = a.rows();
  Matrix r = a;
  Matrix q = Matrix::Identity(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    Eigen::VectorXd x = r.col(k).tail(n - k);
    const double below = x.tail(n - k - 1).norm();
    if (below == 0.0) continue;
    const double alpha = (x(0) >= 0.0 ? -1.0 : 1.0) * x.norm();
    Eigen::VectorXd v = x;
    v(0) -= alpha;
    v /= v.norm();
    // R <- H R, Q <- Q H with H = I - 2 v vᵀ acting on rows/cols k..n-1
    Eigen::RowVectorXd vr = v.transpose() * r.bottomRows(n - k);
    r.bottomRows(n - k).noalias() -= 2.0 * v * vr;
    Eigen::VectorXd qv = q.rightCols(n - k) * v;
    q.rightCols(n - k).noalias() -= 2.0 * qv * v.transpose();
    r.col(k).tail(n - k - 1).setZero();
  }
  const double tol = kSingularTolerance * max_row_norm(a);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(std::abs(r(i, i)) > tol)) throw SingularMatrix("qr_decompose: matrix is singular");
    if (r(i, i) < 0.0) {
      r.row(i) *= -1.0;
      q.col(i) *= -1.0;
    }
  }
  return {std::move(q), std::move(r)};
}

double condition_number(const Matrix& a) {
  require_square_finite(a, "condition_number");
  // Fails fast on singular input.
  (void)lu_factor(a, max_row_norm(a));

  // One-sided Jacobi: rotating column pairs of A diagonalizes AᵀA implicitly;
  // the column norms converge to the singular values.
  Matrix u = a;
  const Eigen::Index n = u.cols();
  constexpr double kTol = 1e-15;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = u.col(p).squaredNorm();
        const double beta = u.col(q).squaredNorm();
        const double gamma = u.col(p).dot(u.col(q));
        if (std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Eigen::VectorXd up = u.col(p);
        u.col(p) = c * up - s * u.col(q);
        u.col(q) = s * up + c * u.col(q);
      }
    }
    if (!rotated) break;
  }
  double smax = 0.0;
  double smin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = u.col(j).norm();
    smax = std::max(smax, s);
    smin = std::min(smin, s);
  }
  if (!(smin > 0.0)) throw SingularMatrix("condition_number: zero singular value");
  return smax / smin;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << m.rows() << ',' << m.cols() << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": missing header");
  long rows = 0;
  long cols = 0;
  if (std::sscanf(line.c_str(), "%ld,%ld", &rows, &cols) != 2 || rows <= 0 || cols <= 0)
    throw Error(path.string() + ": bad header '" + line + "', expected rows,cols");
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line))
      throw Error(path.string() + ": expected " + std::to_string(rows) + " rows");
    std::stringstream ss(line);
    std::string cell;
    long j = 0;
    while (std::getline(ss, cell, ',')) {
      if (j >= cols) throw Error(path.string() + ": too many columns in row " + std::to_string(i));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw Error(path.string() + ": bad number '" + cell + "'");
      }
      if (!std::isfinite(v)) throw Error(path.string() + ": non-finite entry");
      m(i, j++) = v;
    }
    if (j != cols) throw Error(path.string() + ": row " + std::to_string(i) + " has wrong column count");
  }
  return m;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int RngStream::uniform_int(int lo, int hi) {
  if (hi < lo) throw Error("uniform_int: empty range");
  const std::uint64_t range = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<int>(static_cast<std::int64_t>(lo) + static_cast<std::int64_t>(x % range));
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

RngStream RngStream::derive(std::uint64_t child_id) const {
  return RngStream(mix64(seed_ ^ mix64(stream_id_ + 0x632be59bd9b4e019ULL)), child_id);
}

}  // namespace mlmimo
