#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/Sparse>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace jf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;
using MatXi = Eigen::MatrixXi;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatRM = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Maps and candidate-jacobian stacks. A VertexMap is V x d (d = 3, or 2 in UV
// mode). A JacobianStack is 2T x d: rows (2i, 2i+1) hold the transposed
// frame-coordinate jacobian of triangle i, so grad * map yields it directly.
using VertexMap = MatX;
using JacobianStack = MatX;

// Error categories map onto the CLI exit codes.
enum class ErrorKind { Validation = 2, Numeric = 3, Io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exitCode() const { return static_cast<int>(kind_); }

  static Error validation(const std::string& msg) { return Error(ErrorKind::Validation, msg); }
  static Error numeric(const std::string& msg) { return Error(ErrorKind::Numeric, msg); }
  static Error io(const std::string& msg) { return Error(ErrorKind::Io, msg); }

 private:
  ErrorKind kind_;
};

// Deterministic RNG. Distributions are implemented here rather than with
// std:: distribution objects, whose output is implementation-defined; all
// stochastic behavior must replay bit-for-bit from a seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Independent stream for (seed, index) pairs, e.g. one per dataset sample.
  static Rng forStream(uint64_t seed, uint64_t stream);

  uint64_t next() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller, cosine branch only.
  double normal();

  // Uniform integer in [0, n).
  int uniformInt(int n);

  Vec3 unitVector();

  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 gen_;
};

uint64_t splitmix64(uint64_t x);

uint64_t fnv1a64(const void* data, size_t size);
std::string toHex(uint64_t value);

}  // namespace jf
