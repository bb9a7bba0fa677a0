#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <limits>
#include <stdexcept>
#include <string>

namespace fpsi {

// Scalar type used throughout the dense core.
using Scalar = double;
using Index = Eigen::Index;

template <int Rows = Eigen::Dynamic, int Cols = Rows>
using Matrix = Eigen::Matrix<Scalar, Rows, Cols>;

template <int Rows = Eigen::Dynamic>
using Vector = Matrix<Rows, 1>;

using Mat2 = Matrix<2, 2>;
using Vec2 = Vector<2>;
using MatrixX = Matrix<>;
using VectorX = Vector<>;

// Per-node vector fields: one row per node, columns are the x/y components.
using NodeField = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

using SparseMat = Eigen::SparseMatrix<Scalar>;
using Triplet = Eigen::Triplet<Scalar>;

inline constexpr Scalar kInfinity = std::numeric_limits<Scalar>::infinity();

// A point left the container by more than the interpolation tolerance.
class OutOfDomainError : public std::runtime_error {
public:
  OutOfDomainError(const Vec2& p, const std::string& what)
      : std::runtime_error(what), point(p) {}
  Vec2 point;
};

// Gradient requested at a state where the determinant barrier is active.
class InfiniteEnergyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Newton inversion of a flow map failed to converge.
class InversionFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace fpsi
