#include "causalbait/matrix.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "causalbait/errors.hpp"

namespace causalbait {

namespace {

template <class T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
Eigen::Map<const RowMajor<T>> view(const BasicMatrix<T>& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

template <class T>
Eigen::Map<RowMajor<T>> view(BasicMatrix<T>& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

template <class T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                     dims(rows, cols));
}

template <class T>
void BasicMatrix<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <class T>
bool BasicMatrix<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <class T>
BasicMatrix<T> matmul(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul " + dims(a.rows(), a.cols()) + " * " + dims(b.rows(), b.cols()));
  BasicMatrix<T> c(a.rows(), b.cols());
  if (a.cols() == 0) return c;
  view(c).noalias() = view(a) * view(b);
  return c;
}

template <class T>
BasicMatrix<T> matmul_tn(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_tn " + dims(a.rows(), a.cols()) + "^T * " + dims(b.rows(), b.cols()));
  BasicMatrix<T> c(a.cols(), b.cols());
  if (a.rows() == 0) return c;
  view(c).noalias() = view(a).transpose() * view(b);
  return c;
}

template <class T>
BasicMatrix<T> matmul_nt(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_nt " + dims(a.rows(), a.cols()) + " * " + dims(b.rows(), b.cols()) + "^T");
  BasicMatrix<T> c(a.rows(), b.rows());
  if (a.cols() == 0) return c;
  view(c).noalias() = view(a) * view(b).transpose();
  return c;
}

template <class T>
BasicMatrix<T> gather_rows(const BasicMatrix<T>& m, const std::vector<std::size_t>& idx) {
  BasicMatrix<T> out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= m.rows()) throw ShapeError("row index out of range");
    std::copy(m.row(idx[i]), m.row(idx[i]) + m.cols(), out.row(i));
  }
  return out;
}

template <class T>
BasicMatrix<T> hconcat(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.rows() != b.rows())
    throw ShapeError("hconcat rows " + std::to_string(a.rows()) + " vs " + std::to_string(b.rows()));
  BasicMatrix<T> out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy(a.row(r), a.row(r) + a.cols(), out.row(r));
    std::copy(b.row(r), b.row(r) + b.cols(), out.row(r) + a.cols());
  }
  return out;
}

#define INSTANTIATE(T)                                                                   \
  template class BasicMatrix<T>;                                                         \
  template BasicMatrix<T> matmul(const BasicMatrix<T>&, const BasicMatrix<T>&);          \
  template BasicMatrix<T> matmul_tn(const BasicMatrix<T>&, const BasicMatrix<T>&);       \
  template BasicMatrix<T> matmul_nt(const BasicMatrix<T>&, const BasicMatrix<T>&);       \
  template BasicMatrix<T> gather_rows(const BasicMatrix<T>&, const std::vector<std::size_t>&); \
  template BasicMatrix<T> hconcat(const BasicMatrix<T>&, const BasicMatrix<T>&);

INSTANTIATE(float)
INSTANTIATE(double)

#undef INSTANTIATE

}  // namespace causalbait
