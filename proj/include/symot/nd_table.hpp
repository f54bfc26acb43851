#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace symot {

// Sentinel for forbidden tuples (e.g. Coulomb tuples with coincident points).
// A finite sentinel rather than -inf so that solvers eliminate columns
// explicitly instead of propagating non-finite arithmetic.
inline constexpr double kNegInf = -1.7976931348623157e308;

inline bool is_neg_inf(double v) { return v <= kNegInf; }

// Dense table over index tuples, row-major.
class NdTable {
 public:
  NdTable() = default;

  explicit NdTable(std::vector<int> dims, double fill = 0.0) : dims_(std::move(dims)) {
    std::size_t total = 1;
    strides_.assign(dims_.size(), 1);
    for (int i = static_cast<int>(dims_.size()) - 1; i >= 0; --i) {
      if (dims_[i] <= 0) throw std::invalid_argument("NdTable: dimensions must be positive");
      strides_[i] = total;
      total *= static_cast<std::size_t>(dims_[i]);
    }
    values_.assign(total, fill);
  }

  // n^order cube, the shape of every cost/plan/Hamiltonian table.
  static NdTable cube(int n, int order, double fill = 0.0) {
    return NdTable(std::vector<int>(static_cast<std::size_t>(order), n), fill);
  }

  int order() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t flat) const { return values_[flat]; }
  double& operator[](std::size_t flat) { return values_[flat]; }

  double at(const std::vector<int>& t) const { return values_[flat_index(t)]; }
  double& at(const std::vector<int>& t) { return values_[flat_index(t)]; }

  std::size_t flat_index(const std::vector<int>& t) const {
    if (t.size() != dims_.size()) throw std::invalid_argument("NdTable: tuple arity mismatch");
    std::size_t f = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] < 0 || t[i] >= dims_[i]) throw std::out_of_range("NdTable: index out of range");
      f += strides_[i] * static_cast<std::size_t>(t[i]);
    }
    return f;
  }

  std::vector<int> unflatten(std::size_t flat) const {
    std::vector<int> t(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      t[i] = static_cast<int>(flat / strides_[i]);
      flat %= strides_[i];
    }
    return t;
  }

  void unflatten_into(std::size_t flat, std::vector<int>& t) const {
    t.resize(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      t[i] = static_cast<int>(flat / strides_[i]);
      flat %= strides_[i];
    }
  }

  const std::vector<double>& data() const { return values_; }
  std::vector<double>& data() { return values_; }

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
};

// Odometer over all index tuples of the given shape.
template <class F>
void for_each_tuple(const std::vector<int>& dims, F&& fn) {
  std::vector<int> t(dims.size(), 0);
  if (dims.empty()) {
    fn(t);
    return;
  }
  for (;;) {
    fn(t);
    int i = static_cast<int>(dims.size()) - 1;
    while (i >= 0 && ++t[static_cast<std::size_t>(i)] == dims[static_cast<std::size_t>(i)]) {
      t[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

// All tuples of length `arity` with entries in [0, n).
template <class F>
void for_each_cube_tuple(int n, int arity, F&& fn) {
  for_each_tuple(std::vector<int>(static_cast<std::size_t>(arity), n), std::forward<F>(fn));
}

}  // namespace symot
