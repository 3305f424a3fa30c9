#pragma once

// Dense complex matrices and LU factorization with partial pivoting.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace loopscope::linalg {

using Complex = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t n) : n_(n), data_(n * n) {}

  static ComplexMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
  std::span<Complex> row(std::size_t r) { return {data_.data() + r * n_, n_}; }
  std::span<const Complex> row(std::size_t r) const { return {data_.data() + r * n_, n_}; }

  // Largest absolute entry.
  double max_abs() const;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Complex> data_;
};

std::vector<Complex> multiply(const ComplexMatrix& a, std::span<const Complex> x);
double norm_inf(std::span<const Complex> v);
double residual_inf(const ComplexMatrix& a, std::span<const Complex> x, std::span<const Complex> b);

class LuFactorization {
 public:
  // Throws SingularSystemError naming `unknown_names[k]` when column k has no
  // usable pivot.
  explicit LuFactorization(ComplexMatrix a, std::span<const std::string> unknown_names = {});

  std::size_t size() const noexcept { return lu_.size(); }
  void solve_in_place(std::span<Complex> b) const;
  std::vector<Complex> solve(std::span<const Complex> b) const;

  // Solve with the unit vector e_k.
  std::vector<Complex> solve_unit(std::size_t k) const;

 private:
  ComplexMatrix lu_;
  std::vector<std::size_t> perm_;
};

}  // namespace loopscope::linalg
