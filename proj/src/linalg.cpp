#include "loopscope/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loopscope/error.hpp"

namespace loopscope::linalg {

namespace {

// Pivots at or below this fraction of the largest matrix entry are treated
// as exact zeros. Only structural singularity (floating node with gmin off,
// voltage-source loops) lands here; gmin-sized pivots stay well above it.
constexpr double kPivotFloor = 1e-30;

}  // namespace

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<Complex> multiply(const ComplexMatrix& a, std::span<const Complex> x) {
  std::vector<Complex> y(a.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    auto row = a.row(r);
    Complex acc{};
    for (std::size_t c = 0; c < a.size(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

double norm_inf(std::span<const Complex> v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

double residual_inf(const ComplexMatrix& a, std::span<const Complex> x, std::span<const Complex> b) {
  auto y = multiply(a, x);
  double m = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) m = std::max(m, std::abs(y[i] - b[i]));
  return m;
}

LuFactorization::LuFactorization(ComplexMatrix a, std::span<const std::string> unknown_names)
    : lu_(std::move(a)), perm_(lu_.size()) {
  const std::size_t n = lu_.size();
  std::iota(perm_.begin(), perm_.end(), 0);
  const double floor = lu_.max_abs() * kPivotFloor;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      double v = std::abs(lu_(r, k));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > floor)) {
      std::string name = k < unknown_names.size() ? unknown_names[k] : std::string{};
      throw SingularSystemError(k, std::move(name));
    }
    if (piv != k) {
      std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(piv).begin());
      std::swap(perm_[k], perm_[piv]);
    }
    const Complex inv = 1.0 / lu_(k, k);
    auto pivot_row = lu_.row(k);
    for (std::size_t r = k + 1; r < n; ++r) {
      auto row = lu_.row(r);
      if (row[k] == Complex{}) continue;
      const Complex f = row[k] * inv;
      row[k] = f;
      for (std::size_t c = k + 1; c < n; ++c) row[c] -= f * pivot_row[c];
    }
  }
}

void LuFactorization::solve_in_place(std::span<Complex> b) const {
  const std::size_t n = lu_.size();
  std::vector<Complex> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    auto row = lu_.row(i);
    Complex acc = y[i];
    for (std::size_t c = 0; c < i; ++c) acc -= row[c] * y[c];
    y[i] = acc;
  }
  for (std::size_t i = n; i-- > 0;) {
    auto row = lu_.row(i);
    Complex acc = y[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= row[c] * y[c];
    y[i] = acc / row[i];
  }
  std::copy(y.begin(), y.end(), b.begin());
}

std::vector<Complex> LuFactorization::solve(std::span<const Complex> b) const {
  std::vector<Complex> x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

std::vector<Complex> LuFactorization::solve_unit(std::size_t k) const {
  std::vector<Complex> x(lu_.size());
  x[k] = 1.0;
  solve_in_place(x);
  return x;
}

}  // namespace loopscope::linalg
