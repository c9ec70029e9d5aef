#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "chernres/complexes.hpp"

namespace chernres {

JetMatrix::JetMatrix(std::size_t rows, std::size_t cols, const JetSpace& sp, int order)
    : rows_(rows), cols_(cols), sp_(&sp), order_(order), e_(rows * cols, Jet(sp, order)) {}

JetMatrix JetMatrix::identity(std::size_t r, const JetSpace& sp, int order) {
  JetMatrix m(r, r, sp, order);
  for (std::size_t i = 0; i < r; ++i) m(i, i) = Jet::constant(sp, order, 1.0);
  return m;
}

JetMatrix operator+(const JetMatrix& a, const JetMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error("jet matrix shape mismatch");
  JetMatrix c = a;
  for (std::size_t k = 0; k < c.e_.size(); ++k) c.e_[k] += b.e_[k];
  return c;
}

JetMatrix operator-(const JetMatrix& a, const JetMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error("jet matrix shape mismatch");
  JetMatrix c = a;
  for (std::size_t k = 0; k < c.e_.size(); ++k) c.e_[k] -= b.e_[k];
  return c;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  if (a.cols_ != b.rows_) throw Error("jet matrix product shape mismatch");
  const JetSpace* sp = a.sp_ ? a.sp_ : b.sp_;
  if (!sp) throw Error("jet matrix without a jet space");
  JetMatrix c(a.rows_, b.cols_, *sp, std::min(a.order_, b.order_));
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t j = 0; j < b.cols_; ++j) {
      if (a.cols_ == 0) continue;
      Jet acc = a(i, 0) * b(0, j);
      for (std::size_t k = 1; k < a.cols_; ++k) acc += a(i, k) * b(k, j);
      c(i, j) = std::move(acc);
    }
  return c;
}

JetMatrix operator*(cplx s, JetMatrix a) {
  for (auto& e : a.e_) e *= s;
  return a;
}

JetMatrix JetMatrix::adjoint() const {
  JetMatrix m(cols_, rows_, *sp_, order_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j).conj();
  return m;
}

JetMatrix JetMatrix::inverse() const {
  if (rows_ != cols_) throw Error("inverse of a non-square jet matrix");
  const std::size_t r = rows_;
  if (r == 0) return *this;
  const JetSpace& sp = *sp_;
  int order = order_;
  for (auto& e : e_) order = std::min(order, e.order());
  JetMatrix a = truncated(order);
  JetMatrix inv = identity(r, sp, order);
  double scale = 0.0;
  for (auto& e : a.e_) scale = std::max(scale, std::abs(e.value()));
  for (std::size_t c = 0; c < r; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < r; ++i)
      if (std::abs(a(i, c).value()) > std::abs(a(piv, c).value())) piv = i;
    if (std::abs(a(piv, c).value()) <= 1e-14 * scale || scale == 0.0) throw SingularPoint("matrix is singular at this point");
    if (piv != c)
      for (std::size_t j = 0; j < r; ++j) {
        std::swap(a(c, j), a(piv, j));
        std::swap(inv(c, j), inv(piv, j));
      }
    const Jet pinv = recip(a(c, c));
    for (std::size_t j = 0; j < r; ++j) {
      a(c, j) = a(c, j) * pinv;
      inv(c, j) = inv(c, j) * pinv;
    }
    for (std::size_t i = 0; i < r; ++i) {
      if (i == c) continue;
      const Jet f = a(i, c);
      if (f.is_zero()) continue;
      for (std::size_t j = 0; j < r; ++j) {
        a(i, j) -= f * a(c, j);
        inv(i, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

JetMatrix JetMatrix::truncated(int order) const {
  JetMatrix m = *this;
  for (auto& e : m.e_)
    if (e.order() > order) e = e.truncated(order);
  m.order_ = std::min(order_, order);
  return m;
}

FormMatrix JetMatrix::as_forms(int n, int p) const {
  FormMatrix f(rows_, cols_, n, p);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (!(*this)(i, j).is_zero()) f(i, j) = FormJet::scalar(n, p, (*this)(i, j));
  return f;
}

FormMatrix JetMatrix::d(int n, int p) const {
  FormMatrix f(rows_, cols_, n, p);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) f(i, j) = FormJet::scalar(n, p, (*this)(i, j)).d();
  return f;
}

double JetMatrix::max_abs() const {
  double m = 0.0;
  for (auto& e : e_) m = std::max(m, std::abs(e.value()));
  return m;
}

PolyMatrix PolyMatrix::zero(std::size_t r, std::size_t c, int n) {
  PolyMatrix m;
  m.rows = r;
  m.cols = c;
  m.e.assign(r * c, Polynomial(n));
  return m;
}

PolyMatrix PolyMatrix::identity(std::size_t r, int n) {
  PolyMatrix m = zero(r, r, n);
  for (std::size_t i = 0; i < r; ++i) m.at(i, i) = Polynomial::constant(n, 1.0);
  return m;
}

PolyMatrix PolyMatrix::parse(const std::vector<std::vector<std::string>>& rows, int n) {
  PolyMatrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows[0].size();
  for (auto& row : rows) {
    if (row.size() != m.cols) throw ValidationError("ragged matrix rows");
    for (auto& s : row) m.e.push_back(parse_polynomial(s, n));
  }
  return m;
}

PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.cols != b.rows) throw ValidationError("polynomial matrix product shape mismatch");
  const int n = !a.e.empty() ? a.e[0].dim() : (!b.e.empty() ? b.e[0].dim() : 0);
  PolyMatrix c = PolyMatrix::zero(a.rows, b.cols, n);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      for (std::size_t k = 0; k < a.cols; ++k) c.at(i, j) += a.at(i, k) * b.at(k, j);
  return c;
}

bool PolyMatrix::is_zero() const {
  return std::all_of(e.begin(), e.end(), [](const Polynomial& p) { return p.is_zero(); });
}

bool PolyMatrix::is_holomorphic() const {
  return std::all_of(e.begin(), e.end(), [](const Polynomial& p) { return p.is_holomorphic(); });
}

JetMatrix PolyMatrix::to_jets(const Point& pt, const JetSpace& sp, int order) const {
  JetMatrix m(rows, cols, sp, order);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = at(i, j).to_jet(pt, sp, order);
  return m;
}

std::vector<std::vector<cplx>> PolyMatrix::values(const std::vector<cplx>& z) const {
  std::vector<std::vector<cplx>> v(rows, std::vector<cplx>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) v[i][j] = at(i, j)(z);
  return v;
}

FormPolyMatrix FormPolyMatrix::zero(std::size_t r, int) {
  FormPolyMatrix m;
  m.rows = m.cols = r;
  m.e.assign(r * r, PolyForm{});
  return m;
}

FormPolyMatrix FormPolyMatrix::parse(const std::vector<std::vector<std::string>>& rows, int n) {
  FormPolyMatrix m;
  m.rows = rows.size();
  m.cols = rows.empty() ? 0 : rows[0].size();
  for (auto& row : rows) {
    if (row.size() != m.cols) throw ValidationError("ragged connection matrix rows");
    for (auto& s : row) {
      PolyForm f = parse_poly_form(s, n, 0);
      for (auto& [mask, p] : f)
        if (mask_degree(mask) != 1) throw ValidationError("connection entry \"" + s + "\" is not a 1-form");
      m.e.push_back(std::move(f));
    }
  }
  return m;
}

bool FormPolyMatrix::is_zero() const {
  return std::all_of(e.begin(), e.end(), [](const PolyForm& f) { return f.empty(); });
}

bool FormPolyMatrix::is_10(int n) const {
  for (auto& f : e)
    for (auto& [m, p] : f)
      if (antiholo_part(m, n) || simplex_part(m, n)) return false;
  return true;
}

FormMatrix FormPolyMatrix::eval(const Point& pt, const JetSpace& sp, int order, int n, int p) const {
  FormMatrix out(rows, cols, n, p);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      for (auto& [m, poly] : e[i * cols + j]) out(i, j).add(m, poly.to_jet(pt, sp, order));
  return out;
}

int numeric_rank(const std::vector<std::vector<cplx>>& m, double rel_tol) {
  if (m.empty() || m[0].empty()) return 0;
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m[0].size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[0].size(); ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > rel_tol * s(0)) ++r;
  return r;
}

}  // namespace chernres
