#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace chernres {

using cplx = std::complex<double>;

// Highest derivative order a jet can carry.
inline constexpr int kMaxJetOrder = 6;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a field is asked for more derivatives than it can supply.
class OrderExhausted : public Error {
 public:
  using Error::Error;
};

// Raised at points where a map drops rank.
class SingularPoint : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// A point of chart x simplex: z_1..z_n and t_1..t_p.
struct Point {
  std::vector<cplx> z;
  std::vector<double> t;
};

// Coefficient storage of a jet; short jets stay inline to avoid heap traffic.
class JetCoeffs {
 public:
  static constexpr std::size_t kInline = 16;

  JetCoeffs() = default;
  JetCoeffs(const JetCoeffs& o) { assign(o.begin(), o.end()); }
  JetCoeffs(JetCoeffs&& o) noexcept : heap_(std::move(o.heap_)), size_(o.size_) {
    if (heap_.empty()) std::copy(o.small_.begin(), o.small_.begin() + static_cast<std::ptrdiff_t>(size_), small_.begin());
    o.size_ = 0;
  }
  JetCoeffs& operator=(const JetCoeffs& o) {
    if (this != &o) assign(o.begin(), o.end());
    return *this;
  }
  JetCoeffs& operator=(JetCoeffs&& o) noexcept {
    if (this == &o) return *this;
    heap_ = std::move(o.heap_);
    size_ = o.size_;
    if (heap_.empty()) std::copy(o.small_.begin(), o.small_.begin() + static_cast<std::ptrdiff_t>(size_), small_.begin());
    o.heap_.clear();
    o.size_ = 0;
    return *this;
  }

  void assign(std::size_t n, cplx v) {
    size_ = n;
    if (n <= kInline) {
      heap_.clear();
      std::fill(small_.begin(), small_.begin() + static_cast<std::ptrdiff_t>(n), v);
    } else {
      heap_.assign(n, v);
    }
  }
  void assign(const cplx* first, const cplx* last) {
    const auto n = static_cast<std::size_t>(last - first);
    if (n <= kInline) {
      std::copy(first, last, small_.begin());
      heap_.clear();
    } else {
      heap_.assign(first, last);
    }
    size_ = n;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  cplx* data() { return heap_.empty() ? small_.data() : heap_.data(); }
  const cplx* data() const { return heap_.empty() ? small_.data() : heap_.data(); }
  cplx* begin() { return data(); }
  cplx* end() { return data() + size_; }
  const cplx* begin() const { return data(); }
  const cplx* end() const { return data() + size_; }
  cplx& operator[](std::size_t k) { return data()[k]; }
  const cplx& operator[](std::size_t k) const { return data()[k]; }

 private:
  std::array<cplx, kInline> small_;
  std::vector<cplx> heap_;
  std::size_t size_ = 0;
};

// Monomial tables for jets in the Wirtinger variables z_1..z_n, zbar_1..zbar_n
// and the simplex variables t_1..t_p. Monomials are graded by total degree, so
// truncating to a lower order keeps a prefix of the coefficient vector.
class JetSpace {
 public:
  struct MulEntry {
    std::uint32_t a, b, c;
  };

  static const JetSpace& get(int n, int p);

  int chart_dim() const { return n_; }
  int simplex_dim() const { return p_; }
  int nvars() const { return 2 * n_ + p_; }

  std::size_t size(int order) const { return prefix_[static_cast<std::size_t>(order)]; }
  int degree(std::size_t k) const { return degree_[k]; }
  const std::uint8_t* exponents(std::size_t k) const { return &exps_[k * static_cast<std::size_t>(nvars())]; }
  // Index of a monomial, or npos when its degree exceeds kMaxJetOrder.
  std::size_t index(const std::vector<int>& e) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const std::vector<MulEntry>& mul_table() const { return mul_; }
  std::size_t mul_count(int order) const { return mul_prefix_[static_cast<std::size_t>(order)]; }

  // For variable v and monomial k of degree < kMaxJetOrder: index of k + e_v.
  std::uint32_t raise(int v, std::size_t k) const { return raise_[static_cast<std::size_t>(v)][k]; }
  std::size_t conj_index(std::size_t k) const { return conj_[k]; }

 private:
  JetSpace(int n, int p);

  int n_, p_;
  std::vector<std::size_t> prefix_;
  std::vector<int> degree_;
  std::vector<std::uint8_t> exps_;
  std::vector<MulEntry> mul_;
  std::vector<std::size_t> mul_prefix_;
  std::vector<std::vector<std::uint32_t>> raise_;
  std::vector<std::size_t> conj_;
  std::vector<std::uint64_t> keys_;  // sorted packed exponents
  std::vector<std::uint32_t> key_index_;
};

// Truncated Taylor expansion of a complex function in the variables of a
// JetSpace. Coefficient k multiplies the monomial k of the shifted variables,
// so derivatives are coefficient times the factorial of the exponents.
class Jet {
 public:
  Jet() = default;
  Jet(const JetSpace& sp, int order);

  static Jet constant(const JetSpace& sp, int order, cplx value);
  // Variable index v in [0, 2n+p): z_i -> i, zbar_i -> n+i, t_j -> 2n+j.
  static Jet variable(const JetSpace& sp, int order, int v, cplx value);

  const JetSpace& space() const { return *sp_; }
  bool valid() const { return sp_ != nullptr; }
  int order() const { return order_; }
  cplx value() const { return c_.empty() ? cplx{} : c_[0]; }
  const JetCoeffs& coeffs() const { return c_; }
  JetCoeffs& coeffs() { return c_; }

  // Partial derivative of arbitrary multi-index (exponent vector of length nvars).
  cplx partial(const std::vector<int>& multi) const;

  Jet truncated(int order) const;
  Jet derivative(int v) const;
  Jet conj() const;
  // Drop all dependence on the t variables, moving to the space (n, 0).
  Jet restrict_to_chart() const;
  // Re-embed a chart jet into the space (n, p) with no t dependence.
  Jet lift_to(const JetSpace& sp) const;
  bool is_zero(double tol = 0.0) const;
  double max_abs() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(cplx s);
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(cplx s, Jet a) { return a *= s; }

  // g(f) where g_m = g^(m)(f(0)) / m! for m = 0..order.
  Jet compose(const std::vector<cplx>& g) const;

 private:
  const JetSpace* sp_ = nullptr;
  int order_ = 0;
  JetCoeffs c_;
};

Jet recip(const Jet& f);
Jet exp(const Jet& f);
Jet log(const Jet& f);
Jet real_part(const Jet& f);
Jet imag_part(const Jet& f);

}  // namespace chernres
