#include "chernres/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

namespace chernres {

namespace {

std::uint64_t pack(const std::uint8_t* e, int nv) {
  std::uint64_t key = 0;
  for (int i = 0; i < nv; ++i) key = key * (kMaxJetOrder + 1) + e[i];
  return key;
}

void enumerate(int nv, int deg, std::vector<std::uint8_t>& cur, int pos, std::vector<std::uint8_t>& out) {
  if (pos == nv - 1) {
    cur[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(deg);
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int k = deg; k >= 0; --k) {
    cur[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(k);
    enumerate(nv, deg - k, cur, pos + 1, out);
  }
}

}  // namespace

JetSpace::JetSpace(int n, int p) : n_(n), p_(p) {
  const int nv = nvars();
  const auto unv = static_cast<std::size_t>(nv);
  prefix_.assign(kMaxJetOrder + 1, 0);
  if (nv == 0) {
    exps_.clear();
    degree_.push_back(0);
    std::fill(prefix_.begin(), prefix_.end(), 1);
  } else {
    std::vector<std::uint8_t> cur(unv, 0);
    for (int d = 0; d <= kMaxJetOrder; ++d) {
      std::vector<std::uint8_t> block;
      enumerate(nv, d, cur, 0, block);
      const std::size_t count = block.size() / unv;
      exps_.insert(exps_.end(), block.begin(), block.end());
      degree_.insert(degree_.end(), count, d);
      prefix_[static_cast<std::size_t>(d)] = degree_.size();
    }
  }
  const std::size_t total = degree_.size();

  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(total);
  for (std::size_t k = 0; k < total; ++k) keyed[k] = {nv ? pack(exponents(k), nv) : 0, static_cast<std::uint32_t>(k)};
  std::sort(keyed.begin(), keyed.end());
  for (auto& [key, idx] : keyed) {
    keys_.push_back(key);
    key_index_.push_back(idx);
  }

  auto lookup = [&](const std::vector<std::uint8_t>& e) -> std::size_t {
    const std::uint64_t key = nv ? pack(e.data(), nv) : 0;
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    return key_index_[static_cast<std::size_t>(it - keys_.begin())];
  };

  // Multiplication entries grouped by result degree.
  std::vector<std::vector<MulEntry>> by_deg(kMaxJetOrder + 1);
  std::vector<std::uint8_t> sum(unv);
  for (std::size_t a = 0; a < total; ++a) {
    const std::size_t bmax = prefix_[static_cast<std::size_t>(kMaxJetOrder - degree_[a])];
    for (std::size_t b = 0; b < bmax; ++b) {
      const int d = degree_[a] + degree_[b];
      for (std::size_t i = 0; i < unv; ++i) sum[i] = static_cast<std::uint8_t>(exps_[a * unv + i] + exps_[b * unv + i]);
      by_deg[static_cast<std::size_t>(d)].push_back(
          {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(lookup(sum))});
    }
  }
  for (auto& blk : by_deg) {
    mul_.insert(mul_.end(), blk.begin(), blk.end());
    mul_prefix_.push_back(mul_.size());
  }

  raise_.assign(unv, std::vector<std::uint32_t>(prefix_[kMaxJetOrder - 1], 0));
  std::vector<std::uint8_t> e(unv);
  for (std::size_t k = 0; k < prefix_[kMaxJetOrder - 1]; ++k) {
    for (std::size_t v = 0; v < unv; ++v) {
      std::copy(exponents(k), exponents(k) + nv, e.begin());
      ++e[v];
      raise_[v][k] = static_cast<std::uint32_t>(lookup(e));
    }
  }

  conj_.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::copy(exponents(k), exponents(k) + nv, e.begin());
    for (int i = 0; i < n_; ++i) std::swap(e[static_cast<std::size_t>(i)], e[static_cast<std::size_t>(n_ + i)]);
    conj_[k] = lookup(e);
  }
}

const JetSpace& JetSpace::get(int n, int p) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> registry;
  if (n < 0 || p < 0 || 2 * n + p > 12) throw Error("jet space dimensions out of range");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = registry[{n, p}];
  if (!slot) slot.reset(new JetSpace(n, p));
  return *slot;
}

std::size_t JetSpace::index(const std::vector<int>& e) const {
  int d = 0;
  for (int x : e) {
    if (x < 0) return npos;
    d += x;
  }
  if (d > kMaxJetOrder) return npos;
  std::vector<std::uint8_t> u(e.begin(), e.end());
  const std::uint64_t key = nvars() ? pack(u.data(), nvars()) : 0;
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  return key_index_[static_cast<std::size_t>(it - keys_.begin())];
}

Jet::Jet(const JetSpace& sp, int order) : sp_(&sp), order_(order) {
  if (order < 0 || order > kMaxJetOrder) throw OrderExhausted("jet order " + std::to_string(order) + " outside supported range");
  c_.assign(sp.size(order), cplx{});
}

Jet Jet::constant(const JetSpace& sp, int order, cplx value) {
  Jet j(sp, order);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(const JetSpace& sp, int order, int v, cplx value) {
  Jet j(sp, order);
  j.c_[0] = value;
  if (order >= 1) j.c_[1 + static_cast<std::size_t>(v)] = 1.0;
  return j;
}

cplx Jet::partial(const std::vector<int>& multi) const {
  const std::size_t k = sp_->index(multi);
  if (k == JetSpace::npos || k >= c_.size()) throw OrderExhausted("partial beyond jet order");
  double fact = 1.0;
  for (int m : multi)
    for (int i = 2; i <= m; ++i) fact *= i;
  return c_[k] * fact;
}

Jet Jet::truncated(int order) const {
  if (order > order_) throw OrderExhausted("cannot raise jet order by truncation");
  Jet j;
  j.sp_ = sp_;
  j.order_ = order;
  j.c_.assign(c_.begin(), c_.begin() + sp_->size(order));
  return j;
}

Jet Jet::derivative(int v) const {
  if (order_ == 0) throw OrderExhausted("derivative of an order-0 jet");
  Jet j(*sp_, order_ - 1);
  for (std::size_t k = 0; k < j.c_.size(); ++k) {
    const std::uint32_t up = sp_->raise(v, k);
    j.c_[k] = c_[up] * static_cast<double>(sp_->exponents(up)[v]);
  }
  return j;
}

Jet Jet::conj() const {
  Jet j(*sp_, order_);
  for (std::size_t k = 0; k < c_.size(); ++k) j.c_[sp_->conj_index(k)] = std::conj(c_[k]);
  return j;
}

Jet Jet::restrict_to_chart() const {
  const int n = sp_->chart_dim();
  const JetSpace& target = JetSpace::get(n, 0);
  if (sp_->simplex_dim() == 0) return *this;
  Jet j(target, order_);
  std::vector<int> e(static_cast<std::size_t>(2 * n));
  for (std::size_t k = 0; k < j.c_.size(); ++k) {
    const std::uint8_t* ex = target.exponents(k);
    std::vector<int> full(static_cast<std::size_t>(sp_->nvars()), 0);
    for (int i = 0; i < 2 * n; ++i) full[static_cast<std::size_t>(i)] = ex[i];
    j.c_[k] = c_[sp_->index(full)];
  }
  return j;
}

Jet Jet::lift_to(const JetSpace& sp) const {
  if (&sp == sp_) return *this;
  if (sp_->simplex_dim() != 0 || sp.chart_dim() != sp_->chart_dim()) throw Error("lift_to expects a chart jet");
  Jet j(sp, order_);
  for (std::size_t k = 0; k < c_.size(); ++k) {
    const std::uint8_t* ex = sp_->exponents(k);
    std::vector<int> full(static_cast<std::size_t>(sp.nvars()), 0);
    for (int i = 0; i < sp_->nvars(); ++i) full[static_cast<std::size_t>(i)] = ex[i];
    j.c_[sp.index(full)] = c_[k];
  }
  return j;
}

bool Jet::is_zero(double tol) const {
  return std::all_of(c_.begin(), c_.end(), [tol](cplx v) { return std::abs(v) <= tol; });
}

double Jet::max_abs() const {
  double m = 0.0;
  for (auto v : c_) m = std::max(m, std::abs(v));
  return m;
}

Jet& Jet::operator+=(const Jet& o) {
  if (!sp_) return *this = o;
  if (!o.sp_) return *this;
  if (sp_ != o.sp_) throw Error("jet sum across different jet spaces");
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (!o.sp_) return *this;
  if (!sp_) return *this = -o;
  if (sp_ != o.sp_) throw Error("jet difference across different jet spaces");
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet j = *this;
  for (auto& v : j.c_) v = -v;
  return j;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.sp_ != b.sp_) throw Error("jet product across different jet spaces");
  const int r = std::min(a.order_, b.order_);
  Jet out(*a.sp_, r);
  const auto& tab = a.sp_->mul_table();
  const std::size_t m = a.sp_->mul_count(r);
  const cplx* pa = a.c_.data();
  const cplx* pb = b.c_.data();
  cplx* pc = out.c_.data();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& e = tab[i];
    pc[e.c] += pa[e.a] * pb[e.b];
  }
  return out;
}

Jet Jet::compose(const std::vector<cplx>& g) const {
  Jet delta = *this;
  delta.c_[0] = 0.0;
  Jet r = constant(*sp_, order_, g[static_cast<std::size_t>(order_)]);
  for (int m = order_ - 1; m >= 0; --m) {
    r = r * delta;
    r.c_[0] += g[static_cast<std::size_t>(m)];
  }
  return r;
}

Jet recip(const Jet& f) {
  const cplx c0 = f.value();
  if (c0 == cplx{}) throw SingularPoint("reciprocal of a jet with zero value");
  std::vector<cplx> g(static_cast<std::size_t>(f.order()) + 1);
  cplx p = 1.0 / c0;
  for (int m = 0; m <= f.order(); ++m) {
    g[static_cast<std::size_t>(m)] = (m % 2 ? -1.0 : 1.0) * p;
    p /= c0;
  }
  return f.compose(g);
}

Jet exp(const Jet& f) {
  std::vector<cplx> g(static_cast<std::size_t>(f.order()) + 1);
  cplx e = std::exp(f.value());
  double fact = 1.0;
  for (int m = 0; m <= f.order(); ++m) {
    if (m > 0) fact *= m;
    g[static_cast<std::size_t>(m)] = e / fact;
  }
  return f.compose(g);
}

Jet log(const Jet& f) {
  const cplx c0 = f.value();
  if (c0 == cplx{}) throw SingularPoint("logarithm of a jet with zero value");
  std::vector<cplx> g(static_cast<std::size_t>(f.order()) + 1);
  g[0] = std::log(c0);
  cplx p = 1.0;
  for (int m = 1; m <= f.order(); ++m) {
    p /= c0;
    g[static_cast<std::size_t>(m)] = (m % 2 ? 1.0 : -1.0) * p / static_cast<double>(m);
  }
  return f.compose(g);
}

Jet real_part(const Jet& f) { return (f + f.conj()) * cplx(0.5); }

Jet imag_part(const Jet& f) { return (f - f.conj()) * cplx(0.0, -0.5); }

}  // namespace chernres
