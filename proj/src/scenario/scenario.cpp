#include "chernres/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace chernres {

using ojson = nlohmann::ordered_json;

namespace {

std::string join_problems(const std::vector<std::string>& p) {
  std::string s = "invalid scenario:";
  for (auto& x : p) s += "\n  - " + x;
  return s;
}

// Strict view of a JSON object: every key must be consumed or declared.
class Reader {
 public:
  Reader(const ojson& j, std::string path, std::vector<std::string>& errs) : j_(j), path_(std::move(path)), errs_(errs) {
    if (!j_.is_object()) fail("expected an object");
  }
  ~Reader() {
    if (!j_.is_object()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) errs_.push_back(at(it.key()) + ": unknown key");
  }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.is_object() && j_.contains(k);
  }
  const ojson* get(const std::string& k) {
    if (!has(k)) return nullptr;
    return &j_.at(k);
  }
  std::string at(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  void fail(const std::string& msg) { errs_.push_back((path_.empty() ? std::string("scenario") : path_) + ": " + msg); }
  void fail(const std::string& k, const std::string& msg) { errs_.push_back(at(k) + ": " + msg); }

  double number(const std::string& k, double def) {
    const ojson* v = get(k);
    if (!v) return def;
    if (!v->is_number()) {
      fail(k, "expected a number");
      return def;
    }
    return v->get<double>();
  }
  int integer(const std::string& k, int def) {
    const ojson* v = get(k);
    if (!v) return def;
    if (!v->is_number_integer()) {
      fail(k, "expected an integer");
      return def;
    }
    return v->get<int>();
  }
  bool boolean(const std::string& k, bool def) {
    const ojson* v = get(k);
    if (!v) return def;
    if (!v->is_boolean()) {
      fail(k, "expected true or false");
      return def;
    }
    return v->get<bool>();
  }
  std::string string(const std::string& k, const std::string& def) {
    const ojson* v = get(k);
    if (!v) return def;
    if (!v->is_string()) {
      fail(k, "expected a string");
      return def;
    }
    return v->get<std::string>();
  }
  std::vector<std::string>& errors() { return errs_; }
  const std::string& path() const { return path_; }

 private:
  const ojson& j_;
  std::string path_;
  std::vector<std::string>& errs_;
  std::set<std::string> seen_;
};

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

bool read_complex(const ojson& j, const std::string& path, std::vector<std::string>& errs, cplx& out) {
  if (j.is_number()) {
    out = j.get<double>();
    return true;
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    out = {j[0].get<double>(), j[1].get<double>()};
    return true;
  }
  errs.push_back(path + ": expected a number or [re, im]");
  return false;
}

ojson complex_json(cplx c) { return c.imag() == 0.0 ? ojson(c.real()) : ojson::array({c.real(), c.imag()}); }

std::vector<cplx> read_point(const ojson* j, const std::string& path, int n, std::vector<std::string>& errs) {
  std::vector<cplx> z(static_cast<std::size_t>(n), 0.0);
  if (!j) return z;
  if (!j->is_array() || static_cast<int>(j->size()) != n) {
    errs.push_back(path + ": expected " + std::to_string(n) + " complex coordinates");
    return z;
  }
  for (std::size_t i = 0; i < j->size(); ++i) read_complex((*j)[i], idx(path, i), errs, z[i]);
  return z;
}

ojson point_json(const std::vector<cplx>& z) {
  ojson a = ojson::array();
  for (cplx c : z) a.push_back(complex_json(c));
  return a;
}

std::vector<double> read_reals(const ojson& j, const std::string& path, std::size_t len, std::vector<std::string>& errs) {
  std::vector<double> v;
  if (!j.is_array() || (len && j.size() != len)) {
    errs.push_back(path + ": expected " + (len ? std::to_string(len) + " numbers" : std::string("a list of numbers")));
    return std::vector<double>(len, 0.0);
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      errs.push_back(idx(path, i) + ": expected a number");
      v.push_back(0.0);
    } else {
      v.push_back(j[i].get<double>());
    }
  }
  return v;
}

Box read_box(const ojson& j, const std::string& path, int n, std::vector<std::string>& errs) {
  Reader r(j, path, errs);
  Box b = Box::square(n, 1.0);
  if (!j.is_object()) return b;
  if (r.has("half_width")) {
    const double h = r.number("half_width", 1.0);
    if (!(h > 0.0)) r.fail("half_width", "must be positive");
    if (r.has("lo") || r.has("hi")) r.fail("give either half_width or lo/hi");
    return Box::square(n, h);
  }
  const ojson* lo = r.get("lo");
  const ojson* hi = r.get("hi");
  if (!lo || !hi) {
    r.fail("needs lo and hi (2n real bounds each) or half_width");
    return b;
  }
  b.lo = read_reals(*lo, r.at("lo"), static_cast<std::size_t>(2 * n), errs);
  b.hi = read_reals(*hi, r.at("hi"), static_cast<std::size_t>(2 * n), errs);
  for (std::size_t k = 0; k < b.lo.size() && k < b.hi.size(); ++k)
    if (!(b.lo[k] < b.hi[k])) {
      r.fail("empty along axis " + std::to_string(k));
      break;
    }
  return b;
}

ojson box_json(const Box& b) {
  ojson o;
  o["lo"] = b.lo;
  o["hi"] = b.hi;
  return o;
}

using StringMatrix = std::vector<std::vector<std::string>>;

bool read_string_matrix(const ojson& j, const std::string& path, std::vector<std::string>& errs, StringMatrix& out) {
  out.clear();
  if (!j.is_array() || j.empty()) {
    errs.push_back(path + ": expected a non-empty list of rows");
    return false;
  }
  std::size_t cols = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].empty()) {
      errs.push_back(idx(path, i) + ": expected a non-empty row of strings");
      return false;
    }
    if (i && j[i].size() != cols) {
      errs.push_back(idx(path, i) + ": rows differ in length");
      return false;
    }
    cols = j[i].size();
    std::vector<std::string> row;
    for (std::size_t k = 0; k < j[i].size(); ++k) {
      if (j[i][k].is_string())
        row.push_back(j[i][k].get<std::string>());
      else if (j[i][k].is_number())
        row.push_back(j[i][k].dump());
      else {
        errs.push_back(idx(idx(path, i), k) + ": expected a polynomial string");
        return false;
      }
    }
    out.push_back(std::move(row));
  }
  return true;
}

// Parses a matrix of polynomials; holomorphic entries only when required.
std::optional<PolyMatrix> poly_matrix(const ojson& j, const std::string& path, int n, bool holomorphic, std::vector<std::string>& errs,
                                      StringMatrix& text) {
  if (!read_string_matrix(j, path, errs, text)) return std::nullopt;
  PolyMatrix m = PolyMatrix::zero(text.size(), text[0].size(), n);
  bool ok = true;
  for (std::size_t i = 0; i < text.size(); ++i)
    for (std::size_t k = 0; k < text[i].size(); ++k) {
      const std::string where = idx(idx(path, i), k);
      try {
        m.at(i, k) = parse_polynomial(text[i][k], n);
        if (holomorphic && !m.at(i, k).is_holomorphic()) {
          errs.push_back(where + ": '" + text[i][k] + "' uses conjugates; maps must be holomorphic");
          ok = false;
        }
      } catch (const Error& e) {
        errs.push_back(where + ": " + e.what());
        ok = false;
      }
    }
  if (!ok) return std::nullopt;
  return m;
}

std::optional<FormPolyMatrix> form_matrix(const ojson& j, const std::string& path, int n, std::vector<std::string>& errs, StringMatrix& text) {
  if (!read_string_matrix(j, path, errs, text)) return std::nullopt;
  if (text.size() != text[0].size()) {
    errs.push_back(path + ": connection matrices must be square");
    return std::nullopt;
  }
  FormPolyMatrix m{text.size(), text.size(), {}};
  for (std::size_t i = 0; i < text.size(); ++i)
    for (std::size_t k = 0; k < text[i].size(); ++k) {
      try {
        const PolyForm f = parse_poly_form(text[i][k], n, 0);
        for (auto& [mask, p] : f)
          if (mask_degree(mask) != 1) throw ValidationError("connection entries must be 1-forms");
        m.e.push_back(f);
      } catch (const Error& e) {
        errs.push_back(idx(idx(path, i), k) + ": " + e.what());
        return std::nullopt;
      }
    }
  return m;
}

// Complex data of one chart: ranks and maps (or vector fields), metrics,
// connections.
struct ChartSpec {
  BundleComplex complex;
  ConnectionFamily connections;
  bool has_connections = false;
  ojson canonical;
  bool ok = false;
};

ChartSpec read_chart(const ojson& j, const std::string& path, int n, bool foliation, const std::vector<std::vector<Polynomial>>* fields,
                     const std::vector<std::vector<std::string>>* field_text, std::vector<std::string>& errs) {
  ChartSpec out;
  Reader r(j, path, errs);
  if (!j.is_object()) return out;
  const std::size_t before = errs.size();
  std::vector<int> ranks;
  std::vector<PolyMatrix> maps;
  ojson canon = ojson::object();
  if (fields) {
    if (r.has("ranks") || r.has("maps")) r.fail("ranks and maps come from vector_fields in this scenario");
    ranks = {n, static_cast<int>(fields->size())};
    PolyMatrix m = PolyMatrix::zero(static_cast<std::size_t>(n), fields->size(), n);
    for (std::size_t c = 0; c < fields->size(); ++c)
      for (int i = 0; i < n; ++i) m.at(static_cast<std::size_t>(i), c) = (*fields)[c][static_cast<std::size_t>(i)];
    maps.push_back(m);
    (void)field_text;
  } else {
    const ojson* rk = r.get("ranks");
    const ojson* mp = r.get("maps");
    if (!rk || !mp) {
      r.fail("needs ranks and maps");
      return out;
    }
    if (!rk->is_array() || rk->size() < 2) {
      r.fail("ranks", "expected at least two ranks r_0, r_1, ...");
      return out;
    }
    for (std::size_t i = 0; i < rk->size(); ++i) {
      if (!(*rk)[i].is_number_integer() || (*rk)[i].get<int>() < 0) {
        errs.push_back(idx(r.at("ranks"), i) + ": expected a non-negative integer");
        return out;
      }
      ranks.push_back((*rk)[i].get<int>());
    }
    canon["ranks"] = ranks;
    if (!mp->is_array() || mp->size() + 1 != ranks.size()) {
      r.fail("maps", "expected one matrix per map phi_1..phi_N");
      return out;
    }
    ojson mc = ojson::array();
    for (std::size_t k = 0; k < mp->size(); ++k) {
      StringMatrix text;
      auto m = poly_matrix((*mp)[k], idx(r.at("maps"), k), n, true, errs, text);
      if (!m) continue;
      maps.push_back(*m);
      mc.push_back(text);
    }
    canon["maps"] = mc;
  }
  std::vector<PolyMatrix> metrics;
  if (const ojson* mt = r.get("metrics")) {
    if (!mt->is_array() || mt->size() != ranks.size()) {
      r.fail("metrics", "expected one hermitian matrix per level");
    } else {
      ojson mc = ojson::array();
      for (std::size_t k = 0; k < mt->size(); ++k) {
        StringMatrix text;
        auto m = poly_matrix((*mt)[k], idx(r.at("metrics"), k), n, false, errs, text);
        if (m) metrics.push_back(*m);
        mc.push_back(text);
      }
      canon["metrics"] = mc;
    }
  }
  const bool torsion_free = r.boolean("torsion_free", false);
  if (r.has("connections")) {
    const ojson& cj = *r.get("connections");
    std::vector<FormPolyMatrix> th;
    if (!cj.is_array() || cj.size() != ranks.size()) {
      r.fail("connections", "expected one connection matrix per level");
    } else {
      ojson cc = ojson::array();
      for (std::size_t k = 0; k < cj.size(); ++k) {
        StringMatrix text;
        auto m = form_matrix(cj[k], idx(r.at("connections"), k), n, errs, text);
        if (!m) continue;
        if (static_cast<int>(m->rows) != ranks[k]) errs.push_back(idx(r.at("connections"), k) + ": size does not match the rank");
        if (!m->is_10(n)) errs.push_back(idx(r.at("connections"), k) + ": connections must be of type (1,0)");
        th.push_back(*m);
        cc.push_back(text);
      }
      canon["connections"] = cc;
      out.connections = ConnectionFamily(th, torsion_free);
      out.has_connections = true;
    }
  }
  canon["torsion_free"] = torsion_free;
  if (errs.size() != before) return out;
  try {
    out.complex = BundleComplex(n, ranks, maps, metrics, foliation);
    out.complex.validate();
  } catch (const Error& e) {
    errs.push_back(path + ": " + e.what());
    return out;
  }
  if (foliation) {
    if (ranks[0] != n) errs.push_back(path + ": foliation mode needs E_0 = TM, rank " + std::to_string(n) + " at level 0");
    if (out.has_connections && !out.connections.theta(0).is_zero() && !torsion_free)
      errs.push_back(path + ": foliation mode needs a torsion-free D_0; mark the level-0 connection with torsion_free = true");
  }
  if (!out.has_connections) out.connections = ConnectionFamily::trivial(out.complex);
  out.canonical = canon;
  out.ok = errs.size() == before;
  return out;
}

CutoffKind read_cutoff(const std::string& name, Reader& r) {
  try {
    return parse_cutoff(name);
  } catch (const Error& e) {
    r.fail("cutoff", e.what());
    return CutoffKind::ExpStep;
  }
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems) : ValidationError(join_problems(problems)), problems_(std::move(problems)) {}

Polynomial translate(const Polynomial& p, const std::vector<cplx>& c) {
  const int n = p.dim();
  Polynomial out(n);
  for (auto& [e, coef] : p.terms()) {
    Polynomial t = Polynomial::constant(n, coef);
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (e[ui]) t = t * (Polynomial::z(n, i) + Polynomial::constant(n, c[ui])).pow(e[ui]);
      if (e[ui + static_cast<std::size_t>(n)])
        t = t * (Polynomial::zbar(n, i) + Polynomial::constant(n, std::conj(c[ui]))).pow(e[ui + static_cast<std::size_t>(n)]);
    }
    out += t;
  }
  return out;
}

Scenario parse_scenario(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError({std::string("syntax: ") + e.what()});
  }
  std::vector<std::string> errs;
  Scenario s;
  ojson canon = ojson::object();
  {
    Reader top(doc, "", errs);
    if (!doc.is_object()) throw ScenarioError(errs);
    const int version = top.integer("version", -1);
    if (version != kScenarioVersion)
      top.fail("version", "unsupported version " + std::to_string(version) + "; expected " + std::to_string(kScenarioVersion));
    canon["version"] = kScenarioVersion;
    s.name = top.string("name", "scenario");
    s.description = top.string("description", "");
    canon["name"] = s.name;
    if (!s.description.empty()) canon["description"] = s.description;
    s.n = top.integer("n", 0);
    if (s.n < 1 || s.n > 3) {
      top.fail("n", "dimension must be 1, 2 or 3");
      throw ScenarioError(errs);
    }
    const int n = s.n;
    canon["n"] = n;
    Box domain = Box::square(n, 1.0);
    if (const ojson* d = top.get("domain")) domain = read_box(*d, "domain", n, errs);
    canon["domain"] = box_json(domain);

    const std::string mode = top.string("mode", "sheaf");
    if (mode == "sheaf")
      s.mode = TildeKind::Sheaf;
    else if (mode == "foliation")
      s.mode = TildeKind::Foliation;
    else
      top.fail("mode", "expected sheaf or foliation");
    canon["mode"] = mode;
    const bool foliation = s.mode == TildeKind::Foliation;

    // Cover.
    Cover cover = Cover::single(n, domain);
    s.max_nerve_dim = 2;
    if (const ojson* c = top.get("cover")) {
      Reader cr(*c, "cover", errs);
      std::vector<Box> boxes;
      if (const ojson* b = cr.get("boxes")) {
        if (!b->is_array() || b->empty())
          cr.fail("boxes", "expected a non-empty list of boxes");
        else
          for (std::size_t i = 0; i < b->size(); ++i) boxes.push_back(read_box((*b)[i], idx("cover.boxes", i), n, errs));
      } else {
        cr.fail("needs boxes");
      }
      const double plateau = cr.number("plateau", 0.15);
      s.max_nerve_dim = cr.integer("max_nerve_dim", 2);
      if (!(plateau > 0.0)) cr.fail("plateau", "must be positive");
      if (s.max_nerve_dim < 0) cr.fail("max_nerve_dim", "must be non-negative");
      ojson cc;
      cc["boxes"] = ojson::array();
      for (auto& b : boxes) cc["boxes"].push_back(box_json(b));
      cc["plateau"] = plateau;
      cc["max_nerve_dim"] = s.max_nerve_dim;
      canon["cover"] = cc;
      if (!boxes.empty() && plateau > 0.0) {
        try {
          cover = Cover(n, boxes, domain, plateau);
          cover.validate();
        } catch (const Error& e) {
          cr.fail(e.what());
        }
      }
    }

    // Vector fields (foliation shorthand for E_1 -> TM).
    std::vector<std::vector<std::string>> field_text;
    if (const ojson* vf = top.get("vector_fields")) {
      if (!foliation) top.fail("vector_fields", "only allowed in foliation mode");
      if (!vf->is_array() || vf->empty()) {
        top.fail("vector_fields", "expected a list of vector fields");
      } else {
        for (std::size_t k = 0; k < vf->size(); ++k) {
          const ojson& f = (*vf)[k];
          const std::string where = idx("vector_fields", k);
          if (!f.is_array() || static_cast<int>(f.size()) != n) {
            errs.push_back(where + ": expected " + std::to_string(n) + " component strings");
            continue;
          }
          std::vector<Polynomial> comps;
          std::vector<std::string> texts;
          for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string ci = idx(where, i);
            if (!f[i].is_string()) {
              errs.push_back(ci + ": expected a polynomial string");
              continue;
            }
            texts.push_back(f[i].get<std::string>());
            try {
              Polynomial p = parse_polynomial(texts.back(), n);
              if (!p.is_holomorphic()) errs.push_back(ci + ": '" + texts.back() + "' uses conjugates; vector fields must be holomorphic");
              comps.push_back(std::move(p));
            } catch (const Error& e) {
              errs.push_back(ci + ": " + e.what());
            }
          }
          if (static_cast<int>(comps.size()) == n) s.vector_fields.push_back(std::move(comps));
          field_text.push_back(std::move(texts));
        }
      }
      canon["vector_fields"] = field_text;
    }
    const bool from_fields = !s.vector_fields.empty() && static_cast<std::size_t>(s.vector_fields.size()) == field_text.size();

    // Complexes: one global complex, or one per chart with isomorphisms.
    std::vector<ChartSpec> charts;
    const bool has_complex = top.has("complex"), has_charts = top.has("charts");
    if (has_complex && has_charts) top.fail("give either complex or charts, not both");
    if (has_complex || (!has_charts && from_fields)) {
      static const ojson empty = ojson::object();
      const ojson& cj = has_complex ? *top.get("complex") : empty;
      ChartSpec c = read_chart(cj, "complex", n, foliation, from_fields ? &s.vector_fields : nullptr, &field_text, errs);
      if (c.ok) {
        charts.push_back(c);
        canon["complex"] = c.canonical;
      }
    } else if (has_charts) {
      const ojson& cj = *top.get("charts");
      if (!cj.is_array() || static_cast<int>(cj.size()) != cover.size()) {
        top.fail("charts", "expected one complex per cover box (" + std::to_string(cover.size()) + ")");
      } else {
        ojson cc = ojson::array();
        for (std::size_t a = 0; a < cj.size(); ++a) {
          ChartSpec c = read_chart(cj[a], idx("charts", a), n, foliation, from_fields ? &s.vector_fields : nullptr, &field_text, errs);
          charts.push_back(c);
          cc.push_back(c.canonical);
        }
        canon["charts"] = cc;
      }
    } else {
      top.fail("needs complex, charts or vector_fields");
    }

    std::vector<EdgeIso> edges;
    if (const ojson* iso = top.get("isomorphisms")) {
      if (!has_charts) top.fail("isomorphisms", "only used with per-chart complexes");
      if (!iso->is_array()) {
        top.fail("isomorphisms", "expected a list");
      } else {
        ojson ic = ojson::array();
        for (std::size_t k = 0; k < iso->size(); ++k) {
          const std::string where = idx("isomorphisms", k);
          Reader ir((*iso)[k], where, errs);
          EdgeIso e;
          e.alpha = ir.integer("alpha", -1);
          e.beta = ir.integer("beta", -1);
          if (e.alpha < 0 || e.alpha >= cover.size() || e.beta < 0 || e.beta >= cover.size() || e.alpha == e.beta)
            ir.fail("alpha and beta must be distinct chart indices");
          ojson ec;
          ec["alpha"] = e.alpha;
          ec["beta"] = e.beta;
          ec["maps"] = ojson::array();
          if (const ojson* m = ir.get("maps")) {
            if (!m->is_array()) ir.fail("maps", "expected one matrix per level");
            else
              for (std::size_t l = 0; l < m->size(); ++l) {
                StringMatrix text;
                auto g = poly_matrix((*m)[l], idx(ir.at("maps"), l), n, true, errs, text);
                if (g) e.g.push_back(*g);
                ec["maps"].push_back(text);
              }
          } else {
            ir.fail("needs maps");
          }
          edges.push_back(e);
          ic.push_back(ec);
        }
        canon["isomorphisms"] = ic;
      }
    }

    // Phi.
    if (const ojson* ph = top.get("phi")) {
      if (!ph->is_array() || ph->empty()) top.fail("phi", "expected a list of symmetric polynomials such as \"e1\" or \"e1^2 - 2*e2\"");
      else
        for (std::size_t k = 0; k < ph->size(); ++k) {
          if (!(*ph)[k].is_string()) {
            errs.push_back(idx("phi", k) + ": expected a string");
            continue;
          }
          try {
            s.phi.push_back(SymmetricPolynomial::parse((*ph)[k].get<std::string>()));
            s.phi_text.push_back((*ph)[k].get<std::string>());
          } catch (const Error& e) {
            errs.push_back(idx("phi", k) + ": " + e.what());
          }
        }
    } else {
      top.fail("needs phi");
    }
    canon["phi"] = s.phi_text;

    // Regulator.
    RegulatorSettings reg;
    std::vector<RegulatorSection> sections;
    Cover reg_cover;
    s.options.ladder = EpsLadder::geometric();
    s.options.chi_check = true;
    double threshold = 1e-8;
    ojson rc = ojson::object();
    if (const ojson* rj = top.get("regulator")) {
      Reader rr(*rj, "regulator", errs);
      reg.kind = read_cutoff(rr.string("cutoff", "exp"), rr);
      reg.tau0 = rr.number("tau0", reg.tau0);
      reg.tau1 = rr.number("tau1", reg.tau1);
      threshold = rr.number("threshold", threshold);
      s.options.chi_check = rr.boolean("chi_check", true);
      if (const ojson* l = rr.get("ladder")) {
        if (l->is_array()) {
          s.options.ladder.eps = read_reals(*l, "regulator.ladder", 0, errs);
        } else {
          Reader lr(*l, "regulator.ladder", errs);
          const double first = lr.number("first", 1e-1), last = lr.number("last", 1e-3), ratio = lr.number("ratio", std::sqrt(10.0));
          if (!(first > 0.0 && last > 0.0 && last < first && ratio > 1.0)) lr.fail("needs 0 < last < first and ratio > 1");
          else s.options.ladder = EpsLadder::geometric(first, last, ratio);
        }
      }
      if (const ojson* c = rr.get("cover")) {
        Reader cr(*c, "regulator.cover", errs);
        std::vector<Box> boxes;
        if (const ojson* b = cr.get("boxes"))
          for (std::size_t i = 0; b->is_array() && i < b->size(); ++i) boxes.push_back(read_box((*b)[i], idx("regulator.cover.boxes", i), n, errs));
        const double plateau = cr.number("plateau", 0.15);
        if (boxes.empty()) cr.fail("needs boxes");
        else {
          try {
            reg_cover = Cover(n, boxes, domain, plateau);
            reg_cover.validate();
          } catch (const Error& e) {
            cr.fail(e.what());
          }
          ojson cc;
          cc["boxes"] = ojson::array();
          for (auto& b : boxes) cc["boxes"].push_back(box_json(b));
          cc["plateau"] = plateau;
          rc["cover"] = cc;
        }
      }
      if (const ojson* sj = rr.get("sections")) {
        if (!sj->is_array()) rr.fail("sections", "expected one list of section strings per regulator chart");
        else {
          ojson sc = ojson::array();
          for (std::size_t k = 0; k < sj->size(); ++k) {
            std::vector<Polynomial> polys;
            std::vector<std::string> texts;
            const ojson& list = (*sj)[k];
            for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
              if (!list[i].is_string()) {
                errs.push_back(idx(idx("regulator.sections", k), i) + ": expected a string");
                continue;
              }
              texts.push_back(list[i].get<std::string>());
              try {
                Polynomial p = parse_polynomial(texts.back(), n);
                if (!p.is_holomorphic()) errs.push_back(idx(idx("regulator.sections", k), i) + ": sections must be holomorphic");
                polys.push_back(std::move(p));
              } catch (const Error& e) {
                errs.push_back(idx(idx("regulator.sections", k), i) + ": " + e.what());
              }
            }
            sections.push_back(RegulatorSection::from(polys, n));
            sc.push_back(texts);
          }
          rc["sections"] = sc;
        }
      }
    }
    try {
      s.options.ladder.validate();
    } catch (const Error& e) {
      errs.push_back(std::string("regulator.ladder: ") + e.what());
    }
    rc["cutoff"] = cutoff_name(reg.kind);
    rc["tau0"] = reg.tau0;
    rc["tau1"] = reg.tau1;
    rc["threshold"] = threshold;
    rc["ladder"] = s.options.ladder.eps;
    rc["chi_check"] = s.options.chi_check;
    canon["regulator"] = rc;

    // Quadrature.
    QuadSettings q = QuadSettings::for_dim(n);
    if (const ojson* qj = top.get("quadrature")) {
      Reader qr(*qj, "quadrature", errs);
      q.nodes = qr.integer("nodes", q.nodes);
      q.initial_cell = qr.number("initial_cell", q.initial_cell);
      q.max_depth = qr.integer("max_depth", q.max_depth);
      q.shell_nodes = qr.number("shell_nodes", q.shell_nodes);
      q.adapt_rounds = qr.integer("adapt_rounds", q.adapt_rounds);
      q.abs_tol = qr.number("abs_tol", q.abs_tol);
      q.skip_vanishing = qr.boolean("skip_vanishing", q.skip_vanishing);
      if (q.nodes < 3 || q.nodes > 12) qr.fail("nodes", "must be between 3 and 12");
      if (!(q.initial_cell > 0.0)) qr.fail("initial_cell", "must be positive");
      if (q.max_depth < 0 || q.max_depth > 16) qr.fail("max_depth", "must be between 0 and 16");
      if (!(q.shell_nodes > 0.0)) qr.fail("shell_nodes", "must be positive");
      if (q.adapt_rounds < 0) qr.fail("adapt_rounds", "must be non-negative");
      if (!(q.abs_tol > 0.0)) qr.fail("abs_tol", "must be positive");
    }
    s.options.quad = q;
    canon["quadrature"] = {{"nodes", q.nodes},         {"initial_cell", q.initial_cell}, {"max_depth", q.max_depth},
                           {"shell_nodes", q.shell_nodes}, {"adapt_rounds", q.adapt_rounds}, {"abs_tol", q.abs_tol},
                           {"skip_vanishing", q.skip_vanishing}};

    // Test forms.
    ojson tc = ojson::array();
    if (const ojson* tj = top.get("tests")) {
      if (!tj->is_array() || tj->empty()) top.fail("tests", "expected a non-empty list of test forms");
      else
        for (std::size_t k = 0; k < tj->size(); ++k) {
          const std::string where = idx("tests", k);
          Reader tr((*tj)[k], where, errs);
          const std::string name = tr.string("name", "test" + std::to_string(k));
          const std::vector<cplx> center = read_point(tr.get("center"), tr.at("center"), n, errs);
          const double radius = tr.number("radius", 0.8), inner = tr.number("inner", 0.5);
          if (!(radius > 0.0)) tr.fail("radius", "must be positive");
          if (!(inner > 0.0 && inner < 1.0)) tr.fail("inner", "must lie in (0, 1)");
          TestForm t = TestForm::bump(n, center, radius > 0.0 ? radius : 1.0, inner > 0.0 && inner < 1.0 ? inner : 0.5);
          ojson c;
          c["name"] = name;
          c["center"] = point_json(center);
          c["radius"] = radius;
          c["inner"] = inner;
          const bool has_slice = tr.has("slice"), has_form = tr.has("form");
          if (has_slice && has_form) tr.fail("give either slice or form");
          if (has_slice) {
            const ojson& sl = *tr.get("slice");
            std::vector<int> coords;
            for (std::size_t i = 0; sl.is_array() && i < sl.size(); ++i) {
              if (!sl[i].is_number_integer() || sl[i].get<int>() < 0 || sl[i].get<int>() >= n)
                errs.push_back(idx(tr.at("slice"), i) + ": expected a coordinate index in [0, n)");
              else
                coords.push_back(sl[i].get<int>());
            }
            if (!sl.is_array()) tr.fail("slice", "expected a list of coordinate indices");
            t = TestForm::slice(n, center, t.bumps[0].radius, coords, t.bumps[0].inner);
            c["slice"] = coords;
          } else if (has_form) {
            const std::string ft = tr.string("form", "");
            try {
              t.form = parse_poly_form(ft, n, 0);
              (void)t.degree(n);
            } catch (const Error& e) {
              tr.fail("form", e.what());
            }
            c["form"] = ft;
          }
          t.name = name;
          const Box supp = Box::square(n, t.bumps[0].radius);
          for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (center[ui].real() - supp.hi[2 * ui] <= domain.lo[2 * ui] || center[ui].real() + supp.hi[2 * ui] >= domain.hi[2 * ui] ||
                center[ui].imag() - supp.hi[2 * ui + 1] <= domain.lo[2 * ui + 1] ||
                center[ui].imag() + supp.hi[2 * ui + 1] >= domain.hi[2 * ui + 1]) {
              tr.fail("support must lie strictly inside the domain");
              break;
            }
          }
          s.tests.push_back(t);
          tc.push_back(c);
        }
    } else {
      top.fail("needs tests");
    }
    canon["tests"] = tc;

    // Declared cycle.
    if (const ojson* cj = top.get("cycle")) {
      CycleSpec cyc;
      ojson cc = ojson::array();
      if (!cj->is_array()) top.fail("cycle", "expected a list of components");
      for (std::size_t k = 0; cj->is_array() && k < cj->size(); ++k) {
        const std::string where = idx("cycle", k);
        Reader cr((*cj)[k], where, errs);
        CycleComponent comp;
        if (const ojson* f = cr.get("fixed"))
          for (std::size_t i = 0; f->is_array() && i < f->size(); ++i) {
            if (!(*f)[i].is_number_integer() || (*f)[i].get<int>() < 0 || (*f)[i].get<int>() >= n)
              errs.push_back(idx(cr.at("fixed"), i) + ": expected a coordinate index in [0, n)");
            else
              comp.fixed.push_back((*f)[i].get<int>());
          }
        if (const ojson* v = cr.get("values"))
          for (std::size_t i = 0; v->is_array() && i < v->size(); ++i) {
            cplx c = 0.0;
            read_complex((*v)[i], idx(cr.at("values"), i), errs, c);
            comp.values.push_back(c);
          }
        comp.multiplicity = cr.integer("multiplicity", 1);
        if (comp.fixed.size() != comp.values.size()) cr.fail("needs one value per fixed coordinate");
        if (comp.multiplicity < 1) cr.fail("multiplicity", "must be positive");
        cc.push_back({{"fixed", comp.fixed}, {"values", point_json(comp.values)}, {"multiplicity", comp.multiplicity}});
        cyc.components.push_back(comp);
      }
      if (foliation) top.fail("cycle", "fundamental cycles apply to sheaf scenarios");
      s.cycle = cyc;
      canon["cycle"] = cc;
    }

    // Components for localization.
    if (const ojson* cj = top.get("components")) {
      ojson cc = ojson::array();
      for (std::size_t k = 0; cj->is_array() && k < cj->size(); ++k) {
        Reader cr((*cj)[k], idx("components", k), errs);
        Bump b{read_point(cr.get("center"), cr.at("center"), n, errs), cr.number("radius", 0.3), cr.number("inner", 0.5)};
        if (!(b.radius > 0.0)) cr.fail("radius", "must be positive");
        if (!(b.inner > 0.0 && b.inner < 1.0)) cr.fail("inner", "must lie in (0, 1)");
        cc.push_back({{"center", point_json(b.center)}, {"radius", b.radius}, {"inner", b.inner}});
        s.components.push_back(b);
      }
      if (!cj->is_array()) top.fail("components", "expected a list of neighborhoods");
      for (std::size_t i = 0; i < s.components.size(); ++i)
        for (std::size_t j = i + 1; j < s.components.size(); ++j) {
          double d2 = 0.0;
          for (int k = 0; k < n; ++k) d2 += std::norm(s.components[i].center[static_cast<std::size_t>(k)] - s.components[j].center[static_cast<std::size_t>(k)]);
          if (std::sqrt(d2) <= s.components[i].radius + s.components[j].radius)
            top.fail("components", "neighborhoods " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
        }
      canon["components"] = cc;
    }

    // Oracle settings.
    if (const ojson* oj = top.get("oracle")) {
      Reader orr(*oj, "oracle", errs);
      s.oracle_radius = orr.number("radius", 0.5);
      if (!(s.oracle_radius > 0.0)) orr.fail("radius", "must be positive");
      if (const ojson* c = orr.get("centers"))
        for (std::size_t k = 0; c->is_array() && k < c->size(); ++k) s.oracle_centers.push_back(read_point(&(*c)[k], idx("oracle.centers", k), n, errs));
      ojson oc;
      oc["radius"] = s.oracle_radius;
      oc["centers"] = ojson::array();
      for (auto& c : s.oracle_centers) oc["centers"].push_back(point_json(c));
      canon["oracle"] = oc;
    }
    if (s.oracle_centers.empty()) s.oracle_centers.push_back(std::vector<cplx>(static_cast<std::size_t>(n), 0.0));

    // Expected values.
    if (const ojson* ej = top.get("expected")) {
      ojson ec = ojson::array();
      for (std::size_t k = 0; ej->is_array() && k < ej->size(); ++k) {
        Reader er((*ej)[k], idx("expected", k), errs);
        ExpectedValue e;
        e.phi = er.string("phi", "");
        e.test = er.string("test", "");
        if (const ojson* v = er.get("value")) read_complex(*v, er.at("value"), errs, e.value);
        else er.fail("needs value");
        e.tolerance = er.number("tolerance", 0.0);
        e.relative = er.boolean("relative", false);
        e.source = er.string("source", "");
        if (!(e.tolerance > 0.0)) er.fail("tolerance", "must be positive");
        if (std::find(s.phi_text.begin(), s.phi_text.end(), e.phi) == s.phi_text.end()) er.fail("phi", "does not name an entry of phi");
        const auto pk = std::find(s.phi_text.begin(), s.phi_text.end(), e.phi);
        const TestForm* tf = nullptr;
        for (auto& t : s.tests)
          if (t.name == e.test) tf = &t;
        if (!tf) er.fail("test", "does not name a test form");
        else if (pk != s.phi_text.end() && tf->degree(n) != 2 * (n - s.phi[static_cast<std::size_t>(pk - s.phi_text.begin())].degree()))
          er.fail("test", "degree of the test form does not complement phi");
        ec.push_back({{"phi", e.phi}, {"test", e.test}, {"value", complex_json(e.value)}, {"tolerance", e.tolerance}, {"relative", e.relative},
                      {"source", e.source}});
        s.expected.push_back(e);
      }
      if (!ej->is_array()) top.fail("expected", "expected a list");
      canon["expected"] = ec;
    }

    if (const ojson* vj = top.get("verify")) {
      Reader vr(*vj, "verify", errs);
      s.verify_samples = vr.integer("samples", s.verify_samples);
      s.verify_seed = static_cast<unsigned>(vr.integer("seed", static_cast<int>(s.verify_seed)));
      if (s.verify_samples < 1) vr.fail("samples", "must be positive");
    }
    canon["verify"] = {{"samples", s.verify_samples}, {"seed", s.verify_seed}};

    // Second set of choices for comparison runs: other metrics or connections
    // on the same complexes.
    const ojson* comp = top.get("comparison");

    if (errs.empty()) {
      s.setup.cover = cover;
      s.setup.kind = s.mode;
      s.setup.regulator = reg;
      s.setup.threshold = threshold;
      s.setup.regulator_cover = reg_cover;
      s.setup.sections = sections;
      std::vector<BundleComplex> cx;
      for (auto& c : charts) {
        cx.push_back(c.complex);
        s.setup.connections.push_back(c.connections);
      }
      if (charts.size() == 1) {
        s.setup.res = SimplicialResolution::global(cx[0], cover.size());
        s.setup.connections.assign(static_cast<std::size_t>(cover.size()), charts[0].connections);
      } else {
        s.setup.res = SimplicialResolution::padded(cx, edges);
      }
      const std::vector<std::string> rerr = s.setup.res.validate(cover);
      for (auto& e : rerr) errs.push_back("resolution: " + e);
      if (rerr.empty()) {
        try {
          s.setup.finalize();
        } catch (const Error& e) {
          errs.push_back(std::string("regulator: ") + e.what());
        }
      }
      if (errs.empty())
        for (std::size_t k = 0; k < s.phi.size(); ++k) {
          try {
            check_degree(s.setup, s.phi[k]);
          } catch (const Error& e) {
            errs.push_back(idx("phi", k) + ": " + e.what());
          }
        }
      if (errs.empty() && comp) {
        if (charts.size() != 1) {
          top.fail("comparison", "only supported with one global complex");
        } else {
          // Same maps, other metrics or connections.
          ojson merged = canon.contains("complex") ? canon["complex"] : ojson::object();
          if (from_fields) {
            merged.erase("ranks");
            merged.erase("maps");
          }
          merged.erase("metrics");
          merged.erase("connections");
          Reader cr(*comp, "comparison", errs);
          for (const char* key : {"metrics", "connections", "torsion_free"})
            if (const ojson* v = cr.get(key)) merged[key] = *v;
          ChartSpec c2 = read_chart(merged, "comparison", n, foliation, from_fields ? &s.vector_fields : nullptr, &field_text, errs);
          if (c2.ok) {
            RegularizedSetup two = s.setup;
            two.res = SimplicialResolution::global(c2.complex, cover.size());
            two.connections.assign(static_cast<std::size_t>(cover.size()), c2.connections);
            s.comparison = two;
            ojson cc = ojson::object();
            for (const char* key : {"metrics", "connections", "torsion_free"})
              if (c2.canonical.contains(key)) cc[key] = c2.canonical[key];
            canon["comparison"] = cc;
          }
        }
      } else if (comp) {
        Reader cr(*comp, "comparison", errs);
        for (const char* key : {"metrics", "connections", "torsion_free"}) (void)cr.has(key);
      }
    }
  }
  if (!errs.empty()) throw ScenarioError(errs);
  s.canonical = canon;
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"cannot open scenario file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

int default_threads() {
  if (const char* e = std::getenv("CHERNRES_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(e, &end, 10);
    if (end && *end == '\0' && v > 0 && v < 1024) return static_cast<int>(v);
  }
  return 0;
}

}  // namespace chernres
