#include <lyhjko/potential.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lyhjko {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

PotentialSpec::PotentialSpec(int dim) : dim_(dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("PotentialSpec: dim must be 1 or 2");
}

void PotentialSpec::add_term(int k0, int k1, double cos_coef, double sin_coef) {
  if (dim_ == 1 && k1 != 0) throw std::invalid_argument("PotentialSpec: 1D term with k1 != 0");
  // canonical orientation: first nonzero frequency component positive
  if (k0 < 0 || (k0 == 0 && k1 < 0)) {
    k0 = -k0;
    k1 = -k1;
    sin_coef = -sin_coef;
  }
  if (k0 == 0 && k1 == 0) sin_coef = 0.0;  // sin(0) contributes nothing
  for (auto& t : terms_) {
    if (t.k0 == k0 && t.k1 == k1) {
      t.c += cos_coef;
      t.s += sin_coef;
      return;
    }
  }
  terms_.push_back({k0, k1, cos_coef, sin_coef});
}

bool PotentialSpec::empty() const {
  for (const auto& t : terms_)
    if (t.c != 0.0 || t.s != 0.0) return false;
  return true;
}

int PotentialSpec::max_freq() const {
  int m = 0;
  for (const auto& t : terms_) m = std::max({m, std::abs(t.k0), std::abs(t.k1)});
  return m;
}

bool PotentialSpec::is_even(double tol) const {
  double scale = 0.0;
  for (const auto& t : terms_) scale = std::max(scale, std::hypot(t.c, t.s));
  for (const auto& t : terms_) {
    if ((t.k0 != 0 || t.k1 != 0) && std::abs(t.s) > tol * std::max(1.0, scale)) return false;
  }
  return true;
}

double PotentialSpec::value(const Vec& x) const {
  double acc = 0.0;
  for (const auto& t : terms_) {
    const double ph = kTwoPi * (t.k0 * x[0] + t.k1 * x[1]);
    acc += t.c * std::cos(ph) + t.s * std::sin(ph);
  }
  return acc;
}

Vec PotentialSpec::grad(const Vec& x) const {
  Vec g = Vec::Zero();
  for (const auto& t : terms_) {
    const double ph = kTwoPi * (t.k0 * x[0] + t.k1 * x[1]);
    const double d = kTwoPi * (-t.c * std::sin(ph) + t.s * std::cos(ph));
    g[0] += d * t.k0;
    g[1] += d * t.k1;
  }
  return g;
}

Eigen::Matrix2d PotentialSpec::hess(const Vec& x) const {
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (const auto& t : terms_) {
    const double ph = kTwoPi * (t.k0 * x[0] + t.k1 * x[1]);
    const double d2 = -kTwoPi * kTwoPi * (t.c * std::cos(ph) + t.s * std::sin(ph));
    h(0, 0) += d2 * t.k0 * t.k0;
    h(0, 1) += d2 * t.k0 * t.k1;
    h(1, 1) += d2 * t.k1 * t.k1;
  }
  h(1, 0) = h(0, 1);
  return h;
}

ArrayXd PotentialSpec::sample(const PeriodicGrid& g) const {
  if (g.dim != dim_) throw std::invalid_argument("PotentialSpec::sample: dim mismatch");
  ArrayXd out(g.size());
  for (long id = 0; id < g.size(); ++id) out[id] = value(g.point(id));
  return out;
}

std::array<ArrayXd, 2> PotentialSpec::sample_grad(const PeriodicGrid& g) const {
  if (g.dim != dim_) throw std::invalid_argument("PotentialSpec::sample_grad: dim mismatch");
  std::array<ArrayXd, 2> out{ArrayXd(g.size()), ArrayXd(g.size())};
  for (long id = 0; id < g.size(); ++id) {
    const Vec gr = grad(g.point(id));
    out[0][id] = gr[0];
    out[1][id] = gr[1];
  }
  return out;
}

namespace {

double min_hess_eig_point(const Eigen::Matrix2d& h, int dim) {
  if (dim == 1) return h(0, 0);
  const double tr = h(0, 0) + h(1, 1);
  const double det_disc = std::hypot(h(0, 0) - h(1, 1), 2.0 * h(0, 1));
  return 0.5 * (tr - det_disc);
}

}  // namespace

PotentialBounds PotentialSpec::certify() const {
  PotentialBounds b;
  if (empty()) return b;
  // polynomial envelopes over all modes, used for the covering margins and
  // for the (third-order) Hessian Lipschitz constant
  double m2 = 0.0, m3 = 0.0;
  for (const auto& t : terms_) {
    const double amp = std::hypot(t.c, t.s);
    const double k2 = std::sqrt(static_cast<double>(t.k0) * t.k0 +
                                static_cast<double>(t.k1) * t.k1);
    const double k1n = std::abs(t.k0) + std::abs(t.k1);
    m2 += amp * kTwoPi * kTwoPi * k2 * k2;
    b.hess_lip += amp * kTwoPi * kTwoPi * kTwoPi * k2 * k2 * k1n;
    m3 += amp * kTwoPi * kTwoPi * kTwoPi * k2 * k2 * k2;
  }
  const int ns = std::max(64, 16 * std::max(1, max_freq()));
  const double h = 1.0 / ns;
  const double cover = 0.5 * h * std::sqrt(static_cast<double>(dim_));
  double min_eig = kInf, sup_inf = 0.0, sup_l2 = 0.0;
  const long total = dim_ == 1 ? ns : static_cast<long>(ns) * ns;
  for (long id = 0; id < total; ++id) {
    Vec x;
    if (dim_ == 1)
      x = Vec(static_cast<double>(id) * h, 0.0);
    else
      x = Vec(static_cast<double>(id / ns) * h, static_cast<double>(id % ns) * h);
    min_eig = std::min(min_eig, min_hess_eig_point(hess(x), dim_));
    const Vec gr = grad(x);
    const double gi = dim_ == 1 ? std::abs(gr[0]) : gr.cwiseAbs().maxCoeff();
    sup_inf = std::max(sup_inf, gi);
    sup_l2 = std::max(sup_l2, dim_ == 1 ? std::abs(gr[0]) : gr.norm());
  }
  b.lambda = std::max(0.0, -(min_eig - m3 * cover));
  b.grad_inf = sup_inf + m2 * cover;
  b.grad_l2 = sup_l2 + m2 * cover;
  b.lip = b.grad_l2;
  return b;
}

std::string PotentialSpec::serialize() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    for (int part = 0; part < 2; ++part) {
      const double coef = part == 0 ? t.c : t.s;
      if (coef == 0.0) continue;
      if (!first) os << ';';
      first = false;
      os << (part == 0 ? "cos:" : "sin:") << t.k0;
      if (dim_ == 2) os << ',' << t.k1;
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", coef);
      os << ':' << buf;
    }
  }
  return os.str();
}

PotentialSpec PotentialSpec::parse(int dim, const std::string& text) {
  PotentialSpec p(dim);
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    // trim spaces
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto z = item.find_last_not_of(" \t");
    item = item.substr(a, z - a + 1);
    if (item.empty()) continue;
    const auto p1 = item.find(':');
    const auto p2 = item.find(':', p1 == std::string::npos ? p1 : p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos)
      throw std::invalid_argument("PotentialSpec::parse: bad term '" + item + "'");
    const std::string kind = item.substr(0, p1);
    if (kind != "cos" && kind != "sin")
      throw std::invalid_argument("PotentialSpec::parse: bad kind '" + kind + "'");
    const std::string freq = item.substr(p1 + 1, p2 - p1 - 1);
    int k0 = 0, k1 = 0;
    const auto comma = freq.find(',');
    try {
      if (comma == std::string::npos) {
        k0 = std::stoi(freq);
      } else {
        k0 = std::stoi(freq.substr(0, comma));
        k1 = std::stoi(freq.substr(comma + 1));
      }
      const double coef = std::stod(item.substr(p2 + 1));
      p.add_term(k0, k1, kind == "cos" ? coef : 0.0, kind == "sin" ? coef : 0.0);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("PotentialSpec::parse: bad number in '" + item + "'");
    }
  }
  return p;
}

PotentialConstants make_constants(const PotentialSpec& v, const PotentialSpec& w) {
  if (!w.is_even()) throw std::invalid_argument("make_constants: interaction kernel must be even");
  const PotentialBounds bv = v.certify(), bw = w.certify();
  PotentialConstants c;
  c.lambda_v = bv.lambda;
  c.lambda_w = bw.lambda;
  c.l_v = bv.hess_lip;
  c.l_w = bw.hess_lip;
  c.grad_v_inf = bv.grad_inf;
  c.grad_w_inf = bw.grad_inf;
  c.grad_v_l2 = bv.grad_l2;
  c.grad_w_l2 = bw.grad_l2;
  c.lip_v = bv.lip;
  c.lip_w = bw.lip;
  return c;
}

}  // namespace lyhjko
