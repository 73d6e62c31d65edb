#pragma once

// Real trigonometric polynomials on the torus with closed-form derivatives
// and certified constants (semi-convexity, Hessian Lipschitz, gradient sup
// norms).  Constants come from dense sampling at 16x the top frequency plus
// a derivative-based covering margin, so they always dominate the true sup.

#include <lyhjko/bounds.hpp>
#include <lyhjko/spectral.hpp>

#include <string>
#include <vector>

namespace lyhjko {

struct TrigTerm {
  int k0 = 0, k1 = 0;      // integer frequency, canonical sign
  double c = 0, s = 0;     // coefficients of cos(2 pi k.x) and sin(2 pi k.x)
};

struct PotentialBounds {
  double lambda = 0;    // D^2 f >= -lambda, lambda >= 0
  double hess_lip = 0;  // Lipschitz constant of the Hessian
  double grad_inf = 0;  // sup |grad f|_inf
  double grad_l2 = 0;   // sup |grad f|_2
  double lip = 0;       // global Lipschitz constant (= grad_l2)
};

class PotentialSpec {
 public:
  explicit PotentialSpec(int dim);

  static PotentialSpec zero(int dim) { return PotentialSpec(dim); }

  // adds a*cos(2 pi k.x) + b*sin(2 pi k.x); k is canonicalized so that the
  // first nonzero component is positive, flipping the sine sign as needed
  void add_term(int k0, int k1, double cos_coef, double sin_coef = 0.0);

  int dim() const { return dim_; }
  bool empty() const;
  int max_freq() const;  // max over terms of |k|_inf
  bool is_even(double tol = 1e-12) const;
  const std::vector<TrigTerm>& terms() const { return terms_; }

  double value(const Vec& x) const;
  Vec grad(const Vec& x) const;
  Eigen::Matrix2d hess(const Vec& x) const;  // 1D fills only (0,0)

  ArrayXd sample(const PeriodicGrid& g) const;
  std::array<ArrayXd, 2> sample_grad(const PeriodicGrid& g) const;

  PotentialBounds certify() const;

  // "cos:k0[,k1]:coef" terms joined by ';', empty string for zero
  std::string serialize() const;
  static PotentialSpec parse(int dim, const std::string& text);

 private:
  int dim_;
  std::vector<TrigTerm> terms_;
};

// assembles the constants driving every bound; W must be even
PotentialConstants make_constants(const PotentialSpec& v, const PotentialSpec& w);

}  // namespace lyhjko
