#include <lyhjko/transport.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lyhjko {

// exact assignment by shortest augmenting paths with dual potentials; the
// potentials satisfy u_i + v_j <= c_ij with equality on matched pairs, which
// makes them optimal Kantorovich duals for the uniform-mass instance
TransportResult lp_oracle(const std::vector<Vec>& mu_atoms,
                          const std::vector<Vec>& nu_atoms, int dim) {
  const int nn = static_cast<int>(mu_atoms.size());
  if (nn == 0 || nu_atoms.size() != mu_atoms.size())
    throw std::invalid_argument("lp_oracle: need equal nonzero cardinalities");
  if (nn > 64) throw std::invalid_argument("lp_oracle: at most 64 atoms");
  if (dim != 1 && dim != 2) throw std::invalid_argument("lp_oracle: dim must be 1 or 2");

  std::vector<std::vector<double>> c(nn, std::vector<double>(nn));
  for (int i = 0; i < nn; ++i)
    for (int j = 0; j < nn; ++j) {
      const double d = torus_dist(mu_atoms[i], nu_atoms[j], dim);
      c[i][j] = 0.5 * d * d;
    }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(nn + 1, 0.0), v(nn + 1, 0.0);
  std::vector<int> p(nn + 1, 0), way(nn + 1, 0);
  for (int i = 1; i <= nn; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(nn + 1, inf);
    std::vector<char> used(nn + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= nn; ++j) {
        if (used[j]) continue;
        const double cur = c[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= nn; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  TransportResult res;
  res.method = "hungarian";
  res.plan = Eigen::MatrixXd::Zero(nn, nn);
  res.psi.resize(nn);
  res.phi.resize(nn);
  double half_cost = 0;
  for (int j = 1; j <= nn; ++j) {
    const int i = p[j];
    res.plan(i - 1, j - 1) = 1.0 / nn;
    half_cost += c[i - 1][j - 1] / nn;
  }
  for (int i = 0; i < nn; ++i) res.psi[i] = u[i + 1];
  for (int j = 0; j < nn; ++j) res.phi[j] = v[j + 1];
  const double gauge = res.psi.mean();
  res.psi -= gauge;
  res.phi += gauge;
  res.w2sq = 2 * half_cost;
  return res;
}

}  // namespace lyhjko
