#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace testsupport {

// Euclidean projection onto the convex hull of permutations of (1, 2, ..., n),
// implemented as an active-set QP and certified a posteriori against every
// facet, so it is an independent cross-check for the fast implementation.
//
// In the ascending sorted frame only the prefix facets
//   sum_{j < s} v_j >= s (s + 1) / 2,   s = 1..n-1,
// plus the total-sum equality can bind, and their indicator normals form a
// chain, so the KKT Gram matrix (min of prefix lengths) is always
// nonsingular. Rather than assume the frame reduction, the final solution is
// verified against all 2^n - 2 subset lower bounds before being returned:
// the prefix polyhedron contains the permutahedron, so a prefix-optimal
// point that satisfies every subset bound is the projection.
inline std::vector<double> project_onto_permutahedron(const std::vector<double>& z) {
  const std::size_t n = z.size();
  if (n == 0) throw std::invalid_argument("project_onto_permutahedron: empty input");
  if (n > 16) throw std::invalid_argument("project_onto_permutahedron: n too large");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
  std::vector<double> zs(n);
  for (std::size_t j = 0; j < n; ++j) zs[j] = z[idx[j]];

  auto bound_for = [](std::size_t s) { return 0.5 * static_cast<double>(s) * (s + 1); };

  // Active prefix lengths; active[0] = n is the total-sum equality and is
  // never dropped.
  std::vector<std::size_t> active{n};
  std::vector<double> mu(zs);
  std::vector<double> lambda;

  // Stationarity: mu = zs + sum_r lambda_r * 1_{prefix(active[r])}.
  auto solve_kkt = [&]() {
    const std::size_t m = active.size();
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c)
        a[r][c] = static_cast<double>(std::min(active[r], active[c]));
      double prefix = 0.0;
      for (std::size_t j = 0; j < active[r]; ++j) prefix += zs[j];
      a[r][m] = bound_for(active[r]) - prefix;
    }
    for (std::size_t col = 0; col < m; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m; ++r)
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      if (std::abs(a[piv][col]) < 1e-12)
        throw std::runtime_error("project_onto_permutahedron: singular KKT system");
      std::swap(a[col], a[piv]);
      for (std::size_t r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
      }
    }
    lambda.assign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) lambda[r] = a[r][m] / a[r][r];
    mu = zs;
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t j = 0; j < active[r]; ++j) mu[j] += lambda[r];
  };

  const double kTol = 1e-10;
  bool done = false;
  for (int iter = 0; iter < 1000 && !done; ++iter) {
    solve_kkt();

    // Drop the active prefix bound with the most negative multiplier, if any.
    std::size_t drop = 0;
    double worst_lambda = -kTol;
    for (std::size_t r = 1; r < active.size(); ++r) {
      if (lambda[r] < worst_lambda) {
        worst_lambda = lambda[r];
        drop = r;
      }
    }
    if (drop != 0) {
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
      continue;
    }

    // Multipliers admissible: add the most violated prefix bound.
    std::size_t add = 0;
    double worst_gap = -kTol;
    double prefix = 0.0;
    for (std::size_t s = 1; s < n; ++s) {
      prefix += mu[s - 1];
      const double gap = prefix - bound_for(s);
      if (gap < worst_gap &&
          std::find(active.begin(), active.end(), s) == active.end()) {
        worst_gap = gap;
        add = s;
      }
    }
    if (add == 0) {
      done = true;
    } else {
      active.push_back(add);
    }
  }
  if (!done) throw std::runtime_error("project_onto_permutahedron: iteration cap reached");

  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[idx[j]] = mu[j];

  // Certify against the full facet description.
  const double kFeasTol = 1e-8;
  const std::uint32_t full = (1u << n) - 1u;
  double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (std::abs(total - bound_for(n)) > kFeasTol)
    throw std::runtime_error("project_onto_permutahedron: sum constraint violated");
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    double s = 0.0;
    int size = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        s += out[i];
        ++size;
      }
    if (s < bound_for(static_cast<std::size_t>(size)) - kFeasTol)
      throw std::runtime_error("project_onto_permutahedron: subset bound violated");
  }
  return out;
}

}  // namespace testsupport
