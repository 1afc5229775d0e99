#include "bms/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "bms/transition.hpp"

namespace bms {

namespace {

// Gauss rule for the probability measure whose orthonormal polynomials obey
//   b_{k+1} p_{k+1}(x) = (x - a_k) p_k(x) - b_k p_{k-1}(x).
// Nodes come from the Jacobi matrix, are polished by Newton on p_n, and the
// weights are the Christoffel numbers 1 / sum_k p_k(x)^2.
GaussRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag) {
  const Eigen::Index n = diag.size();
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    jacobi(k, k) = diag(k);
    if (k + 1 < n) {
      jacobi(k, k + 1) = offdiag(k);
      jacobi(k + 1, k) = offdiag(k);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  Eigen::VectorXd x = solver.eigenvalues();

  // offdiag has n-1 entries; b_n is only needed for the Newton step on p_n,
  // where it is a constant factor and drops out.
  auto eval = [&](double t, double& pn, double& dpn, double& christoffel) {
    double p_prev = 0.0, p = 1.0;
    double d_prev = 0.0, d = 0.0;
    christoffel = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double b_k = k > 0 ? offdiag(k - 1) : 0.0;
      const double b_next = k + 1 < n ? offdiag(k) : 1.0;
      const double p_next = ((t - diag(k)) * p - b_k * p_prev) / b_next;
      const double d_next = (p + (t - diag(k)) * d - b_k * d_prev) / b_next;
      p_prev = p;
      p = p_next;
      d_prev = d;
      d = d_next;
      if (k + 1 < n) christoffel += p * p;
    }
    pn = p;
    dpn = d;
  };

  GaussRule rule{x, Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = x(i);
    double pn = 0.0, dpn = 0.0, ch = 0.0;
    for (int it = 0; it < 3; ++it) {
      eval(t, pn, dpn, ch);
      if (dpn == 0.0) break;
      const double step = pn / dpn;
      t -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(t))) break;
    }
    eval(t, pn, dpn, ch);
    rule.nodes(i) = t;
    rule.weights(i) = 1.0 / ch;
  }
  rule.weights /= rule.weights.sum();
  return rule;
}

void require_nodes(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidModel, "quadrature needs at least one node");
}

}  // namespace

GaussRule gauss_hermite(int n) {
  require_nodes(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int k = 0; k + 1 < n; ++k) off(k) = std::sqrt(static_cast<double>(k + 1));
  auto rule = golub_welsch(diag, off);
  // Exact symmetry keeps odd moments at zero.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes(n - 1 - i) - rule.nodes(i));
    const double w = 0.5 * (rule.weights(i) + rule.weights(n - 1 - i));
    rule.nodes(i) = -x;
    rule.nodes(n - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  return rule;
}

GaussRule gauss_laguerre(int n) {
  require_nodes(n);
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
  for (int k = 0; k + 1 < n; ++k) off(k) = static_cast<double>(k + 1);
  return golub_welsch(diag, off);
}

namespace {

QuadratureGrid lognormal_grid(const LognormalCopula& ln, int n) {
  QuadratureGrid grid;
  grid.scheme = "gauss-hermite-copula";
  grid.nodes_per_dim = n;
  const double s1 = std::sqrt(ln.sigma1_sq);
  const double s2 = std::sqrt(ln.sigma2_sq);
  const bool fixed1 = ln.sigma1_sq == 0.0;
  const bool fixed2 = ln.sigma2_sq == 0.0;
  const auto gh = gauss_hermite(n);
  const int n1 = fixed1 ? 1 : n;
  const int n2 = fixed2 ? 1 : n;
  // When Theta1 is fixed the latent Z1 integrates out and Z2 is standard normal.
  const double rho = fixed1 ? 0.0 : ln.rho;
  const double resid = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  grid.nodes.reserve(static_cast<std::size_t>(n1) * n2);
  for (int i = 0; i < n1; ++i) {
    const double x1 = fixed1 ? 0.0 : gh.nodes(i);
    const double w1 = fixed1 ? 1.0 : gh.weights(i);
    const double theta1 = fixed1 ? 1.0 : std::exp(s1 * x1 - 0.5 * ln.sigma1_sq);
    for (int j = 0; j < n2; ++j) {
      const double x2 = fixed2 ? 0.0 : gh.nodes(j);
      const double w2 = fixed2 ? 1.0 : gh.weights(j);
      const double z2 = rho * x1 + resid * x2;
      const double theta2 = fixed2 ? 1.0 : std::exp(s2 * z2 - 0.5 * ln.sigma2_sq);
      grid.nodes.push_back({theta1, theta2, w1 * w2});
    }
  }
  return grid;
}

QuadratureGrid mixture_grid(const MixtureExponential& mix, int n) {
  QuadratureGrid grid;
  grid.scheme = "gauss-laguerre-mixture";
  grid.nodes_per_dim = n;
  const auto gl = gauss_laguerre(n);
  const int n2 = mix.theta2_fixed ? 1 : n;
  for (int comp = 0; comp < 2; ++comp) {
    const double cw = mix.weight(comp);
    if (cw <= 0.0) continue;
    const double rate = mix.rate(comp);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n2; ++j) {
        const double theta2 = mix.theta2_fixed ? 1.0 : gl.nodes(j) / rate;
        const double w2 = mix.theta2_fixed ? 1.0 : gl.weights(j);
        grid.nodes.push_back({gl.nodes(i) / rate, theta2, cw * gl.weights(i) * w2});
      }
    }
  }
  return grid;
}

}  // namespace

QuadratureGrid build_grid(const RandomEffectJoint& effects, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidModel, "quadrature needs at least one node per dimension");
  if (std::holds_alternative<Degenerate>(effects)) {
    return QuadratureGrid{{{1.0, 1.0, 1.0}}, "degenerate", 1};
  }
  if (const auto* ln = std::get_if<LognormalCopula>(&effects)) return lognormal_grid(*ln, n);
  if (const auto* mix = std::get_if<MixtureExponential>(&effects)) return mixture_grid(*mix, n);
  throw Error(ErrorCode::UnsupportedEffects, "unknown random effect law");
}

QuadratureGrid build_theta2_marginal_grid(const RandomEffectJoint& effects, int n) {
  if (std::holds_alternative<Degenerate>(effects)) {
    return QuadratureGrid{{{1.0, 1.0, 1.0}}, "degenerate", 1};
  }
  if (const auto* ln = std::get_if<LognormalCopula>(&effects)) {
    return lognormal_grid(LognormalCopula{0.0, 0.0, ln->sigma2_sq}, n);
  }
  if (const auto* mix = std::get_if<MixtureExponential>(&effects)) {
    if (mix->theta2_fixed) return QuadratureGrid{{{1.0, 1.0, 1.0}}, "degenerate", 1};
    QuadratureGrid grid;
    grid.scheme = "gauss-laguerre-mixture";
    grid.nodes_per_dim = n;
    const auto gl = gauss_laguerre(n);
    for (int comp = 0; comp < 2; ++comp) {
      if (mix->weight(comp) <= 0.0) continue;
      for (int j = 0; j < n; ++j) {
        grid.nodes.push_back({1.0, gl.nodes(j) / mix->rate(comp), mix->weight(comp) * gl.weights(j)});
      }
    }
    return grid;
  }
  throw Error(ErrorCode::UnsupportedEffects, "unknown random effect law");
}

double severity_marginal_cdf(double phi, const Portfolio& portfolio, const SeverityLaw& sev,
                             const RandomEffectJoint& effects, int nodes) {
  const auto grid = build_theta2_marginal_grid(effects, nodes);
  CompensatedSum total;
  for (const auto& cls : portfolio.classes) {
    const double cdf = expect(
        [&](double, double t2) { return 1.0 - severity_exceedance<double>(phi, cls.sev_rate * t2, sev); }, grid);
    total.add(cls.weight * cdf);
  }
  return total.value();
}

double severity_marginal_quantile(double p, const Portfolio& portfolio, const SeverityLaw& sev,
                                  const RandomEffectJoint& effects, int nodes) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::BracketingFailure, "quantile level must lie in (0, 1)");
  }
  double mean = 0.0;
  for (const auto& cls : portfolio.classes) mean += cls.weight * cls.sev_rate;
  double lo = 0.0;
  double hi = std::max(mean, 1e-300);
  int doublings = 0;
  while (severity_marginal_cdf(hi, portfolio, sev, effects, nodes) < p) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 2000 || !std::isfinite(hi)) {
      throw Error(ErrorCode::BracketingFailure, "could not bracket the severity quantile");
    }
  }
  while (hi - lo > 1e-8 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (severity_marginal_cdf(mid, portfolio, sev, effects, nodes) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace bms
