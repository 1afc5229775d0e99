#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bms/model.hpp"

namespace bms {

inline constexpr int kDefaultNodes = 192;

/// Nodes and weights of an n-point rule, computed by Golub-Welsch.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Gauss-Hermite rule for the standard normal density (weights sum to one).
GaussRule gauss_hermite(int n);

/// Gauss-Laguerre rule for the unit exponential density (weights sum to one).
GaussRule gauss_laguerre(int n);

struct QuadratureNode {
  double theta1;
  double theta2;
  double weight;
};

/// Product-form cubature for E[f(Theta1, Theta2)] under the joint effect law.
struct QuadratureGrid {
  std::vector<QuadratureNode> nodes;
  std::string scheme;
  int nodes_per_dim = 0;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// Lognormal copula: tensor Gauss-Hermite in the latent bivariate normal space.
/// Mixture of exponentials: one Gauss-Laguerre tensor grid per component.
/// Degenerate: the single node (1, 1). Fixed coordinates collapse their dimension.
QuadratureGrid build_grid(const RandomEffectJoint& effects, int n = kDefaultNodes);

/// Same law as `build_grid`, second coordinate only (one-dimensional rule).
QuadratureGrid build_theta2_marginal_grid(const RandomEffectJoint& effects, int n = kDefaultNodes);

/// Neumaier-compensated running sum with a fixed accumulation order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Sum of weight * f(theta1, theta2) over the grid, in node order.
template <typename F>
double expect(F&& f, const QuadratureGrid& grid) {
  CompensatedSum acc;
  for (const auto& node : grid.nodes) {
    const double v = f(node.theta1, node.theta2);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteIntegrand,
                  "integrand not finite at (" + std::to_string(node.theta1) + ", " +
                      std::to_string(node.theta2) + ")");
    }
    acc.add(node.weight * v);
  }
  return acc.value();
}

/// Marginal claim-size distribution function
/// F(phi) = sum_k w_k E[P(Y <= phi | lambda2_k Theta2)].
double severity_marginal_cdf(double phi, const Portfolio& portfolio, const SeverityLaw& sev,
                             const RandomEffectJoint& effects, int nodes = kDefaultNodes);

/// Solves F(phi) = p by bisection to relative tolerance 1e-8.
double severity_marginal_quantile(double p, const Portfolio& portfolio, const SeverityLaw& sev,
                                  const RandomEffectJoint& effects, int nodes = kDefaultNodes);

}  // namespace bms
