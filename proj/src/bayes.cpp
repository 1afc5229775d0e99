#include "bms/bayes.hpp"

#include <cmath>
#include <limits>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "bms/quadrature.hpp"
#include "bms/rng.hpp"

namespace bms {

namespace {

void validate(const HypotheticalModel& model) {
  if (!(model.lambda1 > 0.0) || !(model.lambda2 > 0.0) || !std::isfinite(model.lambda1) ||
      !std::isfinite(model.lambda2)) {
    throw Error(ErrorCode::InvalidModel, "a priori rates must be finite and > 0");
  }
  validate_effects(model.mix);
}

/// Normalises log-weights with log-sum-exp; -inf marks an absent component.
std::array<double, 2> normalise(const std::array<double, 2>& logw) {
  const double m = std::max(logw[0], logw[1]);
  std::array<double, 2> w{};
  double total = 0.0;
  for (int j = 0; j < 2; ++j) {
    w[j] = std::isfinite(logw[j]) ? std::exp(logw[j] - m) : 0.0;
    total += w[j];
  }
  for (auto& x : w) x /= total;
  return w;
}

double log_or_minus_inf(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - std::lgamma(shape);
}

}  // namespace

double MixtureExpPosterior::mean_theta1() const {
  CompensatedSum s;
  for (int j = 0; j < 2; ++j) s.add(weight[j] * shape1[j] / rate1[j]);
  return s.value();
}

double MixtureExpPosterior::mean_product() const {
  if (theta2_fixed) return mean_theta1();
  CompensatedSum s;
  for (int j = 0; j < 2; ++j) s.add(weight[j] * (shape1[j] / rate1[j]) * (shape2[j] / rate2[j]));
  return s.value();
}

double MixtureExpPosterior::density(double theta1, double theta2) const {
  if (!(theta1 > 0.0) || (!theta2_fixed && !(theta2 > 0.0))) return 0.0;
  double out = 0.0;
  for (int j = 0; j < 2; ++j) {
    if (weight[j] <= 0.0) continue;
    double lp = log_gamma_pdf(theta1, shape1[j], rate1[j]);
    if (!theta2_fixed) lp += log_gamma_pdf(theta2, shape2[j], rate2[j]);
    out += weight[j] * std::exp(lp);
  }
  return out;
}

MixtureExpPosterior posterior_freq(const ClaimHistory& history, const HypotheticalModel& model) {
  validate(model);
  validate_history(history);
  const auto& mix = model.mix;
  const double n = static_cast<double>(history.total_count());
  const double exposure = model.lambda1 * history.length();
  MixtureExpPosterior post;
  post.theta2_fixed = mix.theta2_fixed;
  std::array<double, 2> logw{};
  for (int j = 0; j < 2; ++j) {
    const double c = mix.rate(j);
    logw[j] = log_or_minus_inf(mix.weight(j)) + std::log(c) - (n + 1.0) * std::log(exposure + c);
    post.shape1[j] = n + 1.0;
    post.rate1[j] = exposure + c;
    post.shape2[j] = 1.0;
    post.rate2[j] = c;
  }
  post.weight = normalise(logw);
  return post;
}

MixtureExpPosterior posterior_full(const ClaimHistory& history, const HypotheticalModel& model) {
  if (model.mix.theta2_fixed) return posterior_freq(history, model);
  validate(model);
  validate_history(history);
  const auto& mix = model.mix;
  const double n = static_cast<double>(history.total_count());
  const double s = history.total_aggregate();
  const double exposure = model.lambda1 * history.length();
  MixtureExpPosterior post;
  std::array<double, 2> logw{};
  for (int j = 0; j < 2; ++j) {
    const double c = mix.rate(j);
    logw[j] = log_or_minus_inf(mix.weight(j)) + 2.0 * std::log(c) - (n + 1.0) * std::log(exposure + c) -
              (s + 1.0) * std::log(model.lambda2 * n + c);
    post.shape1[j] = n + 1.0;
    post.rate1[j] = exposure + c;
    post.shape2[j] = s + 1.0;
    post.rate2[j] = model.lambda2 * n + c;
  }
  post.weight = normalise(logw);
  return post;
}

double bayes_freq_premium(const ClaimHistory& history, const HypotheticalModel& model) {
  return model.lambda1 * posterior_freq(history, model).mean_theta1();
}

double bayes_agg_premium_independent(const ClaimHistory& history, const HypotheticalModel& model) {
  return model.lambda2 * bayes_freq_premium(history, model);
}

double bayes_agg_premium_freqhist(const ClaimHistory& history, const HypotheticalModel& model) {
  return model.lambda1 * model.lambda2 * posterior_freq(history, model).mean_product();
}

double bayes_agg_premium_fullhist(const ClaimHistory& history, const HypotheticalModel& model) {
  return model.lambda1 * model.lambda2 * posterior_full(history, model).mean_product();
}

double posterior_density(double theta1, double theta2, const ClaimHistory& history, const HypotheticalModel& model) {
  return posterior_full(history, model).density(theta1, theta2);
}

MseComparison mse_comparison_mc(const HypotheticalModel& model, int years, long paths, std::uint64_t seed) {
  validate(model);
  if (years < 0) throw Error(ErrorCode::InconsistentHistory, "history length must be >= 0");
  if (paths < 2) throw Error(ErrorCode::InvalidModel, "need at least two simulated paths");
  const auto& mix = model.mix;
  CompensatedSum sum_full, sum_freq, sum_d, sum_d2;
  ClaimHistory history;
  history.years.resize(static_cast<std::size_t>(years));
  for (long path = 0; path < paths; ++path) {
    StreamRng rng(seed, static_cast<std::uint64_t>(path));
    boost::random::uniform_01<double> unif;
    const int comp = unif(rng) < mix.c0 ? 0 : 1;
    boost::random::exponential_distribution<double> effect(mix.rate(comp));
    const double theta1 = effect(rng);
    const double theta2 = mix.theta2_fixed ? 1.0 : effect(rng);
    auto draw_year = [&]() {
      ClaimRecord rec;
      const double m1 = model.lambda1 * theta1;
      rec.count = m1 > 0.0 ? boost::random::poisson_distribution<long, double>(m1)(rng) : 0;
      const double m2 = model.lambda2 * theta2 * static_cast<double>(rec.count);
      rec.aggregate = m2 > 0.0 ? static_cast<double>(boost::random::poisson_distribution<long, double>(m2)(rng)) : 0.0;
      return rec;
    };
    for (auto& rec : history.years) rec = draw_year();
    const double next = draw_year().aggregate;
    const double p_full = bayes_agg_premium_fullhist(history, model);
    const double p_freq = bayes_agg_premium_freqhist(history, model);
    const double e_full = (next - p_full) * (next - p_full);
    const double e_freq = (next - p_freq) * (next - p_freq);
    const double d = e_freq - e_full;
    sum_full.add(e_full);
    sum_freq.add(e_freq);
    sum_d.add(d);
    sum_d2.add(d * d);
  }
  const double n = static_cast<double>(paths);
  MseComparison out;
  out.paths = paths;
  out.mse_full = sum_full.value() / n;
  out.mse_freq = sum_freq.value() / n;
  out.diff_mean = sum_d.value() / n;
  const double var = std::max(0.0, (sum_d2.value() - n * out.diff_mean * out.diff_mean) / (n - 1.0));
  out.diff_se = std::sqrt(var / n);
  out.diff_lower95 = out.diff_mean - 1.6448536269514722 * out.diff_se;
  return out;
}

}  // namespace bms
