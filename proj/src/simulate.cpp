#include "bms/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/random/discrete_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "bms/rng.hpp"

namespace bms {

namespace {

constexpr long kBlock = 1 << 14;

struct Effects {
  double theta1;
  double theta2;
};

Effects draw_effects(const RandomEffectJoint& law, StreamRng& rng) {
  if (const auto* ln = std::get_if<LognormalCopula>(&law)) {
    boost::random::normal_distribution<double> z;
    const double x1 = z(rng);
    const double x2 = z(rng);
    const double z2 = ln->rho * x1 + std::sqrt(std::max(0.0, 1.0 - ln->rho * ln->rho)) * x2;
    return {std::exp(std::sqrt(ln->sigma1_sq) * x1 - 0.5 * ln->sigma1_sq),
            std::exp(std::sqrt(ln->sigma2_sq) * z2 - 0.5 * ln->sigma2_sq)};
  }
  if (const auto* mix = std::get_if<MixtureExponential>(&law)) {
    boost::random::uniform_01<double> unif;
    const int comp = unif(rng) < mix->c0 ? 0 : 1;
    boost::random::exponential_distribution<double> e(mix->rate(comp));
    const double t1 = e(rng);
    return {t1, mix->theta2_fixed ? 1.0 : e(rng)};
  }
  return {1.0, 1.0};
}

bool claim_exceeds(double phi, double mean, const SeverityLaw& law, StreamRng& rng) {
  if (law.kind == SeverityLaw::Kind::Gamma) {
    boost::random::gamma_distribution<double> g(law.shape, mean / law.shape);
    return g(rng) > phi;
  }
  boost::random::poisson_distribution<long, double> p(mean);
  return static_cast<double>(p(rng)) > phi;
}

struct Block {
  std::vector<LevelSums> aggregate;
  std::vector<LevelSums> frequency;
};

Block run_block(const SimConfig& cfg, const std::vector<double>& class_weights, long begin, long end) {
  const auto& rule = cfg.rule;
  const int z = rule.z;
  Block out{std::vector<LevelSums>(z + 1), std::vector<LevelSums>(z + 1)};
  for (long path = begin; path < end; ++path) {
    StreamRng rng(cfg.seed, static_cast<std::uint64_t>(path));
    std::size_t k = 0;
    if (class_weights.size() > 1) {
      boost::random::discrete_distribution<std::size_t, double> pick(class_weights.begin(), class_weights.end());
      k = pick(rng);
    }
    const auto& cls = cfg.model.portfolio.classes[k];
    const auto eff = draw_effects(cfg.model.effects, rng);
    const double freq_mean = cls.freq_rate * eff.theta1;
    const double sev_mean = cls.sev_rate * eff.theta2;
    boost::random::poisson_distribution<long, double> counts(freq_mean);
    int level = cfg.initial_level;
    for (int year = 0; year < cfg.burn_in; ++year) {
      const long n = counts(rng);
      if (n == 0) {
        level = std::max(level - 1, 0);
        continue;
      }
      long up = 0;
      for (long c = 0; c < n; ++c) {
        const bool large = rule.severity_split && claim_exceeds(rule.phi, sev_mean, cfg.model.severity, rng);
        up += large ? rule.h2 : rule.h1;
        if (level + up >= z) break;
      }
      level = static_cast<int>(std::min<long>(level + up, z));
    }
    const double ll = cls.freq_rate * cls.sev_rate;
    out.aggregate[level].add(ll * ll, eff.theta1 * eff.theta2);
    out.frequency[level].add(cls.freq_rate * cls.freq_rate, eff.theta1);
  }
  return out;
}

}  // namespace

void LevelSums::add(double w, double target) {
  ++visits;
  double t = 1.0;
  for (int k = 0; k < 5; ++k) {
    if (k < 3) first[k] += w * t;
    second[k] += w * w * t;
    t *= target;
  }
}

void LevelSums::merge(const LevelSums& other) {
  visits += other.visits;
  for (int k = 0; k < 3; ++k) first[k] += other.first[k];
  for (int k = 0; k < 5; ++k) second[k] += other.second[k];
}

Eigen::VectorXd SimSummary::level_distribution() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(aggregate.size()));
  for (std::size_t l = 0; l < aggregate.size(); ++l) {
    p(static_cast<Eigen::Index>(l)) = static_cast<double>(aggregate[l].visits) / static_cast<double>(paths);
  }
  return p;
}

Eigen::VectorXd SimSummary::level_distribution_se() const {
  const auto p = level_distribution();
  return (p.array() * (1.0 - p.array()) / static_cast<double>(paths)).sqrt().matrix();
}

SimSummary simulate_paths(const SimConfig& cfg) {
  const auto model = validate_model(cfg.model);
  validate_rule(cfg.rule);
  if (cfg.paths < 1) throw Error(ErrorCode::InvalidModel, "path count must be >= 1");
  if (cfg.burn_in < 0) throw Error(ErrorCode::InvalidModel, "burn-in must be >= 0");
  if (cfg.initial_level < 0 || cfg.initial_level > cfg.rule.z) {
    throw Error(ErrorCode::InvalidRule, "initial level outside 0..z");
  }
  SimConfig run = cfg;
  run.model = model;
  std::vector<double> weights;
  for (const auto& c : model.portfolio.classes) weights.push_back(c.weight);

  const long blocks = (cfg.paths + kBlock - 1) / kBlock;
  std::vector<Block> results(static_cast<std::size_t>(blocks));
  auto work = [&](long first_block, long stride) {
    for (long b = first_block; b < blocks; b += stride) {
      results[static_cast<std::size_t>(b)] = run_block(run, weights, b * kBlock, std::min(cfg.paths, (b + 1) * kBlock));
    }
  };
  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(blocks)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }

  SimSummary out;
  out.rule = cfg.rule;
  out.paths = cfg.paths;
  out.aggregate.assign(static_cast<std::size_t>(cfg.rule.levels()), LevelSums{});
  out.frequency.assign(static_cast<std::size_t>(cfg.rule.levels()), LevelSums{});
  for (const auto& block : results) {
    for (std::size_t l = 0; l < out.aggregate.size(); ++l) {
      out.aggregate[l].merge(block.aggregate[l]);
      out.frequency[l].merge(block.frequency[l]);
    }
  }
  return out;
}

EmpiricalEstimate empirical_relativity(const SimSummary& summary, RelativityFamily family, long min_visits) {
  const auto& sums = family == RelativityFamily::Frequency ? summary.frequency : summary.aggregate;
  const auto n = static_cast<Eigen::Index>(sums.size());
  EmpiricalEstimate out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index l = 0; l < n; ++l) {
    const auto& s = sums[static_cast<std::size_t>(l)];
    if (s.visits < min_visits) {
      throw Error(ErrorCode::InsufficientOccupancy, "level " + std::to_string(l) + " visited " +
                                                        std::to_string(s.visits) + " times, need " +
                                                        std::to_string(min_visits));
    }
    const double r = s.first[1] / s.first[0];
    // Residuals e_i = w_i (target_i - r); sum e_i^2 expands into the stored power sums.
    const double ss = std::max(0.0, s.second[2] - 2.0 * r * s.second[1] + r * r * s.second[0]);
    out.value(l) = r;
    out.se(l) = std::sqrt(ss) / s.first[0];
  }
  return out;
}

EmpiricalHmse empirical_hmse(const SimSummary& summary, const Eigen::VectorXd& relativity) {
  if (relativity.size() != static_cast<Eigen::Index>(summary.aggregate.size())) {
    throw Error(ErrorCode::LevelMismatch, "relativity vector does not match the simulated rule");
  }
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t l = 0; l < summary.aggregate.size(); ++l) {
    const auto& s = summary.aggregate[l];
    if (s.visits == 0) continue;
    const double r = relativity(static_cast<Eigen::Index>(l));
    const auto& f = s.first;
    const auto& q = s.second;
    // e = w (t^2 - 2 r t + r^2) with w = (lambda1 lambda2)^2.
    sum += f[2] - 2.0 * r * f[1] + r * r * f[0];
    sum_sq += q[4] - 4.0 * r * q[3] + (4.0 * r * r + 2.0 * r * r) * q[2] - 4.0 * r * r * r * q[1] +
              r * r * r * r * q[0];
  }
  const double n = static_cast<double>(summary.paths);
  EmpiricalHmse out;
  out.raw = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.raw * out.raw) / (n - 1.0));
  out.raw_se = std::sqrt(var / n);
  return out;
}

}  // namespace bms
