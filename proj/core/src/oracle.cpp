#include "selcal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "selcal/core.hpp"
#include "selcal/losses.hpp"
#include "selcal/metrics.hpp"

namespace selcal {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_simplex_rows(const Matrix& m, const char* what) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m(i, c);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string(what) + ": entry outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument(std::string(what) + ": row does not sum to 1");
  }
}

void validate(const DiscreteDistribution& dist, const TableModel& model) {
  const std::size_t m = dist.px.size();
  if (m == 0) throw std::invalid_argument("oracle: empty distribution");
  if (dist.posterior.rows() != m || model.preds.rows() != m)
    throw std::invalid_argument("oracle: atom count mismatch between px, posterior and preds");
  if (dist.posterior.cols() != model.preds.cols() || model.preds.cols() < 2)
    throw std::invalid_argument("oracle: class count mismatch");
  double mass = 0.0;
  for (double v : dist.px) {
    if (!(v >= 0.0)) throw std::invalid_argument("oracle: negative atom mass");
    mass += v;
  }
  if (std::abs(mass - 1.0) > 1e-12)
    throw std::invalid_argument("oracle: atom masses must sum to 1");
  check_simplex_rows(dist.posterior, "oracle posterior");
  check_simplex_rows(model.preds, "oracle preds");
}

struct Group {
  double mass = 0.0;
  std::vector<double> weighted_posterior;  // sum of px * posterior rows
};

// Exact E[y | f(x)]: atoms with byte-identical prediction rows form one
// group; the group posterior is the mass-weighted average of atom posteriors.
std::map<std::vector<double>, Group> group_by_prediction(const DiscreteDistribution& dist,
                                                         const TableModel& model) {
  const std::size_t k = model.preds.cols();
  std::map<std::vector<double>, Group> groups;
  for (std::size_t m = 0; m < dist.px.size(); ++m) {
    const auto row = model.preds.row(m);
    Group& g = groups[std::vector<double>(row.begin(), row.end())];
    if (g.weighted_posterior.empty()) g.weighted_posterior.assign(k, 0.0);
    g.mass += dist.px[m];
    for (std::size_t c = 0; c < k; ++c) g.weighted_posterior[c] += dist.px[m] * dist.posterior(m, c);
  }
  return groups;
}

// Scalar analogue used by the top-label and class-wise errors: group by one
// grouping value, track the mass-weighted means of a target pair.
struct ScalarGroup {
  double mass = 0.0;
  double value_sum = 0.0;  // px-weighted grouping value
  double hit_sum = 0.0;    // px-weighted conditional hit probability
};

double scalar_grouped_l1(const std::map<double, ScalarGroup>& groups) {
  double total = 0.0;
  for (const auto& [value, g] : groups) {
    if (g.mass == 0.0) continue;
    total += g.mass * std::abs(g.hit_sum / g.mass - g.value_sum / g.mass);
  }
  return total;
}

}  // namespace

double population_ce_rho(const DiscreteDistribution& dist, const TableModel& model, int rho) {
  validate(dist, model);
  if (rho != 1 && rho != 2) throw std::invalid_argument("population_ce_rho: rho must be 1 or 2");
  const auto groups = group_by_prediction(dist, model);
  double total = 0.0;
  for (const auto& [pred, g] : groups) {
    if (g.mass == 0.0) continue;
    double dist_rho = 0.0;
    for (std::size_t c = 0; c < pred.size(); ++c) {
      const double gap = std::abs(pred[c] - g.weighted_posterior[c] / g.mass);
      dist_rho += rho == 1 ? gap : gap * gap;
    }
    total += g.mass * dist_rho;
  }
  return rho == 1 ? total : std::sqrt(total);
}

double population_top_ece(const DiscreteDistribution& dist, const TableModel& model) {
  validate(dist, model);
  std::map<double, ScalarGroup> groups;
  for (std::size_t m = 0; m < dist.px.size(); ++m) {
    const auto row = model.preds.row(m);
    const std::size_t top = argmax_row(row);
    ScalarGroup& g = groups[row[top]];
    g.mass += dist.px[m];
    g.value_sum += dist.px[m] * row[top];
    g.hit_sum += dist.px[m] * dist.posterior(m, top);
  }
  return scalar_grouped_l1(groups);
}

double population_cwece(const DiscreteDistribution& dist, const TableModel& model) {
  validate(dist, model);
  const std::size_t k = model.preds.cols();
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::map<double, ScalarGroup> groups;
    for (std::size_t m = 0; m < dist.px.size(); ++m) {
      ScalarGroup& g = groups[model.preds(m, c)];
      g.mass += dist.px[m];
      g.value_sum += dist.px[m] * model.preds(m, c);
      g.hit_sum += dist.px[m] * dist.posterior(m, c);
    }
    total += scalar_grouped_l1(groups);
  }
  return total / static_cast<double>(k);
}

double population_brier(const DiscreteDistribution& dist, const TableModel& model) {
  validate(dist, model);
  // E||f - y||^2 expands to sum_c f_c^2 - 2 f_c q_c + q_c per atom; the last
  // term sums to 1 across classes.
  double total = 0.0;
  for (std::size_t m = 0; m < dist.px.size(); ++m) {
    double ff = 0.0;
    double fq = 0.0;
    for (std::size_t c = 0; c < model.preds.cols(); ++c) {
      ff += model.preds(m, c) * model.preds(m, c);
      fq += model.preds(m, c) * dist.posterior(m, c);
    }
    total += dist.px[m] * (ff - 2.0 * fq + 1.0);
  }
  return total;
}

double population_posterior_variance(const DiscreteDistribution& dist, const TableModel& model) {
  validate(dist, model);
  const auto groups = group_by_prediction(dist, model);
  double total = 0.0;
  for (const auto& [pred, g] : groups) {
    if (g.mass == 0.0) continue;
    for (std::size_t c = 0; c < pred.size(); ++c) {
      const double q = g.weighted_posterior[c] / g.mass;
      total += g.mass * q * (1.0 - q);
    }
  }
  return total;
}

double population_aurc_closed_form(const AurcProfile& profile) {
  switch (profile.kind) {
    case AurcProfile::Kind::ConstantLoss:
      // integral of -ln(1-u) over (0,1) is 1, scaled by the constant level.
      return profile.c;
    case AurcProfile::Kind::LinearLoss:
      // integral of -ln(1-u)(1-u) over (0,1) is 1/4.
      return 0.25;
  }
  throw std::invalid_argument("population_aurc_closed_form: unknown profile");
}

void sample_aurc_profile(const AurcProfile& profile, std::size_t n, Rng& rng,
                         std::vector<double>& losses, std::vector<double>& scores) {
  if (n == 0) throw std::invalid_argument("sample_aurc_profile: need n >= 1");
  losses.resize(n);
  scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    scores[i] = u;
    switch (profile.kind) {
      case AurcProfile::Kind::ConstantLoss:
        losses[i] = profile.c;
        break;
      case AurcProfile::Kind::LinearLoss:
        losses[i] = 1.0 - u;
        break;
    }
  }
}

AurcBoundReport aurc_lower_bound_check(const ProbBatch& p, const LabelBatch& labels) {
  if (p.size() != labels.size())
    throw std::invalid_argument("aurc_lower_bound_check: batch sizes differ");
  const std::size_t n = p.size();
  std::vector<double> losses(n);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    losses[i] = cross_entropy(p.values.row(i), labels.classes[i]).value;
    scores[i] = -losses[i];
  }
  AurcBoundReport r;
  r.lhs = mc_aurc(losses, scores);
  const double err = empirical_error(p, labels);
  const double nd = static_cast<double>(n);
  const double ln2 = std::log(2.0);
  r.rhs = nd * ln2 / (2.0 * (nd + 1.0)) * err * err + ln2 / (2.0 * (nd + 1.0)) * err;
  r.pass = r.lhs >= r.rhs - 1e-12;
  return r;
}

MixtureSample gen_mixture(const MixtureSpec& spec, std::size_t n) {
  if (n == 0) throw std::invalid_argument("gen_mixture: need n >= 1");
  if (spec.k < 2 || spec.d < 1) throw std::invalid_argument("gen_mixture: need k >= 2, d >= 1");
  if (!(spec.variance > 0.0)) throw std::invalid_argument("gen_mixture: variance must be > 0");
  const auto k = static_cast<std::size_t>(spec.k);
  const auto d = static_cast<std::size_t>(spec.d);
  if (spec.means.rows() != k || spec.means.cols() != d)
    throw std::invalid_argument("gen_mixture: means must be k x d");
  if (spec.priors.size() != k) throw std::invalid_argument("gen_mixture: priors must have k entries");
  double prior_sum = 0.0;
  for (double v : spec.priors) {
    if (!(v >= 0.0)) throw std::invalid_argument("gen_mixture: negative prior");
    prior_sum += v;
  }
  if (std::abs(prior_sum - 1.0) > 1e-9)
    throw std::invalid_argument("gen_mixture: priors must sum to 1");

  Rng rng(spec.seed);
  const double sigma = std::sqrt(spec.variance);
  Matrix features(n, d);
  std::vector<int> labels(n);
  Matrix posterior(n, k);
  std::vector<double> logw(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    std::size_t cls = k - 1;
    double cdf = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      cdf += spec.priors[c];
      if (u < cdf) {
        cls = c;
        break;
      }
    }
    labels[i] = static_cast<int>(cls);
    for (std::size_t j = 0; j < d; ++j)
      features(i, j) = spec.means(cls, j) + sigma * rng.normal();

    // Exact posterior: shared isotropic covariance, so the Gaussian densities
    // reduce to exp(-||x - mu_c||^2 / (2 sigma^2)) up to a common factor.
    // Work in log space and subtract the max before exponentiating.
    for (std::size_t c = 0; c < k; ++c) {
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double gap = features(i, j) - spec.means(c, j);
        sq += gap * gap;
      }
      logw[c] = std::log(spec.priors[c]) - sq / (2.0 * spec.variance);
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    double norm = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      posterior(i, c) = std::exp(logw[c] - top);
      norm += posterior(i, c);
    }
    for (std::size_t c = 0; c < k; ++c) posterior(i, c) /= norm;
  }

  MixtureSample out;
  out.features = std::move(features);
  out.labels = make_label_batch(labels, spec.k);
  out.posterior = make_prob_batch(posterior);
  return out;
}

MixtureSpec ring_mixture_spec(int k, int d, double radius, double variance, std::uint64_t seed) {
  if (k < 2 || d < 1) throw std::invalid_argument("ring_mixture_spec: need k >= 2, d >= 1");
  MixtureSpec spec;
  spec.k = k;
  spec.d = d;
  spec.variance = variance;
  spec.seed = seed;
  spec.means = Matrix(static_cast<std::size_t>(k), static_cast<std::size_t>(d));
  for (int c = 0; c < k; ++c) {
    if (d == 1) {
      spec.means(c, 0) = radius * (static_cast<double>(c) - (k - 1) / 2.0);
    } else {
      const double angle = 2.0 * kPi * c / k;
      spec.means(c, 0) = radius * std::cos(angle);
      spec.means(c, 1) = radius * std::sin(angle);
    }
  }
  spec.priors.assign(static_cast<std::size_t>(k), 1.0 / k);
  return spec;
}

}  // namespace selcal
