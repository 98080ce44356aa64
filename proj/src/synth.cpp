#include "gapdecomp/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

#include "csv.hpp"
#include "gapdecomp/error.hpp"
#include "gapdecomp/random.hpp"

namespace gapdecomp {

namespace {

class Sampler {
 public:
  Sampler(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

  double uniform() { return rng_.uniform(); }

  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

  std::size_t between(std::size_t lo, std::size_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    return lo + std::min(static_cast<std::size_t>(uniform() * span), hi - lo);
  }

  // log of a Gamma(shape, 1) variate; stays finite for very small shapes
  double log_gamma_variate(double shape) {
    if (shape < 1.0) return log_gamma_variate(shape + 1.0) + std::log(uniform()) / shape;
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d * v);
    }
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> logs(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) logs[i] = log_gamma_variate(alpha[i]);
    const double top = *std::max_element(logs.begin(), logs.end());
    std::vector<double> out(alpha.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) sum += out[i] = std::exp(logs[i] - top);
    for (auto& v : out) v /= sum;
    return out;
  }

  std::size_t categorical(const std::vector<double>& p) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      acc += p[i];
      if (u < acc) return i;
    }
    return p.size() - 1;
  }

 private:
  Philox4x32 rng_;
};

struct Builder {
  const SynthConfig& cfg;
  Sampler& rng;
  std::vector<Record>& records;

  std::vector<double> child_share(const std::vector<double>& parent) {
    if (cfg.jitter <= 0.0) return parent;
    std::vector<double> alpha(parent.size());
    for (std::size_t i = 0; i < parent.size(); ++i) alpha[i] = std::max(cfg.jitter * parent[i], 1e-12);
    return rng.dirichlet(alpha);
  }

  // `path` holds cluster ids from the top level down to `level`
  void grow(std::size_t level, std::vector<std::string>& path, const std::vector<double>& share) {
    if (level == 1) {
      const auto units = rng.between(cfg.units_min, cfg.units_max);
      for (std::size_t u = 0; u < units; ++u) {
        Record r;
        r.group = cfg.group_labels[rng.categorical(share)];
        r.outcome = cfg.noise_sd * rng.normal();  // noise; structural part added later
        r.cluster_path.assign(path.rbegin(), path.rend());
        r.unit_id = path.back() + "-u" + std::to_string(u);
        records.push_back(std::move(r));
      }
      return;
    }
    const auto children = rng.between(cfg.children_min, cfg.children_max);
    for (std::size_t c = 0; c < children; ++c) {
      path.push_back(path.back() + "." + std::to_string(c));
      grow(level - 1, path, child_share(share));
      path.pop_back();
    }
  }
};

}  // namespace

void SynthConfig::normalize() {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (groups < 2) bad("need at least 2 groups");
  if (levels < 1) bad("need at least 1 level");
  if (top_clusters < 1 || children_min < 1 || units_min < 1) bad("cluster counts must be >= 1");
  if (children_max < children_min || units_max < units_min) bad("min count exceeds max count");
  if (!(concentration > 0.0) || !std::isfinite(concentration)) bad("concentration must be positive");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) bad("noise sd must be >= 0");
  if (!std::isfinite(jitter)) bad("jitter must be finite");

  if (group_weights.empty()) group_weights.assign(groups, 1.0);
  if (group_weights.size() != groups) bad("group weights need one entry per group");
  const double total = std::accumulate(group_weights.begin(), group_weights.end(), 0.0);
  for (double w : group_weights) {
    if (!(w > 0.0)) bad("group weights must be positive");
  }
  for (auto& w : group_weights) w /= total;

  if (group_labels.empty()) {
    for (std::size_t g = 1; g <= groups; ++g) group_labels.push_back("g" + std::to_string(g));
  }
  if (group_labels.size() != groups) bad("need one label per group");
  if (level_names.empty()) {
    for (std::size_t l = 1; l <= levels; ++l) level_names.push_back("level" + std::to_string(l));
  }
  if (level_names.size() != levels) bad("need one name per level");

  if (within_gaps.empty()) within_gaps.assign(groups - 1, 0.0);
  if (within_gaps.size() != groups - 1) bad("need G-1 within gaps");
  if (contextual.size() == 0) {
    contextual = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(levels),
                                       static_cast<Eigen::Index>(groups - 1));
  }
  if (contextual.rows() != static_cast<Eigen::Index>(levels) ||
      contextual.cols() != static_cast<Eigen::Index>(groups - 1)) {
    bad("contextual effects must be L x (G-1)");
  }
}

SynthResult generate(SynthConfig config) {
  config.normalize();
  Hierarchy hierarchy{config.level_names};
  hierarchy.validate();

  constexpr std::size_t kMaxAttempts = 1000;
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Record> records;
    std::vector<double> base(config.groups);
    for (std::size_t g = 0; g < config.groups; ++g) {
      base[g] = config.concentration * config.group_weights[g];
    }
    for (std::size_t k = 0; k < config.top_clusters; ++k) {
      // one stream per top cluster so each subtree is reproducible on its own
      Sampler rng(config.seed, (static_cast<std::uint64_t>(attempt) << 32) | k);
      Builder builder{config, rng, records};
      std::vector<std::string> path{config.level_names.back() + "-" + std::to_string(k)};
      builder.grow(config.levels, path, rng.dirichlet(base));
    }

    std::vector<bool> seen(config.groups, false);
    for (const auto& r : records) {
      const auto it = std::find(config.group_labels.begin(), config.group_labels.end(), r.group);
      seen[static_cast<std::size_t>(it - config.group_labels.begin())] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      if (config.strict) {
        throw Error(ErrorCode::EmptyGroup, "a configured group drew no members with seed " +
                                               std::to_string(config.seed));
      }
      continue;
    }

    auto dataset = Dataset::from_records(hierarchy, std::move(records));
    std::vector<double> y(dataset.outcome().begin(), dataset.outcome().end());
    const auto groups = dataset.group_index();
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += config.alpha;
      const auto& label = dataset.group_labels()[groups[i]];
      const auto pos = static_cast<std::size_t>(
          std::find(config.group_labels.begin(), config.group_labels.end(), label) -
          config.group_labels.begin());
      if (pos > 0) y[i] += config.within_gaps[pos - 1];
    }
    for (std::size_t l = 1; l <= config.levels; ++l) {
      for (std::size_t g = 1; g < config.groups; ++g) {
        const double effect = config.contextual(static_cast<Eigen::Index>(l - 1),
                                                static_cast<Eigen::Index>(g - 1));
        if (effect == 0.0) continue;
        const auto share = compute_proportions(dataset, l, config.group_labels[g]);
        for (std::size_t i = 0; i < y.size(); ++i) {
          y[i] += effect * share.values(static_cast<Eigen::Index>(i));
        }
      }
    }

    TrueParams truth;
    truth.alpha = config.alpha;
    truth.within_gaps = config.within_gaps;
    truth.contextual = config.contextual;
    truth.noise_sd = config.noise_sd;
    truth.reference = config.group_labels.front();
    truth.groups.assign(config.group_labels.begin() + 1, config.group_labels.end());
    truth.seed = config.seed;
    truth.attempts = attempt + 1;
    return {dataset.with_outcome(std::move(y)), std::move(truth)};
  }
  throw Error(ErrorCode::EmptyGroup, "a configured group stayed empty after " +
                                         std::to_string(kMaxAttempts) + " redraws");
}

std::string to_csv(const Dataset& dataset) {
  std::string out = "unit_id,outcome,group";
  for (const auto& name : dataset.hierarchy().level_names) out += "," + csv::quote(name);
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto r = dataset.record(i);
    const auto res = std::to_chars(buf, buf + sizeof buf, r.outcome);
    out += csv::quote(r.unit_id);
    out += ",";
    out.append(buf, res.ptr);
    out += "," + csv::quote(r.group);
    for (const auto& id : r.cluster_path) out += "," + csv::quote(id);
    out += "\n";
  }
  return out;
}

std::vector<double> oracle_ols(const std::vector<std::vector<double>>& x,
                               const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n == 0 || n != y.size()) throw Error(ErrorCode::MalformedInput, "oracle_ols: bad shapes");
  const std::size_t k = x[0].size();
  // augmented normal equations [X'X | X'y]
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q) a[p][q] += x[i][p] * x[i][q];
      a[p][k] += x[i][p] * y[i];
    }
  }
  double scale = 0.0;
  for (std::size_t p = 0; p < k; ++p) scale = std::max(scale, std::abs(a[p][p]));
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) <= 1e-12 * scale) {
      throw Error(ErrorCode::Singular, "oracle_ols: singular normal equations");
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= k; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> b(k);
  for (std::size_t p = k; p-- > 0;) {
    double s = a[p][k];
    for (std::size_t q = p + 1; q < k; ++q) s -= a[p][q] * b[q];
    b[p] = s / a[p][p];
  }
  return b;
}

OmegaTriple oracle_omega(const Dataset& dataset, const std::string& reference) {
  if (dataset.group_labels().size() < 2) {
    throw Error(ErrorCode::ZeroVariance, "single-group data has no segregation index");
  }
  if (dataset.group_labels().size() > 2) {
    throw Error(ErrorCode::WrongShape, "oracle_omega handles exactly two groups");
  }
  const std::size_t n = dataset.size();
  const auto clusters = dataset.cluster_index(1);
  const auto groups = dataset.group_index();
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = dataset.group_labels()[groups[i]] == reference ? 0.0 : 1.0;
  }
  std::vector<double> tally(dataset.cluster_count(1), 0.0), size(dataset.cluster_count(1), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    tally[clusters[i]] += m[i];
    size[clusters[i]] += 1.0;
  }
  std::vector<double> mbar(n);
  for (std::size_t i = 0; i < n; ++i) mbar[i] = tally[clusters[i]] / size[clusters[i]];

  auto pop_var = [n](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(n);
  };
  const double var_m = pop_var(m);
  if (var_m == 0.0) throw Error(ErrorCode::ZeroVariance, "group indicator is constant");

  OmegaTriple out;
  out.variance_ratio = pop_var(mbar) / var_m;

  double sum1 = 0.0, sum0 = 0.0, n1 = 0.0, n0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i] == 1.0) {
      sum1 += mbar[i];
      n1 += 1.0;
    } else {
      sum0 += mbar[i];
      n0 += 1.0;
    }
  }
  out.mean_difference = sum1 / n1 - sum0 / n0;

  std::vector<std::vector<double>> x(n, std::vector<double>(2, 1.0));
  for (std::size_t i = 0; i < n; ++i) x[i][1] = m[i];
  out.regression = oracle_ols(x, mbar)[1];
  return out;
}

}  // namespace gapdecomp
