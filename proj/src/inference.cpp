#include "gapdecomp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include <Eigen/Eigenvalues>

#include "gapdecomp/error.hpp"
#include "gapdecomp/random.hpp"

namespace gapdecomp {

namespace {

// Box-Muller; the generator is fresh for every draw so no pair is cached.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  Philox4x32 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<Eigen::VectorXd> DrawMatrix::coefficients(std::size_t draw) const {
  std::vector<Eigen::VectorXd> out;
  const auto row = static_cast<Eigen::Index>(draw);
  for (std::size_t e = 0; e < equation_offsets.size(); ++e) {
    const auto begin = static_cast<Eigen::Index>(equation_offsets[e]);
    const auto end = e + 1 < equation_offsets.size()
                         ? static_cast<Eigen::Index>(equation_offsets[e + 1])
                         : values.cols();
    out.emplace_back(values.row(row).segment(begin, end - begin).transpose());
  }
  return out;
}

DrawMatrix draw_parameters(const ParameterSet& params, std::size_t n_draws, std::uint64_t seed,
                           unsigned threads) {
  if (n_draws < kMinDraws) {
    throw Error(ErrorCode::InvalidConfig,
                "Monte Carlo intervals need at least " + std::to_string(kMinDraws) + " draws");
  }
  if (params.equations.empty()) {
    throw Error(ErrorCode::IncompleteParameters, "parameter set has no fitted equations");
  }
  DrawMatrix out;
  out.seed = seed;

  std::vector<Eigen::MatrixXd> factors;
  Eigen::Index total = 0;
  for (const auto& eq : params.equations) {
    const auto k = eq.coefficients.size();
    if (eq.covariance.rows() != k || eq.covariance.cols() != k || !eq.covariance.allFinite()) {
      throw Error(ErrorCode::IncompleteParameters, eq.name() + " has no usable covariance");
    }
    const Eigen::MatrixXd sym = 0.5 * (eq.covariance + eq.covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
    if (lambda.minCoeff() < -1e-10 * scale) {
      out.warnings.push_back("covariance of " + eq.name() +
                             " is not positive semi-definite; negative eigenvalues clipped to 0");
    }
    lambda = lambda.cwiseMax(0.0);
    factors.push_back(eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal());
    out.equation_offsets.push_back(static_cast<std::size_t>(total));
    out.equation_names.push_back(eq.name());
    total += k;
  }

  out.values.resize(static_cast<Eigen::Index>(n_draws), total);
  parallel_for(n_draws, threads, [&](std::size_t i) {
    NormalStream normal(seed, i);
    auto row = out.values.row(static_cast<Eigen::Index>(i));
    for (std::size_t e = 0; e < factors.size(); ++e) {
      const auto& eq = params.equations[e];
      const auto k = eq.coefficients.size();
      Eigen::VectorXd z(k);
      for (Eigen::Index j = 0; j < k; ++j) z(j) = normal.next();
      row.segment(static_cast<Eigen::Index>(out.equation_offsets[e]), k) =
          (eq.coefficients + factors[e] * z).transpose();
    }
  });
  return out;
}

double percentile(std::vector<double>& values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::string significance_stars(const std::vector<Interval>& ci) {
  auto excludes_zero = [&](double level) -> int {
    for (const auto& iv : ci) {
      if (std::abs(iv.level - level) < 1e-12) return (iv.value_lo > 0.0 || iv.value_hi < 0.0) ? 1 : 0;
    }
    return -1;
  };
  if (excludes_zero(0.999) == 1) return "***";
  if (excludes_zero(0.99) == 1) return "**";
  if (excludes_zero(0.95) == 1) return "*";
  return "n.s.";
}

std::vector<ComponentCis> component_cis(const DrawMatrix& draws, const ParameterSet& params,
                                        std::span<const CiRequest> requests,
                                        std::span<const double> levels, unsigned threads) {
  for (double level : levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "confidence levels must lie in (0, 1)");
    }
  }
  std::vector<double> sorted_levels(levels.begin(), levels.end());
  std::sort(sorted_levels.begin(), sorted_levels.end());

  std::vector<ComponentCis> out;
  std::vector<std::size_t> offset;  // first component slot of each request
  std::size_t slots = 0;
  for (const auto& req : requests) {
    ComponentCis c;
    c.point = decompose(params, req.approach, req.target);
    offset.push_back(slots);
    slots += c.point.components.size();
    out.push_back(std::move(c));
  }

  const std::size_t n = draws.n_draws();
  // per draw: values of every slot, then one validity flag per request
  Eigen::MatrixXd value(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(slots));
  Eigen::MatrixXd share(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(slots));
  std::vector<std::vector<char>> valid(requests.size(), std::vector<char>(n, 0));

  parallel_for(n, threads, [&](std::size_t i) {
    const auto drawn = params.with_coefficients(draws.coefficients(i));
    for (std::size_t r = 0; r < requests.size(); ++r) {
      const auto d = decompose(drawn, requests[r].approach, requests[r].target);
      const bool ok = d.total_gap != 0.0 && std::isfinite(d.total_gap);
      valid[r][i] = ok ? 1 : 0;
      for (std::size_t c = 0; c < d.components.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(offset[r] + c);
        value(static_cast<Eigen::Index>(i), col) = d.components[c].value;
        share(static_cast<Eigen::Index>(i), col) = ok ? d.components[c].share : 0.0;
      }
    }
  });

  for (std::size_t r = 0; r < requests.size(); ++r) {
    auto& res = out[r];
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < n; ++i) {
      if (valid[r][i]) kept.push_back(i);
    }
    res.point.dropped_draws = n - kept.size();
    for (std::size_t c = 0; c < res.point.components.size(); ++c) {
      const auto col = static_cast<Eigen::Index>(offset[r] + c);
      std::vector<double> v, s;
      v.reserve(kept.size());
      s.reserve(kept.size());
      for (auto i : kept) {
        v.push_back(value(static_cast<Eigen::Index>(i), col));
        s.push_back(share(static_cast<Eigen::Index>(i), col));
      }
      auto& comp = res.point.components[c];
      comp.ci.clear();
      for (double level : sorted_levels) {
        const double tail = (1.0 - level) / 2.0;
        Interval iv;
        iv.level = level;
        iv.value_lo = percentile(v, tail);
        iv.value_hi = percentile(v, 1.0 - tail);
        iv.share_lo = percentile(s, tail);
        iv.share_hi = percentile(s, 1.0 - tail);
        comp.ci.push_back(iv);
      }
      comp.stars = significance_stars(comp.ci);
    }
  }
  return out;
}

ComponentCis component_cis(const DrawMatrix& draws, const ParameterSet& params, int approach,
                           std::size_t target, std::span<const double> levels, unsigned threads) {
  const CiRequest req{approach, target};
  return std::move(component_cis(draws, params, std::span<const CiRequest>(&req, 1), levels,
                                 threads)
                       .front());
}

}  // namespace gapdecomp
