#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "lamplighter/error.hpp"
#include "lamplighter/lamp_group.hpp"
#include "lamplighter/rooted_graph.hpp"

namespace lamplighter::exact {

inline constexpr double kDefaultSeriesTolerance = 1e-12;

/// Parameters of the stationary walk on F wr Z and the quantities derived
/// from them.
struct PhaseParams {
  double p;
  double lambda;          // p / (1 - p)
  std::int64_t lamp_order;
  double alpha;           // log|F| / log(lambda)
  double critical_p;      // |F|^2 / (|F|^2 + 1)
  double mean_return_time;  // E[rho_1] = 2p / (2p - 1)
  double mgf_abscissa;    // s0 = log(1 / (4p(1-p))) / 2

  bool recurrent() const noexcept { return 2.0 * alpha <= 1.0; }
};

inline void require_drift(double p) {
  if (!(p > 0.5 && p < 1.0)) throw DomainError("drift p must lie in (1/2, 1)");
}
inline void require_lambda(double lambda) {
  if (!(lambda > 1.0) || !std::isfinite(lambda)) throw DomainError("lambda must exceed 1");
}
inline void require_lamp_order(std::int64_t order) {
  if (order < 2) throw DomainError("lamp group order must be >= 2");
}

inline PhaseParams phase_params(double p, std::int64_t lamp_order) {
  require_drift(p);
  require_lamp_order(lamp_order);
  const double lambda = p / (1.0 - p);
  const auto f = static_cast<double>(lamp_order);
  return PhaseParams{p,
                     lambda,
                     lamp_order,
                     std::log(f) / std::log(lambda),
                     f * f / (f * f + 1.0),
                     2.0 * p / (2.0 * p - 1.0),
                     0.5 * std::log(1.0 / (4.0 * p * (1.0 - p)))};
}

inline double p_from_lambda(double lambda) {
  require_lambda(lambda);
  return lambda / (lambda + 1.0);
}

/// P(R_{rho_k} = id | base path) = |F|^{-(M+ - M- + 1)}.
inline double ret_prob_given_extremes(std::int64_t max_pos, std::int64_t min_pos,
                                      std::int64_t lamp_order) {
  if (max_pos < 0 || min_pos > 0) throw DomainError("extremes must satisfy max >= 0 >= min");
  if (lamp_order < 1) throw DomainError("lamp group order must be >= 1");
  return std::pow(static_cast<double>(lamp_order), -static_cast<double>(max_pos - min_pos + 1));
}

/// P(M_1^+ <= x | S_1 = 1) = 1 - (lambda - 1) / (lambda^{x+1} - 1).
inline double max_excursion_cdf(std::int64_t x, double lambda) {
  if (x < 0) throw DomainError("excursion maximum cdf needs x >= 0");
  require_lambda(lambda);
  const double log_lambda = std::log(lambda);
  const double ratio = std::expm1(log_lambda) / std::expm1(static_cast<double>(x + 1) * log_lambda);
  return 1.0 - ratio;
}

struct SeriesValue {
  double value;
  /// Last index a included in the partial sum.
  std::uint64_t truncation_point;
};

/// Sum over a >= 1 of |F|^{-a} (1 - (lambda-1)/(lambda^a - 1))^m, with
/// cached per-a coefficients so that many values of m are cheap.
class ExcursionSeriesTable {
 public:
  ExcursionSeriesTable(double lambda, std::int64_t lamp_order,
                       double tol = kDefaultSeriesTolerance)
      : lambda_(lambda), lamp_order_(lamp_order), tol_(tol) {
    require_lambda(lambda);
    require_lamp_order(lamp_order);
    if (!(tol > 0.0)) throw DomainError("series tolerance must be positive");
    log_f_ = std::log(static_cast<double>(lamp_order));
    log_lambda_ = std::log(lambda);
  }

  double lambda() const noexcept { return lambda_; }
  std::int64_t lamp_order() const noexcept { return lamp_order_; }
  double tolerance() const noexcept { return tol_; }

  SeriesValue evaluate(std::uint64_t m) {
    const auto md = static_cast<double>(m);
    double sum = 0.0;
    for (std::uint64_t a = 1;; ++a) {
      ensure(a);
      const double log_term = log_weight_[a - 1] + log_survival(a, md);
      sum += std::exp(log_term);
      // sum_{b > a} |F|^{-b} = |F|^{-a} / (|F| - 1)
      const double tail = std::exp(log_weight_[a - 1]) / (static_cast<double>(lamp_order_) - 1.0);
      if (tail < tol_ * sum) return {sum, a};
      if (a > 100000) throw DomainError("excursion series failed to converge");
    }
  }

  double operator()(std::uint64_t m) {
    if (m < memo_.size()) return memo_[m];
    if (m < 1u << 22) {
      while (memo_.size() <= m) memo_.push_back(evaluate(memo_.size()).value);
      return memo_[m];
    }
    return evaluate(m).value;
  }

 private:
  void ensure(std::uint64_t a) {
    while (log_weight_.size() < a) {
      const auto ad = static_cast<double>(log_weight_.size() + 1);
      log_weight_.push_back(-ad * log_f_);
      const double q = std::expm1(log_lambda_) / std::expm1(ad * log_lambda_);
      log_one_minus_q_.push_back(q >= 1.0 ? -std::numeric_limits<double>::infinity()
                                          : std::log1p(-q));
    }
  }

  // log (1 - q_a)^m with 0^0 = 1.
  double log_survival(std::uint64_t a, double m) const {
    if (m == 0.0) return 0.0;
    return m * log_one_minus_q_[a - 1];
  }

  double lambda_;
  std::int64_t lamp_order_;
  double tol_;
  double log_f_ = 0.0;
  double log_lambda_ = 0.0;
  std::vector<double> log_weight_;
  std::vector<double> log_one_minus_q_;
  std::vector<double> memo_;
};

inline SeriesValue excursion_series(std::uint64_t m, double lambda, std::int64_t lamp_order,
                                    double tol = kDefaultSeriesTolerance) {
  return ExcursionSeriesTable(lambda, lamp_order, tol).evaluate(m);
}

namespace detail {
inline double log_binomial_half(std::uint64_t k, std::uint64_t m) {
  const auto kd = static_cast<double>(k);
  const auto md = static_cast<double>(m);
  return std::lgamma(kd + 1.0) - std::lgamma(md + 1.0) - std::lgamma(kd - md + 1.0) -
         kd * std::log(2.0);
}

inline double nplus_factor(std::int64_t lamp_order) {
  const auto f = static_cast<double>(lamp_order);
  return (f - 1.0) * (f - 1.0) / f;
}
}  // namespace detail

/// P(R_{rho_k} = id | N_k^+ = m_pos).
inline double ret_prob_given_nplus(std::uint64_t k, std::uint64_t m_pos,
                                   ExcursionSeriesTable& series) {
  if (m_pos > k) throw DomainError("number of positive excursions exceeds k");
  return detail::nplus_factor(series.lamp_order()) * series(m_pos) * series(k - m_pos);
}

inline double ret_prob_given_nplus(std::uint64_t k, std::uint64_t m_pos, double lambda,
                                   std::int64_t lamp_order, double tol = kDefaultSeriesTolerance) {
  ExcursionSeriesTable series(lambda, lamp_order, tol);
  return ret_prob_given_nplus(k, m_pos, series);
}

/// P(R_{rho_k} = id): the conditional law averaged over N_k^+ ~ Binomial(k, 1/2).
/// Binomial weights are summed outward from the mode and cut once the
/// remaining mass cannot change the result beyond the series tolerance.
inline double ret_prob_at_rho_k(std::uint64_t k, ExcursionSeriesTable& series) {
  if (k < 1) throw DomainError("ret_prob_at_rho_k needs k >= 1");
  const double factor = detail::nplus_factor(series.lamp_order());
  const double bound = 1.0 / static_cast<double>(series.lamp_order());  // factor * S(0)^2
  const double tol = series.tolerance();
  auto term = [&](std::uint64_t m, double& log_weight) {
    log_weight = detail::log_binomial_half(k, m);
    return std::exp(log_weight) * factor * series(m) * series(k - m);
  };
  const std::uint64_t mode = k / 2;
  double lw = 0.0;
  double sum = term(mode, lw);
  const auto remaining = static_cast<double>(k + 1);
  for (std::uint64_t m = mode; m-- > 0;) {
    sum += term(m, lw);
    if (remaining * std::exp(lw) * bound < tol * sum) break;
  }
  for (std::uint64_t m = mode + 1; m <= k; ++m) {
    sum += term(m, lw);
    if (remaining * std::exp(lw) * bound < tol * sum) break;
  }
  return sum;
}

inline double ret_prob_at_rho_k(std::uint64_t k, double lambda, std::int64_t lamp_order,
                                double tol = kDefaultSeriesTolerance) {
  ExcursionSeriesTable series(lambda, lamp_order, tol);
  return ret_prob_at_rho_k(k, series);
}

/// P(rho_1 = 2t) = Catalan(t-1) p^t (1-p)^{t-1}.
inline double rho1_pmf(std::uint64_t t, double p) {
  if (t < 1) throw DomainError("rho1_pmf needs t >= 1");
  require_drift(p);
  const auto td = static_cast<double>(t);
  const double log_catalan = std::lgamma(2.0 * td - 1.0) - std::lgamma(td) - std::lgamma(td + 1.0);
  return std::exp(log_catalan + td * std::log(p) + (td - 1.0) * std::log1p(-p));
}

/// E[exp(s rho_1)] for s below the abscissa s0.
inline double mgf_rho1(double s, double p) {
  require_drift(p);
  const double s0 = 0.5 * std::log(1.0 / (4.0 * p * (1.0 - p)));
  if (!(s < s0)) throw DomainError("mgf of rho_1 diverges for s >= s0");
  const double x = 4.0 * p * (1.0 - p) * std::exp(2.0 * s);
  return (1.0 - std::sqrt(1.0 - x)) / (2.0 * (1.0 - p));
}

inline double expected_return_time(std::uint64_t k, double p) {
  require_drift(p);
  return static_cast<double>(k) * 2.0 * p / (2.0 * p - 1.0);
}

/// Upper bound on P(max_{i < tau_o^+} dist(o, Z_i) >= r) from gluing spheres:
/// (1/deg o) (sum_{i<r} lambda^i / |∂_E B_i|)^{-1}. Zero when some ball has
/// no edge boundary (the walk cannot get that far).
inline double escape_prob_bound(const RootedGraph& graph, double lambda, int r) {
  if (r < 1) throw DomainError("escape bound needs r >= 1");
  if (!(lambda >= 1.0)) throw DomainError("homesick lambda must be >= 1");
  double resistance = 0.0;
  for (int i = 0; i < r; ++i) {
    const std::size_t boundary = graph.edge_boundary_size(i);
    if (boundary == 0) return 0.0;
    resistance += std::pow(lambda, i) / static_cast<double>(boundary);
  }
  return 1.0 / (static_cast<double>(graph.degree(graph.root())) * resistance);
}

struct RangeTailBound {
  std::uint64_t n;
  double bound;  // upper bound on P(|range(Z_{rho_k})| <= n / 4)
};

/// N = min(|B_{c log k / log lambda}|, floor((lambda - 1)/deg o * k^{1-c}))
/// and the tail bound exp(-N/8).
inline RangeTailBound range_lower_tail_bound(std::uint64_t k, double lambda, std::size_t deg_root,
                                             const std::function<std::size_t(int)>& ball_size,
                                             double c) {
  require_lambda(lambda);
  if (!(c > 0.0 && c < 1.0)) throw DomainError("range bound needs 0 < c < 1");
  if (deg_root == 0) throw DomainError("root degree must be positive");
  const auto deg = static_cast<double>(deg_root);
  const auto kd = static_cast<double>(k);
  const double threshold = std::pow(5.0 * (lambda - 1.0) / deg, 1.0 / c);
  if (!(kd >= threshold) || k == 0)
    throw DomainError("range bound needs k >= (5(lambda-1)/deg o)^{1/c}");
  const int radius = static_cast<int>(std::floor(c * std::log(kd) / std::log(lambda)));
  const auto ball = static_cast<std::uint64_t>(ball_size(radius));
  const auto linear =
      static_cast<std::uint64_t>(std::floor((lambda - 1.0) / deg * std::pow(kd, 1.0 - c)));
  const std::uint64_t n = std::min(ball, linear);
  return {n, std::exp(-static_cast<double>(n) / 8.0)};
}

inline RangeTailBound range_lower_tail_bound(std::uint64_t k, double lambda,
                                             const RootedGraph& graph, double c) {
  return range_lower_tail_bound(k, lambda, graph.degree(graph.root()),
                                [&](int r) { return graph.ball_size(r); }, c);
}

/// Product over visited vertices of mu^{*(2 count)}(id).
inline double ret_prob_given_local_times(
    std::span<const std::pair<Vertex, std::uint64_t>> local_times, const SwitchMeasure& measure) {
  std::uint64_t max_count = 0;
  for (const auto& [v, count] : local_times) max_count = std::max(max_count, count);
  if (local_times.empty()) return 1.0;
  const auto powers = convolution_powers_at_identity(measure, 2 * max_count);
  double product = 1.0;
  for (const auto& [v, count] : local_times) product *= powers[2 * count];
  return product;
}

/// P(R_{rho_j} = id) for j = 1..k_max (index j - 1).
inline std::vector<double> ret_probs_at_rho(std::uint64_t k_max, ExcursionSeriesTable& series) {
  std::vector<double> out;
  out.reserve(k_max);
  for (std::uint64_t j = 1; j <= k_max; ++j) out.push_back(ret_prob_at_rho_k(j, series));
  return out;
}

/// E[xi(id, rho_k)] = 1 + sum_{j <= k} P(R_{rho_j} = id).
inline double local_time_partial_sum(std::uint64_t k, double lambda, std::int64_t lamp_order,
                                     double tol = kDefaultSeriesTolerance) {
  ExcursionSeriesTable series(lambda, lamp_order, tol);
  double sum = 1.0;
  for (std::uint64_t j = 1; j <= k; ++j) sum += ret_prob_at_rho_k(j, series);
  return sum;
}

}  // namespace lamplighter::exact
