#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lamplighter/error.hpp"
#include "lamplighter/rng.hpp"

namespace lamplighter {

using LampElement = std::int64_t;

/// Relative tolerance for comparing probabilities.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Entries of a convolution power below this are dropped.
inline constexpr double kUnderflowFloor = 1e-300;

/// An abelian lamp group: the cyclic group Z/mZ (elements 0..m-1) or the
/// integers. Order 1 is accepted and stands for the trivial group.
class LampGroup {
 public:
  enum class Kind { cyclic, integers };

  static LampGroup cyclic(std::int64_t order) {
    if (order < 1) throw DomainError("cyclic lamp group needs order >= 1");
    return LampGroup(Kind::cyclic, order);
  }
  static LampGroup integers() { return LampGroup(Kind::integers, 0); }

  Kind kind() const noexcept { return kind_; }
  bool is_finite() const noexcept { return kind_ == Kind::cyclic; }
  /// Group order, 0 for the integers.
  std::int64_t order() const noexcept { return order_; }

  static constexpr LampElement identity() noexcept { return 0; }

  LampElement compose(LampElement a, LampElement b) const noexcept {
    if (kind_ == Kind::integers) return a + b;
    LampElement s = a + b;
    if (s >= order_) s -= order_;
    return s;
  }

  LampElement inverse(LampElement a) const noexcept {
    if (kind_ == Kind::integers) return -a;
    return a == 0 ? 0 : order_ - a;
  }

  /// Canonical representative of an arbitrary integer.
  LampElement normalize(LampElement a) const noexcept {
    if (kind_ == Kind::integers) return a;
    LampElement r = a % order_;
    return r < 0 ? r + order_ : r;
  }

  bool contains(LampElement a) const noexcept {
    return kind_ == Kind::integers || (a >= 0 && a < order_);
  }

  std::string describe() const {
    return kind_ == Kind::integers ? "integers" : "cyclic(" + std::to_string(order_) + ")";
  }

  friend bool operator==(const LampGroup&, const LampGroup&) = default;

 private:
  LampGroup(Kind kind, std::int64_t order) : kind_(kind), order_(order) {}

  Kind kind_;
  std::int64_t order_;
};

struct SwitchAtom {
  LampElement element;
  double probability;

  friend bool operator==(const SwitchAtom&, const SwitchAtom&) = default;
};

/// Finitely supported, symmetric, non-degenerate probability measure on a
/// lamp group. Validated at construction; immutable afterwards.
class SwitchMeasure {
 public:
  SwitchMeasure(LampGroup group, std::vector<SwitchAtom> support)
      : group_(group), support_(std::move(support)) {
    validate();
    cumulative_.reserve(support_.size());
    double acc = 0.0;
    for (const auto& atom : support_) {
      acc += atom.probability;
      cumulative_.push_back(acc);
    }
    uniform_ = group_.is_finite() &&
               static_cast<std::int64_t>(support_.size()) == group_.order() &&
               std::all_of(support_.begin(), support_.end(), [&](const SwitchAtom& a) {
                 return a.probability == support_.front().probability;
               });
  }

  const LampGroup& group() const noexcept { return group_; }
  std::span<const SwitchAtom> support() const noexcept { return support_; }

  /// True when the measure is uniform on a finite group.
  bool is_uniform() const noexcept { return uniform_; }

  double probability(LampElement h) const noexcept {
    auto it = std::lower_bound(support_.begin(), support_.end(), h,
                               [](const SwitchAtom& a, LampElement e) { return a.element < e; });
    return (it != support_.end() && it->element == h) ? it->probability : 0.0;
  }

  /// Largest |h| over the support (integer lamps).
  LampElement max_abs_element() const noexcept {
    LampElement r = 0;
    for (const auto& atom : support_) r = std::max(r, atom.element < 0 ? -atom.element : atom.element);
    return r;
  }

  template <class Rng>
  LampElement sample(Rng& rng) const {
    if (uniform_) return static_cast<LampElement>(uniform_below(rng, support_.size()));
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return support_[static_cast<std::size_t>(it - cumulative_.begin())].element;
  }

 private:
  void validate() {
    if (support_.empty()) throw DomainError("switch measure has empty support");
    for (auto& atom : support_) {
      if (!group_.contains(atom.element))
        throw DomainError("switch measure element " + std::to_string(atom.element) +
                          " is not in " + group_.describe());
      if (!(atom.probability > 0.0 && atom.probability <= 1.0))
        throw DomainError("switch measure probabilities must lie in (0, 1]");
    }
    std::sort(support_.begin(), support_.end(),
              [](const SwitchAtom& a, const SwitchAtom& b) { return a.element < b.element; });
    for (std::size_t i = 1; i < support_.size(); ++i)
      if (support_[i].element == support_[i - 1].element)
        throw DomainError("switch measure lists element " + std::to_string(support_[i].element) +
                          " twice");

    double total = 0.0;
    for (const auto& atom : support_) total += atom.probability;
    if (std::abs(total - 1.0) > kProbabilityTolerance)
      throw DomainError("switch measure probabilities sum to " + std::to_string(total));

    for (const auto& atom : support_) {
      const double mirrored = probability(group_.inverse(atom.element));
      if (std::abs(mirrored - atom.probability) >
          kProbabilityTolerance * std::max(mirrored, atom.probability))
        throw DomainError("switch measure is not symmetric at element " +
                          std::to_string(atom.element));
    }

    // The support generates the group iff the gcd of its elements (and of
    // the order, for cyclic groups) is 1.
    std::int64_t g = group_.is_finite() ? group_.order() : 0;
    for (const auto& atom : support_) g = std::gcd(g, atom.element);
    if (g != 1)
      throw DomainError("switch measure support does not generate " + group_.describe());
  }

  LampGroup group_;
  std::vector<SwitchAtom> support_;
  std::vector<double> cumulative_;
  bool uniform_ = false;
};

inline SwitchMeasure make_uniform_measure(const LampGroup& group) {
  if (!group.is_finite()) throw DomainError("no uniform measure on the integer lamp group");
  std::vector<SwitchAtom> atoms;
  const double w = 1.0 / static_cast<double>(group.order());
  for (LampElement h = 0; h < group.order(); ++h) atoms.push_back({h, w});
  return SwitchMeasure(group, std::move(atoms));
}

template <class Rng>
LampElement sample_switch(const SwitchMeasure& measure, Rng& rng) {
  return measure.sample(rng);
}

namespace detail {

// Dense distribution on a window of the lamp group. Cyclic groups use the
// whole group; integer lamps use [-offset, offset].
struct DenseLampDistribution {
  LampGroup group;
  LampElement offset = 0;
  std::vector<double> mass;

  static DenseLampDistribution point_mass(const LampGroup& g) {
    DenseLampDistribution d{g, 0, {}};
    d.mass.assign(g.is_finite() ? static_cast<std::size_t>(g.order()) : 1, 0.0);
    d.mass[0] = 1.0;
    return d;
  }

  double at(LampElement h) const {
    if (group.is_finite()) return mass[static_cast<std::size_t>(group.normalize(h))];
    const LampElement idx = h + offset;
    if (idx < 0 || idx >= static_cast<LampElement>(mass.size())) return 0.0;
    return mass[static_cast<std::size_t>(idx)];
  }

  DenseLampDistribution convolve(const SwitchMeasure& mu) const {
    DenseLampDistribution next{group, offset, {}};
    if (group.is_finite()) {
      const auto m = static_cast<std::size_t>(group.order());
      next.mass.assign(m, 0.0);
      for (std::size_t x = 0; x < m; ++x) {
        if (mass[x] == 0.0) continue;
        for (const auto& atom : mu.support()) {
          const auto y = static_cast<std::size_t>(
              group.compose(static_cast<LampElement>(x), atom.element));
          next.mass[y] += mass[x] * atom.probability;
        }
      }
    } else {
      const LampElement reach = mu.max_abs_element();
      next.offset = offset + reach;
      next.mass.assign(mass.size() + 2 * static_cast<std::size_t>(reach), 0.0);
      for (std::size_t x = 0; x < mass.size(); ++x) {
        if (mass[x] == 0.0) continue;
        for (const auto& atom : mu.support()) {
          const auto y = static_cast<std::size_t>(static_cast<LampElement>(x) + reach + atom.element);
          next.mass[y] += mass[x] * atom.probability;
        }
      }
    }
    for (auto& v : next.mass)
      if (v < kUnderflowFloor) v = 0.0;
    return next;
  }
};

}  // namespace detail

/// The n-fold convolution power of `measure` as a sorted support list.
inline std::vector<SwitchAtom> convolution_power(const SwitchMeasure& measure, std::size_t n) {
  auto dist = detail::DenseLampDistribution::point_mass(measure.group());
  for (std::size_t i = 0; i < n; ++i) dist = dist.convolve(measure);
  std::vector<SwitchAtom> out;
  for (std::size_t i = 0; i < dist.mass.size(); ++i)
    if (dist.mass[i] > 0.0)
      out.push_back({static_cast<LampElement>(i) - dist.offset, dist.mass[i]});
  return out;
}

/// mu^{*n}(id) for n = 0..max_n.
inline std::vector<double> convolution_powers_at_identity(const SwitchMeasure& measure,
                                                          std::size_t max_n) {
  std::vector<double> out;
  out.reserve(max_n + 1);
  auto dist = detail::DenseLampDistribution::point_mass(measure.group());
  out.push_back(1.0);
  for (std::size_t i = 1; i <= max_n; ++i) {
    dist = dist.convolve(measure);
    out.push_back(dist.at(LampGroup::identity()));
  }
  return out;
}

inline double convolution_power_at_identity(const SwitchMeasure& measure, std::size_t n) {
  return convolution_powers_at_identity(measure, n).back();
}

}  // namespace lamplighter
