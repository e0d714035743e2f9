#include "rler/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "rler/errors.hpp"

namespace rler {

namespace {

constexpr double kVarianceFloor = 1e-14;
constexpr double kAnalyticTol = 1e-9;

void check_distribution(const LabelDistribution& dist) {
  if (dist.q.size() < 2) throw ContractError("label distribution needs at least two labels");
  if (dist.truth >= dist.q.size()) throw ContractError("truth index out of range");
  double total = 0.0;
  for (double v : dist.q) {
    if (!(v >= 0.0)) throw ContractError("label distribution has a negative mass");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("label distribution does not sum to 1");
}

std::vector<double> outcome_rewards(const LabelDistribution& dist, RewardKind kind) {
  if (kind == RewardKind::soft) return dist.q;
  std::vector<double> r(dist.q.size(), 0.0);
  r[dist.majority()] = 1.0;
  return r;
}

std::vector<double> oracle_outcomes(const LabelDistribution& dist) {
  std::vector<double> r(dist.q.size(), 0.0);
  r[dist.truth] = 1.0;
  return r;
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& weights, const std::vector<double>& values) {
  Moments out;
  for (std::size_t j = 0; j < values.size(); ++j) out.mean += weights[j] * values[j];
  double var = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double d = values[j] - out.mean;
    var += weights[j] * d * d;
  }
  if (var <= kVarianceFloor) throw UndefinedCorrelation("reward has zero variance");
  out.sd = std::sqrt(var);
  return out;
}

double pearson(const std::vector<double>& w, const std::vector<double>& x,
               const std::vector<double>& y) {
  const Moments mx = moments(w, x);
  const Moments my = moments(w, y);
  double cov = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) cov += w[j] * (x[j] - mx.mean) * (y[j] - my.mean);
  return cov / (mx.sd * my.sd);
}

std::vector<double> affine(std::vector<double> r, double scale, double shift) {
  if (!(scale > 0.0)) throw ContractError("reward rescaling must be positive");
  for (double& v : r) v = scale * v + shift;
  return r;
}

// Every composition of `total` into `parts` non-negative integers.
void compositions(int total, std::size_t parts, std::vector<int>& prefix,
                  const std::function<void(const std::vector<int>&)>& visit) {
  if (prefix.size() + 1 == parts) {
    prefix.push_back(total);
    visit(prefix);
    prefix.pop_back();
    return;
  }
  for (int c = 0; c <= total; ++c) {
    prefix.push_back(c);
    compositions(total - c, parts, prefix, visit);
    prefix.pop_back();
  }
}

std::string describe(const std::vector<double>& q, std::size_t truth) {
  std::ostringstream os;
  os << "q=(";
  for (std::size_t j = 0; j < q.size(); ++j) os << (j ? "," : "") << q[j];
  os << ") t=" << truth;
  return os.str();
}

// True when `wide` majorizes `narrow`; both sorted in descending order with
// equal sums and lengths.
bool majorizes(const std::vector<int>& wide, const std::vector<int>& narrow) {
  int a = 0, b = 0;
  for (std::size_t i = 0; i < wide.size(); ++i) {
    a += wide[i];
    b += narrow[i];
    if (a < b) return false;
  }
  return true;
}

LabelDistribution from_counts(const std::vector<int>& counts, std::size_t truth, int n) {
  LabelDistribution d;
  d.truth = truth;
  d.q.reserve(counts.size());
  for (int c : counts) d.q.push_back(static_cast<double>(c) / n);
  return d;
}

}  // namespace

std::size_t LabelDistribution::majority() const {
  if (q.empty()) throw ContractError("empty label distribution");
  std::size_t best = 0;
  for (std::size_t j = 1; j < q.size(); ++j) {
    if (q[j] > q[best]) best = j;
  }
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (j != best && q[j] == q[best]) throw ContractError("majority label is not unique");
  }
  return best;
}

double LabelDistribution::tail_max() const {
  const std::size_t m = majority();
  double out = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (j != m && j != truth) out = std::max(out, q[j]);
  }
  return out;
}

double LabelDistribution::power_sum(int k) const {
  double s = 0.0;
  for (double v : q) s += std::pow(v, k);
  return s;
}

Correlations closed_form_correlations(const LabelDistribution& dist) {
  check_distribution(dist);
  const double s2 = dist.power_sum(2);
  const double s3 = dist.power_sum(3);
  const double soft_var = s3 - s2 * s2;
  // A flat distribution has no majority either; report the variance first.
  if (soft_var <= kVarianceFloor) throw UndefinedCorrelation("soft reward has zero variance");
  if (dist.majority() == dist.truth) {
    throw ContractError("closed forms need the majority to differ from the truth");
  }
  const double a = dist.truth_mass();
  const double b = dist.majority_mass();
  if (a <= 0.0 || a >= 1.0) throw UndefinedCorrelation("oracle reward has zero variance");
  Correlations out;
  out.rho_hard = -std::sqrt(a * b / ((1.0 - a) * (1.0 - b)));
  out.rho_soft = -a * (s2 - a) / std::sqrt(a * (1.0 - a) * soft_var);
  return out;
}

double enumerated_correlation(const LabelDistribution& dist, RewardKind kind, double scale,
                              double shift) {
  check_distribution(dist);
  return pearson(dist.q, affine(outcome_rewards(dist, kind), scale, shift), oracle_outcomes(dist));
}

double enumerated_mse(const LabelDistribution& dist, RewardKind kind, double scale, double shift) {
  check_distribution(dist);
  const std::vector<double> r = affine(outcome_rewards(dist, kind), scale, shift);
  const std::vector<double> star = oracle_outcomes(dist);
  const Moments mr = moments(dist.q, r);
  const Moments ms = moments(dist.q, star);
  double mse = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double gap = (r[j] - mr.mean) / mr.sd - (star[j] - ms.mean) / ms.sd;
    mse += dist.q[j] * gap * gap;
  }
  return mse;
}

MseResult exact_estimator_mse(const LabelDistribution& dist, RewardKind kind) {
  check_distribution(dist);
  MseResult out;
  if (dist.majority() == dist.truth) {
    // No closed form here; the hard reward is the oracle itself.
    out.rho = kind == RewardKind::hard ? 1.0 : enumerated_correlation(dist, kind);
    if (kind == RewardKind::hard) moments(dist.q, oracle_outcomes(dist));
  } else {
    const Correlations c = closed_form_correlations(dist);
    out.rho = kind == RewardKind::hard ? c.rho_hard : c.rho_soft;
  }
  out.from_correlation = 2.0 * (1.0 - out.rho);
  out.enumerated = enumerated_mse(dist, kind);
  if (std::abs(out.from_correlation - out.enumerated) > kAnalyticTol) {
    throw std::logic_error("MSE routes disagree: " + describe(dist.q, dist.truth));
  }
  return out;
}

Correlations empirical_correlations(const LabelDistribution& dist, std::size_t group_size,
                                    RngStream& rng) {
  check_distribution(dist);
  if (group_size == 0) throw ContractError("empirical_correlations: empty group");
  const std::size_t n_labels = dist.q.size();
  std::vector<double> cdf(n_labels);
  double acc = 0.0;
  for (std::size_t j = 0; j < n_labels; ++j) cdf[j] = (acc += dist.q[j]);

  std::vector<std::size_t> draws(group_size);
  std::vector<std::size_t> counts(n_labels, 0);
  for (auto& d : draws) {
    const double u = rng.uniform() * acc;
    d = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    d = std::min(d, n_labels - 1);
    ++counts[d];
  }
  const std::size_t m = static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());

  const double g = static_cast<double>(group_size);
  std::vector<double> w(group_size, 1.0 / g), star(group_size), hard(group_size),
      soft(group_size);
  for (std::size_t i = 0; i < group_size; ++i) {
    star[i] = draws[i] == dist.truth ? 1.0 : 0.0;
    hard[i] = draws[i] == m ? 1.0 : 0.0;
    soft[i] = static_cast<double>(counts[draws[i]]) / g;
  }
  return Correlations{pearson(w, hard, star), pearson(w, soft, star)};
}

TheoremReport verify_theorem_grid(std::size_t labels, double step) {
  if (labels < 3 || labels > 5) throw ContractError("verify_theorem_grid: L must be 3, 4 or 5");
  if (!(step > 0.0 && step <= 1.0)) throw ContractError("verify_theorem_grid: step must be in (0, 1]");
  const double units = 1.0 / step;
  const int n = static_cast<int>(std::lround(units));
  if (n < 1 || std::abs(units - n) > 1e-9) {
    throw ContractError("verify_theorem_grid: step must divide 1 evenly");
  }

  TheoremReport report;
  // Sorted tails that share (truth count, majority count), for the dispersion
  // comparison; the soft correlation depends only on the tail multiset.
  std::map<std::pair<int, int>, std::map<std::vector<int>, double>> tails;

  auto record_gap = [&](const LabelDistribution& d, double gap) {
    report.max_closed_form_gap = std::max(report.max_closed_form_gap, gap);
    if (gap > kAnalyticTol) {
      std::ostringstream os;
      os << "closed form differs from enumeration by " << gap;
      report.violations.push_back({"closed_form", d.q, d.truth, os.str()});
    }
  };

  std::vector<int> prefix;
  compositions(n, labels, prefix, [&](const std::vector<int>& counts) {
    const int top = *std::max_element(counts.begin(), counts.end());
    if (std::count(counts.begin(), counts.end(), top) > 1) {
      report.skipped_ties += labels - 1;
      return;
    }
    const std::size_t m = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    for (std::size_t t = 0; t < labels; ++t) {
      if (t == m) continue;
      const LabelDistribution d = from_counts(counts, t, n);
      Correlations c;
      double rho_h_enum, rho_s_enum, mse_h, mse_s;
      try {
        c = closed_form_correlations(d);
        rho_h_enum = enumerated_correlation(d, RewardKind::hard);
        rho_s_enum = enumerated_correlation(d, RewardKind::soft);
        mse_h = enumerated_mse(d, RewardKind::hard);
        mse_s = enumerated_mse(d, RewardKind::soft);
      } catch (const UndefinedCorrelation&) {
        ++report.skipped_undefined;
        continue;
      }
      record_gap(d, std::max(std::abs(c.rho_hard - rho_h_enum), std::abs(c.rho_soft - rho_s_enum)));
      record_gap(d, std::max(std::abs(2.0 * (1.0 - c.rho_hard) - mse_h),
                             std::abs(2.0 * (1.0 - c.rho_soft) - mse_s)));

      int tail_top = 0;
      std::vector<int> tail;
      for (std::size_t j = 0; j < labels; ++j) {
        if (j == m || j == t) continue;
        tail.push_back(counts[j]);
        tail_top = std::max(tail_top, counts[j]);
      }
      std::sort(tail.rbegin(), tail.rend());

      GridPoint p;
      p.q = d.q;
      p.truth = t;
      p.majority = m;
      p.a = d.q[t];
      p.b = d.q[m];
      p.s_max = static_cast<double>(tail_top) / n;
      p.mse_hard = mse_h;
      p.mse_soft = mse_s;
      p.condition = counts[t] >= tail_top;

      if (p.condition) {
        ++report.sufficiency_checked;
        if (!(mse_s <= mse_h + kAnalyticTol)) {
          p.holds = false;
          std::ostringstream os;
          os << "a >= s_max but MSE_S=" << mse_s << " > MSE_H=" << mse_h;
          report.violations.push_back({"sufficiency", d.q, t, os.str()});
        }
      } else {
        // Necessity: move the whole tail onto one label. That label must stay
        // below the majority for (a, b, o) to keep their roles.
        const int other = n - counts[t] - counts[m];
        if (other < counts[m]) {
          ++report.necessity_checked;
          std::vector<int> concentrated(labels, 0);
          concentrated[0] = counts[m];
          concentrated[1] = counts[t];
          concentrated[2] = other;
          const LabelDistribution w = from_counts(concentrated, 1, n);
          const double wh = enumerated_mse(w, RewardKind::hard);
          const double ws = enumerated_mse(w, RewardKind::soft);
          if (!(ws > wh - kAnalyticTol)) {
            p.holds = false;
            std::ostringstream os;
            os << "concentrated tail gives MSE_S=" << ws << " <= MSE_H=" << wh;
            report.violations.push_back({"necessity", w.q, 1, os.str()});
          }
        }
      }
      report.points.push_back(std::move(p));
      tails[{counts[t], counts[m]}].emplace(tail, std::abs(c.rho_soft));
    }
  });

  for (const auto& [key, by_tail] : tails) {
    for (const auto& [wide, rho_wide] : by_tail) {
      for (const auto& [narrow, rho_narrow] : by_tail) {
        if (wide == narrow || !majorizes(wide, narrow)) continue;
        ++report.dispersion_pairs_checked;
        if (rho_narrow > rho_wide + kAnalyticTol) {
          std::vector<double> q{static_cast<double>(key.second) / n,
                                static_cast<double>(key.first) / n};
          for (int c : narrow) q.push_back(static_cast<double>(c) / n);
          std::ostringstream os;
          os << "spreading the tail raised |rho_S| from " << rho_wide << " to " << rho_narrow
             << " (concentrated tail";
          for (int c : wide) os << ' ' << static_cast<double>(c) / n;
          os << ")";
          report.violations.push_back({"dispersion", std::move(q), 1, os.str()});
        }
      }
    }
  }
  return report;
}

void write_theorem_csv(const std::filesystem::path& path, const TheoremReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "a,b,s_max,mse_h,mse_s,holds\n";
  for (const auto& p : report.points) {
    out << p.a << ',' << p.b << ',' << p.s_max << ',' << p.mse_hard << ',' << p.mse_soft << ','
        << (p.holds ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace rler
