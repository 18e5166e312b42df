#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rmt/errors.hpp"
#include "rmt/inference.hpp"
#include "rmt/laws.hpp"
#include "rmt/linalg.hpp"

namespace rmt {

// Splittable counter-seeded generator (splitmix64 core). Replicate r of a
// run with master seed s draws from stream(s, r); the derivation is a pure
// integer mix, so execution order and thread count never matter.
class Rng {
public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static Rng stream(std::uint64_t seed, std::uint64_t replicate) {
    return Rng(mix(mix(seed) + replicate));
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1), never exactly 0 or 1.
  double uniform() { return ((double)(next() >> 11) + 0.5) * 0x1p-53; }

  // Standard normal via Box-Muller; the second deviate is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u = uniform(), v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 2.0 * M_PI * v;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

struct SimConfig {
  std::uint64_t seed = 0;
  int replicates = 1;
  bool center = true; // subtract per-variable sample means
  int threads = 0;    // 0: hardware default (capped by RMT_INFER_THREADS)

  void validate() const {
    if (replicates < 1) throw domain_error("SimConfig: replicates >= 1 required");
  }
};

namespace detail {

inline int resolve_threads(int requested) {
  int t = requested > 0 ? requested : (int)std::thread::hardware_concurrency();
  if (t < 1) t = 1;
  if (const char* env = std::getenv("RMT_INFER_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) t = std::min(t, cap);
  }
  return t;
}

// Index-parallel loop; results must be written by index so scheduling
// cannot affect output. The first exception aborts the whole set.
inline void parallel_for(int count, int threads,
                         const std::function<void(int)>& body) {
  threads = std::min(resolve_threads(threads), count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed.load()) std::rethrow_exception(error);
}

} // namespace detail

// p x n matrix of independent N_p(0, cov) columns.
inline Matrix sample_data_matrix(int p, int n, const SymMatrix& cov, Rng& rng) {
  if (p < 1 || n < 1) throw domain_error("sample_data_matrix: p, n >= 1 required");
  if (cov.order() != p) throw domain_error("sample_data_matrix: cov order != p");
  const LowerTriangular l = cholesky(cov);
  Matrix x(p, n);
  std::vector<double> z(p);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < p; ++i) z[i] = rng.normal();
    for (int i = p - 1; i >= 0; --i) {
      double s = 0.0;
      for (int k = 0; k <= i; ++k) s += l(i, k) * z[k];
      x(i, j) = s;
    }
  }
  return x;
}

// Spiked covariance is diagonal: scale the leading rows directly.
inline Matrix sample_data_matrix(int p, int n, const SpikedModel& model,
                                 Rng& rng) {
  if (p < 1 || n < 1) throw domain_error("sample_data_matrix: p, n >= 1 required");
  model.validate();
  if ((int)model.spikes.size() > p)
    throw domain_error("sample_data_matrix: more spikes than dimensions");
  Matrix x(p, n);
  const double base_sd = std::sqrt(model.base_var);
  for (int i = 0; i < p; ++i) {
    const double sd =
        i < (int)model.spikes.size() ? std::sqrt(model.spikes[i]) : base_sd;
    for (int j = 0; j < n; ++j) x(i, j) = sd * rng.normal();
  }
  return x;
}

inline Matrix sample_data_matrix(int p, int n, Rng& rng) {
  return sample_data_matrix(p, n, SymMatrix::identity(p), rng);
}

struct EmpiricalSummary {
  std::vector<double> sorted;

  double ecdf(double x) const {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return (double)(it - sorted.begin()) / (double)sorted.size();
  }
  double quantile(double p) const {
    const double idx = p * (double)(sorted.size() - 1);
    const std::size_t lo = (std::size_t)idx;
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double f = idx - (double)lo;
    return (1.0 - f) * sorted[lo] + f * sorted[hi];
  }
  double mean() const {
    double s = 0.0;
    for (double v : sorted) s += v;
    return s / (double)sorted.size();
  }
  double sd() const {
    const double m = mean();
    double s = 0.0;
    for (double v : sorted) s += (v - m) * (v - m);
    return std::sqrt(s / (double)(sorted.size() - 1));
  }
};

inline EmpiricalSummary make_summary(std::vector<double> samples) {
  if (samples.empty()) throw domain_error("make_summary: empty sample set");
  std::sort(samples.begin(), samples.end());
  return EmpiricalSummary{std::move(samples)};
}

// Sup-norm distance between the ECDF of `samples` and `reference_cdf`.
template <typename F>
inline double ks_distance(const std::vector<double>& samples, F&& reference_cdf) {
  if (samples.empty()) throw domain_error("ks_distance: empty sample set");
  std::vector<double> s(samples);
  std::sort(s.begin(), s.end());
  const double m = (double)s.size();
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = reference_cdf(s[i]);
    d = std::max(d, std::max(std::abs((double)(i + 1) / m - f),
                             std::abs((double)i / m - f)));
  }
  return d;
}

struct LargestRootSim {
  EnsembleCase ensemble;
  CenterScale cs;              // for the effective degrees of freedom
  bool centered = false;
  int effective_n = 0;         // single case: n - 1 when centered
  std::vector<double> raw;          // per replicate, in replicate order
  std::vector<double> standardized; // per replicate
  EmpiricalSummary summary;         // sorted standardized values
};

// Null Monte Carlo of the largest-root statistic. Single Wishart draws a
// p x n Gaussian data matrix (statistic n * l1 of S); double Wishart draws
// the two Wisharts directly and takes the top generalized root.
inline LargestRootSim simulate_largest_root(const SimConfig& config,
                                            const EnsembleCase& c) {
  config.validate();
  c.validate();
  if (c.field != Field::Real)
    throw domain_error("simulate_largest_root: real-field cases only");

  LargestRootSim out;
  out.ensemble = c;
  out.raw.resize(config.replicates);
  out.standardized.resize(config.replicates);

  if (c.family == Family::Single) {
    out.centered = config.center;
    // Centering each variable costs one degree of freedom: the centered
    // cross product is W_p(n-1, I), so standardize with n-1.
    out.effective_n = config.center ? c.n - 1 : c.n;
    if (out.effective_n < 1)
      throw domain_error("simulate_largest_root: n too small after centering");
    EnsembleCase eff = c;
    eff.n = out.effective_n;
    out.cs = center_scale(eff);
    detail::parallel_for(config.replicates, config.threads, [&](int r) {
      Rng rng = Rng::stream(config.seed, (std::uint64_t)r);
      Matrix x = sample_data_matrix(c.p, c.n, rng);
      if (config.center) center_rows(x);
      const double l1 = sym_eig(cross_product(x)).values.front();
      out.raw[r] = l1; // = n * l1_hat with S = n^{-1} X X^T
      out.standardized[r] = (l1 - out.cs.mu) / out.cs.sigma;
    });
  } else {
    out.centered = false;
    out.cs = center_scale(c);
    detail::parallel_for(config.replicates, config.threads, [&](int r) {
      Rng rng = Rng::stream(config.seed, (std::uint64_t)r);
      const Matrix ya = sample_data_matrix(c.p, c.n1, rng);
      const Matrix yb = sample_data_matrix(c.p, c.n2, rng);
      const SymMatrix a = cross_product(ya);
      const SymMatrix b = cross_product(yb);
      SymMatrix m(c.p);
      for (int i = 0; i < c.p; ++i)
        for (int j = 0; j <= i; ++j) m.at(i, j) = a(i, j) + b(i, j);
      const double x1 = generalized_eig(a, m).values.front();
      out.raw[r] = x1;
      out.standardized[r] = (x1 - out.cs.mu) / out.cs.sigma;
    });
  }
  out.summary = make_summary(out.standardized);
  return out;
}

struct MPSim {
  MPLaw law;
  int n = 0, p = 0;
  std::vector<double> eigenvalues; // replicate-major, descending within each
  EmpiricalSummary summary;        // pooled, sorted
  double ks = 0.0;                 // against mp_cdf
};

// Pools all p eigenvalues of S = n^{-1} X X^T (null, identity covariance)
// across replicates and compares to the MP law at gamma = p/n.
inline MPSim simulate_mp(const SimConfig& config, int n, int p) {
  config.validate();
  if (n < 1 || p < 1) throw domain_error("simulate_mp: n, p >= 1 required");
  MPSim out;
  out.n = n;
  out.p = p;
  out.law = mp_law((double)p / (double)n);
  out.eigenvalues.resize((std::size_t)config.replicates * p);
  const int n_eff = config.center ? n - 1 : n;
  if (n_eff < 1) throw domain_error("simulate_mp: n too small after centering");
  detail::parallel_for(config.replicates, config.threads, [&](int r) {
    Rng rng = Rng::stream(config.seed, (std::uint64_t)r);
    Matrix x = sample_data_matrix(p, n, rng);
    if (config.center) center_rows(x);
    const Spectrum sp = sym_eig(cross_product(x));
    for (int i = 0; i < p; ++i)
      out.eigenvalues[(std::size_t)r * p + i] = sp.values[i] / (double)n_eff;
  });
  out.summary = make_summary(out.eigenvalues);
  out.ks = ks_distance(out.eigenvalues,
                       [&](double t) { return mp_cdf(out.law, t); });
  return out;
}

struct SpikeSim {
  SpikedModel model;
  int n = 0, p = 0;
  std::vector<double> top_eig; // per replicate
  std::vector<double> cosine;  // |<theta_hat_1, theta_1>| per replicate
  EmpiricalSummary eig_summary;
  double mean_cosine = 0.0;
  double mean_squared_cosine = 0.0;
};

// Single-spike experiment: records the top sample eigenvalue and the
// absolute cosine with the population spike direction (first coordinate
// axis), plus both cosine moments for the overlap adjudication.
inline SpikeSim simulate_spike(const SimConfig& config, double gamma,
                               double ell1, int n) {
  config.validate();
  if (n < 2) throw domain_error("simulate_spike: n >= 2 required");
  const int p = (int)std::lround(gamma * n);
  if (p < 1) throw domain_error("simulate_spike: gamma * n rounds below 1");
  SpikeSim out;
  out.model.gamma = gamma;
  out.model.base_var = 1.0;
  out.model.spikes = {ell1};
  out.model.validate();
  out.n = n;
  out.p = p;
  out.top_eig.resize(config.replicates);
  out.cosine.resize(config.replicates);
  const int n_eff = config.center ? n - 1 : n;
  detail::parallel_for(config.replicates, config.threads, [&](int r) {
    Rng rng = Rng::stream(config.seed, (std::uint64_t)r);
    Matrix x = sample_data_matrix(p, n, out.model, rng);
    if (config.center) center_rows(x);
    const Spectrum sp = sym_eig(cross_product(x), true);
    out.top_eig[r] = sp.values.front() / (double)n_eff;
    // Population eigenvector is e_1; sign-align before recording.
    out.cosine[r] = std::abs(sp.vectors(0, 0));
  });
  out.eig_summary = make_summary(out.top_eig);
  double c1 = 0.0, c2 = 0.0;
  for (double c : out.cosine) {
    c1 += c;
    c2 += c * c;
  }
  out.mean_cosine = c1 / (double)config.replicates;
  out.mean_squared_cosine = c2 / (double)config.replicates;
  return out;
}

struct FactorModelParams {
  double beta_f = 0.6;
  double sigma_b = 0.4;
  double sigma_f = 0.01257;
  double sigma_e = 0.0671;
  int num_factors = 4;
  int p = 100;
  int T = 80;

  void validate() const {
    if (!(beta_f > 0.0 && sigma_b > 0.0 && sigma_f > 0.0 && sigma_e > 0.0))
      throw domain_error("FactorModelParams: parameters must be positive");
    if (num_factors < 1 || num_factors > p || T < 2)
      throw domain_error("FactorModelParams: invalid dimensions");
  }
};

struct HardingRow {
  int p = 0;
  std::vector<double> mean_top_eigs; // top 10 sample eigenvalues, averaged
  double ell1 = 0.0;
  double ell2 = 0.0;
  double base = 0.0;
  double threshold = 0.0;
  double mp_edge = 0.0;
  double predicted_top = 0.0; // supercritical mean for ell1
};

// Factor-model reproduction: R = B F + E with b ~ N(beta_f, sigma_b^2),
// f ~ N(0, sigma_f^2), e ~ N(0, sigma_e^2); sample covariance spectrum
// versus population eigenvalues and the detection threshold, on a p grid.
inline std::vector<HardingRow> simulate_brown_harding(
    const FactorModelParams& params, const SimConfig& config,
    std::vector<int> p_grid = {}) {
  params.validate();
  config.validate();
  if (p_grid.empty())
    for (int p = 50; p <= 200; p += 25) p_grid.push_back(p);

  std::vector<HardingRow> rows(p_grid.size());
  const int k = params.num_factors, T = params.T;
  for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
    const int p = p_grid[pi];
    HardingRow& row = rows[pi];
    row.p = p;
    const BrownEigs be = brown_population_eigs(p, params.beta_f, params.sigma_b,
                                               params.sigma_f, params.sigma_e);
    row.ell1 = be.ell1;
    row.ell2 = be.ell2;
    row.base = be.base;
    const Detectability det = detectability(p, T, params.sigma_e, be.ell2);
    row.threshold = det.threshold;
    row.mp_edge = det.mp_edge;
    SpikedModel spike;
    spike.gamma = (double)p / (double)T;
    spike.base_var = be.base;
    spike.spikes = {be.ell1};
    row.predicted_top = spike_predict(spike, 0, T).mean;

    const int keep = std::min(10, p);
    std::vector<double> acc((std::size_t)config.replicates * keep);
    detail::parallel_for(config.replicates, config.threads, [&](int r) {
      Rng rng = Rng::stream(config.seed,
                            pi * (std::uint64_t)config.replicates + r);
      Matrix ret(p, T);
      std::vector<double> b((std::size_t)p * k);
      for (double& v : b) v = params.beta_f + params.sigma_b * rng.normal();
      std::vector<double> f((std::size_t)k * T);
      for (double& v : f) v = params.sigma_f * rng.normal();
      for (int i = 0; i < p; ++i)
        for (int t = 0; t < T; ++t) {
          double s = params.sigma_e * rng.normal();
          for (int nu = 0; nu < k; ++nu)
            s += b[(std::size_t)i * k + nu] * f[(std::size_t)nu * T + t];
          ret(i, t) = s;
        }
      if (config.center) center_rows(ret);
      const Spectrum sp = sym_eig(cross_product(ret));
      const double n_eff = config.center ? T - 1 : T;
      for (int i = 0; i < keep; ++i)
        acc[(std::size_t)r * keep + i] = sp.values[i] / n_eff;
    });
    row.mean_top_eigs.assign(keep, 0.0);
    for (int r = 0; r < config.replicates; ++r)
      for (int i = 0; i < keep; ++i)
        row.mean_top_eigs[i] += acc[(std::size_t)r * keep + i];
    for (double& v : row.mean_top_eigs) v /= (double)config.replicates;
  }
  return rows;
}

} // namespace rmt
