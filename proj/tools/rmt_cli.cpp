#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmt/rmt.hpp"

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_envelope(const std::string& command, const json& params,
                   std::uint64_t seed, const json& payload) {
  json env;
  env["command"] = command;
  env["params"] = params;
  env["seed"] = seed;
  env["version"] = rmt::kVersion;
  env["payload"] = payload;
  std::cout << env.dump(2) << "\n";
}

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Delimited text, rows = observations by default. Returns the library's
// p x n orientation (variables x observations).
rmt::Matrix read_data_matrix(const std::string& path, bool transpose) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open data file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    bool parse_failed = false;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size() || !std::isfinite(v)) throw std::exception();
        row.push_back(v);
      } catch (...) {
        parse_failed = true;
        break;
      }
    }
    if (row.empty() && !parse_failed) continue; // blank line
    if (parse_failed) {
      if (first_content_line) { // header row
        first_content_line = false;
        continue;
      }
      throw io_error("non-numeric cell in data file: " + path);
    }
    first_content_line = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw io_error("ragged rows in data file: " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error("empty data file: " + path);
  const int r = (int)rows.size(), c = (int)rows.front().size();
  // Default orientation: file rows are observations, columns variables.
  const int p = transpose ? r : c;
  const int n = transpose ? c : r;
  if (n < 2) throw io_error("need at least 2 observations: " + path);
  rmt::Matrix x(p, n);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      if (transpose)
        x(i, j) = rows[i][j];
      else
        x(j, i) = rows[i][j];
    }
  return x;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write output file: " + path);
  return out;
}

json test_result_payload(const rmt::TestResult& tr) {
  json p;
  p["raw_statistic"] = tr.raw_statistic;
  p["standardized"] = tr.standardized;
  p["p_value"] = tr.p_value;
  p["mu"] = tr.cs.mu;
  p["sigma"] = tr.cs.sigma;
  p["beta"] = tr.ensemble.beta();
  return p;
}

// ---------------------------------------------------------------- tw ----

int run_tw(int beta, bool has_cdf, double s, bool has_quantile, double prob,
           bool table) {
  const rmt::TWDistribution& dist = rmt::tw_table(beta);
  if (table) {
    std::cout << "s,cdf\n";
    for (std::size_t i = 0; i < dist.grid.size(); ++i)
      std::cout << fmt17(dist.grid[i]) << "," << fmt17(dist.cdf[i]) << "\n";
    return 0;
  }
  json params, payload;
  params["beta"] = beta;
  if (has_cdf) {
    params["s"] = s;
    payload["cdf"] = rmt::tw_cdf(dist, s);
  } else if (has_quantile) {
    params["p"] = prob;
    payload["quantile"] = rmt::tw_quantile(dist, prob);
  }
  emit_envelope("tw", params, 0, payload);
  return 0;
}

// -------------------------------------------------------------- test ----

int run_test(const std::string& which, bool complex_field, int n, int p,
             int n1, int n2, bool has_stat, double stat,
             const std::string& data, const std::string& data2,
             bool transpose) {
  const rmt::Field field =
      complex_field ? rmt::Field::Complex : rmt::Field::Real;
  json params;
  params["family"] = which;
  params["field"] = complex_field ? "complex" : "real";

  rmt::TestResult tr;
  if (which == "single") {
    if (!data.empty()) {
      if (complex_field)
        throw rmt::domain_error("data ingestion supports real field only");
      rmt::Matrix x = read_data_matrix(data, transpose);
      rmt::center_rows(x);
      const int n_eff = x.cols - 1; // centering costs one degree of freedom
      const double l1 = rmt::sym_eig(rmt::cross_product(x)).values.front();
      const auto c = rmt::EnsembleCase::single(field, n_eff, x.rows);
      tr = rmt::largest_root_test(c, l1 / (double)n_eff);
      params["n"] = n_eff;
      params["p"] = x.rows;
      params["data"] = data;
    } else if (has_stat) {
      if (n < 1 || p < 1)
        throw rmt::domain_error("test single --stat requires --n and --p");
      tr = rmt::largest_root_test(rmt::EnsembleCase::single(field, n, p), stat);
      params["n"] = n;
      params["p"] = p;
      params["stat"] = stat;
    } else {
      throw rmt::domain_error("test single needs --stat or --data");
    }
  } else {
    if (!data.empty() || !data2.empty()) {
      if (complex_field)
        throw rmt::domain_error("data ingestion supports real field only");
      if (data.empty() || data2.empty())
        throw rmt::domain_error("test double needs both --data and --data2");
      const rmt::Matrix x = read_data_matrix(data, transpose);
      const rmt::Matrix y = read_data_matrix(data2, transpose);
      const std::vector<double> r2 = rmt::canonical_correlations(x, y);
      const int pp = (int)r2.size();
      const int qq = std::max(x.rows, y.rows);
      const int nn = x.cols;
      const auto c =
          rmt::EnsembleCase::double_wishart(field, qq, nn - 1 - qq, pp);
      tr = rmt::largest_root_test(c, r2.front());
      params["p"] = pp;
      params["n1"] = qq;
      params["n2"] = nn - 1 - qq;
      params["data"] = data;
      params["data2"] = data2;
    } else if (has_stat) {
      if (p < 1 || n1 < 1 || n2 < 1)
        throw rmt::domain_error("test double --stat requires --p, --n1, --n2");
      tr = rmt::largest_root_test(
          rmt::EnsembleCase::double_wishart(field, n1, n2, p), stat);
      params["p"] = p;
      params["n1"] = n1;
      params["n2"] = n2;
      params["stat"] = stat;
    } else {
      throw rmt::domain_error("test double needs --stat or --data/--data2");
    }
  }
  emit_envelope("test " + which, params, 0, test_result_payload(tr));
  return 0;
}

// ---------------------------------------------------------------- mp ----

int run_mp(double gamma, bool has_density, double td, bool has_cdf, double tc,
           int table_n) {
  const rmt::MPLaw law = rmt::mp_law(gamma);
  if (table_n > 0) {
    std::cout << "t,density\n";
    for (int i = 0; i < table_n; ++i) {
      const double t =
          law.b_minus + (law.b_plus - law.b_minus) * i / (double)(table_n - 1);
      std::cout << fmt17(t) << "," << fmt17(rmt::mp_density(law, t)) << "\n";
    }
    return 0;
  }
  json params, payload;
  params["gamma"] = gamma;
  payload["b_minus"] = law.b_minus;
  payload["b_plus"] = law.b_plus;
  payload["atom_at_zero"] = law.atom_at_zero;
  if (has_density) {
    params["t"] = td;
    payload["density"] = rmt::mp_density(law, td);
  }
  if (has_cdf) {
    params["t"] = tc;
    payload["cdf"] = rmt::mp_cdf(law, tc);
  }
  emit_envelope("mp", params, 0, payload);
  return 0;
}

// ------------------------------------------------------------- spike ----

int run_spike(bool overlap, double gamma, double lambda, double ell,
              double base_var, int n) {
  json params, payload;
  params["gamma"] = gamma;
  if (overlap) {
    params["lambda"] = lambda;
    payload["overlap"] = rmt::overlap_limit(gamma, lambda);
    emit_envelope("spike", params, 0, payload);
    return 0;
  }
  rmt::SpikedModel model;
  model.gamma = gamma;
  model.base_var = base_var;
  model.spikes = {ell};
  const rmt::SpikePrediction pred =
      rmt::spike_predict(model, 0, n > 0 ? n : 1);
  params["ell"] = ell;
  params["base_var"] = base_var;
  payload["regime"] = pred.regime == rmt::Regime::supercritical
                          ? "supercritical"
                          : pred.regime == rmt::Regime::critical
                                ? "critical"
                                : "subcritical";
  payload["threshold"] = pred.threshold;
  payload["mean"] = pred.mean;
  payload["fluctuation_law"] =
      pred.fluctuation_law == rmt::FluctuationLaw::Gaussian ? "Gaussian" : "TW";
  if (n > 0) {
    params["n"] = n;
    payload["sd"] = pred.sd;
  }
  payload["lambda"] = model.lambda(0);
  payload["overlap"] = rmt::overlap_limit(model, 0);
  emit_envelope("spike", params, 0, payload);
  return 0;
}

// ---------------------------------------------------------- simulate ----

int run_sim_largest_root(const std::string& case_name, int n, int p, int n1,
                         int n2, const rmt::SimConfig& cfg,
                         const std::string& out) {
  rmt::EnsembleCase c;
  if (case_name == "single-real")
    c = rmt::EnsembleCase::single(rmt::Field::Real, n, p);
  else if (case_name == "double-real")
    c = rmt::EnsembleCase::double_wishart(rmt::Field::Real, n1, n2, p);
  else
    throw rmt::domain_error("unknown --case (single-real or double-real)");

  const rmt::LargestRootSim sim = rmt::simulate_largest_root(cfg, c);
  std::ofstream csv = open_csv(out);
  csv << "replicate,raw,standardized\n";
  for (int r = 0; r < cfg.replicates; ++r)
    csv << r << "," << fmt17(sim.raw[r]) << "," << fmt17(sim.standardized[r])
        << "\n";

  const rmt::TWDistribution& dist = rmt::tw_table(c.beta());
  json params, payload;
  params["case"] = case_name;
  if (c.family == rmt::Family::Single) {
    params["n"] = n;
    params["p"] = p;
  } else {
    params["n1"] = n1;
    params["n2"] = n2;
    params["p"] = p;
  }
  params["reps"] = cfg.replicates;
  params["center"] = cfg.center;
  payload["mu"] = sim.cs.mu;
  payload["sigma"] = sim.cs.sigma;
  payload["centered"] = sim.centered;
  if (c.family == rmt::Family::Single) {
    payload["effective_n"] = sim.effective_n;
    if (sim.centered)
      payload["note"] =
          "per-variable centering costs one degree of freedom; "
          "mu/sigma use n-1";
  }
  payload["ks_tw"] = rmt::ks_distance(
      sim.standardized, [&](double s) { return rmt::tw_cdf(dist, s); });
  payload["mean_standardized"] = sim.summary.mean();
  payload["sd_standardized"] = sim.summary.sd();
  payload["q95_standardized"] = sim.summary.quantile(0.95);
  payload["csv"] = out;
  emit_envelope("simulate largest-root", params, cfg.seed, payload);
  return 0;
}

int run_sim_mp(int n, int p, const rmt::SimConfig& cfg,
               const std::string& out) {
  const rmt::MPSim sim = rmt::simulate_mp(cfg, n, p);
  std::ofstream csv = open_csv(out);
  csv << "replicate,index,eigenvalue\n";
  for (int r = 0; r < cfg.replicates; ++r)
    for (int i = 0; i < p; ++i)
      csv << r << "," << i << ","
          << fmt17(sim.eigenvalues[(std::size_t)r * p + i]) << "\n";
  json params, payload;
  params["n"] = n;
  params["p"] = p;
  params["reps"] = cfg.replicates;
  payload["gamma"] = sim.law.gamma;
  payload["b_minus"] = sim.law.b_minus;
  payload["b_plus"] = sim.law.b_plus;
  payload["ks_mp"] = sim.ks;
  payload["csv"] = out;
  emit_envelope("simulate mp", params, cfg.seed, payload);
  return 0;
}

int run_sim_spike(double gamma, double ell, int n, const rmt::SimConfig& cfg,
                  const std::string& out) {
  const rmt::SpikeSim sim = rmt::simulate_spike(cfg, gamma, ell, n);
  std::ofstream csv = open_csv(out);
  csv << "replicate,top_eigenvalue,cosine\n";
  for (int r = 0; r < cfg.replicates; ++r)
    csv << r << "," << fmt17(sim.top_eig[r]) << "," << fmt17(sim.cosine[r])
        << "\n";
  json params, payload;
  params["gamma"] = gamma;
  params["ell"] = ell;
  params["n"] = n;
  params["reps"] = cfg.replicates;
  payload["p"] = sim.p;
  payload["mean_top_eigenvalue"] = sim.eig_summary.mean();
  payload["sd_top_eigenvalue"] = sim.eig_summary.sd();
  payload["mean_cosine"] = sim.mean_cosine;
  payload["mean_squared_cosine"] = sim.mean_squared_cosine;
  const double limit = rmt::overlap_limit(sim.model, 0);
  payload["overlap_limit"] = limit;
  // Adjudicate which cosine moment the displayed limit describes.
  const double d1 = std::abs(sim.mean_cosine - limit);
  const double d2 = std::abs(sim.mean_squared_cosine - limit);
  payload["matched_moment"] = d2 <= d1 ? "squared_cosine" : "cosine";
  payload["csv"] = out;
  emit_envelope("simulate spike", params, cfg.seed, payload);
  return 0;
}

int run_sim_harding(const rmt::FactorModelParams& fm, const rmt::SimConfig& cfg,
                    const std::string& out) {
  const std::vector<rmt::HardingRow> rows =
      rmt::simulate_brown_harding(fm, cfg);
  std::ofstream csv = open_csv(out);
  csv << "p";
  for (int i = 1; i <= 10; ++i) csv << ",eig" << i;
  csv << ",ell1,ell2,base,threshold,mp_edge,predicted_top\n";
  bool ell2_below = true, tail_below_edge = true;
  for (const auto& row : rows) {
    csv << row.p;
    for (int i = 0; i < 10; ++i)
      csv << ","
          << fmt17(i < (int)row.mean_top_eigs.size() ? row.mean_top_eigs[i]
                                                     : 0.0);
    csv << "," << fmt17(row.ell1) << "," << fmt17(row.ell2) << ","
        << fmt17(row.base) << "," << fmt17(row.threshold) << ","
        << fmt17(row.mp_edge) << "," << fmt17(row.predicted_top) << "\n";
    if (!(row.ell2 < row.threshold)) ell2_below = false;
    for (std::size_t i = 1; i < row.mean_top_eigs.size(); ++i)
      if (row.mean_top_eigs[i] > 1.1 * row.mp_edge) tail_below_edge = false;
  }
  json params, payload;
  params["beta_f"] = fm.beta_f;
  params["sigma_b"] = fm.sigma_b;
  params["sigma_f"] = fm.sigma_f;
  params["sigma_e"] = fm.sigma_e;
  params["T"] = fm.T;
  params["reps"] = cfg.replicates;
  payload["rows"] = (int)rows.size();
  payload["ell2_below_threshold_all_p"] = ell2_below;
  payload["tail_eigs_below_1.1_mp_edge"] = tail_below_edge;
  payload["csv"] = out;
  emit_envelope("simulate harding", params, cfg.seed, payload);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Largest-eigenvalue inference for high-dimensional "
               "covariance and canonical-correlation problems"};
  app.require_subcommand(1);

  // tw
  auto* tw = app.add_subcommand("tw", "Tracy-Widom distribution values");
  int tw_beta = 1;
  double tw_s = 0.0, tw_p = 0.0;
  bool tw_table_flag = false;
  tw->add_option("--beta", tw_beta, "ensemble beta (1 or 2)")->required();
  auto* tw_cdf_opt = tw->add_option("--cdf", tw_s, "evaluate the CDF at s");
  auto* tw_q_opt = tw->add_option("--quantile", tw_p, "invert the CDF at p");
  tw->add_flag("--table", tw_table_flag, "emit the full table as CSV");

  // test
  auto* test = app.add_subcommand("test", "largest-root hypothesis test");
  std::string test_family;
  test->add_option("family", test_family, "single or double")
      ->required()
      ->check(CLI::IsMember({"single", "double"}));
  bool f_real = false, f_complex = false;
  test->add_flag("--real", f_real, "real-valued data (default)");
  test->add_flag("--complex", f_complex, "complex-valued data");
  int t_n = 0, t_p = 0, t_n1 = 0, t_n2 = 0;
  test->add_option("--n", t_n, "sample size (single)");
  test->add_option("--p", t_p, "dimension");
  test->add_option("--n1", t_n1, "first degrees of freedom (double)");
  test->add_option("--n2", t_n2, "second degrees of freedom (double)");
  double t_stat = 0.0;
  auto* t_stat_opt =
      test->add_option("--stat", t_stat, "observed largest eigenvalue / root");
  std::string t_data, t_data2;
  test->add_option("--data", t_data, "data file (rows = observations)");
  test->add_option("--data2", t_data2, "second block data file (double)");
  bool t_transpose = false;
  test->add_flag("--transpose", t_transpose, "file rows are variables");

  // mp
  auto* mp = app.add_subcommand("mp", "Marchenko-Pastur law");
  double mp_gamma = 0.0, mp_t = 0.0, mp_tc = 0.0;
  int mp_table_n = 0;
  mp->add_option("--gamma", mp_gamma, "aspect ratio p/n")->required();
  auto* mp_d_opt = mp->add_option("--density", mp_t, "density at t");
  auto* mp_c_opt = mp->add_option("--cdf", mp_tc, "CDF at t");
  mp->add_option("--table", mp_table_n, "emit an N-row density table as CSV");

  // spike
  auto* spike = app.add_subcommand("spike", "spiked-model predictions");
  double sp_gamma = 0.0, sp_lambda = 0.0, sp_ell = 0.0, sp_base = 1.0;
  int sp_n = 0;
  bool sp_overlap = false;
  spike->add_option("--gamma", sp_gamma, "aspect ratio p/n")->required();
  spike->add_flag("--overlap", sp_overlap, "evaluate the overlap limit");
  spike->add_option("--lambda", sp_lambda, "spike strength above base");
  spike->add_option("--ell", sp_ell, "spike eigenvalue");
  spike->add_option("--base-var", sp_base, "base variance (default 1)");
  spike->add_option("--n", sp_n, "sample size (enables the sd prediction)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo experiments");
  sim->require_subcommand(1);
  std::uint64_t s_seed = 0;
  int s_reps = 0, s_threads = 0;
  bool s_no_center = false;
  std::string s_out;
  auto add_common = [&](CLI::App* sub, int default_reps) {
    sub->add_option("--reps", s_reps, "replicates")->default_val(default_reps);
    sub->add_option("--seed", s_seed, "master seed")->required();
    sub->add_option("--out", s_out, "output CSV path")->required();
    sub->add_option("--threads", s_threads, "worker threads (0 = auto)");
    sub->add_flag("--no-center", s_no_center,
                  "skip per-variable mean centering");
  };

  auto* sl = sim->add_subcommand("largest-root", "null largest-root statistic");
  std::string sl_case = "single-real";
  int sl_n = 0, sl_p = 0, sl_n1 = 0, sl_n2 = 0;
  sl->add_option("--case", sl_case, "single-real or double-real")->required();
  sl->add_option("--n", sl_n, "sample size (single)");
  sl->add_option("--p", sl_p, "dimension");
  sl->add_option("--n1", sl_n1, "first degrees of freedom (double)");
  sl->add_option("--n2", sl_n2, "second degrees of freedom (double)");
  add_common(sl, 1000);

  auto* sm = sim->add_subcommand("mp", "pooled null spectrum vs MP law");
  int sm_n = 0, sm_p = 0;
  sm->add_option("--n", sm_n, "sample size")->required();
  sm->add_option("--p", sm_p, "dimension")->required();
  add_common(sm, 20);

  auto* ss = sim->add_subcommand("spike", "single-spike eigenvalue/overlap");
  double ss_gamma = 0.0, ss_ell = 0.0;
  int ss_n = 0;
  ss->add_option("--gamma", ss_gamma, "aspect ratio p/n")->required();
  ss->add_option("--ell", ss_ell, "spike eigenvalue")->required();
  ss->add_option("--n", ss_n, "sample size")->required();
  add_common(ss, 500);

  auto* sh = sim->add_subcommand("harding", "factor-model reproduction");
  rmt::FactorModelParams fm;
  sh->add_option("--T", fm.T, "periods (default 80)");
  sh->add_option("--beta-f", fm.beta_f, "factor loading mean");
  sh->add_option("--sigma-b", fm.sigma_b, "loading spread");
  sh->add_option("--sigma-f", fm.sigma_f, "factor scale");
  sh->add_option("--sigma-e", fm.sigma_e, "noise scale");
  add_common(sh, 50);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (tw->parsed()) {
      const int modes = (int)(bool)*tw_cdf_opt + (int)(bool)*tw_q_opt +
                        (int)tw_table_flag;
      if (modes != 1)
        throw rmt::domain_error(
            "tw needs exactly one of --cdf, --quantile, --table");
      return run_tw(tw_beta, (bool)*tw_cdf_opt, tw_s, (bool)*tw_q_opt, tw_p,
                    tw_table_flag);
    }
    if (test->parsed()) {
      if (f_real && f_complex)
        throw rmt::domain_error("choose one of --real, --complex");
      return run_test(test_family, f_complex, t_n, t_p, t_n1, t_n2,
                      (bool)*t_stat_opt, t_stat, t_data, t_data2, t_transpose);
    }
    if (mp->parsed()) {
      if (mp_table_n > 0 && ((bool)*mp_d_opt || (bool)*mp_c_opt))
        throw rmt::domain_error("mp --table excludes --density/--cdf");
      if (mp_table_n == 0 && !(bool)*mp_d_opt && !(bool)*mp_c_opt)
        throw rmt::domain_error("mp needs --density, --cdf, or --table");
      if (mp_table_n < 0 || mp_table_n == 1)
        throw rmt::domain_error("mp --table needs N >= 2");
      return run_mp(mp_gamma, (bool)*mp_d_opt, mp_t, (bool)*mp_c_opt, mp_tc,
                    mp_table_n);
    }
    if (spike->parsed()) {
      if (sp_overlap && sp_ell != 0.0)
        throw rmt::domain_error("spike --overlap uses --lambda, not --ell");
      if (!sp_overlap && sp_ell == 0.0)
        throw rmt::domain_error("spike needs --ell (or --overlap --lambda)");
      return run_spike(sp_overlap, sp_gamma, sp_lambda, sp_ell, sp_base, sp_n);
    }
    if (sim->parsed()) {
      rmt::SimConfig cfg;
      cfg.seed = s_seed;
      cfg.replicates = s_reps;
      cfg.center = !s_no_center;
      cfg.threads = s_threads;
      cfg.validate();
      if (sl->parsed())
        return run_sim_largest_root(sl_case, sl_n, sl_p, sl_n1, sl_n2, cfg,
                                    s_out);
      if (sm->parsed()) return run_sim_mp(sm_n, sm_p, cfg, s_out);
      if (ss->parsed()) return run_sim_spike(ss_gamma, ss_ell, ss_n, cfg, s_out);
      if (sh->parsed()) return run_sim_harding(fm, cfg, s_out);
    }
    throw rmt::domain_error("no command given");
  } catch (const rmt::domain_error& e) {
    std::cerr << "error: domain: " << e.what() << "\n";
    return 1;
  } catch (const io_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 1;
  } catch (const rmt::numerical_error& e) {
    std::cerr << "error: numerical: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
