#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "config.hpp"
#include "output.hpp"
#include "svarkit/bootstrap.hpp"
#include "svarkit/breaks.hpp"
#include "svarkit/cli.hpp"
#include "svarkit/critvals.hpp"
#include "svarkit/dynamics.hpp"
#include "svarkit/errors.hpp"
#include "svarkit/lagselect.hpp"
#include "svarkit/localproj.hpp"
#include "svarkit/parallel.hpp"
#include "svarkit/robust.hpp"
#include "svarkit/simulate.hpp"
#include "svarkit/var.hpp"
#include "svarkit/vecm.hpp"

namespace fs = std::filesystem;

namespace svarkit::cli {

namespace {

struct Options {
  DataOptions data;
  std::string out = "out";
  std::uint64_t seed = 0;
  int threads = 0;
  bool timing = false;

  int p = 1;
  int pmax = 4;
  bool no_intercept = false;
  std::string method = "ic";
  double alpha = 0.05;

  std::string scheme = "recursive";
  std::string order;
  std::string proxy;
  std::string proxy_shock = "0";
  bool allow_weak = false;
  std::string restrictions;
  int horizon = 12;
  int boot = 0;
  std::string block = "auto";
  double level = 0.9;

  std::string shock;
  std::string shock_file;

  std::string alpha_file;
  std::string beta_file;

  double trim = 0.25;
  double delta = 0.01;
  int starts = 500;

  Index bss_block = 0;
  int grid = 10;
  double grid_span = 1e-3;
  double lambda2_ratio = 0.0;
  double lambda1 = -1.0;
  double lambda2 = 0.0;
  Index a_n = 0;
  double omega = -1.0;
  bool no_demean = false;

  std::string v;
  std::string w;
  std::string variant = "endpoint";

  std::string dgp = "var";
  std::string coeffs;
  std::string sigma;
  std::string intercept;
  Index nobs = 100;
  Index burn = 100;
  double arch_a = 0.5;
  double arch_omega = -1.0;
  std::string coeffs_after;
  Index break_at = -1;
  int dgp_proxy_shock = 0;
  double proxy_strength = 1.0;
  double proxy_noise = 0.0;
  bool allow_unstable = false;

  int paths = kBridgePaths;
  int bridge_grid = kBridgeGrid;
  std::string output;
};

struct Context {
  Options o;
  CLI::App* sub = nullptr;
  bool seeded = false;
};

void require_seed(const Context& c) {
  if (!c.seeded) throw UsageError("--seed", "--seed is required for " + c.sub->get_name());
}

std::vector<std::string> shock_labels(const TimeSeriesDataset& ds) {
  std::vector<std::string> out;
  for (const auto& n : ds.names()) out.push_back("shock_" + n);
  return out;
}

json model_json(const VarModel& m, const std::vector<std::string>& names) {
  json j;
  j["variables"] = names;
  j["p"] = m.p;
  j["d"] = m.d;
  j["nobs_effective"] = m.nobs_effective;
  j["intercept"] = m.intercept ? to_json(*m.intercept) : json(nullptr);
  j["coefficients"] = to_json(m.coeffs);
  j["sigma_u"] = to_json(m.sigma_u);
  const StabilityReport s = check_stability(m);
  json st;
  st["stable"] = s.stable;
  st["boundary"] = s.boundary;
  st["spectral_radius"] = s.spectral_radius;
  json ev = json::array();
  for (const auto& e : s.eigenvalues) ev.push_back({e.real(), e.imag()});
  st["eigenvalues"] = ev;
  j["stability"] = st;
  return j;
}

CsvTable coefficient_table(const VarModel& m, const std::vector<std::string>& names) {
  CsvTable t({"equation", "regressor", "lag", "value"});
  for (Index i = 0; i < m.d; ++i) {
    if (m.intercept) t.add({names[i], "const", "0", num((*m.intercept)(i))});
    for (int l = 1; l <= m.p; ++l)
      for (Index j = 0; j < m.d; ++j)
        t.add({names[i], names[j], std::to_string(l), num(m.coeffs[l - 1](i, j))});
  }
  return t;
}

int block_length(const Options& o) {
  if (o.block == "auto") return 0;
  try {
    std::size_t pos = 0;
    const int b = std::stoi(o.block, &pos);
    if (pos == o.block.size() && b >= 1) return b;
  } catch (const std::exception&) {
  }
  throw UsageError("--block", "--block must be 'auto' or a positive integer");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "recursive") return Scheme::Recursive;
  if (s == "longrun") return Scheme::LongRun;
  if (s == "proxy") return Scheme::ProxyColumn;
  if (s == "sign") return Scheme::SignSet;
  throw UsageError("--scheme", "--scheme must be recursive, longrun, proxy or sign");
}

Vector proxy_series(const Options& o, Index rows) {
  if (o.proxy.empty()) throw UsageError("--proxy", "--proxy is required for the proxy scheme");
  const Matrix z = load_csv(o.proxy, !o.data.no_header).values();
  require(z.rows() >= rows, ErrorKind::ShapeError, "proxy series shorter than the data");
  return z.col(0).tail(rows);
}

StructuralModel structural(const Options& o, const TimeSeriesDataset& ds, const VarModel& m) {
  switch (parse_scheme(o.scheme)) {
    case Scheme::Recursive: return identify_recursive(m, variable_list(ds, o.order, "--order"));
    case Scheme::LongRun: return identify_longrun(m);
    case Scheme::ProxyColumn: {
      const Vector z = proxy_series(o, ds.rows()).tail(m.nobs_effective);
      ProxyOptions po;
      po.allow_weak = o.allow_weak;
      return identify_proxy(m, z, variable_index(ds, o.proxy_shock, "--proxy-shock"), po);
    }
    case Scheme::SignSet: break;
  }
  fail(ErrorKind::DomainError, "sign restrictions give set identification; use the irf command");
}

struct Result {
  json payload;
  std::map<std::string, CsvTable> tables;
};

// ------------------------------------------------------------------ commands

Result cmd_fit(Context& c) {
  const auto ds = load_dataset(c.o.data);
  const VarModel m = fit_var(ds, c.o.p, !c.o.no_intercept);
  Result r;
  r.payload = model_json(m, ds.names());
  r.tables.emplace("coefficients.csv", coefficient_table(m, ds.names()));
  return r;
}

Result cmd_select_lag(Context& c) {
  const auto ds = load_dataset(c.o.data);
  Result r;
  if (c.o.method == "ic") {
    const IcTable t = ic_table(ds, c.o.pmax, !c.o.no_intercept);
    CsvTable csv({"p", "log_det", "aic", "bic", "hqc"});
    json rows = json::array();
    for (const IcRow& row : t.rows) {
      csv.add({std::to_string(row.p), num(row.log_det), num(row.aic), num(row.bic), num(row.hqc)});
      rows.push_back({{"p", row.p}, {"log_det", row.log_det}, {"aic", row.aic},
                      {"bic", row.bic}, {"hqc", row.hqc}});
    }
    r.payload = {{"method", "ic"}, {"nobs", t.nobs}, {"rows", rows},
                 {"best", {{"aic", t.rows[t.best_aic].p}, {"bic", t.rows[t.best_bic].p},
                           {"hqc", t.rows[t.best_hqc].p}}}};
    r.tables.emplace("ic.csv", std::move(csv));
  } else if (c.o.method == "wald") {
    const SelectedLag s = sequential_wald(ds, c.o.pmax, c.o.alpha, !c.o.no_intercept);
    CsvTable csv({"lag", "statistic", "critical", "significant"});
    json steps = json::array();
    for (const WaldStep& w : s.trace) {
      csv.add({std::to_string(w.lag), num(w.statistic), num(w.critical),
               w.significant ? "1" : "0"});
      steps.push_back({{"lag", w.lag}, {"statistic", w.statistic}, {"critical", w.critical},
                       {"significant", w.significant}});
    }
    r.payload = {{"method", "wald"}, {"p_hat", s.p_hat}, {"trace", steps}};
    r.tables.emplace("wald.csv", std::move(csv));
  } else {
    throw UsageError("--method", "--method must be ic or wald");
  }
  return r;
}

Result sign_bounds(Context& c, const TimeSeriesDataset& ds, const VarModel& m) {
  if (c.o.restrictions.empty())
    throw UsageError("--restrictions", "--restrictions is required for the sign scheme");
  const SignRestrictionSet rs = read_restrictions(c.o.restrictions, ds);
  CsvTable csv({"horizon", "response", "shock", "lower", "upper", "ci_lower", "ci_upper"});
  json rows = json::array();
  const std::string shock = "shock_" + ds.names()[rs.target_shock];
  for (int h = 0; h <= c.o.horizon; ++h)
    for (Index i = 0; i < m.d; ++i) {
      const IrfBoundInterval b = sign_restriction_bounds(m, rs, h, i, c.o.level);
      csv.add({std::to_string(h), ds.names()[i], shock, num(b.lower), num(b.upper),
               b.has_ci ? num(b.ci_lower) : "", b.has_ci ? num(b.ci_upper) : ""});
      rows.push_back({{"horizon", h}, {"response", ds.names()[i]}, {"lower", b.lower},
                      {"upper", b.upper},
                      {"ci_lower", b.has_ci ? json(b.ci_lower) : json(nullptr)},
                      {"ci_upper", b.has_ci ? json(b.ci_upper) : json(nullptr)}});
    }
  Result r;
  r.payload = {{"scheme", "sign"}, {"level", c.o.level}, {"bounds", rows}};
  r.tables.emplace("sign_bounds.csv", std::move(csv));
  return r;
}

Result cmd_irf(Context& c) {
  if (c.o.boot > 0) require_seed(c);
  const auto ds = load_dataset(c.o.data);
  const VarModel m = fit_var(ds, c.o.p, !c.o.no_intercept);
  const Scheme scheme = parse_scheme(c.o.scheme);
  if (scheme == Scheme::SignSet) return sign_bounds(c, ds, m);
  ImpulseResponseSet set;
  int used_block = 0;
  if (c.o.boot > 0) {
    if (scheme == Scheme::ProxyColumn)
      throw UsageError("--boot", "bootstrap bands are available for recursive and longrun schemes");
    BootstrapConfig cfg;
    cfg.replicates = c.o.boot;
    cfg.block_length = block_length(c.o);
    cfg.seed = c.o.seed;
    cfg.level = c.o.level;
    SchemeSpec spec{scheme, variable_list(ds, c.o.order, "--order")};
    set = irf_ci(m, spec, c.o.horizon, cfg);
    used_block = cfg.block_length > 0 ? cfg.block_length : default_block_length(m.nobs_effective);
  } else {
    set = irf(structural(c.o, ds, m), c.o.horizon);
  }
  const auto shocks = shock_labels(ds);
  CsvTable csv({"horizon", "response", "shock", "value", "lower", "upper"});
  json theta = json::array();
  for (int h = 0; h <= set.horizon(); ++h) {
    theta.push_back(to_json(set.theta[h]));
    for (Index i = 0; i < m.d; ++i)
      for (Index k = 0; k < m.d; ++k)
        csv.add({std::to_string(h), ds.names()[i], shocks[k], num(set.theta[h](i, k)),
                 set.lower ? num((*set.lower)[h](i, k)) : "",
                 set.upper ? num((*set.upper)[h](i, k)) : ""});
  }
  Result r;
  r.payload = {{"scheme", c.o.scheme}, {"horizon", c.o.horizon}, {"shocks", shocks},
               {"theta", theta}};
  if (set.lower) {
    json lo = json::array(), hi = json::array();
    for (int h = 0; h <= set.horizon(); ++h) {
      lo.push_back(to_json((*set.lower)[h]));
      hi.push_back(to_json((*set.upper)[h]));
    }
    r.payload["lower"] = lo;
    r.payload["upper"] = hi;
    r.payload["bootstrap"] = {{"replicates", c.o.boot}, {"block_length", used_block},
                              {"level", c.o.level}};
  }
  r.tables.emplace("irf.csv", std::move(csv));
  return r;
}

Result cmd_fevd(Context& c) {
  const auto ds = load_dataset(c.o.data);
  const VarModel m = fit_var(ds, c.o.p, !c.o.no_intercept);
  const FevdTable t = fevd(structural(c.o, ds, m), c.o.horizon);
  const auto shocks = shock_labels(ds);
  CsvTable csv({"horizon", "variable", "shock", "share"});
  json shares = json::array();
  for (std::size_t h = 0; h < t.share.size(); ++h) {
    shares.push_back(to_json(t.share[h]));
    for (Index j = 0; j < m.d; ++j)
      for (Index k = 0; k < m.d; ++k)
        csv.add({std::to_string(h + 1), ds.names()[j], shocks[k], num(t.share[h](j, k))});
  }
  Result r;
  r.payload = {{"scheme", c.o.scheme}, {"horizon", c.o.horizon}, {"shocks", shocks},
               {"share", shares}};
  r.tables.emplace("fevd.csv", std::move(csv));
  return r;
}

Result cmd_hd(Context& c) {
  const auto ds = load_dataset(c.o.data);
  const VarModel m = fit_var(ds, c.o.p, !c.o.no_intercept);
  const HistoricalDecomposition hd = historical_decomposition(structural(c.o, ds, m), ds);
  const auto shocks = shock_labels(ds);
  CsvTable csv({"t", "variable", "component", "value"});
  const Index n = hd.observed.rows();
  for (Index t = 0; t < n; ++t)
    for (Index i = 0; i < m.d; ++i) {
      const std::string ts = std::to_string(t + m.p);
      csv.add({ts, ds.names()[i], "observed", num(hd.observed(t, i))});
      for (Index k = 0; k < m.d; ++k)
        csv.add({ts, ds.names()[i], shocks[k], num(hd.contribution[k](t, i))});
      csv.add({ts, ds.names()[i], "remainder", num(hd.remainder(t, i))});
    }
  Result r;
  json contrib = json::array();
  for (const Matrix& cm : hd.contribution) contrib.push_back(to_json(cm));
  r.payload = {{"scheme", c.o.scheme}, {"first_row", m.p}, {"shocks", shocks},
               {"contribution", contrib}, {"remainder", to_json(hd.remainder)},
               {"structural_shocks", to_json(hd.shocks)}};
  r.tables.emplace("hd.csv", std::move(csv));
  return r;
}

Result cmd_connect(Context& c) {
  const auto ds = load_dataset(c.o.data);
  const VarModel m = fit_var(ds, c.o.p, !c.o.no_intercept);
  const ConnectednessTable t = gfevd_connectedness(m, c.o.horizon);
  CsvTable csv({"variable", "source", "raw", "normalized"});
  for (Index i = 0; i < m.d; ++i)
    for (Index j = 0; j < m.d; ++j)
      csv.add({ds.names()[i], ds.names()[j], num(t.raw(i, j)), num(t.normalized(i, j))});
  Result r;
  r.payload = {{"horizon", t.horizon}, {"variables", ds.names()}, {"raw", to_json(t.raw)},
               {"normalized", to_json(t.normalized)}, {"from", to_json(t.from)},
               {"to", to_json(t.to)}, {"net", to_json(t.net)}, {"total", t.total}};
  r.tables.emplace("connectedness.csv", std::move(csv));
  return r;
}

Result cmd_lp(Context& c) {
  const auto ds = load_dataset(c.o.data);
  const Matrix& y = ds.values();
  LpImpulse impulse;
  std::vector<std::string> impulses = ds.names();
  if (!c.o.shock_file.empty()) {
    const Matrix z = load_csv(c.o.shock_file, !c.o.data.no_header).values();
    require(z.rows() >= y.rows(), ErrorKind::ShapeError, "shock series shorter than the data");
    impulse = Vector(z.col(0).tail(y.rows()));
    impulses = {"shock"};
  }
  CsvTable csv({"horizon", "response", "impulse", "value", "se", "nobs"});
  json rows = json::array();
  for (int h = 0; h <= c.o.horizon; ++h)
    for (Index i = 0; i < ds.cols(); ++i) {
      if (h == 0 && std::holds_alternative<std::monostate>(impulse)) continue;
      const LpEstimate e = fit_lp(y, h, c.o.p, i, impulse, !c.o.no_intercept);
      for (Index k = 0; k < e.beta.cols(); ++k) {
        csv.add({std::to_string(h), ds.names()[i], impulses[k], num(e.beta(0, k)),
                 num(e.se(0, k)), std::to_string(e.nobs)});
        rows.push_back({{"horizon", h}, {"response", ds.names()[i]}, {"impulse", impulses[k]},
                        {"value", e.beta(0, k)}, {"se", e.se(0, k)}, {"nobs", e.nobs}});
      }
    }
  Result r;
  r.payload = {{"control_lags", c.o.p}, {"estimates", rows}};
  r.tables.emplace("lp.csv", std::move(csv));
  return r;
}

Result cmd_boot(Context& c) {
  require_seed(c);
  const auto ds = load_dataset(c.o.data);
  const VarModel m = fit_var(ds, c.o.p, !c.o.no_intercept);
  BootstrapConfig cfg;
  cfg.replicates = c.o.boot > 0 ? c.o.boot : 999;
  cfg.block_length = block_length(c.o);
  cfg.seed = c.o.seed;
  cfg.level = c.o.level;
  const BootstrapDraws dr = mbb_distribution(m, cfg);
  CsvTable draws({"replicate", "parameter", "value"});
  CsvTable summary({"parameter", "estimate", "se", "lower", "upper"});
  const Index nb = dr.beta_hat.size();
  const Index ns = dr.sigma_hat.size();
  auto pname = [&](Index j) {
    if (j < nb) return "beta_" + std::to_string(j);
    return "sigma_" + std::to_string(j - nb);
  };
  json params = json::array();
  for (Index j = 0; j < nb + ns; ++j) {
    const double est = j < nb ? dr.beta_hat(j) : dr.sigma_hat(j - nb);
    std::vector<double> v;
    for (std::size_t b = 0; b < dr.beta.size(); ++b) {
      if (dr.failed[b]) continue;
      v.push_back(j < nb ? dr.beta[b](j) : dr.sigma[b](j - nb));
    }
    double mean = 0, ss = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    const auto [lo, hi] = hall_interval(est, v, cfg.level);
    summary.add({pname(j), num(est), num(se), num(lo), num(hi)});
    params.push_back({{"parameter", pname(j)}, {"estimate", est}, {"se", se}, {"lower", lo},
                      {"upper", hi}});
  }
  for (std::size_t b = 0; b < dr.beta.size(); ++b) {
    if (dr.failed[b]) continue;
    for (Index j = 0; j < nb; ++j) draws.add({std::to_string(b), pname(j), num(dr.beta[b](j))});
    for (Index j = 0; j < ns; ++j)
      draws.add({std::to_string(b), pname(nb + j), num(dr.sigma[b](j))});
  }
  Result r;
  r.payload = {{"replicates", cfg.replicates}, {"block_length", dr.block_length},
               {"level", cfg.level}, {"failures", dr.failures},
               {"parameter_order", "vec([A_1..A_p]) then vech(Sigma_u)"}, {"summary", params}};
  r.tables.emplace("boot_summary.csv", std::move(summary));
  r.tables.emplace("boot_draws.csv", std::move(draws));
  return r;
}

// alpha by least squares given beta: dy_t on [1, beta'y_{t-1}, dy_{t-1..t-p+1}]
Matrix loading_given_beta(const Matrix& y, const Matrix& beta, int p, bool intercept) {
  const Index T = y.rows();
  const Index d = y.cols();
  const Index r = beta.cols();
  require(beta.rows() == d, ErrorKind::ShapeError, "beta must have d rows");
  const Matrix dy = y.bottomRows(T - 1) - y.topRows(T - 1);
  const Index first = p;  // row in y of the first target level
  const Index n = T - first;
  require(n > d * p + r + 1, ErrorKind::InsufficientData, "sample too short for the VECM");
  const Index k = (intercept ? 1 : 0) + r + d * (p - 1);
  Matrix x(n, k);
  Matrix target(n, d);
  for (Index t = 0; t < n; ++t) {
    const Index row = first + t;
    Index c = 0;
    if (intercept) x(t, c++) = 1.0;
    x.block(t, c, 1, r) = y.row(row - 1) * beta;
    c += r;
    for (int j = 1; j < p; ++j) {
      x.block(t, c, 1, d) = dy.row(row - 1 - j);
      c += d;
    }
    target.row(t) = dy.row(row - 1);
  }
  const OlsFit f = ols(x, target);
  return f.coef.block(intercept ? 1 : 0, 0, r, d).transpose();
}

Result cmd_vecm(Context& c) {
  const auto ds = load_dataset(c.o.data);
  const VarModel m = fit_var(ds, c.o.p, !c.o.no_intercept);
  const VecmModel v = var_to_vecm(m);
  Result r;
  r.payload = {{"variables", ds.names()}, {"p", m.p}, {"pi", to_json(v.pi)},
               {"gammas", to_json(v.gammas)}, {"sigma_u", to_json(v.sigma_u)}};
  CsvTable csv({"matrix", "row", "col", "value"});
  for (Index i = 0; i < m.d; ++i)
    for (Index j = 0; j < m.d; ++j) csv.add({"pi", ds.names()[i], ds.names()[j], num(v.pi(i, j))});
  for (std::size_t g = 0; g < v.gammas.size(); ++g)
    for (Index i = 0; i < m.d; ++i)
      for (Index j = 0; j < m.d; ++j)
        csv.add({"gamma_" + std::to_string(g + 1), ds.names()[i], ds.names()[j],
                 num(v.gammas[g](i, j))});
  if (!c.o.beta_file.empty()) {
    const Matrix beta = read_matrix_file(c.o.beta_file);
    const Matrix alpha = loading_given_beta(ds.values(), beta, c.o.p, !c.o.no_intercept);
    const Matrix cmat = longrun_C(alpha, beta);
    r.payload["alpha"] = to_json(alpha);
    r.payload["beta"] = to_json(beta);
    r.payload["longrun_C"] = to_json(cmat);
    for (Index i = 0; i < alpha.rows(); ++i)
      for (Index j = 0; j < alpha.cols(); ++j)
        csv.add({"alpha", ds.names()[i], std::to_string(j), num(alpha(i, j))});
  }
  r.tables.emplace("vecm.csv", std::move(csv));
  return r;
}

Result cmd_pt(Context& c) {
  const auto ds = load_dataset(c.o.data);
  if (c.o.beta_file.empty()) throw UsageError("--beta", "--beta is required");
  const Matrix beta = read_matrix_file(c.o.beta_file);
  const Matrix alpha = c.o.alpha_file.empty()
                           ? loading_given_beta(ds.values(), beta, c.o.p, !c.o.no_intercept)
                           : read_matrix_file(c.o.alpha_file);
  const PermanentTransitory pt = gg_decompose(alpha, beta, ds);
  CsvTable csv({"t", "variable", "observed", "permanent", "transitory"});
  for (Index t = 0; t < ds.rows(); ++t)
    for (Index i = 0; i < ds.cols(); ++i)
      csv.add({std::to_string(t), ds.names()[i], num(ds.values()(t, i)),
               num(pt.permanent(t, i)), num(pt.transitory(t, i))});
  Result r;
  r.payload = {{"alpha", to_json(alpha)}, {"beta", to_json(beta)},
               {"permanent_loading", to_json(pt.permanent_loading)},
               {"transitory_loading", to_json(pt.transitory_loading)}};
  r.tables.emplace("pt.csv", std::move(csv));
  return r;
}

Result cmd_robust(Context& c) {
  require_seed(c);
  const auto ds = load_dataset(c.o.data);
  MltsSearch search;
  search.starts = c.o.starts;
  search.seed = c.o.seed;
  Result r;
  const bool select = c.sub->get_option("--pmax")->count() > 0;
  int p = c.o.p;
  if (select) {
    const IcTable t = robust_order_select(ds.values(), c.o.pmax, c.o.trim, c.o.delta, search,
                                          !c.o.no_intercept);
    CsvTable csv({"p", "log_det", "aic", "bic", "hqc"});
    json rows = json::array();
    for (const IcRow& row : t.rows) {
      csv.add({std::to_string(row.p), num(row.log_det), num(row.aic), num(row.bic), num(row.hqc)});
      rows.push_back({{"p", row.p}, {"log_det", row.log_det}, {"aic", row.aic},
                      {"bic", row.bic}, {"hqc", row.hqc}});
    }
    r.payload["order_selection"] = {{"rows", rows},
                                    {"best", {{"aic", t.rows[t.best_aic].p},
                                              {"bic", t.rows[t.best_bic].p},
                                              {"hqc", t.rows[t.best_hqc].p}}}};
    r.tables.emplace("robust_ic.csv", std::move(csv));
    p = t.rows[t.best_bic].p;
  }
  const RobustVarModel mlts = fit_mlts(ds.values(), p, c.o.trim, search, !c.o.no_intercept);
  const RobustVarModel rm = reweight_rmlts(mlts, c.o.delta);
  r.payload["p"] = p;
  r.payload["mlts"] = model_json(mlts.model, ds.names());
  r.payload["mlts"]["h"] = mlts.h;
  r.payload["mlts"]["c_factor"] = mlts.c_factor;
  r.payload["rmlts"] = model_json(rm.model, ds.names());
  r.payload["rmlts"]["kept"] = rm.h;
  r.payload["rmlts"]["c_factor"] = rm.c_factor;
  r.payload["outliers"] = rm.flagged_outliers;
  CsvTable dist({"t", "distance", "outlier"});
  std::vector<char> flag(rm.distances.size(), 0);
  for (Index k : rm.flagged_outliers) flag[k] = 1;
  for (Index t = 0; t < rm.distances.size(); ++t)
    dist.add({std::to_string(t + p), num(rm.distances(t)), flag[t] ? "1" : "0"});
  r.tables.emplace("robust_distances.csv", std::move(dist));
  r.tables.emplace("coefficients.csv", coefficient_table(rm.model, ds.names()));
  return r;
}

Result cmd_breaks(Context& c) {
  const auto ds = load_dataset(c.o.data);
  Result r;
  CsvTable cand({"t", "jump_norm", "retained"});
  std::vector<Index> finals, cands;
  std::vector<double> norms;
  if (c.o.lambda1 >= 0.0) {
    const Matrix y = c.o.no_demean ? ds.values()
                                   : Matrix(ds.values().rowwise() - ds.values().colwise().mean());
    const Index n = y.rows() - c.o.p;
    const Index b = c.o.bss_block > 0 ? c.o.bss_block
                                      : static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n))));
    const Index an = c.o.a_n > 0 ? c.o.a_n : b;
    const double omega = c.o.omega >= 0 ? c.o.omega
                                        : static_cast<double>(ds.cols() * ds.cols() * c.o.p) *
                                              std::log(static_cast<double>(n));
    const BssFit fit = bss_detect(y, c.o.p, b, c.o.lambda1, c.o.lambda2);
    const LicResult lr = lic_screen(y, fit.candidates, c.o.p, an, omega);
    cands = fit.candidates;
    norms = fit.candidate_norms;
    finals = lr.breaks;
    r.payload = {{"block", b}, {"a_n", an}, {"omega", omega}, {"lambda1", c.o.lambda1},
                 {"lambda2", c.o.lambda2}, {"converged", fit.converged},
                 {"iterations", fit.iterations}, {"lic", lr.lic}};
  } else {
    BreakConfig cfg;
    cfg.block = c.o.bss_block;
    cfg.grid = c.o.grid;
    cfg.grid_span = c.o.grid_span;
    cfg.lambda2_ratio = c.o.lambda2_ratio;
    cfg.a_n = c.o.a_n;
    cfg.omega = c.o.omega;
    cfg.demean = !c.o.no_demean;
    const BreakReport rep = detect_breaks(ds.values(), c.o.p, cfg);
    cands = rep.candidates;
    norms = rep.candidate_norms;
    finals = rep.final_breaks;
    json grid = json::array();
    for (const GridPoint& g : rep.grid)
      grid.push_back({{"lambda1", g.lambda1}, {"lambda2", g.lambda2},
                      {"candidates", g.n_candidates}, {"breaks", g.breaks}, {"score", g.score},
                      {"converged", g.converged}});
    json segs = json::array();
    for (std::size_t s = 0; s < rep.segments.size(); ++s) {
      json sj = model_json(rep.segments[s], ds.names());
      sj["rows"] = {rep.segment_rows[s].first, rep.segment_rows[s].second};
      segs.push_back(sj);
    }
    r.payload = {{"block", rep.block}, {"a_n", rep.a_n}, {"omega", rep.omega},
                 {"lambda1", rep.lambda1}, {"lambda2", rep.lambda2},
                 {"converged", rep.converged}, {"score", rep.score}, {"grid", grid},
                 {"segments", segs}};
  }
  r.payload["candidates"] = cands;
  r.payload["candidate_norms"] = norms;
  r.payload["breaks"] = finals;
  for (std::size_t i = 0; i < cands.size(); ++i)
    cand.add({std::to_string(cands[i]), num(norms[i]),
              std::find(finals.begin(), finals.end(), cands[i]) != finals.end() ? "1" : "0"});
  r.tables.emplace("breaks.csv", std::move(cand));
  return r;
}

Result cmd_cusum(Context& c) {
  const auto ds = load_dataset(c.o.data);
  const Index d = ds.cols();
  const Vector ones = Vector::Ones(d) / std::sqrt(static_cast<double>(d));
  const Vector v = c.o.v.empty() ? ones : parse_vector(c.o.v, "--v");
  const Vector w = c.o.w.empty() ? ones : parse_vector(c.o.w, "--w");
  CusumVariant variant;
  if (c.o.variant == "endpoint") variant = CusumVariant::Endpoint;
  else if (c.o.variant == "max-deviation") variant = CusumVariant::MaxDeviation;
  else throw UsageError("--variant", "--variant must be endpoint or max-deviation");
  const CusumResult res = cusum_covariance_test(ds.values(), v, w, variant);
  Result r;
  json cv = json::object(), rej = json::object();
  for (const auto& [lvl, val] : res.critical_values) cv[num(lvl)] = val;
  for (const auto& [lvl, val] : res.reject) rej[num(lvl)] = val;
  r.payload = {{"variant", c.o.variant}, {"statistic", res.statistic},
               {"max_location", res.max_location}, {"alpha_hat", res.alpha_hat},
               {"p_value", res.p_value}, {"critical_values", cv}, {"reject", rej},
               {"v", to_json(v)}, {"w", to_json(w)}};
  if (res.interval) r.payload["interval"] = {res.interval->first, res.interval->second};
  CsvTable csv({"k", "z"});
  for (Index k = 0; k < res.process.size(); ++k) csv.add({std::to_string(k), num(res.process(k))});
  r.tables.emplace("cusum_process.csv", std::move(csv));
  return r;
}

Result cmd_simulate(Context& c) {
  require_seed(c);
  DgpSpec spec;
  if (c.o.dgp == "var") spec.kind = DgpKind::Var;
  else if (c.o.dgp == "arch") spec.kind = DgpKind::Arch;
  else if (c.o.dgp == "break") spec.kind = DgpKind::Break;
  else if (c.o.dgp == "proxy") spec.kind = DgpKind::Proxy;
  else throw UsageError("--dgp", "--dgp must be var, arch, break or proxy");
  if (c.o.coeffs.empty()) throw UsageError("--coeffs", "--coeffs is required");
  spec.coeffs = parse_matrices(c.o.coeffs, "--coeffs");
  const Index d = spec.coeffs[0].rows();
  spec.sigma = c.o.sigma.empty() ? Matrix(Matrix::Identity(d, d)) : parse_matrix(c.o.sigma, "--sigma");
  if (!c.o.intercept.empty()) spec.intercept = parse_vector(c.o.intercept, "--intercept");
  spec.T = c.o.nobs;
  spec.burn = c.o.burn;
  spec.arch_a = c.o.arch_a;
  if (c.o.arch_omega > 0) spec.arch_omega = c.o.arch_omega;
  if (!c.o.coeffs_after.empty()) spec.coeffs_after = parse_matrices(c.o.coeffs_after, "--coeffs-after");
  if (c.o.break_at >= 0) spec.break_at = c.o.break_at;
  spec.proxy_shock = c.o.dgp_proxy_shock;
  spec.proxy_strength = c.o.proxy_strength;
  spec.proxy_noise = c.o.proxy_noise;
  spec.allow_unstable = c.o.allow_unstable;
  const SimulatedData sim = simulate(spec, c.o.seed);

  std::vector<std::string> header;
  for (Index i = 0; i < d; ++i) header.push_back("v" + std::to_string(i + 1));
  CsvTable data(header);
  for (Index t = 0; t < sim.y.rows(); ++t) {
    std::vector<std::string> row;
    for (Index i = 0; i < d; ++i) row.push_back(num(sim.y(t, i)));
    data.add(std::move(row));
  }
  Result r;
  r.payload = {{"dgp", c.o.dgp}, {"T", spec.T}, {"burn", spec.burn},
               {"coefficients", to_json(spec.coeffs)}, {"sigma", to_json(spec.sigma)},
               {"impact", to_json(sim.impact)},
               {"intercept", spec.intercept ? to_json(*spec.intercept) : json(nullptr)},
               {"spectral_radius", sim.spectral_radius}};
  if (spec.kind == DgpKind::Arch) {
    r.payload["arch_a"] = spec.arch_a;
    r.payload["arch_omega"] = spec.arch_omega.value_or(1.0 - spec.arch_a);
  }
  if (sim.break_index) {
    r.payload["break_index"] = *sim.break_index;
    r.payload["coefficients_after"] = to_json(spec.coeffs_after);
    r.payload["spectral_radius_after"] = sim.spectral_radius_after;
  }
  if (sim.proxy) {
    CsvTable z({"z"});
    for (Index t = 0; t < sim.proxy->size(); ++t) z.add({num((*sim.proxy)(t))});
    r.tables.emplace("proxy.csv", std::move(z));
    r.payload["proxy_shock"] = spec.proxy_shock;
    r.payload["proxy_strength"] = spec.proxy_strength;
    r.payload["proxy_noise"] = spec.proxy_noise;
  }
  CsvTable shocks(header);
  for (Index t = 0; t < sim.shocks.rows(); ++t) {
    std::vector<std::string> row;
    for (Index i = 0; i < d; ++i) row.push_back(num(sim.shocks(t, i)));
    shocks.add(std::move(row));
  }
  r.tables.emplace("data.csv", std::move(data));
  r.tables.emplace("shocks.csv", std::move(shocks));
  return r;
}

Result cmd_critvals(Context& c) {
  require_seed(c);
  const BridgeTable t = simulate_bridge_table(c.o.paths, c.o.bridge_grid, c.o.seed);
  const fs::path dest = c.o.output.empty() ? fs::path(c.o.out) / "bridge_critvals.csv"
                                           : fs::path(c.o.output);
  if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
  save_bridge_table(t, dest);
  Result r;
  json q = json::object();
  for (double lvl : {0.10, 0.05, 0.01})
    q[num(lvl)] = {{"sup_abs", bridge_critical(t, BridgeFunctional::SupAbs, lvl)},
                   {"sup_range", bridge_critical(t, BridgeFunctional::SupRange, lvl)}};
  r.payload = {{"paths", t.paths}, {"grid", t.grid}, {"table", dest.string()},
               {"critical_values", q}};
  return r;
}

// ------------------------------------------------------------------ wiring

void add_common(CLI::App* s, Context& c, bool data) {
  s->add_option("--out", c.o.out, "output directory")->capture_default_str();
  s->add_option("--seed", c.o.seed, "random seed");
  s->add_option("--threads", c.o.threads, "worker threads (0: default)");
  s->add_flag("--timing", c.o.timing, "record wall time in the envelope");
  if (!data) return;
  s->add_option("--input", c.o.data.input, "CSV input file");
  s->add_flag("--no-header", c.o.data.no_header, "input has no header row");
  s->add_option("--index-col", c.o.data.index_col, "column holding time labels");
  s->add_option("--transform", c.o.data.transform,
                "none|log|diff|diffK|demean, one entry or one per column");
}

void add_var(CLI::App* s, Context& c) {
  s->add_option("--p", c.o.p, "lag order")->capture_default_str();
  s->add_flag("--no-intercept", c.o.no_intercept, "omit the constant");
}

void add_ident(CLI::App* s, Context& c) {
  s->add_option("--scheme", c.o.scheme, "recursive|longrun|proxy|sign")->capture_default_str();
  s->add_option("--order", c.o.order, "recursive ordering (names or positions)");
  s->add_option("--proxy", c.o.proxy, "instrument CSV (first column)");
  s->add_option("--proxy-shock", c.o.proxy_shock, "shock identified by the instrument");
  s->add_flag("--allow-weak", c.o.allow_weak, "accept first-stage F below 10");
  s->add_option("--restrictions", c.o.restrictions, "restriction file for the sign scheme");
  s->add_option("--horizon", c.o.horizon, "maximum horizon")->capture_default_str();
  s->add_option("--level", c.o.level, "interval coverage")->capture_default_str();
}

json config_echo(const CLI::App* s) {
  json j = json::object();
  for (const CLI::Option* opt : s->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "timing" || name == "threads") continue;
    const auto res = opt->reduced_results();
    std::string v;
    if (!res.empty()) {
      for (std::size_t i = 0; i < res.size(); ++i) v += (i ? "," : "") + res[i];
    } else {
      v = opt->get_default_str();
    }
    j[name] = v;
  }
  return j;
}

int emit_error(const std::string& kind, const std::string& message, const std::string& flag,
               int code) {
  json e = {{"error", {{"kind", kind}, {"message", message}}}};
  if (!flag.empty()) e["error"]["flag"] = flag;
  std::cout << e.dump() << std::endl;
  return code;
}

}  // namespace

int run(int argc, const char* const* argv) {
  Context c;
  CLI::App app{"Structural VAR toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file with [command] sections");
  app.allow_config_extras(CLI::config_extras_mode::error);

  using Handler = Result (*)(Context&);
  std::map<std::string, Handler> handlers;
  auto sub = [&](const std::string& name, const std::string& help, Handler h, bool data = true) {
    CLI::App* s = app.add_subcommand(name, help);
    s->allow_config_extras(CLI::config_extras_mode::error);
    handlers[name] = h;
    add_common(s, c, data);
    return s;
  };

  auto* fit = sub("fit", "estimate a reduced-form VAR", cmd_fit);
  add_var(fit, c);

  auto* sel = sub("select-lag", "information criteria or sequential Wald", cmd_select_lag);
  sel->add_option("--pmax", c.o.pmax, "largest lag order")->capture_default_str();
  sel->add_option("--method", c.o.method, "ic|wald")->capture_default_str();
  sel->add_option("--alpha", c.o.alpha, "Wald significance level")->capture_default_str();
  sel->add_flag("--no-intercept", c.o.no_intercept, "omit the constant");

  auto* irf_cmd = sub("irf", "impulse responses with optional bootstrap bands", cmd_irf);
  add_var(irf_cmd, c);
  add_ident(irf_cmd, c);
  irf_cmd->add_option("--boot", c.o.boot, "bootstrap replicates (0: none)")->capture_default_str();
  irf_cmd->add_option("--block", c.o.block, "block length or auto")->capture_default_str();

  auto* fevd_cmd = sub("fevd", "forecast-error variance decomposition", cmd_fevd);
  add_var(fevd_cmd, c);
  add_ident(fevd_cmd, c);

  auto* hd_cmd = sub("hd", "historical decomposition", cmd_hd);
  add_var(hd_cmd, c);
  add_ident(hd_cmd, c);

  auto* con = sub("connect", "generalized FEVD connectedness table", cmd_connect);
  add_var(con, c);
  con->add_option("--horizon", c.o.horizon, "forecast horizon")->capture_default_str();

  auto* lp = sub("lp", "local projections", cmd_lp);
  lp->add_option("--p", c.o.p, "control lags")->capture_default_str();
  lp->add_flag("--no-intercept", c.o.no_intercept, "omit the constant");
  lp->add_option("--horizon", c.o.horizon, "maximum horizon")->capture_default_str();
  lp->add_option("--shock-file", c.o.shock_file, "observed shock series (first column)");

  auto* boot = sub("boot", "moving block bootstrap of the VAR parameters", cmd_boot);
  add_var(boot, c);
  boot->add_option("--boot", c.o.boot, "replicates (default 999)");
  boot->add_option("--block", c.o.block, "block length or auto")->capture_default_str();
  boot->add_option("--level", c.o.level, "interval coverage")->capture_default_str();

  auto* vecm = sub("vecm", "error-correction form of a levels VAR", cmd_vecm);
  add_var(vecm, c);
  vecm->add_option("--beta", c.o.beta_file, "cointegrating vectors (headerless CSV, d x r)");

  auto* pt = sub("pt-decompose", "permanent-transitory decomposition", cmd_pt);
  add_var(pt, c);
  pt->add_option("--alpha", c.o.alpha_file, "loadings (headerless CSV, d x r)");
  pt->add_option("--beta", c.o.beta_file, "cointegrating vectors (headerless CSV, d x r)");

  auto* rob = sub("robust", "MLTS / reweighted MLTS fit", cmd_robust);
  add_var(rob, c);
  rob->add_option("--pmax", c.o.pmax, "select the order up to pmax");
  rob->add_option("--trim", c.o.trim, "trimming proportion")->capture_default_str();
  rob->add_option("--delta", c.o.delta, "reweighting tail probability")->capture_default_str();
  rob->add_option("--starts", c.o.starts, "random starts")->capture_default_str();

  auto* brk = sub("breaks", "fused-penalty break detection with LIC screening", cmd_breaks);
  brk->add_option("--p", c.o.p, "lag order")->capture_default_str();
  brk->add_option("--block", c.o.bss_block, "block length (0: ceil(sqrt(n)))")->capture_default_str();
  brk->add_option("--grid", c.o.grid, "lambda grid size")->capture_default_str();
  brk->add_option("--grid-span", c.o.grid_span, "smallest/largest lambda")->capture_default_str();
  brk->add_option("--lambda2-ratio", c.o.lambda2_ratio, "lambda2 / lambda1 on the grid")
      ->capture_default_str();
  brk->add_option("--lambda1", c.o.lambda1, "fixed lambda1 (skips the grid)");
  brk->add_option("--lambda2", c.o.lambda2, "lambda2 with --lambda1")->capture_default_str();
  brk->add_option("--a-n", c.o.a_n, "screening neighborhood (0: block)")->capture_default_str();
  brk->add_option("--omega", c.o.omega, "LIC penalty per break (<0: d^2 p log n)")
      ->capture_default_str();
  brk->add_flag("--no-demean", c.o.no_demean, "skip demeaning");

  auto* cus = sub("cusum", "CUSUM covariance break test", cmd_cusum);
  cus->add_option("--v", c.o.v, "weight vector (comma separated)");
  cus->add_option("--w", c.o.w, "weight vector (comma separated)");
  cus->add_option("--variant", c.o.variant, "endpoint|max-deviation")->capture_default_str();

  auto* sim = sub("simulate", "simulate a VAR data set", cmd_simulate, false);
  sim->add_option("--dgp", c.o.dgp, "var|arch|break|proxy")->capture_default_str();
  sim->add_option("--coeffs", c.o.coeffs, "A_1|A_2|... rows ';' entries ','");
  sim->add_option("--sigma", c.o.sigma, "innovation covariance (default identity)");
  sim->add_option("--intercept", c.o.intercept, "intercept vector");
  sim->add_option("--T", c.o.nobs, "sample size")->capture_default_str();
  sim->add_option("--burn", c.o.burn, "discarded burn-in rows")->capture_default_str();
  sim->add_option("--arch-a", c.o.arch_a, "ARCH(1) coefficient")->capture_default_str();
  sim->add_option("--arch-omega", c.o.arch_omega, "ARCH(1) intercept (default 1 - a)");
  sim->add_option("--coeffs-after", c.o.coeffs_after, "post-break coefficients");
  sim->add_option("--break-at", c.o.break_at, "break row (default T/2)");
  sim->add_option("--proxy-shock", c.o.dgp_proxy_shock, "shock seen by the instrument")
      ->capture_default_str();
  sim->add_option("--proxy-strength", c.o.proxy_strength, "instrument loading")
      ->capture_default_str();
  sim->add_option("--proxy-noise", c.o.proxy_noise, "instrument noise sd")->capture_default_str();
  sim->add_flag("--allow-unstable", c.o.allow_unstable, "accept explosive DGPs");

  auto* cv = sub("critvals", "simulate the Brownian bridge critical value table", cmd_critvals,
                 false);
  cv->add_option("--paths", c.o.paths, "simulated paths")->capture_default_str();
  cv->add_option("--grid", c.o.bridge_grid, "grid points per path")->capture_default_str();
  cv->add_option("--output", c.o.output, "table path (default <out>/bridge_critvals.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    return emit_error("UsageError", msg, "", 2);
  }

  CLI::App* active = app.get_subcommands().front();
  c.sub = active;
  c.seeded = active->get_option("--seed")->count() > 0;
  if (c.o.threads > 0) set_worker_count(c.o.threads);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Result r = handlers.at(active->get_name())(c);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::create_directories(c.o.out);
    json env;
    env["schema"] = kSchema;
    env["command"] = active->get_name();
    env["config"] = config_echo(active);
    env["version"] = kVersion;
    env["seed"] = c.seeded ? json(c.o.seed) : json(nullptr);
    env["timing"] = c.o.timing ? json({{"seconds", secs}, {"threads", worker_count()}})
                               : json(nullptr);
    env["payload"] = std::move(r.payload);
    env["tables"] = json::array();
    for (const auto& [name, table] : r.tables) {
      table.write(fs::path(c.o.out) / name);
      env["tables"].push_back(name);
    }
    write_json(fs::path(c.o.out) / "result.json", env);
    std::cout << (fs::path(c.o.out) / "result.json").string() << std::endl;
    return 0;
  } catch (const UsageError& e) {
    return emit_error("UsageError", e.what(), e.flag, 2);
  } catch (const svarkit::ParseError& e) {
    json j = {{"error", {{"kind", e.name()}, {"message", e.what()}, {"row", e.row()}, {"col", e.col()}}}};
    std::cout << j.dump() << std::endl;
    return 1;
  } catch (const Error& e) {
    return emit_error(e.name(), e.what(), "", 1);
  } catch (const std::exception& e) {
    return emit_error("InternalError", e.what(), "", 1);
  }
}

}  // namespace svarkit::cli
