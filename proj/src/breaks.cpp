#include "svarkit/breaks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "svarkit/errors.hpp"
#include "svarkit/parallel.hpp"

namespace svarkit {

// ---------------------------------------------------------------- CUSUM

CusumResult cusum_covariance_test(const Matrix& y, const Vector& v, const Vector& w,
                                  CusumVariant variant, const BridgeTable& table) {
  const Index n = y.rows();
  const Index d = y.cols();
  require(v.size() == d && w.size() == d, ErrorKind::ShapeError,
          "weight vectors must have length d");
  require(n >= 20, ErrorKind::InsufficientData, "CUSUM test needs at least 20 observations");
  require(v.allFinite() && w.allFinite() && v.norm() > 0 && w.norm() > 0, ErrorKind::DomainError,
          "weight vectors must be finite and nonzero");
  const Matrix c = y.rowwise() - y.colwise().mean();
  const Vector x = (c * v).cwiseProduct(c * w);
  const int bw = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n))));
  const double lrv = bartlett_lrv(x, bw);
  if (!(lrv > 0.0) || !std::isfinite(lrv))
    fail(ErrorKind::DegenerateSeries, "long-run variance estimate is not positive");

  CusumResult r;
  r.variant = variant;
  r.alpha_hat = std::sqrt(lrv);
  const double total = x.sum();
  const double norm = std::sqrt(static_cast<double>(n)) * r.alpha_hat;
  r.process.resize(n + 1);
  r.process(0) = 0.0;
  double s = 0.0;
  for (Index k = 1; k <= n; ++k) {
    s += x(k - 1);
    r.process(k) = (s - (static_cast<double>(k) / n) * total) / norm;
  }
  BridgeFunctional f;
  if (variant == CusumVariant::Endpoint) {
    Index arg = 0;
    r.process.cwiseAbs().maxCoeff(&arg);
    r.statistic = std::abs(r.process(arg));
    r.max_location = arg;
    f = BridgeFunctional::SupAbs;
  } else {
    Index hi = 0, lo = 0;
    const double mx = r.process.maxCoeff(&hi);
    const double mn = r.process.minCoeff(&lo);
    r.statistic = mx - mn;
    r.interval = std::make_pair(std::min(hi, lo), std::max(hi, lo));
    r.max_location = r.interval->first;
    f = BridgeFunctional::SupRange;
  }
  r.p_value = bridge_p_value(table, f, r.statistic);
  for (double level : {0.10, 0.05, 0.01}) {
    const double cv = bridge_critical(table, f, level);
    r.critical_values[level] = cv;
    r.reject[level] = r.statistic > cv;
  }
  return r;
}

// ---------------------------------------------------------------- TV prox

std::vector<double> tv_denoise(const std::vector<double>& input, double lambda) {
  const int width = static_cast<int>(input.size());
  std::vector<double> output(input.size());
  if (width == 0) return output;
  if (lambda <= 0.0) return input;
  // Condat's direct algorithm.
  int k = 0, k0 = 0;
  double umin = lambda, umax = -lambda;
  double vmin = input[0] - lambda, vmax = input[0] + lambda;
  int kplus = 0, kminus = 0;
  const double twolambda = 2.0 * lambda;
  const double minlambda = -lambda;
  for (;;) {
    while (k == width - 1) {
      if (umin < 0.0) {
        do output[k0++] = vmin; while (k0 <= kminus);
        umax = (vmin = input[kminus = k = k0]) + (umin = lambda) - vmax;
      } else if (umax > 0.0) {
        do output[k0++] = vmax; while (k0 <= kplus);
        umin = (vmax = input[kplus = k = k0]) + (umax = minlambda) - vmin;
      } else {
        vmin += umin / (k - k0 + 1);
        do output[k0++] = vmin; while (k0 <= k);
        return output;
      }
    }
    if ((umin += input[k + 1] - vmin) < minlambda) {
      do output[k0++] = vmin; while (k0 <= kminus);
      vmax = (vmin = input[kplus = kminus = k = k0]) + twolambda;
      umin = lambda;
      umax = minlambda;
    } else if ((umax += input[k + 1] - vmax) > lambda) {
      do output[k0++] = vmax; while (k0 <= kplus);
      vmin = (vmax = input[kplus = kminus = k = k0]) - twolambda;
      umin = lambda;
      umax = minlambda;
    } else {
      k++;
      if (umin >= lambda) {
        vmin += (umin - lambda) / ((kminus = k) - k0 + 1);
        umin = lambda;
      }
      if (umax <= minlambda) {
        vmax += (umax + lambda) / ((kplus = k) - k0 + 1);
        umax = minlambda;
      }
    }
  }
}

// Odd reflection (-x_k..-x_1, x_1..x_k): its TV prox is odd, and on the right
// half it solves the anchored problem exactly.
std::vector<double> tv_denoise_anchored(const std::vector<double>& x, double mu) {
  const std::size_t k = x.size();
  if (k == 0 || mu <= 0.0) return x;
  std::vector<double> z(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    z[k + i] = x[i];
    z[k - 1 - i] = -x[i];
  }
  const std::vector<double> b = tv_denoise(z, mu);
  std::vector<double> out(b.begin() + static_cast<std::ptrdiff_t>(k), b.end());
  if (b[k - 1] == b[k]) {
    // the middle pair fused: the whole first run is exactly zero
    const double v = out[0];
    for (std::size_t i = 0; i < k && out[i] == v; ++i) out[i] = 0.0;
  }
  return out;
}

// ---------------------------------------------------------------- BSS

namespace {

struct BlockData {
  Index n = 0;
  Index block = 0;
  Index nblocks = 0;
  Index m = 0;  // regressors
  Index d = 0;
  std::vector<Index> starts;
  std::vector<Matrix> gram;   // X_i'X_i
  std::vector<Matrix> cross;  // X_i'Y_i
  std::vector<double> yy;     // tr(Y_i'Y_i)
};

BlockData block_data(const Matrix& y, int p, Index block) {
  require(p >= 1, ErrorKind::InvalidOrder, "break detection needs p >= 1");
  const Index d = y.cols();
  const Index n = y.rows() - p;
  require(block >= d * p + 2, ErrorKind::InsufficientData,
          "block length must be at least d*p + 2");
  require(n > 0, ErrorKind::InsufficientData, "series shorter than the lag order");
  const Index k = (n + block - 1) / block;
  require(k >= 2, ErrorKind::InsufficientData, "need at least two blocks");
  const Matrix x = lag_design(y, p, false, p);
  const Matrix yt = y.bottomRows(n);
  BlockData b;
  b.n = n;
  b.block = block;
  b.nblocks = k;
  b.m = d * p;
  b.d = d;
  for (Index i = 0; i < k; ++i) {
    const Index s = i * block;
    const Index len = std::min(block, n - s);
    const auto xi = x.middleRows(s, len);
    const auto yi = yt.middleRows(s, len);
    b.starts.push_back(p + s);
    b.gram.push_back(xi.transpose() * xi);
    b.cross.push_back(xi.transpose() * yi);
    b.yy.push_back(yi.squaredNorm());
  }
  return b;
}

double smooth_loss(const BlockData& b, const std::vector<Matrix>& beta) {
  double s = 0.0;
  for (Index i = 0; i < b.nblocks; ++i)
    s += b.yy[i] - 2.0 * (beta[i].cwiseProduct(b.cross[i])).sum() +
         (beta[i].cwiseProduct(b.gram[i] * beta[i])).sum();
  return s / static_cast<double>(b.n);
}

double penalty(const std::vector<Matrix>& beta, double l1, double l2) {
  double s = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    s += l2 * beta[i].cwiseAbs().sum();
    s += l1 * (i == 0 ? beta[i].cwiseAbs().sum() : (beta[i] - beta[i - 1]).cwiseAbs().sum());
  }
  return s;
}

std::vector<Matrix> prox(const std::vector<Matrix>& v, double mu1, double mu2) {
  const std::size_t k = v.size();
  std::vector<Matrix> out(k, Matrix(v[0].rows(), v[0].cols()));
  std::vector<double> chain(k);
  for (Index r = 0; r < v[0].rows(); ++r)
    for (Index c = 0; c < v[0].cols(); ++c) {
      for (std::size_t i = 0; i < k; ++i) chain[i] = v[i](r, c);
      const std::vector<double> t = tv_denoise_anchored(chain, mu1);
      for (std::size_t i = 0; i < k; ++i) {
        const double a = std::abs(t[i]) - mu2;
        out[i](r, c) = a > 0.0 ? std::copysign(a, t[i]) : 0.0;
      }
    }
  return out;
}

}  // namespace

namespace {

// Pooled lasso: min (1/n)(tr B'GB - 2 tr B'C) + mu |B|_1, coordinate descent.
Matrix pooled_lasso(const Matrix& g, const Matrix& c, double n, double mu) {
  Matrix b = Matrix::Zero(g.rows(), c.cols());
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double moved = 0.0;
    for (Index col = 0; col < c.cols(); ++col)
      for (Index r = 0; r < g.rows(); ++r) {
        if (g(r, r) <= 0.0) continue;
        const double rho = c(r, col) - g.row(r).dot(b.col(col)) + g(r, r) * b(r, col);
        const double thr = 0.5 * mu * n;
        const double v = std::abs(rho) > thr ? std::copysign(std::abs(rho) - thr, rho) / g(r, r) : 0.0;
        moved = std::max(moved, std::abs(v - b(r, col)));
        b(r, col) = v;
      }
    if (moved <= 1e-14 * (1.0 + b.cwiseAbs().maxCoeff())) break;
  }
  return b;
}

}  // namespace

double bss_lambda_max(const Matrix& y, int p, Index block, double lambda2_ratio) {
  const BlockData b = block_data(y, p, block);
  const double n = static_cast<double>(b.n);
  Matrix g = Matrix::Zero(b.m, b.m);
  Matrix c = Matrix::Zero(b.m, b.d);
  for (Index i = 0; i < b.nblocks; ++i) {
    g += b.gram[i];
    c += b.cross[i];
  }
  // Largest subgradient a jump would need when every block shares the pooled
  // solution at this lambda1; zero jumps are optimal iff it is <= lambda1.
  auto need = [&](double l1) {
    const double l2 = lambda2_ratio * l1;
    const Matrix beta = pooled_lasso(g, c, n, l1 + static_cast<double>(b.nblocks) * l2);
    Matrix tail = Matrix::Zero(b.m, b.d);
    double worst = 0.0;
    for (Index i = b.nblocks - 1; i >= 1; --i) {
      tail += 2.0 / n * (b.gram[i] * beta - b.cross[i]);
      const double slack = l2 * static_cast<double>(b.nblocks - i);
      for (Index col = 0; col < b.d; ++col)
        for (Index r = 0; r < b.m; ++r) {
          const double t = tail(r, col);
          const double v = beta(r, col) != 0.0
                               ? std::abs(t + std::copysign(slack, beta(r, col)))
                               : std::max(0.0, std::abs(t) - slack);
          worst = std::max(worst, v);
        }
    }
    return worst;
  };
  double hi = std::max(need(0.0), 1e-12);
  while (need(hi) > hi) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (need(mid) > mid ? lo : hi) = mid;
  }
  // small margin so the solver identifies the all-zero jump pattern
  return 1.01 * hi;
}

BssFit bss_detect(const Matrix& y, int p, Index block, double lambda1, double lambda2,
                  const BssOptions& opt) {
  require(lambda1 >= 0.0 && lambda2 >= 0.0, ErrorKind::DomainError, "penalties must be >= 0");
  const BlockData b = block_data(y, p, block);
  const std::size_t k = static_cast<std::size_t>(b.nblocks);
  double lip = 0.0;
  for (const Matrix& g : b.gram)
    lip = std::max(lip, Eigen::SelfAdjointEigenSolver<Matrix>(g, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .maxCoeff());
  lip = std::max(2.0 * lip / static_cast<double>(b.n), 1e-12);
  const double step = 1.0 / lip;

  auto objective = [&](const std::vector<Matrix>& beta) {
    return smooth_loss(b, beta) + penalty(beta, lambda1, lambda2);
  };

  std::vector<Matrix> x(k, Matrix::Zero(b.m, b.d));
  std::vector<Matrix> x_prev = x;
  std::vector<Matrix> yk = x;
  double fx = objective(x);
  double t = 1.0;
  BssFit fit;
  fit.objective_trace.push_back(fx);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    std::vector<Matrix> v(k);
    for (std::size_t i = 0; i < k; ++i)
      v[i] = yk[i] - step * (2.0 / static_cast<double>(b.n)) * (b.gram[i] * yk[i] - b.cross[i]);
    std::vector<Matrix> z = prox(v, step * lambda1, step * lambda2);
    const double fz = objective(z);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const bool accept = fz <= fx;
    const double decrease = fx - fz;
    x_prev = x;
    if (accept) {
      x = z;
      fx = fz;
    }
    fit.objective_trace.push_back(fx);
    if (accept && decrease <= opt.tol * std::max(std::abs(fx), 1e-300)) {
      ++it;
      fit.converged = true;
      break;
    }
    if (!accept) {
      // monotone step rejected: restart momentum from the incumbent
      yk = x;
      t = 1.0;
      continue;
    }
    for (std::size_t i = 0; i < k; ++i)
      yk[i] = x[i] + ((t - 1.0) / t_next) * (x[i] - x_prev[i]);
    t = t_next;
  }
  fit.iterations = it;
  fit.block = block;
  fit.block_starts = b.starts;
  fit.levels = x;
  fit.lambda1 = lambda1;
  fit.lambda2 = lambda2;
  for (std::size_t i = 0; i < k; ++i) {
    fit.jumps.push_back(i == 0 ? x[0] : Matrix(x[i] - x[i - 1]));
    if (i >= 1) {
      const double nrm = fit.jumps.back().norm();
      if (nrm > 0.0) {
        fit.candidates.push_back(b.starts[i]);
        fit.candidate_norms.push_back(nrm);
      }
    }
  }
  return fit;
}

// ---------------------------------------------------------------- LIC

namespace {

class SegmentSse {
 public:
  SegmentSse(const Matrix& y, int p) : y_(y), p_(p) {}
  // Residual sum of squares of a no-intercept VAR(p) on target rows [s, e);
  // infinite when the segment is too short to fit.
  double operator()(Index s, Index e) {
    const auto key = std::make_pair(s, e);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    double v = std::numeric_limits<double>::infinity();
    const Index d = y_.cols();
    if (e - s >= d * p_ + 1) {
      try {
        const Matrix x = lag_design(y_.topRows(e), p_, false, s);
        v = ols(x, y_.middleRows(s, e - s)).residuals.squaredNorm();
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::SingularRegressors) throw;
      }
    }
    cache_.emplace(key, v);
    return v;
  }

 private:
  const Matrix& y_;
  int p_;
  std::map<std::pair<Index, Index>, double> cache_;
};

double piecewise_sse(SegmentSse& sse, Index lo, Index hi, const std::vector<Index>& breaks) {
  double s = 0.0;
  Index a = lo;
  for (Index c : breaks) {
    if (c <= lo || c >= hi) continue;
    s += sse(a, c);
    a = c;
  }
  return s + sse(a, hi);
}

double default_scale(const Matrix& y, int p) {
  const VarModel m = fit_var(y, p, false);
  return m.sigma_u.trace() / static_cast<double>(y.cols());
}

}  // namespace

LicResult lic_screen(const Matrix& y, const std::vector<Index>& candidates_in, int p, Index a_n,
                     double omega, std::optional<double> scale) {
  const Index d = y.cols();
  const Index T = y.rows();
  require(a_n >= d * p + 2, ErrorKind::InsufficientData, "a_n must be at least d*p + 2");
  LicResult out;
  if (candidates_in.empty()) return out;
  std::vector<Index> cand = candidates_in;
  require(std::is_sorted(cand.begin(), cand.end()), ErrorKind::DomainError,
          "candidates must be sorted");
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (Index c : cand)
    require(c > p && c < T, ErrorKind::DomainError, "candidate outside the sample");
  out.scale = scale ? *scale : default_scale(y, p);
  require(out.scale > 0.0, ErrorKind::DegenerateSeries, "residual scale is zero");

  // windows around candidates, merged into components
  std::vector<std::pair<Index, Index>> comps;
  for (Index c : cand) {
    const Index lo = std::max<Index>(p, c - a_n);
    const Index hi = std::min(T, c + a_n);
    if (!comps.empty() && lo <= comps.back().second)
      comps.back().second = std::max(comps.back().second, hi);
    else
      comps.emplace_back(lo, hi);
  }
  SegmentSse sse(y, p);
  const std::size_t m = cand.size();
  auto lic = [&](const std::vector<char>& keep) {
    std::vector<Index> br;
    for (std::size_t i = 0; i < m; ++i)
      if (keep[i]) br.push_back(cand[i]);
    double s = 0.0;
    for (const auto& [lo, hi] : comps) s += piecewise_sse(sse, lo, hi, br);
    return s / out.scale + omega * static_cast<double>(br.size());
  };
  auto to_breaks = [&](const std::vector<char>& keep) {
    std::vector<Index> br;
    for (std::size_t i = 0; i < m; ++i)
      if (keep[i]) br.push_back(cand[i]);
    return br;
  };

  std::vector<char> best(m, 0);
  double best_v = lic(best);
  if (m <= 12) {
    out.exhaustive = true;
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
      std::vector<char> keep(m);
      for (std::size_t i = 0; i < m; ++i) keep[i] = (mask >> i) & 1u;
      const double v = lic(keep);
      const auto cnt = std::count(keep.begin(), keep.end(), 1);
      const auto bcnt = std::count(best.begin(), best.end(), 1);
      if (v < best_v || (v == best_v && (cnt < bcnt || (cnt == bcnt && to_breaks(keep) < to_breaks(best))))) {
        best_v = v;
        best = keep;
      }
    }
  } else {
    out.exhaustive = false;
    std::vector<char> keep(m, 1);
    double cur = lic(keep);
    for (;;) {
      double bv = std::numeric_limits<double>::infinity();
      std::size_t bi = m;
      for (std::size_t i = 0; i < m; ++i) {
        if (!keep[i]) continue;
        keep[i] = 0;
        const double v = lic(keep);
        keep[i] = 1;
        if (v < bv) {
          bv = v;
          bi = i;
        }
      }
      if (bi == m || !(bv <= cur)) break;
      keep[bi] = 0;
      cur = bv;
    }
    if (cur <= best_v) {
      best = keep;
      best_v = cur;
    }
  }
  out.breaks = to_breaks(best);
  out.lic = best_v;
  return out;
}

// ---------------------------------------------------------------- pipeline

namespace {

GridPoint evaluate_lambda(const Matrix& y, int p, Index block, Index a_n, double omega,
                          double scale, double l1, double l2, const BssOptions& opt,
                          BssFit* keep_fit) {
  GridPoint g;
  g.lambda1 = l1;
  g.lambda2 = l2;
  BssFit fit = bss_detect(y, p, block, l1, l2, opt);
  g.converged = fit.converged;
  g.n_candidates = fit.candidates.size();
  const LicResult lr = lic_screen(y, fit.candidates, p, a_n, omega, scale);
  g.breaks = lr.breaks;
  SegmentSse sse(y, p);
  g.score = piecewise_sse(sse, p, y.rows(), g.breaks) / scale +
            omega * static_cast<double>(g.breaks.size());
  if (keep_fit) *keep_fit = std::move(fit);
  return g;
}

template <bool Parallel>
BreakReport detect_impl(const Matrix& y_in, int p, const BreakConfig& cfg) {
  require(cfg.grid >= 1, ErrorKind::DomainError, "lambda grid needs at least one point");
  const Index d = y_in.cols();
  const Matrix y = cfg.demean ? Matrix(y_in.rowwise() - y_in.colwise().mean()) : y_in;
  const Index n = y.rows() - p;
  require(n > 0, ErrorKind::InsufficientData, "series shorter than the lag order");
  BreakReport rep;
  rep.block = cfg.block > 0 ? cfg.block
                            : static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n))));
  rep.a_n = cfg.a_n > 0 ? cfg.a_n : rep.block;
  rep.omega = cfg.omega >= 0.0
                  ? cfg.omega
                  : static_cast<double>(d * d * p) * std::log(static_cast<double>(n));
  const double scale = default_scale(y, p);
  const double lmax = bss_lambda_max(y, p, rep.block, cfg.lambda2_ratio);
  std::vector<double> l1(cfg.grid);
  for (int g = 0; g < cfg.grid; ++g)
    l1[g] = cfg.grid == 1 ? lmax
                          : lmax * std::pow(cfg.grid_span, static_cast<double>(g) / (cfg.grid - 1));
  rep.grid.resize(cfg.grid);
  if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
    for (int g = 0; g < cfg.grid; ++g)
      rep.grid[g] = evaluate_lambda(y, p, rep.block, rep.a_n, rep.omega, scale, l1[g],
                                    cfg.lambda2_ratio * l1[g], cfg.solver, nullptr);
  } else {
    for (int g = 0; g < cfg.grid; ++g)
      rep.grid[g] = evaluate_lambda(y, p, rep.block, rep.a_n, rep.omega, scale, l1[g],
                                    cfg.lambda2_ratio * l1[g], cfg.solver, nullptr);
  }
  int best = 0;
  for (int g = 1; g < cfg.grid; ++g)
    if (rep.grid[g].score < rep.grid[best].score) best = g;
  BssFit fit;
  evaluate_lambda(y, p, rep.block, rep.a_n, rep.omega, scale, l1[best],
                  cfg.lambda2_ratio * l1[best], cfg.solver, &fit);
  rep.lambda1 = rep.grid[best].lambda1;
  rep.lambda2 = rep.grid[best].lambda2;
  rep.candidates = fit.candidates;
  rep.candidate_norms = fit.candidate_norms;
  rep.final_breaks = rep.grid[best].breaks;
  rep.score = rep.grid[best].score;
  rep.converged = rep.grid[best].converged;
  // target rows [s, e) per segment; the fit also uses the p rows before s
  Index s = p;
  std::vector<Index> ends = rep.final_breaks;
  ends.push_back(y.rows());
  for (Index e : ends) {
    rep.segment_rows.emplace_back(s, e);
    rep.segments.push_back(fit_var(Matrix(y.middleRows(s - p, e - s + p)), p, false));
    s = e;
  }
  return rep;
}

}  // namespace

BreakReport detect_breaks(const Matrix& y, int p, const BreakConfig& cfg) {
  return detect_impl<true>(y, p, cfg);
}

BreakReport detect_breaks_serial(const Matrix& y, int p, const BreakConfig& cfg) {
  return detect_impl<false>(y, p, cfg);
}

}  // namespace svarkit
