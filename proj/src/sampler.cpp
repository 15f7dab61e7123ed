#include "sngr/sampler.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "sngr/rng.hpp"

namespace sngr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Acklam's rational approximation.
double probit_initial(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) return -probit_initial(1.0 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

struct LivePoint {
  Eigen::VectorXd u;
  Eigen::VectorXd theta;
  double logl = kNegInf;
};

double safe_loglike(const LogLikelihood& loglike, const Eigen::VectorXd& theta) {
  const double v = loglike(theta);
  return std::isnan(v) ? kNegInf : v;
}

}  // namespace

double probit(double u) {
  constexpr double eps = 1e-12;
  const double p = std::clamp(u, eps, 1.0 - eps);
  double x = probit_initial(p);
  // One Halley step against erfc brings Acklam's 1e-9 down to round-off.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double t = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= t / (1.0 + 0.5 * x * t);
  return x;
}

PriorTransform::PriorTransform(Eigen::VectorXd mean, const Eigen::MatrixXd& cov, double inflation)
    : mean_(std::move(mean)), inflation_(inflation) {
  if (cov.rows() != mean_.size() || cov.cols() != mean_.size())
    throw std::invalid_argument("prior covariance does not match mean dimension");
  if (!(inflation > 0.0)) throw std::invalid_argument("prior inflation must be positive");
  const Eigen::MatrixXd scaled = inflation * 0.5 * (cov + cov.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("prior covariance is not positive definite");
  chol_ = llt.matrixL();
}

Eigen::VectorXd PriorTransform::operator()(const Eigen::VectorXd& u) const {
  Eigen::VectorXd z(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) z(i) = probit(u(i));
  return mean_ + chol_ * z;
}

WeightedSamples nested_sample(const LogLikelihood& loglike, const PriorTransform& prior,
                              const NsConfig& cfg) {
  if (cfg.n_live < 2) throw std::invalid_argument("n_live must be at least 2");
  if (!(cfg.dlogz_stop > 0.0)) throw std::invalid_argument("dlogz_stop must be positive");

  const int dim = prior.dim();
  const int n_live = cfg.n_live;
  const int n_walks = cfg.walks_for(dim);
  const int max_steps = 100 * n_walks;
  const double adapt = 1.0 / n_walks;
  Rng rng(cfg.seed);

  WeightedSamples out;
  std::vector<LivePoint> live(static_cast<std::size_t>(n_live));
  for (LivePoint& p : live) {
    p.u.resize(dim);
    for (int i = 0; i < dim; ++i) p.u(i) = rng.uniform_open();
    p.theta = prior(p.u);
    p.logl = safe_loglike(loglike, p.theta);
    ++out.likelihood_calls;
  }

  std::vector<Eigen::VectorXd> dead_theta;
  std::vector<double> dead_logl;
  std::vector<double> dead_logwt;

  double logz = kNegInf;
  double h = 0.0;
  double logvol = 0.0;
  const double log_shell = std::log(-std::expm1(-1.0 / n_live));
  double scale = 0.5;

  auto accumulate = [&](double logwt, double logl) {
    const double logz_new = log_add_exp(logz, logwt);
    const double h_new = std::exp(logwt - logz_new) * logl +
                         (logz == kNegInf ? 0.0 : std::exp(logz - logz_new) * (h + logz)) -
                         logz_new;
    logz = logz_new;
    h = std::isfinite(h_new) ? h_new : h;
  };

  Eigen::VectorXd proposal(dim);
  Eigen::VectorXd direction(dim);
  for (;;) {
    std::size_t worst = 0;
    double logl_max = kNegInf;
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (live[i].logl < live[worst].logl) worst = i;
      logl_max = std::max(logl_max, live[i].logl);
    }
    const double remaining = log_add_exp(logz, logl_max + logvol) - logz;
    if (logz != kNegInf && remaining < cfg.dlogz_stop) {
      out.converged = true;
      break;
    }
    if (out.iterations >= cfg.max_iterations) break;
    ++out.iterations;

    const double logl_star = live[worst].logl;
    const double logwt = logl_star + logvol + log_shell;
    accumulate(logwt, logl_star);
    dead_theta.push_back(live[worst].theta);
    dead_logl.push_back(logl_star);
    dead_logwt.push_back(logwt);
    logvol -= 1.0 / n_live;

    // Replace the retired point by walking from a surviving one.
    std::size_t start = static_cast<std::size_t>(rng.index(static_cast<std::uint64_t>(n_live - 1)));
    if (start >= worst) ++start;
    LivePoint current = live[start];
    int accepted = 0;
    for (int step = 0; step < n_walks || (accepted == 0 && step < max_steps); ++step) {
      for (int i = 0; i < dim; ++i) direction(i) = rng.normal();
      const double radius = scale * std::pow(rng.uniform(), 1.0 / dim);
      proposal = current.u + radius * direction / direction.norm();
      bool inside = true;
      for (int i = 0; i < dim; ++i) inside = inside && proposal(i) > 0.0 && proposal(i) < 1.0;
      if (inside) {
        Eigen::VectorXd theta = prior(proposal);
        const double logl = safe_loglike(loglike, theta);
        ++out.likelihood_calls;
        if (logl >= logl_star) {
          current.u = proposal;
          current.theta = std::move(theta);
          current.logl = logl;
          ++accepted;
          scale = std::min(1.0, scale * std::exp(adapt));
          continue;
        }
      }
      scale = std::max(1e-12, scale * std::exp(-adapt));
    }
    live[worst] = std::move(current);
  }

  // Drain: each live point owns an equal share of the remaining volume.
  const double log_share = logvol - std::log(static_cast<double>(n_live));
  for (const LivePoint& p : live) {
    const double logwt = p.logl + log_share;
    accumulate(logwt, p.logl);
    dead_theta.push_back(p.theta);
    dead_logl.push_back(p.logl);
    dead_logwt.push_back(logwt);
  }

  const Eigen::Index n = static_cast<Eigen::Index>(dead_theta.size());
  out.points.resize(dim, n);
  out.log_weights.resize(n);
  out.log_likelihoods.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.points.col(i) = dead_theta[static_cast<std::size_t>(i)];
    out.log_likelihoods(i) = dead_logl[static_cast<std::size_t>(i)];
    out.log_weights(i) = dead_logwt[static_cast<std::size_t>(i)] - logz;
  }
  out.log_evidence = logz;
  out.information = std::max(h, 0.0);
  out.log_evidence_err = std::sqrt(out.information / n_live);
  return out;
}

Eigen::VectorXd weighted_mean(const WeightedSamples& ws) {
  if (ws.size() == 0) throw std::invalid_argument("weighted_mean of empty sample set");
  const Eigen::VectorXd w = ws.weights();
  return ws.points * w / w.sum();
}

namespace {

Eigen::VectorXd centered_axis(const WeightedSamples& ws, int axis, const Eigen::VectorXd& w) {
  if (axis < 0 || axis >= ws.points.rows()) throw std::out_of_range("sample axis out of range");
  const Eigen::VectorXd x = ws.points.row(axis).transpose();
  return x.array() - w.dot(x) / w.sum();
}

}  // namespace

double weighted_std(const WeightedSamples& ws, int axis) {
  if (ws.size() == 0) throw std::invalid_argument("weighted_std of empty sample set");
  const Eigen::VectorXd w = ws.weights();
  const Eigen::VectorXd c = centered_axis(ws, axis, w);
  return std::sqrt(w.dot(c.cwiseAbs2()) / w.sum());
}

double ess_fraction(const WeightedSamples& ws) {
  if (ws.size() == 0) throw std::invalid_argument("ess_fraction of empty sample set");
  // Relative to the largest weight, so equal weights give exactly 1.
  const Eigen::VectorXd w = (ws.log_weights.array() - ws.log_weights.maxCoeff()).exp();
  const double s = w.sum();
  return s * s / w.squaredNorm() / static_cast<double>(ws.size());
}

double bimodality_coefficient(const WeightedSamples& ws, int axis) {
  if (ws.size() == 0 || ess_fraction(ws) * static_cast<double>(ws.size()) < 4.0 - 1e-9)
    throw std::invalid_argument("bimodality coefficient needs at least 4 effective samples");
  const Eigen::VectorXd w = ws.weights() / ws.weights().sum();
  const Eigen::ArrayXd c = centered_axis(ws, axis, w).array();
  const double m2 = (w.array() * c.square()).sum();
  const double m3 = (w.array() * c.cube()).sum();
  const double m4 = (w.array() * c.square().square()).sum();
  if (!(m2 > 0.0)) throw std::domain_error("bimodality coefficient of zero-variance samples");
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  return (skew * skew + 1.0) / kurt;
}

Eigen::Index best_sample(const WeightedSamples& ws) {
  if (ws.size() == 0) throw std::invalid_argument("best_sample of empty sample set");
  Eigen::Index best = 0;
  ws.log_likelihoods.maxCoeff(&best);
  return best;
}

}  // namespace sngr
