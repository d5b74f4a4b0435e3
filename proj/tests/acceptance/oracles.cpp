#include "oracles.hpp"

#include <cmath>
#include <complex>

namespace oracle {

namespace {

using cd = std::complex<double>;

Estimate summarize(const std::vector<double>& per_batch) {
  Estimate e;
  const double n = static_cast<double>(per_batch.size());
  for (double x : per_batch) e.mean += x;
  e.mean /= n;
  double ss = 0.0;
  for (double x : per_batch) ss += (x - e.mean) * (x - e.mean);
  e.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  return e;
}

}  // namespace

Eigen::MatrixXd alpha(const Eigen::MatrixXd& beta, const std::vector<std::size_t>& pilot_of,
                      std::size_t tau, double rho) {
  Eigen::MatrixXd a(beta.rows(), beta.cols());
  for (Eigen::Index m = 0; m < beta.rows(); ++m) {
    for (Eigen::Index k = 0; k < beta.cols(); ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < beta.cols(); ++i) {
        if (pilot_of[i] == pilot_of[k]) s += beta(m, i);
      }
      const double rt = rho * static_cast<double>(tau);
      a(m, k) = rt * beta(m, k) * beta(m, k) / (1.0 + rt * s);
    }
  }
  return a;
}

Estimate sinr_given_estimate(const Eigen::VectorXcd& v, std::size_t k,
                             const Eigen::MatrixXcd& ghat, const Eigen::MatrixXd& beta,
                             const Eigen::MatrixXd& alpha, const Eigen::VectorXd& eta,
                             double rho, cellfree::RngStream& rng, const McOptions& opts) {
  const Eigen::Index m = ghat.rows();
  const Eigen::Index users = ghat.cols();
  const auto kk = static_cast<Eigen::Index>(k);
  const double signal = rho * eta(kk) * std::norm(ghat.col(kk).dot(v));
  const Eigen::MatrixXd err_sd = (beta - alpha).cwiseSqrt();
  std::vector<double> est;
  Eigen::VectorXcd y(m);
  for (std::size_t b = 0; b < opts.batches; ++b) {
    double power = 0.0;
    for (std::size_t t = 0; t < opts.per_batch; ++t) {
      for (Eigen::Index r = 0; r < m; ++r) y(r) = rng.complex_normal();
      for (Eigen::Index i = 0; i < users; ++i) {
        const cd s = std::sqrt(rho * eta(i)) * rng.complex_normal();
        for (Eigen::Index r = 0; r < m; ++r) {
          const cd e = err_sd(r, i) * rng.complex_normal();
          y(r) += (i == kk ? e : ghat(r, i) + e) * s;
        }
      }
      power += std::norm(v.dot(y));
    }
    est.push_back(signal / (power / static_cast<double>(opts.per_batch)));
  }
  return summarize(est);
}

Estimate lsfd_uatf_sinr(const Eigen::VectorXd& v, std::size_t k, const Eigen::MatrixXd& beta,
                        const std::vector<std::size_t>& pilot_of, std::size_t tau,
                        const Eigen::VectorXd& eta, double rho, cellfree::RngStream& rng,
                        const McOptions& opts) {
  const Eigen::Index m = beta.rows();
  const Eigen::Index users = beta.cols();
  const auto kk = static_cast<Eigen::Index>(k);
  const double rt = rho * static_cast<double>(tau);
  std::vector<double> est;
  Eigen::MatrixXcd g(m, users);
  Eigen::VectorXcd ghat_k(m);
  Eigen::VectorXcd s(users);
  for (std::size_t b = 0; b < opts.batches; ++b) {
    cd cross = 0.0;
    double power = 0.0;
    for (std::size_t t = 0; t < opts.per_batch; ++t) {
      for (Eigen::Index i = 0; i < users; ++i) {
        for (Eigen::Index r = 0; r < m; ++r) g(r, i) = std::sqrt(beta(r, i)) * rng.complex_normal();
      }
      // Pilot phase: AP r observes sqrt(rho tau) sum_{same pilot} g + noise.
      for (Eigen::Index r = 0; r < m; ++r) {
        cd obs = rng.complex_normal();
        double denom = 1.0;
        for (Eigen::Index i = 0; i < users; ++i) {
          if (pilot_of[i] != pilot_of[k]) continue;
          obs += std::sqrt(rt) * g(r, i);
          denom += rt * beta(r, i);
        }
        ghat_k(r) = std::sqrt(rt) * beta(r, kk) / denom * obs;
      }
      for (Eigen::Index i = 0; i < users; ++i) s(i) = rng.complex_normal();
      cd out = 0.0;
      for (Eigen::Index r = 0; r < m; ++r) {
        cd y = rng.complex_normal();
        for (Eigen::Index i = 0; i < users; ++i) y += std::sqrt(rho * eta(i)) * g(r, i) * s(i);
        out += v(r) * std::conj(ghat_k(r)) * y;
      }
      cross += out * std::conj(s(kk));
      power += std::norm(out);
    }
    const double n = static_cast<double>(opts.per_batch);
    const double sig = std::norm(cross / n);
    est.push_back(sig / (power / n - sig));
  }
  return summarize(est);
}

double grid_maxmin_rate(const cellfree::LsfdContext& ctx, int n) {
  double best = 0.0;
  Eigen::Vector2d eta;
  for (int a = 1; a <= n; ++a) {
    for (int b = 1; b <= n; ++b) {
      eta << static_cast<double>(a) / n, static_cast<double>(b) / n;
      best = std::max(best, std::log2(1.0 + ctx.sinr(eta).minCoeff()));
    }
  }
  return best;
}

}  // namespace oracle
