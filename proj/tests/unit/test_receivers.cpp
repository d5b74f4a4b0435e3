#include <cmath>
#include <complex>

#include "doctest.h"

#include "cellfree/channel.hpp"
#include "cellfree/low_rank.hpp"
#include "cellfree/receivers.hpp"

using namespace cellfree;
using cd = std::complex<double>;

namespace {

struct Instance {
  PilotAssignment pilots;
  EstimationState est;
  Eigen::MatrixXcd ghat;
};

Instance make_instance(Eigen::Index m, std::vector<std::size_t> pilot_of, std::size_t tau,
                       std::uint64_t seed, double rho = 1e9) {
  RngStream rng(seed);
  const auto k = static_cast<Eigen::Index>(pilot_of.size());
  Eigen::MatrixXd beta(m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) beta(i, j) = 1e-9 * std::pow(10.0, -2.0 * rng.uniform());
  }
  Instance in{PilotAssignment(std::move(pilot_of), tau), {}, {}};
  Eigen::VectorXd eta(k);
  for (Eigen::Index j = 0; j < k; ++j) eta(j) = 0.2 + 0.8 * rng.uniform();
  in.est = alpha_coefficients(beta, in.pilots, rho, eta);
  const auto ch = make_channel(beta, draw_small_scale(static_cast<std::size_t>(m),
                                                      static_cast<std::size_t>(k), rng));
  in.ghat = estimate_channels(ch.g, beta, in.pilots, rho, rng);
  return in;
}

// Dense oracle: rho sum_{i in set} eta_i g_i g_i^H + diag(q).
Eigen::MatrixXcd dense_cov(const Instance& in, const Eigen::VectorXd& q,
                           const std::vector<std::size_t>& set) {
  Eigen::MatrixXcd s = q.cast<cd>().asDiagonal();
  for (auto i : set) {
    const auto col = static_cast<Eigen::Index>(i);
    s += in.est.rho * in.est.eta(col) * in.ghat.col(col) * in.ghat.col(col).adjoint();
  }
  return s;
}

double dense_sinr(const Instance& in, const Eigen::VectorXcd& v, std::size_t k) {
  const auto kk = static_cast<Eigen::Index>(k);
  double interf = 0.0;
  for (Eigen::Index i = 0; i < in.ghat.cols(); ++i) {
    if (i != kk) interf += in.est.eta(i) * std::norm(in.ghat.col(i).dot(v));
  }
  const double noise = (v.adjoint() * in.est.d.cast<cd>().asDiagonal() * v)(0).real();
  return in.est.rho * in.est.eta(kk) * std::norm(in.ghat.col(kk).dot(v)) /
         (in.est.rho * interf + noise);
}

std::vector<std::size_t> range(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

TEST_CASE("diagonal plus low rank solve matches a dense solve") {
  RngStream rng(1);
  const Eigen::Index m = 30;
  const Eigen::Index r = 7;
  Eigen::VectorXd q(m);
  for (Eigen::Index i = 0; i < m; ++i) q(i) = 0.1 + rng.uniform();
  Eigen::MatrixXcd u(m, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) u(i, j) = 10.0 * rng.complex_normal();
  }
  Eigen::VectorXcd b(m);
  for (Eigen::Index i = 0; i < m; ++i) b(i) = rng.complex_normal();
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(q.cast<cd>().asDiagonal()) + u * u.adjoint();
  const DiagonalPlusLowRank<cd> s(q, u);
  CHECK((s.solve(b) - dense.ldlt().solve(b)).norm() <= 1e-10 * dense.ldlt().solve(b).norm());
  const Eigen::VectorXcd col = dense.ldlt().solve(Eigen::VectorXcd(u.col(3)));
  CHECK((s.solve_column(3) - col).norm() <= 1e-10 * col.norm());

  Eigen::VectorXd bad = q;
  bad(2) = 0.0;
  CHECK_THROWS(DiagonalPlusLowRank<cd>(bad, u));
}

TEST_CASE("Sherman-Morrison: single-user MMSE SINR is rho eta g^H D^-1 g") {
  const auto in = make_instance(12, {0}, 1, 2);
  const double s = (in.ghat.col(0).cwiseAbs2().array() / in.est.d.array()).sum();
  const double expect = in.est.rho * in.est.eta(0) * s;
  CHECK(mmse_sinr_closed_form(0, in.ghat, in.est) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("MMSE combiner and closed-form SINR match dense oracles") {
  const auto in = make_instance(40, {0, 1, 2, 0, 1, 2, 0, 1}, 3, 3);
  const MmseReceiver rx(in.ghat, in.est);
  const Eigen::MatrixXcd sigma = dense_cov(in, in.est.d, range(8));
  for (std::size_t k = 0; k < 8; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const Eigen::VectorXcd v_dense =
        std::sqrt(in.est.rho * in.est.eta(kk)) * sigma.ldlt().solve(Eigen::VectorXcd(in.ghat.col(kk)));
    const auto v = rx.combiner(k).v;
    CHECK((v - v_dense).norm() <= 1e-8 * v_dense.norm());
    const double oracle = dense_sinr(in, v_dense, k);
    CHECK(rx.sinr(k) == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(instantaneous_sinr(v, k, in.ghat, in.est) == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("MMSE maximizes SINR over combiners") {
  const auto in = make_instance(16, {0, 1, 0, 1, 0}, 2, 4);
  const MmseReceiver rx(in.ghat, in.est);
  RngStream rng(44);
  for (std::size_t k = 0; k < 5; ++k) {
    const double best = rx.sinr(k);
    CHECK(instantaneous_sinr(in.ghat.col(static_cast<Eigen::Index>(k)), k, in.ghat, in.est) <=
          best * (1.0 + 1e-12));
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXcd v = rx.combiner(k).v;
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += 0.3 * std::abs(v(i)) * rng.complex_normal();
      CHECK(instantaneous_sinr(v, k, in.ghat, in.est) <= best * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("partial MMSE: index set, Q and dominance") {
  const auto in = make_instance(24, {0, 1, 2, 0, 1, 2, 0, 1, 2, 3}, 4, 5);
  for (std::size_t k = 0; k < 10; ++k) {
    const auto iset = pmmse_index_set(k, in.est.beta, in.pilots);
    // Brute-force argmax of beta_k^T beta_i per group.
    for (std::size_t j = 0; j < 4; ++j) {
      std::size_t best = in.pilots.group(j).front();
      double best_score = -1.0;
      for (auto i : in.pilots.group(j)) {
        const double sc = in.est.b(k).dot(in.est.b(i));
        if (sc > best_score) {
          best_score = sc;
          best = i;
        }
      }
      CHECK(iset.neighbors[j] == best);
    }
    for (auto i : in.pilots.copilots(k)) {
      CHECK(std::binary_search(iset.members.begin(), iset.members.end(), i));
    }

    // Q written the long way: B_i outside I_k, C_i inside, plus noise.
    Eigen::VectorXd q = Eigen::VectorXd::Ones(24);
    for (std::size_t i = 0; i < 10; ++i) {
      const bool in_set = std::binary_search(iset.members.begin(), iset.members.end(), i);
      q += in.est.rho * in.est.eta(static_cast<Eigen::Index>(i)) *
           (in_set ? in.est.c(i) : Eigen::VectorXd(in.est.b(i)));
    }
    CHECK(pmmse_q(iset, in.est).isApprox(q, 1e-12));

    const double mmse = mmse_sinr_closed_form(k, in.ghat, in.est);
    const double pmmse =
        instantaneous_sinr(pmmse_combiner(k, in.ghat, in.est, iset).v, k, in.ghat, in.est);
    CHECK(pmmse >= 0.0);
    CHECK(pmmse <= mmse * (1.0 + 1e-10));
  }
}

TEST_CASE("partial MMSE over all users reduces to MMSE") {
  const auto in = make_instance(20, {0, 1, 0, 1, 2}, 3, 6);
  const auto iset = make_index_set(1, in.pilots, {0, 1, 2, 3, 4});
  CHECK(pmmse_q(iset, in.est).isApprox(in.est.d));
  for (std::size_t k : {1u}) {
    const auto v = pmmse_combiner(k, in.ghat, in.est, iset).v;
    CHECK(v.isApprox(mmse_combiner(k, in.ghat, in.est).v, 1e-12));
  }
}

TEST_CASE("random index set picks one member per pilot group") {
  const PilotAssignment p({0, 1, 0, 1, 2, 2, 2}, 3);
  RngStream rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto iset = pmmse_index_set_random(4, p, rng);
    REQUIRE(iset.neighbors.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) CHECK(p.pilot_of(iset.neighbors[j]) == j);
  }
}

TEST_CASE("LSFD statistics, optimal combiner and MF weights") {
  const auto in = make_instance(10, {0, 1, 0, 0, 1}, 2, 8, 3e9);
  const auto& est = in.est;
  for (std::size_t k = 0; k < 5; ++k) {
    const auto st = lsfd_statistics(k, est.beta, in.pilots, est);
    // Lambda_m = rho sum_i eta_i alpha_mk beta_mi + alpha_mk.
    const Eigen::VectorXd lambda =
        est.a(k).cwiseProduct(est.rho * (est.beta * est.eta) + Eigen::VectorXd::Ones(10));
    CHECK(st.lambda.isApprox(lambda, 1e-12));
    for (auto i : st.copilots) {
      // mu_i = beta_k * alpha_i / beta_i.
      const Eigen::VectorXd mu = est.b(k).cwiseProduct(est.a(i)).cwiseQuotient(est.b(i));
      CHECK(st.mu.col(st.column_of(i)).isApprox(mu, 1e-12));
    }

    const auto opt = lsfd_combiner_and_sinr(st, est.eta);
    CHECK(lsfd_sinr(st, opt.v, est.eta) == doctest::Approx(opt.sinr).epsilon(1e-10));
    CHECK(lsfd_sinr(st, 3.0 * opt.v, est.eta) == doctest::Approx(opt.sinr).epsilon(1e-10));
    const double mf = mf_sinr_lsfd_frame(st, est.eta);
    CHECK(mf == doctest::Approx(lsfd_sinr(st, Eigen::VectorXd::Ones(10), est.eta)));
    CHECK(mf <= opt.sinr * (1.0 + 1e-12));
    CHECK(mf_sinr_lsfd_frame(st, est.eta, MfCombinerMode::kIndexRamp) <= opt.sinr * (1.0 + 1e-12));
  }
  CHECK(mf_weights(4, MfCombinerMode::kIndexRamp) == Eigen::Vector4d(1, 2, 3, 4));
}

TEST_CASE("LSFD without co-pilots is rho eta mu^T Lambda^-1 mu") {
  const auto in = make_instance(6, {0, 1}, 2, 9);
  const auto st = lsfd_statistics(0, in.est.beta, in.pilots, in.est);
  const double expect =
      in.est.rho * in.est.eta(0) * (st.mu.col(0).array().square() / st.lambda.array()).sum();
  CHECK(lsfd_combiner_and_sinr(st, in.est.eta).sinr == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("MF asymptotic SINR") {
  MfAsymptoticInputs a;
  a.users = {{0.5, 0.5}, {1.5, 1.5}, {0.2, 1.0}};
  a.path_loss = PathLossParams::cost231(1900.0, 15.0, 1.65);
  a.rho = NoiseModel{}.normalized_rho();
  a.eta = Eigen::VectorXd::Ones(3);
  a.n_samples = 20000;
  RngStream rng(10);
  const PilotAssignment p({0, 0, 1}, 2);
  CHECK(std::isinf(mf_asymptotic_sinr(2, p, a, rng)));
  const double s0 = mf_asymptotic_sinr(0, p, a, rng);
  CHECK(std::isfinite(s0));
  CHECK(s0 > 0.0);
  // Co-located co-pilots without shadowing have identical statistics, so
  // the limit is eta_k / eta_i.
  a.users[1] = a.users[0];
  a.sigma_shad_db = 0.0;
  a.eta(1) = 0.25;
  CHECK(mf_asymptotic_sinr(0, p, a, rng) == doctest::Approx(4.0).epsilon(1e-12));
}
