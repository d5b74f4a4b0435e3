#include <cmath>

#include "doctest.h"

#include "cellfree/channel.hpp"
#include "cellfree/det_equiv.hpp"
#include "cellfree/errors.hpp"
#include "cellfree/receivers.hpp"

using namespace cellfree;

namespace {

struct Setup {
  PilotAssignment pilots;
  EstimationState est;
};

Setup make_setup(Eigen::Index m, std::vector<std::size_t> pilot_of, std::size_t tau, double lo,
                 double hi, double rho, std::uint64_t seed) {
  RngStream rng(seed);
  const auto k = static_cast<Eigen::Index>(pilot_of.size());
  Eigen::MatrixXd beta(m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) beta(i, j) = lo + (hi - lo) * rng.uniform();
  }
  Setup s{PilotAssignment(std::move(pilot_of), tau), {}};
  s.est = alpha_coefficients(beta, s.pilots, rho, Eigen::VectorXd::Ones(k));
  return s;
}

// Oracle for T written from its definition.
Eigen::VectorXd oracle_t(const DeInputs& in, const std::vector<std::size_t>& idx,
                         const Eigen::VectorXd& delta) {
  const double m = static_cast<double>(in.num_aps());
  Eigen::VectorXd inv = in.q / m;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    inv += in.rho * in.eta(static_cast<Eigen::Index>(idx[c])) /
           (m * (1.0 + delta(static_cast<Eigen::Index>(c)))) * in.a(idx[c]);
  }
  return inv.cwiseInverse();
}

}  // namespace

TEST_CASE("single-index fixed point solves the scalar quadratic") {
  // Equal alpha = a and q on every AP: delta = c M / (c / (1 + delta) + q)
  // with c = rho eta a, i.e. q d^2 + (q + c - c M) d - c M = 0.
  const Eigen::Index m = 64;
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(m, 1, 0.3);
  DeInputs in;
  in.k = 0;
  in.alpha = &alpha;
  in.q = Eigen::VectorXd::Constant(m, 2.0);
  in.rho = 5.0;
  in.eta = Eigen::VectorXd::Ones(1);
  const double c = 5.0 * 0.3;
  const double q = 2.0;
  const double b = q + c - c * m;
  const double root = (-b + std::sqrt(b * b + 4.0 * q * c * m)) / (2.0 * q);
  const auto fp = solve_fixed_point(in, {0});
  CHECK(fp.delta(0) == doctest::Approx(root).epsilon(1e-8));
  CHECK(fp.t(0) == doctest::Approx(m / (c / (1.0 + root) + q)).epsilon(1e-8));

  DeOptions far;
  far.init = 1e-3;
  CHECK(solve_fixed_point(in, {0}, far).delta(0) == doctest::Approx(root).epsilon(1e-8));
}

TEST_CASE("fixed point, J and T' agree with finite differences") {
  const auto s = make_setup(48, {0, 1, 2, 3, 0, 1, 2, 3, 0, 1}, 4, 0.2, 1.0, 3.0, 1);
  const auto iset = pmmse_index_set(0, s.est.beta, s.pilots);
  const DeInputs in = make_de_inputs(0, s.est, s.pilots, iset);
  REQUIRE(!in.others.empty());
  const auto fp = fixed_point_deltas(in);

  // Fixed-point property.
  const Eigen::VectorXd t = oracle_t(in, fp.indices, fp.delta);
  const double m = 48.0;
  for (std::size_t c = 0; c < fp.indices.size(); ++c) {
    const auto i = fp.indices[c];
    CHECK(fp.delta(static_cast<Eigen::Index>(c)) ==
          doctest::Approx(in.rho * in.eta(static_cast<Eigen::Index>(i)) / m * in.a(i).dot(t))
              .epsilon(1e-8));
  }

  // J is the Jacobian of the fixed-point map.
  const TAndJ tj = compute_T_and_J(in, fp);
  const double h = 1e-6;
  for (std::size_t l = 0; l < fp.indices.size(); ++l) {
    Eigen::VectorXd up = fp.delta;
    Eigen::VectorXd dn = fp.delta;
    up(static_cast<Eigen::Index>(l)) += h;
    dn(static_cast<Eigen::Index>(l)) -= h;
    const Eigen::VectorXd tu = oracle_t(in, fp.indices, up);
    const Eigen::VectorXd td = oracle_t(in, fp.indices, dn);
    for (std::size_t j = 0; j < fp.indices.size(); ++j) {
      const auto uj = fp.indices[j];
      const double fd = in.rho * in.eta(static_cast<Eigen::Index>(uj)) / m *
                        in.a(uj).dot(tu - td) / (2.0 * h);
      CHECK(tj.j(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) ==
            doctest::Approx(fd).epsilon(1e-5));
    }
  }

  // T'(H) = dT/dz where Q/M is replaced by Q/M - z H.
  Eigen::VectorXd hv(48);
  for (Eigen::Index i = 0; i < 48; ++i) hv(i) = 0.5 + 0.01 * static_cast<double>(i);
  const DeterministicEquivalent de(in);
  const Eigen::VectorXd tp = de.t_prime(hv);
  const double z = 1e-5;
  DeInputs plus = in;
  DeInputs minus = in;
  plus.q = in.q - z * m * hv;
  minus.q = in.q + z * m * hv;
  DeOptions tight;
  tight.tol = 1e-14;
  const Eigen::VectorXd fd =
      (solve_fixed_point(plus, in.others, tight).t - solve_fixed_point(minus, in.others, tight).t) /
      (2.0 * z);
  CHECK((tp - fd).norm() <= 1e-5 * fd.norm());
}

TEST_CASE("deterministic equivalent tracks the mean partial MMSE SINR") {
  // Co-located-like statistics: SINR concentrates, so E[SINR] is the target.
  // Only pilot 0 is shared, so I_k holds every user and no estimate outside
  // I_k is collinear with one inside it.
  const auto s = make_setup(256, {0, 1, 2, 3, 0, 4, 5, 6}, 7, 0.5, 1.5, 1.0, 2);
  RngStream rng(77);
  for (std::size_t k : {0u, 4u}) {
    const auto iset = pmmse_index_set(k, s.est.beta, s.pilots);
    const double de = de_sinr_pmmse(make_de_inputs(k, s.est, s.pilots, iset));
    double mean = 0.0;
    const int n = 300;
    for (int r = 0; r < n; ++r) {
      const auto ch = make_channel(s.est.beta, draw_small_scale(256, 8, rng));
      REQUIRE(iset.members.size() == 8);
      const auto ghat = estimate_channels(ch.g, s.est.beta, s.pilots, s.est.rho, rng);
      mean += instantaneous_sinr(pmmse_combiner(k, ghat, s.est, iset).v, k, ghat, s.est);
    }
    mean /= n;
    CHECK(de == doctest::Approx(mean).epsilon(0.03));
  }
}

TEST_CASE("lambda of a lone user without outside interference is tr(A_k T) / M - correction") {
  // Single pilot group: I_k = S_{b_k}, T = M Q^-1 exactly.
  const auto s = make_setup(16, {0, 0}, 1, 0.5, 1.0, 2.0, 3);
  const auto iset = pmmse_index_set(0, s.est.beta, s.pilots);
  const auto in = make_de_inputs(0, s.est, s.pilots, iset);
  CHECK(in.others.empty());
  const DeterministicEquivalent de(in);
  const Eigen::VectorXd t = 16.0 * in.q.cwiseInverse();
  CHECK(de.deltas().t.isApprox(t));

  // Gamma and lambda for two users from the definitions.
  const double m = 16.0;
  const double t00 = (in.a(0).array() * t.array()).sum();
  const double t11 = (in.a(1).array() * t.array()).sum();
  const double t01 = ((in.a(0).array() * in.a(1).array()).sqrt() * t.array()).sum();
  Eigen::Matrix2d tr{{t00, t01}, {t01, t11}};
  const Eigen::Matrix2d gamma = std::sqrt(in.rho) / m * tr;  // eta = 1
  const Eigen::Matrix2d big = Eigen::Matrix2d::Identity() + in.rho / m * tr;
  const Eigen::Vector2d y = big.ldlt().solve(Eigen::Vector2d(gamma.col(0)));
  CHECK(de.lambda(0) == doctest::Approx(t00 / m - y.dot(gamma.col(0))).epsilon(1e-12));
  CHECK(de.lambda(1) == doctest::Approx(t01 / m - y.dot(gamma.col(1))).epsilon(1e-12));
}

TEST_CASE("non-convergence is reported") {
  const auto s = make_setup(32, {0, 1, 0, 1}, 2, 0.2, 1.0, 3.0, 4);
  const auto iset = pmmse_index_set(0, s.est.beta, s.pilots);
  DeOptions opts;
  opts.max_iter = 1;
  CHECK_THROWS_AS(de_sinr_pmmse(make_de_inputs(0, s.est, s.pilots, iset), opts),
                  ConvergenceError);
}

TEST_CASE("I - J singularity is detected") {
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(factor_i_minus_j(j), NumericalError);
  j.setConstant(0.1);
  CHECK_NOTHROW(factor_i_minus_j(j));
}
