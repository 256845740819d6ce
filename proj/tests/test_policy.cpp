#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pcrpo/cmdp.hpp"
#include "pcrpo/policy.hpp"
#include "test_util.hpp"

using namespace pcrpo;
using pcrpo::testutil::random_cmdp;
using pcrpo::testutil::random_policy;

TEST_CASE("action_probs: uniform, stabilized, closed form") {
  SoftmaxPolicy uniform(3, 4);
  const Vector p = uniform.action_probs(0);
  for (int a = 0; a < 4; ++a) CHECK(p(a) == doctest::Approx(0.25));

  Matrix big(1, 2);
  big << 1000.0, 0.0;
  const Vector pb = SoftmaxPolicy(big).action_probs(0);
  CHECK(pb(0) == doctest::Approx(1.0));
  CHECK(pb(1) == doctest::Approx(0.0));
  CHECK(std::isfinite(pb(0)));

  Matrix ln2(1, 2);
  ln2 << std::log(2.0), 0.0;
  const Vector pl = SoftmaxPolicy(ln2).action_probs(0);
  CHECK(pl(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(pl(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("probability rows sum to one") {
  Rng rng(1);
  SoftmaxPolicy pol = random_policy(rng, 6, 5, 3.0);
  const Matrix probs = pol.prob_matrix();
  for (int s = 0; s < 6; ++s) {
    CHECK(probs.row(s).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(probs.row(s).minCoeff() > 0.0);
  }
}

TEST_CASE("score closed form and identity") {
  SoftmaxPolicy uniform(1, 2);
  const Vector sc = uniform.score(0, 0);
  CHECK(sc(0) == doctest::Approx(0.5));
  CHECK(sc(1) == doctest::Approx(-0.5));

  Rng rng(2);
  SoftmaxPolicy pol = random_policy(rng, 4, 3, 2.0);
  for (int s = 0; s < 4; ++s) {
    Vector acc = Vector::Zero(12);
    const Vector probs = pol.action_probs(s);
    for (int a = 0; a < 3; ++a) acc += probs(a) * pol.score(s, a);
    CHECK(acc.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("score matches finite differences of log pi") {
  Rng rng(3);
  SoftmaxPolicy pol = random_policy(rng, 3, 3, 1.5);
  const double h = 1e-6;
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 3; ++a) {
      const Vector sc = pol.score(s, a);
      for (int s2 = 0; s2 < 3; ++s2) {
        for (int a2 = 0; a2 < 3; ++a2) {
          Matrix up = pol.logits(), dn = pol.logits();
          up(s2, a2) += h;
          dn(s2, a2) -= h;
          const double fd = (std::log(SoftmaxPolicy(up).action_probs(s)(a)) -
                             std::log(SoftmaxPolicy(dn).action_probs(s)(a))) /
                            (2.0 * h);
          CHECK(sc(s2 * 3 + a2) == doctest::Approx(fd).epsilon(1e-6));
        }
      }
    }
  }
}

TEST_CASE("value_gradient: constant Q gives the zero vector") {
  Rng rng(4);
  const CmdpSpec spec = random_cmdp(rng, 4, 3, 0.8);
  SoftmaxPolicy pol = random_policy(rng, 4, 3);
  QTable q{Matrix::Constant(4, 3, 2.5), Channel::reward()};
  CHECK(value_gradient(spec, pol, q).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("value_gradient matches central finite differences of exact_value") {
  Rng rng(5);
  const CmdpSpec spec = random_cmdp(rng, 3, 2, 0.85);
  SoftmaxPolicy pol = random_policy(rng, 3, 2);
  const QTable q = exact_q(spec, pol, Channel::reward());
  const Vector grad = value_gradient(spec, pol, q);

  const double h = 1e-5;
  Vector fd(grad.size());
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) {
      Matrix up = pol.logits(), dn = pol.logits();
      up(s, a) += h;
      dn(s, a) -= h;
      fd(s * 2 + a) =
          (exact_value(spec, SoftmaxPolicy(up), Channel::reward()) -
           exact_value(spec, SoftmaxPolicy(dn), Channel::reward())) /
          (2.0 * h);
    }
  }
  const double rel =
      (grad - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff();
  CHECK(rel < 1e-5);
}

TEST_CASE("sampled value gradient converges to the exact gradient") {
  Rng rng(6);
  const CmdpSpec spec = random_cmdp(rng, 3, 2, 0.6);
  SoftmaxPolicy pol = random_policy(rng, 3, 2, 0.5);
  const QTable q = exact_q(spec, pol, Channel::reward());
  const Vector exact = value_gradient(spec, pol, q);

  // batch means give a per-coordinate standard error for a 3-sigma check
  const int batches = 20;
  const int per_batch = 4000;
  Matrix batch_means(batches, exact.size());
  for (int b = 0; b < batches; ++b) {
    batch_means.row(b) = value_gradient_sampled(
        spec, pol, q, per_batch, -1, derive_seed(99, {static_cast<std::uint64_t>(b)}));
  }
  for (int k = 0; k < exact.size(); ++k) {
    const double mean = batch_means.col(k).mean();
    const double var =
        (batch_means.col(k).array() - mean).square().sum() / (batches - 1);
    const double se = std::sqrt(var / batches);
    CHECK(std::abs(mean - exact(k)) <= 3.0 * se + 2e-3);
  }
}

TEST_CASE("npg_update closed forms") {
  SoftmaxPolicy pol(2, 2);
  QTable zero{Matrix::Zero(2, 2), Channel::reward()};
  CHECK(npg_update(pol, zero, 0.9, 0.5, +1).logits() == pol.logits());

  Matrix qt = Matrix::Zero(2, 2);
  qt(1, 0) = 1.0;
  QTable q{qt, Channel::reward()};
  const SoftmaxPolicy next = npg_update(pol, q, 0.5, 0.1, +1);
  CHECK(next.logits()(1, 0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(next.logits()(0, 0) == 0.0);
  CHECK(next.logits()(1, 1) == 0.0);
}

TEST_CASE("npg sign -1 reduces the probability of a high-cost action") {
  Rng rng(7);
  const CmdpSpec spec = random_cmdp(rng, 3, 3, 0.8);
  SoftmaxPolicy pol = random_policy(rng, 3, 3);
  const QTable qc = exact_q(spec, pol, Channel::cost(0));
  int s_max = 0, a_max = 0;
  qc.table.maxCoeff(&s_max, &a_max);
  const SoftmaxPolicy next = npg_update(pol, qc, spec.gamma, 0.1, -1);
  CHECK(next.action_probs(s_max)(a_max) < pol.action_probs(s_max)(a_max));
}

TEST_CASE("npg ascent: small step on exact Q increases the reward value") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const CmdpSpec spec = random_cmdp(rng, 4, 3, 0.8);
    SoftmaxPolicy pol = random_policy(rng, 4, 3);
    const QTable q = exact_q(spec, pol, Channel::reward());
    const SoftmaxPolicy next = npg_update(pol, q, spec.gamma, 0.05, +1);
    CHECK(exact_value(spec, next, Channel::reward()) >
          exact_value(spec, pol, Channel::reward()));
  }
}

TEST_CASE("direction_update basics and linearity") {
  SoftmaxPolicy pol(2, 3);
  CHECK(direction_update(pol, Vector::Zero(6), 1.0).logits() == pol.logits());

  Vector e = Vector::Zero(6);
  e(1 * 3 + 2) = 1.0;
  CHECK(direction_update(pol, e, 1.0).logits()(1, 2) == doctest::Approx(1.0));

  Rng rng(9);
  Vector d(6);
  for (int i = 0; i < 6; ++i) d(i) = rng.normal();
  const SoftmaxPolicy two_half =
      direction_update(direction_update(pol, d, 0.35), d, 0.35);
  const SoftmaxPolicy one_full = direction_update(pol, d, 0.7);
  CHECK((two_half.logits() - one_full.logits()).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK_THROWS_AS(direction_update(pol, Vector::Zero(5), 1.0),
                  DimensionMismatchError);
}

TEST_CASE("kl divergence: zero, closed form, nonnegativity") {
  SoftmaxPolicy p(2, 2);
  Vector w(2);
  w << 0.5, 0.5;
  CHECK(kl_divergence(p, p, w) == doctest::Approx(0.0));

  // rows (0.5, 0.5) vs (0.9, 0.1) in a single state
  Matrix old_logits = Matrix::Zero(1, 2);
  Matrix new_logits = Matrix::Zero(1, 2);
  new_logits(0, 0) = std::log(9.0);  // softmax -> (0.9, 0.1)
  Vector one(1);
  one << 1.0;
  const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  CHECK(kl_divergence(SoftmaxPolicy(old_logits), SoftmaxPolicy(new_logits),
                      one) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(0.51083).epsilon(1e-4));

  Rng rng(10);
  for (int trial = 0; trial < 10000; ++trial) {
    SoftmaxPolicy a = random_policy(rng, 2, 3, 1.5);
    SoftmaxPolicy b = random_policy(rng, 2, 3, 1.5);
    Vector ws(2);
    const double u = rng.uniform();
    ws << u, 1.0 - u;
    CHECK(kl_divergence(a, b, ws) >= 0.0);
  }
}

TEST_CASE("flatten/unflatten round trip") {
  Rng rng(11);
  Matrix m(3, 4);
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 4; ++a) m(s, a) = rng.normal();
  }
  CHECK(unflatten(flatten(m), 3, 4) == m);
  CHECK(flatten(m)(1 * 4 + 2) == m(1, 2));
}
