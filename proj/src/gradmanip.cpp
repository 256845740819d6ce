#include "pcrpo/gradmanip.hpp"

#include <algorithm>
#include <cmath>

namespace pcrpo {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_same_dim(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 1) {
    throw DimensionMismatchError("gradient dimensions do not match");
  }
}

void require_nonzero_pair(const GradientPair& pair) {
  require_same_dim(pair.g_r, pair.g_c);
  if (pair.g_r.norm() <= kZeroNormEps) {
    throw ZeroGradientError("reward gradient has zero norm");
  }
  if (pair.g_c.norm() <= kZeroNormEps) {
    throw ZeroGradientError("cost gradient has zero norm");
  }
}

// Shared dispatch for manipulate / surgery_manipulate. `one_sided` selects the
// surgery rule on the conflict branch.
ManipulationResult dispatch_combine(const GradientPair& pair, bool normalize,
                                    bool one_sided) {
  require_same_dim(pair.g_r, pair.g_c);
  pair.weights.validate();

  const double nr = pair.g_r.norm();
  const double nc = pair.g_c.norm();
  if (nr <= kZeroNormEps && nc <= kZeroNormEps) {
    throw ZeroGradientError("both gradients have zero norm");
  }

  ManipulationResult res;
  if (nc <= kZeroNormEps) {
    // Inactive cost channel: fall back to the weighted reward gradient.
    res.direction = pair.weights.beta_r * (normalize ? Vector(pair.g_r / nr) : pair.g_r);
    res.cos_theta = 0.0;
    res.theta_deg = 90.0;
    res.mode = CombineMode::AlignedAveraged;
    res.lambda_r = pair.weights.beta_r;
    res.lambda_c = 0.0;
    return res;
  }
  if (nr <= kZeroNormEps) {
    res.direction = pair.weights.beta_c * (normalize ? Vector(pair.g_c / nc) : pair.g_c);
    res.cos_theta = 0.0;
    res.theta_deg = 90.0;
    res.mode = CombineMode::AlignedAveraged;
    res.lambda_r = 0.0;
    res.lambda_c = pair.weights.beta_c;
    return res;
  }

  GradientPair work = pair;
  if (normalize) {
    work.g_r /= nr;
    work.g_c /= nc;
  }
  const double c = cos_angle(work.g_r, work.g_c);
  res.cos_theta = c;
  res.theta_deg = std::acos(c) * 180.0 / kPi;

  if (c < 0.0) {
    res.mode = CombineMode::ConflictProjected;
    res.direction = one_sided ? surgery_combine(work) : combine_conflicting(work);
    const double wr = work.g_r.norm();
    const double wc = work.g_c.norm();
    if (one_sided) {
      // g' = (g_r + g_c - (c wc / wr) g_r) / 2
      res.lambda_r = 0.5 * (1.0 - c * wc / wr);
      res.lambda_c = 0.5;
    } else {
      res.lambda_r = pair.weights.beta_r_plus - pair.weights.beta_c_plus * c * wc / wr;
      res.lambda_c = pair.weights.beta_c_plus - pair.weights.beta_r_plus * c * wr / wc;
    }
  } else {
    res.mode = CombineMode::AlignedAveraged;
    res.direction = one_sided ? Vector(0.5 * (work.g_r + work.g_c))
                              : combine_aligned(work);
    res.lambda_r = one_sided ? 0.5 : pair.weights.beta_r;
    res.lambda_c = one_sided ? 0.5 : pair.weights.beta_c;
  }
  if (!res.direction.allFinite()) {
    throw EvaluationError("combined direction is not finite");
  }
  return res;
}

NormComparison compare_norms(const GradientPair& pair) {
  NormComparison cmp;
  cmp.combined = combine_conflicting(pair).norm();
  cmp.averaged = combine_aligned(pair).norm();
  cmp.surgery = surgery_combine(pair).norm();
  cmp.dominates_average = cmp.combined >= cmp.averaged;
  cmp.dominates_surgery = cmp.combined >= cmp.surgery;
  return cmp;
}

}  // namespace

void GradientWeights::validate() const {
  const bool convex = beta_r >= 0.0 && beta_c >= 0.0 && beta_r_plus >= 0.0 &&
                      beta_c_plus >= 0.0 &&
                      std::abs(beta_r + beta_c - 1.0) <= 1e-9 &&
                      std::abs(beta_r_plus + beta_c_plus - 1.0) <= 1e-9;
  if (!convex) {
    throw InvalidSpecError("combination weights must be nonnegative and sum to 1 pairwise");
  }
}

const char* to_string(CombineMode mode) {
  return mode == CombineMode::ConflictProjected ? "conflict_projected"
                                                : "aligned_averaged";
}

double cos_angle(const Vector& g_a, const Vector& g_b) {
  require_same_dim(g_a, g_b);
  const double na = g_a.norm();
  const double nb = g_b.norm();
  if (na <= kZeroNormEps || nb <= kZeroNormEps) {
    throw ZeroGradientError("cos_angle requires nonzero vectors");
  }
  return std::clamp(g_a.dot(g_b) / (na * nb), -1.0, 1.0);
}

Vector project_onto_normal_plane(const Vector& g_a, const Vector& g_b) {
  require_same_dim(g_a, g_b);
  const double nb2 = g_b.squaredNorm();
  if (nb2 <= kZeroNormEps * kZeroNormEps) {
    throw ZeroGradientError("cannot project onto the normal plane of a zero vector");
  }
  return g_a - (g_a.dot(g_b) / nb2) * g_b;
}

Vector combine_conflicting(const GradientPair& pair) {
  require_nonzero_pair(pair);
  pair.weights.validate();
  return pair.weights.beta_r_plus * project_onto_normal_plane(pair.g_r, pair.g_c) +
         pair.weights.beta_c_plus * project_onto_normal_plane(pair.g_c, pair.g_r);
}

Vector combine_aligned(const GradientPair& pair) {
  require_nonzero_pair(pair);
  pair.weights.validate();
  return pair.weights.beta_r * pair.g_r + pair.weights.beta_c * pair.g_c;
}

ManipulationResult manipulate(const GradientPair& pair, bool normalize) {
  return dispatch_combine(pair, normalize, /*one_sided=*/false);
}

Vector surgery_combine(const GradientPair& pair) {
  require_nonzero_pair(pair);
  if (cos_angle(pair.g_r, pair.g_c) < 0.0) {
    return 0.5 * (pair.g_r + project_onto_normal_plane(pair.g_c, pair.g_r));
  }
  return 0.5 * (pair.g_r + pair.g_c);
}

ManipulationResult surgery_manipulate(const GradientPair& pair, bool normalize) {
  return dispatch_combine(pair, normalize, /*one_sided=*/true);
}

NormDominanceReport norm_dominance_report(const GradientPair& pair) {
  require_nonzero_pair(pair);
  NormDominanceReport rep;
  rep.cos_theta = cos_angle(pair.g_r, pair.g_c);
  rep.theta_deg = std::acos(rep.cos_theta) * 180.0 / kPi;
  rep.raw = compare_norms(pair);
  GradientPair unit = pair;
  unit.g_r /= unit.g_r.norm();
  unit.g_c /= unit.g_c.norm();
  rep.normalized = compare_norms(unit);
  return rep;
}

ImprovementBounds improvement_bounds(const GradientPair& pair, double eta,
                                     double lipschitz) {
  require_nonzero_pair(pair);
  if (eta <= 0.0 || lipschitz <= 0.0) {
    throw StepTooLargeError("eta and L must be positive");
  }
  if (eta * lipschitz > 1.0 + 1e-9) {
    throw StepTooLargeError("step size exceeds 1/L");
  }
  const double a = pair.g_r.norm();
  const double b = pair.g_c.norm();
  const double c = cos_angle(pair.g_r, pair.g_c);
  const double ab = a * b;
  const double a2b2 = a * a + b * b;

  ImprovementBounds out;
  if (c < 0.0) {
    out.lower = eta * (3.0 * a2b2 - 3.0 * c * c * a2b2 - 2.0 * c * c * c * ab +
                       2.0 * c * ab) / 8.0;
    out.upper = (1.0 / lipschitz) *
                (5.0 * a2b2 - 5.0 * c * c * a2b2 + 2.0 * c * c * c * ab -
                 2.0 * c * ab) / 8.0;
  } else {
    out.lower = eta * (3.0 * a2b2 + 6.0 * c * ab) / 8.0;
    out.upper = (1.0 / lipschitz) * (5.0 * a2b2 + 10.0 * c * ab) / 8.0;
  }
  return out;
}

double QuadraticTestSpec::f(const Vector& w) const {
  return 0.5 * w.dot((h_r + h_c) * w) + (b_r + b_c).dot(w);
}

void QuadraticTestSpec::validate() const {
  const int n = dim();
  if (n < 1 || h_r.rows() != n || h_r.cols() != n || h_c.rows() != n ||
      h_c.cols() != n || b_r.size() != n || b_c.size() != n) {
    throw DimensionMismatchError("quadratic spec dimensions are inconsistent");
  }
  if ((h_r - h_r.transpose()).cwiseAbs().maxCoeff() > 1e-9 ||
      (h_c - h_c.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidSpecError("quadratic Hessians must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> er(h_r);
  Eigen::SelfAdjointEigenSolver<Matrix> ec(h_c);
  if (er.eigenvalues().maxCoeff() > 1e-9 || ec.eigenvalues().maxCoeff() > 1e-9) {
    throw InvalidSpecError("quadratic Hessians must be negative semidefinite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h_r + h_c);
  const double spectral =
      es.eigenvalues().cwiseAbs().maxCoeff();
  if (lipschitz + 1e-9 < spectral) {
    throw InvalidSpecError("L must dominate the spectral norm of H_r + H_c");
  }
}

QuadraticTestSpec QuadraticTestSpec::random(int dim, Rng& rng) {
  QuadraticTestSpec spec;
  Matrix ar(dim, dim), ac(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      ar(i, j) = rng.normal();
      ac(i, j) = rng.normal();
    }
  }
  spec.h_r = -(ar * ar.transpose()) / dim;
  spec.h_c = -(ac * ac.transpose()) / dim;
  spec.b_r = Vector(dim);
  spec.b_c = Vector(dim);
  spec.w0 = Vector(dim);
  for (int i = 0; i < dim; ++i) {
    spec.b_r(i) = rng.normal();
    spec.b_c(i) = rng.normal();
    spec.w0(i) = 0.5 * rng.normal();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(spec.h_r + spec.h_c);
  spec.lipschitz = es.eigenvalues().cwiseAbs().maxCoeff();
  return spec;
}

TheoremCheck verify_theorem_bounds(const QuadraticTestSpec& spec, double eta) {
  spec.validate();
  if (eta * spec.lipschitz > 1.0 + 1e-9) {
    throw StepTooLargeError("step size exceeds 1/L");
  }
  GradientPair pair(spec.grad_r(spec.w0), spec.grad_c(spec.w0));
  const ManipulationResult m = manipulate(pair, /*normalize=*/false);
  const ImprovementBounds bounds = improvement_bounds(pair, eta, spec.lipschitz);

  TheoremCheck check;
  check.cos_theta = m.cos_theta;
  check.theta_deg = m.theta_deg;
  const Vector w1 = spec.w0 + eta * m.direction;
  check.delta_f = spec.f(w1) - spec.f(spec.w0);
  check.lower = bounds.lower;
  check.upper = bounds.upper;
  check.lower_holds = check.delta_f >= bounds.lower - 1e-9;
  check.upper_holds = check.delta_f <= bounds.upper + 1e-9;
  return check;
}

}  // namespace pcrpo
