#include "pcrpo/sweeps.hpp"

#include <algorithm>
#include <limits>
#include <cmath>

#include "pcrpo/rng.hpp"

namespace pcrpo {

namespace {

constexpr double kOrthTol = 1e-9;
constexpr double kIdemTol = 1e-12;
constexpr double kEqNormTol = 1e-9;
constexpr double kAscentTol = 1e-9;

Vector gaussian_vec(int dim, Rng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace

PairOutcome evaluate_pair_sample(int dim, std::uint64_t seed, long index) {
  Rng rng(derive_seed(seed, {0x9a17ULL, static_cast<std::uint64_t>(index)}));
  Vector a, b;
  do {
    a = gaussian_vec(dim, rng);
  } while (a.norm() <= 1e-8);
  do {
    b = gaussian_vec(dim, rng);
  } while (b.norm() <= 1e-8);

  PairOutcome out;

  // raw-pair measurements
  const Vector pa = project_onto_normal_plane(a, b);
  const Vector pb = project_onto_normal_plane(b, a);
  out.orth_residual = std::max(std::abs(pa.dot(b)), std::abs(pb.dot(a))) /
                      (a.norm() * b.norm());
  if (pa.norm() > 1e-9) {
    out.idem_residual =
        (project_onto_normal_plane(pa, b) - pa).norm() / pa.norm();
  }
  GradientPair raw(a, b);
  out.raw_avg_gap =
      combine_conflicting(raw).norm() - combine_aligned(raw).norm();
  out.raw_surgery_gap =
      combine_conflicting(raw).norm() - surgery_combine(raw).norm();

  // unit-pair measurements
  GradientPair unit(a / a.norm(), b / b.norm());
  const double c = cos_angle(unit.g_r, unit.g_c);
  out.cos_theta = c;
  const double combined = combine_conflicting(unit).norm();
  const double averaged = combine_aligned(unit).norm();
  if (c <= 0.0) {
    out.eqnorm_checked = true;
    out.eqnorm_residual = std::abs(combined - (1.0 - c) * averaged);
  }
  if (c < 0.0) {
    out.surgery_checked = true;
    out.surgery_gap = combined - surgery_combine(unit).norm();
  }
  const double expected_ascent =
      (1.0 - c * c) *
      (unit.g_r.squaredNorm() + unit.g_c.squaredNorm()) / 2.0;
  const double actual_ascent =
      (unit.g_r + unit.g_c).dot(combine_conflicting(unit));
  out.ascent_residual =
      std::abs(actual_ascent - expected_ascent) / (1.0 + std::abs(expected_ascent));
  return out;
}

std::vector<PairOutcome> gradient_sweep_serial(int dim, long n_samples,
                                               std::uint64_t seed) {
  std::vector<PairOutcome> out(n_samples);
  for (long i = 0; i < n_samples; ++i) {
    out[i] = evaluate_pair_sample(dim, seed, i);
  }
  return out;
}

std::vector<PairOutcome> gradient_sweep_parallel(int dim, long n_samples,
                                                 std::uint64_t seed) {
  std::vector<PairOutcome> out(n_samples);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_samples; ++i) {
    out[i] = evaluate_pair_sample(dim, seed, i);
  }
  return out;
}

GradientSweepReport summarize_gradient_sweep(std::span<const PairOutcome> outcomes,
                                             int dim) {
  GradientSweepReport rep;
  rep.dim = dim;
  rep.samples = static_cast<long>(outcomes.size());
  for (long i = 0; i < rep.samples; ++i) {
    const PairOutcome& o = outcomes[i];
    if (o.cos_theta < 0.0) ++rep.conflict_samples;
    rep.worst_orth = std::max(rep.worst_orth, o.orth_residual);
    if (o.orth_residual > kOrthTol) ++rep.orth_violations;
    rep.worst_idem = std::max(rep.worst_idem, o.idem_residual);
    if (o.idem_residual > kIdemTol) ++rep.idem_violations;
    if (o.eqnorm_checked) {
      ++rep.eqnorm_checked;
      rep.worst_eqnorm = std::max(rep.worst_eqnorm, o.eqnorm_residual);
      if (o.eqnorm_residual > kEqNormTol) ++rep.eqnorm_violations;
    }
    rep.worst_ascent = std::max(rep.worst_ascent, o.ascent_residual);
    if (o.ascent_residual > kAscentTol) ++rep.ascent_violations;
    if (o.surgery_checked) {
      ++rep.surgery_checked;
      if (o.surgery_gap < -1e-12) {
        ++rep.surgery_violations;
        rep.worst_surgery_gap = std::min(rep.worst_surgery_gap, o.surgery_gap);
        rep.surgery_violation_max_cos =
            std::max(rep.surgery_violation_max_cos, o.cos_theta);
        if (rep.surgery_counterexamples.size() < 5) {
          rep.surgery_counterexamples.push_back(i);
        }
      }
    }
    if (o.raw_avg_gap < -1e-12) ++rep.raw_avg_dominance_failures;
    if (o.raw_surgery_gap < -1e-12) ++rep.raw_surgery_dominance_failures;
  }
  return rep;
}

TheoremOutcome evaluate_theorem_sample(std::uint64_t seed, long index) {
  static const int kDims[] = {2, 4, 16};
  Rng rng(derive_seed(seed, {0x7e03ULL, static_cast<std::uint64_t>(index)}));
  const int dim = kDims[index % 3];
  const bool want_conflict = index % 2 == 1;

  TheoremOutcome out;
  out.dim = dim;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    QuadraticTestSpec spec = QuadraticTestSpec::random(dim, rng);
    const Vector gr = spec.grad_r(spec.w0);
    const Vector gc = spec.grad_c(spec.w0);
    if (gr.norm() <= 1e-9 || gc.norm() <= 1e-9) continue;
    const double c = cos_angle(gr, gc);
    if (want_conflict != (c < 0.0)) continue;

    out.cos_theta = c;
    out.at_full_step = verify_theorem_bounds(spec, 1.0 / spec.lipschitz);
    out.at_half_step = verify_theorem_bounds(spec, 0.5 / spec.lipschitz);
    const double sin2 = 1.0 - c * c;
    if (sin2 > 1e-12) {
      out.positive_ok =
          out.at_full_step.delta_f > 0.0 && out.at_half_step.delta_f > 0.0;
    }
    return out;
  }
  throw EvaluationError("could not generate a quadratic instance in the requested regime");
}

std::vector<TheoremOutcome> theorem_sweep_serial(long n_instances,
                                                 std::uint64_t seed) {
  std::vector<TheoremOutcome> out(n_instances);
  for (long i = 0; i < n_instances; ++i) {
    out[i] = evaluate_theorem_sample(seed, i);
  }
  return out;
}

std::vector<TheoremOutcome> theorem_sweep_parallel(long n_instances,
                                                   std::uint64_t seed) {
  std::vector<TheoremOutcome> out(n_instances);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_instances; ++i) {
    out[i] = evaluate_theorem_sample(seed, i);
  }
  return out;
}

TheoremSweepReport summarize_theorem_sweep(std::span<const TheoremOutcome> outcomes) {
  TheoremSweepReport rep;
  rep.instances = static_cast<long>(outcomes.size());
  rep.worst_lower_margin = std::numeric_limits<double>::infinity();
  for (const TheoremOutcome& o : outcomes) {
    for (const TheoremCheck* check : {&o.at_full_step, &o.at_half_step}) {
      if (!check->lower_holds) ++rep.lower_bound_failures;
      if (check->upper_holds) ++rep.upper_bound_holds;
      ++rep.upper_bound_checks;
      rep.worst_lower_margin =
          std::min(rep.worst_lower_margin, check->delta_f - check->lower);
    }
    if (!o.positive_ok) ++rep.positivity_failures;
  }
  return rep;
}

}  // namespace pcrpo
