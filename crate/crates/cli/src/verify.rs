//! `verify` subcommand: self-checks of the library grouped into suites.
//!
//! Every sample draws from its own ChaCha20 stream (`seed`, stream = sample
//! index), so results do not depend on the thread count.

use std::sync::Arc;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use soliton_core::expkernel::{exp_integral, mc_oracle, Integrand};
use soliton_core::filtrations::{
    dh_bivariate, filtration_from_wt, geodesic_dh_identity, level_from_germ, log_exp_pairing,
    random_flag, GradedLevel,
};
use soliton_core::germ::fixtures::{affine, f1, p1, p2};
use soliton_core::germ::{
    delta_toric, futaki, h_eval, h_gradient, h_hessian, minimize_h, GermSpec,
};
use soliton_core::rational::{factorial, rat, RationalVector};
use soliton_core::valuations::{
    normalize_scaling, vol_derivative, vol_fn_limit, weighted_vol, MonomialValuation,
};

use crate::error::CliError;
use crate::io::{num, InputDigest, Record};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Convexity,
    Monotonicity,
    Bounds,
    Gradients,
    Oracle,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Convexity => "convexity",
            Suite::Monotonicity => "monotonicity",
            Suite::Bounds => "bounds",
            Suite::Gradients => "gradients",
            Suite::Oracle => "oracle",
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Fewer samples.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// One checked property. `slack` is signed so that negative means violated:
/// it is the distance to the threshold at the worst sample.
struct Check {
    name: &'static str,
    samples: usize,
    slack: f64,
    threshold: f64,
    detail: Value,
}

impl Check {
    fn pass(&self) -> bool {
        self.slack >= 0.0
    }

    fn to_json(&self) -> Value {
        json!({
            "property": self.name,
            "pass": self.pass(),
            "samples": self.samples,
            "worst_slack": num(self.slack),
            "threshold": num(self.threshold),
            "detail": self.detail,
        })
    }
}

fn rng_for(seed: u64, stream: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn fixtures() -> Vec<GermSpec> {
    vec![p1(), p2(), f1(), affine(2), affine(3)]
}

fn reeb_point(spec: &GermSpec, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let u: Vec<f64> = (0..spec.reeb().parameter_count())
        .map(|_| rng.gen())
        .collect();
    spec.reeb().point_from_unit(&u)
}

fn min_of(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(f64::INFINITY, f64::min)
}

fn max_of(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(f64::NEG_INFINITY, f64::max)
}

fn convexity(seed: u64, quick: bool) -> Result<Vec<Check>, CliError> {
    let specs = fixtures();
    let segments = if quick { 10 } else { 50 };
    let gaps: Vec<f64> = (0..segments * specs.len())
        .into_par_iter()
        .map(|i| -> Result<f64, CliError> {
            let spec = &specs[i % specs.len()];
            let mut rng = rng_for(seed, i);
            let a = reeb_point(spec, &mut rng);
            let b = reeb_point(spec, &mut rng);
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let avg = 0.5 * (h_eval(spec, &a)? + h_eval(spec, &b)?);
            Ok(avg - h_eval(spec, &mid)?)
        })
        .collect::<Result<_, _>>()?;
    let strict = 1e-12;
    let h_check = Check {
        name: "h_strictly_convex_on_segments",
        samples: gaps.len(),
        slack: min_of(gaps.iter().map(|g| g - strict)),
        threshold: strict,
        detail: json!({"min_midpoint_gap": num(min_of(gaps.iter().copied()))}),
    };

    let pairs = if quick { 10 } else { 100 };
    let results: Vec<(f64, bool)> = (0..pairs)
        .into_par_iter()
        .map(|i| -> Result<(f64, bool), CliError> {
            let mut rng = rng_for(seed ^ 0x5eed, i);
            let (spec, level): (GermSpec, Arc<GradedLevel>) = if rng.gen_bool(0.5) {
                let m = rng.gen_range(1..=20);
                (p1(), Arc::new(level_from_germ(&p1(), m, None)?))
            } else {
                let m = rng.gen_range(1..=2);
                (p2(), Arc::new(level_from_germ(&p2(), m, None)?))
            };
            let xi = RationalVector::new(
                (0..spec.dim())
                    .map(|_| rat(rng.gen_range(-6..=6), rng.gen_range(1..=3)))
                    .collect(),
            );
            let f0 = filtration_from_wt(&spec, level.clone(), &xi)?;
            let f1 = random_flag(level, rng.gen_range(1..=4), rng.gen());
            let biv = dh_bivariate(&f0, &f1)?;
            let g: Vec<f64> = (0..=20)
                .map(|k| log_exp_pairing(&biv, 0.0, 0.0, k as f64 / 20.0))
                .collect();
            let worst = min_of(g.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]));
            let identity = geodesic_dh_identity(&f0, &f1, &rat(1, 2))?.holds;
            Ok((worst, identity))
        })
        .collect::<Result<_, _>>()?;
    let tol = 1e-10;
    let worst = min_of(results.iter().map(|r| r.0));
    let broken = results.iter().filter(|r| !r.1).count();
    Ok(vec![
        h_check,
        Check {
            name: "geodesic_log_exp_pairing_convex",
            samples: pairs,
            slack: worst + tol,
            threshold: -tol,
            detail: json!({"min_second_difference": num(worst), "grid_points": 21}),
        },
        Check {
            name: "geodesic_dh_identity_exact",
            samples: pairs,
            slack: 0.0 - broken as f64,
            threshold: 0.0,
            detail: json!({"violations": broken}),
        },
    ])
}

fn random_valuation(rng: &mut ChaCha20Rng) -> Result<MonomialValuation, CliError> {
    Ok(match rng.gen_range(0..4) {
        0 => MonomialValuation::affine(&[rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0)])?,
        1 => MonomialValuation::affine(&[
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.2..3.0),
        ])?,
        2 => MonomialValuation::on_germ(
            Arc::new(p2()),
            &[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        )?,
        _ => MonomialValuation::on_germ(
            Arc::new(f1()),
            &[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        )?,
    })
}

fn support_end(v: &MonomialValuation) -> f64 {
    if !v.spec().is_bounded() {
        return 6.0;
    }
    max_of(
        v.spec()
            .polyhedron()
            .vertices()
            .iter()
            .map(|p| p.dot_f64(v.weights())),
    ) + v.a_value()
}

fn monotonicity(seed: u64, quick: bool) -> Result<Vec<Check>, CliError> {
    let count = if quick { 6 } else { 30 };
    let rows: Vec<(f64, f64, bool)> = (0..count)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64, bool), CliError> {
            let v = random_valuation(&mut rng_for(seed, i))?;
            let n = v.dim() as i32;
            let end = support_end(&v);
            let grid: Vec<f64> = (0..100)
                .map(|k| 1e-2 * (end / 1e-2).powf(k as f64 / 99.0))
                .collect();
            let ratios = grid
                .iter()
                .map(|&t| Ok(vol_fn_limit(&v, t)? / t.powi(n)))
                .collect::<Result<Vec<f64>, CliError>>()?;
            let mono = min_of(
                ratios
                    .windows(2)
                    .map(|w| (w[0] - w[1]) / w[0].abs().max(1.0)),
            );
            let d = (1..100)
                .map(|k| Ok(vol_derivative(&v, end * k as f64 / 100.0)?.powf(1.0 / (n - 1) as f64)))
                .collect::<Result<Vec<f64>, CliError>>()?;
            let concave = max_of(d.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]));
            Ok((mono, concave, vol_fn_limit(&v, 1e-3)? > 0.0))
        })
        .collect::<Result<_, _>>()?;
    let mono = min_of(rows.iter().map(|r| r.0));
    let concave = max_of(rows.iter().map(|r| r.1));
    let zero_min = rows.iter().filter(|r| !r.2).count();
    Ok(vec![
        Check {
            name: "vol_over_t_pow_n_nonincreasing",
            samples: count,
            slack: mono + 1e-12,
            threshold: -1e-12,
            detail: json!({"min_relative_decrease": num(mono), "grid_points": 100}),
        },
        Check {
            name: "vol_derivative_root_concave",
            samples: count,
            slack: 1e-10 - concave,
            threshold: 1e-10,
            detail: json!({"max_second_difference": num(concave)}),
        },
        Check {
            name: "vol_positive_near_zero",
            samples: count,
            slack: 0.0 - zero_min as f64,
            threshold: 0.0,
            detail: json!({"t": num(1e-3), "violations": zero_min}),
        },
    ])
}

fn bounds(seed: u64, quick: bool) -> Result<Vec<Check>, CliError> {
    let per_n = if quick { 20 } else { 200 };
    let tol = 1e-9;
    let mut checks = Vec::new();
    let mut diag_worst: f64 = 0.0;
    let mut ratios = Vec::new();
    let mut a_worst = f64::INFINITY;
    for n in 1..=4usize {
        let target = factorial(n) as f64 * (n as f64).exp();
        let diag = normalize_scaling(&MonomialValuation::affine(&vec![1.0; n])?)?;
        diag_worst = diag_worst.max((weighted_vol(&diag.valuation)? / target - 1.0).abs());
        let rows: Vec<(f64, f64)> = (0..per_n)
            .into_par_iter()
            .map(|i| -> Result<(f64, f64), CliError> {
                let mut rng = rng_for(seed ^ n as u64, i);
                let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..5.0)).collect();
                let norm = normalize_scaling(&MonomialValuation::affine(&w)?)?;
                Ok((
                    weighted_vol(&norm.valuation)? / target,
                    n as f64 - norm.valuation.a_value(),
                ))
            })
            .collect::<Result<_, _>>()?;
        ratios.extend(rows.iter().map(|r| r.0));
        a_worst = a_worst.min(min_of(rows.iter().map(|r| r.1)));
    }
    let max_ratio = max_of(ratios.iter().copied());
    let min_ratio = min_of(ratios.iter().copied());
    checks.push(Check {
        name: "diagonal_weighted_volume_equals_n_factorial_e_n",
        samples: 4,
        slack: tol - diag_worst,
        threshold: tol,
        detail: json!({"max_relative_error": num(diag_worst)}),
    });
    checks.push(Check {
        name: "weighted_volume_at_most_n_factorial_e_n",
        samples: ratios.len(),
        slack: 1.0 + tol - max_ratio,
        threshold: 1.0 + tol,
        detail: json!({"max_ratio": num(max_ratio), "min_ratio": num(min_ratio)}),
    });
    checks.push(Check {
        name: "weighted_volume_at_least_n_factorial_e_n",
        samples: ratios.len(),
        slack: min_ratio - (1.0 - tol),
        threshold: 1.0 - tol,
        detail: json!({"max_ratio": num(max_ratio), "min_ratio": num(min_ratio)}),
    });
    checks.push(Check {
        name: "normalized_log_discrepancy_at_most_n",
        samples: ratios.len(),
        slack: a_worst + tol,
        threshold: tol,
        detail: json!({"min_n_minus_a": num(a_worst)}),
    });
    Ok(checks)
}

fn gradients(seed: u64, quick: bool) -> Result<Vec<Check>, CliError> {
    let specs = fixtures();
    let per_spec = if quick { 2 } else { 10 };
    let rows: Vec<(String, Vec<f64>, f64, f64)> = (0..per_spec * specs.len())
        .into_par_iter()
        .map(|i| -> Result<_, CliError> {
            let spec = &specs[i % specs.len()];
            let xi = reeb_point(spec, &mut rng_for(seed, i));
            let n = xi.len();
            let g = h_gradient(spec, &xi)?;
            let hess = h_hessian(spec, &xi)?;
            let (h1, h2) = (1e-5, 1e-4);
            let mut grad_err: f64 = 0.0;
            let mut hess_err: f64 = 0.0;
            for k in 0..n {
                let shifted = |d: f64| -> Vec<f64> {
                    let mut p = xi.clone();
                    p[k] += d;
                    p
                };
                let fd = (h_eval(spec, &shifted(h1))? - h_eval(spec, &shifted(-h1))?) / (2.0 * h1);
                grad_err = grad_err.max((fd - g[k]).abs() / g[k].abs().max(1.0));
                let gp = h_gradient(spec, &shifted(h2))?;
                let gm = h_gradient(spec, &shifted(-h2))?;
                for j in 0..n {
                    let fd = (gp[j] - gm[j]) / (2.0 * h2);
                    hess_err =
                        hess_err.max((fd - hess[(j, k)]).abs() / hess[(j, k)].abs().max(1.0));
                }
            }
            Ok((spec.label().to_string(), xi, grad_err, hess_err))
        })
        .collect::<Result<_, _>>()?;
    let table: Vec<Value> = rows
        .iter()
        .map(|(label, xi, g, h)| {
            json!({"spec": label, "xi": xi.iter().map(|x| num(*x)).collect::<Vec<_>>(),
                   "gradient_rel_error": num(*g), "hessian_rel_error": num(*h)})
        })
        .collect();
    let g = max_of(rows.iter().map(|r| r.2));
    let h = max_of(rows.iter().map(|r| r.3));
    Ok(vec![
        Check {
            name: "gradient_matches_central_differences",
            samples: rows.len(),
            slack: 1e-6 - g,
            threshold: 1e-6,
            detail: json!({"max_rel_error": num(g), "table": table}),
        },
        Check {
            name: "hessian_matches_central_differences",
            samples: rows.len(),
            slack: 1e-4 - h,
            threshold: 1e-4,
            detail: json!({"max_rel_error": num(h)}),
        },
    ])
}

fn oracle(seed: u64, quick: bool) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for (spec, expected) in [(p1(), 2.0), (p2(), 9.0)] {
        let zero = vec![0.0; spec.dim()];
        worst = worst.max((h_eval(&spec, &zero)?.exp() / expected - 1.0).abs());
    }
    checks.push(Check {
        name: "total_mass_of_projective_fixtures",
        samples: 2,
        slack: 1e-10 - worst,
        threshold: 1e-10,
        detail: json!({"max_relative_error": num(worst)}),
    });

    let specs = fixtures();
    let per_spec = if quick { 1 } else { 4 };
    let samples = if quick { 20_000 } else { 200_000 };
    let sigmas: Vec<f64> = (0..per_spec * specs.len())
        .into_par_iter()
        .map(|i| -> Result<f64, CliError> {
            let spec = &specs[i % specs.len()];
            let xi = reeb_point(spec, &mut rng_for(seed, i));
            let exact = exp_integral(spec.polyhedron(), &xi)
                .map_err(|e| CliError::Reeb(e.to_string()))?
                .value;
            let mc = mc_oracle(
                spec.polyhedron(),
                &xi,
                &Integrand::Value,
                samples,
                seed.wrapping_add(i as u64),
            )
            .map_err(|e| CliError::Reeb(e.to_string()))?;
            let sigma = mc.standard_error.max(1e-12 * exact.abs());
            Ok((mc.estimate - exact).abs() / sigma)
        })
        .collect::<Result<_, _>>()?;
    let worst_sigma = max_of(sigmas.iter().copied());
    checks.push(Check {
        name: "closed_form_within_three_sigma_of_monte_carlo",
        samples: sigmas.len(),
        slack: 3.0 - worst_sigma,
        threshold: 3.0,
        detail: json!({"max_sigmas": num(worst_sigma), "mc_samples": samples}),
    });

    let mut fut_worst: f64 = 0.0;
    let mut delta_worst: f64 = 0.0;
    for spec in [p1(), p2(), f1()] {
        let cert = minimize_h(&spec, 1e-10, 200)?;
        let xi0 = cert.xi0.coords();
        for k in 0..spec.dim() {
            let mut e = vec![0.0; spec.dim()];
            e[k] = 1.0;
            fut_worst = fut_worst.max(futaki(&spec, xi0, &e)?.abs());
        }
        if !quick || spec.dim() == 1 {
            delta_worst = delta_worst.max((delta_toric(&spec, xi0, 1e-6)?.value - 1.0).abs());
        }
    }
    checks.push(Check {
        name: "futaki_vanishes_at_soliton_candidates",
        samples: 3,
        slack: 1e-8 - fut_worst,
        threshold: 1e-8,
        detail: json!({"max_abs_futaki": num(fut_worst)}),
    });
    checks.push(Check {
        name: "delta_is_one_at_soliton_candidates",
        samples: if quick { 1 } else { 3 },
        slack: 1e-4 - delta_worst,
        threshold: 1e-4,
        detail: json!({"max_abs_delta_minus_one": num(delta_worst)}),
    });
    Ok(checks)
}

/// Runs a suite; the flag is `true` when every property passed.
pub fn verify(args: &VerifyArgs) -> Result<(Record, bool), CliError> {
    let checks = match args.suite {
        Suite::Convexity => convexity(args.seed, args.quick)?,
        Suite::Monotonicity => monotonicity(args.seed, args.quick)?,
        Suite::Bounds => bounds(args.seed, args.quick)?,
        Suite::Gradients => gradients(args.seed, args.quick)?,
        Suite::Oracle => oracle(args.seed, args.quick)?,
    };
    let all = checks.iter().all(Check::pass);
    let mut digest = InputDigest::new("verify");
    digest
        .arg("suite", args.suite.name())
        .arg("quick", args.quick)
        .arg("seed", args.seed);
    let mut rec = Record::new("verify", digest);
    rec.output("suite", json!(args.suite.name()))
        .output("pass", json!(all))
        .output(
            "properties",
            Value::Array(checks.iter().map(Check::to_json).collect()),
        )
        .diagnostic("seed", json!(args.seed))
        .diagnostic("quick", json!(args.quick));
    Ok((rec, all))
}
