//! Acceptance criteria, one line each.
//!
//! Runs without the libtest harness so the report is always printed. Exits
//! nonzero when a criterion fails that is not listed in `KNOWN_UNATTAINABLE`.

use std::sync::Arc;
use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use soliton_core::expkernel::{exp_hessian_entry, exp_integral, exp_moment, mc_oracle, Integrand};
use soliton_core::filtrations::{
    dh_bivariate, filtration_from_wt, geodesic, geodesic_dh_identity, h_m, level_from_germ,
    log_exp_pairing, random_flag, Filtration, GradedLevel,
};
use soliton_core::germ::fixtures::{affine, f1, p1, p2};
use soliton_core::germ::{
    a_wt_exact, delta_toric, ding_invariant, futaki, h_eval, minimize_h, Facet, GermSpec,
};
use soliton_core::polyhedra::Polyhedron;
use soliton_core::rational::{int, rat, to_f64, Rational, RationalVector};
use soliton_core::valuations::{
    dh_cdf_gap, lc_slope_monomial, normalize_scaling, vol_derivative, vol_fn_limit, weighted_vol,
    MonomialValuation,
};

/// Criteria that cannot hold as literally stated.
///
/// 1: for normalized `ξ` on `𝔸ⁿ` (`Σξᵢ = n`) the weighted volume is
/// `n!·eⁿ/Πξᵢ`, and `Πξᵢ ≤ 1` by AM–GM, so every sample lies *above*
/// `n!·eⁿ`; the per-sample upper bound fails for any `ξ ≠ (1,…,1)`.
const KNOWN_UNATTAINABLE: &[u32] = &[1];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn p3() -> GermSpec {
    let normals: [&[i64]; 4] = [&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, -1, -1]];
    GermSpec::new(
        "P3",
        normals.iter().map(|u| Facet::new(u, int(1))).collect(),
    )
    .unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut worst_ones: f64 = 0.0;
    let mut exceed = 0;
    let mut total = 0;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    for n in 1..=4 {
        let bound = fact(n) * (n as f64).exp();
        let ones = normalize_scaling(&MonomialValuation::affine(&vec![1.0; n]).unwrap()).unwrap();
        let w = weighted_vol(&ones.valuation).unwrap();
        worst_ones = worst_ones.max((w / bound - 1.0).abs());
        for _ in 0..200 {
            let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
            let v = normalize_scaling(&MonomialValuation::affine(&xi).unwrap()).unwrap();
            let ratio = weighted_vol(&v.valuation).unwrap() / bound;
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
            total += 1;
            if ratio > 1.0 + 1e-9 {
                exceed += 1;
            }
        }
    }
    outcome(
        worst_ones <= 1e-9 && exceed == 0,
        format!(
            "ξ=1: max rel err {worst_ones:.1e}; random: {exceed}/{total} exceed n!eⁿ(1+1e−9), \
             W/(n!eⁿ) in [{min_ratio:.9}, {max_ratio:.3e}] (bound holds for the minimum, not per sample)"
        ),
    )
}

/// Independent `F₁` soliton: composite Simpson on the trapezoid
/// `−1 ≤ y ≤ 1, −1 ≤ x ≤ y + 1`, Newton with a finite-difference Jacobian.
fn f1_oracle() -> [f64; 2] {
    const N: usize = 400;
    let simpson = |k: usize| -> f64 {
        if k == 0 || k == N {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mean = |xi: [f64; 2]| -> [f64; 2] {
        let (mut z, mut mx, mut my) = (0.0, 0.0, 0.0);
        for i in 0..=N {
            let y = -1.0 + 2.0 * i as f64 / N as f64;
            let width = y + 2.0;
            for j in 0..=N {
                let x = -1.0 + width * j as f64 / N as f64;
                let w = simpson(i) * simpson(j) * width * (-xi[0] * x - xi[1] * y).exp();
                z += w;
                mx += w * x;
                my += w * y;
            }
        }
        [mx / z, my / z]
    };
    let mut xi = [0.0, 0.0];
    for _ in 0..30 {
        let g = mean(xi);
        if g[0].abs().max(g[1].abs()) < 1e-13 {
            break;
        }
        let h = 1e-5;
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut a = xi;
            let mut b = xi;
            a[k] += h;
            b[k] -= h;
            let (ga, gb) = (mean(a), mean(b));
            for r in 0..2 {
                jac[r][k] = (ga[r] - gb[r]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        xi[0] -= (jac[1][1] * g[0] - jac[0][1] * g[1]) / det;
        xi[1] -= (-jac[1][0] * g[0] + jac[0][0] * g[1]) / det;
    }
    xi
}

fn criterion_2() -> Outcome {
    let v1 = h_eval(&p1(), &[0.0]).unwrap().exp();
    let v2 = h_eval(&p2(), &[0.0, 0.0]).unwrap().exp();
    let mass_ok = (v1 / 2.0 - 1.0).abs() <= 1e-10 && (v2 / 9.0 - 1.0).abs() <= 1e-10;
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let s1 = minimize_h(&p1(), 1e-12, 100).unwrap();
    let s2 = minimize_h(&p2(), 1e-12, 100).unwrap();
    let sym = norm(s1.xi0.coords()).max(norm(s2.xi0.coords()));
    let spec = f1();
    let sf = minimize_h(&spec, 1e-12, 100).unwrap();
    let oracle = f1_oracle();
    let xi0 = sf.xi0.coords();
    let gap = (xi0[0] - oracle[0]).abs().max((xi0[1] - oracle[1]).abs());
    let fut = futaki(&spec, xi0, &[1.0, 0.0])
        .unwrap()
        .abs()
        .max(futaki(&spec, xi0, &[0.0, 1.0]).unwrap().abs());
    outcome(
        mass_ok && sym <= 1e-8 && gap <= 1e-6 && fut <= 1e-8,
        format!(
            "e^H(P1,0)={v1:.12}, e^H(P2,0)={v2:.12}; |ξ₀| P1/P2 ≤ {sym:.1e}; \
             F1 ξ₀=({:.10}, {:.10}) vs oracle gap {gap:.1e}; |Fut| {fut:.1e}",
            xi0[0], xi0[1]
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let tol = 1e-6;
    let mut worst: f64 = 0.0;
    let mut above = 0;
    for i in 0..20 {
        let n = 1 + i % 3;
        let xi: Vec<f64> = (0..n)
            .map(|_| {
                let q = rng.gen_range(1..=5) as f64;
                rng.gen_range(1..=(3 * q as i64)) as f64 / q
            })
            .collect();
        let v = MonomialValuation::affine(&xi).unwrap();
        let mu = lc_slope_monomial(&v, 64, tol).unwrap();
        let sum: f64 = xi.iter().sum();
        worst = worst.max((mu - sum).abs());
        if mu > v.a_value() + tol {
            above += 1;
        }
    }
    outcome(
        worst <= tol && above == 0,
        format!("max |μ − Σξ| = {worst:.1e} over 20 vectors; μ > A + tol: {above}"),
    )
}

fn random_instance(rng: &mut ChaCha20Rng) -> (Polyhedron, Vec<f64>) {
    let n = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        // polytope spanned by random lattice points, ξ unrestricted
        loop {
            let pts: Vec<RationalVector> = (0..n + 2 + rng.gen_range(0..3))
                .map(|_| {
                    RationalVector::from_ints(
                        &(0..n).map(|_| rng.gen_range(-2..=2)).collect::<Vec<_>>(),
                    )
                })
                .collect();
            if let Ok(p) = Polyhedron::from_generators(&pts, &[]) {
                if p.is_full_dimensional() {
                    let xi = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
                    return (p, xi);
                }
            }
        }
    } else {
        // orthant germ with positive ξ
        let spec = affine(n);
        let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..2.0)).collect();
        (spec.polyhedron().clone(), xi)
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mut worst_sigma: f64 = 0.0;
    for k in 0..20 {
        let (p, xi) = random_instance(&mut rng);
        let exact = exp_integral(&p, &xi).unwrap().value;
        let mc = mc_oracle(&p, &xi, &Integrand::Value, 20_000, 100 + k).unwrap();
        // on the orthant the sampler matches the integrand and the variance is zero
        let sigma = mc.standard_error.max(1e-12 * exact.abs());
        worst_sigma = worst_sigma.max((mc.estimate - exact).abs() / sigma);
    }
    let mut worst_grad: f64 = 0.0;
    let mut worst_hess: f64 = 0.0;
    for _ in 0..50 {
        let (p, xi) = random_instance(&mut rng);
        let n = xi.len();
        let h = 1e-5 * (1.0 + xi.iter().map(|x| x.abs()).fold(0.0, f64::max));
        let unit = |i: usize| -> Vec<f64> { (0..n).map(|j| f64::from(u8::from(i == j))).collect() };
        let shifted = |i: usize, s: f64| -> Vec<f64> {
            let mut y = xi.clone();
            y[i] += s;
            y
        };
        let (mut num, mut den) = (0.0, 0.0);
        let (mut hnum, mut hden) = (0.0, 0.0);
        for i in 0..n {
            let analytic = -exp_moment(&p, &xi, &unit(i)).unwrap();
            let fd = (exp_integral(&p, &shifted(i, h)).unwrap().value
                - exp_integral(&p, &shifted(i, -h)).unwrap().value)
                / (2.0 * h);
            num += (fd - analytic).powi(2);
            den += analytic.powi(2);
            for j in 0..n {
                let analytic = -exp_hessian_entry(&p, &xi, &unit(j), &unit(i)).unwrap();
                let fd = (exp_moment(&p, &shifted(i, h), &unit(j)).unwrap()
                    - exp_moment(&p, &shifted(i, -h), &unit(j)).unwrap())
                    / (2.0 * h);
                hnum += (fd - analytic).powi(2);
                hden += analytic.powi(2);
            }
        }
        let scale = exp_integral(&p, &xi).unwrap().value;
        worst_grad = worst_grad.max(num.sqrt() / den.sqrt().max(1e-3 * scale));
        worst_hess = worst_hess.max(hnum.sqrt() / hden.sqrt().max(1e-3 * scale));
    }
    outcome(
        worst_sigma <= 3.0 && worst_grad <= 1e-6 && worst_hess <= 1e-4,
        format!("MC max |Δ|/σ = {worst_sigma:.2}; FD rel err gradient {worst_grad:.1e}, Hessian {worst_hess:.1e}"),
    )
}

fn random_rational_xi(rng: &mut ChaCha20Rng, spec: &GermSpec) -> RationalVector {
    loop {
        let xi = RationalVector::new(
            (0..spec.dim())
                .map(|_| rat(rng.gen_range(-6..=6), rng.gen_range(1..=3)))
                .collect(),
        );
        if spec
            .polyhedron()
            .rays()
            .iter()
            .all(|r| r.dot(&xi) > Rational::zero())
        {
            return xi;
        }
    }
}

fn random_level(rng: &mut ChaCha20Rng) -> (GermSpec, Arc<GradedLevel>) {
    match rng.gen_range(0..4) {
        0 => {
            let m = rng.gen_range(1..=20);
            (p1(), Arc::new(level_from_germ(&p1(), m, None).unwrap()))
        }
        1 => {
            let m = rng.gen_range(1..=3);
            (p2(), Arc::new(level_from_germ(&p2(), m, None).unwrap()))
        }
        2 => {
            let m = rng.gen_range(1..=3);
            (f1(), Arc::new(level_from_germ(&f1(), m, None).unwrap()))
        }
        _ => {
            let m = rng.gen_range(1..=3);
            let cut = int(rng.gen_range(2..=4));
            (
                affine(2),
                Arc::new(level_from_germ(&affine(2), m, Some(cut)).unwrap()),
            )
        }
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut worst_second: f64 = 0.0;
    let mut worst_h: f64 = f64::NEG_INFINITY;
    let mut identity_failures = 0;
    let mut max_dim = 0;
    let mut flags = 0;
    for k in 0..100 {
        let (spec, level) = random_level(&mut rng);
        max_dim = max_dim.max(level.dim());
        let xi0 = random_rational_xi(&mut rng, &spec);
        let f0 = filtration_from_wt(&spec, level.clone(), &xi0).unwrap();
        let mu0 = a_wt_exact(&spec, &xi0).unwrap();
        let use_flag = level.dim() <= 30 && rng.gen_bool(0.5);
        let (f1, mu1): (Filtration, Rational) = if use_flag {
            flags += 1;
            (
                random_flag(level.clone(), rng.gen_range(1..=5), 1000 + k),
                Rational::zero(),
            )
        } else {
            let xi1 = random_rational_xi(&mut rng, &spec);
            let mu1 = a_wt_exact(&spec, &xi1).unwrap();
            (filtration_from_wt(&spec, level.clone(), &xi1).unwrap(), mu1)
        };
        let biv = dh_bivariate(&f0, &f1).unwrap();
        let g: Vec<f64> = (0..=20)
            .map(|i| log_exp_pairing(&biv, to_f64(&mu0), to_f64(&mu1), i as f64 / 20.0))
            .collect();
        for w in g.windows(3) {
            worst_second = worst_second.min(w[0] - 2.0 * w[1] + w[2]);
        }
        for t in [rat(1, 3), rat(1, 2), rat(4, 5)] {
            if !geodesic_dh_identity(&f0, &f1, &t).unwrap().holds {
                identity_failures += 1;
            }
        }
        if !use_flag {
            for i in 0..=20 {
                let t = rat(i, 20);
                let mu_t = (int(1) - &t) * &mu0 + &t * &mu1;
                let ft = geodesic(&f0, &f1, &t).unwrap();
                let excess = h_m(&ft, &mu_t) - g[i as usize];
                worst_h = worst_h.max(excess);
            }
        }
    }
    outcome(
        worst_second >= -1e-10 && identity_failures == 0 && worst_h <= 1e-10,
        format!(
            "100 pairs ({flags} flag, dim ≤ {max_dim}): min second difference {worst_second:.1e}; \
             max H_m(F_t) − g(t) {worst_h:.1e}; DH identity failures {identity_failures}"
        ),
    )
}

fn random_valuation(rng: &mut ChaCha20Rng) -> MonomialValuation {
    match rng.gen_range(0..5) {
        0 => {
            MonomialValuation::affine(&[rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0)]).unwrap()
        }
        1 => MonomialValuation::affine(&[
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.2..3.0),
        ])
        .unwrap(),
        2 => MonomialValuation::on_germ(
            Arc::new(p2()),
            &[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        )
        .unwrap(),
        3 => MonomialValuation::on_germ(
            Arc::new(f1()),
            &[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        )
        .unwrap(),
        _ => MonomialValuation::on_germ(
            Arc::new(p3()),
            &[
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ],
        )
        .unwrap(),
    }
}

/// Largest value of the valuation on `P`, or a fixed horizon when unbounded.
fn support_end(v: &MonomialValuation) -> f64 {
    if !v.spec().is_bounded() {
        return 6.0;
    }
    let xi = v.weights();
    v.spec()
        .polyhedron()
        .vertices()
        .iter()
        .map(|p| p.dot_f64(xi))
        .fold(f64::NEG_INFINITY, f64::max)
        + v.a_value()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut worst_mono: f64 = 0.0;
    let mut worst_concave: f64 = 0.0;
    let mut lambda_min_ok = true;
    for _ in 0..30 {
        let v = random_valuation(&mut rng);
        let n = v.dim() as i32;
        let end = support_end(&v);
        let grid: Vec<f64> = (0..100)
            .map(|k| 1e-2 * (end / 1e-2).powf(k as f64 / 99.0))
            .collect();
        let ratios: Vec<f64> = grid
            .iter()
            .map(|&t| vol_fn_limit(&v, t).unwrap() / t.powi(n))
            .collect();
        for w in ratios.windows(2) {
            worst_mono = worst_mono.min((w[0] - w[1]) / w[0].abs().max(1.0));
        }
        let ts: Vec<f64> = (1..100).map(|k| end * k as f64 / 100.0).collect();
        let d: Vec<f64> = ts
            .iter()
            .map(|&t| vol_derivative(&v, t).unwrap().powf(1.0 / (n - 1) as f64))
            .collect();
        for w in d.windows(3) {
            worst_concave = worst_concave.max(w[0] - 2.0 * w[1] + w[2]);
        }
        lambda_min_ok &= vol_fn_limit(&v, 1e-3).unwrap() > 0.0;
    }
    outcome(
        worst_mono >= -1e-12 && worst_concave <= 1e-10 && lambda_min_ok,
        format!(
            "30 valuations: min decrease of vol/tⁿ {worst_mono:.1e}; max second difference of (vol′)^(1/(n−1)) \
             {worst_concave:.1e}; vol(1e−3) > 0: {lambda_min_ok}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let cases: Vec<(&str, MonomialValuation, Option<Rational>)> = vec![
        (
            "P1",
            MonomialValuation::on_germ(Arc::new(p1()), &[1.0]).unwrap(),
            None,
        ),
        (
            "P2",
            MonomialValuation::on_germ(Arc::new(p2()), &[1.0, 2.0]).unwrap(),
            None,
        ),
        (
            "A2",
            MonomialValuation::affine(&[1.0, 1.0]).unwrap(),
            Some(int(2)),
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v, cut) in cases {
        let gaps: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&m| dh_cdf_gap(&v, m, cut.clone()).unwrap())
            .collect();
        let ratios: Vec<f64> = gaps.windows(2).map(|w| 2.0 * w[1] / w[0]).collect();
        let ok =
            gaps.windows(2).all(|w| w[1] < w[0]) && ratios.iter().all(|r| (0.3..=3.0).contains(r));
        pass &= ok;
        parts.push(format!(
            "{name} gaps {} ratios {}",
            gaps.iter()
                .map(|g| format!("{g:.4}"))
                .collect::<Vec<_>>()
                .join("/"),
            ratios
                .iter()
                .map(|r| format!("{r:.2}"))
                .collect::<Vec<_>>()
                .join("/")
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut worst_delta: f64 = 0.0;
    let mut min_ding = f64::INFINITY;
    let mut deltas = Vec::new();
    for spec in [p1(), p2(), f1()] {
        let xi0 = minimize_h(&spec, 1e-12, 100).unwrap().xi0.coords().to_vec();
        let d = delta_toric(&spec, &xi0, 1e-10).unwrap().value;
        deltas.push(format!("{}={d:.6}", spec.label()));
        worst_delta = worst_delta.max((d - 1.0).abs());
        for _ in 0..100 {
            let xi: Vec<f64> = (0..spec.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            min_ding = min_ding.min(ding_invariant(&spec, &xi0, &xi).unwrap());
        }
    }
    outcome(
        worst_delta <= 1e-4 && min_ding >= -1e-8,
        format!(
            "δ {}; min Ding over 300 directions {min_ding:.1e}",
            deltas.join(", ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mut worst_affine = f64::NEG_INFINITY;
    for n in 1..=4 {
        for _ in 0..200 {
            let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..5.0)).collect();
            let v = normalize_scaling(&MonomialValuation::affine(&xi).unwrap()).unwrap();
            worst_affine = worst_affine.max(v.valuation.a_value() - n as f64);
        }
    }
    let mut worst_germ = f64::NEG_INFINITY;
    for spec in [p1(), p2(), f1()] {
        let spec = Arc::new(spec);
        let n = spec.dim();
        for _ in 0..30 {
            let xi: Vec<f64> = loop {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                if x.iter().any(|c| c.abs() > 0.1) {
                    break x;
                }
            };
            let v =
                normalize_scaling(&MonomialValuation::on_germ(spec.clone(), &xi).unwrap()).unwrap();
            worst_germ = worst_germ.max(v.valuation.a_value() - n as f64);
        }
    }
    outcome(
        worst_affine <= 1e-9 && worst_germ <= 1e-9,
        format!("max A − n after normalization: affine {worst_affine:.1e}, germs {worst_germ:.3}"),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let mut pass = true;
    let mut first_hits = Vec::new();
    for s in 0..10 {
        let n = 2 + s % 3;
        let spec = affine(n);
        let h_min = minimize_h(&spec, 1e-12, 100).unwrap().h_value;
        let j = rng.gen_range(0..n);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        let p_rest: f64 = p
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, x)| x)
            .sum();
        let mut prev = f64::NEG_INFINITY;
        let mut hit = None;
        let mut eps = 0.5;
        while eps >= 1e-9 {
            let xi: Vec<f64> = (0..n)
                .map(|i| {
                    if i == j {
                        eps
                    } else {
                        (n as f64 - eps) * p[i] / p_rest
                    }
                })
                .collect();
            let h = h_eval(&spec, &xi).unwrap();
            pass &= h > prev;
            prev = h;
            if hit.is_none() && h > h_min + 10.0 {
                hit = Some(eps);
            }
            eps *= 0.5;
        }
        match hit {
            Some(e) if e >= 1e-6 => first_hits.push(e),
            _ => pass = false,
        }
    }
    let latest = first_hits.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        pass,
        format!("10 sequences strictly increasing; H > H_min + 10 first reached at min ξ ≥ {latest:.2e}"),
    )
}

fn main() {
    let criteria: Vec<(u32, fn() -> Outcome)> = vec![
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let start = Instant::now();
    let results: Vec<(u32, Outcome, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(id, f)| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let o = f();
                    (id, o, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("criterion panicked"))
            .collect()
    });
    let mut unexpected = 0;
    for (id, o, secs) in &results {
        let tag = match (o.pass, KNOWN_UNATTAINABLE.contains(id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {id:>2}: {tag} [{secs:.1}s] {}", o.detail);
    }
    println!(
        "acceptance: {} criteria, {unexpected} unexpected failures, {:.1}s",
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
