//! Deterministic witnesses for identities and empirical bounds that need more
//! setup than a property test.

use std::sync::Arc;

use argmin::core::{CostFunction, Error, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use soliton_core::filtrations::{filtration_from_wt, level_from_germ_with_reference, s_weighted_m};
use soliton_core::germ::fixtures::{affine, f1, p1, p2};
use soliton_core::germ::{a_wt_exact, h_eval, s_weighted, GermSpec};
use soliton_core::polyhedra::{lattice_points_i64, volume, Polyhedron};
use soliton_core::rational::{factorial, int, rat, to_f64, RationalVector};
use soliton_core::valuations::{normalize_scaling, weighted_vol, MonomialValuation};

#[test]
fn log_weighted_volume_is_h() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let specs = [p1(), p2(), f1(), affine(2), affine(3)];
    for k in 0..30 {
        let spec = Arc::new(specs[k % specs.len()].clone());
        let u: Vec<f64> = (0..spec.reeb().parameter_count())
            .map(|_| rng.gen())
            .collect();
        let xi = spec.reeb().point_from_unit(&u);
        let v = MonomialValuation::on_germ(spec.clone(), &xi).unwrap();
        let w = weighted_vol(&v).unwrap();
        let h = h_eval(&spec, &xi).unwrap();
        assert!(
            (h.exp() / w - 1.0).abs() <= 1e-10,
            "{} at {xi:?}: {} vs {w}",
            spec.label(),
            h.exp()
        );
    }
}

#[test]
fn every_facet_is_touched() {
    for spec in [p1(), p2(), f1(), affine(2), affine(3)] {
        for facet in spec.facets() {
            let values: Vec<_> = spec
                .polyhedron()
                .vertices()
                .iter()
                .map(|v| v.dot(&facet.normal) + &facet.discrepancy)
                .collect();
            assert!(values.iter().all(|x| *x >= int(0)));
            assert_eq!(values.iter().min().unwrap(), &int(0), "{}", spec.label());
        }
    }
}

fn relative_count_gap(p: &Polyhedron, m: u64) -> f64 {
    let n = p.dim() as i32;
    let vol = to_f64(&volume(p).unwrap());
    let count = lattice_points_i64(p, m).unwrap().len() as f64;
    (count / (m as f64).powi(n) - vol).abs() / vol
}

/// `#(mP)/mⁿ` approaches the volume at rate `1/m`: each doubling halves the gap.
#[test]
fn lattice_counts_converge_at_linear_rate() {
    let hexagon = Polyhedron::from_generators(
        &[[2, 0], [1, 2], [-1, 1], [-2, -1], [0, -2], [2, -1]]
            .map(|p| RationalVector::from_ints(&p)),
        &[],
    )
    .unwrap();
    let tetra = Polyhedron::from_generators(
        &[[0, 0, 0], [2, 0, 0], [0, 3, 0], [1, 1, 2]].map(|p| RationalVector::from_ints(&p)),
        &[],
    )
    .unwrap();
    for (p, ms) in [
        (p2().polyhedron().clone(), vec![4, 8, 16, 32]),
        (hexagon, vec![4, 8, 16, 32]),
        (tetra, vec![2, 4, 8, 16]),
    ] {
        let gaps: Vec<f64> = ms.iter().map(|&m| relative_count_gap(&p, m)).collect();
        for w in gaps.windows(2) {
            assert!(w[1] < w[0], "{gaps:?}");
            let ratio = 2.0 * w[1] / w[0];
            assert!((0.3..=3.0).contains(&ratio), "{gaps:?}");
        }
    }
}

/// `S_{m,mt}(v₀; wt_ξ) ≤ (1 + ε)·S^{(t)}(ξ₀; wt_ξ)` from some `m₀` on.
#[test]
fn finite_level_s_is_eventually_bounded() {
    let eps = 0.1;
    let ms = [4u64, 8, 16, 32];
    let cases: Vec<(GermSpec, Vec<i64>, (i64, i64), Vec<Vec<i64>>, (i64, i64))> = vec![
        (p1(), vec![1], (1, 3), vec![vec![1], vec![-2]], (3, 2)),
        (
            p2(),
            vec![1, 2],
            (1, 4),
            vec![vec![1, 0], vec![-1, 2], vec![0, -1]],
            (2, 1),
        ),
        (
            f1(),
            vec![1, 1],
            (1, 3),
            vec![vec![1, 0], vec![1, 1], vec![-1, 0]],
            (2, 1),
        ),
        (
            affine(2),
            vec![1, 1],
            (1, 1),
            vec![vec![1, 2], vec![3, 1]],
            (3, 1),
        ),
    ];
    for (spec, num, (p, q), directions, (tp, tq)) in cases {
        let xi0 = RationalVector::new(num.iter().map(|&x| rat(x * p, q)).collect());
        let a0 = a_wt_exact(&spec, &xi0).unwrap();
        let t = &a0 + rat(tp, tq);
        for dir in &directions {
            let xi = RationalVector::from_ints(dir);
            let limit = s_weighted(&spec, &xi0.to_f64(), &xi.to_f64(), Some(to_f64(&t))).unwrap();
            let ratios: Vec<f64> = ms
                .iter()
                .map(|&m| {
                    let level = Arc::new(
                        level_from_germ_with_reference(
                            &spec,
                            m,
                            Some(&t + int(1)),
                            Some(xi0.clone()),
                        )
                        .unwrap(),
                    );
                    let f0 = filtration_from_wt(&spec, level.clone(), &xi0).unwrap();
                    let f = filtration_from_wt(&spec, level, &xi).unwrap();
                    s_weighted_m(&f0, &int(0), &f, &t).unwrap() / limit
                })
                .collect();
            assert!(
                ratios.iter().all(|r| r.is_finite() && *r > 0.0),
                "{ratios:?}"
            );
            let m0 = ratios
                .iter()
                .rposition(|r| *r > 1.0 + eps)
                .map_or(0, |i| i + 1);
            assert!(m0 <= 2, "{} along {dir:?}: {ratios:?}", spec.label());
        }
    }
}

struct NormalizedLogW {
    n: usize,
}

impl NormalizedLogW {
    fn weights(&self, u: &[f64]) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(u.iter().map(|x| x.exp()))
            .take(self.n)
            .collect()
    }

    fn normalized(&self, u: &[f64]) -> Vec<f64> {
        let v = MonomialValuation::affine(&self.weights(u)).unwrap();
        normalize_scaling(&v).unwrap().valuation.weights().to_vec()
    }
}

impl CostFunction for NormalizedLogW {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Vec<f64>) -> Result<f64, Error> {
        let v = MonomialValuation::affine(&self.normalized(u))?;
        Ok(weighted_vol(&v)?.ln())
    }
}

/// Minimizing `h = log 𝐖` over normalized weights from ten starts lands on one
/// point, the diagonal, with value `log(n!·eⁿ)`.
#[test]
fn normalized_minimizer_is_unique() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for n in 2..=3usize {
        let problem = NormalizedLogW { n };
        let mut found: Vec<Vec<f64>> = Vec::new();
        for _ in 0..10 {
            let start: Vec<f64> = (1..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut simplex = vec![start.clone()];
            for i in 0..n - 1 {
                let mut s = start.clone();
                s[i] += 0.5;
                simplex.push(s);
            }
            let solver = NelderMead::new(simplex).with_sd_tolerance(1e-15).unwrap();
            let res = Executor::new(NormalizedLogW { n }, solver)
                .configure(|s| s.max_iters(2000))
                .run()
                .unwrap();
            let best = res.state().get_best_param().unwrap().clone();
            let min = res.state().get_best_cost();
            let expected = (factorial(n) as f64).ln() + n as f64;
            assert!((min - expected).abs() <= 1e-9, "n={n}: {min} vs {expected}");
            found.push(problem.normalized(&best));
        }
        for xi in &found {
            for (a, b) in xi.iter().zip(&found[0]) {
                assert!((a - b).abs() <= 1e-6, "{found:?}");
            }
            assert!(xi.iter().all(|x| (x - 1.0).abs() <= 1e-6), "{xi:?}");
        }
    }
}
