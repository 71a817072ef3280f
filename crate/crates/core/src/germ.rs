//! Toric polarized log Fano fibration germs given by facet data.
//!
//! A germ is the polyhedron `P = {α : ⟨α, u_F⟩ + a_F ≥ 0}` with primitive
//! integer normals `u_F` and positive log discrepancies `a_F`. Everything here
//! is a functional of the measure `n!·e^{−⟨α,ξ⟩}dα` on `P`.

use std::sync::Arc;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::expkernel::{KernelCells, KernelError, Moments};
use crate::polyhedra::{dual_description, volume, Halfspace, Polyhedron, PolyhedronError};
use crate::rational::{factorial, from_f64, to_f64, Rational, RationalVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GermError {
    #[error("invalid germ spec{}: {reason}", facet.map(|i| format!(" (facet {i})")).unwrap_or_default())]
    SpecInvalid {
        facet: Option<usize>,
        reason: String,
    },
    #[error("Reeb violation: {0}")]
    ReebViolation(String),
    #[error("no convergence after {iters} iterations (gradient norm {gradient_norm:e}, last iterate {last:?})")]
    NoConvergence {
        iters: usize,
        gradient_norm: f64,
        last: Vec<f64>,
    },
    #[error("truncation {0} leaves no mass")]
    EmptyTruncation(f64),
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl From<KernelError> for GermError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::DimensionMismatch { expected, got } => {
                GermError::DimensionMismatch { expected, got }
            }
            other => GermError::ReebViolation(other.to_string()),
        }
    }
}

/// One facet inequality `⟨α, normal⟩ + discrepancy ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Facet {
    pub normal: RationalVector,
    pub discrepancy: Rational,
}

impl Facet {
    pub fn new(normal: &[i64], discrepancy: Rational) -> Self {
        Self {
            normal: RationalVector::from_ints(normal),
            discrepancy,
        }
    }

    pub fn halfspace(&self) -> Halfspace {
        Halfspace {
            normal: self.normal.clone(),
            offset: self.discrepancy.clone(),
        }
    }
}

/// Dual of the recession cone of `P`: `{ξ : ⟨r, ξ⟩ ≥ 0 for every ray r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReebCone {
    dim: usize,
    /// Rays of `P`, the inequalities of the cone.
    constraints: Vec<RationalVector>,
    generators: Vec<RationalVector>,
    lineality: Vec<RationalVector>,
}

impl ReebCone {
    fn of(p: &Polyhedron) -> Self {
        let n = p.dim();
        let cons: Vec<Vec<Rational>> = p.rays().iter().map(|r| r.as_slice().to_vec()).collect();
        let g = crate::polyhedra::cone_generators(&cons, n);
        let mut generators: Vec<RationalVector> =
            g.rays.into_iter().map(RationalVector::new).collect();
        generators.sort();
        Self {
            dim: n,
            constraints: p.rays().to_vec(),
            generators,
            lineality: g.lineality.into_iter().map(RationalVector::new).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[RationalVector] {
        &self.constraints
    }

    /// Extreme rays.
    pub fn generators(&self) -> &[RationalVector] {
        &self.generators
    }

    /// Basis of the lineality space; all of `ℝⁿ` when `P` is bounded.
    pub fn lineality(&self) -> &[RationalVector] {
        &self.lineality
    }

    pub fn is_whole_space(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn contains_interior(&self, xi: &[f64]) -> bool {
        self.constraints.iter().all(|r| r.dot_f64(xi) > 0.0)
    }

    pub fn contains_closed(&self, xi: &[f64]) -> bool {
        self.constraints.iter().all(|r| r.dot_f64(xi) >= 0.0)
    }

    /// Smallest pairing with a ray of `P` (`+∞` when there are none).
    pub fn margin(&self, xi: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|r| r.dot_f64(xi))
            .fold(f64::INFINITY, f64::min)
    }

    /// Interior point built from weights in `[0, 1)`: positive combinations of
    /// generators plus centered combinations of lineality vectors.
    pub fn point_from_unit(&self, u: &[f64]) -> Vec<f64> {
        let mut xi = vec![0.0; self.dim];
        let mut k = 0;
        for g in &self.generators {
            let w = 0.05 + u[k % u.len()];
            k += 1;
            for (x, gi) in xi.iter_mut().zip(g.to_f64()) {
                *x += w * gi;
            }
        }
        for l in &self.lineality {
            let w = 2.0 * (2.0 * u[k % u.len()] - 1.0);
            k += 1;
            for (x, li) in xi.iter_mut().zip(l.to_f64()) {
                *x += w * li;
            }
        }
        xi
    }

    /// Number of weights consumed by [`ReebCone::point_from_unit`].
    pub fn parameter_count(&self) -> usize {
        self.generators.len() + self.lineality.len()
    }
}

/// Validated germ with its polyhedron, triangulation and Reeb cone.
#[derive(Clone, Debug)]
pub struct GermSpec {
    label: String,
    facets: Vec<Facet>,
    polyhedron: Polyhedron,
    kernel: Arc<KernelCells>,
    reeb: ReebCone,
}

impl PartialEq for GermSpec {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.facets == other.facets
    }
}

impl GermSpec {
    pub fn new(label: impl Into<String>, facets: Vec<Facet>) -> Result<Self, GermError> {
        let invalid =
            |facet: Option<usize>, reason: String| GermError::SpecInvalid { facet, reason };
        let n = facets
            .first()
            .map(|f| f.normal.dim())
            .ok_or_else(|| invalid(None, "no facets".into()))?;
        if n == 0 || n > crate::polyhedra::MAX_DIM {
            return Err(invalid(None, format!("dimension {n} outside 1..=6")));
        }
        for (i, f) in facets.iter().enumerate() {
            if f.normal.dim() != n {
                return Err(invalid(
                    Some(i),
                    format!("normal has length {}, expected {n}", f.normal.dim()),
                ));
            }
            if f.normal.is_zero() {
                return Err(invalid(Some(i), "normal is zero".into()));
            }
            if f.normal.to_i64s().is_none() {
                return Err(invalid(Some(i), "normal is not an integer vector".into()));
            }
            if f.normal.primitive() != f.normal {
                return Err(invalid(
                    Some(i),
                    format!("normal {} is not primitive", f.normal),
                ));
            }
            if !f.discrepancy.is_positive() {
                return Err(invalid(
                    Some(i),
                    format!("discrepancy {} is not positive", f.discrepancy),
                ));
            }
        }
        let hs: Vec<Halfspace> = facets.iter().map(Facet::halfspace).collect();
        let polyhedron = dual_description(&hs).map_err(|e| match e {
            PolyhedronError::Lineality(k) => {
                invalid(None, format!("polyhedron is not pointed (lineality {k})"))
            }
            other => invalid(None, other.to_string()),
        })?;
        for (i, h) in hs.iter().enumerate() {
            if !polyhedron.is_facet(h) {
                return Err(invalid(Some(i), "facet is redundant".into()));
            }
            if hs[..i].iter().any(|g| g.normal == h.normal) {
                return Err(invalid(Some(i), "facet repeats an earlier normal".into()));
            }
        }
        let kernel = KernelCells::new(&polyhedron).map_err(|e| invalid(None, e.to_string()))?;
        let reeb = ReebCone::of(&polyhedron);
        Ok(Self {
            label: label.into(),
            facets,
            polyhedron,
            kernel: Arc::new(kernel),
            reeb,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.polyhedron.dim()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn polyhedron(&self) -> &Polyhedron {
        &self.polyhedron
    }

    pub fn kernel(&self) -> &KernelCells {
        &self.kernel
    }

    pub fn reeb(&self) -> &ReebCone {
        &self.reeb
    }

    pub fn is_bounded(&self) -> bool {
        self.polyhedron.is_bounded()
    }

    /// Sum of the facet normals, a strictly Reeb-interior direction.
    pub fn default_reference(&self) -> RationalVector {
        self.facets
            .iter()
            .fold(RationalVector::zeros(self.dim()), |acc, f| &acc + &f.normal)
    }

    fn check_len(&self, v: &[f64]) -> Result<(), GermError> {
        if v.len() != self.dim() {
            return Err(GermError::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    fn check_interior(&self, xi: &[f64]) -> Result<(), GermError> {
        self.check_len(xi)?;
        if !self.reeb.contains_interior(xi) {
            return Err(GermError::ReebViolation(format!(
                "ξ = {xi:?} is not in the open Reeb cone"
            )));
        }
        Ok(())
    }

    fn moments(&self, xi: &[f64]) -> Result<Moments, GermError> {
        self.check_interior(xi)?;
        Ok(self.kernel.moments(xi)?)
    }
}

/// Standard fixtures.
pub mod fixtures {
    use super::*;
    use crate::rational::int;

    fn unit(normals: &[&[i64]], label: &str) -> GermSpec {
        GermSpec::new(
            label,
            normals.iter().map(|u| Facet::new(u, int(1))).collect(),
        )
        .expect("fixture is valid")
    }

    /// `[−1, 1]`.
    pub fn p1() -> GermSpec {
        unit(&[&[1], &[-1]], "P1")
    }

    /// Triangle `(−1,−1), (2,−1), (−1,2)`.
    pub fn p2() -> GermSpec {
        unit(&[&[1, 0], &[0, 1], &[-1, -1]], "P2")
    }

    /// Trapezoid `(−1,−1), (0,−1), (2,1), (−1,1)`.
    pub fn f1() -> GermSpec {
        unit(&[&[1, 0], &[0, 1], &[-1, 1], &[0, -1]], "F1")
    }

    /// `(−1, …, −1) + ℝⁿ₊`, the germ of `𝔸ⁿ` at the origin.
    pub fn affine(n: usize) -> GermSpec {
        let normals: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        let refs: Vec<&[i64]> = normals.iter().map(Vec::as_slice).collect();
        unit(&refs, &format!("A{n}"))
    }
}

pub fn moment_polyhedron(spec: &GermSpec) -> &Polyhedron {
    spec.polyhedron()
}

pub fn reeb_cone(spec: &GermSpec) -> &ReebCone {
    spec.reeb()
}

/// `A(wt_ξ) = −min_P ⟨α, ξ⟩` for `ξ` in the closed Reeb cone.
pub fn a_wt(spec: &GermSpec, xi: &[f64]) -> Result<f64, GermError> {
    spec.check_len(xi)?;
    if !spec.reeb.contains_closed(xi) {
        return Err(GermError::ReebViolation(format!(
            "min over P of ⟨α, {xi:?}⟩ is −∞"
        )));
    }
    Ok(spec
        .polyhedron
        .vertices()
        .iter()
        .map(|v| -v.dot_f64(xi))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Exact `A(wt_ξ)` for rational `ξ`.
pub fn a_wt_exact(spec: &GermSpec, xi: &RationalVector) -> Result<Rational, GermError> {
    spec.polyhedron
        .min_linear(xi)
        .map(|m| -m)
        .ok_or_else(|| GermError::ReebViolation(format!("min over P of ⟨α, {xi}⟩ is −∞")))
}

/// `H(ξ) = log(n! ∫_P e^{−⟨α,ξ⟩} dα)`.
pub fn h_eval(spec: &GermSpec, xi: &[f64]) -> Result<f64, GermError> {
    spec.check_interior(xi)?;
    let r = spec.kernel.integral(xi)?;
    Ok((factorial(spec.dim()) as f64).ln() + r.value.ln())
}

/// `∇H(ξ) = −E_ξ[α]`.
pub fn h_gradient(spec: &GermSpec, xi: &[f64]) -> Result<Vec<f64>, GermError> {
    Ok(spec.moments(xi)?.mean().into_iter().map(|m| -m).collect())
}

/// Hessian of `H`, the covariance of `α` under `e^{−⟨α,ξ⟩}dα`.
pub fn h_hessian(spec: &GermSpec, xi: &[f64]) -> Result<DMatrix<f64>, GermError> {
    Ok(spec.moments(xi)?.covariance())
}

/// Normalized Futaki invariant `Fut_ξ₀(η) = −E_ξ₀[⟨α, η⟩]`.
pub fn futaki(spec: &GermSpec, xi0: &[f64], eta: &[f64]) -> Result<f64, GermError> {
    spec.check_len(eta)?;
    let mean = spec.moments(xi0)?.mean();
    Ok(-dot(&mean, eta))
}

/// Unnormalized Futaki invariant `−n!∫⟨α,η⟩e^{−⟨α,ξ₀⟩}dα`.
pub fn futaki_unnormalized(spec: &GermSpec, xi0: &[f64], eta: &[f64]) -> Result<f64, GermError> {
    spec.check_interior(xi0)?;
    Ok(-(factorial(spec.dim()) as f64) * spec.kernel.moment(xi0, eta)?)
}

/// Point of the open Reeb cone.
#[derive(Clone, Debug, PartialEq)]
pub struct ReebVector(Vec<f64>);

impl ReebVector {
    pub fn new(spec: &GermSpec, coords: Vec<f64>) -> Result<Self, GermError> {
        spec.check_interior(&coords)?;
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolitonCertificate {
    pub xi0: ReebVector,
    pub h_value: f64,
    pub gradient_norm: f64,
    pub hessian_min_eig: f64,
    pub newton_iters: usize,
    /// Iterations where the Hessian was ill-conditioned and a gradient step was used.
    pub gradient_steps: usize,
}

/// Starting point of the minimizer.
pub fn initial_point(spec: &GermSpec) -> Vec<f64> {
    if spec.is_bounded() {
        vec![1e-3; spec.dim()]
    } else {
        let s = spec.default_reference().to_f64();
        let norm = dot(&s, &s).sqrt();
        s.iter().map(|x| x / norm).collect()
    }
}

/// Minimizer of `H` over the open Reeb cone (the soliton candidate).
pub fn minimize_h(
    spec: &GermSpec,
    tol: f64,
    max_iters: usize,
) -> Result<SolitonCertificate, GermError> {
    minimize_h_from(spec, &initial_point(spec), tol, max_iters)
}

/// Damped Newton from a given interior point, with Armijo backtracking and a
/// feasibility guard `⟨r, ξ⟩ ≥ 1e−9`.
pub fn minimize_h_from(
    spec: &GermSpec,
    start: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<SolitonCertificate, GermError> {
    const ARMIJO: f64 = 1e-4;
    const GUARD: f64 = 1e-9;
    const MAX_CONDITION: f64 = 1e12;
    spec.check_interior(start)?;
    let n = spec.dim();
    let log_nf = (factorial(n) as f64).ln();
    let mut xi = start.to_vec();
    let mut m = spec.moments(&xi)?;
    let mut gradient_steps = 0;
    for iter in 0..=max_iters {
        let grad: Vec<f64> = m.mean().iter().map(|x| -x).collect();
        let gnorm = dot(&grad, &grad).sqrt();
        let hess = m.covariance();
        let eig = hess.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        if gnorm <= tol {
            return Ok(SolitonCertificate {
                xi0: ReebVector(xi),
                h_value: log_nf + m.log_value(),
                gradient_norm: gnorm,
                hessian_min_eig: min_eig,
                newton_iters: iter,
                gradient_steps,
            });
        }
        if iter == max_iters {
            return Err(GermError::NoConvergence {
                iters: max_iters,
                gradient_norm: gnorm,
                last: xi,
            });
        }
        let g = DVector::from_vec(grad.clone());
        let newton = if min_eig > 0.0 && eig.eigenvalues.max() / min_eig <= MAX_CONDITION {
            hess.cholesky().map(|c| -c.solve(&g))
        } else {
            None
        };
        let step = newton.unwrap_or_else(|| {
            gradient_steps += 1;
            -g.clone()
        });
        let slope = g.dot(&step);
        let h0 = m.log_value();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = xi.iter().zip(step.iter()).map(|(x, s)| x + t * s).collect();
            if spec.reeb.margin(&trial) >= GUARD {
                let mt = spec.kernel.moments(&trial)?;
                let h1 = mt.log_value();
                if h1 <= h0 + ARMIJO * t * slope {
                    accepted = Some((trial, mt));
                    break;
                }
                // at the noise floor of H, accept any step that shrinks the gradient
                if h1 <= h0 + 1e-14 * (1.0 + h0.abs()) {
                    let gt: f64 = mt.mean().iter().map(|x| x * x).sum::<f64>().sqrt();
                    if gt < gnorm {
                        accepted = Some((trial, mt));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((x, mt)) => {
                xi = x;
                m = mt;
            }
            None => {
                return Err(GermError::NoConvergence {
                    iters: iter,
                    gradient_norm: gnorm,
                    last: xi,
                });
            }
        }
    }
    unreachable!("loop returns on the last iteration")
}

/// `S^{(t)}(ξ₀; wt_ξ)`: the `e^{−⟨α,ξ₀⟩}`-weighted mean of `⟨α,ξ⟩ + A(wt_ξ)` over
/// `P ∩ {⟨α,ξ₀⟩ + A(wt_ξ₀) ≤ t}`, or over all of `P` when `t` is `None`.
pub fn s_weighted(
    spec: &GermSpec,
    xi0: &[f64],
    xi: &[f64],
    t: Option<f64>,
) -> Result<f64, GermError> {
    spec.check_interior(xi0)?;
    let a = a_wt(spec, xi)?;
    let mean = match t {
        None => spec.moments(xi0)?.mean(),
        Some(t) => {
            let xr = RationalVector::from_f64s(xi0);
            let a0 = a_wt_exact(spec, &xr)?;
            let cut = Halfspace {
                normal: -&xr,
                offset: from_f64(t) - a0,
            };
            if cut.normal.is_zero() {
                if cut.offset.is_negative() {
                    return Err(GermError::EmptyTruncation(t));
                }
                spec.moments(xi0)?.mean()
            } else {
                let truncated = match spec.polyhedron.intersect(&[cut]) {
                    Ok(p) if p.is_full_dimensional() => p,
                    _ => return Err(GermError::EmptyTruncation(t)),
                };
                KernelCells::new(&truncated)?.moments(xi0)?.mean()
            }
        }
    };
    Ok(a + dot(&mean, xi))
}

/// Ding invariant `D(wt_ξ) = A(wt_ξ) − S(ξ₀; wt_ξ)`.
pub fn ding_invariant(spec: &GermSpec, xi0: &[f64], xi: &[f64]) -> Result<f64, GermError> {
    Ok(a_wt(spec, xi)? - s_weighted(spec, xi0, xi, None)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaResult {
    pub value: f64,
    /// Unit direction attaining the best ratio found.
    pub argmin: Vec<f64>,
    pub starts: usize,
}

/// Quasi-random point of the Halton sequence (bases: first primes).
fn halton(index: usize, dims: usize) -> Vec<f64> {
    const PRIMES: [usize; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    (0..dims)
        .map(|d| {
            let b = PRIMES[d % PRIMES.len()];
            let (mut f, mut r, mut i) = (1.0, 0.0, index);
            while i > 0 {
                f /= b as f64;
                r += f * (i % b) as f64;
                i /= b;
            }
            r
        })
        .collect()
}

struct DeltaObjective<'a> {
    spec: &'a GermSpec,
    mean: Vec<f64>,
}

impl DeltaObjective<'_> {
    fn ratio(&self, u: &[f64]) -> Option<f64> {
        let norm = dot(u, u).sqrt();
        if norm < 1e-12 || !self.spec.reeb.contains_closed(u) {
            return None;
        }
        let dir: Vec<f64> = u.iter().map(|x| x / norm).collect();
        let a = a_wt(self.spec, &dir).ok()?;
        let s = a + dot(&self.mean, &dir);
        (s > 0.0).then(|| a / s)
    }
}

impl CostFunction for DeltaObjective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        let norm2 = dot(u, u);
        Ok(match self.ratio(u) {
            Some(r) => r + (norm2 - 1.0).powi(2),
            None => 1e6 + self.spec.reeb.margin(u).min(0.0).abs(),
        })
    }
}

/// `δ_T(ξ₀) = inf_ξ A(wt_ξ) / S(ξ₀; wt_ξ)` over the closed Reeb cone.
///
/// Multi-start Nelder–Mead on the sphere slice from at least 20 Halton starts
/// plus the facet normals and Reeb-cone generators; reports the best ratio.
pub fn delta_toric(spec: &GermSpec, xi0: &[f64], tol: f64) -> Result<DeltaResult, GermError> {
    let mean = spec.moments(xi0)?.mean();
    let obj = DeltaObjective { spec, mean };
    let n = spec.dim();
    let mut starts: Vec<Vec<f64>> = spec.facets.iter().map(|f| f.normal.to_f64()).collect();
    starts.extend(spec.reeb.generators().iter().map(RationalVector::to_f64));
    let params = spec.reeb.parameter_count().max(1);
    for k in 1..=20 {
        let h = halton(k, params);
        let p = spec.reeb.point_from_unit(&h);
        if dot(&p, &p) > 0.0 {
            starts.push(p);
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |r: f64, u: Vec<f64>| {
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, u));
        }
    };
    for s in &starts {
        let norm = dot(s, s).sqrt();
        let u0: Vec<f64> = s.iter().map(|x| x / norm).collect();
        if let Some(r) = obj.ratio(&u0) {
            consider(r, u0.clone());
        }
        let mut simplex = vec![u0.clone()];
        for i in 0..n {
            let mut v = u0.clone();
            v[i] += 0.1;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(tol.max(1e-14) * 1e-2)
            .expect("positive tolerance");
        let res = Executor::new(&obj, solver)
            .configure(|c| c.max_iters(400))
            .run();
        if let Ok(res) = res {
            if let Some(u) = res.state().get_best_param().cloned() {
                if let Some(r) = obj.ratio(&u) {
                    let norm = dot(&u, &u).sqrt();
                    consider(r, u.iter().map(|x| x / norm).collect());
                }
            }
        }
    }
    let (value, argmin) = best.ok_or(GermError::NoConvergence {
        iters: 0,
        gradient_norm: f64::NAN,
        last: xi0.to_vec(),
    })?;
    Ok(DeltaResult {
        value,
        argmin,
        starts: starts.len(),
    })
}

impl CostFunction for &DeltaObjective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        (**self).cost(u)
    }
}

/// Exact CDF of `DH_{wt_ξ}`: `n!·vol(P ∩ {⟨α,ξ⟩ + A(wt_ξ) ≤ t})`.
pub fn dh_cdf_exact(
    spec: &GermSpec,
    xi: &RationalVector,
    t: &Rational,
) -> Result<Rational, GermError> {
    if xi.dim() != spec.dim() {
        return Err(GermError::DimensionMismatch {
            expected: spec.dim(),
            got: xi.dim(),
        });
    }
    let interior = spec
        .reeb
        .constraints()
        .iter()
        .all(|r| r.dot(xi).is_positive());
    if !interior {
        return Err(GermError::ReebViolation(format!(
            "ξ = {xi} is not in the open Reeb cone"
        )));
    }
    let nf = Rational::from_integer(factorial(spec.dim()).into());
    // ξ = 0: all mass sits at 0
    if xi.is_zero() {
        if t.is_negative() {
            return Ok(Rational::zero());
        }
        return Ok(
            nf * volume(&spec.polyhedron).map_err(|e| GermError::ReebViolation(e.to_string()))?
        );
    }
    if !t.is_positive() {
        return Ok(Rational::zero());
    }
    let a = a_wt_exact(spec, xi)?;
    let cut = Halfspace {
        normal: -xi,
        offset: t - a,
    };
    match spec.polyhedron.intersect(&[cut]) {
        Ok(p) if p.is_full_dimensional() => {
            Ok(nf * volume(&p).expect("slice of a Reeb-interior ξ is bounded"))
        }
        _ => Ok(Rational::zero()),
    }
}

pub fn dh_cdf(spec: &GermSpec, xi: &[f64], t: f64) -> Result<f64, GermError> {
    spec.check_len(xi)?;
    Ok(to_f64(&dh_cdf_exact(
        spec,
        &RationalVector::from_f64s(xi),
        &from_f64(t),
    )?))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::{int, rat};
    use approx::assert_relative_eq;

    // independent 200-point Gauss–Legendre quadrature + Newton
    const F1_XI0_Y: f64 = 0.527_619_519_896_962_2;
    const F1_H_MIN: f64 = 2.035_111_434_618_081;
    const FUT_P1_AT_1: f64 = 0.313_035_285_499_331_35;

    #[test]
    fn moment_polyhedra() {
        let v = |s: &GermSpec| {
            s.polyhedron()
                .vertices()
                .iter()
                .map(|x| x.to_i64s().unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(v(&p1()), vec![vec![-1], vec![1]]);
        assert_eq!(v(&p2()), vec![vec![-1, -1], vec![-1, 2], vec![2, -1]]);
        assert_eq!(v(&affine(2)), vec![vec![-1, -1]]);
        assert_eq!(affine(2).polyhedron().rays().len(), 2);
    }

    #[test]
    fn invalid_specs_name_the_facet() {
        let bad = GermSpec::new(
            "bad",
            vec![Facet::new(&[1], int(1)), Facet::new(&[-1], int(0))],
        );
        assert!(matches!(
            bad,
            Err(GermError::SpecInvalid { facet: Some(1), .. })
        ));
        let redundant = GermSpec::new(
            "r",
            vec![
                Facet::new(&[1, 0], int(1)),
                Facet::new(&[0, 1], int(1)),
                Facet::new(&[1, 1], int(5)),
            ],
        );
        assert!(matches!(
            redundant,
            Err(GermError::SpecInvalid { facet: Some(2), .. })
        ));
        let not_primitive = GermSpec::new(
            "np",
            vec![Facet::new(&[2], int(1)), Facet::new(&[-1], int(1))],
        );
        assert!(matches!(
            not_primitive,
            Err(GermError::SpecInvalid { facet: Some(0), .. })
        ));
        let line = GermSpec::new(
            "line",
            vec![Facet::new(&[1, 0], int(1)), Facet::new(&[-1, 0], int(1))],
        );
        assert!(matches!(
            line,
            Err(GermError::SpecInvalid { facet: None, .. })
        ));
    }

    #[test]
    fn reeb_cones() {
        assert!(p1().reeb().is_whole_space());
        assert!(f1().reeb().is_whole_space());
        let a2 = affine(2);
        assert!(a2.reeb().contains_interior(&[1.0, 0.5]));
        assert!(!a2.reeb().contains_interior(&[1.0, 0.0]));
        assert!(a2.reeb().contains_closed(&[1.0, 0.0]));
        assert_eq!(a2.reeb().generators().len(), 2);
    }

    #[test]
    fn log_discrepancies() {
        assert_eq!(a_wt(&p1(), &[1.0]).unwrap(), 1.0);
        assert_eq!(a_wt(&affine(2), &[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(a_wt(&f1(), &[0.0, 0.0]).unwrap(), 0.0);
        for s in [p2(), f1(), affine(3)] {
            for f in s.facets() {
                assert_eq!(a_wt_exact(&s, &f.normal).unwrap(), f.discrepancy);
            }
        }
        assert!(a_wt(&affine(2), &[1.0, -1.0]).is_err());
    }

    #[test]
    fn h_values() {
        assert_relative_eq!(
            h_eval(&p1(), &[0.0]).unwrap().exp(),
            2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            h_eval(&p2(), &[0.0, 0.0]).unwrap().exp(),
            9.0,
            max_relative = 1e-12
        );
        let e = 1f64.exp();
        assert_relative_eq!(
            h_eval(&affine(2), &[1.0, 1.0]).unwrap().exp(),
            2.0 * e * e,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            h_eval(&f1(), &[0.0, 0.0]).unwrap().exp(),
            8.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn futaki_values() {
        assert!(futaki(&p1(), &[0.0], &[1.0]).unwrap().abs() < 1e-15);
        assert!(futaki(&affine(2), &[1.0, 1.0], &[1.0, 0.0]).unwrap().abs() < 1e-12);
        assert_relative_eq!(
            futaki(&p1(), &[1.0], &[1.0]).unwrap(),
            FUT_P1_AT_1,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            FUT_P1_AT_1,
            2.0 / (1f64.exp().powi(2) - 1.0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn soliton_candidates() {
        let c = minimize_h(&p1(), 1e-10, 50).unwrap();
        assert!(c.xi0.coords()[0].abs() < 1e-8);
        let c = minimize_h(&p2(), 1e-10, 50).unwrap();
        assert!(c.xi0.coords().iter().all(|x| x.abs() < 1e-8));
        let c = minimize_h(&f1(), 1e-10, 50).unwrap();
        assert!(c.xi0.coords()[0].abs() < 1e-6);
        assert!((c.xi0.coords()[1] - F1_XI0_Y).abs() < 1e-6);
        assert_relative_eq!(c.h_value, F1_H_MIN, max_relative = 1e-10);
        assert!(c.hessian_min_eig > 0.0);
        let c = minimize_h(&affine(2), 1e-10, 50).unwrap();
        assert!(c.xi0.coords().iter().all(|x| (x - 1.0).abs() < 1e-8));
    }

    #[test]
    fn ding_values() {
        assert!(ding_invariant(&p1(), &[0.0], &[1.0]).unwrap().abs() < 1e-15);
        assert_relative_eq!(
            ding_invariant(&p1(), &[1.0], &[1.0]).unwrap(),
            FUT_P1_AT_1,
            max_relative = 1e-12
        );
        assert_eq!(
            ding_invariant(&p2(), &[0.3, 0.1], &[0.0, 0.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn delta_at_solitons() {
        let d = delta_toric(&p1(), &[0.0], 1e-6).unwrap();
        assert!((d.value - 1.0).abs() < 1e-9);
        assert!(d.starts >= 20);
        let d = delta_toric(&p2(), &[0.0, 0.0], 1e-6).unwrap();
        assert!((d.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dh_cdf_examples() {
        assert_eq!(
            dh_cdf_exact(&affine(2), &RationalVector::from_ints(&[1, 1]), &int(1)).unwrap(),
            int(1)
        );
        assert_eq!(dh_cdf(&p1(), &[1.0], 0.0).unwrap(), 0.0);
        assert_eq!(
            dh_cdf_exact(&p1(), &RationalVector::from_ints(&[1]), &int(100)).unwrap(),
            int(2)
        );
        assert_eq!(
            dh_cdf_exact(&p1(), &RationalVector::from_ints(&[1]), &rat(1, 2)).unwrap(),
            rat(1, 2)
        );
    }

    #[test]
    fn truncated_s_tends_to_full() {
        let s = p2();
        let full = s_weighted(&s, &[0.2, 0.1], &[1.0, 0.0], None).unwrap();
        let cut = s_weighted(&s, &[0.2, 0.1], &[1.0, 0.0], Some(50.0)).unwrap();
        assert_relative_eq!(full, cut, max_relative = 1e-12);
        assert!(s_weighted(&s, &[0.2, 0.1], &[1.0, 0.0], Some(0.0)).is_err());
    }
}
