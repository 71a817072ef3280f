//! Monomial valuations on affine and toric germs: Okounkov bodies, volume
//! functions, limit DH measures, weighted volumes, scaling normalization and
//! log canonical slopes through the Howald formula.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::filtrations::{
    count_below, dh_discrete, filtration_from_wt, level_from_germ_with_reference, Filtration,
    FiltrationError,
};
use crate::germ::{
    a_wt, dh_cdf_exact, fixtures, h_eval, h_gradient, h_hessian, GermError, GermSpec,
};
use crate::polyhedra::{projected_volume, Halfspace, Polyhedron, PolyhedronError};
use crate::rational::{
    denominator_lcm, factorial, from_f64, int, to_f64, Rational, RationalVector,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValuationError {
    #[error("ideal has no generators")]
    ZeroIdeal,
    #[error("ideal is the unit ideal; its lct is infinite")]
    UnitIdeal,
    #[error("generator {0:?} has a negative exponent")]
    NegativeExponent(Vec<i64>),
    #[error("weights must be positive on an affine germ, got {0:?}")]
    NonPositiveWeights(Vec<f64>),
    #[error("operation needs a valuation on an affine germ")]
    NotAffine,
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Polyhedron(#[from] PolyhedronError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ambient {
    /// `𝔸ⁿ` at the origin with empty boundary.
    Affine,
    /// Toric germ given by facet data.
    Germ,
}

/// Monomial valuation `wt_ξ`, with log discrepancy `A(v)`.
#[derive(Clone, Debug)]
pub struct MonomialValuation {
    spec: Arc<GermSpec>,
    ambient: Ambient,
    weights: Vec<f64>,
    a_value: f64,
}

impl MonomialValuation {
    /// Valuation on `𝔸ⁿ` with positive weights; `A = Σξᵢ`.
    pub fn affine(weights: &[f64]) -> Result<Self, ValuationError> {
        if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(ValuationError::NonPositiveWeights(weights.to_vec()));
        }
        let spec = Arc::new(fixtures::affine(weights.len()));
        let mut v = Self::on_germ(spec, weights)?;
        v.ambient = Ambient::Affine;
        Ok(v)
    }

    /// Valuation on a toric germ with Reeb-interior weights; `A = a_wt(ξ)`.
    pub fn on_germ(spec: Arc<GermSpec>, weights: &[f64]) -> Result<Self, ValuationError> {
        if weights.len() != spec.dim() {
            return Err(GermError::DimensionMismatch {
                expected: spec.dim(),
                got: weights.len(),
            }
            .into());
        }
        if !spec.reeb().contains_interior(weights) {
            return Err(GermError::ReebViolation(format!(
                "ξ = {weights:?} is not in the open Reeb cone"
            ))
            .into());
        }
        let a_value = a_wt(&spec, weights)?;
        Ok(Self {
            spec,
            ambient: Ambient::Germ,
            weights: weights.to_vec(),
            a_value,
        })
    }

    pub fn spec(&self) -> &Arc<GermSpec> {
        &self.spec
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn a_value(&self) -> f64 {
        self.a_value
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Weights as exact binary rationals.
    pub fn exact_weights(&self) -> RationalVector {
        RationalVector::from_f64s(&self.weights)
    }

    /// `c·v`; nonpositive `c` only makes sense on bounded germs.
    pub fn rescale(&self, c: f64) -> Result<Self, ValuationError> {
        let w: Vec<f64> = self.weights.iter().map(|x| c * x).collect();
        let mut v = Self::on_germ(self.spec.clone(), &w)?;
        v.ambient = self.ambient;
        Ok(v)
    }
}

/// Okounkov body with a linear concave transform `G(β) = ⟨ξ, β⟩ + constant`.
#[derive(Clone, Debug)]
pub struct OkounkovData {
    pub body: Polyhedron,
    pub slope: Vec<f64>,
    pub constant: f64,
}

impl OkounkovData {
    pub fn concave_transform(&self, beta: &[f64]) -> f64 {
        self.slope.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() + self.constant
    }
}

/// Body in valuation coordinates: `P` translated so that the vertex minimizing
/// `⟨·, ξ⟩` sits at the origin, where `G` vanishes.
pub fn okounkov_body(v: &MonomialValuation) -> OkounkovData {
    let xi = v.exact_weights();
    let p = v.spec.polyhedron();
    let corner = p
        .argmin_vertex(&xi)
        .expect("Reeb-interior weights attain their minimum")
        .clone();
    OkounkovData {
        body: p.translate(&(-&corner)),
        slope: v.weights.clone(),
        constant: 0.0,
    }
}

/// `(n!/mⁿ)·#{basis points with value < mt}`.
pub fn vol_fn_discrete(
    v: &MonomialValuation,
    t: &Rational,
    m: u64,
) -> Result<Rational, ValuationError> {
    if !t.is_positive() {
        return Ok(Rational::zero());
    }
    let level =
        level_from_germ_with_reference(&v.spec, m, Some(t.clone()), Some(v.exact_weights()))?;
    Ok(level.unit_mass() * int(level.dim() as i64))
}

/// Same count for an arbitrary filtration of a finite level.
pub fn vol_fn_discrete_filtration(f: &Filtration, t: &Rational) -> Rational {
    let mt = t * int(f.m() as i64);
    f.level().unit_mass() * int(count_below(f, &mt) as i64)
}

/// `n!·vol{α ∈ P : ⟨α, ξ⟩ + A ≤ t}`, exact for the binary weights.
pub fn vol_fn_limit_exact(v: &MonomialValuation, t: &Rational) -> Result<Rational, ValuationError> {
    Ok(dh_cdf_exact(&v.spec, &v.exact_weights(), t)?)
}

pub fn vol_fn_limit(v: &MonomialValuation, t: f64) -> Result<f64, ValuationError> {
    Ok(to_f64(&vol_fn_limit_exact(v, &from_f64(t))?))
}

/// `d/dt vol(v; t)` from the slice `{⟨α, ξ⟩ + A = t}`: its volume projected
/// along a coordinate `k` with `ξ_k ≠ 0`, divided by `|ξ_k|`.
pub fn vol_derivative(v: &MonomialValuation, t: f64) -> Result<f64, ValuationError> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let xi = v.exact_weights();
    let n = v.dim();
    let a = crate::germ::a_wt_exact(&v.spec, &xi)?;
    let level = from_f64(t) - a;
    let below = Halfspace {
        normal: -&xi,
        offset: level.clone(),
    };
    let above = Halfspace {
        normal: xi.clone(),
        offset: -level,
    };
    let slice = match v.spec.polyhedron().intersect(&[below, above]) {
        Ok(s) => s,
        Err(PolyhedronError::InfeasibleSystem) => return Ok(0.0),
        Err(e) => return Err(e.into()),
    };
    let k = (0..n)
        .max_by(|&i, &j| xi[i].abs().cmp(&xi[j].abs()))
        .expect("positive dimension");
    let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    if slice.affine_dim() + 1 < n {
        return Ok(0.0);
    }
    let proj = projected_volume(&slice, &keep)?;
    let nf = factorial(n) as f64;
    Ok(nf * to_f64(&(proj / xi[k].abs())))
}

/// `sup_t |DH_{v,m}(−∞, t] − vol(v; t)|` over `t < t_max` (all `t` when
/// omitted on a bounded germ), exact up to the final conversion.
///
/// The discrete CDF is a step function and the limit is continuous and
/// nondecreasing, so the supremum is attained at an atom from one side or at
/// the end of the range.
pub fn dh_cdf_gap(
    v: &MonomialValuation,
    m: u64,
    t_max: Option<Rational>,
) -> Result<f64, ValuationError> {
    let xi = v.exact_weights();
    let level = Arc::new(level_from_germ_with_reference(
        &v.spec,
        m,
        t_max.clone(),
        Some(xi.clone()),
    )?);
    let dh = dh_discrete(&filtration_from_wt(&v.spec, level, &xi)?);
    let end = match t_max {
        Some(t) => t,
        None => {
            let a = crate::germ::a_wt_exact(&v.spec, &xi)?;
            let top = v
                .spec
                .polyhedron()
                .vertices()
                .iter()
                .map(|p| p.dot(&xi))
                .max()
                .expect("vertex");
            top + a
        }
    };
    let mut below = Rational::zero();
    let mut gap = Rational::zero();
    for (x, w) in &dh.atoms {
        let limit = vol_fn_limit_exact(v, x)?;
        let above = &below + w;
        gap = gap
            .max((&below - &limit).abs())
            .max((&above - &limit).abs());
        below = above;
    }
    gap = gap.max((&below - vol_fn_limit_exact(v, &end)?).abs());
    Ok(to_f64(&gap))
}

/// Limit DH measure of `v`, with CDF `vol(v; ·)`.
#[derive(Clone, Debug)]
pub struct DhLimit {
    v: MonomialValuation,
}

pub fn dh_limit(v: &MonomialValuation) -> DhLimit {
    DhLimit { v: v.clone() }
}

impl DhLimit {
    pub fn cdf(&self, t: f64) -> Result<f64, ValuationError> {
        vol_fn_limit(&self.v, t)
    }

    pub fn density(&self, t: f64) -> Result<f64, ValuationError> {
        vol_derivative(&self.v, t)
    }

    /// `n!·vol(P)`, or `None` when `P` is unbounded.
    pub fn total_mass(&self) -> Option<f64> {
        if !self.v.spec.is_bounded() {
            return None;
        }
        let nf = Rational::from_integer(BigInt::from(factorial(self.v.dim())));
        crate::polyhedra::volume(self.v.spec.polyhedron())
            .ok()
            .map(|vol| to_f64(&(nf * vol)))
    }

    /// `∫ e^{−s x} dDH(x) = e^{−sA}·n!∫_P e^{−s⟨α,ξ⟩}dα` for `s > 0`.
    pub fn laplace(&self, s: f64) -> Result<f64, ValuationError> {
        assert!(s > 0.0, "Laplace parameter must be positive");
        let xi: Vec<f64> = self.v.weights.iter().map(|w| s * w).collect();
        Ok((h_eval(&self.v.spec, &xi)? - s * self.v.a_value).exp())
    }
}

/// `𝐖(v) = ∫ e^{A(v) − x} dDH_v(x) = n!∫_P e^{−⟨α,ξ⟩}dα`.
pub fn weighted_vol(v: &MonomialValuation) -> Result<f64, ValuationError> {
    Ok(h_eval(&v.spec, &v.weights)?.exp())
}

/// Scaling normalization.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub scale: f64,
    pub valuation: MonomialValuation,
    pub derivative: f64,
}

/// Unique `a > 0` with `d/dx log 𝐖(x·v)|_{x=a} = 0`.
///
/// `φ(x) = ⟨∇H(xξ), ξ⟩` is increasing; safeguarded Newton inside a bracket.
pub fn normalize_scaling(v: &MonomialValuation) -> Result<Normalized, ValuationError> {
    let xi = &v.weights;
    let phi = |x: f64| -> Result<(f64, f64), ValuationError> {
        let p: Vec<f64> = xi.iter().map(|w| x * w).collect();
        let g = h_gradient(&v.spec, &p)?;
        let h = h_hessian(&v.spec, &p)?;
        let d = nalgebra::DVector::from_column_slice(xi);
        let f = g.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
        Ok((f, d.dot(&(&h * &d))))
    };
    let scale = xi.iter().map(|w| w.abs()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    // bounded germs: the whole line lies in the Reeb cone and the root may be ≤ 0
    let whole_line = v.spec.is_bounded();
    let (mut lo, mut hi) = if whole_line { (-1.0, 1.0) } else { (1.0, 1.0) };
    while phi(lo)?.0 > 0.0 {
        lo = if whole_line { 2.0 * lo } else { lo / 2.0 };
        if lo.abs() < 1e-12 || lo.abs() > 1e12 {
            return Err(ValuationError::NoConvergence(
                "no lower bracket for the scaling".into(),
            ));
        }
    }
    while phi(hi)?.0 < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(ValuationError::NoConvergence(
                "no upper bracket for the scaling".into(),
            ));
        }
    }
    let mut x = if lo == hi { lo } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let (f, df) = phi(x)?;
        if f.abs() <= tol {
            let valuation = v.rescale(x)?;
            return Ok(Normalized {
                scale: x,
                valuation,
                derivative: f,
            });
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        x = if df > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            let (f, _) = phi(x)?;
            let valuation = v.rescale(x)?;
            return Ok(Normalized {
                scale: x,
                valuation,
                derivative: f,
            });
        }
    }
    Err(ValuationError::NoConvergence(format!(
        "scaling Newton stalled near {x}"
    )))
}

/// Monomial ideal with its Newton polyhedron `conv(generators) + ℝⁿ₊`.
#[derive(Clone, Debug)]
pub struct MonomialIdeal {
    generators: Vec<Vec<i64>>,
    newton: Polyhedron,
}

impl MonomialIdeal {
    pub fn new(dim: usize, generators: Vec<Vec<i64>>) -> Result<Self, ValuationError> {
        if generators.is_empty() {
            return Err(ValuationError::ZeroIdeal);
        }
        for g in &generators {
            if g.len() != dim {
                return Err(GermError::DimensionMismatch {
                    expected: dim,
                    got: g.len(),
                }
                .into());
            }
            if g.iter().any(|&x| x < 0) {
                return Err(ValuationError::NegativeExponent(g.clone()));
            }
        }
        let verts: Vec<RationalVector> = generators
            .iter()
            .map(|g| RationalVector::from_ints(g))
            .collect();
        let newton = newton_region(&verts, dim)?;
        Ok(Self { generators, newton })
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn newton(&self) -> &Polyhedron {
        &self.newton
    }
}

fn newton_region(points: &[RationalVector], dim: usize) -> Result<Polyhedron, PolyhedronError> {
    let rays: Vec<RationalVector> = (0..dim).map(|i| RationalVector::unit(dim, i)).collect();
    Polyhedron::from_generators(points, &rays)
}

/// `max{c : (1,…,1) ∈ c·N}` for a Newton region `N` with recession cone `ℝⁿ₊`.
///
/// Each facet `⟨u, x⟩ ≥ b` with `b > 0` forces `s·Σu ≥ b` on the diagonal point
/// `s·(1,…,1)`; the threshold is the reciprocal of the largest such `s`.
pub fn lct_newton(newton: &Polyhedron) -> Result<Rational, ValuationError> {
    let s = newton
        .halfspaces()
        .iter()
        .filter(|h| h.offset.is_negative())
        .map(|h| -&h.offset / h.normal.iter().fold(Rational::zero(), |acc, u| acc + u))
        .max();
    match s {
        Some(s) => Ok(Rational::one() / s),
        None => Err(ValuationError::UnitIdeal),
    }
}

/// Howald: `lct(𝔞) = max{c : 𝟏 ∈ c·Newt(𝔞)}`.
pub fn lct_monomial(ideal: &MonomialIdeal) -> Result<Rational, ValuationError> {
    lct_newton(&ideal.newton)
}

/// Smallest value `⟨ξ, γ⟩ ≥ bound` attained by `γ ∈ ℤⁿ₊`, for positive weights.
fn next_attained_value(xi: &[Rational], bound: &Rational) -> Rational {
    if !bound.is_positive() {
        return Rational::zero();
    }
    // clear denominators; the bound only matters up to the value lattice
    let d = denominator_lcm(xi.iter());
    let dq = Rational::from_integer(d.clone());
    let scaled: Option<Vec<i128>> = xi
        .iter()
        .map(|w| (w * &dq).to_integer().to_i128())
        .collect();
    let target = (bound * &dq).ceil().to_integer().to_i128();
    let (Some(mut w), Some(target)) = (scaled, target) else {
        panic!("weights too fine for the value search");
    };
    assert!(
        w.iter().all(|&x| x > 0 && x < 1 << 100) && target < 1 << 100,
        "weights too fine for the value search"
    );
    // large weights in the outer loops, the smallest solved directly
    w.sort_unstable_by(|a, b| b.cmp(a));
    let min = *w.last().expect("nonempty weights");
    let mut best = Integer::div_ceil(&target, &min) * min;
    search_values(&w, target, 0, &mut best);
    Rational::new(BigInt::from(best), d)
}

fn search_values(w: &[i128], target: i128, partial: i128, best: &mut i128) {
    if *best == target {
        return;
    }
    let (&last, rest) = w.split_last().expect("nonempty weights");
    if rest.is_empty() {
        let need = target - partial;
        let value = if need > 0 {
            partial + Integer::div_ceil(&need, &last) * last
        } else {
            partial
        };
        *best = (*best).min(value);
        return;
    }
    let mut p = partial;
    while p < *best {
        search_values(&w[1..], target, p, best);
        if p >= target {
            break;
        }
        p += w[0];
    }
}

/// `m·lct(I_{m,mt})` for the base ideal of `{⟨ξ,γ⟩ + m·shift ≥ mt}`, taking
/// the real Newton region with the threshold rounded up to the next attained
/// value. `None` when the ideal is the unit ideal.
fn scaled_lct(
    xi: &[Rational],
    shift: &Rational,
    t: &Rational,
    m: u64,
) -> Result<Option<f64>, ValuationError> {
    let mq = int(m as i64);
    let bound = (t - shift) * &mq;
    if !bound.is_positive() {
        return Ok(None);
    }
    let threshold = next_attained_value(xi, &bound);
    let n = xi.len();
    let verts: Vec<RationalVector> = (0..n)
        .map(|i| RationalVector::unit(n, i).scale(&(&threshold / &xi[i])))
        .collect();
    let newton = newton_region(&verts, n)?;
    Ok(Some(to_f64(&(lct_newton(&newton)? * mq))))
}

/// Richardson extrapolation over `m, 2m, 4m` assuming `c + a/m + b/m²`.
fn richardson(c1: f64, c2: f64, c4: f64) -> f64 {
    let r1 = 2.0 * c2 - c1;
    let r2 = 2.0 * c4 - c2;
    (4.0 * r2 - r1) / 3.0
}

/// Log canonical slope of `F_v` shifted by `shift` (values `⟨ξ,γ⟩ + m·shift`).
///
/// Bisection on `t ∈ [shift, A + shift]` of the extrapolated `m·lct(I_{m,mt}) ≥ 1`
/// across `m ∈ {m_max/4, m_max/2, m_max}`.
pub fn lc_slope_shifted(
    v: &MonomialValuation,
    shift: f64,
    m_max: u64,
    tol: f64,
) -> Result<f64, ValuationError> {
    if v.ambient != Ambient::Affine {
        return Err(ValuationError::NotAffine);
    }
    assert!(m_max >= 4, "m_max must allow three levels");
    let xi: Vec<Rational> = v.exact_weights().into_inner();
    let shift_q = from_f64(shift);
    let ms = [m_max / 4, m_max / 2, m_max];
    let at_least_one = |t: f64| -> Result<bool, ValuationError> {
        let tq = from_f64(t);
        let mut c = [0.0; 3];
        for (ci, &m) in c.iter_mut().zip(&ms) {
            match scaled_lct(&xi, &shift_q, &tq, m)? {
                None => return Ok(true),
                Some(x) => *ci = x,
            }
        }
        let ext = if m_max.is_multiple_of(4) {
            richardson(c[0], c[1], c[2])
        } else {
            c[2]
        };
        Ok(ext >= 1.0 - 1e-12)
    };
    let mut lo = shift;
    let mut hi = v.a_value + shift;
    if at_least_one(hi)? {
        return Ok(hi);
    }
    let mut iters = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if at_least_one(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
        if iters > 200 {
            return Err(ValuationError::NoConvergence(format!(
                "slope bisection stuck in [{lo}, {hi}]"
            )));
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `μ(F_v) = sup{t : lct(I^{(t)}_•) ≥ 1}` for a monomial valuation on `𝔸ⁿ`.
pub fn lc_slope_monomial(
    v: &MonomialValuation,
    m_max: u64,
    tol: f64,
) -> Result<f64, ValuationError> {
    lc_slope_shifted(v, 0.0, m_max, tol)
}

/// `H(v) = μ(F_v) − S̃(F_v)` with `S̃ = −log ∫e^{−x}dDH_v`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalH {
    pub h: f64,
    pub slope: f64,
    pub s_tilde: f64,
}

pub fn h_local(v: &MonomialValuation, m_max: u64, tol: f64) -> Result<LocalH, ValuationError> {
    let slope = lc_slope_monomial(v, m_max, tol)?;
    let s_tilde = -dh_limit(v).laplace(1.0)?.ln();
    Ok(LocalH {
        h: slope - s_tilde,
        slope,
        s_tilde,
    })
}
