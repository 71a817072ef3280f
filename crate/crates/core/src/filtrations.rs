//! Filtrations on a single graded piece `R_m`, with one basis vector per
//! lattice point (torus weight).
//!
//! A filtration is either monomial (a jump value per basis point) or a flag
//! (ascending jump values with nested rational subspaces). Measures are exact:
//! locations `λ/m`, masses `n!·ℓ/mⁿ`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::germ::{a_wt_exact, GermError, GermSpec};
use crate::linalg::{self, Matrix};
use crate::polyhedra::{lattice_points_i64, Halfspace};
use crate::rational::{factorial, int, to_f64, KahanSum, Rational, RationalVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiltrationError {
    #[error("unbounded germ needs a cutoff to define a finite level")]
    UnboundedLevel,
    #[error("basis points are not distinct")]
    DuplicatePoint,
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("jump values must be strictly increasing")]
    NotIncreasing,
    #[error("the first jump must span the whole level (rank {rank} of {dim})")]
    NotExhaustive { rank: usize, dim: usize },
    #[error("jump {0} is not contained in the previous one or has the same rank")]
    NotDecreasing(usize),
    #[error("filtration is not equivariant: flag subspaces are not spanned by weight vectors")]
    NotEquivariant,
    #[error("operation needs a monomial filtration")]
    NotMonomial,
    #[error("filtrations live on different levels")]
    LevelMismatch,
    #[error("multiplicativity fails: {0}")]
    Multiplicativity(String),
    #[error(transparent)]
    Germ(#[from] GermError),
}

/// Cutoff used to truncate an unbounded germ: `⟨β, ξ_ref⟩ + m·A(ξ_ref) < m·t_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cutoff {
    pub reference: RationalVector,
    pub t_max: Rational,
}

/// A graded piece `R_m` with its monomial basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedLevel {
    m: u64,
    dim_x: usize,
    points: Vec<Vec<i64>>,
    cutoff: Option<Cutoff>,
}

impl GradedLevel {
    pub fn new(m: u64, dim_x: usize, mut points: Vec<Vec<i64>>) -> Result<Self, FiltrationError> {
        assert!(m >= 1, "degree must be positive");
        for p in &points {
            if p.len() != dim_x {
                return Err(FiltrationError::DimensionMismatch {
                    expected: dim_x,
                    got: p.len(),
                });
            }
        }
        points.sort();
        let before = points.len();
        points.dedup();
        if points.len() != before {
            return Err(FiltrationError::DuplicatePoint);
        }
        Ok(Self {
            m,
            dim_x,
            points,
            cutoff: None,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    /// Number of basis points, `dim R_m`.
    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn cutoff(&self) -> Option<&Cutoff> {
        self.cutoff.as_ref()
    }

    /// Weight `β/m` of a basis point.
    pub fn weight(&self, i: usize) -> RationalVector {
        let m = int(self.m as i64);
        RationalVector::new(self.points[i].iter().map(|&b| int(b) / &m).collect())
    }

    /// `n!/mⁿ`, the mass of one basis vector.
    pub fn unit_mass(&self) -> Rational {
        let nf = Rational::from_integer(BigInt::from(factorial(self.dim_x)));
        nf / Rational::from_integer(BigInt::from(self.m).pow(self.dim_x as u32))
    }
}

/// Level `R_m` of a germ: the lattice points of `m·P`, truncated by `cutoff`
/// (relative to the sum of facet normals) when `P` is unbounded.
pub fn level_from_germ(
    spec: &GermSpec,
    m: u64,
    cutoff: Option<Rational>,
) -> Result<GradedLevel, FiltrationError> {
    level_from_germ_with_reference(spec, m, cutoff, None)
}

pub fn level_from_germ_with_reference(
    spec: &GermSpec,
    m: u64,
    cutoff: Option<Rational>,
    reference: Option<RationalVector>,
) -> Result<GradedLevel, FiltrationError> {
    let n = spec.dim();
    let Some(t_max) = cutoff else {
        if !spec.is_bounded() {
            return Err(FiltrationError::UnboundedLevel);
        }
        let points = lattice_points_i64(spec.polyhedron(), m).expect("bounded");
        return GradedLevel::new(m, n, points);
    };
    let reference = reference.unwrap_or_else(|| spec.default_reference());
    if reference.dim() != n {
        return Err(FiltrationError::DimensionMismatch {
            expected: n,
            got: reference.dim(),
        });
    }
    if !spec
        .polyhedron()
        .rays()
        .iter()
        .all(|r| r.dot(&reference).is_positive())
    {
        return Err(GermError::ReebViolation(format!(
            "reference {reference} is not Reeb-interior"
        ))
        .into());
    }
    let a = a_wt_exact(spec, &reference)?;
    let cut = Halfspace {
        normal: -&reference,
        offset: &t_max - &a,
    };
    let mq = int(m as i64);
    // an infeasible cut leaves the level empty
    let points = match spec.polyhedron().intersect(&[cut]) {
        Ok(p) => lattice_points_i64(&p, m)
            .expect("truncated polyhedron is bounded")
            .into_iter()
            .filter(|b| RationalVector::from_ints(b).dot(&reference) + &mq * &a < &mq * &t_max)
            .collect(),
        Err(_) => Vec::new(),
    };
    let mut level = GradedLevel::new(m, n, points)?;
    level.cutoff = Some(Cutoff { reference, t_max });
    Ok(level)
}

/// Jump of a flag filtration: `F^λ` is the row span of `basis` for `λ` in
/// `(previous λ, λ]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jump {
    pub lambda: Rational,
    /// Reduced row echelon basis.
    pub basis: Matrix,
}

#[derive(Clone, Debug)]
pub enum FiltrationKind {
    Monomial(Vec<Rational>),
    Flag(Vec<Jump>),
}

#[derive(Clone, Debug)]
pub struct Filtration {
    level: Arc<GradedLevel>,
    kind: FiltrationKind,
}

impl PartialEq for Filtration {
    /// Equal when every `F^λ` agrees.
    fn eq(&self, other: &Self) -> bool {
        if self.level != other.level {
            return false;
        }
        let mut lambdas = self.jump_values();
        lambdas.extend(other.jump_values());
        lambdas.sort();
        lambdas.dedup();
        lambdas
            .iter()
            .all(|l| self.subspace(l) == other.subspace(l))
    }
}

fn unit_row(dim: usize, i: usize) -> Vec<Rational> {
    RationalVector::unit(dim, i).into_inner()
}

impl Filtration {
    pub fn monomial(
        level: Arc<GradedLevel>,
        values: Vec<Rational>,
    ) -> Result<Self, FiltrationError> {
        if values.len() != level.dim() {
            return Err(FiltrationError::DimensionMismatch {
                expected: level.dim(),
                got: values.len(),
            });
        }
        Ok(Self {
            level,
            kind: FiltrationKind::Monomial(values),
        })
    }

    /// Flag from `(λ, generators)` pairs with strictly increasing `λ`, the first
    /// spanning the level and each strictly inside the previous one.
    pub fn flag(
        level: Arc<GradedLevel>,
        jumps: Vec<(Rational, Matrix)>,
    ) -> Result<Self, FiltrationError> {
        let dim = level.dim();
        let mut out: Vec<Jump> = Vec::with_capacity(jumps.len());
        for (j, (lambda, gens)) in jumps.into_iter().enumerate() {
            if let Some(row) = gens.iter().find(|r| r.len() != dim) {
                return Err(FiltrationError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            let basis = linalg::row_space(&gens, dim);
            match out.last() {
                None => {
                    if basis.len() != dim {
                        return Err(FiltrationError::NotExhaustive {
                            rank: basis.len(),
                            dim,
                        });
                    }
                }
                Some(prev) => {
                    if lambda <= prev.lambda {
                        return Err(FiltrationError::NotIncreasing);
                    }
                    let mut both = prev.basis.clone();
                    both.extend(basis.iter().cloned());
                    if basis.len() >= prev.basis.len()
                        || linalg::rank(&both, dim) != prev.basis.len()
                    {
                        return Err(FiltrationError::NotDecreasing(j));
                    }
                }
            }
            out.push(Jump { lambda, basis });
        }
        if out.is_empty() && dim > 0 {
            return Err(FiltrationError::NotExhaustive { rank: 0, dim });
        }
        Ok(Self {
            level,
            kind: FiltrationKind::Flag(out),
        })
    }

    /// `F^λ = R_m` for `λ ≤ 0`, and `0` above.
    pub fn trivial(level: Arc<GradedLevel>) -> Self {
        let values = vec![Rational::zero(); level.dim()];
        Self {
            level,
            kind: FiltrationKind::Monomial(values),
        }
    }

    pub fn level(&self) -> &Arc<GradedLevel> {
        &self.level
    }

    pub fn kind(&self) -> &FiltrationKind {
        &self.kind
    }

    pub fn m(&self) -> u64 {
        self.level.m
    }

    pub fn dim(&self) -> usize {
        self.level.dim()
    }

    pub fn is_monomial(&self) -> bool {
        matches!(self.kind, FiltrationKind::Monomial(_))
    }

    /// Distinct jump values, ascending.
    pub fn jump_values(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = match &self.kind {
            FiltrationKind::Monomial(values) => values.clone(),
            FiltrationKind::Flag(jumps) => jumps.iter().map(|j| j.lambda.clone()).collect(),
        };
        v.sort();
        v.dedup();
        v
    }

    /// Echelon basis of `F^λ`.
    pub fn subspace(&self, lambda: &Rational) -> Matrix {
        let dim = self.dim();
        match &self.kind {
            FiltrationKind::Monomial(values) => values
                .iter()
                .enumerate()
                .filter(|(_, v)| *v >= lambda)
                .map(|(i, _)| unit_row(dim, i))
                .collect(),
            FiltrationKind::Flag(jumps) => jumps
                .iter()
                .find(|j| &j.lambda >= lambda)
                .map(|j| j.basis.clone())
                .unwrap_or_default(),
        }
    }

    /// Whether `v ∈ F^λ`.
    pub fn contains(&self, v: &[Rational], lambda: &Rational) -> bool {
        if v.iter().all(Zero::is_zero) {
            return true;
        }
        let sub = self.subspace(lambda);
        !sub.is_empty() && linalg::in_span(&sub, v, self.dim())
    }

    /// `ord_F(v) = max{λ : v ∈ F^λ}` for `v ≠ 0`.
    pub fn ord(&self, v: &[Rational]) -> Option<Rational> {
        if v.iter().all(Zero::is_zero) {
            return None;
        }
        match &self.kind {
            FiltrationKind::Monomial(values) => v
                .iter()
                .zip(values)
                .filter(|(c, _)| !c.is_zero())
                .map(|(_, val)| val.clone())
                .min(),
            FiltrationKind::Flag(jumps) => jumps
                .iter()
                .rev()
                .find(|j| linalg::in_span(&j.basis, v, self.dim()))
                .map(|j| j.lambda.clone()),
        }
    }

    /// Per-point values when every `F^λ` is spanned by basis vectors.
    pub fn as_monomial(&self) -> Option<Vec<Rational>> {
        match &self.kind {
            FiltrationKind::Monomial(values) => Some(values.clone()),
            FiltrationKind::Flag(jumps) => {
                let dim = self.dim();
                let coordinate = jumps.iter().all(|j| {
                    j.basis
                        .iter()
                        .all(|row| row.iter().filter(|x| !x.is_zero()).count() == 1)
                });
                if !coordinate {
                    return None;
                }
                let mut values = vec![Rational::zero(); dim];
                for j in jumps {
                    for row in &j.basis {
                        let i = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
                        values[i] = j.lambda.clone();
                    }
                }
                Some(values)
            }
        }
    }

    /// Same filtration as a flag.
    pub fn to_flag(&self) -> Filtration {
        match &self.kind {
            FiltrationKind::Flag(_) => self.clone(),
            FiltrationKind::Monomial(_) => {
                let jumps = self.jump_values().into_iter().map(|l| {
                    let sub = self.subspace(&l);
                    (l, sub)
                });
                Filtration::flag(self.level.clone(), jumps.collect())
                    .expect("monomial filtrations are valid flags")
            }
        }
    }

    /// `(λ, dim F^λ)` at every jump.
    pub fn jump_table(&self) -> Vec<(Rational, usize)> {
        self.jump_values()
            .into_iter()
            .map(|l| {
                let d = self.subspace(&l).len();
                (l, d)
            })
            .collect()
    }

    fn map_values(&self, f: impl Fn(&Rational) -> Rational) -> Filtration {
        let kind = match &self.kind {
            FiltrationKind::Monomial(values) => {
                FiltrationKind::Monomial(values.iter().map(&f).collect())
            }
            FiltrationKind::Flag(jumps) => FiltrationKind::Flag(
                jumps
                    .iter()
                    .map(|j| Jump {
                        lambda: f(&j.lambda),
                        basis: j.basis.clone(),
                    })
                    .collect(),
            ),
        };
        Filtration {
            level: self.level.clone(),
            kind,
        }
    }
}

/// `λ ↦ aλ`.
pub fn rescale(f: &Filtration, a: &Rational) -> Filtration {
    assert!(a.is_positive(), "rescaling factor must be positive");
    f.map_values(|l| l * a)
}

/// `λ ↦ λ + b·m`.
pub fn shift(f: &Filtration, b: &Rational) -> Filtration {
    let bm = b * int(f.m() as i64);
    f.map_values(|l| l + &bm)
}

/// `wt_ξ`: value `⟨β, ξ⟩ + m·A(wt_ξ)` on the basis point `β`.
pub fn filtration_from_wt(
    spec: &GermSpec,
    level: Arc<GradedLevel>,
    xi: &RationalVector,
) -> Result<Filtration, FiltrationError> {
    let a = a_wt_exact(spec, xi)?;
    let ma = &a * int(level.m as i64);
    let values = level
        .points
        .iter()
        .map(|b| RationalVector::from_ints(b).dot(xi) + &ma)
        .collect();
    Filtration::monomial(level, values)
}

/// `ξ`-twist: shifts the value of each weight vector `β` by `⟨β, ξ⟩`.
pub fn twist(f: &Filtration, xi: &RationalVector) -> Result<Filtration, FiltrationError> {
    let values = f.as_monomial().ok_or(FiltrationError::NotEquivariant)?;
    let twisted = values
        .iter()
        .zip(&f.level.points)
        .map(|(v, b)| v + RationalVector::from_ints(b).dot(xi))
        .collect();
    Filtration::monomial(f.level.clone(), twisted)
}

/// Sorted `(λ, multiplicity)`; multiplicities sum to the level dimension.
pub fn successive_minima(f: &Filtration) -> Vec<(Rational, usize)> {
    match &f.kind {
        FiltrationKind::Monomial(values) => {
            let mut counts: BTreeMap<Rational, usize> = BTreeMap::new();
            for v in values {
                *counts.entry(v.clone()).or_default() += 1;
            }
            counts.into_iter().collect()
        }
        FiltrationKind::Flag(jumps) => jumps
            .iter()
            .enumerate()
            .map(|(i, j)| {
                let next = jumps.get(i + 1).map_or(0, |n| n.basis.len());
                (j.lambda.clone(), j.basis.len() - next)
            })
            .collect(),
    }
}

/// Finite sum of point masses on `ℚ`, sorted by location.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AtomicMeasure {
    pub atoms: Vec<(Rational, Rational)>,
}

impl AtomicMeasure {
    fn from_map(map: BTreeMap<Rational, Rational>) -> Self {
        Self {
            atoms: map.into_iter().filter(|(_, w)| !w.is_zero()).collect(),
        }
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms
            .iter()
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    /// Mass of `(−∞, x]`.
    pub fn cdf(&self, x: &Rational) -> Rational {
        self.atoms
            .iter()
            .filter(|(l, _)| l <= x)
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    /// Mass of `(−∞, x)`.
    pub fn cdf_strict(&self, x: &Rational) -> Rational {
        self.atoms
            .iter()
            .filter(|(l, _)| l < x)
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    /// `∫ g dμ` in floating point.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.atoms
            .iter()
            .map(|(l, w)| g(to_f64(l)) * to_f64(w))
            .collect::<KahanSum>()
            .value()
    }

    /// `log ∫ e^{c − x} dμ`, stable for large exponents.
    pub fn log_exp_integral(&self, c: f64) -> f64 {
        log_sum_exp(self.atoms.iter().map(|(l, w)| (c - to_f64(l), to_f64(w))))
    }

    /// Largest exact difference of masses at any location.
    pub fn deviation(&self, other: &AtomicMeasure) -> Rational {
        let mut diff: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (l, w) in &self.atoms {
            *diff.entry(l.clone()).or_insert_with(Rational::zero) += w;
        }
        for (l, w) in &other.atoms {
            *diff.entry(l.clone()).or_insert_with(Rational::zero) -= w;
        }
        diff.values()
            .map(|d| d.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Finite sum of point masses on `ℚ²`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BivariateMeasure {
    pub atoms: Vec<((Rational, Rational), Rational)>,
}

impl BivariateMeasure {
    fn from_map(map: BTreeMap<(Rational, Rational), Rational>) -> Self {
        Self {
            atoms: map.into_iter().filter(|(_, w)| !w.is_zero()).collect(),
        }
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms
            .iter()
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    pub fn marginal_x(&self) -> AtomicMeasure {
        self.pushforward(&Rational::zero())
    }

    pub fn marginal_y(&self) -> AtomicMeasure {
        self.pushforward(&Rational::one())
    }

    /// Image under `(x, y) ↦ (1 − t)x + ty`.
    pub fn pushforward(&self, t: &Rational) -> AtomicMeasure {
        let s = Rational::one() - t;
        let mut map = BTreeMap::new();
        for ((x, y), w) in &self.atoms {
            *map.entry(&s * x + t * y).or_insert_with(Rational::zero) += w;
        }
        AtomicMeasure::from_map(map)
    }
}

/// Atom with its torus weight, for equivariant measures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivariantAtom {
    pub weight: RationalVector,
    pub location: Rational,
    pub mass: Rational,
}

/// `DH_{F,m}`: atoms at `λ/m` with mass `n!·mult/mⁿ`.
pub fn dh_discrete(f: &Filtration) -> AtomicMeasure {
    let m = int(f.m() as i64);
    let unit = f.level.unit_mass();
    let mut map = BTreeMap::new();
    for (l, mult) in successive_minima(f) {
        *map.entry(l / &m).or_insert_with(Rational::zero) += &unit * int(mult as i64);
    }
    AtomicMeasure::from_map(map)
}

/// Equivariant DH measure of a weight-homogeneous filtration on `P × ℝ`.
pub fn dh_equivariant(f: &Filtration) -> Result<Vec<EquivariantAtom>, FiltrationError> {
    let values = f.as_monomial().ok_or(FiltrationError::NotEquivariant)?;
    let m = int(f.m() as i64);
    let unit = f.level.unit_mass();
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, v)| EquivariantAtom {
            weight: f.level.weight(i),
            location: v / &m,
            mass: unit.clone(),
        })
        .collect())
}

/// Column order by increasing `v₀`, ties by basis index (lexicographic points).
fn order_by_value(values: &[Rational]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].cmp(&values[b]).then(a.cmp(&b)));
    order
}

fn permute_columns(rows: &[Vec<Rational>], order: &[usize]) -> Matrix {
    rows.iter()
        .map(|r| order.iter().map(|&i| r[i].clone()).collect())
        .collect()
}

/// `DH_{F₀,F₁,m}` for monomial `F₀`: masses `n!·ℓ(Gr^μ_{F₀} Gr^ν_{F₁})/mⁿ` at `(μ/m, ν/m)`.
pub fn dh_bivariate(f0: &Filtration, f1: &Filtration) -> Result<BivariateMeasure, FiltrationError> {
    if f0.level != f1.level {
        return Err(FiltrationError::LevelMismatch);
    }
    let v0 = match &f0.kind {
        FiltrationKind::Monomial(v) => v,
        FiltrationKind::Flag(_) => return Err(FiltrationError::NotMonomial),
    };
    let m = int(f0.m() as i64);
    let unit = f0.level.unit_mass();
    let mut map: BTreeMap<(Rational, Rational), Rational> = BTreeMap::new();
    match &f1.kind {
        FiltrationKind::Monomial(v1) => {
            for (a, b) in v0.iter().zip(v1) {
                *map.entry((a / &m, b / &m)).or_insert_with(Rational::zero) += &unit;
            }
        }
        FiltrationKind::Flag(jumps) => {
            let dim = f0.dim();
            let order = order_by_value(v0);
            let sorted_values: Vec<&Rational> = order.iter().map(|&i| &v0[i]).collect();
            let mus = f0.jump_values();
            // d[j][k] = dim(F₀^{μ_k} ∩ F₁^{ν_j}); index len = zero space
            let table: Vec<Vec<i64>> = jumps
                .iter()
                .map(|j| {
                    let (_, pivots) = linalg::rref(&permute_columns(&j.basis, &order), dim);
                    mus.iter()
                        .map(|mu| {
                            let below = pivots.iter().filter(|&&p| sorted_values[p] < mu).count();
                            (pivots.len() - below) as i64
                        })
                        .collect()
                })
                .collect();
            let d = |j: usize, k: usize| -> i64 {
                if j >= table.len() || k >= mus.len() {
                    0
                } else {
                    table[j][k]
                }
            };
            for (j, jump) in jumps.iter().enumerate() {
                for (k, mu) in mus.iter().enumerate() {
                    let l = d(j, k) - d(j + 1, k) - d(j, k + 1) + d(j + 1, k + 1);
                    if l != 0 {
                        *map.entry((mu / &m, &jump.lambda / &m))
                            .or_insert_with(Rational::zero) += &unit * int(l);
                    }
                }
            }
        }
    }
    Ok(BivariateMeasure::from_map(map))
}

/// Basis vector adapted to two filtrations with its two values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibleVector {
    pub vector: Vec<Rational>,
    pub v0: Rational,
    pub v1: Rational,
}

/// Basis compatible with a monomial `F₀` (given by `values`) and a flag.
///
/// Jumps of the flag are processed from the smallest subspace down; new
/// generators are reduced against the rows already chosen and echelonized with
/// columns ordered by increasing `v₀`. A row's `v₀` is the value at its pivot.
fn compatible_basis_monomial(
    values: &[Rational],
    jumps: &[Jump],
    dim: usize,
) -> Vec<CompatibleVector> {
    let order = order_by_value(values);
    let mut rows: Vec<(Vec<Rational>, usize)> = Vec::new(); // permuted row, pivot
    let mut out = Vec::new();
    for jump in jumps.iter().rev() {
        let mut fresh: Matrix = permute_columns(&jump.basis, &order);
        for r in fresh.iter_mut() {
            for (row, p) in &rows {
                if !r[*p].is_zero() {
                    let f = r[*p].clone() / &row[*p];
                    for (x, y) in r.iter_mut().zip(row) {
                        *x -= &f * y;
                    }
                }
            }
        }
        let (ech, pivots) = linalg::rref(&fresh, dim);
        for (row, p) in ech.into_iter().zip(pivots) {
            let mut original = vec![Rational::zero(); dim];
            for (k, &i) in order.iter().enumerate() {
                original[i] = row[k].clone();
            }
            out.push(CompatibleVector {
                vector: original,
                v0: values[order[p]].clone(),
                v1: jump.lambda.clone(),
            });
            rows.push((row, p));
        }
    }
    out
}

/// Basis of the level adapted to both filtrations.
pub fn compatible_basis(
    f0: &Filtration,
    f1: &Filtration,
) -> Result<Vec<CompatibleVector>, FiltrationError> {
    if f0.level != f1.level {
        return Err(FiltrationError::LevelMismatch);
    }
    let dim = f0.dim();
    let flag1 = f1.to_flag();
    let FiltrationKind::Flag(jumps1) = &flag1.kind else {
        unreachable!()
    };
    if let FiltrationKind::Monomial(v0) = &f0.kind {
        return Ok(compatible_basis_monomial(v0, jumps1, dim));
    }
    // change of basis making F₀ monomial: an echelon basis adapted to F₀
    let flag0 = f0.to_flag();
    let FiltrationKind::Flag(jumps0) = &flag0.kind else {
        unreachable!()
    };
    let mut change: Matrix = Vec::new();
    let mut values = Vec::new();
    for j in jumps0.iter().rev() {
        for row in &j.basis {
            let mut trial = change.clone();
            trial.push(row.clone());
            if linalg::rank(&trial, dim) == trial.len() {
                change = trial;
                values.push(j.lambda.clone());
            }
        }
    }
    let inverse = invert(&change);
    let to_new = |rows: &Matrix| -> Matrix { rows.iter().map(|r| vec_mat(r, &inverse)).collect() };
    let new_jumps: Vec<Jump> = jumps1
        .iter()
        .map(|j| Jump {
            lambda: j.lambda.clone(),
            basis: linalg::row_space(&to_new(&j.basis), dim),
        })
        .collect();
    Ok(compatible_basis_monomial(&values, &new_jumps, dim)
        .into_iter()
        .map(|c| CompatibleVector {
            vector: vec_mat(&c.vector, &change),
            ..c
        })
        .collect())
}

fn vec_mat(v: &[Rational], m: &Matrix) -> Vec<Rational> {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![Rational::zero(); cols];
    for (c, row) in v.iter().zip(m) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            *o += c * x;
        }
    }
    out
}

fn invert(m: &Matrix) -> Matrix {
    let n = m.len();
    let aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend(unit_row(n, i));
            row
        })
        .collect();
    let (r, _) = linalg::rref(&aug, 2 * n);
    r.into_iter().map(|row| row[n..].to_vec()).collect()
}

fn filtration_from_basis(
    level: Arc<GradedLevel>,
    basis: &[(Vec<Rational>, Rational)],
) -> Filtration {
    let mut lambdas: Vec<Rational> = basis.iter().map(|(_, l)| l.clone()).collect();
    lambdas.sort();
    lambdas.dedup();
    let jumps = lambdas
        .into_iter()
        .map(|l| {
            let gens: Matrix = basis
                .iter()
                .filter(|(_, w)| *w >= l)
                .map(|(v, _)| v.clone())
                .collect();
            (l, gens)
        })
        .collect();
    Filtration::flag(level, jumps).expect("an adapted basis defines a valid flag")
}

/// Geodesic `F_t^λ = Σ_{(1−t)μ+tν ≥ λ} F₀^μ ∩ F₁^ν` for `t ∈ [0, 1]`.
pub fn geodesic(
    f0: &Filtration,
    f1: &Filtration,
    t: &Rational,
) -> Result<Filtration, FiltrationError> {
    assert!(
        !t.is_negative() && t <= &Rational::one(),
        "t must lie in [0, 1]"
    );
    if f0.level != f1.level {
        return Err(FiltrationError::LevelMismatch);
    }
    let s = Rational::one() - t;
    if let (FiltrationKind::Monomial(a), FiltrationKind::Monomial(b)) = (&f0.kind, &f1.kind) {
        let values = a.iter().zip(b).map(|(x, y)| &s * x + t * y).collect();
        return Filtration::monomial(f0.level.clone(), values);
    }
    let basis: Vec<(Vec<Rational>, Rational)> = compatible_basis(f0, f1)?
        .into_iter()
        .map(|c| {
            let w = &s * &c.v0 + t * &c.v1;
            (c.vector, w)
        })
        .collect();
    Ok(filtration_from_basis(f0.level.clone(), &basis))
}

/// Outcome of comparing `DH(F_t)` with the pushforward of `DH(F₀, F₁)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub holds: bool,
    pub deviation: Rational,
}

pub fn geodesic_dh_identity(
    f0: &Filtration,
    f1: &Filtration,
    t: &Rational,
) -> Result<IdentityCheck, FiltrationError> {
    let ft = geodesic(f0, f1, t)?;
    let lhs = dh_discrete(&ft);
    let rhs = dh_bivariate(f0, f1)?.pushforward(t);
    let deviation = lhs.deviation(&rhs);
    Ok(IdentityCheck {
        holds: deviation.is_zero(),
        deviation,
    })
}

fn log_sum_exp(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let terms: Vec<(f64, f64)> = terms.filter(|(_, w)| *w > 0.0).collect();
    let top = terms
        .iter()
        .map(|(e, _)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: KahanSum = terms.iter().map(|(e, w)| w * (e - top).exp()).collect();
    top + s.value().ln()
}

/// `S̃_m(F) = −log Σ e^{−x}·mass` over `DH_{F,m}`.
pub fn s_tilde_m(f: &Filtration) -> f64 {
    -dh_discrete(f).log_exp_integral(0.0)
}

/// `H_m = μ − S̃_m(F)`.
pub fn h_m(f: &Filtration, mu: &Rational) -> f64 {
    dh_discrete(f).log_exp_integral(to_f64(mu))
}

/// `S_{m,mt}(v₀; F)` from the bivariate measure: the `e^{μ₀−x}`-weighted mean
/// of `y` over atoms with `x ≤ t`.
pub fn s_weighted_m(
    f0: &Filtration,
    mu0: &Rational,
    f: &Filtration,
    t_cut: &Rational,
) -> Result<f64, FiltrationError> {
    let biv = dh_bivariate(f0, f)?;
    let mu0 = to_f64(mu0);
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for ((x, y), w) in &biv.atoms {
        if x <= t_cut {
            let e = (mu0 - to_f64(x)).exp() * to_f64(w);
            num.add(e * to_f64(y));
            den.add(e);
        }
    }
    Ok(num.value() / den.value())
}

/// `ord_F(D)` for the `v₀`-weighted basis-type divisor built from a basis
/// compatible with `v₀` and `F`.
pub fn s_basis_type(
    f0: &Filtration,
    mu0: &Rational,
    f: &Filtration,
    t_cut: &Rational,
) -> Result<f64, FiltrationError> {
    if !f0.is_monomial() {
        return Err(FiltrationError::NotMonomial);
    }
    let m = int(f0.m() as i64);
    let mu0 = to_f64(mu0);
    let unit = to_f64(&f0.level.unit_mass());
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for c in compatible_basis(f0, f)? {
        let x = &c.v0 / &m;
        if &x <= t_cut {
            let e = (mu0 - to_f64(&x)).exp() * unit;
            let ord = f.ord(&c.vector).expect("basis vectors are nonzero");
            num.add(e * to_f64(&(ord / &m)));
            den.add(e);
        }
    }
    Ok(num.value() / den.value())
}

/// `λ^{(t)}_max`: largest `y` among atoms of `DH(F₀, F)` with `x ≤ t`.
pub fn lambda_max(
    f0: &Filtration,
    f: &Filtration,
    t_cut: &Rational,
) -> Result<Option<Rational>, FiltrationError> {
    Ok(dh_bivariate(f0, f)?
        .atoms
        .into_iter()
        .filter(|((x, _), _)| x <= t_cut)
        .map(|((_, y), _)| y)
        .max())
}

/// `g(t) = log Σ e^{(1−t)(μ₀−x) + t(μ₁−y)}·mass` over `DH(F₀, F₁)`.
pub fn log_exp_pairing(biv: &BivariateMeasure, mu0: f64, mu1: f64, t: f64) -> f64 {
    log_sum_exp(biv.atoms.iter().map(|((x, y), w)| {
        (
            (1.0 - t) * (mu0 - to_f64(x)) + t * (mu1 - to_f64(y)),
            to_f64(w),
        )
    }))
}

/// Result of the multiplicativity spot check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativityReport {
    pub checked: usize,
    pub violations: usize,
}

fn product(
    a: &[Rational],
    pa: &[Vec<i64>],
    b: &[Rational],
    pb: &[Vec<i64>],
    target: &GradedLevel,
) -> Option<Vec<Rational>> {
    let mut out = vec![Rational::zero(); target.dim()];
    for (ca, xa) in a.iter().zip(pa) {
        if ca.is_zero() {
            continue;
        }
        for (cb, xb) in b.iter().zip(pb) {
            if cb.is_zero() {
                continue;
            }
            let sum: Vec<i64> = xa.iter().zip(xb).map(|(u, v)| u + v).collect();
            let k = target.points.binary_search(&sum).ok()?;
            out[k] += ca * cb;
        }
    }
    Some(out)
}

/// Checks `F^λ_a · F^μ_b ⊆ F^{λ+μ}_{a+b}` on random elements of the jump
/// subspaces; the product of basis vectors is the product of monomials.
///
/// With `strict`, the first violation is an error; otherwise violations are
/// counted.
pub fn multiplicativity_spot_check(
    fa: &Filtration,
    fb: &Filtration,
    fab: &Filtration,
    samples: usize,
    seed: u64,
    strict: bool,
) -> Result<MultiplicativityReport, FiltrationError> {
    if fab.m() != fa.m() + fb.m() {
        return Err(FiltrationError::LevelMismatch);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let ja = fa.jump_values();
    let jb = fb.jump_values();
    let mut report = MultiplicativityReport {
        checked: 0,
        violations: 0,
    };
    if ja.is_empty() || jb.is_empty() {
        return Ok(report);
    }
    let random_element = |rng: &mut ChaCha20Rng, sub: &Matrix, dim: usize| -> Vec<Rational> {
        let mut v = vec![Rational::zero(); dim];
        for row in sub {
            let c = int(rng.gen_range(-3..=3));
            for (x, y) in v.iter_mut().zip(row) {
                *x += &c * y;
            }
        }
        v
    };
    for _ in 0..samples {
        let la = &ja[rng.gen_range(0..ja.len())];
        let lb = &jb[rng.gen_range(0..jb.len())];
        let x = random_element(&mut rng, &fa.subspace(la), fa.dim());
        let y = random_element(&mut rng, &fb.subspace(lb), fb.dim());
        let Some(p) = product(&x, &fa.level.points, &y, &fb.level.points, &fab.level) else {
            // product leaves the truncated level
            continue;
        };
        report.checked += 1;
        if !fab.contains(&p, &(la + lb)) {
            report.violations += 1;
            if strict {
                return Err(FiltrationError::Multiplicativity(format!(
                    "product of elements at {la} and {lb} is not in F^{}",
                    la + lb
                )));
            }
        }
    }
    Ok(report)
}

/// Number of basis points with value `< bound`, as an exact count.
pub fn count_below(f: &Filtration, bound: &Rational) -> usize {
    successive_minima(f)
        .into_iter()
        .filter(|(l, _)| l < bound)
        .map(|(_, k)| k)
        .sum()
}

/// Random nested flag on a level, for tests and property checks.
pub fn random_flag(level: Arc<GradedLevel>, jumps: usize, seed: u64) -> Filtration {
    let dim = level.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let basis: Matrix = loop {
        let b: Matrix = (0..dim)
            .map(|_| (0..dim).map(|_| int(rng.gen_range(-2..=2))).collect())
            .collect();
        if linalg::rank(&b, dim) == dim {
            break b;
        }
    };
    let jumps = jumps.clamp(1, dim.max(1));
    let mut cuts: Vec<usize> = (1..dim).collect();
    for i in (1..cuts.len()).rev() {
        cuts.swap(i, rng.gen_range(0..=i));
    }
    let mut cuts: Vec<usize> = cuts.into_iter().take(jumps - 1).collect();
    cuts.sort_unstable();
    let mut starts = vec![0];
    starts.extend(cuts);
    let mut lambda = int(rng.gen_range(0..3));
    let mut out = Vec::new();
    for s in starts {
        out.push((lambda.clone(), basis[s..].to_vec()));
        lambda += Rational::new(
            BigInt::from(rng.gen_range(1..6)),
            BigInt::from(rng.gen_range(1..4)),
        );
    }
    Filtration::flag(level, out).expect("random flag is valid")
}
