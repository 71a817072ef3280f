//! Rational convex polyhedra: double description, recession cones, placing
//! triangulations into generalized simplices, exact volumes and lattice points.
//!
//! A polyhedron `P ⊂ ℚⁿ` is handled through its homogenization, the cone
//! `{(α, s) : ⟨α, u⟩ + a·s ≥ 0, s ≥ 0}` in `ℚⁿ⁺¹`. Generators with `s > 0` are
//! vertices, generators with `s = 0` are recession rays.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg;
use crate::rational::{denominator_lcm, dot, factorial, primitive, Rational, RationalVector};

/// Largest ambient dimension accepted.
pub const MAX_DIM: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyhedronError {
    #[error("the halfspaces have empty intersection")]
    InfeasibleSystem,
    #[error("ambient dimension {0} is not supported (1 ≤ n ≤ 6)")]
    UnsupportedDimension(usize),
    #[error("polyhedron contains a line (lineality dimension {0})")]
    Lineality(usize),
    #[error("polyhedron is not full-dimensional (affine dimension {affine} in ambient {ambient})")]
    DegenerateInput { affine: usize, ambient: usize },
    #[error("polyhedron is unbounded")]
    UnboundedPolyhedron,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("halfspace normal is zero")]
    ZeroNormal,
}

/// The set `{α : ⟨α, normal⟩ + offset ≥ 0}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub normal: RationalVector,
    pub offset: Rational,
}

impl Halfspace {
    pub fn new(normal: RationalVector, offset: Rational) -> Result<Self, PolyhedronError> {
        if normal.is_zero() {
            return Err(PolyhedronError::ZeroNormal);
        }
        Ok(Self { normal, offset })
    }

    pub fn from_ints(normal: &[i64], offset: Rational) -> Self {
        Self::new(RationalVector::from_ints(normal), offset).expect("nonzero normal")
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// `⟨α, normal⟩ + offset`.
    pub fn eval(&self, alpha: &[Rational]) -> Rational {
        dot(alpha, self.normal.as_slice()) + &self.offset
    }

    pub fn contains(&self, alpha: &[Rational]) -> bool {
        !self.eval(alpha).is_negative()
    }

    fn homogenized(&self) -> Vec<Rational> {
        let mut h = self.normal.as_slice().to_vec();
        h.push(self.offset.clone());
        h
    }

    /// Representative with primitive integer data, used to detect duplicates.
    fn canonical(&self) -> Vec<Rational> {
        primitive(&self.homogenized())
    }
}

/// Rational polyhedron in both representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyhedron {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    vertices: Vec<RationalVector>,
    rays: Vec<RationalVector>,
}

/// Cell `conv(apexes) + cone(rays)` of a triangulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedSimplex {
    pub apexes: Vec<RationalVector>,
    pub rays: Vec<RationalVector>,
    /// `|det|` of the homogeneous generator matrix: `(v, 1)` for apexes, `(r, 0)` for rays.
    pub jacobian: Rational,
}

impl GeneralizedSimplex {
    pub fn contains(&self, x: &[Rational]) -> bool {
        // solve x = Σλ_i v_i + Σμ_l r_l with Σλ = 1, check λ, μ ≥ 0
        let n = x.len();
        let gens: Vec<Vec<Rational>> = self
            .apexes
            .iter()
            .map(|v| homogenize(v.as_slice(), Rational::one()))
            .chain(
                self.rays
                    .iter()
                    .map(|r| homogenize(r.as_slice(), Rational::zero())),
            )
            .collect();
        let mut system: Vec<Vec<Rational>> = (0..=n)
            .map(|c| gens.iter().map(|g| g[c].clone()).collect())
            .collect();
        let target = homogenize(x, Rational::one());
        for (row, t) in system.iter_mut().zip(target) {
            row.push(t);
        }
        let (r, pivots) = linalg::rref(&system, n + 2);
        if pivots.contains(&(n + 1)) {
            return false;
        }
        r.iter().all(|row| !row[n + 1].is_negative())
    }
}

/// Generators of `{x : ⟨c, x⟩ ≥ 0 for every constraint c}` in `ℚ^d`.
#[derive(Clone, Debug, Default)]
pub(crate) struct ConeGenerators {
    pub rays: Vec<Vec<Rational>>,
    pub lineality: Vec<Vec<Rational>>,
}

/// Incremental double description. Constraints are inserted in the given order;
/// extreme-ray adjacency uses the combinatorial test.
pub(crate) fn cone_generators(constraints: &[Vec<Rational>], d: usize) -> ConeGenerators {
    let mut lineality: Vec<Vec<Rational>> = (0..d)
        .map(|i| RationalVector::unit(d, i).into_inner())
        .collect();
    let mut rays: Vec<Vec<Rational>> = Vec::new();
    let mut processed: Vec<&[Rational]> = Vec::new();

    for c in constraints {
        if c.iter().all(Zero::is_zero) {
            continue;
        }
        if let Some(k) = lineality.iter().position(|l| !dot(c, l).is_zero()) {
            let mut l0 = lineality.remove(k);
            let mut s = dot(c, &l0);
            if s.is_negative() {
                l0.iter_mut().for_each(|x| *x = -x.clone());
                s = -s;
            }
            for v in lineality.iter_mut().chain(rays.iter_mut()) {
                let t = dot(c, v);
                if !t.is_zero() {
                    let f = t / &s;
                    for (x, y) in v.iter_mut().zip(&l0) {
                        *x -= &f * y;
                    }
                    *v = primitive(v);
                }
            }
            rays.push(primitive(&l0));
            processed.push(c);
            continue;
        }

        let vals: Vec<Rational> = rays.iter().map(|r| dot(c, r)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            processed.push(c);
            continue;
        }
        let tight: Vec<FixedBitSet> = rays
            .iter()
            .map(|r| {
                let mut z = FixedBitSet::with_capacity(processed.len());
                for (i, p) in processed.iter().enumerate() {
                    if dot(p, r).is_zero() {
                        z.insert(i);
                    }
                }
                z
            })
            .collect();
        let needed = d.saturating_sub(lineality.len() + 2);
        let mut next: Vec<Vec<Rational>> = Vec::new();
        for (i, r) in rays.iter().enumerate() {
            if !vals[i].is_negative() {
                next.push(r.clone());
            }
        }
        for p in (0..rays.len()).filter(|&i| vals[i].is_positive()) {
            for q in (0..rays.len()).filter(|&i| vals[i].is_negative()) {
                let mut common = tight[p].clone();
                common.intersect_with(&tight[q]);
                if common.count_ones(..) < needed {
                    continue;
                }
                let dominated =
                    (0..rays.len()).any(|o| o != p && o != q && common.is_subset(&tight[o]));
                if dominated {
                    continue;
                }
                let v: Vec<Rational> = rays[q]
                    .iter()
                    .zip(&rays[p])
                    .map(|(rq, rp)| &vals[p] * rq - &vals[q] * rp)
                    .collect();
                next.push(primitive(&v));
            }
        }
        rays = next;
        processed.push(c);
    }
    ConeGenerators { rays, lineality }
}

fn homogenize(x: &[Rational], last: Rational) -> Vec<Rational> {
    let mut v = x.to_vec();
    v.push(last);
    v
}

fn check_dim(n: usize) -> Result<(), PolyhedronError> {
    if n == 0 || n > MAX_DIM {
        Err(PolyhedronError::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

/// Vertex/ray description of `⋂ halfspaces`; only irredundant halfspaces are kept.
pub fn dual_description(halfspaces: &[Halfspace]) -> Result<Polyhedron, PolyhedronError> {
    let n = halfspaces.first().map(Halfspace::dim).unwrap_or(0);
    check_dim(n)?;
    for h in halfspaces {
        if h.dim() != n {
            return Err(PolyhedronError::DimensionMismatch {
                expected: n,
                got: h.dim(),
            });
        }
        if h.normal.is_zero() {
            return Err(PolyhedronError::ZeroNormal);
        }
    }
    let mut sorted: Vec<Vec<Rational>> = halfspaces.iter().map(Halfspace::homogenized).collect();
    sorted.sort();
    let mut constraints = vec![RationalVector::unit(n + 1, n).into_inner()];
    constraints.extend(sorted);
    let gens = cone_generators(&constraints, n + 1);

    let mut vertices = Vec::new();
    let mut rays = Vec::new();
    for g in gens.rays {
        let s = g[n].clone();
        if s.is_positive() {
            vertices.push(RationalVector::new(g[..n].iter().map(|x| x / &s).collect()));
        } else {
            rays.push(RationalVector::new(primitive(&g[..n])));
        }
    }
    if vertices.is_empty() {
        return Err(PolyhedronError::InfeasibleSystem);
    }
    if !gens.lineality.is_empty() {
        return Err(PolyhedronError::Lineality(gens.lineality.len()));
    }
    vertices.sort();
    vertices.dedup();
    rays.sort();
    rays.dedup();

    let mut p = Polyhedron {
        dim: n,
        halfspaces: Vec::new(),
        vertices,
        rays,
    };
    let affine = p.affine_dim();
    let mut seen = std::collections::HashSet::new();
    let mut kept = Vec::new();
    for h in halfspaces {
        if p.tight_rank(h) == affine && !p.is_implicit_equality(h) && seen.insert(h.canonical()) {
            kept.push(h.clone());
        }
    }
    if affine < n {
        // equalities are not facets but still cut out the affine hull
        for h in halfspaces {
            if p.is_implicit_equality(h) && seen.insert(h.canonical()) {
                kept.push(h.clone());
            }
        }
    }
    p.halfspaces = kept;
    Ok(p)
}

impl Polyhedron {
    /// H-representation of `conv(vertices) + cone(rays)`.
    pub fn from_generators(
        vertices: &[RationalVector],
        rays: &[RationalVector],
    ) -> Result<Polyhedron, PolyhedronError> {
        let n = vertices.first().map(RationalVector::dim).unwrap_or(0);
        if vertices.is_empty() {
            return Err(PolyhedronError::InfeasibleSystem);
        }
        check_dim(n)?;
        for v in vertices.iter().chain(rays) {
            if v.dim() != n {
                return Err(PolyhedronError::DimensionMismatch {
                    expected: n,
                    got: v.dim(),
                });
            }
        }
        let mut gens: Vec<Vec<Rational>> = vertices
            .iter()
            .map(|v| homogenize(v.as_slice(), Rational::one()))
            .chain(
                rays.iter()
                    .map(|r| homogenize(r.as_slice(), Rational::zero())),
            )
            .collect();
        gens.sort();
        let dual = cone_generators(&gens, n + 1);
        let mut hs = Vec::new();
        let mut push = |y: &[Rational]| {
            let normal = RationalVector::new(y[..n].to_vec());
            if !normal.is_zero() {
                hs.push(Halfspace {
                    normal,
                    offset: y[n].clone(),
                });
            }
        };
        for y in &dual.rays {
            push(y);
        }
        for l in &dual.lineality {
            push(l);
            let neg: Vec<Rational> = l.iter().map(|x| -x.clone()).collect();
            push(&neg);
        }
        if hs.is_empty() {
            // only possible for the whole space, which has lineality
            return Err(PolyhedronError::Lineality(n));
        }
        dual_description(&hs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[RationalVector] {
        &self.vertices
    }

    pub fn rays(&self) -> &[RationalVector] {
        &self.rays
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty()
    }

    fn homogeneous_generators(&self) -> Vec<Vec<Rational>> {
        self.vertices
            .iter()
            .map(|v| homogenize(v.as_slice(), Rational::one()))
            .chain(
                self.rays
                    .iter()
                    .map(|r| homogenize(r.as_slice(), Rational::zero())),
            )
            .collect()
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        linalg::rank(&self.homogeneous_generators(), self.dim + 1) - 1
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim() == self.dim
    }

    fn tight_rank(&self, h: &Halfspace) -> usize {
        let tight: Vec<Vec<Rational>> = self
            .homogeneous_generators()
            .into_iter()
            .filter(|g| dot(g, &h.homogenized()).is_zero())
            .collect();
        linalg::rank(&tight, self.dim + 1)
    }

    fn is_implicit_equality(&self, h: &Halfspace) -> bool {
        let hh = h.homogenized();
        self.homogeneous_generators()
            .iter()
            .all(|g| dot(g, &hh).is_zero())
    }

    /// Whether `h` is valid on `P` and supports a facet.
    pub fn is_facet(&self, h: &Halfspace) -> bool {
        let hh = h.homogenized();
        let valid = self
            .homogeneous_generators()
            .iter()
            .all(|g| !dot(g, &hh).is_negative());
        valid && !self.is_implicit_equality(h) && self.tight_rank(h) == self.affine_dim()
    }

    pub fn contains(&self, alpha: &[Rational]) -> bool {
        self.halfspaces.iter().all(|h| h.contains(alpha))
    }

    pub fn contains_f64(&self, alpha: &[f64], slack: f64) -> bool {
        self.halfspaces
            .iter()
            .all(|h| h.normal.dot_f64(alpha) + crate::rational::to_f64(&h.offset) >= -slack)
    }

    /// Strict interior membership (for full-dimensional `P`).
    pub fn contains_in_interior(&self, alpha: &[Rational]) -> bool {
        self.halfspaces.iter().all(|h| h.eval(alpha).is_positive())
    }

    /// `P ∩ extra`.
    pub fn intersect(&self, extra: &[Halfspace]) -> Result<Polyhedron, PolyhedronError> {
        let mut hs = self.halfspaces.clone();
        hs.extend_from_slice(extra);
        dual_description(&hs)
    }

    pub fn translate(&self, v: &RationalVector) -> Polyhedron {
        Polyhedron {
            dim: self.dim,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace {
                    normal: h.normal.clone(),
                    offset: &h.offset - h.normal.dot(v),
                })
                .collect(),
            vertices: self.vertices.iter().map(|x| x + v).collect(),
            rays: self.rays.clone(),
        }
    }

    /// `c·P` for `c > 0`.
    pub fn dilate(&self, c: &Rational) -> Polyhedron {
        assert!(c.is_positive(), "dilation factor must be positive");
        Polyhedron {
            dim: self.dim,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace {
                    normal: h.normal.clone(),
                    offset: &h.offset * c,
                })
                .collect(),
            vertices: self.vertices.iter().map(|x| x.scale(c)).collect(),
            rays: self.rays.clone(),
        }
    }

    /// Exact `min_P ⟨α, ξ⟩`, or `None` when it is `−∞`.
    pub fn min_linear(&self, xi: &RationalVector) -> Option<Rational> {
        if self.rays.iter().any(|r| r.dot(xi).is_negative()) {
            return None;
        }
        self.vertices.iter().map(|v| v.dot(xi)).min()
    }

    /// Lexicographically smallest vertex attaining `min_P ⟨α, ξ⟩`.
    pub fn argmin_vertex(&self, xi: &RationalVector) -> Option<&RationalVector> {
        let m = self.min_linear(xi)?;
        self.vertices.iter().find(|v| v.dot(xi) == m)
    }
}

/// Cone with apex 0 spanned by the rays of `P`.
pub fn recession_cone(p: &Polyhedron) -> Polyhedron {
    let mut seen = std::collections::HashSet::new();
    let halfspaces = p
        .halfspaces
        .iter()
        .map(|h| Halfspace {
            normal: h.normal.clone(),
            offset: Rational::zero(),
        })
        .filter(|h| seen.insert(h.canonical()))
        .collect();
    Polyhedron {
        dim: p.dim,
        halfspaces,
        vertices: vec![RationalVector::zeros(p.dim)],
        rays: p.rays.clone(),
    }
}

/// Placing triangulation of the homogenized generators, vertices before rays,
/// each group in lexicographic order.
pub fn triangulate(p: &Polyhedron) -> Result<Vec<GeneralizedSimplex>, PolyhedronError> {
    let n = p.dim;
    let affine = p.affine_dim();
    if affine != n {
        return Err(PolyhedronError::DegenerateInput { affine, ambient: n });
    }
    let gens = p.homogeneous_generators();

    // initial cell: greedy full-rank prefix
    let mut first: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        basis.push(g.clone());
        if linalg::rank(&basis, n + 1) == basis.len() {
            first.push(i);
            if first.len() == n + 1 {
                break;
            }
        } else {
            basis.pop();
        }
    }
    let mut cells: Vec<Vec<usize>> = vec![first.clone()];

    for (gi, g) in gens.iter().enumerate() {
        if first.contains(&gi) {
            continue;
        }
        let mut facets: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (ci, cell) in cells.iter().enumerate() {
            for drop in 0..cell.len() {
                let mut f: Vec<usize> = cell.clone();
                let opposite = f.remove(drop);
                f.sort_unstable();
                facets.entry(f).or_default().push((ci, opposite));
            }
        }
        let mut boundary: Vec<(Vec<usize>, usize)> = facets
            .into_iter()
            .filter(|(_, owners)| owners.len() == 1)
            .map(|(f, owners)| (f, owners[0].1))
            .collect();
        boundary.sort();
        let mut added = Vec::new();
        for (f, opposite) in boundary {
            let rows: Vec<Vec<Rational>> = f.iter().map(|&i| gens[i].clone()).collect();
            let mut normal = linalg::kernel(&rows, n + 1)
                .pop()
                .expect("facet spans a hyperplane");
            if dot(&normal, &gens[opposite]).is_negative() {
                normal.iter_mut().for_each(|x| *x = -x.clone());
            }
            if dot(&normal, g).is_negative() {
                let mut cell = f.clone();
                cell.push(gi);
                added.push(cell);
            }
        }
        cells.extend(added);
    }

    Ok(cells
        .into_iter()
        .map(|cell| {
            let rows: Vec<Vec<Rational>> = cell.iter().map(|&i| gens[i].clone()).collect();
            let jacobian = linalg::determinant(&rows).abs();
            let mut apexes = Vec::new();
            let mut rays = Vec::new();
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            for i in sorted {
                if i < p.vertices.len() {
                    apexes.push(p.vertices[i].clone());
                } else {
                    rays.push(p.rays[i - p.vertices.len()].clone());
                }
            }
            GeneralizedSimplex {
                apexes,
                rays,
                jacobian,
            }
        })
        .collect())
}

/// Exact Euclidean volume of a bounded full-dimensional polyhedron.
pub fn volume(p: &Polyhedron) -> Result<Rational, PolyhedronError> {
    if !p.is_bounded() {
        return Err(PolyhedronError::UnboundedPolyhedron);
    }
    let cells = triangulate(p)?;
    let total = cells
        .iter()
        .fold(Rational::zero(), |acc, c| acc + &c.jacobian);
    Ok(total / Rational::from_integer(BigInt::from(factorial(p.dim))))
}

/// `vol_{k}` of a polytope whose affine hull has dimension `k`, measured in the
/// coordinates obtained by dropping `n − k` coordinates with a unimodular-free
/// projection. Callers divide by the projection factor themselves.
pub fn projected_volume(p: &Polyhedron, keep: &[usize]) -> Result<Rational, PolyhedronError> {
    if keep.is_empty() {
        return Ok(Rational::one());
    }
    let verts: Vec<RationalVector> = p
        .vertices
        .iter()
        .map(|v| RationalVector::new(keep.iter().map(|&i| v[i].clone()).collect()))
        .collect();
    let q = Polyhedron::from_generators(&verts, &[])?;
    if !q.is_full_dimensional() {
        return Ok(Rational::zero());
    }
    volume(&q)
}

/// Integer points of `m·P` in lexicographic order.
pub fn lattice_points(p: &Polyhedron, m: u64) -> Result<Vec<RationalVector>, PolyhedronError> {
    Ok(lattice_points_i64(p, m)?
        .into_iter()
        .map(|x| RationalVector::from_ints(&x))
        .collect())
}

/// As [`lattice_points`], with machine-integer coordinates.
pub fn lattice_points_i64(p: &Polyhedron, m: u64) -> Result<Vec<Vec<i64>>, PolyhedronError> {
    if !p.is_bounded() {
        return Err(PolyhedronError::UnboundedPolyhedron);
    }
    assert!(m >= 1, "scale must be positive");
    let n = p.dim;
    let mq = Rational::from_integer(BigInt::from(m));
    let mut lo = vec![i64::MAX; n];
    let mut hi = vec![i64::MIN; n];
    for v in &p.vertices {
        for i in 0..n {
            let x = &v[i] * &mq;
            lo[i] = lo[i].min(
                x.ceil()
                    .to_integer()
                    .to_i64()
                    .expect("coordinate fits in i64"),
            );
            hi[i] = hi[i].max(
                x.floor()
                    .to_integer()
                    .to_i64()
                    .expect("coordinate fits in i64"),
            );
        }
    }
    // integer rows: ⟨β, c⟩ + d ≥ 0
    let rows: Vec<(Vec<i128>, i128)> = p
        .halfspaces
        .iter()
        .map(|h| {
            let mut all: Vec<Rational> = h.normal.as_slice().to_vec();
            all.push(&h.offset * &mq);
            let l = Rational::from_integer(denominator_lcm(all.iter()));
            let ints: Vec<i128> = all
                .iter()
                .map(|x| {
                    (x * &l)
                        .to_integer()
                        .to_i128()
                        .expect("halfspace data fits in i128")
                })
                .collect();
            (ints[..n].to_vec(), ints[n])
        })
        .collect();
    let mut out = Vec::new();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Ok(out);
    }
    let mut cur = lo.clone();
    loop {
        let inside = rows.iter().all(|(c, d)| {
            c.iter()
                .zip(&cur)
                .map(|(a, &b)| a * b as i128)
                .sum::<i128>()
                + d
                >= 0
        });
        if inside {
            out.push(cur.clone());
        }
        // odometer, last coordinate fastest: lexicographic order
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                for j in k + 1..n {
                    cur[j] = lo[j];
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn hs(normal: &[i64], offset: i64) -> Halfspace {
        Halfspace::from_ints(normal, int(offset))
    }

    fn pts(v: &[RationalVector]) -> Vec<Vec<i64>> {
        v.iter().map(|x| x.to_i64s().unwrap()).collect()
    }

    fn square() -> Polyhedron {
        dual_description(&[
            hs(&[1, 0], 0),
            hs(&[0, 1], 0),
            hs(&[-1, 0], 1),
            hs(&[0, -1], 1),
        ])
        .unwrap()
    }

    fn p2() -> Polyhedron {
        dual_description(&[hs(&[1, 0], 1), hs(&[0, 1], 1), hs(&[-1, -1], 1)]).unwrap()
    }

    #[test]
    fn unit_square_vertices() {
        let p = square();
        assert_eq!(
            pts(p.vertices()),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert!(p.rays().is_empty());
        assert_eq!(p.halfspaces().len(), 4);
    }

    #[test]
    fn orthant() {
        let p =
            dual_description(&[hs(&[1, 0, 0], 0), hs(&[0, 1, 0], 0), hs(&[0, 0, 1], 0)]).unwrap();
        assert_eq!(pts(p.vertices()), vec![vec![0, 0, 0]]);
        assert_eq!(
            pts(p.rays()),
            vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]
        );
    }

    #[test]
    fn segment() {
        let p = dual_description(&[hs(&[1], 1), hs(&[-1], 1)]).unwrap();
        assert_eq!(pts(p.vertices()), vec![vec![-1], vec![1]]);
        assert_eq!(volume(&p).unwrap(), int(2));
        assert_eq!(recession_cone(&p).rays().len(), 0);
    }

    #[test]
    fn errors_are_distinct() {
        let empty = dual_description(&[hs(&[1], -2), hs(&[-1], 1)]);
        assert_eq!(empty, Err(PolyhedronError::InfeasibleSystem));
        let big = dual_description(&[hs(&[1, 0, 0, 0, 0, 0, 0], 1)]);
        assert_eq!(big, Err(PolyhedronError::UnsupportedDimension(7)));
        let slab = dual_description(&[hs(&[1, 0], 1), hs(&[-1, 0], 1)]);
        assert_eq!(slab, Err(PolyhedronError::Lineality(1)));
        let ray = dual_description(&[hs(&[1], 1)]).unwrap();
        assert_eq!(volume(&ray), Err(PolyhedronError::UnboundedPolyhedron));
    }

    #[test]
    fn redundant_halfspaces_dropped() {
        let p = dual_description(&[
            hs(&[1, 0], 0),
            hs(&[0, 1], 0),
            hs(&[-1, 0], 1),
            hs(&[0, -1], 1),
            hs(&[-1, -1], 5),
            hs(&[2, 0], 0),
        ])
        .unwrap();
        assert_eq!(p.halfspaces().len(), 4);
        assert!(!p.is_facet(&hs(&[-1, -1], 5)));
        assert!(p.is_facet(&hs(&[-1, 0], 1)));
    }

    #[test]
    fn recession_cones() {
        let shifted = dual_description(&[hs(&[1, 0], 1), hs(&[0, 1], 1)]).unwrap();
        assert_eq!(
            pts(recession_cone(&shifted).rays()),
            vec![vec![0, 1], vec![1, 0]]
        );
        // x ≥ −1, −1 ≤ y ≤ 1, y ≥ x − 1 is a bounded quadrilateral
        let quad = dual_description(&[
            hs(&[1, 0], 1),
            hs(&[0, 1], 1),
            hs(&[0, -1], 1),
            hs(&[-1, 1], 1),
        ])
        .unwrap();
        assert!(recession_cone(&quad).rays().is_empty());
        // dropping the upper bound on y leaves the ray (1, 1)
        let open = dual_description(&[hs(&[1, 0], 1), hs(&[0, 1], 1), hs(&[-1, 1], 1)]).unwrap();
        assert_eq!(
            pts(recession_cone(&open).rays()),
            vec![vec![0, 1], vec![1, 1]]
        );
    }

    #[test]
    fn triangulations() {
        let sq = triangulate(&square()).unwrap();
        assert_eq!(sq.len(), 2);
        assert_eq!(
            sq.iter().fold(Rational::zero(), |a, c| a + &c.jacobian),
            int(2)
        );
        assert_eq!(volume(&square()).unwrap(), int(1));

        let tri = triangulate(&p2()).unwrap();
        assert_eq!(tri.len(), 1);
        assert_eq!(volume(&p2()).unwrap(), rat(9, 2));

        let orth = dual_description(&[hs(&[1, 0], 1), hs(&[0, 1], 1)]).unwrap();
        let cells = triangulate(&orth).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(pts(&cells[0].apexes), vec![vec![-1, -1]]);
        assert_eq!(pts(&cells[0].rays), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(cells[0].jacobian, int(1));
    }

    #[test]
    fn degenerate_triangulation_rejected() {
        let seg = Polyhedron::from_generators(
            &[
                RationalVector::from_ints(&[0, 0]),
                RationalVector::from_ints(&[1, 1]),
            ],
            &[],
        )
        .unwrap();
        assert_eq!(seg.affine_dim(), 1);
        assert!(matches!(
            triangulate(&seg),
            Err(PolyhedronError::DegenerateInput { .. })
        ));
    }

    #[test]
    fn lattice_point_counts() {
        let seg = dual_description(&[hs(&[1], 1), hs(&[-1], 1)]).unwrap();
        assert_eq!(
            pts(&lattice_points(&seg, 3).unwrap()),
            (-3..=3).map(|x| vec![x]).collect::<Vec<_>>()
        );
        assert_eq!(lattice_points(&p2(), 1).unwrap().len(), 10);
        let sq = lattice_points(&square(), 2).unwrap();
        assert_eq!(sq.len(), 9);
        assert!(sq.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn generators_round_trip() {
        let p = p2();
        let q = Polyhedron::from_generators(p.vertices(), p.rays()).unwrap();
        assert_eq!(q.vertices(), p.vertices());
        assert_eq!(q.halfspaces().len(), 3);
        for h in p.halfspaces() {
            assert!(q.is_facet(h));
        }
    }

    #[test]
    fn cells_contain_their_barycenters() {
        let p = dual_description(&[
            hs(&[1, 0], 1),
            hs(&[0, 1], 1),
            hs(&[-1, 1], 1),
            hs(&[0, -1], 1),
        ])
        .unwrap();
        let cells = triangulate(&p).unwrap();
        for c in &cells {
            let k = c.apexes.len() as i64;
            let mut b = RationalVector::zeros(2);
            for a in &c.apexes {
                b = &b + a;
            }
            let b = b.scale(&rat(1, k));
            let inside = cells.iter().filter(|d| d.contains(b.as_slice())).count();
            assert_eq!(inside, 1);
        }
        assert_eq!(volume(&p).unwrap(), int(4));
    }
}
