//! Exponential integrals `∫_P g(α) e^{−⟨α,ξ⟩} dα` over rational polyhedra for
//! `g ∈ {1, ⟨α,η⟩, ⟨α,η₁⟩⟨α,η₂⟩}`.
//!
//! `P` is triangulated once into cells `conv(v_0..v_{k−1}) + cone(r_1..r_j)`.
//! On a cell the integral is `J · exp[−c_0, …, −c_{k−1}] · Π 1/d_l` with
//! `c_i = ⟨v_i, ξ⟩`, `d_l = ⟨r_l, ξ⟩` and `exp[…]` the divided difference of the
//! exponential (Hermite–Genocchi). Moments are derivatives of that closed form
//! in `ξ`, so no quadrature is involved anywhere.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Exp1};
use thiserror::Error;

use crate::polyhedra::{triangulate, Polyhedron, PolyhedronError};
use crate::rational::{factorial, KahanSum, RationalVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("ξ pairs negatively with recession ray {ray:?} (⟨r,ξ⟩ = {pairing})")]
    ReebViolation { ray: Vec<f64>, pairing: f64 },
    #[error("ξ pairs to zero with recession ray {ray:?}; the integral diverges")]
    UnboundedIntegral { ray: Vec<f64> },
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Polyhedron(#[from] PolyhedronError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpIntegralResult {
    pub value: f64,
    pub cells_used: usize,
    /// Cells whose apex values nearly coincide.
    pub confluent_cells: usize,
}

/// Divided difference of `exp` at the given nodes.
///
/// Computed as the corner entry of `exp(B)` for the bidiagonal matrix with the
/// nodes on the diagonal and ones above it, by scaling and squaring. Every
/// intermediate entry is nonnegative, so coincident or clustered nodes need no
/// special treatment.
pub fn exp_divdiff(nodes: &[f64]) -> f64 {
    let d = nodes.len();
    assert!(d >= 1, "at least one node");
    let top = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if d == 1 {
        return top.exp();
    }
    let bottom = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = top - bottom;
    let mut s = 0i32;
    while (spread + 1.0) / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let scale = 2f64.powi(-s);
    let mut b = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        b[(i, i)] = (nodes[i] - top) * scale;
        if i + 1 < d {
            b[(i, i + 1)] = scale;
        }
    }
    // Taylor series; ‖B‖ ≤ 1/2 so 24 terms reach machine precision
    let mut e = DMatrix::<f64>::identity(d, d);
    let mut term = DMatrix::<f64>::identity(d, d);
    for k in 1..=24 {
        term = &term * &b / k as f64;
        e += &term;
    }
    for _ in 0..s {
        e = &e * &e;
    }
    e[(0, d - 1)] * top.exp()
}

#[derive(Clone, Debug)]
struct Cell {
    apexes: Vec<Vec<f64>>,
    rays: Vec<Vec<f64>>,
    jacobian: f64,
}

/// Exponential moments at one `ξ`. Values are stored relative to `e^{shift}`
/// to keep large exponents representable.
#[derive(Clone, Debug)]
pub struct Moments {
    pub shift: f64,
    /// `e^{−shift} ∫ e^{−⟨α,ξ⟩}`.
    pub value_scaled: f64,
    /// `e^{−shift} ∫ α_a e^{−⟨α,ξ⟩}`.
    pub first_scaled: Vec<f64>,
    /// `e^{−shift} ∫ α_a α_b e^{−⟨α,ξ⟩}`.
    pub second_scaled: Vec<Vec<f64>>,
}

impl Moments {
    pub fn value(&self) -> f64 {
        self.value_scaled * self.shift.exp()
    }

    pub fn log_value(&self) -> f64 {
        self.value_scaled.ln() + self.shift
    }

    /// Barycenter of `e^{−⟨α,ξ⟩}dα`.
    pub fn mean(&self) -> Vec<f64> {
        self.first_scaled
            .iter()
            .map(|m| m / self.value_scaled)
            .collect()
    }

    /// Covariance of `e^{−⟨α,ξ⟩}dα`, the Hessian of `log ∫ e^{−⟨α,ξ⟩}`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.first_scaled.len();
        let mean = self.mean();
        DMatrix::from_fn(n, n, |a, b| {
            self.second_scaled[a][b] / self.value_scaled - mean[a] * mean[b]
        })
    }
}

/// Triangulated polyhedron in floating point, ready for repeated integration.
#[derive(Clone, Debug)]
pub struct KernelCells {
    dim: usize,
    cells: Vec<Cell>,
    rays: Vec<Vec<f64>>,
    vertices: Vec<Vec<f64>>,
}

impl KernelCells {
    pub fn new(p: &Polyhedron) -> Result<Self, KernelError> {
        let cells = triangulate(p)?
            .into_iter()
            .map(|c| Cell {
                apexes: c.apexes.iter().map(RationalVector::to_f64).collect(),
                rays: c.rays.iter().map(RationalVector::to_f64).collect(),
                jacobian: crate::rational::to_f64(&c.jacobian),
            })
            .collect();
        Ok(Self {
            dim: p.dim(),
            cells,
            rays: p.rays().iter().map(RationalVector::to_f64).collect(),
            vertices: p.vertices().iter().map(RationalVector::to_f64).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    fn check(&self, xi: &[f64]) -> Result<(), KernelError> {
        if xi.len() != self.dim {
            return Err(KernelError::DimensionMismatch {
                expected: self.dim,
                got: xi.len(),
            });
        }
        for r in &self.rays {
            let d = dot(r, xi);
            if d < 0.0 {
                return Err(KernelError::ReebViolation {
                    ray: r.clone(),
                    pairing: d,
                });
            }
            if d == 0.0 {
                return Err(KernelError::UnboundedIntegral { ray: r.clone() });
            }
        }
        Ok(())
    }

    /// `max_vertices −⟨v, ξ⟩`, the exponent shift used for scaling.
    fn shift(&self, xi: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| -dot(v, xi))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn integral(&self, xi: &[f64]) -> Result<ExpIntegralResult, KernelError> {
        self.check(xi)?;
        let shift = self.shift(xi);
        let mut sum = KahanSum::new();
        let mut confluent = 0;
        for cell in &self.cells {
            let c: Vec<f64> = cell.apexes.iter().map(|v| dot(v, xi)).collect();
            if is_confluent(&c) {
                confluent += 1;
            }
            let x: Vec<f64> = c.iter().map(|ci| -ci - shift).collect();
            let r: f64 = cell.rays.iter().map(|ray| 1.0 / dot(ray, xi)).product();
            sum.add(cell.jacobian * exp_divdiff(&x) * r);
        }
        Ok(ExpIntegralResult {
            value: sum.value() * shift.exp(),
            cells_used: self.cells.len(),
            confluent_cells: confluent,
        })
    }

    /// Zeroth, first and second moments in coordinate directions.
    pub fn moments(&self, xi: &[f64]) -> Result<Moments, KernelError> {
        self.check(xi)?;
        let n = self.dim;
        let shift = self.shift(xi);
        let mut value = KahanSum::new();
        let mut first = vec![KahanSum::new(); n];
        let mut second = vec![vec![KahanSum::new(); n]; n];
        for cell in &self.cells {
            let t = CellTerms::new(cell, xi, shift);
            value.add(cell.jacobian * t.e * t.r);
            let e1: Vec<f64> = (0..n).map(|a| t.e1(&column(&cell.apexes, a))).collect();
            let s1: Vec<f64> = (0..n).map(|a| t.ray_sum(&column(&cell.rays, a))).collect();
            for a in 0..n {
                let r1a = -t.r * s1[a];
                // first moment is the negated derivative
                first[a].add(-cell.jacobian * (e1[a] * t.r + t.e * r1a));
            }
            for a in 0..n {
                let va = column(&cell.apexes, a);
                let ra = column(&cell.rays, a);
                for b in a..n {
                    let vb = column(&cell.apexes, b);
                    let rb = column(&cell.rays, b);
                    let h = t.second(&va, &vb, e1[a], e1[b], s1[a], s1[b], &ra, &rb);
                    second[a][b].add(cell.jacobian * h);
                }
            }
        }
        let second_scaled: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        if a <= b {
                            second[a][b].value()
                        } else {
                            second[b][a].value()
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Moments {
            shift,
            value_scaled: value.value(),
            first_scaled: first.iter().map(KahanSum::value).collect(),
            second_scaled,
        })
    }

    /// `∫ ⟨α,η⟩ e^{−⟨α,ξ⟩} dα`.
    pub fn moment(&self, xi: &[f64], eta: &[f64]) -> Result<f64, KernelError> {
        self.check(xi)?;
        self.check_len(eta)?;
        let shift = self.shift(xi);
        let mut sum = KahanSum::new();
        for cell in &self.cells {
            let t = CellTerms::new(cell, xi, shift);
            let a: Vec<f64> = cell.apexes.iter().map(|v| dot(v, eta)).collect();
            let ra: Vec<f64> = cell.rays.iter().map(|r| dot(r, eta)).collect();
            let e1 = t.e1(&a);
            let r1 = -t.r * t.ray_sum(&ra);
            sum.add(-cell.jacobian * (e1 * t.r + t.e * r1));
        }
        Ok(sum.value() * shift.exp())
    }

    /// `∫ ⟨α,η₁⟩⟨α,η₂⟩ e^{−⟨α,ξ⟩} dα`, bitwise symmetric in `(η₁, η₂)`.
    pub fn hessian_entry(
        &self,
        xi: &[f64],
        eta1: &[f64],
        eta2: &[f64],
    ) -> Result<f64, KernelError> {
        self.check(xi)?;
        self.check_len(eta1)?;
        self.check_len(eta2)?;
        let shift = self.shift(xi);
        let mut sum = KahanSum::new();
        for cell in &self.cells {
            let t = CellTerms::new(cell, xi, shift);
            let a: Vec<f64> = cell.apexes.iter().map(|v| dot(v, eta1)).collect();
            let b: Vec<f64> = cell.apexes.iter().map(|v| dot(v, eta2)).collect();
            let ra: Vec<f64> = cell.rays.iter().map(|r| dot(r, eta1)).collect();
            let rb: Vec<f64> = cell.rays.iter().map(|r| dot(r, eta2)).collect();
            let h = t.second(
                &a,
                &b,
                t.e1(&a),
                t.e1(&b),
                t.ray_sum(&ra),
                t.ray_sum(&rb),
                &ra,
                &rb,
            );
            sum.add(cell.jacobian * h);
        }
        Ok(sum.value() * shift.exp())
    }

    fn check_len(&self, v: &[f64]) -> Result<(), KernelError> {
        if v.len() != self.dim {
            return Err(KernelError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }
}

/// Per-cell divided differences and ray factors at one `ξ`.
struct CellTerms {
    x: Vec<f64>,
    d: Vec<f64>,
    e: f64,
    /// `exp[x ∪ x_i]`
    once: Vec<f64>,
    /// `exp[x ∪ x_i ∪ x_j]` for `i < j`, and `2·exp[x ∪ x_i ∪ x_i]` on the diagonal
    twice: Vec<Vec<f64>>,
    r: f64,
}

impl CellTerms {
    fn new(cell: &Cell, xi: &[f64], shift: f64) -> Self {
        let x: Vec<f64> = cell.apexes.iter().map(|v| -dot(v, xi) - shift).collect();
        let d: Vec<f64> = cell.rays.iter().map(|r| dot(r, xi)).collect();
        let k = x.len();
        let e = exp_divdiff(&x);
        let with = |extra: &[f64]| {
            let mut y = x.clone();
            y.extend_from_slice(extra);
            exp_divdiff(&y)
        };
        let once: Vec<f64> = (0..k).map(|i| with(&[x[i]])).collect();
        let twice: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| match i.cmp(&j) {
                        std::cmp::Ordering::Less => with(&[x[i], x[j]]),
                        std::cmp::Ordering::Equal => 2.0 * with(&[x[i], x[i]]),
                        std::cmp::Ordering::Greater => 0.0,
                    })
                    .collect()
            })
            .collect();
        let r = d.iter().map(|dl| 1.0 / dl).product();
        Self {
            x,
            d,
            e,
            once,
            twice,
            r,
        }
    }

    /// Derivative of `exp[x]` along a direction with apex pairings `a`.
    fn e1(&self, a: &[f64]) -> f64 {
        -a.iter().zip(&self.once).map(|(ai, f)| ai * f).sum::<f64>()
    }

    /// `Σ_l ⟨r_l,η⟩ / d_l`.
    fn ray_sum(&self, ra: &[f64]) -> f64 {
        ra.iter().zip(&self.d).map(|(r, d)| r / d).sum()
    }

    #[allow(clippy::too_many_arguments)]
    fn second(
        &self,
        a: &[f64],
        b: &[f64],
        e1a: f64,
        e1b: f64,
        sa: f64,
        sb: f64,
        ra: &[f64],
        rb: &[f64],
    ) -> f64 {
        let k = self.x.len();
        let mut e2 = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                e2 += (a[i] * b[j] + a[j] * b[i]) * self.twice[i][j];
            }
            e2 += a[i] * b[i] * self.twice[i][i];
        }
        let r1a = -self.r * sa;
        let r1b = -self.r * sb;
        let cross_sq: f64 = ra
            .iter()
            .zip(rb)
            .zip(&self.d)
            .map(|((x, y), d)| x * y / (d * d))
            .sum();
        let r2 = self.r * (sa * sb + cross_sq);
        let mixed = e1a * r1b + e1b * r1a;
        e2 * self.r + mixed + self.e * r2
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn column(rows: &[Vec<f64>], a: usize) -> Vec<f64> {
    rows.iter().map(|r| r[a]).collect()
}

fn is_confluent(c: &[f64]) -> bool {
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            if (c[i] - c[j]).abs() < 1e-8 * (1.0 + c[i].abs()) {
                return true;
            }
        }
    }
    false
}

/// `∫_P e^{−⟨α,ξ⟩} dα`.
pub fn exp_integral(p: &Polyhedron, xi: &[f64]) -> Result<ExpIntegralResult, KernelError> {
    KernelCells::new(p)?.integral(xi)
}

/// `∫_P ⟨α,η⟩ e^{−⟨α,ξ⟩} dα`.
pub fn exp_moment(p: &Polyhedron, xi: &[f64], eta: &[f64]) -> Result<f64, KernelError> {
    KernelCells::new(p)?.moment(xi, eta)
}

/// `∫_P ⟨α,η₁⟩⟨α,η₂⟩ e^{−⟨α,ξ⟩} dα`.
pub fn exp_hessian_entry(
    p: &Polyhedron,
    xi: &[f64],
    eta1: &[f64],
    eta2: &[f64],
) -> Result<f64, KernelError> {
    KernelCells::new(p)?.hessian_entry(xi, eta1, eta2)
}

/// Polynomial factor of the Monte Carlo integrand.
#[derive(Clone, Debug, PartialEq)]
pub enum Integrand {
    Value,
    Moment(Vec<f64>),
    Second(Vec<f64>, Vec<f64>),
}

impl Integrand {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Integrand::Value => 1.0,
            Integrand::Moment(eta) => dot(x, eta),
            Integrand::Second(a, b) => dot(x, a) * dot(x, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
}

/// Monte Carlo estimate of the same integrals, sampling each cell uniformly in
/// its simplex part and exponentially along its rays.
///
/// The generator is ChaCha20 seeded from `seed`, so the stream is fixed across
/// platforms.
pub fn mc_oracle(
    p: &Polyhedron,
    xi: &[f64],
    integrand: &Integrand,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, KernelError> {
    let kc = KernelCells::new(p)?;
    kc.check(xi)?;
    assert!(samples >= 2, "need at least two samples");
    // cell weights ignore the exponential factor: J / ((k−1)! Π d_l)
    let weights: Vec<f64> = kc
        .cells
        .iter()
        .map(|c| {
            let rays: f64 = c.rays.iter().map(|r| dot(r, xi)).product();
            c.jacobian / (factorial(c.apexes.len() - 1) as f64 * rays)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w / total;
        cumulative.push(acc);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut sum = KahanSum::new();
    let mut sum_sq = KahanSum::new();
    let n = kc.dim;
    for _ in 0..samples {
        let u: f64 = rng.gen();
        let ci = cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(kc.cells.len() - 1);
        let cell = &kc.cells[ci];
        let k = cell.apexes.len();
        let mut lambda: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
        let s: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l /= s);
        let mut x = vec![0.0; n];
        let mut exponent = 0.0;
        for (l, v) in lambda.iter().zip(&cell.apexes) {
            for (xi_, vi) in x.iter_mut().zip(v) {
                *xi_ += l * vi;
            }
            exponent += l * dot(v, xi);
        }
        for r in &cell.rays {
            let d = dot(r, xi);
            let mu: f64 = Exp::new(d).expect("positive rate").sample(&mut rng);
            for (xi_, ri) in x.iter_mut().zip(r) {
                *xi_ += mu * ri;
            }
        }
        // J / ((k−1)! Π d_l) cancels against the cell's sampling weight
        let est = integrand.eval(&x) * (-exponent).exp() * total;
        sum.add(est);
        sum_sq.add(est * est);
    }
    let m = samples as f64;
    let mean = sum.value() / m;
    let var = ((sum_sq.value() / m - mean * mean) * m / (m - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        standard_error: (var / m).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::{dual_description, Halfspace};
    use crate::rational::int;
    use approx::assert_relative_eq;

    fn hs(normal: &[i64], offset: i64) -> Halfspace {
        Halfspace::from_ints(normal, int(offset))
    }

    fn segment() -> Polyhedron {
        dual_description(&[hs(&[1], 1), hs(&[-1], 1)]).unwrap()
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

    fn shifted_orthant() -> Polyhedron {
        dual_description(&[hs(&[1, 0], 1), hs(&[0, 1], 1)]).unwrap()
    }

    #[test]
    fn divided_differences_match_closed_forms() {
        assert_relative_eq!(exp_divdiff(&[0.3]), 0.3f64.exp(), max_relative = 1e-15);
        let (a, b) = (-1.2, 0.7);
        assert_relative_eq!(
            exp_divdiff(&[a, b]),
            (b.exp() - a.exp()) / (b - a),
            max_relative = 1e-14
        );
        // confluent: f[x,x,x] = e^x / 2
        assert_relative_eq!(
            exp_divdiff(&[0.4, 0.4, 0.4]),
            0.4f64.exp() / 2.0,
            max_relative = 1e-14
        );
        // nearly coincident nodes stay accurate
        let near = exp_divdiff(&[1.0, 1.0 + 1e-12]);
        assert_relative_eq!(near, 1f64.exp(), max_relative = 1e-11);
        // widely spread nodes: f[0, −50] = (1 − e^{−50}) / 50
        assert_relative_eq!(
            exp_divdiff(&[0.0, -50.0]),
            (1.0 - (-50f64).exp()) / 50.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn integral_examples() {
        let e = 1f64.exp();
        let seg = exp_integral(&segment(), &[1.0]).unwrap();
        assert_relative_eq!(seg.value, e - 1.0 / e, max_relative = 1e-12);
        assert_relative_eq!(
            exp_integral(&square(), &[0.0, 0.0]).unwrap().value,
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            exp_integral(&shifted_orthant(), &[1.0, 1.0]).unwrap().value,
            e * e,
            max_relative = 1e-12
        );
    }

    #[test]
    fn moment_examples() {
        assert!(exp_moment(&segment(), &[0.0], &[1.0]).unwrap().abs() < 1e-15);
        let e = 1f64.exp();
        assert_relative_eq!(
            exp_moment(&segment(), &[1.0], &[1.0]).unwrap(),
            -2.0 / e,
            max_relative = 1e-12
        );
        assert!(
            exp_moment(&shifted_orthant(), &[1.0, 1.0], &[1.0, 0.0])
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn hessian_examples() {
        assert_relative_eq!(
            exp_hessian_entry(&segment(), &[0.0], &[1.0], &[1.0]).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            exp_hessian_entry(&square(), &[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            0.25,
            max_relative = 1e-13
        );
        let kc = KernelCells::new(&square()).unwrap();
        let (a, b, xi) = ([0.3, -1.1], [2.0, 0.7], [0.4, -0.9]);
        assert_eq!(
            kc.hessian_entry(&xi, &a, &b).unwrap(),
            kc.hessian_entry(&xi, &b, &a).unwrap()
        );
    }

    #[test]
    fn reeb_errors() {
        let p = shifted_orthant();
        assert!(matches!(
            exp_integral(&p, &[1.0, -1.0]),
            Err(KernelError::ReebViolation { .. })
        ));
        assert!(matches!(
            exp_integral(&p, &[1.0, 0.0]),
            Err(KernelError::UnboundedIntegral { .. })
        ));
    }

    #[test]
    fn moments_agree_with_directional_forms() {
        let kc = KernelCells::new(&shifted_orthant()).unwrap();
        let xi = [0.7, 1.9];
        let m = kc.moments(&xi).unwrap();
        assert_relative_eq!(
            m.value(),
            kc.integral(&xi).unwrap().value,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            m.first_scaled[1] * m.shift.exp(),
            kc.moment(&xi, &[0.0, 1.0]).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            m.second_scaled[0][1] * m.shift.exp(),
            kc.hessian_entry(&xi, &[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            max_relative = 1e-12
        );
        // product measure: covariance is diagonal with entries 1/ξ_i²
        let cov = m.covariance();
        assert_relative_eq!(cov[(0, 0)], 1.0 / (0.7 * 0.7), max_relative = 1e-10);
        assert!(cov[(0, 1)].abs() < 1e-10);
    }

    #[test]
    fn mc_is_seed_repeatable_and_close() {
        let seg = segment();
        let a = mc_oracle(&seg, &[1.0], &Integrand::Value, 20_000, 7).unwrap();
        let b = mc_oracle(&seg, &[1.0], &Integrand::Value, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let e = 1f64.exp();
        assert!((a.estimate - (e - 1.0 / e)).abs() <= 3.0 * a.standard_error);
    }
}
