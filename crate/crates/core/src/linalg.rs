//! Dense complex-matrix kernel.
//!
//! Every rank decision in the crate goes through [`TolerancePolicy`]: a value
//! counts as nonzero when it exceeds `rel_rank_cutoff * scale`, where `scale`
//! is the largest singular value (or eigenvalue modulus), and never below
//! `abs_floor`. Spectra obtained without any rounding (diagonal input) are
//! flagged [`Eigh::exact`] and only need strict positivity.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    rel_rank_cutoff: f64,
    abs_floor: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rel_rank_cutoff: 1e-10,
            abs_floor: 1e-14,
        }
    }
}

impl TolerancePolicy {
    pub fn new(rel_rank_cutoff: f64, abs_floor: f64) -> Result<Self> {
        if !(rel_rank_cutoff > 0.0 && rel_rank_cutoff.is_finite()) {
            return Err(Error::InvalidPolicy(format!(
                "rel_rank_cutoff must be positive, got {rel_rank_cutoff}"
            )));
        }
        if !(abs_floor > 0.0 && abs_floor.is_finite()) {
            return Err(Error::InvalidPolicy(format!(
                "abs_floor must be positive, got {abs_floor}"
            )));
        }
        Ok(Self {
            rel_rank_cutoff,
            abs_floor,
        })
    }

    pub fn rel_rank_cutoff(&self) -> f64 {
        self.rel_rank_cutoff
    }

    pub fn abs_floor(&self) -> f64 {
        self.abs_floor
    }

    /// Threshold below which a singular value or eigenvalue of a matrix whose
    /// largest one is `scale` is treated as zero.
    pub fn threshold(&self, scale: f64) -> f64 {
        (self.rel_rank_cutoff * scale.abs()).max(self.abs_floor)
    }

    /// Number of entries of `values` above the threshold for `scale`.
    pub fn rank_of(&self, values: &[f64], scale: f64) -> usize {
        let t = self.threshold(scale);
        values.iter().filter(|&&v| v > t).count()
    }
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(r, c)
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Frobenius norm.
pub fn fro(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    fro(&(m - m.adjoint()))
}

pub fn is_diagonal_exact(m: &ComplexMatrix) -> bool {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            let z = m[(i, j)];
            if i != j && (z.re != 0.0 || z.im != 0.0) {
                return false;
            }
            if i == j && z.im != 0.0 {
                return false;
            }
        }
    }
    true
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
    /// True when the input was exactly diagonal, so the spectrum carries no
    /// rounding error.
    pub exact: bool,
}

impl Eigh {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Indices of eigenvalues counted as strictly positive under `tol`.
    pub fn positive_indices(&self, tol: &TolerancePolicy) -> Vec<usize> {
        let t = if self.exact { 0.0 } else { tol.threshold(self.max_abs()) };
        (0..self.values.len()).filter(|&i| self.values[i] > t).collect()
    }

    /// Indices of eigenvalues counted as zero (or clipped negative) under `tol`.
    pub fn null_indices(&self, tol: &TolerancePolicy) -> Vec<usize> {
        let pos = self.positive_indices(tol);
        (0..self.values.len()).filter(|i| !pos.contains(i)).collect()
    }

    pub fn columns(&self, idx: &[usize]) -> ComplexMatrix {
        let n = self.vectors.nrows();
        let mut out = zeros(n, idx.len());
        for (k, &i) in idx.iter().enumerate() {
            out.set_column(k, &self.vectors.column(i));
        }
        out
    }

    /// V f(Λ) V*.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn eigh(h: &ComplexMatrix, tol: &TolerancePolicy) -> Result<Eigh> {
    if !h.is_square() {
        return Err(Error::Shape(format!(
            "eigh expects a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    check_finite(h)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: zeros(0, 0),
            exact: true,
        });
    }
    let residual = hermiticity_residual(h);
    let slack = tol.threshold(fro(h));
    if residual > slack {
        return Err(Error::NonHermitianInput { residual });
    }
    if is_diagonal_exact(h) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| h[(i, i)].re.total_cmp(&h[(j, j)].re));
        let mut vectors = zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            vectors[(i, k)] = ONE;
        }
        return Ok(Eigh {
            values: order.iter().map(|&i| h[(i, i)].re).collect(),
            vectors,
            exact: true,
        });
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vectors = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok(Eigh {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors,
        exact: false,
    })
}

/// Eigendecomposition of a matrix that must be positive semidefinite up to
/// the policy's clipping window. Eigenvalues inside the window, of either
/// sign, are set to zero.
pub fn eigh_psd(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<Eigh> {
    Ok(eigh_psd_clipped(a, 0.0, tol)?.0)
}

/// `eigh_psd` plus whether any eigenvalue was moved. The window is taken
/// relative to `reference` when it exceeds the spectrum of `a`.
fn eigh_psd_clipped(a: &ComplexMatrix, reference: f64, tol: &TolerancePolicy) -> Result<(Eigh, bool)> {
    let mut e = eigh(a, tol)?;
    let scale = e.max_abs().max(reference);
    let window = tol.threshold(scale);
    if let Some(&min) = e.values.first() {
        if min < -window {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
    }
    // an exact spectrum keeps its tiny positive eigenvalues
    let clip = if e.exact { 0.0 } else { window };
    let mut changed = false;
    for v in e.values.iter_mut() {
        if *v <= clip && *v != 0.0 {
            *v = 0.0;
            changed = true;
        }
    }
    Ok((e, changed))
}

/// Projection of `a` onto the PSD cone by clipping eigenvalues inside the
/// tolerance window; errors outside it. Input that needs no clipping is
/// returned as its Hermitian part.
pub fn clip_psd(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    clip_psd_relative(a, 0.0, tol)
}

/// `clip_psd` with the window measured against `reference`, for matrices
/// obtained by cancellation from operands of that size.
pub fn clip_psd_relative(a: &ComplexMatrix, reference: f64, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    if a.is_empty() {
        return Ok(a.clone());
    }
    let (e, changed) = eigh_psd_clipped(a, reference, tol)?;
    if !changed {
        return Ok(hermitian_part(a));
    }
    if e.exact {
        return Ok(e.apply(real));
    }
    Ok(hermitian_part(&e.apply(real)))
}

pub fn sqrt_psd(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    if a.is_empty() {
        return Ok(a.clone());
    }
    let e = eigh_psd(a, tol)?;
    Ok(hermitian_part(&e.apply(|l| real(l.max(0.0).sqrt()))))
}

/// Range projection of a PSD matrix, decided on its spectrum.
pub fn psd_support(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    if a.is_empty() {
        return Ok(a.clone());
    }
    let e = eigh_psd(a, tol)?;
    let idx = e.positive_indices(tol);
    let b = e.columns(&idx);
    Ok(&b * b.adjoint())
}

pub fn psd_rank(a: &ComplexMatrix, tol: &TolerancePolicy) -> Result<usize> {
    if a.is_empty() {
        return Ok(0);
    }
    Ok(eigh_psd(a, tol)?.positive_indices(tol).len())
}

/// Thin SVD `A = U diag(s) W*`, singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub w: ComplexMatrix,
}

impl Svd {
    pub fn rank(&self, tol: &TolerancePolicy) -> usize {
        let scale = self.s.first().copied().unwrap_or(0.0);
        tol.rank_of(&self.s, scale)
    }
}

/// Below this size the SVD always goes through one-sided Jacobi.
const JACOBI_SVD_MAX: usize = 48;

pub fn svd(a: &ComplexMatrix) -> Svd {
    let (r, c) = a.shape();
    let k = r.min(c);
    if k == 0 {
        return Svd {
            u: zeros(r, 0),
            s: vec![],
            w: zeros(c, 0),
        };
    }
    if r.max(c) > JACOBI_SVD_MAX {
        if let Some(d) = lapack_style_svd(a) {
            return d;
        }
    }
    if r >= c {
        jacobi_svd(a)
    } else {
        let d = jacobi_svd(&a.adjoint());
        Svd { u: d.w, s: d.s, w: d.u }
    }
}

/// nalgebra's bidiagonal SVD, rejected if it fails to reconstruct `a`.
/// It occasionally returns wrong singular vectors for complex
/// rank-deficient input.
fn lapack_style_svd(a: &ComplexMatrix) -> Option<Svd> {
    let (r, c) = a.shape();
    let k = r.min(c);
    let dec = a.clone().svd(true, true);
    let u_raw = dec.u?;
    let w_raw = dec.v_t?.adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));
    let mut u = zeros(r, k);
    let mut w = zeros(c, k);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        w.set_column(dst, &w_raw.column(src));
    }
    let d = Svd {
        u,
        s: order.iter().map(|&i| dec.singular_values[i]).collect(),
        w,
    };
    let slack = 1e-12 * r.max(c) as f64;
    let scale = fro(a).max(f64::MIN_POSITIVE);
    let rec = &d.u * DMatrix::from_diagonal(&DVector::from_iterator(k, d.s.iter().map(|&x| real(x)))) * d.w.adjoint();
    let ok = d.s.iter().all(|x| x.is_finite() && *x >= 0.0)
        && fro(&(rec - a)) <= slack * scale
        && fro(&(d.u.adjoint() * &d.u - identity(k))) <= slack
        && fro(&(d.w.adjoint() * &d.w - identity(k))) <= slack;
    ok.then_some(d)
}

/// One-sided (Hestenes) Jacobi SVD of a tall or square matrix.
fn jacobi_svd(a: &ComplexMatrix) -> Svd {
    let (r, c) = a.shape();
    let mut x = a.clone();
    let mut v = identity(c);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = x.column(p).norm_squared();
                let beta = x.column(q).norm_squared();
                let gamma = x.column(p).dotc(&x.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for m in [&mut x, &mut v] {
                    for i in 0..m.nrows() {
                        let ap = m[(i, p)];
                        let aq = m[(i, q)] * phase.conj();
                        m[(i, p)] = ap * cs - aq * sn;
                        m[(i, q)] = ap * sn + aq * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..c).map(|j| x.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = zeros(r, c);
    let mut w = zeros(c, c);
    let mut s = Vec::with_capacity(c);
    let mut filled = 0;
    for (dst, &src) in order.iter().enumerate() {
        w.set_column(dst, &v.column(src));
        s.push(norms[src]);
        if norms[src] > 0.0 {
            u.set_column(dst, &x.column(src).unscale(norms[src]));
            filled = dst + 1;
        }
    }
    complete_orthonormal(&mut u, filled);
    Svd { u, s, w }
}

/// Fills columns `from..` of `u` with an orthonormal completion of the
/// first `from` columns.
fn complete_orthonormal(u: &mut ComplexMatrix, from: usize) {
    let (r, c) = u.shape();
    let mut next = from;
    let mut e = 0;
    while next < c && e < r {
        let mut cand = zeros(r, 1);
        cand[(e, 0)] = ONE;
        e += 1;
        for _ in 0..2 {
            for j in 0..next {
                let proj = u.column(j).dotc(&cand.column(0));
                let col = u.column(j).into_owned();
                cand.column_mut(0).axpy(-proj, &col, ONE);
            }
        }
        let nrm = cand.column(0).norm();
        if nrm > 0.5 {
            u.set_column(next, &cand.column(0).unscale(nrm));
            next += 1;
        }
    }
}

/// Singular values in descending order. Large inputs skip the singular
/// vectors, whose accuracy is what the Jacobi fallback guards.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.nrows().max(a.ncols()) <= JACOBI_SVD_MAX || a.is_empty() {
        return svd(a).s;
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn nuclear_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).iter().sum()
}

pub fn numerical_rank(a: &ComplexMatrix, tol: &TolerancePolicy) -> usize {
    let s = singular_values(a);
    let scale = s.first().copied().unwrap_or(0.0);
    tol.rank_of(&s, scale)
}

/// Polar decomposition `A = V |A|` with `|A| = (A*A)^{1/2}`.
///
/// `V` is the compact partial isometry `U_r W_r*` built from the retained
/// singular pairs, so `V*V` is exactly the support of `|A|` and `VV*` the
/// support of `|A*|`.
#[derive(Clone, Debug)]
pub struct Polar {
    pub v: ComplexMatrix,
    pub abs: ComplexMatrix,
    pub rank: usize,
}

pub fn polar_left(a: &ComplexMatrix, tol: &TolerancePolicy) -> Polar {
    let (r, c) = a.shape();
    let d = svd(a);
    let rank = d.rank(tol);
    let ur = d.u.columns(0, rank).into_owned();
    let wr = d.w.columns(0, rank).into_owned();
    let mut ws = wr.clone();
    for j in 0..rank {
        for i in 0..c {
            ws[(i, j)] *= d.s[j];
        }
    }
    let v = if rank == 0 { zeros(r, c) } else { &ur * wr.adjoint() };
    let abs = if rank == 0 {
        zeros(c, c)
    } else {
        hermitian_part(&(&ws * wr.adjoint()))
    };
    Polar { v, abs, rank }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Range projection of `A A*`.
    Left,
    /// Range projection of `A* A`.
    Right,
}

pub fn support_proj(a: &ComplexMatrix, side: Side, tol: &TolerancePolicy) -> ComplexMatrix {
    let d = svd(a);
    let rank = d.rank(tol);
    let basis = match side {
        Side::Left => d.u.columns(0, rank).into_owned(),
        Side::Right => d.w.columns(0, rank).into_owned(),
    };
    let n = match side {
        Side::Left => a.nrows(),
        Side::Right => a.ncols(),
    };
    if rank == 0 {
        return zeros(n, n);
    }
    &basis * basis.adjoint()
}

/// Moore–Penrose pseudo-inverse with the policy's rank cutoff.
pub fn pinv(a: &ComplexMatrix, tol: &TolerancePolicy) -> ComplexMatrix {
    let (r, c) = a.shape();
    let d = svd(a);
    let rank = d.rank(tol);
    let mut out = zeros(c, r);
    for k in 0..rank {
        let wk = d.w.column(k);
        let uk = d.u.column(k);
        out += (wk * uk.adjoint()).scale(1.0 / d.s[k]);
    }
    out
}

/// Orthonormal basis of the kernel of `a` (columns), decided by the policy.
pub fn kernel_basis(a: &ComplexMatrix, tol: &TolerancePolicy) -> ComplexMatrix {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return identity(c);
    }
    // Pad with zero rows so the SVD returns a full right-singular basis.
    let mut padded = zeros(r.max(c), c);
    padded.view_mut((0, 0), (r, c)).copy_from(a);
    let d = svd(&padded);
    let t = tol.threshold(d.s[0]);
    let idx: Vec<usize> = (0..c).filter(|&i| d.s[i] <= t).collect();
    let mut k = zeros(c, idx.len());
    for (dst, &i) in idx.iter().enumerate() {
        k.set_column(dst, &d.w.column(i));
    }
    k
}

/// Hermitian positive definite `A` raised to `i t` (unitary), via `eigh`.
pub fn pd_power_imag(a: &ComplexMatrix, t: f64, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let e = eigh_psd(a, tol)?;
    if e.values.iter().any(|&l| l <= 0.0) {
        return Err(Error::SingularOmega);
    }
    Ok(e.apply(|l| {
        let phase = t * l.ln();
        c64(phase.cos(), phase.sin())
    }))
}

/// Real power of a positive definite matrix.
pub fn pd_power(a: &ComplexMatrix, p: f64, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let e = eigh_psd(a, tol)?;
    if e.values.iter().any(|&l| l <= 0.0) {
        return Err(Error::SingularDensity);
    }
    Ok(hermitian_part(&e.apply(|l| real(l.powf(p)))))
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `tr(B* A)`, the Hilbert–Schmidt inner product `<A, B>`.
pub fn hs_dot(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum()
}

pub fn min_eigenvalue(h: &ComplexMatrix) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    let herm = hermitian_part(h);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v))
}

pub fn max_eigenvalue(h: &ComplexMatrix) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    let herm = hermitian_part(h);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
}

pub fn is_projection(p: &ComplexMatrix, slack: f64) -> bool {
    p.is_square() && hermiticity_residual(p) <= slack && fro(&(p * p - p)) <= slack
}

pub fn to_dvector(values: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, haar_unitary, rng_from_seed};

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn diag(v: &[f64]) -> ComplexMatrix {
        let n = v.len();
        let mut m = zeros(n, n);
        for (i, &x) in v.iter().enumerate() {
            m[(i, i)] = real(x);
        }
        m
    }

    #[test]
    fn policy_rejects_nonpositive() {
        assert!(TolerancePolicy::new(0.0, 1e-14).is_err());
        assert!(TolerancePolicy::new(1e-10, -1.0).is_err());
        assert!(TolerancePolicy::new(1e-10, f64::NAN).is_err());
        assert!(TolerancePolicy::new(1e-8, 1e-12).is_ok());
    }

    #[test]
    fn eigh_identity_and_diagonal() {
        let e = eigh(&identity(3), &tol()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let e = eigh(&diag(&[2.0, -1.0]), &tol()).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0]);
        assert_eq!(e.vectors[(1, 0)], ONE);
        assert_eq!(e.vectors[(0, 1)], ONE);
        assert!(e.exact);
    }

    #[test]
    fn eigh_random_reconstructs() {
        let mut rng = rng_from_seed(7);
        let g = gaussian_matrix(&mut rng, 8, 8);
        let h = hermitian_part(&g);
        let e = eigh(&h, &tol()).unwrap();
        let rec = e.apply(real);
        assert!(fro(&(&rec - &h)) < 1e-10 * op_norm(&h));
        let v = &e.vectors;
        assert!(fro(&(v.adjoint() * v - identity(8))) < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut m = identity(2);
        m[(0, 1)] = real(1.0);
        assert!(matches!(eigh(&m, &tol()), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn sqrt_psd_cases() {
        let s = sqrt_psd(&diag(&[4.0, 9.0]), &tol()).unwrap();
        assert!(fro(&(s - diag(&[2.0, 3.0]))) < 1e-15);
        let z = sqrt_psd(&zeros(3, 3), &tol()).unwrap();
        assert_eq!(fro(&z), 0.0);
        let mut rng = rng_from_seed(3);
        let b = gaussian_matrix(&mut rng, 5, 5);
        let a = b.adjoint() * &b;
        let s = sqrt_psd(&a, &tol()).unwrap();
        assert!(fro(&(&s * &s - &a)) < 1e-9 * op_norm(&a));
        assert!(min_eigenvalue(&s) > -1e-12);
    }

    #[test]
    fn sqrt_psd_rejects_negative() {
        let r = sqrt_psd(&diag(&[1.0, -0.5]), &tol());
        assert!(matches!(r, Err(Error::NotPositive { .. })));
        // inside the clipping window
        let mut rng = rng_from_seed(4);
        let u = haar_unitary(&mut rng, 2);
        let a = &u * diag(&[1.0, -1e-13]) * u.adjoint();
        assert!(sqrt_psd(&a, &tol()).is_ok());
    }

    #[test]
    fn polar_of_unitary_and_rank_one() {
        let mut rng = rng_from_seed(11);
        let u = haar_unitary(&mut rng, 4);
        let p = polar_left(&u, &tol());
        assert!(fro(&(&p.v - &u)) < 1e-12);
        assert!(fro(&(&p.abs - identity(4))) < 1e-12);

        let col = gaussian_matrix(&mut rng, 3, 1);
        let mut a = zeros(3, 3);
        a.set_column(0, &col.column(0));
        let p = polar_left(&a, &tol());
        assert_eq!(p.rank, 1);
        let vv = p.v.adjoint() * &p.v;
        assert!((trace(&vv).re - 1.0).abs() < 1e-12);
        assert!(is_projection(&vv, 1e-12));
    }

    #[test]
    fn polar_random_identities() {
        let mut rng = rng_from_seed(12);
        let a = gaussian_matrix(&mut rng, 5, 5);
        let p = polar_left(&a, &tol());
        assert!(fro(&(&p.v * &p.abs - &a)) < 1e-10 * op_norm(&a));
        let supp = support_proj(&p.abs, Side::Left, &tol());
        assert!(fro(&(p.v.adjoint() * &p.v - supp)) < 1e-10);
        assert!((nuclear_norm(&a) - trace(&p.abs).re).abs() < 1e-10);
    }

    #[test]
    fn polar_of_zero() {
        let p = polar_left(&zeros(3, 3), &tol());
        assert_eq!(p.rank, 0);
        assert_eq!(fro(&p.v), 0.0);
        assert_eq!(fro(&p.abs), 0.0);
    }

    #[test]
    fn support_projection_cases() {
        let p = support_proj(&diag(&[3.0, 0.0]), Side::Left, &tol());
        assert!(fro(&(p - diag(&[1.0, 0.0]))) < 1e-14);
        assert_eq!(fro(&support_proj(&zeros(2, 2), Side::Right, &tol())), 0.0);

        let mut rng = rng_from_seed(5);
        let x = gaussian_matrix(&mut rng, 4, 2);
        let y = gaussian_matrix(&mut rng, 4, 2);
        let a = &x * y.adjoint();
        for side in [Side::Left, Side::Right] {
            let p = support_proj(&a, side, &tol());
            assert!(is_projection(&p, 1e-10));
            assert!((trace(&p).re - 2.0).abs() < 1e-10);
        }
        let pl = support_proj(&a, Side::Left, &tol());
        let pr = support_proj(&a, Side::Right, &tol());
        assert!(fro(&(&pl * &a - &a)) < 1e-10);
        assert!(fro(&(&a * &pr - &a)) < 1e-10);
    }

    #[test]
    fn pinv_penrose_identities() {
        let mut rng = rng_from_seed(9);
        let x = gaussian_matrix(&mut rng, 5, 3);
        let y = gaussian_matrix(&mut rng, 4, 3);
        let a = &x * y.adjoint();
        let p = pinv(&a, &tol());
        let scale = op_norm(&a).max(1.0);
        assert!(fro(&(&a * &p * &a - &a)) < 1e-9 * scale);
        assert!(fro(&(&p * &a * &p - &p)) < 1e-9 * op_norm(&p).max(1.0));
        assert!(hermiticity_residual(&(&a * &p)) < 1e-9);
        assert!(hermiticity_residual(&(&p * &a)) < 1e-9);
    }

    #[test]
    fn imaginary_power_is_unitary_flow() {
        let mut rng = rng_from_seed(21);
        let b = gaussian_matrix(&mut rng, 3, 3);
        let a = b.adjoint() * &b + identity(3);
        let u = pd_power_imag(&a, 0.7, &tol()).unwrap();
        assert!(fro(&(u.adjoint() * &u - identity(3))) < 1e-12);
        let u1 = pd_power_imag(&a, 0.3, &tol()).unwrap();
        let u2 = pd_power_imag(&a, 0.4, &tol()).unwrap();
        assert!(fro(&(u1 * u2 - u)) < 1e-12);
    }

    #[test]
    fn kernel_basis_dimension() {
        let mut rng = rng_from_seed(2);
        let x = gaussian_matrix(&mut rng, 5, 2);
        let a = &x * x.adjoint();
        let k = kernel_basis(&a, &tol());
        assert_eq!(k.ncols(), 3);
        assert!(fro(&(&a * &k)) < 1e-10);
    }

    #[test]
    fn exact_spectrum_keeps_tiny_eigenvalues() {
        let d = diag(&[1.0, 1e-150]);
        let e = eigh_psd(&d, &tol()).unwrap();
        assert!(e.exact);
        assert_eq!(e.positive_indices(&tol()).len(), 2);
        let mut rng = rng_from_seed(1);
        let u = haar_unitary(&mut rng, 2);
        let r = &u * &d * u.adjoint();
        assert_eq!(psd_rank(&r, &tol()).unwrap(), 1);
    }

    #[test]
    fn svd_reconstructs_rank_deficient() {
        let mut rng = rng_from_seed(5);
        for t in 0..2000 {
            let n = 2 + t % 6;
            let r = (t / 6) % n + 1;
            let x = gaussian_matrix(&mut rng, n, r);
            let y = gaussian_matrix(&mut rng, r, n + t % 2);
            let m = if t % 3 == 0 { &x * x.adjoint() } else { &x * &y };
            let d = svd(&m);
            let k = d.s.len();
            let sd = DMatrix::from_diagonal(&DVector::from_iterator(k, d.s.iter().map(|&v| real(v))));
            assert!(fro(&(&d.u * sd * d.w.adjoint() - &m)) <= 1e-12 * fro(&m), "{t}");
            assert!(fro(&(d.u.adjoint() * &d.u - identity(k))) < 1e-12);
            assert!(fro(&(d.w.adjoint() * &d.w - identity(k))) < 1e-12);
            assert!(d.s.windows(2).all(|p| p[0] >= p[1]));
        }
    }
}
