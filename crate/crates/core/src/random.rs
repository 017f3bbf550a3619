//! Seeded random matrices and forms for sampling, tests and oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgElement, Algebra, PositiveForm};
use crate::linalg::{c64, hermitian_part, identity, real, zeros, ComplexMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_scalar<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

/// Ginibre matrix with independent standard complex normal entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_scalar(rng))
}

pub fn gaussian_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    hermitian_part(&gaussian_matrix(rng, n, n))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// diag(R) pushed into Q.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    if n == 0 {
        return zeros(0, 0);
    }
    let g = gaussian_matrix(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { real(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `n x k` matrix with orthonormal columns, Haar distributed.
pub fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> ComplexMatrix {
    haar_unitary(rng, n).columns(0, k).into_owned()
}

/// PSD matrix of the given rank with unit trace and Haar eigenbasis. Rank 0
/// yields the zero matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
    let rank = rank.min(n);
    if rank == 0 {
        return zeros(n, n);
    }
    let g = gaussian_matrix(rng, n, rank);
    let m = &g * g.adjoint();
    let t = crate::linalg::trace(&m).re;
    hermitian_part(&m.unscale(t))
}

/// Random PSD matrix `B B*` with `B` an `n x n` Ginibre matrix plus a shift.
pub fn random_positive_definite<R: Rng + ?Sized>(rng: &mut R, n: usize, shift: f64) -> ComplexMatrix {
    let b = gaussian_matrix(rng, n, n);
    hermitian_part(&(&b * b.adjoint() + identity(n).scale(shift)))
}

/// Orthogonal projection of the given rank in a Haar-random basis.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
    let v = haar_isometry(rng, n, rank.min(n));
    &v * v.adjoint()
}

/// Pair of densities diagonal in a shared Haar basis.
pub fn commuting_densities<R: Rng + ?Sized>(rng: &mut R, n: usize, zero_prob: f64) -> (ComplexMatrix, ComplexMatrix) {
    let u = haar_unitary(rng, n);
    let mut da = zeros(n, n);
    let mut dc = zeros(n, n);
    for i in 0..n {
        if !rng.random_bool(zero_prob) {
            da[(i, i)] = real(rng.random::<f64>() + 0.05);
        }
        if !rng.random_bool(zero_prob) {
            dc[(i, i)] = real(rng.random::<f64>() + 0.05);
        }
    }
    let a = hermitian_part(&(&u * da * u.adjoint()));
    let c = hermitian_part(&(&u * dc * u.adjoint()));
    (a, c)
}

pub fn random_element<R: Rng + ?Sized>(rng: &mut R, alg: &Algebra) -> AlgElement {
    let blocks = alg.dims().iter().map(|&n| gaussian_matrix(rng, n, n)).collect();
    AlgElement::new_unchecked(alg, blocks)
}

pub fn random_unitary_element<R: Rng + ?Sized>(rng: &mut R, alg: &Algebra) -> AlgElement {
    let blocks = alg.dims().iter().map(|&n| haar_unitary(rng, n)).collect();
    AlgElement::new_unchecked(alg, blocks)
}

/// Positive definite element `B B* + shift`.
pub fn random_invertible_positive<R: Rng + ?Sized>(rng: &mut R, alg: &Algebra, shift: f64) -> AlgElement {
    let blocks = alg
        .dims()
        .iter()
        .map(|&n| random_positive_definite(rng, n, shift))
        .collect();
    AlgElement::new_unchecked(alg, blocks)
}

/// Random positive form. Each block gets a random rank in `min_rank..=n`
/// (clamped) and the total trace is normalized to one.
pub fn random_form<R: Rng + ?Sized>(rng: &mut R, alg: &Algebra, full_rank: bool) -> PositiveForm {
    let mut blocks: Vec<ComplexMatrix> = alg
        .dims()
        .iter()
        .map(|&n| {
            let rank = if full_rank { n } else { rng.random_range(0..=n) };
            let w: f64 = rng.random::<f64>() + 0.1;
            random_density(rng, n, rank).scale(w)
        })
        .collect();
    let total: f64 = blocks.iter().map(|b| crate::linalg::trace(b).re).sum();
    if total == 0.0 {
        let n = alg.dims()[0];
        blocks[0] = random_density(rng, n, 1);
    } else {
        for b in blocks.iter_mut() {
            *b = b.unscale(total);
        }
    }
    PositiveForm::new_unchecked(alg, blocks)
}

pub fn random_commuting_pair<R: Rng + ?Sized>(
    rng: &mut R,
    alg: &Algebra,
    zero_prob: f64,
) -> (PositiveForm, PositiveForm) {
    let mut a = Vec::new();
    let mut c = Vec::new();
    for &n in alg.dims() {
        let (x, y) = commuting_densities(rng, n, zero_prob);
        a.push(x);
        c.push(y);
    }
    (PositiveForm::new_unchecked(alg, a), PositiveForm::new_unchecked(alg, c))
}

/// Random invertible reference vector; `psd` selects a positive definite one.
pub fn random_omega_blocks<R: Rng + ?Sized>(rng: &mut R, alg: &Algebra, psd: bool) -> Vec<ComplexMatrix> {
    alg.dims()
        .iter()
        .map(|&n| {
            if psd {
                random_positive_definite(rng, n, 0.5)
            } else {
                haar_unitary(rng, n) * random_positive_definite(rng, n, 0.5)
            }
        })
        .collect()
}
