//! Brute-force references for the closed-form constructions. Nothing here
//! uses an SVD; the optimizers work directly on the unitary group.

use rand::Rng;

use crate::algebra::PositiveForm;
use crate::error::Result;
use crate::linalg::{
    eigh, fro, hermitian_part, identity, min_eigenvalue, op_norm, sqrt_psd, ComplexMatrix, TolerancePolicy,
};
use crate::random::haar_unitary;

/// Cayley retraction `(1 - A/2)^{-1} (1 + A/2)` of a skew-Hermitian `A`.
fn cayley(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let half = a.scale(0.5);
    let lhs = identity(n) - &half;
    let rhs = identity(n) + &half;
    lhs.lu()
        .solve(&rhs)
        .expect("1 - A/2 is invertible for skew-Hermitian A")
}

fn re_trace_product(x: &ComplexMatrix, w: &ComplexMatrix) -> f64 {
    (x * w).trace().re
}

/// Riemannian ascent of `Re tr(X W)` over unitaries `W`, started at `w0`.
pub fn ascend_unitary(x: &ComplexMatrix, w0: ComplexMatrix, max_iter: usize) -> (f64, ComplexMatrix) {
    let mut w = w0;
    let mut f = re_trace_product(x, &w);
    let mut step = 1.0 / (1.0 + fro(x));
    for _ in 0..max_iter {
        let b = &w * x;
        // ascent direction on the Lie algebra: A = (B* - B)/2
        let a = (b.adjoint() - &b).scale(0.5);
        let g = fro(&a);
        if g <= 1e-15 * (1.0 + fro(x)) {
            break;
        }
        let mut accepted = false;
        let mut t = step * 2.0;
        while t > 1e-18 {
            let cand = cayley(&a.scale(t)) * &w;
            let fc = re_trace_product(x, &cand);
            if fc > f {
                f = fc;
                w = cand;
                step = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    // Once the value stalls at rounding level, keep following the gradient
    // with a fixed safe step; stationarity pins the maximizer down to
    // rounding instead of its square root.
    let t = 1.0 / op_norm(x).max(f64::MIN_POSITIVE);
    for _ in 0..max_iter {
        let b = &w * x;
        let a = (b.adjoint() - &b).scale(0.5);
        if fro(&a) <= 1e-15 * (1.0 + fro(x)) {
            break;
        }
        w = cayley(&a.scale(t)) * &w;
    }
    (re_trace_product(x, &w), w)
}

/// `max_W Re tr(X W)` over unitaries, best of `restarts` random starts.
pub fn max_re_trace_over_unitaries<R: Rng + ?Sized>(x: &ComplexMatrix, rng: &mut R, restarts: usize) -> f64 {
    let n = x.nrows();
    (0..restarts.max(1))
        .map(|_| ascend_unitary(x, haar_unitary(rng, n), 4000).0)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `sup |⟨ψ, φ⟩|` over the fibres, with `φ = √a` fixed and `ψ = √c W`.
pub fn brute_force_fidelity<R: Rng + ?Sized>(
    nu: &PositiveForm,
    rho: &PositiveForm,
    rng: &mut R,
    restarts: usize,
) -> Result<f64> {
    let tol = *nu.algebra().tol();
    let mut total = 0.0;
    for (a, c) in nu.densities().iter().zip(rho.densities()) {
        // ⟨√c W, √a⟩ = tr(√a √c W)
        let x = sqrt_psd(a, &tol)? * sqrt_psd(c, &tol)?;
        total += max_re_trace_over_unitaries(&x, rng, restarts);
    }
    Ok(total)
}

/// Partial isometry `w` with `w*w = p` and `ww* ≤ q`, built from eigenbases
/// of the two projections, or `None` if `rank p > rank q`.
pub fn mvn_partial_isometry(p: &ComplexMatrix, q: &ComplexMatrix, tol: &TolerancePolicy) -> Option<ComplexMatrix> {
    let ep = eigh(&hermitian_part(p), tol).ok()?;
    let eq = eigh(&hermitian_part(q), tol).ok()?;
    let ip: Vec<usize> = (0..ep.values.len()).filter(|&i| ep.values[i] > 0.5).collect();
    let iq: Vec<usize> = (0..eq.values.len()).filter(|&i| eq.values[i] > 0.5).collect();
    if ip.len() > iq.len() {
        return None;
    }
    let bp = ep.columns(&ip);
    let bq = eq.columns(&iq[..ip.len()]);
    Some(bq * bp.adjoint())
}

/// `c - t τ ⪰ 0` with a small relative slack.
fn dominates(c: &ComplexMatrix, tau: &ComplexMatrix, t: f64) -> bool {
    let scale = op_norm(c).max(1e-300);
    min_eigenvalue(&(c - tau.scale(t))) >= -1e-13 * scale
}

/// Largest `t` with `t τ ≤ c`, by bisection on the PSD test.
pub fn largest_multiple_below(c: &ComplexMatrix, tau: &ComplexMatrix) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while dominates(c, tau, hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return hi;
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if dominates(c, tau, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Projection onto `ker a ∩ ran c`, from the eigenvalue-one eigenspace of
/// `P_K P_c P_K`.
pub fn kernel_range_projection(a: &ComplexMatrix, c: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let ea = eigh(&hermitian_part(a), tol)?;
    let ec = eigh(&hermitian_part(c), tol)?;
    let pk = ea.columns(&ea.null_indices(tol));
    let pc = ec.columns(&ec.positive_indices(tol));
    let pk = &pk * pk.adjoint();
    let pc = &pc * pc.adjoint();
    let m = hermitian_part(&(&pk * pc * &pk));
    let e = eigh(&m, tol)?;
    let idx: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > 1.0 - 1e-8).collect();
    let b = e.columns(&idx);
    Ok(&b * b.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{nuclear_norm, real, zeros};
    use crate::random::*;

    #[test]
    fn ascent_reaches_nuclear_norm() {
        let mut rng = rng_from_seed(1);
        for n in [2, 3, 5] {
            let x = gaussian_matrix(&mut rng, n, n);
            let v = max_re_trace_over_unitaries(&x, &mut rng, 3);
            assert!((v - nuclear_norm(&x)).abs() < 1e-9, "{n}: {v} vs {}", nuclear_norm(&x));
        }
    }

    #[test]
    fn bisection_finds_schur_bound() {
        let mut c = zeros(2, 2);
        c[(0, 0)] = real(0.25);
        c[(1, 1)] = real(0.5);
        let mut tau = zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                tau[(i, j)] = real(0.5);
            }
        }
        // τ = ψψ* with ψ uniform, so t = 1/(ψ* c⁻¹ ψ) = 1/3
        let t = largest_multiple_below(&c, &tau);
        assert!((t - 1.0 / 3.0).abs() < 1e-10);
    }
}
