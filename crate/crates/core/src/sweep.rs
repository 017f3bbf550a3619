//! Dimension-truncated family in which `ρ⊥` shrinks geometrically.
//!
//! At size `n`, `ρ` has density `c_n = Σ_k β^k |ψ_k|² e_k e_k*` and `ν` is
//! supported on the complement of a unit vector `ψ`. Then `ρ⊥` is the largest
//! multiple `γ p_ψ` below `c_n`, so `γ = 1 / (ψ* c_n⁻¹ ψ) = (1-β)/(β^{-n} - 1)`
//! whatever the (nonzero) amplitudes of `ψ`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Algebra, PositiveForm};
use crate::bures::{bures_distance, rho_perp};
use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_part, identity, real, zeros, ComplexMatrix, TolerancePolicy};
use crate::random::{haar_isometry, rng_from_seed};

pub const MAX_SWEEP_DIM: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NuMode {
    /// `a_n = (1 - ψψ*) / (n - 1)`.
    Projection,
    /// A random full-rank density on the complement of `ψ`.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiMode {
    Uniform,
    /// Uniform moduli with random phases.
    RandomPhase,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_oracle: f64,
    pub fidelity: f64,
    pub distance: f64,
}

pub fn gamma_oracle(beta: f64, n: usize) -> f64 {
    (1.0 - beta) / (beta.powi(-(n as i32)) - 1.0)
}

fn psi_vector(n: usize, mode: PsiMode, seed: u64) -> Vec<crate::linalg::C64> {
    let amp = 1.0 / (n as f64).sqrt();
    match mode {
        PsiMode::Uniform => vec![real(amp); n],
        PsiMode::RandomPhase => {
            let mut rng = rng_from_seed(seed ^ 0x5eed_0000_0000_0000 ^ n as u64);
            (0..n)
                .map(|_| {
                    let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                    c64(amp * t.cos(), amp * t.sin())
                })
                .collect()
        }
    }
}

/// The pair `(ν_n, ρ_n)` at truncation `n`.
pub fn truncated_pair(
    beta: f64,
    n: usize,
    nu_mode: NuMode,
    psi_mode: PsiMode,
    seed: u64,
    tol: TolerancePolicy,
) -> Result<(PositiveForm, PositiveForm)> {
    check_beta(beta)?;
    if n < 2 {
        return Err(Error::Domain(format!("truncation size must be at least 2, got {n}")));
    }
    let alg = Algebra::with_policy(&[n], tol)?;
    let psi = psi_vector(n, psi_mode, seed);
    let mut c = zeros(n, n);
    for k in 0..n {
        c[(k, k)] = real(beta.powi(k as i32 + 1) * psi[k].norm_sqr());
    }
    let col = ComplexMatrix::from_fn(n, 1, |i, _| psi[i]);
    let p_perp = identity(n) - &col * col.adjoint();
    let a = match nu_mode {
        NuMode::Projection => p_perp.unscale((n - 1) as f64),
        NuMode::Random => {
            let mut rng = rng_from_seed(seed.wrapping_add(n as u64));
            let v = haar_isometry(&mut rng, n, n);
            let mut d = zeros(n, n);
            for i in 0..n {
                d[(i, i)] = real(0.5 + rng.random::<f64>());
            }
            let pv = &p_perp * v;
            let m = &pv * d * pv.adjoint();
            let t = crate::linalg::trace(&m).re;
            m.unscale(t)
        }
    };
    let nu = PositiveForm::new(&alg, vec![hermitian_part(&a)])?;
    let rho = PositiveForm::new(&alg, vec![c])?;
    Ok((nu, rho))
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("beta must lie in (0, 1), got {beta}")))
    }
}

pub fn sweep_row(
    beta: f64,
    n: usize,
    nu_mode: NuMode,
    psi_mode: PsiMode,
    seed: u64,
    tol: TolerancePolicy,
) -> Result<SweepRow> {
    let (nu, rho) = truncated_pair(beta, n, nu_mode, psi_mode, seed, tol)?;
    let gamma = rho_perp(&nu, &rho)?.norm1();
    let report = bures_distance(&nu, &rho)?;
    Ok(SweepRow {
        n,
        beta,
        gamma,
        gamma_oracle: gamma_oracle(beta, n),
        fidelity: report.fidelity,
        distance: report.distance,
    })
}

/// Rows for `n = 2..=n_max`, evaluated in parallel and returned in order.
pub fn sweep(
    beta: f64,
    n_max: usize,
    nu_mode: NuMode,
    psi_mode: PsiMode,
    seed: u64,
    tol: TolerancePolicy,
) -> Result<Vec<SweepRow>> {
    check_beta(beta)?;
    if !(2..=MAX_SWEEP_DIM).contains(&n_max) {
        return Err(Error::Domain(format!(
            "n_max must lie in 2..={MAX_SWEEP_DIM}, got {n_max}"
        )));
    }
    let mut rows = (2..=n_max)
        .into_par_iter()
        .map(|n| sweep_row(beta, n, nu_mode, psi_mode, seed, tol))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

/// `|γ - γ_oracle| ≤ 1e-9 max(1, γ_oracle)`.
pub fn row_matches_oracle(row: &SweepRow) -> bool {
    (row.gamma - row.gamma_oracle).abs() <= 1e-9 * row.gamma_oracle.max(1.0)
}
