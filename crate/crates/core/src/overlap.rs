//! The commutant-side overlap form `h_{ψ,φ}(z) = ⟨zψ, φ⟩` and its polar data.
//!
//! With `z = R_y` one gets `h(R_y) = Σ tr(m_i y_i)` for `m_i = φ_i* ψ_i`. If
//! `m = U Σ W*` then `v = R_V` with `V = U W*`, `|h|` has density
//! `U Σ U* = (m m*)^{1/2}` and `s(|h|) = R_{VV*}`.

use crate::algebra::AlgElement;
use crate::error::Result;
use crate::linalg::{self, hermitian_part, nuclear_norm, svd, zeros, ComplexMatrix, C64, ZERO};
use crate::standard_form::HSVector;

#[derive(Clone, Debug)]
pub struct OverlapForm {
    pub m: AlgElement,
    pub v: AlgElement,
    pub abs_density: AlgElement,
    pub s_h: AlgElement,
}

fn polar_block(m: &ComplexMatrix, tol: &linalg::TolerancePolicy) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let n = m.nrows();
    let d = svd(m);
    let r = d.rank(tol);
    if r == 0 {
        return (zeros(n, n), zeros(n, n), zeros(n, n));
    }
    let ur = d.u.columns(0, r).into_owned();
    let wr = d.w.columns(0, r).into_owned();
    let mut us = ur.clone();
    for j in 0..r {
        for i in 0..n {
            us[(i, j)] *= d.s[j];
        }
    }
    let v = &ur * wr.adjoint();
    let abs = hermitian_part(&(us * ur.adjoint()));
    let s = hermitian_part(&(&ur * ur.adjoint()));
    (v, abs, s)
}

pub fn build_overlap(psi: &HSVector, phi: &HSVector) -> Result<OverlapForm> {
    let alg = psi.algebra();
    alg.ensure_same(phi.algebra())?;
    let tol = *alg.tol();
    let mut ms = Vec::new();
    let mut vs = Vec::new();
    let mut abs = Vec::new();
    let mut ss = Vec::new();
    for (p, f) in psi.blocks().iter().zip(phi.blocks()) {
        let m = f.adjoint() * p;
        let (v, a, s) = polar_block(&m, &tol);
        ms.push(m);
        vs.push(v);
        abs.push(a);
        ss.push(s);
    }
    Ok(OverlapForm {
        m: AlgElement::new(alg, ms)?,
        v: AlgElement::new(alg, vs)?,
        abs_density: AlgElement::new(alg, abs)?,
        s_h: AlgElement::new(alg, ss)?,
    })
}

impl OverlapForm {
    /// `h(R_y) = Σ tr(m_i y_i)`.
    pub fn eval(&self, y: &AlgElement) -> Result<C64> {
        trace_pairing(&self.m, y)
    }

    /// `|h|(R_y)`.
    pub fn eval_abs(&self, y: &AlgElement) -> Result<C64> {
        trace_pairing(&self.abs_density, y)
    }

    pub fn value_at_one(&self) -> C64 {
        self.m.blocks().iter().map(linalg::trace).fold(ZERO, |s, t| s + t)
    }
}

fn trace_pairing(d: &AlgElement, y: &AlgElement) -> Result<C64> {
    d.algebra().ensure_same(y.algebra())?;
    Ok(d.blocks()
        .iter()
        .zip(y.blocks())
        .map(|(a, b)| (a * b).trace())
        .fold(ZERO, |s, t| s + t))
}

/// `‖h‖₁ = Σ ‖m_i‖₁`.
pub fn functional_norm(h: &OverlapForm) -> f64 {
    h.m.blocks().iter().map(nuclear_norm).sum()
}

fn positivity_slack(h: &OverlapForm) -> f64 {
    1e-9 * functional_norm(h).max(1.0)
}

/// `h ≥ 0` iff every `m_i` is positive semidefinite.
pub fn is_positive(h: &OverlapForm) -> bool {
    let slack = positivity_slack(h);
    h.m.blocks()
        .iter()
        .all(|m| linalg::hermiticity_residual(m) <= slack && linalg::min_eigenvalue(m) >= -slack)
}

/// The equivalent test `h(1) = ‖h‖₁`.
pub fn positivity_by_trace(h: &OverlapForm) -> bool {
    (h.value_at_one() - linalg::real(functional_norm(h))).norm() <= positivity_slack(h)
}
