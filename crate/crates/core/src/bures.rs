//! Fidelity, Bures distance and the constructions built on the optimal
//! implementing vector.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{evaluate, AlgElement, Algebra, PositiveForm};
use crate::error::{Error, Result};
use crate::linalg::{
    self, eigh, eigh_psd, hermitian_part, nuclear_norm, op_norm, pd_power, polar_left, psd_support, real, sqrt_psd,
    zeros, ComplexMatrix, Eigh, TolerancePolicy,
};
use crate::overlap::build_overlap;
use crate::standard_form::{hs_inner, left_act, right_act, HSVector, StandardForm};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BuresReport {
    pub fidelity: f64,
    pub distance: f64,
    pub nu_norm: f64,
    pub rho_norm: f64,
}

#[derive(Clone, Debug)]
pub struct MinimalPairReport {
    pub nu_perp: PositiveForm,
    pub rho_perp: PositiveForm,
    pub nu_min: PositiveForm,
    pub rho_min: PositiveForm,
}

fn roots(f: &PositiveForm) -> Result<Vec<ComplexMatrix>> {
    let tol = *f.algebra().tol();
    f.densities().iter().map(|d| sqrt_psd(d, &tol)).collect()
}

/// `√P(ν,ρ) = Σ ‖√a_i √c_i‖₁`.
pub fn fidelity(nu: &PositiveForm, rho: &PositiveForm) -> Result<f64> {
    nu.algebra().ensure_same(rho.algebra())?;
    let ra = roots(nu)?;
    let rc = roots(rho)?;
    Ok(ra.iter().zip(&rc).map(|(a, c)| nuclear_norm(&(a * c))).sum())
}

pub fn bures_distance(nu: &PositiveForm, rho: &PositiveForm) -> Result<BuresReport> {
    let f = fidelity(nu, rho)?;
    let nn = nu.norm1();
    let rn = rho.norm1();
    Ok(BuresReport {
        fidelity: f,
        distance: (nn + rn - 2.0 * f).max(0.0).sqrt(),
        nu_norm: nn,
        rho_norm: rn,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariationalMode {
    Analytic,
    Iterative,
}

#[derive(Clone, Debug)]
pub struct VariationalResult {
    /// `√(ν(x) ρ(x⁻¹))` at the returned point.
    pub value: f64,
    pub argmin: AlgElement,
    pub iterations: usize,
}

/// Minimizes `√(ν(x) ρ(x⁻¹))` over invertible positive `x`.
pub fn variational_fidelity(nu: &PositiveForm, rho: &PositiveForm, mode: VariationalMode) -> Result<VariationalResult> {
    nu.algebra().ensure_same(rho.algebra())?;
    match mode {
        VariationalMode::Analytic => variational_analytic(nu, rho),
        VariationalMode::Iterative => Ok(variational_iterative(nu, rho, 10_000)),
    }
}

fn variational_analytic(nu: &PositiveForm, rho: &PositiveForm) -> Result<VariationalResult> {
    let alg = nu.algebra();
    let tol = *alg.tol();
    let mut xs = Vec::new();
    let mut nu_val = 0.0;
    let mut rho_val = 0.0;
    for (a, c) in nu.densities().iter().zip(rho.densities()) {
        let ea = eigh_psd(a, &tol)?;
        let ec = eigh_psd(c, &tol)?;
        if ea.positive_indices(&tol).len() < a.nrows() || ec.positive_indices(&tol).len() < c.nrows() {
            return Err(Error::SingularDensity);
        }
        let sa = hermitian_part(&ea.apply(|l| real(l.sqrt())));
        let sa_inv = hermitian_part(&ea.apply(|l| real(1.0 / l.sqrt())));
        let inner = hermitian_part(&(&sa * c * &sa));
        let m = pd_power(&inner, 0.5, &tol)?;
        let m_inv = pd_power(&inner, -0.5, &tol)?;
        let x = hermitian_part(&(&sa_inv * &m * &sa_inv));
        let x_inv = hermitian_part(&(&sa * &m_inv * &sa));
        nu_val += (a * &x).trace().re;
        rho_val += (c * &x_inv).trace().re;
        xs.push(x);
    }
    Ok(VariationalResult {
        value: (nu_val * rho_val).max(0.0).sqrt(),
        argmin: AlgElement::new(alg, xs)?,
        iterations: 0,
    })
}

/// Divided-difference kernel `(f(λ_j) - f(λ_k)) / (λ_j - λ_k)`.
fn loewner(values: &[f64], f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = values.len();
    DMatrix::from_fn(n, n, |j, k| {
        let (a, b) = (values[j], values[k]);
        if (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
            df(0.5 * (a + b))
        } else {
            (f(a) - f(b)) / (a - b)
        }
    })
}

struct ExpState {
    /// Blockwise eigendecompositions of `H`.
    eig: Vec<Eigh>,
    nu_val: f64,
    rho_val: f64,
}

impl ExpState {
    /// `None` once the iterate overflows.
    fn new(h: &[ComplexMatrix], nu: &PositiveForm, rho: &PositiveForm, tol: &TolerancePolicy) -> Option<Self> {
        let eig: Vec<Eigh> = h.iter().map(|b| eigh(b, tol).ok()).collect::<Option<_>>()?;
        let mut nu_val = 0.0;
        let mut rho_val = 0.0;
        for ((e, a), c) in eig.iter().zip(nu.densities()).zip(rho.densities()) {
            nu_val += (a * e.apply(|l| real(l.exp()))).trace().re;
            rho_val += (c * e.apply(|l| real((-l).exp()))).trace().re;
        }
        (nu_val.is_finite() && rho_val.is_finite()).then_some(Self { eig, nu_val, rho_val })
    }

    fn objective(&self) -> f64 {
        self.nu_val.ln() + self.rho_val.ln()
    }

    fn gradient(&self, nu: &PositiveForm, rho: &PositiveForm) -> Vec<ComplexMatrix> {
        self.eig
            .iter()
            .zip(nu.densities())
            .zip(rho.densities())
            .map(|((e, a), c)| {
                let u = &e.vectors;
                let at = u.adjoint() * a * u;
                let ct = u.adjoint() * c * u;
                let gp = loewner(&e.values, f64::exp, f64::exp);
                let gm = loewner(&e.values, |l| (-l).exp(), |l| -(-l).exp());
                let n = at.nrows();
                let mut g = zeros(n, n);
                for j in 0..n {
                    for k in 0..n {
                        g[(j, k)] = at[(j, k)] * (gp[(j, k)] / self.nu_val) + ct[(j, k)] * (gm[(j, k)] / self.rho_val);
                    }
                }
                hermitian_part(&(u * g * u.adjoint()))
            })
            .collect()
    }
}

fn variational_iterative(nu: &PositiveForm, rho: &PositiveForm, max_iter: usize) -> VariationalResult {
    let alg = nu.algebra();
    let tol = *alg.tol();
    let value_at = |s: &ExpState| (s.nu_val * s.rho_val).max(0.0).sqrt();
    let argmin_of = |s: &ExpState| {
        AlgElement::new(
            alg,
            s.eig
                .iter()
                .map(|e| hermitian_part(&e.apply(|l| real(l.exp()))))
                .collect(),
        )
        .expect("shapes follow the algebra")
    };

    let mut h: Vec<ComplexMatrix> = alg.dims().iter().map(|&n| zeros(n, n)).collect();
    let mut state = ExpState::new(&h, nu, rho, &tol).expect("H = 0 is finite");
    if !(state.nu_val > 0.0 && state.rho_val > 0.0) {
        // one of the forms vanishes and the infimum is zero
        return VariationalResult {
            value: 0.0,
            argmin: argmin_of(&state),
            iterations: 0,
        };
    }
    let mut step: f64 = 0.5;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let f0 = state.objective();
        let g = state.gradient(nu, rho);
        let g2: f64 = g.iter().map(|b| linalg::fro(b).powi(2)).sum();
        if g2 == 0.0 {
            break;
        }
        let mut trial_step = (step * 2.0).min(1e6);
        let mut accepted = None;
        while trial_step > 1e-20 {
            let trial: Vec<ComplexMatrix> = h.iter().zip(&g).map(|(x, d)| x - d.scale(trial_step)).collect();
            let Some(s) = ExpState::new(&trial, nu, rho, &tol) else {
                trial_step *= 0.5;
                continue;
            };
            if s.nu_val > 0.0 && s.rho_val > 0.0 && s.objective() <= f0 - 1e-4 * trial_step * g2 {
                accepted = Some((trial, s));
                break;
            }
            trial_step *= 0.5;
        }
        let Some((trial, s)) = accepted else { break };
        let v0 = value_at(&state);
        let v1 = value_at(&s);
        h = trial;
        state = s;
        step = trial_step;
        if (v0 - v1) <= 1e-12 * v0 {
            break;
        }
    }
    VariationalResult {
        value: value_at(&state),
        argmin: argmin_of(&state),
        iterations,
    }
}

/// Orthonormal basis of `ker a ∩ ran c`.
fn kernel_in_range(a: &ComplexMatrix, c_eig: &Eigh, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let ea = eigh_psd(a, tol)?;
    let ka = ea.columns(&ea.null_indices(tol));
    if ka.ncols() == 0 {
        return Ok(ka);
    }
    let nc = c_eig.columns(&c_eig.null_indices(tol));
    if nc.ncols() == 0 {
        return Ok(ka);
    }
    // vectors ka·z with no component in ker c
    let overlap = nc.adjoint() * &ka;
    let kz = linalg::kernel_basis(&overlap, &TolerancePolicy::new(1e-10, 1e-10)?);
    Ok(ka * kz)
}

/// Density of `ρ⊥`, the largest positive form below `ρ` orthogonal to `ν`,
/// as the shorted operator of `c` onto `ker a`:
/// `L (L* c⁺ L)^{-1} L*` with `L` spanning `ker a ∩ ran c`.
fn rho_perp_block(a: &ComplexMatrix, c: &ComplexMatrix, tol: &TolerancePolicy) -> Result<ComplexMatrix> {
    let n = c.nrows();
    let ec = eigh_psd(c, tol)?;
    let l = kernel_in_range(a, &ec, tol)?;
    if l.ncols() == 0 {
        return Ok(zeros(n, n));
    }
    let pos = ec.positive_indices(tol);
    let vs = ec.columns(&pos);
    // Y = Λ^{-1/2} Vs* L, so that Y*Y = L* c⁺ L
    let mut y = vs.adjoint() * &l;
    for (row, &i) in pos.iter().enumerate() {
        let s = 1.0 / ec.values[i].sqrt();
        for col in 0..y.ncols() {
            y[(row, col)] *= s;
        }
    }
    let r = y.qr().r();
    let x = r
        .adjoint()
        .solve_lower_triangular(&l.adjoint())
        .ok_or_else(|| Error::InternalInconsistency("singular shorted-operator factor".into()))?
        .adjoint();
    Ok(hermitian_part(&(&x * x.adjoint())))
}

pub fn rho_perp(nu: &PositiveForm, rho: &PositiveForm) -> Result<PositiveForm> {
    nu.algebra().ensure_same(rho.algebra())?;
    let tol = *nu.algebra().tol();
    let blocks = nu
        .densities()
        .iter()
        .zip(rho.densities())
        .map(|(a, c)| rho_perp_block(a, c, &tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(PositiveForm::new_unchecked(nu.algebra(), blocks))
}

/// `√c (s(c) - s(√c a √c)) √c`, the support-projection form of `ρ⊥`. Kept
/// as an independent cross-check; it loses relative accuracy when `c` has a
/// wide spectrum.
pub fn rho_perp_support_formula(nu: &PositiveForm, rho: &PositiveForm) -> Result<PositiveForm> {
    nu.algebra().ensure_same(rho.algebra())?;
    let tol = *nu.algebra().tol();
    let blocks = nu
        .densities()
        .iter()
        .zip(rho.densities())
        .map(|(a, c)| {
            let sc = sqrt_psd(c, &tol)?;
            let inner = hermitian_part(&(&sc * a * &sc));
            let proj = psd_support(c, &tol)? - psd_support(&inner, &tol)?;
            linalg::clip_psd(&hermitian_part(&(&sc * proj * &sc)), &tol)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PositiveForm::new_unchecked(nu.algebra(), blocks))
}

pub fn minimal_pair(nu: &PositiveForm, rho: &PositiveForm) -> Result<MinimalPairReport> {
    let rho_perp_f = rho_perp(nu, rho)?;
    let nu_perp_f = rho_perp(rho, nu)?;
    let nu_min = nu.sub(&nu_perp_f)?;
    let rho_min = rho.sub(&rho_perp_f)?;
    Ok(MinimalPairReport {
        nu_perp: nu_perp_f,
        rho_perp: rho_perp_f,
        nu_min,
        rho_min,
    })
}

/// `v_{ψ,ξ_ν}* ψ + ξ_{ρ⊥}` for a fibre element `ψ` of `ρ`.
pub fn optimal_vector_from(
    std: &StandardForm,
    nu: &PositiveForm,
    rho: &PositiveForm,
    psi: &HSVector,
) -> Result<HSVector> {
    let xi_nu = std.cone_rep(nu)?;
    let h = build_overlap(psi, &xi_nu)?;
    let head = right_act(&h.v.adjoint(), psi)?;
    let eta = std.cone_rep(&rho_perp(nu, rho)?)?;
    head.add(&eta)
}

/// The vector `ψ_Ω^ν(ρ)` in the fibre of `ρ` closest to `ξ_ν`.
pub fn optimal_vector(std: &StandardForm, nu: &PositiveForm, rho: &PositiveForm) -> Result<HSVector> {
    let xi_rho = std.cone_rep(rho)?;
    optimal_vector_from(std, nu, rho, &xi_rho)
}

/// Density `G` of the functional `g(x) = Σ tr(G_i x_i)`: `G = √c V* √a` with
/// `√a √c = V |√a √c|`.
pub fn g_functional(nu: &PositiveForm, rho: &PositiveForm) -> Result<AlgElement> {
    nu.algebra().ensure_same(rho.algebra())?;
    let tol = *nu.algebra().tol();
    let ra = roots(nu)?;
    let rc = roots(rho)?;
    let blocks = ra
        .iter()
        .zip(&rc)
        .map(|(a, c)| {
            let p = polar_left(&(a * c), &tol);
            c * p.v.adjoint() * a
        })
        .collect();
    AlgElement::new(nu.algebra(), blocks)
}

/// The same density read off `g(x) = ⟨x ξ_ρ, ψ_Ω^ρ(ν)⟩`, i.e. `ξ_ρ ψ*`.
pub fn g_functional_via_vectors(std: &StandardForm, nu: &PositiveForm, rho: &PositiveForm) -> Result<AlgElement> {
    let xi_rho = std.cone_rep(rho)?;
    let psi = optimal_vector(std, rho, nu)?;
    xi_rho.as_element().mul(&psi.as_element().adjoint())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommutationReport {
    pub commutes: bool,
    /// `‖ψ_Ω^ν(ρ) - ξ_ρ‖`.
    pub vector_gap: f64,
    /// Largest blockwise `‖[a, c]‖ / (‖a‖ ‖c‖)`.
    pub commutator: f64,
    /// `|d_B - ‖ξ_ν - ξ_ρ‖|`.
    pub distance_gap: f64,
}

/// Evaluates the three commutation criteria and returns their verdicts.
pub fn commutation_report(std: &StandardForm, nu: &PositiveForm, rho: &PositiveForm) -> Result<CommutationReport> {
    nu.algebra().ensure_same(rho.algebra())?;
    let xi_nu = std.cone_rep(nu)?;
    let xi_rho = std.cone_rep(rho)?;
    let psi0 = optimal_vector(std, nu, rho)?;
    let vector_gap = psi0.dist(&xi_rho)?;
    let commutator = nu
        .densities()
        .iter()
        .zip(rho.densities())
        .map(|(a, c)| {
            let s = op_norm(a) * op_norm(c);
            if s == 0.0 {
                0.0
            } else {
                op_norm(&(a * c - c * a)) / s
            }
        })
        .fold(0.0, f64::max);
    let d = bures_distance(nu, rho)?.distance;
    let distance_gap = (d - xi_nu.dist(&xi_rho)?).abs();
    let v = [vector_gap <= 1e-8, commutator <= 1e-10, distance_gap <= 1e-8];
    if v[0] != v[1] || v[1] != v[2] {
        return Err(Error::InconsistentCriteria(format!(
            "vector gap {vector_gap:.3e}, commutator {commutator:.3e}, distance gap {distance_gap:.3e}"
        )));
    }
    Ok(CommutationReport {
        commutes: v[0],
        vector_gap,
        commutator,
        distance_gap,
    })
}

pub fn commutes(std: &StandardForm, nu: &PositiveForm, rho: &PositiveForm) -> Result<bool> {
    Ok(commutation_report(std, nu, rho)?.commutes)
}

/// `j(ν|ρ) = ½ ‖J ψ - ψ‖²` with `ψ = ψ_Ω^ρ(ν)`.
pub fn skew_information(std: &StandardForm, nu: &PositiveForm, rho: &PositiveForm) -> Result<f64> {
    let psi = optimal_vector(std, rho, nu)?;
    let jpsi = std.j_op(&psi)?;
    Ok(0.5 * jpsi.sub(&psi)?.norm_sqr())
}

/// `x ξ_ρ` for faithful `ρ` and positive `x`; this is `ψ_Ω^ρ(ρ^x)` where
/// `ρ^x` has density `x c x`.
pub fn conjugated_form_vector(std: &StandardForm, rho: &PositiveForm, x: &AlgElement) -> Result<HSVector> {
    rho.require_faithful()?;
    let tol = *rho.algebra().tol();
    for b in x.blocks() {
        eigh_psd(b, &tol)?;
    }
    left_act(x, &std.cone_rep(rho)?)
}

/// Checks `d_B² = ‖ν‖₁ + ‖ρ‖₁ - 2√P` and `0 ≤ √P ≤ √(‖ν‖₁‖ρ‖₁)`.
pub fn report_residual(r: &BuresReport) -> f64 {
    let recon = (r.distance * r.distance - (r.nu_norm + r.rho_norm - 2.0 * r.fidelity)).abs();
    let upper = (r.fidelity - (r.nu_norm * r.rho_norm).sqrt()).max(0.0);
    let lower = (-r.fidelity).max(0.0);
    recon.max(upper).max(lower)
}

/// Value of `g(y* x)`.
pub fn g_eval(g: &AlgElement, x: &AlgElement, y: &AlgElement) -> Result<f64> {
    let yx = y.adjoint().mul(x)?;
    Ok(g.blocks()
        .iter()
        .zip(yx.blocks())
        .map(|(a, b)| (a * b).trace())
        .fold(linalg::ZERO, |s, t| s + t)
        .norm())
}

/// `ν(x)` as a real number, for positive `x`.
pub fn form_at(f: &PositiveForm, x: &AlgElement) -> Result<f64> {
    Ok(evaluate(f, x)?.re)
}

/// `⟨ξ_ν, ψ⟩` real part; a convenience for the attainment checks.
pub fn overlap_re(a: &HSVector, b: &HSVector) -> Result<f64> {
    Ok(hs_inner(a, b)?.re)
}

pub fn zero_form(alg: &Algebra) -> PositiveForm {
    PositiveForm::zero(alg)
}
