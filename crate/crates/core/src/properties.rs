//! Randomized property suites with worst-case residual reporting.
//!
//! Trial `t` uses seed `seed + t` and a single-block algebra of size
//! `dims[t % dims.len()]`; odd trials add a second block. Each property
//! records a residual per trial and passes when the worst one is within its
//! tolerance.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{centralizer_contains, conjugate_form, evaluate, mvn_precedes, AlgElement, Algebra, PositiveForm};
use crate::bures::{
    bures_distance, commutation_report, fidelity, g_eval, g_functional, g_functional_via_vectors, minimal_pair,
    optimal_vector, optimal_vector_from, report_residual, rho_perp, rho_perp_support_formula, skew_information,
    variational_fidelity, VariationalMode,
};
use crate::error::{Error, Result};
use crate::fibre::{alignment_gap, distance_to_fibre, implementing_isometry, relfaser_check};
use crate::linalg::{
    self, eigh, fro, hermitian_part, identity, min_eigenvalue, nuclear_norm, op_norm, pinv, polar_left, sqrt_psd,
    support_proj, Side, TolerancePolicy,
};
use crate::oracle::{ascend_unitary, brute_force_fidelity, largest_multiple_below};
use crate::overlap::{build_overlap, is_positive, positivity_by_trace};
use crate::random::*;
use crate::standard_form::{
    fibre_contains, fibre_sample_with, hs_inner, left_act, right_act, support_right, HSVector, StandardForm,
};
use crate::sweep::{sweep_row, NuMode, PsiMode};

pub const SUITES: [&str; 7] = ["polar", "cone", "bures", "perp", "commute", "fibre", "variational"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub worst_residual: f64,
    pub tolerance: f64,
    /// Seed of the trial that produced the worst residual.
    pub worst_seed: Option<u64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub properties: Vec<PropertyResult>,
    /// Errors raised by trials, with their seeds.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

/// Residuals collected in one trial, in a fixed order.
#[derive(Default)]
struct Checks(Vec<(&'static str, f64, f64)>);

impl Checks {
    fn le(&mut self, name: &'static str, residual: f64, tolerance: f64) {
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        self.0.push((name, r, tolerance));
    }

    /// `lhs ≤ rhs` with the violation as residual.
    fn ineq(&mut self, name: &'static str, lhs: f64, rhs: f64, slack: f64) {
        self.le(name, (lhs - rhs).max(0.0), slack);
    }

    fn holds(&mut self, name: &'static str, ok: bool) {
        self.le(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }
}

pub fn run_suite(name: &str, trials: usize, dims: &[usize], seed: u64, tol: TolerancePolicy) -> Result<SuiteReport> {
    let suite: fn(&mut Checks, &mut SeededRng, &Algebra) -> Result<()> = match name {
        "polar" => polar_suite,
        "cone" => cone_suite,
        "bures" => bures_suite,
        "perp" => perp_suite,
        "commute" => commute_suite,
        "fibre" => fibre_suite,
        "variational" => variational_suite,
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Domain("dims must be a nonempty list of positive sizes".into()));
    }
    let per_trial: Vec<(u64, Checks, Option<String>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_add(t as u64);
            let mut checks = Checks::default();
            let outcome = trial_algebra(dims, t, tol).and_then(|alg| {
                let mut rng = rng_from_seed(s);
                suite(&mut checks, &mut rng, &alg)
            });
            checks.holds("evaluates_without_error", outcome.is_ok());
            (s, checks, outcome.err().map(|e| format!("seed {s}: {e}")))
        })
        .collect();

    let mut properties: Vec<PropertyResult> = Vec::new();
    for (s, checks, _) in &per_trial {
        for &(name, residual, tolerance) in &checks.0 {
            let entry = match properties.iter_mut().find(|p| p.name == name) {
                Some(p) => p,
                None => {
                    properties.push(PropertyResult {
                        name: name.to_string(),
                        worst_residual: 0.0,
                        tolerance,
                        worst_seed: None,
                        passed: true,
                    });
                    properties.last_mut().expect("just pushed")
                }
            };
            if entry.worst_seed.is_none() || residual > entry.worst_residual {
                entry.worst_residual = residual;
                entry.worst_seed = Some(*s);
            }
            entry.passed &= residual <= tolerance;
        }
    }
    Ok(SuiteReport {
        suite: name.to_string(),
        trials,
        dims: dims.to_vec(),
        seed,
        passed: properties.iter().all(|p| p.passed),
        note: (trials == 0).then(|| "0 trials".to_string()),
        properties,
        errors: per_trial.into_iter().filter_map(|t| t.2).collect(),
    })
}

fn trial_algebra(dims: &[usize], t: usize, tol: TolerancePolicy) -> Result<Algebra> {
    let n = dims[t % dims.len()];
    if t % 2 == 1 {
        Algebra::with_policy(&[n, dims[(t / 2) % dims.len()]], tol)
    } else {
        Algebra::with_policy(&[n], tol)
    }
}

fn general_std(rng: &mut SeededRng, alg: &Algebra, psd: bool) -> Result<StandardForm> {
    StandardForm::new(HSVector::new(alg, random_omega_blocks(rng, alg, psd))?)
}

fn random_vector(rng: &mut SeededRng, alg: &Algebra) -> HSVector {
    HSVector::from_element(&random_element(rng, alg))
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

/// A random form `μ ≤ ν`: density `s √a q √a` with `0 ≤ q ≤ 1` and `‖q‖ = 1`.
fn random_part(rng: &mut SeededRng, nu: &PositiveForm, s: f64) -> Result<PositiveForm> {
    let tol = *nu.algebra().tol();
    let blocks = nu
        .densities()
        .iter()
        .map(|a| {
            let n = a.nrows();
            let q = random_density(rng, n, n);
            let q = q.unscale(op_norm(&q).max(f64::MIN_POSITIVE));
            let r = sqrt_psd(a, &tol)?;
            Ok(hermitian_part(&(&r * q * &r)).scale(s))
        })
        .collect::<Result<Vec<_>>>()?;
    PositiveForm::new(nu.algebra(), blocks)
}

fn mix(a: &PositiveForm, b: &PositiveForm, lambda: f64) -> Result<PositiveForm> {
    a.scale(lambda).add(&b.scale(1.0 - lambda))
}

fn polar_suite(c: &mut Checks, rng: &mut SeededRng, alg: &Algebra) -> Result<()> {
    let tol = *alg.tol();
    for &n in alg.dims() {
        let rank = rng.random_range(1..=n);
        let a = gaussian_matrix(rng, n, rank) * gaussian_matrix(rng, rank, n);
        let na = op_norm(&a);
        let p = polar_left(&a, &tol);
        c.le("polar_reconstruction", fro(&(&p.v * &p.abs - &a)) / na, 1e-9);
        c.le(
            "nuclear_norm_is_trace_abs",
            rel((nuclear_norm(&a) - linalg::trace(&p.abs).re).abs(), na),
            1e-10,
        );
        let vv = p.v.adjoint() * &p.v;
        c.le("polar_isometry_support", fro(&(&vv * &vv - &vv)), 1e-9);
        let sl = support_proj(&a, Side::Left, &tol);
        let sr = support_proj(&a, Side::Right, &tol);
        c.le("left_support_fixes", rel(fro(&(&sl * &a - &a)), na), 1e-10);
        c.le("right_support_fixes", rel(fro(&(&a * &sr - &a)), na), 1e-10);
        let ap = pinv(&a, &tol);
        let s = 1.0 + fro(&a) * fro(&ap);
        let pen = [
            fro(&(&a * &ap * &a - &a)) / fro(&a).max(1.0),
            fro(&(&ap * &a * &ap - &ap)) / fro(&ap).max(1.0),
            fro(&((&a * &ap).adjoint() - &a * &ap)) / s,
            fro(&((&ap * &a).adjoint() - &ap * &a)) / s,
        ];
        c.le("pinv_penrose", pen.iter().copied().fold(0.0, f64::max), 1e-9);
    }

    // trace forms are positive
    let nu = random_form(rng, alg, false);
    let x = random_element(rng, alg);
    let xx = x.adjoint().mul(&x)?;
    c.le(
        "form_positivity",
        rel((-evaluate(&nu, &xx)?.re).max(0.0), xx.norm()),
        1e-12,
    );

    // conjugation composes
    let a = random_element(rng, alg);
    let b = random_element(rng, alg);
    let lhs = conjugate_form(&conjugate_form(&nu, &a)?, &b)?;
    let rhs = conjugate_form(&nu, &b.mul(&a)?)?;
    let scale = a.norm() * b.norm();
    c.le(
        "conjugation_composes",
        lhs.as_element().sub(&rhs.as_element())?.fro() / (scale * scale).max(1.0),
        1e-10,
    );

    // Murray–von Neumann order
    let proj = |rng: &mut SeededRng| -> Result<AlgElement> {
        let blocks = alg
            .dims()
            .iter()
            .map(|&n| {
                let r = rng.random_range(0..=n);
                random_projection(rng, n, r)
            })
            .collect();
        AlgElement::new(alg, blocks)
    };
    let (p, q, r) = (proj(rng)?, proj(rng)?, proj(rng)?);
    c.holds("mvn_reflexive", mvn_precedes(&p, &p)?);
    if mvn_precedes(&p, &q)? && mvn_precedes(&q, &r)? {
        c.holds("mvn_transitive", mvn_precedes(&p, &r)?);
    }
    if mvn_precedes(&p, &q)? && mvn_precedes(&q, &p)? {
        c.holds("mvn_antisymmetric_up_to_equivalence", p.ranks() == q.ranks());
    }

    // overlap forms
    let rho = random_form(rng, alg, false);
    let psi = fibre_sample_with(&nu, rng)?;
    let phi = if rng.random_bool(0.5) {
        fibre_sample_with(&rho, rng)?
    } else {
        random_vector(rng, alg)
    };
    let h = build_overlap(&psi, &phi)?;
    let g = build_overlap(&phi, &psi)?;
    c.le("overlap_swap_symmetry", g.m.sub(&h.m.adjoint())?.fro(), 1e-12);
    c.le("overlap_swap_isometry", g.v.sub(&h.v.adjoint())?.fro(), 1e-9);
    c.holds("overlap_equivalent_supports", h.s_h.ranks() == g.s_h.ranks());
    let vvs = h.v.mul(&h.v.adjoint())?;
    c.le("overlap_support_of_abs", vvs.sub(&h.s_h)?.fro(), 1e-9);
    let y = random_element(rng, alg);
    let lhs = h.eval(&y)?;
    let rhs = h.eval_abs(&h.v.mul(&y)?)?;
    c.le("overlap_polar_identity", (lhs - rhs).norm() / y.norm().max(1.0), 1e-9);
    let w = random_unitary_element(rng, alg);
    let h2 = build_overlap(&right_act(&w, &psi)?, &phi)?;
    c.le("overlap_gauge_abs", h.abs_density.sub(&h2.abs_density)?.fro(), 1e-9);
    c.le("overlap_gauge_isometry", h2.v.sub(&h.v.mul(&w)?)?.fro(), 1e-8);
    let rotated = right_act(&h.v.adjoint(), &psi)?;
    c.le(
        "overlap_rotated_support",
        support_right(&rotated).sub(&h.s_h)?.fro(),
        1e-7,
    );
    c.holds("positivity_tests_agree", is_positive(&h) == positivity_by_trace(&h));
    Ok(())
}

fn cone_suite(c: &mut Checks, rng: &mut SeededRng, alg: &Algebra) -> Result<()> {
    let psd = rng.random_bool(0.25);
    let std = general_std(rng, alg, psd)?;
    let omega = std.omega().clone();
    let x = random_element(rng, alg);
    let y = random_element(rng, alg);
    let xi = random_vector(rng, alg);
    let eta = random_vector(rng, alg);
    let sc = xi.norm().max(1.0);

    let target = left_act(&x.adjoint(), &omega)?;
    let s = std.s_op(&left_act(&x, &omega)?)?;
    c.le("s_relation", rel(s.dist(&target)?, target.norm()), 1e-9);
    let target = right_act(&y.adjoint(), &omega)?;
    let f = std.f_op(&right_act(&y, &omega)?)?;
    c.le("f_relation", rel(f.dist(&target)?, target.norm()), 1e-9);
    let d = std.delta(&xi)?;
    let fs = std.f_op(&std.s_op(&xi)?)?;
    c.le("delta_is_f_s", rel(d.dist(&fs)?, d.norm()), 1e-9);
    // ‖S ξ‖² = ⟨Δ ξ, ξ⟩, i.e. S = J Δ^{1/2} in norm
    let sn = std.s_op(&xi)?.norm_sqr();
    c.le(
        "s_norm_is_delta_half",
        rel((sn - hs_inner(&d, &xi)?.re).abs(), sn),
        1e-9,
    );
    let jj = std.j_op(&std.j_op(&xi)?)?;
    c.le("j_involution", jj.dist(&xi)? / sc, 1e-9);
    let lhs = hs_inner(&std.j_op(&xi)?, &std.j_op(&eta)?)?;
    let rhs = hs_inner(&eta, &xi)?;
    c.le("j_antiunitary", (lhs - rhs).norm() / (sc * eta.norm().max(1.0)), 1e-9);
    c.le(
        "j_fixes_omega",
        rel(std.j_op(&omega)?.dist(&omega)?, omega.norm()),
        1e-9,
    );
    let t: f64 = rng.random_range(-2.0..2.0);
    let dt = std.delta_it(&xi, t)?;
    c.le("modular_flow_unitary", (dt.norm() - xi.norm()).abs() / sc, 1e-9);
    c.le(
        "modular_flow_fixes_omega",
        rel(std.delta_it(&omega, t)?.dist(&omega)?, omega.norm()),
        1e-9,
    );
    let jdj = std.j_op(&std.delta_it(&std.j_op(&xi)?, t)?)?;
    c.le("j_commutes_with_flow", jdj.dist(&dt)? / sc, 1e-9);
    let jxj = |v: &HSVector| -> Result<HSVector> { std.j_op(&left_act(&x, &std.j_op(v)?)?) };
    let a = jxj(&left_act(&y, &xi)?)?;
    let b = left_act(&y, &jxj(&xi)?)?;
    c.le("tomita_commutant", rel(a.dist(&b)?, a.norm()), 1e-9);

    // natural cone
    let nu = random_form(rng, alg, false);
    let rho = random_form(rng, alg, false);
    let xn = std.cone_rep(&nu)?;
    let xr = std.cone_rep(&rho)?;
    c.holds("cone_rep_in_cone", std.cone_contains(&xn) && std.cone_contains(&xr));
    c.holds("cone_rep_in_fibre", fibre_contains(&xn, &nu));
    c.le("cone_rep_j_fixed", std.j_op(&xn)?.dist(&xn)?, 1e-9);
    c.le("cone_self_dual", (-hs_inner(&xn, &xr)?.re).max(0.0), 1e-9);
    let dd = xn.dist(&xr)?;
    let total: f64 = nu
        .densities()
        .iter()
        .zip(rho.densities())
        .map(|(a, b)| nuclear_norm(&(a - b)))
        .sum();
    c.ineq("cone_lower_estimate", dd * dd, total, 1e-9);
    c.ineq("cone_upper_estimate", total, dd * xn.add(&xr)?.norm(), 1e-9);
    let h = xn.sub(&xr)?;
    let (p, m) = std.cone_split(&h)?;
    c.holds(
        "cone_split_parts_in_cone",
        std.cone_contains(&p) && std.cone_contains(&m),
    );
    c.le("cone_split_orthogonal", hs_inner(&p, &m)?.norm(), 1e-10);
    c.le("cone_split_reconstructs", p.sub(&m)?.dist(&h)?, 1e-10);

    // change of reference vector
    let other_omega = HSVector::new(alg, random_omega_blocks(rng, alg, false))?;
    let other = StandardForm::new(other_omega.clone())?;
    let u = std.cone_unitary(&other_omega)?;
    let moved = right_act(&u, &xn)?;
    c.le("cone_unitary_carries_cone", moved.dist(&other.cone_rep(&nu)?)?, 1e-9);
    c.holds("cone_unitary_image_in_cone", other.cone_contains(&moved));
    let w = random_unitary_element(rng, alg);
    let lhs = std.cone_unitary(&right_act(&w, &other_omega)?)?;
    c.le("cone_unitary_chain_rule", lhs.sub(&u.mul(&w)?)?.fro(), 1e-9);
    let back = other.cone_unitary(std.omega())?;
    c.le(
        "cone_unitary_inverse",
        u.mul(&back)?.sub(&AlgElement::identity(alg))?.fro(),
        1e-9,
    );
    Ok(())
}

fn bures_suite(c: &mut Checks, rng: &mut SeededRng, alg: &Algebra) -> Result<()> {
    let std = general_std(rng, alg, false)?;
    let full = rng.random_bool(0.3);
    let nu = random_form(rng, alg, full);
    let rho = random_form(rng, alg, false);
    let report = bures_distance(&nu, &rho)?;
    c.le("distance_reconstruction", report_residual(&report), 1e-10);
    let brute = brute_force_fidelity(&nu, &rho, rng, 2)?;
    c.le("fidelity_matches_brute_force", (brute - report.fidelity).abs(), 1e-6);

    let psi0 = optimal_vector(&std, &nu, &rho)?;
    let xi_nu = std.cone_rep(&nu)?;
    c.holds("optimal_vector_in_fibre", fibre_contains(&psi0, &rho));
    c.le("attainment", (psi0.dist(&xi_nu)? - report.distance).abs(), 1e-8);
    let h = build_overlap(&psi0, &xi_nu)?;
    c.holds("attaining_overlap_positive", is_positive(&h) && positivity_by_trace(&h));
    let psi = fibre_sample_with(&rho, rng)?;
    c.le(
        "optimal_vector_seed_independent",
        optimal_vector_from(&std, &nu, &rho, &psi)?.dist(&psi0)?,
        1e-8,
    );

    // superadditivity of P on splits
    let (s1, s2) = (rng.random(), rng.random());
    let mu = random_part(rng, &nu, s1)?;
    let sigma = random_part(rng, &rho, s2)?;
    let p = report.fidelity.powi(2);
    let p1 = fidelity(&mu, &sigma)?.powi(2);
    let p2 = fidelity(&nu.sub(&mu)?, &rho.sub(&sigma)?)?.powi(2);
    c.ineq("superadditivity", p1 + p2, p, 1e-9);

    // joint convexity of d_B² and concavity of √P
    let nu2 = random_form(rng, alg, false);
    let rho2 = random_form(rng, alg, false);
    let lambda: f64 = rng.random();
    let d1 = report.distance.powi(2);
    let r2 = bures_distance(&nu2, &rho2)?;
    let mixed = bures_distance(&mix(&nu, &nu2, lambda)?, &mix(&rho, &rho2, lambda)?)?;
    c.ineq(
        "joint_convexity",
        mixed.distance.powi(2),
        lambda * d1 + (1.0 - lambda) * r2.distance.powi(2),
        1e-9,
    );
    c.ineq(
        "joint_concavity",
        lambda * report.fidelity + (1.0 - lambda) * r2.fidelity,
        mixed.fidelity,
        1e-9,
    );

    // the functional g
    let g = g_functional(&nu, &rho)?;
    let g1: f64 = g.blocks().iter().map(|b| b.trace().re).sum();
    c.le("g_at_one", (g1 - report.fidelity).abs(), 1e-9);
    c.le(
        "g_two_routes",
        g.sub(&g_functional_via_vectors(&std, &nu, &rho)?)?.fro(),
        1e-9,
    );
    let gs = g_functional(&rho, &nu)?;
    c.le("g_swap_is_adjoint", gs.sub(&g.adjoint())?.fro(), 1e-9);
    let mp = minimal_pair(&nu, &rho)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_element(rng, alg);
        let y = random_element(rng, alg);
        let lhs = g_eval(&g, &x, &y)?.powi(2);
        let yy = y.adjoint().mul(&y)?;
        let xx = x.adjoint().mul(&x)?;
        let rhs = evaluate(&mp.nu_min, &yy)?.re * evaluate(&mp.rho_min, &xx)?.re;
        worst = worst.max((lhs - rhs) / rhs.max(1.0));
    }
    c.le("g_cauchy_schwarz", worst.max(0.0), 1e-9);
    Ok(())
}

fn perp_suite(c: &mut Checks, rng: &mut SeededRng, alg: &Algebra) -> Result<()> {
    let tol = *alg.tol();
    let nu = random_form(rng, alg, false);
    let rho = random_form(rng, alg, false);
    let perp = rho_perp(&nu, &rho)?;
    let alt = rho_perp_support_formula(&nu, &rho)?;
    c.le(
        "perp_support_formula",
        perp.as_element().sub(&alt.as_element())?.fro(),
        1e-8,
    );
    let below = rho.sub(&perp);
    c.holds("perp_below_rho", below.is_ok());
    let sn = nu.support()?;
    c.le("perp_orthogonal_to_nu", sn.mul(&perp.as_element())?.fro(), 1e-9);

    // maximality against σ ≤ ρ supported off s(ν)
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        for ((a, cc), pb) in nu.densities().iter().zip(rho.densities()).zip(perp.densities()) {
            let ea = eigh(&hermitian_part(a), &tol)?;
            let k = ea.columns(&ea.null_indices(&tol));
            if k.ncols() == 0 {
                continue;
            }
            let g = gaussian_matrix(rng, k.ncols(), k.ncols());
            let tau = hermitian_part(&(&k * &g * g.adjoint() * k.adjoint()));
            let t = largest_multiple_below(cc, &tau);
            let r: f64 = if rng.random_bool(0.5) { 1.0 } else { rng.random() };
            let sigma = tau.scale(t * r);
            worst = worst.max(-min_eigenvalue(&hermitian_part(&(pb - sigma))));
        }
    }
    c.le("perp_maximality", worst.max(0.0), 1e-8);

    // central support: ν on spectral subspaces of c
    let rho_f = random_form(rng, alg, true);
    let mut blocks = Vec::new();
    for cc in rho_f.densities() {
        let n = cc.nrows();
        let e = eigh(cc, &tol)?;
        let idx: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        let b = e.columns(&idx);
        let w = random_density(rng, idx.len(), idx.len());
        blocks.push(hermitian_part(&(&b * w * b.adjoint())));
    }
    let nu_c = PositiveForm::new(alg, blocks)?;
    let s = nu_c.support()?;
    c.holds("central_support_in_centralizer", centralizer_contains(&rho_f, &s)?);
    let sp = s.complement();
    let expected = sp.mul(&rho_f.as_element())?.mul(&sp)?;
    c.le(
        "perp_central_support",
        rho_perp(&nu_c, &rho_f)?.as_element().sub(&expected)?.fro(),
        1e-9,
    );

    // the truncated family
    let n = alg.dims().iter().sum::<usize>() + 2;
    let beta: f64 = rng.random_range(0.2..0.9);
    let row = sweep_row(beta, n, NuMode::Projection, PsiMode::RandomPhase, rng.random(), tol)?;
    c.le(
        "perp_schur_oracle",
        (row.gamma - row.gamma_oracle).abs() / row.gamma_oracle,
        1e-9,
    );

    // minimal pairs
    let mp = minimal_pair(&nu, &rho)?;
    let f = fidelity(&nu, &rho)?;
    let fm = fidelity(&mp.nu_min, &mp.rho_min)?;
    c.le("minimal_pair_preserves_p", (f * f - fm * fm).abs(), 1e-9);
    let d = bures_distance(&nu, &rho)?.distance;
    let dm = bures_distance(&mp.nu_min, &mp.rho_min)?.distance;
    let dp = bures_distance(&mp.nu_perp, &mp.rho_perp)?.distance;
    c.le("minimal_pair_distance_split", (d * d - dm * dm - dp * dp).abs(), 1e-8);
    c.le("minimal_pair_perp_vanishes", rho_perp(&nu, &mp.rho_min)?.norm1(), 1e-8);
    c.le(
        "minimal_pair_perp_consistent",
        rho_perp(&mp.rho_min, &nu)?
            .as_element()
            .sub(&mp.nu_perp.as_element())?
            .fro(),
        1e-8,
    );
    // strict decrease under any decrement of the minimal pair
    if fm > 1e-6 {
        let mut worst: f64 = f64::NEG_INFINITY;
        for side in 0..2 {
            let (base, fixed) = if side == 0 {
                (&mp.nu_min, &mp.rho_min)
            } else {
                (&mp.rho_min, &mp.nu_min)
            };
            if base.norm1() <= 1e-9 {
                continue;
            }
            let k = rng.random_range(0.1..0.5);
            let dec = random_part(rng, base, k)?;
            let reduced = base.sub(&dec)?;
            let fr = fidelity(&reduced, fixed)?;
            worst = worst.max(fr * fr - fm * fm);
        }
        if worst.is_finite() {
            c.le("minimal_pair_unique", (worst + 1e-9).max(0.0), 0.0);
        }
    }

    // attainers of the distance
    let std = general_std(rng, alg, false)?;
    let xi_nu = std.cone_rep(&nu)?;
    let psi0 = optimal_vector(&std, &nu, &rho)?;
    let d = bures_distance(&nu, &rho)?.distance;
    if perp.norm1() <= 1e-12 {
        // unique attainer: maximize Re⟨ξ_ρ W, ξ_ν⟩ over unitaries W
        let xi_rho = std.cone_rep(&rho)?;
        let mut blocks = Vec::new();
        for (xr, xn) in xi_rho.blocks().iter().zip(xi_nu.blocks()) {
            let n = xr.nrows();
            let m = xn.adjoint() * xr;
            let (_, w) = ascend_unitary(&m, haar_unitary(rng, n), 20_000);
            blocks.push(xr * w);
        }
        let found = HSVector::new(alg, blocks)?;
        if (found.dist(&xi_nu)? - d).abs() <= 1e-12 {
            c.le("unique_attainer", found.dist(&psi0)?, 1e-7);
        }
    } else {
        let h = build_overlap(&psi0, &xi_nu)?;
        let s = &h.s_h;
        let phase = s.sub(&s.complement())?;
        let flipped = right_act(&phase, &psi0)?;
        c.holds("phase_family_in_fibre", fibre_contains(&flipped, &rho));
        c.le("phase_family_attains", (flipped.dist(&xi_nu)? - d).abs(), 1e-8);
        let gap = flipped.dist(&psi0)?;
        c.le("phase_family_distinct", (gap - 2.0 * perp.norm1().sqrt()).abs(), 1e-8);
    }

    // commuting pairs with faithful ρ: s(ν) lies in the centralizer
    let mut a_blocks = Vec::new();
    let mut c_blocks = Vec::new();
    for &n in alg.dims() {
        let (a, _) = commuting_densities(rng, n, 0.4);
        let e = eigh(&hermitian_part(&a), &tol)?;
        let mut d = linalg::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = linalg::real(rng.random::<f64>() + 0.05);
        }
        c_blocks.push(hermitian_part(&(&e.vectors * d * e.vectors.adjoint())));
        a_blocks.push(a);
    }
    let nu_k = PositiveForm::new(alg, a_blocks)?;
    let rho_k = PositiveForm::new(alg, c_blocks)?;
    let sk = nu_k.support()?;
    let comm = sk
        .blocks()
        .iter()
        .zip(rho_k.densities())
        .map(|(p, cc)| fro(&(p * cc - cc * p)))
        .fold(0.0, f64::max);
    c.le("commuting_support_in_centralizer", comm, 1e-9);
    Ok(())
}

fn commute_suite(c: &mut Checks, rng: &mut SeededRng, alg: &Algebra) -> Result<()> {
    let std = StandardForm::tracial(alg);
    let commuting = rng.random_bool(0.5);
    let (nu, rho) = if commuting {
        random_commuting_pair(rng, alg, 0.3)
    } else if rng.random_bool(0.5) {
        (random_form(rng, alg, false), random_form(rng, alg, false))
    } else {
        // ρ^x for non-central x
        let rho = random_form(rng, alg, true);
        let x = random_invertible_positive(rng, alg, 0.1);
        (conjugate_form(&rho, &x)?, rho)
    };
    let r1 = commutation_report(&std, &nu, &rho);
    let r2 = commutation_report(&std, &rho, &nu);
    c.holds("criteria_agree", r1.is_ok() && r2.is_ok());
    if let (Ok(a), Ok(b)) = (&r1, &r2) {
        c.holds("commutation_symmetric", a.commutes == b.commutes);
        if commuting {
            c.holds("commuting_construction_commutes", a.commutes);
        }
    }
    let j = skew_information(&std, &nu, &rho)?;
    if commuting {
        c.le("skew_vanishes_when_commuting", j.abs(), 1e-10);
    }
    c.ineq("skew_bounded", -j, 0.0, 1e-12);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let other = general_std(rng, alg, false)?;
        worst = worst.max((skew_information(&other, &nu, &rho)? - j).abs());
    }
    c.le("skew_omega_independent", worst, 1e-8);
    Ok(())
}

fn fibre_suite(c: &mut Checks, rng: &mut SeededRng, alg: &Algebra) -> Result<()> {
    let psd = rng.random_bool(0.25);
    let std = general_std(rng, alg, psd)?;
    let full = rng.random_bool(0.3);
    let nu = random_form(rng, alg, full);
    let rho = random_form(rng, alg, false);
    let d = bures_distance(&nu, &rho)?.distance;
    let faithful_perp = rho_perp(&nu, &rho)?.norm1() <= 1e-12;
    let mut inside = 0;
    let samples = 10;
    for _ in 0..samples {
        let chi = fibre_sample_with(&nu, rng)?;
        c.le(
            "sample_distance_is_bures",
            (distance_to_fibre(&chi, &rho)? - d).abs(),
            1e-8,
        );
        c.le("sample_on_unitary_orbit", alignment_gap(&chi, &nu)?, 1e-8);
        let u = implementing_isometry(&std, &nu, &chi)?;
        match relfaser_check(&std, &nu, &rho, &u) {
            Ok(r) => {
                c.holds("criteria_agree", true);
                c.le(
                    "distance_excess",
                    (r.direct_distance - r.global_distance).max(0.0),
                    1e-8,
                );
                c.holds(
                    "extension_matches_rank_gap",
                    r.extension_built == r.rank_gap.iter().all(|&g| g <= 0),
                );
                inside += r.in_relative_fibre as usize;
            }
            Err(Error::InternalInconsistency(_)) => c.holds("criteria_agree", false),
            Err(e) => return Err(e),
        }
    }
    c.le("fraction_in_relative_fibre", 1.0 - inside as f64 / samples as f64, 0.0);
    if faithful_perp {
        c.holds("no_perp_all_members", inside == samples);
    }
    Ok(())
}

fn variational_suite(c: &mut Checks, rng: &mut SeededRng, alg: &Algebra) -> Result<()> {
    let nu = random_form(rng, alg, true);
    let rho = random_form(rng, alg, true);
    let f = fidelity(&nu, &rho)?;
    let r = variational_fidelity(&nu, &rho, VariationalMode::Analytic)?;
    c.le("analytic_optimum", (r.value - f).abs(), 1e-9);
    let x = &r.argmin;
    let inv = x.try_map(|b| Ok(pinv(b, alg.tol())))?;
    c.le(
        "analytic_balance",
        (evaluate(&nu, x)?.re - evaluate(&rho, &inv)?.re).abs(),
        1e-9,
    );

    let general = (random_form(rng, alg, false), random_form(rng, alg, false));
    let p = fidelity(&general.0, &general.1)?.powi(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let shift = 10f64.powf(rng.random_range(-3.0..0.0));
        let x = random_invertible_positive(rng, alg, shift);
        let xi = x.try_map(|b| Ok(b.clone().try_inverse().unwrap_or_else(|| identity(b.nrows()))))?;
        let val = evaluate(&general.0, &x)?.re * evaluate(&general.1, &xi)?.re;
        worst = worst.max(p - val);
    }
    c.le("variational_inequality", worst.max(0.0), 1e-10);

    let it = variational_fidelity(&nu, &rho, VariationalMode::Iterative)?;
    c.le("iterative_optimum", (it.value - f).abs(), 1e-6);
    c.ineq("iterative_above_fidelity", f, it.value, 1e-10);
    Ok(())
}
