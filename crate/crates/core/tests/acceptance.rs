//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use bures_core::bures::{g_eval, g_functional_via_vectors, report_residual, rho_perp_support_formula};
use bures_core::linalg::{eigh, hermitian_part, min_eigenvalue, TolerancePolicy};
use bures_core::oracle::{brute_force_fidelity, largest_multiple_below};
use bures_core::properties::run_suite;
use bures_core::random::*;
use bures_core::sweep::{gamma_oracle, sweep, sweep_row, NuMode, PsiMode};
use bures_core::*;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn single(n: usize) -> Algebra {
    Algebra::new(&[n]).unwrap()
}

/// Algebras cycling through the acceptance dimensions, with a two-block
/// algebra every fifth draw.
fn algebra_for(k: usize) -> Algebra {
    const DIMS: [usize; 4] = [2, 3, 4, 6];
    if k % 5 == 4 {
        Algebra::new(&[DIMS[k % 4], DIMS[(k / 5) % 4]]).unwrap()
    } else {
        single(DIMS[k % 4])
    }
}

fn general_std(rng: &mut SeededRng, alg: &Algebra) -> StandardForm {
    StandardForm::new(HSVector::new(alg, random_omega_blocks(rng, alg, false)).unwrap()).unwrap()
}

fn fidelity_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for k in 0..500 {
        let mut rng = rng_from_seed(1000 + k as u64);
        let alg = algebra_for(k);
        let full = k % 2 == 0;
        let nu = random_form(&mut rng, &alg, full);
        let rho = random_form(&mut rng, &alg, false);
        let r = bures_distance(&nu, &rho).unwrap();
        recon = recon.max(report_residual(&r));
        let brute = brute_force_fidelity(&nu, &rho, &mut rng, 2).unwrap();
        worst = worst.max((brute - r.fidelity).abs());
    }
    outcome(
        worst <= 1e-6 && recon <= 1e-10,
        format!("500 pairs, max |closed form - brute force| = {worst:.2e}"),
    )
}

fn reconstruction() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..2000 {
        let mut rng = rng_from_seed(2000 + k as u64);
        let alg = algebra_for(k);
        let (nu, rho) = if k % 3 == 0 {
            random_commuting_pair(&mut rng, &alg, 0.3)
        } else {
            (
                random_form(&mut rng, &alg, k % 2 == 0),
                random_form(&mut rng, &alg, false),
            )
        };
        worst = worst.max(report_residual(&bures_distance(&nu, &rho).unwrap()));
    }
    outcome(worst <= 1e-10, format!("2000 pairs, max residual {worst:.2e}"))
}

fn variational() -> Outcome {
    let mut analytic: f64 = 0.0;
    for k in 0..200 {
        let mut rng = rng_from_seed(3000 + k as u64);
        let alg = algebra_for(k);
        let nu = random_form(&mut rng, &alg, true);
        let rho = random_form(&mut rng, &alg, true);
        let f = fidelity(&nu, &rho).unwrap();
        let r = variational_fidelity(&nu, &rho, VariationalMode::Analytic).unwrap();
        analytic = analytic.max((r.value - f).abs());
    }

    let mut violation: f64 = 0.0;
    let mut samples = 0usize;
    for k in 0..100 {
        let mut rng = rng_from_seed(3500 + k as u64);
        let alg = algebra_for(k);
        let nu = random_form(&mut rng, &alg, false);
        let rho = random_form(&mut rng, &alg, false);
        let p = fidelity(&nu, &rho).unwrap().powi(2);
        for _ in 0..1000 {
            let shift = 10f64.powf(rng.random_range(-3.0..0.5));
            let x = random_invertible_positive(&mut rng, &alg, shift);
            let xi = x.map(|b| b.clone().try_inverse().unwrap());
            let val = evaluate(&nu, &x).unwrap().re * evaluate(&rho, &xi).unwrap().re;
            violation = violation.max(p - val);
            samples += 1;
        }
    }

    let mut iterative: f64 = 0.0;
    for k in 0..50 {
        let mut rng = rng_from_seed(3900 + k as u64);
        let alg = algebra_for(k);
        let nu = random_form(&mut rng, &alg, true);
        let rho = random_form(&mut rng, &alg, true);
        let f = fidelity(&nu, &rho).unwrap();
        let r = variational_fidelity(&nu, &rho, VariationalMode::Iterative).unwrap();
        iterative = iterative.max((r.value - f).abs());
    }
    outcome(
        analytic <= 1e-9 && violation <= 1e-10 && iterative <= 1e-6 && samples == 100_000,
        format!(
            "analytic {analytic:.2e} (200), inequality violation {:.2e} ({samples}), iterative {iterative:.2e} (50)",
            violation.max(0.0)
        ),
    )
}

fn attainment() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut positivity_failures = 0;
    for k in 0..500 {
        let mut rng = rng_from_seed(4000 + k as u64);
        let alg = algebra_for(k);
        let std = general_std(&mut rng, &alg);
        let nu = random_form(&mut rng, &alg, k % 3 == 0);
        let rho = random_form(&mut rng, &alg, false);
        let d = bures_distance(&nu, &rho).unwrap().distance;
        let psi0 = optimal_vector(&std, &nu, &rho).unwrap();
        let xi_nu = std.cone_rep(&nu).unwrap();
        worst = worst.max((psi0.dist(&xi_nu).unwrap() - d).abs());
        if !fibre_contains(&psi0, &rho) {
            worst = f64::INFINITY;
        }
        let h = build_overlap(&psi0, &xi_nu).unwrap();
        let a = is_positive(&h);
        let b = bures_core::overlap::positivity_by_trace(&h);
        if !(a && b) {
            positivity_failures += 1;
        }
    }
    outcome(
        worst <= 1e-8 && positivity_failures == 0,
        format!("500 pairs, max |‖ψ₀ - ξ_ν‖ - d_B| = {worst:.2e}, positivity failures {positivity_failures}"),
    )
}

fn perp() -> Outcome {
    let tol = TolerancePolicy::default();
    // truncated family
    let mut schur: f64 = 0.0;
    let r = sweep_row(0.5, 10, NuMode::Projection, PsiMode::Uniform, 0, tol).unwrap();
    schur = schur.max((r.gamma - 0.5 / 1023.0).abs() / (0.5 / 1023.0));
    for (i, beta) in [0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
        for n in [2, 5, 12, 24] {
            for (nu_mode, psi_mode) in [
                (NuMode::Projection, PsiMode::Uniform),
                (NuMode::Projection, PsiMode::RandomPhase),
                (NuMode::Random, PsiMode::RandomPhase),
            ] {
                let r = sweep_row(beta, n, nu_mode, psi_mode, i as u64, tol).unwrap();
                schur = schur.max((r.gamma - r.gamma_oracle).abs() / r.gamma_oracle);
            }
        }
    }

    // supports in the centralizer
    let mut conperp: f64 = 0.0;
    for k in 0..100 {
        let mut rng = rng_from_seed(5000 + k as u64);
        let alg = algebra_for(k);
        let rho = random_form(&mut rng, &alg, true);
        let mut blocks = Vec::new();
        for c in rho.densities() {
            let n = c.nrows();
            let e = eigh(c, &tol).unwrap();
            let idx: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            let b = e.columns(&idx);
            let w = random_density(&mut rng, idx.len(), idx.len());
            blocks.push(hermitian_part(&(&b * w * b.adjoint())));
        }
        let nu = PositiveForm::new(&alg, blocks).unwrap();
        let s = nu.support().unwrap();
        assert!(centralizer_contains(&rho, &s).unwrap());
        let sp = s.complement();
        let expected = sp.mul(&rho.as_element()).unwrap().mul(&sp).unwrap();
        let got = rho_perp(&nu, &rho).unwrap();
        conperp = conperp.max(got.as_element().sub(&expected).unwrap().fro());
    }

    // maximality
    let mut excess: f64 = 0.0;
    let mut sampled = 0;
    for k in 0..30 {
        let mut rng = rng_from_seed(5500 + k as u64);
        let alg = algebra_for(k);
        let nu = random_form(&mut rng, &alg, false);
        let rho = random_form(&mut rng, &alg, false);
        let perp = rho_perp(&nu, &rho).unwrap();
        let alt = rho_perp_support_formula(&nu, &rho).unwrap();
        conperp = conperp.max(perp.as_element().sub(&alt.as_element()).unwrap().fro() * 0.1);
        for _ in 0..100 {
            for ((a, c), pb) in nu.densities().iter().zip(rho.densities()).zip(perp.densities()) {
                let e = eigh(&hermitian_part(a), &tol).unwrap();
                let kb = e.columns(&e.null_indices(&tol));
                if kb.ncols() == 0 {
                    continue;
                }
                let g = gaussian_matrix(&mut rng, kb.ncols(), kb.ncols());
                let tau = hermitian_part(&(&kb * &g * g.adjoint() * kb.adjoint()));
                let t = largest_multiple_below(c, &tau);
                let scale: f64 = if rng.random_bool(0.5) { 1.0 } else { rng.random() };
                excess = excess.max(-min_eigenvalue(&hermitian_part(&(pb - tau.scale(t * scale)))));
                sampled += 1;
            }
        }
    }
    outcome(
        schur <= 1e-9 && conperp <= 1e-9 && excess <= 1e-8,
        format!(
            "Schur oracle rel {schur:.2e}, centralizer support {conperp:.2e}, maximality excess {:.2e} ({sampled} σ)",
            excess.max(0.0)
        ),
    )
}

fn minimal_pairs() -> Outcome {
    let mut identities: f64 = 0.0;
    let mut preserve: f64 = 0.0;
    for k in 0..300 {
        let mut rng = rng_from_seed(6000 + k as u64);
        let alg = algebra_for(k);
        let nu = random_form(&mut rng, &alg, false);
        let rho = random_form(&mut rng, &alg, false);
        let mp = minimal_pair(&nu, &rho).unwrap();
        let f = fidelity(&nu, &rho).unwrap();
        let fm = fidelity(&mp.nu_min, &mp.rho_min).unwrap();
        preserve = preserve.max((f * f - fm * fm).abs());
        let d = bures_distance(&nu, &rho).unwrap().distance;
        let dm = bures_distance(&mp.nu_min, &mp.rho_min).unwrap().distance;
        let dp = bures_distance(&mp.nu_perp, &mp.rho_perp).unwrap().distance;
        identities = identities.max((d * d - dm * dm - dp * dp).abs());
        identities = identities.max(rho_perp(&nu, &mp.rho_min).unwrap().norm1());
        let again = rho_perp(&mp.rho_min, &nu).unwrap();
        identities = identities.max(again.as_element().sub(&mp.nu_perp.as_element()).unwrap().fro());
    }
    outcome(
        identities <= 1e-8 && preserve <= 1e-9,
        format!("300 pairs, identities {identities:.2e}, P preserved {preserve:.2e}"),
    )
}

fn g_functional_check() -> Outcome {
    let mut a: f64 = 0.0;
    let mut b: f64 = 0.0;
    let mut sym: f64 = 0.0;
    for k in 0..50 {
        let mut rng = rng_from_seed(7000 + k as u64);
        let alg = algebra_for(k);
        let std = general_std(&mut rng, &alg);
        let nu = random_form(&mut rng, &alg, false);
        let rho = random_form(&mut rng, &alg, false);
        let g = g_functional(&nu, &rho).unwrap();
        let f = fidelity(&nu, &rho).unwrap();
        let g1: f64 = g.blocks().iter().map(|m| m.trace().re).sum();
        a = a.max((g1 - f).abs());
        let mp = minimal_pair(&nu, &rho).unwrap();
        for _ in 0..200 {
            let x = random_element(&mut rng, &alg);
            let y = random_element(&mut rng, &alg);
            let lhs = g_eval(&g, &x, &y).unwrap().powi(2);
            let yy = y.adjoint().mul(&y).unwrap();
            let xx = x.adjoint().mul(&x).unwrap();
            let rhs = evaluate(&mp.nu_min, &yy).unwrap().re * evaluate(&mp.rho_min, &xx).unwrap().re;
            b = b.max((lhs - rhs) / rhs.max(1.0));
        }
        sym = sym.max(
            g.sub(&g_functional_via_vectors(&std, &nu, &rho).unwrap())
                .unwrap()
                .fro(),
        );
        let swapped = g_functional(&rho, &nu).unwrap();
        sym = sym.max(swapped.sub(&g.adjoint()).unwrap().fro());
    }
    outcome(
        a <= 1e-9 && b <= 1e-9 && sym <= 1e-9,
        format!(
            "(a) {a:.2e}, (b) {:.2e} over 10000 samples, symmetry {sym:.2e}",
            b.max(0.0)
        ),
    )
}

fn commutation() -> Outcome {
    let mut disagreements = 0;
    let mut asymmetric = 0;
    let mut wrong_verdict = 0;
    let mut commuting_seen = 0;
    for k in 0..500 {
        let mut rng = rng_from_seed(8000 + k as u64);
        let alg = algebra_for(k);
        let std = StandardForm::tracial(&alg);
        let kind = k % 3;
        let (nu, rho) = match kind {
            0 => random_commuting_pair(&mut rng, &alg, 0.3),
            1 => (random_form(&mut rng, &alg, false), random_form(&mut rng, &alg, false)),
            _ => {
                let rho = random_form(&mut rng, &alg, true);
                let x = random_invertible_positive(&mut rng, &alg, 0.1);
                (conjugate_form(&rho, &x).unwrap(), rho)
            }
        };
        match (commutation_report(&std, &nu, &rho), commutation_report(&std, &rho, &nu)) {
            (Ok(a), Ok(b)) => {
                if a.commutes != b.commutes {
                    asymmetric += 1;
                }
                if kind == 0 {
                    commuting_seen += 1;
                    if !a.commutes {
                        wrong_verdict += 1;
                    }
                }
            }
            _ => disagreements += 1,
        }
    }
    outcome(
        disagreements == 0 && asymmetric == 0 && wrong_verdict == 0,
        format!(
            "500 pairs ({commuting_seen} commuting), disagreements {disagreements}, asymmetric {asymmetric}, misclassified {wrong_verdict}"
        ),
    )
}

fn skew() -> Outcome {
    let mut zero: f64 = 0.0;
    let mut spread: f64 = 0.0;
    for k in 0..200 {
        let mut rng = rng_from_seed(9000 + k as u64);
        let alg = algebra_for(k);
        let (nu, rho) = random_commuting_pair(&mut rng, &alg, 0.3);
        zero = zero.max(skew_information(&StandardForm::tracial(&alg), &nu, &rho).unwrap().abs());
        let nu = random_form(&mut rng, &alg, false);
        let rho = random_form(&mut rng, &alg, false);
        let j0 = skew_information(&StandardForm::tracial(&alg), &nu, &rho).unwrap();
        for _ in 0..3 {
            let std = general_std(&mut rng, &alg);
            spread = spread.max((skew_information(&std, &nu, &rho).unwrap() - j0).abs());
        }
    }
    outcome(
        zero <= 1e-10 && spread <= 1e-8,
        format!("commuting {zero:.2e}, Ω spread {spread:.2e} (200 pairs × 3 Ω)"),
    )
}

fn fibre_survey() -> Outcome {
    let mut fraction: f64 = 1.0;
    let mut excess: f64 = 0.0;
    let mut gap: f64 = 0.0;
    let mut disagreements = 0;
    for k in 0..20 {
        let mut rng = rng_from_seed(10_000 + k as u64);
        let alg = algebra_for(k);
        let std = general_std(&mut rng, &alg);
        let nu = random_form(&mut rng, &alg, k % 4 == 0);
        let rho = random_form(&mut rng, &alg, false);
        let s = relative_fibre_survey(&std, &nu, &rho, 500, 77 + k as u64).unwrap();
        fraction = fraction.min(s.fraction_in);
        excess = excess.max(s.max_excess);
        gap = gap.max(s.max_alignment_gap);
        disagreements += s.disagreements;
    }
    outcome(
        fraction == 1.0 && excess < 1e-8 && disagreements == 0 && gap <= 1e-8,
        format!("20 × 500 samples, fraction {fraction}, excess {excess:.2e}, orbit gap {gap:.2e}, disagreements {disagreements}"),
    )
}

fn modular() -> Outcome {
    let r = run_suite("cone", 300, &[2, 3, 4, 6, 8], 11_000, TolerancePolicy::default()).unwrap();
    let worst = r
        .properties
        .iter()
        .filter(|p| p.tolerance > 0.0)
        .map(|p| p.worst_residual)
        .fold(0.0, f64::max);
    let failed: Vec<_> = r
        .properties
        .iter()
        .filter(|p| !p.passed)
        .map(|p| p.name.clone())
        .collect();
    outcome(
        r.passed && worst <= 1e-9,
        format!("300 instances, worst residual {worst:.2e}, failed {failed:?}"),
    )
}

fn sweep_asymptotics() -> Outcome {
    let tol = TolerancePolicy::default();
    let beta = 0.5;
    let rows = sweep(beta, 64, NuMode::Projection, PsiMode::Uniform, 0, tol).unwrap();
    let decreasing = rows.windows(2).all(|w| w[1].gamma < w[0].gamma);
    let bounded = rows
        .iter()
        .all(|r| r.gamma <= beta.powi(r.n as i32) * (1.0 - beta) / (1.0 - beta.powi(r.n as i32)) * (1.0 + 1e-9));
    let at55 = rows.iter().find(|r| r.n == 55).unwrap().gamma;
    let mut large: f64 = 0.0;
    for n in [128, 256, 512] {
        let r = sweep_row(beta, n, NuMode::Projection, PsiMode::Uniform, 0, tol).unwrap();
        large = large.max((r.gamma - gamma_oracle(beta, n)).abs() / gamma_oracle(beta, n));
    }
    outcome(
        decreasing && bounded && at55 < 1e-15 && large <= 1e-9,
        format!("n = 2..64 decreasing {decreasing}, bounded {bounded}, gamma(55) = {at55:.3e}, n = 128, 256, 512 relative error {large:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("fidelity matches brute-force fibre optimization", fidelity_oracle),
        ("distance reconstruction", reconstruction),
        ("variational formula", variational),
        ("attainment by the optimal vector", attainment),
        ("maximality and closed forms of the orthogonal part", perp),
        ("minimal pairs", minimal_pairs),
        ("g-functional", g_functional_check),
        ("commutation criteria", commutation),
        ("skew information", skew),
        ("relative fibre survey", fibre_survey),
        ("modular suite", modular),
        ("sweep asymptotics", sweep_asymptotics),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "{tag} [{:>2}] {name}: {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.passed);
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
