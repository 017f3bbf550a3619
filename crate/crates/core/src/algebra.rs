//! Finite direct sums of full matrix algebras, their elements and positive
//! normal forms `ν(x) = Σ tr(a_i x_i)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{
    self, check_finite, clip_psd, fro, identity, is_projection, op_norm, psd_support, zeros, ComplexMatrix,
    TolerancePolicy, C64, ZERO,
};

#[derive(Clone, Debug)]
pub struct Algebra {
    dims: Arc<[usize]>,
    tol: TolerancePolicy,
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims
    }
}

impl Algebra {
    pub fn new(dims: &[usize]) -> Result<Self> {
        Self::with_policy(dims, TolerancePolicy::default())
    }

    pub fn with_policy(dims: &[usize], tol: TolerancePolicy) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Shape("algebra needs at least one block".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Shape("block dimensions must be positive".into()));
        }
        Ok(Self { dims: dims.into(), tol })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn tol(&self) -> &TolerancePolicy {
        &self.tol
    }

    pub fn ensure_same(&self, other: &Algebra) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch(format!(
                "{:?} vs {:?}",
                self.dims(),
                other.dims()
            )))
        }
    }

    pub(crate) fn check_blocks(&self, blocks: &[ComplexMatrix]) -> Result<()> {
        if blocks.len() != self.dims.len() {
            return Err(Error::AlgebraMismatch(format!(
                "expected {} blocks, got {}",
                self.dims.len(),
                blocks.len()
            )));
        }
        for (i, (b, &n)) in blocks.iter().zip(self.dims.iter()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::AlgebraMismatch(format!(
                    "block {i} is {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            check_finite(b)?;
        }
        Ok(())
    }
}

/// Element of the algebra, one square matrix per block. The same type stores
/// commutant elements, which act by right multiplication.
#[derive(Clone, Debug)]
pub struct AlgElement {
    alg: Algebra,
    blocks: Vec<ComplexMatrix>,
}

impl AlgElement {
    pub fn new(alg: &Algebra, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        alg.check_blocks(&blocks)?;
        Ok(Self::new_unchecked(alg, blocks))
    }

    pub(crate) fn new_unchecked(alg: &Algebra, blocks: Vec<ComplexMatrix>) -> Self {
        Self {
            alg: alg.clone(),
            blocks,
        }
    }

    pub fn identity(alg: &Algebra) -> Self {
        Self::new_unchecked(alg, alg.dims().iter().map(|&n| identity(n)).collect())
    }

    pub fn zero(alg: &Algebra) -> Self {
        Self::new_unchecked(alg, alg.dims().iter().map(|&n| zeros(n, n)).collect())
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &ComplexMatrix {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<ComplexMatrix> {
        self.blocks
    }

    pub fn map(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        Self::new_unchecked(&self.alg, self.blocks.iter().map(f).collect())
    }

    pub fn try_map(&self, f: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>) -> Result<Self> {
        let blocks = self.blocks.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Self::new_unchecked(&self.alg, blocks))
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix) -> Result<Self> {
        self.alg.ensure_same(&other.alg)?;
        Ok(Self::new_unchecked(
            &self.alg,
            self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        ))
    }

    pub fn adjoint(&self) -> Self {
        self.map(|b| b.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|b| b.scale(s))
    }

    /// Operator norm, the maximum over blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(op_norm).fold(0.0, f64::max)
    }

    pub fn fro(&self) -> f64 {
        self.blocks.iter().map(|b| fro(b).powi(2)).sum::<f64>().sqrt()
    }

    pub fn is_projection(&self) -> bool {
        let slack = self.alg.tol().threshold(1.0).max(1e-9);
        self.blocks.iter().all(|p| is_projection(p, slack))
    }

    /// Blockwise ranks, for projections or arbitrary elements.
    pub fn ranks(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| linalg::numerical_rank(b, self.alg.tol()))
            .collect()
    }

    /// `1 - p`.
    pub fn complement(&self) -> Self {
        self.map(|p| identity(p.nrows()) - p)
    }
}

/// Positive normal form given by one PSD density per block.
#[derive(Clone, Debug)]
pub struct PositiveForm {
    alg: Algebra,
    densities: Vec<ComplexMatrix>,
}

impl PositiveForm {
    /// Validates Hermiticity and positivity; eigenvalues inside the clipping
    /// window are set to zero.
    pub fn new(alg: &Algebra, densities: Vec<ComplexMatrix>) -> Result<Self> {
        alg.check_blocks(&densities)?;
        let densities = densities
            .iter()
            .map(|d| clip_psd(d, alg.tol()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new_unchecked(alg, densities))
    }

    pub(crate) fn new_unchecked(alg: &Algebra, densities: Vec<ComplexMatrix>) -> Self {
        Self {
            alg: alg.clone(),
            densities,
        }
    }

    pub fn zero(alg: &Algebra) -> Self {
        Self::new_unchecked(alg, alg.dims().iter().map(|&n| zeros(n, n)).collect())
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn densities(&self) -> &[ComplexMatrix] {
        &self.densities
    }

    pub fn density(&self, i: usize) -> &ComplexMatrix {
        &self.densities[i]
    }

    pub fn as_element(&self) -> AlgElement {
        AlgElement::new_unchecked(&self.alg, self.densities.clone())
    }

    /// `‖ν‖₁ = ν(1)`.
    pub fn norm1(&self) -> f64 {
        self.densities.iter().map(|d| linalg::trace(d).re).sum()
    }

    /// Support projection `s(ν)`.
    pub fn support(&self) -> Result<AlgElement> {
        let blocks = self
            .densities
            .iter()
            .map(|d| psd_support(d, self.alg.tol()))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgElement::new_unchecked(&self.alg, blocks))
    }

    pub fn ranks(&self) -> Result<Vec<usize>> {
        self.densities
            .iter()
            .map(|d| linalg::psd_rank(d, self.alg.tol()))
            .collect()
    }

    pub fn is_faithful(&self) -> Result<bool> {
        Ok(self.ranks()?.iter().zip(self.alg.dims()).all(|(r, n)| r == n))
    }

    pub fn require_faithful(&self) -> Result<()> {
        for (i, (r, n)) in self.ranks()?.iter().zip(self.alg.dims()).enumerate() {
            if r != n {
                return Err(Error::NotFaithful { block: i });
            }
        }
        Ok(())
    }

    /// `ν - μ` with the result clipped back into the PSD cone.
    pub fn sub(&self, other: &PositiveForm) -> Result<PositiveForm> {
        self.alg.ensure_same(&other.alg)?;
        let blocks = self
            .densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| linalg::clip_psd_relative(&(a - b), op_norm(a).max(op_norm(b)), self.alg.tol()))
            .collect::<Result<Vec<_>>>()?;
        Ok(PositiveForm::new_unchecked(&self.alg, blocks))
    }

    pub fn add(&self, other: &PositiveForm) -> Result<PositiveForm> {
        self.alg.ensure_same(&other.alg)?;
        let blocks = self
            .densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| a + b)
            .collect();
        Ok(PositiveForm::new_unchecked(&self.alg, blocks))
    }

    pub fn scale(&self, s: f64) -> PositiveForm {
        assert!(s >= 0.0, "positive forms scale by nonnegative reals");
        PositiveForm::new_unchecked(&self.alg, self.densities.iter().map(|d| d.scale(s)).collect())
    }
}

pub fn evaluate(nu: &PositiveForm, x: &AlgElement) -> Result<C64> {
    nu.alg.ensure_same(&x.alg)?;
    Ok(nu
        .densities
        .iter()
        .zip(&x.blocks)
        .map(|(a, xb)| (a * xb).trace())
        .fold(ZERO, |s, t| s + t))
}

/// Murray–von Neumann order on projections: blockwise rank comparison.
pub fn mvn_precedes(p: &AlgElement, q: &AlgElement) -> Result<bool> {
    p.alg.ensure_same(&q.alg)?;
    if !p.is_projection() || !q.is_projection() {
        return Err(Error::NotProjection);
    }
    Ok(p.ranks().iter().zip(q.ranks()).all(|(a, b)| *a <= b))
}

/// Membership in the centralizer of a faithful form: `x c = c x` blockwise.
pub fn centralizer_contains(rho: &PositiveForm, x: &AlgElement) -> Result<bool> {
    rho.alg.ensure_same(&x.alg)?;
    rho.require_faithful()?;
    let xn = x.norm();
    let cn = rho.densities.iter().map(op_norm).fold(0.0, f64::max);
    let bound = 1e-10 * xn * cn;
    Ok(rho
        .densities
        .iter()
        .zip(&x.blocks)
        .all(|(c, xb)| op_norm(&(xb * c - c * xb)) <= bound))
}

/// The form `x ↦ ν(a* x a)`, whose density is `a c a*`.
pub fn conjugate_form(nu: &PositiveForm, a: &AlgElement) -> Result<PositiveForm> {
    nu.alg.ensure_same(&a.alg)?;
    let blocks = nu
        .densities
        .iter()
        .zip(&a.blocks)
        .map(|(c, ab)| linalg::hermitian_part(&(ab * c * ab.adjoint())))
        .collect();
    Ok(PositiveForm::new_unchecked(&nu.alg, blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real, Eigh};
    use crate::random::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn diag(v: &[f64]) -> ComplexMatrix {
        let mut m = zeros(v.len(), v.len());
        for (i, &x) in v.iter().enumerate() {
            m[(i, i)] = real(x);
        }
        m
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Algebra::new(&[]).is_err());
        assert!(Algebra::new(&[2, 0]).is_err());
        let alg = Algebra::new(&[2, 3]).unwrap();
        assert!(matches!(
            AlgElement::new(&alg, vec![identity(2)]),
            Err(Error::AlgebraMismatch(_))
        ));
        assert!(AlgElement::new(&alg, vec![identity(2), identity(2)]).is_err());
    }

    #[test]
    fn evaluate_cases() {
        let alg = Algebra::new(&[2]).unwrap();
        let mut rng = rng_from_seed(1);
        let nu = random_form(&mut rng, &alg, false);
        let one = AlgElement::identity(&alg);
        assert!((evaluate(&nu, &one).unwrap().re - nu.norm1()).abs() < 1e-14);

        let nu = PositiveForm::new(&alg, vec![diag(&[1.0, 0.0])]).unwrap();
        let x = AlgElement::new(&alg, vec![diag(&[0.0, 5.0])]).unwrap();
        assert_eq!(evaluate(&nu, &x).unwrap().norm(), 0.0);

        let other = Algebra::new(&[3]).unwrap();
        assert!(evaluate(&nu, &AlgElement::identity(&other)).is_err());
    }

    #[test]
    fn form_rejects_non_positive() {
        let alg = Algebra::new(&[2]).unwrap();
        assert!(matches!(
            PositiveForm::new(&alg, vec![diag(&[1.0, -0.5])]),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn mvn_cases() {
        let alg = Algebra::new(&[3, 3]).unwrap();
        let mut rng = rng_from_seed(2);
        let p = AlgElement::new(
            &alg,
            vec![random_projection(&mut rng, 3, 1), random_projection(&mut rng, 3, 2)],
        )
        .unwrap();
        let q = AlgElement::new(
            &alg,
            vec![random_projection(&mut rng, 3, 2), random_projection(&mut rng, 3, 1)],
        )
        .unwrap();
        assert!(!mvn_precedes(&p, &q).unwrap());
        assert!(mvn_precedes(&AlgElement::zero(&alg), &q).unwrap());
        let not_proj = AlgElement::identity(&alg).scale(2.0);
        assert!(matches!(mvn_precedes(&not_proj, &q), Err(Error::NotProjection)));
    }

    #[test]
    fn mvn_agrees_with_constructed_isometry() {
        let alg = Algebra::new(&[4]).unwrap();
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let rp = rng.random_range(0..=4);
            let rq = rng.random_range(0..=4);
            let p = AlgElement::new(&alg, vec![random_projection(&mut rng, 4, rp)]).unwrap();
            let q = AlgElement::new(&alg, vec![random_projection(&mut rng, 4, rq)]).unwrap();
            let verdict = mvn_precedes(&p, &q).unwrap();
            let oracle = crate::oracle::mvn_partial_isometry(p.block(0), q.block(0), alg.tol());
            assert_eq!(verdict, oracle.is_some());
            if let Some(w) = oracle {
                assert!(fro(&(w.adjoint() * &w - p.block(0))) < 1e-9);
                let ww = &w * w.adjoint();
                assert!(fro(&(q.block(0) * &ww - &ww)) < 1e-9);
            }
        }
    }

    #[test]
    fn centralizer_cases() {
        let alg = Algebra::new(&[2]).unwrap();
        let rho = PositiveForm::new(&alg, vec![diag(&[1.0, 2.0]).scale(1.0 / 3.0)]).unwrap();
        assert!(centralizer_contains(&rho, &AlgElement::identity(&alg)).unwrap());
        let mut off = zeros(2, 2);
        off[(0, 1)] = real(1.0);
        let off = AlgElement::new(&alg, vec![off]).unwrap();
        assert!(!centralizer_contains(&rho, &off).unwrap());
        let degenerate = PositiveForm::new(&alg, vec![diag(&[1.0, 0.0])]).unwrap();
        assert!(matches!(
            centralizer_contains(&degenerate, &off),
            Err(Error::NotFaithful { block: 0 })
        ));
    }

    #[test]
    fn spectral_projection_is_central() {
        let alg = Algebra::new(&[4]).unwrap();
        let mut rng = rng_from_seed(4);
        let rho = random_form(&mut rng, &alg, true);
        let e: Eigh = linalg::eigh(rho.density(0), alg.tol()).unwrap();
        let b = e.columns(&[1, 3]);
        let p = AlgElement::new(&alg, vec![&b * b.adjoint()]).unwrap();
        assert!(centralizer_contains(&rho, &p).unwrap());
    }

    #[test]
    fn conjugation_cases() {
        let alg = Algebra::new(&[3]).unwrap();
        let mut rng = rng_from_seed(5);
        let nu = random_form(&mut rng, &alg, false);
        let same = conjugate_form(&nu, &AlgElement::identity(&alg)).unwrap();
        assert!(fro(&(same.density(0) - nu.density(0))) < 1e-15);

        // a partial isometry with initial projection s(ν) preserves the norm
        let s = nu.support().unwrap();
        let v = AlgElement::new(&alg, vec![haar_unitary(&mut rng, 3) * s.block(0)]).unwrap();
        let nv = conjugate_form(&nu, &v).unwrap();
        assert!((nv.norm1() - nu.norm1()).abs() < 1e-12);

        // faithful form conjugated by a projection has that projection as support
        let faithful = random_form(&mut rng, &alg, true);
        let z = AlgElement::new(&alg, vec![random_projection(&mut rng, 3, 2)]).unwrap();
        let nz = conjugate_form(&faithful, &z).unwrap();
        assert!(nz.support().unwrap().sub(&z).unwrap().fro() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_forms_are_positive(seed in any::<u64>(), n in 1usize..6) {
            let alg = Algebra::new(&[n, 2]).unwrap();
            let mut rng = rng_from_seed(seed);
            let nu = random_form(&mut rng, &alg, false);
            let x = random_element(&mut rng, &alg);
            let xx = x.adjoint().mul(&x).unwrap();
            let v = evaluate(&nu, &xx).unwrap();
            prop_assert!(v.re >= -1e-12 * xx.norm() * nu.norm1());
            prop_assert!(v.im.abs() <= 1e-12 * xx.norm().max(1.0));
        }

        #[test]
        fn conjugation_composes(seed in any::<u64>()) {
            let alg = Algebra::new(&[3, 2]).unwrap();
            let mut rng = rng_from_seed(seed);
            let nu = random_form(&mut rng, &alg, false);
            let a = random_element(&mut rng, &alg);
            let b = random_element(&mut rng, &alg);
            let lhs = conjugate_form(&conjugate_form(&nu, &a).unwrap(), &b).unwrap();
            let rhs = conjugate_form(&nu, &b.mul(&a).unwrap()).unwrap();
            let scale = lhs.as_element().norm().max(1.0);
            prop_assert!(lhs.as_element().sub(&rhs.as_element()).unwrap().fro() < 1e-10 * scale);
        }

        #[test]
        fn mvn_is_a_preorder(seed in any::<u64>()) {
            let alg = Algebra::new(&[3, 2]).unwrap();
            let mut rng = rng_from_seed(seed);
            let mut proj = || {
                let blocks = alg.dims().iter().map(|&n| {
                    let r = rng.random_range(0..=n);
                    random_projection(&mut rng, n, r)
                }).collect();
                AlgElement::new(&alg, blocks).unwrap()
            };
            let (p, q, r) = (proj(), proj(), proj());
            prop_assert!(mvn_precedes(&p, &p).unwrap());
            if mvn_precedes(&p, &q).unwrap() && mvn_precedes(&q, &r).unwrap() {
                prop_assert!(mvn_precedes(&p, &r).unwrap());
            }
            if mvn_precedes(&p, &q).unwrap() && mvn_precedes(&q, &p).unwrap() {
                prop_assert_eq!(p.ranks(), q.ranks());
            }
        }
    }
}
