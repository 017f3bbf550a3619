//! Hilbert–Schmidt standard form: the algebra acts on `⊕ M_{n_i}` by left
//! multiplication, its commutant by right multiplication, and a reference
//! vector `Ω` with invertible blocks fixes the modular data.

use rand::Rng;

use crate::algebra::{AlgElement, Algebra, PositiveForm};
use crate::error::{Error, Result};
use crate::linalg::{
    self, eigh, fro, hermitian_part, hs_dot, identity, pd_power_imag, sqrt_psd, support_proj, svd, ComplexMatrix, Side,
    C64, ZERO,
};
use crate::random::{haar_unitary, rng_from_seed};

/// Vector of the standard-form Hilbert space, one matrix per block.
#[derive(Clone, Debug)]
pub struct HSVector {
    alg: Algebra,
    blocks: Vec<ComplexMatrix>,
}

impl HSVector {
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

    pub fn zero(alg: &Algebra) -> Self {
        Self::new_unchecked(alg, AlgElement::zero(alg).into_blocks())
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

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks.iter().map(|b| fro(b).powi(2)).sum()
    }

    pub fn map(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        Self::new_unchecked(&self.alg, self.blocks.iter().map(f).collect())
    }

    fn zip(&self, o: &Self, f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix) -> Result<Self> {
        self.alg.ensure_same(&o.alg)?;
        Ok(Self::new_unchecked(
            &self.alg,
            self.blocks.iter().zip(&o.blocks).map(|(a, b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|b| b * s)
    }

    /// `‖ξ - η‖`.
    pub fn dist(&self, o: &Self) -> Result<f64> {
        Ok(self.sub(o)?.norm())
    }

    /// The vector form `x ↦ ⟨xξ, ξ⟩`, with density `ξ ξ*`.
    pub fn vector_form(&self) -> PositiveForm {
        PositiveForm::new_unchecked(
            &self.alg,
            self.blocks.iter().map(|b| hermitian_part(&(b * b.adjoint()))).collect(),
        )
    }

    pub fn as_element(&self) -> AlgElement {
        AlgElement::new_unchecked(&self.alg, self.blocks.clone())
    }

    pub fn from_element(x: &AlgElement) -> Self {
        Self::new_unchecked(x.algebra(), x.blocks().to_vec())
    }
}

/// `⟨ξ, η⟩ = Σ tr(η_i* ξ_i)`, linear in the first argument.
pub fn hs_inner(xi: &HSVector, eta: &HSVector) -> Result<C64> {
    xi.alg.ensure_same(&eta.alg)?;
    Ok(xi
        .blocks
        .iter()
        .zip(&eta.blocks)
        .map(|(a, b)| hs_dot(a, b))
        .fold(ZERO, |s, t| s + t))
}

pub fn left_act(x: &AlgElement, xi: &HSVector) -> Result<HSVector> {
    x.algebra().ensure_same(&xi.alg)?;
    Ok(HSVector::new_unchecked(
        &xi.alg,
        x.blocks().iter().zip(&xi.blocks).map(|(a, b)| a * b).collect(),
    ))
}

/// Commutant action `ξ ↦ ξ y`. Note `R_a R_b = R_{ba}`.
pub fn right_act(y: &AlgElement, xi: &HSVector) -> Result<HSVector> {
    y.algebra().ensure_same(&xi.alg)?;
    Ok(HSVector::new_unchecked(
        &xi.alg,
        xi.blocks.iter().zip(y.blocks()).map(|(b, a)| b * a).collect(),
    ))
}

/// `ψ ψ* = a` blockwise, up to `1e-9·max(1, ‖a‖)`.
pub fn fibre_contains(psi: &HSVector, nu: &PositiveForm) -> bool {
    if psi.alg != *nu.algebra() {
        return false;
    }
    psi.blocks.iter().zip(nu.densities()).all(|(p, a)| {
        let an = linalg::op_norm(a);
        linalg::op_norm(&(p * p.adjoint() - a)) <= 1e-9 * an.max(1.0)
    })
}

/// `√a W` with `W` Haar-random per block.
pub fn fibre_sample(nu: &PositiveForm, seed: u64) -> Result<HSVector> {
    let mut rng = rng_from_seed(seed);
    fibre_sample_with(nu, &mut rng)
}

pub fn fibre_sample_with<R: Rng + ?Sized>(nu: &PositiveForm, rng: &mut R) -> Result<HSVector> {
    let tol = *nu.algebra().tol();
    let blocks = nu
        .densities()
        .iter()
        .map(|a| Ok(sqrt_psd(a, &tol)? * haar_unitary(rng, a.nrows())))
        .collect::<Result<Vec<_>>>()?;
    Ok(HSVector::new_unchecked(nu.algebra(), blocks))
}

/// `p(χ)`: range projection of `χχ*`, acting from the left.
pub fn support_left(chi: &HSVector) -> AlgElement {
    let tol = *chi.alg.tol();
    AlgElement::new_unchecked(
        &chi.alg,
        chi.blocks.iter().map(|b| support_proj(b, Side::Left, &tol)).collect(),
    )
}

/// `p′(χ)`: support of `χ*χ`, acting from the right.
pub fn support_right(chi: &HSVector) -> AlgElement {
    let tol = *chi.alg.tol();
    AlgElement::new_unchecked(
        &chi.alg,
        chi.blocks.iter().map(|b| support_proj(b, Side::Right, &tol)).collect(),
    )
}

#[derive(Clone, Debug)]
struct OmegaBlock {
    omega: ComplexMatrix,
    /// `(ΩΩ*)^{-1/2} Ω`, the unitary polar factor.
    u: ComplexMatrix,
    /// `Ω^{-*}`.
    inv_adj: ComplexMatrix,
    /// `ΩΩ*`.
    left: ComplexMatrix,
    /// `Ω*Ω`.
    right: ComplexMatrix,
}

impl OmegaBlock {
    fn new(omega: ComplexMatrix, alg: &Algebra) -> Result<Self> {
        let n = omega.nrows();
        let d = svd(&omega);
        if d.rank(alg.tol()) < n || d.s.iter().any(|&s| s <= 0.0) {
            return Err(Error::SingularOmega);
        }
        let u = &d.u * d.w.adjoint();
        let mut us = d.u.clone();
        for j in 0..n {
            for i in 0..n {
                us[(i, j)] /= d.s[j];
            }
        }
        let inv_adj = us * d.w.adjoint();
        let left = hermitian_part(&(&omega * omega.adjoint()));
        let right = hermitian_part(&(omega.adjoint() * &omega));
        Ok(Self {
            omega,
            u,
            inv_adj,
            left,
            right,
        })
    }
}

/// Standard form with respect to a cyclic and separating vector `Ω`.
#[derive(Clone, Debug)]
pub struct StandardForm {
    alg: Algebra,
    omega: HSVector,
    blocks: Vec<OmegaBlock>,
}

impl StandardForm {
    pub fn new(omega: HSVector) -> Result<Self> {
        let alg = omega.alg.clone();
        let blocks = omega
            .blocks
            .iter()
            .map(|b| OmegaBlock::new(b.clone(), &alg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { alg, omega, blocks })
    }

    /// `Ω` = blockwise identity scaled to unit norm.
    pub fn tracial(alg: &Algebra) -> Self {
        let total: usize = alg.dims().iter().sum();
        let s = 1.0 / (total as f64).sqrt();
        let omega = HSVector::new_unchecked(alg, alg.dims().iter().map(|&n| identity(n).scale(s)).collect());
        Self::new(omega).expect("identity blocks are invertible")
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn omega(&self) -> &HSVector {
        &self.omega
    }

    /// Polar unitary `u` of `Ω`, per block.
    pub fn cone_unitary_blocks(&self) -> Vec<ComplexMatrix> {
        self.blocks.iter().map(|b| b.u.clone()).collect()
    }

    fn check(&self, xi: &HSVector) -> Result<()> {
        self.alg.ensure_same(&xi.alg)
    }

    fn per_block(&self, xi: &HSVector, f: impl Fn(&OmegaBlock, &ComplexMatrix) -> ComplexMatrix) -> Result<HSVector> {
        self.check(xi)?;
        Ok(HSVector::new_unchecked(
            &self.alg,
            self.blocks.iter().zip(&xi.blocks).map(|(o, x)| f(o, x)).collect(),
        ))
    }

    /// Tomita operator `xΩ ↦ x*Ω`: `ξ ↦ Ω^{-*} ξ* Ω`.
    pub fn s_op(&self, xi: &HSVector) -> Result<HSVector> {
        self.per_block(xi, |o, x| &o.inv_adj * x.adjoint() * &o.omega)
    }

    /// `yΩ ↦ y*Ω` for commutant `y`: `ξ ↦ Ω ξ* Ω^{-*}`.
    pub fn f_op(&self, xi: &HSVector) -> Result<HSVector> {
        self.per_block(xi, |o, x| &o.omega * x.adjoint() * &o.inv_adj)
    }

    /// Modular operator `ξ ↦ (ΩΩ*) ξ (Ω*Ω)^{-1}`.
    pub fn delta(&self, xi: &HSVector) -> Result<HSVector> {
        self.per_block(xi, |o, x| {
            let right_inv = o.inv_adj.adjoint() * &o.inv_adj;
            &o.left * x * right_inv
        })
    }

    /// Modular flow `ξ ↦ (ΩΩ*)^{it} ξ (Ω*Ω)^{-it}`.
    pub fn delta_it(&self, xi: &HSVector, t: f64) -> Result<HSVector> {
        self.check(xi)?;
        let tol = *self.alg.tol();
        let blocks = self
            .blocks
            .iter()
            .zip(&xi.blocks)
            .map(|(o, x)| {
                let l = pd_power_imag(&o.left, t, &tol)?;
                let r = pd_power_imag(&o.right, -t, &tol)?;
                Ok(l * x * r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HSVector::new_unchecked(&self.alg, blocks))
    }

    /// Modular conjugation `ξ ↦ u ξ* u`.
    pub fn j_op(&self, xi: &HSVector) -> Result<HSVector> {
        self.per_block(xi, |o, x| &o.u * x.adjoint() * &o.u)
    }

    /// Cone representative `ξ_ν = √a u`.
    pub fn cone_rep(&self, nu: &PositiveForm) -> Result<HSVector> {
        self.alg.ensure_same(nu.algebra())?;
        let tol = *self.alg.tol();
        let blocks = self
            .blocks
            .iter()
            .zip(nu.densities())
            .map(|(o, a)| Ok(sqrt_psd(a, &tol)? * &o.u))
            .collect::<Result<Vec<_>>>()?;
        Ok(HSVector::new_unchecked(&self.alg, blocks))
    }

    /// `ξ` lies in the natural cone iff `ξ u*` is positive semidefinite.
    pub fn cone_contains(&self, xi: &HSVector) -> bool {
        if self.check(xi).is_err() {
            return false;
        }
        let tol = *self.alg.tol();
        self.blocks.iter().zip(&xi.blocks).all(|(o, x)| {
            let p = x * o.u.adjoint();
            let scale = linalg::op_norm(&p);
            let slack = tol.threshold(scale);
            if linalg::hermiticity_residual(&p) > slack.max(1e-12 * scale) {
                return false;
            }
            linalg::min_eigenvalue(&p) >= -slack
        })
    }

    /// Splits a `J`-fixed vector into `ξ₊ - ξ₋` with orthogonal cone parts.
    pub fn cone_split(&self, xi: &HSVector) -> Result<(HSVector, HSVector)> {
        self.check(xi)?;
        let tol = *self.alg.tol();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (o, x) in self.blocks.iter().zip(&xi.blocks) {
            let h = x * o.u.adjoint();
            let e = eigh(&hermitian_part(&h), &tol)?;
            plus.push(e.apply(|l| linalg::real(l.max(0.0))) * &o.u);
            minus.push(e.apply(|l| linalg::real((-l).max(0.0))) * &o.u);
        }
        Ok((
            HSVector::new_unchecked(&self.alg, plus),
            HSVector::new_unchecked(&self.alg, minus),
        ))
    }

    /// Right-acting unitary carrying the cone of `Ω` onto the cone of `Ω′`:
    /// `u* u′` per block, which is `u′` when `Ω` is positive.
    pub fn cone_unitary(&self, omega_prime: &HSVector) -> Result<AlgElement> {
        let other = StandardForm::new(omega_prime.clone())?;
        self.alg.ensure_same(&other.alg)?;
        Ok(AlgElement::new_unchecked(
            &self.alg,
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(o, p)| o.u.adjoint() * &p.u)
                .collect(),
        ))
    }
}
