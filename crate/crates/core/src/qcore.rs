//! Complex linear algebra over small labeled Hilbert spaces.
//!
//! Kets carry an explicit list of basis labels; two kets live in the same
//! space iff their label sequences are equal. Everything here is immutable
//! once constructed.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A complex probability amplitude.
pub type Amplitude<T> = Complex<T>;

/// Ordered list of basis-state names shared by kets of one space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Basis(Arc<[String]>);

impl Basis {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidKet("basis must have at least one label".into()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidKet(format!("duplicate basis label {l:?}")));
            }
        }
        Ok(Basis(labels.into()))
    }

    /// Basis `e0, e1, …, e{dim-1}`.
    pub fn indexed(dim: usize) -> Self {
        Basis::new((0..dim).map(|i| format!("e{i}"))).expect("indexed basis is well formed")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    fn joined(&self) -> String {
        self.0.join(", ")
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Basis[{}]", self.joined())
    }
}

fn check_same_basis(left: &Basis, right: &Basis) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::BasisMismatch {
            left: left.joined(),
            right: right.joined(),
        })
    }
}

/// A finite-dimensional state vector over a labeled basis.
#[derive(Clone, PartialEq)]
pub struct Ket<T: Scalar> {
    basis: Basis,
    components: Vec<Amplitude<T>>,
}

impl<T: Scalar> Ket<T> {
    pub fn new(basis: Basis, components: Vec<Amplitude<T>>) -> Result<Self> {
        if components.len() != basis.dim() {
            return Err(Error::InvalidKet(format!(
                "{} components for a {}-label basis",
                components.len(),
                basis.dim()
            )));
        }
        if components.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidKet("non-finite amplitude".into()));
        }
        Ok(Ket { basis, components })
    }

    /// Ket over the basis `e0 … e{n-1}`.
    pub fn from_components(components: Vec<Amplitude<T>>) -> Result<Self> {
        let basis = Basis::indexed(components.len().max(1));
        Ket::new(basis, components)
    }

    pub fn from_real(components: &[T]) -> Result<Self> {
        Ket::from_components(components.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    /// The basis vector with a one in slot `index`.
    pub fn basis_state(basis: &Basis, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return Err(Error::InvalidKet(format!(
                "index {index} out of range for dimension {}",
                basis.dim()
            )));
        }
        let mut components = vec![Complex::new(T::zero(), T::zero()); basis.dim()];
        components[index] = Complex::new(T::one(), T::zero());
        Ket::new(basis.clone(), components)
    }

    pub fn labeled(basis: &Basis, label: &str) -> Result<Self> {
        let index = basis.index_of(label).ok_or_else(|| Error::InvalidLabel {
            label: label.to_string(),
            role: "basis state",
        })?;
        Ket::basis_state(basis, index)
    }

    pub fn zero(basis: &Basis) -> Self {
        Ket {
            basis: basis.clone(),
            components: vec![Complex::new(T::zero(), T::zero()); basis.dim()],
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn components(&self) -> &[Amplitude<T>] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.components.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - T::one()).abs() <= T::identity_tol()
    }

    pub fn scaled(&self, factor: Amplitude<T>) -> Self {
        Ket {
            basis: self.basis.clone(),
            components: self.components.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Ket<T>) -> Result<Self> {
        check_same_basis(&self.basis, &other.basis)?;
        Ok(Ket {
            basis: self.basis.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Ket<T>) -> Result<T> {
        check_same_basis(&self.basis, &other.basis)?;
        Ok(self
            .components
            .iter()
            .zip(&other.components)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm())))
    }
}

impl<T: Scalar> fmt::Debug for Ket<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (l, c) in self.basis.labels().iter().zip(&self.components) {
            list.entry(l, c);
        }
        list.finish()
    }
}

/// `⟨bra|ket⟩ = Σ conj(bra_i)·ket_i`.
pub fn inner<T: Scalar>(bra: &Ket<T>, ket: &Ket<T>) -> Result<Amplitude<T>> {
    check_same_basis(&bra.basis, &ket.basis)?;
    Ok(bra
        .components
        .iter()
        .zip(&ket.components)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (b, k)| acc + b.conj() * k))
}

/// Rescale to unit norm by a positive real factor.
pub fn normalize<T: Scalar>(ket: &Ket<T>) -> Result<Ket<T>> {
    let n2 = ket.norm_sqr();
    if !(n2 > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let inv = T::one() / n2.sqrt();
    Ok(ket.scaled(Complex::new(inv, T::zero())))
}

/// Rank-1 projector `|axis⟩⟨axis|` onto a normalized axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector<T: Scalar> {
    axis: Ket<T>,
}

impl<T: Scalar> Projector<T> {
    pub fn new(axis: Ket<T>) -> Result<Self> {
        if !axis.is_normalized() {
            return Err(Error::NotNormalized {
                norm_sqr: axis.norm_sqr().to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Projector { axis })
    }

    /// Normalizes `axis` first.
    pub fn onto(axis: &Ket<T>) -> Result<Self> {
        Ok(Projector { axis: normalize(axis)? })
    }

    pub fn axis(&self) -> &Ket<T> {
        &self.axis
    }

    pub fn apply(&self, ket: &Ket<T>) -> Result<Ket<T>> {
        apply_projector(self, ket)
    }

    /// `⟨ψ|P|ψ⟩ = |⟨axis|ψ⟩|²`.
    pub fn expectation(&self, ket: &Ket<T>) -> Result<T> {
        Ok(inner(&self.axis, ket)?.norm_sqr())
    }
}

pub fn apply_projector<T: Scalar>(projector: &Projector<T>, ket: &Ket<T>) -> Result<Ket<T>> {
    let overlap = inner(&projector.axis, ket)?;
    Ok(projector.axis.scaled(overlap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn ket(v: &[(f64, f64)]) -> Ket<f64> {
        Ket::from_components(v.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn inner_of_basis_states() {
        let b = Basis::indexed(2);
        let e0 = Ket::<f64>::basis_state(&b, 0).unwrap();
        let e1 = Ket::<f64>::basis_state(&b, 1).unwrap();
        assert_eq!(inner(&e0, &e0).unwrap(), c(1.0, 0.0));
        assert_eq!(inner(&e0, &e1).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn hadamard_pair_is_orthogonal() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ket(&[(s, 0.0), (s, 0.0)]);
        let minus = ket(&[(s, 0.0), (-s, 0.0)]);
        assert!(inner(&plus, &minus).unwrap().norm() < 1e-15);
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let a = Ket::<f64>::basis_state(&Basis::new(["B", "C"]).unwrap(), 0).unwrap();
        let b = Ket::<f64>::basis_state(&Basis::new(["D", "D'"]).unwrap(), 0).unwrap();
        match inner(&a, &b) {
            Err(Error::BasisMismatch { left, right }) => {
                assert_eq!(left, "B, C");
                assert_eq!(right, "D, D'");
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn ket_construction_invariants() {
        assert!(Basis::new(Vec::<String>::new()).is_err());
        assert!(Basis::new(["a", "a"]).is_err());
        let b = Basis::indexed(2);
        assert!(Ket::<f64>::new(b.clone(), vec![c(1.0, 0.0)]).is_err());
        assert!(Ket::<f64>::new(b, vec![c(f64::NAN, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn projector_examples() {
        let b = Basis::indexed(2);
        let e0 = Ket::<f64>::basis_state(&b, 0).unwrap();
        let e1 = Ket::<f64>::basis_state(&b, 1).unwrap();
        let p = Projector::new(e0.clone()).unwrap();
        assert_eq!(p.apply(&e0).unwrap(), e0);
        assert_eq!(p.apply(&e1).unwrap(), Ket::zero(&b));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let half = Projector::new(ket(&[(s, 0.0), (s, 0.0)])).unwrap();
        let out = half.apply(&e0).unwrap();
        let expected = ket(&[(0.5, 0.0), (0.5, 0.0)]);
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn projector_requires_normalized_axis() {
        assert!(matches!(
            Projector::new(ket(&[(2.0, 0.0), (0.0, 0.0)])),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        let n = normalize(&ket(&[(2.0, 0.0), (0.0, 0.0)])).unwrap();
        assert_eq!(n.components(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let n = normalize(&ket(&[(1.0, 0.0), (1.0, 0.0)])).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(n.max_abs_diff(&ket(&[(s, 0.0), (s, 0.0)])).unwrap() < 1e-15);
        assert_eq!(normalize(&ket(&[(0.0, 0.0), (0.0, 0.0)])), Err(Error::ZeroNorm));
    }

    #[test]
    fn works_in_single_precision() {
        let k = Ket::<f32>::from_real(&[3.0, 4.0]).unwrap();
        let n = normalize(&k).unwrap();
        assert!(n.is_normalized());
        let p = Projector::new(n.clone()).unwrap();
        assert!((p.expectation(&n).unwrap() - 1.0).abs() < 1e-6);
    }

    fn arb_ket(dim: usize) -> impl Strategy<Value = Ket<f64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
            .prop_map(|v| ket(&v))
    }

    fn arb_pair() -> impl Strategy<Value = (Ket<f64>, Ket<f64>)> {
        (2usize..=8).prop_flat_map(|d| (arb_ket(d), arb_ket(d)))
    }

    proptest! {
        #[test]
        fn inner_is_conjugate_symmetric((a, b) in arb_pair()) {
            let ab = inner(&a, &b).unwrap();
            let ba = inner(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() <= 1e-12);
        }

        #[test]
        fn projector_is_idempotent((axis, k) in arb_pair()) {
            prop_assume!(axis.norm_sqr() > 1e-6);
            let p = Projector::onto(&axis).unwrap();
            let once = p.apply(&k).unwrap();
            let twice = p.apply(&once).unwrap();
            prop_assert!(once.max_abs_diff(&twice).unwrap() <= 1e-12);
        }

        #[test]
        fn cauchy_schwarz((a, b) in arb_pair()) {
            let lhs = inner(&a, &b).unwrap().norm_sqr();
            let rhs = inner(&a, &a).unwrap().re * inner(&b, &b).unwrap().re;
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn normalize_preserves_direction(a in (2usize..=8).prop_flat_map(arb_ket)) {
            prop_assume!(a.norm_sqr() > 1e-6);
            let n = normalize(&a).unwrap();
            prop_assert!((n.norm_sqr() - 1.0).abs() <= 1e-12);
            let overlap = inner(&n, &a).unwrap();
            prop_assert!(overlap.im.abs() <= 1e-12 && overlap.re > 0.0);
        }
    }
}
