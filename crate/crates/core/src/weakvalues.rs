//! Analytic weak values of rank-1 projectors and the Bayes-like relation
//! between a weak value and its time-reversed dual.
//!
//! Notation used throughout: `pre` is the pre-selected state |ψ⟩, `post`
//! the post-selected state |z⟩, and the observable is Â = |a⟩⟨a|.
//!
//! * forward weak value `⟨z|Â|ψ⟩/⟨z|ψ⟩`
//! * reverse weak value `⟨a|Ẑ|ψ⟩/⟨a|ψ⟩`
//! * `forward · P(z) = conj(reverse) · P(a)` with Born weights
//!   `P(a) = |⟨a|ψ⟩|²`, `P(z) = |⟨z|ψ⟩|²`.
//!
//! The real parts are quasi-probabilities: they may be negative or exceed
//! one and are never clamped. Which of the two gets called "P(z|a)" versus
//! "P(a|z)" is deliberately left out of the API.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qcore::{apply_projector, inner, Amplitude, Ket, Projector};
use crate::scalar::Scalar;

fn czero<T: Scalar>() -> Amplitude<T> {
    Complex::new(T::zero(), T::zero())
}

fn require_overlap<T: Scalar>(overlap: Amplitude<T>, which: &'static str) -> Result<()> {
    if overlap.norm() <= T::overlap_cutoff() {
        Err(Error::OrthogonalPostSelection { which })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakValueResult<T: Scalar> {
    pub value: Amplitude<T>,
    pub real_part: T,
    pub imag_part: T,
    pub pre: Ket<T>,
    pub post: Ket<T>,
    pub observable: Projector<T>,
}

/// `⟨z|Â|ψ⟩ / ⟨z|ψ⟩`.
pub fn weak_value<T: Scalar>(
    observable: &Projector<T>,
    pre: &Ket<T>,
    post: &Ket<T>,
) -> Result<WeakValueResult<T>> {
    let overlap = inner(post, pre)?;
    require_overlap(overlap, "⟨z|ψ⟩")?;
    let value = inner(post, &apply_projector(observable, pre)?)? / overlap;
    Ok(WeakValueResult {
        value,
        real_part: value.re,
        imag_part: value.im,
        pre: pre.clone(),
        post: post.clone(),
        observable: observable.clone(),
    })
}

/// Checks that `basis` is orthonormal and resolves the identity.
pub fn check_complete_basis<T: Scalar>(basis: &[Ket<T>]) -> Result<()> {
    let Some(first) = basis.first() else {
        return Err(Error::IncompleteBasis { deviation: 1.0 });
    };
    let dim = first.dim();
    let mut deviation = if basis.len() == dim { T::zero() } else { T::one() };
    // Σ_m |m⟩⟨m| − 1, entrywise
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = czero::<T>();
            for m in basis {
                if m.basis() != first.basis() {
                    inner(first, m)?;
                }
                acc = acc + m.components()[i] * m.components()[j].conj();
            }
            if i == j {
                acc = acc - Complex::new(T::one(), T::zero());
            }
            deviation = deviation.max(acc.norm());
        }
    }
    if deviation > T::completeness_tol() {
        Err(Error::IncompleteBasis {
            deviation: deviation.to_f64().unwrap_or(f64::NAN),
        })
    } else {
        Ok(())
    }
}

/// `⟨z|a⟩⟨a|ψ⟩ / Σ_m ⟨z|m⟩⟨m|ψ⟩` over a complete orthonormal basis that
/// contains the observable axis.
pub fn partial_amplitude_portion<T: Scalar>(
    observable: &Projector<T>,
    pre: &Ket<T>,
    post: &Ket<T>,
    basis: &[Ket<T>],
) -> Result<Amplitude<T>> {
    check_complete_basis(basis)?;
    let axis = observable.axis();
    let mut member = None;
    for m in basis {
        if (inner(m, axis)?.norm() - T::one()).abs() <= T::completeness_tol() {
            member = Some(m);
            break;
        }
    }
    let a = member.ok_or(Error::AxisNotInBasis)?;

    let mut total = czero::<T>();
    for m in basis {
        total = total + inner(post, m)? * inner(m, pre)?;
    }
    require_overlap(total, "⟨z|ψ⟩")?;
    Ok(inner(post, a)? * inner(a, pre)? / total)
}

/// Both weak values of the Bayes-like relation plus the Born weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BayesDecomposition<T: Scalar> {
    /// `⟨z|Â|ψ⟩/⟨z|ψ⟩`
    pub forward_wv: Amplitude<T>,
    /// `⟨a|Ẑ|ψ⟩/⟨a|ψ⟩`
    pub reverse_wv: Amplitude<T>,
    /// `|⟨a|ψ⟩|²`
    pub p_a: T,
    /// `|⟨z|ψ⟩|²`
    pub p_z: T,
}

impl<T: Scalar> BayesDecomposition<T> {
    /// `|forward·P(z) − conj(reverse)·P(a)|`; zero up to rounding.
    pub fn identity_residual(&self) -> T {
        (self.forward_wv.scale(self.p_z) - self.reverse_wv.conj().scale(self.p_a)).norm()
    }

    /// Real-part form: `|Re forward − Re reverse · P(a)/P(z)|`.
    pub fn real_residual(&self) -> T {
        (self.forward_wv.re - self.reverse_wv.re * self.p_a / self.p_z).abs()
    }
}

pub fn bayes_decompose<T: Scalar>(
    observable_axis: &Ket<T>,
    pre: &Ket<T>,
    post: &Ket<T>,
) -> Result<BayesDecomposition<T>> {
    let a_proj = Projector::new(observable_axis.clone())?;
    let z_proj = Projector::new(post.clone())?;
    let z_psi = inner(post, pre)?;
    let a_psi = inner(observable_axis, pre)?;
    require_overlap(z_psi, "⟨z|ψ⟩")?;
    require_overlap(a_psi, "⟨a|ψ⟩")?;
    let forward_wv = inner(post, &a_proj.apply(pre)?)? / z_psi;
    let reverse_wv = inner(observable_axis, &z_proj.apply(pre)?)? / a_psi;
    Ok(BayesDecomposition {
        forward_wv,
        reverse_wv,
        p_a: a_psi.norm_sqr(),
        p_z: z_psi.norm_sqr(),
    })
}

/// Result of the sum rule `Σ_a Re[⟨a|Ẑ|ψ⟩/⟨a|ψ⟩]·P(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SumRule<T: Scalar> {
    pub value: T,
    /// `|⟨z|ψ⟩|²`, what `value` must reproduce.
    pub p_z: T,
    /// Basis indices with `⟨a|ψ⟩ = 0`, evaluated as `Re⟨ψ|a⟩⟨a|Ẑ|ψ⟩`.
    pub unnormalized_terms: Vec<usize>,
}

pub fn sum_rule_check<T: Scalar>(post: &Ket<T>, pre: &Ket<T>, basis: &[Ket<T>]) -> Result<SumRule<T>> {
    check_complete_basis(basis)?;
    let z_proj = Projector::new(post.clone())?;
    let z_psi = z_proj.apply(pre)?;
    let mut value = T::zero();
    let mut unnormalized_terms = Vec::new();
    for (idx, a) in basis.iter().enumerate() {
        let a_psi = inner(a, pre)?;
        let a_z_psi = inner(a, &z_psi)?;
        if a_psi.norm() <= T::overlap_cutoff() {
            value = value + (a_psi.conj() * a_z_psi).re;
            unnormalized_terms.push(idx);
        } else {
            value = value + (a_z_psi / a_psi).re * a_psi.norm_sqr();
        }
    }
    Ok(SumRule {
        value,
        p_z: inner(post, pre)?.norm_sqr(),
        unnormalized_terms,
    })
}

/// Mirror of the sum rule: `Σ_z Re[⟨z|Â|ψ⟩/⟨z|ψ⟩]·P(z)` over a complete
/// post-selection basis equals `P(a)`. Dark post-states contribute
/// `Re⟨ψ|z⟩⟨z|Â|ψ⟩`.
pub fn dual_sum_rule<T: Scalar>(observable: &Projector<T>, pre: &Ket<T>, post_basis: &[Ket<T>]) -> Result<T> {
    check_complete_basis(post_basis)?;
    let a_psi = observable.apply(pre)?;
    let mut total = T::zero();
    for z in post_basis {
        let z_psi = inner(z, pre)?;
        let z_a_psi = inner(z, &a_psi)?;
        total = total
            + if z_psi.norm() <= T::overlap_cutoff() {
                (z_psi.conj() * z_a_psi).re
            } else {
                (z_a_psi / z_psi).re * z_psi.norm_sqr()
            };
    }
    Ok(total)
}

/// `⟨ψ|ẐÂ|ψ⟩`.
pub fn joint_quasi_probability<T: Scalar>(
    observable: &Projector<T>,
    post_proj: &Projector<T>,
    pre: &Ket<T>,
) -> Result<Amplitude<T>> {
    let za_psi = post_proj.apply(&observable.apply(pre)?)?;
    inner(pre, &za_psi)
}

/// `(1/2i)·⟨ψ|[Ẑ,Â]|ψ⟩ / P(z)`, which equals the imaginary part of the weak
/// value.
pub fn imag_via_commutator<T: Scalar>(
    observable: &Projector<T>,
    post_proj: &Projector<T>,
    pre: &Ket<T>,
) -> Result<T> {
    let p_z = post_proj.expectation(pre)?;
    if p_z <= T::overlap_cutoff() {
        return Err(Error::OrthogonalPostSelection { which: "⟨z|ψ⟩" });
    }
    let za = joint_quasi_probability(observable, post_proj, pre)?;
    let az = joint_quasi_probability(post_proj, observable, pre)?;
    let two_i = Complex::new(T::zero(), T::lit(2.0));
    Ok(((za - az) / two_i).re / p_z)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertaintyBound<T: Scalar> {
    /// `|Im wv|`
    pub lhs: T,
    /// `ΔZ·ΔA / P(z)`
    pub rhs: T,
}

impl<T: Scalar> UncertaintyBound<T> {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + T::identity_tol()
    }
}

/// Fluctuation of a projector in `state`: `sqrt(⟨P⟩ − ⟨P⟩²)`.
pub fn projector_fluctuation<T: Scalar>(p: &Projector<T>, state: &Ket<T>) -> Result<T> {
    let mean = p.expectation(state)?;
    Ok((mean - mean * mean).max(T::zero()).sqrt())
}

pub fn uncertainty_bound_check<T: Scalar>(
    observable: &Projector<T>,
    post_proj: &Projector<T>,
    pre: &Ket<T>,
) -> Result<UncertaintyBound<T>> {
    let wv = weak_value(observable, pre, post_proj.axis())?;
    let p_z = post_proj.expectation(pre)?;
    let delta_a = projector_fluctuation(observable, pre)?;
    let delta_z = projector_fluctuation(post_proj, pre)?;
    Ok(UncertaintyBound {
        lhs: wv.imag_part.abs(),
        rhs: delta_z * delta_a / p_z,
    })
}

/// Phase of the three-vertex Bargmann invariant `⟨ψ|z⟩⟨z|a⟩⟨a|ψ⟩`, in
/// `(−π, π]`.
pub fn geometric_phase<T: Scalar>(pre: &Ket<T>, mid: &Ket<T>, post: &Ket<T>) -> Result<T> {
    let product = inner(pre, post)? * inner(post, mid)? * inner(mid, pre)?;
    let scale = pre.norm_sqr() * mid.norm_sqr() * post.norm_sqr();
    if product.norm() <= T::overlap_cutoff() * scale.max(T::one()) {
        return Err(Error::DegenerateLoop);
    }
    let phase = product.arg();
    Ok(if phase <= -T::PI() { T::PI() } else { phase })
}
