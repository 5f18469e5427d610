//! The two-path Mach-Zehnder model.
//!
//! Beam-splitter convention (frozen; every derived sign depends on it):
//!
//! ```text
//! |A⟩  → (|B⟩ + |C⟩)/√2      |B⟩ → (|D⟩ − |D'⟩)/√2
//! |A'⟩ → (|B⟩ − |C⟩)/√2      |C⟩ → (|D⟩ + |D'⟩)/√2
//! ```
//!
//! so that `|A⟩ → |D⟩` and `|A'⟩ → −|D'⟩` overall. States are given on the
//! arms as `|ψ⟩ = β|B⟩ + γ|C⟩`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Amplitude, Basis, Ket};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathLabel {
    A,
    #[serde(rename = "A'")]
    APrime,
    B,
    C,
    D,
    #[serde(rename = "D'")]
    DPrime,
}

impl PathLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PathLabel::A => "A",
            PathLabel::APrime => "A'",
            PathLabel::B => "B",
            PathLabel::C => "C",
            PathLabel::D => "D",
            PathLabel::DPrime => "D'",
        }
    }

    pub fn is_input(self) -> bool {
        matches!(self, PathLabel::A | PathLabel::APrime)
    }
}

impl fmt::Display for PathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PathLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A" => PathLabel::A,
            "A'" | "Ap" => PathLabel::APrime,
            "B" => PathLabel::B,
            "C" => PathLabel::C,
            "D" => PathLabel::D,
            "D'" | "Dp" => PathLabel::DPrime,
            _ => {
                return Err(Error::InvalidLabel {
                    label: s.to_string(),
                    role: "path",
                })
            }
        })
    }
}

/// Interferometer arm (where a glass slide can sit).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    B,
    C,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::B, Arm::C];

    pub fn label(self) -> PathLabel {
        match self {
            Arm::B => PathLabel::B,
            Arm::C => PathLabel::C,
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::B => Arm::C,
            Arm::C => Arm::B,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl TryFrom<PathLabel> for Arm {
    type Error = Error;
    fn try_from(l: PathLabel) -> Result<Self> {
        match l {
            PathLabel::B => Ok(Arm::B),
            PathLabel::C => Ok(Arm::C),
            _ => Err(Error::InvalidLabel {
                label: l.to_string(),
                role: "arm",
            }),
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.label().fmt(f)
    }
}

/// Output port of the second splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Port {
    D,
    #[serde(rename = "D'")]
    DPrime,
}

impl Port {
    pub const BOTH: [Port; 2] = [Port::D, Port::DPrime];

    pub fn label(self) -> PathLabel {
        match self {
            Port::D => PathLabel::D,
            Port::DPrime => PathLabel::DPrime,
        }
    }

    pub fn as_str(self) -> &'static str {
        self.label().as_str()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Second-splitter amplitude `⟨port|U|arm⟩`.
    pub fn splitter_coefficient<T: Scalar>(self, arm: Arm) -> T {
        let s = T::FRAC_1_SQRT_2();
        match (arm, self) {
            (Arm::B, Port::DPrime) => -s,
            _ => s,
        }
    }
}

impl TryFrom<PathLabel> for Port {
    type Error = Error;
    fn try_from(l: PathLabel) -> Result<Self> {
        match l {
            PathLabel::D => Ok(Port::D),
            PathLabel::DPrime => Ok(Port::DPrime),
            _ => Err(Error::InvalidLabel {
                label: l.to_string(),
                role: "output port",
            }),
        }
    }
}

impl FromStr for Port {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Port::try_from(s.parse::<PathLabel>()?)
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Normalized input `β|B⟩ + γ|C⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct MziState<T: Scalar> {
    pub beta: Amplitude<T>,
    pub gamma: Amplitude<T>,
}

impl<T: Scalar> MziState<T> {
    pub fn new(beta: Amplitude<T>, gamma: Amplitude<T>) -> Result<Self> {
        let state = MziState { beta, gamma };
        let n2 = state.norm_sqr();
        if !n2.is_finite() || (n2 - T::one()).abs() > T::identity_tol() {
            return Err(Error::NotNormalized {
                norm_sqr: n2.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(state)
    }

    /// Rescales `(β, γ)` to unit norm.
    pub fn normalized(beta: Amplitude<T>, gamma: Amplitude<T>) -> Result<Self> {
        let n2 = beta.norm_sqr() + gamma.norm_sqr();
        if !(n2 > T::zero()) || !n2.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = T::one() / n2.sqrt();
        Ok(MziState {
            beta: beta.scale(inv),
            gamma: gamma.scale(inv),
        })
    }

    pub fn real(beta: T, gamma: T) -> Result<Self> {
        MziState::new(Complex::new(beta, T::zero()), Complex::new(gamma, T::zero()))
    }

    pub fn norm_sqr(&self) -> T {
        self.beta.norm_sqr() + self.gamma.norm_sqr()
    }

    pub fn amplitude(&self, arm: Arm) -> Amplitude<T> {
        match arm {
            Arm::B => self.beta,
            Arm::C => self.gamma,
        }
    }

    /// `|⟨arm|ψ⟩|²`.
    pub fn arm_probability(&self, arm: Arm) -> T {
        self.amplitude(arm).norm_sqr()
    }

    pub fn arm_basis() -> Basis {
        Basis::new(["B", "C"]).expect("static labels")
    }

    /// `|ψ⟩` as an explicit ket over `(B, C)`.
    pub fn ket(&self) -> Ket<T> {
        Ket::new(Self::arm_basis(), vec![self.beta, self.gamma]).expect("two finite components")
    }

    pub fn arm_ket(arm: Arm) -> Ket<T> {
        Ket::basis_state(&Self::arm_basis(), arm.index()).expect("arm index in range")
    }

    /// Output port pulled back to the arm basis: `U†|port⟩`.
    pub fn port_ket(port: Port) -> Ket<T> {
        let comps = Arm::BOTH
            .iter()
            .map(|&arm| Complex::new(port.splitter_coefficient::<T>(arm), T::zero()))
            .collect();
        Ket::new(Self::arm_basis(), comps).expect("two finite components")
    }
}

/// Arm amplitudes after the first splitter.
pub fn first_splitter_in<T: Scalar>(amp_a: Amplitude<T>, amp_ap: Amplitude<T>) -> Result<MziState<T>> {
    let s = T::FRAC_1_SQRT_2();
    MziState::new((amp_a + amp_ap).scale(s), (amp_a - amp_ap).scale(s))
}

/// Port amplitudes `(⟨D|ψ⟩, ⟨D'|ψ⟩)` after the second splitter.
pub fn beam_splitter_out<T: Scalar>(state: &MziState<T>) -> (Amplitude<T>, Amplitude<T>) {
    (port_amplitude(state, Port::D), port_amplitude(state, Port::DPrime))
}

pub fn port_amplitude<T: Scalar>(state: &MziState<T>, port: Port) -> Amplitude<T> {
    state.beta.scale(port.splitter_coefficient(Arm::B)) + state.gamma.scale(port.splitter_coefficient(Arm::C))
}

/// `|⟨port|ψ⟩|²`: `|β+γ|²/2` for D, `|β−γ|²/2` for D'.
pub fn port_probability<T: Scalar>(state: &MziState<T>, port: Port) -> T {
    port_amplitude(state, port).norm_sqr()
}

/// Closed-form `⟨port|Â_arm|ψ⟩/⟨port|ψ⟩`:
/// `(B,D) β/(β+γ)`, `(C,D) γ/(β+γ)`, `(B,D') β/(β−γ)`, `(C,D') −γ/(β−γ)`.
pub fn theoretical_weak_value<T: Scalar>(state: &MziState<T>, arm: Arm, port: Port) -> Result<Amplitude<T>> {
    let (beta, gamma) = (state.beta, state.gamma);
    let denom = match port {
        Port::D => beta + gamma,
        Port::DPrime => beta - gamma,
    };
    if (denom.scale(T::FRAC_1_SQRT_2())).norm() <= T::overlap_cutoff() {
        return Err(Error::OrthogonalPostSelection {
            which: match port {
                Port::D => "⟨D|ψ⟩",
                Port::DPrime => "⟨D'|ψ⟩",
            },
        });
    }
    let numer = match (arm, port) {
        (Arm::B, _) => beta,
        (Arm::C, Port::D) => gamma,
        (Arm::C, Port::DPrime) => -gamma,
    };
    Ok(numer / denom)
}

/// Glass slide placement; `g = 0` means no glass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlassPlacement {
    pub arm: Arm,
    pub g: f64,
}

impl GlassPlacement {
    pub fn new(arm: Arm, g: f64) -> Result<Self> {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::InvalidConfig(format!("coupling g must be finite and ≥ 0, got {g}")));
        }
        Ok(GlassPlacement { arm, g })
    }
}
