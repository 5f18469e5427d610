//! Gaussian meter, impulsive coupling, and the exact post-selected probe
//! densities at each output port.
//!
//! Units: the probe width σ is the unit of length and ħ = 1, so the coupling
//! `g` is the displacement imparted by the glass and `Var(p) = 1/(4σ²)`.
//!
//! The glass sits in one arm and shifts only that arm's probe component:
//! after the second splitter the (unnormalized) probe wave at a port is
//!
//! ```text
//! φ(z) = c_thru·f(z − g) + c_other·f(z)
//! ```
//!
//! with `c_thru`, `c_other` the splitter coefficients of the glass arm and the
//! other arm into that port. All closed forms below are exact in `g`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mzi::{theoretical_weak_value, Arm, GlassPlacement, MziState, Port};

/// Minimum-uncertainty Gaussian probe with position spread `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianProbe {
    sigma: f64,
}

impl Default for GaussianProbe {
    fn default() -> Self {
        GaussianProbe { sigma: 1.0 }
    }
}

impl GaussianProbe {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidConfig(format!("probe width must be positive, got {sigma}")));
        }
        Ok(GaussianProbe { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Momentum variance `1/(4σ²)`.
    pub fn var_p(&self) -> f64 {
        0.25 / (self.sigma * self.sigma)
    }

    pub fn sigma_p(&self) -> f64 {
        0.5 / self.sigma
    }

    /// `f(z) = (2πσ²)^(−1/4)·exp(−z²/(4σ²))`
    pub fn wavefunction(&self, z: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        (2.0 * PI * s2).powf(-0.25) * (-z * z / (4.0 * s2)).exp()
    }

    /// `f'(z)`
    pub fn wavefunction_derivative(&self, z: f64) -> f64 {
        -z / (2.0 * self.sigma * self.sigma) * self.wavefunction(z)
    }

    /// Momentum-space amplitude (real, positive).
    pub fn momentum_wavefunction(&self, p: f64) -> f64 {
        let vp = self.var_p();
        (2.0 * PI * vp).powf(-0.25) * (-p * p / (4.0 * vp)).exp()
    }

    /// `∫ f(z − g) f(z) dz = exp(−g²/(8σ²))`
    pub fn overlap(&self, g: f64) -> f64 {
        (-g * g / (8.0 * self.sigma * self.sigma)).exp()
    }
}

/// Post-selected probe amplitude at one port (unnormalized).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortWave {
    pub c_thru: Complex64,
    pub c_other: Complex64,
    pub g: f64,
    pub probe: GaussianProbe,
    pub port: Port,
}

pub fn port_wave(state: &MziState<f64>, glass: &GlassPlacement, probe: &GaussianProbe, port: Port) -> PortWave {
    let thru = glass.arm;
    let other = thru.other();
    PortWave {
        c_thru: state.amplitude(thru) * port.splitter_coefficient::<f64>(thru),
        c_other: state.amplitude(other) * port.splitter_coefficient::<f64>(other),
        g: glass.g,
        probe: *probe,
        port,
    }
}

impl PortWave {
    /// `φ(z)`
    pub fn amplitude(&self, z: f64) -> Complex64 {
        self.c_thru * self.probe.wavefunction(z - self.g) + self.c_other * self.probe.wavefunction(z)
    }

    /// `φ'(z)`
    pub fn amplitude_derivative(&self, z: f64) -> Complex64 {
        self.c_thru * self.probe.wavefunction_derivative(z - self.g)
            + self.c_other * self.probe.wavefunction_derivative(z)
    }

    /// `φ̃(p) = f̃(p)·(c_thru·e^{−ipg} + c_other)`
    pub fn momentum_amplitude(&self, p: f64) -> Complex64 {
        (self.c_thru * Complex64::from_polar(1.0, -p * self.g) + self.c_other) * self.probe.momentum_wavefunction(p)
    }

    /// `c_thru·conj(c_other)`
    pub fn cross(&self) -> Complex64 {
        self.c_thru * self.c_other.conj()
    }

    pub fn overlap(&self) -> f64 {
        self.probe.overlap(self.g)
    }

    /// Position interval holding all but a negligible tail.
    pub fn position_support(&self) -> (f64, f64) {
        let w = 12.0 * self.probe.sigma() + self.g.abs();
        (-w, w)
    }

    pub fn momentum_support(&self) -> (f64, f64) {
        let w = 12.0 * self.probe.sigma_p();
        (-w, w)
    }
}

/// `∫|φ|² = |c_t|² + |c_o|² + 2·Re[c_t·c̄_o]·exp(−g²/(8σ²))`
pub fn exact_port_probability(wave: &PortWave) -> f64 {
    let p = wave.c_thru.norm_sqr() + wave.c_other.norm_sqr() + 2.0 * wave.cross().re * wave.overlap();
    p.max(0.0)
}

const MIN_PORT_NORM: f64 = 1e-15;

fn checked_norm(wave: &PortWave) -> Result<f64> {
    let norm = exact_port_probability(wave);
    if norm <= MIN_PORT_NORM {
        Err(Error::ZeroNormPort {
            port: wave.port.as_str(),
        })
    } else {
        Ok(norm)
    }
}

/// Normalized `|φ(z)|²`.
#[derive(Clone, Copy, Debug)]
pub struct PositionDensity {
    wave: PortWave,
    norm: f64,
}

impl PositionDensity {
    pub fn wave(&self) -> &PortWave {
        &self.wave
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn pdf(&self, z: f64) -> f64 {
        self.wave.amplitude(z).norm_sqr() / self.norm
    }

    /// `g·(|c_t|² + Re[c_t c̄_o]·e^{−g²/8σ²}) / norm`
    pub fn mean(&self) -> f64 {
        let w = &self.wave;
        w.g * (w.c_thru.norm_sqr() + w.cross().re * w.overlap()) / self.norm
    }

    /// `E[z²]`: the intensity is a signed mixture of three Gaussians of
    /// width σ centred at g, 0 and g/2.
    pub fn second_moment(&self) -> f64 {
        let w = &self.wave;
        let s2 = w.probe.sigma().powi(2);
        let g = w.g;
        (w.c_thru.norm_sqr() * (s2 + g * g)
            + w.c_other.norm_sqr() * s2
            + 2.0 * w.cross().re * w.overlap() * (s2 + 0.25 * g * g))
            / self.norm
    }

    pub fn support(&self) -> (f64, f64) {
        self.wave.position_support()
    }
}

/// Normalized `|φ̃(p)|²`.
#[derive(Clone, Copy, Debug)]
pub struct MomentumDensity {
    wave: PortWave,
    norm: f64,
}

impl MomentumDensity {
    pub fn wave(&self) -> &PortWave {
        &self.wave
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn pdf(&self, p: f64) -> f64 {
        self.wave.momentum_amplitude(p).norm_sqr() / self.norm
    }

    /// `2·Var(p)·g·e^{−g²/8σ²}·Im[c_t c̄_o] / norm`
    pub fn mean(&self) -> f64 {
        let w = &self.wave;
        2.0 * w.probe.var_p() * w.g * w.overlap() * w.cross().im / self.norm
    }

    /// `E[p²]`, from the Gaussian characteristic function.
    pub fn second_moment(&self) -> f64 {
        let w = &self.wave;
        let v = w.probe.var_p();
        let direct = (w.c_thru.norm_sqr() + w.c_other.norm_sqr()) * v;
        // ∫p² |f̃|² e^{−ipg} dp = (v − v²g²)·e^{−v g²/2}
        let cross = 2.0 * w.cross().re * (v - v * v * w.g * w.g) * w.overlap();
        (direct + cross) / self.norm
    }

    pub fn support(&self) -> (f64, f64) {
        self.wave.momentum_support()
    }
}

pub fn position_density(wave: &PortWave) -> Result<PositionDensity> {
    Ok(PositionDensity {
        wave: *wave,
        norm: checked_norm(wave)?,
    })
}

pub fn momentum_density(wave: &PortWave) -> Result<MomentumDensity> {
    Ok(MomentumDensity {
        wave: *wave,
        norm: checked_norm(wave)?,
    })
}

/// First-order probe shifts at a port.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakLimitShift {
    /// `g·Re wv`
    pub z_shift: f64,
    /// `2g·Var(p)·Im wv`
    pub p_shift: f64,
}

pub fn weak_limit_summary(
    state: &MziState<f64>,
    glass: &GlassPlacement,
    probe: &GaussianProbe,
    port: Port,
) -> Result<WeakLimitShift> {
    let wv = theoretical_weak_value(state, glass.arm, port)?;
    Ok(WeakLimitShift {
        z_shift: glass.g * wv.re,
        p_shift: 2.0 * glass.g * probe.var_p() * wv.im,
    })
}

/// Exact expected probe shifts `(P(port)·⟨z⟩, P(port)·⟨p⟩)` per photon sent.
pub fn expected_sums_per_photon(
    state: &MziState<f64>,
    arm: Arm,
    g: f64,
    probe: &GaussianProbe,
    port: Port,
) -> (f64, f64) {
    let glass = GlassPlacement { arm, g };
    let wave = port_wave(state, &glass, probe, port);
    let norm = exact_port_probability(&wave);
    if norm <= MIN_PORT_NORM {
        return (0.0, 0.0);
    }
    let pos = PositionDensity { wave, norm };
    let mom = MomentumDensity { wave, norm };
    (norm * pos.mean(), norm * mom.mean())
}
