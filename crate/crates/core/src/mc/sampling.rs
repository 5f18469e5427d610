//! Samplers for the exact post-selected probe densities.
//!
//! Primary method is rejection from a Gaussian envelope. For the position
//! density the envelope is the mixture of the two displaced Gaussians with
//! weights `|c_t|`, `|c_o|`; for momentum it is the unshifted probe
//! distribution. Both bound the target by `M = (|c_t| + |c_o|)² / norm`.
//! When the acceptance rate `1/M` falls below 5% (near-dark ports) the
//! sampler switches to inverse-CDF on a 4096-point grid.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::probe::{momentum_density, position_density, PortWave};

pub const MIN_REJECTION_EFFICIENCY: f64 = 0.05;
pub const GRID_POINTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rejection,
    Grid,
}

#[derive(Clone, Debug)]
pub enum ValueSampler {
    Position(PositionRejection),
    Momentum(MomentumRejection),
    Grid(GridSampler),
}

impl ValueSampler {
    pub fn position(wave: &PortWave) -> Result<Self> {
        let density = position_density(wave)?;
        let r = PositionRejection::new(wave);
        if r.efficiency(density.norm()) >= MIN_REJECTION_EFFICIENCY {
            Ok(ValueSampler::Position(r))
        } else {
            let (lo, hi) = density.support();
            Ok(ValueSampler::Grid(GridSampler::new(|z| density.pdf(z), lo, hi, GRID_POINTS)))
        }
    }

    pub fn momentum(wave: &PortWave) -> Result<Self> {
        let density = momentum_density(wave)?;
        let r = MomentumRejection::new(wave);
        if r.efficiency(density.norm()) >= MIN_REJECTION_EFFICIENCY {
            Ok(ValueSampler::Momentum(r))
        } else {
            let (lo, hi) = density.support();
            Ok(ValueSampler::Grid(GridSampler::new(|p| density.pdf(p), lo, hi, GRID_POINTS)))
        }
    }

    pub fn method(&self) -> Method {
        match self {
            ValueSampler::Grid(_) => Method::Grid,
            _ => Method::Rejection,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ValueSampler::Position(s) => s.sample(rng),
            ValueSampler::Momentum(s) => s.sample(rng),
            ValueSampler::Grid(s) => s.sample(rng),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PositionRejection {
    wave: PortWave,
    a: f64,
    b: f64,
    inv_4s2: f64,
}

impl PositionRejection {
    fn new(wave: &PortWave) -> Self {
        let s = wave.probe.sigma();
        PositionRejection {
            wave: *wave,
            a: wave.c_thru.norm(),
            b: wave.c_other.norm(),
            inv_4s2: 0.25 / (s * s),
        }
    }

    pub fn efficiency(&self, norm: f64) -> f64 {
        norm / (self.a + self.b).powi(2)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sigma = self.wave.probe.sigma();
        let g = self.wave.g;
        let total = self.a + self.b;
        loop {
            let thru = rng.random::<f64>() * total < self.a;
            let n: f64 = rng.sample(StandardNormal);
            let z = n * sigma + if thru { g } else { 0.0 };
            // Gaussian prefactors cancel in the ratio
            let e1 = (-(z - g) * (z - g) * self.inv_4s2).exp();
            let e0 = (-z * z * self.inv_4s2).exp();
            let target = (self.wave.c_thru * e1 + self.wave.c_other * e0).norm_sqr();
            let envelope = total * (self.a * e1 * e1 + self.b * e0 * e0);
            if envelope <= 0.0 || rng.random::<f64>() * envelope <= target {
                return z;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct MomentumRejection {
    wave: PortWave,
    bound: f64,
}

impl MomentumRejection {
    fn new(wave: &PortWave) -> Self {
        MomentumRejection {
            wave: *wave,
            bound: (wave.c_thru.norm() + wave.c_other.norm()).powi(2),
        }
    }

    pub fn efficiency(&self, norm: f64) -> f64 {
        norm / self.bound
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sp = self.wave.probe.sigma_p();
        let g = self.wave.g;
        loop {
            let n: f64 = rng.sample(StandardNormal);
            let p = n * sp;
            let (sin, cos) = (p * g).sin_cos();
            let phase = num_complex::Complex64::new(cos, -sin);
            let target = (self.wave.c_thru * phase + self.wave.c_other).norm_sqr();
            if rng.random::<f64>() * self.bound <= target {
                return p;
            }
        }
    }
}

/// Inverse-CDF sampling from a tabulated density, linear within each cell.
#[derive(Clone, Debug)]
pub struct GridSampler {
    lo: f64,
    step: f64,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridSampler {
    pub fn new<F: Fn(f64) -> f64>(pdf: F, lo: f64, hi: f64, points: usize) -> Self {
        let points = points.max(2);
        let step = (hi - lo) / (points - 1) as f64;
        let values: Vec<f64> = (0..points).map(|i| pdf(lo + step * i as f64).max(0.0)).collect();
        let mut cdf = Vec::with_capacity(points);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * step;
            cdf.push(acc);
        }
        GridSampler {
            lo,
            step,
            pdf: values,
            cdf,
        }
    }

    pub fn total_mass(&self) -> f64 {
        *self.cdf.last().expect("grid has at least two points")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let target = rng.random::<f64>() * self.total_mass();
        self.invert(target)
    }

    pub fn invert(&self, target: f64) -> f64 {
        // last index with cdf ≤ target
        let cell = match self.cdf.partition_point(|&c| c <= target) {
            0 => 0,
            i => (i - 1).min(self.cdf.len() - 2),
        };
        let r = target - self.cdf[cell];
        let (p0, p1) = (self.pdf[cell], self.pdf[cell + 1]);
        let slope = (p1 - p0) / self.step;
        let s = if slope.abs() * self.step <= 1e-12 * p0.max(1e-300) {
            if p0 > 0.0 { r / p0 } else { 0.5 * self.step }
        } else {
            let disc = (p0 * p0 + 2.0 * slope * r).max(0.0);
            (disc.sqrt() - p0) / slope
        };
        self.lo + self.step * cell as f64 + s.clamp(0.0, self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mzi::{Arm, GlassPlacement, MziState, Port};
    use crate::probe::{port_wave, GaussianProbe};
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;
    use std::f64::consts::FRAC_1_SQRT_2 as S;

    fn wave(state: MziState<f64>, g: f64, port: Port) -> PortWave {
        port_wave(&state, &GlassPlacement::new(Arm::B, g).unwrap(), &GaussianProbe::default(), port)
    }

    fn moments<F: FnMut() -> f64>(n: usize, mut draw: F) -> (f64, f64) {
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let x = draw();
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn grid_inverts_uniform_exactly() {
        let g = GridSampler::new(|_| 1.0, 0.0, 2.0, 5);
        assert!((g.total_mass() - 2.0).abs() < 1e-15);
        assert!((g.invert(0.3) - 0.3).abs() < 1e-12);
        assert!((g.invert(1.7) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn grid_inverts_linear_density() {
        // pdf(x) = x on [0, 1]: cdf = x²/2
        let g = GridSampler::new(|x| x, 0.0, 1.0, 3);
        for x in [0.1f64, 0.45, 0.8] {
            assert!((g.invert(x * x / 2.0) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn near_dark_port_uses_grid() {
        let dark = wave(MziState::real(S, S).unwrap(), 0.05, Port::DPrime);
        assert_eq!(ValueSampler::position(&dark).unwrap().method(), Method::Grid);
        assert_eq!(ValueSampler::momentum(&dark).unwrap().method(), Method::Grid);
        let bright = wave(MziState::real((0.2f64).sqrt(), -(0.8f64).sqrt()).unwrap(), 0.05, Port::D);
        assert_eq!(ValueSampler::position(&bright).unwrap().method(), Method::Rejection);
    }

    #[test]
    fn samplers_reproduce_exact_means() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        let states = [
            MziState::real((0.2f64).sqrt(), -(0.8f64).sqrt()).unwrap(),
            MziState::new(num_complex::Complex64::new(S, 0.0), num_complex::Complex64::new(0.0, S)).unwrap(),
            MziState::real(S, S).unwrap(),
        ];
        for s in states {
            for port in Port::BOTH {
                let w = wave(s, 0.4, port);
                let pos = position_density(&w).unwrap();
                let sampler = ValueSampler::position(&w).unwrap();
                let (m, se) = moments(100_000, || sampler.sample(&mut rng));
                assert!((m - pos.mean()).abs() < 5.0 * se, "{s:?} {port}: {m} vs {}", pos.mean());

                let mom = momentum_density(&w).unwrap();
                let sampler = ValueSampler::momentum(&w).unwrap();
                let (m, se) = moments(100_000, || sampler.sample(&mut rng));
                assert!((m - mom.mean()).abs() < 5.0 * se, "{s:?} {port}: {m} vs {}", mom.mean());
            }
        }
    }

    #[test]
    fn grid_fallback_reproduces_dark_port_moments() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        let w = wave(MziState::real(S, S).unwrap(), 0.05, Port::DPrime);
        let pos = position_density(&w).unwrap();
        let sampler = ValueSampler::position(&w).unwrap();
        let (m, se) = moments(100_000, || sampler.sample(&mut rng));
        assert!((m - pos.mean()).abs() < 5.0 * se);
        let (m2, _) = moments(100_000, || sampler.sample(&mut rng).powi(2));
        assert!((m2 - pos.second_moment()).abs() < 0.05 * pos.second_moment());
    }
}
