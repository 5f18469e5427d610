//! Estimators that turn probe sums into weak values, priors and the input
//! state, with first-order (delta-method) error bars.
//!
//! Every estimate is a function of at most eight raw sums: the position sum
//! `Z` and momentum sum `P` at each port, for the glass in B and in C. The
//! four accumulators behind them come from independent runs, so the
//! covariance of the raw sums is block diagonal with one 2×2 block (D, D')
//! per accumulator.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{standard_errors, Observable, RunTag, ShiftAccumulator};
use crate::mzi::{port_probability, Arm, MziState, Port};
use crate::probe::{expected_sums_per_photon, GaussianProbe};
use crate::qcore::Projector;
use crate::weakvalues::projector_fluctuation;

/// Denominators must exceed this many standard errors.
pub const DEGENERACY_SIGMAS: f64 = 3.0;

const N_RAW: usize = 8;

fn raw_index(arm: Arm, mode: Observable, port: Port) -> usize {
    let kind = match mode {
        Observable::Position => 0,
        Observable::Momentum => 1,
    };
    arm.index() * 4 + kind * 2 + port.index()
}

/// A complex quantity together with its gradient with respect to the raw
/// sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lin {
    pub value: Complex64,
    pub grad: [Complex64; N_RAW],
}

impl Lin {
    pub fn constant(value: Complex64) -> Self {
        Lin {
            value,
            grad: [Complex64::new(0.0, 0.0); N_RAW],
        }
    }

    fn variable(value: Complex64, index: usize, weight: Complex64) -> Self {
        let mut l = Lin::constant(value);
        l.grad[index] = weight;
        l
    }

    fn map_grad(self, value: Complex64, f: impl Fn(Complex64) -> Complex64) -> Self {
        Lin {
            value,
            grad: self.grad.map(f),
        }
    }

    pub fn scale(self, k: Complex64) -> Self {
        self.map_grad(self.value * k, |d| d * k)
    }

    pub fn recip(self) -> Self {
        let inv = self.value.inv();
        let d = -inv * inv;
        self.map_grad(inv, |g| g * d)
    }
}

impl Add for Lin {
    type Output = Lin;
    fn add(self, o: Lin) -> Lin {
        let mut grad = self.grad;
        for (g, h) in grad.iter_mut().zip(o.grad) {
            *g += h;
        }
        Lin {
            value: self.value + o.value,
            grad,
        }
    }
}

impl Neg for Lin {
    type Output = Lin;
    fn neg(self) -> Lin {
        self.map_grad(-self.value, |g| -g)
    }
}

impl Sub for Lin {
    type Output = Lin;
    fn sub(self, o: Lin) -> Lin {
        self + (-o)
    }
}

impl Mul for Lin {
    type Output = Lin;
    fn mul(self, o: Lin) -> Lin {
        let mut grad = self.grad;
        for (g, h) in grad.iter_mut().zip(o.grad) {
            *g = *g * o.value + self.value * h;
        }
        Lin {
            value: self.value * o.value,
            grad,
        }
    }
}

impl Div for Lin {
    type Output = Lin;
    fn div(self, o: Lin) -> Lin {
        self * o.recip()
    }
}

/// Block-diagonal covariance of the raw sums. Missing blocks count as
/// exactly known.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RawCovariance {
    blocks: [Option<[[f64; 2]; 2]>; 4],
}

impl RawCovariance {
    fn insert(&mut self, arm: Arm, mode: Observable, block: [[f64; 2]; 2]) -> Result<()> {
        let slot = &mut self.blocks[raw_index(arm, mode, Port::D) / 2];
        if slot.is_some() {
            return Err(Error::MismatchedRuns(format!(
                "two {mode} runs with the glass in {arm}"
            )));
        }
        *slot = Some(block);
        Ok(())
    }

    pub fn from_shifts(shifts: &[&ComplexShift]) -> Result<Self> {
        let mut cov = RawCovariance::default();
        for s in shifts {
            cov.insert(s.arm, Observable::Position, s.cov_z)?;
            cov.insert(s.arm, Observable::Momentum, s.cov_p)?;
        }
        Ok(cov)
    }

    pub fn from_accumulators(accs: &[&ShiftAccumulator]) -> Result<Self> {
        let mut cov = RawCovariance::default();
        for a in accs {
            cov.insert(a.glass_arm, a.mode, a.sum_covariance())?;
        }
        Ok(cov)
    }

    /// `sqrt(Var Re + Var Im)` of a linearized quantity.
    pub fn std_error(&self, x: &Lin) -> f64 {
        let mut var = 0.0;
        for (b, block) in self.blocks.iter().enumerate() {
            let Some(c) = block else { continue };
            let (i, j) = (2 * b, 2 * b + 1);
            let (a, b) = (x.grad[i], x.grad[j]);
            for (gi, gj) in [(a.re, b.re), (a.im, b.im)] {
                var += gi * gi * c[0][0] + 2.0 * gi * gj * c[0][1] + gj * gj * c[1][1];
            }
        }
        var.max(0.0).sqrt()
    }
}

/// Result of one estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub formula_id: String,
    pub point_re: f64,
    pub point_im: f64,
    pub std_error: f64,
    pub n_used: u64,
    pub g: f64,
    pub seed: u64,
    /// Runs that fed the estimate, as `glass/mode` labels.
    pub inputs: Vec<String>,
}

impl EstimateReport {
    pub fn point(&self) -> Complex64 {
        Complex64::new(self.point_re, self.point_im)
    }

    /// `|point − target| ≤ k·se`
    pub fn within(&self, target: Complex64, k: f64) -> bool {
        (self.point() - target).norm() <= k * self.std_error
    }
}

fn report(formula_id: &str, x: &Lin, cov: &RawCovariance, n_used: u64, tag: &RunTag, inputs: Vec<String>) -> EstimateReport {
    EstimateReport {
        formula_id: formula_id.to_string(),
        point_re: x.value.re,
        point_im: x.value.im,
        std_error: cov.std_error(x),
        n_used,
        g: tag.g,
        seed: tag.seed,
        inputs,
    }
}

fn require_resolved(formula: &'static str, d: &Lin, cov: &RawCovariance) -> Result<()> {
    let value = d.value.norm();
    let se = cov.std_error(d);
    if !(value > DEGENERACY_SIGMAS * se) || !value.is_finite() {
        return Err(Error::DegenerateDenominator { formula, value, se });
    }
    Ok(())
}

fn label(arm: Arm, mode: Observable) -> String {
    format!("{arm}/{mode}")
}

fn acc_sum(acc: &ShiftAccumulator, port: Port) -> Lin {
    let one = Complex64::new(1.0, 0.0);
    Lin::variable(one * acc.sum(port), raw_index(acc.glass_arm, acc.mode, port), one)
}

/// Complex shifts `ξ = Z + i·P/(2·Var p)` at both ports for one glass arm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexShift {
    pub arm: Arm,
    /// Position sums `(Z_D, Z_D')`.
    pub z: [f64; 2],
    /// Momentum sums `(P_D, P_D')`.
    pub p: [f64; 2],
    pub cov_z: [[f64; 2]; 2],
    pub cov_p: [[f64; 2]; 2],
    /// Detected counts per port in the position and momentum runs.
    pub n_pos: [u64; 2],
    pub n_mom: [u64; 2],
    /// Photons sent per run.
    pub n_total: u64,
    pub var_p: f64,
    pub tag: RunTag,
}

impl ComplexShift {
    pub fn xi(&self, port: Port) -> Complex64 {
        let i = port.index();
        Complex64::new(self.z[i], self.p[i] / (2.0 * self.var_p))
    }

    pub fn lin(&self, port: Port) -> Lin {
        let mut l = Lin::constant(self.xi(port));
        l.grad[raw_index(self.arm, Observable::Position, port)] = Complex64::new(1.0, 0.0);
        l.grad[raw_index(self.arm, Observable::Momentum, port)] = Complex64::new(0.0, 1.0 / (2.0 * self.var_p));
        l
    }

    /// Standard error of `ξ_port` alone.
    pub fn xi_std_error(&self, port: Port) -> f64 {
        let i = port.index();
        (self.cov_z[i][i] + self.cov_p[i][i] / (4.0 * self.var_p * self.var_p)).sqrt()
    }

    /// Exact expected shifts for `n_total` photons per run, with zero
    /// covariance.
    pub fn expected(state: &MziState<f64>, arm: Arm, g: f64, probe: &GaussianProbe, n_total: u64) -> Self {
        let n = n_total as f64;
        let mut z = [0.0; 2];
        let mut p = [0.0; 2];
        let mut counts = [0; 2];
        for port in Port::BOTH {
            let (zs, ps) = expected_sums_per_photon(state, arm, g, probe, port);
            z[port.index()] = n * zs;
            p[port.index()] = n * ps;
            counts[port.index()] = (n * port_probability(state, port)).round() as u64;
        }
        ComplexShift {
            arm,
            z,
            p,
            cov_z: [[0.0; 2]; 2],
            cov_p: [[0.0; 2]; 2],
            n_pos: counts,
            n_mom: counts,
            n_total,
            var_p: probe.var_p(),
            tag: RunTag {
                state: *state,
                g,
                sigma: probe.sigma(),
                seed: 0,
            },
        }
    }

    /// Copy with `ξ_port` replaced by `−ξ_port`.
    pub fn negated(&self, port: Port) -> Self {
        let mut out = *self;
        let i = port.index();
        out.z[i] = -out.z[i];
        out.p[i] = -out.p[i];
        for c in [&mut out.cov_z, &mut out.cov_p] {
            c[0][1] = -c[0][1];
            c[1][0] = -c[1][0];
        }
        out
    }

    fn inputs(&self) -> Vec<String> {
        vec![
            label(self.arm, Observable::Position),
            label(self.arm, Observable::Momentum),
        ]
    }

    fn n_used(&self) -> u64 {
        2 * self.n_total
    }
}

/// Combines the position and momentum runs of one glass arm.
pub fn xi_from_runs(acc_pos: &ShiftAccumulator, acc_mom: &ShiftAccumulator, probe: &GaussianProbe) -> Result<ComplexShift> {
    if acc_pos.mode != Observable::Position || acc_mom.mode != Observable::Momentum {
        return Err(Error::MismatchedRuns("expected one position run and one momentum run".into()));
    }
    if !acc_pos.matches(acc_mom) {
        return Err(Error::MismatchedRuns(format!(
            "position run (glass {}, {:?}) and momentum run (glass {}, {:?}) differ",
            acc_pos.glass_arm, acc_pos.tag, acc_mom.glass_arm, acc_mom.tag
        )));
    }
    if acc_pos.n_total != acc_mom.n_total {
        return Err(Error::MismatchedRuns(format!(
            "photon counts differ: {} vs {}",
            acc_pos.n_total, acc_mom.n_total
        )));
    }
    if (acc_pos.tag.sigma - probe.sigma()).abs() > 1e-12 * probe.sigma() {
        return Err(Error::MismatchedRuns(format!(
            "runs used sigma = {}, probe has sigma = {}",
            acc_pos.tag.sigma,
            probe.sigma()
        )));
    }
    Ok(ComplexShift {
        arm: acc_pos.glass_arm,
        z: [acc_pos.d.z_sum, acc_pos.dp.z_sum],
        p: [acc_mom.d.p_sum, acc_mom.dp.p_sum],
        cov_z: acc_pos.sum_covariance(),
        cov_p: acc_mom.sum_covariance(),
        n_pos: [acc_pos.d.n, acc_pos.dp.n],
        n_mom: [acc_mom.d.n, acc_mom.dp.n],
        n_total: acc_pos.n_total,
        var_p: probe.var_p(),
        tag: acc_pos.tag,
    })
}

fn require_pair(xi_b: &ComplexShift, xi_c: &ComplexShift) -> Result<()> {
    if xi_b.arm != Arm::B || xi_c.arm != Arm::C {
        return Err(Error::MismatchedRuns(format!(
            "expected shifts for glass B then C, got {} and {}",
            xi_b.arm, xi_c.arm
        )));
    }
    if xi_b.tag != xi_c.tag || xi_b.n_total != xi_c.n_total || xi_b.var_p != xi_c.var_p {
        return Err(Error::MismatchedRuns("glass-B and glass-C shifts come from different setups".into()));
    }
    Ok(())
}

/// `Re wv ≈ Z_port/(g·n_port)`; keeps an `O(g)` bias.
pub fn wv_from_shift(acc: &ShiftAccumulator, port: Port, g: f64) -> Result<EstimateReport> {
    if g == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if acc.mode != Observable::Position {
        return Err(Error::MismatchedRuns("wv_from_shift needs a position run".into()));
    }
    let se = standard_errors(acc, port)?;
    let s = acc.port(port);
    Ok(EstimateReport {
        formula_id: format!("wv_from_shift[{}{}]", acc.glass_arm, port),
        point_re: s.z_sum / (g * s.n as f64),
        point_im: 0.0,
        std_error: se.se_z / g.abs(),
        n_used: s.n,
        g,
        seed: acc.tag.seed,
        inputs: vec![label(acc.glass_arm, acc.mode)],
    })
}

/// `Z_D/(Z_D + Z_D')` from one position run; tends to
/// `Re[⟨ψ|D̂|X⟩/⟨ψ|X⟩]` for glass in arm X.
pub fn counterfactual_wv(acc: &ShiftAccumulator) -> Result<EstimateReport> {
    if acc.mode != Observable::Position {
        return Err(Error::MismatchedRuns("counterfactual_wv needs a position run".into()));
    }
    let cov = RawCovariance::from_accumulators(&[acc])?;
    let zd = acc_sum(acc, Port::D);
    let total = zd + acc_sum(acc, Port::DPrime);
    require_resolved("Z_D/(Z_D+Z_D')", &total, &cov)?;
    let x = zd / total;
    Ok(report(
        &format!("counterfactual_wv[{}]", acc.glass_arm),
        &x,
        &cov,
        acc.n_total,
        &acc.tag,
        vec![label(acc.glass_arm, acc.mode)],
    ))
}

/// `Z^B/(Z^B + Z^C)` at one port; tends to `Re wv` of the chosen arm. The
/// C estimate is `1 −` the B estimate, so the pair sums to one exactly.
pub fn wv_ratio_across_arms(acc_b: &ShiftAccumulator, acc_c: &ShiftAccumulator, port: Port, arm: Arm) -> Result<EstimateReport> {
    if acc_b.glass_arm != Arm::B || acc_c.glass_arm != Arm::C {
        return Err(Error::MismatchedRuns("expected the glass-B run then the glass-C run".into()));
    }
    if acc_b.mode != Observable::Position || acc_c.mode != Observable::Position {
        return Err(Error::MismatchedRuns("wv_ratio_across_arms needs position runs".into()));
    }
    if acc_b.tag != acc_c.tag || acc_b.n_total != acc_c.n_total {
        return Err(Error::MismatchedRuns("glass-B and glass-C runs come from different setups".into()));
    }
    let cov = RawCovariance::from_accumulators(&[acc_b, acc_c])?;
    let zb = acc_sum(acc_b, port);
    let total = zb + acc_sum(acc_c, port);
    require_resolved("Z^B/(Z^B+Z^C)", &total, &cov)?;
    let ratio_b = zb / total;
    let x = match arm {
        Arm::B => ratio_b,
        Arm::C => Lin::constant(Complex64::new(1.0, 0.0)) - ratio_b,
    };
    Ok(report(
        &format!("wv_ratio_across_arms[{arm}{port}]"),
        &x,
        &cov,
        acc_b.n_total + acc_c.n_total,
        &acc_b.tag,
        vec![label(Arm::B, Observable::Position), label(Arm::C, Observable::Position)],
    ))
}

/// `η = ξ_D/(ξ_D + ξ_D')`; tends to `⟨ψ|D̂|X⟩/⟨ψ|X⟩` for glass in arm X.
pub fn eta(xi: &ComplexShift) -> Result<EstimateReport> {
    let cov = RawCovariance::from_shifts(&[xi])?;
    let d = xi.lin(Port::D);
    let total = d + xi.lin(Port::DPrime);
    require_resolved("ξ_D+ξ_D'", &total, &cov)?;
    Ok(report(
        &format!("eta[{}]", xi.arm),
        &(d / total),
        &cov,
        xi.n_used(),
        &xi.tag,
        xi.inputs(),
    ))
}

/// `ξ^B/(ξ^B + ξ^C)` at one port: the complex weak value of arm B.
pub fn complex_wv(xi_b: &ComplexShift, xi_c: &ComplexShift, port: Port) -> Result<EstimateReport> {
    require_pair(xi_b, xi_c)?;
    let cov = RawCovariance::from_shifts(&[xi_b, xi_c])?;
    let b = xi_b.lin(port);
    let total = b + xi_c.lin(port);
    require_resolved("ξ^B+ξ^C", &total, &cov)?;
    let mut inputs = xi_b.inputs();
    inputs.extend(xi_c.inputs());
    Ok(report(
        &format!("complex_wv[B{port}]"),
        &(b / total),
        &cov,
        xi_b.n_used() + xi_c.n_used(),
        &xi_b.tag,
        inputs,
    ))
}

/// `(ξ_D + ξ_D')/(g·N)`; tends to `|⟨X|ψ⟩|²`.
pub fn prior_from_shifts(xi: &ComplexShift, g: f64, n_total: u64) -> Result<EstimateReport> {
    if g == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if n_total == 0 {
        return Err(Error::InsufficientSamples { needed: 1, have: 0 });
    }
    let cov = RawCovariance::from_shifts(&[xi])?;
    let x = (xi.lin(Port::D) + xi.lin(Port::DPrime)).scale(Complex64::new(1.0 / (g * n_total as f64), 0.0));
    Ok(report(
        &format!("prior_from_shifts[{}]", xi.arm),
        &x,
        &cov,
        xi.n_used(),
        &xi.tag,
        xi.inputs(),
    ))
}

/// `γ/β` from one port: `ξ^C_D/ξ^B_D`, or `−ξ^C_D'/ξ^B_D'`.
pub fn tomography(xi_b: &ComplexShift, xi_c: &ComplexShift, port: Port) -> Result<EstimateReport> {
    require_pair(xi_b, xi_c)?;
    let cov = RawCovariance::from_shifts(&[xi_b, xi_c])?;
    let denom = xi_b.lin(port);
    require_resolved("ξ^B (tomography)", &denom, &cov)?;
    let ratio = xi_c.lin(port) / denom;
    let x = match port {
        Port::D => ratio,
        Port::DPrime => -ratio,
    };
    let mut inputs = xi_b.inputs();
    inputs.extend(xi_c.inputs());
    Ok(report(
        &format!("tomography[{port}]"),
        &x,
        &cov,
        xi_b.n_used() + xi_c.n_used(),
        &xi_b.tag,
        inputs,
    ))
}

/// Tomography from whichever port resolves `ξ^B` better.
pub fn tomography_best(xi_b: &ComplexShift, xi_c: &ComplexShift) -> Result<EstimateReport> {
    let d = tomography(xi_b, xi_c, Port::D);
    let dp = tomography(xi_b, xi_c, Port::DPrime);
    match (d, dp) {
        (Ok(a), Ok(b)) => {
            let rel = |r: &EstimateReport| r.std_error / r.point().norm().max(1.0);
            Ok(if rel(&b) < rel(&a) { b } else { a })
        }
        (Ok(a), Err(_)) => Ok(a),
        (Err(_), Ok(b)) => Ok(b),
        (Err(e), Err(_)) => Err(e),
    }
}

/// Normalized state with `β` real and non-negative from a ratio `γ/β`.
pub fn reconstruct_state(ratio: Complex64) -> Result<MziState<f64>> {
    if !ratio.re.is_finite() || !ratio.im.is_finite() {
        return Err(Error::InvalidConfig(format!("tomography ratio is not finite: {ratio}")));
    }
    let beta = 1.0 / (1.0 + ratio.norm_sqr()).sqrt();
    MziState::normalized(Complex64::new(beta, 0.0), ratio * beta)
}

/// Residual of `ξ^B_D/ξ^C_D = −ξ^B_D'/ξ^C_D'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub residual: f64,
    pub std_error: f64,
    pub k: f64,
    pub pass: bool,
}

pub fn consistency_check(xi_b: &ComplexShift, xi_c: &ComplexShift, k: f64) -> Result<ConsistencyCheck> {
    require_pair(xi_b, xi_c)?;
    let cov = RawCovariance::from_shifts(&[xi_b, xi_c])?;
    let (cd, cdp) = (xi_c.lin(Port::D), xi_c.lin(Port::DPrime));
    require_resolved("ξ^C_D (consistency)", &cd, &cov)?;
    require_resolved("ξ^C_D' (consistency)", &cdp, &cov)?;
    let r = xi_b.lin(Port::D) / cd + xi_b.lin(Port::DPrime) / cdp;
    let residual = r.value.norm();
    let std_error = cov.std_error(&r);
    Ok(ConsistencyCheck {
        residual,
        std_error,
        k,
        pass: residual <= k * std_error,
    })
}

/// Momentum-side bound `P_port/(2g·Var(p)·N) ≤ ΔX·Δport` for glass in arm X,
/// with the per-detected-photon form alongside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub std_error: f64,
    pub pass: bool,
    /// `P_port/(2g·Var(p)·N_port)`, which tends to `Im wv`.
    pub lhs_detected: f64,
    /// `ΔX·Δport/P(port)`
    pub rhs_detected: f64,
    pub std_error_detected: f64,
    pub pass_detected: bool,
}

pub fn uncertainty_inequality_check(
    acc_mom: &ShiftAccumulator,
    port: Port,
    g: f64,
    probe: &GaussianProbe,
    state: &MziState<f64>,
) -> Result<InequalityCheck> {
    if g == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if acc_mom.mode != Observable::Momentum {
        return Err(Error::MismatchedRuns("uncertainty check needs a momentum run".into()));
    }
    let arm_proj = Projector::new(MziState::<f64>::arm_ket(acc_mom.glass_arm))?;
    let port_proj = Projector::new(MziState::<f64>::port_ket(port))?;
    let psi = state.ket();
    let rhs = projector_fluctuation(&arm_proj, &psi)? * projector_fluctuation(&port_proj, &psi)?;
    let p_port = port_probability(state, port);

    let scale = 2.0 * g * probe.var_p();
    let n = acc_mom.n_total as f64;
    let lhs = acc_mom.sum(port) / (scale * n);
    let std_error = acc_mom.sum_covariance()[port.index()][port.index()].sqrt() / (scale * n);

    let stats = acc_mom.port(port);
    let (lhs_detected, std_error_detected) = if stats.n >= 2 {
        let se = standard_errors(acc_mom, port)?;
        (stats.p_sum / (scale * stats.n as f64), se.se_p / scale)
    } else {
        (0.0, 0.0)
    };
    let rhs_detected = if p_port > 0.0 { rhs / p_port } else { f64::INFINITY };
    Ok(InequalityCheck {
        lhs,
        rhs,
        std_error,
        pass: lhs <= rhs + DEGENERACY_SIGMAS * std_error,
        lhs_detected,
        rhs_detected,
        std_error_detected,
        pass_detected: lhs_detected <= rhs_detected + DEGENERACY_SIGMAS * std_error_detected,
    })
}

/// `η^B P(B)/(η^B P(B) + η^C P(C))`.
pub fn bayes_closure(eta_b: Complex64, eta_c: Complex64, prior_b: Complex64, prior_c: Complex64) -> Complex64 {
    let b = eta_b * prior_b;
    b / (b + eta_c * prior_c)
}

/// Full estimator set for one four-run protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateSet {
    pub xi: [ComplexShift; 2],
    /// `(formula_id, outcome)` in a fixed order.
    pub estimates: Vec<(String, Result<EstimateReport>)>,
    pub consistency: Result<ConsistencyCheck>,
}

/// Runs every estimator; `k` is the consistency threshold.
pub fn estimate_all(
    position: [&ShiftAccumulator; 2],
    momentum: [&ShiftAccumulator; 2],
    probe: &GaussianProbe,
    k: f64,
) -> Result<EstimateSet> {
    let xi_b = xi_from_runs(position[0], momentum[0], probe)?;
    let xi_c = xi_from_runs(position[1], momentum[1], probe)?;
    require_pair(&xi_b, &xi_c)?;
    let g = xi_b.tag.g;
    let mut estimates = Vec::new();
    let mut push = |id: String, r: Result<EstimateReport>| estimates.push((id, r));
    for arm in Arm::BOTH {
        let acc = position[arm.index()];
        for port in Port::BOTH {
            push(format!("wv_from_shift[{arm}{port}]"), wv_from_shift(acc, port, g));
        }
        push(format!("counterfactual_wv[{arm}]"), counterfactual_wv(acc));
    }
    for port in Port::BOTH {
        for arm in Arm::BOTH {
            push(
                format!("wv_ratio_across_arms[{arm}{port}]"),
                wv_ratio_across_arms(position[0], position[1], port, arm),
            );
        }
    }
    for xi in [&xi_b, &xi_c] {
        push(format!("eta[{}]", xi.arm), eta(xi));
        push(format!("prior_from_shifts[{}]", xi.arm), prior_from_shifts(xi, g, xi.n_total));
    }
    for port in Port::BOTH {
        push(format!("complex_wv[B{port}]"), complex_wv(&xi_b, &xi_c, port));
        push(format!("tomography[{port}]"), tomography(&xi_b, &xi_c, port));
    }
    let consistency = consistency_check(&xi_b, &xi_c, k);
    Ok(EstimateSet {
        xi: [xi_b, xi_c],
        estimates,
        consistency,
    })
}

impl EstimateSet {
    pub fn get(&self, formula_id: &str) -> Option<&EstimateReport> {
        self.estimates
            .iter()
            .find(|(id, _)| id == formula_id)
            .and_then(|(_, r)| r.as_ref().ok())
    }
}
