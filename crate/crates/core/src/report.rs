//! Serializable run summaries and the analytic report.
//!
//! A [`Summary`] stores every accumulator of a protocol run exactly, so
//! estimates computed from a saved summary match the live ones bit for bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{standard_errors, Observable, PortStats, ProtocolRuns, RunTag, ShiftAccumulator};
use crate::mzi::{port_probability, theoretical_weak_value, Arm, MziState, Port};
use crate::qcore::Projector;
use crate::weakvalues::{bayes_decompose, geometric_phase, uncertainty_bound_check};

pub const SUMMARY_SCHEMA: &str = "weakbayes-summary/1";
pub const UNDEFINED_DARK_PORT: &str = "undefined (dark port)";

/// Where an output came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Provenance {
            tool: "weakbayes".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortSummary {
    pub port: Port,
    #[serde(flatten)]
    pub stats: PortStats,
    /// Standard error of the per-port mean; absent below two photons.
    pub se: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub glass_arm: Arm,
    pub mode: Observable,
    pub n_total: u64,
    pub ports: [PortSummary; 2],
}

impl RunSummary {
    pub fn from_accumulator(acc: &ShiftAccumulator) -> Self {
        let port_summary = |port| PortSummary {
            port,
            stats: *acc.port(port),
            se: standard_errors(acc, port).ok().map(|e| match acc.mode {
                Observable::Position => e.se_z,
                Observable::Momentum => e.se_p,
            }),
        };
        RunSummary {
            glass_arm: acc.glass_arm,
            mode: acc.mode,
            n_total: acc.n_total,
            ports: [port_summary(Port::D), port_summary(Port::DPrime)],
        }
    }

    pub fn to_accumulator(&self, tag: RunTag) -> Result<ShiftAccumulator> {
        if self.ports[0].port != Port::D || self.ports[1].port != Port::DPrime {
            return Err(Error::InvalidConfig("summary ports must be listed as D, D'".into()));
        }
        let (d, dp) = (self.ports[0].stats, self.ports[1].stats);
        if d.n + dp.n != self.n_total {
            return Err(Error::InvalidConfig(format!(
                "port counts {} + {} do not add up to n_total {}",
                d.n, dp.n, self.n_total
            )));
        }
        Ok(ShiftAccumulator {
            glass_arm: self.glass_arm,
            mode: self.mode,
            n_total: self.n_total,
            d,
            dp,
            tag,
        })
    }
}

/// Saved output of a four-run protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub provenance: Provenance,
    pub setup: RunTag,
    pub shards: usize,
    pub runs: Vec<RunSummary>,
}

impl Summary {
    pub fn new(runs: &ProtocolRuns, shards: usize, provenance: Provenance) -> Self {
        Summary {
            schema: SUMMARY_SCHEMA.into(),
            provenance,
            setup: runs.tag(),
            shards,
            runs: runs.accumulators().map(RunSummary::from_accumulator).collect(),
        }
    }

    pub fn to_runs(&self) -> Result<ProtocolRuns> {
        if self.schema != SUMMARY_SCHEMA {
            return Err(Error::InvalidConfig(format!(
                "unsupported summary schema {:?} (expected {SUMMARY_SCHEMA})",
                self.schema
            )));
        }
        let find = |arm: Arm, mode: Observable| -> Result<ShiftAccumulator> {
            let mut hits = self.runs.iter().filter(|r| r.glass_arm == arm && r.mode == mode);
            let run = hits
                .next()
                .ok_or_else(|| Error::InvalidConfig(format!("summary lacks the {arm}/{mode} run")))?;
            if hits.next().is_some() {
                return Err(Error::InvalidConfig(format!("summary repeats the {arm}/{mode} run")));
            }
            run.to_accumulator(self.setup)
        };
        Ok(ProtocolRuns {
            position: [find(Arm::B, Observable::Position)?, find(Arm::C, Observable::Position)?],
            momentum: [find(Arm::B, Observable::Momentum)?, find(Arm::C, Observable::Momentum)?],
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("malformed summary: {e}")))
    }
}

/// A complex number, or the reason it is undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaybeComplex {
    pub re: Option<f64>,
    pub im: Option<f64>,
    pub status: String,
}

impl MaybeComplex {
    pub fn defined(z: Complex64) -> Self {
        MaybeComplex {
            re: Some(z.re),
            im: Some(z.im),
            status: "ok".into(),
        }
    }

    pub fn undefined(reason: &str) -> Self {
        MaybeComplex {
            re: None,
            im: None,
            status: reason.into(),
        }
    }

    pub fn value(&self) -> Option<Complex64> {
        Some(Complex64::new(self.re?, self.im?))
    }
}

impl std::fmt::Display for MaybeComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.value() {
            Some(z) if z.im == 0.0 => write!(f, "{:.10}", z.re),
            Some(z) => write!(f, "{:.10} {} {:.10}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs()),
            None => f.write_str(&self.status),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub arm: Arm,
    pub port: Port,
    /// `⟨port|X̂|ψ⟩/⟨port|ψ⟩`
    pub weak_value: MaybeComplex,
    /// `⟨X|port̂|ψ⟩/⟨X|ψ⟩`
    pub reverse_weak_value: MaybeComplex,
    /// `|wv·P(port) − conj(reverse)·P(X)|`
    pub bayes_residual: Option<f64>,
    /// `arg(⟨ψ|port⟩⟨port|X⟩⟨X|ψ⟩)`
    pub geometric_phase: Option<f64>,
    /// `|Im wv|`
    pub uncertainty_lhs: Option<f64>,
    /// `ΔX·Δport/P(port)`
    pub uncertainty_rhs: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub beta: [f64; 2],
    pub gamma: [f64; 2],
    pub p_b: f64,
    pub p_c: f64,
    pub p_d: f64,
    pub p_d_prime: f64,
    pub pairs: Vec<PairEntry>,
}

impl AnalyticReport {
    pub fn pair(&self, arm: Arm, port: Port) -> &PairEntry {
        self.pairs
            .iter()
            .find(|p| p.arm == arm && p.port == port)
            .expect("all four pairs present")
    }
}

pub fn analytic_report(state: &MziState<f64>) -> AnalyticReport {
    let psi = state.ket();
    let mut pairs = Vec::new();
    for arm in Arm::BOTH {
        for port in Port::BOTH {
            let arm_ket = MziState::<f64>::arm_ket(arm);
            let port_ket = MziState::<f64>::port_ket(port);
            let weak_value = match theoretical_weak_value(state, arm, port) {
                Ok(z) => MaybeComplex::defined(z),
                Err(_) => MaybeComplex::undefined(UNDEFINED_DARK_PORT),
            };
            let bayes = bayes_decompose(&arm_ket, &psi, &port_ket).ok();
            let reverse_weak_value = match &bayes {
                Some(b) => MaybeComplex::defined(b.reverse_wv),
                None if state.arm_probability(arm) <= f64::EPSILON => MaybeComplex::undefined("undefined (empty arm)"),
                None => match bayes_decompose(&port_ket, &psi, &arm_ket) {
                    Ok(b) => MaybeComplex::defined(b.forward_wv),
                    Err(_) => MaybeComplex::undefined("undefined"),
                },
            };
            let bound = match (Projector::new(arm_ket.clone()), Projector::new(port_ket.clone())) {
                (Ok(a), Ok(z)) => uncertainty_bound_check(&a, &z, &psi).ok(),
                _ => None,
            };
            pairs.push(PairEntry {
                arm,
                port,
                weak_value,
                reverse_weak_value,
                bayes_residual: bayes.map(|b| b.identity_residual()),
                geometric_phase: geometric_phase(&psi, &arm_ket, &port_ket).ok(),
                uncertainty_lhs: bound.map(|b| b.lhs),
                uncertainty_rhs: bound.map(|b| b.rhs),
            });
        }
    }
    AnalyticReport {
        beta: [state.beta.re, state.beta.im],
        gamma: [state.gamma.re, state.gamma.im],
        p_b: state.arm_probability(Arm::B),
        p_c: state.arm_probability(Arm::C),
        p_d: port_probability(state, Port::D),
        p_d_prime: port_probability(state, Port::DPrime),
        pairs,
    }
}

/// First-order limit of each estimator, keyed like
/// [`crate::estimators::EstimateSet`]. Undefined targets map to `None`.
pub fn estimate_truths(state: &MziState<f64>) -> Vec<(String, Option<Complex64>)> {
    let re = |z: Complex64| Complex64::new(z.re, 0.0);
    let wv = |arm, port| theoretical_weak_value(state, arm, port).ok();
    // ⟨ψ|D̂|X⟩/⟨ψ|X⟩ = conj(wv(X, D))·P(D)/P(X) written without dividing by P(D).
    let eta = |arm: Arm| {
        let amp = state.amplitude(arm);
        if amp.norm_sqr() <= f64::EPSILON {
            return None;
        }
        let d = crate::mzi::port_amplitude(state, Port::D);
        Some(d.conj() * Port::D.splitter_coefficient::<f64>(arm) / amp.conj())
    };
    let mut out = Vec::new();
    for arm in Arm::BOTH {
        for port in Port::BOTH {
            out.push((format!("wv_from_shift[{arm}{port}]"), wv(arm, port).map(re)));
        }
        out.push((format!("counterfactual_wv[{arm}]"), eta(arm).map(re)));
    }
    for port in Port::BOTH {
        for arm in Arm::BOTH {
            out.push((format!("wv_ratio_across_arms[{arm}{port}]"), wv(arm, port).map(re)));
        }
    }
    for arm in Arm::BOTH {
        out.push((format!("eta[{arm}]"), eta(arm)));
        out.push((
            format!("prior_from_shifts[{arm}]"),
            Some(Complex64::new(state.arm_probability(arm), 0.0)),
        ));
    }
    let ratio = if state.beta.norm_sqr() > f64::EPSILON {
        Some(state.gamma / state.beta)
    } else {
        None
    };
    for port in Port::BOTH {
        out.push((format!("complex_wv[B{port}]"), wv(Arm::B, port)));
        out.push((format!("tomography[{port}]"), ratio));
    }
    out
}
