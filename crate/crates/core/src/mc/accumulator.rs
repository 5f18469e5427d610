use serde::{Deserialize, Serialize};

use super::{Observable, PhotonRecord, RunTag};
use crate::error::{Error, Result};
use crate::mzi::{Arm, Port};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Per-port counts and sums of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PortStats {
    pub n: u64,
    pub z_sum: f64,
    pub p_sum: f64,
    pub z_sumsq: f64,
    pub p_sumsq: f64,
}

impl PortStats {
    pub fn sum(&self, observable: Observable) -> f64 {
        match observable {
            Observable::Position => self.z_sum,
            Observable::Momentum => self.p_sum,
        }
    }

    pub fn sumsq(&self, observable: Observable) -> f64 {
        match observable {
            Observable::Position => self.z_sumsq,
            Observable::Momentum => self.p_sumsq,
        }
    }
}

/// Sample standard errors of the per-port means.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortErrors {
    pub se_z: f64,
    pub se_p: f64,
}

/// Counts and probe sums for one experiment (one glass arm, one observable).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftAccumulator {
    pub glass_arm: Arm,
    pub mode: Observable,
    pub n_total: u64,
    pub d: PortStats,
    #[serde(rename = "d_prime")]
    pub dp: PortStats,
    pub tag: RunTag,
}

impl ShiftAccumulator {
    pub fn port(&self, port: Port) -> &PortStats {
        match port {
            Port::D => &self.d,
            Port::DPrime => &self.dp,
        }
    }

    pub fn port_mut(&mut self, port: Port) -> &mut PortStats {
        match port {
            Port::D => &mut self.d,
            Port::DPrime => &mut self.dp,
        }
    }

    /// `Z` sum for position runs, `P` sum for momentum runs.
    pub fn sum(&self, port: Port) -> f64 {
        self.port(port).sum(self.mode)
    }

    /// Variance of the per-photon variable `x·1[port]`, estimated from the
    /// sums. Its covariance with the other port is `−mean_D·mean_D'`.
    pub fn per_photon_covariance(&self) -> [[f64; 2]; 2] {
        let n = self.n_total.max(1) as f64;
        let m = [self.d.sum(self.mode) / n, self.dp.sum(self.mode) / n];
        let q = [self.d.sumsq(self.mode) / n, self.dp.sumsq(self.mode) / n];
        [
            [q[0] - m[0] * m[0], -m[0] * m[1]],
            [-m[0] * m[1], q[1] - m[1] * m[1]],
        ]
    }

    /// Covariance matrix of the two port sums `(S_D, S_D')`.
    pub fn sum_covariance(&self) -> [[f64; 2]; 2] {
        let n = self.n_total as f64;
        let c = self.per_photon_covariance();
        [[n * c[0][0], n * c[0][1]], [n * c[1][0], n * c[1][1]]]
    }

    /// Adds one block's photon counts.
    pub(super) fn merge_counts(&mut self, block: &BlockSums) {
        self.n_total += block.n_total;
        for port in Port::BOTH {
            self.port_mut(port).n += block.ports[port.index()].n;
        }
    }

    pub fn matches(&self, other: &ShiftAccumulator) -> bool {
        self.tag == other.tag && self.glass_arm == other.glass_arm
    }
}

pub fn standard_errors(acc: &ShiftAccumulator, port: Port) -> Result<PortErrors> {
    let s = acc.port(port);
    if s.n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, have: s.n });
    }
    let n = s.n as f64;
    let se = |sum: f64, sumsq: f64| {
        let mean = sum / n;
        let var = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    };
    Ok(PortErrors {
        se_z: se(s.z_sum, s.z_sumsq),
        se_p: se(s.p_sum, s.p_sumsq),
    })
}

/// Partial sums for one fixed-size block of photon indices.
#[derive(Clone, Copy, Debug, Default)]
pub(super) struct BlockPort {
    pub n: u64,
    pub sum: CompensatedSum,
    pub sumsq: CompensatedSum,
}

#[derive(Clone, Copy, Debug, Default)]
pub(super) struct BlockSums {
    pub n_total: u64,
    pub ports: [BlockPort; 2],
}

impl BlockSums {
    pub fn push(&mut self, rec: &PhotonRecord) {
        self.n_total += 1;
        let p = &mut self.ports[rec.port.index()];
        p.n += 1;
        p.sum.add(rec.value);
        p.sumsq.add(rec.value * rec.value);
    }
}

/// Merges block sums in block order. The block partition depends only on
/// photon indices, so the result is independent of how blocks were spread
/// across shards.
pub(super) fn merge_blocks(glass_arm: Arm, mode: Observable, tag: RunTag, blocks: &[BlockSums]) -> ShiftAccumulator {
    let mut acc = ShiftAccumulator {
        glass_arm,
        mode,
        n_total: 0,
        d: PortStats::default(),
        dp: PortStats::default(),
        tag,
    };
    let mut sums = [[CompensatedSum::default(); 2]; 2];
    for block in blocks {
        acc.merge_counts(block);
        for (i, bp) in block.ports.iter().enumerate() {
            sums[i][0].add(bp.sum.value());
            sums[i][1].add(bp.sumsq.value());
        }
    }
    for port in Port::BOTH {
        let [s, s2] = sums[port.index()];
        let stats = acc.port_mut(port);
        match mode {
            Observable::Position => {
                stats.z_sum = s.value();
                stats.z_sumsq = s2.value();
            }
            Observable::Momentum => {
                stats.p_sum = s.value();
                stats.p_sumsq = s2.value();
            }
        }
    }
    acc
}
