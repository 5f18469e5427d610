//! Photon-by-photon simulation of the weak-measurement protocol.
//!
//! Every photon lands in D or D' (nothing is discarded) and carries exactly
//! one probe reading: position or momentum, fixed per run. Post-selection
//! is bookkeeping done later by the estimators.
//!
//! Randomness is counter-based: photon `i` of a run draws from its own
//! generator seeded by `(seed, glass arm, observable, i)`, so results do not
//! depend on how photons are split across shards. Sums are formed per block
//! of [`BLOCK_SIZE`] consecutive indices and merged in block order, which
//! makes accumulators bit-identical for any shard count.

pub mod accumulator;
pub mod sampling;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mzi::{Arm, GlassPlacement, MziState, Port};
use crate::probe::{exact_port_probability, port_wave, GaussianProbe};

pub use accumulator::{standard_errors, CompensatedSum, PortErrors, PortStats, ShiftAccumulator};
use accumulator::{merge_blocks, BlockSums};
pub use sampling::{Method, ValueSampler};

pub const BLOCK_SIZE: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    Position,
    Momentum,
}

impl Observable {
    pub const BOTH: [Observable; 2] = [Observable::Position, Observable::Momentum];

    pub fn as_str(self) -> &'static str {
        match self {
            Observable::Position => "position",
            Observable::Momentum => "momentum",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" | "z" => Ok(Observable::Position),
            "momentum" | "p" => Ok(Observable::Momentum),
            _ => Err(Error::InvalidLabel {
                label: s.to_string(),
                role: "observable",
            }),
        }
    }
}

/// Identifies the physical setup a run belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTag {
    pub state: MziState<f64>,
    pub g: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for RunTag {
    fn default() -> Self {
        RunTag {
            state: MziState::real(1.0, 0.0).expect("unit state"),
            g: 0.0,
            sigma: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub state: MziState<f64>,
    pub glass: GlassPlacement,
    pub probe: GaussianProbe,
    pub n_photons: u64,
    pub mode: Observable,
    pub seed: u64,
    pub shards: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_photons == 0 {
            return Err(Error::InvalidConfig("n_photons must be at least 1".into()));
        }
        if self.shards == 0 {
            return Err(Error::InvalidConfig("shards must be at least 1".into()));
        }
        if (self.state.norm_sqr() - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized {
                norm_sqr: self.state.norm_sqr(),
            });
        }
        GlassPlacement::new(self.glass.arm, self.glass.g)?;
        GaussianProbe::new(self.probe.sigma())?;
        Ok(())
    }

    pub fn tag(&self) -> RunTag {
        RunTag {
            state: self.state,
            g: self.glass.g,
            sigma: self.probe.sigma(),
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonRecord {
    pub index: u64,
    pub port: Port,
    pub observable: Observable,
    pub value: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn run_key(seed: u64, arm: Arm, mode: Observable) -> u64 {
    let tag = 1 + 2 * arm.index() as u64 + mode as u64;
    splitmix64(seed ^ splitmix64(tag.wrapping_mul(0xA076_1D64_78BD_642F)))
}

/// Draws photons for one run configuration.
#[derive(Clone, Debug)]
pub struct PhotonSampler {
    p_d: f64,
    samplers: [Option<ValueSampler>; 2],
    mode: Observable,
    key: u64,
}

impl PhotonSampler {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let mut samplers = [None, None];
        let mut probs = [0.0; 2];
        for port in Port::BOTH {
            let wave = port_wave(&config.state, &config.glass, &config.probe, port);
            probs[port.index()] = exact_port_probability(&wave);
            samplers[port.index()] = match config.mode {
                Observable::Position => ValueSampler::position(&wave).ok(),
                Observable::Momentum => ValueSampler::momentum(&wave).ok(),
            };
        }
        if samplers.iter().all(Option::is_none) {
            return Err(Error::BothPortsDark);
        }
        Ok(PhotonSampler {
            p_d: probs[0] / (probs[0] + probs[1]),
            samplers,
            mode: config.mode,
            key: run_key(config.seed, config.glass.arm, config.mode),
        })
    }

    pub fn port_probability(&self, port: Port) -> f64 {
        match port {
            Port::D => self.p_d,
            Port::DPrime => 1.0 - self.p_d,
        }
    }

    pub fn method(&self, port: Port) -> Option<Method> {
        self.samplers[port.index()].as_ref().map(ValueSampler::method)
    }

    /// The generator owned by photon `index`.
    pub fn photon_rng(&self, index: u64) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(self.key ^ splitmix64(index))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, index: u64, rng: &mut R) -> PhotonRecord {
        let mut port = if rng.random::<f64>() < self.p_d { Port::D } else { Port::DPrime };
        if self.samplers[port.index()].is_none() {
            port = match port {
                Port::D => Port::DPrime,
                Port::DPrime => Port::D,
            };
        }
        let sampler = self.samplers[port.index()].as_ref().expect("one port is bright");
        PhotonRecord {
            index,
            port,
            observable: self.mode,
            value: sampler.sample(rng),
        }
    }

    pub fn sample(&self, index: u64) -> PhotonRecord {
        let mut rng = self.photon_rng(index);
        self.sample_with(index, &mut rng)
    }
}

/// Draws photon `index` of the run described by `config`.
pub fn sample_photon(config: &RunConfig, index: u64) -> Result<PhotonRecord> {
    Ok(PhotonSampler::new(config)?.sample(index))
}

fn block_ranges(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(BLOCK_SIZE))
        .map(|b| (b * BLOCK_SIZE, ((b + 1) * BLOCK_SIZE).min(n)))
        .collect()
}

/// Splits `blocks` into `shards` contiguous groups; the last takes the rest.
fn shard_groups(n_blocks: usize, shards: usize) -> Vec<std::ops::Range<usize>> {
    let shards = shards.min(n_blocks).max(1);
    let per = n_blocks / shards;
    (0..shards)
        .map(|s| {
            let start = s * per;
            let end = if s + 1 == shards { n_blocks } else { start + per };
            start..end
        })
        .collect()
}

fn simulate(config: &RunConfig, keep_records: bool) -> Result<(ShiftAccumulator, Vec<PhotonRecord>)> {
    let sampler = PhotonSampler::new(config)?;
    let blocks = block_ranges(config.n_photons);
    let groups = shard_groups(blocks.len(), config.shards);

    let per_group: Vec<(Vec<BlockSums>, Vec<PhotonRecord>)> = groups
        .into_par_iter()
        .map(|group| {
            let mut sums = Vec::with_capacity(group.len());
            let mut records = Vec::new();
            for &(start, end) in &blocks[group] {
                let mut block = BlockSums::default();
                for index in start..end {
                    let rec = sampler.sample(index);
                    block.push(&rec);
                    if keep_records {
                        records.push(rec);
                    }
                }
                sums.push(block);
            }
            (sums, records)
        })
        .collect();

    let mut all_blocks = Vec::with_capacity(blocks.len());
    let mut all_records = Vec::new();
    for (sums, records) in per_group {
        all_blocks.extend(sums);
        all_records.extend(records);
    }
    let acc = merge_blocks(config.glass.arm, config.mode, config.tag(), &all_blocks);
    Ok((acc, all_records))
}

pub fn run_experiment(config: &RunConfig) -> Result<ShiftAccumulator> {
    simulate(config, false).map(|(acc, _)| acc)
}

/// Runs and also returns every photon record, ordered by index.
pub fn run_experiment_with_records(config: &RunConfig) -> Result<(ShiftAccumulator, Vec<PhotonRecord>)> {
    simulate(config, true)
}

/// Runs and streams the records as CSV into `sink`.
pub fn run_experiment_to_csv<W: Write>(config: &RunConfig, sink: W) -> Result<ShiftAccumulator> {
    let (acc, records) = simulate(config, true)?;
    write_records_csv(&records, sink)?;
    Ok(acc)
}

/// Rebuilds an accumulator from a record stream with the same block layout
/// the simulator uses; equal bit-for-bit to the simulated one.
pub fn fold_records(glass_arm: Arm, mode: Observable, tag: RunTag, records: &[PhotonRecord]) -> Result<ShiftAccumulator> {
    let mut blocks: Vec<BlockSums> = Vec::new();
    for (expected, rec) in records.iter().enumerate() {
        if rec.index != expected as u64 {
            return Err(Error::InvalidConfig(format!(
                "record stream out of order: index {} at position {expected}",
                rec.index
            )));
        }
        if rec.observable != mode {
            return Err(Error::MismatchedRuns(format!("record {} is {}, run is {mode}", rec.index, rec.observable)));
        }
        let b = (rec.index / BLOCK_SIZE) as usize;
        if blocks.len() <= b {
            blocks.resize(b + 1, BlockSums::default());
        }
        blocks[b].push(rec);
    }
    Ok(merge_blocks(glass_arm, mode, tag, &blocks))
}

pub const RECORD_CSV_HEADER: &str = "index,port,observable,value";

pub fn write_records_csv<W: Write>(records: &[PhotonRecord], sink: W) -> Result<()> {
    let mut out = std::io::BufWriter::new(sink);
    writeln!(out, "{RECORD_CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{},{},{},{}", r.index, r.port, r.observable, r.value)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records_csv<R: BufRead>(source: R) -> Result<Vec<PhotonRecord>> {
    let mut lines = source.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim) != Some(RECORD_CSV_HEADER) {
        return Err(Error::Io(format!("missing CSV header `{RECORD_CSV_HEADER}`")));
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Io(format!("malformed record on line {}: {line:?}", lineno + 2));
        let mut fields = line.split(',');
        let (Some(i), Some(p), Some(o), Some(v), None) =
            (fields.next(), fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad());
        };
        out.push(PhotonRecord {
            index: i.parse().map_err(|_| bad())?,
            port: p.parse().map_err(|_| bad())?,
            observable: o.parse().map_err(|_| bad())?,
            value: v.parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// Two experiments with the glass in B, then in C, on independent streams.
pub fn paired_runs(
    state: &MziState<f64>,
    probe: &GaussianProbe,
    g: f64,
    n: u64,
    seed: u64,
    mode: Observable,
    shards: usize,
) -> Result<(ShiftAccumulator, ShiftAccumulator)> {
    let run = |arm| {
        run_experiment(&RunConfig {
            state: *state,
            glass: GlassPlacement::new(arm, g)?,
            probe: *probe,
            n_photons: n,
            mode,
            seed,
            shards,
        })
    };
    Ok((run(Arm::B)?, run(Arm::C)?))
}

/// The four experiments of the full protocol: glass in B or C, each read
/// out in position and in momentum, with `n` photons each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRuns {
    pub position: [ShiftAccumulator; 2],
    pub momentum: [ShiftAccumulator; 2],
}

impl ProtocolRuns {
    pub fn run(state: &MziState<f64>, probe: &GaussianProbe, g: f64, n: u64, seed: u64, shards: usize) -> Result<Self> {
        let (pb, pc) = paired_runs(state, probe, g, n, seed, Observable::Position, shards)?;
        let (mb, mc) = paired_runs(state, probe, g, n, seed, Observable::Momentum, shards)?;
        Ok(ProtocolRuns {
            position: [pb, pc],
            momentum: [mb, mc],
        })
    }

    pub fn position(&self, arm: Arm) -> &ShiftAccumulator {
        &self.position[arm.index()]
    }

    pub fn momentum(&self, arm: Arm) -> &ShiftAccumulator {
        &self.momentum[arm.index()]
    }

    pub fn tag(&self) -> RunTag {
        self.position[0].tag
    }

    pub fn accumulators(&self) -> impl Iterator<Item = &ShiftAccumulator> {
        self.position.iter().chain(self.momentum.iter())
    }
}
