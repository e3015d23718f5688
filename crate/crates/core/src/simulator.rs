//! Monte Carlo estimates built from the sampling mechanics alone.
//!
//! A colony's life up to its first catastrophe only matters through the
//! number of individuals present when the catastrophe strikes, so the
//! default mode walks the embedded jump chain (birth with probability
//! `lambda/(lambda+1)`, catastrophe otherwise) instead of drawing holding
//! times. Colonies on the tree never share a vertex, so dispersal models are
//! simulated as a colony-count branching process. Without dispersion the
//! single colony is followed individual by individual.
//!
//! Every replication draws from its own ChaCha8 stream, keyed by the master
//! seed and selected by the replication index, so estimates are identical
//! under any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DispersionScheme, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    EmbeddedChain,
    /// Exponential holding times; only the no-dispersion model supports it.
    ContinuousTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub replications: u64,
    /// Live colonies (or individuals, without dispersion) at which a
    /// replication is declared surviving.
    pub colony_cap: u64,
    pub generation_cap: u64,
    pub seed: u64,
    pub mode: SimMode,
}

impl SimConfig {
    pub fn new(replications: u64, colony_cap: u64, generation_cap: u64, seed: u64) -> Result<Self> {
        if replications == 0 {
            return Err(Error::InvalidParams("replications must be at least 1".into()));
        }
        if colony_cap == 0 || generation_cap == 0 {
            return Err(Error::InvalidParams("caps must be at least 1".into()));
        }
        Ok(Self { replications, colony_cap, generation_cap, seed, mode: SimMode::EmbeddedChain })
    }

    pub fn with_mode(mut self, mode: SimMode) -> Self {
        self.mode = mode;
        self
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { replications: 100_000, colony_cap: 1_000, generation_cap: 10_000, seed: 0, mode: SimMode::EmbeddedChain }
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// No colony (or individual) left after `generation` catastrophe rounds.
    Extinct { generation: u64 },
    /// Stopped at a cap; counted as survival.
    CapSurvive { generation: u64, population: u64, hit_generation_cap: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub psi_hat: f64,
    pub stderr: f64,
    pub replications: u64,
    pub replications_extinct: u64,
    pub replications_cap: u64,
    /// Replications stopped by the generation cap rather than the
    /// population cap.
    pub generation_cap_hits: u64,
    /// Set when any replication was stopped by a cap.
    pub cap_bias_note: bool,
}

/// Per-replication random stream.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws from one colony's life cycle with the logarithms precomputed.
#[derive(Debug, Clone)]
pub struct ColonySampler {
    scheme: DispersionScheme,
    ln_birth: f64,
    ln_kill: f64,
    /// Generation stamps per child vertex, for independent dispersal.
    stamps: Vec<u64>,
    stamp: u64,
    /// Bar positions, for uniform dispersal.
    bars: Vec<u64>,
}

/// Failures before the first success of a trial that fails with
/// probability `exp(ln_fail)`, by inversion.
#[inline]
fn geometric_failures<R: Rng + ?Sized>(ln_fail: f64, rng: &mut R) -> u64 {
    let u = 1.0 - rng.random::<f64>();
    let g = (u.ln() / ln_fail).floor();
    if g >= u64::MAX as f64 { u64::MAX } else { g as u64 }
}

impl ColonySampler {
    pub fn new(scheme: DispersionScheme, params: &ModelParams) -> Self {
        let l = params.lambda();
        let d = scheme.degree().map_or(0, |d| d.as_usize());
        ColonySampler {
            scheme,
            ln_birth: (l / (l + 1.0)).ln(),
            ln_kill: params.q().ln(),
            stamps: vec![0; d],
            stamp: 0,
            bars: Vec::with_capacity(d),
        }
    }

    /// Colony size when the first catastrophe strikes a colony founded by
    /// one individual: `P(K = k) = c^(k-1) (1 - c)`.
    #[inline]
    pub fn colony_size<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        1u64.saturating_add(geometric_failures(self.ln_birth, rng))
    }

    /// Individuals left after a geometric catastrophe on a colony of `size`:
    /// removals continue with probability `q` until one survives.
    #[inline]
    pub fn strike<R: Rng + ?Sized>(&self, size: u64, rng: &mut R) -> u64 {
        let killed = geometric_failures(self.ln_kill, rng);
        size.saturating_sub(killed)
    }

    #[inline]
    pub fn survivors<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let k = self.colony_size(rng);
        self.strike(k, rng)
    }

    /// Number of children occupied by `r` dispersing survivors.
    pub fn occupied<R: Rng + ?Sized>(&mut self, r: u64, rng: &mut R) -> u64 {
        if r == 0 {
            return 0;
        }
        match self.scheme {
            DispersionScheme::NoDispersion => 1,
            DispersionScheme::Optimal(d) => r.min(u64::from(d.get())),
            DispersionScheme::Independent(d) => {
                let d = d.as_usize();
                self.stamp += 1;
                let mut hit = 0;
                for _ in 0..r {
                    let slot = rng.random_range(0..d);
                    if self.stamps[slot] != self.stamp {
                        self.stamps[slot] = self.stamp;
                        hit += 1;
                        if hit == d {
                            break;
                        }
                    }
                }
                hit as u64
            }
            DispersionScheme::Uniform(d) => {
                // Stars and bars: a uniform (d-1)-subset of the r+d-1 positions
                // (Floyd's algorithm) cuts the survivors into d parts.
                let d = u64::from(d.get());
                let n = r + d - 1;
                self.bars.clear();
                for j in (n - (d - 1))..n {
                    let t = rng.random_range(0..=j);
                    let pick = if self.bars.contains(&t) { j } else { t };
                    self.bars.push(pick);
                }
                self.bars.sort_unstable();
                let mut empty = 0;
                let mut prev: i64 = -1;
                for &b in &self.bars {
                    if b as i64 == prev + 1 {
                        empty += 1;
                    }
                    prev = b as i64;
                }
                if prev == n as i64 - 1 {
                    empty += 1;
                }
                d - empty
            }
        }
    }

    /// New colonies replacing one struck colony.
    #[inline]
    pub fn offspring<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        let r = self.survivors(rng);
        self.occupied(r, rng)
    }
}

pub fn sample_colony_size_at_catastrophe<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> u64 {
    ColonySampler::new(DispersionScheme::NoDispersion, params).colony_size(rng)
}

pub fn sample_survivors<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> u64 {
    ColonySampler::new(DispersionScheme::NoDispersion, params).survivors(rng)
}

/// Colonies founded after one catastrophe under `scheme`. Any `d >= 2`.
pub fn sample_offspring_colonies<R: Rng + ?Sized>(scheme: DispersionScheme, params: &ModelParams, rng: &mut R) -> u64 {
    ColonySampler::new(scheme, params).offspring(rng)
}

fn run_single_colony<R: Rng + ?Sized>(sampler: &ColonySampler, config: &SimConfig, rng: &mut R) -> Outcome {
    let mut size = 1u64;
    let mut generation = 0u64;
    loop {
        size = size.saturating_add(geometric_failures(sampler.ln_birth, rng));
        size = sampler.strike(size, rng);
        generation += 1;
        if size == 0 {
            return Outcome::Extinct { generation };
        }
        if size >= config.colony_cap || generation >= config.generation_cap {
            return Outcome::CapSurvive { generation, population: size, hit_generation_cap: size < config.colony_cap };
        }
    }
}

fn run_single_colony_continuous<R: Rng + ?Sized>(params: &ModelParams, config: &SimConfig, rng: &mut R) -> Outcome {
    let birth = params.lambda() / (params.lambda() + 1.0);
    let p = params.p();
    let mut size = 1u64;
    let mut generation = 0u64;
    loop {
        // Holding times are drawn for fidelity; only the jump order matters here.
        let _dt = -(1.0 - rng.random::<f64>()).ln() / (params.lambda() + 1.0);
        if rng.random::<f64>() < birth {
            size += 1;
            if size >= config.colony_cap {
                return Outcome::CapSurvive { generation, population: size, hit_generation_cap: false };
            }
            continue;
        }
        generation += 1;
        while size > 0 && rng.random::<f64>() >= p {
            size -= 1;
        }
        if size == 0 {
            return Outcome::Extinct { generation };
        }
        if generation >= config.generation_cap {
            return Outcome::CapSurvive { generation, population: size, hit_generation_cap: true };
        }
    }
}

fn run_colonies<R: Rng + ?Sized>(sampler: &mut ColonySampler, config: &SimConfig, rng: &mut R) -> Outcome {
    let mut colonies = 1u64;
    let mut generation = 0u64;
    loop {
        let mut next = 0u64;
        for _ in 0..colonies {
            next += sampler.offspring(rng);
            if next >= config.colony_cap {
                return Outcome::CapSurvive { generation: generation + 1, population: next, hit_generation_cap: false };
            }
        }
        generation += 1;
        if next == 0 {
            return Outcome::Extinct { generation };
        }
        if generation >= config.generation_cap {
            return Outcome::CapSurvive { generation, population: next, hit_generation_cap: true };
        }
        colonies = next;
    }
}

/// One replication, started from a single colony of one individual.
/// Deterministic in `(config.seed, replication_index)`.
pub fn simulate_extinction(
    scheme: DispersionScheme,
    params: &ModelParams,
    config: &SimConfig,
    replication_index: u64,
) -> Result<Outcome> {
    let mut rng = replication_rng(config.seed, replication_index);
    match (config.mode, scheme) {
        (SimMode::EmbeddedChain, DispersionScheme::NoDispersion) => {
            Ok(run_single_colony(&ColonySampler::new(scheme, params), config, &mut rng))
        }
        (SimMode::EmbeddedChain, _) => Ok(run_colonies(&mut ColonySampler::new(scheme, params), config, &mut rng)),
        (SimMode::ContinuousTime, DispersionScheme::NoDispersion) => {
            Ok(run_single_colony_continuous(params, config, &mut rng))
        }
        (SimMode::ContinuousTime, _) => Err(Error::InvalidParams(
            "continuous-time mode is only available without dispersion".into(),
        )),
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    extinct: u64,
    capped: u64,
    generation_capped: u64,
}

impl Tally {
    fn add(mut self, outcome: Outcome) -> Self {
        match outcome {
            Outcome::Extinct { .. } => self.extinct += 1,
            Outcome::CapSurvive { hit_generation_cap, .. } => {
                self.capped += 1;
                self.generation_capped += u64::from(hit_generation_cap);
            }
        }
        self
    }

    fn merge(self, other: Tally) -> Self {
        Tally {
            extinct: self.extinct + other.extinct,
            capped: self.capped + other.capped,
            generation_capped: self.generation_capped + other.generation_capped,
        }
    }
}

/// Fraction of `config.replications` replications that went extinct,
/// with its binomial standard error.
pub fn estimate_psi(scheme: DispersionScheme, params: &ModelParams, config: &SimConfig) -> Result<SimEstimate> {
    if config.replications == 0 {
        return Err(Error::InvalidParams("replications must be at least 1".into()));
    }
    if config.mode == SimMode::ContinuousTime && scheme != DispersionScheme::NoDispersion {
        return Err(Error::InvalidParams("continuous-time mode is only available without dispersion".into()));
    }
    let tally = (0..config.replications)
        .into_par_iter()
        .fold_with(
            (Tally::default(), None::<ColonySampler>),
            |(tally, sampler), index| {
                let mut sampler = sampler.unwrap_or_else(|| ColonySampler::new(scheme, params));
                let mut rng = replication_rng(config.seed, index);
                let outcome = match (config.mode, scheme) {
                    (SimMode::ContinuousTime, _) => run_single_colony_continuous(params, config, &mut rng),
                    (_, DispersionScheme::NoDispersion) => run_single_colony(&sampler, config, &mut rng),
                    _ => run_colonies(&mut sampler, config, &mut rng),
                };
                (tally.add(outcome), Some(sampler))
            },
        )
        .map(|(tally, _)| tally)
        .reduce(Tally::default, Tally::merge);

    let r = config.replications as f64;
    let psi_hat = tally.extinct as f64 / r;
    Ok(SimEstimate {
        psi_hat,
        stderr: (psi_hat * (1.0 - psi_hat) / r).sqrt(),
        replications: config.replications,
        replications_extinct: tally.extinct,
        replications_cap: tally.capped,
        generation_cap_hits: tally.generation_capped,
        cap_bias_note: tally.capped > 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TimelineEvent {
    Birth { time: f64, size: u64 },
    Catastrophe { time: f64, before: u64, after: u64 },
}

impl TimelineEvent {
    pub fn time(&self) -> f64 {
        match *self {
            TimelineEvent::Birth { time, .. } | TimelineEvent::Catastrophe { time, .. } => time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub events: Vec<TimelineEvent>,
    /// First time the colony is empty, if before the horizon.
    pub extinction_time: Option<f64>,
    pub horizon: f64,
}

/// Continuous-time path of a single colony without dispersion, from one
/// individual until it first empties or `horizon` is reached.
pub fn simulate_timeline<R: Rng + ?Sized>(params: &ModelParams, horizon: f64, rng: &mut R) -> Result<Timeline> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    let (l, p) = (params.lambda(), params.p());
    let total_rate = l + 1.0;
    let mut t = 0.0;
    let mut size = 1u64;
    let mut events = Vec::new();
    loop {
        t += -(1.0 - rng.random::<f64>()).ln() / total_rate;
        if t > horizon {
            return Ok(Timeline { events, extinction_time: None, horizon });
        }
        if rng.random::<f64>() * total_rate < l {
            size += 1;
            events.push(TimelineEvent::Birth { time: t, size });
        } else {
            let before = size;
            while size > 0 && rng.random::<f64>() >= p {
                size -= 1;
            }
            events.push(TimelineEvent::Catastrophe { time: t, before, after: size });
            if size == 0 {
                return Ok(Timeline { events, extinction_time: Some(t), horizon });
            }
        }
    }
}
