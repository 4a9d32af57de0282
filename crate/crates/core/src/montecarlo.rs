//! Monte Carlo cross-check of the analytical block evaluation.
//!
//! Each sample draws an up/down state for every component at the mission
//! time and evaluates the boolean structure function. Randomness for sample
//! `i` comes from a ChaCha8 stream keyed by the seed with stream number `i`;
//! component `c` consumes the `c`-th draw of that stream. Results therefore do
//! not depend on how samples are split across worker threads.

use std::collections::HashMap;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::composition::{Block, Component, CpsArchitecture};
use crate::error::{Error, Result};

/// Samples handled by one unit of parallel work.
const CHUNK: u64 = 4096;
const Z95: f64 = 1.959_963_984_540_054;
/// Below this many samples the normal-approximation interval is flagged.
const MIN_SAMPLES_FOR_CI: u64 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub samples: u64,
    pub seed: u64,
    pub mission: f64,
}

impl SimulationConfig {
    pub fn new(samples: u64, seed: u64, mission: f64) -> Result<Self> {
        if samples < 1 {
            return Err(Error::domain("samples must be >= 1"));
        }
        if !(mission.is_finite() && mission >= 0.0) {
            return Err(Error::domain(format!(
                "mission must be >= 0, got {mission}"
            )));
        }
        Ok(Self {
            samples,
            seed,
            mission,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationEstimate {
    pub p_hat: f64,
    pub successes: u64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub samples: u64,
    pub seed: u64,
    /// The interval is a point or the sample is too small for the normal approximation.
    pub degenerate_ci: bool,
}

impl SimulationEstimate {
    fn from_counts(successes: u64, samples: u64, seed: u64) -> Self {
        let n = samples as f64;
        let p_hat = successes as f64 / n;
        let std_error = (p_hat * (1.0 - p_hat) / n).sqrt();
        let half = Z95 * std_error;
        Self {
            p_hat,
            successes,
            std_error,
            ci95: ((p_hat - half).max(0.0), (p_hat + half).min(1.0)),
            samples,
            seed,
            degenerate_ci: std_error == 0.0 || samples < MIN_SAMPLES_FOR_CI,
        }
    }

    /// `|p_hat - reference| / std_error`; infinite when the error is zero
    /// and the values differ.
    pub fn sigma_distance(&self, reference: f64) -> f64 {
        let d = (self.p_hat - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Bernoulli draw of a component's state: up iff `draw < R(mission)`.
pub fn sample_component_up(component: &Component, mission: f64, draw: f64) -> Result<bool> {
    if !(draw > 0.0 && draw < 1.0) {
        return Err(Error::domain(format!(
            "draw must lie in (0, 1), got {draw}"
        )));
    }
    Ok(draw < component.reliability(mission)?)
}

/// Structure function of `block` for the given component states.
pub fn structure_up(block: &Block, states: &HashMap<String, bool>) -> Result<bool> {
    Ok(match block {
        Block::Leaf(c) => *states
            .get(&c.id)
            .ok_or_else(|| Error::MissingState(c.id.clone()))?,
        Block::Series(ch) => {
            let mut up = true;
            for b in ch {
                up &= structure_up(b, states)?;
            }
            up
        }
        Block::Parallel(ch) => {
            let mut up = false;
            for b in ch {
                up |= structure_up(b, states)?;
            }
            up
        }
        Block::KofN { k, children } => {
            let mut n = 0;
            for b in children {
                n += usize::from(structure_up(b, states)?);
            }
            n >= *k
        }
    })
}

/// Block with leaves replaced by their position in a flat state vector.
#[derive(Debug)]
enum Node {
    Leaf(usize),
    Series(Vec<Node>),
    Parallel(Vec<Node>),
    KofN(usize, Vec<Node>),
}

impl Node {
    fn compile(block: &Block, next: &mut usize) -> Node {
        let kids = |ch: &[Block], next: &mut usize| -> Vec<Node> {
            ch.iter().map(|b| Node::compile(b, next)).collect()
        };
        match block {
            Block::Leaf(_) => {
                *next += 1;
                Node::Leaf(*next - 1)
            }
            Block::Series(ch) => Node::Series(kids(ch, next)),
            Block::Parallel(ch) => Node::Parallel(kids(ch, next)),
            Block::KofN { k, children } => Node::KofN(*k, kids(children, next)),
        }
    }

    fn up(&self, states: &[bool]) -> bool {
        match self {
            Node::Leaf(i) => states[*i],
            Node::Series(ch) => ch.iter().all(|n| n.up(states)),
            Node::Parallel(ch) => ch.iter().any(|n| n.up(states)),
            Node::KofN(k, ch) => ch.iter().filter(|n| n.up(states)).count() >= *k,
        }
    }
}

/// A system as a series of compiled blocks over one flat list of
/// independent Bernoulli elements.
struct Plan {
    roots: Vec<Node>,
    up_probability: Vec<f64>,
}

impl Plan {
    fn new(blocks: &[&Block], mission: f64) -> Result<Self> {
        let mut next = 0;
        let mut roots = Vec::with_capacity(blocks.len());
        let mut up_probability = Vec::new();
        for block in blocks {
            roots.push(Node::compile(block, &mut next));
            for leaf in block.leaves() {
                up_probability.push(leaf.reliability(mission)?);
            }
        }
        Ok(Self {
            roots,
            up_probability,
        })
    }

    fn run(&self, config: &SimulationConfig) -> SimulationEstimate {
        let proto = ChaCha8Rng::seed_from_u64(config.seed);
        let chunks = config.samples.div_ceil(CHUNK);
        let successes: u64 = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let start = chunk * CHUNK;
                let end = (start + CHUNK).min(config.samples);
                let mut states = vec![false; self.up_probability.len()];
                let mut hits = 0u64;
                for sample in start..end {
                    let mut rng = proto.clone();
                    rng.set_stream(sample);
                    for (state, p) in states.iter_mut().zip(&self.up_probability) {
                        let draw: f64 = rng.sample(Open01);
                        *state = draw < *p;
                    }
                    hits += u64::from(self.roots.iter().all(|n| n.up(&states)));
                }
                hits
            })
            .sum();
        SimulationEstimate::from_counts(successes, config.samples, config.seed)
    }
}

/// Estimates the reliability of a single block.
pub fn simulate_block(block: &Block, config: &SimulationConfig) -> Result<SimulationEstimate> {
    block.validate()?;
    Ok(Plan::new(&[block], config.mission)?.run(config))
}

/// Estimates whole-system reliability with every module in series (the
/// product combiner), plus the data term as one more Bernoulli element when
/// present. The architecture's own mission is replaced by `config.mission`.
pub fn simulate_architecture(
    arch: &CpsArchitecture,
    config: &SimulationConfig,
) -> Result<SimulationEstimate> {
    arch.validate()?;
    let blocks: Vec<&Block> = arch.modules().into_iter().map(|(_, b)| b).collect();
    let mut plan = Plan::new(&blocks, config.mission)?;
    if let Some(d) = arch.data_reliability {
        let idx = plan.up_probability.len();
        plan.up_probability.push(d);
        plan.roots.push(Node::Leaf(idx));
    }
    Ok(plan.run(config))
}
