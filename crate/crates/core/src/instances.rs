//! Instance generators and instance-file serialization.
//!
//! Two constructed families drive the convergence experiments:
//!
//! * **Path**: agents `v_0..v_{n-1}` on a path graph at positions
//!   `(i+1) * epsilon`, so every edge starts at length exactly `epsilon`.
//! * **Dumbbell**: a calibrated one-dimensional instance with `n = 4k`
//!   agents: two cliques of `k` coincident agents, hub agents `l` and `r`,
//!   and a path of `2k - 2` agents between them. Edge lengths are chosen so
//!   that at time zero every single agent has movement magnitude exactly
//!   `m_hat = epsilon / (n^2/16 + 5n/4 - 1)`; construction verifies this at
//!   runtime. The `full_social` flavor additionally wires the cliques and
//!   the path as complete subgraphs and connects both hubs to every agent,
//!   which leaves a quadratic number of social edges beyond the confidence
//!   bound; the reduced flavor keeps only the initially active edges.
//!
//! A third generator draws a complete-graph instance with seeded uniform
//! positions, used as fuzz stock. Instances round-trip through a JSON file
//! (`dimension`, `epsilon`, `positions`, `edges`) with bit-exact positions.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SocialGraph;
use crate::rng::{mix_seed, Xoshiro256PlusPlus};
use crate::state::HksState;

/// Instance families known to the generators and the sweep engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Path,
    DumbbellFull,
    DumbbellReduced,
    CompleteRandom,
    Custom,
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::Path => "path",
            Topology::DumbbellFull => "dumbbell-full",
            Topology::DumbbellReduced => "dumbbell-reduced",
            Topology::CompleteRandom => "complete-random",
            Topology::Custom => "custom",
        }
    }

    /// Stable tag mixed into per-trial seeds.
    pub(crate) fn tag(&self) -> u64 {
        match self {
            Topology::Path => 1,
            Topology::DumbbellFull => 2,
            Topology::DumbbellReduced => 3,
            Topology::CompleteRandom => 4,
            Topology::Custom => 5,
        }
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(Topology::Path),
            "dumbbell-full" => Ok(Topology::DumbbellFull),
            "dumbbell-reduced" | "dumbbell" => Ok(Topology::DumbbellReduced),
            "complete-random" => Ok(Topology::CompleteRandom),
            "custom" => Ok(Topology::Custom),
            other => Err(Error::invalid(format!("unknown topology '{other}'"))),
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Serializable description of a generated or loaded instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub topology: Topology,
    pub n: usize,
    pub dimension: usize,
    pub epsilon: f64,
    /// Position seed; required for `CompleteRandom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Side length of the position cube for `CompleteRandom` (defaults to
    /// `epsilon`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    /// Explicit coordinates, `Custom` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec<f64>>>,
    /// Explicit edges, `Custom` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(u32, u32)>>,
}

impl InstanceSpec {
    pub fn path(n: usize, epsilon: f64) -> Self {
        InstanceSpec {
            topology: Topology::Path,
            n,
            dimension: 1,
            epsilon,
            seed: None,
            spread: None,
            positions: None,
            edges: None,
        }
    }

    pub fn dumbbell(n: usize, epsilon: f64, full_social: bool) -> Self {
        InstanceSpec {
            topology: if full_social {
                Topology::DumbbellFull
            } else {
                Topology::DumbbellReduced
            },
            n,
            dimension: 1,
            epsilon,
            seed: None,
            spread: None,
            positions: None,
            edges: None,
        }
    }

    pub fn complete_random(
        n: usize,
        dimension: usize,
        epsilon: f64,
        spread: f64,
        seed: u64,
    ) -> Self {
        InstanceSpec {
            topology: Topology::CompleteRandom,
            n,
            dimension,
            epsilon,
            seed: Some(seed),
            spread: Some(spread),
            positions: None,
            edges: None,
        }
    }

    /// Materializes the described instance.
    pub fn build(&self) -> Result<HksState> {
        match self.topology {
            Topology::Path => gen_path(self.n, self.epsilon),
            Topology::DumbbellFull => gen_dumbbell(self.n, self.epsilon, true),
            Topology::DumbbellReduced => gen_dumbbell(self.n, self.epsilon, false),
            Topology::CompleteRandom => {
                let seed = self
                    .seed
                    .ok_or_else(|| Error::invalid("complete-random requires a seed"))?;
                let spread = self.spread.unwrap_or(self.epsilon);
                gen_complete_random(self.n, self.dimension, self.epsilon, spread, seed)
            }
            Topology::Custom => {
                let positions = self
                    .positions
                    .as_ref()
                    .ok_or_else(|| Error::invalid("custom instance requires positions"))?;
                let edges = self
                    .edges
                    .as_ref()
                    .ok_or_else(|| Error::invalid("custom instance requires edges"))?;
                let graph = Arc::new(SocialGraph::new(positions.len(), edges.iter().copied())?);
                HksState::from_rows(graph, self.epsilon, positions)
            }
        }
    }
}

/// Path instance: agent `i` at `(i + 1) * epsilon` on the path graph, so all
/// `n - 1` edges have length exactly `epsilon`.
pub fn gen_path(n: usize, epsilon: f64) -> Result<HksState> {
    if n < 2 {
        return Err(Error::invalid(format!("path requires n >= 2, got {n}")));
    }
    check_epsilon(epsilon)?;
    let graph = Arc::new(SocialGraph::path(n)?);
    let positions: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) * epsilon).collect();
    HksState::new(graph, epsilon, 1, positions)
}

/// Uniform movement magnitude of the dumbbell instance with `n` agents:
/// `epsilon / (n^2/16 + 5n/4 - 1)`.
pub fn dumbbell_uniform_movement(n: usize, epsilon: f64) -> Result<f64> {
    check_dumbbell_n(n)?;
    check_epsilon(epsilon)?;
    let k = n / 4;
    Ok(epsilon / (k * k + 5 * k - 1) as f64)
}

fn check_dumbbell_n(n: usize) -> Result<()> {
    if !n.is_multiple_of(4) || n < 16 {
        return Err(Error::invalid(format!(
            "dumbbell requires n divisible by 4 and n >= 16, got {n}"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    Ok(())
}

/// Dumbbell instance with `n = 4k` agents.
///
/// Agent layout: clique `C_l` at ids `0..k`, hub `l` at id `k`, path agents
/// `v_1..v_{2k-2}` at ids `k+1..=3k-2`, hub `r` at id `3k-1`, clique `C_r`
/// at ids `3k..4k`. Positions (one-dimensional):
///
/// * `C_l` at 0, `l` at `(k+1) * m_hat`,
/// * path gaps `epsilon - 3*(k-j)*m_hat` for `j = 1..=k`, then
///   `epsilon - 3*(j-k)*m_hat` for `j = k+1..=2k-2`,
/// * `r` one gap of `epsilon - 3*(k-1)*m_hat` past the last path agent,
///   `C_r` at `(k+1) * m_hat` beyond `r`.
///
/// With `full_social`, both cliques and the path are complete subgraphs and
/// the hubs connect to every agent; otherwise the social network is exactly
/// the set of initially active edges. Either way the construction is
/// verified by asserting the uniform movement magnitude.
pub fn gen_dumbbell(n: usize, epsilon: f64, full_social: bool) -> Result<HksState> {
    check_dumbbell_n(n)?;
    check_epsilon(epsilon)?;
    let k = n / 4;
    let m_hat = dumbbell_uniform_movement(n, epsilon)?;

    let hub_l = k;
    let path_first = k + 1;
    let path_last = 3 * k - 2;
    let hub_r = 3 * k - 1;

    let mut positions = vec![0.0f64; n];
    positions[hub_l] = (k + 1) as f64 * m_hat;
    let mut cursor = positions[hub_l];
    for j in 1..=(2 * k - 2) {
        let steps = k.abs_diff(j);
        cursor += epsilon - 3.0 * steps as f64 * m_hat;
        positions[k + j] = cursor;
    }
    positions[hub_r] = cursor + epsilon - 3.0 * (k - 1) as f64 * m_hat;
    for v in (hub_r + 1)..n {
        positions[v] = positions[hub_r] + (k + 1) as f64 * m_hat;
    }

    let mut edges: Vec<(u32, u32)> = Vec::new();
    let clique = |edges: &mut Vec<(u32, u32)>, lo: usize, hi: usize| {
        for u in lo..hi {
            for v in (u + 1)..hi {
                edges.push((u as u32, v as u32));
            }
        }
    };
    if full_social {
        clique(&mut edges, 0, k);
        clique(&mut edges, path_first, path_last + 1);
        clique(&mut edges, 3 * k, n);
        for v in 0..n {
            if v != hub_l {
                edges.push((hub_l as u32, v as u32));
            }
        }
        for v in 0..n {
            if v != hub_r && v != hub_l {
                edges.push((hub_r as u32, v as u32));
            }
        }
    } else {
        // Exactly the initially active edges: both hub cliques plus the
        // consecutive path edges.
        clique(&mut edges, 0, k + 1);
        clique(&mut edges, hub_r, n);
        for v in hub_l..hub_r {
            edges.push((v as u32, (v + 1) as u32));
        }
    }

    let graph = Arc::new(SocialGraph::new(n, edges)?);
    let state = HksState::new(graph, epsilon, 1, positions)?;

    // The construction is correct iff every agent would move by exactly
    // m_hat; this arbitrates the calibrated gap arithmetic.
    for v in 0..n {
        let m = state.movement(v)?[0].abs();
        assert!(
            (m - m_hat).abs() <= 1e-9 * m_hat,
            "dumbbell calibration broken: agent {v} moves {m}, expected {m_hat}"
        );
    }
    Ok(state)
}

/// Complete-graph instance with positions i.i.d. uniform in
/// `[0, spread]^dimension`, deterministic in `seed`.
pub fn gen_complete_random(
    n: usize,
    dimension: usize,
    epsilon: f64,
    spread: f64,
    seed: u64,
) -> Result<HksState> {
    if n < 1 {
        return Err(Error::invalid("complete-random requires n >= 1"));
    }
    if dimension < 1 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if spread <= 0.0 || !spread.is_finite() {
        return Err(Error::invalid(format!(
            "spread must be positive and finite, got {spread}"
        )));
    }
    check_epsilon(epsilon)?;
    let mut rng = Xoshiro256PlusPlus::new(mix_seed(&[seed, n as u64, dimension as u64]));
    let positions: Vec<f64> = (0..n * dimension)
        .map(|_| spread * rng.uniform_f64())
        .collect();
    let graph = Arc::new(SocialGraph::complete(n)?);
    HksState::new(graph, epsilon, dimension, positions)
}

/// On-disk instance document.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    dimension: usize,
    epsilon: f64,
    positions: Vec<Vec<f64>>,
    edges: Vec<(u32, u32)>,
}

/// Writes the instance document for `state`.
pub fn write_instance(state: &HksState, mut writer: impl Write) -> Result<()> {
    let doc = InstanceFile {
        dimension: state.dimension(),
        epsilon: state.epsilon(),
        positions: state.position_rows(),
        edges: state.graph().edges().to_vec(),
    };
    serde_json::to_writer_pretty(&mut writer, &doc)
        .map_err(|e| Error::Parse(format!("serializing instance: {e}")))?;
    writer
        .write_all(b"\n")
        .map_err(|e| Error::Parse(format!("writing instance: {e}")))?;
    Ok(())
}

/// Saves `state` to `path` as an instance document.
pub fn save_instance(state: &HksState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    write_instance(state, BufWriter::new(file))
}

/// Reads an instance document; parse errors carry line/column context and
/// invariant violations (self-loops, duplicate edges, arity mismatches)
/// surface as validation errors.
pub fn read_instance(mut reader: impl Read) -> Result<HksState> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::Parse(format!("reading instance: {e}")))?;
    let doc: InstanceFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("instance file: {e}")))?;
    if doc.dimension == 0 {
        return Err(Error::Validation("dimension must be at least 1".into()));
    }
    if doc.epsilon <= 0.0 || !doc.epsilon.is_finite() {
        return Err(Error::Validation(format!(
            "epsilon must be positive and finite, got {}",
            doc.epsilon
        )));
    }
    if doc.positions.is_empty() {
        return Err(Error::Validation("instance has no agents".into()));
    }
    if let Some((i, row)) = doc
        .positions
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != doc.dimension)
    {
        return Err(Error::Validation(format!(
            "position row {i} has {} coordinates, expected {}",
            row.len(),
            doc.dimension
        )));
    }
    let graph = SocialGraph::new(doc.positions.len(), doc.edges).map_err(|e| match e {
        Error::SelfLoop { .. } | Error::DuplicateEdge { .. } | Error::EdgeOutOfRange { .. } => {
            Error::Validation(e.to_string())
        }
        other => other,
    })?;
    let flat: Vec<f64> = doc.positions.into_iter().flatten().collect();
    HksState::new(Arc::new(graph), doc.epsilon, doc.dimension, flat)
}

/// Loads an instance document from `path`.
pub fn load_instance(path: impl AsRef<Path>) -> Result<HksState> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_instance(BufReader::new(file)).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}
