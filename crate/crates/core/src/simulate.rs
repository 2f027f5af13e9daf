//! Synthetic photon counts for type-3 experiments.
//!
//! Each context is one d-outcome projective measurement; a run draws the
//! total per context from a Poisson law and splits it over outcomes
//! (implemented as independent Poissons per outcome, which is the same
//! law). Probabilities come back as count ratios with a binomial standard
//! error. Noise is a probability-level transformation applied before
//! sampling.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{complete_orthonormal_basis, VectorRealization};
use crate::rng::{context_stream, DOMAIN_COUNTS, DOMAIN_JITTER};
use crate::table::{rest_labels, CountRecord, Inequality, ProbabilityTable, TableRow, TableSource};
use crate::{jsonio, par};

/// A single additive perturbation: outcome `outcome` of the `context_index`-th
/// row (0-based) gets `delta` added before renormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasEntry {
    pub context_index: usize,
    pub outcome: String,
    pub delta: f64,
}

/// Probability-level noise applied to a table before count sampling.
///
/// `VectorJitter` rotates every measurement vector independently per
/// context by an angle drawn from N(0, sigma), then rebuilds the context
/// basis. The same measurement drifts differently in different contexts,
/// which is exactly what makes the epsilon correction positive.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    None,
    Depolarizing { visibility: f64 },
    VectorJitter { sigma: f64 },
    AdditiveBias { biases: Vec<BiasEntry> },
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// Accepted strings: `none`, `depolarizing:0.98`, `jitter:0.02`,
    /// `bias:ROW:OUTCOME:DELTA[,ROW:OUTCOME:DELTA...]` with 1-based rows.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(NoiseModel::None);
        }
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("malformed noise spec {s:?}")))?;
        match kind {
            "depolarizing" => {
                let visibility = rest
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad visibility {rest:?}")))?;
                Ok(NoiseModel::Depolarizing { visibility })
            }
            "jitter" => {
                let sigma = rest
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad jitter sigma {rest:?}")))?;
                Ok(NoiseModel::VectorJitter { sigma })
            }
            "bias" => {
                let biases = rest
                    .split(',')
                    .map(|entry| {
                        let parts: Vec<&str> = entry.split(':').collect();
                        let [row, outcome, delta] = parts.as_slice() else {
                            return Err(Error::invalid(format!(
                                "bias entry {entry:?} must be ROW:OUTCOME:DELTA"
                            )));
                        };
                        let row: usize = row
                            .parse()
                            .map_err(|_| Error::invalid(format!("bad bias row {row:?}")))?;
                        if row == 0 {
                            return Err(Error::invalid("bias rows are 1-based"));
                        }
                        Ok(BiasEntry {
                            context_index: row - 1,
                            outcome: outcome.to_string(),
                            delta: delta
                                .parse()
                                .map_err(|_| Error::invalid(format!("bad bias delta {delta:?}")))?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(NoiseModel::AdditiveBias { biases })
            }
            other => Err(Error::invalid(format!("unknown noise model {other:?}"))),
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseModel::None => write!(f, "none"),
            NoiseModel::Depolarizing { visibility } => write!(f, "depolarizing:{visibility}"),
            NoiseModel::VectorJitter { sigma } => write!(f, "jitter:{sigma}"),
            NoiseModel::AdditiveBias { biases } => {
                write!(f, "bias:")?;
                for (i, b) in biases.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}:{}:{}", b.context_index + 1, b.outcome, b.delta)?;
                }
                Ok(())
            }
        }
    }
}

/// Applies `model` to the per-context outcome distributions.
///
/// `None` (and `VectorJitter` with sigma = 0) return the table bit-exactly.
/// The other models rebuild each row from the transformed distribution;
/// rebuilt rows drop counts and standard errors since those describe the
/// pre-noise numbers. `seed` feeds the jitter draws only.
pub fn apply_noise(
    table: &ProbabilityTable,
    model: &NoiseModel,
    realization: Option<&VectorRealization>,
    seed: u64,
) -> Result<ProbabilityTable> {
    match model {
        NoiseModel::None => Ok(table.clone()),
        NoiseModel::Depolarizing { visibility } => {
            if !(0.0..=1.0).contains(visibility) {
                return Err(Error::invalid(format!(
                    "visibility must lie in [0,1], got {visibility}"
                )));
            }
            let rows = table
                .rows
                .iter()
                .map(|row| {
                    let d = row.outcomes.len() as f64;
                    let outcomes = row
                        .outcomes
                        .iter()
                        .map(|(l, p)| (l.clone(), visibility * p + (1.0 - visibility) / d))
                        .collect();
                    TableRow::from_outcomes(row.context.clone(), outcomes, 0.0, None)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ProbabilityTable {
                inequality: table.inequality,
                source: table.source.clone(),
                rows,
            })
        }
        NoiseModel::VectorJitter { sigma } => {
            if *sigma < 0.0 || !sigma.is_finite() {
                return Err(Error::invalid(format!(
                    "jitter sigma must be >= 0, got {sigma}"
                )));
            }
            let r = realization
                .ok_or_else(|| Error::invalid("vector_jitter noise requires a realization"))?;
            if r.dim() != table.inequality.dim() {
                return Err(Error::invalid("realization does not match the table"));
            }
            if *sigma == 0.0 {
                // Zero jitter introduces no context dependence at all.
                return Ok(table.clone());
            }
            let rows = par::try_map_indexed(table.rows.len(), |i| {
                jitter_row(&table.rows[i], i, r, *sigma, seed)
            })?;
            Ok(ProbabilityTable {
                inequality: table.inequality,
                source: table.source.clone(),
                rows,
            })
        }
        NoiseModel::AdditiveBias { biases } => {
            let mut dists: Vec<Vec<(String, f64)>> =
                table.rows.iter().map(|r| r.outcomes.clone()).collect();
            for b in biases {
                let row = dists.get_mut(b.context_index).ok_or_else(|| {
                    Error::invalid(format!("bias row {} out of range", b.context_index + 1))
                })?;
                let slot = row
                    .iter_mut()
                    .find(|(l, _)| *l == b.outcome)
                    .ok_or_else(|| {
                        Error::invalid(format!("bias outcome {} not in context", b.outcome))
                    })?;
                slot.1 += b.delta;
                if slot.1 < 0.0 {
                    return Err(Error::invalid(format!(
                        "bias drives outcome {} below zero",
                        b.outcome
                    )));
                }
            }
            let rows = table
                .rows
                .iter()
                .zip(dists)
                .map(|(row, mut outcomes)| {
                    let sum: f64 = outcomes.iter().map(|(_, p)| p).sum();
                    if sum <= 0.0 {
                        return Err(Error::invalid("bias removed all probability mass"));
                    }
                    for (_, p) in &mut outcomes {
                        *p /= sum;
                    }
                    TableRow::from_outcomes(row.context.clone(), outcomes, 0.0, None)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ProbabilityTable {
                inequality: table.inequality,
                source: table.source.clone(),
                rows,
            })
        }
    }
}

fn jitter_row(
    row: &TableRow,
    context_index: usize,
    r: &VectorRealization,
    sigma: f64,
    seed: u64,
) -> Result<TableRow> {
    let mut rng = context_stream(seed, DOMAIN_JITTER, context_index);
    let normal = Normal::new(0.0, sigma).expect("sigma checked finite and positive");
    let jittered: Vec<DVector<f64>> = row
        .context
        .measurements()
        .iter()
        .map(|m| {
            let v = r.vector_by_label(m)?;
            let angle: f64 = normal.sample(&mut rng);
            let axis = random_orthogonal_direction(v, &mut rng);
            Ok(v * angle.cos() + axis * angle.sin())
        })
        .collect::<Result<_>>()?;
    let basis = complete_orthonormal_basis(&jittered, r.dim());
    let mut outcomes: Vec<(String, f64)> = row
        .context
        .measurements()
        .iter()
        .zip(&basis)
        .map(|(m, b)| (m.clone(), b.dot(r.state()).powi(2)))
        .collect();
    let rest = &basis[row.context.measurements().len()..];
    for (label, b) in rest_labels(rest.len()).into_iter().zip(rest) {
        outcomes.push((label, b.dot(r.state()).powi(2)));
    }
    TableRow::from_outcomes(row.context.clone(), outcomes, 0.0, None)
}

/// A unit vector orthogonal to `v`, uniform over the orthogonal sphere.
fn random_orthogonal_direction<R: Rng>(v: &DVector<f64>, rng: &mut R) -> DVector<f64> {
    loop {
        let g = DVector::from_fn(v.len(), |_, _| StandardNormal.sample(rng));
        let w = &g - v * v.dot(&g);
        let norm = w.norm();
        if norm > 1e-9 {
            return w / norm;
        }
    }
}

/// Draws a count record per context: outcome counts are independent
/// Poissons with mean `mean_total * p` (the same law as a Poisson total
/// split multinomially). One RNG stream per (seed, context), so batches
/// over seeds parallelize without changing a single draw. The seven rows
/// themselves are sampled sequentially; they are far too small to split.
pub fn sample_counts(
    table: &ProbabilityTable,
    mean_total: f64,
    seed: u64,
) -> Result<ProbabilityTable> {
    if !mean_total.is_finite() || mean_total <= 0.0 {
        return Err(Error::invalid(format!(
            "mean_total must be positive and finite, got {mean_total}"
        )));
    }
    let rows = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut rng = context_stream(seed, DOMAIN_COUNTS, i);
            let outcomes: Vec<(String, u64)> = row
                .outcomes
                .iter()
                .map(|(label, p)| {
                    let lambda = mean_total * p.max(0.0);
                    let n = if lambda > 0.0 {
                        Poisson::new(lambda)
                            .expect("lambda positive")
                            .sample(&mut rng) as u64
                    } else {
                        0
                    };
                    (label.clone(), n)
                })
                .collect();
            row_from_counts(CountRecord::new(row.context.clone(), outcomes))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbabilityTable {
        inequality: table.inequality,
        source: TableSource::Simulated { seed },
        rows,
    })
}

/// One table per seed; parallel over seeds when the `parallel` feature is on.
pub fn sample_counts_batch(
    table: &ProbabilityTable,
    mean_total: f64,
    seeds: &[u64],
) -> Result<Vec<ProbabilityTable>> {
    par::try_map_indexed(seeds.len(), |i| sample_counts(table, mean_total, seeds[i]))
}

/// Sequential reference for [`sample_counts_batch`]; identical output.
pub fn sample_counts_batch_seq(
    table: &ProbabilityTable,
    mean_total: f64,
    seeds: &[u64],
) -> Result<Vec<ProbabilityTable>> {
    par::try_map_indexed_seq(seeds.len(), |i| sample_counts(table, mean_total, seeds[i]))
}

/// Ratio estimator for one record: probabilities are counts over total and
/// the target's standard error is binomial, `sqrt(p(1-p)/N)`.
pub fn row_from_counts(record: CountRecord) -> Result<TableRow> {
    if record.total == 0 {
        return Err(Error::DegenerateRecord {
            context: record.context.name(),
        });
    }
    let total = record.total as f64;
    let outcomes: Vec<(String, f64)> = record
        .outcomes
        .iter()
        .map(|(l, n)| (l.clone(), *n as f64 / total))
        .collect();
    let target = record
        .context
        .target_measurement()
        .ok_or_else(|| Error::invalid("count record needs exactly one target-1 measurement"))?;
    let p_target = outcomes
        .iter()
        .find(|(l, _)| l == target)
        .map(|&(_, p)| p)
        .ok_or_else(|| Error::invalid(format!("no counts for target measurement {target}")))?;
    let std_error = (p_target * (1.0 - p_target) / total).sqrt();
    TableRow::from_outcomes(record.context.clone(), outcomes, std_error, Some(record))
}

/// Builds a table from count records. Records must match contexts of the
/// inequality, including the position of the target outcome.
pub fn probabilities_from_counts(
    inequality: Inequality,
    records: &[CountRecord],
    origin: impl Into<String>,
) -> Result<ProbabilityTable> {
    let expected = inequality.contexts();
    let rows = records
        .iter()
        .map(|record| {
            let matching = expected
                .iter()
                .find(|c| c.same_measurements(&record.context))
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "context {} is not a context of {}",
                        record.context.name(),
                        inequality
                    ))
                })?;
            let want = matching.target_measurement().expect("heptagon contexts have a single target");
            let got = record.context.target_measurement().ok_or_else(|| {
                Error::invalid(format!(
                    "context {} needs exactly one target-1 measurement",
                    record.context.name()
                ))
            })?;
            if want != got {
                return Err(Error::invalid(format!(
                    "context {} target must be measurement {want}, found {got}",
                    record.context.name()
                )));
            }
            row_from_counts(record.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbabilityTable {
        inequality,
        source: TableSource::Ingested {
            origin: origin.into(),
        },
        rows,
    })
}

/// Counts interchange file, also the ingestion format for real lab data:
/// `{"inequality": ..., "contexts": [...], "meta": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountsFile {
    pub inequality: Inequality,
    pub contexts: Vec<CountRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl CountsFile {
    /// Extracts the records carried by a sampled table.
    pub fn from_table(
        table: &ProbabilityTable,
        meta: BTreeMap<String, serde_json::Value>,
    ) -> Result<Self> {
        let contexts = table
            .rows
            .iter()
            .map(|r| {
                r.counts.clone().ok_or_else(|| {
                    Error::invalid(format!("row {} carries no counts", r.context.name()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            inequality: table.inequality,
            contexts,
            meta,
        })
    }

    pub fn into_table(self, origin: impl Into<String>) -> Result<ProbabilityTable> {
        probabilities_from_counts(self.inequality, &self.contexts, origin)
    }

    pub fn to_json(&self) -> String {
        jsonio::to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        jsonio::from_json_str(text)
    }
}
