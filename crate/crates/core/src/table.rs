//! Probability tables: one row per context, each carrying the full d-outcome
//! distribution, the target joint probability, per-measurement marginals,
//! and (for measured data) raw counts with a binomial standard error.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ExclusivityGraph;
use crate::jsonio;
use crate::quantum::Context;

/// The two heptagon inequalities the toolkit predicts and analyzes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inequality {
    C7,
    C7bar,
}

/// 1-based index arithmetic modulo 7 (measurement labels run 1..=7).
pub fn mod7(j: usize, delta: i64) -> usize {
    ((j as i64 - 1 + delta).rem_euclid(7) + 1) as usize
}

impl Inequality {
    pub fn name(&self) -> &'static str {
        match self {
            Inequality::C7 => "C7",
            Inequality::C7bar => "C7bar",
        }
    }

    /// Hilbert-space dimension of the matching realization.
    pub fn dim(&self) -> usize {
        match self {
            Inequality::C7 => 3,
            Inequality::C7bar => 5,
        }
    }

    /// Independence number of the exclusivity graph: the NCHV bound.
    pub fn alpha(&self) -> u32 {
        match self {
            Inequality::C7 => 3,
            Inequality::C7bar => 2,
        }
    }

    pub fn graph(&self) -> ExclusivityGraph {
        let c7 = ExclusivityGraph::cycle(7).expect("7-cycle");
        match self {
            Inequality::C7 => c7,
            Inequality::C7bar => c7.complement(),
        }
    }

    pub fn theta_closed_form(&self) -> f64 {
        crate::theta::odd_cycle_theta_closed_form(7, matches!(self, Inequality::C7bar))
            .expect("7 is odd")
    }

    /// Bound from local quantum measurements in Bell scenarios; only known
    /// for the heptagon itself, kept as the exact expression 2 + 3 sqrt(3)/4.
    pub fn qlm_bound(&self) -> Option<f64> {
        match self {
            Inequality::C7 => Some(2.0 + 3.0 * 3.0_f64.sqrt() / 4.0),
            Inequality::C7bar => None,
        }
    }

    /// The seven contexts of the inequality, in table order.
    ///
    /// For C7, context j is `(j, j+1)` with target `(1,0)`. For C7bar the
    /// row starting at f is `(f, f+2, f+4)` with target `(1,0,0)`, i.e.
    /// `(k-2, k, k+2)` with the target on `k-2`.
    pub fn contexts(&self) -> Vec<Context> {
        (1..=7)
            .map(|j| {
                let (measurements, target) = match self {
                    Inequality::C7 => (vec![j, mod7(j, 1)], vec![true, false]),
                    Inequality::C7bar => {
                        (vec![j, mod7(j, 2), mod7(j, 4)], vec![true, false, false])
                    }
                };
                Context::new(
                    measurements.into_iter().map(|m| m.to_string()).collect(),
                    target,
                )
                .expect("heptagon contexts are well-formed")
            })
            .collect()
    }

    /// The contexts a measurement appears in (2 for C7, 3 for C7bar),
    /// ordered so that consecutive entries share the measurement.
    pub fn contexts_of_measurement(&self, label: usize) -> Vec<Context> {
        let firsts: Vec<usize> = match self {
            Inequality::C7 => vec![mod7(label, -1), label],
            Inequality::C7bar => vec![mod7(label, -4), mod7(label, -2), label],
        };
        let all = self.contexts();
        firsts
            .into_iter()
            .map(|f| {
                all.iter()
                    .find(|c| c.measurements()[0] == f.to_string())
                    .expect("context exists")
                    .clone()
            })
            .collect()
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Inequality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C7" | "c7" => Ok(Inequality::C7),
            "C7bar" | "c7bar" | "C7BAR" => Ok(Inequality::C7bar),
            other => Err(Error::invalid(format!("unknown inequality {other}"))),
        }
    }
}

/// Labels for the completion outcomes of a d-outcome context measurement:
/// a single one is called `rest`, several are `rest1`, `rest2`, ...
pub fn rest_labels(count: usize) -> Vec<String> {
    if count == 1 {
        vec!["rest".to_string()]
    } else {
        (1..=count).map(|i| format!("rest{i}")).collect()
    }
}

/// Where a table's numbers came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableSource {
    Ideal,
    Simulated { seed: u64 },
    Ingested { origin: String },
}

/// Raw photon counts for one context's d-outcome measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    pub context: Context,
    /// Outcome label -> counts, in outcome order (context labels then rest*).
    pub outcomes: Vec<(String, u64)>,
    pub total: u64,
}

impl CountRecord {
    pub fn new(context: Context, outcomes: Vec<(String, u64)>) -> Self {
        let total = outcomes.iter().map(|(_, n)| n).sum();
        Self {
            context,
            outcomes,
            total,
        }
    }
}

/// One context row of a [`ProbabilityTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub context: Context,
    /// Full outcome distribution, context measurements first, then rest*.
    #[serde(with = "jsonio::fullprec_pairs")]
    pub outcomes: Vec<(String, f64)>,
    #[serde(with = "jsonio::fullprec")]
    pub target_probability: f64,
    /// Click probability of each context measurement in this context.
    #[serde(with = "jsonio::fullprec_map")]
    pub marginals: BTreeMap<String, f64>,
    #[serde(with = "jsonio::fullprec")]
    pub std_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<CountRecord>,
}

impl TableRow {
    /// Builds a row from a full outcome distribution. The context must have
    /// exactly one target-1 measurement and every context measurement must
    /// appear among the outcomes.
    pub fn from_outcomes(
        context: Context,
        outcomes: Vec<(String, f64)>,
        std_error: f64,
        counts: Option<CountRecord>,
    ) -> Result<Self> {
        let target = context
            .target_measurement()
            .ok_or_else(|| {
                Error::invalid(format!(
                    "context {} needs exactly one target-1 measurement",
                    context.name()
                ))
            })?
            .to_string();
        for (label, p) in &outcomes {
            if !(-1e-12..=1.0 + 1e-12).contains(p) {
                return Err(Error::invalid(format!(
                    "outcome {label} probability {p} outside [0,1]"
                )));
            }
        }
        let lookup = |label: &str| {
            outcomes
                .iter()
                .find(|(l, _)| l == label)
                .map(|&(_, p)| p)
                .ok_or_else(|| Error::invalid(format!("outcome {label} missing from context")))
        };
        let target_probability = lookup(&target)?;
        let marginals = context
            .measurements()
            .iter()
            .map(|m| Ok((m.clone(), lookup(m)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self {
            context,
            outcomes,
            target_probability,
            marginals,
            std_error,
            counts,
        })
    }
}

/// Per-context probabilities for one inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub inequality: Inequality,
    pub source: TableSource,
    pub rows: Vec<TableRow>,
}

impl ProbabilityTable {
    /// Errors with the list of missing contexts unless all seven are present.
    pub fn validate_complete(&self) -> Result<()> {
        let missing: Vec<String> = self
            .inequality
            .contexts()
            .iter()
            .filter(|c| self.row_for(c).is_none())
            .map(|c| c.name())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::IncompleteTable(missing))
        }
    }

    /// Row lookup by measurement set (order-insensitive).
    pub fn row_for(&self, context: &Context) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.context.same_measurements(context))
    }

    pub fn to_json(&self) -> String {
        jsonio::to_json_string(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        jsonio::from_json_str(s)
    }
}

// Counts appear inside tables (audit trail) and in the standalone counts
// interchange file; both use the `{"measurements": .., "target": ..,
// "outcomes": {label: n}}` shape.
#[derive(Serialize, Deserialize)]
struct CountRecordDto {
    measurements: Vec<serde_json::Value>,
    target: String,
    outcomes: BTreeMap<String, u64>,
}

impl Serialize for CountRecord {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("CountRecord", 3)?;
        st.serialize_field(
            "measurements",
            &jsonio::labels_to_json(self.context.measurements()),
        )?;
        st.serialize_field("target", &self.context.target_string())?;
        let map: BTreeMap<&str, u64> = self
            .outcomes
            .iter()
            .map(|(l, n)| (l.as_str(), *n))
            .collect();
        st.serialize_field("outcomes", &map)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CountRecord {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let dto = CountRecordDto::deserialize(deserializer)?;
        let measurements =
            jsonio::labels_from_json(&dto.measurements).map_err(serde::de::Error::custom)?;
        let target: Vec<bool> = dto
            .target
            .chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(serde::de::Error::custom(format!(
                    "target must be a string of 0/1 bits, found {other}"
                ))),
            })
            .collect::<std::result::Result<_, D::Error>>()?;
        let context = Context::new(measurements, target).map_err(serde::de::Error::custom)?;
        // Normalize outcome order: context measurements first, then the
        // remaining (rest*) labels sorted.
        let mut outcomes: Vec<(String, u64)> = Vec::with_capacity(dto.outcomes.len());
        for m in context.measurements() {
            let n = dto.outcomes.get(m).copied().ok_or_else(|| {
                serde::de::Error::custom(format!("outcomes missing count for measurement {m}"))
            })?;
            outcomes.push((m.clone(), n));
        }
        for (label, n) in &dto.outcomes {
            if !context.contains(label) {
                outcomes.push((label.clone(), *n));
            }
        }
        Ok(CountRecord::new(context, outcomes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contexts_match_published_layout() {
        let c7: Vec<String> = Inequality::C7.contexts().iter().map(|c| c.name()).collect();
        assert_eq!(c7[0], "(1,2)");
        assert_eq!(c7[6], "(7,1)");
        let c7bar: Vec<String> = Inequality::C7bar
            .contexts()
            .iter()
            .map(|c| c.name())
            .collect();
        assert_eq!(c7bar[0], "(1,3,5)");
        assert_eq!(c7bar[6], "(7,2,4)");
        // Targets sit on the first listed measurement.
        for c in Inequality::C7bar.contexts() {
            assert_eq!(c.target_measurement().unwrap(), c.measurements()[0]);
        }
    }

    #[test]
    fn measurement_context_membership() {
        for m in 1..=7 {
            let ctxs = Inequality::C7bar.contexts_of_measurement(m);
            assert_eq!(ctxs.len(), 3);
            for c in &ctxs {
                assert!(c.contains(&m.to_string()));
            }
            let ctxs = Inequality::C7.contexts_of_measurement(m);
            assert_eq!(ctxs.len(), 2);
        }
    }

    #[test]
    fn row_requires_single_target() {
        let ctx = Context::new(vec!["1".into(), "2".into()], vec![true, true]).unwrap();
        let out = vec![("1".to_string(), 0.4), ("2".to_string(), 0.4)];
        assert!(TableRow::from_outcomes(ctx, out, 0.0, None).is_err());
    }

    #[test]
    fn completeness_reports_missing() {
        let r = crate::quantum::build_c7_realization();
        let mut table = crate::quantum::ideal_table(&r, Inequality::C7).unwrap();
        table.rows.remove(2);
        table.rows.remove(0);
        match table.validate_complete() {
            Err(Error::IncompleteTable(missing)) => {
                assert_eq!(missing, vec!["(1,2)".to_string(), "(3,4)".to_string()]);
            }
            other => panic!("expected incomplete-table error, got {other:?}"),
        }
    }

    #[test]
    fn count_record_round_trip() {
        let ctx = Context::new(vec!["6".into(), "7".into()], vec![true, false]).unwrap();
        let rec = CountRecord::new(
            ctx,
            vec![("6".into(), 474), ("7".into(), 470), ("rest".into(), 56)],
        );
        let json = serde_json::to_string(&rec).unwrap();
        let back: CountRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.total, 1000);
    }
}
