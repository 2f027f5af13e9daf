//! S evaluation, T-distances, the epsilon correction for maximally
//! noncontextual hidden-variable (MNCHV) bounds, experiment combination for
//! the product inequality, and verdicts against every bound.
//!
//! A table's marginals would be context-independent in an ideal experiment.
//! The T-distance quantifies how far a measurement's observed marginals
//! drift between two of its contexts; half the sum of all such drifts is
//! the epsilon by which the classical bound must be relaxed before a
//! violation can be claimed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonio;
use crate::quantum::Context;
use crate::table::{Inequality, ProbabilityTable};
use crate::theta::GraphBounds;

/// Default one-sided z-score a verdict needs before "exceeds"/"below".
pub const DEFAULT_SIGNIFICANCE_SIGMA: f64 = 3.0;
/// Comparison tolerance when a table has no statistical error at all.
pub const ZERO_ERROR_TOL: f64 = 1e-6;
/// Exclusivity-principle bound for the product inequality.
pub const EXCLUSIVITY_BOUND_PRODUCT: f64 = 7.0;

/// Sum of the seven target probabilities and its 1-sigma error (contexts
/// are independent runs, so variances add).
pub fn evaluate_s(table: &ProbabilityTable) -> Result<(f64, f64)> {
    table.validate_complete()?;
    let mut s = 0.0;
    let mut var = 0.0;
    for context in table.inequality.contexts() {
        let row = table.row_for(&context).expect("validated complete");
        s += row.target_probability;
        var += row.std_error * row.std_error;
    }
    Ok((s, var.sqrt()))
}

/// Total-variation distance between measurement `m`'s marginal distribution
/// in two contexts. Outcomes are binary (click / no click), so the general
/// half-sum form collapses to `|P_A(1) - P_B(1)|`; the collapse is asserted.
pub fn t_distance(
    table: &ProbabilityTable,
    measurement: &str,
    ctx_a: &Context,
    ctx_b: &Context,
) -> Result<f64> {
    for ctx in [ctx_a, ctx_b] {
        if !ctx.contains(measurement) {
            return Err(Error::invalid(format!(
                "measurement {measurement} does not appear in context {}",
                ctx.name()
            )));
        }
    }
    let marginal = |ctx: &Context| -> Result<f64> {
        let row = table
            .row_for(ctx)
            .ok_or_else(|| Error::IncompleteTable(vec![ctx.name()]))?;
        row.marginals.get(measurement).copied().ok_or_else(|| {
            Error::invalid(format!(
                "row {} has no marginal for {measurement}",
                ctx.name()
            ))
        })
    };
    let pa = marginal(ctx_a)?;
    let pb = marginal(ctx_b)?;
    let binary = (pa - pb).abs();
    let general = 0.5 * ((pa - pb).abs() + ((1.0 - pa) - (1.0 - pb)).abs());
    assert!(
        (general - binary).abs() <= 1e-12,
        "total-variation form {general} disagrees with binary reduction {binary}"
    );
    Ok(binary)
}

/// One T-distance entry of an epsilon breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TEntry {
    pub measurement: String,
    pub context_a: Context,
    pub context_b: Context,
    #[serde(rename = "T", with = "jsonio::fullprec")]
    pub t: f64,
}

/// The epsilon correction with its full per-measurement T-distance audit
/// trail; `mnchv_bound` is the classical bound plus epsilon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBreakdown {
    #[serde(rename = "per_measurement_T")]
    pub per_measurement_t: Vec<TEntry>,
    #[serde(with = "jsonio::fullprec")]
    pub epsilon: f64,
    #[serde(with = "jsonio::fullprec")]
    pub mnchv_bound: f64,
}

impl EpsilonBreakdown {
    fn from_entries(entries: Vec<TEntry>, alpha: f64) -> Self {
        let epsilon = 0.5 * entries.iter().map(|e| e.t).sum::<f64>();
        Self {
            per_measurement_t: entries,
            epsilon,
            mnchv_bound: alpha + epsilon,
        }
    }
}

/// Epsilon for the heptagon: each measurement appears in two contexts, so
/// epsilon is half the sum of the seven pairwise T-distances and the MNCHV
/// bound is `3 + epsilon`.
pub fn epsilon_c7(table: &ProbabilityTable) -> Result<EpsilonBreakdown> {
    if table.inequality != Inequality::C7 {
        return Err(Error::invalid("epsilon_c7 needs a C7 table"));
    }
    table.validate_complete()?;
    let mut entries = Vec::with_capacity(7);
    for j in 1..=7usize {
        let label = j.to_string();
        let ctxs = table.inequality.contexts_of_measurement(j);
        let t = t_distance(table, &label, &ctxs[0], &ctxs[1])?;
        entries.push(TEntry {
            measurement: label,
            context_a: ctxs[0].clone(),
            context_b: ctxs[1].clone(),
            t,
        });
    }
    Ok(EpsilonBreakdown::from_entries(entries, 3.0))
}

/// Epsilon for the heptagon complement: each measurement appears in three
/// contexts, contributing all three pairwise T-distances; the MNCHV bound
/// is `2 + epsilon`.
pub fn epsilon_c7bar(table: &ProbabilityTable) -> Result<EpsilonBreakdown> {
    if table.inequality != Inequality::C7bar {
        return Err(Error::invalid("epsilon_c7bar needs a C7bar table"));
    }
    table.validate_complete()?;
    let mut entries = Vec::with_capacity(21);
    for k in 1..=7usize {
        let label = k.to_string();
        let ctxs = table.inequality.contexts_of_measurement(k);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let t = t_distance(table, &label, &ctxs[a], &ctxs[b])?;
            entries.push(TEntry {
                measurement: label.clone(),
                context_a: ctxs[a].clone(),
                context_b: ctxs[b].clone(),
                t,
            });
        }
    }
    Ok(EpsilonBreakdown::from_entries(entries, 2.0))
}

pub fn epsilon(table: &ProbabilityTable) -> Result<EpsilonBreakdown> {
    match table.inequality {
        Inequality::C7 => epsilon_c7(table),
        Inequality::C7bar => epsilon_c7bar(table),
    }
}

/// Which inequality a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    C7,
    C7bar,
    #[serde(rename = "product")]
    Product,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::C7 => write!(f, "C7"),
            Scenario::C7bar => write!(f, "C7bar"),
            Scenario::Product => write!(f, "product"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBounds {
    #[serde(with = "jsonio::fullprec")]
    pub nchv: f64,
    #[serde(with = "jsonio::fullprec")]
    pub mnchv: f64,
    /// Known only for C7; explicitly null elsewhere, never defaulted.
    #[serde(with = "jsonio::fullprec_opt")]
    pub qlm: Option<f64>,
    #[serde(with = "jsonio::fullprec")]
    pub quantum: f64,
    /// Exclusivity-principle bound; only the product inequality has one.
    #[serde(with = "jsonio::fullprec_opt")]
    pub exclusivity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Exceeds,
    Consistent,
    Below,
}

/// Outcome of comparing S against one bound. `significance` is the
/// one-sided z-score `(S - bound) / S_error`, absent when the table carries
/// no statistical error (the comparison then uses [`ZERO_ERROR_TOL`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub relation: Relation,
    #[serde(with = "jsonio::fullprec_opt")]
    pub significance: Option<f64>,
}

/// Classification rule shared by every bound; kept separate so tests can
/// recompute verdicts from the stored (S, bound, error) fields bit-exactly.
pub fn classify(s: f64, s_error: f64, bound: f64, threshold_sigma: f64) -> Verdict {
    if s_error > 0.0 {
        let z = (s - bound) / s_error;
        let relation = if z >= threshold_sigma {
            Relation::Exceeds
        } else if z <= -threshold_sigma {
            Relation::Below
        } else {
            Relation::Consistent
        };
        Verdict {
            relation,
            significance: Some(z),
        }
    } else {
        let relation = if (s - bound).abs() <= ZERO_ERROR_TOL {
            Relation::Consistent
        } else if s > bound {
            Relation::Exceeds
        } else {
            Relation::Below
        };
        Verdict {
            relation,
            significance: None,
        }
    }
}

/// Full analysis result for one inequality (or the product).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub inequality: Scenario,
    #[serde(rename = "S", with = "jsonio::fullprec")]
    pub s: f64,
    #[serde(rename = "S_error", with = "jsonio::fullprec")]
    pub s_error: f64,
    pub bounds: ReportBounds,
    pub epsilon: EpsilonBreakdown,
    pub verdicts: BTreeMap<String, Verdict>,
    #[serde(with = "jsonio::fullprec")]
    pub significance_threshold: f64,
    /// Human-readable statement of how epsilon and the MNCHV bound were
    /// computed, so reports are auditable on their own.
    pub epsilon_formula: String,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        jsonio::to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        jsonio::from_json_str(text)
    }
}

fn verdict_map(
    s: f64,
    s_error: f64,
    bounds: &ReportBounds,
    threshold: f64,
) -> BTreeMap<String, Verdict> {
    let mut verdicts = BTreeMap::new();
    verdicts.insert(
        "nchv".to_string(),
        classify(s, s_error, bounds.nchv, threshold),
    );
    verdicts.insert(
        "mnchv".to_string(),
        classify(s, s_error, bounds.mnchv, threshold),
    );
    verdicts.insert(
        "quantum".to_string(),
        classify(s, s_error, bounds.quantum, threshold),
    );
    if let Some(qlm) = bounds.qlm {
        verdicts.insert("qlm".to_string(), classify(s, s_error, qlm, threshold));
    }
    if let Some(e) = bounds.exclusivity {
        verdicts.insert(
            "exclusivity".to_string(),
            classify(s, s_error, e, threshold),
        );
    }
    verdicts
}

/// Builds the report for a single-inequality table. `bounds` supplies the
/// exact alpha and the SDP theta; `qlm`/`e_bound` stay `None` where the
/// literature gives no value.
pub fn make_report(
    table: &ProbabilityTable,
    bounds: &GraphBounds,
    qlm: Option<f64>,
    e_bound: Option<f64>,
    threshold_sigma: f64,
) -> Result<AnalysisReport> {
    if bounds.alpha != table.inequality.alpha() {
        return Err(Error::invalid(format!(
            "graph bounds (alpha {}) do not belong to {}",
            bounds.alpha, table.inequality
        )));
    }
    let (s, s_error) = evaluate_s(table)?;
    let eps = epsilon(table)?;
    let report_bounds = ReportBounds {
        nchv: bounds.alpha as f64,
        mnchv: eps.mnchv_bound,
        qlm,
        quantum: bounds.theta,
        exclusivity: e_bound,
    };
    let verdicts = verdict_map(s, s_error, &report_bounds, threshold_sigma);
    let scenario = match table.inequality {
        Inequality::C7 => Scenario::C7,
        Inequality::C7bar => Scenario::C7bar,
    };
    let epsilon_formula = match table.inequality {
        Inequality::C7 => {
            "epsilon = (1/2) sum_j T(j in {j-1,j} vs {j,j+1}); mnchv = 3 + epsilon".to_string()
        }
        Inequality::C7bar => "epsilon = (1/2) sum_k [T12 + T13 + T23] over the three contexts \
                              of k; mnchv = 2 + epsilon"
            .to_string(),
    };
    Ok(AnalysisReport {
        inequality: scenario,
        s,
        s_error,
        bounds: report_bounds,
        epsilon: eps,
        verdicts,
        significance_threshold: threshold_sigma,
        epsilon_formula,
    })
}

/// What the product combination needs from each component experiment.
#[derive(Debug, Clone)]
pub struct ComponentSummary {
    pub s: f64,
    pub s_error: f64,
    pub epsilon: EpsilonBreakdown,
}

impl ComponentSummary {
    pub fn from_table(table: &ProbabilityTable) -> Result<Self> {
        let (s, s_error) = evaluate_s(table)?;
        Ok(Self {
            s,
            s_error,
            epsilon: epsilon(table)?,
        })
    }

    pub fn from_report(report: &AnalysisReport, expect: Scenario) -> Result<Self> {
        if report.inequality != expect {
            return Err(Error::invalid(format!(
                "expected a {expect} report, found {}",
                report.inequality
            )));
        }
        Ok(Self {
            s: report.s,
            s_error: report.s_error,
            epsilon: report.epsilon.clone(),
        })
    }
}

const PRODUCT_EPSILON_FORMULA: &str =
    "mnchv = (3 + epsilon_C7) * (2 + epsilon_C7bar) under statistical independence of the two \
     systems; epsilon = mnchv - 6; component T entries are listed unweighted";

/// Combines two independent experiments into the product-inequality report.
///
/// The 49 product-context probabilities factorize, so S_product = S_A * S_B;
/// the table path asserts the 49-term sum against the product. The error is
/// first-order propagation and the MNCHV bound is the product of the two
/// component MNCHV bounds (the experiments are statistically independent).
pub fn combine_product(
    table_a: &ProbabilityTable,
    table_b: &ProbabilityTable,
    threshold_sigma: f64,
) -> Result<AnalysisReport> {
    if table_a.inequality != Inequality::C7 || table_b.inequality != Inequality::C7bar {
        return Err(Error::invalid(
            "product combination needs a C7 table and a C7bar table, in that order",
        ));
    }
    let a = ComponentSummary::from_table(table_a)?;
    let b = ComponentSummary::from_table(table_b)?;

    // 49-term factorization check: sum_{j,k} P_A(j) P_B(k) = S_A * S_B.
    let mut product_sum = 0.0;
    for ca in table_a.inequality.contexts() {
        let pa = table_a.row_for(&ca).expect("complete").target_probability;
        for cb in table_b.inequality.contexts() {
            let pb = table_b.row_for(&cb).expect("complete").target_probability;
            product_sum += pa * pb;
        }
    }
    assert!(
        (product_sum - a.s * b.s).abs() <= 1e-12,
        "49-term product sum {product_sum} disagrees with S_A*S_B = {}",
        a.s * b.s
    );

    Ok(combine_component_summaries(&a, &b, threshold_sigma))
}

/// Product report from component summaries (used when the inputs are
/// already-analyzed reports rather than tables).
pub fn combine_component_summaries(
    a: &ComponentSummary,
    b: &ComponentSummary,
    threshold_sigma: f64,
) -> AnalysisReport {
    let s = a.s * b.s;
    let s_error = ((b.s * a.s_error).powi(2) + (a.s * b.s_error).powi(2)).sqrt();
    let mnchv = (3.0 + a.epsilon.epsilon) * (2.0 + b.epsilon.epsilon);
    let theta_product = Inequality::C7.theta_closed_form() * Inequality::C7bar.theta_closed_form();

    let mut entries =
        Vec::with_capacity(a.epsilon.per_measurement_t.len() + b.epsilon.per_measurement_t.len());
    for e in &a.epsilon.per_measurement_t {
        entries.push(TEntry {
            measurement: format!("A:{}", e.measurement),
            ..e.clone()
        });
    }
    for e in &b.epsilon.per_measurement_t {
        entries.push(TEntry {
            measurement: format!("B:{}", e.measurement),
            ..e.clone()
        });
    }
    let eps = EpsilonBreakdown {
        per_measurement_t: entries,
        epsilon: mnchv - 6.0,
        mnchv_bound: mnchv,
    };

    let report_bounds = ReportBounds {
        nchv: 6.0,
        mnchv,
        qlm: None,
        quantum: theta_product,
        exclusivity: Some(EXCLUSIVITY_BOUND_PRODUCT),
    };
    let verdicts = verdict_map(s, s_error, &report_bounds, threshold_sigma);
    AnalysisReport {
        inequality: Scenario::Product,
        s,
        s_error,
        bounds: report_bounds,
        epsilon: eps,
        verdicts,
        significance_threshold: threshold_sigma,
        epsilon_formula: PRODUCT_EPSILON_FORMULA.to_string(),
    }
}
