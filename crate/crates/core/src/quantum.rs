//! Explicit quantum realizations of the heptagon inequalities: a state plus
//! one real unit vector per graph vertex, forming an orthonormal
//! representation (adjacent vertices get orthogonal vectors).
//!
//! Everything here is real-valued; the constructions need no complex
//! arithmetic. Angle names are kept local to each builder since the two
//! constructions reuse the same symbols.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::ExclusivityGraph;
use crate::table::{Inequality, ProbabilityTable, TableRow, TableSource};

/// Every realization vector must be unit within this tolerance.
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Vectors on graph edges must be orthogonal within this tolerance.
pub const EDGE_ORTHOGONALITY_TOL: f64 = 1e-10;
/// The general commuting-projector probability must agree with the rank-1
/// shortcut within this tolerance.
pub const PROJECTOR_REDUCTION_TOL: f64 = 1e-12;

/// A quantum state together with one measurement vector per graph vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRealization {
    dim: usize,
    state: DVector<f64>,
    vectors: Vec<DVector<f64>>,
    graph: ExclusivityGraph,
}

impl VectorRealization {
    /// Validates dimensions, unit norms and edge orthogonality on entry.
    pub fn new(
        dim: usize,
        state: DVector<f64>,
        vectors: Vec<DVector<f64>>,
        graph: ExclusivityGraph,
    ) -> Result<Self> {
        if state.len() != dim || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid("state/vector length does not match dim"));
        }
        if vectors.len() != graph.n() {
            return Err(Error::invalid(format!(
                "{} vectors for a graph with {} vertices",
                vectors.len(),
                graph.n()
            )));
        }
        let r = Self {
            dim,
            state,
            vectors,
            graph,
        };
        r.verify_orthonormal_representation()?;
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self) -> &DVector<f64> {
        &self.state
    }

    pub fn graph(&self) -> &ExclusivityGraph {
        &self.graph
    }

    pub fn vector(&self, vertex: usize) -> &DVector<f64> {
        &self.vectors[vertex]
    }

    pub fn vector_by_label(&self, label: &str) -> Result<&DVector<f64>> {
        self.graph
            .vertex_by_label(label)
            .map(|v| &self.vectors[v])
            .ok_or_else(|| Error::invalid(format!("unknown measurement label {label}")))
    }

    /// Map vertex label -> vector, in label order (for serialization).
    pub fn vectors_by_label(&self) -> BTreeMap<String, Vec<f64>> {
        self.graph
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), self.vectors[i].iter().copied().collect()))
            .collect()
    }

    /// Checks unit norms (1e-12) and edge orthogonality (1e-10).
    pub fn verify_orthonormal_representation(&self) -> Result<()> {
        let norm_dev = |v: &DVector<f64>| (v.dot(v) - 1.0).abs();
        if norm_dev(&self.state) > UNIT_NORM_TOL {
            return Err(Error::invalid("state is not unit norm"));
        }
        for (i, v) in self.vectors.iter().enumerate() {
            if norm_dev(v) > UNIT_NORM_TOL {
                return Err(Error::invalid(format!(
                    "vector {} is not unit norm",
                    self.graph.label(i)
                )));
            }
        }
        for (a, b) in self.graph.edges() {
            let dot = self.vectors[a].dot(&self.vectors[b]).abs();
            if dot > EDGE_ORTHOGONALITY_TOL {
                return Err(Error::invalid(format!(
                    "vectors {} and {} on an edge are not orthogonal (|dot| = {dot:.3e})",
                    self.graph.label(a),
                    self.graph.label(b)
                )));
            }
        }
        Ok(())
    }

    /// Applies one common orthogonal transform to the state and all vectors.
    /// Probabilities are invariant under this.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Result<Self> {
        if q.nrows() != self.dim || q.ncols() != self.dim {
            return Err(Error::invalid("rotation matrix has the wrong shape"));
        }
        Self::new(
            self.dim,
            q * &self.state,
            self.vectors.iter().map(|v| q * v).collect(),
            self.graph.clone(),
        )
    }
}

/// On-disk form of a realization:
/// `{"dim": d, "state": [...], "vectors": {"1": [...], ...}}` with vectors
/// keyed by vertex label, at full double precision.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RealizationFile {
    pub dim: usize,
    #[serde(with = "crate::jsonio::fullprec_vec")]
    pub state: Vec<f64>,
    #[serde(with = "crate::jsonio::fullprec_map_vec")]
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl VectorRealization {
    pub fn to_file_format(&self) -> RealizationFile {
        RealizationFile {
            dim: self.dim,
            state: self.state.iter().copied().collect(),
            vectors: self.vectors_by_label(),
        }
    }

    /// Rebuilds and re-validates a realization against the graph the file is
    /// meant for (the file itself does not carry the graph).
    pub fn from_file_format(file: &RealizationFile, graph: ExclusivityGraph) -> Result<Self> {
        let mut vectors = Vec::with_capacity(graph.n());
        for label in graph.labels() {
            let v = file
                .vectors
                .get(label)
                .ok_or_else(|| Error::invalid(format!("vectors missing label {label}")))?;
            vectors.push(DVector::from_vec(v.clone()));
        }
        Self::new(
            file.dim,
            DVector::from_vec(file.state.clone()),
            vectors,
            graph,
        )
    }
}

/// Qutrit realization for the heptagon:
/// `u_j = (cos f1, sin f1 cos f2, sin f1 sin f2)` with
/// `cos f1 = sqrt(cos(pi/7) / (1 + cos(pi/7)))` and `f2 = 6 pi j / 7`.
pub fn build_c7_realization() -> VectorRealization {
    let c = (PI / 7.0).cos();
    let cos_f1 = (c / (1.0 + c)).sqrt();
    let sin_f1 = (1.0 - c / (1.0 + c)).sqrt();
    let state = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let vectors = (1..=7)
        .map(|j| {
            let f2 = 6.0 * PI * j as f64 / 7.0;
            DVector::from_vec(vec![cos_f1, sin_f1 * f2.cos(), sin_f1 * f2.sin()])
        })
        .collect();
    let graph = ExclusivityGraph::cycle(7).expect("7-cycle");
    VectorRealization::new(3, state, vectors, graph).expect("heptagon realization is orthonormal")
}

/// Five-dimensional realization for the heptagon complement:
/// `v_k = (cos f1, sin f1 cos f2 cos f3, sin f1 cos f2 sin f3,
///         sin f1 sin f2 cos f4, sin f1 sin f2 sin f4)` with
/// `cos f1 = sqrt((1 + cos(pi/7)) / (7 cos(pi/7)))`,
/// `cos f2 = 2 sin(pi/7) sqrt(2 cos(pi/7) / (-1 + 6 cos(pi/7)))`,
/// `f3 = 4 pi k / 7`, `f4 = 2 pi k / 7`.
pub fn build_c7bar_realization() -> VectorRealization {
    let c = (PI / 7.0).cos();
    let cos_f1 = ((1.0 + c) / (7.0 * c)).sqrt();
    let sin_f1 = (1.0 - (1.0 + c) / (7.0 * c)).sqrt();
    let cos_f2 = 2.0 * (PI / 7.0).sin() * (2.0 * c / (-1.0 + 6.0 * c)).sqrt();
    let sin_f2 = (1.0 - cos_f2 * cos_f2).sqrt();
    let state = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    let vectors = (1..=7)
        .map(|k| {
            let f3 = 4.0 * PI * k as f64 / 7.0;
            let f4 = 2.0 * PI * k as f64 / 7.0;
            DVector::from_vec(vec![
                cos_f1,
                sin_f1 * cos_f2 * f3.cos(),
                sin_f1 * cos_f2 * f3.sin(),
                sin_f1 * sin_f2 * f4.cos(),
                sin_f1 * sin_f2 * f4.sin(),
            ])
        })
        .collect();
    let graph = ExclusivityGraph::cycle(7).expect("7-cycle").complement();
    VectorRealization::new(5, state, vectors, graph)
        .expect("heptagon-complement realization is orthonormal")
}

/// Builds the realization matching an inequality.
pub fn build_realization(inequality: Inequality) -> VectorRealization {
    match inequality {
        Inequality::C7 => build_c7_realization(),
        Inequality::C7bar => build_c7bar_realization(),
    }
}

/// An ordered set of mutually exclusive measurements plus the outcome
/// pattern whose joint probability is asked for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Context {
    measurements: Vec<String>,
    target: Vec<bool>,
}

impl Context {
    pub fn new(measurements: Vec<String>, target: Vec<bool>) -> Result<Self> {
        if measurements.len() != target.len() {
            return Err(Error::invalid("one target bit per measurement required"));
        }
        if measurements.is_empty() {
            return Err(Error::invalid("context must contain measurements"));
        }
        for i in 1..measurements.len() {
            if measurements[..i].contains(&measurements[i]) {
                return Err(Error::invalid(format!(
                    "measurement {} repeated in context",
                    measurements[i]
                )));
            }
        }
        Ok(Self {
            measurements,
            target,
        })
    }

    pub fn measurements(&self) -> &[String] {
        &self.measurements
    }

    pub fn target(&self) -> &[bool] {
        &self.target
    }

    /// The measurement whose outcome bit is 1, when there is exactly one.
    pub fn target_measurement(&self) -> Option<&str> {
        let mut hits = self.target.iter().enumerate().filter(|(_, &t)| t);
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Some(&self.measurements[i]),
            _ => None,
        }
    }

    pub fn contains(&self, label: &str) -> bool {
        self.measurements.iter().any(|m| m == label)
    }

    /// Order-insensitive comparison of the measurement sets.
    pub fn same_measurements(&self, other: &Context) -> bool {
        self.measurements.len() == other.measurements.len()
            && self.measurements.iter().all(|m| other.contains(m))
    }

    /// Display form like `(1,2)`.
    pub fn name(&self) -> String {
        format!("({})", self.measurements.join(","))
    }

    pub fn target_string(&self) -> String {
        self.target
            .iter()
            .map(|&t| if t { '1' } else { '0' })
            .collect()
    }

    /// Checks that all measurements exist in the realization and are
    /// pairwise exclusive (graph edges), i.e. their projectors commute.
    pub fn validate_against(&self, r: &VectorRealization) -> Result<()> {
        let mut vertices = Vec::with_capacity(self.measurements.len());
        for m in &self.measurements {
            let v = r
                .graph()
                .vertex_by_label(m)
                .ok_or_else(|| Error::invalid(format!("unknown measurement label {m}")))?;
            vertices.push(v);
        }
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                if !r.graph().is_edge(vertices[i], vertices[j]) {
                    return Err(Error::IncompatibleContext {
                        a: self.measurements[i].clone(),
                        b: self.measurements[j].clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

// Wire form: {"measurements": [1,2], "target": "10"} with numeric labels as
// JSON integers.
impl serde::Serialize for Context {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Context", 2)?;
        st.serialize_field(
            "measurements",
            &crate::jsonio::labels_to_json(&self.measurements),
        )?;
        st.serialize_field("target", &self.target_string())?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for Context {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Dto {
            measurements: Vec<serde_json::Value>,
            target: String,
        }
        let dto = Dto::deserialize(d)?;
        let measurements =
            crate::jsonio::labels_from_json(&dto.measurements).map_err(serde::de::Error::custom)?;
        let target = dto
            .target
            .chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(serde::de::Error::custom(format!(
                    "target must be a string of 0/1 bits, found {other}"
                ))),
            })
            .collect::<std::result::Result<Vec<bool>, D::Error>>()?;
        Context::new(measurements, target).map_err(serde::de::Error::custom)
    }
}

/// Joint probability of the context's outcome pattern in the realization.
///
/// Computes the full commuting-projector product `prod_i (P_i or 1 - P_i)`
/// sandwiched in the state. When the pattern has exactly one 1, the product
/// collapses to that rank-1 projector; the collapse is asserted against the
/// general value so a future non-rank-1 extension cannot silently diverge.
pub fn context_probability(r: &VectorRealization, c: &Context) -> Result<f64> {
    c.validate_against(r)?;
    let dim = r.dim();
    let mut op = DMatrix::<f64>::identity(dim, dim);
    for (m, &bit) in c.measurements().iter().zip(c.target()) {
        let v = r.vector_by_label(m)?;
        let projector = v * v.transpose();
        let factor = if bit {
            projector
        } else {
            DMatrix::identity(dim, dim) - projector
        };
        op *= factor;
    }
    let p = (r.state().transpose() * op * r.state())[(0, 0)];
    if let Some(t) = c.target_measurement() {
        let direct = r.vector_by_label(t)?.dot(r.state()).powi(2);
        assert!(
            (p - direct).abs() <= PROJECTOR_REDUCTION_TOL,
            "projector product {p} disagrees with rank-1 shortcut {direct}"
        );
    }
    Ok(p)
}

/// Extends `vectors` (assumed near-orthonormal) to a full orthonormal basis
/// of dimension `dim` by Gram-Schmidt over the canonical basis. The first
/// `vectors.len()` entries of the result stay aligned with the inputs.
pub fn complete_orthonormal_basis(vectors: &[DVector<f64>], dim: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim);
    let push_orthogonalized = |v: &DVector<f64>, basis: &mut Vec<DVector<f64>>| -> bool {
        let mut w = v.clone();
        for b in basis.iter() {
            let proj = b.dot(&w);
            w -= b * proj;
        }
        let norm = w.norm();
        if norm > 1e-8 {
            basis.push(w / norm);
            true
        } else {
            false
        }
    };
    for v in vectors {
        let ok = push_orthogonalized(v, &mut basis);
        debug_assert!(ok, "context vectors must be linearly independent");
    }
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        let e = DVector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 });
        push_orthogonalized(&e, &mut basis);
    }
    debug_assert_eq!(basis.len(), dim);
    basis
}

/// Ideal probability table: one row per context of the inequality, carrying
/// the target probability, the full d-outcome distribution (context vectors
/// plus Gram-Schmidt completion outcomes), and per-measurement marginals.
pub fn ideal_table(r: &VectorRealization, inequality: Inequality) -> Result<ProbabilityTable> {
    if r.dim() != inequality.dim() || r.graph() != &inequality.graph() {
        return Err(Error::invalid(format!(
            "realization does not match inequality {inequality}"
        )));
    }
    let mut rows = Vec::with_capacity(7);
    for context in inequality.contexts() {
        let vectors: Vec<DVector<f64>> = context
            .measurements()
            .iter()
            .map(|m| r.vector_by_label(m).cloned())
            .collect::<Result<_>>()?;
        let mut outcomes: Vec<(String, f64)> = Vec::with_capacity(r.dim());
        // Marginals come straight from the measurement vectors, so a
        // measurement's click probability is bit-identical in every context
        // it appears in (ideal epsilon is exactly zero).
        for (m, v) in context.measurements().iter().zip(&vectors) {
            outcomes.push((m.clone(), v.dot(r.state()).powi(2)));
        }
        let basis = complete_orthonormal_basis(&vectors, r.dim());
        let rest = &basis[vectors.len()..];
        let labels = crate::table::rest_labels(rest.len());
        for (label, b) in labels.into_iter().zip(rest) {
            outcomes.push((label, b.dot(r.state()).powi(2)));
        }
        let row = TableRow::from_outcomes(context.clone(), outcomes, 0.0, None)?;
        let general = context_probability(r, &context)?;
        assert!(
            (row.target_probability - general).abs() <= PROJECTOR_REDUCTION_TOL,
            "table row disagrees with the projector product"
        );
        rows.push(row);
    }
    Ok(ProbabilityTable {
        inequality,
        source: TableSource::Ideal,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c7_realization_certifies() {
        let r = build_c7_realization();
        r.verify_orthonormal_representation().unwrap();
        // Table I theory column: 0.474 per context, sum 3.318.
        for j in 1..=7 {
            let p = r
                .vector_by_label(&j.to_string())
                .unwrap()
                .dot(r.state())
                .powi(2);
            assert!((p - 0.474).abs() < 5e-4, "p_{j} = {p}");
            assert!((p - 0.4739524581991566).abs() < 1e-12);
        }
    }

    #[test]
    fn c7bar_realization_certifies() {
        let r = build_c7bar_realization();
        r.verify_orthonormal_representation().unwrap();
        // Adjacency in the complement is cycle-distance 2 or 3.
        for k in 0..7usize {
            for d in [2usize, 3] {
                let l = (k + d) % 7;
                let dot = r.vector(k).dot(r.vector(l)).abs();
                assert!(dot < 1e-10, "<v_{k}|v_{l}> = {dot}");
            }
        }
        // Table III theory column: 0.301 per context, sum 2.110.
        let p = r.vector(0).dot(r.state()).powi(2);
        assert!((p - 0.301).abs() < 5e-4);
        assert!((p - 0.3014166091678203).abs() < 1e-12);
    }

    #[test]
    fn context_probability_matches_tables() {
        let r = build_c7_realization();
        let ctx = Context::new(vec!["1".into(), "2".into()], vec![true, false]).unwrap();
        let p = context_probability(&r, &ctx).unwrap();
        assert!((p - 0.474).abs() < 5e-4);

        // All-zeros pattern on a two-measurement context.
        let ctx0 = Context::new(vec!["1".into(), "2".into()], vec![false, false]).unwrap();
        let p0 = context_probability(&r, &ctx0).unwrap();
        let expect = 1.0 - 2.0 * 0.4739524581991566;
        assert!((p0 - expect).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&p0));

        let rbar = build_c7bar_realization();
        let ctx = Context::new(
            vec!["1".into(), "3".into(), "5".into()],
            vec![true, false, false],
        )
        .unwrap();
        let p = context_probability(&rbar, &ctx).unwrap();
        assert!((p - 0.301).abs() < 5e-4);
    }

    #[test]
    fn incompatible_context_is_rejected() {
        let r = build_c7_realization();
        // 1 and 3 are not adjacent in the 7-cycle.
        let ctx = Context::new(vec!["1".into(), "3".into()], vec![true, false]).unwrap();
        assert!(matches!(
            context_probability(&r, &ctx),
            Err(Error::IncompatibleContext { .. })
        ));
    }

    #[test]
    fn ideal_tables_are_symmetric() {
        let r = build_c7_realization();
        let table = ideal_table(&r, Inequality::C7).unwrap();
        assert_eq!(table.rows.len(), 7);
        let p0 = table.rows[0].target_probability;
        for row in &table.rows {
            assert!((row.target_probability - p0).abs() < 1e-12);
            let sum: f64 = row.outcomes.iter().map(|(_, p)| p).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        let s: f64 = table.rows.iter().map(|r| r.target_probability).sum();
        assert!((s - 3.317667207394096).abs() < 1e-12);

        let rbar = build_c7bar_realization();
        let table = ideal_table(&rbar, Inequality::C7bar).unwrap();
        let s: f64 = table.rows.iter().map(|r| r.target_probability).sum();
        assert!((s - 2.109916264174742).abs() < 1e-11);
        // Five outcomes per row: three context vectors plus two rest labels.
        assert_eq!(table.rows[0].outcomes.len(), 5);
        assert_eq!(table.rows[0].outcomes[3].0, "rest1");

        assert!(ideal_table(&r, Inequality::C7bar).is_err());
    }

    #[test]
    fn marginals_are_context_independent() {
        let r = build_c7_realization();
        let table = ideal_table(&r, Inequality::C7).unwrap();
        // Measurement 2 appears in contexts (1,2) and (2,3); its marginal
        // must be bit-identical in both.
        let m1 = table.rows[0].marginals["2"];
        let m2 = table.rows[1].marginals["2"];
        assert_eq!(m1.to_bits(), m2.to_bits());
    }

    #[test]
    fn rotation_invariance() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = build_c7_realization();
        // Random orthogonal matrix from QR of a Gaussian matrix.
        let g = DMatrix::from_fn(3, 3, |_, _| rand_distr::StandardNormal.sample(&mut rng));
        let q = g.qr().q();
        let rotated = r.rotated(&q).unwrap();
        for j in 1..=7 {
            let ctx = Context::new(
                vec![j.to_string(), (j % 7 + 1).to_string()],
                vec![true, false],
            )
            .unwrap();
            let a = context_probability(&r, &ctx).unwrap();
            let b = context_probability(&rotated, &ctx).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
