//! Markdown renderers. All rounding happens here; files keep full precision.

use crate::analyze::{evaluate_s, AnalysisReport, Relation};
use crate::error::Result;
use crate::table::{Inequality, ProbabilityTable};

fn value_cell(p: f64, err: f64) -> String {
    if err > 0.0 {
        format!("{p:.3} ± {err:.3}")
    } else {
        format!("{p:.3}")
    }
}

/// Fixed-width table in the usual lab-report layout: context, measured
/// probability (± error when present), ideal theory value, with a final S
/// row. Rows follow the canonical context order.
pub fn markdown_table(table: &ProbabilityTable) -> Result<String> {
    let (s, s_error) = evaluate_s(table)?;
    let theory_row = table.inequality.theta_closed_form() / 7.0;
    let theory_sum = table.inequality.theta_closed_form();
    let (ctx_header, prob_header) = match table.inequality {
        Inequality::C7 => ("(j,j⊕1)", "P(1,0\\|j,j⊕1)"),
        Inequality::C7bar => ("(k⊖2,k,k⊕2)", "P(1,0,0\\|k⊖2,k,k⊕2)"),
    };
    let mut out = String::new();
    out.push_str(&format!("| {ctx_header} | {prob_header} | Theory |\n"));
    out.push_str("|---|---|---|\n");
    for context in table.inequality.contexts() {
        let row = table.row_for(&context).expect("validated complete");
        out.push_str(&format!(
            "| {} | {} | {theory_row:.3} |\n",
            context.name(),
            value_cell(row.target_probability, row.std_error),
        ));
    }
    out.push_str(&format!(
        "| S({}) | {} | {theory_sum:.3} |\n",
        table.inequality,
        value_cell(s, s_error),
    ));
    Ok(out)
}

fn relation_word(r: Relation) -> &'static str {
    match r {
        Relation::Exceeds => "exceeds",
        Relation::Consistent => "consistent",
        Relation::Below => "below",
    }
}

/// Bound-by-bound verdict table for a report.
pub fn markdown_report(report: &AnalysisReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("# S({}) analysis\n\n", report.inequality));
    out.push_str(&format!(
        "S = {:.4} ± {:.4} (epsilon = {:.4})\n\n",
        report.s, report.s_error, report.epsilon.epsilon
    ));
    out.push_str("| Bound | Value | Verdict | Significance |\n");
    out.push_str("|---|---|---|---|\n");
    let rows: [(&str, Option<f64>); 5] = [
        ("NCHV", Some(report.bounds.nchv)),
        ("MNCHV", Some(report.bounds.mnchv)),
        ("QLM", report.bounds.qlm),
        ("Quantum", Some(report.bounds.quantum)),
        ("Exclusivity", report.bounds.exclusivity),
    ];
    for (name, value) in rows {
        let Some(value) = value else { continue };
        let key = name.to_lowercase();
        let verdict = &report.verdicts[&key];
        let sig = verdict
            .significance
            .map(|z| format!("{z:.1}σ"))
            .unwrap_or_else(|| "—".to_string());
        out.push_str(&format!(
            "| {name} | {value:.4} | {} | {sig} |\n",
            relation_word(verdict.relation),
        ));
    }
    out.push_str(&format!("\nepsilon formula: {}\n", report.epsilon_formula));
    out
}
