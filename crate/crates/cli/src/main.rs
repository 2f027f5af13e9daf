//! Command-line pipeline: compute bounds, emit ideal predictions, simulate
//! photon-count runs, ingest count files, analyze, combine experiments, and
//! render reports.
//!
//! All state flows through flags and files; a fixed seed makes every output
//! byte-identical across runs. Exit codes: 0 success, 2 validation error,
//! 3 SDP non-convergence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ctk_core::analyze::{
    combine_component_summaries, combine_product, make_report, AnalysisReport, ComponentSummary,
    Scenario, DEFAULT_SIGNIFICANCE_SIGMA,
};
use ctk_core::error::Error;
use ctk_core::graph::ExclusivityGraph;
use ctk_core::independence::independence_number;
use ctk_core::jsonio;
use ctk_core::quantum::{build_realization, ideal_table, RealizationFile, VectorRealization};
use ctk_core::render;
use ctk_core::simulate::{apply_noise, sample_counts, CountsFile, NoiseModel};
use ctk_core::table::{Inequality, ProbabilityTable};
use ctk_core::theta::{lovasz_theta, odd_cycle_theta_closed_form, SdpOptions};
use ctk_core::Result;

#[derive(Parser)]
#[command(
    name = "ctk",
    version,
    about = "Noncontextuality-inequality toolkit for the heptagon family"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InequalityArg {
    C7,
    C7bar,
    Product,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Print classical (alpha), quantum (theta) and principle bounds.
    Bounds {
        /// Built-in inequality; alternatively pass --graph.
        #[arg(long, value_enum)]
        inequality: Option<InequalityArg>,
        /// Custom exclusivity graph JSON ({"n", "edges", "labels"}, 1-based).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// SDP duality-gap tolerance.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the ideal quantum probability table.
    Predict {
        #[arg(long, value_enum)]
        inequality: InequalityArg,
        /// Realization JSON overriding the built-in vectors.
        #[arg(long)]
        realization: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a photon-count run: ideal table -> noise -> Poisson counts.
    Simulate {
        #[arg(long, value_enum)]
        inequality: InequalityArg,
        /// Realization JSON overriding the built-in vectors.
        #[arg(long)]
        realization: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Mean total counts per context.
        #[arg(long = "mean-counts")]
        mean_counts: f64,
        /// Noise spec: none | depolarizing:V | jitter:SIGMA | bias:ROW:OUTCOME:DELTA[,..]
        #[arg(long, default_value = "none")]
        noise: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a counts file or probability table into a report.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE_SIGMA)]
        significance: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combine a C7 and a C7bar result into the product-inequality report.
    Combine {
        /// C7 input: report, table, or counts file.
        #[arg(long = "in-a")]
        input_a: PathBuf,
        /// C7bar input: report, table, or counts file.
        #[arg(long = "in-b")]
        input_b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE_SIGMA)]
        significance: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a report or table file.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    ctk_core::par::configure_threads_from_env();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::SdpNonConvergence { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Bounds {
            inequality,
            graph,
            tol,
            format,
            out,
        } => {
            let bounds = match (inequality, graph) {
                (Some(arg), None) => builtin_bounds(arg, tol)?,
                (None, Some(path)) => graph_bounds(&path, tol)?,
                _ => {
                    return Err(Error::invalid(
                        "bounds needs exactly one of --inequality or --graph",
                    ))
                }
            };
            let text = match format {
                Format::Json => jsonio::to_json_string(&bounds),
                Format::Markdown => bounds.to_markdown(),
            };
            emit(out.as_deref(), &text)
        }
        Command::Predict {
            inequality,
            realization,
            format,
            out,
        } => {
            let inequality = single_inequality(inequality, "predict")?;
            let r = load_realization(realization.as_deref(), inequality)?;
            let table = ideal_table(&r, inequality)?;
            let text = match format {
                Format::Json => table.to_json(),
                Format::Markdown => render::markdown_table(&table)?,
            };
            emit(out.as_deref(), &text)
        }
        Command::Simulate {
            inequality,
            realization,
            seed,
            mean_counts,
            noise,
            out,
        } => {
            let inequality = single_inequality(inequality, "simulate")?;
            let r = load_realization(realization.as_deref(), inequality)?;
            let model: NoiseModel = noise.parse()?;
            let ideal = ideal_table(&r, inequality)?;
            let noisy = apply_noise(&ideal, &model, Some(&r), seed)?;
            let sampled = sample_counts(&noisy, mean_counts, seed)?;
            let mut meta = BTreeMap::new();
            meta.insert("generator".to_string(), serde_json::json!("ctk simulate"));
            meta.insert("seed".to_string(), serde_json::json!(seed));
            meta.insert(
                "mean_counts".to_string(),
                serde_json::json!(format!("{mean_counts}")),
            );
            meta.insert("noise".to_string(), serde_json::json!(model.to_string()));
            let counts = CountsFile::from_table(&sampled, meta)?;
            emit(out.as_deref(), &counts.to_json())
        }
        Command::Analyze {
            input,
            significance,
            tol,
            format,
            out,
        } => {
            let table = load_table(&input)?;
            let report = analyze_table(&table, tol, significance)?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Markdown => render::markdown_report(&report),
            };
            emit(out.as_deref(), &text)
        }
        Command::Combine {
            input_a,
            input_b,
            significance,
            format,
            out,
        } => {
            let a = load_component(&input_a, Inequality::C7, Scenario::C7)?;
            let b = load_component(&input_b, Inequality::C7bar, Scenario::C7bar)?;
            let report = match (a, b) {
                (Component::Table(ta), Component::Table(tb)) => {
                    combine_product(&ta, &tb, significance)?
                }
                (a, b) => combine_component_summaries(
                    &a.into_summary()?,
                    &b.into_summary()?,
                    significance,
                ),
            };
            let text = match format {
                Format::Json => report.to_json(),
                Format::Markdown => render::markdown_report(&report),
            };
            emit(out.as_deref(), &text)
        }
        Command::Report { input, format, out } => {
            let text = read(&input)?;
            let value: serde_json::Value = jsonio::from_json_str(&text)?;
            let rendered = if value.get("S").is_some() {
                let report: AnalysisReport = jsonio::from_json_str(&text)?;
                match format {
                    Format::Json => report.to_json(),
                    Format::Markdown => render::markdown_report(&report),
                }
            } else {
                let table = load_table(&input)?;
                match format {
                    Format::Json => table.to_json(),
                    Format::Markdown => render::markdown_table(&table)?,
                }
            };
            emit(out.as_deref(), &rendered)
        }
    }
}

fn load_realization(path: Option<&Path>, inequality: Inequality) -> Result<VectorRealization> {
    match path {
        Some(path) => {
            let file: RealizationFile = jsonio::from_json_str(&read(path)?)?;
            VectorRealization::from_file_format(&file, inequality.graph())
        }
        None => Ok(build_realization(inequality)),
    }
}

fn single_inequality(arg: InequalityArg, subcommand: &str) -> Result<Inequality> {
    match arg {
        InequalityArg::C7 => Ok(Inequality::C7),
        InequalityArg::C7bar => Ok(Inequality::C7bar),
        InequalityArg::Product => Err(Error::invalid(format!(
            "{subcommand} works on a single inequality; use `combine` for the product"
        ))),
    }
}

/// Everything `bounds` knows about one scenario.
#[derive(serde::Serialize)]
struct BoundsOutput {
    scenario: String,
    n: usize,
    alpha: u32,
    #[serde(with = "ctk_core::jsonio::fullprec")]
    theta: f64,
    #[serde(with = "ctk_core::jsonio::fullprec_opt")]
    theta_closed_form: Option<f64>,
    #[serde(with = "ctk_core::jsonio::fullprec_opt")]
    qlm: Option<f64>,
    #[serde(with = "ctk_core::jsonio::fullprec_opt")]
    exclusivity: Option<f64>,
    /// How theta was obtained: "sdp" or "closed-form product".
    theta_method: String,
}

impl BoundsOutput {
    fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# Bounds for {}\n\n", self.scenario));
        out.push_str(&format!("- vertices: {}\n", self.n));
        out.push_str(&format!("- NCHV (alpha): {}\n", self.alpha));
        out.push_str(&format!(
            "- quantum (theta, {}): {:.4}\n",
            self.theta_method, self.theta
        ));
        if let Some(cf) = self.theta_closed_form {
            out.push_str(&format!("- theta closed form: {cf:.4}\n"));
        }
        if let Some(qlm) = self.qlm {
            out.push_str(&format!("- QLM: {qlm:.4}\n"));
        }
        if let Some(e) = self.exclusivity {
            out.push_str(&format!("- exclusivity principle: {e:.4}\n"));
        }
        out
    }
}

fn builtin_bounds(arg: InequalityArg, tol: f64) -> Result<BoundsOutput> {
    match arg {
        InequalityArg::C7 | InequalityArg::C7bar => {
            let inequality = single_inequality(arg, "bounds")?;
            let g = inequality.graph();
            let bounds = lovasz_theta(&g, &SdpOptions::with_gap_tol(tol))?;
            Ok(BoundsOutput {
                scenario: inequality.name().to_string(),
                n: g.n(),
                alpha: bounds.alpha,
                theta: bounds.theta,
                theta_closed_form: Some(inequality.theta_closed_form()),
                qlm: inequality.qlm_bound(),
                exclusivity: None,
                theta_method: "sdp".to_string(),
            })
        }
        InequalityArg::Product => {
            // Theta multiplies over the OR product for vertex-transitive
            // factors; the 49-vertex alpha search stays exact.
            let g = Inequality::C7
                .graph()
                .or_product(&Inequality::C7bar.graph());
            let alpha = independence_number(&g)?;
            let theta =
                odd_cycle_theta_closed_form(7, false)? * odd_cycle_theta_closed_form(7, true)?;
            Ok(BoundsOutput {
                scenario: "product".to_string(),
                n: g.n(),
                alpha,
                theta,
                theta_closed_form: Some(theta),
                qlm: None,
                exclusivity: Some(ctk_core::analyze::EXCLUSIVITY_BOUND_PRODUCT),
                theta_method: "closed-form product".to_string(),
            })
        }
    }
}

/// Custom-graph JSON: `{"n": int, "edges": [[i,j],...], "labels": [..]?}`
/// with 1-based vertex indices in the file.
#[derive(serde::Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

fn graph_bounds(path: &Path, tol: f64) -> Result<BoundsOutput> {
    let file: GraphFile = jsonio::from_json_str(&read(path)?)?;
    for &(a, b) in &file.edges {
        if a == 0 || b == 0 {
            return Err(Error::invalid("graph file indices are 1-based"));
        }
    }
    let mut g = ExclusivityGraph::new(file.n, file.edges.iter().map(|&(a, b)| (a - 1, b - 1)))?;
    if let Some(labels) = file.labels {
        g = g.with_labels(labels)?;
    }
    let bounds = lovasz_theta(&g, &SdpOptions::with_gap_tol(tol))?;
    Ok(BoundsOutput {
        scenario: format!("graph:{}", path.display()),
        n: g.n(),
        alpha: bounds.alpha,
        theta: bounds.theta,
        theta_closed_form: None,
        qlm: None,
        exclusivity: None,
        theta_method: "sdp".to_string(),
    })
}

/// Loads a table from either a counts file or a table file.
fn load_table(path: &Path) -> Result<ProbabilityTable> {
    let text = read(path)?;
    let value: serde_json::Value = jsonio::from_json_str(&text)?;
    if value.get("contexts").is_some() {
        let counts: CountsFile = jsonio::from_json_str(&text)?;
        counts.into_table(path.display().to_string())
    } else if value.get("rows").is_some() {
        jsonio::from_json_str(&text)
    } else {
        Err(Error::Schema {
            path: ".".to_string(),
            message: "expected a counts file (contexts) or a table (rows)".to_string(),
        })
    }
}

enum Component {
    Table(ProbabilityTable),
    Summary(ComponentSummary),
}

impl Component {
    fn into_summary(self) -> Result<ComponentSummary> {
        match self {
            Component::Table(t) => ComponentSummary::from_table(&t),
            Component::Summary(s) => Ok(s),
        }
    }
}

fn load_component(path: &Path, expect: Inequality, scenario: Scenario) -> Result<Component> {
    let text = read(path)?;
    let value: serde_json::Value = jsonio::from_json_str(&text)?;
    if value.get("S").is_some() {
        let report: AnalysisReport = jsonio::from_json_str(&text)?;
        Ok(Component::Summary(ComponentSummary::from_report(
            &report, scenario,
        )?))
    } else {
        let table = load_table(path)?;
        if table.inequality != expect {
            return Err(Error::invalid(format!(
                "{} holds a {} result, expected {expect}",
                path.display(),
                table.inequality
            )));
        }
        Ok(Component::Table(table))
    }
}

fn analyze_table(table: &ProbabilityTable, tol: f64, significance: f64) -> Result<AnalysisReport> {
    let bounds = lovasz_theta(&table.inequality.graph(), &SdpOptions::with_gap_tol(tol))?;
    make_report(
        table,
        &bounds,
        table.inequality.qlm_bound(),
        None,
        significance,
    )
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
