//! `cayley-spectra`: batch front end for the icosahedral group-algebra
//! toolkit. Every output file records the tool version, the seed and the
//! fully resolved configuration.

mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const AFTER_HELP: &str = "\
Reproduction commands:
  Cayley digraph (DOT, colored by generator)  cayley-spectra graph --out graph.dot
  Laplacian spectrum and irrep labels        cayley-spectra irreps --model adjacency
  Squared-shift model coefficients           cayley-spectra fundamental --irrep Hg --method squared
  Truncation gap curves (all irreps)         cayley-spectra truncate --irrep all --metric angular
  K-perturbed spectral flows (10 pairs)      cayley-spectra flow --pairs all --perturb K --s 0.1 --seed 7
  Disordered spectral flows                  cayley-spectra flow --perturb disorder --width 1.0
  Molecule architecture and response sweep   cayley-spectra molecule --kernel exp:r0=1.0 --sweep 0:3:300

Seeds: --seed, then the config file, then CAYLEY_SPECTRA_SEED, then 7.
Config: --config FILE takes a JSON object with an optional shared \"seed\"
and one section per command, e.g. {\"flow\": {\"s\": 0.1}}. Unknown keys are
rejected. Flags override the file.

Exit status: 0 on success, 2 on usage errors, 1 on numeric or IO failures.
Failures print a JSON record {\"error\": {\"kind\", \"message\"}} on stderr.
Run `cayley-spectra <command> --help` for the CSV columns of each command.";

#[derive(Debug, Parser)]
#[command(name = "cayley-spectra", version, about = "Spectra, pairings and spectral flows of icosahedral group-algebra models", after_help = AFTER_HELP)]
struct Cli {
    /// JSON config file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (1 runs sequentially). Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Export the 60 rotations with multiplication, inverse and class tables (JSON).
    Group(GroupArgs),
    /// Export the Cayley graph of the standard generators (DOT or JSON).
    Graph(GraphArgs),
    /// Eigenvalue clusters of a model with irrep pairings.
    #[command(after_help = "CSV columns: cluster_index, eigenvalue, multiplicity, irrep_label, n_Ag, n_T1g, n_T2g, n_Gg, n_Hg")]
    Spectrum(ModelArgs),
    /// Irrep assignment of each eigenvalue cluster from its level character.
    #[command(
        after_help = "CSV columns: cluster_index, eigenvalue, multiplicity, irrep_label, chi_<class> per character-table column"
    )]
    Irreps(ModelArgs),
    /// Integer pairings of each cluster projection with every irrep.
    #[command(
        after_help = "CSV columns: cluster_index, eigenvalue, multiplicity, n_<irrep> (rounded), raw_<irrep> (unrounded pairing), max_rounding_error"
    )]
    Pairings(ModelArgs),
    /// Coefficients of one fundamental model.
    #[command(after_help = "CSV columns: element, angle, word_distance, re, im, abs (nonzero coefficients only)")]
    Fundamental(FundamentalArgs),
    /// Truncation sweep of the irrep projections, locating the first gap closing.
    #[command(after_help = "Files in --out-dir:
  truncate_<irrep>.csv  t, tracked_gap, lowest_gap, eig_1..eig_60
  truncate_<irrep>.svg  eigenvalues against t, closing marked
  summary.csv           irrep, t_c, t_star, support_before, support_after, support_post_closing, resolution_warnings")]
    Truncate(TruncateArgs),
    /// Spectral flows between pairs of fundamental models.
    #[command(after_help = "Files in --out-dir:
  flow_<n>_<A>-<B>.csv  lambda, eig_1..eig_60
  flow_<n>_<A>-<B>.svg  lowest eigenvalue curves against lambda, crossing marked
  summary.csv           pair_label, irrep_a, irrep_b, crossing_lambda, min_gap, min_gap_lambda, lowest_irrep_b, lowest_irrep_a
Pair n numbers the ten irrep pairs Ag-T1g, Ag-T2g, Ag-Gg, Ag-Hg, T1g-T2g, T1g-Gg, T1g-Hg, T2g-Gg, T2g-Hg, Gg-Hg;
a same-irrep control such as Hg-Hg gets n = 0. lambda = 1 is the first model of the pair.")]
    Flow(FlowArgs),
    /// Orbit lattice of a seed pose, kernel couplings and a driven-response sweep.
    #[command(after_help = "Files in --out-dir:
  architecture.json  per site: index, position, orientation (9 floats, row-major)
  sweep.csv          omega, q_0..q_59 (|Q| per site; empty at a resonance)
  sweep.svg          |Q| at the driven site and the site maximum against omega
Stiffness is the kernel-weighted graph Laplacian V = (sum_g w_g) I - sum_g w_g U_g over g != e, with T = I.")]
    Molecule(MoleculeArgs),
}

#[derive(Debug, Args, Serialize)]
struct GroupArgs {
    /// Point group (only `ip`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    /// Output file (default stdout).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct GraphArgs {
    /// Point group (only `ip`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    /// `dot` or `json`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    /// Output file (default stdout).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    /// `adjacency` (Δ), `c60` (hopping C5 + C5⁻¹ + C2), `squared:<irrep>` or `random`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    /// Seed of the `random` model.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Word-distance support of the `random` model.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    support_range: Option<usize>,
    /// Eigenvalues closer than this form one cluster.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    cluster_tol: Option<f64>,
    /// Output CSV (default stdout).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct FundamentalArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    irrep: Option<String>,
    /// `squared` or `truncate`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    /// `angular` or `word` (truncation only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<String>,
    /// Cutoff ramp width (truncation only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    /// `plus` or `minus` (truncation only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sign: Option<String>,
    /// Truncation grid size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// Output CSV (default stdout).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct TruncateArgs {
    /// Irrep label or `all`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    irrep: Option<String>,
    /// `angular` or `word`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    /// `plus` or `minus`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sign: Option<String>,
    /// Number of t samples (default 400 over the metric's range).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// Tracked gaps below this count as closed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    cluster_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct FlowArgs {
    /// `all` or a comma list like `Ag-Hg,Hg-Hg`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<String>,
    /// `K` (random algebra element), `disorder` (diagonal) or `none`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    perturb: Option<String>,
    /// Strength of the K perturbation.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    /// Disorder entries are uniform on [-width/2, width/2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Lambda grid size on [0, 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// A refined interior gap minimum below this counts as a crossing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    refine_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    cluster_tol: Option<f64>,
    /// Eigenvalue curves drawn per plot.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    plot_levels: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct MoleculeArgs {
    /// Seed pose `x,y,z,ax,ay,az,angle` (position, rotation axis, angle).
    #[arg(long, alias = "pose", allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<String>,
    /// `exp:r0=X`, `gauss:sigma=X` or `step:cutoff=X`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kernel: Option<String>,
    /// `start:end:count` in omega.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<String>,
    /// Site driven by a unit force.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    force_site: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_point_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resonance_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Usage,
    Numeric,
    Io,
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Usage, message: msg.into() }
    }

    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError { kind: ErrorKind::Io, message: e.to_string() }
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Usage => 2,
            ErrorKind::Numeric | ErrorKind::Io => 1,
        }
    }
}

impl From<cayley_spectra::Error> for CliError {
    fn from(e: cayley_spectra::Error) -> Self {
        use cayley_spectra::Error as E;
        let kind = match e {
            E::InvalidParameter(_) | E::UnknownIrrep(_) | E::InvalidAxis => ErrorKind::Usage,
            _ => ErrorKind::Numeric,
        };
        CliError { kind, message: e.to_string() }
    }
}

fn report(err: &CliError) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": err }));
    ExitCode::from(err.exit_code())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref().map(config::ConfigFile::load).transpose()?;
    let exec = commands::execution(cli.threads)?;
    let f = file.as_ref();
    match &cli.command {
        Command::Group(a) => commands::group(config::resolve("group", f, a, false)?),
        Command::Graph(a) => commands::graph(config::resolve("graph", f, a, false)?),
        Command::Spectrum(a) => commands::spectrum(config::resolve("spectrum", f, a, true)?),
        Command::Irreps(a) => commands::irreps(config::resolve("irreps", f, a, true)?),
        Command::Pairings(a) => commands::pairings(config::resolve("pairings", f, a, true)?),
        Command::Fundamental(a) => commands::fundamental(config::resolve("fundamental", f, a, false)?, exec),
        Command::Truncate(a) => commands::truncate(config::resolve("truncate", f, a, false)?, exec),
        Command::Flow(a) => commands::flow(config::resolve("flow", f, a, true)?, exec),
        Command::Molecule(a) => commands::molecule(config::resolve("molecule", f, a, false)?, exec),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
            return report(&CliError::usage(first));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
