//! One function per subcommand. Each resolves its inputs, runs the library
//! and writes its outputs with metadata.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use cayley_spectra::cayley::{c60_element, GraphJson};
use cayley_spectra::flows::{all_pairs_suite, run_flow, FlowConfig, FlowResult, Perturbation, PAIR_ORDER};
use cayley_spectra::linalg::{c, CMatrix, CVector};
use cayley_spectra::models::{
    default_t_grid, irrep_level, irrep_projection, squared_shift_model, squared_shift_models, truncation_model, uniform_grid,
    CutoffFunction, Method, Sign, TruncationConfig,
};
use cayley_spectra::molecule::{
    assemble_dynamical_matrix, coupling_from_kernel, frequency_sweep, orbit_lattice, Kernel, Pose, ResponseSolver,
};
use cayley_spectra::spectra::{
    classify_clusters, hermitian_eig, irrep_multiplicities, pairing_values, projector_to_algebra, random_selfadjoint,
    spectral_projector, ClusterReport, SpectralData,
};
use cayley_spectra::{
    adjacency_element, icosahedral_character_table, CayleyGraph, CharacterTable, Execution, FiniteGroup, MetricChoice, Rotation,
    StandardGenerators,
};

use crate::config::{FlowCliConfig, FundamentalConfig, GraphConfig, GroupConfig, ModelConfig, MoleculeConfig, TruncateConfig};
use crate::output::{self, fmt, fmt_opt, Metadata};
use crate::plot::Plot;
use crate::CliError;

struct Setup {
    group: Arc<FiniteGroup>,
    gens: StandardGenerators,
    graph: CayleyGraph,
    table: CharacterTable,
}

fn setup() -> Result<Setup, CliError> {
    let group = Arc::new(FiniteGroup::icosahedral()?);
    let gens = group.find_standard_generators()?;
    let graph = CayleyGraph::standard(&group, gens)?;
    Ok(Setup { group, gens, graph, table: icosahedral_character_table() })
}

fn check_group(name: &str) -> Result<(), CliError> {
    if name == "ip" {
        Ok(())
    } else {
        Err(CliError::usage(format!("unknown group {name:?}; only \"ip\" is supported")))
    }
}

fn parse<T: FromStr<Err = cayley_spectra::Error>>(s: &str) -> Result<T, CliError> {
    s.parse().map_err(|e: cayley_spectra::Error| CliError::usage(e.to_string()))
}

fn meta<C: Serialize>(command: &'static str, seed: Option<u64>, cfg: &C) -> Result<Metadata, CliError> {
    Ok(Metadata { command, seed, config: serde_json::to_value(cfg).map_err(CliError::io)? })
}

fn canonical_label(table: &CharacterTable, label: &str) -> Result<String, CliError> {
    Ok(table.irreps[table.irrep_index(label)?].label.clone())
}

pub fn execution(threads: Option<usize>) -> Result<Execution, CliError> {
    match threads {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(CliError::io)?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None if cfg!(feature = "parallel") => Ok(Execution::Parallel),
        None => Ok(Execution::Sequential),
    }
}

pub fn group(cfg: GroupConfig) -> Result<(), CliError> {
    check_group(&cfg.group)?;
    let s = setup()?;
    let text = output::json_text(&meta("group", None, &cfg)?, "group", &s.group.to_json())?;
    output::emit(cfg.out.as_deref().map(Path::new), &text)
}

pub fn graph(cfg: GraphConfig) -> Result<(), CliError> {
    check_group(&cfg.group)?;
    let s = setup()?;
    let m = meta("graph", None, &cfg)?;
    let text = match cfg.format.as_str() {
        "dot" => s.graph.to_dot(Some(&m.lines().join("\n"))),
        "json" => output::json_text(&m, "graph", &GraphJson::new(&s.group, &s.graph)?)?,
        other => return Err(CliError::usage(format!("unknown graph format {other:?}; expected dot or json"))),
    };
    output::emit(cfg.out.as_deref().map(Path::new), &text)
}

fn model_matrix(cfg: &ModelConfig, s: &Setup) -> Result<CMatrix, CliError> {
    let m = match cfg.model.as_str() {
        "adjacency" => -adjacency_element(&s.group, s.gens)?.left_regular().into_matrix(),
        "c60" => c60_element(&s.group, s.gens)?.left_regular().into_matrix(),
        "random" => random_selfadjoint(&s.group, &s.graph, cfg.support_range, cfg.seed)?.left_regular().into_matrix(),
        other => match other.strip_prefix("squared:") {
            Some(label) => {
                let label = canonical_label(&s.table, label)?;
                let lambda = irrep_level(&label, &s.table)?;
                squared_shift_model(&s.group, s.gens, &label, lambda)?.operator().into_matrix()
            }
            None => {
                return Err(CliError::usage(format!(
                    "unknown model {other:?}; expected adjacency, c60, squared:<irrep> or random"
                )))
            }
        },
    };
    Ok(m)
}

fn model_spectrum(cfg: &ModelConfig) -> Result<(Setup, SpectralData), CliError> {
    let s = setup()?;
    let sd = hermitian_eig(&model_matrix(cfg, &s)?, cfg.cluster_tol)?;
    Ok((s, sd))
}

fn cluster_prefix(r: &ClusterReport) -> Vec<String> {
    vec![r.index.to_string(), fmt(r.value), r.multiplicity.to_string()]
}

fn write_model_csv(
    command: &'static str,
    cfg: &ModelConfig,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
) -> Result<(), CliError> {
    let text = output::csv_text(&meta(command, Some(cfg.seed), cfg)?, &header, &rows)?;
    output::emit(cfg.out.as_deref().map(Path::new), &text)
}

fn base_header() -> Vec<String> {
    ["cluster_index", "eigenvalue", "multiplicity"].map(String::from).to_vec()
}

pub fn spectrum(cfg: ModelConfig) -> Result<(), CliError> {
    let (s, sd) = model_spectrum(&cfg)?;
    let mut header = base_header();
    header.push("irrep_label".into());
    header.extend(s.table.labels().iter().map(|l| format!("n_{l}")));
    let rows = classify_clusters(&sd, &s.group, &s.table)?
        .iter()
        .map(|r| {
            let mut row = cluster_prefix(r);
            row.push(r.irrep.clone().unwrap_or_default());
            row.extend(r.pairings.iter().map(i64::to_string));
            row
        })
        .collect();
    write_model_csv("spectrum", &cfg, header, rows)
}

pub fn irreps(cfg: ModelConfig) -> Result<(), CliError> {
    let (s, sd) = model_spectrum(&cfg)?;
    let mut header = base_header();
    header.push("irrep_label".into());
    header.extend(s.table.classes.iter().map(|k| format!("chi_{}", k.label)));
    let rows = classify_clusters(&sd, &s.group, &s.table)?
        .iter()
        .map(|r| {
            let mut row = cluster_prefix(r);
            row.push(r.irrep.clone().unwrap_or_default());
            // rounding hides last-digit noise in exact table entries
            row.extend(r.character.iter().map(|&x| fmt((x * 1e12).round() / 1e12 + 0.0)));
            row
        })
        .collect();
    write_model_csv("irreps", &cfg, header, rows)
}

pub fn pairings(cfg: ModelConfig) -> Result<(), CliError> {
    let (s, sd) = model_spectrum(&cfg)?;
    let labels = s.table.labels();
    let mut header = base_header();
    header.extend(labels.iter().map(|l| format!("n_{l}")));
    header.extend(labels.iter().map(|l| format!("raw_{l}")));
    header.push("max_rounding_error".into());
    let mut rows = Vec::new();
    for (k, cl) in sd.clusters.iter().enumerate() {
        let p = projector_to_algebra(&spectral_projector(&sd, k)?, &s.group)?;
        let raw: Vec<f64> = pairing_values(&p, &s.table)?.iter().map(|z| z.re).collect();
        let n = irrep_multiplicities(&p, &s.table)?;
        let err = raw.iter().zip(&n).map(|(r, &n)| (r - n as f64).abs()).fold(0.0, f64::max);
        let mut row = vec![k.to_string(), fmt(cl.value), cl.multiplicity.to_string()];
        row.extend(n.iter().map(i64::to_string));
        row.extend(raw.iter().map(|&x| fmt(x)));
        row.push(fmt(err));
        rows.push(row);
    }
    write_model_csv("pairings", &cfg, header, rows)
}

fn t_grid(metric: MetricChoice, graph: &CayleyGraph, samples: Option<usize>) -> Result<Option<Vec<f64>>, CliError> {
    match samples {
        None => Ok(None),
        Some(n) if n < 2 => Err(CliError::usage("samples must be at least 2")),
        Some(n) => {
            let d = default_t_grid(metric, graph)?;
            Ok(Some(uniform_grid(d[0], d[d.len() - 1], n)))
        }
    }
}

fn truncation_config(
    metric: &str,
    epsilon: f64,
    sign: &str,
    samples: Option<usize>,
    graph: &CayleyGraph,
    exec: Execution,
) -> Result<TruncationConfig, CliError> {
    let metric: MetricChoice = parse(metric)?;
    Ok(TruncationConfig {
        metric,
        cutoff: CutoffFunction::new(epsilon).map_err(|e| CliError::usage(e.to_string()))?,
        sign: parse::<Sign>(sign)?,
        t_grid: t_grid(metric, graph, samples)?,
        execution: exec,
        ..TruncationConfig::default()
    })
}

pub fn fundamental(cfg: FundamentalConfig, exec: Execution) -> Result<(), CliError> {
    let s = setup()?;
    let label = canonical_label(&s.table, &cfg.irrep)?;
    let model = match parse::<Method>(&cfg.method)? {
        Method::SquaredShift => squared_shift_model(&s.group, s.gens, &label, irrep_level(&label, &s.table)?)?,
        Method::Truncation => {
            let tc = truncation_config(&cfg.metric, cfg.epsilon, &cfg.sign, cfg.samples, &s.graph, exec)?;
            let p = irrep_projection(&s.group, s.gens, &s.table, &label)?;
            truncation_model(&label, &p, &s.graph, &s.table, &tc)?.model
        }
    };
    let word = s.graph.bfs(s.group.identity());
    let rows: Vec<Vec<String>> = model
        .element
        .support()
        .into_iter()
        .map(|g| {
            let z = model.element.scalar_at(g);
            vec![
                g.to_string(),
                fmt(s.group.element(g).angle()),
                word[g].map_or(String::new(), |d| d.to_string()),
                fmt(z.re),
                fmt(z.im),
                fmt(z.norm()),
            ]
        })
        .collect();
    let header = ["element", "angle", "word_distance", "re", "im", "abs"].map(String::from);
    eprintln!("{label} {}: parameter {}, support {}", cfg.method, fmt(model.parameter), rows.len());
    let text = output::csv_text(&meta("fundamental", None, &cfg)?, &header, &rows)?;
    output::emit(cfg.out.as_deref().map(Path::new), &text)
}

fn eig_header(first: &[&str], n: usize) -> Vec<String> {
    first.iter().map(|s| s.to_string()).chain((1..=n).map(|k| format!("eig_{k}"))).collect()
}

fn curves_plot(title: String, x_label: &str, xs: &[f64], levels: &[Vec<f64>], count: usize, m: &Metadata) -> Plot {
    let count = count.min(levels.first().map_or(0, Vec::len));
    Plot {
        title,
        x_label: x_label.into(),
        y_label: "eigenvalue".into(),
        series: (0..count).map(|k| xs.iter().zip(levels).map(|(&x, e)| (x, e[k])).collect()).collect(),
        markers: Vec::new(),
        comment: m.lines(),
    }
}

pub fn truncate(cfg: TruncateConfig, exec: Execution) -> Result<(), CliError> {
    let s = setup()?;
    let mut tc = truncation_config(&cfg.metric, cfg.epsilon, &cfg.sign, cfg.samples, &s.graph, exec)?;
    tc.gap_tol = cfg.gap_tol;
    tc.cluster_tol = cfg.cluster_tol;
    let labels: Vec<String> = if cfg.irrep == "all" {
        s.table.labels().iter().map(|l| l.to_string()).collect()
    } else {
        vec![canonical_label(&s.table, &cfg.irrep)?]
    };
    let m = meta("truncate", None, &cfg)?;
    let dir = PathBuf::from(&cfg.out_dir);
    let mut summary = Vec::new();
    for label in &labels {
        let p = irrep_projection(&s.group, s.gens, &s.table, label)?;
        let report = truncation_model(label, &p, &s.graph, &s.table, &tc)?;
        let n = report.samples.first().map_or(0, |x| x.eigenvalues.len());
        let rows: Vec<Vec<String>> = report
            .samples
            .iter()
            .map(|x| {
                [fmt(x.t), fmt(x.tracked_gap), fmt(x.lowest_gap)]
                    .into_iter()
                    .chain(x.eigenvalues.iter().map(|&e| fmt(e)))
                    .collect()
            })
            .collect();
        let csv = output::csv_text(&m, &eig_header(&["t", "tracked_gap", "lowest_gap"], n), &rows)?;
        output::write_text(&dir.join(format!("truncate_{label}.csv")), &csv)?;

        let ts: Vec<f64> = report.samples.iter().map(|x| x.t).collect();
        let eigs: Vec<Vec<f64>> = report.samples.iter().map(|x| x.eigenvalues.clone()).collect();
        let mut plot = curves_plot(format!("Truncation of p_{label} ({} metric)", cfg.metric), "t", &ts, &eigs, n, &m);
        if let Some(t_c) = report.t_c {
            plot.markers.push((t_c, format!("t_c = {t_c:.6}")));
        }
        output::write_text(&dir.join(format!("truncate_{label}.svg")), &plot.render())?;

        eprintln!("{label}: t_c = {}", report.t_c.map_or("none".into(), |t| format!("{t:.6}")));
        summary.push(vec![
            label.clone(),
            fmt_opt(report.t_c),
            fmt_opt(report.model.t_star()),
            report.support_before.to_string(),
            report.support_after.to_string(),
            report.post_closing.as_ref().map_or(String::new(), |e| e.support().len().to_string()),
            report.resolution_warnings.to_string(),
        ]);
    }
    let header = ["irrep", "t_c", "t_star", "support_before", "support_after", "support_post_closing", "resolution_warnings"]
        .map(String::from);
    output::write_text(&dir.join("summary.csv"), &output::csv_text(&m, &header, &summary)?)
}

fn pair_index(table: &CharacterTable, spec: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = spec.split_once('-').ok_or_else(|| CliError::usage(format!("pair {spec:?} must look like Ag-Hg")))?;
    Ok((table.irrep_index(a.trim())?, table.irrep_index(b.trim())?))
}

pub fn flow(cfg: FlowCliConfig, exec: Execution) -> Result<(), CliError> {
    let s = setup()?;
    if cfg.samples < 3 {
        return Err(CliError::usage("samples must be at least 3"));
    }
    let fc = FlowConfig {
        perturbation: parse::<Perturbation>(&cfg.perturb)?,
        s: cfg.s,
        disorder_width: cfg.width,
        lambda_grid: uniform_grid(0.0, 1.0, cfg.samples),
        seed: cfg.seed,
        crossing_threshold: cfg.threshold,
        refine_tol: cfg.refine_tol,
        cluster_tol: cfg.cluster_tol,
        execution: exec,
    };
    fc.validate()?;
    let models = squared_shift_models(&s.group, s.gens)?;
    let position = |k: usize| models.iter().position(|m| m.irrep_label == s.table.irreps[k].label).expect("model per irrep");
    let results: Vec<FlowResult> = if cfg.pairs == "all" {
        all_pairs_suite(&models, &fc, &s.table)?
    } else {
        cfg.pairs
            .split(',')
            .map(|spec| {
                let (i, j) = pair_index(&s.table, spec)?;
                let key = (i.min(j), i.max(j));
                let label = PAIR_ORDER.iter().position(|&p| p == key).map_or(0, |k| k + 1);
                Ok(run_flow(&models[position(i)], &models[position(j)], label, &fc, &s.table)?)
            })
            .collect::<Result<_, CliError>>()?
    };

    let m = meta("flow", Some(cfg.seed), &cfg)?;
    let dir = PathBuf::from(&cfg.out_dir);
    let mut summary = Vec::new();
    for r in &results {
        let stem = format!("flow_{}_{}-{}", r.pair_label, r.irrep_a, r.irrep_b);
        let n = r.curves.first().map_or(0, Vec::len);
        let rows: Vec<Vec<String>> = r
            .lambda_grid
            .iter()
            .zip(&r.curves)
            .map(|(&l, e)| std::iter::once(fmt(l)).chain(e.iter().map(|&x| fmt(x))).collect())
            .collect();
        output::write_text(&dir.join(format!("{stem}.csv")), &output::csv_text(&m, &eig_header(&["lambda"], n), &rows)?)?;

        let title = format!("{}-{} flow ({} perturbation, seed {})", r.irrep_a, r.irrep_b, cfg.perturb, cfg.seed);
        let mut plot = curves_plot(title, "lambda", &r.lambda_grid, &r.curves, cfg.plot_levels, &m);
        match r.crossing_lambda {
            Some(l) => plot.markers.push((l, format!("crossing at {l:.4}"))),
            None => plot.markers.push((r.min_gap_lambda, format!("min gap {:.2e}", r.min_gap))),
        }
        output::write_text(&dir.join(format!("{stem}.svg")), &plot.render())?;

        eprintln!(
            "{:>2} {}-{}: {}",
            r.pair_label,
            r.irrep_a,
            r.irrep_b,
            r.crossing_lambda
                .map_or(format!("no crossing (min gap {:.3e})", r.min_gap), |l| format!("crossing at lambda = {l:.6}"))
        );
        summary.push(vec![
            r.pair_label.to_string(),
            r.irrep_a.clone(),
            r.irrep_b.clone(),
            fmt_opt(r.crossing_lambda),
            fmt(r.min_gap),
            fmt(r.min_gap_lambda),
            r.endpoint_irreps[0].clone().unwrap_or_default(),
            r.endpoint_irreps[1].clone().unwrap_or_default(),
        ]);
    }
    let header =
        ["pair_label", "irrep_a", "irrep_b", "crossing_lambda", "min_gap", "min_gap_lambda", "lowest_irrep_b", "lowest_irrep_a"]
            .map(String::from);
    output::write_text(&dir.join("summary.csv"), &output::csv_text(&m, &header, &summary)?)
}

fn parse_pose(s: &str) -> Result<Pose, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::usage(format!("seed pose {s:?} must be seven numbers x,y,z,ax,ay,az,angle")))?;
    if v.len() != 7 || v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::usage(format!("seed pose {s:?} must be seven finite numbers x,y,z,ax,ay,az,angle")));
    }
    let axis = [v[3], v[4], v[5]].into();
    let orientation = Rotation::from_axis_angle(axis, v[6]).map_err(|e| CliError::usage(e.to_string()))?;
    Ok(Pose::new([v[0], v[1], v[2]].into(), orientation))
}

fn parse_sweep(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("sweep {s:?} must look like start:end:count"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < a || n == 0 {
        return Err(bad());
    }
    Ok(uniform_grid(a, b, n))
}

pub fn molecule(cfg: MoleculeConfig, exec: Execution) -> Result<(), CliError> {
    let s = setup()?;
    let pose = parse_pose(&cfg.seed)?;
    let kernel: Kernel = parse(&cfg.kernel)?;
    let omegas = parse_sweep(&cfg.sweep)?;
    let n = s.group.order();
    if cfg.force_site >= n {
        return Err(CliError::usage(format!("force site {} out of range 0..{n}", cfg.force_site)));
    }

    let lattice = orbit_lattice(&s.group, pose, cfg.fixed_point_tol)?;
    let mut spec = coupling_from_kernel(&lattice, |r| kernel.eval(r), 1);
    spec.w.remove(&s.group.identity());
    let total: f64 = spec.w.values().map(|b| b[(0, 0)].re).sum();
    let w = assemble_dynamical_matrix(&s.group, &spec)?.into_matrix();
    let v = CMatrix::identity(n, n) * c(total) - w;
    let solver = ResponseSolver::new(&CMatrix::identity(n, n), &v, cfg.resonance_tol)?;
    let mut f = CVector::zeros(n);
    f[cfg.force_site] = c(1.0);
    let sweep = frequency_sweep(&solver, &omegas, &f, 1, exec)?;

    let m = meta("molecule", None, &cfg)?;
    let dir = PathBuf::from(&cfg.out_dir);
    let architecture = json!({
        "sites": lattice.to_json(),
        "min_pairwise_distance": lattice.min_pairwise_distance(),
        "stiffness_spectrum": solver.spectrum(),
    });
    output::write_text(&dir.join("architecture.json"), &output::json_text(&m, "architecture", &architecture)?)?;

    let header: Vec<String> = std::iter::once("omega".to_string()).chain((0..n).map(|k| format!("q_{k}"))).collect();
    let rows: Vec<Vec<String>> = sweep
        .iter()
        .map(|p| match &p.amplitudes {
            Some(a) => std::iter::once(fmt(p.omega)).chain(a.iter().map(|&x| fmt(x))).collect(),
            None => std::iter::once(fmt(p.omega)).chain(std::iter::repeat_n(String::new(), n)).collect(),
        })
        .collect();
    output::write_text(&dir.join("sweep.csv"), &output::csv_text(&m, &header, &rows)?)?;

    let log = |p: &cayley_spectra::molecule::SweepPoint, pick: &dyn Fn(&[f64]) -> f64| {
        (p.omega, p.amplitudes.as_deref().map_or(f64::NAN, |a| pick(a).log10()))
    };
    let driven: Vec<(f64, f64)> = sweep.iter().map(|p| log(p, &|a| a[cfg.force_site])).collect();
    let peak: Vec<(f64, f64)> = sweep.iter().map(|p| log(p, &|a| a.iter().cloned().fold(0.0, f64::max))).collect();
    let (lo, hi) = (omegas[0], omegas[omegas.len() - 1]);
    let mut modes: Vec<f64> = solver.spectrum().iter().map(|e| e.max(0.0).sqrt()).filter(|w| (lo..=hi).contains(w)).collect();
    modes.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let plot = Plot {
        title: format!("Driven response at site {} ({})", cfg.force_site, cfg.kernel),
        x_label: "omega".into(),
        y_label: "log10 |Q|".into(),
        series: vec![driven, peak],
        markers: modes.into_iter().map(|w| (w, String::new())).collect(),
        comment: m.lines(),
    };
    output::write_text(&dir.join("sweep.svg"), &plot.render())?;
    eprintln!("{} sites, min pairwise distance {:.6}", lattice.len(), lattice.min_pairwise_distance());
    Ok(())
}
