//! Fundamental models: one short-range self-adjoint element per irrep whose
//! distinguished level carries exactly that irrep. Two constructions are
//! provided, the squared shift of the adjacency element and the metric
//! truncation of the irrep projection.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, RegularOperator};
use crate::cayley::{distances_from_identity, CayleyGraph, MetricChoice};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::par::Execution;
use crate::rotation::{FiniteGroup, StandardGenerators};
use crate::spectra::{self, CharacterTable};

/// Adjacency eigenvalues at which each irrep appears first, in table order.
pub fn irrep_levels() -> Vec<(&'static str, f64)> {
    let r5 = 5f64.sqrt();
    vec![
        ("Ag", -2.0),
        ("T1g", (5.0 - r5) / 4.0),
        ("T2g", (5.0 + r5) / 4.0),
        ("Gg", (1.0 + 21f64.sqrt()) / 4.0),
        ("Hg", (1.0 + 13f64.sqrt()) / 4.0),
    ]
}

pub fn irrep_level(label: &str, table: &CharacterTable) -> Result<f64> {
    let k = table.irrep_index(label)?;
    let name = &table.irreps[k].label;
    irrep_levels().into_iter().find(|(l, _)| l == name).map(|(_, v)| v).ok_or_else(|| Error::UnknownIrrep(label.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SquaredShift,
    Truncation,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" | "squared_shift" => Ok(Method::SquaredShift),
            "truncate" | "truncation" => Ok(Method::Truncation),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FundamentalModel {
    pub irrep_label: String,
    pub element: AlgebraElement,
    pub method: Method,
    /// `λ_χ` for the squared shift, `t*` for the truncation.
    pub parameter: f64,
}

impl FundamentalModel {
    pub fn lambda_chi(&self) -> Option<f64> {
        (self.method == Method::SquaredShift).then_some(self.parameter)
    }

    pub fn t_star(&self) -> Option<f64> {
        (self.method == Method::Truncation).then_some(self.parameter)
    }

    pub fn operator(&self) -> RegularOperator {
        self.element.left_regular()
    }
}

/// `(δ + λe)²` with `δ = ½C5 + ½C5⁻¹ + C2`; its left-regular image is
/// `(Δ − λ)²`.
pub fn squared_shift_element(group: &Arc<FiniteGroup>, gens: StandardGenerators, lambda: f64) -> Result<AlgebraElement> {
    let mut shifted = crate::cayley::adjacency_element(group, gens)?;
    shifted.add_scalar_at(group.identity(), c(lambda));
    Ok(shifted.square())
}

pub fn squared_shift_model(
    group: &Arc<FiniteGroup>,
    gens: StandardGenerators,
    irrep_label: &str,
    lambda: f64,
) -> Result<FundamentalModel> {
    Ok(FundamentalModel {
        irrep_label: irrep_label.to_string(),
        element: squared_shift_element(group, gens, lambda)?,
        method: Method::SquaredShift,
        parameter: lambda,
    })
}

/// The five squared-shift models in table order.
pub fn squared_shift_models(group: &Arc<FiniteGroup>, gens: StandardGenerators) -> Result<Vec<FundamentalModel>> {
    irrep_levels().into_iter().map(|(l, v)| squared_shift_model(group, gens, l, v)).collect()
}

/// Largest word distance from the identity over the support.
pub fn coupling_range(q: &AlgebraElement, graph: &CayleyGraph) -> Result<usize> {
    let group = q.group();
    q.support().into_iter().map(|g| graph.word_distance(group.identity(), g)).try_fold(0, |m, d| d.map(|d| m.max(d)))
}

/// Cosine ramp from 1 at `x ≤ 0` to 0 at `x ≥ ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffFunction {
    epsilon: f64,
}

impl CutoffFunction {
    pub const DEFAULT_EPSILON: f64 = 1e-3;

    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon.is_finite() {
            Ok(CutoffFunction { epsilon })
        } else {
            Err(Error::InvalidParameter(format!("cutoff epsilon must be positive, got {epsilon}")))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else if x >= self.epsilon {
            0.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * x / self.epsilon).cos())
        }
    }
}

impl Default for CutoffFunction {
    fn default() -> Self {
        CutoffFunction { epsilon: Self::DEFAULT_EPSILON }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// `h(t) = Σ η α_γ γ`, spectrum `{0, 1}` before any cut.
    #[default]
    Plus,
    /// `h(t) = −Σ η α_γ γ`, spectrum `{−1, 0}`.
    Minus,
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            other => Err(Error::InvalidParameter(format!("unknown sign {other:?}"))),
        }
    }
}

/// `±Σ η_ε(t − d(e,γ)) α_γ γ`, with `distances[γ] = d(e, γ)`.
pub fn truncation_family(p: &AlgebraElement, t: f64, distances: &[f64], cutoff: CutoffFunction, sign: Sign) -> AlgebraElement {
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    p.map_blocks(|g, b| b * c(s * cutoff.eval(t - distances[g])))
}

/// Default sweep: 400 samples over `[0, π + 0.1]` for the angular metric,
/// `[0, diameter + 1]` for the word metric. The angular range runs past `π`
/// because the half-turn shell sits at distance exactly `π` and is only cut
/// on `(π, π + ε)`.
pub fn default_t_grid(metric: MetricChoice, graph: &CayleyGraph) -> Result<Vec<f64>> {
    let end = match metric {
        MetricChoice::Angular => std::f64::consts::PI + 0.1,
        MetricChoice::Word => graph.diameter()? as f64 + 1.0,
    };
    Ok(uniform_grid(0.0, end, 400))
}

/// `n` evenly spaced points with exact endpoints.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n).map(|i| if i + 1 == n { end } else { start + (end - start) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct TruncationConfig {
    pub metric: MetricChoice,
    pub cutoff: CutoffFunction,
    pub sign: Sign,
    /// `None` selects [`default_t_grid`].
    pub t_grid: Option<Vec<f64>>,
    pub gap_tol: f64,
    pub cluster_tol: f64,
    pub bisection_tol: f64,
    pub execution: Execution,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            metric: MetricChoice::Angular,
            cutoff: CutoffFunction::default(),
            sign: Sign::Plus,
            t_grid: None,
            gap_tol: 1e-6,
            cluster_tol: spectra::DEFAULT_CLUSTER_TOL,
            bisection_tol: 1e-6,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationSample {
    pub t: f64,
    pub eigenvalues: Vec<f64>,
    /// Gap isolating the band that carries the projection's level.
    pub tracked_gap: f64,
    /// Gap between the two lowest distinct levels.
    pub lowest_gap: f64,
    /// Pairings of the tracked band, while it is isolated.
    pub band_pairing: Option<Vec<i64>>,
}

#[derive(Debug, Clone)]
pub struct TruncationReport {
    pub irrep_label: String,
    pub samples: Vec<TruncationSample>,
    /// Refined closing parameter.
    pub t_c: Option<f64>,
    /// Model at the last grid point before the closing (or the grid end).
    pub model: FundamentalModel,
    /// Model just past the refined closing.
    pub post_closing: Option<AlgebraElement>,
    pub support_before: usize,
    pub support_after: usize,
    /// Adjacent samples whose tracked gap changed by more than 10%.
    pub resolution_warnings: usize,
}

/// Size of the tracked band and whether it sits at the top of the spectrum.
fn band_of(p: &AlgebraElement, sign: Sign) -> (usize, bool) {
    let rank = (p.trace_scalar().re * p.group().order() as f64).round() as usize;
    (rank, sign == Sign::Plus)
}

fn tracked_gap(eigenvalues: &[f64], rank: usize, top: bool) -> f64 {
    let n = eigenvalues.len();
    if rank == 0 || rank >= n {
        return f64::INFINITY;
    }
    let split = if top { n - rank } else { rank };
    eigenvalues[split] - eigenvalues[split - 1]
}

fn lowest_gap(eigenvalues: &[f64], tol: f64) -> f64 {
    let lv = spectra::levels(eigenvalues, tol);
    if lv.len() < 2 {
        0.0
    } else {
        lv[1].0 - lv[0].0
    }
}

struct Evaluator<'a> {
    p: &'a AlgebraElement,
    distances: Vec<f64>,
    config: &'a TruncationConfig,
    table: &'a CharacterTable,
    rank: usize,
    top: bool,
}

impl Evaluator<'_> {
    fn element(&self, t: f64) -> AlgebraElement {
        truncation_family(self.p, t, &self.distances, self.config.cutoff, self.config.sign)
    }

    fn gap(&self, t: f64) -> f64 {
        let ev = linalg::eigvalsh(self.element(t).left_regular().matrix());
        tracked_gap(&ev, self.rank, self.top)
    }

    fn sample(&self, t: f64) -> Result<TruncationSample> {
        let op = self.element(t).left_regular().into_matrix();
        let (eigenvalues, vectors) = linalg::eigh(&op);
        let gap = tracked_gap(&eigenvalues, self.rank, self.top);
        let band_pairing = if gap > self.config.gap_tol {
            let n = eigenvalues.len();
            let start = if self.top { n - self.rank } else { 0 };
            let basis = vectors.columns(start, self.rank);
            let projector: CMatrix = basis * basis.adjoint();
            spectra::projector_pairings(&projector, self.p.group(), self.table).ok()
        } else {
            None
        };
        Ok(TruncationSample {
            t,
            lowest_gap: lowest_gap(&eigenvalues, self.config.cluster_tol),
            tracked_gap: gap,
            eigenvalues,
            band_pairing,
        })
    }
}

/// Sweep the truncation family of the projection `p`, locate the first
/// closing of the tracked gap and return the model just before it.
///
/// The tracked band is the level of `π_L(p)` at eigenvalue 1: the top
/// `rank(p)` eigenvalues for [`Sign::Plus`], the bottom ones for
/// [`Sign::Minus`].
pub fn truncation_model(
    irrep_label: &str,
    p: &AlgebraElement,
    graph: &CayleyGraph,
    table: &CharacterTable,
    config: &TruncationConfig,
) -> Result<TruncationReport> {
    let group = p.group();
    let grid = match &config.t_grid {
        Some(g) => g.clone(),
        None => default_t_grid(config.metric, graph)?,
    };
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("t grid must be non-empty and strictly ascending".into()));
    }
    let (rank, top) = band_of(p, config.sign);
    let eval = Evaluator { p, distances: distances_from_identity(group, graph, config.metric)?, config, table, rank, top };

    let samples: Vec<TruncationSample> =
        config.execution.map_slice(&grid, |&t| eval.sample(t)).into_iter().collect::<Result<_>>()?;
    let resolution_warnings = samples
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0].tracked_gap, w[1].tracked_gap);
            a.is_finite() && (a - b).abs() > 0.1 * a.abs().max(b.abs())
        })
        .count();

    let first_closed = samples.iter().position(|s| s.tracked_gap < config.gap_tol);
    let (t_c, model_t, post_closing) = match first_closed {
        Some(0) => (Some(grid[0]), grid[0], Some(eval.element(grid[0]))),
        Some(k) => {
            let (mut lo, mut hi) = (grid[k - 1], grid[k]);
            while hi - lo > config.bisection_tol {
                let mid = 0.5 * (lo + hi);
                if eval.gap(mid) < config.gap_tol {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            (Some(hi), grid[k - 1], Some(eval.element(hi)))
        }
        None => (None, *grid.last().expect("non-empty"), None),
    };
    let element = eval.element(model_t).pruned(0.0);
    Ok(TruncationReport {
        irrep_label: irrep_label.to_string(),
        support_before: p.support().len(),
        support_after: element.support().len(),
        model: FundamentalModel { irrep_label: irrep_label.to_string(), element, method: Method::Truncation, parameter: model_t },
        t_c,
        post_closing,
        samples,
        resolution_warnings,
    })
}

/// Irrep projection `p_χ` in the group algebra, pulled back from the
/// adjacency level where `χ` first appears.
pub fn irrep_projection(
    group: &Arc<FiniteGroup>,
    gens: StandardGenerators,
    table: &CharacterTable,
    label: &str,
) -> Result<AlgebraElement> {
    let lambda = irrep_level(label, table)?;
    let laplacian = -crate::cayley::adjacency_element(group, gens)?.left_regular().into_matrix();
    let sd = spectra::hermitian_eig(&laplacian, spectra::DEFAULT_CLUSTER_TOL)?;
    let k = sd.find_cluster(lambda, 1e-9).ok_or_else(|| Error::TableMismatch(format!("no adjacency level at {lambda}")))?;
    spectra::projector_to_algebra(&sd.projector(k)?, group)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::icosahedral_character_table;

    fn setup() -> (Arc<FiniteGroup>, StandardGenerators, CayleyGraph) {
        let group = Arc::new(FiniteGroup::icosahedral().unwrap());
        let gens = group.find_standard_generators().unwrap();
        let graph = CayleyGraph::standard(&group, gens).unwrap();
        (group, gens, graph)
    }

    #[test]
    fn table_values() {
        let t = icosahedral_character_table();
        assert_eq!(irrep_level("A", &t).unwrap(), -2.0);
        assert_eq!(irrep_level("Gg", &t).unwrap(), (21f64.sqrt() + 1.0) / 4.0);
        assert!(irrep_level("X", &t).is_err());
    }

    #[test]
    fn squared_shift_census() {
        let (group, gens, graph) = setup();
        let a = gens.c5;
        let b = gens.c2;
        let ai = group.inv(a);
        for (_, lambda) in irrep_levels() {
            let h = squared_shift_element(&group, gens, lambda).unwrap();
            let expected = [
                (group.identity(), 1.5 + lambda * lambda),
                (a, lambda),
                (ai, lambda),
                (b, 2.0 * lambda),
                (group.mul(a, a), 0.25),
                (group.mul(ai, ai), 0.25),
                (group.mul(a, b), 0.5),
                (group.mul(ai, b), 0.5),
                (group.mul(b, a), 0.5),
                (group.mul(b, ai), 0.5),
            ];
            // first shell λ(½C5 + ½C5⁻¹ + C2) enters twice in the square
            for (g, v) in expected {
                assert!((h.scalar_at(g) - c(v)).norm() < 1e-12, "coefficient at {g}");
            }
            assert_eq!(h.support().len(), 10);
            assert_eq!(coupling_range(&h, &graph).unwrap(), 2);
        }
        let e = AlgebraElement::identity(group.clone(), 1);
        assert_eq!(coupling_range(&e, &graph).unwrap(), 0);
        assert_eq!(coupling_range(&crate::cayley::adjacency_element(&group, gens).unwrap(), &graph).unwrap(), 1);
        assert!((squared_shift_element(&group, gens, 0.0).unwrap().scalar_at(group.identity()) - c(1.5)).norm() < 1e-15);
    }

    #[test]
    fn squared_shift_kernels() {
        let (group, gens, _) = setup();
        let t = icosahedral_character_table();
        for (label, lambda) in irrep_levels() {
            let m = squared_shift_model(&group, gens, label, lambda).unwrap();
            let sd = spectra::hermitian_eig(m.operator().matrix(), 1e-6).unwrap();
            assert!(sd.eigenvalues[0] > -1e-10);
            let kernel = &sd.clusters[0];
            assert!(kernel.value.abs() < 1e-9);
            let dim = t.irreps[t.irrep_index(label).unwrap()].dim;
            assert_eq!(kernel.multiplicity, dim);
            assert!(sd.clusters[1].value > 1e-3);
        }
    }

    #[test]
    fn cutoff_shape() {
        let eta = CutoffFunction::default();
        assert_eq!(eta.eval(-1.0), 1.0);
        assert_eq!(eta.eval(0.0), 1.0);
        assert_eq!(eta.eval(1e-3), 0.0);
        assert!((eta.eval(5e-4) - 0.5).abs() < 1e-12);
        let xs = uniform_grid(0.0, 1e-3, 101);
        assert!(xs.windows(2).all(|w| eta.eval(w[1]) <= eta.eval(w[0])));
        assert!(CutoffFunction::new(0.0).is_err());
    }

    #[test]
    fn truncation_endpoints() {
        let (group, gens, graph) = setup();
        let t = icosahedral_character_table();
        let p = irrep_projection(&group, gens, &t, "T1g").unwrap();
        let dist = distances_from_identity(&group, &graph, MetricChoice::Angular).unwrap();
        let eta = CutoffFunction::default();

        let untouched = truncation_family(&p, -1.0, &dist, eta, Sign::Plus);
        assert!(untouched.approx_eq(&p, 0.0));
        let ev = linalg::eigvalsh(untouched.left_regular().matrix());
        assert!(ev.iter().all(|&x| x.abs() < 1e-9 || (x - 1.0).abs() < 1e-9));
        let minus = truncation_family(&p, -1.0, &dist, eta, Sign::Minus);
        assert!(minus.approx_eq(&p.scale(c(-1.0)), 0.0));

        let gone = truncation_family(&p, std::f64::consts::PI + 0.01, &dist, eta, Sign::Plus);
        assert!(gone.support().is_empty());
    }

    #[test]
    fn truncation_finds_closing() {
        let (group, gens, graph) = setup();
        let t = icosahedral_character_table();
        let p = irrep_projection(&group, gens, &t, "Ag").unwrap();
        let report = truncation_model("Ag", &p, &graph, &t, &TruncationConfig::default()).unwrap();
        let t_c = report.t_c.expect("closing detected");
        assert!(t_c > 0.0 && t_c.is_finite());
        assert!(report.support_after < report.support_before);
        assert!((report.samples[0].tracked_gap - 1.0).abs() < 1e-6 || report.samples[0].t > 0.0);
        let before_closing: Vec<_> = report.samples.iter().filter(|s| s.t < t_c).collect();
        assert!(before_closing.iter().all(|s| s.band_pairing.as_deref() == Some(&[1, 0, 0, 0, 0][..])));
        assert!(report.post_closing.is_some());
        assert_eq!(report.model.method, Method::Truncation);
    }
}
