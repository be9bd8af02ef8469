//! Spectral flows between fundamental models: seeded symmetric
//! perturbations, onsite disorder, unit-gap rescaling and detection of the
//! first closing of the lowest gap along a linear interpolation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::models::{uniform_grid, FundamentalModel};
use crate::par::Execution;
use crate::rotation::FiniteGroup;
use crate::spectra::{self, CharacterTable};

/// The ten unordered pairs of the five irreps, labeled 1..10 in this order.
pub const PAIR_ORDER: [(usize, usize); 10] = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Stable per-label seed: FNV-1a of the label folded into `base`, then
/// finalized with splitmix64.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = base ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `K = Σ ½(α_γ + conj α_{γ⁻¹}) γ` over the whole group, `α_γ` uniform on
/// the unit disk.
pub fn random_perturbation_k(group: &Arc<FiniteGroup>, seed: u64) -> AlgebraElement {
    let all: Vec<usize> = (0..group.order()).collect();
    spectra::symmetrized_random(group, &all, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Diagonal matrix with i.i.d. entries uniform on `[−width/2, width/2]`.
pub fn diagonal_disorder(dim: usize, width: f64, seed: u64) -> Result<CMatrix> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::InvalidParameter(format!("disorder width must be positive, got {width}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..dim).map(|_| width * (rng.random::<f64>() - 0.5)).collect();
    Ok(linalg::diagonal(&entries))
}

/// `(op − λ_min)/g` with `g` the gap between the two lowest clusters.
pub fn rescale_unit_gap(op: &CMatrix, cluster_tol: f64) -> Result<CMatrix> {
    let defect = linalg::hermitian_defect(op);
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let lv = spectra::levels(&linalg::eigvalsh(op), cluster_tol);
    if lv.len() < 2 {
        return Err(Error::NoGap);
    }
    let (low, gap) = (lv[0].0, lv[1].0 - lv[0].0);
    let n = op.nrows();
    Ok((op - CMatrix::identity(n, n) * c(low)) / c(gap))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    #[default]
    AlgebraK,
    DiagonalDisorder,
    None,
}

impl std::str::FromStr for Perturbation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "K" | "k" | "algebra_k" => Ok(Perturbation::AlgebraK),
            "disorder" | "diagonal_disorder" => Ok(Perturbation::DiagonalDisorder),
            "none" => Ok(Perturbation::None),
            other => Err(Error::InvalidParameter(format!("unknown perturbation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowConfig {
    pub perturbation: Perturbation,
    pub s: f64,
    pub disorder_width: f64,
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    /// A refined interior minimum below this counts as a crossing.
    pub crossing_threshold: f64,
    pub refine_tol: f64,
    pub cluster_tol: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            perturbation: Perturbation::AlgebraK,
            s: 0.1,
            disorder_width: 1.0,
            lambda_grid: uniform_grid(0.0, 1.0, 401),
            seed: 7,
            crossing_threshold: 1e-3,
            refine_tol: 1e-6,
            cluster_tol: spectra::DEFAULT_CLUSTER_TOL,
            execution: Execution::default(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.lambda_grid;
        if g.len() < 3 || g[0] != 0.0 || *g.last().expect("non-empty") != 1.0 {
            return Err(Error::InvalidParameter("lambda grid needs at least 3 points from exactly 0 to exactly 1".into()));
        }
        if g.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("lambda grid must be strictly ascending".into()));
        }
        if !(self.s >= 0.0) || !(self.disorder_width >= 0.0) {
            return Err(Error::InvalidParameter("s and disorder_width must be non-negative".into()));
        }
        if self.perturbation == Perturbation::DiagonalDisorder && self.disorder_width == 0.0 {
            return Err(Error::InvalidParameter("disorder flow needs a positive width".into()));
        }
        Ok(())
    }
}

/// Perturbed and rescaled endpoint matrix of one model. The perturbation
/// seed is derived from the base seed and the model's irrep label.
pub fn endpoint(model: &FundamentalModel, config: &FlowConfig) -> Result<CMatrix> {
    let group = model.element.group();
    let seed = derive_seed(config.seed, &model.irrep_label);
    let perturbed = match config.perturbation {
        Perturbation::AlgebraK => {
            let k = random_perturbation_k(group, seed);
            let k = if model.element.block_dim() == 1 { k } else { lift(&k, model.element.block_dim()) };
            model.element.add(&k.scale(c(config.s)))?.left_regular().into_matrix()
        }
        Perturbation::DiagonalDisorder => {
            let op = model.element.left_regular().into_matrix();
            let d = diagonal_disorder(op.nrows(), config.disorder_width, seed)?;
            op + d
        }
        Perturbation::None => model.element.left_regular().into_matrix(),
    };
    rescale_unit_gap(&perturbed, config.cluster_tol)
}

/// `k ⊗ I_D`.
fn lift(k: &AlgebraElement, d: usize) -> AlgebraElement {
    let mut out = AlgebraElement::zero(k.group().clone(), d);
    for (g, b) in k.blocks() {
        out.add_block_at(g, &(CMatrix::identity(d, d) * b[(0, 0)]));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalMinimum {
    pub lambda: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowResult {
    /// 1..10 in [`PAIR_ORDER`], 0 for a pair outside the suite.
    pub pair_label: usize,
    pub irrep_a: String,
    pub irrep_b: String,
    pub lambda_grid: Vec<f64>,
    /// Ascending eigenvalues of `λA + (1−λ)B` per grid point.
    pub curves: Vec<Vec<f64>>,
    /// Gap between the two lowest levels per grid point.
    pub gaps: Vec<f64>,
    pub crossing_lambda: Option<f64>,
    pub min_gap: f64,
    pub min_gap_lambda: f64,
    /// Refined interior local minima of the gap, ascending in λ.
    pub local_minima: Vec<LocalMinimum>,
    /// Irrep carried by the lowest level of the B (λ = 0) and A (λ = 1)
    /// endpoints, when it is a single irrep.
    pub endpoint_irreps: [Option<String>; 2],
    /// Neighboring grid samples away from any closing whose gap changes by
    /// more than 50%.
    pub resolution_warnings: usize,
}

fn lowest_gap(m: &CMatrix, tol: f64) -> f64 {
    let lv = spectra::levels(&linalg::eigvalsh(m), tol);
    if lv.len() < 2 {
        0.0
    } else {
        lv[1].0 - lv[0].0
    }
}

fn interpolate(a: &CMatrix, b: &CMatrix, lambda: f64) -> CMatrix {
    a * c(lambda) + b * c(1.0 - lambda)
}

/// Golden-section minimization of `f` on `[lo, hi]`; returns every
/// evaluation along with the final bracket midpoint.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Vec<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut evals = Vec::new();
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    evals.push((x1, f1));
    evals.push((x2, f2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
            evals.push((x1, f1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
            evals.push((x2, f2));
        }
    }
    let mid = 0.5 * (lo + hi);
    evals.push((mid, f(mid)));
    evals
}

/// Irrep label of the lowest cluster of a `Γ`-invariant operator.
fn lowest_irrep(m: &CMatrix, group: &FiniteGroup, table: &CharacterTable, tol: f64) -> Option<String> {
    let sd = spectra::hermitian_eig(m, tol).ok()?;
    let p = sd.projector(0).ok()?;
    let chi = table.to_table_order(group, &spectra::level_character(&p, group).ok()?).ok()?;
    table.identify(&chi, 1e-6).map(|k| table.irreps[k].label.clone())
}

/// Interpolate between the endpoints `a` (at λ = 1) and `b` (at λ = 0) of
/// two models and locate the first closing of the lowest gap.
pub fn run_flow_matrices(
    a: &CMatrix,
    b: &CMatrix,
    labels: (&str, &str),
    pair_label: usize,
    config: &FlowConfig,
    group: &FiniteGroup,
    table: &CharacterTable,
) -> Result<FlowResult> {
    config.validate()?;
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { rows: a.nrows(), cols: a.ncols(), expected: b.nrows() });
    }
    let grid = &config.lambda_grid;
    let tol = config.cluster_tol;
    let curves: Vec<Vec<f64>> = config.execution.map_slice(grid, |&l| linalg::eigvalsh(&interpolate(a, b, l)));
    let gaps: Vec<f64> = curves
        .iter()
        .map(|ev| {
            let lv = spectra::levels(ev, tol);
            if lv.len() < 2 {
                0.0
            } else {
                lv[1].0 - lv[0].0
            }
        })
        .collect();

    let mut min_gap = f64::INFINITY;
    let mut min_gap_lambda = 0.0;
    for (&l, &g) in grid.iter().zip(&gaps) {
        if g < min_gap {
            min_gap = g;
            min_gap_lambda = l;
        }
    }

    let n = grid.len();
    // strict descent on the left, beyond rounding noise, so that a flat
    // stretch is not a minimum at every point
    let descends = |i: usize| gaps[i] < gaps[i - 1] - 1e-9 * gaps[i - 1].abs().max(1.0);
    let interior: Vec<usize> = (1..n - 1).filter(|&i| descends(i) && gaps[i] <= gaps[i + 1]).collect();
    let refined = config.execution.map_slice(&interior, |&i| {
        golden_section(|l| lowest_gap(&interpolate(a, b, l), tol), grid[i - 1], grid[i + 1], config.refine_tol)
    });
    let mut local_minima = Vec::new();
    for evals in refined {
        let mut best = (0.0, f64::INFINITY);
        for &(l, g) in &evals {
            if g < best.1 {
                best = (l, g);
            }
        }
        if best.1 < min_gap {
            min_gap = best.1;
            min_gap_lambda = best.0;
        }
        local_minima.push(LocalMinimum { lambda: best.0, gap: best.1 });
    }
    let crossing_lambda =
        local_minima.iter().find(|m| m.gap < config.crossing_threshold && m.lambda > 0.0 && m.lambda < 1.0).map(|m| m.lambda);

    let floor = 10.0 * config.crossing_threshold;
    let resolution_warnings =
        gaps.windows(2).filter(|w| w[0].min(w[1]) > floor && (w[0] - w[1]).abs() > 0.5 * w[0].max(w[1])).count();

    let endpoint_irreps = if config.perturbation == Perturbation::DiagonalDisorder || a.nrows() != group.order() {
        [None, None]
    } else {
        [lowest_irrep(b, group, table, tol), lowest_irrep(a, group, table, tol)]
    };

    Ok(FlowResult {
        pair_label,
        irrep_a: labels.0.to_string(),
        irrep_b: labels.1.to_string(),
        lambda_grid: grid.clone(),
        curves,
        gaps,
        crossing_lambda,
        min_gap,
        min_gap_lambda,
        local_minima,
        endpoint_irreps,
        resolution_warnings,
    })
}

/// One experiment: `λ (h_a + pert_a) + (1 − λ)(h_b + pert_b)`, both
/// endpoints rescaled to unit gap after perturbing.
pub fn run_flow(
    model_a: &FundamentalModel,
    model_b: &FundamentalModel,
    pair_label: usize,
    config: &FlowConfig,
    table: &CharacterTable,
) -> Result<FlowResult> {
    let a = endpoint(model_a, config)?;
    let b = endpoint(model_b, config)?;
    run_flow_matrices(&a, &b, (&model_a.irrep_label, &model_b.irrep_label), pair_label, config, model_a.element.group(), table)
}

/// All ten pairs of five models, in [`PAIR_ORDER`].
pub fn all_pairs_suite(models: &[FundamentalModel], config: &FlowConfig, table: &CharacterTable) -> Result<Vec<FlowResult>> {
    if models.len() != 5 {
        return Err(Error::InvalidParameter(format!("expected five models, got {}", models.len())));
    }
    let mut labels: Vec<&str> = models.iter().map(|m| m.irrep_label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != 5 {
        return Err(Error::InvalidParameter("models must carry five distinct irreps".into()));
    }
    let endpoints: Vec<CMatrix> = models.iter().map(|m| endpoint(m, config)).collect::<Result<_>>()?;
    let group = models[0].element.group();
    PAIR_ORDER
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let labels = (models[i].irrep_label.as_str(), models[j].irrep_label.as_str());
            run_flow_matrices(&endpoints[i], &endpoints[j], labels, k + 1, config, group, table)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::squared_shift_models;
    use crate::spectra::icosahedral_character_table;

    fn models() -> Vec<FundamentalModel> {
        let group = Arc::new(FiniteGroup::icosahedral().unwrap());
        let gens = group.find_standard_generators().unwrap();
        squared_shift_models(&group, gens).unwrap()
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, "Ag"), derive_seed(7, "Ag"));
        assert_ne!(derive_seed(7, "Ag"), derive_seed(7, "Hg"));
        assert_ne!(derive_seed(7, "Ag"), derive_seed(8, "Ag"));
    }

    #[test]
    fn perturbation_k_is_self_adjoint() {
        let group = Arc::new(FiniteGroup::icosahedral().unwrap());
        let k = random_perturbation_k(&group, 11);
        assert!(k.is_self_adjoint(0.0));
        assert_eq!(k.support().len(), 60);
        for g in 0..60 {
            assert!(k.scalar_at(g).norm() <= 1.0);
            assert_eq!(k.scalar_at(g), k.scalar_at(group.inv(g)).conj());
        }
        assert!(k.approx_eq(&random_perturbation_k(&group, 11), 0.0));
    }

    #[test]
    fn rescale_examples() {
        let m = linalg::diagonal(&[0.0, 2.0, 5.0]);
        let r = rescale_unit_gap(&m, 1e-6).unwrap();
        let ev = linalg::eigvalsh(&r);
        assert_eq!(ev, vec![0.0, 1.0, 2.5]);
        let unit = linalg::diagonal(&[0.0, 1.0, 3.0]);
        assert_eq!(rescale_unit_gap(&unit, 1e-6).unwrap(), unit);
        assert_eq!(rescale_unit_gap(&CMatrix::identity(3, 3), 1e-6), Err(Error::NoGap));
    }

    #[test]
    fn disorder_entries() {
        let d = diagonal_disorder(60, 1.0, 3).unwrap();
        assert!((0..60).all(|i| d[(i, i)].re.abs() <= 0.5 && d[(i, i)].im == 0.0));
        assert!(diagonal_disorder(60, 0.0, 3).is_err());
    }

    #[test]
    fn perturbed_endpoint_has_unit_gap() {
        let ms = models();
        let cfg = FlowConfig::default();
        let e = endpoint(&ms[0], &cfg).unwrap();
        let lv = spectra::levels(&linalg::eigvalsh(&e), 1e-6);
        assert!(lv[0].0.abs() < 1e-10);
        assert!((lv[1].0 - lv[0].0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pair_crossing_and_control() {
        let ms = models();
        let t = icosahedral_character_table();
        let cfg = FlowConfig::default();
        let r = run_flow(&ms[0], &ms[4], 4, &cfg, &t).unwrap();
        let l = r.crossing_lambda.expect("A-H crossing");
        assert!(l > 0.0 && l < 1.0);
        assert!(r.min_gap < 1e-3);

        let control = run_flow(&ms[2], &ms[2], 0, &cfg, &t).unwrap();
        assert!(control.crossing_lambda.is_none());
        assert!(control.gaps.iter().all(|g| (g - 1.0).abs() < 1e-9));
    }

    #[test]
    fn grid_validation() {
        let mut cfg = FlowConfig { lambda_grid: vec![0.0, 0.5, 0.9], ..FlowConfig::default() };
        assert!(cfg.validate().is_err());
        cfg.lambda_grid = vec![0.0, 0.6, 0.5, 1.0];
        assert!(cfg.validate().is_err());
    }
}
