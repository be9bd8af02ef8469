//! Hermitian spectral analysis on `ℂ^D ⊗ ℓ²(Γ)`: eigenvalue clusters,
//! spectral projectors, level characters, the pull-back of projectors to
//! the group algebra and the integer pairings `n_χ` with the irreps.

mod chartab;

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use chartab::{icosahedral_character_table, CharacterTable, ClassInfo, Irrep};

use crate::algebra::AlgebraElement;
use crate::cayley::CayleyGraph;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::rotation::FiniteGroup;

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-8;
const INTEGER_TOL: f64 = 1e-6;

/// One eigenvalue cluster with an orthonormal basis of its eigenspace.
#[derive(Debug, Clone)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    /// Offset of the cluster in the ascending eigenvalue list.
    pub start: usize,
    pub basis: CMatrix,
}

/// Separation statistics of a clustering, for spotting gaps close to the
/// cluster tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterDiagnostics {
    pub cluster_tol: f64,
    /// Smallest distance between adjacent clusters.
    pub min_separation: f64,
    /// Largest spread inside one cluster.
    pub max_spread: f64,
    /// Adjacent-cluster separations below `1000 · cluster_tol`.
    pub near_threshold_gaps: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
    pub diagnostics: ClusterDiagnostics,
}

/// Group ascending values into runs whose neighbors differ by at most `tol`.
/// Returns `(start, len)` pairs.
pub fn cluster_runs(sorted: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tol {
            if i > start {
                runs.push((start, i - start));
            }
            start = i;
        }
    }
    runs
}

/// Distinct levels `(mean value, multiplicity)` of an ascending list.
pub fn levels(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    cluster_runs(sorted, tol).into_iter().map(|(s, len)| (sorted[s..s + len].iter().sum::<f64>() / len as f64, len)).collect()
}

fn diagnostics(sorted: &[f64], runs: &[(usize, usize)], tol: f64) -> ClusterDiagnostics {
    let mut min_separation = f64::INFINITY;
    let mut near = 0;
    for w in runs.windows(2) {
        let gap = sorted[w[1].0] - sorted[w[0].0 + w[0].1 - 1];
        min_separation = min_separation.min(gap);
        if gap < 1e3 * tol {
            near += 1;
        }
    }
    let max_spread = runs.iter().map(|&(s, len)| sorted[s + len - 1] - sorted[s]).fold(0.0, f64::max);
    ClusterDiagnostics { cluster_tol: tol, min_separation, max_spread, near_threshold_gaps: near }
}

/// Full eigen-decomposition of a Hermitian matrix, clustered by `cluster_tol`.
pub fn hermitian_eig(m: &CMatrix, cluster_tol: f64) -> Result<SpectralData> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { rows: m.nrows(), cols: m.ncols(), expected: m.nrows() });
    }
    let defect = linalg::hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let (eigenvalues, vectors) = linalg::eigh(m);
    let runs = cluster_runs(&eigenvalues, cluster_tol);
    let clusters = runs
        .iter()
        .map(|&(start, len)| Cluster {
            value: eigenvalues[start..start + len].iter().sum::<f64>() / len as f64,
            multiplicity: len,
            start,
            basis: vectors.columns(start, len).into_owned(),
        })
        .collect();
    let diagnostics = diagnostics(&eigenvalues, &runs, cluster_tol);
    Ok(SpectralData { eigenvalues, clusters, diagnostics })
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Index of the cluster nearest to `value`, if within `tol`.
    pub fn find_cluster(&self, value: f64, tol: f64) -> Option<usize> {
        self.clusters
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.value - value).abs().total_cmp(&(b.1.value - value).abs()))
            .filter(|(_, c)| (c.value - value).abs() <= tol)
            .map(|(k, _)| k)
    }

    pub fn projector(&self, cluster: usize) -> Result<CMatrix> {
        spectral_projector(self, cluster)
    }
}

/// `P = Σ |η_i⟩⟨η_i|` over the basis of one cluster.
pub fn spectral_projector(sd: &SpectralData, cluster: usize) -> Result<CMatrix> {
    let c = sd.clusters.get(cluster).ok_or(Error::ClusterOutOfRange { index: cluster, count: sd.clusters.len() })?;
    Ok(&c.basis * c.basis.adjoint())
}

fn projector_defect(p: &CMatrix) -> f64 {
    linalg::max_abs_diff(&(p * p), p).max(linalg::hermitian_defect(p))
}

fn block_dim_of(p: &CMatrix, group: &FiniteGroup) -> Result<usize> {
    let n = group.order();
    if p.nrows() != p.ncols() || p.nrows() == 0 || !p.nrows().is_multiple_of(n) {
        return Err(Error::DimensionMismatch { rows: p.nrows(), cols: p.ncols(), expected: n });
    }
    Ok(p.nrows() / n)
}

/// `Tr(U_γ P) = Σ_y Σ_a P[(yγ, a), (y, a)]` for every element `γ`.
pub fn translation_traces(p: &CMatrix, group: &FiniteGroup) -> Result<Vec<Complex64>> {
    let d = block_dim_of(p, group)?;
    let n = group.order();
    Ok((0..n)
        .map(|g| {
            let mut t = ZERO;
            for y in 0..n {
                let row = group.mul(y, g);
                for a in 0..d {
                    t += p[(row * d + a, y * d + a)];
                }
            }
            t
        })
        .collect())
}

/// Character of the representation `γ ↦ P U_γ P` on the range of a
/// projector, one value per conjugacy class of `group` (group class order).
pub fn level_character(p: &CMatrix, group: &FiniteGroup) -> Result<Vec<Complex64>> {
    let defect = projector_defect(p);
    if defect > PROJECTOR_TOL {
        return Err(Error::NotAProjection(defect));
    }
    let traces = translation_traces(p, group)?;
    group
        .classes()
        .iter()
        .enumerate()
        .map(|(k, class)| {
            let first = traces[class.representative()];
            let spread = class.members.iter().map(|&m| (traces[m] - first).norm()).fold(0.0, f64::max);
            if spread > PROJECTOR_TOL {
                Err(Error::ClassInconsistent { class: k, spread })
            } else {
                Ok(first)
            }
        })
        .collect()
}

/// Largest `‖U_γ P − P U_γ‖` entry over all `γ`.
///
/// `(U_γ P)[(y,a),(x,b)] = P[(yγ,a),(x,b)]` and
/// `(P U_γ)[(y,a),(x,b)] = P[(y,a),(xγ⁻¹,b)]`.
pub fn commutant_defect(p: &CMatrix, group: &FiniteGroup) -> Result<f64> {
    let d = block_dim_of(p, group)?;
    let n = group.order();
    let dim = n * d;
    let data = p.as_slice();
    let mut worst = 0.0f64;
    let mut rows = vec![0usize; dim];
    let mut cols = vec![0usize; dim];
    for g in 0..n {
        let g_inv = group.inv(g);
        for y in 0..n {
            for a in 0..d {
                rows[y * d + a] = group.mul(y, g) * d + a;
                cols[y * d + a] = group.mul(y, g_inv) * d + a;
            }
        }
        // column-major storage: entry (r, c) sits at c·dim + r
        for col in 0..dim {
            let lhs_col = &data[col * dim..(col + 1) * dim];
            let rhs_col = &data[cols[col] * dim..(cols[col] + 1) * dim];
            for row in 0..dim {
                worst = worst.max((lhs_col[rows[row]] - rhs_col[row]).norm_sqr());
            }
        }
    }
    Ok(worst.sqrt())
}

/// Pull a `Γ`-invariant operator back to the group algebra: the coefficient
/// at `γ` is the block `⟨γ|P|e⟩` (equal to `⟨e|P|γ⟩` for a real symmetric
/// `P`). Blocks at the floating-point noise floor are dropped.
pub fn projector_to_algebra(p: &CMatrix, group: &Arc<FiniteGroup>) -> Result<AlgebraElement> {
    let d = block_dim_of(p, group)?;
    let defect = commutant_defect(p, group)?;
    if defect > PROJECTOR_TOL {
        return Err(Error::NotInAlgebra(defect));
    }
    let e = group.identity();
    let floor = 1e-13 * linalg::max_abs(p).max(1.0);
    let mut q = AlgebraElement::zero(group.clone(), d);
    for g in 0..group.order() {
        let block = p.view((g * d, e * d), (d, d)).into_owned();
        if linalg::max_abs(&block) > floor {
            q.add_block_at(g, &block);
        }
    }
    Ok(q)
}

/// Raw pairings `(1/|Γ|) Σ_γ Tr(U_γ π_L(p)) χ(γ)` before rounding.
///
/// `Tr(U_γ π_L(p)) = Σ_y Tr(p_{yγy⁻¹})` is evaluated from the tables.
pub fn pairing_values(p: &AlgebraElement, table: &CharacterTable) -> Result<Vec<Complex64>> {
    let group = p.group();
    let n = group.order();
    let traces: Vec<Complex64> = (0..n)
        .map(|g| {
            (0..n)
                .map(|y| {
                    let conj = group.mul(group.mul(y, g), group.inv(y));
                    p.block(conj).map_or(ZERO, |b| b.trace())
                })
                .sum()
        })
        .collect();
    (0..table.irreps.len())
        .map(|k| {
            let chi = table.character_on_elements(group, k)?;
            let sum: Complex64 = traces.iter().zip(&chi).map(|(t, x)| t * x).sum();
            Ok(sum / n as f64)
        })
        .collect()
}

/// Integer pairings `n_χ` of a projection `p = p² = p*` with every irrep.
pub fn irrep_multiplicities(p: &AlgebraElement, table: &CharacterTable) -> Result<Vec<i64>> {
    let defect = p.square().distance(p)?.max(p.adjoint().distance(p)?);
    if defect > PROJECTOR_TOL {
        return Err(Error::NotAProjection(defect));
    }
    pairing_values(p, table)?
        .into_iter()
        .zip(&table.irreps)
        .map(|(v, ir)| {
            let r = v.re.round();
            if (v - Complex64::new(r, 0.0)).norm() > INTEGER_TOL {
                Err(Error::NonIntegerPairing { label: ir.label.clone(), value: v.re })
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

/// Pairings of a spectral projector `P = π_L(p)` of a `Γ`-invariant
/// operator, read off `Tr(U_γ P)` directly without pulling `P` back to the
/// algebra. Only integrality is checked.
pub fn projector_pairings(p: &CMatrix, group: &FiniteGroup, table: &CharacterTable) -> Result<Vec<i64>> {
    let traces = translation_traces(p, group)?;
    let n = group.order() as f64;
    (0..table.irreps.len())
        .map(|k| {
            let chi = table.character_on_elements(group, k)?;
            let v: Complex64 = traces.iter().zip(&chi).map(|(t, x)| t * x).sum::<Complex64>() / n;
            let r = v.re.round();
            if (v - Complex64::new(r, 0.0)).norm() > INTEGER_TOL {
                Err(Error::NonIntegerPairing { label: table.irreps[k].label.clone(), value: v.re })
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

/// Uniform sample from the closed unit disk.
pub fn unit_disk_sample<R: Rng>(rng: &mut R) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    Complex64::from_polar(r, theta)
}

/// `Σ ½(α_γ + conj α_{γ⁻¹}) γ` from unit-disk draws `α` on `support`
/// (closed under inversion), drawn in ascending index order.
pub fn symmetrized_random(group: &Arc<FiniteGroup>, support: &[usize], rng: &mut ChaCha8Rng) -> AlgebraElement {
    let mut alpha = vec![ZERO; group.order()];
    for &g in support {
        alpha[g] = unit_disk_sample(rng);
    }
    AlgebraElement::from_scalars(group.clone(), support.iter().map(|&g| (g, (alpha[g] + alpha[group.inv(g)].conj()) * 0.5)))
}

/// Random self-adjoint element supported on the word-metric ball of radius
/// `support_range` around the identity.
pub fn random_selfadjoint(
    group: &Arc<FiniteGroup>,
    graph: &CayleyGraph,
    support_range: usize,
    seed: u64,
) -> Result<AlgebraElement> {
    if support_range == 0 {
        return Err(Error::InvalidParameter("support_range must be at least 1".into()));
    }
    let dist = graph.bfs(group.identity());
    let support: Vec<usize> = (0..group.order()).filter(|&g| dist[g].is_some_and(|d| d <= support_range)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(symmetrized_random(group, &support, &mut rng))
}

/// Per-cluster classification of a scalar left-regular operator.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterReport {
    pub index: usize,
    pub value: f64,
    pub multiplicity: usize,
    /// Matched irrep when the level character equals a table row.
    pub irrep: Option<String>,
    /// Level character in table column order.
    pub character: Vec<f64>,
    pub pairings: Vec<i64>,
}

/// Classify every cluster of `sd` (from a `D = 1` operator on `ℓ²(Γ)`).
pub fn classify_clusters(sd: &SpectralData, group: &Arc<FiniteGroup>, table: &CharacterTable) -> Result<Vec<ClusterReport>> {
    (0..sd.clusters.len())
        .map(|k| {
            let p = spectral_projector(sd, k)?;
            let chi = table.to_table_order(group, &level_character(&p, group)?)?;
            let irrep = table.identify(&chi, 1e-6).map(|i| table.irreps[i].label.clone());
            let pairings = irrep_multiplicities(&projector_to_algebra(&p, group)?, table)?;
            Ok(ClusterReport {
                index: k,
                value: sd.clusters[k].value,
                multiplicity: sd.clusters[k].multiplicity,
                irrep,
                character: chi.iter().map(|z| z.re).collect(),
                pairings,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::translation_unitary;
    use crate::cayley::adjacency_element;
    use crate::linalg::{c, diagonal};
    use crate::rotation::PHI;

    struct Setup {
        group: Arc<FiniteGroup>,
        graph: CayleyGraph,
        laplacian: CMatrix,
        sd: SpectralData,
    }

    fn setup() -> Setup {
        let group = Arc::new(FiniteGroup::icosahedral().unwrap());
        let s = group.find_standard_generators().unwrap();
        let graph = CayleyGraph::standard(&group, s).unwrap();
        let laplacian = -adjacency_element(&group, s).unwrap().left_regular().into_matrix();
        let sd = hermitian_eig(&laplacian, DEFAULT_CLUSTER_TOL).unwrap();
        Setup { group, graph, laplacian, sd }
    }

    #[test]
    fn diagonal_example() {
        let sd = hermitian_eig(&diagonal(&[3.0, 1.0, 2.0]), DEFAULT_CLUSTER_TOL).unwrap();
        let values: Vec<f64> = sd.clusters.iter().map(|c| c.value).collect();
        assert_eq!(values, vec![1.0, 2.0, 3.0]);
        assert!(sd.clusters.iter().all(|c| c.multiplicity == 1));
        let not_hermitian = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(hermitian_eig(&not_hermitian, 1e-6), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigen_contract_on_laplacian() {
        let s = setup();
        let norm = 2.0;
        for cl in &s.sd.clusters {
            let gram = cl.basis.adjoint() * &cl.basis;
            assert!(linalg::max_abs_diff(&gram, &CMatrix::identity(cl.multiplicity, cl.multiplicity)) < 1e-10);
            let residual = &s.laplacian * &cl.basis - &cl.basis * c(cl.value);
            assert!(linalg::max_abs(&residual) <= 1e-9 * norm);
        }
        assert_eq!(s.sd.clusters.iter().map(|c| c.multiplicity).sum::<usize>(), 60);
        assert!(s.sd.eigenvalues.iter().all(|v| (-2.0 - 1e-12..=2.0 + 1e-12).contains(v)));
        assert!(s.sd.diagnostics.min_separation > 1e-3);
    }

    #[test]
    fn projector_properties() {
        let s = setup();
        let mut total = CMatrix::zeros(60, 60);
        for k in 0..s.sd.clusters.len() {
            let p = s.sd.projector(k).unwrap();
            assert!(projector_defect(&p) < 1e-12);
            assert!((p.trace().re - s.sd.clusters[k].multiplicity as f64).abs() < 1e-10);
            assert!(commutant_defect(&p, &s.group).unwrap() < 1e-9);
            total += p;
        }
        assert!(linalg::max_abs_diff(&total, &CMatrix::identity(60, 60)) < 1e-9);

        let ground = s.sd.find_cluster(-2.0, 1e-9).unwrap();
        let p = s.sd.projector(ground).unwrap();
        assert!(p.iter().all(|z| (z - c(1.0 / 60.0)).norm() < 1e-12));
        assert!(matches!(s.sd.projector(99), Err(Error::ClusterOutOfRange { .. })));

        let whole = hermitian_eig(&CMatrix::identity(4, 4), 1e-6).unwrap();
        assert_eq!(whole.clusters.len(), 1);
        assert!(linalg::max_abs_diff(&whole.projector(0).unwrap(), &CMatrix::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn level_characters() {
        let s = setup();
        let t = icosahedral_character_table();
        let regular = t.to_table_order(&s.group, &level_character(&CMatrix::identity(60, 60), &s.group).unwrap()).unwrap();
        let expected = [60.0, 0.0, 0.0, 0.0, 0.0];
        assert!(regular.iter().zip(expected).all(|(a, b)| (a - c(b)).norm() < 1e-12));

        let ground = s.sd.projector(s.sd.find_cluster(-2.0, 1e-9).unwrap()).unwrap();
        let chi = t.to_table_order(&s.group, &level_character(&ground, &s.group).unwrap()).unwrap();
        assert!(chi.iter().all(|z| (z - c(1.0)).norm() < 1e-10));

        let t1 = s.sd.projector(s.sd.find_cluster((5.0 - 5f64.sqrt()) / 4.0, 1e-9).unwrap()).unwrap();
        let chi = t.to_table_order(&s.group, &level_character(&t1, &s.group).unwrap()).unwrap();
        let expected = [3.0, PHI, 1.0 - PHI, 0.0, -1.0];
        assert!(chi.iter().zip(expected).all(|(a, b)| (a - c(b)).norm() < 1e-8));

        let not_projector = CMatrix::identity(60, 60) * c(2.0);
        assert!(matches!(level_character(&not_projector, &s.group), Err(Error::NotAProjection(_))));
    }

    #[test]
    fn class_inconsistency_is_reported() {
        let s = setup();
        // projector onto a two-site superposition is not Γ-invariant
        let mut p = CMatrix::zeros(60, 60);
        let e = s.group.identity();
        let g = (e + 1) % 60;
        for (a, b) in [(e, e), (e, g), (g, e), (g, g)] {
            p[(a, b)] = c(0.5);
        }
        assert!(matches!(level_character(&p, &s.group), Err(Error::ClassInconsistent { .. })));
        assert!(matches!(projector_to_algebra(&p, &s.group), Err(Error::NotInAlgebra(_))));
    }

    #[test]
    fn pull_back_examples() {
        let s = setup();
        let e = AlgebraElement::identity(s.group.clone(), 1);
        let back = projector_to_algebra(&CMatrix::identity(60, 60), &s.group).unwrap();
        assert!(back.approx_eq(&e, 1e-15));

        let ground = s.sd.projector(s.sd.find_cluster(-2.0, 1e-9).unwrap()).unwrap();
        let p = projector_to_algebra(&ground, &s.group).unwrap();
        assert_eq!(p.support().len(), 60);
        assert!((0..60).all(|g| (p.scalar_at(g) - c(1.0 / 60.0)).norm() < 1e-12));

        let t2 = s.sd.projector(s.sd.find_cluster((5.0 + 5f64.sqrt()) / 4.0, 1e-9).unwrap()).unwrap();
        let p = projector_to_algebra(&t2, &s.group).unwrap();
        assert!(linalg::max_abs_diff(p.left_regular().matrix(), &t2) < 1e-8);
        assert!(p.square().distance(&p).unwrap() < 1e-8);
        assert!((p.trace_scalar() - c(3.0 / 60.0)).norm() < 1e-10);
    }

    /// Oracle for the pairing: materialize `U_γ` and `π_L(p)` and take the
    /// matrix trace of their product for every `γ`.
    fn pairing_oracle(p: &AlgebraElement, table: &CharacterTable) -> Vec<f64> {
        let g = p.group();
        let lp = p.left_regular().into_matrix();
        let traces: Vec<Complex64> =
            (0..g.order()).map(|k| (translation_unitary(g, k, p.block_dim()).matrix() * &lp).trace()).collect();
        (0..table.irreps.len())
            .map(|k| {
                let chi = table.character_on_elements(g, k).unwrap();
                (traces.iter().zip(&chi).map(|(a, b)| a * b).sum::<Complex64>() / g.order() as f64).re
            })
            .collect()
    }

    #[test]
    fn pairings() {
        let s = setup();
        let t = icosahedral_character_table();
        let e = AlgebraElement::identity(s.group.clone(), 1);
        assert_eq!(irrep_multiplicities(&e, &t).unwrap(), vec![1, 3, 3, 4, 5]);
        let zero = AlgebraElement::zero(s.group.clone(), 1);
        assert_eq!(irrep_multiplicities(&zero, &t).unwrap(), vec![0; 5]);

        let ground = s.sd.projector(s.sd.find_cluster(-2.0, 1e-9).unwrap()).unwrap();
        let p = projector_to_algebra(&ground, &s.group).unwrap();
        assert_eq!(irrep_multiplicities(&p, &t).unwrap(), vec![1, 0, 0, 0, 0]);

        for k in 0..s.sd.clusters.len() {
            let p = projector_to_algebra(&s.sd.projector(k).unwrap(), &s.group).unwrap();
            let fast: Vec<f64> = pairing_values(&p, &t).unwrap().iter().map(|z| z.re).collect();
            let oracle = pairing_oracle(&p, &t);
            assert!(fast.iter().zip(&oracle).all(|(a, b)| (a - b).abs() < 1e-10));
            let n = irrep_multiplicities(&p, &t).unwrap();
            assert_eq!(projector_pairings(&s.sd.projector(k).unwrap(), &s.group, &t).unwrap(), n);
            let weighted: i64 = n.iter().zip(t.dims()).map(|(m, d)| m * d as i64).sum();
            assert_eq!(weighted as usize, s.sd.clusters[k].multiplicity);
        }

        let doubled = e.scale(c(2.0));
        assert!(matches!(irrep_multiplicities(&doubled, &t), Err(Error::NotAProjection(_))));
    }

    #[test]
    fn stacked_pairing_counts_block_traces() {
        let s = setup();
        let t = icosahedral_character_table();
        let ground = s.sd.projector(s.sd.find_cluster(-2.0, 1e-9).unwrap()).unwrap();
        let p = projector_to_algebra(&ground, &s.group).unwrap();
        // p ⊕ e as a 2×2-block projection
        let mut stacked = AlgebraElement::zero(s.group.clone(), 2);
        for (g, b) in p.blocks() {
            let mut block = CMatrix::zeros(2, 2);
            block[(0, 0)] = b[(0, 0)];
            stacked.add_block_at(g, &block);
        }
        let mut unit = CMatrix::zeros(2, 2);
        unit[(1, 1)] = c(1.0);
        stacked.add_block_at(s.group.identity(), &unit);
        assert_eq!(irrep_multiplicities(&stacked, &t).unwrap(), vec![2, 3, 3, 4, 5]);
        let oracle = pairing_oracle(&stacked, &t);
        assert!((oracle[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn random_selfadjoint_elements() {
        let s = setup();
        let h = random_selfadjoint(&s.group, &s.graph, 1, 42).unwrap();
        assert!(h.is_self_adjoint(1e-15));
        assert_eq!(h.support().len(), 4);
        let again = random_selfadjoint(&s.group, &s.graph, 1, 42).unwrap();
        assert!(h.approx_eq(&again, 0.0));
        assert!(random_selfadjoint(&s.group, &s.graph, 0, 1).is_err());
    }

    #[test]
    fn generic_element_has_irreducible_levels() {
        let s = setup();
        let t = icosahedral_character_table();
        let h = random_selfadjoint(&s.group, &s.graph, 1, 3).unwrap();
        let sd = hermitian_eig(h.left_regular().matrix(), DEFAULT_CLUSTER_TOL).unwrap();
        let reports = classify_clusters(&sd, &s.group, &t).unwrap();
        for r in &reports {
            assert!(r.irrep.is_some(), "cluster {} at {} is reducible", r.index, r.value);
            assert!([1, 3, 4, 5].contains(&r.multiplicity));
        }
    }
}
