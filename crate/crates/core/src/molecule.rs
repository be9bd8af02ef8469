//! Synthetic molecules: the orbit of a seed pose under a point group, the
//! covariant dynamical matrix assembled from coupling blocks, and the
//! undamped driven response `(−ω²T + V)Q = F`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::Serialize;

use crate::algebra::{AlgebraElement, RegularOperator};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::par::Execution;
use crate::rotation::{FiniteGroup, Rotation};

pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-6;
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-8;

/// Position and orientation of one resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: Rotation,
}

impl Pose {
    pub fn new(position: Vector3<f64>, orientation: Rotation) -> Self {
        Pose { position, orientation }
    }

    /// The body axis `R·ẑ`.
    pub fn director(&self) -> Vector3<f64> {
        self.orientation.apply(&Vector3::z())
    }

    /// `|Δx| + |Δ(R·ẑ)|`. Resonators are taken to be axially symmetric, so
    /// a spin about the body axis does not move the pose.
    pub fn distance(&self, other: &Pose) -> f64 {
        (self.position - other.position).norm() + (self.director() - other.director()).norm()
    }

    pub fn rotated(&self, r: &Rotation) -> Pose {
        Pose { position: r.apply(&self.position), orientation: r.compose(&self.orientation) }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.orientation.matrix().iter()).all(|x| x.is_finite())
    }
}

/// Poses `γ·x₀`, indexed by group element.
#[derive(Debug, Clone)]
pub struct OrbitLattice {
    group: Arc<FiniteGroup>,
    seed: Pose,
    poses: Vec<Pose>,
}

pub fn orbit_lattice(group: &Arc<FiniteGroup>, seed: Pose, fixed_point_tol: f64) -> Result<OrbitLattice> {
    if !seed.is_finite() {
        return Err(Error::InvalidParameter("seed pose is not finite".into()));
    }
    let poses: Vec<Pose> = group.elements().iter().map(|r| seed.rotated(r)).collect();
    for i in 0..poses.len() {
        for j in i + 1..poses.len() {
            if poses[i].distance(&poses[j]) <= fixed_point_tol {
                return Err(Error::FixedPoint(i, j));
            }
        }
    }
    Ok(OrbitLattice { group: group.clone(), seed, poses })
}

#[derive(Debug, Clone, Serialize)]
pub struct PoseJson {
    pub index: usize,
    pub position: [f64; 3],
    pub orientation: [f64; 9],
}

impl OrbitLattice {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn seed(&self) -> &Pose {
        &self.seed
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.poses.len() {
            for j in i + 1..self.poses.len() {
                best = best.min(self.poses[i].distance(&self.poses[j]));
            }
        }
        best
    }

    /// Distances from pose `from` to every other pose, grouped into shells
    /// `(distance, count)` ascending; values within `tol` share a shell.
    pub fn distance_shells(&self, from: usize, tol: f64) -> Vec<(f64, usize)> {
        let mut d: Vec<f64> =
            (0..self.poses.len()).filter(|&k| k != from).map(|k| self.poses[from].distance(&self.poses[k])).collect();
        d.sort_by(f64::total_cmp);
        crate::spectra::levels(&d, tol)
    }

    /// Per-element positions and orientations for external viewers.
    pub fn to_json(&self) -> Vec<PoseJson> {
        self.poses
            .iter()
            .enumerate()
            .map(|(index, p)| PoseJson {
                index,
                position: [p.position.x, p.position.y, p.position.z],
                orientation: p.orientation.to_row_major(),
            })
            .collect()
    }
}

/// Coupling blocks `w_γ`, one `D×D` block per group element.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub block_dim: usize,
    pub w: BTreeMap<usize, CMatrix>,
}

impl CouplingSpec {
    /// Largest `|w_{γ⁻¹} − w_γ†|` entry, with missing blocks read as zero.
    pub fn adjoint_defect(&self, group: &FiniteGroup) -> (usize, f64) {
        let d = self.block_dim;
        let zero = CMatrix::zeros(d, d);
        let mut worst = (0, 0.0);
        for (&g, block) in &self.w {
            let partner = self.w.get(&group.inv(g)).unwrap_or(&zero);
            let defect = linalg::max_abs_diff(partner, &block.adjoint());
            if defect > worst.1 {
                worst = (g, defect);
            }
        }
        worst
    }

    pub fn to_element(&self, group: &Arc<FiniteGroup>) -> Result<AlgebraElement> {
        let (index, defect) = self.adjoint_defect(group);
        if defect > 1e-12 {
            return Err(Error::NonHermitianSpec { index, defect });
        }
        AlgebraElement::from_blocks(group.clone(), self.block_dim, self.w.clone())
    }
}

/// `D = Σ_γ w_γ ⊗ Σ_x |γx⟩⟨x|`, the left-regular image of the spec.
pub fn assemble_dynamical_matrix(group: &Arc<FiniteGroup>, spec: &CouplingSpec) -> Result<RegularOperator> {
    Ok(spec.to_element(group)?.left_regular())
}

/// Decreasing coupling profiles of the pose distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    /// `exp(−r/r0)`.
    Exp { r0: f64 },
    /// `exp(−r²/2σ²)`.
    Gauss { sigma: f64 },
    /// 1 for `r ≤ cutoff`, else 0.
    Step { cutoff: f64 },
}

impl Kernel {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Kernel::Exp { r0 } => (-r / r0).exp(),
            Kernel::Gauss { sigma } => (-r * r / (2.0 * sigma * sigma)).exp(),
            Kernel::Step { cutoff } => {
                if r <= cutoff {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    /// `exp:r0=1.0`, `gauss:sigma=0.5` or `step:cutoff=1.2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad =
            || Error::InvalidParameter(format!("cannot parse kernel {s:?}; expected exp:r0=X, gauss:sigma=X or step:cutoff=X"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let (key, value) = arg.split_once('=').ok_or_else(bad)?;
        let v: f64 = value.trim().parse().map_err(|_| bad())?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(bad());
        }
        match (kind, key) {
            ("exp", "r0") => Ok(Kernel::Exp { r0: v }),
            ("gauss", "sigma") => Ok(Kernel::Gauss { sigma: v }),
            ("step", "cutoff") => Ok(Kernel::Step { cutoff: v }),
            _ => Err(bad()),
        }
    }
}

/// Scalar couplings `w_γ = kernel(dist(x₀, γ·x₀)) · I_D`. Zero couplings
/// are left out of the spec.
pub fn coupling_from_kernel(lattice: &OrbitLattice, kernel: impl Fn(f64) -> f64, block_dim: usize) -> CouplingSpec {
    let e = lattice.group.identity();
    let seed = lattice.poses[e];
    let w = lattice
        .poses
        .iter()
        .enumerate()
        .filter_map(|(g, p)| {
            let k = kernel(seed.distance(p));
            (k != 0.0).then(|| (g, CMatrix::identity(block_dim, block_dim) * c(k)))
        })
        .collect();
    CouplingSpec { block_dim, w }
}

fn check_square(m: &CMatrix, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch { rows: m.nrows(), cols: m.ncols(), expected: n });
    }
    Ok(())
}

/// Undamped oscillator solver for fixed `T` and `V`; the eigenbasis of
/// `D = T^{−1/2} V T^{−1/2}` is computed once and reused across drives.
#[derive(Debug, Clone)]
pub struct ResponseSolver {
    t_inv_sqrt: CMatrix,
    modes: CMatrix,
    spectrum: Vec<f64>,
    resonance_tol: f64,
}

impl ResponseSolver {
    pub fn new(t: &CMatrix, v: &CMatrix, resonance_tol: f64) -> Result<Self> {
        let n = t.nrows();
        check_square(t, n)?;
        check_square(v, n)?;
        for m in [t, v] {
            let defect = linalg::hermitian_defect(m);
            if defect > 1e-10 {
                return Err(Error::NotHermitian(defect));
            }
        }
        let (tv, tu) = linalg::eigh(t);
        let t_min = tv.first().copied().unwrap_or(1.0);
        if !(t_min > 1e-10) {
            return Err(Error::NotPositiveDefinite(t_min));
        }
        let scale: Vec<f64> = tv.iter().map(|x| 1.0 / x.sqrt()).collect();
        let t_inv_sqrt = &tu * linalg::diagonal(&scale) * tu.adjoint();
        let d = &t_inv_sqrt * v * &t_inv_sqrt;
        let d = (&d + d.adjoint()) * c(0.5);
        let (spectrum, modes) = linalg::eigh(&d);
        Ok(ResponseSolver { t_inv_sqrt, modes, spectrum, resonance_tol })
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn solve(&self, omega: f64, f: &CVector) -> Result<CVector> {
        let n = self.spectrum.len();
        if f.len() != n {
            return Err(Error::DimensionMismatch { rows: f.len(), cols: 1, expected: n });
        }
        let w2 = omega * omega;
        let (k, distance) = self
            .spectrum
            .iter()
            .map(|x| (x - w2).abs())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::INFINITY));
        if distance <= self.resonance_tol {
            return Err(Error::Resonance { omega_sq: w2, eigenvalue: self.spectrum[k], distance });
        }
        let mut y = self.modes.adjoint() * (&self.t_inv_sqrt * f);
        for (yi, lam) in y.iter_mut().zip(&self.spectrum) {
            *yi /= c(lam - w2);
        }
        Ok(&self.t_inv_sqrt * (&self.modes * y))
    }
}

/// `Q = T^{−1/2}(D − ω²)⁻¹T^{−1/2}F`.
pub fn driven_response(t: &CMatrix, v: &CMatrix, omega: f64, f: &CVector, resonance_tol: f64) -> Result<CVector> {
    ResponseSolver::new(t, v, resonance_tol)?.solve(omega, f)
}

/// `‖(−ω²T + V)Q − F‖`.
pub fn response_residual(t: &CMatrix, v: &CMatrix, omega: f64, q: &CVector, f: &CVector) -> f64 {
    ((v - t * c(omega * omega)) * q - f).norm()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub omega: f64,
    /// `|Q|` per site (block norm), or `None` at a resonance.
    pub amplitudes: Option<Vec<f64>>,
}

/// Driven response over a list of frequencies, `block_dim` entries per site.
pub fn frequency_sweep(
    solver: &ResponseSolver,
    omegas: &[f64],
    f: &CVector,
    block_dim: usize,
    execution: Execution,
) -> Result<Vec<SweepPoint>> {
    if block_dim == 0 || !f.len().is_multiple_of(block_dim) {
        return Err(Error::BlockDimMismatch(f.len(), block_dim));
    }
    execution
        .map_slice(omegas, |&omega| match solver.solve(omega, f) {
            Ok(q) => Ok(SweepPoint {
                omega,
                amplitudes: Some(
                    q.as_slice().chunks(block_dim).map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect(),
                ),
            }),
            Err(Error::Resonance { .. }) => Ok(SweepPoint { omega, amplitudes: None }),
            Err(e) => Err(e),
        })
        .into_iter()
        .collect()
}
