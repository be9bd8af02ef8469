//! The group algebra with matrix coefficients: elements `q = Σ α_γ γ` with
//! `D×D` complex blocks, the convolution product, the adjoint, the canonical
//! trace and the left/right regular representations on `ℂ^D ⊗ ℓ²(Γ)`.
//!
//! Basis index layout for regular operators: `site · D + internal`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::rotation::FiniteGroup;

/// Finitely supported map from group elements to `D×D` blocks.
///
/// Zero blocks are never stored.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    group: Arc<FiniteGroup>,
    block_dim: usize,
    coeffs: BTreeMap<usize, CMatrix>,
}

fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn is_zero_block(m: &CMatrix) -> bool {
    m.iter().all(|z| *z == ZERO)
}

impl AlgebraElement {
    pub fn zero(group: Arc<FiniteGroup>, block_dim: usize) -> Self {
        assert!(block_dim > 0, "block dimension must be positive");
        AlgebraElement { group, block_dim, coeffs: BTreeMap::new() }
    }

    /// The unit `e` with identity block.
    pub fn identity(group: Arc<FiniteGroup>, block_dim: usize) -> Self {
        let e = group.identity();
        Self::basis(group, e, block_dim)
    }

    /// A single group element with identity block.
    pub fn basis(group: Arc<FiniteGroup>, g: usize, block_dim: usize) -> Self {
        let mut q = Self::zero(group, block_dim);
        q.coeffs.insert(g, CMatrix::identity(block_dim, block_dim));
        q
    }

    /// Scalar (`D = 1`) element from `(index, coefficient)` pairs; repeated
    /// indices accumulate.
    pub fn from_scalars(group: Arc<FiniteGroup>, terms: impl IntoIterator<Item = (usize, Complex64)>) -> Self {
        let mut q = Self::zero(group, 1);
        for (g, a) in terms {
            q.add_scalar_at(g, a);
        }
        q
    }

    pub fn from_blocks(group: Arc<FiniteGroup>, block_dim: usize, blocks: BTreeMap<usize, CMatrix>) -> Result<Self> {
        let mut q = Self::zero(group, block_dim);
        for (g, b) in blocks {
            q.group.check_index(g)?;
            if b.nrows() != block_dim || b.ncols() != block_dim {
                return Err(Error::BadBlockShape { index: g, rows: b.nrows(), cols: b.ncols(), dim: block_dim });
            }
            if !is_zero_block(&b) {
                q.coeffs.insert(g, b);
            }
        }
        Ok(q)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    /// Dimension of the regular representation space, `D·|Γ|`.
    pub fn rep_dim(&self) -> usize {
        self.block_dim * self.group.order()
    }

    /// Indices carrying a nonzero block, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &CMatrix)> {
        self.coeffs.iter().map(|(&g, b)| (g, b))
    }

    pub fn block(&self, g: usize) -> Option<&CMatrix> {
        self.coeffs.get(&g)
    }

    /// Entry `(0, 0)` of the block at `g`, zero when absent.
    pub fn scalar_at(&self, g: usize) -> Complex64 {
        self.coeffs.get(&g).map_or(ZERO, |b| b[(0, 0)])
    }

    pub fn add_scalar_at(&mut self, g: usize, a: Complex64) {
        let block = CMatrix::identity(self.block_dim, self.block_dim) * a;
        self.add_block_at(g, &block);
    }

    pub fn add_block_at(&mut self, g: usize, block: &CMatrix) {
        assert!(g < self.group.order(), "element index out of range");
        assert_eq!(block.shape(), (self.block_dim, self.block_dim), "block shape");
        let entry = self.coeffs.entry(g).or_insert_with(|| CMatrix::zeros(self.block_dim, self.block_dim));
        *entry += block;
        if is_zero_block(entry) {
            self.coeffs.remove(&g);
        }
    }

    fn check_compatible(&self, other: &AlgebraElement) -> Result<()> {
        if !same_group(&self.group, &other.group) {
            return Err(Error::GroupMismatch);
        }
        if self.block_dim != other.block_dim {
            return Err(Error::BlockDimMismatch(self.block_dim, other.block_dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (g, b) in other.blocks() {
            out.add_block_at(g, b);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, a: Complex64) -> AlgebraElement {
        self.map_blocks(|_, b| b * a)
    }

    /// Apply `f` to every stored block, dropping blocks that become zero.
    pub fn map_blocks(&self, f: impl Fn(usize, &CMatrix) -> CMatrix) -> AlgebraElement {
        let coeffs = self.coeffs.iter().map(|(&g, b)| (g, f(g, b))).filter(|(_, b)| !is_zero_block(b)).collect();
        AlgebraElement { group: self.group.clone(), block_dim: self.block_dim, coeffs }
    }

    /// Drop blocks whose largest entry modulus is at most `tol`.
    pub fn pruned(&self, tol: f64) -> AlgebraElement {
        let coeffs = self.coeffs.iter().filter(|(_, b)| linalg::max_abs(b) > tol).map(|(&g, b)| (g, b.clone())).collect();
        AlgebraElement { group: self.group.clone(), block_dim: self.block_dim, coeffs }
    }

    /// Convolution `(qr)_γ = Σ_{γ₁γ₂=γ} α_{γ₁} β_{γ₂}`.
    pub fn multiply(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_compatible(other)?;
        let mut acc: BTreeMap<usize, CMatrix> = BTreeMap::new();
        for (&g1, a) in &self.coeffs {
            for (&g2, b) in &other.coeffs {
                let g = self.group.mul(g1, g2);
                let term = a * b;
                acc.entry(g).and_modify(|x| *x += &term).or_insert(term);
            }
        }
        acc.retain(|_, b| !is_zero_block(b));
        Ok(AlgebraElement { group: self.group.clone(), block_dim: self.block_dim, coeffs: acc })
    }

    pub fn square(&self) -> AlgebraElement {
        self.multiply(self).expect("an element is compatible with itself")
    }

    /// `q* = Σ α_γ† γ⁻¹`.
    pub fn adjoint(&self) -> AlgebraElement {
        let coeffs = self.coeffs.iter().map(|(&g, b)| (self.group.inv(g), b.adjoint())).collect();
        AlgebraElement { group: self.group.clone(), block_dim: self.block_dim, coeffs }
    }

    /// The canonical trace: the block at the identity.
    pub fn trace(&self) -> CMatrix {
        self.coeffs.get(&self.group.identity()).cloned().unwrap_or_else(|| CMatrix::zeros(self.block_dim, self.block_dim))
    }

    /// Matrix trace of the identity block.
    pub fn trace_scalar(&self) -> Complex64 {
        self.trace().trace()
    }

    /// Largest entrywise deviation between the two coefficient maps.
    pub fn distance(&self, other: &AlgebraElement) -> Result<f64> {
        self.check_compatible(other)?;
        let mut worst = 0.0f64;
        for g in self.coeffs.keys().chain(other.coeffs.keys()) {
            let zero = CMatrix::zeros(self.block_dim, self.block_dim);
            let a = self.coeffs.get(g).unwrap_or(&zero);
            let b = other.coeffs.get(g).unwrap_or(&zero);
            worst = worst.max(linalg::max_abs_diff(a, b));
        }
        Ok(worst)
    }

    pub fn approx_eq(&self, other: &AlgebraElement, tol: f64) -> bool {
        self.distance(other).is_ok_and(|d| d <= tol)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }

    /// `π_L(q)|γ'⟩ = Σ α_γ |γγ'⟩`, blockwise.
    pub fn left_regular(&self) -> RegularOperator {
        self.regular(Side::Left)
    }

    /// `π_R(q)|γ'⟩ = Σ α_γ |γ'γ⁻¹⟩`, blockwise.
    pub fn right_regular(&self) -> RegularOperator {
        self.regular(Side::Right)
    }

    fn regular(&self, side: Side) -> RegularOperator {
        let n = self.group.order();
        let d = self.block_dim;
        let mut m = CMatrix::zeros(n * d, n * d);
        for (&g, block) in &self.coeffs {
            let g_inv = self.group.inv(g);
            for col in 0..n {
                let row = match side {
                    Side::Left => self.group.mul(g, col),
                    Side::Right => self.group.mul(col, g_inv),
                };
                let mut view = m.view_mut((row * d, col * d), (d, d));
                view += block;
            }
        }
        RegularOperator { matrix: m, side, block_dim: d }
    }

    /// `‖q‖ = ‖π_L(q)‖`, from the top eigenvalue of `π_L(q*q)`.
    pub fn operator_norm(&self) -> f64 {
        let qq = self.adjoint().multiply(self).expect("compatible");
        let top = linalg::eigvalsh(qq.left_regular().matrix()).last().copied().unwrap_or(0.0);
        top.max(0.0).sqrt()
    }

    pub fn to_json(&self) -> AlgebraJson {
        AlgebraJson {
            group_order: self.group.order(),
            block_dim: self.block_dim,
            coefficients: self
                .coeffs
                .iter()
                .map(|(&g, b)| CoefficientJson {
                    element_index: g,
                    block: (0..self.block_dim)
                        .flat_map(|i| (0..self.block_dim).map(move |j| (i, j)))
                        .map(|(i, j)| [b[(i, j)].re, b[(i, j)].im])
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(group: Arc<FiniteGroup>, json: &AlgebraJson) -> Result<Self> {
        if json.group_order != group.order() {
            return Err(Error::GroupMismatch);
        }
        if json.block_dim == 0 {
            return Err(Error::InvalidParameter("block_dim must be positive".into()));
        }
        let d = json.block_dim;
        let mut blocks = BTreeMap::new();
        for c in &json.coefficients {
            if c.block.len() != d * d {
                return Err(Error::BadBlockShape { index: c.element_index, rows: c.block.len(), cols: 1, dim: d });
            }
            let b = CMatrix::from_fn(d, d, |i, j| {
                let [re, im] = c.block[i * d + j];
                Complex64::new(re, im)
            });
            let entry = blocks.entry(c.element_index).or_insert_with(|| CMatrix::zeros(d, d));
            *entry += b;
        }
        Self::from_blocks(group, d, blocks)
    }
}

/// Which regular representation produced an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Dense matrix of a regular representation.
#[derive(Debug, Clone)]
pub struct RegularOperator {
    matrix: CMatrix,
    side: Side,
    block_dim: usize,
}

impl RegularOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::hermitian_defect(&self.matrix) <= tol
    }
}

/// `U_γ = π_R(γ ⊗ I_D)`.
pub fn translation_unitary(group: &Arc<FiniteGroup>, g: usize, block_dim: usize) -> RegularOperator {
    AlgebraElement::basis(group.clone(), g, block_dim).right_regular()
}

/// JSON form: one entry per supported element, blocks as row-major
/// `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub group_order: usize,
    pub block_dim: usize,
    pub coefficients: Vec<CoefficientJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientJson {
    pub element_index: usize,
    pub block: Vec<[f64; 2]>,
}
