//! Finite subgroups of SO(3) built by closure from axis–angle generators.
//!
//! Elements are stored as 3×3 orthogonal matrices. Once the closure is
//! complete, every product is resolved through the integer multiplication
//! table; rotations are never re-multiplied as floats afterwards.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Golden ratio.
pub const PHI: f64 = 1.618_033_988_749_895;

/// Default cap on the closure size.
pub const DEFAULT_MAX_ORDER: usize = 10_000;

/// The infinitesimal generators `L_x, L_y, L_z` of SO(3).
pub fn generator_matrices() -> [Matrix3<f64>; 3] {
    [
        Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0),
        Matrix3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0),
        Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    ]
}

/// A proper rotation of 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    matrix: Matrix3<f64>,
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation { matrix: Matrix3::identity() }
    }

    /// `exp(θ n̂·L)` for the normalized axis `n̂`, evaluated in closed form.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Result<Self> {
        let norm = axis.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidAxis);
        }
        if !angle.is_finite() {
            return Err(Error::InvalidParameter(format!("rotation angle {angle} is not finite")));
        }
        let n = axis / norm;
        let [lx, ly, lz] = generator_matrices();
        let k = lx * n.x + ly * n.y + lz * n.z;
        let matrix = Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos());
        Ok(Rotation { matrix })
    }

    /// Wrap a matrix after checking orthogonality and orientation to 1e-12.
    pub fn from_matrix(matrix: Matrix3<f64>) -> Result<Self> {
        let orthogonality = (matrix.transpose() * matrix - Matrix3::identity()).abs().max();
        let det = matrix.determinant();
        if orthogonality > 1e-12 || (det - 1.0).abs() > 1e-12 {
            return Err(Error::NotARotation { orthogonality, det });
        }
        Ok(Rotation { matrix })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        // atan2 stays accurate near 0 and π where acos loses half its digits
        let m = &self.matrix;
        let sin = 0.5 * Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]).norm();
        let cos = (m.trace() - 1.0) / 2.0;
        sin.atan2(cos)
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation { matrix: self.matrix * other.matrix }
    }

    pub fn inverse(&self) -> Rotation {
        Rotation { matrix: self.matrix.transpose() }
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * v
    }

    /// Frobenius distance between the two matrices.
    pub fn distance(&self, other: &Rotation) -> f64 {
        (self.matrix - other.matrix).norm()
    }

    /// Row-major entries.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.matrix;
        [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]]
    }
}

/// Rotation angle of `r`, in `[0, π]`.
pub fn rotation_angle(r: &Rotation) -> f64 {
    r.angle()
}

/// Threshold below which two rotation matrices are identified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupTolerance {
    match_tol: f64,
}

impl GroupTolerance {
    pub fn new(match_tol: f64) -> Result<Self> {
        if match_tol > 0.0 && match_tol < 0.1 {
            Ok(GroupTolerance { match_tol })
        } else {
            Err(Error::InvalidTolerance(match_tol))
        }
    }

    pub fn match_tol(&self) -> f64 {
        self.match_tol
    }
}

impl Default for GroupTolerance {
    fn default() -> Self {
        GroupTolerance { match_tol: 1e-8 }
    }
}

/// A conjugacy class: member indices (ascending) and the common rotation angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyClass {
    pub members: Vec<usize>,
    pub angle: f64,
}

impl ConjugacyClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn representative(&self) -> usize {
        self.members[0]
    }
}

/// The pair `(C5, C2)` of the standard presentation
/// `⟨C5, C2 | C5⁵, C2², (C5 C2)³⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardGenerators {
    pub c5: usize,
    pub c2: usize,
}

/// Rotations found by looking up matrices within a tolerance. Entries are
/// kept sorted by trace so a lookup only scans a narrow trace window.
struct ElementIndex {
    by_trace: Vec<(f64, usize)>,
    tol: f64,
}

impl ElementIndex {
    fn new(tol: f64) -> Self {
        ElementIndex { by_trace: Vec::new(), tol }
    }

    fn find(&self, elements: &[Rotation], r: &Rotation) -> Option<usize> {
        let t = r.matrix.trace();
        // |Δtrace| ≤ √3·‖Δ‖_F
        let window = 2.0 * self.tol;
        let start = self.by_trace.partition_point(|&(x, _)| x < t - window);
        self.by_trace[start..]
            .iter()
            .take_while(|&&(x, _)| x <= t + window)
            .find(|&&(_, k)| elements[k].distance(r) < self.tol)
            .map(|&(_, k)| k)
    }

    fn insert(&mut self, trace: f64, index: usize) {
        let pos = self.by_trace.partition_point(|&(x, _)| x < trace);
        self.by_trace.insert(pos, (trace, index));
    }
}

/// A finite rotation group with its multiplication, inverse and class tables.
///
/// `mult(i, j)` is the index of `R_i · R_j`.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    elements: Vec<Rotation>,
    identity: usize,
    mult: Vec<usize>,
    inverse: Vec<usize>,
    classes: Vec<ConjugacyClass>,
    class_of: Vec<usize>,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.identity == other.identity && self.mult == other.mult
    }
}

impl FiniteGroup {
    /// Closure of `generators` under multiplication, with the default cap.
    pub fn generate(generators: &[Rotation], tol: GroupTolerance) -> Result<Self> {
        Self::generate_with_cap(generators, tol, DEFAULT_MAX_ORDER)
    }

    /// Breadth-first closure from the identity: each new element `g` spawns
    /// `s·g` for every generator `s`, in generator order.
    pub fn generate_with_cap(generators: &[Rotation], tol: GroupTolerance, cap: usize) -> Result<Self> {
        for g in generators {
            Rotation::from_matrix(g.matrix)?;
        }
        let mut elements = vec![Rotation::identity()];
        let mut index = ElementIndex::new(tol.match_tol);
        index.insert(3.0, 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            for s in generators {
                let product = s.compose(&elements[k]);
                if index.find(&elements, &product).is_none() {
                    if elements.len() >= cap {
                        return Err(Error::NonFiniteClosure { cap });
                    }
                    let id = elements.len();
                    index.insert(product.matrix.trace(), id);
                    elements.push(product);
                    queue.push_back(id);
                }
            }
        }

        let n = elements.len();
        let mut mult = vec![0usize; n * n];
        for i in 0..n {
            for j in 0..n {
                let product = elements[i].compose(&elements[j]);
                mult[i * n + j] = index.find(&elements, &product).ok_or(Error::NotClosed(i, j))?;
            }
        }
        Self::from_tables(elements, mult)
    }

    /// Assemble a group from elements and a multiplication table, deriving the
    /// inverse table and conjugacy classes.
    fn from_tables(elements: Vec<Rotation>, mult: Vec<usize>) -> Result<Self> {
        let n = elements.len();
        let identity = (0..n)
            .find(|&e| (0..n).all(|j| mult[e * n + j] == j && mult[j * n + e] == j))
            .ok_or_else(|| Error::InvalidParameter("multiplication table has no identity".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for i in 0..n {
            for j in 0..n {
                if mult[i * n + j] == identity {
                    inverse[i] = j;
                    break;
                }
            }
            if inverse[i] == usize::MAX {
                return Err(Error::InvalidParameter(format!("element {i} has no inverse")));
            }
        }
        let mut group = FiniteGroup { elements, identity, mult, inverse, classes: Vec::new(), class_of: Vec::new() };
        group.classes = group.compute_classes();
        group.class_of = vec![0; n];
        for (c, class) in group.classes.iter().enumerate() {
            for &m in &class.members {
                group.class_of[m] = c;
            }
        }
        Ok(group)
    }

    fn compute_classes(&self) -> Vec<ConjugacyClass> {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut classes = Vec::new();
        for x in 0..n {
            if seen[x] {
                continue;
            }
            let mut members: Vec<usize> = (0..n).map(|g| self.mul(self.mul(g, x), self.inverse[g])).collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                seen[m] = true;
            }
            let angle = self.elements[x].angle();
            classes.push(ConjugacyClass { members, angle });
        }
        classes.sort_by(|a, b| a.size().cmp(&b.size()).then(a.angle.total_cmp(&b.angle)).then(a.members[0].cmp(&b.members[0])));
        classes
    }

    /// The proper icosahedral group `I_p`, generated by the 5-fold rotation
    /// about `(0, 1, φ)` and the half-turn about the y axis; the angle census
    /// is checked against `{0¹, (2π/5)¹², (4π/5)¹², (2π/3)²⁰, π¹⁵}`.
    pub fn icosahedral() -> Result<Self> {
        let c5 = Rotation::from_axis_angle(Vector3::new(0.0, 1.0, PHI), 2.0 * PI / 5.0)?;
        let c2 = Rotation::from_axis_angle(Vector3::new(0.0, PHI, 0.0), PI)?;
        let group = Self::generate(&[c5, c2], GroupTolerance::default())?;
        group.check_icosahedral_census()?;
        Ok(group)
    }

    /// Cyclic group of order `n` about `axis`.
    pub fn cyclic(n: usize, axis: Vector3<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("cyclic group order must be positive".into()));
        }
        let r = Rotation::from_axis_angle(axis, 2.0 * PI / n as f64)?;
        Self::generate(&[r], GroupTolerance::default())
    }

    /// Verify order 60 and the rotation-angle multiset of `I_p`.
    pub fn check_icosahedral_census(&self) -> Result<()> {
        if self.order() != 60 {
            return Err(Error::NotIcosahedral(format!("order {} != 60", self.order())));
        }
        let expected = [(0.0, 1), (2.0 * PI / 5.0, 12), (4.0 * PI / 5.0, 12), (2.0 * PI / 3.0, 20), (PI, 15)];
        for (angle, count) in expected {
            let found = self.elements.iter().filter(|r| (r.angle() - angle).abs() < 1e-8).count();
            if found != count {
                return Err(Error::NotIcosahedral(format!("{found} elements at angle {angle:.6}, expected {count}")));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn elements(&self) -> &[Rotation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Rotation {
        &self.elements[i]
    }

    /// Index of the product `i · j`.
    #[inline]
    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.mult[i * self.elements.len() + j]
    }

    #[inline]
    pub fn inv(&self, i: usize) -> usize {
        self.inverse[i]
    }

    /// Index of `i^k` by repeated table lookup.
    pub fn pow(&self, i: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, i))
    }

    pub fn element_order(&self, i: usize) -> usize {
        let mut x = i;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, i);
            k += 1;
        }
        k
    }

    pub fn mult_table(&self) -> Vec<Vec<usize>> {
        self.mult.chunks(self.order()).map(|r| r.to_vec()).collect()
    }

    pub fn inverse_table(&self) -> &[usize] {
        &self.inverse
    }

    /// Conjugacy classes sorted by (size, rotation angle).
    pub fn classes(&self) -> &[ConjugacyClass] {
        &self.classes
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i]
    }

    /// Look up a rotation in the element list.
    pub fn index_of(&self, r: &Rotation, tol: GroupTolerance) -> Option<usize> {
        self.elements.iter().position(|e| e.distance(r) < tol.match_tol)
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.order() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, order: self.order() })
        }
    }

    /// Whether `(c5, c2)` satisfies `C5⁵ = C2² = (C5 C2)³ = e` with the
    /// stated element orders exactly 5, 2 and 3.
    pub fn satisfies_standard_relations(&self, c5: usize, c2: usize) -> bool {
        c5 < self.order()
            && c2 < self.order()
            && self.element_order(c5) == 5
            && self.element_order(c2) == 2
            && self.element_order(self.mul(c5, c2)) == 3
    }

    /// Lowest-index pair `(C5, C2)` satisfying the standard presentation,
    /// found by exhaustive search over element pairs.
    pub fn find_standard_generators(&self) -> Result<StandardGenerators> {
        if self.order() != 60 {
            return Err(Error::NotIcosahedral(format!("order {} != 60", self.order())));
        }
        let orders: Vec<usize> = (0..self.order()).map(|i| self.element_order(i)).collect();
        for c5 in (0..self.order()).filter(|&i| orders[i] == 5) {
            for c2 in (0..self.order()).filter(|&i| orders[i] == 2) {
                if orders[self.mul(c5, c2)] == 3 {
                    return Ok(StandardGenerators { c5, c2 });
                }
            }
        }
        Err(Error::NotIcosahedral("no pair satisfies the standard relations".into()))
    }

    /// Relabel elements: new index `k` holds old element `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order();
        let mut seen = vec![false; n];
        if perm.len() != n || !perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter("relabeling is not a permutation".into()));
        }
        let mut new_of_old = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            new_of_old[p] = k;
        }
        let elements = perm.iter().map(|&p| self.elements[p]).collect();
        let mut mult = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                mult[a * n + b] = new_of_old[self.mul(perm[a], perm[b])];
            }
        }
        Self::from_tables(elements, mult)
    }

    pub fn to_json(&self) -> GroupJson {
        GroupJson {
            order: self.order(),
            identity_index: self.identity,
            elements: self.elements.iter().map(Rotation::to_row_major).collect(),
            mult_table: self.mult_table(),
            inverse_table: self.inverse.clone(),
            classes: self.classes.clone(),
        }
    }
}

/// JSON export of a group: row-major matrices and integer tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub identity_index: usize,
    pub elements: Vec<[f64; 9]>,
    pub mult_table: Vec<Vec<usize>>,
    pub inverse_table: Vec<usize>,
    pub classes: Vec<ConjugacyClass>,
}
