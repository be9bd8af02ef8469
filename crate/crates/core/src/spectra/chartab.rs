//! Character tables and representation-ring arithmetic.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::c;
use crate::rotation::{FiniteGroup, PHI};

/// Column of a character table, identified in a group by (size, angle).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassInfo {
    pub label: String,
    pub size: usize,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Irrep {
    pub label: String,
    pub dim: usize,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterTable {
    pub classes: Vec<ClassInfo>,
    pub irreps: Vec<Irrep>,
}

/// The character table of `I_p`: columns `E, 12C5, 12C5², 20C3, 15C2`,
/// rows `A_g, T_1g, T_2g, G_g, H_g`.
pub fn icosahedral_character_table() -> CharacterTable {
    let class = |label: &str, size, angle| ClassInfo { label: label.into(), size, angle };
    let irrep = |label: &str, values: [f64; 5]| Irrep {
        label: label.into(),
        dim: values[0] as usize,
        values: values.iter().map(|&v| c(v)).collect(),
    };
    CharacterTable {
        classes: vec![
            class("E", 1, 0.0),
            class("12C5", 12, 2.0 * PI / 5.0),
            class("12C5^2", 12, 4.0 * PI / 5.0),
            class("20C3", 20, 2.0 * PI / 3.0),
            class("15C2", 15, PI),
        ],
        irreps: vec![
            irrep("Ag", [1.0, 1.0, 1.0, 1.0, 1.0]),
            irrep("T1g", [3.0, PHI, 1.0 - PHI, 0.0, -1.0]),
            irrep("T2g", [3.0, 1.0 - PHI, PHI, 0.0, -1.0]),
            irrep("Gg", [4.0, -1.0, -1.0, 1.0, 0.0]),
            irrep("Hg", [5.0, 0.0, 0.0, -1.0, 1.0]),
        ],
    }
}

impl CharacterTable {
    pub fn group_order(&self) -> usize {
        self.classes.iter().map(|c| c.size).sum()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.irreps.iter().map(|i| i.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.irreps.iter().map(|i| i.dim).collect()
    }

    /// Index of an irrep by label. Underscores and a trailing parity `g`
    /// are ignored, so `Hg`, `H_g` and `H` all resolve.
    pub fn irrep_index(&self, label: &str) -> Result<usize> {
        fn norm(s: &str) -> String {
            let s: String = s.chars().filter(|&c| c != '_').collect();
            s.strip_suffix('g').unwrap_or(&s).to_ascii_uppercase()
        }
        let key = norm(label);
        self.irreps.iter().position(|i| norm(&i.label) == key).ok_or_else(|| Error::UnknownIrrep(label.to_string()))
    }

    /// `(1/|Γ|) Σ_c |c| χ_a(c) conj(χ_b(c))`.
    pub fn inner_product(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let total: Complex64 = self.classes.iter().zip(a.iter().zip(b)).map(|(cl, (x, y))| x * y.conj() * cl.size as f64).sum();
        total / self.group_order() as f64
    }

    /// Largest deviation of the row Gram matrix from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.irreps.iter().enumerate() {
            for (j, b) in self.irreps.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.inner_product(&a.values, &b.values) - target).norm());
            }
        }
        worst
    }

    /// For each table column, the index of the matching class of `group`.
    pub fn align(&self, group: &FiniteGroup) -> Result<Vec<usize>> {
        if group.order() != self.group_order() {
            return Err(Error::TableMismatch(format!("group order {} vs table order {}", group.order(), self.group_order())));
        }
        let mut used = vec![false; group.classes().len()];
        let mut map = Vec::with_capacity(self.classes.len());
        for info in &self.classes {
            let k = group
                .classes()
                .iter()
                .enumerate()
                .position(|(k, cl)| !used[k] && cl.size() == info.size && (cl.angle - info.angle).abs() < 1e-8)
                .ok_or_else(|| Error::TableMismatch(format!("no group class matches column {}", info.label)))?;
            used[k] = true;
            map.push(k);
        }
        if used.iter().any(|u| !u) {
            return Err(Error::TableMismatch("group has classes missing from the table".into()));
        }
        Ok(map)
    }

    /// `χ(γ)` for every element of `group`.
    pub fn character_on_elements(&self, group: &FiniteGroup, irrep: usize) -> Result<Vec<Complex64>> {
        let map = self.align(group)?;
        let mut column_of_class = vec![0; map.len()];
        for (col, &k) in map.iter().enumerate() {
            column_of_class[k] = col;
        }
        let values = &self.irreps[irrep].values;
        Ok((0..group.order()).map(|g| values[column_of_class[group.class_of(g)]]).collect())
    }

    /// Reorder per-group-class values into table column order.
    pub fn to_table_order(&self, group: &FiniteGroup, per_group_class: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.align(group)?.into_iter().map(|k| per_group_class[k]).collect())
    }

    /// Irrep whose row matches `values` (table column order) within `tol`.
    pub fn identify(&self, values: &[Complex64], tol: f64) -> Option<usize> {
        self.irreps.iter().position(|ir| ir.values.iter().zip(values).all(|(a, b)| (a - b).norm() <= tol))
    }

    /// Multiplicities of each irrep in `χ_a ⊗ χ_b`.
    pub fn tensor_multiplicities(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        let n = self.irreps.len();
        if a >= n || b >= n {
            return Err(Error::UnknownIrrep(format!("index {}", a.max(b))));
        }
        let product: Vec<Complex64> = self.irreps[a].values.iter().zip(&self.irreps[b].values).map(|(x, y)| x * y).collect();
        self.irreps
            .iter()
            .map(|ir| {
                let m = self.inner_product(&product, &ir.values);
                let rounded = m.re.round();
                if (m - c(rounded)).norm() > 1e-9 || rounded < 0.0 {
                    Err(Error::NonIntegerPairing { label: ir.label.clone(), value: m.re })
                } else {
                    Ok(rounded as usize)
                }
            })
            .collect()
    }
}
