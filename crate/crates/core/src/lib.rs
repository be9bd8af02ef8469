//! Finite rotation groups, their Cayley graphs and group algebras, and the
//! spectral tools used to classify symmetric dynamical matrices by their
//! irreducible-representation content.
//!
//! The pipeline: build a point group ([`rotation`]), its Cayley graph
//! ([`cayley`]), realize models as left-regular images of group-algebra
//! elements ([`algebra`]), diagonalize and label the levels ([`spectra`]),
//! then construct fundamental models ([`models`]) and interpolate between
//! them ([`flows`]). [`molecule`] covers the physical layer: orbit lattices
//! of seed poses and driven oscillations.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cayley;
pub mod error;
pub mod flows;
pub mod linalg;
pub mod models;
pub mod molecule;
pub mod par;
pub mod rotation;
pub mod spectra;

pub use algebra::{translation_unitary, AlgebraElement, RegularOperator, Side};
pub use cayley::{adjacency_element, CayleyGraph, MetricChoice};
pub use error::{Error, Result};
pub use par::Execution;
pub use rotation::{FiniteGroup, GroupTolerance, Rotation, StandardGenerators};
pub use spectra::{icosahedral_character_table, CharacterTable, SpectralData};
