//! Coarse constraint construction: corner value constraints plus optional
//! arithmetic averages over edge and face globs, one row per solution
//! component per glob.

use crate::corners::CornerSet;
use crate::interface::{GlobKind, InterfaceClassification};

use super::BddcError;

/// Which continuity constraints span the coarse space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMode {
    /// Corners only.
    C,
    /// Corners plus edge averages.
    CE,
    /// Corners plus face averages.
    CF,
    /// Corners plus edge and face averages.
    CEF,
}

impl ConstraintMode {
    pub fn includes_edges(self) -> bool {
        matches!(self, ConstraintMode::CE | ConstraintMode::CEF)
    }

    pub fn includes_faces(self) -> bool {
        matches!(self, ConstraintMode::CF | ConstraintMode::CEF)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintMode::C => "c",
            ConstraintMode::CE => "ce",
            ConstraintMode::CF => "cf",
            ConstraintMode::CEF => "cef",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "c" => Some(ConstraintMode::C),
            "ce" => Some(ConstraintMode::CE),
            "cf" => Some(ConstraintMode::CF),
            "cef" => Some(ConstraintMode::CEF),
            _ => None,
        }
    }
}

/// Arithmetic average over one glob for one solution component. Weights
/// are uniform over the glob's free dofs of that component, summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AverageRow {
    pub glob: usize,
    pub component: usize,
    pub nodes: Vec<usize>,
}

/// Coarse degrees of freedom: explicit dof fixings at corners and
/// multiplier-enforced average rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    pub mode: ConstraintMode,
    pub dofs_per_node: usize,
    /// Corner nodes ascending; each contributes one coarse dof per free
    /// solution component.
    pub corner_nodes: Vec<usize>,
    /// Average rows ordered by (glob, component), over post-promotion
    /// glob nodes so corners never appear in a row.
    pub averages: Vec<AverageRow>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.corner_nodes.is_empty() && self.averages.is_empty()
    }
}

/// Build the constraint set from a classification whose corners have been
/// promoted (glob nodes already exclude every corner).
pub fn build_constraints(
    cls: &InterfaceClassification,
    cs: &CornerSet,
    mode: ConstraintMode,
    dofs_per_node: usize,
) -> Result<ConstraintSet, BddcError> {
    if !cls.is_classified() {
        return Err(BddcError::Inconsistent("classification has not been built".into()));
    }
    if cls.corners() != &cs.corners {
        return Err(BddcError::Inconsistent(
            "corner set does not match the classification; promote corners first".into(),
        ));
    }
    let corner_nodes: Vec<usize> = cs.corners.iter().copied().collect();
    let mut averages = Vec::new();
    for (gi, g) in cls.globs().iter().enumerate() {
        let wanted = match g.kind {
            GlobKind::Edge => mode.includes_edges(),
            GlobKind::Face => mode.includes_faces(),
            GlobKind::Vertex => false,
        };
        if !wanted || g.nodes.is_empty() {
            continue;
        }
        let nodes: Vec<usize> = g.nodes.iter().copied().collect();
        for component in 0..dofs_per_node {
            averages.push(AverageRow { glob: gi, component, nodes: nodes.clone() });
        }
    }
    Ok(ConstraintSet { mode, dofs_per_node, corner_nodes, averages })
}
