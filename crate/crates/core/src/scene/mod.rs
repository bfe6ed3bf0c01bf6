//! World representation: blocks, table, frame tree, problems and the
//! support-graph abstraction shared by the planner and the stability stage.
//!
//! Convention: z up, table surface at z = 0, table spots along the x axis,
//! y is depth. A block's local frame has x = width, y = depth, z = height,
//! and its pose names the box center.

pub mod contact;
pub mod geometry;
pub mod io;
pub mod poses;

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{Point3, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::config::ContactParams;
use geometry::Obb;

pub use contact::{contact_analysis, derive_support_graph, primary_supporters, ContactInfo};
pub use io::{canonical_problem_set, load_problem_set, parse_problem_set, ProblemSet};

/// Symbolic name of one of the movable blocks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub String);

impl BlockId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Any object a block can rest on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObjectId {
    Table,
    Block(BlockId),
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectId::Table => f.write_str("table"),
            ObjectId::Block(b) => f.write_str(b.as_str()),
        }
    }
}

/// One of the two robot hands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Actuator {
    #[serde(rename = "handL")]
    HandL,
    #[serde(rename = "handR")]
    HandR,
}

impl Actuator {
    pub const BOTH: [Actuator; 2] = [Actuator::HandL, Actuator::HandR];

    pub fn index(self) -> usize {
        match self {
            Actuator::HandL => 0,
            Actuator::HandR => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Actuator::HandL => "handL",
            Actuator::HandR => "handR",
        }
    }
}

impl fmt::Display for Actuator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Node of the frame tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Table,
    Hand(Actuator),
    Block(BlockId),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Table => f.write_str("table"),
            NodeId::Hand(a) => f.write_str(a.name()),
            NodeId::Block(b) => f.write_str(b.as_str()),
        }
    }
}

impl From<&ObjectId> for NodeId {
    fn from(o: &ObjectId) -> Self {
        match o {
            ObjectId::Table => NodeId::Table,
            ObjectId::Block(b) => NodeId::Block(b.clone()),
        }
    }
}

/// Rigid transform: position plus unit quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation,
        }
    }

    /// Builds a pose from raw components, rejecting quaternions whose norm
    /// deviates from 1 by more than 1e-9 before renormalizing.
    pub fn from_parts(position: [f64; 3], wxyz: [f64; 4]) -> Result<Self, SceneError> {
        let q = Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
        let norm = q.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SceneError::Validation {
                problem: None,
                field: "orientation".into(),
                message: format!("quaternion norm {norm} deviates from 1 by more than 1e-9"),
            });
        }
        Ok(Self {
            position: Vector3::new(position[0], position[1], position[2]),
            orientation: UnitQuaternion::from_quaternion(q),
        })
    }

    /// Composition: applies `child` in this pose's frame.
    pub fn compose(&self, child: &Pose) -> Pose {
        Pose {
            position: self.position + self.orientation * child.position,
            orientation: self.orientation * child.orientation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv_rot = self.orientation.inverse();
        Pose {
            position: -(inv_rot * self.position),
            orientation: inv_rot,
        }
    }

    pub fn point(&self) -> Point3<f64> {
        Point3::from(self.position)
    }

    /// Rotation angle between two poses' orientations (rad).
    pub fn angle_to(&self, other: &Pose) -> f64 {
        self.orientation.angle_to(&other.orientation)
    }

    /// True when both position and orientation agree within tolerances.
    pub fn approx_eq(&self, other: &Pose, pos_tol: f64, rot_tol: f64) -> bool {
        (self.position - other.position).norm() <= pos_tol && self.angle_to(other) <= rot_tol
    }
}

/// Shape and mass of a movable block. Dims are (height, width, depth).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub id: BlockId,
    pub color: Option<String>,
    pub dims: [f64; 3],
    pub mass: f64,
}

impl BlockSpec {
    pub const DEFAULT_DIMS: [f64; 3] = [0.10, 0.05, 0.05];
    pub const DEFAULT_MASS: f64 = 0.05;

    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: BlockId::new(id),
            color: None,
            dims: Self::DEFAULT_DIMS,
            mass: Self::DEFAULT_MASS,
        }
    }

    pub fn with_color(mut self, color: impl Into<String>) -> Self {
        self.color = Some(color.into());
        self
    }

    pub fn height(&self) -> f64 {
        self.dims[0]
    }
    pub fn width(&self) -> f64 {
        self.dims[1]
    }
    pub fn depth(&self) -> f64 {
        self.dims[2]
    }

    fn validate(&self) -> Result<(), SceneError> {
        if self.dims.iter().any(|&d| d <= 0.0) {
            return Err(SceneError::Validation {
                problem: None,
                field: format!("blocks.{}.dims", self.id),
                message: "dims must be strictly positive".into(),
            });
        }
        if self.mass <= 0.0 {
            return Err(SceneError::Validation {
                problem: None,
                field: format!("blocks.{}.mass", self.id),
                message: "mass must be strictly positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct FrameNode {
    parent: NodeId,
    rel: Pose,
}

/// Parent-relative frame tree rooted at the table. Hand frames are parented
/// to the table; blocks may be parented to the table, another block, or a
/// hand.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTree {
    nodes: BTreeMap<NodeId, FrameNode>,
}

impl Default for FrameTree {
    fn default() -> Self {
        Self::new()
    }
}

impl FrameTree {
    /// A tree containing the table root and the two hand frames.
    pub fn new() -> Self {
        let mut nodes = BTreeMap::new();
        for hand in Actuator::BOTH {
            nodes.insert(
                NodeId::Hand(hand),
                FrameNode {
                    parent: NodeId::Table,
                    rel: Pose::identity(),
                },
            );
        }
        Self { nodes }
    }

    pub fn contains(&self, node: &NodeId) -> bool {
        matches!(node, NodeId::Table) || self.nodes.contains_key(node)
    }

    pub fn parent(&self, node: &NodeId) -> Option<&NodeId> {
        self.nodes.get(node).map(|n| &n.parent)
    }

    pub fn relative_pose(&self, node: &NodeId) -> Option<&Pose> {
        self.nodes.get(node).map(|n| &n.rel)
    }

    /// Inserts or re-targets a node with a parent-relative pose. Rejects
    /// unknown parents and parent chains that would cycle.
    pub fn set_node(&mut self, node: NodeId, parent: NodeId, rel: Pose) -> Result<(), SceneError> {
        if node == NodeId::Table {
            return Err(SceneError::Validation {
                problem: None,
                field: "frame_tree".into(),
                message: "the table is the fixed root".into(),
            });
        }
        if !self.contains(&parent) {
            return Err(SceneError::UnknownNode(parent.to_string()));
        }
        // Walking up from the new parent must not pass through `node`.
        let mut cur = parent.clone();
        let mut hops = 0;
        while cur != NodeId::Table {
            if cur == node {
                return Err(SceneError::Validation {
                    problem: None,
                    field: "frame_tree".into(),
                    message: format!("reparenting {node} under {parent} would create a cycle"),
                });
            }
            cur = self
                .parent(&cur)
                .cloned()
                .ok_or_else(|| SceneError::UnknownNode(cur.to_string()))?;
            hops += 1;
            if hops > self.nodes.len() + 2 {
                return Err(SceneError::Validation {
                    problem: None,
                    field: "frame_tree".into(),
                    message: "parent chain does not reach the table".into(),
                });
            }
        }
        self.nodes.insert(node, FrameNode { parent, rel });
        Ok(())
    }

    /// Composition of relative poses along the path from the root.
    pub fn world_pose(&self, node: &NodeId) -> Result<Pose, SceneError> {
        if *node == NodeId::Table {
            return Ok(Pose::identity());
        }
        let mut chain = Vec::new();
        let mut cur = node.clone();
        while cur != NodeId::Table {
            let n = self
                .nodes
                .get(&cur)
                .ok_or_else(|| SceneError::UnknownNode(cur.to_string()))?;
            chain.push(n.rel);
            cur = n.parent.clone();
            if chain.len() > self.nodes.len() + 2 {
                return Err(SceneError::Validation {
                    problem: None,
                    field: "frame_tree".into(),
                    message: format!("cycle detected above {node}"),
                });
            }
        }
        let mut pose = Pose::identity();
        for rel in chain.iter().rev() {
            pose = pose.compose(rel);
        }
        Ok(pose)
    }

    /// Moves `node` under `new_parent` while keeping its world pose.
    pub fn reparent_keep_world(
        &mut self,
        node: &NodeId,
        new_parent: NodeId,
    ) -> Result<(), SceneError> {
        let world = self.world_pose(node)?;
        let parent_world = self.world_pose(&new_parent)?;
        let rel = parent_world.inverse().compose(&world);
        self.set_node(node.clone(), new_parent, rel)
    }

    /// Direct children, in key order.
    pub fn children(&self, node: &NodeId) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.parent == *node)
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Transitive descendants, in breadth-first key order.
    pub fn descendants(&self, node: &NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut frontier = self.children(node);
        while let Some(next) = frontier.pop() {
            out.push(next.clone());
            frontier.extend(self.children(&next));
        }
        out.sort();
        out
    }

    /// True when the node's chain to the root passes through a hand frame.
    pub fn rides_hand(&self, node: &NodeId) -> bool {
        let mut cur = node.clone();
        while let Some(parent) = self.parent(&cur) {
            if matches!(parent, NodeId::Hand(_)) {
                return true;
            }
            cur = parent.clone();
        }
        false
    }

    pub fn block_nodes(&self) -> impl Iterator<Item = (&NodeId, &NodeId, &Pose)> {
        self.nodes
            .iter()
            .filter(|(id, _)| matches!(id, NodeId::Block(_)))
            .map(|(id, n)| (id, &n.parent, &n.rel))
    }
}

/// The three designated table spots and the legal region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableLayout {
    /// x-coordinates on the table surface (m).
    pub spots: Vec<f64>,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl TableLayout {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.spots.len() != 3 {
            return Err(SceneError::Validation {
                problem: None,
                field: "layout.spots".into(),
                message: format!("expected 3 spots, got {}", self.spots.len()),
            });
        }
        for (i, a) in self.spots.iter().enumerate() {
            for b in self.spots.iter().skip(i + 1) {
                if (a - b).abs() < 1e-9 {
                    return Err(SceneError::Validation {
                        problem: None,
                        field: "layout.spots".into(),
                        message: "spots must be distinct".into(),
                    });
                }
            }
            if *a < self.boundary.min[0] || *a > self.boundary.max[0] {
                return Err(SceneError::Validation {
                    problem: None,
                    field: "layout.spots".into(),
                    message: format!("spot {i} at x={a} lies outside the boundary"),
                });
            }
        }
        Ok(())
    }
}

impl Default for TableLayout {
    fn default() -> Self {
        Self {
            spots: vec![-0.15, 0.0, 0.15],
            boundary: Boundary {
                min: [-0.30, -0.15],
                max: [0.30, 0.15],
            },
        }
    }
}

/// Full poses of the movable blocks, stored parent-relative.
#[derive(Debug, Clone, PartialEq)]
pub struct StackConfiguration {
    pub blocks: Vec<BlockSpec>,
    pub tree: FrameTree,
}

impl StackConfiguration {
    pub fn new(blocks: Vec<BlockSpec>) -> Self {
        Self {
            blocks,
            tree: FrameTree::new(),
        }
    }

    pub fn spec(&self, id: &BlockId) -> Option<&BlockSpec> {
        self.blocks.iter().find(|b| &b.id == id)
    }

    pub fn block_ids(&self) -> impl Iterator<Item = &BlockId> {
        self.blocks.iter().map(|b| &b.id)
    }

    /// Places a block (parent-relative pose).
    pub fn place(
        &mut self,
        block: &BlockId,
        parent: NodeId,
        rel: Pose,
    ) -> Result<(), SceneError> {
        if self.spec(block).is_none() {
            return Err(SceneError::UnknownNode(block.to_string()));
        }
        self.tree.set_node(NodeId::Block(block.clone()), parent, rel)
    }

    pub fn world_pose(&self, block: &BlockId) -> Result<Pose, SceneError> {
        self.tree.world_pose(&NodeId::Block(block.clone()))
    }

    pub fn world_obb(&self, block: &BlockId) -> Result<Obb, SceneError> {
        let spec = self
            .spec(block)
            .ok_or_else(|| SceneError::UnknownNode(block.to_string()))?;
        let pose = self.world_pose(block)?;
        Ok(Obb::from_pose_dims(&pose, spec.dims))
    }

    /// Blocks currently held (directly or riding a held block).
    pub fn held_blocks(&self) -> BTreeSet<BlockId> {
        self.blocks
            .iter()
            .filter(|b| {
                let node = NodeId::Block(b.id.clone());
                matches!(self.tree.parent(&node), Some(NodeId::Hand(_)))
                    || self.tree.rides_hand(&node)
            })
            .map(|b| b.id.clone())
            .collect()
    }

    /// Checks type invariants: distinct positive-dim blocks, every placed
    /// block above the table, no interpenetration.
    pub fn validate(&self, contact: &ContactParams) -> Result<(), SceneError> {
        let mut seen = BTreeSet::new();
        for b in &self.blocks {
            b.validate()?;
            if !seen.insert(&b.id) {
                return Err(SceneError::Validation {
                    problem: None,
                    field: format!("blocks.{}", b.id),
                    message: "duplicate block id".into(),
                });
            }
        }
        let held = self.held_blocks();
        let mut obbs: Vec<(BlockId, Obb)> = Vec::new();
        for b in &self.blocks {
            if held.contains(&b.id) {
                continue;
            }
            let obb = self.world_obb(&b.id)?;
            if obb.min_z() < -1e-9 {
                return Err(SceneError::Validation {
                    problem: None,
                    field: format!("blocks.{}.position", b.id),
                    message: format!("block {} extends below the table surface", b.id),
                });
            }
            obbs.push((b.id.clone(), obb));
        }
        for i in 0..obbs.len() {
            for j in i + 1..obbs.len() {
                let vol = obbs[i].1.overlap_volume(&obbs[j].1);
                if vol > contact.max_overlap_volume {
                    return Err(SceneError::Validation {
                        problem: None,
                        field: format!("blocks.{}", obbs[i].0),
                        message: format!(
                            "blocks {} and {} interpenetrate (overlap volume {vol:.3e} m^3)",
                            obbs[i].0, obbs[j].0
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A re-configuration task: initial and target stack over the same blocks.
#[derive(Debug, Clone)]
pub struct Problem {
    pub id: u32,
    pub initial: StackConfiguration,
    pub target: StackConfiguration,
    pub layout: TableLayout,
}

impl Problem {
    pub fn validate(&self, contact: &ContactParams) -> Result<(), SceneError> {
        let attach = |e: SceneError| e.with_problem(self.id);
        self.layout.validate().map_err(attach)?;
        self.initial.validate(contact).map_err(attach)?;
        self.target.validate(contact).map_err(attach)?;
        if self.initial.blocks != self.target.blocks {
            return Err(SceneError::Validation {
                problem: Some(self.id),
                field: "blocks".into(),
                message: "initial and target must contain the same block specs".into(),
            });
        }
        for config in [&self.initial, &self.target] {
            let graph = derive_support_graph(config, contact);
            graph.validate(config).map_err(attach)?;
        }
        Ok(())
    }
}

/// Which object each block rests on. A block may have several supporters
/// (leaning poses).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportGraph {
    pub edges: BTreeSet<(BlockId, ObjectId)>,
}

impl SupportGraph {
    pub fn supporters(&self, block: &BlockId) -> Vec<&ObjectId> {
        self.edges
            .iter()
            .filter(|(b, _)| b == block)
            .map(|(_, s)| s)
            .collect()
    }

    /// Acyclic and every block grounded through supporter chains.
    pub fn validate(&self, config: &StackConfiguration) -> Result<(), SceneError> {
        // Grounded: iterate until fixpoint.
        let mut grounded: BTreeSet<&BlockId> = BTreeSet::new();
        loop {
            let before = grounded.len();
            for (b, s) in &self.edges {
                match s {
                    ObjectId::Table => {
                        grounded.insert(b);
                    }
                    ObjectId::Block(other) => {
                        if grounded.contains(other) {
                            grounded.insert(b);
                        }
                    }
                }
            }
            if grounded.len() == before {
                break;
            }
        }
        let held = config.held_blocks();
        for b in config.block_ids() {
            if held.contains(b) {
                continue;
            }
            if !grounded.contains(b) {
                return Err(SceneError::Validation {
                    problem: None,
                    field: format!("blocks.{b}"),
                    message: format!("block {b} is not supported from the table (floating)"),
                });
            }
        }
        // Acyclicity follows from groundedness when every block is grounded,
        // but check explicitly so partially-grounded graphs are rejected too.
        let mut visiting = BTreeSet::new();
        let mut done = BTreeSet::new();
        for (start, _) in &self.edges {
            if !self.dag_visit(start, &mut visiting, &mut done) {
                return Err(SceneError::Validation {
                    problem: None,
                    field: "support_graph".into(),
                    message: format!("support cycle involving {start}"),
                });
            }
        }
        Ok(())
    }

    fn dag_visit(
        &self,
        node: &BlockId,
        visiting: &mut BTreeSet<BlockId>,
        done: &mut BTreeSet<BlockId>,
    ) -> bool {
        if done.contains(node) {
            return true;
        }
        if !visiting.insert(node.clone()) {
            return false;
        }
        for (b, s) in &self.edges {
            if b == node {
                if let ObjectId::Block(next) = s {
                    if !self.dag_visit(next, visiting, done) {
                        return false;
                    }
                }
            }
        }
        visiting.remove(node);
        done.insert(node.clone());
        true
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("problem file parse error: {0}")]
    Parse(String),
    #[error("validation failed{}: {field}: {message}", problem.map(|p| format!(" (problem {p})")).unwrap_or_default())]
    Validation {
        problem: Option<u32>,
        field: String,
        message: String,
    },
    #[error("unknown node {0}")]
    UnknownNode(String),
}

impl SceneError {
    pub fn with_problem(mut self, id: u32) -> Self {
        if let SceneError::Validation { problem, .. } = &mut self {
            problem.get_or_insert(id);
        }
        self
    }
}
