//! Symbolic planning over Grasp/Place/Fix move sequences.
//!
//! The planner abstracts a configuration to its support graph: each block is
//! `on` some object or `in` a hand, and a Fix pins a block at its final
//! target placement. Enumeration searches untimed move sequences, then a
//! greedy scheduler assigns concurrent integer timestamps whose maximum is
//! the plan's complexity score `s`.

mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scene::{Actuator, BlockId, ObjectId};

pub use search::{
    apply_move, enumerate_plans, legal_moves, EnumerateOptions, Hands, Mode, PlanSet,
    PlannerProblem, SearchKind, SymbolicState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    Grasp,
    Place,
    Fix,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::Grasp => "grasp",
            MoveKind::Place => "place",
            MoveKind::Fix => "fix",
        })
    }
}

/// An untimed move. Grasps carry no support; Place and Fix name exactly one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub object: BlockId,
    pub support: Option<ObjectId>,
    pub actuator: Actuator,
}

impl Move {
    pub fn grasp(object: impl Into<String>, actuator: Actuator) -> Self {
        Self {
            kind: MoveKind::Grasp,
            object: BlockId::new(object),
            support: None,
            actuator,
        }
    }

    pub fn place(object: impl Into<String>, support: ObjectId, actuator: Actuator) -> Self {
        Self {
            kind: MoveKind::Place,
            object: BlockId::new(object),
            support: Some(support),
            actuator,
        }
    }

    pub fn fix(object: impl Into<String>, support: ObjectId, actuator: Actuator) -> Self {
        Self {
            kind: MoveKind::Fix,
            object: BlockId::new(object),
            support: Some(support),
            actuator,
        }
    }

    pub fn is_placement(&self) -> bool {
        matches!(self.kind, MoveKind::Place | MoveKind::Fix)
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.support {
            Some(s) => write!(f, "{}({}, {}, {})", self.kind, self.object, s, self.actuator),
            None => write!(f, "{}({}, {})", self.kind, self.object, self.actuator),
        }
    }
}

/// A move with its scheduled discrete execution time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedMove {
    #[serde(flatten)]
    pub mv: Move,
    pub timestamp: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Handedness {
    OneHand,
    TwoHand,
}

/// A timestamped goal-reaching move sequence with complexity score `s`
/// (the makespan: the largest timestamp).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicPlan {
    pub moves: Vec<TimedMove>,
    pub handedness: Handedness,
    pub s: u32,
}

impl SymbolicPlan {
    pub fn untimed(&self) -> Vec<Move> {
        self.moves.iter().map(|m| m.mv.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Moves grouped by timestamp 1..=s, in sequence order within a step.
    pub fn steps(&self) -> Vec<Vec<&TimedMove>> {
        let mut out: Vec<Vec<&TimedMove>> = (0..self.s).map(|_| Vec::new()).collect();
        for m in &self.moves {
            out[(m.timestamp - 1) as usize].push(m);
        }
        out
    }
}

/// Dedup key: the untimed sequence of (kind, object, support, actuator)
/// tuples. Two plans are duplicates iff their keys are equal.
pub type CanonicalKey = Vec<(MoveKind, BlockId, Option<ObjectId>, Actuator)>;

pub fn canonical_form(plan: &SymbolicPlan) -> CanonicalKey {
    canonical_form_of(&plan.untimed())
}

pub fn canonical_form_of(moves: &[Move]) -> CanonicalKey {
    moves
        .iter()
        .map(|m| {
            (
                m.kind,
                m.object.clone(),
                m.support.clone(),
                m.actuator,
            )
        })
        .collect()
}

/// Greedy earliest-start schedule. Each move gets the smallest timestamp
/// at least 1 that (a) exceeds every earlier move by the same actuator,
/// (b) exceeds every earlier move of the same block and, for placements on a
/// movable support, that support's most recent placement, and (c) shares no
/// timestamp with a move of the same actuator or block.
pub fn schedule_timestamps(moves: &[Move]) -> Vec<u32> {
    let mut ts: Vec<u32> = Vec::with_capacity(moves.len());
    for (i, mv) in moves.iter().enumerate() {
        let mut t = 1;
        for j in 0..i {
            let prev = &moves[j];
            if prev.actuator == mv.actuator || prev.object == mv.object {
                t = t.max(ts[j] + 1);
            }
            if mv.is_placement() {
                if let Some(ObjectId::Block(supp)) = &mv.support {
                    if prev.is_placement() && &prev.object == supp {
                        t = t.max(ts[j] + 1);
                    }
                }
            }
        }
        // (c) as a final guard; (a)/(b) already force strict ordering for
        // shared actuators and blocks.
        loop {
            let conflict = (0..i).any(|j| {
                ts[j] == t && (moves[j].actuator == mv.actuator || moves[j].object == mv.object)
            });
            if !conflict {
                break;
            }
            t += 1;
        }
        ts.push(t);
    }
    ts
}

/// Schedules a legal untimed sequence into a [`SymbolicPlan`].
pub fn make_plan(moves: Vec<Move>) -> SymbolicPlan {
    let ts = schedule_timestamps(&moves);
    let s = ts.iter().copied().max().unwrap_or(0);
    let handedness = if moves
        .iter()
        .all(|m| m.actuator == moves.first().map(|f| f.actuator).unwrap_or(Actuator::HandL))
    {
        Handedness::OneHand
    } else {
        Handedness::TwoHand
    };
    let moves = moves
        .into_iter()
        .zip(ts)
        .map(|(mv, timestamp)| TimedMove { mv, timestamp })
        .collect();
    SymbolicPlan {
        moves,
        handedness,
        s,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("illegal move {mv}: {reason}")]
    IllegalMove { mv: String, reason: String },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("illegal sequence at step {index}: {reason}")]
    IllegalSequence { index: usize, reason: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hand_schedule_is_sequential() {
        let b = |s: &str| s.to_string();
        let moves = vec![
            Move::grasp(b("b1"), Actuator::HandR),
            Move::fix(b("b1"), ObjectId::Table, Actuator::HandR),
            Move::grasp(b("b2"), Actuator::HandR),
            Move::fix(b("b2"), ObjectId::Block(BlockId::new("b1")), Actuator::HandR),
        ];
        let ts = schedule_timestamps(&moves);
        assert_eq!(ts, vec![1, 2, 3, 4]);
        let plan = make_plan(moves);
        assert_eq!(plan.s, 4);
        assert_eq!(plan.handedness, Handedness::OneHand);
    }

    #[test]
    fn concurrent_hands_share_timestamps() {
        let moves = vec![
            Move::grasp("b1", Actuator::HandR),
            Move::grasp("b2", Actuator::HandL),
            Move::fix("b1", ObjectId::Table, Actuator::HandR),
            Move::fix("b2", ObjectId::Table, Actuator::HandL),
        ];
        assert_eq!(schedule_timestamps(&moves), vec![1, 1, 2, 2]);
        let plan = make_plan(moves);
        assert_eq!(plan.s, 2);
        assert_eq!(plan.handedness, Handedness::TwoHand);
    }

    #[test]
    fn fix_onto_movable_support_waits_for_its_placement() {
        let moves = vec![
            Move::grasp("b1", Actuator::HandR),
            Move::grasp("b2", Actuator::HandL),
            Move::fix("b1", ObjectId::Table, Actuator::HandR),
            Move::fix("b2", ObjectId::Block(BlockId::new("b1")), Actuator::HandL),
        ];
        assert_eq!(schedule_timestamps(&moves), vec![1, 1, 2, 3]);
        assert_eq!(make_plan(moves).s, 3);
    }

    #[test]
    fn empty_plan_is_one_hand_zero_score() {
        let plan = make_plan(Vec::new());
        assert_eq!(plan.s, 0);
        assert_eq!(plan.handedness, Handedness::OneHand);
    }

    #[test]
    fn canonical_key_ignores_timestamps() {
        let moves = vec![
            Move::grasp("b1", Actuator::HandR),
            Move::fix("b1", ObjectId::Table, Actuator::HandR),
        ];
        let plan = make_plan(moves.clone());
        assert_eq!(canonical_form(&plan), canonical_form_of(&moves));
        // Mirrored actuators give a different key.
        let mirrored = vec![
            Move::grasp("b1", Actuator::HandL),
            Move::fix("b1", ObjectId::Table, Actuator::HandL),
        ];
        assert_ne!(canonical_form_of(&moves), canonical_form_of(&mirrored));
    }
}
