//! Support-contact detection.
//!
//! A block `a` is supported by object `s` when a patch of a's lower surface
//! sits within `gap_tolerance` above s's upper surface with enough
//! horizontal overlap area. The test samples vertical columns over the
//! overlapping footprint region, which handles tilted (leaning) blocks as
//! well as flush face contacts.

use std::collections::BTreeMap;

use nalgebra::Point2;

use super::geometry::{convex_hull_2d, signed_margin, Obb};
use super::{BlockId, ObjectId, SceneError, StackConfiguration, SupportGraph};
use crate::config::ContactParams;

/// One detected supporting contact.
#[derive(Debug, Clone)]
pub struct ContactInfo {
    pub supported: BlockId,
    pub supporter: ObjectId,
    /// Horizontal area of the contact patch (m^2).
    pub area: f64,
    /// Convex hull of the contact patch samples, in the xy plane.
    pub patch: Vec<Point2<f64>>,
    /// Whether the supported block's center of mass projects into the patch.
    pub under_com: bool,
    /// Distance from the CoM projection to the patch centroid (m).
    pub com_distance: f64,
}

/// Detects all supporting contacts in the configuration. Held blocks (in a
/// hand or riding one) are skipped. Output is ordered by (supported,
/// supporter).
pub fn contact_analysis(config: &StackConfiguration, params: &ContactParams) -> Vec<ContactInfo> {
    let held = config.held_blocks();
    let mut placed: Vec<(BlockId, Obb)> = Vec::new();
    for b in &config.blocks {
        if held.contains(&b.id) {
            continue;
        }
        if let Ok(obb) = config.world_obb(&b.id) {
            placed.push((b.id.clone(), obb));
        }
    }

    let mut out = Vec::new();
    for (id, obb) in &placed {
        let com = obb.center;
        // Contact with the table surface (z = 0).
        if let Some(info) = patch_between(obb, None, params) {
            out.push(ContactInfo {
                supported: id.clone(),
                supporter: ObjectId::Table,
                under_com: signed_margin(&info.hull, &Point2::new(com.x, com.y)) >= 0.0,
                com_distance: dist2(&info.centroid, &Point2::new(com.x, com.y)),
                area: info.area,
                patch: info.hull,
            });
        }
        // Contact with every other placed block.
        for (other_id, other_obb) in &placed {
            if other_id == id {
                continue;
            }
            if let Some(info) = patch_between(obb, Some(other_obb), params) {
                out.push(ContactInfo {
                    supported: id.clone(),
                    supporter: ObjectId::Block(other_id.clone()),
                    under_com: signed_margin(&info.hull, &Point2::new(com.x, com.y)) >= 0.0,
                    com_distance: dist2(&info.centroid, &Point2::new(com.x, com.y)),
                    area: info.area,
                    patch: info.hull,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        (&a.supported, &a.supporter)
            .cmp(&(&b.supported, &b.supporter))
    });
    out
}

struct Patch {
    area: f64,
    hull: Vec<Point2<f64>>,
    centroid: Point2<f64>,
}

/// Samples the column gap between `a`'s lower surface and the supporter's
/// upper surface (the table plane when `s` is `None`).
fn patch_between(a: &Obb, s: Option<&Obb>, params: &ContactParams) -> Option<Patch> {
    let (min_a, max_a) = a.footprint_aabb();
    let (min, max) = match s {
        Some(sb) => {
            let (min_s, max_s) = sb.footprint_aabb();
            (
                Point2::new(min_a.x.max(min_s.x), min_a.y.max(min_s.y)),
                Point2::new(max_a.x.min(max_s.x), max_a.y.min(max_s.y)),
            )
        }
        None => (min_a, max_a),
    };
    if min.x >= max.x || min.y >= max.y {
        return None;
    }
    let n = params.grid_resolution.max(8);
    let dx = (max.x - min.x) / n as f64;
    let dy = (max.y - min.y) / n as f64;
    let cell = dx * dy;
    let mut hits: Vec<Point2<f64>> = Vec::new();
    let mut area = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let x = min.x + (i as f64 + 0.5) * dx;
        for j in 0..n {
            let y = min.y + (j as f64 + 0.5) * dy;
            let Some((a_lo, _)) = a.column_interval(x, y) else {
                continue;
            };
            let s_hi = match s {
                Some(sb) => match sb.column_interval(x, y) {
                    Some((_, hi)) => hi,
                    None => continue,
                },
                None => 0.0,
            };
            let gap = a_lo - s_hi;
            if gap.abs() <= params.gap_tolerance {
                area += cell;
                cx += x;
                cy += y;
                hits.push(Point2::new(x, y));
            }
        }
    }
    if area < params.min_overlap_area || hits.is_empty() {
        return None;
    }
    let k = hits.len() as f64;
    Some(Patch {
        area,
        hull: convex_hull_2d(&hits),
        centroid: Point2::new(cx / k, cy / k),
    })
}

fn dist2(a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Derives the support graph from the detected contacts.
pub fn derive_support_graph(config: &StackConfiguration, params: &ContactParams) -> SupportGraph {
    let mut graph = SupportGraph::default();
    for c in contact_analysis(config, params) {
        graph.edges.insert((c.supported, c.supporter));
    }
    graph
}

/// Picks the primary supporter of every supported block: the contact lying
/// under the block's center of mass; ties broken by larger overlap area,
/// then by nearest patch centroid.
pub fn primary_supporters(
    config: &StackConfiguration,
    params: &ContactParams,
) -> BTreeMap<BlockId, ObjectId> {
    let mut best: BTreeMap<BlockId, (bool, f64, f64, ObjectId)> = BTreeMap::new();
    for c in contact_analysis(config, params) {
        let cand = (c.under_com, c.area, -c.com_distance, c.supporter.clone());
        match best.get(&c.supported) {
            Some(cur)
                if (cur.0, cur.1, cur.2) >= (cand.0, cand.1, cand.2) => {}
            _ => {
                best.insert(c.supported.clone(), cand);
            }
        }
    }
    best.into_iter().map(|(b, (_, _, _, s))| (b, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::poses;
    use crate::scene::{BlockSpec, NodeId, Pose};

    fn three_blocks() -> Vec<BlockSpec> {
        vec![
            BlockSpec::new("b1"),
            BlockSpec::new("b2"),
            BlockSpec::new("b3"),
        ]
    }

    #[test]
    fn flat_blocks_rest_on_table() {
        let params = ContactParams::default();
        let mut config = StackConfiguration::new(three_blocks());
        for (i, x) in [-0.15, 0.0, 0.15].iter().enumerate() {
            let id = BlockId::new(format!("b{}", i + 1));
            config
                .place(&id, NodeId::Table, poses::upright(*x, 0.0, 0.10))
                .unwrap();
        }
        let graph = derive_support_graph(&config, &params);
        assert_eq!(graph.edges.len(), 3);
        for b in config.block_ids() {
            assert_eq!(graph.supporters(b), vec![&ObjectId::Table]);
        }
        graph.validate(&config).unwrap();
    }

    #[test]
    fn tower_chain() {
        let params = ContactParams::default();
        let mut config = StackConfiguration::new(three_blocks());
        let b1 = BlockId::new("b1");
        let b2 = BlockId::new("b2");
        let b3 = BlockId::new("b3");
        config
            .place(&b1, NodeId::Table, poses::upright(0.0, 0.0, 0.10))
            .unwrap();
        config
            .place(
                &b2,
                NodeId::Block(b1.clone()),
                Pose::new(nalgebra::Vector3::new(0.0, 0.0, 0.10), Default::default()),
            )
            .unwrap();
        config
            .place(
                &b3,
                NodeId::Block(b2.clone()),
                Pose::new(nalgebra::Vector3::new(0.0, 0.0, 0.10), Default::default()),
            )
            .unwrap();
        let graph = derive_support_graph(&config, &params);
        assert!(graph.edges.contains(&(b1.clone(), ObjectId::Table)));
        assert!(graph.edges.contains(&(b2.clone(), ObjectId::Block(b1.clone()))));
        assert!(graph.edges.contains(&(b3.clone(), ObjectId::Block(b2.clone()))));
        assert_eq!(graph.edges.len(), 3);
        let primary = primary_supporters(&config, &params);
        assert_eq!(primary[&b2], ObjectId::Block(b1));
    }

    #[test]
    fn leaning_block_has_two_supporters() {
        let params = ContactParams::default();
        let mut config = StackConfiguration::new(three_blocks());
        let b1 = BlockId::new("b1");
        let b2 = BlockId::new("b2");
        let b3 = BlockId::new("b3");
        // b1 lies flat; b2 leans against b1's +x top edge, foot on the table.
        config
            .place(&b1, NodeId::Table, poses::lying_x(0.0, 0.0, 0.05))
            .unwrap();
        let lean = poses::lean_against_edge(0.10, 0.05, 0.05, 0.05, 55f64.to_radians(), -1.0);
        config.place(&b2, NodeId::Table, lean).unwrap();
        config
            .place(&b3, NodeId::Table, poses::upright(-0.15, 0.0, 0.10))
            .unwrap();

        config.validate(&params).unwrap();
        let graph = derive_support_graph(&config, &params);
        let sup = graph.supporters(&b2);
        assert!(
            sup.contains(&&ObjectId::Table) && sup.contains(&&ObjectId::Block(b1.clone())),
            "expected lean supporters table+b1, got {sup:?}"
        );
        assert_eq!(graph.supporters(&b3), vec![&ObjectId::Table]);
        graph.validate(&config).unwrap();
    }

    #[test]
    fn translation_invariance() {
        let params = ContactParams::default();
        let build = |dx: f64| {
            let mut config = StackConfiguration::new(three_blocks());
            let b1 = BlockId::new("b1");
            let b2 = BlockId::new("b2");
            let b3 = BlockId::new("b3");
            config
                .place(&b1, NodeId::Table, poses::upright(0.0 + dx, 0.0, 0.10))
                .unwrap();
            config
                .place(
                    &b2,
                    NodeId::Block(b1.clone()),
                    Pose::new(nalgebra::Vector3::new(0.0, 0.0, 0.10), Default::default()),
                )
                .unwrap();
            config
                .place(&b3, NodeId::Table, poses::upright(-0.15 + dx, 0.0, 0.10))
                .unwrap();
            derive_support_graph(&config, &params)
        };
        assert_eq!(build(0.0), build(0.07));
    }
}
