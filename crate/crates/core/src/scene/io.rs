//! Problem file format: parsing, validation, and canonical serialization.
//!
//! The file is JSON with top-level `layout`, `blocks`, `problems`; block
//! positions are parent-relative and orientations are [w, x, y, z] unit
//! quaternions. Canonical serialization writes fields in schema order with
//! numbers at 9 significant digits, so load -> serialize -> load is
//! idempotent.

use std::path::Path;

use serde::Deserialize;

use super::{
    BlockId, BlockSpec, Boundary, NodeId, Pose, Problem, SceneError, StackConfiguration,
    TableLayout,
};
use crate::config::ContactParams;

/// A parsed and validated problem file.
#[derive(Debug, Clone)]
pub struct ProblemSet {
    pub layout: TableLayout,
    pub blocks: Vec<BlockSpec>,
    pub problems: Vec<Problem>,
}

#[derive(Deserialize)]
struct FileRoot {
    layout: FileLayout,
    blocks: Vec<FileBlock>,
    problems: Vec<FileProblem>,
}

#[derive(Deserialize)]
struct FileLayout {
    spots: Vec<f64>,
    boundary: FileBoundary,
}

#[derive(Deserialize)]
struct FileBoundary {
    min: [f64; 2],
    max: [f64; 2],
}

#[derive(Deserialize)]
struct FileBlock {
    id: String,
    #[serde(default)]
    color: Option<String>,
    #[serde(default = "default_dims")]
    dims: [f64; 3],
    #[serde(default = "default_mass")]
    mass: f64,
}

fn default_dims() -> [f64; 3] {
    BlockSpec::DEFAULT_DIMS
}
fn default_mass() -> f64 {
    BlockSpec::DEFAULT_MASS
}

#[derive(Deserialize)]
struct FileProblem {
    id: u32,
    initial: Vec<FilePlacement>,
    target: Vec<FilePlacement>,
}

#[derive(Deserialize)]
struct FilePlacement {
    block: String,
    parent: String,
    position: [f64; 3],
    orientation: [f64; 4],
}

/// Loads and fully validates a problem file.
pub fn load_problem_set(path: &Path, contact: &ContactParams) -> Result<ProblemSet, SceneError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SceneError::Io(path.display().to_string(), e))?;
    parse_problem_set(&text, contact)
}

/// Parses a problem file from text and validates every invariant.
pub fn parse_problem_set(text: &str, contact: &ContactParams) -> Result<ProblemSet, SceneError> {
    let root: FileRoot = serde_json::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;

    let layout = TableLayout {
        spots: root.layout.spots,
        boundary: Boundary {
            min: root.layout.boundary.min,
            max: root.layout.boundary.max,
        },
    };
    layout.validate()?;

    let blocks: Vec<BlockSpec> = root
        .blocks
        .into_iter()
        .map(|b| BlockSpec {
            id: BlockId::new(b.id),
            color: b.color,
            dims: b.dims,
            mass: b.mass,
        })
        .collect();

    let mut problems = Vec::new();
    let mut seen_ids = std::collections::BTreeSet::new();
    for fp in root.problems {
        if !seen_ids.insert(fp.id) {
            return Err(SceneError::Validation {
                problem: Some(fp.id),
                field: "id".into(),
                message: "duplicate problem id".into(),
            });
        }
        let initial = build_config(&blocks, &fp.initial, fp.id, "initial")?;
        let target = build_config(&blocks, &fp.target, fp.id, "target")?;
        let problem = Problem {
            id: fp.id,
            initial,
            target,
            layout: layout.clone(),
        };
        problem.validate(contact)?;
        problems.push(problem);
    }

    Ok(ProblemSet {
        layout,
        blocks,
        problems,
    })
}

fn build_config(
    blocks: &[BlockSpec],
    placements: &[FilePlacement],
    problem_id: u32,
    section: &str,
) -> Result<StackConfiguration, SceneError> {
    let mut config = StackConfiguration::new(blocks.to_vec());
    let err = |field: String, message: String| SceneError::Validation {
        problem: Some(problem_id),
        field: format!("{section}.{field}"),
        message,
    };

    for p in placements {
        if config.spec(&BlockId::new(p.block.clone())).is_none() {
            return Err(err(p.block.clone(), "unknown block id".into()));
        }
    }
    if placements.len() != blocks.len() {
        return Err(err(
            "placements".into(),
            format!(
                "expected {} placements, got {}",
                blocks.len(),
                placements.len()
            ),
        ));
    }

    // Parents may refer to blocks placed later in the list; keep retrying
    // until every placement lands or no progress is possible.
    let mut pending: Vec<&FilePlacement> = placements.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|p| {
            let parent = match p.parent.as_str() {
                "table" => NodeId::Table,
                other => NodeId::Block(BlockId::new(other)),
            };
            if !config.tree.contains(&parent) {
                return true;
            }
            let pose = match Pose::from_parts(p.position, p.orientation) {
                Ok(pose) => pose,
                // Keep one representative failure; surfaced below.
                Err(_) => return true,
            };
            config
                .place(&BlockId::new(p.block.clone()), parent, pose)
                .is_err()
        });
        if pending.len() == before {
            let p = pending[0];
            // Distinguish a bad quaternion from a bad parent for the error
            // message.
            if let Err(e) = Pose::from_parts(p.position, p.orientation) {
                return Err(err(format!("{}.orientation", p.block), e.to_string()));
            }
            return Err(err(
                p.block.clone(),
                format!("parent {} is unknown or forms a cycle", p.parent),
            ));
        }
    }
    Ok(config)
}

/// Formats a float with 9 significant digits, preferring fixed notation for
/// moderate exponents (the `%.9g` convention).
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.8e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let body = if (-4..9).contains(&exp) {
        if exp >= 0 {
            let ip = exp as usize + 1;
            if digits.len() <= ip {
                format!("{}{}", digits, "0".repeat(ip - digits.len()))
            } else {
                format!("{}.{}", &digits[..ip], &digits[ip..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        }
    } else if digits.len() == 1 {
        format!("{digits}e{exp}")
    } else {
        format!("{}.{}e{}", &digits[..1], &digits[1..], exp)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn fmt_array(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| fmt_g9(*v)).collect();
    format!("[{}]", parts.join(", "))
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Canonical serialization of a problem set: schema field order, 9
/// significant digits, two-space indentation.
pub fn canonical_problem_set(set: &ProblemSet) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str("  \"layout\": {\n");
    s.push_str(&format!("    \"spots\": {},\n", fmt_array(&set.layout.spots)));
    s.push_str("    \"boundary\": {");
    s.push_str(&format!(
        "\"min\": {}, \"max\": {}",
        fmt_array(&set.layout.boundary.min),
        fmt_array(&set.layout.boundary.max)
    ));
    s.push_str("}\n  },\n");

    s.push_str("  \"blocks\": [\n");
    for (i, b) in set.blocks.iter().enumerate() {
        s.push_str(&format!("    {{\"id\": \"{}\"", json_escape(b.id.as_str())));
        if let Some(color) = &b.color {
            s.push_str(&format!(", \"color\": \"{}\"", json_escape(color)));
        }
        s.push_str(&format!(
            ", \"dims\": {}, \"mass\": {}}}{}\n",
            fmt_array(&b.dims),
            fmt_g9(b.mass),
            if i + 1 < set.blocks.len() { "," } else { "" }
        ));
    }
    s.push_str("  ],\n");

    s.push_str("  \"problems\": [\n");
    for (i, p) in set.problems.iter().enumerate() {
        s.push_str(&format!("    {{\n      \"id\": {},\n", p.id));
        for (name, config) in [("initial", &p.initial), ("target", &p.target)] {
            s.push_str(&format!("      \"{name}\": [\n"));
            let rows: Vec<String> = set
                .blocks
                .iter()
                .map(|b| {
                    let node = NodeId::Block(b.id.clone());
                    let parent = config
                        .tree
                        .parent(&node)
                        .expect("validated configs place every block");
                    let rel = config
                        .tree
                        .relative_pose(&node)
                        .expect("validated configs place every block");
                    let q = rel.orientation.quaternion();
                    format!(
                        "        {{\"block\": \"{}\", \"parent\": \"{}\", \"position\": {}, \"orientation\": {}}}",
                        json_escape(b.id.as_str()),
                        json_escape(&parent.to_string()),
                        fmt_array(&[rel.position.x, rel.position.y, rel.position.z]),
                        fmt_array(&[q.w, q.i, q.j, q.k])
                    )
                })
                .collect();
            s.push_str(&rows.join(",\n"));
            s.push('\n');
            s.push_str(if name == "initial" {
                "      ],\n"
            } else {
                "      ]\n"
            });
        }
        s.push_str(&format!(
            "    }}{}\n",
            if i + 1 < set.problems.len() { "," } else { "" }
        ));
    }
    s.push_str("  ]\n}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
      "layout": {"spots": [-0.15, 0, 0.15], "boundary": {"min": [-0.3, -0.15], "max": [0.3, 0.15]}},
      "blocks": [
        {"id": "b1", "color": "red", "dims": [0.1, 0.05, 0.05], "mass": 0.05},
        {"id": "b2", "color": "yellow", "dims": [0.1, 0.05, 0.05], "mass": 0.05},
        {"id": "b3", "color": "blue", "dims": [0.1, 0.05, 0.05], "mass": 0.05}
      ],
      "problems": [
        {"id": 1,
         "initial": [
           {"block": "b1", "parent": "table", "position": [-0.15, 0, 0.05], "orientation": [1, 0, 0, 0]},
           {"block": "b2", "parent": "table", "position": [0, 0, 0.05], "orientation": [1, 0, 0, 0]},
           {"block": "b3", "parent": "table", "position": [0.15, 0, 0.05], "orientation": [1, 0, 0, 0]}
         ],
         "target": [
           {"block": "b1", "parent": "table", "position": [-0.15, 0, 0.05], "orientation": [1, 0, 0, 0]},
           {"block": "b2", "parent": "table", "position": [0, 0, 0.05], "orientation": [1, 0, 0, 0]},
           {"block": "b3", "parent": "b2", "position": [0, 0, 0.1], "orientation": [1, 0, 0, 0]}
         ]}
      ]
    }"#;

    #[test]
    fn parse_minimal_file() {
        let params = ContactParams::default();
        let set = parse_problem_set(MINIMAL, &params).unwrap();
        assert_eq!(set.problems.len(), 1);
        let p = &set.problems[0];
        for b in p.initial.block_ids() {
            assert_eq!(
                p.initial.tree.parent(&NodeId::Block(b.clone())),
                Some(&NodeId::Table)
            );
        }
    }

    #[test]
    fn block_below_table_is_rejected() {
        let params = ContactParams::default();
        let bad = MINIMAL.replace(
            r#"{"block": "b2", "parent": "table", "position": [0, 0, 0.05], "orientation": [1, 0, 0, 0]},
           {"block": "b3", "parent": "table", "position": [0.15, 0, 0.05]"#,
            r#"{"block": "b2", "parent": "table", "position": [0, 0, -1.0], "orientation": [1, 0, 0, 0]},
           {"block": "b3", "parent": "table", "position": [0.15, 0, 0.05]"#,
        );
        let err = parse_problem_set(&bad, &params).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("b2"), "error should name the block: {msg}");
        assert!(msg.contains("problem 1"), "error should name the problem: {msg}");
    }

    #[test]
    fn canonical_round_trip_is_idempotent() {
        let params = ContactParams::default();
        let set = parse_problem_set(MINIMAL, &params).unwrap();
        let once = canonical_problem_set(&set);
        let set2 = parse_problem_set(&once, &params).unwrap();
        let twice = canonical_problem_set(&set2);
        assert_eq!(once, twice);
    }

    #[test]
    fn fmt_g9_cases() {
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(-0.0), "0");
        assert_eq!(fmt_g9(0.15), "0.15");
        assert_eq!(fmt_g9(-0.025), "-0.025");
        assert_eq!(fmt_g9(9.81), "9.81");
        assert_eq!(fmt_g9(1.0), "1");
        assert_eq!(fmt_g9(0.7071067811865476), "0.707106781");
        assert_eq!(fmt_g9(1e-17), "1e-17");
        assert_eq!(fmt_g9(123456789.0), "123456789");
        assert_eq!(fmt_g9(1234567891.0), "1.23456789e9");
    }
}
