//! Deterministic DOT and SVG emitters for tower stages.
//!
//! DOT output is the canonical artifact: one node per vertex and one edge
//! per 1-simplex, sorted by label, byte-stable across runs. The SVG uses the
//! recursive layout of the construction: the copies over each barycentre sit
//! on a small circle centred at the barycentre's position in the previous
//! stage's layout.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use noebeling::complex::{ComplexRef, VertexId};

/// Splits a copy label `base#index` at the last `#`.
pub fn split_copy_label(label: &str) -> Option<(&str, u32)> {
    let pos = label.rfind('#')?;
    let copy: u32 = label[pos + 1..].parse().ok()?;
    Some((&label[..pos], copy))
}

pub fn dot_of_stage(complex: &ComplexRef, stage: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!("graph stage_{stage} {{\n"));
    let mut labels: Vec<&str> = complex.vertex_ids().map(|v| complex.label(v)).collect();
    labels.sort_unstable();
    for l in &labels {
        out.push_str(&format!("  \"{l}\";\n"));
    }
    let mut edges: Vec<(String, String)> = complex
        .edges()
        .map(|e| {
            let mut pair = [
                complex.label(e.vertices()[0]).to_string(),
                complex.label(e.vertices()[1]).to_string(),
            ];
            pair.sort();
            (pair[0].clone(), pair[1].clone())
        })
        .collect();
    edges.sort();
    for (a, b) in &edges {
        out.push_str(&format!("  \"{a}\" -- \"{b}\";\n"));
    }
    out.push_str("}\n");
    out
}

/// Layout positions for the stages of a tower given as loaded complexes and
/// the copy structure parsed from labels. Stage 0 sits on a circle; the
/// copies over each barycentre sit on a circle of one third of the shortest
/// incident edge of the subdivision layout.
pub struct Layout {
    /// positions per stage, indexed by vertex id
    pub positions: Vec<Vec<(f64, f64)>>,
}

pub fn layout_tower(stages: &[ComplexRef], kappa: u32) -> Result<Layout> {
    let mut positions: Vec<Vec<(f64, f64)>> = Vec::with_capacity(stages.len());

    // seed: vertices on a circle, in label order
    let seed = &stages[0];
    let mut order: Vec<VertexId> = seed.vertex_ids().collect();
    order.sort_by_key(|v| seed.label(*v).to_string());
    let count = order.len().max(1);
    let mut seed_pos = vec![(0.0, 0.0); seed.vertex_count()];
    for (k, v) in order.iter().enumerate() {
        let angle = 2.0 * PI * (k as f64) / (count as f64) - PI / 2.0;
        seed_pos[v.0 as usize] = (300.0 + 250.0 * angle.cos(), 300.0 + 250.0 * angle.sin());
    }
    positions.push(seed_pos);

    for i in 1..stages.len() {
        let prev = &stages[i - 1];
        let prev_pos = &positions[i - 1];
        let fine = &stages[i];

        // barycentre positions, one per simplex name of the previous stage
        let mut centres: std::collections::BTreeMap<String, (f64, f64)> =
            std::collections::BTreeMap::new();
        for s in prev.simplices() {
            let (mut x, mut y) = (0.0, 0.0);
            for v in s.vertices() {
                x += prev_pos[v.0 as usize].0;
                y += prev_pos[v.0 as usize].1;
            }
            let k = s.len() as f64;
            centres.insert(prev.simplex_name(s), (x / k, y / k));
        }
        // shortest incident subdivision edge per barycentre: between nested
        // simplices
        let mut radius: std::collections::BTreeMap<String, f64> =
            std::collections::BTreeMap::new();
        for s in prev.simplices() {
            let name = prev.simplex_name(s);
            let c = centres[&name];
            let mut best = f64::MAX;
            for t in prev.simplices() {
                if s == t || !(s.is_face_of(t) || t.is_face_of(s)) {
                    continue;
                }
                let d = centres[&prev.simplex_name(t)];
                let dist = ((c.0 - d.0).powi(2) + (c.1 - d.1).powi(2)).sqrt();
                if dist < best {
                    best = dist;
                }
            }
            if best == f64::MAX {
                best = 30.0;
            }
            radius.insert(name, best / 3.0);
        }

        let mut pos = vec![(0.0, 0.0); fine.vertex_count()];
        for v in fine.vertex_ids() {
            let label = fine.label(v);
            let Some((base, copy)) = split_copy_label(label) else {
                bail!("vertex `{label}` does not carry copy structure");
            };
            let Some(c) = centres.get(base) else {
                bail!("vertex `{label}` refers to unknown barycentre `{base}`");
            };
            let r = radius[base];
            let angle = 2.0 * PI * (copy as f64) / (kappa as f64) - PI / 2.0;
            pos[v.0 as usize] = (c.0 + r * angle.cos(), c.1 + r * angle.sin());
        }
        positions.push(pos);
    }
    Ok(Layout { positions })
}

pub fn svg_of_stage(stages: &[ComplexRef], kappa: u32, stage: usize) -> Result<String> {
    let layout = layout_tower(&stages[..=stage], kappa)?;
    let complex = &stages[stage];
    let pos = &layout.positions[stage];
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for (x, y) in pos {
        min_x = min_x.min(*x);
        min_y = min_y.min(*y);
        max_x = max_x.max(*x);
        max_y = max_y.max(*y);
    }
    if pos.is_empty() {
        (min_x, min_y, max_x, max_y) = (0.0, 0.0, 1.0, 1.0);
    }
    let pad = 10.0;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" \
         viewBox=\"{:.3} {:.3} {:.3} {:.3}\">\n",
        min_x - pad,
        min_y - pad,
        max_x - min_x + 2.0 * pad,
        max_y - min_y + 2.0 * pad
    ));
    type Segment = (String, (f64, f64), (f64, f64));
    let mut edges: Vec<Segment> = complex
        .edges()
        .map(|e| {
            let (u, v) = (e.vertices()[0], e.vertices()[1]);
            let mut names = [complex.label(u).to_string(), complex.label(v).to_string()];
            names.sort();
            (
                format!("{}--{}", names[0], names[1]),
                pos[u.0 as usize],
                pos[v.0 as usize],
            )
        })
        .collect();
    edges.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, p, q) in &edges {
        out.push_str(&format!(
            "  <line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" \
             stroke=\"#555\" stroke-width=\"0.6\"/>\n",
            p.0, p.1, q.0, q.1
        ));
    }
    let mut verts: Vec<(String, (f64, f64))> = complex
        .vertex_ids()
        .map(|v| (complex.label(v).to_string(), pos[v.0 as usize]))
        .collect();
    verts.sort_by(|a, b| a.0.cmp(&b.0));
    for (label, p) in &verts {
        out.push_str(&format!(
            "  <circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"1.8\" fill=\"#000\">\
             <title>{label}</title></circle>\n",
            p.0, p.1
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
