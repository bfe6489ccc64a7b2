//! Deterministic SVG figures.

use std::fmt::Write;

use thiserror::Error;

use crate::flow::Trajectory;
use crate::numeric::{Point2, Scalar};
use crate::surface::{CuttingWord, GluedPolygon};
use crate::table::LabeledTable;
use crate::unfolding::{Development, UnfoldingCorridor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SvgError {
    #[error("nothing to draw")]
    EmptyScene,
}

type Xy = (f64, f64);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scene {
    pub outlines: Vec<Vec<Xy>>,
    pub gates: Vec<(Xy, Xy)>,
    pub points: Vec<Xy>,
    pub paths: Vec<Vec<Xy>>,
}

fn xy<S: Scalar>(p: &Point2<S>) -> Xy {
    p.to_f64()
}

impl Scene {
    pub fn is_empty(&self) -> bool {
        self.outlines.is_empty() && self.gates.is_empty() && self.points.is_empty() && self.paths.is_empty()
    }

    /// Table outline, hit points and the broken-line path.
    pub fn trajectory<S: Scalar>(t: &LabeledTable<S>, traj: &Trajectory<S>) -> Scene {
        let mut path = vec![xy(&traj.start.position)];
        path.extend(traj.hits.iter().map(|h| xy(&h.point)));
        if let crate::flow::Termination::SingularHit { point, .. } = &traj.terminated_by {
            path.push(xy(point));
        }
        Scene {
            outlines: vec![t.vertices().iter().map(xy).collect()],
            gates: Vec::new(),
            points: traj.hits.iter().map(|h| xy(&h.point)).collect(),
            paths: if traj.hits.is_empty() { Vec::new() } else { vec![path] },
        }
    }

    /// One outline per copy, highlighted gates, and the developed line if given.
    pub fn corridor<S: Scalar>(
        t: &LabeledTable<S>,
        c: &UnfoldingCorridor<S>,
        development: Option<&Development<S>>,
    ) -> Scene {
        let mut scene = Scene {
            outlines: (0..c.copies.len()).map(|k| c.copy_polygon(t, k).iter().map(xy).collect()).collect(),
            gates: c.gates.iter().map(|g| (xy(&g.a), xy(&g.b))).collect(),
            ..Scene::default()
        };
        if let Some(d) = development {
            let mut line = vec![xy(&d.start)];
            line.extend(d.points.iter().map(xy));
            scene.points = d.points.iter().map(xy).collect();
            scene.paths.push(line);
        }
        scene
    }

    /// Polygon outline with the cutting path drawn piecewise inside it.
    pub fn cutting<S: Scalar>(s: &GluedPolygon<S>, start: &Point2<S>, w: &CuttingWord<S>) -> Scene {
        let mut paths = Vec::new();
        let mut from = xy(start);
        for (p, entered) in w.crossings.iter().zip(&w.symbols) {
            paths.push(vec![from, xy(p)]);
            let exit = s.polygon().edge_index(entered).map(|e| s.partner(e)).unwrap_or(0);
            from = xy(&s.map(exit).apply(p));
        }
        Scene {
            outlines: vec![s.polygon().vertices().iter().map(xy).collect()],
            gates: Vec::new(),
            points: w.crossings.iter().map(xy).collect(),
            paths,
        }
    }
}

fn bounds(scene: &Scene) -> (f64, f64, f64, f64) {
    let all = scene
        .outlines
        .iter()
        .flatten()
        .chain(scene.gates.iter().flat_map(|(a, b)| [a, b]))
        .chain(scene.points.iter())
        .chain(scene.paths.iter().flatten());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    (x0, y0, x1, y1)
}

fn pts(ps: &[Xy]) -> String {
    ps.iter().map(|(x, y)| format!("{:.6},{:.6}", x, -y)).collect::<Vec<_>>().join(" ")
}

/// Renders with y pointing up; coordinates are printed with six decimals.
pub fn render_svg(scene: &Scene) -> Result<String, SvgError> {
    if scene.is_empty() {
        return Err(SvgError::EmptyScene);
    }
    let (x0, y0, x1, y1) = bounds(scene);
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let pad = span * 0.05;
    let stroke = span / 400.0;
    let r = span / 150.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
        x0 - pad,
        -y1 - pad,
        x1 - x0 + 2.0 * pad,
        y1 - y0 + 2.0 * pad
    );
    for o in &scene.outlines {
        let _ = writeln!(
            out,
            r#"<polygon class="outline" points="{}" fill="none" stroke="black" stroke-width="{:.6}"/>"#,
            pts(o),
            stroke
        );
    }
    for (a, b) in &scene.gates {
        let _ = writeln!(
            out,
            r#"<line class="gate" x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="orange" stroke-width="{:.6}"/>"#,
            a.0,
            -a.1,
            b.0,
            -b.1,
            3.0 * stroke
        );
    }
    for p in &scene.paths {
        let _ = writeln!(
            out,
            r#"<polyline class="path" points="{}" fill="none" stroke="blue" stroke-width="{:.6}"/>"#,
            pts(p),
            stroke
        );
    }
    for (x, y) in &scene.points {
        let _ = writeln!(out, r#"<circle class="hit" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="red"/>"#, x, -y, r);
    }
    out.push_str("</svg>\n");
    Ok(out)
}
