//! Polygons with edges glued in pairs, and cutting sequences of straight
//! lines on the resulting surfaces.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use thiserror::Error;

use crate::numeric::{
    mat_approx_eq, mat_identity, mat_mul, ray_segment_hit, Direction, GeometryError, HitKind, Isometry, Mat2, Point2,
    Scalar,
};
use crate::table::{
    classify_table, interior_angle, validate_table, Label, LabeledTable, Location, TableError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("edge `{0}` is not paired")]
    UnpairedEdge(String),
    #[error("edge `{0}` appears in more than one pairing")]
    DuplicatePairing(String),
    #[error("edges `{0}` and `{1}` have different lengths")]
    LengthMismatch(String, String),
    #[error("pairing of `{0}` and `{1}` preserves boundary orientation")]
    OrientationClash(String, String),
    #[error("pairing map does not carry edge `{0}` onto edge `{1}`")]
    MapMismatch(String, String),
    #[error("rotation by {0}/{1} pi is not representable in this backend")]
    NotRepresentable(i64, i64),
    #[error("start point is not in the interior of the polygon")]
    StartOutsidePolygon,
    #[error("direction is zero")]
    DegenerateDirection,
}

impl From<GeometryError> for SurfaceError {
    fn from(_: GeometryError) -> Self {
        SurfaceError::DegenerateDirection
    }
}

/// Isometry carrying one edge onto its partner, as entered.
#[derive(Clone, Debug, PartialEq)]
pub enum PairingMap<S> {
    Translate(Point2<S>),
    /// Rotation by `num/den * pi` about `center`.
    Rotate { num: i64, den: i64, center: Point2<S> },
    General(Isometry<S>),
}

impl<S: Scalar> PairingMap<S> {
    pub fn isometry(&self) -> Result<Isometry<S>, SurfaceError> {
        match self {
            PairingMap::Translate(v) => Ok(Isometry::translation(v.clone())),
            PairingMap::Rotate { num, den, center } => {
                Isometry::rotation_about(center, *num, *den).ok_or(SurfaceError::NotRepresentable(*num, *den))
            }
            PairingMap::General(g) => Ok(g.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawPairing<S> {
    pub from: Label,
    pub to: Label,
    pub map: PairingMap<S>,
}

/// Unvalidated glued-polygon data, as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawGluedPolygon<S> {
    pub name: String,
    pub vertices: Vec<Point2<S>>,
    pub labels: Vec<Label>,
    pub pairings: Vec<RawPairing<S>>,
}

/// Corners of the polygon identified to one point of the glued surface.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexClass<S> {
    /// Polygon vertex indices, in the counter-clockwise order around the point.
    pub corners: Vec<usize>,
    pub angle_radians: f64,
    pub angle_over_pi: Option<Ratio<i64>>,
    /// Product of pairing linear parts met while circling the point.
    pub holonomy: Mat2<S>,
}

impl<S: Scalar> VertexClass<S> {
    pub fn holonomy_is_trivial(&self) -> bool {
        mat_approx_eq(&self.holonomy, &mat_identity())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GluedPolygon<S> {
    polygon: LabeledTable<S>,
    pairings: Vec<RawPairing<S>>,
    partner: Vec<usize>,
    /// `maps[e]` carries edge `e` onto edge `partner[e]`.
    maps: Vec<Isometry<S>>,
    vertex_classes: Vec<VertexClass<S>>,
}

impl<S: Scalar> GluedPolygon<S> {
    pub fn polygon(&self) -> &LabeledTable<S> {
        &self.polygon
    }
    pub fn pairings(&self) -> &[RawPairing<S>] {
        &self.pairings
    }
    pub fn partner(&self, edge: usize) -> usize {
        self.partner[edge]
    }
    pub fn map(&self, edge: usize) -> &Isometry<S> {
        &self.maps[edge]
    }
    pub fn vertex_classes(&self) -> &[VertexClass<S>] {
        &self.vertex_classes
    }
    pub fn is_translation_surface(&self) -> bool {
        self.maps.iter().all(Isometry::is_translation)
    }
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_classes.len() as i64 - (self.polygon.len() / 2) as i64 + 1
    }
    pub fn genus(&self) -> i64 {
        (2 - self.euler_characteristic()) / 2
    }
    /// The pairing as a label relation.
    pub fn scheme(&self) -> PairingScheme {
        PairingScheme::new(
            self.polygon.labels().iter().cloned(),
            self.pairings.iter().map(|p| (p.from.clone(), p.to.clone())),
        )
    }
    /// `(enter, exit)` labels of each edge: a line leaving through edge `e`
    /// re-enters through its partner.
    pub fn double_labels(&self) -> Vec<(Label, Label)> {
        (0..self.polygon.len())
            .map(|e| (self.polygon.label(self.partner[e]).clone(), self.polygon.label(e).clone()))
            .collect()
    }
}

pub fn validate_glued_polygon<S: Scalar>(raw: RawGluedPolygon<S>) -> Result<GluedPolygon<S>, SurfaceError> {
    let polygon = validate_table(raw.name, raw.vertices, raw.labels)?;
    let n = polygon.len();
    let mut partner = vec![usize::MAX; n];
    let mut maps = vec![Isometry::identity(); n];
    for p in &raw.pairings {
        let a = polygon.edge_index(&p.from).ok_or_else(|| SurfaceError::UnknownLabel(p.from.to_string()))?;
        let b = polygon.edge_index(&p.to).ok_or_else(|| SurfaceError::UnknownLabel(p.to.to_string()))?;
        for (e, l) in [(a, &p.from), (b, &p.to)] {
            if partner[e] != usize::MAX {
                return Err(SurfaceError::DuplicatePairing(l.to_string()));
            }
        }
        if a == b {
            return Err(SurfaceError::DuplicatePairing(p.from.to_string()));
        }
        let (ea, eb) = (polygon.edge(a), polygon.edge(b));
        let (la, lb) = (p.from.to_string(), p.to.to_string());
        if ea.length_sq().cmp_tol(&eb.length_sq()) != Ordering::Equal {
            return Err(SurfaceError::LengthMismatch(la, lb));
        }
        let g = p.map.isometry()?;
        let image = g.apply_segment(&ea);
        let reversed = image.a.approx_eq(&eb.b) && image.b.approx_eq(&eb.a);
        let kept = image.a.approx_eq(&eb.a) && image.b.approx_eq(&eb.b);
        if !g.is_orthogonal() || !(reversed || kept) {
            return Err(SurfaceError::MapMismatch(la, lb));
        }
        if kept || !g.is_orientation_preserving() {
            return Err(SurfaceError::OrientationClash(la, lb));
        }
        partner[a] = b;
        partner[b] = a;
        maps[b] = g.inverse();
        maps[a] = g;
    }
    if let Some(e) = partner.iter().position(|&q| q == usize::MAX) {
        return Err(SurfaceError::UnpairedEdge(polygon.label(e).to_string()));
    }
    let vertex_classes = vertex_classes(&polygon, &partner, &maps);
    Ok(GluedPolygon { polygon, pairings: raw.pairings, partner, maps, vertex_classes })
}

/// Circles each glued point: from the corner at vertex `i`, crossing edge
/// `i - 1` near its end lands at the start of the partner edge.
fn vertex_classes<S: Scalar>(polygon: &LabeledTable<S>, partner: &[usize], maps: &[Isometry<S>]) -> Vec<VertexClass<S>> {
    let n = polygon.len();
    let over_pi = classify_table(polygon).ok().map(|c| c.angles.into_iter().map(|a| a.over_pi).collect::<Vec<_>>());
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for first in 0..n {
        if seen[first] {
            continue;
        }
        let mut corners = Vec::new();
        let mut holonomy = mat_identity::<S>();
        let mut i = first;
        loop {
            seen[i] = true;
            corners.push(i);
            let incoming = (i + n - 1) % n;
            holonomy = mat_mul(&maps[incoming].linear, &holonomy);
            i = partner[incoming];
            if i == first || corners.len() > n {
                break;
            }
        }
        let angle_radians = corners.iter().map(|&c| interior_angle(polygon, c)).sum();
        let angle_over_pi = over_pi.as_ref().and_then(|a| {
            corners.iter().try_fold(Ratio::from_integer(0), |acc, &c| a[c].map(|r| acc + r))
        });
        classes.push(VertexClass { corners, angle_radians, angle_over_pi, holonomy });
    }
    classes
}

/// Label set with the equivalence relation induced by a side pairing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingScheme {
    pub labels: BTreeSet<Label>,
    pub pairs: BTreeSet<BTreeSet<Label>>,
}

impl PairingScheme {
    pub fn new(labels: impl IntoIterator<Item = Label>, pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        PairingScheme {
            labels: labels.into_iter().collect(),
            pairs: pairs.into_iter().map(|(a, b)| [a, b].into_iter().collect()).collect(),
        }
    }
}

/// Same labels and same pairing relation.
pub fn combinatorially_equivalent(s1: &PairingScheme, s2: &PairingScheme) -> bool {
    s1 == s2
}

/// Equivalence after renaming the first scheme's labels through `f`, which
/// must be a bijection onto the second scheme's labels.
pub fn combinatorially_equivalent_under(s1: &PairingScheme, s2: &PairingScheme, f: &BTreeMap<Label, Label>) -> bool {
    let Some(renamed) = s1.labels.iter().map(|l| f.get(l).cloned()).collect::<Option<BTreeSet<_>>>() else {
        return false;
    };
    if renamed.len() != s1.labels.len() {
        return false;
    }
    let pairs = s1.pairs.iter().map(|p| p.iter().map(|l| f[l].clone()).collect()).collect();
    combinatorially_equivalent(&PairingScheme { labels: renamed, pairs }, s2)
}

/// Entering labels of a straight line on a glued polygon.
#[derive(Clone, Debug, PartialEq)]
pub struct CuttingWord<S> {
    pub symbols: Vec<Label>,
    /// The line met a vertex before completing the requested crossings.
    pub singular: bool,
    /// Crossing points laid out in the plane along the developed line.
    pub developed: Vec<Point2<S>>,
    /// Crossing points in polygon coordinates, on the exit edge.
    pub crossings: Vec<Point2<S>>,
}

/// Follows the straight line for `k` edge crossings, recording at each crossing
/// the label of the edge through which the line re-enters the polygon.
pub fn cutting_sequence<S: Scalar>(
    s: &GluedPolygon<S>,
    start: &Point2<S>,
    dir: &Direction<S>,
    k: usize,
) -> Result<CuttingWord<S>, SurfaceError> {
    let poly = &s.polygon;
    if poly.locate(start) != Location::Interior {
        return Err(SurfaceError::StartOutsidePolygon);
    }
    let n = poly.len();
    let mut pos = start.clone();
    let mut d = dir.clone();
    let mut entered: Option<usize> = None;
    let mut develop = Isometry::identity();
    let mut word = CuttingWord { symbols: Vec::new(), singular: false, developed: Vec::new(), crossings: Vec::new() };
    while word.symbols.len() < k {
        let mut best: Option<(usize, S, Point2<S>, bool)> = None;
        for e in 0..n {
            if Some(e) == entered {
                continue;
            }
            let Some(h) = ray_segment_hit(&pos, &d, &poly.edge(e))? else { continue };
            let corner = h.kind != HitKind::Interior;
            match &mut best {
                Some((_, t, _, c)) => match h.t.cmp_tol(t) {
                    Ordering::Less => best = Some((e, h.t, h.point, corner)),
                    Ordering::Equal => *c |= corner,
                    Ordering::Greater => {}
                },
                None => best = Some((e, h.t, h.point, corner)),
            }
        }
        let Some((exit, _, p, corner)) = best else {
            return Err(SurfaceError::StartOutsidePolygon);
        };
        if corner {
            word.singular = true;
            break;
        }
        let g = &s.maps[exit];
        let into = s.partner[exit];
        word.developed.push(develop.apply(&p));
        word.crossings.push(p.clone());
        word.symbols.push(poly.label(into).clone());
        develop = develop.compose(&g.inverse());
        pos = g.apply(&p);
        d = g.apply_direction(&d);
        entered = Some(into);
    }
    Ok(word)
}
