//! Labeled billiard tables: validation, angle classification, affine transport.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::numeric::{mat_apply, mat_det, orientation, Mat2, Orientation, Point2, Scalar, Segment};

/// Edge label. Arbitrary UTF-8 token without whitespace.
pub type Label = Arc<str>;

/// Default cap on angle denominators (and on the unfolding group order).
pub const DEFAULT_N_MAX: u64 = 720;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("a table needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("{labels} labels for {vertices} vertices")]
    LabelCountMismatch { vertices: usize, labels: usize },
    #[error("label `{0}` is used twice")]
    DuplicateLabel(String),
    #[error("edge {0} has zero length")]
    DegenerateEdge(usize),
    #[error("vertex {0} has interior angle 0 or 2*pi")]
    DegenerateAngle(usize),
    #[error("polygon is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("transformation matrix is singular")]
    SingularMatrix,
    #[error("angle at vertex {0} cannot be classified at the current tolerance")]
    RationalityUndecidable(usize),
}

/// A simple polygon with CCW vertices and one label per edge; edge `i` runs
/// from `vertices[i]` to `vertices[i+1 mod n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledTable<S> {
    name: String,
    vertices: Vec<Point2<S>>,
    labels: Vec<Label>,
}

/// Where a point sits relative to a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Interior,
    OnEdge(usize),
    AtVertex(usize),
    Exterior,
}

impl<S: Scalar> LabeledTable<S> {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn vertices(&self) -> &[Point2<S>] {
        &self.vertices
    }
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
    pub fn vertex(&self, i: usize) -> &Point2<S> {
        &self.vertices[i % self.len()]
    }
    pub fn edge(&self, i: usize) -> Segment<S> {
        Segment { a: self.vertex(i).clone(), b: self.vertex(i + 1).clone() }
    }
    pub fn edges(&self) -> impl Iterator<Item = Segment<S>> + '_ {
        (0..self.len()).map(|i| self.edge(i))
    }
    pub fn label(&self, edge: usize) -> &Label {
        &self.labels[edge]
    }
    pub fn edge_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| &**l == label)
    }

    /// Twice the signed area.
    pub fn double_area(&self) -> S {
        double_area(&self.vertices)
    }

    pub fn locate(&self, p: &Point2<S>) -> Location {
        let n = self.len();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.approx_eq(p) {
                return Location::AtVertex(i);
            }
        }
        for i in 0..n {
            if self.edge(i).contains(p) {
                return Location::OnEdge(i);
            }
        }
        // Crossing number with a half-open rule on y.
        let mut inside = false;
        for i in 0..n {
            let a = self.vertex(i);
            let b = self.vertex(i + 1);
            let a_above = a.y.cmp_tol(&p.y) == Ordering::Greater;
            let b_above = b.y.cmp_tol(&p.y) == Ordering::Greater;
            if a_above != b_above {
                let o = orientation(a, b, p);
                let upward = b_above;
                if (upward && o == Orientation::Ccw) || (!upward && o == Orientation::Cw) {
                    inside = !inside;
                }
            }
        }
        if inside {
            Location::Interior
        } else {
            Location::Exterior
        }
    }

    /// Whether a ray leaving `p` (a point of the closed table) along `d`
    /// immediately enters the interior. `None` when the ray is tangent to the
    /// boundary there.
    pub fn points_inward(&self, loc: Location, d: &Point2<S>) -> Option<bool> {
        match loc {
            Location::Interior => Some(true),
            Location::Exterior => Some(false),
            Location::OnEdge(i) => match self.edge(i).vector().cross_sign(d) {
                Ordering::Greater => Some(true),
                Ordering::Less => Some(false),
                Ordering::Equal => None,
            },
            Location::AtVertex(i) => {
                let v = self.vertex(i);
                let out = self.vertex(i + 1).sub(v);
                let back = self.vertex(i + self.len() - 1).sub(v);
                strictly_inside_ccw_cone(&out, &back, d)
            }
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Open cone swept counter-clockwise from `from` to `to`. `None` if `d` is on
/// one of its bounding rays.
pub(crate) fn strictly_inside_ccw_cone<S: Scalar>(
    from: &Point2<S>,
    to: &Point2<S>,
    d: &Point2<S>,
) -> Option<bool> {
    let on_ray = |r: &Point2<S>| r.cross_sign(d) == Ordering::Equal && r.dot(d).sign() == Ordering::Greater;
    if on_ray(from) || on_ray(to) {
        return None;
    }
    Some(angle_key(from, d) < angle_key(from, to))
}

/// Total order of directions by CCW angle from `base` in `[0, 2pi)`, expressed
/// as (half, tie-breaking sign) so comparisons stay exact.
pub(crate) fn angle_key<S: Scalar>(base: &Point2<S>, d: &Point2<S>) -> AngleKey<S> {
    let c = base.cross_sign(d);
    let upper = c == Ordering::Greater || (c == Ordering::Equal && base.dot(d).sign() == Ordering::Greater);
    AngleKey { half: if upper { 0 } else { 1 }, dir: d.clone() }
}

#[derive(Clone, Debug)]
pub(crate) struct AngleKey<S> {
    half: u8,
    dir: Point2<S>,
}

impl<S: Scalar> PartialEq for AngleKey<S> {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl<S: Scalar> PartialOrd for AngleKey<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.half != other.half {
            return Some(self.half.cmp(&other.half));
        }
        // Within a half-turn, a comes first iff b lies CCW of a.
        Some(match self.dir.cross_sign(&other.dir) {
            Ordering::Greater => Ordering::Less,
            Ordering::Less => Ordering::Greater,
            Ordering::Equal => Ordering::Equal,
        })
    }
}

fn double_area<S: Scalar>(vs: &[Point2<S>]) -> S {
    let n = vs.len();
    (0..n).fold(S::zero(), |acc, i| acc + vs[i].cross(&vs[(i + 1) % n]))
}

fn segments_intersect<S: Scalar>(s: &Segment<S>, t: &Segment<S>) -> bool {
    let o1 = orientation(&s.a, &s.b, &t.a);
    let o2 = orientation(&s.a, &s.b, &t.b);
    let o3 = orientation(&t.a, &t.b, &s.a);
    let o4 = orientation(&t.a, &t.b, &s.b);
    if o1 != o2 && o3 != o4 && o1 != Orientation::Collinear && o2 != Orientation::Collinear
        && o3 != Orientation::Collinear && o4 != Orientation::Collinear
    {
        return true;
    }
    s.contains(&t.a) || s.contains(&t.b) || t.contains(&s.a) || t.contains(&s.b)
}

/// Validates raw vertex and label data. Clockwise input is reversed to CCW
/// with every label kept on its edge.
pub fn validate_table<S: Scalar>(
    name: impl Into<String>,
    vertices: Vec<Point2<S>>,
    labels: Vec<Label>,
) -> Result<LabeledTable<S>, TableError> {
    let n = vertices.len();
    if n < 3 {
        return Err(TableError::TooFewVertices(n));
    }
    if labels.len() != n {
        return Err(TableError::LabelCountMismatch { vertices: n, labels: labels.len() });
    }
    let mut seen = HashSet::new();
    for l in &labels {
        if !seen.insert(l.clone()) {
            return Err(TableError::DuplicateLabel(l.to_string()));
        }
    }
    for i in 0..n {
        if vertices[i].approx_eq(&vertices[(i + 1) % n]) {
            return Err(TableError::DegenerateEdge(i));
        }
    }
    let edges: Vec<Segment<S>> = (0..n)
        .map(|i| Segment { a: vertices[i].clone(), b: vertices[(i + 1) % n].clone() })
        .collect();
    for i in 0..n {
        // adjacent edges may only share their common vertex
        let j = (i + 1) % n;
        let u = edges[i].vector();
        let w = edges[j].vector();
        if u.cross_sign(&w) == Ordering::Equal && u.dot(&w).sign() == Ordering::Less {
            return Err(TableError::DegenerateAngle(j));
        }
        for k in i + 2..n {
            if i == 0 && k == n - 1 {
                continue;
            }
            if segments_intersect(&edges[i], &edges[k]) {
                return Err(TableError::SelfIntersecting(i, k));
            }
        }
    }
    let area = double_area(&vertices);
    let (vertices, labels) = match area.sign() {
        Ordering::Greater => (vertices, labels),
        Ordering::Less => {
            let rv: Vec<_> = vertices.into_iter().rev().collect();
            let rl: Vec<_> = (0..n).map(|k| labels[(2 * n - 2 - k) % n].clone()).collect();
            (rv, rl)
        }
        Ordering::Equal => return Err(TableError::ZeroArea),
    };
    Ok(LabeledTable { name: name.into(), vertices, labels })
}

/// Convenience constructor for labels given as string slices.
pub fn labels<I, T>(items: I) -> Vec<Label>
where
    I: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    items.into_iter().map(|s| Label::from(s.as_ref())).collect()
}

/// Interior angle at a vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Angle {
    pub radians: f64,
    /// `angle / pi` when recognized as rational.
    pub over_pi: Option<Ratio<i64>>,
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.over_pi {
            Some(r) if *r.denom() == 1 => write!(f, "{}pi", r.numer()),
            Some(r) => write!(f, "{}/{}pi", r.numer(), r.denom()),
            None => write!(f, "{}rad", self.radians),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certainty {
    /// Decided by exact integer arithmetic.
    Exact,
    /// Matched within the float tolerance.
    Tolerance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableClass {
    pub is_right_angled: bool,
    pub is_rational: bool,
    pub angles: Vec<Angle>,
    /// Least common multiple of the reduced angle denominators.
    pub n: Option<u64>,
    pub certainty: Certainty,
}

impl TableClass {
    /// Reduced `p/q` of each angle over pi, when rational.
    pub fn rational_angles(&self) -> Option<Vec<Ratio<i64>>> {
        self.angles.iter().map(|a| a.over_pi).collect()
    }
}

/// The interior angle at vertex `i`, as `(dot, cross)` of the outgoing edge
/// with the reversed incoming edge.
fn corner<S: Scalar>(t: &LabeledTable<S>, i: usize) -> (Point2<S>, Point2<S>) {
    let v = t.vertex(i);
    let out = t.vertex(i + 1).sub(v);
    let back = t.vertex(i + t.len() - 1).sub(v);
    (out, back)
}

/// Interior angle at vertex `i` in radians, in `(0, 2 pi]`.
pub fn interior_angle<S: Scalar>(t: &LabeledTable<S>, i: usize) -> f64 {
    let (out, back) = corner(t, i);
    corner_radians(&out, &back)
}

fn corner_radians<S: Scalar>(out: &Point2<S>, back: &Point2<S>) -> f64 {
    let (ox, oy) = out.to_f64();
    let (bx, by) = back.to_f64();
    let a = (ox * by - oy * bx).atan2(ox * bx + oy * by);
    if a <= 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Classifies the table's angles with the default denominator bound.
pub fn classify_table<S: Scalar>(t: &LabeledTable<S>) -> Result<TableClass, TableError> {
    classify_table_with_bound(t, DEFAULT_N_MAX)
}

/// Angle classification.
///
/// Exact backend: the angle between the edge vectors is the argument of the
/// Gaussian integer `z = (out . back) + i (out x back)`, and it is a rational
/// multiple of pi iff `z^m` is a positive real for some `m`; powers are tested
/// for `m <= 2 * n_max`.
///
/// Float backend: each `angle/pi` is matched to the unique fraction with
/// denominator `<= n_max` within tolerance; two distinct candidates make the
/// vertex undecidable.
pub fn classify_table_with_bound<S: Scalar>(
    t: &LabeledTable<S>,
    n_max: u64,
) -> Result<TableClass, TableError> {
    let n = t.len();
    let mut angles = Vec::with_capacity(n);
    let mut right = true;
    for i in 0..n {
        let (out, back) = corner(t, i);
        let radians = corner_radians(&out, &back);
        let quarter = out.dot_sign(&back) == Ordering::Equal || out.cross_sign(&back) == Ordering::Equal;
        right &= quarter;
        let over_pi = if S::EXACT {
            exact_angle_over_pi(&out, &back, radians, n_max)
        } else {
            float_angle_over_pi(radians, n_max).map_err(|_| TableError::RationalityUndecidable(i))?
        };
        angles.push(Angle { radians, over_pi });
    }
    let is_rational = angles.iter().all(|a| a.over_pi.is_some());
    let lcm = if is_rational {
        Some(angles.iter().fold(1u64, |acc, a| acc.lcm(&(*a.over_pi.unwrap().denom() as u64))))
    } else {
        None
    };
    Ok(TableClass {
        is_right_angled: right,
        is_rational,
        angles,
        n: lcm,
        certainty: if S::EXACT { Certainty::Exact } else { Certainty::Tolerance },
    })
}

fn to_integer_pair(x: &BigRational, y: &BigRational) -> (BigInt, BigInt) {
    let l = x.denom().lcm(y.denom());
    (x.numer() * (&l / x.denom()), y.numer() * (&l / y.denom()))
}

fn exact_angle_over_pi<S: Scalar>(
    out: &Point2<S>,
    back: &Point2<S>,
    radians: f64,
    n_max: u64,
) -> Option<Ratio<i64>> {
    let dot = out.dot(back).to_rational()?;
    let cross = out.cross(back).to_rational()?;
    let (re0, im0) = to_integer_pair(&dot, &cross);
    let g = re0.gcd(&im0);
    let (re0, im0) = (re0 / &g, im0 / &g);
    let (mut re, mut im) = (re0.clone(), im0.clone());
    for m in 1..=(2 * n_max) as i64 {
        if im.is_zero() && re.is_positive() {
            // m * angle = 2 pi k
            let k = (radians * m as f64 / std::f64::consts::TAU).round() as i64;
            return Some(Ratio::new(2 * k, m));
        }
        let nre = &re * &re0 - &im * &im0;
        let nim = &re * &im0 + &im * &re0;
        re = nre;
        im = nim;
    }
    None
}

struct Ambiguous;

fn float_angle_over_pi(radians: f64, n_max: u64) -> Result<Option<Ratio<i64>>, Ambiguous> {
    let x = radians / std::f64::consts::PI;
    let eps = crate::numeric::float_tolerance() * x.abs().max(1.0);
    let mut found: Option<Ratio<i64>> = None;
    for q in 1..=n_max as i64 {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() <= eps {
            let r = Ratio::new(p as i64, q);
            match found {
                None => found = Some(r),
                Some(f) if f == r => {}
                Some(_) => return Err(Ambiguous),
            }
        }
    }
    Ok(found)
}

/// Sum of interior angles over pi, when every angle is rational.
pub fn angle_sum_over_pi(class: &TableClass) -> Option<Ratio<i64>> {
    class
        .angles
        .iter()
        .try_fold(Ratio::from_integer(0), |acc, a| a.over_pi.map(|r| acc + r))
}

/// Applies `x -> a x + b` to every vertex, keeping labels on their edges.
pub fn transform_table<S: Scalar>(
    t: &LabeledTable<S>,
    a: &Mat2<S>,
    b: &Point2<S>,
) -> Result<LabeledTable<S>, TableError> {
    if mat_det(a).is_zero() {
        return Err(TableError::SingularMatrix);
    }
    let vertices = t.vertices.iter().map(|v| mat_apply(a, v).add(b)).collect();
    validate_table(t.name.clone(), vertices, t.labels.clone())
}

/// Converts integer angle data `p/q` into f64 radians.
pub fn ratio_to_radians(r: &Ratio<i64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI
}
