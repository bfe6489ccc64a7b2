//! Unfoldings: corridors of reflected copies along a word, development of
//! trajectories, and the dihedral translation-surface unfolding of rational
//! tables.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Ratio;
use thiserror::Error;

use crate::flow::Trajectory;
use crate::numeric::{
    mat_apply, mat_approx_eq, mat_identity, mat_mul, orientation, reflection_across, reflection_matrix,
    rotation_matrix, Isometry, Mat2, Orientation, Point2, Scalar, Segment,
};
use crate::table::{classify_table_with_bound, Label, LabeledTable, TableError, DEFAULT_N_MAX};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnfoldError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label repeated at positions {0} and {1}; a trajectory cannot hit the same edge twice in a row")]
    RepeatedLabel(usize, usize),
    #[error("trajectory ends at a vertex")]
    SingularTrajectory,
    #[error("table has an angle that is not a rational multiple of pi")]
    NotRational,
    #[error("unfolding group order parameter {n} exceeds the bound {bound}")]
    NExceedsBound { n: u64, bound: u64 },
    #[error("rotation by 2pi/{0} is not representable in the exact backend")]
    NotRepresentable(u64),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Reflected copies `G_0 = id, G_k = G_{k-1} ∘ ρ_{a_k}` of the table along a
/// word, with the shared edges ("gates") between consecutive copies.
#[derive(Clone, Debug, PartialEq)]
pub struct UnfoldingCorridor<S> {
    pub word: Vec<Label>,
    /// Edge index of each symbol.
    pub edges: Vec<usize>,
    /// `copies[k] = G_k`, `k = 0..=m`.
    pub copies: Vec<Isometry<S>>,
    /// `gates[k-1] = G_{k-1}(edge a_k)`.
    pub gates: Vec<Segment<S>>,
}

impl<S: Scalar> UnfoldingCorridor<S> {
    /// `G_m`.
    pub fn composite(&self) -> &Isometry<S> {
        self.copies.last().expect("corridor always has the identity copy")
    }
    pub fn copy_polygon(&self, table: &LabeledTable<S>, k: usize) -> Vec<Point2<S>> {
        table.vertices().iter().map(|v| self.copies[k].apply(v)).collect()
    }
}

/// Resolves labels to edge indices, rejecting unknown labels and immediate repeats.
pub fn word_edges<S: Scalar>(t: &LabeledTable<S>, word: &[Label]) -> Result<Vec<usize>, UnfoldError> {
    let edges = word
        .iter()
        .map(|l| t.edge_index(l).ok_or_else(|| UnfoldError::UnknownLabel(l.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    for k in 1..edges.len() {
        if edges[k] == edges[k - 1] {
            return Err(UnfoldError::RepeatedLabel(k - 1, k));
        }
    }
    Ok(edges)
}

pub fn unfold_word<S: Scalar>(t: &LabeledTable<S>, word: &[Label]) -> Result<UnfoldingCorridor<S>, UnfoldError> {
    let edges = word_edges(t, word)?;
    let reflections: Vec<Isometry<S>> = t
        .edges()
        .map(|e| reflection_across(&e).expect("validated tables have no zero-length edge"))
        .collect();
    let mut copies = Vec::with_capacity(edges.len() + 1);
    let mut gates = Vec::with_capacity(edges.len());
    copies.push(Isometry::identity());
    for &e in &edges {
        let prev = copies.last().unwrap();
        gates.push(prev.apply_segment(&t.edge(e)));
        let next = prev.compose(&reflections[e]);
        copies.push(next);
    }
    Ok(UnfoldingCorridor { word: word.to_vec(), edges, copies, gates })
}

/// A trajectory laid out straight across its corridor.
#[derive(Clone, Debug, PartialEq)]
pub struct Development<S> {
    pub corridor: UnfoldingCorridor<S>,
    pub start: Point2<S>,
    /// `points[k] = G_k(hit_{k+1})`, the image of each hit on its gate.
    pub points: Vec<Point2<S>>,
}

impl<S: Scalar> Development<S> {
    /// Maps each developed point back into the table.
    pub fn fold(&self) -> Vec<Point2<S>> {
        self.points
            .iter()
            .enumerate()
            .map(|(k, p)| self.corridor.copies[k].inverse().apply(p))
            .collect()
    }

    /// Whether the start and every developed point lie on one line.
    pub fn is_collinear(&self) -> bool {
        let Some(first) = self.points.first() else { return true };
        self.points.iter().all(|p| orientation(&self.start, first, p) == Orientation::Collinear)
    }
}

pub fn develop_trajectory<S: Scalar>(
    t: &LabeledTable<S>,
    traj: &Trajectory<S>,
) -> Result<Development<S>, UnfoldError> {
    if traj.is_singular() {
        return Err(UnfoldError::SingularTrajectory);
    }
    let word: Vec<Label> = traj.hits.iter().map(|h| h.label.clone()).collect();
    let corridor = unfold_word(t, &word)?;
    let points = traj
        .hits
        .iter()
        .enumerate()
        .map(|(k, h)| corridor.copies[k].apply(&h.point))
        .collect();
    Ok(Development { corridor, start: traj.start.position.clone(), points })
}

/// Element of the dihedral group of order `2N`: rotation by `2 pi r / N`,
/// preceded by the reflection in the line of edge 0 when `flip` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dihedral {
    pub rotation: u64,
    pub flip: bool,
}

impl Dihedral {
    pub const IDENTITY: Dihedral = Dihedral { rotation: 0, flip: false };

    /// `self ∘ other` in `D_n`.
    pub fn compose(self, other: Dihedral, n: u64) -> Dihedral {
        let r = if self.flip { (self.rotation + n - other.rotation % n) % n } else { (self.rotation + other.rotation) % n };
        Dihedral { rotation: r, flip: self.flip ^ other.flip }
    }

    /// Position in the canonical enumeration: rotations first, then flips.
    pub fn index(self, n: u64) -> usize {
        (self.rotation + if self.flip { n } else { 0 }) as usize
    }

    pub fn from_index(i: usize, n: u64) -> Dihedral {
        let i = i as u64;
        Dihedral { rotation: i % n, flip: i >= n }
    }
}

/// Edge `edge` of copy `copy_a` is identified with edge `edge` of copy
/// `copy_b` by translating by `translation`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gluing<S> {
    pub copy_a: usize,
    pub copy_b: usize,
    pub edge: usize,
    pub translation: Point2<S>,
}

/// Cone points lying over one vertex of the table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeData {
    pub vertex: usize,
    pub angle_over_pi: Ratio<i64>,
    pub multiplicity: u64,
}

impl ConeData {
    /// Cone angle strictly above `2 pi`.
    pub fn exceeds_two_pi(&self) -> bool {
        self.angle_over_pi > Ratio::from_integer(2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationSurface<S> {
    pub name: String,
    /// Labels of the underlying table, used to name copy edges.
    pub labels: Vec<Label>,
    pub n: u64,
    pub elements: Vec<Dihedral>,
    /// Linear part placing each copy in the plane.
    pub copies: Vec<Isometry<S>>,
    pub gluings: Vec<Gluing<S>>,
    /// Classes of `(copy, vertex)` pairs identified by the gluing.
    pub vertex_classes: Vec<Vec<(usize, usize)>>,
    pub cone_points: Vec<ConeData>,
    pub euler_characteristic: i64,
    pub genus: i64,
    /// Order of the linear holonomy group of the glued surface.
    pub holonomy_order: usize,
    /// Order `2N` of the folding group.
    pub folding_group_order: u64,
    /// Every cone angle is at least `2 pi`.
    pub is_npc: bool,
}

impl<S: Scalar> TranslationSurface<S> {
    /// Every vertex of the table lifts to cone points of angle above `2 pi`.
    pub fn satisfies_unfolding_condition(&self) -> bool {
        self.cone_points.iter().all(ConeData::exceeds_two_pi)
    }

    /// Sum over cone points of `(2 pi - angle) / pi`.
    pub fn curvature_over_pi(&self) -> Ratio<i64> {
        self.cone_points.iter().fold(Ratio::from_integer(0), |acc, c| {
            acc + (Ratio::from_integer(2) - c.angle_over_pi) * Ratio::from_integer(c.multiplicity as i64)
        })
    }

    /// Line-based export: header, one `cone` line per table vertex, one `glue`
    /// line per identified edge pair.
    pub fn export(&self) -> String {
        let mut out = format!("surface {} copies {} genus {}\n", self.name, self.copies.len(), self.genus);
        for c in &self.cone_points {
            out.push_str(&format!("cone {} x{}\n", format_ratio(&c.angle_over_pi), c.multiplicity));
        }
        for g in &self.gluings {
            let l = &self.labels[g.edge];
            out.push_str(&format!(
                "glue {}.{} {}.{} {} {}\n",
                g.copy_a,
                l,
                g.copy_b,
                l,
                g.translation.x.format(),
                g.translation.y.format()
            ));
        }
        out
    }
}

pub(crate) fn format_ratio(r: &Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

pub fn build_rational_unfolding<S: Scalar>(t: &LabeledTable<S>) -> Result<TranslationSurface<S>, UnfoldError> {
    build_rational_unfolding_with_bound(t, DEFAULT_N_MAX)
}

/// Glues `2N` copies of a rational table, indexed by the dihedral group
/// generated by reflections in the edge directions, into a translation surface.
pub fn build_rational_unfolding_with_bound<S: Scalar>(
    t: &LabeledTable<S>,
    n_max: u64,
) -> Result<TranslationSurface<S>, UnfoldError> {
    let class = classify_table_with_bound(t, n_max.max(DEFAULT_N_MAX))?;
    let angles = class.rational_angles().ok_or(UnfoldError::NotRational)?;
    let n = class.n.ok_or(UnfoldError::NotRational)?;
    if n > n_max {
        return Err(UnfoldError::NExceedsBound { n, bound: n_max });
    }
    let sides = t.len();

    // Edge line directions in units of pi/N, relative to edge 0.
    let steps: Vec<u64> = angles.iter().map(|a| (a * Ratio::from_integer(n as i64)).to_integer() as u64).collect();
    let mut line_class = vec![0u64; sides];
    for i in 1..sides {
        line_class[i] = (line_class[i - 1] + n * 2 - steps[i] % (2 * n)) % n;
    }
    let reflections: Vec<Dihedral> = line_class.iter().map(|&j| Dihedral { rotation: j, flip: true }).collect();

    let base_flip = reflection_matrix(&t.edge(0).vector());
    let order = (2 * n) as usize;
    let elements: Vec<Dihedral> = (0..order).map(|i| Dihedral::from_index(i, n)).collect();
    let mut copies = Vec::with_capacity(order);
    for g in &elements {
        let (c, s) = S::cos_sin_pi(2 * g.rotation as i64, n as i64).ok_or(UnfoldError::NotRepresentable(n))?;
        let rot = rotation_matrix(c, s);
        let linear = if g.flip { mat_mul(&rot, &base_flip) } else { rot };
        copies.push(Isometry::from_linear(linear));
    }
    // The symbolic reflections must agree with the geometric ones.
    for (e, r) in reflections.iter().enumerate() {
        let geometric = reflection_matrix(&t.edge(e).vector());
        debug_assert!(mat_approx_eq(&copies[r.index(n)].linear, &geometric));
    }

    let mut gluings = Vec::new();
    let mut uf = UnionFind::new(order * sides);
    for (a, g) in elements.iter().enumerate() {
        for (e, &refl) in reflections.iter().enumerate() {
            let b = g.compose(refl, n).index(n);
            uf.union(a * sides + e, b * sides + e);
            uf.union(a * sides + (e + 1) % sides, b * sides + (e + 1) % sides);
            if a < b {
                let x = t.vertex(e);
                let r = reflection_matrix(&t.edge(e).vector());
                let shift = mat_apply(&r, x).sub(x);
                gluings.push(Gluing { copy_a: a, copy_b: b, edge: e, translation: copies[a].apply_vector(&shift) });
            }
        }
    }

    let mut classes: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for a in 0..order {
        for v in 0..sides {
            classes.entry(uf.find(a * sides + v)).or_default().push((a, v));
        }
    }
    let vertex_classes: Vec<Vec<(usize, usize)>> = classes.into_values().collect();

    let mut cone_points: Vec<ConeData> = (0..sides)
        .map(|v| ConeData { vertex: v, angle_over_pi: Ratio::from_integer(0), multiplicity: 0 })
        .collect();
    for class in &vertex_classes {
        let v = class[0].1;
        debug_assert!(class.iter().all(|&(_, w)| w == v));
        let angle = angles[v] * Ratio::from_integer(class.len() as i64);
        let c = &mut cone_points[v];
        if c.multiplicity > 0 && c.angle_over_pi != angle {
            unreachable!("cone points over one vertex share their angle");
        }
        c.angle_over_pi = angle;
        c.multiplicity += 1;
    }

    let v = vertex_classes.len() as i64;
    let e = (order * sides / 2) as i64;
    let f = order as i64;
    let euler_characteristic = v - e + f;
    let genus = (2 - euler_characteristic) / 2;

    let holonomy_order = linear_group_order(gluings.iter().map(|_| mat_identity::<S>()).collect());
    let is_npc = cone_points.iter().all(|c| c.angle_over_pi >= Ratio::from_integer(2));

    Ok(TranslationSurface {
        name: t.name().to_string(),
        labels: t.labels().to_vec(),
        n,
        elements,
        copies,
        gluings,
        vertex_classes,
        cone_points,
        euler_characteristic,
        genus,
        holonomy_order,
        folding_group_order: 2 * n,
        is_npc,
    })
}

/// Size of the group generated by a set of 2x2 orthogonal matrices, by closure.
pub(crate) fn linear_group_order<S: Scalar>(generators: Vec<Mat2<S>>) -> usize {
    let mut elements = vec![mat_identity::<S>()];
    let mut frontier = elements.clone();
    while let Some(m) = frontier.pop() {
        for g in &generators {
            let p = mat_mul(&m, g);
            if !elements.iter().any(|x| mat_approx_eq(x, &p)) {
                elements.push(p.clone());
                frontier.push(p);
            }
            if elements.len() > 100_000 {
                return usize::MAX;
            }
        }
    }
    elements.len()
}

/// `lcm` of the denominators of `angles`.
pub fn angle_lcm(angles: &[Ratio<i64>]) -> u64 {
    angles.iter().fold(1u64, |acc, a| acc.lcm(&(*a.denom() as u64)))
}
