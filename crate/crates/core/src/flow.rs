//! Billiard flow: optical-reflection tracing, bounce words and padded words.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::numeric::{mat_apply, ray_segment_hit, reflection_matrix, Direction, GeometryError, Hit, HitKind, Point2, Scalar};
use crate::table::{Label, LabeledTable, Location};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("start point lies outside the table")]
    StartOutsideTable,
    #[error("start direction leaves the table immediately")]
    PointsOutOfTable,
    #[error("direction is zero or tangent to the boundary at the start point")]
    DegenerateDirection,
}

impl From<GeometryError> for FlowError {
    fn from(_: GeometryError) -> Self {
        FlowError::DegenerateDirection
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayState<S> {
    pub position: Point2<S>,
    pub direction: Direction<S>,
}

impl<S: Scalar> RayState<S> {
    pub fn new(position: Point2<S>, direction: Direction<S>) -> Self {
        RayState { position, direction }
    }
    pub fn reversed(&self) -> Self {
        RayState { position: self.position.clone(), direction: self.direction.reversed() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimeDirection {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BounceHit<S> {
    pub edge: usize,
    pub label: Label,
    pub point: Point2<S>,
    pub incoming: Direction<S>,
    pub reflected: Direction<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination<S> {
    BounceBudget,
    /// The ray met vertex `vertex` at parameter `t` of its final flight.
    SingularHit { t: S, vertex: usize, point: Point2<S> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    pub start: RayState<S>,
    pub hits: Vec<BounceHit<S>>,
    pub terminated_by: Termination<S>,
    pub time: TimeDirection,
}

impl<S: Scalar> Trajectory<S> {
    pub fn is_singular(&self) -> bool {
        matches!(self.terminated_by, Termination::SingularHit { .. })
    }
    /// Position and direction just after the last bounce.
    pub fn end_state(&self) -> RayState<S> {
        match self.hits.last() {
            Some(h) => RayState::new(h.point.clone(), h.reflected.clone()),
            None => self.start.clone(),
        }
    }
    pub fn singular_vertex(&self) -> Option<usize> {
        match self.terminated_by {
            Termination::SingularHit { vertex, .. } => Some(vertex),
            Termination::BounceBudget => None,
        }
    }
}

/// Label sequence of a trajectory. For backward words, `symbols[0]` carries
/// index -1, `symbols[1]` index -2, and so on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BounceWord {
    pub symbols: Vec<Label>,
    pub direction: TimeDirection,
    pub singular: bool,
}

impl BounceWord {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
    /// Index of `symbols[i]` in the bi-infinite bounce sequence.
    pub fn index_of(&self, i: usize) -> i64 {
        match self.direction {
            TimeDirection::Forward => i as i64,
            TimeDirection::Backward => -(i as i64) - 1,
        }
    }
}

impl fmt::Display for BounceWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(&self.symbols))
    }
}

/// Comma-joined symbols, `()` for the empty word.
pub fn format_word(symbols: &[Label]) -> String {
    if symbols.is_empty() {
        "()".to_string()
    } else {
        symbols.iter().map(|s| &**s).collect::<Vec<_>>().join(",")
    }
}

/// Inverse of [`format_word`].
pub fn parse_word(s: &str) -> Vec<Label> {
    let s = s.trim();
    if s.is_empty() || s == "()" {
        return Vec::new();
    }
    s.split(',').map(|t| Label::from(t.trim())).collect()
}

fn start_edges<S: Scalar>(table: &LabeledTable<S>, state: &RayState<S>) -> Result<Vec<usize>, FlowError> {
    let loc = table.locate(&state.position);
    let inward = table.points_inward(loc, state.direction.vector());
    match (loc, inward) {
        (Location::Exterior, _) => Err(FlowError::StartOutsideTable),
        (_, None) => Err(FlowError::DegenerateDirection),
        (_, Some(false)) => Err(FlowError::PointsOutOfTable),
        (Location::Interior, _) => Ok(Vec::new()),
        (Location::OnEdge(i), _) => Ok(vec![i]),
        (Location::AtVertex(i), _) => Ok(vec![i, (i + table.len() - 1) % table.len()]),
    }
}

/// Traces the forward billiard flow for up to `max_bounces` reflections.
///
/// A flight ending at a vertex stops the trajectory with
/// [`Termination::SingularHit`]; no reflection rule is applied at corners.
pub fn trace<S: Scalar>(
    table: &LabeledTable<S>,
    state: &RayState<S>,
    max_bounces: usize,
) -> Result<Trajectory<S>, FlowError> {
    let mut skip = start_edges(table, state)?;
    let n = table.len();
    let mut pos = state.position.clone();
    let mut dir = state.direction.clone();
    let mut hits = Vec::with_capacity(max_bounces);
    let mut terminated_by = Termination::BounceBudget;
    while hits.len() < max_bounces {
        let mut best: Option<(usize, Hit<S>)> = None;
        let mut corner: Option<usize> = None;
        for i in 0..n {
            if skip.contains(&i) {
                continue;
            }
            let Some(h) = ray_segment_hit(&pos, &dir, &table.edge(i))? else { continue };
            let vertex = match h.kind {
                HitKind::Interior => None,
                HitKind::EndpointA => Some(i),
                HitKind::EndpointB => Some((i + 1) % n),
            };
            match &best {
                Some((_, b)) => match h.t.cmp_tol(&b.t) {
                    Ordering::Less => {
                        corner = vertex;
                        best = Some((i, h));
                    }
                    Ordering::Equal => {
                        if corner.is_none() {
                            corner = vertex;
                        }
                    }
                    Ordering::Greater => {}
                },
                None => {
                    corner = vertex;
                    best = Some((i, h));
                }
            }
        }
        let Some((edge, hit)) = best else {
            // Only reachable through tolerance loss in float mode.
            return Err(FlowError::StartOutsideTable);
        };
        if let Some(vertex) = corner {
            terminated_by = Termination::SingularHit { t: hit.t, vertex, point: table.vertex(vertex).clone() };
            break;
        }
        let incoming = dir.clone();
        let r = reflection_matrix(&table.edge(edge).vector());
        dir = Direction::from_vector(&mat_apply(&r, incoming.vector()))?;
        pos = hit.point.clone();
        hits.push(BounceHit {
            edge,
            label: table.label(edge).clone(),
            point: hit.point,
            incoming,
            reflected: dir.clone(),
        });
        skip.clear();
        skip.push(edge);
    }
    Ok(Trajectory { start: state.clone(), hits, terminated_by, time: TimeDirection::Forward })
}

/// Traces the flow backward in time; hit `i` carries bounce index `-(i+1)`.
pub fn trace_backward<S: Scalar>(
    table: &LabeledTable<S>,
    state: &RayState<S>,
    max_bounces: usize,
) -> Result<Trajectory<S>, FlowError> {
    let mut t = trace(table, &state.reversed(), max_bounces)?;
    t.start = state.clone();
    t.time = TimeDirection::Backward;
    Ok(t)
}

pub fn bounce_word<S: Scalar>(traj: &Trajectory<S>) -> BounceWord {
    BounceWord {
        symbols: traj.hits.iter().map(|h| h.label.clone()).collect(),
        direction: traj.time,
        singular: traj.is_singular(),
    }
}

/// Symbol of the padded alphabet: a label, or the padding symbol `0`.
pub type PaddedSymbol = Option<Label>;

/// What a padded word holds outside its stored window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// Padding symbols forever.
    Zero,
    /// Labels forever.
    Letters,
}

/// A bi-infinite sequence over labels plus the padding symbol, described by a
/// finite window starting at `offset` and the behaviour of its two tails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaddedWord {
    pub offset: i64,
    pub window: Vec<PaddedSymbol>,
    pub left: Tail,
    pub right: Tail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PaddedClass {
    Empty,
    Finite { first: i64, last: i64 },
    ForwardInfinite { first: i64 },
    BackwardInfinite { last: i64 },
    BiInfinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaddedWordError {
    #[error("labels do not occupy an interval of indices")]
    NonIntervalSupport,
}

impl PaddedWord {
    /// `word` placed at indices `start..start+len`, padded by zeros.
    pub fn finite(word: &[Label], start: i64) -> Self {
        PaddedWord {
            offset: start,
            window: word.iter().cloned().map(Some).collect(),
            left: Tail::Zero,
            right: Tail::Zero,
        }
    }

    pub fn symbol_at(&self, i: i64) -> PaddedSymbol {
        let rel = i - self.offset;
        if rel < 0 {
            return match self.left {
                Tail::Zero => None,
                Tail::Letters => Some(Label::from("?")),
            };
        }
        match self.window.get(rel as usize) {
            Some(s) => s.clone(),
            None => match self.right {
                Tail::Zero => None,
                Tail::Letters => Some(Label::from("?")),
            },
        }
    }

    pub fn classify(&self) -> Result<PaddedClass, PaddedWordError> {
        let len = self.window.len() as i64;
        let nz: Vec<i64> = self
            .window
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .map(|(i, _)| self.offset + i as i64)
            .collect();
        let contiguous = |lo: i64, hi: i64| (lo..=hi).all(|i| self.symbol_at(i).is_some());
        let end = self.offset + len - 1;
        match (self.left, self.right) {
            (Tail::Zero, Tail::Zero) => match (nz.first(), nz.last()) {
                (Some(&a), Some(&b)) if contiguous(a, b) => Ok(PaddedClass::Finite { first: a, last: b }),
                (Some(_), _) => Err(PaddedWordError::NonIntervalSupport),
                _ => Ok(PaddedClass::Empty),
            },
            (Tail::Zero, Tail::Letters) => {
                let first = nz.first().copied().unwrap_or(self.offset + len);
                if contiguous(first, end) {
                    Ok(PaddedClass::ForwardInfinite { first })
                } else {
                    Err(PaddedWordError::NonIntervalSupport)
                }
            }
            (Tail::Letters, Tail::Zero) => {
                let last = nz.last().copied().unwrap_or(self.offset - 1);
                if contiguous(self.offset, last) {
                    Ok(PaddedClass::BackwardInfinite { last })
                } else {
                    Err(PaddedWordError::NonIntervalSupport)
                }
            }
            (Tail::Letters, Tail::Letters) => {
                if nz.len() as i64 == len {
                    Ok(PaddedClass::BiInfinite)
                } else {
                    Err(PaddedWordError::NonIntervalSupport)
                }
            }
        }
    }
}

/// Free-function form of [`PaddedWord::classify`].
pub fn classify_padded_word(w: &PaddedWord) -> Result<PaddedClass, PaddedWordError> {
    w.classify()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Exact;
    use crate::table::{labels, validate_table};

    fn square() -> LabeledTable<Exact> {
        validate_table(
            "square",
            vec![Point2::from_ints(0, 0), Point2::from_ints(1, 0), Point2::from_ints(1, 1), Point2::from_ints(0, 1)],
            labels(["1", "2", "3", "4"]),
        )
        .unwrap()
    }
    fn half() -> Point2<Exact> {
        Point2::new(Exact::from_ratio(1, 2), Exact::from_ratio(1, 2))
    }
    fn dir(x: i64, y: i64) -> Direction<Exact> {
        Direction::new(Exact::from_int(x), Exact::from_int(y)).unwrap()
    }
    fn word(t: &Trajectory<Exact>) -> String {
        bounce_word(t).to_string()
    }

    #[test]
    fn perpendicular_orbit() {
        let t = trace(&square(), &RayState::new(half(), dir(0, 1)), 4).unwrap();
        assert_eq!(word(&t), "3,1,3,1");
        assert_eq!(t.terminated_by, Termination::BounceBudget);
    }

    #[test]
    fn slope_half_orbit() {
        let t = trace(&square(), &RayState::new(half(), dir(2, 1)), 12).unwrap();
        assert_eq!(word(&t), "2,3,4,2,1,4,2,3,4,2,1,4");
        // period 6: the state after six bounces repeats
        assert_eq!(t.hits[5].reflected, t.start.direction);
    }

    #[test]
    fn corner_shots() {
        let t = trace(&square(), &RayState::new(half(), dir(1, 1)), 5).unwrap();
        assert_eq!(t.singular_vertex(), Some(2));
        assert!(t.hits.is_empty());
        let b = trace_backward(&square(), &RayState::new(half(), dir(1, 1)), 5).unwrap();
        assert_eq!(b.singular_vertex(), Some(0));
        match b.terminated_by {
            Termination::SingularHit { t, point, .. } => {
                assert_eq!(t, Exact::from_ratio(1, 2));
                assert_eq!(point, Point2::from_ints(0, 0));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn singular_after_two_hits() {
        // unfolded line from (1/2,1/2) towards the lattice corner (3,1)
        let t = trace(&square(), &RayState::new(half(), dir(5, 1)), 10).unwrap();
        let w = bounce_word(&t);
        assert_eq!(w.to_string(), "2,4");
        assert!(w.singular);
        assert_eq!(t.singular_vertex(), Some(2));
    }

    #[test]
    fn backward_word_indices() {
        let b = trace_backward(&square(), &RayState::new(half(), dir(0, 1)), 2).unwrap();
        let w = bounce_word(&b);
        assert_eq!(w.to_string(), "1,3");
        assert_eq!(w.direction, TimeDirection::Backward);
        assert_eq!((w.index_of(0), w.index_of(1)), (-1, -2));
    }

    #[test]
    fn zero_bounces_gives_empty_word() {
        let t = trace(&square(), &RayState::new(half(), dir(2, 1)), 0).unwrap();
        assert!(bounce_word(&t).is_empty());
        assert_eq!(bounce_word(&t).to_string(), "()");
    }

    #[test]
    fn start_errors() {
        let s = square();
        let out = RayState::new(Point2::from_ints(2, 2), dir(1, 0));
        assert_eq!(trace(&s, &out, 3).unwrap_err(), FlowError::StartOutsideTable);
        let graze = RayState::new(Point2::new(Exact::from_ratio(1, 2), <Exact as Scalar>::zero()), dir(1, 0));
        assert_eq!(trace(&s, &graze, 3).unwrap_err(), FlowError::DegenerateDirection);
        let leave = RayState::new(Point2::new(Exact::from_ratio(1, 2), <Exact as Scalar>::zero()), dir(0, -1));
        assert_eq!(trace(&s, &leave, 3).unwrap_err(), FlowError::PointsOutOfTable);
        let along = RayState::new(Point2::from_ints(0, 0), dir(1, 0));
        assert_eq!(trace(&s, &along, 3).unwrap_err(), FlowError::DegenerateDirection);
        let from_corner = RayState::new(Point2::from_ints(0, 0), dir(2, 1));
        assert_eq!(word(&trace(&s, &from_corner, 1).unwrap()), "2");
    }

    #[test]
    fn padded_words() {
        let w = PaddedWord::finite(&labels(["1", "2", "3"]), 0);
        assert_eq!(w.classify(), Ok(PaddedClass::Finite { first: 0, last: 2 }));
        let empty = PaddedWord { offset: -3, window: vec![None; 5], left: Tail::Zero, right: Tail::Zero };
        assert_eq!(empty.classify(), Ok(PaddedClass::Empty));
        let fwd = PaddedWord {
            offset: 3,
            window: vec![None, None, Some("1".into()), Some("2".into())],
            left: Tail::Zero,
            right: Tail::Letters,
        };
        assert_eq!(fwd.classify(), Ok(PaddedClass::ForwardInfinite { first: 5 }));
        let bwd = PaddedWord { offset: 0, window: vec![Some("4".into()), None], left: Tail::Letters, right: Tail::Zero };
        assert_eq!(bwd.classify(), Ok(PaddedClass::BackwardInfinite { last: 0 }));
        let bi = PaddedWord { offset: 0, window: vec![Some("4".into())], left: Tail::Letters, right: Tail::Letters };
        assert_eq!(bi.classify(), Ok(PaddedClass::BiInfinite));
        let gap = PaddedWord {
            offset: 0,
            window: vec![Some("1".into()), None, Some("2".into())],
            left: Tail::Zero,
            right: Tail::Zero,
        };
        assert_eq!(gap.classify(), Err(PaddedWordError::NonIntervalSupport));
        let broken = PaddedWord { offset: 0, window: vec![Some("1".into()), None], left: Tail::Zero, right: Tail::Letters };
        assert_eq!(broken.classify(), Err(PaddedWordError::NonIntervalSupport));
    }

    #[test]
    fn word_io() {
        assert_eq!(parse_word("2,3,4"), labels(["2", "3", "4"]));
        assert!(parse_word("()").is_empty());
        assert_eq!(format_word(&parse_word("ab,c")), "ab,c");
    }
}
