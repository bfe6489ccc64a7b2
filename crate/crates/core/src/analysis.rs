//! Symbolic dynamics: periodic words, generalized diagonals, sampled bounce
//! languages and their comparison.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::flow::{trace, RayState, Termination};
use crate::numeric::{orientation, reflection_across, Direction, Isometry, Orientation, Point2, Scalar, Segment};
use crate::table::{Label, LabeledTable, Location};
use crate::unfolding::{unfold_word, word_edges, UnfoldError, UnfoldingCorridor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodicReason {
    /// The corridor composite is not a nonzero translation.
    NonTranslationComposite,
    /// The gate projections have no common interior.
    EmptyCorridor,
    /// The central line crosses the gates out of order, or retracing it does
    /// not reproduce the word.
    WitnessRejected,
    Found,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbitResult<S> {
    pub exists: bool,
    pub reason: PeriodicReason,
    /// The word actually unfolded (doubled when the input has odd length).
    pub word: Vec<Label>,
    pub doubled: bool,
    pub corridor: UnfoldingCorridor<S>,
    pub translation: Option<Point2<S>>,
    pub witness_start: Option<RayState<S>>,
    /// Open interval of `n . x` over the corridor, where `n` is the
    /// translation rotated by a quarter turn (so scaled by `|T|`).
    pub corridor_interval: Option<(S, S)>,
    /// Square of the corridor cross-section width.
    pub family_width_sq: Option<S>,
}

impl<S: Scalar> PeriodicOrbitResult<S> {
    /// Width of the parallel family, when it has an exact square root in this backend.
    pub fn family_width(&self) -> Option<S> {
        self.family_width_sq.as_ref().and_then(S::sqrt_exact)
    }

    /// Start state on the line `n . x = c` in the original table, for `c`
    /// strictly inside the corridor interval.
    pub fn start_for_offset(&self, c: &S) -> Option<RayState<S>> {
        let t = self.translation.as_ref()?;
        let (lo, hi) = self.corridor_interval.as_ref()?;
        if c.cmp_tol(lo) != Ordering::Greater || c.cmp_tol(hi) != Ordering::Less {
            return None;
        }
        line_start(&self.corridor, t, c)
    }
}

fn normal_of<S: Scalar>(t: &Point2<S>) -> Point2<S> {
    t.perp()
}

/// Point of the line `n . x = c` on a gate.
fn gate_crossing<S: Scalar>(gate: &Segment<S>, n: &Point2<S>, c: &S) -> Option<Point2<S>> {
    let v = gate.vector();
    let denom = n.dot(&v);
    if denom.is_zero() {
        return None;
    }
    let u = (c.clone() - n.dot(&gate.a)) / denom;
    Some(gate.a.add(&v.scale(&u)))
}

fn line_start<S: Scalar>(corridor: &UnfoldingCorridor<S>, t: &Point2<S>, c: &S) -> Option<RayState<S>> {
    let n = normal_of(t);
    let first = gate_crossing(corridor.gates.first()?, &n, c)?;
    let last = gate_crossing(corridor.gates.last()?, &n, c)?;
    let position = last.sub(t).midpoint(&first);
    Some(RayState::new(position, Direction::from_vector(t).ok()?))
}

/// Crossing points of the line `n . x = c` with every gate, in gate order,
/// if they advance strictly along `t` and close up before the next period.
fn ordered_crossings<S: Scalar>(corridor: &UnfoldingCorridor<S>, t: &Point2<S>, c: &S) -> Option<Vec<Point2<S>>> {
    let n = normal_of(t);
    let pts: Vec<Point2<S>> = corridor.gates.iter().map(|g| gate_crossing(g, &n, c)).collect::<Option<_>>()?;
    let s: Vec<S> = pts.iter().map(|p| t.dot(p)).collect();
    let increasing = s.windows(2).all(|w| w[0].cmp_tol(&w[1]) == Ordering::Less);
    let closes = s.last()?.cmp_tol(&(s[0].clone() + t.norm_sq())) == Ordering::Less;
    (increasing && closes).then_some(pts)
}

pub fn periodic_orbit_for_word<S: Scalar>(
    t: &LabeledTable<S>,
    word: &[Label],
) -> Result<PeriodicOrbitResult<S>, UnfoldError> {
    let edges = word_edges(t, word)?;
    if edges.len() > 1 && edges[0] == edges[edges.len() - 1] {
        return Err(UnfoldError::RepeatedLabel(edges.len() - 1, 0));
    }
    let doubled = word.len() % 2 == 1;
    let full: Vec<Label> = if doubled { word.iter().chain(word).cloned().collect() } else { word.to_vec() };
    let corridor = unfold_word(t, &full)?;
    let mut result = PeriodicOrbitResult {
        exists: false,
        reason: PeriodicReason::NonTranslationComposite,
        word: full,
        doubled,
        corridor,
        translation: None,
        witness_start: None,
        corridor_interval: None,
        family_width_sq: None,
    };
    let composite = result.corridor.composite();
    if result.corridor.gates.is_empty() || !composite.is_translation() || composite.translation.is_zero() {
        return Ok(result);
    }
    let tr = composite.translation.clone();
    let n = normal_of(&tr);
    let mut interval: Option<(S, S)> = None;
    for g in &result.corridor.gates {
        let (a, b) = (n.dot(&g.a), n.dot(&g.b));
        let (glo, ghi) = if a.cmp_tol(&b) == Ordering::Greater { (b, a) } else { (a, b) };
        interval = Some(match interval {
            None => (glo, ghi),
            Some((lo, hi)) => (
                if glo.cmp_tol(&lo) == Ordering::Greater { glo } else { lo },
                if ghi.cmp_tol(&hi) == Ordering::Less { ghi } else { hi },
            ),
        });
    }
    let (lo, hi) = interval.expect("at least one gate");
    result.translation = Some(tr.clone());
    if lo.cmp_tol(&hi) != Ordering::Less {
        result.reason = PeriodicReason::EmptyCorridor;
        return Ok(result);
    }
    let width = hi.clone() - lo.clone();
    result.family_width_sq = Some(width.clone() * width / tr.norm_sq());
    let mid = (lo.clone() + hi.clone()) / S::from_int(2);
    result.corridor_interval = Some((lo, hi));
    result.reason = PeriodicReason::WitnessRejected;
    if ordered_crossings(&result.corridor, &tr, &mid).is_none() {
        return Ok(result);
    }
    let Some(start) = line_start(&result.corridor, &tr, &mid) else { return Ok(result) };
    if !closes_up(t, &start, &result.word) {
        return Ok(result);
    }
    result.witness_start = Some(start);
    result.exists = true;
    result.reason = PeriodicReason::Found;
    Ok(result)
}

/// Whether tracing `start` reproduces `word` and flies back through `start`
/// with its original direction.
pub fn closes_up<S: Scalar>(t: &LabeledTable<S>, start: &RayState<S>, word: &[Label]) -> bool {
    let Ok(traj) = trace(t, start, word.len()) else { return false };
    if traj.is_singular() || traj.hits.len() != word.len() {
        return false;
    }
    if traj.hits.iter().zip(word).any(|(h, l)| &h.label != l) {
        return false;
    }
    let end = traj.end_state();
    let back = start.position.sub(&end.position);
    end.direction.same_ray(&start.direction)
        && orientation(&end.position, &end.position.add(end.direction.vector()), &start.position) == Orientation::Collinear
        && back.dot_sign(end.direction.vector()) == Ordering::Greater
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagonalError {
    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),
    #[error("maximum length must be positive")]
    NonPositiveLength,
    #[error("search exceeded {0} corridor nodes")]
    SearchLimitExceeded(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalRecord<S> {
    pub word: Vec<Label>,
    pub source_vertex: usize,
    pub target_vertex: usize,
    /// The endpoint in the developed plane.
    pub target_image: Point2<S>,
    pub length_sq: S,
}

pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

/// Open convex cone of directions, counter-clockwise from `from` to `to`.
#[derive(Clone, Debug)]
struct Sector<S> {
    from: Point2<S>,
    to: Point2<S>,
}

impl<S: Scalar> Sector<S> {
    fn contains_closed(&self, d: &Point2<S>) -> bool {
        self.from.cross_sign(d) != Ordering::Less
            && d.cross_sign(&self.to) != Ordering::Less
            && !(self.from.cross_sign(d) == Ordering::Equal && self.from.dot_sign(d) != Ordering::Greater)
    }
    fn contains_open(&self, d: &Point2<S>) -> bool {
        self.from.cross_sign(d) == Ordering::Greater && d.cross_sign(&self.to) == Ordering::Greater
    }
    fn intersect(&self, o: &Sector<S>) -> Option<Sector<S>> {
        let from = if o.contains_closed(&self.from) && self.contains_closed(&self.from) {
            self.from.clone()
        } else if self.contains_closed(&o.from) {
            o.from.clone()
        } else {
            return None;
        };
        let to = if o.contains_closed(&self.to) {
            self.to.clone()
        } else if self.contains_closed(&o.to) {
            o.to.clone()
        } else {
            return None;
        };
        (from.cross_sign(&to) == Ordering::Greater).then_some(Sector { from, to })
    }
}

struct Node<S> {
    copy: Isometry<S>,
    edges: Vec<usize>,
    sector: Sector<S>,
    entered: Option<usize>,
}

pub fn enumerate_generalized_diagonals<S: Scalar>(
    t: &LabeledTable<S>,
    source_vertex: usize,
    max_length: &S,
) -> Result<Vec<DiagonalRecord<S>>, DiagonalError> {
    enumerate_generalized_diagonals_with_limit(t, source_vertex, max_length, DEFAULT_NODE_LIMIT)
}

/// Breadth-first search over corridors rooted at the source vertex. Each node
/// keeps the open cone of directions from the source that thread every gate so
/// far; vertex images inside the cone and within range are candidate
/// diagonals, each confirmed by tracing it in the table.
pub fn enumerate_generalized_diagonals_with_limit<S: Scalar>(
    t: &LabeledTable<S>,
    source_vertex: usize,
    max_length: &S,
    node_limit: usize,
) -> Result<Vec<DiagonalRecord<S>>, DiagonalError> {
    let n = t.len();
    if source_vertex >= n {
        return Err(DiagonalError::UnknownVertex(source_vertex));
    }
    if max_length.sign() != Ordering::Greater {
        return Err(DiagonalError::NonPositiveLength);
    }
    let max_sq = max_length.clone() * max_length.clone();
    let src = t.vertex(source_vertex).clone();
    let out = t.vertex(source_vertex + 1).sub(&src);
    let back = t.vertex(source_vertex + n - 1).sub(&src);
    let reflections: Vec<Isometry<S>> =
        t.edges().map(|e| reflection_across(&e).expect("validated edge")).collect();

    let mut roots = Vec::new();
    let mut probes = Vec::new();
    if out.cross_sign(&back) == Ordering::Greater {
        roots.push(Sector { from: out, to: back });
    } else {
        // Reflex corner: split along one interior ray and probe that ray directly.
        let mid = out.add(&back).neg();
        roots.push(Sector { from: out, to: mid.clone() });
        roots.push(Sector { from: mid.clone(), to: back });
        probes.push(mid);
    }

    let mut candidates: Vec<(Vec<usize>, usize, Point2<S>)> = Vec::new();
    let mut queue: VecDeque<Node<S>> = roots
        .into_iter()
        .map(|sector| Node { copy: Isometry::identity(), edges: Vec::new(), sector, entered: None })
        .collect();
    let mut visited = 0usize;
    while let Some(node) = queue.pop_front() {
        visited += 1;
        if visited > node_limit {
            return Err(DiagonalError::SearchLimitExceeded(node_limit));
        }
        let gate_ends = node.entered.map(|e| [e, (e + 1) % n]);
        for w in 0..n {
            if node.entered.is_none() && w == source_vertex {
                continue;
            }
            if gate_ends.is_some_and(|g| g.contains(&w)) {
                continue;
            }
            let q = node.copy.apply(t.vertex(w));
            let d = q.sub(&src);
            if node.sector.contains_open(&d) && d.norm_sq().cmp_tol(&max_sq) != Ordering::Greater {
                candidates.push((node.edges.clone(), w, q));
            }
        }
        for (e, refl) in reflections.iter().enumerate() {
            if Some(e) == node.entered {
                continue;
            }
            let gate = node.copy.apply_segment(&t.edge(e));
            let (a, b) = (gate.a.sub(&src), gate.b.sub(&src));
            let span = match a.cross_sign(&b) {
                Ordering::Greater => Sector { from: a, to: b },
                Ordering::Less => Sector { from: b, to: a },
                Ordering::Equal => continue,
            };
            let Some(sector) = node.sector.intersect(&span) else { continue };
            if gate.distance_sq(&src).cmp_tol(&max_sq) == Ordering::Greater {
                continue;
            }
            let mut edges = node.edges.clone();
            edges.push(e);
            queue.push_back(Node { copy: node.copy.compose(refl), edges, sector, entered: Some(e) });
        }
    }

    let mut records = Vec::new();
    for (edges, w, q) in candidates {
        if let Some(r) = confirm_diagonal(t, source_vertex, &edges, w, q) {
            records.push(r);
        }
    }
    for d in probes {
        records.extend(probe_direction(t, source_vertex, &d, &max_sq));
    }
    records.sort_by(|a, b| a.length_sq.cmp_tol(&b.length_sq).then_with(|| a.word.cmp(&b.word)));
    records.dedup_by(|a, b| a.word == b.word && a.target_vertex == b.target_vertex);
    Ok(records)
}

/// Traces from the source towards `q` and checks that the flight reproduces
/// the expected edge sequence and ends at vertex `w`.
fn confirm_diagonal<S: Scalar>(
    t: &LabeledTable<S>,
    source: usize,
    edges: &[usize],
    w: usize,
    q: Point2<S>,
) -> Option<DiagonalRecord<S>> {
    let src = t.vertex(source).clone();
    let d = q.sub(&src);
    let start = RayState::new(src, Direction::from_vector(&d).ok()?);
    let traj = trace(t, &start, edges.len() + 1).ok()?;
    let hit_edges: Vec<usize> = traj.hits.iter().map(|h| h.edge).collect();
    if hit_edges != edges || traj.singular_vertex() != Some(w) {
        return None;
    }
    Some(DiagonalRecord {
        word: edges.iter().map(|&e| t.label(e).clone()).collect(),
        source_vertex: source,
        target_vertex: w,
        length_sq: d.norm_sq(),
        target_image: q,
    })
}

/// Follows one direction from the source, developing the path, until it ends
/// at a vertex or runs past `max_sq`.
fn probe_direction<S: Scalar>(t: &LabeledTable<S>, source: usize, d: &Point2<S>, max_sq: &S) -> Option<DiagonalRecord<S>> {
    let src = t.vertex(source).clone();
    let start = RayState::new(src.clone(), Direction::from_vector(d).ok()?);
    let mut budget = 8;
    loop {
        let traj = trace(t, &start, budget).ok()?;
        let mut copy = Isometry::identity();
        for h in &traj.hits {
            let dev = copy.apply(&h.point);
            if dev.sub(&src).norm_sq().cmp_tol(max_sq) == Ordering::Greater {
                return None;
            }
            copy = copy.compose(&reflection_across(&t.edge(h.edge)).ok()?);
        }
        if let Termination::SingularHit { vertex, .. } = traj.terminated_by {
            let q = copy.apply(t.vertex(vertex));
            let edges: Vec<usize> = traj.hits.iter().map(|h| h.edge).collect();
            if q.sub(&src).norm_sq().cmp_tol(max_sq) == Ordering::Greater {
                return None;
            }
            return confirm_diagonal(t, source, &edges, vertex, q);
        }
        budget *= 2;
    }
}

/// A set of length-`k` windows observed in a table's bounce sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct WordLanguage {
    pub k: usize,
    pub alphabet: Vec<Label>,
    pub words: BTreeSet<Vec<Label>>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Provenance {
    pub seed: u64,
    pub budget: usize,
    pub margin: usize,
    /// Trajectories traced to completion.
    pub traced: usize,
    /// Trajectories discarded for meeting a vertex.
    pub singular: usize,
    /// Quasi-random points that fell outside the table.
    pub rejected_starts: usize,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let b = base as f64;
    let mut f = 1.0 / b;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f /= b;
    }
    r
}

/// Deterministic low-discrepancy start states inside a table: a shifted
/// Halton sequence over the bounding box (rejecting exterior points) paired
/// with a direction angle in `[0, 2 pi)`.
pub struct StartSampler<'a, S> {
    table: &'a LabeledTable<S>,
    shift: [f64; 3],
    index: u64,
    lo: (f64, f64),
    size: (f64, f64),
    pub rejected: usize,
}

impl<'a, S: Scalar> StartSampler<'a, S> {
    pub fn new(table: &'a LabeledTable<S>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        let xs: Vec<(f64, f64)> = table.vertices().iter().map(Point2::to_f64).collect();
        let minx = xs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let maxx = xs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let miny = xs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let maxy = xs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        StartSampler { table, shift, index: 1, lo: (minx, miny), size: (maxx - minx, maxy - miny), rejected: 0 }
    }

    /// Next quasi-random point in the unit cube.
    pub fn next_unit(&mut self) -> [f64; 3] {
        let i = self.index;
        self.index += 1;
        let mut u = [radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5)];
        for (x, s) in u.iter_mut().zip(self.shift) {
            *x = (*x + s).fract();
        }
        u
    }
}

impl<S: Scalar> Iterator for StartSampler<'_, S> {
    type Item = RayState<S>;

    fn next(&mut self) -> Option<RayState<S>> {
        loop {
            let [u, v, w] = self.next_unit();
            let p = Point2::new(
                S::from_f64_approx(self.lo.0 + u * self.size.0),
                S::from_f64_approx(self.lo.1 + v * self.size.1),
            );
            if self.table.locate(&p) != Location::Interior {
                self.rejected += 1;
                continue;
            }
            let a = std::f64::consts::TAU * w;
            let Ok(d) = Direction::new(S::from_f64_approx(a.cos()), S::from_f64_approx(a.sin())) else {
                self.rejected += 1;
                continue;
            };
            return Some(RayState::new(p, d));
        }
    }
}

pub fn sample_starts<S: Scalar>(t: &LabeledTable<S>, count: usize, seed: u64) -> Vec<RayState<S>> {
    StartSampler::new(t, seed).take(count).collect()
}

/// Traces each start for `bounces` reflections; `None` for singular or failed traces.
pub fn trace_words<S: Scalar>(t: &LabeledTable<S>, starts: &[RayState<S>], bounces: usize) -> Vec<Option<Vec<Label>>> {
    starts
        .par_iter()
        .map(|s| match trace(t, s, bounces) {
            Ok(tr) if !tr.is_singular() => Some(tr.hits.into_iter().map(|h| h.label).collect()),
            _ => None,
        })
        .collect()
}

fn add_factors(words: &mut BTreeSet<Vec<Label>>, w: &[Label], k: usize) {
    for f in w.windows(k) {
        words.insert(f.to_vec());
    }
}

/// Length-`k` factors of the words traced from the given starts, with a margin of `k` extra bounces.
pub fn language_from_starts<S: Scalar>(t: &LabeledTable<S>, starts: &[RayState<S>], k: usize) -> WordLanguage {
    let margin = k;
    let mut words = BTreeSet::new();
    let mut provenance = Provenance { budget: starts.len(), margin, ..Provenance::default() };
    for w in trace_words(t, starts, k + margin) {
        match w {
            Some(w) => {
                provenance.traced += 1;
                add_factors(&mut words, &w, k);
            }
            None => provenance.singular += 1,
        }
    }
    WordLanguage { k, alphabet: t.labels().to_vec(), words, provenance }
}

/// Collects length-`k` windows from `budget` nonsingular sampled trajectories.
pub fn sample_bounce_language<S: Scalar>(t: &LabeledTable<S>, k: usize, budget: usize, seed: u64) -> WordLanguage {
    let k = k.max(1);
    let margin = k;
    let mut sampler = StartSampler::new(t, seed);
    let mut words = BTreeSet::new();
    let mut provenance = Provenance { seed, budget, margin, ..Provenance::default() };
    let max_rounds = 16;
    for _ in 0..max_rounds {
        let need = budget - provenance.traced;
        if need == 0 {
            break;
        }
        let starts: Vec<RayState<S>> = sampler.by_ref().take(need).collect();
        for w in trace_words(t, &starts, k + margin) {
            match w {
                Some(w) => {
                    provenance.traced += 1;
                    add_factors(&mut words, &w, k);
                }
                None => provenance.singular += 1,
            }
        }
    }
    provenance.rejected_starts = sampler.rejected;
    WordLanguage { k, alphabet: t.labels().to_vec(), words, provenance }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("window lengths differ: {0} vs {1}")]
    WindowMismatch(usize, usize),
    #[error("label map is not a bijection between the alphabets: `{0}`")]
    IncompleteBijection(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    OnlyFirst,
    OnlySecond,
}

impl Side {
    pub fn swapped(self) -> Side {
        match self {
            Side::OnlyFirst => Side::OnlySecond,
            Side::OnlySecond => Side::OnlyFirst,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpectrumComparison {
    IndistinguishableAtK,
    /// A window seen in one language only, spelled in both alphabets.
    Separated { witness_first: Vec<Label>, witness_second: Vec<Label>, side: Side },
}

impl SpectrumComparison {
    pub fn swapped(self) -> Self {
        match self {
            SpectrumComparison::Separated { witness_first, witness_second, side } => SpectrumComparison::Separated {
                witness_first: witness_second,
                witness_second: witness_first,
                side: side.swapped(),
            },
            s => s,
        }
    }
}

/// Compares two languages after carrying the first into the second's alphabet.
pub fn compare_spectra(
    l1: &WordLanguage,
    l2: &WordLanguage,
    bijection: &BTreeMap<Label, Label>,
) -> Result<SpectrumComparison, CompareError> {
    if l1.k != l2.k {
        return Err(CompareError::WindowMismatch(l1.k, l2.k));
    }
    let mut inverse: BTreeMap<Label, Label> = BTreeMap::new();
    for a in &l1.alphabet {
        let b = bijection.get(a).ok_or_else(|| CompareError::IncompleteBijection(a.to_string()))?;
        if !l2.alphabet.contains(b) || inverse.insert(b.clone(), a.clone()).is_some() {
            return Err(CompareError::IncompleteBijection(b.to_string()));
        }
    }
    if let Some(b) = l2.alphabet.iter().find(|b| !inverse.contains_key(*b)) {
        return Err(CompareError::IncompleteBijection(b.to_string()));
    }
    let forward = |w: &Vec<Label>| w.iter().map(|a| bijection[a].clone()).collect::<Vec<_>>();
    let backward = |w: &Vec<Label>| w.iter().map(|b| inverse[b].clone()).collect::<Vec<_>>();
    let mapped: BTreeSet<Vec<Label>> = l1.words.iter().map(forward).collect();
    let mut best: Option<(Vec<Label>, Vec<Label>, Side)> = None;
    let key = |a: &Vec<Label>, b: &Vec<Label>| if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
    let mut consider = |first: Vec<Label>, second: Vec<Label>, side: Side| {
        let better = match &best {
            None => true,
            Some((f, s, _)) => key(&first, &second) < key(f, s),
        };
        if better {
            best = Some((first, second, side));
        }
    };
    for w in &l1.words {
        let m = forward(w);
        if !l2.words.contains(&m) {
            consider(w.clone(), m, Side::OnlyFirst);
        }
    }
    for w in &l2.words {
        if !mapped.contains(w) {
            consider(backward(w), w.clone(), Side::OnlySecond);
        }
    }
    Ok(match best {
        None => SpectrumComparison::IndistinguishableAtK,
        Some((witness_first, witness_second, side)) => {
            SpectrumComparison::Separated { witness_first, witness_second, side }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlagError {
    #[error("window {m} is longer than the shortest word ({shortest})")]
    WindowTooLong { m: usize, shortest: usize },
    #[error("window must be at least 1")]
    ZeroWindow,
}

/// Words whose last (or first) `m` symbols agree with the last (or first) `m`
/// symbols of some generalized-diagonal word, i.e. words that shadow a
/// trajectory ending (or starting) at a vertex. Finite-depth heuristic.
pub fn flag_singular_words(
    language_words: &[Vec<Label>],
    diagonal_words: &[Vec<Label>],
    m: usize,
) -> Result<Vec<Vec<Label>>, FlagError> {
    if m == 0 {
        return Err(FlagError::ZeroWindow);
    }
    let shortest = language_words.iter().map(Vec::len).min().unwrap_or(m);
    if m > shortest {
        return Err(FlagError::WindowTooLong { m, shortest });
    }
    let long: Vec<&Vec<Label>> = diagonal_words.iter().filter(|d| d.len() >= m).collect();
    let tails: BTreeSet<&[Label]> = long.iter().map(|d| &d[d.len() - m..]).collect();
    let heads: BTreeSet<&[Label]> = long.iter().map(|d| &d[..m]).collect();
    Ok(language_words
        .iter()
        .filter(|w| tails.contains(&w[w.len() - m..]) || heads.contains(&w[..m]))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Exact, F64};
    use crate::table::{labels, validate_table};
    use num_integer::Integer;

    fn p(x: i64, y: i64) -> Point2<Exact> {
        Point2::from_ints(x, y)
    }
    fn square() -> LabeledTable<Exact> {
        validate_table("square", vec![p(0, 0), p(1, 0), p(1, 1), p(0, 1)], labels(["1", "2", "3", "4"])).unwrap()
    }
    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    #[test]
    fn square_three_one() {
        let r = periodic_orbit_for_word(&square(), &labels(["3", "1"])).unwrap();
        assert!(r.exists);
        assert_eq!(r.reason, PeriodicReason::Found);
        assert_eq!(r.translation, Some(p(0, 2)));
        assert_eq!(r.family_width(), Some(q(1, 1)));
        assert!(!r.doubled);
        let start = r.witness_start.unwrap();
        assert_eq!(start.position, Point2::new(q(1, 2), q(1, 2)));
    }

    #[test]
    fn square_two_three_is_not_periodic() {
        let r = periodic_orbit_for_word(&square(), &labels(["2", "3"])).unwrap();
        assert!(!r.exists);
        assert_eq!(r.reason, PeriodicReason::NonTranslationComposite);
    }

    #[test]
    fn odd_word_is_doubled() {
        let r = periodic_orbit_for_word(&square(), &labels(["1", "2", "3"])).unwrap();
        assert!(r.doubled);
        assert_eq!(r.word.len(), 6);
        assert!(!r.exists);
    }

    #[test]
    fn cyclic_repeat_rejected() {
        let e = periodic_orbit_for_word(&square(), &labels(["1", "3", "1"])).unwrap_err();
        assert_eq!(e, UnfoldError::RepeatedLabel(2, 0));
    }

    #[test]
    fn slope_half_word_is_periodic() {
        let w = labels(["2", "3", "4", "2", "1", "4"]);
        let r = periodic_orbit_for_word(&square(), &w).unwrap();
        assert!(r.exists, "{:?}", r.reason);
        assert_eq!(r.translation, Some(p(4, 2)));
    }

    #[test]
    fn empty_corridor() {
        // 1,2 then 3,4 cannot thread a straight line on the square.
        let r = periodic_orbit_for_word(&square(), &labels(["1", "2", "1", "4"])).unwrap();
        assert!(!r.exists);
    }

    fn lattice_oracle(r2: i64) -> BTreeSet<(i64, i64)> {
        let mut s = BTreeSet::new();
        for a in 1..=r2 {
            for b in 1..=r2 {
                if a * a + b * b <= r2 && a.gcd(&b) == 1 {
                    s.insert((a, b));
                }
            }
        }
        s
    }

    #[test]
    fn square_diagonals_match_lattice_points() {
        let d = enumerate_generalized_diagonals(&square(), 0, &Exact::from_int(5)).unwrap();
        let got: BTreeSet<(i64, i64)> = d
            .iter()
            .map(|r| {
                let (x, y) = r.target_image.to_f64();
                (x as i64, y as i64)
            })
            .collect();
        assert_eq!(d.len(), 11);
        assert_eq!(got, lattice_oracle(25));
        assert!(d[0].word.is_empty());
        assert_eq!(d[0].length_sq, Exact::from_int(2));
        let two_one = d.iter().find(|r| r.target_image == p(2, 1)).unwrap();
        assert_eq!(two_one.word, labels(["2"]));
        assert_eq!(t_vertex(&square(), two_one.target_vertex), p(0, 1));
        assert!(d.windows(2).all(|w| w[0].length_sq <= w[1].length_sq));
    }

    fn t_vertex(t: &LabeledTable<Exact>, i: usize) -> Point2<Exact> {
        t.vertex(i).clone()
    }

    #[test]
    fn diagonal_errors() {
        assert_eq!(enumerate_generalized_diagonals(&square(), 7, &Exact::from_int(1)).unwrap_err(), DiagonalError::UnknownVertex(7));
        assert_eq!(enumerate_generalized_diagonals(&square(), 0, &Exact::from_int(0)).unwrap_err(), DiagonalError::NonPositiveLength);
        assert_eq!(
            enumerate_generalized_diagonals_with_limit(&square(), 0, &Exact::from_int(50), 10).unwrap_err(),
            DiagonalError::SearchLimitExceeded(10)
        );
    }

    #[test]
    fn reflex_source_diagonals() {
        let l = validate_table(
            "L",
            vec![p(0, 0), p(2, 0), p(2, 1), p(1, 1), p(1, 2), p(0, 2)],
            labels(["a", "b", "c", "d", "e", "f"]),
        )
        .unwrap();
        let d = enumerate_generalized_diagonals(&l, 3, &Exact::from_int(3)).unwrap();
        assert!(d.iter().any(|r| r.word.is_empty() && r.target_vertex == 0));
        for r in &d {
            assert!(r.length_sq <= Exact::from_int(9));
        }
    }

    #[test]
    fn sampled_square_language() {
        let s = square();
        let l1 = sample_bounce_language(&s, 1, 50, 3);
        assert_eq!(l1.words.len(), 4);
        let l2 = sample_bounce_language(&s, 2, 200, 3);
        assert!(l2.words.contains(&labels(["3", "1"])));
        assert!(l2.words.contains(&labels(["2", "3"])));
        assert!(l2.words.iter().all(|w| w[0] != w[1]));
        assert_eq!(l2, sample_bounce_language(&s, 2, 200, 3));
    }

    #[test]
    fn language_is_shift_closed() {
        let s = square();
        let starts = sample_starts(&s, 40, 9);
        let l = language_from_starts(&s, &starts, 3);
        for w in trace_words(&s, &starts, 6).into_iter().flatten() {
            for f in w.windows(3) {
                assert!(l.words.contains(f));
            }
        }
    }

    fn identity_map(ls: &[&str]) -> BTreeMap<Label, Label> {
        ls.iter().map(|l| (Label::from(*l), Label::from(*l))).collect()
    }

    #[test]
    fn compare_self_and_errors() {
        let s = square();
        let l = sample_bounce_language(&s, 3, 100, 0);
        let id = identity_map(&["1", "2", "3", "4"]);
        assert_eq!(compare_spectra(&l, &l, &id).unwrap(), SpectrumComparison::IndistinguishableAtK);
        let other = sample_bounce_language(&s, 4, 10, 0);
        assert_eq!(compare_spectra(&l, &other, &id).unwrap_err(), CompareError::WindowMismatch(3, 4));
        let partial = identity_map(&["1", "2", "3"]);
        assert!(matches!(compare_spectra(&l, &l, &partial), Err(CompareError::IncompleteBijection(_))));
    }

    #[test]
    fn compare_detects_difference() {
        let s = square();
        let mut l2 = sample_bounce_language(&s, 2, 100, 0);
        let l1 = l2.clone();
        let removed = l2.words.pop_first().unwrap();
        let id = identity_map(&["1", "2", "3", "4"]);
        let c = compare_spectra(&l1, &l2, &id).unwrap();
        assert_eq!(
            c,
            SpectrumComparison::Separated { witness_first: removed.clone(), witness_second: removed, side: Side::OnlyFirst }
        );
        assert_eq!(compare_spectra(&l2, &l1, &id).unwrap(), c.swapped());
    }

    #[test]
    fn flagging() {
        let long = vec![labels(["3", "4", "1", "2"]), labels(["3", "1", "3", "1"])];
        let flagged = flag_singular_words(&long, &[labels(["2"])], 1).unwrap();
        assert_eq!(flagged, vec![labels(["3", "4", "1", "2"])]);
        assert!(flag_singular_words(&long, &[], 2).unwrap().is_empty());
        assert_eq!(flag_singular_words(&long, &[], 5).unwrap_err(), FlagError::WindowTooLong { m: 5, shortest: 4 });
        assert_eq!(flag_singular_words(&long, &[], 0).unwrap_err(), FlagError::ZeroWindow);
    }

    #[test]
    fn periodic_square_words_not_flagged_by_square_diagonals() {
        let s = square();
        let diag: Vec<Vec<Label>> =
            enumerate_generalized_diagonals(&s, 0, &Exact::from_int(6)).unwrap().into_iter().map(|r| r.word).collect();
        let expected = diag.iter().any(|d| d.ends_with(&labels(["3", "1", "3", "1"])) || d.starts_with(&labels(["3", "1", "3", "1"])));
        let w = vec![labels(["3", "1", "3", "1", "3", "1"])];
        assert_eq!(!flag_singular_words(&w, &diag, 4).unwrap().is_empty(), expected);
    }

    #[test]
    fn fagnano_float() {
        let t = validate_table(
            "acute",
            vec![Point2::new(F64(0.0), F64(0.0)), Point2::new(F64(1.0), F64(0.0)), Point2::new(F64(0.3), F64(0.8))],
            labels(["1", "2", "3"]),
        )
        .unwrap();
        let r = periodic_orbit_for_word(&t, &labels(["1", "2", "3"])).unwrap();
        assert!(r.exists, "{:?}", r.reason);
        assert!(r.doubled);
    }
}
