//! Scalar backends and planar primitives.
//!
//! Two backends implement [`Scalar`]: [`Exact`] (reduced big-integer
//! fractions, every predicate decided by an exact sign) and [`F64`]
//! (doubles compared with a process-wide relative tolerance). Geometry code is
//! generic over the backend, so mixing backends inside one computation is a
//! type error rather than a runtime condition.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact backend: arbitrary-precision reduced fractions.
pub type Exact = BigRational;

pub const DEFAULT_EPS: f64 = 1e-9;

static FLOAT_EPS_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Relative tolerance used by every [`F64`] comparison.
pub fn float_tolerance() -> f64 {
    f64::from_bits(FLOAT_EPS_BITS.load(AtomicOrdering::Relaxed))
}

/// Sets the relative tolerance for the float backend. Affects the whole process.
pub fn set_float_tolerance(eps: f64) {
    assert!(eps > 0.0 && eps.is_finite(), "tolerance must be positive");
    FLOAT_EPS_BITS.store(eps.to_bits(), AtomicOrdering::Relaxed);
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("malformed number literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("direction vector is zero")]
    DegenerateDirection,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
}

/// Arithmetic backend for all geometry.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True for the exact rational backend.
    const EXACT: bool;
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }
    /// Nearest representable value. The exact backend rounds to a dyadic
    /// fraction with 2^-24 resolution so that sampled data stays small.
    fn from_f64_approx(v: f64) -> Self;
    /// Parses an integer, `p/q` or decimal literal.
    fn parse_literal(s: &str) -> Result<Self, NumberError>;
    fn to_f64(&self) -> f64;
    /// Exact value, when the backend has one.
    fn to_rational(&self) -> Option<BigRational>;

    /// Three-way comparison: exact in the exact backend, tolerant
    /// (`|a-b| <= eps*max(1,|a|,|b|)` counts as equal) in the float backend.
    fn cmp_tol(&self, other: &Self) -> Ordering;

    fn sign(&self) -> Ordering {
        self.cmp_tol(&Self::zero())
    }
    fn is_zero(&self) -> bool {
        self.sign() == Ordering::Equal
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self.cmp_tol(other) == Ordering::Equal
    }
    fn abs(&self) -> Self {
        if self.sign() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Square root when it is representable; the float backend always answers.
    fn sqrt_exact(&self) -> Option<Self>;

    /// Rescales a direction vector within its ray class: primitive integer
    /// vector in the exact backend, unit length in the float backend.
    fn normalize_direction(dx: Self, dy: Self) -> (Self, Self);

    /// `(cos, sin)` of `num/den * pi`, if representable in the backend.
    fn cos_sin_pi(num: i64, den: i64) -> Option<(Self, Self)>;

    /// Output form: reduced `p/q` (exact) or 17 significant digits (float).
    fn format(&self) -> String;
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const NAME: &'static str = "exact";

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64_approx(v: f64) -> Self {
        let scaled = (v * (1u64 << 24) as f64).round();
        BigRational::new(BigInt::from(scaled as i64), BigInt::from(1i64 << 24))
    }
    fn parse_literal(s: &str) -> Result<Self, NumberError> {
        parse_rational(s)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn cmp_tol(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn sign(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(BigRational::new(n, d))
        } else {
            None
        }
    }
    fn normalize_direction(dx: Self, dy: Self) -> (Self, Self) {
        if Zero::is_zero(&dx) && Zero::is_zero(&dy) {
            return (dx, dy);
        }
        let l = dx.denom().lcm(dy.denom());
        let ix = dx.numer() * (&l / dx.denom());
        let iy = dy.numer() * (&l / dy.denom());
        let g = ix.gcd(&iy);
        (
            BigRational::from_integer(ix / &g),
            BigRational::from_integer(iy / &g),
        )
    }
    fn cos_sin_pi(num: i64, den: i64) -> Option<(Self, Self)> {
        // Only quarter turns have rational cosine and sine with rational angle.
        let twice = 2 * num;
        if twice % den != 0 {
            return None;
        }
        let quarter = (twice / den).rem_euclid(4);
        let (c, s) = match quarter {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        Some((Self::from_int(c), Self::from_int(s)))
    }
    fn format(&self) -> String {
        self.to_string()
    }
}

/// Float backend value. Equality and ordering are tolerant; see [`Scalar::cmp_tol`].
#[derive(Clone, Copy, Debug, Default)]
pub struct F64(pub f64);

impl PartialEq for F64 {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

impl Display for F64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_f64(self.0))
    }
}

macro_rules! f64_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for F64 {
            type Output = F64;
            fn $m(self, rhs: F64) -> F64 {
                F64(self.0 $op rhs.0)
            }
        }
    };
}
f64_binop!(Add, add, +);
f64_binop!(Sub, sub, -);
f64_binop!(Mul, mul, *);
f64_binop!(Div, div, /);

impl Neg for F64 {
    type Output = F64;
    fn neg(self) -> F64 {
        F64(-self.0)
    }
}

impl Scalar for F64 {
    const EXACT: bool = false;
    const NAME: &'static str = "f64";

    fn zero() -> Self {
        F64(0.0)
    }
    fn one() -> Self {
        F64(1.0)
    }
    fn from_int(v: i64) -> Self {
        F64(v as f64)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        F64(num as f64 / den as f64)
    }
    fn from_f64_approx(v: f64) -> Self {
        F64(v)
    }
    fn parse_literal(s: &str) -> Result<Self, NumberError> {
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().map_err(|_| NumberError::Malformed(s.into()))?;
            let q: f64 = q.trim().parse().map_err(|_| NumberError::Malformed(s.into()))?;
            if q == 0.0 {
                return Err(NumberError::ZeroDenominator(s.into()));
            }
            return Ok(F64(p / q));
        }
        let v: f64 = s.parse().map_err(|_| NumberError::Malformed(s.into()))?;
        if !v.is_finite() {
            return Err(NumberError::Malformed(s.into()));
        }
        Ok(F64(v))
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn to_rational(&self) -> Option<BigRational> {
        None
    }
    fn cmp_tol(&self, other: &Self) -> Ordering {
        let (a, b) = (self.0, other.0);
        let scale = 1f64.max(a.abs()).max(b.abs());
        if (a - b).abs() <= float_tolerance() * scale {
            Ordering::Equal
        } else if a < b {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
    fn sqrt_exact(&self) -> Option<Self> {
        if self.0 < 0.0 {
            if self.is_zero() {
                return Some(F64(0.0));
            }
            return None;
        }
        Some(F64(self.0.sqrt()))
    }
    fn normalize_direction(dx: Self, dy: Self) -> (Self, Self) {
        let n = dx.0.hypot(dy.0);
        if n == 0.0 {
            return (dx, dy);
        }
        (F64(dx.0 / n), F64(dy.0 / n))
    }
    fn cos_sin_pi(num: i64, den: i64) -> Option<(Self, Self)> {
        let a = std::f64::consts::PI * num as f64 / den as f64;
        Some((F64(a.cos()), F64(a.sin())))
    }
    fn format(&self) -> String {
        format_f64(self.0)
    }
}

fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    format!("{:.16e}", v)
}

fn parse_rational(s: &str) -> Result<BigRational, NumberError> {
    let bad = || NumberError::Malformed(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if Zero::is_zero(&q) {
            return Err(NumberError::ZeroDenominator(s.to_string()));
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num: BigInt = all.parse().map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    let ten = BigInt::from(10);
    let shift = exponent - frac_part.len() as i32;
    let value = if shift >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-shift) as usize))
    };
    Ok(value)
}

/// A point (or displacement vector) in the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Point2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point2<S> {
    pub fn new(x: S, y: S) -> Self {
        Point2 { x, y }
    }
    pub fn from_ints(x: i64, y: i64) -> Self {
        Point2::new(S::from_int(x), S::from_int(y))
    }
    pub fn origin() -> Self {
        Point2::new(S::zero(), S::zero())
    }
    pub fn add(&self, o: &Self) -> Self {
        Point2::new(self.x.clone() + o.x.clone(), self.y.clone() + o.y.clone())
    }
    pub fn sub(&self, o: &Self) -> Self {
        Point2::new(self.x.clone() - o.x.clone(), self.y.clone() - o.y.clone())
    }
    pub fn scale(&self, k: &S) -> Self {
        Point2::new(self.x.clone() * k.clone(), self.y.clone() * k.clone())
    }
    pub fn neg(&self) -> Self {
        Point2::new(-self.x.clone(), -self.y.clone())
    }
    pub fn dot(&self, o: &Self) -> S {
        self.x.clone() * o.x.clone() + self.y.clone() * o.y.clone()
    }
    pub fn cross(&self, o: &Self) -> S {
        self.x.clone() * o.y.clone() - self.y.clone() * o.x.clone()
    }
    /// Sign of `self x o`, comparing the two products so the float backend
    /// applies its tolerance relative to their magnitude.
    pub fn cross_sign(&self, o: &Self) -> Ordering {
        let a = self.x.clone() * o.y.clone();
        let b = self.y.clone() * o.x.clone();
        a.cmp_tol(&b)
    }
    pub fn dot_sign(&self, o: &Self) -> Ordering {
        let a = self.x.clone() * o.x.clone();
        let b = -(self.y.clone() * o.y.clone());
        a.cmp_tol(&b)
    }
    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }
    pub fn perp(&self) -> Self {
        Point2::new(-self.y.clone(), self.x.clone())
    }
    pub fn midpoint(&self, o: &Self) -> Self {
        self.add(o).scale(&S::from_ratio(1, 2))
    }
    pub fn approx_eq(&self, o: &Self) -> bool {
        self.x.approx_eq(&o.x) && self.y.approx_eq(&o.y)
    }
    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

impl<S: Scalar> Display for Point2<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x.format(), self.y.format())
    }
}

/// Direction of travel. Exact mode keeps an unnormalized representative of
/// the ray class; float mode keeps unit length.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction<S> {
    v: Point2<S>,
}

impl<S: Scalar> Direction<S> {
    pub fn new(dx: S, dy: S) -> Result<Self, GeometryError> {
        let (dx, dy) = S::normalize_direction(dx, dy);
        let v = Point2::new(dx, dy);
        if S::EXACT {
            if v.x.is_zero() && v.y.is_zero() {
                return Err(GeometryError::DegenerateDirection);
            }
        } else if v.x.to_f64() == 0.0 && v.y.to_f64() == 0.0 || !v.x.to_f64().is_finite() {
            return Err(GeometryError::DegenerateDirection);
        }
        Ok(Direction { v })
    }
    pub fn from_vector(v: &Point2<S>) -> Result<Self, GeometryError> {
        Self::new(v.x.clone(), v.y.clone())
    }
    pub fn vector(&self) -> &Point2<S> {
        &self.v
    }
    pub fn dx(&self) -> &S {
        &self.v.x
    }
    pub fn dy(&self) -> &S {
        &self.v.y
    }
    pub fn reversed(&self) -> Self {
        Direction { v: self.v.neg() }
    }
    /// Same ray class (parallel and pointing the same way).
    pub fn same_ray(&self, o: &Self) -> bool {
        self.v.cross_sign(&o.v) == Ordering::Equal && self.v.dot(&o.v).sign() == Ordering::Greater
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment<S> {
    pub a: Point2<S>,
    pub b: Point2<S>,
}

impl<S: Scalar> Segment<S> {
    pub fn new(a: Point2<S>, b: Point2<S>) -> Result<Self, GeometryError> {
        if a.approx_eq(&b) {
            return Err(GeometryError::DegenerateSegment);
        }
        Ok(Segment { a, b })
    }
    pub fn vector(&self) -> Point2<S> {
        self.b.sub(&self.a)
    }
    pub fn length_sq(&self) -> S {
        self.vector().norm_sq()
    }
    /// Closed-segment membership.
    pub fn contains(&self, p: &Point2<S>) -> bool {
        if orientation(&self.a, &self.b, p) != Orientation::Collinear {
            return false;
        }
        let d = self.vector();
        let t = p.sub(&self.a).dot(&d);
        t.sign() != Ordering::Less && t.cmp_tol(&d.norm_sq()) != Ordering::Greater
    }
    /// Squared distance from `p` to the closed segment.
    pub fn distance_sq(&self, p: &Point2<S>) -> S {
        let d = self.vector();
        let w = p.sub(&self.a);
        let t = w.dot(&d);
        if t.sign() != Ordering::Greater {
            return w.norm_sq();
        }
        let l = d.norm_sq();
        if t.cmp_tol(&l) != Ordering::Less {
            return p.sub(&self.b).norm_sq();
        }
        let c = w.cross(&d);
        c.clone() * c / l
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
    Collinear,
}

/// Sign of `(q-p) x (r-p)`.
pub fn orientation<S: Scalar>(p: &Point2<S>, q: &Point2<S>, r: &Point2<S>) -> Orientation {
    match q.sub(p).cross_sign(&r.sub(p)) {
        Ordering::Greater => Orientation::Ccw,
        Ordering::Less => Orientation::Cw,
        Ordering::Equal => Orientation::Collinear,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HitKind {
    Interior,
    EndpointA,
    EndpointB,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hit<S> {
    pub t: S,
    pub point: Point2<S>,
    pub kind: HitKind,
}

/// First point with positive parameter where `origin + t*dir` meets `seg`.
///
/// A ray running along the segment's own line reports no hit; callers reach
/// such segments through the endpoint of a neighbouring edge.
pub fn ray_segment_hit<S: Scalar>(
    origin: &Point2<S>,
    dir: &Direction<S>,
    seg: &Segment<S>,
) -> Result<Option<Hit<S>>, GeometryError> {
    let d = dir.vector();
    if d.is_zero() {
        return Err(GeometryError::DegenerateDirection);
    }
    let e = seg.vector();
    if d.cross_sign(&e) == Ordering::Equal {
        return Ok(None);
    }
    let denom = d.cross(&e);
    let w = seg.a.sub(origin);
    let t = w.cross(&e) / denom.clone();
    if t.sign() != Ordering::Greater {
        return Ok(None);
    }
    let point = origin.add(&d.scale(&t));
    let kind = if point.approx_eq(&seg.a) {
        HitKind::EndpointA
    } else if point.approx_eq(&seg.b) {
        HitKind::EndpointB
    } else {
        let u = w.cross(d) / denom;
        if u.sign() == Ordering::Greater && u.cmp_tol(&S::one()) == Ordering::Less {
            HitKind::Interior
        } else {
            return Ok(None);
        }
    };
    let point = match kind {
        HitKind::EndpointA => seg.a.clone(),
        HitKind::EndpointB => seg.b.clone(),
        HitKind::Interior => point,
    };
    Ok(Some(Hit { t, point, kind }))
}

/// 2x2 matrix stored row-major.
pub type Mat2<S> = [[S; 2]; 2];

pub fn mat_mul<S: Scalar>(a: &Mat2<S>, b: &Mat2<S>) -> Mat2<S> {
    let e = |i: usize, j: usize| a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone();
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn mat_apply<S: Scalar>(m: &Mat2<S>, v: &Point2<S>) -> Point2<S> {
    Point2::new(
        m[0][0].clone() * v.x.clone() + m[0][1].clone() * v.y.clone(),
        m[1][0].clone() * v.x.clone() + m[1][1].clone() * v.y.clone(),
    )
}

pub fn mat_det<S: Scalar>(m: &Mat2<S>) -> S {
    m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone()
}

pub fn mat_identity<S: Scalar>() -> Mat2<S> {
    [[S::one(), S::zero()], [S::zero(), S::one()]]
}

pub fn mat_approx_eq<S: Scalar>(a: &Mat2<S>, b: &Mat2<S>) -> bool {
    (0..2).all(|i| (0..2).all(|j| a[i][j].approx_eq(&b[i][j])))
}

/// Linear reflection across the line through the origin spanned by `v`.
pub fn reflection_matrix<S: Scalar>(v: &Point2<S>) -> Mat2<S> {
    let l = v.norm_sq();
    let xx = v.x.clone() * v.x.clone();
    let yy = v.y.clone() * v.y.clone();
    let xy2 = S::from_int(2) * v.x.clone() * v.y.clone() / l.clone();
    [
        [(xx.clone() - yy.clone()) / l.clone(), xy2.clone()],
        [xy2, (yy - xx) / l],
    ]
}

pub fn rotation_matrix<S: Scalar>(cos: S, sin: S) -> Mat2<S> {
    [[cos.clone(), -sin.clone()], [sin, cos]]
}

/// Rigid motion `x -> linear * x + translation`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry<S> {
    pub linear: Mat2<S>,
    pub translation: Point2<S>,
}

impl<S: Scalar> Isometry<S> {
    pub fn identity() -> Self {
        Isometry { linear: mat_identity(), translation: Point2::origin() }
    }
    pub fn translation(v: Point2<S>) -> Self {
        Isometry { linear: mat_identity(), translation: v }
    }
    /// Rotation by `num/den * pi` about `center`; `None` if the backend cannot
    /// represent the rotation exactly.
    pub fn rotation_about(center: &Point2<S>, num: i64, den: i64) -> Option<Self> {
        let (c, s) = S::cos_sin_pi(num, den)?;
        let linear = rotation_matrix(c, s);
        let translation = center.sub(&mat_apply(&linear, center));
        Some(Isometry { linear, translation })
    }
    pub fn from_linear(linear: Mat2<S>) -> Self {
        Isometry { linear, translation: Point2::origin() }
    }
    pub fn apply(&self, p: &Point2<S>) -> Point2<S> {
        mat_apply(&self.linear, p).add(&self.translation)
    }
    pub fn apply_vector(&self, v: &Point2<S>) -> Point2<S> {
        mat_apply(&self.linear, v)
    }
    pub fn apply_direction(&self, d: &Direction<S>) -> Direction<S> {
        Direction::from_vector(&self.apply_vector(d.vector())).expect("isometry maps nonzero to nonzero")
    }
    pub fn apply_segment(&self, s: &Segment<S>) -> Segment<S> {
        Segment { a: self.apply(&s.a), b: self.apply(&s.b) }
    }
    pub fn det(&self) -> S {
        mat_det(&self.linear)
    }
    pub fn is_orientation_preserving(&self) -> bool {
        self.det().sign() == Ordering::Greater
    }
    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Isometry {
            linear: mat_mul(&self.linear, &other.linear),
            translation: mat_apply(&self.linear, &other.translation).add(&self.translation),
        }
    }
    pub fn inverse(&self) -> Self {
        let m = &self.linear;
        let lt = [[m[0][0].clone(), m[1][0].clone()], [m[0][1].clone(), m[1][1].clone()]];
        let translation = mat_apply(&lt, &self.translation).neg();
        Isometry { linear: lt, translation }
    }
    /// `linear^T * linear = I` within the backend's notion of equality.
    pub fn is_orthogonal(&self) -> bool {
        let m = &self.linear;
        let lt = [[m[0][0].clone(), m[1][0].clone()], [m[0][1].clone(), m[1][1].clone()]];
        mat_approx_eq(&mat_mul(&lt, m), &mat_identity())
    }
    pub fn is_translation(&self) -> bool {
        mat_approx_eq(&self.linear, &mat_identity())
    }
    pub fn approx_eq(&self, o: &Self) -> bool {
        mat_approx_eq(&self.linear, &o.linear) && self.translation.approx_eq(&o.translation)
    }
}

/// The orientation-reversing isometry fixing the supporting line of `seg`.
pub fn reflection_across<S: Scalar>(seg: &Segment<S>) -> Result<Isometry<S>, GeometryError> {
    let e = seg.vector();
    if e.is_zero() {
        return Err(GeometryError::DegenerateSegment);
    }
    let linear = reflection_matrix(&e);
    let translation = seg.a.sub(&mat_apply(&linear, &seg.a));
    Ok(Isometry { linear, translation })
}

/// `f ∘ g`.
pub fn compose<S: Scalar>(f: &Isometry<S>, g: &Isometry<S>) -> Isometry<S> {
    f.compose(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }
    fn p(x: i64, y: i64) -> Point2<Exact> {
        Point2::from_ints(x, y)
    }
    fn seg(a: Point2<Exact>, b: Point2<Exact>) -> Segment<Exact> {
        Segment::new(a, b).unwrap()
    }
    fn dir(x: i64, y: i64) -> Direction<Exact> {
        Direction::new(Exact::from_int(x), Exact::from_int(y)).unwrap()
    }

    #[test]
    fn orientation_cases() {
        assert_eq!(orientation(&p(0, 0), &p(1, 0), &p(0, 1)), Orientation::Ccw);
        assert_eq!(orientation(&p(0, 0), &p(1, 1), &p(2, 2)), Orientation::Collinear);
        assert_eq!(orientation(&p(0, 0), &p(0, 1), &p(1, 0)), Orientation::Cw);
    }

    #[test]
    fn ray_hits() {
        let half = Point2::new(q(1, 2), q(1, 2));
        let h = ray_segment_hit(&half, &dir(0, 1), &seg(p(0, 1), p(1, 1))).unwrap().unwrap();
        assert_eq!(h.t, q(1, 2));
        assert_eq!(h.point, Point2::new(q(1, 2), q(1, 1)));
        assert_eq!(h.kind, HitKind::Interior);

        let h = ray_segment_hit(&half, &dir(1, 1), &seg(p(1, 0), p(1, 1))).unwrap().unwrap();
        assert_eq!(h.point, p(1, 1));
        assert_eq!(h.kind, HitKind::EndpointB);

        assert!(ray_segment_hit(&p(0, 0), &dir(1, 0), &seg(p(2, 1), p(2, 2))).unwrap().is_none());
    }

    #[test]
    fn zero_direction_rejected() {
        assert_eq!(
            Direction::new(<Exact as Scalar>::zero(), <Exact as Scalar>::zero()).unwrap_err(),
            GeometryError::DegenerateDirection
        );
    }

    #[test]
    fn reflections() {
        let r = reflection_across(&seg(p(0, 0), p(1, 0))).unwrap();
        assert_eq!(r.apply(&p(3, 5)), p(3, -5));
        let r = reflection_across(&seg(p(0, 1), p(1, 1))).unwrap();
        assert_eq!(r.apply(&p(3, 5)), p(3, -3));
        let r = reflection_across(&seg(p(0, 0), p(1, 1))).unwrap();
        assert_eq!(r.apply(&p(3, 5)), p(5, 3));
        assert_eq!(
            reflection_across(&Segment { a: p(1, 1), b: p(1, 1) }).unwrap_err(),
            GeometryError::DegenerateSegment
        );
    }

    #[test]
    fn compositions() {
        let r0 = reflection_across(&seg(p(0, 0), p(1, 0))).unwrap();
        let r1 = reflection_across(&seg(p(0, 1), p(1, 1))).unwrap();
        // (x,y) -> (x,-y) -> (x, 2+y)
        assert_eq!(compose(&r1, &r0), Isometry::translation(p(0, 2)));

        let rx = reflection_across(&seg(p(1, 0), p(1, 1))).unwrap();
        let rot = compose(&rx, &r1);
        assert_eq!(rot.linear, [[q(-1, 1), q(0, 1)], [q(0, 1), q(-1, 1)]]);
        assert_eq!(rot.apply(&p(1, 1)), p(1, 1));
        assert_eq!(rot, Isometry::rotation_about(&p(1, 1), 1, 1).unwrap());

        let f = compose(&rot, &r0);
        assert_eq!(compose(&f, &f.inverse()), Isometry::identity());
    }

    #[test]
    fn literals() {
        assert_eq!(Exact::parse_literal("0.3").unwrap(), q(3, 10));
        assert_eq!(Exact::parse_literal("-7/14").unwrap(), q(-1, 2));
        assert_eq!(Exact::parse_literal("12").unwrap(), q(12, 1));
        assert_eq!(Exact::parse_literal("1.5e2").unwrap(), q(150, 1));
        assert_eq!(Exact::parse_literal("2.5e-1").unwrap(), q(1, 4));
        assert!(Exact::parse_literal("1/0").is_err());
        assert!(Exact::parse_literal("abc").is_err());
        assert!(Exact::parse_literal(".").is_err());
        assert_eq!(F64::parse_literal("1/4").unwrap().0, 0.25);
    }

    #[test]
    fn exact_sqrt_and_normalization() {
        assert_eq!(q(9, 4).sqrt_exact(), Some(q(3, 2)));
        assert_eq!(q(2, 1).sqrt_exact(), None);
        let (x, y) = Exact::normalize_direction(q(2, 3), q(4, 9));
        assert_eq!((x, y), (q(3, 1), q(2, 1)));
    }

    #[test]
    fn float_tolerance_equality() {
        assert_eq!(F64(1.0), F64(1.0 + 1e-12));
        assert_ne!(F64(1.0), F64(1.0 + 1e-6));
        assert_eq!(F64(1e6).cmp_tol(&F64(1e6 + 1e-4)), Ordering::Equal);
    }

    #[test]
    fn segment_distance() {
        let s = seg(p(0, 0), p(2, 0));
        assert_eq!(s.distance_sq(&p(1, 3)), q(9, 1));
        assert_eq!(s.distance_sq(&p(-1, 1)), q(2, 1));
        assert_eq!(s.distance_sq(&p(5, 4)), q(25, 1));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn pt() -> impl Strategy<Value = Point2<Exact>> {
        (-20i64..20, -20i64..20, 1i64..6, 1i64..6)
            .prop_map(|(x, y, a, b)| Point2::new(Exact::from_ratio(x, a), Exact::from_ratio(y, b)))
    }

    fn isometry() -> impl Strategy<Value = Isometry<Exact>> {
        (pt(), pt(), pt(), pt()).prop_filter_map("degenerate", |(a, b, c, d)| {
            let r1 = reflection_across(&Segment::new(a, b).ok()?).ok()?;
            let r2 = reflection_across(&Segment::new(c, d).ok()?).ok()?;
            Some(r1.compose(&r2).compose(&r1))
        })
    }

    proptest! {
        #[test]
        fn reflection_is_involution(a in pt(), b in pt(), x in pt()) {
            prop_assume!(a != b);
            let r = reflection_across(&Segment::new(a, b).unwrap()).unwrap();
            prop_assert_eq!(r.compose(&r), Isometry::identity());
            prop_assert!(r.is_orthogonal());
            prop_assert_eq!(r.det(), -<Exact as Scalar>::one());
            prop_assert_eq!(r.apply(&r.apply(&x)), x);
        }

        #[test]
        fn determinant_multiplies(f in isometry(), g in isometry()) {
            let fg = compose(&f, &g);
            prop_assert_eq!(fg.det(), f.det() * g.det());
            prop_assert!(fg.is_orthogonal());
            prop_assert_eq!(compose(&fg, &fg.inverse()), Isometry::identity());
        }

        #[test]
        fn ray_hit_is_first(o in pt(), a in pt(), b in pt(), dx in -5i64..5, dy in -5i64..5) {
            prop_assume!(a != b && (dx, dy) != (0, 0));
            let d = Direction::new(Exact::from_int(dx), Exact::from_int(dy)).unwrap();
            let s = Segment::new(a, b).unwrap();
            if let Some(h) = ray_segment_hit(&o, &d, &s).unwrap() {
                prop_assert!(s.contains(&h.point));
                // dense sampling of smaller parameters never lands on the segment
                for i in 1..64 {
                    let t = h.t.clone() * Exact::from_ratio(i, 64);
                    let x = o.add(&d.vector().scale(&t));
                    prop_assert!(!s.contains(&x));
                }
            } else {
                for i in 1..64 {
                    let x = o.add(&d.vector().scale(&Exact::from_ratio(i, 4)));
                    prop_assert!(!s.contains(&x) || orientation(&s.a, &s.b, &o) == Orientation::Collinear);
                }
            }
        }
    }
}
