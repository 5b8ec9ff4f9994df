//! Normal forms for the closed manifolds produced by fillings.
//!
//! Raw expressions come out of the evaluators in [`crate::closed_fill`] and are
//! rewritten to a [`ClosedManifoldForm`] by [`normalize_closed`]. Comparisons
//! are up to unoriented homeomorphism.
//!
//! Conventions for a graph manifold `D(a,b)(c,d) ∪_B D(e,f)(g,h)`: each piece
//! has boundary basis `(section, fibre)`, and the gluing identifies the row
//! vector `(section_L, fibre_L)` with `(section_R, fibre_R)·B`.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{ext_gcd, gcd, mod_inverse};

pub type Fiber = (i64, i64);
pub type Matrix2 = [[i64; 2]; 2];

pub const SWAP: Matrix2 = [[0, 1], [1, 0]];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeifertError {
    #[error("gcd({0}, {1}) > 1")]
    NotCoprime(i64, i64),
    #[error("matrix {0:?} has determinant other than ±1")]
    NotUnimodular(Matrix2),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("cannot parse manifold expression {0:?}")]
    Parse(String),
    #[error("integer overflow while normalising")]
    Overflow,
}

/// A Seifert piece: two exceptional fibres over the disc, or any number over
/// the sphere.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Base {
    D,
    S2,
}

/// An expression produced by an evaluator, before normalisation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RawExpr {
    /// `L(p, q)`; `L(1, q)` is `S³`, `L(0, q)` is `S²×S¹`.
    Lens(i64, i64),
    /// `(S², fibres...)` with an integer Euler summand.
    Seifert { fibers: Vec<Fiber>, euler: i64 },
    /// `D(left) ∪_B D(right)`.
    Graph { left: [Fiber; 2], b: Matrix2, right: [Fiber; 2] },
}

impl RawExpr {
    pub fn seifert(fibers: &[Fiber]) -> RawExpr {
        RawExpr::Seifert { fibers: fibers.to_vec(), euler: 0 }
    }

    pub fn graph(left: [Fiber; 2], b: Matrix2, right: [Fiber; 2]) -> RawExpr {
        RawExpr::Graph { left, b, right }
    }

    /// Every fibre multiplicity `|a|` appearing in the expression.
    pub fn multiplicities(&self) -> Vec<i64> {
        match self {
            RawExpr::Lens(..) => Vec::new(),
            RawExpr::Seifert { fibers, .. } => fibers.iter().map(|f| f.0.abs()).collect(),
            RawExpr::Graph { left, right, .. } => left.iter().chain(right).map(|f| f.0.abs()).collect(),
        }
    }
}

impl fmt::Display for RawExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawExpr::Lens(p, q) => write!(f, "L({p},{q})"),
            RawExpr::Seifert { fibers, euler } => {
                write!(f, "(S2")?;
                for (a, b) in fibers {
                    write!(f, ",({a},{b})")?;
                }
                if *euler != 0 {
                    write!(f, ",(1,{euler})")?;
                }
                write!(f, ")")
            }
            RawExpr::Graph { left, b, right } => write!(
                f,
                "D({},{})({},{}) u[[{},{}],[{},{}]] D({},{})({},{})",
                left[0].0,
                left[0].1,
                left[1].0,
                left[1].1,
                b[0][0],
                b[0][1],
                b[1][0],
                b[1][1],
                right[0].0,
                right[0].1,
                right[1].0,
                right[1].1
            ),
        }
    }
}

/// Normal form of a closed manifold.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ClosedManifoldForm {
    S3,
    S2xS1,
    /// `p ≥ 2`, `0 < q < p`.
    Lens {
        p: i64,
        q: i64,
    },
    /// Fibres with `a ≥ 2`, `0 < b < a`, sorted; the Euler summand absorbs the
    /// rest. The representative is the smaller of the two orientations and
    /// `mirrored` records whether that was the reversed one.
    SeifS2 {
        fibers: Vec<Fiber>,
        euler: i64,
        mirrored: bool,
    },
    /// Canonical two-piece graph manifold, every multiplicity `≥ 2`.
    GraphDD {
        left: [Fiber; 2],
        b: Matrix2,
        right: [Fiber; 2],
    },
    /// Connected sum of two lens spaces (or `S²×S¹`), sorted.
    ConnSumLens(Box<ClosedManifoldForm>, Box<ClosedManifoldForm>),
    Unrecognized(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum ExceptionalType {
    /// `S³`
    SH,
    /// Lens spaces and `S²×S¹`.
    TH,
    /// Reducible.
    S,
    /// Toroidal.
    T,
    /// Small Seifert over `S²` with three exceptional fibres.
    Z,
    Unknown,
}

impl ExceptionalType {
    pub fn code(self) -> &'static str {
        match self {
            ExceptionalType::SH => "SH",
            ExceptionalType::TH => "TH",
            ExceptionalType::S => "S",
            ExceptionalType::T => "T",
            ExceptionalType::Z => "Z",
            ExceptionalType::Unknown => "unknown",
        }
    }

    pub fn from_code(s: &str) -> Option<ExceptionalType> {
        Some(match s {
            "SH" => ExceptionalType::SH,
            "TH" => ExceptionalType::TH,
            "S" => ExceptionalType::S,
            "T" => ExceptionalType::T,
            "Z" => ExceptionalType::Z,
            "unknown" => ExceptionalType::Unknown,
            _ => return None,
        })
    }
}

impl fmt::Display for ExceptionalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for ExceptionalType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for ExceptionalType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ExceptionalType::from_code(&s).ok_or_else(|| D::Error::custom(format!("unknown type {s:?}")))
    }
}

// ---------------------------------------------------------------------------
// lens spaces

/// `L(p, q)` in the conventions `L(1,q) = S³`, `L(0,q) = S²×S¹`.
pub fn lens_normalize(p: i64, q: i64) -> Result<ClosedManifoldForm, SeifertError> {
    if p == 0 {
        return Ok(ClosedManifoldForm::S2xS1);
    }
    if gcd(p as i128, q as i128) != 1 {
        return Err(SeifertError::NotCoprime(p, q));
    }
    let p = p.abs();
    if p == 1 {
        return Ok(ClosedManifoldForm::S3);
    }
    Ok(ClosedManifoldForm::Lens { p, q: q.rem_euclid(p) })
}

/// `L(p, q1) ≅ L(p, q2)` iff `q2 ≡ ±q1^{±1} (mod p)`.
pub fn lens_homeo_eq(l1: &ClosedManifoldForm, l2: &ClosedManifoldForm) -> bool {
    match (l1, l2) {
        (ClosedManifoldForm::Lens { p: p1, q: q1 }, ClosedManifoldForm::Lens { p: p2, q: q2 }) => {
            if p1 != p2 {
                return false;
            }
            let p = *p1 as i128;
            let (q1, q2) = ((*q1 as i128).rem_euclid(p), (*q2 as i128).rem_euclid(p));
            let mut cands = vec![q1, (-q1).rem_euclid(p)];
            if let Some(inv) = mod_inverse(q1, p) {
                cands.push(inv);
                cands.push((-inv).rem_euclid(p));
            }
            cands.contains(&q2)
        }
        (a, b) => a == b,
    }
}

/// Order of `H1` of a lens-type form: `p` for `L(p,q)`, 1 for `S³`, 0 for `S²×S¹`.
pub fn lens_order(m: &ClosedManifoldForm) -> Option<i64> {
    match m {
        ClosedManifoldForm::S3 => Some(1),
        ClosedManifoldForm::S2xS1 => Some(0),
        ClosedManifoldForm::Lens { p, .. } => Some(*p),
        _ => None,
    }
}

/// The lens space `(S², (α1,β1), (α2,β2))` with Euler summand `e`.
fn lens_from_two(f1: Fiber, f2: Fiber, e: i64) -> Result<ClosedManifoldForm, SeifertError> {
    let (a1, b1) = (f1.0 as i128, f1.1 as i128 + e as i128 * f1.0 as i128);
    let (a2, b2) = (f2.0 as i128, f2.1 as i128);
    let p = a1 * b2 + a2 * b1;
    // a1·δ − b1·γ = 1
    let (g, x, y) = ext_gcd(a1, -b1);
    if g != 1 {
        return Err(SeifertError::NotCoprime(f1.0, f1.1));
    }
    let (delta, gamma) = (x, y);
    let q = a2 * delta + b2 * gamma;
    let q = if p == 0 { q } else { q.rem_euclid(p.abs()) };
    let p = i64::try_from(p).map_err(|_| SeifertError::Overflow)?;
    let q = i64::try_from(q).map_err(|_| SeifertError::Overflow)?;
    lens_normalize(p, q)
}

// ---------------------------------------------------------------------------
// Seifert spaces over S²

fn sign_normalize(f: Fiber) -> Fiber {
    if f.0 < 0 || (f.0 == 0 && f.1 < 0) {
        (-f.0, -f.1)
    } else {
        f
    }
}

fn check_coprime(f: Fiber) -> Result<(), SeifertError> {
    if gcd(f.0 as i128, f.1 as i128) != 1 {
        Err(SeifertError::NotCoprime(f.0, f.1))
    } else {
        Ok(())
    }
}

/// Canonical data for fibres `a ≥ 2` with Euler summand `e`, one orientation.
fn reduce_fibers(fibers: &[Fiber], mut e: i64) -> (Vec<Fiber>, i64) {
    let mut out = Vec::with_capacity(fibers.len());
    for &(a, b) in fibers {
        e += b.div_euclid(a);
        out.push((a, b.rem_euclid(a)));
    }
    out.sort_unstable();
    (out, e)
}

fn seif_canonical(fibers: &[Fiber], e: i64) -> ClosedManifoldForm {
    let (f1, e1) = reduce_fibers(fibers, e);
    let reversed: Vec<Fiber> = fibers.iter().map(|&(a, b)| (a, -b)).collect();
    let (f2, e2) = reduce_fibers(&reversed, -e);
    let mirrored = (f2.clone(), e2) < (f1.clone(), e1);
    let (fibers, euler) = if mirrored { (f2, e2) } else { (f1, e1) };
    ClosedManifoldForm::SeifS2 { fibers, euler, mirrored }
}

/// `(S², (a,b), (c,d), (0,1)) = L(a,b) # L(c,d)`; each further `(0,1)` fibre
/// adds an `S²×S¹` summand.
pub fn connsum_reduce(fibers: &[Fiber]) -> Result<ClosedManifoldForm, SeifertError> {
    let zeros = fibers.iter().filter(|f| f.0 == 0).count();
    if zeros == 0 {
        return Err(SeifertError::Precondition("a fibre (0, ±1) is required".into()));
    }
    // each further (0, ±1) fibre adds an S²×S¹ summand
    let mut summands = vec![ClosedManifoldForm::S2xS1; zeros - 1];
    for &(a, b) in fibers.iter().filter(|f| f.0 != 0) {
        summands.push(lens_normalize(a, b)?);
    }
    Ok(connected_sum(summands))
}

/// `(S², (a,b), (c,d), (1,e)) = L(a(d+ce)+bc, ⋆)`. The returned `q`
/// comes from the standard two-fibre formula and is informational.
pub fn seifert_to_lens(fibers: &[Fiber]) -> Result<ClosedManifoldForm, SeifertError> {
    let fibers: Vec<Fiber> = fibers.iter().map(|&f| sign_normalize(f)).collect();
    let Some(pos) = fibers.iter().position(|f| f.0 == 1) else {
        return Err(SeifertError::Precondition("a fibre (±1, e) is required".into()));
    };
    let e = fibers[pos].1;
    let rest: Vec<Fiber> = fibers.iter().enumerate().filter(|(i, _)| *i != pos).map(|(_, f)| *f).collect();
    if rest.len() != 2 {
        return Err(SeifertError::Precondition("three fibres expected".into()));
    }
    lens_from_two(rest[0], rest[1], e)
}

fn normalize_seifert(fibers: &[Fiber], euler: i64) -> Result<ClosedManifoldForm, SeifertError> {
    let mut fs = Vec::with_capacity(fibers.len());
    for &f in fibers {
        check_coprime(f)?;
        fs.push(sign_normalize(f));
    }
    let zeros = fs.iter().filter(|f| f.0 == 0).count();
    if zeros > 0 {
        return connsum_reduce(&fs);
    }
    let mut e = euler;
    let mut exc = Vec::new();
    for (a, b) in fs {
        if a == 1 {
            e = e.checked_add(b).ok_or(SeifertError::Overflow)?;
        } else {
            exc.push((a, b));
        }
    }
    match exc.len() {
        0 => lens_normalize(e, 1),
        1 => lens_from_two(exc[0], (1, 0), e),
        2 => lens_from_two(exc[0], exc[1], e),
        _ => Ok(seif_canonical(&exc, e)),
    }
}

// ---------------------------------------------------------------------------
// graph manifolds

fn mat_mul(a: Matrix2, b: Matrix2) -> Matrix2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn mat_det(a: Matrix2) -> i64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn mat_inverse(a: Matrix2) -> Matrix2 {
    let d = mat_det(a);
    [[d * a[1][1], -d * a[0][1]], [-d * a[1][0], d * a[0][0]]]
}

fn mat_neg(a: Matrix2) -> Matrix2 {
    [[-a[0][0], -a[0][1]], [-a[1][0], -a[1][1]]]
}

const FLIP: Matrix2 = [[1, 0], [0, -1]];

/// Shifting a left fibre `b ↦ b + k·a` changes `B` to `B·[[1,0],[k,1]]`.
fn left_shift(b: Matrix2, k: i64) -> Matrix2 {
    mat_mul(b, [[1, 0], [k, 1]])
}

/// Shifting a right fibre `b ↦ b + k·a` changes `B` to `[[1,0],[−k,1]]·B`.
fn right_shift(b: Matrix2, k: i64) -> Matrix2 {
    mat_mul([[1, 0], [-k, 1]], b)
}

/// A piece with a fibre of multiplicity one is a solid torus, and the union is a Seifert space over `S²`. With `B = [[0,1],[1,0]]`
/// this is `D(1,b)(c,d) ∪ D(e,f)(g,h) = (S², (e,f), (g,h), (d+bc, −c))`.
pub fn merge_trivial_fiber(left: [Fiber; 2], b: Matrix2, right: [Fiber; 2]) -> Result<RawExpr, SeifertError> {
    let left = left.map(sign_normalize);
    let right = right.map(sign_normalize);
    if let Some(i) = left.iter().position(|f| f.0 == 1) {
        let (c, d) = left[1 - i];
        let bb = left_shift(b, -left[i].1);
        let third = (d * bb[0][1] - c * bb[0][0], d * bb[1][1] - c * bb[1][0]);
        return Ok(RawExpr::seifert(&[right[0], right[1], third]));
    }
    if right.iter().any(|f| f.0 == 1) {
        return merge_trivial_fiber(right, mat_inverse(b), left);
    }
    Err(SeifertError::Precondition("no fibre of multiplicity one".into()))
}

fn graph_key(left: [Fiber; 2], b: Matrix2, right: [Fiber; 2]) -> ([Fiber; 2], [Fiber; 2], Matrix2) {
    let mut b = b;
    let mut l = left;
    for f in l.iter_mut() {
        let q = f.1.div_euclid(f.0);
        b = left_shift(b, -q);
        f.1 -= q * f.0;
    }
    let mut r = right;
    for f in r.iter_mut() {
        let q = f.1.div_euclid(f.0);
        b = right_shift(b, -q);
        f.1 -= q * f.0;
    }
    l.sort_unstable();
    r.sort_unstable();
    let nb = mat_neg(b);
    (l, r, if nb < b { nb } else { b })
}

fn graph_canonical(left: [Fiber; 2], b: Matrix2, right: [Fiber; 2]) -> ClosedManifoldForm {
    let mut best = None;
    for swap in [false, true] {
        let (l0, b0, r0) = if swap { (right, mat_inverse(b), left) } else { (left, b, right) };
        for ml in [false, true] {
            for mr in [false, true] {
                let mut bb = b0;
                let mut l = l0;
                let mut r = r0;
                if ml {
                    l = l.map(|(a, x)| (a, -x));
                    bb = mat_mul(bb, FLIP);
                }
                if mr {
                    r = r.map(|(a, x)| (a, -x));
                    bb = mat_mul(FLIP, bb);
                }
                let key = graph_key(l, bb, r);
                if best.as_ref().is_none_or(|k| key < *k) {
                    best = Some(key);
                }
            }
        }
    }
    let (left, right, b) = best.unwrap();
    ClosedManifoldForm::GraphDD { left, b, right }
}

fn normalize_graph(left: [Fiber; 2], b: Matrix2, right: [Fiber; 2]) -> Result<ClosedManifoldForm, SeifertError> {
    if mat_det(b).abs() != 1 {
        return Err(SeifertError::NotUnimodular(b));
    }
    for f in left.iter().chain(&right) {
        check_coprime(*f)?;
    }
    let left = left.map(sign_normalize);
    let right = right.map(sign_normalize);
    if left.iter().chain(&right).any(|f| f.0 == 1) {
        return normalize(&merge_trivial_fiber(left, b, right)?);
    }
    // D(0,1)(c,d) = L(c,d) # D(1,0)(0,1), a solid torus whose meridian is the fibre
    for (piece, is_left) in [(left, true), (right, false)] {
        if let Some(i) = piece.iter().position(|f| f.0 == 0) {
            let (c, d) = piece[1 - i];
            let solid = [(1, 0), (0, 1)];
            let rest =
                if is_left { merge_trivial_fiber(solid, b, right)? } else { merge_trivial_fiber(left, b, solid)? };
            return Ok(connected_sum(vec![lens_normalize(c, d)?, normalize(&rest)?]));
        }
    }
    Ok(graph_canonical(left, b, right))
}

/// Connected sum of normal forms, kept only when it is at most two lens spaces.
fn connected_sum(parts: Vec<ClosedManifoldForm>) -> ClosedManifoldForm {
    let mut summands = Vec::new();
    for p in parts {
        match p {
            ClosedManifoldForm::S3 => {}
            ClosedManifoldForm::ConnSumLens(a, b) => summands.extend([*a, *b]),
            other => summands.push(other),
        }
    }
    if summands.iter().any(|m| !m.is_lens_type()) {
        let text: Vec<String> = summands.iter().map(|m| m.to_string()).collect();
        return ClosedManifoldForm::Unrecognized(text.join(" # "));
    }
    match summands.len() {
        0 => ClosedManifoldForm::S3,
        1 => summands.pop().unwrap(),
        2 => {
            summands.sort_by(form_order);
            let b = summands.pop().unwrap();
            let a = summands.pop().unwrap();
            ClosedManifoldForm::ConnSumLens(Box::new(a), Box::new(b))
        }
        n => ClosedManifoldForm::Unrecognized(format!("connected sum of {n} lens spaces")),
    }
}

fn normalize(raw: &RawExpr) -> Result<ClosedManifoldForm, SeifertError> {
    match raw {
        RawExpr::Lens(p, q) => lens_normalize(*p, *q),
        RawExpr::Seifert { fibers, euler } => normalize_seifert(fibers, *euler),
        RawExpr::Graph { left, b, right } => normalize_graph(*left, *b, *right),
    }
}

/// Rewrites with the multiplicity-one merge, the connected-sum rule, the
/// two-fibre lens formula and lens normalisation until a normal form is
/// reached. Inputs outside the handled shapes come back as `Unrecognized`.
pub fn normalize_closed(raw: &RawExpr) -> ClosedManifoldForm {
    normalize(raw).unwrap_or_else(|e| ClosedManifoldForm::Unrecognized(format!("{raw}: {e}")))
}

/// Reads a normal form back as a raw expression.
pub fn to_raw(m: &ClosedManifoldForm) -> Option<RawExpr> {
    Some(match m {
        ClosedManifoldForm::S3 => RawExpr::Lens(1, 0),
        ClosedManifoldForm::S2xS1 => RawExpr::Lens(0, 1),
        ClosedManifoldForm::Lens { p, q } => RawExpr::Lens(*p, *q),
        ClosedManifoldForm::SeifS2 { fibers, euler, .. } => RawExpr::Seifert { fibers: fibers.clone(), euler: *euler },
        ClosedManifoldForm::GraphDD { left, b, right } => RawExpr::graph(*left, *b, *right),
        ClosedManifoldForm::ConnSumLens(..) | ClosedManifoldForm::Unrecognized(_) => return None,
    })
}

// ---------------------------------------------------------------------------
// comparison and classification

fn form_order(a: &ClosedManifoldForm, b: &ClosedManifoldForm) -> Ordering {
    a.to_string().cmp(&b.to_string())
}

impl ClosedManifoldForm {
    /// Unoriented homeomorphism test between normal forms.
    pub fn homeomorphic(&self, other: &ClosedManifoldForm) -> bool {
        use ClosedManifoldForm as C;
        match (self, other) {
            (C::Lens { .. }, C::Lens { .. }) => lens_homeo_eq(self, other),
            (C::SeifS2 { fibers: f1, euler: e1, .. }, C::SeifS2 { fibers: f2, euler: e2, .. }) => f1 == f2 && e1 == e2,
            (C::ConnSumLens(a1, b1), C::ConnSumLens(a2, b2)) => {
                (a1.homeomorphic(a2) && b1.homeomorphic(b2)) || (a1.homeomorphic(b2) && b1.homeomorphic(a2))
            }
            (C::Unrecognized(_), _) | (_, C::Unrecognized(_)) => false,
            _ => self == other,
        }
    }

    pub fn is_lens_type(&self) -> bool {
        lens_order(self).is_some()
    }

    /// Extra remarks: `(2,2,n)` Seifert spaces may be prism manifolds.
    pub fn annotations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let ClosedManifoldForm::SeifS2 { fibers, .. } = self {
            if fibers.len() == 3 && fibers[0].0 == 2 && fibers[1].0 == 2 {
                out.push("prism/ambiguous".to_string());
            }
        }
        out
    }
}

pub fn classify(m: &ClosedManifoldForm) -> ExceptionalType {
    match m {
        ClosedManifoldForm::S3 => ExceptionalType::SH,
        ClosedManifoldForm::Lens { .. } | ClosedManifoldForm::S2xS1 => ExceptionalType::TH,
        ClosedManifoldForm::SeifS2 { fibers, .. } if fibers.len() == 3 => ExceptionalType::Z,
        ClosedManifoldForm::SeifS2 { .. } => ExceptionalType::T,
        ClosedManifoldForm::GraphDD { .. } => ExceptionalType::T,
        ClosedManifoldForm::ConnSumLens(..) => ExceptionalType::S,
        ClosedManifoldForm::Unrecognized(_) => ExceptionalType::Unknown,
    }
}

// ---------------------------------------------------------------------------
// printing, parsing, JSON

fn fmt_fibers(f: &mut fmt::Formatter<'_>, fibers: &[Fiber]) -> fmt::Result {
    for (a, b) in fibers {
        write!(f, ",({a},{b})")?;
    }
    Ok(())
}

impl fmt::Display for ClosedManifoldForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedManifoldForm::S3 => write!(f, "S3"),
            ClosedManifoldForm::S2xS1 => write!(f, "S2xS1"),
            ClosedManifoldForm::Lens { p, q } => write!(f, "L({p},{q})"),
            ClosedManifoldForm::SeifS2 { fibers, euler, .. } => {
                write!(f, "(S2")?;
                fmt_fibers(f, fibers)?;
                if *euler != 0 {
                    write!(f, ",(1,{euler})")?;
                }
                write!(f, ")")
            }
            ClosedManifoldForm::GraphDD { left, b, right } => {
                write!(f, "{}", RawExpr::graph(*left, *b, *right))
            }
            ClosedManifoldForm::ConnSumLens(a, b) => write!(f, "{a}#{b}"),
            ClosedManifoldForm::Unrecognized(s) => write!(f, "unrecognized[{s}]"),
        }
    }
}

fn ints(s: &str) -> Vec<i64> {
    let mut out = Vec::new();
    let bytes: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let neg = bytes[i] == '-' || bytes[i] == '−';
        let start = if neg { i + 1 } else { i };
        let mut j = start;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > start {
            let v: i64 = bytes[start..j].iter().collect::<String>().parse().unwrap_or(0);
            out.push(if neg { -v } else { v });
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

/// Parses the usual notation: `S3`, `S2xS1`, `L(32,-9)`,
/// `(S2,(2,1),(3,2),(9,-5))`, `D(2,1)(3,1) u[[1,1],[0,-1]] D(2,1)(4,-5)`,
/// and `L(2,1)#L(3,1)`.
pub fn parse_raw(text: &str) -> Result<RawExpr, SeifertError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || SeifertError::Parse(text.to_string());
    match t.as_str() {
        "S3" | "S^3" => return Ok(RawExpr::Lens(1, 0)),
        "S2xS1" | "S^2xS^1" => return Ok(RawExpr::Lens(0, 1)),
        _ => {}
    }
    if t.contains('#') {
        let parts: Vec<&str> = t.split('#').collect();
        if parts.len() != 2 {
            return Err(bad());
        }
        let mut fibers = Vec::new();
        for p in parts {
            match parse_raw(p)? {
                RawExpr::Lens(p, q) => fibers.push((p, q)),
                _ => return Err(bad()),
            }
        }
        fibers.push((0, 1));
        return Ok(RawExpr::seifert(&fibers));
    }
    if let Some(rest) = t.strip_prefix("L(") {
        let v = ints(rest);
        return if v.len() == 2 { Ok(RawExpr::Lens(v[0], v[1])) } else { Err(bad()) };
    }
    let seif = ["(S2,", "(S^2,"].iter().find_map(|p| t.strip_prefix(p));
    if let Some(rest) = seif {
        let v = ints(rest);
        if !v.len().is_multiple_of(2) || v.is_empty() {
            return Err(bad());
        }
        return Ok(RawExpr::seifert(&v.chunks(2).map(|c| (c[0], c[1])).collect::<Vec<_>>()));
    }
    if t.starts_with("D(") {
        let v = ints(&t);
        if v.len() != 12 {
            return Err(bad());
        }
        return Ok(RawExpr::graph(
            [(v[0], v[1]), (v[2], v[3])],
            [[v[4], v[5]], [v[6], v[7]]],
            [(v[8], v[9]), (v[10], v[11])],
        ));
    }
    Err(bad())
}

fn fibers_json(fs: &[Fiber]) -> Value {
    Value::Array(fs.iter().map(|(a, b)| json!([a, b])).collect())
}

impl ClosedManifoldForm {
    pub fn to_json(&self) -> Value {
        match self {
            ClosedManifoldForm::S3 => json!({"lens": "S3"}),
            ClosedManifoldForm::S2xS1 => json!({"lens": "S2xS1"}),
            ClosedManifoldForm::Lens { p, q } => json!({"lens": [p, q]}),
            ClosedManifoldForm::SeifS2 { fibers, euler, mirrored } => json!({
                "seif": {"base": "S2", "fibers": fibers_json(fibers), "euler": euler, "mirrored": mirrored}
            }),
            ClosedManifoldForm::GraphDD { left, b, right } => json!({
                "graph": {
                    "left": {"base": "D", "fibers": fibers_json(left)},
                    "B": b,
                    "right": {"base": "D", "fibers": fibers_json(right)},
                }
            }),
            ClosedManifoldForm::ConnSumLens(a, b) => json!({"connsum": [a.to_json(), b.to_json()]}),
            ClosedManifoldForm::Unrecognized(s) => json!({"unrecognized": s}),
        }
    }

    pub fn from_json(v: &Value) -> Result<ClosedManifoldForm, SeifertError> {
        let bad = || SeifertError::Parse(v.to_string());
        let fib = |x: &Value| -> Result<Vec<Fiber>, SeifertError> {
            x.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|p| {
                    let a = p.get(0).and_then(Value::as_i64).ok_or_else(bad)?;
                    let b = p.get(1).and_then(Value::as_i64).ok_or_else(bad)?;
                    Ok((a, b))
                })
                .collect()
        };
        let two = |x: Vec<Fiber>| -> Result<[Fiber; 2], SeifertError> { x.try_into().map_err(|_| bad()) };
        if let Some(l) = v.get("lens") {
            return match l {
                Value::String(s) if s == "S3" => Ok(ClosedManifoldForm::S3),
                Value::String(s) if s == "S2xS1" => Ok(ClosedManifoldForm::S2xS1),
                Value::Array(a) if a.len() == 2 => {
                    let p = a[0].as_i64().ok_or_else(bad)?;
                    let q = a[1].as_i64().ok_or_else(bad)?;
                    Ok(ClosedManifoldForm::Lens { p, q })
                }
                _ => Err(bad()),
            };
        }
        if let Some(s) = v.get("seif") {
            return Ok(ClosedManifoldForm::SeifS2 {
                fibers: fib(s.get("fibers").ok_or_else(bad)?)?,
                euler: s.get("euler").and_then(Value::as_i64).unwrap_or(0),
                mirrored: s.get("mirrored").and_then(Value::as_bool).unwrap_or(false),
            });
        }
        if let Some(g) = v.get("graph") {
            let piece = |k: &str| -> Result<[Fiber; 2], SeifertError> {
                let p = g.get(k).ok_or_else(bad)?;
                two(fib(p.get("fibers").unwrap_or(p))?)
            };
            let b: Matrix2 = serde_json::from_value(g.get("B").ok_or_else(bad)?.clone()).map_err(|_| bad())?;
            return Ok(ClosedManifoldForm::GraphDD { left: piece("left")?, b, right: piece("right")? });
        }
        if let Some(c) = v.get("connsum").and_then(Value::as_array) {
            if c.len() == 2 {
                return Ok(ClosedManifoldForm::ConnSumLens(
                    Box::new(Self::from_json(&c[0])?),
                    Box::new(Self::from_json(&c[1])?),
                ));
            }
        }
        if let Some(s) = v.get("unrecognized").and_then(Value::as_str) {
            return Ok(ClosedManifoldForm::Unrecognized(s.to_string()));
        }
        Err(bad())
    }
}

impl Serialize for ClosedManifoldForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClosedManifoldForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        ClosedManifoldForm::from_json(&v).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(s: &str) -> ClosedManifoldForm {
        normalize_closed(&parse_raw(s).unwrap())
    }

    #[test]
    fn degenerate_graph_piece() {
        let raw = parse_raw("D(2,1)(3,1) u[[0,1],[1,0]] D(0,1)(5,2)").unwrap();
        let m = normalize_closed(&raw);
        assert!(matches!(m, ClosedManifoldForm::ConnSumLens(..)), "{m}");
        assert_eq!(crate::homology::form_order(&m), crate::homology::raw_order(&raw).ok());
        assert_eq!(lens_order(&norm("D(5,2)(5,-3) u[[0,1],[1,0]] D(0,1)(1,0)")), Some(5));
        assert_eq!(norm("(S2,(0,1),(0,1),(0,-1))").to_string(), "S2xS1#S2xS1");
    }

    #[test]
    fn lens_examples() {
        assert_eq!(lens_normalize(1, 7).unwrap(), ClosedManifoldForm::S3);
        assert_eq!(lens_normalize(0, 1).unwrap(), ClosedManifoldForm::S2xS1);
        assert_eq!(lens_normalize(-31, -12).unwrap(), ClosedManifoldForm::Lens { p: 31, q: 19 });
        assert_eq!(lens_normalize(2, 7).unwrap(), ClosedManifoldForm::Lens { p: 2, q: 1 });
        assert!(lens_normalize(4, 2).is_err());
    }

    #[test]
    fn lens_equivalence() {
        let l = |p, q| ClosedManifoldForm::Lens { p, q };
        assert!(lens_homeo_eq(&l(31, 19), &l(31, 19)));
        assert!(lens_homeo_eq(&l(31, 19), &l(31, 13)));
        assert!(!lens_homeo_eq(&l(7, 1), &l(7, 2)));
    }

    #[test]
    fn merge_examples() {
        let r = merge_trivial_fiber([(1, -1), (3, 1)], SWAP, [(2, 1), (5, 2)]).unwrap();
        assert_eq!(r, RawExpr::seifert(&[(2, 1), (5, 2), (-2, -3)]));
        let r0 = merge_trivial_fiber([(1, 0), (3, 5)], SWAP, [(2, 1), (5, 2)]).unwrap();
        assert_eq!(r0, RawExpr::seifert(&[(2, 1), (5, 2), (5, -3)]));
        // the identity holds with the pieces exchanged
        let r1 = merge_trivial_fiber([(2, 1), (5, 2)], SWAP, [(1, -1), (3, 1)]).unwrap();
        assert_eq!(r1, r);
        assert!(merge_trivial_fiber([(2, 1), (3, 1)], SWAP, [(2, 1), (5, 2)]).is_err());
    }

    #[test]
    fn connsum_examples() {
        let rp3 = ClosedManifoldForm::Lens { p: 2, q: 1 };
        assert_eq!(
            connsum_reduce(&[(2, 1), (2, 1), (0, 1)]).unwrap(),
            ClosedManifoldForm::ConnSumLens(Box::new(rp3.clone()), Box::new(rp3))
        );
        assert_eq!(connsum_reduce(&[(1, 0), (5, 2), (0, 1)]).unwrap(), ClosedManifoldForm::Lens { p: 5, q: 2 });
    }

    #[test]
    fn eq3_examples() {
        assert_eq!(seifert_to_lens(&[(2, 1), (3, 1), (1, -1)]).unwrap(), ClosedManifoldForm::S3);
        assert_eq!(seifert_to_lens(&[(2, 1), (3, 2), (1, -1)]).unwrap(), ClosedManifoldForm::S3);
        // e = 0: order |ad + bc|
        let l = seifert_to_lens(&[(5, 2), (3, 1), (1, 0)]).unwrap();
        assert_eq!(lens_order(&l), Some(11));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(norm("L(5,2)"), ClosedManifoldForm::Lens { p: 5, q: 2 });
        // D(1,n)(k,1) ∪ D(c,d)(g−h,h) at n = 2, k = 3, c/d = 5/2, (g−h)/h = 7/3
        let g = norm("D(1,2)(3,1) u[[0,1],[1,0]] D(5,2)(7,3)");
        let s = norm("(S2,(5,2),(7,3),(7,-3))");
        assert!(g.homeomorphic(&s));
        let t1 = norm("L(-31,-12)");
        assert_eq!(t1, ClosedManifoldForm::Lens { p: 31, q: 19 });
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&norm("L(32,-9)")), ExceptionalType::TH);
        assert_eq!(classify(&norm("(S2,(2,1),(3,2),(9,-5))")), ExceptionalType::Z);
        assert_eq!(classify(&norm("D(2,1)(3,1) u[[1,1],[0,-1]] D(2,1)(4,-5)")), ExceptionalType::T);
        assert_eq!(classify(&norm("S3")), ExceptionalType::SH);
        assert_eq!(classify(&norm("L(2,1)#L(3,1)")), ExceptionalType::S);
        assert_eq!(norm("(S2,(2,1),(2,1),(5,2))").annotations(), vec!["prism/ambiguous".to_string()]);
    }

    #[test]
    fn seifert_orientation_canonical() {
        let a = norm("(S2,(2,1),(3,1),(7,2))");
        let b = norm("(S2,(2,-1),(3,-1),(7,-2))");
        assert!(a.homeomorphic(&b));
        assert_eq!(norm("(S2,(2,1),(3,2),(5,-6))"), norm("(S2,(2,1),(3,-1),(5,4),(1,-1))"));
    }

    #[test]
    fn graph_canonical_is_idempotent() {
        let g = norm("D(2,1)(3,1) u[[1,1],[0,-1]] D(2,1)(4,-5)");
        let again = normalize_closed(&to_raw(&g).unwrap());
        assert_eq!(g, again);
        let swapped = norm("D(2,1)(4,-5) u[[1,1],[0,-1]] D(2,1)(3,1)");
        assert_eq!(g, swapped);
    }

    #[test]
    fn json_roundtrip() {
        for s in [
            "S3",
            "S2xS1",
            "L(31,19)",
            "(S2,(2,1),(3,2),(9,-5))",
            "D(2,1)(3,1) u[[1,1],[0,-1]] D(2,1)(4,-5)",
            "L(2,1)#L(3,1)",
        ] {
            let m = norm(s);
            let v = serde_json::to_value(&m).unwrap();
            let back: ClosedManifoldForm = serde_json::from_value(v).unwrap();
            assert_eq!(back, m, "{s}");
        }
    }
}
