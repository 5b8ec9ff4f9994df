//! Evaluators turning full filling instructions into closed-manifold
//! expressions.
//!
//! Only the distinguished fillings with closed formulas are evaluated
//! directly: `F` always, `M5` with last slope in `{∞, 1, 0}`, `M4` with last
//! slope in `{∞, 0, 1, 2}`. [`evaluate_closed`] reaches those shapes through
//! the symmetry groups and the reduction identities.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::instructions::{
    m3_to_n, m4_reductions, m4_to_m5, n_to_m4, orbit, ChainLink, FillingInstruction, InstructionError,
};
use crate::seifert::{normalize_closed, ClosedManifoldForm, RawExpr, SWAP};
use crate::slopes::{make_slope, Slope, SlopeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FillError {
    #[error("{link} has no closed formula for a last slope of {slope}; move it into {{{supported}}} first")]
    UnsupportedLast { link: ChainLink, slope: Slope, supported: &'static str },
    #[error("no evaluation route found for {0}")]
    NoRoute(String),
    #[error("{0} expects {1} slopes")]
    Arity(ChainLink, usize),
    #[error(transparent)]
    Instruction(#[from] InstructionError),
    #[error(transparent)]
    Slope(#[from] SlopeError),
}

/// The three distinguished slopes with a closed formula on `M5`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum M5Target {
    Inf,
    One,
    Zero,
}

impl M5Target {
    pub const ALL: [M5Target; 3] = [M5Target::Inf, M5Target::One, M5Target::Zero];

    pub fn slope(self) -> Slope {
        match self {
            M5Target::Inf => Slope::INF,
            M5Target::One => Slope::int(1),
            M5Target::Zero => Slope::ZERO,
        }
    }

    pub fn from_slope(s: Slope) -> Option<M5Target> {
        M5Target::ALL.into_iter().find(|t| t.slope() == s)
    }
}

fn slope(p: i64, q: i64) -> Result<Slope, SlopeError> {
    make_slope(p, q)
}

fn four(link: ChainLink, s: &[Slope]) -> Result<[Slope; 4], FillError> {
    s.try_into().map_err(|_| FillError::Arity(link, 4))
}

/// `F(a/b, e/f, c/d, g/h) = D(a,b)(c,d) ∪ D(e,f)(g,h)` with the swap gluing:
/// slots 1 and 3 build the left piece, slots 2 and 4 the right one.
pub fn fill_f(s: &[Slope]) -> Result<RawExpr, FillError> {
    let [s1, s2, s3, s4] = four(ChainLink::F, s)?;
    Ok(RawExpr::graph([s1.pair(), s3.pair()], SWAP, [s2.pair(), s4.pair()]))
}

/// The `F` instruction equal to `M5(a/b, c/d, e/f, g/h)(last)`.
pub fn m5_to_f(s: &[Slope], last: M5Target) -> Result<FillingInstruction, FillError> {
    let [x, y, z, w] = four(ChainLink::M5, s)?;
    let ((a, b), (c, d), (e, f), (g, h)) = (x.pair(), y.pair(), z.pair(), w.pair());
    let out = match last {
        M5Target::Inf => [slope(-a, b)?, slope(f, e)?, slope(d, c)?, slope(-g, h)?],
        M5Target::One => [slope(a - b, b)?, y, z, slope(g - h, h)?],
        M5Target::Zero => [slope(b, b - a)?, slope(c - d, c)?, slope(-h, g)?, slope(e - f, f)?],
    };
    Ok(FillingInstruction::full(ChainLink::F, &out)?)
}

/// `M5(a/b, c/d, e/f, g/h)(last)` for `last ∈ {∞, 1, 0}`.
pub fn m5_fill(s: &[Slope], last: Slope) -> Result<RawExpr, FillError> {
    let target = M5Target::from_slope(last).ok_or(FillError::UnsupportedLast {
        link: ChainLink::M5,
        slope: last,
        supported: "inf, 1, 0",
    })?;
    fill_f(&m5_to_f(s, target)?.slopes()?)
}

/// An `M5` instruction whose `target` filling is `F(a/b, c/d, e/f, g/h)`.
///
/// The `0` case solves the `M5(..)(0)` identity for its arguments. The
/// printed companion `M5((a−b)/a, d/(d−c), −h/g, (f+e)/f)(0)` does not invert
/// it; see [`f_to_m5_zero_printed`].
pub fn f_to_m5(s: &[Slope], target: M5Target) -> Result<FillingInstruction, FillError> {
    let [x, y, z, w] = four(ChainLink::F, s)?;
    let ((a, b), (c, d), (e, f), (g, h)) = (x.pair(), y.pair(), z.pair(), w.pair());
    let first = match target {
        M5Target::Inf => [slope(-a, b)?, slope(f, e)?, slope(d, c)?, slope(-g, h)?],
        M5Target::One => [slope(a + b, b)?, y, z, slope(g + h, h)?],
        M5Target::Zero => [slope(a - b, a)?, slope(d, d - c)?, slope(g + h, h)?, slope(-f, e)?],
    };
    let mut slots: Vec<Option<Slope>> = first.into_iter().map(Some).collect();
    slots.push(Some(target.slope()));
    Ok(FillingInstruction::new(ChainLink::M5, slots)?)
}

/// The `0` case exactly as printed alongside the `M5 → F` identities. Kept
/// so tests can show that it fails to reproduce the `F` filling.
pub fn f_to_m5_zero_printed(s: &[Slope]) -> Result<FillingInstruction, FillError> {
    let [x, y, z, w] = four(ChainLink::F, s)?;
    let ((a, b), (c, d), (e, f), (g, h)) = (x.pair(), y.pair(), z.pair(), w.pair());
    let mut slots: Vec<Option<Slope>> =
        [slope(a - b, a)?, slope(d, d - c)?, slope(-h, g)?, slope(f + e, f)?].into_iter().map(Some).collect();
    slots.push(Some(Slope::ZERO));
    Ok(FillingInstruction::new(ChainLink::M5, slots)?)
}

/// `M4(a/b, c/d, e/f)(last)` for `last ∈ {∞, 0, 1, 2}`.
pub fn m4_fill(s: &[Slope], last: Slope) -> Result<RawExpr, FillError> {
    let [x, y, z]: [Slope; 3] = s.try_into().map_err(|_| FillError::Arity(ChainLink::M4, 3))?;
    let ((a, b), (c, d), (e, f)) = (x.pair(), y.pair(), z.pair());
    if last.is_inf() {
        return Ok(RawExpr::seifert(&[(a, b), (d, -c), (e, f)]));
    }
    match (last.num(), last.den()) {
        (0, 1) => Ok(RawExpr::graph([(f, -e), (b, 2 * b - a)], SWAP, [(2, 1), (c - 2 * d, d)])),
        (1, 1) => Ok(RawExpr::seifert(&[(a - 2 * b, b), (c - d, c), (e - 2 * f, f)])),
        (2, 1) => Ok(RawExpr::graph([(a - b, b), (e - f, f)], SWAP, [(c, d), (2, -1)])),
        _ => Err(FillError::UnsupportedLast { link: ChainLink::M4, slope: last, supported: "inf, 0, 1, 2" }),
    }
}

/// A closed evaluation together with the chain of identities used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub route: Vec<String>,
    pub raw: RawExpr,
    pub form: ClosedManifoldForm,
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.form, self.route.join(" ; "))
    }
}

fn finish(route: Vec<String>, raw: RawExpr) -> Evaluation {
    let form = normalize_closed(&raw);
    Evaluation { route, raw, form }
}

fn eval_f(f: &FillingInstruction, mut route: Vec<String>) -> Result<Evaluation, FillError> {
    let raw = fill_f(&f.slopes()?)?;
    route.push(format!("{f} = {raw}"));
    Ok(finish(route, raw))
}

fn eval_m5_direct(f: &FillingInstruction, route: &[String]) -> Result<Option<Evaluation>, FillError> {
    for g in orbit(f)? {
        let s = g.slopes()?;
        if let Some(t) = M5Target::from_slope(s[4]) {
            let fi = m5_to_f(&s[..4], t)?;
            let mut r = route.to_vec();
            if g != *f {
                r.push(format!("symmetry: {g}"));
            }
            r.push(format!("{g} = {fi}"));
            return Ok(Some(eval_f(&fi, r)?));
        }
    }
    Ok(None)
}

fn eval_m4_direct(f: &FillingInstruction, route: &[String]) -> Result<Option<Evaluation>, FillError> {
    let supported = [Slope::INF, Slope::ZERO, Slope::int(1), Slope::int(2)];
    for g in orbit(f)? {
        let s = g.slopes()?;
        if supported.contains(&s[3]) {
            let raw = m4_fill(&s[..3], s[3])?;
            let mut r = route.to_vec();
            if g != *f {
                r.push(format!("symmetry: {g}"));
            }
            r.push(format!("{g} = {raw}"));
            return Ok(Some(finish(r, raw)));
        }
    }
    Ok(None)
}

fn eval_m5(f: &FillingInstruction, route: Vec<String>) -> Result<Evaluation, FillError> {
    if let Some(e) = eval_m5_direct(f, &route)? {
        return Ok(e);
    }
    for m4 in m4_reductions(f)? {
        let mut r = route.clone();
        r.push(format!("{f} = {m4}"));
        if let Some(e) = eval_m4_direct(&m4, &r)? {
            return Ok(e);
        }
    }
    Err(FillError::NoRoute(f.to_string()))
}

fn eval_m4(f: &FillingInstruction, route: Vec<String>) -> Result<Option<Evaluation>, FillError> {
    if let Some(e) = eval_m4_direct(f, &route)? {
        return Ok(Some(e));
    }
    let lifted = m4_to_m5(f)?;
    let mut r = route;
    r.push(format!("{f} = {lifted}"));
    eval_m5_direct(&lifted, &r)
}

fn eval_n(f: &FillingInstruction, route: Vec<String>) -> Result<Evaluation, FillError> {
    let images = orbit(f)?;
    // direct M4 shapes first; lifting to M5 searches a much larger orbit
    for lift in [false, true] {
        for g in &images {
            let m4 = n_to_m4(g)?;
            let mut r = route.clone();
            if g != f {
                r.push(format!("symmetry: {g}"));
            }
            r.push(format!("{g} = {m4}"));
            let e = if lift { eval_m4(&m4, r)? } else { eval_m4_direct(&m4, &r)? };
            if let Some(e) = e {
                return Ok(e);
            }
        }
    }
    Err(FillError::NoRoute(f.to_string()))
}

/// Evaluates a full instruction on any of the five links, searching the
/// symmetry orbits and reductions for a shape with a closed formula.
pub fn evaluate_closed(f: &FillingInstruction) -> Result<Evaluation, FillError> {
    f.slopes()?;
    match f.link {
        ChainLink::F => eval_f(f, Vec::new()),
        ChainLink::M5 => eval_m5(f, Vec::new()),
        ChainLink::M4 => eval_m4(f, Vec::new())?.ok_or_else(|| FillError::NoRoute(f.to_string())),
        ChainLink::N => eval_n(f, Vec::new()),
        ChainLink::M3 => {
            let n = m3_to_n(f);
            eval_n(&n, vec![format!("{f} = {n}")])
        }
    }
}
