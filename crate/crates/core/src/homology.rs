//! First homology of surgered chain links.
//!
//! For a link whose components carry slopes `p_i/q_i`, `H1` of the surgered
//! manifold is presented by `M(i,i) = p_i`, `M(i,j) = q_i·lk(i,j)`, so its
//! order is `|det M|` (0 when infinite). Linking numbers are `±1` between
//! cyclically adjacent components and 0 otherwise; the signs are fixed by
//! [`calibrate`] against the closed evaluators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_fill::{evaluate_closed, FillError};
use crate::instructions::{random_full, ChainLink, FillingInstruction, InstructionError};
use crate::seifert::{ClosedManifoldForm, Fiber, Matrix2, RawExpr};
use crate::slopes::Slope;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error(transparent)]
    Instruction(#[from] InstructionError),
    #[error("no linking data for {0}")]
    MissingLink(ChainLink),
    #[error("linking data for {link} has {got} signs, expected {expected}")]
    BadSigns { link: ChainLink, got: usize, expected: usize },
    #[error("integer overflow in determinant")]
    Overflow,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CalibrationError {
    #[error("no sign assignment for {0} matches the calibration targets")]
    NoSurvivor(ChainLink),
    #[error("{link}: {classes} inequivalent sign classes match the calibration targets")]
    Ambiguous { link: ChainLink, classes: usize },
    #[error("only {got} calibration targets for {link}, need {need}")]
    TooFewTargets { link: ChainLink, got: usize, need: usize },
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// Linking signs of a chain link: `signs[i] = lk(i, i+1 mod k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkingData {
    pub link: ChainLink,
    pub signs: Vec<i64>,
    pub provenance: String,
}

impl LinkingData {
    pub fn new(link: ChainLink, signs: Vec<i64>) -> Result<LinkingData, HomologyError> {
        if signs.len() != link.arity() || signs.iter().any(|s| s.abs() != 1) {
            return Err(HomologyError::BadSigns { link, got: signs.len(), expected: link.arity() });
        }
        Ok(LinkingData { link, signs, provenance: String::new() })
    }

    /// The symmetric linking matrix.
    pub fn lk(&self) -> Vec<Vec<i64>> {
        let k = self.signs.len();
        let mut m = vec![vec![0; k]; k];
        for (i, s) in self.signs.iter().enumerate() {
            let j = (i + 1) % k;
            m[i][j] = *s;
            m[j][i] = *s;
        }
        m
    }

    /// Product of the signs around the cycle; reorienting a component flips
    /// two adjacent signs, so only this product is an invariant.
    pub fn cycle_product(&self) -> i64 {
        self.signs.iter().product()
    }
}

/// Determinant by fraction-free Gaussian elimination with checked arithmetic.
pub fn det(mut m: Vec<Vec<i128>>) -> Result<i128, HomologyError> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let a = m[i][j].checked_mul(m[k][k]).ok_or(HomologyError::Overflow)?;
                let b = m[i][k].checked_mul(m[k][j]).ok_or(HomologyError::Overflow)?;
                m[i][j] = a.checked_sub(b).ok_or(HomologyError::Overflow)? / prev;
            }
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

/// Surgery presentation matrix of a full instruction.
pub fn presentation(lk: &LinkingData, f: &FillingInstruction) -> Result<Vec<Vec<i128>>, HomologyError> {
    if lk.link != f.link {
        return Err(HomologyError::MissingLink(f.link));
    }
    let slopes = f.slopes()?;
    let l = lk.lk();
    Ok(slopes
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (0..slopes.len())
                .map(|j| if i == j { s.num() as i128 } else { s.den() as i128 * l[i][j] as i128 })
                .collect()
        })
        .collect())
}

pub fn h1_order_with(lk: &LinkingData, f: &FillingInstruction) -> Result<u128, HomologyError> {
    Ok(det(presentation(lk, f)?)?.unsigned_abs())
}

/// `|H1|` using the shipped linking data.
pub fn h1_order(f: &FillingInstruction) -> Result<u128, HomologyError> {
    let lk = crate::data::linking(f.link).ok_or(HomologyError::MissingLink(f.link))?;
    h1_order_with(lk, f)
}

/// `|Σ b_i Π_{j≠i} a_j + e Π a_j|` for `(S², (a_i,b_i)..., (1,e))`.
pub fn seifert_order(fibers: &[Fiber], euler: i64) -> Result<u128, HomologyError> {
    let mut num: i128 = euler as i128;
    let mut den: i128 = 1;
    for &(a, b) in fibers {
        // num/den + b/a
        num = num
            .checked_mul(a as i128)
            .and_then(|x| x.checked_add((b as i128).checked_mul(den)?))
            .ok_or(HomologyError::Overflow)?;
        den = den.checked_mul(a as i128).ok_or(HomologyError::Overflow)?;
    }
    Ok(num.unsigned_abs())
}

/// `|H1|` of `D(a,b)(c,d) ∪_B D(e,f)(g,h)` from its 8×8 presentation.
///
/// Generators `x1, x2, xb, hX, y1, y2, yb, hY`: the exceptional cores, the
/// boundary section and the fibre of each side.
pub fn graph_order(left: [Fiber; 2], b: Matrix2, right: [Fiber; 2]) -> Result<u128, HomologyError> {
    let w = |v: i64| v as i128;
    let mut m = vec![vec![0i128; 8]; 8];
    let (x1, x2, xb, hx, y1, y2, yb, hy) = (0, 1, 2, 3, 4, 5, 6, 7);
    let pieces = [(left, [x1, x2, xb, hx]), (right, [y1, y2, yb, hy])];
    for (r, (fib, [c1, c2, cb, ch])) in pieces.into_iter().enumerate() {
        let row = 3 * r;
        m[row][c1] = w(fib[0].0);
        m[row][ch] = w(fib[0].1);
        m[row + 1][c2] = w(fib[1].0);
        m[row + 1][ch] = w(fib[1].1);
        m[row + 2][c1] = 1;
        m[row + 2][c2] = 1;
        m[row + 2][cb] = 1;
    }
    // xb = B00·yb + B10·hY ; hX = B01·yb + B11·hY
    m[6][xb] = 1;
    m[6][yb] = -w(b[0][0]);
    m[6][hy] = -w(b[1][0]);
    m[7][hx] = 1;
    m[7][yb] = -w(b[0][1]);
    m[7][hy] = -w(b[1][1]);
    Ok(det(m)?.unsigned_abs())
}

pub fn raw_order(raw: &RawExpr) -> Result<u128, HomologyError> {
    match raw {
        RawExpr::Lens(p, _) => Ok(p.unsigned_abs() as u128),
        RawExpr::Seifert { fibers, euler } => seifert_order(fibers, *euler),
        RawExpr::Graph { left, b, right } => graph_order(*left, *b, *right),
    }
}

/// `|H1|` of a normal form; `None` for unrecognized expressions.
pub fn form_order(m: &ClosedManifoldForm) -> Option<u128> {
    match m {
        ClosedManifoldForm::S3 => Some(1),
        ClosedManifoldForm::S2xS1 => Some(0),
        ClosedManifoldForm::Lens { p, .. } => Some(p.unsigned_abs() as u128),
        ClosedManifoldForm::SeifS2 { fibers, euler, .. } => seifert_order(fibers, *euler).ok(),
        ClosedManifoldForm::GraphDD { left, b, right } => graph_order(*left, *b, *right).ok(),
        ClosedManifoldForm::ConnSumLens(a, b) => Some(form_order(a)? * form_order(b)?),
        ClosedManifoldForm::Unrecognized(_) => None,
    }
}

/// An instruction with its expected `|H1|`.
pub type Target = (FillingInstruction, u128);

/// Slopes with a closed evaluator route on each link.
fn anchor_slopes(link: ChainLink) -> Vec<Slope> {
    let ints = |v: &[i64]| v.iter().map(|k| Slope::int(*k)).collect::<Vec<_>>();
    let mut out = vec![Slope::INF];
    out.extend(match link {
        ChainLink::M5 => ints(&[0, 1, -1]),
        ChainLink::M4 | ChainLink::F => ints(&[0, 1, 2, -1]),
        ChainLink::N => ints(&[0, -1, -2, -3]),
        ChainLink::M3 => ints(&[0, 1, 2, 3]),
    });
    out
}

/// Random full instructions with one slot moved to an evaluable slope, paired
/// with the order of the evaluator's raw output. On `N` the `∞`-targets use
/// `|tr − us|` directly.
pub fn calibration_targets(link: ChainLink, count: usize, seed: u64) -> Vec<Target> {
    use rand::seq::SliceRandom;
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors = anchor_slopes(link);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count {
        attempts += 1;
        let mut f = random_full(&mut rng, link, 12);
        let slot = rng.gen_range(0..link.arity());
        f.slots[slot] = anchors.choose(&mut rng).copied();
        let target = if link == ChainLink::N && f.slots[2] == Some(Slope::INF) {
            let (r, s) = f.slots[0].unwrap().pair();
            let (t, u) = f.slots[1].unwrap().pair();
            Some((t as i128 * r as i128 - u as i128 * s as i128).unsigned_abs())
        } else {
            match evaluate_closed(&f) {
                Ok(e) => raw_order(&e.raw).ok(),
                Err(FillError::NoRoute(_)) => None,
                Err(_) => None,
            }
        };
        if let Some(t) = target {
            out.push((f, t));
        }
    }
    out
}

/// Minimum number of targets accepted by [`calibrate`].
pub const MIN_TARGETS: usize = 100;

/// Searches every `±1` assignment for those matching all targets and groups
/// survivors by cycle product. Exactly one class must survive.
pub fn calibrate_with(link: ChainLink, targets: &[Target]) -> Result<LinkingData, CalibrationError> {
    if targets.len() < MIN_TARGETS {
        return Err(CalibrationError::TooFewTargets { link, got: targets.len(), need: MIN_TARGETS });
    }
    let k = link.arity();
    let mut classes: Vec<i64> = Vec::new();
    for mask in 0u32..(1 << k) {
        let signs: Vec<i64> = (0..k).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        let lk = LinkingData::new(link, signs)?;
        let mut ok = true;
        for (f, want) in targets {
            if h1_order_with(&lk, f)? != *want {
                ok = false;
                break;
            }
        }
        if ok && !classes.contains(&lk.cycle_product()) {
            classes.push(lk.cycle_product());
        }
    }
    match classes.as_slice() {
        [] => Err(CalibrationError::NoSurvivor(link)),
        [p] => {
            let mut signs = vec![1; k];
            signs[k - 1] = *p;
            let mut lk = LinkingData::new(link, signs)?;
            lk.provenance = format!("calibrated against {} evaluator targets", targets.len());
            Ok(lk)
        }
        _ => Err(CalibrationError::Ambiguous { link, classes: classes.len() }),
    }
}

/// Calibrates `link` against freshly sampled evaluator targets.
pub fn calibrate(link: ChainLink) -> Result<LinkingData, CalibrationError> {
    calibrate_with(link, &calibration_targets(link, 2 * MIN_TARGETS, 0x5eed ^ link.arity() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seifert::parse_raw;

    fn inst(link: ChainLink, s: &str) -> FillingInstruction {
        FillingInstruction::parse(link, s).unwrap()
    }

    #[test]
    fn determinant() {
        let m = vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]];
        assert_eq!(det(m).unwrap(), 18);
        assert_eq!(det(vec![vec![0, 1], vec![1, 0]]).unwrap(), -1);
        assert_eq!(det(vec![vec![1, 2], vec![2, 4]]).unwrap(), 0);
    }

    #[test]
    fn n_infinity_matches_tr_minus_us() {
        let f = inst(ChainLink::N, "-5/2,-1/3,inf");
        assert_eq!(h1_order(&f).unwrap(), 1);
    }

    #[test]
    fn expression_orders() {
        assert_eq!(raw_order(&parse_raw("(S2,(2,1),(3,1),(5,1))").unwrap()).unwrap(), 31);
        assert_eq!(raw_order(&parse_raw("L(7,2)").unwrap()).unwrap(), 7);
        // (S2,(2,1),(5,2),(-2,-3)) is the merged form of this graph
        let g = parse_raw("D(1,-1)(3,1) u[[0,1],[1,0]] D(2,1)(5,2)").unwrap();
        let s = parse_raw("(S2,(2,1),(5,2),(-2,-3))").unwrap();
        assert_eq!(raw_order(&g).unwrap(), raw_order(&s).unwrap());
    }

    #[test]
    fn calibration_is_unique() {
        for link in ChainLink::ALL {
            let lk = calibrate(link).unwrap();
            assert_eq!(Some(&lk.signs), crate::data::linking(link).map(|l| &l.signs), "{link}");
        }
    }
}
