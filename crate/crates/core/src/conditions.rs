//! Necessary conditions on `M4(a/b, c/d, e/f)` for the fillings at `2`, `1`
//! and `∞` to be lens spaces or `S³`, and the pairwise incompatibilities
//! between them, replayed over a finite box of slopes.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::slopes::Slope;

/// Slopes whose presence makes an `M4` filling non-hyperbolic or factor
/// through `M3`.
pub fn m4_excluded() -> Vec<Slope> {
    ["0", "1", "2", "inf", "-1", "1/2", "3/2", "3"].iter().map(|s| s.parse().expect("valid slope")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Condition {
    /// `|a − b| = 1`
    C2Zero,
    /// `|c| = 1`
    C2Prime,
    /// `b(f − e) = 1 + f` once `a − b = 1`, for some sign of `(e, f)`
    C2Second,
    /// `C2Zero ∧ C2Prime`
    C2One,
    /// `C2Zero ∧ C2Second`
    C2Two,
    /// `|a − 2b| = 1`
    C1One,
    /// `|c − d| = 1`
    C1Two,
    /// `|e − 2f| = 1`
    C1Three,
    /// `|a| = 1`
    CInfOne,
    /// `|d| = 1`
    CInfTwo,
    /// `|e| = 1`
    CInfThree,
}

impl Condition {
    pub const ALL: [Condition; 11] = [
        Condition::C2Zero,
        Condition::C2Prime,
        Condition::C2Second,
        Condition::C2One,
        Condition::C2Two,
        Condition::C1One,
        Condition::C1Two,
        Condition::C1Three,
        Condition::CInfOne,
        Condition::CInfTwo,
        Condition::CInfThree,
    ];

    /// Slots (0 = `a/b`, 1 = `c/d`, 2 = `e/f`) the condition reads.
    pub fn slots(self) -> Vec<usize> {
        use Condition::*;
        match self {
            C2Zero | C1One | CInfOne => vec![0],
            C2Prime | C1Two | CInfTwo => vec![1],
            C1Three | CInfThree => vec![2],
            C2Second | C2Two => vec![0, 2],
            C2One => vec![0, 1],
        }
    }

    pub fn name(self) -> &'static str {
        use Condition::*;
        match self {
            C2Zero => "C2^0",
            C2Prime => "C2'",
            C2Second => "C2''",
            C2One => "C2^1",
            C2Two => "C2^2",
            C1One => "C1^1",
            C1Two => "C1^2",
            C1Three => "C1^3",
            CInfOne => "Cinf^1",
            CInfTwo => "Cinf^2",
            CInfThree => "Cinf^3",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The sign representative chosen for each slot before testing the
/// sign-dependent conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SignNormalization {
    /// `(a, b)` negated so that `a − b = 1`; `None` when `|a − b| ≠ 1`.
    pub ab_negated: Option<bool>,
    /// `(c, d)` negated so that `c = 1`; `None` when `|c| ≠ 1`.
    pub cd_negated: Option<bool>,
    /// `(e, f)` negated to satisfy `b(f − e) = 1 + f`; `None` when neither
    /// sign does.
    pub ef_negated: Option<bool>,
}

fn pair(s: Slope) -> (i128, i128) {
    let (p, q) = s.pair();
    (p as i128, q as i128)
}

pub fn normalize_signs(f: &[Slope; 3]) -> SignNormalization {
    let (a, b) = pair(f[0]);
    let (c, _) = pair(f[1]);
    let (e, ff) = pair(f[2]);
    let ab_negated = match a - b {
        1 => Some(false),
        -1 => Some(true),
        _ => None,
    };
    let cd_negated = match c {
        1 => Some(false),
        -1 => Some(true),
        _ => None,
    };
    let ef_negated = ab_negated.and_then(|neg| {
        let b = if neg { -b } else { b };
        [false, true].into_iter().find(|&flip| {
            let (e, ff) = if flip { (-e, -ff) } else { (e, ff) };
            b * (ff - e) == 1 + ff
        })
    });
    SignNormalization { ab_negated, cd_negated, ef_negated }
}

pub fn holds(c: Condition, f: &[Slope; 3]) -> bool {
    use Condition::*;
    let (a, b) = pair(f[0]);
    let (cc, d) = pair(f[1]);
    let (e, ff) = pair(f[2]);
    match c {
        C2Zero => (a - b).abs() == 1,
        C2Prime => cc.abs() == 1,
        C2Second => normalize_signs(f).ef_negated.is_some(),
        C2One => holds(C2Zero, f) && holds(C2Prime, f),
        C2Two => holds(C2Zero, f) && holds(C2Second, f),
        C1One => (a - 2 * b).abs() == 1,
        C1Two => (cc - d).abs() == 1,
        C1Three => (e - 2 * ff).abs() == 1,
        CInfOne => a.abs() == 1,
        CInfTwo => d.abs() == 1,
        CInfThree => e.abs() == 1,
    }
}

/// Two conditions that can only hold together on excluded instructions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Incompatibility {
    pub first: Condition,
    pub second: Condition,
    /// For single-slot pairs, a set containing every slope the joint
    /// condition allows.
    pub forced: Option<Vec<Slope>>,
}

fn slopes(list: &[&str]) -> Option<Vec<Slope>> {
    Some(list.iter().map(|s| s.parse().expect("valid slope")).collect())
}

pub fn incompatibilities() -> Vec<Incompatibility> {
    use Condition::*;
    let inc = |first, second, forced| Incompatibility { first, second, forced };
    vec![
        inc(C2Zero, C1One, slopes(&["3/2", "inf"])),
        inc(C2Zero, CInfOne, slopes(&["1/2", "inf"])),
        inc(C2Prime, C1Two, slopes(&["1/2", "inf"])),
        inc(C2Prime, CInfTwo, slopes(&["1", "-1"])),
        inc(C2Two, C1Three, None),
        inc(C2Two, CInfThree, None),
        inc(C1Two, CInfTwo, slopes(&["0", "2"])),
        inc(C1Three, CInfThree, slopes(&["1", "-1", "inf"])),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayResult {
    pub first: Condition,
    pub second: Condition,
    pub height: i64,
    pub joint_solutions: usize,
    /// Joint solutions avoiding every excluded slope on the involved slots.
    pub escapes: Vec<[Slope; 3]>,
    /// Slopes seen on the involved slot, for single-slot pairs.
    pub observed: Option<Vec<Slope>>,
    /// The observed slopes are exactly the claimed forced set.
    pub tight: bool,
    pub passed: bool,
}

/// Every slope `p/q` with `|p|, q ≤ height`, plus `∞`.
pub fn box_slopes(height: i64) -> Vec<Slope> {
    let mut out: BTreeSet<Slope> = BTreeSet::from([Slope::INF]);
    for q in 1..=height {
        for p in -height..=height {
            if let Ok(s) = Slope::from_i128(p as i128, q as i128) {
                out.insert(s);
            }
        }
    }
    out.into_iter().collect()
}

/// Checks an incompatibility on every instruction whose involved slots range
/// over [`box_slopes`]. Uninvolved slots hold a fixed generic slope.
pub fn replay(inc: &Incompatibility, height: i64) -> ReplayResult {
    let excluded = m4_excluded();
    let mut involved: Vec<usize> = inc.first.slots();
    involved.extend(inc.second.slots());
    involved.sort_unstable();
    involved.dedup();
    let grid = box_slopes(height);
    let filler: Slope = "5/7".parse().expect("valid slope");
    let mut joint = 0;
    let mut escapes = Vec::new();
    let mut seen = BTreeSet::new();
    let mut visit = |f: [Slope; 3]| {
        if holds(inc.first, &f) && holds(inc.second, &f) {
            joint += 1;
            if involved.len() == 1 {
                seen.insert(f[involved[0]]);
            }
            if !involved.iter().any(|&i| excluded.contains(&f[i])) {
                escapes.push(f);
            }
        }
    };
    match involved.as_slice() {
        [i] => {
            for &s in &grid {
                let mut f = [filler; 3];
                f[*i] = s;
                visit(f);
            }
        }
        [i, j] => {
            for &s in &grid {
                for &t in &grid {
                    let mut f = [filler; 3];
                    f[*i] = s;
                    f[*j] = t;
                    visit(f);
                }
            }
        }
        _ => unreachable!("conditions read at most two slots"),
    }
    let observed: Option<Vec<Slope>> = (involved.len() == 1).then(|| seen.into_iter().collect());
    let (forced_ok, tight) = match (&inc.forced, &observed) {
        (Some(want), Some(got)) => {
            let mut want = want.clone();
            want.sort_unstable();
            (got.iter().all(|s| want.contains(s)), &want == got)
        }
        _ => (true, true),
    };
    ReplayResult {
        first: inc.first,
        second: inc.second,
        height,
        joint_solutions: joint,
        passed: escapes.is_empty() && forced_ok,
        tight,
        escapes,
        observed,
    }
}

/// The case analysis closing the `M4` step: every instruction meeting one
/// condition from each of the `2`, `1` and `∞` groups has an excluded slope.
pub fn closure_holds(f: &[Slope; 3]) -> bool {
    use Condition::*;
    let two = holds(C2One, f) || holds(C2Two, f);
    let one = holds(C1One, f) || holds(C1Two, f) || holds(C1Three, f);
    let inf = holds(CInfOne, f) || holds(CInfTwo, f) || holds(CInfThree, f);
    let excluded = m4_excluded();
    !(two && one && inf) || f.iter().any(|s| excluded.contains(s))
}
