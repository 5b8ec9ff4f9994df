//! Filling instructions on the chain-link exteriors `M5`, `M4`, `M3`, `N`, `F`,
//! their symmetry groups, and the reduction identities `M5 → M4 → M3 ↔ N`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::slopes::{apply_moebius, MoebiusMap, Slope, SlopeError};

/// Default cap on orbit sizes. The groups are finite and small, so a larger
/// closure means a generator is encoded wrongly.
pub const ORBIT_BUDGET: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstructionError {
    #[error("{link} expects {expected} slots, got {got}")]
    Arity { link: ChainLink, expected: usize, got: usize },
    #[error("generator {gen} acts on {expected}, not on {got}")]
    LinkMismatch { gen: String, expected: ChainLink, got: ChainLink },
    #[error("orbit exceeded the budget of {0} instructions")]
    OrbitBudget(usize),
    #[error("unknown chain link {0:?}")]
    UnknownLink(String),
    #[error("slot {0} must be filled")]
    EmptySlot(usize),
    #[error(transparent)]
    Slope(#[from] SlopeError),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChainLink {
    M5,
    M4,
    M3,
    N,
    F,
}

impl ChainLink {
    pub const ALL: [ChainLink; 5] = [ChainLink::M5, ChainLink::M4, ChainLink::M3, ChainLink::N, ChainLink::F];

    pub fn arity(self) -> usize {
        match self {
            ChainLink::M5 => 5,
            ChainLink::M4 | ChainLink::F => 4,
            ChainLink::M3 | ChainLink::N => 3,
        }
    }

    /// Slopes whose presence forces a non-hyperbolic filling. `F` carries no
    /// encoded set.
    pub fn flagged_slopes(self) -> Vec<Slope> {
        let ints = |v: &[i64]| v.iter().map(|&k| Slope::int(k)).chain([Slope::INF]).collect();
        match self {
            ChainLink::M5 => ints(&[0, 1]),
            ChainLink::M4 => ints(&[0, 1, 2]),
            ChainLink::N => ints(&[0, -1, -2, -3]),
            ChainLink::M3 => ints(&[0, 1, 2, 3]),
            ChainLink::F => Vec::new(),
        }
    }
}

impl fmt::Display for ChainLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChainLink::M5 => "M5",
            ChainLink::M4 => "M4",
            ChainLink::M3 => "M3",
            ChainLink::N => "N",
            ChainLink::F => "F",
        };
        f.write_str(s)
    }
}

impl FromStr for ChainLink {
    type Err = InstructionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "M5" | "m5" => Ok(ChainLink::M5),
            "M4" | "m4" => Ok(ChainLink::M4),
            "M3" | "m3" => Ok(ChainLink::M3),
            "N" | "n" => Ok(ChainLink::N),
            "F" | "f" => Ok(ChainLink::F),
            other => Err(InstructionError::UnknownLink(other.to_string())),
        }
    }
}

/// A chain link with one optional slope per boundary component.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FillingInstruction {
    pub link: ChainLink,
    pub slots: Vec<Option<Slope>>,
}

impl FillingInstruction {
    pub fn new(link: ChainLink, slots: Vec<Option<Slope>>) -> Result<Self, InstructionError> {
        if slots.len() != link.arity() {
            return Err(InstructionError::Arity { link, expected: link.arity(), got: slots.len() });
        }
        Ok(FillingInstruction { link, slots })
    }

    pub fn full(link: ChainLink, slopes: &[Slope]) -> Result<Self, InstructionError> {
        Self::new(link, slopes.iter().copied().map(Some).collect())
    }

    /// Parses a comma-separated list; `_` or an empty field marks a hole.
    /// Missing trailing slots are holes.
    pub fn parse(link: ChainLink, text: &str) -> Result<Self, InstructionError> {
        let mut slots = Vec::new();
        if !text.trim().is_empty() {
            for part in text.split(',') {
                let p = part.trim();
                if p.is_empty() || p == "_" || p == "empty" {
                    slots.push(None);
                } else {
                    slots.push(Some(p.parse::<Slope>()?));
                }
            }
        }
        if slots.len() < link.arity() {
            slots.resize(link.arity(), None);
        }
        Self::new(link, slots)
    }

    pub fn is_full(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }

    pub fn filled_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    /// All slopes, or the index of the first hole.
    pub fn slopes(&self) -> Result<Vec<Slope>, InstructionError> {
        self.slots.iter().enumerate().map(|(i, s)| s.ok_or(InstructionError::EmptySlot(i + 1))).collect()
    }

    pub fn contains(&self, s: Slope) -> bool {
        self.slots.contains(&Some(s))
    }

    /// Fills the first hole with `s`.
    pub fn with_last(&self, s: Slope) -> FillingInstruction {
        let mut out = self.clone();
        if let Some(slot) = out.slots.iter_mut().find(|x| x.is_none()) {
            *slot = Some(s);
        }
        out
    }
}

impl fmt::Display for FillingInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.link)?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match s {
                Some(s) => write!(f, "{s}")?,
                None => write!(f, "_")?,
            }
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GeneratorId {
    Rot,
    Refl,
    S(u8),
    D4Rot,
    D4Refl,
    S3Swap,
    S3Cycle,
    Composite,
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorId::Rot => write!(f, "rot"),
            GeneratorId::Refl => write!(f, "refl"),
            GeneratorId::S(k) => write!(f, "s{k}"),
            GeneratorId::D4Rot => write!(f, "d4-rot"),
            GeneratorId::D4Refl => write!(f, "d4-refl"),
            GeneratorId::S3Swap => write!(f, "s3-swap"),
            GeneratorId::S3Cycle => write!(f, "s3-cycle"),
            GeneratorId::Composite => write!(f, "composite"),
        }
    }
}

/// Slot `i` of the image is `maps[i]` applied to slot `source[i]` of the input.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymmetryGenerator {
    pub id: GeneratorId,
    pub link: ChainLink,
    pub source: Vec<usize>,
    pub maps: Vec<MoebiusMap>,
}

impl SymmetryGenerator {
    fn permutation(id: GeneratorId, link: ChainLink, source: Vec<usize>) -> Self {
        let maps = vec![MoebiusMap::IDENTITY; source.len()];
        SymmetryGenerator { id, link, source, maps }
    }

    /// The generator undoing `self`.
    pub fn inverse(&self) -> SymmetryGenerator {
        let n = self.source.len();
        let mut source = vec![0; n];
        let mut maps = vec![MoebiusMap::IDENTITY; n];
        for i in 0..n {
            source[self.source[i]] = i;
            maps[self.source[i]] = self.maps[i].inverse();
        }
        SymmetryGenerator { id: GeneratorId::Composite, link: self.link, source, maps }
    }

    /// `other` first, then `self`.
    pub fn compose(&self, other: &SymmetryGenerator) -> Result<SymmetryGenerator, SlopeError> {
        let n = self.source.len();
        let mut source = Vec::with_capacity(n);
        let mut maps = Vec::with_capacity(n);
        for i in 0..n {
            let j = self.source[i];
            source.push(other.source[j]);
            maps.push(self.maps[i].compose(&other.maps[j])?);
        }
        Ok(SymmetryGenerator { id: GeneratorId::Composite, link: self.link, source, maps })
    }

    /// True when the action is trivial on every instruction.
    pub fn is_identity(&self) -> bool {
        self.source.iter().enumerate().all(|(i, &j)| i == j)
            && self.maps.iter().all(|m| m.same_action(&MoebiusMap::IDENTITY))
    }
}

fn m5_generators() -> Vec<SymmetryGenerator> {
    use MoebiusMap as M;
    let (id, inv, omx) = (M::IDENTITY, M::RECIP, M::ONE_MINUS);
    let (xx1, x1x, oom) = (M::X_OVER_X_MINUS_ONE, M::X_MINUS_ONE_OVER_X, M::ONE_OVER_ONE_MINUS);
    // (source slot, map) per image slot, slots numbered from 1.
    let table: [[(usize, MoebiusMap); 5]; 11] = [
        [(3, inv), (5, omx), (1, xx1), (2, omx), (4, inv)],
        [(1, oom), (5, x1x), (3, x1x), (2, oom), (4, id)],
        [(5, xx1), (1, omx), (3, inv), (2, inv), (4, omx)],
        [(5, oom), (3, id), (1, oom), (2, x1x), (4, x1x)],
        [(1, xx1), (3, xx1), (5, xx1), (2, xx1), (4, xx1)],
        [(4, inv), (5, inv), (3, omx), (2, xx1), (1, omx)],
        [(4, oom), (1, id), (3, oom), (2, x1x), (5, x1x)],
        [(4, xx1), (3, omx), (1, inv), (2, inv), (5, omx)],
        [(4, x1x), (3, oom), (5, id), (2, oom), (1, x1x)],
        [(4, omx), (1, inv), (5, inv), (2, omx), (3, xx1)],
        [(1, x1x), (3, x1x), (4, oom), (2, id), (5, oom)],
    ];
    let mut gens = vec![
        SymmetryGenerator::permutation(GeneratorId::Rot, ChainLink::M5, vec![4, 0, 1, 2, 3]),
        SymmetryGenerator::permutation(GeneratorId::Refl, ChainLink::M5, vec![4, 3, 2, 1, 0]),
    ];
    for (k, row) in table.iter().enumerate() {
        gens.push(SymmetryGenerator {
            id: GeneratorId::S(k as u8 + 1),
            link: ChainLink::M5,
            source: row.iter().map(|(s, _)| s - 1).collect(),
            maps: row.iter().map(|(_, m)| *m).collect(),
        });
    }
    gens
}

/// Generators of the symmetry action on instructions of `link`.
pub fn generators(link: ChainLink) -> Vec<SymmetryGenerator> {
    match link {
        ChainLink::M5 => m5_generators(),
        ChainLink::M4 | ChainLink::F => vec![
            SymmetryGenerator::permutation(GeneratorId::D4Rot, link, vec![1, 2, 3, 0]),
            SymmetryGenerator::permutation(GeneratorId::D4Refl, link, vec![3, 2, 1, 0]),
        ],
        ChainLink::N | ChainLink::M3 => vec![
            SymmetryGenerator::permutation(GeneratorId::S3Swap, link, vec![1, 0, 2]),
            SymmetryGenerator::permutation(GeneratorId::S3Cycle, link, vec![1, 2, 0]),
        ],
    }
}

/// Looks up a generator by its printed name (`rot`, `s7`, `d4-refl`, ...).
pub fn generator_by_name(link: ChainLink, name: &str) -> Option<SymmetryGenerator> {
    generators(link).into_iter().find(|g| g.id.to_string() == name)
}

pub fn apply_generator(g: &SymmetryGenerator, f: &FillingInstruction) -> Result<FillingInstruction, InstructionError> {
    if g.link != f.link {
        return Err(InstructionError::LinkMismatch { gen: g.id.to_string(), expected: g.link, got: f.link });
    }
    let mut slots = Vec::with_capacity(f.slots.len());
    for (i, &j) in g.source.iter().enumerate() {
        slots.push(match f.slots[j] {
            Some(s) => Some(apply_moebius(g.maps[i], s)?),
            None => None,
        });
    }
    Ok(FillingInstruction { link: f.link, slots })
}

/// Closure of `{f}` under the generators, sorted.
pub fn orbit(f: &FillingInstruction) -> Result<Vec<FillingInstruction>, InstructionError> {
    orbit_with_budget(f, ORBIT_BUDGET)
}

pub fn orbit_with_budget(f: &FillingInstruction, budget: usize) -> Result<Vec<FillingInstruction>, InstructionError> {
    let gens = generators(f.link);
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(f.clone());
    queue.push_back(f.clone());
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = apply_generator(g, &x)?;
            if seen.insert(y.clone()) {
                if seen.len() > budget {
                    return Err(InstructionError::OrbitBudget(budget));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Necessary-condition flag: some filled slot holds a slope known to give a
/// non-hyperbolic filling. `false` means nothing is known, not hyperbolicity.
pub fn nonhyperbolic_flag(f: &FillingInstruction) -> bool {
    let flagged = f.link.flagged_slopes();
    f.slots.iter().flatten().any(|s| flagged.contains(s))
}

/// `M5(a, c, −1, e, g) = M4(a, c+1, e+1, g)`, applied to a member with `−1`
/// in slot 3.
pub fn m5_minus_one_to_m4(f: &FillingInstruction) -> Result<FillingInstruction, InstructionError> {
    let plus = |s: Option<Slope>| s.map(|s| s.add_int(1)).transpose();
    Ok(FillingInstruction {
        link: ChainLink::M4,
        slots: vec![f.slots[0], plus(f.slots[1])?, plus(f.slots[3])?, f.slots[4]],
    })
}

/// Inverse of [`m5_minus_one_to_m4`]: `M4(a, x, y, g) = M5(a, x−1, −1, y−1, g)`.
pub fn m4_to_m5(f: &FillingInstruction) -> Result<FillingInstruction, InstructionError> {
    let minus = |s: Option<Slope>| s.map(|s| s.add_int(-1)).transpose();
    Ok(FillingInstruction {
        link: ChainLink::M5,
        slots: vec![f.slots[0], minus(f.slots[1])?, Some(Slope::int(-1)), minus(f.slots[2])?, f.slots[3]],
    })
}

/// Reduces an `M5` instruction to `M4` through an orbit member carrying `−1`
/// in slot 3.
pub fn factors_to_m4(f: &FillingInstruction) -> Result<Option<FillingInstruction>, InstructionError> {
    Ok(m4_reductions(f)?.into_iter().next())
}

/// Every `M4` instruction reachable from `f` by one `M5 → M4` reduction, sorted.
pub fn m4_reductions(f: &FillingInstruction) -> Result<Vec<FillingInstruction>, InstructionError> {
    if f.link != ChainLink::M5 {
        return Ok(Vec::new());
    }
    let minus_one = Some(Slope::int(-1));
    let mut out = BTreeSet::new();
    for g in orbit(f)? {
        if g.slots[2] == minus_one {
            out.insert(m5_minus_one_to_m4(&g)?);
        }
    }
    Ok(out.into_iter().collect())
}

/// `M4(a, −1, c, e) = M3(a+1, c+1, e)`.
pub fn m4_minus_one_to_m3(f: &FillingInstruction) -> Result<FillingInstruction, InstructionError> {
    let plus = |s: Option<Slope>| s.map(|s| s.add_int(1)).transpose();
    Ok(FillingInstruction { link: ChainLink::M3, slots: vec![plus(f.slots[0])?, plus(f.slots[2])?, f.slots[3]] })
}

fn direct_m3(f: &FillingInstruction) -> Result<Option<FillingInstruction>, InstructionError> {
    let minus_one = Some(Slope::int(-1));
    for g in orbit(f)? {
        if g.slots[1] == minus_one {
            return Ok(Some(m4_minus_one_to_m3(&g)?));
        }
    }
    Ok(None)
}

/// Reduces an `M4` instruction to `M3`. A `−1` is used directly; otherwise the
/// instruction is lifted to `M5`, and every `M4` reduction of the lifted
/// orbit is searched for a `−1`. `None` means no route was found, which is not
/// a proof of irreducibility.
pub fn factors_to_m3(f: &FillingInstruction) -> Result<Option<FillingInstruction>, InstructionError> {
    if f.link != ChainLink::M4 {
        return Ok(None);
    }
    if let Some(r) = direct_m3(f)? {
        return Ok(Some(r));
    }
    for m4 in m4_reductions(&m4_to_m5(f)?)? {
        if let Some(r) = direct_m3(&m4)? {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// `M3(a, b, c) = N(−a, −b, −c)`; also maps `N` back to `M3`.
pub fn m3_to_n(f: &FillingInstruction) -> FillingInstruction {
    let link = match f.link {
        ChainLink::M3 => ChainLink::N,
        ChainLink::N => ChainLink::M3,
        other => other,
    };
    FillingInstruction { link, slots: f.slots.iter().map(|s| s.map(Slope::neg)).collect() }
}

/// `N(a, b, c) = M4(−a−1, −1, −b−1, −c)`, the composite of `N → M3` and the
/// inverse of the `M4 → M3` identity.
pub fn n_to_m4(f: &FillingInstruction) -> Result<FillingInstruction, InstructionError> {
    let m = |s: Option<Slope>, k: i64| s.map(|s| s.neg().add_int(k)).transpose();
    Ok(FillingInstruction {
        link: ChainLink::M4,
        slots: vec![m(f.slots[0], -1)?, Some(Slope::int(-1)), m(f.slots[1], -1)?, m(f.slots[2], 0)?],
    })
}

/// A random slope `p/q` with `|p| ≤ height`, `0 ≤ q ≤ height`.
pub fn random_slope<R: Rng + ?Sized>(rng: &mut R, height: i64) -> Slope {
    loop {
        let p = rng.gen_range(-height..=height);
        let q = rng.gen_range(0..=height);
        if let Ok(s) = crate::slopes::make_slope(p, q) {
            return s;
        }
    }
}

/// A random full instruction on `link`.
pub fn random_full<R: Rng + ?Sized>(rng: &mut R, link: ChainLink, height: i64) -> FillingInstruction {
    let slots = (0..link.arity()).map(|_| Some(random_slope(rng, height))).collect();
    FillingInstruction { link, slots }
}
