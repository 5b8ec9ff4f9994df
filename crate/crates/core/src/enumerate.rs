//! Family verification, distinctness checks and bounded searches for
//! exceptional triples on the magic manifold.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::closed_fill::evaluate_closed;
use crate::homology::{form_order, h1_order};
use crate::instructions::{orbit, ChainLink, FillingInstruction};
use crate::magic_rules::{
    base_family, corrected_truth, family, family_instruction, family_row, ground_truth, in_range, is_parametric,
    n_fill_rule, triple_in_range, triple_instruction, RuleError, TruthError,
};
use crate::seifert::{classify, lens_order, ClosedManifoldForm, ExceptionalType};
use crate::slopes::{distance, Slope};

/// Largest search height accepted by [`search_triples`].
pub const MAX_HEIGHT: i64 = 60;
/// Parameter window used to identify search hits with family members.
pub const IDENTIFY_WINDOW: i64 = 500;

/// The five slopes of `N` carrying exceptional fillings in the generic case.
pub fn five_slopes() -> [Slope; 5] {
    [Slope::INF, Slope::int(-3), Slope::int(-2), Slope::int(-1), Slope::ZERO]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Match,
    OrderMatchOnly,
    Mismatch,
    NotCovered,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Check {
        Check { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowReport {
    pub n: i64,
    pub slope: Slope,
    pub status: RowStatus,
    pub expected: String,
    pub computed: Option<String>,
    pub h1: u128,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub family: String,
    pub range: (i64, i64),
    pub rows: Vec<RowReport>,
    pub invariants: Vec<Check>,
    pub errors: Vec<String>,
}

impl FamilyReport {
    pub fn count(&self, status: RowStatus) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    /// Some row was checked, every row matches and every invariant holds.
    /// Parameters outside the family's range are listed in `errors` and
    /// skipped.
    pub fn all_match(&self) -> bool {
        !self.rows.is_empty()
            && self.rows.iter().all(|r| r.status == RowStatus::Match)
            && self.invariants.iter().all(|c| c.passed)
    }
}

fn lens_q_differs(a: &ClosedManifoldForm, b: &ClosedManifoldForm) -> bool {
    matches!((lens_order(a), lens_order(b)), (Some(x), Some(y)) if x == y)
}

fn verify_row(id: &str, n: i64, beta: Slope) -> Result<RowReport, TruthError> {
    let row = family_row(id, beta)?;
    let f = family_instruction(id, n)?.with_last(beta);
    let expected = ground_truth(id, n, beta)?;
    let h1 = h1_order(&f).unwrap_or(u128::MAX);
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let want = form_order(&expected);
    checks.push(Check::new("h1", want == Some(h1), format!("oracle {h1}, table {want:?}")));

    let computed = match evaluate_closed(&f) {
        Ok(e) => Some(e.form),
        Err(e) => {
            notes.push(format!("no evaluator route ({e}); checked by H1 order and type only"));
            None
        }
    };
    let mut order_only = false;
    if let Some(c) = &computed {
        let form_ok = c.homeomorphic(&expected);
        order_only = !form_ok && lens_q_differs(c, &expected);
        checks.push(Check::new("evaluator", form_ok, format!("{c}")));
    }
    if let Some(t) = row.expected_type {
        let got = classify(computed.as_ref().unwrap_or(&expected));
        checks.push(Check::new("type", got == t, format!("{got}, expected {t}")));
    }
    if let (Some(a), Some(b)) = (f.slots[0], f.slots[1]) {
        match n_fill_rule(beta, a, b) {
            Ok(Some(out)) => {
                if let Some(o) = out.order {
                    checks.push(Check::new("rule", o == h1, format!("rule order {o}: {}", out.provenance)));
                }
            }
            Ok(None) | Err(RuleError::NotRuleSlope(_)) => {}
            Err(e) => notes.push(format!("rule table: {e}")),
        }
    }

    let failing: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    let status = if failing.is_empty() {
        RowStatus::Match
    } else if order_only && failing.iter().all(|c| c.name == "evaluator") {
        RowStatus::OrderMatchOnly
    } else {
        RowStatus::Mismatch
    };
    if status == RowStatus::Mismatch {
        if let Some(fixed) = corrected_truth(id, n, beta)? {
            let confirmed = computed.as_ref().map_or(form_order(&fixed) == Some(h1), |c| c.homeomorphic(&fixed));
            if confirmed {
                notes.push(format!("erratum confirmed: {} ({})", fixed, row.note.clone().unwrap_or_default()));
            }
        }
    }
    Ok(RowReport {
        n,
        slope: beta,
        status,
        expected: expected.to_string(),
        computed: computed.map(|c| c.to_string()),
        h1,
        checks,
        notes,
    })
}

/// The pattern of types realised by a family's triple.
pub fn family_pattern(id: &str) -> Result<Pattern, TruthError> {
    Ok(match family(id)?.id.as_str() {
        "A" | "isolated" => Pattern::LensLens,
        "B" | "C" => Pattern::LensToroidal,
        _ => Pattern::LensSeifert,
    })
}

/// Checks the table rows of a family for `n ∈ [lo, hi]` against the closed
/// evaluators, the rule table and the `H1` oracle, plus the triple's types
/// and distances.
pub fn verify_family(id: &str, lo: i64, hi: i64) -> Result<FamilyReport, TruthError> {
    let fam = family(id)?;
    let base = base_family(id)?;
    let parametric = is_parametric(base);
    let ns: Vec<i64> = if parametric { (lo..=hi).collect() } else { vec![0] };
    let slopes: Vec<Slope> =
        if fam.exterior_of.is_some() { fam.triple.to_vec() } else { base.rows.iter().map(|r| r.slope).collect() };
    let pattern = family_pattern(id)?;
    let mut report = FamilyReport {
        family: fam.id.clone(),
        range: if parametric { (lo, hi) } else { (0, 0) },
        rows: Vec::new(),
        invariants: Vec::new(),
        errors: Vec::new(),
    };
    let [alpha, beta, gamma] = fam.triple;
    let mut type_ok = true;
    let mut type_detail = String::new();
    for n in ns {
        if !in_range(base, n) {
            report.errors.push(ground_truth(id, n, Slope::INF).err().map(|e| e.to_string()).unwrap_or_default());
            continue;
        }
        for &s in &slopes {
            report.rows.push(verify_row(id, n, s)?);
        }
        let f = family_instruction(id, n)?;
        let want = pattern.types();
        for (k, s) in [alpha, beta, gamma].into_iter().enumerate() {
            let t = evaluate_closed(&f.with_last(s)).map(|e| classify(&e.form)).unwrap_or_else(|_| {
                classify(&ground_truth(id, n, s).unwrap_or(ClosedManifoldForm::Unrecognized(String::new())))
            });
            if t != want[k] {
                type_ok = false;
                type_detail.push_str(&format!("n={n}: {s} is {t}, expected {}; ", want[k]));
            }
        }
    }
    report.invariants.push(Check::new(
        "triple-types",
        type_ok,
        if type_ok { format!("({alpha},{beta},{gamma}) realise {}", pattern.name()) } else { type_detail },
    ));
    let d = |x: Slope, y: Slope| distance(x, y);
    report.invariants.push(Check::new(
        "distance",
        match pattern {
            Pattern::LensLens => d(alpha, beta) == 1 && d(alpha, gamma) == 1,
            Pattern::LensToroidal => d(beta, gamma) == 3,
            Pattern::LensSeifert => d(beta, gamma) == 2,
        },
        format!(
            "D({alpha},{beta}) = {}, D({alpha},{gamma}) = {}, D({beta},{gamma}) = {}",
            d(alpha, beta),
            d(alpha, gamma),
            d(beta, gamma)
        ),
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// distinctness

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistinctnessReport {
    pub checks: Vec<Check>,
}

impl DistinctnessReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Toroidal fillings among a family member's table rows, typed by the
/// evaluator where a route exists and by the table entry otherwise.
pub fn toroidal_count(id: &str, n: i64) -> Result<usize, TruthError> {
    let f = family_instruction(id, n)?;
    let mut count = 0;
    for row in &base_family(id)?.rows {
        let t = match evaluate_closed(&f.with_last(row.slope)) {
            Ok(e) => classify(&e.form),
            Err(_) => classify(&ground_truth(id, n, row.slope)?),
        };
        count += usize::from(t == ExceptionalType::T);
    }
    Ok(count)
}

/// `x² + 2 ≡ y² (mod 4)` has no solution: squares are 0 or 1 mod 4.
/// Returns the residue table that proves it.
pub fn parity_certificate() -> Vec<(i64, i64, bool)> {
    let mut out = Vec::new();
    for x in 0..4i64 {
        for y in 0..4i64 {
            out.push((x, y, (x * x + 2).rem_euclid(4) == (y * y).rem_euclid(4)));
        }
    }
    out
}

/// The lens orders of `B_n(−3)` and `C_k(−3)` computed by the `H1` oracle.
pub fn minus_three_order(id: &str, n: i64) -> Result<u128, TruthError> {
    let f = family_instruction(id, n)?.with_last(Slope::int(-3));
    Ok(h1_order(&f).unwrap_or(u128::MAX))
}

pub fn distinctness(a_range: (i64, i64), bc_range: (i64, i64)) -> Result<DistinctnessReport, TruthError> {
    let mut checks = Vec::new();

    let mut bad = Vec::new();
    for n in a_range.0..=a_range.1 {
        if n == 0 {
            continue;
        }
        let c = toroidal_count("A", n)?;
        if c != 3 {
            bad.push(format!("A_{n}: {c}"));
        }
    }
    let iso = toroidal_count("isolated", 0)?;
    checks.push(Check::new(
        "toroidal-counts",
        bad.is_empty() && iso == 2,
        format!(
            "A_n: 3 for every n in range{}; isolated: {iso}",
            if bad.is_empty() { String::new() } else { format!(" except {}", bad.join(", ")) }
        ),
    ));

    // 4n² + 3 = 4k² + 8k − 1  ⟺  n² + 2 = (k + 1)²
    let bound = a_range.0.abs().max(a_range.1.abs()).max(bc_range.1.abs()).max(1000);
    let mut hits = Vec::new();
    for n in -bound..=bound {
        for k in -bound..=bound {
            if 4 * n * n + 3 == 4 * k * k + 8 * k - 1 {
                hits.push((n, k));
            }
        }
    }
    checks.push(Check::new(
        "4n^2+3 != 4k^2+8k-1",
        hits.is_empty(),
        format!("|n|, |k| <= {bound}: {} coincidences", hits.len()),
    ));
    let cert = parity_certificate();
    checks.push(Check::new(
        "parity-certificate",
        cert.iter().all(|(_, _, eq)| !eq),
        "n^2 + 2 = (k+1)^2 reduces mod 4 to x^2 + 2 = y^2 with x, y in Z/4; all 16 residue pairs fail",
    ));

    let bs: Vec<(i64, u128)> = (bc_range.0.max(3)..=bc_range.1)
        .map(|n| Ok((n, minus_three_order("B", n)?)))
        .collect::<Result<_, TruthError>>()?;
    let cs: Vec<(i64, u128)> = (bc_range.0.max(4)..=bc_range.1)
        .map(|n| Ok((n, minus_three_order("C", n)?)))
        .collect::<Result<_, TruthError>>()?;
    let clashes: Vec<String> = bs
        .iter()
        .flat_map(|(n, ob)| cs.iter().filter(move |(_, oc)| oc == ob).map(move |(k, _)| format!("B_{n} = C_{k}")))
        .collect();
    checks.push(Check::new(
        "B/C orders at -3",
        clashes.is_empty(),
        format!("{} B members, {} C members, {} clashes {}", bs.len(), cs.len(), clashes.len(), clashes.join(", ")),
    ));
    Ok(DistinctnessReport { checks })
}

// ---------------------------------------------------------------------------
// search

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    /// `(S^H, T^H, T^H)`
    LensLens,
    /// `(S^H, T^H, T)`
    LensToroidal,
    /// `(S^H, T^H, Z)`
    LensSeifert,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::LensLens, Pattern::LensToroidal, Pattern::LensSeifert];

    pub fn types(self) -> [ExceptionalType; 3] {
        use ExceptionalType::*;
        match self {
            Pattern::LensLens => [SH, TH, TH],
            Pattern::LensToroidal => [SH, TH, T],
            Pattern::LensSeifert => [SH, TH, Z],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pattern::LensLens => "lens-lens",
            Pattern::LensToroidal => "lens-toroidal",
            Pattern::LensSeifert => "lens-seifert",
        }
    }

    /// The distance `Δ(β, γ)` realised by the known families.
    pub fn default_distance(self) -> Option<u128> {
        match self {
            Pattern::LensLens => None,
            Pattern::LensToroidal => Some(3),
            Pattern::LensSeifert => Some(2),
        }
    }

    pub fn families(self) -> &'static [&'static str] {
        match self {
            Pattern::LensLens => &["A", "isolated"],
            Pattern::LensToroidal => &["B", "C"],
            Pattern::LensSeifert => &["Bprime", "Cprime"],
        }
    }
}

impl std::str::FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Pattern, String> {
        match s {
            "lens-lens" | "SH,TH,TH" => Ok(Pattern::LensLens),
            "lens-toroidal" | "SH,TH,T" => Ok(Pattern::LensToroidal),
            "lens-seifert" | "SH,TH,Z" => Ok(Pattern::LensSeifert),
            _ => Err(format!("unknown pattern {s:?}; expected lens-lens, lens-toroidal or lens-seifert")),
        }
    }
}

/// One filling of an `N(a, b)` exterior.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FillingSummary {
    pub slope: Slope,
    #[serde(rename = "type")]
    pub kind: ExceptionalType,
    pub h1: u128,
    pub form: Option<String>,
    /// Where the type came from: `evaluator`, `rule` or `none`.
    pub source: &'static str,
}

/// Types and orders of the five fillings of `N(a, b)`.
pub fn profile(a: Slope, b: Slope) -> Vec<FillingSummary> {
    let base = FillingInstruction { link: ChainLink::N, slots: vec![Some(a), Some(b), None] };
    five_slopes()
        .into_iter()
        .map(|s| {
            let f = base.with_last(s);
            let h1 = h1_order(&f).unwrap_or(u128::MAX);
            let evaluated = evaluate_closed(&f).ok().filter(|e| classify(&e.form) != ExceptionalType::Unknown);
            match evaluated {
                Some(e) => FillingSummary {
                    slope: s,
                    kind: classify(&e.form),
                    h1,
                    form: Some(e.form.to_string()),
                    source: "evaluator",
                },
                None => match n_fill_rule(s, a, b) {
                    Ok(Some(out)) => FillingSummary {
                        slope: s,
                        kind: out.result_type,
                        h1,
                        form: out.form.map(|f| f.to_string()),
                        source: "rule",
                    },
                    _ => FillingSummary { slope: s, kind: ExceptionalType::Unknown, h1, form: None, source: "none" },
                },
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Identification {
    pub family: String,
    pub n: i64,
    /// `equivalent-by-symmetry` or `invariant-equal`
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExceptionalTriple {
    pub instruction: FillingInstruction,
    pub slopes: [Slope; 3],
    pub types: [ExceptionalType; 3],
    pub orders: [u128; 3],
    pub distances: [u128; 3],
    pub identified: Option<Identification>,
    pub fillings: Vec<FillingSummary>,
}

/// Why an instruction was set aside for manual review.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BucketReason {
    /// A slope lies in the large-exceptional set, where the catch-all rules
    /// are withheld.
    LargeExceptional,
    /// Some filling has no evaluator route and no applicable rule.
    UnknownType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BucketEntry {
    pub instruction: FillingInstruction,
    pub reason: BucketReason,
    pub detail: String,
    /// Triples the evaluator finds on this exterior, for the reviewer.
    pub triples: Vec<ExceptionalTriple>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub pattern: Pattern,
    pub height: i64,
    pub distance: Option<u128>,
    pub scanned: usize,
    pub skipped_flagged: usize,
    pub triples: Vec<ExceptionalTriple>,
    pub not_covered: Vec<BucketEntry>,
    /// Slopes where a quoted rule and the evaluator disagree on the type.
    pub rule_conflicts: Vec<String>,
}

impl SearchReport {
    pub fn unidentified(&self) -> usize {
        self.triples.iter().filter(|t| t.identified.is_none()).count()
    }
}

/// Reduced slopes `p/q` with `|p| ≤ height`, `1 ≤ q ≤ height`.
pub fn slopes_up_to(height: i64) -> Vec<Slope> {
    let mut out = Vec::new();
    for q in 1..=height {
        for p in -height..=height {
            if crate::arith::gcd(p as i128, q as i128) == 1 {
                out.push(Slope::from_i128(p as i128, q as i128).expect("nonzero denominator"));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Signatures `(orders of β and γ)` of family members, keyed for lookup.
type SignatureIndex = BTreeMap<(u128, u128), Vec<(usize, i64, String)>>;

fn signature_key(pattern: Pattern, ob: u128, og: u128) -> (u128, u128) {
    if pattern == Pattern::LensLens {
        (ob.min(og), ob.max(og))
    } else {
        (ob, og)
    }
}

fn build_index(pattern: Pattern) -> Result<SignatureIndex, TruthError> {
    let mut idx = SignatureIndex::new();
    for (rank, id) in pattern.families().iter().enumerate() {
        let fam = family(id)?;
        let base = base_family(id)?;
        let ns: Vec<i64> = if is_parametric(base) { (-IDENTIFY_WINDOW..=IDENTIFY_WINDOW).collect() } else { vec![0] };
        for n in ns {
            if !triple_in_range(id, n)? {
                continue;
            }
            let f = triple_instruction(id, n)?;
            let types: Vec<ExceptionalType> = fam
                .triple
                .iter()
                .map(|s| {
                    evaluate_closed(&f.with_last(*s)).map(|e| classify(&e.form)).unwrap_or(ExceptionalType::Unknown)
                })
                .collect();
            if types != pattern.types() {
                continue;
            }
            let o: Vec<u128> = fam.triple.iter().map(|s| h1_order(&f.with_last(*s)).unwrap_or(u128::MAX)).collect();
            idx.entry(signature_key(pattern, o[1], o[2])).or_default().push((rank, n, fam.id.clone()));
        }
    }
    for v in idx.values_mut() {
        v.sort_by_key(|(rank, n, _)| (n.abs(), *rank, *n));
    }
    Ok(idx)
}

fn same_by_symmetry(id: &str, n: i64, a: Slope, b: Slope, slopes: [Slope; 3]) -> bool {
    let Ok(f) = triple_instruction(id, n) else { return false };
    let Ok(fam) = family(id) else { return false };
    let mut t1 = fam.triple;
    let mut t2 = slopes;
    t1[1..].sort_unstable();
    t2[1..].sort_unstable();
    let target = FillingInstruction { link: ChainLink::N, slots: vec![Some(a), Some(b), None] };
    t1 == t2 && orbit(&f).map(|o| o.contains(&target)).unwrap_or(false)
}

/// Enumerates `N(a, b)` with `a ≤ b` of height at most `height`, skipping
/// flagged exteriors, and reports the pattern's triples among the five
/// slopes `∞, −3, −2, −1, 0`. Types come from the closed evaluators, with
/// the rule table as a fallback and cross-check.
pub fn search_triples(pattern: Pattern, height: i64, distance_req: Option<u128>) -> Result<SearchReport, String> {
    if !(1..=MAX_HEIGHT).contains(&height) {
        return Err(format!("height {height} outside 1..={MAX_HEIGHT}"));
    }
    let index = build_index(pattern).map_err(|e| e.to_string())?;
    let flagged = ChainLink::N.flagged_slopes();
    let d = crate::data::data();
    let slopes: Vec<Slope> = slopes_up_to(height);
    let mut report = SearchReport {
        pattern,
        height,
        distance: distance_req,
        scanned: 0,
        skipped_flagged: 0,
        triples: Vec::new(),
        not_covered: Vec::new(),
        rule_conflicts: Vec::new(),
    };
    let want = pattern.types();
    for (i, &a) in slopes.iter().enumerate() {
        for &b in &slopes[i..] {
            if flagged.contains(&a) || flagged.contains(&b) {
                report.skipped_flagged += 1;
                continue;
            }
            report.scanned += 1;
            let prof = profile(a, b);
            let inst = FillingInstruction { link: ChainLink::N, slots: vec![Some(a), Some(b), None] };
            for p in &prof {
                if p.source == "evaluator" {
                    if let Ok(Some(out)) = n_fill_rule(p.slope, a, b) {
                        let agree = out.result_type == p.kind
                            || (out.result_type == ExceptionalType::TH && p.kind == ExceptionalType::SH);
                        if !agree || out.order.is_some_and(|o| o != p.h1) {
                            report.rule_conflicts.push(format!(
                                "{inst} at {}: rule {} ({:?}), evaluator {} ({})",
                                p.slope, out.result_type, out.order, p.kind, p.h1
                            ));
                        }
                    }
                }
            }
            let unknown: Vec<Slope> =
                prof.iter().filter(|p| p.kind == ExceptionalType::Unknown).map(|p| p.slope).collect();
            let fits = |p: &FillingSummary, t: ExceptionalType| p.kind == t || p.kind == ExceptionalType::Unknown;
            let mut possible_unknown = false;
            let mut found = Vec::new();
            for x in &prof {
                for y in &prof {
                    for z in &prof {
                        if x.slope == y.slope || x.slope == z.slope || y.slope == z.slope {
                            continue;
                        }
                        if pattern == Pattern::LensLens && y.slope > z.slope {
                            continue;
                        }
                        if distance_req.is_some_and(|req| distance(y.slope, z.slope) != req) {
                            continue;
                        }
                        if !(fits(x, want[0]) && fits(y, want[1]) && fits(z, want[2])) {
                            continue;
                        }
                        if [x, y, z].iter().any(|p| p.kind == ExceptionalType::Unknown) {
                            possible_unknown = true;
                            continue;
                        }
                        let slopes3 = [x.slope, y.slope, z.slope];
                        let key = signature_key(pattern, y.h1, z.h1);
                        let identified = index.get(&key).and_then(|v| v.first()).map(|(_, n, id)| Identification {
                            family: id.clone(),
                            n: *n,
                            kind: if same_by_symmetry(id, *n, a, b, slopes3) {
                                "equivalent-by-symmetry"
                            } else {
                                "invariant-equal"
                            }
                            .to_string(),
                        });
                        found.push(ExceptionalTriple {
                            instruction: inst.clone(),
                            slopes: slopes3,
                            types: [x.kind, y.kind, z.kind],
                            orders: [x.h1, y.h1, z.h1],
                            distances: [
                                distance(x.slope, y.slope),
                                distance(x.slope, z.slope),
                                distance(y.slope, z.slope),
                            ],
                            identified,
                            fillings: prof.clone(),
                        });
                    }
                }
            }
            let guarded = d.large_exceptional.contains(&a) || d.large_exceptional.contains(&b);
            if guarded && (possible_unknown || !found.is_empty()) {
                report.not_covered.push(BucketEntry {
                    instruction: inst,
                    reason: BucketReason::LargeExceptional,
                    detail: "a slope lies in the large-exceptional set {1, -1/2, -3/2, -5/2}".to_string(),
                    triples: found,
                });
            } else if possible_unknown {
                report.not_covered.push(BucketEntry {
                    instruction: inst,
                    reason: BucketReason::UnknownType,
                    detail: format!(
                        "no evaluator route or rule determines the type at {}",
                        unknown.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
                    ),
                    triples: found,
                });
            } else {
                report.triples.extend(found);
            }
        }
    }
    Ok(report)
}

/// Outcome of comparing two triples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equivalence {
    EquivalentBySymmetry,
    InvariantEqual,
    Distinguished,
}

fn invariants(t: &ExceptionalTriple) -> (Vec<(ExceptionalType, u128)>, usize) {
    let mut multiset: Vec<(ExceptionalType, u128)> = t.fillings.iter().map(|f| (f.kind, f.h1)).collect();
    multiset.sort_unstable();
    let toroidal = t.fillings.iter().filter(|f| f.kind == ExceptionalType::T).count();
    (multiset, toroidal)
}

/// Builds the triple record of `N(a, b)` at the given slopes.
pub fn triple_for(a: Slope, b: Slope, slopes: [Slope; 3]) -> ExceptionalTriple {
    let prof = profile(a, b);
    let get = |s: Slope| prof.iter().find(|p| p.slope == s).cloned();
    let pick = |s: Slope| get(s).map(|p| (p.kind, p.h1)).unwrap_or((ExceptionalType::Unknown, 0));
    ExceptionalTriple {
        instruction: FillingInstruction { link: ChainLink::N, slots: vec![Some(a), Some(b), None] },
        slopes,
        types: slopes.map(|s| pick(s).0),
        orders: slopes.map(|s| pick(s).1),
        distances: [distance(slopes[0], slopes[1]), distance(slopes[0], slopes[2]), distance(slopes[1], slopes[2])],
        identified: None,
        fillings: prof,
    }
}

/// The triple of a family member.
pub fn family_triple(id: &str, n: i64) -> Result<ExceptionalTriple, TruthError> {
    let f = family_instruction(id, n)?;
    let (a, b) = (f.slots[0].expect("filled"), f.slots[1].expect("filled"));
    Ok(triple_for(a, b, family(id)?.triple))
}

/// Symmetry first, then invariants of the five fillings; no homeomorphism
/// decision beyond that.
pub fn equivalence_probe(t1: &ExceptionalTriple, t2: &ExceptionalTriple) -> Equivalence {
    let mut s1 = t1.slopes;
    let mut s2 = t2.slopes;
    s1[1..].sort_unstable();
    s2[1..].sort_unstable();
    if s1 == s2 && orbit(&t1.instruction).map(|o| o.contains(&t2.instruction)).unwrap_or(false) {
        return Equivalence::EquivalentBySymmetry;
    }
    if invariants(t1) != invariants(t2) {
        Equivalence::Distinguished
    } else {
        Equivalence::InvariantEqual
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_a_rows() {
        let r = verify_family("A", -3, 3).unwrap();
        assert_eq!(r.errors.len(), 1);
        assert!(r.errors[0].contains("pretzel"));
        assert_eq!(
            r.count(RowStatus::Mismatch),
            0,
            "{:#?}",
            r.rows.iter().filter(|x| x.status != RowStatus::Match).collect::<Vec<_>>()
        );
        assert_eq!(r.count(RowStatus::OrderMatchOnly), 0);
    }

    #[test]
    fn probe_examples() {
        let a1 = family_triple("A", 1).unwrap();
        let iso = family_triple("isolated", 0).unwrap();
        assert_eq!(equivalence_probe(&a1, &a1), Equivalence::EquivalentBySymmetry);
        let mut swapped = a1.clone();
        swapped.instruction.slots.swap(0, 1);
        assert_eq!(equivalence_probe(&a1, &swapped), Equivalence::EquivalentBySymmetry);
        assert_eq!(equivalence_probe(&a1, &iso), Equivalence::Distinguished);
        let b3 = family_triple("B", 3).unwrap();
        let c5 = family_triple("C", 5).unwrap();
        assert_eq!(equivalence_probe(&b3, &c5), Equivalence::Distinguished);
    }

    #[test]
    fn slope_grid() {
        let s = slopes_up_to(2);
        assert_eq!(s.len(), 5 + 2);
        assert!(s.contains(&"-1/2".parse().unwrap()));
    }
}
