//! Exceptional fillings of the magic manifold `N` at the slopes
//! `∞, 0, −1, −2, −3`, and the family tables used as ground truth.
//!
//! The rule table is partial: a `None` from [`n_fill_rule`] means "not covered
//! by the encoded rules", never "hyperbolic".

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::closed_fill::evaluate_closed;
use crate::data::{data, DataFile, FamilyData, FamilyRow, RulePattern, SlopeRule};
use crate::instructions::{ChainLink, FillingInstruction};
use crate::poly::{instantiate_template, Poly, PolyError};
use crate::seifert::{lens_normalize, normalize_closed, parse_raw, ClosedManifoldForm, ExceptionalType, SeifertError};
use crate::slopes::{Slope, SlopeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("N({0}, {1}) contains a slope from the large-exceptional set {{1, -1/2, -3/2, -5/2}}; only explicit formulas apply")]
    Guard(Slope, Slope),
    #[error("N({0}, {1}) is non-hyperbolic")]
    Flagged(Slope, Slope),
    #[error("no rules are encoded for slope {0}")]
    NotRuleSlope(Slope),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Seifert(#[from] SeifertError),
}

/// A rule hit: the exceptional type, the lens form or order when the rule
/// provides one, and the pattern parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleOutcome {
    pub slope: Slope,
    #[serde(rename = "type")]
    pub result_type: ExceptionalType,
    pub order: Option<u128>,
    pub form: Option<ClosedManifoldForm>,
    pub params: BTreeMap<char, i64>,
    pub provenance: String,
}

/// `n` with `p/q = base + 1/n`, if any.
pub fn reciprocal_param(s: Slope, base: i64) -> Option<i64> {
    if s.is_inf() {
        return None;
    }
    let (p, q) = s.pair();
    match p.checked_sub(base.checked_mul(q)?)? {
        1 => Some(q),
        -1 => Some(-q),
        _ => None,
    }
}

pub fn is_large_exceptional(d: &DataFile, s: Slope) -> bool {
    d.large_exceptional.contains(&s)
}

/// Tries the pattern with `(first, second)` in that order. Returns the
/// parameter bindings on a match.
fn match_pattern(pat: &RulePattern, first: Slope, second: Slope) -> Option<BTreeMap<char, i64>> {
    let (r, s) = first.pair();
    let (t, u) = second.pair();
    let mut vars = BTreeMap::from([('r', r), ('s', s), ('t', t), ('u', u)]);
    match *pat {
        RulePattern::Any | RulePattern::Otherwise => {}
        RulePattern::IntegerAndShift { offset } => {
            if !first.is_integer() {
                return None;
            }
            let m = reciprocal_param(second, offset.checked_sub(r)?)?;
            vars.insert('n', r);
            vars.insert('m', m);
        }
        RulePattern::OneInteger => {
            if !first.is_integer() {
                return None;
            }
        }
        RulePattern::IntegerPair { sum } => {
            if !first.is_integer() || !second.is_integer() || r.checked_add(t)? != sum {
                return None;
            }
            vars.insert('n', r);
        }
        RulePattern::OneReciprocal { base } => {
            vars.insert('n', reciprocal_param(first, base)?);
        }
        RulePattern::BothReciprocal { base } => {
            vars.insert('n', reciprocal_param(first, base)?);
            vars.insert('m', reciprocal_param(second, base)?);
        }
        RulePattern::ExactlyOneReciprocal { base } => {
            let n = reciprocal_param(first, base)?;
            if reciprocal_param(second, base).is_some() {
                return None;
            }
            vars.insert('n', n);
        }
        RulePattern::NoReciprocal { base } => {
            if reciprocal_param(first, base).is_some() || reciprocal_param(second, base).is_some() {
                return None;
            }
        }
    }
    Some(vars)
}

/// Explicit formulas hold on every instruction; catch-all conclusions are
/// withheld on large-exceptional instructions.
fn is_explicit(p: &RulePattern) -> bool {
    matches!(
        p,
        RulePattern::Any
            | RulePattern::IntegerAndShift { .. }
            | RulePattern::IntegerPair { .. }
            | RulePattern::OneReciprocal { .. }
            | RulePattern::BothReciprocal { .. }
    )
}

fn outcome(rule: &SlopeRule, vars: BTreeMap<char, i64>) -> Result<RuleOutcome, RuleError> {
    let wide: BTreeMap<char, i128> = vars.iter().map(|(k, v)| (*k, *v as i128)).collect();
    let order = match &rule.order {
        Some(o) => Some(o.parse::<Poly>()?.eval(&wide)?),
        None => None,
    };
    let form = match (order, &rule.q) {
        (Some(0), _) => Some(ClosedManifoldForm::S2xS1),
        (Some(1) | Some(-1), _) => Some(ClosedManifoldForm::S3),
        (Some(p), Some(q)) => {
            let q = q.parse::<Poly>()?.eval(&wide)?;
            let fit = |x: i128| i64::try_from(x).map_err(|_| PolyError::Overflow);
            Some(lens_normalize(fit(p)?, fit(q)?)?)
        }
        _ => None,
    };
    let result_type = match order {
        Some(1) | Some(-1) => ExceptionalType::SH,
        _ => rule.result_type,
    };
    let params = vars.into_iter().filter(|(k, _)| matches!(k, 'n' | 'm')).collect();
    Ok(RuleOutcome {
        slope: rule.slope,
        result_type,
        order: order.map(|o| o.unsigned_abs()),
        form,
        params,
        provenance: rule.provenance.clone(),
    })
}

/// Applies the first matching rule for `slope` to `N(a, b)`, trying both
/// slot orders.
pub fn n_fill_rule_with(d: &DataFile, slope: Slope, a: Slope, b: Slope) -> Result<Option<RuleOutcome>, RuleError> {
    let rules: Vec<&SlopeRule> = d.rules.iter().filter(|r| r.slope == slope).collect();
    if rules.is_empty() {
        return Err(RuleError::NotRuleSlope(slope));
    }
    let flagged = ChainLink::N.flagged_slopes();
    if flagged.contains(&a) || flagged.contains(&b) {
        return Err(RuleError::Flagged(a, b));
    }
    let guarded = is_large_exceptional(d, a) || is_large_exceptional(d, b);
    for rule in rules {
        for (x, y) in [(a, b), (b, a)] {
            if let Some(vars) = match_pattern(&rule.pattern, x, y) {
                if guarded && !is_explicit(&rule.pattern) {
                    return Err(RuleError::Guard(a, b));
                }
                return outcome(rule, vars).map(Some);
            }
        }
    }
    Ok(None)
}

pub fn n_fill_rule(slope: Slope, a: Slope, b: Slope) -> Result<Option<RuleOutcome>, RuleError> {
    n_fill_rule_with(data(), slope, a, b)
}

/// `N(r/s, t/u)(∞) = L(tr − us, ⋆)`. The order is exact; `q` is read from
/// the closed evaluator when it agrees on the order, else reported as 1.
pub fn n_fill_infty(a: Slope, b: Slope) -> ClosedManifoldForm {
    let (r, s) = a.pair();
    let (t, u) = b.pair();
    let p = t as i128 * r as i128 - u as i128 * s as i128;
    let Ok(p) = i64::try_from(p) else {
        return ClosedManifoldForm::Unrecognized(format!("L({p},*)"));
    };
    let f = FillingInstruction { link: ChainLink::N, slots: vec![Some(a), Some(b), Some(Slope::INF)] };
    if let Ok(e) = evaluate_closed(&f) {
        if crate::seifert::lens_order(&e.form) == Some(p.abs()) {
            return e.form;
        }
    }
    lens_normalize(p, 1).unwrap_or_else(|e| ClosedManifoldForm::Unrecognized(e.to_string()))
}

// ---------------------------------------------------------------------------
// family tables

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TruthError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("n = {n} is outside the range of family {family}{}", remark.as_ref().map(|r| format!(": {r}")).unwrap_or_default())]
    OutOfRange { family: String, n: i64, remark: Option<String> },
    #[error("family {family} has no row at slope {slope}")]
    NoRow { family: String, slope: Slope },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Seifert(#[from] SeifertError),
    #[error(transparent)]
    Slope(#[from] SlopeError),
}

/// Canonical family identifiers.
pub const FAMILIES: [&str; 6] = ["A", "isolated", "B", "C", "Bprime", "Cprime"];

pub fn family(id: &str) -> Result<&'static FamilyData, TruthError> {
    data().family(id).ok_or_else(|| TruthError::UnknownFamily(id.to_string()))
}

/// The family whose exterior and table rows `id` uses (`Bprime` → `B`).
pub fn base_family(id: &str) -> Result<&'static FamilyData, TruthError> {
    let f = family(id)?;
    match &f.exterior_of {
        Some(base) => family(base),
        None => Ok(f),
    }
}

pub fn is_parametric(f: &FamilyData) -> bool {
    f.instruction.iter().any(|(p, q)| p.contains('n') || q.contains('n'))
}

pub fn in_range(f: &FamilyData, n: i64) -> bool {
    !is_parametric(f) || (f.min.is_none_or(|m| n >= m) && f.max.is_none_or(|m| n <= m) && !f.excluded.contains(&n))
}

/// Whether the family's exceptional triple exists at `n`. This can be wider
/// than the range of the table rows.
pub fn triple_in_range(id: &str, n: i64) -> Result<bool, TruthError> {
    let fam = family(id)?;
    let base = base_family(id)?;
    if !is_parametric(base) {
        return Ok(true);
    }
    let min = fam.triple_min.or(base.triple_min);
    let excluded = fam.triple_excluded.as_ref().or(base.triple_excluded.as_ref());
    if min.is_none() && excluded.is_none() {
        return Ok(in_range(base, n));
    }
    Ok(min.is_none_or(|m| n >= m) && !excluded.map_or(&base.excluded, |e| e).contains(&n))
}

/// `N(a, b, ·)` for any parameter where the family's triple exists.
pub fn triple_instruction(id: &str, n: i64) -> Result<FillingInstruction, TruthError> {
    if !triple_in_range(id, n)? {
        return Err(TruthError::OutOfRange { family: id.to_string(), n, remark: None });
    }
    let (a, b) = slopes_at(base_family(id)?, n)?;
    Ok(FillingInstruction { link: ChainLink::N, slots: vec![Some(a), Some(b), None] })
}

fn slopes_at(base: &FamilyData, n: i64) -> Result<(Slope, Slope), TruthError> {
    let v = vals(n);
    let mut out = Vec::new();
    for (p, q) in &base.instruction {
        let p = p.parse::<Poly>()?.eval(&v)?;
        let q = q.parse::<Poly>()?.eval(&v)?;
        out.push(Slope::from_i128(p, q)?);
    }
    Ok((out[0], out[1]))
}

fn check_range(id: &str, n: i64) -> Result<&'static FamilyData, TruthError> {
    let base = base_family(id)?;
    if !in_range(base, n) {
        let remark = base.remark.clone().filter(|_| base.excluded.contains(&n) || base.min == Some(n + 1));
        return Err(TruthError::OutOfRange { family: id.to_string(), n, remark });
    }
    Ok(base)
}

fn vals(n: i64) -> BTreeMap<char, i128> {
    BTreeMap::from([('n', n as i128)])
}

/// The two slopes of the family exterior at parameter `n`.
pub fn family_slopes(id: &str, n: i64) -> Result<(Slope, Slope), TruthError> {
    slopes_at(check_range(id, n)?, n)
}

/// `N(a, b, ·)` with the last slot empty.
pub fn family_instruction(id: &str, n: i64) -> Result<FillingInstruction, TruthError> {
    let (a, b) = family_slopes(id, n)?;
    Ok(FillingInstruction { link: ChainLink::N, slots: vec![Some(a), Some(b), None] })
}

pub fn family_row(id: &str, beta: Slope) -> Result<&'static FamilyRow, TruthError> {
    let base = base_family(id)?;
    base.rows.iter().find(|r| r.slope == beta).ok_or_else(|| TruthError::NoRow { family: id.to_string(), slope: beta })
}

fn instantiate(template: &str, n: i64) -> Result<ClosedManifoldForm, TruthError> {
    let text = instantiate_template(template, &vals(n))?;
    Ok(normalize_closed(&parse_raw(&text)?))
}

/// The table entry at `(n, β)`, normalized.
pub fn ground_truth(id: &str, n: i64, beta: Slope) -> Result<ClosedManifoldForm, TruthError> {
    check_range(id, n)?;
    instantiate(&family_row(id, beta)?.form, n)
}

/// The corrected table entry where one is recorded.
pub fn corrected_truth(id: &str, n: i64, beta: Slope) -> Result<Option<ClosedManifoldForm>, TruthError> {
    check_range(id, n)?;
    match &family_row(id, beta)?.corrected {
        Some(t) => Ok(Some(instantiate(t, n)?)),
        None => Ok(None),
    }
}

/// The lens order field of an `L(p, q)` template.
pub fn lens_template_order(template: &str) -> Option<Poly> {
    let body = template.trim().strip_prefix("L(")?.strip_suffix(')')?;
    let mut depth = 0;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return body[..i].parse().ok(),
            _ => {}
        }
    }
    None
}

/// `n'` with `p/q = base + 1/n'` as a polynomial in the family parameter.
fn symbolic_reciprocal(p: &Poly, q: &Poly, base: i64) -> Option<Poly> {
    let diff = p.sub(&q.mul(&Poly::constant(base as i128)));
    if diff == Poly::constant(1) {
        Some(q.clone())
    } else if diff == Poly::constant(-1) {
        Some(q.neg())
    } else {
        None
    }
}

/// The rule order at `β` as a polynomial in `n`, when an explicit lens rule
/// matches the family symbolically.
pub fn symbolic_rule_order(id: &str, beta: Slope) -> Result<Option<(Poly, String)>, TruthError> {
    let base = base_family(id)?;
    let slots: Vec<(Poly, Poly)> =
        base.instruction.iter().map(|(p, q)| Ok((p.parse()?, q.parse()?))).collect::<Result<_, PolyError>>()?;
    for rule in data().rules.iter().filter(|r| r.slope == beta) {
        let Some(order) = &rule.order else { continue };
        let order: Poly = order.parse()?;
        for (x, y) in [(0, 1), (1, 0)] {
            let (r, s) = &slots[x];
            let (t, u) = &slots[y];
            let mut map = BTreeMap::from([('r', r.clone()), ('s', s.clone()), ('t', t.clone()), ('u', u.clone())]);
            let ok = match rule.pattern {
                RulePattern::Any => true,
                RulePattern::OneReciprocal { base } => {
                    symbolic_reciprocal(r, s, base).map(|k| map.insert('n', k)).is_some()
                }
                RulePattern::BothReciprocal { base } => {
                    match (symbolic_reciprocal(r, s, base), symbolic_reciprocal(t, u, base)) {
                        (Some(k1), Some(k2)) => {
                            map.insert('n', k1);
                            map.insert('m', k2);
                            true
                        }
                        _ => false,
                    }
                }
                _ => false,
            };
            if ok {
                // rename the family parameter so it cannot collide with the rule's n
                let fam: BTreeMap<char, Poly> = BTreeMap::from([('n', Poly::var('k'))]);
                let map: BTreeMap<char, Poly> = map.into_iter().map(|(c, p)| (c, p.substitute(&fam))).collect();
                let back = BTreeMap::from([('k', Poly::var('n'))]);
                return Ok(Some((order.substitute(&map).substitute(&back), rule.provenance.clone())));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seifert::classify;

    fn sl(s: &str) -> Slope {
        s.parse().unwrap()
    }

    #[test]
    fn infinity_rule_examples() {
        assert_eq!(n_fill_infty(sl("-5/2"), sl("-1/2")), ClosedManifoldForm::S3);
        assert_eq!(n_fill_infty(sl("-5/2"), sl("-1/3")), ClosedManifoldForm::S3);
        for n in [2, 3, 7, -4] {
            let a = Slope::from_i128(1 - n, n).unwrap();
            let b = Slope::from_i128(-1 - n, n).unwrap();
            assert_eq!(n_fill_infty(a, b), ClosedManifoldForm::S3);
        }
    }

    #[test]
    fn slope_rules() {
        // A_n at -2: n' = -2, order |18 - 49n|
        for n in [-3i64, 1, 4] {
            let b = Slope::from_i128((1 - 2 * n) as i128, (5 * n - 2) as i128).unwrap();
            let out = n_fill_rule(Slope::int(-2), sl("-5/2"), b).unwrap().unwrap();
            assert_eq!(out.order, Some((18 - 49 * n).unsigned_abs() as u128));
            assert_eq!(out.params[&'n'], -2);
        }
        let out = n_fill_rule(Slope::int(-3), sl("-2/3"), sl("-3/4")).unwrap().unwrap();
        assert_eq!(out.result_type, ExceptionalType::TH);
        assert_eq!(out.order, Some(((2 * 3 + 1) * (2 * 4 + 1) - 4) as u128));
        assert_eq!(n_fill_rule(Slope::ZERO, sl("1/3"), sl("5/7")).unwrap(), None);
        assert!(matches!(n_fill_rule(Slope::ZERO, sl("0"), sl("5/7")), Err(RuleError::Flagged(..))));
        assert!(matches!(n_fill_rule(Slope::int(-3), sl("-3/2"), sl("5/7")), Err(RuleError::Guard(..))));
    }

    #[test]
    fn zero_rule_lens_form() {
        // N(n, -4-n+1/m)(0) = L(6m-1, 2m-1) at n = 1, m = 2: N(1, -9/2)
        let out = n_fill_rule(Slope::ZERO, Slope::int(2), sl("-11/2")).unwrap().unwrap();
        assert_eq!(out.form, Some(lens_normalize(11, 3).unwrap()));
    }

    #[test]
    fn ground_truth_examples() {
        assert_eq!(ground_truth("A", 1, Slope::int(-1)).unwrap(), ClosedManifoldForm::Lens { p: 30, q: 19 });
        assert_eq!(ground_truth("B", 3, Slope::int(-3)).unwrap(), ClosedManifoldForm::Lens { p: 39, q: 23 });
        assert_eq!(ground_truth("isolated", 0, Slope::INF).unwrap(), ClosedManifoldForm::Lens { p: 32, q: 23 });
        let e = ground_truth("A", 0, Slope::INF).unwrap_err();
        assert!(e.to_string().contains("(-2,3,7) pretzel knot which has 7 exceptional slopes"));
        let e = ground_truth("B", 2, Slope::INF).unwrap_err();
        assert!(e.to_string().contains("pretzel"));
        assert!(matches!(ground_truth("C", 3, Slope::INF), Err(TruthError::OutOfRange { .. })));
        assert_eq!(classify(&ground_truth("C", 5, Slope::ZERO).unwrap()), ExceptionalType::T);
    }

    #[test]
    fn symbolic_orders_match_lens_rows() {
        let k = |s: &str| s.parse::<Poly>().unwrap();
        let (a2, _) = symbolic_rule_order("A", Slope::int(-2)).unwrap().unwrap();
        assert!(a2.eq_up_to_sign(&k("18-49n")));
        let (a1, _) = symbolic_rule_order("A", Slope::int(-1)).unwrap().unwrap();
        assert!(a1.eq_up_to_sign(&k("49n-19")));
        let (b3, _) = symbolic_rule_order("B", Slope::int(-3)).unwrap().unwrap();
        assert!(b3.eq_up_to_sign(&k("4n^2+3")));
        let (c3, _) = symbolic_rule_order("C", Slope::int(-3)).unwrap().unwrap();
        assert!(c3.eq_up_to_sign(&k("4n^2-8n-1")));
        assert!(!c3.eq_up_to_sign(&k("4n^2+8n-1")));
        assert_eq!(lens_template_order("L(4n^2+3,2n^2+n+2)").unwrap(), k("4n^2+3"));
    }
}
