//! Certified solvers for the small Diophantine equations met when matching
//! rule patterns, each paired with an exhaustive scan.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{divisors, ext_gcd, factorize, gcd};

/// Largest box half-width accepted by [`brute_force`].
pub const MAX_BOUND: i64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiophantineError {
    #[error("alpha = 0 or beta = 0 gives an infinite family")]
    Degenerate,
    #[error("{a}t + {b}u = {c} has no integer solution: gcd {g} does not divide {c}")]
    Unsolvable { a: i64, b: i64, c: i64, g: i64 },
    #[error("bound {0} exceeds the maximum {MAX_BOUND}")]
    BoundTooLarge(i64),
    #[error("a = b = 0")]
    ZeroCoefficients,
}

/// The argument establishing completeness of a solution set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub method: String,
    /// Every solution satisfies `|x|, |y| ≤ bound`.
    pub bound: i64,
    pub steps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    pub equation: String,
    /// Sorted pairs, `(n, s)` for bilinear equations and `(n, m)` for the
    /// quadratic one.
    pub solutions: Vec<(i64, i64)>,
    pub certificate: Certificate,
}

impl SolutionSet {
    /// Checks that the certified bound contains every solution.
    pub fn replay(&self) -> bool {
        self.solutions.iter().all(|(x, y)| x.abs() <= self.certificate.bound && y.abs() <= self.certificate.bound)
    }
}

/// `αs − n = βns`
pub fn bilinear_holds(alpha: i64, beta: i64, n: i64, s: i64) -> bool {
    alpha * s - n == beta * n * s
}

/// Solves `αs − n = βns`.
///
/// The equation reads `n(1 + βs) = αs`, and `gcd(s, 1 + βs) = 1`, so
/// `1 + βs` divides `α`. Each signed divisor `d` of `α` gives at most one
/// solution `s = (d − 1)/β`, `n = αs/d`.
pub fn solve_bilinear(alpha: i64, beta: i64) -> Result<SolutionSet, DiophantineError> {
    if alpha == 0 || beta == 0 {
        return Err(DiophantineError::Degenerate);
    }
    let (a, b) = (alpha as i128, beta as i128);
    let primes: Vec<String> = factorize(a).iter().map(|(p, e)| format!("{p}^{e}")).collect();
    let mut steps = vec![
        "n(1 + beta s) = alpha s and gcd(s, 1 + beta s) = 1, so (1 + beta s) | alpha".to_string(),
        format!("|alpha| = {} = {}", a.abs(), if primes.is_empty() { "1".to_string() } else { primes.join("·") }),
    ];
    let mut solutions = Vec::new();
    let mut bound = 0i64;
    for d in divisors(a).into_iter().flat_map(|d| [d, -d]) {
        if (d - 1) % b != 0 {
            steps.push(format!("1 + beta s = {d}: s not integral"));
            continue;
        }
        let s = (d - 1) / b;
        let n = a * s / d;
        steps.push(format!("1 + beta s = {d}: (n, s) = ({n}, {s})"));
        let (n, s) = (n as i64, s as i64);
        bound = bound.max(n.abs()).max(s.abs());
        solutions.push((n, s));
    }
    solutions.sort_unstable();
    solutions.dedup();
    Ok(SolutionSet {
        equation: format!("{alpha}s - n = {beta}ns"),
        solutions,
        certificate: Certificate { method: "divisors of alpha".to_string(), bound, steps },
    })
}

/// `(1 − m(n + 4))n = m ± 1`
pub fn quad_holds(n: i64, m: i64) -> bool {
    let lhs = (1 - m * (n + 4)) * n;
    lhs == m + 1 || lhs == m - 1
}

/// Solves `(1 − m(n + 4))n = m ± 1`, that is `m(n² + 4n + 1) = n ∓ 1`.
///
/// Either `m = 0` and `n = ±1`, or `|n² + 4n + 1| ≤ |n| + 1`, which fails
/// for `n ≥ 1` (`n² + 3n > 0`) and for `n ≤ −6` (`n(n + 5) > 0`).
pub fn solve_quad() -> SolutionSet {
    let mut steps = vec![
        "m(n^2 + 4n + 1) = n - 1 or n + 1; n^2 + 4n + 1 has no integer root".to_string(),
        "m = 0: n = 1 or n = -1".to_string(),
        "m != 0: |n^2 + 4n + 1| <= |n| + 1 forces -5 <= n <= 0".to_string(),
    ];
    let mut solutions = vec![(1, 0), (-1, 0)];
    for n in -5i64..=0 {
        let d = n * n + 4 * n + 1;
        for target in [n - 1, n + 1] {
            if target != 0 && target % d == 0 {
                let m = target / d;
                steps.push(format!("n = {n}: m = {target}/{d} = {m}"));
                solutions.push((n, m));
            }
        }
    }
    solutions.retain(|&(n, m)| quad_holds(n, m));
    solutions.sort_unstable();
    solutions.dedup();
    let bound = solutions.iter().map(|(n, m)| n.abs().max(m.abs())).max().unwrap_or(0);
    SolutionSet {
        equation: "(1 - m(n + 4))n = m +- 1".to_string(),
        solutions,
        certificate: Certificate { method: "size bound on n^2 + 4n + 1".to_string(), bound, steps },
    }
}

/// Every pair in `[−bound, bound]²` satisfying `pred`, in lexicographic order.
pub fn brute_force<P>(pred: P, bound: i64) -> Result<Vec<(i64, i64)>, DiophantineError>
where
    P: Fn(i64, i64) -> bool + Sync,
{
    if !(0..=MAX_BOUND).contains(&bound) {
        return Err(DiophantineError::BoundTooLarge(bound));
    }
    let rows: Vec<Vec<(i64, i64)>> = (-bound..=bound)
        .into_par_iter()
        .map(|x| (-bound..=bound).filter(|&y| pred(x, y)).map(|y| (x, y)).collect())
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// `t = t0 + k·dt`, `u = u0 + k·du`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LinearFamily {
    pub base: (i64, i64),
    pub step: (i64, i64),
}

impl LinearFamily {
    pub fn at(&self, k: i64) -> (i64, i64) {
        (self.base.0 + k * self.step.0, self.base.1 + k * self.step.1)
    }

    /// The same family with `k ↦ sign·k + shift`.
    pub fn reindex(&self, shift: i64, flip: bool) -> LinearFamily {
        let sign = if flip { -1 } else { 1 };
        LinearFamily { base: self.at(shift), step: (sign * self.step.0, sign * self.step.1) }
    }
}

/// Solution of `at + bu = c` and the reindexing applied to the raw
/// extended-gcd family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearSolution {
    pub equation: String,
    pub family: LinearFamily,
    pub raw: LinearFamily,
    /// `k_raw = sign·k + shift`
    pub shift: i64,
    pub flip: bool,
}

/// Solves `at + bu = c`. The base point has minimal `|t| + |u|` and the step
/// moves `t` towards the opposite sign of `t0` (upwards when `t0 = 0`).
pub fn solve_linear(a: i64, b: i64, c: i64) -> Result<LinearSolution, DiophantineError> {
    if a == 0 && b == 0 {
        return Err(DiophantineError::ZeroCoefficients);
    }
    let g = gcd(a as i128, b as i128) as i64;
    if c % g != 0 {
        return Err(DiophantineError::Unsolvable { a, b, c, g });
    }
    let (_, x, y) = ext_gcd(a as i128, b as i128);
    let raw = LinearFamily { base: ((x as i64) * (c / g), (y as i64) * (c / g)), step: (b / g, -a / g) };
    let l1 = |k: i64| {
        let (t, u) = raw.at(k);
        t.abs() + u.abs()
    };
    // |t| + |u| is convex in k; walk downhill from the raw base.
    let mut k = 0i64;
    while l1(k - 1) < l1(k) {
        k -= 1;
    }
    while l1(k + 1) < l1(k) {
        k += 1;
    }
    let t0 = raw.at(k).0;
    let flip = if t0 == 0 { raw.step.0 < 0 } else { raw.step.0.signum() == t0.signum() };
    let family = raw.reindex(k, flip);
    Ok(LinearSolution { equation: format!("{a}t + {b}u = {c}"), family, raw, shift: k, flip })
}

/// `(α, β)` with its solution set.
pub type BilinearFixture = ((i64, i64), Vec<(i64, i64)>);

/// The rows `(α, β)` of the bilinear table used as regression fixtures,
/// with their solution sets.
pub fn bilinear_fixtures() -> Vec<BilinearFixture> {
    vec![
        ((1, 1), vec![(0, 0), (2, -2)]),
        ((2, 1), vec![(0, 0), (1, 1), (3, -3), (4, -2)]),
        ((4, 1), vec![(0, 0), (3, 3), (5, -5), (8, -2), (6, -3), (2, 1)]),
        ((1, 3), vec![(0, 0)]),
        ((2, 3), vec![(0, 0), (1, -1)]),
        ((4, 3), vec![(0, 0), (1, 1), (2, -1)]),
        ((8, 3), vec![(0, 0), (3, -3), (2, 1), (4, -1)]),
        ((5, 3), vec![(0, 0), (2, -2)]),
        ((1, -5), vec![(0, 0)]),
        ((2, -5), vec![(0, 0)]),
        ((4, -5), vec![(0, 0), (-1, 1)]),
        ((8, -5), vec![(0, 0), (-2, 1)]),
        ((3, -5), vec![(0, 0)]),
    ]
}

/// The eleven `(n, m)` pairs solving the quadratic equation.
pub fn quad_fixture() -> Vec<(i64, i64)> {
    vec![(-5, -1), (-4, -3), (-4, -5), (-3, 1), (-3, 2), (-2, 1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
        v.sort_unstable();
        v
    }

    #[test]
    fn bilinear_rows() {
        for ((a, b), want) in bilinear_fixtures() {
            let got = solve_bilinear(a, b).unwrap();
            assert_eq!(got.solutions, sorted(want), "{a},{b}");
            assert!(got.replay());
            for (n, s) in &got.solutions {
                assert!(bilinear_holds(a, b, *n, *s));
            }
        }
        assert_eq!(solve_bilinear(0, 3), Err(DiophantineError::Degenerate));
    }

    #[test]
    fn quad_set() {
        let q = solve_quad();
        assert_eq!(q.solutions, sorted(quad_fixture()));
        assert!(q.replay());
        assert!(quad_holds(0, 1));
    }

    #[test]
    fn small_brute_force() {
        assert_eq!(brute_force(|n, s| bilinear_holds(1, 1, n, s), 100).unwrap(), vec![(0, 0), (2, -2)]);
        assert!(brute_force(|_, _| false, 50).unwrap().is_empty());
        assert_eq!(brute_force(quad_holds, 1000).unwrap(), sorted(quad_fixture()));
        assert!(brute_force(|_, _| true, MAX_BOUND + 1).is_err());
    }

    #[test]
    fn linear_families() {
        let f = solve_linear(5, 2, 1).unwrap().family;
        assert_eq!(f, LinearFamily { base: (1, -2), step: (-2, 5) });
        let f = solve_linear(8, 13, -1).unwrap().family;
        assert_eq!(f, LinearFamily { base: (-5, 3), step: (13, -8) });
        assert!(matches!(solve_linear(2, 4, 1), Err(DiophantineError::Unsolvable { .. })));
        for (a, b, c) in [(5, 2, 1), (8, 13, -1), (6, 10, 4), (0, 3, 9), (7, 0, -14)] {
            let s = solve_linear(a, b, c).unwrap();
            for k in -5..=5 {
                let (t, u) = s.family.at(k);
                assert_eq!(a * t + b * u, c);
                let raw_k = if s.flip { -k } else { k } + s.shift;
                assert_eq!(s.raw.at(raw_k), (t, u));
            }
        }
    }
}
