//! Integer helpers shared by the exact kernels.

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Returns `(g, x, y)` with `a·x + b·y = g = gcd(a, b) ≥ 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i128, 0i128);
    let (mut y0, mut y1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Inverse of `a` modulo `m > 1`, if it exists.
pub fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// Prime factorisation of `|n|` as `(prime, exponent)` pairs, `n ≠ 0`.
pub fn factorize(n: i128) -> Vec<(i128, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Positive divisors of `|n|`, sorted, `n ≠ 0`.
pub fn divisors(n: i128) -> Vec<i128> {
    let mut ds = vec![1i128];
    for (p, e) in factorize(n) {
        let mut next = Vec::new();
        for d in &ds {
            let mut pk = 1;
            for _ in 0..=e {
                next.push(d * pk);
                pk *= p;
            }
        }
        ds = next;
    }
    ds.sort_unstable();
    ds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_gcd_identity() {
        for (a, b) in [(5, 2), (8, 13), (-12, 18), (0, -7), (7, 0)] {
            let (g, x, y) = ext_gcd(a, b);
            assert_eq!(a * x + b * y, g);
            assert_eq!(g, gcd(a, b));
        }
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(-8), vec![1, 2, 4, 8]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(mod_inverse(19, 31), Some(18));
        assert_eq!(mod_inverse(2, 4), None);
    }
}
