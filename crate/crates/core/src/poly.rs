//! Integer polynomials in single-letter variables, used for the parametric
//! orders and fibre entries stored with the rule table and family rows.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("cannot parse polynomial {0:?}")]
    Parse(String),
    #[error("variable {0} has no value")]
    Unbound(char),
    #[error("integer overflow evaluating polynomial")]
    Overflow,
}

/// Monomial exponents keyed by variable name.
type Monomial = BTreeMap<char, u32>;

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<(char, u32)>, i128>,
}

impl Poly {
    pub fn constant(c: i128) -> Poly {
        let mut p = Poly::default();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn var(v: char) -> Poly {
        let mut p = Poly::default();
        p.add_term(vec![(v, 1)], 1);
        p
    }

    fn add_term(&mut self, mono: Vec<(char, u32)>, c: i128) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(mono.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&mono);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(m.clone(), *c);
        }
        p
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut p = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut mono: Monomial = m1.iter().copied().collect();
                for (v, e) in m2 {
                    *mono.entry(*v).or_insert(0) += e;
                }
                p.add_term(mono.into_iter().collect(), c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::constant(1), |acc, _| acc.mul(self))
    }

    /// Replaces each variable by a polynomial; unmapped variables stay.
    pub fn substitute(&self, map: &BTreeMap<char, Poly>) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(*c);
            for (v, e) in m {
                let base = map.get(v).cloned().unwrap_or_else(|| Poly::var(*v));
                t = t.mul(&base.pow(*e));
            }
            out = out.add(&t);
        }
        out
    }

    pub fn eval(&self, vals: &BTreeMap<char, i128>) -> Result<i128, PolyError> {
        let mut acc: i128 = 0;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (v, e) in m {
                let x = *vals.get(v).ok_or(PolyError::Unbound(*v))?;
                let p = x.checked_pow(*e).ok_or(PolyError::Overflow)?;
                t = t.checked_mul(p).ok_or(PolyError::Overflow)?;
            }
            acc = acc.checked_add(t).ok_or(PolyError::Overflow)?;
        }
        Ok(acc)
    }

    pub fn eval1(&self, v: char, x: i128) -> Result<i128, PolyError> {
        self.eval(&BTreeMap::from([(v, x)]))
    }

    pub fn variables(&self) -> Vec<char> {
        let mut vs: Vec<char> = self.terms.keys().flat_map(|m| m.iter().map(|(v, _)| *v)).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Equality up to an overall sign, the natural comparison for orders.
    pub fn eq_up_to_sign(&self, o: &Poly) -> bool {
        self == o || *self == o.neg()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let (sign, mag) = if *c < 0 { ("-", -c) } else { ("+", *c) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{sign}")?;
            }
            first = false;
            if mag != 1 || m.is_empty() {
                write!(f, "{mag}")?;
            }
            for (v, e) in m {
                if *e == 1 {
                    write!(f, "{v}")?;
                } else {
                    write!(f, "{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self) -> PolyError {
        PolyError::Parse(self.text.to_string())
    }

    fn peek(&mut self) -> Option<u8> {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
        self.s.get(self.i).copied()
    }

    fn expr(&mut self) -> Result<Poly, PolyError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.i += 1;
                self.term()?.neg()
            }
            Some(b'+') => {
                self.i += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.i += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.i += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.i += 1;
                    acc = acc.mul(&self.power()?);
                }
                // implicit product: 4n, 2(t+3u), n(n+1)
                Some(c) if c.is_ascii_alphanumeric() || c == b'(' => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Poly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            let start = self.i;
            while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                self.i += 1;
            }
            let e: u32 = std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().map_err(|_| self.err())?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let p = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err());
                }
                self.i += 1;
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.i;
                while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                    self.i += 1;
                }
                let v: i128 = std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().map_err(|_| self.err())?;
                Ok(Poly::constant(v))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                self.i += 1;
                Ok(Poly::var(c as char))
            }
            _ => Err(self.err()),
        }
    }
}

impl std::str::FromStr for Poly {
    type Err = PolyError;

    fn from_str(text: &str) -> Result<Poly, PolyError> {
        let norm = text.replace('−', "-");
        let mut p = Parser { s: norm.as_bytes(), i: 0, text };
        let out = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err());
        }
        Ok(out)
    }
}

/// Substitutes `n` into every arithmetic field of a manifold template such as
/// `D(2,1)(3n-1,5n-2) u[[0,1],[1,0]] D(2,1)(3,-2)`, leaving the surrounding
/// notation untouched.
pub fn instantiate_template(template: &str, vals: &BTreeMap<char, i128>) -> Result<String, PolyError> {
    let mut out = String::new();
    let mut field = String::new();
    let flush = |field: &mut String, out: &mut String| -> Result<(), PolyError> {
        let t = field.trim();
        let numeric = !t.is_empty()
            && t.chars().all(|c| c.is_ascii_alphanumeric() || "+-−*^ ".contains(c))
            && t.chars().any(|c| c.is_ascii_digit() || vals.contains_key(&c))
            && t.chars().filter(|c| c.is_ascii_alphabetic()).all(|c| vals.contains_key(&c));
        if numeric {
            let p: Poly = t.parse()?;
            out.push_str(&p.eval(vals)?.to_string());
        } else {
            out.push_str(field);
        }
        field.clear();
        Ok(())
    };
    for ch in template.chars() {
        if "(),[]#".contains(ch) {
            flush(&mut field, &mut out)?;
            out.push(ch);
        } else {
            field.push(ch);
        }
    }
    flush(&mut field, &mut out)?;
    Ok(out)
}
