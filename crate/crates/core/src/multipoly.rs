//! Exact multivariate polynomials over the rationals.
//!
//! This is the workhorse behind the invariant generator lists, the
//! rewrite of symmetric polynomials in elementary symmetric generators, and
//! the pulled-back gram matrices used for image membership. Coefficients
//! stay rational throughout; evaluation promotes to `Scalar` so callers can
//! plug in balls.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textio::rat_to_string;

#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    pub nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: BigRational, nvars: usize) -> Self {
        let mut p = MultiPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        MultiPoly::constant(BigRational::one(), nvars)
    }

    pub fn var(j: usize, nvars: usize) -> Self {
        assert!(j < nvars);
        let mut e = vec![0; nvars];
        e[j] = 1;
        let mut p = MultiPoly::zero(nvars);
        p.terms.insert(e, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        assert_eq!(e.len(), self.nvars);
        let cur = self.terms.remove(&e).unwrap_or_else(BigRational::zero);
        let s = cur + c;
        if !s.is_zero() {
            self.terms.insert(e, s);
        }
    }

    pub fn add(&self, o: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, o: &MultiPoly) -> MultiPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
        }
    }

    pub fn mul(&self, o: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut out = MultiPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, j: usize) -> MultiPoly {
        assert!(j < self.nvars);
        let mut out = MultiPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[j] -= 1;
            out.add_term(e2, c * BigRational::from_integer(e[j].into()));
        }
        out
    }

    pub fn eval_rat(&self, pt: &[BigRational]) -> BigRational {
        assert_eq!(pt.len(), self.nvars);
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (j, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term *= &pt[j];
                }
            }
            acc += term;
        }
        acc
    }

    pub fn eval_scalar(&self, pt: &[Scalar]) -> Scalar {
        assert_eq!(pt.len(), self.nvars);
        let mut acc = Scalar::zero();
        for (e, c) in &self.terms {
            let mut term = Scalar::from_rational(c.clone());
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&pt[j].pow(k));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Evaluate on series arguments (all sharing a variable count).
    pub fn eval_series(&self, pt: &[crate::series::Series]) -> crate::series::Series {
        assert_eq!(pt.len(), self.nvars);
        assert!(!pt.is_empty());
        let nv = pt[0].nvars;
        let mut acc = crate::series::Series::zero(nv);
        for (e, c) in &self.terms {
            let mut term =
                crate::series::Series::constant(Scalar::from_rational(c.clone()), nv);
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&pt[j].pow(k));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Stretch every exponent by an integer factor: p(x) -> p with x_j^k
    /// replaced by x_j^(s k), i.e. the composition with x_j -> x_j^s read
    /// off at the exponent level.
    pub fn stretch_exponents(&self, s: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().map(|k| k * s).collect(), c.clone()))
                .collect(),
        }
    }

    /// Lex-leading term, if any.
    pub fn lex_leading(&self) -> Option<(Vec<u32>, BigRational)> {
        self.terms
            .iter()
            .next_back()
            .map(|(e, c)| (e.clone(), c.clone()))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn to_string_with(&self, names: &[&str]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        // Highest lex term first reads like handwritten polynomials.
        for (e, c) in self.terms.iter().rev() {
            let mut vars = String::new();
            for (j, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !vars.is_empty() {
                    vars.push('*');
                }
                vars.push_str(names[j]);
                if k > 1 {
                    vars.push_str(&format!("^{}", k));
                }
            }
            let neg = c.is_negative();
            let mag = c.abs();
            let cs = if mag.is_one() && !vars.is_empty() {
                String::new()
            } else {
                rat_to_string(&mag)
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            match (cs.is_empty(), vars.is_empty()) {
                (true, true) => out.push('1'),
                (true, false) => out.push_str(&vars),
                (false, true) => out.push_str(&cs),
                (false, false) => {
                    out.push_str(&cs);
                    out.push('*');
                    out.push_str(&vars);
                }
            }
        }
        out
    }
}

/// Elementary symmetric polynomial e_j in n variables (e_0 = 1).
pub fn elementary_symmetric(n: usize, j: usize) -> MultiPoly {
    assert!(j <= n);
    // Build by the recurrence over prefixes: e_j(x1..xk) =
    // e_j(x1..x(k-1)) + x_k e_(j-1)(x1..x(k-1)).
    let mut rows: Vec<MultiPoly> = Vec::with_capacity(j + 1);
    rows.push(MultiPoly::one(n));
    for _ in 1..=j {
        rows.push(MultiPoly::zero(n));
    }
    for k in 0..n {
        let xk = MultiPoly::var(k, n);
        for d in (1..=j).rev() {
            let bump = rows[d - 1].mul(&xk);
            rows[d] = rows[d].add(&bump);
        }
    }
    rows.pop().unwrap()
}

/// Power sum p_k in n variables (p_0 = n).
pub fn power_sum(n: usize, k: u32) -> MultiPoly {
    if k == 0 {
        return MultiPoly::constant(BigRational::from_integer(n.into()), n);
    }
    let mut out = MultiPoly::zero(n);
    for j in 0..n {
        out.add_term(
            {
                let mut e = vec![0; n];
                e[j] = k;
                e
            },
            BigRational::one(),
        );
    }
    out
}

/// Rewrite a symmetric polynomial as a polynomial in the elementary
/// symmetric generators: the result's variable j stands for e_(j+1).
/// Errors when the input is not symmetric.
pub fn symmetric_reduce(p: &MultiPoly) -> Result<MultiPoly> {
    let n = p.nvars;
    let e: Vec<MultiPoly> = (1..=n).map(|j| elementary_symmetric(n, j)).collect();
    let mut rem = p.clone();
    let mut out = MultiPoly::zero(n);
    let mut steps = 0usize;
    while let Some((lead_e, lead_c)) = rem.lex_leading() {
        steps += 1;
        if steps > 100_000 {
            return Err(Error::BudgetExceeded {
                stage: "symmetric reduction".into(),
                detail: format!("{} elimination steps", steps),
            });
        }
        if lead_e.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Input(format!(
                "polynomial is not symmetric: leading exponent {:?} is not sorted",
                lead_e
            )));
        }
        let mut z_expo = vec![0u32; n];
        for i in 0..n {
            let next = if i + 1 < n { lead_e[i + 1] } else { 0 };
            z_expo[i] = lead_e[i] - next;
        }
        out.add_term(z_expo.clone(), lead_c.clone());
        let mut prod = MultiPoly::constant(lead_c, n);
        for i in 0..n {
            if z_expo[i] > 0 {
                prod = prod.mul(&e[i].pow(z_expo[i]));
            }
        }
        rem = rem.sub(&prod);
    }
    Ok(out)
}

/// e_1..e_n as polynomials in (p_2, ..., p_n) under the trace-zero relation
/// p_1 = 0. Variable j of the output stands for p_(j+2).
pub fn elementary_in_power_sums_trace_zero(n: usize) -> Vec<MultiPoly> {
    assert!(n >= 2);
    let nv = n - 1;
    let p = |i: usize| -> MultiPoly {
        // p_1 = 0; p_i = z_(i-2) for 2 <= i <= n.
        if i == 1 {
            MultiPoly::zero(nv)
        } else {
            MultiPoly::var(i - 2, nv)
        }
    };
    let mut e: Vec<MultiPoly> = vec![MultiPoly::one(nv)];
    for k in 1..=n {
        // k e_k = sum_{i=1..k} (-1)^(i-1) e_(k-i) p_i
        let mut acc = MultiPoly::zero(nv);
        for i in 1..=k {
            let term = e[k - i].mul(&p(i));
            acc = if i % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
        }
        let inv_k = BigRational::new(1.into(), (k as i64).into());
        e.push(acc.scale(&inv_k));
    }
    e.remove(0);
    e
}

/// p_m as a polynomial in (p_2, ..., p_n) under p_1 = 0, valid for any m
/// via the characteristic recurrence p_m = sum (-1)^(i+1) e_i p_(m-i).
pub fn power_sum_in_power_sums_trace_zero(n: usize, m: usize) -> MultiPoly {
    assert!(n >= 2);
    let nv = n - 1;
    let e = elementary_in_power_sums_trace_zero(n);
    let mut p: Vec<MultiPoly> = Vec::with_capacity(m + 1);
    p.push(MultiPoly::constant(BigRational::from_integer(n.into()), nv));
    for k in 1..=m {
        let pk = if k == 1 {
            MultiPoly::zero(nv)
        } else if k <= n {
            MultiPoly::var(k - 2, nv)
        } else {
            let mut acc = MultiPoly::zero(nv);
            for i in 1..=n {
                let term = e[i - 1].mul(&p[k - i]);
                acc = if i % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        };
        p.push(pk);
    }
    p.pop().unwrap()
}

/// Determinant by cofactor expansion; fine for the small matrices here.
pub fn det(mat: &[Vec<MultiPoly>]) -> MultiPoly {
    let n = mat.len();
    assert!(n > 0);
    let nv = mat[0][0].nvars;
    if n == 1 {
        return mat[0][0].clone();
    }
    let mut acc = MultiPoly::zero(nv);
    for j in 0..n {
        if mat[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly>> = mat[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let cof = mat[0][j].mul(&det(&minor));
        acc = if j % 2 == 0 { acc.add(&cof) } else { acc.sub(&cof) };
    }
    acc
}
