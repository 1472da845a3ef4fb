//! Truncated power series in one or two real variables with exact or ball
//! coefficients.
//!
//! `trunc = None` marks an exact polynomial: every coefficient is stored and
//! there is no hidden tail. `trunc = Some(N)` means the stored coefficients
//! of total degree < N are enclosures of the true ones and nothing is known
//! from degree N on. Operations propagate the truncation conservatively:
//! plain multiplication truncates at the minimum of the input orders, while
//! monomial multiplication shifts the valid order up and coordinate division
//! shifts it down, which is what the lifting recursion needs to balance its
//! truncation budget.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent tuple; the second entry is 0 for one-variable series.
pub type Expo = [u32; 2];

pub fn expo_total(e: &Expo) -> u32 {
    e[0] + e[1]
}

/// Verdict of the componentwise partial order on exponent tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpoCmp {
    Leq,
    Geq,
    Both,
    Incomparable,
}

pub fn monomial_order_compare(a: &Expo, b: &Expo) -> ExpoCmp {
    let le = a[0] <= b[0] && a[1] <= b[1];
    let ge = a[0] >= b[0] && a[1] >= b[1];
    match (le, ge) {
        (true, true) => ExpoCmp::Both,
        (true, false) => ExpoCmp::Leq,
        (false, true) => ExpoCmp::Geq,
        (false, false) => ExpoCmp::Incomparable,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub nvars: u8,
    /// None: exact polynomial. Some(n): coefficients valid below total degree n.
    pub trunc: Option<u32>,
    coeffs: BTreeMap<Expo, Scalar>,
}

impl Series {
    pub fn zero(nvars: u8) -> Self {
        Series {
            nvars,
            trunc: None,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn zero_truncated(nvars: u8, trunc: u32) -> Self {
        Series {
            nvars,
            trunc: Some(trunc),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar, nvars: u8) -> Self {
        let mut s = Series::zero(nvars);
        s.set_coeff([0, 0], c);
        s
    }

    pub fn one(nvars: u8) -> Self {
        Series::constant(Scalar::one(), nvars)
    }

    /// The coordinate x_j (j zero-based).
    pub fn var(j: usize, nvars: u8) -> Self {
        assert!(j < nvars as usize);
        let mut e = [0, 0];
        e[j] = 1;
        let mut s = Series::zero(nvars);
        s.set_coeff(e, Scalar::one());
        s
    }

    pub fn monomial(c: Scalar, e: Expo, nvars: u8) -> Self {
        let mut s = Series::zero(nvars);
        s.set_coeff(e, c);
        s
    }

    pub fn from_coeffs(
        nvars: u8,
        trunc: Option<u32>,
        coeffs: impl IntoIterator<Item = (Expo, Scalar)>,
    ) -> Self {
        let mut s = Series {
            nvars,
            trunc,
            coeffs: BTreeMap::new(),
        };
        for (e, c) in coeffs {
            let cur = s.coeffs.remove(&e).unwrap_or_else(Scalar::zero);
            s.coeffs.insert(e, cur.add(&c));
        }
        s.canonicalize();
        s
    }

    pub fn coeff(&self, e: &Expo) -> Scalar {
        self.coeffs.get(e).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn set_coeff(&mut self, e: Expo, c: Scalar) {
        if c.is_zero_exact() {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, c);
        }
        self.enforce_trunc();
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &Scalar)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_polynomial(&self) -> bool {
        self.trunc.is_none()
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.values().all(|c| c.is_exact())
    }

    fn canonicalize(&mut self) {
        self.coeffs.retain(|_, c| !c.is_zero_exact());
        self.enforce_trunc();
    }

    fn enforce_trunc(&mut self) {
        if let Some(n) = self.trunc {
            self.coeffs.retain(|e, _| expo_total(e) < n);
        }
    }

    /// Tighten the truncation order to `trunc` (None leaves it alone) and
    /// drop the terms that fall outside.
    pub fn truncate(&mut self, trunc: Option<u32>) {
        self.trunc = Series::min_trunc(self.trunc, trunc);
        self.enforce_trunc();
    }

    /// Some(true): certainly the zero function. Some(false): certainly not.
    /// None: zero to truncation or within ball radii, undecidable.
    pub fn is_zero(&self) -> Option<bool> {
        let mut indeterminate = false;
        for c in self.coeffs.values() {
            match c.nonzero_certified() {
                Some(true) => return Some(false),
                Some(false) => {}
                None => indeterminate = true,
            }
        }
        if indeterminate || self.trunc.is_some() {
            None
        } else {
            Some(true)
        }
    }

    /// Zero test that accepts "zero to truncation" as zero. Only for use
    /// where the caller separately knows the component is polynomial or has
    /// flagged it; the lifter uses `is_zero` and errors on None.
    pub fn is_zero_stored(&self) -> bool {
        self.coeffs
            .values()
            .all(|c| c.nonzero_certified() == Some(false))
    }

    pub fn value_at_zero(&self) -> Scalar {
        self.coeff(&[0, 0])
    }

    /// Minimal total degree over stored, not-certainly-zero terms.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.nonzero_certified() != Some(false))
            .map(|(e, _)| expo_total(e))
            .min()
    }

    fn min_trunc(a: Option<u32>, b: Option<u32>) -> Option<u32> {
        match (a, b) {
            (None, t) | (t, None) => t,
            (Some(x), Some(y)) => Some(x.min(y)),
        }
    }

    pub fn add(&self, o: &Series) -> Series {
        assert_eq!(self.nvars, o.nvars);
        let mut out = Series {
            nvars: self.nvars,
            trunc: Series::min_trunc(self.trunc, o.trunc),
            coeffs: self.coeffs.clone(),
        };
        for (e, c) in &o.coeffs {
            let cur = out.coeffs.remove(e).unwrap_or_else(Scalar::zero);
            let s = cur.add(c);
            if !s.is_zero_exact() {
                out.coeffs.insert(*e, s);
            }
        }
        out.canonicalize();
        out
    }

    pub fn neg(&self) -> Series {
        Series {
            nvars: self.nvars,
            trunc: self.trunc,
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (*e, c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, o: &Series) -> Series {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Series {
        if c.is_zero_exact() {
            let mut z = Series::zero(self.nvars);
            z.trunc = self.trunc;
            return z;
        }
        let mut out = Series {
            nvars: self.nvars,
            trunc: self.trunc,
            coeffs: BTreeMap::new(),
        };
        for (e, a) in &self.coeffs {
            out.coeffs.insert(*e, a.mul(c));
        }
        out.canonicalize();
        out
    }

    /// Product, truncated at the minimum of the input truncation orders.
    pub fn mul(&self, o: &Series) -> Series {
        assert_eq!(self.nvars, o.nvars);
        let trunc = Series::min_trunc(self.trunc, o.trunc);
        let mut out = Series {
            nvars: self.nvars,
            trunc,
            coeffs: BTreeMap::new(),
        };
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &o.coeffs {
                let e = [ea[0] + eb[0], ea[1] + eb[1]];
                if let Some(n) = trunc {
                    if expo_total(&e) >= n {
                        continue;
                    }
                }
                let add = ca.mul(cb);
                let cur = out.coeffs.remove(&e).unwrap_or_else(Scalar::zero);
                let s = cur.add(&add);
                if !s.is_zero_exact() {
                    out.coeffs.insert(e, s);
                }
            }
        }
        out.canonicalize();
        out
    }

    pub fn pow(&self, k: u32) -> Series {
        let mut acc = Series::one(self.nvars);
        acc.trunc = self.trunc;
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

    /// Multiply by the monomial x^m. Sound truncation shift: the unknown tail
    /// of degree >= N maps to degree >= N + |m|.
    pub fn mul_monomial(&self, m: &Expo) -> Series {
        let mut out = Series {
            nvars: self.nvars,
            trunc: self.trunc.map(|n| n + expo_total(m)),
            coeffs: BTreeMap::new(),
        };
        for (e, c) in &self.coeffs {
            out.coeffs.insert([e[0] + m[0], e[1] + m[1]], c.clone());
        }
        out
    }

    /// Divide by x_axis^k. Errors when a stored term certainly obstructs the
    /// division; ball terms that may be zero are dropped (their true value is
    /// zero whenever the division is legitimate, which the caller certifies
    /// through order data beforehand).
    pub fn divide_by_coordinate(&self, axis: usize, k: u32) -> Result<Series> {
        if k == 0 {
            return Ok(self.clone());
        }
        assert!(axis < self.nvars as usize);
        let mut out = Series {
            nvars: self.nvars,
            trunc: self.trunc.map(|n| n.saturating_sub(k)),
            coeffs: BTreeMap::new(),
        };
        for (e, c) in &self.coeffs {
            if e[axis] < k {
                match c.nonzero_certified() {
                    Some(true) => {
                        return Err(Error::NotDivisible {
                            what: format!("x{}^{}", axis + 1, k),
                        })
                    }
                    Some(false) => {}
                    None => {}
                }
                continue;
            }
            let mut e2 = *e;
            e2[axis] -= k;
            out.coeffs.insert(e2, c.clone());
        }
        out.canonicalize();
        Ok(out)
    }

    /// Pull back under the power substitution x_j -> (-1)^(eps_j) x_j^(gamma_j).
    pub fn substitute_power(&self, gamma: &[u32], eps: &[u8]) -> Series {
        assert_eq!(gamma.len(), self.nvars as usize);
        assert_eq!(eps.len(), self.nvars as usize);
        assert!(gamma.iter().all(|&g| g >= 1));
        let gmin = *gamma.iter().min().unwrap();
        let mut out = Series {
            nvars: self.nvars,
            trunc: self.trunc.map(|n| n * gmin),
            coeffs: BTreeMap::new(),
        };
        for (e, c) in &self.coeffs {
            let mut e2 = [0u32, 0u32];
            let mut sign = 0u32;
            for j in 0..self.nvars as usize {
                e2[j] = e[j] * gamma[j];
                sign += eps[j] as u32 * e[j];
            }
            let v = if sign % 2 == 1 { c.neg() } else { c.clone() };
            out.coeffs.insert(e2, v);
        }
        out.canonicalize();
        out
    }

    /// f(x + c). Requires an exact polynomial unless the offset is zero:
    /// translating a truncated series by a nonzero constant would pollute
    /// every stored coefficient with unknown tail contributions.
    pub fn translate(&self, c: &[Scalar]) -> Result<Series> {
        assert_eq!(c.len(), self.nvars as usize);
        if c.iter().all(|s| s.is_zero_exact()) {
            return Ok(self.clone());
        }
        if let Some(n) = self.trunc {
            return Err(Error::TranslateTruncated { trunc: n });
        }
        let mut out = Series::zero(self.nvars);
        for (e, coef) in &self.coeffs {
            // Expand coef * prod_j (x_j + c_j)^(e_j) by binomials.
            let mut parts: Vec<(Expo, Scalar)> = vec![([0, 0], coef.clone())];
            for j in 0..self.nvars as usize {
                let mut next: Vec<(Expo, Scalar)> = Vec::new();
                let p = e[j];
                // binomial row for (x + c_j)^p
                let mut binom = Scalar::one();
                let mut cpow = Scalar::one();
                let mut row: Vec<Scalar> = Vec::with_capacity(p as usize + 1);
                for k in 0..=p {
                    // coefficient of x^(p-k): C(p,k) c^k
                    row.push(binom.mul(&cpow));
                    if k < p {
                        binom = binom
                            .mul(&Scalar::from_int((p - k) as i64))
                            .div(&Scalar::from_int((k + 1) as i64))
                            .expect("binomial division");
                        cpow = cpow.mul(&c[j]);
                    }
                }
                for (pe, pc) in &parts {
                    for k in 0..=p {
                        let mut e2 = *pe;
                        e2[j] += p - k;
                        next.push((e2, pc.mul(&row[k as usize])));
                    }
                }
                parts = next;
            }
            for (e2, c2) in parts {
                let cur = out.coeffs.remove(&e2).unwrap_or_else(Scalar::zero);
                let s = cur.add(&c2);
                if !s.is_zero_exact() {
                    out.coeffs.insert(e2, s);
                }
            }
        }
        out.canonicalize();
        Ok(out)
    }

    /// Pull back under a point blow-up chart: 0 is (x,y) -> (x, x y),
    /// 1 is (x,y) -> (x y, y). Two-variable series only.
    pub fn blowup_pullback(&self, chart: u8) -> Series {
        assert_eq!(self.nvars, 2);
        let mut out = Series {
            nvars: 2,
            trunc: self.trunc,
            coeffs: BTreeMap::new(),
        };
        for (e, c) in &self.coeffs {
            let e2 = match chart {
                0 => [e[0] + e[1], e[1]],
                1 => [e[0], e[0] + e[1]],
                _ => panic!("blow-up chart index must be 0 or 1"),
            };
            let cur = out.coeffs.remove(&e2).unwrap_or_else(Scalar::zero);
            out.coeffs.insert(e2, cur.add(c));
        }
        out.canonicalize();
        out
    }

    /// Normal-crossings decomposition f = x^alpha * u with u(0) != 0
    /// certified. In one variable this is the valuation; in two variables it
    /// can fail with `NotNormalCrossings`.
    pub fn series_order(&self) -> Result<(Expo, Series)> {
        let mut alpha: Option<Expo> = None;
        let mut indeterminate_low: Vec<Expo> = Vec::new();
        for (e, c) in &self.coeffs {
            match c.nonzero_certified() {
                Some(true) => {
                    alpha = Some(match alpha {
                        None => *e,
                        Some(a) => [a[0].min(e[0]), a[1].min(e[1])],
                    });
                }
                Some(false) => {}
                None => indeterminate_low.push(*e),
            }
        }
        let alpha = match alpha {
            Some(a) => a,
            None => {
                return match self.trunc {
                    Some(n) => Err(Error::ZeroToTruncation { trunc: n }),
                    None => {
                        if indeterminate_low.is_empty() {
                            Err(Error::Input("order of the zero series".into()))
                        } else {
                            Err(Error::PrecisionExhausted {
                                decision: "order of a series with only indeterminate terms"
                                    .into(),
                                prec: 0,
                                cap: 0,
                            })
                        }
                    }
                }
            }
        };
        // Indeterminate terms sitting below alpha could change the order.
        for e in &indeterminate_low {
            if e[0] < alpha[0] || e[1] < alpha[1] {
                return Err(Error::PrecisionExhausted {
                    decision: format!(
                        "coefficient at {:?} is a ball straddling zero below the candidate order {:?}",
                        e, alpha
                    ),
                    prec: 0,
                    cap: 0,
                });
            }
        }
        let unit = self
            .divide_by_coordinate(0, alpha[0])?
            .divide_by_coordinate(1, alpha[1])?;
        match unit.value_at_zero().nonzero_certified() {
            Some(true) => Ok((alpha, unit)),
            Some(false) => Err(Error::NotNormalCrossings(format!(
                "componentwise minimal exponent {:?} is not attained by a single monomial",
                alpha
            ))),
            None => Err(Error::PrecisionExhausted {
                decision: "unit constant term straddles zero".into(),
                prec: 0,
                cap: 0,
            }),
        }
    }

    /// Valuation in one variable (order of the series at 0).
    pub fn order_1d(&self) -> Result<u32> {
        assert_eq!(self.nvars, 1);
        let (a, _) = self.series_order()?;
        Ok(a[0])
    }

    pub fn conj(&self) -> Series {
        Series {
            nvars: self.nvars,
            trunc: self.trunc,
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (*e, c.conj()))
                .collect(),
        }
    }

    /// Square root with the principal branch at the constant term.
    /// `n_target` supplies the output order when the input is polynomial.
    /// Upgrades back to an exact polynomial when the square closes exactly.
    pub fn sqrt(&self, n_target: u32, prec: u32) -> Result<Series> {
        let n = self.trunc.unwrap_or(n_target).max(1);
        let c0 = self.value_at_zero();
        if c0.nonzero_certified() != Some(true) {
            return Err(Error::Input(
                "series square root needs a certified nonzero constant term".into(),
            ));
        }
        let g0 = c0.sqrt(prec)?;
        let two_g0 = g0.add(&g0);
        let mut g = Series {
            nvars: self.nvars,
            trunc: Some(n),
            coeffs: BTreeMap::new(),
        };
        g.coeffs.insert([0, 0], g0);
        // Graded recurrence: 2 g0 g_a = f_a - sum_{b + b' = a, b,b' != 0} g_b g_b'.
        let mut targets: Vec<Expo> = Vec::new();
        for d in 1..n {
            for i in 0..=d {
                let e = [d - i, i];
                if self.nvars == 1 && e[1] > 0 {
                    continue;
                }
                targets.push(e);
            }
        }
        targets.sort_by_key(|e| (expo_total(e), e[0]));
        for a in targets {
            let mut rhs = self.coeff(&a);
            let known: Vec<(Expo, Scalar)> =
                g.coeffs.iter().map(|(e, c)| (*e, c.clone())).collect();
            for (b, cb) in &known {
                if *b == [0, 0] {
                    continue;
                }
                if b[0] > a[0] || b[1] > a[1] {
                    continue;
                }
                let b2 = [a[0] - b[0], a[1] - b[1]];
                if b2 == [0, 0] {
                    continue;
                }
                if let Some(cb2) = g.coeffs.get(&b2) {
                    rhs = rhs.sub(&cb.mul(cb2));
                }
            }
            let ga = rhs.div(&two_g0)?;
            if !ga.is_zero_exact() {
                g.coeffs.insert(a, ga);
            }
        }
        g.canonicalize();
        if self.is_polynomial() && g.is_exact() {
            let mut cand = g.clone();
            cand.trunc = None;
            if cand.mul(&cand) == *self {
                return Ok(cand);
            }
        }
        Ok(g)
    }

    pub fn eval_exact(&self, pt: &[Scalar]) -> Scalar {
        assert_eq!(pt.len(), self.nvars as usize);
        let mut acc = Scalar::zero();
        for (e, c) in &self.coeffs {
            let mut term = c.clone();
            for j in 0..self.nvars as usize {
                if e[j] > 0 {
                    term = term.mul(&pt[j].pow(e[j]));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    pub fn eval_c64(&self, pt: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.coeffs {
            let mut term = c.to_c64();
            for j in 0..self.nvars as usize {
                term *= pt[j].powu(e[j]);
            }
            acc += term;
        }
        acc
    }

    /// Crude tail bound |f(x) - stored(x)| <= M q^N / (1-q) at |x_j| <= q < 1,
    /// using the largest stored coefficient magnitude as M. Diagnostic only.
    pub fn tail_bound_heuristic(&self, q: f64) -> f64 {
        match self.trunc {
            None => 0.0,
            Some(n) => {
                if q >= 1.0 {
                    return f64::INFINITY;
                }
                let m = self
                    .coeffs
                    .values()
                    .map(|c| {
                        let z = c.to_c64();
                        z.norm()
                    })
                    .fold(1.0f64, f64::max);
                m * q.powi(n as i32) / (1.0 - q)
            }
        }
    }

    /// Largest coefficient magnitude as f64 (diagnostics).
    pub fn coeff_sup_f64(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.to_c64().norm())
            .fold(0.0f64, f64::max)
    }

    /// Smallest working precision among ball coefficients.
    pub fn min_precision(&self) -> u32 {
        self.coeffs
            .values()
            .map(|c| c.precision())
            .min()
            .unwrap_or(u32::MAX)
    }

    /// Sup over coefficients of ball radii, as an exact rational.
    pub fn max_radius(&self) -> BigRational {
        let mut m = BigRational::zero();
        for c in self.coeffs.values() {
            let r = c.rad();
            if r > m {
                m = r;
            }
        }
        m
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::textio::series_to_string(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Series {
        Series::var(0, 1)
    }

    fn s(lit: &str, nvars: u8) -> Series {
        crate::textio::parse_series(lit, nvars, None).unwrap()
    }

    #[test]
    fn square_truncates_at_min_order() {
        let mut f = t().add(&t().pow(2));
        f.trunc = Some(3);
        let sq = f.mul(&f);
        assert_eq!(sq.trunc, Some(3));
        assert_eq!(sq.coeff(&[2, 0]), Scalar::one());
        assert_eq!(sq.coeff(&[3, 0]), Scalar::zero());
        assert_eq!(sq.num_terms(), 1);
    }

    #[test]
    fn order_one_variable() {
        let f = s("t^3 + t^5", 1);
        let (a, u) = f.series_order().unwrap();
        assert_eq!(a, [3, 0]);
        assert_eq!(u, s("1 + t^2", 1));
    }

    #[test]
    fn order_two_variables_monomial_times_unit() {
        let f = s("x^2*y + x^3*y", 2);
        let (a, u) = f.series_order().unwrap();
        assert_eq!(a, [2, 1]);
        assert_eq!(u, s("1 + x", 2));
    }

    #[test]
    fn order_rejects_non_normal_crossings() {
        let f = s("x^2 + y^2", 2);
        match f.series_order() {
            Err(Error::NotNormalCrossings(_)) => {}
            other => panic!("expected NotNormalCrossings, got {:?}", other),
        }
    }

    #[test]
    fn order_zero_to_truncation() {
        let f = Series::zero_truncated(1, 4);
        match f.series_order() {
            Err(Error::ZeroToTruncation { trunc: 4 }) => {}
            other => panic!("expected ZeroToTruncation, got {:?}", other),
        }
    }

    #[test]
    fn divide_by_coordinate_examples() {
        let f = s("t^2 + t^3", 1);
        let g = f.divide_by_coordinate(0, 2).unwrap();
        assert_eq!(g, s("1 + t", 1));
        let h = s("x^2 + y^2", 2);
        match h.divide_by_coordinate(0, 1) {
            Err(Error::NotDivisible { .. }) => {}
            other => panic!("expected NotDivisible, got {:?}", other),
        }
    }

    #[test]
    fn truncation_drops_on_divide_and_shifts_on_monomial_mul() {
        let mut f = s("t^2 + t^3", 1);
        f.trunc = Some(6);
        let g = f.divide_by_coordinate(0, 2).unwrap();
        assert_eq!(g.trunc, Some(4));
        let back = g.mul_monomial(&[2, 0]);
        assert_eq!(back.trunc, Some(6));
        assert_eq!(back.coeffs, f.coeffs);
    }

    #[test]
    fn substitute_power_examples() {
        let f = t();
        let g = f.substitute_power(&[2], &[1]);
        assert_eq!(g, s("-1*t^2", 1));

        let f2 = s("1 + x*y", 2);
        let g2 = f2.substitute_power(&[2, 3], &[0, 0]);
        assert_eq!(g2, s("1 + x^2*y^3", 2));

        let f3 = s("t^2", 1);
        let g3 = f3.substitute_power(&[3], &[1]);
        assert_eq!(g3, s("t^6", 1));
    }

    #[test]
    fn substitute_power_truncation_scales() {
        let mut f = s("t", 1);
        f.trunc = Some(4);
        let g = f.substitute_power(&[3], &[0]);
        assert_eq!(g.trunc, Some(12));
    }

    #[test]
    fn substitute_power_composes_with_eps_rule() {
        // psi_{g,e} after psi_{g',e'} equals psi_{g g', e + g' e' mod 2}
        // in each component... composition: x -> (-1)^e' x^g' then
        // x -> (-1)^e x^g gives (-1)^(e + e' g) x^(g g').
        let f = s("1 + t + t^3", 1);
        let a = f.substitute_power(&[2], &[1]).substitute_power(&[3], &[1]);
        let eps = (1 + 1 * 2) % 2;
        let b = f.substitute_power(&[6], &[eps as u8]);
        assert_eq!(a, b);
    }

    #[test]
    fn translate_examples() {
        let f = s("t^2", 1);
        let g = f.translate(&[Scalar::one()]).unwrap();
        assert_eq!(g, s("1 + 2*t + t^2", 1));

        let f2 = s("x*y", 2);
        let g2 = f2.translate(&[Scalar::one(), Scalar::zero()]).unwrap();
        assert_eq!(g2, s("y + x*y", 2));

        let c = s("5", 1);
        assert_eq!(c.translate(&[Scalar::from_int(3)]).unwrap(), c);
    }

    #[test]
    fn translate_truncated_rejected() {
        let mut f = s("t^2", 1);
        f.trunc = Some(5);
        match f.translate(&[Scalar::one()]) {
            Err(Error::TranslateTruncated { trunc: 5 }) => {}
            other => panic!("expected TranslateTruncated, got {:?}", other),
        }
        // Zero offset is fine on truncated data.
        assert!(f.translate(&[Scalar::zero()]).is_ok());
    }

    #[test]
    fn monomial_compare_verdicts() {
        assert_eq!(monomial_order_compare(&[2, 1], &[3, 1]), ExpoCmp::Leq);
        assert_eq!(monomial_order_compare(&[3, 1], &[2, 1]), ExpoCmp::Geq);
        assert_eq!(monomial_order_compare(&[2, 1], &[2, 1]), ExpoCmp::Both);
        assert_eq!(
            monomial_order_compare(&[2, 1], &[1, 2]),
            ExpoCmp::Incomparable
        );
    }

    #[test]
    fn blowup_pullback_charts() {
        let f = Series::var(1, 2); // y
        assert_eq!(f.blowup_pullback(0), s("x*y", 2));
        let g = s("x^2 - y^2", 2);
        assert_eq!(g.blowup_pullback(0), s("x^2 - x^2*y^2", 2));
        assert_eq!(g.blowup_pullback(1), s("x^2*y^2 - y^2", 2));
    }

    #[test]
    fn order_is_additive_for_nc_series() {
        let f = s("t^2 + t^3", 1);
        let g = s("t^3 + t^4", 1);
        let fo = f.order_1d().unwrap();
        let go = g.order_1d().unwrap();
        let pr = f.mul(&g).order_1d().unwrap();
        assert_eq!(pr, fo + go);
    }

    #[test]
    fn sqrt_binomial_series() {
        let f = s("1 + t", 1);
        let g = f.sqrt(6, 64).unwrap();
        assert_eq!(g.coeff(&[0, 0]), Scalar::one());
        assert_eq!(g.coeff(&[1, 0]), Scalar::from_ratio(1, 2));
        assert_eq!(g.coeff(&[2, 0]), Scalar::from_ratio(-1, 8));
        let sq = g.mul(&g);
        // Residual vanishes to the working order.
        let resid = sq.sub(&f);
        assert!(resid.is_zero_stored());
    }

    #[test]
    fn sqrt_upgrades_perfect_squares() {
        let f = s("1 + 2*t + t^2", 1);
        let g = f.sqrt(8, 64).unwrap();
        assert!(g.is_polynomial());
        assert_eq!(g, s("1 + t", 1));
    }

    #[test]
    fn sqrt_two_variables() {
        let f = s("1 + x + y", 2);
        let g = f.sqrt(5, 96).unwrap();
        let resid = g.mul(&g).sub(&f);
        assert!(resid.is_zero_stored());
    }

    #[test]
    fn eval_exact_and_f64_agree() {
        let f = s("1/2 + 3*t^2", 1);
        let v = f.eval_exact(&[Scalar::from_ratio(1, 4)]);
        assert_eq!(v, Scalar::from_ratio(11, 16));
        let w = f.eval_c64(&[Complex64::new(0.25, 0.0)]);
        assert!((w.re - 11.0 / 16.0).abs() < 1e-14);
    }
}
