//! Monic polynomials in one distinguished variable `z` whose coefficients
//! are series in the base variables, together with cluster-wise Hensel
//! splitting.
//!
//! The lifting recursion encodes a parameter curve or surface through the
//! polynomial P(z; x) = z^n - g_1(x) z^(n-1) + ... whose roots are the
//! candidate branch values. When the slice polynomial P(z; 0) has several
//! root clusters, P factors into one monic piece per cluster; the factors
//! are produced order by order in the base variables by solving the Sylvester
//! system of the slice factorization. All arithmetic stays in `Scalar`, so
//! exact inputs with rational slice roots give exactly factored pieces
//! (upgraded back to polynomials when the product closes exactly), and ball
//! data keeps rigorous enclosures, failing with a precision error when a
//! pivot cannot be certified nonzero.

use crate::error::{Error, Result};
use crate::roots::RootCluster;
use crate::scalar::Scalar;
use crate::series::{Expo, Series};

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPoly {
    pub nvars: u8,
    /// Ascending powers of z.
    pub coeffs: Vec<Series>,
}

impl SeriesPoly {
    pub fn new(nvars: u8, coeffs: Vec<Series>) -> Self {
        assert!(!coeffs.is_empty());
        for c in &coeffs {
            assert_eq!(c.nvars, nvars);
        }
        SeriesPoly { nvars, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        match self.coeffs.last() {
            Some(c) => c.num_terms() == 1 && c.coeff(&[0, 0]) == Scalar::one(),
            None => false,
        }
    }

    /// z^n - e_1 z^(n-1) + e_2 z^(n-2) - ... from the elementary symmetric
    /// values of the sought roots.
    pub fn from_elementary(e: &[Series], nvars: u8) -> Self {
        let n = e.len();
        let mut coeffs = vec![Series::zero(nvars); n + 1];
        coeffs[n] = Series::one(nvars);
        for (j, ej) in e.iter().enumerate() {
            // e_(j+1) lands at z^(n-j-1) with sign (-1)^(j+1).
            let signed = if (j + 1) % 2 == 1 { ej.neg() } else { ej.clone() };
            coeffs[n - j - 1] = signed;
        }
        SeriesPoly::new(nvars, coeffs)
    }

    /// Inverse of `from_elementary` for a monic polynomial.
    pub fn elementary(&self) -> Vec<Series> {
        let n = self.degree();
        (1..=n)
            .map(|j| {
                let c = &self.coeffs[n - j];
                if j % 2 == 1 {
                    c.neg()
                } else {
                    c.clone()
                }
            })
            .collect()
    }

    /// Coefficient scalars of the slice polynomial P(z; 0).
    pub fn slice0(&self) -> Vec<Scalar> {
        self.coeffs.iter().map(|c| c.value_at_zero()).collect()
    }

    pub fn mul(&self, o: &SeriesPoly) -> SeriesPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut out = vec![Series::zero(self.nvars); self.degree() + o.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        SeriesPoly::new(self.nvars, out)
    }

    pub fn sub(&self, o: &SeriesPoly) -> SeriesPoly {
        assert_eq!(self.nvars, o.nvars);
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self
                .coeffs
                .get(i)
                .cloned()
                .unwrap_or_else(|| Series::zero(self.nvars));
            let b = o
                .coeffs
                .get(i)
                .cloned()
                .unwrap_or_else(|| Series::zero(self.nvars));
            out.push(a.sub(&b));
        }
        SeriesPoly::new(self.nvars, out)
    }

    /// P(z + c) for a series offset c.
    pub fn taylor_shift_z(&self, c: &Series) -> SeriesPoly {
        let mut out = self.coeffs.clone();
        let n = out.len();
        for i in 0..n {
            for k in (i..n.saturating_sub(1)).rev() {
                let add = out[k + 1].mul(c);
                out[k] = out[k].add(&add);
            }
        }
        SeriesPoly::new(self.nvars, out)
    }

    /// Substitute z -> z^2, doubling the polynomial degree.
    pub fn compose_z_squared(&self) -> SeriesPoly {
        let mut out = vec![Series::zero(self.nvars); 2 * self.degree() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[2 * i] = c.clone();
        }
        SeriesPoly::new(self.nvars, out)
    }

    pub fn truncate_all(&mut self, trunc: Option<u32>) {
        for c in &mut self.coeffs {
            c.truncate(trunc);
        }
    }

    /// Evaluate at a series argument (used by verification).
    pub fn eval_series(&self, z: &Series) -> Series {
        let mut acc = Series::zero(self.nvars);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z).add(c);
        }
        acc
    }

    /// Minimum truncation order over the coefficients, None when all are
    /// polynomials.
    pub fn min_trunc(&self) -> Option<u32> {
        let mut out: Option<u32> = None;
        for c in &self.coeffs {
            if let Some(n) = c.trunc {
                out = Some(out.map_or(n, |m| m.min(n)));
            }
        }
        out
    }

    pub fn is_exact_poly(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_polynomial() && c.is_exact())
    }
}

pub fn scalar_poly_mul(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// (z - c)^m, ascending coefficients.
pub fn linear_power(c: &Scalar, m: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::one()];
    let factor = vec![c.neg(), Scalar::one()];
    for _ in 0..m {
        out = scalar_poly_mul(&out, &factor);
    }
    out
}

/// Solve M u = r by Gaussian elimination with certified-nonzero pivots.
fn solve_linear(m: &[Vec<Scalar>], r: &[Scalar]) -> Result<Vec<Scalar>> {
    let n = m.len();
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let mut b: Vec<Scalar> = r.to_vec();
    for col in 0..n {
        // Pick the certified-nonzero pivot with the largest midpoint.
        let mut best: Option<(usize, f64)> = None;
        for row in col..n {
            let cand = &a[row][col];
            if cand.nonzero_certified() == Some(true) {
                let mag = cand.to_c64().norm();
                if best.map(|(_, m)| mag > m).unwrap_or(true) {
                    best = Some((row, mag));
                }
            }
        }
        let (prow, _) = best.ok_or_else(|| Error::PrecisionExhausted {
            decision: format!("pivot in column {} of the factor-splitting system", col),
            prec: 0,
            cap: 0,
        })?;
        a.swap(col, prow);
        b.swap(col, prow);
        let piv = a[col][col].clone();
        for row in (col + 1)..n {
            if a[row][col].is_zero_exact() {
                continue;
            }
            let f = a[row][col].div(&piv)?;
            for k in col..n {
                let s = a[col][k].mul(&f);
                a[row][k] = a[row][k].sub(&s);
            }
            let s = b[col].mul(&f);
            b[row] = b[row].sub(&s);
        }
    }
    let mut u = vec![Scalar::zero(); n];
    for col in (0..n).rev() {
        let mut acc = b[col].clone();
        for k in (col + 1)..n {
            let s = a[col][k].mul(&u[k]);
            acc = acc.sub(&s);
        }
        u[col] = acc.div(&a[col][col])?;
    }
    Ok(u)
}

/// Sylvester-style matrix of the map (a, b) -> b0 a + a0 b on polynomials
/// with deg a < m, deg b < n - m, written in the z-coefficient basis.
fn split_matrix(a0: &[Scalar], b0: &[Scalar]) -> Vec<Vec<Scalar>> {
    let m = a0.len() - 1;
    let nm = b0.len() - 1;
    let n = m + nm;
    let mut mat = vec![vec![Scalar::zero(); n]; n];
    for i in 0..m {
        for (j, c) in b0.iter().enumerate() {
            mat[i + j][i] = mat[i + j][i].add(c);
        }
    }
    for i in 0..nm {
        for (j, c) in a0.iter().enumerate() {
            mat[i + j][m + i] = mat[i + j][m + i].add(c);
        }
    }
    mat
}

/// Split a monic P into monic factors A, B lifting the slice factorization
/// P(z; 0) = a0(z) b0(z), order by order up to total degree `order` in the
/// base variables. The slice factors must be monic with no shared roots.
/// Ball slice factors are taken as enclosures and the lifted coefficients
/// keep rigorous radii.
pub fn hensel_two_factor(
    p: &SeriesPoly,
    a0: &[Scalar],
    b0: &[Scalar],
    order: u32,
) -> Result<(SeriesPoly, SeriesPoly)> {
    let n = p.degree();
    let m = a0.len() - 1;
    assert!(m >= 1 && m < n, "factor degrees must be nontrivial");
    assert_eq!(b0.len() - 1, n - m);
    assert!(p.is_monic(), "factor splitting expects a monic polynomial");
    let eff_order = match p.min_trunc() {
        Some(t) => order.min(t),
        None => order,
    };
    if eff_order == 0 {
        return Err(Error::TruncationUnderflow {
            have: 0,
            floor: 1,
            need: 1,
        });
    }
    let mat = split_matrix(a0, b0);

    let mk_poly = |base: &[Scalar]| -> SeriesPoly {
        let coeffs = base
            .iter()
            .map(|c| {
                let mut s = Series::constant(c.clone(), p.nvars);
                s.trunc = Some(eff_order);
                s
            })
            .collect();
        SeriesPoly::new(p.nvars, coeffs)
    };
    let mut fa = mk_poly(a0);
    let mut fb = mk_poly(b0);
    // The leading coefficients are exactly 1, free of truncation fuzz.
    fa.coeffs[m] = Series::one(p.nvars);
    fb.coeffs[n - m] = Series::one(p.nvars);

    for layer in 1..eff_order {
        let resid = p.sub(&fa.mul(&fb));
        let indices: Vec<Expo> = layer_indices(p.nvars, layer);
        for k in indices {
            let mut rhs = vec![Scalar::zero(); n];
            let mut any = false;
            for (i, c) in resid.coeffs.iter().enumerate().take(n) {
                let v = c.coeff(&k);
                if !v.is_zero_exact() {
                    any = true;
                }
                rhs[i] = v;
            }
            if !any {
                continue;
            }
            let u = solve_linear(&mat, &rhs)?;
            for i in 0..m {
                if !u[i].is_zero_exact() {
                    let cur = fa.coeffs[i].coeff(&k).add(&u[i]);
                    fa.coeffs[i].set_coeff(k, cur);
                }
            }
            for i in 0..(n - m) {
                if !u[m + i].is_zero_exact() {
                    let cur = fb.coeffs[i].coeff(&k).add(&u[m + i]);
                    fb.coeffs[i].set_coeff(k, cur);
                }
            }
        }
    }

    // When everything is exact, check whether the factorization closes as
    // polynomials; if so, drop the truncations.
    if p.is_exact_poly()
        && fa.coeffs.iter().all(|c| c.is_exact())
        && fb.coeffs.iter().all(|c| c.is_exact())
    {
        let mut pa = fa.clone();
        let mut pb = fb.clone();
        for c in pa.coeffs.iter_mut().chain(pb.coeffs.iter_mut()) {
            c.trunc = None;
        }
        let diff = p.sub(&pa.mul(&pb));
        if diff.coeffs.iter().all(|c| c.is_zero() == Some(true)) {
            return Ok((pa, pb));
        }
    }
    Ok((fa, fb))
}

fn layer_indices(nvars: u8, total: u32) -> Vec<Expo> {
    if nvars == 1 {
        vec![[total, 0]]
    } else {
        (0..=total).map(|i| [total - i, i]).collect()
    }
}

/// Split a monic polynomial along the root clusters of its slice, one monic
/// factor per cluster, in cluster order. Each base factor is (z - c)^m for
/// the cluster enclosure c, which contains the true slice factor whenever
/// the enclosure contains the cluster's roots.
pub fn split_by_clusters(
    p: &SeriesPoly,
    clusters: &[RootCluster],
    order: u32,
) -> Result<Vec<SeriesPoly>> {
    assert!(clusters.len() >= 2, "splitting needs at least two clusters");
    let mut out = Vec::with_capacity(clusters.len());
    let mut rest = p.clone();
    for (idx, cl) in clusters.iter().enumerate() {
        if idx + 1 == clusters.len() {
            out.push(rest);
            break;
        }
        let a0 = linear_power(&cl.center, cl.multiplicity);
        let mut b0 = vec![Scalar::one()];
        for other in &clusters[idx + 1..] {
            b0 = scalar_poly_mul(&b0, &linear_power(&other.center, other.multiplicity));
        }
        let (fa, fb) = hensel_two_factor(&rest, &a0, &b0, order)?;
        out.push(fa);
        rest = fb;
    }
    Ok(out)
}
