//! Certified root clustering for univariate polynomials with exact or ball
//! coefficients.
//!
//! The construction pipeline only ever needs two things from a polynomial's
//! roots: a partition into clusters with pairwise disjoint certified disks,
//! and an enclosure for each cluster. Disjointness decisions steer the chart
//! structure, so they are made with exact rational comparisons; when they
//! cannot be certified the caller gets `SeparationFailed` instead of a guess.
//!
//! Exact coefficients go through a squarefree decomposition, floating-point
//! root finding, an exact Newton polish, and per-root disks of radius
//! deg * |F/F'| checked disjoint exactly. Rational (or Gaussian rational)
//! roots are snapped and verified by exact division, so they come back
//! exact. Ball coefficients go through floating-point root finding on the
//! midpoint polynomial, proximity merging, and a Pellet count on a shifted
//! and scaled polynomial to certify how many roots each disk holds.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{dyadic_round, pow2, rational_sqrt_bracket, Ball, GaussRat, Scalar};

/// One cluster of roots: a certified enclosure and how many roots (counted
/// with multiplicity) it contains.
#[derive(Clone, Debug)]
pub struct RootCluster {
    pub center: Scalar,
    pub multiplicity: usize,
}

/// Evaluate a polynomial given by ascending coefficients.
pub fn poly_eval(coeffs: &[Scalar], z: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(c);
    }
    acc
}

pub fn poly_derivative(coeffs: &[Scalar]) -> Vec<Scalar> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.mul(&Scalar::from_int(k as i64)))
        .collect()
}

/// Taylor shift: coefficients of P(z + c).
pub fn poly_taylor_shift(coeffs: &[Scalar], c: &Scalar) -> Vec<Scalar> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    // Repeated synthetic division by (z - (-c)).
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            let add = out[k + 1].mul(c);
            out[k] = out[k].add(&add);
        }
    }
    out
}

fn trim_scalar(mut v: Vec<Scalar>) -> Vec<Scalar> {
    while v.len() > 1 && v.last().map(|c| c.is_zero_exact()) == Some(true) {
        v.pop();
    }
    v
}

// --- floating point stage -------------------------------------------------

fn eval_c64(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Aberth iteration with a deterministic start. Returns deg(p) approximate
/// roots; multiple roots come back as tight clumps of simple approximations.
pub fn aberth_f64(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    let deriv: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();
    // Cauchy-style inclusion radius.
    let lead = coeffs[n].norm().max(1e-300);
    let mut radius = 0.0f64;
    for c in &coeffs[..n] {
        radius = radius.max((c.norm() / lead).powf(1.0 / (n as f64)));
    }
    let radius = (2.0 * radius).max(0.5);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            radius * Complex64::new(theta.cos(), theta.sin())
        })
        .collect();
    for _ in 0..400 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let p = eval_c64(coeffs, z[i]);
            let dp = eval_c64(&deriv, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 {
                p / dp
            } else {
                Complex64::new(1e-12, 1e-12)
            };
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() > 1e-300 {
                        s += Complex64::new(1.0, 0.0) / d;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * s;
            let w = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            z[i] -= w;
            moved = moved.max(w.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

// --- exact polynomial utilities over the Gaussian rationals ----------------

#[derive(Clone, Debug, PartialEq)]
struct QPoly(Vec<GaussRat>);

impl QPoly {
    fn trim(mut self) -> Self {
        while self.0.len() > 1 && self.0.last().map(|c| c.is_zero()) == Some(true) {
            self.0.pop();
        }
        self
    }

    fn degree(&self) -> usize {
        self.0.len() - 1
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    fn lead(&self) -> &GaussRat {
        self.0.last().unwrap()
    }

    fn monic(&self) -> Result<QPoly> {
        let l = self.lead().clone();
        let coeffs: Result<Vec<GaussRat>> = self.0.iter().map(|c| c.div(&l)).collect();
        Ok(QPoly(coeffs?))
    }

    fn derivative(&self) -> QPoly {
        QPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| {
                    c.mul(&GaussRat::new(
                        BigRational::from_integer(BigInt::from(k)),
                        BigRational::zero(),
                    ))
                })
                .collect::<Vec<_>>(),
        )
        .trim()
    }

    fn rem(&self, d: &QPoly) -> Result<QPoly> {
        let dd = d.degree();
        let dl = d.lead();
        let mut r = self.clone().trim();
        while !r.is_zero() && r.degree() >= dd {
            let k = r.degree() - dd;
            let q = r.lead().div(dl)?;
            for i in 0..=dd {
                let sub = d.0[i].mul(&q);
                r.0[i + k] = r.0[i + k].sub(&sub);
            }
            r = r.trim();
        }
        Ok(r)
    }

    fn div_exact(&self, d: &QPoly) -> Result<QPoly> {
        let mut r = self.0.clone();
        let dd = d.degree();
        let dl = d.lead();
        let mut q = vec![GaussRat::zero(); self.0.len().saturating_sub(dd)];
        loop {
            let rt = QPoly(r.clone()).trim();
            if rt.is_zero() {
                break;
            }
            if rt.degree() < dd {
                return Err(Error::Internal("inexact polynomial division".into()));
            }
            let k = rt.degree() - dd;
            let c = rt.lead().div(dl)?;
            q[k] = c.clone();
            r = rt.0;
            for i in 0..=dd {
                let sub = d.0[i].mul(&c);
                r[i + k] = r[i + k].sub(&sub);
            }
        }
        if q.is_empty() {
            q.push(GaussRat::zero());
        }
        Ok(QPoly(q).trim())
    }

    fn gcd(&self, o: &QPoly) -> Result<QPoly> {
        let mut a = self.clone().trim();
        let mut b = o.clone().trim();
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return Ok(a);
        }
        a.monic()
    }

    fn eval(&self, z: &GaussRat) -> GaussRat {
        let mut acc = GaussRat::zero();
        for c in self.0.iter().rev() {
            acc = acc.mul(z).add(c);
        }
        acc
    }

    fn to_c64(&self) -> Vec<Complex64> {
        self.0.iter().map(|c| c.to_c64()).collect()
    }
}

/// Yun decomposition: returns (m, F_m) pairs where F_m collects the roots of
/// multiplicity exactly m; each F_m is squarefree and the F_m are coprime.
fn squarefree_decomposition(p: &QPoly) -> Result<Vec<(usize, QPoly)>> {
    let mut out = Vec::new();
    let dp = p.derivative();
    let a = p.gcd(&dp)?;
    if a.degree() == 0 {
        out.push((1, p.monic()?));
        return Ok(out);
    }
    let mut b = p.div_exact(&a)?;
    let mut c = dp.div_exact(&a)?;
    let mut m = 1usize;
    loop {
        let bd = b.derivative();
        let d = QPoly(sub_vec(&c, &bd)).trim();
        if b.degree() == 0 {
            break;
        }
        let f = b.gcd(&d)?;
        if f.degree() >= 1 {
            out.push((m, f.clone()));
        }
        b = b.div_exact(&f)?;
        c = d.div_exact(&f)?;
        m += 1;
    }
    Ok(out)
}

fn sub_vec(a: &QPoly, b: &QPoly) -> Vec<GaussRat> {
    let n = a.0.len().max(b.0.len());
    let mut out = vec![GaussRat::zero(); n];
    for (i, c) in a.0.iter().enumerate() {
        out[i] = out[i].add(c);
    }
    for (i, c) in b.0.iter().enumerate() {
        out[i] = out[i].sub(c);
    }
    out
}

/// Best rational with denominator <= bound approximating x (continued
/// fractions).
fn rational_reconstruct(x: f64, bound: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let mut p0 = BigInt::from(0);
    let mut q0 = BigInt::from(1);
    let mut p1 = BigInt::from(1);
    let mut q1 = BigInt::from(0);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() >= 9e17 {
            break;
        }
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > BigInt::from(bound) {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1.is_zero() {
        return None;
    }
    let cand = BigRational::new(p1, q1);
    let back = cand.to_f64()?;
    if (back - x).abs() <= 1e-10 * (1.0 + x.abs()) {
        Some(cand)
    } else {
        None
    }
}

fn snap_exact_root(f: &QPoly, z: Complex64) -> Option<GaussRat> {
    let re = rational_reconstruct(z.re, 1 << 24)?;
    let im = rational_reconstruct(z.im, 1 << 24)?;
    let cand = GaussRat::new(re, im);
    if f.eval(&cand).is_zero() {
        Some(cand)
    } else {
        None
    }
}

/// Upper bound for |g| as a rational: sqrt upper bracket of |g|^2.
fn abs_upper_gauss(g: &GaussRat) -> BigRational {
    let (_, hi) = rational_sqrt_bracket(&g.abs2(), 48);
    hi
}

/// For a squarefree factor and a polished point, a disk radius certain to
/// contain at least one root: deg * |F(x)| / |F'(x)|, rounded up.
fn inclusion_radius(f: &QPoly, df: &QPoly, x: &GaussRat) -> Result<BigRational> {
    let fv = f.eval(x);
    if fv.is_zero() {
        return Ok(BigRational::zero());
    }
    let dv = df.eval(x);
    if dv.is_zero() {
        return Err(Error::SeparationFailed(
            "polished point sits on a critical point".into(),
        ));
    }
    let num = abs_upper_gauss(&fv);
    let (den_lo, _) = rational_sqrt_bracket(&dv.abs2(), 48);
    if den_lo.is_zero() {
        return Err(Error::SeparationFailed(
            "derivative too small to bound the inclusion radius".into(),
        ));
    }
    Ok(BigRational::from_integer(BigInt::from(f.degree())) * num / den_lo)
}

fn newton_polish(f: &QPoly, df: &QPoly, z0: Complex64, prec: u32, steps: usize) -> GaussRat {
    let mut x = GaussRat::new(
        rational_reconstruct(z0.re, 1i64 << 52).unwrap_or_else(|| BigRational::zero()),
        rational_reconstruct(z0.im, 1i64 << 52).unwrap_or_else(|| BigRational::zero()),
    );
    for _ in 0..steps {
        let fv = f.eval(&x);
        if fv.is_zero() {
            return x;
        }
        let dv = df.eval(&x);
        if dv.is_zero() {
            return x;
        }
        let step = fv.div(&dv).expect("derivative checked nonzero");
        x = x.sub(&step);
        // Round to limit denominator growth; the rounding error is folded
        // into the next step or the final inclusion radius.
        let (re, _) = dyadic_round(&x.re, prec);
        let (im, _) = dyadic_round(&x.im, prec);
        x = GaussRat::new(re, im);
    }
    x
}

struct DiskCand {
    center: Scalar,
    // Exact center and radius for the disjointness checks.
    c_re: BigRational,
    c_im: BigRational,
    radius: BigRational,
    multiplicity: usize,
}

fn disks_disjoint(a: &DiskCand, b: &DiskCand) -> bool {
    let dre = &a.c_re - &b.c_re;
    let dim = &a.c_im - &b.c_im;
    let d2 = &dre * &dre + &dim * &dim;
    let rsum = &a.radius + &b.radius;
    d2 > &rsum * &rsum
}

fn exact_clusters(coeffs: &[GaussRat], prec: u32) -> Result<Vec<RootCluster>> {
    let p = QPoly(coeffs.to_vec()).trim();
    let factors = squarefree_decomposition(&p)?;
    let mut disks: Vec<DiskCand> = Vec::new();
    for (m, f) in &factors {
        let df = f.derivative();
        let approx = aberth_f64(&f.to_c64());
        for z in approx {
            if let Some(exact) = snap_exact_root(f, z) {
                disks.push(DiskCand {
                    c_re: exact.re.clone(),
                    c_im: exact.im.clone(),
                    center: Scalar::Exact(exact),
                    radius: BigRational::zero(),
                    multiplicity: *m,
                });
                continue;
            }
            // Polish harder until the inclusion radius certifies cleanly.
            let mut placed = false;
            for (steps, bits) in [(3usize, prec), (5, prec * 2), (8, prec * 4)] {
                let x = newton_polish(f, &df, z, bits, steps);
                let rad = match inclusion_radius(f, &df, &x) {
                    Ok(r) => r,
                    Err(_) => continue,
                };
                disks.push(DiskCand {
                    center: Scalar::Ball(Ball {
                        re: x.re.clone(),
                        im: x.im.clone(),
                        rad: rad.clone() + pow2(-(prec as i64)),
                        prec,
                    }),
                    c_re: x.re,
                    c_im: x.im,
                    radius: rad + pow2(-(prec as i64)),
                    multiplicity: *m,
                });
                placed = true;
                break;
            }
            if !placed {
                return Err(Error::SeparationFailed(
                    "could not certify an inclusion disk for a root".into(),
                ));
            }
        }
    }
    // Exact duplicates within one squarefree factor cannot happen; a snap
    // collision across factors would mean the factors were not coprime.
    for i in 0..disks.len() {
        for j in (i + 1)..disks.len() {
            if !disks_disjoint(&disks[i], &disks[j]) {
                return Err(Error::SeparationFailed(format!(
                    "inclusion disks {} and {} overlap; roots too close to separate at this precision",
                    i, j
                )));
            }
        }
    }
    let expected = p.degree();
    let got: usize = disks.iter().map(|d| d.multiplicity).sum();
    if got != expected {
        return Err(Error::Internal(format!(
            "root count mismatch: disks cover {} of {} roots",
            got, expected
        )));
    }
    Ok(disks
        .into_iter()
        .map(|d| RootCluster {
            center: d.center,
            multiplicity: d.multiplicity,
        })
        .collect())
}

// --- ball coefficients: Pellet counting ------------------------------------

fn abs_upper_scalar(c: &Scalar) -> BigRational {
    match c {
        Scalar::Exact(g) => abs_upper_gauss(g),
        Scalar::Ball(b) => {
            let (_, hi) = rational_sqrt_bracket(&(&b.re * &b.re + &b.im * &b.im), 48);
            hi + &b.rad
        }
    }
}

fn abs_lower_scalar(c: &Scalar) -> BigRational {
    match c {
        Scalar::Exact(g) => {
            let (lo, _) = rational_sqrt_bracket(&g.abs2(), 48);
            lo
        }
        Scalar::Ball(b) => {
            let (lo, _) = rational_sqrt_bracket(&(&b.re * &b.re + &b.im * &b.im), 48);
            let l = lo - &b.rad;
            if l.is_negative() {
                BigRational::zero()
            } else {
                l
            }
        }
    }
}

/// Pellet test: after shifting to `c` and scaling by `r`, exactly `m` roots
/// lie in the closed disk if |b_m| outweighs all other coefficients.
fn pellet_certifies(coeffs: &[Scalar], c: &Scalar, r: &BigRational, m: usize) -> bool {
    let shifted = poly_taylor_shift(coeffs, c);
    // Scale: b_k = a_k r^k.
    let mut rk = BigRational::one();
    let mut lo_m = BigRational::zero();
    let mut sum_hi = BigRational::zero();
    for (k, a) in shifted.iter().enumerate() {
        if k > 0 {
            rk *= r;
        }
        if k == m {
            lo_m = abs_lower_scalar(a) * &rk;
        } else {
            sum_hi += abs_upper_scalar(a) * &rk;
        }
    }
    lo_m > sum_hi
}

fn ball_clusters(coeffs: &[Scalar], prec: u32) -> Result<Vec<RootCluster>> {
    let lead = coeffs.last().unwrap();
    if lead.nonzero_certified() != Some(true) {
        return Err(Error::Input(
            "leading coefficient is not certified nonzero".into(),
        ));
    }
    let deg = coeffs.len() - 1;
    let mid: Vec<Complex64> = coeffs.iter().map(|c| c.to_c64()).collect();
    let approx = aberth_f64(&mid);
    let scale = 1.0
        + approx
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
    // Merge approximations into proximity clusters, coarsening on failure.
    let mut merge_tol = 1e-7 * scale;
    'outer: for _attempt in 0..12 {
        let mut groups: Vec<Vec<Complex64>> = Vec::new();
        let mut used = vec![false; approx.len()];
        for i in 0..approx.len() {
            if used[i] {
                continue;
            }
            let mut g = vec![approx[i]];
            used[i] = true;
            let mut grew = true;
            while grew {
                grew = false;
                for j in 0..approx.len() {
                    if used[j] {
                        continue;
                    }
                    if g.iter().any(|z| (z - approx[j]).norm() < merge_tol) {
                        g.push(approx[j]);
                        used[j] = true;
                        grew = true;
                    }
                }
            }
            groups.push(g);
        }
        let mut disks: Vec<DiskCand> = Vec::new();
        for g in &groups {
            let mean = g.iter().sum::<Complex64>() / g.len() as f64;
            let spread = g
                .iter()
                .map(|z| (z - mean).norm())
                .fold(0.0f64, f64::max);
            let (cre, _) = dyadic_round(
                &BigRational::from_float(mean.re).unwrap_or_else(BigRational::zero),
                prec,
            );
            let (cim, _) = dyadic_round(
                &BigRational::from_float(mean.im).unwrap_or_else(BigRational::zero),
                prec,
            );
            let c = Scalar::Exact(GaussRat::new(cre.clone(), cim.clone()));
            let mut r = BigRational::from_float((2.0 * spread).max(1e-12 * scale))
                .unwrap_or_else(|| pow2(-40));
            let mut ok = false;
            for _ in 0..60 {
                if pellet_certifies(coeffs, &c, &r, g.len()) {
                    ok = true;
                    break;
                }
                r *= BigRational::new(BigInt::from(3), BigInt::from(2));
            }
            if !ok {
                merge_tol *= 8.0;
                continue 'outer;
            }
            disks.push(DiskCand {
                center: Scalar::Ball(Ball {
                    re: cre.clone(),
                    im: cim.clone(),
                    rad: r.clone(),
                    prec,
                }),
                c_re: cre,
                c_im: cim,
                radius: r,
                multiplicity: g.len(),
            });
        }
        let mut disjoint = true;
        for i in 0..disks.len() {
            for j in (i + 1)..disks.len() {
                if !disks_disjoint(&disks[i], &disks[j]) {
                    disjoint = false;
                }
            }
        }
        if !disjoint {
            merge_tol *= 8.0;
            continue 'outer;
        }
        let got: usize = disks.iter().map(|d| d.multiplicity).sum();
        if got != deg {
            return Err(Error::Internal(format!(
                "root count mismatch: certified {} of {} roots",
                got, deg
            )));
        }
        return Ok(disks
            .into_iter()
            .map(|d| RootCluster {
                center: d.center,
                multiplicity: d.multiplicity,
            })
            .collect());
    }
    Err(Error::SeparationFailed(
        "could not certify disjoint root clusters from ball coefficients".into(),
    ))
}

/// Partition the roots of the polynomial (ascending coefficients, certified
/// nonzero lead) into clusters with pairwise disjoint certified disks.
/// Clusters are returned in a deterministic order: descending by (re, im)
/// of their centers.
pub fn isolate_clusters(coeffs: &[Scalar], prec: u32) -> Result<Vec<RootCluster>> {
    let coeffs = trim_scalar(coeffs.to_vec());
    if coeffs.len() <= 1 {
        return Ok(Vec::new());
    }
    let all_exact = coeffs.iter().all(|c| c.is_exact());
    let mut out = if all_exact {
        let gs: Vec<GaussRat> = coeffs
            .iter()
            .map(|c| match c {
                Scalar::Exact(g) => g.clone(),
                _ => unreachable!(),
            })
            .collect();
        exact_clusters(&gs, prec)?
    } else {
        ball_clusters(&coeffs, prec)?
    };
    out.sort_by(|a, b| b.center.cmp_mid_lex(&a.center));
    Ok(out)
}

/// All roots as a multiset (cluster centers repeated by multiplicity),
/// in the same deterministic order as `isolate_clusters`.
pub fn root_multiset(coeffs: &[Scalar], prec: u32) -> Result<Vec<Scalar>> {
    let clusters = isolate_clusters(coeffs, prec)?;
    let mut out = Vec::new();
    for c in clusters {
        for _ in 0..c.multiplicity {
            out.push(c.center.clone());
        }
    }
    Ok(out)
}
