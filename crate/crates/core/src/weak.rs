//! Gluing chart lifts into a piecewise map on the base box, and measuring it.
//!
//! A weak lift is defined off a closed exceptional set E of zero area and
//! finite length: sign-branch hyperplanes of even power substitutions, seams
//! between sibling blow-up charts, and blow-down images of centers. Each
//! piece evaluates one chart's lift at the inverse-substituted parameter; the
//! covering piece at a point is chosen deterministically (smallest chart
//! coordinates relative to the chart box, ties to the lowest index), so the
//! pieces' regions partition the box off E.
//!
//! The verification report estimates the quantities that make the glued map
//! a weak (piecewise Sobolev) or SBV object: sampled residual of the defining
//! identity, sup bound off E, a grid ladder for the gradient integral, seam
//! jump mass, and in real mode a Lipschitz sup ladder. Gradient integrals
//! use the anisotropic norm (sum of absolute partials, maximized over fiber
//! components) and are computed as sliced one-dimensional variations with
//! one-sided closure values at E, which telescope exactly on monotone pieces
//! instead of losing half an order to the E-singularity.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::desing::{chain_forward_point, ChartMap, ResolutionTree};
use crate::error::{Error, Result};
use crate::invariants::{Family, InvariantSystem, Membership};
use crate::lifter::{parity_eps, verify_chart, LiftChart, LiftProblem};
use crate::scalar::Scalar;
use crate::series::Series;

/// One-dimensional pieces of the exceptional set, stored by exact endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ESegment {
    pub a: Vec<Scalar>,
    pub b: Vec<Scalar>,
}

impl ESegment {
    pub fn length(&self) -> f64 {
        let mut acc = 0.0;
        for (x, y) in self.a.iter().zip(&self.b) {
            let d = scalar_re_f64(x) - scalar_re_f64(y);
            acc += d * d;
        }
        acc.sqrt()
    }
}

/// The closed set off which the glued lift is defined. Points carry
/// counting measure (curves: branch points and blow-down images), segments
/// carry length.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub points: Vec<Vec<Scalar>>,
    pub segments: Vec<ESegment>,
    /// True when some component was pushed through a nonlinear step and is
    /// recorded by its endpoints only.
    pub approximate: bool,
}

impl ExceptionalSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.segments.is_empty()
    }

    /// Counting measure of the points plus total length of the segments:
    /// the codimension-one content for curves (q=1) respectively surfaces.
    pub fn measure(&self) -> f64 {
        self.points.len() as f64 + self.segments.iter().map(ESegment::length).sum::<f64>()
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let mut d = f64::INFINITY;
        for p in &self.points {
            let mut acc = 0.0;
            for (xj, pj) in x.iter().zip(p) {
                let t = xj - scalar_re_f64(pj);
                acc += t * t;
            }
            d = d.min(acc.sqrt());
        }
        for s in &self.segments {
            d = d.min(dist_point_segment(x, &s.a, &s.b));
        }
        d
    }

    fn push_point(&mut self, p: Vec<Scalar>) {
        if !self.points.contains(&p) {
            self.points.push(p);
        }
    }

    fn push_segment(&mut self, s: ESegment) {
        if !self.segments.contains(&s) {
            self.segments.push(s);
        }
    }

    pub fn merge(&mut self, other: &ExceptionalSet) {
        for p in &other.points {
            self.push_point(p.clone());
        }
        for s in &other.segments {
            self.push_segment(s.clone());
        }
        self.approximate |= other.approximate;
    }
}

/// One piece of the glued lift: a chart plus the sign constraints its
/// outermost power substitution imposes on the base coordinates
/// (+1 nonnegative, -1 nonpositive, 0 unconstrained).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftPiece {
    pub chart: LiftChart,
    pub orthant: Vec<i8>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLift {
    pub sys: InvariantSystem,
    /// Base dimension; for fiberwise sections, the invariant-space dimension.
    pub q: u8,
    /// Box half-widths per axis.
    pub radius: Vec<Scalar>,
    pub pieces: Vec<LiftPiece>,
    pub exceptional: ExceptionalSet,
    /// Evaluate by certified root isolation at the sample instead of through
    /// chart pieces (sections of the quotient map).
    pub fiberwise: bool,
    pub provenance: Vec<String>,
}

impl WeakLift {
    pub fn fiber_len(&self) -> usize {
        self.sys.fiber_degree()
    }

    /// The covering piece at x and the chart coordinates of x under it:
    /// smallest max-ratio to the chart box wins, ties to the lowest index.
    pub fn locate(&self, x: &[f64]) -> Option<(usize, Vec<f64>)> {
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for (i, piece) in self.pieces.iter().enumerate() {
            if let Some(u) = invert_chain_f64(&piece.chart.chain, x) {
                let mut score = 0.0f64;
                for (uj, rj) in u.iter().zip(&piece.chart.rho) {
                    let r = scalar_re_f64(rj).max(f64::MIN_POSITIVE);
                    score = score.max(uj.abs() / r);
                }
                if score <= 1.0 + 1e-9 && best.as_ref().is_none_or(|(_, _, s)| score < *s) {
                    best = Some((i, u, score));
                }
            }
        }
        best.map(|(i, u, _)| (i, u))
    }

    /// Value at a base point, None on E or outside every piece. Fiberwise
    /// lifts isolate the fiber at the sample instead.
    pub fn eval(&self, x: &[f64]) -> Option<Vec<Complex64>> {
        if self.fiberwise {
            let z: Vec<Scalar> = x
                .iter()
                .map(|v| BigRational::from_float(*v).map(Scalar::from_rational))
                .collect::<Option<Vec<Scalar>>>()?;
            let roots = self
                .sys
                .roots_from_invariants(&z, crate::scalar::DEFAULT_PREC)
                .ok()?;
            let reps = canonical_section_point(&self.sys, roots);
            return Some(reps.iter().map(Scalar::to_c64).collect());
        }
        if self.exceptional.distance(x) == 0.0 {
            return None;
        }
        let (i, u) = self.locate(x)?;
        Some(piece_values(&self.pieces[i], &u))
    }
}

/// Grid diagnostics configuration. Levels are dyadic: level L uses 2^L cells
/// per axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub levels: Vec<u32>,
    /// Relative Cauchy tolerance on the last two gradient integrals.
    pub cauchy_tol: f64,
    /// Relative stability tolerance on the last two Lipschitz sups.
    pub lipschitz_tol: f64,
    /// Dyadic level of the per-chart residual grid.
    pub residual_level: u32,
    pub precision: u32,
}

impl VerifyOptions {
    pub fn for_dim(q: u8) -> Self {
        VerifyOptions {
            levels: if q <= 1 {
                vec![6, 8, 10, 12]
            } else {
                vec![4, 5, 6, 7]
            },
            cauchy_tol: 1e-3,
            lipschitz_tol: 0.05,
            residual_level: 4,
            precision: crate::scalar::DEFAULT_PREC,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Certified upper bound on the defining-identity residual over the
    /// sampled points (exact arithmetic through the chart's own grid).
    pub residual_sup: Scalar,
    pub residual_exact: bool,
    /// Truncation order up to which the identity could be compared, when the
    /// data is not polynomial.
    pub residual_order: Option<u32>,
    pub residual_pass: bool,
    pub residual_samples: usize,
    /// Sup of |f̄| over off-E samples at the finest level.
    pub sup_value: f64,
    /// A priori fiber bound derived from |f| on the box.
    pub value_bound: f64,
    pub bounded_pass: bool,
    pub grid_levels: Vec<u32>,
    /// Anisotropic gradient integral estimates, one per level.
    pub gradient_integrals: Vec<f64>,
    /// Relative change across the last two levels.
    pub gradient_cauchy: Option<f64>,
    pub gradient_pass: bool,
    /// Jump mass across seams at the finest level (length-weighted for q=2).
    pub jump_total: f64,
    /// Constructed codimension-one content of E.
    pub exceptional_measure: f64,
    /// Fraction of grid nodes within snap distance of E, per level.
    pub exceptional_node_fraction: Vec<f64>,
    pub lipschitz_sups: Vec<f64>,
    pub lipschitz_change: Option<f64>,
    /// Real-mode verdict; None for complex data.
    pub lipschitz_pass: Option<bool>,
    pub sbv_pass: bool,
    pub coverage_pass: bool,
    pub messages: Vec<String>,
}

/// One grid sample for plot dumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRow {
    pub x: Vec<f64>,
    /// Fiber values as (re, im) pairs; None on E or uncovered points.
    pub value: Option<Vec<(f64, f64)>>,
    /// Anisotropic gradient norm when a one-piece stencil fits.
    pub grad: Option<f64>,
    pub on_e: bool,
}

fn scalar_re_f64(s: &Scalar) -> f64 {
    s.to_c64().re
}

/// One point per orbit: the signed family's fiber carries both signs of
/// every nonzero coordinate, and the section keeps the nonnegative ones.
fn canonical_section_point(sys: &InvariantSystem, roots: Vec<Scalar>) -> Vec<Scalar> {
    if sys.family != Family::SignedPermReal {
        return roots;
    }
    let mut reps = Vec::new();
    let mut zeros = 0usize;
    for r in roots {
        match r.sign_certified() {
            Some(std::cmp::Ordering::Greater) => reps.push(r),
            Some(std::cmp::Ordering::Equal) => zeros += 1,
            _ => {}
        }
    }
    for _ in 0..zeros / 2 {
        reps.push(Scalar::zero());
    }
    reps
}

fn scalar_real_f64(s: &Scalar) -> Option<f64> {
    let c = s.to_c64();
    if c.im.abs() > 1e-12 * (1.0 + c.re.abs()) {
        None
    } else {
        Some(c.re)
    }
}

fn dist_point_segment(x: &[f64], a: &[Scalar], b: &[Scalar]) -> f64 {
    let av: Vec<f64> = a.iter().map(scalar_re_f64).collect();
    let bv: Vec<f64> = b.iter().map(scalar_re_f64).collect();
    let mut ab2 = 0.0;
    let mut apx = 0.0;
    for j in 0..av.len() {
        let d = bv[j] - av[j];
        ab2 += d * d;
        apx += (x[j] - av[j]) * d;
    }
    let t = if ab2 > 0.0 {
        (apx / ab2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut acc = 0.0;
    for j in 0..av.len() {
        let p = av[j] + t * (bv[j] - av[j]);
        acc += (x[j] - p) * (x[j] - p);
    }
    acc.sqrt()
}

/// Inverse of the substitution chain at a real base point: None when some
/// step does not cover it (wrong sign orthant, blow-up axis, complex
/// offset). Power substitutions invert to (-1)^eps |x|^(1/gamma) on even
/// axes and to the sign-preserving odd root otherwise.
pub fn invert_chain_f64(chain: &[ChartMap], x: &[f64]) -> Option<Vec<f64>> {
    let mut u = x.to_vec();
    for step in chain {
        match step {
            ChartMap::Translation { offset } => {
                if offset.len() != u.len() {
                    return None;
                }
                for (uj, c) in u.iter_mut().zip(offset) {
                    *uj -= scalar_real_f64(c)?;
                }
            }
            ChartMap::BlowUp { center, index } => {
                if u.len() != 2 {
                    return None;
                }
                let v0 = u[0] - scalar_real_f64(&center[0])?;
                let v1 = u[1] - scalar_real_f64(&center[1])?;
                u = if *index == 0 {
                    if v0 == 0.0 {
                        return None;
                    }
                    vec![v0, v1 / v0]
                } else {
                    if v1 == 0.0 {
                        return None;
                    }
                    vec![v0 / v1, v1]
                };
            }
            ChartMap::PowerSubstitution { gamma, eps } => {
                if gamma.len() != u.len() {
                    return None;
                }
                for j in 0..u.len() {
                    let g = gamma[j];
                    if g == 0 {
                        return None;
                    }
                    let sign = if eps[j] % 2 == 1 { -1.0 } else { 1.0 };
                    let xj = u[j];
                    if g == 1 {
                        u[j] = sign * xj;
                    } else if g % 2 == 0 {
                        let w = sign * xj;
                        if w < -1e-12 {
                            return None;
                        }
                        u[j] = sign * w.max(0.0).powf(1.0 / g as f64);
                    } else {
                        u[j] = sign * xj.signum() * xj.abs().powf(1.0 / g as f64);
                    }
                }
            }
        }
    }
    Some(u)
}

fn piece_values(piece: &LiftPiece, u: &[f64]) -> Vec<Complex64> {
    let uc: Vec<Complex64> = u.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    piece.chart.lift.iter().map(|s| s.eval_c64(&uc)).collect()
}

/// Forced evaluation through one piece, tolerating the closed chart box:
/// used for one-sided closure values at seams and E.
fn piece_eval(piece: &LiftPiece, x: &[f64]) -> Option<Vec<Complex64>> {
    let u = invert_chain_f64(&piece.chart.chain, x)?;
    for (uj, rj) in u.iter().zip(&piece.chart.rho) {
        if uj.abs() > scalar_re_f64(rj) * (1.0 + 1e-6) + 1e-12 {
            return None;
        }
    }
    Some(piece_values(piece, &u))
}

/// Exact n-th root of a nonnegative rational, when one exists.
fn rational_nth_root(r: &BigRational, n: u32) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let num = r.numer().nth_root(n);
    let den = r.denom().nth_root(n);
    let cand = BigRational::new(num, den);
    if pow_rat(&cand, n) == *r {
        Some(cand)
    } else {
        None
    }
}

fn pow_rat(r: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..n {
        acc *= r;
    }
    acc
}

/// Exact inverse of a pure power-substitution chain at a real rational
/// point, when the roots are rational. Verifies the orthant-gluing identity
/// on forward-sampled points.
fn invert_power_chain_exact(chain: &[ChartMap], x: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut u = x.to_vec();
    for step in chain {
        let ChartMap::PowerSubstitution { gamma, eps } = step else {
            return None;
        };
        for j in 0..u.len() {
            let g = gamma[j];
            let sign_flip = eps[j] % 2 == 1;
            let xj = if sign_flip { -u[j].clone() } else { u[j].clone() };
            if g % 2 == 0 {
                if xj.is_negative() {
                    return None;
                }
                let root = rational_nth_root(&xj, g)?;
                u[j] = if sign_flip { -root } else { root };
            } else {
                let root = rational_nth_root(&xj.abs(), g)?;
                let mut t = if xj.is_negative() { -root } else { root };
                if sign_flip {
                    t = -t;
                }
                u[j] = t;
            }
        }
    }
    Some(u)
}

// ---- construction ----

fn chain_label(chain: &[ChartMap]) -> String {
    if chain.is_empty() {
        return "identity".into();
    }
    let mut parts = Vec::new();
    for step in chain {
        match step {
            ChartMap::Translation { .. } => parts.push("translate".to_string()),
            ChartMap::BlowUp { index, .. } => parts.push(format!("blowup[{index}]")),
            ChartMap::PowerSubstitution { gamma, eps } => {
                parts.push(format!("psi(gamma={gamma:?}, eps={eps:?})"))
            }
        }
    }
    parts.join(" . ")
}

fn orthant_of(chain: &[ChartMap], q: usize) -> Vec<i8> {
    let mut orth = vec![0i8; q];
    if let Some(ChartMap::PowerSubstitution { gamma, eps }) = chain.first() {
        for j in 0..q.min(gamma.len()) {
            if gamma[j] % 2 == 0 {
                orth[j] = if eps[j] % 2 == 1 { -1 } else { 1 };
            }
        }
    }
    orth
}

/// Loci carried outward while reconstructing a chart's exceptional
/// contribution in base coordinates.
enum Locus {
    Point(Vec<Scalar>),
    /// axis = Some(j) marks a segment inside {coord_j = 0}.
    Seg {
        a: Vec<Scalar>,
        b: Vec<Scalar>,
        axis: Option<usize>,
        exact: bool,
    },
}

fn push_locus_forward(locus: Locus, step: &ChartMap) -> Result<Locus> {
    match locus {
        Locus::Point(p) => Ok(Locus::Point(step.forward_point(&p)?)),
        Locus::Seg { a, b, axis, exact } => match step {
            ChartMap::Translation { offset } => {
                let na = step.forward_point(&a)?;
                let nb = step.forward_point(&b)?;
                let keep = axis.filter(|j| offset[*j].is_zero_exact());
                Ok(Locus::Seg {
                    a: na,
                    b: nb,
                    axis: keep,
                    exact,
                })
            }
            ChartMap::BlowUp { center, index } => {
                let collapse = matches!((axis, *index), (Some(0), 0) | (Some(1), 1));
                if collapse {
                    return Ok(Locus::Point(center.clone()));
                }
                let na = step.forward_point(&a)?;
                let nb = step.forward_point(&b)?;
                let keep = axis.filter(|j| center[*j].is_zero_exact());
                // A segment along the surviving coordinate axis stays a
                // segment; anything else bends and is kept by endpoints.
                let still_exact = exact && axis.is_some();
                Ok(Locus::Seg {
                    a: na,
                    b: nb,
                    axis: keep,
                    exact: still_exact,
                })
            }
            ChartMap::PowerSubstitution { .. } => {
                let mut na = step.forward_point(&a)?;
                let nb = step.forward_point(&b)?;
                // An axis segment folded by an even power covers the image
                // segment twice: both endpoints coincide, and the image runs
                // from the origin to either one.
                if axis.is_some() && na == nb {
                    na = vec![Scalar::zero(); na.len()];
                }
                // Axis segments map to axis segments; even powers fold other
                // segments, which are then only endpoint-accurate.
                let folded = axis.is_none();
                Ok(Locus::Seg {
                    a: na,
                    b: nb,
                    axis,
                    exact: exact && !folded,
                })
            }
        },
    }
}

fn axis_segment(q: usize, axis: usize, extent: &BigRational) -> Locus {
    let mut a = vec![Scalar::zero(); q];
    let mut b = vec![Scalar::zero(); q];
    for j in 0..q {
        if j != axis {
            a[j] = Scalar::from_rational(-extent.clone());
            b[j] = Scalar::from_rational(extent.clone());
        }
    }
    Locus::Seg {
        a,
        b,
        axis: Some(axis),
        exact: true,
    }
}

/// Exceptional contribution and conservative forward box radius of one
/// chart, reconstructed by walking its chain from the innermost step out.
fn chart_geometry(chart: &LiftChart, q: usize) -> Result<(ExceptionalSet, Vec<BigRational>)> {
    let mut radius: Vec<BigRational> = chart
        .rho
        .iter()
        .map(|s| s.mid().0.min(BigRational::one()))
        .collect();
    if radius.len() != q {
        return Err(Error::Internal("chart box dimension mismatch".into()));
    }
    let mut loci: Vec<Locus> = Vec::new();
    for step in chart.chain.iter().rev() {
        // Map everything collected so far through this step.
        let mut next = Vec::with_capacity(loci.len());
        for l in loci {
            next.push(push_locus_forward(l, step)?);
        }
        loci = next;
        match step {
            ChartMap::Translation { offset } => {
                for (r, c) in radius.iter_mut().zip(offset) {
                    let shift = c.abs_upper();
                    *r = if *r > shift {
                        r.clone() - shift
                    } else {
                        BigRational::zero()
                    };
                }
            }
            ChartMap::PowerSubstitution { gamma, eps: _ } => {
                for j in 0..q {
                    radius[j] = pow_rat(&radius[j], gamma[j]);
                }
                for (j, g) in gamma.iter().enumerate() {
                    if g % 2 == 0 {
                        let extent = radius
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, r)| r.clone())
                            .max()
                            .unwrap_or_else(BigRational::one);
                        if q == 1 {
                            loci.push(Locus::Point(vec![Scalar::zero()]));
                        } else {
                            loci.push(axis_segment(q, j, &extent));
                        }
                    }
                }
            }
            ChartMap::BlowUp { center, index: _ } => {
                if q != 2 {
                    return Err(Error::Input("blow-ups act on plane domains".into()));
                }
                let m = radius[0].clone().min(radius[1].clone());
                let new_r = vec![
                    radius[0].clone() * m.clone(),
                    radius[1].clone() * m.clone(),
                ];
                radius = new_r;
                loci.push(Locus::Point(center.clone()));
                let me = Scalar::from_rational(m.clone());
                let c0 = &center[0];
                let c1 = &center[1];
                loci.push(Locus::Seg {
                    a: vec![c0.sub(&me), c1.sub(&me)],
                    b: vec![c0.add(&me), c1.add(&me)],
                    axis: None,
                    exact: true,
                });
                loci.push(Locus::Seg {
                    a: vec![c0.sub(&me), c1.add(&me)],
                    b: vec![c0.add(&me), c1.sub(&me)],
                    axis: None,
                    exact: true,
                });
            }
        }
    }
    let mut exc = ExceptionalSet::default();
    for l in loci {
        match l {
            Locus::Point(p) => exc.push_point(p),
            Locus::Seg { a, b, exact, .. } => {
                if !exact {
                    exc.approximate = true;
                }
                exc.push_segment(ESegment { a, b });
            }
        }
    }
    Ok((exc, radius))
}

fn build_weak_lift(
    sys: InvariantSystem,
    q: u8,
    charts: &[LiftChart],
    provenance: Vec<String>,
    radius_override: Option<Vec<Scalar>>,
) -> Result<WeakLift> {
    if charts.is_empty() {
        return Err(Error::Input("no charts to glue".into()));
    }
    let mut exc = ExceptionalSet::default();
    let mut radius: Option<Vec<BigRational>> = None;
    let mut pieces = Vec::with_capacity(charts.len());
    for chart in charts {
        let (e, r) = chart_geometry(chart, q as usize)?;
        exc.merge(&e);
        // Charts translated away from the origin cover only part of the box;
        // they refine the pieces but do not constrain the covered radius.
        if r.iter().all(|v| v.is_positive()) {
            radius = Some(match radius {
                None => r,
                Some(cur) => cur.into_iter().zip(r).map(|(a, b)| a.min(b)).collect(),
            });
        }
        pieces.push(LiftPiece {
            orthant: orthant_of(&chart.chain, q as usize),
            label: chain_label(&chart.chain),
            chart: chart.clone(),
        });
    }
    let radius = match radius_override {
        Some(r) => r,
        None => radius
            .ok_or_else(|| {
                Error::Input("no glued chart covers a neighborhood of the origin".into())
            })?
            .into_iter()
            .map(Scalar::from_rational)
            .collect(),
    };
    let wl = WeakLift {
        sys,
        q,
        radius,
        pieces,
        exceptional: exc,
        fiberwise: false,
        provenance,
    };
    check_coverage(&wl)?;
    Ok(wl)
}

/// Sampled partition check: every node off E must be covered by a piece.
fn check_coverage(wl: &WeakLift) -> Result<()> {
    let level = 5u32;
    let n = 1usize << level;
    let r: Vec<f64> = wl.radius.iter().map(scalar_re_f64).collect();
    let snap = r.iter().cloned().fold(0.0f64, f64::max) / n as f64;
    let mut gaps = Vec::new();
    let mut probe = |x: &[f64]| {
        if wl.exceptional.distance(x) > snap && wl.locate(x).is_none() {
            gaps.push(x.to_vec());
        }
    };
    if wl.q == 1 {
        for k in 0..=n {
            let x = -r[0] + 2.0 * r[0] * k as f64 / n as f64;
            probe(&[x]);
        }
    } else {
        for ky in 0..=n {
            let y = -r[1] + 2.0 * r[1] * ky as f64 / n as f64;
            for kx in 0..=n {
                let x = -r[0] + 2.0 * r[0] * kx as f64 / n as f64;
                probe(&[x, y]);
            }
        }
    }
    if gaps.is_empty() {
        Ok(())
    } else {
        Err(Error::VerificationFailed(format!(
            "coverage gap: {} off-E samples hit no chart piece, first at {:?}",
            gaps.len(),
            gaps[0]
        )))
    }
}

/// Glue the ε-family of charts of one power substitution into a weak lift
/// on the image box. Chains must consist of that single substitution.
pub fn glue_power_substitution(sys: InvariantSystem, charts: &[LiftChart]) -> Result<WeakLift> {
    if charts.is_empty() {
        return Err(Error::Input("no charts to glue".into()));
    }
    let gamma = match charts[0].chain.first() {
        None => {
            if charts.len() != 1 {
                return Err(Error::Input(
                    "identity substitution admits exactly one chart".into(),
                ));
            }
            return build_weak_lift(
                sys,
                charts[0].lift[0].nvars,
                charts,
                vec!["power-substitution gluing (identity)".into()],
                None,
            );
        }
        Some(ChartMap::PowerSubstitution { gamma, .. }) => gamma.clone(),
        Some(other) => {
            return Err(Error::Input(format!(
                "power-substitution gluing got a chain starting with {other:?}"
            )))
        }
    };
    let mut seen = Vec::new();
    for chart in charts {
        match &chart.chain[..] {
            [ChartMap::PowerSubstitution { gamma: g, eps }] if *g == gamma => {
                seen.push(eps.clone())
            }
            other => {
                return Err(Error::Input(format!(
                    "expected a single power substitution with gamma {gamma:?}, got {other:?}"
                )))
            }
        }
    }
    for eps in parity_eps(&gamma) {
        if !seen.contains(&eps) {
            return Err(Error::Input(format!(
                "missing the eps = {eps:?} chart of gamma = {gamma:?}"
            )));
        }
    }
    build_weak_lift(
        sys,
        gamma.len() as u8,
        charts,
        vec![format!("power-substitution gluing, gamma = {gamma:?}")],
        None,
    )
}

/// Push per-leaf lifts of a plane resolution down to the base. Chains must
/// be free of power substitutions; the blow-down images of the centers and
/// the chart seams enter E.
pub fn glue_blow_down(
    sys: InvariantSystem,
    tree: &ResolutionTree,
    charts: &[LiftChart],
) -> Result<WeakLift> {
    if charts.len() != tree.leaves.len() {
        return Err(Error::Input(format!(
            "resolution has {} leaves but {} charts were supplied",
            tree.leaves.len(),
            charts.len()
        )));
    }
    for chart in charts {
        if chart
            .chain
            .iter()
            .any(|s| matches!(s, ChartMap::PowerSubstitution { .. }))
        {
            return Err(Error::Input(
                "blow-down gluing expects blow-up and translation chains only".into(),
            ));
        }
    }
    build_weak_lift(
        sys,
        tree.nvars,
        charts,
        vec![format!(
            "blow-down gluing of {} leaves ({} blow-ups)",
            tree.leaves.len(),
            tree.blowups
        )],
        Some(vec![tree.covered_radius.clone(); tree.nvars as usize]),
    )
}

/// Combine weak lifts on a common center into one, keeping the input order
/// as the selection priority and intersecting the boxes.
pub fn patch_charts(parts: Vec<WeakLift>) -> Result<WeakLift> {
    let mut it = parts.into_iter();
    let Some(mut acc) = it.next() else {
        return Err(Error::Input("nothing to patch".into()));
    };
    for part in it {
        if part.sys != acc.sys || part.q != acc.q {
            return Err(Error::Input(
                "patched lifts disagree on the system or base dimension".into(),
            ));
        }
        if part.fiberwise || acc.fiberwise {
            return Err(Error::Input("fiberwise sections cannot be patched".into()));
        }
        for (r, s) in acc.radius.iter_mut().zip(&part.radius) {
            let a = r.mid().0;
            let b = s.mid().0;
            *r = Scalar::from_rational(a.min(b));
        }
        acc.pieces.extend(part.pieces);
        acc.exceptional.merge(&part.exceptional);
        acc.provenance.extend(part.provenance);
    }
    acc.provenance.push(format!(
        "patched to {} pieces, priority by position",
        acc.pieces.len()
    ));
    check_coverage(&acc)?;
    Ok(acc)
}

// ---- verification ----

struct LevelScan {
    integral: f64,
    jump: f64,
    lipschitz: f64,
    sup_value: f64,
    on_e_nodes: usize,
    total_nodes: usize,
    uncovered: usize,
}

enum NodeState {
    OnE,
    Uncovered,
    Val(usize, Vec<Complex64>),
}

fn classify(wl: &WeakLift, x: &[f64], snap: f64) -> NodeState {
    if wl.exceptional.distance(x) < snap {
        return NodeState::OnE;
    }
    match wl.locate(x) {
        None => NodeState::Uncovered,
        Some((i, u)) => NodeState::Val(i, piece_values(&wl.pieces[i], &u)),
    }
}

/// One-dimensional sweep shared by rows, columns, and curves: per-piece
/// variation with one-sided closure values, plus seam jumps.
fn sweep_line(
    wl: &WeakLift,
    points: &[Vec<f64>],
    snap: f64,
    var_out: &mut [f64],
    jump_out: &mut f64,
    sup_out: &mut f64,
    on_e: &mut usize,
    uncovered: &mut usize,
) {
    let ncomp = var_out.len();
    let states: Vec<NodeState> = points.iter().map(|x| classify(wl, x, snap)).collect();
    for st in &states {
        match st {
            NodeState::OnE => *on_e += 1,
            NodeState::Uncovered => *uncovered += 1,
            NodeState::Val(_, v) => {
                for c in v {
                    *sup_out = sup_out.max(c.norm());
                }
            }
        }
    }
    // Per-piece runs, extended by one closure node on each side.
    let mut k = 0usize;
    while k < states.len() {
        let NodeState::Val(p, _) = states[k] else {
            k += 1;
            continue;
        };
        let mut end = k;
        while end + 1 < states.len() {
            if let NodeState::Val(pn, _) = states[end + 1] {
                if pn == p {
                    end += 1;
                    continue;
                }
            }
            break;
        }
        let mut values: Vec<Vec<Complex64>> = Vec::with_capacity(end - k + 3);
        if k > 0 {
            if let Some(v) = piece_eval(&wl.pieces[p], &points[k - 1]) {
                values.push(v);
            }
        }
        for st in states.iter().take(end + 1).skip(k) {
            if let NodeState::Val(_, v) = st {
                values.push(v.clone());
            }
        }
        if end + 1 < states.len() {
            if let Some(v) = piece_eval(&wl.pieces[p], &points[end + 1]) {
                values.push(v);
            }
        }
        for w in values.windows(2) {
            for c in 0..ncomp {
                var_out[c] += (w[1][c] - w[0][c]).norm();
            }
        }
        k = end + 1;
    }
    // Jumps: adjacent nodes owned by different pieces, or an E node between
    // two pieces; measured as the gap of the one-sided closure values.
    let mut record_jump = |left: usize, at: usize, right: usize| {
        let (Some(va), Some(vb)) = (
            piece_eval(&wl.pieces[left], &points[at]),
            piece_eval(&wl.pieces[right], &points[at]),
        ) else {
            return;
        };
        let mut gap = 0.0f64;
        for c in 0..ncomp {
            gap = gap.max((va[c] - vb[c]).norm());
        }
        *jump_out += gap;
    };
    for k in 0..states.len().saturating_sub(1) {
        if let (NodeState::Val(p, _), NodeState::Val(q, _)) = (&states[k], &states[k + 1]) {
            if p != q {
                record_jump(*p, k, *q);
            }
        }
    }
    for k in 1..states.len().saturating_sub(1) {
        if matches!(states[k], NodeState::OnE) {
            if let (NodeState::Val(p, _), NodeState::Val(q, _)) = (&states[k - 1], &states[k + 1])
            {
                if p != q {
                    record_jump(*p, k, *q);
                }
            }
        }
    }
}

fn lipschitz_at(wl: &WeakLift, x: &[f64], h: f64) -> Option<f64> {
    let (i, _) = wl.locate(x)?;
    let piece = &wl.pieces[i];
    let mut total = 0.0f64;
    let ncomp = piece.chart.lift.len();
    let mut per_comp = vec![0.0f64; ncomp];
    for axis in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[axis] += h / 2.0;
        xm[axis] -= h / 2.0;
        let vp = piece_eval(piece, &xp)?;
        let vm = piece_eval(piece, &xm)?;
        for c in 0..ncomp {
            per_comp[c] += (vp[c] - vm[c]).norm() / h;
        }
    }
    for v in per_comp {
        total = total.max(v);
    }
    Some(total)
}

fn dyadic_nodes(r: f64, level: u32) -> Vec<f64> {
    let n = 1usize << level;
    (0..=n).map(|k| -r + 2.0 * r * k as f64 / n as f64).collect()
}

fn dyadic_centers(r: f64, level: u32) -> Vec<f64> {
    let n = 1usize << level;
    (0..n)
        .map(|k| -r + 2.0 * r * (k as f64 + 0.5) / n as f64)
        .collect()
}

fn scan_level(wl: &WeakLift, level: u32) -> LevelScan {
    let ncomp = wl.fiber_len();
    let r: Vec<f64> = wl.radius.iter().map(scalar_re_f64).collect();
    let mut scan = LevelScan {
        integral: 0.0,
        jump: 0.0,
        lipschitz: 0.0,
        sup_value: 0.0,
        on_e_nodes: 0,
        total_nodes: 0,
        uncovered: 0,
    };
    if wl.q == 1 {
        let h = 2.0 * r[0] / (1usize << level) as f64;
        let snap = h / 2.0;
        let nodes = dyadic_nodes(r[0], level);
        scan.total_nodes = nodes.len();
        let pts: Vec<Vec<f64>> = nodes.iter().map(|x| vec![*x]).collect();
        let mut var = vec![0.0f64; ncomp];
        sweep_line(
            wl,
            &pts,
            snap,
            &mut var,
            &mut scan.jump,
            &mut scan.sup_value,
            &mut scan.on_e_nodes,
            &mut scan.uncovered,
        );
        scan.integral = var.iter().cloned().fold(0.0, f64::max);
        for m in dyadic_centers(r[0], level) {
            if wl.exceptional.distance(&[m]) < snap {
                continue;
            }
            if let Some(l) = lipschitz_at(wl, &[m], h) {
                scan.lipschitz = scan.lipschitz.max(l);
            }
        }
        return scan;
    }
    let hx = 2.0 * r[0] / (1usize << level) as f64;
    let hy = 2.0 * r[1] / (1usize << level) as f64;
    let snap = hx.min(hy) / 2.0;
    let xs = dyadic_nodes(r[0], level);
    let ys = dyadic_nodes(r[1], level);
    let xcs = dyadic_centers(r[0], level);
    let ycs = dyadic_centers(r[1], level);
    scan.total_nodes = xs.len() * ys.len();
    let mut var = vec![0.0f64; ncomp];
    let mut raw_jump = 0.0f64;
    for y in &ycs {
        let pts: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x, *y]).collect();
        let mut row_var = vec![0.0f64; ncomp];
        let mut discard_e = 0usize;
        let mut discard_cov = 0usize;
        sweep_line(
            wl,
            &pts,
            snap,
            &mut row_var,
            &mut raw_jump,
            &mut scan.sup_value,
            &mut discard_e,
            &mut discard_cov,
        );
        for c in 0..ncomp {
            var[c] += hy * row_var[c];
        }
    }
    for x in &xcs {
        let pts: Vec<Vec<f64>> = ys.iter().map(|y| vec![*x, *y]).collect();
        let mut col_var = vec![0.0f64; ncomp];
        let mut discard_e = 0usize;
        let mut discard_cov = 0usize;
        sweep_line(
            wl,
            &pts,
            snap,
            &mut col_var,
            &mut raw_jump,
            &mut scan.sup_value,
            &mut discard_e,
            &mut discard_cov,
        );
        for c in 0..ncomp {
            var[c] += hx * col_var[c];
        }
    }
    scan.integral = var.iter().cloned().fold(0.0, f64::max);
    scan.jump = raw_jump * hx.max(hy);
    for y in &ys {
        for x in &xs {
            let p = [*x, *y];
            if wl.exceptional.distance(&p) < snap {
                scan.on_e_nodes += 1;
            } else if wl.locate(&p).is_none() {
                scan.uncovered += 1;
            }
        }
    }
    for y in &ycs {
        for x in &xcs {
            let p = [*x, *y];
            if wl.exceptional.distance(&p) < snap {
                continue;
            }
            if let Some(l) = lipschitz_at(wl, &p, hx.min(hy)) {
                scan.lipschitz = scan.lipschitz.max(l);
            }
        }
    }
    scan
}

/// Exact residual sampling: per exact-polynomial chart, a dyadic grid on the
/// chart box is pushed forward through the chain and the defining identity
/// is evaluated in rational arithmetic. Power-substitution charts also check
/// the orthant-gluing round trip exactly.
struct ResidualSummary {
    sup: BigRational,
    exact: bool,
    ok: bool,
    count: usize,
    messages: Vec<String>,
}

fn residual_samples(wl: &WeakLift, f: &[Series], level: u32) -> Result<ResidualSummary> {
    let mut sup = BigRational::zero();
    let mut exact = true;
    let mut ok = true;
    let mut count = 0usize;
    let mut messages = Vec::new();
    let n = 1usize << level;
    for piece in &wl.pieces {
        let chart = &piece.chart;
        if !chart.lift.iter().all(|s| s.is_polynomial() && s.is_exact()) {
            messages.push(format!(
                "chart '{}' carries truncated series; its identity is checked \
                 coefficientwise, not pointwise",
                piece.label
            ));
            continue;
        }
        let rho: Vec<BigRational> = chart.rho.iter().map(|s| s.mid().0).collect();
        let psi_only = chart
            .chain
            .iter()
            .all(|s| matches!(s, ChartMap::PowerSubstitution { .. }));
        let mut grid: Vec<Vec<Scalar>> = Vec::new();
        let axis_points = |r: &BigRational| -> Vec<BigRational> {
            (0..=n)
                .map(|k| {
                    r * (BigRational::from_integer(BigInt::from(2 * k as i64 - n as i64))
                        / BigRational::from_integer(BigInt::from(n as i64)))
                })
                .collect()
        };
        if wl.q == 1 {
            for t in axis_points(&rho[0]) {
                grid.push(vec![Scalar::from_rational(t)]);
            }
        } else {
            let ax = axis_points(&rho[0]);
            let ay = axis_points(&rho[1]);
            for ty in &ay {
                for tx in &ax {
                    grid.push(vec![
                        Scalar::from_rational(tx.clone()),
                        Scalar::from_rational(ty.clone()),
                    ]);
                }
            }
        }
        for t in grid {
            let roots: Vec<Scalar> = chart.lift.iter().map(|s| s.eval_exact(&t)).collect();
            let sigma = wl.sys.sigma_eval(&roots)?;
            let x = chain_forward_point(&chart.chain, &t)?;
            for (j, fj) in f.iter().enumerate() {
                let diff = sigma[j].sub(&fj.eval_exact(&x));
                if diff.nonzero_certified() == Some(true) {
                    if ok {
                        messages.push(format!(
                            "identity residual is certified nonzero on chart '{}'",
                            piece.label
                        ));
                    }
                    ok = false;
                }
                if !(diff.is_exact() && diff.nonzero_certified() == Some(false)) {
                    exact = false;
                }
                let r = diff.abs_upper();
                if r > sup {
                    sup = r;
                }
            }
            if psi_only && !chart.chain.is_empty() {
                let xr: Vec<BigRational> = x.iter().map(|s| s.mid().0).collect();
                let back = invert_power_chain_exact(&chart.chain, &xr);
                let tr: Vec<BigRational> = t.iter().map(|s| s.mid().0).collect();
                if back.as_deref() != Some(&tr[..]) {
                    // Two chart parameters may map to the same base point
                    // (even power): accept any preimage that pushes forward
                    // to the same point.
                    let fwd_ok = back
                        .map(|b| {
                            let bs: Vec<Scalar> =
                                b.into_iter().map(Scalar::from_rational).collect();
                            chain_forward_point(&chart.chain, &bs)
                                .map(|fx| fx == x)
                                .unwrap_or(false)
                        })
                        .unwrap_or(false);
                    if !fwd_ok {
                        return Err(Error::VerificationFailed(format!(
                            "orthant gluing round trip failed on chart '{}'",
                            piece.label
                        )));
                    }
                }
            }
            count += 1;
        }
    }
    Ok(ResidualSummary {
        sup,
        exact,
        ok,
        count,
        messages,
    })
}

fn value_bound(sys: &InvariantSystem, f: &[Series], radius: &[f64]) -> f64 {
    let level = 5u32;
    let mut sup_f = vec![0.0f64; f.len()];
    let mut eval_at = |x: &[f64]| {
        let xc: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        for (j, fj) in f.iter().enumerate() {
            sup_f[j] = sup_f[j].max(fj.eval_c64(&xc).norm());
        }
    };
    if radius.len() == 1 {
        for x in dyadic_nodes(radius[0], level) {
            eval_at(&[x]);
        }
    } else {
        for y in dyadic_nodes(radius[1], level) {
            for x in dyadic_nodes(radius[0], level) {
                eval_at(&[x, y]);
            }
        }
    }
    let m = sup_f.iter().cloned().fold(0.0f64, f64::max);
    match sys.family {
        Family::SymmetricComplex => 1.0 + m,
        // Real families bound the squared coordinates (monic root bound on
        // the squares respectively on the power sum p2).
        Family::SignedPermReal => (1.0 + m).sqrt(),
        Family::SymmetricRealTraceZero => (1.0 + sup_f.first().copied().unwrap_or(0.0)).sqrt(),
    }
}

/// Grid diagnostics of a glued lift against its invariant data.
pub fn verify_weak(f: &[Series], wl: &WeakLift, opts: &VerifyOptions) -> Result<VerificationReport> {
    if wl.fiberwise {
        return Err(Error::Input(
            "fiberwise sections are verified by section_map itself".into(),
        ));
    }
    if f.len() != wl.sys.num_invariants() {
        return Err(Error::Input(format!(
            "system {} expects {} invariant series, got {}",
            wl.sys.family,
            wl.sys.num_invariants(),
            f.len()
        )));
    }
    if opts.levels.is_empty() {
        return Err(Error::Input("no grid levels requested".into()));
    }
    let mut messages = Vec::new();

    // Coefficientwise identity per chart, exact where the data is exact.
    let mut chart_ok = true;
    let mut chart_exact = true;
    let mut order: Option<u32> = None;
    for piece in &wl.pieces {
        let r = verify_chart(&wl.sys, f, &piece.chart)?;
        chart_ok &= r.ok;
        chart_exact &= r.exact;
        if let Some(o) = r.order {
            order = Some(order.map_or(o, |m| m.min(o)));
        }
    }
    let mut res = residual_samples(wl, f, opts.residual_level)?;
    messages.append(&mut res.messages);
    let residual_exact = chart_exact && res.exact;
    let tol = crate::scalar::pow2(-(opts.precision as i64) / 2);
    let residual_pass = chart_ok && res.ok && res.sup <= tol;

    let mut scans = Vec::with_capacity(opts.levels.len());
    for &level in &opts.levels {
        scans.push(scan_level(wl, level));
    }
    let gradient_integrals: Vec<f64> = scans.iter().map(|s| s.integral).collect();
    let gradient_cauchy = if gradient_integrals.len() >= 2 {
        let a = gradient_integrals[gradient_integrals.len() - 2];
        let b = gradient_integrals[gradient_integrals.len() - 1];
        Some((b - a).abs() / b.abs().max(f64::MIN_POSITIVE))
    } else {
        None
    };
    let gradient_pass = gradient_integrals.iter().all(|v| v.is_finite())
        && gradient_cauchy.is_none_or(|c| c <= opts.cauchy_tol);

    let lipschitz_sups: Vec<f64> = scans.iter().map(|s| s.lipschitz).collect();
    let lipschitz_change = if lipschitz_sups.len() >= 2 {
        let a = lipschitz_sups[lipschitz_sups.len() - 2];
        let b = lipschitz_sups[lipschitz_sups.len() - 1];
        Some((b - a).abs() / b.abs().max(f64::MIN_POSITIVE))
    } else {
        None
    };
    let lipschitz_pass = if wl.sys.is_real() {
        Some(
            lipschitz_sups.iter().all(|v| v.is_finite())
                && lipschitz_change.is_none_or(|c| c <= opts.lipschitz_tol),
        )
    } else {
        None
    };

    let finest = scans.last().expect("levels nonempty");
    let sup_value = finest.sup_value;
    let bound = value_bound(&wl.sys, f, &wl.radius.iter().map(scalar_re_f64).collect::<Vec<_>>());
    let bounded_pass = sup_value <= bound * (1.0 + 1e-9);
    let coverage_pass = scans.iter().all(|s| s.uncovered == 0);
    if !coverage_pass {
        messages.push("some off-E grid nodes were not covered by any piece".into());
    }
    let exceptional_measure = wl.exceptional.measure();
    let sbv_pass =
        bounded_pass && gradient_pass && exceptional_measure.is_finite() && coverage_pass;
    if wl.exceptional.approximate {
        messages.push(
            "parts of E were pushed through bending substitutions and are endpoint \
             approximations"
                .into(),
        );
    }
    messages.push(format!(
        "gradient integrals use the anisotropic norm over {} levels",
        opts.levels.len()
    ));

    Ok(VerificationReport {
        residual_sup: Scalar::from_rational(res.sup),
        residual_exact,
        residual_order: order,
        residual_pass,
        residual_samples: res.count,
        sup_value,
        value_bound: bound,
        bounded_pass,
        grid_levels: opts.levels.clone(),
        gradient_integrals,
        gradient_cauchy,
        gradient_pass,
        jump_total: finest.jump,
        exceptional_measure,
        exceptional_node_fraction: scans
            .iter()
            .map(|s| s.on_e_nodes as f64 / s.total_nodes.max(1) as f64)
            .collect(),
        lipschitz_sups,
        lipschitz_change,
        lipschitz_pass,
        sbv_pass,
        coverage_pass,
        messages,
    })
}

/// End-to-end pipeline: lift, glue all charts with deterministic priority,
/// verify on the default grid ladder for the base dimension.
pub fn assemble_weak_lift(problem: &LiftProblem) -> Result<(WeakLift, VerificationReport)> {
    assemble_weak_lift_with(problem, None)
}

/// Same pipeline with explicit grid diagnostics settings.
pub fn assemble_weak_lift_with(
    problem: &LiftProblem,
    opts: Option<&VerifyOptions>,
) -> Result<(WeakLift, VerificationReport)> {
    let charts = if problem.base_dim() == 1 {
        crate::lifter::lift_curve(problem)?
    } else {
        crate::lifter::lift_multi(problem)?
    };
    let wl = build_weak_lift(
        problem.sys,
        problem.base_dim(),
        &charts,
        vec![format!(
            "assembled from {} lift charts of {}({})",
            charts.len(),
            problem.sys.family,
            problem.sys.n
        )],
        None,
    )?;
    let defaults;
    let opts = match opts {
        Some(o) => o,
        None => {
            defaults = VerifyOptions::for_dim(problem.base_dim());
            &defaults
        }
    };
    let report = verify_weak(&problem.f, &wl, opts)?;
    Ok((wl, report))
}

/// A measurable section of the quotient map on a grid over the invariant
/// base: at each sample the fiber is isolated and the deterministic root
/// ordering picks the representative. Samples where isolation runs out of
/// precision enlarge E instead of failing; real-mode samples outside the
/// image are skipped and counted.
pub fn section_map(
    sys: InvariantSystem,
    radius: &BigRational,
    level: u32,
    prec: u32,
) -> Result<(WeakLift, VerificationReport)> {
    let dim = sys.num_invariants();
    if dim == 0 || dim > 2 {
        return Err(Error::UnsupportedFamily(format!(
            "sections are sampled on 1- or 2-dimensional bases, {}({}) has {}",
            sys.family, sys.n, dim
        )));
    }
    if !radius.is_positive() {
        return Err(Error::Input("section box radius must be positive".into()));
    }
    let n = 1usize << level;
    let axis: Vec<BigRational> = (0..=n)
        .map(|k| {
            radius
                * (BigRational::from_integer(BigInt::from(2 * k as i64 - n as i64))
                    / BigRational::from_integer(BigInt::from(n as i64)))
        })
        .collect();
    let mut samples: Vec<Vec<Scalar>> = Vec::new();
    if dim == 1 {
        for z in &axis {
            samples.push(vec![Scalar::from_rational(z.clone())]);
        }
    } else {
        for z2 in &axis {
            for z1 in &axis {
                samples.push(vec![
                    Scalar::from_rational(z1.clone()),
                    Scalar::from_rational(z2.clone()),
                ]);
            }
        }
    }
    let mut exc = ExceptionalSet::default();
    let mut sup = BigRational::zero();
    let mut exact = true;
    let mut evaluated = 0usize;
    let mut outside = 0usize;
    let mut failed = 0usize;
    let mut sup_value = 0.0f64;
    let mut ok = true;
    for z in &samples {
        let roots = match sys.roots_from_invariants(z, prec) {
            Ok(r) => r,
            Err(Error::NotInImage(_)) => {
                outside += 1;
                continue;
            }
            Err(Error::PrecisionExhausted { .. }) | Err(Error::SeparationFailed(_)) => {
                failed += 1;
                exc.push_point(z.clone());
                continue;
            }
            Err(e) => return Err(e),
        };
        let roots = canonical_section_point(&sys, roots);
        evaluated += 1;
        for r in &roots {
            sup_value = sup_value.max(r.to_c64().norm());
        }
        let sigma = sys.sigma_eval(&roots)?;
        for (sj, zj) in sigma.iter().zip(z) {
            let diff = sj.sub(zj);
            if diff.nonzero_certified() == Some(true) {
                ok = false;
            }
            if !(diff.is_exact() && diff.nonzero_certified() == Some(false)) {
                exact = false;
            }
            let r = diff.abs_upper();
            if r > sup {
                sup = r;
            }
        }
    }
    if evaluated == 0 {
        return Err(Error::Input(
            "no section sample lies in the image of the quotient map".into(),
        ));
    }
    let tol = crate::scalar::pow2(-(prec as i64) / 2);
    let residual_pass = ok && sup <= tol;
    let mut messages = vec![format!(
        "section sampled on a {} grid: {} evaluated, {} outside the image, {} \
         precision-limited (added to E)",
        if dim == 1 {
            format!("{}-node line", n + 1)
        } else {
            format!("{0}x{0}", n + 1)
        },
        evaluated,
        outside,
        failed
    )];
    if failed > 0 {
        messages.push("E gained precision-limited samples near the discriminant".into());
    }
    let rf = radius.to_f64().unwrap_or(1.0);
    let bound = match sys.family {
        Family::SymmetricComplex => 1.0 + rf,
        Family::SignedPermReal | Family::SymmetricRealTraceZero => (1.0 + rf).sqrt(),
    };
    let report = VerificationReport {
        residual_sup: Scalar::from_rational(sup),
        residual_exact: exact,
        residual_order: None,
        residual_pass,
        residual_samples: evaluated,
        sup_value,
        value_bound: bound,
        bounded_pass: sup_value <= bound * (1.0 + 1e-9),
        grid_levels: vec![level],
        gradient_integrals: Vec::new(),
        gradient_cauchy: None,
        gradient_pass: true,
        jump_total: 0.0,
        exceptional_measure: exc.measure(),
        exceptional_node_fraction: vec![failed as f64 / samples.len() as f64],
        lipschitz_sups: Vec::new(),
        lipschitz_change: None,
        lipschitz_pass: None,
        sbv_pass: residual_pass,
        coverage_pass: true,
        messages,
    };
    let wl = WeakLift {
        sys,
        q: dim as u8,
        radius: vec![Scalar::from_rational(radius.clone()); dim],
        pieces: Vec::new(),
        exceptional: exc,
        fiberwise: true,
        provenance: vec![format!(
            "fiberwise section of {}({}) at precision {}",
            sys.family, sys.n, prec
        )],
    };
    Ok((wl, report))
}

/// Grid dump for plotting: sample coordinates, fiber values, gradient
/// estimate, and the E marker.
pub fn sample_rows(wl: &WeakLift, level: u32) -> Vec<SampleRow> {
    let r: Vec<f64> = wl.radius.iter().map(scalar_re_f64).collect();
    let h = 2.0 * r[0] / (1usize << level) as f64;
    let snap = h / 2.0;
    let mut rows = Vec::new();
    let mut push = |x: Vec<f64>| {
        let on_e = !wl.fiberwise && wl.exceptional.distance(&x) < snap;
        let value = if on_e {
            None
        } else {
            wl.eval(&x).map(|v| v.iter().map(|c| (c.re, c.im)).collect())
        };
        let grad = if on_e || wl.fiberwise {
            None
        } else {
            lipschitz_at(wl, &x, h)
        };
        rows.push(SampleRow { x, value, grad, on_e });
    };
    if wl.q == 1 {
        for x in dyadic_nodes(r[0], level) {
            push(vec![x]);
        }
    } else {
        for y in dyadic_nodes(r[1], level) {
            for x in dyadic_nodes(r[0], level) {
                push(vec![x, y]);
            }
        }
    }
    rows
}

/// Real-mode entry gate shared with the lifter, re-exported for callers that
/// build weak lifts from custom chart sets.
pub fn membership_gate(sys: &InvariantSystem, f: &[Series]) -> Result<()> {
    if !sys.is_real() {
        return Ok(());
    }
    let z0: Vec<Scalar> = f.iter().map(|c| c.value_at_zero()).collect();
    match sys.membership_test(&z0)? {
        Membership::Inside => Ok(()),
        Membership::Outside => Err(Error::NotInImage(
            "the base value f(0) fails the positivity certificate".into(),
        )),
        Membership::Indeterminate => Err(Error::PrecisionExhausted {
            decision: "membership of the base value f(0)".into(),
            prec: crate::scalar::DEFAULT_PREC,
            cap: crate::scalar::DEFAULT_PREC,
        }),
    }
}
