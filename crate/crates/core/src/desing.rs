//! Chart maps and the certified normal-crossings resolution used by the
//! lifting recursion: translations, point blow-ups of a real plane domain,
//! and coordinate power substitutions, assembled into trees whose leaves
//! carry monomial-times-unit certificates on explicit boxes.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::isolate_clusters;
use crate::scalar::Scalar;
use crate::series::{expo_total, Series};

/// One chart of a substitution chain. As a point map it sends the new
/// coordinates to the old ones; `pullback` composes a series with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartMap {
    /// x -> x + offset.
    Translation { offset: Vec<Scalar> },
    /// Blow up the point `center` of a plane domain; `index` selects the
    /// standard chart: 0 maps (x, y) to center + (x, x y), 1 maps (x, y) to
    /// center + (x y, y).
    BlowUp { center: Vec<Scalar>, index: u8 },
    /// x_j -> (-1)^(eps_j) x_j^(gamma_j) per coordinate.
    PowerSubstitution { gamma: Vec<u32>, eps: Vec<u8> },
}

impl ChartMap {
    pub fn translation(offset: Vec<Scalar>) -> Self {
        ChartMap::Translation { offset }
    }

    pub fn blow_up(center: Vec<Scalar>, index: u8) -> Self {
        assert!(index < 2);
        ChartMap::BlowUp { center, index }
    }

    pub fn power_substitution(gamma: Vec<u32>, eps: Vec<u8>) -> Self {
        assert_eq!(gamma.len(), eps.len());
        ChartMap::PowerSubstitution { gamma, eps }
    }

    /// Compose a series with this map.
    pub fn pullback(&self, s: &Series) -> Result<Series> {
        match self {
            ChartMap::Translation { offset } => {
                if offset.len() != s.nvars as usize {
                    return Err(Error::Input("translation dimension mismatch".into()));
                }
                s.translate(offset)
            }
            ChartMap::BlowUp { center, index } => {
                if s.nvars != 2 {
                    return Err(Error::Input("blow-ups act on two-variable series".into()));
                }
                if center.len() != 2 {
                    return Err(Error::Input("blow-up center dimension mismatch".into()));
                }
                Ok(s.translate(center)?.blowup_pullback(*index))
            }
            ChartMap::PowerSubstitution { gamma, eps } => {
                if gamma.len() != s.nvars as usize {
                    return Err(Error::Input(
                        "power substitution dimension mismatch".into(),
                    ));
                }
                Ok(s.substitute_power(gamma, eps))
            }
        }
    }

    /// Apply the map to a point of the new chart.
    pub fn forward_point(&self, p: &[Scalar]) -> Result<Vec<Scalar>> {
        match self {
            ChartMap::Translation { offset } => {
                if offset.len() != p.len() {
                    return Err(Error::Input("translation dimension mismatch".into()));
                }
                Ok(p.iter().zip(offset).map(|(a, b)| a.add(b)).collect())
            }
            ChartMap::BlowUp { center, index } => {
                if p.len() != 2 || center.len() != 2 {
                    return Err(Error::Input("blow-ups act on plane points".into()));
                }
                let prod = p[0].mul(&p[1]);
                let (u, v) = if *index == 0 {
                    (p[0].clone(), prod)
                } else {
                    (prod, p[1].clone())
                };
                Ok(vec![center[0].add(&u), center[1].add(&v)])
            }
            ChartMap::PowerSubstitution { gamma, eps } => {
                if gamma.len() != p.len() {
                    return Err(Error::Input(
                        "power substitution dimension mismatch".into(),
                    ));
                }
                Ok(p.iter()
                    .enumerate()
                    .map(|(j, x)| {
                        let q = x.pow(gamma[j]);
                        if eps[j] % 2 == 1 {
                            q.neg()
                        } else {
                            q
                        }
                    })
                    .collect())
            }
        }
    }
}

/// Compose a series with every chart of a chain, first entry outermost.
pub fn apply_chain(s: &Series, chain: &[ChartMap]) -> Result<Series> {
    let mut out = s.clone();
    for m in chain {
        out = m.pullback(&out)?;
    }
    Ok(out)
}

/// Map a point of the innermost chart to the root coordinates.
pub fn chain_forward_point(chain: &[ChartMap], p: &[Scalar]) -> Result<Vec<Scalar>> {
    let mut q = p.to_vec();
    for m in chain.iter().rev() {
        q = m.forward_point(&q)?;
    }
    Ok(q)
}

/// A leaf chart with its normal-crossings certificate: on the box of
/// half-widths `rho`, the pullback of tracked function i equals
/// x^alphas[i] * units[i] with the unit nonvanishing; `None` entries flag
/// tracked functions that are identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub chain: Vec<ChartMap>,
    pub rho: Vec<Scalar>,
    pub alphas: Vec<Option<Vec<u32>>>,
    pub units: Vec<Option<Series>>,
    /// False when a truncated input forced a heuristic tail bound in the
    /// unit certification.
    pub certified: bool,
}

impl Leaf {
    /// Whether the real point p (given in leaf coordinates) lies in the box,
    /// judged on midpoints.
    pub fn contains_mid(&self, p: &[Scalar]) -> bool {
        if p.len() != self.rho.len() {
            return false;
        }
        p.iter().zip(&self.rho).all(|(x, r)| {
            let (re, im) = x.mid();
            let (rr, _) = r.mid();
            re.abs() <= rr && im.is_zero()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentStep {
    pub depth: usize,
    pub measure: u64,
}

/// A finished resolution: leaf charts covering a neighborhood of the origin
/// (of guaranteed radius `covered_radius`) on which every tracked function
/// is a monomial times a unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionTree {
    pub nvars: u8,
    pub tracked: Vec<Series>,
    pub leaves: Vec<Leaf>,
    pub descent_log: Vec<DescentStep>,
    pub blowups: usize,
    pub covered_radius: Scalar,
}

#[derive(Debug, Clone)]
pub struct ResolveOptions {
    pub max_leaves: usize,
    pub max_depth: usize,
    pub plateau_limit: usize,
    pub prec: u32,
    /// Half-width of the root box.
    pub rho0: BigRational,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            max_leaves: 64,
            max_depth: 16,
            plateau_limit: 16,
            prec: 128,
            rho0: BigRational::from_integer(1.into()),
        }
    }
}

fn rpow(r: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::from_integer(1.into());
    for _ in 0..k {
        acc *= r;
    }
    acc
}

fn half(r: &BigRational) -> BigRational {
    r / BigRational::from_integer(2.into())
}

/// Strip the monomial content: returns per-axis exponents and the strict
/// part, which is divisible by no coordinate.
fn content_split(s: &Series) -> Result<(Vec<u32>, Series)> {
    let nv = s.nvars as usize;
    let mut alpha = vec![u32::MAX; nv];
    for (e, _) in s.terms() {
        for j in 0..nv {
            alpha[j] = alpha[j].min(e[j]);
        }
    }
    let mut strict = s.clone();
    for (j, a) in alpha.iter().enumerate() {
        strict = strict.divide_by_coordinate(j, *a)?;
    }
    Ok((alpha.clone(), strict))
}

/// Sound bound for unit nonvanishing of h on the closed box of half-widths
/// rho: |h(0)| must dominate the sum of the other coefficient magnitudes
/// scaled by the box. Exact polynomial input makes this rigorous; a
/// truncation contributes a heuristic tail estimate and clears `rigorous`.
fn unit_bound_ok(h: &Series, rho: &[BigRational], rigorous: &mut bool) -> bool {
    let c0 = h.value_at_zero().abs_lower();
    if c0 <= BigRational::zero() {
        return false;
    }
    let nv = h.nvars as usize;
    let mut sum = BigRational::zero();
    for (e, c) in h.terms() {
        if (0..nv).all(|j| e[j] == 0) {
            continue;
        }
        let mut t = c.abs_upper();
        for j in 0..nv {
            t *= rpow(&rho[j], e[j]);
        }
        sum += t;
    }
    if h.trunc.is_some() {
        *rigorous = false;
        let q = rho
            .iter()
            .map(|r| r.to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0f64, f64::max);
        let tail = h.tail_bound_heuristic(q);
        if !tail.is_finite() {
            return false;
        }
        match BigRational::from_float(tail) {
            Some(t) => sum += t,
            None => return false,
        }
    }
    sum < c0
}

struct SplitData {
    /// Per tracked index: None for zero-flagged, else (alpha, strict).
    parts: Vec<Option<(Vec<u32>, Series)>>,
}

fn split_all(tracked: &[Series]) -> Result<SplitData> {
    let mut parts = Vec::with_capacity(tracked.len());
    for t in tracked {
        if t.is_zero_stored() {
            parts.push(None);
        } else {
            parts.push(Some(content_split(t)?));
        }
    }
    Ok(SplitData { parts })
}

impl SplitData {
    fn all_units_at_origin(&self) -> bool {
        self.parts.iter().all(|p| match p {
            None => true,
            Some((_, strict)) => strict.value_at_zero().nonzero_certified() == Some(true),
        })
    }

    fn orders(&self) -> Vec<Option<u64>> {
        self.parts
            .iter()
            .map(|p| {
                p.as_ref().map(|(_, strict)| {
                    strict
                        .terms()
                        .map(|(e, _)| expo_total(e) as u64)
                        .min()
                        .unwrap_or(0)
                })
            })
            .collect()
    }

    fn measure(&self) -> u64 {
        self.orders().iter().flatten().sum()
    }
}

struct Resolver {
    opts: ResolveOptions,
    leaves: Vec<Leaf>,
    descent_log: Vec<DescentStep>,
    blowups: usize,
}

impl Resolver {
    fn push_leaf(&mut self, leaf: Leaf) -> Result<()> {
        if self.leaves.len() >= self.opts.max_leaves {
            return Err(Error::BudgetExceeded {
                stage: "resolution".into(),
                detail: format!("leaf budget {} exhausted", self.opts.max_leaves),
            });
        }
        self.leaves.push(leaf);
        Ok(())
    }

    /// Certify the split data as a leaf on a box, shrinking only the listed
    /// axes. Returns the certified box on success.
    fn certify(
        &self,
        split: &SplitData,
        rho: &[BigRational],
        shrink_axes: &[usize],
    ) -> Option<(Vec<BigRational>, bool)> {
        let mut rho = rho.to_vec();
        for _ in 0..=40 {
            let mut rigorous = true;
            let ok = split.parts.iter().all(|p| match p {
                None => true,
                Some((_, strict)) => unit_bound_ok(strict, &rho, &mut rigorous),
            });
            if ok {
                return Some((rho, rigorous));
            }
            if shrink_axes.is_empty() {
                return None;
            }
            for &j in shrink_axes {
                rho[j] = half(&rho[j]);
            }
        }
        None
    }

    fn make_leaf(
        &mut self,
        chain: Vec<ChartMap>,
        split: SplitData,
        rho: Vec<BigRational>,
        rigorous: bool,
    ) -> Result<()> {
        let mut alphas = Vec::with_capacity(split.parts.len());
        let mut units = Vec::with_capacity(split.parts.len());
        for p in split.parts {
            match p {
                None => {
                    alphas.push(None);
                    units.push(None);
                }
                Some((a, u)) => {
                    alphas.push(Some(a));
                    units.push(Some(u));
                }
            }
        }
        self.push_leaf(Leaf {
            chain,
            rho: rho.iter().map(|r| Scalar::from_rational(r.clone())).collect(),
            alphas,
            units,
            certified: rigorous,
        })
    }

    /// Resolve at the origin of the current chart on a square box of side
    /// `side`. Returns the side of the square neighborhood of the origin
    /// that the emitted leaves are guaranteed to cover.
    fn node(
        &mut self,
        tracked: &[Series],
        chain: Vec<ChartMap>,
        side: BigRational,
        depth: usize,
        parent_orders: Option<(&[Option<u64>], usize)>,
    ) -> Result<BigRational> {
        let nv = tracked.first().map(|t| t.nvars).unwrap_or(2) as usize;
        let split = split_all(tracked)?;

        // Multiplicity descent: the local order of each strict part never
        // exceeds its order at the blown-up point, and the total order may
        // only plateau for a bounded stretch.
        let orders = split.orders();
        let measure = split.measure();
        let mut plateau = 0usize;
        if let Some((po, pp)) = parent_orders {
            let pm: u64 = po.iter().flatten().sum();
            for (a, b) in orders.iter().zip(po) {
                if let (Some(a), Some(b)) = (a, b) {
                    if a > b {
                        return Err(Error::Internal(
                            "strict transform multiplicity increased under a blow-up".into(),
                        ));
                    }
                }
            }
            if measure == pm {
                plateau = pp + 1;
                if plateau > self.opts.plateau_limit {
                    return Err(Error::BudgetExceeded {
                        stage: "resolution".into(),
                        detail: format!(
                            "multiplicity plateau exceeded {} steps",
                            self.opts.plateau_limit
                        ),
                    });
                }
            }
        }

        if split.all_units_at_origin() {
            let rho = vec![side.clone(); nv];
            let axes: Vec<usize> = (0..nv).collect();
            match self.certify(&split, &rho, &axes) {
                Some((rho, rigorous)) => {
                    let covered = rho[0].clone();
                    self.make_leaf(chain, split, rho, rigorous)?;
                    return Ok(covered);
                }
                None => {
                    return Err(Error::SeparationFailed(
                        "unit certification did not converge while shrinking the box".into(),
                    ))
                }
            }
        }

        if nv != 2 {
            return Err(Error::Internal(
                "a one-variable series failed to split as a monomial times a unit".into(),
            ));
        }
        if depth >= self.opts.max_depth {
            return Err(Error::BudgetExceeded {
                stage: "resolution".into(),
                detail: format!("blow-up depth budget {} exhausted", self.opts.max_depth),
            });
        }

        self.blowups += 1;
        self.descent_log.push(DescentStep { depth, measure });

        let mut chart_reach: Vec<BigRational> = Vec::with_capacity(2);
        for index in 0u8..2 {
            let pulled: Vec<Series> =
                tracked.iter().map(|t| t.blowup_pullback(index)).collect();
            let mut chain_b = chain.clone();
            chain_b.push(ChartMap::blow_up(vec![Scalar::zero(), Scalar::zero()], index));
            let taxis = index as usize;
            let daxis = 1 - taxis;
            let crit = self.critical_points(&pulled, taxis, daxis)?;

            // Window half-widths: a quarter of the gap to the nearest other
            // critical point, capped at 1/8.
            let cap = BigRational::new(1.into(), 8.into());
            let mut windows: Vec<(BigRational, BigRational)> = Vec::new();
            for (k, c) in crit.iter().enumerate() {
                let mut w = cap.clone();
                if k > 0 {
                    let g = (c - &crit[k - 1]) / BigRational::from_integer(4.into());
                    if g < w {
                        w = g;
                    }
                }
                if k + 1 < crit.len() {
                    let g = (&crit[k + 1] - c) / BigRational::from_integer(4.into());
                    if g < w {
                        w = g;
                    }
                }
                windows.push((c.clone(), w));
            }

            // Children at the critical points first, then bands tiling the
            // rest of the divisor interval.
            let mut reach: Option<BigRational> = None;
            let mut segments: Vec<(BigRational, BigRational)> = Vec::new();
            let divisor_end = BigRational::from_integer(1.into());
            let divisor_start = -divisor_end.clone();
            let mut cursor = divisor_start.clone();
            for (c, w) in &windows {
                let m = side.clone().min(w.clone());
                let mut t3: Vec<Series> = Vec::with_capacity(pulled.len());
                let mut offset = vec![Scalar::zero(); 2];
                offset[daxis] = Scalar::from_rational(c.clone());
                for t in &pulled {
                    t3.push(t.translate(&offset)?);
                }
                let mut chain_c = chain_b.clone();
                if !c.is_zero() {
                    chain_c.push(ChartMap::translation(offset));
                }
                let v = self.node(
                    &t3,
                    chain_c,
                    m,
                    depth + 1,
                    Some((&orders, plateau)),
                )?;
                reach = Some(match reach {
                    None => v.clone(),
                    Some(r) => r.min(v.clone()),
                });
                // Side bands cover the part of the window beyond the square
                // the child certifies.
                let lo = c - w;
                let hi = c + w;
                let block_lo = c - &v;
                let block_hi = c + &v;
                segments.push((lo.clone(), block_lo.clone()));
                segments.push((block_hi.clone(), hi.clone()));
                if cursor < lo {
                    segments.push((cursor.clone(), lo));
                }
                cursor = hi;
            }
            if cursor < divisor_end {
                segments.push((cursor.clone(), divisor_end.clone()));
            }
            for (lo, hi) in segments {
                let lo = lo.max(divisor_start.clone());
                let hi = hi.min(divisor_end.clone());
                if lo >= hi {
                    continue;
                }
                let v = self.band(&pulled, &chain_b, taxis, daxis, &side, &lo, &hi, 0)?;
                reach = Some(match reach {
                    None => v.clone(),
                    Some(r) => r.min(v.clone()),
                });
            }
            chart_reach.push(reach.unwrap_or_else(|| side.clone()));
        }
        Ok(chart_reach[0].clone().min(chart_reach[1].clone()))
    }

    /// Rational critical points of the pulled-back tracked set on the
    /// exceptional divisor of one blow-up chart, ascending.
    fn critical_points(
        &self,
        pulled: &[Series],
        taxis: usize,
        daxis: usize,
    ) -> Result<Vec<BigRational>> {
        let capture = BigRational::new(9.into(), 8.into());
        let mut crit: Vec<BigRational> = Vec::new();
        for t in pulled {
            if t.is_zero_stored() {
                continue;
            }
            let (alpha, strict) = content_split(t)?;
            // A monomial factor in the divisor coordinate vanishes along a
            // coordinate line crossing the divisor at 0.
            if alpha[daxis] > 0 && !crit.contains(&BigRational::zero()) {
                crit.push(BigRational::zero());
            }
            let mut deg = 0usize;
            for (e, _) in strict.terms() {
                if e[taxis] == 0 {
                    deg = deg.max(e[daxis] as usize);
                }
            }
            let mut q = vec![Scalar::zero(); deg + 1];
            let mut any = false;
            for (e, c) in strict.terms() {
                if e[taxis] == 0 {
                    q[e[daxis] as usize] = c.clone();
                    any = true;
                }
            }
            if !any {
                return Err(Error::Internal(
                    "strict part vanished on the exceptional divisor".into(),
                ));
            }
            for cl in isolate_clusters(&q, self.opts.prec)? {
                match &cl.center {
                    Scalar::Exact(g) => {
                        if !g.im.is_zero() {
                            continue;
                        }
                        if g.re.abs() > capture {
                            continue;
                        }
                        if !crit.contains(&g.re) {
                            crit.push(g.re.clone());
                        }
                    }
                    Scalar::Ball(b) => {
                        if b.re.abs() - &b.rad > capture {
                            continue;
                        }
                        if b.im.abs() > b.rad {
                            continue;
                        }
                        return Err(Error::SeparationFailed(
                            "a divisor critical point could not be certified rational"
                                .into(),
                        ));
                    }
                }
            }
        }
        crit.sort();
        Ok(crit)
    }

    /// A band leaf along the divisor segment [lo, hi], splitting the band
    /// when the unit bound will not certify. Returns the transverse reach.
    #[allow(clippy::too_many_arguments)]
    fn band(
        &mut self,
        pulled: &[Series],
        chain_b: &[ChartMap],
        taxis: usize,
        daxis: usize,
        side: &BigRational,
        lo: &BigRational,
        hi: &BigRational,
        splits: usize,
    ) -> Result<BigRational> {
        let mid = half(&(lo + hi));
        let hw = half(&(hi - lo));
        let mut offset = vec![Scalar::zero(); 2];
        offset[daxis] = Scalar::from_rational(mid.clone());
        let mut t3: Vec<Series> = Vec::with_capacity(pulled.len());
        for t in pulled {
            t3.push(t.translate(&offset)?);
        }
        let split = split_all(&t3)?;
        let mut rho = vec![BigRational::zero(); 2];
        rho[taxis] = side.clone();
        rho[daxis] = hw;
        if split.all_units_at_origin() {
            if let Some((rho, rigorous)) = self.certify(&split, &rho, &[taxis]) {
                let mut chain_c = chain_b.to_vec();
                if !mid.is_zero() {
                    chain_c.push(ChartMap::translation(offset));
                }
                let reach = rho[taxis].clone();
                self.make_leaf(chain_c, split, rho, rigorous)?;
                return Ok(reach);
            }
        }
        if splits >= 24 {
            return Err(Error::SeparationFailed(
                "band subdivision along the exceptional divisor did not converge".into(),
            ));
        }
        let a = self.band(pulled, chain_b, taxis, daxis, side, lo, &mid, splits + 1)?;
        let b = self.band(pulled, chain_b, taxis, daxis, side, &mid, hi, splits + 1)?;
        Ok(a.min(b))
    }
}

fn check_tracked(tracked: &[Series], nvars: u8) -> Result<()> {
    for t in tracked {
        if t.nvars != nvars {
            return Err(Error::Input(format!(
                "tracked series must have {} variable(s)",
                nvars
            )));
        }
    }
    Ok(())
}

/// One-variable resolution: every nonzero series near 0 is already a
/// monomial times a unit, so the tree has a single identity-chart leaf with
/// the box shrunk until the units certify.
pub fn resolve_nc_1d(tracked: &[Series], opts: &ResolveOptions) -> Result<ResolutionTree> {
    check_tracked(tracked, 1)?;
    let mut parts: Vec<Option<(Vec<u32>, Series)>> = Vec::with_capacity(tracked.len());
    for t in tracked {
        if t.is_zero_stored() {
            parts.push(None);
        } else {
            let (e, unit) = t.series_order()?;
            parts.push(Some((vec![e[0]], unit)));
        }
    }
    let split = SplitData { parts };
    let mut resolver = Resolver {
        opts: opts.clone(),
        leaves: Vec::new(),
        descent_log: Vec::new(),
        blowups: 0,
    };
    let rho = vec![opts.rho0.clone()];
    let (rho, rigorous) = resolver.certify(&split, &rho, &[0]).ok_or_else(|| {
        Error::SeparationFailed(
            "unit certification did not converge while shrinking the interval".into(),
        )
    })?;
    let covered = rho[0].clone();
    resolver.make_leaf(Vec::new(), split, rho, rigorous)?;
    Ok(ResolutionTree {
        nvars: 1,
        tracked: tracked.to_vec(),
        leaves: resolver.leaves,
        descent_log: resolver.descent_log,
        blowups: 0,
        covered_radius: Scalar::from_rational(covered),
    })
}

/// Plane resolution by iterated point blow-ups: the returned leaves carry
/// simultaneous monomial-times-unit certificates for every tracked function
/// and jointly cover a square neighborhood of the origin.
pub fn resolve_nc_2d(tracked: &[Series], opts: &ResolveOptions) -> Result<ResolutionTree> {
    check_tracked(tracked, 2)?;
    for t in tracked {
        if !t.is_polynomial() || !t.is_exact() {
            return Err(Error::Input(
                "plane resolution expects exact polynomial tracked functions; pass the \
                 polynomial jet"
                    .into(),
            ));
        }
    }
    let mut resolver = Resolver {
        opts: opts.clone(),
        leaves: Vec::new(),
        descent_log: Vec::new(),
        blowups: 0,
    };
    let covered = resolver.node(tracked, Vec::new(), opts.rho0.clone(), 0, None)?;
    Ok(ResolutionTree {
        nvars: 2,
        tracked: tracked.to_vec(),
        leaves: resolver.leaves,
        descent_log: resolver.descent_log,
        blowups: resolver.blowups,
        covered_radius: Scalar::from_rational(covered),
    })
}
