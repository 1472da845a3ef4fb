//! Lifting a parameter map through an invariant system.
//!
//! Given a curve or surface f into the invariant base (one series per
//! generator), the engine produces charts on which the fiber coordinates can
//! be chosen as series: for each chart a chain of substitutions on the
//! parameter domain and a root tuple whose invariants reproduce f composed
//! with that chain, coefficient by coefficient.
//!
//! The recursion peels the problem one certificate at a time. A nonzero base
//! value splits the fiber into root clusters, each handled by a smaller
//! group (Hensel factorization of the fiber polynomial, recentered by the
//! cluster mean). A vanishing base value is made divisible: over the complex
//! symmetric family the minimal scaled order alpha/D = beta/gamma dictates a
//! power substitution t -> (-1)^eps t^gamma followed by exact division, while
//! the real families divide by t^(d_j delta) with delta = alpha_1/2 and never
//! substitute powers, so real chart chains stay invertible. Surfaces route
//! the order computation through the plane desingularizer when the data is
//! not already a monomial times a unit.
//!
//! Every branching step composes cleanly: pending subproblems and finished
//! root slots are pulled through each new chart, so a finished chart's roots
//! always live in its innermost coordinates.

use std::collections::VecDeque;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::desing::{apply_chain, resolve_nc_2d, ChartMap, ResolveOptions};
use crate::error::{Error, Result};
use crate::invariants::{remove_fixed_points, Family, InvariantSystem, Membership};
use crate::roots::{isolate_clusters, RootCluster};
use crate::scalar::Scalar;
use crate::series::{Expo, Series};
use crate::series_poly::{split_by_clusters, SeriesPoly};

/// Fallback working truncation when the input is exact polynomial data and
/// no explicit order was requested.
const DEFAULT_WORK_ORDER: u32 = 16;

#[derive(Debug, Clone)]
pub struct LiftOptions {
    /// Ball precision in bits for root isolation and certificates.
    pub precision: u32,
    /// Working truncation for series produced by factoring; None uses the
    /// input truncation, or 16 for exact polynomial input.
    pub trunc: Option<u32>,
    /// Refuse to continue once a needed component's truncation falls below
    /// this order.
    pub trunc_floor: u32,
    /// Recursion steps allowed per chart branch.
    pub max_steps: usize,
    /// Total charts allowed per lift.
    pub max_charts: usize,
    /// Budget for desingularization runs triggered by surface problems.
    pub resolve: ResolveOptions,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            precision: crate::scalar::DEFAULT_PREC,
            trunc: None,
            trunc_floor: 4,
            max_steps: 64,
            max_charts: 256,
            resolve: ResolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiftProblem {
    pub sys: InvariantSystem,
    /// One series per generator, all in the same 1 or 2 base variables.
    pub f: Vec<Series>,
    pub options: LiftOptions,
}

impl LiftProblem {
    pub fn new(sys: InvariantSystem, f: Vec<Series>, options: LiftOptions) -> Result<Self> {
        if f.len() != sys.num_invariants() {
            return Err(Error::Input(format!(
                "system {} expects {} invariant series, got {}",
                sys.family,
                sys.num_invariants(),
                f.len()
            )));
        }
        if f.is_empty() {
            return Err(Error::Input(
                "the system has no invariants; there is nothing to lift".into(),
            ));
        }
        let nv = f[0].nvars;
        if nv != 1 && nv != 2 {
            return Err(Error::Input("parameter dimension must be 1 or 2".into()));
        }
        if f.iter().any(|c| c.nvars != nv) {
            return Err(Error::Input(
                "invariant components disagree on the parameter dimension".into(),
            ));
        }
        Ok(LiftProblem { sys, f, options })
    }

    pub fn base_dim(&self) -> u8 {
        self.f[0].nvars
    }
}

/// One monomial factor x^beta applied to a contiguous range of root slots
/// during the descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialStep {
    /// Half-open slot range the factor multiplies.
    pub slots: (usize, usize),
    pub beta: Vec<u32>,
}

/// A single chart of the lift: substitution chain on the parameter domain,
/// the root tuple on that chart, and the bookkeeping that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftChart {
    /// Outermost substitution first; the chart parameter maps to the original
    /// one through the whole chain.
    pub chain: Vec<ChartMap>,
    /// Fiber coordinates as series in the chart parameter.
    pub lift: Vec<Series>,
    /// lift(0), the designated fiber point over f(chain(0)).
    pub basepoint: Vec<Scalar>,
    /// Accumulated monomial factors from the division steps.
    pub monomials: Vec<MonomialStep>,
    /// Half-widths of the box on which the chart's certificates were set up.
    pub rho: Vec<Scalar>,
    /// Human-readable descent history for this branch.
    pub descent_log: Vec<String>,
}

/// Outcome of checking one chart's lift identity. `exact` means the
/// difference sigma(lift) - f o chain has exact zero coefficients up to the
/// recorded order; otherwise `max_radius` bounds the ball residue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartResidual {
    pub ok: bool,
    pub exact: bool,
    pub max_radius: Scalar,
    /// Truncation order up to which the identity was compared; None when both
    /// sides are polynomials and the comparison is unconditional.
    pub order: Option<u32>,
}

/// Verify sigma(lift) = f o chain coefficientwise for one chart.
pub fn verify_chart(sys: &InvariantSystem, f: &[Series], chart: &LiftChart) -> Result<ChartResidual> {
    if chart.lift.len() != sys.fiber_degree() {
        return Err(Error::Input(format!(
            "chart carries {} fiber coordinates, system needs {}",
            chart.lift.len(),
            sys.fiber_degree()
        )));
    }
    let sigma = sys.sigma_eval_series(&chart.lift)?;
    let mut ok = true;
    let mut exact = true;
    let mut max_rad = BigRational::from_integer(0.into());
    let mut order: Option<u32> = None;
    for (j, fj) in f.iter().enumerate() {
        let pulled = apply_chain(fj, &chart.chain)?;
        let diff = sigma[j].sub(&pulled);
        if let Some(tn) = diff.trunc {
            order = Some(order.map_or(tn, |m: u32| m.min(tn)));
        }
        for (_, c) in diff.terms() {
            match c.nonzero_certified() {
                Some(true) => {
                    ok = false;
                    exact = false;
                }
                Some(false) => {
                    if !c.is_exact() {
                        exact = false;
                    }
                }
                None => {
                    exact = false;
                    let r = c.abs_upper();
                    if r > max_rad {
                        max_rad = r;
                    }
                }
            }
        }
    }
    Ok(ChartResidual {
        ok,
        exact,
        max_radius: Scalar::from_rational(max_rad),
        order,
    })
}

/// Verdict of the real order constraints on one chart's leaf exponents.
/// `alphas[j]` is the exponent of the j-th invariant component (None when the
/// component is identically zero). The constraints: alpha_1 exists and is
/// even componentwise, so delta = alpha_1 / 2, and alpha_j >= d_j delta for
/// every nonzero component. Failures are verdicts, not errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealOrderCheck {
    pub delta: Option<Vec<u32>>,
    pub pass: bool,
    pub detail: String,
}

pub fn check_real_orders(sys: &InvariantSystem, alphas: &[Option<Vec<u32>>]) -> RealOrderCheck {
    let degs = sys.degrees();
    if alphas.len() != degs.len() {
        return RealOrderCheck {
            delta: None,
            pass: false,
            detail: format!("expected {} exponent entries, got {}", degs.len(), alphas.len()),
        };
    }
    if alphas.iter().all(|a| a.is_none()) {
        return RealOrderCheck {
            delta: None,
            pass: true,
            detail: "all components identically zero".into(),
        };
    }
    let Some(a1) = &alphas[0] else {
        return RealOrderCheck {
            delta: None,
            pass: false,
            detail: "the definite first invariant vanishes identically while others do not"
                .into(),
        };
    };
    if a1.iter().any(|&k| k % 2 != 0) {
        return RealOrderCheck {
            delta: None,
            pass: false,
            detail: format!("first-component exponent {:?} is not even componentwise", a1),
        };
    }
    let delta: Vec<u32> = a1.iter().map(|&k| k / 2).collect();
    for (j, entry) in alphas.iter().enumerate().skip(1) {
        if let Some(aj) = entry {
            if aj.len() != delta.len() {
                return RealOrderCheck {
                    delta: Some(delta),
                    pass: false,
                    detail: format!("exponent {:?} has the wrong dimension", aj),
                };
            }
            let d = degs[j];
            if aj.iter().zip(&delta).any(|(&a, &dl)| a < d * dl) {
                return RealOrderCheck {
                    delta: Some(delta.clone()),
                    pass: false,
                    detail: format!(
                        "component {} exponent {:?} falls below degree {} times delta {:?}",
                        j + 1,
                        aj,
                        d,
                        delta
                    ),
                };
            }
        }
    }
    RealOrderCheck {
        detail: format!("delta = {:?}", delta),
        delta: Some(delta),
        pass: true,
    }
}

/// Lift a one-parameter map. Every returned chart satisfies
/// sigma(lift) = f o chain up to the recorded truncation.
pub fn lift_curve(problem: &LiftProblem) -> Result<Vec<LiftChart>> {
    if problem.base_dim() != 1 {
        return Err(Error::Input("lift_curve expects one-variable input".into()));
    }
    Engine::run(problem)
}

/// Lift a two-parameter map. The input components must be exact polynomials;
/// the returned charts cover a neighborhood of the origin.
pub fn lift_multi(problem: &LiftProblem) -> Result<Vec<LiftChart>> {
    if problem.base_dim() != 2 {
        return Err(Error::Input("lift_multi expects two-variable input".into()));
    }
    for c in &problem.f {
        if !c.is_polynomial() || !c.is_exact() {
            return Err(Error::Input(
                "surface lifting needs exact polynomial invariant components".into(),
            ));
        }
    }
    Engine::run(problem)
}

/// A pending subproblem inside one branch, all data in the branch's current
/// chart coordinates. Root slot i of the subproblem lands in output slot
/// lo + i as shift + monom * (subproblem root).
#[derive(Clone)]
struct Task {
    sys: InvariantSystem,
    f: Vec<Series>,
    lo: usize,
    shift: Series,
    monom: Series,
}

impl Task {
    fn pulled(&self, steps: &[ChartMap]) -> Result<Task> {
        let mut f = Vec::with_capacity(self.f.len());
        for c in &self.f {
            f.push(apply_chain(c, steps)?);
        }
        Ok(Task {
            sys: self.sys,
            f,
            lo: self.lo,
            shift: apply_chain(&self.shift, steps)?,
            monom: apply_chain(&self.monom, steps)?,
        })
    }
}

#[derive(Clone)]
struct Branch {
    chain: Vec<ChartMap>,
    rho: Vec<BigRational>,
    roots: Vec<Option<Series>>,
    tasks: VecDeque<Task>,
    monomials: Vec<MonomialStep>,
    log: Vec<String>,
    steps: usize,
}

fn extend_branch(br: &mut Branch, steps: &[ChartMap]) -> Result<()> {
    if steps.is_empty() {
        return Ok(());
    }
    for t in br.tasks.iter_mut() {
        for c in t.f.iter_mut() {
            *c = apply_chain(c, steps)?;
        }
        t.shift = apply_chain(&t.shift, steps)?;
        t.monom = apply_chain(&t.monom, steps)?;
    }
    for r in br.roots.iter_mut() {
        if let Some(s) = r {
            *s = apply_chain(s, steps)?;
        }
    }
    br.chain.extend_from_slice(steps);
    Ok(())
}

struct Engine<'a> {
    opts: &'a LiftOptions,
    q: u8,
    real: bool,
    input_trunc: Option<u32>,
    charts: Vec<LiftChart>,
}

impl<'a> Engine<'a> {
    fn run(problem: &LiftProblem) -> Result<Vec<LiftChart>> {
        let sys = problem.sys;
        let q = problem.base_dim();
        let opts = &problem.options;
        if sys.is_real() {
            let z0: Vec<Scalar> = problem.f.iter().map(|c| c.value_at_zero()).collect();
            match sys.membership_test(&z0)? {
                Membership::Inside => {}
                Membership::Outside => {
                    return Err(Error::NotInImage(
                        "the base value f(0) fails the positivity certificate".into(),
                    ))
                }
                Membership::Indeterminate => {
                    return Err(Error::PrecisionExhausted {
                        decision: "membership of the base value f(0)".into(),
                        prec: opts.precision,
                        cap: opts.precision,
                    })
                }
            }
        }
        let mut eng = Engine {
            opts,
            q,
            real: sys.is_real(),
            input_trunc: problem.f.iter().filter_map(|c| c.trunc).min(),
            charts: Vec::new(),
        };
        let root = Branch {
            chain: Vec::new(),
            rho: vec![opts.resolve.rho0.clone(); q as usize],
            roots: vec![None; sys.fiber_degree()],
            tasks: VecDeque::from([Task {
                sys,
                f: problem.f.clone(),
                lo: 0,
                shift: Series::zero(q),
                monom: Series::one(q),
            }]),
            monomials: Vec::new(),
            log: Vec::new(),
            steps: 0,
        };
        let mut stack = vec![root];
        while let Some(mut br) = stack.pop() {
            let Some(task) = br.tasks.pop_front() else {
                eng.finalize(br)?;
                continue;
            };
            br.steps += 1;
            if br.steps > opts.max_steps {
                return Err(Error::BudgetExceeded {
                    stage: "lifting recursion".into(),
                    detail: format!("a branch exceeded {} descent steps", opts.max_steps),
                });
            }
            let children = eng.step(br, task)?;
            if stack.len() + children.len() + eng.charts.len() > opts.max_charts {
                return Err(Error::BudgetExceeded {
                    stage: "lifting recursion".into(),
                    detail: format!("more than {} chart branches requested", opts.max_charts),
                });
            }
            for ch in children.into_iter().rev() {
                stack.push(ch);
            }
        }
        Ok(eng.charts)
    }

    fn finalize(&mut self, br: Branch) -> Result<()> {
        if self.charts.len() >= self.opts.max_charts {
            return Err(Error::BudgetExceeded {
                stage: "lifting recursion".into(),
                detail: format!("more than {} charts produced", self.opts.max_charts),
            });
        }
        if self.real
            && br
                .chain
                .iter()
                .any(|c| matches!(c, ChartMap::PowerSubstitution { .. }))
        {
            return Err(Error::Internal(
                "a real-mode chart chain acquired a power substitution".into(),
            ));
        }
        let mut lift = Vec::with_capacity(br.roots.len());
        for r in br.roots {
            lift.push(r.ok_or_else(|| Error::Internal("a root slot was left empty".into()))?);
        }
        let basepoint = lift.iter().map(|s| s.value_at_zero()).collect();
        let rho = br.rho.into_iter().map(Scalar::from_rational).collect();
        self.charts.push(LiftChart {
            chain: br.chain,
            lift,
            basepoint,
            monomials: br.monomials,
            rho,
            descent_log: br.log,
        });
        Ok(())
    }

    /// True when some component is certainly not the zero function. Errors
    /// when that cannot be decided (zero to truncation, straddling balls).
    fn any_nonzero(&self, f: &[Series]) -> Result<bool> {
        let mut nonzero = false;
        let mut unknown_trunc: Option<u32> = None;
        let mut unknown_ball = false;
        for c in f {
            match c.is_zero() {
                Some(false) => nonzero = true,
                Some(true) => {}
                None => match c.trunc {
                    Some(tn) => {
                        unknown_trunc = Some(unknown_trunc.map_or(tn, |m| m.min(tn)));
                    }
                    None => unknown_ball = true,
                },
            }
        }
        if nonzero {
            return Ok(true);
        }
        if let Some(tn) = unknown_trunc {
            return Err(Error::ZeroToTruncation { trunc: tn });
        }
        if unknown_ball {
            return Err(Error::PrecisionExhausted {
                decision: "whether the invariant data is identically zero".into(),
                prec: self.opts.precision,
                cap: self.opts.precision,
            });
        }
        Ok(false)
    }

    fn complete_constant(&self, br: &mut Branch, task: &Task) {
        let n = task.sys.fiber_degree();
        for i in 0..n {
            br.roots[task.lo + i] = Some(task.shift.clone());
        }
    }

    fn step(&self, mut br: Branch, mut task: Task) -> Result<Vec<Branch>> {
        if !self.any_nonzero(&task.f)? {
            // All fiber roots coincide with the accumulated shift.
            self.complete_constant(&mut br, &task);
            return Ok(vec![br]);
        }
        if !self.real {
            if task.sys.fiber_degree() == 1 {
                let root = task.shift.add(&task.monom.mul(&task.f[0]));
                br.roots[task.lo] = Some(root);
                return Ok(vec![br]);
            }
            let (f0, _, g) = remove_fixed_points(&task.sys, &task.f)?;
            if !f0.is_zero_stored() {
                task.shift = task.shift.add(&task.monom.mul(&f0));
                task.f = g;
                if !self.any_nonzero(&task.f)? {
                    self.complete_constant(&mut br, &task);
                    return Ok(vec![br]);
                }
            }
        }
        let mut base_nonzero = false;
        let mut base_unknown = false;
        for c in &task.f {
            match c.value_at_zero().nonzero_certified() {
                Some(true) => base_nonzero = true,
                Some(false) => {}
                None => base_unknown = true,
            }
        }
        if base_nonzero {
            self.slice(br, task)
        } else if base_unknown {
            Err(Error::PrecisionExhausted {
                decision: "whether the invariant tuple vanishes at the base point".into(),
                prec: self.opts.precision,
                cap: self.opts.precision,
            })
        } else if self.q == 1 {
            self.order_curve(br, task)
        } else {
            self.order_surface(br, task)
        }
    }

    fn working_order(&self, f: &[Series]) -> u32 {
        let mut o = self.opts.trunc;
        for c in f {
            if let Some(tn) = c.trunc {
                o = Some(o.map_or(tn, |m| m.min(tn)));
            }
        }
        o.unwrap_or(DEFAULT_WORK_ORDER)
    }

    fn floor_check(&self, f: &[Series]) -> Result<()> {
        for c in f {
            if c.is_zero_stored() {
                continue;
            }
            if let Some(tn) = c.trunc {
                if tn < self.opts.trunc_floor {
                    return Err(Error::TruncationUnderflow {
                        have: tn,
                        floor: self.opts.trunc_floor,
                        need: self.input_trunc.unwrap_or(self.opts.trunc_floor)
                            + (self.opts.trunc_floor - tn),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_group_drop(parent: &InvariantSystem, child: &InvariantSystem) -> Result<()> {
        if child.group_order() >= parent.group_order() {
            return Err(Error::Internal(format!(
                "descent did not shrink the acting group: {}({}) -> {}({})",
                parent.family, parent.n, child.family, child.n
            )));
        }
        Ok(())
    }

    // ---- slice stage: nonzero base value, split into root clusters ----

    fn slice(&self, br: Branch, task: Task) -> Result<Vec<Branch>> {
        match task.sys.family {
            Family::SymmetricComplex => self.slice_complex(br, task),
            Family::SignedPermReal => self.slice_signed(br, task),
            Family::SymmetricRealTraceZero => self.slice_trace_zero(br, task),
        }
    }

    /// Monic factor -> recentered subproblem pieces shared by the symmetric
    /// families: the mean shift and the centered elementary values.
    fn centered_factor(&self, fac: &SeriesPoly) -> (Series, Vec<Series>) {
        let m = fac.degree();
        let mu = fac.coeffs[m - 1].scale(&Scalar::from_ratio(-1, m as i64));
        let centered = fac.taylor_shift_z(&mu);
        let mut e = centered.elementary();
        // The mean shift kills the first elementary value identically, at
        // every order; pin the exact zero rather than a radius-inflated,
        // truncation-marked residue, so a degree-one factor reads as the
        // finished constant problem it is.
        e[0] = Series::zero(e[0].nvars);
        (mu, e)
    }

    fn slice_complex(&self, mut br: Branch, task: Task) -> Result<Vec<Branch>> {
        let poly = SeriesPoly::from_elementary(&task.f, self.q);
        let clusters = isolate_clusters(&poly.slice0(), self.opts.precision)?;
        if clusters.len() < 2 {
            return Err(Error::Internal(
                "recentered slice data produced a single root cluster".into(),
            ));
        }
        let ord = self.working_order(&task.f);
        let factors = split_by_clusters(&poly, &clusters, ord)?;
        br.log.push(format!(
            "slice {}({}): clusters {:?}",
            task.sys.family,
            task.sys.n,
            clusters.iter().map(|c| c.multiplicity).collect::<Vec<_>>()
        ));
        let mut cursor = task.lo;
        let mut subtasks = Vec::with_capacity(clusters.len());
        for (cl, fac) in clusters.iter().zip(&factors) {
            let m = cl.multiplicity;
            let (mu, e) = self.centered_factor(fac);
            let sub = InvariantSystem::new(Family::SymmetricComplex, m)?;
            Self::check_group_drop(&task.sys, &sub)?;
            subtasks.push(Task {
                sys: sub,
                f: e,
                lo: cursor,
                shift: task.shift.add(&task.monom.mul(&mu)),
                monom: task.monom.clone(),
            });
            cursor += m;
        }
        if cursor != task.lo + task.sys.fiber_degree() {
            return Err(Error::Internal("cluster sizes do not tile the fiber".into()));
        }
        for st in subtasks.into_iter().rev() {
            br.tasks.push_front(st);
        }
        Ok(vec![br])
    }

    fn slice_trace_zero(&self, mut br: Branch, task: Task) -> Result<Vec<Branch>> {
        let n = task.sys.n;
        let e = power_sums_to_elementary(&task.f, n, self.q);
        let poly = SeriesPoly::from_elementary(&e, self.q);
        let clusters = isolate_clusters(&poly.slice0(), self.opts.precision)?;
        if clusters.len() < 2 {
            return Err(Error::Internal(
                "trace-zero slice data produced a single root cluster".into(),
            ));
        }
        let ord = self.working_order(&task.f);
        let factors = split_by_clusters(&poly, &clusters, ord)?;
        br.log.push(format!(
            "slice {}({}): clusters {:?}",
            task.sys.family,
            task.sys.n,
            clusters.iter().map(|c| c.multiplicity).collect::<Vec<_>>()
        ));
        let mut cursor = task.lo;
        let mut subtasks = Vec::with_capacity(clusters.len());
        for (cl, fac) in clusters.iter().zip(&factors) {
            let m = cl.multiplicity;
            let (mu, e_sub) = self.centered_factor(fac);
            let p = elementary_to_power_sums(&e_sub);
            let sub = InvariantSystem::new(Family::SymmetricRealTraceZero, m)?;
            Self::check_group_drop(&task.sys, &sub)?;
            subtasks.push(Task {
                sys: sub,
                f: p,
                lo: cursor,
                shift: task.shift.add(&task.monom.mul(&mu)),
                monom: task.monom.clone(),
            });
            cursor += m;
        }
        if cursor != task.lo + n {
            return Err(Error::Internal("cluster sizes do not tile the fiber".into()));
        }
        for st in subtasks.into_iter().rev() {
            br.tasks.push_front(st);
        }
        Ok(vec![br])
    }

    fn slice_signed(&self, mut br: Branch, task: Task) -> Result<Vec<Branch>> {
        // Fiber coordinates up to sign: work with the squared coordinates
        // first, then take the positive square-root branch per cluster.
        let poly = SeriesPoly::from_elementary(&task.f, self.q);
        let clusters = isolate_clusters(&poly.slice0(), self.opts.precision)?;
        let ord = self.working_order(&task.f);
        let factors = if clusters.len() == 1 {
            vec![poly]
        } else {
            split_by_clusters(&poly, &clusters, ord)?
        };
        br.log.push(format!(
            "slice {}({}): squared-coordinate clusters {:?}",
            task.sys.family,
            task.sys.n,
            clusters.iter().map(|c| c.multiplicity).collect::<Vec<_>>()
        ));
        let mut cursor = task.lo;
        let mut subtasks = Vec::with_capacity(clusters.len());
        for (cl, fac) in clusters.iter().zip(&factors) {
            let m = cl.multiplicity;
            match cl.center.sign_certified() {
                Some(std::cmp::Ordering::Greater) => {
                    let s = cl.center.sqrt(self.opts.precision)?;
                    let doubled = fac.compose_z_squared();
                    let ycl = vec![
                        RootCluster {
                            center: s.clone(),
                            multiplicity: m,
                        },
                        RootCluster {
                            center: s.neg(),
                            multiplicity: m,
                        },
                    ];
                    let halves = split_by_clusters(&doubled, &ycl, ord)?;
                    let plus = halves.into_iter().next().expect("two clusters, two factors");
                    let (mu, e_sub) = self.centered_factor(&plus);
                    let p = elementary_to_power_sums(&e_sub);
                    let sub = InvariantSystem::new(Family::SymmetricRealTraceZero, m)?;
                    Self::check_group_drop(&task.sys, &sub)?;
                    subtasks.push(Task {
                        sys: sub,
                        f: p,
                        lo: cursor,
                        shift: task.shift.add(&task.monom.mul(&mu)),
                        monom: task.monom.clone(),
                    });
                }
                Some(std::cmp::Ordering::Equal) => {
                    if m == task.sys.n {
                        return Err(Error::Internal(
                            "full-size zero cluster contradicts a nonzero base value".into(),
                        ));
                    }
                    let sub = InvariantSystem::new(Family::SignedPermReal, m)?;
                    Self::check_group_drop(&task.sys, &sub)?;
                    subtasks.push(Task {
                        sys: sub,
                        f: fac.elementary(),
                        lo: cursor,
                        shift: task.shift.clone(),
                        monom: task.monom.clone(),
                    });
                }
                Some(std::cmp::Ordering::Less) => {
                    return Err(Error::Internal(
                        "negative squared-coordinate cluster after the membership gate".into(),
                    ))
                }
                None => {
                    return Err(Error::PrecisionExhausted {
                        decision: "the sign of a squared-coordinate root cluster".into(),
                        prec: self.opts.precision,
                        cap: self.opts.precision,
                    })
                }
            }
            cursor += m;
        }
        if cursor != task.lo + task.sys.fiber_degree() {
            return Err(Error::Internal("cluster sizes do not tile the fiber".into()));
        }
        for st in subtasks.into_iter().rev() {
            br.tasks.push_front(st);
        }
        Ok(vec![br])
    }

    // ---- order stage: vanishing base value, divide out a monomial ----

    fn order_curve(&self, br: Branch, task: Task) -> Result<Vec<Branch>> {
        let mut ords: Vec<Option<u64>> = Vec::with_capacity(task.f.len());
        for c in &task.f {
            if c.is_zero_stored() {
                ords.push(None);
            } else {
                ords.push(Some(c.order_1d()? as u64));
            }
        }
        if self.real {
            self.order_curve_real(br, task, &ords)
        } else {
            self.order_curve_complex(br, task, &ords)
        }
    }

    fn order_curve_real(&self, mut br: Branch, mut task: Task, ords: &[Option<u64>]) -> Result<Vec<Branch>> {
        let alphas: Vec<Option<Vec<u32>>> = ords
            .iter()
            .map(|o| o.map(|v| vec![v as u32]))
            .collect();
        let check = check_real_orders(&task.sys, &alphas);
        if !check.pass || check.delta.is_none() {
            return Err(Error::RealOrderViolation(check.detail));
        }
        let d = check.delta.unwrap()[0];
        if d == 0 {
            return Err(Error::Internal(
                "vanishing base value with zero first-component order".into(),
            ));
        }
        let degs = task.sys.degrees();
        for (j, c) in task.f.iter_mut().enumerate() {
            *c = c.divide_by_coordinate(0, degs[j] * d)?;
        }
        self.floor_check(&task.f)?;
        task.monom = task
            .monom
            .mul(&Series::monomial(Scalar::one(), [d, 0], 1));
        br.monomials.push(MonomialStep {
            slots: (task.lo, task.lo + task.sys.fiber_degree()),
            beta: vec![d],
        });
        br.log.push(format!(
            "real order {}({}): delta = {}",
            task.sys.family, task.sys.n, d
        ));
        br.tasks.push_front(task);
        Ok(vec![br])
    }

    fn order_curve_complex(&self, mut br: Branch, task: Task, ords: &[Option<u64>]) -> Result<Vec<Branch>> {
        let degs = task.sys.degrees();
        let dd = task.sys.degree_product();
        let mut alpha: Option<u64> = None;
        for (j, o) in ords.iter().enumerate() {
            if let Some(v) = o {
                let scaled = v * (dd / degs[j] as u64);
                alpha = Some(alpha.map_or(scaled, |m| m.min(scaled)));
            }
        }
        let alpha = alpha
            .ok_or_else(|| Error::Internal("no nonzero component at the order stage".into()))?;
        if alpha == 0 {
            return Err(Error::Internal(
                "vanishing base value with zero minimal scaled order".into(),
            ));
        }
        let g = alpha.gcd(&dd);
        let beta = (alpha / g) as u32;
        let gamma = (dd / g) as u32;
        if gamma == 1 {
            let mut task = task;
            for (j, c) in task.f.iter_mut().enumerate() {
                *c = c.divide_by_coordinate(0, degs[j] * beta)?;
            }
            self.floor_check(&task.f)?;
            task.monom = task
                .monom
                .mul(&Series::monomial(Scalar::one(), [beta, 0], 1));
            br.monomials.push(MonomialStep {
                slots: (task.lo, task.lo + task.sys.fiber_degree()),
                beta: vec![beta],
            });
            br.log.push(format!(
                "order {}({}): alpha/D = {}/{} divides out t^{}",
                task.sys.family, task.sys.n, alpha, dd, beta
            ));
            br.tasks.push_front(task);
            return Ok(vec![br]);
        }
        let eps_set: Vec<u8> = if gamma % 2 == 0 { vec![0, 1] } else { vec![0] };
        let mut out = Vec::with_capacity(eps_set.len());
        for eps in eps_set {
            let step = ChartMap::power_substitution(vec![gamma], vec![eps]);
            let mut child = br.clone();
            extend_branch(&mut child, std::slice::from_ref(&step))?;
            let mut t2 = task.pulled(std::slice::from_ref(&step))?;
            for (j, c) in t2.f.iter_mut().enumerate() {
                *c = c.divide_by_coordinate(0, degs[j] * beta)?;
            }
            self.floor_check(&t2.f)?;
            t2.monom = t2
                .monom
                .mul(&Series::monomial(Scalar::one(), [beta, 0], 1));
            child.rho[0] = dyadic_root(&child.rho[0], gamma);
            child.monomials.push(MonomialStep {
                slots: (t2.lo, t2.lo + t2.sys.fiber_degree()),
                beta: vec![beta],
            });
            child.log.push(format!(
                "order {}({}): alpha/D = {}/{} -> beta {} gamma {} eps {}",
                t2.sys.family, t2.sys.n, alpha, dd, beta, gamma, eps
            ));
            child.tasks.push_front(t2);
            out.push(child);
        }
        Ok(out)
    }

    fn order_surface(&self, mut br: Branch, task: Task) -> Result<Vec<Branch>> {
        // Fast path: each nonzero component already a monomial times a unit.
        let mut alphas: Vec<Option<Expo>> = Vec::with_capacity(task.f.len());
        let mut fast = true;
        for c in &task.f {
            if c.is_zero_stored() {
                alphas.push(None);
                continue;
            }
            match c.series_order() {
                Ok((a, _)) => alphas.push(Some(a)),
                Err(Error::NotNormalCrossings(_)) => {
                    fast = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if fast && !self.real {
            // The minimum must be attained comparably; otherwise resolve.
            fast = scaled_orders(&task.sys, &alphas).is_some();
        }
        if fast {
            return self.order_surface_leaf(br, task, &alphas);
        }
        let (tracked, positions) = self.tracked_set(&task)?;
        let mut ropts = self.opts.resolve.clone();
        ropts.prec = self.opts.precision;
        ropts.rho0 = br
            .rho
            .iter()
            .min()
            .cloned()
            .unwrap_or_else(|| BigRational::one());
        let tree = resolve_nc_2d(&tracked, &ropts)?;
        br.log.push(format!(
            "resolve {}({}): {} tracked, {} leaves after {} blow-ups",
            task.sys.family,
            task.sys.n,
            tracked.len(),
            tree.leaves.len(),
            tree.blowups
        ));
        let mut out = Vec::new();
        for leaf in &tree.leaves {
            let mut child = br.clone();
            extend_branch(&mut child, &leaf.chain)?;
            let t2 = task.pulled(&leaf.chain)?;
            child.rho = leaf.rho.iter().map(|s| s.mid().0).collect();
            let mut leaf_alphas: Vec<Option<Expo>> = Vec::with_capacity(task.f.len());
            for pos in &positions {
                match pos {
                    None => leaf_alphas.push(None),
                    Some(i) => {
                        let a = leaf.alphas[*i].as_ref().ok_or_else(|| {
                            Error::Internal("resolved leaf lost a tracked certificate".into())
                        })?;
                        leaf_alphas.push(Some([a[0], a[1]]));
                    }
                }
            }
            out.extend(self.order_surface_leaf(child, t2, &leaf_alphas)?);
        }
        Ok(out)
    }

    /// The functions whose normal crossings the surface order stage needs:
    /// the nonzero components, plus (complex) the pairwise differences of
    /// their D/d_j-th powers so that leaf exponents become comparable.
    fn tracked_set(&self, task: &Task) -> Result<(Vec<Series>, Vec<Option<usize>>)> {
        let mut tracked = Vec::new();
        let mut positions = Vec::with_capacity(task.f.len());
        for c in &task.f {
            if c.is_zero_stored() {
                positions.push(None);
                continue;
            }
            if !c.is_polynomial() || !c.is_exact() {
                return Err(Error::Input(
                    "surface desingularization needs exact polynomial data; this subproblem \
                     reached it with truncated series"
                        .into(),
                ));
            }
            positions.push(Some(tracked.len()));
            tracked.push(c.clone());
        }
        if !self.real {
            let dd = task.sys.degree_product();
            let degs = task.sys.degrees();
            let mut powers: Vec<Series> = Vec::new();
            for (j, c) in task.f.iter().enumerate() {
                if !c.is_zero_stored() {
                    powers.push(c.pow((dd / degs[j] as u64) as u32));
                }
            }
            for i in 0..powers.len() {
                for k in (i + 1)..powers.len() {
                    let diff = powers[i].sub(&powers[k]);
                    if !diff.is_zero_stored() {
                        tracked.push(diff);
                    }
                }
            }
        }
        Ok((tracked, positions))
    }

    fn order_surface_leaf(
        &self,
        mut br: Branch,
        mut task: Task,
        alphas: &[Option<Expo>],
    ) -> Result<Vec<Branch>> {
        let degs = task.sys.degrees();
        if self.real {
            let av: Vec<Option<Vec<u32>>> = alphas
                .iter()
                .map(|a| a.map(|e| vec![e[0], e[1]]))
                .collect();
            let check = check_real_orders(&task.sys, &av);
            if !check.pass || check.delta.is_none() {
                return Err(Error::RealOrderViolation(check.detail));
            }
            let delta = check.delta.unwrap();
            if delta.iter().all(|&d| d == 0) {
                return Err(Error::Internal(
                    "vanishing base value with zero first-component order".into(),
                ));
            }
            for (j, c) in task.f.iter_mut().enumerate() {
                *c = divide_axes(c, degs[j] * delta[0], degs[j] * delta[1])?;
            }
            self.floor_check(&task.f)?;
            task.monom = task
                .monom
                .mul(&Series::monomial(Scalar::one(), [delta[0], delta[1]], 2));
            br.monomials.push(MonomialStep {
                slots: (task.lo, task.lo + task.sys.fiber_degree()),
                beta: delta.clone(),
            });
            br.log.push(format!(
                "real order {}({}): delta = {:?}",
                task.sys.family, task.sys.n, delta
            ));
            br.tasks.push_front(task);
            return Ok(vec![br]);
        }
        let dd = task.sys.degree_product();
        let alpha = scaled_orders(&task.sys, alphas).ok_or_else(|| {
            let present: Vec<Vec<u32>> = alphas
                .iter()
                .flatten()
                .map(|e| vec![e[0], e[1]])
                .collect();
            Error::IncomparableExponents {
                a: present.first().cloned().unwrap_or_default(),
                b: present.last().cloned().unwrap_or_default(),
            }
        })?;
        if alpha == [0, 0] {
            return Err(Error::Internal(
                "vanishing base value with zero minimal scaled order".into(),
            ));
        }
        let mut beta = [0u32; 2];
        let mut gamma = [0u32; 2];
        for k in 0..2 {
            let g = alpha[k].gcd(&dd);
            beta[k] = (alpha[k] / g) as u32;
            gamma[k] = (dd / g) as u32;
        }
        if gamma == [1, 1] {
            for (j, c) in task.f.iter_mut().enumerate() {
                *c = divide_axes(c, degs[j] * beta[0], degs[j] * beta[1])?;
            }
            self.floor_check(&task.f)?;
            task.monom = task
                .monom
                .mul(&Series::monomial(Scalar::one(), beta, 2));
            br.monomials.push(MonomialStep {
                slots: (task.lo, task.lo + task.sys.fiber_degree()),
                beta: beta.to_vec(),
            });
            br.log.push(format!(
                "order {}({}): alpha {:?}/{} divides out x^{:?}",
                task.sys.family, task.sys.n, alpha, dd, beta
            ));
            br.tasks.push_front(task);
            return Ok(vec![br]);
        }
        let mut out = Vec::new();
        for eps in parity_eps(&gamma) {
            let step = ChartMap::power_substitution(gamma.to_vec(), eps.clone());
            let mut child = br.clone();
            extend_branch(&mut child, std::slice::from_ref(&step))?;
            let mut t2 = task.pulled(std::slice::from_ref(&step))?;
            for (j, c) in t2.f.iter_mut().enumerate() {
                *c = divide_axes(c, degs[j] * beta[0], degs[j] * beta[1])?;
            }
            self.floor_check(&t2.f)?;
            t2.monom = t2.monom.mul(&Series::monomial(Scalar::one(), beta, 2));
            for k in 0..2 {
                child.rho[k] = dyadic_root(&child.rho[k], gamma[k]);
            }
            child.monomials.push(MonomialStep {
                slots: (t2.lo, t2.lo + t2.sys.fiber_degree()),
                beta: beta.to_vec(),
            });
            child.log.push(format!(
                "order {}({}): alpha {:?}/{} -> beta {:?} gamma {:?} eps {:?}",
                t2.sys.family, t2.sys.n, alpha, dd, beta, gamma, eps
            ));
            child.tasks.push_front(t2);
            out.push(child);
        }
        Ok(out)
    }
}

/// Scaled exponents (D/d_j) * alpha_j and their componentwise minimum, when
/// the tuples are pairwise comparable. None flags an incomparable pair.
fn scaled_orders(sys: &InvariantSystem, alphas: &[Option<Expo>]) -> Option<[u64; 2]> {
    let degs = sys.degrees();
    let dd = sys.degree_product();
    let mut scaled: Vec<[u64; 2]> = Vec::new();
    for (j, a) in alphas.iter().enumerate() {
        if let Some(e) = a {
            let s = dd / degs[j] as u64;
            scaled.push([e[0] as u64 * s, e[1] as u64 * s]);
        }
    }
    for i in 0..scaled.len() {
        for k in (i + 1)..scaled.len() {
            let (a, b) = (&scaled[i], &scaled[k]);
            let le = a[0] <= b[0] && a[1] <= b[1];
            let ge = a[0] >= b[0] && a[1] >= b[1];
            if !le && !ge {
                return None;
            }
        }
    }
    let mut min: Option<[u64; 2]> = None;
    for s in scaled {
        min = Some(match min {
            None => s,
            Some(m) => [m[0].min(s[0]), m[1].min(s[1])],
        });
    }
    min
}

fn divide_axes(s: &Series, k0: u32, k1: u32) -> Result<Series> {
    let mut out = s.clone();
    if k0 > 0 {
        out = out.divide_by_coordinate(0, k0)?;
    }
    if k1 > 0 {
        out = out.divide_by_coordinate(1, k1)?;
    }
    Ok(out)
}

/// Epsilon sign tuples for a power substitution: both signs on even-exponent
/// axes, the identity sign on odd ones (an odd power already covers both
/// signs of the parameter).
pub(crate) fn parity_eps(gamma: &[u32]) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for &g in gamma {
        let choices: &[u8] = if g % 2 == 0 { &[0, 1] } else { &[0] };
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for base in &out {
            for &c in choices {
                let mut b = base.clone();
                b.push(c);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn rat_pow(r: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= r;
    }
    acc
}

/// Largest dyadic 2^-k with (2^-k)^gamma <= r, capped at 1: a conservative
/// radius for the chart parameter after a power substitution.
fn dyadic_root(r: &BigRational, gamma: u32) -> BigRational {
    let one = BigRational::one();
    if *r >= one {
        return one;
    }
    if gamma <= 1 {
        return r.clone();
    }
    let mut c = one;
    for _ in 0..128 {
        c /= BigRational::from_integer(2.into());
        if rat_pow(&c, gamma) <= *r {
            break;
        }
    }
    c
}

/// Power sums p_2..p_n of a centered tuple from its elementary values
/// (e_1 must be identically zero).
fn elementary_to_power_sums(e: &[Series]) -> Vec<Series> {
    let n = e.len();
    if n == 0 {
        return Vec::new();
    }
    let nv = e[0].nvars;
    let mut p: Vec<Series> = vec![Series::zero(nv)];
    for k in 2..=n {
        let mut acc = Series::zero(nv);
        for i in 1..k {
            let term = e[i - 1].mul(&p[k - i - 1]);
            acc = if (i - 1) % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        let tail = e[k - 1].scale(&Scalar::from_int(k as i64));
        acc = if (k - 1) % 2 == 0 { acc.add(&tail) } else { acc.sub(&tail) };
        p.push(acc);
    }
    p.split_off(1)
}

/// Elementary values e_1..e_n of a trace-zero tuple from its power sums
/// p_2..p_n (p_1 = 0).
fn power_sums_to_elementary(p: &[Series], n: usize, nv: u8) -> Vec<Series> {
    assert_eq!(p.len() + 1, n, "expected power sums p_2..p_n");
    let psum = |i: usize| -> Series {
        if i == 1 {
            Series::zero(nv)
        } else {
            p[i - 2].clone()
        }
    };
    let mut e: Vec<Series> = vec![Series::one(nv)];
    for k in 1..=n {
        let mut acc = Series::zero(nv);
        for i in 1..=k {
            let term = e[k - i].mul(&psum(i));
            acc = if (i - 1) % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        e.push(acc.scale(&Scalar::from_ratio(1, k as i64)));
    }
    e.split_off(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::parse_series;

    fn s1(lit: &str) -> Series {
        parse_series(lit, 1, None).unwrap()
    }

    fn s2(lit: &str) -> Series {
        parse_series(lit, 2, None).unwrap()
    }

    fn sys(f: Family, n: usize) -> InvariantSystem {
        InvariantSystem::new(f, n).unwrap()
    }

    fn curve(f: Family, n: usize, comps: &[&str]) -> Vec<LiftChart> {
        let p = LiftProblem::new(
            sys(f, n),
            comps.iter().map(|c| s1(c)).collect(),
            LiftOptions::default(),
        )
        .unwrap();
        lift_curve(&p).unwrap()
    }

    fn surface(f: Family, n: usize, comps: &[&str]) -> Vec<LiftChart> {
        let p = LiftProblem::new(
            sys(f, n),
            comps.iter().map(|c| s2(c)).collect(),
            LiftOptions::default(),
        )
        .unwrap();
        lift_multi(&p).unwrap()
    }

    fn assert_verified(f: Family, n: usize, comps: Vec<Series>, charts: &[LiftChart], exact: bool) {
        let system = sys(f, n);
        assert!(!charts.is_empty());
        for ch in charts {
            let r = verify_chart(&system, &comps, ch).unwrap();
            assert!(r.ok, "residual not contained in zero: {:?}", r);
            if exact {
                assert!(r.exact, "expected an exact residual: {:?}", r);
            }
        }
    }

    #[test]
    fn constant_diagonal_is_removed() {
        let charts = curve(Family::SymmetricComplex, 2, &["2*t", "t^2"]);
        assert_eq!(charts.len(), 1);
        assert!(charts[0].chain.is_empty());
        assert_eq!(charts[0].lift, vec![s1("t"), s1("t")]);
        assert_eq!(charts[0].basepoint, vec![Scalar::zero(), Scalar::zero()]);
    }

    #[test]
    fn curve_power_substitution_with_both_signs() {
        let charts = curve(Family::SymmetricComplex, 2, &["0", "-t"]);
        assert_eq!(charts.len(), 2);
        assert_eq!(
            charts[0].chain,
            vec![ChartMap::power_substitution(vec![2], vec![0])]
        );
        assert_eq!(charts[0].lift, vec![s1("t"), s1("-t")]);
        assert_eq!(
            charts[1].chain,
            vec![ChartMap::power_substitution(vec![2], vec![1])]
        );
        assert_eq!(charts[1].lift, vec![s1("i*t"), s1("-i*t")]);
        assert_eq!(
            charts[0].monomials,
            vec![MonomialStep {
                slots: (0, 2),
                beta: vec![1]
            }]
        );
        assert_verified(
            Family::SymmetricComplex,
            2,
            vec![s1("0"), s1("-t")],
            &charts,
            true,
        );
    }

    #[test]
    fn curve_division_then_slice() {
        let charts = curve(Family::SymmetricComplex, 2, &["t + t^2", "t^3"]);
        assert_eq!(charts.len(), 1);
        assert!(charts[0].chain.is_empty());
        assert_eq!(charts[0].lift, vec![s1("t"), s1("t^2")]);
        assert_verified(
            Family::SymmetricComplex,
            2,
            vec![s1("t + t^2"), s1("t^3")],
            &charts,
            true,
        );
    }

    #[test]
    fn three_way_slice_recovers_distinct_roots() {
        // e_j(1 + t, 2 + t^2, 3)
        let f = vec![
            s1("6 + t + t^2"),
            s1("11 + 5*t + 4*t^2 + t^3"),
            s1("6 + 6*t + 3*t^2 + 3*t^3"),
        ];
        let p = LiftProblem::new(
            sys(Family::SymmetricComplex, 3),
            f.clone(),
            LiftOptions::default(),
        )
        .unwrap();
        let charts = lift_curve(&p).unwrap();
        assert_eq!(charts.len(), 1);
        assert_eq!(charts[0].lift, vec![s1("3"), s1("2 + t^2"), s1("1 + t")]);
        assert_verified(Family::SymmetricComplex, 3, f, &charts, true);
    }

    #[test]
    fn nested_cluster_order_recovers_multiset() {
        // e_j(t, t, t^3)
        let f = vec![
            s1("2*t + t^3"),
            s1("t^2 + 2*t^4"),
            s1("t^5"),
        ];
        let p = LiftProblem::new(
            sys(Family::SymmetricComplex, 3),
            f.clone(),
            LiftOptions::default(),
        )
        .unwrap();
        let charts = lift_curve(&p).unwrap();
        assert_eq!(charts.len(), 1);
        let mut want = vec![s1("t"), s1("t"), s1("t^3")];
        let mut got = charts[0].lift.clone();
        let key = |s: &Series| format!("{:?}", s);
        want.sort_by_key(&key);
        got.sort_by_key(&key);
        assert_eq!(got, want);
        assert_verified(Family::SymmetricComplex, 3, f, &charts, true);
    }

    #[test]
    fn signed_curve_divides_by_delta_without_substitution() {
        let charts = curve(Family::SignedPermReal, 1, &["t^2"]);
        assert_eq!(charts.len(), 1);
        assert!(charts[0].chain.is_empty());
        assert_eq!(charts[0].lift, vec![s1("t")]);
        assert_eq!(
            charts[0].monomials,
            vec![MonomialStep {
                slots: (0, 1),
                beta: vec![1]
            }]
        );
    }

    #[test]
    fn signed_curve_separates_two_magnitudes() {
        // e_j((t)^2, (2t)^2) = (5 t^2, 4 t^4)
        let f = vec![s1("5*t^2"), s1("4*t^4")];
        let p = LiftProblem::new(
            sys(Family::SignedPermReal, 2),
            f.clone(),
            LiftOptions::default(),
        )
        .unwrap();
        let charts = lift_curve(&p).unwrap();
        assert_eq!(charts.len(), 1);
        assert_eq!(charts[0].lift, vec![s1("2*t"), s1("t")]);
        assert_verified(Family::SignedPermReal, 2, f, &charts, true);
    }

    #[test]
    fn signed_curve_handles_coincident_squares() {
        // e_j(t^2, t^2) = (2 t^2, t^4): a single squared cluster of size two.
        let f = vec![s1("2*t^2"), s1("t^4")];
        let p = LiftProblem::new(
            sys(Family::SignedPermReal, 2),
            f.clone(),
            LiftOptions::default(),
        )
        .unwrap();
        let charts = lift_curve(&p).unwrap();
        assert_eq!(charts.len(), 1);
        assert_eq!(charts[0].lift, vec![s1("t"), s1("t")]);
        assert_verified(Family::SignedPermReal, 2, f, &charts, true);
    }

    #[test]
    fn trace_zero_curve_splits_symmetrically() {
        // p_2(t, -t) = 2 t^2
        let f = vec![s1("2*t^2")];
        let p = LiftProblem::new(
            sys(Family::SymmetricRealTraceZero, 2),
            f.clone(),
            LiftOptions::default(),
        )
        .unwrap();
        let charts = lift_curve(&p).unwrap();
        assert_eq!(charts.len(), 1);
        assert_eq!(charts[0].lift, vec![s1("t"), s1("-t")]);
        assert_verified(Family::SymmetricRealTraceZero, 2, f, &charts, true);
    }

    #[test]
    fn identically_zero_input_lifts_to_zero() {
        let charts = curve(Family::SymmetricComplex, 3, &["0", "0", "0"]);
        assert_eq!(charts.len(), 1);
        assert_eq!(
            charts[0].lift,
            vec![Series::zero(1), Series::zero(1), Series::zero(1)]
        );
    }

    #[test]
    fn zero_to_truncation_is_reported() {
        let f = vec![s1("0"), Series::zero_truncated(1, 6)];
        let p = LiftProblem::new(sys(Family::SymmetricComplex, 2), f, LiftOptions::default())
            .unwrap();
        assert_eq!(
            lift_curve(&p).unwrap_err(),
            Error::ZeroToTruncation { trunc: 6 }
        );
    }

    #[test]
    fn membership_gate_rejects_exterior_base_value() {
        let f = vec![s1("-1 + t")];
        let p = LiftProblem::new(sys(Family::SignedPermReal, 1), f, LiftOptions::default())
            .unwrap();
        assert!(matches!(lift_curve(&p), Err(Error::NotInImage(_))));
    }

    #[test]
    fn odd_first_order_violates_real_constraints() {
        let f = vec![s1("t^3")];
        let p = LiftProblem::new(sys(Family::SignedPermReal, 1), f, LiftOptions::default())
            .unwrap();
        assert!(matches!(lift_curve(&p), Err(Error::RealOrderViolation(_))));
    }

    #[test]
    fn real_order_check_verdicts() {
        let b1 = sys(Family::SignedPermReal, 1);
        let ok = check_real_orders(&b1, &[Some(vec![2])]);
        assert!(ok.pass);
        assert_eq!(ok.delta, Some(vec![1]));

        let b2 = sys(Family::SignedPermReal, 2);
        let ok2 = check_real_orders(&b2, &[Some(vec![2, 0]), Some(vec![4, 0])]);
        assert!(ok2.pass);
        assert_eq!(ok2.delta, Some(vec![1, 0]));

        let odd = check_real_orders(&b1, &[Some(vec![3])]);
        assert!(!odd.pass);
        assert_eq!(odd.delta, None);

        let low = check_real_orders(&b2, &[Some(vec![2, 2]), Some(vec![2, 0])]);
        assert!(!low.pass);
    }

    #[test]
    fn surface_monomial_divides_without_charts() {
        let charts = surface(Family::SymmetricComplex, 2, &["0", "-x^2*y^2"]);
        assert_eq!(charts.len(), 1);
        assert!(charts[0].chain.is_empty());
        assert_eq!(charts[0].lift, vec![s2("x*y"), s2("-x*y")]);
        assert_verified(
            Family::SymmetricComplex,
            2,
            vec![s2("0"), s2("-x^2*y^2")],
            &charts,
            true,
        );
    }

    #[test]
    fn surface_eps_charts_cover_both_axes() {
        let charts = surface(Family::SymmetricComplex, 2, &["0", "-x*y"]);
        assert_eq!(charts.len(), 4);
        let eps: Vec<Vec<u8>> = charts
            .iter()
            .map(|c| match &c.chain[..] {
                [ChartMap::PowerSubstitution { gamma, eps }] => {
                    assert_eq!(gamma, &vec![2, 2]);
                    eps.clone()
                }
                other => panic!("unexpected chain {:?}", other),
            })
            .collect();
        assert_eq!(eps, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(charts[0].lift, vec![s2("x*y"), s2("-x*y")]);
        assert_verified(
            Family::SymmetricComplex,
            2,
            vec![s2("0"), s2("-x*y")],
            &charts,
            true,
        );
    }

    #[test]
    fn surface_mixed_parity_puts_signs_on_even_axis_only() {
        let charts = surface(Family::SymmetricComplex, 2, &["0", "-x^3*y^2"]);
        assert_eq!(charts.len(), 2);
        for (i, ch) in charts.iter().enumerate() {
            match &ch.chain[..] {
                [ChartMap::PowerSubstitution { gamma, eps }] => {
                    assert_eq!(gamma, &vec![2, 1]);
                    assert_eq!(eps, &vec![i as u8, 0]);
                }
                other => panic!("unexpected chain {:?}", other),
            }
        }
        assert_eq!(charts[0].lift, vec![s2("x^3*y"), s2("-x^3*y")]);
        assert_verified(
            Family::SymmetricComplex,
            2,
            vec![s2("0"), s2("-x^3*y^2")],
            &charts,
            true,
        );
    }

    #[test]
    fn signed_surface_lifts_through_blow_ups() {
        let f = vec![s2("x^2 + y^2")];
        let p = LiftProblem::new(
            sys(Family::SignedPermReal, 1),
            f.clone(),
            LiftOptions::default(),
        )
        .unwrap();
        let charts = lift_multi(&p).unwrap();
        assert!(charts.len() >= 2);
        for ch in &charts {
            assert!(ch
                .chain
                .iter()
                .any(|c| matches!(c, ChartMap::BlowUp { .. })));
            assert!(!ch
                .chain
                .iter()
                .any(|c| matches!(c, ChartMap::PowerSubstitution { .. })));
            assert!(!ch.monomials.is_empty());
            let r = verify_chart(&sys(Family::SignedPermReal, 1), &f, ch).unwrap();
            assert!(r.ok, "chart residual escaped zero: {:?}", r);
        }
    }

    #[test]
    fn signed_surface_splits_an_already_monomial_pair() {
        // e_j((x)^2, (xy)^2) = (x^2 + x^2 y^2, x^4 y^2)
        let f = vec![s2("x^2 + x^2*y^2"), s2("x^4*y^2")];
        let p = LiftProblem::new(
            sys(Family::SignedPermReal, 2),
            f.clone(),
            LiftOptions::default(),
        )
        .unwrap();
        let charts = lift_multi(&p).unwrap();
        assert_eq!(charts.len(), 1);
        assert!(charts[0].chain.is_empty());
        assert_eq!(charts[0].lift, vec![s2("x"), s2("x*y")]);
        assert_verified(Family::SignedPermReal, 2, f, &charts, true);
    }

    #[test]
    fn signed_surface_resolves_nested_zero_cluster() {
        // e_j((x)^2, (xy)^2) pulled back from the blown-down pair (x, xy):
        // the raw data (x^2 + y^2, x^2 y^2) needs one blow-up, then a slice
        // whose zero cluster re-enters the recursion with a smaller group.
        let f = vec![s2("x^2 + y^2"), s2("x^2*y^2")];
        let p = LiftProblem::new(
            sys(Family::SignedPermReal, 2),
            f.clone(),
            LiftOptions::default(),
        )
        .unwrap();
        let charts = lift_multi(&p).unwrap();
        assert!(charts.len() >= 2);
        for ch in &charts {
            assert!(ch
                .chain
                .iter()
                .any(|c| matches!(c, ChartMap::BlowUp { .. })));
            assert!(!ch
                .chain
                .iter()
                .any(|c| matches!(c, ChartMap::PowerSubstitution { .. })));
        }
        assert_verified(Family::SignedPermReal, 2, f, &charts, true);
        assert_eq!(charts[0].lift, vec![s2("x"), s2("x*y")]);
    }

    #[test]
    fn complex_surface_resolves_then_slices() {
        let f = vec![s2("0"), s2("-(x^2 + y^2)^2")];
        let comps = vec![s2("0"), s2("-x^4 - 2*x^2*y^2 - y^4")];
        assert_eq!(f[1], comps[1]);
        let p = LiftProblem::new(
            sys(Family::SymmetricComplex, 2),
            comps.clone(),
            LiftOptions::default(),
        )
        .unwrap();
        let charts = lift_multi(&p).unwrap();
        assert!(charts.len() >= 2);
        for ch in &charts {
            assert!(ch
                .chain
                .iter()
                .any(|c| matches!(c, ChartMap::BlowUp { .. })));
        }
        assert_verified(Family::SymmetricComplex, 2, comps, &charts, true);
    }

    #[test]
    fn surface_rejects_truncated_input() {
        let f = vec![
            Series::zero_truncated(2, 8),
            parse_series("-x*y", 2, Some(8)).unwrap(),
        ];
        let p = LiftProblem::new(sys(Family::SymmetricComplex, 2), f, LiftOptions::default())
            .unwrap();
        assert!(matches!(lift_multi(&p), Err(Error::Input(_))));
    }

    #[test]
    fn budget_is_enforced() {
        let mut options = LiftOptions::default();
        options.max_steps = 1;
        let f = vec![s1("t + t^2"), s1("t^3")];
        let p = LiftProblem::new(sys(Family::SymmetricComplex, 2), f, options).unwrap();
        assert!(matches!(
            lift_curve(&p),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn chart_serialization_round_trips() {
        let charts = curve(Family::SymmetricComplex, 2, &["0", "-t"]);
        let text = serde_json::to_string(&charts[0]).unwrap();
        let back: LiftChart = serde_json::from_str(&text).unwrap();
        assert_eq!(back, charts[0]);
    }

    #[test]
    fn newton_conversions_are_inverse() {
        let e = vec![s1("0"), s1("t - t^2"), s1("3*t^3")];
        let p = elementary_to_power_sums(&e);
        assert_eq!(p.len(), 2);
        let back = power_sums_to_elementary(&p, 3, 1);
        assert_eq!(back[0], Series::zero(1));
        assert_eq!(back[1], e[1]);
        assert_eq!(back[2], e[2]);
    }
}
