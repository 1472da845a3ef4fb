//! The three concrete invariant systems handled by this crate, with exact
//! evaluation, fiber reconstruction, membership certification for the real
//! families, and the slice decomposition used by the lifting recursion.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multipoly::{
    elementary_symmetric, power_sum_in_power_sums_trace_zero, symmetric_reduce, MultiPoly,
};
use crate::roots::{isolate_clusters, RootCluster};
use crate::scalar::Scalar;
use crate::series::Series;
use crate::series_poly::SeriesPoly;

/// The group actions with hardcoded generator sets.
///
/// * `SymmetricComplex`: permutations of complex n-space, generated by the
///   elementary symmetric functions e_1..e_n, degrees 1..n.
/// * `SignedPermReal`: permutations and sign flips of real n-space,
///   generated by e_j applied to the squared coordinates, degrees 2..2n.
/// * `SymmetricRealTraceZero`: permutations of the real hyperplane
///   x_1+...+x_n = 0, generated by the power sums p_2..p_n, degrees 2..n.
///
/// In every case the first generator is (up to a permutation-invariant
/// change of basis) the squared norm, so the generator tuple starts with a
/// definite quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SymmetricComplex,
    SignedPermReal,
    SymmetricRealTraceZero,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::SymmetricComplex => "symmetric_complex",
            Family::SignedPermReal => "signed_perm_real",
            Family::SymmetricRealTraceZero => "symmetric_real_trace_zero",
        };
        f.write_str(s)
    }
}

/// A fixed group action on n coordinates together with its generator set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvariantSystem {
    pub family: Family,
    pub n: usize,
}

/// Outcome of the image membership test for the real families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// Certified in the image (boundary points count as inside).
    Inside,
    /// Certified not in the image.
    Outside,
    /// The certification failed at the working precision.
    Indeterminate,
}

/// One cluster of the fiber over a nonzero base point, with the subsystem
/// the lifting recursion descends into.
#[derive(Debug, Clone)]
pub struct SliceCluster {
    pub subsystem: InvariantSystem,
    /// Cluster center in the fiber coordinate. For `SignedPermReal` this is
    /// a squared-coordinate value; for the other families a coordinate value.
    pub center: Scalar,
    pub size: usize,
}

impl InvariantSystem {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("invariant system needs n >= 1".into()));
        }
        Ok(InvariantSystem { family, n })
    }

    /// Number of generators (and of base coordinates).
    pub fn num_invariants(&self) -> usize {
        match self.family {
            Family::SymmetricComplex | Family::SignedPermReal => self.n,
            Family::SymmetricRealTraceZero => self.n - 1,
        }
    }

    /// Degree of the fiber polynomial produced by `fiber_poly`.
    pub fn fiber_degree(&self) -> usize {
        self.n
    }

    pub fn is_real(&self) -> bool {
        !matches!(self.family, Family::SymmetricComplex)
    }

    /// Generator degrees d_1 <= ... <= d_m.
    pub fn degrees(&self) -> Vec<u32> {
        match self.family {
            Family::SymmetricComplex => (1..=self.n as u32).collect(),
            Family::SignedPermReal => (1..=self.n as u32).map(|j| 2 * j).collect(),
            Family::SymmetricRealTraceZero => (2..=self.n as u32).collect(),
        }
    }

    /// Product of the generator degrees.
    pub fn degree_product(&self) -> u64 {
        self.degrees().iter().map(|&d| d as u64).product()
    }

    pub fn group_order(&self) -> u128 {
        let fact = |n: usize| -> u128 { (1..=n as u128).product::<u128>().max(1) };
        match self.family {
            Family::SymmetricComplex | Family::SymmetricRealTraceZero => fact(self.n),
            Family::SignedPermReal => (1u128 << self.n) * fact(self.n),
        }
    }

    /// The generators as polynomials in the ambient coordinates x_1..x_n.
    pub fn generators(&self) -> Vec<MultiPoly> {
        match self.family {
            Family::SymmetricComplex => (1..=self.n)
                .map(|j| elementary_symmetric(self.n, j))
                .collect(),
            Family::SignedPermReal => (1..=self.n)
                .map(|j| elementary_symmetric(self.n, j).stretch_exponents(2))
                .collect(),
            Family::SymmetricRealTraceZero => (2..=self.n)
                .map(|k| crate::multipoly::power_sum(self.n, k as u32))
                .collect(),
        }
    }

    pub fn generator_strings(&self) -> Vec<String> {
        let names: Vec<String> = (1..=self.n).map(|i| format!("x{}", i)).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        self.generators()
            .iter()
            .map(|g| g.to_string_with(&refs))
            .collect()
    }

    fn check_point_dim(&self, v: &[Scalar]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::Input(format!(
                "expected {} coordinates, got {}",
                self.n,
                v.len()
            )));
        }
        if self.is_real() {
            for s in v {
                let (_, im) = s.mid();
                if !im.is_zero() {
                    return Err(Error::Input(
                        "real family evaluated at a point with nonzero imaginary part".into(),
                    ));
                }
            }
        }
        if matches!(self.family, Family::SymmetricRealTraceZero) {
            let mut sum = Scalar::zero();
            for s in v {
                sum = sum.add(s);
            }
            if sum.nonzero_certified() == Some(true) {
                return Err(Error::Input(
                    "trace-zero family evaluated at a point with nonzero coordinate sum".into(),
                ));
            }
        }
        Ok(())
    }

    fn check_base_dim(&self, z: &[Scalar]) -> Result<()> {
        if z.len() != self.num_invariants() {
            return Err(Error::Input(format!(
                "expected {} invariant values, got {}",
                self.num_invariants(),
                z.len()
            )));
        }
        Ok(())
    }

    /// Evaluate the generator tuple at a point. Exact input gives exact
    /// output.
    pub fn sigma_eval(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        self.check_point_dim(v)?;
        Ok(self.generators().iter().map(|g| g.eval_scalar(v)).collect())
    }

    /// Evaluate the generator tuple on series arguments.
    pub fn sigma_eval_series(&self, v: &[Series]) -> Result<Vec<Series>> {
        if v.len() != self.n {
            return Err(Error::Input(format!(
                "expected {} coordinate series, got {}",
                self.n,
                v.len()
            )));
        }
        Ok(self.generators().iter().map(|g| g.eval_series(v)).collect())
    }

    /// Monic polynomial (ascending coefficients) whose root multiset is the
    /// fiber data over z: the coordinate values for `SymmetricComplex` and
    /// `SymmetricRealTraceZero`, the squared coordinate values for
    /// `SignedPermReal`.
    pub fn fiber_poly(&self, z: &[Scalar]) -> Result<Vec<Scalar>> {
        self.check_base_dim(z)?;
        let n = self.n;
        let e: Vec<Scalar> = match self.family {
            Family::SymmetricComplex | Family::SignedPermReal => z.to_vec(),
            Family::SymmetricRealTraceZero => {
                // Recover e_1..e_n from p_1 = 0, p_k = z_(k-1) by the
                // Newton recurrence k e_k = sum_{i<=k} (-1)^(i-1) e_(k-i) p_i.
                let p = |i: usize| -> Scalar {
                    if i == 1 {
                        Scalar::zero()
                    } else {
                        z[i - 2].clone()
                    }
                };
                let mut e: Vec<Scalar> = vec![Scalar::one()];
                for k in 1..=n {
                    let mut acc = Scalar::zero();
                    for i in 1..=k {
                        let term = e[k - i].mul(&p(i));
                        acc = if i % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
                    }
                    let ek = acc
                        .div(&Scalar::from_int(k as i64))
                        .expect("division by a nonzero integer");
                    e.push(ek);
                }
                e.remove(0);
                e
            }
        };
        let mut coeffs = vec![Scalar::zero(); n + 1];
        coeffs[n] = Scalar::one();
        for (j, ej) in e.iter().enumerate() {
            // e_(j+1) contributes (-1)^(j+1) e_(j+1) at degree n-j-1.
            let signed = if (j + 1) % 2 == 1 { ej.neg() } else { ej.clone() };
            coeffs[n - j - 1] = signed;
        }
        Ok(coeffs)
    }

    /// The multiset of coordinate values over a base point, as certified
    /// enclosures (exact where reconstruction succeeds exactly), sorted in
    /// descending coordinate order.
    ///
    /// For the real families the point must pass the membership test; for
    /// `SignedPermReal` the result lists both square roots of every squared
    /// value, so it has 2n entries.
    pub fn roots_from_invariants(&self, z: &[Scalar], prec: u32) -> Result<Vec<Scalar>> {
        self.check_base_dim(z)?;
        if self.is_real() {
            match self.membership_test(z)? {
                Membership::Inside => {}
                Membership::Outside => {
                    return Err(Error::NotInImage(format!(
                        "point is outside the image of the {} orbit map",
                        self.family
                    )))
                }
                Membership::Indeterminate => {
                    return Err(Error::PrecisionExhausted {
                        decision: "image membership at the working precision".into(),
                        prec,
                        cap: prec,
                    })
                }
            }
        }
        let poly = self.fiber_poly(z)?;
        let clusters = isolate_clusters(&poly, prec)?;
        let mut out: Vec<Scalar> = Vec::new();
        match self.family {
            Family::SymmetricComplex | Family::SymmetricRealTraceZero => {
                for c in &clusters {
                    for _ in 0..c.multiplicity {
                        out.push(c.center.clone());
                    }
                }
            }
            Family::SignedPermReal => {
                for c in &clusters {
                    match c.center.sign_certified() {
                        Some(std::cmp::Ordering::Equal) => {
                            for _ in 0..2 * c.multiplicity {
                                out.push(Scalar::zero());
                            }
                        }
                        Some(std::cmp::Ordering::Greater) => {
                            let s = c.center.sqrt(prec)?;
                            for _ in 0..c.multiplicity {
                                out.push(s.clone());
                            }
                            for _ in 0..c.multiplicity {
                                out.push(s.neg());
                            }
                        }
                        Some(std::cmp::Ordering::Less) => {
                            return Err(Error::Internal(
                                "negative squared-coordinate cluster after a positive \
                                 membership test"
                                    .into(),
                            ))
                        }
                        None => {
                            return Err(Error::PrecisionExhausted {
                                decision: "sign of a squared-coordinate cluster".into(),
                                prec,
                                cap: prec,
                            })
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| b.cmp_mid_lex(a));
        Ok(out)
    }

    /// Gram matrix of the generator differentials at a point, for the real
    /// families: entry (j,k) is the Euclidean inner product of grad(sigma_j)
    /// and grad(sigma_k) at v, with the gradients projected onto the
    /// trace-zero hyperplane for `SymmetricRealTraceZero`.
    pub fn gram_matrix(&self, v: &[Scalar]) -> Result<Vec<Vec<Scalar>>> {
        if !self.is_real() {
            return Err(Error::UnsupportedFamily(
                "the gram matrix is defined for the real families only".into(),
            ));
        }
        self.check_point_dim(v)?;
        let m = self.num_invariants();
        match self.family {
            Family::SignedPermReal => {
                let gens = self.generators();
                let grads: Vec<Vec<MultiPoly>> = gens
                    .iter()
                    .map(|g| (0..self.n).map(|i| g.derivative(i)).collect())
                    .collect();
                let mut out = vec![vec![Scalar::zero(); m]; m];
                for j in 0..m {
                    for k in j..m {
                        let mut acc = Scalar::zero();
                        for i in 0..self.n {
                            let t = grads[j][i].eval_scalar(v).mul(&grads[k][i].eval_scalar(v));
                            acc = acc.add(&t);
                        }
                        out[j][k] = acc.clone();
                        out[k][j] = acc;
                    }
                }
                Ok(out)
            }
            Family::SymmetricRealTraceZero => {
                // grad p_a = a x^(a-1) entrywise, so after projecting off the
                // all-ones direction the inner product is
                // a b (p_(a+b-2) - p_(a-1) p_(b-1) / n).
                let pws: Vec<Scalar> = (0..=2 * self.n)
                    .map(|k| {
                        let mut acc = Scalar::zero();
                        for x in v {
                            acc = acc.add(&x.pow(k as u32));
                        }
                        acc
                    })
                    .collect();
                let n_inv = Scalar::from_ratio(1, self.n as i64);
                let mut out = vec![vec![Scalar::zero(); m]; m];
                for j in 0..m {
                    for k in j..m {
                        let (a, b) = (j + 2, k + 2);
                        let ab = Scalar::from_int((a * b) as i64);
                        let cross = pws[a - 1].mul(&pws[b - 1]).mul(&n_inv);
                        let entry = ab.mul(&pws[a + b - 2].sub(&cross));
                        out[j][k] = entry.clone();
                        out[k][j] = entry;
                    }
                }
                Ok(out)
            }
            Family::SymmetricComplex => unreachable!(),
        }
    }

    /// The Gram matrix pushed down to the base: a matrix of polynomials in
    /// the invariant values z_1..z_m with B~(sigma(v)) = gram_matrix(v).
    /// Cached per (family, n).
    pub fn gram_pushdown(&self) -> Result<Arc<Vec<Vec<MultiPoly>>>> {
        if !self.is_real() {
            return Err(Error::UnsupportedFamily(
                "the pushed-down gram matrix is defined for the real families only".into(),
            ));
        }
        static CACHE: OnceLock<Mutex<HashMap<(Family, usize), Arc<Vec<Vec<MultiPoly>>>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        {
            let guard = cache.lock().expect("gram cache poisoned");
            if let Some(m) = guard.get(&(self.family, self.n)) {
                return Ok(m.clone());
            }
        }
        let built = Arc::new(self.build_gram_pushdown()?);
        let mut guard = cache.lock().expect("gram cache poisoned");
        Ok(guard
            .entry((self.family, self.n))
            .or_insert(built)
            .clone())
    }

    fn build_gram_pushdown(&self) -> Result<Vec<Vec<MultiPoly>>> {
        let m = self.num_invariants();
        match self.family {
            Family::SignedPermReal => {
                // In the squared coordinates w_i = x_i^2 the entries are
                // 4 sum_i w_i (de_j/dw_i)(de_k/dw_i), symmetric in w, so they
                // reduce to polynomials in e_1(w)..e_n(w) = z.
                let n = self.n;
                let e: Vec<MultiPoly> = (1..=n).map(|j| elementary_symmetric(n, j)).collect();
                let four = BigRational::from_integer(4.into());
                let mut out = vec![vec![MultiPoly::zero(m); m]; m];
                for j in 0..m {
                    for k in j..m {
                        let mut acc = MultiPoly::zero(n);
                        for i in 0..n {
                            let prod = e[j].derivative(i).mul(&e[k].derivative(i));
                            acc = acc.add(&MultiPoly::var(i, n).mul(&prod));
                        }
                        let reduced = symmetric_reduce(&acc.scale(&four))?;
                        out[j][k] = reduced.clone();
                        out[k][j] = reduced;
                    }
                }
                Ok(out)
            }
            Family::SymmetricRealTraceZero => {
                let n = self.n;
                let mut out = vec![vec![MultiPoly::zero(m); m]; m];
                for j in 0..m {
                    for k in j..m {
                        let (a, b) = (j + 2, k + 2);
                        let pa1 = power_sum_in_power_sums_trace_zero(n, a - 1);
                        let pb1 = power_sum_in_power_sums_trace_zero(n, b - 1);
                        let pab = power_sum_in_power_sums_trace_zero(n, a + b - 2);
                        let ninv = BigRational::new(1.into(), (n as i64).into());
                        let ab = BigRational::from_integer(((a * b) as i64).into());
                        let entry = pab.sub(&pa1.mul(&pb1).scale(&ninv)).scale(&ab);
                        out[j][k] = entry.clone();
                        out[k][j] = entry;
                    }
                }
                Ok(out)
            }
            Family::SymmetricComplex => unreachable!(),
        }
    }

    /// Certified test of whether z lies in the image of the orbit map, via
    /// positive semidefiniteness of the pushed-down Gram matrix: all
    /// principal minors must be nonnegative. Boundary points are inside.
    pub fn membership_test(&self, z: &[Scalar]) -> Result<Membership> {
        if !self.is_real() {
            return Err(Error::UnsupportedFamily(
                "membership is only tested for the real families; the complex orbit map \
                 is surjective"
                    .into(),
            ));
        }
        self.check_base_dim(z)?;
        let tilde = self.gram_pushdown()?;
        let m = self.num_invariants();
        let entries: Vec<Vec<Scalar>> = tilde
            .iter()
            .map(|row| row.iter().map(|p| p.eval_scalar(z)).collect())
            .collect();
        let mut indeterminate = false;
        // Positive semidefiniteness of a symmetric matrix is equivalent to
        // nonnegativity of all principal minors, not only the leading ones.
        for mask in 1u32..(1 << m) {
            let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let sub: Vec<Vec<Scalar>> = idx
                .iter()
                .map(|&r| idx.iter().map(|&c| entries[r][c].clone()).collect())
                .collect();
            let d = scalar_det(&sub);
            match d.sign_certified() {
                Some(std::cmp::Ordering::Less) => return Ok(Membership::Outside),
                Some(_) => {}
                None => indeterminate = true,
            }
        }
        if indeterminate {
            Ok(Membership::Indeterminate)
        } else {
            Ok(Membership::Inside)
        }
    }

    /// Decompose the fiber over a nonzero base point into root clusters,
    /// each with the subsystem the recursion continues in. Clusters are
    /// listed in ascending center order.
    ///
    /// For `SignedPermReal` the clusters live in the squared coordinate: a
    /// cluster at a positive center descends to the symmetric group on the
    /// nearby coordinates (trace-zero after recentering), a cluster at zero
    /// keeps the sign flips and stays in the same family.
    pub fn slice_split(&self, z: &[Scalar], prec: u32) -> Result<Vec<SliceCluster>> {
        self.check_base_dim(z)?;
        if z.iter().all(|s| s.is_zero_exact()) {
            return Err(Error::Input(
                "slice decomposition requires a nonzero base point".into(),
            ));
        }
        if self.is_real() {
            match self.membership_test(z)? {
                Membership::Inside => {}
                Membership::Outside => {
                    return Err(Error::NotInImage(format!(
                        "point is outside the image of the {} orbit map",
                        self.family
                    )))
                }
                Membership::Indeterminate => {
                    return Err(Error::PrecisionExhausted {
                        decision: "image membership at the working precision".into(),
                        prec,
                        cap: prec,
                    })
                }
            }
        }
        let poly = self.fiber_poly(z)?;
        let mut clusters: Vec<RootCluster> = isolate_clusters(&poly, prec)?;
        clusters.sort_by(|a, b| a.center.cmp_mid_lex(&b.center));
        let mut out = Vec::with_capacity(clusters.len());
        for c in clusters {
            let subsystem = match self.family {
                Family::SymmetricComplex => {
                    InvariantSystem::new(Family::SymmetricComplex, c.multiplicity)?
                }
                Family::SymmetricRealTraceZero => {
                    InvariantSystem::new(Family::SymmetricRealTraceZero, c.multiplicity)?
                }
                Family::SignedPermReal => match c.center.sign_certified() {
                    Some(std::cmp::Ordering::Equal) => {
                        InvariantSystem::new(Family::SignedPermReal, c.multiplicity)?
                    }
                    Some(std::cmp::Ordering::Greater) => {
                        InvariantSystem::new(Family::SymmetricRealTraceZero, c.multiplicity)?
                    }
                    Some(std::cmp::Ordering::Less) => {
                        return Err(Error::Internal(
                            "negative squared-coordinate cluster after a positive \
                             membership test"
                                .into(),
                        ))
                    }
                    None => {
                        return Err(Error::PrecisionExhausted {
                            decision: "sign of a squared-coordinate cluster".into(),
                            prec,
                            cap: prec,
                        })
                    }
                },
            };
            out.push(SliceCluster {
                subsystem,
                center: c.center,
                size: c.multiplicity,
            });
        }
        Ok(out)
    }
}

/// Determinant of a small scalar matrix by cofactor expansion.
pub fn scalar_det(mat: &[Vec<Scalar>]) -> Scalar {
    let n = mat.len();
    assert!(n > 0);
    if n == 1 {
        return mat[0][0].clone();
    }
    let mut acc = Scalar::zero();
    for j in 0..n {
        if mat[0][j].is_zero_exact() {
            continue;
        }
        let minor: Vec<Vec<Scalar>> = mat[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, s)| s.clone())
                    .collect()
            })
            .collect();
        let cof = mat[0][j].mul(&scalar_det(&minor));
        acc = if j % 2 == 0 { acc.add(&cof) } else { acc.sub(&cof) };
    }
    acc
}

/// Remove the fixed-point component of a parameter map into the complex
/// symmetric base: with f_0 = f_1 / n, shifting every fiber root by -f_0
/// makes the first invariant vanish identically. Returns (f_0, the system,
/// the reduced invariant tuple).
pub fn remove_fixed_points(
    sys: &InvariantSystem,
    f: &[Series],
) -> Result<(Series, InvariantSystem, Vec<Series>)> {
    if sys.family != Family::SymmetricComplex {
        return Err(Error::UnsupportedFamily(
            "fixed-point removal by a mean shift applies to the complex symmetric family".into(),
        ));
    }
    if f.len() != sys.n {
        return Err(Error::Input(format!(
            "expected {} invariant series, got {}",
            sys.n,
            f.len()
        )));
    }
    let nvars = f[0].nvars;
    let f0 = f[0].scale(&Scalar::from_ratio(1, sys.n as i64));
    if f0.is_zero_stored() {
        return Ok((f0, *sys, f.to_vec()));
    }
    let poly = SeriesPoly::from_elementary(f, nvars);
    let shifted = poly.taylor_shift_z(&f0);
    let mut reduced = shifted.elementary();
    // The coefficient at z^(n-1) is -f_1 + n f_0 = 0 by construction; pin
    // the exact zero rather than keep a radius-inflated residue.
    reduced[0] = match reduced[0].trunc {
        Some(tn) => Series::zero_truncated(nvars, tn),
        None => Series::zero(nvars),
    };
    Ok((f0, *sys, reduced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::big;

    fn exact(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn sys(f: Family, n: usize) -> InvariantSystem {
        InvariantSystem::new(f, n).unwrap()
    }

    #[test]
    fn degrees_and_counts() {
        let s3 = sys(Family::SymmetricComplex, 3);
        assert_eq!(s3.degrees(), vec![1, 2, 3]);
        assert_eq!(s3.degree_product(), 6);
        assert_eq!(s3.group_order(), 6);
        let b2 = sys(Family::SignedPermReal, 2);
        assert_eq!(b2.degrees(), vec![2, 4]);
        assert_eq!(b2.group_order(), 8);
        let a3 = sys(Family::SymmetricRealTraceZero, 3);
        assert_eq!(a3.degrees(), vec![2, 3]);
        assert_eq!(a3.num_invariants(), 2);
    }

    #[test]
    fn sigma_eval_matches_hand_values() {
        let s2 = sys(Family::SymmetricComplex, 2);
        let z = s2.sigma_eval(&[exact(1), exact(2)]).unwrap();
        assert_eq!(z, vec![exact(3), exact(2)]);

        let b2 = sys(Family::SignedPermReal, 2);
        let z = b2.sigma_eval(&[exact(1), exact(2)]).unwrap();
        assert_eq!(z, vec![exact(5), exact(4)]);

        let a3 = sys(Family::SymmetricRealTraceZero, 3);
        let z = a3.sigma_eval(&[exact(1), exact(1), exact(-2)]).unwrap();
        assert_eq!(z, vec![exact(6), exact(-6)]);
    }

    #[test]
    fn sigma_eval_rejects_bad_points() {
        let a3 = sys(Family::SymmetricRealTraceZero, 3);
        assert!(a3.sigma_eval(&[exact(1), exact(1), exact(1)]).is_err());
        let b1 = sys(Family::SignedPermReal, 1);
        assert!(b1.sigma_eval(&[Scalar::i()]).is_err());
    }

    #[test]
    fn roots_from_invariants_complex() {
        let s2 = sys(Family::SymmetricComplex, 2);
        let r = s2
            .roots_from_invariants(&[Scalar::zero(), exact(-1)], 128)
            .unwrap();
        assert_eq!(r, vec![exact(1), exact(-1)]);
        let r = s2.roots_from_invariants(&[exact(2), exact(1)], 128).unwrap();
        assert_eq!(r, vec![exact(1), exact(1)]);
    }

    #[test]
    fn roots_from_invariants_signed() {
        let b1 = sys(Family::SignedPermReal, 1);
        let r = b1.roots_from_invariants(&[exact(4)], 128).unwrap();
        assert_eq!(r, vec![exact(2), exact(-2)]);
        match b1.roots_from_invariants(&[exact(-1)], 128) {
            Err(Error::NotInImage(_)) => {}
            other => panic!("expected a membership rejection, got {:?}", other),
        }
    }

    #[test]
    fn roots_from_invariants_trace_zero() {
        let a3 = sys(Family::SymmetricRealTraceZero, 3);
        let r = a3.roots_from_invariants(&[exact(6), exact(-6)], 128).unwrap();
        assert_eq!(r, vec![exact(1), exact(1), exact(-2)]);
    }

    #[test]
    fn roots_invert_sigma() {
        let s3 = sys(Family::SymmetricComplex, 3);
        let v = vec![exact(3), exact(2), exact(1)];
        let z = s3.sigma_eval(&v).unwrap();
        let r = s3.roots_from_invariants(&z, 128).unwrap();
        assert_eq!(r, v);
    }

    #[test]
    fn gram_matrix_signed_perm() {
        let b1 = sys(Family::SignedPermReal, 1);
        let g = b1.gram_matrix(&[exact(3)]).unwrap();
        assert_eq!(g, vec![vec![exact(36)]]);

        let b2 = sys(Family::SignedPermReal, 2);
        let g = b2.gram_matrix(&[exact(1), exact(2)]).unwrap();
        assert_eq!(
            g,
            vec![vec![exact(20), exact(32)], vec![exact(32), exact(80)]]
        );
        let g0 = b2.gram_matrix(&[Scalar::zero(), Scalar::zero()]).unwrap();
        assert!(g0.iter().flatten().all(|s| s.is_zero_exact()));
    }

    #[test]
    fn gram_pushdown_matrices_are_the_expected_polynomials() {
        let b2 = sys(Family::SignedPermReal, 2);
        let t = b2.gram_pushdown().unwrap();
        let names = ["z1", "z2"];
        assert_eq!(t[0][0].to_string_with(&names), "4*z1");
        assert_eq!(t[0][1].to_string_with(&names), "8*z2");
        assert_eq!(t[1][1].to_string_with(&names), "4*z1*z2");

        let a3 = sys(Family::SymmetricRealTraceZero, 3);
        let t = a3.gram_pushdown().unwrap();
        assert_eq!(t[0][0].to_string_with(&names), "4*z1");
        assert_eq!(t[0][1].to_string_with(&names), "6*z2");
        assert_eq!(t[1][1].to_string_with(&names), "3/2*z1^2");
    }

    #[test]
    fn pushdown_agrees_with_gram_at_points() {
        let b2 = sys(Family::SignedPermReal, 2);
        let v = vec![exact(1), exact(2)];
        let z = b2.sigma_eval(&v).unwrap();
        let direct = b2.gram_matrix(&v).unwrap();
        let tilde = b2.gram_pushdown().unwrap();
        for j in 0..2 {
            for k in 0..2 {
                assert_eq!(tilde[j][k].eval_scalar(&z), direct[j][k]);
            }
        }

        let a4 = sys(Family::SymmetricRealTraceZero, 4);
        let v = vec![exact(1), exact(2), exact(4), exact(-7)];
        let z = a4.sigma_eval(&v).unwrap();
        let direct = a4.gram_matrix(&v).unwrap();
        let tilde = a4.gram_pushdown().unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(tilde[j][k].eval_scalar(&z), direct[j][k]);
            }
        }
    }

    #[test]
    fn membership_verdicts() {
        let b1 = sys(Family::SignedPermReal, 1);
        assert_eq!(b1.membership_test(&[exact(1)]).unwrap(), Membership::Inside);
        assert_eq!(b1.membership_test(&[exact(-1)]).unwrap(), Membership::Outside);

        let b2 = sys(Family::SignedPermReal, 2);
        assert_eq!(
            b2.membership_test(&[exact(2), exact(1)]).unwrap(),
            Membership::Inside
        );
        assert_eq!(
            b2.membership_test(&[exact(1), exact(1)]).unwrap(),
            Membership::Outside
        );

        let a3 = sys(Family::SymmetricRealTraceZero, 3);
        let z = a3.sigma_eval(&[exact(1), exact(1), exact(-2)]).unwrap();
        assert_eq!(a3.membership_test(&z).unwrap(), Membership::Inside);
        // p_3 too large relative to p_2 cannot come from a real point.
        assert_eq!(
            a3.membership_test(&[exact(2), exact(100)]).unwrap(),
            Membership::Outside
        );
    }

    #[test]
    fn membership_rejected_for_complex() {
        let s2 = sys(Family::SymmetricComplex, 2);
        assert!(matches!(
            s2.membership_test(&[exact(0), exact(1)]),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn slice_split_complex() {
        let s2 = sys(Family::SymmetricComplex, 2);
        let parts = s2.slice_split(&[Scalar::zero(), exact(-1)], 128).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].center, exact(-1));
        assert_eq!(parts[1].center, exact(1));
        assert!(parts.iter().all(|p| p.size == 1));

        let s3 = sys(Family::SymmetricComplex, 3);
        let z = s3.sigma_eval(&[exact(1), exact(1), exact(5)]).unwrap();
        assert_eq!(z, vec![exact(7), exact(11), exact(5)]);
        let parts = s3.slice_split(&z, 128).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!((parts[0].size, parts[1].size), (2, 1));
        assert_eq!(parts[0].center, exact(1));
        assert_eq!(parts[1].center, exact(5));
        assert_eq!(parts[0].subsystem.family, Family::SymmetricComplex);
    }

    #[test]
    fn slice_split_signed_perm() {
        let b2 = sys(Family::SignedPermReal, 2);
        let parts = b2.slice_split(&[exact(5), exact(4)], 128).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].center, exact(1));
        assert_eq!(parts[1].center, exact(4));
        assert!(parts
            .iter()
            .all(|p| p.subsystem.family == Family::SymmetricRealTraceZero));

        // sigma(0, 0, 2) in the signed family: w-poly w^2 (w - 4).
        let b3 = sys(Family::SignedPermReal, 3);
        let z = b3.sigma_eval(&[exact(0), exact(0), exact(2)]).unwrap();
        let parts = b3.slice_split(&z, 128).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].center, Scalar::zero());
        assert_eq!(parts[0].size, 2);
        assert_eq!(parts[0].subsystem.family, Family::SignedPermReal);
        assert_eq!(parts[1].center, exact(4));
        assert_eq!(parts[1].subsystem.family, Family::SymmetricRealTraceZero);
    }

    #[test]
    fn slice_split_rejects_origin() {
        let s2 = sys(Family::SymmetricComplex, 2);
        assert!(s2.slice_split(&[Scalar::zero(), Scalar::zero()], 128).is_err());
    }

    #[test]
    fn fixed_point_removal() {
        let s2 = sys(Family::SymmetricComplex, 2);
        let t = Series::var(0, 1);
        // f = (2t, t^2) comes from the double root t: shift kills everything.
        let f = vec![t.scale(&exact(2)), t.mul(&t)];
        let (f0, _, reduced) = remove_fixed_points(&s2, &f).unwrap();
        assert_eq!(f0, t);
        assert!(reduced.iter().all(|s| s.is_zero_stored()));

        // f = (0, -t) already has no fixed-point part.
        let f = vec![Series::zero(1), t.neg()];
        let (f0, _, reduced) = remove_fixed_points(&s2, &f).unwrap();
        assert!(f0.is_zero_stored());
        assert_eq!(reduced[1], t.neg());

        let s3 = sys(Family::SymmetricComplex, 3);
        let t2 = t.mul(&t);
        let f = vec![
            t.scale(&exact(3)),
            t2.scale(&exact(3)),
            t2.mul(&t),
        ];
        let (f0, _, reduced) = remove_fixed_points(&s3, &f).unwrap();
        assert_eq!(f0, t);
        assert!(reduced.iter().all(|s| s.is_zero_stored()));
    }

    #[test]
    fn fixed_point_removal_matches_root_shift() {
        // f = sigma(t, -t + t^2) has mean shift t^2/2; the reduced tuple must
        // equal sigma evaluated at the recentered roots.
        let s2 = sys(Family::SymmetricComplex, 2);
        let t = Series::var(0, 1);
        let r1 = t.clone();
        let r2 = t.neg().add(&t.mul(&t));
        let f = s2.sigma_eval_series(&[r1.clone(), r2.clone()]).unwrap();
        let (f0, _, reduced) = remove_fixed_points(&s2, &f).unwrap();
        assert_eq!(f0, t.mul(&t).scale(&Scalar::from_ratio(1, 2)));
        let shifted = s2
            .sigma_eval_series(&[r1.sub(&f0), r2.sub(&f0)])
            .unwrap();
        assert!(reduced[0].is_zero_stored());
        assert_eq!(reduced[1], shifted[1]);
    }

    #[test]
    fn serde_descriptor_round_trip() {
        let b3 = sys(Family::SignedPermReal, 3);
        let j = serde_json::to_string(&b3).unwrap();
        assert_eq!(j, r#"{"family":"signed_perm_real","n":3}"#);
        let back: InvariantSystem = serde_json::from_str(&j).unwrap();
        assert_eq!(back, b3);
        let s: InvariantSystem =
            serde_json::from_str(r#"{"family":"symmetric_complex","n":3}"#).unwrap();
        assert_eq!(s.family, Family::SymmetricComplex);
    }

    #[test]
    fn generator_strings_are_readable() {
        let b1 = sys(Family::SignedPermReal, 1);
        assert_eq!(b1.generator_strings(), vec!["x1^2"]);
        let s2 = sys(Family::SymmetricComplex, 2);
        assert_eq!(s2.generator_strings(), vec!["x1 + x2", "x1*x2"]);
        let a3 = sys(Family::SymmetricRealTraceZero, 3);
        assert_eq!(
            a3.generator_strings(),
            vec!["x1^2 + x2^2 + x3^2", "x1^3 + x2^3 + x3^3"]
        );
    }

    #[test]
    fn ball_membership_near_boundary_is_indeterminate() {
        let b1 = sys(Family::SignedPermReal, 1);
        // A ball straddling zero cannot be certified either way.
        let z = Scalar::Ball(crate::scalar::Ball {
            re: big(0),
            im: big(0),
            rad: BigRational::new(1.into(), (1i64 << 20).into()),
            prec: 32,
        });
        let v = b1.membership_test(&[z]).unwrap();
        assert_eq!(v, Membership::Indeterminate);
    }
}
