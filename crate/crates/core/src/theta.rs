//! Tropical theta functions
//!
//! ```text
//! f_{k,δ,w}(v) = max_{α ∈ Λ₂^∨}  α(v + w) − |α^#|²/(2k) + δ(α)
//! ```
//!
//! and differences of two of them. Writing `u = v + w` and `H = G⁻¹`, the score
//! of `α` is `(k/2)|u|² − |α − kGu|²_H / (2k) + δ(α)`, so only covectors close to
//! `kGu` can win; the search radius below makes that finite and certified.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{self as rat, ceil, ceil_sqrt, dot, floor, from_int, Rational};
use crate::exact::IntLattice;
use crate::geometry::envelope_regions;
use crate::torus::{coset_system, CosetSystem, Polarization};

/// `δ: Λ₂^∨ → ℚ`, constant on cosets of `k·c(Λ₁)`.
#[derive(Clone, Debug)]
pub struct DeltaFunction {
    pub cosets: Arc<CosetSystem>,
    pub values: Vec<Rational>,
}

impl DeltaFunction {
    pub fn new(cosets: Arc<CosetSystem>, values: Vec<Rational>) -> Result<Self> {
        if values.len() != cosets.len() {
            return Err(Error::DimensionMismatch { expected: cosets.len(), got: values.len() });
        }
        Ok(DeltaFunction { cosets, values })
    }

    pub fn zero(cosets: Arc<CosetSystem>) -> Self {
        let values = vec![Rational::zero(); cosets.len()];
        DeltaFunction { cosets, values }
    }

    /// `δ(α)` for `α` given in `Λ₂^∨` coordinates.
    pub fn at(&self, z: &[BigInt]) -> &Rational {
        &self.values[self.cosets.index_of(z)]
    }

    pub fn shifted(&self, c: &Rational) -> Self {
        DeltaFunction { cosets: self.cosets.clone(), values: self.values.iter().map(|x| x + c).collect() }
    }

    pub fn max(&self) -> Rational {
        self.values.iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn min(&self) -> Rational {
        self.values.iter().min().cloned().unwrap_or_else(Rational::zero)
    }
}

/// One affine piece `v ↦ α·v + offset` of a theta function.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Term {
    /// `α` in `Λ₂^∨` coordinates.
    pub z: Vec<BigInt>,
    /// `α` in ambient covector coordinates.
    pub alpha: Vec<Rational>,
    pub coset: usize,
    pub offset: Rational,
}

impl Term {
    pub fn value(&self, v: &[Rational]) -> Rational {
        dot(&self.alpha, v) + &self.offset
    }
}

/// Why the excluded covectors cannot win: every covector outside the searched
/// ellipsoid scores at most `excluded_bound`, which is below `value`.
#[derive(Clone, Debug, PartialEq)]
pub struct DominanceCertificate {
    pub radius_sq: Rational,
    pub excluded_bound: Rational,
    pub candidates: usize,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: Rational,
    /// Maximizing covectors, `Λ₂^∨` coordinates, sorted.
    pub active: Vec<Vec<BigInt>>,
    pub certificate: DominanceCertificate,
}

impl Evaluation {
    pub fn certified(&self) -> bool {
        self.certificate.excluded_bound < self.value
    }
}

#[derive(Clone, Debug)]
pub struct ThetaFunction {
    pub polarization: Polarization,
    pub k: u64,
    pub delta: DeltaFunction,
    pub w: Vec<Rational>,
    /// Terms whose dominance region meets the closed fundamental domain.
    pub terms: Vec<Term>,
    cot: IntLattice,
    q_inv_diag: Vec<Rational>,
    mu_sq: Rational,
}

pub fn make_theta(p: &Polarization, k: u64, delta: DeltaFunction, w: Vec<Rational>) -> Result<ThetaFunction> {
    let n = p.dim();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    if k == 0 || delta.cosets.k != k {
        return Err(Error::Invalid(format!("δ is defined modulo k = {}, theta has k = {k}", delta.cosets.k)));
    }
    let cot = p.torus.cotangent_lattice();
    let q = &(&cot.basis().transpose() * &p.metric.g_inv) * cot.basis();
    let q_inv = q.inverse()?;
    let q_inv_diag = (0..n).map(|i| q_inv[(i, i)].clone()).collect();
    let mu_sq = cot.covering_radius_sq_bound(&p.metric.g_inv);
    let mut theta = ThetaFunction { polarization: p.clone(), k, delta, w, terms: Vec::new(), cot, q_inv_diag, mu_sq };
    let lo = Rational::zero();
    let hi = Rational::one();
    let cands = theta.candidates_on_box(&lo, &hi);
    let fns = theta.period_coordinate_functions(&cands);
    let regions = envelope_regions(&fns, n, &lo, &hi);
    theta.terms = cands.into_iter().zip(regions).filter(|(_, r)| !r.is_empty()).map(|(t, _)| t).collect();
    Ok(theta)
}

impl ThetaFunction {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn cotangent_lattice(&self) -> &IntLattice {
        &self.cot
    }

    pub fn term(&self, z: &[BigInt]) -> Term {
        let alpha = self.cot.point_int(z);
        let two_k = from_int(&BigInt::from(2 * self.k));
        let offset = dot(&alpha, &self.w) - self.polarization.metric.covector_norm_sq(&alpha) / two_k
            + self.delta.at(z);
        let coset = self.delta.cosets.index_of(z);
        Term { z: z.to_vec(), alpha, coset, offset }
    }

    /// `R² = 2k(max δ − min δ) + μ² + 1`, where `μ²` bounds the squared covering
    /// radius of `Λ₂^∨` in the `G⁻¹` norm.
    pub fn radius_sq(&self) -> Rational {
        let k = from_int(&BigInt::from(self.k));
        rat::q(2) * &k * (self.delta.max() - self.delta.min()) + &self.mu_sq + Rational::one()
    }

    /// Covectors `α` with `|α − kGu|²_H ≤ bound`.
    fn enumerate(&self, u: &[Rational], bound: &Rational) -> Vec<Term> {
        let n = self.dim();
        let k = from_int(&BigInt::from(self.k));
        let target: Vec<Rational> = rat::scale(&k, &self.polarization.metric.g.mul_vec(u));
        let zt = self.cot.coords(&target);
        let ranges: Vec<(BigInt, BigInt)> = (0..n)
            .map(|i| {
                let h = from_int(&ceil_sqrt(&(bound * &self.q_inv_diag[i])));
                (ceil(&(&zt[i] - &h)), floor(&(&zt[i] + &h)))
            })
            .collect();
        let mut out = Vec::new();
        if ranges.iter().any(|(a, b)| a > b) {
            return out;
        }
        let mut z: Vec<BigInt> = ranges.iter().map(|(a, _)| a.clone()).collect();
        loop {
            let alpha = self.cot.point_int(&z);
            let d = rat::sub(&alpha, &target);
            if self.polarization.metric.covector_norm_sq(&d) <= *bound {
                out.push(self.term(&z));
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                z[i] += 1;
                if z[i] <= ranges[i].1 {
                    break;
                }
                z[i] = ranges[i].0.clone();
            }
        }
    }

    /// Exact value and maximizers at `v`, with a dominance certificate.
    pub fn evaluate(&self, v: &[Rational]) -> Evaluation {
        let u = rat::add(v, &self.w);
        let r2 = self.radius_sq();
        let cands = self.enumerate(&u, &r2);
        let mut value: Option<Rational> = None;
        let mut active = Vec::new();
        for t in &cands {
            let s = t.value(v);
            match &value {
                Some(m) if s < *m => {}
                Some(m) if s == *m => active.push(t.z.clone()),
                _ => {
                    value = Some(s);
                    active = vec![t.z.clone()];
                }
            }
        }
        let value = value.expect("search ellipsoid contains a nearest covector");
        active.sort();
        let k = from_int(&BigInt::from(self.k));
        let excluded_bound =
            &k / rat::q(2) * self.polarization.metric.norm_sq(&u) - &r2 / (rat::q(2) * &k) + self.delta.max();
        Evaluation {
            value,
            active,
            certificate: DominanceCertificate { radius_sq: r2, excluded_bound, candidates: cands.len() },
        }
    }

    pub fn value(&self, v: &[Rational]) -> Rational {
        self.evaluate(v).value
    }

    /// Every covector that attains the maximum somewhere on the box
    /// `{L₁ t : t ∈ [lo, hi]ⁿ}` (plus possibly some that do not).
    pub fn candidates_on_box(&self, lo: &Rational, hi: &Rational) -> Vec<Term> {
        let n = self.dim();
        let l1 = self.polarization.torus.lambda1.basis();
        let mid = (lo + hi) / rat::q(2);
        let half = (hi - lo) / rat::q(2);
        let center = rat::add(&l1.mul_vec(&vec![mid; n]), &self.w);
        let mut r_sq = Rational::zero();
        for mask in 0..(1usize << n) {
            let t: Vec<Rational> = (0..n).map(|i| if mask >> i & 1 == 1 { half.clone() } else { -half.clone() }).collect();
            let s = self.polarization.metric.norm_sq(&l1.mul_vec(&t));
            if s > r_sq {
                r_sq = s;
            }
        }
        // |α − kGu_c| ≤ R + k·r, squared and relaxed to 2R² + 2k²r²
        let k = from_int(&BigInt::from(self.k));
        let bound = rat::q(2) * self.radius_sq() + rat::q(2) * &k * &k * r_sq;
        self.enumerate(&center, &bound)
    }

    /// The terms as affine functions of the `Λ₁` coordinates `t` (`v = L₁ t`).
    pub fn period_coordinate_functions(&self, terms: &[Term]) -> Vec<(Vec<Rational>, Rational)> {
        let l1 = self.polarization.torus.lambda1.basis();
        terms.iter().map(|t| (l1.vec_mul(&t.alpha), t.offset.clone())).collect()
    }
}

/// `f(v+γ) − f(v) − k·c(γ)(v+w) − k|γ|²/2`; zero by quasi-periodicity.
pub fn quasi_period_residual(theta: &ThetaFunction, gamma: &[Rational], v: &[Rational]) -> Result<Rational> {
    if !theta.polarization.torus.lambda1.contains(gamma) {
        return Err(Error::NotAPeriod);
    }
    let k = from_int(&BigInt::from(theta.k));
    let metric = &theta.polarization.metric;
    let shifted = theta.value(&rat::add(v, gamma));
    let base = theta.value(v);
    let linear = &k * metric.inner(gamma, &rat::add(v, &theta.w));
    let quad = &k * metric.norm_sq(gamma) / rat::q(2);
    Ok(shifted - base - linear - quad)
}

/// The affine function `v ↦ α(v) + b`, up to integral affine functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFunctionClass {
    #[serde(with = "rat::serde_q::vec")]
    pub alpha: Vec<Rational>,
    #[serde(with = "rat::serde_q")]
    pub b: Rational,
}

impl AffineFunctionClass {
    pub fn new(alpha: Vec<Rational>, b: Rational) -> Self {
        AffineFunctionClass { alpha, b }
    }

    pub fn value(&self, v: &[Rational]) -> Rational {
        dot(&self.alpha, v) + &self.b
    }

    /// Equal classes differ by an integral covector (constants are absorbed).
    pub fn equivalent(&self, other: &AffineFunctionClass, cotangent: &IntLattice) -> bool {
        cotangent.contains(&rat::sub(&self.alpha, &other.alpha))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormVectors {
    pub w_plus: Vec<Rational>,
    pub w_minus: Vec<Rational>,
    /// `α = 0`: the class is affine and both vectors are zero.
    pub affine_trivial: bool,
}

/// Vectors with `k·c(w₊ − w₋) = α` and `(k/2)(|w₊|² − |w₋|²) = b`, split
/// symmetrically: `w± = s ± d/2` with `d = (k·c)⁻¹α` and `s ∥ d`.
pub fn linear_to_norm_vectors(p: &Polarization, k: u64, cls: &AffineFunctionClass) -> Result<NormVectors> {
    let n = p.dim();
    if cls.alpha.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: cls.alpha.len() });
    }
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if rat::is_zero_vec(&cls.alpha) {
        return Ok(NormVectors { w_plus: rat::zeros(n), w_minus: rat::zeros(n), affine_trivial: true });
    }
    let k = from_int(&BigInt::from(k));
    let d = rat::scale(&k.recip(), &p.metric.sharp(&cls.alpha));
    let s = rat::scale(&(&cls.b / (&k * p.metric.norm_sq(&d))), &d);
    let half = rat::scale(&rat::qf(1, 2), &d);
    Ok(NormVectors { w_plus: rat::add(&s, &half), w_minus: rat::sub(&s, &half), affine_trivial: false })
}

/// `Φ = f₊ − f₋` with both thetas at the same level.
#[derive(Clone, Debug)]
pub struct TropicalRationalFn {
    pub plus: ThetaFunction,
    pub minus: ThetaFunction,
}

impl TropicalRationalFn {
    pub fn new(plus: ThetaFunction, minus: ThetaFunction) -> Result<Self> {
        if plus.k != minus.k {
            return Err(Error::Invalid(format!("levels differ: {} and {}", plus.k, minus.k)));
        }
        if plus.polarization != minus.polarization {
            return Err(Error::TorusMismatch);
        }
        Ok(TropicalRationalFn { plus, minus })
    }

    pub fn value(&self, v: &[Rational]) -> Rational {
        self.plus.value(v) - self.minus.value(v)
    }

    /// `Φ(v+γ) − Φ(v) = k·c(γ)(w₊ − w₋)`.
    pub fn quasi_period(&self, gamma: &[Rational]) -> Rational {
        let k = from_int(&BigInt::from(self.plus.k));
        k * self.plus.polarization.metric.inner(gamma, &rat::sub(&self.plus.w, &self.minus.w))
    }
}

pub fn section_to_rational_fn(
    p: &Polarization,
    k: u64,
    cls: &AffineFunctionClass,
    delta_plus: DeltaFunction,
    delta_minus: DeltaFunction,
) -> Result<TropicalRationalFn> {
    let w = linear_to_norm_vectors(p, k, cls)?;
    let plus = make_theta(p, k, delta_plus, w.w_plus)?;
    let minus = make_theta(p, k, delta_minus, w.w_minus)?;
    TropicalRationalFn::new(plus, minus)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassCheck {
    pub ok: bool,
    /// First failing `(v, γ, residual)`.
    pub witness: Option<(Vec<Rational>, Vec<Rational>, Rational)>,
}

/// Checks that `Φ − (α(·) + b)` is `Λ₁`-periodic at each sample `(v, γ)`.
pub fn verify_class_equality(
    phi: &TropicalRationalFn,
    cls: &AffineFunctionClass,
    samples: &[(Vec<Rational>, Vec<Rational>)],
) -> ClassCheck {
    for (v, gamma) in samples {
        let moved = rat::add(v, gamma);
        let residual = (phi.value(&moved) - cls.value(&moved)) - (phi.value(v) - cls.value(v));
        if !residual.is_zero() {
            return ClassCheck { ok: false, witness: Some((v.clone(), gamma.clone(), residual)) };
        }
    }
    ClassCheck { ok: true, witness: None }
}

/// JSON theta description; `delta` maps coset indices to values, absent ones are 0.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ThetaSpec {
    pub k: u64,
    #[serde(default)]
    pub delta: BTreeMap<usize, String>,
    #[serde(with = "rat::serde_q::vec")]
    pub w: Vec<Rational>,
}

impl ThetaSpec {
    pub fn build(&self, p: &Polarization) -> Result<ThetaFunction> {
        let cosets = Arc::new(coset_system(p, self.k)?);
        let mut values = vec![Rational::zero(); cosets.len()];
        for (&i, s) in &self.delta {
            if i >= values.len() {
                return Err(Error::Invalid(format!("coset index {i} out of range (N = {})", values.len())));
            }
            values[i] = rat::parse_rational(s)?;
        }
        make_theta(p, self.k, DeltaFunction::new(cosets, values)?, self.w.clone())
    }

    pub fn from_theta(theta: &ThetaFunction) -> Self {
        let delta = theta
            .delta
            .values
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| (i, rat::format_rational(x)))
            .collect();
        ThetaSpec { k: theta.k, delta, w: theta.w.clone() }
    }
}

/// Theta with `δ ≡ 0`.
pub fn standard_theta(p: &Polarization, k: u64, w: Vec<Rational>) -> Result<ThetaFunction> {
    let cosets = Arc::new(coset_system(p, k)?);
    make_theta(p, k, DeltaFunction::zero(cosets), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{q, qf, qvec};
    use crate::torus::{alpha_111_torus, principal_circle};

    fn circle_theta(k: u64) -> ThetaFunction {
        standard_theta(&principal_circle(), k, vec![q(0)]).unwrap()
    }

    fn brute_circle(v: &Rational) -> Rational {
        (-10i64..=10).map(|m| q(m) * v - qf(m * m, 2)).max().unwrap()
    }

    #[test]
    fn circle_values() {
        let th = circle_theta(1);
        let e = th.evaluate(&[q(0)]);
        assert_eq!(e.value, q(0));
        assert_eq!(e.active, vec![vec![BigInt::from(0)]]);
        assert!(e.certified());
        let e = th.evaluate(&[qf(1, 2)]);
        assert_eq!(e.value, q(0));
        assert_eq!(e.active, vec![vec![BigInt::from(0)], vec![BigInt::from(1)]]);
        assert_eq!(th.value(&[qf(3, 2)]), q(1));
    }

    #[test]
    fn circle_presentation() {
        let zs: Vec<Vec<BigInt>> = circle_theta(1).terms.iter().map(|t| t.z.clone()).collect();
        assert_eq!(zs, vec![vec![BigInt::from(0)], vec![BigInt::from(1)]]);
    }

    #[test]
    fn agrees_with_brute_force() {
        let th = circle_theta(1);
        for i in -30..=30 {
            let v = qf(i, 10);
            assert_eq!(th.value(std::slice::from_ref(&v)), brute_circle(&v));
        }
    }

    #[test]
    fn residual_is_zero() {
        let th = circle_theta(1);
        assert_eq!(quasi_period_residual(&th, &[q(1)], &[qf(1, 2)]).unwrap(), q(0));
        assert!(matches!(quasi_period_residual(&th, &[qf(1, 2)], &[q(0)]), Err(Error::NotAPeriod)));
        let p = alpha_111_torus();
        let th = standard_theta(&p, 1, qvec(&[(1, 7), (-2, 5)])).unwrap();
        let g1 = p.torus.lambda1.generator(0);
        assert_eq!(quasi_period_residual(&th, &g1, &qvec(&[(1, 3), (1, 5)])).unwrap(), q(0));
    }

    #[test]
    fn norm_vectors_examples() {
        let c = principal_circle();
        let nv = linear_to_norm_vectors(&c, 1, &AffineFunctionClass::new(vec![q(1)], q(0))).unwrap();
        assert_eq!((nv.w_plus, nv.w_minus), (vec![qf(1, 2)], vec![qf(-1, 2)]));
        let nv = linear_to_norm_vectors(&c, 1, &AffineFunctionClass::new(vec![q(0)], q(7))).unwrap();
        assert!(nv.affine_trivial);
        let p = alpha_111_torus();
        let nv = linear_to_norm_vectors(&p, 1, &AffineFunctionClass::new(qvec(&[(1, 1), (0, 1)]), q(0))).unwrap();
        assert_eq!(nv.w_plus, qvec(&[(1, 1), (1, 2)]));
        assert_eq!(nv.w_minus, qvec(&[(-1, 1), (-1, 2)]));
    }

    #[test]
    fn class_equality_detects_broken_split() {
        let c = principal_circle();
        let cls = AffineFunctionClass::new(vec![q(1)], q(0));
        let cosets = Arc::new(coset_system(&c, 1).unwrap());
        let phi = section_to_rational_fn(&c, 1, &cls, DeltaFunction::zero(cosets.clone()), DeltaFunction::zero(cosets.clone()))
            .unwrap();
        let samples = vec![(vec![qf(1, 3)], vec![q(1)]), (vec![qf(-5, 7)], vec![q(-2)])];
        assert!(verify_class_equality(&phi, &cls, &samples).ok);
        let bad_plus = make_theta(&c, 1, DeltaFunction::zero(cosets), vec![qf(1, 3)]).unwrap();
        let bad = TropicalRationalFn::new(bad_plus, phi.minus.clone()).unwrap();
        let check = verify_class_equality(&bad, &cls, &samples);
        assert!(!check.ok);
        assert!(check.witness.is_some());
    }

    #[test]
    fn spec_round_trip() {
        let p = alpha_111_torus();
        let spec: ThetaSpec = serde_json::from_str(r#"{"k":2,"delta":{"1":"1/5"},"w":["1/2","0"]}"#).unwrap();
        let th = spec.build(&p).unwrap();
        assert_eq!(th.delta.values[1], qf(1, 5));
        assert_eq!(ThetaSpec::from_theta(&th), spec);
        assert!(serde_json::from_str::<ThetaSpec>(r#"{"k":1,"w":[],"extra":1}"#).is_err());
    }
}
