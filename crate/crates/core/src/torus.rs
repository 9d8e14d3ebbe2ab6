//! Polarized tropical affine tori `(V, Λ₁, Λ₂)`.
//!
//! `Λ₁ ⊂ V` is the period lattice (`B = V/Λ₁`) and `Λ₂ ⊂ V` the lattice of
//! integral tangent vectors. Covectors are written in the dual ambient
//! coordinates, so `Λ₂^∨` has basis `B₂⁻ᵀ`. A polarization is stored by the
//! images `c(γ_j)` of the `Λ₁` basis, as ambient covectors; the metric `G`
//! satisfies `c(γ) = G·γ`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::lattice::failing_minor;
use crate::exact::normal_form::{invariant_factors, smith_normal_form};
use crate::exact::rational::{self as rat, floor, format_rational, frac, from_int, Rational};
use crate::exact::{positive_definite, IntLattice, QMatrix, ZMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct TropicalAffineTorus {
    pub lambda1: IntLattice,
    pub lambda2: IntLattice,
}

impl TropicalAffineTorus {
    pub fn new(lambda1: IntLattice, lambda2: IntLattice) -> Result<Self> {
        if lambda1.dim() != lambda2.dim() {
            return Err(Error::DimensionMismatch { expected: lambda1.dim(), got: lambda2.dim() });
        }
        Ok(TropicalAffineTorus { lambda1, lambda2 })
    }

    pub fn dim(&self) -> usize {
        self.lambda1.dim()
    }

    /// `Λ₂^∨`, the integral covectors.
    pub fn cotangent_lattice(&self) -> IntLattice {
        self.lambda2.dual()
    }

    /// `B^∨ = (V^∨, Λ₂^∨, Λ₁^∨)`.
    pub fn dual(&self) -> TropicalAffineTorus {
        TropicalAffineTorus { lambda1: self.lambda2.dual(), lambda2: self.lambda1.dual() }
    }

    /// Coordinates of `v` in the `Λ₁` basis.
    pub fn period_coords(&self, v: &[Rational]) -> Vec<Rational> {
        self.lambda1.coords(v)
    }

    /// Representative of `v` in the half-open fundamental parallelepiped
    /// `{Σ tᵢγᵢ : tᵢ ∈ [0,1)}`, together with the subtracted period (Λ₁ coordinates).
    pub fn reduce(&self, v: &[Rational]) -> (Vec<Rational>, Vec<BigInt>) {
        let t = self.period_coords(v);
        let shift: Vec<BigInt> = t.iter().map(floor).collect();
        let red: Vec<Rational> = t.iter().map(frac).collect();
        (self.lambda1.point(&red), shift)
    }

    pub fn period(&self, coords: &[BigInt]) -> Vec<Rational> {
        self.lambda1.point_int(coords)
    }
}

pub fn make_torus(lambda1_basis: QMatrix, lambda2_basis: QMatrix) -> Result<TropicalAffineTorus> {
    if lambda1_basis.rows() != lambda2_basis.rows() {
        return Err(Error::DimensionMismatch { expected: lambda1_basis.rows(), got: lambda2_basis.rows() });
    }
    TropicalAffineTorus::new(IntLattice::new(lambda1_basis)?, IntLattice::new(lambda2_basis)?)
}

pub fn dual_torus(b: &TropicalAffineTorus) -> TropicalAffineTorus {
    b.dual()
}

/// Riemannian metric on `V` in ambient coordinates, with its inverse cached.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    pub g: QMatrix,
    pub g_inv: QMatrix,
}

impl Metric {
    pub fn new(g: QMatrix) -> Result<Self> {
        if !positive_definite(&g)? {
            let (index, value) = failing_minor(&g).expect("non-PD matrix has a failing minor");
            return Err(Error::NotPositiveDefinite { index, value: format_rational(&value) });
        }
        let g_inv = g.inverse()?;
        Ok(Metric { g, g_inv })
    }

    pub fn inner(&self, u: &[Rational], v: &[Rational]) -> Rational {
        self.g.bilinear(u, v)
    }

    /// `α^#`, the vector with `g(α^#, v) = α(v)`.
    pub fn sharp(&self, alpha: &[Rational]) -> Vec<Rational> {
        self.g_inv.mul_vec(alpha)
    }

    /// `v^♭ = g(v, ·)`.
    pub fn flat(&self, v: &[Rational]) -> Vec<Rational> {
        self.g.mul_vec(v)
    }

    pub fn norm_sq(&self, w: &[Rational]) -> Rational {
        self.g.bilinear(w, w)
    }

    /// `|α^#|²`
    pub fn covector_norm_sq(&self, alpha: &[Rational]) -> Rational {
        self.g_inv.bilinear(alpha, alpha)
    }
}

pub fn sharp(metric: &Metric, alpha: &[Rational]) -> Vec<Rational> {
    metric.sharp(alpha)
}

pub fn norm_sq(metric: &Metric, w: &[Rational]) -> Rational {
    metric.norm_sq(w)
}

#[derive(Clone, Debug)]
pub struct Polarization {
    pub torus: Arc<TropicalAffineTorus>,
    /// Column j is `c(γ_j)` in ambient covector coordinates.
    pub c: QMatrix,
    /// Integer matrix of `c` from `Λ₁` coordinates to `Λ₂^∨` coordinates.
    pub c_lattice: ZMatrix,
    pub metric: Metric,
}

impl PartialEq for Polarization {
    fn eq(&self, other: &Self) -> bool {
        self.torus == other.torus && self.metric == other.metric
    }
}

impl Polarization {
    pub fn dim(&self) -> usize {
        self.torus.dim()
    }

    /// `⟨γᵢ, γⱼ⟩ = c(γⱼ)(γᵢ)` on the `Λ₁` basis.
    pub fn gram(&self) -> QMatrix {
        &self.torus.lambda1.basis().transpose() * &self.c
    }

    /// `c(γ)` for an ambient vector `γ` (extended linearly).
    pub fn apply(&self, gamma: &[Rational]) -> Vec<Rational> {
        self.metric.flat(gamma)
    }

    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        invariant_factors(&self.c_lattice)
    }

    pub fn is_principal(&self) -> bool {
        self.elementary_divisors().iter().all(One::is_one)
    }
}

/// Checks integrality and positivity of `c` and derives the metric.
pub fn validate_polarization(b: &TropicalAffineTorus, c: QMatrix) -> Result<(Polarization, Metric)> {
    let n = b.dim();
    if c.rows() != n || c.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c.rows().max(c.cols()) });
    }
    let cot = b.cotangent_lattice();
    let mut c_lattice = ZMatrix::zeros(n, n);
    for j in 0..n {
        let coords = cot.int_coords(&c.col(j)).ok_or_else(|| {
            Error::NotIntegral(format!("c(γ{}) is not in the integral cotangent lattice", j + 1))
        })?;
        for (i, x) in coords.into_iter().enumerate() {
            c_lattice[(i, j)] = x;
        }
    }
    let gram = &b.lambda1.basis().transpose() * &c;
    if !gram.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if let Some((index, value)) = failing_minor(&gram) {
        return Err(Error::NotPositiveDefinite { index, value: format_rational(&value) });
    }
    // G·L₁ = C
    let g = &c * b.lambda1.basis_inverse();
    let metric = Metric::new(g)?;
    let pol = Polarization { torus: Arc::new(b.clone()), c, c_lattice, metric: metric.clone() };
    Ok((pol, metric))
}

/// Polarization of `B^∨` with metric `d₁·d_n·G⁻¹` on `V^∨`, where `d₁ | … | d_n`
/// are the elementary divisors of `c`. For principal polarizations this is `G⁻¹`;
/// in general it has the same type and dualizing twice returns `c`.
pub fn dual_polarization(p: &Polarization) -> Result<Polarization> {
    let d = p.elementary_divisors();
    let s = from_int(&(d.first().cloned().unwrap_or_else(BigInt::one) * d.last().cloned().unwrap_or_else(BigInt::one)));
    let dual = p.torus.dual();
    let g_dual = p.metric.g_inv.scale(&s);
    let c_dual = &g_dual * dual.lambda1.basis();
    Ok(validate_polarization(&dual, c_dual)?.0)
}

/// Coset representatives of `Λ₂^∨ / k·c(Λ₁)`.
#[derive(Clone, Debug)]
pub struct CosetSystem {
    pub k: u64,
    /// Nontrivial structure: `U·(k·C)·V = diag(divisors)`.
    pub divisors: Vec<BigInt>,
    u: ZMatrix,
    kc: QMatrix,
    kc_inv: QMatrix,
    /// Representatives in `Λ₂^∨` coordinates, inside the fundamental
    /// parallelepiped of `k·c(Λ₁)`, ordered by mixed-radix index.
    pub representatives: Vec<Vec<BigInt>>,
}

impl CosetSystem {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Index of the coset of `z` (Λ₂^∨ coordinates).
    pub fn index_of(&self, z: &[BigInt]) -> usize {
        let t = self.u.mul_vec(z);
        let mut idx = BigInt::zero();
        for (ti, d) in t.iter().zip(&self.divisors) {
            let r = ((ti % d) + d) % d;
            idx = idx * d + r;
        }
        usize::try_from(idx).expect("coset index fits usize")
    }

    /// Reduces `z` into the fundamental parallelepiped of `k·c(Λ₁)`.
    pub fn reduce(&self, z: &[BigInt]) -> Vec<BigInt> {
        let zq: Vec<Rational> = z.iter().map(from_int).collect();
        let t: Vec<Rational> = self.kc_inv.mul_vec(&zq).iter().map(|x| from_int(&floor(x))).collect();
        let back = self.kc.mul_vec(&t);
        zq.iter().zip(back).map(|(a, b)| (a - b).to_integer()).collect()
    }

    pub fn congruent(&self, a: &[BigInt], b: &[BigInt]) -> bool {
        let diff: Vec<Rational> = a.iter().zip(b).map(|(x, y)| from_int(&(x - y))).collect();
        self.kc_inv.mul_vec(&diff).iter().all(Rational::is_integer)
    }
}

pub fn coset_system(p: &Polarization, k: u64) -> Result<CosetSystem> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let n = p.dim();
    let kz = p.c_lattice.map(|x| x * BigInt::from(k));
    let (s, u, _v) = smith_normal_form(&kz);
    let divisors: Vec<BigInt> = (0..n).map(|i| s[(i, i)].clone()).collect();
    let kc = kz.to_q();
    let kc_inv = kc.inverse()?;
    let u_inv = u.to_q().inverse()?;
    let total: usize = divisors.iter().map(|d| usize::try_from(d.clone()).expect("small cokernel")).product();
    let mut reps = Vec::with_capacity(total);
    let mut t = vec![BigInt::zero(); n];
    let mut system = CosetSystem { k, divisors: divisors.clone(), u, kc, kc_inv, representatives: Vec::new() };
    for _ in 0..total {
        let tq: Vec<Rational> = t.iter().map(from_int).collect();
        let z: Vec<BigInt> = u_inv.mul_vec(&tq).iter().map(Rational::to_integer).collect();
        reps.push(system.reduce(&z));
        // mixed-radix increment, last digit fastest
        for i in (0..n).rev() {
            t[i] += 1;
            if t[i] < divisors[i] {
                break;
            }
            t[i] = BigInt::zero();
        }
    }
    system.representatives = reps;
    Ok(system)
}

/// JSON torus description; matrices are row-major, generators are columns.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub n: usize,
    #[serde(with = "rat::serde_q::mat")]
    pub lambda1: Vec<Vec<Rational>>,
    #[serde(with = "rat::serde_q::mat")]
    pub lambda2: Vec<Vec<Rational>>,
    #[serde(with = "rat::serde_q::mat")]
    pub polarization: Vec<Vec<Rational>>,
}

impl TorusConfig {
    pub fn build(&self) -> Result<(Polarization, Metric)> {
        let check = |m: &Vec<Vec<Rational>>| -> Result<QMatrix> {
            let q = QMatrix::from_rows(m.clone())?;
            if q.rows() != self.n || q.cols() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: q.rows() });
            }
            Ok(q)
        };
        let b = make_torus(check(&self.lambda1)?, check(&self.lambda2)?)?;
        validate_polarization(&b, check(&self.polarization)?)
    }

    pub fn from_polarization(p: &Polarization) -> Self {
        TorusConfig {
            n: p.dim(),
            lambda1: p.torus.lambda1.basis().to_rows(),
            lambda2: p.torus.lambda2.basis().to_rows(),
            polarization: p.c.to_rows(),
        }
    }
}

/// The principal circle `ℝ/ℤ` with `c = [1]`.
pub fn principal_circle() -> Polarization {
    let b = make_torus(QMatrix::identity(1), QMatrix::identity(1)).expect("valid");
    validate_polarization(&b, QMatrix::identity(1)).expect("valid").0
}

/// The 2-torus with periods `(α₁+α₂, α₂)`, `(α₂, α₂+α₃)`, `Λ₂ = ℤ²` and
/// `c(γᵢ) = dxᵢ`.
pub fn alpha_family_torus(a: [Rational; 3]) -> Result<Polarization> {
    let [a1, a2, a3] = a;
    let l1 = QMatrix::from_cols(&[vec![&a1 + &a2, a2.clone()], vec![a2.clone(), &a2 + &a3]])?;
    let b = make_torus(l1, QMatrix::identity(2))?;
    Ok(validate_polarization(&b, QMatrix::identity(2))?.0)
}

pub fn alpha_111_torus() -> Polarization {
    alpha_family_torus([rat::q(1), rat::q(1), rat::q(1)]).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{q, qf};

    #[test]
    fn circle_is_valid() {
        let p = principal_circle();
        assert_eq!(p.metric.g, QMatrix::identity(1));
        assert!(p.is_principal());
    }

    #[test]
    fn rank_deficient_torus() {
        let l1 = QMatrix::from_cols(&[vec![q(1), q(0)], vec![q(2), q(0)]]).unwrap();
        assert!(matches!(make_torus(l1, QMatrix::identity(2)), Err(Error::RankDeficient)));
    }

    #[test]
    fn alpha_torus_gram() {
        let p = alpha_111_torus();
        assert_eq!(p.gram(), QMatrix::from_i64(&[&[2, 1], &[1, 2]]));
    }

    #[test]
    fn swapped_polarization_is_indefinite() {
        let l1 = QMatrix::from_i64(&[&[2, 1], &[1, 2]]);
        let b = make_torus(l1, QMatrix::identity(2)).unwrap();
        let c = QMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        match validate_polarization(&b, c) {
            Err(Error::NotPositiveDefinite { index, value }) => {
                assert_eq!(index, 2);
                assert_eq!(value, "-3");
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn non_integral_polarization() {
        let b = make_torus(QMatrix::identity(1), QMatrix::identity(1)).unwrap();
        let c = QMatrix::from_rows(vec![vec![qf(1, 2)]]).unwrap();
        assert!(matches!(validate_polarization(&b, c), Err(Error::NotIntegral(_))));
    }

    #[test]
    fn dual_torus_involution() {
        let p = alpha_111_torus();
        let b = p.torus.as_ref();
        let d = b.dual();
        assert_eq!(d.lambda1, IntLattice::standard(2));
        assert_eq!(d.lambda2, b.lambda1.dual());
        assert_eq!(d.dual(), *b);
        let circle = principal_circle();
        assert_eq!(circle.torus.dual(), *circle.torus);
    }

    #[test]
    fn dual_polarization_alpha_torus() {
        let p = alpha_111_torus();
        let d = dual_polarization(&p).unwrap();
        // principal: dual metric is G⁻¹; its Gram on the period basis e₁, e₂ is [[2,1],[1,2]]
        assert_eq!(d.metric.g, p.metric.g_inv);
        assert_eq!(d.gram(), QMatrix::from_i64(&[&[2, 1], &[1, 2]]));
        assert!(positive_definite(&d.gram()).unwrap());
        let dd = dual_polarization(&d).unwrap();
        assert_eq!(dd.c, p.c);
        assert_eq!(dd, p);
    }

    #[test]
    fn dual_polarization_non_principal_involution() {
        // Λ₂ = ℤ², Λ₁ = diag(1,2)ℤ², G = [[2,1],[1,2]]: type (1, 6)
        let l1 = QMatrix::from_i64(&[&[1, 0], &[0, 2]]);
        let b = make_torus(l1.clone(), QMatrix::identity(2)).unwrap();
        let g = QMatrix::from_i64(&[&[2, 1], &[1, 2]]);
        let (p, _) = validate_polarization(&b, &g * &l1).unwrap();
        assert!(!p.is_principal());
        let d = dual_polarization(&p).unwrap();
        assert_eq!(d.elementary_divisors(), p.elementary_divisors());
        assert_eq!(dual_polarization(&d).unwrap(), p);
    }

    #[test]
    fn coset_counts() {
        let circle = principal_circle();
        assert_eq!(coset_system(&circle, 1).unwrap().len(), 1);
        let two = coset_system(&circle, 2).unwrap();
        assert_eq!(two.representatives, vec![vec![BigInt::from(0)], vec![BigInt::from(1)]]);
        let p = alpha_111_torus();
        let cs = coset_system(&p, 2).unwrap();
        assert_eq!(cs.len(), 4);
        for (i, a) in cs.representatives.iter().enumerate() {
            assert_eq!(cs.index_of(a), i);
            for b in &cs.representatives[i + 1..] {
                assert!(!cs.congruent(a, b));
            }
        }
    }

    #[test]
    fn sharp_and_norm() {
        let m = Metric::new(QMatrix::from_i64(&[&[2, 1], &[1, 2]])).unwrap();
        let s = sharp(&m, &[q(1), q(0)]);
        assert_eq!(s, vec![qf(2, 3), qf(-1, 3)]);
        assert_eq!(norm_sq(&m, &s), qf(2, 3));
        assert_eq!(m.covector_norm_sq(&[q(1), q(0)]), qf(2, 3));
        let zero = sharp(&m, &[q(0), q(0)]);
        assert_eq!(norm_sq(&m, &zero), q(0));
    }

    #[test]
    fn metric_integrality() {
        let p = alpha_111_torus();
        let b = &p.torus;
        for i in 0..2 {
            for j in 0..2 {
                let v = p.metric.inner(&b.lambda1.generator(i), &b.lambda2.generator(j));
                assert!(v.is_integer());
            }
        }
    }

    #[test]
    fn reduce_into_fundamental_domain() {
        let p = alpha_111_torus();
        let (r, shift) = p.torus.reduce(&[q(5), q(4)]);
        let t = p.torus.period_coords(&r);
        assert!(t.iter().all(|x| *x >= q(0) && *x < q(1)));
        let back = rat::add(&r, &p.torus.period(&shift));
        assert_eq!(back, vec![q(5), q(4)]);
    }
}
