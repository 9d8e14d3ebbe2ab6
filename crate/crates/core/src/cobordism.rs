//! Formal fiber classes under the Pontryagin product, the parallelotope
//! filtration, the Albanese map, the symbolic Fourier exchange, and the
//! filtration-vanishing pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{self as rat, frac, Rational};
use crate::intersect::{perturb_search, replay, PerturbationCertificate, ReplayReport};
use crate::theta::{linear_to_norm_vectors, AffineFunctionClass};
use crate::torus::{dual_polarization, Polarization, TorusConfig};

/// A point of `V/Λ₁`, stored by its `Λ₁` coordinates reduced into `[0,1)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint(#[serde(with = "rat::serde_q::vec")] Vec<Rational>);

impl TorusPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        TorusPoint(coords.iter().map(frac).collect())
    }

    pub fn zero(n: usize) -> Self {
        TorusPoint(rat::zeros(n))
    }

    /// Reduces an ambient vector of the torus underlying `p`.
    pub fn from_ambient(p: &Polarization, v: &[Rational]) -> Result<Self> {
        if v.len() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), got: v.len() });
        }
        Ok(TorusPoint::new(p.torus.period_coords(v)))
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        rat::is_zero_vec(&self.0)
    }

    pub fn add(&self, other: &TorusPoint) -> Result<TorusPoint> {
        if self.dim() != other.dim() {
            return Err(Error::TorusMismatch);
        }
        Ok(TorusPoint::new(rat::add(&self.0, &other.0)))
    }

    pub fn neg(&self) -> TorusPoint {
        TorusPoint::new(rat::neg(&self.0))
    }

    pub fn scale(&self, a: &BigInt) -> TorusPoint {
        TorusPoint::new(rat::scale(&rat::from_int(a), &self.0))
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(rat::format_rational).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Finite formal sum `Σ a_b [b]` over points of a torus of dimension `n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FormalSum {
    pub n: usize,
    terms: BTreeMap<TorusPoint, BigInt>,
}

impl FormalSum {
    pub fn zero(n: usize) -> Self {
        FormalSum { n, terms: BTreeMap::new() }
    }

    pub fn point(b: TorusPoint) -> Self {
        FormalSum::monomial(b, BigInt::one())
    }

    pub fn monomial(b: TorusPoint, a: BigInt) -> Self {
        let mut e = FormalSum::zero(b.dim());
        e.add_term(b, a);
        e
    }

    /// The unit `[0]`.
    pub fn one(n: usize) -> Self {
        FormalSum::point(TorusPoint::zero(n))
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (TorusPoint, BigInt)>) -> Result<Self> {
        let mut e = FormalSum::zero(n);
        for (b, a) in terms {
            if b.dim() != n {
                return Err(Error::TorusMismatch);
            }
            e.add_term(b, a);
        }
        Ok(e)
    }

    fn add_term(&mut self, b: TorusPoint, a: BigInt) {
        if a.is_zero() {
            return;
        }
        let sum = self.coefficient(&b) + a;
        if sum.is_zero() {
            self.terms.remove(&b);
        } else {
            self.terms.insert(b, sum);
        }
    }

    pub fn terms(&self) -> &BTreeMap<TorusPoint, BigInt> {
        &self.terms
    }

    pub fn coefficient(&self, b: &TorusPoint) -> BigInt {
        self.terms.get(b).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    fn check(&self, other: &FormalSum) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::TorusMismatch)
        }
    }

    pub fn try_add(&self, other: &FormalSum) -> Result<FormalSum> {
        self.check(other)?;
        let mut out = self.clone();
        for (b, a) in &other.terms {
            out.add_term(b.clone(), a.clone());
        }
        Ok(out)
    }

    /// Convolution through the group law.
    pub fn convolve(&self, other: &FormalSum) -> Result<FormalSum> {
        self.check(other)?;
        let mut out = FormalSum::zero(self.n);
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                out.add_term(p.add(q)?, a * b);
            }
        }
        Ok(out)
    }
}

impl Add for &FormalSum {
    type Output = FormalSum;
    fn add(self, other: &FormalSum) -> FormalSum {
        self.try_add(other).expect("same dimension")
    }
}

impl Neg for &FormalSum {
    type Output = FormalSum;
    fn neg(self) -> FormalSum {
        FormalSum { n: self.n, terms: self.terms.iter().map(|(b, a)| (b.clone(), -a)).collect() }
    }
}

impl Sub for &FormalSum {
    type Output = FormalSum;
    fn sub(self, other: &FormalSum) -> FormalSum {
        self + &(-other)
    }
}

/// `Σ a_b [F_b]`, fibers over points of the base.
pub type CobordismElement = FormalSum;

/// `Σ a_α [Γ_α]`, flat sections of the dual fibration; levels are points of the base.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SectionCombination(pub FormalSum);

pub fn pontryagin(e1: &CobordismElement, e2: &CobordismElement) -> Result<CobordismElement> {
    e1.convolve(e2)
}

pub fn augmentation(e: &CobordismElement) -> BigInt {
    e.terms.values().sum()
}

pub fn albanese(e: &CobordismElement) -> Result<TorusPoint> {
    let aug = augmentation(e);
    if !aug.is_zero() {
        return Err(Error::NotDegreeZero(aug.to_string()));
    }
    let mut acc = TorusPoint::zero(e.n);
    for (b, a) in &e.terms {
        acc = acc.add(&b.scale(a))?;
    }
    Ok(acc)
}

/// `([b₁⁺] − [b₁⁻]) ⋆ … ⋆ ([bᵢ⁺] − [bᵢ⁻])`.
pub fn filtration_generator(pairs: &[(TorusPoint, TorusPoint)]) -> Result<CobordismElement> {
    let n = pairs.first().map(|(p, _)| p.dim()).ok_or_else(|| Error::Invalid("need at least one pair".into()))?;
    let mut acc = FormalSum::one(n);
    for (p, m) in pairs {
        let diff = FormalSum::point(p.clone()).try_add(&-&FormalSum::point(m.clone()))?;
        acc = acc.convolve(&diff)?;
    }
    Ok(acc)
}

/// `Σ a_b [F_b] ↦ Σ a_b [Γ_b]`.
pub fn fourier_on_cob(e: &CobordismElement) -> SectionCombination {
    SectionCombination(e.clone())
}

/// Bilinear extension of fiberwise addition `Γ_α ⊗ Γ_β = Γ_{α+β}`.
pub fn tensor_sections(s1: &SectionCombination, s2: &SectionCombination) -> Result<SectionCombination> {
    Ok(SectionCombination(s1.0.convolve(&s2.0)?))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BraneKind {
    Fiber,
    FlatSection,
}

/// Which of `B`, `B^∨` a symbol lives on.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Base,
    Dual,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Base => Side::Dual,
            Side::Dual => Side::Base,
        }
    }
}

/// A graded fiber or flat section. A fiber on `X` has its level on `X`; a
/// flat section on `X` has level `α`, a point of `X^∨`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BraneSymbol {
    pub kind: BraneKind,
    pub side: Side,
    pub level: TorusPoint,
    #[serde(with = "rat::serde_q")]
    pub grading: Rational,
    pub shift: i64,
}

impl BraneSymbol {
    pub fn fiber(side: Side, b: TorusPoint) -> Self {
        let n = b.dim() as i64;
        BraneSymbol { kind: BraneKind::Fiber, side, level: b, grading: rat::qf(n, 2), shift: 0 }
    }

    pub fn flat_section(side: Side, alpha: TorusPoint) -> Self {
        BraneSymbol { kind: BraneKind::FlatSection, side, level: alpha, grading: Rational::zero(), shift: 0 }
    }

    pub fn standard_grading(&self, n: usize) -> Rational {
        match self.kind {
            BraneKind::Fiber => rat::qf(n as i64, 2),
            BraneKind::FlatSection => Rational::zero(),
        }
    }
}

/// `(q, p) ↦ (−p, q)` on symbols: `F_b ↦ Γ_b` and `Γ_α ↦ Γ_{−α}` read as the
/// fiber `F_{−α}` with shift `n`.
pub fn fourier_object(s: &BraneSymbol, n: usize) -> Result<BraneSymbol> {
    if s.level.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: s.level.dim() });
    }
    if s.grading != s.standard_grading(n) {
        return Err(Error::Invalid(format!("grading {} is not the standard one", rat::format_rational(&s.grading))));
    }
    let side = s.side.flip();
    Ok(match s.kind {
        BraneKind::Fiber => BraneSymbol { kind: BraneKind::FlatSection, side, level: s.level.clone(), grading: Rational::zero(), shift: s.shift },
        BraneKind::FlatSection => BraneSymbol {
            kind: BraneKind::Fiber,
            side,
            level: s.level.neg(),
            grading: rat::qf(n as i64, 2),
            shift: s.shift + n as i64,
        },
    })
}

/// Fiberwise sum of two flat sections on the same torus.
pub fn fiberwise_sum_sections(s1: &BraneSymbol, s2: &BraneSymbol) -> Result<BraneSymbol> {
    if s1.kind != BraneKind::FlatSection || s2.kind != BraneKind::FlatSection {
        return Err(Error::Invalid("fiberwise sum takes flat sections".into()));
    }
    if s1.side != s2.side {
        return Err(Error::TorusMismatch);
    }
    Ok(BraneSymbol {
        kind: BraneKind::FlatSection,
        side: s1.side,
        level: s1.level.add(&s2.level)?,
        grading: Rational::zero(),
        shift: s1.shift + s2.shift,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QVec(#[serde(with = "rat::serde_q::vec")] pub Vec<Rational>);

/// Pipeline input; points are ambient vectors on the base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub torus: TorusConfig,
    pub pairs: Vec<(QVec, QVec)>,
    pub k: u64,
    pub seed: u64,
    pub max_trials: usize,
    pub k_cap: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FiltrationOutcome {
    Certified(Box<PerturbationCertificate>),
    /// Pair `index` has `b⁺ = b⁻`, so the generator is already zero.
    Degenerate { index: usize },
}

impl FiltrationOutcome {
    pub fn success(&self) -> bool {
        match self {
            FiltrationOutcome::Certified(c) => c.success,
            FiltrationOutcome::Degenerate { .. } => true,
        }
    }
}

/// `(w₊, w₋)` for one pair of points.
pub type NormPair = (Vec<Rational>, Vec<Rational>);

/// The norm-vector pairs on `B^∨` for fibers `F_{b±}`, or the index of a degenerate pair.
pub fn pipeline_targets(
    p: &Polarization,
    dual: &Polarization,
    k: u64,
    pairs: &[(Vec<Rational>, Vec<Rational>)],
) -> Result<std::result::Result<Vec<NormPair>, usize>> {
    let mut groups = Vec::new();
    for (i, (bp, bm)) in pairs.iter().enumerate() {
        let (rp, rm) = (TorusPoint::from_ambient(p, bp)?, TorusPoint::from_ambient(p, bm)?);
        if rp == rm {
            return Ok(Err(i));
        }
        let (ap, _) = p.torus.reduce(bp);
        let (am, _) = p.torus.reduce(bm);
        let cls = AffineFunctionClass::new(rat::sub(&ap, &am), Rational::zero());
        let w = linear_to_norm_vectors(dual, k, &cls)?;
        groups.push((w.w_plus, w.w_minus));
    }
    Ok(Ok(groups))
}

/// Certifies `F^{n+1} = 0` for the generator of `pairs` by passing to flat
/// sections of `B^∨` and searching for regular, transverse theta hypersurfaces.
pub fn verify_filtration_vanishing(
    p: &Polarization,
    pairs: &[(Vec<Rational>, Vec<Rational>)],
    k: u64,
    seed: u64,
    max_trials: usize,
) -> Result<FiltrationOutcome> {
    if pairs.len() != p.dim() + 1 {
        return Err(Error::Invalid(format!("expected {} pairs, got {}", p.dim() + 1, pairs.len())));
    }
    let dual = dual_polarization(p)?;
    let groups = match pipeline_targets(p, &dual, k, pairs)? {
        Ok(g) => g,
        Err(index) => return Ok(FiltrationOutcome::Degenerate { index }),
    };
    let cert = perturb_search(&dual, k, &groups, seed, max_trials)?;
    Ok(FiltrationOutcome::Certified(Box::new(cert)))
}

/// Runs the pipeline for `k, k+1, …, k_cap`, stopping at the first level that
/// does not exhaust its trials. The certificate embeds the config.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<FiltrationOutcome> {
    let (p, _) = cfg.torus.build()?;
    let pairs: Vec<(Vec<Rational>, Vec<Rational>)> = cfg.pairs.iter().map(|(a, b)| (a.0.clone(), b.0.clone())).collect();
    let input = serde_json::to_value(cfg).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut k = cfg.k.max(1);
    loop {
        match verify_filtration_vanishing(&p, &pairs, k, cfg.seed, cfg.max_trials) {
            Ok(FiltrationOutcome::Certified(mut cert)) => {
                cert.input = Some(input);
                cert.seal();
                return Ok(FiltrationOutcome::Certified(cert));
            }
            Err(Error::Exhausted { .. }) if k < cfg.k_cap => k += 1,
            other => return other,
        }
    }
}

/// Replays a certificate and, if it embeds a pipeline config, checks that its
/// torus and norm vectors are the ones the config prescribes.
pub fn replay_certificate(cert: &PerturbationCertificate) -> Result<ReplayReport> {
    let fail = |m: &str| Ok(ReplayReport { ok: false, mismatch: Some(m.to_string()) });
    if let Some(input) = &cert.input {
        let cfg: PipelineConfig = match serde_json::from_value(input.clone()) {
            Ok(c) => c,
            Err(_) => return fail("embedded input is not a pipeline config"),
        };
        let (p, _) = cfg.torus.build()?;
        let dual = dual_polarization(&p)?;
        if TorusConfig::from_polarization(&dual) != cert.torus {
            return fail("torus is not the dual of the input torus");
        }
        let pairs: Vec<(Vec<Rational>, Vec<Rational>)> = cfg.pairs.iter().map(|(a, b)| (a.0.clone(), b.0.clone())).collect();
        let groups = match pipeline_targets(&p, &dual, cert.k, &pairs)? {
            Ok(g) => g,
            Err(_) => return fail("input has a degenerate pair"),
        };
        for h in &cert.hypersurfaces {
            let expected = groups.get(h.group).map(|(wp, wm)| if h.sign == "+" { wp } else { wm });
            if expected != Some(&h.w) {
                return fail(&format!("norm vector of group {} sign {}", h.group, h.sign));
            }
        }
    }
    replay(cert)
}
