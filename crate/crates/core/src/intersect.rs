//! Transversality and intersections of complexes, and the seeded δ-perturbation
//! search that makes `n+1` pairs of theta hypersurfaces regular and transverse.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::complex::{canonical_translate, check_balancing, check_regular, corner_locus, finalize, overlapping_shifts, PolyCell, TropicalComplex};
use crate::error::{Error, Result};
use crate::exact::normal_form::{lattice_index_in_saturation, saturate};
use crate::exact::rational::{self as rat, Rational};
use crate::geometry::{self, vrep_from_hrep, HRep, VRep};
use crate::theta::{make_theta, DeltaFunction};
use crate::torus::{coset_system, Polarization, TorusConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub cell1: usize,
    pub cell2: usize,
    /// Period added to the second cell.
    pub shift: Vec<BigInt>,
    pub point: Vec<Rational>,
    /// `n − dim(T₁ + T₂)`.
    pub defect: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransversalityReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

struct Meeting {
    a: usize,
    b: usize,
    shift: Vec<BigInt>,
    piece: VRep,
    point: Vec<Rational>,
}

/// Pairs of cells (second one translated by a period) whose relative interiors meet.
fn meetings(c1: &TropicalComplex, c2: &TropicalComplex) -> Result<Vec<Meeting>> {
    if c1.ambient != c2.ambient {
        return Err(Error::TorusMismatch);
    }
    let n = c1.dim();
    let amb = &c1.ambient;
    let h1: Vec<HRep> = c1.cells.iter().map(|c| c.hrep(n)).collect();
    let h2: Vec<HRep> = c2.cells.iter().map(|c| c.hrep(n)).collect();
    let mut out = Vec::new();
    for (i, a) in c1.cells.iter().enumerate() {
        for (j, b) in c2.cells.iter().enumerate() {
            for g in overlapping_shifts(amb, b, a) {
                let hb = h2[j].translate(&amb.period(&g));
                let piece = vrep_from_hrep(&h1[i].intersect(&hb), n);
                if piece.is_empty() {
                    continue;
                }
                let p = piece.interior_point();
                if h1[i].relint_contains(&p) && hb.relint_contains(&p) {
                    out.push(Meeting { a: i, b: j, shift: g, piece, point: p });
                }
            }
        }
    }
    Ok(out)
}

fn span_rank(a: &PolyCell, b: &PolyCell, n: usize) -> usize {
    let mut t = a.tangent(n);
    t.extend(b.tangent(n));
    geometry::rank(&t, n)
}

/// Every pair of cells whose relative interiors meet must span the ambient space.
pub fn check_transverse(c1: &TropicalComplex, c2: &TropicalComplex) -> Result<TransversalityReport> {
    let n = c1.dim();
    let violations: Vec<Violation> = meetings(c1, c2)?
        .into_iter()
        .filter_map(|m| {
            let r = span_rank(&c1.cells[m.a], &c2.cells[m.b], n);
            (r < n).then(|| Violation { cell1: m.a, cell2: m.b, shift: m.shift, point: m.point, defect: n - r })
        })
        .collect();
    Ok(TransversalityReport { pass: violations.is_empty(), violations })
}

/// `[Λ₂ ∩ (T₁ + T₂) : L₁ + L₂]` with `Lᵢ = Λ₂ ∩ Tᵢ`.
fn intersection_index(c: &TropicalComplex, a: &PolyCell, b: &PolyCell) -> BigInt {
    let n = c.dim();
    let coords = |cell: &PolyCell| -> Vec<Vec<Rational>> {
        cell.tangent(n).iter().map(|v| c.ambient.tangent_coords(v)).collect()
    };
    let mut gens = saturate(&coords(a), n);
    gens.extend(saturate(&coords(b), n));
    lattice_index_in_saturation(&gens)
}

/// Set-theoretic intersection of transverse complexes.
pub fn intersect_complexes(c1: &TropicalComplex, c2: &TropicalComplex) -> Result<TropicalComplex> {
    let report = check_transverse(c1, c2)?;
    if !report.pass {
        return Err(Error::NotTransverse(report.violations.len()));
    }
    let n = c1.dim();
    let amb = c1.ambient.clone();
    let mut seen: BTreeSet<VRep> = BTreeSet::new();
    let mut cells = Vec::new();
    for m in meetings(c1, c2)? {
        let (a, b) = (&c1.cells[m.a], &c2.cells[m.b]);
        let (mut vertices, _) = canonical_translate(&amb, &m.piece.vertices);
        vertices.sort();
        let mut rays = m.piece.rays.clone();
        rays.sort();
        if !seen.insert(VRep { vertices: vertices.clone(), rays: rays.clone() }) {
            continue;
        }
        let dim = m.piece.dim(n);
        let weight = match (&a.weight, &b.weight) {
            (Some(wa), Some(wb)) if dim + n == a.dim + b.dim => Some(wa * wb * intersection_index(c1, a, b)),
            _ => None,
        };
        cells.push(PolyCell { dim, vertices, rays, values: Vec::new(), active: Vec::new(), labels: Vec::new(), weight });
    }
    let mut c = TropicalComplex { ambient: amb, cells, incidence: Vec::new() };
    finalize(&mut c);
    Ok(c)
}

/// First-order motion of a cell when `δ` moves in direction `δ′` (indexed by
/// the cell labels): a solution `ẋ` of `(αᵢ − α₀)·ẋ = δ′(α₀) − δ′(αᵢ)`,
/// determined modulo the tangent space of the cell.
pub fn delta_direction(c: &TropicalComplex, cell: usize, dprime: &[Rational]) -> Result<Vec<Rational>> {
    let n = c.dim();
    let cell = c.cells.get(cell).ok_or_else(|| Error::MalformedComplex(format!("no cell {cell}")))?;
    if cell.active.is_empty() {
        return Err(Error::MalformedComplex("cell carries no active terms".into()));
    }
    let value = |l: usize| -> Result<Rational> {
        dprime.get(l).cloned().ok_or(Error::DimensionMismatch { expected: l + 1, got: dprime.len() })
    };
    let a0 = c.ambient.covector(&cell.active[0]);
    let d0 = value(cell.labels[0])?;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (z, &l) in cell.active.iter().zip(&cell.labels).skip(1) {
        rows.push(rat::sub(&c.ambient.covector(z), &a0));
        rhs.push(&d0 - value(l)?);
    }
    if rows.is_empty() {
        return Ok(rat::zeros(n));
    }
    geometry::matrix_of_rows(&rows, n)
        .solve_affine(&rhs)
        .map(|(x, _)| x)
        .ok_or_else(|| Error::MalformedComplex("tie equations are inconsistent".into()))
}

fn sign_char(s: usize) -> char {
    if s == 0 {
        '+'
    } else {
        '-'
    }
}

/// Emptiness of `∩ᵢ V(fᵢ^{sᵢ})` for every sign vector, by iterated intersection.
pub fn verify_empty_total_intersection(groups: &[(TropicalComplex, TropicalComplex)]) -> Result<BTreeMap<String, bool>> {
    let mut stages: Vec<(String, TropicalComplex)> = Vec::new();
    for (i, (plus, minus)) in groups.iter().enumerate() {
        stages = if i == 0 {
            vec![("+".to_string(), plus.clone()), ("-".to_string(), minus.clone())]
        } else {
            let mut next = Vec::new();
            for (key, prev) in &stages {
                for (s, c) in [('+', plus), ('-', minus)] {
                    next.push((format!("{key}{s}"), intersect_complexes(prev, c)?));
                }
            }
            next
        };
    }
    Ok(stages.into_iter().map(|(k, c)| (k, c.is_empty())).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypersurfaceRecord {
    pub group: usize,
    pub sign: String,
    #[serde(with = "rat::serde_q::vec")]
    pub w: Vec<Rational>,
    /// δ value on each coset.
    #[serde(with = "rat::serde_q::vec")]
    pub delta: Vec<Rational>,
    pub trials: usize,
    pub regular: bool,
    pub balanced: bool,
    pub cells: usize,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageRecord {
    pub level: usize,
    pub signs: String,
    pub cells: usize,
    pub pure_dim: Option<usize>,
    /// Result of the transversality check that produced this stage.
    pub transverse: bool,
    pub empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationCertificate {
    /// Torus and polarization the hypersurfaces live on.
    pub torus: TorusConfig,
    pub k: u64,
    pub seed: u64,
    pub max_trials: usize,
    pub trials: usize,
    pub hypersurfaces: Vec<HypersurfaceRecord>,
    pub stages: Vec<StageRecord>,
    pub emptiness: BTreeMap<String, bool>,
    /// Stage `j ≤ n` complexes are pure of dimension `n − j`.
    pub dimension_audit: bool,
    pub success: bool,
    /// Input the certificate was produced from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<serde_json::Value>,
    pub payload_digest: String,
}

impl PerturbationCertificate {
    pub fn compute_digest(&self) -> String {
        let mut body = self.clone();
        body.payload_digest = String::new();
        let text = serde_json::to_string(&body).expect("certificate serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn seal(&mut self) {
        self.payload_digest = self.compute_digest();
    }
}

struct SearchState {
    n: usize,
    stages: Vec<(String, TropicalComplex)>,
    records: Vec<StageRecord>,
    audit: bool,
}

impl SearchState {
    fn transverse_to_stages(&self, c: &TropicalComplex) -> Result<bool> {
        for (_, s) in &self.stages {
            if !check_transverse(s, c)?.pass {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn advance(&mut self, level: usize, plus: &TropicalComplex, minus: &TropicalComplex) -> Result<()> {
        let mut next = Vec::new();
        if level == 1 {
            next.push(("+".to_string(), plus.clone()));
            next.push(("-".to_string(), minus.clone()));
        } else {
            for (key, prev) in &self.stages {
                for (s, c) in [('+', plus), ('-', minus)] {
                    next.push((format!("{key}{s}"), intersect_complexes(prev, c)?));
                }
            }
        }
        for (key, c) in &next {
            let pure_dim = c.pure_dim();
            if level <= self.n && (c.is_empty() || pure_dim != Some(self.n - level)) {
                self.audit = false;
            }
            self.records.push(StageRecord {
                level,
                signs: key.clone(),
                cells: c.cells.len(),
                pure_dim,
                transverse: true,
                empty: c.is_empty(),
            });
        }
        self.stages = next;
        Ok(())
    }
}

fn draw_delta(rng: &mut ChaCha8Rng, len: usize, k: u64) -> Vec<Rational> {
    let den = BigInt::from((1u64 << 16) * 8 * k);
    (0..len).map(|_| Rational::new(BigInt::from(rng.gen_range(0..1u64 << 16)), den.clone())).collect()
}

/// Sequential search: for each hypersurface in turn draw `δ` until it is
/// regular and transverse to every stage intersection accepted so far.
pub fn perturb_search(
    p: &Polarization,
    k: u64,
    groups: &[(Vec<Rational>, Vec<Rational>)],
    seed: u64,
    max_trials: usize,
) -> Result<PerturbationCertificate> {
    if groups.is_empty() {
        return Err(Error::Invalid("no targets".into()));
    }
    let n = p.dim();
    let cosets = Arc::new(coset_system(p, k)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cert = PerturbationCertificate {
        torus: TorusConfig::from_polarization(p),
        k,
        seed,
        max_trials,
        trials: 0,
        hypersurfaces: Vec::new(),
        stages: Vec::new(),
        emptiness: BTreeMap::new(),
        dimension_audit: true,
        success: false,
        input: None,
        payload_digest: String::new(),
    };
    let mut state = SearchState { n, stages: Vec::new(), records: Vec::new(), audit: true };
    for (g, (wp, wm)) in groups.iter().enumerate() {
        let mut accepted: Vec<TropicalComplex> = Vec::new();
        for (s, w) in [wp, wm].into_iter().enumerate() {
            let mut trials = 0;
            loop {
                if trials == max_trials {
                    cert.stages = state.records.clone();
                    cert.dimension_audit = state.audit;
                    cert.seal();
                    return Err(Error::Exhausted { max_trials, hypersurface: 2 * g + s, partial: Box::new(cert) });
                }
                trials += 1;
                cert.trials += 1;
                let delta = draw_delta(&mut rng, cosets.len(), k);
                let theta = make_theta(p, k, DeltaFunction::new(cosets.clone(), delta.clone())?, w.clone())?;
                let c = corner_locus(&theta)?;
                if !check_regular(&c) || !state.transverse_to_stages(&c)? {
                    continue;
                }
                cert.hypersurfaces.push(HypersurfaceRecord {
                    group: g,
                    sign: sign_char(s).to_string(),
                    w: w.clone(),
                    delta,
                    trials,
                    regular: true,
                    balanced: check_balancing(&c)?,
                    cells: c.cells.len(),
                    digest: c.digest(),
                });
                accepted.push(c);
                break;
            }
        }
        state.advance(g + 1, &accepted[0], &accepted[1])?;
    }
    let last = groups.len();
    cert.emptiness = state.stages.iter().map(|(key, c)| (key.clone(), c.is_empty())).collect();
    cert.stages = state.records;
    cert.dimension_audit = state.audit;
    cert.success = last == n + 1 && cert.emptiness.values().all(|&e| e) && cert.dimension_audit;
    cert.seal();
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub ok: bool,
    pub mismatch: Option<String>,
}

/// Recomputes every hypersurface, stage and flag from the stored δ's.
pub fn replay(cert: &PerturbationCertificate) -> Result<ReplayReport> {
    let fail = |m: String| Ok(ReplayReport { ok: false, mismatch: Some(m) });
    let (p, _) = cert.torus.build()?;
    let n = p.dim();
    let cosets = Arc::new(coset_system(&p, cert.k)?);
    let mut state = SearchState { n, stages: Vec::new(), records: Vec::new(), audit: true };
    let mut groups: BTreeMap<usize, Vec<TropicalComplex>> = BTreeMap::new();
    for (i, h) in cert.hypersurfaces.iter().enumerate() {
        let delta = match DeltaFunction::new(cosets.clone(), h.delta.clone()) {
            Ok(d) => d,
            Err(_) => return fail(format!("hypersurface {i}: δ has the wrong number of cosets")),
        };
        let c = corner_locus(&make_theta(&p, cert.k, delta, h.w.clone())?)?;
        if c.digest() != h.digest {
            return fail(format!("hypersurface {i} (group {}, sign {}): corner locus digest", h.group, h.sign));
        }
        if check_regular(&c) != h.regular {
            return fail(format!("hypersurface {i}: regularity flag"));
        }
        if check_balancing(&c)? != h.balanced {
            return fail(format!("hypersurface {i}: balancing flag"));
        }
        if !state.transverse_to_stages(&c)? {
            return fail(format!("hypersurface {i}: not transverse to the previous stage"));
        }
        let entry = groups.entry(h.group).or_default();
        entry.push(c);
        if entry.len() == 2 {
            let (a, b) = (entry[0].clone(), entry[1].clone());
            state.advance(h.group + 1, &a, &b)?;
        }
    }
    if state.records != cert.stages {
        let first = state
            .records
            .iter()
            .zip(&cert.stages)
            .position(|(a, b)| a != b)
            .unwrap_or(state.records.len().min(cert.stages.len()));
        return fail(format!("stage record {first}"));
    }
    let emptiness: BTreeMap<String, bool> = state.stages.iter().map(|(k, c)| (k.clone(), c.is_empty())).collect();
    if groups.len() == n + 1 && emptiness != cert.emptiness {
        return fail("emptiness flags".into());
    }
    if state.audit != cert.dimension_audit {
        return fail("dimension audit".into());
    }
    if cert.compute_digest() != cert.payload_digest {
        return fail("payload digest".into());
    }
    Ok(ReplayReport { ok: true, mismatch: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::corner_locus_of_terms;
    use crate::exact::rational::{q, qf};
    use crate::theta::standard_theta;
    use crate::torus::principal_circle;

    fn z(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn line_at(a: i64, b: i64) -> TropicalComplex {
        // max{0, x − a, y − b}: a tropical line with vertex (a, b)
        corner_locus_of_terms(&[(z(&[0, 0]), q(0)), (z(&[1, 0]), q(-a)), (z(&[0, 1]), q(-b))], 2).unwrap()
    }

    fn circle_points(w: Rational) -> TropicalComplex {
        corner_locus(&standard_theta(&principal_circle(), 1, vec![w]).unwrap()).unwrap()
    }

    #[test]
    fn circle_points_transversality() {
        let a = circle_points(q(0));
        let b = circle_points(qf(1, 3));
        assert!(check_transverse(&a, &b).unwrap().pass);
        let r = check_transverse(&a, &a).unwrap();
        assert!(!r.pass);
        assert_eq!(r.violations[0].defect, 1);
        assert!(intersect_complexes(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn lines_meet_in_one_point() {
        let l1 = line_at(0, 0);
        let l2 = line_at(1, -1);
        let r = check_transverse(&l1, &l2).unwrap();
        assert!(r.pass);
        let x = intersect_complexes(&l1, &l2).unwrap();
        assert_eq!(x.cells.len(), 1);
        assert_eq!(x.cells[0].dim, 0);
        assert_eq!(x.cells[0].weight, Some(BigInt::from(1)));
        assert!(check_transverse(&l2, &l1).unwrap().pass);
    }

    #[test]
    fn overlapping_lines_fail() {
        let l1 = line_at(0, 0);
        let l2 = line_at(1, 0);
        let r = check_transverse(&l1, &l2).unwrap();
        assert!(!r.pass);
        assert!(matches!(intersect_complexes(&l1, &l2), Err(Error::NotTransverse(_))));
    }

    #[test]
    fn pair_of_pants_direction() {
        let c = corner_locus_of_terms(&[(z(&[0, 0]), q(0)), (z(&[1, 0]), q(0)), (z(&[0, 1]), q(0))], 2).unwrap();
        let (origin, _) = c.cells_of_dim(0).next().unwrap();
        assert_eq!(delta_direction(&c, origin, &[q(0), q(1), q(0)]).unwrap(), vec![q(-1), q(0)]);
        assert_eq!(delta_direction(&c, origin, &[q(1), q(1), q(1)]).unwrap(), vec![q(0), q(0)]);
    }

    #[test]
    fn exhausted_at_zero_trials() {
        let p = principal_circle();
        let groups = vec![(vec![q(0)], vec![qf(1, 3)]), (vec![qf(1, 7)], vec![q(0)])];
        match perturb_search(&p, 1, &groups, 0, 0) {
            Err(Error::Exhausted { hypersurface, partial, .. }) => {
                assert_eq!(hypersurface, 0);
                assert!(partial.hypersurfaces.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn circle_search_and_replay() {
        let p = principal_circle();
        let groups = vec![(vec![qf(1, 2)], vec![qf(-1, 6)]), (vec![qf(-5, 14)], vec![qf(1, 5)])];
        let cert = perturb_search(&p, 1, &groups, 0, 20).unwrap();
        assert!(cert.success, "{cert:?}");
        assert_eq!(cert.emptiness.len(), 4);
        assert!(replay(&cert).unwrap().ok);
        let mut bad = cert.clone();
        let d = &mut bad.hypersurfaces[1].delta[0];
        *d = Rational::new(d.numer() ^ BigInt::from(1), d.denom().clone());
        let r = replay(&bad).unwrap();
        assert!(!r.ok);
        assert!(r.mismatch.unwrap().contains("hypersurface 1"));
    }
}
