//! Corner loci of piecewise-linear envelopes as weighted polyhedral complexes.
//!
//! On a torus the envelope is computed in `Λ₁` coordinates on the box
//! `[−m, 1+m]ⁿ`. Cells are faces of the subdivision into dominance regions;
//! each torus cell is stored once, as the translate whose lexicographically
//! smallest vertex has `Λ₁` coordinates in `[0,1)ⁿ`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::normal_form::saturate;
use crate::exact::rational::{self as rat, ceil, dot, floor, format_rational, from_int, int_to_q, rational_gcd, Rational};
use crate::geometry::{self, envelope_regions, hrep_from_vrep, kernel, vrep_from_hrep, HRep, VRep};
use crate::theta::{ThetaFunction, TropicalRationalFn};
use crate::torus::TropicalAffineTorus;

/// Where a complex lives: a torus, or a chart `ℝⁿ` with `Λ₂ = ℤⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Ambient {
    Torus(Arc<TropicalAffineTorus>),
    Chart(usize),
}

impl Ambient {
    pub fn dim(&self) -> usize {
        match self {
            Ambient::Torus(t) => t.dim(),
            Ambient::Chart(n) => *n,
        }
    }

    /// `Λ₁` coordinates (identity on a chart).
    pub fn period_coords(&self, x: &[Rational]) -> Vec<Rational> {
        match self {
            Ambient::Torus(t) => t.period_coords(x),
            Ambient::Chart(_) => x.to_vec(),
        }
    }

    pub fn period(&self, gamma: &[BigInt]) -> Vec<Rational> {
        match self {
            Ambient::Torus(t) => t.period(gamma),
            Ambient::Chart(_) => int_to_q(gamma),
        }
    }

    /// Coordinates of a tangent vector in the `Λ₂` basis.
    pub fn tangent_coords(&self, x: &[Rational]) -> Vec<Rational> {
        match self {
            Ambient::Torus(t) => t.lambda2.coords(x),
            Ambient::Chart(_) => x.to_vec(),
        }
    }

    /// Ambient covector of `Λ₂^∨` coordinates `z`.
    pub fn covector(&self, z: &[BigInt]) -> Vec<Rational> {
        match self {
            Ambient::Torus(t) => t.cotangent_lattice().point_int(z),
            Ambient::Chart(_) => int_to_q(z),
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Ambient::Torus(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyCell {
    pub dim: usize,
    /// Ambient coordinates, sorted.
    pub vertices: Vec<Vec<Rational>>,
    /// Recession directions; empty on a torus.
    pub rays: Vec<Vec<Rational>>,
    /// Envelope value at each vertex (corner-locus cells only).
    pub values: Vec<Rational>,
    /// Terms achieving the maximum on the cell, `Λ₂^∨` coordinates, sorted.
    pub active: Vec<Vec<BigInt>>,
    /// Coset index (torus) or term index (chart) of each active covector.
    pub labels: Vec<usize>,
    pub weight: Option<BigInt>,
}

impl PolyCell {
    pub fn vrep(&self) -> VRep {
        VRep { vertices: self.vertices.clone(), rays: self.rays.clone() }
    }

    pub fn hrep(&self, n: usize) -> HRep {
        hrep_from_vrep(&self.vrep(), n)
    }

    /// Basis of the tangent space of the affine hull.
    pub fn tangent(&self, n: usize) -> Vec<Vec<Rational>> {
        crate::exact::matrix::span_basis(&self.vrep().directions(), n)
    }

    pub fn interior_point(&self) -> Vec<Rational> {
        self.vrep().interior_point()
    }

    fn translated(&self, s: &[Rational]) -> PolyCell {
        let mut c = self.clone();
        c.vertices = c.vertices.iter().map(|v| rat::add(v, s)).collect();
        c
    }
}

/// `face + period(shift) ⊆ coface`, with `dim coface = dim face + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Incidence {
    pub face: usize,
    pub coface: usize,
    #[serde(serialize_with = "ints_as_strings")]
    pub shift: Vec<BigInt>,
}

fn ints_as_strings<S: serde::Serializer>(xs: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(ToString::to_string))
}

#[derive(Clone, Debug)]
pub struct TropicalComplex {
    pub ambient: Ambient,
    pub cells: Vec<PolyCell>,
    pub incidence: Vec<Incidence>,
}

/// Convex hull of the active covectors at a cell.
#[derive(Clone, Debug, PartialEq)]
pub struct InPolytope {
    pub vertices: Vec<Vec<BigInt>>,
    pub dim: usize,
}

impl TropicalComplex {
    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn top_dim(&self) -> Option<usize> {
        self.cells.iter().map(|c| c.dim).max()
    }

    /// Dimension shared by all maximal cells, if the complex is pure.
    pub fn pure_dim(&self) -> Option<usize> {
        let has_coface: BTreeSet<usize> = self.incidence.iter().map(|i| i.face).collect();
        let dims: BTreeSet<usize> =
            (0..self.cells.len()).filter(|i| !has_coface.contains(i)).map(|i| self.cells[i].dim).collect();
        if dims.len() == 1 {
            dims.into_iter().next()
        } else {
            None
        }
    }

    pub fn cells_of_dim(&self, d: usize) -> impl Iterator<Item = (usize, &PolyCell)> {
        self.cells.iter().enumerate().filter(move |(_, c)| c.dim == d)
    }

    /// SHA-256 over a canonical text form of the cells.
    pub fn digest(&self) -> String {
        let mut s = String::new();
        let vec = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(",");
        for c in &self.cells {
            let _ = write!(s, "d{}|", c.dim);
            for v in &c.vertices {
                let _ = write!(s, "v{}|", vec(v));
            }
            for r in &c.rays {
                let _ = write!(s, "r{}|", vec(r));
            }
            for x in &c.values {
                let _ = write!(s, "f{}|", format_rational(x));
            }
            for (a, l) in c.active.iter().zip(&c.labels) {
                let z: Vec<String> = a.iter().map(ToString::to_string).collect();
                let _ = write!(s, "a{}@{}|", z.join(","), l);
            }
            if let Some(w) = &c.weight {
                let _ = write!(s, "w{w}|");
            }
            s.push('\n');
        }
        hex::encode(Sha256::digest(s.as_bytes()))
    }

    pub fn to_json(&self) -> ComplexJson {
        let q = |v: &Vec<Rational>| v.iter().map(format_rational).collect::<Vec<_>>();
        ComplexJson {
            n: self.dim(),
            ambient: if self.ambient.is_torus() { "torus" } else { "chart" }.to_string(),
            cells: self
                .cells
                .iter()
                .map(|c| CellJson {
                    dim: c.dim,
                    vertices: c.vertices.iter().map(q).collect(),
                    rays: c.rays.iter().map(q).collect(),
                    values: c.values.iter().map(format_rational).collect(),
                    active: c.active.iter().map(|a| a.iter().map(ToString::to_string).collect()).collect(),
                    weight: c.weight.as_ref().map(ToString::to_string),
                })
                .collect(),
            incidence: self.incidence.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellJson {
    pub dim: usize,
    pub vertices: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rays: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<String>,
    pub active: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexJson {
    pub n: usize,
    pub ambient: String,
    pub cells: Vec<CellJson>,
    pub incidence: Vec<Incidence>,
}

fn in_unit_box(t: &[Rational]) -> bool {
    t.iter().all(|x| !x.is_negative() && *x < Rational::one())
}

/// Translate of a vertex set whose lexicographically smallest `Λ₁`-coordinate
/// vertex lies in `[0,1)ⁿ`, with the period that was added.
pub(crate) fn canonical_translate(amb: &Ambient, vertices: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Vec<BigInt>) {
    let n = amb.dim();
    if !amb.is_torus() || vertices.is_empty() {
        return (vertices.to_vec(), vec![BigInt::zero(); n]);
    }
    let lexmin = vertices.iter().map(|v| amb.period_coords(v)).min().expect("nonempty");
    let gamma: Vec<BigInt> = lexmin.iter().map(|x| -floor(x)).collect();
    let s = amb.period(&gamma);
    let mut vs: Vec<Vec<Rational>> = vertices.iter().map(|v| rat::add(v, &s)).collect();
    vs.sort();
    (vs, gamma)
}

/// Lattice length of the segment spanned by collinear integer points.
fn segment_weight(points: &[Vec<BigInt>]) -> BigInt {
    let p0 = &points[0];
    let Some(dir) = points.iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect::<Vec<BigInt>>()).find(|d| d.iter().any(|x| !x.is_zero()))
    else {
        return BigInt::zero();
    };
    let proj = |p: &Vec<BigInt>| -> BigInt { p.iter().zip(&dir).map(|(a, b)| a * b).sum() };
    let lo = points.iter().min_by_key(|p| proj(p)).expect("nonempty");
    let hi = points.iter().max_by_key(|p| proj(p)).expect("nonempty");
    hi.iter().zip(lo).fold(BigInt::zero(), |g, (a, b)| g.gcd(&(a - b)))
}

fn affine_rank_int(points: &[Vec<BigInt>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let n = points[0].len();
    let p0 = int_to_q(&points[0]);
    let diffs: Vec<Vec<Rational>> = points[1..].iter().map(|p| rat::sub(&int_to_q(p), &p0)).collect();
    geometry::rank(&diffs, n)
}

/// Corner locus `V(f)` of a theta function on its torus.
pub fn corner_locus(theta: &ThetaFunction) -> Result<TropicalComplex> {
    let n = theta.dim();
    let torus = theta.polarization.torus.clone();
    let amb = Ambient::Torus(torus.clone());
    let l1 = torus.lambda1.basis().clone();
    let mut margin = rat::qf(1, 2);
    loop {
        if margin > rat::q(64) {
            return Err(Error::Invalid("corner locus did not stabilize".into()));
        }
        let lo = -margin.clone();
        let hi = Rational::one() + &margin;
        let cands = theta.candidates_on_box(&lo, &hi);
        let fns = theta.period_coordinate_functions(&cands);
        let regions = envelope_regions(&fns, n, &lo, &hi);
        // global vertices: Λ₁ coordinates → (active term indices, on the box boundary)
        let mut points: BTreeMap<Vec<Rational>, (BTreeSet<usize>, bool)> = BTreeMap::new();
        for (j, region) in regions.iter().enumerate() {
            for v in &region.vertices {
                let entry = points.entry(v.point.clone()).or_insert_with(|| (BTreeSet::new(), false));
                entry.0.insert(j);
                for &c in &v.tight {
                    if c < 2 * n {
                        entry.1 = true;
                    } else {
                        entry.0.insert(c - 2 * n);
                    }
                }
            }
        }
        // faces ↔ intersections of vertex active sets
        let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut work: Vec<Vec<usize>> = Vec::new();
        for (a, _) in points.values() {
            if a.len() >= 2 {
                let s: Vec<usize> = a.iter().copied().collect();
                if faces.insert(s.clone()) {
                    work.push(s);
                }
            }
        }
        while let Some(s) = work.pop() {
            let existing: Vec<Vec<usize>> = faces.iter().cloned().collect();
            for e in existing {
                let i: Vec<usize> = s.iter().filter(|x| e.binary_search(x).is_ok()).copied().collect();
                if i.len() >= 2 && faces.insert(i.clone()) {
                    work.push(i);
                }
            }
        }
        let mut grow = false;
        let mut cells = Vec::new();
        for s in &faces {
            let verts: Vec<(&Vec<Rational>, bool)> = points
                .iter()
                .filter(|(_, (a, _))| s.iter().all(|x| a.contains(x)))
                .map(|(p, (_, b))| (p, *b))
                .collect();
            if verts.iter().any(|(_, b)| *b) {
                let meets_core = (0..n).all(|i| {
                    let lo_i = verts.iter().map(|(p, _)| &p[i]).min().expect("nonempty");
                    let hi_i = verts.iter().map(|(p, _)| &p[i]).max().expect("nonempty");
                    *lo_i <= Rational::one() && !hi_i.is_negative()
                });
                if meets_core {
                    grow = true;
                    break;
                }
                continue;
            }
            let lexmin = verts.iter().map(|(p, _)| *p).min().expect("nonempty");
            if !in_unit_box(lexmin) {
                continue;
            }
            let mut vs: Vec<(Vec<Rational>, Rational)> = verts
                .iter()
                .map(|(p, _)| {
                    let f = dot(&fns[s[0]].0, p) + &fns[s[0]].1;
                    (l1.mul_vec(p), f)
                })
                .collect();
            vs.sort();
            let mut act: Vec<(Vec<BigInt>, usize)> = s.iter().map(|&i| (cands[i].z.clone(), cands[i].coset)).collect();
            act.sort();
            let active: Vec<Vec<BigInt>> = act.iter().map(|(z, _)| z.clone()).collect();
            let vertices: Vec<Vec<Rational>> = vs.iter().map(|(v, _)| v.clone()).collect();
            let dim = VRep { vertices: vertices.clone(), rays: Vec::new() }.dim(n);
            let weight = (dim + 1 == n).then(|| segment_weight(&active));
            cells.push(PolyCell {
                dim,
                vertices,
                rays: Vec::new(),
                values: vs.into_iter().map(|(_, f)| f).collect(),
                labels: act.into_iter().map(|(_, l)| l).collect(),
                active,
                weight,
            });
        }
        if grow {
            margin *= rat::q(2);
            continue;
        }
        let mut c = TropicalComplex { ambient: amb, cells, incidence: Vec::new() };
        finalize(&mut c);
        return Ok(c);
    }
}

/// Sorts cells canonically and recomputes the incidence.
pub(crate) fn finalize(c: &mut TropicalComplex) {
    c.cells.sort_by(|a, b| (a.dim, &a.vertices, &a.rays).cmp(&(b.dim, &b.vertices, &b.rays)));
    c.incidence = compute_incidence(&c.ambient, &c.cells);
}

fn bbox(amb: &Ambient, cell: &PolyCell) -> Vec<(Rational, Rational)> {
    let ts: Vec<Vec<Rational>> = cell.vertices.iter().map(|v| amb.period_coords(v)).collect();
    (0..amb.dim())
        .map(|i| {
            let lo = ts.iter().map(|t| &t[i]).min().expect("nonempty").clone();
            let hi = ts.iter().map(|t| &t[i]).max().expect("nonempty").clone();
            (lo, hi)
        })
        .collect()
}

/// Periods `γ` for which the `Λ₁`-coordinate boxes of `a + γ` and `b` overlap.
pub(crate) fn overlapping_shifts(amb: &Ambient, a: &PolyCell, b: &PolyCell) -> Vec<Vec<BigInt>> {
    let n = amb.dim();
    if !amb.is_torus() {
        return vec![vec![BigInt::zero(); n]];
    }
    let ba = bbox(amb, a);
    let bb = bbox(amb, b);
    let ranges: Vec<(BigInt, BigInt)> =
        (0..n).map(|i| (ceil(&(&bb[i].0 - &ba[i].1)), floor(&(&bb[i].1 - &ba[i].0)))).collect();
    if ranges.iter().any(|(l, h)| l > h) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut g: Vec<BigInt> = ranges.iter().map(|(l, _)| l.clone()).collect();
    loop {
        out.push(g.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            g[i] += 1;
            if g[i] <= ranges[i].1 {
                break;
            }
            g[i] = ranges[i].0.clone();
        }
    }
}

fn contains_cell(h: &HRep, cell: &PolyCell) -> bool {
    cell.vertices.iter().all(|v| h.contains(v))
        && cell.rays.iter().all(|r| {
            h.eqs.iter().all(|(a, _)| dot(a, r).is_zero()) && h.ineqs.iter().all(|(a, _)| !dot(a, r).is_positive())
        })
}

pub(crate) fn compute_incidence(amb: &Ambient, cells: &[PolyCell]) -> Vec<Incidence> {
    let n = amb.dim();
    let hreps: Vec<HRep> = cells.iter().map(|c| c.hrep(n)).collect();
    let mut out = Vec::new();
    for (i, face) in cells.iter().enumerate() {
        for (j, coface) in cells.iter().enumerate() {
            if coface.dim != face.dim + 1 {
                continue;
            }
            for g in overlapping_shifts(amb, face, coface) {
                let moved = face.translated(&amb.period(&g));
                if contains_cell(&hreps[j], &moved) {
                    out.push(Incidence { face: i, coface: j, shift: g });
                }
            }
        }
    }
    out
}

/// Corner locus of `x ↦ max_j (a_j·x + c_j)` on the chart `ℝⁿ`; covectors integral.
pub fn corner_locus_of_terms(terms: &[(Vec<BigInt>, Rational)], n: usize) -> Result<TropicalComplex> {
    if terms.iter().any(|(a, _)| a.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: terms.iter().map(|(a, _)| a.len()).find(|&l| l != n).unwrap_or(n) });
    }
    let distinct: BTreeSet<&Vec<BigInt>> = terms.iter().map(|(a, _)| a).collect();
    if distinct.len() != terms.len() {
        return Err(Error::Invalid("repeated covector in term list".into()));
    }
    if terms.len() > 16 {
        return Err(Error::Invalid("chart corner loci support at most 16 terms".into()));
    }
    let alphas: Vec<Vec<Rational>> = terms.iter().map(|(a, _)| int_to_q(a)).collect();
    let value = |j: usize, x: &[Rational]| dot(&alphas[j], x) + &terms[j].1;
    let mut cells = Vec::new();
    for size in 2..=terms.len() {
        for s in geometry::combinations(terms.len(), size) {
            let s0 = s[0];
            let eqs = s[1..]
                .iter()
                .map(|&i| (rat::sub(&alphas[i], &alphas[s0]), &terms[s0].1 - &terms[i].1))
                .collect();
            let ineqs = (0..terms.len())
                .filter(|j| !s.contains(j))
                .map(|j| (rat::sub(&alphas[j], &alphas[s0]), &terms[s0].1 - &terms[j].1))
                .collect();
            let v = vrep_from_hrep(&HRep { eqs, ineqs }, n);
            if v.is_empty() {
                continue;
            }
            let p = v.interior_point();
            let best = (0..terms.len()).map(|j| value(j, &p)).max().expect("terms");
            let exact: Vec<usize> = (0..terms.len()).filter(|&j| value(j, &p) == best).collect();
            if exact != s {
                continue;
            }
            let mut vertices = v.vertices.clone();
            vertices.sort();
            let mut rays = v.rays.clone();
            rays.sort();
            let dim = v.dim(n);
            let mut act: Vec<(Vec<BigInt>, usize)> = s.iter().map(|&i| (terms[i].0.clone(), i)).collect();
            act.sort();
            let active: Vec<Vec<BigInt>> = act.iter().map(|(z, _)| z.clone()).collect();
            let weight = (dim + 1 == n).then(|| segment_weight(&active));
            cells.push(PolyCell {
                dim,
                values: vertices.iter().map(|x| value(s0, x)).collect(),
                vertices,
                rays,
                labels: act.into_iter().map(|(_, l)| l).collect(),
                active,
                weight,
            });
        }
    }
    let mut c = TropicalComplex { ambient: Ambient::Chart(n), cells, incidence: Vec::new() };
    finalize(&mut c);
    Ok(c)
}

/// `(V(f₊), V(f₋))`.
pub fn corner_locus_rational(phi: &TropicalRationalFn) -> Result<(TropicalComplex, TropicalComplex)> {
    Ok((corner_locus(&phi.plus)?, corner_locus(&phi.minus)?))
}

pub fn dual_polytope_at(c: &TropicalComplex, cell: usize) -> Result<InPolytope> {
    let cell = c.cells.get(cell).ok_or_else(|| Error::MalformedComplex(format!("no cell {cell}")))?;
    let vertices = lattice_hull_vertices(&cell.active);
    let dim = affine_rank_int(&cell.active);
    Ok(InPolytope { vertices, dim })
}

/// Points of the list that are not convex combinations of the others.
fn lattice_hull_vertices(points: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if points.len() <= 1 {
        return points.to_vec();
    }
    let n = points[0].len();
    let qs: Vec<Vec<Rational>> = points.iter().map(|p| int_to_q(p)).collect();
    let h = hrep_from_vrep(&VRep { vertices: qs.clone(), rays: Vec::new() }, n);
    let v = vrep_from_hrep(&h, n);
    points.iter().zip(&qs).filter(|(_, q)| v.vertices.contains(q)).map(|(p, _)| p.clone()).collect()
}

/// Balancing at every codimension-2 cell: `Σ w_τ v_τ ∈ Tσ` over the facets
/// `τ ⊃ σ`, with `v_τ` the primitive integral vector of `Tτ / Tσ` pointing into `τ`.
pub fn check_balancing(c: &TropicalComplex) -> Result<bool> {
    let n = c.dim();
    if n < 2 {
        return Ok(true);
    }
    let amb = &c.ambient;
    for (si, sigma) in c.cells_of_dim(n - 2) {
        let t_sigma: Vec<Vec<Rational>> = sigma.tangent(n).iter().map(|v| amb.tangent_coords(v)).collect();
        let ann = kernel(&t_sigma, n);
        let base = sigma.interior_point();
        let mut sum = rat::zeros(n);
        let mut seen = false;
        for inc in c.incidence.iter().filter(|i| i.face == si) {
            let tau = &c.cells[inc.coface];
            let w = tau
                .weight
                .as_ref()
                .ok_or_else(|| Error::MalformedComplex(format!("facet {} has no weight", inc.coface)))?;
            seen = true;
            let from = rat::add(&base, &amb.period(&inc.shift));
            let d = amb.tangent_coords(&rat::sub(&tau.interior_point(), &from));
            let psi = ann
                .iter()
                .find(|p| !dot(p, &d).is_zero())
                .ok_or_else(|| Error::MalformedComplex(format!("cell {} is not a facet over {si}", inc.coface)))?;
            let t_tau: Vec<Vec<Rational>> = tau.tangent(n).iter().map(|v| amb.tangent_coords(v)).collect();
            let sat = saturate(&t_tau, n);
            let vals: Vec<Rational> = sat.iter().map(|l| dot(psi, &int_to_q(l))).collect();
            let g = rational_gcd(&vals);
            let t = g / dot(psi, &d).abs();
            sum = rat::add(&sum, &rat::scale(&(from_int(w) * t), &d));
        }
        if !seen {
            return Err(Error::MalformedComplex(format!("codimension-2 cell {si} has no facets")));
        }
        if ann.iter().any(|phi| !dot(phi, &sum).is_zero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Regularity: every dual polytope is a simplex of complementary dimension
/// whose only lattice points are its vertices.
pub fn check_regular(c: &TropicalComplex) -> bool {
    let n = c.dim();
    c.cells.iter().filter(|cell| !cell.active.is_empty()).all(|cell| {
        let r = affine_rank_int(&cell.active);
        r + 1 == cell.active.len() && r + cell.dim == n && lattice_points_in_simplex(&cell.active) == cell.active.len()
    })
}

/// Number of lattice points in the simplex with the given (independent) vertices.
fn lattice_points_in_simplex(verts: &[Vec<BigInt>]) -> usize {
    let n = verts[0].len();
    let v0 = int_to_q(&verts[0]);
    let cols: Vec<Vec<Rational>> = verts[1..].iter().map(|v| rat::sub(&int_to_q(v), &v0)).collect();
    let m = cols.len();
    let mut a = crate::exact::QMatrix::zeros(n, m);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            a[(i, j)] = col[i].clone();
        }
    }
    let lo: Vec<BigInt> = (0..n).map(|i| verts.iter().map(|v| v[i].clone()).min().expect("nonempty")).collect();
    let hi: Vec<BigInt> = (0..n).map(|i| verts.iter().map(|v| v[i].clone()).max().expect("nonempty")).collect();
    let mut z = lo.clone();
    let mut count = 0;
    loop {
        let rhs = rat::sub(&int_to_q(&z), &v0);
        if let Some((lambda, _)) = a.solve_affine(&rhs) {
            let total = lambda.iter().fold(Rational::zero(), |s, x| s + x);
            if lambda.iter().all(|x| !x.is_negative()) && total <= Rational::one() {
                count += 1;
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return count;
            }
            i -= 1;
            z[i] += 1;
            if z[i] <= hi[i] {
                break;
            }
            z[i] = lo[i].clone();
        }
    }
}

/// SVG of a complex on a 2-torus: the fundamental parallelogram and the cells
/// of dimension 1, drawn with their translates and labelled by weight.
pub fn to_svg(c: &TropicalComplex) -> Result<String> {
    let Ambient::Torus(t) = &c.ambient else {
        return Err(Error::Invalid("SVG output needs a torus".into()));
    };
    if t.dim() != 2 {
        return Err(Error::Invalid(format!("SVG output is only available for n = 2 (n = {})", t.dim())));
    }
    let f = |x: &Rational| rat::to_f64(x);
    let g1: Vec<f64> = t.lambda1.generator(0).iter().map(f).collect();
    let g2: Vec<f64> = t.lambda1.generator(1).iter().map(f).collect();
    let corners = [[0.0, 0.0], [g1[0], g1[1]], [g1[0] + g2[0], g1[1] + g2[1]], [g2[0], g2[1]]];
    let (xmin, xmax) = corners.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p[0]), b.max(p[0])));
    let (ymin, ymax) = corners.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p[1]), b.max(p[1])));
    let size = 480.0;
    let pad = 20.0;
    let scale = size / (xmax - xmin).max(ymax - ymin);
    let px = |p: &[f64]| (pad + (p[0] - xmin) * scale, pad + (ymax - p[1]) * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}">"#,
        w = (xmax - xmin) * scale + 2.0 * pad,
        h = (ymax - ymin) * scale + 2.0 * pad
    );
    let poly: Vec<String> = corners.iter().map(|p| px(p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(s, r#"<defs><clipPath id="fd"><polygon points="{}"/></clipPath></defs>"#, poly.join(" "));
    let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="gray" stroke-dasharray="4"/>"#, poly.join(" "));
    let _ = writeln!(s, r#"<g clip-path="url(#fd)" stroke="black" stroke-width="2">"#);
    let mut labels = String::new();
    for (_, cell) in c.cells_of_dim(1) {
        let a: Vec<f64> = cell.vertices[0].iter().map(f).collect();
        let b: Vec<f64> = cell.vertices[1].iter().map(f).collect();
        for i in -1..=1 {
            for j in -1..=1 {
                let sh = [i as f64 * g1[0] + j as f64 * g2[0], i as f64 * g1[1] + j as f64 * g2[1]];
                let (x1, y1) = px(&[a[0] + sh[0], a[1] + sh[1]]);
                let (x2, y2) = px(&[b[0] + sh[0], b[1] + sh[1]]);
                let _ = writeln!(s, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
            }
        }
        if let Some(w) = &cell.weight {
            let (x, y) = px(&[(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]);
            let _ = writeln!(labels, r#"<text x="{x:.2}" y="{y:.2}" font-size="12" fill="blue">{w}</text>"#);
        }
    }
    s.push_str("</g>\n");
    s.push_str(&labels);
    for (_, cell) in c.cells_of_dim(0) {
        let p: Vec<f64> = cell.vertices[0].iter().map(f).collect();
        let (x, y) = px(&p);
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="red"/>"#);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{q, qf};
    use crate::theta::{make_theta, standard_theta, DeltaFunction};
    use crate::torus::{alpha_111_torus, coset_system, principal_circle};

    fn z(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn line() -> TropicalComplex {
        corner_locus_of_terms(&[(z(&[0, 0]), q(0)), (z(&[1, 0]), q(0)), (z(&[0, 1]), q(0))], 2).unwrap()
    }

    #[test]
    fn circle_bend_points() {
        let c = corner_locus(&standard_theta(&principal_circle(), 1, vec![q(0)]).unwrap()).unwrap();
        assert_eq!(c.cells.len(), 1);
        assert_eq!(c.cells[0].vertices, vec![vec![qf(1, 2)]]);
        assert_eq!(c.cells[0].weight, Some(BigInt::one()));
        let c = corner_locus(&standard_theta(&principal_circle(), 2, vec![q(0)]).unwrap()).unwrap();
        let pts: Vec<_> = c.cells.iter().map(|c| c.vertices[0][0].clone()).collect();
        assert_eq!(pts, vec![qf(1, 4), qf(3, 4)]);
        assert!(check_regular(&c));
    }

    #[test]
    fn tropical_line() {
        let c = line();
        let rays: Vec<_> = c.cells_of_dim(1).map(|(_, c)| c.rays.clone()).collect();
        assert_eq!(rays.len(), 3);
        assert_eq!(c.cells_of_dim(0).count(), 1);
        assert!(c.cells_of_dim(1).all(|(_, c)| c.weight == Some(BigInt::one())));
        assert!(check_balancing(&c).unwrap());
        assert!(check_regular(&c));
        let d = dual_polytope_at(&c, 0).unwrap();
        assert_eq!(d.dim, 2);
        assert_eq!(d.vertices.len(), 3);
    }

    #[test]
    fn unbalanced_weight() {
        let mut c = line();
        let (i, _) = c.cells_of_dim(1).next().unwrap();
        c.cells[i].weight = Some(BigInt::from(2));
        assert!(!check_balancing(&c).unwrap());
    }

    #[test]
    fn double_bend_not_regular() {
        let c = corner_locus_of_terms(&[(z(&[0]), q(0)), (z(&[2]), q(0))], 1).unwrap();
        assert_eq!(c.cells.len(), 1);
        assert_eq!(c.cells[0].weight, Some(BigInt::from(2)));
        assert!(!check_regular(&c));
        let d = dual_polytope_at(&c, 0).unwrap();
        assert_eq!(d.vertices, vec![z(&[0]), z(&[2])]);
    }

    #[test]
    fn genus_two_curve() {
        let p = alpha_111_torus();
        let c = corner_locus(&standard_theta(&p, 1, vec![qf(1, 7), qf(2, 9)]).unwrap()).unwrap();
        assert_eq!(c.cells_of_dim(0).count(), 2);
        assert_eq!(c.cells_of_dim(1).count(), 3);
        assert!(check_balancing(&c).unwrap());
        assert!(check_regular(&c));
        assert_eq!(c.pure_dim(), Some(1));
        assert!(to_svg(&c).unwrap().contains("<line"));
    }

    #[test]
    fn level_two_with_delta() {
        let p = alpha_111_torus();
        let cosets = Arc::new(coset_system(&p, 2).unwrap());
        let delta = DeltaFunction::new(cosets, vec![q(0), qf(1, 50), qf(1, 30), qf(1, 70)]).unwrap();
        let c = corner_locus(&make_theta(&p, 2, delta, vec![q(0), q(0)]).unwrap()).unwrap();
        assert!(check_balancing(&c).unwrap());
        for cell in &c.cells {
            assert_eq!(affine_rank_int(&cell.active) + cell.dim, 2);
        }
    }
}
