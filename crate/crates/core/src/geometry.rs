//! Small exact polyhedra: vertex/halfspace conversion by brute force and
//! incremental clipping of a box by halfspaces.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::exact::rational::{self as rat, dot, Rational};
use crate::exact::QMatrix;

pub(crate) fn matrix_of_rows(rows: &[Vec<Rational>], n: usize) -> QMatrix {
    let mut m = QMatrix::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = x.clone();
        }
    }
    m
}

/// Kernel of the rows; the whole space when there are none.
pub(crate) fn kernel(rows: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    if rows.is_empty() {
        return (0..n).map(|i| unit(n, i)).collect();
    }
    matrix_of_rows(rows, n).nullspace()
}

pub(crate) fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = rat::zeros(n);
    v[i] = rat::q(1);
    v
}

pub(crate) fn rank(rows: &[Vec<Rational>], n: usize) -> usize {
    if rows.is_empty() {
        0
    } else {
        matrix_of_rows(rows, n).rank()
    }
}

/// Scales a nonzero vector so its first nonzero entry has absolute value 1.
fn normalize_direction(v: &[Rational]) -> Vec<Rational> {
    let lead = v.iter().find(|x| !x.is_zero()).expect("nonzero direction").abs();
    v.iter().map(|x| x / &lead).collect()
}

/// `a·x = b` and `a·x ≤ b` constraints.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HRep {
    pub eqs: Vec<(Vec<Rational>, Rational)>,
    pub ineqs: Vec<(Vec<Rational>, Rational)>,
}

impl HRep {
    pub fn contains(&self, x: &[Rational]) -> bool {
        self.eqs.iter().all(|(a, b)| dot(a, x) == *b) && self.ineqs.iter().all(|(a, b)| dot(a, x) <= *b)
    }

    /// Membership in the relative interior, assuming `ineqs` are facets.
    pub fn relint_contains(&self, x: &[Rational]) -> bool {
        self.eqs.iter().all(|(a, b)| dot(a, x) == *b) && self.ineqs.iter().all(|(a, b)| dot(a, x) < *b)
    }

    pub fn intersect(&self, other: &HRep) -> HRep {
        let mut out = self.clone();
        out.eqs.extend(other.eqs.iter().cloned());
        out.ineqs.extend(other.ineqs.iter().cloned());
        out
    }

    /// Constraints of the translate `P + s`.
    pub fn translate(&self, s: &[Rational]) -> HRep {
        let shift = |(a, b): &(Vec<Rational>, Rational)| (a.clone(), b + dot(a, s));
        HRep { eqs: self.eqs.iter().map(shift).collect(), ineqs: self.ineqs.iter().map(shift).collect() }
    }
}

/// Vertices and extreme rays (lineality directions appear as ± pairs).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct VRep {
    pub vertices: Vec<Vec<Rational>>,
    pub rays: Vec<Vec<Rational>>,
}

impl VRep {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directions spanning the affine hull.
    pub fn directions(&self) -> Vec<Vec<Rational>> {
        let mut d: Vec<Vec<Rational>> = match self.vertices.first() {
            Some(v0) => self.vertices[1..].iter().map(|v| rat::sub(v, v0)).collect(),
            None => Vec::new(),
        };
        d.extend(self.rays.iter().cloned());
        d
    }

    pub fn dim(&self, n: usize) -> usize {
        rank(&self.directions(), n)
    }

    /// A point of the relative interior.
    pub fn interior_point(&self) -> Vec<Rational> {
        let n = self.vertices[0].len();
        let mut c = rat::zeros(n);
        for v in &self.vertices {
            c = rat::add(&c, v);
        }
        c = rat::scale(&Rational::new(1.into(), self.vertices.len().into()), &c);
        for r in &self.rays {
            c = rat::add(&c, r);
        }
        c
    }
}

/// Vertices and rays of `{eqs, ineqs}` in `ℝⁿ`; empty `VRep` if infeasible.
pub fn vrep_from_hrep(h: &HRep, n: usize) -> VRep {
    // parametrize the affine subspace x = x0 + N·y
    let (x0, basis) = if h.eqs.is_empty() {
        (rat::zeros(n), kernel(&[], n))
    } else {
        let a: Vec<Vec<Rational>> = h.eqs.iter().map(|(a, _)| a.clone()).collect();
        let b: Vec<Rational> = h.eqs.iter().map(|(_, b)| b.clone()).collect();
        match matrix_of_rows(&a, n).solve_affine(&b) {
            Some(sol) => sol,
            None => return VRep::default(),
        }
    };
    let e = basis.len();
    let lift = |y: &[Rational]| -> Vec<Rational> {
        let mut x = x0.clone();
        for (c, col) in y.iter().zip(&basis) {
            x = rat::add(&x, &rat::scale(c, col));
        }
        x
    };
    let cons: Vec<(Vec<Rational>, Rational)> = h
        .ineqs
        .iter()
        .map(|(a, b)| (basis.iter().map(|col| dot(a, col)).collect(), b - dot(a, &x0)))
        .collect();
    if e == 0 {
        return if cons.iter().all(|(_, b)| !b.is_negative()) {
            VRep { vertices: vec![x0], rays: Vec::new() }
        } else {
            VRep::default()
        };
    }
    // split off the lineality space, then work in a complement
    let normals: Vec<Vec<Rational>> = cons.iter().map(|(a, _)| a.clone()).collect();
    let lin = kernel(&normals, e);
    let mut rays_y: Vec<Vec<Rational>> = Vec::new();
    let mut eq_y: Vec<Vec<Rational>> = Vec::new();
    for l in &lin {
        rays_y.push(l.clone());
        rays_y.push(rat::neg(l));
        eq_y.push(l.clone());
    }
    let free = e - lin.len();
    // vertices: free tight inequalities together with the complement equations
    let mut verts_y: Vec<Vec<Rational>> = Vec::new();
    for subset in combinations(cons.len(), free) {
        let mut rows = eq_y.clone();
        let mut rhs = vec![Rational::zero(); eq_y.len()];
        for &i in &subset {
            rows.push(cons[i].0.clone());
            rhs.push(cons[i].1.clone());
        }
        let m = matrix_of_rows(&rows, e);
        if m.rank() < e {
            continue;
        }
        let Some((y, _)) = m.solve_affine(&rhs) else { continue };
        if cons.iter().all(|(a, b)| dot(a, &y) <= *b) && !verts_y.contains(&y) {
            verts_y.push(y);
        }
    }
    if verts_y.is_empty() {
        return VRep::default();
    }
    if free > 0 {
        for subset in combinations(cons.len(), free - 1) {
            let mut rows = eq_y.clone();
            for &i in &subset {
                rows.push(cons[i].0.clone());
            }
            let ker = kernel(&rows, e);
            if ker.len() != 1 {
                continue;
            }
            for d in [ker[0].clone(), rat::neg(&ker[0])] {
                if cons.iter().all(|(a, _)| !dot(a, &d).is_positive()) {
                    let d = normalize_direction(&d);
                    if !rays_y.contains(&d) {
                        rays_y.push(d);
                    }
                }
            }
        }
    }
    let vertices = verts_y.iter().map(|y| lift(y)).collect();
    let rays = rays_y
        .iter()
        .map(|y| {
            let mut x = rat::zeros(n);
            for (c, col) in y.iter().zip(&basis) {
                x = rat::add(&x, &rat::scale(c, col));
            }
            x
        })
        .collect();
    VRep { vertices, rays }
}

/// Affine-hull equations and facet inequalities of `conv(vertices) + cone(rays)`.
pub fn hrep_from_vrep(v: &VRep, n: usize) -> HRep {
    let Some(v0) = v.vertices.first() else {
        // empty polyhedron: 0·x = 1
        return HRep { eqs: vec![(rat::zeros(n), rat::q(1))], ineqs: Vec::new() };
    };
    let dirs = crate::exact::matrix::span_basis(&v.directions(), n);
    let d = dirs.len();
    let eqs: Vec<(Vec<Rational>, Rational)> = kernel(&dirs, n)
        .into_iter()
        .filter(|_| d < n)
        .map(|a| {
            let b = dot(&a, v0);
            (a, b)
        })
        .collect();
    if d == 0 {
        return HRep { eqs, ineqs: Vec::new() };
    }
    // local coordinates y with x = v0 + Σ y_i dirs_i
    let dm = matrix_of_rows(&dirs, n);
    let gram_inv = (&dm * &dm.transpose()).inverse().expect("independent directions");
    let local = |x: &[Rational]| gram_inv.mul_vec(&dm.mul_vec(x));
    let pts: Vec<Vec<Rational>> = v.vertices.iter().map(|p| local(&rat::sub(p, v0))).collect();
    let rays: Vec<Vec<Rational>> = v.rays.iter().map(|r| local(r)).collect();
    let mut gens: Vec<(bool, &Vec<Rational>)> = pts.iter().map(|p| (true, p)).collect();
    gens.extend(rays.iter().map(|r| (false, r)));
    let mut facets: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for subset in combinations(gens.len(), d) {
        let Some(&ai) = subset.iter().find(|&&i| gens[i].0) else { continue };
        let anchor = gens[ai].1;
        let rows: Vec<Vec<Rational>> = subset
            .iter()
            .filter(|&&i| i != ai)
            .map(|&i| if gens[i].0 { rat::sub(gens[i].1, anchor) } else { gens[i].1.clone() })
            .collect();
        let ker = kernel(&rows, d);
        if ker.len() != 1 {
            continue;
        }
        let c = &ker[0];
        let beta = dot(c, anchor);
        let mut sign = 0i8;
        let mut ok = true;
        for (is_pt, g) in &gens {
            let s = if *is_pt { dot(c, g) - &beta } else { dot(c, g) };
            let sg = if s.is_positive() { 1 } else if s.is_negative() { -1 } else { 0 };
            if sg != 0 {
                if sign == 0 {
                    sign = sg;
                } else if sign != sg {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || sign == 0 {
            continue;
        }
        let (c, beta) = if sign > 0 { (rat::neg(c), -beta) } else { (c.clone(), beta) };
        // back to ambient coordinates: a = Dᵀ (D Dᵀ)⁻¹ c
        let a = dm.transpose().mul_vec(&gram_inv.mul_vec(&c));
        let b = beta + dot(&a, v0);
        let lead = a.iter().find(|x| !x.is_zero()).expect("nonzero facet normal").abs();
        let (a, b) = (rat::scale(&lead.recip(), &a), b / &lead);
        // normalize modulo the affine hull so duplicates compare equal
        let (a, b) = reduce_mod_eqs(a, b, &eqs, n);
        if !facets.iter().any(|(fa, fb)| *fa == a && *fb == b) {
            facets.push((a, b));
        }
    }
    HRep { eqs, ineqs: facets }
}

/// Projects a facet normal onto the direction space so equal facets get equal normals.
fn reduce_mod_eqs(a: Vec<Rational>, b: Rational, eqs: &[(Vec<Rational>, Rational)], n: usize) -> (Vec<Rational>, Rational) {
    if eqs.is_empty() {
        return (a, b);
    }
    let e: Vec<Vec<Rational>> = eqs.iter().map(|(a, _)| a.clone()).collect();
    let em = matrix_of_rows(&e, n);
    let gi = (&em * &em.transpose()).inverse().expect("independent equations");
    let coef = gi.mul_vec(&em.mul_vec(&a));
    let mut a2 = a;
    let mut b2 = b;
    for (c, (ea, eb)) in coef.iter().zip(eqs) {
        a2 = rat::sub(&a2, &rat::scale(c, ea));
        b2 -= c * eb;
    }
    let lead = a2.iter().find(|x| !x.is_zero()).expect("facet normal outside hull").abs();
    (rat::scale(&lead.recip(), &a2), b2 / lead)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// A vertex of a clipped box with the indices of the constraints it satisfies with equality.
#[derive(Clone, Debug)]
pub struct ClipVertex {
    pub point: Vec<Rational>,
    pub tight: BTreeSet<usize>,
}

/// Bounded polytope kept as its vertex list during incremental clipping.
/// Constraint indices `0..2n` are the box faces; clipping constraints use
/// whatever indices the caller passes.
#[derive(Clone, Debug)]
pub struct ClipPolytope {
    pub vertices: Vec<ClipVertex>,
}

impl ClipPolytope {
    /// `[lo, hi]ⁿ`; face `2i` is `x_i = lo`, face `2i+1` is `x_i = hi`.
    pub fn cube(n: usize, lo: &Rational, hi: &Rational) -> Self {
        let mut vertices = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let mut point = Vec::with_capacity(n);
            let mut tight = BTreeSet::new();
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    point.push(hi.clone());
                    tight.insert(2 * i + 1);
                } else {
                    point.push(lo.clone());
                    tight.insert(2 * i);
                }
            }
            vertices.push(ClipVertex { point, tight });
        }
        ClipPolytope { vertices }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Intersects with `a·x ≤ b`, recording `idx` on the vertices where it is tight.
    pub fn clip(&mut self, a: &[Rational], b: &Rational, idx: usize) {
        let slack: Vec<Rational> = self.vertices.iter().map(|v| dot(a, &v.point) - b).collect();
        if slack.iter().all(|s| !s.is_positive()) {
            for (v, s) in self.vertices.iter_mut().zip(&slack) {
                if s.is_zero() {
                    v.tight.insert(idx);
                }
            }
            return;
        }
        let mut out: Vec<ClipVertex> = Vec::new();
        for (v, s) in self.vertices.iter().zip(&slack) {
            if !s.is_positive() {
                let mut v = v.clone();
                if s.is_zero() {
                    v.tight.insert(idx);
                }
                out.push(v);
            }
        }
        for (i, si) in slack.iter().enumerate() {
            if !si.is_negative() {
                continue;
            }
            for (j, sj) in slack.iter().enumerate() {
                if !sj.is_positive() {
                    continue;
                }
                let common: BTreeSet<usize> =
                    self.vertices[i].tight.intersection(&self.vertices[j].tight).copied().collect();
                let adjacent = self
                    .vertices
                    .iter()
                    .enumerate()
                    .all(|(l, w)| l == i || l == j || !common.is_subset(&w.tight));
                if !adjacent {
                    continue;
                }
                // point where the slack vanishes on segment [v_i, v_j]
                let t = si / (si - sj);
                let p: Vec<Rational> = self.vertices[i]
                    .point
                    .iter()
                    .zip(&self.vertices[j].point)
                    .map(|(x, y)| x + &t * (y - x))
                    .collect();
                let mut tight = common;
                tight.insert(idx);
                out.push(ClipVertex { point: p, tight });
            }
        }
        self.vertices = out;
    }
}

/// For each affine function `fⱼ(x) = aⱼ·x + cⱼ`, the part of `[lo, hi]ⁿ` where it
/// attains the maximum. Constraint `2n + i` records a tie with function `i`.
pub fn envelope_regions(fns: &[(Vec<Rational>, Rational)], n: usize, lo: &Rational, hi: &Rational) -> Vec<ClipPolytope> {
    let cube = ClipPolytope::cube(n, lo, hi);
    (0..fns.len())
        .map(|j| {
            let (aj, cj) = &fns[j];
            let mut others: Vec<(Rational, usize)> = (0..fns.len())
                .filter(|&i| i != j)
                .map(|i| {
                    let d = rat::sub(&fns[i].0, aj);
                    (dot(&d, &d), i)
                })
                .collect();
            others.sort();
            let mut region = cube.clone();
            for (_, i) in others {
                // fᵢ ≤ fⱼ  ⇔  (aᵢ − aⱼ)·x ≤ cⱼ − cᵢ
                let a = rat::sub(&fns[i].0, aj);
                let b = cj - &fns[i].1;
                region.clip(&a, &b, 2 * n + i);
                if region.is_empty() {
                    break;
                }
            }
            region
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{q, qf, qvec};

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(4, 4).len(), 1);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn square_round_trip() {
        let h = HRep {
            eqs: vec![],
            ineqs: vec![
                (qvec(&[(1, 1), (0, 1)]), q(1)),
                (qvec(&[(-1, 1), (0, 1)]), q(0)),
                (qvec(&[(0, 1), (1, 1)]), q(1)),
                (qvec(&[(0, 1), (-1, 1)]), q(0)),
            ],
        };
        let v = vrep_from_hrep(&h, 2);
        assert_eq!(v.vertices.len(), 4);
        assert!(v.rays.is_empty());
        let back = hrep_from_vrep(&v, 2);
        assert_eq!(back.ineqs.len(), 4);
        assert!(back.relint_contains(&qvec(&[(1, 2), (1, 2)])));
        assert!(!back.relint_contains(&qvec(&[(0, 1), (1, 2)])));
    }

    #[test]
    fn cone_with_rays() {
        // x ≥ 0, y ≥ 0
        let h = HRep { eqs: vec![], ineqs: vec![(qvec(&[(-1, 1), (0, 1)]), q(0)), (qvec(&[(0, 1), (-1, 1)]), q(0))] };
        let v = vrep_from_hrep(&h, 2);
        assert_eq!(v.vertices, vec![vec![q(0), q(0)]]);
        assert_eq!(v.rays.len(), 2);
        let back = hrep_from_vrep(&v, 2);
        assert_eq!(back.ineqs.len(), 2);
    }

    #[test]
    fn lineality() {
        // a line x = 1 in the plane
        let h = HRep { eqs: vec![(qvec(&[(1, 1), (0, 1)]), q(1))], ineqs: vec![] };
        let v = vrep_from_hrep(&h, 2);
        assert_eq!(v.vertices.len(), 1);
        assert_eq!(v.rays.len(), 2);
        assert_eq!(v.dim(2), 1);
    }

    #[test]
    fn segment_hull() {
        let v = VRep { vertices: vec![qvec(&[(0, 1), (0, 1)]), qvec(&[(2, 1), (1, 1)])], rays: vec![] };
        let h = hrep_from_vrep(&v, 2);
        assert_eq!(h.eqs.len(), 1);
        assert_eq!(h.ineqs.len(), 2);
        assert!(h.relint_contains(&qvec(&[(1, 1), (1, 2)])));
        assert!(h.contains(&qvec(&[(2, 1), (1, 1)])));
        assert!(!h.relint_contains(&qvec(&[(2, 1), (1, 1)])));
    }

    #[test]
    fn clip_square_diagonal() {
        let mut p = ClipPolytope::cube(2, &q(0), &q(1));
        p.clip(&qvec(&[(1, 1), (1, 1)]), &q(1), 10);
        assert_eq!(p.vertices.len(), 3);
        p.clip(&qvec(&[(-1, 1), (0, 1)]), &qf(-1, 2), 11);
        let mut pts: Vec<_> = p.vertices.iter().map(|v| v.point.clone()).collect();
        pts.sort();
        assert_eq!(pts, vec![qvec(&[(1, 2), (0, 1)]), qvec(&[(1, 2), (1, 2)]), qvec(&[(1, 1), (0, 1)])]);
        p.clip(&qvec(&[(1, 1), (0, 1)]), &qf(1, 4), 12);
        assert!(p.is_empty());
    }
}
