//! Full-rank lattices in ℚⁿ given by column bases.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{QMatrix, ZMatrix};
use super::normal_form::hermite_normal_form;
use super::rational::{from_int, Rational};
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct IntLattice {
    basis: QMatrix,
    inverse: QMatrix,
}

impl IntLattice {
    /// Columns of `basis` generate the lattice.
    pub fn new(basis: QMatrix) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::DimensionMismatch { expected: basis.rows(), got: basis.cols() });
        }
        let inverse = basis.inverse()?;
        Ok(IntLattice { basis, inverse })
    }

    pub fn from_cols(cols: &[Vec<Rational>]) -> Result<Self> {
        Self::new(QMatrix::from_cols(cols)?)
    }

    pub fn standard(n: usize) -> Self {
        Self::new(QMatrix::identity(n)).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &QMatrix {
        &self.basis
    }

    pub fn basis_inverse(&self) -> &QMatrix {
        &self.inverse
    }

    pub fn generator(&self, i: usize) -> Vec<Rational> {
        self.basis.col(i)
    }

    /// Coordinates of `v` in the basis.
    pub fn coords(&self, v: &[Rational]) -> Vec<Rational> {
        self.inverse.mul_vec(v)
    }

    pub fn point(&self, coords: &[Rational]) -> Vec<Rational> {
        self.basis.mul_vec(coords)
    }

    pub fn point_int(&self, coords: &[BigInt]) -> Vec<Rational> {
        let c: Vec<Rational> = coords.iter().map(from_int).collect();
        self.basis.mul_vec(&c)
    }

    /// Exact membership; returns the integer coordinates when `v` is a lattice vector.
    pub fn int_coords(&self, v: &[Rational]) -> Option<Vec<BigInt>> {
        let c = self.coords(v);
        c.iter().all(Rational::is_integer).then(|| c.iter().map(Rational::to_integer).collect())
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.int_coords(v).is_some()
    }

    pub fn covolume(&self) -> Rational {
        use num_traits::Signed;
        self.basis.det().abs()
    }

    /// Canonical basis: column HNF of the integer-scaled basis, scaled back.
    pub fn canonical_basis(&self) -> QMatrix {
        let l = self.basis.to_rows().iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let lq = from_int(&l);
        let z = self.basis.scale(&lq).to_z().expect("scaled basis is integral");
        let (h, _) = hermite_normal_form(&z);
        h.to_q().scale(&lq.recip())
    }

    pub fn same_as(&self, other: &IntLattice) -> bool {
        self.dim() == other.dim() && self.canonical_basis() == other.canonical_basis()
    }

    /// `{α : α(v) ∈ ℤ for all v in the lattice}`, in dual coordinates: basis `B⁻ᵀ`.
    pub fn dual(&self) -> IntLattice {
        let b = self.inverse.transpose();
        let inverse = self.basis.transpose();
        IntLattice { basis: b, inverse }
    }

    /// Integer matrix of a linear map `A` (ambient coordinates) from `self` into `target`,
    /// i.e. `target⁻¹ · A · self`; `None` if the map does not send lattice into lattice.
    pub fn map_matrix(&self, a: &QMatrix, target: &IntLattice) -> Option<ZMatrix> {
        (&(target.basis_inverse() * a) * &self.basis).to_z()
    }

    /// Upper bound on the squared covering radius of the lattice for the
    /// quadratic form `form` (ambient coordinates): `¼ Σ |b_i*|²` from the
    /// Gram–Schmidt norms of the basis.
    pub fn covering_radius_sq_bound(&self, form: &QMatrix) -> Rational {
        let gram = &(&self.basis.transpose() * form) * &self.basis;
        let minors = gram.leading_minors();
        let mut prev = Rational::one();
        let mut sum = Rational::zero();
        for d in minors {
            sum += &d / &prev;
            prev = d;
        }
        sum / Rational::from_integer(4.into())
    }
}

impl PartialEq for IntLattice {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for IntLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntLattice({:?})", self.basis)
    }
}

/// Exact Sylvester test. Errors with `NotSymmetric` on asymmetric input.
pub fn positive_definite(g: &QMatrix) -> Result<bool> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(g.leading_minors().iter().all(Signed::is_positive))
}

/// First leading minor that is not positive, as `(index, value)`.
pub fn failing_minor(g: &QMatrix) -> Option<(usize, Rational)> {
    g.leading_minors().into_iter().enumerate().find(|(_, m)| !m.is_positive()).map(|(i, m)| (i + 1, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{q, qf};

    #[test]
    fn dual_of_identity() {
        let l = IntLattice::standard(2);
        assert_eq!(l.dual(), l);
    }

    #[test]
    fn dual_pairings_are_integral() {
        let l = IntLattice::new(QMatrix::from_i64(&[&[2, 1], &[1, 2]])).unwrap();
        let d = l.dual();
        assert_eq!(d.covolume(), qf(1, 3));
        for i in 0..2 {
            for j in 0..2 {
                let p = crate::exact::rational::dot(&d.generator(i), &l.generator(j));
                assert!(p.is_integer());
                assert_eq!(p, if i == j { q(1) } else { q(0) });
            }
        }
        assert_eq!(d.dual(), l);
    }

    #[test]
    fn rank_deficient_rejected() {
        let r = IntLattice::from_cols(&[vec![q(1), q(0)], vec![q(2), q(0)]]);
        assert!(matches!(r, Err(Error::RankDeficient)));
    }

    #[test]
    fn presentations_compare_via_hnf() {
        let a = IntLattice::new(QMatrix::from_i64(&[&[2, 1], &[1, 2]])).unwrap();
        let b = IntLattice::new(QMatrix::from_i64(&[&[3, 1], &[3, 2]])).unwrap();
        assert_eq!(a, b);
        let c = IntLattice::new(QMatrix::from_i64(&[&[2, 0], &[0, 1]])).unwrap();
        assert_ne!(a, c);
        assert!(a.contains(&[q(3), q(3)]));
        assert!(!a.contains(&[q(1), q(0)]));
    }

    #[test]
    fn sylvester() {
        assert!(positive_definite(&QMatrix::from_i64(&[&[2, 1], &[1, 2]])).unwrap());
        assert!(!positive_definite(&QMatrix::from_i64(&[&[1, 2], &[2, 1]])).unwrap());
        assert!(!positive_definite(&QMatrix::from_i64(&[&[0]])).unwrap());
        assert!(matches!(positive_definite(&QMatrix::from_i64(&[&[1, 2], &[0, 1]])), Err(Error::NotSymmetric)));
    }

    #[test]
    fn covering_bound_unit_square() {
        let l = IntLattice::standard(2);
        assert_eq!(l.covering_radius_sq_bound(&QMatrix::identity(2)), qf(1, 2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_sym() -> impl Strategy<Value = QMatrix> {
            proptest::collection::vec(-4i64..5, 3).prop_map(|v| QMatrix::from_i64(&[&[v[0], v[1]], &[v[1], v[2]]]))
        }

        fn nonsingular() -> impl Strategy<Value = QMatrix> {
            proptest::collection::vec(-5i64..6, 4)
                .prop_map(|v| QMatrix::from_i64(&[&[v[0], v[1]], &[v[2], v[3]]]))
                .prop_filter("singular", |m| !m.det().is_zero())
        }

        proptest! {
            #[test]
            fn sylvester_agrees_with_probes(g in small_sym()) {
                let pd = positive_definite(&g).unwrap();
                let mut probes_ok = true;
                for a in -3i64..=3 {
                    for b in -3i64..=3 {
                        if a == 0 && b == 0 { continue; }
                        let v = vec![q(a), q(b)];
                        if !g.bilinear(&v, &v).is_positive() { probes_ok = false; }
                    }
                }
                // probes are a necessary condition only
                if pd { prop_assert!(probes_ok); }
                // for 2×2 integer forms the probe set is also sufficient
                prop_assert_eq!(pd, probes_ok);
            }

            #[test]
            fn dual_is_involution(b in nonsingular()) {
                let l = IntLattice::new(b).unwrap();
                prop_assert_eq!(l.dual().dual(), l);
            }
        }
    }
}
