//! Hermite and Smith normal forms over ℤ with unimodular transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{QMatrix, ZMatrix};
use super::rational::Rational;

/// `(g, s, t)` with `s·a + t·b = g = gcd(a, b) >= 0`.
fn egcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Replaces columns (a, b) of `m` by `(s·a + t·b, u·a + v·b)`.
fn col_combine(m: &mut ZMatrix, a: usize, b: usize, s: &BigInt, t: &BigInt, u: &BigInt, v: &BigInt) {
    for i in 0..m.rows() {
        let x = m[(i, a)].clone();
        let y = m[(i, b)].clone();
        m[(i, a)] = s * &x + t * &y;
        m[(i, b)] = u * &x + v * &y;
    }
}

fn row_combine(m: &mut ZMatrix, a: usize, b: usize, s: &BigInt, t: &BigInt, u: &BigInt, v: &BigInt) {
    for j in 0..m.cols() {
        let x = m[(a, j)].clone();
        let y = m[(b, j)].clone();
        m[(a, j)] = s * &x + t * &y;
        m[(b, j)] = u * &x + v * &y;
    }
}

/// Column Hermite normal form: returns `(H, U)` with `H = M·U`, `U`
/// unimodular, `H` lower echelon with positive pivots and the entries left
/// of each pivot reduced into `[0, pivot)`.
pub fn hermite_normal_form(m: &ZMatrix) -> (ZMatrix, ZMatrix) {
    let mut h = m.clone();
    let n = h.cols();
    let mut u = ZMatrix::identity(n);
    let one = BigInt::one();
    let zero = BigInt::zero();
    let mut c = 0;
    for i in 0..h.rows() {
        if c == n {
            break;
        }
        for j in c + 1..n {
            if h[(i, j)].is_zero() {
                continue;
            }
            let x = h[(i, c)].clone();
            let y = h[(i, j)].clone();
            let (g, s, t) = egcd(&x, &y);
            let p = -(&y / &g);
            let q = &x / &g;
            col_combine(&mut h, c, j, &s, &t, &p, &q);
            col_combine(&mut u, c, j, &s, &t, &p, &q);
        }
        if h[(i, c)].is_zero() {
            continue;
        }
        if h[(i, c)].is_negative() {
            let m1 = -one.clone();
            col_combine(&mut h, c, c, &m1, &zero, &m1, &zero);
            col_combine(&mut u, c, c, &m1, &zero, &m1, &zero);
        }
        let piv = h[(i, c)].clone();
        for j in 0..c {
            let f = h[(i, j)].div_floor(&piv);
            if f.is_zero() {
                continue;
            }
            let nf = -f;
            // column j -= f · column c
            col_combine(&mut h, j, c, &one, &nf, &zero, &one);
            col_combine(&mut u, j, c, &one, &nf, &zero, &one);
        }
        c += 1;
    }
    (h, u)
}

/// Smith normal form: `(S, U, V)` with `S = U·M·V` diagonal, nonnegative,
/// and `S[i][i] | S[i+1][i+1]`.
pub fn smith_normal_form(m: &ZMatrix) -> (ZMatrix, ZMatrix, ZMatrix) {
    let mut s = m.clone();
    let (r, c) = (s.rows(), s.cols());
    let mut u = ZMatrix::identity(r);
    let mut v = ZMatrix::identity(c);
    let one = BigInt::one();
    let zero = BigInt::zero();
    for t in 0..r.min(c) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    if s[(i, j)].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| s[(i, j)].abs() < s[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish_smith(s, u, v);
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let mut dirty = false;
            for i in t + 1..r {
                if s[(i, t)].is_zero() {
                    continue;
                }
                if (&s[(i, t)] % &s[(t, t)]).is_zero() {
                    let f = -(&s[(i, t)] / &s[(t, t)]);
                    row_combine(&mut s, i, t, &one, &f, &zero, &one);
                    row_combine(&mut u, i, t, &one, &f, &zero, &one);
                    continue;
                }
                let (g, a, b) = egcd(&s[(t, t)], &s[(i, t)]);
                let p = -(&s[(i, t)] / &g);
                let q = &s[(t, t)] / &g;
                row_combine(&mut s, t, i, &a, &b, &p, &q);
                row_combine(&mut u, t, i, &a, &b, &p, &q);
                dirty = true;
            }
            for j in t + 1..c {
                if s[(t, j)].is_zero() {
                    continue;
                }
                if (&s[(t, j)] % &s[(t, t)]).is_zero() {
                    let f = -(&s[(t, j)] / &s[(t, t)]);
                    col_combine(&mut s, j, t, &one, &f, &zero, &one);
                    col_combine(&mut v, j, t, &one, &f, &zero, &one);
                    continue;
                }
                let (g, a, b) = egcd(&s[(t, t)], &s[(t, j)]);
                let p = -(&s[(t, j)] / &g);
                let q = &s[(t, t)] / &g;
                col_combine(&mut s, t, j, &a, &b, &p, &q);
                col_combine(&mut v, t, j, &a, &b, &p, &q);
                dirty = true;
            }
            if dirty && ((t + 1..r).any(|i| !s[(i, t)].is_zero()) || (t + 1..c).any(|j| !s[(t, j)].is_zero())) {
                continue;
            }
            // divisibility: fold an offending row into row t and retry
            let piv = s[(t, t)].clone();
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !(&s[(i, j)] % &piv).is_zero()));
            match bad {
                Some(i) => {
                    row_combine(&mut s, t, i, &one, &one, &zero, &one);
                    row_combine(&mut u, t, i, &one, &one, &zero, &one);
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            let m1 = -one.clone();
            row_combine(&mut s, t, t, &m1, &zero, &m1, &zero);
            row_combine(&mut u, t, t, &m1, &zero, &m1, &zero);
        }
    }
    finish_smith(s, u, v)
}

fn finish_smith(mut s: ZMatrix, mut u: ZMatrix, v: ZMatrix) -> (ZMatrix, ZMatrix, ZMatrix) {
    let zero = BigInt::zero();
    let m1 = -BigInt::one();
    for t in 0..s.rows().min(s.cols()) {
        if s[(t, t)].is_negative() {
            row_combine(&mut s, t, t, &m1, &zero, &m1, &zero);
            row_combine(&mut u, t, t, &m1, &zero, &m1, &zero);
        }
    }
    (s, u, v)
}

/// Diagonal of a Smith form.
pub fn invariant_factors(m: &ZMatrix) -> Vec<BigInt> {
    let (s, _, _) = smith_normal_form(m);
    (0..s.rows().min(s.cols())).map(|i| s[(i, i)].clone()).collect()
}

/// Order of `ℤ^rows / M·ℤ^cols` for a square nonsingular `M`; `None` if infinite.
pub fn cokernel_order(m: &ZMatrix) -> Option<BigInt> {
    if m.rows() != m.cols() {
        return None;
    }
    let d = invariant_factors(m);
    if d.iter().any(Zero::is_zero) {
        return None;
    }
    Some(d.iter().fold(BigInt::one(), |acc, x| acc * x))
}

pub fn is_unimodular(m: &ZMatrix) -> bool {
    m.is_square() && m.det().abs().is_one()
}

/// Basis (as columns) of `{z ∈ ℤⁿ : M z = 0}`.
pub fn integer_kernel(m: &ZMatrix) -> Vec<Vec<BigInt>> {
    let (h, u) = hermite_normal_form(m);
    (0..h.cols()).filter(|&j| h.col(j).iter().all(Zero::is_zero)).map(|j| u.col(j)).collect()
}

/// Clears denominators of a rational vector (primitive integer multiple).
pub fn primitive_integer(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// `ℤⁿ ∩ span(vectors)`; basis returned as integer vectors.
pub fn saturate(vectors: &[Vec<Rational>], n: usize) -> Vec<Vec<BigInt>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let a = QMatrix::from_rows(vectors.to_vec()).expect("ragged vectors");
    let perp = a.nullspace();
    if perp.is_empty() {
        return (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
    }
    let k = ZMatrix::from_rows(perp.iter().map(|r| primitive_integer(r)).collect()).expect("ragged");
    integer_kernel(&k)
}

/// Index `[ℤⁿ ∩ span : lattice generated by vectors]`.
pub fn lattice_index_in_saturation(vectors: &[Vec<BigInt>]) -> BigInt {
    if vectors.is_empty() {
        return BigInt::one();
    }
    let m = ZMatrix::from_rows(vectors.to_vec()).expect("ragged");
    invariant_factors(&m).into_iter().filter(|d| !d.is_zero()).fold(BigInt::one(), |a, d| a * d)
}
