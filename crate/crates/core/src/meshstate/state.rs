//! Fixed-size conserved-variable vectors and small dense matrices.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Vector of `M` conserved quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State<const M: usize>(pub [f64; M]);

/// Dense `M x M` matrix stored row-major.
pub type Mat<const M: usize> = [[f64; M]; M];

impl<const M: usize> Default for State<M> {
    fn default() -> Self {
        State([0.0; M])
    }
}

impl<const M: usize> State<M> {
    pub const fn zero() -> Self {
        State([0.0; M])
    }

    pub const fn splat(v: f64) -> Self {
        State([v; M])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Maximum absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        for v in out.0.iter_mut() {
            *v = f(*v);
        }
        out
    }

    pub fn dot(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for k in 0..M {
            s += self.0[k] * other.0[k];
        }
        s
    }
}

impl<const M: usize> From<[f64; M]> for State<M> {
    fn from(v: [f64; M]) -> Self {
        State(v)
    }
}

impl<const M: usize> Index<usize> for State<M> {
    type Output = f64;
    #[inline]
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl<const M: usize> IndexMut<usize> for State<M> {
    #[inline]
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.0[k]
    }
}

impl<const M: usize> Add for State<M> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..M {
            self.0[k] += rhs.0[k];
        }
        self
    }
}

impl<const M: usize> Sub for State<M> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..M {
            self.0[k] -= rhs.0[k];
        }
        self
    }
}

impl<const M: usize> Neg for State<M> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        for k in 0..M {
            self.0[k] = -self.0[k];
        }
        self
    }
}

impl<const M: usize> Mul<f64> for State<M> {
    type Output = Self;
    #[inline]
    fn mul(mut self, s: f64) -> Self {
        for k in 0..M {
            self.0[k] *= s;
        }
        self
    }
}

impl<const M: usize> Mul<State<M>> for f64 {
    type Output = State<M>;
    #[inline]
    fn mul(self, v: State<M>) -> State<M> {
        v * self
    }
}

impl<const M: usize> AddAssign for State<M> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..M {
            self.0[k] += rhs.0[k];
        }
    }
}

impl<const M: usize> SubAssign for State<M> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        for k in 0..M {
            self.0[k] -= rhs.0[k];
        }
    }
}

#[inline]
pub fn mat_vec<const M: usize>(a: &Mat<M>, x: &State<M>) -> State<M> {
    let mut out = [0.0; M];
    for r in 0..M {
        let mut s = 0.0;
        for c in 0..M {
            s += a[r][c] * x.0[c];
        }
        out[r] = s;
    }
    State(out)
}

pub fn mat_mul<const M: usize>(a: &Mat<M>, b: &Mat<M>) -> Mat<M> {
    let mut out = [[0.0; M]; M];
    for r in 0..M {
        for c in 0..M {
            let mut s = 0.0;
            for k in 0..M {
                s += a[r][k] * b[k][c];
            }
            out[r][c] = s;
        }
    }
    out
}

pub fn identity<const M: usize>() -> Mat<M> {
    let mut out = [[0.0; M]; M];
    for (k, row) in out.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    out
}

/// Max-norm of `a - b` over all entries.
pub fn mat_dist<const M: usize>(a: &Mat<M>, b: &Mat<M>) -> f64 {
    let mut d: f64 = 0.0;
    for r in 0..M {
        for c in 0..M {
            d = d.max((a[r][c] - b[r][c]).abs());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_componentwise() {
        let a = State([1.0, 2.0, 3.0]);
        let b = State([0.5, -1.0, 4.0]);
        assert_eq!(a + b, State([1.5, 1.0, 7.0]));
        assert_eq!(a - b, State([0.5, 3.0, -1.0]));
        assert_eq!(2.0 * a, State([2.0, 4.0, 6.0]));
        assert_eq!(-a, State([-1.0, -2.0, -3.0]));
        assert_eq!(a.dot(&b), 0.5 - 2.0 + 12.0);
        assert_eq!((a - b).max_abs(), 3.0);
    }

    #[test]
    fn matrix_identity_roundtrip() {
        let a: Mat<2> = [[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(mat_mul(&a, &identity()), a);
        assert_eq!(mat_vec(&a, &State([1.0, 1.0])), State([3.0, 7.0]));
    }
}
