//! Parabolic reconstruction inside a cell and the biased finite-difference
//! derivatives built from it.
//!
//! In 1D the reconstruction of cell `i` interpolates the two interface
//! values and matches the cell average. In 2D it is the biparabolic
//! interpolant of the eight boundary point values and the average.

use crate::meshstate::State;

/// Value of the 1D reconstruction at the cell center.
#[inline]
pub fn cell_center_1d<const M: usize>(ul: &State<M>, avg: &State<M>, ur: &State<M>) -> State<M> {
    (*avg * 6.0 - *ul - *ur) * 0.25
}

/// Value of the 2D reconstruction at the cell center, from the average, the
/// four face midpoints and the four corners.
#[inline]
pub fn cell_center_2d<const M: usize>(
    avg: &State<M>,
    faces: [&State<M>; 4],
    corners: [&State<M>; 4],
) -> State<M> {
    let mut fsum = *faces[0];
    fsum += *faces[1];
    fsum += *faces[2];
    fsum += *faces[3];
    let mut csum = *corners[0];
    csum += *corners[1];
    csum += *corners[2];
    csum += *corners[3];
    (*avg * 36.0 - fsum * 4.0 - csum) * (1.0 / 16.0)
}

/// Derivative at the right end of a cell from values at its left end,
/// center and right end (upwind for right-going waves).
#[inline]
pub fn upwind_from_left<const M: usize>(
    left: &State<M>,
    center: &State<M>,
    right: &State<M>,
    dx: f64,
) -> State<M> {
    (*left - *center * 4.0 + *right * 3.0) * (1.0 / dx)
}

/// Derivative at the left end of a cell from values at its left end,
/// center and right end (upwind for left-going waves).
#[inline]
pub fn upwind_from_right<const M: usize>(
    left: &State<M>,
    center: &State<M>,
    right: &State<M>,
    dx: f64,
) -> State<M> {
    (*center * 4.0 - *left * 3.0 - *right) * (1.0 / dx)
}

/// One-sided derivatives `(D+ U, D- U)` at interface `i+1/2` written in
/// terms of the averages of the two adjacent cells.
#[inline]
pub fn js_derivatives_1d<const M: usize>(
    u_ll: &State<M>,
    avg_l: &State<M>,
    u: &State<M>,
    avg_r: &State<M>,
    u_rr: &State<M>,
    dx_l: f64,
    dx_r: f64,
) -> (State<M>, State<M>) {
    let dp = (*u_ll * 2.0 - *avg_l * 6.0 + *u * 4.0) * (1.0 / dx_l);
    let dm = (*avg_r * 6.0 - *u * 4.0 - *u_rr * 2.0) * (1.0 / dx_r);
    (dp, dm)
}

/// Evaluates the 1D reconstruction of a cell at local coordinate
/// `xi in [-1/2, 1/2]`.
#[cfg(test)]
pub(crate) fn parabola_1d(ul: f64, avg: f64, ur: f64, xi: f64) -> f64 {
    let c = 0.25 * (6.0 * avg - ul - ur);
    let b = ur - ul;
    let a = 2.0 * (ul + ur) - 4.0 * c;
    c + b * xi + a * xi * xi
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: f64) -> State<1> {
        State([v])
    }

    #[test]
    fn parabola_interpolates_its_data() {
        let (ul, avg, ur) = (1.0, 2.5, -0.5);
        assert!((parabola_1d(ul, avg, ur, -0.5) - ul).abs() < 1e-15);
        assert!((parabola_1d(ul, avg, ur, 0.5) - ur).abs() < 1e-15);
        // Simpson is exact for the quadratic
        let mean = (parabola_1d(ul, avg, ur, -0.5)
            + 4.0 * parabola_1d(ul, avg, ur, 0.0)
            + parabola_1d(ul, avg, ur, 0.5))
            / 6.0;
        assert!((mean - avg).abs() < 1e-15);
        assert_eq!(
            parabola_1d(ul, avg, ur, 0.0),
            cell_center_1d(&s(ul), &s(avg), &s(ur))[0]
        );
    }

    #[test]
    fn biquadratic_center_value() {
        // q = x^2 y^2 on the unit square
        let c = cell_center_2d(
            &s(1.0 / 9.0),
            [&s(0.0), &s(0.25), &s(0.0), &s(0.25)],
            [&s(0.0), &s(0.0), &s(0.0), &s(1.0)],
        );
        assert!((c[0] - 1.0 / 16.0).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn one_sided_derivatives_exact_for_quadratics(
            a in -10.0..10.0f64, b in -10.0..10.0f64, c in -10.0..10.0f64,
            x0 in -5.0..5.0f64, h in 0.01..2.0f64,
        ) {
            let q = |x: f64| a * x * x + b * x + c;
            let dq = |x: f64| 2.0 * a * x + b;
            let mean = |l: f64, r: f64| {
                let p = |x: f64| a * x * x * x / 3.0 + b * x * x / 2.0 + c * x;
                (p(r) - p(l)) / (r - l)
            };
            let (xl, x1, x2) = (x0 - h, x0, x0 + h);
            let scale = a.abs() * (x0.abs() + h) + b.abs() + 1.0;
            let (dp, dm) = js_derivatives_1d(
                &s(q(xl)), &s(mean(xl, x1)), &s(q(x1)), &s(mean(x1, x2)), &s(q(x2)), h, h,
            );
            prop_assert!((dp[0] - dq(x1)).abs() < 1e-11 * scale / h.min(1.0));
            prop_assert!((dm[0] - dq(x1)).abs() < 1e-11 * scale / h.min(1.0));
            let up = upwind_from_left(&s(q(xl)), &s(q(x0 - 0.5 * h)), &s(q(x1)), h);
            let un = upwind_from_right(&s(q(x1)), &s(q(x0 + 0.5 * h)), &s(q(x2)), h);
            prop_assert!((up[0] - dq(x1)).abs() < 1e-11 * scale / h.min(1.0));
            prop_assert!((un[0] - dq(x1)).abs() < 1e-11 * scale / h.min(1.0));
        }
    }
}
