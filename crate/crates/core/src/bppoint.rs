//! Scaling limiter for point values: blends the high-order point update with
//! a first-order LLF update of the point values.

use crate::meshstate::State;
use crate::systems::euler_pressure;

/// `theta u_H + (1 - theta) u_L` with the largest `theta` keeping the result
/// in `[min, max]`. `u_L` is assumed to lie in the bounds.
#[inline]
pub fn scale_scalar(uh: f64, ul: f64, min: f64, max: f64) -> (f64, f64) {
    let mut theta: f64 = 1.0;
    if uh > max {
        theta = theta.min(((max - ul) / (uh - ul)).abs());
    }
    if uh < min {
        theta = theta.min(((ul - min) / (ul - uh)).abs());
    }
    if theta >= 1.0 {
        return (uh, 1.0);
    }
    (theta * uh + (1.0 - theta) * ul, theta)
}

/// Two-step positivity scaling: the density of `uh` is pulled towards
/// `ul` until it reaches `eps_rho`, then the whole state is blended with
/// `ul` until the pressure reaches `eps_p`. Returns the state and the
/// product of both factors.
pub fn scale_euler<const M: usize>(
    uh: &State<M>,
    ul: &State<M>,
    eps_rho: f64,
    eps_p: f64,
    gamma: f64,
) -> (State<M>, f64) {
    let mut star = *uh;
    let mut t1 = 1.0;
    if !(uh[0] >= eps_rho) {
        t1 = ((ul[0] - eps_rho) / (ul[0] - uh[0])).clamp(0.0, 1.0);
        if !t1.is_finite() {
            t1 = 0.0;
        }
        star[0] = t1 * uh[0] + (1.0 - t1) * ul[0];
    }
    let ps = euler_pressure(&star, gamma);
    if ps >= eps_p {
        return (star, t1);
    }
    let pl = euler_pressure(ul, gamma);
    let mut t2 = ((pl - eps_p) / (pl - ps)).clamp(0.0, 1.0);
    if !t2.is_finite() {
        t2 = 0.0;
    }
    (star * t2 + *ul * (1.0 - t2), t1 * t2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{ConservationLaw, Euler2d};
    use proptest::prelude::*;

    #[test]
    fn scalar_scaling_hits_the_violated_bound() {
        let (v, th) = scale_scalar(1.5, 0.5, 0.0, 1.0);
        assert!((th - 0.5).abs() < 1e-15);
        assert!((v - 1.0).abs() < 1e-15);
        let (v, th) = scale_scalar(-1.0, 0.5, 0.0, 1.0);
        assert!((th - 1.0 / 3.0).abs() < 1e-15);
        assert!(v.abs() < 1e-15);
        assert_eq!(scale_scalar(0.7, 0.5, 0.0, 1.0), (0.7, 1.0));
    }

    #[test]
    fn euler_scaling_leaves_admissible_states() {
        let e = Euler2d::new(1.4).unwrap();
        let uh = e.conserved(1.0, [0.5, 0.0], 1.0);
        let ul = e.conserved(0.8, [0.0, 0.2], 0.5);
        let (v, th) = scale_euler(&uh, &ul, 1e-13, 1e-13, 1.4);
        assert_eq!(v, uh);
        assert_eq!(th, 1.0);
    }

    proptest! {
        #[test]
        fn euler_scaling_restores_floors(
            rh in -1.0..2.0f64, mh in proptest::array::uniform2(-3.0..3.0f64), eh in -1.0..5.0f64,
            rl in 0.01..2.0f64, ul in -1.0..1.0f64, vl in -1.0..1.0f64, pl in 0.01..2.0f64,
        ) {
            let e = Euler2d::new(1.4).unwrap();
            let uh = State([rh, mh[0], mh[1], eh]);
            let low = e.conserved(rl, [ul, vl], pl);
            let (er, ep) = (1e-13f64.min(rl), 1e-13f64.min(pl));
            let (v, th) = scale_euler(&uh, &low, er, ep, 1.4);
            prop_assert!((0.0..=1.0).contains(&th));
            prop_assert!(v[0] >= er * (1.0 - 1e-9));
            prop_assert!(e.pressure(&v) >= ep - 1e-12 * (v[3].abs() + 1.0));
            prop_assert!(e.is_admissible(&v) || e.pressure(&v) > -1e-12);
        }
    }
}
