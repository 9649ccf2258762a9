//! Convex limiting of the cell-average update: a first-order LLF flux, the
//! intermediate states it produces, flux limiting against maximum-principle
//! bounds or positivity floors, and the shock-sensor blending.

use crate::meshstate::State;
use crate::systems::{euler_pressure, Axis, ConservationLaw};

/// Lower floor used for density and pressure bounds.
pub const POSITIVITY_FLOOR: f64 = 1e-13;

/// First-order data at an interface.
#[derive(Clone, Copy, Debug, Default)]
pub struct LowOrder<const M: usize> {
    pub alpha: f64,
    pub flux: State<M>,
    /// `(U_L + U_R)/2 - (F(U_R) - F(U_L)) / (2 alpha)`.
    pub tilde: State<M>,
}

#[inline]
pub fn llf_flux<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    ul: &State<M>,
    ur: &State<M>,
    axis: Axis,
) -> State<M> {
    let alpha = sys.spectral_radius(ul, axis).max(sys.spectral_radius(ur, axis));
    (sys.flux(ul, axis) + sys.flux(ur, axis)) * 0.5 - (*ur - *ul) * (0.5 * alpha)
}

#[inline]
pub fn llf_low_order<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    ul: &State<M>,
    ur: &State<M>,
    axis: Axis,
) -> LowOrder<M> {
    let alpha = sys.spectral_radius(ul, axis).max(sys.spectral_radius(ur, axis));
    let (fl, fr) = (sys.flux(ul, axis), sys.flux(ur, axis));
    let flux = (fl + fr) * 0.5 - (*ur - *ul) * (0.5 * alpha);
    let mean = (*ul + *ur) * 0.5;
    let tilde = if alpha > 0.0 {
        mean - (fr - fl) * (0.5 / alpha)
    } else {
        mean
    };
    LowOrder { alpha, flux, tilde }
}

/// Limits a scalar anti-diffusive flux `df` so that both one-sided
/// intermediate states `tilde -+ df/alpha` stay within the bounds of the
/// left and right cells. Returns the limited flux difference.
#[inline]
pub fn limit_scalar(df: f64, alpha: f64, tilde: f64, left: (f64, f64), right: (f64, f64)) -> f64 {
    if df >= 0.0 {
        let room = (tilde - left.0).min(right.1 - tilde).max(0.0);
        df.min(alpha * room)
    } else {
        let room = (right.0 - tilde).max(tilde - left.1).min(0.0);
        df.max(alpha * room)
    }
}

/// Density clamp then pressure scaling of an Euler anti-diffusive flux.
/// Returns the limited difference and the pressure factor.
pub fn limit_euler<const M: usize>(
    df: &State<M>,
    alpha: f64,
    tilde: &State<M>,
    eps_rho: f64,
    eps_p: f64,
    gamma: f64,
) -> (State<M>, f64) {
    let mut d = *df;
    let cap = alpha * (tilde[0] - eps_rho).max(0.0);
    d[0] = if d[0] >= 0.0 { d[0].min(cap) } else { d[0].max(-cap) };

    let e = M - 1;
    let eps_t = eps_p / (gamma - 1.0);
    let (mut dm2, mut mt2, mut dmm) = (0.0, 0.0, 0.0);
    for c in 1..e {
        dm2 += d[c] * d[c];
        mt2 += tilde[c] * tilde[c];
        dmm += d[c] * tilde[c];
    }
    let a = 0.5 * dm2 - d[0] * d[e];
    let b = alpha * (d[0] * tilde[e] + tilde[0] * d[e] - dmm - eps_t * d[0]);
    let c = alpha * alpha * (tilde[0] * tilde[e] - 0.5 * mt2 - eps_t * tilde[0]);
    let den = a.max(0.0) + b.abs();
    let theta = if den > 0.0 { (c / den).clamp(0.0, 1.0) } else { 1.0 };
    (d * theta, theta)
}

/// Jameson pressure sensor of a cell from its two neighbours.
#[inline]
pub fn jameson(p_minus: f64, p: f64, p_plus: f64) -> f64 {
    let den = (p_plus + 2.0 * p + p_minus).abs();
    if den > 0.0 {
        (p_plus - 2.0 * p + p_minus).abs() / den
    } else {
        0.0
    }
}

/// Modified Ducros sensor from the discrete divergence and curl.
#[inline]
pub fn ducros_2d(div: f64, curl: f64) -> f64 {
    (-div / (div * div + curl * curl + 1e-40).sqrt()).max(0.0)
}

/// One-dimensional reduction of the Ducros sensor.
#[inline]
pub fn ducros_1d(v_minus: f64, v_plus: f64) -> f64 {
    let dv = v_plus - v_minus;
    (-dv / (dv.abs() + 1e-40)).max(0.0)
}

/// `exp(-kappa phi1 phi2)` with interface values taken as the larger of the
/// two adjacent cells.
#[inline]
pub fn sensor_blend(kappa: f64, phi1: (f64, f64), phi2: (f64, f64)) -> f64 {
    if kappa == 0.0 {
        return 1.0;
    }
    (-kappa * phi1.0.max(phi1.1) * phi2.0.max(phi2.1)).exp()
}

/// Pressure and density floors of an Euler state.
#[inline]
pub fn rho_p<const M: usize>(u: &State<M>, gamma: f64) -> (f64, f64) {
    (u[0], euler_pressure(u, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Burgers, Euler2d, LinearAdvection};
    use proptest::prelude::*;

    #[test]
    fn llf_flux_consistent_and_intermediate_is_mean_for_advection() {
        let adv = LinearAdvection { velocity: [1.0, 0.0] };
        let lo = llf_low_order(&adv, &State([2.0]), &State([2.0]), Axis::X);
        assert_eq!(lo.flux[0], 2.0);
        // upwind for a = 1: flux = u_L, tilde = u_L
        let lo = llf_low_order(&adv, &State([3.0]), &State([1.0]), Axis::X);
        assert_eq!(lo.flux[0], 3.0);
        assert_eq!(lo.tilde[0], 3.0);
    }

    #[test]
    fn scalar_limited_states_respect_bounds() {
        let (alpha, tilde) = (2.0, 0.5);
        let df = limit_scalar(10.0, alpha, tilde, (0.4, 0.9), (0.1, 0.7));
        assert!((df - 0.2).abs() < 1e-15);
        let df = limit_scalar(-10.0, alpha, tilde, (0.4, 0.9), (0.1, 0.7));
        assert!((df + 0.8).abs() < 1e-15);
        assert_eq!(limit_scalar(0.01, alpha, tilde, (0.4, 0.9), (0.1, 0.7)), 0.01);
    }

    #[test]
    fn zero_anti_diffusion_is_untouched() {
        let e = Euler2d::new(1.4).unwrap();
        let t = e.conserved(1.0, [0.1, 0.2], 1.0);
        let (d, th) = limit_euler(&State::zero(), 2.0, &t, 1e-13, 1e-13, 1.4);
        assert_eq!(d, State::zero());
        assert_eq!(th, 1.0);
        assert_eq!(limit_scalar(0.0, 1.0, 0.5, (0.0, 1.0), (0.0, 1.0)), 0.0);
    }

    #[test]
    fn sensors() {
        assert_eq!(sensor_blend(0.0, (1.0, 1.0), (1.0, 1.0)), 1.0);
        assert!((sensor_blend(2.0, (0.5, 0.1), (0.0, 1.0)) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(jameson(1.0, 1.0, 1.0), 0.0);
        assert!((jameson(1.0, 0.0, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(ducros_2d(1.0, 0.0), 0.0);
        assert!((ducros_2d(-1.0, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(ducros_2d(0.0, 0.0), 0.0);
        assert_eq!(ducros_1d(1.0, 0.0), 1.0);
        assert_eq!(ducros_1d(0.0, 1.0), 0.0);
    }

    fn admissible_state(e: &Euler2d, r: f64, u: f64, v: f64, p: f64) -> State<4> {
        e.conserved(r, [u, v], p)
    }

    proptest! {
        #[test]
        fn euler_limited_intermediate_states_stay_positive(
            r1 in 1e-3..10.0f64, u1 in -5.0..5.0f64, v1 in -5.0..5.0f64, p1 in 1e-3..10.0f64,
            r2 in 1e-3..10.0f64, u2 in -5.0..5.0f64, v2 in -5.0..5.0f64, p2 in 1e-3..10.0f64,
            df in proptest::array::uniform4(-50.0..50.0f64),
        ) {
            let e = Euler2d::new(1.4).unwrap();
            let (ul, ur) = (admissible_state(&e, r1, u1, v1, p1), admissible_state(&e, r2, u2, v2, p2));
            let lo = llf_low_order(&e, &ul, &ur, Axis::X);
            prop_assert!(e.is_admissible(&lo.tilde));
            let (rt, pt) = rho_p(&lo.tilde, 1.4);
            let (er, ep) = (0.5 * rt, 0.5 * pt);
            let (d, th) = limit_euler(&State(df), lo.alpha, &lo.tilde, er, ep, 1.4);
            prop_assert!((0.0..=1.0).contains(&th));
            for s in [1.0, -1.0] {
                let w = lo.tilde + d * (s / lo.alpha);
                prop_assert!(w[0] >= er * (1.0 - 1e-12));
                prop_assert!(e.pressure(&w) >= ep * (1.0 - 1e-9) - 1e-14 * w[3].abs());
            }
        }

        #[test]
        fn burgers_intermediate_state_between_neighbours(a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let lo = llf_low_order(&Burgers, &State([a]), &State([b]), Axis::X);
            prop_assert!(lo.tilde[0] >= a.min(b) - 1e-14 && lo.tilde[0] <= a.max(b) + 1e-14);
        }
    }
}
