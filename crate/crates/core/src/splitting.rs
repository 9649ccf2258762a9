//! Flux vector splittings `F = F+ + F-` and the point-update variants that
//! use them.

use serde::{Deserialize, Serialize};

use crate::meshstate::{mat_vec, State};
use crate::systems::{Axis, ConservationLaw, SystemKind};
use crate::Error;

/// How point values are evolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointUpdate {
    /// Jacobian splitting `J+ D+ U + J- D- U`.
    Js,
    /// Local Lax-Friedrichs flux vector splitting.
    LlfFvs,
    /// Steger-Warming flux vector splitting.
    SwFvs,
    /// Van Leer-Haenel flux vector splitting (Euler only).
    VhFvs,
}

impl PointUpdate {
    pub const ALL: [PointUpdate; 4] = [
        PointUpdate::Js,
        PointUpdate::LlfFvs,
        PointUpdate::SwFvs,
        PointUpdate::VhFvs,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PointUpdate::Js => "js",
            PointUpdate::LlfFvs => "llf-fvs",
            PointUpdate::SwFvs => "sw-fvs",
            PointUpdate::VhFvs => "vh-fvs",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "js" => Ok(PointUpdate::Js),
            "llf" | "llf-fvs" => Ok(PointUpdate::LlfFvs),
            "sw" | "sw-fvs" => Ok(PointUpdate::SwFvs),
            "vh" | "vh-fvs" => Ok(PointUpdate::VhFvs),
            other => Err(Error::Config(format!("unknown point update '{other}'"))),
        }
    }

    pub fn is_fvs(self) -> bool {
        !matches!(self, PointUpdate::Js)
    }

    /// Whether the variant is defined for the given system.
    pub fn supports(self, kind: SystemKind) -> bool {
        !(self == PointUpdate::VhFvs && kind == SystemKind::Scalar)
    }
}

/// Largest spectral radius over a stencil.
#[inline]
pub fn llf_alpha<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    stencil: &[State<M>],
    axis: Axis,
) -> f64 {
    stencil
        .iter()
        .fold(0.0, |a, u| a.max(sys.spectral_radius(u, axis)))
}

/// `F+- = (F +- alpha U) / 2`. `alpha` must dominate the spectral radius.
pub fn split_llf<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    u: &State<M>,
    alpha: f64,
    axis: Axis,
) -> Result<(State<M>, State<M>), Error> {
    let rad = sys.spectral_radius(u, axis);
    if !(alpha >= rad * (1.0 - 1e-12)) {
        return Err(Error::AlphaContract { alpha, radius: rad });
    }
    let f = sys.flux(u, axis);
    Ok(((f + *u * alpha) * 0.5, (f - *u * alpha) * 0.5))
}

/// Upwind splitting `F+- = (F +- |J| U) / 2`, built from the
/// eigen-decomposition of the Jacobian.
pub fn split_upwind_eigen<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    u: &State<M>,
    axis: Axis,
) -> (State<M>, State<M>) {
    let e = sys.eigen(u, axis);
    let mut c = mat_vec(&e.l, u);
    for k in 0..M {
        c[k] *= e.lambda[k].abs();
    }
    let abs_ju = mat_vec(&e.r, &c);
    let f = sys.flux(u, axis);
    ((f + abs_ju) * 0.5, (f - abs_ju) * 0.5)
}

/// Steger-Warming splitting. For the Euler equations the closed form is
/// used; for scalar laws it is `(F +- |f'(u)| u) / 2`.
pub fn split_sw<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    u: &State<M>,
    axis: Axis,
) -> (State<M>, State<M>) {
    match sys.kind() {
        SystemKind::Scalar => {
            let f = sys.flux(u, axis);
            let s = sys.jacobian(u, axis)[0][0].abs();
            ((f + *u * s) * 0.5, (f - *u * s) * 0.5)
        }
        SystemKind::Euler { gamma } => {
            let (w, vn, vt, a, _p) = euler_frame(u, axis, gamma);
            let rho = w[0];
            let (l1, l2, l3) = (vn, vn + a, vn - a);
            let half = |l: f64, s: f64| 0.5 * (l + s * l.abs());
            let part = |s: f64| {
                let (p1, p2, p3) = (half(l1, s), half(l2, s), half(l3, s));
                let al = 2.0 * (gamma - 1.0) * p1 + p2 + p3;
                let c = rho / (2.0 * gamma);
                [
                    c * al,
                    c * (al * vn + a * (p2 - p3)),
                    c * al * vt,
                    c * (0.5 * al * (vn * vn + vt * vt)
                        + a * vn * (p2 - p3)
                        + a * a / (gamma - 1.0) * (p2 + p3)),
                ]
            };
            (
                from_frame::<M>(&part(1.0), axis),
                from_frame::<M>(&part(-1.0), axis),
            )
        }
    }
}

/// Van Leer-Haenel splitting of the Euler flux. Supersonic states are fully
/// upwinded: `F+ = F, F- = 0` for `M >= 1` and the mirror case for
/// `M <= -1`.
pub fn split_vh<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    u: &State<M>,
    axis: Axis,
) -> Result<(State<M>, State<M>), Error> {
    let SystemKind::Euler { gamma } = sys.kind() else {
        return Err(Error::Config(
            "the van Leer-Haenel splitting is only defined for the Euler equations".into(),
        ));
    };
    let (w, vn, vt, a, p) = euler_frame(u, axis, gamma);
    let mach = vn / a;
    if mach >= 1.0 {
        return Ok((sys.flux(u, axis), State::zero()));
    }
    if mach <= -1.0 {
        return Ok((State::zero(), sys.flux(u, axis)));
    }
    let rho = w[0];
    let h = (w[3] + p) / rho;
    let part = |s: f64| {
        let m = s * 0.25 * rho * a * (mach + s) * (mach + s);
        let ps = vh_pressure(p, mach, s);
        [m, m * vn + ps, m * vt, m * h]
    };
    Ok((
        from_frame::<M>(&part(1.0), axis),
        from_frame::<M>(&part(-1.0), axis),
    ))
}

/// Pressure part of the van Leer-Haenel splitting, `s = +-1`. The cubic
/// polynomial keeps `F+-` continuous at `|M| = 1`.
#[inline]
fn vh_pressure(p: f64, mach: f64, s: f64) -> f64 {
    0.25 * p * (mach + s) * (mach + s) * (2.0 - s * mach)
}

/// Rotated Euler state: `(frame, normal velocity, tangential velocity,
/// sound speed, pressure)`.
#[inline]
fn euler_frame<const M: usize>(u: &State<M>, axis: Axis, gamma: f64) -> ([f64; 4], f64, f64, f64, f64) {
    let mut w = [0.0; 4];
    w[0] = u[0];
    w[3] = u[M - 1];
    match (M, axis) {
        (3, _) => w[1] = u[1],
        (_, Axis::X) => {
            w[1] = u[1];
            w[2] = u[2];
        }
        (_, Axis::Y) => {
            w[1] = u[2];
            w[2] = u[1];
        }
    }
    let vn = w[1] / w[0];
    let vt = w[2] / w[0];
    let p = (gamma - 1.0) * (w[3] - 0.5 * w[0] * (vn * vn + vt * vt));
    let a = (gamma * p / w[0]).sqrt();
    (w, vn, vt, a, p)
}

#[inline]
fn from_frame<const M: usize>(w: &[f64; 4], axis: Axis) -> State<M> {
    let mut u = [0.0; M];
    u[0] = w[0];
    u[M - 1] = w[3];
    match (M, axis) {
        (3, _) => u[1] = w[1],
        (_, Axis::X) => {
            u[1] = w[1];
            u[2] = w[2];
        }
        (_, Axis::Y) => {
            u[2] = w[1];
            u[1] = w[2];
        }
    }
    State(u)
}

/// Split fluxes `(F+, F-)` of a point for an FVS variant. The LLF variant
/// needs `alpha`.
pub fn split_fvs<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    kind: PointUpdate,
    u: &State<M>,
    alpha: f64,
    axis: Axis,
) -> Result<(State<M>, State<M>), Error> {
    match kind {
        PointUpdate::LlfFvs => split_llf(sys, u, alpha, axis),
        PointUpdate::SwFvs => Ok(split_sw(sys, u, axis)),
        PointUpdate::VhFvs => split_vh(sys, u, axis),
        PointUpdate::Js => Err(Error::Config(
            "Jacobian splitting has no flux vector splitting".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Burgers, Euler1d, Euler2d, LinearAdvection};

    fn rel(a: &State<4>, b: &State<4>) -> f64 {
        (*a - *b).max_abs() / a.max_abs().max(b.max_abs()).max(1e-300)
    }

    #[test]
    fn sw_closed_form_matches_eigen_form() {
        let e = Euler2d::new(1.4).unwrap();
        for &(rho, u, v, p) in &[
            (1.0, 0.3, -0.2, 1.0),
            (0.1, -3.0, 0.5, 0.05),
            (5.0, 10.0, 2.0, 0.1),
            (1.0, 0.0, 0.0, 1.0),
        ] {
            let s = e.conserved(rho, [u, v], p);
            for axis in Axis::BOTH {
                let (fp, fm) = split_sw(&e, &s, axis);
                let (gp, gm) = split_upwind_eigen(&e, &s, axis);
                let scale = fp.max_abs().max(fm.max_abs());
                assert!((fp - gp).max_abs() < 1e-12 * scale, "{axis:?} {fp:?} {gp:?}");
                assert!((fm - gm).max_abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn sw_one_d_is_embedded_two_d() {
        let e1 = Euler1d::new(1.4).unwrap();
        let e2 = Euler2d::new(1.4).unwrap();
        let s1 = e1.conserved(0.7, [0.4, 0.0], 0.3);
        let s2 = e2.conserved(0.7, [0.4, 0.0], 0.3);
        let (p1, m1) = split_sw(&e1, &s1, Axis::X);
        let (p2, m2) = split_sw(&e2, &s2, Axis::X);
        assert_eq!([p1[0], p1[1], p1[2]], [p2[0], p2[1], p2[3]]);
        assert_eq!([m1[0], m1[1], m1[2]], [m2[0], m2[1], m2[3]]);
        assert_eq!(p2[2], 0.0);
    }

    #[test]
    fn splittings_are_consistent() {
        let e = Euler2d::new(1.4).unwrap();
        let s = e.conserved(1.2, [0.3, -0.25], 0.8);
        for axis in Axis::BOTH {
            let f = e.flux(&s, axis);
            let (a, b) = split_sw(&e, &s, axis);
            assert!(rel(&(a + b), &f) < 1e-14);
            let (a, b) = split_vh(&e, &s, axis).unwrap();
            assert!(rel(&(a + b), &f) < 1e-14);
            let (a, b) = split_llf(&e, &s, 3.0, axis).unwrap();
            assert!(rel(&(a + b), &f) < 1e-14);
        }
    }

    #[test]
    fn vh_supersonic_is_upwind_and_continuous() {
        let e = Euler2d::new(1.4).unwrap();
        let a = (1.4f64).sqrt();
        let sup = e.conserved(1.0, [2.0 * a, 0.1], 1.0);
        let (fp, fm) = split_vh(&e, &sup, Axis::X).unwrap();
        assert_eq!(fp, e.flux(&sup, Axis::X));
        assert_eq!(fm, State::zero());
        // approaching M = 1 from below the subsonic branch meets the
        // supersonic one
        let below = e.conserved(1.0, [a * (1.0 - 1e-9), 0.3], 1.0);
        let (fp, fm) = split_vh(&e, &below, Axis::X).unwrap();
        let f = e.flux(&below, Axis::X);
        assert!(rel(&fp, &f) < 1e-7);
        assert!(fm.max_abs() < 1e-7);
        let (fp, _) = split_vh(&e, &e.conserved(1.0, [-a * (1.0 - 1e-9), 0.0], 1.0), Axis::X)
            .unwrap();
        assert!(fp.max_abs() < 1e-7);
    }

    #[test]
    fn vh_rejects_scalar_laws() {
        assert!(split_vh(&Burgers, &State([1.0]), Axis::X).is_err());
        assert!(!PointUpdate::VhFvs.supports(SystemKind::Scalar));
    }

    #[test]
    fn llf_alpha_contract() {
        let e = Euler2d::new(1.4).unwrap();
        let s = e.conserved(1.0, [1.0, 0.0], 1.0);
        let rad = e.spectral_radius(&s, Axis::X);
        assert!(split_llf(&e, &s, rad, Axis::X).is_ok());
        assert!(matches!(
            split_llf(&e, &s, 0.5 * rad, Axis::X),
            Err(Error::AlphaContract { .. })
        ));
        let st = [s, e.conserved(1.0, [3.0, 0.0], 1.0)];
        assert_eq!(llf_alpha(&e, &st, Axis::X), 3.0 + 1.4f64.sqrt());
    }

    #[test]
    fn scalar_sw_for_linear_law_is_jacobian_split() {
        let adv = LinearAdvection { velocity: [1.0, -0.5] };
        let u = State([2.0]);
        assert_eq!(split_sw(&adv, &u, Axis::X), (State([2.0]), State([0.0])));
        assert_eq!(split_sw(&adv, &u, Axis::Y), (State([0.0]), State([-1.0])));
    }

    #[test]
    fn parse_labels_roundtrip() {
        for k in PointUpdate::ALL {
            assert_eq!(PointUpdate::parse(k.label()).unwrap(), k);
        }
        assert!(PointUpdate::parse("weno").is_err());
    }
}
