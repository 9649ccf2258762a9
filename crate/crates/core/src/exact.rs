//! Reference solutions: the exact Riemann problem of the 1D Euler
//! equations, the gamma = 3 characteristic solution and the isentropic
//! vortex.

use crate::Error;

/// Primitive state `(rho, u, p)`.
pub type Prim = (f64, f64, f64);

/// Exact solution of a 1D Riemann problem, vacuum included.
#[derive(Clone, Copy, Debug)]
pub struct ExactRiemann {
    pub gamma: f64,
    pub left: Prim,
    pub right: Prim,
    /// Star pressure and velocity; `None` when a vacuum forms.
    star: Option<(f64, f64)>,
}

impl ExactRiemann {
    pub fn new(gamma: f64, left: Prim, right: Prim) -> Result<Self, Error> {
        for (n, s) in [("left", left), ("right", right)] {
            if !(s.0 > 0.0 && s.2 > 0.0) {
                return Err(Error::Domain(format!("{n} Riemann state {s:?} is not admissible")));
            }
        }
        let mut r = ExactRiemann { gamma, left, right, star: None };
        let (cl, cr) = (r.sound(left), r.sound(right));
        let g1 = gamma - 1.0;
        // the critical case where the two fans just touch counts as vacuum
        if 2.0 * (cl + cr) / g1 * (1.0 - 1e-12) <= right.1 - left.1 {
            return Ok(r);
        }
        let p = r.star_pressure()?;
        let u = 0.5 * (left.1 + right.1) + 0.5 * (r.wave(p, right).0 - r.wave(p, left).0);
        r.star = Some((p, u));
        Ok(r)
    }

    fn sound(&self, s: Prim) -> f64 {
        (self.gamma * s.2 / s.0).sqrt()
    }

    /// Pressure function of one wave and its derivative.
    fn wave(&self, p: f64, s: Prim) -> (f64, f64) {
        let g = self.gamma;
        let (rho, _, pk) = s;
        if p > pk {
            let a = 2.0 / ((g + 1.0) * rho);
            let b = (g - 1.0) / (g + 1.0) * pk;
            let q = (a / (p + b)).sqrt();
            ((p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (p + b)))
        } else {
            let c = self.sound(s);
            let e = (g - 1.0) / (2.0 * g);
            let r = (p / pk).powf(e);
            let d = (p / pk).powf(-(g + 1.0) / (2.0 * g)) / (rho * c);
            (2.0 * c / (g - 1.0) * (r - 1.0), d)
        }
    }

    fn star_pressure(&self) -> Result<f64, Error> {
        let du = self.right.1 - self.left.1;
        let h = |p: f64| {
            let (fl, dl) = self.wave(p, self.left);
            let (fr, dr) = self.wave(p, self.right);
            (fl + fr + du, dl + dr)
        };
        // h is increasing in p; bracket the root, then safeguarded Newton
        let mut lo = 0.0;
        let scale = self.left.2.max(self.right.2);
        let mut hi = scale;
        while h(hi).0 < 0.0 {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Newton("star pressure is unbounded".into()));
            }
        }
        let mut p = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (f, d) = h(p);
            if f == 0.0 {
                return Ok(p);
            }
            if f < 0.0 {
                lo = p;
            } else {
                hi = p;
            }
            let mut next = p - f / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - p).abs() <= 1e-15 * p || hi - lo <= 1e-15 * scale {
                return Ok(next);
            }
            p = next;
        }
        Err(Error::Newton("star pressure iteration did not converge".into()))
    }

    /// Star pressure and velocity (`None` for a vacuum).
    pub fn star(&self) -> Option<(f64, f64)> {
        self.star
    }

    /// State on the ray `x / t = xi`.
    pub fn sample(&self, xi: f64) -> Prim {
        let g = self.gamma;
        let (g1, gp) = (g - 1.0, g + 1.0);
        let (l, r) = (self.left, self.right);
        let (cl, cr) = (self.sound(l), self.sound(r));
        let fan = |s: Prim, c: f64, sign: f64| -> Prim {
            // sign = 1 for a left fan, -1 for a right fan
            let k = 2.0 / gp + sign * g1 / (gp * c) * (s.1 - xi);
            let rho = s.0 * k.powf(2.0 / g1);
            let u = 2.0 / gp * (sign * c + g1 / 2.0 * s.1 + xi);
            (rho, u, s.2 * k.powf(2.0 * g / g1))
        };
        let Some((ps, us)) = self.star else {
            let (ul, ur) = (l.1 + 2.0 * cl / g1, r.1 - 2.0 * cr / g1);
            return if xi <= l.1 - cl {
                l
            } else if xi < ul {
                fan(l, cl, 1.0)
            } else if xi <= ur {
                (0.0, 0.5 * (ul + ur), 0.0)
            } else if xi < r.1 + cr {
                fan(r, cr, -1.0)
            } else {
                r
            };
        };
        if xi <= us {
            if ps > l.2 {
                let q = ps / l.2;
                let s = l.1 - cl * (gp / (2.0 * g) * q + g1 / (2.0 * g)).sqrt();
                if xi <= s {
                    l
                } else {
                    let rho = l.0 * (q + g1 / gp) / (g1 / gp * q + 1.0);
                    (rho, us, ps)
                }
            } else {
                let rho = l.0 * (ps / l.2).powf(1.0 / g);
                let cs = cl * (ps / l.2).powf(g1 / (2.0 * g));
                if xi <= l.1 - cl {
                    l
                } else if xi > us - cs {
                    (rho, us, ps)
                } else {
                    fan(l, cl, 1.0)
                }
            }
        } else if ps > r.2 {
            let q = ps / r.2;
            let s = r.1 + cr * (gp / (2.0 * g) * q + g1 / (2.0 * g)).sqrt();
            if xi >= s {
                r
            } else {
                let rho = r.0 * (q + g1 / gp) / (g1 / gp * q + 1.0);
                (rho, us, ps)
            }
        } else {
            let rho = r.0 * (ps / r.2).powf(1.0 / g);
            let cs = cr * (ps / r.2).powf(g1 / (2.0 * g));
            if xi >= r.1 + cr {
                r
            } else if xi < us + cs {
                (rho, us, ps)
            } else {
                fan(r, cr, -1.0)
            }
        }
    }
}

/// Density of the gamma = 3 accuracy test at `t = 0`.
pub fn gamma3_rho0(zeta: f64, x: f64) -> f64 {
    1.0 + zeta * (std::f64::consts::PI * x).sin()
}

/// Foot of the characteristic `x1 + s sqrt(3) rho0(x1) t = x`.
fn gamma3_foot(zeta: f64, x: f64, t: f64, s: f64) -> Result<f64, Error> {
    let pi = std::f64::consts::PI;
    let k = s * 3f64.sqrt() * t;
    let mut x1 = x - k * gamma3_rho0(zeta, x);
    for _ in 0..100 {
        let f = x1 + k * gamma3_rho0(zeta, x1) - x;
        let d = 1.0 + k * zeta * pi * (pi * x1).cos();
        let step = f / d;
        x1 -= step;
        if step.abs() <= 1e-13 {
            return Ok(x1);
        }
    }
    Err(Error::Newton(format!("characteristic foot of x = {x} at t = {t} did not converge")))
}

/// Exact `(rho, u, p)` of the gamma = 3 accuracy test before shocks form.
pub fn gamma3_exact(zeta: f64, x: f64, t: f64) -> Result<Prim, Error> {
    let x1 = gamma3_foot(zeta, x, t, -1.0)?;
    let x2 = gamma3_foot(zeta, x, t, 1.0)?;
    let (r1, r2) = (gamma3_rho0(zeta, x1), gamma3_rho0(zeta, x2));
    let rho = 0.5 * (r1 + r2);
    let u = 3f64.sqrt() * (rho - r1);
    Ok((rho, u, rho.powi(3)))
}

/// Isentropic vortex centred at the origin: `(rho, [u, v], p)`.
pub fn vortex_state(gamma: f64, strength: f64, x: f64, y: f64) -> (f64, [f64; 2], f64) {
    let k0 = strength / (2.0 * std::f64::consts::PI) * (0.5 * (1.0 - x * x - y * y)).exp();
    let t0 = 1.0 - (gamma - 1.0) / (2.0 * gamma) * k0 * k0;
    let rho = t0.powf(1.0 / (gamma - 1.0));
    (rho, [1.0 + k0 * y, 1.0 - k0 * x], t0 * rho)
}

/// Wraps `x` into `[lo, lo + len)`.
pub fn wrap(x: f64, lo: f64, len: f64) -> f64 {
    lo + (x - lo).rem_euclid(len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sod_star_state_matches_reference_values() {
        // reference star values of the Sod problem: p* = 0.30313, u* = 0.92745
        let r = ExactRiemann::new(1.4, (1.0, 0.0, 1.0), (0.125, 0.0, 0.1)).unwrap();
        let (p, u) = r.star().unwrap();
        assert!((p - 0.30313).abs() < 1e-5, "{p}");
        assert!((u - 0.92745).abs() < 1e-5, "{u}");
        let (rl, _, _) = r.sample(0.5 * u);
        let (rr, _, _) = r.sample(1.2 * u);
        assert!((rl - 0.42632).abs() < 1e-5, "{rl}");
        assert!((rr - 0.26557).abs() < 1e-5, "{rr}");
        assert_eq!(r.sample(-10.0), (1.0, 0.0, 1.0));
        assert_eq!(r.sample(10.0), (0.125, 0.0, 0.1));
    }

    #[test]
    fn rarefaction_fan_is_continuous() {
        let r = ExactRiemann::new(1.4, (1.0, 0.0, 1.0), (0.125, 0.0, 0.1)).unwrap();
        let cl = (1.4f64).sqrt();
        let a = r.sample(-cl + 1e-12);
        assert!((a.0 - 1.0).abs() < 1e-10 && (a.2 - 1.0).abs() < 1e-10);
        let (p, u) = r.star().unwrap();
        let cs = cl * (p).powf(0.4 / 2.8);
        let b = r.sample(u - cs - 1e-12);
        assert!((b.2 - p).abs() < 1e-9 && (b.1 - u).abs() < 1e-9);
    }

    #[test]
    fn symmetric_rarefactions_reach_vacuum() {
        let r = ExactRiemann::new(1.4, (7.0, -1.0, 0.2), (7.0, 1.0, 0.2)).unwrap();
        let (rho, u, p) = r.sample(0.0);
        assert!(rho < 1e-12 && p < 1e-12 && u.abs() < 1e-12);
        assert_eq!(r.sample(-2.0).0, 7.0);
    }

    #[test]
    fn leblanc_is_solvable() {
        let r = ExactRiemann::new(5.0 / 3.0, (2.0, 0.0, 1e9), (1e-3, 0.0, 1.0)).unwrap();
        let (p, u) = r.star().unwrap();
        assert!(p > 1.0 && p < 1e9 && u > 0.0);
        // both waves agree on the star velocity
        let ul = r.left.1 - r.wave(p, r.left).0;
        let ur = r.right.1 + r.wave(p, r.right).0;
        assert!((ul - ur).abs() < 1e-9 * u.abs());
    }

    #[test]
    fn gamma3_solution_at_zero_time_is_initial_data() {
        for x in [-0.7, 0.1, 0.5] {
            let (rho, u, p) = gamma3_exact(0.5, x, 0.0).unwrap();
            assert!((rho - gamma3_rho0(0.5, x)).abs() < 1e-15);
            assert_eq!(u, 0.0);
            assert!((p - rho.powi(3)).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma3_riemann_invariants_are_transported() {
        // w = u +- sqrt(3) rho is constant along dx/dt = w
        let (zeta, t) = (1.0 - 1e-7, 0.1);
        for x in [-0.9, -0.3, 0.2, 0.8] {
            let (rho, u, _) = gamma3_exact(zeta, x, t).unwrap();
            let wp = u + 3f64.sqrt() * rho;
            let x1 = x - wp * t;
            assert!((wp - 3f64.sqrt() * gamma3_rho0(zeta, x1)).abs() < 1e-12);
        }
    }

    #[test]
    fn vortex_minimum_density_matches_reported_value() {
        let (rho, _, p) = vortex_state(1.4, 10.0828, 0.0, 0.0);
        assert!(rho > 7.0e-15 && rho < 8.5e-15, "{rho}");
        assert!(p > 1.5e-20 && p < 2.0e-20, "{p}");
    }
}
