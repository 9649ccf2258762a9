//! Randomized property suites: splitting consistency, admissibility of the
//! LLF intermediate states, convex-limiting identities, stencil exactness and
//! the order of the time integrator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bpaverage::{limit_euler, limit_scalar, llf_low_order, rho_p};
use crate::march::{ssp_rk3_step, FieldSummary, Stepper};
use crate::meshstate::{DofVector, State};
use crate::reconstruct::{js_derivatives_1d, upwind_from_left, upwind_from_right};
use crate::scheme::StageStats;
use crate::splitting::{split_llf, split_sw, split_upwind_eigen, split_vh};
use crate::systems::{Axis, Burgers, ConservationLaw, Euler, LinearAdvection};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub samples: usize,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl SuiteReport {
    fn new(name: &str, samples: usize, worst: f64, tolerance: f64, detail: String) -> Self {
        SuiteReport { name: name.into(), samples, worst, tolerance, passed: worst <= tolerance, detail }
    }
}

const GAMMAS: [f64; 3] = [1.4, 5.0 / 3.0, 3.0];

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Density and pressure spread over many decades, Mach numbers up to 5.
fn random_euler<const M: usize>(rng: &mut ChaCha8Rng, e: &Euler<M>) -> State<M> {
    let rho = log_uniform(rng, 1e-6, 1e3);
    let p = log_uniform(rng, 1e-6, 1e6);
    let c = (e.gamma * p / rho).sqrt();
    let u = c * rng.gen_range(-5.0..5.0);
    let v = if M == 4 { c * rng.gen_range(-5.0..5.0) } else { 0.0 };
    e.conserved(rho, [u, v], p)
}

fn rel_diff<const M: usize>(a: &State<M>, b: &State<M>, scale: f64) -> f64 {
    (*a - *b).max_abs() / scale.max(f64::MIN_POSITIVE)
}

/// `F+ + F- = F` for every splitting.
pub fn fvs_consistency(n: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut worst_at = String::new();
    let mut record = |name: &str, d: f64, worst: &mut f64| {
        if d > *worst {
            *worst = d;
            worst_at = name.to_string();
        }
    };
    fn check<S: ConservationLaw<M>, const M: usize>(
        sys: &S,
        u: &State<M>,
        axis: Axis,
        vh: bool,
    ) -> Vec<(&'static str, f64)> {
        let f = sys.flux(u, axis);
        let alpha = sys.spectral_radius(u, axis);
        let mut out = Vec::new();
        let mut add = |name, (a, b): (State<M>, State<M>)| {
            let scale = f.max_abs().max(a.max_abs()).max(b.max_abs());
            out.push((name, rel_diff(&(a + b), &f, scale)));
        };
        add("llf", split_llf(sys, u, alpha, axis).expect("alpha is the spectral radius"));
        add("sw", split_sw(sys, u, axis));
        add("upwind-eigen", split_upwind_eigen(sys, u, axis));
        if vh {
            add("vh", split_vh(sys, u, axis).expect("euler"));
        }
        out
    }
    for k in 0..n {
        let g = GAMMAS[k % GAMMAS.len()];
        let e1 = Euler::<3>::new(g).expect("valid gamma");
        let e2 = Euler::<4>::new(g).expect("valid gamma");
        let u1 = random_euler(&mut rng, &e1);
        let u2 = random_euler(&mut rng, &e2);
        let s = State([rng.gen_range(-10.0..10.0)]);
        let adv = LinearAdvection { velocity: [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)] };
        let mut all = check(&e1, &u1, Axis::X, true);
        for axis in Axis::BOTH {
            all.extend(check(&e2, &u2, axis, true));
            all.extend(check(&Burgers, &s, axis, false));
            all.extend(check(&adv, &s, axis, false));
        }
        for (name, d) in all {
            record(name, d, &mut worst);
            count += 1;
        }
    }
    SuiteReport::new("fvs-consistency", count, worst, 1e-13, format!("worst splitting: {worst_at}"))
}

/// Intermediate states of random admissible pairs with `alpha` the larger
/// spectral radius stay admissible; for Burgers they stay between the pair.
pub fn intermediate_admissibility(n: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0usize;
    let mut count = 0usize;
    let mut first = String::new();
    for k in 0..n {
        let g = GAMMAS[k % GAMMAS.len()];
        let e1 = Euler::<3>::new(g).expect("valid gamma");
        let e2 = Euler::<4>::new(g).expect("valid gamma");
        let (a, b) = (random_euler(&mut rng, &e1), random_euler(&mut rng, &e1));
        let t = llf_low_order(&e1, &a, &b, Axis::X).tilde;
        count += 1;
        if !e1.is_admissible(&t) {
            bad += 1;
            first.get_or_insert_with_str(|| format!("1D {:?} | {:?} -> {:?}", a.0, b.0, t.0));
        }
        let (a, b) = (random_euler(&mut rng, &e2), random_euler(&mut rng, &e2));
        for axis in Axis::BOTH {
            let t = llf_low_order(&e2, &a, &b, axis).tilde;
            count += 1;
            if !e2.is_admissible(&t) {
                bad += 1;
                first.get_or_insert_with_str(|| format!("2D {:?} | {:?} -> {:?}", a.0, b.0, t.0));
            }
        }
        let (a, b) = (State([rng.gen_range(-5.0..5.0)]), State([rng.gen_range(-5.0..5.0)]));
        let t = llf_low_order(&Burgers, &a, &b, Axis::X).tilde[0];
        count += 1;
        let slack = 1e-14 * a[0].abs().max(b[0].abs());
        if t < a[0].min(b[0]) - slack || t > a[0].max(b[0]) + slack {
            bad += 1;
            first.get_or_insert_with_str(|| format!("burgers {} | {} -> {t}", a[0], b[0]));
        }
    }
    SuiteReport::new("intermediate-admissibility", count, bad as f64, 0.0, first)
}

trait FirstMessage {
    fn get_or_insert_with_str(&mut self, f: impl FnOnce() -> String);
}

impl FirstMessage for String {
    fn get_or_insert_with_str(&mut self, f: impl FnOnce() -> String) {
        if self.is_empty() {
            *self = f();
        }
    }
}

/// Limited fluxes are convex combinations of the high- and low-order flux,
/// and the limited intermediate states satisfy their bounds when recomputed.
pub fn convex_limiting(n: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    let mut what = String::new();
    let mut note = |d: f64, msg: &dyn Fn() -> String, worst: &mut f64| {
        if d > *worst {
            *worst = d;
            what = msg();
        }
    };
    for k in 0..n {
        // scalar: bounds from the pair and the intermediate state
        let (a, b) = (State([rng.gen_range(-2.0..2.0)]), State([rng.gen_range(-2.0..2.0)]));
        let lo = llf_low_order(&Burgers, &a, &b, Axis::X);
        let fh = lo.flux[0] + rng.gen_range(-3.0..3.0) * lo.alpha.max(1e-3);
        let df = fh - lo.flux[0];
        let t = lo.tilde[0];
        let left = (a[0].min(t) - rng.gen_range(0.0..0.1), a[0].max(t) + rng.gen_range(0.0..0.1));
        let right = (b[0].min(t) - rng.gen_range(0.0..0.1), b[0].max(t) + rng.gen_range(0.0..0.1));
        let d = if lo.alpha > 0.0 { limit_scalar(df, lo.alpha, t, left, right) } else { 0.0 };
        let flux = lo.flux[0] + d;
        let theta = if df != 0.0 { d / df } else { 1.0 };
        count += 1;
        note(
            (flux - (theta * fh + (1.0 - theta) * lo.flux[0])).abs() + (theta - theta.clamp(0.0, 1.0)).abs(),
            &|| format!("scalar combination, theta {theta}"),
            &mut worst,
        );
        if lo.alpha > 0.0 {
            let (ul, ur) = (t - d / lo.alpha, t + d / lo.alpha);
            let v = (left.0 - ul).max(ul - left.1).max(right.0 - ur).max(ur - right.1).max(0.0);
            note(v, &|| format!("scalar bounds {ul} {left:?} / {ur} {right:?}"), &mut worst);
        }

        // Euler: density clamp then pressure scaling
        let g = GAMMAS[k % GAMMAS.len()];
        let e = Euler::<4>::new(g).expect("valid gamma");
        let (a, b) = (random_euler(&mut rng, &e), random_euler(&mut rng, &e));
        let axis = if k % 2 == 0 { Axis::X } else { Axis::Y };
        let lo = llf_low_order(&e, &a, &b, axis);
        let scale = lo.flux.max_abs().max(lo.alpha * lo.tilde.max_abs());
        let mut fh = lo.flux;
        for c in 0..4 {
            fh[c] += rng.gen_range(-1.0..1.0) * scale;
        }
        let df = fh - lo.flux;
        let (tr, tp) = rho_p(&lo.tilde, g);
        let floor_r = 1e-13f64.min(tr) * rng.gen_range(0.0..1.0);
        let floor_p = 1e-13f64.min(tp) * rng.gen_range(0.0..1.0);
        let (d, theta_p) = limit_euler(&df, lo.alpha, &lo.tilde, floor_r, floor_p, g);
        let lim = lo.flux + d;
        for c in 0..4 {
            let th = if df[c] != 0.0 { d[c] / df[c] } else { theta_p };
            let comb = th * fh[c] + (1.0 - th) * lo.flux[c];
            let off = (lim[c] - comb).abs() / scale.max(f64::MIN_POSITIVE)
                + (th - th.clamp(0.0, 1.0)).abs()
                + if c > 0 { (th - theta_p).abs() } else { 0.0 };
            note(off, &|| format!("euler component {c}: theta {th} vs {theta_p}"), &mut worst);
        }
        for sign in [-1.0, 1.0] {
            let s = lo.tilde + d * (sign / lo.alpha);
            let (r, p) = rho_p(&s, g);
            let (tol_r, tol_p) = (1e-12 * tr, 1e-10 * (tp + lo.tilde[3] * (g - 1.0)));
            let v = (floor_r - r - tol_r).max(floor_p - p - tol_p).max(0.0);
            note(v, &|| format!("euler floors: rho {r} >= {floor_r}, p {p} >= {floor_p}"), &mut worst);
        }
        count += 1;
    }
    SuiteReport::new("convex-limiting", count, worst, 1e-12, what)
}

/// The one-sided derivative formulas differentiate quadratics exactly.
pub fn stencil_exactness(n: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let q = |x: f64| a * x * x + b * x + c;
        let dq = |x: f64| 2.0 * a * x + b;
        // integral of q over [l, r] divided by its length
        let mean = |l: f64, r: f64| a * (r * r + r * l + l * l) / 3.0 + b * 0.5 * (r + l) + c;
        let x0 = rng.gen_range(-1.0..1.0);
        let (hl, hr) = (rng.gen_range(0.05..0.5), rng.gen_range(0.05..0.5));
        let s = |v: f64| State([v]);
        let scale = dq(x0).abs().max(1.0);
        let dl = upwind_from_left(&s(q(x0 - hl)), &s(q(x0 - 0.5 * hl)), &s(q(x0)), hl)[0];
        let dr = upwind_from_right(&s(q(x0)), &s(q(x0 + 0.5 * hr)), &s(q(x0 + hr)), hr)[0];
        let (dp, dm) = js_derivatives_1d(
            &s(q(x0 - hl)),
            &s(mean(x0 - hl, x0)),
            &s(q(x0)),
            &s(mean(x0, x0 + hr)),
            &s(q(x0 + hr)),
            hl,
            hr,
        );
        for d in [dl, dr, dp[0], dm[0]] {
            worst = worst.max((d - dq(x0)).abs() / scale);
        }
    }
    SuiteReport::new("stencil-exactness", 4 * n, worst, 1e-13, String::new())
}

#[derive(Clone)]
struct Scalar(f64);

impl DofVector for Scalar {
    fn scale_add(&mut self, a: f64, other: &Self, b: f64) {
        self.0 = a * self.0 + b * other.0;
    }
}

/// `y' = -y + sin t`.
struct Forced;

impl Stepper for Forced {
    type Field = Scalar;
    fn euler_step(&mut self, u: &mut Scalar, t: f64, dt: f64) -> Result<Scalar, Error> {
        Ok(Scalar(u.0 + dt * (-u.0 + t.sin())))
    }
    fn stable_dt(&mut self, _u: &mut Scalar, _t: f64) -> Result<f64, Error> {
        Ok(f64::INFINITY)
    }
    fn summary(&self, _u: &Scalar) -> FieldSummary {
        FieldSummary::default()
    }
    fn take_stats(&mut self) -> StageStats {
        StageStats::default()
    }
}

/// Observed order of the SSP-RK3 integrator on a forced linear ODE.
pub fn rk3_order() -> SuiteReport {
    // exact solution with y(0) = 1
    let exact = |t: f64| 1.5 * (-t).exp() + 0.5 * (t.sin() - t.cos());
    let err = |steps: usize| {
        let dt = 1.0 / steps as f64;
        let mut u = Scalar(1.0);
        for k in 0..steps {
            u = ssp_rk3_step(&mut Forced, &mut u, k as f64 * dt, dt).expect("infallible");
        }
        (u.0 - exact(1.0)).abs()
    };
    let order = (err(20) / err(40)).log2();
    SuiteReport {
        name: "rk3-order".into(),
        samples: 2,
        worst: order,
        tolerance: 2.9,
        passed: order >= 2.9,
        detail: format!("observed order {order:.4} (must be at least 2.9)"),
    }
}

pub fn run_all(n: usize, seed: u64) -> Vec<SuiteReport> {
    vec![
        fvs_consistency(n, seed),
        intermediate_admissibility(n, seed.wrapping_add(1)),
        convex_limiting(n, seed.wrapping_add(2)),
        stencil_exactness(n, seed.wrapping_add(3)),
        rk3_order(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_samples() {
        for r in run_all(2000, 7) {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn suites_are_reproducible() {
        assert_eq!(convex_limiting(100, 3), convex_limiting(100, 3));
    }
}
