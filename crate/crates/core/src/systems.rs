//! Hyperbolic systems: scalar advection, Burgers and the compressible Euler
//! equations in one and two space dimensions.

use serde::{Deserialize, Serialize};

use crate::meshstate::{mat_vec, Mat, State};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemKind {
    Scalar,
    Euler { gamma: f64 },
}

/// Right eigenvectors (columns of `r`), left eigenvectors (rows of `l`) and
/// eigenvalues of a flux Jacobian.
#[derive(Clone, Copy, Debug)]
pub struct Eigen<const M: usize> {
    pub r: Mat<M>,
    pub l: Mat<M>,
    pub lambda: [f64; M],
}

pub trait ConservationLaw<const M: usize>:
    Clone + Send + Sync + std::fmt::Debug + 'static
{
    fn name(&self) -> &'static str;
    fn kind(&self) -> SystemKind;
    fn flux(&self, u: &State<M>, axis: Axis) -> State<M>;
    /// Largest absolute eigenvalue of the flux Jacobian.
    fn spectral_radius(&self, u: &State<M>, axis: Axis) -> f64;
    fn jacobian(&self, u: &State<M>, axis: Axis) -> Mat<M>;
    fn eigen(&self, u: &State<M>, axis: Axis) -> Eigen<M>;
    /// Reflection across a wall normal to `axis`.
    fn mirror(&self, u: &State<M>, axis: Axis) -> State<M>;

    /// Names of the conserved components.
    fn component_names(&self) -> &'static [&'static str];

    fn is_admissible(&self, u: &State<M>) -> bool {
        match self.kind() {
            SystemKind::Scalar => u.is_finite(),
            SystemKind::Euler { gamma } => {
                u.is_finite() && u[0] > 0.0 && euler_pressure(u, gamma) > 0.0
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearAdvection {
    pub velocity: [f64; 2],
}

impl ConservationLaw<1> for LinearAdvection {
    fn name(&self) -> &'static str {
        "advection"
    }

    fn kind(&self) -> SystemKind {
        SystemKind::Scalar
    }

    fn flux(&self, u: &State<1>, axis: Axis) -> State<1> {
        State([self.speed(axis) * u[0]])
    }

    fn spectral_radius(&self, _u: &State<1>, axis: Axis) -> f64 {
        self.speed(axis).abs()
    }

    fn jacobian(&self, _u: &State<1>, axis: Axis) -> Mat<1> {
        [[self.speed(axis)]]
    }

    fn eigen(&self, _u: &State<1>, axis: Axis) -> Eigen<1> {
        Eigen {
            r: [[1.0]],
            l: [[1.0]],
            lambda: [self.speed(axis)],
        }
    }

    fn mirror(&self, u: &State<1>, _axis: Axis) -> State<1> {
        *u
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["u"]
    }
}

impl LinearAdvection {
    fn speed(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.velocity[0],
            Axis::Y => self.velocity[1],
        }
    }
}

/// Burgers' equation with flux `u^2 / 2` along every axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Burgers;

impl ConservationLaw<1> for Burgers {
    fn name(&self) -> &'static str {
        "burgers"
    }

    fn kind(&self) -> SystemKind {
        SystemKind::Scalar
    }

    fn flux(&self, u: &State<1>, _axis: Axis) -> State<1> {
        State([0.5 * u[0] * u[0]])
    }

    fn spectral_radius(&self, u: &State<1>, _axis: Axis) -> f64 {
        u[0].abs()
    }

    fn jacobian(&self, u: &State<1>, _axis: Axis) -> Mat<1> {
        [[u[0]]]
    }

    fn eigen(&self, u: &State<1>, _axis: Axis) -> Eigen<1> {
        Eigen {
            r: [[1.0]],
            l: [[1.0]],
            lambda: [u[0]],
        }
    }

    fn mirror(&self, u: &State<1>, _axis: Axis) -> State<1> {
        *u
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["u"]
    }
}

/// Euler equations of an ideal gas. `M = 3` is the 1D system
/// `(rho, rho u, E)`, `M = 4` the 2D system `(rho, rho u, rho v, E)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Euler<const M: usize> {
    pub gamma: f64,
}

pub type Euler1d = Euler<3>;
pub type Euler2d = Euler<4>;

impl<const M: usize> Euler<M> {
    pub fn new(gamma: f64) -> Result<Self, Error> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }
        if M != 3 && M != 4 {
            return Err(Error::Config(format!("unsupported Euler size {M}")));
        }
        Ok(Euler { gamma })
    }

    /// Conserved state from density, velocity and pressure. The second
    /// velocity component is ignored in 1D.
    pub fn conserved(&self, rho: f64, vel: [f64; 2], p: f64) -> State<M> {
        let mut u = [0.0; M];
        u[0] = rho;
        let mut ke = 0.0;
        for d in 0..M - 2 {
            u[1 + d] = rho * vel[d];
            ke += vel[d] * vel[d];
        }
        u[M - 1] = p / (self.gamma - 1.0) + 0.5 * rho * ke;
        State(u)
    }

    /// `(rho, velocity, p)`.
    pub fn primitives(&self, u: &State<M>) -> (f64, [f64; 2], f64) {
        let rho = u[0];
        let mut vel = [0.0; 2];
        for d in 0..M - 2 {
            vel[d] = u[1 + d] / rho;
        }
        (rho, vel, euler_pressure(u, self.gamma))
    }

    pub fn pressure(&self, u: &State<M>) -> f64 {
        euler_pressure(u, self.gamma)
    }

    pub fn sound_speed(&self, u: &State<M>) -> f64 {
        (self.gamma * self.pressure(u) / u[0]).max(0.0).sqrt()
    }

    /// Map from the components of an `M`-vector to the rotated 4-component
    /// frame `(rho, normal momentum, tangential momentum, E)`.
    #[inline]
    fn frame_index(axis: Axis) -> [usize; M] {
        let mut idx = [0; M];
        if M == 4 {
            let m = match axis {
                Axis::X => [0, 1, 2, 3],
                Axis::Y => [0, 2, 1, 3],
            };
            idx.copy_from_slice(&m[..M]);
        } else {
            assert!(axis == Axis::X, "1D Euler has no y-direction");
            idx.copy_from_slice(&[0, 1, 3][..M]);
        }
        idx
    }

    #[inline]
    fn to_frame(u: &State<M>, axis: Axis) -> [f64; 4] {
        let idx = Self::frame_index(axis);
        let mut w = [0.0; 4];
        for c in 0..M {
            w[idx[c]] = u[c];
        }
        w
    }

    #[inline]
    fn from_frame(w: &[f64; 4], axis: Axis) -> State<M> {
        let idx = Self::frame_index(axis);
        let mut u = [0.0; M];
        for c in 0..M {
            u[c] = w[idx[c]];
        }
        State(u)
    }

    fn mat_from_frame(a: &[[f64; 4]; 4], axis: Axis) -> Mat<M> {
        let idx = Self::frame_index(axis);
        let mut out = [[0.0; M]; M];
        for r in 0..M {
            for c in 0..M {
                out[r][c] = a[idx[r]][idx[c]];
            }
        }
        out
    }

    /// Wave indices of the frame kept for this system size.
    fn waves() -> [usize; M] {
        let mut w = [0; M];
        if M == 4 {
            w.copy_from_slice(&[0, 1, 2, 3][..M]);
        } else {
            w.copy_from_slice(&[0, 1, 3][..M]);
        }
        w
    }
}

/// Pressure of an ideal gas, with the momentum in components `1..M-1`.
#[inline]
pub fn euler_pressure<const M: usize>(u: &State<M>, gamma: f64) -> f64 {
    let mut m2 = 0.0;
    for d in 1..M - 1 {
        m2 += u[d] * u[d];
    }
    (gamma - 1.0) * (u[M - 1] - 0.5 * m2 / u[0])
}

impl<const M: usize> ConservationLaw<M> for Euler<M> {
    fn name(&self) -> &'static str {
        if M == 3 {
            "euler1d"
        } else {
            "euler2d"
        }
    }

    fn kind(&self) -> SystemKind {
        SystemKind::Euler { gamma: self.gamma }
    }

    #[inline]
    fn flux(&self, u: &State<M>, axis: Axis) -> State<M> {
        let w = Self::to_frame(u, axis);
        let p = (self.gamma - 1.0) * (w[3] - 0.5 * (w[1] * w[1] + w[2] * w[2]) / w[0]);
        let vn = w[1] / w[0];
        Self::from_frame(&[w[1], w[1] * vn + p, w[2] * vn, (w[3] + p) * vn], axis)
    }

    #[inline]
    fn spectral_radius(&self, u: &State<M>, axis: Axis) -> f64 {
        let n = match axis {
            Axis::X => 1,
            Axis::Y => 2,
        };
        (u[n] / u[0]).abs() + self.sound_speed(u)
    }

    fn jacobian(&self, u: &State<M>, axis: Axis) -> Mat<M> {
        let g = self.gamma;
        let w = Self::to_frame(u, axis);
        let (vn, vt) = (w[1] / w[0], w[2] / w[0]);
        let q2 = vn * vn + vt * vt;
        let p = (g - 1.0) * (w[3] - 0.5 * w[0] * q2);
        let h = (w[3] + p) / w[0];
        let a = [
            [0.0, 1.0, 0.0, 0.0],
            [
                0.5 * (g - 1.0) * q2 - vn * vn,
                (3.0 - g) * vn,
                -(g - 1.0) * vt,
                g - 1.0,
            ],
            [-vn * vt, vt, vn, 0.0],
            [
                vn * (0.5 * (g - 1.0) * q2 - h),
                h - (g - 1.0) * vn * vn,
                -(g - 1.0) * vn * vt,
                g * vn,
            ],
        ];
        Self::mat_from_frame(&a, axis)
    }

    fn eigen(&self, u: &State<M>, axis: Axis) -> Eigen<M> {
        let g = self.gamma;
        let w = Self::to_frame(u, axis);
        let (vn, vt) = (w[1] / w[0], w[2] / w[0]);
        let q2 = vn * vn + vt * vt;
        let p = (g - 1.0) * (w[3] - 0.5 * w[0] * q2);
        let a = (g * p / w[0]).sqrt();
        let h = (w[3] + p) / w[0];
        let b1 = (g - 1.0) / (a * a);
        let b2 = 0.5 * b1 * q2;
        // columns are right eigenvectors in the frame
        let rcols = [
            [1.0, vn - a, vt, h - vn * a],
            [1.0, vn, vt, 0.5 * q2],
            [0.0, 0.0, 1.0, vt],
            [1.0, vn + a, vt, h + vn * a],
        ];
        let lrows = [
            [
                0.5 * (b2 + vn / a),
                0.5 * (-b1 * vn - 1.0 / a),
                -0.5 * b1 * vt,
                0.5 * b1,
            ],
            [1.0 - b2, b1 * vn, b1 * vt, -b1],
            [-vt, 0.0, 1.0, 0.0],
            [
                0.5 * (b2 - vn / a),
                0.5 * (-b1 * vn + 1.0 / a),
                -0.5 * b1 * vt,
                0.5 * b1,
            ],
        ];
        let lam4 = [vn - a, vn, vn, vn + a];
        let idx = Self::frame_index(axis);
        let waves = Self::waves();
        let mut r = [[0.0; M]; M];
        let mut l = [[0.0; M]; M];
        let mut lambda = [0.0; M];
        for (k, &wv) in waves.iter().enumerate() {
            lambda[k] = lam4[wv];
            for c in 0..M {
                r[c][k] = rcols[wv][idx[c]];
                l[k][c] = lrows[wv][idx[c]];
            }
        }
        Eigen { r, l, lambda }
    }

    fn mirror(&self, u: &State<M>, axis: Axis) -> State<M> {
        let mut out = *u;
        match axis {
            Axis::X => out[1] = -out[1],
            Axis::Y => {
                assert!(M == 4, "1D Euler has no y-direction");
                out[2] = -out[2]
            }
        }
        out
    }

    fn component_names(&self) -> &'static [&'static str] {
        if M == 3 {
            &["rho", "rho_u", "E"]
        } else {
            &["rho", "rho_u", "rho_v", "E"]
        }
    }
}

/// `(J+, J-)` with `J+- = R diag(max/min(lambda, 0)) R^-1`.
pub fn jacobian_split<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    u: &State<M>,
    axis: Axis,
) -> Result<(Mat<M>, Mat<M>), Error> {
    let e = sys.eigen(u, axis);
    if !e.lambda.iter().all(|l| l.is_finite()) {
        return Err(Error::Domain(format!(
            "flux Jacobian of {:?} has no real eigen-decomposition",
            u.0
        )));
    }
    let mut jp = [[0.0; M]; M];
    let mut jm = [[0.0; M]; M];
    for r in 0..M {
        for c in 0..M {
            let (mut sp, mut sm) = (0.0, 0.0);
            for k in 0..M {
                let rl = e.r[r][k] * e.l[k][c];
                sp += rl * e.lambda[k].max(0.0);
                sm += rl * e.lambda[k].min(0.0);
            }
            jp[r][c] = sp;
            jm[r][c] = sm;
        }
    }
    Ok((jp, jm))
}

/// `J+ dp + J- dm` evaluated through the eigen-decomposition at `u`.
#[inline]
pub fn apply_split_jacobian<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    u: &State<M>,
    axis: Axis,
    dp: &State<M>,
    dm: &State<M>,
) -> State<M> {
    let e = sys.eigen(u, axis);
    let cp = mat_vec(&e.l, dp);
    let cm = mat_vec(&e.l, dm);
    let mut c = [0.0; M];
    for k in 0..M {
        c[k] = e.lambda[k].max(0.0) * cp[k] + e.lambda[k].min(0.0) * cm[k];
    }
    mat_vec(&e.r, &State(c))
}
