//! Cell averages by tensor Gauss-Legendre quadrature.

use super::state::State;

const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Mean of `f` over `[a, b]` with `parts` equal sub-intervals of 3-point
/// Gauss-Legendre quadrature each.
pub fn average_1d<const M: usize>(f: impl Fn(f64) -> State<M>, a: f64, b: f64, parts: usize) -> State<M> {
    let h = (b - a) / parts as f64;
    let mut s = State::zero();
    for p in 0..parts {
        let c = a + (p as f64 + 0.5) * h;
        for q in 0..3 {
            s += f(c + 0.5 * h * GL3_NODES[q]) * GL3_WEIGHTS[q];
        }
    }
    s * (1.0 / parts as f64)
}

/// Mean of `f` over a rectangle with `parts x parts` sub-rectangles.
pub fn average_2d<const M: usize>(
    f: impl Fn(f64, f64) -> State<M>,
    x: (f64, f64),
    y: (f64, f64),
    parts: usize,
) -> State<M> {
    let hx = (x.1 - x.0) / parts as f64;
    let hy = (y.1 - y.0) / parts as f64;
    let mut s = State::zero();
    for py in 0..parts {
        let cy = y.0 + (py as f64 + 0.5) * hy;
        for px in 0..parts {
            let cx = x.0 + (px as f64 + 0.5) * hx;
            for qy in 0..3 {
                for qx in 0..3 {
                    let v = f(cx + 0.5 * hx * GL3_NODES[qx], cy + 0.5 * hy * GL3_NODES[qy]);
                    s += v * (GL3_WEIGHTS[qx] * GL3_WEIGHTS[qy]);
                }
            }
        }
    }
    s * (1.0 / (parts * parts) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_quintics() {
        let f = |x: f64| State([x.powi(5) - 2.0 * x.powi(4) + x]);
        // integral over [0, 2]: 64/6 - 2*32/5 + 2 = 32/3 - 64/5 + 2
        let exact = (32.0 / 3.0 - 64.0 / 5.0 + 2.0) / 2.0;
        assert!((average_1d(f, 0.0, 2.0, 1)[0] - exact).abs() < 1e-14);
        let g = |x: f64, y: f64| State([x * x * y.powi(4)]);
        let exact = (1.0 / 3.0) * (1.0 / 5.0);
        assert!((average_2d(g, (0.0, 1.0), (0.0, 1.0), 1)[0] - exact).abs() < 1e-15);
        assert!((average_2d(g, (0.0, 1.0), (0.0, 1.0), 3)[0] - exact).abs() < 1e-15);
    }
}
