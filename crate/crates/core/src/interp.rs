//! Four-point Lagrange interpolation on uniform grids.

use crate::grid::UniformGrid;

/// Interpolation stencil: first sample index and the four weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub base: usize,
    pub weights: [f64; 4],
}

impl Stencil {
    pub fn apply(&self, values: &[f64]) -> f64 {
        (0..4)
            .map(|m| self.weights[m] * values[self.base + m])
            .sum()
    }
}

/// Cubic Lagrange stencil for `x`, or `None` when `x` lies outside the grid.
///
/// Interior points use the samples `i-1..=i+2` around the enclosing cell
/// `[x_i, x_{i+1}]`; near the edges the stencil is shifted inward.
pub fn cubic_stencil(grid: &UniformGrid, x: f64) -> Option<Stencil> {
    if !grid.contains(x) || grid.len < 4 {
        return None;
    }
    let h = grid.step();
    let u = (x - grid.start) / h;
    let cell = (u.floor() as usize).min(grid.len - 2);
    let base = cell.saturating_sub(1).min(grid.len - 4);
    Some(Stencil {
        base,
        weights: lagrange4(u - base as f64),
    })
}

/// Weights of the cubic through nodes `0, 1, 2, 3`, evaluated at `u`.
pub fn lagrange4(u: f64) -> [f64; 4] {
    let a = u;
    let b = u - 1.0;
    let c = u - 2.0;
    let d = u - 3.0;
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

/// Weights of the polynomial through nodes `0..N`, evaluated at `u`.
pub fn lagrange_weights<const N: usize>(u: f64) -> [f64; N] {
    let mut w = [0.0; N];
    for (m, wm) in w.iter_mut().enumerate() {
        let mut num = 1.0;
        let mut den = 1.0;
        for n in 0..N {
            if n != m {
                num *= u - n as f64;
                den *= m as f64 - n as f64;
            }
        }
        *wm = num / den;
    }
    w
}

/// Six-point (quintic) stencil: first index and weights; `None` outside the
/// grid. Shifted inward near the edges like [`cubic_stencil`].
pub fn quintic_stencil(grid: &UniformGrid, x: f64) -> Option<(usize, [f64; 6])> {
    if !grid.contains(x) || grid.len < 6 {
        return None;
    }
    let u = (x - grid.start) / grid.step();
    let cell = (u.floor() as usize).min(grid.len - 2);
    let base = cell.saturating_sub(2).min(grid.len - 6);
    Some((base, lagrange_weights::<6>(u - base as f64)))
}

/// Bilinear interpolation of a row-major `nx × ny` table; zero outside.
pub fn bilinear(gx: &UniformGrid, gy: &UniformGrid, values: &[f64], x: f64, y: f64) -> f64 {
    if !gx.contains(x) || !gy.contains(y) {
        return 0.0;
    }
    let ux = (x - gx.start) / gx.step();
    let uy = (y - gy.start) / gy.step();
    let i = (ux.floor() as usize).min(gx.len - 2);
    let j = (uy.floor() as usize).min(gy.len - 2);
    let fx = ux - i as f64;
    let fy = uy - j as f64;
    let at = |i: usize, j: usize| values[i * gy.len + j];
    (1.0 - fx) * ((1.0 - fy) * at(i, j) + fy * at(i, j + 1))
        + fx * ((1.0 - fy) * at(i + 1, j) + fy * at(i + 1, j + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let g = UniformGrid::new(-1.0, 2.0, 13).unwrap();
        let f = |x: f64| 0.3 * x * x * x - x * x + 2.0 * x - 0.5;
        let v: Vec<f64> = g.points().into_iter().map(f).collect();
        for &x in &[-1.0, -0.97, 0.0, 0.4, 1.3, 1.99, 2.0] {
            let s = cubic_stencil(&g, x).unwrap();
            assert!((s.apply(&v) - f(x)).abs() < 1e-12, "x = {x}");
        }
        assert!(cubic_stencil(&g, 2.01).is_none());
    }

    #[test]
    fn quintic_reproduces_quintics() {
        let g = UniformGrid::new(-1.0, 2.0, 13).unwrap();
        let f = |x: f64| x.powi(5) - 0.5 * x.powi(4) + x - 1.0;
        let v: Vec<f64> = g.points().into_iter().map(f).collect();
        for &x in &[-1.0, -0.93, 0.1, 1.27, 2.0] {
            let (base, w) = quintic_stencil(&g, x).unwrap();
            let got: f64 = (0..6).map(|m| w[m] * v[base + m]).sum();
            assert!((got - f(x)).abs() < 1e-11, "x = {x}");
        }
        assert_eq!(lagrange_weights::<4>(0.3), lagrange4(0.3).map(|w| w + 0.0));
    }

    #[test]
    fn weights_sum_to_one() {
        for k in 0..=30 {
            let w = lagrange4(k as f64 / 10.0);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bilinear_hits_nodes() {
        let g = UniformGrid::new(0.0, 1.0, 3).unwrap();
        let v = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        assert_eq!(bilinear(&g, &g, &v, 0.5, 1.0), 5.0);
        assert_eq!(bilinear(&g, &g, &v, 0.25, 0.25), 2.0);
        assert_eq!(bilinear(&g, &g, &v, 1.5, 0.0), 0.0);
    }
}
