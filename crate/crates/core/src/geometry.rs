//! Quadrature grids on the ball B_R and direction sets on the unit sphere.
//!
//! The volume rule is a tensor midpoint grid on the bounding cube clipped by
//! a center-in-ball test; cells straddling the boundary keep their full
//! weight when the center is inside. The O(h) boundary error this leaves is
//! below the midpoint error everywhere the pipeline operates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::Dim;

/// Midpoint quadrature nodes inside the open ball of radius `r`.
///
/// Nodes are stored row-major (`d` coordinates per node) in lexicographic
/// cell order, so construction is reproducible bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r: f64,
    h: f64,
    dim: Dim,
}

impl DiskGrid {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.dim.value();
        &self.nodes[i * d..(i + 1) * d]
    }

    pub fn nodes_flat(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn iter_nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim.value())
    }
}

/// Tensor midpoint grid on [-R, R]^d restricted to the open ball |x| < R.
pub fn build_disk_grid(r: f64, n: usize, dim: Dim) -> Result<DiskGrid> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Grid(format!("radius must be positive, got {r}")));
    }
    if n < 8 {
        return Err(Error::Grid(format!("need at least 8 cells per axis, got {n}")));
    }
    let d = dim.value();
    let h = 2.0 * r / n as f64;
    let cell_weight = h.powi(d as i32);
    let coord = |i: usize| -r + (i as f64 + 0.5) * h;

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut push_if_inside = |x: &[f64]| {
        let rho2: f64 = x.iter().map(|v| v * v).sum();
        if rho2 < r * r {
            nodes.extend_from_slice(x);
            weights.push(cell_weight);
        }
    };
    match dim {
        Dim::Two => {
            for i in 0..n {
                for j in 0..n {
                    push_if_inside(&[coord(i), coord(j)]);
                }
            }
        }
        Dim::Three => {
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        push_if_inside(&[coord(i), coord(j), coord(l)]);
                    }
                }
            }
        }
    }
    if weights.is_empty() {
        return Err(Error::Grid("no grid node falls inside the ball".into()));
    }
    Ok(DiskGrid { nodes, weights, r, h, dim })
}

/// Quadrature directions on S^{d-1} with uniform weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    dirs: Vec<f64>,
    weights: Vec<f64>,
    dim: Dim,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dir(&self, i: usize) -> &[f64] {
        let d = self.dim.value();
        &self.dirs[i * d..(i + 1) * d]
    }

    pub fn dirs_flat(&self) -> &[f64] {
        &self.dirs
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn iter_dirs(&self) -> impl Iterator<Item = &[f64]> {
        self.dirs.chunks_exact(self.dim.value())
    }

    /// Polar angle of direction `i` (d = 2 only), for plot output.
    pub fn angle(&self, i: usize) -> f64 {
        let d = self.dir(i);
        d[1].atan2(d[0])
    }
}

/// Equispaced angles on S^1, Fibonacci lattice on S^2; uniform weights.
pub fn build_directions(m: usize, dim: Dim) -> Result<DirectionSet> {
    if m < 4 {
        return Err(Error::Grid(format!("need at least 4 directions, got {m}")));
    }
    let mut dirs = Vec::with_capacity(m * dim.value());
    match dim {
        Dim::Two => {
            let step = 2.0 * std::f64::consts::PI / m as f64;
            for j in 0..m {
                let theta = step * j as f64;
                dirs.push(theta.cos());
                dirs.push(theta.sin());
            }
        }
        Dim::Three => {
            // golden-angle spiral: near-uniform coverage with equal weights
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for j in 0..m {
                let z = 1.0 - 2.0 * (j as f64 + 0.5) / m as f64;
                let rho = (1.0 - z * z).sqrt();
                let phi = golden * j as f64;
                dirs.push(rho * phi.cos());
                dirs.push(rho * phi.sin());
                dirs.push(z);
            }
        }
    }
    let w = dim.sphere_measure() / m as f64;
    Ok(DirectionSet { dirs, weights: vec![w; m], dim })
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_area_d2() {
        let g = build_disk_grid(1.0, 64, Dim::Two).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - PI).abs() / PI < 0.01, "area {total}");
    }

    #[test]
    fn ball_volume_d3() {
        let g = build_disk_grid(1.0, 32, Dim::Three).unwrap();
        let total: f64 = g.weights().iter().sum();
        let exact = 4.0 * PI / 3.0;
        assert!((total - exact).abs() / exact < 0.02, "volume {total}");
    }

    #[test]
    fn x1_squared_integral() {
        // ∫_{B_1} x₁² dx = π/4 in d = 2
        let g = build_disk_grid(1.0, 128, Dim::Two).unwrap();
        let q: f64 = (0..g.len()).map(|i| g.node(i)[0].powi(2) * g.weight(i)).sum();
        assert!((q - PI / 4.0).abs() / (PI / 4.0) < 0.01, "got {q}");
    }

    #[test]
    fn nodes_inside_open_ball() {
        let g = build_disk_grid(2.5, 33, Dim::Two).unwrap();
        for x in g.iter_nodes() {
            assert!(x.iter().map(|v| v * v).sum::<f64>() < 2.5 * 2.5);
        }
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn midpoint_error_is_second_order() {
        // gaussian integrand: error should drop ~4x when n doubles
        let exact = PI * (1.0 - (-1.0f64).exp()); // ∫_{B_1} e^{-|x|²} dx in d=2
        let err = |n: usize| {
            let g = build_disk_grid(1.0, n, Dim::Two).unwrap();
            let q: f64 = (0..g.len())
                .map(|i| {
                    let x = g.node(i);
                    (-(x[0] * x[0] + x[1] * x[1])).exp() * g.weight(i)
                })
                .sum();
            (q - exact).abs()
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 / e2 >= 3.0, "e(64)={e1:.3e} e(128)={e2:.3e}");
    }

    #[test]
    fn rejects_small_inputs() {
        assert!(build_disk_grid(1.0, 4, Dim::Two).is_err());
        assert!(build_disk_grid(-1.0, 64, Dim::Two).is_err());
        assert!(build_directions(3, Dim::Two).is_err());
    }

    #[test]
    fn equispaced_angles_d2() {
        let ds = build_directions(8, Dim::Two).unwrap();
        for j in 0..8 {
            let theta = 2.0 * PI * j as f64 / 8.0;
            assert!((ds.dir(j)[0] - theta.cos()).abs() < 1e-15);
            assert!((ds.dir(j)[1] - theta.sin()).abs() < 1e-15);
            assert!((ds.weight(j) - PI / 4.0).abs() < 1e-15);
        }
        // symmetry: directions sum to the zero vector
        let sx: f64 = (0..8).map(|j| ds.dir(j)[0]).sum();
        let sy: f64 = (0..8).map(|j| ds.dir(j)[1]).sum();
        assert!(sx.abs() < 1e-14 && sy.abs() < 1e-14);
    }

    #[test]
    fn direction_invariants() {
        for (m, dim) in [(16, Dim::Two), (37, Dim::Three)] {
            let ds = build_directions(m, dim).unwrap();
            for d in ds.iter_dirs() {
                let norm: f64 = d.iter().map(|v| v * v).sum::<f64>();
                assert!((norm.sqrt() - 1.0).abs() < 1e-12);
            }
            let total: f64 = ds.weights().iter().sum();
            assert!((total - dim.sphere_measure()).abs() < 1e-10);
        }
    }

    #[test]
    fn cos2_quadrature_exact() {
        // trapezoid rule integrates cos²θ exactly on S^1
        let ds = build_directions(16, Dim::Two).unwrap();
        let q: f64 = (0..16)
            .map(|j| {
                let c = ds.dir(j)[0];
                c * c * ds.weight(j)
            })
            .sum();
        assert!((q - PI).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_direction_quadrature_matches_j0() {
        // ∫_{S^1} e^{-ik x·θ} dθ = 2π J₀(k|x|)
        let ds = build_directions(64, Dim::Two).unwrap();
        let x = [0.6, -0.35];
        for &k in &[1.0, 3.0, 7.0] {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for j in 0..ds.len() {
                let phase = -k * dot(&x, ds.dir(j));
                acc += num_complex::Complex64::from_polar(1.0, phase) * ds.weight(j);
            }
            let kr = k * (x[0] * x[0] + x[1] * x[1]).sqrt();
            if kr <= 5.0 {
                let expect = 2.0 * PI * crate::specfun::bessel_j0(kr).unwrap();
                assert!((acc.re - expect).abs() < 1e-10, "k={k}: {} vs {}", acc.re, expect);
                assert!(acc.im.abs() < 1e-10);
            }
        }
    }
}
