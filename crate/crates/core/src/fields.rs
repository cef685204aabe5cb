//! Herglotz wave synthesis, the volume potential, and far-field extraction.
//!
//! One sign convention is used everywhere: plane waves enter as
//! `e^{-ik x·θ}`, both in the incident-field synthesis
//!
//! ```text
//! v_g(x) = ∫_{S^{d-1}} e^{-ik x·θ} g(θ) ds(θ)
//! ```
//!
//! and in the far-field map `u^∞(x̂) = ∫ e^{-ik x̂·y} f(y) dy`. The direction
//! sets in use are sign-symmetric, so this loses no generality and removes a
//! whole class of phase bugs.
//!
//! The volume potential `V[f](x) = ∫ Φ(x,y) f(y) dy` is discretized by the
//! Nyström midpoint rule. When the target is a quadrature node the singular
//! cell is replaced by the closed-form integral of Φ over the ball of equal
//! volume, which restores second-order convergence.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, DirectionSet, DiskGrid};
use crate::linalg::{self, CMat};
use crate::specfun::{self, Dim, WaveContext, EULER_GAMMA};

/// Beyond this node count the dense volume operator is no longer
/// materialized and `VolumeOp` falls back to on-the-fly summation.
pub const DENSE_NODE_LIMIT: usize = 20_000;

/// Complex samples of a field on the nodes of a [`DiskGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    grid: Arc<DiskGrid>,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zero(grid: Arc<DiskGrid>) -> Self {
        let n = grid.len();
        ComplexField { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_values(grid: Arc<DiskGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Precondition("field contains non-finite values".into()));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn from_fn(grid: Arc<DiskGrid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = grid.iter_nodes().map(f).collect();
        ComplexField { grid, values }
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Weighted L²(B_R) norm using the grid quadrature.
    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    pub fn same_grid(&self, other: &ComplexField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    pub fn add(&self, other: &ComplexField) -> ComplexField {
        assert!(self.same_grid(other));
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        ComplexField { grid: self.grid.clone(), values }
    }

    pub fn sub(&self, other: &ComplexField) -> ComplexField {
        assert!(self.same_grid(other));
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        ComplexField { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, s: Complex64) -> ComplexField {
        let values = self.values.iter().map(|v| v * s).collect();
        ComplexField { grid: self.grid.clone(), values }
    }

    /// Pointwise product, used to form sources q·u.
    pub fn mul(&self, other: &ComplexField) -> ComplexField {
        assert!(self.same_grid(other));
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        ComplexField { grid: self.grid.clone(), values }
    }
}

/// Herglotz density: samples of g on a direction set, with cached norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HerglotzDensity {
    dirs: Arc<DirectionSet>,
    values: Vec<Complex64>,
    norm_sup: f64,
    norm_l2: f64,
}

impl HerglotzDensity {
    pub fn new(dirs: Arc<DirectionSet>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != dirs.len() {
            return Err(Error::Precondition(format!(
                "density has {} samples but the direction set has {} directions",
                values.len(),
                dirs.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Precondition("density contains non-finite values".into()));
        }
        let (norm_sup, norm_l2) = Self::norms_of(&dirs, &values);
        Ok(HerglotzDensity { dirs, values, norm_sup, norm_l2 })
    }

    fn norms_of(dirs: &DirectionSet, values: &[Complex64]) -> (f64, f64) {
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let l2 = values
            .iter()
            .zip(dirs.weights())
            .map(|(v, w)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt();
        (sup, l2)
    }

    pub fn directions(&self) -> &Arc<DirectionSet> {
        &self.dirs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm_sup(&self) -> f64 {
        self.norm_sup
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2
    }

    /// Recomputes the cached norms from the samples (consistency probe).
    pub fn recompute_norms(&self) -> (f64, f64) {
        Self::norms_of(&self.dirs, &self.values)
    }

    pub fn scale(&self, s: Complex64) -> HerglotzDensity {
        let values: Vec<Complex64> = self.values.iter().map(|v| v * s).collect();
        let (norm_sup, norm_l2) = Self::norms_of(&self.dirs, &values);
        HerglotzDensity { dirs: self.dirs.clone(), values, norm_sup, norm_l2 }
    }

    /// Σ cᵢ gᵢ over densities sharing one direction set.
    pub fn linear_combination(
        terms: &[(Complex64, &HerglotzDensity)],
    ) -> Result<HerglotzDensity> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Precondition("empty linear combination".into()))?;
        let dirs = first.1.dirs.clone();
        let mut values = vec![Complex64::new(0.0, 0.0); dirs.len()];
        for (c, g) in terms {
            if g.dirs.len() != dirs.len() || **g.dirs != *dirs {
                return Err(Error::Precondition(
                    "densities in a combination must share one direction set".into(),
                ));
            }
            for (acc, v) in values.iter_mut().zip(&g.values) {
                *acc += c * v;
            }
        }
        HerglotzDensity::new(dirs, values)
    }
}

/// Complex far-field samples on observation directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    obs: Arc<DirectionSet>,
    values: Vec<Complex64>,
}

impl FarField {
    pub fn new(obs: Arc<DirectionSet>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != obs.len() {
            return Err(Error::Precondition(format!(
                "far field has {} samples but {} observation directions",
                values.len(),
                obs.len()
            )));
        }
        Ok(FarField { obs, values })
    }

    pub fn zero(obs: Arc<DirectionSet>) -> Self {
        let n = obs.len();
        FarField { obs, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn observations(&self) -> &Arc<DirectionSet> {
        &self.obs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.obs.weights())
            .map(|(v, w)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &FarField) -> FarField {
        assert_eq!(self.values.len(), other.values.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        FarField { obs: self.obs.clone(), values }
    }

    pub fn add(&self, other: &FarField) -> FarField {
        assert_eq!(self.values.len(), other.values.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        FarField { obs: self.obs.clone(), values }
    }

    pub fn scale(&self, s: Complex64) -> FarField {
        FarField {
            obs: self.obs.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// Herglotz wave `v_g(x) = Σ_j e^{-ik x·θ_j} g_j w_j` at arbitrary targets.
pub fn herglotz_wave(
    g: &HerglotzDensity,
    ctx: &WaveContext,
    targets: &[f64],
) -> Result<Vec<Complex64>> {
    let d = ctx.dim.value();
    if g.directions().dim() != ctx.dim {
        return Err(Error::Precondition("density dimension differs from context".into()));
    }
    if targets.len() % d != 0 {
        return Err(Error::Precondition("target buffer length is not a multiple of d".into()));
    }
    let ds = g.directions();
    let mut out = Vec::with_capacity(targets.len() / d);
    for x in targets.chunks_exact(d) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, theta) in ds.iter_dirs().enumerate() {
            let phase = -ctx.k * dot(x, theta);
            acc += Complex64::from_polar(1.0, phase) * g.values()[j] * ds.weight(j);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Herglotz wave restricted to grid nodes.
pub fn herglotz_on_grid(
    g: &HerglotzDensity,
    ctx: &WaveContext,
    grid: &Arc<DiskGrid>,
) -> Result<ComplexField> {
    let values = herglotz_wave(g, ctx, grid.nodes_flat())?;
    ComplexField::from_values(grid.clone(), values)
}

/// Closed-form integral of Φ over the ball of volume `w` centered at the
/// singularity. d = 3 is elementary; d = 2 integrates the ascending series
/// of H₀⁽¹⁾ through the x²·ln x term.
pub fn selfcell_integral(w: f64, ctx: &WaveContext) -> Complex64 {
    let k = ctx.k;
    match ctx.dim {
        Dim::Three => {
            // ∫_{B_ρ} e^{ikr}/(4πr) dy = ∫_0^ρ r e^{ikr} dr
            let rho = (3.0 * w / (4.0 * std::f64::consts::PI)).cbrt();
            let ik = Complex64::new(0.0, k);
            let e = Complex64::from_polar(1.0, k * rho);
            rho * e / ik - (e - 1.0) / (ik * ik)
        }
        Dim::Two => {
            // (i/4)·2π·∫_0^ρ H₀⁽¹⁾(kr) r dr with the series truncated after x²ln x
            let rho = (w / std::f64::consts::PI).sqrt();
            let l = (0.5 * k * rho).ln() + EULER_GAMMA;
            let r2 = rho * rho;
            let kr4 = k * k * r2 * r2;
            let ij0 = 0.5 * r2 - kr4 / 16.0;
            let iy0 = std::f64::consts::FRAC_2_PI
                * (l * (0.5 * r2 - kr4 / 16.0) - 0.25 * r2 + kr4 / 64.0 + kr4 / 16.0);
            let half_pi = 0.5 * std::f64::consts::PI;
            Complex64::new(-half_pi * iy0, half_pi * ij0)
        }
    }
}

/// Dense Nyström matrix of the volume potential on a grid: row i evaluates
/// V[·] at node i, with the corrected diagonal.
pub fn volume_matrix(grid: &DiskGrid, ctx: &WaveContext) -> Result<CMat> {
    let n = grid.len();
    let mut m = CMat::zeros(n, n);
    for j in 0..n {
        let yj = grid.node(j);
        let wj = grid.weight(j);
        for i in 0..n {
            m[(i, j)] = if i == j {
                selfcell_integral(wj, ctx)
            } else {
                specfun::fundamental_solution(grid.node(i), yj, ctx)? * wj
            };
        }
    }
    Ok(m)
}

/// Volume potential applied on its own grid, dense or matrix-free.
pub enum VolumeOp {
    Dense { grid: Arc<DiskGrid>, matrix: CMat },
    Lazy { grid: Arc<DiskGrid>, ctx: WaveContext },
}

impl VolumeOp {
    pub fn new(grid: Arc<DiskGrid>, ctx: &WaveContext) -> Result<Self> {
        if grid.len() <= DENSE_NODE_LIMIT {
            let matrix = volume_matrix(&grid, ctx)?;
            Ok(VolumeOp::Dense { grid, matrix })
        } else {
            Ok(VolumeOp::Lazy { grid, ctx: *ctx })
        }
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        match self {
            VolumeOp::Dense { grid, .. } | VolumeOp::Lazy { grid, .. } => grid,
        }
    }

    pub fn dense(&self) -> Option<&CMat> {
        match self {
            VolumeOp::Dense { matrix, .. } => Some(matrix),
            VolumeOp::Lazy { .. } => None,
        }
    }

    pub fn apply(&self, f: &ComplexField) -> ComplexField {
        match self {
            VolumeOp::Dense { grid, matrix } => {
                assert!(f.grid() == grid || **f.grid() == **grid);
                let values = linalg::matvec(matrix, f.values());
                ComplexField { grid: grid.clone(), values }
            }
            VolumeOp::Lazy { grid, ctx } => {
                let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
                for (i, out) in values.iter_mut().enumerate() {
                    let xi = grid.node(i);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..grid.len() {
                        let term = if i == j {
                            selfcell_integral(grid.weight(j), ctx)
                        } else {
                            specfun::fundamental_solution(xi, grid.node(j), ctx).unwrap()
                                * grid.weight(j)
                        };
                        acc += term * f.values()[j];
                    }
                    *out = acc;
                }
                ComplexField { grid: grid.clone(), values }
            }
        }
    }
}

/// `V[f]` at arbitrary targets. A target that coincides with a source node
/// gets the analytic self-cell term; everything else is plain midpoint.
pub fn volume_potential(
    f: &ComplexField,
    ctx: &WaveContext,
    targets: &[f64],
) -> Result<Vec<Complex64>> {
    let d = ctx.dim.value();
    if targets.len() % d != 0 {
        return Err(Error::Precondition("target buffer length is not a multiple of d".into()));
    }
    let grid = f.grid();
    let mut out = Vec::with_capacity(targets.len() / d);
    for x in targets.chunks_exact(d) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, y) in grid.iter_nodes().enumerate() {
            let term = if x == y {
                selfcell_integral(grid.weight(j), ctx)
            } else {
                specfun::fundamental_solution(x, y, ctx)? * grid.weight(j)
            };
            acc += term * f.values()[j];
        }
        out.push(acc);
    }
    Ok(out)
}

/// Far-field map matrix `F_ij = e^{-ik x̂_i·y_j} w_j`.
pub fn farfield_matrix(grid: &DiskGrid, obs: &DirectionSet, ctx: &WaveContext) -> CMat {
    CMat::from_fn(obs.len(), grid.len(), |i, j| {
        let phase = -ctx.k * dot(obs.dir(i), grid.node(j));
        Complex64::from_polar(grid.weight(j), phase)
    })
}

/// Scattering amplitude of a compactly supported source.
pub fn far_field_of_source(
    f: &ComplexField,
    ctx: &WaveContext,
    obs: &Arc<DirectionSet>,
) -> FarField {
    let mut values = Vec::with_capacity(obs.len());
    for xhat in obs.iter_dirs() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, y) in f.grid().iter_nodes().enumerate() {
            let phase = -ctx.k * dot(xhat, y);
            acc += Complex64::from_polar(f.grid().weight(j), phase) * f.values()[j];
        }
        values.push(acc);
    }
    FarField { obs: obs.clone(), values }
}

/// Far field at a single direction, for the radiation check.
fn far_field_at(f: &ComplexField, ctx: &WaveContext, xhat: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, y) in f.grid().iter_nodes().enumerate() {
        let phase = -ctx.k * dot(xhat, y);
        acc += Complex64::from_polar(f.grid().weight(j), phase) * f.values()[j];
    }
    acc
}

/// Residual decay of `V[f]` against its leading radiating term.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    /// log-log regression slope; `None` when the source radiates nothing.
    pub slope: Option<f64>,
}

/// Measures `ρ(r) = |V[f](r x̂) - C_d e^{ikr} r^{-(d-1)/2} u^∞(x̂)|` along one
/// direction and fits its decay rate.
pub fn verify_radiation(
    f: &ComplexField,
    ctx: &WaveContext,
    radii: &[f64],
    xhat: &[f64],
) -> Result<DecayReport> {
    if radii.len() < 3 {
        return Err(Error::Precondition("need at least 3 radii for a decay fit".into()));
    }
    let r_support = f.grid().radius();
    let mut prev = 0.0;
    for &r in radii {
        if r <= 2.0 * r_support {
            return Err(Error::Precondition(format!(
                "radius {r} is not beyond twice the support radius {r_support}"
            )));
        }
        if r <= prev {
            return Err(Error::Precondition("radii must be increasing".into()));
        }
        prev = r;
    }
    let d = ctx.dim.value();
    let nrm: f64 = xhat.iter().map(|v| v * v).sum::<f64>();
    if (nrm.sqrt() - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition("observation direction must be a unit vector".into()));
    }

    let cd = specfun::farfield_constant(ctx);
    let uinf = far_field_at(f, ctx, xhat);
    let mut residuals = Vec::with_capacity(radii.len());
    for &r in radii {
        let target: Vec<f64> = xhat.iter().map(|v| v * r).collect();
        let u = volume_potential(f, ctx, &target)?[0];
        let lead = cd * Complex64::from_polar(1.0, ctx.k * r) * r.powf(-0.5 * (d as f64 - 1.0))
            * uinf;
        residuals.push((u - lead).norm());
    }

    let scale = f.sup_norm();
    let slope = if residuals.iter().all(|&r| r <= 1e-14 * scale.max(1e-300)) {
        None
    } else {
        let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let ly: Vec<f64> = residuals.iter().map(|r| r.max(1e-300).ln()).collect();
        Some(linalg::regression_slope(&lx, &ly))
    };
    Ok(DecayReport { radii: radii.to_vec(), residuals, slope })
}

/// Interior Helmholtz residual `|Δu + k²u + f| / sup|f|` of `u = V[f]`.
///
/// The Laplacian is a 5-point (d=2) or 7-point (d=3) stencil on an auxiliary
/// grid refined 4x from `base`, so the stencil spacing is `h/4` and every
/// stencil point is itself a quadrature node of the fine rule. Evaluating at
/// nodes keeps the Nyström error field smooth across the stencil, which an
/// off-node stencil would not.
pub fn helmholtz_residuals(
    f: impl Fn(&[f64]) -> Complex64,
    base: &DiskGrid,
    ctx: &WaveContext,
    n_points: usize,
) -> Result<Vec<f64>> {
    const REFINE: usize = 4;
    let d = ctx.dim.value();
    let r = base.radius();
    let n_fine = {
        let n_base = (2.0 * r / base.spacing()).round() as usize;
        n_base * REFINE
    };
    let fine = Arc::new(crate::geometry::build_disk_grid(r, n_fine, base.dim())?);
    let hf = fine.spacing();
    let src = ComplexField::from_fn(fine.clone(), &f);
    let scale = src.sup_norm().max(f64::MIN_POSITIVE);

    // node lookup by quantized cell index
    let quantize = |x: &[f64]| -> Vec<i64> {
        x.iter().map(|&c| ((c + r) / hf - 0.5).round() as i64).collect()
    };
    let mut index = std::collections::BTreeMap::new();
    for (i, x) in fine.iter_nodes().enumerate() {
        index.insert(quantize(x), i);
    }

    // test points on a ring at 0.4R, snapped to fine nodes
    let mut test_nodes = Vec::new();
    for p in 0..n_points {
        let angle = 2.0 * std::f64::consts::PI * p as f64 / n_points as f64;
        let mut want = vec![0.0; d];
        want[0] = 0.4 * r * angle.cos();
        want[1] = 0.4 * r * angle.sin();
        let key = quantize(&want);
        let idx = index.get(&key).copied().ok_or_else(|| {
            Error::Grid("test point does not map to a fine-grid node".into())
        })?;
        if !test_nodes.contains(&idx) {
            test_nodes.push(idx);
        }
    }

    let eval_at = |i: usize| -> Complex64 {
        let xi = fine.node(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..fine.len() {
            let term = if i == j {
                selfcell_integral(fine.weight(j), ctx)
            } else {
                specfun::fundamental_solution(xi, fine.node(j), ctx).unwrap() * fine.weight(j)
            };
            acc += term * src.values()[j];
        }
        acc
    };

    let mut residuals = Vec::with_capacity(test_nodes.len());
    for &i0 in &test_nodes {
        let x0 = fine.node(i0).to_vec();
        let u0 = eval_at(i0);
        let mut lap = Complex64::new(0.0, 0.0);
        for axis in 0..d {
            for sign in [-1.0, 1.0] {
                let mut xn = x0.clone();
                xn[axis] += sign * hf;
                let idx = index.get(&quantize(&xn)).copied().ok_or_else(|| {
                    Error::Grid("stencil neighbor left the grid; move test points inward".into())
                })?;
                lap += eval_at(idx);
            }
            lap -= 2.0 * u0;
        }
        lap /= hf * hf;
        let resid = lap + ctx.k * ctx.k * u0 + f(&x0);
        residuals.push(resid.norm() / scale);
    }
    Ok(residuals)
}
