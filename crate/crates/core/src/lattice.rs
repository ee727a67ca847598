//! Periodic grids, spinor fields, spectral transforms and the diagnostics
//! shared by every solver.
//!
//! Storage is component-major: component `c` of a field occupies
//! `values[c * npts .. (c + 1) * npts]`, and grid points are ordered with
//! `x` fastest.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::clifford::GammaRepresentation;
use crate::descent::DescentDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<usize>,
    lengths: Vec<f64>,
}

impl Grid {
    pub fn new(points: &[usize], lengths: &[f64]) -> Result<Self> {
        if !(2..=3).contains(&points.len()) || points.len() != lengths.len() {
            return Err(Error::GridMismatch(format!(
                "grid needs 2 or 3 axes with matching lengths, got {} points / {} lengths",
                points.len(),
                lengths.len()
            )));
        }
        if let Some(&n) = points.iter().find(|&&n| n == 0 || n % 2 != 0) {
            return Err(Error::OutOfRange {
                what: "points per axis (positive even)",
                value: n.to_string(),
            });
        }
        if let Some(&l) = lengths.iter().find(|&&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::OutOfRange {
                what: "box length",
                value: l.to_string(),
            });
        }
        Ok(Self {
            points: points.to_vec(),
            lengths: lengths.to_vec(),
        })
    }

    pub fn square(points: usize, length: f64) -> Result<Self> {
        Self::new(&[points, points], &[length, length])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Points along `axis`; 1 for the missing `z` axis of a planar grid.
    pub fn n(&self, axis: usize) -> usize {
        self.points.get(axis).copied().unwrap_or(1)
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n(0) * (iy + self.n(1) * iz)
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let (nx, ny) = (self.n(0), self.n(1));
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let i = self.unravel(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            x[a] = i[a] as f64 * self.spacing(a);
        }
        x
    }

    /// Standard FFT wavenumber of index `i` along `axis`; the Nyquist index
    /// maps to `-π/h`.
    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        let n = self.points[axis] as i64;
        let i = i as i64;
        let m = if i < n / 2 { i } else { i - n };
        2.0 * std::f64::consts::PI * m as f64 / self.lengths[axis]
    }

    /// Wavenumber used for first derivatives of real fields: the Nyquist
    /// mode is dropped so derivatives of real data stay real.
    pub fn derivative_wavenumber(&self, axis: usize, i: usize) -> f64 {
        if i == self.points[axis] / 2 {
            0.0
        } else {
            self.wavenumber(axis, i)
        }
    }

    /// Wavevector of flattened mode `idx`, padded with `k_z = 0` on planar
    /// grids.
    pub fn mode(&self, idx: usize) -> [f64; 3] {
        let i = self.unravel(idx);
        let mut k = [0.0; 3];
        for a in 0..self.dim() {
            k[a] = self.wavenumber(a, i[a]);
        }
        k
    }

    pub fn derivative_mode(&self, idx: usize) -> [f64; 3] {
        let i = self.unravel(idx);
        let mut k = [0.0; 3];
        for a in 0..self.dim() {
            k[a] = self.derivative_wavenumber(a, i[a]);
        }
        k
    }

    /// The `(x, y)` plane of a 3D grid.
    pub fn planar(&self) -> Result<Self> {
        Self::new(&self.points[..2], &self.lengths[..2])
    }

    /// Extends a planar grid along `z`.
    pub fn extruded(&self, nz: usize, lz: f64) -> Result<Self> {
        Self::new(&[self.points[0], self.points[1], nz], &[self.lengths[0], self.lengths[1], lz])
    }

    pub fn same_plane(&self, other: &Self) -> bool {
        self.points[..2] == other.points[..2] && self.lengths[..2] == other.lengths[..2]
    }

    /// Flattened index within the `(x, y)` plane of grid point `idx`.
    pub fn plane_index(&self, idx: usize) -> usize {
        idx % (self.n(0) * self.n(1))
    }

    /// Minimum-image displacement `x - c` on the torus.
    pub fn displacement(&self, idx: usize, center: &[f64]) -> [f64; 3] {
        let x = self.coords(idx);
        let mut d = [0.0; 3];
        for a in 0..self.dim().min(center.len()) {
            let l = self.lengths[a];
            let mut v = x[a] - center[a];
            v -= l * (v / l).round();
            d[a] = v;
        }
        d
    }
}

/// Multi-dimensional complex FFT over a grid, one 1D plan per axis.
#[derive(Clone)]
pub struct FftPlan {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPlan").field("grid", &self.grid).finish()
    }
}

impl FftPlan {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: grid.clone(),
            forward: grid.points().iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: grid.points().iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Unnormalized forward DFT of one scalar array, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        for axis in 0..self.grid.dim() {
            self.transform_axis(data, axis, &self.forward[axis]);
        }
    }

    /// Inverse DFT including the `1/N` normalization, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for axis in 0..self.grid.dim() {
            self.transform_axis(data, axis, &self.inverse[axis]);
        }
        let s = 1.0 / self.grid.len() as f64;
        par::for_each_mut(data, |_, z| *z *= s);
    }

    fn transform_axis(&self, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n(axis);
        let total = data.len();
        assert_eq!(total, self.grid.len(), "array does not match grid");
        let stride: usize = self.grid.points()[..axis].iter().product();
        let lines_per_task = (4096 / n).max(1);
        if stride == 1 {
            par::for_each_chunk(data, n * lines_per_task, |_, chunk| fft.process(chunk));
            return;
        }
        let mut lines = par::map_range(total, |k| {
            let (line, j) = (k / n, k % n);
            let (outer, inner) = (line / stride, line % stride);
            data[outer * stride * n + j * stride + inner]
        });
        par::for_each_chunk(&mut lines, n * lines_per_task, |_, chunk| fft.process(chunk));
        par::for_each_mut(data, |idx, z| {
            let inner = idx % stride;
            let j = (idx / stride) % n;
            let outer = idx / (stride * n);
            *z = lines[(outer * stride + inner) * n + j];
        });
    }
}

/// Spectral derivatives of real scalar and vector fields on a grid. Missing
/// axes (z on a planar grid) have zero derivative.
#[derive(Debug, Clone)]
pub struct Spectral {
    plan: FftPlan,
    dk: Vec<[f64; 3]>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        Self {
            plan: FftPlan::new(grid),
            dk: (0..grid.len()).map(|i| grid.derivative_mode(i)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.plan.grid()
    }

    pub fn plan(&self) -> &FftPlan {
        &self.plan
    }

    pub fn to_spectral(&self, f: &[f64]) -> Vec<Complex64> {
        let mut z: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.plan.forward(&mut z);
        z
    }

    pub fn to_real(&self, mut z: Vec<Complex64>) -> Vec<f64> {
        self.plan.inverse(&mut z);
        z.into_iter().map(|c| c.re).collect()
    }

    pub fn derivative(&self, f: &[f64], axis: usize) -> Vec<f64> {
        if axis >= self.grid().dim() {
            return vec![0.0; f.len()];
        }
        let mut z = self.to_spectral(f);
        par::for_each_mut(&mut z, |i, c| *c *= Complex64::new(0.0, self.dk[i][axis]));
        self.to_real(z)
    }

    pub fn divergence(&self, v: [&[f64]; 3]) -> Vec<f64> {
        let hats: Vec<Vec<Complex64>> = (0..self.grid().dim()).map(|a| self.to_spectral(v[a])).collect();
        let out = par::map_range(self.grid().len(), |i| {
            let mut acc = ZERO;
            for (a, h) in hats.iter().enumerate() {
                acc += h[i] * Complex64::new(0.0, self.dk[i][a]);
            }
            acc
        });
        self.to_real(out)
    }

    /// `∇ × v` with `∂_z = 0` on planar grids.
    pub fn curl(&self, v: [&[f64]; 3]) -> [Vec<f64>; 3] {
        let h = [self.to_spectral(v[0]), self.to_spectral(v[1]), self.to_spectral(v[2])];
        let comp = |a: usize| {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let out = par::map_range(self.grid().len(), |i| {
                let k = self.dk[i];
                Complex64::new(0.0, 1.0) * (h[c][i] * k[b] - h[b][i] * k[c])
            });
            self.to_real(out)
        };
        [comp(0), comp(1), comp(2)]
    }

    /// `∇ × ∇ × v` with derivative wavenumbers; its divergence vanishes
    /// mode by mode.
    pub fn curl_curl(&self, v: [&[f64]; 3]) -> [Vec<f64>; 3] {
        let h = [self.to_spectral(v[0]), self.to_spectral(v[1]), self.to_spectral(v[2])];
        let comp = |a: usize| {
            let out = par::map_range(self.grid().len(), |i| {
                let k = self.dk[i];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let kdotv = h[0][i] * k[0] + h[1][i] * k[1] + h[2][i] * k[2];
                h[a][i] * k2 - kdotv * k[a]
            });
            self.to_real(out)
        };
        [comp(0), comp(1), comp(2)]
    }

    /// Laplacian with the full (Nyquist-including) wavenumbers.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let grid = self.grid().clone();
        let mut z = self.to_spectral(f);
        par::for_each_mut(&mut z, |i, c| {
            let k = grid.mode(i);
            *c *= -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        });
        self.to_real(z)
    }

    /// Longitudinal field `E = -∇φ` with `∇²φ = -(ρ - ρ̄)`, i.e. the Gauss-law
    /// solution with a uniform neutralizing background.
    pub fn gauss_field(&self, rho: &[f64]) -> [Vec<f64>; 3] {
        let rhat = self.to_spectral(rho);
        let comp = |a: usize| {
            let out = par::map_range(self.grid().len(), |i| {
                let k = self.dk[i];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if k2 == 0.0 {
                    ZERO
                } else {
                    // Ê = -i k ρ̂ / k²
                    Complex64::new(0.0, -k[a] / k2) * rhat[i]
                }
            });
            self.to_real(out)
        };
        [comp(0), comp(1), comp(2)]
    }

    /// Removes the part of `ρ` that the derivative operators cannot see
    /// (the mean and the Nyquist modes).
    pub fn visible_part(&self, f: &[f64]) -> Vec<f64> {
        let mut z = self.to_spectral(f);
        par::for_each_mut(&mut z, |i, c| {
            let k = self.dk[i];
            if k[0] == 0.0 && k[1] == 0.0 && k[2] == 0.0 {
                *c = ZERO;
            }
        });
        self.to_real(z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: Grid,
    pub components: usize,
    pub values: Vec<Complex64>,
    pub mass: f64,
    pub charge: f64,
}

impl SpinorField {
    pub fn zeros(grid: &Grid, components: usize, mass: f64, charge: f64) -> Self {
        Self {
            grid: grid.clone(),
            components,
            values: vec![ZERO; components * grid.len()],
            mass,
            charge,
        }
    }

    pub fn from_fn(
        grid: &Grid,
        components: usize,
        mass: f64,
        charge: f64,
        f: impl Fn([f64; 3]) -> Vec<Complex64>,
    ) -> Self {
        let mut psi = Self::zeros(grid, components, mass, charge);
        for idx in 0..grid.len() {
            let s = f(grid.coords(idx));
            psi.set_spinor(idx, &s);
        }
        psi
    }

    pub fn npts(&self) -> usize {
        self.grid.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.npts();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.npts();
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn spinor(&self, idx: usize) -> Vec<Complex64> {
        let n = self.npts();
        (0..self.components).map(|c| self.values[c * n + idx]).collect()
    }

    pub fn set_spinor(&mut self, idx: usize, s: &[Complex64]) {
        assert_eq!(s.len(), self.components);
        let n = self.npts();
        for (c, &z) in s.iter().enumerate() {
            self.values[c * n + idx] = z;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.is_finite())
    }

    pub fn scale(&mut self, s: Complex64) {
        par::for_each_mut(&mut self.values, |_, z| *z *= s);
    }

    /// Applies the same matrix at every grid point.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Self {
        assert_eq!(m.dim(), self.components);
        let mut out = self.clone();
        let n = self.npts();
        let nc = self.components;
        let points: Vec<Vec<Complex64>> = par::map_range(n, |idx| {
            let s: Vec<Complex64> = (0..nc).map(|c| self.values[c * n + idx]).collect();
            m.matvec(&s)
        });
        for (idx, s) in points.iter().enumerate() {
            out.set_spinor(idx, s);
        }
        out
    }

    /// Pointwise `|ψ|²`.
    pub fn density(&self) -> Vec<f64> {
        let n = self.npts();
        par::map_range(n, |idx| (0..self.components).map(|c| self.values[c * n + idx].norm_sqr()).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `sqrt(∫|ψ|²)`.
    pub fn l2_norm(&self) -> f64 {
        total_charge(self).sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.l2_norm();
        if n > 0.0 {
            self.scale(Complex64::new(1.0 / n, 0.0));
        }
    }

    /// The `z = iz` plane of a 3D field as a planar field.
    pub fn z_slice(&self, iz: usize) -> Result<Self> {
        if self.grid.dim() != 3 {
            return Err(Error::GridMismatch("z_slice requires a 3D field".into()));
        }
        let plane = self.grid.planar()?;
        let np = plane.len();
        let mut out = Self::zeros(&plane, self.components, self.mass, self.charge);
        for c in 0..self.components {
            out.component_mut(c)
                .copy_from_slice(&self.component(c)[iz * np..(iz + 1) * np]);
        }
        Ok(out)
    }

    /// Replicates a planar field along `z`.
    pub fn extrude(&self, grid3: &Grid) -> Result<Self> {
        if self.grid.dim() != 2 || grid3.dim() != 3 || !grid3.same_plane(&self.grid) {
            return Err(Error::GridMismatch("extrude needs a planar field and a matching 3D grid".into()));
        }
        let mut out = Self::zeros(grid3, self.components, self.mass, self.charge);
        let np = self.npts();
        for c in 0..self.components {
            let src = self.component(c);
            for (idx, z) in out.component_mut(c).iter_mut().enumerate() {
                *z = src[idx % np];
            }
        }
        Ok(out)
    }

    /// Largest deviation of any z-slice from the `iz = 0` slice.
    pub fn z_variation(&self) -> f64 {
        if self.grid.dim() != 3 {
            return 0.0;
        }
        let np = self.grid.n(0) * self.grid.n(1);
        let mut worst: f64 = 0.0;
        for c in 0..self.components {
            let comp = self.component(c);
            for (idx, z) in comp.iter().enumerate() {
                worst = worst.max((z - comp[idx % np]).norm());
            }
        }
        worst
    }
}

/// Electromagnetic state in potential form. `potential[0]` is `A⁰`;
/// `momenta[i]` is `∂ₜAⁱ⁺¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFieldState {
    pub grid: Grid,
    pub potential: [Vec<f64>; 4],
    pub momenta: [Vec<f64>; 3],
}

impl GaugeFieldState {
    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid: grid.clone(),
            potential: [z.clone(), z.clone(), z.clone(), z.clone()],
            momenta: [z.clone(), z.clone(), z],
        }
    }

    pub fn vector_potential(&self) -> [&[f64]; 3] {
        [&self.potential[1], &self.potential[2], &self.potential[3]]
    }

    /// `max |A⁰|`; zero in temporal gauge.
    pub fn temporal_gauge_residual(&self) -> f64 {
        self.potential[0].iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `E = −∂ₜA − ∇A⁰`.
    pub fn electric(&self, spectral: &Spectral) -> [Vec<f64>; 3] {
        std::array::from_fn(|a| {
            let grad = spectral.derivative(&self.potential[0], a);
            self.momenta[a].iter().zip(grad).map(|(p, g)| -p - g).collect()
        })
    }

    /// `B = ∇ × A`.
    pub fn magnetic(&self, spectral: &Spectral) -> [Vec<f64>; 3] {
        spectral.curl(self.vector_potential())
    }

    /// `½∫(E² + B²)`.
    pub fn energy(&self, spectral: &Spectral) -> f64 {
        let e = self.electric(spectral);
        let b = self.magnetic(spectral);
        let sum: f64 = e.iter().chain(b.iter()).flat_map(|f| f.iter()).map(|x| x * x).sum();
        0.5 * sum * self.grid.cell_volume()
    }

    pub fn is_finite(&self) -> bool {
        self.potential.iter().chain(self.momenta.iter()).flatten().all(|x| x.is_finite())
    }
}

/// `∫ Ψ†Ψ` as a spacing-weighted periodic sum.
pub fn total_charge(psi: &SpinorField) -> f64 {
    psi.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * psi.grid.cell_volume()
}

/// `∫ (|Ψ₊|² − |Ψ₋|²) = ∫ Ψ†κ³Ψ`.
pub fn kappa3_charge(psi: &SpinorField, decomp: &DescentDecomposition) -> Result<f64> {
    if psi.components != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: psi.components,
        });
    }
    let n = psi.npts();
    let k = &decomp.kappa3;
    let sum: f64 = (0..n)
        .map(|idx| {
            let s = psi.spinor(idx);
            k.sandwich(&s, &s).re
        })
        .sum();
    Ok(sum * psi.grid.cell_volume())
}

/// `∫ |P ψ|²` for a constant matrix `P`.
pub fn projected_charge(psi: &SpinorField, p: &ComplexMatrix) -> f64 {
    total_charge(&psi.apply_matrix(p))
}

/// Pointwise `j^μ = Ψ̄γ^μΨ`, one real array per spacetime index.
pub fn spinor_current_field(psi: &SpinorField, rep: &GammaRepresentation) -> Result<Vec<Vec<f64>>> {
    if psi.components != rep.order() {
        return Err(Error::DimensionMismatch {
            expected: rep.order(),
            found: psi.components,
        });
    }
    let g0 = rep.gamma(0);
    let mats: Vec<ComplexMatrix> = rep.gammas().iter().map(|g| g0 * g).collect();
    let n = psi.npts();
    let per_point: Vec<Vec<f64>> = par::map_range(n, |idx| {
        let s = psi.spinor(idx);
        mats.iter().map(|m| m.sandwich(&s, &s).re).collect()
    });
    Ok((0..mats.len())
        .map(|mu| per_point.iter().map(|p| p[mu]).collect())
        .collect())
}

/// Component-wise forward DFT; the returned field holds spectral
/// coefficients on the same grid.
pub fn fft_forward(psi: &SpinorField) -> SpinorField {
    let plan = FftPlan::new(&psi.grid);
    let mut out = psi.clone();
    for c in 0..psi.components {
        plan.forward(out.component_mut(c));
    }
    out
}

pub fn fft_inverse(spec: &SpinorField) -> SpinorField {
    let plan = FftPlan::new(&spec.grid);
    let mut out = spec.clone();
    for c in 0..spec.components {
        plan.inverse(out.component_mut(c));
    }
    out
}

/// `(ΔV / N) Σ |ψ̂|²`, equal to [`total_charge`] of the physical field.
pub fn spectral_norm_sqr(spec: &SpinorField) -> f64 {
    spec.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * spec.grid.cell_volume() / spec.grid.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub center: [f64; 3],
    pub width: f64,
    pub momentum: [f64; 3],
}

/// Gaussian envelope times a plane-wave phase times a constant spinor,
/// normalized to unit charge.
pub fn gaussian_packet(grid: &Grid, packet: &PacketSpec, spinor: &[Complex64], mass: f64, charge: f64) -> SpinorField {
    let mut psi = SpinorField::zeros(grid, spinor.len(), mass, charge);
    for idx in 0..grid.len() {
        let d = grid.displacement(idx, &packet.center);
        let r2: f64 = d.iter().map(|x| x * x).sum();
        let phase: f64 = d.iter().zip(&packet.momentum).map(|(x, k)| x * k).sum();
        let amp = Complex64::from_polar((-r2 / (2.0 * packet.width * packet.width)).exp(), phase);
        let s: Vec<Complex64> = spinor.iter().map(|z| z * amp).collect();
        psi.set_spinor(idx, &s);
    }
    psi.normalize();
    psi
}

/// Named scalar time series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    channels: BTreeMap<String, Vec<(f64, f64)>>,
}

impl DiagnosticsSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample; time stamps must be strictly increasing per
    /// channel.
    pub fn push(&mut self, channel: &str, time: f64, value: f64) -> Result<()> {
        let series = self.channels.entry(channel.to_string()).or_default();
        if let Some(&(last, _)) = series.last() {
            if !(time > last) {
                return Err(Error::InvalidArgument(format!(
                    "channel {channel}: time {time} does not follow {last}"
                )));
            }
        }
        series.push((time, value));
        Ok(())
    }

    pub fn channel(&self, name: &str) -> Option<&[(f64, f64)]> {
        self.channels.get(name).map(|v| v.as_slice())
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.keys().map(|s| s.as_str())
    }

    /// `max_t |v(t) − v(t₀)|`.
    pub fn drift(&self, name: &str) -> Option<f64> {
        let s = self.channels.get(name)?;
        let first = s.first()?.1;
        Some(s.iter().map(|&(_, v)| (v - first).abs()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self, name: &str) -> Option<f64> {
        let s = self.channels.get(name)?;
        Some(s.iter().map(|&(_, v)| v.abs()).fold(0.0, f64::max))
    }

    pub fn merge(&mut self, prefix: &str, other: &DiagnosticsSeries) {
        for (name, s) in &other.channels {
            self.channels.insert(format!("{prefix}{name}"), s.clone());
        }
    }

    /// CSV with a `time` column followed by one column per channel; rows are
    /// the union of sample times, missing samples left empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["time".to_string()];
        header.extend(self.channels.keys().cloned());
        wr.write_record(&header)?;
        let times: BTreeSet<u64> = self
            .channels
            .values()
            .flat_map(|s| s.iter().map(|&(t, _)| ordered_bits(t)))
            .collect();
        let mut cursors = vec![0usize; self.channels.len()];
        for tb in times {
            let t = from_ordered_bits(tb);
            let mut row = vec![t.to_string()];
            for (k, s) in self.channels.values().enumerate() {
                match s.get(cursors[k]) {
                    Some(&(ts, v)) if ts == t => {
                        row.push(v.to_string());
                        cursors[k] += 1;
                    }
                    _ => row.push(String::new()),
                }
            }
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rd = csv::Reader::from_path(path)?;
        let names: Vec<String> = rd.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut out = Self::new();
        for rec in rd.records() {
            let rec = rec?;
            let t: f64 = rec[0].parse().map_err(|_| Error::InvalidArgument("bad time".into()))?;
            for (k, name) in names.iter().enumerate() {
                let cell = &rec[k + 1];
                if !cell.is_empty() {
                    let v: f64 = cell.parse().map_err(|_| Error::InvalidArgument("bad value".into()))?;
                    out.push(name, t, v)?;
                }
            }
        }
        Ok(out)
    }
}

// total order on f64 bit patterns so times sort numerically
fn ordered_bits(t: f64) -> u64 {
    let b = t.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn from_ordered_bits(b: u64) -> f64 {
    if b >> 63 == 1 {
        f64::from_bits(b & !(1 << 63))
    } else {
        f64::from_bits(!b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Complex,
    Real,
}

/// JSON sidecar of a binary snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub grid: Grid,
    pub components: usize,
    pub time: f64,
    pub kind: ValueKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
}

fn snapshot_paths(base: &Path) -> (PathBuf, PathBuf) {
    (base.with_extension("bin"), base.with_extension("json"))
}

fn write_f64s(path: &Path, data: impl Iterator<Item = f64>) -> Result<()> {
    let mut buf = Vec::new();
    for x in data {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    std::fs::write(path, buf)?;
    Ok(())
}

fn read_f64s(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidArgument("snapshot length not a multiple of 8".into()));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect())
}

/// Writes `<base>.bin` (little-endian f64, interleaved re/im,
/// component-major) and `<base>.json`.
pub fn write_spinor_snapshot(base: impl AsRef<Path>, psi: &SpinorField, time: f64) -> Result<()> {
    let (bin, json) = snapshot_paths(base.as_ref());
    write_f64s(&bin, psi.values.iter().flat_map(|z| [z.re, z.im]))?;
    let header = SnapshotHeader {
        grid: psi.grid.clone(),
        components: psi.components,
        time,
        kind: ValueKind::Complex,
        mass: Some(psi.mass),
        charge: Some(psi.charge),
    };
    std::fs::write(json, serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_spinor_snapshot(base: impl AsRef<Path>) -> Result<(SpinorField, f64)> {
    let (bin, json) = snapshot_paths(base.as_ref());
    let header: SnapshotHeader = serde_json::from_str(&std::fs::read_to_string(json)?)?;
    if header.kind != ValueKind::Complex {
        return Err(Error::InvalidArgument("snapshot holds real data".into()));
    }
    let raw = read_f64s(&bin)?;
    let expected = 2 * header.components * header.grid.len();
    if raw.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: raw.len(),
        });
    }
    let values = raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    Ok((
        SpinorField {
            grid: header.grid,
            components: header.components,
            values,
            mass: header.mass.unwrap_or(0.0),
            charge: header.charge.unwrap_or(0.0),
        },
        header.time,
    ))
}

/// Real multi-component snapshot (gauge potentials, E/B fields).
pub fn write_real_snapshot(base: impl AsRef<Path>, grid: &Grid, arrays: &[&[f64]], time: f64) -> Result<()> {
    let (bin, json) = snapshot_paths(base.as_ref());
    for a in arrays {
        if a.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: a.len(),
            });
        }
    }
    write_f64s(&bin, arrays.iter().flat_map(|a| a.iter().copied()))?;
    let header = SnapshotHeader {
        grid: grid.clone(),
        components: arrays.len(),
        time,
        kind: ValueKind::Real,
        mass: None,
        charge: None,
    };
    std::fs::write(json, serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_real_snapshot(base: impl AsRef<Path>) -> Result<(SnapshotHeader, Vec<Vec<f64>>)> {
    let (bin, json) = snapshot_paths(base.as_ref());
    let header: SnapshotHeader = serde_json::from_str(&std::fs::read_to_string(json)?)?;
    let raw = read_f64s(&bin)?;
    let n = header.grid.len();
    if raw.len() != n * header.components {
        return Err(Error::DimensionMismatch {
            expected: n * header.components,
            found: raw.len(),
        });
    }
    let arrays = raw.chunks_exact(n).map(|c| c.to_vec()).collect();
    Ok((header, arrays))
}
