//! Maxwell dynamics on the periodic grid in Heaviside–Lorentz units with
//! `c = 1`: a staggered E/B leapfrog for the sector experiments, and a
//! temporal-gauge potential integrator used by the coupled solver.

use num_complex::Complex64;
use serde::Serialize;

use crate::dirac::step_count;
use crate::error::{Error, Result};
use crate::lattice::{DiagnosticsSeries, GaugeFieldState, Grid, Spectral};
use crate::linalg::ZERO;
use crate::par;

/// Maximum `|∂ₜρ + ∇·J|` accepted from an external source.
pub const CONTINUITY_TOL: f64 = 1e-8;
/// `dt ≤ CFL_SAFETY · min spacing`.
pub const CFL_SAFETY: f64 = 0.5;

pub fn check_cfl(grid: &Grid, dt: f64) -> Result<()> {
    let limit = CFL_SAFETY * grid.min_spacing();
    if !(dt.is_finite() && dt > 0.0) || dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    Ok(())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    par::for_each_mut(y, |i, v| *v += a * x[i]);
}

/// Copies a planar array onto every z-slice of `grid`.
pub fn broadcast(plane_values: &[f64], grid: &Grid) -> Vec<f64> {
    (0..grid.len()).map(|i| plane_values[grid.plane_index(i)]).collect()
}

fn z_variation(grid: &Grid, v: &[f64]) -> f64 {
    (0..grid.len()).fold(0.0, |m, i| m.max((v[i] - v[grid.plane_index(i)]).abs()))
}

fn slice_z(grid: &Grid, v: &[f64], iz: usize) -> Vec<f64> {
    let np = grid.n(0) * grid.n(1);
    v[iz * np..(iz + 1) * np].to_vec()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmFields {
    pub grid: Grid,
    pub e: [Vec<f64>; 3],
    pub b: [Vec<f64>; 3],
}

/// The `(E_x, E_y, B_z)` and `(B_x, B_y, E_z)` triples.
#[derive(Debug, Clone, PartialEq)]
pub struct EebBbeSplit {
    pub eeb: [Vec<f64>; 3],
    pub bbe: [Vec<f64>; 3],
}

impl EmFields {
    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid: grid.clone(),
            e: [z.clone(), z.clone(), z.clone()],
            b: [z.clone(), z.clone(), z],
        }
    }

    pub fn split(&self) -> EebBbeSplit {
        EebBbeSplit {
            eeb: [self.e[0].clone(), self.e[1].clone(), self.b[2].clone()],
            bbe: [self.b[0].clone(), self.b[1].clone(), self.e[2].clone()],
        }
    }

    pub fn from_split(grid: &Grid, s: EebBbeSplit) -> Self {
        let [ex, ey, bz] = s.eeb;
        let [bx, by, ez] = s.bbe;
        Self {
            grid: grid.clone(),
            e: [ex, ey, ez],
            b: [bx, by, bz],
        }
    }

    /// `½∫(E² + B²)`.
    pub fn energy(&self) -> f64 {
        let sum: f64 = self.e.iter().chain(self.b.iter()).flatten().map(|x| x * x).sum();
        0.5 * sum * self.grid.cell_volume()
    }

    pub fn z_variation(&self) -> f64 {
        self.e
            .iter()
            .chain(self.b.iter())
            .map(|f| z_variation(&self.grid, f))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.e.iter().chain(self.b.iter()).flatten().all(|x| x.is_finite())
    }

    /// Planar fields replicated along `z`.
    pub fn extrude(&self, grid3: &Grid) -> Result<Self> {
        if self.grid.dim() != 2 || !grid3.same_plane(&self.grid) || grid3.dim() != 3 {
            return Err(Error::GridMismatch("extrude needs planar fields and a matching 3D grid".into()));
        }
        Ok(Self {
            grid: grid3.clone(),
            e: std::array::from_fn(|a| broadcast(&self.e[a], grid3)),
            b: std::array::from_fn(|a| broadcast(&self.b[a], grid3)),
        })
    }

    /// Source-free data in which every Fourier mode travels along one
    /// direction: `E` is made transverse and `B̂ = ±k̂ × Ê`, the sign
    /// chosen by half-space so the fields stay real.
    pub fn traveling_wave(spectral: &Spectral, e: [&[f64]; 3]) -> Self {
        let grid = spectral.grid().clone();
        let hats: [Vec<Complex64>; 3] = std::array::from_fn(|a| spectral.to_spectral(e[a]));
        let per_mode: Vec<([Complex64; 3], [Complex64; 3])> = par::map_range(grid.len(), |i| {
            let k = grid.derivative_mode(i);
            let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            let ev = [hats[0][i], hats[1][i], hats[2][i]];
            if kn == 0.0 {
                return ([ZERO; 3], [ZERO; 3]);
            }
            let u = [k[0] / kn, k[1] / kn, k[2] / kn];
            let sign = if u.iter().find(|&&x| x != 0.0).is_some_and(|&x| x > 0.0) {
                1.0
            } else {
                -1.0
            };
            let ud: Complex64 = (0..3).map(|a| ev[a] * u[a]).sum();
            let et: [Complex64; 3] = std::array::from_fn(|a| ev[a] - ud * u[a]);
            let bt: [Complex64; 3] = std::array::from_fn(|a| {
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                (et[c] * u[b] - et[b] * u[c]) * sign
            });
            (et, bt)
        });
        let e = std::array::from_fn(|a| spectral.to_real(per_mode.iter().map(|m| m.0[a]).collect()));
        let b = std::array::from_fn(|a| spectral.to_real(per_mode.iter().map(|m| m.1[a]).collect()));
        Self { grid, e, b }
    }

    /// Adds the longitudinal field solving Gauss's law for `rho` against a
    /// uniform neutralizing background.
    pub fn add_gauss_field(&mut self, spectral: &Spectral, rho: &[f64]) {
        let el = spectral.gauss_field(rho);
        for a in 0..3 {
            axpy(&mut self.e[a], 1.0, &el[a]);
        }
    }

    /// `max |∇·E − (ρ − ρ̄)|` over the modes the derivative resolves.
    pub fn gauss_residual(&self, spectral: &Spectral, rho: &[f64]) -> f64 {
        let div = spectral.divergence([&self.e[0], &self.e[1], &self.e[2]]);
        max_abs_diff(&div, &spectral.visible_part(rho))
    }

    pub fn div_b(&self, spectral: &Spectral) -> f64 {
        max_abs(&spectral.divergence([&self.b[0], &self.b[1], &self.b[2]]))
    }
}

/// Charge density and current on a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FourCurrent {
    pub rho: Vec<f64>,
    pub j: [Vec<f64>; 3],
}

impl FourCurrent {
    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            rho: z.clone(),
            j: [z.clone(), z.clone(), z],
        }
    }
}

/// An external, prescribed four-current.
pub trait CurrentSource: Sync {
    fn sample(&self, grid: &Grid, t: f64) -> Result<FourCurrent>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoSource;

impl CurrentSource for NoSource {
    fn sample(&self, grid: &Grid, _t: f64) -> Result<FourCurrent> {
        Ok(FourCurrent::zeros(grid))
    }
}

/// z-independent source: static neutral charge, a divergence-free in-plane
/// current `∝ sin ωt` and an out-of-plane current `∝ cos ωt`. Continuity
/// holds exactly.
#[derive(Debug, Clone)]
pub struct ModulatedSource {
    plane: Grid,
    rho: Vec<f64>,
    jt: [Vec<f64>; 2],
    jz: Vec<f64>,
    omega: f64,
}

impl ModulatedSource {
    /// `in_plane` scales `(ρ, J_x, J_y)`, `out_of_plane` scales `J_z`.
    pub fn gaussian(plane: &Grid, center: [f64; 2], width: f64, omega: f64, in_plane: f64, out_of_plane: f64) -> Result<Self> {
        if plane.dim() != 2 {
            return Err(Error::GridMismatch("source profiles are planar".into()));
        }
        let spectral = Spectral::new(plane);
        let bump = |c: [f64; 2]| -> Vec<f64> {
            (0..plane.len())
                .map(|i| {
                    let d = plane.displacement(i, &c);
                    (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * width * width)).exp()
                })
                .collect()
        };
        let shift = 2.0 * width;
        let pos = bump([center[0] + shift, center[1]]);
        let neg = bump([center[0] - shift, center[1]]);
        let rho = pos.iter().zip(&neg).map(|(p, n)| in_plane * (p - n)).collect();
        let stream: Vec<f64> = bump(center).iter().map(|x| in_plane * x).collect();
        let jt = [spectral.derivative(&stream, 1), spectral.derivative(&stream, 0).iter().map(|x| -x).collect()];
        let jz = bump(center).iter().map(|x| out_of_plane * x).collect();
        Ok(Self {
            plane: plane.clone(),
            rho,
            jt,
            jz,
            omega,
        })
    }

    pub fn static_charge(&self) -> &[f64] {
        &self.rho
    }
}

impl CurrentSource for ModulatedSource {
    fn sample(&self, grid: &Grid, t: f64) -> Result<FourCurrent> {
        if !grid.same_plane(&self.plane) {
            return Err(Error::GridMismatch("source plane differs from grid plane".into()));
        }
        let (s, c) = (self.omega * t).sin_cos();
        let scaled = |v: &[f64], f: f64| -> Vec<f64> { broadcast(v, grid).into_iter().map(|x| x * f).collect() };
        Ok(FourCurrent {
            rho: broadcast(&self.rho, grid),
            j: [scaled(&self.jt[0], s), scaled(&self.jt[1], s), scaled(&self.jz, c)],
        })
    }
}

/// A `±` charge pair appearing abruptly at `t_on` with no current; violates
/// continuity across the switch.
#[derive(Debug, Clone)]
pub struct SwitchedChargeSource {
    plane: Grid,
    rho: Vec<f64>,
    t_on: f64,
}

impl SwitchedChargeSource {
    pub fn new(plane: &Grid, separation: f64, width: f64, t_on: f64) -> Result<Self> {
        let l = plane.lengths();
        let c = [l[0] / 2.0, l[1] / 2.0];
        let bump = |x0: f64, i: usize| {
            let d = plane.displacement(i, &[x0, c[1]]);
            (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * width * width)).exp()
        };
        let rho = (0..plane.len())
            .map(|i| bump(c[0] + separation / 2.0, i) - bump(c[0] - separation / 2.0, i))
            .collect();
        Ok(Self {
            plane: plane.clone(),
            rho,
            t_on,
        })
    }
}

impl CurrentSource for SwitchedChargeSource {
    fn sample(&self, grid: &Grid, t: f64) -> Result<FourCurrent> {
        if !grid.same_plane(&self.plane) {
            return Err(Error::GridMismatch("source plane differs from grid plane".into()));
        }
        let mut out = FourCurrent::zeros(grid);
        if t >= self.t_on {
            out.rho = broadcast(&self.rho, grid);
        }
        Ok(out)
    }
}

/// E/B leapfrog: half kick of `B`, full step of `E`, half kick of `B`.
#[derive(Debug, Clone)]
pub struct MaxwellSolver {
    spectral: Spectral,
    continuity_tol: f64,
}

impl MaxwellSolver {
    pub fn new(grid: &Grid) -> Self {
        Self {
            spectral: Spectral::new(grid),
            continuity_tol: CONTINUITY_TOL,
        }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// `max |(ρ(t+dt) − ρ(t))/dt + ∇·J(t+dt/2)|`.
    pub fn continuity_residual(&self, before: &FourCurrent, half: &FourCurrent, after: &FourCurrent, dt: f64) -> f64 {
        let div = self.spectral.divergence([&half.j[0], &half.j[1], &half.j[2]]);
        (0..div.len()).fold(0.0, |m, i| m.max(((after.rho[i] - before.rho[i]) / dt + div[i]).abs()))
    }

    /// Advances `fields` from `t` to `t + dt`; returns the continuity
    /// residual of the source over the step.
    pub fn step(&self, fields: &mut EmFields, source: &dyn CurrentSource, t: f64, dt: f64) -> Result<f64> {
        let grid = self.spectral.grid();
        if fields.grid != *grid {
            return Err(Error::GridMismatch("fields live on a different grid".into()));
        }
        check_cfl(grid, dt)?;
        let before = source.sample(grid, t)?;
        let half = source.sample(grid, t + 0.5 * dt)?;
        let after = source.sample(grid, t + dt)?;
        let residual = self.continuity_residual(&before, &half, &after, dt);
        if !(residual <= self.continuity_tol) {
            return Err(Error::ContinuityViolation { residual, time: t });
        }
        self.half_kick_b(fields, dt);
        let cb = self.spectral.curl([&fields.b[0], &fields.b[1], &fields.b[2]]);
        for a in 0..3 {
            let ja = &half.j[a];
            par::for_each_mut(&mut fields.e[a], |i, v| *v += dt * (cb[a][i] - ja[i]));
        }
        self.half_kick_b(fields, dt);
        if !fields.is_finite() {
            return Err(Error::NonFinite("electromagnetic fields"));
        }
        Ok(residual)
    }

    fn half_kick_b(&self, fields: &mut EmFields, dt: f64) {
        let ce = self.spectral.curl([&fields.e[0], &fields.e[1], &fields.e[2]]);
        for a in 0..3 {
            axpy(&mut fields.b[a], -0.5 * dt, &ce[a]);
        }
    }
}

/// One leapfrog step with a freshly built solver.
pub fn maxwell_step(fields: &EmFields, source: &dyn CurrentSource, t: f64, dt: f64) -> Result<EmFields> {
    let mut out = fields.clone();
    MaxwellSolver::new(&fields.grid).step(&mut out, source, t, dt)?;
    Ok(out)
}

/// Planar solver for `(E_x, E_y, B_z)` sourced by `(J_x, J_y)`.
#[derive(Debug, Clone)]
pub struct EebSolver {
    spectral: Spectral,
}

impl EebSolver {
    pub fn new(plane: &Grid) -> Result<Self> {
        if plane.dim() != 2 {
            return Err(Error::GridMismatch("sector solvers are planar".into()));
        }
        Ok(Self {
            spectral: Spectral::new(plane),
        })
    }

    /// `fields = [E_x, E_y, B_z]`.
    pub fn step(&self, fields: &mut [Vec<f64>; 3], source: &dyn CurrentSource, t: f64, dt: f64) -> Result<()> {
        let s = &self.spectral;
        let j = source.sample(s.grid(), t + 0.5 * dt)?;
        let kick = |f: &mut [Vec<f64>; 3]| {
            let dxey = s.derivative(&f[1], 0);
            let dyex = s.derivative(&f[0], 1);
            par::for_each_mut(&mut f[2], |i, v| *v -= 0.5 * dt * (dxey[i] - dyex[i]));
        };
        kick(fields);
        let dybz = s.derivative(&fields[2], 1);
        let dxbz = s.derivative(&fields[2], 0);
        par::for_each_mut(&mut fields[0], |i, v| *v += dt * (dybz[i] - j.j[0][i]));
        par::for_each_mut(&mut fields[1], |i, v| *v += dt * (-dxbz[i] - j.j[1][i]));
        kick(fields);
        Ok(())
    }
}

/// Planar solver for `(B_x, B_y, E_z)` sourced by `J_z`.
#[derive(Debug, Clone)]
pub struct BbeSolver {
    spectral: Spectral,
}

impl BbeSolver {
    pub fn new(plane: &Grid) -> Result<Self> {
        if plane.dim() != 2 {
            return Err(Error::GridMismatch("sector solvers are planar".into()));
        }
        Ok(Self {
            spectral: Spectral::new(plane),
        })
    }

    /// `fields = [B_x, B_y, E_z]`.
    pub fn step(&self, fields: &mut [Vec<f64>; 3], source: &dyn CurrentSource, t: f64, dt: f64) -> Result<()> {
        let s = &self.spectral;
        let j = source.sample(s.grid(), t + 0.5 * dt)?;
        let kick = |f: &mut [Vec<f64>; 3]| {
            let dyez = s.derivative(&f[2], 1);
            let dxez = s.derivative(&f[2], 0);
            par::for_each_mut(&mut f[0], |i, v| *v -= 0.5 * dt * dyez[i]);
            par::for_each_mut(&mut f[1], |i, v| *v += 0.5 * dt * dxez[i]);
        };
        kick(fields);
        let dxby = s.derivative(&fields[1], 0);
        let dybx = s.derivative(&fields[0], 1);
        par::for_each_mut(&mut fields[2], |i, v| *v += dt * (dxby[i] - dybx[i] - j.j[2][i]));
        kick(fields);
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EebBbeReport {
    /// Max deviation of the full run's `(E_x, E_y, B_z)` from the
    /// independent planar EEB run.
    pub leakage_eeb: f64,
    /// Same for `(B_x, B_y, E_z)`.
    pub leakage_bbe: f64,
    pub energy_drift: f64,
    pub gauss_residual: f64,
    pub div_b: f64,
    pub continuity_residual: f64,
    pub steps: usize,
    #[serde(skip)]
    pub series: DiagnosticsSeries,
}

fn sector_deviation(full: &EmFields, eeb: &[Vec<f64>; 3], bbe: &[Vec<f64>; 3]) -> (f64, f64) {
    let g = &full.grid;
    let split = full.split();
    let mut worst = (0.0f64, 0.0f64);
    for iz in 0..g.n(2) {
        for a in 0..3 {
            worst.0 = worst.0.max(max_abs_diff(&slice_z(g, &split.eeb[a], iz), &eeb[a]));
            worst.1 = worst.1.max(max_abs_diff(&slice_z(g, &split.bbe[a], iz), &bbe[a]));
        }
    }
    worst
}

/// Full 3D leapfrog of z-independent data and source, compared each step
/// with independent planar EEB and BBE runs.
pub fn eeb_bbe_experiment(initial: &EmFields, source: &dyn CurrentSource, t_final: f64, dt: f64) -> Result<EebBbeReport> {
    let grid = &initial.grid;
    if grid.dim() != 3 {
        return Err(Error::GridMismatch("the sector experiment runs on a 3D grid".into()));
    }
    let variation = initial.z_variation();
    if variation > 0.0 {
        return Err(Error::NotZIndependent(variation));
    }
    let j0 = source.sample(grid, 0.0)?;
    let src_variation = std::iter::once(&j0.rho)
        .chain(j0.j.iter())
        .map(|v| z_variation(grid, v))
        .fold(0.0, f64::max);
    if src_variation > 0.0 {
        return Err(Error::NotZIndependent(src_variation));
    }
    let steps = step_count(t_final, dt)?;
    let plane = grid.planar()?;
    let full_solver = MaxwellSolver::new(grid);
    let eeb_solver = EebSolver::new(&plane)?;
    let bbe_solver = BbeSolver::new(&plane)?;

    let mut full = initial.clone();
    let split0 = initial.split();
    let mut eeb: [Vec<f64>; 3] = std::array::from_fn(|a| slice_z(grid, &split0.eeb[a], 0));
    let mut bbe: [Vec<f64>; 3] = std::array::from_fn(|a| slice_z(grid, &split0.bbe[a], 0));
    let w0 = full.energy();
    let mut report = EebBbeReport {
        leakage_eeb: 0.0,
        leakage_bbe: 0.0,
        energy_drift: 0.0,
        gauss_residual: 0.0,
        div_b: 0.0,
        continuity_residual: 0.0,
        steps,
        series: DiagnosticsSeries::new(),
    };
    for step in 0..=steps {
        let t = step as f64 * dt;
        if step > 0 {
            let t_prev = t - dt;
            let c = full_solver.step(&mut full, source, t_prev, dt)?;
            report.continuity_residual = report.continuity_residual.max(c);
            eeb_solver.step(&mut eeb, source, t_prev, dt)?;
            bbe_solver.step(&mut bbe, source, t_prev, dt)?;
        }
        let (le, lb) = sector_deviation(&full, &eeb, &bbe);
        let w = full.energy();
        let drift = if w0 > 0.0 { (w - w0).abs() / w0 } else { w.abs() };
        let rho = source.sample(grid, t)?.rho;
        let gauss = full.gauss_residual(full_solver.spectral(), &rho);
        let divb = full.div_b(full_solver.spectral());
        report.leakage_eeb = report.leakage_eeb.max(le);
        report.leakage_bbe = report.leakage_bbe.max(lb);
        report.energy_drift = report.energy_drift.max(drift);
        report.gauss_residual = report.gauss_residual.max(gauss);
        report.div_b = report.div_b.max(divb);
        report.series.push("leakage_eeb", t, le)?;
        report.series.push("leakage_bbe", t, lb)?;
        report.series.push("energy", t, w)?;
        report.series.push("gauss_residual", t, gauss)?;
        report.series.push("div_b", t, divb)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorCouplingReport {
    pub eeb_max: f64,
    pub bbe_max: f64,
}

/// Source-free 3D run of arbitrary (possibly z-dependent) data, reporting
/// the largest amplitude each sector reaches.
pub fn sector_coupling_run(initial: &EmFields, t_final: f64, dt: f64) -> Result<SectorCouplingReport> {
    let steps = step_count(t_final, dt)?;
    let solver = MaxwellSolver::new(&initial.grid);
    let mut f = initial.clone();
    let mut report = SectorCouplingReport {
        eeb_max: 0.0,
        bbe_max: 0.0,
    };
    for step in 0..=steps {
        if step > 0 {
            solver.step(&mut f, &NoSource, (step - 1) as f64 * dt, dt)?;
        }
        let s = f.split();
        report.eeb_max = s.eeb.iter().map(|v| max_abs(v)).fold(report.eeb_max, f64::max);
        report.bbe_max = s.bbe.iter().map(|v| max_abs(v)).fold(report.bbe_max, f64::max);
    }
    Ok(report)
}

/// Temporal-gauge integrator for `∂ₜ²A = −∇×∇×A + J`, split into drifts
/// of `A` and kicks of `∂ₜA`.
#[derive(Debug, Clone)]
pub struct PotentialSolver {
    spectral: Spectral,
}

impl PotentialSolver {
    pub fn new(grid: &Grid) -> Self {
        Self {
            spectral: Spectral::new(grid),
        }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// `A ← A + h ∂ₜA`.
    pub fn drift(&self, state: &mut GaugeFieldState, h: f64) {
        for a in 0..3 {
            let (pot, mom) = (&mut state.potential[a + 1], &state.momenta[a]);
            axpy(pot, h, mom);
        }
    }

    /// `∂ₜA ← ∂ₜA + h(−∇×∇×A + J)`. On a planar grid the out-of-plane
    /// channel is divergence-free for any profile, so it takes the full
    /// Laplacian including the Nyquist modes.
    pub fn kick(&self, state: &mut GaugeFieldState, j: [&[f64]; 3], h: f64) {
        let mut cc = self.spectral.curl_curl(state.vector_potential());
        if self.spectral.grid().dim() == 2 {
            cc[2] = self.spectral.laplacian(&state.potential[3]);
            cc[2].iter_mut().for_each(|v| *v = -*v);
        }
        for a in 0..3 {
            let ja = j[a];
            par::for_each_mut(&mut state.momenta[a], |i, v| *v += h * (ja[i] - cc[a][i]));
        }
    }

    /// Drift–kick–drift with the current sampled at the midpoint.
    pub fn step(&self, state: &mut GaugeFieldState, j_half: [&[f64]; 3], dt: f64) {
        self.drift(state, 0.5 * dt);
        self.kick(state, j_half, dt);
        self.drift(state, 0.5 * dt);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PotentialReport {
    /// `max |(A³₊ − 2A³ + A³₋)/dt² − ∇²A³ − j³|` at the half-step positions.
    pub wave_residual: f64,
    /// The same for `(A¹, A²)` against `∇²A − ∇(∇·A) + J`.
    pub transverse_residual: f64,
    /// Largest `|A¹|, |A²|, |∂ₜA¹|, |∂ₜA²|` seen.
    pub transverse_max: f64,
    pub steps: usize,
    #[serde(skip)]
    pub series: DiagnosticsSeries,
    #[serde(skip)]
    pub final_state: Option<GaugeFieldState>,
}

/// Evolves planar potentials (so `∂₃ ≡ 0`) and checks each component
/// against its reduced second-order equation, evaluated independently.
pub fn potential_formulation_check(
    initial: &GaugeFieldState,
    source: &dyn CurrentSource,
    t_final: f64,
    dt: f64,
) -> Result<PotentialReport> {
    let grid = &initial.grid;
    if grid.dim() != 2 {
        return Err(Error::GridMismatch("the potential check runs on a planar grid".into()));
    }
    check_cfl(grid, dt)?;
    let steps = step_count(t_final, dt)?;
    let solver = PotentialSolver::new(grid);
    let s = solver.spectral();
    let mut state = initial.clone();
    let transverse_amp = |st: &GaugeFieldState| {
        [&st.potential[1], &st.potential[2], &st.momenta[0], &st.momenta[1]]
            .iter()
            .map(|v| max_abs(v))
            .fold(0.0, f64::max)
    };
    let mut report = PotentialReport {
        wave_residual: 0.0,
        transverse_residual: 0.0,
        transverse_max: transverse_amp(&state),
        steps,
        series: DiagnosticsSeries::new(),
        final_state: None,
    };
    // A at half-step times, oldest first
    let mut history: Vec<[Vec<f64>; 3]> = Vec::with_capacity(3);
    for step in 0..steps {
        let t = step as f64 * dt;
        let th = t + 0.5 * dt;
        let j = source.sample(grid, th)?.j;
        solver.drift(&mut state, 0.5 * dt);
        history.push([state.potential[1].clone(), state.potential[2].clone(), state.potential[3].clone()]);
        if history.len() == 3 {
            let (prev, mid, next) = (&history[0], &history[1], &history[2]);
            let jm = source.sample(grid, th - dt)?.j;
            let second = |a: usize| -> Vec<f64> {
                (0..grid.len()).map(|i| (next[a][i] - 2.0 * mid[a][i] + prev[a][i]) / (dt * dt)).collect()
            };
            let lap3 = s.laplacian(&mid[2]);
            let acc3 = second(2);
            let wave = (0..grid.len())
                .map(|i| (acc3[i] - lap3[i] - jm[2][i]).abs())
                .fold(0.0, f64::max);
            let div = s.divergence([&mid[0], &mid[1], &mid[2]]);
            let mut trans: f64 = 0.0;
            for a in 0..2 {
                let lap = s.laplacian(&mid[a]);
                let grad = s.derivative(&div, a);
                let acc = second(a);
                for i in 0..grid.len() {
                    trans = trans.max((acc[i] - lap[i] + grad[i] - jm[a][i]).abs());
                }
            }
            report.wave_residual = report.wave_residual.max(wave);
            report.transverse_residual = report.transverse_residual.max(trans);
            report.series.push("wave_residual", th - dt, wave)?;
            history.remove(0);
        }
        solver.kick(&mut state, [&j[0], &j[1], &j[2]], dt);
        solver.drift(&mut state, 0.5 * dt);
        if !state.is_finite() {
            return Err(Error::NonFinite("gauge potentials"));
        }
        report.transverse_max = report.transverse_max.max(transverse_amp(&state));
        report.series.push("energy", t + dt, state.energy(s))?;
    }
    report.final_state = Some(state);
    Ok(report)
}
