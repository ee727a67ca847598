//! Reduced Dirac–Maxwell dynamics in temporal gauge on a planar grid.
//!
//! The spinor keeps all four components; the descent decomposition supplies
//! the sector projections. `A¹, A²` couple to the spinor through
//! `H = α·(p − qA) + βm`; `A³` is a planar wave channel driven by
//! `j³ = qΨ̄γ³Ψ` and does not act back.

use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::{basis_elements, GammaRepresentation};
use crate::descent::DescentDecomposition;
use crate::dirac::{step_count, DiracHamiltonian, SpectralPropagator};
use crate::error::{Error, Result};
use crate::lattice::{
    kappa3_charge, projected_charge, spinor_current_field, total_charge, DiagnosticsSeries, GaugeFieldState, Grid,
    SpinorField, Spectral,
};
use crate::linalg::{ComplexMatrix, I, ZERO};
use crate::maxwell::{check_cfl, PotentialSolver};
use crate::par;

#[derive(Debug, Clone)]
pub struct CoupledState {
    pub psi: SpinorField,
    pub gauge: GaugeFieldState,
    pub time: f64,
    pub decomp: DescentDecomposition,
}

impl CoupledState {
    /// Pairs a planar spinor with planar potentials; `A⁰` must vanish.
    pub fn new(psi: SpinorField, gauge: GaugeFieldState, decomp: &DescentDecomposition) -> Result<Self> {
        if psi.grid.dim() != 2 || psi.grid != gauge.grid {
            return Err(Error::GridMismatch("spinor and potentials must share one planar grid".into()));
        }
        if psi.components != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: psi.components,
            });
        }
        let a0 = gauge.temporal_gauge_residual();
        if a0 != 0.0 {
            return Err(Error::InvalidArgument(format!("temporal gauge requires A⁰ = 0, found {a0:e}")));
        }
        Ok(Self {
            psi,
            gauge,
            time: 0.0,
            decomp: decomp.clone(),
        })
    }

    /// Adds to `E = −∂ₜA` the longitudinal field solving Gauss's law for
    /// the spinor charge.
    pub fn with_gauss_field(mut self) -> Result<Self> {
        let spectral = Spectral::new(&self.psi.grid);
        let rho = charge_density(&self.psi);
        let el = spectral.gauss_field(&rho);
        for a in 0..3 {
            for (p, e) in self.gauge.momenta[a].iter_mut().zip(&el[a]) {
                *p -= e;
            }
        }
        Ok(self)
    }

    pub fn sector_norms(&self) -> (f64, f64) {
        (
            projected_charge(&self.psi, &self.decomp.p_plus).sqrt(),
            projected_charge(&self.psi, &self.decomp.p_minus).sqrt(),
        )
    }
}

/// `qΨ†Ψ`.
pub fn charge_density(psi: &SpinorField) -> Vec<f64> {
    psi.density().into_iter().map(|d| psi.charge * d).collect()
}

/// `(qΨ̄γ¹Ψ, qΨ̄γ²Ψ, qΨ̄γ³Ψ)`.
pub fn spatial_current(psi: &SpinorField, rep: &GammaRepresentation) -> Result<[Vec<f64>; 3]> {
    let mut j = spinor_current_field(psi, rep)?;
    let q = psi.charge;
    let scale = |v: Vec<f64>| v.into_iter().map(|x| q * x).collect::<Vec<f64>>();
    let j3 = scale(j.pop().expect("four components"));
    let j2 = scale(j.pop().expect("four components"));
    let j1 = scale(j.pop().expect("four components"));
    Ok([j1, j2, j3])
}

/// Pointwise `∇·E − (ρ − ρ̄)` with `E = −∂ₜA`.
pub fn gauss_violation(state: &CoupledState, spectral: &Spectral) -> Vec<f64> {
    let m = &state.gauge.momenta;
    let div = spectral.divergence([&m[0], &m[1], &m[2]]);
    let rho = spectral.visible_part(&charge_density(&state.psi));
    div.iter().zip(&rho).map(|(d, r)| -d - r).collect()
}

/// Strang-split stepper; propagators are built once per `(grid, dt)`.
#[derive(Debug, Clone)]
pub struct CoupledSolver {
    dt: f64,
    half: SpectralPropagator,
    potentials: PotentialSolver,
    alphas: [ComplexMatrix; 2],
    rep: GammaRepresentation,
}

#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// `max |(ρⁿ⁺¹ − ρⁿ)/dt + ∇·Jⁿ⁺½|`
    pub continuity_residual: f64,
}

impl CoupledSolver {
    pub fn new(state: &CoupledState, dt: f64) -> Result<Self> {
        let grid = &state.psi.grid;
        check_cfl(grid, dt)?;
        let rep = state.decomp.parent.clone();
        let ham = DiracHamiltonian::new(&rep, state.psi.mass)?;
        let g0 = rep.gamma(0);
        Ok(Self {
            dt,
            half: SpectralPropagator::new(&ham, grid, 0.5 * dt)?,
            potentials: PotentialSolver::new(grid),
            alphas: [g0 * rep.gamma(1), g0 * rep.gamma(2)],
            rep,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn spectral(&self) -> &Spectral {
        self.potentials.spectral()
    }

    /// `Ψ ← exp(iq dt α·A)Ψ` pointwise; since `(α·A)² = |A|²`, the
    /// exponential is `cos θ + i sin θ α·Â` with `θ = q dt |A|`.
    fn gauge_phase(&self, psi: &mut SpinorField, a: [&[f64]; 2]) {
        let q = psi.charge;
        if q == 0.0 {
            return;
        }
        let n = psi.npts();
        let values = &psi.values;
        let dt = self.dt;
        let rotated: Vec<[Complex64; 4]> = par::map_range(n, |i| {
            let s = [values[i], values[n + i], values[2 * n + i], values[3 * n + i]];
            let (a1, a2) = (a[0][i], a[1][i]);
            let norm = a1.hypot(a2);
            if norm == 0.0 {
                return s;
            }
            let theta = q * dt * norm;
            let (sn, cs) = theta.sin_cos();
            let mut out = [ZERO; 4];
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (c, sc) in s.iter().enumerate() {
                    let m = self.alphas[0][(r, c)] * (a1 / norm) + self.alphas[1][(r, c)] * (a2 / norm);
                    acc += m * sc;
                }
                *o = s[r] * cs + I * sn * acc;
            }
            out
        });
        for c in 0..4 {
            par::for_each_mut(psi.component_mut(c), |i, z| *z = rotated[i][c]);
        }
    }

    pub fn step(&self, state: &mut CoupledState) -> Result<StepInfo> {
        let dt = self.dt;
        let rho_old = charge_density(&state.psi);
        let j_old = spatial_current(&state.psi, &self.rep)?;

        self.potentials.drift(&mut state.gauge, 0.5 * dt);
        self.half.apply(&mut state.psi)?;
        self.gauge_phase(&mut state.psi, [&state.gauge.potential[1], &state.gauge.potential[2]]);
        self.half.apply(&mut state.psi)?;

        let j_new = spatial_current(&state.psi, &self.rep)?;
        let j_half: [Vec<f64>; 3] =
            std::array::from_fn(|a| j_old[a].iter().zip(&j_new[a]).map(|(x, y)| 0.5 * (x + y)).collect());
        self.potentials.kick(&mut state.gauge, [&j_half[0], &j_half[1], &j_half[2]], dt);
        self.potentials.drift(&mut state.gauge, 0.5 * dt);
        state.time += dt;

        if !state.psi.is_finite() {
            return Err(Error::NonFinite("spinor field"));
        }
        if !state.gauge.is_finite() {
            return Err(Error::NonFinite("gauge potentials"));
        }
        let rho_new = charge_density(&state.psi);
        let div = self.spectral().divergence([&j_half[0], &j_half[1], &j_half[2]]);
        let continuity_residual = (0..div.len()).fold(0.0f64, |m, i| m.max(((rho_new[i] - rho_old[i]) / dt + div[i]).abs()));
        Ok(StepInfo { continuity_residual })
    }
}

/// One step with a freshly built solver; loops should hold a
/// [`CoupledSolver`].
pub fn coupled_step(state: &CoupledState, dt: f64) -> Result<CoupledState> {
    let mut out = state.clone();
    CoupledSolver::new(state, dt)?.step(&mut out)?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub final_state: CoupledState,
    pub series: DiagnosticsSeries,
    pub charge_drift: f64,
    pub kappa3_drift: f64,
    /// Max over time of `|G(t) − G(0)|`, `G = ∇·E − (ρ − ρ̄)`.
    pub gauss_residual_max: f64,
    /// Largest `|G(0)|`.
    pub gauss_initial: f64,
    pub continuity_residual_max: f64,
    pub norm_plus_max: f64,
    pub norm_minus_max: f64,
}

fn record(series: &mut DiagnosticsSeries, state: &CoupledState, spectral: &Spectral, g0: &[f64]) -> Result<(f64, f64, f64, f64, f64)> {
    let t = state.time;
    let q = total_charge(&state.psi);
    let k = kappa3_charge(&state.psi, &state.decomp)?;
    let g = gauss_violation(state, spectral);
    let gauss = g.iter().zip(g0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let (np, nm) = state.sector_norms();
    series.push("charge", t, q)?;
    series.push("kappa3_charge", t, k)?;
    series.push("gauss_residual", t, gauss)?;
    series.push("norm_plus", t, np)?;
    series.push("norm_minus", t, nm)?;
    series.push("field_energy", t, state.gauge.energy(spectral))?;
    Ok((q, k, gauss, np, nm))
}

/// Evolves to `t_final`, sampling the monitors every step.
pub fn run_coupled(initial: &CoupledState, t_final: f64, dt: f64) -> Result<CoupledRun> {
    run_coupled_with(initial, t_final, dt, |_| Ok(()))
}

/// Like [`run_coupled`], calling `observe` after every step.
pub fn run_coupled_with(
    initial: &CoupledState,
    t_final: f64,
    dt: f64,
    mut observe: impl FnMut(&CoupledState) -> Result<()>,
) -> Result<CoupledRun> {
    let steps = step_count(t_final, dt)?;
    let solver = CoupledSolver::new(initial, dt)?;
    let mut state = initial.clone();
    let mut series = DiagnosticsSeries::new();
    let g0 = gauss_violation(&state, solver.spectral());
    let (q0, k0, _, np0, nm0) = record(&mut series, &state, solver.spectral(), &g0)?;
    let mut run = CoupledRun {
        final_state: state.clone(),
        series: DiagnosticsSeries::new(),
        charge_drift: 0.0,
        kappa3_drift: 0.0,
        gauss_residual_max: 0.0,
        gauss_initial: g0.iter().fold(0.0, |m, x| m.max(x.abs())),
        continuity_residual_max: 0.0,
        norm_plus_max: np0,
        norm_minus_max: nm0,
    };
    for _ in 0..steps {
        let info = solver.step(&mut state)?;
        series.push("continuity_residual", state.time, info.continuity_residual)?;
        let (q, k, gauss, np, nm) = record(&mut series, &state, solver.spectral(), &g0)?;
        run.charge_drift = run.charge_drift.max(if q0 > 0.0 { (q - q0).abs() / q0 } else { q.abs() });
        run.kappa3_drift = run.kappa3_drift.max((k - k0).abs());
        run.gauss_residual_max = run.gauss_residual_max.max(gauss);
        run.continuity_residual_max = run.continuity_residual_max.max(info.continuity_residual);
        run.norm_plus_max = run.norm_plus_max.max(np);
        run.norm_minus_max = run.norm_minus_max.max(nm);
        observe(&state)?;
    }
    run.final_state = state;
    run.series = series;
    Ok(run)
}

/// The `kappa3_charge` channel of a run.
pub fn kappa3_charge_monitor(run: &CoupledRun) -> &[(f64, f64)] {
    run.series.channel("kappa3_charge").unwrap_or(&[])
}

/// Moves the 2-spinor content of the plus sector into the minus sector:
/// `U†(ψ₊ ⊕ 0) ↦ U†(0 ⊕ ψ₊)`.
pub fn mirror_sectors(psi: &SpinorField, decomp: &DescentDecomposition) -> SpinorField {
    let u = &decomp.u_block;
    let swap = ComplexMatrix::from_real_rows([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]);
    psi.apply_matrix(&(&(&u.adjoint() * &swap) * u))
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorVanishingReport {
    /// Max `‖P₋Ψ(t)‖` in the run with `Ψ₋(0) = 0`.
    pub leakage_minus: f64,
    /// Max `‖P₊Ψ(t)‖` in the mirrored run with `Ψ₊(0) = 0`.
    pub leakage_plus: f64,
    pub charge_drift: f64,
    pub kappa3_drift: f64,
    pub gauss_residual_max: f64,
    /// Max `|A(both) − A(plus only)|` over the transverse potentials.
    pub shared_field_vs_plus: f64,
    pub shared_field_vs_minus: f64,
    /// Max `|P₊Ψ(both) − Ψ(plus only)|` at the final time.
    pub plus_sector_shift: f64,
    #[serde(skip)]
    pub series: DiagnosticsSeries,
}

fn transverse_difference(a: &GaugeFieldState, b: &GaugeFieldState) -> f64 {
    (1..3)
        .flat_map(|c| a.potential[c].iter().zip(&b.potential[c]))
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Runs `Ψ₋(0) = 0` data, its mirror, and their superposition as a
/// control showing both sectors source the same potentials.
pub fn sector_vanishing_experiment(initial: &CoupledState, t_final: f64, dt: f64) -> Result<SectorVanishingReport> {
    let decomp = &initial.decomp;
    let minus0 = projected_charge(&initial.psi, &decomp.p_minus);
    if minus0 != 0.0 && minus0 > 1e-30 * total_charge(&initial.psi) {
        return Err(Error::InvalidArgument(format!("initial minus-sector weight {minus0:e} is not zero")));
    }
    let plus_run = run_coupled(initial, t_final, dt)?;
    let mut mirrored = initial.clone();
    mirrored.psi = mirror_sectors(&initial.psi, decomp);
    let minus_run = run_coupled(&mirrored, t_final, dt)?;
    let mut both = initial.clone();
    for (z, m) in both.psi.values.iter_mut().zip(&mirrored.psi.values) {
        *z += m;
    }
    let both_run = run_coupled(&both, t_final, dt)?;

    let runs = [&plus_run, &minus_run, &both_run];
    let mut series = DiagnosticsSeries::new();
    series.merge("plus_only.", &plus_run.series);
    series.merge("minus_only.", &minus_run.series);
    series.merge("both.", &both_run.series);
    let shifted = both_run.final_state.psi.apply_matrix(&decomp.p_plus);
    Ok(SectorVanishingReport {
        leakage_minus: plus_run.norm_minus_max,
        leakage_plus: minus_run.norm_plus_max,
        charge_drift: runs.iter().map(|r| r.charge_drift).fold(0.0, f64::max),
        kappa3_drift: runs.iter().map(|r| r.kappa3_drift).fold(0.0, f64::max),
        gauss_residual_max: runs.iter().map(|r| r.gauss_residual_max).fold(0.0, f64::max),
        shared_field_vs_plus: transverse_difference(&both_run.final_state.gauge, &plus_run.final_state.gauge),
        shared_field_vs_minus: transverse_difference(&both_run.final_state.gauge, &minus_run.final_state.gauge),
        plus_sector_shift: shifted.max_abs_diff(&plus_run.final_state.psi),
        series,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingFieldReport {
    /// Whether `j¹ = j² = 0` at every point (within `tol`).
    pub transverse_current_vanishes: bool,
    /// Max `j⁰ = qΨ†Ψ` magnitude.
    pub density_max: f64,
    /// Max `|Ψ|` over points where the transverse current vanishes.
    pub psi_max_in_zero_current_region: f64,
    pub zero_current_points: usize,
    /// Points with `|Ψ|² ≤ tol` but `|j⁰| > tol|q|`; always 0.
    pub density_mismatches: usize,
    /// `j¹ = j² = 0` everywhere implies `Ψ = 0` everywhere.
    pub implication_holds: bool,
}

pub fn vanishing_field_implication_check(state: &CoupledState, tol: f64) -> Result<VanishingFieldReport> {
    let psi = &state.psi;
    let q = psi.charge;
    let currents = spinor_current_field(psi, &state.decomp.parent)?;
    let density = psi.density();
    let mut report = VanishingFieldReport {
        transverse_current_vanishes: true,
        density_max: 0.0,
        psi_max_in_zero_current_region: 0.0,
        zero_current_points: 0,
        density_mismatches: 0,
        implication_holds: true,
    };
    for i in 0..psi.npts() {
        let jt = (q * currents[1][i]).abs().max((q * currents[2][i]).abs());
        let j0 = q * currents[0][i];
        report.density_max = report.density_max.max(j0.abs());
        if density[i] <= tol && j0.abs() > tol * q.abs().max(1.0) {
            report.density_mismatches += 1;
        }
        if jt <= tol {
            report.zero_current_points += 1;
            report.psi_max_in_zero_current_region = report.psi_max_in_zero_current_region.max(density[i].sqrt());
        } else {
            report.transverse_current_vanishes = false;
        }
    }
    let psi_max = density.iter().fold(0.0f64, |m, d| m.max(d.sqrt()));
    report.implication_holds = !report.transverse_current_vanishes || psi_max <= tol.sqrt();
    Ok(report)
}

/// Applies `Ψ → e^{iqχ}Ψ`, `A^a → A^a + ∂_aχ` for a planar, time-independent
/// `χ`; `∂ₜA` and `A³` are unchanged.
pub fn gauge_transform(state: &CoupledState, chi: &[f64]) -> Result<CoupledState> {
    let grid = &state.psi.grid;
    if chi.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: chi.len(),
        });
    }
    let spectral = Spectral::new(grid);
    let mut out = state.clone();
    let q = state.psi.charge;
    for c in 0..4 {
        for (z, x) in out.psi.component_mut(c).iter_mut().zip(chi) {
            *z *= Complex64::from_polar(1.0, q * x);
        }
    }
    for a in 0..2 {
        let d = spectral.derivative(chi, a);
        for (p, x) in out.gauge.potential[a + 1].iter_mut().zip(d) {
            *p += x;
        }
    }
    Ok(out)
}

/// Gauge-invariant local observables: `ρ`, `j`, `E`, `B`.
#[derive(Debug, Clone)]
pub struct Observables {
    pub density: Vec<f64>,
    pub current: [Vec<f64>; 3],
    pub e: [Vec<f64>; 3],
    pub b: [Vec<f64>; 3],
}

impl Observables {
    pub fn of(state: &CoupledState, spectral: &Spectral) -> Result<Self> {
        Ok(Self {
            density: charge_density(&state.psi),
            current: spatial_current(&state.psi, &state.decomp.parent)?,
            e: state.gauge.electric(spectral),
            b: state.gauge.magnetic(spectral),
        })
    }

    pub fn max_difference(&self, other: &Self) -> f64 {
        let pairs = std::iter::once((&self.density, &other.density))
            .chain(self.current.iter().zip(&other.current))
            .chain(self.e.iter().zip(&other.e))
            .chain(self.b.iter().zip(&other.b));
        pairs
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeEquivalenceReport {
    pub max_observable_difference: f64,
    /// Max `|A¹|` difference, which is not gauge invariant.
    pub potential_difference: f64,
}

/// Runs `initial` and its gauge transform side by side and compares the
/// invariant observables every step.
pub fn gauge_equivalence_check(initial: &CoupledState, chi: &[f64], t_final: f64, dt: f64) -> Result<GaugeEquivalenceReport> {
    let steps = step_count(t_final, dt)?;
    let solver = CoupledSolver::new(initial, dt)?;
    let mut a = initial.clone();
    let mut b = gauge_transform(initial, chi)?;
    let mut report = GaugeEquivalenceReport {
        max_observable_difference: 0.0,
        potential_difference: transverse_difference(&a.gauge, &b.gauge),
    };
    for _ in 0..steps {
        solver.step(&mut a)?;
        solver.step(&mut b)?;
        let d = Observables::of(&a, solver.spectral())?.max_difference(&Observables::of(&b, solver.spectral())?);
        report.max_observable_difference = report.max_observable_difference.max(d);
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub charges: Vec<f64>,
    /// Max over time of `|Ψ_q − Ψ_0|` for each charge.
    pub deviations: Vec<f64>,
    /// `deviations[i] / deviations[i + 1]`.
    pub ratios: Vec<f64>,
}

/// Compares coupled runs at each charge against the `q = 0` run from the
/// same initial data.
pub fn coupling_convergence_check(initial: &CoupledState, charges: &[f64], t_final: f64, dt: f64) -> Result<ConvergenceReport> {
    let steps = step_count(t_final, dt)?;
    let mut free = initial.clone();
    free.psi.charge = 0.0;
    let solver = CoupledSolver::new(&free, dt)?;
    let mut states: Vec<CoupledState> = charges
        .iter()
        .map(|&q| {
            let mut s = initial.clone();
            s.psi.charge = q;
            s
        })
        .collect();
    let mut deviations = vec![0.0f64; charges.len()];
    for _ in 0..steps {
        solver.step(&mut free)?;
        for (s, d) in states.iter_mut().zip(deviations.iter_mut()) {
            solver.step(s)?;
            *d = d.max(s.psi.max_abs_diff(&free.psi));
        }
    }
    let ratios = deviations.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConvergenceReport {
        charges: charges.to_vec(),
        deviations,
        ratios,
    })
}

/// `Ψ(x, y, z) = exp(iq∫₀^z A³ dζ) Φ(x, y)` with a cumulative trapezoid
/// integral; `a3` is sampled on `grid3`.
pub fn covariant_descent_lift(phi: &SpinorField, a3: &[f64], grid3: &Grid) -> Result<SpinorField> {
    if phi.grid.dim() != 2 || grid3.dim() != 3 || !grid3.same_plane(&phi.grid) {
        return Err(Error::GridMismatch("lift needs a planar field and a matching 3D grid".into()));
    }
    if a3.len() != grid3.len() {
        return Err(Error::DimensionMismatch {
            expected: grid3.len(),
            found: a3.len(),
        });
    }
    let np = phi.npts();
    let dz = grid3.spacing(2);
    let mut phase = vec![0.0; grid3.len()];
    for iz in 1..grid3.n(2) {
        for p in 0..np {
            let (lo, hi) = ((iz - 1) * np + p, iz * np + p);
            phase[hi] = phase[lo] + 0.5 * dz * (a3[lo] + a3[hi]);
        }
    }
    let mut psi = phi.extrude(grid3)?;
    let q = phi.charge;
    for c in 0..psi.components {
        par::for_each_mut(psi.component_mut(c), |i, z| *z *= Complex64::from_polar(1.0, q * phase[i]));
    }
    Ok(psi)
}

/// Max over interior points of `|∂₃Ψ − iqA³Ψ|` with a centred difference
/// along the (non-periodic) lift direction.
pub fn covariant_constraint_residual(psi: &SpinorField, a3: &[f64]) -> f64 {
    let g = &psi.grid;
    let np = g.n(0) * g.n(1);
    let dz = g.spacing(2);
    let q = psi.charge;
    let mut worst: f64 = 0.0;
    for c in 0..psi.components {
        let v = psi.component(c);
        for iz in 1..g.n(2) - 1 {
            for p in 0..np {
                let i = iz * np + p;
                let d = (v[i + np] - v[i - np]) / (2.0 * dz);
                worst = worst.max((d - I * q * a3[i] * v[i]).norm());
            }
        }
    }
    worst
}

/// Max z-variation of `Ψ̄ Γ_A Ψ` over all 16 basis elements.
pub fn bilinear_z_variation(psi: &SpinorField, rep: &GammaRepresentation) -> Result<f64> {
    let g0 = rep.gamma(0);
    let mats: Vec<ComplexMatrix> = basis_elements(rep)?.iter().map(|b| g0 * b).collect();
    let np = psi.grid.n(0) * psi.grid.n(1);
    let per_point: Vec<Vec<Complex64>> = par::map_range(psi.npts(), |i| {
        let s = psi.spinor(i);
        mats.iter().map(|m| m.sandwich(&s, &s)).collect()
    });
    Ok((0..psi.npts())
        .flat_map(|i| {
            let base = &per_point[i % np];
            per_point[i].iter().zip(base).map(|(a, b)| (a - b).norm()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::dirac_representation;
    use crate::dirac::{project_positive_energy, DiracHamiltonian};
    use crate::lattice::{gaussian_packet, PacketSpec};
    use crate::linalg::{c, ONE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn decomp() -> DescentDecomposition {
        DescentDecomposition::new(&dirac_representation()).unwrap()
    }

    fn plus_state(grid: &Grid, q: f64, momentum: [f64; 3]) -> CoupledState {
        let d = decomp();
        let s = d.p_plus.matvec(&[ONE, c(0.3, 0.2), c(0.0, 0.4), c(0.6, 0.0)]);
        let spec = PacketSpec {
            center: [grid.lengths()[0] / 2.0, grid.lengths()[1] / 2.0, 0.0],
            width: 1.5,
            momentum,
        };
        let mut psi = gaussian_packet(grid, &spec, &s, 1.0, q);
        let ham = DiracHamiltonian::new(&d.parent, 1.0).unwrap();
        psi = project_positive_energy(&psi, &ham).unwrap().apply_matrix(&d.p_plus);
        psi.normalize();
        CoupledState::new(psi, GaugeFieldState::zeros(grid), &d).unwrap().with_gauss_field().unwrap()
    }

    #[test]
    fn zero_charge_reproduces_free_evolution() {
        let g = Grid::square(16, 8.0).unwrap();
        let mut st = plus_state(&g, 0.0, [0.5, 0.0, 0.0]);
        for i in 0..g.len() {
            st.gauge.potential[3][i] = (2.0 * PI * g.coords(i)[0] / 8.0).sin();
            st.gauge.potential[1][i] = 0.2 * (2.0 * PI * g.coords(i)[1] / 8.0).cos();
        }
        let dt = 0.01;
        let run = run_coupled(&st, 0.2, dt).unwrap();
        let ham = DiracHamiltonian::new(&st.decomp.parent, 1.0).unwrap();
        let prop = SpectralPropagator::new(&ham, &g, dt).unwrap();
        let ps = PotentialSolver::new(&g);
        let mut psi = st.psi.clone();
        let mut gauge = st.gauge.clone();
        let zero = vec![0.0; g.len()];
        for _ in 0..20 {
            prop.apply(&mut psi).unwrap();
            ps.step(&mut gauge, [&zero, &zero, &zero], dt);
        }
        assert!(run.final_state.psi.max_abs_diff(&psi) < 1e-12);
        for a in 0..4 {
            let d = run.final_state.gauge.potential[a].iter().zip(&gauge.potential[a]).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn stationary_packet_conserves_and_respects_gauss() {
        let g = Grid::square(32, 16.0).unwrap();
        let st = plus_state(&g, 0.3, [0.0; 3]);
        let run = run_coupled(&st, 0.5, 0.005).unwrap();
        assert!(run.charge_drift < 1e-8);
        assert!(run.kappa3_drift < 1e-8);
        assert!(run.gauss_initial < 1e-12);
        assert!(run.gauss_residual_max < 1e-6, "{}", run.gauss_residual_max);
        assert!(run.norm_minus_max < 1e-8);
        assert_eq!(kappa3_charge_monitor(&run).len(), 101);
    }

    #[test]
    fn cfl_and_nan_rejected() {
        let g = Grid::square(16, 8.0).unwrap();
        let st = plus_state(&g, 0.3, [0.0; 3]);
        assert!(matches!(CoupledSolver::new(&st, 0.5), Err(Error::CflViolation { .. })));
        let mut bad = st.clone();
        bad.psi.values[3] = c(f64::NAN, 0.0);
        assert!(matches!(coupled_step(&bad, 0.01), Err(Error::NonFinite(_))));
    }

    #[test]
    fn temporal_gauge_required() {
        let g = Grid::square(8, 4.0).unwrap();
        let mut gauge = GaugeFieldState::zeros(&g);
        gauge.potential[0][0] = 1.0;
        assert!(CoupledState::new(SpinorField::zeros(&g, 4, 1.0, 0.3), gauge, &decomp()).is_err());
    }

    #[test]
    fn mirror_moves_weight_between_sectors() {
        let g = Grid::square(16, 8.0).unwrap();
        let st = plus_state(&g, 0.3, [0.0; 3]);
        let m = mirror_sectors(&st.psi, &st.decomp);
        assert!(projected_charge(&m, &st.decomp.p_plus) < 1e-28);
        assert!((total_charge(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_field_checks() {
        let g = Grid::square(8, 4.0).unwrap();
        let zero = CoupledState::new(SpinorField::zeros(&g, 4, 1.0, 0.3), GaugeFieldState::zeros(&g), &decomp()).unwrap();
        let r = vanishing_field_implication_check(&zero, 1e-14).unwrap();
        assert!(r.transverse_current_vanishes && r.implication_holds);
        assert_eq!(r.zero_current_points, g.len());

        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let mut st = zero.clone();
        for z in st.psi.values.iter_mut() {
            *z = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let r = vanishing_field_implication_check(&st, 1e-14).unwrap();
        assert!(r.density_max > 0.0);
        assert!(!r.transverse_current_vanishes);
        assert_eq!(r.density_mismatches, 0);
        assert!(r.implication_holds);
    }

    #[test]
    fn gauge_transform_preserves_observables_initially() {
        let g = Grid::square(16, 8.0).unwrap();
        let st = plus_state(&g, 0.3, [0.0; 3]);
        let chi: Vec<f64> = (0..g.len()).map(|i| 0.01 * (2.0 * PI * g.coords(i)[0] / 8.0).sin()).collect();
        let tr = gauge_transform(&st, &chi).unwrap();
        let s = Spectral::new(&g);
        assert!(Observables::of(&st, &s).unwrap().max_difference(&Observables::of(&tr, &s).unwrap()) < 1e-14);
        let r = gauge_equivalence_check(&st, &chi, 0.2, 0.005).unwrap();
        assert!(r.max_observable_difference < 1e-6, "{r:?}");
        assert!(r.potential_difference > 1e-3);
    }

    #[test]
    fn lift_constant_and_zero_profiles() {
        let plane = Grid::square(8, 4.0).unwrap();
        let g3 = plane.extruded(8, 2.0).unwrap();
        let phi = SpinorField::from_fn(&plane, 4, 1.0, 0.5, |x| vec![c(x[0], 1.0), ONE, ZERO, c(0.0, x[1])]);
        let lifted = covariant_descent_lift(&phi, &vec![0.0; g3.len()], &g3).unwrap();
        assert_eq!(lifted, phi.extrude(&g3).unwrap());

        let lifted = covariant_descent_lift(&phi, &vec![0.7; g3.len()], &g3).unwrap();
        for i in 0..g3.len() {
            let z = g3.coords(i)[2];
            let expected = phi.component(0)[g3.plane_index(i)] * Complex64::from_polar(1.0, 0.5 * 0.7 * z);
            assert!((lifted.component(0)[i] - expected).norm() < 1e-13);
        }
        assert!(bilinear_z_variation(&lifted, &dirac_representation()).unwrap() < 1e-12);
    }

    fn smooth_profile(g3: &Grid, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let coeffs: Vec<[f64; 4]> = (0..4).map(|_| std::array::from_fn(|_| rng.random::<f64>() - 0.5)).collect();
        let l = g3.lengths().to_vec();
        (0..g3.len())
            .map(|i| {
                let x = g3.coords(i);
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(m, cf)| {
                        let m = (m + 1) as f64;
                        cf[0] * (2.0 * PI * m * x[2] / l[2] + cf[1]).sin() * (1.0 + cf[2] * (2.0 * PI * x[0] / l[0]).cos() + cf[3] * (2.0 * PI * x[1] / l[1]).sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn lift_satisfies_constraint_to_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let plane = Grid::square(8, 4.0).unwrap();
        let phi = SpinorField::from_fn(&plane, 4, 1.0, 0.8, |x| vec![c(1.0, x[0]), ONE, c(0.2, 0.0), c(0.0, x[1])]);
        let coarse = plane.extruded(32, 4.0).unwrap();
        let fine = plane.extruded(64, 4.0).unwrap();
        let seed_state = rng.clone();
        let a_coarse = smooth_profile(&coarse, &mut rng);
        let mut rng2 = seed_state;
        let a_fine = smooth_profile(&fine, &mut rng2);
        let r_coarse = covariant_constraint_residual(&covariant_descent_lift(&phi, &a_coarse, &coarse).unwrap(), &a_coarse);
        let r_fine = covariant_constraint_residual(&covariant_descent_lift(&phi, &a_fine, &fine).unwrap(), &a_fine);
        let ratio = r_coarse / r_fine;
        assert!((3.0..5.0).contains(&ratio), "{ratio}");
        let lifted = covariant_descent_lift(&phi, &a_fine, &fine).unwrap();
        assert!(bilinear_z_variation(&lifted, &dirac_representation()).unwrap() < 1e-10);
    }
}
