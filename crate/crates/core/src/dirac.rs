//! Free Dirac evolution with an exact per-mode spectral propagator, and the
//! descent and chirality experiments built on it.

use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::{gamma5, GammaRepresentation};
use crate::descent::DescentDecomposition;
use crate::error::{Error, Result};
use crate::lattice::{kappa3_charge, projected_charge, total_charge, DiagnosticsSeries, FftPlan, Grid, SpinorField};
use crate::linalg::{hermitian_eigen, ComplexMatrix, ONE, ZERO};
use crate::par;

/// Largest supported spinor order on a grid.
const MAX_COMPONENTS: usize = 4;

/// `H(k) = Σ αⁱ kᵢ + β m` for a fixed representation and mass.
#[derive(Debug, Clone)]
pub struct DiracHamiltonian {
    rep: GammaRepresentation,
    mass: f64,
    alphas: Vec<ComplexMatrix>,
    beta: ComplexMatrix,
}

impl DiracHamiltonian {
    pub fn new(rep: &GammaRepresentation, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::OutOfRange {
                what: "mass",
                value: mass.to_string(),
            });
        }
        if rep.order() > MAX_COMPONENTS {
            return Err(Error::DimensionMismatch {
                expected: MAX_COMPONENTS,
                found: rep.order(),
            });
        }
        let g0 = rep.gamma(0);
        Ok(Self {
            rep: rep.clone(),
            mass,
            alphas: (1..=rep.spatial_dim()).map(|i| g0 * rep.gamma(i)).collect(),
            beta: g0.clone(),
        })
    }

    pub fn rep(&self) -> &GammaRepresentation {
        &self.rep
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn order(&self) -> usize {
        self.rep.order()
    }

    pub fn alphas(&self) -> &[ComplexMatrix] {
        &self.alphas
    }

    pub fn beta(&self) -> &ComplexMatrix {
        &self.beta
    }

    /// `H(k)`; wavevector components beyond the representation's spatial
    /// dimension must vanish.
    pub fn matrix(&self, k: [f64; 3]) -> ComplexMatrix {
        debug_assert!(k[self.alphas.len().min(3)..].iter().all(|&x| x == 0.0));
        let mut h = self.beta.scale_re(self.mass);
        for (a, &ki) in self.alphas.iter().zip(&k) {
            if ki != 0.0 {
                h = &h + &a.scale_re(ki);
            }
        }
        h
    }

    pub fn frequency(&self, k: [f64; 3]) -> f64 {
        let k2: f64 = k[..self.alphas.len().min(3)].iter().map(|x| x * x).sum();
        (k2 + self.mass * self.mass).sqrt()
    }

    fn check_field(&self, grid: &Grid, components: usize) -> Result<()> {
        if components != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                found: components,
            });
        }
        if grid.dim() > self.rep.spatial_dim() {
            return Err(Error::WrongSpatialDimension {
                expected: grid.dim(),
                found: self.rep.spatial_dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Positive,
    Negative,
}

/// Frequency and eigenspinor of `H(k)` on the requested energy branch.
pub fn plane_wave(ham: &DiracHamiltonian, k: [f64; 3], branch: Branch) -> Result<(f64, Vec<Complex64>)> {
    let eig = hermitian_eigen(&ham.matrix(k))?;
    let col = match branch {
        Branch::Positive => eig.values.len() - 1,
        Branch::Negative => 0,
    };
    Ok((eig.values[col], eig.vectors.column(col)))
}

/// Per-mode propagators `exp(−iH(k)dt)` for one grid and step, built from
/// eigendecompositions of `H(k)` once and reused every step.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    grid: Grid,
    order: usize,
    dt: f64,
    plan: FftPlan,
    // row-major order×order block per mode
    unitaries: Vec<Complex64>,
}

impl SpectralPropagator {
    pub fn new(ham: &DiracHamiltonian, grid: &Grid, dt: f64) -> Result<Self> {
        Self::with_function(ham, grid, dt, |w| Complex64::from_polar(1.0, -w * dt))
    }

    /// Per-mode spectral projector onto the positive-energy branch.
    pub fn positive_energy_projector(ham: &DiracHamiltonian, grid: &Grid) -> Result<Self> {
        Self::with_function(ham, grid, 0.0, |w| if w > 0.0 { ONE } else { ZERO })
    }

    fn with_function(ham: &DiracHamiltonian, grid: &Grid, dt: f64, f: impl Fn(f64) -> Complex64 + Sync) -> Result<Self> {
        if !dt.is_finite() {
            return Err(Error::NonFinite("time step"));
        }
        if grid.dim() > ham.rep().spatial_dim() {
            return Err(Error::WrongSpatialDimension {
                expected: grid.dim(),
                found: ham.rep().spatial_dim(),
            });
        }
        let order = ham.order();
        let blocks = par::map_range(grid.len(), |i| {
            hermitian_eigen(&ham.matrix(grid.mode(i))).map(|e| e.apply_fn(&f))
        });
        let mut unitaries = Vec::with_capacity(grid.len() * order * order);
        for b in blocks {
            unitaries.extend_from_slice(b?.as_slice());
        }
        Ok(Self {
            grid: grid.clone(),
            order,
            dt,
            plan: FftPlan::new(grid),
            unitaries,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// The cached block for flattened mode `idx`.
    pub fn mode_matrix(&self, idx: usize) -> ComplexMatrix {
        let s = self.order * self.order;
        ComplexMatrix::from_row_major(self.unitaries[idx * s..(idx + 1) * s].to_vec()).expect("cached block is square")
    }

    pub fn apply(&self, psi: &mut SpinorField) -> Result<()> {
        if psi.grid != self.grid {
            return Err(Error::GridMismatch("field grid differs from propagator grid".into()));
        }
        if psi.components != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: psi.components,
            });
        }
        let n = psi.npts();
        let nc = self.order;
        for c in 0..nc {
            self.plan.forward(psi.component_mut(c));
        }
        let values = &psi.values;
        let mixed: Vec<[Complex64; MAX_COMPONENTS]> = par::map_range(n, |i| {
            let u = &self.unitaries[i * nc * nc..(i + 1) * nc * nc];
            let mut out = [ZERO; MAX_COMPONENTS];
            for (r, o) in out.iter_mut().enumerate().take(nc) {
                let row = &u[r * nc..(r + 1) * nc];
                *o = (0..nc).map(|c| row[c] * values[c * n + i]).sum();
            }
            out
        });
        for c in 0..nc {
            let comp = psi.component_mut(c);
            par::for_each_mut(comp, |i, z| *z = mixed[i][c]);
            self.plan.inverse(comp);
        }
        Ok(())
    }

    pub fn step(&self, psi: &SpinorField) -> Result<SpinorField> {
        let mut out = psi.clone();
        self.apply(&mut out)?;
        Ok(out)
    }
}

/// One exact free step; builds the propagator on every call, so loops
/// should hold a [`SpectralPropagator`] instead.
pub fn free_step(psi: &SpinorField, ham: &DiracHamiltonian, dt: f64) -> Result<SpinorField> {
    ham.check_field(&psi.grid, psi.components)?;
    SpectralPropagator::new(ham, &psi.grid, dt)?.step(psi)
}

pub fn project_positive_energy(psi: &SpinorField, ham: &DiracHamiltonian) -> Result<SpinorField> {
    ham.check_field(&psi.grid, psi.components)?;
    SpectralPropagator::positive_energy_projector(ham, &psi.grid)?.step(psi)
}

/// Number of steps of size `dt` covering `[0, t_final]`.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::OutOfRange {
            what: "dt",
            value: dt.to_string(),
        });
    }
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::OutOfRange {
            what: "final time",
            value: t_final.to_string(),
        });
    }
    let steps = (t_final / dt).round();
    if (steps * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(Error::InvalidArgument(format!("final time {t_final} is not a multiple of dt {dt}")));
    }
    Ok(steps as usize)
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentEquivalenceReport {
    /// Max over time and z-slices of the pointwise difference between the
    /// 3+1 run and the recombined pair of 2+1 runs.
    pub max_deviation: f64,
    /// Max over time of the norm of the sector that started smaller.
    pub leakage: f64,
    pub leakage_sector: Sector,
    pub charge_drift: f64,
    pub kappa3_drift: f64,
    pub steps: usize,
    pub dt: f64,
    #[serde(skip)]
    pub series: DiagnosticsSeries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Plus,
    Minus,
}

fn relative_drift(now: f64, start: f64) -> f64 {
    if start > 0.0 {
        (now - start).abs() / start
    } else {
        now.abs()
    }
}

/// Splits a planar 4-component field into the two 2-component fields of
/// `U Ψ`.
pub fn split_field(psi: &SpinorField, decomp: &DescentDecomposition) -> Result<(SpinorField, SpinorField)> {
    if psi.components != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: psi.components,
        });
    }
    let rotated = psi.apply_matrix(&decomp.u_block);
    let mut plus = SpinorField::zeros(&psi.grid, 2, psi.mass, psi.charge);
    let mut minus = plus.clone();
    for c in 0..2 {
        plus.component_mut(c).copy_from_slice(rotated.component(c));
        minus.component_mut(c).copy_from_slice(rotated.component(c + 2));
    }
    Ok((plus, minus))
}

/// `U†(ψ₊ ⊕ ψ₋)`.
pub fn merge_fields(plus: &SpinorField, minus: &SpinorField, decomp: &DescentDecomposition) -> Result<SpinorField> {
    if plus.grid != minus.grid || plus.components != 2 || minus.components != 2 {
        return Err(Error::GridMismatch("sector fields must be 2-component on one grid".into()));
    }
    let mut stacked = SpinorField::zeros(&plus.grid, 4, plus.mass, plus.charge);
    for c in 0..2 {
        stacked.component_mut(c).copy_from_slice(plus.component(c));
        stacked.component_mut(c + 2).copy_from_slice(minus.component(c));
    }
    Ok(stacked.apply_matrix(&decomp.u_block.adjoint()))
}

/// Runs the 3+1 solver on z-independent data alongside two independent 2+1
/// solvers for the sectors, comparing them every step.
pub fn descent_equivalence_experiment(
    initial: &SpinorField,
    decomp: &DescentDecomposition,
    t_final: f64,
    dt: f64,
) -> Result<DescentEquivalenceReport> {
    if initial.grid.dim() != 3 || initial.components != 4 {
        return Err(Error::GridMismatch("descent experiment needs a 4-component field on a 3D grid".into()));
    }
    let variation = initial.z_variation();
    if variation > 0.0 {
        return Err(Error::NotZIndependent(variation));
    }
    let steps = step_count(t_final, dt)?;
    let full = SpectralPropagator::new(&DiracHamiltonian::new(&decomp.parent, initial.mass)?, &initial.grid, dt)?;
    let plane = initial.grid.planar()?;
    let prop_plus = SpectralPropagator::new(&DiracHamiltonian::new(&decomp.sub_plus, initial.mass)?, &plane, dt)?;
    let prop_minus = SpectralPropagator::new(&DiracHamiltonian::new(&decomp.sub_minus, initial.mass)?, &plane, dt)?;

    let mut psi = initial.clone();
    let (mut plus, mut minus) = split_field(&initial.z_slice(0)?, decomp)?;
    let sector = if total_charge(&plus) >= total_charge(&minus) {
        Sector::Minus
    } else {
        Sector::Plus
    };
    let watched = match sector {
        Sector::Minus => &decomp.p_minus,
        Sector::Plus => &decomp.p_plus,
    };
    let q0 = total_charge(&psi);
    let k0 = kappa3_charge(&psi, decomp)?;
    let nz = initial.grid.n(2);
    let mut report = DescentEquivalenceReport {
        max_deviation: 0.0,
        leakage: projected_charge(&psi, watched).sqrt(),
        leakage_sector: sector,
        charge_drift: 0.0,
        kappa3_drift: 0.0,
        steps,
        dt,
        series: DiagnosticsSeries::new(),
    };
    for step in 0..=steps {
        if step > 0 {
            full.apply(&mut psi)?;
            prop_plus.apply(&mut plus)?;
            prop_minus.apply(&mut minus)?;
        }
        let t = step as f64 * dt;
        let reduced = merge_fields(&plus, &minus, decomp)?;
        let deviation = (0..nz)
            .map(|iz| psi.z_slice(iz).map(|s| s.max_abs_diff(&reduced)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let leak = projected_charge(&psi, watched).sqrt();
        let q = total_charge(&psi);
        let k = kappa3_charge(&psi, decomp)?;
        report.max_deviation = report.max_deviation.max(deviation);
        report.leakage = report.leakage.max(leak);
        report.charge_drift = report.charge_drift.max(relative_drift(q, q0));
        report.kappa3_drift = report.kappa3_drift.max((k - k0).abs());
        report.series.push("deviation", t, deviation)?;
        report.series.push("leakage", t, leak)?;
        report.series.push("charge", t, q)?;
        report.series.push("kappa3_charge", t, k)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorLeakageReport {
    pub leakage: f64,
    pub charge_drift: f64,
    pub kappa3_drift: f64,
    #[serde(skip)]
    pub series: DiagnosticsSeries,
}

/// 3+1 evolution of arbitrary (possibly z-dependent) data, monitoring the
/// norm of the `P₋` component and the κ³ charge.
pub fn sector_leakage_run(
    initial: &SpinorField,
    decomp: &DescentDecomposition,
    t_final: f64,
    dt: f64,
) -> Result<SectorLeakageReport> {
    let steps = step_count(t_final, dt)?;
    let prop = SpectralPropagator::new(&DiracHamiltonian::new(&decomp.parent, initial.mass)?, &initial.grid, dt)?;
    let mut psi = initial.clone();
    let q0 = total_charge(&psi);
    let k0 = kappa3_charge(&psi, decomp)?;
    let mut report = SectorLeakageReport {
        leakage: 0.0,
        charge_drift: 0.0,
        kappa3_drift: 0.0,
        series: DiagnosticsSeries::new(),
    };
    for step in 0..=steps {
        if step > 0 {
            prop.apply(&mut psi)?;
        }
        let t = step as f64 * dt;
        let leak = projected_charge(&psi, &decomp.p_minus).sqrt();
        let k = kappa3_charge(&psi, decomp)?;
        report.leakage = report.leakage.max(leak);
        report.charge_drift = report.charge_drift.max(relative_drift(total_charge(&psi), q0));
        report.kappa3_drift = report.kappa3_drift.max((k - k0).abs());
        report.series.push("leakage", t, leak)?;
        report.series.push("kappa3_charge", t, k)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Chirality {
    /// `γ⁵ = +1`
    Left,
    /// `γ⁵ = −1`
    Right,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiralityReport {
    pub initial_chirality: Option<Chirality>,
    /// Max over time of the norm of the opposite-chirality component.
    pub leakage: f64,
    pub charge_drift: f64,
    #[serde(skip)]
    pub series: DiagnosticsSeries,
}

pub fn chirality_projectors(rep: &GammaRepresentation) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let g5 = gamma5(rep)?;
    let id = ComplexMatrix::identity(4);
    Ok(((&id + &g5).scale_re(0.5), (&id - &g5).scale_re(0.5)))
}

/// Massless 3+1 evolution of data in one γ⁵ eigenspace.
pub fn chirality_split_experiment(
    initial: &SpinorField,
    rep: &GammaRepresentation,
    t_final: f64,
    dt: f64,
) -> Result<ChiralityReport> {
    if initial.mass != 0.0 {
        return Err(Error::MassiveChirality(initial.mass));
    }
    chirality_leakage_run(initial, rep, t_final, dt)
}

/// Like [`chirality_split_experiment`] but accepts any mass.
pub fn chirality_leakage_run(
    initial: &SpinorField,
    rep: &GammaRepresentation,
    t_final: f64,
    dt: f64,
) -> Result<ChiralityReport> {
    let (left, right) = chirality_projectors(rep)?;
    let q0 = total_charge(initial);
    let (ql, qr) = (projected_charge(initial, &left), projected_charge(initial, &right));
    let tol = 1e-20 * q0.max(f64::MIN_POSITIVE);
    let chirality = if q0 == 0.0 {
        None
    } else if qr <= tol {
        Some(Chirality::Left)
    } else if ql <= tol {
        Some(Chirality::Right)
    } else {
        return Err(Error::InvalidArgument("initial data is not in a single chirality sector".into()));
    };
    let watched = match chirality {
        Some(Chirality::Left) | None => &right,
        Some(Chirality::Right) => &left,
    };
    let steps = step_count(t_final, dt)?;
    let prop = SpectralPropagator::new(&DiracHamiltonian::new(rep, initial.mass)?, &initial.grid, dt)?;
    let mut psi = initial.clone();
    let mut report = ChiralityReport {
        initial_chirality: chirality,
        leakage: 0.0,
        charge_drift: 0.0,
        series: DiagnosticsSeries::new(),
    };
    for step in 0..=steps {
        if step > 0 {
            prop.apply(&mut psi)?;
        }
        let leak = projected_charge(&psi, watched).sqrt();
        report.leakage = report.leakage.max(leak);
        report.charge_drift = report.charge_drift.max(relative_drift(total_charge(&psi), q0));
        report.series.push("chirality_leakage", step as f64 * dt, leak)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KleinGordonReport {
    /// `max_k ‖H(k)² − (k² + m²) I‖`
    pub square_residual: f64,
    /// `max_k max_i | |λ_i| − ω(k) |`
    pub eigenvalue_residual: f64,
    /// Positive eigenvalues per mode (when `m > 0` or `k ≠ 0`).
    pub degeneracy: usize,
}

/// Checks that `H(k)` squares to the Klein–Gordon symbol on every mode.
pub fn klein_gordon_check(ham: &DiracHamiltonian, grid: &Grid) -> Result<KleinGordonReport> {
    ham.check_field(grid, ham.order())?;
    let per_mode = par::map_range(grid.len(), |i| -> Result<(f64, f64, usize)> {
        let k = grid.mode(i);
        let h = ham.matrix(k);
        let w = ham.frequency(k);
        let sq = (&h * &h).max_abs_diff(&ComplexMatrix::identity(h.dim()).scale_re(w * w));
        let eig = hermitian_eigen(&h)?;
        let ev = eig.values.iter().map(|l| (l.abs() - w).abs()).fold(0.0, f64::max);
        Ok((sq, ev, eig.values.iter().filter(|&&l| l > 0.0).count()))
    });
    let mut report = KleinGordonReport {
        square_residual: 0.0,
        eigenvalue_residual: 0.0,
        degeneracy: ham.order() / 2,
    };
    for (i, r) in per_mode.into_iter().enumerate() {
        let (sq, ev, pos) = r?;
        report.square_residual = report.square_residual.max(sq);
        report.eigenvalue_residual = report.eigenvalue_residual.max(ev);
        if ham.frequency(grid.mode(i)) > 0.0 && pos != ham.order() / 2 {
            report.degeneracy = pos;
        }
    }
    Ok(report)
}
