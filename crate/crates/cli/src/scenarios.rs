use descent_core::clifford::{dirac_representation, transform, GammaRepresentation, ALGEBRA_TOL};
use descent_core::coupled::{run_coupled, sector_vanishing_experiment, CoupledState};
use descent_core::descent::{reflection_relation_check, DescentDecomposition};
use descent_core::dirac::{
    chirality_projectors, chirality_split_experiment, descent_equivalence_experiment, project_positive_energy,
    DiracHamiltonian,
};
use descent_core::lattice::{gaussian_packet, DiagnosticsSeries, GaugeFieldState, Grid, PacketSpec, Spectral, SpinorField};
use descent_core::linalg::{c, random_unitary, ComplexMatrix};
use descent_core::maxwell::{broadcast, eeb_bbe_experiment, EmFields, ModulatedSource, NoSource, CONTINUITY_TOL};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::audit::{audit_representation, worst};
use crate::config::{ScenarioConfig, ScenarioKind, Sector};
use crate::report::Check;

pub struct Outcome {
    pub checks: Vec<Check>,
    pub metrics: Map<String, Value>,
    pub series: DiagnosticsSeries,
}

// Tolerances of the owning modules.
const DESCENT_DEVIATION: f64 = 1e-8;
const FREE_LEAKAGE: f64 = 1e-10;
const FREE_DRIFT: f64 = 1e-10;
const MAXWELL_LEAKAGE: f64 = 1e-10;
const DIV_B: f64 = 1e-10;
const MAXWELL_GAUSS: f64 = 1e-8;
const MAXWELL_ENERGY: f64 = 1e-6;
const COUPLED_CHARGE: f64 = 1e-8;
const COUPLED_GAUSS: f64 = 1e-6;
const SECTOR_LEAKAGE: f64 = 1e-8;

pub fn run(cfg: &ScenarioConfig) -> descent_core::Result<Outcome> {
    match cfg.kind {
        ScenarioKind::AlgebraAudit => algebra_audit(cfg),
        ScenarioKind::FreeDescent => free_descent(cfg),
        ScenarioKind::Chirality => chirality(cfg),
        ScenarioKind::MaxwellDescent => maxwell_descent(cfg),
        ScenarioKind::Coupled => coupled(cfg),
        ScenarioKind::SectorVanishing => sector_vanishing(cfg),
    }
}

fn metrics(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn grid(cfg: &ScenarioConfig) -> descent_core::Result<Grid> {
    Grid::new(&cfg.grid.points, &cfg.grid.lengths)
}

/// Seeded spinor amplitudes, projected onto the configured sector.
fn seeded_spinor(cfg: &ScenarioConfig, decomp: &DescentDecomposition) -> descent_core::Result<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let raw: Vec<Complex64> = (0..4).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let proj: Option<ComplexMatrix> = match cfg.initial.sector {
        Sector::Plus => Some(decomp.p_plus.clone()),
        Sector::Minus => Some(decomp.p_minus.clone()),
        Sector::Left => Some(chirality_projectors(&decomp.parent)?.0),
        Sector::Right => Some(chirality_projectors(&decomp.parent)?.1),
        Sector::Mixed => None,
    };
    Ok(match proj {
        Some(p) => p.matvec(&raw),
        None => raw,
    })
}

fn packet(cfg: &ScenarioConfig) -> PacketSpec {
    let i = &cfg.initial;
    PacketSpec {
        center: [i.center[0], i.center[1], 0.0],
        width: i.width,
        momentum: [i.momentum[0], i.momentum[1], 0.0],
    }
}

/// z-independent packet on the 3D grid.
fn extruded_packet(cfg: &ScenarioConfig, decomp: &DescentDecomposition) -> descent_core::Result<SpinorField> {
    let g = grid(cfg)?;
    let spinor = seeded_spinor(cfg, decomp)?;
    let mut plane = gaussian_packet(&g.planar()?, &packet(cfg), &spinor, cfg.physics.mass, cfg.physics.charge);
    plane.normalize();
    plane.extrude(&g)
}

fn algebra_audit(cfg: &ScenarioConfig) -> descent_core::Result<Outcome> {
    let dirac = dirac_representation();
    let decomp = DescentDecomposition::new(&dirac)?;
    let mut reps: Vec<GammaRepresentation> = vec![dirac.clone(), decomp.block_representation()?];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.audit_samples {
        reps.push(transform(&dirac, &random_unitary(4, &mut rng))?);
    }
    let mut series = DiagnosticsSeries::new();
    let mut worst_by_name: Vec<Check> = Vec::new();
    for (k, rep) in reps.iter().enumerate() {
        let checks = audit_representation(rep);
        series.push("max_residual", k as f64, worst(&checks))?;
        for c in checks {
            match worst_by_name.iter_mut().find(|w| w.invariant == c.invariant) {
                Some(w) if c.value > w.value || !c.pass => *w = c,
                Some(_) => {}
                None => worst_by_name.push(c),
            }
        }
    }
    let refl = reflection_relation_check(&decomp)?;
    worst_by_name.push(Check::below("y_reflection_relation", refl.residual, ALGEBRA_TOL));
    Ok(Outcome {
        checks: worst_by_name,
        metrics: metrics(json!({
            "representations": reps.len(),
            "reflection_residual": refl.residual,
            "unreflected_difference": refl.unreflected_difference,
        })),
        series,
    })
}

fn free_descent(cfg: &ScenarioConfig) -> descent_core::Result<Outcome> {
    let decomp = DescentDecomposition::new(&dirac_representation())?;
    let psi = extruded_packet(cfg, &decomp)?;
    let r = descent_equivalence_experiment(&psi, &decomp, cfg.time.t_final, cfg.time.dt)?;
    let mut checks = vec![
        Check::below("descent_max_deviation", r.max_deviation, DESCENT_DEVIATION),
        Check::below("charge_drift", r.charge_drift, FREE_DRIFT),
        Check::below("kappa3_charge_drift", r.kappa3_drift, FREE_DRIFT),
    ];
    if cfg.initial.sector != Sector::Mixed {
        checks.push(Check::below("cross_sector_leakage", r.leakage, FREE_LEAKAGE));
    }
    Ok(Outcome {
        checks,
        metrics: metrics(serde_json::to_value(&r)?),
        series: r.series,
    })
}

fn chirality(cfg: &ScenarioConfig) -> descent_core::Result<Outcome> {
    let decomp = DescentDecomposition::new(&dirac_representation())?;
    let psi = extruded_packet(cfg, &decomp)?;
    let r = chirality_split_experiment(&psi, &decomp.parent, cfg.time.t_final, cfg.time.dt)?;
    Ok(Outcome {
        checks: vec![
            Check::below("chirality_leakage", r.leakage, FREE_LEAKAGE),
            Check::below("charge_drift", r.charge_drift, FREE_DRIFT),
        ],
        metrics: metrics(serde_json::to_value(&r)?),
        series: r.series,
    })
}

fn maxwell_descent(cfg: &ScenarioConfig) -> descent_core::Result<Outcome> {
    let g = grid(cfg)?;
    let plane = g.planar()?;
    let i = &cfg.initial;
    let wave: Vec<f64> = (0..plane.len())
        .map(|idx| {
            let d = plane.displacement(idx, &i.center);
            let r2 = d[0] * d[0] + d[1] * d[1];
            i.amplitude * (-r2 / (2.0 * i.width * i.width)).exp() * (i.momentum[0] * d[0] + i.momentum[1] * d[1]).cos()
        })
        .collect();
    let half: Vec<f64> = wave.iter().map(|v| 0.5 * v).collect();
    let zero = vec![0.0; plane.len()];
    let mut fields = EmFields::traveling_wave(&Spectral::new(&plane), [&wave, &zero, &half]).extrude(&g)?;

    let s = &cfg.source;
    let r = if s.is_off() {
        eeb_bbe_experiment(&fields, &NoSource, cfg.time.t_final, cfg.time.dt)?
    } else {
        let source = ModulatedSource::gaussian(&plane, i.center, s.width, s.omega, s.in_plane, s.out_of_plane)?;
        fields.add_gauss_field(&Spectral::new(&g), &broadcast(source.static_charge(), &g));
        eeb_bbe_experiment(&fields, &source, cfg.time.t_final, cfg.time.dt)?
    };
    let mut checks = vec![
        Check::below("eeb_leakage", r.leakage_eeb, MAXWELL_LEAKAGE),
        Check::below("bbe_leakage", r.leakage_bbe, MAXWELL_LEAKAGE),
        Check::below("div_b", r.div_b, DIV_B),
        Check::below("gauss_residual", r.gauss_residual, MAXWELL_GAUSS),
        Check::below("continuity_residual", r.continuity_residual, CONTINUITY_TOL),
    ];
    if s.is_off() {
        checks.push(Check::below("energy_drift", r.energy_drift, MAXWELL_ENERGY));
    }
    Ok(Outcome {
        checks,
        metrics: metrics(serde_json::to_value(&r)?),
        series: r.series,
    })
}

/// Positive-energy packet in the configured sector with a consistent
/// longitudinal field.
fn coupled_initial(cfg: &ScenarioConfig) -> descent_core::Result<CoupledState> {
    let g = grid(cfg)?;
    let decomp = DescentDecomposition::new(&dirac_representation())?;
    let spinor = seeded_spinor(cfg, &decomp)?;
    let ham = DiracHamiltonian::new(&decomp.parent, cfg.physics.mass)?;
    let raw = gaussian_packet(&g, &packet(cfg), &spinor, cfg.physics.mass, cfg.physics.charge);
    let mut psi = project_positive_energy(&raw, &ham)?;
    // the energy projection commutes with P± only up to roundoff
    match cfg.initial.sector {
        Sector::Plus => psi = psi.apply_matrix(&decomp.p_plus),
        Sector::Minus => psi = psi.apply_matrix(&decomp.p_minus),
        _ => {}
    }
    psi.normalize();
    CoupledState::new(psi, GaugeFieldState::zeros(&g), &decomp)?.with_gauss_field()
}

fn coupled(cfg: &ScenarioConfig) -> descent_core::Result<Outcome> {
    let initial = coupled_initial(cfg)?;
    let r = run_coupled(&initial, cfg.time.t_final, cfg.time.dt)?;
    Ok(Outcome {
        checks: vec![
            Check::below("charge_drift", r.charge_drift, COUPLED_CHARGE),
            Check::below("gauss_residual_max", r.gauss_residual_max, COUPLED_GAUSS),
        ],
        metrics: metrics(json!({
            "charge_drift": r.charge_drift,
            "kappa3_drift": r.kappa3_drift,
            "gauss_residual_max": r.gauss_residual_max,
            "gauss_initial": r.gauss_initial,
            "continuity_residual_max": r.continuity_residual_max,
            "norm_plus_max": r.norm_plus_max,
            "norm_minus_max": r.norm_minus_max,
        })),
        series: r.series,
    })
}

fn sector_vanishing(cfg: &ScenarioConfig) -> descent_core::Result<Outcome> {
    let initial = coupled_initial(cfg)?;
    let r = sector_vanishing_experiment(&initial, cfg.time.t_final, cfg.time.dt)?;
    Ok(Outcome {
        checks: vec![
            Check::below("leakage_minus", r.leakage_minus, SECTOR_LEAKAGE),
            Check::below("leakage_plus", r.leakage_plus, SECTOR_LEAKAGE),
            Check::below("charge_drift", r.charge_drift, COUPLED_CHARGE),
            Check::below("gauss_residual_max", r.gauss_residual_max, COUPLED_GAUSS),
        ],
        metrics: metrics(serde_json::to_value(&r)?),
        series: r.series,
    })
}
