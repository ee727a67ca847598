//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are fixed here and never loosened.

use std::f64::consts::PI;
use std::time::Instant;

use descent_core::clifford::{dirac_representation, gamma5, planar_triple, transform, GammaRepresentation};
use descent_core::coupled::{
    bilinear_z_variation, coupling_convergence_check, covariant_constraint_residual, covariant_descent_lift,
    gauge_equivalence_check, run_coupled, sector_vanishing_experiment, CoupledState,
};
use descent_core::descent::{reflection_relation_check, solve_decoupling_projections, transverse_commutant, DescentDecomposition};
use descent_core::dirac::{
    chirality_projectors, chirality_split_experiment, descent_equivalence_experiment, project_positive_energy,
    sector_leakage_run, DiracHamiltonian,
};
use descent_core::lattice::{gaussian_packet, GaugeFieldState, Grid, PacketSpec, Spectral, SpinorField};
use descent_core::linalg::{c, hermitian_eigen, random_unitary, ComplexMatrix, ONE};
use descent_core::maxwell::{broadcast, eeb_bbe_experiment, potential_formulation_check, EmFields, ModulatedSource, NoSource};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

struct Check {
    parts: Vec<String>,
    pass: bool,
}

impl Check {
    fn new() -> Self {
        Self {
            parts: Vec::new(),
            pass: true,
        }
    }

    /// `value < limit`
    fn below(&mut self, name: &str, value: f64, limit: f64) {
        let ok = value < limit;
        self.pass &= ok;
        self.parts.push(format!("{name} {value:.3e} {} {limit:e}", if ok { "<" } else { "!<" }));
    }

    /// `value > limit`
    fn above(&mut self, name: &str, value: f64, limit: f64) {
        let ok = value > limit;
        self.pass &= ok;
        self.parts.push(format!("{name} {value:.3e} {} {limit:e}", if ok { ">" } else { "!>" }));
    }

    fn holds(&mut self, name: &str, ok: bool) {
        self.pass &= ok;
        self.parts.push(format!("{name} {}", if ok { "holds" } else { "FAILS" }));
    }

    fn runtime(&mut self, start: Instant, limit_s: f64) {
        self.below("runtime[s]", start.elapsed().as_secs_f64(), limit_s);
    }

    fn finish(self) -> Outcome {
        Outcome {
            pass: self.pass,
            detail: self.parts.join("; "),
        }
    }
}

fn random_reps(count: usize, seed: u64) -> Vec<GammaRepresentation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirac = dirac_representation();
    (0..count)
        .map(|_| transform(&dirac, &random_unitary(4, &mut rng)).expect("unitary"))
        .collect()
}

fn gamma5_residual(rep: &GammaRepresentation) -> f64 {
    let g5 = gamma5(rep).expect("four gammas");
    let id = ComplexMatrix::identity(4);
    let mut r = g5.hermiticity_residual().max((&g5 * &g5).max_abs_diff(&id));
    for g in rep.gammas() {
        r = r.max(g5.anticommutator(g).max_abs());
    }
    r
}

fn algebra_audit() -> Outcome {
    let start = Instant::now();
    let mut check = Check::new();
    let dirac = dirac_representation();
    let block = DescentDecomposition::new(&dirac).and_then(|d| d.block_representation()).expect("block rep");
    let mut reps = vec![dirac, block];
    reps.extend(random_reps(100, 1));
    let mut clifford: f64 = 0.0;
    let mut g5: f64 = 0.0;
    let mut descent: f64 = 0.0;
    for rep in &reps {
        clifford = clifford.max(rep.residuals().max());
        g5 = g5.max(gamma5_residual(rep));
        let r = DescentDecomposition::new(rep).and_then(|d| d.residuals()).expect("decomposition");
        let relevant = [
            r.projection_idempotent,
            r.projection_hermitian,
            r.projection_orthogonal,
            r.projection_complete,
            r.transverse_commutator,
            r.gamma3_anticommutator,
            r.gamma3_commutator,
        ];
        descent = relevant.into_iter().fold(descent, f64::max);
    }
    check.holds("102 representations audited", reps.len() == 102);
    check.below("clifford+hermiticity", clifford, 1e-12);
    check.below("gamma5", g5, 1e-12);
    check.below("projections+commutators", descent, 1e-12);
    check.runtime(start, 1.0);
    check.finish()
}

fn commutant_uniqueness() -> Outcome {
    let mut check = Check::new();
    let mut reps = vec![dirac_representation()];
    reps.extend(random_reps(20, 2));
    let mut dims_ok = true;
    let mut support_ok = true;
    let mut closed_form: f64 = 0.0;
    let mut eigen: f64 = 0.0;
    let id = ComplexMatrix::identity(4);
    for rep in &reps {
        let comm = transverse_commutant(rep).expect("commutant");
        dims_ok &= comm.dimension() == 2;
        support_ok &= comm.support == vec![0, 14];
        let proj = solve_decoupling_projections(rep).expect("projections");
        let kappa = rep.gamma(3) * &gamma5(rep).expect("four gammas");
        let p_plus = (&id + &kappa).scale_re(0.5);
        let p_minus = (&id - &kappa).scale_re(0.5);
        closed_form = closed_form.max(proj.plus.max_abs_diff(&p_plus)).max(proj.minus.max_abs_diff(&p_minus));
        // projector onto the +1 eigenspace of κ³ from its eigenvectors
        let eig = hermitian_eigen(&kappa).expect("hermitian");
        let mut from_eig = ComplexMatrix::zeros(4);
        for (k, &l) in eig.values.iter().enumerate() {
            if l > 0.0 {
                let v = eig.vectors.column(k);
                for r in 0..4 {
                    for col in 0..4 {
                        from_eig[(r, col)] += v[r] * v[col].conj();
                    }
                }
            }
        }
        eigen = eigen.max(proj.plus.max_abs_diff(&from_eig));
    }
    check.holds("commutant dimension 2", dims_ok);
    check.holds("support {I, γ³γ⁵}", support_ok);
    check.below("P± vs (I ± γ³γ⁵)/2", closed_form, 1e-10);
    check.below("P₊ vs κ³ eigenprojection", eigen, 1e-10);
    check.finish()
}

fn block_structure() -> Outcome {
    let mut check = Check::new();
    let mut reps = vec![dirac_representation()];
    reps.extend(random_reps(20, 3));
    let mut pattern: f64 = 0.0;
    for rep in &reps {
        let r = DescentDecomposition::new(rep).and_then(|d| d.residuals()).expect("decomposition");
        pattern = pattern.max(r.transverse_block_diagonal).max(r.gamma3_off_block);
    }
    check.below("out-of-pattern entry", pattern, 1e-12);
    let d = DescentDecomposition::new(&dirac_representation()).expect("dirac decomposition");
    let exact = |x: &GammaRepresentation, y: &GammaRepresentation| {
        x.gammas().iter().zip(y.gammas()).all(|(a, b)| a.max_abs_diff(b) == 0.0)
    };
    check.holds("sub_plus == (σ³, iσ², −iσ¹)", exact(&d.sub_plus, &planar_triple(1.0)));
    check.holds("sub_minus == (σ³, iσ², +iσ¹)", exact(&d.sub_minus, &planar_triple(-1.0)));
    let refl = reflection_relation_check(&d).expect("planar reps");
    check.below("y-reflection residual", refl.residual, 1e-12);
    check.finish()
}

fn packet_3d(grid3: &Grid, spinor: &[Complex64], mass: f64) -> SpinorField {
    let plane = grid3.planar().expect("planar");
    let spec = PacketSpec {
        center: [8.0, 8.0, 0.0],
        width: 1.5,
        momentum: [1.0, 0.5, 0.0],
    };
    gaussian_packet(&plane, &spec, spinor, mass, 0.0).extrude(grid3).expect("extrude")
}

fn descent_grid() -> Grid {
    Grid::new(&[32, 32, 8], &[16.0, 16.0, 4.0]).expect("grid")
}

fn free_descent() -> Outcome {
    let start = Instant::now();
    let mut check = Check::new();
    let decomp = DescentDecomposition::new(&dirac_representation()).expect("decomposition");
    let grid = descent_grid();
    let spinor = decomp.p_plus.matvec(&[ONE, c(0.3, -0.2), c(0.0, 0.5), c(0.4, 0.1)]);
    let psi = packet_3d(&grid, &spinor, 1.0);
    let r = descent_equivalence_experiment(&psi, &decomp, 2.0, 0.01).expect("descent run");
    check.below("max deviation", r.max_deviation, 1e-8);
    check.below("leakage", r.leakage, 1e-10);
    let mut control = psi.clone();
    let kz = 2.0 * PI / 4.0;
    for comp in 0..4 {
        for (i, z) in control.component_mut(comp).iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, kz * grid.coords(i)[2]);
        }
    }
    let ctrl = sector_leakage_run(&control, &decomp, 2.0, 0.01).expect("control run");
    check.above("z-dependent control leakage", ctrl.leakage, 1e-3);
    check.runtime(start, 60.0);
    check.finish()
}

fn conservation_suite() -> Outcome {
    let mut check = Check::new();
    let rep = dirac_representation();
    let decomp = DescentDecomposition::new(&rep).expect("decomposition");
    let grid = descent_grid();
    let spinor = [ONE, c(0.3, -0.2), c(0.0, 0.5), c(0.4, 0.1)];
    let psi = packet_3d(&grid, &spinor, 1.0);
    let r = descent_equivalence_experiment(&psi, &decomp, 2.0, 0.01).expect("descent run");
    check.below("norm drift", r.charge_drift, 1e-10);
    check.below("Q_κ³ drift", r.kappa3_drift, 1e-10);
    let (_, right) = chirality_projectors(&rep).expect("projectors");
    let weyl = packet_3d(&grid, &right.matvec(&spinor), 0.0);
    let chi = chirality_split_experiment(&weyl, &rep, 2.0, 0.01).expect("chirality run");
    check.below("massless chirality leakage", chi.leakage, 1e-10);
    check.finish()
}

fn maxwell_descent() -> Outcome {
    let mut check = Check::new();
    let grid = Grid::new(&[32, 32, 4], &[16.0, 16.0, 4.0]).expect("grid");
    let plane = grid.planar().expect("plane");
    let ps = Spectral::new(&plane);
    let bump = |i: usize, k: [f64; 2]| {
        let d = plane.displacement(i, &[8.0, 8.0]);
        (-(d[0] * d[0] + d[1] * d[1]) / 4.5).exp() * (k[0] * d[0] + k[1] * d[1]).cos()
    };
    let ex: Vec<f64> = (0..plane.len()).map(|i| bump(i, [0.0, 1.2])).collect();
    let ez: Vec<f64> = (0..plane.len()).map(|i| 0.5 * bump(i, [1.0, 0.4])).collect();
    let zero = vec![0.0; plane.len()];
    let waves = EmFields::traveling_wave(&ps, [&ex, &zero, &ez]).extrude(&grid).expect("extrude");

    let source = ModulatedSource::gaussian(&plane, [8.0, 8.0], 1.0, 1.5, 0.4, 0.4).expect("source");
    let mut sourced = waves.clone();
    sourced.add_gauss_field(&Spectral::new(&grid), &broadcast(source.static_charge(), &grid));
    let r = eeb_bbe_experiment(&sourced, &source, 5.0, 0.005).expect("sourced run");
    check.holds("1000 steps", r.steps == 1000);
    check.below("EEB leakage", r.leakage_eeb, 1e-10);
    check.below("BBE leakage", r.leakage_bbe, 1e-10);
    check.below("∇·B", r.div_b, 1e-10);

    let free = eeb_bbe_experiment(&waves, &NoSource, 5.0, 0.005).expect("source-free run");
    check.below("source-free energy drift", free.energy_drift, 1e-6);

    let mut a = GaugeFieldState::zeros(&plane);
    for i in 0..plane.len() {
        let d = plane.displacement(i, &[8.0, 8.0]);
        a.potential[3][i] = (-(d[0] * d[0] + d[1] * d[1]) / 4.5).exp();
    }
    let pot = potential_formulation_check(&a, &source, 5.0, 0.005).expect("potential run");
    check.below("A³ wave residual", pot.wave_residual, 1e-8);
    check.finish()
}

fn coupled_initial(grid: &Grid, q: f64, decomp: &DescentDecomposition) -> CoupledState {
    let spinor = decomp.p_plus.matvec(&[ONE, c(0.3, 0.2), c(0.0, 0.4), c(0.6, 0.0)]);
    let spec = PacketSpec {
        center: [8.0, 8.0, 0.0],
        width: 1.5,
        momentum: [0.6, 0.3, 0.0],
    };
    let ham = DiracHamiltonian::new(&decomp.parent, 1.0).expect("hamiltonian");
    let mut psi = project_positive_energy(&gaussian_packet(grid, &spec, &spinor, 1.0, q), &ham)
        .expect("projection")
        .apply_matrix(&decomp.p_plus);
    psi.normalize();
    CoupledState::new(psi, GaugeFieldState::zeros(grid), decomp)
        .and_then(|s| s.with_gauss_field())
        .expect("state")
}

fn coupled_reduced() -> Outcome {
    let start = Instant::now();
    let mut check = Check::new();
    let grid = Grid::square(32, 16.0).expect("grid");
    let decomp = DescentDecomposition::new(&dirac_representation()).expect("decomposition");
    let (q, dt, t) = (0.3, 0.005, 2.0);
    let initial = coupled_initial(&grid, q, &decomp);

    let sv = sector_vanishing_experiment(&initial, t, dt).expect("sector runs");
    check.below("charge drift", sv.charge_drift, 1e-8);
    check.below("‖Ψ₋‖ (Ψ₋(0)=0)", sv.leakage_minus, 1e-8);
    check.below("‖Ψ₊‖ (Ψ₊(0)=0)", sv.leakage_plus, 1e-8);
    check.below("Gauss residual", sv.gauss_residual_max, 1e-6);

    let chi: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.coords(i);
            0.01 * ((2.0 * PI * x[0] / 16.0).sin() + (2.0 * PI * x[1] / 16.0).cos())
        })
        .collect();
    let gauge = gauge_equivalence_check(&initial, &chi, t, dt).expect("gauge runs");
    check.below("gauge-equivalent bilinears", gauge.max_observable_difference, 1e-6);

    let mut driven = initial.clone();
    for i in 0..grid.len() {
        let y = grid.coords(i)[1];
        driven.gauge.potential[1][i] = 0.2 * (2.0 * PI * y / 16.0).cos();
    }
    let conv = coupling_convergence_check(&driven, &[q, q / 2.0, q / 4.0], t, dt).expect("convergence runs");
    let ratio_ok = conv.ratios.iter().all(|r| (r - 2.0).abs() <= 0.4);
    check.holds(&format!("q-halving ratios {:?} within 2 ± 20%", conv.ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()), ratio_ok);

    let monitor = run_coupled(&initial, 0.0, dt).expect("empty run");
    check.holds("monitor wiring", monitor.series.channel("charge").is_some_and(|c| c.len() == 1));
    check.runtime(start, 120.0);
    check.finish()
}

fn covariant_lift() -> Outcome {
    let mut check = Check::new();
    let rep = dirac_representation();
    let plane = Grid::square(8, 4.0).expect("plane");
    let phi = SpinorField::from_fn(&plane, 4, 1.0, 0.7, |x| {
        vec![c(1.0, x[0]), c(0.5, 0.0), c(0.0, x[1]), c(x[0] * x[1], 0.2)]
    });
    let mut ratio_ok = true;
    let mut ratios = Vec::new();
    let mut variation: f64 = 0.0;
    for seed in 0..5u64 {
        let mut residuals = Vec::new();
        for nz in [32usize, 64] {
            let g3 = plane.extruded(nz, 4.0).expect("grid");
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let modes: Vec<[f64; 3]> = (0..4).map(|_| [rng.random::<f64>() - 0.5, rng.random::<f64>() * 2.0 * PI, rng.random::<f64>()]).collect();
            let a3: Vec<f64> = (0..g3.len())
                .map(|i| {
                    let x = g3.coords(i);
                    modes
                        .iter()
                        .enumerate()
                        .map(|(m, p)| p[0] * (2.0 * PI * (m + 1) as f64 * x[2] / 4.0 + p[1]).sin() * (1.0 + p[2] * (PI * x[0] / 2.0).cos()))
                        .sum()
                })
                .collect();
            let psi = covariant_descent_lift(&phi, &a3, &g3).expect("lift");
            residuals.push(covariant_constraint_residual(&psi, &a3));
            variation = variation.max(bilinear_z_variation(&psi, &rep).expect("bilinears"));
        }
        let ratio = residuals[0] / residuals[1];
        ratio_ok &= (3.0..5.0).contains(&ratio);
        ratios.push(format!("{ratio:.2}"));
    }
    check.holds(&format!("D₃Ψ second order (halving ratios {ratios:?})"), ratio_ok);
    check.below("16 bilinears z-variation", variation, 1e-10);
    check.finish()
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 algebra audit", algebra_audit),
        ("2 commutant uniqueness", commutant_uniqueness),
        ("3 block structure", block_structure),
        ("4 free-descent equivalence", free_descent),
        ("5 conservation suite", conservation_suite),
        ("6 maxwell descent", maxwell_descent),
        ("7 coupled reduced system", coupled_reduced),
        ("8 covariant lift", covariant_lift),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let outcome = run();
        if !outcome.pass {
            failures += 1;
        }
        println!("[{}] {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
