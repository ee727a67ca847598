use descent_core::clifford::{gamma5, GammaRepresentation, ALGEBRA_TOL};
use descent_core::descent::{transverse_commutant, DescentDecomposition};
use descent_core::linalg::ComplexMatrix;

use crate::report::Check;

/// `γ⁵` Hermitian, squares to one, anticommutes with every `γ^μ`.
pub fn gamma5_residual(rep: &GammaRepresentation) -> descent_core::Result<f64> {
    let g5 = gamma5(rep)?;
    let id = ComplexMatrix::identity(rep.order());
    let mut r = g5.hermiticity_residual().max((&g5 * &g5).max_abs_diff(&id));
    for g in rep.gammas() {
        r = r.max(g5.anticommutator(g).max_abs());
    }
    Ok(r)
}

/// Per-identity checks for one representation. Representations of the
/// 3+1 algebra also get the descent checks.
pub fn audit_representation(rep: &GammaRepresentation) -> Vec<Check> {
    let r = rep.residuals();
    let mut checks = vec![
        Check::below("clifford_anticommutator", r.anticommutator, ALGEBRA_TOL),
        Check::below("hermiticity", r.hermiticity, ALGEBRA_TOL),
        Check::below("unitarity", r.unitarity, ALGEBRA_TOL),
        Check::below("trace", r.trace, ALGEBRA_TOL),
    ];
    if rep.spatial_dim() != 3 || rep.order() != 4 {
        return checks;
    }
    match gamma5_residual(rep) {
        Ok(v) => checks.push(Check::below("gamma5", v, ALGEBRA_TOL)),
        Err(e) => checks.push(Check::holds(format!("gamma5 ({e})"), false)),
    }
    match DescentDecomposition::new(rep).and_then(|d| d.residuals()) {
        Ok(res) => {
            for (name, v) in res.entries() {
                checks.push(Check::below(name, v, ALGEBRA_TOL));
            }
        }
        Err(e) => checks.push(Check::holds(format!("descent_decomposition ({e})"), false)),
    }
    match transverse_commutant(rep) {
        Ok(comm) => {
            checks.push(Check::exact("commutant_dimension", comm.dimension(), 2));
            checks.push(Check::holds("commutant_support_identity_and_kappa3", comm.support == vec![0, 14]));
        }
        Err(e) => checks.push(Check::holds(format!("commutant ({e})"), false)),
    }
    checks
}

/// Largest residual of each group, for compact per-sample diagnostics.
pub fn worst(checks: &[Check]) -> f64 {
    checks.iter().map(|c| c.value).fold(0.0, f64::max)
}
