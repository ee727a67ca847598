//! Descent along `z`: the projections commuting with `γ⁰, γ¹, γ²`, the
//! superselection operator `κ³ = γ³γ⁵`, and the block-diagonal basis that
//! splits a 3+1 representation into two 2+1 representations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{
    basis_decompose, basis_elements, gamma5, spin_generators, BasisCoefficients,
    GammaRepresentation, RepresentationJson, ALGEBRA_TOL, SOLVE_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{c, expm_hermitian, hermitian_eigen, inner, vec_norm, ComplexMatrix, I, ONE, ZERO};

/// `κ³ = γ³γ⁵ = iγ⁰γ¹γ²`.
pub fn kappa3(rep: &GammaRepresentation) -> Result<ComplexMatrix> {
    let g5 = gamma5(rep)?;
    Ok(rep.gamma(3) * &g5)
}

/// The matrices commuting with `γ⁰, γ¹, γ²`, as coefficient vectors in the
/// 16-element Clifford basis.
#[derive(Debug, Clone)]
pub struct Commutant {
    pub basis: Vec<BasisCoefficients>,
    /// Basis indices carrying weight in the commutant.
    pub support: Vec<usize>,
}

impl Commutant {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone)]
pub struct DecouplingProjections {
    pub plus: ComplexMatrix,
    pub minus: ComplexMatrix,
    pub commutant: Commutant,
}

/// Null space of `X -> ([X, γ⁰], [X, γ¹], [X, γ²])` over the Clifford basis.
pub fn transverse_commutant(rep: &GammaRepresentation) -> Result<Commutant> {
    let basis = basis_elements(rep)?;
    // Gram matrix L†L of the linear map, 16x16 Hermitian.
    let images: Vec<Vec<Complex64>> = basis
        .iter()
        .map(|b| {
            (0..3)
                .flat_map(|a| b.commutator(rep.gamma(a)).as_slice().to_vec())
                .collect()
        })
        .collect();
    let mut gram = ComplexMatrix::zeros(16);
    for i in 0..16 {
        for j in 0..16 {
            gram[(i, j)] = inner(&images[i], &images[j]);
        }
    }
    let eig = hermitian_eigen(&gram)?;
    let scale = eig.values.last().copied().unwrap_or(1.0).max(1.0);
    let null: Vec<Vec<Complex64>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l.abs() < 1e-9 * scale)
        .map(|(k, _)| eig.vectors.column(k))
        .collect();
    let support = (0..16)
        .filter(|&i| null.iter().map(|v| v[i].norm_sqr()).sum::<f64>() > 1e-10)
        .collect();
    let basis = null
        .into_iter()
        .map(|v| {
            let mut arr = [ZERO; 16];
            arr.copy_from_slice(&v);
            BasisCoefficients(arr)
        })
        .collect();
    Ok(Commutant { basis, support })
}

/// Solves for the orthogonal projections that commute with `γ⁰, γ¹, γ²`.
///
/// The commutant must be two-dimensional. Inside it, with `I` and a second
/// element `K` (`K² = αI + βK`), idempotence of `aI + dK` with `d ≠ 0`
/// forces `d = ±1/√(β² + 4α)` and `a = (1 − βd)/2`. The root whose trace
/// against `κ³` is positive is returned as `plus`.
pub fn solve_decoupling_projections(rep: &GammaRepresentation) -> Result<DecouplingProjections> {
    let commutant = transverse_commutant(rep)?;
    if commutant.dimension() != 2 {
        return Err(Error::CommutantDimension(commutant.dimension()));
    }
    let unit = {
        let mut e0 = [ZERO; 16];
        e0[0] = ONE;
        e0
    };
    // component of the identity inside the commutant must be complete
    let id_weight: f64 = commutant.basis.iter().map(|b| inner(&b.0, &unit).norm_sqr()).sum();
    if (id_weight - 1.0).abs() > SOLVE_TOL {
        return Err(Error::CommutantDimension(commutant.dimension()));
    }
    // K: the commutant direction orthogonal to the identity
    let k_coeffs = commutant
        .basis
        .iter()
        .map(|b| {
            let mut v = b.0;
            let p = inner(&unit, &v);
            for (x, u) in v.iter_mut().zip(&unit) {
                *x -= p * u;
            }
            v
        })
        .max_by(|a, b| vec_norm(a).total_cmp(&vec_norm(b)))
        .expect("two-dimensional commutant");
    let k_norm = vec_norm(&k_coeffs);
    let k_coeffs = k_coeffs.map(|z| z / k_norm);
    let k = BasisCoefficients(k_coeffs).recombine(rep)?;

    let k_sq = basis_decompose(&(&k * &k), rep)?;
    let alpha = k_sq.scalar();
    let beta = inner(&k_coeffs, &k_sq.0);
    let id = ComplexMatrix::identity(4);
    let closure = (&(&k * &k) - &(&id.scale(alpha) + &k.scale(beta))).max_abs();
    if closure > SOLVE_TOL {
        return Err(Error::CommutantDimension(commutant.dimension()));
    }

    let root = (beta * beta + alpha * 4.0).sqrt();
    let kappa = kappa3(rep)?;
    let mut candidates = [1.0, -1.0].map(|s| {
        let d = ONE / root * s;
        let a = (ONE - beta * d) / 2.0;
        &id.scale(a) + &k.scale(d)
    });
    candidates.sort_by(|x, y| {
        let tx = x.hs_inner(&kappa).re;
        let ty = y.hs_inner(&kappa).re;
        ty.total_cmp(&tx)
    });
    let [plus, minus] = candidates;
    for p in [&plus, &minus] {
        if (p * p).max_abs_diff(p) > SOLVE_TOL || p.hermiticity_residual() > SOLVE_TOL {
            return Err(Error::CommutantDimension(commutant.dimension()));
        }
    }
    Ok(DecouplingProjections {
        plus,
        minus,
        commutant,
    })
}

/// Unitary whose first two rows span `range(P₊)` and last two `range(P₋)`.
///
/// Eigenvectors of `κ³` give the two eigenspaces. Inside each, the standard
/// basis vectors are projected onto the eigenspace, ordered by descending
/// overlap (ties by index), and Gram-Schmidt orthonormalized; so each basis
/// vector has a real positive component along the standard vector it came
/// from.
pub fn block_diagonalizer(kappa3: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(kappa3)?;
    let n = kappa3.dim();
    let pick = |target: f64| -> Vec<usize> {
        (0..n)
            .filter(|&k| (eig.values[k] - target).abs() < 1e-8)
            .collect()
    };
    let (plus_idx, minus_idx) = (pick(1.0), pick(-1.0));
    if plus_idx.len() != 2 || minus_idx.len() != 2 || n != 4 {
        return Err(Error::DegenerateEigenspace {
            plus: plus_idx.len(),
            minus: minus_idx.len(),
        });
    }
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(4);
    for idx in [plus_idx, minus_idx] {
        let q: Vec<Vec<Complex64>> = idx.iter().map(|&k| eig.vectors.column(k)).collect();
        let project = |v: &[Complex64]| -> Vec<Complex64> {
            let mut out = vec![ZERO; n];
            for col in &q {
                let p = inner(col, v);
                for (o, x) in out.iter_mut().zip(col) {
                    *o += p * x;
                }
            }
            out
        };
        let mut candidates: Vec<(usize, Vec<Complex64>)> = (0..n)
            .map(|j| {
                let mut e = vec![ZERO; n];
                e[j] = ONE;
                (j, project(&e))
            })
            .collect();
        candidates.sort_by(|(ja, a), (jb, b)| {
            let (na, nb) = (vec_norm(a), vec_norm(b));
            if (na - nb).abs() <= 1e-12 {
                ja.cmp(jb)
            } else {
                nb.total_cmp(&na)
            }
        });
        let mut accepted: Vec<Vec<Complex64>> = Vec::new();
        for (_, mut v) in candidates {
            for b in &accepted {
                let p = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
            let nv = vec_norm(&v);
            if nv > 1e-8 {
                accepted.push(v.into_iter().map(|z| z / nv).collect());
            }
            if accepted.len() == 2 {
                break;
            }
        }
        rows.extend(accepted);
    }
    let mut u = ComplexMatrix::zeros(n);
    for (r, row) in rows.iter().enumerate() {
        for (col, z) in row.iter().enumerate() {
            u[(r, col)] = z.conj();
        }
    }
    Ok(u)
}

#[derive(Debug, Clone)]
pub struct DescentDecomposition {
    pub parent: GammaRepresentation,
    pub p_plus: ComplexMatrix,
    pub p_minus: ComplexMatrix,
    pub kappa3: ComplexMatrix,
    pub u_block: ComplexMatrix,
    pub sub_plus: GammaRepresentation,
    pub sub_minus: GammaRepresentation,
    /// `(Γ³_{+,-}, Γ³_{-,+})`: the upper-right and lower-left blocks of the
    /// conjugated `γ³`.
    pub gamma3_offblocks: (ComplexMatrix, ComplexMatrix),
}

/// Largest violation of each structural identity of a decomposition.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct DescentResiduals {
    pub projection_idempotent: f64,
    pub projection_hermitian: f64,
    pub projection_orthogonal: f64,
    pub projection_complete: f64,
    pub projection_rank: f64,
    pub transverse_commutator: f64,
    pub kappa_is_difference: f64,
    pub kappa_hermitian: f64,
    pub kappa_involutive: f64,
    pub kappa_trace: f64,
    pub gamma3_anticommutator: f64,
    pub gamma3_commutator: f64,
    pub u_unitary: f64,
    pub canonical_projections: f64,
    pub transverse_block_diagonal: f64,
    pub gamma3_off_block: f64,
    pub sub_plus_clifford: f64,
    pub sub_minus_clifford: f64,
}

impl DescentResiduals {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("projection_idempotent", self.projection_idempotent),
            ("projection_hermitian", self.projection_hermitian),
            ("projection_orthogonal", self.projection_orthogonal),
            ("projection_complete", self.projection_complete),
            ("projection_rank", self.projection_rank),
            ("transverse_commutator", self.transverse_commutator),
            ("kappa_is_difference", self.kappa_is_difference),
            ("kappa_hermitian", self.kappa_hermitian),
            ("kappa_involutive", self.kappa_involutive),
            ("kappa_trace", self.kappa_trace),
            ("gamma3_anticommutator", self.gamma3_anticommutator),
            ("gamma3_commutator", self.gamma3_commutator),
            ("u_unitary", self.u_unitary),
            ("canonical_projections", self.canonical_projections),
            ("transverse_block_diagonal", self.transverse_block_diagonal),
            ("gamma3_off_block", self.gamma3_off_block),
            ("sub_plus_clifford", self.sub_plus_clifford),
            ("sub_minus_clifford", self.sub_minus_clifford),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

fn off_block_max(m: &ComplexMatrix) -> f64 {
    m.block(0, 2, 2).max_abs().max(m.block(2, 0, 2).max_abs())
}

fn diag_block_max(m: &ComplexMatrix) -> f64 {
    m.block(0, 0, 2).max_abs().max(m.block(2, 2, 2).max_abs())
}

impl DescentDecomposition {
    pub fn new(rep: &GammaRepresentation) -> Result<Self> {
        let kappa = kappa3(rep)?;
        let proj = solve_decoupling_projections(rep)?;
        let u = block_diagonalizer(&kappa)?;
        let ud = u.adjoint();
        let conj = |g: &ComplexMatrix| &(&u * g) * &ud;
        let hats: Vec<ComplexMatrix> = rep.gammas().iter().map(conj).collect();
        let sub_plus = GammaRepresentation::new(
            format!("{}:plus", rep.label()),
            hats[..3].iter().map(|g| g.block(0, 0, 2)).collect(),
        )?;
        let sub_minus = GammaRepresentation::new(
            format!("{}:minus", rep.label()),
            hats[..3].iter().map(|g| g.block(2, 2, 2)).collect(),
        )?;
        let offblocks = (hats[3].block(0, 2, 2), hats[3].block(2, 0, 2));
        Ok(Self {
            parent: rep.clone(),
            p_plus: proj.plus,
            p_minus: proj.minus,
            kappa3: kappa,
            u_block: u,
            sub_plus,
            sub_minus,
            gamma3_offblocks: offblocks,
        })
    }

    /// `U γ^μ U†`.
    pub fn conjugated(&self, mu: usize) -> ComplexMatrix {
        &(&self.u_block * self.parent.gamma(mu)) * &self.u_block.adjoint()
    }

    /// The parent representation expressed in the block basis.
    pub fn block_representation(&self) -> Result<GammaRepresentation> {
        Ok(crate::clifford::transform(&self.parent, &self.u_block)?.with_label("block-diagonal"))
    }

    pub fn residuals(&self) -> Result<DescentResiduals> {
        let id = ComplexMatrix::identity(4);
        let (pp, pm) = (&self.p_plus, &self.p_minus);
        let g = self.parent.gammas();
        let g5 = gamma5(&self.parent)?;
        let k = &self.kappa3;
        let mut r = DescentResiduals {
            projection_idempotent: (pp * pp).max_abs_diff(pp).max((pm * pm).max_abs_diff(pm)),
            projection_hermitian: pp.hermiticity_residual().max(pm.hermiticity_residual()),
            projection_orthogonal: (pp * pm).max_abs().max((pm * pp).max_abs()),
            projection_complete: (pp + pm).max_abs_diff(&id),
            projection_rank: (pp.trace() - 2.0).norm().max((pm.trace() - 2.0).norm()),
            kappa_is_difference: k.max_abs_diff(&(pp - pm)),
            kappa_hermitian: k.hermiticity_residual(),
            kappa_involutive: (k * k).max_abs_diff(&id),
            kappa_trace: k.trace().norm(),
            gamma3_anticommutator: g[3].anticommutator(k).max_abs(),
            gamma3_commutator: g[3].commutator(k).max_abs_diff(&g5.scale_re(-2.0)),
            u_unitary: self.u_block.unitarity_residual(),
            ..Default::default()
        };
        for a in 0..3 {
            r.transverse_commutator = r.transverse_commutator.max(pp.commutator(&g[a]).max_abs());
            r.transverse_block_diagonal = r.transverse_block_diagonal.max(off_block_max(&self.conjugated(a)));
        }
        let ud = self.u_block.adjoint();
        let canon_p = ComplexMatrix::from_diagonal(&[ONE, ONE, ZERO, ZERO]);
        let canon_m = ComplexMatrix::from_diagonal(&[ZERO, ZERO, ONE, ONE]);
        r.canonical_projections = (&(&self.u_block * pp) * &ud)
            .max_abs_diff(&canon_p)
            .max((&(&self.u_block * pm) * &ud).max_abs_diff(&canon_m));
        r.gamma3_off_block = diag_block_max(&self.conjugated(3));
        r.sub_plus_clifford = self.sub_plus.residuals().max();
        r.sub_minus_clifford = self.sub_minus.residuals().max();
        Ok(r)
    }

    pub fn to_json(&self) -> DescentJson {
        let enc = |m: &ComplexMatrix| m.as_slice().iter().map(|z| [z.re, z.im]).collect();
        DescentJson {
            parent: self.parent.to_json(),
            p_plus: enc(&self.p_plus),
            p_minus: enc(&self.p_minus),
            kappa3: enc(&self.kappa3),
            u_block: enc(&self.u_block),
            sub_plus: self.sub_plus.to_json(),
            sub_minus: self.sub_minus.to_json(),
            gamma3_offblocks: [enc(&self.gamma3_offblocks.0), enc(&self.gamma3_offblocks.1)],
        }
    }

    pub fn from_json(json: &DescentJson) -> Result<Self> {
        let dec = |v: &Vec<[f64; 2]>| ComplexMatrix::from_row_major(v.iter().map(|&[a, b]| c(a, b)).collect());
        Ok(Self {
            parent: GammaRepresentation::from_json(&json.parent)?,
            p_plus: dec(&json.p_plus)?,
            p_minus: dec(&json.p_minus)?,
            kappa3: dec(&json.kappa3)?,
            u_block: dec(&json.u_block)?,
            sub_plus: GammaRepresentation::from_json(&json.sub_plus)?,
            sub_minus: GammaRepresentation::from_json(&json.sub_minus)?,
            gamma3_offblocks: (dec(&json.gamma3_offblocks[0])?, dec(&json.gamma3_offblocks[1])?),
        })
    }
}

/// Serialized decomposition, same matrix encoding as [`RepresentationJson`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentJson {
    pub parent: RepresentationJson,
    pub p_plus: Vec<[f64; 2]>,
    pub p_minus: Vec<[f64; 2]>,
    pub kappa3: Vec<[f64; 2]>,
    pub u_block: Vec<[f64; 2]>,
    pub sub_plus: RepresentationJson,
    pub sub_minus: RepresentationJson,
    pub gamma3_offblocks: [Vec<[f64; 2]>; 2],
}

/// Splits a bispinor into the two-component blocks of `U ψ`.
pub fn split_spinor(psi: &[Complex64; 4], decomp: &DescentDecomposition) -> ([Complex64; 2], [Complex64; 2]) {
    let v = decomp.u_block.matvec(psi);
    ([v[0], v[1]], [v[2], v[3]])
}

/// Inverse of [`split_spinor`]: `U†(ψ₊ ⊕ ψ₋)`.
pub fn merge_spinor(plus: &[Complex64; 2], minus: &[Complex64; 2], decomp: &DescentDecomposition) -> [Complex64; 4] {
    let v = decomp.u_block.adjoint().matvec(&[plus[0], plus[1], minus[0], minus[1]]);
    [v[0], v[1], v[2], v[3]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorCurrents {
    /// `j₊^a` for `a = 0, 1, 2`
    pub plus: [f64; 3],
    pub minus: [f64; 3],
    /// `(j³_{+,-}, j³_{-,+})`
    pub cross: [Complex64; 2],
}

pub fn sector_currents(psi: &[Complex64; 4], decomp: &DescentDecomposition) -> SectorCurrents {
    let (pp, pm) = split_spinor(psi, decomp);
    let bilinear = |sub: &GammaRepresentation, v: &[Complex64; 2]| -> [f64; 3] {
        let g0 = sub.gamma(0);
        [0, 1, 2].map(|a| (g0 * sub.gamma(a)).sandwich(v, v).re)
    };
    let (g3pm, g3mp) = &decomp.gamma3_offblocks;
    let cross_pm = (decomp.sub_plus.gamma(0) * g3pm).matvec(&pm);
    let cross_mp = (decomp.sub_minus.gamma(0) * g3mp).matvec(&pp);
    SectorCurrents {
        plus: bilinear(&decomp.sub_plus, &pp),
        minus: bilinear(&decomp.sub_minus, &pm),
        cross: [inner(&pp, &cross_pm), inner(&pm, &cross_mp)],
    }
}

/// `Ψ̄ Γ Ψ` evaluated directly.
pub fn bilinear(psi: &[Complex64], gamma0: &ComplexMatrix, m: &ComplexMatrix) -> Complex64 {
    (gamma0 * m).sandwich(psi, psi)
}

/// Reduced Lagrangian density `Ψ̄(iγ^a v_a − mΨ)` with arbitrary spinors
/// `v_a` standing in for `∂_aΨ`.
pub fn reduced_lagrangian(
    rep: &GammaRepresentation,
    psi: &[Complex64],
    derivs: &[Vec<Complex64>; 3],
    mass: f64,
) -> Complex64 {
    let n = psi.len();
    let mut d = vec![ZERO; n];
    for (a, v) in derivs.iter().enumerate() {
        let gv = rep.gamma(a).matvec(v);
        for (x, y) in d.iter_mut().zip(gv) {
            *x += I * y;
        }
    }
    for (x, p) in d.iter_mut().zip(psi) {
        *x -= p * mass;
    }
    inner(&rep.gamma(0).matvec(psi), &d)
}

/// Sum of the two block Lagrangians evaluated on the split spinors.
pub fn sector_lagrangian_sum(
    decomp: &DescentDecomposition,
    psi: &[Complex64; 4],
    derivs: &[Vec<Complex64>; 3],
    mass: f64,
) -> Complex64 {
    let (pp, pm) = split_spinor(psi, decomp);
    let split = |v: &Vec<Complex64>| {
        let arr = [v[0], v[1], v[2], v[3]];
        split_spinor(&arr, decomp)
    };
    let parts: Vec<_> = derivs.iter().map(split).collect();
    let dp = [0, 1, 2].map(|a| parts[a].0.to_vec());
    let dm = [0, 1, 2].map(|a| parts[a].1.to_vec());
    reduced_lagrangian(&decomp.sub_plus, &pp, &dp, mass) + reduced_lagrangian(&decomp.sub_minus, &pm, &dm, mass)
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceReport {
    pub theta: f64,
    pub eta: [f64; 2],
    /// `max |D⁻¹ κ³ D − κ³|`
    pub kappa_residual: f64,
    /// `max |[D, P±]|`
    pub projection_residual: f64,
    #[serde(skip)]
    pub transformation: ComplexMatrix,
}

/// Checks that the 2+1 Lorentz subgroup generated by `Σ³, α¹, α²` leaves
/// `κ³` and `P±` invariant.
pub fn covariance_check(decomp: &DescentDecomposition, theta: f64, eta: [f64; 2]) -> Result<CovarianceReport> {
    let gen = spin_generators(&decomp.parent)?;
    let boost_gen = &gen.alpha[0].scale_re(eta[0]) + &gen.alpha[1].scale_re(eta[1]);
    let rot = expm_hermitian(&gen.sigma[2], c(0.0, -0.5 * theta))?;
    let rot_inv = expm_hermitian(&gen.sigma[2], c(0.0, 0.5 * theta))?;
    let boost = expm_hermitian(&boost_gen, c(-0.5, 0.0))?;
    let boost_inv = expm_hermitian(&boost_gen, c(0.5, 0.0))?;
    let d = &rot * &boost;
    let d_inv = &boost_inv * &rot_inv;
    let kappa_residual = (&(&d_inv * &decomp.kappa3) * &d).max_abs_diff(&decomp.kappa3);
    let projection_residual = d
        .commutator(&decomp.p_plus)
        .max_abs()
        .max(d.commutator(&decomp.p_minus).max_abs());
    Ok(CovarianceReport {
        theta,
        eta,
        kappa_residual,
        projection_residual,
        transformation: d,
    })
}

/// `(Γ⁰, Γ¹, Γ²) -> (Γ⁰, Γ¹, −Γ²)`: the effect of `y -> −y` on a planar
/// Dirac operator.
pub fn reflect_y(rep: &GammaRepresentation) -> Result<GammaRepresentation> {
    if rep.spatial_dim() != 2 {
        return Err(Error::WrongSpatialDimension {
            expected: 2,
            found: rep.spatial_dim(),
        });
    }
    let g = rep.gammas();
    GammaRepresentation::new(
        format!("{}+reflected", rep.label()),
        vec![g[0].clone(), g[1].clone(), g[2].scale_re(-1.0)],
    )
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReflectionReport {
    /// `max_a |reflect(Γ₊)^a − Γ₋^a|`
    pub residual: f64,
    /// `max_a |Γ₊^a − Γ₋^a|`, nonzero when the sectors differ
    pub unreflected_difference: f64,
}

pub fn reflection_relation_check(decomp: &DescentDecomposition) -> Result<ReflectionReport> {
    let reflected = reflect_y(&decomp.sub_plus)?;
    let diff = |x: &GammaRepresentation, y: &GammaRepresentation| {
        x.gammas()
            .iter()
            .zip(y.gammas())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    };
    Ok(ReflectionReport {
        residual: diff(&reflected, &decomp.sub_minus),
        unreflected_difference: diff(&decomp.sub_plus, &decomp.sub_minus),
    })
}

/// Checks every structural identity and returns an error if any exceeds
/// [`ALGEBRA_TOL`].
pub fn validate(decomp: &DescentDecomposition) -> Result<DescentResiduals> {
    let r = decomp.residuals()?;
    if r.max() >= ALGEBRA_TOL {
        return Err(Error::InvalidRepresentation(r.max()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{axial_index, dirac_representation, planar_triple, transform};
    use crate::linalg::{pauli, random_unitary, random_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(d: [f64; 4]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&d.map(|x| c(x, 0.0)))
    }

    fn eq50_permutation() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
    }

    #[test]
    fn kappa3_in_dirac_rep() {
        let k = kappa3(&dirac_representation()).unwrap();
        assert!(k.max_abs_diff(&diag([1.0, -1.0, -1.0, 1.0])) < 1e-15);
    }

    #[test]
    fn kappa3_spectrum_and_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rep = transform(&dirac_representation(), &random_unitary(4, &mut rng)).unwrap();
        let k = kappa3(&rep).unwrap();
        let eig = hermitian_eigen(&k).unwrap();
        for (l, want) in eig.values.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((l - want).abs() < 1e-12);
        }
        assert!(k.commutator(rep.gamma(2)).max_abs() < ALGEBRA_TOL);
        assert!(k.anticommutator(rep.gamma(3)).max_abs() < ALGEBRA_TOL);
        // iγ⁰γ¹γ² route
        let alt = (&(rep.gamma(0) * rep.gamma(1)) * rep.gamma(2)).scale(I);
        assert!(alt.max_abs_diff(&k) < ALGEBRA_TOL);
    }

    #[test]
    fn projections_in_dirac_rep() {
        let p = solve_decoupling_projections(&dirac_representation()).unwrap();
        assert!(p.plus.max_abs_diff(&diag([1.0, 0.0, 0.0, 1.0])) < SOLVE_TOL);
        assert!(p.minus.max_abs_diff(&diag([0.0, 1.0, 1.0, 0.0])) < SOLVE_TOL);
        assert_eq!(p.commutant.dimension(), 2);
        assert_eq!(p.commutant.support, vec![0, axial_index(3)]);
        let id = ComplexMatrix::identity(4);
        assert!((&p.plus + &p.minus).max_abs_diff(&id) < SOLVE_TOL);
        assert!((&p.plus * &p.minus).max_abs() < SOLVE_TOL);
    }

    #[test]
    fn projections_follow_unitary_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let dirac = dirac_representation();
        let k = kappa3(&dirac).unwrap();
        let id = ComplexMatrix::identity(4);
        for _ in 0..20 {
            let u = random_unitary(4, &mut rng);
            let rep = transform(&dirac, &u).unwrap();
            let p = solve_decoupling_projections(&rep).unwrap();
            let uk = &(&u * &k) * &u.adjoint();
            let want_plus = (&id + &uk).scale_re(0.5);
            let want_minus = (&id - &uk).scale_re(0.5);
            assert!(p.plus.max_abs_diff(&want_plus) < SOLVE_TOL);
            assert!(p.minus.max_abs_diff(&want_minus) < SOLVE_TOL);
        }
    }

    #[test]
    fn commutant_detects_corrupted_representation() {
        // a representation missing the anticommutation of γ¹, γ² has a
        // larger commutant
        let d = dirac_representation();
        let g = d.gammas();
        let bad = GammaRepresentation::new_unchecked(
            "bad",
            vec![g[0].clone(), g[1].clone(), g[1].clone(), g[3].clone()],
        )
        .unwrap();
        match solve_decoupling_projections(&bad) {
            Err(Error::CommutantDimension(n)) => assert_ne!(n, 2),
            Err(Error::DefectiveBasis(_)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn block_diagonalizer_reproduces_permutation() {
        let k = kappa3(&dirac_representation()).unwrap();
        let u = block_diagonalizer(&k).unwrap();
        assert!(u.max_abs_diff(&eq50_permutation()) < 1e-14);
    }

    #[test]
    fn sub_representations_in_dirac_rep() {
        let d = DescentDecomposition::new(&dirac_representation()).unwrap();
        let up = planar_triple(1.0);
        let down = planar_triple(-1.0);
        for a in 0..3 {
            assert!(d.sub_plus.gamma(a).max_abs_diff(up.gamma(a)) < 1e-15);
            assert!(d.sub_minus.gamma(a).max_abs_diff(down.gamma(a)) < 1e-15);
        }
        assert!(d.gamma3_offblocks.0.max_abs_diff(&pauli()[0]) < 1e-15);
        assert!(d.gamma3_offblocks.1.max_abs_diff(&pauli()[0].scale_re(-1.0)) < 1e-15);
    }

    #[test]
    fn block_diagonalizer_rejects_wrong_spectrum() {
        let err = block_diagonalizer(&diag([1.0, 1.0, 1.0, -1.0])).unwrap_err();
        assert!(matches!(err, Error::DegenerateEigenspace { plus: 3, minus: 1 }));
    }

    #[test]
    fn decomposition_invariants_random_reps() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let rep = transform(&dirac_representation(), &random_unitary(4, &mut rng)).unwrap();
            let d = DescentDecomposition::new(&rep).unwrap();
            let r = d.residuals().unwrap();
            assert!(r.max() < ALGEBRA_TOL, "{r:?}");
        }
    }

    #[test]
    fn split_basis_vectors() {
        let d = DescentDecomposition::new(&dirac_representation()).unwrap();
        let e = |j: usize| {
            let mut v = [ZERO; 4];
            v[j] = ONE;
            v
        };
        assert_eq!(split_spinor(&e(0), &d), ([ONE, ZERO], [ZERO, ZERO]));
        assert_eq!(split_spinor(&e(1), &d), ([ZERO, ZERO], [ONE, ZERO]));
    }

    #[test]
    fn split_merge_roundtrip_and_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let rep = transform(&dirac_representation(), &random_unitary(4, &mut rng)).unwrap();
        let d = DescentDecomposition::new(&rep).unwrap();
        for _ in 0..50 {
            let v = random_vector(4, &mut rng);
            let psi = [v[0], v[1], v[2], v[3]];
            let (p, m) = split_spinor(&psi, &d);
            let back = merge_spinor(&p, &m, &d);
            for (a, b) in back.iter().zip(&psi) {
                assert!((a - b).norm() < ALGEBRA_TOL);
            }
            let total = vec_norm(&psi).powi(2);
            let parts = vec_norm(&p).powi(2) + vec_norm(&m).powi(2);
            assert!((total - parts).abs() < ALGEBRA_TOL * total);
        }
    }

    #[test]
    fn sector_currents_reproduce_full_bilinears() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let rep = transform(&dirac_representation(), &random_unitary(4, &mut rng)).unwrap();
        let d = DescentDecomposition::new(&rep).unwrap();
        for _ in 0..50 {
            let v = random_vector(4, &mut rng);
            let psi = [v[0], v[1], v[2], v[3]];
            let s = sector_currents(&psi, &d);
            for a in 0..3 {
                let full = bilinear(&psi, rep.gamma(0), rep.gamma(a));
                assert!((full.re - s.plus[a] - s.minus[a]).abs() < 1e-12 * (1.0 + full.norm()));
                assert!(full.im.abs() < 1e-12 * (1.0 + full.norm()));
            }
            let full3 = bilinear(&psi, rep.gamma(0), rep.gamma(3));
            assert!((full3 - s.cross[0] - s.cross[1]).norm() < 1e-12 * (1.0 + full3.norm()));
        }
    }

    #[test]
    fn sector_currents_of_plus_state() {
        let rep = dirac_representation();
        let d = DescentDecomposition::new(&rep).unwrap();
        let psi = [ONE, ZERO, ZERO, ZERO];
        let s = sector_currents(&psi, &d);
        assert!((s.plus[0] - 1.0).abs() < 1e-15);
        assert_eq!(s.minus, [0.0; 3]);
        assert!(s.cross.iter().all(|z| z.norm() < 1e-15));
        assert!(bilinear(&psi, rep.gamma(0), rep.gamma(3)).norm() < 1e-15);
    }

    #[test]
    fn lagrangian_splits_into_sectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let rep = transform(&dirac_representation(), &random_unitary(4, &mut rng)).unwrap();
        let d = DescentDecomposition::new(&rep).unwrap();
        for _ in 0..50 {
            let v = random_vector(4, &mut rng);
            let psi = [v[0], v[1], v[2], v[3]];
            let derivs = [random_vector(4, &mut rng), random_vector(4, &mut rng), random_vector(4, &mut rng)];
            let full = reduced_lagrangian(&rep, &psi, &derivs, 0.7);
            let split = sector_lagrangian_sum(&d, &psi, &derivs, 0.7);
            assert!((full - split).norm() < 1e-12 * (1.0 + full.norm()));
        }
    }

    #[test]
    fn full_rotation_is_minus_identity() {
        let d = DescentDecomposition::new(&dirac_representation()).unwrap();
        let r = covariance_check(&d, 2.0 * std::f64::consts::PI, [0.0, 0.0]).unwrap();
        assert!(r.transformation.max_abs_diff(&ComplexMatrix::identity(4).scale_re(-1.0)) < 1e-12);
        assert!(r.kappa_residual < 1e-12);
    }

    #[test]
    fn rotation_and_boost_preserve_kappa() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let rep = transform(&dirac_representation(), &random_unitary(4, &mut rng)).unwrap();
        for d in [
            DescentDecomposition::new(&dirac_representation()).unwrap(),
            DescentDecomposition::new(&rep).unwrap(),
        ] {
            for (theta, eta) in [(0.7, [0.0, 0.0]), (0.0, [0.3, -0.5]), (1.1, [-0.2, 0.4])] {
                let r = covariance_check(&d, theta, eta).unwrap();
                assert!(r.kappa_residual < SOLVE_TOL, "{r:?}");
                assert!(r.projection_residual < SOLVE_TOL);
            }
        }
    }

    #[test]
    fn z_boost_does_not_preserve_kappa() {
        // control: a boost along the descent axis mixes the sectors
        let d = DescentDecomposition::new(&dirac_representation()).unwrap();
        let gen = spin_generators(&d.parent).unwrap();
        let b = expm_hermitian(&gen.alpha[2], c(-0.25, 0.0)).unwrap();
        let b_inv = expm_hermitian(&gen.alpha[2], c(0.25, 0.0)).unwrap();
        assert!((&(&b_inv * &d.kappa3) * &b).max_abs_diff(&d.kappa3) > 0.1);
    }

    #[test]
    fn reflection_maps_sectors() {
        let d = DescentDecomposition::new(&dirac_representation()).unwrap();
        let r = reflection_relation_check(&d).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.unreflected_difference > 1.0);
        let twice = reflect_y(&reflect_y(&d.sub_plus).unwrap()).unwrap();
        assert_eq!(twice.gammas(), d.sub_plus.gammas());
    }

    #[test]
    fn json_roundtrip() {
        let d = DescentDecomposition::new(&dirac_representation()).unwrap();
        let text = serde_json::to_string(&d.to_json()).unwrap();
        let back = DescentDecomposition::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.u_block, d.u_block);
        assert_eq!(back.sub_minus, d.sub_minus);
    }
}
