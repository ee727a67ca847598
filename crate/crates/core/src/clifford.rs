//! Gamma-matrix representations of the Clifford algebra of Minkowski space.
//!
//! A representation with `n` spatial dimensions holds `n + 1` matrices of
//! order `2^⌊(n+1)/2⌋` obeying `{γ^A, γ^B} = 2 η^{AB} I` with
//! `η = diag(+1, -1, ..., -1)`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, pauli, ComplexMatrix, I, ONE, ZERO};

/// Tolerance for exact matrix-algebra identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for results that go through a linear solve.
pub const SOLVE_TOL: f64 = 1e-10;

pub const MAX_SPATIAL_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinkowskiMetric {
    spatial_dim: usize,
}

impl MinkowskiMetric {
    pub fn new(spatial_dim: usize) -> Result<Self> {
        if spatial_dim == 0 {
            return Err(Error::OutOfRange {
                what: "spatial dimension",
                value: spatial_dim.to_string(),
            });
        }
        Ok(Self { spatial_dim })
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    /// `η^{AA}`; the metric is diagonal.
    pub fn diag(&self, a: usize) -> f64 {
        if a == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn entry(&self, a: usize, b: usize) -> f64 {
        if a == b {
            self.diag(a)
        } else {
            0.0
        }
    }

    pub fn signature(&self) -> Vec<f64> {
        (0..=self.spatial_dim).map(|a| self.diag(a)).collect()
    }
}

/// `2^⌊(n+1)/2⌋`.
pub fn spinor_order(spatial_dim: usize) -> usize {
    1 << spatial_dim.div_ceil(2)
}

/// Residuals of the defining identities, each a max-entry norm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CliffordResiduals {
    /// `max_{A,B} |{γ^A, γ^B} - 2η^{AB} I|`
    pub anticommutator: f64,
    /// `max_A |(γ^A)† - γ^0 γ^A γ^0|`
    pub hermiticity: f64,
    /// `max_A |γ^A (γ^A)† - I|`
    pub unitarity: f64,
    /// `max_A |tr γ^A|`
    pub trace: f64,
}

impl CliffordResiduals {
    pub fn max(&self) -> f64 {
        self.anticommutator
            .max(self.hermiticity)
            .max(self.unitarity)
            .max(self.trace)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaRepresentation {
    metric: MinkowskiMetric,
    gammas: Vec<ComplexMatrix>,
    label: String,
}

impl GammaRepresentation {
    /// Validates the Clifford, hermiticity and trace conditions at
    /// [`ALGEBRA_TOL`].
    pub fn new(label: impl Into<String>, gammas: Vec<ComplexMatrix>) -> Result<Self> {
        let rep = Self::new_unchecked(label, gammas)?;
        let res = rep.residuals();
        if res.max() >= ALGEBRA_TOL {
            return Err(Error::InvalidRepresentation(res.max()));
        }
        Ok(rep)
    }

    /// Shape checks only. Used when auditing externally supplied matrices.
    pub fn new_unchecked(label: impl Into<String>, gammas: Vec<ComplexMatrix>) -> Result<Self> {
        if gammas.len() < 2 {
            return Err(Error::OutOfRange {
                what: "number of gamma matrices",
                value: gammas.len().to_string(),
            });
        }
        let n = gammas.len() - 1;
        let order = spinor_order(n);
        for g in &gammas {
            if g.dim() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    found: g.dim(),
                });
            }
            if !g.is_finite() {
                return Err(Error::NonFinite("gamma matrix"));
            }
        }
        Ok(Self {
            metric: MinkowskiMetric::new(n)?,
            gammas,
            label: label.into(),
        })
    }

    pub fn metric(&self) -> MinkowskiMetric {
        self.metric
    }

    pub fn spatial_dim(&self) -> usize {
        self.metric.spatial_dim()
    }

    /// Matrix order `N`.
    pub fn order(&self) -> usize {
        self.gammas[0].dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn gammas(&self) -> &[ComplexMatrix] {
        &self.gammas
    }

    pub fn gamma(&self, a: usize) -> &ComplexMatrix {
        &self.gammas[a]
    }

    pub fn residuals(&self) -> CliffordResiduals {
        let n = self.order();
        let id = ComplexMatrix::identity(n);
        let g0 = &self.gammas[0];
        let mut r = CliffordResiduals::default();
        for (a, ga) in self.gammas.iter().enumerate() {
            for (b, gb) in self.gammas.iter().enumerate().skip(a) {
                let want = id.scale_re(2.0 * self.metric.entry(a, b));
                r.anticommutator = r.anticommutator.max(ga.anticommutator(gb).max_abs_diff(&want));
            }
            let conj = &(g0 * ga) * g0;
            r.hermiticity = r.hermiticity.max(ga.adjoint().max_abs_diff(&conj));
            r.unitarity = r.unitarity.max(ga.unitarity_residual());
            r.trace = r.trace.max(ga.trace().norm());
        }
        r
    }

    fn require_spatial_dim(&self, n: usize) -> Result<()> {
        if self.spatial_dim() != n {
            return Err(Error::WrongSpatialDimension {
                expected: n,
                found: self.spatial_dim(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> RepresentationJson {
        RepresentationJson {
            label: self.label.clone(),
            n: self.spatial_dim(),
            order: self.order(),
            gammas: self
                .gammas
                .iter()
                .map(|g| g.as_slice().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    /// Imports without validating the Clifford axioms; call
    /// [`GammaRepresentation::residuals`] to audit.
    pub fn from_json(json: &RepresentationJson) -> Result<Self> {
        let gammas = json
            .gammas
            .iter()
            .map(|g| ComplexMatrix::from_row_major(g.iter().map(|&[re, im]| c(re, im)).collect()))
            .collect::<Result<Vec<_>>>()?;
        if gammas.len() != json.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: json.n + 1,
                found: gammas.len(),
            });
        }
        let rep = Self::new_unchecked(json.label.clone(), gammas)?;
        if rep.order() != json.order {
            return Err(Error::DimensionMismatch {
                expected: json.order,
                found: rep.order(),
            });
        }
        Ok(rep)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let json: RepresentationJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_json(&json)
    }
}

/// On-disk form: each gamma matrix is a row-major list of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationJson {
    pub label: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub order: usize,
    pub gammas: Vec<Vec<[f64; 2]>>,
}

/// Dirac's standard representation: `γ⁰ = diag(I, -I)`, `γ^i` with `σ^i`
/// in the upper-right block and `-σ^i` in the lower-left.
pub fn dirac_representation() -> GammaRepresentation {
    let id2 = ComplexMatrix::identity(2);
    let s3 = &pauli()[2];
    let mut gammas = vec![s3.kron(&id2)];
    // [[0, σ], [-σ, 0]] = (iσ²) ⊗ σ
    let isigma2 = pauli()[1].scale(I);
    for s in pauli().iter() {
        gammas.push(isigma2.kron(s));
    }
    GammaRepresentation::new("dirac", gammas).expect("Dirac representation is valid")
}

/// `γ⁵ = iγ⁰γ¹γ²γ³`.
pub fn gamma5(rep: &GammaRepresentation) -> Result<ComplexMatrix> {
    rep.require_spatial_dim(3)?;
    let g = rep.gammas();
    Ok((&(&(&g[0] * &g[1]) * &g[2]) * &g[3]).scale(I))
}

#[derive(Debug, Clone)]
pub struct SpinGenerators {
    /// `Σ^i = (i/2) ε^{ijk} γ^j γ^k`, rotation generators.
    pub sigma: [ComplexMatrix; 3],
    /// `α^i = γ⁰ γ^i`, boost generators.
    pub alpha: [ComplexMatrix; 3],
}

pub fn spin_generators(rep: &GammaRepresentation) -> Result<SpinGenerators> {
    rep.require_spatial_dim(3)?;
    let g = rep.gammas();
    // ε^{ijk} γ^j γ^k summed over j,k is 2 γ^j γ^k for the cyclic (j,k).
    let sigma_i = |j: usize, k: usize| (&g[j] * &g[k]).scale(I);
    Ok(SpinGenerators {
        sigma: [sigma_i(2, 3), sigma_i(3, 1), sigma_i(1, 2)],
        alpha: [&g[0] * &g[1], &g[0] * &g[2], &g[0] * &g[3]],
    })
}

/// `γ^μ -> U γ^μ U†`.
pub fn transform(rep: &GammaRepresentation, u: &ComplexMatrix) -> Result<GammaRepresentation> {
    if u.dim() != rep.order() {
        return Err(Error::DimensionMismatch {
            expected: rep.order(),
            found: u.dim(),
        });
    }
    let res = u.unitarity_residual();
    if res >= ALGEBRA_TOL {
        return Err(Error::NotUnitary(res));
    }
    let ud = u.adjoint();
    let gammas = rep.gammas().iter().map(|g| &(u * g) * &ud).collect();
    GammaRepresentation::new(format!("{}+transformed", rep.label()), gammas)
}

/// Names of the 16 basis elements in the fixed ordering used by
/// [`basis_decompose`].
pub const BASIS_LABELS: [&str; 16] = [
    "I", "g0", "g1", "g2", "g3", "g0g1", "g0g2", "g0g3", "g1g2", "g1g3", "g2g3", "g0g5", "g1g5",
    "g2g5", "g3g5", "g5",
];

/// Index of `γ^μ γ⁵` in the basis ordering.
pub const fn axial_index(mu: usize) -> usize {
    11 + mu
}

/// Index of `γ^μ γ^ν` (`μ < ν`).
pub fn pair_index(mu: usize, nu: usize) -> usize {
    assert!(mu < nu && nu < 4);
    const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    5 + PAIRS.iter().position(|&p| p == (mu, nu)).unwrap()
}

/// The basis `I; γ⁰..γ³; γ^μγ^ν (μ<ν, lexicographic); γ⁰γ⁵..γ³γ⁵; γ⁵`.
pub fn basis_elements(rep: &GammaRepresentation) -> Result<Vec<ComplexMatrix>> {
    let g5 = gamma5(rep)?;
    let g = rep.gammas();
    let mut basis = Vec::with_capacity(16);
    basis.push(ComplexMatrix::identity(4));
    basis.extend(g.iter().cloned());
    for mu in 0..4 {
        for nu in mu + 1..4 {
            basis.push(&g[mu] * &g[nu]);
        }
    }
    for gm in g {
        basis.push(gm * &g5);
    }
    basis.push(g5);
    Ok(basis)
}

/// Coefficients of a 4×4 matrix in the basis of [`basis_elements`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisCoefficients(pub [Complex64; 16]);

impl BasisCoefficients {
    pub fn scalar(&self) -> Complex64 {
        self.0[0]
    }

    pub fn vector(&self, mu: usize) -> Complex64 {
        self.0[1 + mu]
    }

    pub fn tensor(&self, mu: usize, nu: usize) -> Complex64 {
        self.0[pair_index(mu, nu)]
    }

    pub fn axial(&self, mu: usize) -> Complex64 {
        self.0[axial_index(mu)]
    }

    pub fn pseudoscalar(&self) -> Complex64 {
        self.0[15]
    }

    pub fn recombine(&self, rep: &GammaRepresentation) -> Result<ComplexMatrix> {
        let basis = basis_elements(rep)?;
        Ok(self
            .0
            .iter()
            .zip(&basis)
            .fold(ComplexMatrix::zeros(4), |acc, (&k, b)| &acc + &b.scale(k)))
    }
}

/// Projects `m` onto the 16-element basis by trace inner products.
///
/// Every basis element is unitary, so `tr(B†B) = 4`; the Gram matrix is
/// checked to be `4 I` before the coefficients are trusted.
pub fn basis_decompose(m: &ComplexMatrix, rep: &GammaRepresentation) -> Result<BasisCoefficients> {
    if m.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: m.dim(),
        });
    }
    let basis = basis_elements(rep)?;
    let mut gram_residual: f64 = 0.0;
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate() {
            let want = if i == j { 4.0 } else { 0.0 };
            gram_residual = gram_residual.max((bi.hs_inner(bj) - want).norm());
        }
    }
    if gram_residual > 1e-8 {
        return Err(Error::DefectiveBasis(gram_residual));
    }
    let mut coeffs = [ZERO; 16];
    for (k, b) in coeffs.iter_mut().zip(&basis) {
        *k = b.hs_inner(m) / 4.0;
    }
    Ok(BasisCoefficients(coeffs))
}

/// Gamma matrices for `n` spatial dimensions (`1 <= n <= 8`) by the
/// Brauer-Weyl recursion.
///
/// Starts from `(σ³, iσ²)` for `n = 1`. Going from an even count of
/// generators to an odd one adjoins the (suitably phased) product of all
/// generators; going from odd to even doubles the order with
/// `γ^A ⊗ σ¹` and appends `I ⊗ iσ²`.
pub fn generate_gammas(n: usize) -> Result<GammaRepresentation> {
    if !(1..=MAX_SPATIAL_DIM).contains(&n) {
        return Err(Error::OutOfRange {
            what: "spatial dimension",
            value: n.to_string(),
        });
    }
    let [s1, s2, s3] = pauli();
    let is2 = s2.scale(I);
    let mut gammas = vec![s3.clone(), is2.clone()];
    while gammas.len() < n + 1 {
        if gammas.len() % 2 == 0 {
            let prod = gammas[1..]
                .iter()
                .fold(gammas[0].clone(), |acc, g| &acc * g);
            let sq = &prod * &prod;
            let id = ComplexMatrix::identity(prod.dim());
            // choose the phase so that the new generator squares to -I
            let phase = if sq.max_abs_diff(&id.scale_re(-1.0)) < ALGEBRA_TOL {
                ONE
            } else {
                -I
            };
            gammas.push(prod.scale(phase));
        } else {
            let dim = gammas[0].dim();
            let mut next: Vec<ComplexMatrix> = gammas.iter().map(|g| g.kron(&s1)).collect();
            next.push(ComplexMatrix::identity(dim).kron(&is2));
            gammas = next;
        }
    }
    GammaRepresentation::new(format!("brauer-weyl-{n}"), gammas)
}

/// The 2+1 triple `(σ³, iσ², ∓iσ¹)`; `sign = +1` gives `-iσ¹`.
pub fn planar_triple(sign: f64) -> GammaRepresentation {
    let [s1, s2, s3] = pauli();
    GammaRepresentation::new(
        if sign > 0.0 { "planar-up" } else { "planar-down" },
        vec![s3, s2.scale(I), s1.scale(c(0.0, -sign))],
    )
    .expect("planar triple is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real_diag(d: [f64; 4]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&d.map(|x| c(x, 0.0)))
    }

    #[test]
    fn dirac_gamma0_is_diag() {
        let rep = dirac_representation();
        assert_eq!(rep.gamma(0), &real_diag([1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn dirac_gamma1_blocks() {
        let rep = dirac_representation();
        let g1 = rep.gamma(1);
        let s1 = &pauli()[0];
        assert_eq!(g1.block(0, 2, 2), *s1);
        assert_eq!(g1.block(2, 0, 2), s1.scale_re(-1.0));
        assert_eq!(g1.block(0, 0, 2).max_abs(), 0.0);
        assert_eq!(g1.block(2, 2, 2).max_abs(), 0.0);
    }

    #[test]
    fn dirac_spatial_anticommute_exactly() {
        let rep = dirac_representation();
        assert_eq!(rep.gamma(1).anticommutator(rep.gamma(2)).max_abs(), 0.0);
    }

    #[test]
    fn dirac_passes_invariants() {
        let rep = dirac_representation();
        assert!(rep.residuals().max() < ALGEBRA_TOL);
        let id = ComplexMatrix::identity(4);
        assert!((rep.gamma(0) * rep.gamma(0)).max_abs_diff(&id) < ALGEBRA_TOL);
        for i in 1..4 {
            assert!((rep.gamma(i) * rep.gamma(i)).max_abs_diff(&id.scale_re(-1.0)) < ALGEBRA_TOL);
        }
    }

    #[test]
    fn gamma5_in_dirac_rep_is_off_diagonal_identity() {
        let g5 = gamma5(&dirac_representation()).unwrap();
        // computed by hand from the block forms:
        // iγ⁰γ¹γ²γ³ = [[0, I], [I, 0]]
        let want = ComplexMatrix::from_real_rows([
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]);
        assert!(g5.max_abs_diff(&want) < 1e-15);
        assert!((&g5 * &g5).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn gamma5_properties_and_covariance() {
        let rep = dirac_representation();
        let g5 = gamma5(&rep).unwrap();
        assert!(g5.hermiticity_residual() < ALGEBRA_TOL);
        for g in rep.gammas() {
            assert!(g5.anticommutator(g).max_abs() < ALGEBRA_TOL);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_unitary(4, &mut rng);
        let t = transform(&rep, &u).unwrap();
        let lhs = gamma5(&t).unwrap();
        let rhs = &(&u * &g5) * &u.adjoint();
        assert!(lhs.max_abs_diff(&rhs) < ALGEBRA_TOL);
    }

    #[test]
    fn gamma5_rejects_planar_rep() {
        let err = gamma5(&planar_triple(1.0)).unwrap_err();
        assert!(matches!(err, Error::WrongSpatialDimension { expected: 3, found: 2 }));
    }

    #[test]
    fn spin_generators_in_dirac_rep() {
        let rep = dirac_representation();
        let gen = spin_generators(&rep).unwrap();
        let s = pauli();
        let z2 = ComplexMatrix::zeros(2);
        for i in 0..3 {
            let sig = &gen.sigma[i];
            assert!(sig.block(0, 0, 2).max_abs_diff(&s[i]) < 1e-15);
            assert!(sig.block(2, 2, 2).max_abs_diff(&s[i]) < 1e-15);
            assert!(sig.block(0, 2, 2).max_abs_diff(&z2) < 1e-15);
            let al = &gen.alpha[i];
            assert!(al.block(0, 2, 2).max_abs_diff(&s[i]) < 1e-15);
            assert!(al.block(2, 0, 2).max_abs_diff(&s[i]) < 1e-15);
            assert!(al.block(0, 0, 2).max_abs_diff(&z2) < 1e-15);
            assert!(sig.hermiticity_residual() < ALGEBRA_TOL);
            assert!(al.hermiticity_residual() < ALGEBRA_TOL);
        }
        assert!(gen.sigma[2].max_abs_diff(&real_diag([1.0, -1.0, 1.0, -1.0])) < 1e-15);
    }

    #[test]
    fn transform_identity_and_errors() {
        let rep = dirac_representation();
        let same = transform(&rep, &ComplexMatrix::identity(4)).unwrap();
        for (a, b) in same.gammas().iter().zip(rep.gammas()) {
            assert_eq!(a, b);
        }
        let bad = ComplexMatrix::identity(4).scale_re(2.0);
        assert!(matches!(transform(&rep, &bad), Err(Error::NotUnitary(_))));
        assert!(matches!(
            transform(&rep, &ComplexMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transform_by_permutation_gives_block_form() {
        let rep = dirac_representation();
        let u = ComplexMatrix::from_real_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ]);
        let t = transform(&rep, &u).unwrap();
        let [s1, s2, s3] = pauli();
        let z = ComplexMatrix::zeros(2);
        let blockdiag = |a: &ComplexMatrix, b: &ComplexMatrix| {
            let mut m = ComplexMatrix::zeros(4);
            for r in 0..2 {
                for cc in 0..2 {
                    m[(r, cc)] = a[(r, cc)];
                    m[(r + 2, cc + 2)] = b[(r, cc)];
                }
            }
            m
        };
        assert_eq!(*t.gamma(0), blockdiag(&s3, &s3));
        assert_eq!(*t.gamma(1), blockdiag(&s2.scale(I), &s2.scale(I)));
        assert_eq!(*t.gamma(2), blockdiag(&s1.scale(-I), &s1.scale(I)));
        let g3 = t.gamma(3);
        assert_eq!(g3.block(0, 0, 2), z);
        assert_eq!(g3.block(0, 2, 2), s1);
        assert_eq!(g3.block(2, 0, 2), s1.scale_re(-1.0));
    }

    #[test]
    fn decompose_identity_and_kappa() {
        let rep = dirac_representation();
        let k = basis_decompose(&ComplexMatrix::identity(4), &rep).unwrap();
        assert!((k.scalar() - ONE).norm() < 1e-15);
        assert!(k.0[1..].iter().all(|z| z.norm() < 1e-15));

        let kappa = rep.gamma(3) * &gamma5(&rep).unwrap();
        let k = basis_decompose(&kappa, &rep).unwrap();
        // κ³ = γ³γ⁵ is itself the basis element at index 14, coefficient +1
        assert!((k.axial(3) - ONE).norm() < 1e-15);
        for (i, z) in k.0.iter().enumerate() {
            if i != axial_index(3) {
                assert!(z.norm() < 1e-15, "{} = {z}", BASIS_LABELS[i]);
            }
        }
    }

    #[test]
    fn decompose_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rep = transform(&dirac_representation(), &random_unitary(4, &mut rng)).unwrap();
        for _ in 0..100 {
            let m = random_matrix(4, &mut rng);
            let back = basis_decompose(&m, &rep).unwrap().recombine(&rep).unwrap();
            // oracle: direct recombination from the explicit basis
            assert!(back.max_abs_diff(&m) < SOLVE_TOL);
        }
    }

    #[test]
    fn decompose_detects_defective_basis() {
        let mut g = dirac_representation().gammas().to_vec();
        g[1] = g[2].clone();
        let bad = GammaRepresentation::new_unchecked("bad", g).unwrap();
        assert!(matches!(
            basis_decompose(&ComplexMatrix::identity(4), &bad),
            Err(Error::DefectiveBasis(_))
        ));
    }

    #[test]
    fn generated_representations_satisfy_axioms() {
        for n in 1..=MAX_SPATIAL_DIM {
            let rep = generate_gammas(n).unwrap();
            assert_eq!(rep.gammas().len(), n + 1);
            assert_eq!(rep.order(), spinor_order(n));
            assert!(rep.residuals().max() < ALGEBRA_TOL, "n = {n}");
        }
    }

    #[test]
    fn generated_planar_matches_reference_triple() {
        let rep = generate_gammas(2).unwrap();
        let want = planar_triple(1.0);
        for (a, b) in rep.gammas().iter().zip(want.gammas()) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
    }

    #[test]
    fn generated_n4_has_order_four() {
        let rep = generate_gammas(4).unwrap();
        assert_eq!(rep.order(), 4);
        assert_eq!(rep.gammas().len(), 5);
    }

    #[test]
    fn generated_n3_equivalent_to_dirac() {
        // both satisfy the same axioms, so the full 16-element basis built
        // from either is trace-orthogonal
        let rep = generate_gammas(3).unwrap();
        assert!(rep.residuals().max() < ALGEBRA_TOL);
        assert!(basis_decompose(&ComplexMatrix::identity(4), &rep).is_ok());
    }

    #[test]
    fn generate_rejects_out_of_range() {
        assert!(generate_gammas(0).is_err());
        assert!(generate_gammas(9).is_err());
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rep = transform(&dirac_representation(), &random_unitary(4, &mut rng)).unwrap();
        let text = serde_json::to_string(&rep.to_json()).unwrap();
        let back = GammaRepresentation::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, rep);
        assert!(text.contains("\"N\":4"));
    }

    #[test]
    fn from_json_rejects_wrong_count() {
        let mut json = dirac_representation().to_json();
        json.n = 2;
        assert!(GammaRepresentation::from_json(&json).is_err());
    }
}
