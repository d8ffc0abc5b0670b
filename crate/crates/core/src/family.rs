//! Two-parameter affine matrix families `H(α, β) = H₀ + α·H_α + β·H_β`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Complex, SmallMatrix, ONE, ZERO};

/// A point `(α, β)` of the real parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Params {
    pub alpha: f64,
    pub beta: f64,
}

impl Params {
    pub const ORIGIN: Params = Params { alpha: 0.0, beta: 0.0 };

    pub const fn new(alpha: f64, beta: f64) -> Self {
        Params { alpha, beta }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite()
    }

    pub fn distance(&self, other: &Params) -> f64 {
        (self.alpha - other.alpha).hypot(self.beta - other.beta)
    }

    /// `self + t·(other − self)`
    pub fn lerp(&self, other: &Params, t: f64) -> Params {
        Params::new(self.alpha + t * (other.alpha - self.alpha), self.beta + t * (other.beta - self.beta))
    }
}

impl From<[f64; 2]> for Params {
    fn from([alpha, beta]: [f64; 2]) -> Self {
        Params { alpha, beta }
    }
}

impl From<Params> for [f64; 2] {
    fn from(p: Params) -> Self {
        [p.alpha, p.beta]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    #[serde(rename = "paper2x2")]
    Paper2x2,
    #[serde(rename = "paper3x3")]
    Paper3x3,
    #[serde(rename = "tep3x3")]
    Tep3x3,
    #[serde(rename = "custom-affine")]
    CustomAffine,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Paper2x2 => "paper2x2",
            FamilyKind::Paper3x3 => "paper3x3",
            FamilyKind::Tep3x3 => "tep3x3",
            FamilyKind::CustomAffine => "custom-affine",
        }
    }
}

/// Immutable affine family; evaluation is one multiply-add per entry and term.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianFamily {
    kind: FamilyKind,
    base: SmallMatrix,
    grad_alpha: SmallMatrix,
    grad_beta: SmallMatrix,
    /// Construction parameters of the built-in kinds (`E₀`, Δ scale, ε).
    e0: Option<Complex>,
    delta_scale: Option<f64>,
    epsilon: Option<f64>,
}

/// Uniform off-diagonal coupling of the three-mode model.
pub const PAPER3_COUPLING: f64 = 0.4;

impl HamiltonianFamily {
    /// The three-mode model
    ///
    /// ```text
    /// ⎡ e₁−iγ₁   δ      δ    ⎤   e₁ = α−3,  γ₁ = β−1
    /// ⎢  δ     e₂−iγ₂   δ    ⎥   e₂ = 1−α,  γ₂ = 3−β
    /// ⎣  δ      δ     e₃−iγ₃ ⎦   e₃ = 0,    γ₃ = 2,   δ = 0.4
    /// ```
    pub fn paper_3x3() -> Self {
        let d = Complex::new(PAPER3_COUPLING, 0.0);
        let base = SmallMatrix::from_rows(&[
            [Complex::new(-3.0, 1.0), d, d],
            [d, Complex::new(1.0, -3.0), d],
            [d, d, Complex::new(0.0, -2.0)],
        ])
        .expect("static matrix");
        let grad_alpha = SmallMatrix::diag(&[ONE, -ONE, ZERO]).expect("static matrix");
        let i = Complex::new(0.0, 1.0);
        let grad_beta = SmallMatrix::diag(&[-i, i, ZERO]).expect("static matrix");
        HamiltonianFamily {
            kind: FamilyKind::Paper3x3,
            base,
            grad_alpha,
            grad_beta,
            e0: None,
            delta_scale: None,
            epsilon: None,
        }
    }

    /// Single-EP 2×2 family `[[E₀, 1], [W, E₀]]` with `W = Δ = (α + iβ)·delta_scale`,
    /// so the `(α, β)` plane is the complex Δ-plane and the EP is at the origin.
    pub fn paper_2x2(e0: Complex, delta_scale: f64) -> Result<Self> {
        if !(delta_scale > 0.0 && delta_scale.is_finite()) {
            return Err(Error::InvalidFamily(format!("delta_scale must be positive, got {delta_scale}")));
        }
        if !crate::matrix::is_finite(e0) {
            return Err(Error::InvalidFamily("e0 must be finite".into()));
        }
        let base = SmallMatrix::from_rows(&[[e0, ONE], [ZERO, e0]])?;
        let grad_alpha = SmallMatrix::from_rows(&[[ZERO, ZERO], [Complex::new(delta_scale, 0.0), ZERO]])?;
        let grad_beta = SmallMatrix::from_rows(&[[ZERO, ZERO], [Complex::new(0.0, delta_scale), ZERO]])?;
        Ok(HamiltonianFamily {
            kind: FamilyKind::Paper2x2,
            base,
            grad_alpha,
            grad_beta,
            e0: Some(e0),
            delta_scale: Some(delta_scale),
            epsilon: None,
        })
    }

    /// Perturbed 3×3 Jordan block `J₃ + (α + iβ)·ε·E₃₁`; its eigenvalues are
    /// the cube roots of `(α + iβ)ε`, giving a triple EP at the origin.
    pub fn tep_3x3(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidFamily(format!("epsilon must be positive, got {epsilon}")));
        }
        let base = SmallMatrix::from_real_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])?;
        let mut grad_alpha = SmallMatrix::zeros(3)?;
        grad_alpha[(2, 0)] = Complex::new(epsilon, 0.0);
        let mut grad_beta = SmallMatrix::zeros(3)?;
        grad_beta[(2, 0)] = Complex::new(0.0, epsilon);
        Ok(HamiltonianFamily {
            kind: FamilyKind::Tep3x3,
            base,
            grad_alpha,
            grad_beta,
            e0: None,
            delta_scale: None,
            epsilon: Some(epsilon),
        })
    }

    pub fn custom_affine(base: SmallMatrix, grad_alpha: SmallMatrix, grad_beta: SmallMatrix) -> Result<Self> {
        let n = base.n();
        for g in [&grad_alpha, &grad_beta] {
            if g.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: g.n() });
            }
        }
        for m in [&base, &grad_alpha, &grad_beta] {
            m.check_finite()?;
        }
        Ok(HamiltonianFamily {
            kind: FamilyKind::CustomAffine,
            base,
            grad_alpha,
            grad_beta,
            e0: None,
            delta_scale: None,
            epsilon: None,
        })
    }

    /// Default instance of a built-in kind by name (`paper2x2` uses `E₀ = 0`,
    /// unit Δ scale; `tep3x3` uses `ε = 1`).
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "paper3x3" => Ok(Self::paper_3x3()),
            "paper2x2" => Self::paper_2x2(ZERO, 1.0),
            "tep3x3" => Self::tep_3x3(1.0),
            other => Err(Error::InvalidFamily(format!("unknown built-in family `{other}`"))),
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn base(&self) -> &SmallMatrix {
        &self.base
    }

    pub fn grad_alpha(&self) -> &SmallMatrix {
        &self.grad_alpha
    }

    pub fn grad_beta(&self) -> &SmallMatrix {
        &self.grad_beta
    }

    pub fn e0(&self) -> Option<Complex> {
        self.e0
    }

    pub fn delta_scale(&self) -> Option<f64> {
        self.delta_scale
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// `H₀ + α·H_α + β·H_β`
    pub fn evaluate(&self, p: Params) -> SmallMatrix {
        let n = self.n();
        let mut m = self.base;
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += self.grad_alpha[(i, j)].scale(p.alpha) + self.grad_beta[(i, j)].scale(p.beta);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{discriminant, eigenvalues};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn paper3_entries() {
        let f = HamiltonianFamily::paper_3x3();
        assert_eq!(f.evaluate(Params::new(3.0, 1.0))[(0, 0)], ZERO);
        let m = f.evaluate(Params::new(2.0, 2.0));
        assert_eq!(m[(0, 0)], c(-1.0, -1.0));
        assert_eq!(m[(1, 1)], c(-1.0, -1.0));
        assert_eq!(m[(2, 2)], c(0.0, -2.0));
        assert_eq!(f.evaluate(Params::ORIGIN)[(1, 1)], c(1.0, -3.0));
        assert_eq!(f.evaluate(Params::ORIGIN), *f.base());
    }

    #[test]
    fn paper3_couplings_are_symmetric() {
        let f = HamiltonianFamily::paper_3x3();
        for p in [Params::new(-4.0, 9.0), Params::new(1.041, 1.948), Params::new(0.3, -0.7)] {
            let m = f.evaluate(p);
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert_eq!(m[(i, j)], c(0.4, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn paper3_discriminant_is_locally_minimal_at_first_ep() {
        let f = HamiltonianFamily::paper_3x3();
        let at = |a: f64, b: f64| discriminant(&f.evaluate(Params::new(a, b))).norm();
        let centre = at(1.041_483_93, 1.948_002_75);
        assert!(centre < 1e-7);
        for (da, db) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            assert!(at(1.041_483_93 + da, 1.948_002_75 + db) > centre);
        }
    }

    #[test]
    fn linearity_is_exact_for_dyadic_steps() {
        let f = HamiltonianFamily::paper_3x3();
        let (a, b, step) = (0.5, 1.25, 0.25);
        let diff = f.evaluate(Params::new(a + step, b)) - f.evaluate(Params::new(a, b));
        assert_eq!(diff, f.grad_alpha().scaled(step));
    }

    #[test]
    fn paper2_has_ep_at_origin() {
        let f = HamiltonianFamily::paper_2x2(c(0.5, -0.25), 1.0).unwrap();
        let m = f.evaluate(Params::ORIGIN);
        assert_eq!(discriminant(&m), ZERO);
        assert_eq!(eigenvalues(&m), vec![c(0.5, -0.25); 2]);

        let f = HamiltonianFamily::paper_2x2(ZERO, 1.0).unwrap();
        let v = eigenvalues(&f.evaluate(Params::new(1.0, 0.0)));
        assert_eq!(v, vec![ONE, -ONE]);
        // Δ equals (α + iβ)·scale
        let f = HamiltonianFamily::paper_2x2(ZERO, 2.0).unwrap();
        assert_eq!(discriminant(&f.evaluate(Params::new(0.5, -1.5))), c(1.0, -3.0));
    }

    #[test]
    fn constructors_validate() {
        assert!(HamiltonianFamily::paper_2x2(ZERO, 0.0).is_err());
        assert!(HamiltonianFamily::paper_2x2(ZERO, f64::NAN).is_err());
        assert!(HamiltonianFamily::tep_3x3(-1.0).is_err());
        let b3 = SmallMatrix::identity(3).unwrap();
        let b2 = SmallMatrix::identity(2).unwrap();
        assert!(matches!(HamiltonianFamily::custom_affine(b3, b2, b3), Err(Error::DimensionMismatch { .. })));
        assert!(HamiltonianFamily::builtin("nope").is_err());
    }

    #[test]
    fn tep_origin_is_nilpotent_and_cube_roots_appear() {
        let f = HamiltonianFamily::tep_3x3(1e-3).unwrap();
        assert_eq!(eigenvalues(&f.evaluate(Params::ORIGIN)), vec![ZERO; 3]);
        let vals = eigenvalues(&f.evaluate(Params::new(1.0, 0.0)));
        let omega = crate::eigen::OMEGA;
        for want in [c(0.1, 0.0), omega * 0.1, omega.conj() * 0.1] {
            let best = vals.iter().map(|v| (v - want).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-14, "{best}");
        }
    }

    #[test]
    fn tep_matches_analytic_cube_roots_across_epsilon() {
        for &eps in &[1e-6, 1e-4, 1e-2, 0.3, 1.0] {
            let f = HamiltonianFamily::tep_3x3(eps).unwrap();
            for &(a, b) in &[(1.0, 0.0), (-0.3, 0.8), (0.01, -0.02)] {
                let z = Complex::new(a, b) * eps;
                let root = z.cbrt();
                let vals = eigenvalues(&f.evaluate(Params::new(a, b)));
                for k in 0..3 {
                    let want = root * crate::eigen::OMEGA.powu(k);
                    let best = vals.iter().map(|v| (v - want).norm()).fold(f64::INFINITY, f64::min);
                    assert!(best < 1e-10, "eps {eps}: {best}");
                }
            }
        }
    }
}
