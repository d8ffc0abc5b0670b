//! Closed-form spectra of 2×2 and 3×3 complex matrices.
//!
//! The 2×2 solver is the quadratic formula `E₀ ± √Δ` with
//! `E₀ = (E₁+E₂)/2`, `Δ = (E₁−E₂)²/4 + VW`. The 3×3 solver is Cardano's
//! formula on the depressed cubic: with `λ = t − β`, `β = a/3`,
//!
//! ```text
//! t = ωᵏ α₊ + ω̄ᵏ α₋,   α± = (q ± √(q² + p³))^{1/3},   α₊ α₋ = −p
//! ```
//!
//! where `p = b/3 − a²/9` and `q = −c/2 + ab/6 − a³/27`. Two eigenvalues
//! coincide exactly when `D = q² + p³` vanishes, which is what the EP locator
//! drives to zero.

use itertools::Itertools;

use crate::error::{Error, Result};
#[cfg(test)]
use crate::matrix::ONE;
use crate::matrix::{inner, norm, Complex, SmallMatrix, ZERO};

/// Primitive cube root of unity `ω = (−1 + √3 i)/2`.
pub const OMEGA: Complex = Complex::new(-0.5, 0.866_025_403_784_438_6);

/// Tolerance on `|λ − λ_nearest|` for a value to count as an eigenvalue.
pub const EIGENVALUE_TOL: f64 = 1e-8;
/// Minimum relative gap to the rest of the spectrum for a simple eigenvalue.
pub const DEFECT_GAP_TOL: f64 = 1e-6;
/// Minimum `|⟨l|r⟩|` (unit vectors) before the pair is considered self-orthogonal.
pub const DEFECT_OVERLAP_TOL: f64 = 1e-6;

/// Coefficients of the monic cubic `λ³ + aλ² + bλ + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
}

impl CubicCoefficients {
    pub fn eval(&self, x: Complex) -> Complex {
        ((x + self.a) * x + self.b) * x + self.c
    }
}

/// Eigenvalues of one matrix, optionally with a biorthogonal vector basis.
///
/// Right vectors have unit Euclidean norm; left vectors are scaled so that
/// `⟨lᵢ|rᵢ⟩ = 1`. When vectors were requested but some eigenvalue is not
/// simple enough to support a pair, `defective` is set and both vector lists
/// are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSet {
    pub values: Vec<Complex>,
    pub right_vectors: Option<Vec<Vec<Complex>>>,
    pub left_vectors: Option<Vec<Vec<Complex>>>,
    pub defective: bool,
}

impl EigenSet {
    fn values_only(values: Vec<Complex>) -> Self {
        EigenSet { values, right_vectors: None, left_vectors: None, defective: false }
    }

    fn with_vectors(m: &SmallMatrix, values: Vec<Complex>) -> Self {
        let pairs: Result<Vec<_>> = values.iter().map(|&v| pair_for(m, v, &values)).collect();
        match pairs {
            Ok(pairs) => {
                let (right, left) = pairs.into_iter().unzip();
                EigenSet { values, right_vectors: Some(right), left_vectors: Some(left), defective: false }
            }
            Err(_) => EigenSet { values, right_vectors: None, left_vectors: None, defective: true },
        }
    }
}

/// Characteristic polynomial `det(λI − m) = λ³ + aλ² + bλ + c` of a 3×3 matrix.
pub fn char_poly(m: &SmallMatrix) -> Result<CubicCoefficients> {
    expect_dim(m, 3)?;
    Ok(CubicCoefficients { a: -m.trace(), b: principal_minor_sum(m), c: -m.det() })
}

fn principal_minor_sum(m: &SmallMatrix) -> Complex {
    let minor = |i: usize, j: usize| m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
    minor(0, 1) + minor(0, 2) + minor(1, 2)
}

/// `(p, q, β)` of the depressed cubic. Computed on the trace-shifted matrix
/// so that `a = 0` exactly and the `a²/9`, `a³/27` cancellations never occur.
fn depressed(m: &SmallMatrix) -> (Complex, Complex, Complex) {
    let shift = m.trace() / 3.0;
    let centred = m.shifted(shift);
    let p = principal_minor_sum(&centred) / 3.0;
    let q = centred.det() / 2.0;
    // λ = t − β with β = a/3 = −tr/3
    (p, q, -shift)
}

/// Cardano discriminant `D = q² + p³`; zero iff two eigenvalues coincide.
///
/// Relates to the root-difference product by
/// `(λ₁−λ₂)²(λ₂−λ₃)²(λ₃−λ₁)² = −108·D`.
pub fn discriminant3(m: &SmallMatrix) -> Result<Complex> {
    expect_dim(m, 3)?;
    let (p, q, _) = depressed(m);
    Ok(q * q + p * p * p)
}

/// Degeneracy discriminant for either dimension: `Δ` for 2×2, `q² + p³` for 3×3.
pub fn discriminant(m: &SmallMatrix) -> Complex {
    match m.n() {
        2 => quadratic_delta(m),
        _ => {
            let (p, q, _) = depressed(m);
            q * q + p * p * p
        }
    }
}

fn quadratic_delta(m: &SmallMatrix) -> Complex {
    let half_split = (m[(0, 0)] - m[(1, 1)]) / 2.0;
    half_split * half_split + m[(0, 1)] * m[(1, 0)]
}

/// Eigenvalues `{E₀ + √Δ, E₀ − √Δ}` of a 2×2 matrix (principal square root).
pub fn eigs2(m: &SmallMatrix, with_vectors: bool) -> Result<EigenSet> {
    expect_dim(m, 2)?;
    let values = eigenvalues2(m);
    Ok(if with_vectors { EigenSet::with_vectors(m, values) } else { EigenSet::values_only(values) })
}

fn eigenvalues2(m: &SmallMatrix) -> Vec<Complex> {
    let e0 = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let root = quadratic_delta(m).sqrt();
    vec![e0 + root, e0 - root]
}

/// The three Cardano roots `{α₊+α₋−β, ωα₊+ω̄α₋−β, ω̄α₊+ωα₋−β}`.
pub fn eigs3(m: &SmallMatrix, with_vectors: bool) -> Result<EigenSet> {
    expect_dim(m, 3)?;
    let values = eigenvalues3(m);
    Ok(if with_vectors { EigenSet::with_vectors(m, values) } else { EigenSet::values_only(values) })
}

fn eigenvalues3(m: &SmallMatrix) -> Vec<Complex> {
    let (p, q, beta) = depressed(m);
    let roots = cardano(p, q);
    roots.iter().map(|&t| polish(p, q, t) - beta).collect()
}

/// Roots of `t³ + 3p t − 2q = 0`.
fn cardano(p: Complex, q: Complex) -> [Complex; 3] {
    let s = (q * q + p * p * p).sqrt();
    // Take the larger of q ± s so the cube root is not formed from a
    // cancelled difference; the partner follows from α₊α₋ = −p.
    let (plus, minus) = (q + s, q - s);
    let u = if plus.norm_sqr() >= minus.norm_sqr() { plus } else { minus };
    if u == ZERO {
        // p = q = 0: triple root.
        return [ZERO; 3];
    }
    let alpha_plus = u.cbrt();
    let alpha_minus = if p == ZERO { ZERO } else { -p / alpha_plus };
    let omega_bar = OMEGA.conj();
    [
        alpha_plus + alpha_minus,
        OMEGA * alpha_plus + omega_bar * alpha_minus,
        omega_bar * alpha_plus + OMEGA * alpha_minus,
    ]
}

/// Guarded Newton polish on the depressed cubic; a step is kept only if it
/// lowers the residual, so clustered roots are never pushed apart.
fn polish(p: Complex, q: Complex, mut t: Complex) -> Complex {
    let f = |t: Complex| (t * t + 3.0 * p) * t - 2.0 * q;
    let mut ft = f(t);
    for _ in 0..3 {
        let df = 3.0 * (t * t + p);
        if df == ZERO || ft == ZERO {
            break;
        }
        let next = t - ft / df;
        let f_next = f(next);
        // also stops on NaN
        if f_next.norm().partial_cmp(&ft.norm()) != Some(std::cmp::Ordering::Less) {
            break;
        }
        t = next;
        ft = f_next;
    }
    t
}

/// Eigenvalues for either supported dimension.
pub fn eigenvalues(m: &SmallMatrix) -> Vec<Complex> {
    match m.n() {
        2 => eigenvalues2(m),
        _ => eigenvalues3(m),
    }
}

/// Smallest pairwise distance between the given values (`∞` for fewer than two).
pub fn min_gap(values: &[Complex]) -> f64 {
    values.iter().tuple_combinations().map(|(a, b)| (a - b).norm()).fold(f64::INFINITY, f64::min)
}

/// Indices `(i, j)`, `i < j`, of the closest pair of values.
pub fn closest_pair(values: &[Complex]) -> (usize, usize) {
    (0..values.len())
        .tuple_combinations()
        .min_by(|&(a, b), &(c, d)| (values[a] - values[b]).norm().total_cmp(&(values[c] - values[d]).norm()))
        .unwrap_or((0, 1))
}

/// Right/left eigenvector pair for a simple eigenvalue.
///
/// The right vector has unit norm and its largest-magnitude component is
/// real-positive; the left vector satisfies `l† m = λ l†` and `⟨l|r⟩ = 1`.
pub fn eigvec_pair(m: &SmallMatrix, value: Complex) -> Result<(Vec<Complex>, Vec<Complex>)> {
    let values = eigenvalues(m);
    pair_for(m, value, &values)
}

/// As [`eigvec_pair`], reusing an already computed spectrum.
pub(crate) fn pair_for(m: &SmallMatrix, value: Complex, spectrum: &[Complex]) -> Result<(Vec<Complex>, Vec<Complex>)> {
    let scale = m.scale();
    let nearest = (0..spectrum.len())
        .min_by(|&a, &b| (spectrum[a] - value).norm().total_cmp(&(spectrum[b] - value).norm()))
        .expect("non-empty spectrum");
    let distance = (spectrum[nearest] - value).norm();
    if distance > EIGENVALUE_TOL * scale {
        return Err(Error::NotAnEigenvalue { distance });
    }
    let gap = spectrum
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != nearest)
        .map(|(_, v)| (v - value).norm())
        .fold(f64::INFINITY, f64::min);
    if gap <= DEFECT_GAP_TOL * scale {
        return Err(Error::NearDefective { gap, overlap: f64::NAN });
    }

    let adj = m.shifted(value).adjugate();
    let n = m.n();
    let right = (0..n).map(|j| adj.column(j)).max_by(|a, b| norm(a).total_cmp(&norm(b))).unwrap();
    let left: Vec<Complex> = (0..n)
        .map(|i| adj.row(i))
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .unwrap()
        .into_iter()
        .map(|z| z.conj())
        .collect();

    let right = gauge(normalized(right));
    let left = normalized(left);
    let overlap = inner(&left, &right);
    if overlap.norm() < DEFECT_OVERLAP_TOL {
        return Err(Error::NearDefective { gap, overlap: overlap.norm() });
    }
    let inv = overlap.conj().inv();
    let left = left.into_iter().map(|z| z * inv).collect();
    Ok((right, left))
}

fn normalized(v: Vec<Complex>) -> Vec<Complex> {
    let k = norm(&v);
    v.into_iter().map(|z| z / k).collect()
}

/// Rotate so the largest-magnitude component (first on ties) is real-positive.
fn gauge(v: Vec<Complex>) -> Vec<Complex> {
    let mut best = 0;
    for (k, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() * (1.0 + 1e-12) {
            best = k;
        }
    }
    let pivot = v[best];
    if pivot == ZERO {
        return v;
    }
    let phase = pivot.conj() / pivot.norm();
    v.into_iter().map(|z| z * phase).collect()
}

fn expect_dim(m: &SmallMatrix, n: usize) -> Result<()> {
    if m.n() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: n, got: m.n() })
    }
}

/// `H·r − λ·r` residual norm.
pub fn residual(m: &SmallMatrix, value: Complex, right: &[Complex]) -> f64 {
    let hr = m.mul_vec(right);
    norm(&hr.iter().zip(right).map(|(a, b)| a - value * b).collect::<Vec<_>>())
}

#[cfg(test)]
pub(crate) fn unit(n: usize, k: usize) -> Vec<Complex> {
    (0..n).map(|i| if i == k { ONE } else { ZERO }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn r(x: f64) -> Complex {
        c(x, 0.0)
    }

    fn sorted(mut v: Vec<Complex>) -> Vec<Complex> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn paper3(alpha: f64, beta: f64) -> SmallMatrix {
        let d = r(0.4);
        SmallMatrix::from_rows(&[
            [c(alpha - 3.0, -(beta - 1.0)), d, d],
            [d, c(-alpha + 1.0, -(-beta + 3.0)), d],
            [d, d, c(0.0, -2.0)],
        ])
        .unwrap()
    }

    #[test]
    fn eigs2_diagonal() {
        let m = SmallMatrix::diag(&[r(1.0), r(-1.0)]).unwrap();
        let e = eigs2(&m, false).unwrap();
        assert_eq!(e.values, vec![r(1.0), r(-1.0)]);
    }

    #[test]
    fn eigs2_forced_ep_is_degenerate_and_flags_vectors() {
        let i = c(0.0, 1.0);
        let m = SmallMatrix::from_rows(&[[r(1.0), i], [i, r(-1.0)]]).unwrap();
        assert_eq!(discriminant(&m), ZERO);
        let e = eigs2(&m, true).unwrap();
        assert_eq!(e.values, vec![ZERO, ZERO]);
        assert!(e.defective);
        assert!(e.right_vectors.is_none() && e.left_vectors.is_none());
    }

    #[test]
    fn eigs2_quarter_turn() {
        // Δ = e^{iπ/2}
        let m = SmallMatrix::from_rows(&[[ZERO, ONE], [c(0.0, 1.0), ZERO]]).unwrap();
        let e = eigs2(&m, false).unwrap();
        let w = Complex::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert_abs_diff_eq!((e.values[0] - w).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((e.values[1] + w).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn eigs3_diagonal() {
        let m = SmallMatrix::diag(&[r(1.0), r(2.0), r(3.0)]).unwrap();
        let got = sorted(eigs3(&m, false).unwrap().values);
        for (g, w) in got.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!((g - r(w)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn eigs3_symmetry_eigenvalue() {
        // (1,−1,0) is an eigenvector with λ = e₁ − iγ₁ − δ = −1.4 − i.
        let m = paper3(2.0, 2.0);
        assert_eq!(m[(0, 0)], c(-1.0, -1.0));
        let values = eigs3(&m, false).unwrap().values;
        let best = values.iter().map(|v| (v - c(-1.4, -1.0)).norm()).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-14, "{best}");
    }

    #[test]
    fn eigs3_near_the_first_ep() {
        // The degeneracy sits at (1.0415, 1.9480).
        let values = eigs3(&paper3(1.041, 1.948), false).unwrap().values;
        assert!(min_gap(&values) < 1e-1);
        let values = eigs3(&paper3(1.041_483_93, 1.948_002_75), false).unwrap().values;
        assert!(min_gap(&values) < 1e-2);
        // nothing degenerate at the transposed digits
        let values = eigs3(&paper3(1.401, 1.948), false).unwrap().values;
        assert!(min_gap(&values) > 0.5);
    }

    #[test]
    fn char_poly_examples() {
        let id = SmallMatrix::identity(3).unwrap();
        let cp = char_poly(&id).unwrap();
        assert_eq!((cp.a, cp.b, cp.c), (r(-3.0), r(3.0), r(-1.0)));
        let d = SmallMatrix::diag(&[r(1.0), r(2.0), r(3.0)]).unwrap();
        let cp = char_poly(&d).unwrap();
        assert_eq!((cp.a, cp.b, cp.c), (r(-6.0), r(11.0), r(-6.0)));
        assert!(char_poly(&SmallMatrix::identity(2).unwrap()).is_err());
    }

    #[test]
    fn discriminant_examples() {
        let m = SmallMatrix::diag(&[ZERO, ZERO, ONE]).unwrap();
        // zero up to the rounding of the trace shift
        assert!(discriminant3(&m).unwrap().norm() < 1e-16);
        // Π(λᵢ−λⱼ)² = 4 for diag(1,2,3) → D = −4/108
        let m = SmallMatrix::diag(&[r(1.0), r(2.0), r(3.0)]).unwrap();
        let d = discriminant3(&m).unwrap();
        assert_abs_diff_eq!(d.re, -4.0 / 108.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn triple_root_and_zero_p_branches() {
        // nilpotent Jordan block: p = q = 0
        let j = SmallMatrix::from_real_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(eigs3(&j, false).unwrap().values, vec![ZERO; 3]);
        // p = 0, q ≠ 0: cube roots of 8 shifted by 1
        let mut m = j;
        m[(2, 0)] = r(8.0);
        let m = m + SmallMatrix::identity(3).unwrap();
        let got = sorted(eigs3(&m, false).unwrap().values);
        let want = sorted(vec![r(3.0), r(1.0) + OMEGA * 2.0, r(1.0) + OMEGA.conj() * 2.0]);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-14);
        }
    }

    #[test]
    fn eigvec_pair_examples() {
        let d = SmallMatrix::diag(&[r(1.0), r(2.0), r(3.0)]).unwrap();
        let (right, left) = eigvec_pair(&d, r(2.0)).unwrap();
        assert_eq!(right, unit(3, 1));
        assert_eq!(left, unit(3, 1));

        let x = SmallMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let (right, _) = eigvec_pair(&x, ONE).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!((right[0] - r(s)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((right[1] - r(s)).norm(), 0.0, epsilon = 1e-15);

        let m = paper3(0.5, 1.7);
        let values = eigenvalues(&m);
        for &v in &values {
            let (right, left) = eigvec_pair(&m, v).unwrap();
            assert!(residual(&m, v, &right) < 1e-10);
            assert!((inner(&left, &right) - ONE).norm() < 1e-12);
            assert!((norm(&right) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eigvec_pair_errors() {
        let d = SmallMatrix::diag(&[r(1.0), r(2.0), r(3.0)]).unwrap();
        assert!(matches!(eigvec_pair(&d, r(2.5)), Err(Error::NotAnEigenvalue { .. })));
        let dd = SmallMatrix::diag(&[r(1.0), r(1.0), r(3.0)]).unwrap();
        assert!(matches!(eigvec_pair(&dd, r(1.0)), Err(Error::NearDefective { .. })));
        // near an EP of the 2×2 family: gap √(1e-14)·2 = 2e-7 < 1e-6
        let m = SmallMatrix::from_rows(&[[ZERO, ONE], [r(1e-14), ZERO]]).unwrap();
        assert!(matches!(eigvec_pair(&m, r(1e-7)), Err(Error::NearDefective { .. })));
    }

    #[test]
    fn biorthogonality_of_full_set() {
        let m = paper3(0.5, 1.7);
        let e = eigs3(&m, true).unwrap();
        let (rs, ls) = (e.right_vectors.unwrap(), e.left_vectors.unwrap());
        for (i, l) in ls.iter().enumerate() {
            for (j, r) in rs.iter().enumerate() {
                let want = if i == j { ONE } else { ZERO };
                assert!((inner(l, r) - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn block_embedding_matches() {
        let m2 = SmallMatrix::from_rows(&[[c(0.3, -1.0), c(1.0, 0.2)], [c(-0.5, 0.5), c(2.0, 0.0)]]).unwrap();
        let e2 = eigs2(&m2, false).unwrap().values;
        let corner = c(7.0, 1.0);
        let e3 = eigs3(&m2.embed3(corner), false).unwrap().values;
        let mut rest: Vec<_> = e3.into_iter().filter(|v| (v - corner).norm() > 1e-9).collect();
        assert_eq!(rest.len(), 2);
        rest = sorted(rest);
        for (g, w) in rest.iter().zip(sorted(e2)) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    fn arb_matrix3() -> impl Strategy<Value = SmallMatrix> {
        proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 9)
            .prop_map(|v| SmallMatrix::from_flat(&v.into_iter().map(|(a, b)| c(a, b)).collect::<Vec<_>>()).unwrap())
    }

    proptest! {
        #[test]
        fn vieta_and_residuals(m in arb_matrix3()) {
            let s = m.scale();
            let vals = eigs3(&m, false).unwrap().values;
            let sum: Complex = vals.iter().sum();
            let prod: Complex = vals.iter().product();
            prop_assert!((sum - m.trace()).norm() <= 1e-10 * s);
            prop_assert!((prod - m.det()).norm() <= 1e-10 * s.powi(3));
            let cp = char_poly(&m).unwrap();
            for v in vals {
                prop_assert!(cp.eval(v).norm() <= 1e-10 * s.powi(3));
            }
        }

        #[test]
        fn similarity_invariance(m in arb_matrix3(), p in arb_matrix3()) {
            let det = p.det();
            prop_assume!(det.norm() > 0.5);
            let adj = p.adjugate();
            let pinv = SmallMatrix::from_flat(&adj.to_flat().into_iter().map(|z| z / det).collect::<Vec<_>>()).unwrap();
            prop_assume!(pinv.max_norm() < 10.0);
            let sim = p * m * pinv;
            let a = sorted(eigenvalues(&m));
            let b = eigenvalues(&sim);
            // match as multisets
            for v in &a {
                let d = b.iter().map(|w| (v - w).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d <= 1e-8 * m.scale().max(sim.scale()), "{d}");
            }
        }

        #[test]
        fn repeated_eigenvalue_kills_discriminant(
            x in (-2.0f64..2.0, -2.0f64..2.0),
            y in (-2.0f64..2.0, -2.0f64..2.0),
            t in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            // upper-triangular with a repeated diagonal entry
            let (x, y) = (c(x.0, x.1), c(y.0, y.1));
            let m = SmallMatrix::from_rows(&[
                [x, r(t[0]), r(t[1])],
                [ZERO, x, r(t[2])],
                [ZERO, ZERO, y],
            ]).unwrap();
            prop_assert!(discriminant3(&m).unwrap().norm() <= 1e-9 * m.scale().powi(3));
        }
    }
}
