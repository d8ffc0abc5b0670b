//! Library results against independently computed references.

use ep_holonomy::algebra::Direction;
use ep_holonomy::matrix::SmallMatrix;
use ep_holonomy::{char_poly, eigenvalues, eigs2, eigs3, Complex, HamiltonianFamily, Params, SignedPermutation};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Power sums `tr(Mᵏ)` of a dense integer matrix, k = 1..=n.
fn trace_powers(m: &[Vec<i8>]) -> Vec<i64> {
    let n = m.len();
    let a: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
    let mut p = a.clone();
    let mut out = Vec::new();
    for _ in 0..n {
        out.push((0..n).map(|i| p[i][i]).sum());
        p = (0..n).map(|i| (0..n).map(|j| (0..n).map(|l| p[i][l] * a[l][j]).sum()).collect()).collect();
    }
    out
}

fn arb_signed(n: usize) -> impl Strategy<Value = SignedPermutation> {
    (Just((0..n).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(prop::bool::ANY, n)).prop_map(
        |(perm, s)| SignedPermutation::new(perm, s.into_iter().map(|b| if b { 1 } else { -1 }).collect()).unwrap(),
    )
}

proptest! {
    /// The exact spectrum reproduces every power sum of the matrix, which
    /// pins down the eigenvalue multiset (Newton's identities).
    #[test]
    fn spectrum_matches_trace_of_powers(s in (2usize..=6).prop_flat_map(arb_signed)) {
        let spectrum = s.spectrum();
        for (k, expected) in trace_powers(&s.to_matrix()).into_iter().enumerate() {
            let sum: Complex = spectrum.iter().map(|g| g.powu(k as u32 + 1)).sum();
            prop_assert!((sum - c(expected as f64, 0.0)).norm() < 1e-12, "k = {}: {} vs {}", k + 1, sum, expected);
        }
    }

    /// `det(λI − H)` evaluated directly at four points matches the cubic.
    #[test]
    fn char_poly_interpolates_the_determinant(
        entries in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 9),
        probes in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 4),
    ) {
        let m = SmallMatrix::from_flat(&entries.iter().map(|&(a, b)| c(a, b)).collect::<Vec<_>>()).unwrap();
        let poly = char_poly(&m).unwrap();
        for (a, b) in probes {
            let lambda = c(a, b);
            let det = (SmallMatrix::diag(&[lambda; 3]).unwrap() - m).det();
            prop_assert!((poly.eval(lambda) - det).norm() < 1e-10 * (1.0 + det.norm()));
        }
    }

    /// A 2×2 block embedded in 3×3 with a decoupled corner keeps its spectrum.
    #[test]
    fn embedded_block_agrees(
        entries in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4),
        corner in (5.0f64..9.0, -1.0f64..1.0),
    ) {
        let m2 = SmallMatrix::from_flat(&entries.iter().map(|&(a, b)| c(a, b)).collect::<Vec<_>>()).unwrap();
        let corner = c(corner.0, corner.1);
        let three = eigs3(&m2.embed3(corner), false).unwrap().values;
        for v in eigs2(&m2, false).unwrap().values {
            prop_assert!(three.iter().any(|w| (w - v).norm() < 1e-9), "{} missing from {:?}", v, three);
        }
        prop_assert!(three.iter().any(|w| (w - corner).norm() < 1e-9));
    }
}

#[test]
fn tep_eigenvalues_are_cube_roots_of_the_perturbation() {
    let f = HamiltonianFamily::tep_3x3(1.0).unwrap();
    for x in [1e-6, 1e-4, 1e-2, 0.3, 1.0] {
        // λ³ = x at (α, β) = (x, 0)
        let values = eigenvalues(&f.evaluate(Params::new(x, 0.0)));
        let r = x.cbrt();
        for k in 0..3 {
            let want = Complex::from_polar(r, std::f64::consts::TAU * k as f64 / 3.0);
            assert!(values.iter().any(|v| (v - want).norm() < 1e-10), "x = {x}: {want} missing from {values:?}");
        }
    }
}

#[test]
fn signed_generators_match_explicit_matrices() {
    let g = SignedPermutation::generator(3, 0, 2, true, Direction::Negative).unwrap();
    assert_eq!(g.to_matrix(), vec![vec![0, 0, 1], vec![0, 1, 0], vec![-1, 0, 0]]);
    let h = g.compose(&g).unwrap();
    assert_eq!(h.to_matrix(), vec![vec![-1, 0, 0], vec![0, 1, 0], vec![0, 0, -1]]);
}
