//! Acceptance checks, shared by the `acceptance` test target and the CLI's
//! `verify` command.
//!
//! Each check returns a [`CheckOutcome`] that carries its own runtime budget;
//! a check passes only if every assertion holds *and* it finished within
//! budget. Nothing here is randomised at run time: the property batches draw
//! from a fixed-seed ChaCha stream keyed by sample index, so sequential and
//! parallel runs see identical matrices.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{enumerate_orderings, generators_for_pairs, Direction, RootOfUnity, SignedPermutation};
use crate::eigen::{discriminant3, eigenvalues};
use crate::exec::Exec;
use crate::family::{HamiltonianFamily, Params};
use crate::locator::{locate_with, Region};
use crate::matrix::{Complex, SmallMatrix};
use crate::tracker::{track, HolonomySignature, ParameterLoop, TrackOptions, TrackResult};

/// Published EP coordinates of the three-mode model.
pub const PUBLISHED_EPS: [(f64, f64); 3] = [(1.401, 1.948), (2.072, 1.686), (2.959, 2.052)];
/// Per-coordinate tolerance against the published values.
pub const COORDINATE_TOL: f64 = 1e-3;
/// Search window and grid used for the coordinate check.
pub const SEARCH_REGION: ((f64, f64), (f64, f64), (usize, usize)) = ((0.4, 3.5), (1.6, 2.2), (200, 120));

/// Rectangle `(α₀, β₀, α₁, β₁)` enclosing the first two EPs only.
pub const TWO_EP_LOOP: (f64, f64, f64, f64) = (0.9, 1.55, 2.4, 2.05);
/// Rectangle enclosing all three EPs in the search window.
pub const THREE_EP_LOOP: (f64, f64, f64, f64) = (1.0, 1.5, 3.3, 2.25);
/// Samples per segment for the dense-sampling oracle.
pub const ORACLE_SAMPLES: usize = 10_000;

const PROPERTY_SEED: u64 = 0x5eed_0e9f;
const VIETA_COUNT: usize = 100_000;
const DISCRIMINANT_COUNT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Locate,
    Track,
    Properties,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Algebra, Suite::Locate, Suite::Track, Suite::Properties];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Locate => "locate",
            Suite::Track => "track",
            Suite::Properties => "properties",
        }
    }

    /// Criterion ids belonging to this suite.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Algebra => &[6, 7],
            Suite::Locate => &[1],
            Suite::Track => &[2, 3, 4, 5],
            Suite::Properties => &[8],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected one of {})", Suite::ALL.iter().join(", ")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub suite: Suite,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CheckOutcome {
    /// One-line report, e.g. `PASS [6] four-mode algebra (0.000 s / 0.1 s): ...`.
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {} ({:.3} s / {} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64(),
            self.detail
        )
    }
}

type Verdict = std::result::Result<String, String>;

fn timed(id: u8, suite: Suite, name: &'static str, budget_ms: u64, body: impl FnOnce() -> Verdict) -> CheckOutcome {
    let start = Instant::now();
    let verdict = body();
    let elapsed = start.elapsed();
    let budget = Duration::from_millis(budget_ms);
    let (mut passed, mut detail) = match verdict {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if elapsed > budget {
        passed = false;
        detail = format!("over runtime budget; {detail}");
    }
    CheckOutcome { id, suite, name, passed, detail, elapsed, budget }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Run one criterion by id (1–8).
pub fn check(id: u8, exec: Exec) -> Option<CheckOutcome> {
    Some(match id {
        1 => ep_coordinates(&published_eps(), exec),
        2 => single_ep_exchange(),
        3 => two_ep_three_cycle(),
        4 => three_ep_transposition(),
        5 => tep_cyclic_shift(),
        6 => four_mode_algebra(),
        7 => algebra_exhaustiveness(),
        8 => property_suites(exec),
        _ => return None,
    })
}

/// Run every criterion, or only those of `only`.
pub fn run(only: Option<Suite>, exec: Exec) -> Vec<CheckOutcome> {
    (1..=8).filter(|id| only.is_none_or(|s| s.criteria().contains(id))).filter_map(|id| check(id, exec)).collect()
}

pub fn published_eps() -> Vec<Params> {
    PUBLISHED_EPS.iter().map(|&(a, b)| Params::new(a, b)).collect()
}

fn search_region() -> Region {
    let (a, b, g) = SEARCH_REGION;
    Region::new(a, b, g).expect("constant region is valid")
}

fn rectangle(r: (f64, f64, f64, f64), samples: usize) -> ParameterLoop {
    ParameterLoop::rectangle(r.0, r.1, r.2, r.3, samples).expect("constant loop is valid")
}

/// Criterion 1: the locator finds exactly the given EPs in the search window.
pub fn ep_coordinates(expected: &[Params], exec: Exec) -> CheckOutcome {
    let expected = expected.to_vec();
    timed(1, Suite::Locate, "EP coordinates", 10_000, move || {
        let f = HamiltonianFamily::paper_3x3();
        let report = locate_with(&f, &search_region(), exec).map_err(|e| format!("locator error {}", e.name()))?;
        let found = &report.eps;
        let mut problems = Vec::new();
        if found.len() != expected.len() {
            problems.push(format!("found {} EPs, expected {}", found.len(), expected.len()));
        }
        for e in found {
            let tol = 1e-12 * f.evaluate(e.location).scale().powi(3);
            let independent = discriminant3(&f.evaluate(e.location)).map_err(|e| e.to_string())?.norm();
            if independent > tol {
                problems.push(format!("|D| = {independent:.2e} at ({:.6}, {:.6})", e.location.alpha, e.location.beta));
            }
        }
        for p in &expected {
            let hit = found.iter().any(|e| {
                (e.location.alpha - p.alpha).abs() <= COORDINATE_TOL
                    && (e.location.beta - p.beta).abs() <= COORDINATE_TOL
            });
            if !hit {
                let nearest = found
                    .iter()
                    .min_by(|a, b| a.location.distance(p).total_cmp(&b.location.distance(p)))
                    .map(|e| format!("nearest ({:.6}, {:.6})", e.location.alpha, e.location.beta))
                    .unwrap_or_else(|| "none found".into());
                problems.push(format!("no EP within ±{COORDINATE_TOL} of ({}, {}); {nearest}", p.alpha, p.beta));
            }
        }
        let list = found.iter().map(|e| format!("({:.6}, {:.6})", e.location.alpha, e.location.beta)).join(" ");
        if problems.is_empty() {
            Ok(format!("{} EPs: {list}", found.len()))
        } else {
            Err(format!("{}; located {list}", problems.join("; ")))
        }
    })
}

fn tracked(f: &HamiltonianFamily, l: &ParameterLoop) -> std::result::Result<TrackResult, String> {
    track(f, l, TrackOptions::default().with_vectors()).map_err(|e| format!("tracker error {}: {e}", e.name()))
}

/// Criterion 2: one circle around the 2×2 EP swaps the modes; signed order 4.
pub fn single_ep_exchange() -> CheckOutcome {
    timed(2, Suite::Track, "single-EP exchange", 1_000, || {
        let f = HamiltonianFamily::paper_2x2(Complex::new(0.0, 0.0), 1.0).map_err(|e| e.to_string())?;
        let l = ParameterLoop::circle(Params::ORIGIN, 0.5, 64).map_err(|e| e.to_string())?.with_cycles(2);
        let r = tracked(&f, &l)?;
        let first = &r.per_cycle[0];
        ensure(first.permutation == [1, 0], || format!("permutation {:?}, expected swap", first.permutation))?;
        ensure(first.order_permutation == 2, || format!("order_permutation {}", first.order_permutation))?;
        ensure(first.order_signed == Some(4), || format!("order_signed {:?}", first.order_signed))?;
        let second = &r.per_cycle[1];
        ensure(second.permutation == [0, 1] && second.signs.as_deref() == Some(&[-1, -1][..]), || {
            format!("second cycle {:?} {:?}, expected −identity", second.permutation, second.signs)
        })?;
        Ok(format!("permutation {:?}, signed order 4, M² = −1", first.permutation))
    })
}

/// Naive continuation independent of the tracker: `samples` fixed steps per
/// segment, greedy nearest-value matching, no bisection or ambiguity test.
/// Returns the permutation in the tracker's convention.
pub fn dense_oracle_permutation(f: &HamiltonianFamily, l: &ParameterLoop, samples: usize) -> Vec<usize> {
    let base = eigenvalues(&f.evaluate(l.base()));
    let mut base_sorted = base.clone();
    base_sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut current = base_sorted.clone();
    let steps = l.segments() * samples;
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let mut candidates = eigenvalues(&f.evaluate(l.point_at(t)));
        for c in current.iter_mut() {
            let (idx, _) = candidates
                .iter()
                .enumerate()
                .min_by(|a, b| (*a.1 - *c).norm().total_cmp(&(*b.1 - *c).norm()))
                .expect("non-empty");
            *c = candidates.swap_remove(idx);
        }
    }
    current
        .iter()
        .map(|v| {
            base_sorted
                .iter()
                .enumerate()
                .min_by(|a, b| (*a.1 - *v).norm().total_cmp(&(*b.1 - *v).norm()))
                .map(|(i, _)| i)
                .expect("non-empty")
        })
        .collect()
}

fn first_identity_cycle(per_cycle: &[HolonomySignature]) -> Option<usize> {
    per_cycle.iter().position(HolonomySignature::is_identity).map(|i| i + 1)
}

fn first_unsigned_identity(per_cycle: &[HolonomySignature]) -> Option<usize> {
    per_cycle.iter().position(|s| s.permutation.iter().enumerate().all(|(i, &p)| i == p)).map(|i| i + 1)
}

/// Criterion 3: the two-EP loop is a 3-cycle, identity (with signs) after three cycles.
pub fn two_ep_three_cycle() -> CheckOutcome {
    timed(3, Suite::Track, "two-EP three-cycle", 30_000, || {
        let f = HamiltonianFamily::paper_3x3();
        let l = rectangle(TWO_EP_LOOP, 200).with_cycles(3);
        let oracle = dense_oracle_permutation(&f, &l, ORACLE_SAMPLES);
        let r = tracked(&f, &l)?;
        let first = &r.per_cycle[0];
        ensure(first.permutation == oracle, || format!("tracker {:?} vs dense oracle {oracle:?}", first.permutation))?;
        ensure(first.cycle_type() == [3], || format!("cycle type {:?}, expected [3]", first.cycle_type()))?;
        ensure(first.order_signed == Some(3), || format!("order_signed {:?}, expected 3", first.order_signed))?;
        let composed = first.to_signed().pow(3);
        ensure(composed.is_identity(), || format!("M(2)³ = {composed}"))?;
        ensure(first_identity_cycle(&r.per_cycle) == Some(3), || {
            format!("measured identity first after {:?} cycles", first_identity_cycle(&r.per_cycle))
        })?;
        Ok(format!("permutation {:?} (oracle agrees), signed order 3, identity after 3 cycles", first.permutation))
    })
}

/// Criterion 4: the three-EP loop is a transposition; one mode returns after
/// one cycle, two after two; signed order 2 or 4.
pub fn three_ep_transposition() -> CheckOutcome {
    timed(4, Suite::Track, "three-EP transposition", 30_000, || {
        let f = HamiltonianFamily::paper_3x3();
        let l = rectangle(THREE_EP_LOOP, 200).with_cycles(2);
        let oracle = dense_oracle_permutation(&f, &l, ORACLE_SAMPLES);
        let r = tracked(&f, &l)?;
        let first = &r.per_cycle[0];
        ensure(first.permutation == oracle, || format!("tracker {:?} vs dense oracle {oracle:?}", first.permutation))?;
        ensure(first.cycle_type() == [1, 2], || format!("cycle type {:?}, expected [1, 2]", first.cycle_type()))?;
        let once = first.modes_returning_after(1);
        let twice = first.modes_returning_after(2);
        ensure(once.len() == 1 && twice.len() == 2, || format!("after 1: {once:?}, after 2: {twice:?}"))?;
        ensure(matches!(first.order_signed, Some(2 | 4)), || format!("order_signed {:?}", first.order_signed))?;
        ensure(first_unsigned_identity(&r.per_cycle) == Some(2), || "modes not restored after 2 cycles".into())?;
        Ok(format!(
            "permutation {:?}, mode {once:?} after 1 cycle, {twice:?} after 2, signed order {}",
            first.permutation,
            first.order_signed.unwrap_or(0)
        ))
    })
}

/// Criterion 5: a loop around the triple EP is a cyclic shift needing three
/// cycles, against two for the three-EP loop.
pub fn tep_cyclic_shift() -> CheckOutcome {
    timed(5, Suite::Track, "TEP cyclic shift", 5_000, || {
        let tep = HamiltonianFamily::tep_3x3(1.0).map_err(|e| e.to_string())?;
        let l = ParameterLoop::circle(Params::ORIGIN, 0.5, 100).map_err(|e| e.to_string())?.with_cycles(3);
        let r = tracked(&tep, &l)?;
        let first = &r.per_cycle[0];
        ensure(first.cycle_type() == [3], || format!("TEP cycle type {:?}", first.cycle_type()))?;
        let tep_cycles = first_unsigned_identity(&r.per_cycle);
        ensure(tep_cycles == Some(3), || format!("TEP identity after {tep_cycles:?} cycles"))?;

        let f = HamiltonianFamily::paper_3x3();
        let three = tracked(&f, &rectangle(THREE_EP_LOOP, 200).with_cycles(3))?;
        let three_cycles = first_unsigned_identity(&three.per_cycle);
        ensure(three_cycles == Some(2), || format!("three-EP identity after {three_cycles:?} cycles"))?;
        Ok(format!("TEP restores after 3 cycles, three separate EPs after {}", three_cycles.unwrap_or(0)))
    })
}

/// Criterion 6: every ordering of `M₀₁, M₁₂, M₂₃` on four modes has order 4.
pub fn four_mode_algebra() -> CheckOutcome {
    timed(6, Suite::Algebra, "four-mode algebra", 100, || {
        let gens = generators_for_pairs(4, &[(0, 1), (1, 2), (2, 3)]).map_err(|e| e.to_string())?;
        let all = enumerate_orderings(&gens).map_err(|e| e.to_string())?;
        ensure(all.len() == 6, || format!("{} orderings", all.len()))?;
        for o in &all {
            ensure(o.order == 4, || format!("ordering {:?}: order {}", o.ordering, o.order))?;
            ensure(o.product.pow(4).is_identity() && !o.product.pow(2).is_identity(), || {
                format!("ordering {:?}: powers disagree with order", o.ordering)
            })?;
            ensure(o.product.spectrum_exact().iter().all(|g| g.satisfies_power_one(4)), || {
                format!("ordering {:?}: spectrum not fourth roots", o.ordering)
            })?;
        }
        Ok("6 orderings, all order 4".into())
    })
}

fn with_directions(pairs: &[(usize, usize)], dirs: &[Direction]) -> Vec<SignedPermutation> {
    pairs
        .iter()
        .zip(dirs)
        .map(|(&(i, j), &d)| SignedPermutation::generator(3, i.min(j), i.max(j), true, d).expect("valid pair"))
        .collect()
}

/// Criterion 7: two-exchange products have spectrum {1, ω, ω̄}, three-exchange
/// products square to ±1, and neighbouring exchanges do not commute.
pub fn algebra_exhaustiveness() -> CheckOutcome {
    timed(7, Suite::Algebra, "algebra exhaustiveness", 100, || {
        let pairs = [(0, 1), (1, 2), (0, 2)];
        let gens = generators_for_pairs(3, &pairs).map_err(|e| e.to_string())?;
        let cube_roots = vec![RootOfUnity::new(0, 1), RootOfUnity::new(1, 3), RootOfUnity::new(2, 3)];
        let directions = [Direction::Positive, Direction::Negative];

        let mut two = 0;
        for (a, b) in (0..3).permutations(2).map(|v| (v[0], v[1])) {
            let product = gens[a].compose(&gens[b]).map_err(|e| e.to_string())?;
            two += 1;
            ensure(product.spectrum_exact() == cube_roots, || {
                format!("M{a}M{b} spectrum {:?}", product.spectrum_exact())
            })?;
            ensure(product.order() == 3, || format!("M{a}M{b} order {}", product.order()))?;
            for (da, db) in directions.iter().cartesian_product(&directions) {
                let s = with_directions(&[pairs[a], pairs[b]], &[*da, *db]);
                let signed = s[0].compose(&s[1]).map_err(|e| e.to_string())?;
                ensure(signed.order() == 3, || format!("signed M{a}M{b} order {}", signed.order()))?;
            }
        }

        let all = enumerate_orderings(&gens).map_err(|e| e.to_string())?;
        for o in &all {
            ensure(o.product.spectrum_exact().iter().all(|g| g.satisfies_power_one(2)), || {
                format!("ordering {:?}: spectrum {:?} not ±1", o.ordering, o.product.spectrum_exact())
            })?;
            ensure(o.order <= 2, || format!("ordering {:?}: order {}", o.ordering, o.order))?;
        }
        for dirs in (0..3).map(|_| directions).multi_cartesian_product() {
            let s = with_directions(&pairs, &dirs);
            for o in enumerate_orderings(&s).map_err(|e| e.to_string())? {
                ensure(matches!(o.order, 2 | 4), || format!("signed ordering {:?}: order {}", o.ordering, o.order))?;
            }
        }

        let commute = gens[0].commutes_with(&gens[1]).map_err(|e| e.to_string())?;
        ensure(!commute, || "M₀₁ and M₁₂ commute".into())?;
        Ok(format!(
            "{two} two-exchange products in {{1, ω, ω̄}}, {} three-exchange products with γ² = 1, [M₀₁, M₁₂] ≠ 0",
            all.len()
        ))
    })
}

/// Criterion 8: solver and tracker property batteries.
pub fn property_suites(exec: Exec) -> CheckOutcome {
    timed(8, Suite::Properties, "property suites", 60_000, || {
        let parts: [(&str, Verdict); 7] = [
            ("vieta", vieta_batch(VIETA_COUNT, exec)),
            ("discriminant", discriminant_batch(DISCRIMINANT_COUNT, exec)),
            ("homotopy", homotopy_invariance()),
            ("doubling", discretization_doubling()),
            ("orientation", orientation_inversion()),
            ("no-EP", no_ep_identity()),
            ("multi-cycle", multi_cycle_consistency()),
        ];
        let failed: Vec<String> =
            parts.iter().filter_map(|(n, v)| v.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
        if failed.is_empty() {
            Ok(parts.iter().map(|(n, v)| format!("{n}: {}", v.as_ref().expect("checked"))).join("; "))
        } else {
            Err(failed.join("; "))
        }
    })
}

/// Matrix `index` of the property stream: complex entries uniform in the
/// unit square, times a magnitude in [10⁻², 10²].
pub fn random_matrix(index: usize) -> SmallMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(PROPERTY_SEED);
    rng.set_stream(index as u64);
    let magnitude = 10f64.powf(rng.gen_range(-2.0..2.0));
    let entries: Vec<Complex> =
        (0..9).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * magnitude).collect();
    SmallMatrix::from_flat(&entries).expect("nine finite entries")
}

/// `(a, b, c)` of `det(λI − m) = λ³ + aλ² + bλ + c`, by cofactor expansion.
fn cubic_coefficients(m: &SmallMatrix) -> [Complex; 3] {
    let e = |i: usize, j: usize| m[(i, j)];
    let trace = e(0, 0) + e(1, 1) + e(2, 2);
    let minors = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0) + e(1, 1) * e(2, 2)
        - e(1, 2) * e(2, 1);
    let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    [-trace, minors, -det]
}

/// Vieta identities and root residuals of the closed-form solver.
pub fn vieta_batch(count: usize, exec: Exec) -> Verdict {
    let failures = exec.map(count, |k| {
        let m = random_matrix(k);
        let s = m.scale();
        let [a, b, c] = cubic_coefficients(&m);
        let l = eigenvalues(&m);
        let sum = l[0] + l[1] + l[2];
        let pairs = l[0] * l[1] + l[0] * l[2] + l[1] * l[2];
        let prod = l[0] * l[1] * l[2];
        let tol = 1e-10;
        let ok = (sum + a).norm() <= tol * s
            && (pairs - b).norm() <= tol * s * s
            && (prod + c).norm() <= tol * s.powi(3)
            && l.iter().all(|&x| (((x + a) * x + b) * x + c).norm() <= tol * s.powi(3));
        (!ok).then_some(k)
    });
    let bad: Vec<usize> = failures.into_iter().flatten().collect();
    if bad.is_empty() {
        Ok(format!("{count} matrices"))
    } else {
        Err(format!("{} of {count} matrices violate Vieta/residual bounds (first index {})", bad.len(), bad[0]))
    }
}

/// Roots of a monic cubic by Durand–Kerner iteration.
fn durand_kerner(coeffs: [Complex; 3]) -> [Complex; 3] {
    let [a, b, c] = coeffs;
    let p = |x: Complex| ((x + a) * x + b) * x + c;
    let radius = 1.0 + a.norm().max(b.norm()).max(c.norm());
    let seed = Complex::new(0.4, 0.9);
    let mut z = [seed * radius, seed * seed * radius, seed * seed * seed * radius];
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..3 {
            let denom: Complex = (0..3).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
            if denom.norm() == 0.0 {
                continue;
            }
            let step = p(z[i]) / denom;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved <= 1e-15 * radius {
            break;
        }
    }
    z
}

/// `D` against `−1/108 · Π(λᵢ − λⱼ)²` with roots from an independent solver.
pub fn discriminant_batch(count: usize, exec: Exec) -> Verdict {
    let failures = exec.map(count, |k| {
        let m = random_matrix(VIETA_COUNT + k);
        let r = durand_kerner(cubic_coefficients(&m));
        let product = ((r[0] - r[1]) * (r[1] - r[2]) * (r[2] - r[0])).powi(2);
        let d = discriminant3(&m).expect("3×3");
        let ok = (product + 108.0 * d).norm() <= 1e-9 * m.scale().powi(6);
        (!ok).then_some(k)
    });
    let bad: Vec<usize> = failures.into_iter().flatten().collect();
    if bad.is_empty() {
        Ok(format!("{count} matrices"))
    } else {
        Err(format!("{} of {count} matrices disagree (first index {})", bad.len(), bad[0]))
    }
}

fn polyline(vertices: &[(f64, f64)], samples: usize) -> ParameterLoop {
    ParameterLoop::polyline(vertices.iter().map(|&(a, b)| Params::new(a, b)).collect(), samples)
        .expect("constant loop is valid")
}

/// Three loops per EP subset, all starting from the subset's base point.
/// Each entry: (label, expected cycle type, loops).
fn homotopy_families() -> Vec<(&'static str, Vec<usize>, Vec<ParameterLoop>)> {
    vec![
        (
            "none",
            vec![1, 1, 1],
            vec![
                polyline(&[(0.45, 1.65), (0.9, 1.65), (0.9, 2.15), (0.45, 2.15)], 100),
                polyline(&[(0.45, 1.65), (0.85, 1.8), (0.5, 2.1)], 100),
                polyline(&[(0.45, 1.65), (0.8, 1.7), (0.9, 1.95), (0.7, 2.15), (0.42, 2.0)], 100),
            ],
        ),
        (
            "first",
            vec![1, 2],
            vec![
                polyline(&[(0.8, 1.75), (1.3, 1.75), (1.3, 2.15), (0.8, 2.15)], 100),
                polyline(&[(0.8, 1.75), (1.4, 1.8), (0.9, 2.2)], 100),
                polyline(&[(0.8, 1.75), (1.2, 1.7), (1.35, 1.95), (1.1, 2.2), (0.75, 2.05)], 100),
            ],
        ),
        (
            "first two",
            vec![3],
            vec![
                polyline(&[(0.9, 1.55), (2.4, 1.55), (2.4, 2.05), (0.9, 2.05)], 200),
                polyline(&[(0.9, 1.55), (2.5, 1.5), (2.2, 2.1), (0.85, 2.15)], 200),
                polyline(&[(0.9, 1.55), (1.6, 1.45), (2.45, 1.6), (2.35, 2.0), (1.6, 2.2), (0.8, 2.05)], 200),
            ],
        ),
        (
            "all three",
            vec![1, 2],
            vec![
                polyline(&[(1.0, 1.5), (3.3, 1.5), (3.3, 2.25), (1.0, 2.25)], 200),
                polyline(&[(1.0, 1.5), (3.2, 1.55), (3.25, 2.2), (0.95, 2.2)], 200),
                polyline(&[(1.0, 1.5), (2.0, 1.45), (3.1, 1.7), (3.3, 2.15), (2.2, 2.25), (0.9, 2.1)], 200),
            ],
        ),
    ]
}

fn model_eps() -> std::result::Result<Vec<Params>, String> {
    let f = HamiltonianFamily::paper_3x3();
    let wide = Region::new((0.0, 4.0), (1.2, 2.8), (160, 80)).map_err(|e| e.to_string())?;
    Ok(locate_with(&f, &wide, Exec::default()).map_err(|e| e.to_string())?.eps.iter().map(|e| e.location).collect())
}

/// Loops enclosing the same EP subset give the same cycle type.
pub fn homotopy_invariance() -> Verdict {
    let f = HamiltonianFamily::paper_3x3();
    let eps = model_eps()?;
    let mut checked = 0;
    for (label, expected, loops) in homotopy_families() {
        let reference: Vec<i32> = eps.iter().map(|&p| loops[0].winding_number(p)).collect();
        for (k, l) in loops.iter().enumerate() {
            let winding: Vec<i32> = eps.iter().map(|&p| l.winding_number(p)).collect();
            ensure(winding == reference, || format!("{label} loop {k} encloses {winding:?}, loop 0 {reference:?}"))?;
            let r = tracked(&f, l)?;
            let ct = r.per_cycle[0].cycle_type();
            ensure(ct == expected, || format!("{label} loop {k}: cycle type {ct:?}, expected {expected:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} loops over 4 EP subsets"))
}

fn test_loops() -> Vec<(&'static str, HamiltonianFamily, ParameterLoop)> {
    let p3 = HamiltonianFamily::paper_3x3();
    let p2 = HamiltonianFamily::paper_2x2(Complex::new(0.0, 0.0), 1.0).expect("valid");
    let tep = HamiltonianFamily::tep_3x3(1.0).expect("valid");
    vec![
        ("single EP", p2, ParameterLoop::circle(Params::ORIGIN, 0.5, 32).expect("valid")),
        ("two EPs", p3.clone(), rectangle(TWO_EP_LOOP, 100)),
        ("three EPs", p3, rectangle(THREE_EP_LOOP, 100)),
        ("TEP", tep, ParameterLoop::circle(Params::ORIGIN, 0.5, 50).expect("valid")),
    ]
}

/// Doubling the sampling density leaves the signed signature unchanged.
pub fn discretization_doubling() -> Verdict {
    for (label, f, l) in test_loops() {
        let coarse = tracked(&f, &l)?;
        let fine = tracked(&f, &l.clone().with_samples(2 * l.samples_per_segment))?;
        ensure(coarse.per_cycle[0] == fine.per_cycle[0], || {
            format!("{label}: {:?} vs {:?}", coarse.per_cycle[0], fine.per_cycle[0])
        })?;
    }
    Ok("4 loops stable under doubling".into())
}

/// Reversing a loop inverts the permutation and keeps both orders.
pub fn orientation_inversion() -> Verdict {
    for (label, f, l) in test_loops() {
        let fwd = tracked(&f, &l)?.per_cycle[0].clone();
        let back = tracked(&f, &l.reversed())?.per_cycle[0].clone();
        let inverse = fwd.to_signed().unsigned_part().inverse();
        ensure(back.permutation == inverse.permutation(), || {
            format!("{label}: reversed {:?}, inverse of {:?}", back.permutation, fwd.permutation)
        })?;
        ensure(back.order_permutation == fwd.order_permutation && back.order_signed == fwd.order_signed, || {
            format!(
                "{label}: orders {}/{:?} vs {}/{:?}",
                fwd.order_permutation, fwd.order_signed, back.order_permutation, back.order_signed
            )
        })?;
    }
    Ok("4 loops invert".into())
}

/// A loop enclosing no EP returns every mode with sign +1.
pub fn no_ep_identity() -> Verdict {
    let f = HamiltonianFamily::paper_3x3();
    for (k, l) in homotopy_families()[0].2.iter().enumerate() {
        let s = &tracked(&f, l)?.per_cycle[0];
        ensure(s.is_identity() && s.signs.as_ref().is_some_and(|v| v.iter().all(|&x| x == 1)), || {
            format!("loop {k}: {:?} {:?}", s.permutation, s.signs)
        })?;
    }
    Ok("identity with all signs +1".into())
}

/// Tracking `k` cycles equals the `k`-th power of the one-cycle signature, `k ≤ 6`.
pub fn multi_cycle_consistency() -> Verdict {
    for (label, f, l) in test_loops() {
        let r = tracked(&f, &l.clone().with_cycles(6))?;
        let first = &r.per_cycle[0];
        for (k, measured) in r.per_cycle.iter().enumerate() {
            let predicted = first.power(k + 1);
            ensure(*measured == predicted, || format!("{label} cycle {}: {measured:?} vs {predicted:?}", k + 1))?;
        }
    }
    Ok("6 cycles match powers on 4 loops".into())
}
