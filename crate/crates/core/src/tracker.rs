//! Continuation of eigenvalue branches around closed parameter loops.
//!
//! Consecutive samples are matched by the cheapest of the `n!` assignments
//! (total absolute distance). A step is accepted only when that cost is
//! below `0.3 ×` the smallest eigenvalue gap at the earlier sample;
//! otherwise the step is bisected, up to 24 levels deep. Running out of
//! depth means the path effectively touches an EP.
//!
//! With vector tracking, right/left pairs are transported by fixing the
//! phase of each new right vector so that `⟨l_prev|r_next⟩` is real and
//! positive. After a full cycle mode `i` arrives on base mode `P(i)` as
//! `cᵢ·r_{P(i)}`. The individual `cᵢ` depend on the base-point frame but
//! the product of the `cᵢ` around each cycle of `P` does not; its sign is
//! the measured geometric-phase sign of that cycle. Signs are reported in
//! canonical form: the cycle's sign on its smallest row, +1 elsewhere.

use std::f64::consts::TAU;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::algebra::SignedPermutation;
use crate::eigen::{eigenvalues, min_gap, pair_for};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::family::{HamiltonianFamily, Params};
use crate::locator::{locate_with, Region};
use crate::matrix::{inner, Complex};

pub const AMBIGUITY_RATIO: f64 = 0.3;
pub const MAX_BISECTION_DEPTH: usize = 24;
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoopShape {
    /// Implicitly closed polyline through the vertices.
    Polyline(Vec<Params>),
    Circle {
        center: Params,
        radius: f64,
    },
}

/// A closed loop in the `(α, β)` plane.
///
/// `Positive` orientation walks a polyline in vertex order and a circle
/// counter-clockwise; `Negative` walks the same curve backwards from the same
/// base point. The base point is the first vertex, or `center + (radius, 0)`.
/// A circle counts as four quarter-arc segments for sampling purposes.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterLoop {
    pub shape: LoopShape,
    pub samples_per_segment: usize,
    pub orientation: Orientation,
    pub cycles: usize,
}

impl ParameterLoop {
    pub fn polyline(vertices: Vec<Params>, samples_per_segment: usize) -> Result<Self> {
        let l = ParameterLoop {
            shape: LoopShape::Polyline(vertices),
            samples_per_segment,
            orientation: Orientation::Positive,
            cycles: 1,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn circle(center: Params, radius: f64, samples_per_segment: usize) -> Result<Self> {
        let l = ParameterLoop {
            shape: LoopShape::Circle { center, radius },
            samples_per_segment,
            orientation: Orientation::Positive,
            cycles: 1,
        };
        l.validate()?;
        Ok(l)
    }

    /// Counter-clockwise rectangle starting at `(a0, b0)`.
    pub fn rectangle(a0: f64, b0: f64, a1: f64, b1: f64, samples_per_segment: usize) -> Result<Self> {
        Self::polyline(
            vec![Params::new(a0, b0), Params::new(a1, b0), Params::new(a1, b1), Params::new(a0, b1)],
            samples_per_segment,
        )
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_cycles(mut self, cycles: usize) -> Self {
        self.cycles = cycles;
        self
    }

    pub fn with_samples(mut self, samples_per_segment: usize) -> Self {
        self.samples_per_segment = samples_per_segment;
        self
    }

    pub fn reversed(&self) -> Self {
        self.clone().with_orientation(self.orientation.flipped())
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            LoopShape::Polyline(v) => {
                if v.len() < 3 {
                    return Err(Error::InvalidLoop(format!("polyline needs at least 3 vertices, got {}", v.len())));
                }
                if !v.iter().all(Params::is_finite) {
                    return Err(Error::InvalidLoop("vertices must be finite".into()));
                }
            }
            LoopShape::Circle { center, radius } => {
                if !(center.is_finite() && radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidLoop(format!(
                        "circle needs a finite centre and radius > 0, got {radius}"
                    )));
                }
            }
        }
        if self.samples_per_segment == 0 {
            return Err(Error::InvalidLoop("samples_per_segment must be positive".into()));
        }
        if self.cycles == 0 {
            return Err(Error::InvalidLoop("cycles must be positive".into()));
        }
        Ok(())
    }

    pub fn segments(&self) -> usize {
        match &self.shape {
            LoopShape::Polyline(v) => v.len(),
            LoopShape::Circle { .. } => 4,
        }
    }

    /// Vertices in traversal order.
    fn ordered_vertices(&self) -> Vec<Params> {
        match &self.shape {
            LoopShape::Polyline(v) => match self.orientation {
                Orientation::Positive => v.clone(),
                Orientation::Negative => std::iter::once(v[0]).chain(v[1..].iter().rev().copied()).collect(),
            },
            LoopShape::Circle { .. } => vec![],
        }
    }

    pub fn base(&self) -> Params {
        self.point_at(0.0)
    }

    /// Position at loop fraction `t ∈ [0, 1]`; `t = 0` and `t = 1` both give
    /// the base point exactly.
    pub fn point_at(&self, t: f64) -> Params {
        match &self.shape {
            LoopShape::Circle { center, radius } => {
                if t <= 0.0 || t >= 1.0 {
                    return Params::new(center.alpha + radius, center.beta);
                }
                let sign = if self.orientation == Orientation::Positive { 1.0 } else { -1.0 };
                let theta = sign * TAU * t;
                Params::new(center.alpha + radius * theta.cos(), center.beta + radius * theta.sin())
            }
            LoopShape::Polyline(_) => {
                let v = self.ordered_vertices();
                if t <= 0.0 || t >= 1.0 {
                    return v[0];
                }
                let k = v.len();
                let s = t * k as f64;
                let seg = (s.floor() as usize).min(k - 1);
                v[seg].lerp(&v[(seg + 1) % k], s - seg as f64)
            }
        }
    }

    /// Euclidean distance from `p` to the loop curve.
    pub fn distance_to(&self, p: Params) -> f64 {
        match &self.shape {
            LoopShape::Circle { center, radius } => (center.distance(&p) - radius).abs(),
            LoopShape::Polyline(v) => {
                (0..v.len()).map(|k| segment_distance(v[k], v[(k + 1) % v.len()], p)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Winding number of the traversed loop around `p` (positive = counter-clockwise).
    pub fn winding_number(&self, p: Params) -> i32 {
        let n = 4096 * self.segments();
        let mut total = 0.0;
        let mut prev = self.point_at(0.0);
        for k in 1..=n {
            let next = self.point_at(k as f64 / n as f64);
            let a = (prev.beta - p.beta).atan2(prev.alpha - p.alpha);
            let b = (next.beta - p.beta).atan2(next.alpha - p.alpha);
            let mut d = b - a;
            if d > std::f64::consts::PI {
                d -= TAU;
            } else if d < -std::f64::consts::PI {
                d += TAU;
            }
            total += d;
            prev = next;
        }
        (total / TAU).round() as i32
    }

    /// `(alpha_min, alpha_max, beta_min, beta_max)`
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match &self.shape {
            LoopShape::Circle { center, radius } => {
                (center.alpha - radius, center.alpha + radius, center.beta - radius, center.beta + radius)
            }
            LoopShape::Polyline(v) => v
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |(a0, a1, b0, b1), p| {
                    (a0.min(p.alpha), a1.max(p.alpha), b0.min(p.beta), b1.max(p.beta))
                }),
        }
    }
}

fn segment_distance(a: Params, b: Params, p: Params) -> f64 {
    let (dx, dy) = (b.alpha - a.alpha, b.beta - a.beta);
    let len2 = dx * dx + dy * dy;
    let t =
        if len2 == 0.0 { 0.0 } else { (((p.alpha - a.alpha) * dx + (p.beta - a.beta) * dy) / len2).clamp(0.0, 1.0) };
    a.lerp(&b, t).distance(&p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    pub track_vectors: bool,
    /// Run the EP pre-scan over the loop's bounding box.
    pub check_exclusion: bool,
    pub exclusion_radius: f64,
    pub max_depth: usize,
    pub ambiguity_ratio: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            track_vectors: false,
            check_exclusion: true,
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
            max_depth: MAX_BISECTION_DEPTH,
            ambiguity_ratio: AMBIGUITY_RATIO,
        }
    }
}

impl TrackOptions {
    pub fn with_vectors(mut self) -> Self {
        self.track_vectors = true;
        self
    }

    pub fn without_exclusion_check(mut self) -> Self {
        self.check_exclusion = false;
        self
    }
}

/// Measured holonomy after some number of cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolonomySignature {
    /// `permutation[i]` is the base mode that mode `i` arrives on.
    pub permutation: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
    pub order_permutation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_signed: Option<usize>,
}

impl HolonomySignature {
    pub fn new(permutation: Vec<usize>, signs: Option<Vec<i8>>) -> Result<Self> {
        let n = permutation.len();
        let s = SignedPermutation::new(permutation.clone(), signs.clone().unwrap_or_else(|| vec![1; n]))?;
        Ok(HolonomySignature {
            permutation,
            order_permutation: s.order_unsigned(),
            order_signed: signs.as_ref().map(|_| s.order()),
            signs,
        })
    }

    pub fn from_signed(s: &SignedPermutation, with_signs: bool) -> Self {
        HolonomySignature {
            permutation: s.permutation().to_vec(),
            signs: with_signs.then(|| s.signs().to_vec()),
            order_permutation: s.order_unsigned(),
            order_signed: with_signs.then(|| s.order()),
        }
    }

    /// Signed permutation (all +1 when no signs were measured).
    pub fn to_signed(&self) -> SignedPermutation {
        let n = self.permutation.len();
        SignedPermutation::new(self.permutation.clone(), self.signs.clone().unwrap_or_else(|| vec![1; n]))
            .expect("validated on construction")
    }

    /// `k`-fold repetition, in canonical sign form.
    pub fn power(&self, k: usize) -> HolonomySignature {
        Self::from_signed(&self.to_signed().pow(k).canonical(), self.signs.is_some())
    }

    pub fn is_identity(&self) -> bool {
        self.to_signed().is_identity()
    }

    /// Cycle lengths, sorted.
    pub fn cycle_type(&self) -> Vec<usize> {
        self.to_signed().cycles().iter().map(|c| c.elements.len()).sorted().collect()
    }

    /// Modes that return to themselves after exactly `k` cycles (and not before).
    pub fn modes_returning_after(&self, k: usize) -> Vec<usize> {
        let s = self.to_signed();
        s.cycles().into_iter().filter(|c| c.elements.len() == k).flat_map(|c| c.elements).sorted().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub params: Params,
    pub eigs: Vec<Complex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    /// Accepted samples in traversal order, base point first; the eigenvalue
    /// at position `i` belongs to the branch that started as base mode `i`.
    pub samples: Vec<TrackSample>,
    pub permutation: Vec<usize>,
    pub signs: Option<Vec<i8>>,
    /// Raw transported overlaps `cᵢ` after the first cycle (frame-dependent).
    pub phases: Option<Vec<Complex>>,
    pub refinements: usize,
    /// Cumulative signature after 1, 2, …, `cycles` cycles.
    pub per_cycle: Vec<HolonomySignature>,
}

impl TrackResult {
    pub fn n(&self) -> usize {
        self.permutation.len()
    }
}

/// Eigenvalues (and optionally transported vector pairs) carried along a path.
#[derive(Debug, Clone)]
struct Branches {
    values: Vec<Complex>,
    pairs: Option<Vec<(Vec<Complex>, Vec<Complex>)>>,
}

/// Cheapest assignment `σ` (state mode `i` → candidate `σ[i]`) and its cost.
pub fn best_assignment(from: &[Complex], to: &[Complex]) -> (Vec<usize>, f64) {
    (0..to.len())
        .permutations(to.len())
        .map(|sigma| {
            let cost = from.iter().zip(&sigma).map(|(a, &s)| (a - to[s]).norm()).sum::<f64>();
            (sigma, cost)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one assignment")
}

struct Continuation<'a, P: Fn(f64) -> Params> {
    family: &'a HamiltonianFamily,
    path: P,
    opts: TrackOptions,
    refinements: usize,
    samples: Vec<TrackSample>,
    record: bool,
}

impl<P: Fn(f64) -> Params> Continuation<'_, P> {
    /// Try to move `state` to `p` in one step; `None` when the match is ambiguous.
    fn try_step(&self, state: &Branches, p: Params) -> Result<Option<Branches>> {
        let m = self.family.evaluate(p);
        let candidates = eigenvalues(&m);
        let (sigma, cost) = best_assignment(&state.values, &candidates);
        let threshold = self.opts.ambiguity_ratio * min_gap(&state.values);
        if !(cost < threshold || cost == 0.0) {
            return Ok(None);
        }
        let values: Vec<Complex> = sigma.iter().map(|&s| candidates[s]).collect();
        let pairs = match &state.pairs {
            None => None,
            Some(prev) => {
                let mut next = Vec::with_capacity(values.len());
                for (k, &v) in values.iter().enumerate() {
                    let (r, l) = pair_for(&m, v, &candidates)?;
                    let z = inner(&prev[k].1, &r);
                    let phase = if z.norm() > 0.0 { z.conj() / z.norm() } else { Complex::new(1.0, 0.0) };
                    next.push((r.iter().map(|x| x * phase).collect(), l.iter().map(|x| x * phase).collect()));
                }
                Some(next)
            }
        };
        Ok(Some(Branches { values, pairs }))
    }

    fn advance(&mut self, state: &mut Branches, t0: f64, t1: f64, depth: usize) -> Result<()> {
        let p1 = (self.path)(t1);
        if let Some(next) = self.try_step(state, p1)? {
            *state = next;
            if self.record {
                self.samples.push(TrackSample { params: p1, eigs: state.values.clone() });
            }
            return Ok(());
        }
        if depth >= self.opts.max_depth {
            return Err(Error::AmbiguousMatching { t: t0, depth });
        }
        self.refinements += 1;
        let mid = 0.5 * (t0 + t1);
        self.advance(state, t0, mid, depth + 1)?;
        self.advance(state, mid, t1, depth + 1)
    }
}

fn sort_by_real(values: &mut [Complex]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Branches at the base point in reference order (ascending real part).
fn base_branches(f: &HamiltonianFamily, base: Params, vectors: bool) -> Result<Branches> {
    let m = f.evaluate(base);
    let mut values = eigenvalues(&m);
    sort_by_real(&mut values);
    let pairs = if vectors {
        Some(values.iter().map(|&v| pair_for(&m, v, &values)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    Ok(Branches { values, pairs })
}

/// Fail with `LoopTooCloseToEP` if a pre-scan of the loop's neighbourhood
/// finds an EP within `radius` of the curve.
pub fn check_exclusion(f: &HamiltonianFamily, l: &ParameterLoop, radius: f64) -> Result<()> {
    let (a0, a1, b0, b1) = l.bounding_box();
    let pad_a = 0.25 * (a1 - a0) + 4.0 * radius;
    let pad_b = 0.25 * (b1 - b0) + 4.0 * radius;
    let region = Region::new((a0 - pad_a, a1 + pad_a), (b0 - pad_b, b1 + pad_b), (64, 64))?;
    for ep in locate_with(f, &region, Exec::default())?.eps {
        let distance = l.distance_to(ep.location);
        if distance < radius {
            return Err(Error::LoopTooCloseToEP { alpha: ep.location.alpha, beta: ep.location.beta, distance });
        }
    }
    Ok(())
}

/// Continue all branches around `l` for `l.cycles` cycles.
pub fn track(f: &HamiltonianFamily, l: &ParameterLoop, opts: TrackOptions) -> Result<TrackResult> {
    l.validate()?;
    if opts.check_exclusion {
        check_exclusion(f, l, opts.exclusion_radius)?;
    }
    let base = l.base();
    let start = base_branches(f, base, opts.track_vectors)?;
    let mut engine = Continuation {
        family: f,
        path: |t: f64| l.point_at(t),
        opts,
        refinements: 0,
        samples: vec![TrackSample { params: base, eigs: start.values.clone() }],
        record: true,
    };
    let steps = l.segments() * l.samples_per_segment;
    let mut state = start.clone();
    let mut per_cycle = Vec::with_capacity(l.cycles);
    let mut first_phases = None;
    for cycle in 0..l.cycles {
        for k in 0..steps {
            let t0 = k as f64 / steps as f64;
            let t1 = if k + 1 == steps { 1.0 } else { (k + 1) as f64 / steps as f64 };
            engine.advance(&mut state, t0, t1, 0)?;
        }
        let (signature, phases) = measure(&start, &state)?;
        if cycle == 0 {
            first_phases = phases;
        }
        per_cycle.push(signature);
    }
    let first = per_cycle[0].clone();
    Ok(TrackResult {
        samples: engine.samples,
        permutation: first.permutation,
        signs: first.signs,
        phases: first_phases,
        refinements: engine.refinements,
        per_cycle,
    })
}

/// Compare the transported branches with the base frame.
fn measure(start: &Branches, now: &Branches) -> Result<(HolonomySignature, Option<Vec<Complex>>)> {
    let (permutation, _) = best_assignment(&now.values, &start.values);
    let n = permutation.len();
    let (signs, phases) = match (&start.pairs, &now.pairs) {
        (Some(base), Some(cur)) => {
            let phases: Vec<Complex> = (0..n).map(|i| inner(&base[permutation[i]].1, &cur[i].0)).collect();
            let unsigned = SignedPermutation::unsigned(permutation.clone())?;
            let mut signs = vec![1i8; n];
            for cycle in unsigned.cycles() {
                let product: Complex = cycle.elements.iter().map(|&i| phases[i]).product();
                signs[cycle.elements[0]] = if product.re < 0.0 { -1 } else { 1 };
            }
            (Some(signs), Some(phases))
        }
        _ => (None, None),
    };
    Ok((HolonomySignature::new(permutation, signs)?, phases))
}

/// Signature of the first cycle of a tracking run.
pub fn holonomy_of(t: &TrackResult) -> HolonomySignature {
    HolonomySignature::new(t.permutation.clone(), t.signs.clone()).expect("tracker produces bijections")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SheetRow {
    pub params: Params,
    pub values: Vec<Complex>,
    /// Set when the row's scanline fell back to sort-by-real-part.
    pub flagged: bool,
}

/// Continued eigenvalues over a grid, scanline by scanline.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetGrid {
    pub region: Region,
    pub axis: Axis,
    pub n: usize,
    /// Rows grouped by scanline, in scanline order.
    pub rows: Vec<SheetRow>,
    /// Scanlines whose continuation failed, with the failure.
    pub failures: Vec<(usize, Error)>,
}

/// Eigenvalue sheets over `r`, continued independently along each scanline
/// parallel to `axis`. A scanline whose continuation fails falls back to
/// sort-by-real-part and is flagged.
pub fn sheet_surface(f: &HamiltonianFamily, r: &Region, axis: Axis) -> Result<SheetGrid> {
    sheet_surface_with(f, r, axis, Exec::default())
}

pub fn sheet_surface_with(f: &HamiltonianFamily, r: &Region, axis: Axis, exec: Exec) -> Result<SheetGrid> {
    r.validate()?;
    let (lines, len) = match axis {
        Axis::Alpha => (r.grid_beta, r.grid_alpha),
        Axis::Beta => (r.grid_alpha, r.grid_beta),
    };
    let node = |line: usize, k: usize| match axis {
        Axis::Alpha => r.node(k, line),
        Axis::Beta => r.node(line, k),
    };
    let opts = TrackOptions::default();
    let scan = exec.map(lines, |line| {
        let nodes: Vec<Params> = (0..len).map(|k| node(line, k)).collect();
        match continue_scanline(f, &nodes, opts) {
            Ok(values) => (values, None),
            Err(e) => {
                let values = nodes
                    .iter()
                    .map(|&p| {
                        let mut v = eigenvalues(&f.evaluate(p));
                        sort_by_real(&mut v);
                        v
                    })
                    .collect();
                (values, Some(e))
            }
        }
    });
    let mut rows = Vec::with_capacity(r.len());
    let mut failures = Vec::new();
    for (line, (values, err)) in scan.into_iter().enumerate() {
        let flagged = err.is_some();
        if let Some(e) = err {
            failures.push((line, e));
        }
        for (k, v) in values.into_iter().enumerate() {
            rows.push(SheetRow { params: node(line, k), values: v, flagged });
        }
    }
    Ok(SheetGrid { region: *r, axis, n: f.n(), rows, failures })
}

fn continue_scanline(f: &HamiltonianFamily, nodes: &[Params], opts: TrackOptions) -> Result<Vec<Vec<Complex>>> {
    let mut state = base_branches(f, nodes[0], false)?;
    let mut out = vec![state.values.clone()];
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut engine = Continuation {
            family: f,
            path: |t: f64| if t >= 1.0 { b } else { a.lerp(&b, t) },
            opts,
            refinements: 0,
            samples: Vec::new(),
            record: false,
        };
        engine.advance(&mut state, 0.0, 1.0, 0)?;
        out.push(state.values.clone());
    }
    Ok(out)
}
