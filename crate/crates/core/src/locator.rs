//! Locating exceptional points by driving the degeneracy discriminant to zero.
//!
//! `D(α, β)` is smooth through an EP while the eigenvalue gap has a
//! square-root cusp there, so seeds from a grid scan of `|D|` are refined by
//! damped Newton on the real map `(α, β) ↦ (Re D, Im D)`.

use serde::{Deserialize, Serialize};

use crate::eigen::{closest_pair, discriminant, eigenvalues, min_gap};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::family::{HamiltonianFamily, Params};

/// `|D| ≤ RESIDUAL_TOL · scale³` counts as converged.
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const STEP_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100;
pub const MAX_HALVINGS: usize = 8;
/// Relative central-difference step.
pub const FD_STEP: f64 = 1e-6;
/// Refined EPs closer than this are the same point.
pub const MERGE_RADIUS: f64 = 1e-4;

/// Axis-aligned parameter rectangle with a sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub grid_alpha: usize,
    pub grid_beta: usize,
}

impl Region {
    pub fn new(alpha: (f64, f64), beta: (f64, f64), grid: (usize, usize)) -> Result<Self> {
        let r = Region {
            alpha_min: alpha.0,
            alpha_max: alpha.1,
            beta_min: beta.0,
            beta_max: beta.1,
            grid_alpha: grid.0,
            grid_beta: grid.1,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha_min, self.alpha_max, self.beta_min, self.beta_max].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidRegion("bounds must be finite".into()));
        }
        if !(self.alpha_min < self.alpha_max && self.beta_min < self.beta_max) {
            return Err(Error::InvalidRegion(format!(
                "need min < max on both axes, got [{}, {}] × [{}, {}]",
                self.alpha_min, self.alpha_max, self.beta_min, self.beta_max
            )));
        }
        if self.grid_alpha < 2 || self.grid_beta < 2 {
            return Err(Error::InvalidRegion(format!(
                "grid sizes must be ≥ 2, got {}×{}",
                self.grid_alpha, self.grid_beta
            )));
        }
        Ok(())
    }

    pub fn alpha_at(&self, i: usize) -> f64 {
        if i + 1 == self.grid_alpha {
            return self.alpha_max;
        }
        self.alpha_min + (self.alpha_max - self.alpha_min) * i as f64 / (self.grid_alpha - 1) as f64
    }

    pub fn beta_at(&self, j: usize) -> f64 {
        if j + 1 == self.grid_beta {
            return self.beta_max;
        }
        self.beta_min + (self.beta_max - self.beta_min) * j as f64 / (self.grid_beta - 1) as f64
    }

    /// Grid node `(i, j)` (alpha index, beta index).
    pub fn node(&self, i: usize, j: usize) -> Params {
        Params::new(self.alpha_at(i), self.beta_at(j))
    }

    pub fn len(&self) -> usize {
        self.grid_alpha * self.grid_beta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index: beta is the slow index, alpha the fast one.
    pub fn flat(&self, i: usize, j: usize) -> usize {
        j * self.grid_alpha + i
    }

    pub fn contains(&self, p: Params) -> bool {
        (self.alpha_min..=self.alpha_max).contains(&p.alpha) && (self.beta_min..=self.beta_max).contains(&p.beta)
    }

    /// Same centre, each side multiplied by `factor`.
    pub fn inflated(&self, factor: f64) -> Region {
        let (ca, cb) = ((self.alpha_min + self.alpha_max) / 2.0, (self.beta_min + self.beta_max) / 2.0);
        let (ha, hb) =
            ((self.alpha_max - self.alpha_min) * factor / 2.0, (self.beta_max - self.beta_min) * factor / 2.0);
        Region { alpha_min: ca - ha, alpha_max: ca + ha, beta_min: cb - hb, beta_max: cb + hb, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EPRecord {
    pub location: Params,
    /// `|D|` at `location`.
    pub residual: f64,
    /// Indices of the two closest eigenvalues (raw solver order) at `location`.
    pub coalescing_pair: (usize, usize),
    pub min_gap: f64,
    pub newton_iterations: usize,
}

pub fn discriminant_at(f: &HamiltonianFamily, p: Params) -> crate::matrix::Complex {
    discriminant(&f.evaluate(p))
}

fn residual_tolerance(f: &HamiltonianFamily, p: Params) -> f64 {
    RESIDUAL_TOL * f.evaluate(p).scale().powi(3)
}

/// One grid sample of the gap / discriminant fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSample {
    pub alpha: f64,
    pub beta: f64,
    pub min_gap: f64,
    pub abs_discriminant: f64,
}

/// Gap and `|D|` on every grid node, row-major (beta slow, alpha fast).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub region: Region,
    pub samples: Vec<GridSample>,
}

impl GridField {
    pub fn at(&self, i: usize, j: usize) -> &GridSample {
        &self.samples[self.region.flat(i, j)]
    }
}

pub fn gap_field(f: &HamiltonianFamily, r: &Region) -> Result<GridField> {
    gap_field_with(f, r, Exec::default())
}

pub fn gap_field_with(f: &HamiltonianFamily, r: &Region, exec: Exec) -> Result<GridField> {
    r.validate()?;
    let samples = exec.map(r.len(), |k| {
        let (i, j) = (k % r.grid_alpha, k / r.grid_alpha);
        let p = r.node(i, j);
        let m = f.evaluate(p);
        GridSample {
            alpha: p.alpha,
            beta: p.beta,
            min_gap: min_gap(&eigenvalues(&m)),
            abs_discriminant: discriminant(&m).norm(),
        }
    });
    Ok(GridField { region: *r, samples })
}

/// Interior grid nodes that are strict minima of `|D|` over their eight
/// neighbours, sorted by ascending `|D|`.
///
/// Exact ties are broken in row-major order (a node must be strictly below
/// the neighbours that precede it and not above those that follow), so a
/// minimum straddling two symmetric nodes yields one seed while a flat field
/// yields none.
pub fn scan_seeds(f: &HamiltonianFamily, r: &Region) -> Result<Vec<Params>> {
    scan_seeds_with(f, r, Exec::default())
}

pub fn scan_seeds_with(f: &HamiltonianFamily, r: &Region, exec: Exec) -> Result<Vec<Params>> {
    r.validate()?;
    let values = exec.map(r.len(), |k| {
        let (i, j) = (k % r.grid_alpha, k / r.grid_alpha);
        discriminant_at(f, r.node(i, j)).norm()
    });
    let mut seeds = Vec::new();
    for j in 1..r.grid_beta.saturating_sub(1) {
        for i in 1..r.grid_alpha.saturating_sub(1) {
            let v = values[r.flat(i, j)];
            let strict = (-1i64..=1).flat_map(|dj| (-1i64..=1).map(move |di| (di, dj))).filter(|&d| d != (0, 0)).all(
                |(di, dj)| {
                    let other = values[r.flat((i as i64 + di) as usize, (j as i64 + dj) as usize)];
                    if (dj, di) < (0, 0) {
                        v < other
                    } else {
                        v <= other
                    }
                },
            );
            if strict {
                seeds.push((v, r.node(i, j)));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(seeds.into_iter().map(|(_, p)| p).collect())
}

/// Newton refinement of a seed. `bounds`, when given, is inflated 2× and
/// the iterate must stay inside it.
pub fn refine_ep(f: &HamiltonianFamily, seed: Params, bounds: Option<&Region>) -> Result<EPRecord> {
    if !seed.is_finite() {
        return Err(Error::NonFinite("seed"));
    }
    let fence = bounds.map(|b| b.inflated(2.0));
    let eval = |p: Params| {
        let d = discriminant_at(f, p);
        [d.re, d.im]
    };
    let mut x = seed;
    let mut fx = eval(x);
    for iteration in 0..=MAX_ITERATIONS {
        let abs = fx[0].hypot(fx[1]);
        if abs <= residual_tolerance(f, x) {
            return Ok(record(f, x, abs, iteration));
        }
        if iteration == MAX_ITERATIONS {
            break;
        }

        let ha = FD_STEP * x.alpha.abs().max(1.0);
        let hb = FD_STEP * x.beta.abs().max(1.0);
        let (fa_p, fa_m) = (eval(Params::new(x.alpha + ha, x.beta)), eval(Params::new(x.alpha - ha, x.beta)));
        let (fb_p, fb_m) = (eval(Params::new(x.alpha, x.beta + hb)), eval(Params::new(x.alpha, x.beta - hb)));
        let j = [
            [(fa_p[0] - fa_m[0]) / (2.0 * ha), (fb_p[0] - fb_m[0]) / (2.0 * hb)],
            [(fa_p[1] - fa_m[1]) / (2.0 * ha), (fb_p[1] - fb_m[1]) / (2.0 * hb)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence { iterations: iteration, residual: abs });
        }
        let step = [-(j[1][1] * fx[0] - j[0][1] * fx[1]) / det, -(-j[1][0] * fx[0] + j[0][0] * fx[1]) / det];

        let mut scale = 1.0;
        let mut next = Params::new(x.alpha + step[0], x.beta + step[1]);
        let mut f_next = eval(next);
        for _ in 0..MAX_HALVINGS {
            if f_next[0].hypot(f_next[1]) < abs {
                break;
            }
            scale *= 0.5;
            next = Params::new(x.alpha + scale * step[0], x.beta + scale * step[1]);
            f_next = eval(next);
        }
        if let Some(fence) = &fence {
            if !fence.contains(next) {
                return Err(Error::EscapedRegion { alpha: next.alpha, beta: next.beta });
            }
        }
        let moved = scale * step[0].hypot(step[1]);
        x = next;
        fx = f_next;
        if moved < STEP_TOL {
            let abs = fx[0].hypot(fx[1]);
            if abs <= residual_tolerance(f, x) {
                return Ok(record(f, x, abs, iteration + 1));
            }
            return Err(Error::NoConvergence { iterations: iteration + 1, residual: abs });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, residual: fx[0].hypot(fx[1]) })
}

fn record(f: &HamiltonianFamily, location: Params, residual: f64, iterations: usize) -> EPRecord {
    let values = eigenvalues(&f.evaluate(location));
    EPRecord {
        location,
        residual,
        coalescing_pair: closest_pair(&values),
        min_gap: min_gap(&values),
        newton_iterations: iterations,
    }
}

/// Outcome of a full scan-and-refine pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LocateReport {
    /// Refined, deduplicated EPs inside the region, sorted by alpha then beta.
    pub eps: Vec<EPRecord>,
    pub seeds: usize,
    /// Seeds whose refinement failed or left the region (spurious minima of |D|).
    pub rejected: usize,
}

/// Scan, refine every seed, drop failures, merge duplicates and keep the
/// EPs that lie inside the region.
pub fn locate(f: &HamiltonianFamily, r: &Region) -> Result<Vec<EPRecord>> {
    Ok(locate_with(f, r, Exec::default())?.eps)
}

pub fn locate_with(f: &HamiltonianFamily, r: &Region, exec: Exec) -> Result<LocateReport> {
    let seeds = scan_seeds_with(f, r, exec)?;
    let refined = exec.map_slice(&seeds, |&s| refine_ep(f, s, Some(r)));
    let mut ok: Vec<EPRecord> =
        refined.iter().filter_map(|x| x.as_ref().ok()).filter(|e| r.contains(e.location)).cloned().collect();
    ok.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let mut kept: Vec<EPRecord> = Vec::new();
    for e in ok {
        if kept.iter().all(|k| k.location.distance(&e.location) >= MERGE_RADIUS) {
            kept.push(e);
        }
    }
    kept.sort_by(|a, b| {
        a.location.alpha.total_cmp(&b.location.alpha).then(a.location.beta.total_cmp(&b.location.beta))
    });
    let rejected = refined.iter().filter(|x| x.is_err()).count();
    Ok(LocateReport { eps: kept, seeds: seeds.len(), rejected })
}
