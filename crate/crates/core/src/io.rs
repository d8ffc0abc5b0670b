//! JSON and CSV interchange formats.
//!
//! Complex numbers are `[re, im]` pairs throughout; parameter points are
//! `[alpha, beta]`. CSV numbers use 17 significant digits so every `f64`
//! round-trips.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyKind, HamiltonianFamily, Params};
use crate::locator::GridField;
use crate::matrix::{Complex, SmallMatrix};
use crate::tracker::{HolonomySignature, LoopShape, Orientation, ParameterLoop, SheetGrid, TrackResult, TrackSample};

/// `{"kind": ..., "n": ..., "base": [[re, im], ...], "grad_alpha": ..., "grad_beta": ..., "epsilon": ...}`
///
/// Matrices are flat row-major lists of `n²` entries. Built-in kinds are
/// rebuilt from their parameters (`e0`, `delta_scale`, `epsilon`); any
/// matrices given alongside must agree with the rebuilt ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDescriptor {
    pub kind: FamilyKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_alpha: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_beta: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_scale: Option<f64>,
}

const MATCH_TOL: f64 = 1e-12;

impl FamilyDescriptor {
    pub fn from_family(f: &HamiltonianFamily) -> Self {
        FamilyDescriptor {
            kind: f.kind(),
            n: f.n(),
            base: Some(f.base().to_flat()),
            grad_alpha: Some(f.grad_alpha().to_flat()),
            grad_beta: Some(f.grad_beta().to_flat()),
            epsilon: f.epsilon(),
            e0: f.e0(),
            delta_scale: f.delta_scale(),
        }
    }

    pub fn to_family(&self) -> Result<HamiltonianFamily> {
        let family = match self.kind {
            FamilyKind::Paper3x3 => HamiltonianFamily::paper_3x3(),
            FamilyKind::Paper2x2 => HamiltonianFamily::paper_2x2(
                self.e0.unwrap_or(Complex::new(0.0, 0.0)),
                self.delta_scale.unwrap_or(1.0),
            )?,
            FamilyKind::Tep3x3 => HamiltonianFamily::tep_3x3(self.epsilon.unwrap_or(1.0))?,
            FamilyKind::CustomAffine => {
                let get = |name: &str, m: &Option<Vec<Complex>>| {
                    m.as_ref()
                        .ok_or_else(|| Error::InvalidFamily(format!("custom-affine family needs `{name}`")))
                        .and_then(|v| matrix(name, v))
                };
                HamiltonianFamily::custom_affine(
                    get("base", &self.base)?,
                    get("grad_alpha", &self.grad_alpha)?,
                    get("grad_beta", &self.grad_beta)?,
                )?
            }
        };
        if family.n() != self.n {
            return Err(Error::InvalidFamily(format!(
                "`n` is {} but a {} family has n = {}",
                self.n,
                self.kind.name(),
                family.n()
            )));
        }
        for (name, given, built) in [
            ("base", &self.base, family.base()),
            ("grad_alpha", &self.grad_alpha, family.grad_alpha()),
            ("grad_beta", &self.grad_beta, family.grad_beta()),
        ] {
            if let Some(v) = given {
                let m = matrix(name, v)?;
                if m.n() != built.n() || (m - *built).max_norm() > MATCH_TOL {
                    return Err(Error::InvalidFamily(format!(
                        "`{name}` does not match the {} family",
                        self.kind.name()
                    )));
                }
            }
        }
        Ok(family)
    }
}

fn matrix(name: &str, entries: &[Complex]) -> Result<SmallMatrix> {
    SmallMatrix::from_flat(entries).map_err(|e| Error::InvalidFamily(format!("`{name}`: {e}")))
}

pub fn parse_family(text: &str) -> Result<HamiltonianFamily> {
    let d: FamilyDescriptor = serde_json::from_str(text).map_err(|e| Error::InvalidFamily(e.to_string()))?;
    d.to_family()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleDescriptor {
    pub center: Params,
    pub radius: f64,
}

/// `{"vertices": [[a, b], ...] | "circle": {"center": [a, b], "radius": r},
///   "samples_per_segment": k, "orientation": "positive" | "negative", "cycles": k}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Params>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle: Option<CircleDescriptor>,
    pub samples_per_segment: usize,
    #[serde(default)]
    pub orientation: Orientation,
    #[serde(default = "one")]
    pub cycles: usize,
}

fn one() -> usize {
    1
}

impl LoopDescriptor {
    pub fn from_loop(l: &ParameterLoop) -> Self {
        let (vertices, circle) = match &l.shape {
            LoopShape::Polyline(v) => (Some(v.clone()), None),
            LoopShape::Circle { center, radius } => (None, Some(CircleDescriptor { center: *center, radius: *radius })),
        };
        LoopDescriptor {
            vertices,
            circle,
            samples_per_segment: l.samples_per_segment,
            orientation: l.orientation,
            cycles: l.cycles,
        }
    }

    pub fn to_loop(&self) -> Result<ParameterLoop> {
        let l = match (&self.vertices, &self.circle) {
            (Some(v), None) => ParameterLoop::polyline(v.clone(), self.samples_per_segment)?,
            (None, Some(c)) => ParameterLoop::circle(c.center, c.radius, self.samples_per_segment)?,
            _ => return Err(Error::InvalidLoop("give exactly one of `vertices` or `circle`".into())),
        };
        let l = l.with_orientation(self.orientation).with_cycles(self.cycles);
        l.validate()?;
        Ok(l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orders {
    pub permutation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signed: Option<usize>,
}

/// Wire form of a [`TrackResult`]:
/// `{"samples": [{"params": [a, b], "eigs": [[re, im], ...]}, ...], "permutation": [...],
///   "signs": [...]?, "orders": {"permutation": k, "signed": k?}, ...}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackOutput {
    pub samples: Vec<TrackSample>,
    pub permutation: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
    pub orders: Orders,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<Complex>>,
    #[serde(default)]
    pub refinements: usize,
    #[serde(default)]
    pub per_cycle: Vec<HolonomySignature>,
}

impl From<&TrackResult> for TrackOutput {
    fn from(t: &TrackResult) -> Self {
        let h = crate::tracker::holonomy_of(t);
        TrackOutput {
            samples: t.samples.clone(),
            permutation: t.permutation.clone(),
            signs: t.signs.clone(),
            orders: Orders { permutation: h.order_permutation, signed: h.order_signed },
            phases: t.phases.clone(),
            refinements: t.refinements,
            per_cycle: t.per_cycle.clone(),
        }
    }
}

impl TryFrom<TrackOutput> for TrackResult {
    type Error = Error;
    fn try_from(o: TrackOutput) -> Result<Self> {
        let h = HolonomySignature::new(o.permutation.clone(), o.signs.clone())?;
        if h.order_permutation != o.orders.permutation || h.order_signed != o.orders.signed {
            return Err(Error::InvalidPermutation("`orders` disagree with `permutation`/`signs`".into()));
        }
        Ok(TrackResult {
            samples: o.samples,
            permutation: o.permutation,
            signs: o.signs,
            phases: o.phases,
            refinements: o.refinements,
            per_cycle: o.per_cycle,
        })
    }
}

pub fn track_to_json(t: &TrackResult) -> String {
    serde_json::to_string(&TrackOutput::from(t)).expect("plain data serializes")
}

pub fn track_from_json(text: &str) -> Result<TrackResult> {
    let o: TrackOutput = serde_json::from_str(text).map_err(|e| Error::InvalidLoop(e.to_string()))?;
    o.try_into()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `alpha,beta,min_gap,abs_discriminant`, row-major (beta slow, alpha fast).
pub fn write_grid_csv<W: Write>(field: &GridField, mut w: W) -> std::io::Result<()> {
    writeln!(w, "alpha,beta,min_gap,abs_discriminant")?;
    for s in &field.samples {
        writeln!(w, "{},{},{},{}", num(s.alpha), num(s.beta), num(s.min_gap), num(s.abs_discriminant))?;
    }
    Ok(())
}

/// `alpha,beta,re1,im1,...,reN,imN,flag`, one row per grid node in
/// scanline order; `flag` is 1 on scanlines that fell back to sorting.
pub fn write_sheet_csv<W: Write>(sheet: &SheetGrid, mut w: W) -> std::io::Result<()> {
    let mut header = vec!["alpha".to_string(), "beta".to_string()];
    for k in 1..=sheet.n {
        header.push(format!("re{k}"));
        header.push(format!("im{k}"));
    }
    header.push("flag".into());
    writeln!(w, "{}", header.join(","))?;
    for row in &sheet.rows {
        let mut cells = vec![num(row.params.alpha), num(row.params.beta)];
        for v in &row.values {
            cells.push(num(v.re));
            cells.push(num(v.im));
        }
        cells.push(if row.flagged { "1".into() } else { "0".into() });
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}
