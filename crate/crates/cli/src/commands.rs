use std::fs::File;
use std::io::{self, BufWriter, Write};

use ep_holonomy::algebra::{enumerate_orderings, Direction, OrderingProduct, SignedPermutation};
use ep_holonomy::io::{track_to_json, write_grid_csv, write_sheet_csv};
use ep_holonomy::locator::{gap_field, locate_with};
use ep_holonomy::tracker::{sheet_surface, Axis};
use ep_holonomy::verify;
use ep_holonomy::{holonomy_of, track as track_loop, Exec, HolonomySignature, TrackOptions, TrackResult};
use serde::Serialize;

use crate::config::{
    load_config, resolve_family, resolve_loop, resolve_optional_family, resolve_region, AlgebraConfig, ConfigError,
    Format,
};
use crate::{Common, Failure, LocateArgs, TrackArgs, VerifyArgs};

type Outcome = Result<(), Failure>;

/// Data goes to `--out` or standard output; the human summary goes to
/// standard output when data is in a file and to standard error otherwise.
struct Sink {
    data: Box<dyn Write>,
    to_file: bool,
}

impl Sink {
    fn open(common: &Common, cfg_out: Option<&std::path::Path>) -> Result<Self, Failure> {
        match common.out.as_deref().or(cfg_out) {
            Some(path) => {
                let file =
                    File::create(path).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
                Ok(Sink { data: Box::new(BufWriter::new(file)), to_file: true })
            }
            None => Ok(Sink { data: Box::new(io::stdout().lock()), to_file: false }),
        }
    }

    fn summary(&self, line: &str) {
        if self.to_file {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }

    fn finish(mut self) -> Outcome {
        self.data.flush().map_err(|e| Failure::Io(format!("write failed: {e}")))
    }
}

fn io_err(e: io::Error) -> Failure {
    Failure::Io(format!("write failed: {e}"))
}

fn write_json<T: Serialize + ?Sized>(sink: &mut Sink, value: &T) -> Outcome {
    serde_json::to_writer_pretty(&mut sink.data, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(sink.data).map_err(io_err)
}

fn format_of(
    common: &Common,
    cfg: Option<Format>,
    default: Format,
    allowed: &[Format],
    command: &str,
) -> Result<Format, Failure> {
    let f = common.format.or(cfg).unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(ConfigError(format!("`{command}` does not write {f:?} output")).into())
    }
}

/// Text-table commands: `true` when `--format json` asked for JSON instead.
fn wants_json(common: &Common, cfg: Option<Format>, command: &str) -> Result<bool, Failure> {
    match common.format.or(cfg) {
        None => Ok(false),
        Some(Format::Json) => Ok(true),
        Some(f) => Err(ConfigError(format!("`{command}` does not write {f:?} output")).into()),
    }
}

pub fn locate(args: &LocateArgs, common: &Common) -> Outcome {
    let cfg = load_config(common.config.as_deref())?;
    let family = resolve_family(args.family.as_deref(), &cfg)?;
    let region = resolve_region(args.region.as_deref(), args.grid.as_deref(), &cfg)?;
    let format = format_of(common, cfg.format, Format::Json, &[Format::Json, Format::Csv], "locate")?;
    let mut sink = Sink::open(common, cfg.out.as_deref())?;

    let report = locate_with(&family, &region, Exec::default())?;
    match format {
        Format::Json => write_json(&mut sink, &report.eps)?,
        Format::Csv => write_grid_csv(&gap_field(&family, &region)?, &mut sink.data).map_err(io_err)?,
    }
    sink.summary(&format!(
        "{} EP(s) in [{}, {}] × [{}, {}] on a {}×{} grid ({} seeds, {} rejected)",
        report.eps.len(),
        region.alpha_min,
        region.alpha_max,
        region.beta_min,
        region.beta_max,
        region.grid_alpha,
        region.grid_beta,
        report.seeds,
        report.rejected
    ));
    for e in &report.eps {
        sink.summary(&format!(
            "  ({:.6}, {:.6})  |D| = {:.1e}  modes {:?}  gap {:.1e}",
            e.location.alpha, e.location.beta, e.residual, e.coalescing_pair, e.min_gap
        ));
    }
    sink.finish()
}

/// `(0 2 1)[+,+,+] order 3, signed order 3; identity after cycle 3; modes return after 3,3,3`
pub fn track_summary(t: &TrackResult) -> String {
    let h = holonomy_of(t);
    let mut parts = vec![format!("{} order {}", h.to_signed(), h.order_permutation)];
    if let Some(k) = h.order_signed {
        parts[0].push_str(&format!(", signed order {k}"));
    }
    let cycles = t.per_cycle.len();
    parts.push(match t.per_cycle.iter().position(HolonomySignature::is_identity) {
        Some(k) => format!("identity after cycle {}", k + 1),
        None => format!("not identity within {cycles} cycle(s)"),
    });
    let returns: Vec<String> = (0..t.n())
        .map(|i| match t.per_cycle.iter().position(|s| s.permutation[i] == i) {
            Some(k) => (k + 1).to_string(),
            None => "-".into(),
        })
        .collect();
    parts.push(format!("modes return after {}", returns.join(",")));
    parts.join("; ")
}

pub fn track(args: &TrackArgs, common: &Common) -> Outcome {
    let cfg = load_config(common.config.as_deref())?;
    let family = resolve_family(args.family.as_deref(), &cfg)?;
    let l = resolve_loop(args.loop_file.as_deref(), args.cycles, &cfg)?;
    format_of(common, cfg.format, Format::Json, &[Format::Json], "track")?;
    let mut opts = TrackOptions::default();
    if args.track_vectors || cfg.track_vectors.unwrap_or(false) {
        opts = opts.with_vectors();
    }
    let mut sink = Sink::open(common, cfg.out.as_deref())?;

    let result = track_loop(&family, &l, opts)?;
    writeln!(sink.data, "{}", track_to_json(&result)).map_err(io_err)?;
    sink.summary(&track_summary(&result));
    sink.finish()
}

pub fn surface(args: &LocateArgs, common: &Common) -> Outcome {
    let cfg = load_config(common.config.as_deref())?;
    let family = resolve_family(args.family.as_deref(), &cfg)?;
    let region = resolve_region(args.region.as_deref(), args.grid.as_deref(), &cfg)?;
    format_of(common, cfg.format, Format::Csv, &[Format::Csv], "surface")?;
    let axis = cfg.axis.unwrap_or(Axis::Alpha);
    let mut sink = Sink::open(common, cfg.out.as_deref())?;

    let sheet = sheet_surface(&family, &region, axis)?;
    write_sheet_csv(&sheet, &mut sink.data).map_err(io_err)?;
    let lines = match axis {
        Axis::Alpha => region.grid_beta,
        Axis::Beta => region.grid_alpha,
    };
    sink.summary(&format!("{} rows, {} of {lines} scanline(s) flagged", sheet.rows.len(), sheet.failures.len()));
    for (line, e) in &sheet.failures {
        sink.summary(&format!("  scanline {line}: {}: {e}", e.name()));
    }
    sink.finish()
}

#[derive(Serialize)]
struct AlgebraTable {
    n: usize,
    pairs: Vec<(usize, usize)>,
    signed: bool,
    orderings: Vec<OrderingProduct>,
}

fn default_algebra_sets() -> Vec<AlgebraConfig> {
    let sets = [(3, vec![(0, 1), (1, 2)]), (3, vec![(0, 1), (1, 2), (0, 2)]), (4, vec![(0, 1), (1, 2), (2, 3)])];
    sets.into_iter()
        .flat_map(|(n, pairs)| [false, true].map(|signed| AlgebraConfig { n, pairs: pairs.clone(), signed }))
        .collect()
}

fn table_for(set: &AlgebraConfig) -> Result<AlgebraTable, Failure> {
    let gens = set
        .pairs
        .iter()
        .map(|&(i, j)| SignedPermutation::generator(set.n, i.min(j), i.max(j), set.signed, Direction::Positive))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ConfigError(format!("algebra: {e}")))?;
    let orderings = enumerate_orderings(&gens).map_err(|e| ConfigError(format!("algebra: {e}")))?;
    Ok(AlgebraTable { n: set.n, pairs: set.pairs.clone(), signed: set.signed, orderings })
}

fn render_table(t: &AlgebraTable) -> String {
    let name = |k: usize| format!("M{}{}", t.pairs[k].0, t.pairs[k].1);
    let mut out = format!(
        "# {} modes, {} generators {}; spectrum as fractions k of exp(2πi·k)\n",
        t.n,
        if t.signed { "signed" } else { "unsigned" },
        (0..t.pairs.len()).map(name).collect::<Vec<_>>().join(" ")
    );
    for o in &t.orderings {
        let word = o.ordering.iter().map(|&k| name(k)).collect::<Vec<_>>().join("·");
        let spectrum = o
            .product
            .spectrum_exact()
            .iter()
            .map(|g| if g.numerator == 0 { "0".to_string() } else { format!("{}/{}", g.numerator, g.denominator) })
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!("{word:<16} {:<24} order {:<3} spectrum {spectrum}\n", o.product.to_string(), o.order));
    }
    out
}

pub fn algebra(common: &Common) -> Outcome {
    let cfg = load_config(common.config.as_deref())?;
    let json = wants_json(common, cfg.format, "algebra")?;
    let sets = cfg.algebra.clone().map(|a| vec![a]).unwrap_or_else(default_algebra_sets);
    let tables = sets.iter().map(table_for).collect::<Result<Vec<_>, _>>()?;
    let mut sink = Sink::open(common, cfg.out.as_deref())?;
    if json {
        write_json(&mut sink, &tables)?;
    } else {
        for t in &tables {
            writeln!(sink.data, "{}", render_table(t)).map_err(io_err)?;
        }
    }
    sink.finish()
}

pub fn verify(args: &VerifyArgs, common: &Common) -> Outcome {
    let cfg = load_config(common.config.as_deref())?;
    if let Some(f) = resolve_optional_family(args.family.as_deref(), &cfg)? {
        eprintln!("family {} (n = {}) is valid", f.kind().name(), f.n());
    }
    let only = args.only.or(cfg.only);
    let json = wants_json(common, cfg.format, "verify")?;
    let mut sink = Sink::open(common, cfg.out.as_deref())?;

    let outcomes = verify::run(only, Exec::default());
    let passed = outcomes.iter().filter(|o| o.passed).count();
    if json {
        write_json(&mut sink, &outcomes)?;
    } else {
        for o in &outcomes {
            writeln!(sink.data, "{}", o.line()).map_err(io_err)?;
        }
        writeln!(sink.data, "{passed}/{} checks passed", outcomes.len()).map_err(io_err)?;
    }
    sink.finish()?;
    if passed == outcomes.len() {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}
