//! Argument parsing and command dispatch for the `lamlab` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use lamlab::circle::{parse_angle_list, Degree};
use lamlab::fpp::{enumerate_fpps, fixed_sectors, fpps_up_to_rotation};
use lamlab::leaves::{check_invariance, validate_prelamination};
use lamlab::pullback::{canonical_lamination, classify_sector, is_hyperbolic_approx, pullback, Witness};
use lamlab::rotation::{max_to_uni, rotation_number, uni_to_max, unicritical_lamination, RotationalOrbit};
use lamlab::FixedPointPortrait;

use crate::document::{LaminationDocument, Metadata};
use crate::svg::{write_svg, ChordStyle, LabelStyle, RenderSpec};
use crate::{max_depth, parse_fpp_spec, CliError, Result};

#[derive(Parser)]
#[command(name = "lamlab", version, about = "Invariant laminations under the angle d-tupling map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed point portraits.
    #[command(subcommand)]
    Fpp(FppCommand),
    /// Lamination documents.
    #[command(subcommand)]
    Lam(LamCommand),
    /// Rotational sets.
    #[command(subcommand)]
    Rot(RotCommand),
    /// Unicritical ↔ maximally critical correspondence.
    #[command(subcommand)]
    Corr(CorrCommand),
    /// Classify the fixed object in every fixed sector.
    Classify {
        #[arg(long)]
        file: PathBuf,
        /// Fixed point portrait JSON; defaults to the document's own.
        #[arg(long)]
        portrait: Option<PathBuf>,
    },
    /// Draw a document as SVG.
    Render {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "straight")]
        style: ChordStyle,
        #[arg(long, value_enum)]
        labels: Option<LabelStyle>,
        #[arg(long, default_value_t = 600)]
        size: u32,
    },
}

#[derive(Subcommand)]
enum FppCommand {
    /// List every portrait of a degree.
    Enum {
        #[arg(long, value_parser = parse_degree)]
        degree: Degree,
        #[arg(long)]
        up_to_rotation: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Build the canonical lamination of a portrait.
    Canonical {
        #[arg(long, value_parser = parse_degree)]
        degree: Degree,
        /// Blocks such as `0,1;2,3`, or a portrait JSON file.
        #[arg(long)]
        fpp: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum LamCommand {
    /// Pre-lamination and stage-invariance reports.
    Check {
        #[arg(long)]
        file: PathBuf,
        /// A later stage to check the file against.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Pull back a document's leaves along its critical portrait.
    Pullback {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum RotCommand {
    /// Rotational orbits of one period.
    Orbits {
        #[arg(long, value_parser = parse_degree)]
        degree: Degree,
        #[arg(long)]
        period: usize,
        /// Keep only orbits with this rotation number, `p/q`.
        #[arg(long)]
        rotation: Option<String>,
    },
    /// Pull back the unicritical d-gon of a rotational orbit.
    Lamination {
        #[arg(long, value_parser = parse_degree)]
        degree: Degree,
        #[arg(long)]
        polygon: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rotation number of a finite set.
    Number {
        #[arg(long, value_parser = parse_degree)]
        degree: Degree,
        #[arg(long)]
        points: String,
    },
}

#[derive(Args)]
struct CorrArgs {
    /// Lamination document supplying the degree (and, for uni-to-max, the
    /// lamination and its critical portrait).
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, value_parser = parse_degree)]
    degree: Option<Degree>,
    #[arg(long)]
    polygon: String,
}

#[derive(Subcommand)]
enum CorrCommand {
    UniToMax(CorrArgs),
    MaxToUni(CorrArgs),
}

fn parse_degree(s: &str) -> std::result::Result<Degree, String> {
    let d: u32 = s.parse().map_err(|_| format!("`{s}` is not an integer"))?;
    Degree::new(d).map_err(|e| e.to_string())
}

struct Session<'a> {
    out: &'a mut dyn Write,
    command: String,
}

impl Session<'_> {
    fn emit(&mut self, v: Value) -> Result<()> {
        writeln!(self.out, "{v}").map_err(|e| CliError::Io("standard output".into(), e))
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn parse_polygon(s: &str, d: Degree) -> Result<Vec<lamlab::CirclePoint>> {
    parse_angle_list(s, d).map_err(usage)
}

fn check_depth(depth: usize) -> Result<()> {
    let cap = max_depth(std::env::var("LAMLAB_MAX_DEPTH").ok().as_deref())?;
    if depth > cap {
        return Err(usage(format!("depth {depth} exceeds LAMLAB_MAX_DEPTH = {cap}")));
    }
    Ok(())
}

/// Runs one command. `Ok(false)` means a validation failure already reported.
fn run(cli: Cli, io: &mut Session) -> Result<bool> {
    match cli.command {
        Command::Fpp(FppCommand::Enum { degree, up_to_rotation, json }) => {
            let ps = if up_to_rotation { fpps_up_to_rotation(degree) } else { enumerate_fpps(degree) };
            if let Some(path) = json {
                let mut text = serde_json::to_string_pretty(&ps)?;
                text.push('\n');
                std::fs::write(&path, text).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            }
            let blocks: Vec<&[Vec<usize>]> = ps.iter().map(FixedPointPortrait::blocks).collect();
            io.emit(json!({
                "status": "ok",
                "degree": degree,
                "up_to_rotation": up_to_rotation,
                "count": ps.len(),
                "portraits": blocks,
            }))?;
            Ok(true)
        }
        Command::Fpp(FppCommand::Canonical { degree, fpp, depth, out }) => {
            check_depth(depth)?;
            let p = parse_fpp_spec(&fpp, degree)?;
            let st = canonical_lamination(&p, depth)?;
            let doc = LaminationDocument::from_state(&st).with_metadata(Metadata::new(io.command.clone()));
            doc.write(&out)?;
            io.emit(json!({
                "status": "ok",
                "degree": degree,
                "fpp": p.blocks(),
                "depth": depth,
                "leaves": doc.leaves.len(),
            }))?;
            Ok(true)
        }
        Command::Lam(LamCommand::Check { file, against }) => {
            let doc = LaminationDocument::read(&file)?;
            let pre = validate_prelamination(&doc.lamination());
            let mut ok = pre.is_ok();
            let mut stages = Vec::new();
            match against {
                Some(path) => {
                    let next = LaminationDocument::read(&path)?;
                    let r = check_invariance(&doc.lamination(), &next.lamination())?;
                    ok &= r.is_ok();
                    stages.push(json!({ "against": path.display().to_string(), "report": r, "ok": r.is_ok() }));
                }
                None => {
                    for k in 1..=doc.depth() {
                        let r = check_invariance(&doc.stage(k - 1), &doc.stage(k))?;
                        ok &= r.is_ok();
                        stages.push(json!({ "from": k - 1, "to": k, "report": r, "ok": r.is_ok() }));
                    }
                }
            }
            io.emit(json!({
                "status": if ok { "ok" } else { "fail" },
                "leaves": doc.leaves.len(),
                "prelamination": pre,
                "invariance": stages,
            }))?;
            Ok(ok)
        }
        Command::Lam(LamCommand::Pullback { file, depth, out }) => {
            check_depth(depth)?;
            let doc = LaminationDocument::read(&file)?;
            let c = doc.critical_portrait.clone().ok_or_else(|| usage("the document has no critical_portrait"))?;
            let mut st = pullback(&doc.stage(0), &c, depth)?;
            st.fpp = doc.portrait().transpose()?;
            let doc = LaminationDocument::from_state(&st).with_metadata(Metadata::new(io.command.clone()));
            doc.write(&out)?;
            io.emit(json!({ "status": "ok", "depth": depth, "leaves": doc.leaves.len() }))?;
            Ok(true)
        }
        Command::Rot(RotCommand::Orbits { degree, period, rotation }) => {
            if period == 0 {
                return Err(usage("period must be at least 1"));
            }
            let wanted = rotation
                .map(|r| {
                    let (p, q) = r.split_once('/').ok_or_else(|| usage(format!("rotation `{r}` is not p/q")))?;
                    let p: usize = p.trim().parse().map_err(usage)?;
                    let q: usize = q.trim().parse().map_err(usage)?;
                    if q == 0 {
                        return Err(usage("rotation denominator is zero"));
                    }
                    Ok(num_rational::Ratio::new(p, q))
                })
                .transpose()?;
            let orbits: Vec<RotationalOrbit> = lamlab::rotation::enumerate_rotational_orbits(degree, period, None)
                .into_iter()
                .filter(|o| wanted.is_none_or(|w| o.rotation == w))
                .collect();
            io.emit(json!({
                "status": "ok",
                "degree": degree,
                "period": period,
                "count": orbits.len(),
                "orbits": orbits,
            }))?;
            Ok(true)
        }
        Command::Rot(RotCommand::Lamination { degree, polygon, depth, out }) => {
            check_depth(depth)?;
            let o = RotationalOrbit::new(degree, parse_polygon(&polygon, degree)?)?;
            let st = unicritical_lamination(&o, depth)?;
            let doc = LaminationDocument::from_state(&st).with_metadata(Metadata::new(io.command.clone()));
            doc.write(&out)?;
            io.emit(json!({ "status": "ok", "depth": depth, "leaves": doc.leaves.len() }))?;
            Ok(true)
        }
        Command::Rot(RotCommand::Number { degree, points }) => {
            let pts = parse_angle_list(&points, degree).map_err(usage)?;
            match rotation_number(degree, &pts) {
                Ok(r) => {
                    io.emit(json!({ "status": "ok", "rotation": format!("{}/{}", r.numer(), r.denom()) }))?;
                    Ok(true)
                }
                Err(e) => {
                    io.emit(json!({ "status": "fail", "error": e.to_string() }))?;
                    Ok(false)
                }
            }
        }
        Command::Corr(cmd) => {
            let (args, forward) = match cmd {
                CorrCommand::UniToMax(a) => (a, true),
                CorrCommand::MaxToUni(a) => (a, false),
            };
            let doc = args.file.as_deref().map(LaminationDocument::read).transpose()?;
            let degree = match (&doc, args.degree) {
                (Some(doc), Some(d)) if doc.degree != d => return Err(usage("--degree disagrees with the document")),
                (Some(doc), _) => doc.degree,
                (None, Some(d)) => d,
                (None, None) => return Err(usage("give --file or --degree")),
            };
            let polygon = RotationalOrbit::new(degree, parse_polygon(&args.polygon, degree)?)?;
            let pair = if forward {
                let doc = doc.ok_or_else(|| usage("uni-to-max needs --file with a pullback lamination"))?;
                let c = doc.critical_portrait.as_ref().ok_or_else(|| usage("the document has no critical_portrait"))?;
                uni_to_max(&doc.lamination(), c, &polygon)?
            } else {
                max_to_uni(&polygon)?
            };
            io.emit(json!({ "status": "ok", "pair": pair }))?;
            Ok(true)
        }
        Command::Classify { file, portrait } => {
            let doc = LaminationDocument::read(&file)?;
            let p = match portrait {
                Some(path) => {
                    let text =
                        std::fs::read_to_string(&path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
                    serde_json::from_str::<FixedPointPortrait>(&text)?
                }
                None => doc.portrait().ok_or_else(|| usage("give --portrait or a document with fpp blocks"))??,
            };
            if p.degree() != doc.degree {
                return Err(usage("portrait degree differs from the document"));
            }
            let c = doc.critical_portrait.as_ref().ok_or_else(|| usage("the document has no critical_portrait"))?;
            let lam = doc.lamination();
            let hyperbolic = is_hyperbolic_approx(&lam, c, doc.depth().max(1));
            if !hyperbolic {
                io.emit(json!({ "status": "fail", "hyperbolic": false, "verified_depth": doc.depth() }))?;
                return Ok(false);
            }
            let sectors = fixed_sectors(&p);
            let mut ok = true;
            for s in &sectors {
                match classify_sector(&lam, c, s) {
                    Ok(cls) => io.emit(json!({
                        "status": "ok",
                        "sector": cls.sector,
                        "case": cls.case,
                        "object_type": cls.object_type,
                        "objects": cls.objects,
                        "subtended": cls.subtended,
                        "witness": witness_summary(&cls.witness),
                    }))?,
                    Err(e) => {
                        ok = false;
                        io.emit(json!({ "status": "fail", "sector": s.id, "error": e.to_string() }))?;
                    }
                }
            }
            io.emit(json!({
                "status": if ok { "ok" } else { "fail" },
                "hyperbolic": true,
                "verified_depth": doc.depth(),
                "sectors": sectors.len(),
            }))?;
            Ok(ok)
        }
        Command::Render { file, out, style, labels, size } => {
            if size == 0 {
                return Err(usage("size must be positive"));
            }
            let doc = LaminationDocument::read(&file)?;
            let spec = RenderSpec { size, style, labels, ..RenderSpec::default() };
            std::fs::write(&out, write_svg(&doc, &spec)).map_err(|e| CliError::Io(out.display().to_string(), e))?;
            io.emit(json!({ "status": "ok", "leaves": doc.leaves.len() }))?;
            Ok(true)
        }
    }
}

/// Gap boundaries get long at depth; report their shape rather than every edge.
fn witness_summary(w: &Witness) -> Value {
    match w {
        Witness::Gap(f) => json!({ "gap": { "leaves": f.leaves().len(), "arcs": f.arc_count() } }),
        Witness::Polygon(p) => json!({ "polygon": p.vertices() }),
    }
}

/// Parses `args` (without the program name) and runs the command, writing
/// JSON report lines to `out` and diagnostics to `err`. Returns the exit
/// code: 0 on success, 1 on validation failure, 2 on usage or I/O errors.
pub fn dispatch<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(std::iter::once("lamlab".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut io = Session { out, command: args.join(" ") };
    match run(cli, &mut io) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let code = e.exit_code() as u8;
            if code == 1 {
                let _ = io.emit(json!({ "status": "fail", "error": e.to_string() }));
            } else {
                let _ = writeln!(err, "lamlab: {e}");
            }
            code
        }
    }
}
