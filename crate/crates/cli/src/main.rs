//! `billiards`: command-line front end for the polygonal billiards library.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use billiards::billiard::{is_periodic, iterate, Periodicity, PhasePoint, Termination};
use billiards::codes::{merge_reversal, validate_code};
use billiards::compare::{best_labeling, compare_spectra, sig12, ComparisonReport, Verdict};
use billiards::document::parse_document;
use billiards::geom::{classify, IsometryClass, Segment, EPS_ISO};
use billiards::periodic::{
    enumerate_spectrum, realize_rotation, NoFamily, SpectrumOptions, CLOSURE_TOL, DEFAULT_BUDGET,
};
use billiards::polygon::{recognize_fraction, RationalityKind};
use billiards::unfold::{find_saddle_connections, unfold_code, UnfoldError};
use billiards::Polygon;

const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_CORNER: u8 = 4;
const EXIT_PARTIAL: u8 = 5;
const EXIT_SIDES: u8 = 6;
const EXIT_REPEAT: u8 = 7;

#[derive(Parser)]
#[command(name = "billiards", version, about = "Symbolic dynamics of polygonal billiard tables")]
struct Cli {
    /// Read and print angles in radians instead of degrees.
    #[arg(long, global = true)]
    radians: bool,
    /// Phase-space closure tolerance (default 1e-7 times the table diameter).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Node cap for spectrum searches.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a table description and report its angles and rationality.
    Validate { file: PathBuf },
    /// Follow one orbit and print its itinerary.
    Simulate {
        file: PathBuf,
        /// Starting side (label or 1-based index).
        #[arg(long)]
        side: String,
        /// Position along the side, in (0, 1).
        #[arg(long)]
        s: f64,
        /// Angle from the inward normal, positive toward the side's direction.
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        /// Number of bounces.
        #[arg(short, long, default_value_t = 10)]
        n: usize,
        /// Write the table and orbit as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Enumerate periodic codes up to a length bound.
    Spectrum {
        file: PathBuf,
        /// Maximum code length (even).
        #[arg(short = 'L', long = "length")]
        length: usize,
        /// Write the spectrum here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print code lines only.
        #[arg(long)]
        codes_only: bool,
        /// Merge each code with its reversal. This identifies classes the
        /// code relation keeps apart; exploration only.
        #[arg(long)]
        merge_reversal: bool,
    },
    /// Compare the spectra of two tables and look for a similarity.
    Compare {
        p: PathBuf,
        q: PathBuf,
        /// Maximum code length (even).
        #[arg(short = 'L', long = "length")]
        length: usize,
        /// `auto` or a cyclic offset.
        #[arg(long, default_value = "auto")]
        labeling: String,
        /// With `auto`, also try clockwise identifications.
        #[arg(long)]
        reflected: bool,
    },
    /// Unfold a symbol sequence into a corridor of reflected copies.
    Unfold {
        file: PathBuf,
        /// Comma-separated side labels, e.g. l,r,t,l,r,b.
        code: String,
        /// Write the corridor as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// List corner-to-corner connections.
    Saddle {
        file: PathBuf,
        /// Maximum number of straight flights.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
}

/// Error carrying the process exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::new(EXIT_PARSE, format!("{e:#}"))
    }
}

type Outcome = Result<u8, Failure>;

fn load(path: &Path) -> Result<Polygon, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let doc = parse_document(&text)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    doc.to_polygon()
        .map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))
}

fn parse_word(p: &Polygon, text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            p.parse_side(t)
                .ok_or_else(|| Failure::new(EXIT_PARSE, format!("unknown side {t:?}")))
        })
        .collect()
}

fn format_word(p: &Polygon, word: &[usize]) -> String {
    word.iter()
        .map(|&s| p.label(s))
        .collect::<Vec<_>>()
        .join(",")
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::from)
}

struct Ctx {
    radians: bool,
    tol: Option<f64>,
    opts: SpectrumOptions,
}

impl Ctx {
    fn angle_out(&self, rad: f64) -> String {
        sig12(if self.radians { rad } else { rad.to_degrees() })
    }

    fn angle_in(&self, value: f64) -> f64 {
        if self.radians {
            value
        } else {
            value.to_radians()
        }
    }

    fn closure_tol(&self, p: &Polygon) -> f64 {
        self.tol.unwrap_or(CLOSURE_TOL * p.diameter().max(1.0))
    }
}

/// `angle` as a multiple of π when it is a simple fraction.
fn pi_multiple(angle: f64) -> String {
    use std::f64::consts::PI;
    // Report rotation angles in (-π, π].
    let angle = if angle <= -PI + 1e-9 { angle + 2.0 * PI } else { angle };
    let x = angle / PI;
    match recognize_fraction(x.abs(), 64, 1e-9) {
        Some((num, den)) => {
            let sign = if x < 0.0 { "-" } else { "" };
            let num = if num == 1 { String::new() } else { num.to_string() };
            let den = if den == 1 { String::new() } else { format!("/{den}") };
            format!("{sign}{num}π{den}")
        }
        None => sig12(angle),
    }
}

fn describe_class(class: &IsometryClass) -> String {
    let pt = |p: billiards::Point2| format!("({}, {})", sig12(p.x), sig12(p.y));
    match class {
        IsometryClass::Identity => "identity".to_string(),
        IsometryClass::Translation { vector } => format!("translation {}", pt(*vector)),
        IsometryClass::Rotation { center, angle } => {
            format!("rotation {} about {}", pi_multiple(*angle), pt(*center))
        }
        IsometryClass::Reflection { point, direction } => {
            format!("reflection in the line through {} along {}", pt(*point), pt(*direction))
        }
        IsometryClass::Glide {
            point,
            direction,
            vector,
        } => format!(
            "glide reflection along the line through {} in direction {} by {}",
            pt(*point),
            pt(*direction),
            pt(*vector)
        ),
    }
}

fn cmd_validate(ctx: &Ctx, file: &Path) -> Outcome {
    let p = load(file)?;
    let info = p.rationality();
    let verdict = match info.kind {
        RationalityKind::Rational => format!(
            "rational N={}",
            info.n.expect("rational tables have N")
        ),
        RationalityKind::Irrational => "irrational".to_string(),
        RationalityKind::Undetermined => "undetermined".to_string(),
    };
    println!("k={} {verdict}", p.k());
    let angles: Vec<String> = p.angles().iter().map(|&a| ctx.angle_out(a)).collect();
    let unit = if ctx.radians { "rad" } else { "deg" };
    println!("angles ({unit}): {}", angles.join(" "));
    if info.is_rational() {
        let fr: Vec<String> = info.fractions.iter().map(|f| f.to_string()).collect();
        println!("angles (π): {}", fr.join(" "));
    }
    if p.was_reoriented() {
        println!("note: vertices were listed clockwise and have been reversed");
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    ctx: &Ctx,
    file: &Path,
    side: &str,
    s: f64,
    theta: f64,
    n: usize,
    svg_out: Option<&Path>,
) -> Outcome {
    let p = load(file)?;
    let side = p
        .parse_side(side)
        .ok_or_else(|| Failure::new(EXIT_PARSE, format!("unknown side {side:?}")))?;
    let u = PhasePoint::new(side, s, ctx.angle_in(theta));
    if !u.is_valid(&p) {
        return Err(Failure::new(
            EXIT_PARSE,
            "start needs 0 < s < 1 and an angle strictly inside (-90°, 90°)",
        ));
    }
    let orbit = iterate(&p, &u, n);
    println!("{}", format_word(&p, &orbit.itinerary.symbols));
    println!("termination: {}", orbit.termination.describe());
    if let Periodicity::Periodic { period } = is_periodic(&p, &u, n, ctx.closure_tol(&p)) {
        println!("periodic: period {period}");
    }
    if let Some(path) = svg_out {
        let mut feet: Vec<_> = orbit.points.iter().map(|q| q.foot(&p)).collect();
        if let Termination::CornerHit { vertex, .. } = orbit.termination {
            feet.push(p.vertex(vertex));
        }
        write_out(path, &svg::table_svg(&p, &feet, "orbit"))?;
    }
    Ok(match orbit.termination {
        Termination::CornerHit { step: 1, .. } => EXIT_CORNER,
        _ => 0,
    })
}

fn cmd_spectrum(
    ctx: &Ctx,
    file: &Path,
    length: usize,
    out: Option<&Path>,
    codes_only: bool,
    merge: bool,
) -> Outcome {
    let p = load(file)?;
    let sp = enumerate_spectrum(&p, length, ctx.opts)
        .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let mut text = if merge {
        let mut lines: Vec<String> = sp
            .families
            .values()
            .map(|f| merge_reversal(&f.code).format_with(|s| p.label(s).to_string()))
            .collect();
        lines.sort();
        lines.dedup();
        let mut t = String::from("# reversal pairs merged\n");
        for l in lines {
            t.push_str(&l);
            t.push('\n');
        }
        t
    } else if codes_only {
        sp.codes_text(&p)
    } else {
        sp.serialize(&p)
    };
    if (merge || codes_only) && sp.partial {
        text.insert_str(0, "# PARTIAL\n");
    }
    match out {
        Some(path) => {
            write_out(path, &text)?;
            println!("{} codes", sp.len());
        }
        None => {
            print!("{text}");
            eprintln!("{} codes", sp.len());
        }
    }
    if sp.partial {
        eprintln!("node budget exhausted; the spectrum is partial");
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn cmd_compare(
    ctx: &Ctx,
    pf: &Path,
    qf: &Path,
    length: usize,
    labeling: &str,
    reflected: bool,
) -> Outcome {
    let p = load(pf)?;
    let q = load(qf)?;
    if p.k() != q.k() {
        return Err(Failure::new(
            EXIT_SIDES,
            format!("SideCountMismatch: {} sides against {}", p.k(), q.k()),
        ));
    }
    let report: ComparisonReport = if labeling == "auto" {
        let best = best_labeling(&p, &q, length, reflected, ctx.opts)
            .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
        print!("{}", best.report.to_text());
        let eq: Vec<String> = best
            .equal_labelings
            .iter()
            .map(|&(o, r)| if r { format!("{o}r") } else { o.to_string() })
            .collect();
        println!(
            "equal_offsets: {}",
            if eq.is_empty() { "none".to_string() } else { eq.join(" ") }
        );
        best.report
    } else {
        let offset: usize = labeling
            .parse()
            .map_err(|_| Failure::new(EXIT_PARSE, "labeling must be 'auto' or an offset"))?;
        let r = compare_spectra(&p, &q, length, offset, ctx.opts)
            .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
        print!("{}", r.to_text());
        r
    };
    Ok(match report.verdict {
        Verdict::EqualToDepth => 0,
        Verdict::Differ => 1,
        Verdict::InconclusivePartial => EXIT_PARTIAL,
    })
}

fn cmd_unfold(ctx: &Ctx, file: &Path, code: &str, svg_out: Option<&Path>) -> Outcome {
    let p = load(file)?;
    let word = parse_word(&p, code)?;
    let corridor = unfold_code(&p, &word).map_err(|e| match e {
        UnfoldError::RepeatedSymbol { .. } => Failure::new(EXIT_REPEAT, e.to_string()),
        _ => Failure::new(EXIT_PARSE, e.to_string()),
    })?;
    // The chord runs through copies 1..=m; copy 0 is the table itself.
    println!("copies: {}", corridor.frames.len() - 1);
    let class = classify(corridor.terminal(), EPS_ISO);
    match class {
        IsometryClass::Translation { .. } => println!("terminal: {}", describe_class(&class)),
        _ => println!("terminal: NotTranslation: {}", describe_class(&class)),
    }

    let mut chord = None;
    let mut bounds = Vec::new();
    match validate_code(&word, p.k()) {
        Err(e) => println!("interval: none (not a closed code: {e})"),
        Ok(code) => {
            let n = word.len();
            let start = (0..n)
                .find(|&r| {
                    let mut w = code.word().to_vec();
                    w.rotate_left(r);
                    w == word
                })
                .expect("validated word is a rotation of its canonical form");
            match realize_rotation(&p, &code, start) {
                Err(NoFamily::NotTranslation(_)) => {
                    println!("interval: none (terminal is not a translation)")
                }
                Err(NoFamily::EmptyCorridor) => println!("interval: empty (EmptyCorridor)"),
                Ok(f) => {
                    let iv = f.base_interval;
                    println!("interval: ({}, {})", sig12(iv.lo), sig12(iv.hi));
                    println!("direction: {}", ctx.angle_out(f.direction.angle()));
                    println!("length: {}", sig12(f.length));
                    println!("width: {}", sig12(f.width));
                    if f.marginal {
                        println!("note: marginal family (width below 1e-9)");
                    }
                    let base = p.side(f.base_side);
                    let seg = |s: f64| Segment::new(base.at(s), base.at(s) + f.translation);
                    chord = Some(seg(iv.midpoint()));
                    bounds = vec![seg(iv.lo), seg(iv.hi)];
                }
            }
        }
    }
    if let Some(path) = svg_out {
        let title = format!("unfolding of {}", format_word(&p, &word));
        write_out(
            path,
            &svg::unfolding_svg(&p, &corridor, chord, &bounds, &title),
        )?;
    }
    Ok(0)
}

fn cmd_saddle(ctx: &Ctx, file: &Path, depth: usize) -> Outcome {
    if depth == 0 {
        return Err(Failure::new(EXIT_PARSE, "depth must be at least 1"));
    }
    let p = load(file)?;
    for c in find_saddle_connections(&p, depth) {
        let code = if c.code.is_empty() {
            "-".to_string()
        } else {
            format_word(&p, &c.code)
        };
        println!(
            "{} {} {} {} {}",
            c.start,
            c.end,
            code,
            ctx.angle_out(billiards::polygon::normalize_angle(c.direction)),
            sig12(c.length)
        );
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx {
        radians: cli.radians,
        tol: cli.tol,
        opts: SpectrumOptions { budget: cli.budget },
    };
    match &cli.command {
        Command::Validate { file } => cmd_validate(&ctx, file),
        Command::Simulate {
            file,
            side,
            s,
            theta,
            n,
            svg,
        } => cmd_simulate(&ctx, file, side, *s, *theta, *n, svg.as_deref()),
        Command::Spectrum {
            file,
            length,
            out,
            codes_only,
            merge_reversal,
        } => cmd_spectrum(&ctx, file, *length, out.as_deref(), *codes_only, *merge_reversal),
        Command::Compare {
            p,
            q,
            length,
            labeling,
            reflected,
        } => cmd_compare(&ctx, p, q, *length, labeling, *reflected),
        Command::Unfold { file, code, svg } => cmd_unfold(&ctx, file, code, svg.as_deref()),
        Command::Saddle { file, depth } => cmd_saddle(&ctx, file, *depth),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
