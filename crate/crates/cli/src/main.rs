use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use polybounce::analysis::{
    compare_spectra, enumerate_generalized_diagonals, flag_singular_words, periodic_orbit_for_word,
    sample_bounce_language, SpectrumComparison,
};
use polybounce::flow::{format_word, parse_word, Termination};
use polybounce::io::{parse_glued, parse_table, parse_word_list, write_word_list};
use polybounce::numeric::set_float_tolerance;
use polybounce::surface::cutting_sequence;
use polybounce::svg::{render_svg, Scene};
use polybounce::unfolding::{build_rational_unfolding, unfold_word};
use polybounce::{trace, trace_backward, Direction, Exact, Label, LabeledTable, Point2, RayState, Scalar, F64};

#[derive(Parser)]
#[command(name = "polybounce", version, about = "Billiards in polygons: bounce words, unfoldings, periodic orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    F64,
}

#[derive(Args, Clone)]
struct Common {
    /// Arithmetic backend.
    #[arg(long, value_enum, default_value = "exact")]
    backend: Backend,
    /// Relative tolerance for the f64 backend.
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// Seed for sampling commands.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Trace a trajectory and print its bounce word.
    Bounce {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true)]
        start: Vec<String>,
        #[arg(long, num_args = 2, value_names = ["DX", "DY"], allow_hyphen_values = true)]
        dir: Vec<String>,
        #[arg(long)]
        bounces: usize,
        #[arg(long)]
        backward: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Decide whether a word is the bounce word of a periodic orbit.
    Periodic {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        word: String,
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate generalized diagonals leaving a vertex.
    Diagonals {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        vertex: usize,
        #[arg(long)]
        max_len: String,
        #[command(flatten)]
        common: Common,
    },
    /// Unfold along a word, or build the rational translation-surface unfolding.
    Unfold {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, conflicts_with = "rational", required_unless_present = "rational")]
        word: Option<String>,
        #[arg(long)]
        rational: bool,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample the length-k bounce language.
    Spectrum {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the sampled languages of two tables under a label map.
    Compare {
        #[arg(long)]
        table1: PathBuf,
        #[arg(long)]
        table2: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        budget: usize,
        /// Comma-separated `a=b` pairs.
        #[arg(long)]
        map: String,
        #[command(flatten)]
        common: Common,
    },
    /// Cutting sequence of a straight line on an edge-paired polygon.
    Cutting {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true)]
        start: Vec<String>,
        #[arg(long, num_args = 2, value_names = ["DX", "DY"], allow_hyphen_values = true)]
        dir: Vec<String>,
        #[arg(long)]
        crossings: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Flag language words whose ends shadow generalized diagonals.
    FlagSingular {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        diagonals: PathBuf,
        #[arg(long)]
        suffix: usize,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_svg(path: &Path, scene: &Scene) -> Result<()> {
    let svg = render_svg(scene)?;
    fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))
}

fn scalar<S: Scalar>(s: &str) -> Result<S> {
    S::parse_literal(s).map_err(|e| anyhow!("{e}"))
}

fn point<S: Scalar>(v: &[String]) -> Result<Point2<S>> {
    Ok(Point2::new(scalar(&v[0])?, scalar(&v[1])?))
}

fn direction<S: Scalar>(v: &[String]) -> Result<Direction<S>> {
    Ok(Direction::new(scalar(&v[0])?, scalar(&v[1])?)?)
}

fn load_table<S: Scalar>(path: &Path) -> Result<LabeledTable<S>> {
    Ok(parse_table(&read(path)?)?)
}

fn fmt<S: Scalar>(v: &S) -> String {
    v.format()
}

/// Width as an exact value when it has a rational square root, else `sqrt(w^2)`.
fn fmt_width<S: Scalar>(sq: &S) -> String {
    match sq.sqrt_exact() {
        Some(w) => w.format(),
        None => format!("sqrt({})", sq.format()),
    }
}

fn parse_map(s: &str) -> Result<BTreeMap<Label, Label>> {
    s.split(',')
        .map(|pair| {
            let (a, b) = pair.split_once('=').ok_or_else(|| anyhow!("bad map entry `{pair}`, expected a=b"))?;
            Ok((Label::from(a.trim()), Label::from(b.trim())))
        })
        .collect()
}

fn run<S: Scalar>(command: Command) -> Result<String> {
    let mut out = String::new();
    match command {
        Command::Bounce { table, start, dir, bounces, backward, svg, .. } => {
            let t: LabeledTable<S> = load_table(&table)?;
            let state = RayState::new(point(&start)?, direction(&dir)?);
            let tr = trace(&t, &state, bounces)?;
            let word: Vec<Label> = tr.hits.iter().map(|h| h.label.clone()).collect();
            writeln!(out, "{}", format_word(&word))?;
            if let Termination::SingularHit { vertex, .. } = tr.terminated_by {
                writeln!(out, "singular vertex {vertex}")?;
            }
            if let Some(m) = backward {
                let bt = trace_backward(&t, &state, m)?;
                let w: Vec<Label> = bt.hits.iter().map(|h| h.label.clone()).collect();
                writeln!(out, "backward {}", format_word(&w))?;
                if let Some(v) = bt.singular_vertex() {
                    writeln!(out, "backward singular vertex {v}")?;
                }
            }
            if let Some(path) = svg {
                write_svg(&path, &Scene::trajectory(&t, &tr))?;
            }
        }
        Command::Periodic { table, word, .. } => {
            let t: LabeledTable<S> = load_table(&table)?;
            let w = parse_word(&word);
            let r = periodic_orbit_for_word(&t, &w)?;
            let (tx, ty) = match &r.translation {
                Some(v) if r.exists => (fmt(&v.x), fmt(&v.y)),
                _ => ("-".into(), "-".into()),
            };
            let width = match (&r.family_width_sq, r.exists) {
                (Some(sq), true) => fmt_width(sq),
                _ => "-".into(),
            };
            writeln!(out, "{}\t{}\t{}\t{}\t{}", format_word(&w), r.exists, tx, ty, width)?;
            writeln!(out, "# reason {:?}{}", r.reason, if r.doubled { " doubled" } else { "" })?;
        }
        Command::Diagonals { table, vertex, max_len, .. } => {
            let t: LabeledTable<S> = load_table(&table)?;
            let max: S = scalar(&max_len)?;
            for r in enumerate_generalized_diagonals(&t, vertex, &max)? {
                writeln!(out, "{}\t{}\t{}", format_word(&r.word), fmt(&r.length_sq), r.target_vertex)?;
            }
        }
        Command::Unfold { table, word, rational, svg, .. } => {
            let t: LabeledTable<S> = load_table(&table)?;
            if rational {
                let s = build_rational_unfolding(&t)?;
                out.push_str(&s.export());
                if let Some(path) = svg {
                    let scene = Scene {
                        outlines: s
                            .copies
                            .iter()
                            .map(|g| t.vertices().iter().map(|v| g.apply(v).to_f64()).collect())
                            .collect(),
                        ..Scene::default()
                    };
                    write_svg(&path, &scene)?;
                }
            } else {
                let w = parse_word(word.as_deref().unwrap_or(""));
                let c = unfold_word(&t, &w)?;
                writeln!(out, "copies {}", c.copies.len())?;
                for (k, g) in c.gates.iter().enumerate() {
                    writeln!(
                        out,
                        "gate {} {} {} {} {} {}",
                        k + 1,
                        c.word[k],
                        fmt(&g.a.x),
                        fmt(&g.a.y),
                        fmt(&g.b.x),
                        fmt(&g.b.y)
                    )?;
                }
                let m = c.composite();
                writeln!(
                    out,
                    "composite {} {} {} {} {} {}",
                    fmt(&m.linear[0][0]),
                    fmt(&m.linear[0][1]),
                    fmt(&m.linear[1][0]),
                    fmt(&m.linear[1][1]),
                    fmt(&m.translation.x),
                    fmt(&m.translation.y)
                )?;
                if let Some(path) = svg {
                    write_svg(&path, &Scene::corridor(&t, &c, None))?;
                }
            }
        }
        Command::Spectrum { table, k, budget, common } => {
            if k == 0 || budget == 0 {
                bail!("k and budget must be at least 1");
            }
            let t: LabeledTable<S> = load_table(&table)?;
            let l = sample_bounce_language(&t, k, budget, common.seed);
            let p = &l.provenance;
            writeln!(
                out,
                "# k {} budget {} seed {} traced {} singular {} rejected {}",
                l.k, p.budget, p.seed, p.traced, p.singular, p.rejected_starts
            )?;
            let words: Vec<Vec<Label>> = l.words.into_iter().collect();
            out.push_str(&write_word_list(&words));
        }
        Command::Compare { table1, table2, k, budget, map, common } => {
            if k == 0 || budget == 0 {
                bail!("k and budget must be at least 1");
            }
            let t1: LabeledTable<S> = load_table(&table1)?;
            let t2: LabeledTable<S> = load_table(&table2)?;
            let f = parse_map(&map)?;
            let l1 = sample_bounce_language(&t1, k, budget, common.seed);
            let l2 = sample_bounce_language(&t2, k, budget, common.seed);
            match compare_spectra(&l1, &l2, &f)? {
                SpectrumComparison::IndistinguishableAtK => writeln!(out, "indistinguishable k {k}")?,
                SpectrumComparison::Separated { witness_first, witness_second, side } => {
                    let side = match side {
                        polybounce::analysis::Side::OnlyFirst => "first",
                        polybounce::analysis::Side::OnlySecond => "second",
                    };
                    writeln!(
                        out,
                        "separated k {k} witness {} {} only-in {side}",
                        format_word(&witness_first),
                        format_word(&witness_second)
                    )?
                }
            }
        }
        Command::Cutting { surface, start, dir, crossings, svg, .. } => {
            let s = parse_glued::<S>(&read(&surface)?)?;
            let p: Point2<S> = point(&start)?;
            let w = cutting_sequence(&s, &p, &direction(&dir)?, crossings)?;
            writeln!(out, "{}", format_word(&w.symbols))?;
            if w.singular {
                writeln!(out, "singular")?;
            }
            if let Some(path) = svg {
                write_svg(&path, &Scene::cutting(&s, &p, &w))?;
            }
        }
        Command::FlagSingular { language, diagonals, suffix } => {
            let words = parse_word_list(&read(&language)?);
            let diag = parse_word_list(&read(&diagonals)?);
            out.push_str(&write_word_list(&flag_singular_words(&words, &diag, suffix)?));
        }
    }
    Ok(out)
}

fn common(c: &Command) -> Option<&Common> {
    match c {
        Command::Bounce { common, .. }
        | Command::Periodic { common, .. }
        | Command::Diagonals { common, .. }
        | Command::Unfold { common, .. }
        | Command::Spectrum { common, .. }
        | Command::Compare { common, .. }
        | Command::Cutting { common, .. } => Some(common),
        Command::FlagSingular { .. } => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (backend, eps) = common(&cli.command).map_or((Backend::Exact, 1e-9), |c| (c.backend, c.eps));
    if !(eps > 0.0 && eps.is_finite()) {
        eprintln!("error: --eps must be positive");
        return ExitCode::from(2);
    }
    set_float_tolerance(eps);
    let result = match backend {
        Backend::Exact => run::<Exact>(cli.command),
        Backend::F64 => run::<F64>(cli.command),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
