//! The `mkh` command line.
//!
//! Exit codes: 0 ok, 2 parse error, 3 validation or computation error,
//! 4 bad options, 5 unreadable input file.

use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::diagram::{Diagram, DiagramError, Sign, Strand};
use crate::homology::{chi_h, compute, euler, graded_complex, HomologyError, Theory};
use crate::khovanov::{build_complex, KhError};
use crate::spectral::{scenario, Scenario, SpectralError};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_OPTIONS: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "mkh", version, about = "Khovanov homology of links in punctured disks")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TheoryArg {
    Kh,
    Akh,
    Mkh,
    Aps,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    ApsToMkh,
    MkhToAkh,
    MkhToKh,
    MkhToMkh,
}

#[derive(clap::Args, Debug)]
struct TheoryOpts {
    #[arg(long, value_enum)]
    theory: TheoryArg,
    /// Puncture kept by akh (1-based).
    #[arg(long)]
    puncture: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Homology table of a diagram.
    Compute {
        #[command(flatten)]
        theory: TheoryOpts,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        file: PathBuf,
    },
    /// Graded Euler characteristic; for aps also its image under x_S -> product of y_i over S.
    Euler {
        #[command(flatten)]
        theory: TheoryOpts,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        file: PathBuf,
    },
    /// Spectral sequence between two refinements.
    Ss {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        /// Kept punctures (1-based, comma separated) for mkh-to-akh and mkh-to-mkh.
        #[arg(long, value_delimiter = ',')]
        keep: Vec<usize>,
        /// Last page printed before E_inf.
        #[arg(long)]
        r_max: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        file: PathBuf,
    },
    /// Generators and differential of the graded complex of a theory.
    GrDump {
        #[command(flatten)]
        theory: TheoryOpts,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        file: PathBuf,
    },
    /// Applies a script of r1/r2 moves and prints the resulting diagram.
    Moves {
        file: PathBuf,
        script: PathBuf,
        /// Write the diagram here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<DiagramError> for Failure {
    fn from(e: DiagramError) -> Self {
        let code = if matches!(e, DiagramError::Malformed(_)) { EXIT_PARSE } else { EXIT_INVALID };
        Failure::new(code, e.to_string())
    }
}

impl From<KhError> for Failure {
    fn from(e: KhError) -> Self {
        match e {
            KhError::Diagram(d) => d.into(),
            e => Failure::new(EXIT_INVALID, e.to_string()),
        }
    }
}

impl From<HomologyError> for Failure {
    fn from(e: HomologyError) -> Self {
        match e {
            HomologyError::Khovanov(k) => k.into(),
            e @ HomologyError::BadPuncture { .. } => Failure::new(EXIT_OPTIONS, e.to_string()),
        }
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Homology(h) => h.into(),
            e @ SpectralError::BadSubset(..) => Failure::new(EXIT_OPTIONS, e.to_string()),
            e => Failure::new(EXIT_INVALID, e.to_string()),
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code with either the output or a diagnostic.
pub fn run(args: &[String]) -> (i32, String) {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_OPTIONS,
            };
            return (code, e.render().to_string());
        }
    };
    match dispatch(cli.verb) {
        Ok(out) => (0, out),
        Err(f) => (f.code, format!("error: {}\n", f.message)),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Diagram, Failure> {
    Ok(Diagram::parse(&read(path)?)?)
}

fn theory_of(opts: &TheoryOpts, d: &Diagram) -> Result<Theory, Failure> {
    let n = d.n_punctures();
    match (opts.theory, opts.puncture) {
        (TheoryArg::Akh, None) => Err(Failure::new(EXIT_OPTIONS, "--theory akh needs --puncture")),
        (TheoryArg::Akh, Some(k)) if k == 0 || k > n => {
            Err(Failure::new(EXIT_OPTIONS, format!("puncture {k} is not in 1..={n}")))
        }
        (TheoryArg::Akh, Some(k)) => Ok(Theory::AKh(k)),
        (_, Some(_)) => Err(Failure::new(EXIT_OPTIONS, "--puncture only applies to --theory akh")),
        (TheoryArg::Kh, None) => Ok(Theory::Kh),
        (TheoryArg::Mkh, None) => Ok(Theory::MKh),
        (TheoryArg::Aps, None) => Ok(Theory::ApsTilde),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn dispatch(verb: Verb) -> Result<String, Failure> {
    match verb {
        Verb::Compute { theory, format, file } => {
            let d = load(&file)?;
            let t = compute(&d, theory_of(&theory, &d)?)?;
            Ok(match format {
                Format::Text => t.to_text(),
                Format::Json => pretty(&t.to_json()),
            })
        }
        Verb::Euler { theory, format, file } => {
            let d = load(&file)?;
            let th = theory_of(&theory, &d)?;
            let chi = euler(&compute(&d, th)?);
            let collapsed = matches!(th, Theory::ApsTilde).then(|| chi_h(&chi));
            Ok(match format {
                Format::Text => {
                    let mut s = format!("{th}: {chi}\n");
                    if let Some(c) = &collapsed {
                        s += &format!("collapsed: {c}\n");
                    }
                    s
                }
                Format::Json => {
                    let mut v = json!({"kind": th.to_string(), "euler": chi.to_string()});
                    if let Some(c) = &collapsed {
                        v["collapsed"] = json!(c.to_string());
                    }
                    pretty(&v)
                }
            })
        }
        Verb::Ss { scenario: which, keep, r_max, format, file } => {
            let d = load(&file)?;
            let which = match (which, keep.as_slice()) {
                (ScenarioArg::ApsToMkh, []) => Scenario::ApsToMkh,
                (ScenarioArg::MkhToKh, []) => Scenario::MkhToKh,
                (ScenarioArg::MkhToAkh, [k]) => Scenario::MkhToAkh(*k),
                (ScenarioArg::MkhToAkh, _) => {
                    return Err(Failure::new(EXIT_OPTIONS, "mkh-to-akh needs exactly one --keep puncture"))
                }
                (ScenarioArg::MkhToMkh, _) => Scenario::MkhToMkh(keep.clone()),
                (_, _) => return Err(Failure::new(EXIT_OPTIONS, "--keep only applies to mkh-to-akh and mkh-to-mkh")),
            };
            if let Scenario::MkhToAkh(k) = which {
                if k == 0 || k > d.n_punctures() {
                    return Err(Failure::new(EXIT_OPTIONS, format!("puncture {k} is not in 1..={}", d.n_punctures())));
                }
            }
            let mut report = scenario(&d, &which)?;
            if let Some(r) = r_max {
                report.pages.truncate(r + 1);
            }
            Ok(match format {
                Format::Text => report.to_text(),
                Format::Json => pretty(&report.to_json()),
            })
        }
        Verb::GrDump { theory, format, file } => {
            let d = load(&file)?;
            let th = theory_of(&theory, &d)?;
            gr_dump(&d, th, format)
        }
        Verb::Moves { file, script, output } => {
            let mut d = load(&file)?;
            let text = read(&script)?;
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                d = apply_move(&d, line).map_err(|f| Failure::new(f.code, format!("line {}: {}", n + 1, f.message)))?;
            }
            let out = d.to_json() + "\n";
            match output {
                Some(p) => {
                    std::fs::write(&p, &out).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", p.display())))?;
                    Ok(String::new())
                }
                None => Ok(out),
            }
        }
    }
}

fn gr_dump(d: &Diagram, th: Theory, format: Format) -> Result<String, Failure> {
    use crate::homology::DegreeKey;
    let kc = build_complex(d)?;
    let gr = graded_complex(&kc.complex, th)?;
    let labels = |i: usize| kc.generators[i].labels.iter().map(|l| l.to_string()).collect::<String>();
    let vertex =
        |i: usize| kc.generators[i].vertex_bits(kc.n_crossings).iter().map(|b| b.to_string()).collect::<String>();
    let entries: Vec<(usize, usize, String)> = gr.entries().map(|(i, j, c)| (i, j, c.to_string())).collect();
    Ok(match format {
        Format::Text => {
            let mut s = format!("{th} graded complex: {} generators, {} entries\n", gr.degrees.len(), entries.len());
            for (i, g) in gr.degrees.iter().enumerate() {
                let key = DegreeKey::of(th, g);
                s += &format!("g{i} vertex={} labels={} h={} q={} key={key}\n", vertex(i), labels(i), g.h, g.q);
            }
            for (i, j, c) in &entries {
                s += &format!("d g{i} -> g{j} {c}\n");
            }
            s
        }
        Format::Json => {
            let gens: Vec<Value> = gr
                .degrees
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    json!({"index": i, "vertex": vertex(i), "labels": labels(i), "h": g.h, "q": g.q,
                        "key": DegreeKey::of(th, g).to_json()})
                })
                .collect();
            let d: Vec<Value> = entries.iter().map(|(i, j, c)| json!({"from": i, "to": j, "coeff": c})).collect();
            pretty(&json!({"kind": th.to_string(), "generators": gens, "differential": d}))
        }
    })
}

fn apply_move(d: &Diagram, line: &str) -> Result<Diagram, Failure> {
    let bad = |m: String| Failure::new(EXIT_PARSE, m);
    let mut words = line.split_whitespace();
    let verb = words.next().unwrap_or_default();
    let mut fields = std::collections::BTreeMap::new();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {w:?}")))?;
        fields.insert(k, v);
    }
    let num = |k: &str| -> Result<Option<u32>, Failure> {
        fields.get(k).map(|v| v.parse::<u32>().map_err(|_| bad(format!("{k}={v} is not a number")))).transpose()
    };
    let strand = |arc: &str, lp: &str| -> Result<Strand, Failure> {
        match (num(arc)?, num(lp)?) {
            (Some(a), None) => Ok(Strand::Arc(a)),
            (None, Some(l)) => Ok(Strand::Loop(l as usize)),
            _ => Err(bad(format!("give exactly one of {arc}= and {lp}="))),
        }
    };
    let moved = match verb {
        "r1" => {
            let s = match fields.get("chirality").copied() {
                Some("+") => Sign::Pos,
                Some("-") => Sign::Neg,
                other => return Err(bad(format!("chirality must be + or -, got {other:?}"))),
            };
            d.apply_r1(strand("arc", "loop")?, s)
        }
        "r2" => d.apply_r2(strand("arc1", "loop1")?, strand("arc2", "loop2")?),
        other => return Err(bad(format!("unknown move {other:?}"))),
    };
    Ok(moved?)
}
