//! The `fraisse` command line. Exit codes: 0 when the check holds or the
//! command succeeded, 1 when a check ran and failed, 2 on any error.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::json;

use crate::bounds::{condition_holds, minimal_m, BoundsParams};
use crate::consistency::{is_consistent_with, spoiler_trace_with, ConsistencyOptions, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::families::{
    build_template, diagram_fn, diagram_g, diagram_lineq, gen_fn, gen_g, gen_pn, AbelianGroup,
    Diagram, TreeShape,
};
use crate::io::{diagram_from_json, diagram_to_json, structure_from_json, structure_to_json, to_canonical_json, to_dot};
use crate::morphisms::{enumerate_morphisms, MorphismKind};
use crate::structure::{free_amalgam, Structure};
use crate::verifier::{
    check_confusion, consistency_oracle, fn_family_oracle, g_family_oracle, ClassOracle,
    ConfusionOptions, SweepMode,
};

#[derive(Parser, Debug)]
#[command(name = "fraisse", version, about = "Finite structures, amalgams, consistency and confusing diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a structure or diagram as JSON.
    Gen(GenArgs),
    /// Free amalgam of a diagram.
    Amalgam {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
    },
    /// Search for morphisms between two structures.
    Hom {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, default_value = "hom")]
        kind: String,
        /// Print every morphism, one JSON object per line.
        #[arg(long)]
        all: bool,
        /// Print the number of morphisms.
        #[arg(long)]
        count: bool,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Decide (k,l)-consistency of an instance against a template.
    Consist {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        template: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        l: usize,
        /// Write a spoiler strategy here when inconsistent.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Check that the glued structures of a diagram stay in a class.
    Confuse(ConfuseArgs),
    /// Evaluate the counting condition exactly.
    Bounds {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        find_m: bool,
        #[arg(long, default_value = "1000000")]
        cap: String,
        /// Count atomic types without equality types.
        #[arg(long)]
        no_equality: bool,
    },
    /// Render a structure in Graphviz DOT.
    ExportDot {
        #[arg(long)]
        input: PathBuf,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
        /// Binary relations drawn as undirected edges.
        #[arg(long, value_delimiter = ',')]
        symmetric: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Fn,
    G,
    Lineq,
    Path,
    Template,
}

#[derive(Args, Debug)]
struct GenArgs {
    family: Family,
    #[arg(long)]
    n: Option<usize>,
    /// Cyclic orders, e.g. `2`, `3` or `2x2`.
    #[arg(long, default_value = "2")]
    group: String,
    #[arg(long)]
    shape: Option<String>,
    /// Group element marking the right side of a lineq diagram, e.g. `1` or `0_1`.
    #[arg(long)]
    marking: Option<String>,
    /// Emit the diagram instead of the whole structure.
    #[arg(long)]
    diagram: bool,
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exhaustive,
    Sample,
}

#[derive(Args, Debug)]
struct ConfuseArgs {
    #[arg(long)]
    diagram: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: Mode,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `fn`, `g`, or `lineq:<k>,<l>,<group>`.
    #[arg(long)]
    class: String,
    /// Largest tree size for the `g` class; defaults to the base size plus 2.
    #[arg(long)]
    max_leaves: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Include the verdict of every coloring.
    #[arg(long)]
    outcomes: bool,
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Parse(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

fn write_output(path: &PathBuf, text: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| Error::Parse(format!("stdout: {e}")))
    } else {
        std::fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

fn read_structure(path: &PathBuf) -> Result<Structure> {
    structure_from_json(&read_input(path)?)
}

fn read_diagram(path: &PathBuf) -> Result<Diagram> {
    diagram_from_json(&read_input(path)?)
}

fn need_n(n: Option<usize>) -> Result<usize> {
    n.ok_or_else(|| Error::InvalidParameter("--n is required".into()))
}

fn amalgam_of(d: &Diagram) -> Result<Structure> {
    Ok(free_amalgam(&d.base, &d.left, &d.left_emb, &d.right, &d.right_emb)?.amalgam)
}

fn cmd_gen(args: &GenArgs) -> Result<i32> {
    let group: AbelianGroup = args.group.parse()?;
    let text = match args.family {
        Family::Fn => {
            let n = need_n(args.n)?;
            if args.diagram {
                diagram_to_json(&diagram_fn(n)?)
            } else {
                structure_to_json(&gen_fn(n)?)
            }
        }
        Family::G => {
            let shape: TreeShape = args.shape.as_deref().unwrap_or("((..)(..))").parse()?;
            if args.diagram {
                diagram_to_json(&diagram_g(&shape)?)
            } else {
                structure_to_json(&gen_g(&shape)?)
            }
        }
        Family::Lineq => {
            let n = need_n(args.n)?;
            let a = args.marking.as_deref().map(|s| group.parse_element(s)).transpose()?;
            let d = diagram_lineq(n, &group, a.as_deref())?;
            if args.diagram {
                diagram_to_json(&d)
            } else {
                structure_to_json(&amalgam_of(&d)?)
            }
        }
        Family::Path => structure_to_json(&gen_pn(need_n(args.n)?)?),
        Family::Template => structure_to_json(&build_template(&group)),
    };
    write_output(&args.output, &text)?;
    Ok(0)
}

fn parse_class(spec: &str, d: &Diagram, max_leaves: Option<usize>) -> Result<ClassOracle> {
    match spec {
        "fn" => Ok(fn_family_oracle(0)),
        "g" => Ok(g_family_oracle(max_leaves.unwrap_or(d.base.len() + 2))),
        _ => {
            let rest = spec
                .strip_prefix("lineq:")
                .ok_or_else(|| Error::InvalidParameter(format!("unknown class `{spec}`")))?;
            let parts: Vec<&str> = rest.split(',').collect();
            let [k, l, g] = parts.as_slice() else {
                return Err(Error::InvalidParameter("expected lineq:<k>,<l>,<group>".into()));
            };
            let k: usize = k.parse().map_err(|_| Error::Parse(format!("bad k `{k}`")))?;
            let l: usize = l.parse().map_err(|_| Error::Parse(format!("bad l `{l}`")))?;
            let group: AbelianGroup = g.parse()?;
            consistency_oracle(build_template(&group), k, l)
        }
    }
}

fn cmd_confuse(args: &ConfuseArgs) -> Result<i32> {
    let d = read_diagram(&args.diagram)?;
    let oracle = parse_class(&args.class, &d, args.max_leaves)?;
    let mode = match args.mode {
        Mode::Exhaustive => SweepMode::Exhaustive,
        Mode::Sample => SweepMode::Sample {
            count: args.samples,
            seed: args.seed,
        },
    };
    let opts = ConfusionOptions {
        mode,
        jobs: args.jobs,
        record_outcomes: args.outcomes,
    };
    let report = check_confusion(&d, args.m, &opts, &oracle)?;
    write_output(&PathBuf::from("-"), &to_canonical_json(&report)?)?;
    Ok(if report.verdict { 0 } else { 1 })
}

fn parse_big(s: &str, what: &str) -> Result<BigUint> {
    s.parse().map_err(|_| Error::Parse(format!("bad {what} `{s}`")))
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(args) => cmd_gen(&args),
        Command::Amalgam { diagram, output } => {
            let d = read_diagram(&diagram)?;
            write_output(&output, &structure_to_json(&amalgam_of(&d)?))?;
            Ok(0)
        }
        Command::Hom {
            from,
            to,
            kind,
            all,
            count,
            limit,
        } => {
            let a = read_structure(&from)?;
            let b = read_structure(&to)?;
            let kind: MorphismKind = kind.parse()?;
            let limit = if all || count { limit } else { Some(1) };
            let maps = enumerate_morphisms(&a, &b, kind, limit)?;
            let mut text = String::new();
            if all {
                for f in &maps {
                    text.push_str(&serde_json::to_string(f).unwrap());
                    text.push('\n');
                }
            }
            if count {
                text.push_str(&format!("{}\n", maps.len()));
            }
            if !all && !count {
                text = match maps.first() {
                    Some(f) => to_canonical_json(f)?,
                    None => "null\n".into(),
                };
            }
            write_output(&PathBuf::from("-"), &text)?;
            Ok(if maps.is_empty() { 1 } else { 0 })
        }
        Command::Consist {
            instance,
            template,
            k,
            l,
            trace,
            budget,
        } => {
            let a = read_structure(&instance)?;
            let b = read_structure(&template)?;
            let opts = ConsistencyOptions { budget };
            let consistent = is_consistent_with(&a, &b, k, l, &opts)?;
            if !consistent {
                if let Some(path) = trace {
                    let t = spoiler_trace_with(&a, &b, k, l, &opts)?.expect("inconsistent instance has a trace");
                    write_output(&path, &to_canonical_json(&t)?)?;
                }
            }
            let report = json!({ "consistent": consistent, "k": k, "l": l, "instanceSize": a.len() });
            write_output(&PathBuf::from("-"), &to_canonical_json(&report)?)?;
            Ok(if consistent { 0 } else { 1 })
        }
        Command::Confuse(args) => cmd_confuse(&args),
        Command::Bounds {
            n,
            r,
            t,
            m,
            find_m,
            cap,
            no_equality,
        } => {
            let include_equality = !no_equality;
            let report = if find_m {
                let cap = parse_big(&cap, "cap")?;
                match minimal_m(n, r, t, &cap, include_equality)? {
                    Some(m) => {
                        let at = condition_holds(&BoundsParams { n, r, t, m: m.clone(), include_equality })?;
                        let below = if m > BigUint::from(1u32) {
                            let prev = &m - 1u32;
                            Some(condition_holds(&BoundsParams { n, r, t, m: prev, include_equality })?)
                        } else {
                            None
                        };
                        json!({ "minimalM": m.to_string(), "report": at, "previous": below })
                    }
                    None => json!({ "minimalM": null, "cap": cap.to_string() }),
                }
            } else {
                let m = parse_big(
                    m.as_deref()
                        .ok_or_else(|| Error::InvalidParameter("--m or --find-m is required".into()))?,
                    "m",
                )?;
                serde_json::to_value(condition_holds(&BoundsParams { n, r, t, m, include_equality })?).unwrap()
            };
            write_output(&PathBuf::from("-"), &to_canonical_json(&report)?)?;
            Ok(0)
        }
        Command::ExportDot {
            input,
            output,
            symmetric,
        } => {
            let s = read_structure(&input)?;
            let sym: Vec<&str> = symmetric.iter().map(String::as_str).collect();
            write_output(&output, &to_dot(&s, &sym))?;
            Ok(0)
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
