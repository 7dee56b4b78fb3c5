//! Command-line front end. Every command produces a JSON value; `run`
//! renders it and reports whether the process should exit successfully.

use crate::bo_action::{lambda_traced, ActionContext};
use crate::bracketings::{enumerate_bracketings, nerve_statistics, Bracketing};
use crate::cacti::{cact1_compose, cactus_metric, non_associativity_witness, Cactus};
use crate::dendroidal::{compose_omega_tilde, phi_morphism, segal_check, CactusAlgebra, OmegaTildeMorphism, StrictAlgebra};
use crate::operad::{BOElement, Terminal};
use crate::rational::fmt_q;
use crate::sampling::{random_cactus, seeded};
use crate::suites::{run_suite, RunConfig, SUITES};
use crate::trees::{caterpillar, star, PlanarTree, VertexId};
use crate::wconstruction::{compose_w, normalize_w, psi, psi_inverse, WMode, WTree};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "bocacti", version, about = "Bracketed trees, the BO operad and cacti")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Vertex bound for enumerations.
    #[arg(long, global = true, default_value_t = 7)]
    pub limit: usize,
    /// Size of randomized suites.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    /// Random cactus tuples per configuration in the action suite.
    #[arg(long, global = true, default_value_t = 100)]
    pub tuples: usize,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the output to a file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bracketings of a tree.
    Brackets {
        #[command(subcommand)]
        action: BracketsCmd,
    },
    /// The bracketed operad.
    Bo {
        #[command(subcommand)]
        action: BoCmd,
    },
    /// Trees with edge lengths.
    W {
        #[command(subcommand)]
        action: WCmd,
    },
    /// Bracketed dendroidal morphisms.
    Omega {
        #[command(subcommand)]
        action: OmegaCmd,
    },
    /// Cacti with one normalized length.
    Cacti {
        #[command(subcommand)]
        action: CactiCmd,
    },
    /// The action of bracketed trees on cacti.
    BoAction {
        #[command(subcommand)]
        action: ActionCmd,
    },
    /// Run a verification suite, or `all`.
    Verify { suite: String },
    /// Export figure data.
    Figure { name: FigureName },
    /// Print a recorded witness.
    Witness { name: WitnessName },
}

#[derive(Debug, Subcommand)]
pub enum BracketsCmd {
    /// List bracketings of a tree (JSON, or `caterpillar:N`, `star:N`, `corolla:N`).
    Enumerate {
        #[arg(long)]
        tree: String,
        /// Only the maximal bracketings.
        #[arg(long)]
        max: bool,
        /// Only the f-vector and Euler characteristic of the nerve.
        #[arg(long)]
        fvector: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum BoCmd {
    Compose {
        #[arg(long)]
        a: String,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        b: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    W,
    W0,
}

impl From<ModeArg> for WMode {
    fn from(m: ModeArg) -> WMode {
        match m {
            ModeArg::W => WMode::W,
            ModeArg::W0 => WMode::W0,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum WCmd {
    Normalize {
        #[arg(long)]
        tree: String,
        #[arg(long, value_enum, default_value = "w0")]
        mode: ModeArg,
    },
    Compose {
        #[arg(long)]
        a: String,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        b: String,
        #[arg(long, value_enum, default_value = "w0")]
        mode: ModeArg,
    },
    /// Map a W0 tree to a bracketed element.
    Psi {
        #[arg(long)]
        tree: String,
    },
    /// Map a bracketed element to its W0 normal form.
    PsiInverse {
        #[arg(long)]
        element: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgebraArg {
    Terminal,
    Cacti,
}

#[derive(Debug, Subcommand)]
pub enum OmegaCmd {
    /// The composite `g ∘ f`.
    Compose {
        #[arg(long)]
        g: String,
        #[arg(long)]
        f: String,
    },
    /// The image of seeded values under a morphism.
    Image {
        #[arg(long)]
        f: String,
        #[arg(long, value_enum, default_value = "cacti")]
        algebra: AlgebraArg,
    },
    /// Check the Segal condition on seeded values over a tree.
    Segal {
        #[arg(long)]
        tree: String,
        #[arg(long, value_enum, default_value = "cacti")]
        algebra: AlgebraArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum CactiCmd {
    Compose {
        #[arg(long)]
        x: String,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        y: String,
    },
    Validate {
        #[arg(long)]
        x: String,
    },
    Metric {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// The recorded non-associativity witness.
    Witness,
}

#[derive(Debug, Subcommand)]
pub enum ActionCmd {
    Eval {
        #[arg(long)]
        element: String,
        /// A JSON array of cacti.
        #[arg(long)]
        inputs: String,
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FigureName {
    Pentagon,
    Hexagon,
    CactComposition,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WitnessName {
    Nonassoc,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

fn bad(e: impl Display) -> CliError {
    CliError::Input(e.to_string())
}

fn fail(e: impl Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn parse_json(s: &str) -> Result<Value, CliError> {
    serde_json::from_str(s).map_err(bad)
}

fn parse_tree(s: &str) -> Result<PlanarTree, CliError> {
    if let Some((kind, n)) = s.split_once(':') {
        let n: usize = n.parse().map_err(bad)?;
        return match kind {
            "caterpillar" => Ok(caterpillar(n, 1)),
            "star" => Ok(star(n, 2)),
            "corolla" => Ok(PlanarTree::corolla(n)),
            other => Err(CliError::Input(format!("unknown tree family {other:?}"))),
        };
    }
    PlanarTree::from_json(&parse_json(s)?).map_err(bad)
}

fn parse_cactus(s: &str) -> Result<Cactus, CliError> {
    Cactus::from_json(&parse_json(s)?).map_err(bad)
}

fn parse_bo(s: &str) -> Result<BOElement, CliError> {
    BOElement::from_json(&parse_json(s)?).map_err(bad)
}

fn parse_w(s: &str) -> Result<WTree, CliError> {
    WTree::from_json(&parse_json(s)?).map_err(bad)
}

fn parse_tilde(s: &str) -> Result<OmegaTildeMorphism, CliError> {
    OmegaTildeMorphism::from_json(&parse_json(s)?).map_err(bad)
}

/// The outcome of a command: a JSON value, a text rendering and whether
/// every check it ran passed.
pub struct Outcome {
    pub value: Value,
    pub text: String,
    pub success: bool,
}

impl Outcome {
    fn value(value: Value) -> Outcome {
        let text = serde_json::to_string_pretty(&value).expect("serializable");
        Outcome { value, text, success: true }
    }
}

fn bracketings_json(bs: &[Bracketing]) -> Value {
    Value::Array(bs.iter().map(Bracketing::to_json).collect())
}

fn enumerate(tree: &str, max: bool, fvector: bool, limit: usize) -> Result<Outcome, CliError> {
    let t = parse_tree(tree)?;
    if fvector {
        let s = nerve_statistics(&t, limit).map_err(fail)?;
        let f: Vec<String> = s.f_vector.iter().map(u128::to_string).collect();
        let value = json!({"f_vector": f, "euler_characteristic": s.euler_characteristic.to_string()});
        let text = format!("f-vector ({})\neuler characteristic {}", f.join(", "), s.euler_characteristic);
        return Ok(Outcome { value, text, success: true });
    }
    if t.vertex_count() > limit {
        return Err(fail(format!("{} vertices exceed the limit {limit}", t.vertex_count())));
    }
    let poset = enumerate_bracketings(&t).map_err(fail)?;
    let all = poset.bracketings();
    let chosen: Vec<Bracketing> = if max {
        let maximal = poset.maximal();
        poset.elements.iter().zip(&all).filter(|(e, _)| maximal.contains(e)).map(|(_, b)| b.clone()).collect()
    } else {
        all
    };
    let value = json!({"tree": t.to_json(), "count": chosen.len(), "bracketings": bracketings_json(&chosen)});
    let mut text = format!("{} bracketings\n", chosen.len());
    for b in &chosen {
        text.push_str(&b.to_json().to_string());
        text.push('\n');
    }
    Ok(Outcome { value, text: text.trim_end().to_string(), success: true })
}

fn seeded_values(seed: u64, t: &PlanarTree) -> BTreeMap<VertexId, Cactus> {
    let mut rng = seeded(seed);
    let ix = t.index();
    ix.vertices.iter().map(|v| (*v, random_cactus(&mut rng, ix.arity(*v).max(1)))).collect()
}

fn omega(cmd: &OmegaCmd, seed: u64) -> Result<Outcome, CliError> {
    match cmd {
        OmegaCmd::Compose { g, f } => {
            let c = compose_omega_tilde(&parse_tilde(g)?, &parse_tilde(f)?).map_err(fail)?;
            Ok(Outcome::value(c.to_json()))
        }
        OmegaCmd::Image { f, algebra } => {
            let f = parse_tilde(f)?;
            let target = &f.base.target;
            let out = match algebra {
                AlgebraArg::Terminal => {
                    let ix = target.index();
                    let values = ix.vertices.iter().map(|v| (*v, ix.arity(*v))).collect();
                    let image = phi_morphism(&StrictAlgebra(Terminal), &f, &values).map_err(fail)?;
                    json!(image.into_iter().map(|(v, k)| (v.0.to_string(), k)).collect::<BTreeMap<_, _>>())
                }
                AlgebraArg::Cacti => {
                    let values = seeded_values(seed, target);
                    let image = phi_morphism(&CactusAlgebra, &f, &values).map_err(fail)?;
                    json!({
                        "values": values.iter().map(|(v, x)| (v.0.to_string(), x.to_json())).collect::<BTreeMap<_, _>>(),
                        "image": image.iter().map(|(v, x)| (v.0.to_string(), x.to_json())).collect::<BTreeMap<_, _>>(),
                    })
                }
            };
            Ok(Outcome::value(out))
        }
        OmegaCmd::Segal { tree, algebra } => {
            let t = parse_tree(tree)?;
            let holds = match algebra {
                AlgebraArg::Terminal => {
                    let ix = t.index();
                    let values = ix.vertices.iter().map(|v| (*v, ix.arity(*v))).collect();
                    segal_check(&StrictAlgebra(Terminal), &t, &values)
                }
                AlgebraArg::Cacti => segal_check(&CactusAlgebra, &t, &seeded_values(seed, &t)),
            }
            .map_err(fail)?;
            Ok(Outcome { value: json!({"segal": holds}), text: format!("segal condition {}", if holds { "holds" } else { "fails" }), success: holds })
        }
    }
}

fn cacti(cmd: &CactiCmd) -> Result<Outcome, CliError> {
    match cmd {
        CactiCmd::Compose { x, i, y } => {
            let z = cact1_compose(&parse_cactus(x)?, *i, &parse_cactus(y)?).map_err(fail)?;
            Ok(Outcome { text: z.to_string(), value: z.to_json(), success: true })
        }
        CactiCmd::Validate { x } => match parse_cactus(x) {
            Ok(c) => Ok(Outcome { value: json!({"valid": true, "lobes": c.k()}), text: format!("valid, {} lobes", c.k()), success: true }),
            Err(CliError::Input(e)) => Ok(Outcome { value: json!({"valid": false, "reason": e}), text: format!("invalid: {e}"), success: false }),
            Err(e) => Err(e),
        },
        CactiCmd::Metric { x, y } => {
            let d = cactus_metric(&parse_cactus(x)?, &parse_cactus(y)?).map_err(fail)?;
            Ok(Outcome { value: json!({"distance": fmt_q(&d)}), text: fmt_q(&d), success: true })
        }
        CactiCmd::Witness => Ok(witness()),
    }
}

fn witness() -> Outcome {
    let w = non_associativity_witness();
    let value = json!({
        "x": w.x.to_json(),
        "a": w.a.to_json(),
        "left": w.left.to_json(),
        "right": w.right.to_json(),
        "distance": fmt_q(&w.distance),
    });
    let text = format!(
        "x = {}\na = {}\n(x o1 a) o1 a = {}\nx o1 (a o1 a) = {}\ndistance {}",
        w.x,
        w.a,
        w.left,
        w.right,
        fmt_q(&w.distance)
    );
    Outcome { value, text, success: w.left != w.right }
}

fn action(cmd: &ActionCmd) -> Result<Outcome, CliError> {
    let ActionCmd::Eval { element, inputs, trace } = cmd;
    let element = parse_bo(element)?;
    let inputs: Vec<Cactus> = match parse_json(inputs)? {
        Value::Array(xs) => xs.iter().map(Cactus::from_json).collect::<Result<_, _>>().map_err(bad)?,
        _ => return Err(CliError::Input("inputs must be a JSON array of cacti".into())),
    };
    let ctx = ActionContext::new(element, inputs).map_err(fail)?;
    let (out, tr) = lambda_traced(&ctx).map_err(fail)?;
    let mut value = json!({"result": out.to_json()});
    if *trace {
        value["trace"] = json!({
            "vertex_scalings": tr.vertex_scalings.iter().map(|(v, g)| (v.0.to_string(), g.map().to_json())).collect::<BTreeMap<_, _>>(),
            "bracket_scalings": tr.bracket_scalings.iter().map(|(s, h)| {
                json!({"bracket": s.iter().map(|v| v.0).collect::<Vec<_>>(), "scaling": h.map().to_json()})
            }).collect::<Vec<_>>(),
            "ms_value": tr.ms_value.as_ref().map(|m| m.to_json()),
        });
    }
    let text = if *trace { serde_json::to_string_pretty(&value).expect("serializable") } else { out.to_string() };
    Ok(Outcome { value, text, success: true })
}

fn w(cmd: &WCmd) -> Result<Outcome, CliError> {
    let out = match cmd {
        WCmd::Normalize { tree, mode } => normalize_w(&parse_w(tree)?, (*mode).into()).to_json(),
        WCmd::Compose { a, i, b, mode } => compose_w(&parse_w(a)?, *i, &parse_w(b)?, (*mode).into()).map_err(fail)?.to_json(),
        WCmd::Psi { tree } => psi(&parse_w(tree)?).map_err(fail)?.to_json(),
        WCmd::PsiInverse { element } => psi_inverse(&parse_bo(element)?).to_json(),
    };
    Ok(Outcome::value(out))
}

fn verify(suite: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut reports = Vec::new();
    for name in names {
        reports.push(run_suite(name, cfg).map_err(bad)?);
    }
    let success = reports.iter().all(|r| r.passed);
    let mut text = String::new();
    for r in &reports {
        text.push_str(&format!("{} {}\n", if r.passed { "PASS" } else { "FAIL" }, r.suite));
        for c in &r.checks {
            text.push_str(&format!("  {} {} cases={} failures={}\n", if c.passed() { "ok  " } else { "FAIL" }, c.id, c.cases, c.failures));
            if let Some(ce) = &c.counterexample {
                text.push_str(&format!("    first counterexample: {ce}\n"));
            }
        }
    }
    let value = if reports.len() == 1 {
        serde_json::to_value(&reports[0]).expect("serializable")
    } else {
        json!({"passed": success, "suites": reports})
    };
    Ok(Outcome { value, text: text.trim_end().to_string(), success })
}

/// Faces of the polytope of bracketings: corners are maximal bracketings,
/// edges the bracketings one bracket short of maximal.
pub fn face_lattice(t: &PlanarTree) -> Result<Value, CliError> {
    let all = enumerate_bracketings(t).map_err(fail)?.bracketings();
    let top = all.iter().map(Bracketing::len).max().unwrap_or(0);
    let corners: Vec<&Bracketing> = all.iter().filter(|b| b.len() == top).collect();
    let mut faces = BTreeMap::new();
    for b in &all {
        faces.entry(top - b.len()).or_insert_with(Vec::new).push(b.to_json());
    }
    let edges: Vec<Value> = all
        .iter()
        .filter(|b| top >= 1 && b.len() + 1 == top)
        .map(|b| {
            let ends: Vec<usize> = corners.iter().enumerate().filter(|(_, c)| b.is_subset(c)).map(|(i, _)| i).collect();
            json!({"face": b.to_json(), "corners": ends})
        })
        .collect();
    Ok(json!({
        "tree": t.to_json(),
        "corners": corners.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
        "edges": edges,
        "faces_by_dimension": faces.into_iter().map(|(d, fs)| (d.to_string(), fs)).collect::<BTreeMap<_, _>>(),
    }))
}

fn figure(name: FigureName) -> Result<Outcome, CliError> {
    let value = match name {
        FigureName::Pentagon => face_lattice(&caterpillar(4, 1))?,
        FigureName::Hexagon => face_lattice(&star(3, 2))?,
        FigureName::CactComposition => {
            let x = Cactus::linear(2);
            let y = Cactus::linear(3);
            let z = cact1_compose(&x, 0, &y).map_err(fail)?;
            json!({"x": x.to_json(), "slot": 1, "y": y.to_json(), "result": z.to_json()})
        }
    };
    Ok(Outcome::value(value))
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    let cfg = RunConfig { seed: g.seed, limit: g.limit, samples: g.samples, tuples: g.tuples };
    match &cli.command {
        Command::Brackets { action: BracketsCmd::Enumerate { tree, max, fvector } } => enumerate(tree, *max, *fvector, g.limit),
        Command::Bo { action: BoCmd::Compose { a, i, b } } => {
            let c = parse_bo(a)?.compose(*i, &parse_bo(b)?).map_err(fail)?;
            Ok(Outcome::value(c.to_json()))
        }
        Command::W { action } => w(action),
        Command::Omega { action } => omega(action, g.seed),
        Command::Cacti { action } => cacti(action),
        Command::BoAction { action: a } => action(a),
        Command::Verify { suite } => verify(suite, &cfg),
        Command::Figure { name } => figure(*name),
        Command::Witness { name: WitnessName::Nonassoc } => Ok(witness()),
    }
}

/// Runs a command line and writes its output; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(out) => {
            let rendered = if cli.global.json { serde_json::to_string_pretty(&out.value).expect("serializable") } else { out.text };
            let written = match &cli.global.output {
                Some(path) => std::fs::write(path, rendered + "\n").map_err(CliError::from),
                None => {
                    // a closed pipe is not an error of the command
                    let _ = writeln!(std::io::stdout().lock(), "{rendered}");
                    Ok(())
                }
            };
            match written {
                Ok(()) if out.success => 0,
                Ok(()) => 1,
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
