//! `ohb`: metrics, symmetries, isometry counts and code equivalence for
//! ordered Hamming block spaces.

mod render;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ohb_core::automorphisms::aut_report;
use ohb_core::chain::chain_order;
use ohb_core::codes::{apply_to_code, equivalent, Code, CodeFile};
use ohb_core::oracle::{corollary_counts, enumerate_isometries, verify_against_formula};
use ohb_core::product::{full_order, s_pi_order};
use ohb_core::table::{check_bijection, check_isometry, parse_table};
use ohb_core::{Error, Result, Space, SpaceConfig, Symmetry};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ohb", version, about = "Ordered Hamming block space toolkit")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Human)]
    format: Format,

    /// Override the point-count ceiling of exhaustive operations.
    #[arg(long, global = true)]
    cap: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Args)]
struct SpaceArg {
    /// Space configuration: a JSON file, or an inline JSON document.
    #[arg(long)]
    space: String,
}

#[derive(Subcommand)]
enum Command {
    /// Weight of a vector.
    Weight {
        #[command(flatten)]
        space: SpaceArg,
        /// Vector in text form, e.g. `10,0;01,1`.
        #[arg(long = "vec")]
        vector: String,
    },
    /// Distance between two vectors.
    Dist {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
    /// Work with symmetries in canonical form.
    #[command(subcommand)]
    Sym(SymCommand),
    /// Order of the symmetry group by formula, oracle, or both.
    Order {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long, conflicts_with_all = ["oracle", "both"])]
        formula: bool,
        #[arg(long, conflicts_with = "both")]
        oracle: bool,
        #[arg(long)]
        both: bool,
        /// Include every isometry as a dense rank table.
        #[arg(long)]
        list: bool,
    },
    /// Order of the linear symmetry group.
    Aut {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        formula: bool,
        #[arg(long)]
        enumerate: bool,
    },
    /// Decide whether two codes are equivalent.
    Equiv {
        #[command(flatten)]
        space: SpaceArg,
        /// First code file.
        c1: String,
        /// Second code file.
        c2: String,
        /// Search nodes allowed before answering "inconclusive".
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Summary of a space: orders, corollaries, and oracle checks in reach.
    Report {
        #[command(flatten)]
        space: SpaceArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SymKind {
    /// Random σ and random chain tables.
    Full,
    /// Random chain tables, σ = id.
    Chain,
    /// Random σ, identity chain tables.
    Sigma,
}

#[derive(Subcommand)]
enum SymCommand {
    /// Random symmetry from a seed.
    Gen {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long, env = "OHB_SEED")]
        seed: u64,
        #[arg(long, value_enum, default_value = "full")]
        kind: SymKind,
    },
    /// Apply a symmetry to a vector or a code.
    Apply {
        #[command(flatten)]
        space: SpaceArg,
        /// Symmetry JSON file.
        #[arg(long)]
        sym: String,
        #[arg(
            long = "vec",
            conflicts_with = "code",
            required_unless_present = "code"
        )]
        vector: Option<String>,
        /// Code file.
        #[arg(long)]
        code: Option<String>,
    },
    /// Composition `a ∘ b` (apply `b` first).
    Compose {
        #[command(flatten)]
        space: SpaceArg,
        a: String,
        b: String,
    },
    Invert {
        #[command(flatten)]
        space: SpaceArg,
        sym: String,
    },
    /// Dense rank table of a symmetry.
    Table {
        #[command(flatten)]
        space: SpaceArg,
        sym: String,
    },
    /// Check that a bijection table is an isometry.
    Verify {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        map: String,
    },
    /// Canonical form of an isometry given as a table.
    Decompose {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        map: String,
    },
}

fn read_input(source: &str) -> Result<String> {
    std::fs::read_to_string(Path::new(source))
        .map_err(|e| Error::usage(format!("cannot read '{source}': {e}")))
}

fn load_space(arg: &SpaceArg) -> Result<Space> {
    let text = if arg.space.trim_start().starts_with('{') {
        arg.space.clone()
    } else {
        read_input(&arg.space)?
    };
    let config: SpaceConfig = serde_json::from_str(&text)
        .map_err(|e| Error::parse(format!("space configuration: {e}")))?;
    Space::new(config)
}

fn load_symmetry(space: &Space, path: &str) -> Result<Symmetry> {
    let sym: Symmetry = serde_json::from_str(&read_input(path)?)
        .map_err(|e| Error::parse(format!("symmetry '{path}': {e}")))?;
    sym.validate(space)?;
    Ok(sym)
}

fn load_code(space: &Space, path: &str) -> Result<Code> {
    CodeFile::parse(&read_input(path)?)?.into_code(space)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn vector_doc(space: &Space, r: u64) -> Value {
    json!({ "text": space.format_rank(r), "rank": r })
}

fn weight(space: &Space, text: &str) -> Result<Value> {
    let v = space.parse_vector(text)?;
    let coords =
        |set: ohb_core::CoordSet| -> Vec<String> { set.iter().map(ToString::to_string).collect() };
    let support = space.pi_support(&v);
    let ideal = space.ideal_closure(&support);
    Ok(json!({
        "vector": vector_doc(space, space.rank(&v)),
        "weight": space.weight(&v),
        "pi_support": coords(support),
        "ideal": coords(ideal),
    }))
}

fn dist(space: &Space, u: &str, v: &str) -> Result<Value> {
    let (u, v) = (space.parse_vector(u)?, space.parse_vector(v)?);
    let per_chain: Vec<u32> = (0..space.m())
        .map(|i| ohb_core::chain_distance(space.row(&u, i), space.row(&v, i)))
        .collect();
    Ok(json!({
        "u": vector_doc(space, space.rank(&u)),
        "v": vector_doc(space, space.rank(&v)),
        "distance": space.distance(&u, &v),
        "per_chain": per_chain,
    }))
}

fn sym(cmd: &SymCommand) -> Result<Value> {
    match cmd {
        SymCommand::Gen { space, seed, kind } => {
            let space = load_space(space)?;
            let t = Symmetry::random(&space, *seed);
            let t = match kind {
                SymKind::Full => t,
                SymKind::Chain => Symmetry::from_chains(&space, t.chains().to_vec())?,
                SymKind::Sigma => Symmetry::from_sigma(&space, t.sigma().to_vec())?,
            };
            Ok(to_value(&t))
        }
        SymCommand::Apply {
            space,
            sym,
            vector,
            code,
        } => {
            let space = load_space(space)?;
            let t = load_symmetry(&space, sym)?;
            if let Some(text) = vector {
                let v = space.parse_vector(text)?;
                let r = space.rank(&v);
                return Ok(json!({
                    "input": vector_doc(&space, r),
                    "image": vector_doc(&space, t.apply_rank(&space, r)),
                }));
            }
            let c = load_code(
                &space,
                code.as_deref().expect("clap requires --vec or --code"),
            )?;
            let image = apply_to_code(&space, &t, &c)?;
            Ok(json!({
                "input": c.format(&space),
                "image": image.format(&space),
                "invariants": to_value(&image.invariants(&space)),
            }))
        }
        SymCommand::Compose { space, a, b } => {
            let space = load_space(space)?;
            let (a, b) = (load_symmetry(&space, a)?, load_symmetry(&space, b)?);
            Ok(to_value(&a.compose(&b)?))
        }
        SymCommand::Invert { space, sym } => {
            let space = load_space(space)?;
            Ok(to_value(&load_symmetry(&space, sym)?.invert()))
        }
        SymCommand::Table { space, sym } => {
            let space = load_space(space)?;
            Ok(to_value(&load_symmetry(&space, sym)?.table(&space)?))
        }
        SymCommand::Verify { space, map } => {
            let space = load_space(space)?;
            let f = parse_table(&read_input(map)?)?;
            check_bijection(&f, space.size())?;
            check_isometry(&f, |a, b| space.distance_ranks(a, b))?;
            Ok(json!({ "points": space.size(), "bijection": true, "isometry": true }))
        }
        SymCommand::Decompose { space, map } => {
            let space = load_space(space)?;
            let f = parse_table(&read_input(map)?)?;
            Ok(to_value(&Symmetry::decompose(&space, &f)?))
        }
    }
}

fn formula_doc(space: &Space) -> Result<Value> {
    let chains = (0..space.m())
        .map(|i| chain_order(space.q(), space.chain_pi(i)).map(|o| o.to_string()))
        .collect::<Result<Vec<_>>>()?;
    let corollaries: Vec<Value> = corollary_counts(space)
        .into_iter()
        .map(|(label, value)| json!({ "label": label, "value": value.to_string() }))
        .collect();
    Ok(json!({
        "full_order": full_order(space)?.to_string(),
        "s_pi_order": s_pi_order(space.config()).to_string(),
        "chain_orders": chains,
        "corollaries": corollaries,
    }))
}

fn order(
    space: &Space,
    formula: bool,
    oracle: bool,
    list: bool,
    cap: Option<u64>,
) -> Result<Value> {
    let mut doc = json!({ "config": to_value(space.config()) });
    if formula {
        doc["formula"] = formula_doc(space)?;
    }
    if oracle {
        let report = verify_against_formula(space, cap)?;
        doc["oracle"] = to_value(&report);
        if list {
            let maps = enumerate_isometries(space, cap, true, None)?.maps;
            doc["maps"] = to_value(&maps);
        }
    }
    Ok(doc)
}

fn report(space: &Space, cap: Option<u64>) -> Result<Value> {
    let cfg = space.config();
    let mut doc = json!({
        "config": to_value(cfg),
        "q": space.q(),
        "dimension": space.dimension(),
        "points": space.size(),
        "trivial_pi": cfg.is_trivial_pi(),
        "formula": formula_doc(space)?,
    });
    doc["oracle"] = match verify_against_formula(space, cap) {
        Ok(r) => to_value(&r),
        Err(e @ Error::CapExceeded { .. }) => json!({ "skipped": e.to_string() }),
        Err(e) => return Err(e),
    };
    doc["automorphisms"] = match aut_report(space, space.n() == 1, true, cap) {
        Ok(r) => to_value(&r),
        Err(e @ Error::CapExceeded { .. }) if space.n() == 1 => {
            to_value(&aut_report(space, true, false, cap)?)
                .as_object()
                .cloned()
                .map(|mut o| {
                    o.insert("enumeration_skipped".into(), e.to_string().into());
                    Value::Object(o)
                })
                .unwrap()
        }
        Err(e @ Error::CapExceeded { .. }) => json!({ "skipped": e.to_string() }),
        Err(e) => return Err(e),
    };
    Ok(doc)
}

fn run(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Weight { space, vector } => weight(&load_space(space)?, vector),
        Command::Dist { space, u, v } => dist(&load_space(space)?, u, v),
        Command::Sym(cmd) => sym(cmd),
        Command::Order {
            space,
            formula,
            oracle,
            both,
            list,
        } => {
            let space = load_space(space)?;
            let (f, o) = match (formula, oracle, both) {
                (true, _, _) => (true, false),
                (_, true, _) => (false, true),
                _ => (true, true),
            };
            if *list && !o {
                return Err(Error::usage("--list needs the oracle"));
            }
            order(&space, f, o, *list, cli.cap)
        }
        Command::Aut {
            space,
            formula,
            enumerate,
        } => {
            let space = load_space(space)?;
            let (f, e) = if *formula || *enumerate {
                (*formula, *enumerate)
            } else {
                (space.n() == 1, true)
            };
            Ok(to_value(&aut_report(&space, f, e, cli.cap)?))
        }
        Command::Equiv {
            space,
            c1,
            c2,
            budget,
        } => {
            let space = load_space(space)?;
            let (a, b) = (load_code(&space, c1)?, load_code(&space, c2)?);
            let verdict = equivalent(&space, &a, &b, *budget)?;
            let mut doc = to_value(&verdict);
            doc["invariants"] = json!([
                to_value(&a.invariants(&space)),
                to_value(&b.invariants(&space)),
            ]);
            Ok(doc)
        }
        Command::Report { space } => report(&load_space(space)?, cli.cap),
    }
}

fn error_doc(e: &Error) -> Value {
    let kind = match e {
        Error::Usage(_) => "usage",
        Error::Domain(_) => "domain",
        Error::NotPermutation { .. } => "not-permutation",
        Error::NotBijection(_) => "not-bijection",
        Error::NotIsometry { .. } => "not-isometry",
        Error::PrefixDependence { .. } => "prefix-dependence",
        Error::CapExceeded { .. } => "cap-exceeded",
        Error::Internal { .. } => "internal",
        Error::Parse(_) => "parse",
    };
    let mut doc = json!({ "error": { "kind": kind, "message": e.to_string() } });
    if let Error::NotIsometry {
        u,
        v,
        before,
        after,
    } = e
    {
        doc["error"]["witness"] = json!({ "u": u, "v": v, "before": before, "after": after });
    }
    doc
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(doc) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&doc).unwrap() + "\n",
                Format::Human => render::human(&doc),
            };
            emit(&text);
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.format == Format::Json {
                emit(&(serde_json::to_string_pretty(&error_doc(&e)).unwrap() + "\n"));
            }
            eprintln!("ohb: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
