//! `fraisse` — command line front end for the `fraisse-core` kernels.
//!
//! Every subcommand reads word text and JSON documents (inline or from
//! files), calls one core operation, and emits exactly one JSON document.
//! Documents go to stdout, or atomically to `--out` (written to a temporary
//! file in the same directory, then renamed). Identical inputs and `--seed`
//! produce byte-identical output.
//!
//! Exit codes follow the core error taxonomy: `0` success; `2` malformed
//! input or a domain-precondition violation, with a JSON error body carrying
//! position information where available; `3` a bounded search exhausted its
//! cap, with the attempted bounds in the body. `--schema` prints the JSON
//! schema of any subcommand's input and output instead of running it.

mod schema;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use fraisse_core::engine::{back_and_forth, homogeneity_witness, locate, Obj};
use fraisse_core::tower::{
    discriminate_to_free_with_caps, discriminating_hom_with_cap, fpce_normalize, level_retraction,
    DEFAULT_EXP_CAP, DEFAULT_SUBST_CAP,
};
use fraisse_core::word::{conjugator, parse_word, three_squares_scan, valid_gen_name, word_to_text};
use fraisse_core::{
    amalgam, build_chain, check_axioms, extension_property_test, lattice, Alphabet, Category,
    ChainState, Error, IntLattice, IntMatrix, Polynomial, Result, Span, Tower, TupleZ, Word,
    ZtSession,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fraisse",
    version,
    about = "Word, lattice and tower kernels with a deterministic chain engine",
    propagate_version = true
)]
struct Cli {
    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pretty: bool,

    /// Write the output document atomically to this path instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Seed for randomized sampling (`chain build`, `chain ext`); echoed in
    /// their output. Deterministic commands ignore it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Print the JSON schema of this subcommand's input and output, then
    /// exit without running it.
    #[arg(long, global = true)]
    schema: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Freely reduce a word and print its reduced text.
    Reduce {
        /// Word text: whitespace-separated GEN or GEN^INT tokens; "1" is the identity.
        word: String,
        /// Comma-separated generator names; default: inferred from the words.
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Decide equality of two words, freely or inside a tower.
    Eq {
        x: String,
        y: String,
        /// Tower document (inline JSON or file); with it, equality is
        /// Britton equality in the tower.
        #[arg(long)]
        tower: Option<String>,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Primitive root: write the word as root^power with root not a proper power.
    Root {
        word: String,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Decide conjugacy of two free words, producing a conjugator when they are.
    Conj {
        x: String,
        y: String,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Exhaustive scan for solutions of x^2 y^2 z^2 = 1 up to a length bound.
    Squares {
        /// Scan every triple of reduced length <= max_len.
        #[arg(long)]
        max_len: u64,
        /// Rank of the free group scanned.
        #[arg(long, default_value_t = 2)]
        rank: u32,
    },
    /// Exact integer lattice algebra in Z^n.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Build and query centralizer/free-product towers.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Retraction of the top centralizer-extension step, t -> core^k.
    Retract {
        /// Tower document whose top step is a centralizer extension.
        tower: String,
        /// Nonzero exponent k for the top letter's image.
        #[arg(long, default_value_t = 1)]
        exponent: i64,
    },
    /// Find a verified retraction injective on the given words.
    Discriminate {
        tower: String,
        /// Words the retraction must separate.
        #[arg(required = true, num_args = 1..)]
        words: Vec<String>,
        /// Retract all the way to the free base (normalizes free factors first).
        #[arg(long)]
        to_free: bool,
        /// Without --to-free: how many top CE levels to retract through
        /// (default: the tower's depth).
        #[arg(long)]
        levels: Option<usize>,
        /// Per-level exponent cap for the doubling search.
        #[arg(long)]
        exp_cap: Option<i64>,
        /// With --to-free: total budget for free-letter substitution search.
        #[arg(long)]
        subst_cap: Option<u64>,
    },
    /// Raise a base word to an integer polynomial p(t) inside a ladder tower.
    Exp {
        /// Tower document with no steps (a bare free base).
        base: String,
        /// Base word to exponentiate.
        word: String,
        /// Polynomial as a JSON array of coefficients, constant term first.
        poly: String,
        /// Nonzero k: also emit the evaluation retraction witnessing
        /// exp(word, p) -> word^(m*p(k)) in the base.
        #[arg(long)]
        eval: Option<i64>,
    },
    /// Amalgamate towers over a common base.
    #[command(subcommand)]
    Amalgam(AmalgamCmd),
    /// Build, query and audit deterministic chains of finite objects.
    #[command(subcommand)]
    Chain(ChainCmd),
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Row Hermite normal form h = u * m with u unimodular.
    Hnf { matrix: String },
    /// Smith normal form s = u * m * v with u, v unimodular.
    Snf { matrix: String },
    /// Pure closure (Q-saturation intersected with Z^n) of a tuple's span.
    Pure { tuple: String },
    /// Deterministic direct complement of a pure sublattice.
    Complement { lattice: String },
    /// Decide whether two tuples have the same universal type.
    Type { b: String, c: String },
    /// Strong amalgam of two type-equal tuples over their common type.
    Amalgam { b: String, c: String },
    /// Torsion-free pushout of a span of injective maps.
    Pushout { f1: String, f2: String },
    /// Ambient automorphism sending tuple b to tuple c entry-exact.
    Auto { b: String, c: String },
}

#[derive(Subcommand)]
enum TowerCmd {
    /// Free group on comma-separated base letters (empty string: trivial base).
    New { base: String },
    /// Append a centralizer extension over u with a fresh letter.
    Ce {
        tower: String,
        u: String,
        letter: String,
    },
    /// Append a free product with the free group on fresh letters.
    Fp {
        tower: String,
        #[arg(required = true, num_args = 1..)]
        letters: Vec<String>,
    },
    /// Move all free-product letters into the base, keeping CE steps on top.
    Normalize { tower: String },
    /// Britton-reduce a word of the tower.
    Reduce { tower: String, word: String },
    /// Decide equality in the tower.
    Eq {
        tower: String,
        x: String,
        y: String,
    },
    /// Decide commutation in the tower.
    Commutes {
        tower: String,
        x: String,
        y: String,
    },
}

#[derive(Subcommand)]
enum AmalgamCmd {
    /// Amalgamate a CE-only span into a cocone with verified legs.
    Ice { span: String },
    /// Interleaved amalgam with embeddings of both legs and a retraction
    /// certificate injective on the sample.
    Limit {
        span: String,
        /// Words the certificate retraction must separate (repeatable).
        #[arg(long)]
        sample: Vec<String>,
        #[arg(long)]
        exp_cap: Option<i64>,
    },
    /// Free product of two towers with an existential-closedness certificate
    /// for the left factor.
    Jep {
        l: String,
        m: String,
        /// Words the certificate retraction must separate (repeatable).
        #[arg(long)]
        sample: Vec<String>,
        #[arg(long)]
        exp_cap: Option<i64>,
        #[arg(long)]
        subst_cap: Option<u64>,
    },
    /// Reproduce the square-span obstruction report: the span z -> a^2 b^2,
    /// z -> c^2 admits no plain cocone.
    Demo {
        /// Scan scale for the three-squares certificate.
        #[arg(long, default_value_t = 3)]
        max_len: u64,
    },
}

#[derive(Subcommand)]
enum ChainCmd {
    /// Build a chain deterministically from a category, step count and seed.
    Build {
        /// Category name (e.g. fin_graph) or JSON object (e.g.
        /// {"category":"ice","base_rank":2}).
        #[arg(long)]
        category: String,
        #[arg(long)]
        steps: usize,
    },
    /// First stage carrying an object, with a verified special embedding.
    Locate {
        chain: String,
        /// Object document (inline JSON or file).
        #[arg(long)]
        object: String,
    },
    /// Grow an isomorphism of located subobjects by alternating one-point
    /// extension rounds.
    Witness {
        chain: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// JSON array of [from, to] element-name pairs (vertex/point
        /// indices, e{i} basis vectors, or tower letter names).
        #[arg(long)]
        iso: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Back-and-forth between two chains of the same category.
    Bnf {
        x: String,
        y: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Audit the category's closure properties at a budget.
    Axioms {
        #[arg(long)]
        category: String,
        /// Objects checked per property (capped per category).
        #[arg(long, default_value_t = 8)]
        budget: u64,
    },
    /// Sample one-point extension demands against a built chain.
    Ext {
        chain: String,
        #[arg(long, default_value_t = 50)]
        trials: u64,
    },
}

// ---------------------------------------------------------------------------
// Input plumbing
// ---------------------------------------------------------------------------

/// Returns the argument itself when it looks like inline JSON (first
/// non-space byte `{` or `[`), otherwise reads it as a file path.
fn read_doc_text(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| Error::Input(format!("cannot read {arg}: {e}")))
    }
}

/// Parses an inline-or-file JSON document, naming it in error messages.
/// serde_json errors carry line/column positions.
fn parse_doc<T: DeserializeOwned>(what: &str, arg: &str) -> Result<T> {
    let text = read_doc_text(arg)?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("invalid {what}: {e}")))
}

/// Alphabet for free-word commands: the `--alphabet` list when given, else
/// the generators of the argument words in order of first appearance.
fn word_alphabet(explicit: Option<&str>, words: &[&str]) -> Result<Alphabet> {
    if let Some(list) = explicit {
        return Alphabet::new(
            list.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from),
        );
    }
    let mut names: Vec<String> = Vec::new();
    for text in words {
        for tok in text.split_whitespace() {
            let name = tok.split('^').next().unwrap_or(tok);
            // Leave invalid tokens to parse_word, which reports positions.
            if valid_gen_name(name) && !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
        }
    }
    if names.is_empty() {
        names.push("a".to_string());
    }
    Alphabet::new(names)
}

/// Category argument: inline JSON object, a file, or a bare category name.
fn parse_category(arg: &str) -> Result<Category> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') {
        arg.to_string()
    } else if Path::new(arg).exists() {
        read_doc_text(arg)?
    } else {
        format!("{:?}", arg) // bare name as a JSON string literal
    };
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("invalid category: {e}")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("core types serialize to JSON")
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

fn render(value: &Value, pretty: bool) -> String {
    let mut text = if pretty {
        serde_json::to_string_pretty(value).expect("JSON value renders")
    } else {
        serde_json::to_string(value).expect("JSON value renders")
    };
    text.push('\n');
    text
}

/// Writes the document to a temporary file next to `path`, then renames it
/// into place, so readers never observe a partial document.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Input(format!("--out path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, bytes)
        .map_err(|e| Error::Input(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Input(format!("cannot move output into {}: {e}", path.display()))
    })
}

fn emit(value: &Value, pretty: bool, out: Option<&Path>) -> Result<()> {
    let text = render(value, pretty);
    match out {
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Input(format!("cannot write to stdout: {e}"))),
        Some(path) => atomic_write(path, text.as_bytes()),
    }
}

/// JSON error body shared by every failure path; search failures carry
/// their attempted bounds.
fn error_body(err: &Error) -> Value {
    let mut inner = json!({"kind": err.kind(), "message": err.to_string()});
    if let Error::Search {
        what,
        cap,
        attempted,
    } = err
    {
        inner["what"] = json!(what);
        inner["cap"] = json!(cap);
        inner["attempted"] = json!(attempted);
    }
    json!({ "error": inner })
}

// ---------------------------------------------------------------------------
// Schema resolution (`--schema` bypasses normal parsing so that required
// arguments need not be supplied just to read a schema)
// ---------------------------------------------------------------------------

const GROUPS: [(&str, &[&str]); 4] = [
    (
        "lattice",
        &[
            "hnf",
            "snf",
            "pure",
            "complement",
            "type",
            "amalgam",
            "pushout",
            "auto",
        ],
    ),
    (
        "tower",
        &["new", "ce", "fp", "normalize", "reduce", "eq", "commutes"],
    ),
    ("amalgam", &["ice", "limit", "jep", "demo"]),
    ("chain", &["build", "locate", "witness", "bnf", "axioms", "ext"]),
];

const TOP_COMMANDS: [&str; 8] = [
    "reduce",
    "eq",
    "root",
    "conj",
    "squares",
    "retract",
    "discriminate",
    "exp",
];

enum SchemaTarget {
    /// No subcommand named: the full command index.
    Index,
    /// A command group named without a child: that group's index.
    Group(&'static str),
    /// A runnable command path like `"lattice hnf"`.
    Path(String),
}

/// Resolves the schema target from the non-flag tokens of the invocation by
/// matching known command names only, so document arguments cannot be
/// mistaken for commands.
fn resolve_schema_target(tokens: &[&str]) -> SchemaTarget {
    for (i, tok) in tokens.iter().enumerate() {
        if TOP_COMMANDS.contains(tok) {
            return SchemaTarget::Path((*tok).to_string());
        }
        for (group, children) in GROUPS {
            if *tok == group {
                for later in &tokens[i + 1..] {
                    if children.contains(later) {
                        return SchemaTarget::Path(format!("{group} {later}"));
                    }
                }
                return SchemaTarget::Group(group);
            }
        }
    }
    SchemaTarget::Index
}

fn schema_main(argv: &[String], pretty: bool) -> ExitCode {
    let tokens: Vec<&str> = argv
        .iter()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .map(String::as_str)
        .collect();
    let doc = match resolve_schema_target(&tokens) {
        SchemaTarget::Index => schema::index(),
        SchemaTarget::Group(group) => {
            let children = GROUPS
                .iter()
                .find(|(g, _)| *g == group)
                .map(|(_, c)| *c)
                .unwrap_or(&[]);
            let commands: Vec<String> = children.iter().map(|c| format!("{group} {c}")).collect();
            json!({
                "commands": commands,
                "note": format!("run `fraisse {group} <command> --schema` for one command's schema")
            })
        }
        SchemaTarget::Path(path) => match schema::schema_for(&path) {
            Some(doc) => doc,
            None => {
                let err = Error::Input(format!("no schema for command {path:?}"));
                print!("{}", render(&error_body(&err), pretty));
                return ExitCode::from(2);
            }
        },
    };
    print!("{}", render(&doc, pretty));
    ExitCode::SUCCESS
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn run(command: Command, seed: u64) -> Result<Value> {
    match command {
        Command::Reduce { word, alphabet } => {
            let alpha = word_alphabet(alphabet.as_deref(), &[&word])?;
            let w = parse_word(&alpha, &word)?;
            Ok(json!({"word": word_to_text(&alpha, &w)}))
        }
        Command::Eq {
            x,
            y,
            tower,
            alphabet,
        } => {
            if let Some(doc) = tower {
                let t: Tower = parse_doc("tower document", &doc)?;
                let wx = t.parse(&x)?;
                let wy = t.parse(&y)?;
                Ok(json!({"equal": t.equals(&wx, &wy)}))
            } else {
                let alpha = word_alphabet(alphabet.as_deref(), &[&x, &y])?;
                let wx = parse_word(&alpha, &x)?;
                let wy = parse_word(&alpha, &y)?;
                Ok(json!({"equal": wx == wy}))
            }
        }
        Command::Root { word, alphabet } => {
            let alpha = word_alphabet(alphabet.as_deref(), &[&word])?;
            let w = parse_word(&alpha, &word)?;
            let (root, power) = w.primitive_root()?;
            Ok(json!({"root": word_to_text(&alpha, &root), "power": power}))
        }
        Command::Conj { x, y, alphabet } => {
            let alpha = word_alphabet(alphabet.as_deref(), &[&x, &y])?;
            let wx = parse_word(&alpha, &x)?;
            let wy = parse_word(&alpha, &y)?;
            Ok(match conjugator(&wx, &wy) {
                Some(g) => json!({"conjugate": true, "by": word_to_text(&alpha, &g)}),
                None => json!({"conjugate": false}),
            })
        }
        Command::Squares { max_len, rank } => {
            let report = three_squares_scan(rank, max_len)?;
            let alpha = Alphabet::of_rank(rank as usize);
            let solutions: Vec<[String; 3]> = report
                .solutions
                .iter()
                .map(|[x, y, z]| {
                    [
                        word_to_text(&alpha, x),
                        word_to_text(&alpha, y),
                        word_to_text(&alpha, z),
                    ]
                })
                .collect();
            Ok(json!({
                "rank": report.rank,
                "max_len": report.max_len,
                "words_scanned": report.words_scanned,
                "all_commuting": report.all_commuting,
                "solutions": solutions,
            }))
        }
        Command::Lattice(cmd) => run_lattice(cmd),
        Command::Tower(cmd) => run_tower(cmd),
        Command::Retract { tower, exponent } => {
            let t: Tower = parse_doc("tower document", &tower)?;
            Ok(to_value(&level_retraction(&t, exponent)?))
        }
        Command::Discriminate {
            tower,
            words,
            to_free,
            levels,
            exp_cap,
            subst_cap,
        } => {
            let t: Tower = parse_doc("tower document", &tower)?;
            let xs: Vec<Word> = words.iter().map(|w| t.parse(w)).collect::<Result<_>>()?;
            let exp_cap = exp_cap.unwrap_or(DEFAULT_EXP_CAP);
            let hom = if to_free {
                discriminate_to_free_with_caps(
                    &t,
                    &xs,
                    exp_cap,
                    subst_cap.unwrap_or(DEFAULT_SUBST_CAP),
                )?
            } else {
                discriminating_hom_with_cap(&t, &xs, levels.unwrap_or(t.depth()), exp_cap)?
            };
            Ok(to_value(&hom))
        }
        Command::Exp {
            base,
            word,
            poly,
            eval,
        } => {
            let t: Tower = parse_doc("tower document", &base)?;
            let coeffs: Vec<i64> = parse_doc("polynomial coefficient array", &poly)?;
            let g = t.parse(&word)?;
            let mut session = ZtSession::new(t)?;
            let (tower, image) = session.exp(&g, &Polynomial::new(coeffs))?;
            let mut doc = json!({"tower": to_value(&tower), "word": tower.print(&image)});
            if let Some(k) = eval {
                let hom = session.eval_hom(&g, k)?;
                doc["eval"] = json!({"k": k, "hom": to_value(&hom)});
            }
            Ok(doc)
        }
        Command::Amalgam(cmd) => run_amalgam(cmd),
        Command::Chain(cmd) => run_chain(cmd, seed),
    }
}

fn run_lattice(cmd: LatticeCmd) -> Result<Value> {
    match cmd {
        LatticeCmd::Hnf { matrix } => {
            let m: IntMatrix = parse_doc("integer matrix", &matrix)?;
            let (h, u) = lattice::hermite_normal_form(&m);
            Ok(json!({"h": to_value(&h), "u": to_value(&u)}))
        }
        LatticeCmd::Snf { matrix } => {
            let m: IntMatrix = parse_doc("integer matrix", &matrix)?;
            let (s, u, v) = lattice::smith_normal_form(&m);
            Ok(json!({"s": to_value(&s), "u": to_value(&u), "v": to_value(&v)}))
        }
        LatticeCmd::Pure { tuple } => {
            let t: TupleZ = parse_doc("tuple document", &tuple)?;
            Ok(to_value(&lattice::pure_closure(&t)))
        }
        LatticeCmd::Complement { lattice: arg } => {
            let l: IntLattice = parse_doc("lattice document", &arg)?;
            Ok(to_value(&lattice::direct_complement(&l)?))
        }
        LatticeCmd::Type { b, c } => {
            let tb: TupleZ = parse_doc("tuple document", &b)?;
            let tc: TupleZ = parse_doc("tuple document", &c)?;
            Ok(match lattice::same_universal_type(&tb, &tc)? {
                Some(iso) => json!({"same_type": true, "iso": to_value(&iso)}),
                None => json!({"same_type": false}),
            })
        }
        LatticeCmd::Amalgam { b, c } => {
            let tb: TupleZ = parse_doc("tuple document", &b)?;
            let tc: TupleZ = parse_doc("tuple document", &c)?;
            Ok(to_value(&lattice::amalgamate_tuples(&tb, &tc)?))
        }
        LatticeCmd::Pushout { f1, f2 } => {
            let m1: IntMatrix = parse_doc("integer matrix", &f1)?;
            let m2: IntMatrix = parse_doc("integer matrix", &f2)?;
            Ok(to_value(&lattice::pushout_torsionfree(&m1, &m2)?))
        }
        LatticeCmd::Auto { b, c } => {
            let tb: TupleZ = parse_doc("tuple document", &b)?;
            let tc: TupleZ = parse_doc("tuple document", &c)?;
            Ok(json!({"matrix": to_value(&lattice::extend_to_automorphism(&tb, &tc)?)}))
        }
    }
}

fn run_tower(cmd: TowerCmd) -> Result<Value> {
    match cmd {
        TowerCmd::New { base } => {
            let names: Vec<String> = base
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            Ok(to_value(&Tower::from_base(Alphabet::new(names)?)))
        }
        TowerCmd::Ce { tower, u, letter } => {
            let t: Tower = parse_doc("tower document", &tower)?;
            let w = t.parse(&u)?;
            Ok(to_value(&t.extend_centralizer(&w, &letter)?))
        }
        TowerCmd::Fp { tower, letters } => {
            let t: Tower = parse_doc("tower document", &tower)?;
            let refs: Vec<&str> = letters.iter().map(String::as_str).collect();
            Ok(to_value(&t.free_product(&refs)?))
        }
        TowerCmd::Normalize { tower } => {
            let t: Tower = parse_doc("tower document", &tower)?;
            let (norm, map) = fpce_normalize(&t);
            Ok(json!({"tower": to_value(&norm), "map": map}))
        }
        TowerCmd::Reduce { tower, word } => {
            let t: Tower = parse_doc("tower document", &tower)?;
            let w = t.parse(&word)?;
            Ok(json!({"word": t.print(&t.reduce(&w))}))
        }
        TowerCmd::Eq { tower, x, y } => {
            let t: Tower = parse_doc("tower document", &tower)?;
            let wx = t.parse(&x)?;
            let wy = t.parse(&y)?;
            Ok(json!({"equal": t.equals(&wx, &wy)}))
        }
        TowerCmd::Commutes { tower, x, y } => {
            let t: Tower = parse_doc("tower document", &tower)?;
            let wx = t.parse(&x)?;
            let wy = t.parse(&y)?;
            Ok(json!({"commutes": t.commutes(&wx, &wy)}))
        }
    }
}

fn run_amalgam(cmd: AmalgamCmd) -> Result<Value> {
    match cmd {
        AmalgamCmd::Ice { span } => {
            let s: Span = parse_doc("span document", &span)?;
            Ok(to_value(&amalgam::ice_amalgamate(&s)?))
        }
        AmalgamCmd::Limit {
            span,
            sample,
            exp_cap,
        } => {
            let s: Span = parse_doc("span document", &span)?;
            let la = amalgam::limit_group_amalgam_with_cap(
                &s,
                &sample,
                exp_cap.unwrap_or(DEFAULT_EXP_CAP),
            )?;
            let gamma: Vec<String> = la.gamma_gens.iter().map(|w| la.n.print(w)).collect();
            Ok(json!({
                "n": to_value(&la.n),
                "emb_l": to_value(&la.emb_l),
                "emb_m": to_value(&la.emb_m),
                "gamma_gens": gamma,
                "cert": to_value(&la.cert),
            }))
        }
        AmalgamCmd::Jep {
            l,
            m,
            sample,
            exp_cap,
            subst_cap,
        } => {
            let tl: Tower = parse_doc("tower document", &l)?;
            let tm: Tower = parse_doc("tower document", &m)?;
            let jp = amalgam::jep_product_with_caps(
                &tl,
                &tm,
                &sample,
                exp_cap.unwrap_or(DEFAULT_EXP_CAP),
                subst_cap.unwrap_or(DEFAULT_SUBST_CAP),
            )?;
            Ok(json!({
                "p": to_value(&jp.p),
                "l": to_value(&jp.l),
                "cert": to_value(&jp.cert),
                "renames": jp.renames,
            }))
        }
        AmalgamCmd::Demo { max_len } => Ok(to_value(&amalgam::ap_failure_demo(max_len)?)),
    }
}

fn run_chain(cmd: ChainCmd, seed: u64) -> Result<Value> {
    match cmd {
        ChainCmd::Build { category, steps } => {
            let cat = parse_category(&category)?;
            Ok(to_value(&build_chain(&cat, steps, seed)?))
        }
        ChainCmd::Locate { chain, object } => {
            let state: ChainState = parse_doc("chain document", &chain)?;
            let obj: Obj = parse_doc("object document", &object)?;
            Ok(to_value(&locate(&state, &obj)?))
        }
        ChainCmd::Witness {
            chain,
            a,
            b,
            iso,
            depth,
        } => {
            let state: ChainState = parse_doc("chain document", &chain)?;
            let oa: Obj = parse_doc("object document", &a)?;
            let ob: Obj = parse_doc("object document", &b)?;
            let pairs: Vec<(String, String)> = parse_doc("isomorphism pair list", &iso)?;
            Ok(to_value(&homogeneity_witness(
                &state, &oa, &ob, &pairs, depth,
            )?))
        }
        ChainCmd::Bnf { x, y, depth } => {
            let cx: ChainState = parse_doc("chain document", &x)?;
            let cy: ChainState = parse_doc("chain document", &y)?;
            Ok(to_value(&back_and_forth(&cx, &cy, depth)?))
        }
        ChainCmd::Axioms { category, budget } => {
            let cat = parse_category(&category)?;
            Ok(to_value(&check_axioms(&cat, budget)?))
        }
        ChainCmd::Ext { chain, trials } => {
            let state: ChainState = parse_doc("chain document", &chain)?;
            Ok(to_value(&extension_property_test(&state, seed, trials)?))
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let pretty = argv.iter().any(|a| a == "--pretty");
    if argv.iter().any(|a| a == "--schema") {
        return schema_main(&argv, pretty);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                "missing or incomplete subcommand; run `fraisse --help` for usage".to_string()
            } else {
                e.to_string().trim_end().to_string()
            };
            let body = error_body(&Error::Input(message));
            print!("{}", render(&body, pretty));
            return ExitCode::from(2);
        }
    };
    let (pretty, out, seed) = (cli.pretty, cli.out, cli.seed);
    let outcome = run(cli.command, seed).and_then(|value| emit(&value, pretty, out.as_deref()));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            print!("{}", render(&error_body(&e), pretty));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_inference_keeps_first_appearance_order() {
        let alpha = word_alphabet(None, &["b a^2", "c b^-1"]).unwrap();
        assert_eq!(alpha.names(), ["b", "a", "c"]);
    }

    #[test]
    fn alphabet_inference_skips_identity_and_garbage_tokens() {
        let alpha = word_alphabet(None, &["1", "a 1 B?"]).unwrap();
        assert_eq!(alpha.names(), ["a"]);
    }

    #[test]
    fn explicit_alphabet_wins() {
        let alpha = word_alphabet(Some("x, y"), &["a b"]).unwrap();
        assert_eq!(alpha.names(), ["x", "y"]);
    }

    #[test]
    fn schema_targets_resolve_by_known_names_only() {
        assert!(matches!(
            resolve_schema_target(&["reduce", "a b"]),
            SchemaTarget::Path(p) if p == "reduce"
        ));
        assert!(matches!(
            resolve_schema_target(&["tower", "eq", "T.json"]),
            SchemaTarget::Path(p) if p == "tower eq"
        ));
        assert!(matches!(
            resolve_schema_target(&["lattice", "input.json"]),
            SchemaTarget::Group("lattice")
        ));
        assert!(matches!(resolve_schema_target(&[]), SchemaTarget::Index));
        assert!(matches!(
            resolve_schema_target(&["T.json"]),
            SchemaTarget::Index
        ));
    }

    #[test]
    fn bare_category_names_and_objects_both_parse() {
        assert_eq!(parse_category("fin_graph").unwrap(), Category::FinGraph);
        assert_eq!(
            parse_category("{\"category\":\"ice\",\"base_rank\":2}").unwrap(),
            Category::Ice { base_rank: 2 }
        );
        assert!(parse_category("no_such_category").is_err());
    }

    #[test]
    fn error_bodies_carry_search_bounds() {
        let err = Error::Search {
            what: "x".into(),
            cap: 7,
            attempted: vec![("level 1".into(), 7)],
        };
        let body = error_body(&err);
        assert_eq!(body["error"]["kind"], "search-failure");
        assert_eq!(body["error"]["cap"], 7);
        assert_eq!(body["error"]["attempted"][0][1], 7);
        let plain = error_body(&Error::Domain("d".into()));
        assert!(plain["error"].get("cap").is_none());
    }
}
