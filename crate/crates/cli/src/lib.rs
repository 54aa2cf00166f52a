//! The `thincoalg` command-line tool.
//!
//! Every command produces an [`Outcome`]: text for humans, a [`RunReport`]
//! for `--json`, and an exit code (0 success, 1 negative verdict, 2 usage or
//! input error).

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::IgnoredAny;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use thincoalg_core::coalgebra::{beh_equal, minimize};
use thincoalg_core::gen::{random_coalgebra, random_term};
use thincoalg_core::io::{self, FormatError, SignatureRef};
use thincoalg_core::signature::{library, Signature, DEFAULT_ARITY_CAP};
use thincoalg_core::{
    brute_force_normal, cb_rank, count_infinite_paths_class, dom_tree, enc, is_thin, normalize,
    oracle_is_thin, state_ranks, unfold, NormalFormError, PointedCoalgebra, Term, ThinVerdict,
    TreeEncError,
};

pub const ARITY_CAP_ENV: &str = "THINCOALG_ARITY_CAP";

/// Largest coalgebra the cycle-enumerating oracle is run on.
pub const ORACLE_MAX_STATES: usize = 16;

#[derive(Debug, Parser)]
#[command(
    name = "thincoalg",
    version,
    about = "Thin coalgebras, finitary terms and normal forms"
)]
pub struct Cli {
    /// Print a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Thin,
    Nonthin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Coalgebra,
    Term,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and check signature, coalgebra or term files.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Decide thinness of a pointed coalgebra.
    CheckThin {
        coalgebra: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        root: Option<usize>,
        /// Exit 1 unless the verdict matches.
        #[arg(long)]
        expect: Option<Expect>,
        /// Cross-check with cycle enumeration.
        #[arg(long)]
        oracle: bool,
    },
    /// Count paths from the root and classify the infinite ones.
    Paths {
        coalgebra: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        root: Option<usize>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// List the paths of length `depth`.
        #[arg(long)]
        list: bool,
    },
    /// Rank of a term, or of the root of a thin coalgebra.
    Rank {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        root: Option<usize>,
    },
    /// Normal form of a term.
    Normalize {
        term: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        /// Cross-check against exhaustive search.
        #[arg(long)]
        oracle: bool,
        /// Term size bound for `--oracle`.
        #[arg(long, default_value_t = 6)]
        bound: usize,
    },
    /// Behavioural equality of two terms or two pointed coalgebras.
    Eq {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Unfold a term into a coalgebra file.
    Unfold {
        term: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        /// Minimize the unfolding.
        #[arg(long)]
        minimize: bool,
    },
    /// Tree encoding of a term over a polynomial signature.
    Encode {
        term: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Read the tree off the unfolded behaviour instead.
        #[arg(long)]
        dom: bool,
    },
    /// Cantor-Bendixson rank of a term's or coalgebra's tree.
    CbRank {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long)]
        root: Option<usize>,
    },
    /// Generate a seeded random coalgebra or term.
    Gen {
        kind: GenKind,
        /// Signature file; defaults to one operation of each arity 0 to 6.
        #[arg(long)]
        sig: Option<PathBuf>,
        /// States for coalgebras, size budget for terms.
        #[arg(long, default_value_t = 10)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mean out-degree for coalgebras.
        #[arg(long, default_value_t = 1.5)]
        density: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time parsing plus thinness checking on random coalgebras.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "100000,200000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3.0)]
        density: f64,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub result: Value,
    pub timing_ms: f64,
}

#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
    pub report: RunReport,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    pub result: Value,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
            result: Value::Null,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::usage(e.to_string())
    }
}

fn witness_json(v: &ThinVerdict) -> Value {
    serde_json::to_value(v).expect("verdicts serialize")
}

fn not_thin_error(e: NormalFormError) -> CliError {
    match e {
        NormalFormError::NotThin(w) => CliError {
            code: 1,
            message: format!("not thin\n{}", witness_text(&w)),
            result: json!({"thin": false, "witness": *w}),
        },
        other => CliError::usage(other.to_string()),
    }
}

fn treeenc_error(e: TreeEncError) -> CliError {
    match e {
        TreeEncError::NotThin(w) => CliError {
            code: 1,
            message: format!("not thin\n{}", witness_text(&w)),
            result: json!({"thin": false, "witness": *w}),
        },
        other => CliError::usage(other.to_string()),
    }
}

fn witness_text(w: &thincoalg_core::NonThinWitness) -> String {
    format!(
        "witness state: {}\naccess: {}\ncycle1: {}\ncycle2: {}",
        w.state(),
        w.access,
        w.cycle1,
        w.cycle2
    )
}

/// Reads the arity cap from the environment.
pub fn arity_cap() -> Result<usize, CliError> {
    match std::env::var(ARITY_CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::usage(format!(
                "{ARITY_CAP_ENV} must be a natural number, got `{v}`"
            ))
        }),
        Err(_) => Ok(DEFAULT_ARITY_CAP),
    }
}

struct Ctx {
    cap: usize,
    inputs: Vec<InputDigest>,
}

/// Top-level keys that identify the kind of an input file.
#[derive(Deserialize)]
struct Probe {
    #[serde(default)]
    ops: Option<IgnoredAny>,
    #[serde(default)]
    transitions: Option<IgnoredAny>,
}

enum Loaded {
    Signature(Arc<Signature>),
    Coalgebra(PointedCoalgebra),
    Term(Arc<Signature>, Term),
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = io::read_text(path)?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        });
        Ok(text)
    }

    fn sig(&mut self, path: &Option<PathBuf>) -> Result<Option<Arc<Signature>>, CliError> {
        match path {
            None => Ok(None),
            Some(p) => {
                let text = self.read(p)?;
                Ok(Some(io::compile_signature(
                    &io::parse_signature(&text)?,
                    self.cap,
                )?))
            }
        }
    }

    fn load(
        &mut self,
        path: &Path,
        sig: &Option<PathBuf>,
        root: Option<usize>,
    ) -> Result<Loaded, CliError> {
        let text = self.read(path)?;
        let probe: Probe = serde_json::from_str(&text).map_err(FormatError::from)?;
        let base = path.parent();
        if probe.ops.is_some() {
            let spec = io::parse_signature(&text)?;
            return Ok(Loaded::Signature(io::compile_signature(&spec, self.cap)?));
        }
        let sig = self.sig(sig)?;
        if probe.transitions.is_some() {
            let pc = io::parse_pointed(&text, sig, base, self.cap)?;
            let pc = match root {
                Some(r) => pc.with_root(r).map_err(FormatError::from)?,
                None => pc,
            };
            Ok(Loaded::Coalgebra(pc))
        } else {
            let (sig, t) = io::parse_term(&text, sig, base, self.cap)?;
            Ok(Loaded::Term(sig, t))
        }
    }

    fn coalgebra(
        &mut self,
        path: &Path,
        sig: &Option<PathBuf>,
        root: Option<usize>,
    ) -> Result<PointedCoalgebra, CliError> {
        match self.load(path, sig, root)? {
            Loaded::Coalgebra(pc) => Ok(pc),
            _ => Err(CliError::usage(format!(
                "{}: expected a coalgebra file",
                path.display()
            ))),
        }
    }

    fn term(
        &mut self,
        path: &Path,
        sig: &Option<PathBuf>,
    ) -> Result<(Arc<Signature>, Term), CliError> {
        match self.load(path, sig, None)? {
            Loaded::Term(s, t) => Ok((s, t)),
            _ => Err(CliError::usage(format!(
                "{}: expected a term file",
                path.display()
            ))),
        }
    }
}

fn term_json(sig: &Signature, t: &Term) -> Value {
    json!({
        "term": io::term_to_json(sig, t),
        "display": t.display(sig).to_string(),
        "rank": t.rank(),
    })
}

/// Parses coalgebra JSON text and checks thinness at its root.
pub fn check_thin_text(
    text: &str,
    sig: Option<Arc<Signature>>,
    cap: usize,
) -> Result<ThinVerdict, FormatError> {
    let pc = io::parse_pointed(text, sig, None, cap)?;
    Ok(is_thin(&pc))
}

/// Serialized random coalgebra over [`library::arities`]`(6)`.
pub fn bench_instance(n: usize, density: f64, seed: u64) -> String {
    let sig = Arc::new(Signature::new(&library::arities(6)).expect("valid signature"));
    let c = random_coalgebra(&sig, n, density, &mut ChaCha8Rng::seed_from_u64(seed));
    let file = io::coalgebra_to_file(&c, Some(SignatureRef::Inline(sig.spec())), Some(0));
    serde_json::to_string(&file).expect("coalgebras serialize")
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs[xs.len() / 2]
}

fn execute(command: &Command, ctx: &mut Ctx) -> Result<(i32, String, Value), CliError> {
    match command {
        Command::Validate { files, sig } => {
            let mut files = files.clone();
            files.sort();
            let mut lines = Vec::new();
            let mut results = Vec::new();
            let mut failed = false;
            for f in &files {
                let loaded = match ctx.load(f, sig, None) {
                    Ok(l) => l,
                    Err(e) => {
                        failed = true;
                        lines.push(format!("{}: error: {}", f.display(), e.message));
                        results.push(json!({"path": f.display().to_string(), "error": e.message}));
                        continue;
                    }
                };
                let (kind, detail) = match loaded {
                    Loaded::Signature(s) => ("signature", format!("{} operations", s.ops().len())),
                    Loaded::Coalgebra(pc) => (
                        "coalgebra",
                        format!(
                            "{} states, {} edges",
                            pc.n_states(),
                            pc.coalgebra().n_edges()
                        ),
                    ),
                    Loaded::Term(_, t) => ("term", format!("size {}, rank {}", t.size(), t.rank())),
                };
                lines.push(format!("{}: ok ({kind}, {detail})", f.display()));
                results
                    .push(json!({"path": f.display().to_string(), "kind": kind, "detail": detail}));
            }
            let text = lines.join("\n");
            if failed {
                return Err(CliError {
                    code: 2,
                    message: text,
                    result: json!({"valid": false, "files": results}),
                });
            }
            Ok((0, text, json!({"valid": true, "files": results})))
        }
        Command::CheckThin {
            coalgebra,
            sig,
            root,
            expect,
            oracle,
        } => {
            let pc = ctx.coalgebra(coalgebra, sig, *root)?;
            let v = is_thin(&pc);
            let mut result = witness_json(&v);
            let mut text = if v.thin {
                "thin".to_string()
            } else {
                format!(
                    "not thin\n{}",
                    witness_text(v.witness.as_ref().expect("non-thin has a witness"))
                )
            };
            let mut code = if v.thin { 0 } else { 1 };
            if *oracle {
                if pc.n_states() > ORACLE_MAX_STATES {
                    return Err(CliError::usage(format!(
                        "--oracle supports at most {ORACLE_MAX_STATES} states, got {}",
                        pc.n_states()
                    )));
                }
                let o = oracle_is_thin(&pc, 2 * pc.n_states());
                result["oracle_thin"] = json!(o);
                text.push_str(&format!(
                    "\noracle: {}",
                    if o { "thin" } else { "not thin" }
                ));
                if o != v.thin {
                    text.push_str("\noracle disagrees");
                    code = 1;
                }
            }
            if let Some(e) = expect {
                let want = *e == Expect::Thin;
                result["expected_thin"] = json!(want);
                if want == v.thin {
                    code = if code == 1 && !v.thin { 0 } else { code };
                } else {
                    text.push_str(&format!(
                        "\nexpectation failed: expected {}",
                        if want { "thin" } else { "not thin" }
                    ));
                    code = 1;
                }
            }
            Ok((code, text, result))
        }
        Command::Paths {
            coalgebra,
            sig,
            root,
            depth,
            list,
        } => {
            let pc = ctx.coalgebra(coalgebra, sig, *root)?;
            let count = pc.path_count(*depth);
            let class = count_infinite_paths_class(&pc);
            let mut text = format!("paths of length {depth}: {count}\ninfinite paths: {class}");
            let mut result = json!({"depth": depth, "count": count.to_string(), "infinite": class});
            if *list {
                let paths: Vec<String> = pc
                    .paths_to_depth(*depth)
                    .iter()
                    .map(|p| p.to_string())
                    .collect();
                for p in &paths {
                    text.push('\n');
                    text.push_str(p);
                }
                result["paths"] = json!(paths);
            }
            Ok((0, text, result))
        }
        Command::Rank { file, sig, root } => match ctx.load(file, sig, *root)? {
            Loaded::Term(_, t) => Ok((0, t.rank().to_string(), json!({"rank": t.rank()}))),
            Loaded::Coalgebra(pc) => {
                let table = state_ranks(&pc).map_err(not_thin_error)?;
                let r = table.root_rank();
                Ok((0, r.to_string(), json!({"rank": r})))
            }
            Loaded::Signature(_) => Err(CliError::usage("rank needs a term or coalgebra file")),
        },
        Command::Normalize {
            term,
            sig,
            oracle,
            bound,
        } => {
            let (sig, t) = ctx.term(term, sig)?;
            let n = normalize(&sig, &t);
            let mut result = term_json(&sig, &n);
            let mut text = n.display(&sig).to_string();
            let mut code = 0;
            if *oracle {
                match brute_force_normal(&sig, &t, *bound) {
                    Ok(o) => {
                        let agree = o == n;
                        result["oracle_agrees"] = json!(agree);
                        text.push_str(if agree {
                            "\noracle: agrees"
                        } else {
                            "\noracle: DISAGREES"
                        });
                        if !agree {
                            result["oracle"] = term_json(&sig, &o);
                            code = 1;
                        }
                    }
                    Err(e) => return Err(CliError::usage(e.to_string())),
                }
            }
            Ok((code, text, result))
        }
        Command::Eq { a, b, sig } => {
            let la = ctx.load(a, sig, None)?;
            let lb = ctx.load(b, sig, None)?;
            let equal = match (la, lb) {
                (Loaded::Term(sa, ta), Loaded::Term(sb, tb)) => {
                    thincoalg_core::semantics::beh_equal_terms_checked(&sa, &ta, &sb, &tb)
                        .map_err(|e| CliError::usage(e.to_string()))?
                }
                (Loaded::Coalgebra(pa), Loaded::Coalgebra(pb)) => {
                    beh_equal(&pa, &pb).map_err(|e| CliError::usage(e.to_string()))?
                }
                _ => return Err(CliError::usage("eq needs two terms or two coalgebras")),
            };
            let code = if equal { 0 } else { 1 };
            Ok((
                code,
                (if equal { "equal" } else { "not equal" }).to_string(),
                json!({"equal": equal}),
            ))
        }
        Command::Unfold {
            term,
            sig,
            minimize: min,
        } => {
            let (sig, t) = ctx.term(term, sig)?;
            let mut pc = unfold(&sig, &t).pc;
            if *min {
                pc = minimize(&pc).0;
            }
            let file = io::coalgebra_to_file(
                pc.coalgebra(),
                Some(SignatureRef::Inline(sig.spec())),
                Some(pc.root()),
            );
            let value = serde_json::to_value(&file).expect("coalgebras serialize");
            let text = serde_json::to_string_pretty(&file).expect("coalgebras serialize");
            Ok((0, text, json!({"coalgebra": value})))
        }
        Command::Encode {
            term,
            sig,
            depth,
            dom,
        } => {
            let (sig, t) = ctx.term(term, sig)?;
            let tree = if *dom {
                dom_tree(&sig, &t, *depth)
            } else {
                enc(&sig, &t, *depth)
            }
            .map_err(treeenc_error)?;
            let lines = tree.lines();
            Ok((0, lines.join("\n"), json!({"depth": depth, "words": lines})))
        }
        Command::CbRank { file, sig, root } => {
            let pc = match ctx.load(file, sig, *root)? {
                Loaded::Term(s, t) => minimize(&unfold(&s, &t).pc).0,
                Loaded::Coalgebra(pc) => pc,
                Loaded::Signature(_) => {
                    return Err(CliError::usage("cb-rank needs a term or coalgebra file"))
                }
            };
            let r = cb_rank(&pc).map_err(treeenc_error)?;
            Ok((0, r.to_string(), json!({"cb_rank": r})))
        }
        Command::Gen {
            kind,
            sig,
            size,
            seed,
            density,
            output,
        } => {
            let sig = match ctx.sig(sig)? {
                Some(s) => s,
                None => Arc::new(Signature::new(&library::arities(6)).expect("valid signature")),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let value = match kind {
                GenKind::Coalgebra => {
                    if *size == 0 {
                        return Err(CliError::usage("--size must be positive for coalgebras"));
                    }
                    let c = random_coalgebra(&sig, *size, *density, &mut rng);
                    serde_json::to_value(io::coalgebra_to_file(
                        &c,
                        Some(SignatureRef::Inline(sig.spec())),
                        Some(0),
                    ))
                }
                GenKind::Term => {
                    let t = random_term(&sig, *size, &mut rng)
                        .map_err(|e| CliError::usage(e.to_string()))?;
                    serde_json::to_value(io::TermFile::Wrapped {
                        signature: SignatureRef::Inline(sig.spec()),
                        term: io::term_to_json(&sig, &t),
                    })
                }
            }
            .expect("generated files serialize");
            let text = serde_json::to_string(&value).expect("values serialize");
            match output {
                Some(p) => {
                    std::fs::write(p, &text)
                        .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
                    Ok((
                        0,
                        format!("wrote {}", p.display()),
                        json!({"output": p.display().to_string()}),
                    ))
                }
                None => Ok((0, text, json!({"generated": value}))),
            }
        }
        Command::Bench {
            sizes,
            seed,
            density,
            repeats,
        } => {
            if *repeats == 0 || sizes.is_empty() {
                return Err(CliError::usage(
                    "bench needs at least one size and one repeat",
                ));
            }
            let mut rows = Vec::new();
            let mut lines = Vec::new();
            for &n in sizes {
                let text = bench_instance(n, *density, *seed);
                let mut times = Vec::with_capacity(*repeats);
                let mut thin = false;
                for _ in 0..*repeats {
                    let start = Instant::now();
                    thin = check_thin_text(&text, None, ctx.cap)?.thin;
                    times.push(start.elapsed().as_secs_f64() * 1e3);
                }
                let m = median(times);
                lines.push(format!("{n} states: median {m:.1} ms (thin: {thin})"));
                rows.push(json!({"states": n, "median_ms": m, "thin": thin}));
            }
            Ok((0, lines.join("\n"), json!({"runs": rows})))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::CheckThin { .. } => "check-thin",
        Command::Paths { .. } => "paths",
        Command::Rank { .. } => "rank",
        Command::Normalize { .. } => "normalize",
        Command::Eq { .. } => "eq",
        Command::Unfold { .. } => "unfold",
        Command::Encode { .. } => "encode",
        Command::CbRank { .. } => "cb-rank",
        Command::Gen { .. } => "gen",
        Command::Bench { .. } => "bench",
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let mut ctx = Ctx {
        cap: DEFAULT_ARITY_CAP,
        inputs: Vec::new(),
    };
    let result = arity_cap().and_then(|cap| {
        ctx.cap = cap;
        execute(&cli.command, &mut ctx)
    });
    let (code, text, result) = match result {
        Ok(r) => r,
        Err(e) => {
            let result = if e.result.is_null() {
                json!({"error": e.message})
            } else {
                e.result
            };
            let text = if e.code == 2 {
                format!("error: {}", e.message)
            } else {
                e.message
            };
            (e.code, text, result)
        }
    };
    Outcome {
        code,
        text,
        report: RunReport {
            command: command_name(&cli.command).to_string(),
            inputs: ctx.inputs,
            result,
            timing_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    }
}
