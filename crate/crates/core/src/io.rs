//! JSON formats for signatures, coalgebras and terms.
//!
//! * signature: `{"ops": [{"id": str, "arity": int, "generators": [[int, ...], ...]}]}`
//! * coalgebra: `{"signature": <path or inline signature>, "states": int,
//!   "transitions": [{"op": str, "tuple": [int, ...]}], "root": int}` with
//!   `signature` and `root` optional
//! * term: `{"f": {"op": str, "children": [term]}}` or
//!   `{"g": {"prefix": [context], "period": [context]}}`, a context being
//!   `{"op": str, "hole": int, "sides": [term]}`; a term file may also wrap
//!   a term as `{"signature": <path or inline>, "term": term}`.

use std::borrow::Cow;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalgebra::{Coalgebra, CoalgebraError, PointedCoalgebra};
use crate::signature::{ContextElem, Signature, SignatureError, SignatureSpec};
use crate::terms::{Term, TermError, TermNode};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("no signature given (neither in the file nor on the command line)")]
    MissingSignature,
    #[error("\"states\" is {states} but there are {transitions} transitions")]
    StateCount { states: usize, transitions: usize },
}

/// A signature given inline or as a path relative to the referring file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignatureRef {
    Path(String),
    Inline(SignatureSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub op: String,
    pub tuple: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoalgebraFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<SignatureRef>,
    pub states: usize,
    pub transitions: Vec<TransitionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TermJson {
    F {
        op: String,
        children: Vec<TermJson>,
    },
    G {
        #[serde(default)]
        prefix: Vec<ContextJson>,
        period: Vec<ContextJson>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextJson {
    pub op: String,
    pub hole: usize,
    pub sides: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermFile {
    Wrapped {
        signature: SignatureRef,
        term: TermJson,
    },
    Bare(TermJson),
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn parse_signature(text: &str) -> Result<SignatureSpec, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn compile_signature(spec: &SignatureSpec, cap: usize) -> Result<Arc<Signature>, FormatError> {
    Ok(Arc::new(Signature::with_arity_cap(spec, cap)?))
}

pub fn load_signature(path: &Path, cap: usize) -> Result<Arc<Signature>, FormatError> {
    compile_signature(&parse_signature(&read_text(path)?)?, cap)
}

fn resolve(
    base: Option<&Path>,
    r: &SignatureRef,
    cap: usize,
) -> Result<Arc<Signature>, FormatError> {
    match r {
        SignatureRef::Inline(spec) => compile_signature(spec, cap),
        SignatureRef::Path(p) => {
            let p = Path::new(p);
            let full = match base {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.to_path_buf(),
            };
            load_signature(&full, cap)
        }
    }
}

/// Builds a coalgebra from a parsed file. `sig` overrides the file's own
/// signature; `base` resolves relative signature paths.
pub fn coalgebra_from_file(
    file: &CoalgebraFile,
    sig: Option<Arc<Signature>>,
    base: Option<&Path>,
    cap: usize,
) -> Result<(Coalgebra, Option<usize>), FormatError> {
    build_coalgebra(
        file.signature.as_ref(),
        file.states,
        file.transitions
            .iter()
            .map(|t| (t.op.as_str(), t.tuple.clone())),
        file.transitions.len(),
        file.root,
        sig,
        base,
        cap,
    )
}

#[allow(clippy::too_many_arguments)]
fn build_coalgebra<S: AsRef<str>>(
    signature: Option<&SignatureRef>,
    states: usize,
    transitions: impl Iterator<Item = (S, Vec<usize>)>,
    n_transitions: usize,
    root: Option<usize>,
    sig: Option<Arc<Signature>>,
    base: Option<&Path>,
    cap: usize,
) -> Result<(Coalgebra, Option<usize>), FormatError> {
    let sig = match (sig, signature) {
        (Some(s), _) => s,
        (None, Some(r)) => resolve(base, r, cap)?,
        (None, None) => return Err(FormatError::MissingSignature),
    };
    if states != n_transitions {
        return Err(FormatError::StateCount {
            states,
            transitions: n_transitions,
        });
    }
    let raw = transitions
        .map(|(op, tuple)| Ok((sig.lookup(op.as_ref())?, tuple)))
        .collect::<Result<Vec<_>, SignatureError>>()?;
    let c = Coalgebra::from_raw(sig, raw)?;
    if let Some(r) = root {
        c.check_state(r)?;
    }
    Ok((c, root))
}

/// Zero-copy mirror of [`CoalgebraFile`] for parsing.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoalgebraFileRef<'a> {
    #[serde(default)]
    signature: Option<SignatureRef>,
    states: usize,
    #[serde(borrow)]
    transitions: Vec<TransitionRef<'a>>,
    #[serde(default)]
    root: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionRef<'a> {
    #[serde(borrow)]
    op: Cow<'a, str>,
    tuple: Vec<usize>,
}

pub fn coalgebra_to_file(
    c: &Coalgebra,
    signature: Option<SignatureRef>,
    root: Option<usize>,
) -> CoalgebraFile {
    let sig = c.signature();
    CoalgebraFile {
        signature,
        states: c.n_states(),
        transitions: c
            .transitions()
            .iter()
            .map(|t| TransitionJson {
                op: sig.name(t.op()).to_string(),
                tuple: t.tuple().to_vec(),
            })
            .collect(),
        root,
    }
}

/// Parses coalgebra JSON text; the root defaults to 0.
pub fn parse_pointed(
    text: &str,
    sig: Option<Arc<Signature>>,
    base: Option<&Path>,
    cap: usize,
) -> Result<PointedCoalgebra, FormatError> {
    let file: CoalgebraFileRef = serde_json::from_str(text)?;
    let n = file.transitions.len();
    let (c, root) = build_coalgebra(
        file.signature.as_ref(),
        file.states,
        file.transitions.into_iter().map(|t| (t.op, t.tuple)),
        n,
        file.root,
        sig,
        base,
        cap,
    )?;
    Ok(c.pointed(root.unwrap_or(0))?)
}

pub fn term_from_json(sig: &Signature, j: &TermJson) -> Result<Term, FormatError> {
    match j {
        TermJson::F { op, children } => {
            let children = children
                .iter()
                .map(|c| term_from_json(sig, c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::f(sig, sig.lookup(op)?, children)?)
        }
        TermJson::G { prefix, period } => {
            let ctx = |cs: &[ContextJson]| {
                cs.iter()
                    .map(|c| context_from_json(sig, c))
                    .collect::<Result<Vec<_>, FormatError>>()
            };
            Ok(Term::g(ctx(prefix)?, ctx(period)?)?)
        }
    }
}

fn context_from_json(sig: &Signature, c: &ContextJson) -> Result<ContextElem<Term>, FormatError> {
    let sides = c
        .sides
        .iter()
        .map(|s| term_from_json(sig, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sig.canonical_context(sig.lookup(&c.op)?, c.hole, sides)?)
}

pub fn term_to_json(sig: &Signature, t: &Term) -> TermJson {
    match t.node() {
        TermNode::F(e) => TermJson::F {
            op: sig.name(e.op()).to_string(),
            children: e.tuple().iter().map(|c| term_to_json(sig, c)).collect(),
        },
        TermNode::G(l) => {
            let ctx = |cs: &[ContextElem<Term>]| {
                cs.iter()
                    .map(|c| ContextJson {
                        op: sig.name(c.op()).to_string(),
                        hole: c.hole(),
                        sides: c.sides().iter().map(|s| term_to_json(sig, s)).collect(),
                    })
                    .collect()
            };
            TermJson::G {
                prefix: ctx(l.prefix()),
                period: ctx(l.period()),
            }
        }
    }
}

/// Parses a term file. `sig` overrides a signature named in the file.
pub fn parse_term(
    text: &str,
    sig: Option<Arc<Signature>>,
    base: Option<&Path>,
    cap: usize,
) -> Result<(Arc<Signature>, Term), FormatError> {
    let file: TermFile = serde_json::from_str(text)?;
    let (sig, j) = match (&file, sig) {
        (TermFile::Wrapped { term, .. }, Some(s)) | (TermFile::Bare(term), Some(s)) => (s, term),
        (TermFile::Wrapped { signature, term }, None) => (resolve(base, signature, cap)?, term),
        (TermFile::Bare(_), None) => return Err(FormatError::MissingSignature),
    };
    let t = term_from_json(&sig, j)?;
    Ok((sig, t))
}

pub fn signature_to_json(sig: &Signature) -> String {
    serde_json::to_string_pretty(&sig.spec()).expect("signatures serialize")
}
