//! The Kripke text format.
//!
//! UTF-8; `#` starts a comment running to end of line. The first
//! non-comment line must be `kripke`, followed by `state <name> [<prop>…]`
//! lines, an optional single `init <name>` line, and `edge <from> <to>
//! [<to>…]` lines. Names match `[A-Za-z0-9_]+`; duplicate edges are
//! idempotent; unknown names are errors. State order is file order, and
//! the proposition alphabet is ordered by first appearance.

use std::collections::BTreeSet;

use ctlsync::kripke::{KripkeError, KripkeStructure};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: expected 'kripke' header, found '{found}'")]
    MissingHeader { line: usize, found: String },
    #[error("line {line}: unknown directive '{directive}'")]
    UnknownDirective { line: usize, directive: String },
    #[error("line {line}: {directive} needs at least {want} argument(s)")]
    MissingArguments {
        line: usize,
        directive: &'static str,
        want: usize,
    },
    #[error("line {line}: invalid name '{name}' (allowed: [A-Za-z0-9_]+)")]
    BadName { line: usize, name: String },
    #[error("line {line}: duplicate state '{name}'")]
    DuplicateState { line: usize, name: String },
    #[error("line {line}: unknown state '{name}'")]
    UnknownState { line: usize, name: String },
    #[error("line {line}: 'state' must come before 'init' and 'edge' lines")]
    StateAfterEdges { line: usize },
    #[error("line {line}: duplicate 'init' line")]
    DuplicateInit { line: usize },
    #[error("line {line}: 'init' must come before 'edge' lines")]
    InitAfterEdges { line: usize },
    #[error("totality violation: {0}; pass --complete-selfloops to repair")]
    Totality(String),
    #[error(transparent)]
    Structure(KripkeError),
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the text format. With `complete_selfloops`, successor-less
/// states get a self-loop instead of failing validation.
pub fn parse_kripke(
    text: &str,
    complete_selfloops: bool,
) -> Result<(KripkeStructure, Option<String>), FormatError> {
    let mut names: Vec<String> = Vec::new();
    let mut props: Vec<String> = Vec::new();
    let mut labels: Vec<BTreeSet<usize>> = Vec::new();
    let mut succs: Vec<Vec<usize>> = Vec::new();
    let mut init: Option<String> = None;
    let mut seen_header = false;
    let mut seen_init = false;
    let mut seen_edges = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let directive = fields.next().expect("nonempty line has a first field");
        let args: Vec<&str> = fields.collect();
        if !seen_header {
            if directive == "kripke" && args.is_empty() {
                seen_header = true;
                continue;
            }
            return Err(FormatError::MissingHeader {
                line,
                found: content.to_string(),
            });
        }
        match directive {
            "state" => {
                if seen_init || seen_edges {
                    return Err(FormatError::StateAfterEdges { line });
                }
                let Some((name, prop_names)) = args.split_first() else {
                    return Err(FormatError::MissingArguments {
                        line,
                        directive: "state",
                        want: 1,
                    });
                };
                if !valid_name(name) {
                    return Err(FormatError::BadName {
                        line,
                        name: name.to_string(),
                    });
                }
                if names.iter().any(|n| n == name) {
                    return Err(FormatError::DuplicateState {
                        line,
                        name: name.to_string(),
                    });
                }
                let mut labs = BTreeSet::new();
                for prop in prop_names {
                    if !valid_name(prop) {
                        return Err(FormatError::BadName {
                            line,
                            name: prop.to_string(),
                        });
                    }
                    let p = match props.iter().position(|x| x == prop) {
                        Some(p) => p,
                        None => {
                            props.push(prop.to_string());
                            props.len() - 1
                        }
                    };
                    labs.insert(p);
                }
                names.push(name.to_string());
                labels.push(labs);
                succs.push(Vec::new());
            }
            "init" => {
                if seen_edges {
                    return Err(FormatError::InitAfterEdges { line });
                }
                if seen_init {
                    return Err(FormatError::DuplicateInit { line });
                }
                if args.len() != 1 {
                    return Err(FormatError::MissingArguments {
                        line,
                        directive: "init",
                        want: 1,
                    });
                }
                if !names.iter().any(|n| n == args[0]) {
                    return Err(FormatError::UnknownState {
                        line,
                        name: args[0].to_string(),
                    });
                }
                init = Some(args[0].to_string());
                seen_init = true;
            }
            "edge" => {
                seen_edges = true;
                if args.len() < 2 {
                    return Err(FormatError::MissingArguments {
                        line,
                        directive: "edge",
                        want: 2,
                    });
                }
                let resolve = |name: &str| -> Result<usize, FormatError> {
                    names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| FormatError::UnknownState {
                            line,
                            name: name.to_string(),
                        })
                };
                let from = resolve(args[0])?;
                for to_name in &args[1..] {
                    let to = resolve(to_name)?;
                    if !succs[from].contains(&to) {
                        succs[from].push(to);
                    }
                }
            }
            other => {
                return Err(FormatError::UnknownDirective {
                    line,
                    directive: other.to_string(),
                })
            }
        }
    }
    if !seen_header {
        return Err(FormatError::MissingHeader {
            line: 0,
            found: "<empty input>".to_string(),
        });
    }
    if complete_selfloops {
        for (i, ss) in succs.iter_mut().enumerate() {
            if ss.is_empty() {
                ss.push(i);
            }
        }
    }
    match KripkeStructure::new(names, props, labels, succs) {
        Ok(k) => Ok((k, init)),
        Err(KripkeError::Totality { state }) => Err(FormatError::Totality(format!(
            "state {state} has no successor"
        ))),
        Err(other) => Err(FormatError::Structure(other)),
    }
}

/// Serializes a structure in the text format; output is stable for a given
/// structure.
pub fn write_kripke(k: &KripkeStructure, init: Option<&str>) -> String {
    let mut out = String::from("kripke\n");
    for t in 0..k.len() {
        out.push_str("state ");
        out.push_str(k.state_name(t));
        for &p in k.labels_of(t) {
            out.push(' ');
            out.push_str(&k.props()[p]);
        }
        out.push('\n');
    }
    if let Some(name) = init {
        out.push_str("init ");
        out.push_str(name);
        out.push('\n');
    }
    for t in 0..k.len() {
        out.push_str("edge ");
        out.push_str(k.state_name(t));
        for &t2 in k.successors_of(t) {
            out.push(' ');
            out.push_str(k.state_name(t2));
        }
        out.push('\n');
    }
    out
}
