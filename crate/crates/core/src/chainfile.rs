//! Plain-text chain files.
//!
//! ```text
//! # two-node chain
//! nodes 2
//! 0 - - - 0.5
//! 1 0 0.5 0.5 0.5
//! ```
//!
//! After the `nodes N` header come `N` lines `id parent mu lambda kappa`.
//! The root line is `0 - - - kappa0`, every parent is declared before its
//! children, and a missing `kappa` means 0. Blank lines and lines starting
//! with `#` are skipped.

use std::fmt::Write as _;

use thiserror::Error;

use crate::chain::{validate, ChainSpec, DEFAULT_TOLERANCE};
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

impl ChainFileError {
    pub fn line(&self) -> usize {
        match self {
            ChainFileError::Syntax { line, .. } | ChainFileError::Invalid { line, .. } => *line,
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ChainFileError {
    ChainFileError::Syntax {
        line,
        message: message.into(),
    }
}

fn number(line: usize, field: &str, token: &str) -> Result<f64, ChainFileError> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| syntax(line, format!("{field} '{token}' is not a number")))
}

/// Parses and validates a chain file.
pub fn parse(text: &str) -> Result<(Tree, ChainSpec), ChainFileError> {
    let (tree, spec, lines) = parse_unchecked(text)?;
    let report = validate(&tree, &spec, DEFAULT_TOLERANCE);
    if let Some(v) = report.violations.first() {
        // sizes always match here; the node's own line carries the blame
        let line = lines[v.node];
        return Err(ChainFileError::Invalid {
            line,
            message: v.to_string(),
        });
    }
    Ok((tree, spec))
}

/// Parses without checking the sum rule. Also returns the line of each
/// node, indexed by id.
pub fn parse_unchecked(text: &str) -> Result<(Tree, ChainSpec, Vec<usize>), ChainFileError> {
    let mut header: Option<(usize, usize)> = None;
    let mut parents: Vec<Option<NodeId>> = Vec::new();
    let mut lines: Vec<usize> = Vec::new();
    let mut spec = ChainSpec::zeros(0);
    let mut seen: Vec<bool> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let Some((_, n)) = header else {
            if fields.len() != 2 || fields[0] != "nodes" {
                return Err(syntax(line, "expected header 'nodes N'"));
            }
            let n: usize = fields[1]
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| syntax(line, format!("bad node count '{}'", fields[1])))?;
            header = Some((line, n));
            parents = vec![None; n];
            lines = vec![0; n];
            seen = vec![false; n];
            spec = ChainSpec::zeros(n);
            continue;
        };
        if !(4..=5).contains(&fields.len()) {
            return Err(syntax(line, "expected 'id parent mu lambda [kappa]'"));
        }
        let id: NodeId = fields[0]
            .parse()
            .map_err(|_| syntax(line, format!("bad node id '{}'", fields[0])))?;
        if id >= n {
            return Err(syntax(
                line,
                format!("node {id} out of range for {n} nodes"),
            ));
        }
        if seen[id] {
            return Err(syntax(line, format!("node {id} declared twice")));
        }
        let kappa = match fields.get(4) {
            Some(tok) => number(line, "kappa", tok)?,
            None => 0.0,
        };
        if id == 0 {
            if fields[1..4].iter().any(|&f| f != "-") {
                return Err(syntax(line, "root line must read '0 - - - kappa'"));
            }
        } else {
            let parent: NodeId = fields[1]
                .parse()
                .map_err(|_| syntax(line, format!("bad parent '{}' for node {id}", fields[1])))?;
            if parent >= n || !seen[parent] {
                return Err(syntax(
                    line,
                    format!("parent {parent} of node {id} is not declared above"),
                ));
            }
            if parent >= id {
                return Err(syntax(
                    line,
                    format!("parent {parent} must have a smaller id than {id}"),
                ));
            }
            parents[id] = Some(parent);
            spec.mu[id] = number(line, "mu", fields[2])?;
            spec.lambda[id] = number(line, "lambda", fields[3])?;
        }
        spec.kappa[id] = kappa;
        seen[id] = true;
        lines[id] = line;
    }

    let Some((header_line, n)) = header else {
        return Err(syntax(last_line.max(1), "missing header 'nodes N'"));
    };
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(syntax(
            header_line,
            format!("node {missing} is never declared"),
        ));
    }
    let tree = Tree::from_parents(&parents).map_err(|e| syntax(header_line, e.to_string()))?;
    debug_assert_eq!(tree.node_count(), n);
    Ok((tree, spec, lines))
}

/// Writes a chain in the format read by [`parse`]; `parse(&emit(..))`
/// reproduces the same tree and probabilities bit for bit.
pub fn emit(tree: &Tree, spec: &ChainSpec) -> String {
    let mut out = String::new();
    let n = tree.node_count();
    writeln!(out, "nodes {n}").unwrap();
    writeln!(out, "0 - - - {}", spec.kappa[0]).unwrap();
    for x in 1..n {
        let p = tree.parent(x).expect("non-root");
        writeln!(
            out,
            "{x} {p} {} {} {}",
            spec.mu[x], spec.lambda[x], spec.kappa[x]
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "# two-node chain\nnodes 2\n0 - - - 0.5\n1 0 0.5 0.5 0.5\n";

    #[test]
    fn parses_two_node() {
        let (t, s) = parse(TWO).unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(s.mu[1], 0.5);
        assert_eq!(s.kappa, vec![0.5, 0.5]);
    }

    #[test]
    fn round_trip() {
        let text = "nodes 3\n0 - - - 0.1\n1 0 0.3 0.9 0\n2 1 1 0.7\n";
        let (t, s) = parse_unchecked(text).map(|(t, s, _)| (t, s)).unwrap();
        let again = emit(&t, &s);
        let (t2, s2, _) = parse_unchecked(&again).unwrap();
        assert_eq!(s, s2);
        assert_eq!(t2.parent(2), Some(1));
        assert_eq!(emit(&t2, &s2), again);
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse("nodes 2\n0 - - - 0.5\n1 0 0.5 oops 0.5\n").unwrap_err();
        assert_eq!(e.line(), 3);
        let e = parse("nodes 2\n0 - - - 0.5\n1 0 0.6 0.5 0.5\n").unwrap_err();
        assert!(matches!(e, ChainFileError::Invalid { line: 3, .. }));
        let e = parse("nodes 3\n0 - - - 0.5\n2 1 0.5 0.5 0.5\n").unwrap_err();
        assert_eq!(e.line(), 3);
        let e = parse("nodes 3\n0 - - - 0.5\n1 0 0.5 0.5 0.5\n").unwrap_err();
        assert_eq!(e.line(), 1);
        assert_eq!(parse("# nothing\n").unwrap_err().line(), 1);
        assert_eq!(
            parse("nodes 2\n0 - - - 1\n0 - - - 1\n").unwrap_err().line(),
            3
        );
        assert_eq!(parse("nodes 2\n0 1 - - 1\n").unwrap_err().line(), 2);
    }
}
