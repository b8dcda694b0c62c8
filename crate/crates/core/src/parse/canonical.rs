//! The project's own line format:
//!
//! ```text
//! soc NAME
//! core NAME inputs INT outputs INT bidirs INT patterns INT scan INT*
//! ```
//!
//! Tokens are whitespace separated and case-sensitive; `#` starts a comment.

use std::collections::HashSet;
use std::fmt::Write;

use super::{content, ParseDiagnostic, ParseError};
use crate::model::{CoreSpec, SocSpec};

const FIELDS: [&str; 4] = ["inputs", "outputs", "bidirs", "patterns"];

pub fn parse_canonical(text: &str) -> Result<SocSpec, ParseError> {
    let mut diagnostics = Vec::new();
    let mut soc_name: Option<String> = None;
    let mut cores: Vec<CoreSpec> = Vec::new();
    let mut names = HashSet::new();
    let mut last_line = 0;

    for (index, raw) in text.split('\n').enumerate() {
        let line = index + 1;
        let tokens: Vec<&str> = content(raw).split_whitespace().collect();
        let Some(&directive) = tokens.first() else { continue };
        last_line = line;
        match directive {
            "soc" => {
                if soc_name.is_some() {
                    diagnostics.push(ParseDiagnostic::error(line, "duplicate `soc` header"));
                } else if tokens.len() != 2 {
                    diagnostics.push(ParseDiagnostic::error(line, "expected `soc <name>`"));
                    soc_name = Some(String::new());
                } else {
                    soc_name = Some(tokens[1].to_string());
                }
            }
            "core" => {
                if soc_name.is_none() {
                    diagnostics.push(ParseDiagnostic::error(
                        line,
                        "expected `soc <name>` header before the first core",
                    ));
                    soc_name = Some(String::new());
                }
                match core_line(&tokens, cores.len() as u32 + 1) {
                    Ok(core) => {
                        if !names.insert(core.name.clone()) {
                            diagnostics.push(ParseDiagnostic::error(
                                line,
                                format!("duplicate core name `{}`", core.name),
                            ));
                        }
                        cores.push(core);
                    }
                    Err(message) => diagnostics.push(ParseDiagnostic::error(line, message)),
                }
            }
            other => diagnostics.push(ParseDiagnostic::error(line, format!("unknown directive `{other}`"))),
        }
    }

    if soc_name.is_none() {
        diagnostics.push(ParseDiagnostic::error(last_line, "expected `soc <name>` header"));
    } else if cores.is_empty() && diagnostics.is_empty() {
        diagnostics.push(ParseDiagnostic::error(last_line, "no `core` lines"));
    }
    if !diagnostics.is_empty() {
        return Err(ParseError { diagnostics });
    }
    SocSpec::new(soc_name.unwrap_or_default(), cores)
        .map_err(|e| ParseError { diagnostics: vec![ParseDiagnostic::error(0, e.to_string())] })
}

fn core_line(tokens: &[&str], id: u32) -> Result<CoreSpec, String> {
    let name = tokens.get(1).ok_or("expected a core name after `core`")?;
    let mut rest = tokens[2..].iter();
    let mut values = [0u32; 4];
    for (slot, field) in values.iter_mut().zip(FIELDS) {
        match rest.next() {
            Some(&t) if t == field => {}
            _ if field == "patterns" => return Err("missing `patterns`".into()),
            Some(t) => return Err(format!("expected `{field}`, found `{t}`")),
            None => return Err(format!("expected `{field}`, found end of line")),
        }
        let value = rest.next().ok_or_else(|| format!("expected an integer after `{field}`"))?;
        *slot = integer(value)?;
    }
    match rest.next() {
        Some(&"scan") => {}
        Some(t) => return Err(format!("expected `scan`, found `{t}`")),
        None => return Err("expected `scan`, found end of line".into()),
    }
    let scan = rest.map(|t| integer(t)).collect::<Result<Vec<_>, _>>()?;
    if scan.contains(&0) {
        return Err("scan chain length 0".into());
    }
    let [inputs, outputs, bidirs, patterns] = values;
    if patterns == 0 {
        return Err("`patterns` must be at least 1".into());
    }
    CoreSpec::new(id, *name, inputs, outputs, bidirs, patterns, scan).map_err(|e| e.to_string())
}

fn integer(token: &str) -> Result<u32, String> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("invalid integer `{token}`"));
    }
    token.parse().map_err(|_| format!("integer `{token}` out of range"))
}

/// Writes `soc` in canonical form; `parse_canonical` reads it back exactly.
pub fn emit_canonical(soc: &SocSpec) -> String {
    let mut out = format!("soc {}\n", soc.name);
    for c in &soc.cores {
        let _ = write!(
            out,
            "core {} inputs {} outputs {} bidirs {} patterns {} scan",
            c.name, c.num_inputs, c.num_outputs, c.num_bidirs, c.num_patterns
        );
        for l in &c.scan_chain_lengths {
            let _ = write!(out, " {l}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first_error(text: &str) -> (usize, String) {
        let err = parse_canonical(text).unwrap_err();
        let d = err.errors().next().unwrap();
        (d.line, d.message.clone())
    }

    #[test]
    fn minimal_file() {
        let soc =
            parse_canonical("soc tiny\ncore c1 inputs 4 outputs 3 bidirs 0 patterns 10 scan\n").unwrap();
        assert_eq!(soc.name, "tiny");
        assert_eq!(soc.cores.len(), 1);
        let c = &soc.cores[0];
        assert_eq!((c.id, c.num_inputs, c.num_outputs, c.num_patterns), (1, 4, 3, 10));
        assert!(c.is_combinational());
    }

    #[test]
    fn scan_lengths_and_crlf() {
        let text =
            "soc tiny\r\n# comment\r\ncore c1 inputs 4 outputs 3 bidirs 0 patterns 10 scan 4 3 3 # tail\r\n";
        let soc = parse_canonical(text).unwrap();
        assert_eq!(soc.cores[0].scan_chain_lengths, vec![4, 3, 3]);
    }

    #[test]
    fn emits_what_it_reads() {
        let text = "soc s\ncore a inputs 1 outputs 2 bidirs 3 patterns 4 scan 5 6\ncore b inputs 0 outputs 1 bidirs 0 patterns 1 scan\n";
        assert_eq!(emit_canonical(&parse_canonical(text).unwrap()), text);
    }

    #[test]
    fn diagnostics() {
        assert_eq!(first_error("soc s\nmodule x\n"), (2, "unknown directive `module`".into()));
        assert_eq!(
            first_error("soc s\ncore a inputs 1 outputs 1 bidirs 0 scan\n"),
            (2, "missing `patterns`".into())
        );
        assert_eq!(
            first_error("soc s\ncore a inputs 1 outputs 1 bidirs 0 patterns 2 scan 3 0\n"),
            (2, "scan chain length 0".into())
        );
        assert_eq!(
            first_error(
                "soc s\ncore a inputs 1 outputs 1 bidirs 0 patterns 2 scan\ncore a inputs 1 outputs 1 bidirs 0 patterns 2 scan\n"
            ),
            (3, "duplicate core name `a`".into())
        );
        assert_eq!(
            first_error("soc s\ncore a inputs x outputs 1 bidirs 0 patterns 2 scan\n"),
            (2, "invalid integer `x`".into())
        );
        assert_eq!(first_error("soc s\n"), (1, "no `core` lines".into()));
    }

    #[test]
    fn reports_every_bad_line() {
        let err = parse_canonical("soc s\nfoo\nbar\ncore a inputs 1 outputs 1 bidirs 0 patterns 1 scan\n")
            .unwrap_err();
        let lines: Vec<usize> = err.errors().map(|d| d.line).collect();
        assert_eq!(lines, vec![2, 3]);
    }
}
