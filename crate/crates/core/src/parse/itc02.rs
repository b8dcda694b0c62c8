//! Tolerant reader for ITC'02 SOC benchmark files.
//!
//! Only the fields the scheduler needs are kept: per-module I/O counts,
//! scan-chain lengths and the pattern count summed over all of a module's
//! tests. Hierarchy, options, and per-test resource flags are skipped with a
//! warning each.

use std::collections::{BTreeMap, HashSet};

use super::{content, ParseDiagnostic, ParseError, Parsed};
use crate::model::{CoreSpec, SocSpec};

#[derive(Debug, Default)]
struct Module {
    number: u32,
    line: usize,
    name: Option<String>,
    inputs: u32,
    outputs: u32,
    bidirs: u32,
    scan: Vec<u32>,
    patterns: u64,
    tests: usize,
}

struct Reader {
    diagnostics: Vec<ParseDiagnostic>,
    soc_name: Option<String>,
    declared_modules: Option<(usize, u32)>,
    modules: Vec<Module>,
    by_number: BTreeMap<u32, usize>,
    /// Scan chain lengths still expected from continuation lines:
    /// (module index, remaining count).
    pending_scan: Option<(usize, usize)>,
    current: Option<usize>,
}

fn keyword(token: &str, expected: &str) -> bool {
    token.eq_ignore_ascii_case(expected)
}

fn number(token: Option<&&str>) -> Option<u64> {
    token.and_then(|t| t.parse().ok())
}

impl Reader {
    fn warn(&mut self, line: usize, message: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic::warning(line, message));
    }

    fn error(&mut self, line: usize, message: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic::error(line, message));
    }

    fn line(&mut self, line: usize, tokens: &[&str]) {
        if let Some((module, remaining)) = self.pending_scan {
            if tokens[0].starts_with(|c: char| c.is_ascii_alphabetic()) {
                let number = self.modules[module].number;
                self.error(line, format!("module {number} is missing {remaining} scan chain lengths"));
                self.pending_scan = None;
            } else {
                let taken = self.scan_lengths(line, module, tokens, remaining);
                if taken < tokens.len() {
                    self.error(line, "unexpected tokens after scan chain list");
                }
                return;
            }
        }
        let head = tokens[0];
        if keyword(head, "SocName") {
            match tokens.get(1) {
                Some(name) => self.soc_name = Some(name.to_string()),
                None => self.error(line, "`SocName` without a name"),
            }
        } else if keyword(head, "TotalModules") {
            match number(tokens.get(1)) {
                Some(n) => self.declared_modules = Some((line, n as u32)),
                None => self.error(line, "`TotalModules` needs an integer"),
            }
        } else if keyword(head, "Module") {
            match number(tokens.get(1)) {
                Some(n) => self.module_line(line, n as u32, &tokens[2..]),
                None => self.error(line, "`Module` needs a module number"),
            }
        } else if keyword(head, "Test") {
            match self.current {
                Some(m) => self.test_line(line, m, &tokens[1..]),
                None => self.error(line, "`Test` before any `Module`"),
            }
        } else {
            self.warn(line, format!("ignored `{head}` line"));
        }
    }

    fn module_line(&mut self, line: usize, module_no: u32, rest: &[&str]) {
        let known = self.by_number.get(&module_no).copied();
        let Some(first) = rest.first() else {
            self.warn(line, format!("ignored empty `Module {module_no}` line"));
            return;
        };
        if keyword(first, "Test") {
            match known {
                Some(m) => self.test_line(line, m, &rest[1..]),
                None => self.error(line, format!("test for undeclared module {module_no}")),
            }
            return;
        }
        if keyword(first, "TotalTests") {
            self.warn(line, format!("ignored `TotalTests` for module {module_no}"));
            return;
        }
        if known.is_some() {
            self.error(line, format!("module {module_no} declared twice"));
            return;
        }
        let index = self.modules.len();
        self.modules.push(Module { number: module_no, line, ..Default::default() });
        self.by_number.insert(module_no, index);
        self.current = Some(index);

        let mut i = 0;
        while i < rest.len() {
            let key = rest[i];
            if key.starts_with('\'') || key.starts_with('"') {
                let name = key.trim_matches(|c| c == '\'' || c == '"');
                self.modules[index].name = Some(name.to_string());
                i += 1;
                continue;
            }
            let value = number(rest.get(i + 1));
            let field = |m: &mut Module, v: u32| {
                if keyword(key, "Inputs") {
                    m.inputs = v;
                } else if keyword(key, "Outputs") {
                    m.outputs = v;
                } else {
                    m.bidirs = v;
                }
            };
            if ["Inputs", "Outputs", "Bidirs"].iter().any(|k| keyword(key, k)) {
                match value.and_then(|v| u32::try_from(v).ok()) {
                    Some(v) => field(&mut self.modules[index], v),
                    None => self.error(line, format!("`{key}` needs an integer")),
                }
                i += 2;
            } else if keyword(key, "ScanChains") {
                let Some(count) = value else {
                    self.error(line, "`ScanChains` needs an integer");
                    return;
                };
                i += 2;
                if rest.get(i) == Some(&":") {
                    i += 1;
                }
                let taken = self.scan_lengths(line, index, &rest[i..], count as usize);
                i += taken;
            } else if keyword(key, "Level") {
                self.warn(line, format!("ignored hierarchy level of module {module_no}"));
                i += 2;
            } else if key == ":" {
                i += 1;
            } else {
                self.warn(line, format!("ignored `{key}` on module {module_no}"));
                i += if value.is_some() { 2 } else { 1 };
            }
        }
    }

    /// Consumes up to `remaining` scan lengths from `tokens`; returns how
    /// many tokens were used and records what is still outstanding.
    fn scan_lengths(&mut self, line: usize, module: usize, tokens: &[&str], remaining: usize) -> usize {
        let mut used = 0;
        let mut left = remaining;
        while left > 0 && used < tokens.len() {
            match tokens[used].parse::<u32>() {
                Ok(0) => self.error(line, "scan chain length 0"),
                Ok(len) => self.modules[module].scan.push(len),
                Err(_) => {
                    self.error(line, format!("invalid scan chain length `{}`", tokens[used]));
                    self.pending_scan = None;
                    return tokens.len();
                }
            }
            used += 1;
            left -= 1;
        }
        self.pending_scan = (left > 0).then_some((module, left));
        used
    }

    fn test_line(&mut self, line: usize, module: usize, rest: &[&str]) {
        let module_no = self.modules[module].number;
        let mut patterns = None;
        let mut i = 0;
        // Leading test number.
        if rest.first().is_some_and(|t| t.parse::<u64>().is_ok()) {
            i = 1;
        }
        while i < rest.len() {
            let key = rest[i];
            let value = number(rest.get(i + 1));
            if keyword(key, "Patterns") {
                match value {
                    Some(p) => patterns = Some(p),
                    None => self.error(line, "`Patterns` needs an integer"),
                }
                i += 2;
            } else {
                self.warn(line, format!("ignored test attribute `{key}` of module {module_no}"));
                i += if value.is_some() { 2 } else { 1 };
            }
        }
        match patterns {
            Some(p) => {
                let m = &mut self.modules[module];
                m.patterns += p;
                m.tests += 1;
                if m.tests == 2 {
                    self.warn(
                        line,
                        format!("module {module_no} has several tests; pattern counts are summed"),
                    );
                }
            }
            None => self.error(line, format!("test of module {module_no} without `Patterns`")),
        }
    }
}

pub fn parse_itc02(text: &str) -> Result<Parsed, ParseError> {
    let mut reader = Reader {
        diagnostics: Vec::new(),
        soc_name: None,
        declared_modules: None,
        modules: Vec::new(),
        by_number: BTreeMap::new(),
        pending_scan: None,
        current: None,
    };
    let mut last_line = 0;
    for (index, raw) in text.split('\n').enumerate() {
        let tokens: Vec<&str> = content(raw).split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        last_line = index + 1;
        reader.line(index + 1, &tokens);
    }
    if let Some((module, left)) = reader.pending_scan {
        let number = reader.modules[module].number;
        reader.error(last_line, format!("module {number} is missing {left} scan chain lengths"));
    }
    if let Some((line, declared)) = reader.declared_modules {
        if declared as usize != reader.modules.len() {
            reader
                .warn(line, format!("`TotalModules {declared}` but {} modules found", reader.modules.len()));
        }
    }

    let mut cores = Vec::new();
    let mut names = HashSet::new();
    let modules = std::mem::take(&mut reader.modules);
    for m in modules {
        if m.patterns == 0 {
            reader.warn(m.line, format!("module {} has no test patterns; skipped", m.number));
            continue;
        }
        if m.scan.is_empty() && m.inputs == 0 && m.outputs == 0 && m.bidirs == 0 {
            reader.warn(m.line, format!("module {} has nothing to scan; skipped", m.number));
            continue;
        }
        let Ok(patterns) = u32::try_from(m.patterns) else {
            reader.error(m.line, format!("module {} pattern total exceeds 32 bits", m.number));
            continue;
        };
        let name = m.name.unwrap_or_else(|| m.number.to_string());
        if !names.insert(name.clone()) {
            reader.error(m.line, format!("duplicate core name `{name}`"));
            continue;
        }
        let id = cores.len() as u32 + 1;
        match CoreSpec::new(id, name, m.inputs, m.outputs, m.bidirs, patterns, m.scan) {
            Ok(core) => cores.push(core),
            Err(e) => reader.error(m.line, e.to_string()),
        }
    }
    if cores.is_empty() && !reader.diagnostics.iter().any(|d| d.severity == super::Severity::Error) {
        reader.error(last_line, "no parsable module block");
    }
    if reader.diagnostics.iter().any(|d| d.severity == super::Severity::Error) {
        return Err(ParseError { diagnostics: reader.diagnostics });
    }
    let name = reader.soc_name.unwrap_or_else(|| {
        reader.diagnostics.push(ParseDiagnostic::warning(0, "no `SocName`; using `soc`"));
        "soc".to_string()
    });
    let soc = SocSpec::new(name, cores)
        .map_err(|e| ParseError { diagnostics: vec![ParseDiagnostic::error(0, e.to_string())] })?;
    Ok(Parsed { soc, warnings: reader.diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
SocName tiny
TotalModules 4
Options Power 0 XY 0
Module 0 Level 0 Inputs 0 Outputs 0 Bidirs 0 ScanChains 0 :
Module 1 Level 1 Inputs 5 Outputs 4 Bidirs 2 ScanChains 0 :
Module 1 TotalTests 1
Module 1 Test 1 ScanUse 0 TamUse 1 Patterns 9
Module 2 'alu' Level 1 Inputs 3 Outputs 3 Bidirs 0 ScanChains 5 : 10 9
  8 7
  6
Module 2 Test 1 Patterns 4
Module 2 Test 2 Patterns 6
";

    #[test]
    fn reads_modules() {
        let parsed = parse_itc02(SAMPLE).unwrap();
        let soc = &parsed.soc;
        assert_eq!(soc.name, "tiny");
        assert_eq!(soc.cores.len(), 2);
        let c1 = &soc.cores[0];
        assert_eq!((c1.id, c1.name.as_str(), c1.num_inputs, c1.num_bidirs), (1, "1", 5, 2));
        assert!(c1.is_combinational());
        let c2 = &soc.cores[1];
        assert_eq!(c2.name, "alu");
        assert_eq!(c2.scan_chain_lengths, vec![10, 9, 8, 7, 6]);
        assert_eq!(c2.num_patterns, 10);
        let messages: Vec<&str> = parsed.warnings.iter().map(|d| d.message.as_str()).collect();
        assert!(messages.contains(&"module 0 has no test patterns; skipped"));
        assert!(messages.contains(&"module 2 has several tests; pattern counts are summed"));
        assert!(messages.iter().any(|m| m.contains("hierarchy level")));
        assert!(messages.iter().any(|m| m.contains("`TotalModules 4` but 3 modules found")));
    }

    #[test]
    fn no_module_is_an_error() {
        let err = parse_itc02("SocName x\nOptions Power 0\n").unwrap_err();
        assert_eq!(err.errors().next().unwrap().message, "no parsable module block");
    }

    #[test]
    fn truncated_scan_list() {
        let err = parse_itc02("Module 1 Inputs 1 Outputs 1 ScanChains 3 : 4 4\n").unwrap_err();
        assert!(err.errors().next().unwrap().message.contains("missing 1 scan chain"));
    }
}
